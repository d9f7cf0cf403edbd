//! The mean-field self-interaction V_eff(x) = ∫ K(x − x′) |ψ(x′)|² d³x′.
//!
//! Sign convention: V_eff is the attractive term of the single-object equation,
//! so it is ≤ 0 for the Newtonian kernel.

mod hockney;
mod radial;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::field::RealField;
use crate::grid::UniformGrid;

pub use hockney::singular_cell_constant;
use hockney::HockneyEngine;
pub use radial::{radial_potential, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum KernelVariant {
    /// −1/s.
    Newtonian,
    /// Exact interaction of two homogeneous spheres of radius `radius`.
    Sphere { radius: f64 },
    /// (1/R)(−6/5 + ½(s/R)²) at every separation.
    HarmonicSphere { radius: f64 },
    /// G = 0.
    None,
}

/// Self-interaction law with a dimensionless coupling (G M² in solver units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub variant: KernelVariant,
    pub strength: f64,
}

impl Kernel {
    pub fn newtonian() -> Self {
        Self {
            variant: KernelVariant::Newtonian,
            strength: 1.0,
        }
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        ensure_positive("sphere radius", radius)?;
        Ok(Self {
            variant: KernelVariant::Sphere { radius },
            strength: 1.0,
        })
    }

    pub fn harmonic_sphere(radius: f64) -> Result<Self> {
        ensure_positive("sphere radius", radius)?;
        Ok(Self {
            variant: KernelVariant::HarmonicSphere { radius },
            strength: 1.0,
        })
    }

    pub fn none() -> Self {
        Self {
            variant: KernelVariant::None,
            strength: 0.0,
        }
    }

    pub fn with_strength(mut self, strength: f64) -> Self {
        self.strength = strength;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.strength.is_finite() || self.strength < 0.0 {
            return Err(Error::Domain(format!("kernel strength must be >= 0, got {}", self.strength)));
        }
        match self.variant {
            KernelVariant::Sphere { radius } | KernelVariant::HarmonicSphere { radius } => {
                ensure_positive("sphere radius", radius)
            }
            _ => Ok(()),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self.variant, KernelVariant::None) || self.strength == 0.0
    }

    /// Kernel value at separation `s` ≥ 0. The Newtonian kernel diverges at 0.
    pub fn value(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("separation must be >= 0, got {s}")));
        }
        Ok(match self.variant {
            KernelVariant::Newtonian => -self.strength / s,
            KernelVariant::Sphere { radius } => self.strength * sphere_kernel_value(s, radius)?,
            KernelVariant::HarmonicSphere { radius } => {
                let xi = s / radius;
                self.strength / radius * (-1.2 + 0.5 * xi * xi)
            }
            KernelVariant::None => 0.0,
        })
    }
}

/// Interaction energy of two homogeneous unit-mass spheres of radius `radius`
/// whose centres are `s` apart (G = 1).
///
/// For ξ = s/R ≤ 2 the spheres overlap and
/// V = −(1/R)(6/5 − ξ²/2 + 3ξ³/16 − ξ⁵/160); beyond that V = −1/s.
pub fn sphere_kernel_value(s: f64, radius: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("separation must be >= 0, got {s}")));
    }
    ensure_positive("sphere radius", radius)?;
    let xi = s / radius;
    if xi >= 2.0 {
        return Ok(-1.0 / s);
    }
    let xi2 = xi * xi;
    let xi3 = xi2 * xi;
    Ok(-(1.2 - 0.5 * xi2 + 3.0 / 16.0 * xi3 - xi3 * xi2 / 160.0) / radius)
}

#[derive(Debug)]
enum Engine {
    Zero,
    /// Quadratic kernels reduce to the first three moments of the density.
    Moments { radius: f64 },
    Fft(Box<HockneyEngine>),
}

/// Potential solver bound to one grid and kernel; holds the transformed kernel
/// and FFT workspace, so use one instance per thread.
#[derive(Debug)]
pub struct PotentialSolver {
    grid: UniformGrid,
    kernel: Kernel,
    engine: Engine,
}

impl PotentialSolver {
    pub fn new(grid: UniformGrid, kernel: Kernel) -> Result<Self> {
        kernel.validate()?;
        let strength = kernel.strength;
        let engine = if kernel.is_none() {
            Engine::Zero
        } else {
            match kernel.variant {
                KernelVariant::None => Engine::Zero,
                KernelVariant::HarmonicSphere { radius } => Engine::Moments { radius },
                KernelVariant::Newtonian => {
                    let origin = -strength * singular_cell_constant() / grid.h();
                    Engine::Fft(Box::new(HockneyEngine::new(&grid, |s| -strength / s, origin)))
                }
                KernelVariant::Sphere { radius } => {
                    let value = move |s: f64| strength * sphere_kernel_value(s, radius).unwrap_or(0.0);
                    let origin = value(0.0);
                    Engine::Fft(Box::new(HockneyEngine::new(&grid, value, origin)))
                }
            }
        };
        Ok(Self { grid, kernel, engine })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// V_eff for an arbitrary real source (the map is linear in `density`).
    pub fn solve(&mut self, density: &RealField) -> Result<RealField> {
        self.grid.ensure_same(density.grid())?;
        let mut out = vec![0.0; self.grid.len()];
        self.solve_into(density.values(), &mut out);
        Ok(RealField::from_parts_unchecked(self.grid, out))
    }

    pub(crate) fn solve_into(&mut self, density: &[f64], out: &mut [f64]) {
        match &mut self.engine {
            Engine::Zero => out.fill(0.0),
            Engine::Fft(engine) => engine.convolve(density, out),
            Engine::Moments { radius } => {
                let radius = *radius;
                let grid = self.grid;
                let dv = grid.cell_volume();
                let coords = grid.coords();
                let n = grid.n();
                let mut mass = 0.0;
                let mut first = [0.0; 3];
                let mut second = 0.0;
                for (i, &w) in density.iter().enumerate() {
                    let x = [coords[i / (n * n)], coords[(i / n) % n], coords[i % n]];
                    mass += w;
                    first[0] += w * x[0];
                    first[1] += w * x[1];
                    first[2] += w * x[2];
                    second += w * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
                }
                mass *= dv;
                second *= dv;
                for f in &mut first {
                    *f *= dv;
                }
                let s = self.kernel.strength / radius;
                let inv = 0.5 / (radius * radius);
                for (i, o) in out.iter_mut().enumerate() {
                    let x = [coords[i / (n * n)], coords[(i / n) % n], coords[i % n]];
                    let x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                    let cross = x[0] * first[0] + x[1] * first[1] + x[2] * first[2];
                    *o = s * (-1.2 * mass + inv * (mass * x2 - 2.0 * cross + second));
                }
            }
        }
    }
}

/// One-off free-space potential solve for a normalized (or sub-normalized) density.
pub fn solve_potential(density: &RealField, kernel: &Kernel) -> Result<RealField> {
    if density.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Domain("density must be nonnegative".into()));
    }
    let total = density.integral();
    if total > 1.0 + 1e-6 {
        return Err(Error::Domain(format!("density integrates to {total} > 1")));
    }
    PotentialSolver::new(*density.grid(), *kernel)?.solve(density)
}
