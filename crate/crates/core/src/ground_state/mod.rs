//! Normalized minimizer φ₀ of the energy functional, its eigenvalue, and two
//! independent references: closed-form Gaussian trials and radial shooting.

mod shooting;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::{EnergyBreakdown, Hamiltonian};
use crate::error::{Error, Result};
use crate::field::{resample, ComplexField};
use crate::gravity::{Kernel, KernelVariant};
use crate::grid::UniformGrid;

pub use crate::energy::eigenvalue;
pub use shooting::{radial_shooting_oracle, ShootingResult};

/// Relative slack on the energy test below which a rise counts as roundoff.
pub const ENERGY_ROUNDOFF: f64 = 1e-12;

/// Step control for the imaginary-time descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentSchedule {
    /// Largest imaginary-time step. It is halved whenever a step would raise
    /// the energy and doubled again after a run of accepted steps.
    pub dtau: f64,
    /// Stop once ‖Hφ − εφ‖₂ falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Give up once halving drives the step below this.
    pub min_dtau: f64,
}

impl Default for DescentSchedule {
    fn default() -> Self {
        Self {
            dtau: 10.0,
            tol: 1e-8,
            max_iter: 50_000,
            min_dtau: 1e-10,
        }
    }
}

impl DescentSchedule {
    pub fn validate(&self) -> Result<()> {
        crate::error::ensure_positive("dtau", self.dtau)?;
        crate::error::ensure_positive("tol", self.tol)?;
        crate::error::ensure_positive("min_dtau", self.min_dtau)?;
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Starting point of the descent.
#[derive(Debug, Clone)]
pub enum Initial {
    Field(ComplexField),
    /// Gaussian at the closed-form variational optimum for the kernel.
    GaussianOptimum,
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    /// Real, nonnegative up to roundoff, centred on the origin.
    pub phi0: ComplexField,
    pub energy: EnergyBreakdown,
    pub epsilon: f64,
    /// rms radius sqrt(⟨|x|²⟩).
    pub width: f64,
    pub iterations: usize,
    /// Final ‖Hφ − εφ‖₂.
    pub residual: f64,
    /// Total energy after every accepted step, starting with the initial state.
    pub energy_history: Vec<f64>,
    pub boundary_contamination: f64,
    pub final_dtau: f64,
}

/// Minimize E[φ] subject to ‖φ‖² = 1.
///
/// Each step is a semi-implicit imaginary-time step: the kinetic operator is
/// treated implicitly in Fourier space and the potential is frozen at the
/// current iterate,
///
/// ```text
/// φ* = φ − dτ (1 + dτ(½k² + c))⁻¹ (Hφ − εφ),   φ ← φ*/‖φ*‖,
/// ```
///
/// with ε = ⟨φ|H|φ⟩ and c = max(−ε, 0). The fixed points are exactly the
/// solutions of Hφ = εφ for any dτ. A step that would raise E by more than
/// [`ENERGY_ROUNDOFF`]·|E| is retried with dτ halved.
pub fn minimize(
    grid: UniformGrid,
    kernel: Kernel,
    init: Initial,
    schedule: &DescentSchedule,
) -> Result<GroundStateResult> {
    schedule.validate()?;
    kernel.validate()?;
    if kernel.is_none() {
        return Err(Error::NoGroundState(
            "without self-interaction every packet spreads; the energy has no minimizer".into(),
        ));
    }
    let mut phi = match init {
        Initial::Field(f) => {
            grid.ensure_same(f.grid())?;
            f
        }
        Initial::GaussianOptimum => ComplexField::gaussian(grid, preset_sigma(&kernel)?, [0.0; 3])?,
    };
    phi.normalize(1.0)?;

    let mut ham = Hamiltonian::new(grid, kernel)?;
    let dv = grid.cell_volume();
    let mut density = Vec::with_capacity(grid.len());
    let mut potential = vec![0.0; grid.len()];
    ham.potential_into(phi.values(), &mut density, &mut potential);
    let mut energy = ham.energy_with_potential(&phi, &potential)?;
    let mut history = vec![energy.total];

    let half_k2 = ham.half_k2().to_vec();
    let mut h_phi = Vec::with_capacity(grid.len());
    let mut step = vec![Complex64::default(); grid.len()];
    let mut trial_potential = vec![0.0; grid.len()];
    let mut dtau = schedule.dtau;
    let mut streak = 0usize;
    let mut residual;
    let mut iterations = 0;

    loop {
        ham.apply(phi.values(), &potential, &mut h_phi);
        let eps: f64 = phi
            .values()
            .iter()
            .zip(&h_phi)
            .map(|(p, hp)| (p.conj() * hp).re)
            .sum::<f64>()
            * dv;
        let mut g2 = 0.0;
        for ((s, hp), p) in step.iter_mut().zip(&h_phi).zip(phi.values()) {
            *s = hp - p * eps;
            g2 += s.norm_sqr();
        }
        residual = (g2 * dv).sqrt();
        if !residual.is_finite() {
            return Err(Error::NonFinite("constrained gradient".into()));
        }
        if residual < schedule.tol {
            break;
        }
        if iterations >= schedule.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual,
                reason: format!("iteration limit reached (E = {:.10e}, dtau = {dtau:.3e})", energy.total),
            });
        }
        iterations += 1;
        if iterations % 200 == 0 {
            log::debug!("descent {iterations}: E = {:.12e}, residual = {residual:.3e}, dtau = {dtau:.3e}", energy.total);
        }

        ham.spectral().forward(&mut step);
        let shift = (-eps).max(0.0);
        let direction = step.clone();
        let slack = ENERGY_ROUNDOFF * energy.total.abs();
        loop {
            step.copy_from_slice(&direction);
            let mut predicted = 0.0;
            for (s, k) in step.iter_mut().zip(&half_k2) {
                let p = dtau / (1.0 + dtau * (k + shift));
                predicted += p * s.norm_sqr();
                *s *= -p;
            }
            // first-order decrease 2 Re⟨g, P g⟩ via Parseval
            predicted *= 2.0 * dv / grid.len() as f64;
            ham.spectral().inverse(&mut step);
            let mut trial: Vec<Complex64> = phi.values().iter().zip(&step).map(|(p, s)| p + s).collect();
            let norm2: f64 = trial.iter().map(|v| v.norm_sqr()).sum::<f64>() * dv;
            let c = 1.0 / norm2.sqrt();
            for v in &mut trial {
                *v *= c;
            }
            let trial = ComplexField::from_parts_unchecked(grid, trial);
            ham.potential_into(trial.values(), &mut density, &mut trial_potential);
            let trial_energy = ham.energy_with_potential(&trial, &trial_potential)?;
            // Once the expected gain is below the summation noise the energy
            // test can no longer tell good steps from bad ones.
            if trial_energy.total <= energy.total + slack || predicted < slack {
                phi = trial;
                std::mem::swap(&mut potential, &mut trial_potential);
                energy = trial_energy;
                history.push(energy.total);
                streak += 1;
                if streak >= 8 && dtau < schedule.dtau {
                    dtau = (2.0 * dtau).min(schedule.dtau);
                    streak = 0;
                }
                break;
            }
            streak = 0;
            dtau *= 0.5;
            if dtau < schedule.min_dtau {
                return Err(Error::NonConvergence {
                    iterations,
                    residual,
                    reason: format!("step size collapsed below {:.1e}", schedule.min_dtau),
                });
            }
        }
    }

    let centre = phi.centroid();
    if centre.iter().any(|c| c.abs() > 1e-9 * grid.h()) {
        phi = ham.spectral().shift(&phi, [-centre[0], -centre[1], -centre[2]])?;
    }
    phi.fix_global_phase();
    let energy = ham.energy(&phi)?;
    let width = {
        let c = phi.centroid();
        let w = phi.rms_width();
        (w * w + c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
    };
    Ok(GroundStateResult {
        boundary_contamination: phi.boundary_contamination(),
        epsilon: energy.eigenvalue(),
        energy,
        width,
        iterations,
        residual,
        energy_history: history,
        phi0: phi,
        final_dtau: dtau,
    })
}

/// Minimize on a grid with half the points (same extent) first, then refine.
pub fn minimize_two_level(grid: UniformGrid, kernel: Kernel, schedule: &DescentSchedule) -> Result<GroundStateResult> {
    if grid.n() < 16 {
        return minimize(grid, kernel, Initial::GaussianOptimum, schedule);
    }
    let coarse_grid = UniformGrid::new(grid.n() / 2, grid.h() * 2.0)?;
    let coarse_schedule = DescentSchedule {
        tol: schedule.tol.max(1e-6),
        ..*schedule
    };
    let coarse = minimize(coarse_grid, kernel, Initial::GaussianOptimum, &coarse_schedule)?;
    let start = resample(&coarse.phi0, grid.n())?;
    let mut fine = minimize(grid, kernel, Initial::Field(start), schedule)?;
    fine.iterations += coarse.iterations;
    Ok(fine)
}

fn preset_sigma(kernel: &Kernel) -> Result<f64> {
    match kernel.variant {
        KernelVariant::Sphere { radius } => {
            // Between the pointlike and the deep-overlap regimes; either is a fine start.
            let point = gaussian_variational(&Kernel::newtonian().with_strength(kernel.strength))?.sigma_star;
            let wide = gaussian_variational(&Kernel {
                variant: KernelVariant::HarmonicSphere { radius },
                strength: kernel.strength,
            })?
            .sigma_star;
            Ok(point.min(wide))
        }
        _ => Ok(gaussian_variational(kernel)?.sigma_star),
    }
}

/// Best Gaussian trial packet: `sigma_star` is the density standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianOptimum {
    pub sigma_star: f64,
    pub e_star: f64,
}

impl GaussianOptimum {
    /// Energy of the Gaussian trial with density standard deviation `sigma`.
    pub fn trial_energy(kernel: &Kernel, sigma: f64) -> Result<EnergyBreakdown> {
        crate::error::ensure_positive("sigma", sigma)?;
        let t = 3.0 / (8.0 * sigma * sigma);
        let s = kernel.strength;
        let w = match kernel.variant {
            KernelVariant::Newtonian => -s / (2.0 * PI.sqrt() * sigma),
            KernelVariant::HarmonicSphere { radius } => {
                s * (-0.6 / radius + 1.5 * sigma * sigma / radius.powi(3))
            }
            KernelVariant::None => 0.0,
            KernelVariant::Sphere { .. } => {
                return Err(Error::Domain("no closed-form Gaussian energy for the exact sphere kernel".into()))
            }
        };
        Ok(EnergyBreakdown::new(t, w))
    }
}

/// Closed-form minimization of E over Gaussian packets.
pub fn gaussian_variational(kernel: &Kernel) -> Result<GaussianOptimum> {
    kernel.validate()?;
    if kernel.is_none() {
        return Err(Error::NoGroundState("E(σ) = 3/(8σ²) decreases without bound as σ grows".into()));
    }
    let s = kernel.strength;
    let sigma_star = match kernel.variant {
        KernelVariant::Newtonian => 1.5 * PI.sqrt() / s,
        KernelVariant::HarmonicSphere { radius } => (radius.powi(3) / (4.0 * s)).powf(0.25),
        KernelVariant::Sphere { .. } => {
            return Err(Error::Domain("Gaussian optimum needs the newtonian or harmonic kernel".into()))
        }
        KernelVariant::None => unreachable!(),
    };
    let e_star = GaussianOptimum::trial_energy(kernel, sigma_star)?.total;
    Ok(GaussianOptimum { sigma_star, e_star })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newtonian_gaussian_optimum() {
        let opt = gaussian_variational(&Kernel::newtonian()).unwrap();
        assert!((opt.sigma_star - 1.5 * PI.sqrt()).abs() < 1e-14);
        assert!((opt.e_star + 1.0 / (6.0 * PI)).abs() < 1e-15);
        // stationarity: 2T = −W
        let e = GaussianOptimum::trial_energy(&Kernel::newtonian(), opt.sigma_star).unwrap();
        assert!((2.0 * e.kinetic + e.interaction).abs() < 1e-15);
        // a brute-force scan finds nothing lower
        let best = (1..20_000)
            .map(|i| GaussianOptimum::trial_energy(&Kernel::newtonian(), i as f64 * 5e-4).unwrap().total)
            .fold(f64::INFINITY, f64::min);
        assert!(best >= opt.e_star - 1e-15);
    }

    #[test]
    fn harmonic_gaussian_optimum() {
        let r = 20.0_f64;
        let k = Kernel::harmonic_sphere(r).unwrap();
        let opt = gaussian_variational(&k).unwrap();
        assert!((opt.sigma_star - (r.powi(3) / 4.0).powf(0.25)).abs() < 1e-12);
        let expected = 1.5 / r.powf(1.5) - 0.6 / r;
        assert!((opt.e_star - expected).abs() < 1e-14);
    }

    #[test]
    fn no_optimum_without_gravity() {
        assert!(matches!(gaussian_variational(&Kernel::none()), Err(Error::NoGroundState(_))));
        assert!(gaussian_variational(&Kernel::sphere(1.0).unwrap()).is_err());
    }

    #[test]
    fn minimize_refuses_free_particle() {
        let g = UniformGrid::new(16, 1.0).unwrap();
        let r = minimize(g, Kernel::none(), Initial::GaussianOptimum, &DescentSchedule::default());
        assert!(matches!(r, Err(Error::NoGroundState(_))));
    }

    #[test]
    fn harmonic_ground_state_is_gaussian() {
        let r = 64.0_f64;
        let k = Kernel::harmonic_sphere(r).unwrap();
        let sigma = (r.powi(3) / 4.0).powf(0.25);
        let g = UniformGrid::new(32, sigma / 2.5).unwrap();
        // start from a deliberately wrong width
        let init = ComplexField::gaussian(g, 0.7 * sigma, [0.0; 3]).unwrap();
        let res = minimize(g, k, Initial::Field(init), &DescentSchedule::default()).unwrap();
        let measured = res.width / 3f64.sqrt();
        assert!((measured - sigma).abs() < 1e-3 * sigma, "{measured} vs {sigma}");
        let exact = GaussianOptimum::trial_energy(&k, sigma).unwrap();
        assert!((res.energy.total - exact.total).abs() < 1e-8 * exact.total.abs());
    }

    #[test]
    fn coarse_newtonian_descent_is_monotone() {
        let g = UniformGrid::new(32, 1.6).unwrap();
        let schedule = DescentSchedule {
            tol: 1e-7,
            ..Default::default()
        };
        let res = minimize(g, Kernel::newtonian(), Initial::GaussianOptimum, &schedule).unwrap();
        for w in res.energy_history.windows(2) {
            assert!(w[1] <= w[0] + ENERGY_ROUNDOFF * w[0].abs());
        }
        assert!((res.phi0.norm_squared() - 1.0).abs() < 1e-10);
        assert!(res.energy.total < gaussian_variational(&Kernel::newtonian()).unwrap().e_star);
        let max_imag = res.phi0.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert!(max_imag < 1e-8);
        assert!(res.phi0.values().iter().all(|v| v.re > -1e-8));
    }
}
