//! Energy functional and the nonlinear Hamiltonian H[ψ] = −½Δ + V_eff[|ψ|²].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{ComplexField, RealField, Spectral};
use crate::gravity::{Kernel, PotentialSolver};
use crate::grid::UniformGrid;

/// Kinetic T, interaction W (with the ½ of the pair double count) and E = T + W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub interaction: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(kinetic: f64, interaction: f64) -> Self {
        Self {
            kinetic,
            interaction,
            total: kinetic + interaction,
        }
    }

    /// Nonlinear eigenvalue ε = T + 2W.
    pub fn eigenvalue(&self) -> f64 {
        self.kinetic + 2.0 * self.interaction
    }

    /// |2T + W| / T; zero at a stationary point of the 1/r functional.
    pub fn virial_defect(&self) -> f64 {
        (2.0 * self.kinetic + self.interaction).abs() / self.kinetic
    }
}

/// Reusable evaluator for one grid and kernel.
#[derive(Debug)]
pub struct Hamiltonian {
    grid: UniformGrid,
    spectral: Spectral,
    solver: PotentialSolver,
    half_k2: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl Hamiltonian {
    pub fn new(grid: UniformGrid, kernel: Kernel) -> Result<Self> {
        Ok(Self {
            grid,
            spectral: Spectral::new(grid),
            solver: PotentialSolver::new(grid, kernel)?,
            half_k2: grid.k_squared().into_iter().map(|k| 0.5 * k).collect(),
            scratch: vec![Complex64::default(); grid.len()],
        })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel {
        self.solver.kernel()
    }

    pub fn spectral(&mut self) -> &mut Spectral {
        &mut self.spectral
    }

    pub fn solver(&mut self) -> &mut PotentialSolver {
        &mut self.solver
    }

    pub fn half_k2(&self) -> &[f64] {
        &self.half_k2
    }

    pub fn potential(&mut self, psi: &ComplexField) -> Result<RealField> {
        self.solver.solve(&psi.density())
    }

    pub(crate) fn potential_into(&mut self, psi: &[Complex64], density: &mut Vec<f64>, out: &mut [f64]) {
        density.clear();
        density.extend(psi.iter().map(|v| v.norm_sqr()));
        self.solver.solve_into(density, out);
    }

    pub fn kinetic(&mut self, psi: &ComplexField) -> Result<f64> {
        self.spectral.kinetic_energy(psi)
    }

    pub fn energy(&mut self, psi: &ComplexField) -> Result<EnergyBreakdown> {
        let v = self.potential(psi)?;
        self.energy_with_potential(psi, v.values())
    }

    pub(crate) fn energy_with_potential(&mut self, psi: &ComplexField, potential: &[f64]) -> Result<EnergyBreakdown> {
        let t = self.spectral.kinetic_energy(psi)?;
        let w = 0.5
            * psi
                .values()
                .iter()
                .zip(potential)
                .map(|(p, v)| p.norm_sqr() * v)
                .sum::<f64>()
            * self.grid.cell_volume();
        Ok(EnergyBreakdown::new(t, w))
    }

    /// Hψ = −½Δψ + Vψ for a given potential, into `out`.
    pub(crate) fn apply(&mut self, psi: &[Complex64], potential: &[f64], out: &mut Vec<Complex64>) {
        self.scratch.copy_from_slice(psi);
        self.spectral.forward(&mut self.scratch);
        for (s, k) in self.scratch.iter_mut().zip(&self.half_k2) {
            *s *= *k;
        }
        self.spectral.inverse(&mut self.scratch);
        out.clear();
        out.extend(
            self.scratch
                .iter()
                .zip(psi)
                .zip(potential)
                .map(|((t, p), v)| t + p * *v),
        );
    }
}

pub fn energy_breakdown(psi: &ComplexField, kernel: &Kernel) -> Result<EnergyBreakdown> {
    Hamiltonian::new(*psi.grid(), *kernel)?.energy(psi)
}

/// Lagrange multiplier of the normalization constraint, ε = T + 2W.
pub fn eigenvalue(phi: &ComplexField, kernel: &Kernel) -> Result<f64> {
    Ok(energy_breakdown(phi, kernel)?.eigenvalue())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize, h: f64) -> UniformGrid {
        UniformGrid::new(n, h).unwrap()
    }

    #[test]
    fn gaussian_energies() {
        // density std σ: T = 3/(8σ²), W = −1/(2√π σ)
        let sigma = 2.0;
        let g = grid(64, sigma / 3.0);
        let psi = ComplexField::gaussian(g, sigma, [0.0; 3]).unwrap();
        let e = energy_breakdown(&psi, &Kernel::newtonian()).unwrap();
        let t = 3.0 / (8.0 * sigma * sigma);
        let w = -1.0 / (2.0 * PI.sqrt() * sigma);
        assert!((e.kinetic - t).abs() < 5e-3 * t, "{} vs {t}", e.kinetic);
        assert!((e.interaction - w).abs() < 5e-3 * w.abs(), "{} vs {w}", e.interaction);
        assert_eq!(e.total, e.kinetic + e.interaction);
        let eps = eigenvalue(&psi, &Kernel::newtonian()).unwrap();
        let expected = t - 1.0 / (PI.sqrt() * sigma);
        assert!((eps - expected).abs() < 5e-3 * expected.abs());
    }

    #[test]
    fn no_interaction_without_gravity() {
        let psi = ComplexField::gaussian(grid(16, 0.5), 1.0, [0.0; 3]).unwrap();
        let e = energy_breakdown(&psi, &Kernel::none()).unwrap();
        assert_eq!(e.interaction, 0.0);
        assert_eq!(eigenvalue(&psi, &Kernel::none()).unwrap(), e.kinetic);
    }

    #[test]
    fn plane_wave_adds_kinetic_only() {
        let g = grid(32, 0.5);
        let k = [2.0 * g.dk(), 0.0, -g.dk()];
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let psi = ComplexField::gaussian(g, 1.0, [0.0; 3]).unwrap();
        let mut moving = psi.clone();
        moving.apply_plane_wave(k);
        let mut ham = Hamiltonian::new(g, Kernel::newtonian()).unwrap();
        let e0 = ham.energy(&psi).unwrap();
        let e1 = ham.energy(&moving).unwrap();
        assert!((e1.kinetic - e0.kinetic - 0.5 * k2).abs() < 1e-10);
        assert!((e1.interaction - e0.interaction).abs() < 1e-13);
    }

    #[test]
    fn interaction_ignores_local_phase() {
        let g = grid(16, 0.6);
        let psi = ComplexField::gaussian(g, 1.2, [0.0; 3]).unwrap();
        let mut twisted = psi.clone();
        for (i, v) in twisted.values_mut().iter_mut().enumerate() {
            let x = g.position(i);
            *v *= Complex64::from_polar(1.0, (x[0] * x[1]).sin() + x[2] * x[2]);
        }
        let a = energy_breakdown(&psi, &Kernel::newtonian()).unwrap().interaction;
        let b = energy_breakdown(&twisted, &Kernel::newtonian()).unwrap().interaction;
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn translation_consistent_energies() {
        let g = grid(32, 0.5);
        let psi = ComplexField::gaussian(g, 1.0, [0.0; 3]).unwrap();
        let mut ham = Hamiltonian::new(g, Kernel::newtonian()).unwrap();
        let shifted = ham.spectral().translate(&psi, [1.0, 0.5, -1.5]).unwrap();
        let a = ham.energy(&psi).unwrap();
        let b = ham.energy(&shifted).unwrap();
        assert!((a.kinetic - b.kinetic).abs() < 1e-12);
        assert!((a.interaction - b.interaction).abs() < 1e-12);
    }
}
