//! Physical constants, the dimensionless unit system and closed-form width estimates.
//!
//! All physical quantities are cgs. The solvers work in units where
//! ħ = G = M = 1, which makes the length unit the pointlike width
//! a₀ = ħ²/(G M³) and removes the 10⁻⁴⁹-sized numbers from the numerics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

/// Reduced Planck constant, erg·s.
pub const HBAR_CGS: f64 = 1.054_571_817e-27;
/// Newtonian gravitational constant, cm³ g⁻¹ s⁻².
pub const G_CGS: f64 = 6.674_30e-8;

/// Physical constants of one object, cgs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub g: f64,
    pub mass: f64,
    /// Sphere radius (cm), for extended objects.
    pub radius: Option<f64>,
    /// Mass density (g/cm³).
    pub density: Option<f64>,
}

impl PhysicalParams {
    pub fn new(hbar: f64, g: f64, mass: f64) -> Result<Self> {
        let params = Self {
            hbar,
            g,
            mass,
            radius: None,
            density: None,
        };
        params.validate()?;
        Ok(params)
    }

    /// cgs constants with the given mass in grams.
    pub fn cgs(mass: f64) -> Result<Self> {
        Self::new(HBAR_CGS, G_CGS, mass)
    }

    /// Homogeneous sphere of radius `radius` and density `density`, cgs constants.
    pub fn cgs_sphere(radius: f64, density: f64) -> Result<Self> {
        ensure_positive("radius", radius)?;
        ensure_positive("density", density)?;
        let mass = 4.0 * PI / 3.0 * density * radius.powi(3);
        let mut params = Self::cgs(mass)?;
        params.radius = Some(radius);
        params.density = Some(density);
        Ok(params)
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        ensure_positive("radius", radius)?;
        self.radius = Some(radius);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("hbar", self.hbar)?;
        ensure_positive("G", self.g)?;
        ensure_positive("M", self.mass)?;
        if let Some(r) = self.radius {
            ensure_positive("R", r)?;
        }
        if let Some(rho) = self.density {
            ensure_positive("rho", rho)?;
        }
        Ok(())
    }
}

/// Conversion factors from dimensionless solver units to cgs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingMap {
    /// cm per dimensionless length, ħ²/(G M³).
    pub length_unit: f64,
    /// s per dimensionless time, ħ³/(G² M⁵).
    pub time_unit: f64,
    /// erg per dimensionless energy, G² M⁵/ħ².
    pub energy_unit: f64,
}

impl ScalingMap {
    pub fn length_to_cgs(&self, x: f64) -> f64 {
        x * self.length_unit
    }

    pub fn length_from_cgs(&self, x: f64) -> f64 {
        x / self.length_unit
    }

    pub fn time_to_cgs(&self, t: f64) -> f64 {
        t * self.time_unit
    }

    pub fn energy_to_cgs(&self, e: f64) -> f64 {
        e * self.energy_unit
    }
}

/// Unit system in which the single-object equation reads
/// i∂ψ/∂τ = −½Δψ − (|ψ|² ∗ 1/r) ψ.
pub fn make_scaling(params: &PhysicalParams) -> Result<ScalingMap> {
    params.validate()?;
    let PhysicalParams { hbar, g, mass, .. } = *params;
    // Evaluate in log space; the direct products under/overflow for macroscopic masses.
    let ln_h = hbar.ln();
    let ln_g = g.ln();
    let ln_m = mass.ln();
    let length_unit = (2.0 * ln_h - ln_g - 3.0 * ln_m).exp();
    let time_unit = (3.0 * ln_h - 2.0 * ln_g - 5.0 * ln_m).exp();
    let energy_unit = (2.0 * ln_g + 5.0 * ln_m - 2.0 * ln_h).exp();
    Ok(ScalingMap {
        length_unit,
        time_unit,
        energy_unit,
    })
}

/// Width a₀ = ħ²/(G M³) of a free pointlike object, cm.
pub fn point_width_estimate(params: &PhysicalParams) -> Result<f64> {
    Ok(make_scaling(params)?.length_unit)
}

/// Width a₀^(R) = a₀^{1/4} R^{3/4} of a homogeneous sphere of radius `radius`, cm.
///
/// The estimate assumes a₀^(R) ≪ R; a warning is logged when the result
/// exceeds a tenth of the radius.
pub fn sphere_width_estimate(params: &PhysicalParams, radius: f64) -> Result<f64> {
    ensure_positive("R", radius)?;
    let a0 = point_width_estimate(params)?;
    let width = a0.powf(0.25) * radius.powf(0.75);
    if width > 0.1 * radius {
        log::warn!(
            "sphere width estimate {width:.3e} cm is not small against R = {radius:.3e} cm; \
             the quadratic kernel expansion does not apply"
        );
    }
    Ok(width)
}

/// Order-of-magnitude energy of a packet of width `a`, erg.
///
/// Pointlike: ħ²/(M a²) − G M²/a. With a radius: ħ²/(M a²) − G M²/R + G M² a²/R³.
pub fn energy_estimates(params: &PhysicalParams, a: f64, radius: Option<f64>) -> Result<f64> {
    params.validate()?;
    ensure_positive("a", a)?;
    let PhysicalParams { hbar, g, mass, .. } = *params;
    let kinetic = hbar * hbar / (mass * a * a);
    match radius {
        None => Ok(kinetic - g * mass * mass / a),
        Some(r) => {
            ensure_positive("R", r)?;
            Ok(kinetic - g * mass * mass / r + g * mass * mass * a * a / r.powi(3))
        }
    }
}

/// Demarcation radius for a homogeneous body, under two width laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalSize {
    /// Radius at which a₀^{1/4} R^{3/4} = R, cm.
    pub r_c: f64,
    /// Radius at which a₀^{1/3} R^{2/3} = R, cm.
    pub r_c_competing: f64,
}

/// Critical radius at density `rho` (g/cm³) with cgs constants.
pub fn critical_size(rho: f64) -> Result<CriticalSize> {
    critical_size_with(HBAR_CGS, G_CGS, rho)
}

pub fn critical_size_with(hbar: f64, g: f64, rho: f64) -> Result<CriticalSize> {
    ensure_positive("hbar", hbar)?;
    ensure_positive("G", g)?;
    ensure_positive("rho", rho)?;
    // With M = (4π/3)ρR³ the pointlike width is a₀ = C·R⁻⁹.
    let ln_c = 2.0 * hbar.ln() - g.ln() - 3.0 * (4.0 * PI / 3.0 * rho).ln();
    let r_c = (ln_c / 10.0).exp();
    let r_c_competing = solve_demarcation(ln_c, 1.0 / 3.0)?;
    Ok(CriticalSize { r_c, r_c_competing })
}

/// Root of a₀(R)^p R^{1−p} = R with a₀ = C R⁻⁹, found by bisection in ln R.
pub(crate) fn solve_demarcation(ln_c: f64, p: f64) -> Result<f64> {
    // ln(width/R) = p ln C − 9p ln R − p ln R = p (ln C − 10 ln R): decreasing in ln R.
    let mismatch = |ln_r: f64| p * (ln_c - 9.0 * ln_r) + (1.0 - p) * ln_r - ln_r;
    let (mut lo, mut hi) = (-400.0_f64, 400.0_f64);
    if mismatch(lo) <= 0.0 || mismatch(hi) >= 0.0 {
        return Err(Error::Domain("demarcation radius outside representable range".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mismatch(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn unit_normalization() {
        let s = make_scaling(&unit()).unwrap();
        assert_relative_eq!(s.length_unit, 1.0, max_relative = 1e-15);
        assert_relative_eq!(s.time_unit, 1.0, max_relative = 1e-15);
        assert_relative_eq!(s.energy_unit, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn milligram_length_unit() {
        // ħ²/(G M³) evaluated directly: (1.0546e-27)² / (6.6743e-8 · 1e-9)
        let direct = HBAR_CGS * HBAR_CGS / (G_CGS * 1e-9);
        let s = make_scaling(&PhysicalParams::cgs(1e-3).unwrap()).unwrap();
        assert_relative_eq!(s.length_unit, direct, max_relative = 1e-12);
        assert_relative_eq!(s.length_unit, 1.666e-38, max_relative = 2e-3);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(PhysicalParams::new(0.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(PhysicalParams::new(1.0, -1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(PhysicalParams::new(1.0, 1.0, f64::NAN), Err(Error::Domain(_))));
        assert!(unit().with_radius(0.0).is_err());
        assert!(critical_size(0.0).is_err());
        assert!(energy_estimates(&unit(), -1.0, None).is_err());
    }

    #[test]
    fn point_width_cubic_scaling() {
        let p = unit();
        assert_relative_eq!(point_width_estimate(&p).unwrap(), 1.0);
        let heavy = PhysicalParams { mass: 2.0, ..p };
        assert_relative_eq!(point_width_estimate(&heavy).unwrap(), 1.0 / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn one_gram_per_cc_sphere_widths() {
        let p = PhysicalParams::cgs_sphere(1.0, 1.0).unwrap();
        assert_relative_eq!(p.mass, 4.18879, max_relative = 1e-5);
        let a0 = point_width_estimate(&p).unwrap();
        assert_relative_eq!(a0, 2.27e-49, max_relative = 5e-3);
        let a_r = sphere_width_estimate(&p, 1.0).unwrap();
        assert_relative_eq!(a_r, 6.9e-13, max_relative = 5e-3);
    }

    #[test]
    fn sphere_width_three_quarter_power() {
        let p = unit();
        assert_relative_eq!(sphere_width_estimate(&p, 1.0).unwrap(), 1.0);
        let w1 = sphere_width_estimate(&p, 3.0).unwrap();
        let w16 = sphere_width_estimate(&p, 48.0).unwrap();
        assert_relative_eq!(w16 / w1, 8.0, max_relative = 1e-13);
    }

    #[test]
    fn energy_plug_in() {
        let p = unit();
        assert_relative_eq!(energy_estimates(&p, 2.0, None).unwrap(), -0.25);
        assert_relative_eq!(energy_estimates(&p, 1.0, Some(1.0)).unwrap(), 1.0);
    }

    #[test]
    fn pointlike_energy_minimum_at_twice_a0() {
        // d/da (1/a² − 1/a) = 0 at a = 2; scan brackets it.
        let p = PhysicalParams::new(1.3, 0.7, 1.9).unwrap();
        let a0 = point_width_estimate(&p).unwrap();
        let (mut best_a, mut best_e) = (0.0, f64::INFINITY);
        for i in 1..40_000 {
            let a = a0 * i as f64 * 1e-4;
            let e = energy_estimates(&p, a, None).unwrap();
            if e < best_e {
                best_e = e;
                best_a = a;
            }
        }
        assert_relative_eq!(best_a / a0, 2.0, max_relative = 1e-3);
    }

    #[test]
    fn critical_size_normal_density() {
        let c = critical_size(1.0).unwrap();
        assert!(c.r_c > 3e-6 && c.r_c < 3e-5, "R_c = {}", c.r_c);
        assert_relative_eq!(c.r_c, 1.37e-5, max_relative = 1e-2);
        let ratio = c.r_c_competing / c.r_c;
        assert!(ratio > 1.0 / 3.0 && ratio < 3.0);
        let dense = critical_size(1e3).unwrap();
        assert_relative_eq!(c.r_c / dense.r_c, 10f64.powf(0.9), max_relative = 1e-12);
    }

    #[test]
    fn closed_form_matches_bisection() {
        let rho: f64 = 2.7;
        let ln_c = 2.0 * HBAR_CGS.ln() - G_CGS.ln() - 3.0 * (4.0 * PI / 3.0 * rho).ln();
        let closed = critical_size(rho).unwrap().r_c;
        let bisected = solve_demarcation(ln_c, 0.25).unwrap();
        assert_relative_eq!(closed, bisected, max_relative = 1e-12);
        // the critical radius really is a fixed point of the width law
        let p = PhysicalParams::cgs_sphere(closed, rho).unwrap();
        assert_relative_eq!(sphere_width_estimate(&p, closed).unwrap(), closed, max_relative = 1e-10);
    }

    proptest! {
        #[test]
        fn dimensional_consistency(lh in -70.0f64..10.0, lg in -20.0f64..5.0, lm in -30.0f64..30.0) {
            let p = PhysicalParams::new(lh.exp(), lg.exp(), lm.exp()).unwrap();
            let s = make_scaling(&p).unwrap();
            let ratio = s.time_unit * s.energy_unit / p.hbar;
            prop_assert!((ratio - 1.0).abs() < 1e-12);
            let identity = s.time_unit * p.hbar / (p.mass * s.length_unit * s.length_unit);
            prop_assert!((identity - 1.0).abs() < 1e-12);
            prop_assert_eq!(point_width_estimate(&p).unwrap(), s.length_unit);
        }

        #[test]
        fn sphere_quartic_identity(lm in -10.0f64..10.0, lr in -5.0f64..5.0) {
            let p = PhysicalParams::new(1.0, 1.0, lm.exp()).unwrap();
            let r = lr.exp();
            let w = sphere_width_estimate(&p, r).unwrap();
            let a0 = point_width_estimate(&p).unwrap();
            prop_assert!((w.powi(4) / (a0 * r.powi(3)) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn critical_size_decreasing(lrho in -5.0f64..5.0, step in 0.01f64..3.0) {
            let lo = critical_size(lrho.exp()).unwrap().r_c;
            let hi = critical_size((lrho + step).exp()).unwrap().r_c;
            prop_assert!(hi < lo);
        }
    }
}
