use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples of a spherically symmetric quantity on an increasing radial mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.len() != values.len() || r.len() < 2 {
            return Err(Error::Domain(format!(
                "radial profile needs matching meshes of at least 2 points ({} vs {})",
                r.len(),
                values.len()
            )));
        }
        if !(r[0] > 0.0) {
            return Err(Error::Domain(format!("radial mesh must start at r > 0, got {}", r[0])));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("radial mesh is not strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("radial profile value".into()));
        }
        Ok(Self { r, values })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// ∫ 4π r² f(r) dr (trapezoid, plus the inner ball [0, r₁] at constant f(r₁)).
    pub fn volume_integral(&self) -> f64 {
        let f: Vec<f64> = self.values.clone();
        cumulative_shell_mass(&self.r, &f).last().copied().unwrap_or(0.0)
    }

    /// Linear interpolation; zero beyond the mesh, constant inside r₁.
    pub fn interpolate(&self, r: f64) -> f64 {
        if r <= self.r[0] {
            return self.values[0];
        }
        let last = self.r.len() - 1;
        if r >= self.r[last] {
            return 0.0;
        }
        let i = self.r.partition_point(|&x| x <= r) - 1;
        let t = (r - self.r[i]) / (self.r[i + 1] - self.r[i]);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

/// m(rᵢ) = ∫₀^{rᵢ} 4π r² ρ dr.
pub(crate) fn cumulative_shell_mass(r: &[f64], rho: &[f64]) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut m = Vec::with_capacity(r.len());
    let mut acc = 4.0 / 3.0 * PI * r[0].powi(3) * rho[0];
    m.push(acc);
    for i in 1..r.len() {
        let a = r[i - 1] * r[i - 1] * rho[i - 1];
        let b = r[i] * r[i] * rho[i];
        acc += 2.0 * PI * (a + b) * (r[i] - r[i - 1]);
        m.push(acc);
    }
    m
}

/// Potential of a spherically symmetric density by Newton's shell theorem:
/// V(r) = −[m(r)/r + ∫_r^∞ 4π r′ ρ(r′) dr′].
///
/// The density is taken to vanish beyond the last mesh point.
pub fn radial_potential(density: &RadialProfile) -> Result<RadialProfile> {
    use std::f64::consts::PI;
    let r = &density.r;
    let rho = &density.values;
    if rho.iter().any(|&v| v < 0.0) {
        return Err(Error::Domain("radial density must be nonnegative".into()));
    }
    let m = cumulative_shell_mass(r, rho);
    let len = r.len();
    let mut outer = vec![0.0; len];
    for i in (0..len - 1).rev() {
        let a = r[i] * rho[i];
        let b = r[i + 1] * rho[i + 1];
        outer[i] = outer[i + 1] + 2.0 * PI * (a + b) * (r[i + 1] - r[i]);
    }
    let values = (0..len).map(|i| -(m[i] / r[i] + outer[i])).collect();
    RadialProfile::new(r.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mesh(r_max: f64, points: usize) -> Vec<f64> {
        (1..=points).map(|i| r_max * i as f64 / points as f64).collect()
    }

    #[test]
    fn rejects_non_monotone_mesh() {
        assert!(RadialProfile::new(vec![1.0, 0.5], vec![0.0, 0.0]).is_err());
        assert!(RadialProfile::new(vec![0.0, 0.5], vec![0.0, 0.0]).is_err());
        assert!(RadialProfile::new(vec![0.1, 0.1], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn uniform_ball() {
        let a = 2.0;
        let r = mesh(6.0, 60_000);
        let rho: Vec<f64> = r.iter().map(|&x| if x <= a { 3.0 / (4.0 * PI * a.powi(3)) } else { 0.0 }).collect();
        let prof = RadialProfile::new(r.clone(), rho).unwrap();
        let v = radial_potential(&prof).unwrap();
        for (i, &x) in r.iter().enumerate().step_by(997) {
            let exact = if x < a { -(3.0 * a * a - x * x) / (2.0 * a.powi(3)) } else { -1.0 / x };
            assert!((v.values[i] - exact).abs() < 1e-3 * exact.abs(), "r={x}: {} vs {exact}", v.values[i]);
        }
    }

    #[test]
    fn point_like_mass_and_gauss_law() {
        // narrow normalized Gaussian: outside a few σ the potential is −1/r
        let s: f64 = 0.05;
        let r = mesh(20.0, 200_000);
        let norm = (2.0 * PI * s * s).powf(-1.5);
        let rho: Vec<f64> = r.iter().map(|&x| norm * (-x * x / (2.0 * s * s)).exp()).collect();
        let prof = RadialProfile::new(r.clone(), rho).unwrap();
        assert!((prof.volume_integral() - 1.0).abs() < 1e-6);
        let v = radial_potential(&prof).unwrap();
        for (i, &x) in r.iter().enumerate().skip(10_000).step_by(10_000) {
            assert!((v.values[i] * x + 1.0).abs() < 1e-6, "r={x}");
        }
        let last = r.len() - 1;
        assert!((r[last] * v.values[last].abs() - 1.0).abs() < 1e-6);
    }
}
