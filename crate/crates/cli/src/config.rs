//! Scenario configuration (TOML). Unknown keys are rejected at every level.

use std::path::Path;

use gravloc_core::units::{HBAR_CGS, G_CGS};
use gravloc_core::{DescentSchedule, Kernel, PhysicalParams, UniformGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Work purely in ħ = G = M = 1 units. Must be false when `[physical]` is given.
    #[serde(default = "yes")]
    pub dimensionless: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalSection>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub sweep_mass: SweepMassSection,
    #[serde(default)]
    pub sweep_radius: SweepRadiusSection,
    #[serde(default)]
    pub critical_size: CriticalSizeSection,
    #[serde(default)]
    pub two_soliton: TwoSolitonSection,
    #[serde(default)]
    pub boost_check: BoostCheckSection,
    #[serde(default)]
    pub separability: SeparabilitySection,
}

fn yes() -> bool {
    true
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            dimensionless: true,
            physical: None,
            grid: GridSection::default(),
            kernel: KernelSection::default(),
            solver: SolverSection::default(),
            evolve: EvolveSection::default(),
            sweep_mass: SweepMassSection::default(),
            sweep_radius: SweepRadiusSection::default(),
            critical_size: CriticalSizeSection::default(),
            two_soliton: TwoSolitonSection::default(),
            boost_check: BoostCheckSection::default(),
            separability: SeparabilitySection::default(),
        }
    }
}

/// cgs constants and object properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    #[serde(default = "hbar_cgs")]
    pub hbar: f64,
    #[serde(rename = "G", default = "g_cgs")]
    pub g: f64,
    /// Mass, g. Derived from `R` and `rho` when omitted.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    /// Radius, cm.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Density, g/cm³.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

fn hbar_cgs() -> f64 {
    HBAR_CGS
}

fn g_cgs() -> f64 {
    G_CGS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub h: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 64, h: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    Newtonian,
    Sphere,
    HarmonicSphere,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub variant: KernelName,
    /// Sphere radius in natural length units; taken from `physical.R` when omitted.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            variant: KernelName::Newtonian,
            r: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub dtau: f64,
    /// Solve on a half-resolution grid first.
    pub two_level: bool,
    /// Radial oracle mesh (natural units) for the cross-check.
    pub oracle_rmax: f64,
    pub oracle_points: usize,
    /// Relative tolerances of the oracle cross-check on (ε, E, width).
    pub oracle_tolerance: [f64; 3],
    /// Limit on the virial defects at convergence.
    pub virial_tolerance: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = DescentSchedule::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            dtau: d.dtau,
            two_level: false,
            oracle_rmax: 80.0,
            oracle_points: 40_000,
            oracle_tolerance: [5e-3, 5e-3, 1e-2],
            virial_tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    GroundState,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub dt: f64,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    pub monitor_stride: usize,
    pub initial: InitialState,
    /// Density standard deviation of the Gaussian start.
    pub sigma: f64,
    /// Boost of the initial state in momentum-lattice units 2π/extent.
    pub boost: [i64; 3],
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
    pub max_momentum_drift: f64,
    /// Limit on the deviation from free Gaussian spreading (kernel `none` only).
    pub max_spreading_error: f64,
    /// Limits for an unboosted ground-state start: relative L² density change
    /// and phase-rate error against ε (rad per unit time).
    pub max_density_change: f64,
    pub max_phase_rate_error: f64,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            dt: 0.01,
            steps: 1000,
            snapshot_stride: None,
            monitor_stride: 10,
            initial: InitialState::Gaussian,
            sigma: 1.5 * std::f64::consts::PI.sqrt(),
            boost: [1, 0, 0],
            max_norm_drift: 1e-10,
            max_energy_drift: 1e-6,
            max_momentum_drift: 1e-8,
            max_spreading_error: 1e-4,
            max_density_change: 1e-2,
            max_phase_rate_error: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepMassSection {
    /// Masses, g.
    pub masses: Vec<f64>,
    pub max_slope_error: f64,
    pub max_prefactor_spread: f64,
}

impl Default for SweepMassSection {
    fn default() -> Self {
        Self {
            masses: vec![1e-3, 1e-2, 1e-1, 1.0],
            max_slope_error: 1e-2,
            max_prefactor_spread: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepRadiusSection {
    /// Sphere radii in natural length units.
    pub radii: Vec<f64>,
    /// Grid spacing as a fraction of the predicted σ at each radius.
    pub h_over_sigma: f64,
    pub n: usize,
    /// Largest width/R admitted to the fit.
    pub max_width_over_r: f64,
    pub max_slope_error: f64,
    pub max_sigma_error: f64,
    /// Limit on the relative spread of width⁴/R³.
    pub max_quartic_spread: f64,
}

impl Default for SweepRadiusSection {
    fn default() -> Self {
        Self {
            radii: vec![1e4, 1e5, 1e6, 1e7],
            h_over_sigma: 0.4,
            n: 32,
            max_width_over_r: 0.15,
            max_slope_error: 0.05,
            max_sigma_error: 1e-2,
            max_quartic_spread: 0.04,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalSizeSection {
    /// Densities, g/cm³.
    pub rho: Vec<f64>,
}

impl Default for CriticalSizeSection {
    fn default() -> Self {
        Self { rho: vec![1.0, 1e3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoSolitonSection {
    /// Initial separations in multiples of the ground-state rms width.
    pub separations: Vec<f64>,
    /// Grid for the ground state and the evolution.
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    /// Run length for every separation.
    pub duration: f64,
    pub monitor_interval: f64,
    /// Fraction of each run used for the quadratic fit of the separation.
    pub fit_fraction: f64,
    pub max_acceleration_error: f64,
    pub max_trend_error: f64,
}

impl Default for TwoSolitonSection {
    fn default() -> Self {
        Self {
            separations: vec![10.0, 20.0],
            n: 128,
            h: 1.2,
            dt: 0.1,
            duration: 20.0,
            monitor_interval: 0.5,
            fit_fraction: 1.0,
            max_acceleration_error: 0.2,
            max_trend_error: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostCheckSection {
    pub sigma: f64,
    /// Velocity in momentum-lattice units 2π/extent.
    pub velocity: [i64; 3],
    /// Offset in grid cells.
    pub offset: [i64; 3],
    pub dt: f64,
    pub steps: usize,
    pub max_error: f64,
    /// Limit on the forward-then-conjugated-back round trip.
    pub max_reversal_error: f64,
}

impl Default for BoostCheckSection {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            velocity: [2, -1, 0],
            offset: [0, 0, 0],
            dt: 0.01,
            steps: 100,
            max_error: 1e-6,
            max_reversal_error: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparabilitySection {
    /// Separations in multiples of the ground-state rms width.
    pub separations: Vec<f64>,
    pub m_a: f64,
    pub m_b: f64,
    pub max_product_spread: f64,
    pub max_point_mass_error: f64,
    /// Separation (in widths) of the far-field decay check.
    pub far_separation: f64,
    pub max_far_ratio: f64,
}

impl Default for SeparabilitySection {
    fn default() -> Self {
        Self {
            separations: vec![20.0, 40.0, 80.0],
            m_a: 0.5,
            m_b: 0.5,
            max_product_spread: 0.05,
            max_point_mass_error: 0.01,
            far_separation: 1000.0,
            max_far_ratio: 1e-2,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical text: the resolved config with every default filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.dimensionless && self.physical.is_some() {
            return Err(invalid("set dimensionless = false to use the [physical] section"));
        }
        if !self.dimensionless && self.physical.is_none() {
            return Err(invalid("dimensionless = false needs a [physical] section"));
        }
        if let Some(p) = &self.physical {
            self.physical_params()?;
            if p.m.is_none() && (p.r.is_none() || p.rho.is_none()) {
                return Err(invalid("[physical] needs M, or both R and rho"));
            }
        }
        self.grid()?;
        self.kernel()?;
        self.schedule()?;
        let s = &self.solver;
        positive("solver.oracle_rmax", s.oracle_rmax)?;
        if s.oracle_points < 100 {
            return Err(invalid("solver.oracle_points must be at least 100"));
        }
        for t in s.oracle_tolerance.iter().chain([&s.virial_tolerance]) {
            positive("solver tolerance", *t)?;
        }
        let e = &self.evolve;
        positive("evolve.dt", e.dt)?;
        positive("evolve.sigma", e.sigma)?;
        positive("evolve.max_spreading_error", e.max_spreading_error)?;
        positive("evolve.max_density_change", e.max_density_change)?;
        positive("evolve.max_phase_rate_error", e.max_phase_rate_error)?;
        if e.monitor_stride == 0 || e.snapshot_stride == Some(0) {
            return Err(invalid("evolve strides must be at least 1"));
        }
        for (n, v) in [
            ("evolve.max_norm_drift", e.max_norm_drift),
            ("evolve.max_energy_drift", e.max_energy_drift),
            ("evolve.max_momentum_drift", e.max_momentum_drift),
        ] {
            positive(n, v)?;
        }
        let m = &self.sweep_mass;
        if m.masses.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(invalid("sweep_mass.masses must be positive"));
        }
        positive("sweep_mass.max_slope_error", m.max_slope_error)?;
        positive("sweep_mass.max_prefactor_spread", m.max_prefactor_spread)?;
        let r = &self.sweep_radius;
        if r.radii.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(invalid("sweep_radius.radii must be positive"));
        }
        positive("sweep_radius.h_over_sigma", r.h_over_sigma)?;
        UniformGrid::new(r.n, 1.0).map_err(|e| invalid(format!("sweep_radius.n: {e}")))?;
        positive("sweep_radius.max_width_over_r", r.max_width_over_r)?;
        positive("sweep_radius.max_slope_error", r.max_slope_error)?;
        positive("sweep_radius.max_sigma_error", r.max_sigma_error)?;
        positive("sweep_radius.max_quartic_spread", r.max_quartic_spread)?;
        if self.critical_size.rho.is_empty() || self.critical_size.rho.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(invalid("critical_size.rho must list positive densities"));
        }
        let t = &self.two_soliton;
        if t.separations.is_empty() || t.separations.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(invalid("two_soliton.separations must list positive values"));
        }
        UniformGrid::new(t.n, t.h).map_err(|e| invalid(format!("two_soliton grid: {e}")))?;
        positive("two_soliton.dt", t.dt)?;
        if !(t.fit_fraction > 0.0 && t.fit_fraction <= 1.0) {
            return Err(invalid("two_soliton.fit_fraction must lie in (0, 1]"));
        }
        positive("two_soliton.duration", t.duration)?;
        positive("two_soliton.monitor_interval", t.monitor_interval)?;
        positive("two_soliton.max_acceleration_error", t.max_acceleration_error)?;
        positive("two_soliton.max_trend_error", t.max_trend_error)?;
        let b = &self.boost_check;
        positive("boost_check.sigma", b.sigma)?;
        positive("boost_check.dt", b.dt)?;
        positive("boost_check.max_error", b.max_error)?;
        positive("boost_check.max_reversal_error", b.max_reversal_error)?;
        let p = &self.separability;
        if p.separations.is_empty() || p.separations.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(invalid("separability.separations must list positive values"));
        }
        for (n, v) in [("separability.m_a", p.m_a), ("separability.m_b", p.m_b)] {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(invalid(format!("{n} must lie in [0, 1], got {v}")));
            }
        }
        positive("separability.max_product_spread", p.max_product_spread)?;
        positive("separability.max_point_mass_error", p.max_point_mass_error)?;
        positive("separability.far_separation", p.far_separation)?;
        positive("separability.max_far_ratio", p.max_far_ratio)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<UniformGrid, CliError> {
        UniformGrid::new(self.grid.n, self.grid.h).map_err(|e| invalid(format!("grid: {e}")))
    }

    pub fn physical_params(&self) -> Result<Option<PhysicalParams>, CliError> {
        let Some(p) = &self.physical else { return Ok(None) };
        let bad = |e: gravloc_core::Error| invalid(format!("physical: {e}"));
        let mass = match (p.m, p.r, p.rho) {
            (Some(m), _, _) => m,
            (None, Some(r), Some(rho)) => 4.0 * std::f64::consts::PI / 3.0 * rho * r.powi(3),
            _ => return Err(invalid("[physical] needs M, or both R and rho")),
        };
        let mut params = PhysicalParams::new(p.hbar, p.g, mass).map_err(bad)?;
        params.radius = p.r;
        params.density = p.rho;
        params.validate().map_err(bad)?;
        Ok(Some(params))
    }

    /// Kernel radius in natural units, from `kernel.R` or the physical radius.
    pub fn kernel_radius(&self) -> Result<Option<f64>, CliError> {
        if let Some(r) = self.kernel.r {
            return Ok(Some(r));
        }
        match self.physical_params()? {
            Some(p) => match p.radius {
                Some(r) => {
                    let scale = gravloc_core::units::make_scaling(&p).map_err(|e| invalid(e.to_string()))?;
                    Ok(Some(scale.length_from_cgs(r)))
                }
                None => Ok(None),
            },
            None => Ok(None),
        }
    }

    pub fn kernel(&self) -> Result<Kernel, CliError> {
        let bad = |e: gravloc_core::Error| invalid(format!("kernel: {e}"));
        let need_r = || -> Result<f64, CliError> {
            self.kernel_radius()?
                .ok_or_else(|| invalid("kernel variant needs R (kernel.R or physical.R)"))
        };
        match self.kernel.variant {
            KernelName::Newtonian => Ok(Kernel::newtonian()),
            KernelName::None => Ok(Kernel::none()),
            KernelName::Sphere => Kernel::sphere(need_r()?).map_err(bad),
            KernelName::HarmonicSphere => Kernel::harmonic_sphere(need_r()?).map_err(bad),
        }
    }

    pub fn schedule(&self) -> Result<DescentSchedule, CliError> {
        let s = DescentSchedule {
            dtau: self.solver.dtau,
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            ..DescentSchedule::default()
        };
        s.validate().map_err(|e| invalid(format!("solver: {e}")))?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = ScenarioConfig::from_toml("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        let partial = ScenarioConfig::from_toml("[grid]\nn = 32").unwrap();
        assert_eq!(partial.grid.h, GridSection::default().h);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ScenarioConfig::from_toml("bogus = 1").is_err());
        assert!(ScenarioConfig::from_toml("[grid]\nn = 32\nh = 1.0\nextra = 2").is_err());
        assert!(ScenarioConfig::from_toml("[solver]\ntolerance = 1e-8").is_err());
    }

    #[test]
    fn echo_revalidates_and_hash_is_stable() {
        let cfg = ScenarioConfig::from_toml("[grid]\nn = 32\nh = 1.25\n[kernel]\nvariant = \"harmonic_sphere\"\nR = 50.0").unwrap();
        let again = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_ne!(cfg.hash(), ScenarioConfig::default().hash());
    }

    #[test]
    fn physical_section_rules() {
        assert!(ScenarioConfig::from_toml("[physical]\nM = 1e-3").is_err());
        let cfg = ScenarioConfig::from_toml("dimensionless = false\n[physical]\nM = 1e-3").unwrap();
        let p = cfg.physical_params().unwrap().unwrap();
        assert_eq!(p.mass, 1e-3);
        assert!(ScenarioConfig::from_toml("dimensionless = false").is_err());
        assert!(ScenarioConfig::from_toml("dimensionless = false\n[physical]\nR = 1.0").is_err());
        let sphere = ScenarioConfig::from_toml("dimensionless = false\n[physical]\nR = 1.0\nrho = 1.0\n[kernel]\nvariant = \"sphere\"").unwrap();
        assert!(sphere.kernel_radius().unwrap().unwrap() > 1e40);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(ScenarioConfig::from_toml("[grid]\nn = 48\nh = 1.0").is_err());
        assert!(ScenarioConfig::from_toml("[kernel]\nvariant = \"sphere\"").is_err());
        assert!(ScenarioConfig::from_toml("[evolve]\ndt = -1.0").is_err());
        assert!(ScenarioConfig::from_toml("[separability]\nm_a = 2.0").is_err());
        assert!(ScenarioConfig::from_toml("[evolve]\nmonitor_stride = 0").is_err());
    }
}
