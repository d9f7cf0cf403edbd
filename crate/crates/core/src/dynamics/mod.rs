//! Real-time evolution, Galilean symmetry and trajectory monitoring.

mod two_body;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::Hamiltonian;
use crate::error::{Error, Result};
use crate::field::{ComplexField, Spectral};
use crate::gravity::Kernel;
use crate::grid::UniformGrid;
use crate::snwf::Snapshot;

pub use two_body::{
    cross_coupling, lobe_acceleration, lobe_record, two_soliton_prepare, CrossCoupling, LobeAcceleration,
    LobeRecord, MAX_LOBE_OVERLAP, MIN_SEPARATION_WIDTHS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub steps: usize,
    /// Keep a copy of the field every this many steps (never when `None`).
    pub snapshot_stride: Option<usize>,
    /// Record observables every this many steps, plus at the start and end.
    pub monitor_stride: usize,
    pub kernel: Kernel,
    /// Allowed |‖ψ‖² − 1| at any monitored step.
    pub norm_tolerance: f64,
    /// Edge-to-peak amplitude ratio that raises the boundary warning.
    pub boundary_threshold: f64,
    /// Separation direction for half-space lobe tracking.
    pub lobe_axis: Option<[f64; 3]>,
}

impl PropagatorConfig {
    pub fn new(dt: f64, steps: usize, kernel: Kernel) -> Self {
        Self {
            dt,
            steps,
            snapshot_stride: None,
            monitor_stride: 1,
            kernel,
            norm_tolerance: 1e-8,
            boundary_threshold: 1e-4,
            lobe_axis: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::ensure_positive("dt", self.dt)?;
        crate::error::ensure_positive("norm_tolerance", self.norm_tolerance)?;
        crate::error::ensure_positive("boundary_threshold", self.boundary_threshold)?;
        if self.monitor_stride == 0 || self.snapshot_stride == Some(0) {
            return Err(Error::Domain("strides must be at least 1".into()));
        }
        if let Some(axis) = self.lobe_axis {
            let len = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::Domain("lobe axis must be a nonzero vector".into()));
            }
        }
        self.kernel.validate()
    }
}

/// Observables at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub norm2: f64,
    pub kinetic: f64,
    pub interaction: f64,
    pub energy: f64,
    pub momentum: [f64; 3],
    pub centroid: [f64; 3],
    pub width: f64,
    pub boundary_contamination: f64,
    pub lobes: Option<LobeRecord>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub snapshots: Vec<Snapshot>,
    /// Set when the field reached the box edge; conservation checks are then void.
    pub boundary_warning: bool,
    pub final_state: ComplexField,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn max_norm_drift(&self) -> f64 {
        let n0 = self.samples[0].norm2;
        self.samples.iter().map(|s| (s.norm2 - n0).abs()).fold(0.0, f64::max)
    }

    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.samples[0].energy;
        self.samples.iter().map(|s| (s.energy - e0).abs()).fold(0.0, f64::max) / e0.abs()
    }

    pub fn max_momentum_drift(&self) -> f64 {
        let p0 = self.samples[0].momentum;
        self.samples
            .iter()
            .map(|s| {
                let d: f64 = (0..3).map(|a| (s.momentum[a] - p0[a]).powi(2)).sum();
                d.sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// CSV with a header row; lobe columns appear when lobes were tracked.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let lobes = self.samples.iter().any(|s| s.lobes.is_some());
        write!(w, "t,norm2,T,W,E,px,py,pz,cx,cy,cz,width")?;
        if lobes {
            write!(
                w,
                ",left_mass,left_cx,left_cy,left_cz,right_mass,right_cx,right_cy,right_cz,separation"
            )?;
        }
        writeln!(w)?;
        for s in &self.samples {
            write!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                s.t,
                s.norm2,
                s.kinetic,
                s.interaction,
                s.energy,
                s.momentum[0],
                s.momentum[1],
                s.momentum[2],
                s.centroid[0],
                s.centroid[1],
                s.centroid[2],
                s.width
            )?;
            if lobes {
                match &s.lobes {
                    Some(l) => write!(
                        w,
                        ",{},{},{},{},{},{},{},{},{}",
                        l.left_mass,
                        l.left_centroid[0],
                        l.left_centroid[1],
                        l.left_centroid[2],
                        l.right_mass,
                        l.right_centroid[0],
                        l.right_centroid[1],
                        l.right_centroid[2],
                        l.separation
                    )?,
                    None => write!(w, ",,,,,,,,,")?,
                }
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Strang-split propagator for one grid, kernel and time step.
///
/// One step is `K(dt/2) P(dt) K(dt/2)`, where `K` is the exact free flow
/// applied in Fourier space and `P` multiplies by `exp(−iV dt)` with `V`
/// generated by the current density. Because `P` leaves the density alone the
/// potential substep is exact, and the composition is second order and
/// unitary. Adjacent half kinetic steps inside a run are fused.
#[derive(Debug)]
pub struct Propagator {
    ham: Hamiltonian,
    dt: f64,
    half_kick: Vec<Complex64>,
    full_kick: Vec<Complex64>,
    density: Vec<f64>,
    potential: Vec<f64>,
}

impl Propagator {
    pub fn new(grid: UniformGrid, kernel: Kernel, dt: f64) -> Result<Self> {
        crate::error::ensure_positive("dt", dt)?;
        let ham = Hamiltonian::new(grid, kernel)?;
        let half_kick = ham.half_k2().iter().map(|k| Complex64::from_polar(1.0, -k * dt / 2.0)).collect();
        let full_kick = ham.half_k2().iter().map(|k| Complex64::from_polar(1.0, -k * dt)).collect();
        Ok(Self {
            ham,
            dt,
            half_kick,
            full_kick,
            density: Vec::with_capacity(grid.len()),
            potential: vec![0.0; grid.len()],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn hamiltonian(&mut self) -> &mut Hamiltonian {
        &mut self.ham
    }

    /// Advance `psi` by `steps` full steps.
    pub fn advance(&mut self, psi: &mut ComplexField, steps: usize) -> Result<()> {
        self.ham.grid().ensure_same(psi.grid())?;
        if steps == 0 {
            return Ok(());
        }
        let free = self.ham.kernel().is_none();
        let values = psi.values_mut();
        self.ham.spectral().forward(values);
        multiply(values, &self.half_kick);
        self.ham.spectral().inverse(values);
        for s in 0..steps {
            if !free {
                self.ham.potential_into(values, &mut self.density, &mut self.potential);
                for (v, p) in values.iter_mut().zip(&self.potential) {
                    *v *= Complex64::from_polar(1.0, -p * self.dt);
                }
            }
            self.ham.spectral().forward(values);
            multiply(values, if s + 1 == steps { &self.half_kick } else { &self.full_kick });
            self.ham.spectral().inverse(values);
        }
        Ok(())
    }

    pub fn sample(&mut self, psi: &ComplexField, t: f64, lobe_axis: Option<[f64; 3]>) -> Result<Sample> {
        let energy = self.ham.energy(psi)?;
        let momentum = self.ham.spectral().momentum(psi)?;
        let centroid = psi.centroid();
        Ok(Sample {
            t,
            norm2: psi.norm_squared(),
            kinetic: energy.kinetic,
            interaction: energy.interaction,
            energy: energy.total,
            momentum,
            centroid,
            width: psi.rms_width(),
            boundary_contamination: psi.boundary_contamination(),
            lobes: lobe_axis.map(|axis| lobe_record(psi, axis)),
        })
    }
}

fn multiply(values: &mut [Complex64], by: &[Complex64]) {
    for (v, m) in values.iter_mut().zip(by) {
        *v *= m;
    }
}

/// Evolve and record observables.
pub fn evolve(psi: ComplexField, cfg: &PropagatorConfig) -> Result<Trajectory> {
    evolve_observed(psi, cfg, |_, _| {})
}

/// [`evolve`], calling `observer(t, ψ)` at every monitored instant.
pub fn evolve_observed(
    mut psi: ComplexField,
    cfg: &PropagatorConfig,
    mut observer: impl FnMut(f64, &ComplexField),
) -> Result<Trajectory> {
    cfg.validate()?;
    psi.check_finite()?;
    let n2 = psi.norm_squared();
    if (n2 - 1.0).abs() > cfg.norm_tolerance.max(1e-10) {
        return Err(Error::Precondition(format!("initial state has norm² {n2}, expected 1")));
    }
    let mut prop = Propagator::new(*psi.grid(), cfg.kernel, cfg.dt)?;
    let mut samples = Vec::new();
    let mut snapshots = Vec::new();
    let mut boundary_warning = false;

    let mut record = |prop: &mut Propagator, psi: &ComplexField, step: usize, samples: &mut Vec<Sample>| -> Result<bool> {
        let t = step as f64 * cfg.dt;
        let s = prop.sample(psi, t, cfg.lobe_axis)?;
        if (s.norm2 - 1.0).abs() > cfg.norm_tolerance {
            return Err(Error::ThresholdBreach {
                quantity: format!("norm drift at t = {t}"),
                value: (s.norm2 - 1.0).abs(),
                limit: cfg.norm_tolerance,
            });
        }
        observer(t, psi);
        let warn = s.boundary_contamination > cfg.boundary_threshold;
        samples.push(s);
        Ok(warn)
    };

    boundary_warning |= record(&mut prop, &psi, 0, &mut samples)?;
    if cfg.snapshot_stride.is_some() {
        snapshots.push(Snapshot::new(psi.clone(), 0.0));
    }
    let mut step = 0;
    while step < cfg.steps {
        let mut next = (step + cfg.monitor_stride).min(cfg.steps);
        if let Some(stride) = cfg.snapshot_stride {
            next = next.min((step / stride + 1) * stride);
        }
        prop.advance(&mut psi, next - step)?;
        step = next;
        psi.check_finite()?;
        if step % cfg.monitor_stride == 0 || step == cfg.steps {
            boundary_warning |= record(&mut prop, &psi, step, &mut samples)?;
        }
        if let Some(stride) = cfg.snapshot_stride {
            if step % stride == 0 {
                snapshots.push(Snapshot::new(psi.clone(), step as f64 * cfg.dt));
            }
        }
    }
    if boundary_warning {
        log::warn!(
            "field reached the box edge (contamination above {:.1e}); enlarge the box",
            cfg.boundary_threshold
        );
    }
    Ok(Trajectory {
        samples,
        snapshots,
        boundary_warning,
        final_state: psi,
    })
}

/// ψ(x − r)·exp(iv·x).
///
/// Off-lattice `r` is handled by spectral interpolation and off-lattice `v`
/// aliases at the box edge; both log a warning.
pub fn boost(psi: &ComplexField, r: [f64; 3], v: [f64; 3]) -> Result<ComplexField> {
    galilean_transform(psi, r, v, 0.0)
}

/// The Galilean image of a solution at time t:
/// ψ′(x, t) = ψ(x − r − vt, t)·exp(i(v·x − ½|v|²t)).
pub fn galilean_transform(psi: &ComplexField, r: [f64; 3], v: [f64; 3], t: f64) -> Result<ComplexField> {
    let grid = *psi.grid();
    if !grid.is_momentum_lattice(v) {
        log::warn!("boost velocity {v:?} is off the momentum lattice; expect aliasing at the box edge");
    }
    if !grid.is_position_lattice(r) {
        log::warn!("boost offset {r:?} is off the position lattice; using spectral interpolation");
    }
    let shift = [r[0] + v[0] * t, r[1] + v[1] * t, r[2] + v[2] * t];
    let mut out = if shift == [0.0; 3] {
        psi.clone()
    } else {
        Spectral::new(grid).shift(psi, shift)?
    };
    out.apply_plane_wave(v);
    let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if v2 != 0.0 && t != 0.0 {
        out.scale(Complex64::from_polar(1.0, -0.5 * v2 * t));
    }
    Ok(out)
}

/// Complex conjugation, which reverses the direction of time.
pub fn time_reverse(psi: &ComplexField) -> ComplexField {
    let values = psi.values().iter().map(|v| v.conj()).collect();
    ComplexField::from_parts_unchecked(*psi.grid(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(n: usize, h: f64, sigma: f64) -> ComplexField {
        ComplexField::gaussian(UniformGrid::new(n, h).unwrap(), sigma, [0.0; 3])
            .unwrap()
            .normalized(1.0)
            .unwrap()
    }

    #[test]
    fn config_validation() {
        let mut cfg = PropagatorConfig::new(0.01, 10, Kernel::newtonian());
        assert!(cfg.validate().is_ok());
        cfg.monitor_stride = 0;
        assert!(cfg.validate().is_err());
        cfg.monitor_stride = 1;
        cfg.snapshot_stride = Some(0);
        assert!(cfg.validate().is_err());
        assert!(PropagatorConfig::new(0.0, 10, Kernel::newtonian()).validate().is_err());
    }

    #[test]
    fn rejects_unnormalized_and_nan() {
        let mut psi = gaussian(16, 0.5, 1.0);
        psi.scale(Complex64::new(2.0, 0.0));
        let cfg = PropagatorConfig::new(0.01, 2, Kernel::newtonian());
        assert!(matches!(evolve(psi, &cfg), Err(Error::Precondition(_))));
        let mut bad = gaussian(16, 0.5, 1.0);
        bad.values_mut()[7] = Complex64::new(f64::NAN, 0.0);
        assert!(evolve(bad, &cfg).is_err());
    }

    #[test]
    fn free_gaussian_spreads_analytically() {
        let sigma0 = 1.0;
        let psi = gaussian(64, 0.5, sigma0);
        let mut cfg = PropagatorConfig::new(0.05, 40, Kernel::none());
        cfg.monitor_stride = 10;
        let traj = evolve(psi, &cfg).unwrap();
        for s in &traj.samples {
            let sigma = sigma0 * (1.0 + s.t * s.t / (4.0 * sigma0.powi(4))).sqrt();
            let rel = (s.width - 3f64.sqrt() * sigma).abs() / (3f64.sqrt() * sigma);
            assert!(rel < 1e-4, "t = {}: {rel}", s.t);
        }
        assert!(!traj.boundary_warning);
    }

    #[test]
    fn fused_steps_match_single_steps() {
        let psi = gaussian(16, 0.6, 1.0);
        let mut a = psi.clone();
        let mut b = psi;
        let mut prop = Propagator::new(*a.grid(), Kernel::newtonian(), 0.05).unwrap();
        prop.advance(&mut a, 6).unwrap();
        for _ in 0..6 {
            prop.advance(&mut b, 1).unwrap();
        }
        assert!(a.l2_distance(&b).unwrap() < 1e-13);
    }

    #[test]
    fn boost_identity_and_momentum_shift() {
        let psi = gaussian(32, 0.5, 1.0);
        let same = boost(&psi, [0.0; 3], [0.0; 3]).unwrap();
        assert_eq!(same.values(), psi.values());
        let k0 = 3.0 * psi.grid().dk();
        let moved = boost(&psi, [0.0; 3], [k0, 0.0, 0.0]).unwrap();
        let p = crate::field::momentum_expectation(&moved);
        assert!((p[0] - k0).abs() < 1e-10 && p[1].abs() < 1e-10 && p[2].abs() < 1e-10);
    }

    #[test]
    fn snapshots_and_csv() {
        let psi = gaussian(16, 0.6, 1.0);
        let mut cfg = PropagatorConfig::new(0.02, 5, Kernel::newtonian());
        cfg.snapshot_stride = Some(2);
        cfg.monitor_stride = 2;
        let traj = evolve(psi, &cfg).unwrap();
        let snap_times: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(snap_times, vec![0.0, 0.04, 0.08]);
        let times = traj.times();
        assert_eq!(times.len(), 4);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*times.last().unwrap(), 0.1);
        let mut csv = Vec::new();
        traj.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,norm2,T,W,E,px,py,pz,cx,cy,cz,width\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
