use std::f64::consts::TAU;

use gravloc_core::dynamics::{evolve_observed, time_reverse, LobeAcceleration, Propagator};
use gravloc_core::{
    cross_coupling, evolve as propagate, galilean_transform, lobe_acceleration, two_soliton_prepare, ComplexField,
    GroundStateResult, Kernel, PropagatorConfig, Snapshot, Trajectory, UniformGrid,
};
use num_complex::Complex64;

use super::{keyed, parallel_map, relative_error, Context};
use crate::config::InitialState;
use crate::record::{gnuplot_header, linear_fit, relative_spread, Check, RunDir};
use crate::CliError;

fn lattice_vector(units: [i64; 3], step: f64) -> [f64; 3] {
    [units[0] as f64 * step, units[1] as f64 * step, units[2] as f64 * step]
}

fn write_trajectory(run: &mut RunDir, name: &str, traj: &Trajectory) -> Result<(), CliError> {
    let w = run.writer(name)?;
    traj.write_csv(w)?;
    Ok(())
}

pub(super) fn evolve(ctx: &Context, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let e = &cfg.evolve;
    let grid = cfg.grid()?;
    let kernel = cfg.kernel()?;
    let (mut psi, ground) = match e.initial {
        InitialState::Gaussian => (ComplexField::gaussian(grid, e.sigma, [0.0; 3])?, None),
        InitialState::GroundState => {
            let gs = ctx.solve(grid, kernel)?;
            (gs.phi0.clone(), Some(gs))
        }
    };
    let v = lattice_vector(e.boost, grid.dk());
    if v != [0.0; 3] {
        psi.apply_plane_wave(v);
    }
    let mut pc = PropagatorConfig::new(e.dt, e.steps, kernel);
    pc.monitor_stride = e.monitor_stride;
    pc.snapshot_stride = e.snapshot_stride;
    let stationary = ground.as_ref().filter(|_| v == [0.0; 3]);
    let mut overlaps = Vec::new();
    let traj = evolve_observed(psi, &pc, |t, psi| {
        if let Some(gs) = stationary {
            if let Ok(z) = gs.phi0.inner(psi) {
                overlaps.push((t, z));
            }
        }
    })?;
    if let Some(gs) = stationary {
        stationarity(run, gs, &traj, &overlaps, (e.max_density_change, e.max_phase_rate_error))?;
    }

    run.dimensionless("E0", traj.samples[0].energy);
    run.dimensionless("final_width", traj.samples[traj.samples.len() - 1].width);
    run.dimensionless("boost_velocity", (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
    run.dimensionless("max_norm_drift", traj.max_norm_drift());
    run.dimensionless("max_energy_drift", traj.max_relative_energy_drift());
    run.dimensionless("max_momentum_drift", traj.max_momentum_drift());
    if traj.boundary_warning {
        run.warn("the field reached the box edge; conservation figures are not meaningful");
    }
    run.check(Check::below("norm drift", traj.max_norm_drift(), e.max_norm_drift));
    run.check(Check::below("relative energy drift", traj.max_relative_energy_drift(), e.max_energy_drift));
    run.check(Check::below("momentum drift", traj.max_momentum_drift(), e.max_momentum_drift));

    let free_gaussian = kernel.is_none() && e.initial == InitialState::Gaussian;
    if free_gaussian {
        let s0 = e.sigma;
        let rows: Vec<Vec<f64>> = traj
            .samples
            .iter()
            .map(|s| {
                let predicted = 3f64.sqrt() * s0 * (1.0 + s.t * s.t / (4.0 * s0.powi(4))).sqrt();
                vec![s.t, s.width, predicted, relative_error(s.width, predicted)]
            })
            .collect();
        let worst = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
        run.dimensionless("max_spreading_error", worst);
        run.check(Check::below("free spreading law", worst, e.max_spreading_error));
        run.write_table("spreading.csv", &["t", "width", "width_predicted", "relative_error"], &rows)?;
    }

    write_trajectory(run, "trajectory.csv", &traj)?;
    for (i, snap) in traj.snapshots.iter().enumerate() {
        run.snapshot(&format!("snapshot_{i:05}.snwf"), snap)?;
    }
    let t_end = traj.samples[traj.samples.len() - 1].t;
    run.snapshot("final.snwf", &Snapshot::new(traj.final_state.clone(), t_end))?;

    let mut plot = gnuplot_header("evolution", "evolve.png");
    plot.push_str("set multiplot layout 1,2\nset xlabel 't'\nset ylabel 'width'\nplot 'trajectory.csv' using 1:12 with lines");
    if free_gaussian {
        plot.push_str(", 'spreading.csv' using 1:3 with lines dashtype 2");
    }
    plot.push_str("\nset ylabel 'E - E(0)'\nstats 'trajectory.csv' using 5 every ::0::0 nooutput\nplot 'trajectory.csv' using 1:($5 - STATS_min) with lines\nunset multiplot\n");
    run.write_text("plot.gp", &plot)
}

/// Density change and phase rotation of an evolved ground state.
fn stationarity(
    run: &mut RunDir,
    gs: &GroundStateResult,
    traj: &Trajectory,
    overlaps: &[(f64, Complex64)],
    limits: (f64, f64),
) -> Result<(), CliError> {
    let rho0 = gs.phi0.density();
    let rho_t = traj.final_state.density();
    let num: f64 = rho0.values().iter().zip(rho_t.values()).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = rho0.values().iter().map(|a| a * a).sum();
    let change = (num / den).sqrt();
    let mut rows = Vec::with_capacity(overlaps.len());
    let mut unwrapped = 0.0;
    let mut last = 0.0;
    for (i, &(t, z)) in overlaps.iter().enumerate() {
        let arg = z.arg();
        if i > 0 {
            let mut step = arg - last;
            step -= (step / TAU).round() * TAU;
            unwrapped += step;
        } else {
            unwrapped = arg;
        }
        last = arg;
        rows.push(vec![t, z.norm(), unwrapped, -gs.epsilon * t]);
    }
    let ts: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let phases: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let (rate, _) = linear_fit(&ts, &phases);
    let rate_error = (rate + gs.epsilon).abs();
    run.dimensionless("epsilon", gs.epsilon);
    run.dimensionless("density_change", change);
    run.dimensionless("phase_rate", rate);
    run.dimensionless("phase_rate_error", rate_error);
    run.check(Check::below("ground-state density change", change, limits.0));
    run.check(Check::below("phase rate vs epsilon", rate_error, limits.1));
    run.write_table("phase.csv", &["t", "overlap_modulus", "phase", "phase_predicted"], &rows)
}

struct SolitonRun {
    widths: f64,
    d: f64,
    outcome: Result<(Trajectory, LobeAcceleration), gravloc_core::Error>,
}

pub(super) fn two_soliton(ctx: &Context, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let t = &cfg.two_soliton;
    let grid = UniformGrid::new(t.n, t.h).map_err(|e| CliError::Validation(e.to_string()))?;
    let gs = ctx.solve(grid, Kernel::newtonian())?;
    let width = gs.width;
    run.dimensionless("soliton_width", width);
    run.dimensionless("duration", t.duration);
    let h = grid.h();
    // Half the separation must be a lattice vector for a mirror-symmetric start.
    let d_of = |k: f64| 2.0 * (k * width / (2.0 * h)).round() * h;
    let stride = ((t.monitor_interval / t.dt).round() as usize).max(1);
    let duration = t.duration;
    let member = |&k: &f64| -> SolitonRun {
        let d = d_of(k);
        let outcome = two_soliton_prepare(&gs.phi0, [d, 0.0, 0.0]).and_then(|psi| {
            let mut pc = PropagatorConfig::new(t.dt, (duration / t.dt).round() as usize, Kernel::newtonian());
            pc.monitor_stride = stride;
            pc.lobe_axis = Some([1.0, 0.0, 0.0]);
            let traj = propagate(psi, &pc)?;
            let acc = lobe_acceleration(&traj, t.fit_fraction * duration, width)?;
            Ok((traj, acc))
        });
        SolitonRun {
            widths: k,
            d,
            outcome,
        }
    };
    let runs = parallel_map(&t.separations, ctx.workers, member);

    let mut measured = Vec::new();
    let mut mirror = 0.0_f64;
    for r in runs {
        let k = r.widths;
        let (traj, acc) = match r.outcome {
            Ok(x) => x,
            Err(e) => {
                run.failure(format!("separation {k} widths: {e}"));
                continue;
            }
        };
        if traj.boundary_warning {
            run.warn(format!("separation {k} widths: the field reached the box edge"));
        }
        if let Some(tm) = acc.merge_time {
            run.warn(format!("separation {k} widths: lobes merged at t = {tm}"));
        }
        for s in &traj.samples {
            if let Some(l) = s.lobes {
                for a in 0..3 {
                    mirror = mirror.max((l.left_centroid[a] + l.right_centroid[a]).abs());
                }
            }
        }
        let ratio = acc.a_rel_fit / acc.a_rel_predicted;
        run.dimensionless(&keyed("d", "widths", k), r.d);
        run.dimensionless(&keyed("a_rel_fit", "widths", k), acc.a_rel_fit);
        run.dimensionless(&keyed("a_rel_predicted", "widths", k), acc.a_rel_predicted);
        run.dimensionless(&keyed("a_ratio", "widths", k), ratio);
        write_trajectory(run, &format!("trajectory_{k}w.csv"), &traj)?;
        let rows: Vec<Vec<f64>> = acc
            .times
            .iter()
            .zip(&acc.separation)
            .enumerate()
            .map(|(i, (&t, &d))| {
                let fd = if i > 0 && i + 1 < acc.times.len() { acc.a_rel_fd[i - 1] } else { f64::NAN };
                vec![t, d, fd]
            })
            .collect();
        run.write_table(&format!("separation_{k}w.csv"), &["t", "separation", "a_rel_fd"], &rows)?;
        measured.push((k, acc.a_rel_fit, acc.a_rel_predicted));
    }
    run.dimensionless("max_mirror_defect", mirror);
    run.check(Check::below("lobe mirror symmetry", mirror, 1e-6));
    if let Some(&(k, a, p)) = measured.first() {
        if k == t.separations[0] {
            run.check(Check::below("early acceleration vs 1/d^2", (a / p - 1.0).abs(), t.max_acceleration_error));
        }
    }
    if measured.len() >= 2 {
        let (first, last) = (measured[0], measured[measured.len() - 1]);
        let trend = (first.1 / last.1) / (first.2 / last.2);
        run.dimensionless("trend_ratio", trend);
        run.check(Check::below("inverse-square trend", (trend - 1.0).abs(), t.max_trend_error));
    }

    let mut plot = gnuplot_header("lobe separation", "two_soliton.png");
    plot.push_str("set xlabel 't'\nset ylabel 'separation'\nplot ");
    let series: Vec<String> = t
        .separations
        .iter()
        .map(|k| format!("'separation_{k}w.csv' using 1:2 with lines"))
        .collect();
    plot.push_str(&series.join(", "));
    plot.push('\n');
    run.write_text("plot.gp", &plot)
}

pub(super) fn boost_check(ctx: &Context, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let b = &cfg.boost_check;
    let grid = cfg.grid()?;
    let kernel = cfg.kernel()?;
    let r = lattice_vector(b.offset, grid.h());
    let v = lattice_vector(b.velocity, grid.dk());
    let psi0 = ComplexField::gaussian(grid, b.sigma, [0.0; 3])?;
    let start = galilean_transform(&psi0, r, v, 0.0)?;
    let mut prop = Propagator::new(grid, kernel, b.dt)?;

    let mut moving = start.clone();
    let mut resting = psi0;
    let chunk = (b.steps / 10).max(1);
    let mut done = 0;
    let mut rows = vec![vec![0.0, 0.0, moving.l2_distance(&start)?]];
    let mut worst = 0.0_f64;
    while done < b.steps {
        let k = chunk.min(b.steps - done);
        prop.advance(&mut moving, k)?;
        prop.advance(&mut resting, k)?;
        done += k;
        let t = done as f64 * b.dt;
        let err = moving.l2_distance(&galilean_transform(&resting, r, v, t)?)?;
        worst = worst.max(err);
        rows.push(vec![done as f64, t, err]);
    }
    let mut back = time_reverse(&moving);
    prop.advance(&mut back, b.steps)?;
    let reversal = time_reverse(&back).l2_distance(&start)?;

    run.dimensionless("covariance_error", worst);
    run.dimensionless("reversal_error", reversal);
    run.dimensionless("velocity_x", v[0]);
    run.dimensionless("velocity_y", v[1]);
    run.dimensionless("velocity_z", v[2]);
    run.check(Check::below("Galilean covariance L2 error", worst, b.max_error));
    run.check(Check::below("time reversal L2 error", reversal, b.max_reversal_error));
    run.write_table("covariance.csv", &["step", "t", "l2_error"], &rows)?;
    let mut plot = gnuplot_header("boost covariance", "boost_check.png");
    plot.push_str("set logscale y\nset xlabel 't'\nset ylabel 'L2 error'\nplot 'covariance.csv' using 2:3 with linespoints\n");
    run.write_text("plot.gp", &plot)
}

pub(super) fn separability(ctx: &Context, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let p = &cfg.separability;
    let gs = ctx.solve(cfg.grid()?, Kernel::newtonian())?;
    let width = gs.width;
    run.dimensionless("soliton_width", width);
    let mut ks = p.separations.clone();
    ks.push(p.far_separation);
    let phi = &gs.phi0;
    let results = parallel_map(&ks, ctx.workers, |&k| cross_coupling(phi, phi, p.m_a, p.m_b, [k * width, 0.0, 0.0]));

    let point = -p.m_a * p.m_b;
    let mut rows = Vec::new();
    let mut products = Vec::new();
    for (&k, res) in ks.iter().zip(results) {
        let c = res?;
        let d = k * width;
        run.dimensionless(&keyed("cross_energy", "widths", k), c.cross_energy);
        rows.push(vec![k, d, c.cross_energy, c.cross_energy * d, point / d, c.force_on_b[0]]);
        if products.len() < p.separations.len() {
            products.push(c.cross_energy * d);
        } else {
            run.dimensionless("self_energy_a", c.self_energies[0]);
            run.dimensionless("self_energy_b", c.self_energies[1]);
            let self_scale = c.self_energies[0].abs().max(c.self_energies[1].abs());
            if self_scale > 0.0 {
                let ratio = c.cross_energy.abs() / self_scale;
                run.dimensionless("far_cross_over_self", ratio);
                run.check(Check::below("far cross/self ratio", ratio, p.max_far_ratio));
            }
        }
    }
    run.write_table(
        "separability.csv",
        &["d_widths", "d", "cross_energy", "cross_times_d", "point_mass_energy", "force_x"],
        &rows,
    )?;
    if point == 0.0 {
        let largest = rows.iter().map(|r| r[2].abs()).fold(0.0, f64::max);
        run.check(Check::below("cross energy vanishes for a massless factor", largest, f64::MIN_POSITIVE));
    } else {
        let spread = relative_spread(&products);
        let (far, _) = p
            .separations
            .iter()
            .zip(&products)
            .fold((f64::NAN, f64::NEG_INFINITY), |(best, dmax), (&k, &prod)| {
                if k > dmax { (prod, k) } else { (best, dmax) }
            });
        let pm_error = relative_error(far, point);
        run.dimensionless("product_spread", spread);
        run.dimensionless("point_mass_error", pm_error);
        run.check(Check::below("cross energy times d spread", spread, p.max_product_spread));
        run.check(Check::below("point-mass limit at largest d", pm_error, p.max_point_mass_error));
    }
    let mut plot = gnuplot_header("cross-coupling energy", "separability.png");
    plot.push_str("set logscale x\nset xlabel 'd'\nset ylabel 'E_cross * d'\nplot 'separability.csv' using 2:4 with linespoints, '' using 2:($5 * $2) with lines\n");
    run.write_text("plot.gp", &plot)
}
