use gravloc_core::units::{critical_size_with, make_scaling, G_CGS, HBAR_CGS};
use gravloc_core::{
    gaussian_variational, minimize, radial_shooting_oracle, ComplexField, GroundStateResult, Initial,
    Kernel, KernelVariant, PhysicalParams, Snapshot, UniformGrid,
};

use super::{keyed, parallel_map, relative_error, Context};
use crate::record::{gnuplot_header, linear_fit, relative_spread, Check, RunDir};
use crate::CliError;

pub(super) fn ground_state(ctx: &Context, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let grid = cfg.grid()?;
    let kernel = cfg.kernel()?;
    let gs = ctx.solve(grid, kernel)?;
    let e = gs.energy;
    run.dimensionless("E", e.total);
    run.dimensionless("T", e.kinetic);
    run.dimensionless("W", e.interaction);
    run.dimensionless("epsilon", gs.epsilon);
    run.dimensionless("epsilon_over_E", gs.epsilon / e.total);
    run.dimensionless("width", gs.width);
    run.dimensionless("iterations", gs.iterations as f64);
    run.dimensionless("residual", gs.residual);
    run.dimensionless("boundary_contamination", gs.boundary_contamination);
    run.dimensionless("max_imaginary_part", gs.phi0.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max));

    let newtonian = matches!(kernel.variant, KernelVariant::Newtonian);
    if grid.extent() < 12.0 * gs.width || grid.h() > gs.width / 6.0 {
        run.warn(format!(
            "grid (extent {:.2}, h {:.3}) does not resolve the width {:.3} to the 12×/h ≤ width/6 standard",
            grid.extent(),
            grid.h(),
            gs.width
        ));
    }
    if let Ok(opt) = gaussian_variational(&kernel) {
        run.dimensionless("gaussian_sigma_star", opt.sigma_star);
        run.dimensionless("gaussian_E_star", opt.e_star);
        if newtonian {
            run.check(Check::below("E below the Gaussian bound", e.total - opt.e_star, 0.0));
        }
    }
    let mut oracle_profile = None;
    if newtonian {
        let tol = cfg.solver.virial_tolerance;
        run.check(Check::below("virial |2T + W|/T", (2.0 * e.kinetic + e.interaction).abs() / e.kinetic, tol));
        run.check(Check::below("virial |E + T|/T", (e.total + e.kinetic).abs() / e.kinetic, tol));
        run.check(Check::below("virial |eps - 3E|/|E|", (gs.epsilon - 3.0 * e.total).abs() / e.total.abs(), tol));

        let oracle = radial_shooting_oracle(cfg.solver.oracle_rmax, cfg.solver.oracle_points)?;
        let [tol_eps, tol_e, tol_w] = cfg.solver.oracle_tolerance;
        run.dimensionless("oracle_epsilon", oracle.epsilon);
        run.dimensionless("oracle_E", oracle.energy.total);
        run.dimensionless("oracle_width", oracle.width);
        run.check(Check::below("oracle epsilon agreement", relative_error(gs.epsilon, oracle.epsilon), tol_eps));
        run.check(Check::below("oracle E agreement", relative_error(e.total, oracle.energy.total), tol_e));
        run.check(Check::below("oracle width agreement", relative_error(gs.width, oracle.width), tol_w));
        oracle_profile = Some(oracle.profile);
    }

    if let Some(params) = cfg.physical_params()? {
        let scale = make_scaling(&params)?;
        run.metric("mass", params.mass, "g");
        run.metric("length_unit", scale.length_unit, "cm");
        run.metric("time_unit", scale.time_unit, "s");
        run.metric("width_cm", scale.length_to_cgs(gs.width), "cm");
        run.metric("E_erg", scale.energy_to_cgs(e.total), "erg");
        run.metric("epsilon_erg", scale.energy_to_cgs(gs.epsilon), "erg");
    }

    run.snapshot("ground_state.snwf", &Snapshot::new(gs.phi0.clone(), 0.0))?;
    let shells = shell_average(&gs.phi0);
    let rows: Vec<Vec<f64>> = shells
        .iter()
        .map(|&(r, rho)| {
            let mut row = vec![r, rho];
            if let Some(p) = &oracle_profile {
                row.push(p.interpolate(r).powi(2));
            }
            row
        })
        .collect();
    let mut header = vec!["r", "density"];
    if oracle_profile.is_some() {
        header.push("density_radial_solver");
    }
    run.write_table("radial_profile.csv", &header, &rows)?;
    run.write_table("grid_axis.csv", &["x", "phi"], &axis_cut(&gs.phi0))?;
    let history: Vec<Vec<f64>> = gs
        .energy_history
        .iter()
        .enumerate()
        .map(|(i, e)| vec![i as f64, *e])
        .collect();
    run.write_table("energy_history.csv", &["iteration", "E"], &history)?;

    let mut plot = gnuplot_header("ground state", "ground_state.png");
    plot.push_str("set multiplot layout 1,2\nset xlabel 'r'\nset ylabel 'density'\n");
    plot.push_str("plot 'radial_profile.csv' using 1:2 with points");
    if oracle_profile.is_some() {
        plot.push_str(", '' using 1:3 with lines");
    }
    plot.push_str("\nset xlabel 'iteration'\nset ylabel 'E'\nplot 'energy_history.csv' using 1:2 with lines\nunset multiplot\n");
    run.write_text("plot.gp", &plot)
}

/// Spherical shell averages of |φ|² about the origin, one shell per grid step.
fn shell_average(phi: &ComplexField) -> Vec<(f64, f64)> {
    let grid = phi.grid();
    let h = grid.h();
    let shells = grid.n() / 2;
    let mut sum = vec![0.0; shells];
    let mut count = vec![0usize; shells];
    for (i, v) in phi.values().iter().enumerate() {
        let x = grid.position(i);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let s = (r / h + 0.5) as usize;
        if s < shells {
            sum[s] += v.norm_sqr();
            count[s] += 1;
        }
    }
    (0..shells)
        .filter(|&s| count[s] > 0)
        .map(|s| (s as f64 * h, sum[s] / count[s] as f64))
        .collect()
}

/// φ along the x axis through the origin.
fn axis_cut(phi: &ComplexField) -> Vec<Vec<f64>> {
    let grid = phi.grid();
    let mid = grid.n() / 2;
    (0..grid.n())
        .map(|i| vec![grid.coord(i), phi.values()[grid.index(i, mid, mid)].re])
        .collect()
}

pub(super) fn sweep_mass(ctx: &Context, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let sweep = &cfg.sweep_mass;
    let masses = &sweep.masses;
    if masses.len() < 4 {
        return Err(CliError::Validation("sweep_mass.masses needs at least four masses".into()));
    }
    let (lo, hi) = masses.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &m| (a.min(m), b.max(m)));
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(CliError::Validation("sweep_mass.masses must span at least two decades".into()));
    }
    if !matches!(cfg.kernel.variant, crate::config::KernelName::Newtonian) {
        return Err(CliError::Validation("sweep-mass uses the newtonian kernel".into()));
    }
    let (hbar, g) = cfg.physical.as_ref().map_or((HBAR_CGS, G_CGS), |p| (p.hbar, p.g));

    // The dimensionless problem has no parameter left: one solve serves every mass.
    let gs = ctx.solve(cfg.grid()?, Kernel::newtonian())?;
    run.dimensionless("width", gs.width);
    run.dimensionless("E", gs.energy.total);

    let mut rows = Vec::new();
    for &m in masses {
        let scale = match PhysicalParams::new(hbar, g, m).and_then(|p| make_scaling(&p)) {
            Ok(s) => s,
            Err(e) => {
                run.failure(format!("M = {m:e} g: {e}"));
                continue;
            }
        };
        let width_cm = scale.length_to_cgs(gs.width);
        let prefactor = width_cm / scale.length_unit;
        run.metric(&keyed("a0_cm", "M", m), scale.length_unit, "cm");
        run.metric(&keyed("width_cm", "M", m), width_cm, "cm");
        run.metric(&keyed("E_erg", "M", m), scale.energy_to_cgs(gs.energy.total), "erg");
        rows.push(vec![m, scale.length_unit, width_cm, prefactor]);
    }
    run.write_table("sweep_mass.csv", &["mass_g", "a0_cm", "width_cm", "width_over_a0"], &rows)?;
    if rows.len() < 2 {
        return Err(CliError::Validation("fewer than two masses could be evaluated".into()));
    }
    let ln_m: Vec<f64> = rows.iter().map(|r| r[0].ln()).collect();
    let ln_w: Vec<f64> = rows.iter().map(|r| r[2].ln()).collect();
    let (slope, intercept) = linear_fit(&ln_m, &ln_w);
    let prefactors: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    let spread = relative_spread(&prefactors);
    run.dimensionless("slope", slope);
    run.metric("fit_intercept", intercept.exp(), "cm g^3");
    run.dimensionless("prefactor_spread", spread);
    run.check(Check::below("log-log slope vs -3", (slope + 3.0).abs(), sweep.max_slope_error));
    run.check(Check::below("prefactor spread", spread, sweep.max_prefactor_spread));

    let mut plot = gnuplot_header("width vs mass", "sweep_mass.png");
    plot.push_str("set logscale xy\nset xlabel 'M [g]'\nset ylabel 'width [cm]'\nplot 'sweep_mass.csv' using 1:3 with linespoints\n");
    run.write_text("plot.gp", &plot)
}

struct RadiusRow {
    radius: f64,
    sigma_predicted: f64,
    outcome: Result<GroundStateResult, gravloc_core::Error>,
}

pub(super) fn sweep_radius(ctx: &Context, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let sweep = &cfg.sweep_radius;
    let schedule = cfg.schedule()?;
    let solve = |&radius: &f64| -> RadiusRow {
        let sigma_predicted = (radius.powi(3) / 4.0).powf(0.25);
        let outcome = Kernel::harmonic_sphere(radius).and_then(|kernel| {
            let grid = UniformGrid::new(sweep.n, sweep.h_over_sigma * sigma_predicted)?;
            minimize(grid, kernel, Initial::GaussianOptimum, &schedule)
        });
        RadiusRow {
            radius,
            sigma_predicted,
            outcome,
        }
    };
    let results = parallel_map(&sweep.radii, ctx.workers, solve);
    let mut rows = Vec::new();
    let mut fit = Vec::new();
    for row in results {
        let r = row.radius;
        let gs = match row.outcome {
            Ok(gs) => gs,
            Err(e) => {
                run.failure(format!("R = {r:e}: {e}"));
                continue;
            }
        };
        let sigma = gs.width / 3f64.sqrt();
        let ratio = gs.width / r;
        let in_regime = ratio <= sweep.max_width_over_r;
        if !in_regime {
            run.warn(format!("R = {r:e}: width/R = {ratio:.3} is outside the small-width regime; excluded from the fit"));
        }
        run.dimensionless(&keyed("width", "R", r), gs.width);
        run.dimensionless(&keyed("sigma_error", "R", r), relative_error(sigma, row.sigma_predicted));
        rows.push(vec![r, gs.width, ratio, sigma, row.sigma_predicted, gs.energy.total, f64::from(u8::from(in_regime))]);
        if in_regime {
            fit.push((r, gs.width, relative_error(sigma, row.sigma_predicted)));
        }
    }
    run.write_table(
        "sweep_radius.csv",
        &["R", "width", "width_over_R", "sigma", "sigma_predicted", "E", "in_regime"],
        &rows,
    )?;
    if fit.len() < 2 {
        return Err(CliError::Validation("fewer than two radii inside the small-width regime".into()));
    }
    let ln_r: Vec<f64> = fit.iter().map(|f| f.0.ln()).collect();
    let ln_w: Vec<f64> = fit.iter().map(|f| f.1.ln()).collect();
    let (slope, _) = linear_fit(&ln_r, &ln_w);
    let worst = fit.iter().map(|f| f.2).fold(0.0, f64::max);
    let quartic: Vec<f64> = fit.iter().map(|f| f.1.powi(4) / f.0.powi(3)).collect();
    let spread = relative_spread(&quartic);
    run.dimensionless("slope", slope);
    run.dimensionless("max_sigma_error", worst);
    run.dimensionless("quartic_spread", spread);
    run.check(Check::below("log-log slope vs 3/4", (slope - 0.75).abs(), sweep.max_slope_error));
    run.check(Check::below("sigma vs (R^3/4)^(1/4)", worst, sweep.max_sigma_error));
    run.check(Check::below("width^4/R^3 spread", spread, sweep.max_quartic_spread));

    let mut plot = gnuplot_header("width vs sphere radius", "sweep_radius.png");
    plot.push_str("set logscale xy\nset xlabel 'R'\nset ylabel 'sigma'\nplot 'sweep_radius.csv' using 1:4 with points, '' using 1:5 with lines\n");
    run.write_text("plot.gp", &plot)
}

pub(super) fn critical_size(ctx: &Context, run: &mut RunDir) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let (hbar, g) = cfg.physical.as_ref().map_or((HBAR_CGS, G_CGS), |p| (p.hbar, p.g));
    let mut rows = Vec::new();
    for &rho in &cfg.critical_size.rho {
        let c = critical_size_with(hbar, g, rho)?;
        run.metric(&keyed("R_c", "rho", rho), c.r_c, "cm");
        run.metric(&keyed("R_c_competing", "rho", rho), c.r_c_competing, "cm");
        rows.push(vec![rho, c.r_c, c.r_c_competing]);
        if rho == 1.0 {
            run.check(Check::within("R_c at unit density [cm]", c.r_c, 3e-6, 3e-5));
        }
    }
    if rows.len() >= 2 {
        let (first, last) = (&rows[0], &rows[rows.len() - 1]);
        if first[0] != last[0] {
            run.dimensionless("density_exponent", (last[1] / first[1]).ln() / (last[0] / first[0]).ln());
        }
    }
    run.write_table("critical_size.csv", &["rho_g_cm3", "R_c_cm", "R_c_competing_cm"], &rows)?;
    let mut plot = gnuplot_header("critical radius vs density", "critical_size.png");
    plot.push_str("set logscale xy\nset xlabel 'rho [g/cm^3]'\nset ylabel 'R_c [cm]'\nplot 'critical_size.csv' using 1:2 with linespoints, '' using 1:3 with linespoints\n");
    run.write_text("plot.gp", &plot)
}

