use gravloc_core::{
    eigenvalue, energy_breakdown, evolve, gaussian_variational, minimize, radial_shooting_oracle, DescentSchedule,
    Initial, Kernel, PropagatorConfig, Snapshot, UniformGrid,
};

#[test]
fn coarse_ground_state_round_trips_through_a_snapshot() {
    let grid = UniformGrid::new(32, 1.4).unwrap();
    let schedule = DescentSchedule {
        tol: 1e-7,
        ..DescentSchedule::default()
    };
    let kernel = Kernel::newtonian();
    let gs = minimize(grid, kernel, Initial::GaussianOptimum, &schedule).unwrap();
    let bound = gaussian_variational(&kernel).unwrap().e_star;
    assert!(gs.energy.total < bound);
    assert!((gs.epsilon / gs.energy.total - 3.0).abs() < 3e-3);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi0.snwf");
    Snapshot::new(gs.phi0.clone(), 0.0).save(&path).unwrap();
    let back = Snapshot::load(&path).unwrap();
    assert_eq!(back.field.values(), gs.phi0.values());
    let e = energy_breakdown(&back.field, &kernel).unwrap();
    assert_eq!(e.total, gs.energy.total);
    assert_eq!(eigenvalue(&back.field, &kernel).unwrap(), gs.epsilon);
}

#[test]
fn coarse_grid_tracks_the_radial_solution() {
    let oracle = radial_shooting_oracle(60.0, 20_000).unwrap();
    let grid = UniformGrid::new(64, 0.9).unwrap();
    let gs = minimize(grid, Kernel::newtonian(), Initial::GaussianOptimum, &DescentSchedule::default()).unwrap();
    assert!((gs.energy.total / oracle.energy.total - 1.0).abs() < 5e-3);
    assert!((gs.epsilon / oracle.epsilon - 1.0).abs() < 5e-3);
    assert!((gs.width / oracle.width - 1.0).abs() < 1e-2);
}

#[test]
fn evolved_ground_state_keeps_its_density() {
    let grid = UniformGrid::new(32, 1.4).unwrap();
    let schedule = DescentSchedule {
        tol: 1e-8,
        ..DescentSchedule::default()
    };
    let gs = minimize(grid, Kernel::newtonian(), Initial::GaussianOptimum, &schedule).unwrap();
    let mut cfg = PropagatorConfig::new(0.05, 40, Kernel::newtonian());
    cfg.monitor_stride = 10;
    let traj = evolve(gs.phi0.clone(), &cfg).unwrap();
    let rho0 = gs.phi0.density();
    let rho1 = traj.final_state.density();
    let num: f64 = rho0.values().iter().zip(rho1.values()).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = rho0.values().iter().map(|a| a * a).sum();
    assert!((num / den).sqrt() < 1e-3);
    let overlap = gs.phi0.inner(&traj.final_state).unwrap();
    let t = 2.0;
    assert!((overlap.arg() + gs.epsilon * t).abs() < 2e-3 * t);
    assert!(traj.max_relative_energy_drift() < 1e-6);
}
