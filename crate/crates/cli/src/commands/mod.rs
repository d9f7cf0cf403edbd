//! The experiments, one function per subcommand.

mod dynamic;
mod stationary;

use std::path::Path;

use gravloc_core::ground_state::minimize_two_level;
use gravloc_core::{minimize, GroundStateResult, Initial, Kernel, UniformGrid};

use crate::config::ScenarioConfig;
use crate::record::{RunDir, RunRecord};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::Subcommand)]
pub enum Command {
    /// Minimize the energy and cross-check against the radial solver.
    GroundState,
    /// Propagate a Gaussian or the ground state in real time.
    Evolve,
    /// Physical ground-state width across a list of masses.
    SweepMass,
    /// Ground-state width inside a homogeneous sphere across radii.
    SweepRadius,
    /// Radius at which the self-localization width equals the body size.
    CriticalSize,
    /// Attraction between two superposed ground states.
    TwoSoliton,
    /// Galilean covariance and time reversal of the propagator.
    BoostCheck,
    /// Cross-coupling energy of a product state versus separation.
    Separability,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::GroundState,
        Command::Evolve,
        Command::SweepMass,
        Command::SweepRadius,
        Command::CriticalSize,
        Command::TwoSoliton,
        Command::BoostCheck,
        Command::Separability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::GroundState => "ground-state",
            Command::Evolve => "evolve",
            Command::SweepMass => "sweep-mass",
            Command::SweepRadius => "sweep-radius",
            Command::CriticalSize => "critical-size",
            Command::TwoSoliton => "two-soliton",
            Command::BoostCheck => "boost-check",
            Command::Separability => "separability",
        }
    }
}

/// Run one experiment into `<out>/<run id>/` and return its record.
///
/// Failures after the run directory exists leave an `error.json` there.
pub fn run(command: Command, cfg: &ScenarioConfig, out: &Path, workers: usize) -> Result<RunRecord, CliError> {
    cfg.validate()?;
    let mut dir = RunDir::create(out, command.name(), cfg)?;
    let ctx = Context { cfg, workers: workers.max(1) };
    let outcome = match command {
        Command::GroundState => stationary::ground_state(&ctx, &mut dir),
        Command::SweepMass => stationary::sweep_mass(&ctx, &mut dir),
        Command::SweepRadius => stationary::sweep_radius(&ctx, &mut dir),
        Command::CriticalSize => stationary::critical_size(&ctx, &mut dir),
        Command::Evolve => dynamic::evolve(&ctx, &mut dir),
        Command::TwoSoliton => dynamic::two_soliton(&ctx, &mut dir),
        Command::BoostCheck => dynamic::boost_check(&ctx, &mut dir),
        Command::Separability => dynamic::separability(&ctx, &mut dir),
    };
    match outcome {
        Ok(()) => dir.finish(),
        Err(e) => {
            dir.fail(&e);
            Err(e)
        }
    }
}

struct Context<'a> {
    cfg: &'a ScenarioConfig,
    workers: usize,
}

impl Context<'_> {
    fn solve(&self, grid: UniformGrid, kernel: Kernel) -> Result<GroundStateResult, CliError> {
        let schedule = self.cfg.schedule()?;
        let gs = if self.cfg.solver.two_level {
            minimize_two_level(grid, kernel, &schedule)?
        } else {
            minimize(grid, kernel, Initial::GaussianOptimum, &schedule)?
        };
        log::info!(
            "ground state on {}³ (h = {}): E = {:.9}, ε = {:.9}, width {:.6}, {} iterations",
            grid.n(),
            grid.h(),
            gs.energy.total,
            gs.epsilon,
            gs.width,
            gs.iterations
        );
        Ok(gs)
    }
}

/// Apply `f` to every item on up to `workers` threads; results keep input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut tagged: Vec<(usize, R)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= items.len() {
                            break done;
                        }
                        done.push((i, f(&items[i])));
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    tagged.sort_by_key(|(i, _)| *i);
    tagged.into_iter().map(|(_, r)| r).collect()
}

/// Metric key suffix for a sweep member, e.g. `width_cm@M=1e-3`.
fn keyed(base: &str, label: &str, value: f64) -> String {
    format!("{base}@{label}={value:e}")
}

fn relative_error(value: f64, reference: f64) -> f64 {
    (value / reference - 1.0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<u64> = (0..37).collect();
        for workers in [1, 2, 5, 64] {
            let out = parallel_map(&items, workers, |x| x * x);
            assert_eq!(out, items.iter().map(|x| x * x).collect::<Vec<_>>());
        }
        assert!(parallel_map(&Vec::<u8>::new(), 3, |x| *x).is_empty());
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), Command::ALL.len());
        assert_eq!(keyed("w", "M", 1e-3), "w@M=1e-3");
    }
}
