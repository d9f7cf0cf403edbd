//! Ground states, dynamics and scaling laws for the Schrödinger equation with a
//! Newtonian self-interaction,
//!
//! ```text
//! i ∂ψ/∂τ = −½ Δψ − (|ψ|² ∗ 1/r) ψ,
//! ```
//!
//! written in units where ħ = G = M = 1 (see [`units`]).

pub mod dynamics;
pub mod energy;
pub mod error;
pub mod fft;
pub mod field;
pub mod gravity;
pub mod grid;
pub mod ground_state;
pub mod snwf;
pub mod units;

pub use dynamics::{boost, cross_coupling, evolve, galilean_transform, lobe_acceleration, two_soliton_prepare, PropagatorConfig, Trajectory};
pub use energy::{energy_breakdown, eigenvalue, EnergyBreakdown, Hamiltonian};
pub use error::{Error, Result};
pub use field::{ComplexField, RealField, Spectral};
pub use gravity::{radial_potential, solve_potential, sphere_kernel_value, Kernel, KernelVariant, PotentialSolver, RadialProfile};
pub use grid::UniformGrid;
pub use ground_state::{gaussian_variational, minimize, radial_shooting_oracle, DescentSchedule, GroundStateResult, Initial};
pub use snwf::Snapshot;
pub use units::{PhysicalParams, ScalingMap};
