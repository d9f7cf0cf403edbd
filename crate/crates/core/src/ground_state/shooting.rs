//! Spherically symmetric ground state from the coupled radial ODEs
//!
//! ```text
//! φ'' + (2/r) φ' = 2 U φ,     U'' + (2/r) U' = 4π φ²,
//! ```
//!
//! where U = V − ε. With φ(0) = 1 and U'(0) = φ'(0) = 0 the only free datum is
//! U(0); it is fixed by bisection between solutions that cross zero and
//! solutions that turn upward. The scale invariance φ → λ²φ(λr) then maps the
//! unnormalized solution onto ‖φ‖ = 1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::gravity::{radial_potential, RadialProfile};

/// Normalized radial ground state and its derived quantities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShootingResult {
    pub epsilon: f64,
    /// ε read off the far-field limit of U instead of the energy integrals.
    pub epsilon_far_field: f64,
    pub energy: EnergyBreakdown,
    /// rms radius sqrt(⟨r²⟩).
    pub width: f64,
    /// φ(r) with ∫ 4π r² φ² dr = 1.
    pub profile: RadialProfile,
    pub potential: RadialProfile,
    /// Zero crossings of the returned profile.
    pub nodes: usize,
    /// Shooting parameter U(0) of the unnormalized problem per bisection step,
    /// with the outcome that decided it.
    pub trace: Vec<(f64, String)>,
}

impl ShootingResult {
    /// Reduced radial function u(r) = √(4π) r φ(r), normalized as ∫u² dr = 1.
    pub fn u(&self) -> Vec<f64> {
        let c = (4.0 * PI).sqrt();
        self.profile.r.iter().zip(&self.profile.values).map(|(r, p)| c * r * p).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    /// φ crossed zero: the guess for U(0) was too deep.
    Node,
    /// φ turned upward while still positive: too shallow.
    TurnsUp,
    /// Reached the end of the mesh undecided.
    Undecided,
}

struct Shot {
    outcome: Outcome,
    /// (φ, φ', U, U') on r = dr, 2dr, … up to where the outcome was decided.
    states: Vec<[f64; 4]>,
}

fn rhs(r: f64, y: &[f64; 4]) -> [f64; 4] {
    [
        y[1],
        2.0 * y[2] * y[0] - 2.0 * y[1] / r,
        y[3],
        4.0 * PI * y[0] * y[0] - 2.0 * y[3] / r,
    ]
}

fn shoot(u0: f64, dr: f64, steps: usize) -> Shot {
    // Series start at r = dr avoids the 1/r terms at the origin.
    let r1 = dr;
    let mut y = [
        1.0 + u0 * r1 * r1 / 3.0,
        2.0 * u0 * r1 / 3.0,
        u0 + 2.0 * PI * r1 * r1 / 3.0,
        4.0 * PI * r1 / 3.0,
    ];
    let mut states = Vec::with_capacity(steps);
    states.push(y);
    let add = |a: &[f64; 4], b: &[f64; 4], s: f64| -> [f64; 4] { std::array::from_fn(|i| a[i] + s * b[i]) };
    for i in 1..steps {
        let r = i as f64 * dr;
        let k1 = rhs(r, &y);
        let k2 = rhs(r + 0.5 * dr, &add(&y, &k1, 0.5 * dr));
        let k3 = rhs(r + 0.5 * dr, &add(&y, &k2, 0.5 * dr));
        let k4 = rhs(r + dr, &add(&y, &k3, dr));
        for j in 0..4 {
            y[j] += dr / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if !y.iter().all(|v| v.is_finite()) || y[0] <= 0.0 {
            return Shot {
                outcome: Outcome::Node,
                states,
            };
        }
        if y[1] > 0.0 {
            return Shot {
                outcome: Outcome::TurnsUp,
                states,
            };
        }
        states.push(y);
    }
    Shot {
        outcome: Outcome::Undecided,
        states,
    }
}

struct Bracketed {
    shallow: Shot,
    trace: Vec<(f64, String)>,
}

fn bisect(dr: f64, steps: usize) -> Result<Bracketed> {
    let mut trace = Vec::new();
    let mut record = |u0: f64, o: Outcome| trace.push((u0, format!("{o:?}")));
    let mut shallow = 0.0;
    let first = shoot(shallow, dr, steps);
    record(shallow, first.outcome);
    if first.outcome != Outcome::TurnsUp {
        return Err(Error::Bracketing {
            message: "U(0) = 0 should turn upward".into(),
            trace,
        });
    }
    let mut deep = -0.5;
    loop {
        let o = shoot(deep, dr, steps).outcome;
        record(deep, o);
        match o {
            Outcome::Node => break,
            Outcome::TurnsUp => {
                shallow = deep;
                deep *= 2.0;
            }
            Outcome::Undecided => {
                return Err(Error::Bracketing {
                    message: "mesh too short to classify a trial solution; increase rmax".into(),
                    trace,
                })
            }
        }
        if deep < -1e6 {
            return Err(Error::Bracketing {
                message: "no nodal solution found".into(),
                trace,
            });
        }
    }
    let mut best_shallow = first;
    for _ in 0..200 {
        let mid = 0.5 * (shallow + deep);
        if mid == shallow || mid == deep {
            break;
        }
        let shot = shoot(mid, dr, steps);
        record(mid, shot.outcome);
        match shot.outcome {
            Outcome::Node => deep = mid,
            Outcome::TurnsUp => {
                shallow = mid;
                best_shallow = shot;
            }
            Outcome::Undecided => {
                shallow = mid;
                best_shallow = shot;
                break;
            }
        }
    }
    if best_shallow.states.len() < 2 || shallow == 0.0 {
        return Err(Error::Bracketing {
            message: "bisection did not leave the initial bracket".into(),
            trace,
        });
    }
    Ok(Bracketed {
        shallow: best_shallow,
        trace,
    })
}

/// ∫₀^{r_last} 4π r² f(r) dr by the trapezoid rule, with r = 0 contributing nothing.
fn shell_integral(r: &[f64], f: &[f64]) -> f64 {
    let mut acc = 0.5 * r[0] * (r[0] * r[0] * f[0]);
    for i in 1..r.len() {
        acc += 0.5 * (r[i] - r[i - 1]) * (r[i - 1] * r[i - 1] * f[i - 1] + r[i] * r[i] * f[i]);
    }
    4.0 * PI * acc
}

fn unnormalized_norm(dr: f64, states: &[[f64; 4]]) -> f64 {
    let r: Vec<f64> = (1..=states.len()).map(|i| i as f64 * dr).collect();
    let rho: Vec<f64> = states.iter().map(|s| s[0] * s[0]).collect();
    shell_integral(&r, &rho)
}

/// Radial ground state of the Newtonian problem on `npoints` mesh points
/// covering [0, rmax] in normalized units.
///
/// The result is trustworthy when φ has decayed by many orders of magnitude
/// before `rmax`; otherwise a `Precondition` error is returned.
pub fn radial_shooting_oracle(rmax: f64, npoints: usize) -> Result<ShootingResult> {
    crate::error::ensure_positive("rmax", rmax)?;
    if npoints < 100 {
        return Err(Error::Domain(format!("npoints must be at least 100, got {npoints}")));
    }
    // First pass on an oversized mesh only to learn the length scale.
    let probe = bisect(rmax / npoints as f64, npoints)?;
    let n_probe = unnormalized_norm(rmax / npoints as f64, &probe.shallow.states);
    let dr = rmax / n_probe / npoints as f64;
    let Bracketed { shallow, trace } = bisect(dr, npoints)?;
    let states = shallow.states;

    let peak = states[0][0];
    let tail = states.last().unwrap()[0];
    if shallow.outcome == Outcome::Undecided && tail > 1e-6 * peak {
        return Err(Error::Precondition(format!(
            "profile has only decayed to {:.2e} of its peak at rmax; increase rmax",
            tail / peak
        )));
    }

    let norm = unnormalized_norm(dr, &states);
    let lambda = 1.0 / norm;
    let r: Vec<f64> = (1..=states.len()).map(|i| i as f64 * dr / lambda).collect();
    let phi: Vec<f64> = states.iter().map(|s| lambda * lambda * s[0]).collect();
    let dphi: Vec<f64> = states.iter().map(|s| lambda.powi(3) * s[1]).collect();
    let rho: Vec<f64> = phi.iter().map(|p| p * p).collect();
    let potential = radial_potential(&RadialProfile::new(r.clone(), rho.clone())?)?;

    let kinetic = 0.5 * shell_integral(&r, &dphi.iter().map(|d| d * d).collect::<Vec<_>>());
    let rho_v: Vec<f64> = rho.iter().zip(&potential.values).map(|(a, b)| a * b).collect();
    let interaction = 0.5 * shell_integral(&r, &rho_v);
    let energy = EnergyBreakdown::new(kinetic, interaction);
    let r2_rho: Vec<f64> = rho.iter().zip(&r).map(|(p, x)| p * x * x).collect();
    let width = shell_integral(&r, &r2_rho).sqrt();

    // ε = V − U at the outer end, where the potential is that of a unit point mass.
    let last = states.len() - 1;
    let epsilon_far_field = potential.values[last] - lambda * lambda * states[last][2];

    let nodes = phi.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    Ok(ShootingResult {
        epsilon: energy.eigenvalue(),
        epsilon_far_field,
        energy,
        width,
        profile: RadialProfile::new(r, phi)?,
        potential,
        nodes,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_ground_state() {
        let s = radial_shooting_oracle(60.0, 30_000).unwrap();
        assert_eq!(s.nodes, 0);
        assert!((s.energy.total + 0.0542564).abs() < 2e-6, "{:?}", s.energy);
        assert!((s.epsilon + 0.1627692).abs() < 5e-6, "{}", s.epsilon);
        assert!((s.epsilon - s.epsilon_far_field).abs() < 1e-5, "{} {}", s.epsilon, s.epsilon_far_field);
        assert!(s.energy.virial_defect() < 1e-4);
        assert!((s.width - 4.6352).abs() < 1e-3, "{}", s.width);
        let u = s.u();
        let total: f64 = u.windows(2).zip(s.profile.r.windows(2)).map(|(u, r)| 0.5 * (u[0] * u[0] + u[1] * u[1]) * (r[1] - r[0])).sum();
        assert!((total - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mesh_refinement_converges() {
        let a = radial_shooting_oracle(60.0, 10_000).unwrap();
        let b = radial_shooting_oracle(60.0, 20_000).unwrap();
        assert!((a.epsilon - b.epsilon).abs() < 1e-4);
        assert!((a.energy.total - b.energy.total).abs() < 1e-4);
    }

    #[test]
    fn short_mesh_is_rejected() {
        assert!(radial_shooting_oracle(8.0, 2_000).is_err());
        assert!(radial_shooting_oracle(60.0, 10).is_err());
    }

    #[test]
    fn lies_below_gaussian_bound() {
        let s = radial_shooting_oracle(60.0, 10_000).unwrap();
        assert!(s.energy.total < -1.0 / (6.0 * PI));
    }
}
