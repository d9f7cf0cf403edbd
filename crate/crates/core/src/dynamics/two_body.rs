//! Two-lobe states, their mutual attraction, and the interaction energy of
//! two separated factors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::fft::LinePlans;
use crate::field::{ComplexField, Spectral};
use crate::gravity::singular_cell_constant;

/// Smallest separation accepted by [`two_soliton_prepare`], in rms widths of φ₀.
pub const MIN_SEPARATION_WIDTHS: f64 = 6.0;
/// Largest overlap ⟨φ(x − d/2)|φ(x + d/2)⟩ accepted by [`two_soliton_prepare`].
pub const MAX_LOBE_OVERLAP: f64 = 0.5;

/// Half-space masses and centroids on either side of the plane through the
/// global centroid, perpendicular to the tracking axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LobeRecord {
    pub left_mass: f64,
    pub left_centroid: [f64; 3],
    pub right_mass: f64,
    pub right_centroid: [f64; 3],
    /// (right − left centroid) projected on the axis.
    pub separation: f64,
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / len, v[1] / len, v[2] / len]
}

/// Split |ψ|² by the plane through its centroid normal to `axis`; samples on the
/// plane count half to each side.
pub fn lobe_record(psi: &ComplexField, axis: [f64; 3]) -> LobeRecord {
    let grid = *psi.grid();
    let n = unit(axis);
    let c = psi.centroid();
    let tol = 1e-9 * grid.h();
    let mut mass = [0.0; 2];
    let mut first = [[0.0; 3]; 2];
    for (i, v) in psi.values().iter().enumerate() {
        let x = grid.position(i);
        let rho = v.norm_sqr();
        let side = (x[0] - c[0]) * n[0] + (x[1] - c[1]) * n[1] + (x[2] - c[2]) * n[2];
        let weights = if side < -tol {
            [1.0, 0.0]
        } else if side > tol {
            [0.0, 1.0]
        } else {
            [0.5, 0.5]
        };
        for s in 0..2 {
            let w = weights[s] * rho;
            mass[s] += w;
            for a in 0..3 {
                first[s][a] += w * x[a];
            }
        }
    }
    let dv = grid.cell_volume();
    let centroid = |s: usize| -> [f64; 3] {
        if mass[s] > 0.0 {
            [first[s][0] / mass[s], first[s][1] / mass[s], first[s][2] / mass[s]]
        } else {
            c
        }
    };
    let (l, r) = (centroid(0), centroid(1));
    LobeRecord {
        left_mass: mass[0] * dv,
        left_centroid: l,
        right_mass: mass[1] * dv,
        right_centroid: r,
        separation: (r[0] - l[0]) * n[0] + (r[1] - l[1]) * n[1] + (r[2] - l[2]) * n[2],
    }
}

/// N·[φ₀(x − d/2) + φ₀(x + d/2)] with N fixing ‖ψ‖² = 1.
///
/// `phi0` should be centred on the origin and `d/2` should be a lattice
/// vector for an exact mirror-symmetric result.
pub fn two_soliton_prepare(phi0: &ComplexField, d: [f64; 3]) -> Result<ComplexField> {
    let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let min = MIN_SEPARATION_WIDTHS * phi0.rms_width();
    if !(dist >= min) {
        return Err(Error::Precondition(format!(
            "separation {dist} is below {MIN_SEPARATION_WIDTHS} widths ({min:.3})"
        )));
    }
    let half = [d[0] / 2.0, d[1] / 2.0, d[2] / 2.0];
    let minus = [-half[0], -half[1], -half[2]];
    let grid = *phi0.grid();
    if dist / 2.0 > 0.5 * grid.extent() {
        return Err(Error::Precondition("lobes would sit outside the box".into()));
    }
    let mut spectral = Spectral::new(grid);
    let base = phi0.normalized(1.0)?;
    let a = spectral.translate(&base, half)?;
    let b = spectral.translate(&base, minus)?;
    let overlap = a.inner(&b)?.norm();
    if overlap > MAX_LOBE_OVERLAP {
        return Err(Error::Precondition(format!(
            "lobes overlap by {overlap:.3} (limit {MAX_LOBE_OVERLAP})"
        )));
    }
    let values = a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect();
    ComplexField::new(grid, values)?.normalized(1.0)
}

/// Relative acceleration of the two lobes and its two-body prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobeAcceleration {
    pub times: Vec<f64>,
    pub separation: Vec<f64>,
    /// −d̈ by central second differences, at `times[1..len−1]`.
    pub a_rel_fd: Vec<f64>,
    /// −2× the quadratic coefficient of a least-squares fit d(t) ≈ d₀ + v t − ½ a t² over the fit window.
    pub a_rel_fit: f64,
    /// 1/d₀² for unit total mass.
    pub a_rel_predicted: f64,
    pub fit_window: f64,
    /// First sample time at which the lobes are less than two widths apart.
    pub merge_time: Option<f64>,
}

/// Measure the early attraction of the lobes of a tracked two-soliton run.
///
/// Samples later than `fit_window` or after a merger (separation below
/// `2·lobe_width`) are excluded from the fit.
pub fn lobe_acceleration(traj: &Trajectory, fit_window: f64, lobe_width: f64) -> Result<LobeAcceleration> {
    let mut times = Vec::new();
    let mut separation = Vec::new();
    let mut merge_time = None;
    for s in &traj.samples {
        let Some(l) = s.lobes else {
            return Err(Error::Precondition("trajectory has no lobe records".into()));
        };
        if l.separation < 2.0 * lobe_width {
            merge_time = Some(s.t);
            break;
        }
        times.push(s.t);
        separation.push(l.separation);
    }
    if times.len() < 3 {
        return Err(Error::Precondition("fewer than three samples before merger".into()));
    }
    let a_rel_fd = (1..times.len() - 1)
        .map(|i| {
            let h1 = times[i] - times[i - 1];
            let h2 = times[i + 1] - times[i];
            let d2 = 2.0 * (separation[i + 1] * h1 - separation[i] * (h1 + h2) + separation[i - 1] * h2)
                / (h1 * h2 * (h1 + h2));
            -d2
        })
        .collect();
    let window: Vec<usize> = (0..times.len()).filter(|&i| times[i] <= fit_window + 1e-12).collect();
    if window.len() < 3 {
        return Err(Error::Precondition("fit window holds fewer than three samples".into()));
    }
    let coef = quadratic_fit(
        &window.iter().map(|&i| times[i]).collect::<Vec<_>>(),
        &window.iter().map(|&i| separation[i]).collect::<Vec<_>>(),
    )?;
    let d0 = separation[0];
    Ok(LobeAcceleration {
        a_rel_fit: -2.0 * coef[2],
        a_rel_predicted: 1.0 / (d0 * d0),
        times,
        separation,
        a_rel_fd,
        fit_window,
        merge_time,
    })
}

/// Least squares y ≈ c₀ + c₁t + c₂t² on t scaled to [0, 1].
fn quadratic_fit(t: &[f64], y: &[f64]) -> Result<[f64; 3]> {
    let t0 = t[0];
    let span = t[t.len() - 1] - t0;
    if !(span > 0.0) {
        return Err(Error::DegenerateInput("fit window has zero length".into()));
    }
    let mut m = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let s = (ti - t0) / span;
        let basis = [1.0, s, s * s];
        for r in 0..3 {
            b[r] += basis[r] * yi;
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
        }
    }
    let c = solve3(m, b).ok_or_else(|| Error::DegenerateInput("singular fit".into()))?;
    // back to unscaled t measured from t0
    let c1 = c[1] / span;
    let c2 = c[2] / (span * span);
    Ok([c[0] - c1 * t0 + c2 * t0 * t0, c1 - 2.0 * c2 * t0, c2])
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

/// Interaction of two factors of a product state whose centres sit `d` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCoupling {
    /// −m_A m_B ∫∫ ρ_A(x) ρ_B(x′ − d) / |x − x′|.
    pub cross_energy: f64,
    /// m² W[ψ] for each factor.
    pub self_energies: [f64; 2],
    /// −∂(cross energy)/∂d: the pull on factor B, pointing back toward A.
    pub force_on_b: [f64; 3],
}

/// Cross-coupling energy of two normalized factors on a common grid.
///
/// The overlap function C(u) = ∫ρ_A(y + u)ρ_B(y)dy is obtained on all lattice
/// lags by a zero-padded FFT correlation, and then summed against the
/// Newtonian kernel displaced by `d`, so `d` may exceed the box size.
pub fn cross_coupling(
    psi_a: &ComplexField,
    psi_b: &ComplexField,
    m_a: f64,
    m_b: f64,
    d: [f64; 3],
) -> Result<CrossCoupling> {
    let grid = *psi_a.grid();
    grid.ensure_same(psi_b.grid())?;
    for (name, m) in [("m_a", m_a), ("m_b", m_b)] {
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::Domain(format!("{name} must be a nonnegative mass fraction, got {m}")));
        }
    }
    for psi in [psi_a, psi_b] {
        let n2 = psi.norm_squared();
        if (n2 - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition(format!("factor has norm² {n2}, expected 1")));
        }
    }
    let self_a = crate::energy::energy_breakdown(psi_a, &crate::gravity::Kernel::newtonian())?.interaction;
    let self_b = crate::energy::energy_breakdown(psi_b, &crate::gravity::Kernel::newtonian())?.interaction;
    let self_energies = [m_a * m_a * self_a, m_b * m_b * self_b];
    if m_a == 0.0 || m_b == 0.0 {
        return Ok(CrossCoupling {
            cross_energy: 0.0,
            self_energies,
            force_on_b: [0.0; 3],
        });
    }

    let n = grid.n();
    let p = 2 * n;
    let mut a = vec![Complex64::default(); p * p * p];
    let mut b = vec![Complex64::default(); p * p * p];
    for (i, (va, vb)) in psi_a.values().iter().zip(psi_b.values()).enumerate() {
        let [ix, iy, iz] = grid.unravel(i);
        let j = (ix * p + iy) * p + iz;
        a[j] = Complex64::new(va.norm_sqr(), 0.0);
        b[j] = Complex64::new(vb.norm_sqr(), 0.0);
    }
    let mut plans = LinePlans::new(p);
    plans.forward3(&mut a);
    plans.forward3(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y.conj();
    }
    drop(b);
    plans.inverse3(&mut a);

    let h = grid.h();
    let dv = grid.cell_volume();
    let c0 = singular_cell_constant() / h;
    let lag = |i: usize| -> f64 { if i < n { i as f64 * h } else { (i as f64 - p as f64) * h } };
    let mut energy = 0.0;
    let mut force = [0.0; 3];
    for ix in 0..p {
        let ux = lag(ix) - d[0];
        for iy in 0..p {
            let uy = lag(iy) - d[1];
            for iz in 0..p {
                let uz = lag(iz) - d[2];
                let c = a[(ix * p + iy) * p + iz].re;
                let r2 = ux * ux + uy * uy + uz * uz;
                if r2 < 1e-24 * h * h {
                    energy += c * c0;
                    continue;
                }
                let inv = 1.0 / r2.sqrt();
                energy += c * inv;
                let f = c * inv * inv * inv;
                force[0] += f * ux;
                force[1] += f * uy;
                force[2] += f * uz;
            }
        }
    }
    // correlation sums carry one cell volume each
    let scale = -m_a * m_b * dv * dv;
    Ok(CrossCoupling {
        cross_energy: scale * energy,
        self_energies,
        // ∂/∂d of 1/|u − d| is (u − d)/|u − d|³, so −∂E/∂d = −scale·Σ c (u − d)/|u − d|³
        force_on_b: [-scale * force[0], -scale * force[1], -scale * force[2]],
    })
}
