//! Free-space convolution by zero-padding to (2n)³.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::fft::LinePlans;
use crate::grid::UniformGrid;

/// Weight c₀ for the singular cell of the sampled 1/r kernel: the origin sample
/// is −c₀/h.
///
/// c₀ is minus the regularized lattice sum Σ'_{j∈ℤ³} 1/|j|, evaluated by Ewald
/// splitting. With this weight the punctured midpoint rule for ∫ρ/|x − x′| is
/// exact through O(h²) for smooth densities; the mean of 1/r over one cell
/// (≈ 2.3801) leaves an O(h²) error.
pub fn singular_cell_constant() -> f64 {
    static C0: OnceLock<f64> = OnceLock::new();
    *C0.get_or_init(|| -ewald_lattice_sum(1.5, 6))
}

fn ewald_lattice_sum(alpha: f64, reach: i64) -> f64 {
    use std::f64::consts::PI;
    let mut real = 0.0;
    let mut recip = 0.0;
    for i in -reach..=reach {
        for j in -reach..=reach {
            for k in -reach..=reach {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                let r2 = (i * i + j * j + k * k) as f64;
                let r = r2.sqrt();
                real += erfc(alpha * r) / r;
                recip += (-PI * PI * r2 / (alpha * alpha)).exp() / (PI * r2);
            }
        }
    }
    real + recip - 2.0 * alpha / PI.sqrt() - PI / (alpha * alpha)
}

/// Complementary error function: power series below 2, continued fraction above.
fn erfc(x: f64) -> f64 {
    if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/√π Σ (−1)ⁿ x^{2n+1} / (n! (2n+1))
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for n in 1..200 {
        term *= -x2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    2.0 / std::f64::consts::PI.sqrt() * sum
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = exp(−x²)/√π · 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
    let mut f = x;
    for k in (1..80).rev() {
        f = x + (k as f64 / 2.0) / f;
    }
    (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
}

pub(crate) struct HockneyEngine {
    n: usize,
    plans: LinePlans,
    /// Transformed padded kernel times h³/(2n)³.
    kernel_hat: Vec<f64>,
    work: Vec<Complex64>,
}

impl std::fmt::Debug for HockneyEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HockneyEngine").field("n", &self.n).finish()
    }
}

impl HockneyEngine {
    /// `kernel(s)` is the kernel at separation s > 0; `origin` its regularized value at 0.
    pub(crate) fn new(grid: &UniformGrid, kernel: impl Fn(f64) -> f64, origin: f64) -> Self {
        let n = grid.n();
        let big = 2 * n;
        let h = grid.h();
        let signed = |i: usize| -> f64 {
            if i <= n {
                i as f64
            } else {
                i as f64 - big as f64
            }
        };
        let mut work = vec![Complex64::default(); big * big * big];
        for ix in 0..big {
            let dx = signed(ix);
            for iy in 0..big {
                let dy = signed(iy);
                let base = (ix * big + iy) * big;
                for iz in 0..big {
                    let dz = signed(iz);
                    let s2 = dx * dx + dy * dy + dz * dz;
                    let value = if s2 == 0.0 { origin } else { kernel(h * s2.sqrt()) };
                    work[base + iz] = Complex64::new(value, 0.0);
                }
            }
        }
        let mut plans = LinePlans::new(big);
        plans.forward3(&mut work);
        let scale = grid.cell_volume() / (big * big * big) as f64;
        let kernel_hat = work.iter().map(|v| v.re * scale).collect();
        Self {
            n,
            plans,
            kernel_hat,
            work,
        }
    }

    /// out(x) = Σ_{x′} K(x − x′) ρ(x′) h³ for every x in the box.
    pub(crate) fn convolve(&mut self, density: &[f64], out: &mut [f64]) {
        let n = self.n;
        let big = 2 * n;
        self.work.fill(Complex64::default());
        for ix in 0..n {
            for iy in 0..n {
                let src = &density[(ix * n + iy) * n..(ix * n + iy + 1) * n];
                let dst = &mut self.work[(ix * big + iy) * big..(ix * big + iy) * big + n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = Complex64::new(*s, 0.0);
                }
            }
        }
        self.plans.forward3_octant(&mut self.work, n);
        for (w, k) in self.work.iter_mut().zip(&self.kernel_hat) {
            *w *= *k;
        }
        self.plans.inverse3_octant(&mut self.work, n);
        for ix in 0..n {
            for iy in 0..n {
                let src = &self.work[(ix * big + iy) * big..(ix * big + iy) * big + n];
                let dst = &mut out[(ix * n + iy) * n..(ix * n + iy + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = s.re;
                }
            }
        }
    }
}
