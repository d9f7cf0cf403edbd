//! Sampled wavefunctions and densities, and the observables computed from them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::LinePlans;
use crate::grid::UniformGrid;

/// Complex samples ψ(x) on a [`UniformGrid`], row-major over (x, y, z).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: UniformGrid,
    values: Vec<Complex64>,
}

/// Real samples (a density |ψ|² or a potential) on a [`UniformGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: UniformGrid,
    values: Vec<f64>,
}

impl ComplexField {
    pub fn new(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!("sample {i} of field")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts_unchecked(grid: UniformGrid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_fn(grid: UniformGrid, mut f: impl FnMut([f64; 3]) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, values)
    }

    /// Normalized Gaussian packet whose density |ψ|² has standard deviation
    /// `sigma` per axis, centred at `center`.
    pub fn gaussian(grid: UniformGrid, sigma: f64, center: [f64; 3]) -> Result<Self> {
        crate::error::ensure_positive("sigma", sigma)?;
        let amp = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.75);
        let inv = 1.0 / (4.0 * sigma * sigma);
        Self::from_fn(grid, |x| {
            let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2) + (x[2] - center[2]).powi(2);
            Complex64::new(amp * (-r2 * inv).exp(), 0.0)
        })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn density(&self) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            Some(i) => Err(Error::NonFinite(format!("sample {i} became non-finite"))),
            None => Ok(()),
        }
    }

    /// Σ|ψ|² h³.
    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    /// Copy rescaled so that `norm_squared` equals `target`.
    pub fn normalized(&self, target: f64) -> Result<Self> {
        let mut out = self.clone();
        out.normalize(target)?;
        Ok(out)
    }

    pub fn normalize(&mut self, target: f64) -> Result<()> {
        crate::error::ensure_positive("normalization target", target)?;
        let norm2 = self.norm_squared();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::DegenerateInput(format!("cannot normalize a field with norm² {norm2}")));
        }
        let c = (target / norm2).sqrt();
        for v in &mut self.values {
            *v *= c;
        }
        Ok(())
    }

    /// ⟨ψ|φ⟩ = Σ ψ* φ h³.
    pub fn inner(&self, other: &ComplexField) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    /// ‖ψ − φ‖₂ with the quadrature measure.
    pub fn l2_distance(&self, other: &ComplexField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.grid.cell_volume()).sqrt())
    }

    /// ⟨x⟩ by quadrature, normalized by the field's own norm.
    pub fn centroid(&self) -> [f64; 3] {
        moments(&self.grid, self.values.iter().map(|v| v.norm_sqr())).0
    }

    /// sqrt(⟨|x − ⟨x⟩|²⟩).
    pub fn rms_width(&self) -> f64 {
        moments(&self.grid, self.values.iter().map(|v| v.norm_sqr())).1
    }

    /// max|ψ| on the six faces of the box relative to max|ψ| overall.
    pub fn boundary_contamination(&self) -> f64 {
        let n = self.grid.n();
        let mut edge = 0.0f64;
        let mut peak = 0.0f64;
        for (i, v) in self.values.iter().enumerate() {
            let a = v.norm();
            peak = peak.max(a);
            let [ix, iy, iz] = self.grid.unravel(i);
            if ix == 0 || iy == 0 || iz == 0 || ix == n - 1 || iy == n - 1 || iz == n - 1 {
                edge = edge.max(a);
            }
        }
        if peak > 0.0 {
            edge / peak
        } else {
            0.0
        }
    }

    /// Index of the sample with the largest modulus.
    pub fn peak_index(&self) -> usize {
        let mut best = (0, -1.0);
        for (i, v) in self.values.iter().enumerate() {
            let a = v.norm_sqr();
            if a > best.1 {
                best = (i, a);
            }
        }
        best.0
    }

    /// Multiply by a global phase so the peak sample is real and positive.
    pub fn fix_global_phase(&mut self) {
        let p = self.values[self.peak_index()];
        if p.norm() > 0.0 {
            let c = p.conj() / p.norm();
            self.scale(c);
        }
    }

    /// Multiply by e^{i k·x}.
    pub fn apply_plane_wave(&mut self, k: [f64; 3]) {
        let grid = self.grid;
        for (i, v) in self.values.iter_mut().enumerate() {
            let x = grid.position(i);
            let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
            *v *= Complex64::from_polar(1.0, phase);
        }
    }
}

impl RealField {
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("real field sample".into()));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts_unchecked(grid: UniformGrid, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: UniformGrid, mut f: impl FnMut([f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// ∫ self · other.
    pub fn dot(&self, other: &RealField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume())
    }

    pub fn value_at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.values[self.grid.index(ix, iy, iz)]
    }
}

/// Centroid and rms width of a nonnegative weight distribution on `grid`.
pub(crate) fn moments(grid: &UniformGrid, weights: impl Iterator<Item = f64> + Clone) -> ([f64; 3], f64) {
    let coords = grid.coords();
    let n = grid.n();
    let mut total = 0.0;
    let mut first = [0.0; 3];
    let mut second = 0.0;
    for (i, w) in weights.enumerate() {
        let (ix, iy, iz) = (i / (n * n), (i / n) % n, i % n);
        let x = [coords[ix], coords[iy], coords[iz]];
        total += w;
        for a in 0..3 {
            first[a] += w * x[a];
        }
        second += w * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    }
    if total <= 0.0 {
        return ([0.0; 3], 0.0);
    }
    let c = [first[0] / total, first[1] / total, first[2] / total];
    let var = second / total - (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    (c, var.max(0.0).sqrt())
}

/// FFT machinery bound to one grid: spectral kinetic energy, momentum,
/// translations and resampling.
#[derive(Debug)]
pub struct Spectral {
    grid: UniformGrid,
    plans: LinePlans,
    k: Vec<f64>,
    k_odd: Vec<f64>,
    buffer: Vec<Complex64>,
}

impl Spectral {
    pub fn new(grid: UniformGrid) -> Self {
        Self {
            grid,
            plans: LinePlans::new(grid.n()),
            k: grid.wavenumbers(),
            k_odd: grid.derivative_wavenumbers(),
            buffer: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn plans(&mut self) -> &mut LinePlans {
        &mut self.plans
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.plans.forward3(data);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.plans.inverse3(data);
    }

    fn load(&mut self, psi: &ComplexField) -> Result<()> {
        self.grid.ensure_same(psi.grid())?;
        self.buffer.copy_from_slice(psi.values());
        self.plans.forward3(&mut self.buffer);
        Ok(())
    }

    /// T = ½ ∫|∇ψ|², evaluated with the Fourier multiplier |k|².
    pub fn kinetic_energy(&mut self, psi: &ComplexField) -> Result<f64> {
        self.load(psi)?;
        let n = self.grid.n();
        let mut acc = 0.0;
        for ix in 0..n {
            for iy in 0..n {
                let kxy = self.k[ix] * self.k[ix] + self.k[iy] * self.k[iy];
                let row = &self.buffer[(ix * n + iy) * n..(ix * n + iy + 1) * n];
                for (iz, v) in row.iter().enumerate() {
                    acc += (kxy + self.k[iz] * self.k[iz]) * v.norm_sqr();
                }
            }
        }
        Ok(0.5 * acc * self.grid.cell_volume() / self.grid.len() as f64)
    }

    /// ⟨−i∇⟩.
    pub fn momentum(&mut self, psi: &ComplexField) -> Result<[f64; 3]> {
        self.load(psi)?;
        let n = self.grid.n();
        let mut p = [0.0; 3];
        for (i, v) in self.buffer.iter().enumerate() {
            let w = v.norm_sqr();
            let (ix, iy, iz) = (i / (n * n), (i / n) % n, i % n);
            p[0] += self.k_odd[ix] * w;
            p[1] += self.k_odd[iy] * w;
            p[2] += self.k_odd[iz] * w;
        }
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        Ok([p[0] * scale, p[1] * scale, p[2] * scale])
    }

    /// ψ(x − r), by index roll for lattice vectors and by Fourier phase otherwise.
    pub fn translate(&mut self, psi: &ComplexField, r: [f64; 3]) -> Result<ComplexField> {
        if !self.grid.is_position_lattice(r) {
            log::warn!("translation by {r:?} is off the position lattice; using spectral interpolation");
        }
        self.shift(psi, r)
    }

    /// [`Spectral::translate`] without the off-lattice warning.
    pub(crate) fn shift(&mut self, psi: &ComplexField, r: [f64; 3]) -> Result<ComplexField> {
        self.grid.ensure_same(psi.grid())?;
        let n = self.grid.n();
        if self.grid.is_position_lattice(r) {
            let shift: Vec<usize> = r
                .iter()
                .map(|c| ((c / self.grid.h()).round() as i64).rem_euclid(n as i64) as usize)
                .collect();
            let mut out = vec![Complex64::default(); psi.values().len()];
            for (i, v) in psi.values().iter().enumerate() {
                let [ix, iy, iz] = self.grid.unravel(i);
                let j = self.grid.index((ix + shift[0]) % n, (iy + shift[1]) % n, (iz + shift[2]) % n);
                out[j] = *v;
            }
            return Ok(ComplexField::from_parts_unchecked(self.grid, out));
        }
        self.load(psi)?;
        let half = n / 2;
        // Per-axis phase factors; the Nyquist bin takes the real average of ±k.
        let factor = |axis: usize, i: usize, k: &[f64]| -> Complex64 {
            if i == half {
                Complex64::new((k[i] * r[axis]).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -k[i] * r[axis])
            }
        };
        let fx: Vec<Complex64> = (0..n).map(|i| factor(0, i, &self.k)).collect();
        let fy: Vec<Complex64> = (0..n).map(|i| factor(1, i, &self.k)).collect();
        let fz: Vec<Complex64> = (0..n).map(|i| factor(2, i, &self.k)).collect();
        for ix in 0..n {
            for iy in 0..n {
                let fxy = fx[ix] * fy[iy];
                let base = (ix * n + iy) * n;
                for iz in 0..n {
                    self.buffer[base + iz] *= fxy * fz[iz];
                }
            }
        }
        self.plans.inverse3(&mut self.buffer);
        Ok(ComplexField::from_parts_unchecked(self.grid, self.buffer.clone()))
    }

    /// Apply the diagonal Fourier multiplier `m(k)` (given in storage order) to `psi` in place.
    pub fn apply_multiplier(&mut self, psi: &mut ComplexField, multiplier: &[Complex64]) -> Result<()> {
        self.grid.ensure_same(psi.grid())?;
        let values = psi.values_mut();
        self.plans.forward3(values);
        for (v, m) in values.iter_mut().zip(multiplier) {
            *v *= m;
        }
        self.plans.inverse3(values);
        Ok(())
    }
}

/// Band-limited interpolation of `psi` onto a grid with the same extent and `n` points per axis.
pub fn resample(psi: &ComplexField, n: usize) -> Result<ComplexField> {
    let src = *psi.grid();
    let dst = UniformGrid::new(n, src.extent() / n as f64)?;
    let m = src.n();
    let mut spec = psi.values().to_vec();
    LinePlans::new(m).forward3(&mut spec);
    let keep = m.min(n) / 2;
    // signed frequency -> index on a grid of size `size`
    let slot = |f: i64, size: usize| -> usize { f.rem_euclid(size as i64) as usize };
    let mut out = vec![Complex64::default(); dst.len()];
    let freqs: Vec<i64> = (-(keep as i64) + 1..keep as i64).collect();
    for &fx in &freqs {
        for &fy in &freqs {
            for &fz in &freqs {
                let s = (slot(fx, m) * m + slot(fy, m)) * m + slot(fz, m);
                let d = (slot(fx, n) * n + slot(fy, n)) * n + slot(fz, n);
                out[d] = spec[s];
            }
        }
    }
    let scale = (n as f64 / m as f64).powi(3);
    LinePlans::new(n).inverse3(&mut out);
    for v in &mut out {
        *v *= scale;
    }
    ComplexField::new(dst, out)
}

pub fn norm_squared(psi: &ComplexField) -> f64 {
    psi.norm_squared()
}

pub fn normalize(psi: &ComplexField, target: f64) -> Result<ComplexField> {
    psi.normalized(target)
}

pub fn momentum_expectation(psi: &ComplexField) -> [f64; 3] {
    Spectral::new(*psi.grid())
        .momentum(psi)
        .expect("spectral helper built on the field's own grid")
}

pub fn centroid(psi: &ComplexField) -> [f64; 3] {
    psi.centroid()
}

pub fn rms_width(psi: &ComplexField) -> f64 {
    psi.rms_width()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(n: usize, h: f64) -> UniformGrid {
        UniformGrid::new(n, h).unwrap()
    }

    #[test]
    fn zero_field_has_zero_norm_and_cannot_normalize() {
        let psi = ComplexField::zeros(grid(8, 1.0));
        assert_eq!(psi.norm_squared(), 0.0);
        assert!(matches!(psi.normalized(1.0), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let g = grid(8, 1.0);
        let mut v = vec![Complex64::default(); g.len()];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(ComplexField::new(g, v), Err(Error::NonFinite(_))));
    }

    #[test]
    fn sampled_gaussian_norm() {
        // density σ = 8h on a box of 128h = 16σ
        let h = 0.25;
        let psi = ComplexField::gaussian(grid(128, h), 8.0 * h, [0.0; 3]).unwrap();
        assert!((psi.norm_squared() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn normalize_halves_samples() {
        let g = grid(8, 1.0);
        let mut psi = ComplexField::from_fn(g, |_| Complex64::new(0.0, 2.0 / (g.len() as f64).sqrt())).unwrap();
        assert_relative_eq!(psi.norm_squared(), 4.0, max_relative = 1e-14);
        let before = psi.values()[5];
        psi.normalize(1.0).unwrap();
        assert_relative_eq!((psi.values()[5] / before).re, 0.5, max_relative = 1e-14);
        let half = psi.normalized(0.5).unwrap();
        assert!((half.norm_squared() - 0.5).abs() < 1e-12);
        let twice = psi.normalized(1.0).unwrap().normalized(1.0).unwrap();
        assert!(twice.l2_distance(&psi.normalized(1.0).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn real_field_carries_no_momentum() {
        let psi = ComplexField::gaussian(grid(32, 0.5), 1.5, [0.3, -0.2, 0.1]).unwrap();
        let p = momentum_expectation(&psi);
        assert!(p.iter().all(|c| c.abs() < 1e-12), "{p:?}");
    }

    #[test]
    fn plane_wave_momentum() {
        let g = grid(32, 0.5);
        let k = [3.0 * g.dk(), -2.0 * g.dk(), g.dk()];
        let mut psi = ComplexField::gaussian(g, 1.0, [0.0; 3]).unwrap();
        psi.apply_plane_wave(k);
        let p = momentum_expectation(&psi);
        for a in 0..3 {
            assert!((p[a] - k[a]).abs() < 1e-10, "{p:?} vs {k:?}");
        }
    }

    #[test]
    fn gaussian_moments() {
        let sigma = 1.2;
        let psi = ComplexField::gaussian(grid(64, 0.4), sigma, [0.0; 3]).unwrap();
        let c = psi.centroid();
        assert!(c.iter().all(|v| v.abs() < 1e-12));
        assert_relative_eq!(psi.rms_width(), 3f64.sqrt() * sigma, max_relative = 1e-3);
    }

    #[test]
    fn symmetric_lobes_centroid() {
        let g = grid(64, 0.5);
        let a = ComplexField::gaussian(g, 1.0, [-4.0, 0.0, 0.0]).unwrap();
        let b = ComplexField::gaussian(g, 1.0, [4.0, 0.0, 0.0]).unwrap();
        let v: Vec<Complex64> = a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect();
        let psi = ComplexField::new(g, v).unwrap().normalized(1.0).unwrap();
        assert!(psi.centroid().iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn kinetic_energy_of_gaussian() {
        // ψ ∝ exp(−r²/4σ²) has ⟨k²⟩ = 3/(4σ²), so T = 3/(8σ²)
        let sigma = 1.1;
        let g = grid(64, 0.3);
        let psi = ComplexField::gaussian(g, sigma, [0.0; 3]).unwrap();
        let t = Spectral::new(g).kinetic_energy(&psi).unwrap();
        assert_relative_eq!(t, 3.0 / (8.0 * sigma * sigma), max_relative = 1e-10);
    }

    #[test]
    fn parseval_against_finite_differences() {
        let g = grid(64, 0.2);
        let mut psi = ComplexField::gaussian(g, 1.0, [0.1, 0.0, -0.2]).unwrap();
        psi.apply_plane_wave([g.dk(), 0.0, 0.0]);
        let spectral = Spectral::new(g).kinetic_energy(&psi).unwrap();
        let n = g.n();
        let v = psi.values();
        let mut acc = 0.0;
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let dx = (v[g.index((ix + 1) % n, iy, iz)] - v[g.index((ix + n - 1) % n, iy, iz)]) / (2.0 * g.h());
                    let dy = (v[g.index(ix, (iy + 1) % n, iz)] - v[g.index(ix, (iy + n - 1) % n, iz)]) / (2.0 * g.h());
                    let dz = (v[g.index(ix, iy, (iz + 1) % n)] - v[g.index(ix, iy, (iz + n - 1) % n)]) / (2.0 * g.h());
                    acc += dx.norm_sqr() + dy.norm_sqr() + dz.norm_sqr();
                }
            }
        }
        let fd = 0.5 * acc * g.cell_volume();
        // central differences are O(h²)
        assert!((fd - spectral).abs() / spectral < 2.0 * g.h() * g.h(), "fd {fd} spectral {spectral}");
    }

    #[test]
    fn norm_equals_zero_frequency_coefficient() {
        let g = grid(32, 0.4);
        let mut psi = ComplexField::gaussian(g, 1.3, [0.5, 0.0, 0.0]).unwrap();
        psi.apply_plane_wave([0.0, g.dk(), 0.0]);
        let mut dens: Vec<Complex64> = psi.values().iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
        LinePlans::new(g.n()).forward3(&mut dens);
        // zero-frequency Fourier coefficient (mean) times extent³
        let c0 = dens[0].re / g.len() as f64 * g.extent().powi(3);
        assert!((c0 - psi.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn lattice_translation_is_exact() {
        let g = grid(64, 0.5);
        let psi = ComplexField::gaussian(g, 1.0, [0.0; 3]).unwrap();
        let mut sp = Spectral::new(g);
        let r = [1.0, -1.5, 0.5];
        let moved = sp.translate(&psi, r).unwrap();
        let c = moved.centroid();
        for a in 0..3 {
            assert!((c[a] - r[a]).abs() < 1e-12);
        }
        assert!((moved.norm_squared() - psi.norm_squared()).abs() < 1e-12);
        assert!((moved.rms_width() - psi.rms_width()).abs() < 1e-12);
        let t0 = sp.kinetic_energy(&psi).unwrap();
        let t1 = sp.kinetic_energy(&moved).unwrap();
        assert!((t0 - t1).abs() < 1e-12);
    }

    #[test]
    fn fractional_translation_matches_analytic() {
        let g = grid(64, 0.5);
        let psi = ComplexField::gaussian(g, 1.0, [0.0; 3]).unwrap();
        let r = [0.3, -0.17, 0.05];
        let moved = Spectral::new(g).translate(&psi, r).unwrap();
        let exact = ComplexField::gaussian(g, 1.0, r).unwrap();
        assert!(moved.l2_distance(&exact).unwrap() < 1e-10);
    }

    #[test]
    fn resample_preserves_smooth_field() {
        let coarse = ComplexField::gaussian(grid(32, 1.0), 1.5, [0.2, 0.0, 0.0]).unwrap();
        let fine = resample(&coarse, 64).unwrap();
        let exact = ComplexField::gaussian(*fine.grid(), 1.5, [0.2, 0.0, 0.0]).unwrap();
        assert!(fine.l2_distance(&exact).unwrap() < 1e-6);
        let back = resample(&fine, 32).unwrap();
        assert!(back.l2_distance(&coarse).unwrap() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn norm_is_quadratic(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let psi = ComplexField::gaussian(grid(16, 0.6), 1.0, [0.0; 3]).unwrap();
            let c = Complex64::new(re, im);
            let mut scaled = psi.clone();
            scaled.scale(c);
            let expected = psi.norm_squared() * c.norm_sqr();
            prop_assert!((scaled.norm_squared() - expected).abs() <= 1e-12 * (1.0 + expected));
        }
    }
}
