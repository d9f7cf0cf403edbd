use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cubic grid of `n` points per axis with spacing `h`, centred on the origin.
///
/// Index `i` on any axis sits at `(i − n/2)·h`. Samples are stored row-major
/// over (x, y, z), so z is the fastest-varying index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    n: usize,
    h: f64,
}

impl UniformGrid {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Domain(format!("grid size must be a power of two >= 8, got {n}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Domain(format!("grid spacing must be positive, got {h}")));
        }
        Ok(Self { n, h })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn extent(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.h
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let [ix, iy, iz] = self.unravel(idx);
        [self.coord(ix), self.coord(iy), self.coord(iz)]
    }

    /// Lattice spacing of the momentum grid, 2π/extent.
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.extent()
    }

    /// Angular wavenumber of FFT bin `i` (standard ordering; the Nyquist bin is −π/h).
    pub fn wavenumber(&self, i: usize) -> f64 {
        let half = self.n / 2;
        let m = if i < half { i as f64 } else { i as f64 - self.n as f64 };
        m * self.dk()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// Wavenumbers for odd (first-derivative) multipliers: the Nyquist bin is zeroed.
    pub fn derivative_wavenumbers(&self) -> Vec<f64> {
        let mut k = self.wavenumbers();
        k[self.n / 2] = 0.0;
        k
    }

    /// |k|² for every bin in storage order.
    pub fn k_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        let k2: Vec<f64> = k.iter().map(|v| v * v).collect();
        let mut out = Vec::with_capacity(self.len());
        for &kx in &k2 {
            for &ky in &k2 {
                for &kz in &k2 {
                    out.push(kx + ky + kz);
                }
            }
        }
        out
    }

    pub fn same_as(&self, other: &UniformGrid) -> bool {
        self.n == other.n && self.h.to_bits() == other.h.to_bits()
    }

    pub(crate) fn ensure_same(&self, other: &UniformGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "({}, h={}) vs ({}, h={})",
                self.n, self.h, other.n, other.h
            )))
        }
    }

    /// Whether `v` is an integer multiple of 2π/extent on every axis.
    pub fn is_momentum_lattice(&self, v: [f64; 3]) -> bool {
        v.iter().all(|&c| {
            let m = c / self.dk();
            (m - m.round()).abs() < 1e-9
        })
    }

    pub fn is_position_lattice(&self, r: [f64; 3]) -> bool {
        r.iter().all(|&c| {
            let m = c / self.h;
            (m - m.round()).abs() < 1e-9
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(UniformGrid::new(4, 1.0).is_err());
        assert!(UniformGrid::new(24, 1.0).is_err());
        assert!(UniformGrid::new(16, 0.0).is_err());
        assert!(UniformGrid::new(16, 0.5).is_ok());
    }

    #[test]
    fn coordinates_centred() {
        let g = UniformGrid::new(8, 0.5).unwrap();
        assert_eq!(g.coord(4), 0.0);
        assert_eq!(g.coord(0), -2.0);
        assert_eq!(g.extent(), 4.0);
        let idx = g.index(1, 2, 3);
        assert_eq!(g.unravel(idx), [1, 2, 3]);
    }

    #[test]
    fn wavenumber_ordering() {
        let g = UniformGrid::new(8, 1.0).unwrap();
        let dk = g.dk();
        assert_eq!(g.wavenumber(1), dk);
        assert_eq!(g.wavenumber(4), -4.0 * dk);
        assert_eq!(g.wavenumber(7), -dk);
        assert_eq!(g.derivative_wavenumbers()[4], 0.0);
        assert!(g.is_momentum_lattice([dk, -2.0 * dk, 0.0]));
        assert!(!g.is_momentum_lattice([0.5 * dk, 0.0, 0.0]));
    }
}
