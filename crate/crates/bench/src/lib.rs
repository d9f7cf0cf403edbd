//! Fixtures shared by the benchmarks.

use gravloc_core::{ComplexField, UniformGrid};

/// Normalized Gaussian of density width `sigma` on an `n`³ grid spaced `h`.
pub fn gaussian(n: usize, h: f64, sigma: f64) -> ComplexField {
    let grid = UniformGrid::new(n, h).expect("valid grid");
    ComplexField::gaussian(grid, sigma, [0.0; 3]).expect("valid packet")
}

/// Gaussian carrying one momentum-lattice quantum along x.
pub fn moving_gaussian(n: usize, h: f64, sigma: f64) -> ComplexField {
    let mut psi = gaussian(n, h, sigma);
    let k = psi.grid().dk();
    psi.apply_plane_wave([k, 0.0, 0.0]);
    psi
}
