//! Line-by-line 3-D FFTs over row-major cubes, including the pruned
//! transforms used by the zero-padded convolution.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Forward/inverse plans for one line length plus scratch space.
pub struct LinePlans {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    lines: Vec<Complex64>,
}

impl std::fmt::Debug for LinePlans {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinePlans").field("len", &self.len).finish()
    }
}

impl LinePlans {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            len,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            lines: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized transform along `axis` of a cube with side `self.len()`,
    /// restricted to lines whose other two indices fall in `outer` and `inner`.
    ///
    /// For `Axis::Z`, `outer` ranges over x and `inner` over y; for `Axis::Y`,
    /// `outer` is x and `inner` is z; for `Axis::X`, `outer` is y and `inner` is z.
    pub fn transform_axis(
        &mut self,
        data: &mut [Complex64],
        axis: Axis,
        outer: Range<usize>,
        inner: Range<usize>,
        inverse: bool,
    ) {
        let n = self.len;
        debug_assert_eq!(data.len(), n * n * n);
        let plan = if inverse { &self.inverse } else { &self.forward };
        if outer.is_empty() || inner.is_empty() {
            return;
        }
        match axis {
            Axis::Z => {
                for ix in outer {
                    let start = (ix * n + inner.start) * n;
                    let end = (ix * n + inner.end) * n;
                    plan.process_with_scratch(&mut data[start..end], &mut self.scratch);
                }
            }
            Axis::Y => {
                let width = inner.len();
                self.lines.resize(width * n, Complex64::default());
                for ix in outer {
                    let plane = &mut data[ix * n * n..(ix + 1) * n * n];
                    for iy in 0..n {
                        let row = &plane[iy * n + inner.start..iy * n + inner.end];
                        for (j, v) in row.iter().enumerate() {
                            self.lines[j * n + iy] = *v;
                        }
                    }
                    plan.process_with_scratch(&mut self.lines, &mut self.scratch);
                    for iy in 0..n {
                        let row = &mut plane[iy * n + inner.start..iy * n + inner.end];
                        for (j, v) in row.iter_mut().enumerate() {
                            *v = self.lines[j * n + iy];
                        }
                    }
                }
            }
            Axis::X => {
                let width = inner.len();
                self.lines.resize(width * n, Complex64::default());
                for iy in outer {
                    for ix in 0..n {
                        let base = (ix * n + iy) * n;
                        let row = &data[base + inner.start..base + inner.end];
                        for (j, v) in row.iter().enumerate() {
                            self.lines[j * n + ix] = *v;
                        }
                    }
                    plan.process_with_scratch(&mut self.lines, &mut self.scratch);
                    for ix in 0..n {
                        let base = (ix * n + iy) * n;
                        let row = &mut data[base + inner.start..base + inner.end];
                        for (j, v) in row.iter_mut().enumerate() {
                            *v = self.lines[j * n + ix];
                        }
                    }
                }
            }
        }
    }

    /// Full unnormalized forward 3-D transform.
    pub fn forward3(&mut self, data: &mut [Complex64]) {
        let n = self.len;
        self.transform_axis(data, Axis::Z, 0..n, 0..n, false);
        self.transform_axis(data, Axis::Y, 0..n, 0..n, false);
        self.transform_axis(data, Axis::X, 0..n, 0..n, false);
    }

    /// Full inverse 3-D transform, normalized by 1/n³.
    pub fn inverse3(&mut self, data: &mut [Complex64]) {
        let n = self.len;
        self.transform_axis(data, Axis::X, 0..n, 0..n, true);
        self.transform_axis(data, Axis::Y, 0..n, 0..n, true);
        self.transform_axis(data, Axis::Z, 0..n, 0..n, true);
        let scale = 1.0 / (n * n * n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Forward transform of a cube whose support is the low octant `[0, m)³`.
    pub fn forward3_octant(&mut self, data: &mut [Complex64], m: usize) {
        let n = self.len;
        self.transform_axis(data, Axis::Z, 0..m, 0..m, false);
        self.transform_axis(data, Axis::Y, 0..m, 0..n, false);
        self.transform_axis(data, Axis::X, 0..n, 0..n, false);
    }

    /// Unnormalized inverse transform that is only correct on the low octant `[0, m)³`.
    pub fn inverse3_octant(&mut self, data: &mut [Complex64], m: usize) {
        let n = self.len;
        self.transform_axis(data, Axis::X, 0..n, 0..n, true);
        self.transform_axis(data, Axis::Y, 0..m, 0..n, true);
        self.transform_axis(data, Axis::Z, 0..m, 0..m, true);
    }
}
