//! Multidimensional complex FFTs on row-major grids (last axis fastest).

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse plans for a fixed grid shape.
pub struct GridFft {
    dims: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
    lines: Vec<Complex64>,
}

impl GridFft {
    pub fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self { dims: dims.to_vec(), forward, inverse, scratch: Vec::new(), lines: Vec::new() }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        for axis in 0..self.dims.len() {
            let plan = self.forward[axis].clone();
            self.transform_axis(data, axis, plan.as_ref());
        }
    }

    /// Inverse transform in place, normalized so that `inverse(forward(x)) = x`.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        for axis in 0..self.dims.len() {
            let plan = self.inverse[axis].clone();
            self.transform_axis(data, axis, plan.as_ref());
        }
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform_axis(&mut self, data: &mut [Complex64], axis: usize, plan: &dyn Fft<f64>) {
        assert_eq!(data.len(), self.len(), "grid size mismatch");
        let n = self.dims[axis];
        if n <= 1 {
            return;
        }
        let need = plan.get_inplace_scratch_len();
        if self.scratch.len() < need {
            self.scratch.resize(need, Complex64::default());
        }
        let stride: usize = self.dims[axis + 1..].iter().product();
        if stride == 1 {
            plan.process_with_scratch(data, &mut self.scratch[..need]);
            return;
        }
        let outer = data.len() / (n * stride);
        self.lines.resize(data.len(), Complex64::default());
        // Gather every line along `axis` into contiguous storage.
        for o in 0..outer {
            let base = o * n * stride;
            for s in 0..stride {
                let line = (o * stride + s) * n;
                for j in 0..n {
                    self.lines[line + j] = data[base + j * stride + s];
                }
            }
        }
        plan.process_with_scratch(&mut self.lines, &mut self.scratch[..need]);
        for o in 0..outer {
            let base = o * n * stride;
            for s in 0..stride {
                let line = (o * stride + s) * n;
                for j in 0..n {
                    data[base + j * stride + s] = self.lines[line + j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_convolution_theorem() {
        let dims = [4, 3, 5];
        let mut fft = GridFft::new(&dims);
        let n = fft.len();
        let a: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(((i * 7) % 5) as f64, 0.0)).collect();
        let mut fa = a.clone();
        fft.forward(&mut fa);
        let mut back = fa.clone();
        fft.inverse(&mut back);
        for (x, y) in a.iter().zip(&back) {
            assert!((x - y).norm() < 1e-12);
        }
        // Circular convolution by direct sum.
        let idx = |i: usize, j: usize, k: usize| (i * 3 + j) * 5 + k;
        let mut direct = vec![Complex64::default(); n];
        for i in 0..4 {
            for j in 0..3 {
                for k in 0..5 {
                    let mut acc = Complex64::default();
                    for p in 0..4 {
                        for q in 0..3 {
                            for r in 0..5 {
                                acc += a[idx(p, q, r)] * b[idx((i + 4 - p) % 4, (j + 3 - q) % 3, (k + 5 - r) % 5)];
                            }
                        }
                    }
                    direct[idx(i, j, k)] = acc;
                }
            }
        }
        let mut fb = b.clone();
        fft.forward(&mut fb);
        let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
        fft.inverse(&mut prod);
        for (x, y) in direct.iter().zip(&prod) {
            assert!((x - y).norm() < 1e-9);
        }
    }
}
