//! Lattice mollification `K^𝔢 = K ⋆_ε ψ_𝔢` and periodized kernel grids on the torus.

use std::sync::Arc;

use super::{cube, KernelError, KernelLabel, Result, SpaceTimeKernel};
use crate::noise::LatticeMollifier;

/// `K^𝔢(t, x) = ε³ Σ_y K(t, x - y) ψ_𝔢(y)`, evaluated on the fly.
#[derive(Clone)]
pub struct MollifiedKernel {
    base: Arc<dyn SpaceTimeKernel>,
    taps: Vec<([i64; 3], f64)>,
    tap_reach: i64,
}

impl MollifiedKernel {
    /// Convolve with explicit taps `(y, ψ_𝔢(y))`.
    pub fn with_taps(base: Arc<dyn SpaceTimeKernel>, taps: Vec<([i64; 3], f64)>) -> Self {
        let tap_reach = taps.iter().flat_map(|(y, _)| y.iter().map(|c| c.abs())).max().unwrap_or(0);
        Self { base, taps, tap_reach }
    }

    pub fn base(&self) -> &Arc<dyn SpaceTimeKernel> {
        &self.base
    }

    pub fn taps(&self) -> &[([i64; 3], f64)] {
        &self.taps
    }
}

fn taps3(moll: &LatticeMollifier) -> Result<Vec<([i64; 3], f64)>> {
    moll.taps()
        .iter()
        .map(|(y, w)| match y.as_slice() {
            [a, b, c] => Ok(([*a, *b, *c], *w)),
            _ => Err(KernelError::Config("kernels live in three space dimensions".into())),
        })
        .collect()
}

/// The lattice convolution `K ⋆_ε ψ_𝔢`.
pub fn discrete_convolve(base: Arc<dyn SpaceTimeKernel>, moll: &LatticeMollifier) -> Result<MollifiedKernel> {
    Ok(MollifiedKernel::with_taps(base, taps3(moll)?))
}

impl SpaceTimeKernel for MollifiedKernel {
    fn eps(&self) -> f64 {
        self.base.eps()
    }
    fn dt(&self) -> f64 {
        self.base.dt()
    }
    fn node_range(&self) -> (i64, i64) {
        self.base.node_range()
    }
    fn reach(&self) -> i64 {
        self.base.reach() + self.tap_reach
    }
    fn node_value(&self, i: i64, off: [i64; 3]) -> f64 {
        let vol = self.eps().powi(3);
        vol * self
            .taps
            .iter()
            .map(|(y, w)| w * self.base.node_value(i, [off[0] - y[0], off[1] - y[1], off[2] - y[2]]))
            .sum::<f64>()
    }
    fn label(&self) -> KernelLabel {
        self.base.label()
    }
}

/// A kernel periodized over the torus of `side` sites per axis, stored densely.
///
/// Layout: node-major, then site index with axis 0 fastest, matching [`crate::noise::LatticeSpec`].
#[derive(Debug, Clone)]
pub struct TorusKernel {
    side: usize,
    eps: f64,
    dt: f64,
    range: (i64, i64),
    label: KernelLabel,
    data: Vec<f64>,
}

impl TorusKernel {
    /// Periodize `k` by summing its images.
    pub fn from_kernel(k: &dyn SpaceTimeKernel, side: usize) -> Self {
        let range = k.node_range();
        let vol = side.pow(3);
        let nodes = (range.1 - range.0 + 1) as usize;
        let mut data = vec![0.0; nodes * vol];
        let offsets: Vec<[i64; 3]> = cube(k.reach()).collect();
        let sites: Vec<usize> = offsets.iter().map(|&o| wrap(side, o)).collect();
        for i in range.0..=range.1 {
            let row = &mut data[(i - range.0) as usize * vol..][..vol];
            for (o, &s) in offsets.iter().zip(&sites) {
                row[s] += k.node_value(i, *o);
            }
        }
        Self { side, eps: k.eps(), dt: k.dt(), range, label: k.label(), data }
    }

    /// A kernel from raw rows (used for derived kernels).
    pub fn from_rows(side: usize, eps: f64, dt: f64, range: (i64, i64), label: KernelLabel, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), (range.1 - range.0 + 1) as usize * side.pow(3));
        Self { side, eps, dt, range, label, data }
    }

    /// Circular convolution with lattice taps: `ε³ Σ_y K(t, x - y) ψ(y)`.
    pub fn mollify(&self, moll: &LatticeMollifier) -> Result<TorusKernel> {
        let taps = taps3(moll)?;
        let n = self.side;
        let vol = n.pow(3);
        let cell = self.eps.powi(3);
        let mut data = vec![0.0; self.data.len()];
        for (row_in, row_out) in self.data.chunks(vol).zip(data.chunks_mut(vol)) {
            for (y, w) in &taps {
                let shift = wrap(n, *y);
                let (sx, sy, sz) = (shift % n, (shift / n) % n, shift / (n * n));
                for z in 0..n {
                    let zs = (z + n - sz) % n;
                    for yy in 0..n {
                        let ys = (yy + n - sy) % n;
                        let base_out = (z * n + yy) * n;
                        let base_in = (zs * n + ys) * n;
                        for x in 0..n {
                            let xs = (x + n - sx) % n;
                            row_out[base_out + x] += cell * w * row_in[base_in + xs];
                        }
                    }
                }
            }
        }
        Ok(Self { data, ..self.clone() })
    }

    pub fn side(&self) -> usize {
        self.side
    }
    pub fn sites(&self) -> usize {
        self.side.pow(3)
    }
    pub fn nodes(&self) -> usize {
        (self.range.1 - self.range.0 + 1) as usize
    }
    /// Values at node `i` over all sites.
    pub fn row(&self, i: i64) -> &[f64] {
        let vol = self.sites();
        &self.data[(i - self.range.0) as usize * vol..][..vol]
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn at(&self, i: i64, site: usize) -> f64 {
        if i < self.range.0 || i > self.range.1 {
            return 0.0;
        }
        self.data[(i - self.range.0) as usize * self.sites() + site]
    }
    pub fn with_label(mut self, label: KernelLabel) -> Self {
        self.label = label;
        self
    }
}

/// Site index of a lattice offset on the torus of `side` sites per axis.
pub(crate) fn wrap(side: usize, off: [i64; 3]) -> usize {
    let n = side as i64;
    let c = |v: i64| v.rem_euclid(n) as usize;
    c(off[0]) + side * (c(off[1]) + side * c(off[2]))
}

impl SpaceTimeKernel for TorusKernel {
    fn eps(&self) -> f64 {
        self.eps
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn node_range(&self) -> (i64, i64) {
        self.range
    }
    fn reach(&self) -> i64 {
        (self.side / 2) as i64
    }
    fn node_value(&self, i: i64, off: [i64; 3]) -> f64 {
        self.at(i, wrap(self.side, off))
    }
    fn label(&self) -> KernelLabel {
        self.label
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_singular_kernel, Cutoff};
    use super::*;
    use crate::noise::LatticeSpec;

    fn kernel(eps: f64, e: f64) -> Arc<dyn SpaceTimeKernel> {
        Arc::new(build_singular_kernel(eps, e, Cutoff::Standard, 4).unwrap().0)
    }

    #[test]
    fn point_mass_is_identity() {
        let k = kernel(0.125, 0.25);
        let m = MollifiedKernel::with_taps(k.clone(), vec![([0, 0, 0], 512.0)]);
        for off in [[0, 0, 0], [1, 2, 0], [3, 1, 1]] {
            for i in [0, 5, 20] {
                assert!((m.node_value(i, off) - k.node_value(i, off)).abs() < 1e-12 * k.node_value(i, off).abs());
            }
        }
    }

    #[test]
    fn mollification_preserves_mass() {
        let k = kernel(0.125, 0.25);
        let lat = LatticeSpec::new(3, 0.125, 1.0).unwrap();
        let moll = LatticeMollifier::new(&lat, 0.25).unwrap();
        let m = discrete_convolve(k.clone(), &moll).unwrap();
        for i in [1, 8, 30] {
            let a: f64 = cube(k.reach()).map(|o| k.node_value(i, o)).sum();
            let b: f64 = cube(m.reach()).map(|o| m.node_value(i, o)).sum();
            assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} {b}");
        }
    }

    #[test]
    fn mollification_is_bounded_by_local_sup() {
        let k = kernel(0.125, 0.25);
        let lat = LatticeSpec::new(3, 0.125, 1.0).unwrap();
        let moll = LatticeMollifier::new(&lat, 0.25).unwrap();
        let m = discrete_convolve(k.clone(), &moll).unwrap();
        let r = (0.25f64 / 0.125).floor() as i64;
        for i in [0, 4, 16] {
            for off in [[0, 0, 0], [1, 1, 0], [2, 0, 1]] {
                let local = cube(r)
                    .map(|y| k.node_value(i, [off[0] - y[0], off[1] - y[1], off[2] - y[2]]).abs())
                    .fold(0.0, f64::max);
                assert!(m.node_value(i, off).abs() <= local * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn torus_grid_matches_image_sum_and_mollify_commutes() {
        let k = kernel(0.125, 0.25);
        let lat = LatticeSpec::new(3, 0.125, 1.0).unwrap();
        let moll = LatticeMollifier::new(&lat, 0.25).unwrap();
        let direct = TorusKernel::from_kernel(&discrete_convolve(k.clone(), &moll).unwrap(), 8);
        let via = TorusKernel::from_kernel(k.as_ref(), 8).mollify(&moll).unwrap();
        for (a, b) in direct.data().iter().zip(via.data()) {
            assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
        }
        let per = TorusKernel::from_kernel(k.as_ref(), 8);
        let want: f64 = [-1i64, 0, 1].iter().map(|&n| k.node_value(3, [3 + 8 * n, 0, 0])).sum::<f64>();
        assert!((per.node_value(3, [3, 0, 0]) - want).abs() < 1e-12);
    }
}
