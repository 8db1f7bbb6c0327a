//! The weighted norm `‖K‖^{(𝔢)}_{a;q} = sup_{|k|_𝔰 ≤ q} sup_z (‖z‖_𝔰 + 𝔢)^{a + |k|_𝔰} |D^k K(z)|`.

use super::{cube, multiindex_weight, offset_position, ParabolicGeometry, SpaceTimeKernel};

/// Multi-indices `(k_0, k_1, k_2, k_3)` with `|k|_𝔰 ≤ q`.
pub fn multiindices(q: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for k0 in 0..=q / 2 {
        for k1 in 0..=q {
            for k2 in 0..=q {
                for k3 in 0..=q {
                    let k = [k0, k1, k2, k3];
                    if multiindex_weight(&k) <= q {
                        out.push(k);
                    }
                }
            }
        }
    }
    out
}

/// Central-difference stencil for a derivative of order `order` with unit step.
fn stencil(order: u32) -> &'static [(i64, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        _ => panic!("derivatives of order {order} per axis are not supported"),
    }
}

/// `D^k K` at node `i`, offset `off`, by central differences with spatial step `ε`
/// and time step `ε²` (rounded to a whole number of nodes).
pub fn derivative(k: &dyn SpaceTimeKernel, mi: [u32; 4], i: i64, off: [i64; 3]) -> f64 {
    let eps = k.eps();
    let tstep = ((eps * eps / k.dt()).round() as i64).max(1);
    let ht = tstep as f64 * k.dt();
    let mut acc = 0.0;
    for &(a, ca) in stencil(mi[0]) {
        for &(b, cb) in stencil(mi[1]) {
            for &(c, cc) in stencil(mi[2]) {
                for &(d, cd) in stencil(mi[3]) {
                    acc += ca * cb * cc * cd * k.node_value(i + a * tstep, [off[0] + b, off[1] + c, off[2] + d]);
                }
            }
        }
    }
    acc / (ht.powi(mi[0] as i32) * eps.powi((mi[1] + mi[2] + mi[3]) as i32))
}

/// Grid supremum of `(‖z‖_𝔰 + 𝔢)^{a + |k|_𝔰} |D^k K(z)|` over `|k|_𝔰 ≤ q`.
pub fn kernel_norm(k: &dyn SpaceTimeKernel, a: f64, q: u32, e: f64) -> f64 {
    let g = ParabolicGeometry::PHI43;
    let (lo, hi) = k.node_range();
    let eps = k.eps();
    let pad = if q >= 2 { ((eps * eps / k.dt()).round() as i64).max(1) } else { 0 };
    let reach = k.reach() + i64::from(q > 0);
    let mis = multiindices(q);
    let mut sup = 0.0f64;
    for i in lo - pad..=hi + pad {
        let t = i as f64 * k.dt();
        for off in cube(reach) {
            let x = offset_position(eps, off);
            let base = g.norm(t, &x) + e;
            for &mi in &mis {
                let v = if mi == [0; 4] { k.node_value(i, off) } else { derivative(k, mi, i, off) };
                if v != 0.0 {
                    sup = sup.max(base.powf(a + multiindex_weight(&mi) as f64) * v.abs());
                }
            }
        }
    }
    sup
}
