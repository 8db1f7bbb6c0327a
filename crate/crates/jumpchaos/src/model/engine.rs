//! Monte Carlo replicas of the model pairings.

use std::thread;

use super::grid::{pi_ipsi3psi2, pi_psi, pi_psi2, pi_xi, LatticeTest, ModelGrid, XiWeight};
use super::{ModelError, ModelSymbol, Result};
use crate::fft::GridFft;
use crate::noise::{sample_paths, MartingalePathSet};
use crate::rng::derive_seed;

/// One output column: a symbol paired with `φ^λ_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observable {
    pub symbol: ModelSymbol,
    pub lambda: f64,
}

/// Evaluates a fixed set of observables on independent replicas.
///
/// Replica `r` is driven by the path with seed `derive_seed(seed, r)`. Replicas
/// `2j` and `2j + 1` share one complex transform, so results do not depend on
/// how a run is split into chunks or threads.
pub struct Engine<'a> {
    grid: &'a ModelGrid,
    columns: Vec<Observable>,
    tests: Vec<LatticeTest>,
    xi: Vec<XiWeight>,
}

/// Map `f` over `0..n` on all available cores, keeping one `init()` state per worker.
pub(crate) fn parallel_map<S, T: Send>(
    n: usize,
    init: impl Fn() -> S + Sync,
    f: impl Fn(&mut S, usize) -> T + Sync,
) -> Vec<T> {
    let workers = thread::available_parallelism().map_or(1, |v| v.get()).min(n.max(1));
    if workers <= 1 {
        let mut s = init();
        return (0..n).map(|i| f(&mut s, i)).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (init, f) = (&init, &f);
                scope.spawn(move || {
                    let mut s = init();
                    (w..n).step_by(workers).map(|i| (i, f(&mut s, i))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, v) in h.join().expect("worker panicked") {
                slots[i] = Some(v);
            }
        }
    });
    slots.into_iter().map(|v| v.expect("every index computed")).collect()
}

impl<'a> Engine<'a> {
    pub fn new(grid: &'a ModelGrid, symbols: &[ModelSymbol], lambdas: &[f64]) -> Result<Self> {
        if symbols.contains(&ModelSymbol::IPsi3Psi2) && grid.c2().is_none() {
            return Err(ModelError::Config("𝓘(Ψ³)Ψ² needs a grid with the cubic window".into()));
        }
        let mut tests = Vec::new();
        let mut xi = Vec::new();
        for &lambda in lambdas {
            let phi = grid.test_function(lambda)?;
            tests.push(grid.discretize(&phi)?);
            xi.push(grid.xi_weight(&phi));
        }
        let columns = symbols
            .iter()
            .flat_map(|&symbol| lambdas.iter().map(move |&lambda| Observable { symbol, lambda }))
            .collect();
        Ok(Self { grid, columns, tests, xi })
    }

    pub fn columns(&self) -> &[Observable] {
        &self.columns
    }

    pub fn grid(&self) -> &ModelGrid {
        self.grid
    }

    fn needs(&self, s: ModelSymbol) -> bool {
        self.columns.iter().any(|c| c.symbol == s)
    }

    fn lambda_index(&self, c: &Observable) -> usize {
        let per = self.tests.len();
        self.columns.iter().position(|o| o == c).expect("own column") % per
    }

    /// Observables for one or two paths.
    pub fn evaluate(
        &self,
        fft: &mut GridFft,
        a: &MartingalePathSet,
        b: Option<&MartingalePathSet>,
    ) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let need_psi = self.columns.iter().any(|c| c.symbol != ModelSymbol::Xi);
        let (pa, pb) = if need_psi {
            let (pa, pb) = self.grid.psi_fields(fft, a, b)?;
            (Some(pa), pb)
        } else {
            (None, None)
        };
        let (ya, yb) = match (&pa, self.needs(ModelSymbol::IPsi3Psi2)) {
            (Some(pa), true) => {
                let (ya, yb) = self.grid.cubic_fields(fft, pa, pb.as_ref())?;
                (Some(ya), yb)
            }
            _ => (None, None),
        };
        let c1 = self.grid.c1().value;
        let c2 = self.grid.c2().map_or(0.0, |c| c.value);
        let one = |path: &MartingalePathSet, psi: Option<&_>, y: Option<&_>| -> Result<Vec<f64>> {
            self.columns
                .iter()
                .map(|c| {
                    let i = self.lambda_index(c);
                    Ok(match c.symbol {
                        ModelSymbol::Xi => pi_xi(path, &self.xi[i])?,
                        ModelSymbol::Psi => pi_psi(psi.expect("Ψ computed"), &self.tests[i]),
                        ModelSymbol::Psi2 => pi_psi2(psi.expect("Ψ computed"), &self.tests[i], c1),
                        ModelSymbol::IPsi3Psi2 => {
                            pi_ipsi3psi2(psi.expect("Ψ computed"), y.expect("Y computed"), &self.tests[i], c2)
                        }
                    })
                })
                .collect()
        };
        let ra = one(a, pa.as_ref(), ya.as_ref())?;
        let rb = match b {
            Some(b) => Some(one(b, pb.as_ref(), yb.as_ref())?),
            None => None,
        };
        Ok((ra, rb))
    }

    /// Rows for replicas `first..first + count` (one value per column).
    pub fn run(&self, seed: u64, first: usize, count: usize) -> Result<Vec<Vec<f64>>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let last = first + count;
        let pair_lo = first / 2;
        let pair_hi = last.div_ceil(2);
        let lattice = self.grid.lattice();
        let spec = self.grid.spec();
        let pairs = parallel_map(
            pair_hi - pair_lo,
            || self.grid.fft(),
            |fft, j| -> Result<[Vec<f64>; 2]> {
                let r = 2 * (pair_lo + j);
                let a = sample_paths(lattice, spec, derive_seed(seed, r as u64))?;
                let b = sample_paths(lattice, spec, derive_seed(seed, r as u64 + 1))?;
                let (ra, rb) = self.evaluate(fft, &a, Some(&b))?;
                Ok([ra, rb.expect("paired")])
            },
        );
        let mut rows = Vec::with_capacity(count);
        for (j, pair) in pairs.into_iter().enumerate() {
            let [ra, rb] = pair?;
            let r = 2 * (pair_lo + j);
            if r >= first {
                rows.push(ra);
            }
            if r + 1 >= first && r + 1 < last {
                rows.push(rb);
            }
        }
        Ok(rows)
    }
}
