//! Set partitions of the integration variables and time orderings of their blocks.

use itertools::Itertools;

use super::{ChaosError, Result};

/// Largest `n` for which [`contractions`] enumerates partitions.
pub const MAX_CONTRACTION_N: usize = 8;

/// A set partition of `{0, .., n-1}`. Components are sorted by least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Contraction {
    n: usize,
    components: Vec<Vec<usize>>,
    component_of: Vec<usize>,
}

impl Contraction {
    /// Build from arbitrary blocks; blocks are sorted and put in canonical order.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut components = Vec::with_capacity(blocks.len());
        for mut b in blocks {
            if b.is_empty() {
                return Err(ChaosError::Contract("empty component".into()));
            }
            b.sort_unstable();
            for &i in &b {
                if i >= n {
                    return Err(ChaosError::Contract(format!("index {i} out of range for n = {n}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(ChaosError::Contract(format!("index {i} appears twice")));
                }
            }
            components.push(b);
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(ChaosError::Contract(format!("index {i} is not covered")));
        }
        components.sort_by_key(|b| b[0]);
        let mut component_of = vec![0; n];
        for (c, b) in components.iter().enumerate() {
            for &i in b {
                component_of[i] = c;
            }
        }
        Ok(Self { n, components, component_of })
    }

    /// All singletons.
    pub fn identity(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| vec![i]).collect()).expect("valid partition")
    }

    /// One component holding every variable.
    pub fn full(n: usize) -> Self {
        Self::new(n, vec![(0..n).collect()]).expect("valid partition")
    }

    pub fn n(&self) -> usize {
        self.n
    }
    /// Number of components `m`.
    pub fn len(&self) -> usize {
        self.components.len()
    }
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }
    pub fn component_of(&self, var: usize) -> usize {
        self.component_of[var]
    }
    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(Vec::len).collect()
    }

    /// Component sizes listed in time order under `sigma`.
    pub fn sizes_in_order(&self, sigma: &Ordering) -> Vec<usize> {
        sigma.sigma().iter().map(|&c| self.components[c].len()).collect()
    }

    /// The same partition after renaming variable `i` to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(ChaosError::Contract("permutation has wrong length".into()));
        }
        Self::new(self.n, self.components.iter().map(|b| b.iter().map(|&i| perm[i]).collect()).collect())
    }
}

/// All set partitions of `{0, .., n-1}` in restricted-growth-string order.
pub fn contractions(n: usize) -> Result<Vec<Contraction>> {
    if n == 0 || n > MAX_CONTRACTION_N {
        return Err(ChaosError::Guard(format!(
            "contractions are enumerated for 1 <= n <= {MAX_CONTRACTION_N}, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Contraction>) {
        let n = rgs.len();
        if i == n {
            let mut blocks = vec![Vec::new(); max + 1];
            for (v, &b) in rgs.iter().enumerate() {
                blocks[b].push(v);
            }
            out.push(Contraction::new(n, blocks).expect("rgs is a partition"));
            return;
        }
        for b in 0..=max + 1 {
            rgs[i] = b;
            rec(i + 1, max.max(b), rgs, out);
        }
    }
    rec(1, 0, &mut rgs, &mut out);
    Ok(out)
}

/// A bijection from time positions to components: `sigma[j]` is the component integrated at position `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering {
    sigma: Vec<usize>,
    inverse: Vec<usize>,
}

impl Ordering {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let m = sigma.len();
        let mut inverse = vec![usize::MAX; m];
        for (j, &c) in sigma.iter().enumerate() {
            if c >= m || inverse[c] != usize::MAX {
                return Err(ChaosError::Contract(format!("{sigma:?} is not a bijection")));
            }
            inverse[c] = j;
        }
        Ok(Self { sigma, inverse })
    }

    pub fn identity(m: usize) -> Self {
        Self::new((0..m).collect()).expect("identity is a bijection")
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }
    pub fn len(&self) -> usize {
        self.sigma.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
    /// Time position of component `c`.
    pub fn position_of(&self, c: usize) -> usize {
        self.inverse[c]
    }
    pub fn inverse(&self) -> Ordering {
        Ordering::new(self.inverse.clone()).expect("inverse of a bijection")
    }
}

/// All `m!` orderings of the components of `gamma`.
pub fn orderings(gamma: &Contraction) -> Vec<Ordering> {
    let m = gamma.len();
    (0..m).permutations(m).map(|p| Ordering::new(p).expect("permutation")).collect()
}

/// Integrator attached to a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// Lebesgue part of the bracket.
    Down,
    /// Compensated bracket martingale `𝕄̄`.
    Diamond,
    Nil,
}

/// One label per component of a contraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    labels: Vec<Label>,
}

impl Labeling {
    pub fn new(gamma: &Contraction, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != gamma.len() {
            return Err(ChaosError::Contract(format!("{} labels for {} components", labels.len(), gamma.len())));
        }
        for (c, (&l, b)) in labels.iter().zip(gamma.components()).enumerate() {
            if l != Label::Nil && b.len() % 2 == 1 {
                return Err(ChaosError::Contract(format!(
                    "component {c} has odd size {} and must be labelled nil",
                    b.len()
                )));
            }
        }
        Ok(Self { labels })
    }

    pub fn nil(gamma: &Contraction) -> Self {
        Self { labels: vec![Label::Nil; gamma.len()] }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
    pub fn get(&self, c: usize) -> Label {
        self.labels[c]
    }
}

/// Exponent choice per time position: `L^1`, `L^2` or `L^∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PVal {
    One,
    Two,
    Inf,
}

impl PVal {
    pub const ALL: [PVal; 3] = [PVal::One, PVal::Two, PVal::Inf];
}

/// A map `{1..m} → {1, 2, ∞}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PFunction {
    pub values: Vec<PVal>,
}

impl PFunction {
    pub fn new(values: Vec<PVal>) -> Self {
        Self { values }
    }
    pub fn m(&self) -> usize {
        self.values.len()
    }
    pub fn preimage(&self, v: PVal) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] == v).collect()
    }
    /// All `3^m` functions.
    pub fn all(m: usize) -> Vec<PFunction> {
        if m == 0 {
            return vec![PFunction::new(Vec::new())];
        }
        (0..m).map(|_| PVal::ALL).multi_cartesian_product().map(PFunction::new).collect()
    }
}
