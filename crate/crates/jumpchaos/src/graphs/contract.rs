//! Contracted graphs and the four power-counting conditions on them.

use std::fmt;

use super::{DiagramGraph, Edge, GraphError, PowerCounting, Result, VertexKind};
use crate::chaos::{Contraction, Label, Labeling};

/// Largest number of contracted vertices for exhaustive subset enumeration.
pub const MAX_SUBSET_VERTICES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ContractedVertex {
    pub name: String,
    pub kind: VertexKind,
    /// Vertices of the original graph identified into this one.
    pub members: Vec<usize>,
}

/// The multigraph `(Ṽ, Ẽ)` and its collapsed simple graph `(V̂, Ê)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedGraph {
    vertices: Vec<ContractedVertex>,
    multi_edges: Vec<Edge>,
    edges: Vec<Edge>,
    in_gamma: Vec<bool>,
    /// Contracted vertex of each component of the contraction.
    component_vertex: Vec<usize>,
    identification: Vec<usize>,
    contraction: Contraction,
    labeling: Labeling,
    star: usize,
    up: usize,
}

/// Identify the variable vertices of `g` along `gamma` and collapse parallel edges.
pub fn contract_graph(g: &DiagramGraph, gamma: &Contraction, labels: &Labeling) -> Result<ContractedGraph> {
    let vars = g.var_vertices();
    if gamma.n() != vars.len() {
        return Err(GraphError::Contract(format!(
            "contraction acts on {} variables but the graph has {}",
            gamma.n(),
            vars.len()
        )));
    }
    if labels.labels().len() != gamma.len() {
        return Err(GraphError::Contract(format!("{} labels for {} components", labels.labels().len(), gamma.len())));
    }
    let star = g.star().ok_or_else(|| GraphError::Invalid("no star vertex".into()))?;
    let up = g.up().ok_or_else(|| GraphError::Invalid("no up vertex".into()))?;

    let mut identification = vec![usize::MAX; g.vertices().len()];
    let mut vertices = Vec::new();
    let mut component_vertex = vec![usize::MAX; gamma.len()];
    for (v, vert) in g.vertices().iter().enumerate() {
        if identification[v] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = match vars.iter().position(|&w| w == v) {
            Some(i) => {
                let c = gamma.component_of(i);
                component_vertex[c] = vertices.len();
                gamma.components()[c].iter().map(|&j| vars[j]).collect()
            }
            None => vec![v],
        };
        let name = members.iter().map(|&m| g.name(m)).collect::<Vec<_>>().join("+");
        for &m in &members {
            identification[m] = vertices.len();
        }
        vertices.push(ContractedVertex { name, kind: vert.kind, members });
    }

    let multi_edges: Vec<Edge> =
        g.edges().iter().map(|e| Edge { from: identification[e.from], to: identification[e.to], ..*e }).collect();

    let mut edges: Vec<Edge> = Vec::new();
    let mut groups: Vec<Vec<Edge>> = Vec::new();
    for e in &multi_edges {
        match edges.iter().position(|f| f.from == e.from && f.to == e.to) {
            Some(i) => groups[i].push(*e),
            None => {
                edges.push(*e);
                groups.push(vec![*e]);
            }
        }
    }
    for (e, group) in edges.iter_mut().zip(&groups) {
        let positive = group.iter().filter(|f| f.r > 0).count();
        let negative = group.iter().filter(|f| f.r < 0).count();
        if positive > 1 || (negative > 0 && group.len() > 1) {
            return Err(GraphError::Contract(format!(
                "parallel edges {} -> {} carry incompatible renormalization orders",
                vertices[e.from].name, vertices[e.to].name
            )));
        }
        e.a = group.iter().map(|f| f.a).sum();
        e.r = group.iter().map(|f| f.r).sum();
    }

    let mut in_gamma = vec![false; vertices.len()];
    for (c, block) in gamma.components().iter().enumerate() {
        in_gamma[component_vertex[c]] = block.len() == 1 || labels.get(c) == Label::Diamond;
    }

    Ok(ContractedGraph {
        star: identification[star],
        up: identification[up],
        vertices,
        multi_edges,
        edges,
        in_gamma,
        component_vertex,
        identification,
        contraction: gamma.clone(),
        labeling: labels.clone(),
    })
}

impl ContractedGraph {
    pub fn vertices(&self) -> &[ContractedVertex] {
        &self.vertices
    }
    /// Edges of the multigraph `Ẽ`.
    pub fn multi_edges(&self) -> &[Edge] {
        &self.multi_edges
    }
    /// Edges of the collapsed graph `Ê` with summed labels.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn star(&self) -> usize {
        self.star
    }
    pub fn up(&self) -> usize {
        self.up
    }
    /// The identification map `𝔦_γ` on original vertex indices.
    pub fn identification(&self) -> &[usize] {
        &self.identification
    }
    pub fn contraction(&self) -> &Contraction {
        &self.contraction
    }
    pub fn labeling(&self) -> &Labeling {
        &self.labeling
    }
    pub fn in_gamma(&self, v: usize) -> bool {
        self.in_gamma[v]
    }
    /// `Γ` as contracted vertex indices.
    pub fn gamma(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.in_gamma[v]).collect()
    }
    /// Whether component `c` of the contraction lies in `Γ`.
    pub fn component_in_gamma(&self, c: usize) -> bool {
        self.in_gamma[self.component_vertex[c]]
    }
    pub fn component_vertex(&self, c: usize) -> usize {
        self.component_vertex[c]
    }

    fn subset_names(&self, mask: u64) -> String {
        let names: Vec<&str> =
            (0..self.vertices.len()).filter(|&v| mask >> v & 1 == 1).map(|v| self.vertices[v].name.as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// Verdict on one condition, with the first violating edge or subset.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemVerdict {
    pub item: usize,
    pub passed: bool,
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub items: Vec<ItemVerdict>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
    pub fn item(&self, k: usize) -> &ItemVerdict {
        &self.items[k - 1]
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for it in &self.items {
            write!(f, "item {}: {}", it.item, if it.passed { "PASS" } else { "FAIL" })?;
            if let Some(v) = &it.violation {
                write!(f, " ({v})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Sums<'a> {
    cg: &'a ContractedGraph,
    mask: u64,
}

impl Sums<'_> {
    fn has(&self, v: usize) -> bool {
        self.mask >> v & 1 == 1
    }
    fn size(&self) -> usize {
        self.mask.count_ones() as usize
    }
    fn gamma_count(&self) -> usize {
        (0..self.cg.vertices.len()).filter(|&v| self.has(v) && self.cg.in_gamma[v]).count()
    }
    fn internal(&self) -> impl Iterator<Item = &Edge> {
        self.cg.edges.iter().filter(|e| self.has(e.from) && self.has(e.to))
    }
    /// Edges leaving the subset.
    fn outgoing(&self) -> impl Iterator<Item = &Edge> {
        self.cg.edges.iter().filter(|e| self.has(e.from) && !self.has(e.to))
    }
    /// Edges entering the subset.
    fn incoming(&self) -> impl Iterator<Item = &Edge> {
        self.cg.edges.iter().filter(|e| !self.has(e.from) && self.has(e.to))
    }
    fn incident(&self) -> impl Iterator<Item = &Edge> {
        self.cg.edges.iter().filter(|e| self.has(e.from) || self.has(e.to))
    }
}

fn verdict(item: usize, violation: Option<String>) -> ItemVerdict {
    ItemVerdict { item, passed: violation.is_none(), violation }
}

/// Check the four conditions on `(V̂, Ê)` by exhaustive subset enumeration.
pub fn check_contraction_assumption(cg: &ContractedGraph, pc: &PowerCounting) -> Result<AssumptionReport> {
    let nv = cg.vertices.len();
    if nv > MAX_SUBSET_VERTICES {
        return Err(GraphError::Guard(format!(
            "{nv} vertices exceed the subset enumeration limit {MAX_SUBSET_VERTICES}"
        )));
    }
    let s = pc.scaling_dimension();
    let half = s / 2.0;
    let full: u64 = (1u64 << nv) - 1;
    let star_bit = 1u64 << cg.star;
    let up_bit = 1u64 << cg.up;

    let item1 = cg.edges.iter().find(|e| e.a + f64::from(e.r.min(0)) >= s).map(|e| {
        format!("edge {} -> {}: {} + ({} ∧ 0) >= {}", cg.vertices[e.from].name, cg.vertices[e.to].name, e.a, e.r, s)
    });

    let mut item2 = None;
    let mut item3 = None;
    let mut item4 = None;
    for mask in 1..=full {
        let sums = Sums { cg, mask };
        let size = sums.size();
        let gc = sums.gamma_count() as f64;
        if item2.is_none() && mask & star_bit == 0 && size >= 3 {
            let lhs: f64 = sums.internal().map(|e| e.a).sum();
            let indicator = if gc == 0.0 { 1.0 } else { 0.0 };
            let rhs = (2.0 * size as f64 - gc - 1.0 - indicator) * half;
            if lhs >= rhs {
                item2 = Some(format!("subset {}: {lhs} >= {rhs}", cg.subset_names(mask)));
            }
        }
        if item3.is_none() && mask & star_bit != 0 && size >= 2 {
            let lhs: f64 = sums.internal().map(|e| e.a).sum::<f64>()
                + sums.outgoing().filter(|e| e.r > 0).map(|e| e.a + f64::from(e.r) - 1.0).sum::<f64>()
                - sums.incoming().filter(|e| e.r > 0).map(|e| f64::from(e.r)).sum::<f64>();
            let rhs = (2.0 * size as f64 - gc) * half;
            if lhs >= rhs {
                item3 = Some(format!("subset {}: {lhs} >= {rhs}", cg.subset_names(mask)));
            }
        }
        if item4.is_none() && mask & (star_bit | up_bit) == 0 {
            let positive_in = |e: &&Edge| !sums.has(e.from) && sums.has(e.to) && e.r > 0;
            let lhs: f64 = sums.incident().filter(|e| !positive_in(e)).map(|e| e.a).sum::<f64>()
                + sums.outgoing().filter(|e| e.r > 0).map(|e| f64::from(e.r)).sum::<f64>()
                - sums.incoming().filter(|e| e.r > 0).map(|e| f64::from(e.r) - 1.0).sum::<f64>();
            let rhs = (2.0 * size as f64 - gc) * half;
            if lhs <= rhs {
                item4 = Some(format!("subset {}: {lhs} <= {rhs}", cg.subset_names(mask)));
            }
        }
    }
    Ok(AssumptionReport { items: vec![verdict(1, item1), verdict(2, item2), verdict(3, item3), verdict(4, item4)] })
}

#[cfg(test)]
mod tests {
    use super::super::parse_fixture;
    use super::*;

    fn fixture(body: &str) -> ContractedGraph {
        let f = parse_fixture(body).unwrap();
        contract_graph(&f.graph, &f.contraction, &f.labeling).unwrap()
    }

    const PSI2: &str = "vertex s star\nvertex u up\nvertex x1 var\nvertex x2 var\nedge s u a=0 r=0\nedge x1 u a=3 r=0\nedge x2 u a=3 r=0\n";

    #[test]
    fn identity_contraction_keeps_edges() {
        let cg = fixture(PSI2);
        assert_eq!(cg.multi_edges().len(), 3);
        assert_eq!(cg.edges().len(), 3);
        assert_eq!(cg.gamma().len(), 2);
        assert!(check_contraction_assumption(&cg, &PowerCounting::PHI43).unwrap().passed());
    }

    #[test]
    fn cherry_collapses_parallel_edges() {
        let cg = fixture(&format!("{PSI2}contract x1 x2\nlabel 1 diamond\n"));
        assert_eq!(cg.vertices().len(), 3);
        assert_eq!(cg.multi_edges().len(), 3);
        assert_eq!(cg.edges().len(), 2);
        let e = cg.edges().iter().find(|e| e.to == cg.up() && e.from != cg.star()).unwrap();
        assert_eq!(e.a, 6.0);
        assert_eq!(cg.gamma(), vec![cg.component_vertex(0)]);
        let rep = check_contraction_assumption(&cg, &PowerCounting::PHI43).unwrap();
        assert!(!rep.item(1).passed);

        let nil = fixture(&format!("{PSI2}contract x1 x2\n"));
        assert!(nil.gamma().is_empty());
    }

    #[test]
    fn contraction_must_match_variables() {
        let f = parse_fixture(PSI2).unwrap();
        let g = Contraction::identity(3);
        assert!(matches!(contract_graph(&f.graph, &g, &Labeling::nil(&g)), Err(GraphError::Contract(_))));
    }

    #[test]
    fn triangle_violates_item_two() {
        // Three non-star vertices with heavy internal edges.
        let body = "vertex s star\nvertex u up\nvertex x var\nvertex w internal\n\
                    edge s u a=0 r=0\nedge x w a=4.5 r=0\nedge w u a=4.5 r=0\nedge x u a=4.5 r=0\n";
        let rep = check_contraction_assumption(&fixture(body), &PowerCounting::PHI43).unwrap();
        assert!(rep.item(1).passed);
        let v = rep.item(2).violation.clone().unwrap();
        assert!(v.contains("{u, x, w}"), "{v}");
    }
}
