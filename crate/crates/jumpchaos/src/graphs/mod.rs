//! Labelled directed graphs describing generalised convolutions of kernels,
//! their contractions, the structural assumptions on them, and the
//! power-counting exponents of the resulting moment bounds.

mod contract;
mod exponents;
mod parse;

pub use contract::{
    check_contraction_assumption, contract_graph, AssumptionReport, ContractedGraph, ItemVerdict, MAX_SUBSET_VERTICES,
};
pub use exponents::{
    admissible_p_functions, delta_gamma, exponent_report, nu_gamma, predicted_bound, ExponentReport, PRecord,
    PowerCounting, DEFAULT_KAPPA,
};
pub use parse::{parse_fixture, GraphFixture};

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::chaos::ChaosError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("contraction error: {0}")]
    Contract(String),
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Chaos(#[from] ChaosError),
}

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    /// The distinguished vertex `★`.
    Star,
    /// `v★↑`, the other end of the test-function edge.
    Up,
    /// A variable of the stochastic integral.
    Var,
    Internal,
}

impl VertexKind {
    pub fn keyword(self) -> &'static str {
        match self {
            VertexKind::Star => "star",
            VertexKind::Up => "up",
            VertexKind::Var => "var",
            VertexKind::Internal => "internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub kind: VertexKind,
}

/// A directed edge `from → to` carrying the label `(a, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub a: f64,
    pub r: i32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagramGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl DiagramGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a vertex and return its index. Names must be unique.
    pub fn add_vertex(&mut self, name: &str, kind: VertexKind) -> Result<usize> {
        if self.index_of(name).is_some() {
            return Err(GraphError::Invalid(format!("duplicate vertex '{name}'")));
        }
        self.vertices.push(Vertex { name: name.to_string(), kind });
        Ok(self.vertices.len() - 1)
    }

    pub fn add_edge(&mut self, from: usize, to: usize, a: f64, r: i32) -> Result<()> {
        if from >= self.vertices.len() || to >= self.vertices.len() {
            return Err(GraphError::Invalid(format!("edge {from} -> {to} refers to a missing vertex")));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(GraphError::Invalid(format!("edge label a = {a} must be a finite non-negative real")));
        }
        self.edges.push(Edge { from, to, a, r });
        Ok(())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }
    pub fn name(&self, v: usize) -> &str {
        &self.vertices[v].name
    }

    /// Indices of the variable vertices in declaration order; position `i` is variable `i`.
    pub fn var_vertices(&self) -> Vec<usize> {
        self.of_kind(VertexKind::Var)
    }

    fn of_kind(&self, kind: VertexKind) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].kind == kind).collect()
    }

    pub fn star(&self) -> Option<usize> {
        self.of_kind(VertexKind::Star).first().copied()
    }
    pub fn up(&self) -> Option<usize> {
        self.of_kind(VertexKind::Up).first().copied()
    }

    fn describe(&self, e: &Edge) -> String {
        format!("{} -> {} (a={}, r={})", self.name(e.from), self.name(e.to), e.a, e.r)
    }
}

/// One named structural check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// The offending vertex or edge, when failed.
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{}: {}", c.name, if c.passed { "PASS" } else { "FAIL" })?;
            if let Some(d) = &c.detail {
                write!(f, " ({d})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn check(name: &'static str, failure: Option<String>) -> Check {
    Check { name, passed: failure.is_none(), detail: failure }
}

/// Structural requirements on the graph together with its four label conditions.
pub fn validate_graph(g: &DiagramGraph) -> ValidationReport {
    let n = g.vertices.len();
    let mut checks = Vec::new();

    let stars = g.of_kind(VertexKind::Star);
    let ups = g.of_kind(VertexKind::Up);
    checks.push(check(
        "distinguished vertices",
        match (stars.len(), ups.len()) {
            (1, 1) => None,
            (s, u) => Some(format!("need exactly one star and one up vertex, found {s} and {u}")),
        },
    ));

    checks.push(check(
        "loopless",
        g.edges.iter().find(|e| e.from == e.to).map(|e| format!("self-loop at '{}'", g.name(e.from))),
    ));

    let connected = {
        let mut adj = vec![Vec::new(); n];
        for e in &g.edges {
            adj[e.from].push(e.to);
            adj[e.to].push(e.from);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        if n > 0 {
            seen[0] = true;
            queue.push_back(0);
        }
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !std::mem::replace(&mut seen[w], true) {
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s).map(|v| format!("vertex '{}' is not reachable", g.name(v)))
    };
    checks.push(check("weakly connected", connected));

    let star_out = stars.first().map(|&s| {
        let out: Vec<&Edge> = g.edges.iter().filter(|e| e.from == s).collect();
        let targets: Vec<usize> = out.iter().map(|e| e.to).collect();
        if out.len() != 1 || Some(targets[0]) != ups.first().copied() {
            Some(format!("star must have exactly one outgoing edge, to the up vertex; found {}", out.len()))
        } else {
            None
        }
    });
    checks.push(check("star has one outgoing edge to up", star_out.flatten()));

    checks.push(check(
        "variables have only outgoing edges",
        g.edges
            .iter()
            .find(|e| g.vertices[e.to].kind == VertexKind::Var)
            .map(|e| format!("edge {} enters a variable vertex", g.describe(e))),
    ));

    let star = stars.first().copied();
    checks.push(check(
        "edges at star have r = 0",
        g.edges.iter().find(|e| (Some(e.from) == star || Some(e.to) == star) && e.r != 0).map(|e| g.describe(e)),
    ));
    checks.push(check(
        "test edge labelled (0, 0)",
        g.edges
            .iter()
            .find(|e| Some(e.from) == star && g.vertices[e.to].kind == VertexKind::Up && (e.a != 0.0 || e.r != 0))
            .map(|e| g.describe(e)),
    ));
    checks.push(check(
        "at most one positive renormalization per vertex",
        (0..n)
            .find(|&v| g.edges.iter().filter(|e| (e.from == v || e.to == v) && e.r > 0).count() > 1)
            .map(|v| format!("vertex '{}'", g.name(v))),
    ));
    checks.push(check(
        "negatively renormalized edges are isolated",
        g.edges.iter().enumerate().find_map(|(i, e)| {
            if e.r >= 0 {
                return None;
            }
            let other = g
                .edges
                .iter()
                .enumerate()
                .any(|(j, f)| j != i && [f.from, f.to].iter().any(|v| *v == e.from || *v == e.to));
            other.then(|| format!("edge {} shares a vertex with another edge", g.describe(e)))
        }),
    ));
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn psi() -> DiagramGraph {
        let mut g = DiagramGraph::new();
        let s = g.add_vertex("star", VertexKind::Star).unwrap();
        let u = g.add_vertex("up", VertexKind::Up).unwrap();
        let v = g.add_vertex("x1", VertexKind::Var).unwrap();
        g.add_edge(s, u, 0.0, 0).unwrap();
        g.add_edge(v, u, 3.0, 0).unwrap();
        g
    }

    #[test]
    fn psi_graph_validates() {
        let r = validate_graph(&psi());
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn self_loop_and_incoming_variable_edges_fail() {
        let mut g = psi();
        g.add_edge(1, 1, 1.0, 0).unwrap();
        let r = validate_graph(&g);
        assert!(!r.check("loopless").unwrap().passed);

        let mut g = psi();
        let w = g.add_vertex("w", VertexKind::Internal).unwrap();
        g.add_edge(w, 2, 1.0, 0).unwrap();
        let r = validate_graph(&g);
        let c = r.check("variables have only outgoing edges").unwrap();
        assert!(!c.passed);
        assert!(c.detail.as_ref().unwrap().contains("w -> x1"));
    }

    #[test]
    fn label_conditions() {
        let mut g = psi();
        g.edges[0].a = 1.0;
        assert!(!validate_graph(&g).check("test edge labelled (0, 0)").unwrap().passed);

        let mut g = psi();
        let w = g.add_vertex("w", VertexKind::Internal).unwrap();
        g.add_edge(w, 1, 2.0, 1).unwrap();
        g.add_edge(2, w, 2.0, 1).unwrap();
        assert!(!validate_graph(&g).check("at most one positive renormalization per vertex").unwrap().passed);

        let mut g = psi();
        g.edges[1].r = -1;
        assert!(!validate_graph(&g).check("negatively renormalized edges are isolated").unwrap().passed);

        let mut g = psi();
        g.add_vertex("lonely", VertexKind::Internal).unwrap();
        assert!(!validate_graph(&g).check("weakly connected").unwrap().passed);
    }
}
