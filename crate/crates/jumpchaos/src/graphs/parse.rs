//! Line-oriented fixture format.
//!
//! ```text
//! # comment
//! vertex <name> star|up|var|internal
//! edge <from> <to> a=<real> r=<int>
//! contract <v1> <v2> ...        (one line per component; 1-based index in file order)
//! label <component> nil|down|diamond
//! ```
//!
//! Without `contract` lines every variable is its own component, numbered in
//! declaration order.

use super::{DiagramGraph, GraphError, Result, VertexKind};
use crate::chaos::{Contraction, Label, Labeling};

/// A graph with an optional contraction and labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFixture {
    pub graph: DiagramGraph,
    pub contraction: Contraction,
    pub labeling: Labeling,
}

fn err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn parse_key<T: std::str::FromStr>(line: usize, tok: Option<&str>, key: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {key}=<value>")))?;
    let value = tok
        .strip_prefix(key)
        .and_then(|s| s.strip_prefix('='))
        .ok_or_else(|| err(line, format!("expected {key}=<value>, found '{tok}'")))?;
    value.parse().map_err(|_| err(line, format!("cannot parse {key} value '{value}'")))
}

pub fn parse_fixture(text: &str) -> Result<GraphFixture> {
    let mut g = DiagramGraph::new();
    let mut blocks: Vec<(usize, Vec<String>)> = Vec::new();
    let mut labels: Vec<(usize, usize, Label)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let directive = toks.next().expect("non-empty line");
        match directive {
            "vertex" => {
                let name = toks.next().ok_or_else(|| err(line, "vertex needs a name"))?;
                let kind = match toks.next() {
                    Some("star") => VertexKind::Star,
                    Some("up") => VertexKind::Up,
                    Some("var") => VertexKind::Var,
                    Some("internal") => VertexKind::Internal,
                    Some(k) => return Err(err(line, format!("unknown vertex kind '{k}'"))),
                    None => return Err(err(line, "vertex needs a kind")),
                };
                g.add_vertex(name, kind).map_err(|e| err(line, e.to_string()))?;
            }
            "edge" => {
                let mut end = |what: &str| -> Result<usize> {
                    let name = toks.next().ok_or_else(|| err(line, format!("edge needs a {what} vertex")))?;
                    g.index_of(name).ok_or_else(|| err(line, format!("unknown vertex '{name}'")))
                };
                let from = end("source")?;
                let to = end("target")?;
                let a: f64 = parse_key(line, toks.next(), "a")?;
                let r: i32 = parse_key(line, toks.next(), "r")?;
                g.add_edge(from, to, a, r).map_err(|e| err(line, e.to_string()))?;
            }
            "contract" => {
                let names: Vec<String> = toks.by_ref().map(str::to_string).collect();
                if names.is_empty() {
                    return Err(err(line, "contract needs at least one vertex"));
                }
                blocks.push((line, names));
            }
            "label" => {
                let idx: usize = toks
                    .next()
                    .and_then(|s| s.parse().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| err(line, "label needs a 1-based component index"))?;
                let l = match toks.next() {
                    Some("nil") => Label::Nil,
                    Some("down") => Label::Down,
                    Some("diamond") => Label::Diamond,
                    Some(k) => return Err(err(line, format!("unknown label '{k}'"))),
                    None => return Err(err(line, "label needs a value")),
                };
                labels.push((line, idx - 1, l));
            }
            other => return Err(err(line, format!("unknown directive '{other}'"))),
        }
        if let Some(extra) = toks.next() {
            return Err(err(line, format!("unexpected token '{extra}'")));
        }
    }

    let vars = g.var_vertices();
    let var_pos = |line: usize, name: &str| -> Result<usize> {
        let v = g.index_of(name).ok_or_else(|| err(line, format!("unknown vertex '{name}'")))?;
        vars.iter().position(|&w| w == v).ok_or_else(|| err(line, format!("'{name}' is not a variable vertex")))
    };
    // File-order components, later mapped to the canonical order of `Contraction`.
    let file_blocks: Vec<(usize, Vec<usize>)> = if blocks.is_empty() {
        (0..vars.len()).map(|i| (0, vec![i])).collect()
    } else {
        blocks
            .iter()
            .map(|(line, names)| Ok((*line, names.iter().map(|n| var_pos(*line, n)).collect::<Result<Vec<_>>>()?)))
            .collect::<Result<_>>()?
    };
    let contraction = Contraction::new(vars.len(), file_blocks.iter().map(|(_, b)| b.clone()).collect())
        .map_err(|e| GraphError::Contract(e.to_string()))?;
    let mut canon = vec![Label::Nil; contraction.len()];
    for (line, idx, l) in labels {
        let (_, block) = file_blocks.get(idx).ok_or_else(|| err(line, format!("no component {} to label", idx + 1)))?;
        canon[contraction.component_of(block[0])] = l;
    }
    let labeling = Labeling::new(&contraction, canon).map_err(|e| GraphError::Contract(e.to_string()))?;
    Ok(GraphFixture { graph: g, contraction, labeling })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PSI2_CHERRY: &str = "\
# both leaves contracted
vertex star star
vertex up up
vertex x1 var
vertex x2 var
edge star up a=0 r=0
edge x1 up a=3 r=0
edge x2 up a=3 r=0
contract x2 x1
label 1 diamond
";

    #[test]
    fn parses_contraction_and_labels() {
        let f = parse_fixture(PSI2_CHERRY).unwrap();
        assert_eq!(f.graph.vertices().len(), 4);
        assert_eq!(f.graph.edges().len(), 3);
        assert_eq!(f.contraction.len(), 1);
        assert_eq!(f.labeling.get(0), Label::Diamond);
    }

    #[test]
    fn identity_without_contract_lines() {
        let text: String = PSI2_CHERRY
            .lines()
            .filter(|l| !l.starts_with("contract") && !l.starts_with("label"))
            .collect::<Vec<_>>()
            .join("\n");
        let f = parse_fixture(&text).unwrap();
        assert_eq!(f.contraction, Contraction::identity(2));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "vertex s star\nfrobnicate x\n";
        assert_eq!(
            parse_fixture(bad).unwrap_err(),
            GraphError::Parse { line: 2, msg: "unknown directive 'frobnicate'".into() }
        );
        let bad = "vertex s star\nvertex u up\nedge s u a=zero r=0\n";
        assert!(matches!(parse_fixture(bad), Err(GraphError::Parse { line: 3, .. })));
        let bad = "vertex s star\nvertex u up\nvertex x var\nvertex y var\ncontract x\n";
        assert!(matches!(parse_fixture(bad), Err(GraphError::Contract(_))));
        let bad = "vertex s star\nvertex x var\ncontract x\nlabel 1 diamond\n";
        assert!(matches!(parse_fixture(bad), Err(GraphError::Contract(_))));
    }
}
