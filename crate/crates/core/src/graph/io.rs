//! Line-oriented edge-list text format.
//!
//! ```text
//! # nodes=5
//! 0 1
//! 1 2   # trailing comments are allowed
//! ```

use std::fs;
use std::path::Path;

use super::{normalize, Edge, Graph, NodeId};
use crate::error::{Error, Result};

/// A parsed graph together with what was discarded on the way in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

fn parse_header(line: &str) -> Option<&str> {
    line.trim()
        .strip_prefix('#')?
        .trim()
        .strip_prefix("nodes=")
        .map(str::trim)
}

/// Parses whitespace-separated `u v` pairs, one per line, without any graph
/// normalization. `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(NodeId, NodeId)>> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next_id = |what: &str| -> Result<NodeId> {
            let tok = fields.next().ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("missing {what} node id"),
            })?;
            tok.parse::<NodeId>().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("`{tok}` is not a nonnegative integer"),
            })
        };
        let u = next_id("first")?;
        let v = next_id("second")?;
        if let Some(extra) = fields.next() {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("unexpected trailing field `{extra}`"),
            });
        }
        pairs.push((u, v));
    }
    Ok(pairs)
}

/// Parses an edge list into a simple undirected graph.
///
/// `num_nodes` is `1 + max id` unless a leading `# nodes=N` header is
/// present. Self-loops and repeated edges are dropped and counted.
pub fn parse_edge_list(text: &str) -> Result<LoadedGraph> {
    let header = text.lines().find(|l| !l.trim().is_empty()).and_then(parse_header);
    let declared = match header {
        Some(n) => Some(n.parse::<usize>().map_err(|_| Error::Parse {
            line: 1,
            message: format!("bad node count `{n}` in header"),
        })?),
        None => None,
    };
    let pairs = parse_pairs(text)?;
    if pairs.is_empty() && declared.is_none() {
        return Err(Error::EmptyInput("edge list contains no edges".into()));
    }
    let max_id = pairs.iter().map(|&(u, v)| u.max(v)).max();
    let num_nodes = match (declared, max_id) {
        (Some(n), Some(m)) if m >= n => return Err(Error::NodeOutOfRange { id: m, num_nodes: n }),
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => unreachable!(),
    };
    if num_nodes == 0 {
        return Err(Error::EmptyInput("graph has no nodes".into()));
    }

    let mut self_loops = 0;
    let mut edges: Vec<Edge> = Vec::with_capacity(pairs.len());
    for (u, v) in pairs {
        if u == v {
            self_loops += 1;
        } else {
            edges.push(normalize(u, v));
        }
    }
    let before = edges.len();
    edges.sort_unstable();
    edges.dedup();
    let duplicates = before - edges.len();
    if self_loops > 0 {
        log::warn!("dropped {self_loops} self-loop(s) from edge list");
    }
    Ok(LoadedGraph {
        graph: Graph::from_sorted_unique(num_nodes, edges),
        self_loops_dropped: self_loops,
        duplicates_dropped: duplicates,
    })
}

/// Serializes with a `# nodes=N` header so isolated trailing nodes survive.
pub fn format_edge_list(graph: &Graph) -> String {
    let mut out = format!("# nodes={}\n", graph.num_nodes());
    out.push_str(&format_pairs(graph.edges()));
    out
}

pub fn format_pairs(pairs: &[(NodeId, NodeId)]) -> String {
    let mut out = String::with_capacity(pairs.len() * 10);
    for (u, v) in pairs {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn read_edge_list(path: &Path) -> Result<LoadedGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text)
}

pub fn write_edge_list(path: &Path, graph: &Graph) -> Result<()> {
    fs::write(path, format_edge_list(graph)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_simple_list() {
        let g = parse_edge_list("0 1\n1 2").unwrap().graph;
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn deduplicates_both_orientations() {
        let loaded = parse_edge_list("0 1\n1 0\n0 1").unwrap();
        assert_eq!(loaded.graph.num_nodes(), 2);
        assert_eq!(loaded.graph.edges(), &[(0, 1)]);
        assert_eq!(loaded.duplicates_dropped, 2);
    }

    #[test]
    fn drops_self_loops() {
        let loaded = parse_edge_list("3 3\n0 3").unwrap();
        assert_eq!(loaded.graph.num_nodes(), 4);
        assert_eq!(loaded.graph.edges(), &[(0, 3)]);
        assert_eq!(loaded.self_loops_dropped, 1);
    }

    #[test]
    fn header_and_comments() {
        let loaded = parse_edge_list("# nodes=6\n# citation graph\n0 1 # first\n\n2 3\n").unwrap();
        assert_eq!(loaded.graph.num_nodes(), 6);
        assert_eq!(loaded.graph.num_edges(), 2);
        assert!(parse_edge_list("# nodes=2\n0 5\n").is_err());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse_edge_list("0 1\n1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_edge_list("0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("-1 2\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse_edge_list(""), Err(Error::EmptyInput(_))));
        assert!(matches!(
            parse_edge_list("# just a comment\n"),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn format_round_trips() {
        let g = Graph::from_edges(5, [(0, 1), (3, 1)]).unwrap();
        let back = parse_edge_list(&format_edge_list(&g)).unwrap().graph;
        assert_eq!(back, g);
    }
}
