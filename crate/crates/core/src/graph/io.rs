use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
pub(super) struct GraphWire {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree_bound: Option<usize>,
}

impl TryFrom<GraphWire> for Graph {
    type Error = Error;

    fn try_from(w: GraphWire) -> Result<Self> {
        let edges = w.edges.into_iter().map(|[u, v]| (u, v)).collect();
        match w.degree_bound {
            Some(d) => Graph::new(w.n, edges, d),
            None => Graph::with_observed_bound(w.n, edges),
        }
    }
}

impl From<Graph> for GraphWire {
    fn from(g: Graph) -> Self {
        GraphWire { n: g.n, edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(), degree_bound: Some(g.degree_bound) }
    }
}

impl Graph {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Edge-list text: `# n=<int>`, `# degree_bound=<int>`, then one `u v`
    /// line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("# n={}\n# degree_bound={}\n", self.n, self.degree_bound);
        for &(u, v) in &self.edges {
            writeln!(s, "{u} {v}").unwrap();
        }
        s
    }

    /// Parses edge-list text. The `degree_bound` header is optional and
    /// defaults to the observed maximum degree; blank lines are ignored.
    pub fn from_edge_list(s: &str) -> Result<Self> {
        let mut n = None;
        let mut bound = None;
        let mut edges = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: {line:?}", lineno + 1));
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("n=") {
                    n = Some(v.trim().parse::<usize>().map_err(|_| bad("bad vertex count"))?);
                } else if let Some(v) = rest.strip_prefix("degree_bound=") {
                    bound = Some(v.trim().parse::<usize>().map_err(|_| bad("bad degree bound"))?);
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(bad("expected `u v`"));
            };
            let u = a.parse().map_err(|_| bad("bad vertex"))?;
            let v = b.parse().map_err(|_| bad("bad vertex"))?;
            edges.push((u, v));
        }
        let n = n.ok_or_else(|| Error::Parse("missing `# n=` header".into()))?;
        match bound {
            Some(d) => Graph::new(n, edges, d),
            None => Graph::with_observed_bound(n, edges),
        }
    }

    /// Reads `.json` by extension, anything else as an edge list.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_edge_list(&text)
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = if path.extension().is_some_and(|e| e == "json") { self.to_json() } else { self.to_edge_list() };
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_exact() {
        let g = Graph::new(4, vec![(2, 1), (0, 3), (1, 0)], 3).unwrap();
        let s = g.to_json();
        assert_eq!(s, r#"{"n":4,"edges":[[2,1],[0,3],[1,0]],"degree_bound":3}"#);
        let h = Graph::from_json(&s).unwrap();
        assert_eq!(g, h);
        assert_eq!(h.to_json(), s);
    }

    #[test]
    fn edge_list_round_trip_is_exact() {
        let g = Graph::cycle(5).unwrap();
        let s = g.to_edge_list();
        let h = Graph::from_edge_list(&s).unwrap();
        assert_eq!(g, h);
        assert_eq!(h.to_edge_list(), s);
    }

    #[test]
    fn missing_bound_uses_observed_degree() {
        let g = Graph::from_edge_list("# n=3\n0 1\n1 2\n").unwrap();
        assert_eq!(g.degree_bound(), 2);
        let g = Graph::from_json(r#"{"n":3,"edges":[[0,1]]}"#).unwrap();
        assert_eq!(g.degree_bound(), 1);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Graph::from_edge_list("0 1\n"), Err(Error::Parse(_))));
        assert!(matches!(Graph::from_edge_list("# n=2\n0 x\n"), Err(Error::Parse(_))));
        assert!(matches!(Graph::from_edge_list("# n=2\n0 0\n"), Err(Error::SelfLoop(0))));
        assert!(matches!(Graph::from_json(r#"{"n":2,"edges":[[0,1],[1,0]]}"#), Err(Error::Json(_))));
    }
}
