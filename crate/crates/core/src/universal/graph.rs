use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest graph accepted by the dense solver.
pub const MAX_VERTICES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphKind {
    /// Cycle `0 -> 1 -> ... -> n-1 -> 0`.
    Ring { n: usize },
    /// Periodic `rows x cols` grid with edges along both directions.
    Torus { rows: usize, cols: usize },
}

/// Finite connected oriented graph. Every vertex has exactly one outgoing
/// edge per direction (one for a ring, two for a torus); edge
/// `dir * vertices + v` leaves `v` along `dir`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    kind: GraphKind,
    vertices: usize,
    edges: Vec<(usize, usize)>,
    vertex_weights: Vec<f64>,
    edge_weights: Vec<f64>,
}

impl Graph {
    pub fn ring(n: usize) -> Result<Graph> {
        if n < 3 {
            return Err(Error::Config(format!("a ring needs at least 3 vertices, got {n}")));
        }
        let edges = (0..n).map(|v| (v, (v + 1) % n)).collect();
        Graph::build(GraphKind::Ring { n }, n, edges)
    }

    pub fn torus(rows: usize, cols: usize) -> Result<Graph> {
        if rows < 3 || cols < 3 {
            return Err(Error::Config(format!("a torus graph needs at least 3x3 vertices, got {rows}x{cols}")));
        }
        let n = rows * cols;
        let mut edges = Vec::with_capacity(2 * n);
        for v in 0..n {
            let (i, j) = (v / cols, v % cols);
            edges.push((v, ((i + 1) % rows) * cols + j));
        }
        for v in 0..n {
            let (i, j) = (v / cols, v % cols);
            edges.push((v, i * cols + (j + 1) % cols));
        }
        Graph::build(GraphKind::Torus { rows, cols }, n, edges)
    }

    fn build(kind: GraphKind, vertices: usize, edges: Vec<(usize, usize)>) -> Result<Graph> {
        if vertices > MAX_VERTICES {
            return Err(Error::SizeLimit(format!("graphs are limited to {MAX_VERTICES} vertices, got {vertices}")));
        }
        let e = edges.len();
        let g = Graph { kind, vertices, edges, vertex_weights: vec![1.0; vertices], edge_weights: vec![1.0; e] };
        g.check_connected()?;
        Ok(g)
    }

    /// `ring:N` or `torus:RxC`.
    pub fn parse(spec: &str) -> Result<Graph> {
        let bad = || Error::Config(format!("bad graph `{spec}` (expected ring:N or torus:RxC)"));
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "ring" => Graph::ring(rest.trim().parse().map_err(|_| bad())?),
            "torus" => {
                let (r, c) = rest.split_once('x').ok_or_else(bad)?;
                Graph::torus(r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?)
            }
            _ => Err(bad()),
        }
    }

    /// Replaces the inner-product weights; all must be positive.
    pub fn with_weights(mut self, vertex: Vec<f64>, edge: Vec<f64>) -> Result<Graph> {
        if vertex.len() != self.vertices || edge.len() != self.edges.len() {
            return Err(Error::Shape("weight vectors do not match the graph".into()));
        }
        if vertex.iter().chain(&edge).any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config("weights must be positive".into()));
        }
        self.vertex_weights = vertex;
        self.edge_weights = edge;
        Ok(self)
    }

    fn check_connected(&self) -> Result<()> {
        let mut adj = vec![Vec::new(); self.vertices];
        for &(t, h) in &self.edges {
            adj[t].push(h);
            adj[h].push(t);
        }
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::Config("graph is not connected".into()))
        }
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `(tail, head)`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_weight(&self, v: usize) -> f64 {
        self.vertex_weights[v]
    }

    pub fn edge_weight(&self, e: usize) -> f64 {
        self.edge_weights[e]
    }

    /// Number of edge directions (1 for a ring, 2 for a torus).
    pub fn directions(&self) -> usize {
        match self.kind {
            GraphKind::Ring { .. } => 1,
            GraphKind::Torus { .. } => 2,
        }
    }

    /// The edge leaving `v` along `dir`.
    pub fn out_edge(&self, v: usize, dir: usize) -> usize {
        dir * self.vertices + v
    }

    /// Corners `v, v + e0, v + e0 + e1, v + e1` of the square at `v`, as the
    /// edges `(e0 at v, e1 at v+e0, e0 at v+e1, e1 at v)`; `None` on a ring.
    pub fn square(&self, v: usize) -> Option<[usize; 4]> {
        match self.kind {
            GraphKind::Ring { .. } => None,
            GraphKind::Torus { .. } => {
                let v0 = self.edge(self.out_edge(v, 0)).1;
                let v1 = self.edge(self.out_edge(v, 1)).1;
                Some([self.out_edge(v, 0), self.out_edge(v0, 1), self.out_edge(v1, 0), self.out_edge(v, 1)])
            }
        }
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GraphKind::Ring { n } => write!(f, "ring:{n}"),
            GraphKind::Torus { rows, cols } => write!(f, "torus:{rows}x{cols}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!(Graph::parse("ring:8").unwrap().vertices(), 8);
        let t = Graph::parse("torus:3x4").unwrap();
        assert_eq!((t.vertices(), t.edge_count()), (12, 24));
        assert!(matches!(Graph::parse("ring:2"), Err(Error::Config(_))));
        assert!(Graph::parse("cube:3").is_err());
        assert_eq!(Graph::parse("torus:3x4").unwrap().to_string(), "torus:3x4");
    }

    #[test]
    fn square_closes() {
        let t = Graph::torus(3, 4).unwrap();
        let [a, b, c, d] = t.square(5).unwrap();
        assert_eq!(t.edge(a).0, 5);
        assert_eq!(t.edge(a).1, t.edge(b).0);
        assert_eq!(t.edge(b).1, t.edge(c).1);
        assert_eq!(t.edge(c).0, t.edge(d).1);
        assert_eq!(t.edge(d).0, 5);
    }
}
