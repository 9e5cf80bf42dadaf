//! Finite sparse random graphs sampled from a graphon, and their statistics.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{check_range, Error, Result};
use crate::graphon::Graphon;
use crate::seed::rng_from;

/// Where vertices sit on the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Independent uniform positions.
    IidUniform,
    /// Vertex `i` (zero-based) at `(i + 1) / n`.
    Equispaced,
}

/// How the sparsity factor is chosen for a graph on `n` vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sparsity {
    /// `rho = n^(-beta)` with `beta` in `(0, 1)`.
    Exponent(f64),
    /// A fixed `rho > 0`, e.g. 1 for dense sanity checks.
    Fixed(f64),
}

impl Sparsity {
    pub fn rho(self, n: usize) -> Result<f64> {
        match self {
            Sparsity::Exponent(beta) => {
                check_range("beta", beta, beta > 0.0 && beta < 1.0, "beta must lie in (0,1)")?;
                Ok((n as f64).powf(-beta))
            }
            Sparsity::Fixed(rho) => {
                check_range("rho", rho, rho > 0.0, "rho must be > 0")?;
                Ok(rho)
            }
        }
    }
}

/// An undirected simple graph whose vertices carry graphon positions.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    n: usize,
    positions: Vec<f64>,
    /// Sorted pairs `(u, v)` with `u < v`.
    edges: Vec<(usize, usize)>,
    rho: f64,
}

impl GraphSample {
    /// Graph with equispaced positions from an explicit edge list.
    pub fn from_edges(n: usize, edges: Vec<(usize, usize)>, rho: f64) -> Result<Self> {
        let positions = equispaced(n);
        Self::with_positions(positions, edges, rho)
    }

    pub fn with_positions(positions: Vec<f64>, edges: Vec<(usize, usize)>, rho: f64) -> Result<Self> {
        let n = positions.len();
        check_range("rho", rho, rho > 0.0, "rho must be > 0")?;
        if let Some(&x) = positions.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::OutOfRange {
                name: "position",
                value: x,
                bound: "positions must lie in [0,1]",
            });
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(Error::Invalid(format!("self-loop at vertex {u}")));
            }
            let hi = u.max(v);
            if hi >= n {
                return Err(Error::Index {
                    what: "vertex",
                    index: hi,
                    len: n,
                });
            }
            normalized.push((u.min(v), hi));
        }
        normalized.sort_unstable();
        let before = normalized.len();
        normalized.dedup();
        if normalized.len() != before {
            return Err(Error::Invalid("duplicate edge".into()));
        }
        Ok(Self {
            n,
            positions,
            edges: normalized,
            rho,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Neighbor lists, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Number of vertices with each degree.
    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for d in self.degrees() {
            *hist.entry(d).or_insert(0) += 1;
        }
        hist
    }

    /// `2 |E| / n^2`, or 0 for the graph without vertices.
    pub fn edge_density(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / (self.n as f64 * self.n as f64)
    }

    /// Writes the plain-text edge list: a `# n=.. rho=..` header, one
    /// `# pos i x_i` line per vertex, then `u v` per edge, zero-based.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# n={} rho={}", self.n, self.rho)?;
        for (i, x) in self.positions.iter().enumerate() {
            writeln!(out, "# pos {i} {x}")?;
        }
        for (u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut n = None;
        let mut rho = None;
        let mut positions = Vec::new();
        let mut edges = Vec::new();
        let bad = |line: &str| Error::Invalid(format!("malformed edge list line: {line:?}"));
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# pos ") {
                let mut it = rest.split_whitespace();
                let _idx = it.next().ok_or_else(|| bad(line))?;
                let x: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(line))?;
                positions.push(x);
            } else if let Some(rest) = line.strip_prefix("# ") {
                for field in rest.split_whitespace() {
                    match field.split_once('=') {
                        Some(("n", v)) => n = Some(v.parse::<usize>().map_err(|_| bad(line))?),
                        Some(("rho", v)) => rho = Some(v.parse::<f64>().map_err(|_| bad(line))?),
                        _ => return Err(bad(line)),
                    }
                }
            } else {
                let mut it = line.split_whitespace().map(|s| s.parse::<usize>());
                match (it.next(), it.next(), it.next()) {
                    (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                    _ => return Err(bad(line)),
                }
            }
        }
        let n = n.ok_or_else(|| Error::Invalid("edge list lacks `# n=` header".into()))?;
        let rho = rho.ok_or_else(|| Error::Invalid("edge list lacks `rho=` header".into()))?;
        if positions.len() != n {
            return Err(Error::DimensionMismatch {
                what: "edge list positions",
                expected: n,
                found: positions.len(),
            });
        }
        Self::with_positions(positions, edges, rho)
    }
}

fn equispaced(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / n as f64).collect()
}

/// Samples `G(n, W, rho)`: positions by `placement`, then each pair `i < j`
/// joined independently with probability `min(rho W(x_i, x_j), 1)`.
pub fn sample_graph(w: &Graphon, n: usize, sparsity: Sparsity, placement: Placement, seed: u64) -> Result<GraphSample> {
    if n == 0 {
        return Err(Error::Invalid("graph needs at least one vertex".into()));
    }
    let rho = sparsity.rho(n)?;
    let mut rng = rng_from(seed, &[]);
    let positions = match placement {
        Placement::Equispaced => equispaced(n),
        Placement::IidUniform => (0..n).map(|_| rng.random::<f64>()).collect(),
    };
    let mut edges = Vec::new();
    for i in 0..n {
        let xi = positions[i];
        for (j, &xj) in positions.iter().enumerate().skip(i + 1) {
            let p = (rho * w.value(xi, xj)).min(1.0);
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Ok(GraphSample {
        n,
        positions,
        edges,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> GraphSample {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        GraphSample::from_edges(n, edges, 1.0).unwrap()
    }

    #[test]
    fn dense_constant_gives_complete_graph() {
        let w = Graphon::constant(1.0).unwrap();
        let g = sample_graph(&w, 4, Sparsity::Fixed(1.0), Placement::IidUniform, 9).unwrap();
        assert_eq!(g.edges().len(), 6);
        assert_eq!(g, complete(4).with_positions_of(&g));
    }

    impl GraphSample {
        fn with_positions_of(mut self, other: &GraphSample) -> GraphSample {
            self.positions = other.positions.clone();
            self
        }
    }

    #[test]
    fn zero_graphon_gives_empty_graph() {
        let w = Graphon::constant(0.0).unwrap();
        let g = sample_graph(&w, 50, Sparsity::Exponent(0.5), Placement::IidUniform, 1).unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.edge_density(), 0.0);
    }

    #[test]
    fn histograms() {
        let k4 = complete(4);
        assert_eq!(k4.degree_histogram(), BTreeMap::from([(3, 4)]));
        assert_eq!(k4.edge_density(), 0.75);

        let empty = GraphSample::from_edges(5, vec![], 1.0).unwrap();
        assert_eq!(empty.degree_histogram(), BTreeMap::from([(0, 5)]));

        let path = GraphSample::from_edges(3, vec![(0, 1), (2, 1)], 1.0).unwrap();
        assert_eq!(path.degree_histogram(), BTreeMap::from([(1, 2), (2, 1)]));

        let single = GraphSample::from_edges(2, vec![(1, 0)], 1.0).unwrap();
        assert_eq!(single.edge_density(), 0.5);
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(GraphSample::from_edges(3, vec![(1, 1)], 1.0).is_err());
        assert!(GraphSample::from_edges(3, vec![(0, 1), (1, 0)], 1.0).is_err());
        assert!(GraphSample::from_edges(3, vec![(0, 3)], 1.0).is_err());
        assert!(GraphSample::from_edges(3, vec![], 0.0).is_err());
    }

    #[test]
    fn equispaced_positions_and_rho() {
        let w = Graphon::power_law(0.5).unwrap();
        let g = sample_graph(&w, 4, Sparsity::Exponent(0.5), Placement::Equispaced, 0).unwrap();
        assert_eq!(g.positions(), &[0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.rho(), 0.5);
        assert!(Sparsity::Exponent(1.0).rho(4).is_err());
        assert!(sample_graph(&w, 0, Sparsity::Fixed(1.0), Placement::Equispaced, 0).is_err());
    }

    #[test]
    fn adjacency_is_symmetric() {
        let path = GraphSample::from_edges(3, vec![(0, 1), (1, 2)], 1.0).unwrap();
        assert_eq!(path.adjacency(), vec![vec![1], vec![0, 2], vec![1]]);
    }

    #[test]
    fn edge_list_roundtrip() {
        let w = Graphon::power_law(0.3).unwrap();
        let g = sample_graph(&w, 40, Sparsity::Exponent(0.3), Placement::IidUniform, 5).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("# n=40 rho={}\n# pos 0 ", g.rho())));
        let back = GraphSample::read_edge_list(&buf[..]).unwrap();
        assert_eq!(back, g);
    }
}
