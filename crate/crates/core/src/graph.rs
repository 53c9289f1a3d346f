//! Immutable undirected graphs in compressed sparse row form.
//!
//! Graphs are simple: no self-loops, no multi-edges, unweighted. Self-loops
//! only ever appear in operators built from a graph (see [`crate::operator`]).

use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Result, RfpError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
}

impl Graph {
    /// Builds a graph on `n` nodes from undirected edges.
    ///
    /// Both orientations and repeated pairs collapse to one edge.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        for &(u, v) in edges {
            if u >= n {
                return Err(RfpError::NodeOutOfBounds { id: u, n });
            }
            if v >= n {
                return Err(RfpError::NodeOutOfBounds { id: v, n });
            }
            if u == v {
                return Err(RfpError::SelfLoop(u));
            }
        }

        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }

        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(2 * edges.len());
        row_offsets.push(0);
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
            col_indices.extend_from_slice(row);
            row_offsets.push(col_indices.len());
        }

        Ok(Self {
            n,
            row_offsets,
            col_indices,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row_offsets[v + 1] - self.row_offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }
}

/// Parses a whitespace separated edge list.
///
/// Lines starting with `#` and blank lines are skipped. An optional header
/// line `n <N>` (before any edge) pins the node count; otherwise the node
/// count is one more than the largest id seen.
pub fn load_edge_list<R: BufRead>(source: R) -> Result<Graph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_id: Option<usize> = None;

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() == 2 && fields[0] == "n" {
            if declared.is_some() || !edges.is_empty() {
                return Err(RfpError::Parse {
                    line: line_no,
                    message: "node-count header must precede all edges".into(),
                });
            }
            let count = fields[1].parse::<usize>().map_err(|_| RfpError::Parse {
                line: line_no,
                message: format!("invalid node count {:?}", fields[1]),
            })?;
            declared = Some(count);
            continue;
        }
        if fields.len() != 2 {
            return Err(RfpError::Parse {
                line: line_no,
                message: format!("expected two node ids, found {:?}", trimmed),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| RfpError::Parse {
                line: line_no,
                message: format!("invalid node id {:?}", s),
            })
        };
        let (u, v) = (parse(fields[0])?, parse(fields[1])?);
        if u == v {
            return Err(RfpError::SelfLoop(u));
        }
        if let Some(n) = declared {
            if u.max(v) >= n {
                return Err(RfpError::NodeOutOfBounds { id: u.max(v), n });
            }
        }
        max_id = Some(max_id.map_or(u.max(v), |m: usize| m.max(u).max(v)));
        edges.push((u, v));
    }

    let n = declared.unwrap_or_else(|| max_id.map_or(0, |m| m + 1));
    Graph::from_edges(n, &edges)
}

/// Erdős–Rényi G(n, p).
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("generated edges are valid")
}

/// Maximum number of restarts for [`random_regular`].
pub const REGULAR_RETRY_CAP: usize = 100;

/// Uniform-ish random `degree`-regular simple graph via stub pairing.
///
/// Stubs are paired one at a time; a pairing that would create a self-loop or
/// a multi-edge is redrawn a bounded number of times, and a stuck pairing
/// restarts from scratch. Fails after [`REGULAR_RETRY_CAP`] restarts.
pub fn random_regular<R: Rng + ?Sized>(n: usize, degree: usize, rng: &mut R) -> Result<Graph> {
    if degree >= n || !(n * degree).is_multiple_of(2) {
        return Err(RfpError::OutOfRange(format!(
            "no simple {degree}-regular graph on {n} nodes"
        )));
    }
    'attempt: for _ in 0..REGULAR_RETRY_CAP {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
        stubs.shuffle(rng);
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::with_capacity(degree); n];
        let mut edges = Vec::with_capacity(n * degree / 2);
        while !stubs.is_empty() {
            let mut paired = false;
            for _ in 0..(4 * stubs.len()).max(16) {
                let i = rng.gen_range(0..stubs.len());
                let j = rng.gen_range(0..stubs.len());
                let (u, v) = (stubs[i], stubs[j]);
                if i == j || u == v || adjacency[u].contains(&v) {
                    continue;
                }
                adjacency[u].push(v);
                adjacency[v].push(u);
                edges.push((u, v));
                let (hi, lo) = (i.max(j), i.min(j));
                stubs.swap_remove(hi);
                stubs.swap_remove(lo);
                paired = true;
                break;
            }
            if !paired {
                continue 'attempt;
            }
        }
        return Graph::from_edges(n, &edges);
    }
    Err(RfpError::OutOfRange(format!(
        "failed to sample a {degree}-regular graph on {n} nodes after {REGULAR_RETRY_CAP} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn parse(s: &str) -> Result<Graph> {
        load_edge_list(s.as_bytes())
    }

    #[test]
    fn path_from_text() {
        let g = parse("0 1\n1 2\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.row_offsets()[3], 4);
    }

    #[test]
    fn duplicates_collapse() {
        let g = parse("0 1\n1 0\n0 1\n").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_loop_rejected() {
        assert_eq!(parse("0 0\n"), Err(RfpError::SelfLoop(0)));
    }

    #[test]
    fn header_comments_and_blank_lines() {
        let g = parse("# a comment\nn 5\n\n0 1\n   \n# more\n3 4\n").unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(2), 0);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse("0 1\n1 x\n") {
            Err(RfpError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse("0 1 2\n") {
            Err(RfpError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn id_beyond_header_is_bounds_error() {
        assert_eq!(
            parse("n 3\n0 3\n"),
            Err(RfpError::NodeOutOfBounds { id: 3, n: 3 })
        );
    }

    #[test]
    fn build_triangle_and_cycle() {
        let k3 = Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!((0..3).all(|v| k3.degree(v) == 2));
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(c4.neighbors(0), &[1, 3]);
        assert_eq!(c4.edge_count(), 4);
        let empty = Graph::from_edges(2, &[]).unwrap();
        assert_eq!(empty.edge_count(), 0);
        assert_eq!(empty.degrees(), vec![0, 0]);
    }

    #[test]
    fn build_rejects_bad_pairs() {
        assert!(matches!(
            Graph::from_edges(2, &[(0, 2)]),
            Err(RfpError::NodeOutOfBounds { .. })
        ));
        assert_eq!(Graph::from_edges(2, &[(1, 1)]), Err(RfpError::SelfLoop(1)));
    }

    #[test]
    fn degrees_of_small_graphs() {
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.degrees(), vec![1, 2, 1]);
        let k3 = Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(k3.degrees(), vec![2, 2, 2]);
    }

    #[test]
    fn regular_graphs_are_simple_and_regular() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(n, d) in &[(10, 3), (64, 4), (200, 8)] {
            let g = random_regular(n, d, &mut rng).unwrap();
            assert!(g.degrees().iter().all(|&x| x == d));
            assert_eq!(g.edge_count(), n * d / 2);
        }
        assert!(random_regular(5, 3, &mut rng).is_err());
    }
}
