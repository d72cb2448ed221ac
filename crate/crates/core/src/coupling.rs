//! Physical qubit connectivity.
//!
//! A [`CouplingMap`] is an undirected, connected graph over physical qubits.
//! Two-qubit gates are only legal between adjacent qubits; the all-pairs
//! distance table is computed once at construction.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct CouplingMap {
    n_qubits: usize,
    /// Sorted, each pair stored as `(low, high)`.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    distance: Vec<Vec<u32>>,
}

impl fmt::Debug for CouplingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CouplingMap")
            .field("n_qubits", &self.n_qubits)
            .field("edges", &self.edges)
            .finish()
    }
}

impl CouplingMap {
    /// Builds a map from an edge list. Edges are undirected; duplicates are
    /// merged. Fails on self-loops, out-of-range indices or a disconnected graph.
    pub fn new(n_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidCoupling("zero qubits".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n_qubits || b >= n_qubits {
                return Err(Error::QubitOutOfRange { index: a.max(b), n_qubits });
            }
            if a == b {
                return Err(Error::InvalidCoupling(format!("self-loop on qubit {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n_qubits];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let distance = (0..n_qubits).map(|s| bfs(&adjacency, s)).collect::<Vec<_>>();
        if distance[0].iter().any(|&d| d == u32::MAX) {
            return Err(Error::Disconnected);
        }
        Ok(Self { n_qubits, edges, adjacency, distance })
    }

    /// Five-qubit T-shaped Falcon layout: 0–1–2 with a branch 1–3–4.
    ///
    /// Reconstructed from its average pair distance of 1.8; the vendor edge
    /// list is not reproduced here.
    pub fn falcon_5t() -> Self {
        Self::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).expect("static preset")
    }

    pub fn line(n_qubits: usize) -> Self {
        Self::new(n_qubits, (1..n_qubits).map(|q| (q - 1, q))).expect("line is connected")
    }

    pub fn ring(n_qubits: usize) -> Self {
        let mut edges: Vec<_> = (1..n_qubits).map(|q| (q - 1, q)).collect();
        if n_qubits > 2 {
            edges.push((n_qubits - 1, 0));
        }
        Self::new(n_qubits, edges).expect("ring is connected")
    }

    pub fn complete(n_qubits: usize) -> Self {
        let edges = (0..n_qubits).flat_map(|a| (a + 1..n_qubits).map(move |b| (a, b)));
        Self::new(n_qubits, edges).expect("complete graph is connected")
    }

    /// Resolves a preset name: `falcon-5t`, `line-N`, `ring-N`, `complete-N`
    /// (a `:` separator is accepted as well).
    pub fn preset(name: &str) -> Result<Self> {
        let name = name.trim().to_ascii_lowercase();
        if name == "falcon-5t" || name == "falcon5t" {
            return Ok(Self::falcon_5t());
        }
        let (kind, size) = name
            .split_once(['-', ':'])
            .ok_or_else(|| Error::InvalidCoupling(format!("unknown preset {name:?}")))?;
        let n: usize = size
            .parse()
            .map_err(|_| Error::InvalidCoupling(format!("bad preset size in {name:?}")))?;
        if n == 0 || n > 64 {
            return Err(Error::InvalidCoupling(format!("preset size {n} out of range")));
        }
        match kind {
            "line" | "linear" | "chain" => Ok(Self::line(n)),
            "ring" => Ok(Self::ring(n)),
            "complete" | "full" => Ok(Self::complete(n)),
            _ => Err(Error::InvalidCoupling(format!("unknown preset {name:?}"))),
        }
    }

    /// Loads either a preset name or an edge-list file.
    pub fn load(spec: &str) -> Result<Self> {
        let path = Path::new(spec);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            text.parse()
        } else {
            Self::preset(spec)
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        a < self.n_qubits && b < self.n_qubits && self.distance[a][b] == 1
    }

    pub fn distance(&self, a: usize, b: usize) -> u32 {
        self.distance[a][b]
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n_qubits * (self.n_qubits - 1) / 2
    }

    /// Shortest path from `from` to `to`, both endpoints included. Ties are
    /// broken toward lower-numbered neighbours so routing is deterministic.
    pub fn shortest_path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = *self.adjacency[cur]
                .iter()
                .find(|&&nb| self.distance[nb][to] + 1 == self.distance[cur][to])
                .expect("connected graph has a descending neighbour");
            path.push(cur);
        }
        path
    }

    /// Mean shortest-path length over all unordered pairs of qubits.
    /// A single-qubit map has no pairs and reports 0.
    pub fn average_distance(&self) -> f64 {
        let n = self.n_qubits;
        if n < 2 {
            return 0.0;
        }
        let total: u64 = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .map(|(a, b)| u64::from(self.distance[a][b]))
            .sum();
        total as f64 / (n * (n - 1) / 2) as f64
    }

    /// Bounds on the physical CNOTs needed per logical CNOT: at least the
    /// average distance, at most one CNOT plus a SWAP chain there and back
    /// (three CNOTs per SWAP).
    pub fn lph_bounds(&self) -> (f64, f64) {
        let d = self.average_distance().max(1.0);
        (d, 1.0 + 6.0 * (d - 1.0))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for (a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }
}

fn bfs(adjacency: &[Vec<usize>], source: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adjacency.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

impl FromStr for CouplingMap {
    type Err = Error;

    /// Parses `qubits <n>` followed by one `<a> <b>` edge per line. Blank
    /// lines and `#` comments are ignored.
    fn from_str(text: &str) -> Result<Self> {
        let mut n_qubits = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match (n_qubits, fields.as_slice()) {
                (None, ["qubits", n]) => {
                    let n: usize =
                        n.parse().map_err(|_| Error::parse(line_no, format!("bad qubit count {n:?}")))?;
                    if n == 0 || n > 1024 {
                        return Err(Error::parse(line_no, format!("qubit count {n} out of range")));
                    }
                    n_qubits = Some(n);
                }
                (None, _) => return Err(Error::parse(line_no, "expected `qubits <n>` header")),
                (Some(n), [a, b]) => {
                    let parse = |s: &str| -> Result<usize> {
                        let v: usize =
                            s.parse().map_err(|_| Error::parse(line_no, format!("bad qubit index {s:?}")))?;
                        if v >= n {
                            return Err(Error::parse(line_no, format!("qubit {v} out of range for {n} qubits")));
                        }
                        Ok(v)
                    };
                    let (a, b) = (parse(a)?, parse(b)?);
                    if a == b {
                        return Err(Error::parse(line_no, format!("self-loop on qubit {a}")));
                    }
                    edges.push((a, b));
                }
                (Some(_), _) => return Err(Error::parse(line_no, "expected `<a> <b>` edge")),
            }
        }
        let n = n_qubits.ok_or_else(|| Error::parse(0, "missing `qubits <n>` header"))?;
        CouplingMap::new(n, edges)
    }
}
