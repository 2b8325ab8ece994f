//! Simple undirected graphs, degeneracy orderings and embedding checks.
//!
//! Vertices are contiguous `0..n`. Adjacency lists are kept sorted, which
//! makes edge queries a binary search and keeps serialisation canonical.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an edge list, rejecting self-loops, duplicates
    /// and out-of-range endpoints. Line numbers in errors are 1-based edge
    /// positions.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (idx, (u, v)) in edges.into_iter().enumerate() {
            let line = idx + 1;
            for x in [u, v] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { line, index: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { line, vertex: u });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let g = Graph::from_adjacency_unsorted(adj);
        if let Some((u, v)) = g.first_duplicate() {
            return Err(Error::DuplicateEdge { line: 0, u, v });
        }
        Ok(g)
    }

    /// Wraps adjacency lists that are already symmetric and simple; lists are
    /// sorted here.
    pub(crate) fn from_adjacency_unsorted(mut adj: Vec<Vec<usize>>) -> Self {
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph { adj }
    }

    fn first_duplicate(&self) -> Option<(usize, usize)> {
        for (u, list) in self.adj.iter().enumerate() {
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Some((u.min(w[0]), u.max(w[0])));
            }
        }
        None
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Sorted neighbours of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adj.len() && v < self.adj.len() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let start = list.partition_point(|&v| v <= u);
            list[start..].iter().map(move |&v| (u, v))
        })
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Connectivity by BFS; the empty graph counts as connected.
    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Largest number of neighbours any vertex has before it in `order`.
    /// `order` must be a permutation of the vertices.
    pub fn max_back_degree(&self, order: &[usize]) -> usize {
        let pos = positions(order, self.vertex_count());
        order
            .iter()
            .map(|&v| self.adj[v].iter().filter(|&&w| pos[w] < pos[v]).count())
            .max()
            .unwrap_or(0)
    }
}

/// Inverse permutation: `pos[order[i]] = i`.
pub fn positions(order: &[usize], n: usize) -> Vec<usize> {
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    pos
}

/// Checks that `order` is a permutation of `0..n`.
pub fn is_permutation(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegeneracyResult {
    pub degeneracy: usize,
    /// `order[i]` is the i-th vertex; every vertex has at most `degeneracy`
    /// neighbours earlier in the order.
    pub order: Vec<usize>,
}

/// Min-degree peeling with a bucket queue. Ties go to the lowest vertex
/// index; the order is the reversed removal sequence.
pub fn degeneracy_order(g: &Graph) -> DegeneracyResult {
    let n = g.vertex_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut buckets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.max_degree() + 1];
    for v in 0..n {
        buckets[degree[v]].insert(v);
    }
    let mut removed = vec![false; n];
    let mut removal = Vec::with_capacity(n);
    let mut degeneracy = 0;
    let mut cursor = 0;
    for _ in 0..n {
        while buckets[cursor].is_empty() {
            cursor += 1;
        }
        let v = buckets[cursor].pop_first().expect("non-empty bucket");
        degeneracy = degeneracy.max(cursor);
        removed[v] = true;
        removal.push(v);
        for &w in g.neighbors(v) {
            if !removed[w] {
                buckets[degree[w]].remove(&w);
                degree[w] -= 1;
                buckets[degree[w]].insert(w);
            }
        }
        cursor = cursor.saturating_sub(1);
    }
    removal.reverse();
    DegeneracyResult {
        degeneracy,
        order: removal,
    }
}

pub fn max_degree(g: &Graph) -> usize {
    g.max_degree()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeProfileReport {
    /// Thresholds `k` where `#{v : deg(v) >= k} > 2 d n / k`.
    pub violations: Vec<usize>,
}

impl DegreeProfileReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Counts high-degree vertices against the `2 d n / k` bound that every
/// d-degenerate graph satisfies.
pub fn degree_profile_check(g: &Graph, d: usize) -> DegreeProfileReport {
    let n = g.vertex_count();
    let max = g.max_degree();
    // at_least[k] = #{v : deg(v) >= k}
    let mut at_least = vec![0usize; max + 2];
    for v in 0..n {
        at_least[g.degree(v)] += 1;
    }
    for k in (0..=max).rev() {
        at_least[k] += at_least[k + 1];
    }
    let violations = (1..=max).filter(|&k| at_least[k] * k > 2 * d * n).collect();
    DegreeProfileReport { violations }
}

/// Per guest vertex, the host vertex it is mapped to.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmbeddingMap {
    assignment: Vec<Option<usize>>,
}

impl EmbeddingMap {
    pub fn unassigned(guest_count: usize) -> Self {
        EmbeddingMap {
            assignment: vec![None; guest_count],
        }
    }

    pub fn from_assignment(assignment: Vec<Option<usize>>) -> Self {
        EmbeddingMap { assignment }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn get(&self, guest: usize) -> Option<usize> {
        self.assignment[guest]
    }

    pub fn set(&mut self, guest: usize, host: usize) {
        self.assignment[guest] = Some(host);
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    /// One `guest host` line per assigned guest vertex.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (g, h) in self.assignment.iter().enumerate() {
            if let Some(h) = h {
                let _ = writeln!(out, "{g} {h}");
            }
        }
        out
    }

    /// Parses `guest host` pairs for a guest graph with `guest_count`
    /// vertices. Guests that do not appear stay unassigned.
    pub fn from_text(text: &str, guest_count: usize) -> Result<Self> {
        let mut map = EmbeddingMap::unassigned(guest_count);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            let (g, h) = parse_pair(raw, line)?;
            if g >= guest_count {
                return Err(Error::IndexOutOfRange {
                    line,
                    index: g,
                    n: guest_count,
                });
            }
            if map.assignment[g].is_some() {
                return Err(Error::Malformed {
                    line,
                    reason: format!("guest {g} assigned twice"),
                });
            }
            map.assignment[g] = Some(h);
        }
        Ok(map)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddingViolation {
    Unassigned {
        guest: usize,
    },
    HostOutOfRange {
        guest: usize,
        host: usize,
    },
    NotInjective {
        first: usize,
        second: usize,
        host: usize,
    },
    MissingEdge {
        u: usize,
        v: usize,
    },
    SizeMismatch {
        map: usize,
        guest: usize,
    },
}

impl fmt::Display for EmbeddingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbeddingViolation::Unassigned { guest } => write!(f, "unassigned vertex {guest}"),
            EmbeddingViolation::HostOutOfRange { guest, host } => {
                write!(f, "guest {guest} mapped to missing host vertex {host}")
            }
            EmbeddingViolation::NotInjective {
                first,
                second,
                host,
            } => write!(
                f,
                "not injective: guests {first} and {second} both map to {host}"
            ),
            EmbeddingViolation::MissingEdge { u, v } => {
                write!(f, "guest edge {u} {v} has no host edge")
            }
            EmbeddingViolation::SizeMismatch { map, guest } => {
                write!(f, "map covers {map} guests, guest graph has {guest}")
            }
        }
    }
}

impl std::error::Error for EmbeddingViolation {}

/// Checks that `m` maps `h` injectively onto a subgraph of `host`.
pub fn verify_embedding(
    h: &Graph,
    host: &Graph,
    m: &EmbeddingMap,
) -> std::result::Result<(), EmbeddingViolation> {
    if m.len() != h.vertex_count() {
        return Err(EmbeddingViolation::SizeMismatch {
            map: m.len(),
            guest: h.vertex_count(),
        });
    }
    let mut owner = vec![usize::MAX; host.vertex_count()];
    for g in 0..h.vertex_count() {
        let t = m
            .get(g)
            .ok_or(EmbeddingViolation::Unassigned { guest: g })?;
        if t >= host.vertex_count() {
            return Err(EmbeddingViolation::HostOutOfRange { guest: g, host: t });
        }
        if owner[t] != usize::MAX {
            return Err(EmbeddingViolation::NotInjective {
                first: owner[t],
                second: g,
                host: t,
            });
        }
        owner[t] = g;
    }
    for (u, v) in h.edges() {
        let (a, b) = (m.get(u).unwrap(), m.get(v).unwrap());
        if !host.has_edge(a, b) {
            return Err(EmbeddingViolation::MissingEdge { u, v });
        }
    }
    Ok(())
}

fn parse_pair(raw: &str, line: usize) -> Result<(usize, usize)> {
    let mut it = raw.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or_else(|| Error::Malformed {
            line,
            reason: "expected two integers".into(),
        })?;
        tok.parse().map_err(|_| Error::Malformed {
            line,
            reason: format!("not a non-negative integer: {tok:?}"),
        })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::Malformed {
            line,
            reason: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}

/// Parses the edge-list format: a header `n m` followed by `m` lines `u v`.
/// Blank lines are ignored.
pub fn read_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Malformed {
        line: 1,
        reason: "missing header".into(),
    })?;
    let (n, m) = parse_pair(header, hline)?;
    let mut adj = vec![Vec::new(); n];
    let mut present = HashSet::new();
    let mut seen = 0;
    for (line, raw) in lines {
        let (u, v) = parse_pair(raw, line)?;
        for x in [u, v] {
            if x >= n {
                return Err(Error::IndexOutOfRange { line, index: x, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop { line, vertex: u });
        }
        let key = (u.min(v), u.max(v));
        if !present.insert(key) {
            return Err(Error::DuplicateEdge {
                line,
                u: key.0,
                v: key.1,
            });
        }
        adj[u].push(v);
        adj[v].push(u);
        seen += 1;
    }
    if seen != m {
        return Err(Error::Malformed {
            line: hline,
            reason: format!("header announces {m} edges, found {seen}"),
        });
    }
    Ok(Graph::from_adjacency_unsorted(adj))
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(16 * (g.edge_count() + 1));
    let _ = writeln!(out, "{} {}", g.vertex_count(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
