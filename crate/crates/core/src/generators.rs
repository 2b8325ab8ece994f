//! Guest graph generators. Every generator builds its graph so that the
//! natural vertex order `0..n` is a degeneracy order of the requested `d`.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackDegreeMode {
    /// Every vertex takes `min(d, i)` back-neighbours.
    #[default]
    Full,
    /// Back-degree uniform in `0..=min(d, i)`.
    Varied,
}

/// SplitMix64 step; used to derive per-instance seeds.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gen_random_degenerate(n: usize, d: usize, seed: u64, mode: BackDegreeMode) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![Vec::new(); n];
    for i in 1..n {
        let cap = d.min(i);
        let count = match mode {
            BackDegreeMode::Full => cap,
            BackDegreeMode::Varied => rng.gen_range(0..=cap),
        };
        for u in sample(&mut rng, i, count) {
            adj[i].push(u);
            adj[u].push(i);
        }
    }
    Graph::from_adjacency_unsorted(adj)
}

/// Per step `i >= 1`: how many earlier vertices were eligible (degree at
/// most `2d`) and how many were joined.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundedDegreeTrace {
    pub eligible: Vec<usize>,
    pub chosen: Vec<usize>,
}

/// Connected graphs with maximum degree at most `2d + 1` whose natural order
/// has back-degree at most `d`: vertex `i` joins between 1 and `d` earlier
/// vertices whose current degree is at most `2d`.
pub fn gen_bounded_degree_degenerate(n: usize, d: usize, seed: u64) -> Graph {
    gen_bounded_degree_degenerate_traced(n, d, seed).0
}

pub fn gen_bounded_degree_degenerate_traced(
    n: usize,
    d: usize,
    seed: u64,
) -> (Graph, BoundedDegreeTrace) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut trace = BoundedDegreeTrace::default();
    let cap = 2 * d;
    for i in 1..n {
        let mut eligible: Vec<usize> = (0..i).filter(|&u| adj[u].len() <= cap).collect();
        trace.eligible.push(eligible.len());
        assert!(!eligible.is_empty(), "vertex i - 1 always has degree <= d");
        let count = rng.gen_range(1..=d.min(eligible.len()));
        for _ in 0..count {
            // joining u only raises u's degree, and u leaves the pool, so the
            // remaining pool stays eligible
            let pick = eligible.swap_remove(rng.gen_range(0..eligible.len()));
            debug_assert!(adj[pick].len() <= cap);
            adj[i].push(pick);
            adj[pick].push(i);
        }
        trace.chosen.push(count);
    }
    (Graph::from_adjacency_unsorted(adj), trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalFamily {
    /// `K_{1, n-1}`.
    Star,
    /// `K_{d, n-d}`; the `d` hubs are vertices `0..d`.
    CompleteBipartite,
    /// Complete `d`-ary tree on `n` vertices in BFS numbering.
    DAryTree,
}

pub fn gen_extremal(family: ExtremalFamily, n: usize, d: usize) -> Result<Graph> {
    match family {
        ExtremalFamily::Star => {
            if n == 0 {
                return Err(Error::InvalidFamily("star needs n >= 1".into()));
            }
            Graph::from_edges(n, (1..n).map(|v| (0, v)))
        }
        ExtremalFamily::CompleteBipartite => {
            if d == 0 || n <= d {
                return Err(Error::InvalidFamily(format!(
                    "complete_bipartite needs 1 <= d < n (got d = {d}, n = {n})"
                )));
            }
            Graph::from_edges(n, (0..d).flat_map(|u| (d..n).map(move |v| (u, v))))
        }
        ExtremalFamily::DAryTree => {
            if d == 0 {
                return Err(Error::InvalidFamily("d_ary_tree needs d >= 1".into()));
            }
            Graph::from_edges(n, (1..n).map(|v| ((v - 1) / d, v)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    RandomDegenerate {
        #[serde(default)]
        mode: BackDegreeMode,
    },
    BoundedDegree,
    Star,
    CompleteBipartite,
    DAryTree,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::RandomDegenerate { mode } => match mode {
                BackDegreeMode::Full => write!(f, "random_degenerate_full"),
                BackDegreeMode::Varied => write!(f, "random_degenerate_varied"),
            },
            Family::BoundedDegree => write!(f, "bounded_degree"),
            Family::Star => write!(f, "star"),
            Family::CompleteBipartite => write!(f, "complete_bipartite"),
            Family::DAryTree => write!(f, "d_ary_tree"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n: usize,
    pub d: usize,
    pub family: Family,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.count == 0 {
            return Err(Error::InvalidFamily(format!(
                "corpus needs n, d, count >= 1 (got n = {}, d = {}, count = {})",
                self.n, self.d, self.count
            )));
        }
        if matches!(self.family, Family::BoundedDegree) && self.n < 2 {
            return Err(Error::InvalidFamily("bounded_degree needs n >= 2".into()));
        }
        if matches!(self.family, Family::CompleteBipartite) && self.n <= self.d {
            return Err(Error::InvalidFamily(
                "complete_bipartite needs n > d".into(),
            ));
        }
        Ok(())
    }

    /// Instance `index` of the corpus; seeded by `mix_seed(seed, index)`.
    pub fn instance(&self, index: usize) -> Result<Graph> {
        let seed = mix_seed(self.seed, index as u64);
        match self.family {
            Family::RandomDegenerate { mode } => {
                Ok(gen_random_degenerate(self.n, self.d, seed, mode))
            }
            Family::BoundedDegree => Ok(gen_bounded_degree_degenerate(self.n, self.d, seed)),
            Family::Star => gen_extremal(ExtremalFamily::Star, self.n, self.d),
            Family::CompleteBipartite => {
                gen_extremal(ExtremalFamily::CompleteBipartite, self.n, self.d)
            }
            Family::DAryTree => gen_extremal(ExtremalFamily::DAryTree, self.n, self.d),
        }
    }

    pub fn generate(&self) -> Result<Vec<Graph>> {
        self.validate()?;
        (0..self.count).map(|i| self.instance(i)).collect()
    }
}
