//! Greedy sub-block embedding of a degenerate guest into a block model host.
//!
//! Guests are embedded one vertex at a time in degeneracy order. A vertex of
//! total degree `deg` goes to the block `k` with `delta[k+1] < deg <= delta[k]`
//! and to the first sub-block `j` of that block that still has a free common
//! neighbour of the images of its back-neighbours.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::block_model::{BlockModelParams, HostGraph};
use crate::error::{Error, Result};
use crate::graph::{is_permutation, positions, DegeneracyResult, EmbeddingMap, Graph};

/// Block index for a guest vertex of total degree `deg`. Isolated vertices
/// go to the last block.
pub fn assign_band(deg: usize, params: &BlockModelParams) -> usize {
    if deg == 0 {
        return params.levels - 1;
    }
    // thresholds decrease with k, so take the deepest block that still
    // admits the degree
    (0..params.levels)
        .rev()
        .find(|&k| params.within_delta(deg, k))
        .expect("delta[0] = n bounds every guest degree")
}

/// Free vertices of sub-block `(k, j)` adjacent to every vertex of `images`.
/// With no images every free vertex of the sub-block qualifies.
pub fn common_candidates(
    host: &HostGraph,
    images: &[usize],
    k: usize,
    j: usize,
    used: &[bool],
) -> Vec<usize> {
    let range = host.params.subblock_range(k, j);
    let Some(&pivot) = images.iter().min_by_key(|&&u| host.graph.degree(u)) else {
        return range.filter(|&v| !used[v]).collect();
    };
    let nbrs = host.graph.neighbors(pivot);
    let lo = nbrs.partition_point(|&v| v < range.start);
    let hi = nbrs.partition_point(|&v| v < range.end);
    nbrs[lo..hi]
        .iter()
        .copied()
        .filter(|&v| !used[v])
        .filter(|&v| {
            images
                .iter()
                .all(|&u| u == pivot || host.graph.has_edge(u, v))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialEmbedding {
    pub map: EmbeddingMap,
    pub used: Vec<bool>,
    /// `occupancy[k][j] = |W_{k,j} ∩ Im ψ|`
    pub occupancy: Vec<Vec<usize>>,
}

impl PartialEmbedding {
    pub fn new(guest_count: usize, params: &BlockModelParams) -> Self {
        PartialEmbedding {
            map: EmbeddingMap::unassigned(guest_count),
            used: vec![false; params.total_vertices()],
            occupancy: vec![vec![0; params.subblock_count]; params.levels],
        }
    }

    fn place(&mut self, guest: usize, host_vertex: usize, k: usize, j: usize) {
        self.map.set(guest, host_vertex);
        self.used[host_vertex] = true;
        self.occupancy[k][j] += 1;
    }

    /// Recomputes occupancy from the map and compares with the counters.
    pub fn check_consistency(&self, host: &HostGraph) -> bool {
        let mut occ = vec![vec![0; host.params.subblock_count]; host.params.levels];
        let mut used = vec![false; self.used.len()];
        for &t in self.map.assignment().iter().flatten() {
            if used[t] {
                return false;
            }
            used[t] = true;
            occ[host.block_of[t]][host.subblock_of[t]] += 1;
        }
        occ == self.occupancy
            && used == self.used
            && (0..host.params.levels).all(|k| {
                (0..host.params.subblock_count)
                    .all(|j| occ[k][j] <= host.params.subblock_sizes[k][j])
            })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CandidateChoice {
    /// Lowest host index among the candidates.
    #[default]
    LowestIndex,
    /// Uniform among the candidates, from a generator seeded once per run.
    Seeded { seed: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedOptions {
    #[serde(default)]
    pub choice: CandidateChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    /// 1-based step number.
    pub step: usize,
    pub guest: usize,
    pub band: usize,
    pub subblock: usize,
    pub host: usize,
    /// Candidates left in the chosen sub-block after this pick.
    pub candidates_remaining: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    /// `i guest_vertex k j host_vertex candidates_remaining` per step.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                s.step, s.guest, s.band, s.subblock, s.host, s.candidates_remaining
            );
        }
        out
    }

    /// Occupancy per `(k, j)` after each step, folded by `visit`.
    fn replay(
        &self,
        params: &BlockModelParams,
        mut visit: impl FnMut(&TraceStep, &[Vec<usize>]) -> bool,
    ) {
        let mut occ = vec![vec![0usize; params.subblock_count]; params.levels];
        for s in &self.steps {
            occ[s.band][s.subblock] += 1;
            if !visit(s, &occ) {
                return;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailureReport {
    pub step: usize,
    pub guest: usize,
    pub band: usize,
    pub back_images: Vec<usize>,
    pub occupancy: Vec<Vec<usize>>,
    pub trace: Trace,
}

impl fmt::Display for FailureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {}: guest {} (band {}) has no free common neighbour of {:?} in any sub-block",
            self.step, self.guest, self.band, self.back_images
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbedSuccess {
    pub embedding: EmbeddingMap,
    pub trace: Trace,
    pub state: PartialEmbedding,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EmbedOutcome {
    Success(EmbedSuccess),
    Failure(FailureReport),
}

impl EmbedOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, EmbedOutcome::Success(_))
    }
}

fn back_images(h: &Graph, pos: &[usize], x: usize, map: &EmbeddingMap) -> Vec<usize> {
    let mut images: Vec<usize> = h
        .neighbors(x)
        .iter()
        .filter(|&&y| pos[y] < pos[x])
        .map(|&y| map.get(y).expect("back-neighbours are embedded first"))
        .collect();
    images.sort_unstable();
    images
}

/// Runs the embedding strategy. `order` must be a permutation of the guest
/// vertices with back-degree at most `host.params.d`.
pub fn embed(
    h: &Graph,
    order: &DegeneracyResult,
    host: &HostGraph,
    options: &EmbedOptions,
) -> Result<EmbedOutcome> {
    let params = &host.params;
    let n = h.vertex_count();
    if n > params.n {
        return Err(Error::GuestTooLarge {
            guest: n,
            n: params.n,
        });
    }
    if !is_permutation(&order.order, n) {
        return Err(Error::BadOrder(
            "not a permutation of the guest vertices".into(),
        ));
    }
    let back = h.max_back_degree(&order.order);
    if back > params.d {
        return Err(Error::BadOrder(format!(
            "back-degree {back} exceeds d = {}",
            params.d
        )));
    }

    let pos = positions(&order.order, n);
    let mut state = PartialEmbedding::new(n, params);
    let mut trace = Trace::default();
    let mut rng = match options.choice {
        CandidateChoice::Seeded { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        CandidateChoice::LowestIndex => None,
    };

    for (idx, &x) in order.order.iter().enumerate() {
        let band = assign_band(h.degree(x), params);
        let images = back_images(h, &pos, x, &state.map);
        let found = (0..params.subblock_count).find_map(|j| {
            let c = common_candidates(host, &images, band, j, &state.used);
            (!c.is_empty()).then_some((j, c))
        });
        let Some((j, candidates)) = found else {
            return Ok(EmbedOutcome::Failure(FailureReport {
                step: idx + 1,
                guest: x,
                band,
                back_images: images,
                occupancy: state.occupancy,
                trace,
            }));
        };
        let pick = match rng.as_mut() {
            Some(r) => candidates[r.gen_range(0..candidates.len())],
            None => candidates[0],
        };
        state.place(x, pick, band, j);
        trace.steps.push(TraceStep {
            step: idx + 1,
            guest: x,
            band,
            subblock: j,
            host: pick,
            candidates_remaining: candidates.len() - 1,
        });
    }
    debug_assert!(state.check_consistency(host));
    Ok(EmbedOutcome::Success(EmbedSuccess {
        embedding: state.map.clone(),
        trace,
        state,
    }))
}

/// Multiset of host-vertex sets; duplicates are kept as separate entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BackMultiset {
    pub sets: Vec<Vec<usize>>,
}

impl BackMultiset {
    pub fn new(mut sets: Vec<Vec<usize>>) -> Self {
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        BackMultiset { sets }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn multiplicity(&self, set: &[usize]) -> usize {
        let mut key = set.to_vec();
        key.sort_unstable();
        self.sets.iter().filter(|s| **s == key).count()
    }

    /// Distinct vertices appearing in some set, sorted.
    pub fn union(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.sets.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

/// For every guest embedded in sub-block `(k, j)`, the images of its
/// back-neighbours.
pub fn collect_back_multiset(
    pe: &PartialEmbedding,
    h: &Graph,
    order: &DegeneracyResult,
    host: &HostGraph,
    k: usize,
    j: usize,
) -> BackMultiset {
    let pos = positions(&order.order, h.vertex_count());
    let mut sets = Vec::new();
    for &x in &order.order {
        let Some(t) = pe.map.get(x) else { continue };
        if host.block_of[t] == k && host.subblock_of[t] == j {
            sets.push(back_images(h, &pos, x, &pe.map));
        }
    }
    BackMultiset::new(sets)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WellBehavedViolation {
    /// A set larger than `d`.
    Nb1 { set_index: usize, size: usize },
    /// A vertex of block `k` in more than `delta[k]` sets.
    Nb2 {
        vertex: usize,
        block: usize,
        count: usize,
    },
    /// The union covers more than half of a sub-block.
    Nb3 {
        block: usize,
        subblock: usize,
        covered: usize,
        size: usize,
    },
}

impl fmt::Display for WellBehavedViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WellBehavedViolation::Nb1 { set_index, size } => {
                write!(f, "NB1: set {set_index} has {size} elements")
            }
            WellBehavedViolation::Nb2 {
                vertex,
                block,
                count,
            } => write!(
                f,
                "NB2: vertex {vertex} of block {block} is in {count} sets"
            ),
            WellBehavedViolation::Nb3 {
                block,
                subblock,
                covered,
                size,
            } => write!(
                f,
                "NB3: union covers {covered} of {size} vertices in sub-block ({block}, {subblock})"
            ),
        }
    }
}

pub fn check_well_behaved(
    b: &BackMultiset,
    params: &BlockModelParams,
) -> std::result::Result<(), WellBehavedViolation> {
    if let Some((set_index, s)) = b.sets.iter().enumerate().find(|(_, s)| s.len() > params.d) {
        return Err(WellBehavedViolation::Nb1 {
            set_index,
            size: s.len(),
        });
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &u in b.sets.iter().flatten() {
        *counts.entry(u).or_default() += 1;
    }
    for (&vertex, &count) in &counts {
        let block = params.block_of(vertex);
        if !params.within_delta(count, block) {
            return Err(WellBehavedViolation::Nb2 {
                vertex,
                block,
                count,
            });
        }
    }
    let mut covered = vec![vec![0usize; params.subblock_count]; params.levels];
    for &u in counts.keys() {
        covered[params.block_of(u)][params.subblock_of(u)] += 1;
    }
    for (k, row) in covered.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let size = params.subblock_sizes[k][j];
            if 2 * c > size {
                return Err(WellBehavedViolation::Nb3 {
                    block: k,
                    subblock: j,
                    covered: c,
                    size,
                });
            }
        }
    }
    Ok(())
}

/// Per-sub-block occupancy caps `L[k][j]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ledger {
    pub values: Vec<Vec<f64>>,
}

/// `L[k][0] = 2 n^(1 - D^-(k+1))` for all but the last block, `n` for the
/// last, and each later sub-block a factor `4 ln n` smaller.
pub fn ledger(params: &BlockModelParams) -> Ledger {
    let nf = params.n as f64;
    let df = params.d as f64;
    let shrink = 4.0 * nf.ln();
    let values = (0..params.levels)
        .map(|k| {
            let first = if k + 1 == params.levels {
                nf
            } else {
                2.0 * nf.powf(1.0 - df.powi(-(k as i32 + 1)))
            };
            let mut row = Vec::with_capacity(params.subblock_count);
            let mut cur = first;
            for _ in 0..params.subblock_count {
                row.push(cur);
                cur /= shrink;
            }
            row
        })
        .collect();
    Ledger { values }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerBreach {
    pub step: usize,
    pub block: usize,
    pub subblock: usize,
    pub occupancy: usize,
    pub cap: f64,
}

impl fmt::Display for LedgerBreach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {}: occupancy {} of sub-block ({}, {}) exceeds ledger cap {:.3}",
            self.step, self.occupancy, self.block, self.subblock, self.cap
        )
    }
}

/// First step at which some sub-block holds more than its ledger cap.
pub fn assert_ledger(
    trace: &Trace,
    ledger: &Ledger,
    params: &BlockModelParams,
) -> std::result::Result<(), LedgerBreach> {
    let mut breach = None;
    trace.replay(params, |s, occ| {
        let count = occ[s.band][s.subblock];
        let cap = ledger.values[s.band][s.subblock];
        if count as f64 > cap {
            breach = Some(LedgerBreach {
                step: s.step,
                block: s.band,
                subblock: s.subblock,
                occupancy: count,
                cap,
            });
            return false;
        }
        true
    });
    breach.map_or(Ok(()), Err)
}

/// `L[k][j] - max occupancy` over the run, per sub-block.
pub fn ledger_margins(trace: &Trace, ledger: &Ledger, params: &BlockModelParams) -> Vec<Vec<f64>> {
    let mut peak = vec![vec![0usize; params.subblock_count]; params.levels];
    trace.replay(params, |s, occ| {
        peak[s.band][s.subblock] = occ[s.band][s.subblock];
        true
    });
    ledger
        .values
        .iter()
        .zip(&peak)
        .map(|(l, p)| l.iter().zip(p).map(|(&l, &p)| l - p as f64).collect())
        .collect()
}

/// Checks the back multiset of every sub-block after a run. The multisets
/// only grow during a run, so a final pass covers every intermediate step.
pub fn well_behaved_violations(
    pe: &PartialEmbedding,
    h: &Graph,
    order: &DegeneracyResult,
    host: &HostGraph,
) -> Vec<WellBehavedViolation> {
    let params = &host.params;
    let mut out = Vec::new();
    for k in 0..params.levels {
        for j in 0..params.subblock_count {
            if pe.occupancy[k][j] == 0 {
                continue;
            }
            let b = collect_back_multiset(pe, h, order, host, k, j);
            if let Err(v) = check_well_behaved(&b, params) {
                out.push(v);
            }
        }
    }
    out
}
