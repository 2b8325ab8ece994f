//! The random block model host graph.
//!
//! The host vertex set is split into blocks `W_1..W_N` (0-based `0..N` in
//! code, block 0 hosting the highest-degree guests) and each block into `J`
//! sub-blocks. Blocks are laid out contiguously, `W_1` first, and sub-blocks
//! are contiguous inside their block, so labels are range lookups.
//!
//! All logarithms are natural.

use std::fmt::Write as _;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Smallest guest size for which `ln ln n >= 1`.
pub const MIN_N: usize = 16;

/// Optional replacements for the model constants. `None` means the default
/// value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    /// Replaces `100 * 3^D` in `|W_k| = c * n^(1 - D^-k)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_constant: Option<f64>,
    /// Replaces `(ln n)^(2/D) * (ln ln n)^3` in `p_{i,k}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob_boost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subblock_count: Option<usize>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.block_constant.is_none() && self.prob_boost.is_none() && self.subblock_count.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockModelParams {
    pub n: usize,
    pub d: usize,
    /// Number of blocks `N`.
    pub levels: usize,
    /// `delta[i] = n^(D^-i)` for `i < N` (so `delta[0] = n`), and
    /// `delta[N] = 0`.
    pub delta: Vec<f64>,
    /// `prob[i][k]`, symmetric, entries in `[0, 1]`.
    pub prob: Vec<Vec<f64>>,
    pub block_sizes: Vec<usize>,
    pub subblock_count: usize,
    pub subblock_sizes: Vec<Vec<usize>>,
    pub block_constant: f64,
    pub prob_boost: f64,
    pub overrides: Overrides,
    /// `block_offsets[k]` is the first vertex of block `k`;
    /// `block_offsets[N]` is the total vertex count.
    pub block_offsets: Vec<usize>,
}

pub fn default_block_constant(d: usize) -> f64 {
    100.0 * 3f64.powi(d as i32)
}

/// `(ln n)^(2/D) * (ln ln n)^3`.
pub fn default_prob_boost(n: usize, d: usize) -> f64 {
    let ln = (n as f64).ln();
    ln.powf(2.0 / d as f64) * ln.ln().powi(3)
}

/// `base^exp` in `u128`, `None` on overflow.
fn checked_pow_u128(base: u128, exp: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
        if acc == 0 || acc == 1 {
            return Some(acc);
        }
    }
    Some(acc)
}

/// Exact test of `x <= n^(D^-level)` (`level` 0-based), i.e.
/// `x^(D^level) <= n`.
pub fn at_most_threshold(x: usize, n: usize, d: usize, level: usize) -> bool {
    if x <= 1 {
        return true;
    }
    let Some(exp) = (d as u64).checked_pow(level as u32) else {
        return false;
    };
    match checked_pow_u128(x as u128, exp) {
        Some(v) => v <= n as u128,
        None => false,
    }
}

/// Smallest `N >= 1` with `n^(D^(1-N)) <= 3^(D^2)`, equivalently
/// `n <= 3^(D^(N+1))`.
pub fn level_count(n: usize, d: usize) -> usize {
    debug_assert!(d >= 2);
    let mut levels = 1;
    loop {
        let fits = match (d as u64).checked_pow(levels as u32 + 1) {
            Some(exp) => match checked_pow_u128(3, exp) {
                Some(bound) => n as u128 <= bound,
                None => true,
            },
            None => true,
        };
        if fits {
            return levels;
        }
        levels += 1;
    }
}

/// Sub-block sizes for a block of `size` vertices split into `count` parts:
/// the first gets `ceil(size/2)`, the rest split the remainder evenly with
/// earlier parts taking the leftover.
pub fn split_block(size: usize, count: usize) -> Vec<usize> {
    let first = size.div_ceil(2);
    let rest = size - first;
    let others = count - 1;
    let mut sizes = Vec::with_capacity(count);
    sizes.push(first);
    for j in 0..others {
        sizes.push(rest / others + usize::from(j < rest % others));
    }
    sizes
}

fn check_positive(name: &'static str, value: Option<f64>, allow_zero: bool) -> Result<()> {
    if let Some(v) = value {
        let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
        if !ok {
            return Err(Error::InvalidOverride {
                name,
                value: v,
                reason: "must be a positive finite number",
            });
        }
    }
    Ok(())
}

/// Computes every constant of the block model for guests on `n` vertices
/// of degeneracy at most `d`.
pub fn derive_params(n: usize, d: usize, overrides: &Overrides) -> Result<BlockModelParams> {
    if n < MIN_N {
        return Err(Error::NTooSmall { n });
    }
    if d < 2 {
        return Err(Error::DegeneracyTooSmall { d });
    }
    check_positive("block_constant", overrides.block_constant, false)?;
    // A zero boost is a legitimate way to switch off the sparse pairs.
    check_positive("prob_boost", overrides.prob_boost, true)?;
    if let Some(j) = overrides.subblock_count {
        if j < 2 {
            return Err(Error::InvalidOverride {
                name: "subblock_count",
                value: j as f64,
                reason: "need at least two sub-blocks",
            });
        }
    }

    let nf = n as f64;
    let ln_n = nf.ln();
    let df = d as f64;
    let levels = level_count(n, d);

    let mut delta: Vec<f64> = (0..levels)
        .map(|i| {
            if i == 0 {
                nf
            } else {
                nf.powf(df.powi(-(i as i32)))
            }
        })
        .collect();
    delta.push(0.0);

    let block_constant = overrides
        .block_constant
        .unwrap_or_else(|| default_block_constant(d));
    let prob_boost = overrides
        .prob_boost
        .unwrap_or_else(|| default_prob_boost(n, d));

    // 1-based block index b: D^-b
    let inv_pow = |b: usize| df.powi(-(b as i32));
    let prob: Vec<Vec<f64>> = (0..levels)
        .map(|i| {
            (0..levels)
                .map(|k| {
                    if i == 0 || k == 0 {
                        return 1.0;
                    }
                    let exponent = -1.0 / df + inv_pow(i + 1) + inv_pow(k + 1);
                    (nf.powf(exponent) * prob_boost).clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();

    let block_sizes: Vec<usize> = (0..levels)
        .map(|k| (block_constant * nf.powf(1.0 - inv_pow(k + 1))).ceil() as usize)
        .collect();

    let subblock_count = overrides
        .subblock_count
        .unwrap_or_else(|| (ln_n.floor() as usize).max(2));
    let mut subblock_sizes = Vec::with_capacity(levels);
    for &size in &block_sizes {
        let sizes = split_block(size, subblock_count);
        let floor = size as f64 / (2.0 * subblock_count as f64);
        if sizes.iter().any(|&s| s == 0 || (s as f64) < floor) {
            return Err(Error::InvalidOverride {
                name: if overrides.subblock_count.is_some() {
                    "subblock_count"
                } else {
                    "block_constant"
                },
                value: overrides
                    .subblock_count
                    .map(|j| j as f64)
                    .unwrap_or(block_constant),
                reason: "a sub-block would fall below |W_k| / (2J)",
            });
        }
        subblock_sizes.push(sizes);
    }

    let mut block_offsets = Vec::with_capacity(levels + 1);
    let mut acc = 0;
    for &s in &block_sizes {
        block_offsets.push(acc);
        acc += s;
    }
    block_offsets.push(acc);

    Ok(BlockModelParams {
        n,
        d,
        levels,
        delta,
        prob,
        block_sizes,
        subblock_count,
        subblock_sizes,
        block_constant,
        prob_boost,
        overrides: overrides.clone(),
        block_offsets,
    })
}

impl BlockModelParams {
    pub fn total_vertices(&self) -> usize {
        self.block_offsets[self.levels]
    }

    pub fn uses_default_constants(&self) -> bool {
        self.overrides.is_empty()
    }

    pub fn block_range(&self, k: usize) -> Range<usize> {
        self.block_offsets[k]..self.block_offsets[k + 1]
    }

    pub fn subblock_range(&self, k: usize, j: usize) -> Range<usize> {
        let start = self.block_offsets[k] + self.subblock_sizes[k][..j].iter().sum::<usize>();
        start..start + self.subblock_sizes[k][j]
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_offsets.partition_point(|&o| o <= v) - 1
    }

    pub fn subblock_of(&self, v: usize) -> usize {
        let k = self.block_of(v);
        let mut start = self.block_offsets[k];
        for (j, &s) in self.subblock_sizes[k].iter().enumerate() {
            if v < start + s {
                return j;
            }
            start += s;
        }
        unreachable!("vertex {v} outside its block")
    }

    /// Exact `x <= delta[k]` for integer `x`.
    pub fn within_delta(&self, x: usize, k: usize) -> bool {
        if k >= self.levels {
            return x == 0;
        }
        at_most_threshold(x, self.n, self.d, k)
    }

    /// Number of unordered vertex pairs between blocks `i` and `k`.
    pub fn pair_count(&self, i: usize, k: usize) -> u64 {
        let (a, b) = (self.block_sizes[i] as u64, self.block_sizes[k] as u64);
        if i == k {
            a * a.saturating_sub(1) / 2
        } else {
            a * b
        }
    }

    /// Expected edge count between blocks `i` and `k` (each unordered pair
    /// of blocks once).
    pub fn pair_expectation(&self, i: usize, k: usize) -> f64 {
        self.prob[i][k] * self.pair_count(i, k) as f64
    }

    pub fn expected_edges(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.levels {
            for k in i..self.levels {
                total += self.pair_expectation(i, k);
            }
        }
        total
    }

    /// Human-readable parameter table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}  D = {}  N = {}", self.n, self.d, self.levels);
        let _ = writeln!(
            out,
            "block_constant = {}{}",
            self.block_constant,
            if self.overrides.block_constant.is_some() {
                "  (override)"
            } else {
                ""
            }
        );
        let _ = writeln!(
            out,
            "prob_boost = {}{}",
            self.prob_boost,
            if self.overrides.prob_boost.is_some() {
                "  (override)"
            } else {
                ""
            }
        );
        let _ = writeln!(
            out,
            "sub-blocks per block J = {}{}",
            self.subblock_count,
            if self.overrides.subblock_count.is_some() {
                "  (override)"
            } else {
                ""
            }
        );
        let _ = writeln!(out, "total vertices = {}", self.total_vertices());
        let _ = writeln!(out, "expected edges = {:.1}", self.expected_edges());
        let _ = writeln!(out, "\nk  Delta_k  |W_k|  sub-block sizes");
        for k in 0..self.levels {
            let _ = writeln!(
                out,
                "{}  {:.4}  {}  {:?}",
                k + 1,
                self.delta[k],
                self.block_sizes[k],
                self.subblock_sizes[k]
            );
        }
        let _ = writeln!(out, "\np_(i,k):");
        for row in &self.prob {
            let cells: Vec<String> = row.iter().map(|p| format!("{p:.6}")).collect();
            let _ = writeln!(out, "  {}", cells.join("  "));
        }
        out
    }
}

/// Guards against accidental huge instances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleLimits {
    pub max_vertices: usize,
    pub max_expected_edges: f64,
}

impl Default for SampleLimits {
    fn default() -> Self {
        SampleLimits {
            max_vertices: 20_000,
            max_expected_edges: 40_000_000.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HostGraph {
    pub graph: Graph,
    pub block_of: Vec<usize>,
    pub subblock_of: Vec<usize>,
    pub params: BlockModelParams,
    pub seed: u64,
}

impl HostGraph {
    /// Attaches the canonical labelling of `params` to an existing graph.
    pub fn from_graph(graph: Graph, params: BlockModelParams, seed: u64) -> Result<Self> {
        if graph.vertex_count() != params.total_vertices() {
            return Err(Error::InvalidInput(format!(
                "host graph has {} vertices, parameters need {}",
                graph.vertex_count(),
                params.total_vertices()
            )));
        }
        let (block_of, subblock_of) = labels_for(&params);
        Ok(HostGraph {
            graph,
            block_of,
            subblock_of,
            params,
            seed,
        })
    }

    /// `v k j` per line, 0-based.
    pub fn labels_text(&self) -> String {
        let mut out = String::new();
        for v in 0..self.graph.vertex_count() {
            let _ = writeln!(out, "{} {} {}", v, self.block_of[v], self.subblock_of[v]);
        }
        out
    }
}

fn labels_for(params: &BlockModelParams) -> (Vec<usize>, Vec<usize>) {
    let total = params.total_vertices();
    let mut block_of = Vec::with_capacity(total);
    let mut subblock_of = Vec::with_capacity(total);
    for k in 0..params.levels {
        for (j, &s) in params.subblock_sizes[k].iter().enumerate() {
            block_of.extend(std::iter::repeat_n(k, s));
            subblock_of.extend(std::iter::repeat_n(j, s));
        }
    }
    (block_of, subblock_of)
}

/// Checks a label file against the layout implied by `params`.
pub fn check_labels(text: &str, params: &BlockModelParams) -> Result<()> {
    let (block_of, subblock_of) = labels_for(params);
    let mut count = 0;
    for (idx, raw) in text.lines().enumerate() {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<usize> = raw
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Malformed {
                line: idx + 1,
                reason: "expected `v k j`".into(),
            })?;
        let [v, k, j] = fields[..] else {
            return Err(Error::Malformed {
                line: idx + 1,
                reason: "expected `v k j`".into(),
            });
        };
        if v >= block_of.len() || block_of[v] != k || subblock_of[v] != j {
            return Err(Error::InvalidInput(format!(
                "label line {} disagrees with the parameter layout",
                idx + 1
            )));
        }
        count += 1;
    }
    if count != block_of.len() {
        return Err(Error::InvalidInput(format!(
            "label file has {count} entries, expected {}",
            block_of.len()
        )));
    }
    Ok(())
}

pub fn sample_host(params: &BlockModelParams, seed: u64) -> Result<HostGraph> {
    sample_host_with_limits(params, seed, SampleLimits::default())
}

/// Samples each unordered pair `{u, v}` independently with
/// `p_{block(u), block(v)}`. Pairs with `p` equal to 0 or 1 consume no
/// randomness.
pub fn sample_host_with_limits(
    params: &BlockModelParams,
    seed: u64,
    limits: SampleLimits,
) -> Result<HostGraph> {
    let total = params.total_vertices();
    let expected = params.expected_edges();
    if total > limits.max_vertices || expected > limits.max_expected_edges {
        return Err(Error::SizeOverflow {
            vertices: total,
            expected_edges: expected,
            max_vertices: limits.max_vertices,
            max_edges: limits.max_expected_edges,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for i in 0..params.levels {
        for k in i..params.levels {
            let p = params.prob[i][k];
            if p <= 0.0 {
                continue;
            }
            for u in params.block_range(i) {
                let lo = if i == k {
                    u + 1
                } else {
                    params.block_offsets[k]
                };
                for v in lo..params.block_offsets[k + 1] {
                    if p >= 1.0 || rng.gen::<f64>() < p {
                        adj[u].push(v);
                        adj[v].push(u);
                    }
                }
            }
        }
    }
    let graph = Graph::from_adjacency_unsorted(adj);
    HostGraph::from_graph(graph, params.clone(), seed)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub i: usize,
    pub k: usize,
    pub observed: u64,
    pub expected: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeAudit {
    pub rows: Vec<AuditRow>,
    pub z_threshold: f64,
    pub max_abs_z: f64,
    pub flagged: bool,
    pub total_observed: u64,
    pub total_expected: f64,
}

/// Observed versus expected edge counts per unordered block pair, with
/// `z = (observed - expected) / sqrt(m p (1-p))`. A zero-variance pair has
/// `z = 0` when it matches and infinite `z` otherwise.
#[allow(clippy::needless_range_loop)]
pub fn audit_edges(host: &HostGraph, z_threshold: f64) -> EdgeAudit {
    let params = &host.params;
    let levels = params.levels;
    let mut counts = vec![vec![0u64; levels]; levels];
    for (u, v) in host.graph.edges() {
        let (a, b) = (host.block_of[u], host.block_of[v]);
        counts[a.min(b)][a.max(b)] += 1;
    }
    let mut rows = Vec::new();
    let mut max_abs_z: f64 = 0.0;
    for i in 0..levels {
        for k in i..levels {
            let p = params.prob[i][k];
            let m = params.pair_count(i, k) as f64;
            let expected = p * m;
            let observed = counts[i][k];
            let variance = m * p * (1.0 - p);
            let diff = observed as f64 - expected;
            let z = if variance > 0.0 {
                diff / variance.sqrt()
            } else if diff.abs() < 0.5 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            };
            max_abs_z = max_abs_z.max(z.abs());
            rows.push(AuditRow {
                i,
                k,
                observed,
                expected,
                z,
            });
        }
    }
    EdgeAudit {
        total_observed: rows.iter().map(|r| r.observed).sum(),
        total_expected: rows.iter().map(|r| r.expected).sum(),
        rows,
        z_threshold,
        max_abs_z,
        flagged: max_abs_z > z_threshold,
    }
}

impl EdgeAudit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,k,observed,expected,z\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.i, r.k, r.observed, r.expected, r.z);
        }
        out
    }
}
