//! Edge-count bounds, Chernoff tails and Monte Carlo diagnostics for the
//! block model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::block_model::{BlockModelParams, HostGraph, MIN_N};
use crate::embedder::BackMultiset;
use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

pub const DEFAULT_TRIALS: usize = 10_000;

/// Edges any graph containing all `n`-vertex d-degenerate graphs of maximum
/// degree `2d + 1` must have: `n^(2 - 1/d) / (1000 d)`.
pub fn lower_bound_edges(n: usize, d: usize) -> f64 {
    let df = d as f64;
    (n as f64).powf(2.0 - 1.0 / df) / (1000.0 * df)
}

/// Edge budget of the universal construction:
/// `80000 n^(2 - 1/d) (ln n)^(2/d) (ln ln n)^5`.
pub fn universality_budget(n: usize, d: usize) -> Result<f64> {
    if n < MIN_N {
        return Err(Error::NTooSmall { n });
    }
    let (nf, df) = (n as f64, d as f64);
    let ln = nf.ln();
    Ok(80_000.0 * nf.powf(2.0 - 1.0 / df) * ln.powf(2.0 / df) * ln.ln().powi(5))
}

/// Edge bound of the block model at default constants:
/// `10^5 3^(2d) n^(2 - 1/d) (ln n)^(2/d) (ln ln n)^5`.
pub fn default_model_edge_bound(n: usize, d: usize) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    let ln = nf.ln();
    1e5 * 9f64.powi(d as i32) * nf.powf(2.0 - 1.0 / df) * ln.powf(2.0 / df) * ln.ln().powi(5)
}

/// The same bound with the configured constants:
/// `10 c^2 n^(2 - 1/d) max(boost, 1) (ln ln n)^2`. Equals
/// [`default_model_edge_bound`] when no override is set.
pub fn model_edge_bound(params: &BlockModelParams) -> f64 {
    let (nf, df) = (params.n as f64, params.d as f64);
    let lnln = nf.ln().ln();
    10.0 * params.block_constant.powi(2)
        * nf.powf(2.0 - 1.0 / df)
        * params.prob_boost.max(1.0)
        * lnln.powi(2)
}

/// `2 exp(-delta^2 mean / 3)`, the two-sided binomial tail bound for
/// `delta` in `(0, 3/2)`.
pub fn chernoff_tail(mean: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.5) {
        return Err(Error::DeltaOutOfRange { delta });
    }
    if mean.is_nan() || mean < 0.0 {
        return Err(Error::InvalidInput(format!(
            "mean must be >= 0, got {mean}"
        )));
    }
    Ok(2.0 * (-delta * delta * mean / 3.0).exp())
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundBranch {
    /// The constant cap of the `min` applied.
    Cap,
    /// The `t`-dependent expression applied.
    Formula,
}

/// `t n^(D^(-k) - 1) (ln n)^2 (ln ln n)^D` with `k` 0-based.
fn neighbourhood_rate(params: &BlockModelParams, t: usize, k: usize) -> f64 {
    let (nf, df) = (params.n as f64, params.d as f64);
    let ln = nf.ln();
    t as f64 * nf.powf(df.powi(-(k as i32)) - 1.0) * ln * ln * ln.ln().powi(params.d as i32)
}

/// `min{1/4, t n^(D^(1-k) - 1) (ln n)^2 (ln ln n)^D}` (block `k` 0-based).
pub fn common_event_lower_bound(
    params: &BlockModelParams,
    t: usize,
    k: usize,
) -> (f64, BoundBranch) {
    let formula = neighbourhood_rate(params, t, k);
    if formula >= 0.25 {
        (0.25, BoundBranch::Cap)
    } else {
        (formula, BoundBranch::Formula)
    }
}

/// Probability that a single set `b` lies in the neighbourhood of a fixed
/// vertex of block `k` outside `b`: the product of the edge probabilities.
pub fn singleton_event_probability(params: &BlockModelParams, b: &[usize], k: usize) -> f64 {
    b.iter()
        .map(|&w| params.prob[params.block_of(w)][k])
        .product()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommonEventEstimate {
    pub successes: usize,
    pub trials: usize,
    pub p_hat: f64,
    pub ci: (f64, f64),
    pub target: usize,
    pub lower_bound: f64,
    pub branch: BoundBranch,
    /// The lower bound is at most the upper Wilson edge.
    pub bound_consistent: bool,
}

/// Monte Carlo estimate of the probability that some set of `b` lies inside
/// the neighbourhood of a vertex `u` of block `k` not covered by `b`.
///
/// Each trial draws fresh edges between `u` and every vertex of the union of
/// `b`; sets sharing a vertex share that draw.
pub fn estimate_common_event(
    params: &BlockModelParams,
    b: &BackMultiset,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<CommonEventEstimate> {
    let union = b.union();
    let target = params
        .block_range(k)
        .find(|v| union.binary_search(v).is_err())
        .ok_or(Error::NoValidTarget { block: k })?;
    let probs: Vec<f64> = union
        .iter()
        .map(|&w| params.prob[params.block_of(w)][k])
        .collect();
    // sets as indices into `union`
    let sets: Vec<Vec<usize>> = b
        .sets
        .iter()
        .map(|s| {
            s.iter()
                .map(|v| union.binary_search(v).expect("in union"))
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adjacent = vec![false; union.len()];
    let mut successes = 0;
    for _ in 0..trials {
        for (slot, &p) in adjacent.iter_mut().zip(&probs) {
            *slot = p >= 1.0 || (p > 0.0 && rng.gen::<f64>() < p);
        }
        if sets.iter().any(|s| s.iter().all(|&i| adjacent[i])) {
            successes += 1;
        }
    }
    let ci = wilson_interval(successes, trials, Z_95);
    let (lower_bound, branch) = common_event_lower_bound(params, b.len(), k);
    Ok(CommonEventEstimate {
        successes,
        trials,
        p_hat: if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        },
        ci,
        target,
        lower_bound,
        branch,
        bound_consistent: lower_bound <= ci.1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PseudoRandomReport {
    pub hit_count: usize,
    pub subblock_size: usize,
    pub bound: f64,
    pub branch: BoundBranch,
    pub satisfied: bool,
}

/// Counts vertices of sub-block `(k, j)` whose neighbourhood contains some
/// set of `b`, against
/// `min{1/16, (t/4) n^(D^(1-k) - 1) (ln n)^2 (ln ln n)^D} |W_{k,j}|`.
pub fn pseudo_random_diagnostic(
    host: &HostGraph,
    b: &BackMultiset,
    k: usize,
    j: usize,
) -> PseudoRandomReport {
    let params = &host.params;
    let range = params.subblock_range(k, j);
    let size = range.len();
    let hit_count = if b.is_empty() {
        0
    } else {
        range
            .filter(|&u| {
                b.sets
                    .iter()
                    .any(|s| s.iter().all(|&w| host.graph.has_edge(u, w)))
            })
            .count()
    };
    let formula = neighbourhood_rate(params, b.len(), k) / 4.0;
    let (fraction, branch) = if formula >= 1.0 / 16.0 {
        (1.0 / 16.0, BoundBranch::Cap)
    } else {
        (formula, BoundBranch::Formula)
    };
    let bound = fraction * size as f64;
    PseudoRandomReport {
        hit_count,
        subblock_size: size,
        bound,
        branch,
        satisfied: hit_count as f64 >= bound,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub d: usize,
    pub lower_bound: f64,
    pub budget: f64,
    pub model_edge_bound: f64,
    pub expected_edges: f64,
    pub observed_edges: Option<usize>,
}

pub fn bounds_report(params: &BlockModelParams, host: Option<&HostGraph>) -> Result<BoundsReport> {
    Ok(BoundsReport {
        n: params.n,
        d: params.d,
        lower_bound: lower_bound_edges(params.n, params.d),
        budget: universality_budget(params.n, params.d)?,
        model_edge_bound: model_edge_bound(params),
        expected_edges: params.expected_edges(),
        observed_edges: host.map(|h| h.graph.edge_count()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

/// Below this `n` the two-sided bound on `N` is reported as a warning.
pub const LEVEL_BOUND_WARN_BELOW: usize = 10_000;

/// Structural checks on the parameters: level count range, `delta_N`
/// range, rows of ones, last block size and total size.
pub fn parameter_checks(params: &BlockModelParams) -> Vec<ParamCheck> {
    let (n, d) = (params.n, params.d);
    let (nf, df) = (n as f64, d as f64);
    let lnln = nf.ln().ln();
    let three_d = 3f64.powi(d as i32);
    let last = params.levels - 1;
    let mut out = Vec::new();

    let lo = lnln / (2.0 * df.ln());
    let hi = 2.0 * lnln;
    let levels = params.levels as f64;
    let ok = lo <= levels && levels <= hi;
    out.push(ParamCheck {
        name: "level_count_range",
        status: match (ok, n < LEVEL_BOUND_WARN_BELOW) {
            (true, _) => CheckStatus::Pass,
            (false, true) => CheckStatus::Warn,
            (false, false) => CheckStatus::Fail,
        },
        detail: format!("{lo:.3} <= N = {} <= {hi:.3}", params.levels),
    });

    let dn = params.delta[last];
    out.push(ParamCheck {
        name: "delta_n_range",
        status: if three_d <= dn && dn <= 3f64.powi((d * d) as i32) {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        detail: format!("3^D = {three_d} <= delta_N = {dn:.4} <= 3^(D^2)"),
    });

    let ones = (0..params.levels).all(|k| params.prob[0][k] == 1.0 && params.prob[k][0] == 1.0);
    out.push(ParamCheck {
        name: "top_block_probabilities",
        status: if ones {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        detail: "p_(1,k) = p_(k,1) = 1".into(),
    });

    if params.overrides.block_constant.is_some() {
        out.push(ParamCheck {
            name: "last_block_size",
            status: CheckStatus::Skipped,
            detail: "block_constant overridden".into(),
        });
        out.push(ParamCheck {
            name: "total_vertices",
            status: CheckStatus::Skipped,
            detail: "block_constant overridden".into(),
        });
    } else {
        let ratio = params.block_sizes[last] as f64 / nf;
        let upper = 100.0 / 3.0 * three_d;
        out.push(ParamCheck {
            name: "last_block_size",
            status: if (100.0..=upper).contains(&ratio) {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: format!("100 <= |W_N|/n = {ratio:.3} <= {upper:.3}"),
        });
        let cap = 200.0 * three_d * nf;
        out.push(ParamCheck {
            name: "total_vertices",
            status: if params.total_vertices() as f64 <= cap {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: format!("{} <= 200 3^D n = {cap}", params.total_vertices()),
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    pub d: usize,
    pub lower_bound: f64,
    pub budget: f64,
    pub model_edge_bound: f64,
    pub budget_over_lower: f64,
    pub model_over_lower: f64,
}

pub fn bounds_row(n: usize, d: usize) -> Result<BoundsRow> {
    let lower_bound = lower_bound_edges(n, d);
    let budget = universality_budget(n, d)?;
    let model = default_model_edge_bound(n, d);
    Ok(BoundsRow {
        n,
        d,
        lower_bound,
        budget,
        model_edge_bound: model,
        budget_over_lower: budget / lower_bound,
        model_over_lower: model / lower_bound,
    })
}

/// `points` values of `n`, log-spaced over `[n_min, n_max]` and deduplicated
/// after rounding. An empty range (`n_min > n_max` or `points == 0`) yields
/// no rows.
pub fn log_spaced(n_min: usize, n_max: usize, points: usize) -> Vec<usize> {
    if points == 0 || n_min > n_max {
        return Vec::new();
    }
    if points == 1 || n_min == n_max {
        return vec![n_min];
    }
    let (a, b) = ((n_min as f64).ln(), (n_max as f64).ln());
    let mut out: Vec<usize> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            ((a + t * (b - a)).exp().round() as usize).clamp(n_min, n_max)
        })
        .collect();
    out.dedup();
    out
}

pub fn bounds_table(d: usize, ns: &[usize]) -> Result<Vec<BoundsRow>> {
    if d == 0 {
        return Err(Error::InvalidRange("d must be >= 1".into()));
    }
    ns.iter().map(|&n| bounds_row(n, d)).collect()
}

pub fn bounds_csv(rows: &[BoundsRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record([
            "n",
            "d",
            "lower_bound",
            "budget",
            "model_edge_bound",
            "budget_over_lower",
            "model_over_lower",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_model::{derive_params, sample_host, Overrides};

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn lower_bound_examples() {
        // 10^(6 * 1.5) / 2000 = 5e5
        assert!(close(lower_bound_edges(1_000_000, 2), 5e5, 1e-12));
        assert!(close(lower_bound_edges(1, 3), 1.0 / 3000.0, 1e-12));
        let mut prev = 0.0;
        for n in (1..2000).step_by(37) {
            let v = lower_bound_edges(n, 2);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn budget_examples() {
        let ln16 = 16f64.ln();
        let expect = 80_000.0 * 16.0 * ln16.powi(2) * ln16.ln().powi(5);
        assert!(close(universality_budget(16, 1).unwrap(), expect, 1e-12));
        assert!(universality_budget(15, 2).is_err());
        for (n, d) in [(10_000usize, 2usize), (1_000_000, 3), (123_456_789, 4)] {
            let ratio = universality_budget(n, d).unwrap() / lower_bound_edges(n, d);
            let ln = (n as f64).ln();
            let polylog = 8e7 * d as f64 * ln.powf(2.0 / d as f64) * ln.ln().powi(5);
            assert!(close(ratio, polylog, 1e-9));
        }
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(chernoff_tail(0.0, 0.5).unwrap(), 2.0);
        assert!(close(
            chernoff_tail(300.0, 0.5).unwrap(),
            2.0 * (-25f64).exp(),
            1e-12
        ));
        assert!(chernoff_tail(10.0, 0.5).unwrap() > chernoff_tail(20.0, 0.5).unwrap());
        assert!(chernoff_tail(1.0, 1.5).is_err());
        assert!(chernoff_tail(1.0, 0.0).is_err());
    }

    #[test]
    fn wilson_is_sane() {
        let (lo, hi) = wilson_interval(50, 100, Z_95);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(close(lo, 0.4038, 1e-3));
        let (lo, hi) = wilson_interval(100, 100, Z_95);
        assert!(lo > 0.96 && hi == 1.0);
        assert_eq!(wilson_interval(0, 100, Z_95).0, 0.0);
    }

    #[test]
    fn model_bound_at_defaults_matches_closed_form() {
        let p = derive_params(100_000, 2, &Overrides::default()).unwrap();
        assert!(close(
            model_edge_bound(&p),
            default_model_edge_bound(100_000, 2),
            1e-9
        ));
        assert!(p.expected_edges() <= model_edge_bound(&p));
    }

    fn scaled(boost: Option<f64>) -> BlockModelParams {
        derive_params(
            2000,
            2,
            &Overrides {
                block_constant: Some(4.0),
                prob_boost: boost,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn common_event_edge_cases() {
        let p = scaled(Some(0.3));
        let top = BackMultiset::new(vec![vec![0, 1]]);
        let est = estimate_common_event(&p, &top, 1, 500, 1).unwrap();
        assert_eq!(est.successes, 500);
        assert_eq!(est.p_hat, 1.0);

        let est = estimate_common_event(&p, &BackMultiset::default(), 1, 500, 1).unwrap();
        assert_eq!(est.successes, 0);

        let w2 = p.block_range(1).start;
        let single = BackMultiset::new(vec![vec![w2, w2 + 1]]);
        let analytic = singleton_event_probability(&p, &single.sets[0], 1);
        assert!(close(analytic, 0.09, 1e-12));
        let est = estimate_common_event(&p, &single, 1, 20_000, 2).unwrap();
        assert!(est.ci.0 <= analytic && analytic <= est.ci.1, "{est:?}");
        assert_ne!(est.target, w2);
    }

    #[test]
    fn no_target_when_block_covered() {
        let p = scaled(None);
        let all: Vec<Vec<usize>> = p.block_range(0).map(|v| vec![v]).collect();
        assert!(matches!(
            estimate_common_event(&p, &BackMultiset::new(all), 0, 10, 0),
            Err(Error::NoValidTarget { block: 0 })
        ));
    }

    #[test]
    fn pseudo_random_examples() {
        let p = scaled(Some(0.2));
        let host = sample_host(&p, 4).unwrap();
        let w2 = p.block_range(1).start;
        let b = BackMultiset::new(vec![vec![w2 + 500]]);
        // top block vertices see everything
        let rep = pseudo_random_diagnostic(&host, &b, 0, 1);
        assert_eq!(rep.hit_count, rep.subblock_size);
        assert!(rep.satisfied);

        let rep = pseudo_random_diagnostic(&host, &BackMultiset::default(), 1, 1);
        assert_eq!((rep.hit_count, rep.bound), (0, 0.0));
        assert!(rep.satisfied);

        // brute force count
        let r = p.subblock_range(1, 2);
        let brute = r.filter(|&u| host.graph.has_edge(u, w2 + 500)).count();
        assert_eq!(pseudo_random_diagnostic(&host, &b, 1, 2).hit_count, brute);
    }

    #[test]
    fn parameter_checks_at_million() {
        let p = derive_params(1_000_000, 2, &Overrides::default()).unwrap();
        for c in parameter_checks(&p) {
            assert_eq!(c.status, CheckStatus::Pass, "{c:?}");
        }
        let small = scaled(None);
        let checks = parameter_checks(&small);
        assert!(checks.iter().any(|c| c.status == CheckStatus::Skipped));
    }

    #[test]
    fn lower_stays_below_budget() {
        for d in 2..=4 {
            for n in log_spaced(10_000, 100_000_000, 40) {
                assert!(lower_bound_edges(n, d) < universality_budget(n, d).unwrap());
            }
        }
    }

    #[test]
    fn bounds_table_shapes() {
        assert_eq!(log_spaced(10, 5, 3), Vec::<usize>::new());
        assert_eq!(log_spaced(100, 100, 5), vec![100]);
        let ns = log_spaced(10_000, 100_000_000, 9);
        assert_eq!((ns[0], ns[8]), (10_000, 100_000_000));
        assert_eq!(ns[4], 1_000_000);

        let empty = bounds_csv(&[]).unwrap();
        assert_eq!(empty.lines().count(), 1);
        assert!(empty.starts_with("n,d,lower_bound"));

        let rows = bounds_table(2, &[1_000_000]).unwrap();
        assert_eq!(rows[0].lower_bound, lower_bound_edges(1_000_000, 2));
        assert_eq!(rows[0].budget, universality_budget(1_000_000, 2).unwrap());
        assert_eq!(bounds_csv(&rows).unwrap().lines().count(), 2);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..10)
            .map(|i| (i as f64, 3.0 * (i as f64).powf(1.5)))
            .collect();
        assert!((log_log_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(log_log_slope(&pts[..1]), None);
    }
}
