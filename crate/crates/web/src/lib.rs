//! Browser bindings. Each export takes plain numbers and strings and returns
//! a JSON document; errors come back as JS exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use degen_universal::analysis::{bounds_table, log_spaced, parameter_checks, ParamCheck};
use degen_universal::block_model::{derive_params, sample_host, BlockModelParams, Overrides};
use degen_universal::embedder::{embed, CandidateChoice, EmbedOptions, EmbedOutcome, TraceStep};
use degen_universal::generators::{
    gen_bounded_degree_degenerate, gen_extremal, gen_random_degenerate, BackDegreeMode,
    ExtremalFamily,
};
use degen_universal::graph::{degeneracy_order, verify_embedding};

/// Demo hosts are kept small enough to sample in a browser tab.
const MAX_DEMO_HOST: usize = 6000;
const TRACE_PREVIEW: usize = 400;

fn overrides(block_constant: f64, prob_boost: f64) -> Overrides {
    // non-positive or NaN inputs from the page mean "default value"
    Overrides {
        block_constant: (block_constant > 0.0).then_some(block_constant),
        prob_boost: (prob_boost >= 0.0).then_some(prob_boost),
        subblock_count: None,
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ParamsView {
    params: BlockModelParams,
    expected_edges: f64,
    total_vertices: usize,
    checks: Vec<ParamCheck>,
}

pub fn params_json(
    n: usize,
    d: usize,
    block_constant: f64,
    prob_boost: f64,
) -> Result<String, String> {
    let p =
        derive_params(n, d, &overrides(block_constant, prob_boost)).map_err(|e| e.to_string())?;
    to_json(&ParamsView {
        expected_edges: p.expected_edges(),
        total_vertices: p.total_vertices(),
        checks: parameter_checks(&p),
        params: p,
    })
}

pub fn bounds_json(d: usize, n_min: usize, n_max: usize, points: usize) -> Result<String, String> {
    let rows = bounds_table(d, &log_spaced(n_min.max(16), n_max, points.min(400)))
        .map_err(|e| e.to_string())?;
    to_json(&rows)
}

#[derive(Serialize)]
struct EmbedView {
    host_vertices: usize,
    host_edges: usize,
    guest_vertices: usize,
    guest_edges: usize,
    guest_degeneracy: usize,
    success: bool,
    verified: bool,
    message: String,
    block_sizes: Vec<usize>,
    subblock_sizes: Vec<Vec<usize>>,
    occupancy: Vec<Vec<usize>>,
    trace: Vec<TraceStep>,
    trace_len: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn embed_json(
    n: usize,
    d: usize,
    block_constant: f64,
    prob_boost: f64,
    family: &str,
    guest_n: usize,
    guest_d: usize,
    seed: u64,
) -> Result<String, String> {
    let p =
        derive_params(n, d, &overrides(block_constant, prob_boost)).map_err(|e| e.to_string())?;
    if p.total_vertices() > MAX_DEMO_HOST {
        return Err(format!(
            "host would have {} vertices; the demo allows {MAX_DEMO_HOST}",
            p.total_vertices()
        ));
    }
    let h = match family {
        "random_degenerate" => {
            gen_random_degenerate(guest_n, guest_d, seed, BackDegreeMode::Varied)
        }
        "bounded_degree" => gen_bounded_degree_degenerate(guest_n.max(2), guest_d, seed),
        "star" => {
            gen_extremal(ExtremalFamily::Star, guest_n, guest_d).map_err(|e| e.to_string())?
        }
        "complete_bipartite" => gen_extremal(ExtremalFamily::CompleteBipartite, guest_n, guest_d)
            .map_err(|e| e.to_string())?,
        "d_ary_tree" => {
            gen_extremal(ExtremalFamily::DAryTree, guest_n, guest_d).map_err(|e| e.to_string())?
        }
        other => return Err(format!("unknown family `{other}`")),
    };
    let host = sample_host(&p, seed).map_err(|e| e.to_string())?;
    let order = degeneracy_order(&h);
    let options = EmbedOptions {
        choice: CandidateChoice::Seeded { seed },
    };
    let outcome = embed(&h, &order, &host, &options).map_err(|e| e.to_string())?;
    let (success, verified, message, occupancy, trace) = match outcome {
        EmbedOutcome::Success(s) => {
            let ok = verify_embedding(&h, &host.graph, &s.embedding).is_ok();
            let msg = format!("embedded all {} vertices", h.vertex_count());
            (true, ok, msg, s.state.occupancy, s.trace)
        }
        EmbedOutcome::Failure(f) => (false, false, f.to_string(), f.occupancy.clone(), f.trace),
    };
    let trace_len = trace.steps.len();
    to_json(&EmbedView {
        host_vertices: host.graph.vertex_count(),
        host_edges: host.graph.edge_count(),
        guest_vertices: h.vertex_count(),
        guest_edges: h.edge_count(),
        guest_degeneracy: order.degeneracy,
        success,
        verified,
        message,
        block_sizes: p.block_sizes.clone(),
        subblock_sizes: p.subblock_sizes.clone(),
        occupancy,
        trace: trace.steps.into_iter().take(TRACE_PREVIEW).collect(),
        trace_len,
    })
}

/// Derived parameters, structural checks and expected edge count.
#[wasm_bindgen]
pub fn params_table(
    n: usize,
    d: usize,
    block_constant: f64,
    prob_boost: f64,
) -> Result<String, JsError> {
    params_json(n, d, block_constant, prob_boost).map_err(|e| JsError::new(&e))
}

/// Lower bound, budget and model bound over log-spaced `n`.
#[wasm_bindgen]
pub fn bounds_curve(
    d: usize,
    n_min: usize,
    n_max: usize,
    points: usize,
) -> Result<String, JsError> {
    bounds_json(d, n_min, n_max, points).map_err(|e| JsError::new(&e))
}

/// Samples a host, generates one guest and runs the embedder on it.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn embed_demo(
    n: usize,
    d: usize,
    block_constant: f64,
    prob_boost: f64,
    family: &str,
    guest_n: usize,
    guest_d: usize,
    seed: u32,
) -> Result<String, JsError> {
    embed_json(
        n,
        d,
        block_constant,
        prob_boost,
        family,
        guest_n,
        guest_d,
        seed as u64,
    )
    .map_err(|e| JsError::new(&e))
}
