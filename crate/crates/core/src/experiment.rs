//! Seeded sweeps: one host per seed, every corpus graph embedded into it,
//! results written as CSV plus a JSON manifest.
//!
//! `results.csv` and `manifest.json` depend only on the configuration, so a
//! rerun reproduces them byte for byte. Wall times go to `timings.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::block_model::{
    audit_edges, derive_params, sample_host, BlockModelParams, EdgeAudit, HostGraph, Overrides,
};
use crate::embedder::{
    assert_ledger, embed, ledger, ledger_margins, well_behaved_violations, CandidateChoice,
    EmbedOptions, EmbedOutcome, FailureReport, Ledger,
};
use crate::error::{Error, Result};
use crate::generators::{mix_seed, CorpusSpec};
use crate::graph::{degeneracy_order, verify_embedding, write_edge_list, Graph};

/// Bumped whenever the CSV schema or the manifest layout changes.
pub const FORMAT_VERSION: u32 = 1;

pub const DEFAULT_Z_THRESHOLD: f64 = 5.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertLevel {
    /// Ledger and NB1-NB3 breaches are hard errors. Default constants only.
    Strict,
    /// Margins and violations are reported but never fail the run.
    #[default]
    Diagnostic,
}

impl std::str::FromStr for AssertLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(AssertLevel::Strict),
            "diagnostic" => Ok(AssertLevel::Diagnostic),
            other => Err(Error::InvalidInput(format!(
                "assert level must be `strict` or `diagnostic`, got `{other}`"
            ))),
        }
    }
}

fn default_z() -> f64 {
    DEFAULT_Z_THRESHOLD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub overrides: Overrides,
    pub corpora: Vec<CorpusSpec>,
    pub host_seeds: Vec<u64>,
    #[serde(default)]
    pub embed: EmbedOptions,
    /// Output directory; not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub assert_level: AssertLevel,
    #[serde(default = "default_z")]
    pub z_threshold: f64,
    /// Also write hosts, guests, embeddings and traces.
    #[serde(default)]
    pub artifacts: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<BlockModelParams> {
        let params = derive_params(self.n, self.d, &self.overrides)?;
        if self.host_seeds.is_empty() {
            return Err(Error::InvalidInput("host_seeds is empty".into()));
        }
        let mut seen = self.host_seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.host_seeds.len() {
            return Err(Error::InvalidInput("host_seeds contains duplicates".into()));
        }
        if self.corpora.is_empty() {
            return Err(Error::InvalidInput("corpora is empty".into()));
        }
        for c in &self.corpora {
            c.validate()?;
            if c.n > self.n {
                return Err(Error::GuestTooLarge {
                    guest: c.n,
                    n: self.n,
                });
            }
            if c.d > self.d {
                return Err(Error::InvalidInput(format!(
                    "corpus degeneracy {} exceeds d = {}",
                    c.d, self.d
                )));
            }
        }
        if self.assert_level == AssertLevel::Strict && !params.uses_default_constants() {
            return Err(Error::InvalidInput(
                "strict assertions need the default constants; use diagnostic with overrides"
                    .into(),
            ));
        }
        if self.z_threshold.is_nan() || self.z_threshold <= 0.0 {
            return Err(Error::InvalidInput("z_threshold must be positive".into()));
        }
        Ok(params)
    }

    /// SHA-256 over the format version and the canonical JSON of the config
    /// without its output path.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let mut h = Sha256::new();
        h.update(FORMAT_VERSION.to_le_bytes());
        h.update(serde_json::to_vec(&c).expect("config serialises"));
        hex::encode(h.finalize())
    }
}

/// One CSV row per (host seed, guest).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub host_seed: u64,
    pub corpus: usize,
    pub family: String,
    pub guest: usize,
    pub guest_vertices: usize,
    pub guest_edges: usize,
    pub guest_degeneracy: usize,
    pub success: bool,
    pub verified: bool,
    pub failure_step: Option<usize>,
    pub failure_guest_vertex: Option<usize>,
    pub failure_band: Option<usize>,
    pub host_vertices: usize,
    pub host_edges: usize,
    pub audit_max_abs_z: f64,
    pub audit_flagged: bool,
    /// Smallest `L[k][j] - occupancy` over sub-blocks that were used.
    pub min_ledger_margin: Option<f64>,
    pub ledger_ok: bool,
    pub nb_violations: usize,
    /// Peak occupancy, `k` rows separated by `|`, sub-blocks by spaces.
    pub occupancy: String,
}

#[derive(Clone, Debug)]
pub struct CellOutput {
    pub row: ResultRow,
    pub seconds: f64,
    pub failure: Option<FailureReport>,
    pub embedding_text: Option<String>,
    pub trace_text: Option<String>,
    pub breaches: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub params: BlockModelParams,
    pub audits: Vec<(u64, EdgeAudit)>,
    pub cells: Vec<CellOutput>,
    pub host_seconds: Vec<(u64, f64)>,
}

impl ExperimentResult {
    pub fn rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.cells.iter().map(|c| &c.row)
    }

    pub fn breaches(&self) -> Vec<String> {
        self.cells
            .iter()
            .flat_map(|c| c.breaches.iter().cloned())
            .collect()
    }

    pub fn success_rate(&self, seed: u64) -> f64 {
        let rows: Vec<_> = self.rows().filter(|r| r.host_seed == seed).collect();
        rows.iter().filter(|r| r.success).count() as f64 / rows.len().max(1) as f64
    }

    pub fn results_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in self.rows() {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn timings_csv(&self) -> String {
        let mut out = String::from("kind,host_seed,corpus,guest,seconds\n");
        for (seed, s) in &self.host_seconds {
            let _ = writeln!(out, "host,{seed},,,{s:.6}");
        }
        for c in &self.cells {
            let r = &c.row;
            let _ = writeln!(
                out,
                "cell,{},{},{},{:.6}",
                r.host_seed, r.corpus, r.guest, c.seconds
            );
        }
        out
    }

    pub fn failures_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            let Some(f) = &c.failure else { continue };
            let r = &c.row;
            let _ = writeln!(
                out,
                "# host_seed {} corpus {} guest {}",
                r.host_seed, r.corpus, r.guest
            );
            let _ = writeln!(out, "{f}");
            let occ: Vec<String> = f
                .occupancy
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let _ = writeln!(out, "occupancy {}", occ.join(" | "));
            let _ = writeln!(out, "trace");
            out.push_str(&f.trace.to_text());
        }
        out
    }
}

fn guest_name(corpus: usize, guest: usize) -> String {
    format!("c{corpus}_g{guest}")
}

fn cell_name(seed: u64, corpus: usize, guest: usize) -> String {
    format!("s{seed}_{}", guest_name(corpus, guest))
}

fn occupancy_string(occ: &[Vec<usize>]) -> String {
    occ.iter()
        .map(|row| {
            row.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("|")
}

struct Guest<'a> {
    corpus: usize,
    index: usize,
    family: String,
    graph: &'a Graph,
}

fn run_cell(
    host: &HostGraph,
    audit: &EdgeAudit,
    guest: &Guest<'_>,
    cfg: &ExperimentConfig,
    led: &Ledger,
) -> Result<CellOutput> {
    let start = Instant::now();
    let params = &host.params;
    let h = guest.graph;
    let order = degeneracy_order(h);
    let mut options = cfg.embed;
    if let CandidateChoice::Seeded { seed } = options.choice {
        let cell = ((guest.corpus as u64) << 32) | guest.index as u64;
        options.choice = CandidateChoice::Seeded {
            seed: mix_seed(mix_seed(seed, host.seed), cell),
        };
    }
    let outcome = embed(h, &order, host, &options)?;
    let label = cell_name(host.seed, guest.corpus, guest.index);

    let mut row = ResultRow {
        host_seed: host.seed,
        corpus: guest.corpus,
        family: guest.family.clone(),
        guest: guest.index,
        guest_vertices: h.vertex_count(),
        guest_edges: h.edge_count(),
        guest_degeneracy: order.degeneracy,
        success: false,
        verified: false,
        failure_step: None,
        failure_guest_vertex: None,
        failure_band: None,
        host_vertices: host.graph.vertex_count(),
        host_edges: host.graph.edge_count(),
        audit_max_abs_z: audit.max_abs_z,
        audit_flagged: audit.flagged,
        min_ledger_margin: None,
        ledger_ok: true,
        nb_violations: 0,
        occupancy: String::new(),
    };
    let mut breaches = Vec::new();
    let strict = cfg.assert_level == AssertLevel::Strict;

    let (failure, embedding_text, trace_text) = match outcome {
        EmbedOutcome::Success(s) => {
            row.success = true;
            match verify_embedding(h, &host.graph, &s.embedding) {
                Ok(()) => row.verified = true,
                Err(v) => breaches.push(format!("{label}: embedding does not verify: {v}")),
            }
            let margins = ledger_margins(&s.trace, led, params);
            row.min_ledger_margin = margins
                .iter()
                .zip(&s.state.occupancy)
                .flat_map(|(m, o)| m.iter().zip(o).filter(|(_, &o)| o > 0).map(|(&m, _)| m))
                .reduce(f64::min);
            if let Err(b) = assert_ledger(&s.trace, led, params) {
                row.ledger_ok = false;
                if strict {
                    breaches.push(format!("{label}: {b}"));
                }
            }
            let nb = well_behaved_violations(&s.state, h, &order, host);
            row.nb_violations = nb.len();
            if strict {
                breaches.extend(nb.iter().map(|v| format!("{label}: {v}")));
            }
            row.occupancy = occupancy_string(&s.state.occupancy);
            let emb = cfg.artifacts.then(|| s.embedding.to_text());
            let tr = cfg.artifacts.then(|| s.trace.to_text());
            (None, emb, tr)
        }
        EmbedOutcome::Failure(f) => {
            row.failure_step = Some(f.step);
            row.failure_guest_vertex = Some(f.guest);
            row.failure_band = Some(f.band);
            row.occupancy = occupancy_string(&f.occupancy);
            let tr = cfg.artifacts.then(|| f.trace.to_text());
            (Some(f), None, tr)
        }
    };
    Ok(CellOutput {
        row,
        seconds: start.elapsed().as_secs_f64(),
        failure,
        embedding_text,
        trace_text,
        breaches,
    })
}

#[cfg(feature = "parallel")]
fn map_ordered<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_ordered<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

struct Corpus {
    spec: CorpusSpec,
    graphs: Vec<Graph>,
}

/// Runs the sweep in memory. Rows come out sorted by host seed (in config
/// order), then corpus, then guest index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let params = cfg.validate()?;
    let corpora: Vec<Corpus> = cfg
        .corpora
        .iter()
        .map(|spec| {
            Ok(Corpus {
                spec: spec.clone(),
                graphs: spec.generate()?,
            })
        })
        .collect::<Result<_>>()?;
    let guests: Vec<Guest<'_>> = corpora
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| {
            c.graphs.iter().enumerate().map(move |(gi, g)| Guest {
                corpus: ci,
                index: gi,
                family: c.spec.family.to_string(),
                graph: g,
            })
        })
        .collect();

    let hosts: Vec<(HostGraph, EdgeAudit, f64)> = map_ordered(&cfg.host_seeds, |&seed| {
        let start = Instant::now();
        let host = sample_host(&params, seed)?;
        let audit = audit_edges(&host, cfg.z_threshold);
        Ok((host, audit, start.elapsed().as_secs_f64()))
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let led = ledger(&params);
    let cells: Vec<(usize, usize)> = (0..hosts.len())
        .flat_map(|h| (0..guests.len()).map(move |g| (h, g)))
        .collect();
    let outputs: Vec<CellOutput> = map_ordered(&cells, |&(hi, gi)| {
        run_cell(&hosts[hi].0, &hosts[hi].1, &guests[gi], cfg, &led)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    Ok(ExperimentResult {
        config: cfg.clone(),
        params,
        audits: hosts.iter().map(|(h, a, _)| (h.seed, a.clone())).collect(),
        host_seconds: hosts.iter().map(|(h, _, s)| (h.seed, *s)).collect(),
        cells: outputs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub format_version: u32,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub params: BlockModelParams,
    pub rows: usize,
    pub successes: usize,
    pub breaches: Vec<String>,
    pub files: Vec<String>,
}

fn write_file(dir: &Path, rel: &str, contents: &str, files: &mut Vec<String>) -> Result<()> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    files.push(rel.to_string());
    Ok(())
}

/// Writes `results.csv`, `timings.csv`, `failures.txt`, `manifest.json` and,
/// when enabled, the per-cell artifacts. Returns the manifest.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let cfg = &result.config;
    let mut files = Vec::new();
    write_file(dir, "results.csv", &result.results_csv()?, &mut files)?;
    write_file(dir, "timings.csv", &result.timings_csv(), &mut files)?;
    write_file(dir, "failures.txt", &result.failures_text(), &mut files)?;
    let mut audits = String::from("host_seed,i,k,observed,expected,z\n");
    for (seed, a) in &result.audits {
        for r in &a.rows {
            let _ = writeln!(
                audits,
                "{seed},{},{},{},{},{}",
                r.i, r.k, r.observed, r.expected, r.z
            );
        }
    }
    write_file(dir, "audit.csv", &audits, &mut files)?;

    if cfg.artifacts {
        let params_json = serde_json::to_string_pretty(&result.params)?;
        write_file(dir, "params.json", &params_json, &mut files)?;
        // hosts are resampled from their seeds; sampling is deterministic
        for &seed in &cfg.host_seeds {
            let host = sample_host(&result.params, seed)?;
            write_file(
                dir,
                &format!("hosts/host_s{seed}.edges"),
                &write_edge_list(&host.graph),
                &mut files,
            )?;
            write_file(
                dir,
                &format!("hosts/host_s{seed}.labels"),
                &host.labels_text(),
                &mut files,
            )?;
        }
        for (ci, spec) in cfg.corpora.iter().enumerate() {
            for (gi, g) in spec.generate()?.iter().enumerate() {
                write_file(
                    dir,
                    &format!("guests/{}.edges", guest_name(ci, gi)),
                    &write_edge_list(g),
                    &mut files,
                )?;
            }
        }
        for c in &result.cells {
            let name = cell_name(c.row.host_seed, c.row.corpus, c.row.guest);
            if let Some(e) = &c.embedding_text {
                write_file(dir, &format!("embeddings/{name}.emb"), e, &mut files)?;
            }
            if let Some(t) = &c.trace_text {
                write_file(dir, &format!("traces/{name}.trace"), t, &mut files)?;
            }
        }
    }

    let manifest = Manifest {
        tool: "degen".into(),
        tool_version: crate::TOOL_VERSION.into(),
        format_version: FORMAT_VERSION,
        config_hash: cfg.hash(),
        config: ExperimentConfig {
            out: None,
            ..cfg.clone()
        },
        params: result.params.clone(),
        rows: result.cells.len(),
        successes: result.rows().filter(|r| r.success).count(),
        breaches: result.breaches(),
        files: files.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(dir.join("manifest.json"), text)?;
    Ok(manifest)
}
