use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use degen_universal::analysis::{
    bounds_csv, bounds_report, bounds_table, estimate_common_event, log_spaced, parameter_checks,
    singleton_event_probability,
};
use degen_universal::block_model::{
    audit_edges, check_labels, derive_params, sample_host, BlockModelParams, HostGraph, Overrides,
};
use degen_universal::embedder::{embed, BackMultiset, CandidateChoice, EmbedOptions, EmbedOutcome};
use degen_universal::experiment::{
    run_experiment, write_outputs, AssertLevel, ExperimentConfig, DEFAULT_Z_THRESHOLD,
};
use degen_universal::generators::{BackDegreeMode, CorpusSpec, Family};
use degen_universal::graph::{
    degeneracy_order, read_edge_list, verify_embedding, write_edge_list, EmbeddingMap, Graph,
};
use degen_universal::{Error, ErrorClass, Result};

#[derive(Parser)]
#[command(
    name = "degen",
    version,
    about = "Universal graphs for bounded-degeneracy guests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Guest size n.
    #[arg(long)]
    n: usize,
    /// Degeneracy bound D (>= 2).
    #[arg(long)]
    d: usize,
    /// Replaces 100 * 3^D in the block sizes.
    #[arg(long)]
    block_constant: Option<f64>,
    /// Replaces (ln n)^(2/D) (ln ln n)^3 in the edge probabilities.
    #[arg(long)]
    prob_boost: Option<f64>,
    /// Sub-blocks per block.
    #[arg(long)]
    subblock_count: Option<usize>,
}

impl ModelArgs {
    fn params(&self) -> Result<BlockModelParams> {
        derive_params(
            self.n,
            self.d,
            &Overrides {
                block_constant: self.block_constant,
                prob_boost: self.prob_boost,
                subblock_count: self.subblock_count,
            },
        )
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    RandomDegenerate,
    BoundedDegree,
    Star,
    CompleteBipartite,
    DAryTree,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Varied,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived model parameters and structural checks.
    Params {
        #[command(flatten)]
        model: ModelArgs,
        /// Write params.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a host graph into a directory (host.edges, host.labels, params.json).
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a guest corpus into a directory.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed a guest into a sampled host directory.
    Embed {
        /// Directory written by `sample`.
        #[arg(long)]
        host: PathBuf,
        /// Guest edge list.
        #[arg(long)]
        guest: PathBuf,
        /// Pick candidates at random from this seed instead of lowest index.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check an embedding file; exits 3 if it is not a valid embedding.
    Verify {
        #[arg(long)]
        guest: PathBuf,
        /// Host edge list, or a directory written by `sample`.
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
    },
    /// Per-block-pair edge audit of a sampled host; with --trials, also a
    /// Monte Carlo estimate of the common-neighbourhood event.
    Audit {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Load this host directory instead of sampling.
        #[arg(long)]
        host: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
        z: f64,
        #[arg(long)]
        trials: Option<usize>,
        /// Block (0-based) of the target vertex for --trials.
        #[arg(long, default_value_t = 1)]
        target_block: usize,
        /// Block (0-based) holding the D back-neighbour images for --trials.
        #[arg(long, default_value_t = 1)]
        source_block: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of the lower bound, the budget and their ratio over log-spaced n.
    Bounds {
        #[arg(long)]
        d: usize,
        /// Single n; overrides the range.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        n_min: usize,
        #[arg(long, default_value_t = 100_000_000)]
        n_max: usize,
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded sweep from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        assert_level: Option<AssertLevel>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Loads a host directory and checks it against its recorded parameters.
fn load_host(dir: &Path) -> Result<HostGraph> {
    let recorded: BlockModelParams = serde_json::from_str(&read(&dir.join("params.json"))?)?;
    let params = derive_params(recorded.n, recorded.d, &recorded.overrides)?;
    if params != recorded {
        return Err(Error::InvalidInput(
            "params.json does not match the parameters it names".into(),
        ));
    }
    let graph = read_edge_list(&read(&dir.join("host.edges"))?)?;
    let labels = dir.join("host.labels");
    if labels.exists() {
        check_labels(&read(&labels)?, &params)?;
    }
    let seed = match read(&dir.join("seed")) {
        Ok(s) => s.trim().parse().unwrap_or(0),
        Err(_) => 0,
    };
    HostGraph::from_graph(graph, params, seed)
}

fn cmd_params(model: &ModelArgs, out: Option<&Path>) -> Result<()> {
    let p = model.params()?;
    print!("{}", p.table());
    if !p.overrides.is_empty() {
        println!("overrides: {}", serde_json::to_string(&p.overrides)?);
    }
    println!("checks:");
    for c in parameter_checks(&p) {
        println!("  {:<24} {:?}  {}", c.name, c.status, c.detail);
    }
    if let Some(out) = out {
        write(out, &json(&p)?)?;
    }
    Ok(())
}

fn cmd_sample(model: &ModelArgs, seed: u64, out: &Path) -> Result<()> {
    let p = model.params()?;
    let host = sample_host(&p, seed)?;
    fs::create_dir_all(out)?;
    write(&out.join("host.edges"), &write_edge_list(&host.graph))?;
    write(&out.join("host.labels"), &host.labels_text())?;
    write(&out.join("params.json"), &json(&p)?)?;
    write(&out.join("seed"), &format!("{seed}\n"))?;
    println!(
        "sampled host: {} vertices, {} edges (expected {:.1})",
        host.graph.vertex_count(),
        host.graph.edge_count(),
        p.expected_edges()
    );
    Ok(())
}

#[derive(Serialize)]
struct CorpusManifest<'a> {
    spec: &'a CorpusSpec,
    seed: u64,
    count: usize,
    files: Vec<String>,
}

fn cmd_gen(spec: CorpusSpec, out: &Path) -> Result<()> {
    let graphs = spec.generate()?;
    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let name = format!("guest_{i:04}.edges");
        write(&out.join(&name), &write_edge_list(g))?;
        files.push(name);
    }
    let manifest = CorpusManifest {
        spec: &spec,
        seed: spec.seed,
        count: spec.count,
        files,
    };
    write(&out.join("manifest.json"), &json(&manifest)?)?;
    println!("wrote {} guests of family {}", graphs.len(), spec.family);
    Ok(())
}

fn cmd_embed(host_dir: &Path, guest: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    let host = load_host(host_dir)?;
    let h = read_edge_list(&read(guest)?)?;
    let order = degeneracy_order(&h);
    let options = EmbedOptions {
        choice: seed.map_or(CandidateChoice::LowestIndex, |seed| {
            CandidateChoice::Seeded { seed }
        }),
    };
    fs::create_dir_all(out)?;
    match embed(&h, &order, &host, &options)? {
        EmbedOutcome::Success(s) => {
            verify_embedding(&h, &host.graph, &s.embedding).map_err(|v| {
                Error::InvariantBreach(format!("embedder produced an invalid embedding: {v}"))
            })?;
            write(&out.join("embedding.txt"), &s.embedding.to_text())?;
            write(&out.join("trace.txt"), &s.trace.to_text())?;
            println!("embedded {} vertices", h.vertex_count());
        }
        EmbedOutcome::Failure(f) => {
            write(&out.join("trace.txt"), &f.trace.to_text())?;
            write(
                &out.join("failure.txt"),
                &format!("{f}\noccupancy {:?}\n", f.occupancy),
            )?;
            println!("embedding failed: {f}");
        }
    }
    Ok(())
}

fn cmd_verify(guest: &Path, host: &Path, embedding: &Path) -> Result<()> {
    let h = read_edge_list(&read(guest)?)?;
    let host_graph: Graph = if host.is_dir() {
        load_host(host)?.graph
    } else {
        read_edge_list(&read(host)?)?
    };
    let m = EmbeddingMap::from_text(&read(embedding)?, h.vertex_count())?;
    match verify_embedding(&h, &host_graph, &m) {
        Ok(()) => {
            println!("ok");
            Ok(())
        }
        Err(v) => Err(Error::InvariantBreach(format!(
            "embedding does not verify: {v}"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_audit(
    model: &ModelArgs,
    seed: u64,
    host_dir: Option<&Path>,
    z: f64,
    trials: Option<usize>,
    target_block: usize,
    source_block: usize,
    out: Option<&Path>,
) -> Result<()> {
    let host = match host_dir {
        Some(dir) => load_host(dir)?,
        None => sample_host(&model.params()?, seed)?,
    };
    let audit = audit_edges(&host, z);
    let report = bounds_report(&host.params, Some(&host))?;
    let csv = audit.to_csv();
    match out {
        Some(path) => write(&path.join("audit.csv"), &csv)?,
        None => print!("{csv}"),
    }
    eprintln!(
        "max |z| = {:.3} (threshold {z}); observed {} edges, expected {:.1}, bound {:.4e}",
        audit.max_abs_z,
        report.observed_edges.unwrap_or(0),
        report.expected_edges,
        report.model_edge_bound
    );
    if let Some(trials) = trials {
        let p = &host.params;
        if target_block >= p.levels || source_block >= p.levels {
            return Err(Error::InvalidRange(format!(
                "blocks must be below N = {}",
                p.levels
            )));
        }
        let start = p.block_range(source_block).start;
        let set: Vec<usize> = (start..start + p.d).collect();
        let b = BackMultiset::new(vec![set.clone()]);
        let est = estimate_common_event(p, &b, target_block, trials.max(1), seed)?;
        #[derive(Serialize)]
        struct Out<'a> {
            analytic: f64,
            #[serde(flatten)]
            est: &'a degen_universal::analysis::CommonEventEstimate,
        }
        let analytic = singleton_event_probability(p, &set, target_block);
        let text = json(&Out {
            analytic,
            est: &est,
        })?;
        match out {
            Some(path) => write(&path.join("common_event.json"), &text)?,
            None => eprint!("{text}"),
        }
    }
    if audit.flagged {
        eprintln!("warning: some block pair exceeds the z threshold");
    }
    Ok(())
}

fn cmd_bounds(
    d: usize,
    n: Option<usize>,
    n_min: usize,
    n_max: usize,
    points: usize,
    out: Option<&Path>,
) -> Result<()> {
    let ns = match n {
        Some(n) => vec![n],
        None => log_spaced(n_min, n_max, points),
    };
    let csv = bounds_csv(&bounds_table(d, &ns)?)?;
    match out {
        Some(path) => write(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_experiment(config: &Path, out: Option<PathBuf>, level: Option<AssertLevel>) -> Result<()> {
    let mut cfg = ExperimentConfig::from_json(&read(config)?)?;
    if let Some(level) = level {
        cfg.assert_level = level;
    }
    if out.is_some() {
        cfg.out = out;
    }
    let dir = cfg
        .out
        .clone()
        .ok_or_else(|| Error::InvalidRange("no output directory (--out or config `out`)".into()))?;
    let result = run_experiment(&cfg)?;
    let manifest = write_outputs(&result, &dir)?;
    println!(
        "{} rows, {} successes; config hash {}",
        manifest.rows, manifest.successes, manifest.config_hash
    );
    for &seed in &cfg.host_seeds {
        println!(
            "  host seed {seed}: success rate {:.3}",
            result.success_rate(seed)
        );
    }
    if !manifest.breaches.is_empty() {
        for b in &manifest.breaches {
            eprintln!("breach: {b}");
        }
        return Err(Error::InvariantBreach(format!(
            "{} invariant breaches",
            manifest.breaches.len()
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Params { model, out } => cmd_params(&model, out.as_deref()),
        Command::Sample { model, seed, out } => cmd_sample(&model, seed, &out),
        Command::Gen {
            family,
            mode,
            n,
            d,
            count,
            seed,
            out,
        } => {
            let family = match family {
                FamilyArg::RandomDegenerate => Family::RandomDegenerate {
                    mode: match mode {
                        ModeArg::Full => BackDegreeMode::Full,
                        ModeArg::Varied => BackDegreeMode::Varied,
                    },
                },
                FamilyArg::BoundedDegree => Family::BoundedDegree,
                FamilyArg::Star => Family::Star,
                FamilyArg::CompleteBipartite => Family::CompleteBipartite,
                FamilyArg::DAryTree => Family::DAryTree,
            };
            cmd_gen(
                CorpusSpec {
                    n,
                    d,
                    family,
                    count,
                    seed,
                },
                &out,
            )
        }
        Command::Embed {
            host,
            guest,
            seed,
            out,
        } => cmd_embed(&host, &guest, seed, &out),
        Command::Verify {
            guest,
            host,
            embedding,
        } => cmd_verify(&guest, &host, &embedding),
        Command::Audit {
            model,
            seed,
            host,
            z,
            trials,
            target_block,
            source_block,
            out,
        } => cmd_audit(
            &model,
            seed,
            host.as_deref(),
            z,
            trials,
            target_block,
            source_block,
            out.as_deref(),
        ),
        Command::Bounds {
            d,
            n,
            n_min,
            n_max,
            points,
            out,
        } => cmd_bounds(d, n, n_min, n_max, points, out.as_deref()),
        Command::Experiment {
            config,
            out,
            assert_level,
        } => cmd_experiment(&config, out, assert_level),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Precondition => 2,
                ErrorClass::Breach => 3,
            })
        }
    }
}
