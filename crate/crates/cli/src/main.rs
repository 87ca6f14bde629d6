//! Deterministic command-line workflows for amortized Pareto-front model
//! merging: generate synthetic oracles, sample and evaluate scaling
//! coefficients, fit surrogates, run the plain / nested / Bayesian-adaptive
//! pipelines, and compare fronts.

mod artifacts;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use artifacts::{
    config_digest, default_directions, parse_box, parse_directions, parse_links, parse_weights,
    write_json, FrontDocument, OracleDocument, OracleSpec, RunManifest,
};
use mergefront::bayes::{default_bins_per_axis, run_bayesian_map, BasmConfig};
use mergefront::metrics::{normalized_front_distances, win_rate, PreferenceVector};
use mergefront::model::ParameterVector;
use mergefront::moop::Direction;
use mergefront::nested::{leaf_nodes, nested_merge, NestedConfig};
use mergefront::oracle::{Oracle, RecordStore, SyntheticOracle};
use mergefront::pipeline::{
    run_map, run_map_offline, sample_coefficients, MapConfig, MapOutcome, MoopParams,
    SamplingScheme,
};
use mergefront::rng::substream;
use mergefront::surrogate::FitReport;
use mergefront::{Error, Result};

#[derive(Parser)]
#[command(
    name = "mergefront",
    version,
    about = "Amortized Pareto fronts for task-vector model merging",
    arg_required_else_help = true
)]
struct Cli {
    /// Cap on worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a reproducible synthetic-oracle file from a spec.
    GenOracle {
        /// Oracle spec JSON (explicit quadratics or a seeded random layout).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Noise-stream seed used when the spec does not pin one.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw scaling-coefficient samples to a CSV.
    Sample {
        #[arg(long)]
        n: usize,
        /// Oracle file fixing the coefficient dimension.
        #[arg(long, conflicts_with = "dim")]
        oracle: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        /// Decision box, `lo:hi` or one pair per coordinate.
        #[arg(long = "box", default_value = "0:1")]
        bounds: String,
        /// `uniform` or `latin`.
        #[arg(long, default_value = "uniform")]
        scheme: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a sample CSV on an oracle, producing a record CSV.
    Evaluate {
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Evaluation budget cap.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Fit per-task surrogates from a record CSV.
    Fit {
        #[arg(long)]
        records: PathBuf,
        /// Oracle file supplying the per-task links.
        #[arg(long, conflicts_with = "links")]
        oracle: Option<PathBuf>,
        /// Links: `unbounded`, `bounded:l:u`, or `lower:l` per task.
        #[arg(long)]
        links: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full amortized-front run against an oracle (or offline from records).
    Map {
        #[arg(long, conflicts_with = "records")]
        oracle: Option<PathBuf>,
        /// Offline mode: fit from existing records, no oracle queries.
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long, default_value_t = 30)]
        k_samples: usize,
        #[arg(long = "box", default_value = "0:1")]
        bounds: String,
        /// Override links inferred from the oracle.
        #[arg(long)]
        links: Option<String>,
        /// Override directions inferred from the links (`min`/`max`).
        #[arg(long)]
        directions: Option<String>,
        /// `uniform` or `latin`.
        #[arg(long, default_value = "uniform")]
        scheme: String,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        partitions: Option<usize>,
        /// Skip re-evaluating the predicted front on the oracle.
        #[arg(long)]
        no_reeval: bool,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Nested pairwise merging under a preference vector.
    Nested {
        #[arg(long)]
        oracle: PathBuf,
        /// Comma-separated preference weights, one per task.
        #[arg(long)]
        pref: String,
        /// Coefficient samples per pairwise merge (T).
        #[arg(long, default_value_t = 20)]
        per_pair_budget: usize,
        /// Box for the two pair-level coefficients.
        #[arg(long = "pair-box", default_value = "0:1")]
        pair_bounds: String,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        partitions: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bayesian-adaptive sampling run.
    Bayes {
        #[arg(long)]
        oracle: PathBuf,
        /// Uniform samples in round zero.
        #[arg(long, default_value_t = 6)]
        n0: usize,
        /// Adaptive rounds after round zero.
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Samples per adaptive round.
        #[arg(long, default_value_t = 3)]
        per_round: usize,
        /// Angular bins per axis (default depends on the task count).
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long, default_value_t = 30)]
        bootstrap_q: usize,
        #[arg(long, default_value_t = 0.2)]
        alpha: f64,
        #[arg(long = "box", default_value = "0:1")]
        bounds: String,
        #[arg(long)]
        directions: Option<String>,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        partitions: Option<usize>,
        /// Re-evaluate the final front on the oracle.
        #[arg(long)]
        reeval: bool,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two fronts: win rate plus normalized GD/IGD.
    Compare {
        #[arg(long)]
        front_a: PathBuf,
        #[arg(long)]
        front_b: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        /// Decision vectors sampled from each front.
        #[arg(long, default_value_t = 100)]
        k: usize,
        /// Distance exponent for GD/IGD.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a finished run directory.
    Report {
        #[arg(long)]
        run: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            let (code, kind) = exit_info(&error);
            let payload = serde_json::json!({
                "error": { "kind": kind, "message": error.to_string() }
            });
            eprintln!("{payload}");
            ExitCode::from(code)
        }
    }
}

/// Exit codes: 2 validation/io, 3 budget, 4 numerical failure.
fn exit_info(error: &Error) -> (u8, &'static str) {
    match error {
        Error::BudgetExceeded { .. } => (3, "budget"),
        Error::SingularDesign | Error::NonFinite { .. } => (4, "numerical"),
        Error::Io(_) => (2, "io"),
        _ => (2, "validation"),
    }
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339()
}

fn write_manifest(
    dir: &Path,
    command: &str,
    digest: &str,
    seed: u64,
    started_at: String,
    eval_count: u64,
) -> Result<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        config_digest: digest.to_string(),
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: now_rfc3339(),
        eval_count,
    };
    write_json(&dir.join("run_manifest.json"), &manifest)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::GenOracle { spec, out, seed } => cmd_gen_oracle(&spec, &out, seed),
        Command::Sample {
            n,
            oracle,
            dim,
            bounds,
            scheme,
            seed,
            out,
        } => cmd_sample(n, oracle.as_deref(), dim, &bounds, &scheme, seed, &out),
        Command::Evaluate {
            oracle,
            samples,
            out,
            budget,
        } => cmd_evaluate(&oracle, &samples, &out, budget),
        Command::Fit {
            records,
            oracle,
            links,
            out,
        } => cmd_fit(&records, oracle.as_deref(), links.as_deref(), &out),
        Command::Map {
            oracle,
            records,
            k_samples,
            bounds,
            links,
            directions,
            scheme,
            population,
            generations,
            partitions,
            no_reeval,
            budget,
            seed,
            out,
        } => cmd_map(MapArgs {
            oracle,
            records,
            k_samples,
            bounds,
            links,
            directions,
            scheme,
            moop: MoopParams {
                population,
                generations,
                reference_partitions: partitions,
            },
            no_reeval,
            budget,
            seed,
            out,
        }),
        Command::Nested {
            oracle,
            pref,
            per_pair_budget,
            pair_bounds,
            population,
            generations,
            partitions,
            budget,
            seed,
            out,
        } => cmd_nested(
            &oracle,
            &pref,
            per_pair_budget,
            &pair_bounds,
            MoopParams {
                population,
                generations,
                reference_partitions: partitions,
            },
            budget,
            seed,
            &out,
        ),
        Command::Bayes {
            oracle,
            n0,
            rounds,
            per_round,
            bins,
            bootstrap_q,
            alpha,
            bounds,
            directions,
            population,
            generations,
            partitions,
            reeval,
            budget,
            seed,
            out,
        } => cmd_bayes(BayesArgs {
            oracle,
            n0,
            rounds,
            per_round,
            bins,
            bootstrap_q,
            alpha,
            bounds,
            directions,
            moop: MoopParams {
                population,
                generations,
                reference_partitions: partitions,
            },
            reeval,
            budget,
            seed,
            out,
        }),
        Command::Compare {
            front_a,
            front_b,
            oracle,
            k,
            p,
            budget,
            seed,
            out,
        } => cmd_compare(&front_a, &front_b, &oracle, k, p, budget, seed, &out),
        Command::Report { run } => cmd_report(&run),
    }
}

fn cmd_gen_oracle(spec: &Path, out: &Path, seed: u64) -> Result<()> {
    let spec = OracleSpec::load(spec)?;
    let doc = spec.realize(seed)?;
    doc.save(out)
}

fn cmd_sample(
    n: usize,
    oracle: Option<&Path>,
    dim: Option<usize>,
    bounds: &str,
    scheme: &str,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let dim = match (oracle, dim) {
        (Some(path), None) => OracleDocument::load(path)?.landscape.task_count(),
        (None, Some(dim)) if dim > 0 => dim,
        _ => {
            return Err(Error::InvalidParameter(
                "pass exactly one of --oracle or --dim".into(),
            ))
        }
    };
    let bounds = parse_box(bounds, dim)?;
    let sampling = parse_scheme(scheme)?;
    let config = MapConfig {
        k_samples: n,
        sampling,
        ..MapConfig::new(
            n.max(1),
            bounds,
            vec![mergefront::oracle::MetricRange::Unbounded; dim],
            vec![Direction::Minimize; dim],
            seed,
        )
    };
    let mut rng = substream(seed, "sampling");
    let samples = sample_coefficients(&config, &mut rng);
    artifacts::save_samples_csv(out, &samples, dim)
}

fn parse_scheme(scheme: &str) -> Result<SamplingScheme> {
    match scheme {
        "uniform" => Ok(SamplingScheme::UniformBox),
        "latin" => Ok(SamplingScheme::LatinHypercube),
        other => Err(Error::InvalidParameter(format!(
            "scheme `{other}` must be uniform or latin"
        ))),
    }
}

fn cmd_evaluate(oracle: &Path, samples: &Path, out: &Path, budget: Option<u64>) -> Result<()> {
    let doc = OracleDocument::load(oracle)?;
    let n = doc.landscape.task_count();
    let oracle = SyntheticOracle::new(doc.landscape, doc.noise_seed)?.with_budget_cap(budget);
    let samples = artifacts::load_samples_csv(samples)?;
    oracle.check_budget(samples.len() as u64)?;
    let mut store = RecordStore::new(n);
    for c in samples {
        let metrics = oracle.evaluate(&c)?;
        store.add_evaluated(c, metrics)?;
    }
    store.save_csv(out)?;
    Ok(())
}

#[derive(Serialize)]
struct TaskFit {
    task: usize,
    r_squared: f64,
    residual_mse: f64,
    condition_warning: bool,
    converged: bool,
}

fn task_fits(reports: &[FitReport]) -> Vec<TaskFit> {
    reports
        .iter()
        .enumerate()
        .map(|(i, r)| TaskFit {
            task: i + 1,
            r_squared: r.r_squared,
            residual_mse: r.residual_mse,
            condition_warning: r.condition_warning,
            converged: r.converged,
        })
        .collect()
}

fn cmd_fit(
    records: &Path,
    oracle: Option<&Path>,
    links: Option<&str>,
    out: &Path,
) -> Result<()> {
    let store = RecordStore::load_csv(records, None)?;
    let n = store.n_tasks();
    let links = resolve_links(oracle, links, n)?;
    store.check_ranges(&links)?;
    std::fs::create_dir_all(out)?;
    let mut reports = Vec::with_capacity(n);
    for (task, link) in links.iter().enumerate() {
        let (model, report) = mergefront::pipeline::fit_task(&store, task, *link)?;
        write_json(&out.join(format!("surrogate_task_{}.json", task + 1)), &model)?;
        reports.push(report);
    }
    write_json(&out.join("fit_report.json"), &task_fits(&reports))
}

fn resolve_links(
    oracle: Option<&Path>,
    links: Option<&str>,
    n: usize,
) -> Result<Vec<mergefront::oracle::MetricRange>> {
    match (oracle, links) {
        (_, Some(text)) => parse_links(text, n),
        (Some(path), None) => {
            let doc = OracleDocument::load(path)?;
            if doc.landscape.task_count() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: doc.landscape.task_count(),
                });
            }
            Ok(doc.landscape.links())
        }
        (None, None) => Err(Error::InvalidParameter(
            "pass --oracle or --links to fix the per-task links".into(),
        )),
    }
}

struct MapArgs {
    oracle: Option<PathBuf>,
    records: Option<PathBuf>,
    k_samples: usize,
    bounds: String,
    links: Option<String>,
    directions: Option<String>,
    scheme: String,
    moop: MoopParams,
    no_reeval: bool,
    budget: Option<u64>,
    seed: u64,
    out: PathBuf,
}

#[derive(Serialize)]
struct MapReport {
    n_tasks: usize,
    k_samples: usize,
    eval_count: u64,
    front_predicted_size: usize,
    front_real_size: Option<usize>,
    per_task: Vec<TaskFit>,
}

fn write_map_artifacts(
    out: &Path,
    outcome: &MapOutcome,
    digest: &str,
    k_samples: usize,
) -> Result<()> {
    std::fs::create_dir_all(out)?;
    outcome.records.save_csv(&out.join("records.csv"))?;
    for (i, model) in outcome.surrogates.iter().enumerate() {
        write_json(&out.join(format!("surrogate_task_{}.json", i + 1)), model)?;
    }
    FrontDocument::from_front(&outcome.front_predicted, digest)
        .save(&out.join("front_predicted.json"))?;
    if let Some(real) = &outcome.front_real {
        FrontDocument::from_front(real, digest).save(&out.join("front_real.json"))?;
    }
    let report = MapReport {
        n_tasks: outcome.records.n_tasks(),
        k_samples,
        eval_count: outcome.eval_count,
        front_predicted_size: outcome.front_predicted.len(),
        front_real_size: outcome.front_real.as_ref().map(|f| f.len()),
        per_task: task_fits(&outcome.fit_reports),
    };
    write_json(&out.join("report.json"), &report)
}

fn cmd_map(args: MapArgs) -> Result<()> {
    let started_at = now_rfc3339();
    let (n, landscape, noise_seed) = match (&args.oracle, &args.records) {
        (Some(path), None) => {
            let doc = OracleDocument::load(path)?;
            let n = doc.landscape.task_count();
            (n, Some(doc.landscape), doc.noise_seed)
        }
        (None, Some(path)) => {
            let store = RecordStore::load_csv(path, None)?;
            (store.n_tasks(), None, 0)
        }
        _ => {
            return Err(Error::InvalidParameter(
                "pass exactly one of --oracle or --records".into(),
            ))
        }
    };
    let links = match (&args.links, &landscape) {
        (Some(text), _) => parse_links(text, n)?,
        (None, Some(land)) => land.links(),
        (None, None) => {
            return Err(Error::InvalidParameter(
                "offline mode needs --links".into(),
            ))
        }
    };
    let directions = match &args.directions {
        Some(text) => parse_directions(text, n)?,
        None => default_directions(&links),
    };
    let config = MapConfig {
        k_samples: args.k_samples,
        sampling: parse_scheme(&args.scheme)?,
        bounds: parse_box(&args.bounds, n)?,
        links,
        directions,
        moop: args.moop,
        seed: args.seed,
        reevaluate_front: !args.no_reeval && landscape.is_some(),
    };
    let digest = config_digest(&(&config, &landscape));

    let outcome = match landscape {
        Some(landscape) => {
            let oracle =
                SyntheticOracle::new(landscape, noise_seed)?.with_budget_cap(args.budget);
            run_map(&config, &oracle)?
        }
        None => {
            let store = RecordStore::load_csv(args.records.as_ref().unwrap(), None)?;
            store.check_ranges(&config.links)?;
            run_map_offline(&config, store)?
        }
    };
    write_map_artifacts(&args.out, &outcome, &digest, config.k_samples)?;
    write_manifest(
        &args.out,
        "map",
        &digest,
        args.seed,
        started_at,
        outcome.eval_count,
    )
}

#[derive(Serialize)]
struct NestedReport {
    n_tasks: usize,
    per_pair_budget: usize,
    map_evals: u64,
    loss_probe_evals: u64,
    eval_count: u64,
    rounds: usize,
}

#[allow(clippy::too_many_arguments)]
fn cmd_nested(
    oracle_path: &Path,
    pref: &str,
    per_pair_budget: usize,
    pair_bounds: &str,
    moop: MoopParams,
    budget: Option<u64>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let started_at = now_rfc3339();
    let doc = OracleDocument::load(oracle_path)?;
    let n = doc.landscape.task_count();
    let links = doc.landscape.links();
    let directions = default_directions(&links);
    let direction = directions[0];
    if directions.iter().any(|d| *d != direction) {
        return Err(Error::InvalidParameter(
            "nested merging requires a single shared direction across tasks".into(),
        ));
    }
    let pref = PreferenceVector::new(parse_weights(pref)?)?;
    if pref.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: pref.len(),
        });
    }
    let pair_box = parse_box(pair_bounds, 1)?[0];
    let config = NestedConfig {
        per_pair_budget,
        links,
        direction,
        pair_bounds: pair_box,
        moop,
        seed,
    };
    let digest = config_digest(&(&config, &pref, &doc.landscape));
    let oracle = SyntheticOracle::new(doc.landscape, doc.noise_seed)?.with_budget_cap(budget);

    // The synthetic world works directly in coefficient space: the
    // pretrained model is the origin and each fine-tuned model is the unit
    // vector of its task, so node parameters equal effective coefficients.
    let pretrained = ParameterVector(vec![0.0; n]);
    let finetuned: Vec<ParameterVector> = (0..n)
        .map(|t| {
            let mut v = vec![0.0; n];
            v[t] = 1.0;
            ParameterVector(v)
        })
        .collect();
    let nodes = leaf_nodes(&pretrained, &finetuned)?;
    let outcome = nested_merge(&pretrained, nodes, &pref, &config, &oracle)?;

    std::fs::create_dir_all(out)?;
    write_json(&out.join("merge_tree.json"), &outcome.rounds)?;
    let fronts: Vec<FrontDocument> = outcome
        .intermediate_fronts
        .iter()
        .map(|f| FrontDocument::from_front(f, &digest))
        .collect();
    write_json(&out.join("intermediate_fronts.json"), &fronts)?;
    write_json(
        &out.join("final.json"),
        &serde_json::json!({
            "final_coeffs": outcome.final_coeffs,
            "final_params": outcome.final_params,
        }),
    )?;
    write_json(
        &out.join("report.json"),
        &NestedReport {
            n_tasks: n,
            per_pair_budget,
            map_evals: outcome.map_evals,
            loss_probe_evals: outcome.loss_probe_evals,
            eval_count: outcome.eval_count,
            rounds: outcome.rounds.len(),
        },
    )?;
    write_manifest(out, "nested", &digest, seed, started_at, outcome.eval_count)
}

struct BayesArgs {
    oracle: PathBuf,
    n0: usize,
    rounds: usize,
    per_round: usize,
    bins: Option<usize>,
    bootstrap_q: usize,
    alpha: f64,
    bounds: String,
    directions: Option<String>,
    moop: MoopParams,
    reeval: bool,
    budget: Option<u64>,
    seed: u64,
    out: PathBuf,
}

fn cmd_bayes(args: BayesArgs) -> Result<()> {
    let started_at = now_rfc3339();
    let doc = OracleDocument::load(&args.oracle)?;
    let n = doc.landscape.task_count();
    let links = doc.landscape.links();
    let directions = match &args.directions {
        Some(text) => parse_directions(text, n)?,
        None => default_directions(&links),
    };
    let config = BasmConfig {
        iterations: args.rounds,
        initial_samples: args.n0,
        per_round_samples: args.per_round,
        bins_per_axis: args.bins.unwrap_or_else(|| default_bins_per_axis(n)),
        bootstrap_rounds: args.bootstrap_q,
        drop_rate: args.alpha,
        bounds: parse_box(&args.bounds, n)?,
        links,
        directions,
        moop: args.moop,
        seed: args.seed,
        reevaluate_front: args.reeval,
    };
    let digest = config_digest(&(&config, &doc.landscape));
    let oracle = SyntheticOracle::new(doc.landscape, doc.noise_seed)?.with_budget_cap(args.budget);
    let outcome = run_bayesian_map(&config, &oracle)?;

    write_map_artifacts(&args.out, &outcome.map, &digest, config.initial_samples)?;
    write_json(&args.out.join("rounds.json"), &outcome.rounds)?;
    write_manifest(
        &args.out,
        "bayes",
        &digest,
        args.seed,
        started_at,
        outcome.map.eval_count,
    )
}

#[derive(Serialize)]
struct CompareReport {
    win_rate: f64,
    gd: f64,
    igd: f64,
    gd_plus_igd: f64,
    k: usize,
    p: f64,
    seed: u64,
    normalized: bool,
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    front_a: &Path,
    front_b: &Path,
    oracle_path: &Path,
    k: usize,
    p: f64,
    budget: Option<u64>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let a = FrontDocument::load(front_a)?.into_front();
    let b = FrontDocument::load(front_b)?.into_front();
    let doc = OracleDocument::load(oracle_path)?;
    let n = doc.landscape.task_count();
    if a.objective_dim() != n || b.objective_dim() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: a.objective_dim().max(b.objective_dim()),
        });
    }
    let oracle = SyntheticOracle::new(doc.landscape, doc.noise_seed)?.with_budget_cap(budget);
    let rate = win_rate(&a, &b, &oracle, k, seed)?;
    let distances = normalized_front_distances(&a, &b, p)?;
    let report = CompareReport {
        win_rate: rate,
        gd: distances.gd,
        igd: distances.igd,
        gd_plus_igd: distances.total(),
        k,
        p,
        seed,
        normalized: true,
    };
    write_json(out, &report)
}

fn cmd_report(run: &Path) -> Result<()> {
    let report_path = run.join("report.json");
    let report: serde_json::Value = serde_json::from_reader(open_buffered(&report_path)?)?;
    println!("run directory: {}", run.display());
    if let Ok(file) = open_buffered(&run.join("run_manifest.json")) {
        let manifest: serde_json::Value = serde_json::from_reader(file)?;
        for key in [
            "command",
            "seed",
            "eval_count",
            "config_digest",
            "tool_version",
            "started_at",
            "finished_at",
        ] {
            if let Some(value) = manifest.get(key) {
                println!("  {key}: {value}");
            }
        }
    }
    println!("report:");
    print_value(&report, 1);
    Ok(())
}

fn open_buffered(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    Ok(std::io::BufReader::new(std::fs::File::open(path)?))
}

fn print_value(value: &serde_json::Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match value {
        serde_json::Value::Object(map) => {
            for (key, inner) in map {
                match inner {
                    serde_json::Value::Object(_) | serde_json::Value::Array(_) => {
                        println!("{pad}{key}:");
                        print_value(inner, indent + 1);
                    }
                    other => println!("{pad}{key}: {other}"),
                }
            }
        }
        serde_json::Value::Array(items) => {
            for item in items {
                if item.is_object() || item.is_array() {
                    println!("{pad}-");
                    print_value(item, indent + 1);
                } else {
                    println!("{pad}- {item}");
                }
            }
        }
        other => println!("{pad}{other}"),
    }
}
