use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use centrank::bter::{
    build_training_corpus, manifest_hash, render_network, BterConfig, CorpusSpec,
    DegreeDistributionSpec, DegreeFamily, MANIFEST_FILE,
};
use centrank::centrality::{
    betweenness_closeness, degree_centrality, eigenvector_centrality, EigenConfig, Metric,
};
use centrank::graph::{largest_connected_component, load_edge_list_file, Graph};
use centrank::nn::{train, write_history_csv, MlpModel, TrainConfig, Trainer};
use centrank::pipeline::{
    compare, make_dataset, predict, read_reports_file, summarize, write_reports, write_summary,
    CompareConfig, Dataset, ExactReference, NamedModel, RankPredictor,
};
use centrank::sample::{approx_betweenness_closeness, SampleConfig};
use centrank::{par, Error};

/// Exact, sampled and learned vertex centrality rankings.
#[derive(Parser, Debug)]
#[command(name = "centrank", version)]
struct Cli {
    /// Master seed for generation, sampling and training.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to CENTRANK_WORKERS, then the core count).
    #[arg(long, global = true, env = "CENTRANK_WORKERS")]
    workers: Option<usize>,
    /// Output file or directory; stdout when omitted and the command allows it.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a BTER network or a whole training corpus.
    Generate(GenerateArgs),
    /// Exact centrality of every vertex.
    Exact(ExactArgs),
    /// Source-sampling estimate of betweenness or closeness.
    Sample(SampleArgs),
    /// Build a training dataset from a corpus.
    MakeDataset(MakeDatasetArgs),
    /// Train a ranking model on a dataset.
    Train(TrainArgs),
    /// Rank the vertices of a graph with a trained model.
    Predict(PredictArgs),
    /// Compare exact, sampled and model rankings on one graph.
    Compare(CompareArgs),
    /// Summarize comparison reports.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Build a corpus (`desk` or `full`) into the --output directory.
    #[arg(long, conflicts_with_all = ["n", "family", "lambda", "s", "clustering"])]
    corpus: Option<CorpusKind>,
    #[arg(long, required_unless_present = "corpus")]
    n: Option<usize>,
    /// `heavy` (power law, needs --lambda) or `lognormal` (needs --s).
    #[arg(long, required_unless_present = "corpus")]
    family: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// Within-block link probability.
    #[arg(long, default_value_t = 0.5)]
    clustering: f64,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CorpusKind {
    Desk,
    Full,
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_metric)]
    metric: Metric,
    /// Reduce a disconnected graph to its largest component.
    #[arg(long)]
    lcc: bool,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_metric)]
    metric: Metric,
    #[arg(long, default_value_t = 0.05)]
    fraction: f64,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long)]
    lcc: bool,
}

#[derive(Args, Debug)]
struct MakeDatasetArgs {
    /// Corpus directory or its manifest CSV.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_parser = parse_metric)]
    target: Metric,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_parser = parse_metric)]
    target: Metric,
    /// `lm`, `gd`, `gdm` or `rprop`.
    #[arg(long, default_value = "lm")]
    algo: String,
    #[arg(long, default_value_t = 1000)]
    max_epochs: usize,
    #[arg(long, default_value_t = 10)]
    patience: usize,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [20, 20, 20])]
    hidden: Vec<usize>,
    /// Stop after this many seconds (the result is then not reproducible).
    #[arg(long)]
    time_budget: Option<f64>,
    /// Per-epoch history CSV; defaults to `<output>.history.csv`.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    input: PathBuf,
    /// Trained model; repeat for several.
    #[arg(long)]
    model: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.025, 0.05])]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Network name in the report; defaults to the input file stem.
    #[arg(long)]
    name: Option<String>,
    /// Write 0 for every wall time so reruns are byte-identical.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Comparison report CSVs.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse::<Metric>().map_err(|e| e.to_string())
}

/// Errors split by exit status: usage (1) or data (2).
enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    let workers = cli.workers.unwrap_or_else(par::default_workers);
    if workers == 0 {
        return Err(usage("--workers must be positive"));
    }
    par::with_workers(workers, || match &cli.command {
        Command::Generate(a) => generate(cli, a, workers),
        Command::Exact(a) => exact(cli, a, workers),
        Command::Sample(a) => sample(cli, a, workers),
        Command::MakeDataset(a) => make_dataset_cmd(cli, a, workers),
        Command::Train(a) => train_cmd(cli, a),
        Command::Predict(a) => predict_cmd(cli, a),
        Command::Compare(a) => compare_cmd(cli, a, workers),
        Command::Report(a) => report(cli, a),
    })
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn require_output(cli: &Cli, what: &str) -> Result<PathBuf, Failure> {
    cli.output
        .clone()
        .ok_or_else(|| usage(format!("{what} needs --output")))
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

fn load_graph(path: &Path, reduce: bool) -> Result<Graph, Failure> {
    let (g, diag) = load_edge_list_file(path)?;
    if diag.self_loops + diag.duplicates > 0 {
        log::warn!(
            "{}: dropped {} self-loops and {} duplicate edges",
            path.display(),
            diag.self_loops,
            diag.duplicates
        );
    }
    if reduce && !g.is_connected() {
        let lcc = largest_connected_component(&g);
        log::warn!(
            "{}: disconnected; using the largest component ({} of {} vertices)",
            path.display(),
            lcc.n(),
            g.n()
        );
        return Ok(lcc);
    }
    Ok(g)
}

fn generate(cli: &Cli, a: &GenerateArgs, workers: usize) -> CmdResult {
    if let Some(kind) = a.corpus {
        let dir = require_output(cli, "generate --corpus")?;
        let spec = match kind {
            CorpusKind::Desk => CorpusSpec::desk(cli.seed),
            CorpusKind::Full => CorpusSpec::full(cli.seed),
        };
        let manifest = build_training_corpus(&dir, &spec, workers)?;
        let hash = manifest_hash(&dir)?;
        let mut out = open_output(None)?;
        match cli.format {
            Format::Json => write_json(
                &mut out,
                &serde_json::json!({
                    "manifest": dir.join(MANIFEST_FILE),
                    "networks": manifest.rows.len(),
                    "vertices": manifest.rows.iter().map(|r| r.meta.n).sum::<usize>(),
                    "manifest_sha256": hash,
                }),
            )?,
            Format::Csv => writeln!(out, "{}\t{hash}", dir.join(MANIFEST_FILE).display())?,
        }
        return Ok(out.flush()?);
    }

    let n = a.n.ok_or_else(|| usage("--n is required"))?;
    let family_name = a.family.as_deref().ok_or_else(|| usage("--family is required"))?;
    let parameter = match family_name {
        "lognormal" => a.s.ok_or_else(|| usage("lognormal needs --s"))?,
        _ => a.lambda.ok_or_else(|| usage(format!("{family_name} needs --lambda")))?,
    };
    let family = DegreeFamily::from_name(family_name, parameter)?;
    let cfg = BterConfig {
        n,
        dist: DegreeDistributionSpec::new(family),
        clustering_target: a.clustering,
        seed: cli.seed,
    };
    let (meta, edges) = render_network(&cfg)?;
    match (&cli.output, cli.format) {
        (None, Format::Json) => {
            return Err(usage("--format json prints metadata; give --output for the edges"))
        }
        (Some(path), fmt) => {
            std::fs::write(path, &edges).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            if fmt == Format::Json {
                write_json(&mut io::stdout().lock(), &meta)?;
            }
        }
        (None, Format::Csv) => io::stdout().lock().write_all(&edges)?,
    }
    log::info!(
        "generated n={} m={} clustering={:.4}",
        meta.n,
        meta.realized_m,
        meta.realized_clustering
    );
    Ok(())
}

#[derive(Serialize)]
struct VertexValue {
    vertex_id: u64,
    value: f64,
}

#[derive(Serialize)]
struct ScoresJson {
    metric: Metric,
    n: usize,
    m: usize,
    seconds: f64,
    workers: usize,
    values: Vec<VertexValue>,
}

fn vertex_values(g: &Graph, values: &[f64]) -> Vec<VertexValue> {
    values
        .iter()
        .enumerate()
        .map(|(v, &value)| VertexValue {
            vertex_id: g.label(v),
            value,
        })
        .collect()
}

fn exact(cli: &Cli, a: &ExactArgs, workers: usize) -> CmdResult {
    let g = load_graph(&a.input, a.lcc)?;
    let start = Instant::now();
    let values = match a.metric {
        Metric::Degree => degree_centrality(&g).values,
        Metric::Eigenvector => {
            let r = eigenvector_centrality(&g, EigenConfig::default())?;
            if r.warning() {
                log::warn!(
                    "eigenvector iteration: converged={} oscillation={} residual={:e}",
                    r.converged,
                    r.oscillation,
                    r.residual
                );
            }
            r.scores.values
        }
        Metric::Betweenness => betweenness_closeness(&g, workers)?.0.values,
        Metric::Closeness => betweenness_closeness(&g, workers)?.1.values,
    };
    let seconds = start.elapsed().as_secs_f64();
    let mut out = open_output(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => {
            writeln!(out, "vertex_id,value")?;
            for (v, x) in values.iter().enumerate() {
                writeln!(out, "{},{x}", g.label(v))?;
            }
        }
        Format::Json => write_json(
            &mut out,
            &ScoresJson {
                metric: a.metric,
                n: g.n(),
                m: g.m(),
                seconds,
                workers,
                values: vertex_values(&g, &values),
            },
        )?,
    }
    Ok(out.flush()?)
}

#[derive(Serialize)]
struct SampleTrialJson {
    fraction: f64,
    seed: u64,
    trial: usize,
    seconds: f64,
    values: Vec<VertexValue>,
}

#[derive(Serialize)]
struct SampleJson {
    metric: Metric,
    n: usize,
    m: usize,
    workers: usize,
    trials: Vec<SampleTrialJson>,
}

fn sample(cli: &Cli, a: &SampleArgs, workers: usize) -> CmdResult {
    if !matches!(a.metric, Metric::Betweenness | Metric::Closeness) {
        return Err(usage("sampling estimates betweenness or closeness"));
    }
    let g = load_graph(&a.input, a.lcc)?;
    let base = SampleConfig {
        trials: a.trials,
        ..SampleConfig::new(a.fraction, cli.seed)
    };
    base.validate()?;
    let mut trials = Vec::with_capacity(a.trials);
    for t in 0..a.trials {
        let cfg = base.trial(t);
        let start = Instant::now();
        let est = approx_betweenness_closeness(&g, &cfg, workers)?;
        let values = match a.metric {
            Metric::Betweenness => est.betweenness.values,
            _ => est.closeness.values,
        };
        trials.push(SampleTrialJson {
            fraction: a.fraction,
            seed: cfg.seed,
            trial: t,
            seconds: start.elapsed().as_secs_f64(),
            values: vertex_values(&g, &values),
        });
    }
    let mut out = open_output(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => {
            writeln!(out, "vertex_id,value,fraction,seed,trial")?;
            for t in &trials {
                for v in &t.values {
                    writeln!(out, "{},{},{},{},{}", v.vertex_id, v.value, t.fraction, t.seed, t.trial)?;
                }
            }
        }
        Format::Json => write_json(
            &mut out,
            &SampleJson {
                metric: a.metric,
                n: g.n(),
                m: g.m(),
                workers,
                trials,
            },
        )?,
    }
    Ok(out.flush()?)
}

fn make_dataset_cmd(cli: &Cli, a: &MakeDatasetArgs, workers: usize) -> CmdResult {
    if !matches!(a.target, Metric::Betweenness | Metric::Closeness) {
        return Err(usage("dataset target must be betweenness or closeness"));
    }
    let path = require_output(cli, "make-dataset")?;
    let ds = make_dataset(&a.corpus, a.target, workers)?;
    ds.save(&path)?;
    if cli.format == Format::Json {
        write_json(
            &mut io::stdout().lock(),
            &serde_json::json!({
                "dataset": path,
                "target": ds.target,
                "rows": ds.len(),
                "manifest_sha256": ds.manifest_hash,
            }),
        )?;
    }
    Ok(())
}

fn train_cmd(cli: &Cli, a: &TrainArgs) -> CmdResult {
    let path = require_output(cli, "train")?;
    let ds = Dataset::load(&a.dataset)?;
    if ds.target != a.target {
        return Err(Failure::Data(format!(
            "{} holds {} labels, not {}",
            a.dataset.display(),
            ds.target,
            a.target
        )));
    }
    let mut cfg = TrainConfig::new(Trainer::from_name(&a.algo)?, cli.seed);
    cfg.layer_sizes = std::iter::once(2)
        .chain(a.hidden.iter().copied())
        .chain(std::iter::once(1))
        .collect();
    cfg.max_epochs = a.max_epochs;
    cfg.patience = a.patience;
    cfg.time_budget_secs = a.time_budget;
    let outcome = train(&ds.training_set(), &cfg)?;
    let mut model = outcome.model;
    model.target_metric = Some(a.target);
    if let Some(p) = model.provenance.as_mut() {
        p.corpus_manifest_hash = Some(ds.manifest_hash.clone());
    }
    model.save(&path)?;
    let history_path = a.history.clone().unwrap_or_else(|| {
        let mut s = path.clone().into_os_string();
        s.push(".history.csv");
        PathBuf::from(s)
    });
    let f = File::create(&history_path)
        .map_err(|e| Failure::Data(format!("{}: {e}", history_path.display())))?;
    let mut w = BufWriter::new(f);
    write_history_csv(&mut w, &outcome.history)?;
    w.flush()?;
    if cli.format == Format::Json {
        write_json(
            &mut io::stdout().lock(),
            &serde_json::json!({
                "model": path,
                "history": history_path,
                "epochs": outcome.history.last().map_or(0, |r| r.epoch),
                "best_epoch": outcome.best_epoch,
                "best_val_mse": outcome.best_val_mse,
                "stop_reason": outcome.stop_reason.as_str(),
            }),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PredictionJson {
    metric: Option<Metric>,
    n: usize,
    m: usize,
    reduced_to_lcc: bool,
    vertices: Vec<PredictedVertex>,
}

#[derive(Serialize)]
struct PredictedVertex {
    vertex_id: u64,
    value: f64,
    rank: f64,
}

fn predict_cmd(cli: &Cli, a: &PredictArgs) -> CmdResult {
    let model = MlpModel::load(&a.model)?;
    let g = load_graph(&a.input, false)?;
    let p = predict(&g, &model)?;
    let mut out = open_output(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => {
            writeln!(out, "vertex_id,value,rank")?;
            for i in 0..p.labels.len() {
                writeln!(out, "{},{},{}", p.labels[i], p.scores[i], p.ranks.ranks[i])?;
            }
        }
        Format::Json => write_json(
            &mut out,
            &PredictionJson {
                metric: model.target_metric,
                n: p.labels.len(),
                m: g.m(),
                reduced_to_lcc: p.reduced_to_lcc,
                vertices: (0..p.labels.len())
                    .map(|i| PredictedVertex {
                        vertex_id: p.labels[i],
                        value: p.scores[i],
                        rank: p.ranks.ranks[i],
                    })
                    .collect(),
            },
        )?,
    }
    Ok(out.flush()?)
}

fn compare_cmd(cli: &Cli, a: &CompareArgs, workers: usize) -> CmdResult {
    let g = load_graph(&a.input, true)?;
    let mut models = Vec::new();
    for path in &a.model {
        let model = MlpModel::load(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().replace([',', ':'], "_"))
            .unwrap_or_else(|| "model".into());
        models.push(NamedModel { name, model });
    }
    let predictors: Vec<&dyn RankPredictor> = models.iter().map(|m| m as &dyn RankPredictor).collect();
    let network = a.name.clone().unwrap_or_else(|| {
        a.input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    if network.contains(',') {
        return Err(usage("network name may not contain commas"));
    }
    let cfg = CompareConfig {
        fractions: a.fractions.clone(),
        trials: a.trials,
        seed: cli.seed,
        workers,
        record_timings: !a.no_timings,
    };
    let run = compare(&network, &g, |g| ExactReference::compute(g, workers), &predictors, &cfg)?;
    let mut out = open_output(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => write_reports(&mut out, &run.reports)?,
        Format::Json => write_json(&mut out, &run)?,
    }
    Ok(out.flush()?)
}

fn report(cli: &Cli, a: &ReportArgs) -> CmdResult {
    let mut rows = Vec::new();
    for p in &a.input {
        rows.extend(read_reports_file(p)?);
    }
    let summary = summarize(&rows);
    let mut out = open_output(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => write_summary(&mut out, &summary)?,
        Format::Json => write_json(&mut out, &summary)?,
    }
    Ok(out.flush()?)
}
