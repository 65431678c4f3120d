//! Command-line interface: `serve`, `import`, `evaluate`, `kpi` and `bench`.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use erbench_core::clustering::{confusion_matrix_sequence, naive_confusion_sequence};
use erbench_core::exploration::PairMode;
use erbench_core::softkpi::{MetricSelection, Term, WeightedTerm};
use erbench_core::synthetic::{generate, SyntheticSpec};
use erbench_core::{Aggregation, Error, PairMetric, Rates, Result};
use serde::Serialize;

use crate::error::exit_code;
use crate::http::{serve, ServeConfig};
use crate::ops::*;

#[derive(Debug, Parser)]
#[command(name = "erbench", version, about = "Evaluate entity-resolution results")]
pub struct Cli {
    /// Directory holding the stored datasets, gold standards, experiments and solutions.
    #[arg(long, global = true, env = "ERBENCH_DATA_DIR", default_value = "erbench-data")]
    pub data_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Start the HTTP service.
    Serve {
        #[arg(long, env = "ERBENCH_PORT", default_value_t = 8080)]
        port: u16,
        /// Listen on all interfaces instead of localhost.
        #[arg(long)]
        public: bool,
        /// Allow cross-origin requests.
        #[arg(long)]
        cors: bool,
        #[arg(long, default_value_t = DEFAULT_PAGE_SIZE)]
        page_size: usize,
    },
    /// Import CSV files into the store.
    #[command(subcommand)]
    Import(ImportCommand),
    /// Evaluate stored experiments.
    #[command(subcommand)]
    Evaluate(EvaluateCommand),
    /// Soft-KPI decision support.
    #[command(subcommand)]
    Kpi(KpiCommand),
    /// Time the optimized and naive confusion-matrix sequences on synthetic data.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    #[arg(long)]
    separator: Option<String>,
    #[arg(long)]
    quote: Option<String>,
    #[arg(long)]
    escape: Option<String>,
}

impl CsvArgs {
    fn options(&self) -> CsvOptions {
        CsvOptions {
            separator: self.separator.clone(),
            quote: self.quote.clone(),
            escape: self.escape.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GoldFormatArg {
    Pairs,
    Clusters,
}

#[derive(Debug, Subcommand)]
pub enum ImportCommand {
    Dataset {
        file: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "id")]
        id_column: String,
        #[command(flatten)]
        csv: CsvArgs,
    },
    Gold {
        file: PathBuf,
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        name: String,
        #[arg(long, value_enum, default_value = "pairs")]
        format: GoldFormatArg,
        #[arg(long, default_value = "id1")]
        first: String,
        #[arg(long, default_value = "id2")]
        second: String,
        #[arg(long, default_value = "id")]
        id_column: String,
        #[arg(long, default_value = "cluster")]
        cluster_column: String,
        #[command(flatten)]
        csv: CsvArgs,
    },
    Experiment {
        file: PathBuf,
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        name: String,
        #[arg(long)]
        solution: Option<String>,
        #[arg(long, default_value = "id1")]
        first: String,
        #[arg(long, default_value = "id2")]
        second: String,
        #[arg(long)]
        similarity: Option<String>,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Solution KPI sheet; creates or updates solutions by name.
    Solutions { file: PathBuf },
    /// Experiment KPI sheet.
    ExperimentKpis { file: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum EvaluateCommand {
    Metrics {
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        gold: String,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    Diagram {
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        gold: String,
        #[arg(long, default_value = "precision")]
        x: PairMetric,
        #[arg(long, default_value = "recall")]
        y: PairMetric,
        #[arg(short, long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    Venn {
        #[arg(required = true)]
        sources: Vec<String>,
        /// Count only matches the solutions emitted, not closure pairs.
        #[arg(long)]
        original_only: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Pairs in every `--include` source and in no `--exclude` source.
    Set {
        #[arg(long, required = true)]
        include: Vec<String>,
        #[arg(long)]
        exclude: Vec<String>,
        #[arg(long)]
        original_only: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    Profile {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        gold: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn parse_rate_point(s: &str) -> std::result::Result<(f64, f64), String> {
    let (x, y) = s.split_once(':').ok_or("expected EXPERTISE:RATE")?;
    Ok((
        x.trim().parse().map_err(|_| format!("bad expertise `{x}`"))?,
        y.trim().parse().map_err(|_| format!("bad rate `{y}`"))?,
    ))
}

fn parse_term(s: &str) -> std::result::Result<WeightedTerm<f64>, String> {
    let (term, weight) = s.rsplit_once('=').ok_or("expected TERM=WEIGHT")?;
    Ok(WeightedTerm {
        term: term.parse::<Term>().map_err(|e| e.to_string())?,
        weight: weight.trim().parse().map_err(|_| format!("bad weight `{weight}`"))?,
    })
}

#[derive(Debug, Args)]
pub struct KpiArgs {
    #[arg(long)]
    gold: String,
    /// Restrict to these solutions (default: all).
    #[arg(long)]
    solution: Vec<String>,
    /// Hourly rate points as EXPERTISE:RATE (default: a flat rate of 1).
    #[arg(long, value_parser = parse_rate_point)]
    rate: Vec<(f64, f64)>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value = "f1")]
    best_by: PairMetric,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl KpiArgs {
    fn rates(&self) -> Result<Rates> {
        if self.rate.is_empty() {
            Ok(Rates::default())
        } else {
            Rates::new(self.rate.clone())
        }
    }

    fn solutions(&self) -> Option<Vec<String>> {
        (!self.solution.is_empty()).then(|| self.solution.clone())
    }
}

#[derive(Debug, Subcommand)]
pub enum KpiCommand {
    Matrix {
        #[command(flatten)]
        common: KpiArgs,
        /// Quality metrics shown per solution.
        #[arg(long, value_delimiter = ',', default_value = "precision,recall,f1")]
        metrics: Vec<PairMetric>,
    },
    Aggregate {
        #[command(flatten)]
        common: KpiArgs,
        /// Weighted term such as `metric:f1=1` or `totalCost=-0.5`.
        #[arg(long = "term", required = true, value_parser = parse_term)]
        terms: Vec<WeightedTerm<f64>>,
    },
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100_000)]
    records: usize,
    #[arg(long, default_value_t = 45_000)]
    matches: usize,
    #[arg(short, long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    /// Time the naive recomputation (both run when neither flag is given).
    #[arg(long)]
    naive: bool,
    /// Time the incremental algorithm.
    #[arg(long)]
    optimized: bool,
}

fn mode(original_only: bool) -> PairMode {
    if original_only {
        PairMode::OriginalOnly
    } else {
        PairMode::Closure
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_out() -> csv::Writer<io::Stdout> {
    csv::Writer::from_writer(io::stdout())
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::InvalidArgument(format!("cannot read `{}`: {e}", path.display())))
}

fn import(service: &Service, cmd: ImportCommand) -> Result<()> {
    match cmd {
        ImportCommand::Dataset {
            file,
            name,
            id_column,
            csv,
        } => {
            let upload = DatasetUpload {
                name,
                id_column,
                csv: csv.options(),
            };
            print_json(&service.import_dataset(&upload, &read_file(&file)?)?)
        }
        ImportCommand::Gold {
            file,
            dataset,
            name,
            format,
            first,
            second,
            id_column,
            cluster_column,
            csv,
        } => {
            let upload = GoldUpload {
                dataset,
                name,
                format: match format {
                    GoldFormatArg::Pairs => GoldFormat::Pairs,
                    GoldFormatArg::Clusters => GoldFormat::Clusters,
                },
                first,
                second,
                id_column,
                cluster_column,
                csv: csv.options(),
            };
            print_json(&service.import_gold_standard(&upload, &read_file(&file)?)?)
        }
        ImportCommand::Experiment {
            file,
            dataset,
            name,
            solution,
            first,
            second,
            similarity,
            csv,
        } => {
            let upload = ExperimentUpload {
                dataset,
                name,
                solution,
                first,
                second,
                similarity,
                csv: csv.options(),
            };
            print_json(&service.import_experiment(&upload, &read_file(&file)?)?)
        }
        ImportCommand::Solutions { file } => print_json(&service.import_solutions(&read_file(&file)?)?),
        ImportCommand::ExperimentKpis { file } => print_json(&service.import_experiment_kpis(&read_file(&file)?)?),
    }
}

fn evaluate(service: &Service, cmd: EvaluateCommand) -> Result<()> {
    match cmd {
        EvaluateCommand::Metrics {
            experiment,
            gold,
            threshold,
            format,
        } => {
            let r = service.metrics(&PairRequest {
                experiment,
                gold,
                threshold,
            })?;
            if format == Format::Json {
                return print_json(&r);
            }
            let mut w = csv_out();
            w.write_record(["metric", "value"])?;
            let m = r.matrix;
            for (name, v) in [("tp", m.tp), ("fp", m.fp), ("fn", m.fn_), ("tn", m.tn)] {
                w.write_record([name, &v.to_string()])?;
            }
            for metric in r.pair_metrics.iter().chain(&r.cluster_metrics) {
                w.write_record([metric.name.as_str(), &opt(metric.value)])?;
            }
            w.write_record(["closureDeficiency", &r.closure_deficiency.to_string()])?;
            w.flush()?;
            Ok(())
        }
        EvaluateCommand::Diagram {
            experiment,
            gold,
            x,
            y,
            samples,
            format,
        } => {
            let r = service.diagram(&DiagramRequest {
                experiment,
                gold,
                x,
                y,
                samples,
            })?;
            if format == Format::Json {
                return print_json(&r);
            }
            let mut w = csv_out();
            w.write_record(["threshold", x.name(), y.name(), "tp", "fp", "fn", "tn"])?;
            for p in &r.points {
                let (tp, fp, fn_, tn) = p.matrix.as_tuple();
                w.write_record([
                    opt(p.threshold),
                    opt(p.x),
                    opt(p.y),
                    tp.to_string(),
                    fp.to_string(),
                    fn_.to_string(),
                    tn.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        EvaluateCommand::Venn {
            sources,
            original_only,
            format,
        } => {
            let r = service.venn(&VennRequest {
                sources,
                pair_mode: mode(original_only),
            })?;
            if format == Format::Json {
                return print_json(&r);
            }
            let mut w = csv_out();
            w.write_record(["mask", "include", "exclude", "count"])?;
            for region in &r.regions {
                w.write_record([
                    region.mask.to_string(),
                    region.expression.include.join(";"),
                    region.expression.exclude.join(";"),
                    region.count.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        EvaluateCommand::Set {
            include,
            exclude,
            original_only,
            format,
        } => {
            let r = service.set_members(&SetRequest {
                include,
                exclude,
                pair_mode: mode(original_only),
                page: None,
                page_size: None,
            })?;
            if format == Format::Json {
                return print_json(&r);
            }
            let mut w = csv_out();
            w.write_record(["id1", "id2"])?;
            for p in &r.pairs {
                w.write_record(p)?;
            }
            w.flush()?;
            Ok(())
        }
        EvaluateCommand::Profile { dataset, gold, format } => {
            let r = service.profile(&ProfileRequest { dataset, gold })?;
            if format == Format::Json {
                return print_json(&r);
            }
            let mut w = csv_out();
            w.write_record(["dataset", "sparsity", "textuality", "tupleCount", "positiveRatio", "vocabularySize"])?;
            w.write_record([
                r.dataset.clone(),
                r.sparsity.to_string(),
                r.textuality.to_string(),
                r.tuple_count.to_string(),
                opt(r.positive_ratio),
                r.vocabulary_size.to_string(),
            ])?;
            w.flush()?;
            Ok(())
        }
    }
}

fn kpi(service: &Service, cmd: KpiCommand) -> Result<()> {
    match cmd {
        KpiCommand::Matrix { common, metrics } => {
            let rows = service.decision_matrix(&DecisionMatrixRequest {
                gold: common.gold.clone(),
                solutions: common.solutions(),
                selection: MetricSelection {
                    metrics: metrics.clone(),
                    best_by: common.best_by,
                },
                rate: common.rates()?,
                threshold: common.threshold,
            })?;
            if common.format == Format::Json {
                return print_json(&rows);
            }
            let mut w = csv_out();
            let mut header: Vec<String> = [
                "solution",
                "generalCosts",
                "effortHours",
                "effortCost",
                "totalCost",
                "experiments",
                "bestExperiment",
            ]
            .map(String::from)
            .to_vec();
            header.extend(metrics.iter().map(|m| m.name().to_owned()));
            w.write_record(&header)?;
            for r in &rows {
                let mut record = vec![
                    r.solution_name.clone(),
                    opt(r.general_costs),
                    opt(r.effort_hours),
                    opt(r.effort_cost),
                    opt(r.total_cost),
                    r.experiment_count.to_string(),
                    r.best_experiment.clone().unwrap_or_default(),
                ];
                record.extend(metrics.iter().map(|m| opt(r.quality.get(m).copied().flatten())));
                w.write_record(&record)?;
            }
            w.flush()?;
            Ok(())
        }
        KpiCommand::Aggregate { common, terms } => {
            let rows = service.aggregate(&AggregateRequest {
                gold: common.gold.clone(),
                solutions: common.solutions(),
                best_by: common.best_by,
                threshold: common.threshold,
                aggregation: Aggregation {
                    rate: common.rates()?,
                    terms,
                },
            })?;
            if common.format == Format::Json {
                return print_json(&rows);
            }
            let mut w = csv_out();
            w.write_record(["rank", "solution", "score"])?;
            for r in &rows {
                w.write_record([r.rank.to_string(), r.solution_name.clone(), r.score.to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn bench(args: &BenchArgs) -> Result<()> {
    if args.repeat == 0 {
        return Err(Error::InvalidArgument("repeat must be at least 1".into()));
    }
    let instance = generate(&SyntheticSpec {
        records: args.records,
        matches: args.matches,
        seed: args.seed,
        ..SyntheticSpec::default()
    });
    let both = !args.naive && !args.optimized;
    let mut w = csv_out();
    w.write_record(["algorithm", "records", "matches", "samples", "seconds"])?;
    type Algorithm = fn(
        usize,
        &[erbench_core::ScoredPair],
        &erbench_core::Clustering,
        usize,
    ) -> Result<Vec<erbench_core::ConfusionMatrix>>;
    let algorithms: [(&str, bool, Algorithm); 2] = [
        ("optimized", both || args.optimized, confusion_matrix_sequence),
        ("naive", both || args.naive, naive_confusion_sequence),
    ];
    for (name, enabled, run) in algorithms {
        if !enabled {
            continue;
        }
        for _ in 0..args.repeat {
            let start = Instant::now();
            run(args.records, &instance.matches, &instance.truth, args.samples)?;
            let seconds = start.elapsed().as_secs_f64();
            w.write_record([
                name.to_owned(),
                args.records.to_string(),
                instance.matches.len().to_string(),
                args.samples.to_string(),
                format!("{seconds:.6}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Serve {
            port,
            public,
            cors,
            page_size,
        } => {
            let config = ServeConfig {
                port,
                data_dir: cli.data_dir,
                public,
                cors,
                page_size,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime
                .block_on(serve(config))
                .map_err(|e| match e.downcast::<Error>() {
                    Ok(e) => *e,
                    Err(e) => Error::Io(io::Error::other(e.to_string())),
                })
        }
        Command::Bench(args) => bench(&args),
        Command::Import(cmd) => import(&Service::open(&cli.data_dir, DEFAULT_PAGE_SIZE)?, cmd),
        Command::Evaluate(cmd) => evaluate(&Service::open(&cli.data_dir, DEFAULT_PAGE_SIZE)?, cmd),
        Command::Kpi(cmd) => kpi(&Service::open(&cli.data_dir, DEFAULT_PAGE_SIZE)?, cmd),
    }
}

pub fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
