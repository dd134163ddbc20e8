use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gbdt_engine::io::{self, DataFormat, LoadOptions};
use gbdt_engine::quantizer::{self, BinMap, MAX_BINS};
use gbdt_engine::{estimate, evaluate_per_tree, train, CostParams, Result, TrainConfig};

/// Histogram-based gradient boosted trees in fixed point.
#[derive(Parser)]
#[command(name = "gbdt-engine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit per-feature bin centroids and write them as JSON.
    Quantize {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = MAX_BINS)]
        max_bins: usize,
        #[arg(long)]
        bins: PathBuf,
    },
    /// Train an ensemble.
    Train(TrainArgs),
    /// Write one prediction per line.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        /// Probabilities instead of margins.
        #[arg(long)]
        proba: bool,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// AUC after every tree and the best of them.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Cycle and wall-time estimate for a training log.
    Cost {
        #[arg(long)]
        log: PathBuf,
        /// Defaults to the engine count recorded in the log.
        #[arg(long)]
        engines: Option<usize>,
        #[arg(long, default_value_t = 100.0)]
        clock_mhz: f64,
        #[arg(long, default_value_t = 16)]
        latency: u64,
        #[arg(long, default_value_t = 256)]
        scan_cycles: u64,
        #[arg(long, default_value_t = 64)]
        tree_overhead: u64,
        /// Validation samples scored once per tree.
        #[arg(long, default_value_t = 0)]
        n_valid: usize,
        /// Also write `key=value` lines here.
        #[arg(long)]
        kv: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "csv")]
    format: DataFormat,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 0)]
    label_column: usize,
    /// Reject labels other than 0 and 1.
    #[arg(long)]
    strict_labels: bool,
}

impl DataArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            format: self.format,
            label_column: self.label_column,
            has_header: self.header,
            strict_labels: self.strict_labels,
        }
    }

    fn load(&self) -> Result<quantizer::RawDataset> {
        io::load_dataset(&self.input, &self.options())
    }

    /// Loads `path` with the same parsing options.
    fn load_other(&self, path: &Path) -> Result<quantizer::RawDataset> {
        io::load_dataset(path, &self.options())
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Validation data, same format; enables per-tree AUC in the metrics.
    #[arg(long)]
    valid: Option<PathBuf>,
    /// Bin map from `quantize`; fitted on the input when absent.
    #[arg(long)]
    bins: Option<PathBuf>,
    #[arg(long)]
    model: PathBuf,
    /// Per-node sample counts, for `cost`.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Per-tree loss (and validation AUC) as CSV.
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    max_depth: usize,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long, default_value_t = 0.5)]
    subsample: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 64)]
    engines: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 24)]
    frac_bits: u32,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run_train(a: TrainArgs) -> Result<()> {
    let config = TrainConfig {
        lambda: a.lambda,
        gamma: a.gamma,
        max_depth: a.max_depth,
        n_trees: a.trees,
        subsample: a.subsample,
        eta: a.eta,
        n_engines: a.engines,
        seed: a.seed,
        frac_bits: a.frac_bits,
    };
    config.validate()?;
    let raw = a.data.load()?;
    let bins = match &a.bins {
        Some(p) => io::bin_map_from_str(&std::fs::read_to_string(p)?)?,
        None => BinMap::fit(&raw, MAX_BINS)?,
    };
    let data = quantizer::transform(&raw, &bins)?;
    let outcome = train(&data, raw.labels(), &config)?;
    io::save_model(&outcome.model, &a.model)?;
    if let Some(p) = &a.log {
        std::fs::write(p, io::log_to_string(&outcome.log)?)?;
    }
    let valid_auc = match &a.valid {
        Some(p) => {
            let v = a.data.load_other(p)?;
            let per_tree = evaluate_per_tree(
                &outcome.model,
                &quantizer::transform(&v, &bins)?,
                v.labels(),
            )?;
            eprintln!(
                "max validation auc {} after {} trees",
                per_tree.max, per_tree.best_trees
            );
            Some(per_tree.aucs)
        }
        None => None,
    };
    if let Some(p) = &a.metrics {
        let mut out = create(p)?;
        io::write_metrics_csv(&mut out, &outcome.log, valid_auc.as_deref())?;
        out.flush()?;
    }
    let last = outcome.log.trees.last().map_or(f64::NAN, |t| t.train_loss);
    eprintln!(
        "trained {} trees, final train loss {last}",
        outcome.model.trees.len()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Quantize {
            data,
            max_bins,
            bins,
        } => {
            let raw = data.load()?;
            let map = BinMap::fit(&raw, max_bins)?;
            std::fs::write(&bins, io::bin_map_to_string(&map)?)?;
        }
        Command::Train(a) => run_train(a)?,
        Command::Predict {
            data,
            model,
            proba,
            output,
        } => {
            let model = io::load_model(&model)?;
            let raw = data.load()?;
            let q = quantizer::transform(&raw, &model.bin_map)?;
            let values = if proba {
                model.predict_proba(&q)?
            } else {
                model.predict_margin(&q)?
            };
            let mut out: Box<dyn Write> = match output {
                Some(p) => Box::new(create(&p)?),
                None => Box::new(BufWriter::new(std::io::stdout().lock())),
            };
            for v in values {
                writeln!(out, "{v}")?;
            }
            out.flush()?;
        }
        Command::Eval { data, model } => {
            let model = io::load_model(&model)?;
            let raw = data.load()?;
            let per_tree = evaluate_per_tree(
                &model,
                &quantizer::transform(&raw, &model.bin_map)?,
                raw.labels(),
            )?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "tree_index,auc")?;
            for (t, a) in per_tree.aucs.iter().enumerate() {
                writeln!(out, "{},{a}", t + 1)?;
            }
            writeln!(
                out,
                "max_auc={} best_trees={}",
                per_tree.max, per_tree.best_trees
            )?;
        }
        Command::Cost {
            log,
            engines,
            clock_mhz,
            latency,
            scan_cycles,
            tree_overhead,
            n_valid,
            kv,
        } => {
            let log = io::log_from_str(&std::fs::read_to_string(&log)?)?;
            let params = CostParams {
                clock_hz: clock_mhz * 1e6,
                pipeline_latency_cycles: latency,
                gain_scan_cycles: scan_cycles,
                per_tree_overhead_cycles: tree_overhead,
                n_valid,
            };
            let report = estimate(&log, engines.unwrap_or(log.n_engines), &params)?;
            print!("{}", report.to_text());
            if let Some(p) = kv {
                std::fs::write(p, report.to_key_values())?;
            }
        }
    }
    Ok(())
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: kind=usage msg={}", one_line(&e.to_string()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: kind={} msg={}", e.kind(), one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}
