mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use scvs_core::mpe::MoleculeFormat;
use scvs_core::nn::Activation;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "scvs", version, about = "Stochastic-computing virtual screening pipeline")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand. Precedence: flags, then the
/// `SCVS_*` path variables, then the config file, then built-in defaults.
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Target manifest (JSON array of target entries).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[arg(long, global = true)]
    models_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    reports_dir: Option<PathBuf>,
    /// Feature scaler JSON; defaults to scaler.json in the models directory.
    #[arg(long, global = true)]
    scaler: Option<PathBuf>,
    /// Sets the split, training and initialization seeds at once.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Coulomb constant of the pairing energy.
    #[arg(long, global = true)]
    k: Option<f64>,
    /// Worker threads (0: one per core). Never changes any output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Args, Debug, Default)]
struct TrainArgs {
    /// Model family by first hidden layer: 12, 24, 48, 64 or 256.
    #[arg(long)]
    arch: Option<usize>,
    #[arg(long, value_parser = parse_activation)]
    activation: Option<Activation>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    validation_fraction: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct ScArgs {
    /// Word width in bits (4 to 16).
    #[arg(long)]
    width: Option<u32>,
    /// Bits per stream; defaults to one LFSR period.
    #[arg(long)]
    stream_len: Option<usize>,
    /// Per-layer weight-magnitude quantile mapped to full scale.
    #[arg(long)]
    clip_quantile: Option<f64>,
    /// Drop biases from the hardware model.
    #[arg(long)]
    no_bias: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scope {
    /// Held-out side of the configured split.
    Test,
    /// Every active and decoy of each target.
    Library,
}

fn parse_activation(s: &str) -> Result<Activation, String> {
    s.parse().map_err(|e: scvs_core::nn::NnError| e.to_string())
}

fn parse_format(s: &str) -> Result<MoleculeFormat, String> {
    s.parse()
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute pairing-energy descriptors into a cache CSV.
    Descriptors {
        /// mol2-subset or csv-atoms files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Input format; inferred from the extension when omitted.
        #[arg(long, value_parser = parse_format)]
        format: Option<MoleculeFormat>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the most-positive/most-negative scatter CSV.
        #[arg(long)]
        scatter: Option<PathBuf>,
    },
    /// Train a floating-point model on the training side of the split.
    Train {
        #[command(flatten)]
        train: TrainArgs,
        /// Model output; defaults to model.json in the models directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantize a trained ReLU model into a stochastic network.
    Quantize {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        sc: ScArgs,
        /// Defaults to `<model stem>.sc.json` next to the model.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score targets with a float or stochastic model and report metrics.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Scope::Test)]
        scope: Scope,
        /// Defaults to report.json in the reports directory.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Flat per-target CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Attach the published comparison tables.
        #[arg(long)]
        literature: bool,
        /// Row label used in the comparison tables.
        #[arg(long)]
        label: Option<String>,
        /// Inferences per second go here (JSON) instead of the report.
        #[arg(long)]
        throughput: Option<PathBuf>,
    },
    /// Software vs hardware per-target AUC, sorted by software AUC.
    Compare {
        #[arg(long)]
        software: PathBuf,
        #[arg(long)]
        hardware: PathBuf,
        #[arg(long, value_enum, default_value_t = Scope::Test)]
        scope: Scope,
        /// Defaults to compare.json in the reports directory.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Gate outputs measured against the correlation closed forms.
    ScBench {
        #[command(flatten)]
        sc: ScArgs,
        /// Grid spacing of x and y.
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// CSV output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One model per target on a stratified 80/20 split.
    PerTarget {
        #[command(flatten)]
        train: TrainArgs,
        /// Defaults to per_target.json in the reports directory.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        literature: bool,
    },
    /// Write the seeded synthetic benchmark and its manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        targets: usize,
        #[arg(long, default_value_t = 40)]
        actives: usize,
        #[arg(long, default_value_t = 400)]
        decoys: usize,
        #[arg(long, default_value_t = 0.2)]
        spread: f64,
        #[arg(long = "synth-seed", default_value_t = 2024)]
        synth_seed: u64,
    },
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_toml_file(p)?,
            None => RunConfig::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok());
        if let Some(p) = &self.manifest {
            cfg.paths.manifest = Some(p.clone());
        }
        if let Some(p) = &self.models_dir {
            cfg.paths.models = p.clone();
        }
        if let Some(p) = &self.reports_dir {
            cfg.paths.reports = p.clone();
        }
        if let Some(p) = &self.scaler {
            cfg.paths.scaler = Some(p.clone());
        }
        if let Some(s) = self.seed {
            cfg.split.seed = s;
            cfg.train.seed = s;
            cfg.model.init_seed = s;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        Ok(cfg)
    }
}

impl TrainArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(a) = self.arch {
            cfg.model.arch = a;
        }
        if let Some(a) = self.activation {
            cfg.model.activation = a;
        }
        let t = &mut cfg.train;
        if let Some(v) = self.epochs {
            t.epochs = v;
        }
        if let Some(v) = self.batch_size {
            t.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            t.learning_rate = v;
        }
        if let Some(v) = self.validation_fraction {
            t.validation_fraction = v;
        }
        if let Some(v) = self.patience {
            t.patience = v;
        }
    }
}

impl ScArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(w) = self.width {
            cfg.sc.width = w;
            // Registers configured for another width cannot be reused.
            if cfg.sc.lfsr1.is_some() || cfg.sc.lfsr2.is_some() {
                log::warn!("--width overrides sc.width; configured LFSR taps are dropped");
                cfg.sc.lfsr1 = None;
                cfg.sc.lfsr2 = None;
            }
        }
        if let Some(n) = self.stream_len {
            cfg.sc.stream_len = Some(n);
        }
        if let Some(q) = self.clip_quantile {
            cfg.sc.clip_quantile = q;
        }
        if self.no_bias {
            cfg.sc.bias = false;
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = cli.common.resolve()?;
    match &cli.command {
        Command::Train { train, .. } | Command::PerTarget { train, .. } => train.apply(&mut cfg),
        Command::Quantize { sc, .. } | Command::ScBench { sc, .. } => sc.apply(&mut cfg),
        _ => {}
    }
    cfg.validate()?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global()?;
    }
    match cli.command {
        Command::Descriptors { inputs, format, out, scatter } => {
            commands::descriptors(&cfg, &inputs, format, &out, scatter.as_deref())
        }
        Command::Train { out, .. } => commands::train(&cfg, out),
        Command::Quantize { model, out, .. } => commands::quantize(&cfg, &model, out),
        Command::Evaluate { model, scope, report, csv, literature, label, throughput } => commands::evaluate(
            &cfg,
            &commands::EvaluateArgs { model, scope, report, csv, literature, label, throughput },
        ),
        Command::Compare { software, hardware, scope, report, csv } => {
            commands::compare(&cfg, &software, &hardware, scope, report, csv.as_deref())
        }
        Command::ScBench { step, out, .. } => commands::sc_bench(&cfg, step, out.as_deref()),
        Command::PerTarget { report, csv, literature, .. } => commands::per_target(&cfg, report, csv.as_deref(), literature),
        Command::Synth { out, targets, actives, decoys, spread, synth_seed } => {
            let synth = scvs_core::synth::SynthConfig {
                targets,
                actives_per_target: actives,
                decoys_per_target: decoys,
                spread,
                seed: synth_seed,
            };
            commands::synth(&synth, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::VALIDATION } else { exit::OK });
        }
    };
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code(&e))
        }
    }
}
