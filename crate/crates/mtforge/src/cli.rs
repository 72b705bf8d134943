//! Argument parsing and dispatch. Exit status: 0 on success, 1 on data
//! errors (with one JSON error line on stderr), 2 on usage errors.

use std::ffi::OsString;
use std::io::Write;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mtforge_core::eval::{CenterPairPolicy, Metric, TableFormat};
use mtforge_core::filter::{FilterRule, DEFAULT_TAU, DEFAULT_THRESHOLDS};
use mtforge_core::mixture::MixtureSpec;
use mtforge_core::synth::{InferenceStrategy, TranslationBackend};
use mtforge_core::{enumerate_directions, Direction, Registry, RetentionPolicy};
use serde_json::json;

use crate::config::{read_json, PipelineConfig};
use crate::io::{create_output, load_registry, read_multiway_file};
use crate::pipeline::{self, EvalSettings, FilterSettings, SynthMode, Workers};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_P: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "mtforge", version, about = "Multilingual MT corpus toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON config supplying defaults for any flag
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// `builtin` or a languages .jsonl file
    #[arg(long, global = true)]
    pub registry: Option<String>,
    /// Auxiliary-language rows ({"lang","aux"} per line)
    #[arg(long, global = true)]
    pub aux: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// More log output (repeatable); RUST_LOG also works
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand multi-way records into directional pairs
    Expand {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
    },
    /// Keep reverse-direction pairs with probability p
    Downsample {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
    },
    /// Build the STP/PMP fine-tuning mixture
    Mix {
        #[arg(long)]
        spec: Option<String>,
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        scores: Option<String>,
        #[arg(long)]
        out: String,
        /// Per-direction tallies and warnings as JSON
        #[arg(long)]
        report: Option<String>,
    },
    /// Heuristic cleaning and QE thresholding
    Filter {
        #[arg(long)]
        rules: Option<String>,
        #[arg(long)]
        scores: Option<String>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
        #[arg(long)]
        report: Option<String>,
    },
    /// Score pairs with an external scorer process
    Score {
        #[arg(long = "scorer-cmd")]
        scorer_cmd: String,
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
    },
    /// Synthesize pairs through a translation backend
    Synth {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long = "backend-cmd")]
        backend_cmd: String,
        /// Source language for direct mode
        #[arg(long)]
        src: Option<String>,
        /// Target language for direct mode
        #[arg(long)]
        tgt: Option<String>,
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
    },
    /// Build inference prompts
    InferPrompt {
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long = "backend-cmd")]
        backend_cmd: Option<String>,
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
    },
    /// Aggregate per-direction scores into a tier table
    Eval {
        #[arg(long)]
        records: String,
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        /// Languages of the first system (default: the whole registry)
        #[arg(long, value_delimiter = ',')]
        langs: Option<Vec<String>>,
        /// Languages of a second system to intersect with
        #[arg(long, value_delimiter = ',')]
        intersect: Option<Vec<String>>,
        #[arg(long, value_enum, default_value = "comet22")]
        metric: MetricArg,
        #[arg(long = "center-pairs", value_enum, default_value = "as-x")]
        center_pairs: CenterArg,
        /// Defaults to csv for a .csv output, markdown otherwise
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Target-repetition statistics, optionally after downsampling
    Diagnose {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        out: String,
    },
    /// Check the registry (and optionally a multi-way corpus)
    Validate {
        #[arg(long = "in")]
        input: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Direct,
    Pivot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Dt,
    Pt,
    PmpO,
    PmpS,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Comet22,
    Sacrebleu,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CenterArg {
    AsX,
    Exclude,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Markdown,
    Csv,
}

/// Flags merged with the config file.
struct Settings {
    config: PipelineConfig,
    registry_src: String,
    aux: Option<String>,
    seed: Option<u64>,
    workers: usize,
}

impl Settings {
    fn new(global: &GlobalArgs) -> Result<Self> {
        let config = match &global.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        Ok(Settings {
            registry_src: global
                .registry
                .clone()
                .or_else(|| config.registry.clone())
                .unwrap_or_else(|| "builtin".into()),
            aux: global.aux.clone().or_else(|| config.aux.clone()),
            seed: global.seed.or(config.seed),
            workers: global.workers.or(config.workers).unwrap_or(1),
            config,
        })
    }

    fn registry(&self) -> Result<Registry> {
        Ok(load_registry(&self.registry_src, self.aux.as_deref())?)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn workers(&self) -> Result<Workers> {
        Workers::new(self.workers)
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer(&mut stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

fn write_file(path: &str, text: &str) -> Result<()> {
    let mut out = create_output(path)?;
    out.write_all(text.as_bytes()).with_context(|| format!("writing {path}"))?;
    out.flush()?;
    Ok(())
}

fn policy(p: f64, seed: u64) -> Result<RetentionPolicy> {
    Ok(RetentionPolicy::new(p, seed)?)
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = Settings::new(&cli.global)?;
    match cli.command {
        Command::Validate { input } => {
            if cli.global.config.is_some() {
                ctx.config.check_paths()?;
            }
            let registry = ctx.registry()?;
            let dirset = enumerate_directions(&registry)?;
            println!("{} languages, {} directions", registry.len(), dirset.direction_count());
            if let Some(input) = input {
                let records = read_multiway_file(&input, &registry)?;
                println!("{} records", records.len());
            }
        }
        Command::Expand { input, out } => {
            let summary = pipeline::expand(&ctx.registry()?, &input, &out, &ctx.workers()?)?;
            print_json(&summary)?;
        }
        Command::Downsample { p, input, out } => {
            let p = p.or(ctx.config.downsample.p).unwrap_or(DEFAULT_P);
            let counts = pipeline::downsample(&input, &out, policy(p, ctx.seed())?, &ctx.workers()?)?;
            print_json(&counts)?;
        }
        Command::Mix {
            spec,
            input,
            scores,
            out,
            report,
        } => {
            let mut mix_spec = match &spec {
                Some(path) => read_json::<MixtureSpec>(path)?,
                None => ctx.config.mixture.unwrap_or_default(),
            };
            // an explicit --seed beats the spec file; a config seed only fills in
            if let Some(seed) = cli.global.seed {
                mix_spec.seed = seed;
            } else if spec.is_none() && ctx.config.mixture.is_none() {
                mix_spec.seed = ctx.seed();
            }
            let summary = pipeline::mix(
                &ctx.registry()?,
                &input,
                scores.as_deref(),
                &mix_spec,
                &out,
                &ctx.workers()?,
            )?;
            if let Some(path) = report {
                write_file(&path, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
            }
            print_json(&json!({
                "directions": summary.directions,
                "emitted": summary.emitted,
                "stp": summary.stp,
                "pmp": summary.pmp,
                "warnings": summary.warnings.len(),
            }))?;
        }
        Command::Filter {
            rules,
            scores,
            tau,
            thresholds,
            input,
            out,
            report,
        } => {
            let rules = match rules {
                Some(path) => read_json::<Vec<FilterRule>>(&path)?,
                None => ctx.config.filter.rules.clone().unwrap_or_else(FilterRule::defaults),
            };
            let settings = FilterSettings {
                rules,
                scores,
                tau: tau.or(ctx.config.filter.tau).unwrap_or(DEFAULT_TAU),
                thresholds: thresholds
                    .or_else(|| ctx.config.filter.thresholds.clone())
                    .unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec()),
            };
            let result = pipeline::filter(&input, &out, &settings)?;
            if let Some(path) = report {
                write_file(&path, &(serde_json::to_string_pretty(&result)? + "\n"))?;
            }
            print_json(&result)?;
        }
        Command::Score { scorer_cmd, input, out } => {
            let n = pipeline::score(&input, &out, &scorer_cmd, &ctx.workers()?)?;
            print_json(&json!({ "scored": n }))?;
        }
        Command::Synth {
            mode,
            backend_cmd,
            src,
            tgt,
            input,
            out,
        } => {
            let direction = match (&src, &tgt) {
                (Some(s), Some(t)) => Some(Direction::new(s, t)?),
                _ => None,
            };
            let mode = match mode {
                ModeArg::Direct => SynthMode::Direct,
                ModeArg::Pivot => SynthMode::Pivot,
            };
            let mut backend = pipeline::spawn_backend(&backend_cmd)?;
            let summary = pipeline::synth(mode, &input, &out, &mut backend, direction.as_ref())?;
            print_json(&json!({
                "attempted": summary.attempted,
                "emitted": summary.emitted,
                "failed": summary.failures.len(),
            }))?;
        }
        Command::InferPrompt {
            strategy,
            backend_cmd,
            input,
            out,
        } => {
            let strategy = match strategy {
                StrategyArg::Dt => InferenceStrategy::Dt,
                StrategyArg::Pt => InferenceStrategy::Pt,
                StrategyArg::PmpO => InferenceStrategy::PmpO,
                StrategyArg::PmpS => InferenceStrategy::PmpS,
            };
            let mut backend = backend_cmd.as_deref().map(pipeline::spawn_backend).transpose()?;
            let n = pipeline::infer_prompt(
                &ctx.registry()?,
                strategy,
                &input,
                &out,
                backend.as_mut().map(|b| b as &mut dyn TranslationBackend),
            )?;
            print_json(&json!({ "prompts": n }))?;
        }
        Command::Eval {
            records,
            models,
            langs,
            intersect,
            metric,
            center_pairs,
            format,
            out,
        } => {
            let format = match format {
                Some(FormatArg::Csv) => TableFormat::Csv,
                Some(FormatArg::Markdown) => TableFormat::Markdown,
                None if out.as_deref().is_some_and(|o| o.ends_with(".csv")) => TableFormat::Csv,
                None => TableFormat::Markdown,
            };
            let settings = EvalSettings {
                models,
                langs,
                intersect,
                metric: match metric {
                    MetricArg::Comet22 => Metric::Comet22,
                    MetricArg::Sacrebleu => Metric::SacreBleu,
                },
                center_pairs: match center_pairs {
                    CenterArg::AsX => CenterPairPolicy::AsX,
                    CenterArg::Exclude => CenterPairPolicy::Exclude,
                },
                format,
            };
            let table = pipeline::eval(&ctx.registry()?, &records, &settings)?;
            write_file(out.as_deref().unwrap_or("-"), &table)?;
        }
        Command::Diagnose { input, p, out } => {
            let p = p.or(ctx.config.downsample.p);
            let policy = p.map(|p| policy(p, ctx.seed())).transpose()?;
            let report = pipeline::diagnose(&input, policy, &ctx.workers()?)?;
            write_file(&out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            print!("{}", report.stats.ascii_histogram(40));
            print_json(&json!({
                "distinct_targets": report.stats.distinct_targets(),
                "max_repetition": report.stats.max_repetition,
            }))?;
        }
    }
    Ok(())
}

/// Parses `args`, runs, and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging(cli.global.verbose);
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let line = json!({ "error": format!("{e:#}") });
            eprintln!("{line}");
            1
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();
}
