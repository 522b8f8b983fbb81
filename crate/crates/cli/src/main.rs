use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use compred_cli::bundle::{self, export, read_json, read_metrics_csv, write_metrics_csv, write_skips, Format, VERSION};
use compred_cli::config::{parse_horizons, parse_profiles, RunConfig};
use compred_cli::manifest::read_manifest;
use compred_cli::pipeline::{self, compute_metrics, horizon_rows, load_all, usable_trials, Loaded};
use compred_cli::{analysis, report, synth_out, InputError};
use compred_core::synth::{FamilyKind, FamilySpec};

#[derive(Parser)]
#[command(name = "compred", version, about = "Center-of-mass prediction over finite horizons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key = value run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated profiles (zero,const,cubic,oracle)
    #[arg(long)]
    profiles: Option<String>,
    /// Comma-separated horizon lengths in ms
    #[arg(long)]
    horizons: Option<String>,
    #[arg(long)]
    stride: Option<usize>,
    /// Worker threads (defaults to all cores); never changes the results
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Mixed,
    Constant,
    Reversal,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic family as trial files plus a manifest
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "mixed")]
        family: FamilyArg,
        #[arg(long, default_value_t = 10)]
        subjects: usize,
        #[arg(long, default_value_t = 14)]
        activities: usize,
        #[arg(long, default_value_t = 4)]
        static_activities: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Trial length, seconds
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
        /// Half-width of uniform noise on the recorded acceleration, m/s²
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Discrepancy magnitude for the constant family, m/s²
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Relative per-subject spread of the discrepancy
        #[arg(long, default_value_t = 0.02)]
        spread: f64,
    },
    /// Run the force signal chain and write the aligned trials
    Preprocess {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-horizon errors and direction scores
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-subject AE, ME, ADA and MDA
    Metrics {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Statistics from an existing metrics.csv
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Everything from manifest to exported tables
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Plot-ready curves and points from a bundle.json
    Report {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sampling step of the fitted curves, ms
        #[arg(long, default_value_t = 5)]
        step_ms: u32,
    },
}

enum Failure {
    Input(anyhow::Error),
    Pipeline(anyhow::Error),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.into())
    }
}

impl From<pipeline::PipelineError> for Failure {
    fn from(e: pipeline::PipelineError) -> Self {
        Failure::Pipeline(e.into())
    }
}

fn output(e: impl Into<anyhow::Error>, dir: &Path) -> Failure {
    Failure::Input(e.into().context(format!("writing to {}", dir.display())))
}

impl Common {
    fn config(&self) -> Result<RunConfig, InputError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.profiles {
            c.profiles = parse_profiles(p)?;
        }
        if let Some(h) = &self.horizons {
            c.horizons_ms = parse_horizons(h)?;
        }
        if let Some(s) = self.stride {
            c.stride = s;
        }
        c.validate()?;
        Ok(c)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, Failure> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(Failure::Input(anyhow::anyhow!("--threads must be at least 1")));
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Failure::Pipeline(e.into()))
    }
}

fn load(manifest: &Path, config: &RunConfig) -> Result<Loaded, Failure> {
    let entries = read_manifest(manifest)?;
    Ok(load_all(&entries, config)?)
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Synth {
            common,
            out,
            family,
            subjects,
            activities,
            static_activities,
            repeats,
            duration,
            noise,
            seed,
            c,
            spread,
        } => {
            let config = common.config()?;
            let kind = match family {
                FamilyArg::Mixed => FamilyKind::Mixed,
                FamilyArg::Constant => FamilyKind::ConstantDiscrepancy { c, relative_spread: spread },
                FamilyArg::Reversal => FamilyKind::Reversal { accel: (0.8, 1.2), switch_s: (0.7, 0.9) },
            };
            let spec = FamilySpec {
                kind,
                subjects,
                activities,
                static_activities,
                repeats,
                duration_s: duration,
                dt: config.dt,
                noise_amplitude: noise,
                seed,
            };
            let path = synth_out::write_family(&out, &spec, &config).map_err(Failure::Input)?;
            println!("{}", path.display());
        }
        Command::Preprocess { common, manifest, out } => {
            let config = common.config()?;
            let loaded = common.pool()?.install(|| load(&manifest, &config))?;
            let dir = out.join("trials");
            std::fs::create_dir_all(&dir).map_err(|e| output(e, &out))?;
            for t in &loaded.trials {
                let path = dir.join(format!("{}_{}_r{}.csv", t.subject_id, t.activity_id, t.repeat_index));
                write_processed(&path, t).map_err(|e| output(e, &out))?;
            }
            write_skips(&out.join("skips.csv"), &loaded.skips).map_err(|e| output(e, &out))?;
        }
        Command::Predict { common, manifest, out } => {
            let config = common.config()?;
            let (rows, skips) = common.pool()?.install(|| -> Result<_, Failure> {
                let mut loaded = load(&manifest, &config)?;
                let trials = usable_trials(loaded.trials, &config, &mut loaded.skips)?;
                Ok((horizon_rows(&trials, &config)?, loaded.skips))
            })?;
            std::fs::create_dir_all(&out).map_err(|e| output(e, &out))?;
            let mut w = csv::Writer::from_path(out.join("horizons.csv")).map_err(|e| output(e, &out))?;
            for r in &rows {
                w.serialize(r).map_err(|e| output(e, &out))?;
            }
            w.flush().map_err(|e| output(e, &out))?;
            write_skips(&out.join("skips.csv"), &skips).map_err(|e| output(e, &out))?;
        }
        Command::Metrics { common, manifest, out } => {
            let config = common.config()?;
            let (rows, skips) = common.pool()?.install(|| -> Result<_, Failure> {
                let mut loaded = load(&manifest, &config)?;
                let trials = usable_trials(loaded.trials, &config, &mut loaded.skips)?;
                let rows = compute_metrics(&trials, &config, &mut loaded.skips)?;
                Ok((rows, loaded.skips))
            })?;
            std::fs::create_dir_all(&out).map_err(|e| output(e, &out))?;
            write_metrics_csv(&out.join("metrics.csv"), &rows).map_err(|e| output(e, &out))?;
            write_skips(&out.join("skips.csv"), &skips).map_err(|e| output(e, &out))?;
        }
        Command::Analyze { common, metrics, out, format } => {
            let config = common.config()?;
            let rows = read_metrics_csv(&metrics)?;
            let analysis = analysis::analyze(&rows, &config);
            let bundle = bundle::Bundle {
                version: VERSION.into(),
                config,
                metrics: rows,
                stats: analysis.stats,
                fits: analysis.fits,
                levels: analysis.levels,
                trend_tests: analysis.trend_tests,
                skips: analysis.skips,
            };
            export(&bundle, &out, format).map_err(|e| output(e, &out))?;
        }
        Command::Run { common, manifest, out, format } => {
            let config = common.config()?;
            let bundle = common.pool()?.install(|| -> Result<_, Failure> {
                let loaded = load(&manifest, &config)?;
                Ok(pipeline::run_pipeline(&config, loaded.trials, loaded.skips)?)
            })?;
            export(&bundle, &out, format).map_err(|e| output(e, &out))?;
        }
        Command::Report { bundle, out, step_ms } => {
            let b = read_json(&bundle)?;
            report::write_report(&b, &out, step_ms).map_err(|e| output(e, &out))?;
        }
    }
    Ok(())
}

fn write_processed(path: &Path, t: &compred_core::Trial) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| path.display().to_string())?;
    w.write_record(["time_s", "px", "py", "pz", "vx", "vy", "vz", "ax", "ay", "az"])?;
    for (k, (s, u)) in t.com_states.iter().zip(&t.accel_inputs).enumerate() {
        let mut row = vec![bundle::num(k as f64 * t.dt)];
        row.extend(s.position.iter().chain(s.velocity.iter()).chain(u.0.iter()).map(|v| bundle::num(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Pipeline(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
