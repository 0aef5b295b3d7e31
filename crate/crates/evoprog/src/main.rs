use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use evoprog::config::{Algorithm, ExperimentConfig};
use evoprog::{dataio, pipeline, synth};

/// Capacity-fade prognostics with evolving fuzzy models.
#[derive(Debug, Parser)]
#[command(name = "evoprog", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tune lags, run the α–λ sweeps and write the result tree.
    Run(RunArgs),
    /// Write the seeded synthetic batteries as capacity CSV files.
    Synth {
        #[arg(long, default_value = "data")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        rated_ah: f64,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment configuration JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training battery id.
    #[arg(long)]
    train: Option<String>,
    /// Test battery ids.
    #[arg(long, value_delimiter = ',')]
    test: Option<Vec<String>>,
    /// Algorithms: ebets, exts, emg, arma.
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<String>>,
    /// Prognosis start cycles.
    #[arg(long, value_delimiter = ',')]
    tp: Option<Vec<u32>>,
    /// Confidence level of the RUL bounds.
    #[arg(long)]
    confidence: Option<f64>,
    /// Directory with <battery>.csv files.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Use seeded synthetic batteries instead of CSV files.
    #[arg(long)]
    synthetic: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for (battery, algorithm) pairs.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn resolve(self) -> anyhow::Result<(ExperimentConfig, PathBuf)> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.train {
            config.train_battery = v;
        }
        if let Some(v) = self.test {
            config.test_batteries = v;
        }
        if let Some(v) = self.algo {
            config.algorithms = v
                .iter()
                .map(|name| Algorithm::parse(name).ok_or_else(|| anyhow!("unknown algorithm `{name}`")))
                .collect::<anyhow::Result<_>>()?;
        }
        if let Some(v) = self.tp {
            config.t_p = v;
        }
        if let Some(v) = self.confidence {
            config.confidence = v;
        }
        if let Some(v) = self.data {
            config.data_dir = v;
        }
        if self.synthetic {
            config.synthetic = true;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.jobs {
            config.jobs = v;
        }
        config.validate()?;
        Ok((config, self.out))
    }
}

fn main() -> ExitCode {
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn try_main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let (config, out) = args.resolve()?;
            let report = pipeline::run(&config)?;
            report.write_to(&out)?;
            print!("{}", String::from_utf8_lossy(&report.files[&PathBuf::from("summary.txt")]));
            eprintln!("wrote {} files to {}", report.files.len(), out.display());
        }
        Command::Synth { out, seed, rated_ah } => {
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for profile in &synth::PROFILES {
                let battery = profile.battery(seed, rated_ah, 70.0);
                let path = out.join(format!("{}.csv", profile.id));
                let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                dataio::write_capacity(file, &battery)?;
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}
