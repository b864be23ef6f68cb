use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use mixlab_cli::runs::{run_all, run_forms, run_local, run_mix, run_orbit, run_sphere, run_sums};
use mixlab_cli::{ExperimentConfig, Outcome};

#[derive(Parser)]
#[command(name = "mixlab", version, about = "Class group action, mixing and local-factor experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Reduced forms and class groups of -d and -4d
    Forms,
    /// Lattice points on the sphere and their rotation classes
    Sphere,
    /// Labeled packets and action-law checks
    Orbit,
    /// Weyl, twisted and joint-period sums over packets
    Mix,
    /// Ramanujan tau table and sums over binary forms
    Sums,
    /// Exact local identities and archimedean integrals
    Local,
    /// Everything above
    All,
}

/// Each flag overrides the config file and the environment.
#[derive(Args)]
struct Overrides {
    /// key = value file applied before the flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    d_min: Option<String>,
    #[arg(long, global = true)]
    d_max: Option<String>,
    #[arg(long, global = true)]
    squarefree_only: Option<String>,
    #[arg(long, global = true)]
    l_max: Option<String>,
    #[arg(long, global = true)]
    tau_cutoff: Option<String>,
    /// all, min-q, or a comma-separated list of class indices
    #[arg(long, global = true)]
    shift_policy: Option<String>,
    #[arg(long, global = true)]
    prime_cap: Option<String>,
    #[arg(long, global = true)]
    out_dir: Option<String>,
    #[arg(long, global = true)]
    cache_dir: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    local_samples: Option<String>,
    #[arg(long, global = true)]
    threads: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> [(&'static str, &Option<String>); 12] {
        [
            ("d_min", &self.d_min),
            ("d_max", &self.d_max),
            ("squarefree_only", &self.squarefree_only),
            ("l_max", &self.l_max),
            ("tau_cutoff", &self.tau_cutoff),
            ("shift_policy", &self.shift_policy),
            ("prime_cap", &self.prime_cap),
            ("out_dir", &self.out_dir),
            ("cache_dir", &self.cache_dir),
            ("seed", &self.seed),
            ("local_samples", &self.local_samples),
            ("threads", &self.threads),
        ]
    }
}

fn config(o: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(p) = &o.config {
        cfg.apply_file(p)?;
    }
    cfg.apply_env();
    for (k, v) in o.pairs() {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = config(&cli.opts)?;
    match cli.command {
        Command::Forms => run_forms(&cfg),
        Command::Sphere => run_sphere(&cfg),
        Command::Orbit => run_orbit(&cfg),
        Command::Mix => run_mix(&cfg),
        Command::Sums => run_sums(&cfg),
        Command::Local => run_local(&cfg),
        Command::All => run_all(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            if o.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("{} hard invariant(s) failed", o.failures.len());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
