use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use contact_core::analysis::ctmc_oracle;
use contact_core::harris::Configuration;
use contact_core::{BoundaryPolicy, Exact, GraphTopology};
use contact_lab::config::parse_topology;
use contact_lab::output::write_atomic;
use contact_lab::{execute, export_timeline, output_dir, preset, ExperimentConfig, LabError};

#[derive(Parser)]
#[command(name = "contact-lab", version, about = "Contact-process Monte Carlo laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[command(flatten)]
        overrides: Overrides,
        /// Print the preset config instead of running it.
        #[arg(long)]
        print: bool,
    },
    /// Write the edge list, event log and flip log of one replica.
    ExportTimeline {
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        replica: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact law at time t from all ones, e.g. `oracle path:3 1.5 1`.
    Oracle { topology: String, lambda: f64, t: f64 },
}

#[derive(clap::Args)]
struct Overrides {
    /// Run directory; defaults to `$CONTACT_LAB_OUT/<name>` or `out/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<u64>,
}

impl Overrides {
    fn apply(self, cfg: &mut ExperimentConfig) {
        if let Some(out) = self.out {
            cfg.out = Some(out);
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(r) = self.replicas {
            cfg.replicas = r;
        }
    }
}

fn read_config(path: &PathBuf) -> Result<ExperimentConfig, LabError> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_toml(&text)
}

fn run(mut cfg: ExperimentConfig, overrides: Overrides) -> Result<i32, LabError> {
    overrides.apply(&mut cfg);
    cfg.validate()?;
    let dir = output_dir(&cfg);
    let (output, _) = execute(&cfg, &dir)?;
    let report = &output.report;
    for c in &report.checks {
        println!("{:<8} {:<28} {}", format!("{:?}", c.status).to_uppercase(), c.name, c.detail);
    }
    println!("verdict {:?}; outputs in {}", report.verdict, dir.display());
    Ok(report.exit_code())
}

fn dispatch(cli: Cli) -> Result<i32, LabError> {
    match cli.command {
        Command::Run { config, overrides } => run(read_config(&config)?, overrides),
        Command::Preset { name, overrides, print } => {
            let cfg = preset(&name)?;
            if print {
                print!("{}", cfg.to_toml());
                return Ok(0);
            }
            run(cfg, overrides)
        }
        Command::ExportTimeline { config, replica, out } => {
            let cfg = read_config(&config)?;
            let dir = out.unwrap_or_else(|| output_dir(&cfg).join(format!("timeline-{replica}")));
            std::fs::create_dir_all(&dir)?;
            for (name, body) in export_timeline(&cfg, replica)? {
                write_atomic(&dir.join(name), body.as_bytes())?;
            }
            println!("timeline of replica {replica} in {}", dir.display());
            Ok(0)
        }
        Command::Oracle { topology, lambda, t } => {
            let kind = parse_topology(&topology)?;
            let g = GraphTopology::build(&kind, &BoundaryPolicy::Free)?;
            let law: Exact = ctmc_oracle(&g, lambda, &Configuration::ones(&g), t)?;
            println!("mask,configuration,probability");
            for (mask, p) in law.probs.iter().enumerate() {
                let bits: String = (0..g.len()).map(|v| if mask >> v & 1 == 1 { '1' } else { '0' }).collect();
                println!("{mask},{bits},{p}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_starvation() { 3 } else { 1 })
        }
    }
}
