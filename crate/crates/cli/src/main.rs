//! `seakeep`: batch front-end for the multi-fidelity ship motion pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seakeep_core::config::{Profile, RunConfig};
use seakeep_core::pipeline::Pipeline;
use seakeep_core::{Error, Fidelity, Result};

#[derive(Parser, Debug)]
#[command(name = "seakeep", version, about = "Multi-fidelity ship motion campaigns")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON run configuration; keys not present fall back to the profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scale profile.
    #[arg(long, global = true, value_parser = parse_profile)]
    profile: Option<Profile>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Run directory (defaults to the config's out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the condition x heading manifest from the weather histogram.
    GenConditions {
        /// Weather histogram CSV (synthetic stand-in when omitted).
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Simulate every manifest row; existing valid records are skipped.
    Simulate {
        #[arg(long, value_enum, default_value_t = FidelityArg::Both)]
        fidelity: FidelityArg,
        /// Realizations per row (config value when omitted).
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Train one corrector per heading.
    Train {
        /// Heading to train (repeatable; all configured headings when omitted).
        #[arg(long = "heading")]
        headings: Vec<u32>,
    },
    /// Correct the held-out lofi records with the trained checkpoints.
    Correct {
        #[arg(long = "heading")]
        headings: Vec<u32>,
    },
    /// Evaluate the corrector along the configured great-circle voyage.
    Voyage {
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Held-out error tables, KDE grids and worst-condition snippets.
    Report {
        #[arg(long = "heading")]
        headings: Vec<u32>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FidelityArg {
    Lofi,
    Reference,
    Both,
}

fn parse_profile(s: &str) -> std::result::Result<Profile, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(g: &Global, histogram: Option<&PathBuf>) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path, g.profile)?,
        None => RunConfig::for_profile(g.profile.unwrap_or_default()),
    };
    if let Some(seed) = g.seed {
        cfg.master_seed = seed;
    }
    if let Some(h) = histogram {
        cfg.campaign.histogram = Some(h.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn headings_or_all(p: &Pipeline, given: &[u32]) -> Vec<u32> {
    if given.is_empty() {
        p.cfg.campaign.headings_deg.clone()
    } else {
        given.to_vec()
    }
}

fn run(cli: Cli) -> Result<i32> {
    let histogram = match &cli.command {
        Command::GenConditions { histogram } | Command::Voyage { histogram } => histogram.as_ref(),
        _ => None,
    };
    let cfg = load_config(&cli.global, histogram)?;
    let p = Pipeline::new(cfg, cli.global.out.clone(), cli.global.jobs)?;
    match &cli.command {
        Command::GenConditions { .. } => {
            let m = p.gen_conditions()?;
            println!("{} rows -> {}", m.rows.len(), p.manifest_path().display());
        }
        Command::Simulate {
            fidelity,
            realizations,
        } => {
            let m = p.load_manifest()?;
            let fids = match fidelity {
                FidelityArg::Lofi => vec![Fidelity::Lofi],
                FidelityArg::Reference => vec![Fidelity::Reference],
                FidelityArg::Both => vec![Fidelity::Lofi, Fidelity::Reference],
            };
            let n = realizations.unwrap_or(p.cfg.campaign.realizations);
            let r = p.simulate(&m, &fids, n)?;
            println!(
                "{} runs: {} simulated, {} skipped, {} failed",
                r.total,
                r.simulated,
                r.skipped,
                r.failed.len()
            );
            for f in &r.failed {
                eprintln!("failed: {}: {}", f.path.display(), f.reason);
            }
            if !r.failed.is_empty() {
                return Ok(3);
            }
        }
        Command::Train { headings } => {
            let m = p.load_manifest()?;
            for h in headings_or_all(&p, headings) {
                let out = p.train_heading(&m, h)?;
                println!(
                    "heading {h}: validation {:.4e} -> {:.4e} ({} epochs) -> {}",
                    out.report.initial_validation,
                    out.report.final_validation(),
                    out.report.history.len(),
                    out.checkpoint.display()
                );
            }
        }
        Command::Correct { headings } => {
            for h in headings_or_all(&p, headings) {
                let n = p.correct_heading(h)?;
                println!("heading {h}: {n} records corrected");
            }
        }
        Command::Voyage { .. } => {
            let s = p.voyage()?;
            println!(
                "route {:.1} km, {} cells, {} waypoints evaluated",
                s.route_distance_km,
                s.route_waypoints,
                s.waypoints.len()
            );
            for line in s.worst.iter().flat_map(|w| &w.lines) {
                println!("{line}");
            }
        }
        Command::Report { headings } => {
            let r = p.report(&headings_or_all(&p, headings))?;
            for line in &r.lines {
                println!("{line}");
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
