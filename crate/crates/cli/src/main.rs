use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use egorank::commands::{cmd_ingest, cmd_rank, cmd_run, cmd_synth, cmd_targets, resolve_config, SynthArgs};
use egorank::{CliError, ConfigOverrides};

#[derive(Parser)]
#[command(name = "egorank", version, about = "Rank influenceable targets in an egocentric network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Subcommand)]
enum Command {
    /// Load and clean the nine datasets into a bundle
    Ingest(Common),
    /// Rank members per bucket from an ingested bundle
    Rank(Common),
    /// Select top influenceable targets from the rankings
    Targets(Common),
    /// Ingest, rank and select in one go
    Run(Common),
    /// Write a seeded synthetic corpus with embeddings and a config
    Synth(SynthArgs),
}

fn execute(command: Command) -> Result<(), CliError> {
    if let Command::Synth(args) = &command {
        let truth = cmd_synth(args)?;
        println!("planted members: {}", truth.planted_members.join(" "));
        return Ok(());
    }
    let (Command::Ingest(c) | Command::Rank(c) | Command::Targets(c) | Command::Run(c)) = &command else {
        unreachable!("synth handled above");
    };
    let cfg = resolve_config(c.config.as_deref(), &c.overrides)?;
    match command {
        Command::Ingest(_) => {
            let (_, report) = cmd_ingest(&cfg)?;
            println!("{} documents, {} members", report.documents, report.members);
        }
        Command::Rank(_) => {
            for r in cmd_rank(&cfg)? {
                println!("{}: {} members ranked", r.ranking.bucket, r.ranking.len());
            }
        }
        Command::Targets(_) | Command::Run(_) => {
            let reports = if matches!(command, Command::Run(_)) { cmd_run(&cfg)? } else { cmd_targets(&cfg)? };
            for r in reports {
                match &r.error {
                    Some(e) => println!("{}: no selection ({e})", r.bucket),
                    None => println!(
                        "{}: n_it={} d_it={} effective={}",
                        r.bucket, r.n_it, r.d_it, r.effective_count
                    ),
                }
            }
        }
        Command::Synth(_) => unreachable!(),
    }
    Ok(())
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
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("egorank: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
