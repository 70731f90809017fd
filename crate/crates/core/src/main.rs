use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use marginal::catalog::parse_params;
use marginal::constructor::AmbientKind;
use marginal::run::{cmd_catalog_list, cmd_construct, cmd_verify, parse_grid, ExitStatus, RunConfig, RunError, RunOutcome};
use marginal::verifier::Verdict;

/// Construct and verify marginally trapped submanifolds.
#[derive(Parser, Debug)]
#[command(name = "marginal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lift a catalog hypersurface for every root; write meshes and reports.
    Construct(Common),
    /// Verify a catalog lift or a re-ingested mesh.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Mesh written by `construct`.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Verdict the run must reproduce (marginally_trapped, not_marginal, inconclusive).
        #[arg(long)]
        expect: Option<Verdict>,
    },
    /// List catalog entries.
    Catalog {
        /// Only entries whose name contains this text.
        #[arg(long, default_value = "")]
        filter: String,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    entry: Option<String>,
    /// key=val,key=val
    #[arg(long, default_value = "")]
    params: String,
    #[arg(long)]
    ambient: Option<AmbientKind>,
    /// Grid resolution, e.g. 64x64.
    #[arg(long)]
    grid: Option<String>,
    /// Finite-difference step.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    tol_marginal: Option<f64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    root_index: Option<usize>,
}

impl Common {
    fn config(self) -> Result<RunConfig, RunError> {
        Ok(RunConfig {
            entry: self.entry,
            params: parse_params(&self.params)?,
            ambient: self.ambient,
            grid: self.grid.as_deref().map(parse_grid).transpose()?,
            step: self.step,
            tol_marginal: self.tol_marginal,
            out_dir: self.out_dir,
            root_index: self.root_index,
            expect: None,
            mesh: None,
        })
    }
}

fn run(cli: Cli) -> Result<RunOutcome, RunError> {
    match cli.command {
        Command::Construct(common) => {
            let cfg = common.config()?;
            if cfg.entry.is_none() {
                return Err(RunError::Usage("construct needs --entry".into()));
            }
            cmd_construct(&cfg)
        }
        Command::Verify { common, mesh, expect } => {
            let mut cfg = common.config()?;
            cfg.mesh = mesh;
            cfg.expect = expect;
            if cfg.entry.is_none() && cfg.mesh.is_none() {
                return Err(RunError::Usage("verify needs --entry or --mesh".into()));
            }
            cmd_verify(&cfg)
        }
        Command::Catalog { filter } => {
            print!("{}", cmd_catalog_list(&filter));
            Ok(RunOutcome {
                status: ExitStatus::Pass,
                reports: vec![],
                files: vec![],
                messages: vec![],
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ExitStatus::Usage.code() as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            for m in &out.messages {
                println!("{m}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(out.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_status().code() as u8)
        }
    }
}
