use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thermovisco::cli::{cmd_converge, cmd_report, cmd_run, cmd_sweep, CommonArgs, ExitStatus};
use thermovisco::par::Exec;

#[derive(Parser)]
#[command(name = "thermovisco", version, about = "1D thermoviscoelastic simulator and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs; 0 uses all cores, 1 is sequential.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Seed for the maximal-regularity trials.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn args(&self) -> CommonArgs {
        CommonArgs {
            out: self.out.clone(),
            seed: self.seed,
            exec: if self.workers == 0 { Exec::Auto } else { Exec::with_workers(self.workers) },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write timeseries.csv, summary.json, final_state.csv.
    Run(Common),
    /// Run a parameter sweep and aggregate sweep.csv.
    Sweep(Common),
    /// Grid-refinement study against an exact solution.
    Converge(Common),
    /// Grid-refinement study restricted to manufactured solutions.
    MmsVerify(Common),
    /// Summarize a run directory as markdown.
    Report {
        /// Run output directory.
        dir: PathBuf,
    },
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn fail(e: thermovisco::Error) -> ExitCode {
    eprintln!("error: {e}");
    exit(ExitStatus::of_error(&e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(c) => match cmd_run(&c.config, &c.args()) {
            Ok(a) => {
                println!("{}: {:?}, artifacts in {}", a.summary.scenario, a.status, a.out_dir.display());
                if let Some(cause) = &a.summary.cause {
                    eprintln!("solver failure: {cause}");
                }
                exit(a.status)
            }
            Err(e) => fail(e),
        },
        Command::Sweep(c) => match cmd_sweep(&c.config, &c.args()) {
            Ok(r) => {
                for row in &r.rows {
                    println!(
                        "{} = {}: {:?}{}",
                        row.axis,
                        row.value,
                        row.status,
                        if row.blowup { " (blow-up)" } else { "" }
                    );
                }
                exit(r.status())
            }
            Err(e) => fail(e),
        },
        Command::Converge(c) => converge(&c, false),
        Command::MmsVerify(c) => converge(&c, true),
        Command::Report { dir } => match cmd_report(&dir) {
            Ok(text) => {
                print!("{text}");
                exit(ExitStatus::Ok)
            }
            Err(e) => fail(e),
        },
    }
}

fn converge(c: &Common, require_mms: bool) -> ExitCode {
    match cmd_converge(&c.config, &c.args(), require_mms) {
        Ok(r) => {
            let show = |o: Option<f64>| o.map_or("degenerate".to_string(), |x| format!("{x:.3}"));
            println!(
                "{}: order u {}, v {}, theta {}",
                r.scenario,
                show(r.order_u),
                show(r.order_v),
                show(r.order_theta)
            );
            if !r.note.is_empty() {
                println!("note: {}", r.note);
            }
            exit(ExitStatus::Ok)
        }
        Err(e) => fail(e),
    }
}
