use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qmeter::{run, CliError, Command, RunOptions};

#[derive(Parser)]
#[command(name = "qmeter", version, about = "Qubit measurement figures of merit and work bounds")]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = RunOptions {
        command: args.command,
        config: args.config,
        out: args.out,
        svg: args.svg,
        seed: args.seed,
        threads: args.threads,
    };
    match run(&opts) {
        Ok(summary) => {
            for m in &summary.messages {
                println!("{m}");
            }
            println!("wrote {}", summary.csv.display());
            if let Some(svg) = &summary.svg {
                println!("wrote {}", svg.display());
            }
            if summary.not_converged > 0 {
                let e = CliError::NotConverged(format!(
                    "{} cell(s) did not reach the threshold",
                    summary.not_converged
                ));
                eprintln!("qmeter: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qmeter: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
