use clap::{Parser, Subcommand};
use heatlab::config::{load, Task, TaskConfig, DEFAULT_OUTPUT_DIR};
use heatlab::execute;
use heatlab::output::resolve_out_dir;
use heatlab::profile::ProfileSpec;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Heat kernel bounds on weighted model manifolds.
#[derive(Parser)]
#[command(name = "heatlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a configuration file.
    Run { config: PathBuf },
    /// Run every *.cfg file in a directory and merge the reports into sweep.json.
    Sweep { dir: PathBuf },
    /// Run the invariant suites and print a PASS/FAIL table.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c.clamp(0, 255) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return code(1);
                }
            };
            let base = config.parent().unwrap_or(Path::new("."));
            let out = resolve_out_dir(&cfg.output_dir);
            let (c, report) = execute(&cfg, base, &out);
            if let Some(err) = report["error"].as_str() {
                eprintln!("{err}");
            } else {
                println!("wrote {}", out.display());
            }
            code(c)
        }
        Command::Sweep { dir } => {
            let out = match std::env::var_os("HEATLAB_OUT") {
                Some(v) if !v.is_empty() => PathBuf::from(v),
                _ => dir.clone(),
            };
            match heatlab::sweep::sweep(&dir, &out) {
                Ok((c, merged)) => {
                    for entry in merged.as_object().into_iter().flat_map(|m| m.values()) {
                        println!("{}  exit {}", entry["file"].as_str().unwrap_or("?"), entry["exit_code"]);
                    }
                    code(c)
                }
                Err(e) => {
                    eprintln!("{}: {e}", dir.display());
                    code(1)
                }
            }
        }
        Command::Verify { seed } => {
            let mut cfg = TaskConfig::new(ProfileSpec::new(""), Task::Verify);
            cfg.seed = seed;
            let (c, _) = execute(&cfg, Path::new("."), &resolve_out_dir(DEFAULT_OUTPUT_DIR));
            code(c)
        }
    }
}
