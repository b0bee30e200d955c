use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vodsim_core::{load_config, report, sim, PolicyVariant, Simulation};

#[derive(Parser)]
#[command(name = "vodsim", about = "Wireless video-on-demand network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single simulation and write report CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the policy variant (dpp-macro, dpp-unique, max-sinr).
        #[arg(long)]
        variant: Option<String>,
    },
    /// Re-run the config across a list of V values; writes sweep.csv.
    SweepV {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated V values, e.g. 1e9,1e11,1e13.
        #[arg(long)]
        v: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run several policy variants on the same environment draws.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated variants.
        #[arg(long, default_value = "dpp-macro,dpp-unique,max-sinr")]
        policies: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            variant,
        } => {
            let mut cfg = load_config(&config).map_err(|e| e.to_string())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(v) = &variant {
                cfg.variant = PolicyVariant::parse(v).map_err(|e| e.to_string())?;
            }
            let simulation = Simulation::build(cfg).map_err(|e| e.to_string())?;
            let result = simulation.run().map_err(|e| e.to_string())?;
            report::emit_reports(&result, &out).map_err(|e| e.to_string())?;
            print_summary(&result);
            println!("reports written to {}", out.display());
        }
        Command::SweepV { config, v, out } => {
            let cfg = load_config(&config).map_err(|e| e.to_string())?;
            let v_list: Vec<f64> = v
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad V '{s}': {e}")))
                .collect::<Result<_, _>>()?;
            let rows = sim::sweep_v(&cfg, &v_list).map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
            let mut csv = String::from("v,mean_total_backlog,utility\n");
            for (v, backlog, utility) in &rows {
                println!("V={v:>12.4e}  backlog={backlog:>14.4e}  utility={utility:.6}");
                csv.push_str(&format!("{v},{backlog},{utility}\n"));
            }
            let path = out.join("sweep.csv");
            std::fs::write(&path, csv).map_err(|e| e.to_string())?;
            println!("sweep written to {}", path.display());
        }
        Command::Compare {
            config,
            policies,
            out,
        } => {
            let base = load_config(&config).map_err(|e| e.to_string())?;
            for name in policies.split(',') {
                let name = name.trim();
                let mut cfg = base.clone();
                cfg.variant = PolicyVariant::parse(name).map_err(|e| e.to_string())?;
                let simulation = Simulation::build(cfg).map_err(|e| e.to_string())?;
                let result = simulation.run().map_err(|e| e.to_string())?;
                let dir = out.join(name);
                report::emit_reports(&result, &dir).map_err(|e| e.to_string())?;
                println!("== {name} ==");
                print_summary(&result);
            }
        }
    }
    Ok(())
}

fn print_summary(result: &sim::MetricsReport) {
    let n = result.sessions.len().max(1) as f64;
    let mean = |f: &dyn Fn(&vodsim_core::SessionMetrics) -> f64| -> f64 {
        result.sessions.iter().map(|r| f(&r.metrics)).sum::<f64>() / n
    };
    println!(
        "sessions={}  mean_ssim={:.4}  skipped_pct={:.3}  buffering_frac={:.4}  underrun_rate={:.4}  backlog={:.4e}",
        result.sessions.len(),
        mean(&|m| m.mean_ssim),
        mean(&|m| m.skipped_pct),
        mean(&|m| m.buffering_frac),
        mean(&|m| m.underrun_rate),
        result.mean_total_backlog,
    );
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
