//! `shortcuts`: instance sweeps over the shortcut construction, the CONGEST
//! simulator, the MST application and the walk study.
//!
//! Exit codes: 0 success, 1 some row (or fit) failed, 2 bad configuration.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shortcut_core::experiment::{fit_exponent, parse_quality_csv, run_experiment, ExperimentConfig, Mode};
use shortcut_core::Error;

#[derive(Parser)]
#[command(name = "shortcuts", version, about = "Low-congestion shortcut experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Centralized construction; reports congestion, dilation and quality.
    Build(Sweep),
    /// Distributed construction in the CONGEST simulator.
    Simulate(Sweep),
    /// Borůvka MST over shortcuts, checked against Kruskal.
    Mst(Sweep),
    /// Walk success rates in the sampled shortcut tree.
    WalkStudy(Sweep),
    /// Log-log slope of median quality against n, per D.
    Fit(FitArgs),
}

#[derive(Args)]
struct Sweep {
    /// `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma list of sizes, e.g. `2^12,2^13`.
    #[arg(long)]
    n: Option<String>,
    /// Comma list of diameters.
    #[arg(long)]
    d: Option<String>,
    /// Comma list or range, e.g. `0..20`.
    #[arg(long)]
    seeds: Option<String>,
    /// `layered[:avg_degree]` or `hub[:base_degree]`.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    c_p: Option<String>,
    #[arg(long)]
    c_cong: Option<String>,
    #[arg(long)]
    c_walk: Option<String>,
    #[arg(long)]
    c_phase: Option<String>,
    #[arg(long)]
    round_cap_factor: Option<String>,
    #[arg(long)]
    walk_trials: Option<String>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add wall time per row (makes output non-reproducible).
    #[arg(long)]
    wall_time: bool,
    /// Run cells and nodes on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Report CSV; stdin if absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Restrict to these diameters.
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Rows(String),
    Config(String),
}

fn config_error(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn load_config(mode: Mode, s: &Sweep) -> Result<ExperimentConfig, Failure> {
    let mut c = ExperimentConfig::default();
    if let Some(path) = &s.config {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        c.apply_kv(&text).map_err(config_error)?;
    }
    c.mode = mode;
    let flags = [
        ("n", &s.n),
        ("d", &s.d),
        ("seeds", &s.seeds),
        ("gen", &s.gen),
        ("c_p", &s.c_p),
        ("c_cong", &s.c_cong),
        ("c_walk", &s.c_walk),
        ("c_phase", &s.c_phase),
        ("round_cap_factor", &s.round_cap_factor),
        ("walk_trials", &s.walk_trials),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            c.set(key, v).map_err(config_error)?;
        }
    }
    if let Some(out) = &s.out {
        c.out = Some(out.clone());
    }
    c.wall_time |= s.wall_time;
    if s.sequential {
        c.exec = shortcut_core::par::Execution::Sequential;
    }
    c.validate().map_err(config_error)?;
    Ok(c)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| config_error(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sweep(mode: Mode, s: &Sweep) -> Result<(), Failure> {
    let config = load_config(mode, s)?;
    let report = run_experiment(&config).map_err(|e| match e {
        Error::Config(_) => config_error(e),
        other => Failure::Rows(other.to_string()),
    })?;
    emit(config.out.as_ref(), &report.to_csv())?;
    let failed = report.failed();
    eprintln!("{} rows, {failed} failed", report.rows.len());
    if failed > 0 {
        return Err(Failure::Rows(format!("{failed} rows failed")));
    }
    Ok(())
}

fn fit(args: &FitArgs) -> Result<(), Failure> {
    let text = match &args.input {
        Some(path) => std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(config_error)?;
            s
        }
    };
    let rows = parse_quality_csv(&text).map_err(config_error)?;
    let wanted: Option<Vec<u32>> = match &args.d {
        Some(list) => Some(
            list.split(',')
                .map(|x| x.trim().parse().map_err(|_| config_error(format!("bad diameter {x:?}"))))
                .collect::<Result<_, _>>()?,
        ),
        None => None,
    };
    let mut ds: Vec<u32> = rows.iter().map(|r| r.0).collect();
    ds.sort_unstable();
    ds.dedup();
    if let Some(w) = &wanted {
        ds.retain(|d| w.contains(d));
    }
    if ds.is_empty() {
        return Err(Failure::Rows("no usable rows".into()));
    }
    let mut out = String::from("D,slope,predicted,intercept,max_residual,points\n");
    let mut failed = Vec::new();
    for d in ds {
        let samples: Vec<(usize, f64)> = rows.iter().filter(|r| r.0 == d).map(|r| (r.1, r.2)).collect();
        let predicted = (d as f64 - 2.0) / (2.0 * d as f64 - 2.0);
        match fit_exponent(&samples) {
            Ok(f) => out.push_str(&format!(
                "{d},{:.6},{predicted:.6},{:.6},{:.6},{}\n",
                f.slope, f.intercept, f.max_residual, f.points
            )),
            Err(e) => failed.push(format!("D = {d}: {e}")),
        }
    }
    emit(args.out.as_ref(), &out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Rows(failed.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Build(s) => sweep(Mode::Build, s),
        Command::Simulate(s) => sweep(Mode::Simulate, s),
        Command::Mst(s) => sweep(Mode::Mst, s),
        Command::WalkStudy(s) => sweep(Mode::WalkStudy, s),
        Command::Fit(a) => fit(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rows(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}
