//! `twobody`: classification, bifurcation diagrams, contact checks,
//! integration and sampling for the reduced two-body problem on the sphere.
//!
//! Exit codes: 0 ok, 2 usage, 3 degenerate or on the bifurcation locus,
//! 4 empty level set, 5 numerical bracket failure, 6 blowup.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use twobody_core::bifurcation::Family;
use twobody_core::ReducedState;

use commands::{Failure, Output, EXIT_USAGE};
use config::{Format, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "twobody", version, about, allow_negative_numbers = true)]
struct Cli {
    /// Flat key=value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Tolerance override, `NAME=VALUE`; repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[arg(long, global = true)]
    grid_theta: Option<usize>,
    #[arg(long, global = true)]
    grid_phi: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Tan,
    Equator,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Topology of the compactified level set.
    #[command(allow_negative_numbers = true)]
    Classify {
        #[arg(long = "C")]
        c: f64,
        #[arg(long)]
        h: f64,
    },
    /// Main and tangent branches of the bifurcation locus.
    #[command(allow_negative_numbers = true)]
    Bifurcation {
        #[arg(long)]
        c_min: f64,
        #[arg(long)]
        c_max: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
    /// Contact-type certificate on a sample of the level set.
    #[command(allow_negative_numbers = true)]
    ContactCheck {
        #[arg(long = "C")]
        c: f64,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Latitudes in the F(theta) grid.
        #[arg(long)]
        f_grid: Option<usize>,
    },
    /// RK4 trajectory with a drift sidecar.
    #[command(allow_negative_numbers = true)]
    Integrate {
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        m1: f64,
        #[arg(long)]
        m2: f64,
        #[arg(long)]
        m3: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Rescale m onto the initial Casimir sphere after each step.
        #[arg(long)]
        project_casimir: bool,
        /// Drift sidecar path; defaults to `<out>.drift.json`, else stderr.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Random points of the level set.
    #[command(allow_negative_numbers = true)]
    Sample {
        #[arg(long = "C")]
        c: f64,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Relative equilibria along one family.
    #[command(allow_negative_numbers = true)]
    Equilibria {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long, default_value_t = 50)]
        n: usize,
        /// Branch sign of the tan family.
        #[arg(long, default_value_t = 1.0)]
        sign: f64,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path).map_err(Failure::usage)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(f) = cli.format {
        cfg.format = Some(f);
    }
    for (key, v) in [("grid_theta", cli.grid_theta), ("grid_phi", cli.grid_phi)] {
        if let Some(v) = v {
            cfg.set(key, &v.to_string()).map_err(Failure::usage)?;
        }
    }
    if let Command::ContactCheck { f_grid: Some(n), .. } = cli.command {
        cfg.set("f_grid", &n.to_string()).map_err(Failure::usage)?;
    }
    for t in &cli.tol {
        let (k, v) = t.split_once('=').ok_or_else(|| Failure::usage(format!("--tol {t:?}: expected NAME=VALUE")))?;
        cfg.set(k.trim(), v.trim()).map_err(Failure::usage)?;
    }
    Ok(cfg)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("TWOBODY_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("TWOBODY_THREADS = {raw:?} must be a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: 1, message: e.to_string() })?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    configure_threads()?;
    let cfg = build_config(&cli)?;
    let (out, default_format): (Output, Format) = match cli.command {
        Command::Classify { c, h } => (commands::classify(c, h, &cfg)?, Format::Json),
        Command::Bifurcation { c_min, c_max, n } => (commands::bifurcation(c_min, c_max, n)?, Format::Csv),
        Command::ContactCheck { c, h, n, .. } => (commands::contact_check(c, h, n, &cfg)?, Format::Json),
        Command::Integrate { xi, p, m1, m2, m3, t_end, dt, project_casimir, sidecar } => {
            let side = commands::sidecar_path(sidecar.as_deref(), cfg.out.as_deref());
            let s0 = ReducedState::new(xi, p, m1, m2, m3);
            (commands::integrate(s0, t_end, dt, project_casimir, side.as_deref())?, Format::Csv)
        }
        Command::Sample { c, h, n } => (commands::sample(c, h, n, &cfg)?, Format::Csv),
        Command::Equilibria { family, min, max, n, sign } => {
            let family = match family {
                FamilyArg::Tan => Family::Tan,
                FamilyArg::Equator => Family::Equator,
            };
            (commands::equilibria(family, min, max, n, sign)?, Format::Csv)
        }
    };
    output::emit(&out.table, cfg.out.as_deref(), cfg.format.unwrap_or(default_format), out.single)?;
    Ok(out.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
