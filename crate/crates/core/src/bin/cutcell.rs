use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cutcell::run::{run, RunConfig};

/// Run a cut-cell advection convergence study.
#[derive(Parser, Debug)]
#[command(name = "cutcell", version)]
struct Args {
    /// Preset: test1..test4, or test1-onestep..test4-onestep.
    #[arg(long)]
    test: Option<String>,
    /// key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Explicit scheme: muscl, musclmod, mprkc.
    #[arg(long)]
    scheme: Option<String>,
    /// Implicit scheme: trap, ie.
    #[arg(long)]
    implicit: Option<String>,
    /// Coupling: mixed or explicit.
    #[arg(long)]
    coupling: Option<String>,
    /// Slopes: central, forward, ls, analytic.
    #[arg(long)]
    slopes: Option<String>,
    /// Cut-cell volume fraction (1D tests)
    #[arg(long)]
    alpha: Option<f64>,
    /// Ramp angle in degrees.
    #[arg(long)]
    angle: Option<f64>,
    /// Ramp start.
    #[arg(long)]
    x0: Option<f64>,
    /// CFL number.
    #[arg(long)]
    nu: Option<f64>,
    /// Comma-separated cells per unit length, e.g. 160,320,640.
    #[arg(long)]
    levels: Option<String>,
    /// exact or wbar.
    #[arg(long)]
    against: Option<String>,
    /// Output directory for CSV and markdown files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the final computed and reference fields of every level
    #[arg(long)]
    dump_fields: bool,
    /// Write per-cell geometry and roles (2D tests)
    #[arg(long)]
    dump_geometry: bool,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn config(a: &Args) -> cutcell::Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_kv(&std::fs::read_to_string(p)?)?,
        None => RunConfig::preset("test1")?,
    };
    if let Some(t) = &a.test {
        cfg.set("test", t)?;
        // re-apply file entries other than the test name on top of the new preset
        if let Some(p) = &a.config {
            for (k, v) in cutcell::run::parse_kv(&std::fs::read_to_string(p)?)? {
                if k != "test" {
                    cfg.set(&k, &v)?;
                }
            }
        }
    }
    let flags = [
        ("scheme", a.scheme.clone()),
        ("implicit", a.implicit.clone()),
        ("coupling", a.coupling.clone()),
        ("slopes", a.slopes.clone()),
        ("alpha", a.alpha.map(|v| v.to_string())),
        ("angle", a.angle.map(|v| v.to_string())),
        ("x0", a.x0.map(|v| v.to_string())),
        ("nu", a.nu.map(|v| v.to_string())),
        ("levels", a.levels.clone()),
        ("against", a.against.clone()),
        ("out", a.out.as_ref().map(|p| p.display().to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    cfg.dump_fields |= a.dump_fields;
    cfg.dump_geometry |= a.dump_geometry;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if args.print_config {
        print!("{}", cfg.to_kv());
        return ExitCode::SUCCESS;
    }
    match run(&cfg) {
        Ok(out) => {
            let title = format!("{} {}", cfg.test_name(), cfg.label());
            print!("{}", out.table.to_markdown(&title));
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
