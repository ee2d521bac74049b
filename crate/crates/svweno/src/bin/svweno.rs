//! Command-line front end: run a benchmark problem, produce a convergence
//! table, or list the presets.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use svweno::harness::{self, output, ProblemConfig, RunOutput};
use svweno::limiter::LimiterMode;
use svweno::solver::LfMode;
use svweno::SvError;

#[derive(Parser)]
#[command(
    name = "svweno",
    about = "High-order (2nd-5th) spectral volume solver for 1D/2D conservation laws \
             with a CV-wise simplified WENO limiter",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark problem and write its data files
    Run(RunArgs),
    /// Error and convergence-rate table over a resolution sequence
    Convergence(ConvergenceArgs),
    /// List the available problem presets
    Presets,
}

#[derive(Clone, Copy, ValueEnum)]
enum LimiterArg {
    Cvmsweno,
    Full,
    Off,
}

impl From<LimiterArg> for LimiterMode {
    fn from(v: LimiterArg) -> Self {
        match v {
            LimiterArg::Cvmsweno => LimiterMode::CvSweno,
            LimiterArg::Full => LimiterMode::Full,
            LimiterArg::Off => LimiterMode::Off,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum LfArg {
    Local,
    Global,
}

#[derive(Args)]
struct CommonArgs {
    /// Problem preset (see `svweno presets`)
    #[arg(long)]
    problem: String,
    /// Scheme order k in 2..=5
    #[arg(long)]
    order: Option<usize>,
    /// TVB constant M
    #[arg(long = "tvb-m")]
    tvb_m: Option<f64>,
    /// Weight regularizer epsilon
    #[arg(long)]
    epsilon: Option<f64>,
    /// CFL number
    #[arg(long)]
    cfl: Option<f64>,
    /// Final time override
    #[arg(long)]
    tfinal: Option<f64>,
    /// Limiter mode
    #[arg(long, value_enum)]
    limiter: Option<LimiterArg>,
    /// Characteristic-variable limiting
    #[arg(long = "char", value_enum)]
    characteristic: Option<OnOff>,
    /// Lax-Friedrichs dissipation variant
    #[arg(long, value_enum)]
    lf: Option<LfArg>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Spectral volume count (x direction)
    #[arg(long)]
    nsv: Option<usize>,
    /// Spectral volume count in y (defaults to the preset's)
    #[arg(long = "nsv-y")]
    nsv_y: Option<usize>,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated SV counts, e.g. 5,10,20,40,80
    #[arg(long, default_value = "5,10,20,40,60,80,100")]
    nsv: String,
}

fn apply_common(cfg: &mut ProblemConfig, c: &CommonArgs) {
    if let Some(k) = c.order {
        cfg.order = k;
    }
    if let Some(m) = c.tvb_m {
        cfg.tvb_m = m;
    }
    if let Some(e) = c.epsilon {
        cfg.epsilon = e;
    }
    if let Some(v) = c.cfl {
        cfg.cfl = v;
    }
    if let Some(t) = c.tfinal {
        cfg.t_final = Some(t);
    }
    if let Some(l) = c.limiter {
        cfg.limiter_mode = l.into();
    }
    if let Some(ch) = c.characteristic {
        cfg.characteristic = Some(matches!(ch, OnOff::On));
    }
    if let Some(lf) = c.lf {
        cfg.lf = match lf {
            LfArg::Local => LfMode::Local,
            LfArg::Global => LfMode::Global,
        };
    }
}

fn ensure_dir(dir: &Path) -> svweno::Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_run(args: &RunArgs) -> svweno::Result<()> {
    let mut cfg = harness::preset(&args.common.problem)?;
    apply_common(&mut cfg, &args.common);
    if let Some(n) = args.nsv {
        cfg.n_sv = n;
    }
    if let Some(n) = args.nsv_y {
        cfg.n_sv_y = Some(n);
    }
    eprintln!(
        "running {} (k={}, N={}{}, M={}, eps={:.1e}, cfl={})",
        cfg.preset,
        cfg.order,
        cfg.n_sv,
        cfg.n_sv_y.map(|n| format!("x{n}")).unwrap_or_default(),
        cfg.tvb_m,
        cfg.epsilon,
        cfg.cfl
    );
    let out = harness::run(&cfg, true)?;
    match &out {
        RunOutput::OneD(r) => {
            eprintln!(
                "done: t = {:.6}, {} steps, troubled {:.2}% (final step), {:.2}% (mean)",
                r.field.t,
                r.log.steps.len(),
                r.log.final_step_percent(),
                r.log.mean_percent()
            );
            if let Some(n) = &r.norms {
                println!(
                    "density errors vs exact: l1 = {:.6e}  l2 = {:.6e}  linf = {:.6e}",
                    n.l1, n.l2, n.linf
                );
            }
            if let Some(dir) = &args.common.out {
                ensure_dir(dir)?;
                output::write_solution_1d(
                    &dir.join("solution.csv"),
                    &r.grid,
                    &r.model,
                    &r.field,
                    r.exact.as_deref(),
                )?;
                output::write_troubled_csv(&dir.join("troubled.csv"), &r.log)?;
                output::write_runlog(&dir.join("runlog.jsonl"), &r.log)?;
                std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&cfg)?)?;
                eprintln!("wrote {}", dir.display());
            }
        }
        RunOutput::TwoD(r) => {
            eprintln!(
                "done: t = {:.6}, {} steps, troubled {:.2}% (final step), {:.2}% (mean)",
                r.field.t,
                r.log.steps.len(),
                r.log.final_step_percent(),
                r.log.mean_percent()
            );
            if let Some(dir) = &args.common.out {
                ensure_dir(dir)?;
                output::write_field_2d(&dir.join("field.dat"), &r.grid, &r.model, &r.field)?;
                output::write_density_matrix(&dir.join("density.dat"), &r.grid, &r.field)?;
                output::write_troubled_csv(&dir.join("troubled.csv"), &r.log)?;
                output::write_runlog(&dir.join("runlog.jsonl"), &r.log)?;
                std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&cfg)?)?;
                eprintln!("wrote {}", dir.display());
            }
        }
    }
    Ok(())
}

fn cmd_convergence(args: &ConvergenceArgs) -> svweno::Result<()> {
    let mut cfg = harness::preset(&args.common.problem)?;
    apply_common(&mut cfg, &args.common);
    let n_list: Vec<usize> = args
        .nsv
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| SvError::InvalidConfig(format!("bad --nsv entry {s:?}: {e}")))
        })
        .collect::<svweno::Result<_>>()?;
    let report = harness::run_convergence_study(&cfg, &n_list)?;
    let mut text = Vec::new();
    report.write_text(&mut text)?;
    print!("{}", String::from_utf8_lossy(&text));
    if let Some(dir) = &args.common.out {
        ensure_dir(dir)?;
        let mut csv = std::io::BufWriter::new(std::fs::File::create(dir.join("convergence.csv"))?);
        report.write_csv(&mut csv)?;
        std::fs::write(dir.join("convergence.txt"), &text)?;
        eprintln!("wrote {}", dir.display());
    }
    Ok(())
}

fn cmd_presets() {
    println!("available presets:");
    for p in harness::Preset::all() {
        println!("  {:<12} {}", p.name(), p.describe());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Convergence(args) => cmd_convergence(args),
        Command::Presets => {
            cmd_presets();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(SvError::Aborted {
            step,
            stage,
            t,
            reason,
            last_good,
        }) => {
            eprintln!("solver aborted at step {step}, stage {stage}, t = {t:.6e}: {reason}");
            eprintln!("last good state had {} values", last_good.len());
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
