use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use hlx::checkpoint;
use hlx::config::{RunConfig, SweepConfig};
use hlx::diagnostics::{write_csv, Recorder};
use hlx::gauge::{decompose, helicity, mean_square_potential, DIVERGENCE_TOLERANCE};
use hlx::initial::make_initial_data;
use hlx::solver::{integrate, MhdState};
use hlx::spectral::{divergence, norm_sq, Grid};
use hlx::sweep::{run_sweep, write_summary_csv};
use hlx::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "hlx", version, about = "Periodic MHD runs, ideal-limit sweeps and gauge diagnostics")]
struct Cli {
    /// Worker threads; 1 gives bitwise-reproducible output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write series.csv, a final checkpoint and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (HLX_OUT takes precedence).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a resistivity ladder and fit the drift scaling.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the harmonic/curl-range split and helicity of a checkpoint's magnetic field.
    Decompose {
        checkpoint: PathBuf,
        /// Constant added to the vector potential, e.g. 1,0,0.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gauge_shift: Option<Vec<f64>>,
    },
    /// Check the structural invariants of a checkpoint.
    Verify { checkpoint: PathBuf },
}

/// Error tagged with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::Precondition(_) | Error::Usage(_) => EXIT_CONFIG,
            Error::Diverged { .. } => EXIT_DIVERGED,
            Error::Corrupt(_) | Error::Io(_) | Error::Json(_) => EXIT_IO,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn out_dir(flag: Option<PathBuf>, from_config: Option<&str>) -> PathBuf {
    if let Some(env) = std::env::var_os("HLX_OUT").filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    flag.or_else(|| from_config.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", path.display())))
}

fn write_series(path: &Path, rec: &Recorder) -> CliResult {
    write_csv(&rec.series, create(path)?)?;
    Ok(())
}

fn cmd_run(config: &Path, out: Option<PathBuf>, threads: Option<usize>) -> CliResult {
    let cfg = RunConfig::load(config)?;
    cfg.validate()?;
    let dir = out_dir(out, cfg.out_dir.as_deref());
    fs::create_dir_all(&dir)?;

    let start = Instant::now();
    let grid = Grid::new(cfg.torus)?;
    let initial = make_initial_data(&grid, &cfg.initial)?;
    let mut rec = Recorder::new(cfg.solver);
    let outcome = integrate(&initial, &cfg.solver, &mut [&mut rec]);
    write_series(&dir.join("series.csv"), &rec)?;
    let traj = outcome?;
    checkpoint::save(&traj.final_state, &dir.join("final.chk"))?;

    let manifest = json!({
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads.unwrap_or_else(rayon::current_num_threads),
        "steps": traj.steps,
        "final_t": traj.final_state.t,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    fs::write(dir.join("run_manifest.json"), text + "\n")?;
    Ok(())
}

fn cmd_sweep(config: &Path, out: Option<PathBuf>) -> CliResult {
    let cfg = SweepConfig::load(config)?;
    cfg.validate()?;
    let dir = out_dir(out, cfg.out_dir.as_deref());
    fs::create_dir_all(&dir)?;

    let result = run_sweep(&cfg.plan)?;
    for (row, series) in result.rows.iter().zip(&result.series) {
        let sub = dir.join(format!("mu_{:e}", row.mu));
        fs::create_dir_all(&sub)?;
        write_csv(series, create(&sub.join("series.csv"))?)?;
    }
    write_summary_csv(&result, create(&dir.join("sweep_summary.csv"))?)?;
    let summary = json!({
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
        "result": result,
        "slope": result.fit.map(|f| f.slope),
        "failed": result.failed(),
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serialises");
    fs::write(dir.join("sweep_summary.json"), text + "\n")?;

    if result.failed() {
        return Err(Failure::new(
            EXIT_DIVERGED,
            format!(
                "{:.0}% of sweep rows flagged (diverged or under-resolved)",
                100.0 * result.flagged_fraction
            ),
        ));
    }
    Ok(())
}

fn load_checkpoint(path: &Path) -> CliResult<MhdState> {
    // anything wrong with the file itself is an I/O-class failure
    checkpoint::load(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn cmd_decompose(path: &Path, shift: Option<Vec<f64>>) -> CliResult {
    let state = load_checkpoint(path)?;
    let dim = state.grid().dim();
    let shift = shift.unwrap_or_else(|| vec![0.0; dim]);
    if shift.len() != dim {
        return Err(Failure::new(
            EXIT_CONFIG,
            format!("--gauge-shift needs {dim} components, got {}", shift.len()),
        ));
    }
    let d = decompose(&state.b)?;
    let mut report = json!({
        "b_sigma_norm": norm_sq(&d.sigma_part).sqrt(),
        "b_harmonic": d.harmonic_part,
    });
    if dim == 3 {
        report["helicity_at_shift_0"] = json!(helicity(&state.b, &vec![0.0; dim])?);
        report["helicity_at_shift"] = json!(helicity(&state.b, &shift)?);
    } else {
        // helicity is not defined on T²; the stream-function analogue is reported instead
        report["helicity_at_shift_0"] = serde_json::Value::Null;
        report["helicity_at_shift"] = serde_json::Value::Null;
        report["msp"] = json!(mean_square_potential(&state.b)?);
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    Ok(())
}

/// `max |k·v̂|` of each field over `|k|_max · max |ŵ|` across both fields, so a
/// roundoff-sized velocity is not judged against its own magnitude.
fn scaled_divergence(state: &MhdState) -> (f64, f64) {
    let grid = state.grid();
    let spec = grid.spec();
    let kmax = spec.base_wavenumber() * spec.max_retained() as f64 * (grid.dim() as f64).sqrt();
    let scale = kmax * state.u.max_abs_coefficient().max(state.b.max_abs_coefficient());
    let div = |f: &hlx::spectral::SpectralField| {
        let d = divergence(f).expect("vector field").max_abs_coefficient();
        if scale > 0.0 {
            d / scale
        } else {
            0.0
        }
    };
    (div(&state.u), div(&state.b))
}

fn cmd_verify(path: &Path) -> CliResult {
    let state = load_checkpoint(path)?;
    let (div_u, div_b) = scaled_divergence(&state);
    let checks = [
        ("finite", state.u.is_finite() && state.b.is_finite(), 0.0),
        ("u_conjugate_symmetric", state.u.conjugate_symmetry_defect() <= 1e-12, state.u.conjugate_symmetry_defect()),
        ("b_conjugate_symmetric", state.b.conjugate_symmetry_defect() <= 1e-12, state.b.conjugate_symmetry_defect()),
        ("u_dealiased", state.u.dealiased_defect() == 0.0, state.u.dealiased_defect()),
        ("b_dealiased", state.b.dealiased_defect() == 0.0, state.b.dealiased_defect()),
        ("u_solenoidal", div_u <= DIVERGENCE_TOLERANCE, div_u),
        ("b_solenoidal", div_b <= DIVERGENCE_TOLERANCE, div_b),
    ];
    let ok = checks.iter().all(|c| c.1);
    let report = json!({
        "torus": state.grid().spec(),
        "t": state.t,
        "ok": ok,
        "checks": checks
            .iter()
            .map(|(name, pass, value)| json!({"name": name, "pass": pass, "value": value}))
            .collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    if ok {
        Ok(())
    } else {
        Err(Failure::new(EXIT_IO, "checkpoint failed invariant checks"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("hlx: cannot configure {k} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out, cli.threads),
        Command::Sweep { config, out } => cmd_sweep(&config, out),
        Command::Decompose { checkpoint, gauge_shift } => cmd_decompose(&checkpoint, gauge_shift),
        Command::Verify { checkpoint } => cmd_verify(&checkpoint),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hlx: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
