use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qreflect::scenario::validate::{self, ValidateOptions};
use qreflect::scenario::{run_scenario, to_csv, to_json, Mode, ResultRecord, ScenarioConfig, SweepAxis, SweepSpec};
use qreflect::Error;

#[derive(Parser)]
#[command(name = "qreflect", version, about = "Quantum reflection and diffraction from doped surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario document (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario.
    #[arg(long, value_parser = ["helium", "fig2a", "fig2b"])]
    preset: Option<String>,
    /// Write the result to this file; .csv or .json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Coupled,
    Sudden,
}

#[derive(Subcommand)]
enum Command {
    /// Isolated specular channel.
    Specular(Source),
    /// Diffraction pattern of a grating.
    Diffract {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "coupled")]
        method: Method,
    },
    /// Badlands function of the specular channel.
    Badlands(Source),
    /// Parameter sweep. Axis and values come from the document's sweep block
    /// unless given here.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        /// Mode solved at every point.
        #[arg(long, value_enum)]
        point_mode: Option<PointMode>,
    },
    /// Run the self-check suite.
    Validate {
        /// Coarsest grid of the convergence-order check.
        #[arg(long, default_value_t = ValidateOptions::default().order_base_steps)]
        order_base_steps: usize,
        /// Also solve the full coupled-channel presets.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Speed,
    Theta,
    #[value(name = "sigma_m")]
    SigmaM,
    #[value(name = "d_x")]
    DX,
    #[value(name = "d_z")]
    DZ,
    F,
    Epsilon,
}

#[derive(Clone, Copy, ValueEnum)]
enum PointMode {
    Specular,
    DiffractCoupled,
    DiffractSudden,
    Badlands,
}

fn axis(a: AxisArg) -> SweepAxis {
    match a {
        AxisArg::Speed => SweepAxis::Speed,
        AxisArg::Theta => SweepAxis::Theta,
        AxisArg::SigmaM => SweepAxis::SigmaM,
        AxisArg::DX => SweepAxis::DX,
        AxisArg::DZ => SweepAxis::DZ,
        AxisArg::F => SweepAxis::F,
        AxisArg::Epsilon => SweepAxis::Epsilon,
    }
}

fn point_mode(m: PointMode) -> Mode {
    match m {
        PointMode::Specular => Mode::Specular,
        PointMode::DiffractCoupled => Mode::DiffractCoupled,
        PointMode::DiffractSudden => Mode::DiffractSudden,
        PointMode::Badlands => Mode::Badlands,
    }
}

enum Failure {
    Validation(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

fn load(src: &Source, default_preset: &str) -> Result<ScenarioConfig, Failure> {
    match (&src.config, &src.preset) {
        (Some(path), _) => ScenarioConfig::from_path(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display()))),
        (None, Some(name)) => Ok(ScenarioConfig::preset(name)?),
        (None, None) => Ok(ScenarioConfig::preset(default_preset)?),
    }
}

fn write_out(rec: &ResultRecord, out: Option<&Path>) -> Result<(), Failure> {
    let Some(path) = out else { return Ok(()) };
    let text = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => to_csv(rec),
        Some("json") => to_json(rec),
        _ => return Err(Failure::Validation(format!("{}: output format must be .csv or .json", path.display()))),
    };
    std::fs::write(path, text).map_err(|e| Failure::Solver(format!("{}: {e}", path.display())))
}

fn print_record(rec: &ResultRecord) {
    if let Some(v) = &rec.validation {
        print!("{}", v.summary());
        println!("{}", if v.passed { "all checks passed" } else { "validation FAILED" });
        return;
    }
    if let Some(b) = &rec.badlands {
        println!("B_max = {:.6e} at y = {:.6e} m", b.b_max, b.y_max_m);
        if let Some(y) = b.y_cp_m {
            println!("y_CP  = {y:.6e} m");
        }
        if let Some(y) = b.y_el_m {
            println!("y_el  = {y:.6e} m");
        }
        println!("B < tol on y < {:.6e} m and y > {:.6e} m", b.y_start_m, b.y_end_m);
        return;
    }
    if !rec.points.is_empty() {
        for p in &rec.points {
            match (&p.error, p.r_total) {
                (Some(e), _) => println!("{:>24.16e}  error: {e}", p.sweep_value.unwrap_or(f64::NAN)),
                (None, Some(r)) => println!("{:>24.16e}  R_total = {r:.16e}", p.sweep_value.unwrap_or(f64::NAN)),
                (None, None) => println!("{:>24.16e}  ok", p.sweep_value.unwrap_or(f64::NAN)),
            }
        }
        return;
    }
    println!("{:>6} {:>24} {:>24}", "n", "k_n [1/m]", "R_n");
    for r in &rec.table {
        println!("{:>6} {:>24.16e} {:>24.16e}", r.n, r.k_n_per_m, r.big_r_n);
    }
    if let Some(t) = rec.r_total {
        println!("R_total = {t:.16e}");
    }
    for w in &rec.warnings {
        println!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (rec, out) = match cli.command {
        Command::Specular(src) => {
            let mut c = load(&src, "helium")?;
            c.mode = Mode::Specular;
            c.sweep = None;
            (run_scenario(&c)?, src.out)
        }
        Command::Diffract { source, method } => {
            let mut c = load(&source, "fig2a")?;
            c.mode = match method {
                Method::Coupled => Mode::DiffractCoupled,
                Method::Sudden => Mode::DiffractSudden,
            };
            c.sweep = None;
            (run_scenario(&c)?, source.out)
        }
        Command::Badlands(src) => {
            let mut c = load(&src, "helium")?;
            c.mode = Mode::Badlands;
            c.sweep = None;
            (run_scenario(&c)?, src.out)
        }
        Command::Sweep { source, axis: a, values, point_mode: pm } => {
            let mut c = load(&source, "helium")?;
            let mut sw = c.sweep.clone().unwrap_or(SweepSpec {
                axis: SweepAxis::Theta,
                values: Vec::new(),
                mode: if c.mode == Mode::Sweep { Mode::Specular } else { c.mode },
            });
            if let Some(a) = a {
                sw.axis = axis(a);
            }
            if let Some(v) = values {
                sw.values = v;
            }
            if let Some(m) = pm {
                sw.mode = point_mode(m);
            }
            c.mode = Mode::Sweep;
            c.sweep = Some(sw);
            (run_scenario(&c)?, source.out)
        }
        Command::Validate { order_base_steps, full, out } => {
            let report = validate::run(&ValidateOptions { order_base_steps, full });
            let mut c = ScenarioConfig::preset("helium")?;
            c.mode = Mode::Validate;
            (ResultRecord::from_validation(c, report), out)
        }
    };
    print_record(&rec);
    write_out(&rec, out.as_deref())?;
    Ok(rec.succeeded())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let validate = matches!(cli.command, Command::Validate { .. });
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        // A failed self-check is a validation failure; failed sweep points
        // are solver failures.
        Ok(false) => ExitCode::from(if validate { 1 } else { 2 }),
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
