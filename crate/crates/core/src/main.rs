#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use twave_core::asymptotics::{leading_order, make_profile, phi_of_xi};
use twave_core::center_manifold::{cm_graph, validity_radius};
use twave_core::error::{Error, Result};
use twave_core::harness::report::fmt_num;
use twave_core::harness::{
    run_and_write, validate_step2, validate_theorem2, ReportConfig, ValidationReport,
};
use twave_core::params::ModelParams;
use twave_core::pde_sim::{init_wave, measure_front_speed, simulate, Grid1D};
use twave_core::phase_dynamics::{
    connecting_orbit, integrate, portrait, Orbit, PhaseState, TimeParam,
};
use twave_core::special_functions::{lambert_w, residual, WBranch};

#[derive(Parser)]
#[command(
    name = "twave",
    version,
    about = "Traveling waves of u_t = u^p (u_xx + u) - delta u"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// Even exponent p >= 2 [default: 2]
    #[arg(long)]
    p: Option<u32>,
    /// Wave speed c > 0 [default: 1]
    #[arg(long)]
    c: Option<f64>,
    /// Kinetic switch, 0 or 1 [default: 1]
    #[arg(long)]
    delta: Option<u8>,
    /// Anchor phi(0) [default: 0.01]
    #[arg(long)]
    phi0: Option<f64>,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(
            self.p.unwrap_or(2),
            self.c.unwrap_or(1.0),
            self.delta.unwrap_or(1),
        )
    }
    fn phi0(&self) -> f64 {
        self.phi0.unwrap_or(1e-2)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Directory for output files (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a real Lambert W branch (0/principal or -1/lower)
    Lambertw {
        #[arg(allow_hyphen_values = true)]
        branch: String,
        #[arg(allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
    },
    /// Integrate an orbit; without a start point, the connecting orbit
    Orbit {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value = "s")]
        param: TimeParam,
        #[arg(long, allow_hyphen_values = true, requires = "start_psi")]
        start_phi: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "start_phi")]
        start_psi: Option<f64>,
        #[arg(long, default_value_t = 50.0, allow_hyphen_values = true)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Normalized direction field on a grid
    Portrait {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value = "s")]
        param: TimeParam,
        #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
        phi_min: f64,
        #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
        phi_max: f64,
        #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
        psi_min: f64,
        #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
        psi_max: f64,
        #[arg(long, default_value_t = 21)]
        n_phi: usize,
        #[arg(long, default_value_t = 21)]
        n_psi: usize,
        /// Also emit the center-manifold graph `phi,psi_manifold`
        #[arg(long)]
        manifold: bool,
    },
    /// Closed-form profile and its leading-order tail
    Asymptotics {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = -15.0, allow_hyphen_values = true)]
        xi_min: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi_max: f64,
        #[arg(long, default_value_t = 151)]
        n: usize,
    },
    /// Run one validation and print its JSON report
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(value_enum)]
        which: Validation,
        /// Checkpoints for the asymptotic-equivalence validation
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-2,-4,-6,-8,-10,-12"
        )]
        checkpoints: Vec<f64>,
    },
    /// Method-of-lines run from the traveling-wave profile
    Pde {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = -30.0, allow_hyphen_values = true)]
        xmin: f64,
        #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
        xmax: f64,
        #[arg(long, default_value_t = 1201)]
        nx: usize,
        #[arg(long, default_value_t = 3.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.4)]
        safety: f64,
        #[arg(long, default_value_t = 0.5)]
        level: f64,
        #[arg(long, default_value_t = 0.25)]
        snapshot_every: f64,
    },
    /// Run the configured validation suite and write report.json
    Report {
        #[command(flatten)]
        model: ModelArgs,
        /// INI configuration (built-in defaults when omitted)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, overriding the configuration
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Validation {
    Theorem2,
    Step2,
}

#[derive(Clone)]
enum Cell {
    Num(f64),
    Text(&'static str),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

/// Column-named table rendered as CSV or JSON records.
struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn numeric(name: &'static str, header: Vec<&'static str>, rows: Vec<Vec<f64>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(Cell::from).collect())
            .collect();
        Self { name, header, rows }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).expect("in-memory write");
                for r in &self.rows {
                    w.write_record(r.iter().map(|c| match c {
                        Cell::Num(v) => fmt_num(*v),
                        Cell::Text(t) => t.to_string(),
                    }))
                    .expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
            }
            Format::Json => {
                let records: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|r| {
                        self.header
                            .iter()
                            .zip(r)
                            .map(|(h, c)| {
                                let v = match c {
                                    Cell::Num(v) => serde_json::json!(v),
                                    Cell::Text(t) => serde_json::json!(t),
                                };
                                (h.to_string(), v)
                            })
                            .collect()
                    })
                    .collect();
                serde_json::to_string_pretty(&records).expect("records serialize") + "\n"
            }
        }
    }
}

fn emit(tables: &[Table], output: &OutputArgs) -> Result<()> {
    let ext = match output.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    match &output.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for t in tables {
                let path = dir.join(format!("{}.{ext}", t.name));
                std::fs::write(&path, t.render(output.format))?;
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            let written = tables.iter().enumerate().try_for_each(|(k, t)| {
                if k > 0 {
                    writeln!(out)?;
                }
                out.write_all(t.render(output.format).as_bytes())
            });
            match written {
                // A closed reader (e.g. `| head`) is not an error.
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn orbit_table(orbit: &Orbit) -> Table {
    let param = match orbit.param() {
        TimeParam::S => "s",
        TimeParam::Xi => "xi",
    };
    let mut header = vec!["param", "t", "phi", "psi"];
    let xi = orbit.xi_values();
    if xi.is_some() {
        header.push("xi");
    }
    let rows = orbit
        .times()
        .iter()
        .zip(orbit.states())
        .enumerate()
        .map(|(k, (&t, st))| {
            let mut r = vec![Cell::Text(param), t.into(), st.phi.into(), st.psi.into()];
            if let Some(xi) = xi {
                r.push(xi[k].into());
            }
            r
        })
        .collect();
    Table {
        name: "orbit",
        header,
        rows,
    }
}

fn print_report(report: &ValidationReport) -> ExitCode {
    print!("{}", report.to_json());
    eprint!("{}", report.summary());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Lambertw { branch, x } => {
            let branch: WBranch = branch.parse().map_err(Error::Config)?;
            for x in x {
                let w = lambert_w(branch, x)?;
                println!("{w} {}", fmt_num(residual(w, x)));
            }
        }
        Command::Orbit {
            model,
            output,
            param,
            start_phi,
            start_psi,
            t_end,
            tol,
        } => {
            let params = model.params()?;
            let orbit = match (start_phi, start_psi) {
                (Some(phi), Some(psi)) => {
                    integrate(&params, param, PhaseState::new(phi, psi), (0.0, t_end), tol)?
                }
                _ => connecting_orbit(&params, model.phi0(), tol)?,
            };
            eprintln!(
                "termination: {:?}, {} samples",
                orbit.termination(),
                orbit.len()
            );
            emit(&[orbit_table(&orbit)], &output)?;
        }
        Command::Portrait {
            model,
            output,
            param,
            phi_min,
            phi_max,
            psi_min,
            psi_max,
            n_phi,
            n_psi,
            manifold,
        } => {
            let params = model.params()?;
            let rows = portrait(
                &params,
                param,
                (phi_min, phi_max),
                (psi_min, psi_max),
                n_phi,
                n_psi,
            )?;
            let mut tables = vec![Table::numeric(
                "portrait",
                vec!["phi", "psi", "dphi", "dpsi"],
                rows.iter()
                    .map(|r| vec![r.phi, r.psi, r.dphi, r.dpsi])
                    .collect(),
            )];
            if manifold {
                if params.delta() != 1 {
                    return Err(Error::Precondition(
                        "the manifold overlay needs delta = 1".into(),
                    ));
                }
                let r = validity_radius(&params).min(phi_max.abs().max(phi_min.abs()));
                let n = 101;
                tables.push(Table::numeric(
                    "manifold",
                    vec!["phi", "psi_manifold"],
                    (0..n)
                        .map(|k| {
                            let phi = -r + 2.0 * r * k as f64 / (n - 1) as f64;
                            vec![phi, cm_graph(&params, phi)]
                        })
                        .collect(),
                ));
            }
            emit(&tables, &output)?;
        }
        Command::Asymptotics {
            model,
            output,
            xi_min,
            xi_max,
            n,
        } => {
            let params = model.params()?;
            let profile = make_profile(&params, model.phi0())?;
            if n < 2 || !(xi_min < xi_max) {
                return Err(Error::Precondition(
                    "need n >= 2 and xi_min < xi_max".into(),
                ));
            }
            let rows = (0..n)
                .map(|k| {
                    let xi = xi_min + (xi_max - xi_min) * k as f64 / (n - 1) as f64;
                    vec![xi, phi_of_xi(&profile, xi), leading_order(&profile, xi)]
                })
                .collect();
            emit(
                &[Table::numeric(
                    "asymptotics",
                    vec!["xi", "phi_formula", "phi_leading"],
                    rows,
                )],
                &output,
            )?;
        }
        Command::Validate {
            model,
            which,
            checkpoints,
        } => {
            let params = model.params()?;
            let report = match which {
                Validation::Theorem2 => validate_theorem2(&params, model.phi0(), &checkpoints)?,
                Validation::Step2 => validate_step2(&params, model.phi0.unwrap_or(0.1))?,
            };
            return Ok(print_report(&report));
        }
        Command::Pde {
            model,
            output,
            xmin,
            xmax,
            nx,
            t_end,
            safety,
            level,
            snapshot_every,
        } => {
            let params = model.params()?;
            let phi0 = model.phi0.unwrap_or(0.1);
            let grid = Grid1D::new(xmin, xmax, nx)?;
            let profile = make_profile(&params, phi0)?;
            let orbit = connecting_orbit(&params, phi0, 1e-10)?;
            let init = init_wave(&params, &profile, &orbit, &grid)?;
            let sim = simulate(&params, &grid, &init, t_end, safety, snapshot_every)?;
            let est = measure_front_speed(&sim.snapshots, &grid, level)?;
            let rows = sim
                .snapshots
                .iter()
                .flat_map(|s| (0..grid.nx()).map(move |i| vec![s.time, grid.x(i), s.values[i]]))
                .collect();
            emit(
                &[Table::numeric("pde", vec!["time", "x", "u"], rows)],
                &output,
            )?;
            eprintln!("clamps: {}, steps: {}", sim.clamp_count, sim.steps);
            println!("speed,{},residual,{}", est.speed, est.fit_residual);
        }
        Command::Report { model, config, out } => {
            let mut cfg = match &config {
                Some(path) => ReportConfig::load(path)?,
                None => ReportConfig::default(),
            };
            if let Some(p) = model.p {
                cfg.p = p;
            }
            if let Some(c) = model.c {
                cfg.c = c;
            }
            if let Some(d) = model.delta {
                cfg.delta = d;
            }
            if let Some(phi0) = model.phi0 {
                cfg.phi0 = phi0;
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            let report = run_and_write(&cfg)?;
            eprint!("{}", report.summary());
            println!("{}", Path::new(&cfg.out_dir).join("report.json").display());
            return Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
