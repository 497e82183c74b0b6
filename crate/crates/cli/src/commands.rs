//! Command surface: argument definitions and dispatch into reports.

use crate::config::{Config, ConfigError};
use crate::dsl::{self, Population};
use crate::report::{complex_value, fmt_to_tol, Report};
use crate::suites::{run_suites, SUITES};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;
use starq_core::feynman_kac::{
    fermi_trace_for, fk_trace_ho_function, fk_trace_quadratic_function, ground_energy_limit,
    regime_classify, FermiFkOptions, FermiSystem, Schedule,
};
use starq_core::grassmann::fmt_complex;
use starq_core::moyal::moyal_star_poly;
use starq_core::propagators::{fermi_driven_propagator, fermi_ho_propagator, free_propagator, ho_propagator, quadratic_propagator};
use starq_core::star_exp::{
    fermi_star_exp_meticulous, fermi_star_exp_naive, ho_star_exp, ho_star_exp_wick,
    star_exp_from_propagator_bosonic, KernelOrder,
};
use starq_core::{BosonicPropagatorSpec, FermiBasis, FermiScheme, SourceExpansion, StarExpRoute, TimeFunction};
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "starq", version, about = "Phase-space quantization calculator")]
pub struct Cli {
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Configuration file (missing file means defaults).
    #[arg(long, global = true, default_value = "starq.toml")]
    pub config: PathBuf,
    /// Overrides the configured hbar.
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Statistics {
    Bose,
    Fermi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum System {
    Ho,
    Quadratic,
    Free,
    FermiHo,
    FermiDriven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Closed,
    Propagator,
    Series,
    Naive,
    Meticulous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expansion {
    Linear,
    Exact,
}

impl From<Expansion> for SourceExpansion {
    fn from(e: Expansion) -> Self {
        match e {
            Expansion::Linear => SourceExpansion::Linear,
            Expansion::Exact => SourceExpansion::Exact,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Star product of two expressions.
    #[command(allow_negative_numbers = true)]
    StarProduct {
        #[arg(long, value_enum)]
        statistics: Statistics,
        a: String,
        b: String,
    },
    /// Star exponential of a Hamiltonian.
    #[command(allow_negative_numbers = true)]
    StarExp {
        #[arg(long, value_enum)]
        system: System,
        #[arg(long, value_enum)]
        scheme: Option<Scheme>,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Constant linear force for the quadratic system.
        #[arg(long, default_value_t = 0.0)]
        force: f64,
        /// Driver strength; with --tau gives the trace at that coupling.
        #[arg(long)]
        g: Option<f64>,
        #[arg(long, conflicts_with = "tau")]
        t: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_parser = parse_pair)]
        point: Option<(f64, f64)>,
        #[arg(long, value_enum, default_value = "linear")]
        expansion: Expansion,
    },
    /// Ground-state energy from the imaginary-time trace.
    #[command(allow_negative_numbers = true)]
    GroundEnergy {
        #[arg(long, value_enum)]
        system: System,
        #[arg(long, value_enum)]
        scheme: Option<Scheme>,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        g: f64,
        #[arg(long, value_enum, default_value = "linear")]
        expansion: Expansion,
        /// tau0,growth,max_steps,tol[,min_tau]
        #[arg(long)]
        schedule: Option<String>,
    },
    /// Position-space propagator.
    #[command(allow_negative_numbers = true)]
    Propagator {
        #[arg(long, value_enum)]
        system: System,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Spring term c(t): a number or samples `t:v;t:v;...`.
        #[arg(long)]
        c: Option<String>,
        /// Force term f(t): a number or samples `t:v;t:v;...`.
        #[arg(long)]
        force: Option<String>,
        /// x_f,x_0
        #[arg(long, value_parser = parse_pair)]
        endpoints: (f64, f64),
        #[arg(long)]
        t: f64,
    },
    /// Run the self-check suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Classify the driven-oscillator coupling regime.
    #[command(allow_negative_numbers = true)]
    Regime {
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        g: f64,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(ConfigError),
    Compute(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage: {m}"),
            Self::Config(e) => write!(f, "{e}"),
            Self::Compute(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config(_) => 2,
            Self::Compute(_) => 1,
        }
    }
}

impl From<starq_core::Error> for CliError {
    fn from(e: starq_core::Error) -> Self {
        Self::Compute(e.to_string())
    }
}

fn enum_name(v: impl ValueEnum) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((num(a)?, num(b)?))
}

pub fn parse_schedule(s: &str) -> Result<Schedule, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if !(4..=5).contains(&parts.len()) {
        return Err("schedule is tau0,growth,max_steps,tol[,min_tau]".into());
    }
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    let sched = Schedule {
        tau0: num(parts[0])?,
        growth: num(parts[1])?,
        max_steps: parts[2].parse().map_err(|e| format!("`{}`: {e}", parts[2]))?,
        tol: num(parts[3])?,
        min_tau: parts.get(4).map(|v| num(v)).transpose()?.unwrap_or(0.0),
    };
    sched.validate().map_err(|e| e.to_string())?;
    Ok(sched)
}

fn parse_time_function(s: &str) -> Result<TimeFunction, String> {
    if let Ok(v) = s.trim().parse::<f64>() {
        return Ok(TimeFunction::Constant(v));
    }
    let samples = s
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (t, v) = p.split_once(':').ok_or_else(|| format!("sample `{p}` is not t:v"))?;
            let t = t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"))?;
            let v = v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"))?;
            Ok((t, v))
        })
        .collect::<Result<Vec<_>, String>>()?;
    TimeFunction::table(samples).map_err(|e| e.to_string())
}

fn real_result(r: &mut Report, name: &str, v: f64, tol: f64, provenance: &str, route: &str) {
    r.result(name, json!(v), fmt_to_tol(v, tol), Some(tol), provenance, route);
}

fn complex_result(r: &mut Report, name: &str, v: Complex64, tol: f64, provenance: &str, route: &str) {
    r.result(name, complex_value(v), fmt_complex(v), Some(tol), provenance, route);
}

fn text_result(r: &mut Report, name: &str, s: String, provenance: &str, route: &str) {
    r.result(name, json!(s), s, None, provenance, route);
}

fn fermi_scheme(s: Option<Scheme>) -> Result<FermiScheme, CliError> {
    match s {
        None | Some(Scheme::Meticulous) => Ok(FermiScheme::Meticulous),
        Some(Scheme::Naive) => Ok(FermiScheme::Naive),
        Some(other) => Err(usage(format!("scheme {other:?} does not apply to fermionic systems"))),
    }
}

fn scheme_tag(s: FermiScheme) -> &'static str {
    match s {
        FermiScheme::Naive => "naive",
        FermiScheme::Meticulous => "meticulous",
    }
}

/// Parses and executes a command line into a report.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let mut cfg = Config::load(&cli.config).map_err(CliError::Config)?;
    if let Some(h) = cli.hbar {
        if !(h > 0.0 && h.is_finite()) {
            return Err(usage("--hbar must be > 0"));
        }
        cfg.hbar = h;
    }
    match &cli.command {
        Command::StarProduct { statistics, a, b } => star_product(&cfg, *statistics, a, b),
        Command::StarExp { system, scheme, omega, m, force, g, t, tau, point, expansion } => {
            star_exp(&cfg, *system, *scheme, *omega, *m, *force, *g, *t, *tau, *point, *expansion)
        }
        Command::GroundEnergy { system, scheme, omega, a, b, c, g, expansion, schedule } => {
            ground_energy(&cfg, *system, *scheme, *omega, (*a, *b, *c), *g, *expansion, schedule.as_deref())
        }
        Command::Propagator { system, omega, m, c, force, endpoints, t } => {
            propagator(&cfg, *system, *omega, *m, c.as_deref(), force.as_deref(), *endpoints, *t)
        }
        Command::Verify { suite } => verify(&cfg, suite),
        Command::Regime { omega, g } => regime(&cfg, *omega, *g),
    }
}

fn star_product(cfg: &Config, stats: Statistics, a: &str, b: &str) -> Result<Report, CliError> {
    let mut r = Report::new("star-product");
    r.param("statistics", enum_name(stats));
    r.param("a", a);
    r.param("b", b);
    let ea = dsl::parse(a).map_err(|e| usage(format!("A {e}")))?;
    let eb = dsl::parse(b).map_err(|e| usage(format!("B {e}")))?;
    let pop = dsl::population(&[&ea, &eb]).map_err(|e| usage(e.to_string()))?;
    match stats {
        Statistics::Bose => {
            if pop == Population::Fermi {
                return Err(usage("bose statistics with Grassmann symbols"));
            }
            let f = dsl::elaborate_bose(&ea).map_err(|e| usage(e.to_string()))?;
            let g = dsl::elaborate_bose(&eb).map_err(|e| usage(e.to_string()))?;
            text_result(&mut r, "product", moyal_star_poly(&f, &g).to_string(), "exact", "moyal-bidifferential");
        }
        Statistics::Fermi => {
            if pop == Population::Bose {
                return Err(usage("fermi statistics with bosonic symbols"));
            }
            r.param("hbar", cfg.hbar);
            let space = dsl::fermi_space_for(&[&ea, &eb], cfg.hbar).map_err(|e| usage(e.to_string()))?;
            let f = dsl::elaborate_fermi(&ea, &space).map_err(|e| usage(e.to_string()))?;
            let g = dsl::elaborate_fermi(&eb, &space).map_err(|e| usage(e.to_string()))?;
            let prod = space.star(&f, &g)?.pruned(1e-15);
            text_result(&mut r, "product", prod.to_string(), "exact", "grassmann-bidifferential");
        }
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn star_exp(
    cfg: &Config,
    system: System,
    scheme: Option<Scheme>,
    omega: f64,
    m: f64,
    force: f64,
    g: Option<f64>,
    t: Option<f64>,
    tau: Option<f64>,
    point: Option<(f64, f64)>,
    expansion: Expansion,
) -> Result<Report, CliError> {
    let hbar = cfg.hbar;
    let mut r = Report::new("star-exp");
    r.param("system", enum_name(system));
    r.param("omega", omega);
    r.param("hbar", hbar);
    match system {
        System::Ho | System::Quadratic => {
            let (q, p) = point.ok_or_else(|| usage("--point q,p is required for bosonic systems"))?;
            r.param("point", json!([q, p]));
            if let Some(tau) = tau {
                if system != System::Ho {
                    return Err(usage("--tau is available for the ho system"));
                }
                r.param("tau", tau);
                let v = ho_star_exp_wick(m, omega, q, p, tau, hbar);
                real_result(&mut r, "value", v, 1e-12, "closed-form", "wick-rotated");
                return Ok(r);
            }
            let t = t.ok_or_else(|| usage("one of --t or --tau is required"))?;
            r.param("t", t);
            if system == System::Quadratic {
                if !matches!(scheme, None | Some(Scheme::Propagator)) {
                    return Err(usage("the quadratic system uses --scheme propagator"));
                }
                let spec = BosonicPropagatorSpec::Quadratic {
                    m,
                    c: TimeFunction::Constant(m * omega * omega),
                    f: TimeFunction::Constant(force),
                    hbar,
                };
                let v = star_exp_from_propagator_bosonic(&spec, q, p, t)?;
                complex_result(&mut r, "value", v, 1e-8, "numerical", "from-propagator");
                return Ok(r);
            }
            let route = match scheme.unwrap_or(Scheme::Closed) {
                Scheme::Closed => StarExpRoute::ClosedForm,
                Scheme::Propagator => StarExpRoute::FromPropagator,
                Scheme::Series => StarExpRoute::Series,
                other => return Err(usage(format!("scheme {other:?} does not apply to ho"))),
            };
            let res = ho_star_exp(m, omega, q, p, t, hbar, route)?;
            let wt = omega * t;
            if wt <= res.window.0 || wt >= res.window.1 {
                r.diagnostics.push(format!(
                    "omega*t = {wt} outside the {} validity window ({}, {})",
                    route.tag(),
                    res.window.0,
                    res.window.1
                ));
            }
            let tol = if route == StarExpRoute::Series { 1e-8 } else { 1e-9 };
            complex_result(&mut r, "value", res.value, tol, "closed-form", route.tag());
        }
        System::FermiHo | System::FermiDriven => {
            let fs = fermi_scheme(scheme)?;
            r.param("scheme", scheme_tag(fs));
            let fsys = if system == System::FermiHo { FermiSystem::Ho } else { FermiSystem::Driven };
            if let Some(tau) = tau {
                let g = g.unwrap_or(0.0);
                r.param("tau", tau);
                r.param("g", g);
                let ft = fermi_trace_for(fsys, fs, omega, g, hbar, expansion.into())?;
                if ft.anomaly > 0.0 {
                    r.diagnostics.push(format!("odd residue in trace: {:.3e}", ft.anomaly));
                }
                let z = ft.trace.value(tau)?;
                complex_result(&mut r, "trace", z, 1e-12, "closed-form", scheme_tag(fs));
                return Ok(r);
            }
            let basis = match fs {
                FermiScheme::Naive => FermiBasis::Naive,
                FermiScheme::Meticulous => FermiBasis::Meticulous,
            };
            let kernel = match fsys {
                FermiSystem::Ho => fermi_ho_propagator(omega, basis, hbar),
                FermiSystem::Driven => fermi_driven_propagator(omega, basis, hbar, expansion.into())?,
            };
            let se = match fs {
                FermiScheme::Naive => fermi_star_exp_naive(&kernel, KernelOrder::SourceFirst)?,
                FermiScheme::Meticulous => fermi_star_exp_meticulous(&kernel)?,
            };
            let parity = format!("{:?}", se.parity()).to_lowercase();
            r.diagnostics.push(format!("parity: {parity}"));
            match t {
                Some(t) => {
                    r.param("t", t);
                    let v = se.at(t).pruned(1e-15);
                    text_result(&mut r, "value", v.to_string(), "closed-form", scheme_tag(fs));
                }
                None => {
                    let v = se.value.pruned(1e-15);
                    text_result(&mut r, "value", v.to_string(), "closed-form", scheme_tag(fs));
                }
            }
            text_result(&mut r, "parity", parity, "exact", "parity-check");
        }
        System::Free => return Err(usage("star-exp supports ho, quadratic, fermi-ho, fermi-driven")),
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn ground_energy(
    cfg: &Config,
    system: System,
    scheme: Option<Scheme>,
    omega: f64,
    abc: (Option<f64>, Option<f64>, Option<f64>),
    g: f64,
    expansion: Expansion,
    schedule: Option<&str>,
) -> Result<Report, CliError> {
    let hbar = cfg.hbar;
    let mut r = Report::new("ground-energy");
    r.param("system", enum_name(system));
    r.param("hbar", hbar);
    let custom = schedule.map(parse_schedule).transpose().map_err(usage)?;
    let route = |e: &starq_core::GroundEnergyEstimate| {
        format!("secant tau={}", e.taus.last().copied().unwrap_or(f64::NAN))
    };
    match system {
        System::Ho | System::Quadratic => {
            let sched = custom.unwrap_or(cfg.fk);
            let z = if system == System::Ho {
                r.param("omega", omega);
                fk_trace_ho_function(omega, hbar)?
            } else {
                let (a, b, c) = match abc {
                    (Some(a), Some(b), Some(c)) => (a, b, c),
                    _ => return Err(usage("quadratic needs --a, --b and --c")),
                };
                r.param("a", a);
                r.param("b", b);
                r.param("c", c);
                fk_trace_quadratic_function(a, b, c, hbar)?
            };
            let e = ground_energy_limit(&z, hbar, &sched)?;
            let route = route(&e);
            real_result(&mut r, "E0", e.value, sched.tol, "feynman-kac", &route);
        }
        System::FermiHo | System::FermiDriven => {
            let fs = fermi_scheme(scheme)?;
            r.param("omega", omega);
            r.param("g", g);
            r.param("scheme", scheme_tag(fs));
            let opts = FermiFkOptions {
                schedule: custom.unwrap_or(cfg.fk_fermi),
                expansion: expansion.into(),
                ..FermiFkOptions::default()
            };
            let fsys = if system == System::FermiHo { FermiSystem::Ho } else { FermiSystem::Driven };
            let e = starq_core::feynman_kac::fermi_ground_energy(fsys, fs, omega, g, hbar, &opts)?;
            let route = route(&e);
            let tol = opts.schedule.tol;
            real_result(&mut r, "E0", e.value, tol, "feynman-kac", &route);
            real_result(&mut r, "L", -e.value / hbar, tol, "feynman-kac", &route);
        }
        System::Free => return Err(usage("ground-energy supports ho, quadratic, fermi-ho, fermi-driven")),
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn propagator(
    cfg: &Config,
    system: System,
    omega: f64,
    m: f64,
    c: Option<&str>,
    force: Option<&str>,
    (xf, x0): (f64, f64),
    t: f64,
) -> Result<Report, CliError> {
    let hbar = cfg.hbar;
    let mut r = Report::new("propagator");
    r.param("system", enum_name(system));
    r.param("endpoints", json!([xf, x0]));
    r.param("t", t);
    r.param("m", m);
    r.param("hbar", hbar);
    match system {
        System::Free => {
            complex_result(&mut r, "K", free_propagator(m, xf, x0, t, hbar), 1e-12, "closed-form", "free");
        }
        System::Ho => {
            r.param("omega", omega);
            complex_result(&mut r, "K", ho_propagator(m, omega, xf, x0, t, hbar)?, 1e-12, "closed-form", "ho");
        }
        System::Quadratic => {
            let cf = match c {
                Some(s) => parse_time_function(s).map_err(usage)?,
                None => TimeFunction::Constant(m * omega * omega),
            };
            let ff = match force {
                Some(s) => parse_time_function(s).map_err(usage)?,
                None => TimeFunction::Constant(0.0),
            };
            if let Some(s) = c {
                r.param("c", s);
            } else {
                r.param("omega", omega);
            }
            if let Some(s) = force {
                r.param("force", s);
            }
            let spec = BosonicPropagatorSpec::Quadratic { m, c: cf, f: ff, hbar };
            let res = quadratic_propagator(&spec, xf, t, x0, 0.0)?;
            complex_result(&mut r, "K", res.amplitude, 1e-8, "numerical", "jacobi-rk4");
            real_result(&mut r, "action", res.action, 1e-8, "numerical", "jacobi-rk4");
            real_result(&mut r, "phi", res.phi_tf, 1e-8, "numerical", "jacobi-rk4");
            r.result("maslov", json!(res.maslov), res.maslov.to_string(), None, "exact", "zero-count");
        }
        _ => return Err(usage("propagator supports ho, quadratic, free")),
    }
    Ok(r)
}

fn verify(cfg: &Config, suite: &str) -> Result<Report, CliError> {
    let mut r = Report::new("verify");
    r.param("suite", suite);
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if let Some(s) = SUITES.iter().find(|s| **s == suite) {
        vec![*s]
    } else {
        return Err(usage(format!("unknown suite `{suite}` (all, {})", SUITES.join(", "))));
    };
    r.suites = run_suites(&names, cfg);
    Ok(r)
}

fn regime(cfg: &Config, omega: f64, g: f64) -> Result<Report, CliError> {
    let mut r = Report::new("regime");
    r.param("omega", omega);
    r.param("g", g);
    let rep = regime_classify(omega, g, &cfg.regime)?;
    text_result(&mut r, "regime", rep.regime.tag().to_string(), "classification", "thresholds");
    real_result(&mut r, "lambda_plus", rep.exact.lambda_plus, 1e-12, "exact", "2x2-spectrum");
    real_result(&mut r, "lambda_minus", rep.exact.lambda_minus, 1e-12, "exact", "2x2-spectrum");
    if let (Some((ap, am)), Some(bound)) = (rep.approx, rep.bound) {
        let tol = bound.max(1e-15);
        real_result(&mut r, "approx_plus", ap, tol, "series", rep.regime.tag());
        real_result(&mut r, "approx_minus", am, tol, "series", rep.regime.tag());
        r.diagnostics.push(format!(
            "error {:.3e} vs next-order bound {:.3e}",
            rep.error.unwrap_or(f64::NAN),
            bound
        ));
    }
    Ok(r)
}
