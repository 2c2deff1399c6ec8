//! Command-line front end. Every experiment is a subcommand; parameters
//! come from a flat key/value config file (sections named after the
//! subcommands plus `[global]`) with full override by command-line flags.
//! The resolved configuration is echoed into the output directory as
//! `config.txt`, so re-running that file reproduces the run byte for byte.
//!
//! Exit codes: 0 success, 1 internal error, 2 configuration error.
//!
//! CSV schemas:
//! - criterion: `x,lhs,rhs,predicts_blowup,marginal`
//! - phase: `equilibria.csv` as `nu,e,v,kind,re1,im1,re2,im2`;
//!   `boundary.csv` as `nu,e,v` polylines
//! - characteristics: `t,x,V,E,V_x,E_x`
//! - solve: `snapshots.csv` as `t,x,V,E,n`; `series.csv` as
//!   `t,max_vx,max_nx,max_ex,min_n,max_n`
//! - stochastic: `moments.csv` as `t,x,rho,Vhat,Ehat` plus the flat binary
//!   `checkpoint.bin` (header N, sigma, seed, t; then X, V, E, all
//!   little-endian f64)

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::acceptance;
use crate::characteristics::{
    classify_equilibria, delta, delta_p, integrate_characteristic, trace_separatrix,
    CharState, CharSystemKind, IntegrateOptions, SeparatrixOptions,
};
use crate::diagnostics::CRITERION_BAND;
use crate::error::{Error, Result};
use crate::fields::{solve, AdvectionScheme, SolverConfig};
use crate::state::{
    make_initial_data, Grid1D, InitialData, Preset, RegularizerSpec, DEFAULT_X_MAX,
    DEFAULT_X_MIN,
};
use crate::stochastic::{
    estimate_moments, init_ensemble, run_ensemble, write_checkpoint, SpatialDensity,
};

#[derive(Parser, Debug)]
#[command(name = "coldplasma", version, about = "Numerical laboratory for 1D cold-plasma Euler-Poisson dynamics")]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Flat key/value config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default `out/<subcommand>`); receives the echoed
    /// config and all artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Rayon thread count (results are independent of it).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate the pointwise smoothness criterion on initial data, or on a
    /// single (v0, e0) gradient pair with --v0/--e0.
    Criterion(CriterionArgs),
    /// Equilibria and smoothness-boundary polylines of the gradient system
    /// on the (e, v) phase plane.
    Phase(PhaseArgs),
    /// Integrate one characteristic of the original or friction system.
    Characteristics(CharArgs),
    /// Run the Eulerian solver with the configured regularizers.
    Solve(SolveArgs),
    /// Run the stochastic particle ensemble and estimate moment fields.
    Stochastic(StochasticArgs),
    /// Run an acceptance suite and print the pass/fail matrix.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct PresetArgs {
    /// Initial data preset: zero | laser | gaussian | table.
    #[arg(long)]
    preset: Option<String>,
    /// Amplitude of the laser pulse or Gaussian field.
    #[arg(long)]
    a: Option<f64>,
    /// Laser sign convention: +1 literal formula, -1 potential gradient.
    #[arg(long)]
    sign: Option<f64>,
    /// Width of the Gaussian field preset.
    #[arg(long)]
    s: Option<f64>,
    /// CSV file with x,V0,E0 samples for the spline table preset.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
}

#[derive(Args, Debug)]
struct RegArgs {
    /// Constant friction coefficient.
    #[arg(long)]
    nu: Option<f64>,
    /// Density-friction prefactor for nu(n) = nu0 * n^gamma.
    #[arg(long)]
    nu0: Option<f64>,
    /// Density-friction exponent.
    #[arg(long)]
    gamma: Option<f64>,
    /// Pressure coefficient alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Pressure exponent (> 1 when alpha > 0).
    #[arg(long)]
    gamma_p: Option<f64>,
    /// Viscosity coefficient.
    #[arg(long)]
    mu: Option<f64>,
    /// Field diffusion coefficient (with mu: the diag(mu, kappa) matrix).
    #[arg(long)]
    kappa: Option<f64>,
    /// Replace mu V_xx by the exotic flux mu (V_x / n)_x.
    #[arg(long)]
    exotic: Option<bool>,
}

#[derive(Args, Debug)]
struct CriterionArgs {
    #[command(flatten)]
    preset: PresetArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Point mode: velocity gradient v0 (with --e0; skips the preset).
    #[arg(long)]
    v0: Option<f64>,
    /// Point mode: field gradient e0.
    #[arg(long)]
    e0: Option<f64>,
    /// Point mode: second derivative e0' for the pressure criterion.
    #[arg(long)]
    e0p: Option<f64>,
    /// Pressure coefficient; alpha > 0 switches to the Delta_p criterion.
    #[arg(long)]
    alpha: Option<f64>,
    /// Pressure exponent for Delta_p.
    #[arg(long)]
    gamma_p: Option<f64>,
}

#[derive(Args, Debug)]
struct PhaseArgs {
    /// Friction values, comma separated.
    #[arg(long, value_delimiter = ',')]
    nu: Vec<f64>,
    /// Rays for the bisection boundary trace.
    #[arg(long)]
    rays: Option<usize>,
    /// Survival horizon for each boundary probe.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Args, Debug)]
struct CharArgs {
    #[arg(long)]
    x: Option<f64>,
    /// Initial solution values V, E on the characteristic.
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    e: Option<f64>,
    /// Initial gradients V_x, E_x (these decide blow-up).
    #[arg(long)]
    vx: Option<f64>,
    #[arg(long)]
    ex: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    preset: PresetArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    reg: RegArgs,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Advection scheme: upwind | central.
    #[arg(long)]
    scheme: Option<String>,
    /// Fourth-difference filter strength for the central scheme.
    #[arg(long)]
    filter: Option<f64>,
    /// Steps between stored snapshots.
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args, Debug)]
struct StochasticArgs {
    #[command(flatten)]
    preset: PresetArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    sigma: Option<f64>,
    /// Particle count.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Initial spatial density: uniform | gaussian.
    #[arg(long)]
    f0: Option<String>,
    /// Width of the gaussian initial density.
    #[arg(long)]
    f0_s: Option<f64>,
    /// Kernel bandwidth; omit for Silverman's rule.
    #[arg(long)]
    bandwidth: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite: all | theorem1 | friction | theorem3 | theorem4 | stochastic.
    #[arg(long)]
    suite: Option<String>,
}

/// Flat key/value config with `[section]` headers; `#` starts a comment.
#[derive(Debug, Default)]
struct KvConfig {
    map: BTreeMap<(String, String), String>,
}

impl KvConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
            })?;
            let mut section = "global".to_string();
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap().trim();
                if line.is_empty() {
                    continue;
                }
                if line.starts_with('[') && line.ends_with(']') {
                    section = line[1..line.len() - 1].trim().to_string();
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Error::InvalidConfig(format!(
                        "{}:{}: expected `key = value`",
                        path.display(),
                        lineno + 1
                    )));
                };
                map.insert((section.clone(), k.trim().to_string()), v.trim().to_string());
            }
        }
        Ok(Self { map })
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.map
            .get(&(section.to_string(), key.to_string()))
            .or_else(|| self.map.get(&("global".to_string(), key.to_string())))
            .map(String::as_str)
    }
}

/// Resolves each parameter as flag > config file > default and records the
/// resolved values for the config echo.
struct Resolver<'a> {
    cfg: &'a KvConfig,
    section: &'a str,
    echo: Vec<(String, String)>,
}

impl<'a> Resolver<'a> {
    fn new(cfg: &'a KvConfig, section: &'a str) -> Self {
        Self { cfg, section, echo: Vec::new() }
    }

    fn parse<T: FromStr>(&self, key: &str, s: &str) -> Result<T> {
        s.parse().map_err(|_| {
            Error::InvalidConfig(format!("bad value for `{key}`: {s:?}"))
        })
    }

    fn get<T: FromStr + Display + Clone>(
        &mut self,
        flag: &Option<T>,
        key: &str,
        default: T,
    ) -> Result<T> {
        let val = match flag {
            Some(v) => v.clone(),
            None => match self.cfg.get(self.section, key) {
                Some(s) => self.parse(key, s)?,
                None => default,
            },
        };
        self.echo.push((key.to_string(), val.to_string()));
        Ok(val)
    }

    fn get_opt<T: FromStr + Display + Clone>(
        &mut self,
        flag: &Option<T>,
        key: &str,
    ) -> Result<Option<T>> {
        let val = match flag {
            Some(v) => Some(v.clone()),
            None => match self.cfg.get(self.section, key) {
                Some(s) => Some(self.parse(key, s)?),
                None => None,
            },
        };
        if let Some(v) = &val {
            self.echo.push((key.to_string(), v.to_string()));
        }
        Ok(val)
    }

    /// Echo text for `config.txt`.
    fn echo_text(&self) -> String {
        let mut out = format!("[{}]\n", self.section);
        for (k, v) in &self.echo {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// Shortest round-trip float formatting; scientific notation outside a
/// moderate range (plain `Display` would expand 1e-300 to 300 digits).
fn csv_num(x: f64) -> String {
    if x == 0.0 || (x.abs() >= 1e-4 && x.abs() < 1e7) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn write_csv<I: IntoIterator<Item = String>>(path: &Path, header: &str, rows: I) -> Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    write_text(path, &text)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    write_text(path, &format!("{:#}\n", value))
}

fn build_grid(r: &mut Resolver, args: &GridArgs, default_cells: usize) -> Result<Grid1D> {
    let cells = r.get(&args.cells, "cells", default_cells)?;
    let x_min = r.get(&args.x_min, "x_min", DEFAULT_X_MIN)?;
    let x_max = r.get(&args.x_max, "x_max", DEFAULT_X_MAX)?;
    Grid1D::new(x_min, x_max, cells)
}

fn read_table(path: &Path) -> Result<Preset> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::InvalidConfig(format!("cannot read table {}: {e}", path.display()))
    })?;
    let (mut xs, mut v0, mut e0) = (Vec::new(), Vec::new(), Vec::new());
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with(|c: char| c.is_alphabetic() || c == '#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::InvalidConfig(format!("table row needs x,V0,E0: {line:?}")));
        }
        let mut vals = [0.0; 3];
        for (slot, col) in vals.iter_mut().zip(&cols) {
            *slot = col.parse().map_err(|_| {
                Error::InvalidConfig(format!("bad table number {col:?}"))
            })?;
        }
        xs.push(vals[0]);
        v0.push(vals[1]);
        e0.push(vals[2]);
    }
    Ok(Preset::CustomTable { xs, v0, e0 })
}

fn build_initial(r: &mut Resolver, args: &PresetArgs) -> Result<InitialData> {
    let name = r.get(&args.preset, "preset", "laser".to_string())?;
    let preset = match name.as_str() {
        "zero" => Preset::Zero,
        "laser" => Preset::LaserPulse {
            a: r.get(&args.a, "a", 0.05)?,
            sign: r.get(&args.sign, "sign", 1.0)?,
        },
        "gaussian" => Preset::GaussianE {
            a: r.get(&args.a, "a", 0.05)?,
            s: r.get(&args.s, "s", 1.0)?,
        },
        "table" => {
            let flag = args.table.as_ref().map(|p| p.display().to_string());
            let path = r
                .get_opt(&flag, "table")?
                .ok_or_else(|| Error::InvalidConfig("table preset needs --table FILE".into()))?;
            read_table(Path::new(&path))?
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset {other:?} (zero | laser | gaussian | table)"
            )))
        }
    };
    make_initial_data(preset)
}

fn build_reg(r: &mut Resolver, args: &RegArgs) -> Result<RegularizerSpec> {
    let mut reg = RegularizerSpec::none();
    reg.nu_const = r.get(&args.nu, "nu", 0.0)?;
    let nu0 = r.get(&args.nu0, "nu0", 0.0)?;
    if nu0 > 0.0 {
        let gamma = r.get(&args.gamma, "gamma", 1.0)?;
        reg = RegularizerSpec {
            nu_const: reg.nu_const,
            ..RegularizerSpec::density_friction(nu0, gamma)
        };
    }
    reg.alpha = r.get(&args.alpha, "alpha", 0.0)?;
    reg.gamma_p = r.get(&args.gamma_p, "gamma_p", 2.0)?;
    reg.mu = r.get(&args.mu, "mu", 0.0)?;
    reg.kappa = r.get(&args.kappa, "kappa", 0.0)?;
    reg.exotic_viscosity = r.get(&args.exotic, "exotic", false)?;
    reg.validate()?;
    Ok(reg)
}

/// Output directory with the echoed config written into it.
fn prepare_out_dir(cli_out: &Option<PathBuf>, cfg: &KvConfig, r: &Resolver) -> Result<PathBuf> {
    let dir = match cli_out {
        Some(d) => d.clone(),
        None => match cfg.get("global", "out") {
            Some(s) => PathBuf::from(s),
            None => PathBuf::from("out").join(r.section),
        },
    };
    fs::create_dir_all(&dir)?;
    write_text(&dir.join("config.txt"), &r.echo_text())?;
    Ok(dir)
}

fn cmd_criterion(cli: &Cli, args: &CriterionArgs, cfg: &KvConfig) -> Result<()> {
    let mut r = Resolver::new(cfg, "criterion");
    let alpha = r.get(&args.alpha, "alpha", 0.0)?;
    let gamma_p = r.get(&args.gamma_p, "gamma_p", 2.0)?;
    let v0 = r.get_opt(&args.v0, "v0")?;
    let e0 = r.get_opt(&args.e0, "e0")?;

    if let (Some(v0), Some(e0)) = (v0, e0) {
        // Point mode: one gradient pair, no table.
        let e0p = r.get(&args.e0p, "e0p", 0.0)?;
        let (lhs, rhs) = if alpha > 0.0 {
            delta_p(v0, e0, e0p, alpha, gamma_p)?
        } else {
            (delta(v0, e0), 0.0)
        };
        let dir = prepare_out_dir(&cli.out, cfg, &r)?;
        let verdict = if lhs >= rhs { "blow-up" } else { "smooth" };
        write_json(
            &dir.join("report.json"),
            &json!({
                "mode": "point", "v0": v0, "e0": e0, "lhs": lhs, "rhs": rhs,
                "delta": lhs - rhs, "verdict": verdict,
                "marginal": (lhs - rhs).abs() < CRITERION_BAND,
            }),
        )?;
        println!("Delta = {} ({verdict})", lhs - rhs);
        return Ok(());
    }
    if v0.is_some() != e0.is_some() {
        return Err(Error::InvalidConfig("point mode needs both --v0 and --e0".into()));
    }

    let init = build_initial(&mut r, &args.preset)?;
    let grid = build_grid(&mut r, &args.grid, 1024)?;
    let dir = prepare_out_dir(&cli.out, cfg, &r)?;

    let mut rows = Vec::with_capacity(grid.n_cells);
    let mut max_excess = f64::NEG_INFINITY;
    let mut argmax_x = 0.0;
    for x in grid.xs() {
        let (v0, e0) = (init.velocity_x(x), init.field_x(x));
        let (lhs, rhs) = if alpha > 0.0 {
            delta_p(v0, e0, init.field_xx(x), alpha, gamma_p)?
        } else {
            (delta(v0, e0), 0.0)
        };
        if lhs - rhs > max_excess {
            max_excess = lhs - rhs;
            argmax_x = x;
        }
        rows.push(format!(
            "{},{},{},{},{}",
            csv_num(x),
            csv_num(lhs),
            csv_num(rhs),
            lhs >= rhs,
            (lhs - rhs).abs() < CRITERION_BAND
        ));
    }
    write_csv(&dir.join("criterion.csv"), "x,lhs,rhs,predicts_blowup,marginal", rows)?;
    let verdict = if max_excess >= 0.0 { "blow-up" } else { "smooth" };
    write_json(
        &dir.join("report.json"),
        &json!({
            "mode": "table", "verdict": verdict, "max_excess": max_excess,
            "argmax_x": argmax_x, "marginal": max_excess.abs() < CRITERION_BAND,
        }),
    )?;
    println!("verdict: {verdict} (max excess {max_excess:.6} at x = {argmax_x:.4})");
    Ok(())
}

fn cmd_phase(cli: &Cli, args: &PhaseArgs, cfg: &KvConfig) -> Result<()> {
    let mut r = Resolver::new(cfg, "phase");
    let nus: Vec<f64> = if args.nu.is_empty() {
        match cfg.get("phase", "nu") {
            Some(s) => s
                .split(',')
                .map(|p| r.parse("nu", p.trim()))
                .collect::<Result<_>>()?,
            None => vec![0.0],
        }
    } else {
        args.nu.clone()
    };
    for &nu in &nus {
        if !(nu >= 0.0) {
            return Err(Error::InvalidConfig(format!("nu must be >= 0, got {nu}")));
        }
    }
    r.echo.push((
        "nu".into(),
        nus.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    ));
    let mut opts = SeparatrixOptions::default();
    opts.n_rays = r.get(&args.rays, "rays", opts.n_rays)?;
    opts.horizon = r.get(&args.horizon, "horizon", opts.horizon)?;
    let dir = prepare_out_dir(&cli.out, cfg, &r)?;

    let mut eq_rows = Vec::new();
    let mut boundary_rows = Vec::new();
    for &nu in &nus {
        for eq in classify_equilibria(nu) {
            let (e, v) = eq.location;
            let [(re1, im1), (re2, im2)] = eq.eigenvalues;
            eq_rows.push(format!(
                "{nu},{},{},{:?},{},{},{},{}",
                csv_num(e),
                csv_num(v),
                eq.kind,
                csv_num(re1),
                csv_num(im1),
                csv_num(re2),
                csv_num(im2)
            ));
        }
        for (e, v) in trace_separatrix(nu, &opts)? {
            boundary_rows.push(format!("{nu},{},{}", csv_num(e), csv_num(v)));
        }
    }
    write_csv(&dir.join("equilibria.csv"), "nu,e,v,kind,re1,im1,re2,im2", eq_rows)?;
    write_csv(&dir.join("boundary.csv"), "nu,e,v", boundary_rows)?;
    println!("phase portrait written for nu = {nus:?}");
    Ok(())
}

fn cmd_characteristics(cli: &Cli, args: &CharArgs, cfg: &KvConfig) -> Result<()> {
    let mut r = Resolver::new(cfg, "characteristics");
    let x = r.get(&args.x, "x", 0.0)?;
    let v = r.get(&args.v, "v", 0.0)?;
    let e = r.get(&args.e, "e", 0.0)?;
    let vx = r.get(&args.vx, "vx", 0.0)?;
    let ex = r.get(&args.ex, "ex", 0.0)?;
    let nu = r.get(&args.nu, "nu", 0.0)?;
    let t_end = r.get(&args.t_end, "t_end", 50.0)?;
    if !(nu >= 0.0) {
        return Err(Error::InvalidConfig(format!("nu must be >= 0, got {nu}")));
    }
    let dir = prepare_out_dir(&cli.out, cfg, &r)?;

    let kind = if nu > 0.0 { CharSystemKind::Friction { nu } } else { CharSystemKind::Original };
    let init = CharState::new(x, v, e, vx, ex);
    let (states, report) =
        integrate_characteristic(kind, init, t_end, &IntegrateOptions::default())?;
    write_csv(
        &dir.join("trajectory.csv"),
        "t,x,V,E,V_x,E_x",
        states
            .iter()
            .map(|s| {
                format!(
                    "{},{},{},{},{},{}",
                    csv_num(s.t),
                    csv_num(s.x),
                    csv_num(s.v),
                    csv_num(s.e),
                    csv_num(s.v_x),
                    csv_num(s.e_x)
                )
            }),
    )?;
    write_json(
        &dir.join("report.json"),
        &json!({
            "delta": delta(vx, ex),
            "blew_up": report.blew_up,
            "t_star": report.t_star,
            "witness": report.witness.map(|w| format!("{w:?}")),
        }),
    )?;
    match report.t_star {
        Some(t) => println!("blow-up at t = {t:.4}"),
        None => println!("smooth to t = {t_end}"),
    }
    Ok(())
}

fn build_solver_config(r: &mut Resolver, args: &SolveArgs) -> Result<(InitialData, SolverConfig)> {
    let init = build_initial(r, &args.preset)?;
    let grid = build_grid(r, &args.grid, 1024)?;
    let reg = build_reg(r, &args.reg)?;
    let mut cfg = SolverConfig::new(grid, r.get(&args.t_end, "t_end", 50.0)?, reg);
    cfg.cfl = r.get(&args.cfl, "cfl", cfg.cfl)?;
    cfg.output_stride = r.get(&args.stride, "stride", cfg.output_stride)?;
    let scheme = r.get(&args.scheme, "scheme", "upwind".to_string())?;
    cfg.scheme = match scheme.as_str() {
        "upwind" => AdvectionScheme::Upwind,
        "central" => AdvectionScheme::Central { filter: r.get(&args.filter, "filter", 0.0)? },
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown scheme {other:?} (upwind | central)"
            )))
        }
    };
    cfg.validate()?;
    Ok((init, cfg))
}

fn cmd_solve(cli: &Cli, args: &SolveArgs, cfg: &KvConfig) -> Result<()> {
    let mut r = Resolver::new(cfg, "solve");
    let (init, solver_cfg) = build_solver_config(&mut r, args)?;
    let dir = prepare_out_dir(&cli.out, cfg, &r)?;

    let run = solve(&init, &solver_cfg)?;
    let xs = solver_cfg.grid.xs();
    let mut snap_rows = Vec::new();
    for state in &run.states {
        for (i, &x) in xs.iter().enumerate() {
            snap_rows.push(format!(
                "{},{},{},{},{}",
                csv_num(state.t),
                csv_num(x),
                csv_num(state.v[i]),
                csv_num(state.e[i]),
                csv_num(state.n[i])
            ));
        }
    }
    write_csv(&dir.join("snapshots.csv"), "t,x,V,E,n", snap_rows)?;
    write_csv(
        &dir.join("series.csv"),
        "t,max_vx,max_nx,max_ex,min_n,max_n",
        run.series.iter().map(|p| {
            format!(
                "{},{},{},{},{},{}",
                csv_num(p.t),
                csv_num(p.max_vx),
                csv_num(p.max_nx),
                csv_num(p.max_ex),
                csv_num(p.min_n),
                csv_num(p.max_n)
            )
        }),
    )?;
    write_json(
        &dir.join("report.json"),
        &json!({
            "blew_up": run.report.blew_up,
            "t_star": run.report.t_star,
            "witness": run.report.witness,
            "snapshots": run.states.len(),
        }),
    )?;
    match run.report.t_star {
        Some(t) => println!("blow-up at t = {t:.4} ({})", run.report.witness.as_deref().unwrap_or("?")),
        None => println!("smooth to t = {} ({} snapshots)", solver_cfg.t_end, run.states.len()),
    }
    Ok(())
}

fn cmd_stochastic(cli: &Cli, args: &StochasticArgs, cfg: &KvConfig) -> Result<()> {
    let mut r = Resolver::new(cfg, "stochastic");
    let init = build_initial(&mut r, &args.preset)?;
    let grid = build_grid(&mut r, &args.grid, 512)?;
    let sigma = r.get(&args.sigma, "sigma", 0.1)?;
    let n = r.get(&args.n, "n", 100_000)?;
    let seed = r.get(&args.seed, "seed", 0)?;
    let t_end = r.get(&args.t_end, "t_end", std::f64::consts::PI)?;
    let dt = r.get(&args.dt, "dt", 1e-2)?;
    let f0_name = r.get(&args.f0, "f0", "uniform".to_string())?;
    let f0 = match f0_name.as_str() {
        "uniform" => SpatialDensity::uniform(grid.x_min, grid.x_max)?,
        "gaussian" => {
            let s = r.get(&args.f0_s, "f0_s", 1.0)?;
            SpatialDensity::gaussian(0.0, s, grid.x_max)?
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown density {other:?} (uniform | gaussian)"
            )))
        }
    };
    let bandwidth = r.get_opt(&args.bandwidth, "bandwidth")?;
    let dir = prepare_out_dir(&cli.out, cfg, &r)?;

    let mut ens = init_ensemble(&init, &f0, n, sigma, seed)?;
    run_ensemble(&mut ens, t_end, dt)?;
    let moments = estimate_moments(&ens, &grid, bandwidth)?;
    write_csv(
        &dir.join("moments.csv"),
        "t,x,rho,Vhat,Ehat",
        grid.xs().iter().enumerate().map(|(i, &x)| {
            format!(
                "{},{},{},{},{}",
                csv_num(moments.t),
                csv_num(x),
                csv_num(moments.rho[i]),
                csv_num(moments.vhat[i]),
                csv_num(moments.ehat[i])
            )
        }),
    )?;
    write_checkpoint(&ens, &dir.join("checkpoint.bin"))?;
    write_json(
        &dir.join("report.json"),
        &json!({
            "t": ens.t, "particles": ens.len(), "bandwidth": moments.bandwidth,
            "rho_integral": moments.rho_integral(),
        }),
    )?;
    println!(
        "ensemble at t = {:.4}: integral rho = {:.6}, bandwidth {:.4}",
        ens.t,
        moments.rho_integral(),
        moments.bandwidth
    );
    Ok(())
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs, cfg: &KvConfig) -> Result<()> {
    let mut r = Resolver::new(cfg, "verify");
    let suite = r.get(&args.suite, "suite", "all".to_string())?;
    let ids = acceptance::suite_ids(&suite).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "unknown suite {suite:?} (all | theorem1 | friction | theorem3 | theorem4 | stochastic)"
        ))
    })?;
    let outcomes: Vec<_> = ids.iter().map(|&id| acceptance::run_criterion(id)).collect();
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)?;
        write_text(&dir.join("config.txt"), &r.echo_text())?;
        write_json(
            &dir.join("report.json"),
            &json!({
                "suite": suite,
                "criteria": outcomes.iter().map(|o| json!({
                    "id": o.id, "name": o.name, "passed": o.passed, "details": o.details,
                })).collect::<Vec<_>>(),
                "failed": failed,
            }),
        )?;
    }
    if failed > 0 {
        return Err(Error::Inconclusive(format!(
            "{failed} of {} criteria failed",
            outcomes.len()
        )));
    }
    println!("all {} criteria passed", outcomes.len());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    let cfg = KvConfig::load(cli.config.as_deref())?;
    if let Some(t) = cli.threads {
        // Ignore the error from setting the pool twice (tests call in-process).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.cmd {
        Cmd::Criterion(args) => cmd_criterion(cli, args, &cfg),
        Cmd::Phase(args) => cmd_phase(cli, args, &cfg),
        Cmd::Characteristics(args) => cmd_characteristics(cli, args, &cfg),
        Cmd::Solve(args) => cmd_solve(cli, args, &cfg),
        Cmd::Stochastic(args) => cmd_stochastic(cli, args, &cfg),
        Cmd::Verify(args) => cmd_verify(cli, args, &cfg),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::InvalidGrid(_)
        | Error::InvalidInitialData(_)
        | Error::InvalidDensity { .. } => 2,
        _ => 1,
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_config_sections_and_fallback() {
        let dir = std::env::temp_dir().join("coldplasma_cli_kv");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.txt");
        fs::write(&path, "seed = 9\n[solve]\nt_end = 12.5 # comment\n").unwrap();
        let cfg = KvConfig::load(Some(&path)).unwrap();
        assert_eq!(cfg.get("solve", "t_end"), Some("12.5"));
        assert_eq!(cfg.get("solve", "seed"), Some("9"));
        assert_eq!(cfg.get("solve", "missing"), None);
    }

    #[test]
    fn resolver_precedence() {
        let mut map = BTreeMap::new();
        map.insert(("solve".to_string(), "cfl".to_string()), "0.3".to_string());
        let cfg = KvConfig { map };
        let mut r = Resolver::new(&cfg, "solve");
        assert_eq!(r.get(&Some(0.2), "cfl", 0.4).unwrap(), 0.2);
        assert_eq!(r.get(&None, "cfl", 0.4).unwrap(), 0.3);
        assert_eq!(r.get::<f64>(&None, "other", 0.4).unwrap(), 0.4);
        assert!(r.echo_text().contains("cfl = 0.2"));
    }

    #[test]
    fn bad_config_value_rejected() {
        let mut map = BTreeMap::new();
        map.insert(("solve".to_string(), "cfl".to_string()), "fast".to_string());
        let cfg = KvConfig { map };
        let mut r = Resolver::new(&cfg, "solve");
        assert!(matches!(r.get(&None, "cfl", 0.4), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn cli_parses_subcommands() {
        let cli = Cli::parse_from(["coldplasma", "criterion", "--preset", "laser", "--a", "0.05"]);
        assert!(matches!(cli.cmd, Cmd::Criterion(_)));
        let cli = Cli::parse_from(["coldplasma", "verify", "--suite", "theorem1"]);
        assert!(matches!(cli.cmd, Cmd::Verify(_)));
    }
}
