//! Command-line frontend: sweeps written as CSV (or a JSON mirror).
//!
//! Every CSV starts with a `#` comment line holding the full run
//! configuration as JSON, followed by a header row. Files are written to a
//! temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics;
use crate::error::{HkError, Result};
use crate::model::{exact_energy, ModelParams};
use crate::propagator::{radial_kernel, Method, RadialKernel};
use crate::quadrature::{choose_working_digits, PrecisionConfig};
use crate::spectral;
use crate::wigner::{self, GridSpec, WignerMethod};

/// Environment variable overriding the working-precision policy.
pub const DIGITS_ENV: &str = "HKBOSE_DIGITS";

#[derive(Debug, Parser)]
#[command(name = "hkbose", version, about = "Herman-Kluk propagator for the single-site Bose-Hubbard model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Gn,
    Norm,
    Phase,
    Spectrum,
    FgaCompare,
    Wigner,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Complex radial kernel g_n(tau) for the chosen method.
    Gn(CommonArgs),
    /// |g_n(tau)|^2 curves.
    Norm(CommonArgs),
    /// Unwrapped phase and residual curves, plus fitted residual slopes.
    Phase(CommonArgs),
    /// Exact and semiclassical spectra side by side.
    Spectrum(CommonArgs),
    /// |g_n|^2 of Herman-Kluk and frozen Gaussians against closed forms.
    FgaCompare(CommonArgs),
    /// Wigner field on a lattice for exact, Herman-Kluk and truncated Wigner dynamics.
    Wigner(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Occupations, comma separated.
    #[arg(long = "n", value_delimiter = ',', default_value = "0,1,2,3,4,5")]
    pub n: Vec<u32>,
    /// Largest tau = U t on the grid.
    #[arg(long, default_value_t = 5.0)]
    pub tau_max: f64,
    /// Grid intervals on [0, tau_max].
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Interaction U.
    #[arg(long = "U", default_value_t = 0.05)]
    pub interaction: f64,
    /// Initial coherent label, e.g. "2", "1.5-0.5j".
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    pub zi: String,
    /// Evolution time for the Wigner field.
    #[arg(long, default_value_t = 10.0 * std::f64::consts::PI)]
    pub t: f64,
    /// Working decimal digits; overrides the environment and the policy.
    #[arg(long)]
    pub digits: Option<u32>,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_subdiv: usize,
    /// Propagator method (gn, phase); comma-separated field list for wigner.
    #[arg(long)]
    pub method: Option<String>,
    /// Analysis window in tau~ = n tau, as "lo,hi".
    #[arg(long, default_value = "1,5", allow_hyphen_values = true)]
    pub window: String,
    /// Wigner lattice as "re_min,re_max,im_min,im_max,step".
    #[arg(long, default_value = "-4,4,-4,4,0.05", allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

/// Fully resolved configuration of one run, recorded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: ModelParams,
    /// Precision at the largest requested occupation.
    pub precision: PrecisionConfig,
    /// Where the working precision came from: flag, environment or policy.
    pub digits_source: &'static str,
    pub n_list: Vec<u32>,
    pub tau_max: f64,
    pub steps: usize,
    pub method: String,
    pub window_tilde: (f64, f64),
    pub grid: GridSpec,
    pub z_i: (f64, f64),
    pub t: f64,
    pub seed: u64,
    pub output_path: PathBuf,
    pub format: OutputFormat,
    #[serde(skip)]
    fixed_digits: Option<u32>,
}

impl RunConfig {
    pub fn from_args(command: CommandKind, args: &CommonArgs, env_digits: Option<String>) -> Result<Self> {
        let model = ModelParams::new(args.omega, args.interaction)?;
        if args.n.is_empty() && command != CommandKind::Wigner {
            return Err(HkError::config("n", "list must not be empty"));
        }
        if !(args.tau_max >= 0.0 && args.tau_max.is_finite()) {
            return Err(HkError::config("tau_max", format!("{} must be a non-negative number", args.tau_max)));
        }
        if args.steps == 0 {
            return Err(HkError::config("steps", "must be positive"));
        }
        if !args.t.is_finite() {
            return Err(HkError::config("t", "must be finite"));
        }
        let env_digits = match env_digits {
            Some(text) => Some(
                text.trim()
                    .parse::<u32>()
                    .map_err(|_| HkError::config("HKBOSE_DIGITS", format!("`{text}` is not a positive integer")))?,
            ),
            None => None,
        };
        let (fixed_digits, digits_source) = match (args.digits, env_digits) {
            (Some(d), _) => (Some(d), "flag"),
            (None, Some(d)) => (Some(d), "environment"),
            (None, None) => (None, "policy"),
        };
        let window_tilde = parse_pair(&args.window, "window")?;
        let grid = parse_grid(&args.grid)?;
        let z = parse_complex(&args.zi)?;
        let method = match (command, &args.method) {
            (CommandKind::Wigner, None) => "exact,hk,twa".to_string(),
            (_, None) => "hk".to_string(),
            (_, Some(m)) => m.clone(),
        };

        let mut run = RunConfig {
            command,
            model,
            precision: PrecisionConfig::default(),
            digits_source,
            n_list: args.n.clone(),
            tau_max: args.tau_max,
            steps: args.steps,
            method,
            window_tilde,
            grid,
            z_i: (z.re, z.im),
            t: args.t,
            seed: args.seed,
            output_path: args.out.clone(),
            format: args.format,
            fixed_digits,
        };
        let base = PrecisionConfig { rel_tol: args.rel_tol, abs_tol: args.rel_tol * 1e-3, max_subdivisions: args.max_subdiv, ..PrecisionConfig::default() };
        run.precision = base;
        let n_max = run.n_list.iter().copied().max().unwrap_or(0);
        run.precision = run.precision_for(n_max);
        run.precision.validate()?;
        // validate method text early so errors map to exit code 2
        match command {
            CommandKind::Wigner => {
                parse_wigner_methods(&run.method)?;
            }
            _ => {
                run.method.parse::<Method>()?;
            }
        }
        Ok(run)
    }

    /// Precision for occupation `n`: fixed digits if given, else the policy.
    pub fn precision_for(&self, n: u32) -> PrecisionConfig {
        let target = (-self.precision.rel_tol.log10()).ceil().max(0.0) as u32;
        let working_digits = self.fixed_digits.unwrap_or_else(|| choose_working_digits(n, self.tau_max, target));
        PrecisionConfig { working_digits, ..self.precision }
    }

    pub fn z_i(&self) -> Complex64 {
        Complex64::new(self.z_i.0, self.z_i.1)
    }

    fn tau_grid(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.tau_max * k as f64 / self.steps as f64).collect()
    }
}

/// Columnar output; `None` renders as an empty CSV field or JSON null.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self, header: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {header}");
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub rows: usize,
}

/// Maps an error to the process exit status.
pub fn exit_code(err: &HkError) -> i32 {
    match err {
        HkError::InvalidConfig { .. } => 2,
        HkError::NonConvergence { .. } => 3,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> Result<RunSummary> {
    let (kind, args) = match &cli.command {
        Command::Gn(a) => (CommandKind::Gn, a),
        Command::Norm(a) => (CommandKind::Norm, a),
        Command::Phase(a) => (CommandKind::Phase, a),
        Command::Spectrum(a) => (CommandKind::Spectrum, a),
        Command::FgaCompare(a) => (CommandKind::FgaCompare, a),
        Command::Wigner(a) => (CommandKind::Wigner, a),
    };
    let config = RunConfig::from_args(kind, args, std::env::var(DIGITS_ENV).ok())?;
    execute(&config)
}

/// Runs a resolved configuration and writes its artifacts.
pub fn execute(config: &RunConfig) -> Result<RunSummary> {
    let header = serde_json::to_string(config).map_err(|e| HkError::config("config", e.to_string()))?;
    let mut files = Vec::new();
    let main = match config.command {
        CommandKind::Gn => gn_table(config)?,
        CommandKind::Norm => norm_table(config)?,
        CommandKind::Spectrum => spectrum_table(config),
        CommandKind::FgaCompare => fga_table(config)?,
        CommandKind::Wigner => wigner_table(config)?,
        CommandKind::Phase => {
            let (curves, slopes) = phase_tables(config)?;
            match config.format {
                OutputFormat::Csv => {
                    let side = sidecar_path(&config.output_path, "slopes");
                    write_atomic(&side, &slopes.to_csv(&header))?;
                    files.push(side);
                }
                OutputFormat::Json => {
                    let doc = serde_json::json!({ "config": config, "columns": curves.columns, "rows": curves.rows,
                        "slopes": { "columns": slopes.columns, "rows": slopes.rows } });
                    write_atomic(&config.output_path, &doc.to_string())?;
                    files.push(config.output_path.clone());
                    return Ok(RunSummary { files, rows: curves.rows.len() });
                }
            }
            curves
        }
    };
    let text = match config.format {
        OutputFormat::Csv => main.to_csv(&header),
        OutputFormat::Json => serde_json::json!({ "config": config, "columns": main.columns, "rows": main.rows }).to_string(),
    };
    write_atomic(&config.output_path, &text)?;
    files.insert(0, config.output_path.clone());
    Ok(RunSummary { files, rows: main.rows.len() })
}

fn progress(msg: &str) {
    eprintln!("hkbose: {msg}");
}

fn kernel_for(method: Method) -> Option<RadialKernel> {
    method.kernel()
}

fn gn_table(config: &RunConfig) -> Result<Table> {
    let method: Method = config.method.parse()?;
    let mut table = Table::new(vec!["n", "tau", "re", "im", "modulus_sq", "error_estimate"]);
    for &n in &config.n_list {
        progress(&format!("g_n for n = {n} ({method})"));
        let precision = config.precision_for(n);
        let values: Vec<(f64, Complex64, f64)> = config
            .tau_grid()
            .par_iter()
            .map(|&tau| match kernel_for(method) {
                None => Ok((tau, Complex64::from_polar(1.0, -spectral::exact_phase(n, tau)), 0.0)),
                Some(kernel) => radial_kernel(kernel, n, tau, &precision).map(|r| (tau, r.value, r.error_estimate)),
            })
            .collect::<Result<_>>()?;
        for (tau, g, err) in values {
            table.push(vec![Some(f64::from(n)), Some(tau), Some(g.re), Some(g.im), Some(g.norm_sqr()), Some(err)]);
        }
    }
    Ok(table)
}

fn norm_table(config: &RunConfig) -> Result<Table> {
    let mut table = Table::new(vec!["n", "tau", "modulus_sq"]);
    for &n in &config.n_list {
        progress(&format!("norm curve for n = {n}"));
        let precision = config.precision_for(n);
        let values: Vec<(f64, f64)> = config
            .tau_grid()
            .par_iter()
            .map(|&tau| radial_kernel(RadialKernel::Hk, n, tau, &precision).map(|r| (tau, r.value.norm_sqr())))
            .collect::<Result<_>>()?;
        for (tau, m) in values {
            table.push(vec![Some(f64::from(n)), Some(tau), Some(m)]);
        }
    }
    Ok(table)
}

fn phase_tables(config: &RunConfig) -> Result<(Table, Table)> {
    let method: Method = config.method.parse()?;
    let kernel = kernel_for(method).ok_or_else(|| HkError::config("method", "phase curves need a semiclassical method"))?;
    let mut curves = Table::new(vec!["n", "tau", "phi", "delta_phi", "modulus_sq"]);
    let mut slopes = Table::new(vec!["n", "window_lo", "window_hi", "slope", "stderr", "samples"]);
    for &n in &config.n_list {
        progress(&format!("phase curve for n = {n} ({method})"));
        let curve = spectral::build_kernel_curve(kernel, n, config.tau_max, config.steps, &config.precision_for(n))?;
        for k in 0..curve.tau_grid.len() {
            curves.push(vec![
                Some(f64::from(n)),
                Some(curve.tau_grid[k]),
                Some(curve.phase[k]),
                Some(curve.delta_phi[k]),
                Some(curve.modulus_sq[k]),
            ]);
        }
        let window = spectral::scaled_window(n, config.window_tilde);
        match spectral::fit_delta_phi_slope(&curve, window) {
            Ok(fit) => {
                progress(&format!("n = {n}: delta_phi slope {:.5} +- {:.5}", fit.slope, fit.stderr));
                slopes.push(vec![
                    Some(f64::from(n)),
                    Some(window.0),
                    Some(window.1),
                    Some(fit.slope),
                    Some(fit.stderr),
                    Some(fit.samples as f64),
                ]);
            }
            Err(HkError::InsufficientData { found, .. }) => {
                progress(&format!("n = {n}: only {found} samples in the fit window, slope skipped"));
                slopes.push(vec![Some(f64::from(n)), Some(window.0), Some(window.1), None, None, Some(found as f64)]);
            }
            Err(e) => return Err(e),
        }
    }
    Ok((curves, slopes))
}

fn spectrum_table(config: &RunConfig) -> Table {
    let p = &config.model;
    let mut table = Table::new(vec!["n", "e_exact", "e_hk_lo", "e_hk_no_theta", "e_fga_rate", "nnlo_offset"]);
    for &n in &config.n_list {
        let nf = f64::from(n);
        // phase rate of the closed frozen-Gaussian form
        let fga_rate = (nf - 0.5) * p.omega_e + 0.5 * p.interaction * nf * (nf - 2.0);
        table.push(vec![
            Some(nf),
            Some(exact_energy(p, n)),
            Some(asymptotics::hk_spectrum_lo(p, n)),
            Some(asymptotics::hk_spectrum_no_theta(p, n)),
            Some(fga_rate),
            Some(0.125 * p.interaction),
        ]);
    }
    table
}

fn fga_table(config: &RunConfig) -> Result<Table> {
    let mut table = Table::new(vec!["n", "tau", "hk_modulus_sq", "fga_modulus_sq", "analytic_modulus_sq", "closed_form_modulus_sq"]);
    let keep_theta = !matches!(config.method.parse::<Method>()?, Method::Fga { keep_theta: false });
    for &n in &config.n_list {
        progress(&format!("frozen-Gaussian comparison for n = {n}"));
        let precision = config.precision_for(n);
        let values: Vec<(f64, f64, f64)> = config
            .tau_grid()
            .par_iter()
            .map(|&tau| {
                let hk = radial_kernel(RadialKernel::Hk, n, tau, &precision)?;
                let fga = radial_kernel(RadialKernel::Fga { keep_theta }, n, tau, &precision)?;
                Ok((tau, hk.value.norm_sqr(), fga.value.norm_sqr()))
            })
            .collect::<Result<_>>()?;
        for (tau, hk, fga) in values {
            let x = f64::from(n) * tau;
            table.push(vec![
                Some(f64::from(n)),
                Some(tau),
                Some(hk),
                Some(fga),
                Some(1.0 / (1.0 + x * x)),
                Some(1.0 / (1.0 + x * x).sqrt()),
            ]);
        }
    }
    Ok(table)
}

fn wigner_table(config: &RunConfig) -> Result<Table> {
    let methods = parse_wigner_methods(&config.method)?;
    progress(&format!("Wigner field at t = {} for {}", config.t, config.method));
    let field = wigner::render_field(config.z_i(), &config.model, config.t, &config.grid, &methods, None, &config.precision)?;
    for m in &methods {
        if let Some(norm) = field.normalization(*m) {
            progress(&format!("{} field normalization {norm:.6}", m.label()));
        }
    }
    let mut table = Table::new(vec!["re_alpha", "im_alpha", "w_exact", "w_hk", "w_twa"]);
    for k in 0..field.len() {
        let a = field.alpha_at(k);
        let pick = |v: &Option<Vec<f64>>| v.as_ref().map(|v| v[k]);
        table.push(vec![Some(a.re), Some(a.im), pick(&field.exact), pick(&field.hk), pick(&field.twa)]);
    }
    Ok(table)
}

fn parse_wigner_methods(text: &str) -> Result<Vec<WignerMethod>> {
    let methods: Vec<WignerMethod> = text.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(HkError::config("method", "no Wigner method given"));
    }
    Ok(methods)
}

/// Parses complex text such as `2`, `-1.5j`, `0.3+2j`, `1e-3-4e-1i`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || HkError::config("zi", format!("`{text}` is not a complex number like 2+1j"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['j', 'i']) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not an exponent sign or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let parse_im = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, parse_im(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, parse_im(body)?)),
    }
}

fn parse_numbers(text: &str, field: &'static str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| HkError::config(field, format!("`{t}` is not a number"))))
        .collect()
}

fn parse_pair(text: &str, field: &'static str) -> Result<(f64, f64)> {
    match parse_numbers(text, field)?.as_slice() {
        [lo, hi] if lo <= hi => Ok((*lo, *hi)),
        _ => Err(HkError::config(field, format!("`{text}` must be two ascending numbers \"lo,hi\""))),
    }
}

fn parse_grid(text: &str) -> Result<GridSpec> {
    match parse_numbers(text, "grid")?.as_slice() {
        &[re_min, re_max, im_min, im_max, step] => {
            let grid = GridSpec { re_min, re_max, im_min, im_max, step };
            grid.validate()?;
            Ok(grid)
        }
        _ => Err(HkError::config("grid", format!("`{text}` must be \"re_min,re_max,im_min,im_max,step\""))),
    }
}

fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}{ext}"))
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| HkError::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(out: &Path) -> CommonArgs {
        CommonArgs {
            n: vec![1, 2],
            tau_max: 1.0,
            steps: 4,
            omega: 1.0,
            interaction: 0.05,
            zi: "2".into(),
            t: 1.0,
            digits: None,
            rel_tol: 1e-8,
            max_subdiv: 20_000,
            method: None,
            window: "1,5".into(),
            grid: "-1,1,-1,1,0.5".into(),
            seed: 0,
            out: out.to_path_buf(),
            format: OutputFormat::Csv,
        }
    }

    #[test]
    fn complex_parsing() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(parse_complex("2+1j").unwrap(), c(2.0, 1.0));
        assert_eq!(parse_complex("1.5-0.5j").unwrap(), c(1.5, -0.5));
        assert_eq!(parse_complex("-1.5j").unwrap(), c(0.0, -1.5));
        assert_eq!(parse_complex("j").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("1e-3-4e-1i").unwrap(), c(1e-3, -0.4));
        assert_eq!(parse_complex(" -2 + 3j ").unwrap(), c(-2.0, 3.0));
        assert!(parse_complex("two").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn digits_precedence() {
        let out = PathBuf::from("x.csv");
        let mut a = args(&out);
        let policy = RunConfig::from_args(CommandKind::Norm, &a, None).unwrap();
        assert_eq!(policy.digits_source, "policy");
        assert_eq!(policy.precision.working_digits, choose_working_digits(2, 1.0, 8));
        let env = RunConfig::from_args(CommandKind::Norm, &a, Some("50".into())).unwrap();
        assert_eq!((env.precision.working_digits, env.digits_source), (50, "environment"));
        a.digits = Some(40);
        let flag = RunConfig::from_args(CommandKind::Norm, &a, Some("50".into())).unwrap();
        assert_eq!((flag.precision.working_digits, flag.digits_source), (40, "flag"));
        assert!(RunConfig::from_args(CommandKind::Norm, &args(&out), Some("many".into())).is_err());
    }

    #[test]
    fn bad_inputs_are_config_errors() {
        let out = PathBuf::from("x.csv");
        let mut a = args(&out);
        a.window = "5,1".into();
        let err = RunConfig::from_args(CommandKind::Phase, &a, None).unwrap_err();
        assert_eq!(exit_code(&err), 2);
        let mut b = args(&out);
        b.method = Some("wkb".into());
        assert_eq!(exit_code(&RunConfig::from_args(CommandKind::Gn, &b, None).unwrap_err()), 2);
        let mut c = args(&out);
        c.digits = Some(10);
        assert_eq!(exit_code(&RunConfig::from_args(CommandKind::Gn, &c, None).unwrap_err()), 2);
        let nc = HkError::NonConvergence { value: Complex64::new(0.0, 0.0), error_estimate: 1.0, subdivisions: 1 };
        assert_eq!(exit_code(&nc), 3);
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar_path(Path::new("/tmp/phase.csv"), "slopes"), PathBuf::from("/tmp/phase_slopes.csv"));
        assert_eq!(sidecar_path(Path::new("phase"), "slopes"), PathBuf::from("phase_slopes"));
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
