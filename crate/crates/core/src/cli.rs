//! Command-line front end.
//!
//! Every command produces one [`OutputRecord`]. Reals are rendered as decimal
//! strings with 17 significant digits so records round-trip exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::convolution::Convolver;
use crate::error::{Error, Result};
use crate::estimators::{DsaParams, EstimateResult, Estimator, ScaledParams};
use crate::harness::{reports_to_json, ComparisonReport, Harness, HarnessConfig};
use crate::oracle::{self, SieveTables, DEFAULT_SIEVE_CEILING};
use crate::quad::QuadratureSpec;
use crate::render::real;
use crate::special::{PiecewiseFunction, SpecialFunctions, TableConfig};
use crate::validate::{self, Suite};
use crate::{exec, VERSION};

#[derive(Debug, Parser)]
#[command(name = "smoothdiv", version, about = "Integers with a large smooth divisor: estimates and exact counts")]
pub struct Cli {
    /// Worker threads for parallel loops (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// TOML configuration file.
    #[arg(long, global = true, env = "SMOOTHDIV_CONFIG")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Largest sieve the exact oracles may build.
    #[arg(long, global = true)]
    pub limit: Option<u64>,

    /// Exponent slack in the y >= exp((log log x)^(5/3+eps)) domain check.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate rho, omega or their derivatives.
    Special {
        #[arg(long = "fn", value_enum)]
        function: SpecialFn,
        #[arg(long, allow_negative_numbers = true)]
        u: f64,
    },
    /// Asymptotic estimate with its error envelope.
    Estimate {
        #[arg(value_enum)]
        kind: EstimateKind,
        #[command(flatten)]
        xyz: Xyz,
    },
    /// Exact count from the sieve.
    Exact {
        #[arg(value_enum)]
        kind: ExactKind,
        #[command(flatten)]
        xyz: Xyz,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Compare exact Theta with its estimate over a grid.
    Compare(CompareArgs),
    /// Probability that a random k-bit integer has a 2^l-smooth divisor above 2^m.
    DsaRisk {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        m: u32,
        /// Also draw this many Monte Carlo samples.
        #[arg(long)]
        empirical: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the invariant suites.
    Validate {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Dickman table file to validate instead of building one.
        #[arg(long)]
        rho_table: Option<PathBuf>,
        /// Buchstab table file to validate instead of building one.
        #[arg(long)]
        omega_table: Option<PathBuf>,
    },
    /// Run every comparison experiment.
    Report {
        /// Write the full reports as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the rho and omega tables as JSON files.
    Tables {
        #[arg(long)]
        rho_out: PathBuf,
        #[arg(long)]
        omega_out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecialFn {
    Rho,
    Rho1,
    Rho2,
    Omega,
    Omega1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateKind {
    Theta,
    PsiH,
    PsiS,
    Phi,
    S,
    Lemma6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactKind {
    Theta,
    Psi,
    Phi,
    S,
    Smoothpart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Special,
    Convolution,
    Estimators,
    Oracle,
    All,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Xyz {
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("smooth").required(true).args(["u", "y"])))]
#[command(group(ArgGroup::new("threshold").required(true).args(["v", "z"])))]
pub struct CompareArgs {
    /// Comma-separated x values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<f64>,
    /// u values; y = x^(1/u).
    #[arg(long, value_delimiter = ',')]
    pub u: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub y: Vec<f64>,
    /// v values; z = y^v.
    #[arg(long, value_delimiter = ',')]
    pub v: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub z: Vec<f64>,
    /// Write the full comparison report as JSON to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Optional settings file. Command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub tables: TableConfig,
    pub quadrature: QuadratureSpec,
    pub estimators: EstimatorConfig,
    pub oracle: OracleConfig,
    pub harness: HarnessConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub epsilon: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { epsilon: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub sieve_ceiling: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            sieve_ceiling: DEFAULT_SIEVE_CEILING,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Format(format!("config {}: {e}", path.display())))
    }
}

/// One command's result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub inputs: IndexMap<String, String>,
    pub outputs: IndexMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<IndexMap<String, String>>,
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub version: String,
}

impl OutputRecord {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: IndexMap::new(),
            outputs: IndexMap::new(),
            rows: Vec::new(),
            flags: Vec::new(),
            notes: Vec::new(),
            version: VERSION.to_string(),
        }
    }

    fn input(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.inputs.insert(k.to_string(), v.to_string());
        self
    }

    fn input_real(&mut self, k: &str, v: f64) -> &mut Self {
        self.input(k, real(v))
    }

    fn output(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.outputs.insert(k.to_string(), v.to_string());
        self
    }

    fn output_real(&mut self, k: &str, v: f64) -> &mut Self {
        self.output(k, real(v))
    }

    fn estimate(&mut self, r: EstimateResult) {
        self.output_real("main_term", r.main_term)
            .output_real("second_term", r.second_term)
            .output_real("value", r.value)
            .output_real("error_envelope", r.error_envelope);
        self.flags.push(format!("in_theorem_domain={}", r.in_theorem_domain));
        self.notes.extend(r.domain_notes);
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Long-format CSV: `section,key,value`, one line per value.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["section", "key", "value"]).map_err(io)?;
        w.write_record(["command", "command", &self.command]).map_err(io)?;
        for (k, v) in &self.inputs {
            w.write_record(["input", k, v]).map_err(io)?;
        }
        for (k, v) in &self.outputs {
            w.write_record(["output", k, v]).map_err(io)?;
        }
        for (i, row) in self.rows.iter().enumerate() {
            let section = format!("row.{i}");
            for (k, v) in row {
                w.write_record([section.as_str(), k, v]).map_err(io)?;
            }
        }
        for f in &self.flags {
            w.write_record(["flag", "flag", f]).map_err(io)?;
        }
        for n in &self.notes {
            w.write_record(["note", "note", n]).map_err(io)?;
        }
        w.write_record(["version", "version", &self.version]).map_err(io)?;
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{} ({})\n", self.command, self.version);
        let width = self
            .inputs
            .keys()
            .chain(self.outputs.keys())
            .map(|k| k.len())
            .max()
            .unwrap_or(0);
        for (title, map) in [("inputs", &self.inputs), ("outputs", &self.outputs)] {
            if !map.is_empty() {
                out.push_str(&format!("{title}:\n"));
                for (k, v) in map {
                    out.push_str(&format!("  {k:<width$}  {v}\n"));
                }
            }
        }
        if let Some(first) = self.rows.first() {
            let cols: Vec<&String> = first.keys().collect();
            let widths: Vec<usize> = cols
                .iter()
                .map(|c| self.rows.iter().map(|r| r.get(*c).map_or(0, |v| v.len())).max().unwrap_or(0).max(c.len()))
                .collect();
            out.push_str("rows:\n ");
            for (c, w) in cols.iter().zip(&widths) {
                out.push_str(&format!(" {c:<w$}"));
            }
            out.push('\n');
            for r in &self.rows {
                out.push(' ');
                for (c, w) in cols.iter().zip(&widths) {
                    out.push_str(&format!(" {:<w$}", r.get(*c).map_or("", |v| v.as_str())));
                }
                out.push('\n');
            }
        }
        for f in &self.flags {
            out.push_str(&format!("flag: {f}\n"));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Table => Ok(self.to_table()),
        }
    }
}

/// Settings after merging the config file with command-line flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: Config,
    pub sieve_ceiling: u64,
    pub epsilon: f64,
    pub format: Format,
}

impl Settings {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let config = match &cli.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let sieve_ceiling = cli.limit.unwrap_or(config.oracle.sieve_ceiling);
        let epsilon = cli.epsilon.unwrap_or(config.estimators.epsilon);
        Ok(Self {
            config,
            sieve_ceiling,
            epsilon,
            format: cli.format,
        })
    }

    fn special(&self) -> Result<SpecialFunctions> {
        SpecialFunctions::new(&self.config.tables)
    }

    fn estimator<'a>(&self, sf: &'a SpecialFunctions) -> Result<Estimator<'a>> {
        let conv = Convolver::new(sf, self.config.quadrature)?;
        Estimator::new(conv, self.epsilon)
    }

    fn sieve(&self, limit: u64) -> Result<SieveTables> {
        SieveTables::build_with_ceiling(limit, self.sieve_ceiling)
    }
}

fn need(name: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::Usage(format!("--{name} is required for this command")))
}

fn sieve_bound(name: &'static str, v: f64) -> Result<u64> {
    if !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be finite, got {v}")));
    }
    let f = v.floor().max(2.0);
    if f > u64::MAX as f64 / 2.0 {
        return Err(Error::Resource(format!("{name} = {v} is far beyond any sieve")));
    }
    Ok(f as u64)
}

fn cmd_special(s: &Settings, function: SpecialFn, u: f64) -> Result<OutputRecord> {
    let sf = s.special()?;
    let (value, table) = match function {
        SpecialFn::Rho => (sf.rho(u)?, sf.rho_table()),
        SpecialFn::Rho1 => (sf.rho_prime(u)?, sf.rho_table()),
        SpecialFn::Rho2 => (sf.rho_double_prime(u)?, sf.rho_table()),
        SpecialFn::Omega => (sf.omega(u)?, sf.omega_table()),
        SpecialFn::Omega1 => (sf.omega_prime(u)?, sf.omega_table()),
    };
    let mut r = OutputRecord::new("special");
    r.input("fn", function.to_possible_value().expect("named").get_name())
        .input_real("u", u);
    r.output_real("value", value)
        .output_real("certificate", table.max_certificate())
        .output_real("table_u_max", table.u_max());
    Ok(r)
}

fn cmd_estimate(s: &Settings, kind: EstimateKind, xyz: Xyz) -> Result<OutputRecord> {
    let sf = s.special()?;
    let est = s.estimator(&sf)?;
    let mut r = OutputRecord::new("estimate");
    r.input("kind", kind.to_possible_value().expect("named").get_name());
    let result = match kind {
        EstimateKind::Theta | EstimateKind::Lemma6 => {
            let (x, y, z) = (need("x", xyz.x)?, need("y", xyz.y)?, need("z", xyz.z)?);
            r.input_real("x", x).input_real("y", y).input_real("z", z);
            let p = ScaledParams::new(x, y, z)?;
            if kind == EstimateKind::Theta {
                est.theta_estimate(&p)?
            } else {
                est.lemma6_estimate(&p)?
            }
        }
        EstimateKind::PsiH | EstimateKind::PsiS | EstimateKind::Phi => {
            let (x, y) = (need("x", xyz.x)?, need("y", xyz.y)?);
            r.input_real("x", x).input_real("y", y);
            match kind {
                EstimateKind::PsiH => est.psi_estimate_hildebrand(x, y)?,
                EstimateKind::PsiS => est.psi_estimate_saias(x, y)?,
                _ => est.phi_estimate(x, y)?,
            }
        }
        EstimateKind::S => {
            let (y, z) = (need("y", xyz.y)?, need("z", xyz.z)?);
            r.input_real("y", y).input_real("z", z);
            est.s_estimate(y, z)?
        }
    };
    r.estimate(result);
    Ok(r)
}

fn cmd_exact(s: &Settings, kind: ExactKind, xyz: Xyz, n: Option<u64>) -> Result<OutputRecord> {
    let mut r = OutputRecord::new("exact");
    r.input("kind", kind.to_possible_value().expect("named").get_name());
    match kind {
        ExactKind::Theta | ExactKind::Psi | ExactKind::Phi => {
            let (x, y) = (need("x", xyz.x)?, need("y", xyz.y)?);
            r.input_real("x", x).input_real("y", y);
            let z = if kind == ExactKind::Theta {
                let z = need("z", xyz.z)?;
                r.input_real("z", z);
                z
            } else {
                0.0
            };
            let t = s.sieve(sieve_bound("x", x)?)?;
            let count = match kind {
                ExactKind::Theta => oracle::theta_exact(x, y, z, &t)?,
                ExactKind::Psi => oracle::psi_exact(x, y, &t)?,
                _ => oracle::phi_exact(x, y, &t)?,
            };
            r.output("value", count);
        }
        ExactKind::S => {
            let (y, z) = (need("y", xyz.y)?, need("z", xyz.z)?);
            r.input_real("y", y).input_real("z", z);
            let t = s.sieve(sieve_bound("y", y)?.max(sieve_bound("z", z)?))?;
            r.output_real("value", oracle::s_exact(y, z, &t)?);
        }
        ExactKind::Smoothpart => {
            let n = n.ok_or_else(|| Error::Usage("--n is required for this command".into()))?;
            let y = need("y", xyz.y)?;
            r.input("n", n).input_real("y", y);
            let t = s.sieve(n.max(2))?;
            r.output("value", oracle::smooth_part(n, y, &t)?);
        }
    }
    Ok(r)
}

fn grid_points(a: &CompareArgs) -> Result<Vec<ScaledParams>> {
    if a.x.is_empty() || (a.u.is_empty() && a.y.is_empty()) || (a.v.is_empty() && a.z.is_empty()) {
        return Err(Error::Usage("grid needs --x, one of --u/--y and one of --v/--z".into()));
    }
    let mut pts = Vec::new();
    for &x in &a.x {
        let ys: Vec<f64> = if a.y.is_empty() { a.u.iter().map(|u| x.powf(1.0 / u)).collect() } else { a.y.clone() };
        for &y in &ys {
            let zs: Vec<f64> = if a.z.is_empty() { a.v.iter().map(|v| y.powf(*v)).collect() } else { a.z.clone() };
            for &z in &zs {
                pts.push(ScaledParams::new(x, y, z)?);
            }
        }
    }
    Ok(pts)
}

fn report_rows(report: &ComparisonReport) -> Vec<IndexMap<String, String>> {
    report
        .rows
        .iter()
        .map(|row| {
            let mut m = IndexMap::new();
            for (k, v) in &row.params {
                m.insert(k.to_string(), real(*v));
            }
            m.insert("exact".into(), real(row.exact));
            m.insert("estimate".into(), real(row.estimate));
            m.insert("abs_diff".into(), real((row.exact - row.estimate).abs()));
            m.insert("envelope".into(), real(row.envelope));
            m.insert("ratio".into(), real(report.ratio(row)));
            for (k, v) in &row.extra {
                m.insert(k.to_string(), real(*v));
            }
            m.insert("in_domain".into(), row.in_domain.to_string());
            m
        })
        .collect()
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn cmd_compare(s: &Settings, a: &CompareArgs) -> Result<OutputRecord> {
    let pts = grid_points(a)?;
    let sf = s.special()?;
    let est = s.estimator(&sf)?;
    let limit = pts.iter().map(|p| sieve_bound("x", p.x())).collect::<Result<Vec<_>>>()?.into_iter().max().unwrap_or(2);
    let config = HarnessConfig {
        sieve_limit: limit,
        ..s.config.harness.clone()
    };
    let h = Harness::with_ceiling(est, config, s.sieve_ceiling)?;
    let report = h.theta_comparison("compare", &pts)?;
    if let Some(path) = &a.report {
        write_json(path, &report.to_json_value())?;
    }
    let mut r = OutputRecord::new("compare");
    let list = |v: &[f64]| v.iter().map(|&x| real(x)).collect::<Vec<_>>().join(",");
    r.input("x", list(&a.x));
    if a.y.is_empty() {
        r.input("u", list(&a.u));
    } else {
        r.input("y", list(&a.y));
    }
    if a.z.is_empty() {
        r.input("v", list(&a.v));
    } else {
        r.input("z", list(&a.z));
    }
    r.output("rows", report.rows.len())
        .output("checked_rows", report.rows.iter().filter(|row| row.in_domain).count())
        .output_real("max_ratio", report.max_ratio())
        .output_real("median_ratio", report.median_ratio())
        .output_real("fitted_constant", report.fitted_constant());
    r.rows = report_rows(&report);
    r.notes = report.notes.clone();
    Ok(r)
}

fn cmd_dsa_risk(s: &Settings, d: DsaParams, empirical: Option<u64>, seed: Option<u64>) -> Result<OutputRecord> {
    let sf = s.special()?;
    let est = s.estimator(&sf)?;
    let mut r = OutputRecord::new("dsa-risk");
    r.input("k", d.k).input("l", d.l).input("m", d.m);
    let eta = est.eta(&d)?;
    r.output_real("eta", eta)
        .output_real("wp_k", est.wp(&d)?)
        .output_real("wp_k_minus_1", est.wp(&DsaParams::new(d.k - 1, d.l, d.m))?)
        .output_real("eta_envelope", est.eta_envelope(&d)?);
    if let Some(samples) = empirical {
        let seed = seed.unwrap_or(s.config.harness.seed);
        r.input("samples", samples).input("seed", seed);
        let t = s.sieve(1u64.checked_shl(d.l).unwrap_or(u64::MAX).max(2))?;
        let mc = oracle::eta_empirical(&d, samples, seed, &t)?;
        r.output_real("empirical_eta", mc.estimate)
            .output_real("std_err", mc.std_err)
            .output("hits", mc.hits);
        if mc.std_err > 0.0 {
            r.output_real("sigmas", (mc.estimate - eta).abs() / mc.std_err);
        }
        r.notes.push(format!(
            "Monte Carlo: ChaCha8, seed {seed}, stream i covers samples [{0} i, {0} (i+1))",
            oracle::SAMPLES_PER_STREAM
        ));
    }
    r.notes.extend(d.warnings());
    Ok(r)
}

fn load_table(path: &Path) -> Result<PiecewiseFunction> {
    PiecewiseFunction::from_json(&fs::read_to_string(path)?)
}

fn cmd_validate(s: &Settings, suite: SuiteArg, rho: Option<&Path>, omega: Option<&Path>) -> Result<(OutputRecord, bool)> {
    let built = s.special()?;
    let sf = if rho.is_some() || omega.is_some() {
        let rho = rho.map(load_table).transpose()?.unwrap_or_else(|| built.rho_table().clone());
        let omega = omega.map(load_table).transpose()?.unwrap_or_else(|| built.omega_table().clone());
        SpecialFunctions::from_tables(rho, omega)?
    } else {
        built
    };
    let est = s.estimator(&sf)?;
    let suites: Vec<Suite> = match suite {
        SuiteArg::Special => vec![Suite::Special],
        SuiteArg::Convolution => vec![Suite::Convolution],
        SuiteArg::Estimators => vec![Suite::Estimators],
        SuiteArg::Oracle => vec![Suite::Oracle],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let report = validate::run(&suites, &est);
    let mut r = OutputRecord::new("validate");
    r.input("suite", suite.to_possible_value().expect("named").get_name());
    let failed = report.failures().count();
    r.output("checks", report.checks.len())
        .output("passed", report.checks.len() - failed)
        .output("failed", failed);
    for c in &report.checks {
        let mut m = IndexMap::new();
        m.insert("suite".to_string(), c.suite.to_string());
        m.insert("check".to_string(), c.name.to_string());
        m.insert("passed".to_string(), c.passed.to_string());
        m.insert("detail".to_string(), c.detail.clone());
        r.rows.push(m);
    }
    r.flags.push(if report.passed() { "all_passed" } else { "failures" }.to_string());
    Ok((r, report.passed()))
}

fn cmd_report(s: &Settings, out: Option<&Path>) -> Result<(OutputRecord, Vec<ComparisonReport>)> {
    let sf = s.special()?;
    let est = s.estimator(&sf)?;
    let h = Harness::with_ceiling(est, s.config.harness.clone(), s.sieve_ceiling)?;
    let reports = h.run_all()?;
    if let Some(path) = out {
        write_json(path, &reports_to_json(&reports))?;
    }
    let mut r = OutputRecord::new("report");
    r.input("seed", s.config.harness.seed)
        .input("eta_samples", s.config.harness.eta_samples)
        .input("sieve_limit", s.config.harness.sieve_limit);
    r.output("experiments", reports.len());
    for rep in &reports {
        let mut m = IndexMap::new();
        m.insert("experiment".to_string(), rep.experiment.clone());
        m.insert("rows".to_string(), rep.rows.len().to_string());
        m.insert("max_ratio".to_string(), real(rep.max_ratio()));
        m.insert("median_ratio".to_string(), real(rep.median_ratio()));
        m.insert("fitted_constant".to_string(), real(rep.fitted_constant()));
        r.rows.push(m);
    }
    Ok((r, reports))
}

fn cmd_tables(s: &Settings, rho_out: &Path, omega_out: &Path) -> Result<OutputRecord> {
    let sf = s.special()?;
    fs::write(rho_out, sf.rho_table().to_json()?)?;
    fs::write(omega_out, sf.omega_table().to_json()?)?;
    let mut r = OutputRecord::new("tables");
    r.input("rho_out", rho_out.display()).input("omega_out", omega_out.display());
    r.output("rho_segments", sf.rho_table().segments().len())
        .output_real("rho_certificate", sf.rho_table().max_certificate())
        .output("omega_segments", sf.omega_table().segments().len())
        .output_real("omega_certificate", sf.omega_table().max_certificate());
    Ok(r)
}

/// Runs a parsed command, writing the record to `out`. Returns the exit code
/// for outcomes that are not errors (validation failures give 1).
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be positive".into()));
        }
        exec::init_threads(n);
    }
    let s = Settings::resolve(cli)?;
    let mut code = 0;
    let record = match &cli.command {
        Command::Special { function, u } => cmd_special(&s, *function, *u)?,
        Command::Estimate { kind, xyz } => cmd_estimate(&s, *kind, *xyz)?,
        Command::Exact { kind, xyz, n } => cmd_exact(&s, *kind, *xyz, *n)?,
        Command::Compare(a) => cmd_compare(&s, a)?,
        Command::DsaRisk { k, l, m, empirical, seed } => {
            cmd_dsa_risk(&s, DsaParams::new(*k, *l, *m), *empirical, *seed)?
        }
        Command::Validate { suite, rho_table, omega_table } => {
            let (r, ok) = cmd_validate(&s, *suite, rho_table.as_deref(), omega_table.as_deref())?;
            if !ok {
                let names: Vec<String> = r
                    .rows
                    .iter()
                    .filter(|row| row["passed"] == "false")
                    .map(|row| format!("{}::{}", row["suite"], row["check"]))
                    .collect();
                eprintln!("validation failed: {}", names.join(", "));
                code = 1;
            }
            r
        }
        Command::Report { out: path } => {
            let (r, reports) = cmd_report(&s, path.as_deref())?;
            if s.format == Format::Table {
                out.write_all(r.to_table().as_bytes())?;
                for rep in &reports {
                    out.write_all(rep.summary_table().as_bytes())?;
                }
                return Ok(0);
            }
            r
        }
        Command::Tables { rho_out, omega_out } => cmd_tables(&s, rho_out, omega_out)?,
    };
    out.write_all(record.render(s.format)?.as_bytes())?;
    Ok(code)
}
