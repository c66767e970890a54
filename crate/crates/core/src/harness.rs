//! Comparison experiments: asymptotic estimates against exact counts.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::estimators::{DsaParams, Estimator, SErrorBranch, ScaledParams};
use crate::exec;
use crate::oracle::{self, SieveTables, WeightKind};
use crate::render::real;
use crate::VERSION;

/// How a row's ratio is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioKind {
    /// `|exact - estimate| / envelope`.
    DiffOverEnvelope,
    /// `exact / bound`, for one-sided bounds.
    ExactOverBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub params: Vec<(&'static str, f64)>,
    pub exact: f64,
    pub estimate: f64,
    pub envelope: f64,
    pub extra: Vec<(&'static str, f64)>,
    /// Whether the row takes part in the fitted constant.
    pub in_domain: bool,
    pub notes: Vec<String>,
}

impl ReportRow {
    fn new(params: Vec<(&'static str, f64)>, exact: f64, estimate: f64, envelope: f64) -> Self {
        Self {
            params,
            exact,
            estimate,
            envelope,
            extra: Vec::new(),
            in_domain: true,
            notes: Vec::new(),
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| *k == name).map(|&(_, v)| v)
    }

    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extra.iter().find(|(k, _)| *k == name).map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub experiment: String,
    pub description: String,
    pub ratio_kind: RatioKind,
    pub rows: Vec<ReportRow>,
    pub seed: Option<u64>,
    pub version: String,
    pub notes: Vec<String>,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl ComparisonReport {
    fn new(experiment: &str, description: &str, ratio_kind: RatioKind, rows: Vec<ReportRow>) -> Self {
        Self {
            experiment: experiment.to_string(),
            description: description.to_string(),
            ratio_kind,
            rows,
            seed: None,
            version: VERSION.to_string(),
            notes: Vec::new(),
        }
    }

    pub fn ratio(&self, row: &ReportRow) -> f64 {
        match self.ratio_kind {
            RatioKind::DiffOverEnvelope => (row.exact - row.estimate).abs() / row.envelope,
            RatioKind::ExactOverBound => row.exact / row.estimate,
        }
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| self.ratio(r)).collect()
    }

    fn checked_ratios(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.in_domain)
            .map(|r| self.ratio(r))
            .filter(|r| !r.is_nan())
            .collect()
    }

    /// Smallest constant `K` with `ratio <= K` on every in-domain row.
    pub fn fitted_constant(&self) -> f64 {
        self.checked_ratios().into_iter().fold(0.0, f64::max)
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios()
            .into_iter()
            .filter(|r| !r.is_nan())
            .fold(0.0, f64::max)
    }

    pub fn median_ratio(&self) -> f64 {
        median(self.checked_ratios())
    }

    /// Median ratio over the in-domain rows whose parameter `name` equals `value`.
    pub fn median_ratio_where(&self, name: &str, value: f64) -> f64 {
        median(
            self.rows
                .iter()
                .filter(|r| r.in_domain && r.param(name) == Some(value))
                .map(|r| self.ratio(r))
                .collect(),
        )
    }

    pub fn to_json_value(&self) -> Value {
        let pairs = |xs: &[(&'static str, f64)]| -> Value {
            Value::Object(xs.iter().map(|&(k, v)| (k.to_string(), Value::String(real(v)))).collect::<Map<_, _>>())
        };
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "params": pairs(&r.params),
                    "exact": real(r.exact),
                    "estimate": real(r.estimate),
                    "envelope": real(r.envelope),
                    "ratio": real(self.ratio(r)),
                    "extra": pairs(&r.extra),
                    "in_domain": r.in_domain,
                    "notes": r.notes,
                })
            })
            .collect();
        json!({
            "experiment": self.experiment,
            "description": self.description,
            "ratio_kind": self.ratio_kind,
            "version": self.version,
            "seed": self.seed,
            "rows": rows,
            "summary": {
                "rows": self.rows.len(),
                "checked_rows": self.rows.iter().filter(|r| r.in_domain).count(),
                "max_ratio": real(self.max_ratio()),
                "median_ratio": real(self.median_ratio()),
                "fitted_constant": real(self.fitted_constant()),
            },
            "notes": self.notes,
        })
    }

    /// Human-readable table, one line per row plus a summary line.
    pub fn summary_table(&self) -> String {
        let mut out = format!("== {} ({})\n", self.experiment, self.description);
        let header: Vec<&str> = self.rows.first().map(|r| r.params.iter().map(|p| p.0).collect()).unwrap_or_default();
        for h in &header {
            out.push_str(&format!("{h:>12} "));
        }
        out.push_str(&format!(
            "{:>16} {:>16} {:>12} {:>10} {:>3}\n",
            "exact", "estimate", "envelope", "ratio", "dom"
        ));
        for r in &self.rows {
            for (_, v) in &r.params {
                out.push_str(&format!("{:>12} ", short(*v)));
            }
            out.push_str(&format!(
                "{:>16} {:>16} {:>12} {:>10} {:>3}\n",
                short(r.exact),
                short(r.estimate),
                short(r.envelope),
                short(self.ratio(r)),
                if r.in_domain { "yes" } else { "no" }
            ));
        }
        out.push_str(&format!(
            "rows {}  max ratio {}  median ratio {}  fitted constant {}\n",
            self.rows.len(),
            short(self.max_ratio()),
            short(self.median_ratio()),
            short(self.fitted_constant())
        ));
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e7 || v.abs() < 1e-3) {
        format!("{v:.4e}")
    } else {
        format!("{v:.6}")
    }
}

/// Grid and sampling settings for the comparison experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub sieve_limit: u64,
    pub theorem1_xs: Vec<f64>,
    pub theorem1_uv: Vec<(f64, f64)>,
    pub psi_xs: Vec<f64>,
    pub psi_us: Vec<f64>,
    pub s_ys: Vec<f64>,
    pub s_vs: Vec<f64>,
    pub phi_xs: Vec<f64>,
    pub phi_ys: Vec<f64>,
    pub lemma6_xs: Vec<f64>,
    pub lemma6_us: Vec<f64>,
    pub lemma6_vs: Vec<f64>,
    pub eta_triples: Vec<(u32, u32, u32)>,
    pub eta_control: (u32, u32, u32),
    pub eta_samples: u64,
    pub seed: u64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            sieve_limit: 1 << 25,
            theorem1_xs: vec![1e5, 1e6, 1e7],
            theorem1_uv: vec![(4.0, 2.0), (5.0, 2.0), (6.0, 3.0)],
            psi_xs: vec![1e6, 1e7],
            psi_us: vec![1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0],
            s_ys: vec![30.0, 100.0, 1000.0],
            s_vs: vec![0.5, 1.0, 1.5, 2.0, 2.5],
            phi_xs: vec![1e5, 1e6, 1e7],
            phi_ys: vec![20.0, 200.0, 2000.0],
            lemma6_xs: vec![1e5, 1e6, 1e7],
            lemma6_us: vec![4.0, 6.0],
            lemma6_vs: vec![1.0, 2.0],
            eta_triples: vec![(40, 10, 20), (48, 12, 24), (60, 15, 30)],
            eta_control: (40, 10, 40),
            eta_samples: 1_000_000,
            seed: 7,
        }
    }
}

/// Runs the comparison experiments against one sieve.
pub struct Harness<'a> {
    est: Estimator<'a>,
    tables: SieveTables,
    config: HarnessConfig,
}

impl<'a> Harness<'a> {
    pub fn new(est: Estimator<'a>, config: HarnessConfig) -> Result<Self> {
        Self::with_ceiling(est, config, oracle::DEFAULT_SIEVE_CEILING)
    }

    pub fn with_ceiling(est: Estimator<'a>, config: HarnessConfig, ceiling: u64) -> Result<Self> {
        let tables = SieveTables::build_with_ceiling(config.sieve_limit, ceiling)?;
        Ok(Self { est, tables, config })
    }

    pub fn tables(&self) -> &SieveTables {
        &self.tables
    }

    pub fn config(&self) -> &HarnessConfig {
        &self.config
    }

    /// Theta against its two-term formula at the given points.
    ///
    /// Rows with `y log y <= z <= x/y` are checked. The `y` lower bound of the
    /// theorem is reported in the notes but not required, since no desk-scale
    /// point satisfies it.
    pub fn theta_comparison(&self, id: &str, points: &[ScaledParams]) -> Result<ComparisonReport> {
        let rows = exec::map(points, |p| -> Result<ReportRow> {
            let est = self.est.theta_estimate(p)?;
            let exact = oracle::theta_exact(p.x(), p.y(), p.z(), &self.tables)? as f64;
            let mut row = ReportRow::new(
                vec![("x", p.x()), ("y", p.y()), ("z", p.z()), ("u", p.u()), ("v", p.v())],
                exact,
                est.value,
                est.error_envelope,
            );
            row.in_domain = p.y() * p.y().ln() <= p.z() && p.z() <= p.x() / p.y();
            if !row.in_domain {
                row.notes.push("outside y log y <= z <= x/y".to_string());
            }
            row.notes.extend(est.domain_notes);
            Ok(row)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mut report = ComparisonReport::new(
            id,
            "Theta(x,y,z) exact count vs two-term estimate",
            RatioKind::DiffOverEnvelope,
            rows,
        );
        report.notes.push(format!(
            "rows with y log y <= z <= x/y are checked; the y >= exp((log log x)^(5/3+eps)) condition (eps = {}) is recorded per row",
            self.est.epsilon()
        ));
        Ok(report)
    }

    pub fn theorem1_points(&self) -> Result<Vec<ScaledParams>> {
        let mut pts = Vec::new();
        for &x in &self.config.theorem1_xs {
            for &(u, v) in &self.config.theorem1_uv {
                pts.push(ScaledParams::from_scalings(x, u, v)?);
            }
        }
        Ok(pts)
    }

    pub fn run_theorem1_grid(&self) -> Result<ComparisonReport> {
        self.theta_comparison("theorem1", &self.theorem1_points()?)
    }

    fn psi_rows(&self) -> Result<Vec<(f64, f64, f64)>> {
        let mut pts = Vec::new();
        for &x in &self.config.psi_xs {
            for &u in &self.config.psi_us {
                pts.push((x, x.powf(1.0 / u)));
            }
        }
        exec::map(&pts, |&(x, y)| Ok((x, y, oracle::psi_exact(x, y, &self.tables)? as f64)))
            .into_iter()
            .collect()
    }

    pub fn run_psi_grids(&self) -> Result<(ComparisonReport, ComparisonReport)> {
        let exact = self.psi_rows()?;
        let mut h_rows = Vec::new();
        let mut s_rows = Vec::new();
        let mut saias_wins = 0;
        for &(x, y, psi) in &exact {
            let h = self.est.psi_estimate_hildebrand(x, y)?;
            let s = self.est.psi_estimate_saias(x, y)?;
            if (psi - s.value).abs() <= (psi - h.value).abs() {
                saias_wins += 1;
            }
            let params = vec![("x", x), ("y", y), ("u", x.ln() / y.ln())];
            let mut hr = ReportRow::new(params.clone(), psi, h.value, h.error_envelope);
            hr.notes = h.domain_notes;
            let mut sr = ReportRow::new(params, psi, s.value, s.error_envelope);
            sr.extra.push(("hildebrand_abs_diff", (psi - h.value).abs()));
            sr.notes = s.domain_notes;
            h_rows.push(hr);
            s_rows.push(sr);
        }
        let h = ComparisonReport::new(
            "lemma1",
            "Psi(x,y) exact count vs rho(u) x",
            RatioKind::DiffOverEnvelope,
            h_rows,
        );
        let mut s = ComparisonReport::new(
            "lemma2",
            "Psi(x,y) exact count vs two-term estimate",
            RatioKind::DiffOverEnvelope,
            s_rows,
        );
        s.notes.push(format!(
            "two-term estimate at least as close as rho(u) x on {saias_wins} of {} points",
            exact.len()
        ));
        Ok((h, s))
    }

    pub fn run_s_grid(&self) -> Result<ComparisonReport> {
        let mut pts = Vec::new();
        for &y in &self.config.s_ys {
            for &v in &self.config.s_vs {
                pts.push((y, y.powf(v), v));
            }
        }
        let rows = exec::map(&pts, |&(y, z, v)| -> Result<ReportRow> {
            let est = self.est.s_estimate(y, z)?;
            let exact = oracle::s_exact(y, z, &self.tables)?;
            let branch = self.est.s_error_branch(y, z)?;
            let mut row = ReportRow::new(vec![("y", y), ("z", z), ("v", v)], exact, est.value, est.error_envelope);
            row.notes.push(match branch {
                SErrorBranch::Large => "branch z >= y log y".to_string(),
                SErrorBranch::Small => "branch z < y log y".to_string(),
            });
            row.notes.extend(est.domain_notes);
            Ok(row)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(ComparisonReport::new(
            "lemma3",
            "S(y,z) exact reciprocal sum vs tau(v) log y - gamma rho(v)",
            RatioKind::DiffOverEnvelope,
            rows,
        ))
    }

    pub fn run_phi_grid(&self) -> Result<ComparisonReport> {
        let mut pts = Vec::new();
        for &x in &self.config.phi_xs {
            for &y in &self.config.phi_ys {
                if y <= x {
                    pts.push((x, y));
                }
            }
        }
        let rows = exec::map(&pts, |&(x, y)| -> Result<ReportRow> {
            let est = self.est.phi_estimate(x, y)?;
            let exact = oracle::phi_exact(x, y, &self.tables)? as f64;
            let mut row = ReportRow::new(
                vec![("x", x), ("y", y), ("u", x.ln() / y.ln())],
                exact,
                est.value,
                est.error_envelope,
            );
            row.notes = est.domain_notes;
            Ok(row)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(ComparisonReport::new(
            "lemma5",
            "Phi(x,y) exact count vs (x omega(u) - y) e^gamma / zeta(1,y)",
            RatioKind::DiffOverEnvelope,
            rows,
        ))
    }

    fn lemma6_points(&self) -> Result<Vec<ScaledParams>> {
        let mut pts = Vec::new();
        for &x in &self.config.lemma6_xs {
            for &u in &self.config.lemma6_us {
                for &v in &self.config.lemma6_vs {
                    pts.push(ScaledParams::from_scalings(x, u, v)?);
                }
            }
        }
        Ok(pts)
    }

    fn weighted_params(p: &ScaledParams) -> Vec<(&'static str, f64)> {
        vec![("x", p.x()), ("y", p.y()), ("z", p.z()), ("u", p.u()), ("v", p.v())]
    }

    pub fn run_lemma6_grid(&self) -> Result<ComparisonReport> {
        let sf = self.est.convolver().special();
        let rows = exec::map(&self.lemma6_points()?, |p| -> Result<ReportRow> {
            let est = self.est.lemma6_estimate(p)?;
            let exact = oracle::weighted_smooth_sum(p, WeightKind::BuchstabOmega, sf, &self.tables)?;
            let mut row = ReportRow::new(Self::weighted_params(p), exact, est.value, est.error_envelope);
            row.notes = est.domain_notes;
            Ok(row)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(ComparisonReport::new(
            "lemma6",
            "omega-weighted smooth reciprocal sum vs C(u,v) log y - gamma C'(u,v)",
            RatioKind::DiffOverEnvelope,
            rows,
        ))
    }

    pub fn run_lemma4_grid(&self) -> Result<ComparisonReport> {
        let sf = self.est.convolver().special();
        let rows = exec::map(&self.lemma6_points()?, |p| -> Result<ReportRow> {
            let bound = self.est.lemma4_bound(p)?;
            let exact = oracle::weighted_smooth_sum(p, WeightKind::DickmanRho, sf, &self.tables)?;
            Ok(ReportRow::new(Self::weighted_params(p), exact, bound, bound))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mut report = ComparisonReport::new(
            "lemma4",
            "rho-weighted smooth reciprocal sum vs its upper bound",
            RatioKind::ExactOverBound,
            rows,
        );
        report.notes.push("one-sided bound: the ratio is exact/bound and the fitted constant is its maximum".to_string());
        Ok(report)
    }

    pub fn run_lemma_grids(&self) -> Result<Vec<ComparisonReport>> {
        let (l1, l2) = self.run_psi_grids()?;
        Ok(vec![
            l1,
            l2,
            self.run_s_grid()?,
            self.run_lemma4_grid()?,
            self.run_phi_grid()?,
            self.run_lemma6_grid()?,
        ])
    }

    /// Analytic `eta` against a Monte Carlo estimate for one triple.
    pub fn eta_row(&self, d: &DsaParams, samples: u64, seed: u64) -> Result<ReportRow> {
        let analytic = self.est.eta(d)?;
        let envelope = self.est.eta_envelope(d)?;
        let mc = oracle::eta_empirical(d, samples, seed, &self.tables)?;
        let mut row = ReportRow::new(
            vec![("k", d.k as f64), ("l", d.l as f64), ("m", d.m as f64)],
            mc.estimate,
            analytic,
            envelope,
        );
        row.extra.push(("std_err", mc.std_err));
        row.extra.push(("samples", mc.samples as f64));
        if mc.std_err > 0.0 {
            row.extra.push(("sigmas", (mc.estimate - analytic).abs() / mc.std_err));
        }
        row.notes = d.warnings();
        Ok(row)
    }

    pub fn run_eta_desk(&self) -> Result<ComparisonReport> {
        let c = &self.config;
        let mut rows = Vec::new();
        for &(k, l, m) in &c.eta_triples {
            rows.push(self.eta_row(&DsaParams::new(k, l, m), c.eta_samples, c.seed)?);
        }
        let (k, l, m) = c.eta_control;
        let mut control = self.eta_row(&DsaParams::new(k, l, m), c.eta_samples, c.seed)?;
        control.in_domain = false;
        control.notes.push("control row: no k-bit integer has a smooth part above 2^m".to_string());
        rows.push(control);
        let mut report = ComparisonReport::new(
            "eta_desk",
            "eta(k,l,m) analytic vs Monte Carlo (ChaCha8, uniform k-bit integers)",
            RatioKind::DiffOverEnvelope,
            rows,
        );
        report.seed = Some(c.seed);
        report.notes.push("exact column is the Monte Carlo proportion; sigmas = |analytic - empirical| / std_err".to_string());
        Ok(report)
    }

    pub fn run_all(&self) -> Result<Vec<ComparisonReport>> {
        let mut out = vec![self.run_theorem1_grid()?];
        out.extend(self.run_lemma_grids()?);
        out.push(self.run_eta_desk()?);
        Ok(out)
    }
}

/// All reports as one JSON document.
pub fn reports_to_json(reports: &[ComparisonReport]) -> Value {
    json!({
        "version": VERSION,
        "reports": reports.iter().map(ComparisonReport::to_json_value).collect::<Vec<_>>(),
    })
}
