//! Configuration-driven experiments: one JSON config per run, CSV for tables
//! and JSON for structured results. Every float is written with 12
//! significant digits so that outputs are byte-identical across runs.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adversary::{
    cost_ratio, empirical_sar, family_k_quantile, family_lifted_plan, family_median_info,
    family_two_facility_unbounded, family_zero_info, manipulation_probe,
    truthfulness_fuzz_with_probes, Case, InstanceFamily, KQuantileCase, Mechanism,
    DEFAULT_SCHEDULE,
};
use crate::bounds::{sar_lower, sar_upper, table_k_quantile_bounds, LowerRegime, Regime};
use crate::distributions::PiecewiseUniform;
use crate::error::Error;
use crate::instance::{esc, solve_optimal, Instance};
use crate::single::QueryPlan;
use crate::two::{esc2, solve_optimal2, TwoInstance};

/// The experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Mech,
    SarTable,
    Adversary,
    TwoFac,
    Fuzz,
}

/// A family of worst-case instances, selected by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    ZeroInfo {
        n: usize,
        n_r: usize,
    },
    MedianInfo {
        n: usize,
        n_r: usize,
    },
    KQuantile {
        n: usize,
        n_r: usize,
        k: usize,
        variant: Option<KQuantileCase>,
    },
    LiftedPlan {
        n: usize,
        n_r: usize,
        levels: Vec<f64>,
    },
    TwoFacilityUnbounded {
        c: usize,
        n_r: usize,
    },
}

impl FamilySpec {
    pub fn build(&self) -> crate::Result<InstanceFamily> {
        match self {
            FamilySpec::ZeroInfo { n, n_r } => family_zero_info(*n, *n_r),
            FamilySpec::MedianInfo { n, n_r } => family_median_info(*n, *n_r),
            FamilySpec::KQuantile { n, n_r, k, variant } => {
                family_k_quantile(*n, *n_r, *k, variant.unwrap_or(KQuantileCase::Base))
            }
            FamilySpec::LiftedPlan { n, n_r, levels } => {
                family_lifted_plan(*n, *n_r, &QueryPlan::new(levels.clone())?)
            }
            FamilySpec::TwoFacilityUnbounded { c, n_r } => family_two_facility_unbounded(*c, *n_r),
        }
    }
}

/// A mechanism given either explicitly or by information regime plus plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MechanismSpec {
    Regime {
        regime: Regime,
        #[serde(default)]
        plan: Option<Vec<f64>>,
    },
    Explicit(Mechanism),
}

impl MechanismSpec {
    /// The regime mechanisms: the report median, all phantoms at the median,
    /// the lift of the plan, and the optimal phantoms.
    pub fn resolve(&self) -> Result<Mechanism, ExperimentError> {
        match self {
            MechanismSpec::Explicit(m) => Ok(m.clone()),
            MechanismSpec::Regime { regime, plan } => Ok(match regime {
                Regime::Zero => Mechanism::ReportMedian,
                Regime::Median => Mechanism::Plan { levels: vec![0.5] },
                Regime::KQuantile => Mechanism::Plan {
                    levels: plan
                        .clone()
                        .ok_or_else(|| config_error("the k regime needs a plan"))?,
                },
                Regime::Full => Mechanism::Full,
            }),
        }
    }
}

/// Sizes swept by `sar-table`: every odd `n`, with `n_r` taken from the
/// explicit list and from `lambda * n` whenever that is an integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SarSweep {
    pub n: Vec<usize>,
    #[serde(default)]
    pub n_r: Vec<usize>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    pub k: Vec<usize>,
}

/// One JSON config file. Fields not used by a command are ignored by it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub instance: Option<Instance>,
    pub two_instance: Option<TwoInstance>,
    pub distribution: Option<PiecewiseUniform>,
    pub family: Option<FamilySpec>,
    pub mechanism: Option<MechanismSpec>,
    pub sweep: Option<SarSweep>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub ell: Option<Vec<u64>>,
    /// Also evaluate the known manipulation of the exact two-facility optimum.
    #[serde(default)]
    pub manipulation_probe: bool,
}

/// Failure of an experiment, with a stable diagnostic code and exit status.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] Error),
}

fn config_error(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

impl ExperimentError {
    pub fn code(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "E_CONFIG",
            ExperimentError::Io(_) => "E_IO",
            ExperimentError::Core(e) => e.code(),
        }
    }

    pub fn exit_status(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Io(_) => 3,
            ExperimentError::Core(e) => match e {
                Error::InvalidDistribution(_) => 10,
                Error::InvalidFamily(_) => 11,
                Error::InvalidInstance(_) => 12,
                Error::Domain(_) => 13,
                Error::Parity(_) => 14,
                Error::Dimension { .. } => 15,
                Error::NoReports => 16,
                Error::Regime(_) => 17,
                Error::NoBoundedMechanism { .. } => 18,
                Error::UnsupportedPlan(_) => 19,
                Error::Unsupported(_) => 20,
                Error::InfeasibleOutcome(_) => 21,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    fn need<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, ExperimentError> {
        field
            .as_ref()
            .ok_or_else(|| config_error(format!("missing field `{name}`")))
    }

    fn schedule(&self) -> Vec<u64> {
        self.ell
            .clone()
            .unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec())
    }
}

/// A float rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// A float with 12 significant digits in its shortest form; `inf`, `-inf`, `nan` otherwise.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let r = round_sig(x);
        if r == 0.0 {
            "0".into()
        } else {
            format!("{r}")
        }
    }
}

/// Rounds every float in a JSON value; non-finite floats are already `null`.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(num) if num.is_f64() => {
            json!(round_sig(num.as_f64().expect("f64 number")))
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn to_json_text(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v)).expect("JSON values serialise");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serialisable")
}

/// Ratio field: a number, or the string `"inf"` for the divergence sentinel.
fn ratio_value(r: f64) -> Value {
    if r.is_finite() {
        json!(r)
    } else {
        json!(fmt_float(r))
    }
}

/// Runs `command` (or the config's own command) and returns the artifact text.
pub fn run(command: Option<Command>, cfg: &ExperimentConfig) -> Result<String, ExperimentError> {
    let command = command
        .or(cfg.command)
        .ok_or_else(|| config_error("no command given"))?;
    match command {
        Command::Solve => run_solve(cfg),
        Command::Mech => run_mech(cfg),
        Command::SarTable => run_sar_table(cfg),
        Command::Adversary => run_adversary(cfg),
        Command::TwoFac => run_two_fac(cfg),
        Command::Fuzz => run_fuzz(cfg),
    }
}

fn run_solve(cfg: &ExperimentConfig) -> Result<String, ExperimentError> {
    let inst = ExperimentConfig::need(&cfg.instance, "instance")?;
    let mu = ExperimentConfig::need(&cfg.distribution, "distribution")?;
    let opt = solve_optimal(inst, mu);
    Ok(to_json_text(json!({
        "lo": opt.lo,
        "hi": opt.hi,
        "canonical": opt.canonical,
        "esc": esc(inst, mu, opt.canonical),
    })))
}

fn mech_record(mech: &Mechanism, case: &Case) -> Result<Value, ExperimentError> {
    Ok(match case {
        Case::Single { instance, mu } => {
            let y = mech.place(instance, mu)?;
            let opt = solve_optimal(instance, mu).canonical;
            let (m, o) = (esc(instance, mu, y), esc(instance, mu, opt));
            json!({ "y": y, "esc": m, "optimal": opt, "optimal_esc": o, "ratio": ratio_value(cost_ratio(m, o)) })
        }
        Case::Two { instance, mu } => {
            let out = mech.place_two(instance, mu)?;
            let m = esc2(instance, mu, &out)?;
            let o = esc2(instance, mu, &solve_optimal2(instance, mu))?;
            json!({ "outcome": to_value(&out), "esc": m, "optimal_esc": o, "ratio": ratio_value(cost_ratio(m, o)) })
        }
    })
}

fn run_mech(cfg: &ExperimentConfig) -> Result<String, ExperimentError> {
    let mech = ExperimentConfig::need(&cfg.mechanism, "mechanism")?.resolve()?;
    let mut records = Vec::new();
    if let Some(spec) = &cfg.family {
        let fam = spec.build()?;
        for ell in cfg.schedule() {
            let mut rec = mech_record(&mech, &fam.generate(ell)?)?;
            rec["ell"] = json!(ell);
            records.push(rec);
        }
    } else {
        let instance = ExperimentConfig::need(&cfg.instance, "instance")?.clone();
        let mu = ExperimentConfig::need(&cfg.distribution, "distribution")?.clone();
        records.push(mech_record(&mech, &Case::Single { instance, mu })?);
    }
    Ok(to_json_text(
        json!({ "mechanism": mech.to_string(), "records": records }),
    ))
}

/// One row of the bound table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SarRow {
    pub n: usize,
    pub n_r: usize,
    pub lambda: f64,
    pub k: usize,
    pub regime: &'static str,
    /// Ratio guaranteed by the regime's mechanism (the lifted equally spaced
    /// plan in the `k`-quantile regime).
    pub upper: f64,
    /// Lower bound for every truthful mechanism in the regime; absent for the
    /// `k`-quantile regime unless `k` divides `n_u`.
    pub lower: Option<f64>,
    /// Whether `upper` and `lower` bound the same quantity, so that
    /// `upper >= lower` must hold.
    pub comparable: bool,
    /// The summary-table forms in terms of `lambda` (and `sigma = n_u/k`).
    pub table_upper: f64,
    pub table_lower: f64,
}

/// Bounds for one `(n, n_r, k)`: `k = 0` is the zero-information regime,
/// `k = 1` the median regime and `k >= n_u` full information.
pub fn sar_row(n: usize, n_r: usize, k: usize) -> crate::Result<SarRow> {
    if n_r > n {
        return Err(Error::InvalidInstance(format!(
            "n_r = {n_r} exceeds n = {n}"
        )));
    }
    let n_u = n - n_r;
    let lambda = n_r as f64 / n as f64;
    let inv = if lambda > 0.0 {
        2.0 / lambda - 1.0
    } else {
        f64::INFINITY
    };
    let row = |regime, upper, lower: Option<f64>, comparable, table_upper, table_lower| SarRow {
        n,
        n_r,
        lambda,
        k,
        regime,
        upper,
        lower,
        comparable,
        table_upper,
        table_lower,
    };
    if k == 0 {
        let u = sar_upper(Regime::Zero, n, n_r, None)?;
        let l = sar_lower(LowerRegime::Zero, n, n_r, None, false)?;
        return Ok(row("zero", u, Some(l), true, inv, inv));
    }
    if k >= n_u {
        sar_upper(Regime::Full, n, n_r, None)?;
        return Ok(row("full", 1.0, Some(1.0), true, 1.0, 1.0));
    }
    if k == 1 {
        let u = sar_upper(Regime::Median, n, n_r, None)?;
        let l = sar_lower(LowerRegime::Median, n, n_r, None, true)?;
        let tu = if 2 * n_r >= n {
            (2.0 / (lambda + 1.0 / n as f64)).max(2.0) - 1.0
        } else {
            1.0 + 2.0 * lambda / (1.0 - lambda)
        };
        let tl = if 3 * n_r >= n {
            (4.0 / (1.0 + lambda)).max(2.0) - 1.0
        } else {
            1.0 + 2.0 * lambda / (1.0 - lambda)
        };
        return Ok(row("median", u, Some(l), true, tu, tl));
    }
    let u = sar_upper(Regime::KQuantile, n, n_r, Some(&QueryPlan::even_grid(k)?))?;
    let divides = n_u.is_multiple_of(k);
    let l = if divides {
        Some(sar_lower(
            LowerRegime::KQuantileEvenGrid,
            n,
            n_r,
            Some(k),
            false,
        )?)
    } else {
        None
    };
    let (tu, tl) = table_k_quantile_bounds(n, n_r, k)?;
    Ok(row("k", u, l, divides, tu, tl))
}

/// Every row of a sweep, in sweep order.
pub fn sar_table_rows(sweep: &SarSweep) -> crate::Result<Vec<SarRow>> {
    let mut rows = Vec::new();
    for &n in &sweep.n {
        let mut sizes: Vec<usize> = sweep.n_r.iter().copied().filter(|&r| r <= n).collect();
        for &l in &sweep.lambda {
            let r = l * n as f64;
            if (r - r.round()).abs() < 1e-9 && (0.0..=n as f64).contains(&r.round()) {
                sizes.push(r.round() as usize);
            }
        }
        sizes.sort_unstable();
        sizes.dedup();
        for &n_r in &sizes {
            for &k in &sweep.k {
                rows.push(sar_row(n, n_r, k)?);
            }
        }
    }
    Ok(rows)
}

fn csv_text(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .map_err(|e| config_error(e.to_string()))?;
    for r in rows {
        w.write_record(&r)
            .map_err(|e| config_error(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| config_error(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII fields"))
}

fn run_sar_table(cfg: &ExperimentConfig) -> Result<String, ExperimentError> {
    let sweep = ExperimentConfig::need(&cfg.sweep, "sweep")?;
    let rows = sar_table_rows(sweep)?;
    csv_text(
        &[
            "n",
            "n_r",
            "lambda",
            "k",
            "regime",
            "upper",
            "lower",
            "comparable",
            "table_upper",
            "table_lower",
        ],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.n_r.to_string(),
                fmt_float(r.lambda),
                r.k.to_string(),
                r.regime.to_string(),
                fmt_float(r.upper),
                r.lower.map(fmt_float).unwrap_or_default(),
                r.comparable.to_string(),
                fmt_float(r.table_upper),
                fmt_float(r.table_lower),
            ]
        }),
    )
}

fn run_adversary(cfg: &ExperimentConfig) -> Result<String, ExperimentError> {
    let fam = ExperimentConfig::need(&cfg.family, "family")?.build()?;
    let mech = ExperimentConfig::need(&cfg.mechanism, "mechanism")?.resolve()?;
    let trace = empirical_sar(&mech, &fam, &cfg.schedule())?;
    csv_text(
        &["ell", "ratio"],
        trace
            .ells
            .iter()
            .zip(&trace.ratios)
            .map(|(e, r)| vec![e.to_string(), fmt_float(*r)]),
    )
}

fn run_two_fac(cfg: &ExperimentConfig) -> Result<String, ExperimentError> {
    let inst = ExperimentConfig::need(&cfg.two_instance, "two_instance")?;
    let mu = ExperimentConfig::need(&cfg.distribution, "distribution")?;
    let mech = match &cfg.mechanism {
        Some(spec) => spec.resolve()?,
        None => Mechanism::Optimal2,
    };
    let out = mech.place_two(inst, mu)?;
    let cost = esc2(inst, mu, &out)?;
    let opt = esc2(inst, mu, &solve_optimal2(inst, mu))?;
    Ok(to_json_text(json!({
        "mechanism": mech.to_string(),
        "outcome": to_value(&out),
        "esc": cost,
        "optimal_esc": opt,
        "ratio": ratio_value(cost_ratio(cost, opt)),
    })))
}

fn run_fuzz(cfg: &ExperimentConfig) -> Result<String, ExperimentError> {
    let mech = ExperimentConfig::need(&cfg.mechanism, "mechanism")?.resolve()?;
    let seed = *ExperimentConfig::need(&cfg.seed, "seed")?;
    let trials = cfg.trials.unwrap_or(1000);
    let probes = if cfg.manipulation_probe {
        vec![manipulation_probe()]
    } else {
        Vec::new()
    };
    let report = truthfulness_fuzz_with_probes(&mech, trials, seed, &probes)?;
    Ok(to_json_text(to_value(&report)))
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Solve => "solve",
            Command::Mech => "mech",
            Command::SarTable => "sar-table",
            Command::Adversary => "adversary",
            Command::TwoFac => "two-fac",
            Command::Fuzz => "fuzz",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(1.5), "1.5");
        assert_eq!(fmt_float(3.125), "3.125");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(-0.0), "0");
        assert_eq!(fmt_float(123456789.0123456), "123456789.012");
    }

    #[test]
    fn rows_for_the_small_sweep() {
        let rows: Vec<(f64, usize, f64, f64)> = (0..=2)
            .map(|k| {
                let r = sar_row(5, 3, k).unwrap();
                (r.lambda, r.k, r.upper, r.lower.unwrap())
            })
            .collect();
        assert_eq!(
            rows,
            vec![(0.6, 0, 1.5, 1.5), (0.6, 1, 1.5, 1.5), (0.6, 2, 1.0, 1.0)]
        );
    }
}
