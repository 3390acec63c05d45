//! Single-facility instances: reported agents plus `n_u` agents drawn from a
//! distribution, the ex-ante social cost, and its exact minimiser.

use serde::{Deserialize, Serialize};

use crate::distributions::PiecewiseUniform;
use crate::error::{Error, Result};

/// A facility of capacity `n` with `n_r` reported positions; the remaining
/// `n_u = n - n_r` users are drawn from a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    n: usize,
    reports: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    n: usize,
    reports: Vec<f64>,
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = Error;
    fn try_from(r: InstanceRepr) -> Result<Self> {
        Instance::new(r.n, r.reports)
    }
}

impl From<Instance> for InstanceRepr {
    fn from(i: Instance) -> Self {
        InstanceRepr {
            n: i.n,
            reports: i.reports,
        }
    }
}

impl Instance {
    /// Sorts the reports; requires `1 <= n` and `reports.len() <= n`.
    pub fn new(n: usize, mut reports: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("capacity n must be positive".into()));
        }
        if reports.len() > n {
            return Err(Error::InvalidInstance(format!(
                "{} reports exceed the capacity {n}",
                reports.len()
            )));
        }
        if reports.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInstance("reports must be finite".into()));
        }
        reports.sort_by(f64::total_cmp);
        Ok(Self { n, reports })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_r(&self) -> usize {
        self.reports.len()
    }

    pub fn n_u(&self) -> usize {
        self.n - self.reports.len()
    }

    /// Fraction of reported agents, `n_r / n`.
    pub fn lambda(&self) -> f64 {
        self.n_r() as f64 / self.n as f64
    }

    /// Reports in nondecreasing order.
    pub fn reports(&self) -> &[f64] {
        &self.reports
    }
}

/// Ex-ante social cost of a facility at `y`: distances of the reported agents
/// plus `n_u` times the expected distance of a drawn agent.
pub fn esc(inst: &Instance, mu: &PiecewiseUniform, y: f64) -> f64 {
    let reported: f64 = inst.reports.iter().map(|x| (x - y).abs()).sum();
    reported + inst.n_u() as f64 * mu.mean_abs_dev(y)
}

/// A counting measure on sorted points plus `weight` times the part of `mu`
/// lying between the quantile levels `band.0` and `band.1`.
///
/// With `band = (0, 1)` and `weight = n_u` this is `n` times the mixed CDF of
/// an instance; narrower bands describe the clusters served by one facility
/// in the two-facility problem.
pub(crate) struct Blend<'a> {
    pub points: &'a [f64],
    pub mu: &'a PiecewiseUniform,
    pub weight: f64,
    pub band: (f64, f64),
}

impl Blend<'_> {
    fn count_le(&self, t: f64) -> f64 {
        self.points.partition_point(|&x| x <= t) as f64
    }

    fn continuous_le(&self, t: f64) -> f64 {
        if self.weight == 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.band;
        self.weight * (self.mu.cdf(t) - lo).clamp(0.0, hi - lo)
    }

    /// Total mass in `(-inf, t]`.
    pub fn mass_le(&self, t: f64) -> f64 {
        self.count_le(t) + self.continuous_le(t)
    }

    /// `inf{t : mass_le(t) >= target}`, or with `strict` `inf{t : mass_le(t) > target}`.
    pub fn inf_reaching(&self, target: f64, strict: bool) -> f64 {
        let reaches = |m: f64| if strict { m > target } else { m >= target };
        let mut bps: Vec<f64> = self.points.to_vec();
        if self.weight > 0.0 {
            bps.extend(self.mu.breakpoints());
            bps.push(
                self.mu
                    .quantile_clamped(self.band.0)
                    .expect("band level in [0,1]"),
            );
            bps.push(
                self.mu
                    .quantile_clamped(self.band.1)
                    .expect("band level in [0,1]"),
            );
        }
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let mut prev: Option<f64> = None;
        for &b in &bps {
            if reaches(self.mass_le(b)) {
                let cnt_prev = prev.map_or(0.0, |p| self.count_le(p));
                if self.weight > 0.0 && reaches(cnt_prev + self.continuous_le(b)) {
                    let level = (self.band.0 + (target - cnt_prev) / self.weight).clamp(0.0, 1.0);
                    let t = if strict {
                        self.mu.upper_quantile(level).expect("level in [0,1]")
                    } else if level > 0.0 {
                        self.mu.quantile(level).expect("level in (0,1]")
                    } else {
                        self.mu.quantile_clamped(0.0).expect("level 0")
                    };
                    let t = t.min(b);
                    return prev.map_or(t, |p| t.max(p));
                }
                return b;
            }
            prev = Some(b);
        }
        *bps.last().expect("at least one breakpoint")
    }
}

/// The mixed CDF `λ F_x + (1 - λ) F_mu` of an instance.
#[derive(Debug, Clone, Copy)]
pub struct MixedCdf<'a> {
    pub instance: &'a Instance,
    pub mu: &'a PiecewiseUniform,
}

impl<'a> MixedCdf<'a> {
    pub fn new(instance: &'a Instance, mu: &'a PiecewiseUniform) -> Self {
        Self { instance, mu }
    }

    fn blend(&self) -> Blend<'a> {
        Blend {
            points: self.instance.reports(),
            mu: self.mu,
            weight: self.instance.n_u() as f64,
            band: (0.0, 1.0),
        }
    }

    /// Value of the mixed CDF at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.blend().mass_le(t) / self.instance.n() as f64
    }

    /// `inf{t : F(t) >= p}` for `p` in `(0, 1]`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!("quantile level {p} outside (0, 1]")));
        }
        Ok(self
            .blend()
            .inf_reaching(p * self.instance.n() as f64, false))
    }

    /// `inf{t : F(t) > p}`, the right end of the flat stretch at level `p`.
    pub fn upper_quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!("quantile level {p} outside [0, 1)")));
        }
        Ok(self
            .blend()
            .inf_reaching(p * self.instance.n() as f64, true))
    }
}

/// The set `[lo, hi]` of optimal facility positions; `canonical = lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalSet {
    pub lo: f64,
    pub hi: f64,
    pub canonical: f64,
}

/// Exact minimiser of [`esc`]: the median set of the mixed CDF.
pub fn solve_optimal(inst: &Instance, mu: &PiecewiseUniform) -> OptimalSet {
    let f = MixedCdf::new(inst, mu);
    let lo = f.quantile(0.5).expect("1/2 is a valid level");
    let hi = f.upper_quantile(0.5).expect("1/2 is a valid level").max(lo);
    OptimalSet {
        lo,
        hi,
        canonical: lo,
    }
}

/// Quantiles of `mu` that, together with the reports, always contain an
/// optimal position: levels `(2j-1)/(2 n_u)` for odd `n`, `j/n_u` for even `n`.
pub fn candidate_set(n: usize, n_u: usize, mu: &PiecewiseUniform) -> Vec<f64> {
    let mut out: Vec<f64> = (1..=n_u)
        .map(|j| {
            let level = if n % 2 == 1 {
                (2 * j - 1) as f64 / (2 * n_u) as f64
            } else {
                j as f64 / n_u as f64
            };
            mu.quantile(level).expect("level in (0, 1]")
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Indices `j` in `[1, n_u]` whose target level `(2j-1)/(2 n_u)` can be the
/// optimal position: `j = (n+1)/2 - k` for every feasible count `k` of reports
/// at or left of the optimum. Requires odd `n`.
pub fn relevant_quantiles(n_r: usize, n_u: usize) -> Result<Vec<usize>> {
    let n = n_r + n_u;
    if n.is_multiple_of(2) {
        return Err(Error::Parity(format!(
            "relevant quantiles need odd n, got {n}"
        )));
    }
    if n_u == 0 {
        return Ok(Vec::new());
    }
    let half = n.div_ceil(2);
    let k_lo = half.saturating_sub(n_u);
    let k_hi = n_r.min((n - 1) / 2);
    Ok((k_lo..=k_hi).rev().map(|k| half - k).collect())
}

/// Target level `(2j-1)/(2 n_u)` of the `j`-th optimal phantom.
pub fn target_level(j: usize, n_u: usize) -> f64 {
    (2 * j - 1) as f64 / (2 * n_u) as f64
}
