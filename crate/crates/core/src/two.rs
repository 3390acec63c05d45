//! Two facilities of equal capacity `c`: reported agents are matched to a
//! facility, drawn agents are split between them by a threshold on their
//! position, and each facility serves at most `c` agents in expectation.

use serde::{Deserialize, Serialize};

use crate::distributions::PiecewiseUniform;
use crate::error::{Error, Result};
use crate::instance::Blend;
use crate::single::{lift_all_targets, optimal_phantoms, QueryPlan};

/// Two facilities with capacity `c` each, so `n = 2c` agents in total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TwoInstanceRepr", into = "TwoInstanceRepr")]
pub struct TwoInstance {
    c: usize,
    reports: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TwoInstanceRepr {
    c: usize,
    reports: Vec<f64>,
}

impl TryFrom<TwoInstanceRepr> for TwoInstance {
    type Error = Error;
    fn try_from(r: TwoInstanceRepr) -> Result<Self> {
        TwoInstance::new(r.c, r.reports)
    }
}

impl From<TwoInstance> for TwoInstanceRepr {
    fn from(i: TwoInstance) -> Self {
        TwoInstanceRepr {
            c: i.c,
            reports: i.reports,
        }
    }
}

impl TwoInstance {
    /// Sorts the reports; requires `c >= 1` and at most `2c` reports.
    pub fn new(c: usize, mut reports: Vec<f64>) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidInstance("capacity c must be positive".into()));
        }
        if reports.len() > 2 * c {
            return Err(Error::InvalidInstance(format!(
                "{} reports exceed the total capacity {}",
                reports.len(),
                2 * c
            )));
        }
        if reports.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInstance("reports must be finite".into()));
        }
        reports.sort_by(f64::total_cmp);
        Ok(Self { c, reports })
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn n(&self) -> usize {
        2 * self.c
    }

    pub fn n_r(&self) -> usize {
        self.reports.len()
    }

    pub fn n_u(&self) -> usize {
        self.n() - self.n_r()
    }

    /// Reports in nondecreasing order; matchings are indexed in this order.
    pub fn reports(&self) -> &[f64] {
        &self.reports
    }
}

/// Which facility serves an agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Facility {
    First,
    Second,
}

impl Serialize for Facility {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(match self {
            Facility::First => 1,
            Facility::Second => 2,
        })
    }
}

impl<'de> Deserialize<'de> for Facility {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match u8::deserialize(d)? {
            1 => Ok(Facility::First),
            2 => Ok(Facility::Second),
            other => Err(serde::de::Error::custom(format!(
                "facility index {other} is not 1 or 2"
            ))),
        }
    }
}

/// Facility positions, the matching of reported agents (in sorted report
/// order) and the threshold below which drawn agents use the first facility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoFacilityOutcome {
    #[serde(with = "pair")]
    pub y: (f64, f64),
    pub matching: Vec<Facility>,
    #[serde(rename = "z")]
    pub threshold_z: Option<f64>,
}

mod pair {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(y: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        [y.0, y.1].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let [a, b] = <[f64; 2]>::deserialize(d)?;
        Ok((a, b))
    }
}

impl TwoFacilityOutcome {
    pub fn y1(&self) -> f64 {
        self.y.0
    }

    pub fn y2(&self) -> f64 {
        self.y.1
    }

    /// Number of reported agents matched to each facility.
    pub fn loads(&self) -> (usize, usize) {
        let first = self
            .matching
            .iter()
            .filter(|&&f| f == Facility::First)
            .count();
        (first, self.matching.len() - first)
    }

    /// Capacity left for drawn agents at each facility.
    pub fn spares(&self, c: usize) -> (usize, usize) {
        let (a, b) = self.loads();
        (c.saturating_sub(a), c.saturating_sub(b))
    }

    /// Position of the facility serving reported agent `i` (sorted order).
    pub fn facility_of(&self, i: usize) -> f64 {
        match self.matching[i] {
            Facility::First => self.y.0,
            Facility::Second => self.y.1,
        }
    }
}

fn threshold(mu: &PiecewiseUniform, spare_first: usize, n_u: usize) -> Option<f64> {
    if n_u == 0 {
        return None;
    }
    let level = spare_first as f64 / n_u as f64;
    Some(mu.quantile_clamped(level).expect("level in [0, 1]"))
}

fn check_capacity(inst: &TwoInstance, matching: &[Facility]) -> Result<()> {
    if matching.len() != inst.n_r() {
        return Err(Error::Dimension {
            expected: inst.n_r(),
            got: matching.len(),
        });
    }
    let first = matching.iter().filter(|&&f| f == Facility::First).count();
    let second = matching.len() - first;
    if first > inst.c || second > inst.c {
        return Err(Error::InfeasibleOutcome(format!(
            "matching loads ({first}, {second}) exceed capacity {}",
            inst.c
        )));
    }
    Ok(())
}

/// Builds an outcome from positions and a matching, ordering the facilities so
/// that `y1 <= y2` and deriving the drawn-agent threshold from the spare capacity.
pub fn assemble(
    inst: &TwoInstance,
    mu: &PiecewiseUniform,
    y1: f64,
    y2: f64,
    mut matching: Vec<Facility>,
) -> Result<TwoFacilityOutcome> {
    check_capacity(inst, &matching)?;
    let y = if y1 <= y2 {
        (y1, y2)
    } else {
        for f in &mut matching {
            *f = match f {
                Facility::First => Facility::Second,
                Facility::Second => Facility::First,
            };
        }
        (y2, y1)
    };
    let first = matching.iter().filter(|&&f| f == Facility::First).count();
    let z = threshold(mu, inst.c - first, inst.n_u());
    Ok(TwoFacilityOutcome {
        y,
        matching,
        threshold_z: z,
    })
}

/// Expected social cost of an outcome: matched distances plus the drawn
/// agents, those at or below the threshold going to the first facility.
pub fn esc2(inst: &TwoInstance, mu: &PiecewiseUniform, out: &TwoFacilityOutcome) -> Result<f64> {
    check_capacity(inst, &out.matching)?;
    let matched: f64 = (0..inst.n_r())
        .map(|i| (inst.reports[i] - out.facility_of(i)).abs())
        .sum();
    let n_u = inst.n_u();
    if n_u == 0 {
        return Ok(matched);
    }
    let (spare_first, _) = out.spares(inst.c);
    let z = threshold(mu, spare_first, n_u).expect("n_u >= 1");
    let below = mu.partial_abs_dev(out.y.0, f64::NEG_INFINITY, z);
    let above = mu.partial_abs_dev(out.y.1, z, f64::INFINITY);
    Ok(matched + n_u as f64 * (below + above))
}

/// Each agent goes to the nearer facility (ties to the first); if one facility
/// would exceed `c`, the agents nearest the other facility move over.
pub fn nearest_assignment(reports: &[f64], y1: f64, y2: f64, c: usize) -> Vec<Facility> {
    let n_r = reports.len();
    let nearer_first = reports
        .iter()
        .filter(|&&x| (x - y1).abs() <= (x - y2).abs())
        .count();
    // With y1 <= y2 the agents nearer the first facility form a prefix of the sorted reports.
    let first = nearer_first.clamp(n_r.saturating_sub(c), c.min(n_r));
    (0..n_r)
        .map(|i| {
            if i < first {
                Facility::First
            } else {
                Facility::Second
            }
        })
        .collect()
}

/// Outcome serving the first `a` reported agents (sorted order) at the first
/// facility, with each facility at the median of the agents it serves in expectation.
fn prefix_split(inst: &TwoInstance, mu: &PiecewiseUniform, a: usize) -> Result<TwoFacilityOutcome> {
    let c = inst.c;
    let n_u = inst.n_u();
    let weight = n_u as f64;
    let cut = if n_u == 0 {
        0.0
    } else {
        (c - a) as f64 / weight
    };
    let half = c as f64 / 2.0;
    let first = Blend {
        points: &inst.reports[..a],
        mu,
        weight,
        band: (0.0, cut),
    };
    let second = Blend {
        points: &inst.reports[a..],
        mu,
        weight,
        band: (cut, 1.0),
    };
    let y1 = first.inf_reaching(half, false);
    let y2 = second.inf_reaching(half, false);
    let matching = (0..inst.n_r())
        .map(|i| {
            if i < a {
                Facility::First
            } else {
                Facility::Second
            }
        })
        .collect();
    assemble(inst, mu, y1, y2, matching)
}

/// Exact optimum. The split point is the median `z*` of the mixed CDF: agents
/// strictly left of it use the first facility, agents strictly right use the
/// second, and every feasible division of the agents at `z*` is tried. Each
/// facility sits at the median of the agents it serves in expectation, which
/// coincides with the first and third quartile of the mixed CDF whenever the
/// mixed CDF reaches 1/2 exactly at `z*`.
pub fn solve_optimal2(inst: &TwoInstance, mu: &PiecewiseUniform) -> TwoFacilityOutcome {
    let c = inst.c;
    let n_r = inst.n_r();
    let all = Blend {
        points: &inst.reports,
        mu,
        weight: inst.n_u() as f64,
        band: (0.0, 1.0),
    };
    let z_star = all.inf_reaching(c as f64, false);
    let left = inst.reports.partition_point(|&x| x < z_star);
    let at = inst.reports.partition_point(|&x| x <= z_star) - left;
    let mut best: Option<(f64, TwoFacilityOutcome)> = None;
    for b in (0..=at).rev() {
        let a = left + b;
        if a > c || n_r - a > c {
            continue;
        }
        let out = prefix_split(inst, mu, a).expect("feasible split");
        let cost = esc2(inst, mu, &out).expect("feasible split");
        if best.as_ref().is_none_or(|(bc, _)| cost < *bc) {
            best = Some((cost, out));
        }
    }
    best.expect("a feasible split always exists at the median")
        .1
}

fn merged(reports: &[f64], phantoms: Vec<f64>) -> Vec<f64> {
    let mut z = reports.to_vec();
    z.extend(phantoms);
    z.sort_by(f64::total_cmp);
    z
}

/// Quartiles of the merged vector `z`, capped by the reports `x_{n_r-c}`
/// (from below) and `x_{c+1}` (from above).
fn quartile_pair(inst: &TwoInstance, z: &[f64]) -> (f64, f64) {
    let c = inst.c;
    let n = inst.n();
    let x = &inst.reports;
    let y1 = x[inst.n_r() - c - 1].max(z[c.div_ceil(2) - 1]);
    let y2 = x[c].min(z[n - c / 2 - 1]);
    (y1, y2)
}

fn place(inst: &TwoInstance, mu: &PiecewiseUniform, y1: f64, y2: f64) -> TwoFacilityOutcome {
    let matching = nearest_assignment(&inst.reports, y1.min(y2), y1.max(y2), inst.c);
    assemble(inst, mu, y1, y2, matching).expect("nearest assignment respects capacity")
}

/// Fixed positions with nearest-facility matching; useful as a responder that
/// ignores the input.
pub fn fixed_placement(
    inst: &TwoInstance,
    mu: &PiecewiseUniform,
    y1: f64,
    y2: f64,
) -> TwoFacilityOutcome {
    place(inst, mu, y1, y2)
}

/// Few reports (`n_r <= c`): merge the reports with the optimal phantoms and
/// take the order statistics of rank `floor((c+1)/2)` and `n - floor(c/2)`.
pub fn pom(inst: &TwoInstance, mu: &PiecewiseUniform) -> Result<TwoFacilityOutcome> {
    let c = inst.c;
    if inst.n_r() > c {
        return Err(Error::Regime(format!(
            "POM needs n_r <= c, got n_r = {} > c = {c}",
            inst.n_r()
        )));
    }
    let z = merged(&inst.reports, optimal_phantoms(inst.n_u()).realize(mu));
    let y1 = z[c.div_ceil(2) - 1];
    let y2 = z[inst.n() - c / 2 - 1];
    Ok(place(inst, mu, y1, y2))
}

/// Many reports (`n_r > c`): quartiles of the reports merged with the optimal
/// phantoms, capped by the inner order statistics of the reports.
pub fn aqm(inst: &TwoInstance, mu: &PiecewiseUniform) -> Result<TwoFacilityOutcome> {
    if inst.n_r() <= inst.c {
        return Err(Error::Regime(format!(
            "AQM needs n_r > c, got n_r = {} <= c = {}",
            inst.n_r(),
            inst.c
        )));
    }
    let z = merged(&inst.reports, optimal_phantoms(inst.n_u()).realize(mu));
    let (y1, y2) = quartile_pair(inst, &z);
    Ok(place(inst, mu, y1, y2))
}

/// No distribution information (`n_r > c`): the two middle reports `x_c`, `x_{c+1}`.
pub fn igm(inst: &TwoInstance, mu: &PiecewiseUniform) -> Result<TwoFacilityOutcome> {
    let c = inst.c;
    if inst.n_r() <= c {
        return Err(Error::NoBoundedMechanism { c, n_r: inst.n_r() });
    }
    Ok(place(inst, mu, inst.reports[c - 1], inst.reports[c]))
}

/// Equally spaced quantile budget: phantoms from the lift of the plan
/// `(2s-1)/(2k)`; the extremes of the merged vector when `n_r <= c`, the
/// capped quartiles otherwise.
pub fn cem(inst: &TwoInstance, mu: &PiecewiseUniform, q: &QueryPlan) -> Result<TwoFacilityOutcome> {
    let k = q.k();
    let grid = QueryPlan::even_grid(k)?;
    if q.levels()
        .iter()
        .zip(grid.levels())
        .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::UnsupportedPlan(
            "only the equally spaced plan (2s-1)/(2k) keeps the endpoint rule truthful with bounded ratio".into(),
        ));
    }
    let z = merged(&inst.reports, lift_all_targets(q, inst.n_u()).realize(mu));
    let (y1, y2) = if inst.n_r() <= inst.c {
        (z[0], z[z.len() - 1])
    } else {
        quartile_pair(inst, &z)
    };
    Ok(place(inst, mu, y1, y2))
}
