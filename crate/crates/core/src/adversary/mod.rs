//! Worst-case instance families, empirical ratio traces, brute-force oracles
//! and the truthfulness fuzzer shared by every mechanism.

mod families;
mod fuzz;
mod oracle;
pub mod random;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use families::{
    family_k_quantile, family_lifted_plan, family_median_info, family_two_facility_unbounded,
    family_zero_info, k_quantile_responder_ratio, KQuantileCase,
};
pub use fuzz::{
    manipulation_probe, truthfulness_fuzz, truthfulness_fuzz_with_probes, FuzzReport, Probe,
    Witness,
};
pub use oracle::grid_oracle;

use crate::distributions::PiecewiseUniform;
use crate::error::{Error, Result};
use crate::instance::{esc, solve_optimal, Instance};
use crate::single::{lift, median_mechanism, optimal_phantoms, pqm, PhantomVector, QueryPlan};
use crate::two::{
    aqm, cem, esc2, fixed_placement, igm, pom, solve_optimal2, TwoFacilityOutcome, TwoInstance,
};

/// Costs below this are treated as zero when forming ratios.
pub const ZERO_COST: f64 = 1e-12;

/// Default concentration schedule.
pub const DEFAULT_SCHEDULE: [u64; 4] = [10, 100, 1_000, 10_000];

/// A mechanism that can be evaluated on generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    /// Median of the reports; ignores the distribution.
    ReportMedian,
    /// Phantom quantile mechanism with explicit phantom levels.
    Phantoms {
        levels: Vec<f64>,
    },
    /// Phantom quantile mechanism built from the lift of a query plan.
    Plan {
        levels: Vec<f64>,
    },
    /// Phantom quantile mechanism with the optimal phantom levels.
    Full,
    /// Exact optimum of the single-facility cost (not truthful).
    Optimal,
    /// Mean of the reports (not truthful; used to check the fuzzer).
    Mean,
    /// A constant position.
    Fixed {
        y: f64,
    },
    /// Exact two-facility optimum (not truthful).
    Optimal2,
    Pom,
    Aqm,
    Igm,
    /// Capped endpoint mechanism with the equally spaced `k`-level plan.
    Cem {
        k: usize,
    },
    /// Constant pair of positions with nearest-facility matching.
    Fixed2 {
        y: [f64; 2],
    },
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mechanism::ReportMedian => write!(f, "report-median"),
            Mechanism::Phantoms { levels } => write!(f, "phantoms{levels:?}"),
            Mechanism::Plan { levels } => write!(f, "plan{levels:?}"),
            Mechanism::Full => write!(f, "full"),
            Mechanism::Optimal => write!(f, "optimal"),
            Mechanism::Mean => write!(f, "mean"),
            Mechanism::Fixed { y } => write!(f, "fixed({y})"),
            Mechanism::Optimal2 => write!(f, "optimal2"),
            Mechanism::Pom => write!(f, "pom"),
            Mechanism::Aqm => write!(f, "aqm"),
            Mechanism::Igm => write!(f, "igm"),
            Mechanism::Cem { k } => write!(f, "cem(k={k})"),
            Mechanism::Fixed2 { y } => write!(f, "fixed2({}, {})", y[0], y[1]),
        }
    }
}

impl Mechanism {
    pub fn is_two_facility(&self) -> bool {
        matches!(
            self,
            Mechanism::Optimal2
                | Mechanism::Pom
                | Mechanism::Aqm
                | Mechanism::Igm
                | Mechanism::Cem { .. }
                | Mechanism::Fixed2 { .. }
        )
    }

    /// Facility position for a single-facility instance.
    pub fn place(&self, inst: &Instance, mu: &PiecewiseUniform) -> Result<f64> {
        match self {
            Mechanism::ReportMedian => median_mechanism(inst),
            Mechanism::Phantoms { levels } => pqm(inst, &PhantomVector::new(levels.clone())?, mu),
            Mechanism::Plan { levels } => {
                let w = lift(&QueryPlan::new(levels.clone())?, inst.n_r(), inst.n_u())?;
                pqm(inst, &w, mu)
            }
            Mechanism::Full => pqm(inst, &optimal_phantoms(inst.n_u()), mu),
            Mechanism::Optimal => Ok(solve_optimal(inst, mu).canonical),
            Mechanism::Mean => {
                if inst.n_r() == 0 {
                    return Err(Error::NoReports);
                }
                Ok(inst.reports().iter().sum::<f64>() / inst.n_r() as f64)
            }
            Mechanism::Fixed { y } => Ok(*y),
            _ => Err(Error::Regime(format!("{self} places two facilities"))),
        }
    }

    /// Outcome for a two-facility instance.
    pub fn place_two(
        &self,
        inst: &TwoInstance,
        mu: &PiecewiseUniform,
    ) -> Result<TwoFacilityOutcome> {
        match self {
            Mechanism::Optimal2 => Ok(solve_optimal2(inst, mu)),
            Mechanism::Pom => pom(inst, mu),
            Mechanism::Aqm => aqm(inst, mu),
            Mechanism::Igm => igm(inst, mu),
            Mechanism::Cem { k } => cem(inst, mu, &QueryPlan::even_grid(*k)?),
            Mechanism::Fixed2 { y } => Ok(fixed_placement(inst, mu, y[0], y[1])),
            _ => Err(Error::Regime(format!("{self} places a single facility"))),
        }
    }
}

/// One generated input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "facilities", rename_all = "snake_case")]
pub enum Case {
    Single {
        instance: Instance,
        mu: PiecewiseUniform,
    },
    Two {
        instance: TwoInstance,
        mu: PiecewiseUniform,
    },
}

impl Case {
    /// Cost of the mechanism's outcome and the optimal cost.
    pub fn costs(&self, mech: &Mechanism) -> Result<(f64, f64)> {
        match self {
            Case::Single { instance, mu } => {
                let y = mech.place(instance, mu)?;
                let opt = solve_optimal(instance, mu).canonical;
                Ok((esc(instance, mu, y), esc(instance, mu, opt)))
            }
            Case::Two { instance, mu } => {
                let out = mech.place_two(instance, mu)?;
                let opt = solve_optimal2(instance, mu);
                Ok((esc2(instance, mu, &out)?, esc2(instance, mu, &opt)?))
            }
        }
    }
}

/// Ratio of a mechanism cost to an optimal cost; infinite when the optimum
/// vanishes but the mechanism does not.
pub fn cost_ratio(mechanism_cost: f64, optimal_cost: f64) -> f64 {
    if optimal_cost < ZERO_COST {
        if mechanism_cost < ZERO_COST {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        mechanism_cost / optimal_cost
    }
}

type Generator = dyn Fn(u64) -> Result<Case> + Send + Sync;

/// A sequence of instances indexed by the concentration parameter `ell`,
/// with the ratio the sequence is expected to approach.
#[derive(Clone)]
pub struct InstanceFamily {
    pub name: String,
    /// `None` for families along which the ratio grows without bound.
    pub limit_claim: Option<f64>,
    generator: Arc<Generator>,
}

impl fmt::Debug for InstanceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InstanceFamily")
            .field("name", &self.name)
            .field("limit_claim", &self.limit_claim)
            .finish_non_exhaustive()
    }
}

impl InstanceFamily {
    pub fn new(
        name: impl Into<String>,
        limit_claim: Option<f64>,
        generator: impl Fn(u64) -> Result<Case> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            limit_claim,
            generator: Arc::new(generator),
        }
    }

    pub fn generate(&self, ell: u64) -> Result<Case> {
        (self.generator)(ell)
    }
}

/// Ratios of mechanism cost to optimal cost along a concentration schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTrace {
    pub ells: Vec<u64>,
    pub ratios: Vec<f64>,
    pub limit_claim: Option<f64>,
}

impl RatioTrace {
    pub fn final_ratio(&self) -> f64 {
        *self.ratios.last().expect("traces are non-empty")
    }

    /// True when some ratio is the divergence sentinel (optimal cost zero,
    /// mechanism cost positive).
    pub fn has_divergence(&self) -> bool {
        self.ratios.iter().any(|r| r.is_infinite())
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.ratios.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.ratios.windows(2).all(|w| w[1] > w[0])
    }
}

/// Evaluates `mech` on `family` at every `ell` of `schedule`.
pub fn empirical_sar(
    mech: &Mechanism,
    family: &InstanceFamily,
    schedule: &[u64],
) -> Result<RatioTrace> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "the schedule must be non-empty and strictly increasing".into(),
        ));
    }
    let mut ratios = Vec::with_capacity(schedule.len());
    for &ell in schedule {
        let (m, o) = family.generate(ell)?.costs(mech)?;
        ratios.push(cost_ratio(m, o));
    }
    Ok(RatioTrace {
        ells: schedule.to_vec(),
        ratios,
        limit_claim: family.limit_claim,
    })
}
