//! Worst-case instance sequences. Each family concentrates its drawn-agent
//! distribution on a few points as `ell` grows, so that the ratio of a given
//! mechanism approaches the value attached as `limit_claim`.

use serde::{Deserialize, Serialize};

use super::{cost_ratio, Case, InstanceFamily, Mechanism};
use crate::bounds::{gap_ratio, grid_construction, sar_lower, sar_upper, LowerRegime, Regime};
use crate::distributions::{ConcentrationFamily, PiecewiseUniform, Side};
use crate::error::{Error, Result};
use crate::instance::{relevant_quantiles, target_level, Instance};
use crate::single::{delta_lift, lift, QueryPlan};
use crate::two::TwoInstance;

fn check_odd(n: usize, n_r: usize) -> Result<()> {
    if n_r > n {
        return Err(Error::InvalidInstance(format!(
            "n_r = {n_r} exceeds n = {n}"
        )));
    }
    if n.is_multiple_of(2) {
        return Err(Error::Parity(format!(
            "single-facility families need odd n, got {n}"
        )));
    }
    Ok(())
}

fn split_reports(at_zero: usize, at_one: usize) -> Vec<f64> {
    let mut v = vec![0.0; at_zero];
    v.extend(std::iter::repeat_n(1.0, at_one));
    v
}

/// Mass `a` just left of 0 and `1 - a` just right of 1, on segments of width `1/ell`.
fn two_clusters(a: f64, ell: u64) -> Result<PiecewiseUniform> {
    let w = 1.0 / ell as f64;
    PiecewiseUniform::from_triples(&[(-w, 0.0, a), (1.0, 1.0 + w, 1.0 - a)])
}

/// Half of the reports (rounded up) at 0, the rest at 1, and the drawn agents
/// concentrating at 1. The report median stays at 0 while the optimum moves to 1.
pub fn family_zero_info(n: usize, n_r: usize) -> Result<InstanceFamily> {
    check_odd(n, n_r)?;
    if n_r == 0 {
        return Err(Error::NoReports);
    }
    let limit = sar_lower(LowerRegime::Zero, n, n_r, None, false)?;
    let at_zero = n_r.div_ceil(2);
    let conc = ConcentrationFamily::new(vec![(1.0, 1.0)], Side::Left)?;
    Ok(InstanceFamily::new(
        format!("zero_info(n={n}, n_r={n_r})"),
        Some(limit),
        move |ell| {
            Ok(Case::Single {
                instance: Instance::new(n, split_reports(at_zero, n_r - at_zero))?,
                mu: conc.realize(ell)?,
            })
        },
    ))
}

/// Family for the all-median phantom mechanism: up to `(n-1)/2` reports at 0,
/// the rest at 1, and drawn agents split between 0 and 1 with the weight at 0
/// rising towards 1/2 from below. The distribution median stays at 1, so the
/// mechanism sits at 1, while the optimum moves to 0.
///
/// The weight at 0 is `1/2 - 1/(2(ell+1))`. Keeping it fixed at `1/(2 n_u)`
/// would leave the mechanism and the optimum at the same point.
pub fn family_median_info(n: usize, n_r: usize) -> Result<InstanceFamily> {
    check_odd(n, n_r)?;
    let n_u = n - n_r;
    if n_u < 2 || n_u + 2 > n {
        return Err(Error::Regime(format!(
            "the median-information family needs 2 <= n_u <= n - 2, got n_u = {n_u}"
        )));
    }
    let limit = sar_upper(Regime::Median, n, n_r, None)?;
    let at_zero = ((n - 1) / 2).min(n_r);
    Ok(InstanceFamily::new(
        format!("median_info(n={n}, n_r={n_r})"),
        Some(limit),
        move |ell| {
            if ell == 0 {
                return Err(Error::Domain("ell must be at least 1".into()));
            }
            let a = 0.5 - 0.5 / (ell + 1) as f64;
            Ok(Case::Single {
                instance: Instance::new(n, split_reports(at_zero, n_r - at_zero))?,
                mu: two_clusters(a, ell)?,
            })
        },
    ))
}

/// Which member of the `k`-quantile construction to generate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum KQuantileCase {
    /// Reports split between 0 and 1; the middle block of mass is spread over `[0, 1]`.
    Base,
    /// The reports at 0 moved to `y`; the middle block sits just left of 1.
    MoveLeft { y: f64 },
    /// The reports at 1 moved to `y`; the middle block sits just right of 0.
    MoveRight { y: f64 },
}

fn k_quantile_case(n: usize, n_r: usize, k: usize, case: KQuantileCase, ell: u64) -> Result<Case> {
    if ell < 2 {
        return Err(Error::InvalidFamily(
            "the k-quantile construction needs ell >= 2".into(),
        ));
    }
    let g = grid_construction(n, n_r, k)?;
    let w = 1.0 / ell as f64;
    let (low, high) = (g.at_zero, n_r - g.at_zero);
    let with_middle = |lo: f64, hi: f64| {
        vec![
            (-w, 0.0, g.left),
            (lo, hi, g.middle),
            (1.0, 1.0 + w, g.right),
        ]
    };
    let (reports, segments) = match case {
        KQuantileCase::Base => (split_reports(low, high), with_middle(0.0, 1.0)),
        KQuantileCase::MoveLeft { y } => {
            let mut r = vec![y; low];
            r.extend(std::iter::repeat_n(1.0, high));
            (r, with_middle(1.0 - w, 1.0))
        }
        KQuantileCase::MoveRight { y } => {
            let mut r = vec![0.0; low];
            r.extend(std::iter::repeat_n(y, high));
            // A sliver of the middle block stays below 1 so that the queried
            // quantile at the top of the block is still 1.
            let sliver = g.middle / (ell + 1) as f64;
            (
                r,
                vec![
                    (-w, 0.0, g.left),
                    (0.0, w, g.middle - sliver),
                    (1.0 - w, 1.0, sliver),
                    (1.0, 1.0 + w, g.right),
                ],
            )
        }
    };
    Ok(Case::Single {
        instance: Instance::new(n, reports)?,
        mu: PiecewiseUniform::from_triples(&segments)?,
    })
}

fn check_k_quantile(n: usize, n_r: usize, k: usize) -> Result<()> {
    check_odd(n, n_r)?;
    let n_u = n - n_r;
    if k < 2 || n_u == 0 || !n_u.is_multiple_of(k) {
        return Err(Error::Unsupported(format!(
            "the construction needs k >= 2 and k | n_u, got k = {k}, n_u = {n_u}"
        )));
    }
    Ok(())
}

/// Construction against mechanisms that only know the equally spaced quantiles
/// `(2s-1)/(2k)`; see [`grid_construction`]. Every case returns the same
/// queried quantiles, so such a mechanism cannot tell them apart.
/// `limit_claim` is the construction's value: the ratio the best responder
/// position still suffers in the worse of the two moved cases.
pub fn family_k_quantile(
    n: usize,
    n_r: usize,
    k: usize,
    case: KQuantileCase,
) -> Result<InstanceFamily> {
    check_k_quantile(n, n_r, k)?;
    let limit = sar_lower(LowerRegime::KQuantileEvenGrid, n, n_r, Some(k), false)?;
    Ok(InstanceFamily::new(
        format!("k_quantile(n={n}, n_r={n_r}, k={k}, {case:?})"),
        Some(limit),
        move |ell| k_quantile_case(n, n_r, k, case, ell),
    ))
}

/// Ratio forced on a mechanism that answers `y` in the `k`-quantile
/// construction: the worse of the two moved cases at concentration `ell`.
pub fn k_quantile_responder_ratio(n: usize, n_r: usize, k: usize, y: f64, ell: u64) -> Result<f64> {
    check_k_quantile(n, n_r, k)?;
    let mech = Mechanism::Fixed { y };
    let mut worst: f64 = 0.0;
    for case in [
        KQuantileCase::MoveLeft { y },
        KQuantileCase::MoveRight { y },
    ] {
        let (m, o) = k_quantile_case(n, n_r, k, case, ell)?.costs(&mech)?;
        worst = worst.max(cost_ratio(m, o));
    }
    Ok(worst)
}

/// Family for the phantom mechanism built from the lift of `q`, at the target
/// index with the largest gap between the lifted level and its target.
///
/// With lifted level `w_j` below its target, mass `w_j` sits just left of 0
/// and the rest just right of 1; enough reports at 0 pull the mechanism to 0
/// while the optimum is at 1. With `w_j` above its target the mass left of 0
/// is slightly less than `w_j`, the mechanism lands at 1 and the optimum at 0.
/// Either way the ratio tends to `gap_ratio(lambda, delta_lift(q))`.
pub fn family_lifted_plan(n: usize, n_r: usize, q: &QueryPlan) -> Result<InstanceFamily> {
    check_odd(n, n_r)?;
    let n_u = n - n_r;
    if n_u == 0 {
        return Err(Error::Domain(
            "the lifted-plan family needs n_u >= 1".into(),
        ));
    }
    let d = delta_lift(q, n_r, n_u)?;
    let limit = gap_ratio(n_r as f64 / n as f64, d);
    let w = lift(q, n_r, n_u)?.levels().to_vec();
    let targets = relevant_quantiles(n_r, n_u)?;
    let mut j = targets[0];
    for &t in &targets {
        if (w[t - 1] - target_level(t, n_u)).abs() > (w[j - 1] - target_level(j, n_u)).abs() {
            j = t;
        }
    }
    let wj = w[j - 1];
    let gap = (wj - target_level(j, n_u)).abs();
    let name = format!("lifted_plan(n={n}, n_r={n_r}, q={:?})", q.levels());

    if gap == 0.0 {
        // The lifted levels hit every relevant target: the mechanism is optimal.
        return Ok(InstanceFamily::new(name, Some(limit), move |ell| {
            let far = ConcentrationFamily::new(vec![(1.0, 1.0)], Side::Right)?;
            Ok(Case::Single {
                instance: Instance::new(n, vec![0.0; n_r])?,
                mu: far.realize(ell)?,
            })
        }));
    }

    let below = wj < target_level(j, n_u);
    let next_up = w.iter().copied().filter(|&v| v > wj).fold(1.0, f64::min);
    let next_down = w.iter().copied().filter(|&v| v < wj).fold(0.0, f64::max);
    let half_n = n.div_ceil(2) as i64;
    Ok(InstanceFamily::new(name, Some(limit), move |ell| {
        if ell == 0 {
            return Err(Error::Domain("ell must be at least 1".into()));
        }
        let eps_cap = (1.0 / ell as f64).min(0.5 * gap);
        let (alpha, p0, k0) = if below {
            // A level of exactly 0 would map to the left end of the support,
            // so it needs a little mass of its own.
            let alpha = if wj > 0.0 {
                wj
            } else {
                eps_cap.min(0.5 * next_up)
            };
            let p0 = w.iter().filter(|&&v| v <= alpha).count() as i64;
            (alpha, p0, half_n - p0)
        } else {
            let alpha = wj - eps_cap.min(0.5 * (wj - next_down));
            let p0 = w.iter().filter(|&&v| v < wj).count() as i64;
            (alpha, p0, half_n - 1 - p0)
        };
        debug_assert!(p0 >= 0);
        let k0 = k0.clamp(0, n_r as i64) as usize;
        Ok(Case::Single {
            instance: Instance::new(n, split_reports(k0, n_r - k0))?,
            mu: two_clusters(alpha, ell)?,
        })
    }))
}

/// Every report at 1 and the drawn agents concentrating at 0 (weight `c/n_u`)
/// and 1 (the rest). The optimum serves each cluster with its own facility and
/// its cost vanishes; a placement that ignores the distribution keeps a
/// positive cost, so its ratio grows without bound.
pub fn family_two_facility_unbounded(c: usize, n_r: usize) -> Result<InstanceFamily> {
    if c == 0 {
        return Err(Error::InvalidInstance("capacity c must be positive".into()));
    }
    if n_r > c {
        return Err(Error::Regime(format!(
            "the unbounded family needs n_r <= c, got n_r = {n_r} > c = {c}; the inner-gap mechanism is bounded there"
        )));
    }
    let n_u = 2 * c - n_r;
    let mut atoms = vec![(0.0, c as f64 / n_u as f64)];
    if n_u > c {
        atoms.push((1.0, (n_u - c) as f64 / n_u as f64));
    }
    let conc = ConcentrationFamily::new(atoms, Side::Centered)?;
    Ok(InstanceFamily::new(
        format!("two_facility_unbounded(c={c}, n_r={n_r})"),
        None,
        move |ell| {
            Ok(Case::Two {
                instance: TwoInstance::new(c, vec![1.0; n_r])?,
                mu: conc.realize(ell)?,
            })
        },
    ))
}
