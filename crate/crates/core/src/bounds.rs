//! Closed-form upper and lower bounds on the strong approximation ratio (the
//! worst case over reports and distributions of mechanism cost over optimal
//! cost) in each information regime.
//!
//! Every formula except the query-plan upper bound depends on integers only,
//! so the rational versions are the primary implementation and the floating
//! point versions convert them.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::single::{delta_lift, QueryPlan};

pub type Rational = Ratio<i64>;

/// What the designer knows about the distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Nothing: the mechanism sees only the reports.
    Zero,
    /// The median of the distribution.
    Median,
    /// `k` quantiles chosen in advance.
    #[serde(rename = "k")]
    KQuantile,
    /// As many quantiles as there are drawn agents.
    Full,
}

/// Lower-bound families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerRegime {
    Zero,
    Median,
    /// Mechanisms restricted to the equally spaced levels `(2s-1)/(2k)`; needs `k | n_u`.
    KQuantileEvenGrid,
}

fn r(num: i64, den: i64) -> Rational {
    Ratio::new(num, den)
}

fn check_sizes(n: usize, n_r: usize) -> Result<(i64, i64, i64)> {
    if n == 0 || n_r > n {
        return Err(Error::InvalidInstance(format!(
            "need 1 <= n and n_r <= n, got n = {n}, n_r = {n_r}"
        )));
    }
    if n.is_multiple_of(2) {
        return Err(Error::Parity(format!(
            "ratio bounds are derived for odd n, got {n}"
        )));
    }
    Ok((n as i64, n_r as i64, (n - n_r) as i64))
}

fn to_f64(x: Option<Rational>) -> f64 {
    match x {
        Some(v) => *v.numer() as f64 / *v.denom() as f64,
        None => f64::INFINITY,
    }
}

/// `1 + 4(1-λ)Δ / (1 - 2(1-λ)Δ)`: the ratio of the phantom mechanism whose
/// largest relevant quantile gap is `delta`. Infinite once the denominator
/// vanishes.
pub fn gap_ratio(lambda: f64, delta: f64) -> f64 {
    let g = (1.0 - lambda) * delta;
    let den = 1.0 - 2.0 * g;
    if den <= 0.0 {
        f64::INFINITY
    } else {
        1.0 + 4.0 * g / den
    }
}

fn zero_info(n: i64, n_r: i64) -> Option<Rational> {
    if n_r == 0 {
        None
    } else if n_r == n {
        // No drawn agents: the report median is optimal. The general formula
        // would give (n-1)/(n+1) here.
        Some(r(1, 1))
    } else if n_r % 2 == 1 {
        Some(r(2 * n - n_r - 1, n_r + 1))
    } else {
        Some(r(2 * n - n_r, n_r))
    }
}

fn small_lambda(n_r: i64, n_u: i64) -> Rational {
    // 1 + 2λ/(1-λ) = 1 + 2 n_r / n_u
    r(1, 1) + r(2 * n_r, n_u)
}

/// Exact upper bound; `None` means unbounded. The query-plan regime depends on
/// real-valued levels and is only available through [`sar_upper`].
pub fn sar_upper_exact(regime: Regime, n: usize, n_r: usize) -> Result<Option<Rational>> {
    let (n, n_r, n_u) = check_sizes(n, n_r)?;
    Ok(match regime {
        Regime::Zero => zero_info(n, n_r),
        Regime::Median => Some(if n_u <= 1 || n_u == n {
            r(1, 1)
        } else if 2 * n_r >= n {
            r(2 * n, n_r + 1).max(r(2, 1)) - 1
        } else {
            small_lambda(n_r, n_u)
        }),
        Regime::Full => Some(r(1, 1)),
        Regime::KQuantile => {
            return Err(Error::Unsupported(
                "the query-plan bound has no exact form".into(),
            ))
        }
    })
}

/// Upper bound on the ratio of the best known truthful mechanism in `regime`.
/// `q` is required for [`Regime::KQuantile`] and ignored otherwise.
pub fn sar_upper(regime: Regime, n: usize, n_r: usize, q: Option<&QueryPlan>) -> Result<f64> {
    match regime {
        Regime::KQuantile => {
            check_sizes(n, n_r)?;
            let q =
                q.ok_or_else(|| Error::Domain("the k-quantile bound needs a query plan".into()))?;
            let d = delta_lift(q, n_r, n - n_r)?;
            Ok(gap_ratio(n_r as f64 / n as f64, d))
        }
        _ => Ok(to_f64(sar_upper_exact(regime, n, n_r)?)),
    }
}

/// Exact lower bound; `None` means unbounded.
///
/// For the median regime, `asymptotic` selects the large-`n` form. The
/// even-grid regime has a rational form only when `k = n_u` (value 1);
/// otherwise use [`sar_lower`].
pub fn sar_lower_exact(
    regime: LowerRegime,
    n: usize,
    n_r: usize,
    k: Option<usize>,
    asymptotic: bool,
) -> Result<Option<Rational>> {
    let (n_i, n_r_i, n_u_i) = check_sizes(n, n_r)?;
    Ok(match regime {
        LowerRegime::Zero => zero_info(n_i, n_r_i),
        LowerRegime::Median => Some(median_lower(n_i, n_r_i, n_u_i, asymptotic)),
        LowerRegime::KQuantileEvenGrid => {
            let k = k.ok_or_else(|| Error::Domain("the even-grid bound needs k".into()))?;
            let sigma = grid_block(n_u_i, k)?;
            if sigma == 1 {
                // k = n_u: the grid is the optimal phantom set.
                return Ok(Some(r(1, 1)));
            }
            return Err(Error::Unsupported(
                "the even-grid bound is the root of a quadratic; use sar_lower or grid_construction".into(),
            ));
        }
    })
}

fn grid_block(n_u: i64, k: usize) -> Result<i64> {
    if k == 0 || n_u == 0 || n_u % k as i64 != 0 {
        return Err(Error::Unsupported(format!(
            "the even-grid bound needs k | n_u, got k = {k}, n_u = {n_u}"
        )));
    }
    Ok(n_u / k as i64)
}

fn median_lower(n: i64, n_r: i64, n_u: i64, asymptotic: bool) -> Rational {
    if 3 * n_r < n {
        return small_lambda(n_r, n_u);
    }
    if asymptotic {
        if n_u <= 1 {
            return r(1, 1);
        }
        return r(4 * n, n + n_r).max(r(2, 1)) - 1;
    }
    let f = (n + n_r) / 4;
    let a = r(n, f + 1);
    let b = r(2 * n, 2 * n - 2 * f - n_u);
    a.min(b).max(r(2, 1)) - 1
}

/// Lower bound on the ratio of any truthful mechanism in `regime`.
///
/// For the even-grid regime this is the value of [`grid_construction`].
pub fn sar_lower(
    regime: LowerRegime,
    n: usize,
    n_r: usize,
    k: Option<usize>,
    asymptotic: bool,
) -> Result<f64> {
    if let (LowerRegime::KQuantileEvenGrid, Some(k)) = (regime, k) {
        return Ok(grid_construction(n, n_r, k)?.value);
    }
    Ok(to_f64(sar_lower_exact(regime, n, n_r, k, asymptotic)?))
}

/// Worst-case construction against mechanisms that only see the quantiles at
/// the equally spaced levels `(2s-1)/(2k)`, in the limit of concentrated
/// distributions.
///
/// `at_zero` reports sit at 0 and the rest at 1. The drawn mass puts
/// `left` at 0, `right` at 1 and `middle = 1/k` in between, placed so that
/// every queried quantile is the same whether the middle block sits at 0 or
/// at 1. A truthful mechanism answering `y` keeps answering `y` after the
/// reports at 0 (or those at 1) move to `y`, and `value` is the smallest
/// ratio a responder can guarantee over those two moves, maximised over the
/// split of the reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConstruction {
    pub at_zero: usize,
    pub left: f64,
    pub middle: f64,
    pub right: f64,
    pub value: f64,
}

/// The construction for `(n, n_r, k)`; requires `k | n_u`.
pub fn grid_construction(n: usize, n_r: usize, k: usize) -> Result<GridConstruction> {
    let (_, n_r_i, n_u_i) = check_sizes(n, n_r)?;
    let sigma = grid_block(n_u_i, k)?;
    let kf = k as f64;
    // With k odd the level 1/2 is queried and pins the top of the middle block.
    let (left, right) = if k.is_multiple_of(2) {
        (0.5 - 0.5 / kf, 0.5 - 0.5 / kf)
    } else {
        (0.5 - 1.0 / kf, 0.5)
    };
    let middle = 1.0 / kf;
    let mut best = GridConstruction {
        at_zero: n_r.div_ceil(2),
        left,
        middle,
        right,
        value: 1.0,
    };
    if sigma == 1 {
        // k = n_u: the grid is the optimal phantom set and the bound is 1.
        return Ok(best);
    }
    let n_u = n_u_i as f64;
    // Scan splits from the balanced one outwards so that ties keep it.
    let mut splits: Vec<usize> = (0..=n_r_i as usize).collect();
    splits.sort_by_key(|&l| (2 * l).abs_diff(n_r_i as usize));
    for l in splits {
        let v = responder_minimax(
            l as f64,
            (n_r_i as usize - l) as f64,
            n_u * left,
            n_u * middle,
            n_u * right,
        );
        if v > best.value + 1e-12 {
            best.at_zero = l;
            best.value = v;
        }
    }
    Ok(best)
}

/// `a + b y`
#[derive(Clone, Copy)]
struct Affine(f64, f64);

impl Affine {
    fn at(self, y: f64) -> f64 {
        self.0 + self.1 * y
    }
}

/// Cost of a facility at `p` for weighted points `(position, weight)`, where a
/// position is either fixed or the responder `y`; affine in `y` for fixed `p`.
fn cost_at(points: &[(Option<f64>, f64)], p: Option<f64>) -> Affine {
    // |u - v| with u, v in {0, 1, y} and y in [0, 1] is affine in y.
    let dist = |u: Option<f64>, v: Option<f64>| match (u, v) {
        (Some(a), Some(b)) => Affine((a - b).abs(), 0.0),
        (None, None) => Affine(0.0, 0.0),
        (Some(a), None) | (None, Some(a)) => {
            if a <= 0.0 {
                Affine(-a, 1.0)
            } else {
                Affine(a, -1.0)
            }
        }
    };
    points.iter().fold(Affine(0.0, 0.0), |acc, &(q, w)| {
        let d = dist(q, p);
        Affine(acc.0 + w * d.0, acc.1 + w * d.1)
    })
}

/// `min_{y in [0,1]} max(R_left(y), R_right(y))` where `R_left` is the ratio
/// of a facility at `y` once the `l` reports at 0 have moved to `y` and the
/// middle block sits at 1, and `R_right` the mirror move with the block at 0.
fn responder_minimax(l: f64, r: f64, left: f64, middle: f64, right: f64) -> f64 {
    let moved_left = [
        (None, l),
        (Some(0.0), left),
        (Some(1.0), r + middle + right),
    ];
    let moved_right = [
        (Some(0.0), l + left + middle),
        (None, r),
        (Some(1.0), right),
    ];
    // Each ratio is the largest of mech / cost(p) over the optimum's
    // candidate positions p in {0, 1, y}; every piece is linear-fractional.
    let mut pieces = Vec::new();
    for pts in [&moved_left[..], &moved_right[..]] {
        let mech = cost_at(pts, None);
        for p in [Some(0.0), Some(1.0)] {
            pieces.push((mech, cost_at(pts, p)));
        }
    }
    let worst = |y: f64| {
        pieces.iter().fold(1.0f64, |m, &(num, den)| {
            let d = den.at(y);
            let v = if d > 1e-15 {
                num.at(y) / d
            } else if num.at(y) > 1e-15 {
                f64::INFINITY
            } else {
                1.0
            };
            m.max(v)
        })
    };
    // The maximum of monotone linear-fractional pieces is minimised at an
    // endpoint or where two pieces cross.
    let mut candidates = vec![0.0, 1.0];
    for (i, &(n1, d1)) in pieces.iter().enumerate() {
        for &(n2, d2) in &pieces[i + 1..] {
            // (n1.0 + n1.1 y)(d2.0 + d2.1 y) = (n2.0 + n2.1 y)(d1.0 + d1.1 y)
            let qa = n1.1 * d2.1 - n2.1 * d1.1;
            let qb = n1.0 * d2.1 + n1.1 * d2.0 - n2.0 * d1.1 - n2.1 * d1.0;
            let qc = n1.0 * d2.0 - n2.0 * d1.0;
            if qa.abs() < 1e-14 {
                if qb.abs() > 1e-14 {
                    candidates.push(-qc / qb);
                }
            } else {
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    candidates.push((-qb + sq) / (2.0 * qa));
                    candidates.push((-qb - sq) / (2.0 * qa));
                }
            }
        }
    }
    candidates
        .into_iter()
        .filter(|y| (0.0..=1.0).contains(y))
        .map(worst)
        .fold(f64::INFINITY, f64::min)
}

/// The closed form `1 + 2σ/(n + n_u - 2σ)` stated for the even-`k` grid
/// bound. It can exceed the ratio that the lifted equally spaced plan
/// achieves, so [`sar_lower`] does not use it; it is kept for comparison.
pub fn k_grid_lower_closed_form(n: usize, n_r: usize, k: usize) -> Result<f64> {
    let (n, _, n_u) = check_sizes(n, n_r)?;
    let sigma = grid_block(n_u, k)? as f64;
    Ok(1.0 + 2.0 * sigma / (n as f64 + n_u as f64 - 2.0 * sigma))
}

/// Summary-table forms of the `k`-quantile bounds with `σ = n_u / k`:
/// `(upper, lower) = (1 + 2(1-λ)(σ-1)/(n_u - (1-λ)(σ-1)), 1 + 2(1-λ)σ/((1+λ)n_u + (1-λ)σ))`.
pub fn table_k_quantile_bounds(n: usize, n_r: usize, k: usize) -> Result<(f64, f64)> {
    let (n, n_r, n_u) = check_sizes(n, n_r)?;
    if k == 0 || n_u == 0 {
        return Err(Error::Domain("need k >= 1 and n_u >= 1".into()));
    }
    let lambda = n_r as f64 / n as f64;
    let n_u = n_u as f64;
    let sigma = n_u / k as f64;
    let upper = 1.0 + 2.0 * (1.0 - lambda) * (sigma - 1.0) / (n_u - (1.0 - lambda) * (sigma - 1.0));
    let lower =
        1.0 + 2.0 * (1.0 - lambda) * sigma / ((1.0 + lambda) * n_u + (1.0 - lambda) * sigma);
    Ok((upper, lower))
}
