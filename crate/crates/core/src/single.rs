//! Truthful single-facility mechanisms: the median of the reports and the
//! phantom quantile mechanisms, together with the lift of a query plan and
//! the quantile gap that drives their approximation ratio.

use serde::{Deserialize, Serialize};

use crate::distributions::PiecewiseUniform;
use crate::error::{Error, Result};
use crate::instance::{relevant_quantiles, target_level, Instance};

fn sorted_levels(mut levels: Vec<f64>) -> Result<Vec<f64>> {
    if levels.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err(Error::Domain("quantile levels must lie in [0, 1]".into()));
    }
    levels.sort_by(f64::total_cmp);
    Ok(levels)
}

/// The quantile levels a designer may query before seeing any report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LevelsRepr", into = "LevelsRepr")]
pub struct QueryPlan {
    levels: Vec<f64>,
}

/// Quantile levels at which the phantom points of a mechanism are placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LevelsRepr", into = "LevelsRepr")]
pub struct PhantomVector {
    levels: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LevelsRepr {
    levels: Vec<f64>,
}

impl TryFrom<LevelsRepr> for QueryPlan {
    type Error = Error;
    fn try_from(r: LevelsRepr) -> Result<Self> {
        QueryPlan::new(r.levels)
    }
}

impl From<QueryPlan> for LevelsRepr {
    fn from(q: QueryPlan) -> Self {
        LevelsRepr { levels: q.levels }
    }
}

impl TryFrom<LevelsRepr> for PhantomVector {
    type Error = Error;
    fn try_from(r: LevelsRepr) -> Result<Self> {
        PhantomVector::new(r.levels)
    }
}

impl From<PhantomVector> for LevelsRepr {
    fn from(w: PhantomVector) -> Self {
        LevelsRepr { levels: w.levels }
    }
}

impl QueryPlan {
    /// Sorts the levels; rejects an empty plan and levels outside `[0, 1]`.
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Domain(
                "a query plan needs at least one level".into(),
            ));
        }
        Ok(Self {
            levels: sorted_levels(levels)?,
        })
    }

    /// The equally spaced plan `(2s-1)/(2k)`, `s = 1..=k`.
    pub fn even_grid(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("k must be positive".into()));
        }
        Self::new((1..=k).map(|s| target_level(s, k)).collect())
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    /// Index of the level nearest to `target`; ties go to the lower level.
    fn nearest(&self, target: f64) -> usize {
        let mut best = 0;
        for (l, q) in self.levels.iter().enumerate().skip(1) {
            if (q - target).abs() < (self.levels[best] - target).abs() {
                best = l;
            }
        }
        best
    }
}

impl PhantomVector {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        Ok(Self {
            levels: sorted_levels(levels)?,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Phantom positions `F_mu^{-1}(w_j)`; level 0 maps to the left end of the support.
    pub fn realize(&self, mu: &PiecewiseUniform) -> Vec<f64> {
        self.levels
            .iter()
            .map(|&w| mu.quantile_clamped(w).expect("levels validated in [0, 1]"))
            .collect()
    }
}

/// Lower median: the element of rank `ceil(m/2)` of the sorted values.
pub fn median_of(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Domain("median of an empty vector".into()));
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s[v.len().div_ceil(2) - 1])
}

/// Places the facility at the median of the reports, ignoring the distribution.
pub fn median_mechanism(inst: &Instance) -> Result<f64> {
    if inst.n_r() == 0 {
        return Err(Error::NoReports);
    }
    median_of(inst.reports())
}

fn check_odd(n: usize) -> Result<()> {
    if n.is_multiple_of(2) {
        Err(Error::Parity(format!(
            "mechanisms are defined for odd n, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// Phantom quantile mechanism: the median of the reports together with the
/// `n_u` phantom points `F_mu^{-1}(w_j)`.
pub fn pqm(inst: &Instance, w: &PhantomVector, mu: &PiecewiseUniform) -> Result<f64> {
    if w.len() != inst.n_u() {
        return Err(Error::Dimension {
            expected: inst.n_u(),
            got: w.len(),
        });
    }
    check_odd(inst.n())?;
    let mut all = inst.reports().to_vec();
    all.extend(w.realize(mu));
    median_of(&all)
}

/// Levels `(2j-1)/(2 n_u)`: the phantoms that make the mechanism optimal.
pub fn optimal_phantoms(n_u: usize) -> PhantomVector {
    PhantomVector {
        levels: (1..=n_u).map(|j| target_level(j, n_u)).collect(),
    }
}

/// Assigns each target index in `targets` (sorted, within `1..=n_u`) to its
/// nearest plan level and fills the positions outside the target range with
/// the first and last assigned level, so that position `j` always holds the
/// level assigned to target `j`.
fn lift_over(q: &QueryPlan, targets: &[usize], n_u: usize) -> PhantomVector {
    if n_u == 0 || targets.is_empty() {
        return PhantomVector { levels: Vec::new() };
    }
    let assigned: Vec<f64> = targets
        .iter()
        .map(|&j| q.levels[q.nearest(target_level(j, n_u))])
        .collect();
    let (first, last) = (targets[0], targets[targets.len() - 1]);
    let mut levels = Vec::with_capacity(n_u);
    levels.extend(std::iter::repeat_n(assigned[0], first - 1));
    levels.extend(&assigned);
    levels.extend(std::iter::repeat_n(
        assigned[assigned.len() - 1],
        n_u - last,
    ));
    PhantomVector { levels }
}

/// The lift `L(q)`: an `n_u`-long phantom vector in which every relevant
/// target index carries its nearest plan level.
pub fn lift(q: &QueryPlan, n_r: usize, n_u: usize) -> Result<PhantomVector> {
    let targets = relevant_quantiles(n_r, n_u)?;
    Ok(lift_over(q, &targets, n_u))
}

/// Lift over every target index `1..=n_u`, used when no relevant-set
/// restriction applies (the two-facility mechanisms, where `n` is even).
pub fn lift_all_targets(q: &QueryPlan, n_u: usize) -> PhantomVector {
    let targets: Vec<usize> = (1..=n_u).collect();
    lift_over(q, &targets, n_u)
}

/// Index-aligned quantile gap: `max_{j in R} |w_j - (2j-1)/(2 n_u)|`.
pub fn delta(w: &PhantomVector, n_r: usize, n_u: usize) -> Result<f64> {
    if w.len() != n_u {
        return Err(Error::Dimension {
            expected: n_u,
            got: w.len(),
        });
    }
    let targets = relevant_quantiles(n_r, n_u)?;
    Ok(targets
        .iter()
        .map(|&j| (w.levels[j - 1] - target_level(j, n_u)).abs())
        .fold(0.0, f64::max))
}

/// Quantile gap of a plan: `max_{j in R} min_l |q_l - (2j-1)/(2 n_u)|`.
pub fn delta_lift(q: &QueryPlan, n_r: usize, n_u: usize) -> Result<f64> {
    let targets = relevant_quantiles(n_r, n_u)?;
    Ok(targets
        .iter()
        .map(|&j| {
            let t = target_level(j, n_u);
            q.levels
                .iter()
                .map(|l| (l - t).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max))
}

/// The `k`-level plan with the smallest quantile gap: the relevant targets are
/// cut into `k` contiguous blocks of near-equal size (earlier blocks take the
/// remainder) and each level sits at the midpoint of its block's extremes.
///
/// When `k > n_u` the full set of optimal phantom levels is returned; when `k`
/// exceeds the number of relevant targets each target gets its own level.
pub fn optimal_query_plan(k: usize, n_r: usize, n_u: usize) -> Result<QueryPlan> {
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    if n_u == 0 {
        return Err(Error::Domain("a query plan needs n_u >= 1".into()));
    }
    let targets = relevant_quantiles(n_r, n_u)?;
    if k > n_u {
        return QueryPlan::new(optimal_phantoms(n_u).levels);
    }
    let m = targets.len();
    let blocks = k.min(m);
    let (base, extra) = (m / blocks, m % blocks);
    let mut levels = Vec::with_capacity(blocks);
    let mut start = 0;
    for s in 0..blocks {
        let size = base + usize::from(s < extra);
        let lo = target_level(targets[start], n_u);
        let hi = target_level(targets[start + size - 1], n_u);
        levels.push(0.5 * (lo + hi));
        start += size;
    }
    QueryPlan::new(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_fills_outside_relevant_range() {
        // n_r = 2, n_u = 7: relevant indices are 3..=5 with targets 5/14, 7/14, 9/14.
        let q = QueryPlan::new(vec![0.1, 0.9]).unwrap();
        let w = lift(&q, 2, 7).unwrap();
        assert_eq!(w.len(), 7);
        assert_eq!(w.levels()[..4], [0.1; 4]);
        assert_eq!(w.levels()[4..], [0.9; 3]);
        assert_eq!(delta(&w, 2, 7).unwrap(), delta_lift(&q, 2, 7).unwrap());
    }

    #[test]
    fn pqm_checks_dimensions_and_parity() {
        let mu = PiecewiseUniform::uniform(0.0, 1.0).unwrap();
        let inst = Instance::new(5, vec![0.0, 1.0, 2.0]).unwrap();
        let w = PhantomVector::new(vec![0.5]).unwrap();
        assert_eq!(
            pqm(&inst, &w, &mu),
            Err(Error::Dimension {
                expected: 2,
                got: 1
            })
        );
        let even = Instance::new(4, vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            pqm(&even, &optimal_phantoms(2), &mu),
            Err(Error::Parity(_))
        ));
    }
}
