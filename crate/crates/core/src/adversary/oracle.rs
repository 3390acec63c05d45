//! Brute-force minimisation of the single-facility cost.

use crate::distributions::PiecewiseUniform;
use crate::error::{Error, Result};
use crate::instance::{candidate_set, esc, Instance};

/// Scans `esc` over the grid `lo, lo + step, ..., hi` together with every
/// breakpoint inside the box (reports, segment endpoints and candidate
/// quantiles). Returns the best point and its cost; ties go to the leftmost point.
pub fn grid_oracle(
    inst: &Instance,
    mu: &PiecewiseUniform,
    bounds: (f64, f64),
    step: f64,
) -> Result<(f64, f64)> {
    let (lo, hi) = bounds;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!("empty box [{lo}, {hi}]")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain(format!(
            "grid step must be positive, got {step}"
        )));
    }
    let cells = ((hi - lo) / step).ceil() as usize;
    let mut points: Vec<f64> = (0..=cells)
        .map(|i| (lo + i as f64 * step).min(hi))
        .collect();
    points.extend(inst.reports());
    points.extend(mu.breakpoints());
    if inst.n_u() > 0 {
        points.extend(candidate_set(inst.n(), inst.n_u(), mu));
    }
    points.retain(|&p| (lo..=hi).contains(&p));
    points.sort_by(f64::total_cmp);
    let mut best = (points[0], esc(inst, mu, points[0]));
    for &p in &points[1..] {
        let v = esc(inst, mu, p);
        if v < best.1 {
            best = (p, v);
        }
    }
    Ok(best)
}
