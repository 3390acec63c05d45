//! Seeded generators of random instances: reports uniform in `[-10, 10]`,
//! distributions with a few disjoint segments and exponentially distributed
//! (then normalised) masses.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::distributions::{PiecewiseUniform, Segment};
use crate::instance::Instance;
use crate::two::TwoInstance;

/// Range of generated reports and segment endpoints.
pub const COORD_RANGE: (f64, f64) = (-10.0, 10.0);

/// Positions drawn uniformly from [`COORD_RANGE`]; with probability 1/4 the
/// whole vector is rounded to integers so that ties occur.
pub fn random_reports<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<f64> {
    let round = rng.random_bool(0.25);
    (0..count)
        .map(|_| {
            let x = rng.random_range(COORD_RANGE.0..=COORD_RANGE.1);
            if round {
                x.round()
            } else {
                x
            }
        })
        .collect()
}

/// A distribution with between 1 and `max_segments` disjoint segments.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, max_segments: usize) -> PiecewiseUniform {
    let m = rng.random_range(1..=max_segments.max(1));
    let mut ends: Vec<f64> = (0..2 * m)
        .map(|_| rng.random_range(COORD_RANGE.0..=COORD_RANGE.1))
        .collect();
    ends.sort_by(f64::total_cmp);
    let masses: Vec<f64> = (0..m)
        .map(|_| Exp1.sample(rng))
        .map(|x: f64| x.max(1e-9))
        .collect();
    let total: f64 = masses.iter().sum();
    let segments = (0..m)
        .map(|s| {
            let lo = ends[2 * s];
            // Keep segments non-degenerate without touching the next one.
            let hi = ends[2 * s + 1].max(lo + 1e-6);
            Segment::new(lo, hi, masses[s] / total)
        })
        .collect::<Vec<_>>();
    let segments = separate(segments);
    PiecewiseUniform::new(segments).expect("generated segments are valid")
}

/// Shifts segments right where widening made neighbours overlap.
fn separate(mut segments: Vec<Segment>) -> Vec<Segment> {
    for s in 1..segments.len() {
        let prev_hi = segments[s - 1].hi;
        if segments[s].lo < prev_hi {
            let width = segments[s].hi - segments[s].lo;
            segments[s].lo = prev_hi;
            segments[s].hi = prev_hi + width;
        }
    }
    segments
}

/// A single-facility instance with odd `n <= max_n` (`max_n` odd) and any number of reports.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_n: usize,
    max_segments: usize,
) -> (Instance, PiecewiseUniform) {
    let n = 2 * rng.random_range(0..=(max_n.max(1) - 1) / 2) + 1;
    let n_r = rng.random_range(0..=n);
    random_instance_with(rng, n, n_r, max_segments)
}

/// A single-facility instance with the given sizes.
pub fn random_instance_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    n_r: usize,
    max_segments: usize,
) -> (Instance, PiecewiseUniform) {
    let reports = random_reports(rng, n_r);
    let mu = random_distribution(rng, max_segments);
    (Instance::new(n, reports).expect("n_r <= n"), mu)
}

/// A two-facility instance with capacity `c` and `n_r` reports.
pub fn random_two_instance<R: Rng + ?Sized>(
    rng: &mut R,
    c: usize,
    n_r: usize,
    max_segments: usize,
) -> (TwoInstance, PiecewiseUniform) {
    let reports = random_reports(rng, n_r);
    let mu = random_distribution(rng, max_segments);
    (TwoInstance::new(c, reports).expect("n_r <= 2c"), mu)
}
