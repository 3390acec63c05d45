//! Oracles for the integration tests. They re-derive costs and optima from the
//! segment data alone, by numerical integration and exhaustive search, without
//! calling the closed forms they check.

#![allow(dead_code)]

use aleatory_facility::distributions::PiecewiseUniform;

/// `(lo, hi, mass)` of every segment.
pub fn triples(mu: &PiecewiseUniform) -> Vec<(f64, f64, f64)> {
    mu.segments().iter().map(|s| (s.lo, s.hi, s.mass)).collect()
}

/// Composite Simpson rule with `panels` panels on `[a, b]`.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 2 * panels.max(1);
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// `E|X - y|` restricted to `X` in `(a, b]`, integrating the density piece by
/// piece and splitting at `y` so that every piece is polynomial.
pub fn abs_dev_between(mu: &[(f64, f64, f64)], y: f64, a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for &(lo, hi, mass) in mu {
        let density = mass / (hi - lo);
        let (l, h) = (lo.max(a), hi.min(b));
        if h <= l {
            continue;
        }
        let cuts = if y > l && y < h {
            vec![l, y, h]
        } else {
            vec![l, h]
        };
        for w in cuts.windows(2) {
            total += simpson(|x| density * (x - y).abs(), w[0], w[1], 4);
        }
    }
    total
}

pub fn abs_dev(mu: &[(f64, f64, f64)], y: f64) -> f64 {
    abs_dev_between(mu, y, f64::NEG_INFINITY, f64::INFINITY)
}

/// Single-facility cost computed from scratch.
pub fn direct_esc(reports: &[f64], n_u: usize, mu: &[(f64, f64, f64)], y: f64) -> f64 {
    reports.iter().map(|x| (x - y).abs()).sum::<f64>() + n_u as f64 * abs_dev(mu, y)
}

/// `inf{t : F(t) >= p}` by scanning the segments; level 0 gives the left end.
pub fn direct_quantile(mu: &[(f64, f64, f64)], p: f64) -> f64 {
    let mut acc = 0.0;
    for &(lo, hi, mass) in mu {
        if p <= 0.0 {
            return lo;
        }
        if acc + mass >= p - 1e-15 {
            let frac = ((p - acc) / mass).clamp(0.0, 1.0);
            return lo + frac * (hi - lo);
        }
        acc += mass;
    }
    mu.last().unwrap().1
}

/// Minimum of the single-facility cost: a coarse grid followed by golden
/// section refinement (the cost is convex in `y`).
pub fn minimize_esc(reports: &[f64], n_u: usize, mu: &[(f64, f64, f64)]) -> (f64, f64) {
    let mut lo = mu[0].0;
    let mut hi = mu.last().unwrap().1;
    for &x in reports {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let f = |y: f64| direct_esc(reports, n_u, mu, y);
    let steps = 400;
    let h = (hi - lo) / steps as f64;
    let mut best = lo;
    for i in 0..=steps {
        let y = lo + i as f64 * h;
        if f(y) < f(best) {
            best = y;
        }
    }
    let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let y = 0.5 * (a + b);
    (y, f(y))
}

/// Cost of a two-facility outcome: `first[i]` says whether sorted report `i`
/// uses the first facility; drawn agents up to the quantile of level
/// `spare_first / n_u` use the first facility.
pub fn direct_esc2(
    reports: &[f64],
    c: usize,
    mu: &[(f64, f64, f64)],
    y1: f64,
    y2: f64,
    first: &[bool],
) -> f64 {
    let n_u = 2 * c - reports.len();
    let matched: f64 = reports
        .iter()
        .zip(first)
        .map(|(x, &f)| if f { (x - y1).abs() } else { (x - y2).abs() })
        .sum();
    if n_u == 0 {
        return matched;
    }
    let load = first.iter().filter(|&&f| f).count();
    let z = direct_quantile(mu, (c - load) as f64 / n_u as f64);
    matched
        + n_u as f64
            * (abs_dev_between(mu, y1, f64::NEG_INFINITY, z)
                + abs_dev_between(mu, y2, z, f64::INFINITY))
}

/// Exhaustive two-facility optimum: every subset of reports for the first
/// facility (within capacity) and every pair of candidate positions drawn from
/// the reports and the quantiles of levels `j/(2 n_u)`.
pub fn brute_force_two(reports: &[f64], c: usize, mu: &[(f64, f64, f64)]) -> f64 {
    let n_r = reports.len();
    let n_u = 2 * c - n_r;
    let mut cands: Vec<f64> = reports.to_vec();
    for j in 0..=2 * n_u {
        if n_u > 0 {
            cands.push(direct_quantile(mu, j as f64 / (2 * n_u) as f64));
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n_r) {
        let first: Vec<bool> = (0..n_r).map(|i| mask >> i & 1 == 1).collect();
        let load = first.iter().filter(|&&f| f).count();
        if load > c || n_r - load > c {
            continue;
        }
        for (i, &y1) in cands.iter().enumerate() {
            for &y2 in &cands[i..] {
                best = best.min(direct_esc2(reports, c, mu, y1, y2, &first));
            }
        }
    }
    best
}
