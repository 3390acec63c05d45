//! Absolutely continuous measures on the line built from uniform segments.
//!
//! Every quantity the solvers need (CDF, pseudo-inverse, expected distance to a
//! point, partial expectations over a half line) has an exact closed form for
//! this class, so no quadrature is involved anywhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Masses must sum to one within this tolerance after construction.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Inputs whose masses sum to one within this tolerance are renormalised.
pub const NORMALIZE_TOLERANCE: f64 = 1e-9;
/// Allowed overlap between consecutive segments caused by rounding.
const TOUCH_TOLERANCE: f64 = 1e-12;

/// One uniform piece: `mass` spread evenly over `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

impl Segment {
    pub fn new(lo: f64, hi: f64, mass: f64) -> Self {
        Self { lo, hi, mass }
    }

    fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// `mass * E|X - y|` for X uniform on the segment.
    fn weighted_abs_dev(&self, y: f64) -> f64 {
        let (a, b, m) = (self.lo, self.hi, self.mass);
        if y <= a {
            m * (self.midpoint() - y)
        } else if y >= b {
            m * (y - self.midpoint())
        } else {
            m * ((y - a).powi(2) + (b - y).powi(2)) / (2.0 * (b - a))
        }
    }

    /// The part of the segment inside `(a, b]`, with its mass scaled accordingly.
    fn clip(&self, a: f64, b: f64) -> Option<Segment> {
        let lo = self.lo.max(a);
        let hi = self.hi.min(b);
        if hi <= lo {
            return None;
        }
        let mass = self.mass * (hi - lo) / (self.hi - self.lo);
        Some(Segment { lo, hi, mass })
    }
}

/// A probability measure given as a finite mixture of uniform segments with
/// pairwise disjoint interiors.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseUniform {
    segments: Vec<Segment>,
    /// `ends[i]` is the total mass of segments `0..=i`; the last entry is exactly 1.
    ends: Vec<f64>,
}

impl PiecewiseUniform {
    /// Validates, sorts and (if needed) renormalises the segments.
    pub fn new(mut segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidDistribution("no segments".into()));
        }
        for s in &segments {
            if !(s.lo.is_finite() && s.hi.is_finite() && s.mass.is_finite()) {
                return Err(Error::InvalidDistribution(format!(
                    "non-finite segment {s:?}"
                )));
            }
            if s.lo >= s.hi {
                return Err(Error::InvalidDistribution(format!(
                    "segment [{}, {}] has non-positive width",
                    s.lo, s.hi
                )));
            }
            if s.mass <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "segment [{}, {}] has non-positive mass {}",
                    s.lo, s.hi, s.mass
                )));
            }
        }
        segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in segments.windows(2) {
            let scale = 1.0 + w[0].hi.abs().max(w[1].lo.abs());
            if w[0].hi > w[1].lo + TOUCH_TOLERANCE * scale {
                return Err(Error::InvalidDistribution(format!(
                    "segments [{}, {}] and [{}, {}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        let total: f64 = segments.iter().map(|s| s.mass).sum();
        if (total - 1.0).abs() > NORMALIZE_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        for s in &mut segments {
            s.mass /= total;
        }
        let mut ends = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for s in &segments {
            acc += s.mass;
            ends.push(acc);
        }
        *ends.last_mut().expect("non-empty") = 1.0;
        Ok(Self { segments, ends })
    }

    /// Builds from `(lo, hi, mass)` triples.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        Self::new(
            triples
                .iter()
                .map(|&(lo, hi, mass)| Segment::new(lo, hi, mass))
                .collect(),
        )
    }

    /// The uniform distribution on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![Segment::new(lo, hi, 1.0)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Smallest and largest point of the support.
    pub fn support(&self) -> (f64, f64) {
        (
            self.segments[0].lo,
            self.segments[self.segments.len() - 1].hi,
        )
    }

    /// Segment endpoints in increasing order (duplicates from touching segments kept).
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().flat_map(|s| [s.lo, s.hi]).collect()
    }

    fn mass_before(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.ends[i - 1]
        }
    }

    /// F(t) = mu((-inf, t]).
    pub fn cdf(&self, t: f64) -> f64 {
        let k = self.segments.partition_point(|s| s.hi <= t);
        let base = self.mass_before(k);
        match self.segments.get(k) {
            Some(s) if t > s.lo => base + s.mass * (t - s.lo) / (s.hi - s.lo),
            _ => base,
        }
    }

    /// Pseudo-inverse `inf{t : F(t) >= p}` for `p` in `(0, 1]`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!("quantile level {p} outside (0, 1]")));
        }
        Ok(self.lower_quantile_unchecked(p))
    }

    /// Like [`quantile`](Self::quantile) but also accepts `p = 0`, which maps
    /// to the left end of the support (the point below which there is no mass).
    pub fn quantile_clamped(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("quantile level {p} outside [0, 1]")));
        }
        if p == 0.0 {
            return Ok(self.segments[0].lo);
        }
        Ok(self.lower_quantile_unchecked(p))
    }

    fn lower_quantile_unchecked(&self, p: f64) -> f64 {
        let i = self.ends.partition_point(|&e| e < p);
        match self.segments.get(i) {
            Some(s) => {
                let frac = ((p - self.mass_before(i)) / s.mass).clamp(0.0, 1.0);
                s.lo + frac * (s.hi - s.lo)
            }
            None => self.support().1,
        }
    }

    /// `inf{t : F(t) > p}` for `p` in `[0, 1)`; on a flat stretch of the CDF
    /// this is the right end of the stretch. Returns the right end of the
    /// support for `p >= 1`.
    pub fn upper_quantile(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 0.0 {
            return Err(Error::Domain(format!("quantile level {p} below 0")));
        }
        let i = self.ends.partition_point(|&e| e <= p);
        Ok(match self.segments.get(i) {
            Some(s) => {
                let frac = ((p - self.mass_before(i)) / s.mass).clamp(0.0, 1.0);
                s.lo + frac * (s.hi - s.lo)
            }
            None => self.support().1,
        })
    }

    /// E|X - y| for X drawn from the distribution.
    pub fn mean_abs_dev(&self, y: f64) -> f64 {
        self.segments.iter().map(|s| s.weighted_abs_dev(y)).sum()
    }

    /// The unnormalised partial expectation `∫_{a < x <= b} |x - y| dmu(x)`.
    pub fn partial_abs_dev(&self, y: f64, a: f64, b: f64) -> f64 {
        self.segments
            .iter()
            .filter_map(|s| s.clip(a, b))
            .map(|s| s.weighted_abs_dev(y))
            .sum()
    }

    /// E[X].
    pub fn mean(&self) -> f64 {
        self.segments.iter().map(|s| s.mass * s.midpoint()).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct SegmentsRepr {
    segments: Vec<[f64; 3]>,
}

impl Serialize for PiecewiseUniform {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        SegmentsRepr {
            segments: self.segments.iter().map(|s| [s.lo, s.hi, s.mass]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PiecewiseUniform {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let repr = SegmentsRepr::deserialize(deserializer)?;
        let triples: Vec<(f64, f64, f64)> =
            repr.segments.iter().map(|s| (s[0], s[1], s[2])).collect();
        PiecewiseUniform::from_triples(&triples).map_err(serde::de::Error::custom)
    }
}

/// Where a realised segment sits relative to its atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `[p - 1/ell, p]`
    Left,
    /// `[p, p + 1/ell]`
    Right,
    /// `[p - 1/(2 ell), p + 1/(2 ell)]`
    Centered,
}

/// A sequence of distributions that concentrates its mass on finitely many
/// points as `ell` grows. Point masses are never represented directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct ConcentrationFamily {
    atoms: Vec<(f64, f64)>,
    side: Side,
}

#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    atoms: Vec<[f64; 2]>,
    side: Side,
}

impl TryFrom<FamilyRepr> for ConcentrationFamily {
    type Error = Error;
    fn try_from(r: FamilyRepr) -> Result<Self> {
        ConcentrationFamily::new(r.atoms.iter().map(|a| (a[0], a[1])).collect(), r.side)
    }
}

impl From<ConcentrationFamily> for FamilyRepr {
    fn from(f: ConcentrationFamily) -> Self {
        FamilyRepr {
            atoms: f.atoms.iter().map(|&(p, w)| [p, w]).collect(),
            side: f.side,
        }
    }
}

impl ConcentrationFamily {
    /// `atoms` are `(point, weight)` pairs; weights must be positive and sum to one.
    pub fn new(mut atoms: Vec<(f64, f64)>, side: Side) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidFamily("no atoms".into()));
        }
        if atoms
            .iter()
            .any(|&(p, w)| !p.is_finite() || !w.is_finite() || w <= 0.0)
        {
            return Err(Error::InvalidFamily(
                "atoms need finite points and positive weights".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > NORMALIZE_TOLERANCE {
            return Err(Error::InvalidFamily(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        for a in &mut atoms {
            a.1 /= total;
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { atoms, side })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// The member of the sequence whose segments have width `1/ell`.
    pub fn realize(&self, ell: u64) -> Result<PiecewiseUniform> {
        if ell == 0 {
            return Err(Error::Domain("ell must be at least 1".into()));
        }
        let width = 1.0 / ell as f64;
        let segments: Vec<Segment> = self
            .atoms
            .iter()
            .map(|&(p, w)| {
                let (lo, hi) = match self.side {
                    Side::Left => (p - width, p),
                    Side::Right => (p, p + width),
                    Side::Centered => (p - 0.5 * width, p + 0.5 * width),
                };
                Segment::new(lo, hi, w)
            })
            .collect();
        for w in segments.windows(2) {
            if w[0].hi > w[1].lo + TOUCH_TOLERANCE * (1.0 + w[1].lo.abs()) {
                return Err(Error::InvalidFamily(format!(
                    "at ell = {ell} the segments around {} and {} overlap",
                    w[0].hi, w[1].lo
                )));
            }
        }
        PiecewiseUniform::new(segments)
    }

    /// The limiting value of `E|X - y|` as `ell` grows.
    pub fn limit_abs_dev(&self, y: f64) -> f64 {
        self.atoms.iter().map(|&(p, w)| w * (p - y).abs()).sum()
    }
}
