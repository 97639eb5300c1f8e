//! Evaluation domains: the open triangle for the two-place functional
//! equation, margin-shrunk evaluation grids, and probability vectors.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default grid margin for certification runs.
pub const DEFAULT_MARGIN: f64 = 1e-3;
/// Default grid resolution for certification runs.
pub const DEFAULT_RESOLUTION: u32 = 200;
/// Tolerance on |sum - 1| for probability vectors.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A nonpositive exponent parameter. `Alpha` is the only way the crate
/// accepts an exponent, so `alpha <= 0` holds everywhere by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(v: f64) -> Result<Alpha> {
        if !v.is_finite() || v > 0.0 {
            return Err(Error::InvalidAlpha(v));
        }
        Ok(Alpha(v))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True at the degenerate exponent 0, where the log-form branch applies.
    #[inline]
    pub fn is_log(self) -> bool {
        self.0 == 0.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(v: f64) -> Result<Alpha> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

/// A deterministic lattice inside the open triangle {x > 0, y > 0, x + y < 1},
/// kept `margin` away from all three edges: every point satisfies
/// `x >= margin`, `y >= margin`, `x + y <= 1 - margin`.
///
/// Points are the images of (i/m, j/m) for i, j >= 1, i + j <= m under the
/// affine map u -> margin + u * (1 - 3 * margin), giving m*(m-1)/2 points.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainGrid {
    margin: f64,
    resolution: u32,
    points: Vec<(f64, f64)>,
}

impl DomainGrid {
    pub fn new(margin: f64, resolution: u32) -> Result<DomainGrid> {
        // margin = 0 is rejected too: the lattice row i + j = resolution
        // would land exactly on the hypotenuse x + y = 1.
        if !margin.is_finite() || margin <= 0.0 || 3.0 * margin >= 1.0 {
            return Err(Error::InfeasibleMargin(margin));
        }
        if resolution < 2 {
            return Err(Error::ResolutionTooSmall(resolution));
        }
        let m = resolution as usize;
        let scale = 1.0 - 3.0 * margin;
        let mut points = Vec::with_capacity(m * (m - 1) / 2);
        for i in 1..m {
            let x = margin + (i as f64 / m as f64) * scale;
            for j in 1..=(m - i) {
                let y = margin + (j as f64 / m as f64) * scale;
                points.push((x, y));
            }
        }
        Ok(DomainGrid {
            margin,
            resolution,
            points,
        })
    }

    #[inline]
    pub fn margin(&self) -> f64 {
        self.margin
    }

    #[inline]
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    #[inline]
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// The distinct first coordinates of the grid, ascending.
    pub fn xs(&self) -> Vec<f64> {
        let m = self.resolution as usize;
        let scale = 1.0 - 3.0 * self.margin;
        (1..m)
            .map(|i| self.margin + (i as f64 / m as f64) * scale)
            .collect()
    }

    /// Grid x-coordinates interleaved with the midpoints of consecutive
    /// pairs; the one-dimensional evaluation set for deviation suprema.
    pub fn xs_with_midpoints(&self) -> Vec<f64> {
        let xs = self.xs();
        let mut out = Vec::with_capacity(2 * xs.len() - 1);
        for (k, &x) in xs.iter().enumerate() {
            if k > 0 {
                out.push(0.5 * (xs[k - 1] + x));
            }
            out.push(x);
        }
        out
    }
}

/// A validated finite probability vector: n >= 2 strictly positive
/// components with |sum - 1| <= [`SUM_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(components: Vec<f64>) -> Result<ProbabilityVector> {
        if components.len() < 2 {
            return Err(Error::TooFewComponents(components.len()));
        }
        for (index, &value) in components.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite(value));
            }
            if value <= 0.0 {
                return Err(Error::NonpositiveComponent { index, value });
            }
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::SumNotOne {
                sum,
                tol: SUM_TOLERANCE,
            });
        }
        Ok(ProbabilityVector(components))
    }

    #[inline]
    pub fn components(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Draws `count` seeded vectors from the n-simplex with every component
/// >= `margin`. Identical arguments always produce identical output
/// (ChaCha8 keyed by `seed`; exponential spacings shrunk onto the margin
/// simplex).
pub fn simplex_sample(
    n: usize,
    count: usize,
    seed: u64,
    margin: f64,
) -> Result<Vec<ProbabilityVector>> {
    if n < 2 {
        return Err(Error::TooFewComponents(n));
    }
    if !margin.is_finite() || margin < 0.0 || (n as f64) * margin >= 1.0 {
        return Err(Error::SimplexMarginInfeasible { margin, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free = 1.0 - (n as f64) * margin;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut exps: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                (-(1.0 - u).ln()).max(f64::MIN_POSITIVE)
            })
            .collect();
        let total: f64 = exps.iter().sum();
        for e in &mut exps {
            *e = margin + free * (*e / total);
        }
        out.push(ProbabilityVector::new(exps)?);
    }
    Ok(out)
}
