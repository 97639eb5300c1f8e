//! Deterministic test-data factories: exact solutions, seeded pointwise
//! perturbations, and a brute-force defect oracle kept as a separate
//! transcription so the two implementations can cross-check each other.

use crate::dd::Dd;
use crate::domain::{Alpha, DomainGrid};
use crate::equation::FunctionSpec;
use crate::error::{Error, Result};
use crate::infomeasure::{FamilyParams, MeasureFamily};

/// splitmix64-style avalanche; adjacent bit patterns decorrelate fully.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn keyed_hash(seed: u64, bits: u64) -> u64 {
    mix(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ mix(bits))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Hash-uniform values in [-delta, delta].
    Uniform,
    /// Full-amplitude comb: exactly +delta or -delta, sign from the hash
    /// parity of the argument bits. Stresses the defect harder than noise
    /// that averages out.
    Comb,
}

/// A deterministic pointwise perturbation: a keyed hash of the argument
/// bits mapped into [-delta, delta]. Being a function of the point itself
/// (not of a sample index), it stays well-defined at the composed
/// arguments y/(1-x), x/(1-y) the defect produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerturbationPlan {
    delta_bits: u64,
    seed: u64,
    kind: NoiseKind,
}

impl PerturbationPlan {
    pub fn new(delta: f64, seed: u64, kind: NoiseKind) -> Result<PerturbationPlan> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidNoiseBound(delta));
        }
        Ok(PerturbationPlan {
            delta_bits: delta.to_bits(),
            seed,
            kind,
        })
    }

    pub fn delta(&self) -> f64 {
        f64::from_bits(self.delta_bits)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    /// Noise value at x; |noise(x)| <= delta always.
    pub fn noise(&self, x: f64) -> f64 {
        let delta = self.delta();
        if delta == 0.0 {
            return 0.0;
        }
        let h = keyed_hash(self.seed, x.to_bits());
        match self.kind {
            NoiseKind::Uniform => {
                let u = (h >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0); // [0, 1)
                delta * (2.0 * u - 1.0)
            }
            NoiseKind::Comb => {
                if h & 1 == 0 {
                    delta
                } else {
                    -delta
                }
            }
        }
    }
}

/// The power-form exact solution a*x^alpha + b*(1-x)^alpha - b. Only valid
/// for alpha < 0; the alpha = 0 solution family is logarithmic.
pub fn make_exact_power(a: f64, b: f64, alpha: Alpha) -> Result<FunctionSpec> {
    if alpha.is_log() {
        return Err(Error::PowerNeedsNegativeAlpha);
    }
    if !a.is_finite() {
        return Err(Error::NonFinite(a));
    }
    if !b.is_finite() {
        return Err(Error::NonFinite(b));
    }
    Ok(FunctionSpec::Power { a, b })
}

/// The alpha = 0 exact solution lambda*ln(1-x) + c.
pub fn make_exact_log(lambda: f64, c: f64) -> FunctionSpec {
    debug_assert!(lambda.is_finite() && c.is_finite());
    FunctionSpec::Log { lambda, c }
}

/// Wraps a candidate with a deterministic perturbation.
pub fn perturb(spec: FunctionSpec, plan: PerturbationPlan) -> FunctionSpec {
    FunctionSpec::Perturbed {
        base: Box::new(spec),
        plan,
    }
}

/// The canonical measure family for the given parameters, supporting
/// levels 2..=max_n. The variant must match alpha's branch.
pub fn make_canonical_family(
    params: FamilyParams,
    alpha: Alpha,
    max_n: usize,
) -> Result<MeasureFamily> {
    if max_n < 2 {
        return Err(Error::MaxNTooSmall {
            need: 2,
            got: max_n,
        });
    }
    match (&params, alpha.is_log()) {
        (FamilyParams::PowerFamily { c, d }, false) => {
            for v in [*c, *d] {
                if !v.is_finite() {
                    return Err(Error::NonFinite(v));
                }
            }
        }
        (FamilyParams::LogFamily { c, lambda }, true) => {
            for v in [*c, *lambda] {
                if !v.is_finite() {
                    return Err(Error::NonFinite(v));
                }
            }
        }
        _ => return Err(Error::FamilyKindMismatch),
    }
    Ok(MeasureFamily::Canonical {
        alpha,
        params,
        max_n,
    })
}

/// Adds seeded per-level noise to a family: level n gets amplitude
/// deltas[n - 2], so the list covers every level 2..=max_n.
pub fn perturb_family(family: MeasureFamily, deltas: Vec<f64>, seed: u64) -> Result<MeasureFamily> {
    let need = family.max_n() - 1;
    if deltas.len() != need {
        return Err(Error::DeltaLengthMismatch {
            need,
            got: deltas.len(),
            max_n: family.max_n(),
        });
    }
    for &d in &deltas {
        if !d.is_finite() || d < 0.0 {
            return Err(Error::InvalidNoiseBound(d));
        }
    }
    Ok(MeasureFamily::Perturbed {
        base: Box::new(family),
        deltas,
        seed,
    })
}

/// Every grid defect value, produced by [`oracle_defect_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct DefectField {
    points: Vec<(f64, f64)>,
    values: Vec<f64>,
}

impl DefectField {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value at a grid point, matched bit for bit.
    pub fn value_at(&self, x: f64, y: f64) -> Option<f64> {
        self.points
            .iter()
            .position(|&p| p == (x, y))
            .map(|i| self.values[i])
    }
}

/// Re-derives the defect at every grid point from scratch: own function
/// evaluation, own interpolation, the textbook term order. Kept textually
/// independent of the equation module (they share only the double-double
/// arithmetic), so a transcription slip in either shows up as disagreement.
pub fn oracle_defect_scan(
    spec: &FunctionSpec,
    alpha: Alpha,
    grid: &DomainGrid,
) -> Result<DefectField> {
    let mut values = Vec::with_capacity(grid.points().len());
    for &(x, y) in grid.points() {
        let v = oracle_defect(spec, alpha, x, y).map_err(|e| Error::EvalAt {
            x,
            y,
            source: Box::new(e),
        })?;
        values.push(v);
    }
    Ok(DefectField {
        points: grid.points().to_vec(),
        values,
    })
}

fn oracle_defect(spec: &FunctionSpec, alpha: Alpha, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0 && x + y < 1.0) {
        return Err(Error::OutsideDomain { x, y });
    }
    let e = alpha.value();
    let xd = Dd::from_f64(x);
    let yd = Dd::from_f64(y);
    let rest_x = Dd::ONE.sub(xd);
    let rest_y = Dd::ONE.sub(yd);
    let first = oracle_eval(spec, alpha, xd)?;
    let second = rest_x.pow(e).mul(oracle_eval(spec, alpha, yd.div(rest_x))?);
    let third = oracle_eval(spec, alpha, yd)?;
    let fourth = rest_y.pow(e).mul(oracle_eval(spec, alpha, xd.div(rest_y))?);
    Ok(first.add(second).sub(third).sub(fourth).to_f64())
}

fn oracle_eval(spec: &FunctionSpec, alpha: Alpha, x: Dd) -> Result<Dd> {
    match spec {
        FunctionSpec::Power { a, b } => {
            let e = alpha.value();
            let head = Dd::from_f64(*a).mul(x.pow(e));
            let tail = Dd::from_f64(*b).mul(Dd::ONE.sub(x).pow(e));
            Ok(head.add(tail).sub(Dd::from_f64(*b)))
        }
        FunctionSpec::Log { lambda, c } => Ok(Dd::from_f64(*lambda)
            .mul(Dd::ONE.sub(x).ln())
            .add(Dd::from_f64(*c))),
        FunctionSpec::Tabulated { xs, values } => {
            let xf = x.to_f64();
            let n = xs.len();
            if xf < xs[0] || xf > xs[n - 1] {
                return Err(Error::OutsideTabulatedRange {
                    x: xf,
                    lo: xs[0],
                    hi: xs[n - 1],
                });
            }
            let mut k = n - 2;
            for i in 0..n - 1 {
                if xf < xs[i + 1] {
                    k = i;
                    break;
                }
            }
            if xf == xs[k] {
                return Ok(Dd::from_f64(values[k]));
            }
            if xf == xs[k + 1] {
                return Ok(Dd::from_f64(values[k + 1]));
            }
            let w = x
                .sub(Dd::from_f64(xs[k]))
                .div(Dd::from_f64(xs[k + 1]).sub(Dd::from_f64(xs[k])));
            Ok(Dd::ONE
                .sub(w)
                .mul(Dd::from_f64(values[k]))
                .add(w.mul(Dd::from_f64(values[k + 1]))))
        }
        FunctionSpec::Perturbed { base, plan } => {
            Ok(oracle_eval(base, alpha, x)?.add_f64(plan.noise(x.to_f64())))
        }
    }
}
