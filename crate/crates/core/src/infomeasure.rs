//! Degree-alpha entropies, sequences of set-of-probabilities measures with
//! a branching-recursion structure, and inductive stability certificates
//! that lift the two-place certification to every level n.
//!
//! A measure family assigns to each level n a function on validated
//! probability vectors of length n. The canonical family J is built from
//! the degree-alpha entropy plus a first-component term; the certifier
//! measures how far an arbitrary family is from recursive/semisymmetric
//! and bounds its distance to the nearest J.

use crate::approximant::{
    classify, default_log_fit_grid, fit_log_core, fit_power_core, fit_probe_args, render_json,
    snap, CertStatus, DdEval,
};
use crate::dd::Dd;
use crate::domain::{simplex_sample, Alpha, ProbabilityVector};
use crate::equation::Provenance;
use crate::error::{Error, Result};
use crate::generators::keyed_hash;
use serde_json::{json, Map, Value};

/// Per-level multiplier of the measured 2 eps_2 + eps_1 in the weighted
/// bound term for alpha < 0; the alpha = 0 branch uses 63 (n - 1) instead.
const LEVEL_CONSTANT_NEGATIVE: f64 = 15.0;
const LEVEL_CONSTANT_LOG: f64 = 63.0;

/// Degree-alpha entropy of a probability vector:
/// (2^(1-alpha) - 1)^(-1) (sum p_i^alpha - 1).
/// At alpha = 0 this is exactly n - 1 (integer arithmetic survives the
/// double-double path untouched).
pub fn entropy_degree_alpha(p: &ProbabilityVector, alpha: Alpha) -> f64 {
    entropy_dd(alpha, p.components()).to_f64()
}

pub(crate) fn entropy_dd(alpha: Alpha, p: &[f64]) -> Dd {
    let e = alpha.value();
    let mut sum = Dd::ZERO;
    for &pi in p {
        sum = sum.add(Dd::from_f64(pi).pow(e));
    }
    // 2^(1-alpha) - 1 computed as 2 * 2^(-alpha) - 1; exactly 1 at alpha = 0
    let den = Dd::from_f64(2.0).pow(-e).mul_f64(2.0).sub_f64(1.0);
    sum.sub_f64(1.0).div(den)
}

/// Parameters of the canonical family at one alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyParams {
    /// J_n(p) = c * H_n(p) + d * (p_1^alpha - 1), alpha < 0.
    PowerFamily { c: f64, d: f64 },
    /// J_n(p) = c * (n - 1) + lambda * ln(p_1), alpha = 0.
    LogFamily { c: f64, lambda: f64 },
}

/// Evaluates the canonical family at one level.
pub fn canonical_family_eval(
    params: &FamilyParams,
    alpha: Alpha,
    p: &ProbabilityVector,
) -> Result<f64> {
    Ok(canonical_eval_dd(params, alpha, p.components())?.to_f64())
}

pub(crate) fn canonical_eval_dd(params: &FamilyParams, alpha: Alpha, p: &[f64]) -> Result<Dd> {
    match params {
        FamilyParams::PowerFamily { c, d } => {
            if alpha.is_log() {
                return Err(Error::FamilyKindMismatch);
            }
            let h = entropy_dd(alpha, p);
            let head = Dd::from_f64(p[0]).pow(alpha.value()).sub(Dd::ONE);
            Ok(h.mul_f64(*c).add(head.mul_f64(*d)))
        }
        FamilyParams::LogFamily { c, lambda } => {
            if !alpha.is_log() {
                return Err(Error::FamilyKindMismatch);
            }
            let h = Dd::from_f64((p.len() - 1) as f64);
            Ok(h.mul_f64(*c).add(Dd::from_f64(p[0]).ln().mul_f64(*lambda)))
        }
    }
}

/// One stored value of a tabulated family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyEntry {
    pub n: usize,
    pub p: Vec<f64>,
    pub value: f64,
}

/// A sequence of per-level functions on probability vectors.
///
/// `Canonical` is the exact family J for its stored parameters;
/// `Perturbed` adds deterministic seeded noise of amplitude `deltas[n - 2]`
/// at level n; `Tabulated` answers only at its stored vectors, matched
/// bitwise, and is what the table file format round-trips.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureFamily {
    Canonical {
        alpha: Alpha,
        params: FamilyParams,
        max_n: usize,
    },
    Perturbed {
        base: Box<MeasureFamily>,
        deltas: Vec<f64>,
        seed: u64,
    },
    Tabulated {
        max_n: usize,
        entries: Vec<FamilyEntry>,
    },
}

impl MeasureFamily {
    pub fn max_n(&self) -> usize {
        match self {
            MeasureFamily::Canonical { max_n, .. } => *max_n,
            MeasureFamily::Perturbed { base, .. } => base.max_n(),
            MeasureFamily::Tabulated { max_n, .. } => *max_n,
        }
    }

    /// Evaluates the level-n member at p.
    pub fn eval(&self, n: usize, p: &ProbabilityVector) -> Result<f64> {
        Ok(self.eval_dd(n, p.components())?.to_f64())
    }

    pub(crate) fn eval_dd(&self, n: usize, p: &[f64]) -> Result<Dd> {
        if n < 2 || n > self.max_n() {
            return Err(Error::LevelOutOfRange {
                n,
                max: self.max_n(),
            });
        }
        if p.len() != n {
            return Err(Error::VectorLevelMismatch { n, got: p.len() });
        }
        match self {
            MeasureFamily::Canonical { alpha, params, .. } => canonical_eval_dd(params, *alpha, p),
            MeasureFamily::Perturbed { base, deltas, seed } => {
                let delta = *deltas.get(n - 2).ok_or(Error::DeltaLengthMismatch {
                    need: n - 1,
                    got: deltas.len(),
                    max_n: self.max_n(),
                })?;
                let noise = delta * vector_noise(*seed, n, p);
                Ok(base.eval_dd(n, p)?.add_f64(noise))
            }
            MeasureFamily::Tabulated { entries, .. } => {
                for e in entries {
                    if e.n == n && bits_equal(&e.p, p) {
                        return Ok(Dd::from_f64(e.value));
                    }
                }
                Err(Error::MissingFamilyValue { n, p: p.to_vec() })
            }
        }
    }
}

fn bits_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Deterministic noise shape in [-1, 1), keyed by the level and the exact
/// bits of every component. The same vector always gets the same noise.
fn vector_noise(seed: u64, n: usize, p: &[f64]) -> f64 {
    let mut state = keyed_hash(seed, n as u64);
    for &c in p {
        state = keyed_hash(state, c.to_bits());
    }
    let u = (state >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

// the three derived vectors the recursion structure evaluates; tabulation
// must build them with these exact f64 steps so lookups match bitwise

pub(crate) fn merged_components(p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len() - 1);
    out.push(p[0] + p[1]);
    out.extend_from_slice(&p[2..]);
    out
}

pub(crate) fn pair_components(p: &[f64]) -> Vec<f64> {
    let s = p[0] + p[1];
    vec![p[0] / s, p[1] / s]
}

pub(crate) fn swapped_components(p: &[f64]) -> Vec<f64> {
    vec![p[0], p[2], p[1]]
}

/// Largest branching defect over the samples at level n >= 3:
/// |I_n(p) - I_{n-1}(p_1 + p_2, p_3, ...) - (p_1 + p_2)^alpha I_2(pair)|.
pub fn recursivity_residual(
    family: &MeasureFamily,
    alpha: Alpha,
    n: usize,
    samples: &[ProbabilityVector],
) -> Result<f64> {
    if n < 3 || n > family.max_n() {
        return Err(Error::LevelOutOfRange {
            n,
            max: family.max_n(),
        });
    }
    let mut worst = 0.0f64;
    for pv in samples {
        if pv.len() != n {
            return Err(Error::VectorLevelMismatch { n, got: pv.len() });
        }
        let p = pv.components();
        let i_n = family.eval_dd(n, p)?;
        let i_m = family.eval_dd(n - 1, &merged_components(p))?;
        let i_2 = family.eval_dd(2, &pair_components(p))?;
        let weight = Dd::from_f64(p[0])
            .add(Dd::from_f64(p[1]))
            .pow(alpha.value());
        let r = i_n.sub(i_m).sub(weight.mul(i_2)).abs().to_f64();
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

/// Largest asymmetry of the level-3 member under swapping its last two
/// arguments, over the samples.
pub fn semisymmetry_residual(family: &MeasureFamily, samples: &[ProbabilityVector]) -> Result<f64> {
    if family.max_n() < 3 {
        return Err(Error::LevelOutOfRange {
            n: 3,
            max: family.max_n(),
        });
    }
    let mut worst = 0.0f64;
    for pv in samples {
        if pv.len() != 3 {
            return Err(Error::VectorLevelMismatch {
                n: 3,
                got: pv.len(),
            });
        }
        let p = pv.components();
        let straight = family.eval_dd(3, p)?;
        let swapped = family.eval_dd(3, &swapped_components(p))?;
        let r = straight.sub(swapped).abs().to_f64();
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

/// The inductive deviation bound at level n for residual list
/// eps = [eps_1, eps_2, ...]:
///
///   alpha < 0:  sum_{k=2}^{n-1} eps_k
///               + 15 (2 eps_2 + eps_1) (1 + sum_{k=2}^{n-1} S_k^alpha)
///   alpha = 0:  sum_{k=2}^{n-1} eps_k + 63 (n - 1) (2 eps_2 + eps_1)
///
/// where S_k = p_1 + ... + p_k. Empty sums are zero, so n = 2 reduces to
/// the two-place constant times 2 eps_2 + eps_1. The weighted term always
/// needs eps_1 and eps_2, hence the minimum list length of 2.
pub fn family_bound(alpha: Alpha, n: usize, p: &ProbabilityVector, eps: &[f64]) -> Result<f64> {
    if p.len() != n {
        return Err(Error::VectorLevelMismatch { n, got: p.len() });
    }
    let need = 2.max(n - 1);
    if eps.len() < need {
        return Err(Error::EpsLengthMismatch {
            need,
            got: eps.len(),
        });
    }
    for &e in eps {
        if !e.is_finite() || e < 0.0 {
            return Err(Error::InvalidEpsilon(e));
        }
    }
    let base = Dd::from_f64(eps[1]).mul_f64(2.0).add_f64(eps[0]); // 2 eps_2 + eps_1
    let mut tail = Dd::ZERO;
    for k in 2..n {
        tail = tail.add_f64(eps[k - 1]);
    }
    let weighted = if alpha.is_log() {
        base.mul_f64(LEVEL_CONSTANT_LOG * (n - 1) as f64)
    } else {
        let mut weights = Dd::ONE;
        let mut prefix = Dd::ZERO;
        let comps = p.components();
        for k in 2..n {
            if k == 2 {
                prefix = Dd::from_f64(comps[0]).add(Dd::from_f64(comps[1]));
            } else {
                prefix = prefix.add(Dd::from_f64(comps[k - 1]));
            }
            weights = weights.add(prefix.pow(alpha.value()));
        }
        base.mul_f64(LEVEL_CONSTANT_NEGATIVE).mul(weights)
    };
    Ok(tail.add(weighted).to_f64())
}

/// The two-place section of a family, probed through f(x) = I_2(1-x, x).
/// Routing it through the same fit cores as function specs keeps the
/// level-2 base case of family certification literally the same
/// computation as the two-place certifier's.
struct I2Bridge<'a> {
    family: &'a MeasureFamily,
}

impl DdEval for I2Bridge<'_> {
    fn probe(&self, _alpha: Alpha, x: Dd) -> Result<Dd> {
        let xf = x.to_f64();
        if !xf.is_finite() || xf <= 0.0 || xf >= 1.0 {
            return Err(Error::OutsideUnitInterval(xf));
        }
        self.family.eval_dd(2, &[1.0 - xf, xf])
    }
}

/// Fits family parameters from the two-place section: the function fit
/// gives (a, b), which map to c = (2^(1-alpha) - 1) a and d = b - a; the
/// alpha = 0 branch keeps (lambda, c) directly.
pub fn fit_family_params(family: &MeasureFamily, alpha: Alpha) -> Result<FamilyParams> {
    let bridge = I2Bridge { family };
    if alpha.is_log() {
        let (lambda, c) = fit_log_core(&bridge, &default_log_fit_grid())?;
        let scale = lambda.abs().to_f64().max(c.abs().to_f64());
        Ok(FamilyParams::LogFamily {
            c: snap(c, scale),
            lambda: snap(lambda, scale),
        })
    } else {
        let (a, b, _) = fit_power_core(&bridge, alpha)?;
        let factor = Dd::from_f64(2.0)
            .pow(-alpha.value())
            .mul_f64(2.0)
            .sub_f64(1.0);
        let c = factor.mul(a);
        let d = b.sub(a);
        let scale = c.abs().to_f64().max(d.abs().to_f64());
        Ok(FamilyParams::PowerFamily {
            c: snap(c, scale),
            d: snap(d, scale),
        })
    }
}

/// One deviation check: |I_n(p) - J_n(p)| against the level bound.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyLevelCheck {
    pub p: Vec<f64>,
    pub deviation: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyLevelReport {
    pub n: usize,
    pub checks: Vec<FamilyLevelCheck>,
}

/// Measured residuals plus the list the bounds were actually fed.
/// `used` differs from the measurements only for noise-synthesized
/// families, where the noise amplitudes give sound analytic bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResiduals {
    pub semisymmetry: f64,
    /// (level n, measured branching residual at n), n = 3 upward.
    pub recursivity: Vec<(usize, f64)>,
    /// eps_1, eps_2, ... as consumed by family_bound.
    pub used: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCertificate {
    pub alpha: f64,
    pub params: FamilyParams,
    pub residuals: FamilyResiduals,
    pub per_n: Vec<FamilyLevelReport>,
    pub failures: Vec<(usize, Vec<f64>)>,
    pub satisfied: bool,
    pub status: CertStatus,
    pub notes: Vec<String>,
}

/// Deterministic evaluation schedule shared by certification and
/// tabulation. Each list is a small structured set (near-uniform and the
/// two margin corners) followed by seeded simplex draws; the three lists
/// use disjoint sub-seeds.
struct SamplePlan {
    deviation: Vec<(usize, Vec<ProbabilityVector>)>,
    recursivity: Vec<(usize, Vec<ProbabilityVector>)>,
    semisym: Vec<ProbabilityVector>,
}

fn sub_seed(seed: u64, lane: u64, n: usize) -> u64 {
    keyed_hash(keyed_hash(seed, lane), n as u64)
}

fn structured_samples(n: usize, margin: f64) -> Result<Vec<ProbabilityVector>> {
    // margin 0 still gets genuinely near-boundary corners
    let m = if margin > 0.0 { margin } else { 1e-6 };
    let uniform = vec![1.0 / n as f64; n];
    let mut first_heavy = vec![m; n];
    first_heavy[0] = 1.0 - (n - 1) as f64 * m;
    let mut last_heavy = vec![m; n];
    last_heavy[n - 1] = 1.0 - (n - 1) as f64 * m;
    Ok(vec![
        ProbabilityVector::new(uniform)?,
        ProbabilityVector::new(first_heavy)?,
        ProbabilityVector::new(last_heavy)?,
    ])
}

fn build_plan(
    top: usize,
    rec_top: usize,
    samples_per_n: usize,
    seed: u64,
    margin: f64,
) -> Result<SamplePlan> {
    let level_list = |lane: u64, n: usize| -> Result<Vec<ProbabilityVector>> {
        let mut list = structured_samples(n, margin)?;
        list.extend(simplex_sample(
            n,
            samples_per_n,
            sub_seed(seed, lane, n),
            margin,
        )?);
        Ok(list)
    };
    let mut deviation = Vec::new();
    for n in 2..=top {
        deviation.push((n, level_list(0, n)?));
    }
    let mut recursivity = Vec::new();
    for n in 3..=rec_top {
        recursivity.push((n, level_list(1, n)?));
    }
    let semisym = level_list(2, 3)?;
    Ok(SamplePlan {
        deviation,
        recursivity,
        semisym,
    })
}

fn analytic_deltas(family: &MeasureFamily, alpha: Alpha) -> Option<&[f64]> {
    if let MeasureFamily::Perturbed { base, deltas, .. } = family {
        if let MeasureFamily::Canonical {
            alpha: base_alpha, ..
        } = base.as_ref()
        {
            if base_alpha.value() == alpha.value() {
                return Some(deltas);
            }
        }
    }
    None
}

/// Certifies a family up to level `max_n`: measures the semisymmetry and
/// per-level branching residuals on seeded samples, fits the nearest
/// canonical parameters through the two-place section, and checks every
/// sampled deviation |I_n - J_n| against the inductive bound.
///
/// For seeded-noise families over a canonical base at the same alpha, the
/// bounds are fed analytic residuals derived from the noise amplitudes
/// (sound upper bounds) instead of the sampled measurements; a failure
/// then refutes rather than merely failing to certify.
pub fn certify_family(
    family: &MeasureFamily,
    alpha: Alpha,
    max_n: usize,
    samples_per_n: usize,
    seed: u64,
    margin: f64,
) -> Result<FamilyCertificate> {
    if max_n < 2 {
        return Err(Error::MaxNTooSmall {
            need: 2,
            got: max_n,
        });
    }
    if family.max_n() < max_n || family.max_n() < 3 {
        return Err(Error::LevelOutOfRange {
            n: max_n.max(3),
            max: family.max_n(),
        });
    }
    let rec_top = max_n.max(3);
    let plan = build_plan(max_n, rec_top, samples_per_n, seed, margin)?;

    let semisymmetry = semisymmetry_residual(family, &plan.semisym)?;
    let mut recursivity = Vec::new();
    for (n, samples) in &plan.recursivity {
        recursivity.push((*n, recursivity_residual(family, alpha, *n, samples)?));
    }

    let (used, provenance) = match analytic_deltas(family, alpha) {
        Some(deltas) => {
            // |I_3 swap difference| <= 2 delta_3; at level n the triangle
            // inequality gives delta_n + delta_{n-1} + s^alpha delta_2
            // with s = p_1 + p_2 >= 2 * margin
            let weight = Dd::from_f64(2.0 * margin).pow(alpha.value());
            let mut used = vec![2.0 * deltas[1]];
            for k in 2..=2.max(max_n - 1) {
                let e = Dd::from_f64(deltas[k - 1])
                    .add_f64(deltas[k - 2])
                    .add(weight.mul_f64(deltas[0]))
                    .to_f64();
                used.push(e);
            }
            (used, Provenance::DerivedFromNoiseBound)
        }
        None => {
            let mut used = vec![semisymmetry];
            used.extend(recursivity.iter().map(|&(_, r)| r));
            (used, Provenance::EstimatedOnGrid)
        }
    };

    let params = fit_family_params(family, alpha)?;

    let mut per_n = Vec::new();
    let mut failures = Vec::new();
    for (n, samples) in &plan.deviation {
        let mut checks = Vec::new();
        for pv in samples {
            let p = pv.components();
            let deviation = family
                .eval_dd(*n, p)?
                .sub(canonical_eval_dd(&params, alpha, p)?)
                .abs()
                .to_f64();
            let bound = family_bound(alpha, *n, pv, &used)?;
            let ok = deviation <= bound;
            if !ok {
                failures.push((*n, p.to_vec()));
            }
            checks.push(FamilyLevelCheck {
                p: p.to_vec(),
                deviation,
                bound,
                ok,
            });
        }
        per_n.push(FamilyLevelReport { n: *n, checks });
    }

    let satisfied = failures.is_empty();
    let status = classify(satisfied, provenance);
    let mut notes = vec![
        "the weighted bound term uses prefix partial sums (p_1 + ... + p_k)^alpha".to_string(),
    ];
    if alpha.is_log() {
        notes.push(
            "log approximants are restricted to the measurable family lambda*ln; \
             lambda is an exact minimax fit on a finite u-grid"
                .to_string(),
        );
    }
    Ok(FamilyCertificate {
        alpha: alpha.value(),
        params,
        residuals: FamilyResiduals {
            semisymmetry,
            recursivity,
            used,
            provenance,
        },
        per_n,
        failures,
        satisfied,
        status,
        notes,
    })
}

/// Freezes a family into a table holding exactly the values a
/// `certify_family` call with the same arguments will look up: sample
/// vectors, their merged/pair/swap derivatives, and the two-place fit
/// probes. All vector components are the same bits both sides compute.
pub fn tabulate_family(
    family: &MeasureFamily,
    alpha: Alpha,
    max_n: usize,
    samples_per_n: usize,
    seed: u64,
    margin: f64,
) -> Result<MeasureFamily> {
    if max_n < 2 {
        return Err(Error::MaxNTooSmall {
            need: 2,
            got: max_n,
        });
    }
    if family.max_n() < max_n || family.max_n() < 3 {
        return Err(Error::LevelOutOfRange {
            n: max_n.max(3),
            max: family.max_n(),
        });
    }
    let rec_top = max_n.max(3);
    let plan = build_plan(max_n, rec_top, samples_per_n, seed, margin)?;

    let mut wanted: Vec<(usize, Vec<f64>)> = Vec::new();
    for x in fit_probe_args(alpha) {
        wanted.push((2, vec![1.0 - x, x]));
    }
    for (n, samples) in &plan.deviation {
        for pv in samples {
            wanted.push((*n, pv.components().to_vec()));
        }
    }
    for (n, samples) in &plan.recursivity {
        for pv in samples {
            let p = pv.components();
            wanted.push((*n, p.to_vec()));
            wanted.push((*n - 1, merged_components(p)));
            wanted.push((2, pair_components(p)));
        }
    }
    for pv in &plan.semisym {
        let p = pv.components();
        wanted.push((3, p.to_vec()));
        wanted.push((3, swapped_components(p)));
    }

    let mut entries: Vec<FamilyEntry> = Vec::new();
    for (n, p) in wanted {
        if entries.iter().any(|e| e.n == n && bits_equal(&e.p, &p)) {
            continue;
        }
        let value = family.eval_dd(n, &p)?.to_f64();
        entries.push(FamilyEntry { n, p, value });
    }
    Ok(MeasureFamily::Tabulated { max_n, entries })
}

// ---------------------------------------------------------------------------
// table and certificate JSON

/// Serializes a tabulated family with its alpha. Floats are written at 17
/// significant digits, so loading returns the exact same bits.
pub fn family_table_to_json(alpha: Alpha, family: &MeasureFamily) -> Result<String> {
    let MeasureFamily::Tabulated { entries, .. } = family else {
        return Err(Error::Json(
            "only tabulated families have a table form; freeze the family first".into(),
        ));
    };
    let entry_values: Vec<Value> = entries
        .iter()
        .map(|e| {
            json!({
                "n": e.n,
                "p": e.p,
                "value": e.value,
            })
        })
        .collect();
    let mut m = Map::new();
    m.insert("alpha".into(), json!(alpha.value()));
    m.insert("entries".into(), Value::Array(entry_values));
    Ok(render_json(&Value::Object(m)))
}

pub fn family_table_from_json(text: &str) -> Result<(Alpha, MeasureFamily)> {
    use crate::approximant::{get, get_f64, get_u64};
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Json(format!("parse: {e}")))?;
    let alpha = Alpha::new(get_f64(&v, "alpha")?)?;
    let Value::Array(items) = get(&v, "entries")? else {
        return Err(Error::Json("entries must be an array".into()));
    };
    if items.is_empty() {
        return Err(Error::TableTooSmall(0));
    }
    let mut entries: Vec<FamilyEntry> = Vec::new();
    let mut max_n = 2;
    for item in items {
        let n = get_u64(item, "n")? as usize;
        let Value::Array(raw) = get(item, "p")? else {
            return Err(Error::Json("entry field `p` must be an array".into()));
        };
        let p: Vec<f64> = raw
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| Error::Json("vector components must be numbers".into()))
            })
            .collect::<Result<_>>()?;
        if p.len() != n {
            return Err(Error::VectorLevelMismatch { n, got: p.len() });
        }
        ProbabilityVector::new(p.clone())?;
        let value = get_f64(item, "value")?;
        if !value.is_finite() {
            return Err(Error::NonFinite(value));
        }
        if entries.iter().any(|e| e.n == n && bits_equal(&e.p, &p)) {
            return Err(Error::DuplicateFamilyEntry { n, p });
        }
        max_n = max_n.max(n);
        entries.push(FamilyEntry { n, p, value });
    }
    Ok((alpha, MeasureFamily::Tabulated { max_n, entries }))
}

fn family_params_value(p: &FamilyParams) -> Value {
    match p {
        FamilyParams::PowerFamily { c, d } => json!({
            "kind": "power-family",
            "c": c,
            "d": d,
        }),
        FamilyParams::LogFamily { c, lambda } => json!({
            "kind": "log-family",
            "c": c,
            "lambda": lambda,
        }),
    }
}

impl FamilyCertificate {
    pub fn to_value(&self) -> Value {
        let mut eps = Map::new();
        eps.insert("semisymmetry".into(), json!(self.residuals.semisymmetry));
        eps.insert(
            "recursivity".into(),
            json!(self
                .residuals
                .recursivity
                .iter()
                .map(|&(n, value)| json!({"n": n, "value": value}))
                .collect::<Vec<_>>()),
        );
        eps.insert(
            "used".into(),
            json!(self
                .residuals
                .used
                .iter()
                .enumerate()
                .map(|(i, &value)| json!({"k": i + 1, "value": value}))
                .collect::<Vec<_>>()),
        );
        eps.insert(
            "provenance".into(),
            json!(self.residuals.provenance.as_str()),
        );

        let mut m = Map::new();
        m.insert("alpha".into(), json!(self.alpha));
        m.insert("params".into(), family_params_value(&self.params));
        m.insert("epsilon".into(), Value::Object(eps));
        m.insert(
            "per_n".into(),
            json!(self
                .per_n
                .iter()
                .map(|level| {
                    json!({
                        "n": level.n,
                        "checks": level.checks.iter().map(|c| json!({
                            "p": c.p,
                            "deviation": c.deviation,
                            "bound": c.bound,
                            "ok": c.ok,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect::<Vec<_>>()),
        );
        if !self.failures.is_empty() {
            m.insert(
                "failures".into(),
                json!(self
                    .failures
                    .iter()
                    .map(|(n, p)| json!({"n": n, "p": p}))
                    .collect::<Vec<_>>()),
            );
        }
        m.insert("satisfied".into(), json!(self.satisfied));
        m.insert("status".into(), json!(self.status.as_str()));
        if !self.notes.is_empty() {
            m.insert("notes".into(), json!(self.notes));
        }
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        render_json(&self.to_value())
    }
}
