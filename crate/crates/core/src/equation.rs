//! Candidate functions, the quadruple defect of the two-place equation
//!
//!   f(x) + (1-x)^a f(y/(1-x)) = f(y) + (1-y)^a f(x/(1-y))
//!
//! on the open triangle, grid residual estimation, and the
//! multiplicative-coordinate transforms the constructive fits are built on.
//!
//! All arithmetic behind the public f64 surface runs in double-double
//! ([`crate::dd`]). Near the hypotenuse the four terms grow like
//! margin^alpha and cancel; in plain f64 the rounding residue of that
//! cancellation would drown the quantities this crate is supposed to
//! certify.

use crate::dd::Dd;
use crate::domain::{Alpha, DomainGrid};
use crate::error::{Error, Result};
use crate::generators::PerturbationPlan;

/// A candidate function on the open unit interval.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// a*x^alpha + b*(1-x)^alpha - b. Zero defect for every alpha < 0.
    Power { a: f64, b: f64 },
    /// lambda*ln(1-x) + c. Zero defect at alpha = 0.
    Log { lambda: f64, c: f64 },
    /// Piecewise-linear interpolant through (xs[i], values[i]).
    /// Build through [`FunctionSpec::tabulated`] or [`parse_table_csv`];
    /// both enforce the ordering invariants.
    Tabulated { xs: Vec<f64>, values: Vec<f64> },
    /// Base plus deterministic pointwise noise with |noise| <= plan delta.
    Perturbed {
        base: Box<FunctionSpec>,
        plan: PerturbationPlan,
    },
}

impl FunctionSpec {
    /// Checked constructor for the tabulated variant: columns of equal
    /// length >= 2, xs strictly increasing inside ]0, 1[, everything finite.
    pub fn tabulated(xs: Vec<f64>, values: Vec<f64>) -> Result<FunctionSpec> {
        if xs.len() != values.len() {
            return Err(Error::TableShape {
                xs: xs.len(),
                values: values.len(),
            });
        }
        if xs.len() < 2 {
            return Err(Error::TableTooSmall(xs.len()));
        }
        for (i, &x) in xs.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite(x));
            }
            if x <= 0.0 || x >= 1.0 || (i > 0 && x <= xs[i - 1]) {
                return Err(Error::TableOrder(i));
            }
        }
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(v));
        }
        Ok(FunctionSpec::Tabulated { xs, values })
    }

    /// True when evaluation goes through interpolated samples at any layer.
    pub fn involves_table(&self) -> bool {
        match self {
            FunctionSpec::Tabulated { .. } => true,
            FunctionSpec::Perturbed { base, .. } => base.involves_table(),
            _ => false,
        }
    }
}

/// Evaluates a candidate at interior x.
pub fn eval_f(spec: &FunctionSpec, alpha: Alpha, x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 || x >= 1.0 {
        return Err(Error::OutsideUnitInterval(x));
    }
    Ok(eval_dd(spec, alpha, Dd::from_f64(x))?.to_f64())
}

/// Double-double evaluation path shared by the defect, the transforms, and
/// the parameter fits. No interiority check here; callers own that.
pub(crate) fn eval_dd(spec: &FunctionSpec, alpha: Alpha, x: Dd) -> Result<Dd> {
    match spec {
        FunctionSpec::Power { a, b } => Ok(power_eval_dd(alpha, *a, *b, x)),
        FunctionSpec::Log { lambda, c } => Ok(log_eval_dd(*lambda, *c, x)),
        FunctionSpec::Tabulated { xs, values } => interpolate_dd(xs, values, x),
        FunctionSpec::Perturbed { base, plan } => {
            Ok(eval_dd(base, alpha, x)?.add_f64(plan.noise(x.to_f64())))
        }
    }
}

/// a*x^alpha + b*(1-x)^alpha - b. Also the evaluation path for fitted
/// power-form approximants, so a recovered (a, b) reproduces its source
/// bit for bit.
pub(crate) fn power_eval_dd(alpha: Alpha, a: f64, b: f64, x: Dd) -> Dd {
    let e = alpha.value();
    let head = x.pow(e).mul_f64(a);
    head.add(Dd::ONE.sub(x).pow(e).mul_f64(b)).sub_f64(b)
}

/// lambda*ln(1-x) + c; the alpha = 0 counterpart of [`power_eval_dd`].
pub(crate) fn log_eval_dd(lambda: f64, c: f64, x: Dd) -> Dd {
    Dd::ONE.sub(x).ln().mul_f64(lambda).add_f64(c)
}

fn interpolate_dd(xs: &[f64], values: &[f64], x: Dd) -> Result<Dd> {
    let xf = x.to_f64();
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if !(xf >= lo && xf <= hi) {
        return Err(Error::OutsideTabulatedRange { x: xf, lo, hi });
    }
    if let Ok(k) = xs.binary_search_by(|t| t.partial_cmp(&xf).unwrap()) {
        // exact node: reproduce the sample bit for bit
        return Ok(Dd::from_f64(values[k]));
    }
    // first index with xs[i] > xf; xf is strictly between nodes here
    let i = xs.partition_point(|&t| t < xf);
    let x0 = Dd::from_f64(xs[i - 1]);
    let v0 = Dd::from_f64(values[i - 1]);
    let t = x.sub(x0).div(Dd::from_f64(xs[i]).sub(x0));
    Ok(v0.add(Dd::from_f64(values[i]).sub(v0).mul(t)))
}

/// Left minus right side of the equation at (x, y), evaluated as
/// ((f(x) + (1-x)^a f(y/(1-x))) - f(y)) - (1-y)^a f(x/(1-y)).
/// Exact interior solutions give 0 up to the double-double rounding floor.
pub fn defect(spec: &FunctionSpec, alpha: Alpha, x: f64, y: f64) -> Result<f64> {
    Ok(defect_dd(spec, alpha, x, y)?.to_f64())
}

pub(crate) fn defect_dd(spec: &FunctionSpec, alpha: Alpha, x: f64, y: f64) -> Result<Dd> {
    if !(x > 0.0 && y > 0.0 && x + y < 1.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::OutsideDomain { x, y });
    }
    let e = alpha.value();
    let xd = Dd::from_f64(x);
    let yd = Dd::from_f64(y);
    let cx = Dd::ONE.sub(xd);
    let cy = Dd::ONE.sub(yd);
    let fx = eval_dd(spec, alpha, xd)?;
    let fyx = eval_dd(spec, alpha, yd.div(cx))?;
    let fy = eval_dd(spec, alpha, yd)?;
    let fxy = eval_dd(spec, alpha, xd.div(cy))?;
    Ok(fx.add(cx.pow(e).mul(fyx)).sub(fy).sub(cy.pow(e).mul(fxy)))
}

/// Where a residual number came from. Certificates carry this so a grid
/// estimate (a lower bound of the true sup) is never mistaken for a
/// guaranteed upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    EstimatedOnGrid,
    Supplied,
    DerivedFromNoiseBound,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::EstimatedOnGrid => "estimated-on-grid",
            Provenance::Supplied => "supplied",
            Provenance::DerivedFromNoiseBound => "derived-from-noise-bound",
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        match s {
            "estimated-on-grid" => Some(Provenance::EstimatedOnGrid),
            "supplied" => Some(Provenance::Supplied),
            "derived-from-noise-bound" => Some(Provenance::DerivedFromNoiseBound),
            _ => None,
        }
    }

    /// True when the value genuinely upper-bounds the sup over the whole
    /// open triangle, so a failed certificate is a hard fail rather than
    /// an inconclusive one.
    pub fn is_sound_upper_bound(self) -> bool {
        !matches!(self, Provenance::EstimatedOnGrid)
    }
}

/// The grid a residual estimate was taken on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridShape {
    pub margin: f64,
    pub resolution: u32,
}

/// A residual number with its provenance and, for grid estimates, the
/// point attaining the maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEstimate {
    pub value: f64,
    pub provenance: Provenance,
    pub argmax: Option<(f64, f64)>,
    pub grid: Option<GridShape>,
}

impl ResidualEstimate {
    /// Wraps an externally asserted residual bound.
    pub fn supplied(value: f64) -> Result<ResidualEstimate> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidEpsilon(value));
        }
        Ok(ResidualEstimate {
            value,
            provenance: Provenance::Supplied,
            argmax: None,
            grid: None,
        })
    }
}

/// Maximum of |defect| over the grid. The argmax is the first maximizing
/// point in grid order, which makes reruns byte-stable.
pub fn residual_sup(
    spec: &FunctionSpec,
    alpha: Alpha,
    grid: &DomainGrid,
) -> Result<ResidualEstimate> {
    let mut best = -1.0f64;
    let mut at = (0.0, 0.0);
    for &(x, y) in grid.points() {
        let d = defect_dd(spec, alpha, x, y).map_err(|e| Error::EvalAt {
            x,
            y,
            source: Box::new(e),
        })?;
        let a = d.abs().to_f64();
        if a > best {
            best = a;
            at = (x, y);
        }
    }
    Ok(ResidualEstimate {
        value: best,
        provenance: Provenance::EstimatedOnGrid,
        argmax: Some(at),
        grid: Some(GridShape {
            margin: grid.margin(),
            resolution: grid.resolution(),
        }),
    })
}

fn positive(u: f64) -> Result<f64> {
    if !u.is_finite() || u <= 0.0 {
        return Err(Error::NonpositiveArg(u));
    }
    Ok(u)
}

/// The candidate viewed in homogeneous coordinates:
/// lift(u, v) = (u+v)^alpha * f(v/(u+v)). Degree-alpha homogeneous, and
/// lift(1-x, x) = f(x) recovers the candidate itself.
pub fn lift(spec: &FunctionSpec, alpha: Alpha, u: f64, v: f64) -> Result<f64> {
    positive(u)?;
    positive(v)?;
    Ok(lift_dd(spec, alpha, Dd::from_f64(u), Dd::from_f64(v))?.to_f64())
}

pub(crate) fn lift_dd(spec: &FunctionSpec, alpha: Alpha, u: Dd, v: Dd) -> Result<Dd> {
    let s = u.add(v);
    Ok(s.pow(alpha.value()).mul(eval_dd(spec, alpha, v.div(s))?))
}

/// Asymmetry of the lift against the unit section:
/// lift_gap(u) = lift(u, 1) - lift(1, u). Vanishes at u = 1; for an exact
/// power candidate it equals (b - a)(u^alpha - 1), and for an exact log
/// candidate lambda * ln u. The parameter fits read a and lambda off it.
pub fn lift_gap(spec: &FunctionSpec, alpha: Alpha, u: f64) -> Result<f64> {
    positive(u)?;
    Ok(lift_gap_dd(spec, alpha, Dd::from_f64(u))?.to_f64())
}

pub(crate) fn lift_gap_dd(spec: &FunctionSpec, alpha: Alpha, u: Dd) -> Result<Dd> {
    Ok(lift_dd(spec, alpha, u, Dd::ONE)?.sub(lift_dd(spec, alpha, Dd::ONE, u)?))
}

/// Symmetrized lift: lift(u, v) + lift_gap(v). Symmetric in (u, v) for
/// exact solutions; its asymmetry is controlled by the residual.
pub fn lift_sym(spec: &FunctionSpec, alpha: Alpha, u: f64, v: f64) -> Result<f64> {
    positive(u)?;
    positive(v)?;
    let ud = Dd::from_f64(u);
    let vd = Dd::from_f64(v);
    Ok(lift_dd(spec, alpha, ud, vd)?
        .add(lift_gap_dd(spec, alpha, vd)?)
        .to_f64())
}

/// First-slot additivity defect of the lift:
/// lift(u+v, w) + lift(u, v) - lift(u+w, v) - lift(u, w).
/// Identically zero for exact solutions.
pub fn cocycle_defect(spec: &FunctionSpec, alpha: Alpha, u: f64, v: f64, w: f64) -> Result<f64> {
    positive(u)?;
    positive(v)?;
    positive(w)?;
    let ud = Dd::from_f64(u);
    let vd = Dd::from_f64(v);
    let wd = Dd::from_f64(w);
    let t = lift_dd(spec, alpha, ud.add(vd), wd)?.add(lift_dd(spec, alpha, ud, vd)?);
    Ok(t.sub(lift_dd(spec, alpha, ud.add(wd), vd)?)
        .sub(lift_dd(spec, alpha, ud, wd)?)
        .to_f64())
}

/// CSV header for tabulated candidates.
pub const TABLE_CSV_HEADER: &str = "x,value";

/// Serializes samples in the `x,value` format. Floats are printed in the
/// shortest form that parses back to the same bits.
pub fn write_table_csv(xs: &[f64], values: &[f64]) -> String {
    let mut out = String::with_capacity(16 * xs.len() + 8);
    out.push_str(TABLE_CSV_HEADER);
    out.push('\n');
    for (x, v) in xs.iter().zip(values) {
        out.push_str(&format!("{x},{v}\n"));
    }
    out
}

/// A parsed `x,value` table. Rows at x = 0 and x = 1, when permitted,
/// are split off as endpoint values rather than interpolation nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub spec: FunctionSpec,
    pub f0: Option<f64>,
    pub f1: Option<f64>,
}

/// Parses the `x,value` format, rejecting endpoint rows; interior-domain
/// analyses have no use for f(0) or f(1).
pub fn parse_table_csv(text: &str) -> Result<FunctionSpec> {
    let t = parse_table(text, false)?;
    Ok(t.spec)
}

/// Parses the `x,value` format, splitting off rows at x = 0 and x = 1 for
/// closed-domain analyses.
pub fn parse_table_csv_closed(text: &str) -> Result<ParsedTable> {
    parse_table(text, true)
}

fn parse_table(text: &str, allow_endpoints: bool) -> Result<ParsedTable> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TABLE_CSV_HEADER => {}
        other => {
            return Err(Error::TableParse {
                line: 1,
                msg: format!(
                    "expected header `{TABLE_CSV_HEADER}`, got `{}`",
                    other.map(|(_, h)| h.trim()).unwrap_or("")
                ),
            })
        }
    }
    let mut xs = Vec::new();
    let mut values = Vec::new();
    let mut f0 = None;
    let mut f1 = None;
    for (idx, raw) in lines {
        let line = idx + 1; // 1-based, header was line 1
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let mut fields = row.split(',');
        let (sx, sv) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a.trim(), b.trim()),
            _ => {
                return Err(Error::TableParse {
                    line,
                    msg: format!("expected two comma-separated fields, got `{row}`"),
                })
            }
        };
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::TableParse {
                line,
                msg: format!("`{s}` is not a decimal float"),
            })
        };
        let x = parse(sx)?;
        let v = parse(sv)?;
        if x == 0.0 || x == 1.0 {
            if !allow_endpoints {
                return Err(Error::TableParse {
                    line,
                    msg: format!("endpoint row x = {x} requires closed-domain mode"),
                });
            }
            let slot = if x == 0.0 { &mut f0 } else { &mut f1 };
            if slot.is_some() {
                return Err(Error::TableParse {
                    line,
                    msg: format!("duplicate endpoint row x = {x}"),
                });
            }
            *slot = Some(v);
            continue;
        }
        xs.push(x);
        values.push(v);
    }
    Ok(ParsedTable {
        spec: FunctionSpec::tabulated(xs, values)?,
        f0,
        f1,
    })
}
