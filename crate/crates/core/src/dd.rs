//! Double-double arithmetic: a value is the unevaluated sum `hi + lo` of two
//! f64s with `|lo| <= ulp(hi)/2`, giving roughly 106 significand bits.
//!
//! The defect of the information functional equation cancels catastrophically
//! near the domain boundary when the exponent is strongly negative: term
//! magnitudes reach `|b| * margin^alpha` (about 1e16 for alpha = -5 at margin
//! 1e-3), so plain f64 evaluation leaves O(1) absolute noise where the true
//! value is 0. Every defect, transform, and fit in this crate therefore runs
//! on [`Dd`] and rounds only its final result back to f64.

/// Error-free sum: returns `(s, e)` with `s = fl(a+b)` and `a + b = s + e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Like [`two_sum`] but requires `|a| >= |b|` (or either zero).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Dekker split of `a` into 26+27 bit halves. Valid for |a| < ~1e292,
/// far above anything this crate produces.
#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = 134217729.0 * a; // 2^27 + 1
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Error-free product: `(p, e)` with `p = fl(a*b)` and `a*b = p + e` exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

/// A double-double number. Ordering and equality are lexicographic on
/// `(hi, lo)`, which is numerically correct for normalized values.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

/// ln 2 to double-double precision.
const LN2: Dd = Dd {
    hi: 0.693_147_180_559_945_3,
    lo: 2.319_046_813_846_299_6e-17,
};

/// Taylor order for [`Dd::exp`]; remainder < 0.3466^22/22! ~ 7e-32.
const EXP_TERMS: usize = 21;

fn inv_factorials() -> &'static [Dd; EXP_TERMS + 1] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[Dd; EXP_TERMS + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [Dd::ONE; EXP_TERMS + 1];
        let mut fact = Dd::ONE;
        for (i, slot) in table.iter_mut().enumerate().skip(1) {
            fact = fact.mul_f64(i as f64); // exact: 21! < 2^66 fits in 106 bits
            *slot = Dd::ONE.div(fact);
        }
        table
    })
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    /// Rounds to the nearest f64. For a normalized value this is `hi`.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn is_nan(self) -> bool {
        self.hi.is_nan() || self.lo.is_nan()
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, v: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, v);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn sub_f64(self, v: f64) -> Dd {
        self.add_f64(-v)
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi) + self.lo * o.lo;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, v: f64) -> Dd {
        let (p, e) = two_prod(self.hi, v);
        let (hi, lo) = quick_two_sum(p, e + self.lo * v);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_f64(q2));
        let q3 = r.hi / o.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    #[inline]
    pub fn recip(self) -> Dd {
        Dd::ONE.div(self)
    }

    /// Exact scaling by 2^k (no rounding while in range).
    #[inline]
    fn scale2(self, k: i32) -> Dd {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    /// e^self via ln2 range reduction and a degree-21 Taylor tail.
    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -709.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = self.sub(LN2.mul_f64(k)); // |r| <= ln2/2 + tiny
        let c = inv_factorials();
        let mut s = c[EXP_TERMS];
        for i in (0..EXP_TERMS).rev() {
            s = s.mul(r).add(c[i]);
        }
        s.scale2(k as i32)
    }

    /// Natural log for strictly positive values; NaN otherwise.
    /// One Newton correction of the f64 seed: ln y = L + ln(1 + (y e^-L - 1)).
    pub fn ln(self) -> Dd {
        if !(self.hi > 0.0) {
            return Dd {
                hi: f64::NAN,
                lo: f64::NAN,
            };
        }
        let seed = self.hi.ln();
        let r = self.mul(Dd::from_f64(-seed).exp()).sub_f64(1.0); // |r| ~ 1e-16
        let ln1p = r.sub(r.mul(r).mul_f64(0.5)); // r^3 term < 1e-47, dropped
        Dd::from_f64(seed).add(ln1p)
    }

    /// self^alpha for self > 0 (any alpha) — `exp(alpha * ln self)`.
    /// `alpha == 0` returns exactly 1, matching `f64::powf` semantics.
    pub fn pow(self, alpha: f64) -> Dd {
        if alpha == 0.0 {
            return Dd::ONE;
        }
        if self.hi == 1.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        self.ln().mul_f64(alpha).exp()
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Dd {
        Dd::from_f64(v)
    }
}
