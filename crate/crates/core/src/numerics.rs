//! Scalar arithmetic shared by every formula.
//!
//! A [`Scalar`] is either an exact rational or a binary floating-point number
//! with a per-value precision and an exponent range wide enough that
//! factorial ratios in the tens of thousands never overflow. Alternating sums
//! go through [`signed_sum`], which tracks the cancellation ratio and reports
//! [`Error::PrecisionExhausted`] when the requested accuracy is out of reach;
//! [`escalate`] re-runs a whole computation at increasing precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Bits of headroom added to the working precision of the positive and
/// negative accumulators in [`signed_sum`].
const ACCUMULATOR_GUARD: u32 = 32;

/// Bits assumed lost while the individual terms of a sum were formed
/// (each term is a product of at most a few thousand rounded factors).
const TERM_LOSS_BITS: i32 = 16;

/// Arithmetic mode: exact rationals, or binary floats at a given precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Float(u32),
}

impl Mode {
    pub fn zero(self) -> Scalar {
        self.int(0)
    }

    pub fn one(self) -> Scalar {
        self.int(1)
    }

    pub fn int(self, v: i64) -> Scalar {
        match self {
            Mode::Exact => Scalar::Exact(Rational::from(v)),
            Mode::Float(p) => Scalar::Float(Float::with_val(p, v)),
        }
    }

    pub fn uint(self, v: u64) -> Scalar {
        match self {
            Mode::Exact => Scalar::Exact(Rational::from(v)),
            Mode::Float(p) => Scalar::Float(Float::with_val(p, v)),
        }
    }

    pub fn ratio(self, num: i64, den: i64) -> Scalar {
        self.rational(&Rational::from((num, den)))
    }

    pub fn rational(self, r: &Rational) -> Scalar {
        match self {
            Mode::Exact => Scalar::Exact(r.clone()),
            Mode::Float(p) => Scalar::Float(Float::with_val(p, r)),
        }
    }

    pub fn integer(self, v: &Integer) -> Scalar {
        match self {
            Mode::Exact => Scalar::Exact(Rational::from(v)),
            Mode::Float(p) => Scalar::Float(Float::with_val(p, v)),
        }
    }

    /// Converts an `f64`. In exact mode the binary value is taken exactly.
    pub fn f64(self, v: f64) -> Scalar {
        match self {
            Mode::Exact => Scalar::Exact(Rational::from_f64(v).expect("finite value")),
            Mode::Float(p) => Scalar::Float(Float::with_val(p, v)),
        }
    }

    pub fn bits(self) -> Option<u32> {
        match self {
            Mode::Exact => None,
            Mode::Float(p) => Some(p),
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Mode::Exact)
    }
}

/// Accuracy requirements for alternating sums.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionPolicy {
    pub target_rel_error: f64,
    pub initial_bits: u32,
    pub max_bits: u32,
    pub escalation_factor: u32,
    /// Evaluate in exact rational arithmetic instead of floats.
    pub exact: bool,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            target_rel_error: 1e-9,
            initial_bits: 128,
            max_bits: 1024,
            escalation_factor: 2,
            exact: false,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(
        target_rel_error: f64,
        initial_bits: u32,
        max_bits: u32,
        escalation_factor: u32,
    ) -> Result<Self> {
        let p = PrecisionPolicy {
            target_rel_error,
            initial_bits,
            max_bits,
            escalation_factor,
            exact: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn exact() -> Self {
        PrecisionPolicy {
            exact: true,
            ..Default::default()
        }
    }

    /// Fixed starting precision with the default escalation ceiling (raised
    /// if needed so that `initial_bits <= max_bits`).
    pub fn with_bits(bits: u32) -> Self {
        let d = PrecisionPolicy::default();
        PrecisionPolicy {
            initial_bits: bits,
            max_bits: d.max_bits.max(bits),
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_rel_error > 0.0) {
            return Err(Error::Domain("target_rel_error must be positive".into()));
        }
        if self.initial_bits < 24 || self.initial_bits > self.max_bits {
            return Err(Error::Domain(format!(
                "need 24 <= initial_bits <= max_bits, got {} and {}",
                self.initial_bits, self.max_bits
            )));
        }
        if self.escalation_factor < 2 {
            return Err(Error::Domain("escalation_factor must be at least 2".into()));
        }
        Ok(())
    }

    pub fn initial_mode(&self) -> Mode {
        if self.exact {
            Mode::Exact
        } else {
            Mode::Float(self.initial_bits)
        }
    }
}

/// Runs `f` at the policy's initial mode and, while it reports
/// [`Error::PrecisionExhausted`], again at escalated precision up to
/// `max_bits`. Exact policies run once.
pub fn escalate<T>(policy: &PrecisionPolicy, mut f: impl FnMut(Mode) -> Result<T>) -> Result<T> {
    if policy.exact {
        return f(Mode::Exact);
    }
    let mut bits = policy.initial_bits;
    loop {
        match f(Mode::Float(bits)) {
            Err(Error::PrecisionExhausted { .. }) if bits < policy.max_bits => {
                bits = bits
                    .saturating_mul(policy.escalation_factor.max(2))
                    .min(policy.max_bits);
            }
            other => return other,
        }
    }
}

/// Exact rational or arbitrary-precision binary float.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Rational),
    Float(Float),
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(f) => Mode::Float(f.prec()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.cmp0() == Ordering::Equal,
            Scalar::Float(f) => f.is_zero(),
        }
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i32 {
        let o = match self {
            Scalar::Exact(r) => r.cmp0(),
            Scalar::Float(f) => f.cmp0().unwrap_or(Ordering::Equal),
        };
        match o {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64(),
            Scalar::Float(f) => f.to_f64(),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_float(&self, prec: u32) -> Float {
        match self {
            Scalar::Exact(r) => Float::with_val(prec, r),
            Scalar::Float(f) => Float::with_val(prec, f),
        }
    }

    /// Re-expresses the value in `mode` (exact targets accept only exact values
    /// or finite floats, which convert exactly).
    pub fn in_mode(&self, mode: Mode) -> Scalar {
        match (self, mode) {
            (Scalar::Exact(r), Mode::Exact) => Scalar::Exact(r.clone()),
            (Scalar::Float(f), Mode::Exact) => {
                Scalar::Exact(f.to_rational().expect("finite value"))
            }
            (_, Mode::Float(p)) => Scalar::Float(self.to_float(p)),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(Rational::from(r.abs_ref())),
            Scalar::Float(f) => Scalar::Float(Float::with_val(f.prec(), f.abs_ref())),
        }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(Rational::from(r.pow(e))),
            Scalar::Float(f) => Scalar::Float(Float::with_val(f.prec(), f.pow(e))),
        }
    }

    pub fn recip(&self) -> Scalar {
        self.mode().one() / self
    }

    /// Natural logarithm of |x| as an `f64` (−∞ at zero); safe for magnitudes
    /// far outside the `f64` range.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let prec = match self {
            Scalar::Exact(_) => 128,
            Scalar::Float(f) => f.prec(),
        };
        let x = self.to_float(prec).abs();
        x.ln().to_f64()
    }

    /// Natural logarithm (floats only; exact values are converted at 256 bits).
    pub fn ln(&self) -> Scalar {
        let f = match self {
            Scalar::Exact(r) => Float::with_val(256, r),
            Scalar::Float(f) => f.clone(),
        };
        Scalar::Float(f.ln())
    }

    pub fn exp(&self) -> Scalar {
        let f = match self {
            Scalar::Exact(r) => Float::with_val(256, r),
            Scalar::Float(f) => f.clone(),
        };
        Scalar::Float(f.exp())
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            (Scalar::Float(a), Scalar::Float(b)) => a.partial_cmp(b),
            (Scalar::Exact(a), Scalar::Float(b)) => a.partial_cmp(b),
            (Scalar::Float(a), Scalar::Exact(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}", r),
            Scalar::Float(x) => write!(f, "{}", x.to_f64()),
        }
    }
}

fn common_prec(a: &Float, b: &Float) -> u32 {
    a.prec().max(b.prec())
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(Rational::from(a $op b)),
                    (Scalar::Float(a), Scalar::Float(b)) => {
                        Scalar::Float(Float::with_val(common_prec(a, b), a $op b))
                    }
                    (Scalar::Float(a), Scalar::Exact(b)) => {
                        let b = Float::with_val(a.prec(), b);
                        Scalar::Float(Float::with_val(a.prec(), a $op &b))
                    }
                    (Scalar::Exact(a), Scalar::Float(b)) => {
                        let a = Float::with_val(b.prec(), a);
                        Scalar::Float(Float::with_val(b.prec(), &a $op b))
                    }
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                &self $op &rhs
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                &self $op rhs
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self $op &rhs
            }
        }
        impl $trait<i64> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: i64) -> Scalar {
                match self {
                    Scalar::Exact(a) => Scalar::Exact(Rational::from(a $op Rational::from(rhs))),
                    Scalar::Float(a) => Scalar::Float(Float::with_val(a.prec(), a $op rhs)),
                }
            }
        }
        impl $trait<i64> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: i64) -> Scalar {
                &self $op rhs
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);
scalar_binop!(Div, div, /);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(Rational::from(-a)),
            Scalar::Float(a) => Scalar::Float(Float::with_val(a.prec(), -a)),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Relative difference |a − b| / max(|a|, |b|), zero when both vanish.
pub fn rel_diff(a: &Scalar, b: &Scalar) -> f64 {
    let scale = a.abs().to_f64().max(b.abs().to_f64());
    let d = (a - b).abs();
    if d.is_zero() {
        return 0.0;
    }
    if scale == 0.0 {
        return f64::INFINITY;
    }
    // Compute in log space so that tiny or huge magnitudes stay representable.
    let scale_ln = a.ln_abs().max(b.ln_abs());
    (d.ln_abs() - scale_ln).exp()
}

/// Rising factorial a(a+1)···(a+q−1), evaluated as an explicit product so
/// that signs are exact for nonpositive arguments.
pub fn rising(a: &Scalar, q: u64) -> Scalar {
    match a {
        Scalar::Exact(a) => {
            let mut acc = Rational::from(1);
            let mut f = a.clone();
            for _ in 0..q {
                acc *= &f;
                if acc.cmp0() == Ordering::Equal {
                    break;
                }
                f += 1;
            }
            Scalar::Exact(acc)
        }
        Scalar::Float(a) => {
            let p = a.prec();
            let mut acc = Float::with_val(p, 1);
            let mut f = Float::with_val(p + 16, a);
            for _ in 0..q {
                acc *= &f;
                if acc.is_zero() {
                    break;
                }
                f += 1;
            }
            Scalar::Float(acc)
        }
    }
}

/// Falling factorial a(a−1)···(a−q+1).
pub fn falling(a: &Scalar, q: u64) -> Scalar {
    match a {
        Scalar::Exact(a) => {
            let mut acc = Rational::from(1);
            let mut f = a.clone();
            for _ in 0..q {
                acc *= &f;
                if acc.cmp0() == Ordering::Equal {
                    break;
                }
                f -= 1;
            }
            Scalar::Exact(acc)
        }
        Scalar::Float(a) => {
            let p = a.prec();
            let mut acc = Float::with_val(p, 1);
            let mut f = Float::with_val(p + 16, a);
            for _ in 0..q {
                acc *= &f;
                if acc.is_zero() {
                    break;
                }
                f -= 1;
            }
            Scalar::Float(acc)
        }
    }
}

/// n! in the given mode.
pub fn factorial(n: u64, mode: Mode) -> Scalar {
    let n32 = u32::try_from(n).expect("factorial argument fits in u32");
    match mode {
        Mode::Exact => Scalar::Exact(Rational::from(Integer::from(Integer::factorial(n32)))),
        Mode::Float(p) => Scalar::Float(Float::with_val(p, Float::factorial(n32))),
    }
}

/// Binomial coefficient C(n, k) for nonnegative integers (zero when k > n).
pub fn binomial(n: u64, k: u64, mode: Mode) -> Scalar {
    if k > n {
        return mode.zero();
    }
    let n32 = u32::try_from(n).expect("binomial argument fits in u32");
    let k32 = k as u32;
    mode.integer(&Integer::from(Integer::binomial_u(n32, k32)))
}

/// Generalized binomial a(a−1)···(a−k+1)/k! for a real upper argument.
pub fn binomial_real(a: &Scalar, k: u64) -> Scalar {
    falling(a, k) / factorial(k, a.mode())
}

/// Multinomial coefficient n!/(k_1!···k_r!(n−Σk)!); zero if Σk > n.
pub fn multinomial(n: u64, parts: &[u64], mode: Mode) -> Scalar {
    let used: u64 = parts.iter().sum();
    if used > n {
        return mode.zero();
    }
    let mut acc = factorial(n, mode) / factorial(n - used, mode);
    for &k in parts {
        acc = acc / factorial(k, mode);
    }
    acc
}

/// ln Γ(x) for x > 0 (floats; exact inputs are evaluated at 256 bits).
pub fn ln_gamma(x: &Scalar) -> Scalar {
    let f = match x {
        Scalar::Exact(r) => Float::with_val(256, r),
        Scalar::Float(f) => f.clone(),
    };
    Scalar::Float(f.ln_gamma())
}

/// Γ(x) (floats; exact inputs are evaluated at 256 bits).
pub fn gamma(x: &Scalar) -> Scalar {
    let f = match x {
        Scalar::Exact(r) => Float::with_val(256, r),
        Scalar::Float(f) => f.clone(),
    };
    Scalar::Float(f.gamma())
}

/// Sum of possibly mixed-sign terms with a certified relative error.
///
/// Exact scalars are summed exactly. Floats are accumulated into separate
/// positive and negative parts `P` and `N` at extra precision; the relative
/// error of `P − N` is bounded by `2^-(p − loss) · (P + N) / |P − N|`, where
/// `p` is the working precision of the terms. When that bound exceeds the
/// policy's target the sum fails with [`Error::PrecisionExhausted`], whose
/// `value` field still carries the computed sum.
pub fn signed_sum(terms: &[Scalar], policy: &PrecisionPolicy) -> Result<Scalar> {
    signed_sum_scaled(terms, policy, None)
}

/// Like [`signed_sum`], with the error measured against `max(|sum|, scale)`.
/// Probabilities use `scale = 1`, so that an entry that is zero or tiny
/// relative to the total mass does not demand unbounded precision.
pub fn signed_sum_scaled(
    terms: &[Scalar],
    policy: &PrecisionPolicy,
    scale: Option<f64>,
) -> Result<Scalar> {
    let float_prec = terms
        .iter()
        .filter_map(|t| match t {
            Scalar::Float(f) => Some(f.prec()),
            Scalar::Exact(_) => None,
        })
        .max();
    let Some(p) = float_prec else {
        let mut acc = Rational::new();
        for t in terms {
            if let Scalar::Exact(r) = t {
                acc += r;
            }
        }
        return Ok(Scalar::Exact(acc));
    };
    let wp = p + ACCUMULATOR_GUARD;
    let mut pos = Float::with_val(wp, 0);
    let mut neg = Float::with_val(wp, 0);
    for t in terms {
        let f = t.to_float(wp);
        match f.cmp0() {
            Some(Ordering::Greater) => pos += &f,
            Some(Ordering::Less) => neg -= &f,
            _ => {}
        }
    }
    let mass = Float::with_val(wp, &pos + &neg);
    let sum = Float::with_val(p, &pos - &neg);
    if mass.is_zero() {
        return Ok(Scalar::Float(sum));
    }
    let mut denom = Float::with_val(wp, sum.abs_ref());
    if let Some(s) = scale {
        let s = Float::with_val(wp, s.abs());
        if s > denom {
            denom = s;
        }
    }
    let rel_error = if denom.is_zero() {
        f64::INFINITY
    } else {
        let ratio = Float::with_val(wp, &mass / &denom);
        let ln2_err = ratio.log2().to_f64() - (p as f64) + TERM_LOSS_BITS as f64;
        2f64.powf(ln2_err)
    };
    if rel_error > policy.target_rel_error {
        return Err(Error::PrecisionExhausted {
            bits: p,
            rel_error,
            target: policy.target_rel_error,
            value: sum.to_f64(),
        });
    }
    Ok(Scalar::Float(sum))
}

/// Sum of terms known to share a sign (no cancellation check needed).
pub fn plain_sum(terms: impl IntoIterator<Item = Scalar>, mode: Mode) -> Scalar {
    let mut acc = mode.zero();
    for t in terms {
        acc = acc + t;
    }
    acc
}

/// Parses a decimal literal such as `0.612`, `-3`, `1e-4` or `741.0` into the
/// exact rational it denotes. Fractions `p/q` are accepted as well.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((a, b)) = s.split_once('/') {
        let a: Integer = a.trim().parse().ok()?;
        let b: Integer = b.trim().parse().ok()?;
        if b.cmp0() == Ordering::Equal {
            return None;
        }
        return Some(Rational::from((a, b)));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{}{}", int_part, frac_part);
    let mut num: Integer = if all.is_empty() { Integer::new() } else { all.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = Integer::from(10);
    let r = if scale >= 0 {
        Rational::from(num * Integer::from(ten.pow(scale as u32)))
    } else {
        Rational::from((num, Integer::from(ten.pow((-scale) as u32))))
    };
    Some(r)
}

/// Exact rational for an `f64` through its shortest decimal representation,
/// so that `0.612` becomes 612/1000 rather than the nearest binary fraction.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{:e}", x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Scalar {
        Mode::Exact.ratio(a, b)
    }

    #[test]
    fn rising_examples() {
        assert_eq!(rising(&q(1, 1), 3), q(6, 1));
        assert_eq!(rising(&q(7, 3), 0), q(1, 1));
        assert_eq!(rising(&q(-1, 2), 3), q(-3, 8));
        let f = rising(&Mode::Float(128).ratio(-1, 2), 3);
        assert!((f.to_f64() + 0.375).abs() < 1e-15);
    }

    #[test]
    fn falling_examples() {
        assert_eq!(falling(&q(5, 1), 2), q(20, 1));
        assert_eq!(falling(&q(3, 1), 4), q(0, 1));
        assert_eq!(falling(&q(1, 2), 2), q(-1, 4));
        assert!(falling(&Mode::Float(64).int(3), 4).is_zero());
    }

    #[test]
    fn signed_sum_examples() {
        let pol = PrecisionPolicy::exact();
        let s = signed_sum(&[q(1, 1), q(-1, 1), q(1, 4)], &pol).unwrap();
        assert_eq!(s, q(1, 4));
        assert!(signed_sum(&[], &pol).unwrap().is_zero());

        let pol = PrecisionPolicy::default();
        let m = Mode::Float(128);
        let s = signed_sum(&[m.int(1), m.int(-1), m.ratio(1, 4)], &pol).unwrap();
        assert_eq!(s.to_f64(), 0.25);
    }

    #[test]
    fn signed_sum_prior_pmf_terms() {
        // DP(theta = 1), n = 2, l = 1, x = 0: the three sieve terms sum to
        // P[both observations in one block] = 1/2 = 1/(theta + 1).
        let mode = Mode::Exact;
        let theta = mode.int(1);
        let mut terms = Vec::new();
        for t in 0..=2u64 {
            let sign = if t % 2 == 0 { 1 } else { -1 };
            let term = factorial(2, mode) / rising(&theta, 2)
                * rising(&theta, 2 - t)
                / factorial(2 - t, mode)
                / factorial(t, mode)
                * theta.pow(t as u32);
            terms.push(term * sign);
        }
        assert_eq!(signed_sum(&terms, &PrecisionPolicy::exact()).unwrap(), q(1, 2));
    }

    #[test]
    fn cancellation_is_detected_and_escalation_recovers() {
        // (1 + 2^-200) - 1 needs more than 128 bits.
        let policy = PrecisionPolicy::default();
        let run = |mode: Mode| {
            let tiny = mode.int(2).pow(200).recip();
            signed_sum(&[mode.one() + &tiny, mode.int(-1)], &policy)
        };
        assert!(matches!(run(Mode::Float(128)), Err(Error::PrecisionExhausted { .. })));
        let v = escalate(&policy, run).unwrap();
        assert_eq!(v.mode(), Mode::Float(256));
        assert!((v.ln_abs() + 200.0 * 2f64.ln()).abs() < 1e-9);

        let capped = PrecisionPolicy { max_bits: 128, ..policy.clone() };
        assert!(matches!(escalate(&capped, run), Err(Error::PrecisionExhausted { bits: 128, .. })));
    }

    #[test]
    fn scaled_sum_accepts_zero_probabilities() {
        let m = Mode::Float(128);
        let terms = [m.ratio(1, 3), m.ratio(-1, 3)];
        let pol = PrecisionPolicy::default();
        assert!(signed_sum_scaled(&terms, &pol, Some(1.0)).is_ok());
    }

    #[test]
    fn huge_magnitudes_do_not_overflow() {
        let m = Mode::Float(128);
        let big = factorial(20_000, m);
        assert!(big.to_f64().is_infinite());
        let lg = ln_gamma(&m.int(20_001)).to_f64();
        assert!((big.ln_abs() - lg).abs() < 1e-9);
        let ratio = &big / &factorial(19_999, m);
        assert!((ratio.to_f64() - 20_000.0).abs() < 1e-20);
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("0.612").unwrap(), Rational::from((612, 1000)));
        assert_eq!(parse_decimal("741").unwrap(), Rational::from(741));
        assert_eq!(parse_decimal("-0.5").unwrap(), Rational::from((-1, 2)));
        assert_eq!(parse_decimal("1e-4").unwrap(), Rational::from((1, 10000)));
        assert_eq!(parse_decimal("2.5E2").unwrap(), Rational::from(250));
        assert_eq!(parse_decimal("3/7").unwrap(), Rational::from((3, 7)));
        assert!(parse_decimal("abc").is_none());
        assert!(parse_decimal("1/0").is_none());
        assert_eq!(rational_from_f64(0.612).unwrap(), Rational::from((612, 1000)));
        assert_eq!(rational_from_f64(1e-7).unwrap(), Rational::from((1, 10_000_000)));
    }

    #[test]
    fn multinomial_and_binomials() {
        let m = Mode::Exact;
        assert_eq!(multinomial(5, &[2, 1], m), q(30, 1));
        assert_eq!(binomial(5, 2, m), q(10, 1));
        assert_eq!(binomial(2, 5, m), q(0, 1));
        assert_eq!(binomial_real(&q(-1, 2), 2), q(3, 8));
    }

    #[test]
    fn policy_validation() {
        assert!(PrecisionPolicy::new(1e-9, 128, 1024, 2).is_ok());
        assert!(PrecisionPolicy::new(0.0, 128, 1024, 2).is_err());
        assert!(PrecisionPolicy::new(1e-9, 2048, 1024, 2).is_err());
        assert!(PrecisionPolicy::new(1e-9, 128, 1024, 1).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn rat() -> impl Strategy<Value = Rational> {
            (-50i64..=50, 1i64..=10).prop_map(|(a, b)| Rational::from((a, b)))
        }

        proptest! {
            #[test]
            fn rising_splits(a in rat(), qq in 0u64..=20, pp in 0u64..=20) {
                let x = Scalar::Exact(a.clone());
                let lhs = rising(&x, qq) * rising(&(&x + qq as i64), pp);
                prop_assert_eq!(&lhs, &rising(&x, qq + pp));

                let xf = Mode::Float(128).rational(&a);
                let lf = rising(&xf, qq) * rising(&(&xf + qq as i64), pp);
                let rf = rising(&xf, qq + pp);
                prop_assert!(rel_diff(&lf, &rf) <= 1e-12);
                prop_assert!(rel_diff(&lf, &lhs) <= 1e-12);
            }

            #[test]
            fn falling_is_reflected_rising(a in rat(), qq in 0u64..=20) {
                let x = Scalar::Exact(a);
                let sign = if qq % 2 == 0 { 1 } else { -1 };
                prop_assert_eq!(falling(&x, qq), rising(&-&x, qq) * sign);
            }

            #[test]
            fn float_matches_exact(a in rat(), b in rat()) {
                let m = Mode::Float(128);
                let (ea, eb) = (Scalar::Exact(a.clone()), Scalar::Exact(b.clone()));
                let (fa, fb) = (m.rational(&a), m.rational(&b));
                prop_assert!(rel_diff(&(&fa * &fb), &(&ea * &eb)) <= 1e-30);
                prop_assert!(rel_diff(&(&fa + &fb), &(&ea + &eb)) <= 1e-30 || (&ea + &eb).is_zero());
                if !eb.is_zero() {
                    prop_assert!(rel_diff(&(&fa / &fb), &(&ea / &eb)) <= 1e-30);
                }
            }
        }
    }
}
