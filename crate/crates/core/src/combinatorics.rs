//! Stirling numbers and generalized factorial coefficients.
//!
//! The noncentral coefficient 𝒞(n,k;σ,γ) is defined by
//! (σt − γ)_n = Σ_k 𝒞(n,k;σ,γ) (t)_k with rising factorials on both sides.
//! Comparing coefficients of (σt − γ)_{n+1} = (σt − γ)_n (σt − γ + n) gives
//! the triangular recurrence
//!
//! 𝒞(n+1,k) = σ 𝒞(n,k−1) + (n − γ − σk) 𝒞(n,k),
//!
//! and the scaled coefficient D(n,k) = 𝒞(n,k)/σ^k obeys
//! D(n+1,k) = D(n,k−1) + (n − γ − σk) D(n,k), which stays finite at σ = 0
//! where it reproduces Σ_i C(n,i)|s(i,k)|(−γ)_{n−i}.

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::{binomial, escalate, factorial, rising, signed_sum, Mode, PrecisionPolicy, Scalar};

/// Which triangular array a [`CoeffTable`] holds.
#[derive(Clone, Debug, PartialEq)]
pub enum CoeffKind {
    Stirling1Unsigned,
    Stirling2,
    Gfc { sigma: Rational },
    GfcNoncentral { sigma: Rational, gamma: Rational },
    /// lim_{σ→0} 𝒞(n,k;σ,γ)/σ^k.
    GfcZeroLimit { gamma: Rational },
}

/// Triangular table of coefficients indexed by (n, k), 0 ≤ k ≤ n ≤ n_max.
#[derive(Clone, Debug)]
pub struct CoeffTable {
    pub kind: CoeffKind,
    pub n_max: usize,
    rows: Vec<Vec<Scalar>>,
    zero: Scalar,
}

impl CoeffTable {
    fn build(
        kind: CoeffKind,
        n_max: usize,
        mode: Mode,
        step: impl Fn(usize, usize, &Scalar, &Scalar) -> Scalar,
    ) -> Self {
        let mut rows: Vec<Vec<Scalar>> = Vec::with_capacity(n_max + 1);
        rows.push(vec![mode.one()]);
        for i in 0..n_max {
            let prev = &rows[i];
            let zero = mode.zero();
            let next: Vec<Scalar> = (0..=i + 1)
                .map(|k| {
                    let left = if k >= 1 { &prev[k - 1] } else { &zero };
                    let here = if k <= i { &prev[k] } else { &zero };
                    step(i, k, left, here)
                })
                .collect();
            rows.push(next);
        }
        CoeffTable {
            kind,
            n_max,
            rows,
            zero: mode.zero(),
        }
    }

    /// |s(n,k)|: |s(i+1,k)| = i|s(i,k)| + |s(i,k−1)|.
    pub fn stirling1_unsigned(n_max: usize, mode: Mode) -> Self {
        Self::build(CoeffKind::Stirling1Unsigned, n_max, mode, |i, _k, left, here| {
            left + &(here * i as i64)
        })
    }

    /// S(n,k): S(i+1,k) = k S(i,k) + S(i,k−1).
    pub fn stirling2(n_max: usize, mode: Mode) -> Self {
        Self::build(CoeffKind::Stirling2, n_max, mode, |_i, k, left, here| {
            left + &(here * k as i64)
        })
    }

    /// 𝒞(n,k;σ) by the triangular recurrence.
    pub fn gfc(n_max: usize, sigma: &Rational, mode: Mode) -> Self {
        let s = mode.rational(sigma);
        Self::build(
            CoeffKind::Gfc { sigma: sigma.clone() },
            n_max,
            mode,
            move |i, k, left, here| &s * left + here * &(mode.int(i as i64) - &(&s * k as i64)),
        )
    }

    /// 𝒞(n,k;σ,γ) by the triangular recurrence.
    pub fn gfc_noncentral(n_max: usize, sigma: &Rational, gamma: &Rational, mode: Mode) -> Self {
        let s = mode.rational(sigma);
        let g = mode.rational(gamma);
        Self::build(
            CoeffKind::GfcNoncentral {
                sigma: sigma.clone(),
                gamma: gamma.clone(),
            },
            n_max,
            mode,
            move |i, k, left, here| {
                &s * left + here * &(mode.int(i as i64) - &g - &s * k as i64)
            },
        )
    }

    /// σ→0 limit of 𝒞(n,k;σ,γ)/σ^k by the scaled recurrence at σ = 0.
    pub fn gfc_zero_limit(n_max: usize, gamma: &Rational, mode: Mode) -> Self {
        let g = mode.rational(gamma);
        Self::build(
            CoeffKind::GfcZeroLimit { gamma: gamma.clone() },
            n_max,
            mode,
            move |i, _k, left, here| left + &(here * &(mode.int(i as i64) - &g)),
        )
    }

    /// Entry (n, k); zero for k > n.
    pub fn get(&self, n: usize, k: usize) -> Result<&Scalar> {
        if n > self.n_max {
            return Err(Error::IndexOutOfRange(format!(
                "row {} exceeds table size {}",
                n, self.n_max
            )));
        }
        Ok(self.rows[n].get(k).unwrap_or(&self.zero))
    }

    /// Row n, entries k = 0..=n.
    pub fn row(&self, n: usize) -> Result<&[Scalar]> {
        self.rows
            .get(n)
            .map(|r| r.as_slice())
            .ok_or_else(|| Error::IndexOutOfRange(format!("row {} exceeds table size {}", n, self.n_max)))
    }
}

/// Unsigned Stirling number of the first kind |s(n,k)| (zero when k > n).
pub fn stirling1_unsigned(n: usize, k: usize, mode: Mode) -> Scalar {
    if k > n {
        return mode.zero();
    }
    let mut row = vec![Integer::from(1)];
    for i in 0..n {
        let mut next = vec![Integer::new(); i + 2];
        for kk in 0..=i + 1 {
            if kk >= 1 {
                next[kk] += &row[kk - 1];
            }
            if kk <= i {
                next[kk] += Integer::from(&row[kk] * i as u64);
            }
        }
        row = next;
    }
    mode.integer(&row[k])
}

/// Stirling number of the second kind S(n,k) (zero when k > n).
pub fn stirling2(n: usize, k: usize, mode: Mode) -> Scalar {
    if k > n {
        return mode.zero();
    }
    let mut row = vec![Integer::from(1)];
    for i in 0..n {
        let mut next = vec![Integer::new(); i + 2];
        for kk in 0..=i + 1 {
            if kk >= 1 {
                next[kk] += &row[kk - 1];
            }
            if kk <= i {
                next[kk] += Integer::from(&row[kk] * kk as u64);
            }
        }
        row = next;
    }
    mode.integer(&row[k])
}

/// Central generalized factorial coefficient 𝒞(n,k;σ) for σ ≠ 0, from the
/// triangular recurrence.
pub fn gfc(n: usize, k: usize, sigma: &Rational, mode: Mode) -> Result<Scalar> {
    if sigma.cmp0() == std::cmp::Ordering::Equal {
        return Err(Error::Domain(
            "gfc requires sigma != 0; use gfc_zero_limit for sigma = 0".into(),
        ));
    }
    if k > n {
        return Ok(mode.zero());
    }
    Ok(CoeffTable::gfc(n, sigma, mode).get(n, k)?.clone())
}

/// (1/k!) Σ_{i=0}^{k} (−1)^i C(k,i) (−σi − γ)_n, evaluated in `mode`.
pub fn gfc_direct(
    n: usize,
    k: usize,
    sigma: &Rational,
    gamma: &Rational,
    mode: Mode,
    policy: &PrecisionPolicy,
) -> Result<Scalar> {
    if k > n {
        return Ok(mode.zero());
    }
    let s = mode.rational(sigma);
    let g = mode.rational(gamma);
    let terms: Vec<Scalar> = (0..=k)
        .map(|i| {
            let arg = -(&s * i as i64) - &g;
            let t = binomial(k as u64, i as u64, mode) * rising(&arg, n as u64);
            if i % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .collect();
    Ok(signed_sum(&terms, policy)? / factorial(k as u64, mode))
}

/// Noncentral generalized factorial coefficient 𝒞(n,k;σ,γ) by the direct
/// alternating sum, with precision escalation.
pub fn gfc_noncentral(
    n: usize,
    k: usize,
    sigma: &Rational,
    gamma: &Rational,
    policy: &PrecisionPolicy,
) -> Result<Scalar> {
    escalate(policy, |mode| gfc_direct(n, k, sigma, gamma, mode, policy))
}

/// lim_{σ→0} 𝒞(n,k;σ,γ)/σ^k = Σ_{i=k}^{n} C(n,i)|s(i,k)|(−γ)_{n−i}.
pub fn gfc_zero_limit(n: usize, k: usize, gamma: &Rational, policy: &PrecisionPolicy) -> Result<Scalar> {
    if k > n {
        return Ok(policy.initial_mode().zero());
    }
    escalate(policy, |mode| {
        let s1 = CoeffTable::stirling1_unsigned(n, Mode::Exact);
        let ng = -mode.rational(gamma);
        let terms: Vec<Scalar> = (k..=n)
            .map(|i| {
                binomial(n as u64, i as u64, mode)
                    * s1.get(i, k).expect("in range").in_mode(mode)
                    * rising(&ng, (n - i) as u64)
            })
            .collect();
        signed_sum(&terms, policy)
    })
}

/// Row n of the scaled coefficients D(n,k) = 𝒞(n,k;σ,γ)/σ^k, k = 0..=n,
/// valid for every σ including 0. Computed by the scaled recurrence in
/// O(n²) time and O(n) memory.
pub fn scaled_gfc_row(n: usize, sigma: &Rational, gamma: &Rational, mode: Mode) -> Vec<Scalar> {
    match mode {
        Mode::Exact => {
            let mut row: Vec<Rational> = Vec::with_capacity(n + 1);
            row.push(Rational::from(1));
            let mut c = Rational::new();
            for i in 0..n {
                row.push(Rational::new());
                let base = Rational::from(i as i64) - gamma;
                for k in (0..=i + 1).rev() {
                    if k <= i {
                        c.clone_from(&base);
                        c -= Rational::from(sigma * k as u64);
                        row[k] *= &c;
                    }
                    if k >= 1 {
                        let (lo, hi) = row.split_at_mut(k);
                        hi[0] += &lo[k - 1];
                    }
                }
            }
            row.into_iter().map(Scalar::Exact).collect()
        }
        Mode::Float(p) => {
            use rug::Float;
            let s = Float::with_val(p, sigma);
            let mut row: Vec<Float> = Vec::with_capacity(n + 1);
            row.push(Float::with_val(p, 1));
            let mut c = Float::new(p);
            let mut base = Float::with_val(p, gamma);
            base = -base;
            for i in 0..n {
                row.push(Float::new(p));
                for k in (0..=i + 1).rev() {
                    if k <= i {
                        // c = (i − γ) − σk
                        c.assign_mul_u(&s, k as u32);
                        c.sub_from_ref(&base);
                        row[k] *= &c;
                    }
                    if k >= 1 {
                        let (lo, hi) = row.split_at_mut(k);
                        hi[0] += &lo[k - 1];
                    }
                }
                base += 1;
            }
            row.into_iter().map(Scalar::Float).collect()
        }
    }
}

trait FloatExt {
    fn assign_mul_u(&mut self, a: &rug::Float, k: u32);
    fn sub_from_ref(&mut self, a: &rug::Float);
}

impl FloatExt for rug::Float {
    fn assign_mul_u(&mut self, a: &rug::Float, k: u32) {
        use rug::Assign;
        self.assign(a * k);
    }
    fn sub_from_ref(&mut self, a: &rug::Float) {
        use rug::ops::SubFrom;
        self.sub_from(a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rel_diff;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    fn ex(a: i64, b: i64) -> Scalar {
        Scalar::Exact(q(a, b))
    }

    #[test]
    fn stirling_examples() {
        let m = Mode::Exact;
        assert_eq!(stirling1_unsigned(0, 0, m), ex(1, 1));
        assert_eq!(stirling1_unsigned(3, 2, m), ex(3, 1));
        assert_eq!(stirling1_unsigned(4, 5, m), ex(0, 1));
        assert_eq!(stirling2(3, 2, m), ex(3, 1));
        assert_eq!(stirling2(7, 7, m), ex(1, 1));
        assert_eq!(stirling2(5, 1, m), ex(1, 1));
        let t = CoeffTable::stirling2(10, m);
        assert_eq!(t.get(10, 3).unwrap(), &ex(9330, 1));
        let t = CoeffTable::stirling1_unsigned(10, m);
        assert_eq!(t.get(10, 3).unwrap(), &ex(1_172_700, 1));
        assert!(t.get(11, 0).is_err());
    }

    #[test]
    fn gfc_examples() {
        let m = Mode::Exact;
        let half = q(1, 2);
        assert_eq!(gfc(0, 0, &half, m).unwrap(), ex(1, 1));
        for n in 1..6 {
            assert!(gfc(n, 0, &half, m).unwrap().is_zero());
        }
        assert_eq!(gfc(3, 1, &half, m).unwrap(), ex(3, 8));
        assert!(gfc(3, 1, &q(0, 1), m).is_err());

        let pol = PrecisionPolicy::exact();
        assert_eq!(gfc_noncentral(0, 0, &half, &q(1, 1), &pol).unwrap(), ex(1, 1));
        assert_eq!(gfc_noncentral(2, 0, &half, &q(1, 1), &pol).unwrap(), ex(0, 1));
        assert_eq!(gfc_noncentral(3, 1, &half, &q(0, 1), &pol).unwrap(), ex(3, 8));

        assert_eq!(gfc_zero_limit(0, 0, &q(3, 7), &pol).unwrap(), ex(1, 1));
        assert_eq!(gfc_zero_limit(2, 1, &q(-1, 1), &pol).unwrap(), ex(3, 1));
        for n in 0..8 {
            for k in 0..=n {
                assert_eq!(
                    gfc_zero_limit(n, k, &q(0, 1), &pol).unwrap(),
                    stirling1_unsigned(n, k, m)
                );
            }
        }
    }

    #[test]
    fn noncentral_first_column_is_rising_of_minus_gamma() {
        let pol = PrecisionPolicy::exact();
        for n in 1..8 {
            let g = q(3, 4);
            assert_eq!(
                gfc_noncentral(n, 0, &q(2, 5), &g, &pol).unwrap(),
                rising(&ex(-3, 4), n as u64)
            );
        }
    }

    #[test]
    fn recurrence_matches_direct_sum() {
        let pol = PrecisionPolicy::exact();
        for (s, g) in [(q(1, 2), q(0, 1)), (q(3, 10), q(7, 3)), (q(-1, 1), q(-5, 2)), (q(2, 3), q(-1, 4))] {
            let table = CoeffTable::gfc_noncentral(30, &s, &g, Mode::Exact);
            for n in 0..=30 {
                for k in 0..=n {
                    let direct = gfc_direct(n, k, &s, &g, Mode::Exact, &pol).unwrap();
                    assert_eq!(table.get(n, k).unwrap(), &direct, "n={n} k={k} s={s} g={g}");
                }
            }
        }
    }

    #[test]
    fn scaled_rows_match_tables() {
        for (s, g) in [(q(1, 2), q(-3, 1)), (q(0, 1), q(-7, 2)), (q(-1, 1), q(-4, 1))] {
            let table = CoeffTable::gfc_noncentral(12, &s, &g, Mode::Exact);
            for n in 0..=12 {
                let row = scaled_gfc_row(n, &s, &g, Mode::Exact);
                let frow = scaled_gfc_row(n, &s, &g, Mode::Float(128));
                for k in 0..=n {
                    if s.cmp0() != std::cmp::Ordering::Equal {
                        let expect = table.get(n, k).unwrap() / &Scalar::Exact(s.clone()).pow(k as u32);
                        assert_eq!(row[k], expect);
                    }
                    assert!(rel_diff(&row[k], &frow[k]) < 1e-30);
                }
            }
            if s.cmp0() == std::cmp::Ordering::Equal {
                let zl = CoeffTable::gfc_zero_limit(12, &g, Mode::Exact);
                let row = scaled_gfc_row(12, &s, &g, Mode::Exact);
                for k in 0..=12 {
                    assert_eq!(&row[k], zl.get(12, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn vandermonde_identity() {
        // (σt − γ)_n = Σ_k 𝒞(n,k;σ,γ)(t)_k
        let m = Mode::Exact;
        for (s, g, t) in [(q(1, 2), q(0, 1), q(7, 3)), (q(3, 7), q(2, 5), q(-11, 4)), (q(-1, 1), q(1, 3), q(5, 2))] {
            let table = CoeffTable::gfc_noncentral(25, &s, &g, m);
            let tt = Scalar::Exact(t.clone());
            let lhs_arg = Scalar::Exact(Rational::from(&s * &t) - &g);
            for n in 0..=25 {
                let rhs = (0..=n).fold(m.zero(), |acc, k| {
                    acc + table.get(n, k).unwrap() * rising(&tt, k as u64)
                });
                assert_eq!(rising(&lhs_arg, n as u64), rhs);
            }
        }
    }

    #[test]
    fn central_is_noncentral_at_zero_gamma() {
        for s in [q(1, 2), q(1, 3), q(-1, 1)] {
            let a = CoeffTable::gfc(15, &s, Mode::Exact);
            let b = CoeffTable::gfc_noncentral(15, &s, &q(0, 1), Mode::Exact);
            for n in 0..=15 {
                assert_eq!(a.row(n).unwrap(), b.row(n).unwrap());
            }
        }
    }

    #[test]
    fn scaled_gfc_tends_to_stirling() {
        let mut last = f64::INFINITY;
        for s in [q(1, 10_000), q(1, 1_000_000)] {
            let t = CoeffTable::gfc(10, &s, Mode::Exact);
            let mut worst: f64 = 0.0;
            for k in 1..=10 {
                let scaled = t.get(10, k).unwrap() / &Scalar::Exact(s.clone()).pow(k as u32);
                worst = worst.max(rel_diff(&scaled, &stirling1_unsigned(10, k, Mode::Exact)));
            }
            assert!(worst < last);
            last = worst;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn stirling2_nested_binomials() {
        // S(n,m) = (1/m!) Σ_{n > i_1 > ... > i_{m−1} ≥ 1} C(n,i_1)C(i_1,i_2)···C(i_{m−2},i_{m−1})
        fn chains(top: u64, depth: usize) -> Integer {
            if depth == 0 {
                return Integer::from(1);
            }
            let mut acc = Integer::new();
            for i in 1..top {
                acc += Integer::from(Integer::binomial_u(top as u32, i as u32)) * chains(i, depth - 1);
            }
            acc
        }
        for n in 1..=10u64 {
            for m in 1..=n {
                let lhs = Rational::from((chains(n, (m - 1) as usize), Integer::from(Integer::factorial(m as u32))));
                assert_eq!(Scalar::Exact(lhs), stirling2(n as usize, m as usize, Mode::Exact), "n={n} m={m}");
            }
        }
    }
}
