//! Model-specific closed forms for the continuation statistics.
//!
//! The pmfs are written through binomial moments B_r = E[C(X, r)]:
//! P[X = x] = Σ_{r ≥ x} (−1)^{r−x} C(r, x) B_r.

use rug::Rational;

use super::GroupedTuples;
use crate::error::Result;
use crate::models::PartitionData;
use crate::numerics::{
    binomial, falling, factorial, plain_sum, rising, signed_sum_scaled, Mode, PrecisionPolicy, Scalar,
};

/// Generalized binomial a(a−1)…(a−k+1)/k! for integer a of any sign.
fn binomg(a: i64, k: usize, mode: Mode) -> Scalar {
    falling(&mode.int(a), k as u64) / factorial(k as u64, mode)
}

/// P[X = x] for x = 0..b.len() from binomial moments.
pub fn pmf_from_binomial_moments(b: &[Scalar], policy: &PrecisionPolicy) -> Result<Vec<Scalar>> {
    let mode = match b.first() {
        Some(v) => v.mode(),
        None => return Ok(Vec::new()),
    };
    (0..b.len())
        .map(|x| {
            let terms: Vec<Scalar> = (x..b.len())
                .map(|r| {
                    let v = binomial(r as u64, x as u64, mode) * &b[r];
                    if (r - x) % 2 == 0 {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            signed_sum_scaled(&terms, policy, Some(1.0))
        })
        .collect()
}

/// B_r for old blocks of size l under the Pitman–Yor family (σ = 0 gives the
/// Dirichlet case):
/// Σ_{|c| = r, n_c ≤ l} m!/(∏(l−n_c)! (m−ν)!) ∏(n_c−σ)_{l−n_c}
/// (θ+n−|n_c|+rσ)_{m−ν}/(θ+n)_m, with ν = Σ(l−n_c).
pub fn pitman_o_binomial_moment(
    sigma: &Rational,
    theta: &Rational,
    data: &PartitionData,
    m: usize,
    l: usize,
    r: usize,
    mode: Mode,
) -> Scalar {
    if r == 0 {
        return mode.one();
    }
    let n = data.n();
    if n == 0 {
        return mode.zero();
    }
    let s = mode.rational(sigma);
    let th = mode.rational(theta);
    let base = &th + n as i64;
    let denom = rising(&base, m as u64);
    let mf = factorial(m as u64, mode);
    let mut total = mode.zero();
    for sel in GroupedTuples::new(data.counts(), l, r) {
        let nu = r * l - sel.total;
        if nu > m {
            continue;
        }
        let mut term = mode.integer(&sel.weight) * &mf / factorial((m - nu) as u64, mode);
        for &(t, k) in &sel.parts {
            let f = rising(&(mode.int(t as i64) - &s), (l - t) as u64) / factorial((l - t) as u64, mode);
            term = term * f.pow(k as u32);
        }
        let shift = &(&base - sel.total as i64) + &(&s * r as i64);
        total = total + term * rising(&shift, (m - nu) as u64);
    }
    total / denom
}

/// B_r for new blocks of size l under the Pitman–Yor family:
/// m!/(r!(m−rl)!) ∏_{i<r}(θ+jσ+iσ) ((1−σ)_{l−1}/l!)^r (θ+n+rσ)_{m−rl}/(θ+n)_m.
pub fn pitman_n_binomial_moment(
    sigma: &Rational,
    theta: &Rational,
    n: usize,
    j: usize,
    m: usize,
    l: usize,
    r: usize,
    mode: Mode,
) -> Scalar {
    if r == 0 {
        return mode.one();
    }
    if r * l > m {
        return mode.zero();
    }
    let s = mode.rational(sigma);
    let th = mode.rational(theta);
    let per = rising(&(mode.one() - &s), (l - 1) as u64) / factorial(l as u64, mode);
    let base = &th + n as i64;
    factorial(m as u64, mode) / (factorial(r as u64, mode) * factorial((m - r * l) as u64, mode))
        * leading_ratio(&s, &th, n, j, m, r, mode)
        * per.pow(r as u32)
        * rising(&(&base + &(&s * r as i64)), (m - r * l) as u64)
}

/// ∏_{i<r}(θ+jσ+iσ)/(θ+n)_m for r ≥ 1 and m ≥ 1. Without data (n = j = 0) the
/// common factor θ is cancelled, which keeps θ = 0 well defined.
fn leading_ratio(s: &Scalar, th: &Scalar, n: usize, j: usize, m: usize, r: usize, mode: Mode) -> Scalar {
    let first = if n == 0 { 1 } else { 0 };
    let mut prod = mode.one();
    for i in first..r {
        prod = prod * (th + &(s * (j + i) as i64));
    }
    if n == 0 {
        prod / rising(&(th + 1), (m - 1) as u64)
    } else {
        prod / rising(&(th + n as i64), m as u64)
    }
}

/// Prefactor m!/((n)_m (γ+n)_m) shared by the Gnedin forms.
fn gnedin_prefactor(g: &Scalar, n: usize, m: usize, mode: Mode) -> Scalar {
    factorial(m as u64, mode) / (rising(&mode.int(n as i64), m as u64) * rising(&(g + n as i64), m as u64))
}

/// B_r for old blocks of size l under the Gnedin model with ζ = 0 (n ≥ 1):
/// m!/((n)_m(γ+n)_m) Σ_{|c| = r} ∏ (n_c+1)_{l−n_c}/(l−n_c)!
/// Σ_k binom(m'+n−|n_c|+j−r−1, m'−k)/k! (γ+n−j)_{m−k} (j)_k (j−γ)_k,
/// with m' = m − rl + |n_c|.
pub fn gnedin_o_binomial_moment(gamma: &Rational, data: &PartitionData, m: usize, l: usize, r: usize, mode: Mode) -> Scalar {
    let g = mode.rational(gamma);
    let n = data.n();
    let j = data.j();
    let jj = mode.int(j as i64);
    let j_minus_g = &jj - &g;
    let gnj = &g + (n - j) as i64;
    let mut total = mode.zero();
    for sel in GroupedTuples::new(data.counts(), l, r) {
        if m + sel.total < r * l {
            continue;
        }
        let mp = m + sel.total - r * l;
        let mut pr = mode.integer(&sel.weight);
        for &(t, k) in &sel.parts {
            let f = rising(&mode.int(t as i64 + 1), (l - t) as u64) / factorial((l - t) as u64, mode);
            pr = pr * f.pow(k as u32);
        }
        let a = (mp + n + j) as i64 - (sel.total + r) as i64 - 1;
        let inner = plain_sum(
            (0..=mp).map(|k| {
                binomg(a, mp - k, mode) / factorial(k as u64, mode)
                    * rising(&gnj, (m - k) as u64)
                    * rising(&jj, k as u64)
                    * rising(&j_minus_g, k as u64)
            }),
            mode,
        );
        total = total + pr * inner;
    }
    total * gnedin_prefactor(&g, n, m, mode)
}

/// B_r for new blocks of size l under the Gnedin model with ζ = 0 (n ≥ 1):
/// m!/((n)_m(γ+n)_m r!) Σ_{k=0}^{m−rl} binom(m−rl+n+j−1, m−rl−k)/k!
/// (γ+n−j)_{m−r−k} (j)_{k+r} (j−γ)_{k+r}.
pub fn gnedin_n_binomial_moment(gamma: &Rational, n: usize, j: usize, m: usize, l: usize, r: usize, mode: Mode) -> Scalar {
    if r * l > m {
        return mode.zero();
    }
    let g = mode.rational(gamma);
    let jj = mode.int(j as i64);
    let j_minus_g = &jj - &g;
    let gnj = &g + (n - j) as i64;
    let big = m - r * l;
    let a = (big + n + j) as i64 - 1;
    let inner = plain_sum(
        (0..=big).map(|k| {
            binomg(a, big - k, mode) / factorial(k as u64, mode)
                * rising(&gnj, (m - r - k) as u64)
                * rising(&jj, (k + r) as u64)
                * rising(&j_minus_g, (k + r) as u64)
        }),
        mode,
    );
    inner * gnedin_prefactor(&g, n, m, mode) / factorial(r as u64, mode)
}

/// Dirichlet estimator of old blocks of size l:
/// Σ_{t=1}^{l} C(m, l−t) m_t (t)_{l−t} (θ+n−t)_{m−l+t}/(θ+n)_m.
pub fn dp_o_hat(theta: &Rational, data: &PartitionData, m: usize, l: usize, mode: Mode) -> Scalar {
    pitman_o_hat(&Rational::new(), theta, data, m, l, mode)
}

/// Dirichlet estimator of new blocks of size l: (l−1)! C(m, l) θ/(θ+n+m−l)_l.
pub fn dp_n_hat(theta: &Rational, n: usize, m: usize, l: usize, mode: Mode) -> Scalar {
    if l > m {
        return mode.zero();
    }
    let th = mode.rational(theta);
    factorial((l - 1) as u64, mode) * binomial(m as u64, l as u64, mode) * &th
        / rising(&(&th + (n + m - l) as i64), l as u64)
}

/// Dirichlet estimator of all blocks of size l.
pub fn dp_m_hat(theta: &Rational, data: &PartitionData, m: usize, l: usize, mode: Mode) -> Scalar {
    dp_o_hat(theta, data, m, l, mode) + dp_n_hat(theta, data.n(), m, l, mode)
}

/// Pitman–Yor estimator of old blocks of size l:
/// Σ_{t=1}^{l} C(m, l−t) m_t (t−σ)_{l−t} (θ+n−t+σ)_{m−l+t}/(θ+n)_m.
pub fn pitman_o_hat(sigma: &Rational, theta: &Rational, data: &PartitionData, m: usize, l: usize, mode: Mode) -> Scalar {
    if data.n() == 0 {
        return mode.zero();
    }
    let s = mode.rational(sigma);
    let th = mode.rational(theta);
    let base = &th + data.n() as i64;
    let mut total = mode.zero();
    for (t, mt) in data.counts().iter() {
        if t > l || m + t < l {
            continue;
        }
        let rest = (m + t - l) as u64;
        total = total
            + binomial(m as u64, (l - t) as u64, mode)
                * mode.uint(mt)
                * rising(&(mode.int(t as i64) - &s), (l - t) as u64)
                * rising(&(&(&base - t as i64) + &s), rest);
    }
    total / rising(&base, m as u64)
}

/// Pitman–Yor estimator of new blocks of size l:
/// C(m, l) (1−σ)_{l−1} (θ+jσ) (θ+n+σ)_{m−l}/(θ+n)_m.
pub fn pitman_n_hat(sigma: &Rational, theta: &Rational, n: usize, j: usize, m: usize, l: usize, mode: Mode) -> Scalar {
    if l > m {
        return mode.zero();
    }
    let s = mode.rational(sigma);
    let th = mode.rational(theta);
    let base = &th + n as i64;
    binomial(m as u64, l as u64, mode)
        * rising(&(mode.one() - &s), (l - 1) as u64)
        * leading_ratio(&s, &th, n, j, m, 1, mode)
        * rising(&(&base + &s), (m - l) as u64)
}

/// Pitman–Yor estimator of all blocks of size l: the old-block sum plus the
/// new-block term.
pub fn pitman_m_hat(sigma: &Rational, theta: &Rational, data: &PartitionData, m: usize, l: usize, mode: Mode) -> Scalar {
    pitman_o_hat(sigma, theta, data, m, l, mode) + pitman_n_hat(sigma, theta, data.n(), data.j(), m, l, mode)
}

/// Pitman–Yor expected number of new blocks of any size:
/// (θ/σ + j)((θ+n+σ)_m/(θ+n)_m − 1).
pub fn pitman_k_hat(sigma: &Rational, theta: &Rational, n: usize, j: usize, m: usize, mode: Mode) -> Scalar {
    let s = mode.rational(sigma);
    let th = mode.rational(theta);
    if m == 0 {
        return mode.zero();
    }
    let base = &th + n as i64;
    let diff = rising(&(&base + &s), m as u64) - rising(&base, m as u64);
    if n == 0 {
        // θ/σ · 1/(θ)_m = 1/(σ (θ+1)_{m−1})
        return diff / (s * rising(&(&th + 1), (m - 1) as u64));
    }
    (&(&th / &s) + j as i64) * diff / rising(&base, m as u64)
}

/// Dirichlet expected number of new blocks of any size: Σ_{i<m} θ/(θ+n+i).
pub fn dp_k_hat(theta: &Rational, n: usize, m: usize, mode: Mode) -> Scalar {
    let th = mode.rational(theta);
    plain_sum((0..m).map(|i| &th / &(&th + (n + i) as i64)), mode)
}
