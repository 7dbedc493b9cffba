//! Unconditional law of M_{l,n}, the number of blocks of size l among n
//! observations: factorial moments, closed-form pmfs and the generic
//! inversion of a factorial-moment sequence.

use crate::combinatorics::scaled_gfc_row;
use crate::error::{Error, Result};
use crate::models::GibbsModel;
use crate::numerics::{
    binomial, escalate, factorial, falling, plain_sum, rising, signed_sum_scaled, Mode, PrecisionPolicy, Scalar,
};
use rug::Rational;

/// Falling-factorial moments E[(X)_{[r]}], r = 0..=r_max, of a variable
/// supported on {0, …, support_bound}.
#[derive(Clone, Debug)]
pub struct MomentSequence {
    pub values: Vec<Scalar>,
    pub support_bound: usize,
}

impl MomentSequence {
    pub fn get(&self, r: usize) -> Scalar {
        match self.values.get(r) {
            Some(v) => v.clone(),
            None => self.values[0].mode().zero(),
        }
    }

    /// Inverts the sequence:
    /// P[X = x] = Σ_{k ≥ x} (−1)^{k−x} E[(X)_{[k]}] / (x!(k−x)!).
    ///
    /// Needs `values` up to `support_bound`. Runs once at the precision of the
    /// stored values; wrap the computation of the sequence in [`escalate`]
    /// (as [`invert_moments`] does) to retry at higher precision.
    pub fn to_pmf(&self, policy: &PrecisionPolicy) -> Result<Pmf> {
        let k_max = self.support_bound;
        if self.values.len() <= k_max {
            return Err(Error::IndexOutOfRange(format!(
                "need moments up to order {}, have {}",
                k_max,
                self.values.len().saturating_sub(1)
            )));
        }
        let mode = self.values[0].mode();
        let mut probs = Vec::with_capacity(k_max + 1);
        for x in 0..=k_max {
            let xf = factorial(x as u64, mode);
            let terms: Vec<Scalar> = (x..=k_max)
                .map(|k| {
                    let t = &self.values[k] / &(&xf * &factorial((k - x) as u64, mode));
                    if (k - x) % 2 == 0 {
                        t
                    } else {
                        -t
                    }
                })
                .collect();
            probs.push(signed_sum_scaled(&terms, policy, Some(1.0))?);
        }
        Pmf::from_probs(probs, policy)
    }
}

/// Probability mass function on {0, …, len−1}.
#[derive(Clone, Debug)]
pub struct Pmf {
    pub probs: Vec<Scalar>,
    /// |1 − Σ probs|.
    pub defect: f64,
    /// Support points whose slightly negative value (within tolerance) was set to 0.
    pub clamped: Vec<usize>,
}

impl Pmf {
    /// Validates raw probabilities: values below `−target_rel_error` fail with
    /// [`Error::PrecisionExhausted`] (so that [`escalate`] retries), smaller
    /// negative values are clamped to zero and recorded.
    pub fn from_probs(mut probs: Vec<Scalar>, policy: &PrecisionPolicy) -> Result<Pmf> {
        let tol = policy.target_rel_error;
        let mut clamped = Vec::new();
        for (x, p) in probs.iter_mut().enumerate() {
            if p.signum() < 0 {
                let v = p.to_f64();
                if v < -tol || p.mode().is_exact() {
                    return Err(match p.mode() {
                        Mode::Float(bits) => Error::PrecisionExhausted {
                            bits,
                            rel_error: -v,
                            target: tol,
                            value: v,
                        },
                        Mode::Exact => Error::Domain(format!("negative probability {} at {}", v, x)),
                    });
                }
                *p = p.mode().zero();
                clamped.push(x);
            }
        }
        let mode = probs.first().map(|p| p.mode()).unwrap_or(Mode::Exact);
        let total = plain_sum(probs.iter().cloned(), mode);
        let defect = (&total - &mode.one()).abs().to_f64();
        Ok(Pmf { probs, defect, clamped })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// P[X = x] (zero outside the stored support).
    pub fn prob(&self, x: usize) -> Scalar {
        match self.probs.get(x) {
            Some(p) => p.clone(),
            None => self.mode().zero(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.probs.first().map(|p| p.mode()).unwrap_or(Mode::Exact)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.to_f64()).collect()
    }

    /// E[(X)_{[r]}] computed from the pmf.
    pub fn factorial_moment(&self, r: usize) -> Scalar {
        let mode = self.mode();
        plain_sum(
            self.probs
                .iter()
                .enumerate()
                .map(|(x, p)| p * &falling(&mode.int(x as i64), r as u64)),
            mode,
        )
    }

    pub fn mean(&self) -> Scalar {
        self.factorial_moment(1)
    }

    /// Total-variation distance to another pmf given as `f64` values on {0, 1, …}.
    pub fn total_variation(&self, other: &[f64]) -> f64 {
        let n = self.len().max(other.len());
        let mine = self.to_f64();
        0.5 * (0..n)
            .map(|x| (mine.get(x).copied().unwrap_or(0.0) - other.get(x).copied().unwrap_or(0.0)).abs())
            .sum::<f64>()
    }

    /// Largest absolute pointwise difference to another pmf.
    pub fn max_abs_diff(&self, other: &Pmf) -> f64 {
        let n = self.len().max(other.len());
        (0..n)
            .map(|x| (&self.prob(x) - &other.prob(x)).abs().to_f64())
            .fold(0.0, f64::max)
    }
}

/// Computes a moment sequence under `policy` and inverts it, escalating the
/// precision of the whole computation when the inversion cancels badly.
pub fn invert_moments(
    policy: &PrecisionPolicy,
    mut moments: impl FnMut(Mode) -> Result<MomentSequence>,
) -> Result<Pmf> {
    escalate(policy, |mode| moments(mode)?.to_pmf(policy))
}

/// Which evaluation path a pmf should use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Closed form when the model has one, inversion otherwise.
    Auto,
    /// Closed form only; [`Error::NoClosedForm`] if unavailable.
    ClosedForm,
    /// Factorial-moment inversion.
    Inversion,
}

fn check_ln(n: usize, l: usize) -> Result<()> {
    if l == 0 || l > n {
        return Err(Error::IndexOutOfRange(format!("need 1 <= l <= n, got l = {}, n = {}", l, n)));
    }
    Ok(())
}

/// E[(M_{l,n})_{[r]}] for any Gibbs model:
/// ((1−σ)_{l−1}/l!)^r (n)_{[rl]} Σ_j V_{n,j} 𝒞(n−rl, j−r; σ)/σ^{j−r},
/// with the scaled coefficients taken from the σ-uniform recurrence, so the
/// same code covers σ = 0.
pub fn m_prior_factorial_moment_generic(model: &GibbsModel, n: usize, l: usize, r: usize, mode: Mode) -> Result<Scalar> {
    check_ln(n, l)?;
    if r == 0 {
        return Ok(mode.one());
    }
    if r * l > n {
        return Ok(mode.zero());
    }
    let sigma = model.sigma();
    let s = mode.rational(&sigma);
    let rest = n - r * l;
    let row = scaled_gfc_row(rest, &sigma, &Rational::new(), mode);
    let mut sum = mode.zero();
    for (k, d) in row.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        sum = sum + model.v_weight(n, k + r, mode)? * d;
    }
    let per = rising(&(mode.one() - &s), (l - 1) as u64) / factorial(l as u64, mode);
    Ok(per.pow(r as u32) * falling(&mode.int(n as i64), (r * l) as u64) * sum)
}

/// E[(M_{l,n})_{[r]}], dispatched by model: the Dirichlet closed form
/// (n)_{[rl]} θ^r (θ)_{n−rl} / (l^r (θ)_n), the Pitman–Yor product form
/// (n)_{[rl]} ((1−σ)_{l−1}/l!)^r ∏_{i<r}(θ+iσ) (θ+rσ)_{n−rl}/(θ)_n, the Gnedin
/// form for ζ = 0, and the generic coefficient sum otherwise.
pub fn m_prior_factorial_moment(model: &GibbsModel, n: usize, l: usize, r: usize, mode: Mode) -> Result<Scalar> {
    check_ln(n, l)?;
    if r == 0 {
        return Ok(mode.one());
    }
    if r * l > n {
        return Ok(mode.zero());
    }
    match model {
        GibbsModel::Dirichlet { theta } => {
            let t = mode.rational(theta);
            Ok(falling(&mode.int(n as i64), (r * l) as u64) * t.pow(r as u32) * rising(&t, (n - r * l) as u64)
                / (mode.int(l as i64).pow(r as u32) * rising(&t, n as u64)))
        }
        GibbsModel::PitmanYor { sigma, theta } => {
            let s = mode.rational(sigma);
            let th = mode.rational(theta);
            let per = rising(&(mode.one() - &s), (l - 1) as u64) / factorial(l as u64, mode);
            Ok(falling(&mode.int(n as i64), (r * l) as u64)
                * per.pow(r as u32)
                * pd_weight_ratio(&s, &th, n, r, n - r * l, mode))
        }
        GibbsModel::Gnedin { .. } if model.gnedin_zero_zeta().is_some() => {
            let g = model.gnedin_zero_zeta().expect("zeta = 0");
            Ok(gnedin_prior_factorial_moment(&g, n, l, r, mode))
        }
        _ => m_prior_factorial_moment_generic(model, n, l, r, mode),
    }
}

/// Prior factorial moments for the Gnedin model with ζ = 0.
pub fn gnedin_prior_factorial_moment(gamma: &Rational, n: usize, l: usize, r: usize, mode: Mode) -> Scalar {
    if r == 0 {
        return mode.one();
    }
    if r * l > n {
        return mode.zero();
    }
    let g = mode.rational(gamma);
    let one_minus_g = mode.one() - &g;
    let a = (r * l - r) as u64;
    if n == r * l {
        return factorial(r as u64, mode) * (l as i64) * rising(&g, a) * rising(&one_minus_g, (r - 1) as u64)
            / rising(&(&g + 1), (r * l - 1) as u64);
    }
    let big = n - r * l - 1;
    let inner = plain_sum(
        (0..=big).map(|k| {
            binomial(big as u64, k as u64, mode) * factorial((r + k) as u64, mode) / factorial((1 + k) as u64, mode)
                * rising(&(&g + a as i64), (big - k) as u64)
                * rising(&(mode.int(r as i64 + 1) - &g), k as u64)
        }),
        mode,
    );
    mode.int(n as i64) * rising(&g, a) * rising(&one_minus_g, r as u64) / rising(&(&g + 1), (n - 1) as u64) * inner
}

/// Factorial moments E[(M_{l,n})_{[r]}] for r = 0..=⌊n/l⌋.
pub fn m_prior_moments(model: &GibbsModel, n: usize, l: usize, mode: Mode) -> Result<MomentSequence> {
    check_ln(n, l)?;
    let k = n / l;
    let values = (0..=k)
        .map(|r| m_prior_factorial_moment(model, n, l, r, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence { values, support_bound: k })
}

/// Law of M_{l,n} on {0, …, ⌊n/l⌋}, from the model's closed form when it has
/// one and by factorial-moment inversion otherwise.
pub fn m_prior_pmf(model: &GibbsModel, n: usize, l: usize, policy: &PrecisionPolicy) -> Result<Pmf> {
    m_prior_pmf_via(model, n, l, Route::Auto, policy)
}

pub fn m_prior_pmf_via(model: &GibbsModel, n: usize, l: usize, route: Route, policy: &PrecisionPolicy) -> Result<Pmf> {
    check_ln(n, l)?;
    let has_closed = !matches!(model, GibbsModel::Gnedin { .. }) || model.gnedin_zero_zeta().is_some();
    let closed = match route {
        Route::Auto => has_closed,
        Route::ClosedForm if !has_closed => {
            return Err(Error::NoClosedForm("Gnedin prior pmf needs zeta = 0".into()));
        }
        Route::ClosedForm => true,
        Route::Inversion => false,
    };
    if !closed {
        return invert_moments(policy, |mode| m_prior_moments(model, n, l, mode));
    }
    escalate(policy, |mode| {
        let probs = match model {
            GibbsModel::Dirichlet { theta } => dp_prior_pmf(theta, n, l, mode, policy)?,
            GibbsModel::PitmanYor { sigma, theta } => (0..=n / l)
                .map(|x| pd_prior_pmf_point(sigma, theta, n, l, x, mode, policy))
                .collect::<Result<Vec<_>>>()?,
            GibbsModel::Gnedin { gamma, .. } => gnedin_prior_pmf(gamma, n, l, mode, policy)?,
        };
        Pmf::from_probs(probs, policy)
    })
}

/// Dirichlet prior pmf on {0, …, ⌊n/l⌋}:
/// n!/(x!(θ)_n) (θ/l)^x Σ_{t=0}^{⌊n/l⌋−x} (−1)^t/t! (θ)_{n−xl−tl}/(n−xl−tl)! (θ/l)^t.
pub fn dp_prior_pmf(theta: &Rational, n: usize, l: usize, mode: Mode, policy: &PrecisionPolicy) -> Result<Vec<Scalar>> {
    let t_ = mode.rational(theta);
    let tl = &t_ / &mode.int(l as i64);
    // a[k] = (θ)_k / k!
    let mut a = Vec::with_capacity(n + 1);
    a.push(mode.one());
    for k in 1..=n {
        let next = &a[k - 1] * &(&t_ + (k as i64 - 1)) / &mode.int(k as i64);
        a.push(next);
    }
    let q = n / l;
    // c[t] = (θ/l)^t / t!
    let mut c = Vec::with_capacity(q + 1);
    c.push(mode.one());
    for t in 1..=q {
        let next = &c[t - 1] * &tl / &mode.int(t as i64);
        c.push(next);
    }
    // n!/(θ)_n = 1/a[n]
    let pref = a[n].recip();
    (0..=q)
        .map(|x| {
            let px = &pref * &c[x];
            let terms: Vec<Scalar> = (0..=(q - x))
                .map(|t| {
                    let v = &px * &a[n - x * l - t * l] * &c[t];
                    if t % 2 == 0 {
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

/// ∏_{i<q}(θ+iσ) (θ+qσ)_{rest}/(θ)_n, where rest = n − ql ≥ 0. The factor θ
/// common to both sides is cancelled so that θ = 0 is covered.
fn pd_weight_ratio(s: &Scalar, th: &Scalar, n: usize, q: usize, rest: usize, mode: Mode) -> Scalar {
    if q == 0 {
        return mode.one();
    }
    let mut prod = mode.one();
    for i in 1..q {
        prod = prod * (th + &(s * i as i64));
    }
    prod * rising(&(th + &(s * q as i64)), rest as u64) / rising(&(th + 1), (n - 1) as u64)
}

/// Pitman–Yor prior pmf:
/// Σ_t (−1)^t n!/(t! x! (n−lx−lt)!) σ^{x+t} (θ/σ)_{x+t} ((1−σ)_{l−1}/l!)^{x+t}
/// (θ + (x+t)σ)_{n−lx−lt} / (θ)_n.
pub fn pd_prior_pmf_point(
    sigma: &Rational,
    theta: &Rational,
    n: usize,
    l: usize,
    x: usize,
    mode: Mode,
    policy: &PrecisionPolicy,
) -> Result<Scalar> {
    if x * l > n {
        return Ok(mode.zero());
    }
    let s = mode.rational(sigma);
    let th = mode.rational(theta);
    let per = rising(&(mode.one() - &s), (l - 1) as u64) / factorial(l as u64, mode);
    let terms: Vec<Scalar> = (0..=(n / l - x))
        .map(|t| {
            let q = x + t;
            let rest = (n - l * q) as u64;
            let v = factorial(n as u64, mode)
                / (factorial(t as u64, mode) * factorial(x as u64, mode) * factorial(rest, mode))
                * pd_weight_ratio(&s, &th, n, q, rest as usize, mode)
                * per.pow(q as u32);
            if t % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect();
    signed_sum_scaled(&terms, policy, Some(1.0))
}

/// Gnedin (ζ = 0) prior pmf on {0, …, ⌊n/l⌋}. Points x ≥ 1 use the two-case
/// form (n/l integral or not), with the factors (γ)_{rl−r} and (γ+rl−r) of
/// the factorial moments;
/// P[M = 0] is the complement.
pub fn gnedin_prior_pmf(
    gamma: &Rational,
    n: usize,
    l: usize,
    mode: Mode,
    policy: &PrecisionPolicy,
) -> Result<Vec<Scalar>> {
    let g = mode.rational(gamma);
    let one_minus_g = mode.one() - &g;
    let q = n / l;
    let exact_fit = n % l == 0;
    let pref_base = mode.int(n as i64) / rising(&(&g + 1), (n - 1) as u64);
    let inner = |r: usize| -> Scalar {
        let a = (r * l - r) as u64;
        let big = n - r * l - 1;
        let s = plain_sum(
            (0..=big).map(|k| {
                binomial(big as u64, k as u64, mode) * factorial((r + k) as u64, mode)
                    / factorial((1 + k) as u64, mode)
                    * rising(&(&g + a as i64), (big - k) as u64)
                    * rising(&(mode.int(r as i64 + 1) - &g), k as u64)
            }),
            mode,
        );
        rising(&g, a) * rising(&one_minus_g, r as u64) * s
    };
    let upper = if exact_fit { q - 1 } else { q };
    let inner: Vec<Scalar> = (0..=upper).map(|r| if r == 0 { mode.zero() } else { inner(r) }).collect();
    let mut probs = vec![mode.zero(); q + 1];
    for x in 1..=q {
        let px = &pref_base / &factorial(x as u64, mode);
        let mut terms: Vec<Scalar> = (x..=upper)
            .map(|r| {
                let v = &px * &inner[r] / &factorial((r - x) as u64, mode);
                if (r - x) % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        if exact_fit {
            let v = &px * &factorial((q - 1) as u64, mode) * rising(&g, (n - q) as u64)
                * rising(&one_minus_g, (q - 1) as u64)
                / factorial((q - x) as u64, mode);
            terms.push(if (q - x) % 2 == 0 { v } else { -v });
        }
        probs[x] = signed_sum_scaled(&terms, policy, Some(1.0))?;
    }
    let mut rest = vec![mode.one()];
    rest.extend(probs[1..].iter().map(|p| -p));
    probs[0] = signed_sum_scaled(&rest, policy, Some(1.0))?;
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{integer_partitions, FrequencyCounts};
    use crate::numerics::rel_diff;

    fn exact_law(model: &GibbsModel, n: usize, l: usize) -> Vec<Scalar> {
        let mut law = vec![Mode::Exact.zero(); n / l + 1];
        for p in integer_partitions(n) {
            let c = FrequencyCounts::from_block_sizes(&p).unwrap();
            let x = c.get(l) as usize;
            law[x] = &law[x] + &model.sampling_formula(&c, Mode::Exact).unwrap();
        }
        law
    }

    fn models() -> Vec<GibbsModel> {
        vec![
            GibbsModel::dirichlet(1.0).unwrap(),
            GibbsModel::dirichlet(0.5).unwrap(),
            GibbsModel::dirichlet(5.0).unwrap(),
            GibbsModel::pitman_yor(0.5, 1.0).unwrap(),
            GibbsModel::pitman_yor(0.3, 1.0).unwrap(),
            GibbsModel::pitman_yor(0.7, 2.0).unwrap(),
            GibbsModel::pitman_yor(0.5, -0.25).unwrap(),
            GibbsModel::gnedin(0.5, 0.0).unwrap(),
            GibbsModel::gnedin(1.0 / 3.0, 0.0).unwrap(),
            GibbsModel::gnedin(2.0, 3.0).unwrap(),
        ]
    }

    #[test]
    fn prior_examples() {
        let pol = PrecisionPolicy::exact();
        let dp = GibbsModel::dirichlet(1.0).unwrap();
        assert_eq!(m_prior_factorial_moment(&dp, 2, 1, 1, Mode::Exact).unwrap(), Mode::Exact.int(1));
        let pmf = m_prior_pmf(&dp, 2, 2, &pol).unwrap();
        assert_eq!(pmf.probs, vec![Mode::Exact.ratio(1, 2), Mode::Exact.ratio(1, 2)]);
        let py = GibbsModel::pitman_yor(0.5, 1.0).unwrap();
        let pmf = m_prior_pmf(&py, 3, 3, &pol).unwrap();
        assert_eq!(pmf.prob(1), Mode::Exact.ratio(1, 8));
        for model in models() {
            assert!(m_prior_factorial_moment(&model, 5, 2, 3, Mode::Exact).unwrap().is_zero());
        }
        assert!(m_prior_pmf(&dp, 3, 4, &pol).is_err());
    }

    #[test]
    fn moments_and_pmfs_match_enumeration() {
        let pol = PrecisionPolicy::exact();
        for model in models() {
            for n in 1..=9 {
                for l in 1..=n {
                    let law = exact_law(&model, n, l);
                    let auto = m_prior_pmf(&model, n, l, &pol).unwrap();
                    let inv = m_prior_pmf_via(&model, n, l, Route::Inversion, &pol).unwrap();
                    assert_eq!(auto.probs, law, "{} n={} l={}", model, n, l);
                    assert_eq!(inv.probs, law, "{} n={} l={}", model, n, l);
                    for r in 1..=n / l {
                        let a = m_prior_factorial_moment(&model, n, l, r, Mode::Exact).unwrap();
                        let b = m_prior_factorial_moment_generic(&model, n, l, r, Mode::Exact).unwrap();
                        assert_eq!(a, b);
                        assert_eq!(a, auto.factorial_moment(r));
                    }
                }
            }
        }
    }

    #[test]
    fn dp_mean_singletons() {
        // E[M_{1,n}] = nθ/(θ+n−1)
        for theta in [0.5, 1.0, 3.0] {
            let dp = GibbsModel::dirichlet(theta).unwrap();
            let th = crate::numerics::rational_from_f64(theta).unwrap();
            for n in 1..20 {
                let m = m_prior_factorial_moment(&dp, n, 1, 1, Mode::Exact).unwrap();
                let t = Mode::Exact.rational(&th);
                let expect = &t * n as i64 / (&t + (n as i64 - 1));
                assert_eq!(m, expect);
            }
        }
    }

    #[test]
    fn closed_forms_agree_with_inversion_in_float_mode() {
        let pol = PrecisionPolicy::default();
        for model in models() {
            for n in [10usize, 12] {
                for l in 1..=n {
                    let a = m_prior_pmf(&model, n, l, &pol).unwrap();
                    let b = m_prior_pmf_via(&model, n, l, Route::Inversion, &pol).unwrap();
                    assert!(a.max_abs_diff(&b) < 1e-9, "{} n={} l={}", model, n, l);
                    assert!(a.defect < 1e-9 && b.defect < 1e-9);
                }
            }
        }
    }

    #[test]
    fn mass_conservation() {
        for model in models() {
            for n in [1usize, 7, 30, 60] {
                let total = (1..=n).fold(Mode::Exact.zero(), |acc, l| {
                    acc + m_prior_factorial_moment(&model, n, l, 1, Mode::Exact).unwrap() * l as i64
                });
                assert_eq!(total, Mode::Exact.int(n as i64), "{} n={}", model, n);
            }
        }
    }

    #[test]
    fn block_count_consistency() {
        // Σ_l E[M_{l,n}] = E[K_n] = Σ_j j V_{n,j} 𝒞(n,j;σ)/σ^j
        let mode = Mode::Exact;
        for model in models() {
            for n in [5usize, 20] {
                let lhs = (1..=n).fold(mode.zero(), |acc, l| acc + m_prior_factorial_moment(&model, n, l, 1, mode).unwrap());
                let row = scaled_gfc_row(n, &model.sigma(), &Rational::new(), mode);
                let rhs = (1..=n).fold(mode.zero(), |acc, j| acc + model.v_weight(n, j, mode).unwrap() * &row[j] * j as i64);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn pd_near_zero_sigma_matches_dp() {
        let pol = PrecisionPolicy::default();
        let dp = GibbsModel::dirichlet(1.5).unwrap();
        let py = GibbsModel::pitman_yor(1e-7, 1.5).unwrap();
        for (n, l) in [(10usize, 1usize), (12, 2), (15, 3)] {
            let a = m_prior_pmf(&dp, n, l, &pol).unwrap();
            let b = m_prior_pmf(&py, n, l, &pol).unwrap();
            for x in 0..a.len() {
                assert!(rel_diff(&a.prob(x), &b.prob(x)) < 1e-5);
            }
        }
    }

    #[test]
    fn gnedin_zero_gamma_is_all_singletons() {
        let gn = GibbsModel::gnedin(0.0, 0.0).unwrap();
        let pmf = m_prior_pmf(&gn, 6, 1, &PrecisionPolicy::exact()).unwrap();
        assert_eq!(pmf.prob(6), Mode::Exact.one());
    }

    #[test]
    fn larger_instances_need_escalation_but_succeed() {
        let pol = PrecisionPolicy::default();
        let py = GibbsModel::pitman_yor(0.5, 1.0).unwrap();
        let pmf = m_prior_pmf(&py, 400, 1, &pol).unwrap();
        assert!(pmf.defect < 1e-9);
        assert!(pmf.probs.iter().all(|p| p.signum() >= 0));
    }
}
