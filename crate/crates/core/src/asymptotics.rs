//! Large-sample diagnostics: diversity scaling, Poisson limits for the
//! Dirichlet model, the moment sequence of the limit variable Z_{n,j}, and the
//! degenerate Gnedin limit.

use rug::Rational;

use crate::combinatorics::stirling2;
use crate::error::{Error, Result};
use crate::models::{GibbsModel, PartitionData};
use crate::numerics::{factorial, ln_gamma, rising, Mode, PrecisionPolicy, Scalar};
use crate::posterior::{closed, pmf, ConditionalQuery, Statistic};
use crate::prior::m_prior_pmf;
use crate::simulate::{rng_for, sample_partition};

/// Scaling constant c_n(σ): 1 for σ < 0, log n for σ = 0, n^σ for σ ∈ (0, 1).
pub fn c_n(sigma: f64, n: f64) -> f64 {
    if sigma < 0.0 {
        1.0
    } else if sigma == 0.0 {
        n.ln()
    } else {
        n.powf(sigma)
    }
}

fn check_pd(sigma: &Rational, theta: &Rational) -> Result<()> {
    if *sigma <= 0 || *sigma >= 1 {
        return Err(Error::Domain(format!("sigma must lie in (0, 1), got {}", sigma.to_f64())));
    }
    if *theta <= Rational::from(-sigma) {
        return Err(Error::Domain("theta must exceed -sigma".into()));
    }
    Ok(())
}

/// E[Z_{n,j}^r] = Γ(θ+n) (j+θ/σ)_r / Γ(θ+n+rσ). Exact mode is promoted to 256 bits.
pub fn z_moment(n: usize, j: usize, sigma: &Rational, theta: &Rational, r: usize, mode: Mode) -> Result<Scalar> {
    check_pd(sigma, theta)?;
    if j > n || (j == 0 && n > 0) {
        return Err(Error::Domain(format!("invalid (n, j) = ({}, {})", n, j)));
    }
    let mode = if mode.is_exact() { Mode::Float(256) } else { mode };
    if r == 0 {
        return Ok(mode.one());
    }
    let s = mode.rational(sigma);
    let th = mode.rational(theta);
    let a = &th + n as i64;
    let b = &a + &(&s * r as i64);
    let log_ratio = ln_gamma(&a) - ln_gamma(&b);
    Ok(log_ratio.exp() * rising(&(&(&th / &s) + j as i64), r as u64))
}

/// Converts falling-factorial moments μ_0..μ_R into raw moments using
/// X^r = Σ_k S(r, k) (X)_{[k]}.
pub fn falling_to_raw(falling: &[Scalar]) -> Vec<Scalar> {
    let mode = falling.first().map(|v| v.mode()).unwrap_or(Mode::Exact);
    (0..falling.len())
        .map(|r| {
            (0..=r).fold(mode.zero(), |acc, k| acc + stirling2(r, k, mode) * &falling[k])
        })
        .collect()
}

/// Determinants of the Hankel matrices [μ_{a+b+shift}]_{a,b<k} for k = 1..=max_order.
pub fn hankel_determinants(moments: &[Scalar], shift: usize, max_order: usize) -> Vec<Scalar> {
    (1..=max_order)
        .filter(|&k| 2 * (k - 1) + shift < moments.len())
        .map(|k| {
            let mat: Vec<Vec<Scalar>> = (0..k)
                .map(|a| (0..k).map(|b| moments[a + b + shift].clone()).collect())
                .collect();
            determinant(mat)
        })
        .collect()
}

fn determinant(mut a: Vec<Vec<Scalar>>) -> Scalar {
    let k = a.len();
    let mode = a[0][0].mode();
    let mut det = mode.one();
    for c in 0..k {
        let piv = (c..k).max_by(|&x, &y| {
            a[x][c]
                .abs()
                .partial_cmp(&a[y][c].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let p = piv.expect("nonempty");
        if a[p][c].is_zero() {
            return mode.zero();
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det = det * &a[c][c];
        for row in c + 1..k {
            let f = &a[row][c] / &a[c][c];
            for col in c..k {
                let v = &a[row][col] - &(&f * &a[c][col]);
                a[row][col] = v;
            }
        }
    }
    det
}

/// True when the sequence passes the Stieltjes test up to the given order:
/// both Hankel determinant families are nonnegative (up to `tol` relative to
/// the product of diagonal entries).
pub fn is_stieltjes(moments: &[Scalar], max_order: usize, tol: f64) -> bool {
    [0usize, 1].iter().all(|&shift| {
        hankel_determinants(moments, shift, max_order)
            .iter()
            .enumerate()
            .all(|(i, d)| {
                let k = i + 1;
                let scale: f64 = (0..k).map(|a| moments[2 * a + shift].abs().to_f64()).product();
                d.to_f64() >= -tol * scale
            })
    })
}

/// A sequence of values approaching a target as the scale grows.
#[derive(Clone, Debug)]
pub struct LimitCheck {
    pub scales: Vec<f64>,
    pub values: Vec<f64>,
    pub target: f64,
    /// |value − target| / |target| at each scale.
    pub gaps: Vec<f64>,
    /// Gaps strictly decrease along the scales.
    pub converging: bool,
    /// Least-squares slope of log gap against log scale.
    pub rate: f64,
}

impl LimitCheck {
    pub fn new(points: Vec<(f64, f64)>, target: f64) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Domain("scales must be strictly increasing".into()));
        }
        let (scales, values): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let gaps: Vec<f64> = values.iter().map(|v| ((v - target) / target).abs()).collect();
        let converging = gaps.windows(2).all(|w| w[1] < w[0]);
        let xs: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
        let ys: Vec<f64> = gaps.iter().map(|g| g.max(f64::MIN_POSITIVE).ln()).collect();
        let rate = if xs.len() >= 2 {
            let mx = xs.iter().sum::<f64>() / xs.len() as f64;
            let my = ys.iter().sum::<f64>() / ys.len() as f64;
            let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            num / den
        } else {
            f64::NAN
        };
        Ok(LimitCheck {
            scales,
            values,
            target,
            gaps,
            converging,
            rate,
        })
    }

    pub fn last_gap(&self) -> f64 {
        self.gaps.last().copied().unwrap_or(f64::NAN)
    }
}

/// m^{−rσ} E[N_{l,m}^r] under PD(σ, θ) given n observations in j blocks,
/// from the closed factorial moments.
pub fn pd_scaled_new_raw_moment(
    sigma: &Rational,
    theta: &Rational,
    n: usize,
    j: usize,
    m: usize,
    l: usize,
    r: usize,
    mode: Mode,
) -> Scalar {
    let fm: Vec<Scalar> = (0..=r)
        .map(|k| {
            factorial(k as u64, mode) * closed::pitman_n_binomial_moment(sigma, theta, n, j, m, l, k, mode)
        })
        .collect();
    let raw = falling_to_raw(&fm);
    let scale = (mode.f64(m as f64).ln() * &mode.rational(sigma) * r as i64).exp();
    &raw[r] / &scale
}

/// Limit of m^{−rσ} E[N_{l,m}^r]: (σ(1−σ)_{l−1}/l!)^r E[Z_{n,j}^r].
pub fn theorem4_limit(sigma: &Rational, theta: &Rational, n: usize, j: usize, l: usize, r: usize, mode: Mode) -> Result<Scalar> {
    let z = z_moment(n, j, sigma, theta, r, mode)?;
    let mode = z.mode();
    let s = mode.rational(sigma);
    let per = &s * &rising(&(mode.one() - &s), (l - 1) as u64) / factorial(l as u64, mode);
    Ok(per.pow(r as u32) * z)
}

/// Convergence of the scaled raw moments of N_{l,m} along the given m values.
pub fn theorem4_check(
    sigma: &Rational,
    theta: &Rational,
    n: usize,
    j: usize,
    l: usize,
    r: usize,
    ms: &[usize],
) -> Result<LimitCheck> {
    check_pd(sigma, theta)?;
    let mode = Mode::Float(256);
    let target = theorem4_limit(sigma, theta, n, j, l, r, mode)?.to_f64();
    let points = ms
        .iter()
        .map(|&m| (m as f64, pd_scaled_new_raw_moment(sigma, theta, n, j, m, l, r, mode).to_f64()))
        .collect();
    LimitCheck::new(points, target)
}

/// Total-variation distances between a Dirichlet block-count law and its
/// Poisson limit.
#[derive(Clone, Debug)]
pub struct PoissonReport {
    pub lambda: f64,
    /// (sample size n, or continuation length m, TV distance)
    pub points: Vec<(usize, f64)>,
}

impl PoissonReport {
    pub fn decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// Poisson(λ) probabilities on {0, …, len−1}.
pub fn poisson_pmf(lambda: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut p = (-lambda).exp();
    for x in 0..len {
        out.push(p);
        p *= lambda / (x + 1) as f64;
    }
    out
}

fn tv_to_poisson(probs: &[f64], lambda: f64) -> f64 {
    let len = probs.len().max(1) + 50;
    let pois = poisson_pmf(lambda, len);
    let head: f64 = (0..len)
        .map(|x| (probs.get(x).copied().unwrap_or(0.0) - pois[x]).abs())
        .sum();
    let tail = 1.0 - pois.iter().sum::<f64>();
    0.5 * (head + tail.max(0.0))
}

/// TV distance from the law of M_{l,n} (unconditional, over `sizes` = n values)
/// or of N_{l,m} given `data` (over `sizes` = m values) to Poisson(θ/l).
pub fn dp_poisson_limit(
    theta: f64,
    l: usize,
    sizes: &[usize],
    data: Option<&PartitionData>,
    policy: &PrecisionPolicy,
) -> Result<PoissonReport> {
    let model = GibbsModel::dirichlet(theta)?;
    let lambda = theta / l as f64;
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let law = match data {
            None => m_prior_pmf(&model, size, l, policy)?,
            Some(d) => pmf(&ConditionalQuery::new(model.clone(), d.clone(), size, l)?, Statistic::N, policy)?,
        };
        points.push((size, tv_to_poisson(&law.to_f64(), lambda)));
    }
    Ok(PoissonReport { lambda, points })
}

/// P[M_{l,n} = 0] under the Gnedin model (ζ = 0) for each n in `ns`.
pub fn gnedin_degenerate_limit(gamma: f64, l: usize, ns: &[usize], policy: &PrecisionPolicy) -> Result<Vec<(usize, f64)>> {
    let model = GibbsModel::gnedin(gamma, 0.0)?;
    ns.iter()
        .map(|&n| Ok((n, m_prior_pmf(&model, n, l, policy)?.prob(0).to_f64())))
        .collect()
}

/// Monte Carlo mean and standard error of M_{l,n}/n^σ under PD(σ, θ), with
/// the limit mean (σ(1−σ)_{l−1}/l!) E[Z_{0,0}].
#[derive(Clone, Debug)]
pub struct DiversityCheck {
    pub mean: f64,
    pub se: f64,
    pub target: f64,
}

pub fn pd_diversity_mc(
    sigma: f64,
    theta: f64,
    l: usize,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<DiversityCheck> {
    use rayon::prelude::*;
    let model = GibbsModel::pitman_yor(sigma, theta)?;
    let (s, th) = model.pitman_params().expect("pitman family");
    let target = theorem4_limit(&s, &th, 0, 0, l, 1, Mode::Float(128))?.to_f64();
    let scale = (n as f64).powf(sigma);
    let xs: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let st = sample_partition(&model, n, &mut rng_for(seed, rep as u64));
            st.sizes.iter().filter(|&&b| b == l).count() as f64 / scale
        })
        .collect();
    let r = replicates as f64;
    let mean = xs.iter().sum::<f64>() / r;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1.0).max(1.0);
    Ok(DiversityCheck {
        mean,
        se: (var / r).sqrt(),
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational_from_f64;

    fn q(x: f64) -> Rational {
        rational_from_f64(x).unwrap()
    }

    #[test]
    fn c_n_branches() {
        assert_eq!(c_n(-1.0, 100.0), 1.0);
        assert!((c_n(0.0, std::f64::consts::E) - 1.0).abs() < 1e-15);
        assert!((c_n(0.5, 100.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn z_moment_examples() {
        let z = z_moment(0, 0, &q(0.5), &q(1.0), 1, Mode::Float(128)).unwrap().to_f64();
        let expect = 2.0 / statrs::function::gamma::gamma(1.5);
        assert!((z - expect).abs() < 1e-12);
        assert_eq!(z_moment(3, 2, &q(0.5), &q(1.0), 0, Mode::Exact).unwrap().to_f64(), 1.0);
        assert!(z_moment(3, 4, &q(0.5), &q(1.0), 1, Mode::Exact).is_err());
        assert!(z_moment(3, 2, &q(1.5), &q(1.0), 1, Mode::Exact).is_err());
    }

    #[test]
    fn z_moments_are_stieltjes() {
        for (s, t, n, j) in [(0.5, 1.0, 10, 5), (0.3, 2.0, 0, 0), (0.8, -0.5, 7, 7), (0.1, 40.0, 100, 20)] {
            let ms: Vec<Scalar> = (0..=6)
                .map(|r| z_moment(n, j, &q(s), &q(t), r, Mode::Float(256)).unwrap())
                .collect();
            assert!(is_stieltjes(&ms, 3, 1e-30));
        }
        // a sequence that is not a moment sequence
        let bad: Vec<Scalar> = [1i64, 1, 0, 1, 5, 1, 1].iter().map(|&v| Mode::Exact.int(v)).collect();
        assert!(!is_stieltjes(&bad, 3, 0.0));
    }

    #[test]
    fn falling_to_raw_poisson() {
        // Poisson(λ): falling moments λ^k, raw second moment λ + λ²
        let lam = Mode::Exact.ratio(3, 2);
        let fm: Vec<Scalar> = (0..4).map(|k| lam.pow(k)).collect();
        let raw = falling_to_raw(&fm);
        assert_eq!(raw[2], &lam + &lam.pow(2));
        assert_eq!(raw[3], &lam + &(&lam.pow(2) * 3) + lam.pow(3));
    }

    #[test]
    fn theorem4_gap_shrinks() {
        for l in [1usize, 2] {
            for r in [1usize, 2] {
                let chk = theorem4_check(&q(0.5), &q(1.0), 10, 5, l, r, &[1000, 10_000, 100_000]).unwrap();
                assert!(chk.converging, "l={} r={} {:?}", l, r, chk.gaps);
            }
        }
    }

    #[test]
    fn dp_prior_poisson_tv_decreases() {
        let pol = PrecisionPolicy::default();
        let rep = dp_poisson_limit(2.0, 1, &[10, 50, 200], None, &pol).unwrap();
        assert!(rep.decreasing(), "{:?}", rep.points);
        // θ = 1, l = 1 is the fixed-point law of a uniform permutation, which
        // is Poisson(1) up to O(1/(n+1)!)
        let rep = dp_poisson_limit(1.0, 1, &[1000], None, &pol).unwrap();
        assert!(rep.points[0].1 < 1e-12);
    }

    #[test]
    fn dp_conditional_limit_uses_theta_over_l() {
        let pol = PrecisionPolicy::default();
        let data = PartitionData::from_block_sizes(&[3, 2, 1]).unwrap();
        let rep = dp_poisson_limit(2.0, 2, &[20, 100, 400], Some(&data), &pol).unwrap();
        assert!(rep.decreasing(), "{:?}", rep.points);
        assert!(rep.points[2].1 < 0.05);
    }

    #[test]
    fn gnedin_mass_at_zero_grows() {
        let pts = gnedin_degenerate_limit(0.5, 1, &[10, 40, 120], &PrecisionPolicy::default()).unwrap();
        assert!(pts.windows(2).all(|w| w[1].1 > w[0].1), "{:?}", pts);
    }

    #[test]
    fn diversity_mc_small() {
        let chk = pd_diversity_mc(0.5, 1.0, 1, 2000, 400, 3).unwrap();
        assert!((chk.mean - chk.target).abs() < 4.0 * chk.se + 0.05 * chk.target, "{:?}", chk);
    }
}
