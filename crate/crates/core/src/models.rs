//! Gibbs-type partition models: Dirichlet, Pitman–Yor and Gnedin.
//!
//! A Gibbs-type EPPF has the product form V_{n,j} ∏ (1−σ)_{n_i−1}. Each model
//! fixes σ and a closed form for the weights V_{n,j}; everything downstream
//! only needs σ and ratios V_{n+m,j+k}/V_{n,j}.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rug::Rational;

use crate::error::{Error, Result};
use crate::numerics::{factorial, rational_from_f64, rising, Mode, Scalar};

/// Frequency counts l → m_l: the number of blocks of size exactly l.
/// Zero counts are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FrequencyCounts(BTreeMap<usize, u64>);

impl FrequencyCounts {
    pub fn new() -> Self {
        FrequencyCounts(BTreeMap::new())
    }

    /// Builds counts from (l, m_l) pairs; repeated sizes and l = 0 are errors.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u64)>) -> Result<Self> {
        let mut c = FrequencyCounts::new();
        for (l, m) in pairs {
            c.insert(l, m)?;
        }
        Ok(c)
    }

    pub fn from_block_sizes(sizes: &[usize]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &s in sizes {
            if s == 0 {
                return Err(Error::InvalidPartition("block of size 0".into()));
            }
            *map.entry(s).or_insert(0) += 1;
        }
        Ok(FrequencyCounts(map))
    }

    pub fn insert(&mut self, l: usize, m: u64) -> Result<()> {
        if l == 0 {
            return Err(Error::InvalidPartition("block size must be at least 1".into()));
        }
        if self.0.contains_key(&l) {
            return Err(Error::InvalidPartition(format!("duplicate entry for size {}", l)));
        }
        if m > 0 {
            self.0.insert(l, m);
        }
        Ok(())
    }

    /// m_l (zero if absent).
    pub fn get(&self, l: usize) -> u64 {
        self.0.get(&l).copied().unwrap_or(0)
    }

    /// Nonzero entries in increasing size order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.0.iter().map(|(&l, &m)| (l, m))
    }

    /// Σ_l l·m_l.
    pub fn n(&self) -> u64 {
        self.0.iter().map(|(&l, &m)| l as u64 * m).sum()
    }

    /// Σ_l m_l.
    pub fn j(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.0.keys().next_back().copied().unwrap_or(0)
    }

    /// The multiset of block sizes, largest first.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.j() as usize);
        for (&l, &m) in self.0.iter().rev() {
            v.extend(std::iter::repeat(l).take(m as usize));
        }
        v
    }
}

/// An observed partition summarized by its frequency counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartitionData {
    n: usize,
    j: usize,
    counts: FrequencyCounts,
}

impl PartitionData {
    pub fn from_counts(counts: FrequencyCounts) -> Self {
        PartitionData {
            n: counts.n() as usize,
            j: counts.j() as usize,
            counts,
        }
    }

    pub fn from_block_sizes(sizes: &[usize]) -> Result<Self> {
        Ok(Self::from_counts(FrequencyCounts::from_block_sizes(sizes)?))
    }

    /// No observations (n = j = 0): conditional laws reduce to prior laws.
    pub fn empty() -> Self {
        Self::from_counts(FrequencyCounts::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn counts(&self) -> &FrequencyCounts {
        &self.counts
    }

    /// m_l.
    pub fn m(&self, l: usize) -> u64 {
        self.counts.get(l)
    }
}

/// Predictive probabilities for the next observation.
#[derive(Clone, Debug)]
pub struct Predictive {
    /// Probability of a new block, V_{n+1,j+1}/V_{n,j}.
    pub p_new: Scalar,
    /// V_{n+1,j}/V_{n,j}; a block of size l is joined with probability
    /// (l − σ) times this factor.
    pub join_factor: Scalar,
    /// Per-block join probability for each observed block size.
    pub p_join: BTreeMap<usize, Scalar>,
}

/// Worst violation of V_{n,j} = V_{n+1,j+1} + (n − σj) V_{n+1,j}.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursionReport {
    pub n_max: usize,
    pub max_rel_defect: f64,
    pub worst: (usize, usize),
}

/// Dirichlet, Pitman–Yor (two-parameter Poisson–Dirichlet) or Gnedin model.
/// Parameters are stored as exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub enum GibbsModel {
    Dirichlet { theta: Rational },
    PitmanYor { sigma: Rational, theta: Rational },
    Gnedin { gamma: Rational, zeta: Rational },
}

fn to_rational(x: f64, name: &str) -> Result<Rational> {
    rational_from_f64(x).ok_or_else(|| Error::Domain(format!("{} must be finite", name)))
}

impl GibbsModel {
    pub fn dirichlet(theta: f64) -> Result<Self> {
        Self::dirichlet_rational(to_rational(theta, "theta")?)
    }

    pub fn pitman_yor(sigma: f64, theta: f64) -> Result<Self> {
        Self::pitman_yor_rational(to_rational(sigma, "sigma")?, to_rational(theta, "theta")?)
    }

    pub fn gnedin(gamma: f64, zeta: f64) -> Result<Self> {
        Self::gnedin_rational(to_rational(gamma, "gamma")?, to_rational(zeta, "zeta")?)
    }

    pub fn dirichlet_rational(theta: Rational) -> Result<Self> {
        if theta.cmp0() != Ordering::Greater {
            return Err(Error::Domain(format!("Dirichlet needs theta > 0, got {}", theta)));
        }
        Ok(GibbsModel::Dirichlet { theta })
    }

    pub fn pitman_yor_rational(sigma: Rational, theta: Rational) -> Result<Self> {
        if sigma.cmp0() != Ordering::Greater || sigma >= 1 {
            return Err(Error::Domain(format!("Pitman-Yor needs 0 < sigma < 1, got {}", sigma)));
        }
        if Rational::from(&theta + &sigma).cmp0() != Ordering::Greater {
            return Err(Error::Domain(format!(
                "Pitman-Yor needs theta > -sigma, got theta = {}",
                theta
            )));
        }
        Ok(GibbsModel::PitmanYor { sigma, theta })
    }

    /// Requires γ ≥ 0 and i² − γi + ζ > 0 for every integer i ≥ 1; the
    /// minimum over integers sits at one of the integers adjacent to γ/2.
    pub fn gnedin_rational(gamma: Rational, zeta: Rational) -> Result<Self> {
        if gamma.cmp0() == Ordering::Less {
            return Err(Error::Domain(format!("Gnedin needs gamma >= 0, got {}", gamma)));
        }
        let half = Rational::from(&gamma / 2u32);
        let floor = half.clone().floor().numer().to_i64().unwrap_or(i64::MAX);
        for i in [floor, floor + 1, 1] {
            if i < 1 {
                continue;
            }
            let v = Rational::from(i * i) - Rational::from(&gamma * i) + &zeta;
            if v.cmp0() != Ordering::Greater {
                return Err(Error::Domain(format!(
                    "Gnedin needs i^2 - gamma*i + zeta > 0 for all i >= 1; fails at i = {}",
                    i
                )));
            }
        }
        Ok(GibbsModel::Gnedin { gamma, zeta })
    }

    /// σ: 0 for Dirichlet, σ for Pitman–Yor, −1 for Gnedin.
    pub fn sigma(&self) -> Rational {
        match self {
            GibbsModel::Dirichlet { .. } => Rational::new(),
            GibbsModel::PitmanYor { sigma, .. } => sigma.clone(),
            GibbsModel::Gnedin { .. } => Rational::from(-1),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GibbsModel::Dirichlet { .. } => "dirichlet",
            GibbsModel::PitmanYor { .. } => "pitman-yor",
            GibbsModel::Gnedin { .. } => "gnedin",
        }
    }

    /// (σ, θ) for the Pitman family, with σ = 0 for Dirichlet.
    pub fn pitman_params(&self) -> Option<(Rational, Rational)> {
        match self {
            GibbsModel::Dirichlet { theta } => Some((Rational::new(), theta.clone())),
            GibbsModel::PitmanYor { sigma, theta } => Some((sigma.clone(), theta.clone())),
            GibbsModel::Gnedin { .. } => None,
        }
    }

    /// γ for the Gnedin model with ζ = 0.
    pub fn gnedin_zero_zeta(&self) -> Option<Rational> {
        match self {
            GibbsModel::Gnedin { gamma, zeta } if zeta.cmp0() == Ordering::Equal => Some(gamma.clone()),
            _ => None,
        }
    }

    /// Model parameters as (name, value) pairs, for reporting.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            GibbsModel::Dirichlet { theta } => vec![("theta", theta.to_f64())],
            GibbsModel::PitmanYor { sigma, theta } => {
                vec![("sigma", sigma.to_f64()), ("theta", theta.to_f64())]
            }
            GibbsModel::Gnedin { gamma, zeta } => vec![("gamma", gamma.to_f64()), ("zeta", zeta.to_f64())],
        }
    }

    /// V_{n,j}, with V_{0,0} = 1 and V_{n,j} = 0 whenever j = 0 < n or j > n.
    pub fn v_weight(&self, n: usize, j: usize, mode: Mode) -> Result<Scalar> {
        if n == 0 {
            return Ok(if j == 0 { mode.one() } else { mode.zero() });
        }
        if j == 0 || j > n {
            return Ok(mode.zero());
        }
        Ok(match self {
            GibbsModel::Dirichlet { theta } => {
                let t = mode.rational(theta);
                t.pow(j as u32) / rising(&t, n as u64)
            }
            GibbsModel::PitmanYor { sigma, theta } => {
                let s = mode.rational(sigma);
                let t = mode.rational(theta);
                // the common factor θ of numerator and (θ)_n is cancelled
                let mut num = mode.one();
                for i in 1..j {
                    num = num * (&t + &(&s * i as i64));
                }
                num / rising(&(&t + 1), (n - 1) as u64)
            }
            GibbsModel::Gnedin { gamma, zeta } => {
                let g = mode.rational(gamma);
                let z = mode.rational(zeta);
                let mut v = rising(&g, (n - j) as u64);
                for i in 1..j as i64 {
                    v = v * (mode.int(i * i) - &(&g * i) + &z);
                }
                let mut den = mode.one();
                for i in 1..n as i64 {
                    den = den * (mode.int(i * i) + &(&g * i) + &z);
                }
                v / den
            }
        })
    }

    /// Ratios V_{n+m,j+k}/V_{n,j} for k = 0..=m.
    ///
    /// Errors with [`Error::ZeroProbabilityData`] when V_{n,j} = 0.
    pub fn v_ratios(&self, n: usize, j: usize, m: usize, mode: Mode) -> Result<Vec<Scalar>> {
        if n == 0 {
            if j != 0 {
                return Err(Error::InvalidPartition("j > 0 with n = 0".into()));
            }
            return (0..=m).map(|k| self.v_weight(m, k, mode)).collect();
        }
        if self.v_weight(n, j, mode)?.is_zero() {
            return Err(Error::ZeroProbabilityData);
        }
        let mut out = Vec::with_capacity(m + 1);
        match self {
            GibbsModel::Dirichlet { .. } | GibbsModel::PitmanYor { .. } => {
                let (s, t) = self.pitman_params().expect("pitman family");
                let s = mode.rational(&s);
                let t = mode.rational(&t);
                let mut acc = mode.one() / rising(&(&t + n as i64), m as u64);
                for k in 0..=m {
                    out.push(acc.clone());
                    acc = acc * (&t + &(&s * (j + k) as i64));
                }
            }
            GibbsModel::Gnedin { gamma, zeta } => {
                let g = mode.rational(gamma);
                let z = mode.rational(zeta);
                let mut den = mode.one();
                for i in n..n + m {
                    let i = i as i64;
                    den = den * (mode.int(i * i) + &(&g * i) + &z);
                }
                // tail[k] = (γ + n − j)_{m−k}
                let base = &g + (n - j) as i64;
                let mut tail = vec![mode.one(); m + 1];
                for k in (0..m).rev() {
                    tail[k] = &tail[k + 1] * &(&base + (m - k - 1) as i64);
                }
                let mut head = mode.one() / den;
                for k in 0..=m {
                    out.push(&head * &tail[k]);
                    let i = (j + k) as i64;
                    head = head * (mode.int(i * i) - &(&g * i) + &z);
                }
            }
        }
        Ok(out)
    }

    /// EPPF V_{n,j} ∏ (1−σ)_{n_i−1} of a partition with the given block sizes.
    pub fn eppf(&self, sizes: &[usize], mode: Mode) -> Result<Scalar> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidPartition("block sizes must be positive and nonempty".into()));
        }
        let n: usize = sizes.iter().sum();
        let one_minus_sigma = mode.one() - &mode.rational(&self.sigma());
        let mut p = self.v_weight(n, sizes.len(), mode)?;
        for &s in sizes {
            p = p * rising(&one_minus_sigma, (s - 1) as u64);
        }
        Ok(p)
    }

    /// Probability that the frequency-count vector of a sample of size n equals `counts`.
    pub fn sampling_formula(&self, counts: &FrequencyCounts, mode: Mode) -> Result<Scalar> {
        if counts.is_empty() {
            return Err(Error::InvalidPartition("empty frequency counts".into()));
        }
        let n = counts.n() as usize;
        let j = counts.j() as usize;
        let one_minus_sigma = mode.one() - &mode.rational(&self.sigma());
        let mut p = self.v_weight(n, j, mode)? * factorial(n as u64, mode);
        for (l, ml) in counts.iter() {
            let per = rising(&one_minus_sigma, (l - 1) as u64) / factorial(l as u64, mode);
            p = p * per.pow(ml as u32) / factorial(ml, mode);
        }
        Ok(p)
    }

    /// Predictive probabilities of the next draw given `data`.
    pub fn predictive_probs(&self, data: &PartitionData, mode: Mode) -> Result<Predictive> {
        let r = self.v_ratios(data.n(), data.j(), 1, mode)?;
        let join_factor = r[0].clone();
        let p_new = r[1].clone();
        let s = mode.rational(&self.sigma());
        let p_join = data
            .counts()
            .iter()
            .map(|(l, _)| (l, (mode.int(l as i64) - &s) * &join_factor))
            .collect();
        Ok(Predictive {
            p_new,
            join_factor,
            p_join,
        })
    }

    /// Checks the backward recursion of the weights over 1 ≤ j ≤ n ≤ n_max.
    pub fn validate_recursion(&self, n_max: usize) -> RecursionReport {
        let mode = Mode::Float(256);
        let s = mode.rational(&self.sigma());
        let mut worst = (0.0f64, (0, 0));
        let mut upper: Vec<Scalar> = (0..=n_max.max(1) + 1)
            .map(|j| self.v_weight(1, j, mode).expect("weights"))
            .collect();
        for n in 1..=n_max {
            let next: Vec<Scalar> = (0..=n + 1)
                .map(|j| self.v_weight(n + 1, j, mode).expect("weights"))
                .collect();
            for j in 1..=n {
                let lhs = &upper[j];
                let a = &next[j + 1];
                let b = (mode.int(n as i64) - &(&s * j as i64)) * &next[j];
                let rhs = a + &b;
                let scale = lhs.abs().to_f64().max(a.abs().to_f64()).max(b.abs().to_f64());
                let diff = (lhs - &rhs).abs();
                let defect = if diff.is_zero() {
                    0.0
                } else {
                    (diff.ln_abs() - scale.ln()).exp()
                };
                if defect > worst.0 {
                    worst = (defect, (n, j));
                }
            }
            upper = next;
        }
        RecursionReport {
            n_max,
            max_rel_defect: worst.0,
            worst: worst.1,
        }
    }
}

impl fmt::Display for GibbsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GibbsModel::Dirichlet { theta } => write!(f, "Dirichlet(theta={})", theta.to_f64()),
            GibbsModel::PitmanYor { sigma, theta } => {
                write!(f, "PitmanYor(sigma={}, theta={})", sigma.to_f64(), theta.to_f64())
            }
            GibbsModel::Gnedin { gamma, zeta } => {
                write!(f, "Gnedin(gamma={}, zeta={})", gamma.to_f64(), zeta.to_f64())
            }
        }
    }
}

/// All integer partitions of n as block-size vectors, largest part first.
pub fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=max.min(n)).rev() {
            cur.push(p);
            rec(n - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}
