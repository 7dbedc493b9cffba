//! Conditional law of the block counts after m further draws, given an
//! observed partition: O_l (old blocks of size l), N_l (new blocks of size l)
//! and M_l = O_l + N_l, with their estimators.

pub mod closed;

use std::collections::HashMap;

use rug::{Integer, Rational};

use crate::combinatorics::scaled_gfc_row;
use crate::error::{Error, Result};
use crate::models::{FrequencyCounts, GibbsModel, PartitionData};
use crate::numerics::{binomial, escalate, factorial, plain_sum, rising, Mode, PrecisionPolicy, Scalar};
use crate::prior::{invert_moments, MomentSequence, Pmf, Route};
pub use crate::simulate::Statistic;

/// Conditioning data plus the continuation length m and the block size l.
#[derive(Clone, Debug)]
pub struct ConditionalQuery {
    pub model: GibbsModel,
    pub data: PartitionData,
    pub m: usize,
    pub l: usize,
}

impl ConditionalQuery {
    pub fn new(model: GibbsModel, data: PartitionData, m: usize, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::IndexOutOfRange("block size l must be positive".into()));
        }
        if data.n() > 0 && model.v_weight(data.n(), data.j(), Mode::Exact)?.is_zero() {
            return Err(Error::ZeroProbabilityData);
        }
        Ok(ConditionalQuery { model, data, m, l })
    }

    /// Largest value the statistic can take.
    pub fn support_bound(&self, stat: Statistic) -> usize {
        let total = (self.data.n() + self.m) / self.l;
        match stat {
            Statistic::O => self.data.j().min(total),
            Statistic::N => self.m / self.l,
            Statistic::M => total,
        }
    }
}

/// A multiset of r old blocks of size at most l, grouped by size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    /// (block size t, number k_t of chosen blocks of that size), k_t > 0.
    pub parts: Vec<(usize, usize)>,
    /// Σ k_t.
    pub size: usize,
    /// Σ t k_t.
    pub total: usize,
    /// Number of block subsets with this profile, ∏ C(m_t, k_t).
    pub weight: Integer,
}

/// Iterates over the selection profiles of r blocks of size ≤ l.
#[derive(Clone, Debug)]
pub struct GroupedTuples {
    items: std::vec::IntoIter<Selection>,
}

impl GroupedTuples {
    pub fn new(counts: &FrequencyCounts, l: usize, r: usize) -> Self {
        let avail: Vec<(usize, u64)> = counts.iter().filter(|&(t, _)| t <= l).collect();
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(avail: &[(usize, u64)], i: usize, rem: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Selection>) {
            if rem == 0 {
                let mut weight = Integer::from(1);
                let mut total = 0;
                let mut size = 0;
                for &(t, k) in cur.iter() {
                    let mt = avail.iter().find(|a| a.0 == t).expect("present").1;
                    weight *= Integer::from(mt).binomial(k as u32);
                    total += t * k;
                    size += k;
                }
                out.push(Selection {
                    parts: cur.clone(),
                    size,
                    total,
                    weight,
                });
                return;
            }
            if i == avail.len() {
                return;
            }
            let (t, mt) = avail[i];
            for k in 0..=(mt as usize).min(rem) {
                if k > 0 {
                    cur.push((t, k));
                }
                rec(avail, i + 1, rem - k, cur, out);
                if k > 0 {
                    cur.pop();
                }
            }
        }
        rec(&avail, 0, r, &mut cur, &mut out);
        GroupedTuples { items: out.into_iter() }
    }
}

impl Iterator for GroupedTuples {
    type Item = Selection;
    fn next(&mut self) -> Option<Selection> {
        self.items.next()
    }
}

/// General factorial-moment engine valid for every Gibbs model.
///
/// E[(M_l)_{[r]}] = Σ_{t=0}^{r} C(r,t) t! Σ_{c} m!/((l!)^{r−t} ∏(l−n_c)! m''!)
/// ((1−σ)_{l−1})^{r−t} ∏(n_c−σ)_{l−n_c} Σ_k R(k+r−t) D(m'', k; σ, γ_c),
/// where c runs over t-subsets of old blocks of size ≤ l, m'' = m − rl + |n_c|,
/// γ_c = −n + |n_c| + (j−t)σ, R(k) = V_{n+m,j+k}/V_{n,j} and D is the scaled
/// generalized factorial coefficient. O keeps only t = r and N only t = 0.
pub struct MomentEngine<'a> {
    q: &'a ConditionalQuery,
    mode: Mode,
    sigma: Rational,
    ratios: Vec<Scalar>,
    rows: HashMap<(usize, usize, usize), Vec<Scalar>>,
}

impl<'a> MomentEngine<'a> {
    pub fn new(q: &'a ConditionalQuery, mode: Mode) -> Result<Self> {
        let ratios = q.model.v_ratios(q.data.n(), q.data.j(), q.m, mode)?;
        Ok(MomentEngine {
            q,
            mode,
            sigma: q.model.sigma(),
            ratios,
            rows: HashMap::new(),
        })
    }

    fn ensure_row(&mut self, key: (usize, usize, usize)) {
        let (mpp, nc, t) = key;
        let (n, j) = (self.q.data.n(), self.q.data.j());
        let sigma = &self.sigma;
        let mode = self.mode;
        self.rows.entry(key).or_insert_with(|| {
            let gamma = Rational::from(nc as i64 - n as i64) + Rational::from(sigma * (j as i64 - t as i64));
            scaled_gfc_row(mpp, sigma, &gamma, mode)
        });
    }

    /// E[(X)_{[r]}] for X ∈ {O_l, N_l, M_l}.
    pub fn factorial_moment(&mut self, stat: Statistic, r: usize) -> Scalar {
        let mode = self.mode;
        if r == 0 {
            return mode.one();
        }
        let (m, l) = (self.q.m, self.q.l);
        let s = mode.rational(&self.sigma);
        let lf = factorial(l as u64, mode);
        let new_factor = rising(&(mode.one() - &s), (l - 1) as u64) / &lf;
        let mf = factorial(m as u64, mode);
        let ts: Vec<usize> = match stat {
            Statistic::O => vec![r],
            Statistic::N => vec![0],
            Statistic::M => (0..=r).collect(),
        };
        let mut old_factor: HashMap<usize, Scalar> = HashMap::new();
        let counts = self.q.data.counts().clone();
        let mut total = mode.zero();
        for t in ts {
            let outer = binomial(r as u64, t as u64, mode) * factorial(t as u64, mode) * new_factor.pow((r - t) as u32);
            for sel in GroupedTuples::new(&counts, l, t) {
                if m + sel.total < r * l {
                    continue;
                }
                let mpp = m + sel.total - r * l;
                let mut coef = &outer * &mode.integer(&sel.weight) * &mf / factorial(mpp as u64, mode);
                for &(tt, k) in &sel.parts {
                    let f = old_factor.entry(tt).or_insert_with(|| {
                        rising(&(mode.int(tt as i64) - &s), (l - tt) as u64) / factorial((l - tt) as u64, mode)
                    });
                    coef = coef * f.pow(k as u32);
                }
                let shift = r - t;
                let key = (mpp, sel.total, t);
                self.ensure_row(key);
                let row = &self.rows[&key];
                let inner = plain_sum(
                    row.iter()
                        .enumerate()
                        .filter(|(_, d)| !d.is_zero())
                        .map(|(k, d)| &self.ratios[k + shift] * d),
                    mode,
                );
                total = total + coef * inner;
            }
        }
        total
    }

    pub fn moments(&mut self, stat: Statistic, r_max: usize) -> MomentSequence {
        let values = (0..=r_max).map(|r| self.factorial_moment(stat, r)).collect();
        MomentSequence {
            values,
            support_bound: self.q.support_bound(stat),
        }
    }
}

/// E[(X)_{[r]}] from the general engine.
pub fn factorial_moment(q: &ConditionalQuery, stat: Statistic, r: usize, mode: Mode) -> Result<Scalar> {
    Ok(MomentEngine::new(q, mode)?.factorial_moment(stat, r))
}

/// Factorial moments of orders 0..=support bound.
pub fn factorial_moments(q: &ConditionalQuery, stat: Statistic, mode: Mode) -> Result<MomentSequence> {
    let k = q.support_bound(stat);
    Ok(MomentEngine::new(q, mode)?.moments(stat, k))
}

/// Whether closed forms exist for the model (Dirichlet, Pitman–Yor, Gnedin with ζ = 0).
pub fn has_closed_form(model: &GibbsModel) -> bool {
    !matches!(model, GibbsModel::Gnedin { .. }) || model.gnedin_zero_zeta().is_some()
}

/// Binomial moments E[C(X, r)] from the closed forms, for X ∈ {O_l, N_l}.
pub fn closed_binomial_moment(q: &ConditionalQuery, stat: Statistic, r: usize, mode: Mode) -> Result<Scalar> {
    let (m, l, n, j) = (q.m, q.l, q.data.n(), q.data.j());
    if let Some((s, th)) = q.model.pitman_params() {
        return match stat {
            Statistic::O => Ok(closed::pitman_o_binomial_moment(&s, &th, &q.data, m, l, r, mode)),
            Statistic::N => Ok(closed::pitman_n_binomial_moment(&s, &th, n, j, m, l, r, mode)),
            Statistic::M => Err(Error::NoClosedForm("the law of M_l is obtained by inversion".into())),
        };
    }
    let g = q
        .model
        .gnedin_zero_zeta()
        .ok_or_else(|| Error::NoClosedForm("Gnedin model with zeta != 0".into()))?;
    if n == 0 {
        return Err(Error::NoClosedForm("Gnedin closed forms need a nonempty sample".into()));
    }
    match stat {
        Statistic::O => Ok(closed::gnedin_o_binomial_moment(&g, &q.data, m, l, r, mode)),
        Statistic::N => Ok(closed::gnedin_n_binomial_moment(&g, n, j, m, l, r, mode)),
        Statistic::M => Err(Error::NoClosedForm("the law of M_l is obtained by inversion".into())),
    }
}

fn closed_available(q: &ConditionalQuery, stat: Statistic) -> bool {
    stat != Statistic::M && has_closed_form(&q.model) && (q.data.n() > 0 || q.model.pitman_params().is_some())
}

/// Law of the statistic on {0, …, support bound}.
pub fn pmf(q: &ConditionalQuery, stat: Statistic, policy: &PrecisionPolicy) -> Result<Pmf> {
    pmf_via(q, stat, Route::Auto, policy)
}

pub fn pmf_via(q: &ConditionalQuery, stat: Statistic, route: Route, policy: &PrecisionPolicy) -> Result<Pmf> {
    let use_closed = match route {
        Route::Auto => closed_available(q, stat),
        Route::ClosedForm => {
            if !closed_available(q, stat) {
                return Err(Error::NoClosedForm(format!("no closed-form pmf for {:?} under {}", stat, q.model)));
            }
            true
        }
        Route::Inversion => false,
    };
    if use_closed {
        let k = q.support_bound(stat);
        escalate(policy, |mode| {
            let b = (0..=k)
                .map(|r| closed_binomial_moment(q, stat, r, mode))
                .collect::<Result<Vec<_>>>()?;
            Pmf::from_probs(closed::pmf_from_binomial_moments(&b, policy)?, policy)
        })
    } else {
        invert_moments(policy, |mode| factorial_moments(q, stat, mode))
    }
}

/// Expected value of the statistic, through the closed form when the model
/// has one and the general engine otherwise.
pub fn estimate(q: &ConditionalQuery, stat: Statistic, mode: Mode) -> Result<Scalar> {
    estimate_via(q, stat, Route::Auto, mode)
}

/// `Route::Inversion` forces the general engine.
pub fn estimate_via(q: &ConditionalQuery, stat: Statistic, route: Route, mode: Mode) -> Result<Scalar> {
    let closed = match route {
        Route::Auto => has_closed_form(&q.model) && (q.data.n() > 0 || q.model.pitman_params().is_some()),
        Route::ClosedForm => true,
        Route::Inversion => false,
    };
    if !closed {
        return factorial_moment(q, stat, 1, mode);
    }
    let (m, l, n, j) = (q.m, q.l, q.data.n(), q.data.j());
    match &q.model {
        GibbsModel::Dirichlet { theta } => Ok(match stat {
            Statistic::O => closed::dp_o_hat(theta, &q.data, m, l, mode),
            Statistic::N => closed::dp_n_hat(theta, n, m, l, mode),
            Statistic::M => closed::dp_m_hat(theta, &q.data, m, l, mode),
        }),
        GibbsModel::PitmanYor { sigma, theta } => Ok(match stat {
            Statistic::O => closed::pitman_o_hat(sigma, theta, &q.data, m, l, mode),
            Statistic::N => closed::pitman_n_hat(sigma, theta, n, j, m, l, mode),
            Statistic::M => closed::pitman_m_hat(sigma, theta, &q.data, m, l, mode),
        }),
        GibbsModel::Gnedin { .. } => match stat {
            Statistic::M => {
                Ok(closed_binomial_moment(q, Statistic::O, 1, mode)? + closed_binomial_moment(q, Statistic::N, 1, mode)?)
            }
            _ => closed_binomial_moment(q, stat, 1, mode),
        },
    }
}

/// Ô: expected number of old blocks with size l after m more draws.
pub fn o_hat(model: &GibbsModel, data: &PartitionData, m: usize, l: usize, mode: Mode) -> Result<Scalar> {
    estimate(&ConditionalQuery::new(model.clone(), data.clone(), m, l)?, Statistic::O, mode)
}

/// N̂: expected number of new blocks with size l after m more draws.
pub fn n_hat(model: &GibbsModel, data: &PartitionData, m: usize, l: usize, mode: Mode) -> Result<Scalar> {
    estimate(&ConditionalQuery::new(model.clone(), data.clone(), m, l)?, Statistic::N, mode)
}

/// M̂: expected number of blocks with size l after m more draws.
pub fn m_hat(model: &GibbsModel, data: &PartitionData, m: usize, l: usize, mode: Mode) -> Result<Scalar> {
    estimate(&ConditionalQuery::new(model.clone(), data.clone(), m, l)?, Statistic::M, mode)
}

/// K̂: expected number of new blocks of any size after m more draws.
pub fn k_hat(model: &GibbsModel, data: &PartitionData, m: usize, mode: Mode) -> Result<Scalar> {
    ConditionalQuery::new(model.clone(), data.clone(), m, 1)?;
    match model {
        GibbsModel::Dirichlet { theta } => Ok(closed::dp_k_hat(theta, data.n(), m, mode)),
        GibbsModel::PitmanYor { sigma, theta } => Ok(closed::pitman_k_hat(sigma, theta, data.n(), data.j(), m, mode)),
        GibbsModel::Gnedin { .. } => k_hat_by_sizes(model, data, m, mode),
    }
}

/// K̂ as Σ_{l=1}^{m} N̂_l.
pub fn k_hat_by_sizes(model: &GibbsModel, data: &PartitionData, m: usize, mode: Mode) -> Result<Scalar> {
    let terms = (1..=m)
        .map(|l| n_hat(model, data, m, l, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(plain_sum(terms, mode))
}

/// Estimates for one block size.
#[derive(Clone, Debug)]
pub struct SizeEstimate {
    pub l: usize,
    pub o: Scalar,
    pub n: Scalar,
    pub m: Scalar,
}

/// Expected numbers of blocks of size at most τ after m more draws.
#[derive(Clone, Debug)]
pub struct RareVariety {
    pub tau: usize,
    pub o: Scalar,
    pub n: Scalar,
    pub m: Scalar,
    pub per_l: Vec<SizeEstimate>,
}

pub fn rare_variety(model: &GibbsModel, data: &PartitionData, m: usize, tau: usize, mode: Mode) -> Result<RareVariety> {
    if tau == 0 {
        return Err(Error::IndexOutOfRange("tau must be positive".into()));
    }
    let mut per_l = Vec::with_capacity(tau);
    for l in 1..=tau {
        let q = ConditionalQuery::new(model.clone(), data.clone(), m, l)?;
        let o = estimate(&q, Statistic::O, mode)?;
        let n = estimate(&q, Statistic::N, mode)?;
        let mm = &o + &n;
        per_l.push(SizeEstimate { l, o, n, m: mm });
    }
    let o = plain_sum(per_l.iter().map(|e| e.o.clone()), mode);
    let n = plain_sum(per_l.iter().map(|e| e.n.clone()), mode);
    let mm = plain_sum(per_l.iter().map(|e| e.m.clone()), mode);
    Ok(RareVariety {
        tau,
        o,
        n,
        m: mm,
        per_l,
    })
}
