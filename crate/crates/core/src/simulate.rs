//! Sequential sampling from the predictive rule, Monte Carlo summaries of the
//! continuation statistics, and exact enumeration of short continuations.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{FrequencyCounts, GibbsModel, PartitionData};
use crate::numerics::{Mode, Scalar};

/// Block sizes of a growing partition. The first `j_old` blocks are the ones
/// present in the conditioning sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimState {
    pub sizes: Vec<usize>,
    pub j_old: usize,
}

impl SimState {
    pub fn new() -> Self {
        SimState {
            sizes: Vec::new(),
            j_old: 0,
        }
    }

    /// Starts from an observed partition; its blocks become the old blocks.
    pub fn from_data(data: &PartitionData) -> Self {
        let sizes = data.counts().block_sizes();
        let j_old = sizes.len();
        SimState { sizes, j_old }
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn j(&self) -> usize {
        self.sizes.len()
    }

    pub fn counts(&self) -> FrequencyCounts {
        FrequencyCounts::from_block_sizes(&self.sizes).unwrap_or_default()
    }

    /// Old blocks of size l.
    pub fn o_stat(&self, l: usize) -> usize {
        self.sizes[..self.j_old].iter().filter(|&&s| s == l).count()
    }

    /// New blocks of size l.
    pub fn n_stat(&self, l: usize) -> usize {
        self.sizes[self.j_old..].iter().filter(|&&s| s == l).count()
    }

    /// All blocks of size l.
    pub fn m_stat(&self, l: usize) -> usize {
        self.o_stat(l) + self.n_stat(l)
    }

    /// Number of blocks created after the conditioning sample.
    pub fn new_blocks(&self) -> usize {
        self.sizes.len() - self.j_old
    }
}

impl Default for SimState {
    fn default() -> Self {
        Self::new()
    }
}

/// Floating-point predictive rule used by the sampler.
#[derive(Clone, Debug)]
struct Sampler {
    sigma: f64,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Pitman { theta: f64 },
    Gnedin { gamma: f64, zeta: f64 },
}

impl Sampler {
    fn new(model: &GibbsModel) -> Self {
        match model {
            GibbsModel::Dirichlet { theta } => Sampler {
                sigma: 0.0,
                kind: Kind::Pitman { theta: theta.to_f64() },
            },
            GibbsModel::PitmanYor { sigma, theta } => Sampler {
                sigma: sigma.to_f64(),
                kind: Kind::Pitman { theta: theta.to_f64() },
            },
            GibbsModel::Gnedin { gamma, zeta } => Sampler {
                sigma: -1.0,
                kind: Kind::Gnedin {
                    gamma: gamma.to_f64(),
                    zeta: zeta.to_f64(),
                },
            },
        }
    }

    /// (probability of a new block, factor multiplying n_i − σ for old block i)
    fn rule(&self, n: usize, j: usize) -> (f64, f64) {
        if n == 0 {
            return (1.0, 0.0);
        }
        let (n, j) = (n as f64, j as f64);
        match self.kind {
            Kind::Pitman { theta } => ((theta + j * self.sigma) / (theta + n), 1.0 / (theta + n)),
            Kind::Gnedin { gamma, zeta } => {
                let den = n * n + gamma * n + zeta;
                ((j * j - gamma * j + zeta) / den, (gamma + n - j) / den)
            }
        }
    }

    fn step<R: Rng + ?Sized>(&self, state: &mut SimState, n: usize, rng: &mut R) {
        let (p_new, join) = self.rule(n, state.sizes.len());
        let mut u: f64 = rng.random::<f64>();
        if u < p_new || state.sizes.is_empty() {
            state.sizes.push(1);
            return;
        }
        u -= p_new;
        for s in state.sizes.iter_mut() {
            u -= (*s as f64 - self.sigma) * join;
            if u < 0.0 {
                *s += 1;
                return;
            }
        }
        // rounding: fall back to the last block with positive weight
        if let Some(s) = state.sizes.iter_mut().rev().find(|s| (**s as f64 - self.sigma) > 0.0) {
            *s += 1;
        }
    }
}

/// Deterministic generator for replicate `stream` of a run seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws an exchangeable partition of n items.
pub fn sample_partition<R: Rng + ?Sized>(model: &GibbsModel, n: usize, rng: &mut R) -> SimState {
    let sampler = Sampler::new(model);
    let mut state = SimState::new();
    for i in 0..n {
        sampler.step(&mut state, i, rng);
    }
    state
}

/// Extends an observed partition by m further draws.
pub fn continue_sample<R: Rng + ?Sized>(
    model: &GibbsModel,
    data: &PartitionData,
    m: usize,
    rng: &mut R,
) -> Result<SimState> {
    if model.v_weight(data.n(), data.j(), Mode::Float(64))?.is_zero() && data.n() > 0 {
        return Err(Error::ZeroProbabilityData);
    }
    let sampler = Sampler::new(model);
    let mut state = SimState::from_data(data);
    let n0 = data.n();
    for i in 0..m {
        sampler.step(&mut state, n0 + i, rng);
    }
    Ok(state)
}

/// Histograms of O_l, N_l and M_l over the replicates of one block size l.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Histograms {
    pub o: Vec<u64>,
    pub n: Vec<u64>,
    pub m: Vec<u64>,
}

fn bump(h: &mut Vec<u64>, x: usize) {
    if h.len() <= x {
        h.resize(x + 1, 0);
    }
    h[x] += 1;
}

fn merge(a: &mut Vec<u64>, b: &[u64]) {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (x, v) in b.iter().enumerate() {
        a[x] += v;
    }
}

impl Histograms {
    fn merge(&mut self, other: &Histograms) {
        merge(&mut self.o, &other.o);
        merge(&mut self.n, &other.n);
        merge(&mut self.m, &other.m);
    }
}

/// Monte Carlo estimate of the continuation laws.
#[derive(Clone, Debug, PartialEq)]
pub struct McResult {
    pub replicates: usize,
    pub seed: u64,
    pub per_l: BTreeMap<usize, Histograms>,
}

/// Empirical pmf with binomial standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalPmf {
    pub probs: Vec<f64>,
    pub se: Vec<f64>,
}

impl EmpiricalPmf {
    fn from_hist(h: &[u64], r: usize) -> Self {
        let r_f = r as f64;
        let probs: Vec<f64> = h.iter().map(|&c| c as f64 / r_f).collect();
        let se = probs.iter().map(|p| (p * (1.0 - p) / r_f).sqrt()).collect();
        EmpiricalPmf { probs, se }
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs.get(x).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(x, p)| x as f64 * p).sum()
    }
}

/// Which continuation statistic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statistic {
    /// Old blocks that end with size l.
    O,
    /// New blocks that end with size l.
    N,
    /// All blocks that end with size l.
    M,
}

impl McResult {
    pub fn pmf(&self, l: usize, stat: Statistic) -> Option<EmpiricalPmf> {
        let h = self.per_l.get(&l)?;
        let v = match stat {
            Statistic::O => &h.o,
            Statistic::N => &h.n,
            Statistic::M => &h.m,
        };
        Some(EmpiricalPmf::from_hist(v, self.replicates))
    }
}

/// Runs `replicates` independent continuations of `data` by m draws in
/// parallel and tabulates O_l, N_l and M_l for each l in `ls`. Replicate i uses
/// stream i of a generator seeded with `seed`, so results do not depend on the
/// thread count.
pub fn monte_carlo(
    model: &GibbsModel,
    data: &PartitionData,
    m: usize,
    ls: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<McResult> {
    if ls.contains(&0) {
        return Err(Error::IndexOutOfRange("l must be positive".into()));
    }
    // surfaces ZeroProbabilityData before spawning work
    continue_sample(model, data, 0, &mut rng_for(seed, 0))?;
    let chunks = rayon::current_num_threads().max(1) * 4;
    let per_chunk = replicates.div_ceil(chunks).max(1);
    let partial: Vec<Result<BTreeMap<usize, Histograms>>> = (0..replicates)
        .step_by(per_chunk)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let mut acc: BTreeMap<usize, Histograms> = ls.iter().map(|&l| (l, Histograms::default())).collect();
            for rep in start..(start + per_chunk).min(replicates) {
                let mut rng = rng_for(seed, rep as u64);
                let state = continue_sample(model, data, m, &mut rng)?;
                for (&l, h) in acc.iter_mut() {
                    let o = state.o_stat(l);
                    let nn = state.n_stat(l);
                    bump(&mut h.o, o);
                    bump(&mut h.n, nn);
                    bump(&mut h.m, o + nn);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut per_l: BTreeMap<usize, Histograms> = ls.iter().map(|&l| (l, Histograms::default())).collect();
    for p in partial {
        for (l, h) in p? {
            per_l.get_mut(&l).expect("same keys").merge(&h);
        }
    }
    Ok(McResult {
        replicates,
        seed,
        per_l,
    })
}

/// One terminal state of an exact continuation with its probability.
#[derive(Clone, Debug)]
pub struct Continuation {
    /// Final sizes of the old blocks, in the order of the data's block sizes.
    pub old: Vec<usize>,
    /// Sizes of the new blocks, sorted decreasingly.
    pub new: Vec<usize>,
    pub prob: Scalar,
}

impl Continuation {
    pub fn o_stat(&self, l: usize) -> usize {
        self.old.iter().filter(|&&s| s == l).count()
    }

    pub fn n_stat(&self, l: usize) -> usize {
        self.new.iter().filter(|&&s| s == l).count()
    }
}

/// Enumerates every continuation of `data` by m draws with its exact
/// probability, merging states that differ only by the order of new blocks.
///
/// Refused with [`Error::ComplexityRefused`] unless m ≤ 3, or j ≤ 20 and m ≤ 5.
pub fn enumerate_continuations(
    model: &GibbsModel,
    data: &PartitionData,
    m: usize,
    mode: Mode,
) -> Result<Vec<Continuation>> {
    let j = data.j();
    if !(m <= 3 || (j <= 20 && m <= 5)) {
        return Err(Error::ComplexityRefused(format!(
            "exact enumeration needs m <= 3, or j <= 20 and m <= 5 (got j = {}, m = {})",
            j, m
        )));
    }
    let sigma = mode.rational(&model.sigma());
    let mut ratio_cache: HashMap<(usize, usize), Vec<Scalar>> = HashMap::new();
    let start_old = data.counts().block_sizes();
    let mut states: BTreeMap<(Vec<usize>, Vec<usize>), Scalar> = BTreeMap::new();
    states.insert((start_old, Vec::new()), mode.one());
    let n0 = data.n();
    for step in 0..m {
        let n = n0 + step;
        let mut next: BTreeMap<(Vec<usize>, Vec<usize>), Scalar> = BTreeMap::new();
        for ((old, new), p) in states {
            let jj = old.len() + new.len();
            let r = match ratio_cache.get(&(n, jj)) {
                Some(r) => r.clone(),
                None => {
                    let r = model.v_ratios(n, jj, 1, mode)?;
                    ratio_cache.insert((n, jj), r.clone());
                    r
                }
            };
            let mut push = |o: Vec<usize>, mut nw: Vec<usize>, q: Scalar| {
                if q.is_zero() {
                    return;
                }
                nw.sort_unstable_by(|a, b| b.cmp(a));
                let e = next.entry((o, nw)).or_insert_with(|| mode.zero());
                *e = &*e + &q;
            };
            let mut grown = new.clone();
            grown.push(1);
            push(old.clone(), grown, &p * &r[1]);
            for i in 0..old.len() {
                let mut o = old.clone();
                let w = (mode.int(o[i] as i64) - &sigma) * &r[0];
                o[i] += 1;
                push(o, new.clone(), &p * &w);
            }
            for i in 0..new.len() {
                let mut nw = new.clone();
                let w = (mode.int(nw[i] as i64) - &sigma) * &r[0];
                nw[i] += 1;
                push(old.clone(), nw, &p * &w);
            }
        }
        states = next;
    }
    Ok(states
        .into_iter()
        .map(|((old, new), prob)| Continuation { old, new, prob })
        .collect())
}

/// Exact laws of O_l, N_l and M_l obtained by enumeration, indexed by value.
#[derive(Clone, Debug)]
pub struct ExactLaws {
    pub o: Vec<Scalar>,
    pub n: Vec<Scalar>,
    pub m: Vec<Scalar>,
}

pub fn exact_laws(conts: &[Continuation], l: usize, mode: Mode) -> ExactLaws {
    let mut laws = ExactLaws {
        o: Vec::new(),
        n: Vec::new(),
        m: Vec::new(),
    };
    let add = |v: &mut Vec<Scalar>, x: usize, p: &Scalar| {
        if v.len() <= x {
            v.resize(x + 1, mode.zero());
        }
        v[x] = &v[x] + p;
    };
    for c in conts {
        let o = c.o_stat(l);
        let n = c.n_stat(l);
        add(&mut laws.o, o, &c.prob);
        add(&mut laws.n, n, &c.prob);
        add(&mut laws.m, o + n, &c.prob);
    }
    laws
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::plain_sum;

    #[test]
    fn enumeration_is_normalised() {
        let py = GibbsModel::pitman_yor(0.5, 1.0).unwrap();
        let data = PartitionData::from_block_sizes(&[3, 1, 1]).unwrap();
        let conts = enumerate_continuations(&py, &data, 4, Mode::Exact).unwrap();
        let total = plain_sum(conts.iter().map(|c| c.prob.clone()), Mode::Exact);
        assert_eq!(total, Mode::Exact.one());
        assert!(matches!(
            enumerate_continuations(&py, &data, 6, Mode::Exact),
            Err(Error::ComplexityRefused(_))
        ));
    }

    #[test]
    fn enumeration_from_empty_matches_sampling_formula() {
        let gn = GibbsModel::gnedin(0.5, 0.0).unwrap();
        let conts = enumerate_continuations(&gn, &PartitionData::empty(), 5, Mode::Exact).unwrap();
        let mut by_counts: BTreeMap<Vec<usize>, Scalar> = BTreeMap::new();
        for c in conts {
            let mut s = c.new.clone();
            s.sort_unstable_by(|a, b| b.cmp(a));
            let e = by_counts.entry(s).or_insert_with(|| Mode::Exact.zero());
            *e = &*e + &c.prob;
        }
        for (sizes, p) in by_counts {
            let f = gn.sampling_formula(&FrequencyCounts::from_block_sizes(&sizes).unwrap(), Mode::Exact).unwrap();
            assert_eq!(p, f);
        }
    }

    #[test]
    fn sampler_is_reproducible() {
        let py = GibbsModel::pitman_yor(0.5, 1.0).unwrap();
        let a = sample_partition(&py, 200, &mut rng_for(7, 3));
        let b = sample_partition(&py, 200, &mut rng_for(7, 3));
        assert_eq!(a, b);
        assert_eq!(a.n(), 200);
        let c = sample_partition(&py, 200, &mut rng_for(7, 4));
        assert_ne!(a, c);
    }

    #[test]
    fn monte_carlo_independent_of_threads() {
        let dp = GibbsModel::dirichlet(1.0).unwrap();
        let data = PartitionData::from_block_sizes(&[2, 1]).unwrap();
        let a = monte_carlo(&dp, &data, 10, &[1, 2], 2000, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| monte_carlo(&dp, &data, 10, &[1, 2], 2000, 11).unwrap());
        assert_eq!(a, b);
        let pmf = a.pmf(1, Statistic::M).unwrap();
        assert!((pmf.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gnedin_zero_gamma_only_singletons() {
        let gn = GibbsModel::gnedin(0.0, 0.0).unwrap();
        let s = sample_partition(&gn, 50, &mut rng_for(1, 0));
        assert_eq!(s.j(), 50);
        let data = PartitionData::from_block_sizes(&[2]).unwrap();
        assert_eq!(
            continue_sample(&gn, &data, 3, &mut rng_for(1, 0)),
            Err(Error::ZeroProbabilityData)
        );
    }

    #[test]
    fn mc_mean_close_to_exact() {
        let py = GibbsModel::pitman_yor(0.5, 1.0).unwrap();
        let data = PartitionData::from_block_sizes(&[2, 1]).unwrap();
        let conts = enumerate_continuations(&py, &data, 3, Mode::Exact).unwrap();
        let law = exact_laws(&conts, 1, Mode::Exact);
        let mc = monte_carlo(&py, &data, 3, &[1], 40_000, 5).unwrap();
        let emp = mc.pmf(1, Statistic::M).unwrap();
        for (x, p) in law.m.iter().enumerate() {
            assert!((emp.prob(x) - p.to_f64()).abs() < 5.0 * emp.se[x].max(1e-3));
        }
    }
}
