//! Subsample cross-validation of the rare-variety estimators: draw a
//! subsample without replacement, refit, predict the rest, and compare with
//! the held-out truth.

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{fit_pd, FitOptions};
use crate::models::{FrequencyCounts, GibbsModel, PartitionData};
use crate::numerics::{rational_from_f64, Mode};
use crate::posterior::rare_variety;
use crate::simulate::rng_for;

/// Estimated and true counts of species with frequency at most τ.
#[derive(Clone, Debug, PartialEq)]
pub struct TauRow {
    pub tau: usize,
    pub est_o: f64,
    pub est_n: f64,
    pub est_m: f64,
    pub true_o: u64,
    pub true_n: u64,
    pub true_m: u64,
}

impl TauRow {
    /// |M̂_τ − M_τ| / M_τ.
    pub fn rel_error(&self) -> f64 {
        (self.est_m - self.true_m as f64).abs() / (self.true_m as f64).max(1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub subsample: FrequencyCounts,
    pub sigma: f64,
    pub theta: f64,
    pub m: usize,
    pub rows: Vec<TauRow>,
}

/// Draws `size` observations without replacement from the expanded counts.
/// Returns the frequency of every species in the full data and in the subsample.
pub fn subsample(counts: &FrequencyCounts, size: usize, seed: u64, stream: u64) -> Result<Vec<(u64, u64)>> {
    let n = counts.n() as usize;
    if size > n {
        return Err(Error::Domain(format!("subsample size {} exceeds the sample size {}", size, n)));
    }
    let mut species_of = Vec::with_capacity(n);
    let mut full = Vec::with_capacity(counts.j() as usize);
    for (l, ml) in counts.iter() {
        for _ in 0..ml {
            let id = full.len();
            full.push(l as u64);
            species_of.extend(std::iter::repeat_n(id, l));
        }
    }
    let mut sub = vec![0u64; full.len()];
    let mut rng = rng_for(seed, stream);
    for i in sample(&mut rng, n, size).into_iter() {
        sub[species_of[i]] += 1;
    }
    Ok(full.into_iter().zip(sub).collect())
}

/// Runs `folds` independent subsample/refit/predict rounds; fold f uses
/// stream f of `seed`.
pub fn crossval(
    counts: &FrequencyCounts,
    size: usize,
    folds: usize,
    taus: &[usize],
    seed: u64,
    opts: &FitOptions,
    mode: Mode,
) -> Result<Vec<FoldResult>> {
    if taus.is_empty() || taus.contains(&0) {
        return Err(Error::IndexOutOfRange("thresholds must be positive".into()));
    }
    let n = counts.n() as usize;
    if size == 0 || size > n {
        return Err(Error::Domain(format!("subsample size must lie in 1..={}", n)));
    }
    let m = n - size;
    (0..folds)
        .into_par_iter()
        .map(|fold| {
            let pairs = subsample(counts, size, seed, fold as u64)?;
            let sizes: Vec<usize> = pairs.iter().filter(|p| p.1 > 0).map(|p| p.1 as usize).collect();
            let sub = FrequencyCounts::from_block_sizes(&sizes)?;
            let fit = fit_pd(&sub, opts)?;
            let model = GibbsModel::pitman_yor_rational(
                rational_from_f64(fit.sigma).expect("finite"),
                rational_from_f64(fit.theta).expect("finite"),
            )?;
            let data = PartitionData::from_counts(sub.clone());
            let tau_max = *taus.iter().max().expect("nonempty");
            let rv = rare_variety(&model, &data, m, tau_max, mode)?;
            let rows = taus
                .iter()
                .map(|&tau| {
                    let (mut o, mut nn) = (0.0, 0.0);
                    for e in &rv.per_l[..tau] {
                        o += e.o.to_f64();
                        nn += e.n.to_f64();
                    }
                    let true_o = pairs.iter().filter(|p| p.1 > 0 && p.0 <= tau as u64).count() as u64;
                    let true_n = pairs.iter().filter(|p| p.1 == 0 && p.0 <= tau as u64).count() as u64;
                    TauRow {
                        tau,
                        est_o: o,
                        est_n: nn,
                        est_m: o + nn,
                        true_o,
                        true_n,
                        true_m: true_o + true_n,
                    }
                })
                .collect();
            Ok(FoldResult {
                fold,
                subsample: sub,
                sigma: fit.sigma,
                theta: fit.theta,
                m,
                rows,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::tomato;

    #[test]
    fn subsample_conserves_mass() {
        let c = tomato();
        let pairs = subsample(&c, 1000, 5, 2).unwrap();
        assert_eq!(pairs.iter().map(|p| p.1).sum::<u64>(), 1000);
        assert!(pairs.iter().all(|p| p.1 <= p.0));
        assert_eq!(pairs.iter().map(|p| p.0).sum::<u64>(), 2586);
        assert_eq!(pairs, subsample(&c, 1000, 5, 2).unwrap());
        assert_ne!(pairs, subsample(&c, 1000, 5, 3).unwrap());
        assert!(subsample(&c, 3000, 5, 2).is_err());
    }

    #[test]
    fn truth_of_m_tau_is_fold_independent() {
        let c = tomato();
        let res = crossval(&c, 1000, 2, &[3, 4, 5], 1, &FitOptions::default(), Mode::Float(128)).unwrap();
        for f in &res {
            let truths: Vec<u64> = f.rows.iter().map(|r| r.true_m).collect();
            assert_eq!(truths, vec![1758, 1791, 1802]);
            assert_eq!(f.m, 1586);
            assert_eq!(f.subsample.n(), 1000);
        }
    }
}
