//! Randomized invariants over models, samples and continuation lengths.

use gibbs_core::posterior::{k_hat, m_hat, n_hat, o_hat, pmf, ConditionalQuery, Statistic};
use gibbs_core::prior::m_prior_pmf;
use gibbs_core::simulate::{rng_for, sample_partition};
use gibbs_core::{GibbsModel, Mode, PartitionData, PrecisionPolicy};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = GibbsModel> {
    prop_oneof![
        (1u32..100).prop_map(|t| GibbsModel::dirichlet(t as f64 / 10.0).unwrap()),
        (1u32..20, 0u32..50).prop_map(|(s, t)| GibbsModel::pitman_yor(s as f64 / 20.0, t as f64 / 5.0).unwrap()),
        (0u32..10).prop_map(|g| GibbsModel::gnedin(g as f64 / 10.0, 0.0).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn estimators_are_additive_and_relabelling_invariant(
        model in model_strategy(), n in 1usize..15, m in 0usize..25, seed in any::<u64>(),
    ) {
        let sizes = sample_partition(&model, n, &mut rng_for(seed, 0)).sizes;
        let mut reversed = sizes.clone();
        reversed.reverse();
        let a = PartitionData::from_block_sizes(&sizes).unwrap();
        let b = PartitionData::from_block_sizes(&reversed).unwrap();
        let mode = Mode::Exact;
        let mut total_new = mode.zero();
        for l in 1..=n + m {
            let o = o_hat(&model, &a, m, l, mode).unwrap();
            let nn = n_hat(&model, &a, m, l, mode).unwrap();
            let mm = m_hat(&model, &a, m, l, mode).unwrap();
            prop_assert_eq!(&mm, &(&o + &nn));
            prop_assert_eq!(&m_hat(&model, &b, m, l, mode).unwrap(), &mm);
            total_new = total_new + nn;
        }
        prop_assert_eq!(k_hat(&model, &a, m, mode).unwrap(), total_new);
    }

    #[test]
    fn posterior_laws_are_probability_vectors(
        model in model_strategy(), n in 1usize..12, m in 1usize..30, l in 1usize..6, seed in any::<u64>(),
    ) {
        let sizes = sample_partition(&model, n, &mut rng_for(seed, 1)).sizes;
        let data = PartitionData::from_block_sizes(&sizes).unwrap();
        let q = ConditionalQuery::new(model, data, m, l).unwrap();
        for stat in [Statistic::O, Statistic::N, Statistic::M] {
            let p = pmf(&q, stat, &PrecisionPolicy::default()).unwrap();
            let probs = p.to_f64();
            prop_assert!(probs.iter().all(|&x| x >= -1e-12));
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn prior_laws_have_the_right_mean(model in model_strategy(), n in 1usize..40, l in 1usize..5) {
        prop_assume!(l <= n);
        let p = m_prior_pmf(&model, n, l, &PrecisionPolicy::default()).unwrap();
        let direct = gibbs_core::prior::m_prior_factorial_moment(&model, n, l, 1, Mode::Float(128)).unwrap();
        prop_assert!((p.mean().to_f64() - direct.to_f64()).abs() <= 1e-9 * direct.to_f64().abs().max(1.0));
    }
}
