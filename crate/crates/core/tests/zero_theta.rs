//! Pitman–Yor with θ = 0: the weights (θ)_n in denominators vanish and must
//! cancel against the numerators.

use gibbs_core::posterior::{estimate, estimate_via, k_hat, k_hat_by_sizes, pmf_via, ConditionalQuery, Statistic};
use gibbs_core::prior::{m_prior_factorial_moment, m_prior_factorial_moment_generic, m_prior_pmf_via, Route};
use gibbs_core::simulate::{enumerate_continuations, exact_laws};
use gibbs_core::{GibbsModel, Mode, PartitionData, PrecisionPolicy};

fn model() -> GibbsModel {
    GibbsModel::pitman_yor(0.5, 0.0).unwrap()
}

#[test]
fn prior_laws_agree_across_routes() {
    let pol = PrecisionPolicy::exact();
    for n in 1..=9 {
        for l in 1..=n {
            let a = m_prior_pmf_via(&model(), n, l, Route::ClosedForm, &pol).unwrap();
            let b = m_prior_pmf_via(&model(), n, l, Route::Inversion, &pol).unwrap();
            assert_eq!(a.probs, b.probs, "n={} l={}", n, l);
            for r in 0..=n / l {
                assert_eq!(
                    m_prior_factorial_moment(&model(), n, l, r, Mode::Exact).unwrap(),
                    m_prior_factorial_moment_generic(&model(), n, l, r, Mode::Exact).unwrap()
                );
            }
        }
    }
}

#[test]
fn single_block_probability() {
    // P[one block among 3] = (1−σ)(2−σ)/((θ+1)(θ+2)) = 3/8
    let w = model().v_weight(3, 1, Mode::Exact).unwrap() * Mode::Exact.ratio(3, 4);
    assert_eq!(w, Mode::Exact.ratio(3, 8));
}

#[test]
fn empty_data_posterior_matches_enumeration() {
    let pol = PrecisionPolicy::exact();
    let empty = PartitionData::empty();
    let conts = enumerate_continuations(&model(), &empty, 3, Mode::Exact).unwrap();
    for l in 1..=3 {
        let q = ConditionalQuery::new(model(), empty.clone(), 3, l).unwrap();
        let laws = exact_laws(&conts, l, Mode::Exact);
        let p = pmf_via(&q, Statistic::N, Route::ClosedForm, &pol).unwrap();
        let mut want = laws.n.clone();
        want.resize(p.probs.len(), Mode::Exact.zero());
        assert_eq!(p.probs, want);
        for stat in [Statistic::O, Statistic::N, Statistic::M] {
            assert_eq!(
                estimate(&q, stat, Mode::Exact).unwrap(),
                estimate_via(&q, stat, Route::Inversion, Mode::Exact).unwrap()
            );
        }
    }
    let k = k_hat(&model(), &empty, 12, Mode::Exact).unwrap();
    assert_eq!(k, k_hat_by_sizes(&model(), &empty, 12, Mode::Exact).unwrap());
}
