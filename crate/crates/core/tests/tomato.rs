//! End-to-end analysis of the tomato EST library.

use gibbs_core::data::tomato;
use gibbs_core::fit::{fit_pd, log_eppf, FitOptions};
use gibbs_core::posterior::rare_variety;
use gibbs_core::{GibbsModel, Mode, PartitionData};
use rug::Rational;

/// Rounded (Ô_τ, N̂_τ, M̂_τ) for τ = 3, 4, 5 as published for (σ, θ) = (0.612, 741).
const PUBLISHED: [(usize, [i64; 9]); 4] = [
    (250, [1745, 138, 1882, 1782, 138, 1920, 1798, 138, 1935]),
    (500, [1730, 272, 2002, 1773, 272, 2045, 1793, 272, 2064]),
    (750, [1715, 402, 2117, 1763, 402, 2165, 1787, 403, 2189]),
    (1000, [1700, 529, 2229, 1753, 530, 2283, 1780, 530, 2310]),
];

#[test]
fn rare_variety_estimates_match_published_values() {
    let mode = Mode::Float(256);
    let model = GibbsModel::pitman_yor_rational(Rational::from((612, 1000)), Rational::from(741)).unwrap();
    let data = PartitionData::from_counts(tomato());
    for (m, row) in PUBLISHED {
        for (k, tau) in [3, 4, 5].into_iter().enumerate() {
            let rv = rare_variety(&model, &data, m, tau, mode).unwrap();
            let got = [rv.o.to_f64(), rv.n.to_f64(), rv.m.to_f64()];
            for c in 0..3 {
                let want = row[3 * k + c];
                assert!((got[c].round() as i64 - want).abs() <= 1, "m={} tau={} col={}: {} vs {}", m, tau, c, got[c], want);
            }
        }
    }
}

#[test]
fn fitted_parameters_beat_published_ones() {
    let counts = tomato();
    let f = fit_pd(&counts, &FitOptions::default()).unwrap();
    assert!((0.60..=0.62).contains(&f.sigma), "{}", f.sigma);
    assert!((700.0..=800.0).contains(&f.theta), "{}", f.theta);
    assert!(f.converged && !f.at_boundary);
    assert!(f.log_eppf >= log_eppf(0.612, 741.0, &counts).unwrap() - 1e-6);
}

#[test]
fn no_additional_sample_reproduces_the_data() {
    let model = GibbsModel::pitman_yor(0.612, 741.0).unwrap();
    let data = PartitionData::from_counts(tomato());
    let rv = rare_variety(&model, &data, 0, 3, Mode::Float(128)).unwrap();
    assert_eq!(rv.m.to_f64(), 1434.0 + 253.0 + 71.0);
    assert_eq!(rv.n.to_f64(), 0.0);
}
