//! Empirical Bayes calibration: maximize the EPPF of the observed partition
//! over the Pitman–Yor parameters (or the Dirichlet θ).

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::models::FrequencyCounts;

/// Log EPPF of the observed counts under PY(σ, θ), σ ∈ [0, 1):
/// Σ_{i=1}^{j−1} log(θ+iσ) − log (θ+1)_{n−1} + Σ_t m_t log (1−σ)_{t−1}.
pub fn log_eppf(sigma: f64, theta: f64, counts: &FrequencyCounts) -> Result<f64> {
    if !(0.0..1.0).contains(&sigma) || theta <= -sigma || !theta.is_finite() {
        return Err(Error::Domain(format!(
            "need 0 <= sigma < 1 and theta > -sigma, got ({}, {})",
            sigma, theta
        )));
    }
    if counts.is_empty() {
        return Err(Error::InvalidPartition("empty frequency counts".into()));
    }
    let n = counts.n() as f64;
    let j = counts.j();
    let mut ll = 0.0;
    for i in 1..j {
        ll += (theta + i as f64 * sigma).ln();
    }
    ll -= ln_gamma(theta + n) - ln_gamma(theta + 1.0);
    let base = ln_gamma(1.0 - sigma);
    for (t, mt) in counts.iter() {
        if t > 1 {
            ll += mt as f64 * (ln_gamma(t as f64 - sigma) - base);
        }
    }
    Ok(ll)
}

/// Grid and refinement settings.
#[derive(Clone, Debug)]
pub struct FitOptions {
    /// σ grid: i/(sigma_points+1), i = 1..=sigma_points.
    pub sigma_points: usize,
    /// θ+σ grid: log-spaced on [1e-3, theta_max+σ].
    pub theta_points: usize,
    /// Upper end of the θ grid; defaults to 10n.
    pub theta_max: Option<f64>,
    /// Run the simplex refinement after the grid search.
    pub refine: bool,
    pub max_evaluations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            sigma_points: 99,
            theta_points: 60,
            theta_max: None,
            refine: true,
            max_evaluations: 5000,
        }
    }
}

/// Objective values on the search grid.
#[derive(Clone, Debug)]
pub struct GridSnapshot {
    pub sigmas: Vec<f64>,
    /// Values of θ+σ.
    pub offsets: Vec<f64>,
    /// values[a][b] = log EPPF at (sigmas[a], offsets[b] − sigmas[a]).
    pub values: Vec<Vec<f64>>,
    pub best: (f64, f64, f64),
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub sigma: f64,
    pub theta: f64,
    pub log_eppf: f64,
    pub evaluations: usize,
    /// The refinement met its tolerance and the optimum is interior.
    pub converged: bool,
    /// The optimum sits at the edge of the search region.
    pub at_boundary: bool,
    pub grid: Option<GridSnapshot>,
}

fn check_data(counts: &FrequencyCounts) -> Result<()> {
    let (n, j) = (counts.n(), counts.j());
    if counts.is_empty() {
        return Err(Error::InvalidPartition("empty frequency counts".into()));
    }
    if j == 1 {
        return Err(Error::DegenerateData("a single block: the likelihood peaks at the boundary".into()));
    }
    if j == n {
        return Err(Error::DegenerateData("all blocks are singletons: the likelihood grows towards sigma = 1".into()));
    }
    Ok(())
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// Maximizes the PY log EPPF: grid search, then a Nelder–Mead refinement on
/// (logit σ, log(θ+σ)). Deterministic for given options.
pub fn fit_pd(counts: &FrequencyCounts, opts: &FitOptions) -> Result<FitResult> {
    check_data(counts)?;
    if opts.sigma_points == 0 || opts.theta_points < 2 {
        return Err(Error::Domain("grid needs at least 1 sigma point and 2 theta points".into()));
    }
    let theta_max = opts.theta_max.unwrap_or(10.0 * counts.n() as f64);
    if !(theta_max > 1e-3) {
        return Err(Error::Domain("theta_max must exceed 1e-3".into()));
    }
    let sigmas: Vec<f64> = (1..=opts.sigma_points)
        .map(|i| i as f64 / (opts.sigma_points + 1) as f64)
        .collect();
    let lo = 1e-3f64.ln();
    let hi = theta_max.ln();
    let offsets: Vec<f64> = (0..opts.theta_points)
        .map(|b| (lo + (hi - lo) * b as f64 / (opts.theta_points - 1) as f64).exp())
        .collect();
    let values: Vec<Vec<f64>> = sigmas
        .par_iter()
        .map(|&s| {
            offsets
                .iter()
                .map(|&v| log_eppf(s, v - s, counts).unwrap_or(f64::NEG_INFINITY))
                .collect()
        })
        .collect();
    let mut evaluations = sigmas.len() * offsets.len();
    let top = values.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    // smallest (σ, θ) among points within 1e-10 of the maximum
    let mut best = None;
    'outer: for (a, row) in values.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            if v >= top - 1e-10 {
                best = Some((a, b));
                break 'outer;
            }
        }
    }
    let (ba, bb) = best.expect("finite grid maximum");
    let grid_best = (sigmas[ba], offsets[bb] - sigmas[ba], values[ba][bb]);
    let grid_edge = ba == 0 || ba + 1 == sigmas.len() || bb + 1 == offsets.len();
    let grid = GridSnapshot {
        sigmas,
        offsets,
        values,
        best: grid_best,
    };
    if !opts.refine {
        return Ok(FitResult {
            sigma: grid_best.0,
            theta: grid_best.1,
            log_eppf: grid_best.2,
            evaluations,
            converged: false,
            at_boundary: grid_edge,
            grid: Some(grid),
        });
    }
    let objective = |x: &[f64]| -> f64 {
        let s = logistic(x[0]);
        let theta = x[1].exp() - s;
        match log_eppf(s, theta, counts) {
            Ok(v) if v.is_finite() => -v,
            _ => f64::INFINITY,
        }
    };
    let start = [
        (grid_best.0 / (1.0 - grid_best.0)).ln(),
        (grid_best.1 + grid_best.0).ln(),
    ];
    let mut nm = nelder_mead(&objective, &start, 0.2, 1e-12, opts.max_evaluations);
    evaluations += nm.evaluations;
    // one restart from the optimum guards against a collapsed simplex
    let again = nelder_mead(&objective, &nm.x, 0.05, 1e-12, opts.max_evaluations);
    evaluations += again.evaluations;
    if again.f <= nm.f {
        nm.x = again.x;
        nm.f = again.f;
        nm.converged = again.converged;
    }
    let sigma = logistic(nm.x[0]);
    let theta = nm.x[1].exp() - sigma;
    let mut result = FitResult {
        sigma,
        theta,
        log_eppf: -nm.f,
        evaluations,
        converged: nm.converged,
        at_boundary: false,
        grid: None,
    };
    if result.log_eppf < grid_best.2 {
        result.sigma = grid_best.0;
        result.theta = grid_best.1;
        result.log_eppf = grid_best.2;
    }
    result.at_boundary = result.sigma < 1e-4 || result.sigma > 1.0 - 1e-4 || result.theta > theta_max;
    result.converged &= !result.at_boundary;
    result.grid = Some(grid);
    Ok(result)
}

/// Dirichlet fit: the unique root of j/θ = Σ_{i<n} 1/(θ+i), found by
/// bisection in log θ.
pub fn fit_dp(counts: &FrequencyCounts) -> Result<FitResult> {
    check_data(counts)?;
    let n = counts.n() as usize;
    let j = counts.j() as f64;
    let score = |theta: f64| j / theta - (0..n).map(|i| 1.0 / (theta + i as f64)).sum::<f64>();
    let (mut lo, mut hi) = (1e-10f64.ln(), 1e12f64.ln());
    let mut evaluations = 0;
    if score(hi.exp()) > 0.0 || score(lo.exp()) < 0.0 {
        return Err(Error::DegenerateData("no interior maximum for theta".into()));
    }
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        if score(mid.exp()) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = (0.5 * (lo + hi)).exp();
    Ok(FitResult {
        sigma: 0.0,
        theta,
        log_eppf: log_eppf(0.0, theta, counts)?,
        evaluations,
        converged: true,
        at_boundary: false,
        grid: None,
    })
}

struct NmResult {
    x: Vec<f64>,
    f: f64,
    evaluations: usize,
    converged: bool,
}

/// Nelder–Mead minimization with standard coefficients.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: &[f64], step: f64, ftol: f64, max_eval: usize) -> NmResult {
    let d = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..d {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evals = d + 1;
    let mut converged = false;
    while evals < max_eval {
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        let spread = (vals[d] - vals[0]).abs();
        let size = simplex[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= ftol * (1.0 + vals[0].abs()) && size < 1e-10 {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|k| simplex[..d].iter().map(|p| p[k]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|k| centroid[k] + t * (simplex[d][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[d] = xe;
                vals[d] = fe;
            } else {
                simplex[d] = xr;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            simplex[d] = xr;
            vals[d] = fr;
        } else {
            let (xc, fc) = if fr < vals[d] {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            };
            evals += 1;
            if fc < vals[d].min(fr) {
                simplex[d] = xc;
                vals[d] = fc;
            } else {
                for i in 1..=d {
                    let p: Vec<f64> = (0..d).map(|k| simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k])).collect();
                    vals[i] = f(&p);
                    simplex[i] = p;
                }
                evals += d;
            }
        }
    }
    let best = (0..=d)
        .min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty simplex");
    NmResult {
        x: simplex[best].clone(),
        f: vals[best],
        evaluations: evals,
        converged,
    }
}
