//! Implementations of the subcommands.

use std::fmt::Write as _;

use gibbs_core::crossval::crossval as run_crossval;
use gibbs_core::fit::{fit_dp, fit_pd, FitOptions, FitResult};
use gibbs_core::posterior::rare_variety;
use gibbs_core::simulate::{continue_sample, monte_carlo, rng_for, Statistic};
use gibbs_core::{FrequencyCounts, PartitionData, PrecisionPolicy};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{CrossvalArgs, EstimateArgs, FitArgs, ModelKind, SimulateArgs, StatKind, ValidateArgs};
use crate::suites::run_suite;
use crate::{build_model, envelope, load_counts, round_half_away, CliError, Output};

fn announce(counts: &FrequencyCounts) {
    eprintln!("data: n = {}, j = {}", counts.n(), counts.j());
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn fit_json(fit: &FitResult, kind: ModelKind, counts: &FrequencyCounts, with_grid: bool) -> Value {
    let mut v = json!({
        "model": if kind == ModelKind::Dp { "dp" } else { "pd" },
        "n": counts.n(),
        "j": counts.j(),
        "sigma": fit.sigma,
        "theta": fit.theta,
        "log_eppf": fit.log_eppf,
        "evaluations": fit.evaluations,
        "converged": fit.converged,
        "at_boundary": fit.at_boundary,
    });
    if let (true, Some(g)) = (with_grid, &fit.grid) {
        v["grid"] = json!({ "sigmas": g.sigmas, "theta_plus_sigma": g.offsets, "log_eppf": g.values });
    }
    v
}

/// Exit code 0 when the optimizer converged to an interior point, 2 otherwise.
pub fn fit(a: &FitArgs, as_json: bool) -> Result<Output, CliError> {
    let counts = load_counts(&a.input.input, a.input.raw)?;
    announce(&counts);
    let fit = match a.model {
        ModelKind::Pd => fit_pd(&counts, &FitOptions::default())?,
        ModelKind::Dp => fit_dp(&counts)?,
        ModelKind::Gnedin => return Err(CliError::Input("fit supports --model pd and --model dp".into())),
    };
    let body = fit_json(&fit, a.model, &counts, a.grid);
    let text = if as_json {
        let mut doc = envelope("fit", None, None, &PrecisionPolicy::default());
        doc["result"] = body;
        pretty(&doc)
    } else {
        let mut s = String::new();
        for key in ["model", "n", "j", "sigma", "theta", "log_eppf", "evaluations", "converged", "at_boundary"] {
            let v = &body[key];
            let shown = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
            writeln!(s, "{}\t{}", key, shown).unwrap();
        }
        s
    };
    Ok(Output {
        text,
        code: if fit.converged { 0 } else { 2 },
    })
}

pub fn estimate(a: &EstimateArgs, policy: &PrecisionPolicy, as_json: bool) -> Result<Output, CliError> {
    let counts = load_counts(&a.input.input, a.input.raw)?;
    announce(&counts);
    let model = build_model(&a.model)?;
    if a.tau.is_empty() || a.tau.contains(&0) {
        return Err(CliError::Input("--tau values must be positive".into()));
    }
    let data = PartitionData::from_counts(counts);
    let mode = policy.initial_mode();
    let tau_max = *a.tau.iter().max().expect("nonempty");
    let results = a
        .m
        .par_iter()
        .map(|&m| rare_variety(&model, &data, m, tau_max, mode))
        .collect::<gibbs_core::Result<Vec<_>>>()?;

    // (m, key, O, N, M) with key = τ or l
    let mut rows: Vec<(usize, usize, f64, f64, f64)> = Vec::new();
    for (rv, &m) in results.iter().zip(&a.m) {
        if a.per_l {
            for e in &rv.per_l {
                rows.push((m, e.l, e.o.to_f64(), e.n.to_f64(), e.m.to_f64()));
            }
        } else {
            for &tau in &a.tau {
                let part = &rv.per_l[..tau];
                let o = part.iter().fold(mode.zero(), |acc, e| acc + &e.o);
                let n = part.iter().fold(mode.zero(), |acc, e| acc + &e.n);
                let mm = &o + &n;
                rows.push((m, tau, o.to_f64(), n.to_f64(), mm.to_f64()));
            }
        }
    }
    let key = if a.per_l { "l" } else { "tau" };
    let text = if as_json {
        let mut doc = envelope("estimate", None, Some(&model), policy);
        doc["data"] = json!({ "n": data.n(), "j": data.j() });
        doc["rows"] = rows
            .iter()
            .map(|&(m, k, o, n, mm)| {
                json!({
                    "m": m, key: k, "O": o, "N": n, "M": mm,
                    "O_rounded": round_half_away(o), "N_rounded": round_half_away(n), "M_rounded": round_half_away(mm),
                })
            })
            .collect();
        pretty(&doc)
    } else {
        let mut s = format!("m\t{}\tO\tN\tM\tO_rounded\tN_rounded\tM_rounded\n", key);
        for (m, k, o, n, mm) in rows {
            writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                m,
                k,
                o,
                n,
                mm,
                round_half_away(o),
                round_half_away(n),
                round_half_away(mm)
            )
            .unwrap();
        }
        s
    };
    Ok(Output::ok(text))
}

/// Histogram of per-replicate values of the chosen statistic.
fn simulate_hist(
    a: &SimulateArgs,
    model: &gibbs_core::GibbsModel,
    data: &PartitionData,
    m: usize,
) -> Result<Vec<u64>, CliError> {
    let stat = match a.stat {
        StatKind::OL => Some(Statistic::O),
        StatKind::NL => Some(Statistic::N),
        StatKind::ML => Some(Statistic::M),
        StatKind::SingleBlock | StatKind::Blocks => None,
    };
    if let Some(stat) = stat {
        if a.l == 0 {
            return Err(CliError::Input("-l must be positive".into()));
        }
        let mc = monte_carlo(model, data, m, &[a.l], a.replicates, a.seed)?;
        let h = &mc.per_l[&a.l];
        return Ok(match stat {
            Statistic::O => h.o.clone(),
            Statistic::N => h.n.clone(),
            Statistic::M => h.m.clone(),
        });
    }
    let values = (0..a.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_for(a.seed, rep as u64);
            let s = continue_sample(model, data, m, &mut rng)?;
            Ok(match a.stat {
                StatKind::SingleBlock => usize::from(s.j() == 1),
                _ => s.new_blocks(),
            })
        })
        .collect::<gibbs_core::Result<Vec<usize>>>()?;
    let mut hist = vec![0u64; values.iter().max().map_or(1, |v| v + 1)];
    for v in values {
        hist[v] += 1;
    }
    Ok(hist)
}

/// Always emits JSON.
pub fn simulate(a: &SimulateArgs, policy: &PrecisionPolicy) -> Result<Output, CliError> {
    let model = build_model(&a.model)?;
    let (data, m) = match (a.prior, &a.input) {
        (true, Some(_)) => return Err(CliError::Input("--prior takes no input file".into())),
        (true, None) => {
            let n = a.n.ok_or_else(|| CliError::Input("--prior needs -n".into()))?;
            (PartitionData::empty(), n)
        }
        (false, Some(input)) => {
            let counts = load_counts(input, a.raw)?;
            announce(&counts);
            let m = a.m.ok_or_else(|| CliError::Input("continuing a sample needs -m".into()))?;
            (PartitionData::from_counts(counts), m)
        }
        (false, None) => return Err(CliError::Input("give an input file or --prior".into())),
    };
    if a.replicates == 0 {
        return Err(CliError::Input("-R must be positive".into()));
    }
    let hist = simulate_hist(a, &model, &data, m)?;
    let r = a.replicates as f64;
    let probs: Vec<f64> = hist.iter().map(|&c| c as f64 / r).collect();
    let pmf_se: Vec<f64> = probs.iter().map(|p| (p * (1.0 - p) / r).sqrt()).collect();
    let mean: f64 = probs.iter().enumerate().map(|(x, p)| x as f64 * p).sum();
    let second: f64 = probs.iter().enumerate().map(|(x, p)| (x * x) as f64 * p).sum();
    let se = ((second - mean * mean).max(0.0) / r).sqrt();
    let stat_name = match a.stat {
        StatKind::SingleBlock => "single-block",
        StatKind::Blocks => "blocks",
        StatKind::OL => "O_l",
        StatKind::NL => "N_l",
        StatKind::ML => "M_l",
    };
    let mut doc = envelope("simulate", Some(a.seed), Some(&model), policy);
    doc["result"] = json!({
        "stat": stat_name,
        "l": matches!(a.stat, StatKind::OL | StatKind::NL | StatKind::ML).then_some(a.l),
        "n_observed": data.n(),
        "draws": m,
        "replicates": a.replicates,
        "mean": mean,
        "se": se,
        "pmf": probs,
        "pmf_se": pmf_se,
    });
    Ok(Output::ok(pretty(&doc)))
}

/// Exit code 0 when every check passes, 2 otherwise.
pub fn validate(a: &ValidateArgs, as_json: bool) -> Result<Output, CliError> {
    let checks = run_suite(a.suite, a.seed);
    let all_ok = checks.iter().all(|c| c.passed);
    let text = if as_json {
        let mut doc = envelope("validate", Some(a.seed), None, &PrecisionPolicy::default());
        doc["checks"] = checks
            .iter()
            .map(|c| json!({ "suite": c.suite, "check": c.name, "passed": c.passed, "detail": c.detail }))
            .collect();
        doc["passed"] = json!(all_ok);
        pretty(&doc)
    } else {
        let mut s = String::from("suite\tcheck\tstatus\tdetail\n");
        for c in &checks {
            writeln!(s, "{}\t{}\t{}\t{}", c.suite, c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail).unwrap();
        }
        s
    };
    Ok(Output {
        text,
        code: if all_ok { 0 } else { 2 },
    })
}

pub fn crossval(a: &CrossvalArgs, policy: &PrecisionPolicy, as_json: bool) -> Result<Output, CliError> {
    let counts = load_counts(&a.input.input, a.input.raw)?;
    announce(&counts);
    let folds = run_crossval(
        &counts,
        a.subsample_size,
        a.folds,
        &a.tau,
        a.seed,
        &FitOptions::default(),
        policy.initial_mode(),
    )?;
    let text = if as_json {
        let mut doc = envelope("crossval", Some(a.seed), None, policy);
        doc["data"] = json!({ "n": counts.n(), "j": counts.j(), "subsample_size": a.subsample_size });
        doc["folds"] = folds
            .iter()
            .map(|f| {
                json!({
                    "fold": f.fold + 1,
                    "sigma": f.sigma,
                    "theta": f.theta,
                    "j": f.subsample.j(),
                    "m": f.m,
                    "rows": f.rows.iter().map(|r| json!({
                        "tau": r.tau,
                        "est": { "O": r.est_o, "N": r.est_n, "M": r.est_m },
                        "est_rounded": { "O": round_half_away(r.est_o), "N": round_half_away(r.est_n), "M": round_half_away(r.est_m) },
                        "true": { "O": r.true_o, "N": r.true_n, "M": r.true_m },
                        "rel_error_M": r.rel_error(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        pretty(&doc)
    } else {
        let mut s = String::from("fold\tsigma\ttheta\ttau\test_O\test_N\test_M\ttrue_O\ttrue_N\ttrue_M\trel_error_M\n");
        for f in &folds {
            for r in &f.rows {
                writeln!(
                    s,
                    "{}\t{:.6}\t{:.3}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.4}",
                    f.fold + 1,
                    f.sigma,
                    f.theta,
                    r.tau,
                    round_half_away(r.est_o),
                    round_half_away(r.est_n),
                    round_half_away(r.est_m),
                    r.true_o,
                    r.true_n,
                    r.true_m,
                    r.rel_error()
                )
                .unwrap();
            }
        }
        s
    };
    Ok(Output::ok(text))
}
