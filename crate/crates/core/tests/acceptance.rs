//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hetdetect_core::harness::{run, ExperimentConfig, ExperimentKind, PowerSpec, RunOptions};
use hetdetect_core::kernel::{build_modified_kernel, kernel_sum_profile, BaseKernel};
use hetdetect_core::lowerbound::{
    build_moment_matched, chi2_convolved, marginal_equality_check, moment_matching_bound, Construction, Hypothesis,
};
use hetdetect_core::numerics::{
    convolution_smoothness_check, discrete_convolution, finite_difference, zygmund_check, Component,
    DiscreteSequence, Law,
};
use hetdetect_core::rng::{replicate_seed, sub_seed};
use hetdetect_core::sim_model::{FunctionSpec, Wave};
use hetdetect_core::statistics::{BandwidthRule, StatisticId, StatisticSpec};
use hetdetect_core::testing::{default_statistic, Setting};
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

// 1. Interior row sums of the box kernel equal 1.
fn kernel_normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [50, 200, 1000] {
        for h in [0.05, 0.2] {
            let k = build_modified_kernel(&BaseKernel::Box, n, h).unwrap();
            let tm = k.t_max();
            let sums = kernel_sum_profile(&k);
            for (i, s) in sums.iter().enumerate().take(n - tm).skip(tm) {
                worst = worst.max((s - 1.0).abs());
                let naive: f64 = (0..n as i64).map(|j| common::kernel_weight(false, n, h, i as i64 - j)).sum();
                worst = worst.max((naive - 1.0).abs());
            }
        }
    }
    outcome(worst <= 1e-12, format!("max |row sum − 1| = {worst:.2e} (tol 1e-12)"))
}

// 2. Fast statistics agree with the double/triple-loop oracles.
fn brute_force_equivalence() -> Outcome {
    let err = common::max_relative_error(200, 2);
    outcome(err < 1e-10, format!("max relative error {err:.2e} over 200 inputs × 8 statistics (tol 1e-10)"))
}

fn rate_config(setting: Setting, beta: Option<f64>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::MseRate);
    cfg.setting = setting;
    cfg.beta = beta;
    cfg.alpha = 1.0;
    cfg.replicates = 400;
    cfg.n_grid = vec![256, 512, 1024, 2048];
    cfg
}

fn slope_check(cfg: &ExperimentConfig, target: f64, tol: f64) -> Outcome {
    let out = run(cfg, &RunOptions::default()).unwrap();
    let slope = out.summary["fit"]["slope"].as_f64().unwrap_or(f64::NAN);
    let se = out.summary["fit"]["slope_stderr"].as_f64().unwrap_or(f64::NAN);
    let passed = (slope - target).abs() <= tol;
    outcome(passed, format!("slope {slope:.4} ± {se:.3} vs {target:.4} (tol ±{tol})"))
}

// 3. Null MSE rate of the kernel statistic.
fn null_mse_rate() -> Outcome {
    let beta: f64 = 0.4;
    slope_check(&rate_config(Setting::L2, Some(beta)), -8.0 * beta / (4.0 * beta + 1.0), 0.5)
}

// 4. Profile MSE rate of Ŝ.
fn profile_mse_rate() -> Outcome {
    slope_check(&rate_config(Setting::Profile, None), -1.0, 0.4)
}

// 5. Held-out Type I error of calibrated tests.
fn type1_control() -> Outcome {
    let mut details = Vec::new();
    let mut passed = true;
    for (setting, beta) in [(Setting::L2, Some(0.4)), (Setting::Profile, None)] {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Type1);
        cfg.setting = setting;
        cfg.beta = beta;
        cfg.eta = 0.1;
        cfg.n_grid = vec![1024];
        cfg.replicates = 2000;
        cfg.calibration_replicates = 2000;
        let out = run(&cfg, &RunOptions::default()).unwrap();
        let worst = out.summary["worst_type1"].as_f64().unwrap();
        passed &= worst <= 0.08;
        details.push(format!("{setting:?} worst {worst:.4}"));
    }
    outcome(passed, format!("{} (need ≤ 0.08)", details.join(", ")))
}

// 6. Power at ten times the separation rate.
fn power_at_ten_zeta() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::PowerCurve);
    cfg.beta = Some(0.4);
    cfg.c_h = Some(16.0);
    cfg.n_grid = vec![1024];
    cfg.replicates = 500;
    cfg.calibration_replicates = 2000;
    cfg.power = Some(PowerSpec {
        multiples: vec![10.0],
        shape: FunctionSpec::SmoothBumpSum {
            base: 5.0,
            waves: vec![Wave { amplitude: 1.0, frequency: 1.0, phase: 0.0 }],
        },
    });
    let out = run(&cfg, &RunOptions::default()).unwrap();
    let row = &out.table.rows[0];
    let power: f64 = row[2].parse().unwrap();
    let in_class = &out.summary["alternatives_in_class"][0];
    outcome(
        power >= 0.9,
        format!("power {power:.3} ± {} at ‖V − V̄‖₂ = {} (need ≥ 0.9; Hölder membership {in_class})", row[3], row[1]),
    )
}

fn all_statistics(n: usize) -> Vec<StatisticSpec> {
    let optimal = default_statistic(Setting::L2, Some(0.4), None, &[n]).unwrap().bandwidth.unwrap();
    StatisticId::ALL
        .iter()
        .map(|&id| match id {
            StatisticId::THatKernel | StatisticId::THatNondeleted => StatisticSpec::new(id).with_bandwidth(optimal),
            StatisticId::Dette2002 => StatisticSpec::new(id).with_bandwidth(BandwidthRule::Undersmoothed { beta: 0.4 }),
            _ => StatisticSpec::new(id),
        })
        .collect()
}

// 7. Exact constructions: equal marginals and a diagonal ROC for every statistic.
fn indistinguishability() -> Outcome {
    let n = 256;
    let reps = 1000;
    let constructions = [
        Construction::TrivialityMixture { m: 9.0 },
        Construction::SpikyTwoPoint { beta: 0.3, c: 0.5 },
        Construction::DesignUnknownNoise { beta: 0.2, c: 0.5 },
    ];
    let stats: Vec<_> = all_statistics(n).iter().map(|s| s.prepare(n).unwrap()).collect();
    let mut worst_gap: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut worst_at = String::new();
    for (k, c) in constructions.iter().enumerate() {
        worst_gap = worst_gap.max(marginal_equality_check(c, n, 2001).unwrap().max_gap);
        let base = sub_seed(ExperimentConfig::new(ExperimentKind::Lowerbound).seed, k as u64);
        let values = |hyp: Hypothesis, label: u64| -> Vec<Vec<f64>> {
            let per_rep: Vec<Vec<f64>> = (0..reps as u64)
                .into_par_iter()
                .map(|r| {
                    let y = c.sample(n, hyp, replicate_seed(sub_seed(base, label), r)).unwrap();
                    stats.iter().map(|s| s.value(&y).unwrap()).collect()
                })
                .collect();
            (0..stats.len()).map(|j| per_rep.iter().map(|v| v[j]).collect()).collect()
        };
        let null = values(Hypothesis::Null, 0);
        let alt = values(Hypothesis::Alternative, 1);
        for (j, s) in stats.iter().enumerate() {
            let (auc, se) = common::auc(&alt[j], &null[j]);
            let z = (auc - 0.5).abs() / se;
            if z > worst_z {
                worst_z = z;
                worst_at = format!("{} on {}", s.spec.id, c.name());
            }
        }
    }
    outcome(
        worst_gap < 1e-10 && worst_z <= 3.0,
        format!("max marginal gap {worst_gap:.1e} (tol 1e-10); max |AUC − ½|/se {worst_z:.2} at {worst_at} (tol 3)"),
    )
}

fn rademacher_chi2(c: f64, n: usize) -> f64 {
    let rho = 2f64.sqrt() * c * (n as f64).powf(-0.25);
    let tau = 2.0 * rho;
    let nu0 = Law::gaussian(0.0, tau);
    let nu1 = Law::new(vec![
        Component { weight: 0.5, mean: 0.0, var: tau - rho },
        Component { weight: 0.5, mean: 0.0, var: tau + rho },
    ])
    .unwrap();
    chi2_convolved(&nu0, &nu1).unwrap().value
}

// 8. χ² scaling of the Rademacher pair and the moment-matching bound.
fn chi2_machinery() -> Outcome {
    let ratio = rademacher_chi2(0.1, 10_000) / rademacher_chi2(0.1, 40_000);
    let mut worst: f64 = 0.0;
    for q in 1..=9 {
        for eps in [0.1, 0.3] {
            let nu = build_moment_matched(q).unwrap().law().affine(eps, 0.0);
            let chi2 = chi2_convolved(&Law::gaussian(0.0, eps * eps), &nu).unwrap().value;
            worst = worst.max(chi2 / moment_matching_bound(q, eps));
        }
    }
    outcome(
        (ratio / 4.0 - 1.0).abs() <= 0.15 && worst <= 1.0,
        format!("χ²(n)/χ²(4n) = {ratio:.3} at c = 0.1 (need 4 ± 15%); max χ²/bound {worst:.2e} over q ≤ 9, ε ∈ {{0.1, 0.3}}"),
    )
}

fn random_grid_sequence(rng: &mut impl Rng, n: usize) -> DiscreteSequence {
    DiscreteSequence::on_grid((0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn holder_sequence(n: usize, phi: impl Fn(f64) -> f64) -> DiscreteSequence {
    DiscreteSequence::on_grid((0..=n).map(|k| phi(k as f64 / n as f64)).collect()).unwrap()
}

// 9. Appendix: convolution identity, Zygmund bound, convolution constant.
fn appendix_properties() -> Outcome {
    let mut rng = common::rng(9);
    let mut identity_err: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(4..=64);
        let (f, g) = (random_grid_sequence(&mut rng, n), random_grid_sequence(&mut rng, n));
        let h = rng.gen_range(1..=n as i64);
        let lhs = finite_difference(&discrete_convolution(&f, &g), h, 2).unwrap();
        let span = 3 * n as i64 + 2 * h;
        for z in -span..=span {
            // Σ_k D_h f(k) · D_h g⁻(z − k), with g⁻(w) = g(−w).
            let mut rhs = 0.0;
            for k in -span..=span {
                let dhf = f.get(k + h) - f.get(k);
                let w = z - k;
                rhs += dhf * (g.get(-(w + h)) - g.get(-w));
            }
            identity_err = identity_err.max((lhs.get(z) - rhs).abs());
        }
    }

    let mut zygmund_ok = true;
    for _ in 0..100 {
        let n = rng.gen_range(4..=64);
        let alpha = rng.gen_range(0.05..0.95);
        let g = random_grid_sequence(&mut rng, n);
        let report = zygmund_check(&g, alpha).unwrap();
        // Independent evaluation of the bound.
        let ni = n as i64;
        let mut star: f64 = 0.0;
        for hh in 1..=ni {
            for z in -3 * ni..=3 * ni {
                let d2 = g.get(z + 2 * hh) - 2.0 * g.get(z + hh) + g.get(z);
                star = star.max(d2.abs() / (hh as f64 / n as f64).powf(alpha));
            }
        }
        let c_alpha: f64 = (0..2000).map(|k| 2f64.powf(-(k as f64) * (1.0 - alpha))).sum();
        let sup = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for z in -ni..=ni {
            let bound = (z.abs() as f64 / n as f64).powf(alpha) * (star * c_alpha / 2.0 + 2.0 * sup);
            zygmund_ok &= (g.get(z) - g.get(0)).abs() <= bound * (1.0 + 1e-12);
        }
        zygmund_ok &= report.holds;
    }

    let beta = 0.3;
    let phi = |x: f64| (x * (1.0 - x)).powf(beta);
    let psi = |x: f64| 0.5 * (2.0 * std::f64::consts::PI * x).sin().abs().powf(beta);
    let constant = |n: usize| {
        let r = convolution_smoothness_check(&holder_sequence(n, phi), &holder_sequence(n, psi), beta, 3.0).unwrap();
        r.constant.expect("premise holds")
    };
    let mut worst_ratio: f64 = 0.0;
    for n in [64, 128, 256] {
        let r = constant(2 * n) / constant(n);
        worst_ratio = worst_ratio.max(r.max(1.0 / r));
    }

    outcome(
        identity_err <= 1e-10 && zygmund_ok && worst_ratio < 2.0,
        format!(
            "identity error {identity_err:.1e} (tol 1e-10); Zygmund bound {}; constant ratio under doubling {worst_ratio:.3} (need < 2)",
            if zygmund_ok { "holds on 100/100" } else { "violated" }
        ),
    )
}

// 10. Moment-matched laws reproduce normal moments.
fn moment_matching() -> Outcome {
    let mut worst: f64 = 0.0;
    for q in [3, 5, 7, 9] {
        let law = build_moment_matched(q).unwrap();
        for k in 1..=q {
            let m: f64 = law.atoms.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
            worst = worst.max((m - common::normal_moment(k)).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max moment error {worst:.1e} for q ∈ {{3, 5, 7, 9}} (tol 1e-9)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("kernel normalization", kernel_normalization, Duration::from_secs(1)),
        ("brute-force equivalence", brute_force_equivalence, Duration::from_secs(10)),
        ("null MSE rate", null_mse_rate, Duration::from_secs(600)),
        ("profile MSE rate", profile_mse_rate, Duration::from_secs(600)),
        ("Type I control", type1_control, Duration::from_secs(300)),
        ("power", power_at_ten_zeta, Duration::from_secs(300)),
        ("indistinguishability", indistinguishability, Duration::from_secs(300)),
        ("chi-square machinery", chi2_machinery, Duration::from_secs(60)),
        ("appendix properties", appendix_properties, Duration::from_secs(60)),
        ("moment matching", moment_matching, Duration::from_secs(1)),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let passed = out.passed && elapsed <= *budget;
        failures += usize::from(!passed);
        println!(
            "{} criterion {:>2} {name}: {} [{:.2}s, budget {}s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
