mod common;

use hetdetect_core::lowerbound::{
    build_moment_matched, chi2_convolved, chi2_divergence, chi2_tensorize, draw_prior, marginal_equality_check,
    moment_matching_bound, risk_floor_estimate, Construction, Hypothesis, PriorSpec,
};
use hetdetect_core::numerics::{normal_pdf, Component, Law};
use hetdetect_core::sim_model::DesignGrid;
use proptest::prelude::*;
use rand::Rng;

fn all_priors(n: usize) -> Vec<PriorSpec> {
    vec![
        PriorSpec::NuisanceMeanPrior { alpha: 0.2, beta: 0.3, c: 0.5, q: None, n },
        PriorSpec::BumpVariancePrior { beta: 0.4, c: 1.0, c_prime: 0.5, n },
        PriorSpec::SpikyV1 { beta: 0.3, c: 0.5, n },
        PriorSpec::RademacherProfile { c: 0.5, n },
        PriorSpec::MixtureNoisePair { beta: 0.2, c: 0.5, n },
        PriorSpec::TwoLevelProfile { m: 9.0, n },
    ]
}

#[test]
fn every_prior_draw_lands_in_its_class() {
    for spec in all_priors(64) {
        for seed in 0..100 {
            let draw = draw_prior(&spec, seed).unwrap();
            let check = spec.check_class(&draw).unwrap();
            assert!(check.passes, "{} seed {seed}: {check:?}", spec.name());
            if let Some(event) = spec.event_holds(&draw) {
                assert!(event, "{} seed {seed}: conditioning event fails", spec.name());
            }
        }
    }
}

#[test]
fn spiky_variance_is_one_on_the_design() {
    let spec = PriorSpec::SpikyV1 { beta: 0.3, c: 0.5, n: 50 };
    let draw = draw_prior(&spec, 1).unwrap();
    let grid = DesignGrid::new(50).unwrap();
    for v in grid.values(&draw.variance) {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn rademacher_event_holds_on_accepted_draws() {
    let n = 64;
    let spec = PriorSpec::RademacherProfile { c: 0.5, n };
    let rho = 2f64.sqrt() * 0.5 * (n as f64).powf(-0.25);
    for seed in 0..100 {
        let v = DesignGrid::new(n).unwrap().values(&draw_prior(&spec, seed).unwrap().variance);
        // (1/n) Σ_{i=1..n} (V_i − V̄)² with V̄ over the same indices.
        let tail = &v[1..];
        let mean = tail.iter().sum::<f64>() / n as f64;
        let spread = tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(spread > rho * rho / 2.0, "seed {seed}: {spread} vs {}", rho * rho / 2.0);
    }
}

#[test]
fn exact_constructions_have_equal_marginals() {
    let cases = [
        (Construction::TrivialityMixture { m: 9.0 }, 64),
        (Construction::SpikyTwoPoint { beta: 0.3, c: 0.5 }, 64),
        (Construction::DesignUnknownNoise { beta: 0.2, c: 0.5 }, 100),
        (Construction::DesignUnknownNoise { beta: 0.3, c: 0.3 }, 257),
    ];
    for (c, n) in cases {
        let r = marginal_equality_check(&c, n, 1001).unwrap();
        assert!(r.max_gap < 1e-12, "{r:?}");
    }
}

#[test]
fn design_unknown_noise_marginal_matches_closed_form() {
    let (beta, c, n) = (0.2, 0.5, 100usize);
    let a = 2f64.sqrt() * c * (n as f64).powf(-beta);
    let construction = Construction::DesignUnknownNoise { beta, c };
    for hyp in [Hypothesis::Null, Hypothesis::Alternative] {
        let laws = construction.coordinate_laws(n, hyp).unwrap();
        for i in [0usize, 1, 37, 100] {
            for x in [-3.0, -0.4, 0.0, 1.1, 2.7] {
                let want = 0.5 * normal_pdf(x, 0.0, 1.0 + a) + 0.5 * normal_pdf(x, 0.0, 1.0 - a);
                assert!((laws[i].density(x).unwrap() - want).abs() < 1e-14, "{hyp:?} i={i} x={x}");
            }
        }
    }
}

fn mixture(parts: &[(f64, f64, f64)]) -> Law {
    Law::new(parts.iter().map(|&(weight, mean, var)| Component { weight, mean, var }).collect()).unwrap()
}

#[test]
fn chi2_matches_brute_force_quadrature() {
    let mut rng = common::rng(3);
    for _ in 0..10 {
        let w = rng.gen_range(0.1..0.9);
        let p = [(w, rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.0)), (1.0 - w, rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.0))];
        let q = [(1.0, rng.gen_range(-0.2..0.2), rng.gen_range(1.2..2.0))];
        let got = chi2_divergence(&mixture(&q), &mixture(&p)).unwrap().value;
        let want = common::chi2_mixtures(&p, &q);
        assert!((got - want).abs() <= 1e-7 * want.max(1e-3), "{got} vs {want}");
    }
}

#[test]
fn rademacher_chi2_is_of_order_rho_to_the_fourth() {
    for (c, n) in [(0.5, 1024usize), (1.0, 4096)] {
        let rho = 2f64.sqrt() * c * (n as f64).powf(-0.25);
        let tau = 2.0 * rho;
        let nu0 = Law::gaussian(0.0, tau);
        let nu1 = mixture(&[(0.5, 0.0, tau - rho), (0.5, 0.0, tau + rho)]);
        let chi2 = chi2_convolved(&nu0, &nu1).unwrap().value;
        assert!(chi2 > 0.0 && chi2 <= rho.powi(4), "{chi2} vs ρ⁴ = {}", rho.powi(4));
    }
}

#[test]
fn moment_matched_pairs_respect_the_bound() {
    for q in 1..=9 {
        for eps in [0.1, 0.3] {
            let nu = build_moment_matched(q).unwrap().law().affine(eps, 0.0);
            let g = Law::gaussian(0.0, eps * eps);
            let chi2 = chi2_convolved(&g, &nu).unwrap().value;
            assert!(chi2 <= moment_matching_bound(q, eps), "q={q} ε={eps}: {chi2}");
        }
    }
}

#[test]
fn moment_matched_examples() {
    let one = build_moment_matched(1).unwrap();
    assert_eq!(one.moment(1), 0.0);
    let three = build_moment_matched(3).unwrap();
    let mut atoms = three.atoms.clone();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(atoms.len(), 2);
    assert!((atoms[0].0 + 1.0).abs() < 1e-12 && (atoms[1].0 - 1.0).abs() < 1e-12);
    assert!((atoms[0].1 - 0.5).abs() < 1e-12);
    let five = build_moment_matched(5).unwrap();
    assert_eq!(five.atoms.len(), 3);
    for k in 1..=5 {
        let m: f64 = five.atoms.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
        assert!((m - common::normal_moment(k)).abs() < 1e-9, "k={k}: {m}");
    }
}

#[test]
fn tensorize_examples() {
    assert_eq!(chi2_tensorize(&[0.0; 5]).unwrap(), 0.0);
    assert!((chi2_tensorize(&[0.1, 0.1]).unwrap() - 0.21).abs() < 1e-15);
    let (n, v) = (1000, 1e-6);
    let total = chi2_tensorize(&vec![v; n]).unwrap();
    assert!(((total - n as f64 * v) / (n as f64 * v)).abs() < v * n as f64);
    assert!(chi2_tensorize(&[0.1, -0.1]).is_err());
}

#[test]
fn identical_hypotheses_have_unit_risk() {
    let r = risk_floor_estimate(&Construction::SpikyTwoPoint { beta: 0.3, c: 0.5 }, 64, 200, 9).unwrap();
    assert_eq!(r.bound_risk, 1.0);
    assert_eq!(r.mc_risk, 1.0);
}

#[test]
fn rademacher_risk_is_not_below_the_bound() {
    let r = risk_floor_estimate(&Construction::RademacherTwoPoint { c: 0.5 }, 256, 1000, 21).unwrap();
    assert!(r.mc_risk >= r.bound_risk - 3.0 * r.mc_stderr, "{r:?}");
}

#[test]
fn nuisance_risk_grows_as_c_shrinks() {
    let reports: Vec<_> = [0.5, 0.1, 0.02]
        .iter()
        .map(|&c| {
            let cons = Construction::NuisanceMean { alpha: 0.2, beta: 0.3, c, q: None };
            risk_floor_estimate(&cons, 128, 1000, 5).unwrap()
        })
        .collect();
    for w in reports.windows(2) {
        assert!(w[1].bound_risk > w[0].bound_risk, "{:?}", reports);
    }
    for r in &reports {
        assert!(r.mc_risk >= r.bound_risk - 3.0 * r.mc_stderr, "{r:?}");
    }
    assert!(reports[2].bound_risk > 0.999);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn chi2_vanishes_on_equal_laws_and_ignores_common_shifts(
        w in 0.1f64..0.9, m1 in -1.0f64..1.0, v1 in 0.0f64..0.5, v2 in 0.0f64..0.5, shift in -5.0f64..5.0,
    ) {
        let nu1 = mixture(&[(w, m1, v1), (1.0 - w, -m1 * w / (1.0 - w), v2)]);
        let nu0 = Law::gaussian(0.0, 0.3);
        prop_assert_eq!(chi2_convolved(&nu1, &nu1).unwrap().value, 0.0);
        let base = chi2_convolved(&nu0, &nu1).unwrap().value;
        prop_assert!(base > 0.0);
        let moved = chi2_convolved(&nu0.affine(1.0, shift), &nu1.affine(1.0, shift)).unwrap().value;
        prop_assert!((moved - base).abs() <= 1e-8 * base.max(1e-12), "{} vs {}", moved, base);
    }
}
