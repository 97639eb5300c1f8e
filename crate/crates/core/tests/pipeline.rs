//! End-to-end consistency between the one-variable candidates, the
//! two-variable transforms, and the family layer.

use infostab::{
    canonical_family_eval, certify, certify_family, cocycle_defect, eval_f, fit_family_params,
    lift_sym, make_canonical_family, make_exact_log, make_exact_power, perturb, residual_sup,
    Alpha, ApproximantParams, CertStatus, DomainGrid, FamilyParams, FunctionSpec, NoiseKind,
    PerturbationPlan, ProbabilityVector,
};

fn al(v: f64) -> Alpha {
    Alpha::new(v).unwrap()
}

/// (c, d) at degree alpha corresponds to the one-variable candidate with
/// a = c / (2^(1-alpha) - 1) and b = a + d.
fn mapped_coefficients(c: f64, d: f64, e: f64) -> (f64, f64) {
    let a = c / (2f64.powf(1.0 - e) - 1.0);
    (a, a + d)
}

/// The two-component member of a parametric family, evaluated on the
/// section p = (1 - x, x), is the one-variable candidate itself.
#[test]
fn two_component_family_matches_the_one_variable_candidate() {
    let grid = DomainGrid::new(1e-3, 60).unwrap();
    for (c, d, e) in [(3.0, 1.0, -1.0), (1.7, -0.4, -1.5), (-2.0, 0.75, -0.5)] {
        let params = FamilyParams::PowerFamily { c, d };
        let (a, b) = mapped_coefficients(c, d, e);
        let spec = make_exact_power(a, b, al(e)).unwrap();
        for x in grid.xs() {
            let p = ProbabilityVector::new(vec![1.0 - x, x]).unwrap();
            let through_family = canonical_family_eval(&params, al(e), &p).unwrap();
            let direct = eval_f(&spec, al(e), x).unwrap();
            assert!(
                (through_family - direct).abs() <= 1e-12 * (1.0 + direct.abs()),
                "x = {x}: family gives {through_family}, candidate {direct}"
            );
        }
    }
    let params = FamilyParams::LogFamily {
        c: 2.5,
        lambda: -1.2,
    };
    let spec = make_exact_log(-1.2, 2.5);
    for x in grid.xs() {
        let p = ProbabilityVector::new(vec![1.0 - x, x]).unwrap();
        let through_family = canonical_family_eval(&params, al(0.0), &p).unwrap();
        let direct = eval_f(&spec, al(0.0), x).unwrap();
        assert!(
            (through_family - direct).abs() <= 1e-12 * (1.0 + direct.abs()),
            "x = {x}: family gives {through_family}, candidate {direct}"
        );
    }
}

/// Fitting through the two-component section recovers the generating
/// parameters to f64 precision. (Not bit-exactly: family members take
/// f64 probability vectors, so the fit's probe arguments are rounded
/// once on the way in.)
#[test]
fn family_fit_recovers_the_generating_parameters() {
    for (c, d, e) in [(3.0, 1.0, -1.0), (1.7, -0.4, -1.5), (-2.0, 0.75, -0.5)] {
        let params = FamilyParams::PowerFamily { c, d };
        let family = make_canonical_family(params.clone(), al(e), 6).unwrap();
        match fit_family_params(&family, al(e)).unwrap() {
            FamilyParams::PowerFamily { c: fc, d: fd } => {
                assert!((fc - c).abs() <= 1e-12 * (1.0 + c.abs()), "c: {fc} vs {c}");
                assert!((fd - d).abs() <= 1e-12 * (1.0 + d.abs()), "d: {fd} vs {d}");
            }
            other => panic!("power family fitted as {other:?}"),
        }
    }
    let family = make_canonical_family(
        FamilyParams::LogFamily {
            c: 2.5,
            lambda: -1.2,
        },
        al(0.0),
        6,
    )
    .unwrap();
    match fit_family_params(&family, al(0.0)).unwrap() {
        FamilyParams::LogFamily { c: fc, lambda: fl } => {
            assert!((fc - 2.5).abs() <= 1e-12);
            assert!((fl + 1.2).abs() <= 1e-12);
        }
        other => panic!("log family fitted as {other:?}"),
    }
}

/// One generating object, certified through both layers: the family
/// certifier on the branching structure, the candidate certifier on the
/// two-component section. Both must come back clean, with matching
/// parameters under the coefficient map.
#[test]
fn canonical_power_family_certifies_through_both_layers() {
    let (c, d, e) = (3.0, 1.0, -1.0);
    let family = make_canonical_family(FamilyParams::PowerFamily { c, d }, al(e), 5).unwrap();
    let fam_cert = certify_family(&family, al(e), 5, 12, 99, 0.05).unwrap();
    assert!(fam_cert.satisfied);
    assert_eq!(fam_cert.status, CertStatus::Satisfied);
    assert!(fam_cert.failures.is_empty());
    assert!(fam_cert.residuals.semisymmetry <= 1e-12);
    for &(_, r) in &fam_cert.residuals.recursivity {
        assert!(r <= 1e-12);
    }

    let (a, b) = mapped_coefficients(c, d, e);
    let spec = make_exact_power(a, b, al(e)).unwrap();
    let grid = DomainGrid::new(1e-2, 40).unwrap();
    let eps = residual_sup(&spec, al(e), &grid).unwrap();
    let cert = certify(&spec, al(e), &grid, eps).unwrap();
    assert!(cert.satisfied);
    assert_eq!(cert.sup_deviation, 0.0);
    match cert.params {
        ApproximantParams::Power {
            a: pa,
            b: pb,
            c: pc,
        } => {
            assert!((pa - a).abs() <= 1e-14 * (1.0 + a.abs()));
            assert!((pb - b).abs() <= 1e-14 * (1.0 + b.abs()));
            assert!((pc - (b - a)).abs() <= 1e-14 * (1.0 + (b - a).abs()));
        }
        other => panic!("power candidate fitted as {other:?}"),
    }
}

#[test]
fn canonical_log_family_certifies_through_both_layers() {
    let family = make_canonical_family(
        FamilyParams::LogFamily {
            c: 2.5,
            lambda: -1.2,
        },
        al(0.0),
        5,
    )
    .unwrap();
    let fam_cert = certify_family(&family, al(0.0), 5, 12, 99, 0.05).unwrap();
    assert!(fam_cert.satisfied);
    assert_eq!(fam_cert.status, CertStatus::Satisfied);
    assert!(fam_cert.residuals.semisymmetry <= 1e-12);

    let spec = make_exact_log(-1.2, 2.5);
    let grid = DomainGrid::new(1e-2, 40).unwrap();
    let eps = residual_sup(&spec, al(0.0), &grid).unwrap();
    let cert = certify(&spec, al(0.0), &grid, eps).unwrap();
    assert!(cert.satisfied);
    assert_eq!(cert.sup_deviation, 0.0);
    match cert.params {
        ApproximantParams::Log { lambda, .. } => {
            assert!((lambda - (-1.2)).abs() <= 1e-14);
        }
        other => panic!("log candidate fitted as {other:?}"),
    }
}

/// For pointwise-noise candidates the symmetrized-form asymmetry is an
/// exact alternating sum of three cocycle defects. Each piece obeys its
/// per-triple noise bound, and the sum stays under three times the worst
/// noise amplification seen at the three substitution points.
#[test]
fn noisy_asymmetry_decomposes_into_three_cocycle_defects() {
    let delta = 1e-3;
    let cases: Vec<(FunctionSpec, f64)> = vec![
        (
            perturb(
                make_exact_power(2.0, -1.0, al(-1.0)).unwrap(),
                PerturbationPlan::new(delta, 31, NoiseKind::Comb).unwrap(),
            ),
            -1.0,
        ),
        (
            perturb(
                make_exact_log(1.2, 0.3),
                PerturbationPlan::new(delta, 32, NoiseKind::Comb).unwrap(),
            ),
            0.0,
        ),
    ];
    let pairs = [(0.5, 2.0), (1.0, 2.0), (3.0, 0.7), (2.0, 2.0), (5.0, 0.2)];
    let slack = 1.0 + 1e-9;
    for (spec, e) in &cases {
        let a = al(*e);
        for &(u, v) in &pairs {
            let guv = lift_sym(spec, a, u, v).unwrap();
            let gvu = lift_sym(spec, a, v, u).unwrap();
            let asym = guv - gvu;
            let s = u + v + 1.0;
            let c1 = cocycle_defect(spec, a, u, v, 1.0).unwrap();
            let c2 = cocycle_defect(spec, a, v, u, 1.0).unwrap();
            let c3 = cocycle_defect(spec, a, 1.0, u, v).unwrap();

            let scale = 1.0 + guv.abs() + gvu.abs() + c1.abs() + c2.abs() + c3.abs();
            assert!(
                (asym - (c1 - c2 + c3)).abs() <= 1e-12 * scale,
                "chain identity broke at ({u}, {v})"
            );

            let triple =
                |mid: f64, right: f64| delta * (2.0 * s.powf(*e) + mid.powf(*e) + right.powf(*e));
            assert!(c1.abs() <= triple(u + v, u + 1.0) * slack);
            assert!(c2.abs() <= triple(u + v, v + 1.0) * slack);
            assert!(c3.abs() <= triple(1.0 + u, 1.0 + v) * slack);

            let amp = |x: f64, y: f64| 2.0 + (1.0 - x).powf(*e) + (1.0 - y).powf(*e);
            let eps_hat = delta
                * amp(1.0 / s, v / s)
                    .max(amp(1.0 / s, u / s))
                    .max(amp(v / s, u / s));
            assert!(
                asym.abs() <= 3.0 * eps_hat * s.powf(*e) * slack,
                "asymmetry bound broke at ({u}, {v}): |{asym}| vs {}",
                3.0 * eps_hat * s.powf(*e)
            );
        }
    }
}
