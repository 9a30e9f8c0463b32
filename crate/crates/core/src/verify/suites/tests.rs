use super::*;

fn small() -> SuiteConfig {
    SuiteConfig {
        samples: 100_000,
        hardy_samples: 8_000,
        points: 60,
        corpus_size: 6,
        ..SuiteConfig::default()
    }
}

fn assert_all_pass(r: &VerificationReport) {
    let failed: Vec<_> = r.failed_checks().collect();
    assert!(failed.is_empty(), "{}: {failed:#?}", r.suite);
    assert!(r.passed);
}

#[test]
fn lemma1_passes_on_heisenberg_and_quaternionic() {
    assert_all_pass(&verify_lemma1(&small()).unwrap());
    let cfg = SuiteConfig {
        group: "quaternionic:1".into(),
        k: 2.0,
        ..small()
    };
    let r = verify_lemma1(&cfg).unwrap();
    assert_all_pass(&r);
    assert!(r.notes.iter().any(|n| n.contains("relaxed")));
}

#[test]
fn lemma1_rejects_small_k() {
    let cfg = SuiteConfig { k: 0.5, ..small() };
    assert!(matches!(verify_lemma1(&cfg), Err(Error::KBelowOne(_))));
}

#[test]
fn fundamental_solution_passes() {
    let cfg = SuiteConfig {
        samples: 1_000_000,
        ..small()
    };
    let r = verify_fundamental_solution(&cfg).unwrap();
    assert_all_pass(&r);
    // Q = 4, p = 2: the target is -2π
    let c = r.check("fundamental.psi_integral").unwrap();
    assert!((c.target + 2.0 * std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn fundamental_solution_log_branch() {
    let cfg = SuiteConfig {
        p: 4.0,
        points: 30,
        samples: 1_000_000,
        ..small()
    };
    let r = verify_fundamental_solution(&cfg).unwrap();
    assert_all_pass(&r);
    assert!(r.check("fundamental.harmonicity").unwrap().note.contains("log"));
}

#[test]
fn moments_pass_and_include_beta() {
    let cfg = SuiteConfig { beta: 0.5, ..small() };
    let r = verify_moments(&cfg).unwrap();
    assert_all_pass(&r);
    assert_eq!(r.checks.iter().filter(|c| c.id.starts_with("moments.ball")).count(), 4);
}

#[test]
fn radial_suite_passes() {
    assert_all_pass(&verify_radial(&small()).unwrap());
}

#[test]
fn hardy_suite_passes_and_skips_out_of_range() {
    let cfg = SuiteConfig {
        corpus_size: 4,
        hardy_samples: 4000,
        ..small()
    };
    let r = verify_hardy(&cfg).unwrap();
    assert_all_pass(&r);
    // p = 3, α = -1 has p = Q + α on heisenberg:1
    assert!(r.notes.iter().any(|n| n.contains("p = 3, alpha = -1 skipped")));
    assert_eq!(r.checks.len(), 9);
}

#[test]
fn sharpness_secondary_checks_pass() {
    let cfg = SuiteConfig {
        hardy_samples: 5000,
        j_max: 8,
        ..small()
    };
    let r = verify_sharpness(&cfg).unwrap();
    for id in [
        "sharpness.monotone",
        "sharpness.above_constant",
        "sharpness.radial_agreement",
        "sharpness.slope",
        "sharpness.cutoff_derivative",
    ] {
        assert!(r.check(id).unwrap().passed, "{id}: {:?}", r.check(id));
    }
    assert!(r.check("sharpness.slope").unwrap().note.contains("matches (2k-1)p"));
}

#[test]
fn lemma2_passes() {
    assert_all_pass(&verify_lemma2(&small()).unwrap());
    let cfg = SuiteConfig {
        p: 3.0,
        alpha: 1.0,
        ..small()
    };
    assert_all_pass(&verify_lemma2(&cfg).unwrap());
}

#[test]
fn uncertainty_passes_and_checks_range() {
    assert_all_pass(&verify_uncertainty(&small()).unwrap());
    let cfg = SuiteConfig { p: 5.0, ..small() };
    assert!(matches!(verify_uncertainty(&cfg), Err(Error::UncertaintyRange { .. })));
}

#[test]
fn suites_are_deterministic() {
    let cfg = SuiteConfig {
        points: 20,
        samples: 20_000,
        corpus_size: 2,
        hardy_samples: 2000,
        ..small()
    };
    for name in ["lemma1", "moments", "hardy", "uncertainty"] {
        let a = run_suite(name, &cfg).unwrap();
        let b = run_suite(name, &cfg).unwrap();
        assert!(a.same_results(&b), "{name}");
    }
    assert!(run_suite("nope", &cfg).is_err());
}

#[test]
fn agreement_rule() {
    assert!(agreement(&[0.1, -2.9, 1.0], 3.0));
    assert!(!agreement(&[0.1, 3.1], 3.0));
    let mut zs = vec![0.0; 199];
    zs.push(4.0);
    assert!(agreement(&zs, 3.0));
    zs.push(-5.5);
    assert!(!agreement(&zs, 3.0));
}
