use discenv::discs::GoodFamily;
use discenv::domain::DomainSpec;
use discenv::extremal::{closed_form_v, ebj_field, lempert_v, ClosedForm, Siciak, SiciakVariety, TwoStageConfig};
use discenv::numerics::OptimizerConfig;
use discenv::singular::CurveModel;
use discenv::C64;
use proptest::prelude::*;

fn opt() -> OptimizerConfig {
    OptimizerConfig { restarts: 1, max_evals: 100, ..OptimizerConfig::default() }
}

fn small_two_stage() -> TwoStageConfig {
    TwoStageConfig {
        outer_degree: 1,
        outer: OptimizerConfig { restarts: 0, max_evals: 40, ..OptimizerConfig::default() },
        inner: OptimizerConfig { restarts: 0, max_evals: 40, ..OptimizerConfig::default() },
        samples: 16,
        memo_step: 1e-2,
        ..TwoStageConfig::default()
    }
}

fn disc_v(radius: f64, z: C64) -> f64 {
    let dom = DomainSpec::disc(C64::new(0.0, 0.0), radius);
    let fam = GoodFamily::new(dom.clone(), 2, 2).unwrap().with_boundary_samples(128);
    lempert_v(&dom, &[z], &fam, &opt()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn lempert_disc_matches_closed_form(r in 0.1f64..4.0, t in 0.0f64..6.283) {
        let z = C64::from_polar(r, t);
        let v = disc_v(1.0, z);
        let exact = closed_form_v(&ClosedForm::Disc { radius: 1.0 }, &[z]).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!((v - exact).abs() < 1e-4, "V = {v}, exact = {exact}");
    }

    #[test]
    fn larger_domain_has_smaller_v(r in 0.1f64..4.0, t in 0.0f64..6.283) {
        let z = C64::from_polar(r, t);
        prop_assert!(disc_v(2.0, z) <= disc_v(1.0, z) + 1e-9);
    }

    #[test]
    fn ball_v_is_nonnegative(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0) {
        let dom = DomainSpec::unit_ball(2);
        let fam = GoodFamily::new(dom.clone(), 2, 2).unwrap().with_boundary_samples(128);
        let z = [C64::new(a, b), C64::new(c, d)];
        prop_assert!(lempert_v(&dom, &z, &fam, &opt()).unwrap().value >= 0.0);
    }
}

#[test]
fn two_stage_below_single_stage_and_near_lempert() {
    let dom = DomainSpec::disc(C64::new(0.0, 0.0), 1.0);
    let fam = GoodFamily::new(dom.clone(), 2, 2).unwrap().with_boundary_samples(64);
    let s = Siciak::new(fam.clone(), small_two_stage()).unwrap();
    for z in [C64::new(2.0, 0.0), C64::new(0.0, -1.5), C64::new(0.3, 0.2)] {
        let two = s.value(&[z]).unwrap().value;
        let ebj = ebj_field(&fam, &[z], &opt()).unwrap();
        let lem = lempert_v(&dom, &[z], &fam, &opt()).unwrap().value;
        assert!(two <= ebj + 1e-9, "two-stage {two} above E_B J {ebj}");
        assert!((two - lem).abs() < 5e-2, "two-stage {two} vs Lempert {lem}");
    }
}

#[test]
fn psi_majorizes_variety_v() {
    let dom = DomainSpec::disc(C64::new(0.0, 0.0), 1.0);
    let fam = GoodFamily::new(dom, 2, 2).unwrap().with_boundary_samples(64);
    let sv = SiciakVariety::new(CurveModel::cusp(), fam, small_two_stage()).unwrap();
    for t in [C64::new(1.6, 0.0), C64::new(0.5, 0.3)] {
        let x = CurveModel::cusp().eval(t);
        let v = sv.value(&x).unwrap().value;
        let psi = sv.psi(&x).unwrap();
        assert!(v >= 0.0);
        assert!(v <= psi + 1e-9, "V {v} above Psi {psi}");
    }
}
