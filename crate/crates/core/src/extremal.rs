//! Siciak–Zaharyuta extremal functions: the one-stage J formula for convex
//! domains, the inner field `E_B J`, the two-stage Poisson formula, closed
//! forms, and the variety version on curve models.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::discs::{Disc, GoodFamily, PolyFamily};
use crate::domain::DomainSpec;
use crate::envelopes::{
    envelope, sphere_points, two_stage_envelope, EnvelopeResult, MemoField, MEMO_STEP,
};
use crate::error::{Error, Result};
use crate::functionals::{green_sum, DiscFunctional, JFunctional, ScalarField};
use crate::numerics::OptimizerConfig;
use crate::par;
use crate::singular::{CurveModel, NORMALIZE_TOL};

pub const LELONG_CLASS_STABLE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LelongClassReport {
    /// `sup_{|z| = r} field(z) - log r` per radius.
    pub shell_constants: Vec<f64>,
    /// Running supremum of the shell constants (the estimate of `C`).
    pub constant: f64,
    pub bounded: bool,
}

/// Growth probe `field(z) <= log|z| + C` on spheres of increasing radii
/// (all `>= 2`).
pub fn lelong_class_probe(
    field: &(dyn Fn(&[C64]) -> f64 + Sync),
    dim: usize,
    radii: &[f64],
    samples: usize,
) -> Result<LelongClassReport> {
    if radii.len() < 2 || radii.iter().any(|r| *r < 2.0) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("radii must be increasing, at least two, all >= 2".into()));
    }
    let origin = vec![C64::new(0.0, 0.0); dim];
    let shell_constants: Vec<f64> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let pts = sphere_points(&origin, r, samples, 1000 + i as u64);
            let vals = par::map(&pts, |p| field(p));
            vals.into_iter().fold(f64::NEG_INFINITY, f64::max) - r.ln()
        })
        .collect();
    let mut running = Vec::with_capacity(shell_constants.len());
    let mut m = f64::NEG_INFINITY;
    for &c in &shell_constants {
        m = m.max(c);
        running.push(m);
    }
    let n = running.len();
    let bounded = (running[n - 1] - running[n - 2]).abs() < LELONG_CLASS_STABLE;
    Ok(LelongClassReport {
        shell_constants,
        constant: m,
        bounded,
    })
}

fn check_family_domain(family: &GoodFamily, omega: &DomainSpec) -> Result<()> {
    if &family.domain != omega {
        return Err(Error::Invalid("family is not built for this domain".into()));
    }
    Ok(())
}

/// `V_Omega(z)` as the infimum of `J` over projective discs with boundary
/// in a convex `Omega`. No admissible disc gives `+inf` (not an error).
pub fn lempert_v(omega: &DomainSpec, z: &[C64], family: &GoodFamily, cfg: &OptimizerConfig) -> Result<EnvelopeResult> {
    omega.validate()?;
    if !omega.is_convex() {
        return Err(Error::NotConvex);
    }
    check_family_domain(family, omega)?;
    match envelope(&JFunctional, family, z, cfg) {
        Err(Error::InfeasibleFamily) => Ok(EnvelopeResult {
            value: f64::INFINITY,
            best_params: Vec::new(),
            best_disc: None,
            evals: 0,
            converged: false,
        }),
        other => other,
    }
}

/// `E_B J(z)` for a good family `B`.
pub fn ebj_field(family: &GoodFamily, z: &[C64], cfg: &OptimizerConfig) -> Result<f64> {
    Ok(envelope(&JFunctional, family, z, cfg)?.value)
}

/// [`ebj_field`] as a point field; failures evaluate to `+inf`.
pub struct EbjField {
    pub family: GoodFamily,
    pub cfg: OptimizerConfig,
}

impl ScalarField for EbjField {
    fn dim(&self) -> usize {
        self.family.domain.dim
    }
    fn eval(&self, z: &[C64]) -> f64 {
        ebj_field(&self.family, z, &self.cfg).unwrap_or(f64::INFINITY)
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Settings of the two-stage formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoStageConfig {
    /// Degree of the outer affine polynomial discs.
    pub outer_degree: usize,
    pub outer_coeff_bound: f64,
    pub outer: OptimizerConfig,
    pub inner: OptimizerConfig,
    /// Quadrature nodes for the outer Poisson integral.
    pub samples: usize,
    pub memo_step: f64,
}

impl Default for TwoStageConfig {
    fn default() -> Self {
        Self {
            outer_degree: 2,
            outer_coeff_bound: 2.0,
            outer: OptimizerConfig {
                restarts: 2,
                max_evals: 150,
                ..OptimizerConfig::default()
            },
            inner: OptimizerConfig {
                restarts: 0,
                max_evals: 60,
                ..OptimizerConfig::default()
            },
            samples: 32,
            memo_step: MEMO_STEP,
        }
    }
}

impl TwoStageConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_degree == 0 || self.outer_degree > 8 {
            return Err(Error::Invalid("outer_degree must lie in 1..=8".into()));
        }
        if self.samples < 8 {
            return Err(Error::Invalid("samples must be at least 8".into()));
        }
        if !(self.memo_step > 0.0) {
            return Err(Error::Invalid("memo_step must be positive".into()));
        }
        self.outer.validate()?;
        self.inner.validate()
    }
}

/// Two-stage solver for one domain; the memoized inner field is shared by
/// all evaluation points.
pub struct Siciak {
    pub memo: MemoField<EbjField>,
    pub outer_family: PolyFamily,
    pub cfg: TwoStageConfig,
}

impl Siciak {
    pub fn new(family: GoodFamily, cfg: TwoStageConfig) -> Result<Self> {
        family.validate()?;
        cfg.validate()?;
        let outer_family = PolyFamily::new(family.domain.dim, cfg.outer_degree, cfg.outer_coeff_bound);
        Ok(Self {
            memo: MemoField::new(
                EbjField {
                    family,
                    cfg: cfg.inner.clone(),
                },
                cfg.memo_step,
            ),
            outer_family,
            cfg,
        })
    }

    pub fn value(&self, z: &[C64]) -> Result<EnvelopeResult> {
        two_stage_envelope(&self.memo, &self.outer_family, z, &self.cfg.outer, self.cfg.samples)
    }

    /// Unsnapped inner value.
    pub fn inner(&self, z: &[C64]) -> f64 {
        self.memo.eval_exact(z)
    }
}

/// `V_Omega(z)` by the two-stage formula.
pub fn siciak_v(family: &GoodFamily, z: &[C64], cfg: &TwoStageConfig) -> Result<EnvelopeResult> {
    Siciak::new(family.clone(), cfg.clone())?.value(z)
}

/// `-G` at the center for the push-forward `model o g` of a
/// parameter-plane disc: the divisor at infinity of `g` pulled back with
/// weight `degree_at_infinity`.
pub struct PsiFunctional {
    pub degree_at_infinity: usize,
}

impl DiscFunctional for PsiFunctional {
    fn name(&self) -> String {
        "psi".into()
    }
    fn eval(&self, disc: &Disc) -> Result<f64> {
        let d = disc.to_projective().infinity_divisor()?;
        let w = vec![self.degree_at_infinity as f64; d.points.len()];
        Ok(-green_sum(&d, &w, C64::new(0.0, 0.0)))
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `Psi_B(x)` on a curve model: infimum over the parameter-plane good
/// family and over the preimages of `x`.
pub fn psi_field(model: &CurveModel, family: &GoodFamily, x: &[C64], cfg: &OptimizerConfig) -> Result<f64> {
    let ts = model.normalize_point(x, NORMALIZE_TOL)?;
    let mut best = f64::INFINITY;
    for t in ts {
        best = best.min(psi_at_parameter(model, family, t, cfg)?);
    }
    Ok(best)
}

fn psi_at_parameter(model: &CurveModel, family: &GoodFamily, t: C64, cfg: &OptimizerConfig) -> Result<f64> {
    let h = PsiFunctional {
        degree_at_infinity: model.degree_at_infinity,
    };
    Ok(envelope(&h, family, &[t], cfg)?.value)
}

/// `Psi_B o model` on the parameter plane.
pub struct PsiPullback {
    pub model: CurveModel,
    pub family: GoodFamily,
    pub cfg: OptimizerConfig,
}

impl ScalarField for PsiPullback {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, t: &[C64]) -> f64 {
        psi_at_parameter(&self.model, &self.family, t[0], &self.cfg).unwrap_or(f64::INFINITY)
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Two-stage solver on a curve model; outer discs are push-forwards of
/// parameter-plane polynomial discs, so the Poisson integral of `Psi_B`
/// along them is computed on the parameter plane.
pub struct SiciakVariety {
    pub model: CurveModel,
    pub memo: MemoField<PsiPullback>,
    pub outer_family: PolyFamily,
    pub cfg: TwoStageConfig,
}

impl SiciakVariety {
    pub fn new(model: CurveModel, family: GoodFamily, cfg: TwoStageConfig) -> Result<Self> {
        family.validate()?;
        cfg.validate()?;
        if family.domain.dim != 1 {
            return Err(Error::Invalid("the parameter family must be one-dimensional".into()));
        }
        let outer_family = PolyFamily::new(1, cfg.outer_degree, cfg.outer_coeff_bound);
        Ok(Self {
            memo: MemoField::new(
                PsiPullback {
                    model: model.clone(),
                    family,
                    cfg: cfg.inner.clone(),
                },
                cfg.memo_step,
            ),
            model,
            outer_family,
            cfg,
        })
    }

    pub fn value(&self, x: &[C64]) -> Result<EnvelopeResult> {
        let ts = self.model.normalize_point(x, NORMALIZE_TOL)?;
        let mut best: Option<EnvelopeResult> = None;
        for t in ts {
            let r = two_stage_envelope(&self.memo, &self.outer_family, &[t], &self.cfg.outer, self.cfg.samples)?;
            if best.as_ref().is_none_or(|b| r.value < b.value) {
                best = Some(r);
            }
        }
        Ok(best.unwrap())
    }

    pub fn psi(&self, x: &[C64]) -> Result<f64> {
        psi_field(&self.model, &self.memo.inner().family, x, &self.cfg.inner)
    }
}

/// `V_{Omega, X}(x)` on a curve model, `Omega` the image of the parameter
/// domain of `family`.
pub fn siciak_v_variety(model: &CurveModel, family: &GoodFamily, x: &[C64], cfg: &TwoStageConfig) -> Result<EnvelopeResult> {
    SiciakVariety::new(model.clone(), family.clone(), cfg.clone())?.value(x)
}

/// Reference formulas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClosedForm {
    /// `log+ (|z| / radius)` in `C`.
    Disc { radius: f64 },
    /// `log+ |z|` for the unit ball.
    Ball,
    /// `max_j log+ |z_j|` for the unit polydisc.
    Polydisc,
    /// `degree_at_infinity * log+ |t(x)|` on the cusp model over the unit
    /// parameter disc.
    CuspModel,
}

fn log_plus(r: f64) -> f64 {
    r.ln().max(0.0)
}

impl ClosedForm {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "disc" => Ok(ClosedForm::Disc { radius: 1.0 }),
            "ball" => Ok(ClosedForm::Ball),
            "polydisc" => Ok(ClosedForm::Polydisc),
            "cusp-model" => Ok(ClosedForm::CuspModel),
            other => Err(Error::Invalid(format!("unknown closed form `{other}`"))),
        }
    }
}

pub fn closed_form_v(form: &ClosedForm, z: &[C64]) -> Result<f64> {
    match form {
        ClosedForm::Disc { radius } => {
            if z.len() != 1 {
                return Err(Error::DimensionMismatch { expected: 1, got: z.len() });
            }
            Ok(log_plus(z[0].norm() / radius))
        }
        ClosedForm::Ball => Ok(log_plus(z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt())),
        ClosedForm::Polydisc => Ok(z.iter().map(|w| log_plus(w.norm())).fold(0.0, f64::max)),
        ClosedForm::CuspModel => {
            let m = CurveModel::cusp();
            let t = m.normalize_point(z, NORMALIZE_TOL)?;
            Ok(m.degree_at_infinity as f64 * log_plus(t[0].norm()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 2,
            max_evals: 150,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn lelong_class_examples() {
        let radii = [2.0, 4.0, 8.0, 16.0, 32.0];
        let r = lelong_class_probe(&|z: &[C64]| z[0].norm().ln().max(0.0), 1, &radii, 16).unwrap();
        assert!(r.bounded && r.constant.abs() < 1e-9);
        let r = lelong_class_probe(&|z: &[C64]| 2.0 * z[0].norm().ln(), 1, &radii, 16).unwrap();
        assert!(!r.bounded);
        let r = lelong_class_probe(&|z: &[C64]| z[0].norm().ln() + 3.0, 1, &radii, 16).unwrap();
        assert!(r.bounded && (r.constant - 3.0).abs() < 1e-9);
    }

    #[test]
    fn lempert_inside_and_outside() {
        let om = DomainSpec::unit_ball(2);
        let fam = GoodFamily::new(om.clone(), 2, 2).unwrap();
        assert_eq!(lempert_v(&om, &[c(0.2, 0.1), c(0.0, -0.3)], &fam, &quick()).unwrap().value, 0.0);
        let v = lempert_v(&om, &[c(0.0, 2.0), c(0.0, 0.0)], &fam, &quick()).unwrap().value;
        assert!((v - 2f64.ln()).abs() < 5e-2);
        let pd = DomainSpec::unit_polydisc(2);
        let fam = GoodFamily::new(pd.clone(), 2, 2).unwrap();
        let v = lempert_v(&pd, &[c(3.0, 0.0), c(0.5, 0.0)], &fam, &quick()).unwrap().value;
        assert!((v - 3f64.ln()).abs() < 7e-2, "{v}");
    }

    #[test]
    fn lempert_rejects_nonconvex() {
        let om = DomainSpec::disc(c(-2.0, 0.0), 1.0).union(DomainSpec::disc(c(2.0, 0.0), 1.0)).unwrap();
        let fam = GoodFamily::new(om.clone(), 2, 2).unwrap();
        assert!(matches!(lempert_v(&om, &[c(0.0, 0.0)], &fam, &quick()), Err(Error::NotConvex)));
    }

    #[test]
    fn ebj_examples() {
        let om = DomainSpec::disc(c(-2.0, 0.0), 1.0).union(DomainSpec::disc(c(2.0, 0.0), 1.0)).unwrap();
        let fam = GoodFamily::new(om, 2, 2).unwrap();
        assert_eq!(ebj_field(&fam, &[c(2.3, 0.1)], &quick()).unwrap(), 0.0);
        let d = GoodFamily::new(DomainSpec::unit_ball(1), 2, 2).unwrap();
        assert!((ebj_field(&d, &[c(2.0, 0.0)], &quick()).unwrap() - 2f64.ln()).abs() < 5e-2);
    }

    #[test]
    fn two_stage_in_the_plane() {
        let fam = GoodFamily::new(DomainSpec::unit_ball(1), 1, 1).unwrap().with_boundary_samples(128);
        let s = Siciak::new(fam, TwoStageConfig::default()).unwrap();
        let v = s.value(&[c(2.0, 0.0)]).unwrap().value;
        assert!((v - 2f64.ln()).abs() < 5e-2, "{v}");
        assert_eq!(s.value(&[c(0.5, 0.0)]).unwrap().value, 0.0);
    }

    #[test]
    fn closed_forms() {
        assert!((closed_form_v(&ClosedForm::Disc { radius: 1.0 }, &[c(2.0, 0.0)]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(closed_form_v(&ClosedForm::Ball, &[c(0.5, 0.0), c(0.0, 0.5)]).unwrap(), 0.0);
        assert!((closed_form_v(&ClosedForm::Polydisc, &[c(3.0, 0.0), c(0.5, 0.0)]).unwrap() - 3f64.ln()).abs() < 1e-15);
        let x = CurveModel::cusp().eval(c(0.0, 2.0));
        assert!((closed_form_v(&ClosedForm::CuspModel, &x).unwrap() - 3.0 * 2f64.ln()).abs() < 1e-12);
        assert!(ClosedForm::by_name("annulus").is_err());
    }

    #[test]
    fn polydisc_closed_form_dominates_slice_competitors() {
        // Each coordinate slice log+|z_j| is a competitor; the closed form is
        // their maximum.
        let z = [c(3.0, 0.0), c(0.5, 0.0)];
        let slices = [log_plus(z[0].norm()), log_plus(z[1].norm())];
        let v = closed_form_v(&ClosedForm::Polydisc, &z).unwrap();
        assert!(slices.iter().all(|s| *s <= v));
        assert!(slices.iter().any(|s| (*s - v).abs() < 1e-15));
    }

    #[test]
    fn psi_on_the_cusp() {
        let m = CurveModel::cusp();
        let fam = GoodFamily::new(DomainSpec::unit_ball(1), 1, 1).unwrap();
        let x = m.eval(c(0.0, 2.0));
        let p = psi_field(&m, &fam, &x, &quick()).unwrap();
        assert!((p - 3.0 * 2f64.ln()).abs() < 7e-2, "{p}");
        assert_eq!(psi_field(&m, &fam, &m.eval(c(0.3, 0.3)), &quick()).unwrap(), 0.0);
        assert!(psi_field(&m, &fam, &[c(1.0, 0.0), c(3.0, 0.0)], &quick()).is_err());
    }
}
