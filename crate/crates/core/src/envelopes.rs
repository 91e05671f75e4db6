//! Disc envelopes `E H(x) = inf { H(f) : f(0) = x }` over finite
//! families, with the Poisson and two-stage specializations and numeric
//! probes (upper semicontinuity, sub-mean values, Lelong numbers).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discs::{Disc, DiscFamily, PolyDisc};
use crate::error::{Error, Result};
use crate::functionals::{
    DiscFunctional, KFunctional, Lelong, Negated, Poisson, ScalarField, WeightField,
};
use crate::numerics::{circle_mean, minimize_with_starts, OptimizerConfig};
use crate::par;
use crate::serde_ext::fmt_ext;

/// Objective value of a disc whose boundary leaves the admissible set is
/// `PENALTY_BASE + violation`; any best value at or above it means no
/// admissible disc was found.
pub const PENALTY_BASE: f64 = 1e3;
/// Lattice spacing of the two-stage memo cache.
pub const MEMO_STEP: f64 = 1e-3;
pub const ENVELOPE_TOL: f64 = 5e-2;
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    #[serde(with = "crate::serde_ext::ext")]
    pub value: f64,
    pub best_params: Vec<f64>,
    pub best_disc: Option<Disc>,
    pub evals: usize,
    pub converged: bool,
}

impl EnvelopeResult {
    fn exact(value: f64, params: Vec<f64>, disc: Disc) -> Self {
        Self {
            value,
            best_params: params,
            best_disc: Some(disc),
            evals: 0,
            converged: true,
        }
    }
}

fn check_center(family: &dyn DiscFamily, x: &[C64]) -> Result<()> {
    if x.len() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            got: x.len(),
        });
    }
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::Invalid("center must be finite".into()));
    }
    Ok(())
}

/// Penalized objective shared by all envelopes.
pub fn penalized(h: &dyn DiscFunctional, family: &dyn DiscFamily, x: &[C64], params: &[f64]) -> f64 {
    let disc = family.build(x, params);
    let viol = family.violation(&disc);
    if viol > 0.0 {
        return PENALTY_BASE + viol;
    }
    h.eval(&disc).unwrap_or(f64::INFINITY)
}

/// Envelope of `h` over `family` at `x`.
pub fn envelope(h: &dyn DiscFunctional, family: &dyn DiscFamily, x: &[C64], cfg: &OptimizerConfig) -> Result<EnvelopeResult> {
    envelope_with_starts(h, family, x, cfg, &[])
}

/// As [`envelope`], with extra starting parameters tried after the
/// family's constant disc and seeds (warm starts).
pub fn envelope_with_starts(
    h: &dyn DiscFunctional,
    family: &dyn DiscFamily,
    x: &[C64],
    cfg: &OptimizerConfig,
    extra: &[Vec<f64>],
) -> Result<EnvelopeResult> {
    check_center(family, x)?;
    let mut starts = Vec::new();
    starts.extend(family.constant_params());
    starts.extend(family.seeds(x));
    starts.extend(extra.iter().cloned());
    let mut c = cfg.with_bounds(family.bounds(x));
    if let Some(lb) = h.lower_bound() {
        c = c.with_lower_bound(lb);
    }
    let objective = |p: &[f64]| penalized(h, family, x, p);
    let m = minimize_with_starts(&objective, &c, &starts)?;
    if m.value >= PENALTY_BASE {
        return Err(Error::InfeasibleFamily);
    }
    let disc = family.build(x, &m.params);
    Ok(EnvelopeResult {
        value: m.value,
        best_params: m.params,
        best_disc: Some(disc),
        evals: m.evals,
        converged: m.converged,
    })
}

/// Poisson envelope of `u`.
pub fn poisson_envelope<U: ScalarField>(
    u: U,
    family: &dyn DiscFamily,
    x: &[C64],
    cfg: &OptimizerConfig,
    samples: usize,
) -> Result<EnvelopeResult> {
    envelope(&Poisson { u, samples }, family, x, cfg)
}

/// Envelope of the Riesz functional. The center value `u(x)` is the same
/// for every disc in the search, so only `P_{-u}` is minimized and the
/// result is `u(x) + EP_{-u}(x)`.
pub fn riesz_envelope<U: ScalarField>(
    u: U,
    family: &dyn DiscFamily,
    x: &[C64],
    cfg: &OptimizerConfig,
    samples: usize,
) -> Result<EnvelopeResult> {
    check_center(family, x)?;
    let ux = u.eval(x);
    if ux == f64::NEG_INFINITY {
        if let Some(p) = family.constant_params() {
            let d = family.build(x, &p);
            return Ok(EnvelopeResult::exact(f64::NEG_INFINITY, p, d));
        }
    }
    let mut r = poisson_envelope(Negated(u), family, x, cfg, samples)?;
    r.value += ux;
    Ok(r)
}

/// Point-evaluable field cached on a lattice of spacing `step`: a point is
/// snapped to the nearest lattice node and the field is computed there.
/// Values are deterministic, so concurrent inserts of the same key are
/// harmless (last write wins).
pub struct MemoField<F> {
    inner: F,
    step: f64,
    cache: RwLock<HashMap<Vec<i64>, f64>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<F: ScalarField> MemoField<F> {
    pub fn new(inner: F, step: f64) -> Self {
        Self {
            inner,
            step,
            cache: RwLock::new(HashMap::new()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    /// Unsnapped, uncached evaluation.
    pub fn eval_exact(&self, z: &[C64]) -> f64 {
        self.inner.eval(z)
    }

    pub fn stats(&self) -> (usize, usize) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    pub fn len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn key(&self, z: &[C64]) -> Option<Vec<i64>> {
        let mut k = Vec::with_capacity(2 * z.len());
        for w in z {
            for v in [w.re, w.im] {
                let s = (v / self.step).round();
                if !s.is_finite() || s.abs() > 1e15 {
                    return None;
                }
                k.push(s as i64);
            }
        }
        Some(k)
    }
}

impl<F: ScalarField> ScalarField for MemoField<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, z: &[C64]) -> f64 {
        let Some(key) = self.key(z) else {
            return self.inner.eval(z);
        };
        if let Some(&v) = self.cache.read().unwrap().get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return v;
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let snapped: Vec<C64> = key
            .chunks(2)
            .map(|p| C64::new(p[0] as f64 * self.step, p[1] as f64 * self.step))
            .collect();
        let v = self.inner.eval(&snapped);
        self.cache.write().unwrap().insert(key, v);
        v
    }

    fn usc(&self) -> bool {
        self.inner.usc()
    }
    fn lower_bound(&self) -> Option<f64> {
        self.inner.lower_bound()
    }
}

/// Poisson envelope of an inner envelope field evaluated on demand through
/// a [`MemoField`]. The constant disc is scored with the exact inner value
/// at `x`, so the result never exceeds `inner(x)`.
pub fn two_stage_envelope<F: ScalarField>(
    inner: &MemoField<F>,
    family: &dyn DiscFamily,
    x: &[C64],
    cfg: &OptimizerConfig,
    samples: usize,
) -> Result<EnvelopeResult> {
    check_center(family, x)?;
    let at_x = inner.eval_exact(x);
    if let (Some(lb), Some(p)) = (inner.lower_bound(), family.constant_params()) {
        if at_x <= lb {
            let d = family.build(x, &p);
            return Ok(EnvelopeResult::exact(at_x, p, d));
        }
    }
    let r = poisson_envelope(inner, family, x, cfg, samples)?;
    if at_x <= r.value {
        if let Some(p) = family.constant_params() {
            let d = family.build(x, &p);
            return Ok(EnvelopeResult {
                evals: r.evals,
                converged: r.converged,
                ..EnvelopeResult::exact(at_x, p, d)
            });
        }
    }
    Ok(r)
}

/// Outcome of [`usc_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UscReport {
    #[serde(with = "crate::serde_ext::ext")]
    pub value: f64,
    #[serde(with = "crate::serde_ext::ext")]
    pub limsup: f64,
    #[serde(with = "crate::serde_ext::ext")]
    pub gap: f64,
    pub usc_ok: bool,
    /// Largest sample per shell, in the order of the radii.
    pub shell_max: Vec<f64>,
}

pub const USC_TOL: f64 = 5e-2;

/// Decide upper semicontinuity from a value at a point and sampled shells
/// around it (ordered by decreasing radius). The limsup estimate is the
/// largest sample on the two innermost shells.
pub fn usc_from_shells(value: f64, shells: &[Vec<f64>], tol: f64) -> UscReport {
    let shell_max: Vec<f64> = shells
        .iter()
        .map(|s| s.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let limsup = shell_max.iter().rev().take(2).copied().fold(f64::NEG_INFINITY, f64::max);
    let gap = if limsup == f64::NEG_INFINITY { 0.0 } else { limsup - value };
    UscReport {
        value,
        limsup,
        gap,
        usc_ok: value >= limsup - tol,
        shell_max,
    }
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n = v.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|w| w / n).collect();
        }
    }
}

/// Points `x + r v` with `|v| = 1`: equally spaced on a circle for
/// `dim = 1`, seeded random directions otherwise.
pub fn sphere_points(x: &[C64], r: f64, samples: usize, seed: u64) -> Vec<Vec<C64>> {
    if x.len() == 1 {
        return (0..samples)
            .map(|j| vec![x[0] + C64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / samples as f64)])
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let v = random_unit(x.len(), &mut rng);
            x.iter().zip(v).map(|(a, b)| a + r * b).collect()
        })
        .collect()
}

/// Upper semicontinuity probe of `field` at `x` on punctured spheres of
/// the given (decreasing) radii.
pub fn usc_probe(field: &(dyn Fn(&[C64]) -> f64 + Sync), x: &[C64], radii: &[f64], samples: usize) -> Result<UscReport> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[0] > w[1])) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Invalid("radii must be positive and strictly decreasing".into()));
    }
    let shells: Vec<Vec<f64>> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let pts = sphere_points(x, r, samples, i as u64);
            par::map(&pts, |p| field(p))
        })
        .collect();
    Ok(usc_from_shells(field(x), &shells, USC_TOL))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PshVerdict {
    /// Smallest `mean - value` over the sampled discs.
    #[serde(with = "crate::serde_ext::ext")]
    pub worst_margin: f64,
    pub ok: bool,
    pub discs: usize,
}

/// Sub-mean-value check of `field` at `x` on `n_discs` random linear discs
/// `x + r v zeta`, `|v| = 1`.
pub fn psh_check(
    field: &(dyn Fn(&[C64]) -> f64 + Sync),
    x: &[C64],
    n_discs: usize,
    radius: f64,
    samples: usize,
    tol: f64,
    seed: u64,
) -> PshVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Vec<C64>> = (0..n_discs).map(|_| random_unit(x.len(), &mut rng)).collect();
    let fx = field(x);
    let margins = par::map(&dirs, |v| {
        let f = PolyDisc::linear(x, &v.iter().map(|w| w * radius).collect::<Vec<_>>());
        let mean = circle_mean(|z| field(&f.eval(z)), samples);
        if fx == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            mean - fx
        }
    });
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    PshVerdict {
        worst_margin: worst,
        ok: worst >= -tol,
        discs: n_discs,
    }
}

/// Lelong number estimate: least-squares slope of `sup_{|z-x|=r} u`
/// against `log r`, clamped at 0; `+inf` when every sample is `-inf`.
pub fn lelong_number(u: &(dyn Fn(&[C64]) -> f64 + Sync), x: &[C64], radii: &[f64], samples: usize) -> f64 {
    let sups: Vec<(f64, f64)> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let pts = sphere_points(x, r, samples, 100 + i as u64);
            let s = pts.iter().map(|p| u(p)).fold(f64::NEG_INFINITY, f64::max);
            (r.ln(), s)
        })
        .filter(|(_, s)| s.is_finite())
        .collect();
    if sups.is_empty() {
        return f64::INFINITY;
    }
    if sups.len() == 1 {
        return 0.0;
    }
    let n = sups.len() as f64;
    let mx = sups.iter().map(|p| p.0).sum::<f64>() / n;
    let my = sups.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = sups.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = sups.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx).max(0.0)
}

/// Configuration of the nested envelope used as the `k_alpha` integrand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub outer: OptimizerConfig,
    pub inner: OptimizerConfig,
    pub samples: usize,
    /// Lattice step of the memoized `k_alpha` field.
    pub memo_step: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            outer: OptimizerConfig {
                restarts: 2,
                max_evals: 120,
                ..OptimizerConfig::default()
            },
            inner: OptimizerConfig {
                restarts: 2,
                max_evals: 150,
                ..OptimizerConfig::default()
            },
            samples: 64,
            memo_step: MEMO_STEP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    #[serde(with = "crate::serde_ext::ext")]
    pub ep_k: f64,
    #[serde(with = "crate::serde_ext::ext")]
    pub el: f64,
    #[serde(with = "crate::serde_ext::ext")]
    pub el_reduced: f64,
    #[serde(with = "crate::serde_ext::ext")]
    pub k_alpha: f64,
    /// `ep_k <= el <= el_reduced <= k_alpha` within the tolerance.
    pub ordered: bool,
    /// Largest amount by which a link of the chain fails (0 when ordered).
    pub worst_violation: f64,
    #[serde(with = "crate::serde_ext::ext")]
    pub spread: f64,
}

/// `k_alpha` as a point field: the K-envelope at each point, computed with
/// `cfg` (deterministic per point).
pub struct KAlphaField<'a> {
    pub alpha: &'a WeightField,
    pub family: &'a dyn DiscFamily,
    pub cfg: OptimizerConfig,
}

impl ScalarField for KAlphaField<'_> {
    fn dim(&self) -> usize {
        self.family.dim()
    }
    fn eval(&self, z: &[C64]) -> f64 {
        let h = KFunctional { alpha: self.alpha.clone() };
        envelope(&h, self.family, z, &self.cfg).map_or(f64::INFINITY, |r| r.value)
    }
}

/// The four quantities `EP_{k_alpha}`, `EL_alpha`, `EL~_alpha`, `k_alpha`
/// at `x`, each minimized over the union of the four best discs.
pub fn chain_check(alpha: &WeightField, family: &dyn DiscFamily, x: &[C64], cc: &ChainConfig) -> Result<ChainReport> {
    alpha.validate()?;
    let kfield = MemoField::new(
        KAlphaField {
            alpha,
            family,
            cfg: cc.inner.clone(),
        },
        cc.memo_step,
    );
    let l = Lelong {
        alpha: alpha.clone(),
        reduced: false,
    };
    let lr = Lelong {
        alpha: alpha.clone(),
        reduced: true,
    };
    let k = KFunctional { alpha: alpha.clone() };
    let pk = Poisson {
        u: &kfield,
        samples: cc.samples,
    };
    let r_k = envelope(&k, family, x, &cc.inner)?;
    let r_l = envelope(&l, family, x, &cc.outer)?;
    let r_lr = envelope(&lr, family, x, &cc.outer)?;
    let r_pk = two_stage_envelope(&kfield, family, x, &cc.outer, cc.samples)?;

    let discs: Vec<Disc> = [&r_pk, &r_l, &r_lr, &r_k]
        .iter()
        .filter_map(|r| r.best_disc.clone())
        .collect();
    let shared_min = |h: &dyn DiscFunctional, own: f64| -> f64 {
        discs
            .iter()
            .filter(|d| family.violation(d) == 0.0)
            .filter_map(|d| h.eval(d).ok())
            .fold(own, f64::min)
    };
    let el = shared_min(&l, r_l.value);
    let el_reduced = shared_min(&lr, r_lr.value);
    let k_alpha = shared_min(&k, r_k.value);
    let ep_k = shared_min(&pk, r_pk.value);

    let links = [(ep_k, el), (el, el_reduced), (el_reduced, k_alpha)];
    let worst_violation = links
        .iter()
        .map(|&(a, b)| if a == b { 0.0 } else { (a - b).max(0.0) })
        .fold(0.0, f64::max);
    let vals = [ep_k, el, el_reduced, k_alpha];
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if hi == lo { 0.0 } else { hi - lo };
    Ok(ChainReport {
        ep_k,
        el,
        el_reduced,
        k_alpha,
        ordered: worst_violation <= IDENTITY_TOL,
        worst_violation,
        spread,
    })
}

/// Axis-aligned box in the real 2-plane of coordinate `coord` through
/// `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub base: Vec<C64>,
    #[serde(default)]
    pub coord: usize,
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.coord >= self.base.len() {
            return Err(Error::Invalid("grid coord out of range".into()));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Invalid("grid resolution must be positive".into()));
        }
        Ok(())
    }

    fn axis(range: (f64, f64), n: usize, i: usize) -> f64 {
        if n == 1 {
            0.5 * (range.0 + range.1)
        } else {
            range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
        }
    }

    /// Row-major points (`im` outer, `re` inner).
    pub fn points(&self) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let mut p = self.base.clone();
                p[self.coord] = C64::new(Self::axis(self.re_range, self.nx, i), Self::axis(self.im_range, self.ny, j));
                out.push(p);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub functional: String,
    pub family: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldGrid {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub meta: GridMeta,
}

impl FieldGrid {
    /// Evaluate `f` at every grid point (parallel over points).
    pub fn compute(grid: GridSpec, meta: GridMeta, f: impl Fn(&[C64]) -> f64 + Sync + Send) -> Result<Self> {
        grid.validate()?;
        let pts = grid.points();
        let values = par::map(&pts, |p| f(p));
        Ok(Self { grid, values, meta })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,value\n");
        for (p, v) in self.grid.points().iter().zip(&self.values) {
            let z = p[self.grid.coord];
            s.push_str(&format!("{},{},{}\n", z.re, z.im, fmt_ext(*v)));
        }
        s
    }

    /// JSON sidecar with geometry and metadata.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "grid": self.grid,
            "count": self.values.len(),
            "functional": self.meta.functional,
            "family": self.meta.family,
            "seed": self.meta.seed,
        })
    }
}
