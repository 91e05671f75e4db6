//! JSON scenario files: one command with its payload, validated before it
//! runs, and a typed outcome with a JSON summary and CSV tables.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discs::{Disc, DiscFamily, Divisor, DivisorPoint, FamilySpec, GoodFamily};
use crate::domain::DomainSpec;
use crate::envelopes::{
    chain_check, envelope, poisson_envelope, ChainConfig, ChainReport, EnvelopeResult, FieldGrid, GridMeta, GridSpec,
};
use crate::error::Error;
use crate::extremal::{closed_form_v, ebj_field, lempert_v, ClosedForm, Siciak, SiciakVariety, TwoStageConfig};
use crate::functionals::{green, green_sum, DiscFunctional, Functional, Negated, ScalarField, WeightField};
use crate::lemma::{k_threshold_scan, lemma1_check, ArcSet, Lemma1Report, Neighborhood, ThresholdScan};
use crate::numerics::quadrature::circle_mean;
use crate::numerics::{ComplexPoly, OptimizerConfig};
use crate::par;
use crate::serde_ext::{fmt_ext, ExtReal};
use crate::singular::{
    build_counterexample, counterexample_envelope_gap, ep_parameter, CounterexampleConfig, CurveModel, GapReport,
    REFERENCE_CONSTANTS,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Failure before a scenario runs (bad JSON, unknown field, invalid value)
/// or while it runs.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("numeric: {0}")]
    Numeric(Error),
}

impl ScenarioError {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioError::Validation(_) => "validation",
            ScenarioError::Numeric(_) => "numeric",
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Validation(e.to_string())
}

impl From<Error> for ScenarioError {
    fn from(e: Error) -> Self {
        ScenarioError::Numeric(e)
    }
}

pub type ScenarioResult<T> = std::result::Result<T, ScenarioError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Green,
    Functional,
    Envelope,
    Chain,
    Siciak,
    SiciakVariety,
    Counterexample,
    Lemma1,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Green => "green",
            Command::Functional => "functional",
            Command::Envelope => "envelope",
            Command::Chain => "chain",
            Command::Siciak => "siciak",
            Command::SiciakVariety => "siciak-variety",
            Command::Counterexample => "counterexample",
            Command::Lemma1 => "lemma1",
        }
    }
}

/// On-disk layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    pub payload: serde_json::Value,
}

fn default_boundary_samples() -> usize {
    512
}
fn default_submean_points() -> usize {
    50
}
fn default_submean_samples() -> usize {
    256
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenPayload {
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub poles: Vec<C64>,
    /// Defaults to weight 1 per pole.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_boundary_samples")]
    pub boundary_samples: usize,
    #[serde(default = "default_submean_points")]
    pub submean_points: usize,
    #[serde(default = "default_submean_samples")]
    pub submean_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalPayload {
    pub functional: Functional,
    pub disc: Disc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopePayload {
    pub functional: Functional,
    pub family: FamilySpec,
    #[serde(with = "crate::serde_ext::point_list")]
    pub points: Vec<Vec<C64>>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainInstance {
    pub weights: WeightField,
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub center: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainPayload {
    pub family: FamilySpec,
    pub instances: Vec<ChainInstance>,
    #[serde(default)]
    pub chain: ChainConfig,
}

/// Good-family settings; the domain comes from the payload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GoodFamilySettings {
    pub degree: usize,
    pub pole_budget: usize,
    pub boundary_samples: usize,
}

impl Default for GoodFamilySettings {
    fn default() -> Self {
        Self {
            degree: 2,
            pole_budget: 2,
            boundary_samples: 128,
        }
    }
}

impl GoodFamilySettings {
    pub fn build(&self, domain: &DomainSpec) -> crate::Result<GoodFamily> {
        Ok(GoodFamily::new(domain.clone(), self.degree, self.pole_budget)?.with_boundary_samples(self.boundary_samples))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lempert,
    TwoStage,
    Ebj,
}

fn default_methods() -> Vec<Method> {
    vec![Method::Lempert, Method::TwoStage]
}

fn quick_optimizer() -> OptimizerConfig {
    OptimizerConfig {
        restarts: 2,
        max_evals: 150,
        ..OptimizerConfig::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiciakPayload {
    pub domain: DomainSpec,
    #[serde(default)]
    pub family: GoodFamilySettings,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Used by the one-stage formula and by `ebj`.
    #[serde(default = "quick_optimizer")]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub two_stage: TwoStageConfig,
    #[serde(with = "crate::serde_ext::point_list")]
    pub points: Vec<Vec<C64>>,
    #[serde(default)]
    pub closed_form: Option<ClosedForm>,
    /// Grid of the first method.
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiciakVarietyPayload {
    /// `cusp` or `nodal`.
    pub model: String,
    /// Parameter-plane domain; `Omega` is its image.
    pub param_domain: DomainSpec,
    #[serde(default)]
    pub family: GoodFamilySettings,
    #[serde(default)]
    pub two_stage: TwoStageConfig,
    /// Points given by their parameter `t`.
    #[serde(default, with = "crate::serde_ext::complex_vec")]
    pub parameters: Vec<C64>,
    /// Points of the curve in ambient coordinates.
    #[serde(default, with = "crate::serde_ext::point_list")]
    pub points: Vec<Vec<C64>>,
    #[serde(default)]
    pub closed_form: Option<ClosedForm>,
    /// Also evaluate `Psi_B` at each point.
    #[serde(default)]
    pub psi: bool,
}

fn reference_constants() -> [f64; 5] {
    REFERENCE_CONSTANTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexamplePayload {
    /// `(c0, c1, a, b, c)`.
    #[serde(default = "reference_constants")]
    pub constants: [f64; 5],
    #[serde(default)]
    pub config: CounterexampleConfig,
    /// Parameter points where `EP_{-(v+A)}` is compared with `-A`.
    #[serde(default, with = "crate::serde_ext::complex_vec")]
    pub interior_points: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma1Payload {
    pub zeta: ComplexPoly,
    pub arcs: ArcSet,
    #[serde(default)]
    pub neighborhood: Neighborhood,
    pub k: usize,
    pub epsilon: f64,
    /// Optional increasing list of `k` for a threshold scan.
    #[serde(default)]
    pub scan: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Green(GreenPayload),
    Functional(FunctionalPayload),
    Envelope(EnvelopePayload),
    Chain(ChainPayload),
    Siciak(SiciakPayload),
    SiciakVariety(SiciakVarietyPayload),
    Counterexample(CounterexamplePayload),
    Lemma1(Lemma1Payload),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub task: Task,
}

fn parse_payload<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> ScenarioResult<T> {
    serde_json::from_value(v).map_err(|e| invalid(format!("payload: {e}")))
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

fn check_points(points: &[Vec<C64>], dim: usize) -> ScenarioResult<()> {
    for p in points {
        if p.len() != dim {
            return Err(invalid(format!("points: expected dimension {dim}, got {}", p.len())));
        }
        if p.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid("points: coordinates must be finite"));
        }
    }
    Ok(())
}

fn check_grid(grid: &Option<GridSpec>, dim: usize) -> ScenarioResult<()> {
    if let Some(g) = grid {
        g.validate().map_err(|e| invalid(format!("grid: {e}")))?;
        if g.base.len() != dim {
            return Err(invalid(format!("grid: base has dimension {}, expected {dim}", g.base.len())));
        }
    }
    Ok(())
}

fn check_optimizer(name: &str, cfg: &OptimizerConfig) -> ScenarioResult<()> {
    cfg.validate().map_err(|e| invalid(format!("{name}: {e}")))
}

impl Scenario {
    pub fn from_json(text: &str) -> ScenarioResult<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(invalid)?;
        Self::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> ScenarioResult<Self> {
        if file.version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "version: unsupported schema version {} (expected {SCHEMA_VERSION})",
                file.version
            )));
        }
        let task = match file.command {
            Command::Green => Task::Green(parse_payload(file.payload)?),
            Command::Functional => Task::Functional(parse_payload(file.payload)?),
            Command::Envelope => Task::Envelope(parse_payload(file.payload)?),
            Command::Chain => Task::Chain(parse_payload(file.payload)?),
            Command::Siciak => Task::Siciak(parse_payload(file.payload)?),
            Command::SiciakVariety => Task::SiciakVariety(parse_payload(file.payload)?),
            Command::Counterexample => Task::Counterexample(parse_payload(file.payload)?),
            Command::Lemma1 => Task::Lemma1(parse_payload(file.payload)?),
        };
        let s = Scenario { seed: file.seed, task };
        s.validate()?;
        Ok(s)
    }

    pub fn command(&self) -> Command {
        match &self.task {
            Task::Green(_) => Command::Green,
            Task::Functional(_) => Command::Functional,
            Task::Envelope(_) => Command::Envelope,
            Task::Chain(_) => Command::Chain,
            Task::Siciak(_) => Command::Siciak,
            Task::SiciakVariety(_) => Command::SiciakVariety,
            Task::Counterexample(_) => Command::Counterexample,
            Task::Lemma1(_) => Command::Lemma1,
        }
    }

    pub fn to_file(&self) -> ScenarioFile {
        let payload = match &self.task {
            Task::Green(p) => to_value(p),
            Task::Functional(p) => to_value(p),
            Task::Envelope(p) => to_value(p),
            Task::Chain(p) => to_value(p),
            Task::Siciak(p) => to_value(p),
            Task::SiciakVariety(p) => to_value(p),
            Task::Counterexample(p) => to_value(p),
            Task::Lemma1(p) => to_value(p),
        };
        ScenarioFile {
            version: SCHEMA_VERSION,
            command: self.command(),
            seed: self.seed,
            payload,
        }
    }

    pub fn validate(&self) -> ScenarioResult<()> {
        let v = |r: crate::Result<()>, what: &str| r.map_err(|e| invalid(format!("{what}: {e}")));
        match &self.task {
            Task::Green(p) => {
                if p.poles.is_empty() {
                    return Err(invalid("poles: at least one pole is required"));
                }
                if let Some(w) = &p.weights {
                    if w.len() != p.poles.len() {
                        return Err(invalid("weights: one weight per pole"));
                    }
                    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                        return Err(invalid("weights: must be finite and nonnegative"));
                    }
                }
                v(green_divisor(&p.poles).map(|_| ()), "poles")?;
                if p.boundary_samples < 8 || p.submean_samples < 8 {
                    return Err(invalid("boundary_samples: sample counts must be at least 8"));
                }
                check_grid(&p.grid, 1)
            }
            Task::Functional(p) => v(p.functional.validate(), "functional"),
            Task::Envelope(p) => {
                v(p.functional.validate(), "functional")?;
                v(p.family.validate(), "family")?;
                check_optimizer("optimizer", &p.optimizer)?;
                check_points(&p.points, p.family.dim())?;
                check_grid(&p.grid, p.family.dim())
            }
            Task::Chain(p) => {
                v(p.family.validate(), "family")?;
                check_optimizer("chain.outer", &p.chain.outer)?;
                check_optimizer("chain.inner", &p.chain.inner)?;
                if p.chain.samples < 8 || !(p.chain.memo_step > 0.0) {
                    return Err(invalid("chain: samples >= 8 and a positive memo_step are required"));
                }
                for (i, inst) in p.instances.iter().enumerate() {
                    v(inst.weights.validate(), &format!("instances[{i}].weights"))?;
                    check_points(std::slice::from_ref(&inst.center), p.family.dim())
                        .map_err(|e| invalid(format!("instances[{i}].center: {e}")))?;
                }
                Ok(())
            }
            Task::Siciak(p) => {
                v(p.domain.validate(), "domain")?;
                v(p.family.build(&p.domain).map(|_| ()), "family")?;
                v(p.two_stage.validate(), "two_stage")?;
                check_optimizer("optimizer", &p.optimizer)?;
                if p.methods.is_empty() {
                    return Err(invalid("methods: at least one method is required"));
                }
                if p.methods.contains(&Method::Lempert) && !p.domain.is_convex() {
                    return Err(invalid("methods: lempert needs a convex domain"));
                }
                check_points(&p.points, p.domain.dim)?;
                check_grid(&p.grid, p.domain.dim)
            }
            Task::SiciakVariety(p) => {
                let model = CurveModel::by_name(&p.model).map_err(|e| invalid(format!("model: {e}")))?;
                v(p.param_domain.validate(), "param_domain")?;
                if p.param_domain.dim != 1 {
                    return Err(invalid("param_domain: must be one-dimensional"));
                }
                v(p.family.build(&p.param_domain).map(|_| ()), "family")?;
                v(p.two_stage.validate(), "two_stage")?;
                check_points(&p.points, model.dim())?;
                if p.points.is_empty() && p.parameters.is_empty() {
                    return Err(invalid("points: give points or parameters"));
                }
                Ok(())
            }
            Task::Counterexample(p) => {
                let [c0, c1, a, b, c] = p.constants;
                v(build_counterexample(c0, c1, a, b, c).map(|_| ()), "constants")?;
                check_optimizer("config.optimizer", &p.config.optimizer)?;
                if p.config.radii.len() < 2 || p.config.radii.windows(2).any(|w| w[0] <= w[1]) {
                    return Err(invalid("config.radii: at least two strictly decreasing radii"));
                }
                if p.interior_points.iter().any(|t| !(t.norm() < 3.0)) {
                    return Err(invalid("interior_points: must lie in the parameter disc of radius 3"));
                }
                Ok(())
            }
            Task::Lemma1(p) => {
                v(p.arcs.validate(), "arcs")?;
                v(p.neighborhood.validate(), "neighborhood")?;
                if p.k == 0 {
                    return Err(invalid("k: must be positive"));
                }
                if !p.epsilon.is_finite() {
                    return Err(invalid("epsilon: must be finite"));
                }
                if let Some(s) = &p.scan {
                    if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) || s[0] == 0 {
                        return Err(invalid("scan: must be a non-empty increasing list of positive k"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Optimizer settings take the scenario seed.
    pub fn run(&self) -> ScenarioResult<Outcome> {
        let seed = self.seed;
        let result = match &self.task {
            Task::Green(p) => TaskResult::Green(run_green(p, seed)?),
            Task::Functional(p) => TaskResult::Functional(FunctionalResult {
                name: p.functional.name(),
                value: ExtReal(p.functional.eval(&p.disc)?),
            }),
            Task::Envelope(p) => TaskResult::Envelope(run_envelope(p, seed)?),
            Task::Chain(p) => TaskResult::Chain(run_chain(p, seed)?),
            Task::Siciak(p) => TaskResult::Siciak(run_siciak(p, seed)?),
            Task::SiciakVariety(p) => TaskResult::SiciakVariety(run_variety(p, seed)?),
            Task::Counterexample(p) => TaskResult::Counterexample(run_counterexample(p, seed)?),
            Task::Lemma1(p) => TaskResult::Lemma1(run_lemma1(p)?),
        };
        Ok(Outcome {
            command: self.command(),
            seed,
            result,
        })
    }
}

fn green_divisor(poles: &[C64]) -> crate::Result<Divisor> {
    Divisor::new(poles.iter().map(|&z| DivisorPoint { z, mult: 1 }).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenResult {
    pub value_at_zero: ExtReal,
    /// `max |G|` on the boundary samples.
    pub boundary_max_abs: f64,
    pub submean_points: usize,
    /// Largest `G(z) - mean_{|w - z| = r} G(w)` over the sample points.
    pub submean_worst: f64,
    #[serde(skip)]
    pub grid: Option<FieldGrid>,
}

fn run_green(p: &GreenPayload, seed: u64) -> ScenarioResult<GreenResult> {
    let d = green_divisor(&p.poles)?;
    let w = p.weights.clone().unwrap_or_else(|| vec![1.0; p.poles.len()]);
    let g = |z: C64| green_sum(&d, &w, z);
    let boundary_max_abs = crate::numerics::unit_circle(p.boundary_samples)
        .iter()
        .map(|&z| g(z).abs())
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(p.submean_points);
    while pts.len() < p.submean_points {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let clearance = p.poles.iter().map(|a| (z - a).norm()).fold(1.0 - z.norm(), f64::min);
        if clearance > 1e-3 {
            pts.push((z, (0.5 * clearance).min(0.05)));
        }
    }
    let gaps = par::map(&pts, |&(z, r)| g(z) - circle_mean(|w| g(z + r * w), p.submean_samples));
    let submean_worst = gaps.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let grid = match &p.grid {
        Some(gs) => Some(FieldGrid::compute(
            gs.clone(),
            GridMeta {
                functional: "green".into(),
                family: "none".into(),
                seed,
            },
            |z| g(z[0]),
        )?),
        None => None,
    };
    Ok(GreenResult {
        value_at_zero: ExtReal(g(C64::new(0.0, 0.0))),
        boundary_max_abs,
        submean_points: pts.len(),
        submean_worst,
        grid,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalResult {
    pub name: String,
    pub value: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeRow {
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub point: Vec<C64>,
    pub value: ExtReal,
    pub evals: usize,
    pub converged: bool,
    /// For the Riesz functional: `u(x) + EP_{-u}(x)`, computed separately.
    pub split: Option<ExtReal>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeRunResult {
    pub functional: String,
    pub rows: Vec<EnvelopeRow>,
    #[serde(skip)]
    pub grid: Option<FieldGrid>,
}

fn run_envelope(p: &EnvelopePayload, seed: u64) -> ScenarioResult<EnvelopeRunResult> {
    let cfg = p.optimizer.with_seed(seed);
    let rows = par::map(&p.points, |x| -> crate::Result<EnvelopeRow> {
        let r = envelope(&p.functional, &p.family, x, &cfg)?;
        let split = match &p.functional {
            Functional::Riesz { field, samples } => {
                let ep = poisson_envelope(Negated(field), &p.family, x, &cfg, *samples)?;
                Some(ExtReal(field.eval(x) + ep.value))
            }
            _ => None,
        };
        Ok(EnvelopeRow {
            point: x.clone(),
            value: ExtReal(r.value),
            evals: r.evals,
            converged: r.converged,
            split,
        })
    })
    .into_iter()
    .collect::<crate::Result<Vec<_>>>()?;
    let grid = match &p.grid {
        Some(gs) => Some(FieldGrid::compute(
            gs.clone(),
            GridMeta {
                functional: p.functional.name(),
                family: p.family.describe(),
                seed,
            },
            |z| envelope(&p.functional, &p.family, z, &cfg).map_or(f64::INFINITY, |r| r.value),
        )?),
        None => None,
    };
    Ok(EnvelopeRunResult {
        functional: p.functional.name(),
        rows,
        grid,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainRow {
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub center: Vec<C64>,
    pub support_size: usize,
    pub report: ChainReport,
    /// `sum alpha(a) G_a(x)` for one-dimensional instances.
    pub green_value: Option<ExtReal>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainResult {
    pub rows: Vec<ChainRow>,
}

fn run_chain(p: &ChainPayload, seed: u64) -> ScenarioResult<ChainResult> {
    let cc = ChainConfig {
        outer: p.chain.outer.with_seed(seed),
        inner: p.chain.inner.with_seed(seed),
        ..p.chain.clone()
    };
    let mut rows = Vec::with_capacity(p.instances.len());
    for inst in &p.instances {
        let report = chain_check(&inst.weights, &p.family, &inst.center, &cc)?;
        let green_value = (p.family.dim() == 1).then(|| {
            ExtReal(
                inst.weights
                    .support
                    .iter()
                    .map(|s| s.weight * green(s.point[0], inst.center[0]))
                    .sum(),
            )
        });
        rows.push(ChainRow {
            center: inst.center.clone(),
            support_size: inst.weights.support.len(),
            report,
            green_value,
        });
    }
    Ok(ChainResult { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiciakRow {
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub point: Vec<C64>,
    #[serde(rename = "V_lempert")]
    pub v_lempert: Option<ExtReal>,
    #[serde(rename = "V_two_stage")]
    pub v_two_stage: Option<ExtReal>,
    pub ebj: Option<ExtReal>,
    pub closed_form: Option<f64>,
    /// Largest deviation of the computed values from the closed form.
    pub abs_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiciakResult {
    pub rows: Vec<SiciakRow>,
    pub memo_entries: usize,
    #[serde(skip)]
    pub grid: Option<FieldGrid>,
}

fn abs_error(values: &[Option<ExtReal>], cf: Option<f64>) -> Option<f64> {
    let cf = cf?;
    values
        .iter()
        .flatten()
        .map(|v| (v.0 - cf).abs())
        .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))))
}

fn run_siciak(p: &SiciakPayload, seed: u64) -> ScenarioResult<SiciakResult> {
    let family = p.family.build(&p.domain)?;
    let opt = p.optimizer.with_seed(seed);
    let ts = TwoStageConfig {
        outer: p.two_stage.outer.with_seed(seed),
        inner: p.two_stage.inner.with_seed(seed),
        ..p.two_stage.clone()
    };
    let solver = Siciak::new(family.clone(), ts)?;
    let eval = |x: &[C64], m: Method| -> crate::Result<f64> {
        match m {
            Method::Lempert => Ok(lempert_v(&p.domain, x, &family, &opt)?.value),
            Method::TwoStage => Ok(solver.value(x)?.value),
            Method::Ebj => ebj_field(&family, x, &opt),
        }
    };
    let mut rows = Vec::with_capacity(p.points.len());
    for x in &p.points {
        let mut vals = [None, None, None];
        for &m in &p.methods {
            vals[m as usize] = Some(ExtReal(eval(x, m)?));
        }
        let closed_form = p.closed_form.as_ref().map(|cf| closed_form_v(cf, x)).transpose()?;
        rows.push(SiciakRow {
            point: x.clone(),
            v_lempert: vals[0],
            v_two_stage: vals[1],
            ebj: vals[2],
            closed_form,
            abs_error: abs_error(&vals[..2], closed_form),
        });
    }
    let grid = match &p.grid {
        Some(gs) => {
            let m = p.methods[0];
            Some(FieldGrid::compute(
                gs.clone(),
                GridMeta {
                    functional: format!("{m:?}").to_lowercase(),
                    family: family.describe(),
                    seed,
                },
                |z| eval(z, m).unwrap_or(f64::INFINITY),
            )?)
        }
        None => None,
    };
    Ok(SiciakResult {
        rows,
        memo_entries: solver.memo.len(),
        grid,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarietyRow {
    #[serde(with = "crate::serde_ext::complex_vec")]
    pub point: Vec<C64>,
    #[serde(rename = "V")]
    pub v: ExtReal,
    pub psi: Option<ExtReal>,
    pub closed_form: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarietyResult {
    pub model: String,
    pub rows: Vec<VarietyRow>,
}

fn run_variety(p: &SiciakVarietyPayload, seed: u64) -> ScenarioResult<VarietyResult> {
    let model = CurveModel::by_name(&p.model)?;
    let family = p.family.build(&p.param_domain)?;
    let ts = TwoStageConfig {
        outer: p.two_stage.outer.with_seed(seed),
        inner: p.two_stage.inner.with_seed(seed),
        ..p.two_stage.clone()
    };
    let solver = SiciakVariety::new(model.clone(), family, ts)?;
    let mut points: Vec<Vec<C64>> = p.parameters.iter().map(|&t| model.eval(t)).collect();
    points.extend(p.points.iter().cloned());
    let mut rows = Vec::with_capacity(points.len());
    for x in points {
        let v = solver.value(&x)?.value;
        let psi = if p.psi { Some(ExtReal(solver.psi(&x)?)) } else { None };
        let closed_form = p.closed_form.as_ref().map(|cf| closed_form_v(cf, &x)).transpose()?;
        rows.push(VarietyRow {
            abs_error: closed_form.map(|c| (v - c).abs()),
            point: x,
            v: ExtReal(v),
            psi,
            closed_form,
        });
    }
    Ok(VarietyResult {
        model: model.name().into(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InteriorRow {
    #[serde(with = "crate::serde_ext::complex")]
    pub point: C64,
    pub envelope: f64,
    pub minus_a: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleResult {
    pub gap: GapReport,
    pub interior: Vec<InteriorRow>,
}

fn run_counterexample(p: &CounterexamplePayload, seed: u64) -> ScenarioResult<CounterexampleResult> {
    let [c0, c1, a, b, c] = p.constants;
    let data = build_counterexample(c0, c1, a, b, c)?;
    let mut cfg = p.config.clone();
    cfg.optimizer = cfg.optimizer.with_seed(seed);
    let gap = counterexample_envelope_gap(&data, &cfg)?;
    let interior = par::map(&p.interior_points, |&t| -> crate::Result<InteriorRow> {
        let e = ep_parameter(&data, &cfg, t)?;
        let minus_a = -data.affine(t);
        Ok(InteriorRow {
            point: t,
            envelope: e,
            minus_a,
            error: (e - minus_a).abs(),
        })
    })
    .into_iter()
    .collect::<crate::Result<Vec<_>>>()?;
    Ok(CounterexampleResult { gap, interior })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma1Result {
    pub report: Lemma1Report,
    pub scan: Option<ThresholdScan>,
}

fn run_lemma1(p: &Lemma1Payload) -> ScenarioResult<Lemma1Result> {
    let report = lemma1_check(&p.zeta, &p.arcs, &p.neighborhood, p.k, p.epsilon)?;
    let scan = match &p.scan {
        Some(ks) => Some(k_threshold_scan(&p.zeta, &p.arcs, &p.neighborhood, p.epsilon, ks)?),
        None => None,
    };
    Ok(Lemma1Result { report, scan })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TaskResult {
    Green(GreenResult),
    Functional(FunctionalResult),
    Envelope(EnvelopeRunResult),
    Chain(ChainResult),
    Siciak(SiciakResult),
    SiciakVariety(VarietyResult),
    Counterexample(CounterexampleResult),
    Lemma1(Lemma1Result),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub command: Command,
    pub seed: u64,
    pub result: TaskResult,
}

impl Outcome {
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "version": SCHEMA_VERSION,
            "command": self.command.name(),
            "seed": self.seed,
            "result": to_value(&self.result),
        })
    }

    /// `(file name, contents)` pairs.
    pub fn tables(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let grid = match &self.result {
            TaskResult::Green(r) => r.grid.as_ref(),
            TaskResult::Envelope(r) => r.grid.as_ref(),
            TaskResult::Siciak(r) => r.grid.as_ref(),
            _ => None,
        };
        if let Some(g) = grid {
            out.push(("field.csv".to_string(), g.to_csv()));
            out.push((
                "field.json".to_string(),
                serde_json::to_string_pretty(&g.sidecar()).expect("serializable") + "\n",
            ));
        }
        match &self.result {
            TaskResult::Siciak(r) => {
                let mut csv = String::from("point,V_lempert,V_two_stage,closed_form,abs_error\n");
                for row in &r.rows {
                    let f = |v: Option<f64>| v.map_or(String::new(), fmt_ext);
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        point_label(&row.point),
                        f(row.v_lempert.map(|v| v.0)),
                        f(row.v_two_stage.map(|v| v.0)),
                        f(row.closed_form),
                        f(row.abs_error)
                    ));
                }
                out.push(("values.csv".to_string(), csv));
            }
            TaskResult::Lemma1(r) => {
                let mut csv = String::from("re,im,multiplicity\n");
                for root in r.report.solutions.iter() {
                    csv.push_str(&format!("{},{},{}\n", root.z.re, root.z.im, root.multiplicity));
                }
                out.push(("roots.csv".to_string(), csv));
            }
            _ => {}
        }
        out
    }
}

/// `re+imi` coordinates joined by `;`.
pub fn point_label(z: &[C64]) -> String {
    z.iter()
        .map(|w| format!("{}{:+}i", w.re, w.im))
        .collect::<Vec<_>>()
        .join(";")
}

/// Envelope result as a summary row.
pub fn envelope_summary(r: &EnvelopeResult) -> serde_json::Value {
    to_value(r)
}

/// Seeded points in the ball of radius `r` around the origin.
pub fn random_points(dim: usize, r: f64, n: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let p: Vec<C64> = (0..dim)
                .map(|_| C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r)))
                .collect();
            if p.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt() < r {
                break p;
            }
        })
        .collect()
}
