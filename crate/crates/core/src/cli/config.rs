//! Scenario files: TOML with a schema version, validated into [`ScenarioConfig`].
//!
//! Validation collects every violation before failing so a broken file can be
//! fixed in one pass.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::cli::expr::Expr;
use crate::elliptic::DomainShape;
use crate::error::{Error, Result};
use crate::hyperbolic::CouplingForm;
use crate::propagation::{AxisDraws, Sampling, DEFAULT_POINTS_PER_DIM};
use crate::random_set::Interval;

pub const SCHEMA_VERSION: u32 = 1;

/// Truncation used when `field.terms` is absent.
pub const DEFAULT_TERMS: usize = 130;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: Option<u32>,
    model: Option<RawModel>,
    field: Option<RawField>,
    mesh: Option<RawMesh>,
    region: Option<RawRegion>,
    transport: Option<RawTransport>,
    wave: Option<RawWave>,
    gaussian_family: Option<RawGauss>,
    propagation: Option<RawPropagation>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    sigma: Option<f64>,
    ell: Option<f64>,
    ell_range: Option<[f64; 2]>,
    terms: Option<usize>,
    mean: Option<f64>,
    a_min: Option<f64>,
    a_max: Option<f64>,
    axis_draws: Option<String>,
    domain: Option<[f64; 2]>,
    method: Option<String>,
    samples: Option<usize>,
    points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    shape: Option<String>,
    nx: Option<usize>,
    ny: Option<usize>,
    load: Option<String>,
    rel_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    kappa: Option<f64>,
    horizon: Option<f64>,
    speed_bound: Option<f64>,
    nx: Option<usize>,
    nt: Option<usize>,
    picard_tol: Option<f64>,
    max_sweeps: Option<usize>,
    step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransport {
    speed: Option<String>,
    reaction: Option<String>,
    source: Option<String>,
    initial: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWave {
    rho: Option<f64>,
    modulus: Option<f64>,
    modulus_floor: Option<f64>,
    load: Option<String>,
    displacement: Option<String>,
    slope: Option<String>,
    velocity: Option<String>,
    coupling: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGauss {
    mu: Option<[f64; 2]>,
    sigma: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPropagation {
    samples: Option<usize>,
    seed: Option<u64>,
    points: Option<usize>,
    thresholds: Option<Vec<f64>>,
    sampling: Option<String>,
    probe: Option<[f64; 2]>,
    slice_x2: Option<f64>,
    workers: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMethod {
    KarhunenLoeve,
    OrnsteinUhlenbeck,
}

/// Random-field block. Fields irrelevant to the model carry their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub sigma: f64,
    /// Correlation length for single solves and field samples.
    pub ell: f64,
    pub ell_range: Interval,
    pub terms: usize,
    pub mean: f64,
    pub a_min: f64,
    pub a_max: Option<f64>,
    pub axis_draws: AxisDraws,
    pub domain: Option<Interval>,
    pub method: FieldMethod,
    pub samples: usize,
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct MeshConfig {
    pub shape: DomainShape,
    pub nx: usize,
    pub ny: usize,
    pub load: Expr,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionConfig {
    pub kappa: f64,
    pub horizon: f64,
    pub speed_bound: f64,
    pub nx: usize,
    pub nt: usize,
    pub picard_tol: f64,
    pub max_sweeps: usize,
    pub step: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TransportConfig {
    pub speed: Expr,
    pub reaction: Expr,
    pub source: Expr,
    pub initial: Expr,
}

#[derive(Debug, Clone)]
pub struct WaveConfig {
    pub rho: f64,
    pub modulus: f64,
    pub modulus_floor: f64,
    pub load: Expr,
    pub displacement: Expr,
    pub slope: Expr,
    pub velocity: Expr,
    pub coupling: CouplingForm,
}

#[derive(Debug, Clone)]
pub enum ModelConfig {
    Elliptic { mesh: MeshConfig },
    Transport { region: RegionConfig, transport: TransportConfig },
    Wave { region: RegionConfig, wave: WaveConfig },
    GaussianFamily { mu: Interval, sigma: Interval },
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Elliptic { .. } => "elliptic",
            ModelConfig::Transport { .. } => "transport",
            ModelConfig::Wave { .. } => "wave",
            ModelConfig::GaussianFamily { .. } => "gaussian_family",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationConfig {
    pub samples: usize,
    pub seed: u64,
    pub points: usize,
    pub thresholds: Option<Vec<f64>>,
    pub sampling: Sampling,
    /// Primary quantity location: `(x1, x2)` for the membrane, `(x, t)` otherwise.
    pub probe: Option<(f64, f64)>,
    pub slice_x2: f64,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub model: ModelConfig,
    pub field: FieldConfig,
    pub propagation: PropagationConfig,
    pub output: OutputConfig,
    /// Raw file text, hashed into the run manifest.
    pub text: String,
}

struct Checker {
    errors: Vec<String>,
}

impl Checker {
    fn fail(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn required<T>(&mut self, value: Option<T>, name: &str) -> Option<T> {
        if value.is_none() {
            self.fail(format!("{name} is required"));
        }
        value
    }

    fn positive(&mut self, value: f64, name: &str) -> f64 {
        if !(value > 0.0) || !value.is_finite() {
            self.fail(format!("{name} must be positive (got {value})"));
        }
        value
    }

    fn non_negative(&mut self, value: f64, name: &str) -> f64 {
        if !(value >= 0.0) || !value.is_finite() {
            self.fail(format!("{name} must be non-negative (got {value})"));
        }
        value
    }

    fn at_least(&mut self, value: usize, min: usize, name: &str) -> usize {
        if value < min {
            self.fail(format!("{name} must be at least {min} (got {value})"));
        }
        value
    }

    fn interval(&mut self, value: [f64; 2], name: &str) -> Option<Interval> {
        match Interval::new(value[0], value[1]) {
            Ok(iv) => Some(iv),
            Err(_) => {
                self.fail(format!("{name} must be a finite [lo, hi] with lo <= hi (got {value:?})"));
                None
            }
        }
    }

    fn expr(&mut self, source: Option<String>, default: &str, vars: &[&str], name: &str) -> Option<Expr> {
        let source = source.unwrap_or_else(|| default.to_string());
        match Expr::parse(&source, vars) {
            Ok(e) => Some(e),
            Err(msg) => {
                self.fail(format!("{name}: {msg}"));
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, value: Option<String>, options: &[(&str, T)], default: T, name: &str) -> T {
        match value {
            None => default,
            Some(v) => match options.iter().find(|(k, _)| *k == v) {
                Some((_, t)) => *t,
                None => {
                    let names: Vec<&str> = options.iter().map(|(k, _)| *k).collect();
                    self.fail(format!("{name} must be one of {} (got `{v}`)", names.join(", ")));
                    default
                }
            },
        }
    }
}

/// Reads and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string().trim().to_string()]))?;
    let mut c = Checker { errors: Vec::new() };

    let schema_version = c.required(raw.schema_version, "schema_version").unwrap_or(SCHEMA_VERSION);
    if schema_version != SCHEMA_VERSION {
        c.fail(format!("schema_version {schema_version} is not supported (expected {SCHEMA_VERSION})"));
    }
    let kind = c.required(raw.model.and_then(|m| m.kind), "model.kind");
    let kind = kind.as_deref().unwrap_or("");
    let known = ["elliptic", "transport", "wave", "gaussian_family"];
    if !kind.is_empty() && !known.contains(&kind) {
        c.fail(format!("model.kind must be one of {} (got `{kind}`)", known.join(", ")));
    }

    let field = validate_field(&mut c, raw.field.unwrap_or_default(), kind);
    let model = match kind {
        "elliptic" => validate_mesh(&mut c, raw.mesh).map(|mesh| ModelConfig::Elliptic { mesh }),
        "transport" => {
            let region = validate_region(&mut c, raw.region);
            let t = validate_transport(&mut c, raw.transport);
            region.zip(t).map(|(region, transport)| ModelConfig::Transport { region, transport })
        }
        "wave" => {
            let region = validate_region(&mut c, raw.region);
            let w = validate_wave(&mut c, raw.wave);
            region.zip(w).map(|(region, wave)| ModelConfig::Wave { region, wave })
        }
        "gaussian_family" => {
            let g = c.required(raw.gaussian_family, "gaussian_family").unwrap_or_default();
            let mu = c.required(g.mu, "gaussian_family.mu").and_then(|v| c.interval(v, "gaussian_family.mu"));
            let sigma = c
                .required(g.sigma, "gaussian_family.sigma")
                .and_then(|v| c.interval(v, "gaussian_family.sigma"));
            if let Some(s) = sigma {
                c.non_negative(s.lo(), "gaussian_family.sigma lower bound");
            }
            mu.zip(sigma).map(|(mu, sigma)| ModelConfig::GaussianFamily { mu, sigma })
        }
        _ => None,
    };
    let propagation = validate_propagation(&mut c, raw.propagation, kind);
    let output = validate_output(&mut c, raw.output);

    match (model, c.errors.is_empty()) {
        (Some(model), true) => Ok(ScenarioConfig {
            schema_version,
            model,
            field,
            propagation,
            output,
            text: text.to_string(),
        }),
        _ => Err(Error::Config(c.errors)),
    }
}

fn validate_field(c: &mut Checker, f: RawField, kind: &str) -> FieldConfig {
    let elliptic = kind == "elliptic";
    let sigma = match f.sigma {
        Some(s) => c.non_negative(s, "field.sigma"),
        None if elliptic => c.required(None, "field.sigma").unwrap_or(1.0),
        None => if kind == "gaussian_family" { 1.0 } else { 0.0 },
    };
    let ell_range = match f.ell_range {
        Some(r) => c.interval(r, "field.ell_range"),
        None if elliptic => c.required(None, "field.ell_range"),
        None => None,
    };
    if let Some(r) = ell_range {
        c.positive(r.lo(), "field.ell_range lower bound");
    }
    let ell = match f.ell {
        Some(l) => c.positive(l, "field.ell"),
        None => ell_range.map_or(1.0, |r| r.midpoint()),
    };
    let ell_range = ell_range.unwrap_or_else(|| Interval::point(ell.max(f64::MIN_POSITIVE)).expect("finite"));
    let terms = c.at_least(f.terms.unwrap_or(DEFAULT_TERMS), 1, "field.terms");
    let mean = c.positive(f.mean.unwrap_or(1.0), "field.mean");
    let a_min = match f.a_min {
        Some(a) => c.positive(a, "field.a_min"),
        None if elliptic => c.required(None, "field.a_min").unwrap_or(0.1),
        None => 0.1,
    };
    if let Some(hi) = f.a_max {
        if !(hi > a_min) {
            c.fail(format!("field.a_max ({hi}) must exceed field.a_min ({a_min})"));
        }
    }
    let axis_draws = c.choice(
        f.axis_draws,
        &[("shared", AxisDraws::Shared), ("independent", AxisDraws::Independent)],
        AxisDraws::Shared,
        "field.axis_draws",
    );
    let domain = f.domain.and_then(|d| c.interval(d, "field.domain"));
    if let Some(d) = domain {
        if d.is_degenerate() {
            c.fail("field.domain must have positive length");
        }
    }
    let method = c.choice(
        f.method,
        &[("kl", FieldMethod::KarhunenLoeve), ("ou", FieldMethod::OrnsteinUhlenbeck)],
        FieldMethod::KarhunenLoeve,
        "field.method",
    );
    let samples = c.at_least(f.samples.unwrap_or(5), 1, "field.samples");
    let points = c.at_least(f.points.unwrap_or(201), 2, "field.points");
    FieldConfig {
        sigma,
        ell,
        ell_range,
        terms,
        mean,
        a_min,
        a_max: f.a_max,
        axis_draws,
        domain,
        method,
        samples,
        points,
    }
}

fn validate_mesh(c: &mut Checker, m: Option<RawMesh>) -> Option<MeshConfig> {
    let m = c.required(m, "mesh")?;
    let shape_name = c_required_string(c, m.shape, "mesh.shape");
    let shape = c.choice(
        shape_name,
        &[("rectangle", DomainShape::Rectangle), ("l_shape", DomainShape::LShape)],
        DomainShape::Rectangle,
        "mesh.shape",
    );
    let nx = c.required(m.nx, "mesh.nx").map(|n| c.at_least(n, 2, "mesh.nx"));
    let ny = c.required(m.ny, "mesh.ny").map(|n| c.at_least(n, 2, "mesh.ny"));
    if let (DomainShape::LShape, Some(nx), Some(ny)) = (shape, nx, ny) {
        if nx % 2 == 1 || ny % 2 == 1 {
            c.fail(format!("L-shaped mesh needs even mesh.nx and mesh.ny (got {nx} x {ny})"));
        }
    }
    let load = c.expr(m.load, "1", &["x", "y"], "mesh.load");
    let rel_tol = c.positive(m.rel_tol.unwrap_or(crate::elliptic::DEFAULT_REL_TOL), "mesh.rel_tol");
    Some(MeshConfig { shape, nx: nx?, ny: ny?, load: load?, rel_tol })
}

fn c_required_string(c: &mut Checker, v: Option<String>, name: &str) -> Option<String> {
    c.required(v.clone(), name);
    v
}

fn validate_region(c: &mut Checker, r: Option<RawRegion>) -> Option<RegionConfig> {
    let r = c.required(r, "region")?;
    let kappa = c.required(r.kappa, "region.kappa").map(|v| c.positive(v, "region.kappa"));
    let horizon = c.required(r.horizon, "region.horizon").map(|v| c.positive(v, "region.horizon"));
    let speed_bound = c
        .required(r.speed_bound, "region.speed_bound")
        .map(|v| c.non_negative(v, "region.speed_bound"));
    if let (Some(k), Some(t), Some(s)) = (kappa, horizon, speed_bound) {
        if k - s * t <= 0.0 {
            c.fail(format!("region.kappa ({k}) must exceed speed_bound * horizon ({})", s * t));
        }
    }
    let nx = c.at_least(r.nx.unwrap_or(201), 2, "region.nx");
    let nt = c.at_least(r.nt.unwrap_or(201), 2, "region.nt");
    let picard_tol = c.positive(r.picard_tol.unwrap_or(1e-10), "region.picard_tol");
    let max_sweeps = c.at_least(r.max_sweeps.unwrap_or(100), 1, "region.max_sweeps");
    let step = r.step.map(|h| c.positive(h, "region.step"));
    Some(RegionConfig {
        kappa: kappa?,
        horizon: horizon?,
        speed_bound: speed_bound?,
        nx,
        nt,
        picard_tol,
        max_sweeps,
        step,
    })
}

fn validate_transport(c: &mut Checker, t: Option<RawTransport>) -> Option<TransportConfig> {
    let t = c.required(t, "transport")?;
    let xt = ["x", "t"];
    let speed = c.expr(t.speed, "0", &xt, "transport.speed");
    let reaction = c.expr(t.reaction, "0", &xt, "transport.reaction");
    let source = c.expr(t.source, "0", &xt, "transport.source");
    let initial = c_required_string(c, t.initial, "transport.initial").and_then(|s| c.expr(Some(s), "", &["x"], "transport.initial"));
    Some(TransportConfig { speed: speed?, reaction: reaction?, source: source?, initial: initial? })
}

fn validate_wave(c: &mut Checker, w: Option<RawWave>) -> Option<WaveConfig> {
    let w = c.required(w, "wave")?;
    let rho = c.positive(w.rho.unwrap_or(1.0), "wave.rho");
    let modulus = c.positive(w.modulus.unwrap_or(1.0), "wave.modulus");
    let modulus_floor = c.positive(w.modulus_floor.unwrap_or(0.1 * modulus), "wave.modulus_floor");
    let load = c.expr(w.load, "0", &["x", "t"], "wave.load");
    let displacement = c_required_string(c, w.displacement, "wave.displacement")
        .and_then(|s| c.expr(Some(s), "", &["x"], "wave.displacement"));
    let slope = c_required_string(c, w.slope, "wave.slope").and_then(|s| c.expr(Some(s), "", &["x"], "wave.slope"));
    let velocity = c.expr(w.velocity, "0", &["x"], "wave.velocity");
    let coupling = c.choice(
        w.coupling,
        &[("consistent", CouplingForm::Consistent), ("literal", CouplingForm::Literal)],
        CouplingForm::Consistent,
        "wave.coupling",
    );
    Some(WaveConfig {
        rho,
        modulus,
        modulus_floor,
        load: load?,
        displacement: displacement?,
        slope: slope?,
        velocity: velocity?,
        coupling,
    })
}

fn validate_propagation(c: &mut Checker, p: Option<RawPropagation>, kind: &str) -> PropagationConfig {
    let p = c.required(p, "propagation").unwrap_or_default();
    let samples = c.at_least(p.samples.unwrap_or(1), 1, "propagation.samples");
    if p.samples.is_none() {
        c.fail("propagation.samples is required");
    }
    let seed = c.required(p.seed, "propagation.seed").unwrap_or(0);
    let points = c.at_least(p.points.unwrap_or(DEFAULT_POINTS_PER_DIM), 1, "propagation.points");
    if let Some(t) = &p.thresholds {
        if t.is_empty() || t.iter().any(|v| !v.is_finite()) || t.windows(2).any(|w| w[0] > w[1]) {
            c.fail("propagation.thresholds must be a non-empty ascending list of finite numbers");
        }
    }
    let sampling = c.choice(
        p.sampling,
        &[("shared", Sampling::Shared), ("independent", Sampling::Independent)],
        Sampling::Shared,
        "propagation.sampling",
    );
    let probe = p.probe.map(|[a, b]| (a, b));
    if probe.is_none() && matches!(kind, "elliptic" | "transport" | "wave") {
        c.fail("propagation.probe is required");
    }
    if kind == "elliptic" {
        if let Some((x1, x2)) = probe {
            if !(0.0..=1.0).contains(&x1) || !(0.0..=1.0).contains(&x2) {
                c.fail(format!("propagation.probe ({x1}, {x2}) lies outside the unit square"));
            }
        }
    }
    let slice_x2 = p.slice_x2.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&slice_x2) {
        c.fail(format!("propagation.slice_x2 must lie in [0, 1] (got {slice_x2})"));
    }
    let workers = p.workers.map(|w| c.at_least(w, 1, "propagation.workers"));
    PropagationConfig { samples, seed, points, thresholds: p.thresholds, sampling, probe, slice_x2, workers }
}

fn validate_output(c: &mut Checker, o: Option<RawOutput>) -> OutputConfig {
    let o = o.unwrap_or_default();
    let format = c.choice(
        o.format,
        &[("csv", OutputFormat::Csv), ("json", OutputFormat::Json)],
        OutputFormat::Csv,
        "output.format",
    );
    OutputConfig { dir: o.dir.map(PathBuf::from), format }
}
