//! Quantity-of-interest models evaluated inside the double loops.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::elliptic::{
    assemble, build_mesh, element_coefficients_from_nodal, solve_cg, DomainShape, StructuredMesh,
};
use crate::error::{Error, Result};
use crate::field::{apply_cutoff, CutoffField, FieldEvaluator, GaussianDraw, KlBasis, SpatialField, TabulatedField};
use crate::hyperbolic::{
    reconstruct_displacement, solve_2x2_system, solve_transport, wave_initial_data, wave_to_system, CouplingForm,
    DeterminacyRegion, GridSolution2D, PicardSettings, SpaceFn, SpaceTimeFn, SpaceTimeGrid, TransportCoefficients,
    WaveMaterial,
};
use crate::random_set::Interval;

/// A vector-valued quantity of interest `u(lambda, xi)` of a standard normal draw `xi`.
///
/// Component [`Model::primary`] is the scalar quantity used for p-boxes.
pub trait Model: Send + Sync {
    /// Number of standard normals consumed per sample.
    fn draw_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn evaluate(&self, lambda: &[f64], draw: &[f64]) -> Result<Vec<f64>>;

    fn primary(&self) -> usize {
        0
    }
}

/// Model from a closure, mostly for tests and small studies.
pub struct FnModel<F> {
    draw_len: usize,
    output_len: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync,
{
    pub fn new(draw_len: usize, output_len: usize, f: F) -> Self {
        Self { draw_len, output_len, f }
    }
}

impl<F> Model for FnModel<F>
where
    F: Fn(&[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync,
{
    fn draw_len(&self) -> usize {
        self.draw_len
    }

    fn output_len(&self) -> usize {
        self.output_len
    }

    fn evaluate(&self, lambda: &[f64], draw: &[f64]) -> Result<Vec<f64>> {
        (self.f)(lambda, draw)
    }
}

/// Identity quantity on the Gaussian family: `lambda = (mu, sigma)`, output `mu + sigma z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianFamilyModel;

impl Model for GaussianFamilyModel {
    fn draw_len(&self) -> usize {
        1
    }

    fn output_len(&self) -> usize {
        1
    }

    fn evaluate(&self, lambda: &[f64], draw: &[f64]) -> Result<Vec<f64>> {
        match lambda {
            [mu, sigma] if *sigma >= 0.0 => Ok(vec![mu + sigma * draw[0]]),
            _ => Err(Error::InvalidInput(format!("Gaussian family expects (mu, sigma >= 0), got {lambda:?}"))),
        }
    }
}

/// KL bases keyed by correlation length, built on first use.
#[derive(Debug)]
pub(crate) struct BasisCache {
    domain: Interval,
    terms: usize,
    bases: Mutex<HashMap<u64, Arc<KlBasis>>>,
}

impl BasisCache {
    pub(crate) fn new(domain: Interval, terms: usize) -> Self {
        Self { domain, terms, bases: Mutex::new(HashMap::new()) }
    }

    pub(crate) fn get(&self, ell: f64) -> Result<Arc<KlBasis>> {
        if let Some(b) = self.bases.lock().expect("basis cache lock").get(&ell.to_bits()) {
            return Ok(b.clone());
        }
        let b = Arc::new(KlBasis::new(ell, self.domain, self.terms)?);
        self.bases.lock().expect("basis cache lock").insert(ell.to_bits(), b.clone());
        Ok(b)
    }

    pub(crate) fn field(&self, ell: f64, draw: &[f64], sigma: f64) -> Result<FieldEvaluator> {
        FieldEvaluator::new(self.get(ell)?, Arc::new(GaussianDraw::from_coefficients(draw.to_vec())), sigma)
    }
}

fn ell_of(lambda: &[f64]) -> Result<f64> {
    match lambda {
        [ell] => Ok(*ell),
        _ => Err(Error::InvalidInput(format!("expected a single correlation length, got {lambda:?}"))),
    }
}

/// How the two axis fields of the product coefficient are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisDraws {
    /// One field `q` evaluated at `x1` and at `x2`.
    #[default]
    Shared,
    /// Two independent fields, one per axis.
    Independent,
}

pub type LoadFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Membrane problem with coefficient `max(mu + q(x1) q(x2), a_min)` and correlation length as parameter.
#[derive(Clone)]
pub struct EllipticScenario {
    pub shape: DomainShape,
    pub nx: usize,
    pub ny: usize,
    pub mean: f64,
    pub sigma: f64,
    pub a_min: f64,
    pub a_max: Option<f64>,
    pub terms: usize,
    pub axis_draws: AxisDraws,
    pub load: LoadFn,
    pub rel_tol: f64,
}

/// Nodal displacement at every mesh node.
pub struct EllipticModel {
    scenario: EllipticScenario,
    mesh: StructuredMesh,
    xs: Vec<f64>,
    ys: Vec<f64>,
    cache: BasisCache,
    probe: usize,
}

impl EllipticModel {
    /// `probe` is the point whose nodal value is the primary quantity.
    pub fn new(scenario: EllipticScenario, probe: (f64, f64)) -> Result<Self> {
        if !(scenario.a_min > 0.0) || !(scenario.mean > 0.0) || !(scenario.sigma >= 0.0) {
            return Err(Error::InvalidInput("membrane needs mean > 0, a_min > 0, sigma >= 0".into()));
        }
        let mesh = build_mesh(scenario.shape, scenario.nx, scenario.ny)?;
        let (xs, ys) = mesh.axis_coordinates();
        let cache = BasisCache::new(Interval::new(0.0, 1.0)?, scenario.terms);
        let probe = mesh.nearest_node(probe.0, probe.1);
        Ok(Self { scenario, mesh, xs, ys, cache, probe })
    }

    pub fn mesh(&self) -> &StructuredMesh {
        &self.mesh
    }

    pub fn probe_node(&self) -> usize {
        self.probe
    }

    pub fn scenario(&self) -> &EllipticScenario {
        &self.scenario
    }

    /// Nodal coefficient values `a(x)` for one draw.
    pub fn nodal_coefficient(&self, ell: f64, draw: &[f64]) -> Result<Vec<f64>> {
        let s = &self.scenario;
        let m2 = 2 * s.terms;
        let (d1, d2) = match s.axis_draws {
            AxisDraws::Shared => (&draw[..m2], &draw[..m2]),
            AxisDraws::Independent => (&draw[..m2], &draw[m2..2 * m2]),
        };
        let q1 = self.cache.field(ell, d1, s.sigma)?;
        let v1 = self.xs.iter().map(|&x| q1.value(x)).collect::<Result<Vec<_>>>()?;
        let v2 = match s.axis_draws {
            AxisDraws::Shared if self.xs == self.ys => v1.clone(),
            _ => {
                let q2 = self.cache.field(ell, d2, s.sigma)?;
                self.ys.iter().map(|&y| q2.value(y)).collect::<Result<Vec<_>>>()?
            }
        };
        Ok((0..self.mesh.node_count())
            .map(|n| {
                let (i, j) = self.mesh.node_ij(n);
                apply_cutoff(s.mean + v1[i] * v2[j], s.a_min, s.a_max)
            })
            .collect())
    }

    /// Full finite-element solve for one draw.
    pub fn solve(&self, ell: f64, draw: &[f64]) -> Result<Vec<f64>> {
        let nodal = self.nodal_coefficient(ell, draw)?;
        let coeffs = element_coefficients_from_nodal(&self.mesh, &nodal)?;
        let load = self.scenario.load.clone();
        let system = assemble(&self.mesh, &coeffs, move |x, y| load(x, y))?;
        Ok(solve_cg(&system, self.scenario.rel_tol, None)?.values)
    }
}

impl Model for EllipticModel {
    fn draw_len(&self) -> usize {
        match self.scenario.axis_draws {
            AxisDraws::Shared => 2 * self.scenario.terms,
            AxisDraws::Independent => 4 * self.scenario.terms,
        }
    }

    fn output_len(&self) -> usize {
        self.mesh.node_count()
    }

    fn evaluate(&self, lambda: &[f64], draw: &[f64]) -> Result<Vec<f64>> {
        self.solve(ell_of(lambda)?, draw)
    }

    fn primary(&self) -> usize {
        self.probe
    }
}

/// Space-time discretization shared by the hyperbolic models.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicGrid {
    pub region: DeterminacyRegion,
    pub nx: usize,
    pub nt: usize,
    pub settings: PicardSettings,
}

impl HyperbolicGrid {
    fn grid(&self) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::covering(&self.region, self.nx, self.nt)
    }
}

/// Node indices of row `t` inside the region and the position of `x` among them.
fn probe_row(sol_grid: &SpaceTimeGrid, region: &DeterminacyRegion, probe: (f64, f64)) -> Result<(usize, Vec<usize>, usize)> {
    let (i, j) = sol_grid.nearest(probe.0, probe.1);
    let t = sol_grid.ts()[j];
    let row: Vec<usize> = (0..sol_grid.xs().len()).filter(|&k| region.contains(sol_grid.xs()[k], t)).collect();
    match row.iter().position(|&k| k == i) {
        Some(p) => Ok((j, row, p)),
        None => Err(Error::Domain(format!("probe ({}, {}) lies outside the determinacy region", probe.0, probe.1))),
    }
}

/// Transport with random speed `clamp(a(x, t) + sigma q(x), -c, c)`.
#[derive(Clone)]
pub struct TransportScenario {
    pub grid: HyperbolicGrid,
    pub speed: SpaceTimeFn,
    pub reaction: SpaceTimeFn,
    pub source: SpaceTimeFn,
    pub initial: SpaceFn,
    pub sigma: f64,
    pub terms: usize,
}

/// Solution along the probe's time row (nodes inside the region).
pub struct TransportModel {
    scenario: TransportScenario,
    cache: BasisCache,
    level: usize,
    row: Vec<usize>,
    probe: usize,
}

impl TransportModel {
    pub fn new(scenario: TransportScenario, probe: (f64, f64)) -> Result<Self> {
        let k = scenario.grid.region.kappa();
        let cache = BasisCache::new(Interval::new(-k, k)?, scenario.terms);
        let (level, row, probe) = probe_row(&scenario.grid.grid()?, &scenario.grid.region, probe)?;
        Ok(Self { scenario, cache, level, row, probe })
    }

    /// Coefficients for one correlation length and draw.
    pub fn coefficients(&self, ell: f64, draw: &[f64]) -> Result<TransportCoefficients> {
        let s = &self.scenario;
        let c = s.grid.region.speed();
        let speed: SpaceTimeFn = if s.sigma == 0.0 {
            s.speed.clone()
        } else {
            let q = TabulatedField::from_kl(&self.cache.field(ell, draw, s.sigma)?)?;
            let mean = s.speed.clone();
            Arc::new(move |x, t| (mean(x, t) + q.value(x)).clamp(-c, c))
        };
        Ok(TransportCoefficients {
            speed,
            reaction: s.reaction.clone(),
            source: s.source.clone(),
            initial: s.initial.clone(),
        })
    }

    pub fn solve(&self, ell: f64, draw: &[f64]) -> Result<GridSolution2D> {
        let s = &self.scenario;
        solve_transport(&self.coefficients(ell, draw)?, &s.grid.region, &s.grid.grid()?, &s.grid.settings)
    }

    pub fn row_x(&self) -> Result<Vec<f64>> {
        let g = self.scenario.grid.grid()?;
        Ok(self.row.iter().map(|&i| g.xs()[i]).collect())
    }
}

impl Model for TransportModel {
    fn draw_len(&self) -> usize {
        if self.scenario.sigma == 0.0 {
            0
        } else {
            2 * self.scenario.terms
        }
    }

    fn output_len(&self) -> usize {
        self.row.len()
    }

    fn evaluate(&self, lambda: &[f64], draw: &[f64]) -> Result<Vec<f64>> {
        let sol = self.solve(ell_of(lambda)?, draw)?;
        Ok(self.row.iter().map(|&i| sol.value(0, i, self.level)).collect())
    }

    fn primary(&self) -> usize {
        self.probe
    }
}

/// Rod with constant density and modulus `clamp(E0 + sigma q(x), e_min, c^2 rho)`.
#[derive(Clone)]
pub struct WaveScenario {
    pub grid: HyperbolicGrid,
    pub rho: f64,
    pub modulus: f64,
    pub modulus_floor: f64,
    pub sigma: f64,
    pub terms: usize,
    pub load: SpaceTimeFn,
    pub displacement: SpaceFn,
    pub slope: SpaceFn,
    pub velocity: SpaceFn,
    pub coupling: CouplingForm,
}

/// Displacement along the probe's time row.
pub struct WaveModel {
    scenario: WaveScenario,
    cache: BasisCache,
    level: usize,
    row: Vec<usize>,
    probe: usize,
}

impl WaveModel {
    pub fn new(scenario: WaveScenario, probe: (f64, f64)) -> Result<Self> {
        if !(scenario.rho > 0.0) || !(scenario.modulus > 0.0) || !(scenario.modulus_floor > 0.0) {
            return Err(Error::Material("density, modulus and modulus floor must be positive".into()));
        }
        let k = scenario.grid.region.kappa();
        let cache = BasisCache::new(Interval::new(-k, k)?, scenario.terms);
        let (level, row, probe) = probe_row(&scenario.grid.grid()?, &scenario.grid.region, probe)?;
        Ok(Self { scenario, cache, level, row, probe })
    }

    pub fn material(&self, ell: f64, draw: &[f64]) -> Result<WaveMaterial> {
        use crate::field::ConstantField;
        let s = &self.scenario;
        let modulus: Arc<dyn SpatialField> = if s.sigma == 0.0 {
            Arc::new(ConstantField(s.modulus))
        } else {
            let c = s.grid.region.speed();
            Arc::new(CutoffField {
                mean: s.modulus,
                field: Arc::new(TabulatedField::from_kl(&self.cache.field(ell, draw, s.sigma)?)?),
                floor: s.modulus_floor,
                ceiling: c * c * s.rho,
            })
        };
        Ok(WaveMaterial { rho: Arc::new(ConstantField(s.rho)), modulus, load: s.load.clone() })
    }

    /// Characteristic components and reconstructed displacement (row-major).
    pub fn solve(&self, ell: f64, draw: &[f64]) -> Result<(GridSolution2D, Vec<f64>)> {
        let s = &self.scenario;
        let system = wave_to_system(&self.material(ell, draw)?, &s.grid.region, s.coupling)?;
        let init = wave_initial_data(&system, s.slope.clone(), s.velocity.clone());
        let sol = solve_2x2_system(&system, init, &s.grid.region, &s.grid.grid()?, &s.grid.settings)?;
        let u = reconstruct_displacement(&sol, s.displacement.as_ref());
        Ok((sol, u))
    }

    pub fn row_x(&self) -> Result<Vec<f64>> {
        let g = self.scenario.grid.grid()?;
        Ok(self.row.iter().map(|&i| g.xs()[i]).collect())
    }
}

impl Model for WaveModel {
    fn draw_len(&self) -> usize {
        if self.scenario.sigma == 0.0 {
            0
        } else {
            2 * self.scenario.terms
        }
    }

    fn output_len(&self) -> usize {
        self.row.len()
    }

    fn evaluate(&self, lambda: &[f64], draw: &[f64]) -> Result<Vec<f64>> {
        let (sol, u) = self.solve(ell_of(lambda)?, draw)?;
        Ok(self.row.iter().map(|&i| u[self.level * sol.nx() + i]).collect())
    }

    fn primary(&self) -> usize {
        self.probe
    }
}
