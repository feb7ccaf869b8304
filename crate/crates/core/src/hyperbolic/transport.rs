//! Scalar transport `u_t + a u_x = f u + g` by characteristics and Picard iteration.
//!
//! Every grid node `(x_i, t_j)` is traced back to `t = 0` once. The integral
//! equation along the characteristic is then iterated on the whole space-time
//! grid: the current iterate is interpolated linearly in `x` at the foot
//! points on each time level, and the time integral uses a fourth-order
//! composite Simpson rule on the levels `t_0, ..., t_j`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hyperbolic::characteristic::{rk4_step, SpaceFn, SpaceTimeFn};
use crate::hyperbolic::region::DeterminacyRegion;

#[derive(Clone)]
pub struct TransportCoefficients {
    pub speed: SpaceTimeFn,
    pub reaction: SpaceTimeFn,
    pub source: SpaceTimeFn,
    pub initial: SpaceFn,
}

impl TransportCoefficients {
    pub fn constant(speed: f64, reaction: f64, source: f64, initial: SpaceFn) -> Self {
        Self {
            speed: Arc::new(move |_, _| speed),
            reaction: Arc::new(move |_, _| reaction),
            source: Arc::new(move |_, _| source),
            initial,
        }
    }
}

/// Uniform space-time grid with `ts[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    xs: Vec<f64>,
    ts: Vec<f64>,
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

impl SpaceTimeGrid {
    pub fn new(x_lo: f64, x_hi: f64, nx: usize, horizon: f64, nt: usize) -> Result<Self> {
        if nx < 2 || nt < 2 || !(x_hi > x_lo) || !(horizon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "space-time grid needs nx, nt >= 2 and positive extents (got {nx} x {nt})"
            )));
        }
        Ok(Self { xs: uniform(x_lo, x_hi, nx), ts: uniform(0.0, horizon, nt) })
    }

    /// Grid spanning `[-kappa, kappa] x [0, T]` of the region.
    pub fn covering(region: &DeterminacyRegion, nx: usize, nt: usize) -> Result<Self> {
        Self::new(-region.kappa(), region.kappa(), nx, region.horizon(), nt)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn dx(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    pub fn dt(&self) -> f64 {
        self.ts[1] - self.ts[0]
    }

    /// Nearest grid indices `(i, j)` to `(x, t)`.
    pub fn nearest(&self, x: f64, t: f64) -> (usize, usize) {
        let i = ((x - self.xs[0]) / self.dx()).round().clamp(0.0, (self.xs.len() - 1) as f64) as usize;
        let j = (t / self.dt()).round().clamp(0.0, (self.ts.len() - 1) as f64) as usize;
        (i, j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardSettings {
    pub tol: f64,
    pub max_sweeps: usize,
    /// Runge-Kutta step; defaults to `min(dx, dt) / 2`.
    pub step: Option<f64>,
}

impl Default for PicardSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_sweeps: 100, step: None }
    }
}

/// Solution components on the grid, stored row-major by time level.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution2D {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    /// Whether each node lies in the determinacy region.
    pub inside: Vec<bool>,
    pub sweeps: usize,
    /// Sup-norm change of each Picard sweep.
    pub changes: Vec<f64>,
}

impl GridSolution2D {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn nt(&self) -> usize {
        self.ts.len()
    }

    pub fn value(&self, component: usize, i: usize, j: usize) -> f64 {
        self.components[component][j * self.xs.len() + i]
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.inside[j * self.xs.len() + i]
    }
}

/// Quadrature weights on levels `0..=j` with spacing `dt`.
///
/// Simpson for even `j`, Simpson 3/8 on the first three panels plus Simpson
/// for odd `j >= 3`, trapezoid for `j = 1`.
pub(crate) fn level_weights(j: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![0.0; j + 1];
    match j {
        0 => {}
        1 => {
            w[0] = 0.5 * dt;
            w[1] = 0.5 * dt;
        }
        _ => {
            let start = if j % 2 == 1 {
                for (k, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[k] += 3.0 * dt / 8.0 * c;
                }
                3
            } else {
                0
            };
            let mut k = start;
            while k + 2 <= j {
                w[k] += dt / 3.0;
                w[k + 1] += 4.0 * dt / 3.0;
                w[k + 2] += dt / 3.0;
                k += 2;
            }
        }
    }
    w
}

/// Foot-point data of one characteristic family on the grid.
pub(crate) struct Tabulation {
    // per node: range into the entry arrays
    start: Vec<usize>,
    // entries for levels m >= 1 with nonzero reaction weight
    level: Vec<u32>,
    cell: Vec<u32>,
    w_left: Vec<f64>,
    w_right: Vec<f64>,
    /// Contribution independent of the iterate.
    pub(crate) base: Vec<f64>,
}

/// Everything a family needs at the foot points.
pub(crate) struct FamilyInput<'a> {
    pub speed: &'a (dyn Fn(f64, f64) -> f64 + Send + Sync),
    pub reaction: &'a (dyn Fn(f64, f64) -> f64 + Send + Sync),
    pub source: &'a (dyn Fn(f64, f64) -> f64 + Send + Sync),
    /// Iterate-independent value at the foot on level 0 (initial datum).
    pub initial: &'a (dyn Fn(f64) -> f64 + Send + Sync),
    /// Driver of the reaction term on level 0, known exactly from initial data.
    pub driver_initial: &'a (dyn Fn(f64) -> f64 + Send + Sync),
}

fn locate(xs: &[f64], p: f64) -> (usize, f64) {
    let n = xs.len();
    let dx = xs[1] - xs[0];
    let s = (p - xs[0]) / dx;
    if s <= 0.0 {
        (0, 0.0)
    } else if s >= (n - 1) as f64 {
        (n - 2, 1.0)
    } else {
        let i = (s.floor() as usize).min(n - 2);
        (i, s - i as f64)
    }
}

pub(crate) fn tabulate(
    grid: &SpaceTimeGrid,
    region: &DeterminacyRegion,
    input: &FamilyInput<'_>,
    step: f64,
) -> Result<Tabulation> {
    let (xs, ts) = (grid.xs(), grid.ts());
    let (nx, nt) = (xs.len(), ts.len());
    let dt = grid.dt();
    let substeps = (dt / step).ceil().max(1.0) as usize;
    let weights: Vec<Vec<f64>> = (0..nt).map(|j| level_weights(j, dt)).collect();

    let mut start = Vec::with_capacity(nx * nt + 1);
    let mut level = Vec::new();
    let mut cell = Vec::new();
    let mut w_left = Vec::new();
    let mut w_right = Vec::new();
    let mut base = vec![0.0; nx * nt];
    let mut feet = vec![0.0; nt];

    for j in 0..nt {
        for i in 0..nx {
            start.push(level.len());
            let node = j * nx + i;
            let inside = region.contains(xs[i], ts[j]);
            feet[j] = xs[i];
            for m in (0..j).rev() {
                let h = (ts[m] - ts[m + 1]) / substeps as f64;
                let mut g = feet[m + 1];
                for s in 0..substeps {
                    g = rk4_step(input.speed, g, ts[m + 1] + h * s as f64, h);
                }
                feet[m] = g;
                if inside && !region.contains_with_slack(g, ts[m], 1e-9) {
                    return Err(Error::CharacteristicExit { x: xs[i], t: ts[j], tau: ts[m] });
                }
            }
            let w = &weights[j];
            let x0 = feet[0];
            let mut b = (input.initial)(x0);
            if j > 0 {
                b += w[0] * ((input.reaction)(x0, 0.0) * (input.driver_initial)(x0) + (input.source)(x0, 0.0));
            }
            for m in 1..=j {
                let (p, tau) = (feet[m], ts[m]);
                b += w[m] * (input.source)(p, tau);
                let coef = w[m] * (input.reaction)(p, tau);
                if coef != 0.0 {
                    let (c, frac) = locate(xs, p);
                    level.push(m as u32);
                    cell.push(c as u32);
                    w_left.push(coef * (1.0 - frac));
                    w_right.push(coef * frac);
                }
            }
            base[node] = b;
        }
    }
    start.push(level.len());
    Ok(Tabulation { start, level, cell, w_left, w_right, base })
}

impl Tabulation {
    /// `base + sum coef * driver(foot)` for every node.
    pub(crate) fn apply(&self, nx: usize, driver: &[f64], out: &mut [f64]) {
        for (node, o) in out.iter_mut().enumerate() {
            let mut v = self.base[node];
            for e in self.start[node]..self.start[node + 1] {
                let row = self.level[e] as usize * nx + self.cell[e] as usize;
                v += self.w_left[e] * driver[row] + self.w_right[e] * driver[row + 1];
            }
            *o = v;
        }
    }

    pub(crate) fn has_coupling(&self) -> bool {
        !self.level.is_empty()
    }
}

/// Verifies `|a| <= c` on a probe grid ten times finer than the solution grid.
pub(crate) fn check_speed_bound(
    speed: &dyn Fn(f64, f64) -> f64,
    grid: &SpaceTimeGrid,
    region: &DeterminacyRegion,
) -> Result<()> {
    let (nx, nt) = (10 * (grid.xs().len() - 1) + 1, 10 * (grid.ts().len() - 1) + 1);
    let (x0, x1) = (grid.xs()[0], *grid.xs().last().expect("grid is nonempty"));
    let t1 = *grid.ts().last().expect("grid is nonempty");
    let bound = region.speed() * (1.0 + 1e-12) + 1e-15;
    for j in 0..nt {
        let t = t1 * j as f64 / (nt - 1) as f64;
        for i in 0..nx {
            let x = x0 + (x1 - x0) * i as f64 / (nx - 1) as f64;
            let a = speed(x, t);
            if !(a.abs() <= bound) {
                return Err(Error::CoefficientBound(format!(
                    "transport speed {a} at ({x}, {t}) exceeds the bound {}",
                    region.speed()
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn inside_mask(grid: &SpaceTimeGrid, region: &DeterminacyRegion) -> Vec<bool> {
    grid.ts()
        .iter()
        .flat_map(|&t| grid.xs().iter().map(move |&x| region.contains(x, t)))
        .collect()
}

pub(crate) fn default_step(grid: &SpaceTimeGrid, settings: &PicardSettings) -> f64 {
    settings.step.unwrap_or(0.5 * grid.dx().min(grid.dt()))
}

fn sup_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Solves the transport problem on `grid`, flagging nodes inside `region`.
pub fn solve_transport(
    coeffs: &TransportCoefficients,
    region: &DeterminacyRegion,
    grid: &SpaceTimeGrid,
    settings: &PicardSettings,
) -> Result<GridSolution2D> {
    check_speed_bound(coeffs.speed.as_ref(), grid, region)?;
    let input = FamilyInput {
        speed: coeffs.speed.as_ref(),
        reaction: coeffs.reaction.as_ref(),
        source: coeffs.source.as_ref(),
        initial: coeffs.initial.as_ref(),
        driver_initial: coeffs.initial.as_ref(),
    };
    let tab = tabulate(grid, region, &input, default_step(grid, settings))?;
    let nx = grid.xs().len();
    let mut u = tab.base.clone();
    let mut next = vec![0.0; u.len()];
    let mut changes = Vec::new();
    loop {
        tab.apply(nx, &u, &mut next);
        let change = sup_change(&next, &u);
        std::mem::swap(&mut u, &mut next);
        changes.push(change);
        if change <= settings.tol || !tab.has_coupling() {
            break;
        }
        if changes.len() >= settings.max_sweeps {
            return Err(Error::PicardNonConvergence { sweeps: changes.len(), change });
        }
    }
    Ok(GridSolution2D {
        xs: grid.xs().to_vec(),
        ts: grid.ts().to_vec(),
        components: vec![u],
        inside: inside_mask(grid, region),
        sweeps: changes.len(),
        changes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::region::domain_of_determinacy;
    use std::f64::consts::PI;

    fn max_inside_error(sol: &GridSolution2D, exact: impl Fn(f64, f64) -> f64) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..sol.nt() {
            for i in 0..sol.nx() {
                if sol.is_inside(i, j) {
                    worst = worst.max((sol.value(0, i, j) - exact(sol.xs[i], sol.ts[j])).abs());
                }
            }
        }
        worst
    }

    #[test]
    fn weights_integrate_polynomials() {
        for j in 1..9 {
            let dt = 0.1;
            let w = level_weights(j, dt);
            let t_end = j as f64 * dt;
            let quad = |p: i32| w.iter().enumerate().map(|(m, wm)| wm * (m as f64 * dt).powi(p)).sum::<f64>();
            assert!((quad(0) - t_end).abs() < 1e-14);
            assert!((quad(1) - t_end * t_end / 2.0).abs() < 1e-14);
            if j >= 2 {
                assert!((quad(3) - t_end.powi(4) / 4.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn translation_solution() {
        let region = domain_of_determinacy(1.0, 0.4, 1.0).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 201, 201).unwrap();
        let coeffs = TransportCoefficients::constant(1.0, 0.0, 0.0, Arc::new(|x| (PI * x).sin()));
        let sol = solve_transport(&coeffs, &region, &grid, &PicardSettings::default()).unwrap();
        assert!(max_inside_error(&sol, |x, t| (PI * (x - t)).sin()) <= 1e-6);
    }

    #[test]
    fn pointwise_growth() {
        let region = domain_of_determinacy(1.0, 0.4, 0.0).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 21, 201).unwrap();
        let lambda = 1.5;
        let coeffs = TransportCoefficients::constant(0.0, lambda, 0.0, Arc::new(|x| 1.0 + x * x));
        let sol = solve_transport(&coeffs, &region, &grid, &PicardSettings::default()).unwrap();
        for j in 0..sol.nt() {
            for i in 0..sol.nx() {
                let exact = (1.0 + sol.xs[i].powi(2)) * (lambda * sol.ts[j]).exp();
                assert!(((sol.value(0, i, j) - exact) / exact).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn constant_source() {
        let region = domain_of_determinacy(1.0, 0.4, 0.0).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 11, 41).unwrap();
        let coeffs = TransportCoefficients::constant(0.0, 0.0, 1.0, Arc::new(|x| x.cos()));
        let sol = solve_transport(&coeffs, &region, &grid, &PicardSettings::default()).unwrap();
        assert!(max_inside_error(&sol, |x, t| x.cos() + t) < 1e-14);
    }

    #[test]
    fn initial_row_is_initial_data() {
        let region = domain_of_determinacy(1.0, 0.4, 1.0).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 41, 21).unwrap();
        let coeffs = TransportCoefficients {
            speed: Arc::new(|x, t| 0.8 * (x + t).sin()),
            reaction: Arc::new(|x, _| 0.5 * x),
            source: Arc::new(|_, t| t),
            initial: Arc::new(|x| (-x * x).exp()),
        };
        let sol = solve_transport(&coeffs, &region, &grid, &PicardSettings::default()).unwrap();
        for i in 0..sol.nx() {
            assert_eq!(sol.value(0, i, 0), (-sol.xs[i].powi(2)).exp());
        }
        assert!(sol.components[0].iter().all(|v| v.is_finite()));
    }

    #[test]
    fn speed_bound_violation_is_an_error() {
        let region = domain_of_determinacy(1.0, 0.4, 0.5).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 11, 11).unwrap();
        let coeffs = TransportCoefficients::constant(0.8, 0.0, 0.0, Arc::new(|x| x));
        assert!(matches!(
            solve_transport(&coeffs, &region, &grid, &PicardSettings::default()),
            Err(Error::CoefficientBound(_))
        ));
    }

    #[test]
    fn non_convergence_is_reported() {
        let region = domain_of_determinacy(1.0, 0.4, 0.0).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 11, 41).unwrap();
        let coeffs = TransportCoefficients::constant(0.0, 2.0, 0.0, Arc::new(|_| 1.0));
        let settings = PicardSettings { max_sweeps: 3, ..Default::default() };
        assert!(matches!(
            solve_transport(&coeffs, &region, &grid, &settings),
            Err(Error::PicardNonConvergence { sweeps: 3, .. })
        ));
    }

    #[test]
    fn picard_contracts() {
        let region = domain_of_determinacy(1.0, 0.5, 0.0).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 11, 51).unwrap();
        let f_sup = 1.6;
        let coeffs = TransportCoefficients {
            speed: Arc::new(|_, _| 0.0),
            reaction: Arc::new(move |x, _| f_sup * x.cos()),
            source: Arc::new(|_, _| 0.0),
            initial: Arc::new(|x| 1.0 + x),
        };
        let sol = solve_transport(&coeffs, &region, &grid, &PicardSettings::default()).unwrap();
        let bound = region.horizon() * f_sup;
        assert!(bound < 1.0);
        for w in sol.changes.windows(2) {
            if w[1] > 1e-13 {
                assert!(w[1] / w[0] <= bound, "{:?}", sol.changes);
            }
        }
    }

    fn bump(s: f64) -> impl Fn(f64) -> f64 + Send + Sync + Copy {
        move |x: f64| if x.abs() < s { (1.0 - (x / s).powi(2)).powi(3) } else { 0.0 }
    }

    #[test]
    fn finite_propagation_speed() {
        let (s, c) = (0.2, 0.6);
        let region = domain_of_determinacy(1.5, 0.8, c).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 151, 81).unwrap();
        let coeffs = TransportCoefficients {
            speed: Arc::new(move |x, t| c * (2.0 * x + t).sin()),
            reaction: Arc::new(|_, _| 0.0),
            source: Arc::new(|_, _| 0.0),
            initial: Arc::new(bump(s)),
        };
        let sol = solve_transport(&coeffs, &region, &grid, &PicardSettings::default()).unwrap();
        for j in 0..sol.nt() {
            for i in 0..sol.nx() {
                if sol.is_inside(i, j) && sol.xs[i].abs() > s + c * sol.ts[j] {
                    assert!(sol.value(0, i, j).abs() <= 1e-8);
                }
            }
        }

        // with a reaction term and feet landing on nodes, the support bound still holds
        let region = domain_of_determinacy(1.0, 0.5, 1.0).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 101, 26).unwrap();
        let coeffs = TransportCoefficients::constant(1.0, 0.7, 0.0, Arc::new(bump(s)));
        let sol = solve_transport(&coeffs, &region, &grid, &PicardSettings::default()).unwrap();
        for j in 0..sol.nt() {
            for i in 0..sol.nx() {
                if sol.is_inside(i, j) && (sol.xs[i] - sol.ts[j]).abs() > s + 1e-9 {
                    assert!(sol.value(0, i, j).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn determinacy_ignores_data_outside_base() {
        let region = domain_of_determinacy(1.0, 0.5, 1.0).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 81, 41).unwrap();
        let make = |outside: f64| TransportCoefficients {
            speed: Arc::new(|x, t| 0.9 * (x - t).cos()),
            reaction: Arc::new(|_, _| 0.0),
            source: Arc::new(|x, _| x),
            initial: Arc::new(move |x| if x.abs() > 1.0 { outside } else { x.sin() }),
        };
        let a = solve_transport(&make(0.0), &region, &grid, &PicardSettings::default()).unwrap();
        let b = solve_transport(&make(5.0), &region, &grid, &PicardSettings::default()).unwrap();
        for j in 0..a.nt() {
            for i in 0..a.nx() {
                if a.is_inside(i, j) {
                    assert!((a.value(0, i, j) - b.value(0, i, j)).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn continuous_in_speed() {
        let region = domain_of_determinacy(1.0, 0.4, 1.0).unwrap();
        let grid = SpaceTimeGrid::covering(&region, 81, 41).unwrap();
        let solve = |delta: f64| {
            let coeffs = TransportCoefficients {
                speed: Arc::new(move |x, _| 0.5 * x.sin() + delta * x.cos()),
                reaction: Arc::new(|_, _| 0.3),
                source: Arc::new(|_, _| 0.0),
                initial: Arc::new(|x| (2.0 * x).cos()),
            };
            solve_transport(&coeffs, &region, &grid, &PicardSettings::default()).unwrap()
        };
        let base = solve(0.0);
        let mut last = f64::INFINITY;
        for delta in [1e-2, 1e-3, 1e-4] {
            let s = solve(delta);
            let diff = base.components[0]
                .iter()
                .zip(&s.components[0])
                .zip(&base.inside)
                .filter(|(_, inside)| **inside)
                .map(|((a, b), _)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff < last);
            last = diff;
        }
    }
}
