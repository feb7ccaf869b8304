//! Longitudinal rod waves `rho u_tt - (E u_x)_x = q` as a 2x2 characteristic system.
//!
//! With `a = sqrt(E / rho)`, `u1 = u_t - a u_x` and `u2 = u_t + a u_x` satisfy
//! `(d_t + a d_x) u1 = F (u2 - u1) + g` and `(d_t - a d_x) u2 = F (u2 - u1) + g`
//! with `g = q / rho`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpatialField;
use crate::hyperbolic::characteristic::{SpaceFn, SpaceTimeFn};
use crate::hyperbolic::region::DeterminacyRegion;
use crate::hyperbolic::transport::{
    check_speed_bound, default_step, inside_mask, level_weights, tabulate, FamilyInput, GridSolution2D,
    PicardSettings, SpaceTimeGrid,
};

#[derive(Clone)]
pub struct WaveMaterial {
    pub rho: Arc<dyn SpatialField>,
    pub modulus: Arc<dyn SpatialField>,
    pub load: SpaceTimeFn,
}

/// Which expression is used for the coupling coefficient `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    /// `F = (E_x / rho - a a_x) / (2 a)`, obtained by differentiating the
    /// characteristic variables. Reduces to `E_x / (4 rho a)` for constant `rho`.
    #[default]
    Consistent,
    /// `F = E_x / rho - a_x / 2` as printed alongside the system.
    Literal,
}

/// Coefficients `a(x)`, `F(x, t)`, `g(x, t)` of the 2x2 system.
#[derive(Clone)]
pub struct WaveSystem {
    pub speed: SpaceTimeFn,
    pub coupling: SpaceTimeFn,
    pub source: SpaceTimeFn,
}

const MATERIAL_PROBES: usize = 1001;

/// Derives the system coefficients, checking `rho, E > 0` on a probe grid over the region base.
pub fn wave_to_system(mat: &WaveMaterial, region: &DeterminacyRegion, form: CouplingForm) -> Result<WaveSystem> {
    let k = region.kappa();
    for p in 0..MATERIAL_PROBES {
        let x = -k + 2.0 * k * p as f64 / (MATERIAL_PROBES - 1) as f64;
        let (rho, e) = (mat.rho.value(x), mat.modulus.value(x));
        if !(rho > 0.0) || !(e > 0.0) || !rho.is_finite() || !e.is_finite() {
            return Err(Error::Material(format!("density {rho} and modulus {e} at x = {x} must be positive")));
        }
    }
    let (rho, modulus) = (mat.rho.clone(), mat.modulus.clone());
    let speed: SpaceTimeFn = {
        let (rho, modulus) = (rho.clone(), modulus.clone());
        Arc::new(move |x, _| (modulus.value(x) / rho.value(x)).sqrt())
    };
    let coupling: SpaceTimeFn = Arc::new(move |x, _| {
        let (r, rx) = (rho.value(x), rho.derivative(x));
        let (e, ex) = (modulus.value(x), modulus.derivative(x));
        let a = (e / r).sqrt();
        // a a_x = (E_x rho - E rho_x) / (2 rho^2)
        let a_ax = (ex * r - e * rx) / (2.0 * r * r);
        match form {
            CouplingForm::Consistent => (ex / r - a_ax) / (2.0 * a),
            CouplingForm::Literal => ex / r - a_ax / (2.0 * a),
        }
    });
    let (rho, load) = (mat.rho.clone(), mat.load.clone());
    let source: SpaceTimeFn = Arc::new(move |x, t| load(x, t) / rho.value(x));
    Ok(WaveSystem { speed, coupling, source })
}

/// Initial data `u01 = v - a w'`, `u02 = v + a w'` from displacement slope and velocity.
pub fn wave_initial_data(system: &WaveSystem, slope: SpaceFn, velocity: SpaceFn) -> (SpaceFn, SpaceFn) {
    let (a1, s1, v1) = (system.speed.clone(), slope.clone(), velocity.clone());
    let u01: SpaceFn = Arc::new(move |x| v1(x) - a1(x, 0.0) * s1(x));
    let (a2, s2, v2) = (system.speed.clone(), slope, velocity);
    let u02: SpaceFn = Arc::new(move |x| v2(x) + a2(x, 0.0) * s2(x));
    (u01, u02)
}

/// Solves the coupled system: `u1` along `+a`, `u2` along `-a` characteristics.
pub fn solve_2x2_system(
    system: &WaveSystem,
    initial: (SpaceFn, SpaceFn),
    region: &DeterminacyRegion,
    grid: &SpaceTimeGrid,
    settings: &PicardSettings,
) -> Result<GridSolution2D> {
    check_speed_bound(system.speed.as_ref(), grid, region)?;
    let (u01, u02) = initial;
    let d0 = {
        let (u01, u02) = (u01.clone(), u02.clone());
        move |x: f64| u02(x) - u01(x)
    };
    let speed = system.speed.clone();
    let backward = move |x: f64, t: f64| -speed(x, t);
    let step = default_step(grid, settings);
    let forward_input = FamilyInput {
        speed: system.speed.as_ref(),
        reaction: system.coupling.as_ref(),
        source: system.source.as_ref(),
        initial: u01.as_ref(),
        driver_initial: &d0,
    };
    let backward_input = FamilyInput {
        speed: &backward,
        reaction: system.coupling.as_ref(),
        source: system.source.as_ref(),
        initial: u02.as_ref(),
        driver_initial: &d0,
    };
    let tab1 = tabulate(grid, region, &forward_input, step)?;
    let tab2 = tabulate(grid, region, &backward_input, step)?;
    let nx = grid.xs().len();
    let (mut u1, mut u2) = (tab1.base.clone(), tab2.base.clone());
    let (mut n1, mut n2) = (vec![0.0; u1.len()], vec![0.0; u2.len()]);
    let mut driver = vec![0.0; u1.len()];
    let mut changes = Vec::new();
    let coupled = tab1.has_coupling() || tab2.has_coupling();
    loop {
        for ((d, a), b) in driver.iter_mut().zip(&u1).zip(&u2) {
            *d = b - a;
        }
        tab1.apply(nx, &driver, &mut n1);
        tab2.apply(nx, &driver, &mut n2);
        let change = n1
            .iter()
            .zip(&u1)
            .chain(n2.iter().zip(&u2))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut u1, &mut n1);
        std::mem::swap(&mut u2, &mut n2);
        changes.push(change);
        if change <= settings.tol || !coupled {
            break;
        }
        if changes.len() >= settings.max_sweeps {
            return Err(Error::PicardNonConvergence { sweeps: changes.len(), change });
        }
    }
    Ok(GridSolution2D {
        xs: grid.xs().to_vec(),
        ts: grid.ts().to_vec(),
        components: vec![u1, u2],
        inside: inside_mask(grid, region),
        sweeps: changes.len(),
        changes,
    })
}

/// Displacement `u(x, t) = w(x) + int_0^t (u1 + u2) / 2` on the solution grid, row-major.
pub fn reconstruct_displacement(sol: &GridSolution2D, displacement: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let (nx, nt) = (sol.nx(), sol.nt());
    let dt = sol.ts[1] - sol.ts[0];
    let mut out = vec![0.0; nx * nt];
    for i in 0..nx {
        let w0 = displacement(sol.xs[i]);
        let rate: Vec<f64> = (0..nt).map(|j| 0.5 * (sol.value(0, i, j) + sol.value(1, i, j))).collect();
        for j in 0..nt {
            let w = level_weights(j, dt);
            out[j * nx + i] = w0 + w.iter().zip(&rate).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ConstantField;
    use crate::hyperbolic::region::domain_of_determinacy;

    struct Affine(f64, f64);

    impl SpatialField for Affine {
        fn value(&self, x: f64) -> f64 {
            self.0 + self.1 * x
        }
        fn derivative(&self, _x: f64) -> f64 {
            self.1
        }
    }

    fn material(rho: Arc<dyn SpatialField>, modulus: Arc<dyn SpatialField>) -> WaveMaterial {
        WaveMaterial { rho, modulus, load: Arc::new(|x, t| x * t) }
    }

    #[test]
    fn unit_material() {
        let r = domain_of_determinacy(1.0, 0.4, 1.0).unwrap();
        let m = material(Arc::new(ConstantField(1.0)), Arc::new(ConstantField(1.0)));
        let s = wave_to_system(&m, &r, CouplingForm::Consistent).unwrap();
        for x in [-0.7, 0.0, 0.3] {
            assert_eq!((s.speed)(x, 0.1), 1.0);
            assert_eq!((s.coupling)(x, 0.1), 0.0);
            assert_eq!((s.source)(x, 0.2), x * 0.2);
        }
        let m = material(Arc::new(ConstantField(1.0)), Arc::new(ConstantField(4.0)));
        let s = wave_to_system(&m, &r, CouplingForm::Literal).unwrap();
        assert_eq!((s.speed)(0.5, 0.0), 2.0);
        assert_eq!((s.coupling)(0.5, 0.0), 0.0);
    }

    #[test]
    fn affine_modulus_coupling() {
        let r = domain_of_determinacy(0.9, 0.1, 2.0).unwrap();
        let m = material(Arc::new(ConstantField(1.0)), Arc::new(Affine(1.0, 1.0)));
        let lit = wave_to_system(&m, &r, CouplingForm::Literal).unwrap();
        let con = wave_to_system(&m, &r, CouplingForm::Consistent).unwrap();
        for x in [-0.5f64, 0.0, 0.25, 0.8] {
            let s = (1.0 + x).sqrt();
            assert!(((lit.speed)(x, 0.0) - s).abs() < 1e-15);
            assert!(((lit.coupling)(x, 0.0) - (1.0 - 0.25 / s)).abs() < 1e-14);
            assert!(((con.coupling)(x, 0.0) - 0.25 / s).abs() < 1e-14);
        }
    }

    #[test]
    fn nonpositive_material_is_rejected() {
        let r = domain_of_determinacy(1.0, 0.4, 1.0).unwrap();
        let m = material(Arc::new(ConstantField(1.0)), Arc::new(Affine(0.5, 1.0)));
        assert!(matches!(wave_to_system(&m, &r, CouplingForm::Consistent), Err(Error::Material(_))));
        let m = material(Arc::new(ConstantField(0.0)), Arc::new(ConstantField(1.0)));
        assert!(matches!(wave_to_system(&m, &r, CouplingForm::Consistent), Err(Error::Material(_))));
    }

    #[test]
    fn dalembert() {
        let r = domain_of_determinacy(1.0, 0.4, 1.0).unwrap();
        let grid = SpaceTimeGrid::covering(&r, 201, 201).unwrap();
        let m = WaveMaterial {
            rho: Arc::new(ConstantField(1.0)),
            modulus: Arc::new(ConstantField(1.0)),
            load: Arc::new(|_, _| 0.0),
        };
        let s = wave_to_system(&m, &r, CouplingForm::Consistent).unwrap();
        let w = |x: f64| (-8.0 * x * x).exp();
        let slope: SpaceFn = Arc::new(move |x| -16.0 * x * w(x));
        let init = wave_initial_data(&s, slope, Arc::new(|_| 0.0));
        let sol = solve_2x2_system(&s, init, &r, &grid, &PicardSettings::default()).unwrap();
        let u = reconstruct_displacement(&sol, &w);
        let mut worst: f64 = 0.0;
        for j in 0..sol.nt() {
            for i in 0..sol.nx() {
                if sol.is_inside(i, j) {
                    let (x, t) = (sol.xs[i], sol.ts[j]);
                    worst = worst.max((u[j * sol.nx() + i] - 0.5 * (w(x - t) + w(x + t))).abs());
                }
            }
        }
        assert!(worst <= 1e-4, "{worst}");
    }

    #[test]
    fn constant_state_is_fixed() {
        let r = domain_of_determinacy(1.0, 0.4, 1.5).unwrap();
        let grid = SpaceTimeGrid::covering(&r, 41, 21).unwrap();
        let s = WaveSystem {
            speed: Arc::new(|x, _| 1.0 + 0.3 * x),
            coupling: Arc::new(|x, t| 2.0 * (x + t).cos()),
            source: Arc::new(|_, _| 0.0),
        };
        let init: (SpaceFn, SpaceFn) = (Arc::new(|_| 3.0), Arc::new(|_| 3.0));
        let sol = solve_2x2_system(&s, init, &r, &grid, &PicardSettings::default()).unwrap();
        for c in &sol.components {
            assert!(c.iter().all(|v| (v - 3.0).abs() < 1e-13));
        }
    }

    #[test]
    fn zero_coupling_decouples() {
        use crate::hyperbolic::transport::{solve_transport, TransportCoefficients};
        let r = domain_of_determinacy(1.0, 0.4, 1.0).unwrap();
        let grid = SpaceTimeGrid::covering(&r, 41, 21).unwrap();
        let a: SpaceTimeFn = Arc::new(|x, t| 0.6 + 0.3 * (x - t).sin());
        let g: SpaceTimeFn = Arc::new(|x, t| x - t);
        let s = WaveSystem { speed: a.clone(), coupling: Arc::new(|_, _| 0.0), source: g.clone() };
        let u01: SpaceFn = Arc::new(|x| x.cos());
        let u02: SpaceFn = Arc::new(|x| x * x);
        let sol = solve_2x2_system(&s, (u01.clone(), u02.clone()), &r, &grid, &PicardSettings::default()).unwrap();
        let zero: SpaceTimeFn = Arc::new(|_, _| 0.0);
        let neg = a.clone();
        let single = |speed: SpaceTimeFn, init: SpaceFn| {
            let c = TransportCoefficients { speed, reaction: zero.clone(), source: g.clone(), initial: init };
            solve_transport(&c, &r, &grid, &PicardSettings::default()).unwrap()
        };
        let t1 = single(a, u01);
        let t2 = single(Arc::new(move |x, t| -neg(x, t)), u02);
        assert_eq!(sol.components[0], t1.components[0]);
        assert_eq!(sol.components[1], t2.components[0]);
    }

    /// Manufactured rod solution `u = sin(2x) cos(1.5 t)` with `E = 1 + 0.3 x`.
    fn manufactured_error(form: CouplingForm) -> f64 {
        let r = domain_of_determinacy(1.0, 0.3, 1.2).unwrap();
        let grid = SpaceTimeGrid::covering(&r, 201, 101).unwrap();
        let m = WaveMaterial {
            rho: Arc::new(ConstantField(1.0)),
            modulus: Arc::new(Affine(1.0, 0.3)),
            load: Arc::new(|x, t| {
                (1.5 * t).cos()
                    * (-2.25 * (2.0 * x).sin() - 0.6 * (2.0 * x).cos() + 4.0 * (1.0 + 0.3 * x) * (2.0 * x).sin())
            }),
        };
        let s = wave_to_system(&m, &r, form).unwrap();
        let init = wave_initial_data(&s, Arc::new(|x| 2.0 * (2.0 * x).cos()), Arc::new(|_| 0.0));
        let sol = solve_2x2_system(&s, init, &r, &grid, &PicardSettings::default()).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..sol.nt() {
            for i in 0..sol.nx() {
                if !sol.is_inside(i, j) {
                    continue;
                }
                let (x, t) = (sol.xs[i], sol.ts[j]);
                let a = (1.0 + 0.3 * x).sqrt();
                let ut = -1.5 * (2.0 * x).sin() * (1.5 * t).sin();
                let ux = 2.0 * (2.0 * x).cos() * (1.5 * t).cos();
                worst = worst.max((sol.value(0, i, j) - (ut - a * ux)).abs());
                worst = worst.max((sol.value(1, i, j) - (ut + a * ux)).abs());
            }
        }
        worst
    }

    #[test]
    fn consistent_coupling_reproduces_rod_solution() {
        let consistent = manufactured_error(CouplingForm::Consistent);
        let literal = manufactured_error(CouplingForm::Literal);
        assert!(consistent < 1e-3, "{consistent}");
        assert!(literal > 100.0 * consistent, "{literal} vs {consistent}");
    }
}
