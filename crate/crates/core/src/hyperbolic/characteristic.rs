use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hyperbolic::region::DeterminacyRegion;

/// Coefficient depending on space and time.
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Function of space only (initial data).
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Characteristic curve `tau -> gamma(x, t, tau)` sampled from `tau = t` to the target time.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicCurve {
    pub x: f64,
    pub t: f64,
    pub taus: Vec<f64>,
    pub positions: Vec<f64>,
}

impl CharacteristicCurve {
    /// Position at the last sampled time.
    pub fn end(&self) -> f64 {
        *self.positions.last().expect("curve holds its base point")
    }
}

#[inline]
pub(crate) fn rk4_step(speed: &dyn Fn(f64, f64) -> f64, gamma: f64, tau: f64, dtau: f64) -> f64 {
    let k1 = speed(gamma, tau);
    let k2 = speed(gamma + 0.5 * dtau * k1, tau + 0.5 * dtau);
    let k3 = speed(gamma + 0.5 * dtau * k2, tau + 0.5 * dtau);
    let k4 = speed(gamma + dtau * k3, tau + dtau);
    gamma + dtau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates `d gamma / d tau = a(gamma, tau)`, `gamma(t) = x`, from `tau = t` to `target`
/// with classical fourth-order Runge-Kutta steps no longer than `h`.
///
/// With a region, the curve must stay inside it (to a small slack).
pub fn trace_characteristic(
    speed: &dyn Fn(f64, f64) -> f64,
    x: f64,
    t: f64,
    target: f64,
    h: f64,
    region: Option<&DeterminacyRegion>,
) -> Result<CharacteristicCurve> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step must be positive, got {h}")));
    }
    if let Some(r) = region {
        if !r.contains_with_slack(x, t, 1e-12) {
            return Err(Error::Domain(format!("({x}, {t}) is outside the determinacy region")));
        }
    }
    let span = target - t;
    let steps = (span.abs() / h).ceil().max(if span == 0.0 { 0.0 } else { 1.0 }) as usize;
    let mut taus = Vec::with_capacity(steps + 1);
    let mut positions = Vec::with_capacity(steps + 1);
    taus.push(t);
    positions.push(x);
    let mut gamma = x;
    for s in 0..steps {
        let tau = t + span * s as f64 / steps as f64;
        let next = if s + 1 == steps { target } else { t + span * (s + 1) as f64 / steps as f64 };
        gamma = rk4_step(speed, gamma, tau, next - tau);
        if let Some(r) = region {
            if !r.contains_with_slack(gamma, next, 1e-9) {
                return Err(Error::CharacteristicExit { x, t, tau: next });
            }
        }
        taus.push(next);
        positions.push(gamma);
    }
    Ok(CharacteristicCurve { x, t, taus, positions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::region::domain_of_determinacy;

    #[test]
    fn constant_speed_is_exact() {
        let c = trace_characteristic(&|_, _| 0.7, 0.2, 0.5, 0.0, 0.01, None).unwrap();
        assert!((c.end() - (0.2 + 0.7 * (0.0 - 0.5))).abs() < 1e-14);
        for (tau, p) in c.taus.iter().zip(&c.positions) {
            assert!((p - (0.2 + 0.7 * (tau - 0.5))).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_speed_matches_exponential() {
        let (x, t) = (0.3, 0.8);
        let c = trace_characteristic(&|g, _| g, x, t, 0.0, 1e-3, None).unwrap();
        let worst = c
            .taus
            .iter()
            .zip(&c.positions)
            .map(|(tau, p)| (p - x * (tau - t).exp()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn base_point_is_exact() {
        let c = trace_characteristic(&|g, tau| (g * tau).sin(), 0.123, 0.4, 0.4, 0.1, None).unwrap();
        assert_eq!(c.positions, vec![0.123]);
        let c = trace_characteristic(&|g, tau| (g * tau).sin(), 0.123, 0.4, 0.0, 0.1, None).unwrap();
        assert_eq!(c.positions[0], 0.123);
    }

    #[test]
    fn forward_then_backward_returns() {
        let a = |g: f64, tau: f64| 0.5 * (3.0 * g + tau).sin();
        let fwd = trace_characteristic(&a, 0.1, 0.0, 0.6, 1e-3, None).unwrap();
        let back = trace_characteristic(&a, fwd.end(), 0.6, 0.0, 1e-3, None).unwrap();
        assert!((back.end() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn region_exit_is_reported() {
        let r = domain_of_determinacy(1.0, 0.5, 1.0).unwrap();
        // speed -3 violates the bound c = 1
        let res = trace_characteristic(&|_, _| -3.0, 0.4, 0.4, 0.0, 0.01, Some(&r));
        assert!(matches!(res, Err(Error::CharacteristicExit { .. })));
        assert!(trace_characteristic(&|_, _| 1.0, 0.4, 0.4, 0.0, 0.01, Some(&r)).is_ok());
    }
}
