//! Ornstein-Uhlenbeck (Langevin) paths with exponential autocorrelation.
//!
//! The same standard-normal sequence drives paths for every correlation
//! length, which couples them on one probability space.

use crate::error::{Error, Result};
use crate::field::kl::ExpCovarianceParams;

#[derive(Debug, Clone, PartialEq)]
pub struct OuPath {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub params: ExpCovarianceParams,
    /// `(Z_0, ..., Z_n)`; `Z_0` sets the initial value.
    pub increments: Vec<f64>,
}

fn check_grid(xs: &[f64], noise: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidInput("OU grid is empty".into()));
    }
    if noise.len() != xs.len() {
        return Err(Error::InvalidInput(format!(
            "OU noise has {} entries for {} grid points",
            noise.len(),
            xs.len()
        )));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("OU grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Euler-Maruyama path `q_{i+1} = q_i - (dx/l) q_i + sigma sqrt(2 dx / l) Z_{i+1}`, `q_0 = sigma Z_0`.
///
/// Steps of half the correlation length or more are rejected.
pub fn sample_ou_path(params: &ExpCovarianceParams, xs: &[f64], noise: &[f64]) -> Result<OuPath> {
    check_grid(xs, noise)?;
    let ell = params.ell;
    let sigma = params.sigma;
    let mut values = Vec::with_capacity(xs.len());
    let mut q = sigma * noise[0];
    values.push(q);
    for i in 1..xs.len() {
        let dx = xs[i] - xs[i - 1];
        if dx >= 0.5 * ell {
            return Err(Error::StepSize { step: dx, ell });
        }
        q = q - dx / ell * q + sigma * (2.0 * dx / ell).sqrt() * noise[i];
        values.push(q);
    }
    Ok(OuPath {
        xs: xs.to_vec(),
        values,
        params: *params,
        increments: noise.to_vec(),
    })
}

/// Exact AR(1) transition `q_{i+1} = e^{-dx/l} q_i + sigma sqrt(1 - e^{-2dx/l}) Z_{i+1}`.
///
/// Exact in distribution for a fixed correlation length; used to validate the
/// Euler-Maruyama sampler.
pub fn sample_ou_path_exact(params: &ExpCovarianceParams, xs: &[f64], noise: &[f64]) -> Result<OuPath> {
    check_grid(xs, noise)?;
    let (ell, sigma) = (params.ell, params.sigma);
    let mut values = Vec::with_capacity(xs.len());
    let mut q = sigma * noise[0];
    values.push(q);
    for i in 1..xs.len() {
        let rho = (-(xs[i] - xs[i - 1]) / ell).exp();
        q = rho * q + sigma * (1.0 - rho * rho).sqrt() * noise[i];
        values.push(q);
    }
    Ok(OuPath {
        xs: xs.to_vec(),
        values,
        params: *params,
        increments: noise.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_set::Interval;
    use crate::rng::Substream;

    fn params(sigma: f64, ell: f64) -> ExpCovarianceParams {
        ExpCovarianceParams::new(sigma, ell, Interval::new(0.0, 1.0).unwrap()).unwrap()
    }

    fn grid(n: usize, dx: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dx).collect()
    }

    #[test]
    fn zero_sigma_gives_zero_path() {
        let noise = Substream::new(1, 0).standard_normals(50);
        let p = sample_ou_path(&params(0.0, 1.0), &grid(50, 0.01), &noise).unwrap();
        assert!(p.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_large_steps_and_bad_grids() {
        let noise = vec![0.0; 3];
        assert!(matches!(
            sample_ou_path(&params(1.0, 0.1), &[0.0, 0.05, 0.1], &noise),
            Err(Error::StepSize { .. })
        ));
        assert!(sample_ou_path(&params(1.0, 1.0), &[0.0, 0.2, 0.1], &noise).is_err());
        assert!(sample_ou_path(&params(1.0, 1.0), &[0.0, 0.1], &noise).is_err());
    }

    #[test]
    fn one_step_drift() {
        let (q0, dx, ell, sigma) = (0.8, 0.01, 1.0, 1.0);
        let p = params(sigma, ell);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for k in 0..n {
            let z = Substream::new(9, k).standard_normal();
            let path = sample_ou_path(&p, &[0.0, dx], &[q0 / sigma, z]).unwrap();
            sum += path.values[1];
            sum_sq += path.values[1].powi(2);
        }
        let nf = n as f64;
        let mean = sum / nf;
        let se = ((sum_sq / nf - mean * mean) / nf).sqrt();
        assert!((mean - q0 * (1.0 - dx / ell)).abs() <= 3.0 * se);
    }

    #[test]
    fn stationary_variance() {
        let n = 1_000_001;
        let noise = Substream::new(17, 0).standard_normals(n);
        let path = sample_ou_path(&params(1.0, 1.0), &grid(n, 0.01), &noise).unwrap();
        let nf = n as f64;
        let mean = path.values.iter().sum::<f64>() / nf;
        let var = path.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn shared_noise_replays_and_varies_continuously() {
        let xs = grid(301, 0.01);
        let noise = Substream::new(2, 0).standard_normals(xs.len());
        let a = sample_ou_path(&params(1.0, 0.8), &xs, &noise).unwrap();
        let b = sample_ou_path(&params(1.0, 0.8), &xs, &noise).unwrap();
        assert_eq!(a.values, b.values);

        let quotients: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|h| {
                let c = sample_ou_path(&params(1.0, 0.8 * (1.0 + h)), &xs, &noise).unwrap();
                a.values.iter().zip(&c.values).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max) / h
            })
            .collect();
        assert!(quotients.iter().all(|q| *q <= 2.0 * quotients[0] + 1.0), "{quotients:?}");
    }

    #[test]
    fn exact_transition_matches_kernel() {
        let xs = grid(101, 0.01);
        let p = params(1.0, 1.0);
        let n = 4000;
        let (mut s00, mut s0n) = (0.0, 0.0);
        for k in 0..n {
            let noise = Substream::new(21, k).standard_normals(xs.len());
            let path = sample_ou_path_exact(&p, &xs, &noise).unwrap();
            s00 += path.values[100] * path.values[100];
            s0n += path.values[0] * path.values[100];
        }
        let nf = n as f64;
        assert!((s00 / nf - 1.0).abs() < 3.0 * (2.0 / nf).sqrt());
        let rho = (-1.0f64).exp();
        assert!((s0n / nf - rho).abs() < 3.0 * ((1.0 + rho * rho) / nf).sqrt());
    }
}
