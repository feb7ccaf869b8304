//! Closed-form Karhunen-Loève expansion of the exponential covariance kernel.
//!
//! On the reference interval `[-1, 1]` with correlation length `l` the kernel
//! `exp(-|x - y| / l)` has cosine eigenfunctions with frequencies solving
//! `1/l - a tan a = 0` and sine eigenfunctions with frequencies solving
//! `a + tan(a) / l = 0`. A general interval `[a, b]` is mapped affinely onto
//! `[-1, 1]`, which rescales the correlation length to `2 l / (b - a)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::random_set::Interval;
use crate::rng::Substream;

const MAX_BISECTIONS: usize = 200;
const ROOT_REL_TOL: f64 = 1e-13;

/// Standard deviation, correlation length and spatial interval of an exponential-kernel field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpCovarianceParams {
    pub sigma: f64,
    pub ell: f64,
    pub domain: Interval,
}

impl ExpCovarianceParams {
    pub fn new(sigma: f64, ell: f64, domain: Interval) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidInput(format!("field sigma must be nonnegative, got {sigma}")));
        }
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::InvalidInput(format!("correlation length must be positive, got {ell}")));
        }
        if !(domain.lo() < domain.hi()) {
            return Err(Error::InvalidInput(format!("field domain {domain} has zero length")));
        }
        Ok(Self { sigma, ell, domain })
    }

    /// Covariance `sigma^2 exp(-|x - y| / ell)`.
    pub fn covariance(&self, x: f64, y: f64) -> f64 {
        self.sigma * self.sigma * (-(x - y).abs() / self.ell).exp()
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64, lo_sign_positive: bool) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= ROOT_REL_TOL * mid.abs() {
            return mid;
        }
        let positive = f(mid) > 0.0;
        if positive == lo_sign_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Frequencies of the first `terms` cosine and sine eigenfunctions on `[-1, 1]`.
///
/// The k-th cosine frequency lies in `((k-1)π, (k-1)π + π/2)`, the k-th sine
/// frequency in `((k-1/2)π, kπ)`; both branches are monotone, so bisection
/// on the bracket always converges.
pub fn solve_characteristic_roots(ell_effective: f64, terms: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(ell_effective > 0.0) || !ell_effective.is_finite() {
        return Err(Error::InvalidInput(format!(
            "effective correlation length must be positive, got {ell_effective}"
        )));
    }
    if terms == 0 {
        return Err(Error::InvalidInput("at least one KL term pair is required".into()));
    }
    let inv = 1.0 / ell_effective;
    let even = |a: f64| inv - a * a.tan();
    let odd = |a: f64| a + inv * a.tan();

    let mut alphas = Vec::with_capacity(terms);
    let mut alphas_star = Vec::with_capacity(terms);
    for k in 1..=terms {
        let base = (k - 1) as f64 * PI;
        let (lo, hi) = (base, base + FRAC_PI_2);
        let probe = hi - 1e-9 * hi.max(1.0);
        if !(even(lo) > 0.0 && even(probe) < 0.0) {
            return Err(Error::Bracket { branch: "cosine", index: k });
        }
        let root = bisect(lo, hi, even, true);
        if !(root > lo && root < hi) {
            return Err(Error::Bracket { branch: "cosine", index: k });
        }
        alphas.push(root);

        let (lo, hi) = (base + FRAC_PI_2, k as f64 * PI);
        let probe = lo + 1e-9 * lo;
        if !(odd(probe) < 0.0 && odd(hi) > 0.0) {
            return Err(Error::Bracket { branch: "sine", index: k });
        }
        let root = bisect(lo, hi, odd, false);
        if !(root > lo && root < hi) {
            return Err(Error::Bracket { branch: "sine", index: k });
        }
        alphas_star.push(root);
    }
    Ok((alphas, alphas_star))
}

/// Eigenpairs of the unit-variance exponential kernel for one correlation length.
#[derive(Debug, Clone, PartialEq)]
pub struct KlBasis {
    terms: usize,
    ell: f64,
    domain: Interval,
    ell_effective: f64,
    alphas: Vec<f64>,
    alphas_star: Vec<f64>,
    eigvals: Vec<f64>,
    eigvals_star: Vec<f64>,
    norms: Vec<f64>,
    norms_star: Vec<f64>,
}

impl KlBasis {
    pub fn new(ell: f64, domain: Interval, terms: usize) -> Result<Self> {
        let params = ExpCovarianceParams::new(1.0, ell, domain)?;
        kl_eigenpairs(&params, terms)
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn ell_effective(&self) -> f64 {
        self.ell_effective
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn alphas_star(&self) -> &[f64] {
        &self.alphas_star
    }

    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn eigvals_star(&self) -> &[f64] {
        &self.eigvals_star
    }

    /// Sum of all retained eigenvalues; bounded by 2, the trace on `[-1, 1]`.
    pub fn trace(&self) -> f64 {
        self.eigvals.iter().chain(&self.eigvals_star).sum()
    }

    /// Affine map of `x` in the physical domain to `[-1, 1]`.
    pub fn to_reference(&self, x: f64) -> f64 {
        (2.0 * x - (self.domain.lo() + self.domain.hi())) / self.domain.width()
    }

    /// Cosine eigenfunction `k` (zero based) on the reference interval.
    pub fn phi(&self, k: usize, xr: f64) -> f64 {
        (self.alphas[k] * xr).cos() * self.norms[k]
    }

    /// Sine eigenfunction `k` (zero based) on the reference interval.
    pub fn phi_star(&self, k: usize, xr: f64) -> f64 {
        (self.alphas_star[k] * xr).sin() * self.norms_star[k]
    }

    /// Truncated kernel `sum c_k phi_k(x) phi_k(y) + c*_k phi*_k(x) phi*_k(y)` on the reference interval.
    pub fn reconstructed_kernel(&self, xr: f64, yr: f64) -> f64 {
        (0..self.terms)
            .map(|k| {
                self.eigvals[k] * self.phi(k, xr) * self.phi(k, yr)
                    + self.eigvals_star[k] * self.phi_star(k, xr) * self.phi_star(k, yr)
            })
            .sum()
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let slack = 1e-12 * self.domain.width();
        if !(x >= self.domain.lo() - slack && x <= self.domain.hi() + slack) {
            return Err(Error::Domain(format!(
                "field evaluated at {x}, outside its domain {}",
                self.domain
            )));
        }
        Ok(())
    }
}

/// Eigenvalues and normalized eigenfunctions for `params.ell` on `params.domain`.
///
/// The returned basis is for the unit-variance kernel; `sigma` is applied by
/// the field evaluator.
pub fn kl_eigenpairs(params: &ExpCovarianceParams, terms: usize) -> Result<KlBasis> {
    let ell_effective = 2.0 * params.ell / params.domain.width();
    let (alphas, alphas_star) = solve_characteristic_roots(ell_effective, terms)?;
    let eig = |a: f64| 2.0 * ell_effective / (1.0 + ell_effective * ell_effective * a * a);
    let eigvals = alphas.iter().map(|&a| eig(a)).collect();
    let eigvals_star = alphas_star.iter().map(|&a| eig(a)).collect();
    let norms = alphas
        .iter()
        .map(|&a| 1.0 / (1.0 + (2.0 * a).sin() / (2.0 * a)).sqrt())
        .collect();
    let norms_star = alphas_star
        .iter()
        .map(|&a| 1.0 / (1.0 - (2.0 * a).sin() / (2.0 * a)).sqrt())
        .collect();
    Ok(KlBasis {
        terms,
        ell: params.ell,
        domain: params.domain,
        ell_effective,
        alphas,
        alphas_star,
        eigvals,
        eigvals_star,
        norms,
        norms_star,
    })
}

/// Standard normal coefficients `(xi_1, xi*_1, xi_2, xi*_2, ...)` of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDraw {
    xi: Vec<f64>,
    seed: u64,
    index: u64,
}

impl GaussianDraw {
    /// Draws `2 * terms` variates from the substream.
    pub fn sample(terms: usize, stream: &mut Substream) -> Self {
        Self {
            xi: stream.standard_normals(2 * terms),
            seed: stream.seed(),
            index: stream.index(),
        }
    }

    /// Wraps explicit coefficients; the replay identifier is `(0, 0)`.
    pub fn from_coefficients(xi: Vec<f64>) -> Self {
        Self { xi, seed: 0, index: 0 }
    }

    pub fn with_origin(mut self, seed: u64, index: u64) -> Self {
        self.seed = seed;
        self.index = index;
        self
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.xi
    }

    /// `(seed, sample index)` of the substream this draw came from.
    pub fn origin(&self) -> (u64, u64) {
        (self.seed, self.index)
    }

    pub fn terms(&self) -> usize {
        self.xi.len() / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    #[default]
    Value,
    Derivative,
}

/// One realization of the truncated field, evaluable anywhere in its domain.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    basis: Arc<KlBasis>,
    draw: Arc<GaussianDraw>,
    sigma: f64,
    mode: EvalMode,
    // sqrt(c_k) * xi_k, cached
    cos_weights: Vec<f64>,
    sin_weights: Vec<f64>,
}

impl FieldEvaluator {
    pub fn new(basis: Arc<KlBasis>, draw: Arc<GaussianDraw>, sigma: f64) -> Result<Self> {
        if draw.coefficients().len() != 2 * basis.terms() {
            return Err(Error::InvalidInput(format!(
                "draw has {} coefficients, basis needs {}",
                draw.coefficients().len(),
                2 * basis.terms()
            )));
        }
        if !(sigma >= 0.0) {
            return Err(Error::InvalidInput(format!("field sigma must be nonnegative, got {sigma}")));
        }
        let xi = draw.coefficients();
        let m = basis.terms();
        let cos_weights = (0..m)
            .map(|k| basis.eigvals[k].sqrt() * basis.norms[k] * xi[2 * k])
            .collect();
        let sin_weights = (0..m)
            .map(|k| basis.eigvals_star[k].sqrt() * basis.norms_star[k] * xi[2 * k + 1])
            .collect();
        Ok(Self {
            basis,
            draw,
            sigma,
            mode: EvalMode::Value,
            cos_weights,
            sin_weights,
        })
    }

    pub fn with_mode(mut self, mode: EvalMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn basis(&self) -> &KlBasis {
        &self.basis
    }

    pub fn draw(&self) -> &GaussianDraw {
        &self.draw
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Field value `q(x)`.
    pub fn value(&self, x: f64) -> Result<f64> {
        self.basis.check_domain(x)?;
        let xr = self.basis.to_reference(x);
        let b = &self.basis;
        let mut sum = 0.0;
        for k in 0..b.terms {
            sum += self.cos_weights[k] * (b.alphas[k] * xr).cos()
                + self.sin_weights[k] * (b.alphas_star[k] * xr).sin();
        }
        Ok(self.sigma * sum)
    }

    /// Spatial derivative `dq/dx`, chained through the affine map.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.basis.check_domain(x)?;
        let xr = self.basis.to_reference(x);
        let b = &self.basis;
        let mut sum = 0.0;
        for k in 0..b.terms {
            sum += -self.cos_weights[k] * b.alphas[k] * (b.alphas[k] * xr).sin()
                + self.sin_weights[k] * b.alphas_star[k] * (b.alphas_star[k] * xr).cos();
        }
        Ok(self.sigma * sum * 2.0 / b.domain.width())
    }
}

/// Evaluates the field (or its derivative, by mode) at `x`.
pub fn evaluate_kl_field(f: &FieldEvaluator, x: f64) -> Result<f64> {
    match f.mode {
        EvalMode::Value => f.value(x),
        EvalMode::Derivative => f.derivative(x),
    }
}
