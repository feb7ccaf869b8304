//! C interface to the random-set functionals and the Karhunen-Loève basis.
//!
//! Every function returns a [`RandsetStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and can be fetched with
//! [`randset_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use randset::field::{FieldEvaluator, GaussianDraw, KlBasis};
use randset::{Error, ImpreciseGaussianSpec, Interval, RandomIntervalSample};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandsetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    Numerical = 4,
    Panic = 5,
}

/// Opaque Karhunen-Loève basis of the exponential kernel.
pub struct RandsetKlBasis {
    inner: Arc<KlBasis>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RandsetStatus {
    match err {
        Error::Domain(_) => RandsetStatus::Domain,
        Error::InvalidInput(_) | Error::Config(_) | Error::Mismatch(_) => RandsetStatus::InvalidInput,
        _ => RandsetStatus::Numerical,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (RandsetStatus, String)>) -> RandsetStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RandsetStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RandsetStatus::Panic
        }
    }
}

fn lib<T>(r: randset::Result<T>) -> Result<T, (RandsetStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (RandsetStatus, String) {
    (RandsetStatus::NullPointer, format!("{name} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], (RandsetStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], (RandsetStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(p: *mut T, v: T, name: &str) -> Result<(), (RandsetStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    *p = v;
    Ok(())
}

unsafe fn intervals(lower: *const f64, upper: *const f64, n: usize) -> Result<Vec<Interval>, (RandsetStatus, String)> {
    let lo = slice(lower, n, "lower")?;
    let hi = slice(upper, n, "upper")?;
    lo.iter().zip(hi).map(|(&a, &b)| lib(Interval::new(a, b))).collect()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn randset_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Standard normal quantile for `p` in (0, 1).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn randset_inverse_normal_cdf(p: f64, out: *mut f64) -> RandsetStatus {
    guard(|| write(out, lib(randset::inverse_normal_cdf(p))?, "out"))
}

/// Standard normal distribution function.
#[no_mangle]
pub extern "C" fn randset_normal_cdf(z: f64) -> f64 {
    randset::normal_cdf(z)
}

/// Eigenpairs of `exp(-|x-y|/ell)` on `[lo, hi]`, `terms` of each parity.
///
/// # Safety
/// `out` must be valid for writes. The handle is released with [`randset_kl_basis_free`].
#[no_mangle]
pub unsafe extern "C" fn randset_kl_basis_new(
    ell: f64,
    lo: f64,
    hi: f64,
    terms: usize,
    out: *mut *mut RandsetKlBasis,
) -> RandsetStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let basis = lib(Interval::new(lo, hi).and_then(|d| KlBasis::new(ell, d, terms)))?;
        *out = Box::into_raw(Box::new(RandsetKlBasis { inner: Arc::new(basis) }));
        Ok(())
    })
}

/// # Safety
/// `basis` must come from [`randset_kl_basis_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn randset_kl_basis_free(basis: *mut RandsetKlBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Number of cosine (and of sine) terms; 0 for a null handle.
///
/// # Safety
/// `basis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn randset_kl_basis_terms(basis: *const RandsetKlBasis) -> usize {
    basis.as_ref().map_or(0, |b| b.inner.terms())
}

/// Copies roots and eigenvalues of both families; each array holds `len >= terms` entries.
/// Any output pointer may be null to skip it.
///
/// # Safety
/// `basis` must be a live handle; non-null outputs must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn randset_kl_basis_eigenpairs(
    basis: *const RandsetKlBasis,
    alpha: *mut f64,
    c: *mut f64,
    alpha_star: *mut f64,
    c_star: *mut f64,
    len: usize,
) -> RandsetStatus {
    guard(|| {
        let b = &basis.as_ref().ok_or_else(|| null("basis"))?.inner;
        let m = b.terms();
        if len < m {
            return Err((RandsetStatus::InvalidInput, format!("buffers hold {len} entries, basis has {m} terms")));
        }
        for (dst, src) in [(alpha, b.alphas()), (c, b.eigvals()), (alpha_star, b.alphas_star()), (c_star, b.eigvals_star())] {
            if !dst.is_null() {
                slice_mut(dst, m, "output")?.copy_from_slice(src);
            }
        }
        Ok(())
    })
}

/// Evaluates `sigma * sum sqrt(c_k) phi_k(x) xi_k` at `n` points. `xi` holds
/// `2 * terms` coefficients interleaved (cosine, sine) per index.
///
/// # Safety
/// `basis` must be a live handle; `xi` valid for `xi_len` reads; `xs` and `out` valid for `n`.
#[no_mangle]
pub unsafe extern "C" fn randset_kl_field_evaluate(
    basis: *const RandsetKlBasis,
    xi: *const f64,
    xi_len: usize,
    sigma: f64,
    xs: *const f64,
    n: usize,
    out: *mut f64,
) -> RandsetStatus {
    guard(|| {
        let b = basis.as_ref().ok_or_else(|| null("basis"))?.inner.clone();
        let draw = Arc::new(GaussianDraw::from_coefficients(slice(xi, xi_len, "xi")?.to_vec()));
        let q = lib(FieldEvaluator::new(b, draw, sigma))?;
        let xs = slice(xs, n, "xs")?;
        let out = slice_mut(out, n, "out")?;
        for (o, &x) in out.iter_mut().zip(xs) {
            *o = lib(q.value(x))?;
        }
        Ok(())
    })
}

/// Focal interval of the imprecise Gaussian `N([mu_lo, mu_hi], [sigma_lo, sigma_hi]^2)` at `omega` in (0, 1).
///
/// # Safety
/// `lo` and `hi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn randset_imprecise_gaussian_focal(
    omega: f64,
    mu_lo: f64,
    mu_hi: f64,
    sigma_lo: f64,
    sigma_hi: f64,
    lo: *mut f64,
    hi: *mut f64,
) -> RandsetStatus {
    guard(|| {
        let spec = lib(Interval::new(mu_lo, mu_hi)
            .and_then(|mu| Interval::new(sigma_lo, sigma_hi).and_then(|s| ImpreciseGaussianSpec::new(mu, s))))?;
        let iv = lib(randset::imprecise_gaussian_focal(omega, &spec))?;
        write(lo, iv.lo(), "lo")?;
        write(hi, iv.hi(), "hi")
    })
}

/// Lower and upper distribution functions of `n` random intervals at `m` ascending thresholds.
///
/// # Safety
/// `lower`, `upper` valid for `n` reads; `thresholds`, `f_lower`, `f_upper` valid for `m`.
#[no_mangle]
pub unsafe extern "C" fn randset_empirical_pbox(
    lower: *const f64,
    upper: *const f64,
    n: usize,
    thresholds: *const f64,
    m: usize,
    f_lower: *mut f64,
    f_upper: *mut f64,
) -> RandsetStatus {
    guard(|| {
        let sample = lib(RandomIntervalSample::new(intervals(lower, upper, n)?))?;
        let pbox = lib(randset::empirical_pbox(&sample, slice(thresholds, m, "thresholds")?))?;
        slice_mut(f_lower, m, "f_lower")?.copy_from_slice(pbox.f_lower());
        slice_mut(f_upper, m, "f_upper")?.copy_from_slice(pbox.f_upper());
        Ok(())
    })
}

/// Aumann expectation `[mean(lower), mean(upper)]` of `n` random intervals.
///
/// # Safety
/// `lower`, `upper` valid for `n` reads; `lo`, `hi` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn randset_aumann_expectation(
    lower: *const f64,
    upper: *const f64,
    n: usize,
    lo: *mut f64,
    hi: *mut f64,
) -> RandsetStatus {
    guard(|| {
        let sample = lib(RandomIntervalSample::new(intervals(lower, upper, n)?))?;
        let iv = lib(randset::aumann_expectation(&sample))?;
        write(lo, iv.lo(), "lo")?;
        write(hi, iv.hi(), "hi")
    })
}

/// Lower and upper probability of the closed event `[event_lo, event_hi]` under
/// `n` weighted focal intervals. Weights must be nonnegative and sum to one.
///
/// # Safety
/// Focal arrays and `weights` valid for `n` reads; `lower_p`, `upper_p` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn randset_finite_probabilities(
    focal_lo: *const f64,
    focal_hi: *const f64,
    weights: *const f64,
    n: usize,
    event_lo: f64,
    event_hi: f64,
    lower_p: *mut f64,
    upper_p: *mut f64,
) -> RandsetStatus {
    guard(|| {
        let rs = lib(randset::FiniteRandomSet::new(
            intervals(focal_lo, focal_hi, n)?,
            slice(weights, n, "weights")?.to_vec(),
        ))?;
        let event = lib(Interval::new(event_lo, event_hi))?;
        write(lower_p, randset::lower_probability(&rs, &event), "lower_p")?;
        write(upper_p, randset::upper_probability(&rs, &event), "upper_p")
    })
}
