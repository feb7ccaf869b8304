use crate::error::{Error, Result};

/// Trapezoidal region `{(x, t): |t| <= T, |x| <= kappa - c |t|}`.
///
/// Characteristics with speed bounded by `c` that start inside stay inside
/// when traced back to `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminacyRegion {
    kappa: f64,
    horizon: f64,
    speed: f64,
}

/// Validates `kappa - c T > 0` and builds the region.
pub fn domain_of_determinacy(kappa: f64, horizon: f64, speed: f64) -> Result<DeterminacyRegion> {
    if !(kappa > 0.0) || !(horizon > 0.0) || !(speed >= 0.0) || !(kappa + horizon + speed).is_finite() {
        return Err(Error::InvalidInput(format!(
            "region needs kappa > 0, T > 0, c >= 0 (got {kappa}, {horizon}, {speed})"
        )));
    }
    let reach = speed * horizon;
    if kappa - reach <= 0.0 {
        return Err(Error::EmptyRegion { kappa, reach });
    }
    Ok(DeterminacyRegion { kappa, horizon, speed })
}

impl DeterminacyRegion {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Half-width `kappa - c |t|` of the time slice.
    pub fn half_width(&self, t: f64) -> f64 {
        self.kappa - self.speed * t.abs()
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        t.abs() <= self.horizon && x.abs() <= self.half_width(t)
    }

    pub(crate) fn contains_with_slack(&self, x: f64, t: f64, slack: f64) -> bool {
        t.abs() <= self.horizon + slack && x.abs() <= self.half_width(t) + slack
    }
}
