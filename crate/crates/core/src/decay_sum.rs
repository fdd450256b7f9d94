//! The weighted sum `S(x; kappa, beta, y) = sum_{n>=1} |h_n(x)|^kappa e^{-kappa n y} / n^beta`,
//! its envelope `x^{1/2 - 2 beta} e^{-kappa x^2 tanh(y)/2}`, and the argument
//! function `A(n) = n phi_n - n y - (x/2) sqrt(x^2 - 2(n+1))` that controls the
//! size of each summand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{phi_coordinate, HermiteOrders};
use crate::signed_log::{LogSum, SignedLog};

/// Relative tail below which [`direct_sum`] stops.
pub const TAIL_TOLERANCE: f64 = 1e-12;

const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;
const PROFILE_MAX_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSumParams")]
pub struct SumParams {
    kappa: f64,
    beta: f64,
    y: f64,
}

#[derive(Deserialize)]
struct RawSumParams {
    kappa: f64,
    beta: f64,
    y: f64,
}

impl TryFrom<RawSumParams> for SumParams {
    type Error = Error;

    fn try_from(raw: RawSumParams) -> Result<Self> {
        SumParams::new(raw.kappa, raw.beta, raw.y)
    }
}

impl SumParams {
    pub fn new(kappa: f64, beta: f64, y: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid("kappa", format!("must be finite and > 0, got {kappa}")));
        }
        if !beta.is_finite() {
            return Err(Error::invalid("beta", format!("must be finite, got {beta}")));
        }
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::invalid("y", format!("must be finite and > 0, got {y}")));
        }
        Ok(SumParams { kappa, beta, y })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Exponent of `x` in the envelope, `1/2 - 2 beta`.
    pub fn x_power(&self) -> f64 {
        0.5 - 2.0 * self.beta
    }

    /// Log of the n-th summand given `h_n(x)`.
    pub fn term(&self, n: u64, h: SignedLog) -> SignedLog {
        let nf = n as f64;
        h.abs_powf(self.kappa)
            .scale_ln(-self.kappa * nf * self.y - self.beta * nf.ln())
    }
}

/// `N = max(floor(x^2 tanh(y) / (2y)) - 1, 1)`.
pub fn truncation_index(x: f64, y: f64) -> u64 {
    let raw = (x * x * y.tanh() / (2.0 * y)).floor() - 1.0;
    if raw >= 1.0 {
        raw as u64
    } else {
        1
    }
}

/// `eps = (1 - tanh(y)/y) / 2`, the monotonic-regime margin that keeps every
/// `n < N` away from the turning point.
pub fn monotonic_eps(y: f64) -> f64 {
    0.5 * (1.0 - y.tanh() / y)
}

/// Default first grid point for sweeps: `max(10, 3 / sqrt(tanh y))`.
pub fn default_sweep_start(y: f64) -> f64 {
    (3.0 / y.tanh().sqrt()).max(10.0)
}

fn argument_domain(op: &'static str, n: f64, x: f64, strict: bool) -> Result<f64> {
    let x = x.abs();
    if !(n >= 1.0) {
        return Err(Error::domain(op, format!("need n >= 1, got {n}")));
    }
    let d = x * x - 2.0 * (n + 1.0);
    let ok = if strict { d > 0.0 } else { d >= 0.0 };
    if !ok {
        return Err(Error::domain(
            op,
            format!(
                "n = {n} is past the turning point (x^2 - 2)/2 = {}",
                (x * x - 2.0) / 2.0
            ),
        ));
    }
    Ok(d)
}

/// `A(n) = n phi_n - n y - (x/2) sqrt(x^2 - 2(n+1))`, with `n` real.
pub fn argument_function(n: f64, x: f64, y: f64) -> Result<f64> {
    let d = argument_domain("argument_function", n, x, false)?;
    let phi = phi_coordinate(n, x.abs())?.phi;
    Ok(n * phi - n * y - 0.5 * x.abs() * d.sqrt())
}

/// Closed-form `(A'(n), A''(n))`.
pub fn argument_derivatives(n: f64, x: f64, y: f64) -> Result<(f64, f64)> {
    let d = argument_domain("argument_derivatives", n, x, true)?;
    let x = x.abs();
    let phi = phi_coordinate(n, x)?.phi;
    let np1 = n + 1.0;
    let a1 = phi + x / (2.0 * np1 * d.sqrt()) - y;
    let a2 = x * ((2.0 * n + 5.0) * np1 - x * x * (n + 2.0)) / (2.0 * np1 * np1 * d.powf(1.5));
    Ok((a1, a2))
}

fn concavity_domain(op: &'static str, n: f64, x: f64) -> Result<f64> {
    let upper = (x * x - 4.0) / 2.0;
    if !(n > 1.0 && n < upper) {
        return Err(Error::domain(
            op,
            format!("need 1 < n < (x^2-4)/2 = {upper}, got n = {n}"),
        ));
    }
    Ok(x * x / (2.0 * n + 2.0))
}

/// Both sides of the concavity inequality at `t = x^2/(2n+2)`:
/// `lhs = (1 + 1/(n+1)) t - (1 + 3/(2n+2))` and `unit = (1 - 1/t)^{3/2}`, so
/// that `-A''(n) x^2 = lhs / unit`.
pub fn second_derivative_sides(n: f64, x: f64) -> Result<(f64, f64)> {
    let t = concavity_domain("second_derivative_sides", n, x)?;
    Ok(concavity_sides_at(n, t))
}

fn concavity_sides_at(n: f64, t: f64) -> (f64, f64) {
    let lhs = (1.0 + 1.0 / (n + 1.0)) * t - (1.0 + 3.0 / (2.0 * n + 2.0));
    let unit = (1.0 - 1.0 / t).powf(1.5);
    (lhs, unit)
}

/// `(1 + 1/(n+1)) t_n - (1 + 3/(2n+2)) >= c (1 - 1/t_n)^{3/2}`.
pub fn check_second_derivative_inequality(n: u64, x: f64, c: f64) -> Result<bool> {
    let t = concavity_domain("check_second_derivative_inequality", n as f64, x)?;
    let (lhs, unit) = concavity_sides_at(n as f64, t);
    Ok(lhs >= c * unit)
}

/// Largest `c` for which the concavity inequality holds at `(n, x)`.
pub fn admissible_concavity_constant(n: f64, x: f64) -> Result<f64> {
    let (lhs, unit) = second_derivative_sides(n, x)?;
    Ok(lhs / unit)
}

/// Smallest admissible `c` over integers `n` in `(1, (x^2-4)/2)`: the
/// empirical concavity constant for this `x`.
pub fn calibrate_concavity_constant(x: f64) -> Result<f64> {
    let upper = (x * x - 4.0) / 2.0;
    let last = if upper.fract() == 0.0 {
        upper as u64 - 1
    } else {
        upper.floor() as u64
    };
    if last < 2 {
        return Err(Error::domain(
            "calibrate_concavity_constant",
            format!("no integer n in (1, {upper})"),
        ));
    }
    (2..=last)
        .map(|n| admissible_concavity_constant(n as f64, x))
        .try_fold(f64::INFINITY, |acc, c| Ok(acc.min(c?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgumentSample {
    pub n: f64,
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentProfile {
    pub x: f64,
    pub y: f64,
    pub n_max: f64,
    pub a_max: f64,
    pub lambda: f64,
    pub truncation_n: u64,
    /// `phi` at the maximizer, i.e. the root `u_x` of
    /// `u + cosh(u)^3 / (x^2 sinh(u)) = y`.
    pub phi_max: f64,
    pub iterations: usize,
    pub samples: Vec<ArgumentSample>,
}

impl ArgumentProfile {
    /// `x^2 / (2 cosh^2 y)`, the leading-order location of the maximum.
    pub fn n_max_asymptotic(&self) -> f64 {
        let c = self.y.cosh();
        self.x * self.x / (2.0 * c * c)
    }

    /// `A(n_max) + x^2 tanh(y) / 2`.
    pub fn peak_deviation(&self) -> f64 {
        self.a_max + self.x * self.x * self.y.tanh() / 2.0
    }
}

/// `A'(n)` written in the `phi` coordinate: `phi + cosh^3(phi)/(x^2 sinh(phi)) - y`.
fn stationarity(phi: f64, x: f64, y: f64) -> f64 {
    let c = phi.cosh();
    phi + c * c * c / (x * x * phi.sinh()) - y
}

/// Locates the maximizer of `A` on `[1, N-1]` by bisection in `phi`.
///
/// `A` is concave there, so `A'` has at most one zero; in the `phi` coordinate
/// it is bracketed by `phi(N-1)` and `min(phi(1), y)`. The stationarity
/// equation has a second root near the turning point `n ~ x^2/2`, outside the
/// concave range, which the lower end of the bracket excludes.
pub fn find_nmax(x: f64, y: f64) -> Result<ArgumentProfile> {
    let x = x.abs();
    if !(y > 0.0) || !x.is_finite() {
        return Err(Error::invalid(
            "y",
            format!("need y > 0 and finite x; got x = {x}, y = {y}"),
        ));
    }
    let truncation_n = truncation_index(x, y);
    if truncation_n < 3 {
        return Err(Error::BracketFailure {
            x,
            y,
            detail: format!("truncation index N = {truncation_n} < 3"),
        });
    }
    let n_hi = (truncation_n - 1) as f64;
    let mut lo = phi_coordinate(n_hi, x)?.phi;
    let mut hi = phi_coordinate(1.0, x)?.phi.min(y);
    let g_lo = stationarity(lo, x, y);
    let g_hi = stationarity(hi, x, y);
    if !(lo < hi && g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::BracketFailure {
            x,
            y,
            detail: format!("A' does not change sign on phi in [{lo}, {hi}] (values {g_lo}, {g_hi})"),
        });
    }
    let mut iterations = 0;
    while hi - lo > BISECTION_TOL && iterations < BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if stationarity(mid, x, y) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let phi_max = 0.5 * (lo + hi);
    let c = phi_max.cosh();
    let n_max = (x * x / (2.0 * c * c) - 1.0).clamp(1.0, n_hi);
    let a_max = argument_function(n_max, x, y)?;

    let last = truncation_n - 1;
    let stride = ((last as usize).div_ceil(PROFILE_MAX_SAMPLES)).max(1);
    let mut samples = Vec::new();
    let mut push = |n: f64| -> Result<()> {
        let a = argument_function(n, x, y)?;
        let (a1, a2) = argument_derivatives(n, x, y)?;
        samples.push(ArgumentSample { n, a, a1, a2 });
        Ok(())
    };
    for n in (1..=last).step_by(stride) {
        push(n as f64)?;
    }
    if !(last - 1).is_multiple_of(stride as u64) {
        push(last as f64)?;
    }

    Ok(ArgumentProfile {
        x,
        y,
        n_max,
        a_max,
        lambda: n_max / (x * x),
        truncation_n,
        phi_max,
        iterations,
        samples,
    })
}

/// Result of a streamed summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumOutcome {
    pub value: SignedLog,
    /// Last index included.
    pub n_stop: u64,
    pub max_term: SignedLog,
    pub max_term_n: u64,
}

/// `S(x; kappa, beta, y)`, summed in ascending `n` until both `n >= N` and the
/// certified tail is below [`TAIL_TOLERANCE`] relative to the running sum.
pub fn direct_sum(x: f64, params: &SumParams) -> SignedLog {
    sum_from(1, x, params).value
}

pub fn direct_sum_detailed(x: f64, params: &SumParams) -> SumOutcome {
    sum_from(1, x, params)
}

/// `sum_{n >= start_n} |h_n(x)|^kappa e^{-kappa n y} / n^beta` with the same
/// stopping rule as [`direct_sum`].
pub fn sum_from(start_n: u64, x: f64, params: &SumParams) -> SumOutcome {
    let start_n = start_n.max(1);
    let x = x.abs();
    let n_paper = truncation_index(x, params.y);
    let log_tol = TAIL_TOLERANCE.ln();
    let mut acc = LogSum::new();
    let mut n_stop = start_n;
    for (n, h) in HermiteOrders::new(x).enumerate().skip(start_n as usize) {
        let n = n as u64;
        acc.push(params.term(n, h));
        n_stop = n;
        if n >= n_paper {
            let sum = acc.value();
            if !sum.is_zero() && tail_bound(n + 1, x, params).ln_ratio(&sum) <= log_tol {
                break;
            }
        }
    }
    SumOutcome {
        value: acc.value(),
        n_stop,
        max_term: acc.max_term(),
        max_term_n: start_n + acc.max_index() as u64,
    }
}

/// Sum over the inclusive index range `first..=last` (with `first >= 1`).
pub fn truncated_sum(x: f64, params: &SumParams, first: u64, last: u64) -> SignedLog {
    let first = first.max(1);
    if last < first {
        return SignedLog::ZERO;
    }
    let mut acc = LogSum::new();
    for (n, h) in HermiteOrders::new(x.abs())
        .enumerate()
        .take(last as usize + 1)
        .skip(first as usize)
    {
        acc.push(params.term(n as u64, h));
    }
    acc.value()
}

/// Certified upper bound on `sum_{n >= start_n}` from `|h_n| <= pi^{-1/4}`.
pub fn tail_bound(start_n: u64, _x: f64, params: &SumParams) -> SignedLog {
    let m = start_n.max(1) as f64;
    let ky = params.kappa * params.y;
    let log_uniform = -0.25 * params.kappa * std::f64::consts::PI.ln();
    // ln(1 / (1 - e^{-kappa y}))
    let log_geom = -(-(-ky).exp_m1()).ln();
    if params.beta >= 0.0 {
        return SignedLog::from_ln(log_uniform - params.beta * m.ln() - ky * m + log_geom);
    }
    // n^{|beta|} grows: bound block [m 2^k, m 2^{k+1}) by its largest power
    // and its geometric sum; once consecutive block ratios drop below 1/2 the
    // remaining blocks sum to at most the current one.
    let p = -params.beta;
    let mut total = LogSum::new();
    let mut k = 0i32;
    loop {
        let start = m * 2f64.powi(k);
        let block = SignedLog::from_ln(p * (2.0 * start).ln() - ky * start + log_geom);
        total.push(block);
        let ratio_ln = p * std::f64::consts::LN_2 - ky * start;
        if ratio_ln <= -std::f64::consts::LN_2 {
            total.push(block);
            break;
        }
        k += 1;
    }
    total.value().scale_ln(log_uniform)
}

/// `x^{1/2 - 2 beta} e^{-kappa x^2 tanh(y)/2}`.
pub fn envelope(x: f64, params: &SumParams) -> Result<SignedLog> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("envelope", format!("need finite x > 0, got {x}")));
    }
    Ok(SignedLog::from_ln(
        params.x_power() * x.ln() - params.kappa * x * x * params.y.tanh() / 2.0,
    ))
}

/// `S(x) e^{kappa x^2 tanh(y)/2}`; defined for every `x` including the origin.
pub fn gaussian_normalized_sum(x: f64, params: &SumParams) -> SignedLog {
    direct_sum(x, params).scale_ln(params.kappa * x * x * params.y.tanh() / 2.0)
}

/// Integer range `lo..=hi` of `n >= 1` with `2(n+1)/x^2` strictly inside
/// `(lambda/2, tanh(y)/y)`.
pub fn reverse_window(x: f64, lambda: f64, y: f64) -> Option<(u64, u64)> {
    let x2 = x * x;
    let lo_real = lambda * x2 / 4.0 - 1.0;
    let hi_real = x2 * y.tanh() / (2.0 * y) - 1.0;
    let lo = ((lo_real.floor() + 1.0).max(1.0)) as u64;
    let hi_f = hi_real.ceil() - 1.0;
    if hi_f < lo as f64 {
        return None;
    }
    Some((lo, hi_f as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessPoint {
    pub x: f64,
    pub log_sum: f64,
    pub log_envelope: f64,
    pub n_max: f64,
    pub lambda: f64,
    pub n_stop: u64,
    pub window: Option<(u64, u64)>,
    pub log_window_sum: f64,
}

impl SharpnessPoint {
    /// `R(x) = S(x) / envelope(x)`.
    pub fn ratio(&self) -> f64 {
        self.log_ratio().exp()
    }

    pub fn log_ratio(&self) -> f64 {
        self.log_sum - self.log_envelope
    }

    /// Restricted-window sum over the full sum, in `(0, 1]`.
    pub fn window_fraction(&self) -> f64 {
        (self.log_window_sum - self.log_sum).exp()
    }

    /// Restricted-window sum over the envelope.
    pub fn window_ratio(&self) -> f64 {
        (self.log_window_sum - self.log_envelope).exp()
    }
}

pub fn sharpness_point(x: f64, params: &SumParams) -> Result<SharpnessPoint> {
    if !(x > 1.0) {
        return Err(Error::domain(
            "sharpness_certificate",
            format!("x = {x} lies in [-1, 1] or is negative"),
        ));
    }
    let profile = find_nmax(x, params.y)?;
    let outcome = direct_sum_detailed(x, params);
    let env = envelope(x, params)?;
    let window = reverse_window(x, profile.lambda, params.y);
    let log_window_sum = match window {
        Some((lo, hi)) => truncated_sum(x, params, lo, hi).logmag(),
        None => f64::NEG_INFINITY,
    };
    Ok(SharpnessPoint {
        x,
        log_sum: outcome.value.logmag(),
        log_envelope: env.logmag(),
        n_max: profile.n_max,
        lambda: profile.lambda,
        n_stop: outcome.n_stop,
        window,
        log_window_sum,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessCertificate {
    pub params: SumParams,
    pub x_grid: Vec<f64>,
    pub ratios: Vec<f64>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Least-squares slope of `ln R` against `ln x`.
    pub slope: f64,
    pub window_fractions: Vec<f64>,
    pub window_ratios: Vec<f64>,
    pub window_ratio_min: f64,
    pub points: Vec<SharpnessPoint>,
}

fn validate_grid(x_grid: &[f64]) -> Result<()> {
    if x_grid.len() < 2 {
        return Err(Error::invalid("x_grid", "need at least two points"));
    }
    if x_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("x_grid", "must be strictly increasing"));
    }
    if !(x_grid[0] > 1.0) {
        return Err(Error::domain(
            "sharpness_certificate",
            format!("grid starts at {} which is inside [-1, 1] or negative", x_grid[0]),
        ));
    }
    Ok(())
}

/// Evaluates `R(x)` and the restricted-window lower-bound sum on every grid
/// point.
pub fn sharpness_certificate(x_grid: &[f64], params: &SumParams) -> Result<SharpnessCertificate> {
    validate_grid(x_grid)?;
    let points = x_grid
        .iter()
        .map(|&x| sharpness_point(x, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_certificate(*params, points))
}

/// Builds a certificate from points computed elsewhere (e.g. in parallel).
pub fn assemble_certificate(params: SumParams, points: Vec<SharpnessPoint>) -> SharpnessCertificate {
    let x_grid: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ratios: Vec<f64> = points.iter().map(SharpnessPoint::ratio).collect();
    let log_x: Vec<f64> = x_grid.iter().map(|x| x.ln()).collect();
    let log_r: Vec<f64> = points.iter().map(SharpnessPoint::log_ratio).collect();
    let window_fractions: Vec<f64> = points.iter().map(SharpnessPoint::window_fraction).collect();
    let window_ratios: Vec<f64> = points.iter().map(SharpnessPoint::window_ratio).collect();
    SharpnessCertificate {
        params,
        ratio_min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        ratio_max: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        slope: least_squares_slope(&log_x, &log_r),
        window_ratio_min: window_ratios.iter().copied().fold(f64::INFINITY, f64::min),
        x_grid,
        ratios,
        window_fractions,
        window_ratios,
        points,
    }
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (sxy, sxx) = xs.iter().zip(ys).fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    sxy / sxx
}

fn symmetric_gaussian_series(a: f64) -> f64 {
    // 1 + 2 sum_{n>=1} e^{-a n^2}, summed smallest-first.
    let mut terms = Vec::new();
    let mut n = 1.0f64;
    loop {
        let t = (-a * n * n).exp();
        if t < 1e-20 {
            break;
        }
        terms.push(t);
        n += 1.0;
    }
    1.0 + 2.0 * terms.iter().rev().sum::<f64>()
}

/// `g_delta(x) = sum_{n in Z} e^{-delta pi n^2 / x^2}`.
pub fn theta_sum(delta: f64, x: f64) -> f64 {
    symmetric_gaussian_series(delta * std::f64::consts::PI / (x * x))
}

/// Poisson-dual form `(x / sqrt(delta)) sum_{n in Z} e^{-pi n^2 x^2 / delta}`.
pub fn theta_sum_dual(delta: f64, x: f64) -> f64 {
    x / delta.sqrt() * symmetric_gaussian_series(std::f64::consts::PI * x * x / delta)
}
