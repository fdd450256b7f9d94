//! Orthonormal Hermite functions.
//!
//! `h_n(x) = e^{-x^2/2} H_n(x) / sqrt(2^n sqrt(pi) n!)`, evaluated exactly by
//! the forward three-term recurrence
//!
//! ```text
//! h_{n+1}(x) = x sqrt(2/(n+1)) h_n(x) - sqrt(n/(n+1)) h_{n-1}(x)
//! ```
//!
//! run on rescaled doubles with a binary exponent accumulator, and
//! asymptotically by the Plancherel-Rotach formula in the monotonic region
//! `2(n+1) < x^2`.

use crate::error::{Error, Result};
use crate::signed_log::SignedLog;

/// Floor on the monotonic-regime margin: PR forms require
/// `2(n+1) <= (1 - eps) x^2` with `eps >= DEFAULT_MONOTONIC_EPS`.
pub const DEFAULT_MONOTONIC_EPS: f64 = 1e-3;

/// Largest order for which [`hermite_polynomial_coefficients`] is available.
pub const MAX_POLYNOMIAL_ORDER: usize = 30;

const RESCALE_HI: f64 = 1.340_780_792_994_259_7e154; // 2^512
const RESCALE_LO: f64 = 7.458_340_731_200_207e-155; // 2^-512

/// `ln h_0(x) = -ln(pi)/4 - x^2/2`, with `x^2` split exactly into hi + lo.
fn ground_state(x: f64) -> SignedLog {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    SignedLog::from_ln(-0.5 * hi).scale_ln(-0.5 * lo - 0.25 * std::f64::consts::PI.ln())
}

/// Iterator over `h_0(x), h_1(x), h_2(x), ...`.
///
/// Each step costs one multiply-add; magnitudes are renormalized by exact
/// powers of two whenever they leave `[2^-512, 2^512]`.
#[derive(Debug, Clone)]
pub struct HermiteOrders {
    x: f64,
    base: SignedLog,
    shift: i64,
    prev: f64,
    cur: f64,
    next_order: u64,
}

impl HermiteOrders {
    pub fn new(x: f64) -> Self {
        HermiteOrders {
            x,
            base: ground_state(x),
            shift: 0,
            prev: 0.0,
            cur: 1.0,
            next_order: 0,
        }
    }

    fn step(&mut self) {
        let k = (self.next_order - 1) as f64;
        let next = self.x * (2.0 / (k + 1.0)).sqrt() * self.cur - (k / (k + 1.0)).sqrt() * self.prev;
        self.prev = self.cur;
        self.cur = next;
        let m = self.cur.abs().max(self.prev.abs());
        if m > RESCALE_HI || (m < RESCALE_LO && m > 0.0) {
            let e = exponent_of(m);
            let f = 2f64.powi(-e as i32);
            self.cur *= f;
            self.prev *= f;
            self.shift += e;
        }
    }

    fn current(&self) -> SignedLog {
        (SignedLog::from_f64(self.cur) * self.base).mul_pow2(self.shift)
    }
}

impl Iterator for HermiteOrders {
    type Item = SignedLog;

    fn next(&mut self) -> Option<SignedLog> {
        if self.next_order > 0 {
            self.step();
        }
        self.next_order += 1;
        Some(self.current())
    }

    fn nth(&mut self, n: usize) -> Option<SignedLog> {
        // Skipped orders only need the recurrence, not a SignedLog each.
        for _ in 0..n {
            if self.next_order > 0 {
                self.step();
            }
            self.next_order += 1;
        }
        self.next()
    }
}

fn exponent_of(m: f64) -> i64 {
    // m is a positive normal double here.
    (((m.to_bits() >> 52) & 0x7ff) as i64) - 1023
}

/// `h_n(x)` as an overflow-safe value.
pub fn hermite_exact(n: u64, x: f64) -> SignedLog {
    HermiteOrders::new(x)
        .nth(n as usize)
        .expect("HermiteOrders is infinite")
}

/// `h_0(x), ..., h_{n_max}(x)` in one sweep.
pub fn hermite_sweep(n_max: usize, x: f64) -> Vec<SignedLog> {
    HermiteOrders::new(x).take(n_max + 1).collect()
}

/// The hyperbolic coordinate `x = sqrt(2(n+1)) cosh(phi)` of the monotonic
/// region. `n` may be real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiCoordinate {
    pub phi: f64,
    pub n: f64,
    pub x: f64,
}

impl PhiCoordinate {
    /// `x / sqrt(2(n+1))`.
    pub fn ratio(&self) -> f64 {
        self.x / (2.0 * (self.n + 1.0)).sqrt()
    }

    /// `sinh(phi)`, computed as `sqrt((r-1)(r+1))` to stay accurate near the
    /// turning point.
    pub fn sinh(&self) -> f64 {
        let r = self.ratio();
        ((r - 1.0) * (r + 1.0)).sqrt()
    }

    pub fn cosh(&self) -> f64 {
        self.ratio()
    }
}

pub fn phi_coordinate(n: f64, x: f64) -> Result<PhiCoordinate> {
    if !(n > -1.0) || !x.is_finite() {
        return Err(Error::domain(
            "phi_coordinate",
            format!("need n > -1 and finite x, got n = {n}, x = {x}"),
        ));
    }
    let r = x / (2.0 * (n + 1.0)).sqrt();
    if !(r >= 1.0) {
        return Err(Error::domain(
            "phi_coordinate",
            format!("x = {x} lies below sqrt(2(n+1)) = {}", (2.0 * (n + 1.0)).sqrt()),
        ));
    }
    let u = r - 1.0;
    let phi = (u + (u * (r + 1.0)).sqrt()).ln_1p();
    Ok(PhiCoordinate { phi, n, x })
}

fn check_monotonic(op: &'static str, n: u64, x: f64, eps: f64) -> Result<PhiCoordinate> {
    let eps = eps.max(DEFAULT_MONOTONIC_EPS);
    let x = x.abs();
    let limit = (1.0 - eps) * x * x / 2.0;
    let np1 = n as f64 + 1.0;
    if n < 1 || np1 > limit {
        return Err(Error::precondition(
            op,
            format!("need 2 <= n+1 <= (1-eps) x^2/2 with eps = {eps}; got n = {n}, x = {x}"),
        ));
    }
    let pc = phi_coordinate(n as f64, x)?;
    if !(pc.phi > 0.0) {
        return Err(Error::precondition(op, "phi_n = 0 makes the formula singular"));
    }
    Ok(pc)
}

/// Unreduced Plancherel-Rotach form, written in the shifted coordinate
/// `x = sqrt(2(n+1)) cosh(phi)`:
///
/// ```text
/// exp((n + 1/2) phi - (n+1) sinh(phi) cosh(phi)) / (2^{3/4} pi^{1/2} n^{1/4} sinh(phi)^{1/2})
/// ```
pub fn plancherel_rotach_estimate(n: u64, x: f64, eps: f64) -> Result<SignedLog> {
    let pc = check_monotonic("plancherel_rotach_estimate", n, x, eps)?;
    let nf = n as f64;
    let x = x.abs();
    let sqrt_d = (x * x - 2.0 * (nf + 1.0)).sqrt();
    let log = (nf + 0.5) * pc.phi
        - 0.5 * x * sqrt_d
        - 0.75 * std::f64::consts::LN_2
        - 0.5 * std::f64::consts::PI.ln()
        - 0.25 * nf.ln()
        - 0.5 * pc.sinh().ln();
    Ok(SignedLog::from_ln(log))
}

/// Classical Plancherel-Rotach asymptotic in the coordinate
/// `x = sqrt(2n+1) cosh(phi)`, exponent `(n/2 + 1/4)(2 phi - sinh(2 phi))`.
/// Kept as a diagnostic next to [`plancherel_rotach_estimate`].
pub fn plancherel_rotach_classical(n: u64, x: f64, eps: f64) -> Result<SignedLog> {
    check_monotonic("plancherel_rotach_classical", n, x, eps)?;
    let nf = n as f64;
    let x = x.abs();
    let nu = 2.0 * nf + 1.0;
    let pc = phi_coordinate(nf - 0.5, x)?;
    let log = 0.5 * nu * pc.phi
        - 0.5 * x * (x * x - nu).sqrt()
        - 0.75 * std::f64::consts::LN_2
        - 0.5 * std::f64::consts::PI.ln()
        - 0.25 * nf.ln()
        - 0.5 * pc.sinh().ln();
    Ok(SignedLog::from_ln(log))
}

/// Per-term bound on `|h_n(x)|^kappa e^{-kappa n y} / n^beta` without its
/// implicit constant:
///
/// ```text
/// n^{-1/4 - beta} exp(kappa (n phi_n - n y - (x/2) sqrt(x^2 - 2(n+1))))
/// ```
pub fn hermite_pr_bound(n: u64, x: f64, kappa: f64, beta: f64, y: f64, eps: f64) -> Result<SignedLog> {
    let pc = check_monotonic("hermite_pr_bound", n, x, eps)?;
    let nf = n as f64;
    let x = x.abs();
    let a = nf * pc.phi - nf * y - 0.5 * x * (x * x - 2.0 * (nf + 1.0)).sqrt();
    Ok(SignedLog::from_ln((-0.25 - beta) * nf.ln() + kappa * a))
}

/// Integer coefficients of the physicists' Hermite polynomial `H_n`, lowest
/// degree first. Only for `n <= 30`; larger orders cancel catastrophically.
pub fn hermite_polynomial_coefficients(n: usize) -> Option<Vec<i128>> {
    if n > MAX_POLYNOMIAL_ORDER {
        return None;
    }
    let mut prev: Vec<i128> = vec![1];
    if n == 0 {
        return Some(prev);
    }
    let mut cur: Vec<i128> = vec![0, 2];
    for k in 1..n {
        let mut next = vec![0i128; k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= 2 * (k as i128) * c;
        }
        prev = cur;
        cur = next;
    }
    Some(cur)
}

/// `H_n(x)` by Horner's rule on the coefficient table (`n <= 30`).
pub fn hermite_polynomial(n: usize, x: f64) -> Option<f64> {
    let coeffs = hermite_polynomial_coefficients(n)?;
    Some(coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64))
}
