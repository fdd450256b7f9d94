//! Hermite expansions and harmonic-oscillator evolution.
//!
//! Functions are expanded in the orthonormal basis
//! `e_n(x) = (2 pi)^{1/4} h_n(sqrt(2 pi) x)`, so `||f||^2 = sum c_n^2` holds
//! exactly. The evolution `i d_t Phi = (d_x^2 - 4 pi^2 x^2) Phi` is diagonal in
//! this basis: `Phi(x, t) = sum_n e^{2(2n+1) pi i t} c_n e_n(x)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decay_sum::{sum_from, SumParams};
use crate::error::{Error, Result};
use crate::hermite::HermiteOrders;
use crate::signed_log::SignedLog;

/// `sqrt(2 pi)`, the argument rescaling of the basis.
pub const BASIS_SCALE: f64 = 2.506_628_274_631_000_2;

/// Default expansion length.
pub const DEFAULT_N_TERMS: usize = 400;

fn log_basis_norm() -> f64 {
    0.25 * (2.0 * std::f64::consts::PI).ln()
}

/// `e_n(x)` for `n = 0..len`.
pub fn basis_column(len: usize, x: f64) -> Vec<SignedLog> {
    let shift = log_basis_norm();
    HermiteOrders::new(BASIS_SCALE * x)
        .take(len)
        .map(|h| h.scale_ln(shift))
        .collect()
}

pub fn basis_function(n: u64, x: f64) -> SignedLog {
    basis_column(n as usize + 1, x)[n as usize]
}

/// How the coefficients beyond the stored ones are controlled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailBound {
    /// Nothing is known about the discarded coefficients.
    Unknown,
    /// The expansion is finite; there is no tail.
    Exact,
    /// `|c_n| <= constant * e^{-alpha n} n^{-1/4}` for every discarded `n`.
    Vemuri { constant: f64, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteCoefficients {
    coeffs: Vec<f64>,
    quad_error: Vec<f64>,
    converged: Vec<bool>,
    nodes: usize,
    tail: TailBound,
}

impl HermiteCoefficients {
    /// A finite expansion known exactly.
    pub fn from_exact(coeffs: Vec<f64>) -> Self {
        let n = coeffs.len();
        HermiteCoefficients {
            coeffs,
            quad_error: vec![0.0; n],
            converged: vec![true; n],
            nodes: 0,
            tail: TailBound::Exact,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn quad_error(&self) -> &[f64] {
        &self.quad_error
    }

    pub fn converged(&self) -> &[bool] {
        &self.converged
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn basis_scale(&self) -> f64 {
        BASIS_SCALE
    }

    /// Trapezoid nodes used by the final quadrature level (0 for exact sets).
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn tail(&self) -> TailBound {
        self.tail
    }

    pub fn with_tail(mut self, tail: TailBound) -> Self {
        self.tail = tail;
        self
    }

    /// Keeps the first `len` coefficients; the tail becomes [`TailBound::Unknown`]
    /// unless nothing nonzero was dropped from an exact set.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.len());
        let dropped_zero = self.coeffs[len..].iter().all(|c| *c == 0.0);
        let tail = match self.tail {
            TailBound::Exact if dropped_zero => TailBound::Exact,
            TailBound::Vemuri { .. } => self.tail,
            _ => TailBound::Unknown,
        };
        HermiteCoefficients {
            coeffs: self.coeffs[..len].to_vec(),
            quad_error: self.quad_error[..len].to_vec(),
            converged: self.converged[..len].to_vec(),
            nodes: self.nodes,
            tail,
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Errors if any coefficient failed the refinement test.
    pub fn check_converged(&self) -> Result<()> {
        let bad: Vec<usize> = self
            .converged
            .iter()
            .enumerate()
            .filter(|(_, ok)| !**ok)
            .map(|(i, _)| i)
            .collect();
        match bad.first() {
            None => Ok(()),
            Some(&first) => Err(Error::Quadrature {
                first,
                count: bad.len(),
            }),
        }
    }

    /// `sum_n c_n e_n(x)`.
    pub fn reconstruct(&self, x: f64) -> f64 {
        basis_column(self.len(), x)
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| c * e.to_f64())
            .sum()
    }

    /// Checks the coefficients against the decay `e^{-alpha n} n^{-1/4}` and,
    /// if the check passes, keeps the certified prefix and records the bound as
    /// the tail.
    pub fn certify(&self, alpha: f64) -> Result<HermiteCoefficients> {
        let check = vemuri_decay_check(self, alpha)?;
        if !check.constant.is_finite() {
            return Err(Error::invalid(
                "coefficients",
                format!("coefficients do not decay like e^(-{alpha} n) n^(-1/4)"),
            ));
        }
        let mut out = self.truncated(check.retained);
        out.tail = match self.tail {
            TailBound::Exact if check.retained == self.len() => TailBound::Exact,
            _ => TailBound::Vemuri {
                constant: check.constant,
                alpha,
            },
        };
        Ok(out)
    }
}

/// Trapezoid rule on `[-half_width, half_width]`, doubling the node count
/// until successive coefficient vectors agree to `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub half_width: f64,
    pub initial_nodes: usize,
    pub max_nodes: usize,
    pub tolerance: f64,
}

impl QuadratureSpec {
    pub fn with_half_width(half_width: f64) -> Self {
        QuadratureSpec {
            half_width,
            initial_nodes: 64,
            max_nodes: 1 << 16,
            tolerance: 1e-10,
        }
    }

    /// Window for integrands dominated by `e^{-a pi x^2}`: the Gaussian is
    /// below `1e-16` of its peak at the edge.
    pub fn for_gaussian_decay(a: f64) -> Self {
        Self::with_half_width((16.0 * std::f64::consts::LN_10 / (a * std::f64::consts::PI)).sqrt() + 0.5)
    }

    /// Window for finite expansions up to order `n_max`: beyond
    /// `sqrt(2 n_max + 1) + 10` in the scaled variable every `h_n` is below
    /// `e^{-40}` of its peak.
    pub fn for_hermite_span(n_max: usize) -> Self {
        Self::with_half_width(((2.0 * n_max as f64 + 1.0).sqrt() + 10.0) / BASIS_SCALE)
    }
}

fn trapezoid_level(f: &dyn Fn(f64) -> f64, n_terms: usize, half_width: f64, intervals: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 2.0 * half_width / intervals as f64;
    let mut sums = vec![0.0; n_terms];
    let mut abs_sums = vec![0.0; n_terms];
    for i in 0..=intervals {
        let x = -half_width + i as f64 * h;
        let w = if i == 0 || i == intervals { h / 2.0 } else { h };
        let fx = f(x);
        if fx == 0.0 {
            continue;
        }
        let wf = SignedLog::from_f64(w * fx);
        for (n, e) in basis_column(n_terms, x).into_iter().enumerate() {
            let v = (wf * e).to_f64();
            sums[n] += v;
            abs_sums[n] += v.abs();
        }
    }
    (sums, abs_sums)
}

/// `c_n = <f, e_n>` for `n < n_terms`.
///
/// `quad_error[n]` is the change between the last two refinement levels plus a
/// rounding floor proportional to `sum |w_i f(x_i) e_n(x_i)|`; indices whose
/// refinement change stayed above the tolerance are flagged unconverged.
pub fn expand(f: &dyn Fn(f64) -> f64, n_terms: usize, quad: &QuadratureSpec) -> Result<HermiteCoefficients> {
    if n_terms == 0 {
        return Err(Error::invalid("n_terms", "must be positive"));
    }
    if !(quad.half_width > 0.0) || quad.initial_nodes < 2 || quad.max_nodes < quad.initial_nodes {
        return Err(Error::invalid("quad", format!("invalid quadrature spec {quad:?}")));
    }
    let mut intervals = quad.initial_nodes;
    let (mut prev, _) = trapezoid_level(f, n_terms, quad.half_width, intervals);
    loop {
        intervals *= 2;
        let (cur, abs_sums) = trapezoid_level(f, n_terms, quad.half_width, intervals);
        let diffs: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| (a - b).abs()).collect();
        let done = diffs.iter().all(|d| *d <= quad.tolerance);
        if done || intervals * 2 > quad.max_nodes {
            let quad_error = diffs
                .iter()
                .zip(&abs_sums)
                .enumerate()
                .map(|(n, (d, a))| d + 4.0 * (1.0 + (n as f64).sqrt()) * f64::EPSILON * a)
                .collect();
            let converged = diffs.iter().map(|d| *d <= quad.tolerance).collect();
            return Ok(HermiteCoefficients {
                coeffs: cur,
                quad_error,
                converged,
                nodes: intervals + 1,
                tail: TailBound::Unknown,
            });
        }
        prev = cur;
    }
}

/// Outcome of [`vemuri_decay_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VemuriCheck {
    pub alpha: f64,
    /// Smallest `C` with `|c_n| <= C e^{-alpha n} max(n,1)^{-1/4}` on the
    /// retained prefix; `+inf` when the data contradict the decay rate.
    pub constant: f64,
    /// Length of the prefix whose quadrature error resolves the bound.
    pub retained: usize,
    /// Indices whose quadrature error exceeds the bound being tested.
    pub refused: Vec<usize>,
}

fn vemuri_weight(n: usize, alpha: f64) -> f64 {
    (-alpha * n as f64).exp() * (n.max(1) as f64).powf(-0.25)
}

/// Resolution margin: an index is usable when its quadrature error is at most
/// this fraction of the bound at that index.
const VEMURI_RESOLUTION: f64 = 1e-3;

pub fn vemuri_decay_check(coeffs: &HermiteCoefficients, alpha: f64) -> Result<VemuriCheck> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", format!("must be finite and > 0, got {alpha}")));
    }
    let ratio = |n: usize| coeffs.coeffs[n].abs() / vemuri_weight(n, alpha);
    let resolved = |n: usize| coeffs.converged[n] && coeffs.coeffs[n].abs() > 2.0 * coeffs.quad_error[n];
    let c0 = (0..coeffs.len())
        .filter(|&n| resolved(n))
        .map(ratio)
        .fold(0.0f64, f64::max);
    if !(c0 > 0.0) {
        return Err(Error::invalid(
            "coefficients",
            "no coefficient is resolved by the quadrature",
        ));
    }
    let usable = |n: usize| {
        coeffs.converged[n]
            && coeffs.coeffs[n].is_finite()
            && coeffs.quad_error[n] <= VEMURI_RESOLUTION * c0 * vemuri_weight(n, alpha)
    };
    let retained = (0..coeffs.len()).find(|&n| !usable(n)).unwrap_or(coeffs.len());
    let refused = (retained..coeffs.len()).filter(|&n| !usable(n)).collect();
    let ratios: Vec<f64> = (0..retained).map(ratio).collect();
    let mut constant = ratios.iter().copied().fold(0.0f64, f64::max);
    // A rate the data do not support shows up as the supremum still growing at
    // the end of the certified range.
    if retained >= 8 {
        let split = retained - retained / 4;
        let head = ratios[..split].iter().copied().fold(0.0f64, f64::max);
        let tail_max = (split..retained)
            .filter(|&n| resolved(n))
            .map(|n| ratios[n])
            .fold(0.0f64, f64::max);
        if tail_max > head * (1.0 + 1e-6) {
            constant = f64::INFINITY;
        }
    }
    Ok(VemuriCheck {
        alpha,
        constant,
        retained,
        refused,
    })
}

/// `Phi_f(x, t)` carried as `scaled * e^{log_scale}` so that far-field values
/// survive, plus a rigorous bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evolution {
    pub scaled: Complex64,
    pub log_scale: f64,
    pub tail: SignedLog,
}

impl Evolution {
    pub fn value(&self) -> Complex64 {
        if self.scaled == Complex64::new(0.0, 0.0) {
            return self.scaled;
        }
        self.scaled * self.log_scale.exp()
    }

    pub fn log_abs(&self) -> f64 {
        self.scaled.norm().ln() + self.log_scale
    }

    pub fn tail_radius(&self) -> f64 {
        self.tail.to_f64()
    }
}

/// Basis values at one point, normalized by their largest magnitude.
struct Column {
    scaled: Vec<f64>,
    log_scale: f64,
}

impl Column {
    fn new(len: usize, x: f64) -> Self {
        let logs = basis_column(len, x);
        let anchor = logs
            .iter()
            .copied()
            .fold(SignedLog::ZERO, |m, v| if v.cmp_abs(&m).is_gt() { v.abs() } else { m });
        if anchor.is_zero() {
            return Column {
                scaled: vec![0.0; len],
                log_scale: 0.0,
            };
        }
        let scaled = logs
            .iter()
            .map(|v| {
                if v.is_zero() {
                    0.0
                } else {
                    f64::from(v.sign()) * v.ln_ratio(&anchor).exp()
                }
            })
            .collect();
        Column {
            scaled,
            log_scale: anchor.logmag(),
        }
    }

    fn evolve(&self, coeffs: &[f64], t: f64) -> Complex64 {
        coeffs
            .iter()
            .zip(&self.scaled)
            .enumerate()
            .map(|(n, (c, e))| phase(n, t) * (c * e))
            .sum()
    }

    fn abs_sum(&self, coeffs: &[f64]) -> SignedLog {
        let s: f64 = coeffs.iter().zip(&self.scaled).map(|(c, e)| (c * e).abs()).sum();
        SignedLog::from_f64(s).scale_ln(self.log_scale)
    }
}

/// `e^{2 (2n+1) pi i t}`, reduced modulo one turn before the trig call.
pub fn phase(n: usize, t: f64) -> Complex64 {
    let turns = ((2 * n + 1) as f64 * t).rem_euclid(1.0);
    let (s, c) = (2.0 * std::f64::consts::PI * turns).sin_cos();
    Complex64::new(c, s)
}

/// `C (2 pi)^{1/4} sum_{n >= start} e^{-alpha n} max(n,1)^{-1/4} |h_n(sqrt(2 pi) x)|`.
fn vemuri_majorant(constant: f64, alpha: f64, start: usize, x: f64) -> SignedLog {
    let params = SumParams::new(1.0, 0.25, alpha).expect("alpha validated by caller");
    let u = BASIS_SCALE * x;
    let mut total = sum_from(start.max(1) as u64, u, &params).value;
    if start == 0 {
        total = total + HermiteOrders::new(u).next().expect("infinite").abs();
    }
    total.scale_ln(constant.ln() + log_basis_norm())
}

/// `C 2^{1/4} sum_{n >= start} e^{-alpha n} max(n,1)^{-1/4}`, from `|e_n| <= 2^{1/4}`.
fn uniform_tail(constant: f64, alpha: f64, start: usize) -> SignedLog {
    let k = start.max(1) as f64;
    let mut total = SignedLog::from_ln(-alpha * k - 0.25 * k.ln() - (-(-alpha).exp_m1()).ln());
    if start == 0 {
        total = total + SignedLog::ONE;
    }
    total.scale_ln(constant.ln() + 0.25 * std::f64::consts::LN_2)
}

/// Both bounds are rigorous; the pointwise one wins far from the origin.
fn tail_at(coeffs: &HermiteCoefficients, x: f64) -> SignedLog {
    match coeffs.tail {
        TailBound::Exact => SignedLog::ZERO,
        TailBound::Unknown => SignedLog::from_f64(f64::INFINITY),
        TailBound::Vemuri { constant, alpha } => {
            let uniform = uniform_tail(constant, alpha, coeffs.len());
            let pointwise = vemuri_majorant(constant, alpha, coeffs.len(), x);
            if pointwise.cmp_abs(&uniform).is_lt() {
                pointwise
            } else {
                uniform
            }
        }
    }
}

pub fn evolve(coeffs: &HermiteCoefficients, x: f64, t: f64) -> Evolution {
    let col = Column::new(coeffs.len(), x);
    Evolution {
        scaled: col.evolve(&coeffs.coeffs, t),
        log_scale: col.log_scale,
        tail: tail_at(coeffs, x),
    }
}

/// `int |Phi(x, t)|^2 dx` by the trapezoid rule on `[-half_width, half_width]`.
pub fn evolved_norm_squared(coeffs: &HermiteCoefficients, t: f64, half_width: f64, intervals: usize) -> f64 {
    let h = 2.0 * half_width / intervals as f64;
    (0..=intervals)
        .map(|i| {
            let x = -half_width + i as f64 * h;
            let w = if i == 0 || i == intervals { h / 2.0 } else { h };
            w * evolve(coeffs, x, t).value().norm_sqr()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub x: f64,
    /// `tanh(alpha) pi x^2`.
    pub log_weight: f64,
    /// `max_t ln |Phi(x, t)|` over the t-grid.
    pub log_abs_max: f64,
    /// `ln |Phi(x, t)|` per t-grid entry.
    pub log_abs: Vec<f64>,
    pub log_tail: f64,
    /// `ln sum_n |c_n| |e_n(x)|` over the certified prefix.
    pub log_majorant: f64,
    /// `ln C (2 pi)^{1/4} (|h_0(u)| + S(u; 1, 1/4, alpha))`, `u = sqrt(2 pi) x`.
    pub log_vemuri_majorant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub alpha: f64,
    pub vemuri_constant: f64,
    /// Number of coefficients summed explicitly.
    pub truncation_n: usize,
    /// Number of coefficients supplied.
    pub n_terms: usize,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// `sup |Phi| e^{tanh(alpha) pi x^2}` over the grid.
    pub sup_weighted: f64,
    pub sup_at: (f64, f64),
    /// `sup tail(x) e^{tanh(alpha) pi x^2}`.
    pub tail_weighted_sup: f64,
    /// `sup (|Phi| + tail) e^{tanh(alpha) pi x^2}`.
    pub sup_bound: f64,
    /// `sup C (2pi)^{1/4} (|h_0| + S) e^{tanh(alpha) pi x^2}`, the t-free constant.
    pub majorant_weighted_sup: f64,
    /// `|Phi| <= sum |c_n||e_n| <= Vemuri majorant` at every grid point.
    pub triangle_holds: bool,
    pub points: Vec<DecayPoint>,
}

/// Weighted supremum of the evolution over an `(x, t)` grid, with the tail
/// bound folded in and the majorant cross-check against the weighted Hermite
/// sum at `(kappa, beta, y) = (1, 1/4, alpha)`.
pub fn decay_certificate(
    coeffs: &HermiteCoefficients,
    alpha: f64,
    x_grid: &[f64],
    t_grid: &[f64],
) -> Result<DecayCertificate> {
    if x_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::invalid("grid", "x and t grids must be nonempty"));
    }
    let check = vemuri_decay_check(coeffs, alpha)?;
    let certified = coeffs.certify(alpha)?;
    let constant = check.constant;
    let weight_rate = alpha.tanh() * std::f64::consts::PI;

    let points: Vec<DecayPoint> = x_grid
        .par_iter()
        .map(|&x| {
            let col = Column::new(certified.len(), x);
            let log_abs: Vec<f64> = t_grid
                .iter()
                .map(|&t| col.evolve(&certified.coeffs, t).norm().ln() + col.log_scale)
                .collect();
            let log_abs_max = log_abs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            DecayPoint {
                x,
                log_weight: weight_rate * x * x,
                log_abs_max,
                log_abs,
                log_tail: tail_at(&certified, x).logmag(),
                log_majorant: col.abs_sum(&certified.coeffs).logmag(),
                log_vemuri_majorant: vemuri_majorant(constant, alpha, 0, x).logmag(),
            }
        })
        .collect();

    let mut sup_weighted = f64::NEG_INFINITY;
    let mut sup_at = (x_grid[0], t_grid[0]);
    let mut tail_sup = f64::NEG_INFINITY;
    let mut bound_sup = f64::NEG_INFINITY;
    let mut majorant_sup = f64::NEG_INFINITY;
    let mut triangle_holds = true;
    let slack = 1e-10;
    for p in &points {
        for (j, la) in p.log_abs.iter().enumerate() {
            if la + p.log_weight > sup_weighted {
                sup_weighted = la + p.log_weight;
                sup_at = (p.x, t_grid[j]);
            }
        }
        tail_sup = tail_sup.max(p.log_tail + p.log_weight);
        let with_tail = SignedLog::from_ln(p.log_abs_max) + SignedLog::from_ln(p.log_tail);
        bound_sup = bound_sup.max(with_tail.logmag() + p.log_weight);
        majorant_sup = majorant_sup.max(p.log_vemuri_majorant + p.log_weight);
        if p.log_abs_max > p.log_majorant + slack || p.log_majorant > p.log_vemuri_majorant + slack {
            triangle_holds = false;
        }
    }

    Ok(DecayCertificate {
        alpha,
        vemuri_constant: constant,
        truncation_n: certified.len(),
        n_terms: coeffs.len(),
        x_grid: x_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        sup_weighted: sup_weighted.exp(),
        sup_at,
        tail_weighted_sup: tail_sup.exp(),
        sup_bound: bound_sup.exp(),
        majorant_weighted_sup: majorant_sup.exp(),
        triangle_holds,
        points,
    })
}

/// `sup |Phi(x, t)| e^{tanh(weight_alpha) pi x^2}` over the grid, from the
/// stored coefficients only and without certification.
pub fn weighted_sup(coeffs: &HermiteCoefficients, weight_alpha: f64, x_grid: &[f64], t_grid: &[f64]) -> f64 {
    let rate = weight_alpha.tanh() * std::f64::consts::PI;
    x_grid
        .par_iter()
        .map(|&x| {
            let col = Column::new(coeffs.len(), x);
            t_grid
                .iter()
                .map(|&t| col.evolve(&coeffs.coeffs, t).norm().ln() + col.log_scale + rate * x * x)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
        .exp()
}

/// `{k/64 : 0 <= k < 32}` together with the times `(2k+1)/16`, `0 <= k <= 7`.
pub fn standard_time_grid() -> Vec<f64> {
    let mut t: Vec<f64> = (0..32).map(|k| k as f64 / 64.0).collect();
    t.extend((0..8).map(|k| (2 * k + 1) as f64 / 16.0));
    t
}

/// Test functions in the Hardy class `E^infinity_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    /// `e^{-a pi x^2}`.
    Gaussian { a: f64 },
    /// `p(x) e^{-a pi x^2}` with `p` given lowest degree first.
    GaussianPolynomial { a: f64, poly: Vec<f64> },
}

impl TestFunction {
    /// `e^{-tanh(2 alpha) pi x^2}`, whose coefficients decay like `e^{-2 alpha n}`.
    pub fn hardy_gaussian(alpha: f64) -> Self {
        TestFunction::Gaussian {
            a: (2.0 * alpha).tanh(),
        }
    }

    pub fn decay_rate(&self) -> f64 {
        match self {
            TestFunction::Gaussian { a } | TestFunction::GaussianPolynomial { a, .. } => *a,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let g = (-self.decay_rate() * std::f64::consts::PI * x * x).exp();
        match self {
            TestFunction::Gaussian { .. } => g,
            TestFunction::GaussianPolynomial { poly, .. } => g * poly.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        let base = QuadratureSpec::for_gaussian_decay(self.decay_rate());
        match self {
            TestFunction::Gaussian { .. } => base,
            TestFunction::GaussianPolynomial { poly, .. } => {
                QuadratureSpec::with_half_width(base.half_width + (poly.len() as f64).sqrt())
            }
        }
    }

    pub fn expand(&self, n_terms: usize) -> Result<HermiteCoefficients> {
        expand(&|x| self.eval(x), n_terms, &self.quadrature())
    }
}

/// A finite expansion saturating the decay bound: `c_n = s_n e^{-alpha n} max(n,1)^{-1/4}`.
pub fn synthetic_envelope(alpha: f64, signs: &[f64]) -> HermiteCoefficients {
    let coeffs = signs
        .iter()
        .enumerate()
        .map(|(n, s)| s * vemuri_weight(n, alpha))
        .collect();
    HermiteCoefficients::from_exact(coeffs)
}

/// `sum_n e^{-alpha n} max(n,1)^{-1/4} |e_n(x)|` summed to convergence, the
/// t-free majorant for unit constant.
pub fn unit_majorant(alpha: f64, x: f64) -> SignedLog {
    vemuri_majorant(1.0, alpha, 0, x)
}

/// `sum_n |e^{2(2n+1) pi i t} c_n|^2`, equal to `sum c_n^2` up to rounding.
pub fn phased_norm_squared(coeffs: &HermiteCoefficients, t: f64) -> f64 {
    coeffs
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| (phase(n, t) * *c).norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal_under_quadrature() {
        // Expanding e_m itself gives the unit vector.
        for m in [0usize, 3, 10] {
            let f = |x: f64| basis_function(m as u64, x).to_f64();
            let c = expand(&f, 16, &QuadratureSpec::for_hermite_span(m)).unwrap();
            for (n, v) in c.coeffs().iter().enumerate() {
                let target = if n == m { 1.0 } else { 0.0 };
                assert!((v - target).abs() <= c.quad_error()[n] + 1e-12, "m {m} n {n}: {v}");
            }
        }
    }

    #[test]
    fn phase_half_period() {
        for n in 0..50 {
            let p = phase(n, 0.5);
            assert!((p + Complex64::new(1.0, 0.0)).norm() < 1e-15);
            assert_eq!(phase(n, 0.0), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn truncation_tracks_tail() {
        let c = HermiteCoefficients::from_exact(vec![1.0, 0.5, 0.0, 0.0]);
        assert_eq!(c.truncated(2).tail(), TailBound::Exact);
        assert_eq!(c.truncated(1).tail(), TailBound::Unknown);
        assert!(evolve(&c.truncated(1), 0.3, 0.0).tail_radius().is_infinite());
        assert_eq!(evolve(&c, 0.3, 0.0).tail_radius(), 0.0);
    }

    #[test]
    fn vemuri_check_rejects_slow_decay() {
        // Coefficients decaying at alpha/2 cannot be certified at alpha.
        let slow = synthetic_envelope(0.25, &[1.0; 60]);
        let check = vemuri_decay_check(&slow, 0.5).unwrap();
        assert!(check.constant.is_infinite());
        assert!(slow.certify(0.5).is_err());
        assert!(vemuri_decay_check(&slow, 0.0).is_err());
    }

    #[test]
    fn unconverged_quadrature_is_reported() {
        let f = |x: f64| (-std::f64::consts::PI * x * x).exp() * (40.0 * x).cos();
        let spec = QuadratureSpec {
            half_width: 4.0,
            initial_nodes: 4,
            max_nodes: 16,
            tolerance: 1e-10,
        };
        let c = expand(&f, 8, &spec).unwrap();
        assert!(matches!(c.check_converged(), Err(Error::Quadrature { .. })));
    }

    /// `<e^{-a pi x^2}, e_{2m}>` in closed form, via the generating function.
    fn gaussian_coefficient(a: f64, m: u32) -> f64 {
        let mut ln_ratio = 0.0;
        for j in 1..=m {
            // sqrt((2j)(2j-1)) / (2 j)
            let j = f64::from(j);
            ln_ratio += 0.5 * ((2.0 * j) * (2.0 * j - 1.0)).ln() - (2.0 * j).ln();
        }
        let r = (1.0 - a) / (1.0 + a);
        (0.25 * std::f64::consts::LN_2 - 0.5 * (1.0 + a).ln() + ln_ratio + f64::from(m) * r.ln()).exp()
    }

    #[test]
    fn gaussian_matches_closed_form() {
        for a in [0.5f64.tanh(), 1f64.tanh(), 2f64.tanh()] {
            let f = TestFunction::Gaussian { a };
            let c = f.expand(60).unwrap();
            c.check_converged().unwrap();
            for n in 0..60 {
                if n % 2 == 1 {
                    assert!(c.coeffs()[n].abs() <= c.quad_error()[n], "odd {n}: {}", c.coeffs()[n]);
                } else {
                    let exact = gaussian_coefficient(a, (n / 2) as u32);
                    assert!(
                        (c.coeffs()[n] - exact).abs() <= c.quad_error()[n] + 1e-14,
                        "a {a} n {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn gaussian_coefficient_slope() {
        // After removing the exact sqrt((2m)!)/(2^m m!) factor the log is affine
        // in m. The range stops where c_{2m} reaches the quadrature floor.
        let alpha: f64 = 0.25;
        let a = (2.0 * alpha).tanh();
        let c = TestFunction::Gaussian { a }.expand(64).unwrap();
        let ms: Vec<f64> = (5..=28).map(f64::from).collect();
        let logs: Vec<f64> = (5..=28u32)
            .map(|m| {
                let central =
                    gaussian_coefficient(a, m) / gaussian_coefficient(a, 0) / ((1.0 - a) / (1.0 + a)).powi(m as i32);
                (c.coeffs()[2 * m as usize] / central).ln()
            })
            .collect();
        let slope = crate::decay_sum::least_squares_slope(&ms, &logs);
        assert!((slope / (-4.0 * alpha) - 1.0).abs() < 0.01, "slope {slope}");
    }

    #[test]
    fn reconstruction_and_parseval() {
        let f = TestFunction::GaussianPolynomial {
            a: 1f64.tanh(),
            poly: vec![0.3, -1.0, 0.0, 0.5],
        };
        let c = f.expand(80).unwrap();
        for x in [-1.2, -0.3, 0.0, 0.7, 1.5] {
            assert!((c.reconstruct(x) - f.eval(x)).abs() < 1e-9, "x {x}");
            assert!((evolve(&c, x, 0.0).value().re - c.reconstruct(x)).abs() < 1e-12);
        }
        let l = f.quadrature().half_width;
        let norm0 = c.norm_squared();
        for t in [0.0, 0.1, 1.0 / 16.0, 0.37] {
            let q = evolved_norm_squared(&c, t, l, 4096);
            assert!((q / norm0 - 1.0).abs() < 1e-8, "t {t}: {q} vs {norm0}");
            assert!((phased_norm_squared(&c, t) / norm0 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn half_period_flips_sign() {
        let c = TestFunction::hardy_gaussian(0.5).expand(120).unwrap();
        for k in 0..40 {
            let x = k as f64 * 0.1;
            let a = evolve(&c, x, 0.0).value();
            let b = evolve(&c, x, 0.5).value();
            assert!((a + b).norm() < 1e-12, "x {x}");
            let t = 0.123;
            let m0 = evolve(&c, x, t).value().norm();
            let m1 = evolve(&c, x, t + 0.5).value().norm();
            assert!((m0 - m1).abs() < 1e-12);
        }
    }

    #[test]
    fn pde_residual() {
        // i dPhi/dt = (d^2/dx^2 - 4 pi^2 x^2) Phi on a smooth finite expansion.
        let signs: Vec<f64> = (0..12).map(|n| if n % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let c = synthetic_envelope(0.3, &signs);
        let (dt, dx) = (1e-5, 1e-3);
        let phi = |x: f64, t: f64| evolve(&c, x, t).value();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..31 {
            let x = -1.5 + 0.1 * i as f64;
            for t in [0.05, 0.2, 1.0 / 16.0] {
                let lhs = Complex64::i() * (phi(x, t + dt) - phi(x, t - dt)) / (2.0 * dt);
                let d2 = (phi(x + dx, t) - 2.0 * phi(x, t) + phi(x - dx, t)) / (dx * dx);
                let rhs = d2 - 4.0 * std::f64::consts::PI.powi(2) * x * x * phi(x, t);
                worst = worst.max((lhs - rhs).norm());
                scale = scale.max(lhs.norm());
            }
        }
        assert!(worst <= 1e-3 * scale, "residual {worst} vs {scale}");
    }

    #[test]
    fn vemuri_constant_of_basis_vector() {
        let c = expand(
            &|x| basis_function(0, x).to_f64(),
            30,
            &QuadratureSpec::for_hermite_span(0),
        )
        .unwrap();
        let check = vemuri_decay_check(&c, 0.5).unwrap();
        assert!((check.constant - 1.0).abs() < 1e-12, "{}", check.constant);
        assert!(check.refused.is_empty());
    }

    #[test]
    fn vemuri_constant_of_random_envelope_combination() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let alpha = 0.5;
        let signs: Vec<f64> = (0..=20).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let target = synthetic_envelope(alpha, &signs);
        let c = expand(&|x| target.reconstruct(x), 40, &QuadratureSpec::for_hermite_span(20)).unwrap();
        let check = vemuri_decay_check(&c, alpha).unwrap();
        assert!(
            check.constant >= 1.0 - 1e-9 && check.constant <= 1.0 + 1e-6,
            "{}",
            check.constant
        );
    }

    #[test]
    fn gaussian_certificate_is_finite_and_stable() {
        let alpha = 0.5;
        let f = TestFunction::hardy_gaussian(alpha);
        let x: Vec<f64> = (0..80).map(|k| 8.0 * k as f64 / 79.0).collect();
        let t = standard_time_grid();
        let short = decay_certificate(&f.expand(100).unwrap(), alpha, &x, &t).unwrap();
        let long = decay_certificate(&f.expand(200).unwrap(), alpha, &x, &t).unwrap();
        for cert in [&short, &long] {
            assert!(cert.sup_weighted.is_finite() && cert.sup_bound.is_finite());
            assert!(cert.triangle_holds);
            assert!(cert.sup_bound >= cert.sup_weighted);
        }
        assert!((long.sup_weighted / short.sup_weighted - 1.0).abs() <= 0.2);
        let at_zero = decay_certificate(&f.expand(100).unwrap(), alpha, &x, &[0.0]).unwrap();
        assert!(at_zero.sup_weighted <= short.sup_weighted);
    }

    #[test]
    fn stronger_weight_grows_with_extent() {
        let alpha = 0.5;
        let c = synthetic_envelope(alpha, &[1.0; 400]);
        let sup_to = |weight: f64, x_max: f64| {
            let x: Vec<f64> = (0..=40).map(|k| x_max * k as f64 / 40.0).collect();
            weighted_sup(&c, weight, &x, &[0.0])
        };
        let extents = [2.0, 3.0, 4.0, 5.0, 6.0];
        let strong: Vec<f64> = extents.iter().map(|&e| sup_to(1.0, e)).collect();
        let matched: Vec<f64> = extents.iter().map(|&e| sup_to(alpha, e)).collect();
        for w in strong.windows(2) {
            assert!(w[1] > 1.5 * w[0], "{strong:?}");
        }
        assert!(matched.last().unwrap() / matched.first().unwrap() < 2.0, "{matched:?}");
    }

    #[test]
    fn standard_grid_contains_exceptional_times() {
        let t = standard_time_grid();
        assert_eq!(t.len(), 40);
        for k in 0..8 {
            assert!(t.contains(&((2 * k + 1) as f64 / 16.0)));
        }
    }
}
