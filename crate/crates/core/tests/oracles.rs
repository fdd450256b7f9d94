//! Library results against oracles that do not share code with it.

use hermite_decay::decay_sum::{direct_sum, tail_bound, theta_sum, SumParams};
use hermite_decay::hermite::hermite_exact;
use hermite_decay::oscillator::{expand, QuadratureSpec, TestFunction};

// Digits are kept as produced, beyond f64 precision.
#[allow(clippy::excessive_precision)]
/// `(n, x, sign, ln|h_n(x)|)` from the normalized recurrence run at 80 digits.
const FROZEN: [(u64, f64, i8, f64); 9] = [
    (10, 3.5, 1, -2.423_456_591_716_655_586_9),
    (200, 12.25, -1, -1.662_443_979_676_974_732_5),
    (1000, 30.0, -1, -4.272_646_850_711_489_373),
    (1000, 44.75, 1, -1.496_536_331_108_070_246),
    (5000, 80.0, 1, -2.299_193_288_462_193_507_7),
    (3000, 100.0, 1, -928.402_940_335_464_529_69),
    (40, 1000.0, 1, -499_765.273_737_565_864_4),
    (0, 1000.0, 1, -500_000.286_182_471_462_35),
    (2500, 0.5, -1, -2.717_611_485_672_593_995_2),
];

#[test]
fn hermite_matches_extended_precision() {
    for (n, x, sign, ln) in FROZEN {
        let h = hermite_exact(n, x);
        assert_eq!(h.sign(), sign, "n {n} x {x}");
        // Oscillatory-region values inherit O(n eps) relative error.
        let tol = 1e-13 * (1.0 + ln.abs()) + 1e-15 * n as f64;
        assert!((h.logmag() - ln).abs() <= tol, "n {n} x {x}: {} vs {ln}", h.logmag());
    }
}

#[test]
fn theta_sum_against_direct_terms() {
    // Straight from the definition, summed smallest-first.
    for delta in [0.5, 1.0, 2.0] {
        for x in [1.0, 4.0, 17.0] {
            let mut terms: Vec<f64> = (-400i32..=400)
                .map(|n| (-std::f64::consts::PI * f64::from(n * n) * x * x / delta).exp())
                .collect();
            terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let direct = x / delta.sqrt() * terms.iter().sum::<f64>();
            assert!((theta_sum(delta, x) / direct - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn tail_bound_dominates_brute_force_tail() {
    for (k, b, y) in [(1.0, 0.25, 0.5), (2.0, -1.5, 0.3), (0.5, 1.0, 1.0)] {
        let p = SumParams::new(k, b, y).unwrap();
        let x = 12.0;
        let all = direct_sum(x, &p).to_f64();
        for m in [50u64, 200, 400] {
            let partial: f64 = (1..m)
                .map(|n| hermite_exact(n, x).abs().to_f64().powf(k) * (-k * n as f64 * y).exp() / (n as f64).powf(b))
                .sum();
            let tail = (all - partial).max(0.0);
            assert!(
                tail <= tail_bound(m, x, &p).to_f64() * (1.0 + 1e-9) + 1e-15 * all,
                "m {m}"
            );
        }
    }
}

#[test]
fn odd_gaussian_polynomial_has_no_even_coefficients() {
    let f = TestFunction::GaussianPolynomial {
        a: 0.8,
        poly: vec![0.0, 1.0, 0.0, -0.3],
    };
    let c = f.expand(40).unwrap();
    for n in (0..40).step_by(2) {
        assert!(c.coeffs()[n].abs() <= c.quad_error()[n], "n {n}");
    }
    // x e^{-a pi x^2} has a two-term closed form, checked at x = 0.4.
    let target = 0.4 * (1.0 - 0.3 * 0.16) * (-0.8 * std::f64::consts::PI * 0.16f64).exp();
    assert!((c.reconstruct(0.4) - target).abs() < 1e-9);
}

#[test]
fn expansion_refines_until_tolerance() {
    let spec = QuadratureSpec::for_gaussian_decay(0.3);
    let c = expand(&|x| (-0.3 * std::f64::consts::PI * x * x).exp(), 120, &spec).unwrap();
    c.check_converged().unwrap();
    assert!(c.nodes() > spec.initial_nodes);
    assert!(c.quad_error().iter().all(|e| *e <= 1e-10 + 1e-13));
}
