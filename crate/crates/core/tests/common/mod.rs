//! Shared test oracles, independent of the analytic moment formulas.
//!
//! Each integration-test binary compiles this module separately and uses a
//! different subset of it.
#![allow(dead_code)]

use oposim::{
    coherent_moments, opo_output_moments, CoherentSignal, OpoCoupling, OpoDrive,
    QuadratureMoments,
};

/// Composite Simpson rule over `[a, b]` with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

fn gaussian_pdf(phi: f64, sigma: f64) -> f64 {
    let z = phi / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Mixture moments by direct quadrature of the Gaussian phase kernel over
/// `[−8σ, 8σ]`: kernel-average the conditional means, and apply the law of
/// total variance per quadrature.
pub fn mixture_moments_by_quadrature<C>(conditional: C, sigma: f64) -> QuadratureMoments
where
    C: Fn(f64) -> QuadratureMoments,
{
    if sigma == 0.0 {
        return conditional(0.0);
    }
    let (a, b) = (-8.0 * sigma, 8.0 * sigma);
    let n = 8000;
    let mean_x = simpson(|p| gaussian_pdf(p, sigma) * conditional(p).mean_x, a, b, n);
    let mean_y = simpson(|p| gaussian_pdf(p, sigma) * conditional(p).mean_y, a, b, n);
    let ex2 = simpson(
        |p| {
            let m = conditional(p);
            gaussian_pdf(p, sigma) * (m.var_x + m.mean_x * m.mean_x)
        },
        a,
        b,
        n,
    );
    let ey2 = simpson(
        |p| {
            let m = conditional(p);
            gaussian_pdf(p, sigma) * (m.var_y + m.mean_y * m.mean_y)
        },
        a,
        b,
        n,
    );
    QuadratureMoments::new(mean_x, mean_y, ex2 - mean_x * mean_x, ey2 - mean_y * mean_y).unwrap()
}

/// Conditional moments of a bare coherent state at phase `phi`.
pub fn coherent_conditional(beta: f64) -> impl Fn(f64) -> QuadratureMoments {
    move |phi| coherent_moments(CoherentSignal::new(beta, phi).unwrap())
}

/// Conditional moments of the OPO output seeded at phase `phi`.
pub fn opo_conditional(
    beta: f64,
    coupling: OpoCoupling,
    drive: OpoDrive,
) -> impl Fn(f64) -> QuadratureMoments {
    move |phi| opo_output_moments(CoherentSignal::new(beta, phi).unwrap(), coupling, drive)
}

/// Published operating point with a noise threshold.
pub fn config_a() -> (f64, OpoCoupling, OpoDrive) {
    (
        5.70,
        OpoCoupling::new(0.008, 0.937).unwrap(),
        OpoDrive::from_gain(2.75).unwrap(),
    )
}

/// Published operating point that is beneficial at every noise level.
pub fn config_b() -> (f64, OpoCoupling, OpoDrive) {
    (
        2.05,
        OpoCoupling::new(0.079, 0.871).unwrap(),
        OpoDrive::from_gain(3.12).unwrap(),
    )
}

pub fn assert_abs_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: expected {expected}, got {actual} (|diff| = {:e} > {tol:e})",
        (actual - expected).abs()
    );
}
