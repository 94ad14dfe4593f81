//! Property tests for the model invariants.

mod common;

use common::config_a;
use oposim::{
    diffused_moments, estimate_phase, opo_diffused_moments, output_variances,
    phase_compression, phase_variance_no_opo, phase_variance_with_opo, threshold_bisection,
    threshold_closed_form, Classification, CoherentSignal, OpoCoupling, OpoDrive, PhaseDiffusion,
    SigmaGrid,
};
use proptest::prelude::*;

fn beta_strategy() -> impl Strategy<Value = f64> {
    0.05f64..10.0
}

fn sigma_strategy() -> impl Strategy<Value = f64> {
    0.0f64..2.5
}

fn drive_strategy() -> impl Strategy<Value = OpoDrive> {
    (0.0f64..0.97).prop_map(|d| OpoDrive::new(d).unwrap())
}

fn coupling_strategy() -> impl Strategy<Value = OpoCoupling> {
    (0.005f64..0.4, 0.3f64..0.6).prop_map(|(i, e)| OpoCoupling::new(i, e).unwrap())
}

proptest! {
    #[test]
    fn diffusion_squeezes_x_less_than_y(beta in beta_strategy(), sigma in sigma_strategy()) {
        let m = diffused_moments(
            CoherentSignal::new(beta, 0.0).unwrap(),
            PhaseDiffusion::new(sigma).unwrap(),
        );
        prop_assert!(m.var_x <= m.var_y + 1e-15);
        prop_assert!(m.uncertainty_product() >= 1.0 - 1e-12);
    }

    #[test]
    fn bare_variance_is_bounded_below_by_shot_noise(
        beta in beta_strategy(),
        sigma in sigma_strategy(),
    ) {
        let bound = 1.0 / (4.0 * beta * beta);
        let v = phase_variance_no_opo(beta, sigma).unwrap();
        prop_assert!(v >= bound * (1.0 - 1e-14));
        if sigma > 1e-3 {
            prop_assert!(v > bound);
        }
    }

    #[test]
    fn bare_variance_increases_with_noise(
        beta in beta_strategy(),
        sigma in 0.0f64..2.0,
        bump in 1e-3f64..0.5,
    ) {
        let lo = phase_variance_no_opo(beta, sigma).unwrap();
        let hi = phase_variance_no_opo(beta, sigma + bump).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn chained_estimator_matches_closed_form(
        beta in beta_strategy(),
        sigma in 1e-3f64..2.0,
    ) {
        let chained = estimate_phase(diffused_moments(
            CoherentSignal::new(beta, 0.0).unwrap(),
            PhaseDiffusion::new(sigma).unwrap(),
        ))
        .unwrap()
        .variance;
        let closed = phase_variance_no_opo(beta, sigma).unwrap();
        prop_assert!((chained - closed).abs() <= 1e-12 * closed.max(1.0));
    }

    #[test]
    fn output_variances_bracket_vacuum(esc in 0.01f64..=1.0, drive in drive_strategy()) {
        let (vx, vy) = output_variances(esc, drive).unwrap();
        prop_assert!(vx >= 1.0);
        prop_assert!(vy <= 1.0);
        // Squeezing is floored by the escape efficiency.
        prop_assert!(vy > 1.0 - esc);
        // Uncertainty-product identity.
        let d = drive.d();
        let expected = 1.0 + esc * (1.0 - esc) * 16.0 * d * d
            / ((1.0 - d * d) * (1.0 - d * d));
        prop_assert!((vx * vy - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn drive_gain_round_trip(d in 0.0f64..0.999) {
        let drive = OpoDrive::new(d).unwrap();
        let back = OpoDrive::from_gain(drive.gain()).unwrap();
        prop_assert!((back.d() - d).abs() <= 1e-14);
    }

    #[test]
    fn compression_contracts_toward_the_amplified_axis(
        theta in -1.5f64..1.5,
        drive in drive_strategy(),
    ) {
        let out = phase_compression(theta, drive);
        prop_assert!(out.abs() <= theta.abs() + 1e-15);
        prop_assert!(out * theta >= 0.0, "sign must be preserved");
        if theta.abs() > 1e-6 && drive.d() > 1e-6 {
            prop_assert!(out.abs() < theta.abs());
        }
    }

    #[test]
    fn compression_monotone_in_angle_and_drive(
        theta in 0.01f64..1.5,
        drive in drive_strategy(),
        angle_bump in 1e-3f64..0.05,
        drive_bump in 1e-3f64..0.02,
    ) {
        let base = phase_compression(theta, drive);
        prop_assert!(phase_compression(theta + angle_bump, drive) > base);
        let deeper = OpoDrive::new((drive.d() + drive_bump).min(0.999)).unwrap();
        if deeper.d() > drive.d() {
            prop_assert!(phase_compression(theta, deeper) < base);
        }
    }

    #[test]
    fn opo_chain_matches_with_opo_variance(
        beta in beta_strategy(),
        sigma in 1e-3f64..2.0,
        coupling in coupling_strategy(),
        drive in drive_strategy(),
    ) {
        let chained = estimate_phase(
            opo_diffused_moments(beta, PhaseDiffusion::new(sigma).unwrap(), coupling, drive)
                .unwrap(),
        )
        .unwrap()
        .variance;
        let closed = phase_variance_with_opo(beta, sigma, coupling, drive).unwrap();
        prop_assert!((chained - closed).abs() <= 1e-12 * closed.max(1.0));
    }

    #[test]
    fn closed_form_and_bisection_always_agree(
        beta in 0.2f64..8.0,
        coupling in coupling_strategy(),
        drive in drive_strategy(),
    ) {
        let grid = SigmaGrid::default();
        let closed = threshold_closed_form(beta, coupling, drive).unwrap().classification;
        let scanned = threshold_bisection(beta, coupling, drive, grid).unwrap().classification;
        prop_assert!(
            oposim::threshold::methods_agree(&closed, &scanned, &grid),
            "closed {closed:?} vs scanned {scanned:?}"
        );
        if let (Classification::Threshold { sigma_th: a }, Classification::Threshold { sigma_th: b }) =
            (&closed, &scanned)
        {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn advantage_increases_with_noise_when_a_crossing_exists(
        sigma in 0.05f64..1.9,
        bump in 1e-3f64..0.1,
    ) {
        let (beta, coupling, drive) = config_a();
        let lo = oposim::variance_advantage(beta, sigma, coupling, drive).unwrap();
        let hi = oposim::variance_advantage(beta, sigma + bump, coupling, drive).unwrap();
        prop_assert!(hi > lo);
    }
}
