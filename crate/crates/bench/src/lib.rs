//! Benchmark-only crate; see `benches/pipeline.rs`.

/// Published operating point with a noise threshold.
pub fn config_a() -> (f64, oposim::OpoCoupling, oposim::OpoDrive) {
    (
        5.70,
        oposim::OpoCoupling::new(0.008, 0.937).unwrap(),
        oposim::OpoDrive::from_gain(2.75).unwrap(),
    )
}
