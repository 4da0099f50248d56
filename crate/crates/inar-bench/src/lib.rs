//! Shared fixtures for the criterion benchmarks in `benches/`.

use inar::{CountSeries, Family, Inar1Model, InnovationSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A model for each innovation family at the parameter values used
/// throughout the benchmarks (overdispersed DP and GP, unit-mean Poisson
/// kept at the same stationary scale as the DP model).
pub fn bench_models() -> Vec<(&'static str, Inar1Model)> {
    vec![
        (
            "poisson",
            Inar1Model::new(0.3, InnovationSpec::poisson(5.0).unwrap()).unwrap(),
        ),
        (
            "double-poisson",
            Inar1Model::new(0.3, InnovationSpec::double_poisson(5.0, 0.5).unwrap()).unwrap(),
        ),
        (
            "gen-poisson",
            Inar1Model::new(0.3, InnovationSpec::gen_poisson(1.0, 0.5).unwrap()).unwrap(),
        ),
    ]
}

/// A reproducible simulated path from `model`.
pub fn bench_series(model: &Inar1Model, length: usize, seed: u64) -> CountSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    inar::simulate(model, length, 200, &mut rng).unwrap()
}

/// The family of a benchmark model, for fit dispatch.
pub fn family_of(model: &Inar1Model) -> Family {
    model.family()
}
