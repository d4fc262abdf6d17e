//! Shared fixtures for the criterion benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use httl_core::config::load_preset;
use httl_core::geom::ConvexPolygon;
use httl_core::scenario::{Deployment, Scenario};

/// WSN2 preset scenario with a seeded random deployment (random index map).
pub fn wsn2_instance(seed: u64) -> (Scenario, Deployment) {
    let s = load_preset("wsn2").unwrap().scenario;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Deployment::random_uniform(&s, &mut rng);
    d.t = (0..s.n_aps()).map(|_| rng.gen_range(0..s.n_fcs())).collect();
    (s, d)
}

/// Thin-strip instance with skewed weights for the oracle benchmark.
pub fn strip_instance() -> Scenario {
    let omega = ConvexPolygon::rect(0.0, 0.0, 1.0, 1e-3).unwrap();
    Scenario::new(omega, None, 2, 1, vec![1.0, 100.0], vec![1.0, 100.0], 1.0).unwrap()
}
