mod common;

use common::rel_close;
use common::suites::{exact_suites, mixed_sign_suite, Suite};
use drtsp::Mode;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Compares exact-mode values with the oracle; returns how many compared.
fn check_suite(s: &Suite, count: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0;
    for k in 0..count {
        let sub = (s.make)(&mut rng);
        let z = sub.eval().unwrap_or_else(|e| panic!("{} #{}: {}", s.name, k, e));
        let o = sub.oracle().unwrap_or_else(|e| panic!("{} #{} oracle: {}", s.name, k, e));
        if z.mode == Mode::Exact {
            assert!(rel_close(z.value, o.value, 1e-6), "{} #{}: reformulation {} vs oracle {}", s.name, k, z.value, o.value);
            compared += 1;
        } else {
            assert!(z.value >= o.value - 1e-9, "{} #{}: upper bound {} below oracle {}", s.name, k, z.value, o.value);
        }
    }
    compared
}

#[test]
fn exact_regimes_match_oracles() {
    for (i, s) in exact_suites().iter().enumerate() {
        let n = check_suite(s, 40, 100 + i as u64);
        assert!(n >= 20, "{}: only {} of 40 instances were exact", s.name, n);
    }
}

#[test]
fn mixed_signs_give_upper_bounds() {
    check_suite(&mixed_sign_suite(), 40, 7);
}
