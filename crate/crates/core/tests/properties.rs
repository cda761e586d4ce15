mod common;

use common::suites::{exact_suites, mixed_sign_suite, Model, Subject, Suite};
use common::{case, rel_close, Gen, Sup};
use drtsp::model::{abs_technology_at, dual_norm, technology_at, NormP};
use drtsp::oracle::scenario_in_ball;
use drtsp::{classify_regime, evaluate_recourse, Mode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GRID: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];

fn all_suites() -> Vec<Suite> {
    exact_suites().into_iter().chain([mixed_sign_suite()]).collect()
}

fn subject(s: &Suite, seed: u64) -> Subject {
    (s.make)(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn reversed(sub: &Subject) -> Subject {
    let mut out = sub.at(sub.amb.theta);
    out.amb.samples_q.reverse();
    out.amb.samples_t.reverse();
    out
}

fn doubled(sub: &Subject) -> Subject {
    let mut out = sub.at(sub.amb.theta);
    out.amb.samples_q = sub.amb.samples_q.iter().chain(&sub.amb.samples_q).cloned().collect();
    out.amb.samples_t = sub.amb.samples_t.iter().chain(&sub.amb.samples_t).cloned().collect();
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn radius_zero_is_the_sample_average(seed in any::<u64>()) {
        for s in all_suites() {
            let sub = subject(&s, seed);
            let saa = sub.saa().unwrap();
            let z0 = sub.at(0.0).eval().unwrap().value;
            prop_assert!((z0 - saa).abs() <= 1e-8 * (1.0 + saa.abs()), "{}: {} vs {}", s.name, z0, saa);
        }
    }

    #[test]
    fn nondecreasing_in_radius_and_above_average(seed in any::<u64>()) {
        for s in all_suites() {
            let sub = subject(&s, seed);
            let saa = sub.saa().unwrap();
            let mut prev = f64::NEG_INFINITY;
            for th in GRID {
                let v = sub.at(th).eval().unwrap().value;
                prop_assert!(v >= prev - 1e-9 * (1.0 + v.abs()), "{} at {}: {} < {}", s.name, th, v, prev);
                prop_assert!(v >= saa - 1e-9 * (1.0 + saa.abs()), "{} at {}: {} below average {}", s.name, th, v, saa);
                prev = v;
            }
        }
    }

    #[test]
    fn frozen_builder_reproduces_evaluator(seed in any::<u64>()) {
        for s in all_suites() {
            let sub = subject(&s, seed);
            let z = sub.eval().unwrap().value;
            let b = sub.builder().unwrap();
            prop_assert!(rel_close(b, z, 1e-6), "{}: builder {} vs evaluator {}", s.name, b, z);
        }
    }

    #[test]
    fn oracle_bounds_every_reformulation(seed in any::<u64>()) {
        for s in all_suites() {
            let sub = subject(&s, seed);
            let z = sub.eval().unwrap();
            let o = sub.oracle().unwrap();
            prop_assert!(z.value >= o.value - 1e-9 * (1.0 + o.value.abs()), "{}: {} < oracle {}", s.name, z.value, o.value);
            if z.mode == Mode::Exact && o.exact {
                prop_assert!(rel_close(z.value, o.value, 1e-6), "{}: {} vs oracle {}", s.name, z.value, o.value);
            }
        }
    }

    #[test]
    fn oracle_argmax_is_consistent(seed in any::<u64>()) {
        for s in all_suites() {
            let sub = subject(&s, seed);
            let o = sub.oracle().unwrap();
            for (j, sc) in o.per_sample_argmax.iter().enumerate() {
                prop_assert!(scenario_in_ball(&sub.amb, j, sc), "{}: argmax {} outside the ball", s.name, j);
                let again = match &sub.model {
                    Model::Linear(inst) => evaluate_recourse(inst, &sub.x, &sc.xi_q, &sc.xi_t).unwrap().0,
                    Model::Piecewise(p) => p.value(&sub.x, &sc.xi_t),
                };
                prop_assert!((again - o.per_sample[j]).abs() <= 1e-9 * (1.0 + again.abs()), "{}: {} vs {}", s.name, again, o.per_sample[j]);
            }
        }
    }

    #[test]
    fn oracle_ignores_sample_order_and_multiplicity(seed in any::<u64>()) {
        for s in all_suites() {
            let sub = subject(&s, seed);
            let v = sub.oracle().unwrap().value;
            let r = reversed(&sub).oracle().unwrap().value;
            let d = doubled(&sub).oracle().unwrap().value;
            prop_assert!((v - r).abs() <= 1e-12 * (1.0 + v.abs()), "{}: {} vs reversed {}", s.name, v, r);
            prop_assert!((v - d).abs() <= 1e-12 * (1.0 + v.abs()), "{}: {} vs doubled {}", s.name, v, d);
        }
    }

    #[test]
    fn holder_inequality(v in prop::collection::vec(-5.0f64..5.0, 1..6), seed in any::<u64>(), pi in 0usize..5) {
        let ps = [NormP::Finite(1.0), NormP::Finite(1.5), NormP::Finite(2.0), NormP::Finite(3.0), NormP::Inf];
        let p = ps[pi];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = v.iter().map(|_| rand::Rng::gen_range(&mut rng, -5.0..5.0)).collect();
        let dot: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let norm_v = match p {
            NormP::Inf => v.iter().fold(0.0f64, |m, a| m.max(a.abs())),
            NormP::Finite(q) => v.iter().map(|a| a.abs().powf(q)).sum::<f64>().powf(1.0 / q),
        };
        prop_assert!(dot.abs() <= norm_v * dual_norm(&w, p) + 1e-9);
    }

    #[test]
    fn absolute_technology_without_mixed_entries(seed in any::<u64>()) {
        let c = case(&mut ChaCha8Rng::seed_from_u64(seed), Gen::new(Sup::Cont, Sup::Cont, NormP::Inf), 0.5);
        let t = technology_at(&c.inst.t, &c.x);
        let a = abs_technology_at(&c.inst.t, &c.x).unwrap();
        for (rt, ra) in t.iter().zip(&a) {
            for (vt, va) in rt.iter().zip(ra) {
                prop_assert_eq!(vt.abs(), *va);
            }
        }
    }

    #[test]
    fn classification_is_deterministic(seed in any::<u64>()) {
        let g = Gen { mixed: true, ..Gen::new(Sup::Cont, Sup::Bin, NormP::Finite(2.0)) };
        let c = case(&mut ChaCha8Rng::seed_from_u64(seed), g, 1.2);
        prop_assert_eq!(classify_regime(&c.inst, &c.amb), classify_regime(&c.inst, &c.amb));
    }
}
