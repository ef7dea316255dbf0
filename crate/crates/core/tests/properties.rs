use fdsc_core::channel::ChannelParams;
use fdsc_core::constellation::{error_set, symbol_vectors, Normalization, SpaceCode};
use fdsc_core::experiment::{Command, ExperimentSpec};
use fdsc_core::farey::{breakpoints, farey, gcd, is_unimodular, mediant, Rational};
use fdsc_core::optimizer::{
    f_mn, local_optimum, objective_exhaustive, objective_min, objective_reduced, two_worst_cases, Objective,
};
use fdsc_core::rng::stream_rng;
use proptest::prelude::*;
use rand::Rng;

/// Euler totient by trial division.
fn phi(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

#[test]
fn farey_length_is_totient_sum() {
    let mut expected = 1;
    for k in 1..=500 {
        expected += phi(k);
        assert_eq!(farey(k).unwrap().len() as u64, expected, "order {k}");
    }
}

#[test]
fn successive_terms_are_unimodular() {
    for k in 1..=100 {
        let f = farey(k).unwrap();
        assert!(f.windows(2).all(|w| is_unimodular(&w[0], &w[1])), "order {k}");
    }
}

#[test]
fn breakpoints_closed_under_reciprocal() {
    for p in 1..=8 {
        let b = breakpoints(p).unwrap();
        for t in &b {
            assert!(b.binary_search(&t.recip()).is_ok(), "p = {p}: 1/{t} missing");
        }
    }
}

#[test]
fn mediant_enters_at_next_order() {
    for k in 1..=60 {
        let f = farey(k).unwrap();
        let next = farey(k + 1).unwrap();
        for w in f.windows(2) {
            let m = mediant(&w[0], &w[1]).unwrap();
            assert!(w[0] < m && m < w[1]);
            assert!(m.denom() > k);
            assert_eq!(next.contains(&m), m.denom() == k + 1);
        }
    }
}

fn code_from(f: [f64; 4]) -> SpaceCode {
    let s: f64 = f.iter().sum();
    SpaceCode::new(2, 2, f.iter().map(|v| v / s).collect(), Normalization::EntrySumOne).unwrap()
}

#[test]
fn random_codes_never_beat_the_closed_form() {
    let mut rng = stream_rng(99, 3);
    for p in 1..=3u32 {
        let bound = 1.0 / (4.0 * (1.0 + (1u64 << p) as f64).powi(2));
        for _ in 0..100_000 {
            let f = [(); 4].map(|_| rng.random_range(1e-6..1.0));
            if let Objective::Achieved(v) = objective_min(&code_from(f), p).unwrap() {
                assert!(v <= bound + 1e-12, "p = {p}, F = {f:?}: {v} > {bound}");
            }
        }
    }
}

#[test]
fn dominance_facts_of_the_reduction() {
    let mut rng = stream_rng(5, 8);
    let p = 3u32;
    let k = (1i64 << p) - 1;
    for _ in 0..10_000 {
        let f = [(); 4].map(|_| rng.random_range(1e-3..1.0));
        let f10 = f[0] * f[2];
        let f01 = f[1] * f[3];
        for m in 1..=k {
            for n in 1..=k {
                let (mf, nf) = (m as f64, n as f64);
                let plus = (mf * f[0] + nf * f[1]) * (mf * f[2] + nf * f[3]);
                assert!(plus >= f10 && plus >= f01);
                let minus = (mf * f[0] - nf * f[1]) * (mf * f[2] - nf * f[3]);
                let g = gcd(m as u64, n as u64) as i64;
                if g > 1 {
                    let (mr, nr) = ((m / g) as f64, (n / g) as f64);
                    let reduced = (mr * f[0] - nr * f[1]) * (mr * f[2] - nr * f[3]);
                    let scale = (g * g) as f64;
                    assert!((minus - scale * reduced).abs() <= 1e-12 * scale.max(1.0));
                    if reduced > 0.0 {
                        assert!(minus >= reduced);
                    }
                }
            }
        }
    }
}

#[test]
fn two_worst_cases_dominate_inside_intervals() {
    for p in 1..=3u32 {
        let k = (1u64 << p) - 1;
        let b = breakpoints(p).unwrap();
        for w in b.windows(2) {
            let lo = w[0].to_f64();
            let hi = if w[1].is_infinite() { lo + 2.0 } else { w[1].to_f64() };
            let steps = ((hi - lo) / 0.01).floor() as usize;
            for i in 1..steps {
                for j in 1..steps {
                    let (x, y) = (lo + 0.01 * i as f64, lo + 0.01 * j as f64);
                    if x >= hi || y >= hi {
                        continue;
                    }
                    let ((m1, n1), (m2, n2)) = two_worst_cases(x, y, k).unwrap();
                    let code = code_from([x, 1.0, y, 1.0]);
                    let full = objective_exhaustive(&code, p).unwrap().value().unwrap();
                    let pair = f_mn(&code, m1, n1).unwrap().min(f_mn(&code, m2, n2).unwrap());
                    assert!((full - pair).abs() <= 1e-12 * full, "p = {p}, x = {x}, y = {y}");
                }
            }
        }
    }
}

#[test]
fn mediant_equalizes_worst_cases() {
    for k in 1..=7 {
        let f = farey(k).unwrap();
        for w in f.windows(2) {
            let opt = local_optimum(&w[0], &w[1]).unwrap();
            let e: Vec<f64> = opt.entries.iter().map(Rational::to_f64).collect();
            let code = SpaceCode::new(2, 2, e, Normalization::EntrySumOne).unwrap();
            let a = f_mn(&code, w[0].denom(), w[0].numer()).unwrap();
            let b = f_mn(&code, w[1].denom(), w[1].numer()).unwrap();
            assert!((a - b).abs() <= 1e-12, "{} {}: {a} vs {b}", w[0], w[1]);
            assert!((a - opt.value.to_f64()).abs() <= 1e-12);
        }
    }
}

fn positive_code(rows: usize, cols: usize) -> impl Strategy<Value = SpaceCode> {
    prop::collection::vec(0.0f64..1.0, rows * cols)
        .prop_map(move |v| SpaceCode::new(rows, cols, v, Normalization::EntrySumOne).unwrap())
}

proptest! {
    #[test]
    fn encoded_symbols_are_unipolar(code in positive_code(3, 2), p in 1u32..=3) {
        for s in symbol_vectors(p, 2).unwrap() {
            prop_assert!(code.encode(&s).unwrap().iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn error_set_is_symmetric(ints in prop::collection::vec(0u64..12, 4), p in 1u32..=2) {
        prop_assume!(ints.iter().any(|&v| v > 0));
        let code = SpaceCode::from_integer_matrix(2, 2, ints, 12, Normalization::EntrySumOne).unwrap();
        let set = error_set(&code, p, 2).unwrap();
        let size = 1usize << (2 * p);
        prop_assert!(set.len() < size * (size - 1));
        for v in &set {
            let neg: Vec<f64> = v.e.iter().map(|x| -x).collect();
            prop_assert!(set.iter().any(|w| w.e == neg), "missing -{:?}", v.e);
        }
    }

    #[test]
    fn omega_is_additive(sig in prop::collection::vec(0.05f64..2.0, 6), i in 0usize..2, j in 0usize..3) {
        let params = ChannelParams::new(2, 3, vec![0.0; 6], sig.clone()).unwrap();
        let total: f64 = sig.iter().map(|s| s.powi(-2)).sum();
        prop_assert!((params.large_scale_gain() - total).abs() <= 1e-9 * total);
        let without = params.large_scale_gain_without(i, j).unwrap();
        let removed = params.sigma(i, j).powi(-2);
        prop_assert!((params.large_scale_gain() - without - removed).abs() <= 1e-9 * total);
    }

    #[test]
    fn reduced_objective_matches_exhaustive(f in prop::array::uniform4(1e-3f64..1.0), p in 1u32..=3) {
        let code = code_from(f);
        let a = objective_exhaustive(&code, p).unwrap();
        let b = objective_reduced(&code, p).unwrap();
        match (a.value(), b.value()) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300)),
            (None, None) => {}
            _ => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn rational_display_round_trips(num in 0u64..1_000_000, den in 1u64..1_000_000) {
        let r = Rational::new(num, den).unwrap();
        prop_assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
    }

    #[test]
    fn experiment_spec_round_trips(
        cmd in prop::sample::select(vec![Command::Farey, Command::Design, Command::Bounds, Command::Simulate, Command::Reproduce]),
        ints in prop::collection::btree_map("[a-z_]{1,8}", any::<i64>(), 0..4),
        floats in prop::collection::btree_map("[A-Z]{1,6}", prop::num::f64::NORMAL | prop::num::f64::ZERO, 0..4),
        words in prop::collection::btree_map("s[0-9]{1,3}", "\\PC{0,12}", 0..3),
        list in prop::collection::vec(-1e6f64..1e6, 0..5),
        out in prop::option::of("[a-z]{1,8}\\.csv"),
    ) {
        let mut spec = ExperimentSpec::new(cmd);
        spec.output_path = out.map(Into::into);
        for (k, v) in ints { spec.set(&k, v); }
        for (k, v) in floats { spec.set(&k, v); }
        for (k, v) in words { spec.set(&k, v); }
        spec.set("grid", list);
        spec.parameters.remove("command");
        spec.parameters.remove("output_path");
        let text = spec.to_toml_string().unwrap();
        prop_assert_eq!(ExperimentSpec::from_toml_str(&text).unwrap(), spec);
    }
}
