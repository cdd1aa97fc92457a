use fsladder::harmonic::{
    compute_extension_matrices, BoundaryData, ExtensionMatrices, HarmonicFunction,
};
use fsladder::ladder::{
    effective_impedance, words_of_length, LcParams, VertexId, Word, ZeffOptions,
};
use fsladder::measure::{osc_comparability, BernoulliMeasure, CellMeasure};
use fsladder::singularity::{
    half_log3_bound, log_average, log_norm, lyapunov_exponent, mean_square, nonconstancy_check,
    WordSampler,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matrices(t: f64) -> ExtensionMatrices {
    let p = LcParams::from_t(t, 1.0, 1.0).unwrap();
    let z = effective_impedance(&p, &ZeffOptions::default())
        .unwrap()
        .zeff;
    compute_extension_matrices(z, &p).unwrap()
}

fn random_u(rng: &mut ChaCha8Rng) -> [Complex64; 3] {
    std::array::from_fn(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

#[test]
fn two_routes_for_nu_agree() {
    let ms = [matrices(8.0), matrices(36.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sampler = WordSampler::new(5);
    for k in 0..1000 {
        let cm = CellMeasure::new(HarmonicFunction::new(
            BoundaryData(random_u(&mut rng)),
            &ms[k % 2],
        ));
        let w = sampler.word(rng.random_range(0..=8));
        let (a, b) = (cm.nu(&w), cm.nu_pairs(&w));
        assert!(
            (a - b).abs() <= 1e-10 * a.abs().max(1e-300),
            "{w}: {a} vs {b}"
        );
    }
}

#[test]
fn partition_and_refinement() {
    let m = matrices(20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..3 {
        let cm = CellMeasure::new(HarmonicFunction::new(BoundaryData(random_u(&mut rng)), &m));
        let total = cm.total();
        for n in 0..=6 {
            let sum: f64 = words_of_length(n).iter().map(|w| cm.nu(w)).sum();
            assert!((sum - total).abs() <= 1e-8 * total);
        }
        for n in 0..=5 {
            for w in words_of_length(n) {
                let kids: f64 = (1..=3u8).map(|j| cm.nu(&w.child(j))).sum();
                assert!((kids - cm.nu(&w)).abs() <= 1e-9 * cm.nu(&w).max(1e-300));
            }
        }
    }
}

#[test]
fn bernoulli_levels_sum_to_one() {
    let bm = BernoulliMeasure::default();
    for n in 0..=8 {
        let words = words_of_length(n);
        assert_eq!(words.len() as u64, 3u64.pow(n as u32));
        let sum: f64 = words.iter().map(|w| bm.mu(w)).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!((bm.mu(&words[0]) * 3f64.powi(n as i32) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn oscillation_bracket_holds() {
    let m = matrices(8.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sampler = WordSampler::new(7);
    for _ in 0..1000 {
        let cm = CellMeasure::new(HarmonicFunction::new(BoundaryData(random_u(&mut rng)), &m));
        let w = sampler.word(rng.random_range(0..=6));
        assert!(osc_comparability(&cm, &w).within);
    }
}

#[test]
fn vertices_carry_no_mass() {
    let m = matrices(8.0);
    let cm = CellMeasure::new(HarmonicFunction::new(
        BoundaryData([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        &m,
    ));
    for v in [
        VertexId::top(1),
        VertexId::new(Word::new(vec![1, 2]).unwrap(), 3).unwrap(),
    ] {
        assert!(cm.vertex_mass(&v).abs() <= 1e-12 * cm.nu(v.word()));
    }
    let deep = Word::repeat(1, 25).unwrap();
    assert!(cm.nu(&deep) > 0.0);
}

#[test]
fn exhaustive_mean_square() {
    let m = matrices(36.0);
    let u = [c(0.3, 0.0), c(-1.0, 0.2), c(0.0, 0.9)];
    let top = m.form(&u);
    for n in 0..=6 {
        let direct: f64 = words_of_length(n)
            .iter()
            .map(|w| m.form(&m.apply_word(w, &u)))
            .sum::<f64>()
            / 3f64.powi(n as i32);
        assert!((direct - top / 3f64.powi(n as i32)).abs() <= 1e-9 * direct);
        assert!((mean_square(&m, &u, n) - direct).abs() <= 1e-9 * direct);
    }
}

#[test]
fn jensen_gap_is_strict_for_e1() {
    for t in [2.0, 8.0, 20.0, 36.0, 60.0] {
        let m = matrices(t);
        let u = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let avg = log_average(&m, &u, 1).unwrap();
        let ms = mean_square(&m, &u, 1) / m.form(&u);
        let nc = nonconstancy_check(&m, &u, 1).unwrap();
        assert!(nc.nonconstant);
        assert!(avg < 0.5 * ms.ln() - 1e-6, "t = {t}");
        assert!(avg < half_log3_bound());
    }
}

#[test]
fn lyapunov_mean_below_bound_on_the_grid() {
    let u = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    for t in [2.0, 8.0, 20.0, 36.0, 60.0] {
        let m = matrices(t);
        let est = lyapunov_exponent(&m, &u, 2000, 16, 42).unwrap();
        assert!(
            est.mean + 3.0 * est.std_error < half_log3_bound(),
            "t = {t}: {est:?}"
        );
        let again = lyapunov_exponent(&m, &u, 2000, 16, 42).unwrap();
        assert_eq!(est, again);
    }
}

#[test]
fn singularity_with_respect_to_bernoulli() {
    let m = matrices(8.0);
    let e1 = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    let bm = BernoulliMeasure::default();
    for seed in 0..8 {
        let w = WordSampler::new(seed).word(300);
        let rate = (2.0 * log_norm(&m, &e1, &w).unwrap() - bm.mu(&w).ln()) / 300.0;
        assert!(rate < -0.1, "seed {seed}: log(nu/mu) per letter {rate}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sampler_is_a_function_of_seed(seed in any::<u64>(), len in 0usize..40) {
        let a = WordSampler::new(seed).word(len);
        let b = WordSampler::new(seed).word(len);
        prop_assert_eq!(a.len(), len);
        prop_assert_eq!(a, b);
    }
}
