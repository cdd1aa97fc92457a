//! Numerical evidence that the dissipation measure is singular with respect
//! to the Bernoulli measure: the non-constancy hypothesis, the exact
//! `beta` averages, Lyapunov exponents of random extension products and the
//! decay of `nu / mu` along words.
//!
//! Random letters come from ChaCha8 seeded with `seed_from_u64(seed)`; sample
//! `k` of a Monte Carlo run uses stream `k`. A letter is `1 + x % 3` for the
//! first 32-bit draw `x` below `3 * floor(2^32 / 3)`.

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::ExtensionMatrices;
use crate::ladder::{words_of_length, Word};

/// `-log(3) / 2`.
pub fn half_log3_bound() -> f64 {
    -0.5 * 3f64.ln()
}

/// Reproducible stream of uniform letters.
#[derive(Debug, Clone)]
pub struct WordSampler {
    rng: ChaCha8Rng,
}

/// `u32::MAX` is a multiple of 3, so draws below it are uniform mod 3.
const REJECT_ABOVE: u32 = u32::MAX;

impl WordSampler {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn letter(&mut self) -> u8 {
        loop {
            let x = self.rng.next_u32();
            if x < REJECT_ABOVE {
                return 1 + (x % 3) as u8;
            }
        }
    }

    pub fn word(&mut self, len: usize) -> Word {
        Word::new((0..len).map(|_| self.letter()).collect()).expect("letters in range")
    }
}

fn centred(v: Vector3<Complex64>) -> Vector3<Complex64> {
    let mean = v.sum() / 3.0;
    v - Vector3::repeat(mean)
}

/// `||D0 v||`, computed as `sqrt(3c) |v - mean(v)|`.
fn d0_norm(m: &ExtensionMatrices, v: &Vector3<Complex64>) -> f64 {
    (3.0 * m.c()).sqrt() * centred(*v).norm()
}

fn require_nonconstant(m: &ExtensionMatrices, u: &[Complex64; 3]) -> Result<f64> {
    let n = d0_norm(m, &Vector3::from(*u));
    if !(n > 0.0) {
        return Err(Error::ConstantPotential);
    }
    Ok(n)
}

/// `log ||D0 A_{wm} ... A_{w1} u||` with per-step renormalization.
pub fn log_norm(m: &ExtensionMatrices, u: &[Complex64; 3], w: &Word) -> Result<f64> {
    let mut acc = require_nonconstant(m, u)?.ln();
    let mut v = centred(Vector3::from(*u));
    v /= Complex64::new(d0_norm(m, &v), 0.0);
    for &l in w.letters() {
        v = centred(m.a(l) * v);
        let n = d0_norm(m, &v);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Numerical(format!(
                "product norm {n} after renormalization"
            )));
        }
        acc += n.ln();
        v /= Complex64::new(n, 0.0);
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonConstancy {
    pub m: usize,
    /// `||D0 A_w u||` for every word of length `m`, lexicographic order.
    pub norms: Vec<f64>,
    /// `(max - min) / max`.
    pub spread: f64,
    pub nonconstant: bool,
}

pub fn nonconstancy_check(
    m: &ExtensionMatrices,
    u: &[Complex64; 3],
    level: usize,
) -> Result<NonConstancy> {
    if level > 8 {
        return Err(Error::LevelTooDeep { level, max: 8 });
    }
    require_nonconstant(m, u)?;
    let norms = words_of_length(level)
        .iter()
        .map(|w| log_norm(m, u, w).map(f64::exp))
        .collect::<Result<Vec<_>>>()?;
    let max = norms.iter().cloned().fold(f64::MIN, f64::max);
    let min = norms.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max - min) / max;
    Ok(NonConstancy {
        m: level,
        norms,
        spread,
        nonconstant: spread > 1e-9,
    })
}

/// Exact Bernoulli average `3^{-m} sum_{|w| = m} log ||D0 A_w u||` after
/// scaling `u` to `||D0 u|| = 1`.
pub fn log_average(m: &ExtensionMatrices, u: &[Complex64; 3], level: usize) -> Result<f64> {
    let base = require_nonconstant(m, u)?.ln();
    let words = words_of_length(level);
    let mut sum = 0.0;
    for w in &words {
        sum += log_norm(m, u, w)? - base;
    }
    Ok(sum / words.len() as f64)
}

/// `3^{-n} sum_{|w| = n} ||D0 A_w u||^2`.
pub fn mean_square(m: &ExtensionMatrices, u: &[Complex64; 3], level: usize) -> f64 {
    let words = words_of_length(level);
    let d0 = m.d0().map(|x| Complex64::new(x, 0.0));
    let sum: f64 = words
        .iter()
        .map(|w| (d0 * Vector3::from(m.apply_word(w, u))).norm_squared())
        .sum();
    sum / words.len() as f64
}

/// Boundary data with `||D0 u|| = 1` at the point `(theta, phi)` of the
/// projective line of mean-zero data: `u = cos(theta) f1 + e^{i phi}
/// sin(theta) f2` with the orthonormal mean-zero basis
/// `f1 = (1, -1, 0)/sqrt 2`, `f2 = (1, 1, -2)/sqrt 6`.
pub fn unit_boundary(m: &ExtensionMatrices, theta: f64, phi: f64) -> [Complex64; 3] {
    let a = Complex64::new(theta.cos(), 0.0);
    let b = Complex64::from_polar(theta.sin(), phi);
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    let scale = 1.0 / (3.0 * m.c()).sqrt();
    [
        (a / s2 + b / s6) * scale,
        (-a / s2 + b / s6) * scale,
        (-2.0 * b / s6) * scale,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    pub m: usize,
    /// Largest exact average found.
    pub value: f64,
    /// Maximizing `(theta, phi)`.
    pub argmax: (f64, f64),
    pub bound: f64,
    pub pass: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaOptions {
    pub n_random: usize,
    pub grid_theta: usize,
    pub grid_phi: usize,
    pub seed: u64,
}

impl Default for BetaOptions {
    fn default() -> Self {
        Self {
            n_random: 64,
            grid_theta: 24,
            grid_phi: 48,
            seed: 42,
        }
    }
}

/// Supremum estimate of the exact average over unit-dissipation data:
/// random points, a `(theta, phi)` grid, then a compass search from the best
/// point.
pub fn beta_estimate(
    m: &ExtensionMatrices,
    level: usize,
    opts: &BetaOptions,
) -> Result<BetaReport> {
    if level == 0 || level > 7 {
        return Err(Error::invalid(format!(
            "beta level must be in 1..=7, got {level}"
        )));
    }
    let f = |theta: f64, phi: f64| log_average(m, &unit_boundary(m, theta, phi), level);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let two_pi = std::f64::consts::TAU;
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.n_random {
        // Uniform on the sphere of the projective line: cos(2 theta) uniform.
        let x = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let y = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        points.push(((1.0 - 2.0 * x).acos() / 2.0, two_pi * y));
    }
    for i in 0..=opts.grid_theta {
        for j in 0..opts.grid_phi.max(1) {
            points.push((
                half_pi * i as f64 / opts.grid_theta.max(1) as f64,
                two_pi * j as f64 / opts.grid_phi.max(1) as f64,
            ));
        }
    }
    let values = points
        .par_iter()
        .map(|&(t, p)| f(t, p))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = values.len();
    let (mut best, mut at) =
        values
            .iter()
            .zip(&points)
            .fold((f64::MIN, (0.0, 0.0)), |acc, (&v, &pt)| {
                if v > acc.0 {
                    (v, pt)
                } else {
                    acc
                }
            });
    let mut step = half_pi / opts.grid_theta.max(1) as f64;
    while step > 1e-9 {
        let mut improved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let cand = (
                (at.0 + dt).clamp(0.0, half_pi),
                (at.1 + dp).rem_euclid(two_pi),
            );
            let v = f(cand.0, cand.1)?;
            evaluations += 1;
            if v > best {
                best = v;
                at = cand;
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let bound = level as f64 * half_log3_bound();
    Ok(BetaReport {
        m: level,
        value: best,
        argmax: at,
        bound,
        pass: best < bound,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub n_steps: usize,
    pub n_samples: usize,
    pub mean: f64,
    pub std_error: f64,
    /// `(1/n) log ||D0 M_n ... M_1 u||` per sample.
    pub terminal: Vec<f64>,
    pub bound: f64,
    /// `mean + 3 std_error < bound`.
    pub pass: bool,
}

fn sample_exponent(
    m: &ExtensionMatrices,
    u: &[Complex64; 3],
    n_steps: usize,
    seed: u64,
    k: usize,
) -> Result<f64> {
    let mut sampler = WordSampler::with_stream(seed, k as u64);
    let mut acc = require_nonconstant(m, u)?.ln();
    let mut v = centred(Vector3::from(*u));
    v /= Complex64::new(d0_norm(m, &v), 0.0);
    for _ in 0..n_steps {
        v = centred(m.a(sampler.letter()) * v);
        let n = d0_norm(m, &v);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Numerical(format!("product norm {n} in sample {k}")));
        }
        acc += n.ln();
        v /= Complex64::new(n, 0.0);
    }
    Ok(acc / n_steps as f64)
}

/// Monte Carlo estimate of the top Lyapunov exponent of `D0 M_n ... M_1 u`.
pub fn lyapunov_exponent(
    m: &ExtensionMatrices,
    u: &[Complex64; 3],
    n_steps: usize,
    n_samples: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if n_steps == 0 || n_samples == 0 {
        return Err(Error::invalid("need at least one step and one sample"));
    }
    require_nonconstant(m, u)?;
    let terminal = (0..n_samples)
        .into_par_iter()
        .map(|k| sample_exponent(m, u, n_steps, seed, k))
        .collect::<Result<Vec<_>>>()?;
    let n = n_samples as f64;
    let mean = terminal.iter().sum::<f64>() / n;
    let std_error = if n_samples > 1 {
        (terminal.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let bound = half_log3_bound();
    Ok(LyapunovEstimate {
        n_steps,
        n_samples,
        mean,
        std_error,
        terminal,
        bound,
        pass: mean + 3.0 * std_error < bound,
    })
}

/// `(1/n) log ||D0 A_l^n u||`.
pub fn deterministic_exponent(
    m: &ExtensionMatrices,
    u: &[Complex64; 3],
    letter: u8,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("need at least one step"));
    }
    Ok(log_norm(m, u, &Word::repeat(letter, n)?)? / n as f64)
}

/// `log(nu / mu)` along the prefixes of `w`:
/// `n log 3 + 2 log ||D0 A_{w_n} ... A_{w_1} u||` for `n = 0..=|w|`.
pub fn ratio_decay(
    m: &ExtensionMatrices,
    u: &[Complex64; 3],
    w: &Word,
) -> Result<Vec<(usize, f64)>> {
    if w.len() > 60 {
        return Err(Error::invalid(format!(
            "ratio traces are limited to 60 letters, got {}",
            w.len()
        )));
    }
    (0..=w.len())
        .map(|n| {
            Ok((
                n,
                n as f64 * 3f64.ln() + 2.0 * log_norm(m, u, &w.prefix(n))?,
            ))
        })
        .collect()
}

/// Least-squares slope of a trace.
pub fn slope(trace: &[(usize, f64)]) -> f64 {
    let n = trace.len() as f64;
    let mx = trace.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = trace.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = trace.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let sxx: f64 = trace.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    sxy / sxx
}

/// Machine-readable Lyapunov summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub omega: f64,
    #[serde(rename = "L")]
    pub inductance: f64,
    #[serde(rename = "C")]
    pub capacitance: f64,
    pub n_steps: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub bound: f64,
    pub pass: bool,
}

impl LyapunovReport {
    pub fn new(m: &ExtensionMatrices, est: &LyapunovEstimate, seed: u64) -> Self {
        let p = m.params();
        Self {
            omega: p.omega,
            inductance: p.inductance,
            capacitance: p.capacitance,
            n_steps: est.n_steps,
            n_samples: est.n_samples,
            seed,
            mean: est.mean,
            std_error: est.std_error,
            bound: est.bound,
            pass: est.pass,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{compute_extension_matrices, lambda2_formula};
    use crate::ladder::{effective_impedance, LcParams, ZeffOptions};

    fn matrices(t: f64) -> ExtensionMatrices {
        let p = LcParams::from_t(t, 1.0, 1.0).unwrap();
        let z = effective_impedance(&p, &ZeffOptions::default())
            .unwrap()
            .zeff;
        compute_extension_matrices(z, &p).unwrap()
    }

    fn e1() -> [Complex64; 3] {
        [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]
    }

    #[test]
    fn sampler_is_reproducible_and_balanced() {
        let a = WordSampler::new(7).word(50);
        let b = WordSampler::new(7).word(50);
        assert_eq!(a, b);
        assert_ne!(WordSampler::with_stream(7, 1).word(50), a);
        let mut s = WordSampler::new(1);
        let mut counts = [0usize; 3];
        let n = 30_000;
        for _ in 0..n {
            counts[(s.letter() - 1) as usize] += 1;
        }
        let e = n as f64 / 3.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 99.9% quantile of chi-square with 2 degrees of freedom.
        assert!(chi2 < 13.82, "{counts:?}");
    }

    #[test]
    fn constant_data_rejected() {
        let m = matrices(8.0);
        let c = [Complex64::new(1.0, 0.0); 3];
        assert!(matches!(
            nonconstancy_check(&m, &c, 1),
            Err(Error::ConstantPotential)
        ));
        assert!(lyapunov_exponent(&m, &c, 10, 2, 1).is_err());
        assert!(ratio_decay(&m, &c, &Word::repeat(1, 3).unwrap()).is_err());
    }

    #[test]
    fn unit_boundary_is_normalized() {
        let m = matrices(8.0);
        for (t, p) in [(0.0, 0.0), (0.3, 1.0), (1.5, 4.0)] {
            let u = unit_boundary(&m, t, p);
            assert!((m.form(&u) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_word_gives_log_lambda2() {
        let m = matrices(36.0);
        let l2 = lambda2_formula(m.zeff(), m.params().z_c()).norm();
        let s = 1.0 / m.form(&e1()).sqrt();
        let u = e1().map(|x| x * s);
        let x = deterministic_exponent(&m, &u, 1, 200).unwrap();
        assert!((x - l2.ln()).abs() < 1e-3, "{x} vs {}", l2.ln());
    }

    #[test]
    fn mean_square_identity() {
        let m = matrices(8.0);
        let u = [
            Complex64::new(1.0, 0.5),
            Complex64::new(-0.2, 0.0),
            Complex64::new(0.0, 2.0),
        ];
        let top = m.form(&u);
        for n in 0..=4 {
            let ms = mean_square(&m, &u, n);
            let expected = top / 3f64.powi(n as i32);
            assert!((ms - expected).abs() < 1e-9 * expected);
        }
    }

    #[test]
    fn lyapunov_runs_are_bitwise_reproducible() {
        let m = matrices(8.0);
        let a = lyapunov_exponent(&m, &e1(), 500, 8, 42).unwrap();
        let b = lyapunov_exponent(&m, &e1(), 500, 8, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.mean < a.bound);
    }

    #[test]
    fn slope_of_a_line() {
        let tr: Vec<_> = (0..10).map(|n| (n, 2.0 - 0.5 * n as f64)).collect();
        assert!((slope(&tr) + 0.5).abs() < 1e-12);
    }
}
