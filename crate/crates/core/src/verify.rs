//! The acceptance suite behind `fsladder verify`.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{box_counting_dimension, distance, edge_segments, first_crossing, IfsParams};
use crate::harmonic::{
    compute_extension_matrices, continuity_modulus, lambda2_formula, level_invariance_report,
    printed_lambda2_sq, sigma_sq, spectral_report, BoundaryData, ExtensionMatrices,
    HarmonicFunction,
};
use crate::ladder::{
    assign_impedances, build_graph, effective_impedance, effective_impedance_direct,
    effective_impedance_eps, frequency_sweep, t_grid, FilterBand, LadderVariant, LcParams,
    SweepRow, VertexId, Word, ZeffOptions, MAX_LEVEL,
};
use crate::measure::{
    additivity_check, atom_check, hausdorff_dimension, osc_comparability, CellMeasure,
};
use crate::network::{hermitian_form, kirchhoff_solve, network_power, schur_trace};
use crate::singularity::{
    beta_estimate, deterministic_exponent, half_log3_bound, lyapunov_exponent, mean_square,
    nonconstancy_check, BetaOptions, WordSampler,
};

/// In-band values of `t = 2 w^2 L C` used by the pointwise checks.
pub const TEST_T: [f64; 5] = [2.0, 8.0, 20.0, 36.0, 60.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub inductance: f64,
    pub capacitance: f64,
    pub seed: u64,
    /// Stopping tolerance of the effective-impedance solver.
    pub tol: f64,
    /// Reduced sample counts and depths.
    pub quick: bool,
    /// Replace the threshold of the named check (test hook).
    pub override_threshold: Option<(String, f64)>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            inductance: 1.0,
            capacitance: 1.0,
            seed: 42,
            tol: ZeffOptions::default().tol,
            quick: false,
            override_threshold: None,
        }
    }
}

/// Outcome of one check: `value` is compared against `threshold` in the
/// direction stated by `relation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub name: String,
    pub value: f64,
    pub relation: String,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {} {}: {:.6e} {} {:.3e}  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.value,
            self.relation,
            self.threshold,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

impl VerifyReport {
    pub fn text(&self) -> String {
        let mut s: String = self.checks.iter().map(|c| c.line() + "\n").collect();
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        s.push_str(&format!(
            "{} checks, {} failed\n",
            self.checks.len(),
            failed
        ));
        s
    }
}

struct Ctx<'a> {
    cfg: &'a VerifyConfig,
    opts: ZeffOptions,
    points: Vec<(LcParams, ExtensionMatrices)>,
}

impl Ctx<'_> {
    fn threshold(&self, id: &str, default: f64) -> f64 {
        match &self.cfg.override_threshold {
            Some((name, v)) if name == id => *v,
            _ => default,
        }
    }

    /// `value < threshold`.
    fn below(&self, id: &str, name: &str, value: f64, default: f64, detail: String) -> CheckResult {
        let threshold = self.threshold(id, default);
        CheckResult {
            id: id.into(),
            name: name.into(),
            value,
            relation: "<".into(),
            threshold,
            pass: value < threshold,
            detail,
        }
    }

    /// `value >= threshold`.
    fn at_least(
        &self,
        id: &str,
        name: &str,
        value: f64,
        default: f64,
        detail: String,
    ) -> CheckResult {
        let threshold = self.threshold(id, default);
        CheckResult {
            id: id.into(),
            name: name.into(),
            value,
            relation: ">=".into(),
            threshold,
            pass: value >= threshold,
            detail,
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        r.set_stream(salt);
        r
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Complex boundary data with entries uniform in the unit square.
pub fn random_boundary(rng: &mut ChaCha8Rng) -> [Complex64; 3] {
    std::array::from_fn(|_| Complex64::new(uniform(rng), uniform(rng)))
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn fail(id: &str, name: &str, err: impl std::fmt::Display) -> CheckResult {
    CheckResult {
        id: id.into(),
        name: name.into(),
        value: f64::NAN,
        relation: "error".into(),
        threshold: f64::NAN,
        pass: false,
        detail: err.to_string(),
    }
}

/// Runs every acceptance check.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let opts = ZeffOptions {
        tol: cfg.tol,
        ..ZeffOptions::default()
    };
    let points = TEST_T
        .iter()
        .map(|&t| {
            let p = LcParams::from_t(t, cfg.inductance, cfg.capacitance)?;
            let z = effective_impedance(&p, &opts)?.zeff;
            Ok((p, compute_extension_matrices(z, &p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let ctx = Ctx { cfg, opts, points };
    let grid = t_grid(0.5, 80.0, 200, cfg.inductance, cfg.capacitance)?;
    let sweep = frequency_sweep(&grid, cfg.inductance, cfg.capacitance, &ctx.opts)?;

    let mut checks = vec![
        check_band(&ctx, &sweep),
        check_sigma(&ctx, &sweep),
        guard("03", "oracle-equivalence", check_oracle(&ctx)),
        guard("04", "regularized-vs-fixed-point", check_fixed_point(&ctx)),
        check_spectrum(&ctx),
        guard("05b", "printed-lambda2-closed-form", check_printed(&ctx)),
        guard("06", "spectral-lemma", check_lemma(&ctx, &sweep)),
        check_self_similarity(&ctx),
    ];
    checks.extend(guard_many(
        &["08a", "08b"],
        "level-invariance",
        check_levels(&ctx),
    ));
    checks.push(guard("09", "power-balance", check_power_balance(&ctx)));
    checks.extend(guard_many(
        &["10a", "10b"],
        "continuity",
        check_continuity(&ctx),
    ));
    checks.extend(guard_many(
        &["11a", "11b", "11c"],
        "measure-axioms",
        check_measure(&ctx),
    ));
    checks.push(check_bracket(&ctx));
    checks.extend(guard_many(
        &["13a", "13b", "13c", "13d"],
        "singularity",
        check_singularity(&ctx),
    ));
    checks.push(check_exhaustive(&ctx));
    checks.extend(guard_many(
        &["15a", "15b", "15c"],
        "geometry",
        check_geometry(&ctx),
    ));
    checks.push(guard("16", "determinism", check_determinism(&ctx)));

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        config: cfg.clone(),
        checks,
        all_pass,
    })
}

fn guard(id: &str, name: &str, r: Result<CheckResult>) -> CheckResult {
    r.unwrap_or_else(|e| fail(id, name, e))
}

fn guard_many(ids: &[&str], name: &str, r: Result<Vec<CheckResult>>) -> Vec<CheckResult> {
    r.unwrap_or_else(|e| ids.iter().map(|id| fail(id, name, &e)).collect())
}

fn check_band(ctx: &Ctx<'_>, sweep: &[SweepRow]) -> CheckResult {
    let band = FilterBand::default();
    let positive = |r: &SweepRow| r.zeff.is_some_and(|z| z.re > 0.0);
    let mismatches = sweep
        .iter()
        .filter(|r| positive(r) != band.contains(r.t))
        .count();
    let step = (80.0 - 0.5) / 199.0;
    let first = sweep.iter().find(|r| positive(r)).map(|r| r.t);
    let last = sweep.iter().rev().find(|r| positive(r)).map(|r| r.t);
    let edge_err = match (first, last) {
        (Some(a), Some(b)) => (a - band.lower).abs().max((b - band.upper).abs()),
        _ => f64::INFINITY,
    };
    let mut c = ctx.below(
        "01",
        "filter-band",
        mismatches as f64,
        0.5,
        format!(
            "Re(Zeff)>0 on t in [{:.4}, {:.4}], band ({:.5}, {:.5}), edge error {:.4} vs step {:.4}",
            first.unwrap_or(f64::NAN),
            last.unwrap_or(f64::NAN),
            band.lower,
            band.upper,
            edge_err,
            step
        ),
    );
    c.pass &= edge_err <= step;
    c
}

fn check_sigma(ctx: &Ctx<'_>, sweep: &[SweepRow]) -> CheckResult {
    let mut mismatches = 0;
    let mut worst: f64 = 0.0;
    for r in sweep {
        let p =
            LcParams::new(r.omega, ctx.cfg.inductance, ctx.cfg.capacitance).expect("sweep params");
        let s2 = sigma_sq(&p);
        if (s2 > 0.0) != r.in_band {
            mismatches += 1;
        }
        let t = p.t();
        worst = worst.max((s2 + (t * t - 72.0 * t + 81.0)).abs() / (1.0 + t * t));
    }
    ctx.below(
        "02",
        "sigma-band-equivalence",
        mismatches as f64,
        0.5,
        format!("sigma^2 + (t^2 - 72t + 81) deviates by at most {worst:.2e} (relative)"),
    )
}

fn check_oracle(ctx: &Ctx<'_>) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for (p, _) in &ctx.points {
        for eps in [0.1, 0.01, 0.001] {
            for n in 1..=3 {
                let a = effective_impedance_eps(eps, n, p)?;
                let b = effective_impedance_direct(eps, n, p)?;
                worst = worst.max(rel(a, b));
            }
        }
    }
    Ok(ctx.below(
        "03",
        "oracle-equivalence",
        worst,
        1e-9,
        "n<=3, eps in {0.1,0.01,0.001}, 5 frequencies".into(),
    ))
}

fn check_fixed_point(ctx: &Ctx<'_>) -> Result<CheckResult> {
    let mut gap: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for (p, _) in &ctx.points {
        let r = effective_impedance(p, &ctx.opts)?;
        gap = gap.max(r.gap);
        residual = residual.max(r.residual);
    }
    let mut c = ctx.below(
        "04",
        "regularized-vs-fixed-point",
        gap,
        1e-7,
        format!("max fixed-point residual {residual:.2e} (needs < 1e-8)"),
    );
    c.pass &= residual < 1e-8;
    Ok(c)
}

fn check_spectrum(ctx: &Ctx<'_>) -> CheckResult {
    let mut worst: f64 = 0.0;
    for (p, m) in &ctx.points {
        let l2 = lambda2_formula(m.zeff(), p.z_c());
        for j in 1..=3u8 {
            let ev = crate::harmonic::eigenvalues(m.a(j));
            let expected = [Complex64::new(1.0, 0.0), l2, l2 / 3.0];
            for (x, y) in ev.iter().zip(&expected) {
                worst = worst.max(rel(*x, *y));
            }
        }
    }
    ctx.below(
        "05a",
        "eigenvalue-formula",
        worst,
        1e-8,
        "eig(A_j) = {1, 3Z/(9Z_C+5Z), l2/3}".into(),
    )
}

fn check_printed(ctx: &Ctx<'_>) -> Result<CheckResult> {
    let p = LcParams::from_t(36.0, ctx.cfg.inductance, ctx.cfg.capacitance)?;
    let z = effective_impedance(&p, &ctx.opts)?.zeff;
    let m = compute_extension_matrices(z, &p)?;
    let computed = spectral_report(&m)?.lambda2.norm_sqr();
    let printed = printed_lambda2_sq(&p).unwrap_or(f64::NAN);
    Ok(ctx.below(
        "05b",
        "printed-lambda2-closed-form",
        (computed - printed).abs(),
        1e-8,
        format!("t=36: computed |l2|^2 = {computed:.9}, printed closed form = {printed:.9}"),
    ))
}

fn check_lemma(ctx: &Ctx<'_>, sweep: &[SweepRow]) -> Result<CheckResult> {
    let mut margin = f64::INFINITY;
    let mut count = 0;
    for r in sweep.iter().filter(|r| r.in_band) {
        let z = match r.zeff {
            Some(z) => z,
            None => {
                margin = f64::NEG_INFINITY;
                continue;
            }
        };
        let p = LcParams::new(r.omega, ctx.cfg.inductance, ctx.cfg.capacitance)?;
        let m = compute_extension_matrices(z, &p)?;
        let ev = crate::harmonic::eigenvalues(m.a(1));
        let (a2, a3) = (ev[1].norm(), ev[2].norm());
        margin = margin.min(1.0 - a2).min(a2 - a3);
        count += 1;
    }
    Ok(ctx.at_least(
        "06",
        "spectral-lemma",
        margin,
        1e-6,
        format!("min(1-|l2|, |l2|-|l3|) over {count} in-band grid points"),
    ))
}

fn check_self_similarity(ctx: &Ctx<'_>) -> CheckResult {
    let worst = ctx
        .points
        .iter()
        .map(|(_, m)| m.self_similarity_defect())
        .fold(0.0, f64::max);
    ctx.below(
        "07",
        "self-similarity",
        worst,
        1e-9,
        "max |sum A^H D0^2 A - D0^2| / max |D0^2|".into(),
    )
}

fn check_levels(ctx: &Ctx<'_>) -> Result<Vec<CheckResult>> {
    let m = &ctx.points[1].1;
    let mut rng = ctx.rng(8);
    let samples = if ctx.cfg.quick { 5 } else { 20 };
    let eps = [1e-2, 1e-3, 1e-4];
    let mut spread: f64 = 0.0;
    let mut gap: f64 = 0.0;
    let mut literal: f64 = 0.0;
    for k in 0..samples {
        let h = HarmonicFunction::new(BoundaryData::new(random_boundary(&mut rng))?, m);
        let rep = level_invariance_report(&h, 4, if k == 0 { &eps } else { &eps[2..] })?;
        spread = spread.max(rep.renormalized_spread());
        let row = &rep.rows[2];
        let target = row.renormalized;
        gap = gap.max((row.regularized.last().expect("eps") - target).abs() / target);
        literal = literal.max((row.truncated.last().expect("eps") - target).abs() / target);
    }
    Ok(vec![
        ctx.below(
            "08a",
            "level-invariance",
            spread,
            1e-8,
            format!("{samples} random h, n<=4, t=8"),
        ),
        ctx.below(
            "08b",
            "epsilon-convergence",
            gap,
            1e-3,
            format!(
                "regularized network at n=2, eps=1e-4; literal truncated network gap {literal:.3e}"
            ),
        ),
    ])
}

fn check_power_balance(ctx: &Ctx<'_>) -> Result<CheckResult> {
    let mut rng = ctx.rng(9);
    let mut worst: f64 = 0.0;
    for (p, _) in ctx.points.iter().take(3) {
        for n in 0..=3 {
            let graph = build_graph(n, MAX_LEVEL)?;
            for eps in [0.1, 0.01] {
                let net = assign_impedances(&graph, LadderVariant::Truncated { epsilon: eps }, p)?;
                let schur = schur_trace(&net)?;
                let u = random_boundary(&mut rng);
                let v = kirchhoff_solve(&net, &u)?;
                let direct = network_power(&net, &v)?;
                let formula = 0.5 * hermitian_form(&schur, &u).re;
                worst = worst.max((direct - formula).abs() / direct);
            }
        }
    }
    Ok(ctx.below(
        "09",
        "power-balance",
        worst,
        1e-9,
        "n<=3, eps in {0.1,0.01}".into(),
    ))
}

fn check_continuity(ctx: &Ctx<'_>) -> Result<Vec<CheckResult>> {
    let m = &ctx.points[1].1;
    let r = spectral_report(m)?.contraction;
    let mut rng = ctx.rng(10);
    let samples = if ctx.cfg.quick { 5 } else { 20 };
    let mut worst_ratio: f64 = 0.0;
    let mut worst_decay: f64 = 0.0;
    for _ in 0..samples {
        let u = random_boundary(&mut rng);
        let s = 1.0 / m.form(&u).sqrt();
        let h = HarmonicFunction::new(BoundaryData::new(u.map(|x| x * s))?, m);
        let mut osc = Vec::new();
        for level in 0..=6 {
            let c = continuity_modulus(&h, level, r)?;
            worst_ratio = worst_ratio.max(c.max_oscillation / c.bound);
            osc.push(c.max_oscillation);
        }
        worst_decay = worst_decay.max(((osc[6] / osc[5]) / r - 1.0).abs());
    }
    Ok(vec![
        ctx.below(
            "10a",
            "continuity-bound",
            worst_ratio,
            1.0 + 1e-12,
            format!("max osc / bound, {samples} unit-dissipation h, m<=6"),
        ),
        ctx.below(
            "10b",
            "oscillation-decay",
            worst_decay,
            0.05,
            format!("|osc_6/osc_5 / |l2| - 1|, |l2| = {r:.6}"),
        ),
    ])
}

fn check_measure(ctx: &Ctx<'_>) -> Result<Vec<CheckResult>> {
    let m = &ctx.points[1].1;
    let mut rng = ctx.rng(11);
    let samples = if ctx.cfg.quick { 2 } else { 5 };
    let mut refine: f64 = 0.0;
    let mut total: f64 = 0.0;
    for _ in 0..samples {
        let cm = CellMeasure::new(HarmonicFunction::new(
            BoundaryData::new(random_boundary(&mut rng))?,
            m,
        ));
        for n in 0..=6 {
            let rep = additivity_check(&cm, n, f64::INFINITY, f64::INFINITY)?;
            total = total.max(rep.total_error);
            if n == 6 {
                refine = rep.refinement_error;
            }
        }
    }
    let cm = CellMeasure::new(HarmonicFunction::new(
        BoundaryData::new(random_boundary(&mut rng))?,
        m,
    ));
    let mut sampler = WordSampler::with_stream(ctx.cfg.seed, 1011);
    let mut atom: f64 = 0.0;
    for _ in 0..50 {
        let w = sampler.word(30);
        let rep = atom_check(&cm, &w, 30)?;
        atom = atom.max(rep.values[30] / cm.total());
    }
    Ok(vec![
        ctx.below(
            "11a",
            "refinement-identity",
            refine,
            1e-9,
            "nu(w) = sum_j nu(wj), |w|<=5".into(),
        ),
        ctx.below(
            "11b",
            "level-totals",
            total,
            1e-8,
            "sum_{|w|=n} nu(w) = P[h], n<=6".into(),
        ),
        ctx.below(
            "11c",
            "atom-decay",
            atom,
            1e-6,
            "max nu(T_{w<=30}) / P[h] over 50 random prefixes".into(),
        ),
    ])
}

fn check_bracket(ctx: &Ctx<'_>) -> CheckResult {
    let mut rng = ctx.rng(12);
    let mut sampler = WordSampler::with_stream(ctx.cfg.seed, 1012);
    let mut violations = 0usize;
    let samples = if ctx.cfg.quick { 200 } else { 1000 };
    for k in 0..samples {
        let m = &ctx.points[k % ctx.points.len()].1;
        let u = random_boundary(&mut rng);
        let cm = CellMeasure::new(HarmonicFunction::new(BoundaryData(u), m));
        let len = (rng.next_u32() % 7) as usize;
        let r = osc_comparability(&cm, &sampler.word(len));
        if !r.within {
            violations += 1;
        }
    }
    ctx.below(
        "12",
        "oscillation-bracket",
        violations as f64,
        0.5,
        format!("{samples} random (h, w), |w|<=6"),
    )
}

fn check_singularity(ctx: &Ctx<'_>) -> Result<Vec<CheckResult>> {
    let e1 = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    let mut spread = f64::INFINITY;
    let mut beta = f64::NEG_INFINITY;
    let beta_opts = BetaOptions {
        seed: ctx.cfg.seed,
        ..if ctx.cfg.quick {
            BetaOptions {
                n_random: 16,
                grid_theta: 8,
                grid_phi: 16,
                seed: 0,
            }
        } else {
            BetaOptions::default()
        }
    };
    for (_, m) in &ctx.points {
        spread = spread.min(nonconstancy_check(m, &e1, 1)?.spread);
        beta = beta.max(beta_estimate(m, 1, &beta_opts)?.value);
    }
    let m = &ctx.points[1].1;
    let (steps, samples) = if ctx.cfg.quick {
        (2000, 20)
    } else {
        (10_000, 100)
    };
    let est = lyapunov_exponent(m, &e1, steps, samples, ctx.cfg.seed)?;
    let mut control: f64 = 0.0;
    for (p, m) in &ctx.points {
        let s = 1.0 / m.form(&e1).sqrt();
        let x = deterministic_exponent(m, &e1.map(|v| v * s), 1, 200)?;
        control = control.max((x - lambda2_formula(m.zeff(), p.z_c()).norm().ln()).abs());
    }
    Ok(vec![
        ctx.at_least(
            "13a",
            "nonconstancy",
            spread,
            1e-9,
            "min spread of ||D0 A_j e1|| over 5 frequencies".into(),
        ),
        ctx.below(
            "13b",
            "beta-average",
            beta,
            half_log3_bound(),
            "max over frequencies of the m=1 supremum estimate".into(),
        ),
        ctx.below(
            "13c",
            "lyapunov-bound",
            est.mean + 3.0 * est.std_error,
            half_log3_bound(),
            format!(
                "mean {:.6} se {:.2e}, {steps} steps x {samples} samples, t=8",
                est.mean, est.std_error
            ),
        ),
        ctx.below(
            "13d",
            "deterministic-word",
            control,
            1e-3,
            "|(1/200) log||D0 A_1^200 u|| - log|l2||".into(),
        ),
    ])
}

fn check_exhaustive(ctx: &Ctx<'_>) -> CheckResult {
    let mut rng = ctx.rng(14);
    let mut worst: f64 = 0.0;
    for (_, m) in &ctx.points {
        let u = random_boundary(&mut rng);
        let top = m.form(&u);
        for n in 0..=6 {
            let expected = top / 3f64.powi(n);
            worst = worst.max((mean_square(m, &u, n as usize) - expected).abs() / expected);
        }
    }
    ctx.below(
        "14",
        "exhaustive-identity",
        worst,
        1e-9,
        "n<=6, 5 frequencies".into(),
    )
}

fn check_geometry(ctx: &Ctx<'_>) -> Result<Vec<CheckResult>> {
    let mut worst: f64 = 0.0;
    let mut crossings = 0usize;
    let max_n = if ctx.cfg.quick { 3 } else { 4 };
    for alpha in [0.3, 0.5, 0.7] {
        let g = IfsParams::new(alpha)?;
        for i in 1..=3u8 {
            let pii = g.vertex_coordinates(&VertexId::new(Word::repeat(i, 1)?, i)?);
            worst = worst.max((distance(g.corner(i), pii) - (1.0 - alpha) / 3f64.sqrt()).abs());
        }
        for k in 0..=5 {
            let w = Word::repeat(2, k)?;
            let a = g.vertex_coordinates(&VertexId::new(w.clone(), 1)?);
            let b = g.vertex_coordinates(&VertexId::new(w, 3)?);
            worst = worst.max((distance(a, b) - (alpha / 2.0).powi(k as i32)).abs());
        }
        for n in 0..=max_n {
            if first_crossing(&edge_segments(n, &g)?).is_some() {
                crossings += 1;
            }
        }
    }
    let g = IfsParams::new(0.5)?;
    let est = box_counting_dimension(&g, 8, 2, 7)?;
    let exact = hausdorff_dimension(0.5)?;
    Ok(vec![
        ctx.below(
            "15a",
            "lengths",
            worst,
            1e-12,
            "radial (1-a)/sqrt3 and level-k side (a/2)^k".into(),
        ),
        ctx.below(
            "15b",
            "disjoint-interiors",
            crossings as f64,
            0.5,
            format!("n<={max_n}, alpha in {{0.3,0.5,0.7}}"),
        ),
        ctx.below(
            "15c",
            "box-dimension",
            (est - exact).abs(),
            0.02,
            format!("box-count slope {est:.5} vs log3/log4 = {exact:.5}"),
        ),
    ])
}

fn check_determinism(ctx: &Ctx<'_>) -> Result<CheckResult> {
    let e1 = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    let m = &ctx.points[1].1;
    let run = || -> Result<String> {
        let est = lyapunov_exponent(m, &e1, 500, 16, ctx.cfg.seed)?;
        let grid = t_grid(0.5, 80.0, 16, ctx.cfg.inductance, ctx.cfg.capacitance)?;
        let sweep = frequency_sweep(&grid, ctx.cfg.inductance, ctx.cfg.capacitance, &ctx.opts)?;
        Ok(serde_json::to_string(&(est, sweep))?)
    };
    let (a, b) = (run()?, run()?);
    let differing =
        a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    Ok(ctx.below(
        "16",
        "determinism",
        differing as f64,
        0.5,
        "differing bytes between two seeded runs".into(),
    ))
}
