use std::io::Write;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::{
    assign_impedances, filter_condition, level_one_network, LadderVariant, LcParams,
};
use super::graph::{build_graph, LadderGraph, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::network::{equivalent_triangle, is_finite, schur_trace};

/// Relative off-diagonal spread tolerated in a decimation step.
pub const DECIMATION_SYMMETRY_TOL: f64 = 1e-10;

fn level_one() -> &'static LadderGraph {
    static GRAPH: OnceLock<LadderGraph> = OnceLock::new();
    GRAPH.get_or_init(|| build_graph(1, MAX_LEVEL).expect("level 1 is within bounds"))
}

/// One decimation step with arbitrary outer, radial and inner impedances.
pub fn decimation_with(z: Complex64, outer: Complex64, radial: Complex64) -> Result<Complex64> {
    let net = level_one_network(level_one(), outer, radial, z)?;
    equivalent_triangle(&schur_trace(&net)?, DECIMATION_SYMMETRY_TOL)
}

/// Equivalent triangle impedance of the level-1 ladder whose inner triangles
/// carry `z` and whose remaining edges carry an extra series `epsilon`.
pub fn decimation_map(z: Complex64, epsilon: f64, params: &LcParams) -> Result<Complex64> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let eps = Complex64::new(epsilon, 0.0);
    decimation_with(z, params.z_l() + eps, params.z_c() + eps)
}

/// Effective impedance of the truncated network `Z_{eps,n}`, computed
/// inside-out by `n` decimation steps.
pub fn effective_impedance_eps(epsilon: f64, n: usize, params: &LcParams) -> Result<Complex64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("level must be at least 1"));
    }
    let mut z = params.z_l() + epsilon;
    for _ in 0..n {
        z = decimation_map(z, epsilon, params)?;
    }
    Ok(z)
}

/// Effective impedance of the full `Z_{eps,n}` network by a direct trace.
pub fn effective_impedance_direct(epsilon: f64, n: usize, params: &LcParams) -> Result<Complex64> {
    let graph = build_graph(n, MAX_LEVEL)?;
    let net = assign_impedances(&graph, LadderVariant::Truncated { epsilon }, params)?;
    equivalent_triangle(&schur_trace(&net)?, DECIMATION_SYMMETRY_TOL)
}

/// Result of iterating a map to stagnation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stagnation {
    pub z: Complex64,
    pub map_calls: usize,
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() < rel * (1.0 + a.norm())
}

/// Iterates `map` from `z0` until `|z_{k+1} - z_k| < 1e-12 (1 + |z_k|)`,
/// using Aitken extrapolation on every pair of steps.
pub(crate) fn steffensen<F>(mut z: Complex64, budget: usize, map: F) -> Result<Stagnation>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut calls = 0;
    let mut last_step = f64::INFINITY;
    while calls < budget {
        let z1 = map(z)?;
        calls += 1;
        if close(z, z1, 1e-12) {
            return Ok(Stagnation {
                z: z1,
                map_calls: calls,
            });
        }
        let z2 = map(z1)?;
        calls += 1;
        let denom = z2 - 2.0 * z1 + z;
        let accel = z - (z1 - z) * (z1 - z) / denom;
        let next = if is_finite(accel) && denom.norm() > 1e-300 && accel.re > 0.0 {
            accel
        } else {
            z2
        };
        last_step = (next - z).norm();
        if !is_finite(next) {
            break;
        }
        z = next;
    }
    Err(Error::NonConvergence {
        iterations: calls,
        last_step,
    })
}

/// Stagnation limit of `z -> decimation_map(z, epsilon)` from `Z_L + epsilon`,
/// i.e. the effective impedance of the infinite ladder regularized by
/// `epsilon`.
pub fn regularized_limit(epsilon: f64, params: &LcParams, budget: usize) -> Result<Stagnation> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    steffensen(params.z_l() + epsilon, budget, |z| {
        decimation_map(z, epsilon, params)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeffOptions {
    /// Relative agreement required between the two estimates.
    pub tol: f64,
    /// First value of the geometric epsilon schedule.
    pub eps_start: f64,
    /// The schedule always reaches at least this value.
    pub eps_min: f64,
    /// Smallest epsilon the adaptive schedule may use.
    pub eps_floor: f64,
    /// Map-call budget per epsilon and Newton iteration budget.
    pub max_iter: usize,
}

impl Default for ZeffOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            eps_start: 1e-2,
            eps_min: 1e-5,
            eps_floor: 1e-9,
            max_iter: 10_000,
        }
    }
}

impl ZeffOptions {
    fn validate(&self) -> Result<()> {
        let ok = self.tol > 0.0
            && self.eps_floor > 0.0
            && self.eps_floor <= self.eps_min
            && self.eps_min <= self.eps_start
            && self.max_iter > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("inconsistent options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsPoint {
    pub epsilon: f64,
    pub z: Complex64,
    pub map_calls: usize,
}

/// The regularized path and its extrapolation to `epsilon = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsPath {
    pub points: Vec<EpsPoint>,
    pub limit: Complex64,
}

/// Value at 0 of the polynomial through the given points.
pub fn extrapolate_to_zero(points: &[(f64, Complex64)]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &(xi, zi)) in points.iter().enumerate() {
        let mut w = 1.0;
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i != j {
                w *= xj / (xj - xi);
            }
        }
        acc += zi * w;
    }
    acc
}

/// Regularized limits along a decreasing geometric epsilon schedule,
/// extrapolated to zero from the last three points. The schedule is extended
/// below `eps_min` while successive extrapolations still move by more than
/// `tol / 100`.
pub fn epsilon_path(params: &LcParams, opts: &ZeffOptions) -> Result<EpsPath> {
    opts.validate()?;
    let mut points: Vec<EpsPoint> = Vec::new();
    let mut previous: Option<Complex64> = None;
    let mut eps = opts.eps_start;
    loop {
        let s = regularized_limit(eps, params, opts.max_iter)?;
        points.push(EpsPoint {
            epsilon: eps,
            z: s.z,
            map_calls: s.map_calls,
        });
        let next = eps / 10.0;
        if points.len() >= 3 {
            let tail: Vec<_> = points[points.len() - 3..]
                .iter()
                .map(|p| (p.epsilon, p.z))
                .collect();
            let limit = extrapolate_to_zero(&tail);
            let settled = previous.is_some_and(|p| close(limit, p, 0.01 * opts.tol));
            let reached_min = eps <= opts.eps_min * (1.0 + 1e-9);
            if (reached_min && settled) || next < opts.eps_floor * (1.0 - 1e-9) {
                return Ok(EpsPath { points, limit });
            }
            previous = Some(limit);
        }
        eps = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOutcome {
    pub z: Complex64,
    pub iterations: usize,
    pub residual: f64,
    pub fallback: bool,
}

fn newton_residual(z: Complex64, params: &LcParams) -> Result<Complex64> {
    Ok(decimation_map(z, 0.0, params)? - z)
}

/// Damped Newton on `f(z) = R(z) - z` with a central-difference 2x2 real
/// Jacobian; falls back to Aitken-accelerated iteration when Newton fails.
pub fn fixed_point(seed: Complex64, params: &LcParams, max_iter: usize) -> Result<NewtonOutcome> {
    match newton(seed, params, max_iter) {
        Ok(out) => Ok(out),
        Err(_) => {
            let s = steffensen(seed, max_iter, |z| decimation_map(z, 0.0, params))?;
            let residual = newton_residual(s.z, params)?.norm();
            Ok(NewtonOutcome {
                z: s.z,
                iterations: s.map_calls,
                residual,
                fallback: true,
            })
        }
    }
}

fn newton(seed: Complex64, params: &LcParams, max_iter: usize) -> Result<NewtonOutcome> {
    let mut z = seed;
    let mut f = newton_residual(z, params)?;
    for it in 0..max_iter.min(200) {
        if f.norm() <= 1e-14 * z.norm().max(1e-300) {
            return Ok(NewtonOutcome {
                z,
                iterations: it,
                residual: f.norm(),
                fallback: false,
            });
        }
        let h = 1e-7 * z.norm().max(1e-12);
        let dx = (newton_residual(z + h, params)? - newton_residual(z - h, params)?) / (2.0 * h);
        let dy = (newton_residual(z + Complex64::new(0.0, h), params)?
            - newton_residual(z - Complex64::new(0.0, h), params)?)
            / (2.0 * h);
        // Columns of the real Jacobian are the partials in x and y.
        let (a, b, c, d) = (dx.re, dy.re, dx.im, dy.im);
        let det = a * d - b * c;
        if det.abs() < 1e-300 || !det.is_finite() {
            return Err(Error::Numerical("singular Newton Jacobian".into()));
        }
        let sx = -(d * f.re - b * f.im) / det;
        let sy = -(-c * f.re + a * f.im) / det;
        let step = Complex64::new(sx, sy);
        let mut lambda = 1.0;
        loop {
            let trial = z + step * lambda;
            if let Ok(ft) = newton_residual(trial, params) {
                if ft.norm() < f.norm() || step.norm() * lambda < 1e-15 * z.norm() {
                    z = trial;
                    f = ft;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(Error::NonConvergence {
                    iterations: it,
                    last_step: step.norm(),
                });
            }
        }
        if (step * lambda).norm() < 1e-15 * z.norm() {
            return Ok(NewtonOutcome {
                z,
                iterations: it + 1,
                residual: f.norm(),
                fallback: false,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last_step: f.norm(),
    })
}

/// Diagnostics of an effective impedance computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeffReport {
    pub params: LcParams,
    pub t: f64,
    pub in_band: bool,
    pub zeff: Complex64,
    pub path: EpsPath,
    pub newton: NewtonOutcome,
    /// `|R(zeff) - zeff| / |zeff|`.
    pub residual: f64,
    /// `|path limit - zeff| / |zeff|`.
    pub gap: f64,
    /// Distinct fixed points reached from the auxiliary seeds.
    pub roots: Vec<Complex64>,
}

/// Effective impedance of the ladder: the extrapolated regularized limit,
/// refined and cross-checked by a direct fixed-point solve.
pub fn effective_impedance(params: &LcParams, opts: &ZeffOptions) -> Result<ZeffReport> {
    let status = filter_condition(params);
    let path = epsilon_path(params, opts)?;
    let limit = path.limit;
    if !(limit.re > 1e-6 * limit.norm()) {
        return Err(Error::NonDissipative { t: status.t, limit });
    }
    let newton = fixed_point(limit, params, opts.max_iter)?;
    let zeff = newton.z;
    if !(zeff.re > 0.0) {
        return Err(Error::NonDissipative {
            t: status.t,
            limit: zeff,
        });
    }
    let gap = (limit - zeff).norm() / zeff.norm();
    if gap > opts.tol {
        return Err(Error::Disagreement {
            path: limit,
            fixed: zeff,
            gap,
        });
    }
    let residual = newton_residual(zeff, params)?.norm() / zeff.norm();
    let mut roots = vec![zeff];
    for seed in [zeff.conj(), -zeff, params.z_l(), params.z_c(), -zeff.conj()] {
        if let Ok(out) = fixed_point(seed, params, 200) {
            let fresh = roots.iter().all(|r| (r - out.z).norm() > 1e-8 * r.norm());
            if is_finite(out.z) && out.residual < 1e-8 * out.z.norm() && fresh {
                roots.push(out.z);
            }
        }
    }
    Ok(ZeffReport {
        params: *params,
        t: status.t,
        in_band: status.in_band,
        zeff,
        path,
        newton,
        residual,
        gap,
        roots,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepStatus {
    Ok,
    NonDissipative,
    Error(String),
}

impl SweepStatus {
    pub fn label(&self) -> String {
        match self {
            SweepStatus::Ok => "ok".into(),
            SweepStatus::NonDissipative => "non-dissipative".into(),
            SweepStatus::Error(msg) => format!("error: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub omega: f64,
    pub t: f64,
    pub in_band: bool,
    /// Dissipative effective impedance, if any.
    pub zeff: Option<Complex64>,
    /// Extrapolated regularized limit, also for non-dissipative rows.
    pub eps_limit: Option<Complex64>,
    pub status: SweepStatus,
}

fn sweep_row(omega: f64, inductance: f64, capacitance: f64, opts: &ZeffOptions) -> SweepRow {
    let params = match LcParams::new(omega, inductance, capacitance) {
        Ok(p) => p,
        Err(e) => {
            return SweepRow {
                omega,
                t: 2.0 * omega * omega * inductance * capacitance,
                in_band: false,
                zeff: None,
                eps_limit: None,
                status: SweepStatus::Error(e.to_string()),
            }
        }
    };
    let fc = filter_condition(&params);
    let (zeff, eps_limit, status) = match effective_impedance(&params, opts) {
        Ok(r) => (Some(r.zeff), Some(r.path.limit), SweepStatus::Ok),
        Err(Error::NonDissipative { limit, .. }) => {
            (None, Some(limit), SweepStatus::NonDissipative)
        }
        Err(e) => (None, None, SweepStatus::Error(e.to_string())),
    };
    SweepRow {
        omega,
        t: fc.t,
        in_band: fc.in_band,
        zeff,
        eps_limit,
        status,
    }
}

/// One row per angular frequency, evaluated in parallel; failures are kept in
/// the row.
pub fn frequency_sweep(
    omegas: &[f64],
    inductance: f64,
    capacitance: f64,
    opts: &ZeffOptions,
) -> Result<Vec<SweepRow>> {
    if omegas.is_empty() {
        return Err(Error::invalid("empty frequency grid"));
    }
    LcParams::new(1.0, inductance, capacitance)?;
    Ok(omegas
        .par_iter()
        .map(|&w| sweep_row(w, inductance, capacitance, opts))
        .collect())
}

/// Angular frequencies giving `n` equally spaced values of `t` in `[t_min, t_max]`.
pub fn t_grid(
    t_min: f64,
    t_max: f64,
    n: usize,
    inductance: f64,
    capacitance: f64,
) -> Result<Vec<f64>> {
    if n == 0 || !(t_min > 0.0) || !(t_max >= t_min) || (n == 1 && t_max != t_min) {
        return Err(Error::invalid(format!(
            "bad t grid [{t_min}, {t_max}] with {n} points"
        )));
    }
    let step = if n == 1 {
        0.0
    } else {
        (t_max - t_min) / (n - 1) as f64
    };
    (0..n)
        .map(|k| {
            LcParams::from_t(t_min + step * k as f64, inductance, capacitance).map(|p| p.omega)
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["omega", "t", "in_band", "zeff_re", "zeff_im", "status"])?;
    for r in rows {
        let (re, im) = match r.zeff {
            Some(z) => (z.re.to_string(), z.im.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.omega.to_string(),
            r.t.to_string(),
            r.in_band.to_string(),
            re,
            im,
            r.status.label(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
