//! Harmonic extension on the ladder.
//!
//! A harmonic function is determined by its values `u` on the three corners;
//! its values on the corners of the cell `w = w1 ... wm` are
//! `A_{wm} ... A_{w1} u`. The matrices `A_j` come from one Kirchhoff solve of
//! the level-1 network whose inner triangles carry the effective impedance.

use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{
    assign_impedances, build_graph, regularized_limit, LadderGraph, LadderVariant, LcParams,
    VertexId, Word, LETTERS, MAX_LEVEL,
};
use crate::network::{is_finite, kirchhoff_solve, network_power, Network, Potential};

pub type CMatrix3 = Matrix3<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Potentials at `(p1, p2, p3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData(pub [Complex64; 3]);

impl BoundaryData {
    pub fn new(u: [Complex64; 3]) -> Result<Self> {
        if u.iter().any(|x| !is_finite(*x)) {
            return Err(Error::invalid("boundary data must be finite"));
        }
        Ok(Self(u))
    }

    pub fn real(u: [f64; 3]) -> Result<Self> {
        Self::new(u.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn values(&self) -> [Complex64; 3] {
        self.0
    }

    /// Whether all three values coincide.
    pub fn is_constant(&self) -> bool {
        self.0[0] == self.0[1] && self.0[1] == self.0[2]
    }
}

/// The extension matrices `A_1, A_2, A_3` and the dissipation form of the
/// effective triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionMatrices {
    a: [CMatrix3; 3],
    zeff: Complex64,
    params: LcParams,
    c: f64,
}

fn level_one_graph() -> Result<LadderGraph> {
    build_graph(1, MAX_LEVEL)
}

/// Columns of `A_j` from Kirchhoff solves of a level-1 network with the unit
/// boundary vectors.
pub fn extension_from_network(graph: &LadderGraph, net: &Network) -> Result<[CMatrix3; 3]> {
    if graph.level() != 1 {
        return Err(Error::invalid("extension matrices need the level-1 graph"));
    }
    let mut a = [CMatrix3::zeros(); 3];
    for i in 0..3 {
        let mut e = [ZERO; 3];
        e[i] = ONE;
        let v = kirchhoff_solve(net, &e)?;
        for (j, aj) in a.iter_mut().enumerate() {
            for k in 0..3 {
                aj[(k, i)] = v[cell_corner_index(graph, j as u8 + 1, k as u8 + 1)];
            }
        }
    }
    Ok(a)
}

fn cell_corner_index(graph: &LadderGraph, cell: u8, corner: u8) -> usize {
    let id =
        VertexId::new(Word::repeat(cell, 1).expect("valid letter"), corner).expect("valid corner");
    graph.index_of(&id).expect("level-1 vertex")
}

pub fn compute_extension_matrices(zeff: Complex64, params: &LcParams) -> Result<ExtensionMatrices> {
    if !is_finite(zeff) || !(zeff.re > 0.0) {
        return Err(Error::NonDissipative {
            t: params.t(),
            limit: zeff,
        });
    }
    let graph = level_one_graph()?;
    let net = assign_impedances(
        &graph,
        LadderVariant::Renormalized { z_inner: zeff },
        params,
    )?;
    let a = extension_from_network(&graph, &net)?;
    Ok(ExtensionMatrices {
        a,
        zeff,
        params: *params,
        c: zeff.re / (2.0 * zeff.norm_sqr()),
    })
}

impl ExtensionMatrices {
    /// `A_j` for `j` in `1..=3`.
    pub fn a(&self, j: u8) -> &CMatrix3 {
        &self.a[(j - 1) as usize]
    }

    pub fn zeff(&self) -> Complex64 {
        self.zeff
    }

    pub fn params(&self) -> &LcParams {
        &self.params
    }

    /// `Re(Zeff) / (2 |Zeff|^2)`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// `c (3I - J)`.
    pub fn d0sq(&self) -> Matrix3<f64> {
        (Matrix3::identity() * 3.0 - Matrix3::repeat(1.0)) * self.c
    }

    /// The positive semidefinite square root `sqrt(3c) (I - J/3)` of `d0sq`.
    pub fn d0(&self) -> Matrix3<f64> {
        (Matrix3::identity() - Matrix3::repeat(1.0 / 3.0)) * (3.0 * self.c).sqrt()
    }

    /// `||D0 u||^2 = c * sum_{i<j} |u_i - u_j|^2`.
    pub fn form(&self, u: &[Complex64; 3]) -> f64 {
        self.c * pair_sum(u)
    }

    /// `max |sum_j A_j^H D0^2 A_j - D0^2| / max |D0^2|`.
    pub fn self_similarity_defect(&self) -> f64 {
        let d = self.d0sq().map(|x| Complex64::new(x, 0.0));
        let sum: CMatrix3 = self.a.iter().map(|a| a.adjoint() * d * a).sum();
        let dmax = d.iter().map(|x| x.norm()).fold(0.0, f64::max);
        (sum - d).iter().map(|x| x.norm()).fold(0.0, f64::max) / dmax
    }

    /// Largest `|A_j 1 - 1|`.
    pub fn constant_defect(&self) -> f64 {
        let one = Vector3::repeat(ONE);
        self.a
            .iter()
            .map(|a| cmax(&(a * one - one)))
            .fold(0.0, f64::max)
    }

    /// `A_{wm} ... A_{w1} u`.
    pub fn apply_word(&self, w: &Word, u: &[Complex64; 3]) -> [Complex64; 3] {
        let mut v = Vector3::from(*u);
        for &l in w.letters() {
            v = self.a(l) * v;
        }
        v.into()
    }
}

/// Largest entry modulus.
pub(crate) fn cmax<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex64, R, C>>(
    m: &nalgebra::Matrix<Complex64, R, C, S>,
) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `sum_{i<j} |u_i - u_j|^2`.
pub(crate) fn pair_sum(u: &[Complex64; 3]) -> f64 {
    (u[0] - u[1]).norm_sqr() + (u[0] - u[2]).norm_sqr() + (u[1] - u[2]).norm_sqr()
}

/// Eigenvalues of `a`, given that `a (1,1,1) = (1,1,1)`, sorted by modulus
/// in decreasing order. The remaining pair solves
/// `x^2 - (tr a - 1) x + det a = 0`.
pub fn eigenvalues(a: &CMatrix3) -> [Complex64; 3] {
    let s = a.trace() - ONE;
    let p = a.determinant();
    let disc = (s * s - 4.0 * p).sqrt();
    // Avoid cancellation: take the root with the larger modulus first.
    let q = if (s + disc).norm() >= (s - disc).norm() {
        (s + disc) / 2.0
    } else {
        (s - disc) / 2.0
    };
    let r = if q.norm() > 0.0 { p / q } else { s - q };
    let mut all = [ONE, q, r];
    all.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    all
}

/// A nonzero vector `v` with `(a - lambda I) v = 0`, from the largest
/// bilinear cross product of two rows.
pub fn eigenvector(a: &CMatrix3, lambda: Complex64) -> [Complex64; 3] {
    let m = a - CMatrix3::identity() * lambda;
    let rows: Vec<Vector3<Complex64>> = (0..3).map(|r| m.row(r).transpose()).collect();
    let cross = |x: &Vector3<Complex64>, y: &Vector3<Complex64>| {
        Vector3::new(
            x[1] * y[2] - x[2] * y[1],
            x[2] * y[0] - x[0] * y[2],
            x[0] * y[1] - x[1] * y[0],
        )
    };
    let best = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| cross(&rows[i], &rows[j]))
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .expect("three pairs");
    let n = best.norm();
    (best / Complex64::new(n, 0.0)).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Eigenvalues of `A_1, A_2, A_3`, each sorted by decreasing modulus.
    pub spectra: [[Complex64; 3]; 3],
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub lambda3: Complex64,
    pub modulus2: f64,
    /// The contraction factor `|lambda_2|`.
    pub contraction: f64,
}

/// Spectra of the extension matrices; fails unless
/// `|lambda_3| < |lambda_2| < |lambda_1| = 1` and the three spectra agree.
pub fn spectral_report(m: &ExtensionMatrices) -> Result<SpectralReport> {
    let spectra = [1u8, 2, 3].map(|j| eigenvalues(m.a(j)));
    let [l1, l2, l3] = spectra[0];
    for s in &spectra[1..] {
        let gap = s
            .iter()
            .zip(&spectra[0])
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        if gap > 1e-8 {
            return Err(Error::Spectrum(format!("spectra of A_j differ by {gap:e}")));
        }
    }
    if (l1 - ONE).norm() >= 1e-9 {
        return Err(Error::Spectrum(format!("leading eigenvalue {l1}")));
    }
    if !(l3.norm() < l2.norm() && l2.norm() < 1.0) {
        return Err(Error::Spectrum(format!(
            "|l2| = {}, |l3| = {}",
            l2.norm(),
            l3.norm()
        )));
    }
    Ok(SpectralReport {
        spectra,
        lambda1: l1,
        lambda2: l2,
        lambda3: l3,
        modulus2: l2.norm(),
        contraction: l2.norm(),
    })
}

/// `3 Zeff / (9 Z_C + 5 Zeff)`.
pub fn lambda2_formula(zeff: Complex64, z_c: Complex64) -> Complex64 {
    3.0 * zeff / (9.0 * z_c + 5.0 * zeff)
}

/// The printed closed form
/// `(9 s^2 + (27 + 6a)^2) / (2106 + 25 s^2 + 90 s + 100 a (9 + 2a))`
/// with `a = C L w^2` and `s = sqrt(144 a - 4 a^2 - 81)`, meant to equal
/// `|lambda_2|^2`. `None` outside the band, where `s` is not real.
pub fn printed_lambda2_sq(params: &LcParams) -> Option<f64> {
    let a = params.t() / 2.0;
    let s2 = sigma_sq(params);
    if s2 < 0.0 {
        return None;
    }
    let s = s2.sqrt();
    Some(
        (9.0 * s2 + (27.0 + 6.0 * a).powi(2))
            / (2106.0 + 25.0 * s2 + 90.0 * s + 100.0 * a * (9.0 + 2.0 * a)),
    )
}

/// `144 a - (2a)^2 - 81` with `a = C L w^2`; positive exactly inside the band.
pub fn sigma_sq(params: &LcParams) -> f64 {
    let a = params.t() / 2.0;
    144.0 * a - (2.0 * a).powi(2) - 81.0
}

/// Direction of `A_3 h_2`, with `h_2` the `lambda_2`-eigenvector of `A_1`,
/// in corner order `(G_3(p1), G_3(p2), G_3(p3))`:
/// `(3, (18 Z_C + 8 Z)/(3 Z_C + 2 Z), (27 Z_C + 10 Z)/(3 Z_C + 2 Z))`.
pub fn a3h2_direction(zeff: Complex64, z_c: Complex64) -> [Complex64; 3] {
    let d = 3.0 * z_c + 2.0 * zeff;
    [
        Complex64::new(3.0, 0.0),
        (18.0 * z_c + 8.0 * zeff) / d,
        (27.0 * z_c + 10.0 * zeff) / d,
    ]
}

/// `max |x_i y_j - x_j y_i| / (|x| |y|)`; zero iff collinear.
pub fn collinearity_residual(x: &[Complex64; 3], y: &[Complex64; 3]) -> f64 {
    let nx = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            worst = worst.max((x[i] * y[j] - x[j] * y[i]).norm());
        }
    }
    worst / (nx * ny)
}

/// The harmonic function with the given corner values.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicFunction<'m> {
    pub boundary: BoundaryData,
    pub matrices: &'m ExtensionMatrices,
}

impl<'m> HarmonicFunction<'m> {
    pub fn new(boundary: BoundaryData, matrices: &'m ExtensionMatrices) -> Self {
        Self { boundary, matrices }
    }

    /// Values on the corners of the cell `w`. Constant data stay exactly
    /// constant.
    pub fn extend_to_cell(&self, w: &Word) -> [Complex64; 3] {
        if self.boundary.is_constant() {
            return self.boundary.0;
        }
        self.matrices.apply_word(w, &self.boundary.0)
    }

    pub fn evaluate(&self, v: &VertexId) -> Complex64 {
        self.extend_to_cell(v.word())[(v.corner() - 1) as usize]
    }

    /// `<D0^2 u, u>`.
    pub fn dissipation(&self) -> f64 {
        self.matrices.form(&self.boundary.0)
    }

    /// Values on every vertex of `graph`.
    pub fn restrict(&self, graph: &LadderGraph) -> Potential {
        Potential(graph.vertices().iter().map(|v| self.evaluate(v)).collect())
    }

    /// Largest `|h(x) - h(y)|` over corner pairs of the cell `w`.
    pub fn cell_oscillation(&self, w: &Word) -> f64 {
        oscillation(&self.extend_to_cell(w))
    }
}

pub(crate) fn oscillation(u: &[Complex64; 3]) -> f64 {
    (u[0] - u[1])
        .norm()
        .max((u[0] - u[2]).norm())
        .max((u[1] - u[2]).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub n: usize,
    /// Dissipation on `Z_n`.
    pub renormalized: f64,
    /// Dissipation on `Z_{eps,n}`, one entry per epsilon.
    pub truncated: Vec<f64>,
    /// Dissipation on the regularized level-`n` network, one entry per
    /// epsilon.
    pub regularized: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelInvariance {
    pub eps: Vec<f64>,
    /// Regularized effective impedance used for the deepest triangles.
    pub eps_limits: Vec<Complex64>,
    pub rows: Vec<LevelRow>,
}

impl LevelInvariance {
    /// `(max - min) / max` of the `Z_n` column.
    pub fn renormalized_spread(&self) -> f64 {
        let col: Vec<f64> = self.rows.iter().map(|r| r.renormalized).collect();
        let max = col.iter().cloned().fold(f64::MIN, f64::max);
        let min = col.iter().cloned().fold(f64::MAX, f64::min);
        if max == 0.0 {
            0.0
        } else {
            (max - min) / max
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n".to_string(), "renormalized".to_string()];
        header.extend(self.eps.iter().map(|e| format!("truncated_{e:e}")));
        header.extend(self.eps.iter().map(|e| format!("regularized_{e:e}")));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.n.to_string(), r.renormalized.to_string()];
            rec.extend(r.truncated.iter().map(|x| x.to_string()));
            rec.extend(r.regularized.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Dissipation of `h|_{V_n}` on `Z_n`, `Z_{eps,n}` and the regularized
/// networks for `n = 0..=n_max`.
pub fn level_invariance_report(
    h: &HarmonicFunction<'_>,
    n_max: usize,
    eps_list: &[f64],
) -> Result<LevelInvariance> {
    if n_max > MAX_LEVEL {
        return Err(Error::LevelTooDeep {
            level: n_max,
            max: MAX_LEVEL,
        });
    }
    let params = *h.matrices.params();
    let eps_limits = eps_list
        .iter()
        .map(|&e| regularized_limit(e, &params, 10_000).map(|s| s.z))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let graph = build_graph(n, MAX_LEVEL)?;
        let v = h.restrict(&graph);
        let power = |variant| -> Result<f64> {
            network_power(&assign_impedances(&graph, variant, &params)?, &v)
        };
        let renormalized = power(LadderVariant::Renormalized {
            z_inner: h.matrices.zeff(),
        })?;
        let truncated = eps_list
            .iter()
            .map(|&epsilon| power(LadderVariant::Truncated { epsilon }))
            .collect::<Result<Vec<_>>>()?;
        let regularized = eps_list
            .iter()
            .zip(&eps_limits)
            .map(|(&epsilon, &z_deep)| power(LadderVariant::Regularized { epsilon, z_deep }))
            .collect::<Result<Vec<_>>>()?;
        rows.push(LevelRow {
            n,
            renormalized,
            truncated,
            regularized,
        });
    }
    Ok(LevelInvariance {
        eps: eps_list.to_vec(),
        eps_limits,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub m: usize,
    /// Largest corner oscillation over the cells of level `m`.
    pub max_oscillation: f64,
    /// `|Zeff| sqrt(2 / Re Zeff) |lambda_2|^m sqrt(P[h])`.
    pub bound: f64,
    pub holds: bool,
}

/// Oscillation of `h` over the level-`m` cells against the contraction bound.
pub fn continuity_modulus(h: &HarmonicFunction<'_>, m: usize, r: f64) -> Result<ContinuityReport> {
    if m > MAX_LEVEL {
        return Err(Error::LevelTooDeep {
            level: m,
            max: MAX_LEVEL,
        });
    }
    let max_oscillation = crate::ladder::words_of_length(m)
        .iter()
        .map(|w| h.cell_oscillation(w))
        .fold(0.0, f64::max);
    let z = h.matrices.zeff();
    let bound = z.norm() * (2.0 / z.re).sqrt() * r.powi(m as i32) * h.dissipation().sqrt();
    Ok(ContinuityReport {
        m,
        max_oscillation,
        bound,
        holds: max_oscillation <= bound * (1.0 + 1e-12),
    })
}

/// CSV rows `word,corner,re,im` for the corners of the given cells.
pub fn write_harmonic_csv<W: Write>(
    h: &HarmonicFunction<'_>,
    words: &[Word],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["word", "corner", "re", "im"])?;
    for word in words {
        let vals = h.extend_to_cell(word);
        for (k, v) in LETTERS.iter().zip(vals) {
            w.write_record([
                word.to_string(),
                k.to_string(),
                v.re.to_string(),
                v.im.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
