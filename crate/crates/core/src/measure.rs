//! The power-dissipation measure of a harmonic function and the uniform
//! Bernoulli measure, both evaluated on cells.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Mutex;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{pair_sum, HarmonicFunction};
use crate::ladder::{words_of_length, VertexId, Word, LETTERS};

/// `nu_h` on cells, with a shared cache.
pub struct CellMeasure<'m> {
    h: HarmonicFunction<'m>,
    cache: Mutex<HashMap<Word, f64>>,
}

impl<'m> CellMeasure<'m> {
    pub fn new(h: HarmonicFunction<'m>) -> Self {
        Self {
            h,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn harmonic(&self) -> &HarmonicFunction<'m> {
        &self.h
    }

    /// `P_SL[h]`, the mass of the whole space.
    pub fn total(&self) -> f64 {
        self.h.dissipation()
    }

    /// `c = Re(Zeff) / (2 |Zeff|^2)`.
    pub fn c(&self) -> f64 {
        self.h.matrices.c()
    }

    /// `||D0 A_{wm} ... A_{w1} u||^2`.
    pub fn nu(&self, w: &Word) -> f64 {
        if let Some(&v) = self.cache.lock().expect("cache lock").get(w) {
            return v;
        }
        if self.h.boundary.is_constant() {
            return 0.0;
        }
        let x = Vector3::from(self.h.extend_to_cell(w));
        let d0 = self.h.matrices.d0().map(|r| Complex64::new(r, 0.0));
        let v = (d0 * x).norm_squared();
        self.cache.lock().expect("cache lock").insert(w.clone(), v);
        v
    }

    /// `c * sum over corner pairs of |h(x) - h(y)|^2`.
    pub fn nu_pairs(&self, w: &Word) -> f64 {
        self.c() * pair_sum(&self.h.extend_to_cell(w))
    }

    /// Mass of the single node `v`: the mass of its cell minus that of the
    /// three subcells, none of which contains it.
    pub fn vertex_mass(&self, v: &VertexId) -> f64 {
        let w = v.word();
        self.nu(w) - LETTERS.iter().map(|&j| self.nu(&w.child(j))).sum::<f64>()
    }

    pub fn osc(&self, w: &Word) -> f64 {
        self.h.cell_oscillation(w)
    }
}

/// Product measure with weights `(mu_1, mu_2, mu_3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliMeasure {
    pub weights: [f64; 3],
}

impl Default for BernoulliMeasure {
    fn default() -> Self {
        Self {
            weights: [1.0 / 3.0; 3],
        }
    }
}

impl BernoulliMeasure {
    pub fn new(weights: [f64; 3]) -> Result<Self> {
        if weights.iter().any(|&w| !(w > 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(Error::invalid(format!(
                "weights {weights:?} are not a probability vector"
            )));
        }
        Ok(Self { weights })
    }

    pub fn mu(&self, w: &Word) -> f64 {
        w.letters()
            .iter()
            .map(|&l| self.weights[(l - 1) as usize])
            .product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub n: usize,
    pub total: f64,
    pub expected: f64,
    /// `|sum_{|w|=n} nu(w) - P[h]| / P[h]`.
    pub total_error: f64,
    /// Largest `|nu(w) - sum_j nu(wj)| / nu(w)` over `|w| < n`.
    pub refinement_error: f64,
}

/// Checks the level total and the refinement identity up to level `n`.
pub fn additivity_check(
    cm: &CellMeasure<'_>,
    n: usize,
    tol_total: f64,
    tol_refine: f64,
) -> Result<AdditivityReport> {
    let expected = cm.total();
    let total: f64 = words_of_length(n).iter().map(|w| cm.nu(w)).sum();
    let rel = |err: f64, scale: f64| if scale > 0.0 { err / scale } else { err };
    let total_error = rel((total - expected).abs(), expected);
    let mut refinement_error: f64 = 0.0;
    for k in 0..n {
        for w in words_of_length(k) {
            let parent = cm.nu(&w);
            let children: f64 = LETTERS.iter().map(|&j| cm.nu(&w.child(j))).sum();
            refinement_error = refinement_error.max(rel((parent - children).abs(), parent));
        }
    }
    let report = AdditivityReport {
        n,
        total,
        expected,
        total_error,
        refinement_error,
    };
    if total_error > tol_total || refinement_error > tol_refine {
        return Err(Error::Violation {
            name: "additivity",
            detail: format!("{report:?}"),
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    /// `nu(T_{w_1 ... w_k})` for `k = 0..=depth`.
    pub values: Vec<f64>,
    /// `3c osc(h)^2` on the whole space.
    pub bound: f64,
    /// Geometric mean of the ratios over the second half of the sequence.
    pub decay_rate: f64,
}

/// Masses of the nested cells along `prefix`.
pub fn atom_check(cm: &CellMeasure<'_>, prefix: &Word, depth: usize) -> Result<AtomReport> {
    if depth > 60 || prefix.len() < depth {
        return Err(Error::invalid(format!(
            "depth {depth} needs a prefix of at least that length and at most 60"
        )));
    }
    let values: Vec<f64> = (0..=depth).map(|k| cm.nu(&prefix.prefix(k))).collect();
    let bound = 3.0 * cm.c() * cm.osc(&Word::empty()).powi(2);
    let start = depth / 2;
    let decay_rate = if depth > start && values[start] > 0.0 && values[depth] > 0.0 {
        (values[depth] / values[start]).powf(1.0 / (depth - start) as f64)
    } else {
        0.0
    };
    Ok(AtomReport {
        values,
        bound,
        decay_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscReport {
    pub nu: f64,
    pub osc_sq: f64,
    /// `nu / osc^2`, absent when `h` is constant on the cell.
    pub ratio: Option<f64>,
    pub c: f64,
    /// Whether the ratio lies in `[c, 3c]` up to `1e-9`.
    pub within: bool,
}

pub fn osc_comparability(cm: &CellMeasure<'_>, w: &Word) -> OscReport {
    let nu = cm.nu(w);
    let osc_sq = cm.osc(w).powi(2);
    let c = cm.c();
    let ratio = (osc_sq > 0.0).then(|| nu / osc_sq);
    let within = match ratio {
        Some(r) => r >= c - 1e-9 && r <= 3.0 * c + 1e-9,
        None => nu == 0.0,
    };
    OscReport {
        nu,
        osc_sq,
        ratio,
        c,
        within,
    }
}

/// `log 3 / log(2 / alpha)`.
pub fn hausdorff_dimension(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(3f64.ln() / (2.0 / alpha).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub word: Word,
    pub nu: f64,
    pub mu: f64,
    pub ratio_nu_over_mu: f64,
    pub osc: f64,
}

/// One row per cell of level `n`, in lexicographic order.
pub fn measure_table(cm: &CellMeasure<'_>, bm: &BernoulliMeasure, n: usize) -> Vec<MeasureRow> {
    words_of_length(n)
        .into_iter()
        .map(|word| {
            let nu = cm.nu(&word);
            let mu = bm.mu(&word);
            let osc = cm.osc(&word);
            MeasureRow {
                word,
                nu,
                mu,
                ratio_nu_over_mu: nu / mu,
                osc,
            }
        })
        .collect()
}

pub fn write_measure_csv<W: Write>(rows: &[MeasureRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
