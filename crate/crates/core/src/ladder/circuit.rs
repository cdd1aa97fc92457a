use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::graph::{EdgeLabel, LadderGraph};
use crate::error::{Error, Result};
use crate::network::{impedance_of, is_finite, ComponentKind, Edge, Network};

/// Angular frequency and component values of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcParams {
    /// Angular frequency in rad/s.
    pub omega: f64,
    /// Inductance of every triangle edge, henries.
    pub inductance: f64,
    /// Capacitance of every radial edge, farads.
    pub capacitance: f64,
}

impl LcParams {
    pub fn new(omega: f64, inductance: f64, capacitance: f64) -> Result<Self> {
        for (name, x) in [("omega", omega), ("L", inductance), ("C", capacitance)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {x}"
                )));
            }
        }
        Ok(Self {
            omega,
            inductance,
            capacitance,
        })
    }

    /// Parameters with `2 w^2 L C = t`.
    pub fn from_t(t: f64, inductance: f64, capacitance: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("t must be positive, got {t}")));
        }
        Self::new(
            (t / (2.0 * inductance * capacitance)).sqrt(),
            inductance,
            capacitance,
        )
    }

    /// The dimensionless band variable `t = 2 w^2 L C`.
    pub fn t(&self) -> f64 {
        2.0 * self.omega * self.omega * self.inductance * self.capacitance
    }

    pub fn z_l(&self) -> Complex64 {
        Complex64::new(0.0, self.omega * self.inductance)
    }

    pub fn z_c(&self) -> Complex64 {
        Complex64::new(0.0, -1.0 / (self.omega * self.capacitance))
    }

    pub(crate) fn inductor(&self) -> ComponentKind {
        ComponentKind::Inductor {
            henries: self.inductance,
        }
    }

    pub(crate) fn capacitor(&self) -> ComponentKind {
        ComponentKind::Capacitor {
            farads: self.capacitance,
        }
    }
}

/// Which impedances a ladder graph carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LadderVariant {
    /// Every ladder impedance in series with a resistance `epsilon`
    /// (the raw restriction of the ladder when `epsilon = 0`).
    Truncated { epsilon: f64 },
    /// Deepest triangles replaced by `z_inner`, everything else lossless.
    Renormalized { z_inner: Complex64 },
    /// Deepest triangles replaced by `z_deep`, everything else in series with
    /// `epsilon`. With `z_deep` the regularized effective impedance this is
    /// the infinite regularized ladder traced down to level `n`.
    Regularized { epsilon: f64, z_deep: Complex64 },
}

impl LadderVariant {
    fn validate(&self) -> Result<()> {
        let eps_ok = |e: f64| e >= 0.0 && e.is_finite();
        let z_ok = |z: Complex64| is_finite(z) && z != Complex64::new(0.0, 0.0);
        match *self {
            LadderVariant::Truncated { epsilon } if !eps_ok(epsilon) => Err(Error::invalid(
                format!("epsilon must be >= 0, got {epsilon}"),
            )),
            LadderVariant::Renormalized { z_inner } if !z_ok(z_inner) => Err(Error::invalid(
                format!("inner impedance must be nonzero, got {z_inner}"),
            )),
            LadderVariant::Regularized { epsilon, z_deep } if !eps_ok(epsilon) || !z_ok(z_deep) => {
                Err(Error::invalid(format!(
                    "bad regularized variant ({epsilon}, {z_deep})"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Builds the ladder network on `graph`; the boundary is the three level-0
/// corners.
pub fn assign_impedances(
    graph: &LadderGraph,
    variant: LadderVariant,
    params: &LcParams,
) -> Result<Network> {
    variant.validate()?;
    let depth = graph.level();
    let component = |label: &EdgeLabel, epsilon: f64| -> Result<Complex64> {
        let base = match label {
            EdgeLabel::Outer { .. } => params.inductor(),
            EdgeLabel::Radial { .. } => params.capacitor(),
        };
        let kind = if epsilon > 0.0 {
            ComponentKind::Series(vec![base, ComponentKind::Resistor { ohms: epsilon }])
        } else {
            base
        };
        impedance_of(&kind, params.omega)
    };
    let edges = graph
        .edges()
        .iter()
        .map(|e| {
            let deepest =
                matches!(e.label, EdgeLabel::Outer { .. }) && e.label.word().len() == depth;
            let z = match variant {
                LadderVariant::Truncated { epsilon } => component(&e.label, epsilon)?,
                LadderVariant::Renormalized { z_inner } if deepest => z_inner,
                LadderVariant::Renormalized { .. } => component(&e.label, 0.0)?,
                LadderVariant::Regularized { z_deep, .. } if deepest => z_deep,
                LadderVariant::Regularized { epsilon, .. } => component(&e.label, epsilon)?,
            };
            Ok(Edge { u: e.u, v: e.v, z })
        })
        .collect::<Result<Vec<_>>>()?;
    Network::new(graph.vertices().len(), graph.boundary().to_vec(), edges)
}

/// Level-1 network with explicit outer, radial and inner-triangle impedances.
pub(crate) fn level_one_network(
    graph: &LadderGraph,
    outer: Complex64,
    radial: Complex64,
    inner: Complex64,
) -> Result<Network> {
    debug_assert_eq!(graph.level(), 1);
    let edges = graph
        .edges()
        .iter()
        .map(|e| {
            let z = match &e.label {
                EdgeLabel::Radial { .. } => radial,
                EdgeLabel::Outer { word, .. } if word.is_empty() => outer,
                EdgeLabel::Outer { .. } => inner,
            };
            Edge { u: e.u, v: e.v, z }
        })
        .collect();
    Network::new(graph.vertices().len(), graph.boundary().to_vec(), edges)
}

/// Band of `t = 2 w^2 L C` on which the ladder dissipates: the open interval
/// between the roots of `t^2 - 72 t + 81`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterBand {
    pub lower: f64,
    pub upper: f64,
}

impl Default for FilterBand {
    fn default() -> Self {
        let s = 15f64.sqrt();
        Self {
            lower: 9.0 * (4.0 - s),
            upper: 9.0 * (4.0 + s),
        }
    }
}

impl FilterBand {
    /// Strict membership.
    pub fn contains(&self, t: f64) -> bool {
        self.lower < t && t < self.upper
    }

    /// Distance to the nearest band edge, positive inside the band.
    pub fn margin(&self, t: f64) -> f64 {
        (t - self.lower).min(self.upper - t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterStatus {
    pub t: f64,
    pub in_band: bool,
    pub margin: f64,
}

pub fn filter_condition(params: &LcParams) -> FilterStatus {
    let band = FilterBand::default();
    let t = params.t();
    FilterStatus {
        t,
        in_band: band.contains(t),
        margin: band.margin(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::graph::{build_graph, MAX_LEVEL};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params() -> LcParams {
        LcParams::new(2.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn t_shorthand() {
        let p = LcParams::from_t(8.0, 1.0, 1.0).unwrap();
        assert!((p.omega - 2.0).abs() < 1e-15);
        assert!((p.t() - 8.0).abs() < 1e-14);
        assert!(LcParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn truncated_raw_ladder_level_one() {
        let g = build_graph(1, MAX_LEVEL).unwrap();
        let net =
            assign_impedances(&g, LadderVariant::Truncated { epsilon: 0.0 }, &params()).unwrap();
        for (e, ge) in net.edges().iter().zip(g.edges()) {
            let expected = match ge.label {
                EdgeLabel::Outer { .. } => c(0.0, 2.0),
                EdgeLabel::Radial { .. } => c(0.0, -0.5),
            };
            assert_eq!(e.z, expected);
        }
    }

    #[test]
    fn truncated_shifts_every_edge() {
        let g = build_graph(1, MAX_LEVEL).unwrap();
        let raw =
            assign_impedances(&g, LadderVariant::Truncated { epsilon: 0.0 }, &params()).unwrap();
        let eps =
            assign_impedances(&g, LadderVariant::Truncated { epsilon: 0.01 }, &params()).unwrap();
        for (a, b) in raw.edges().iter().zip(eps.edges()) {
            assert!((b.z - a.z - c(0.01, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn renormalized_level_one() {
        let g = build_graph(1, MAX_LEVEL).unwrap();
        let z = c(1.0, 0.85);
        let net =
            assign_impedances(&g, LadderVariant::Renormalized { z_inner: z }, &params()).unwrap();
        let count = |target: Complex64| net.edges().iter().filter(|e| e.z == target).count();
        assert_eq!(count(z), 9);
        assert_eq!(count(c(0.0, 2.0)), 3);
        assert_eq!(count(c(0.0, -0.5)), 3);
        assert_eq!(net.boundary(), &[0, 1, 2]);
    }

    #[test]
    fn nesting_keeps_impedance_classes() {
        let g2 = build_graph(2, MAX_LEVEL).unwrap();
        let g3 = build_graph(3, MAX_LEVEL).unwrap();
        let v = LadderVariant::Truncated { epsilon: 0.1 };
        let n2 = assign_impedances(&g2, v, &params()).unwrap();
        let n3 = assign_impedances(&g3, v, &params()).unwrap();
        let by_label: std::collections::HashMap<_, _> = g3
            .edges()
            .iter()
            .zip(n3.edges())
            .map(|(ge, e)| (ge.label.clone(), e.z))
            .collect();
        for (ge, e) in g2.edges().iter().zip(n2.edges()) {
            assert_eq!(by_label[&ge.label], e.z);
        }
    }

    #[test]
    fn invalid_variants() {
        let g = build_graph(1, MAX_LEVEL).unwrap();
        assert!(
            assign_impedances(&g, LadderVariant::Truncated { epsilon: -1.0 }, &params()).is_err()
        );
        assert!(assign_impedances(
            &g,
            LadderVariant::Renormalized {
                z_inner: c(0.0, 0.0)
            },
            &params()
        )
        .is_err());
    }

    #[test]
    fn filter_band_identities() {
        let b = FilterBand::default();
        assert!(0.0 < b.lower && b.lower < b.upper);
        assert!((b.lower * b.upper - 81.0).abs() < 1e-12);
        assert!((b.lower + b.upper - 72.0).abs() < 1e-12);
        assert!((b.lower - 1.1431498841).abs() < 1e-9);
        assert!((b.upper - 70.8568501159).abs() < 1e-9);
    }

    #[test]
    fn filter_condition_examples() {
        assert!(filter_condition(&params()).in_band);
        assert!(!filter_condition(&LcParams::new(0.7, 1.0, 1.0).unwrap()).in_band);
        let b = FilterBand::default();
        assert!(!b.contains(b.lower));
        assert!(!b.contains(b.upper));
        let s = filter_condition(&params());
        assert!((s.margin - (8.0 - b.lower)).abs() < 1e-12);
    }
}
