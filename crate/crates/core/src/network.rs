//! Complex-impedance networks: Kirchhoff solving, boundary reduction and the
//! power-dissipation quadratic forms.
//!
//! A [`Network`] is a simple connected graph whose edges carry nonzero complex
//! impedances, together with an ordered list of boundary nodes. Potentials are
//! complex phasors; the dissipation of an edge `{x, y}` with impedance `z` is
//! `Re(z) / (2|z|^2) * |v(x) - v(y)|^2`.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{factor, submatrix};

pub use crate::linalg::CMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerances used by the identity and symmetry checks of this crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance for algebraic identities.
    pub identity: f64,
    /// Relative tolerance for detecting an S3-symmetric boundary response.
    pub symmetry: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-9,
            symmetry: 1e-6,
        }
    }
}

/// A two-terminal passive component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ComponentKind {
    Inductor { henries: f64 },
    Capacitor { farads: f64 },
    Resistor { ohms: f64 },
    Fixed { z: Complex64 },
    Series(Vec<ComponentKind>),
}

impl ComponentKind {
    fn validate(&self) -> Result<()> {
        match self {
            ComponentKind::Inductor { henries } if !(*henries > 0.0 && henries.is_finite()) => Err(
                Error::invalid(format!("inductance must be positive, got {henries}")),
            ),
            ComponentKind::Capacitor { farads } if !(*farads > 0.0 && farads.is_finite()) => Err(
                Error::invalid(format!("capacitance must be positive, got {farads}")),
            ),
            ComponentKind::Resistor { ohms } if !(*ohms >= 0.0 && ohms.is_finite()) => Err(
                Error::invalid(format!("resistance must be nonnegative, got {ohms}")),
            ),
            ComponentKind::Fixed { z } if !is_finite(*z) => {
                Err(Error::invalid(format!("impedance must be finite, got {z}")))
            }
            ComponentKind::Series(parts) if parts.is_empty() => {
                Err(Error::invalid("series component without parts"))
            }
            ComponentKind::Series(parts) => parts.iter().try_for_each(|p| p.validate()),
            _ => Ok(()),
        }
    }
}

pub(crate) fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Impedance of `kind` at angular frequency `omega` (rad/s).
pub fn impedance_of(kind: &ComponentKind, omega: f64) -> Result<Complex64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid(format!(
            "angular frequency must be positive, got {omega}"
        )));
    }
    kind.validate()?;
    Ok(impedance_unchecked(kind, omega))
}

fn impedance_unchecked(kind: &ComponentKind, omega: f64) -> Complex64 {
    match kind {
        ComponentKind::Inductor { henries } => Complex64::new(0.0, omega * henries),
        ComponentKind::Capacitor { farads } => Complex64::new(0.0, -1.0 / (omega * farads)),
        ComponentKind::Resistor { ohms } => Complex64::new(*ohms, 0.0),
        ComponentKind::Fixed { z } => *z,
        ComponentKind::Series(parts) => parts.iter().map(|p| impedance_unchecked(p, omega)).sum(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub z: Complex64,
}

/// Node-indexed graph with complex edge impedances and a marked boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    node_count: usize,
    boundary: Vec<usize>,
    edges: Vec<Edge>,
}

impl Network {
    /// Validates and builds a network: no self-loops, no multiple edges,
    /// nonzero finite impedances, connected, non-empty duplicate-free boundary.
    pub fn new(node_count: usize, boundary: Vec<usize>, edges: Vec<Edge>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::invalid("network without nodes"));
        }
        if boundary.is_empty() {
            return Err(Error::invalid("boundary must be non-empty"));
        }
        let mut seen = HashSet::new();
        for &b in &boundary {
            if b >= node_count {
                return Err(Error::invalid(format!("boundary node {b} out of range")));
            }
            if !seen.insert(b) {
                return Err(Error::invalid(format!("duplicate boundary node {b}")));
            }
        }
        let mut pairs = HashSet::new();
        for (k, e) in edges.iter().enumerate() {
            if e.u >= node_count || e.v >= node_count {
                return Err(Error::invalid(format!(
                    "edge {k} references a missing node"
                )));
            }
            if e.u == e.v {
                return Err(Error::invalid(format!("edge {k} is a self-loop")));
            }
            if !is_finite(e.z) || e.z == ZERO {
                return Err(Error::invalid(format!("edge {k} has impedance {}", e.z)));
            }
            if !pairs.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::invalid(format!(
                    "edge {k} duplicates an existing edge"
                )));
            }
        }
        let net = Self {
            node_count,
            boundary,
            edges,
        };
        if !net.is_connected() {
            return Err(Error::invalid("network is not connected"));
        }
        Ok(net)
    }

    fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut visited = vec![false; self.node_count];
        let mut stack = vec![0];
        visited[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !visited[y] {
                    visited[y] = true;
                    stack.push(y);
                }
            }
        }
        visited.into_iter().all(|v| v)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Non-boundary nodes in increasing order.
    pub fn interior(&self) -> Vec<usize> {
        let b: HashSet<_> = self.boundary.iter().copied().collect();
        (0..self.node_count).filter(|x| !b.contains(x)).collect()
    }
}

/// Complex node potentials of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential(pub Vec<Complex64>);

impl Potential {
    pub fn constant(node_count: usize, value: Complex64) -> Self {
        Self(vec![value; node_count])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for Potential {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Average power dissipated by a single edge.
pub fn edge_power(vx: Complex64, vy: Complex64, z: Complex64) -> Result<f64> {
    if z == ZERO {
        return Err(Error::invalid("edge impedance is zero"));
    }
    Ok(edge_power_unchecked(vx, vy, z))
}

#[inline]
fn edge_power_unchecked(vx: Complex64, vy: Complex64, z: Complex64) -> f64 {
    0.5 * z.re / z.norm_sqr() * (vx - vy).norm_sqr()
}

/// Total dissipation `sum over edges of edge_power`.
pub fn network_power(net: &Network, v: &Potential) -> Result<f64> {
    check_len(net.node_count, v.len())?;
    Ok(net
        .edges
        .iter()
        .map(|e| edge_power_unchecked(v[e.u], v[e.v], e.z))
        .sum())
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn laplacian_with(net: &Network, weight: impl Fn(Complex64) -> Complex64) -> CMatrix {
    let n = net.node_count;
    let mut l = CMatrix::from_element(n, n, ZERO);
    for e in &net.edges {
        let y = weight(e.z);
        l[(e.u, e.u)] += y;
        l[(e.v, e.v)] += y;
        l[(e.u, e.v)] -= y;
        l[(e.v, e.u)] -= y;
    }
    l
}

/// Admittance Laplacian: `L[u][u] = sum 1/z`, `L[u][v] = -1/z_uv`.
pub fn admittance_laplacian(net: &Network) -> CMatrix {
    laplacian_with(net, |z| z.inv())
}

/// Harmonic extension of `boundary` through `lap`: solves the interior block.
fn extend(net: &Network, lap: &CMatrix, boundary_values: &[Complex64]) -> Result<Potential> {
    check_len(net.boundary.len(), boundary_values.len())?;
    let interior = net.interior();
    let mut v = vec![ZERO; net.node_count];
    for (&b, &u) in net.boundary.iter().zip(boundary_values) {
        v[b] = u;
    }
    if !interior.is_empty() {
        let lii = submatrix(lap, &interior, &interior);
        let lib = submatrix(lap, &interior, &net.boundary);
        let ub = CMatrix::from_column_slice(boundary_values.len(), 1, boundary_values);
        let rhs = -(lib * ub);
        let x = factor(lii)?.solve(&rhs)?;
        for (k, &i) in interior.iter().enumerate() {
            v[i] = x[(k, 0)];
        }
    }
    Ok(Potential(v))
}

/// Kirchhoff equilibrium: current balance at every interior node with the
/// boundary held at `boundary_values`.
pub fn kirchhoff_solve(net: &Network, boundary_values: &[Complex64]) -> Result<Potential> {
    extend(net, &admittance_laplacian(net), boundary_values)
}

/// Largest Kirchhoff current imbalance over interior nodes.
pub fn kirchhoff_residual(net: &Network, v: &Potential) -> Result<f64> {
    check_len(net.node_count, v.len())?;
    let mut current = vec![ZERO; net.node_count];
    for e in &net.edges {
        let i = (v[e.u] - v[e.v]) / e.z;
        current[e.u] += i;
        current[e.v] -= i;
    }
    Ok(net
        .interior()
        .into_iter()
        .map(|x| current[x].norm())
        .fold(0.0, f64::max))
}

/// Boundary reduction `L_bb - L_bi L_ii^{-1} L_ib` in the order of
/// `net.boundary()`.
pub fn schur_trace(net: &Network) -> Result<CMatrix> {
    let lap = admittance_laplacian(net);
    let interior = net.interior();
    let lbb = submatrix(&lap, &net.boundary, &net.boundary);
    if interior.is_empty() {
        return Ok(lbb);
    }
    let lii = submatrix(&lap, &interior, &interior);
    let lib = submatrix(&lap, &interior, &net.boundary);
    let x = factor(lii)?.solve(&lib)?;
    Ok(lbb - lib.transpose() * x)
}

/// Common edge impedance of the triangle whose Laplacian is `schur`.
///
/// All six off-diagonal entries must agree within `tol` (relative); a larger
/// spread means the traced network is not S3-symmetric.
pub fn equivalent_triangle(schur: &CMatrix, tol: f64) -> Result<Complex64> {
    if schur.nrows() != 3 || schur.ncols() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: schur.nrows(),
        });
    }
    let off: Vec<Complex64> = (0..3)
        .flat_map(|r| (0..3).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| schur[(r, c)])
        .collect();
    let mean = off.iter().sum::<Complex64>() / off.len() as f64;
    if mean == ZERO || !is_finite(mean) {
        return Err(Error::Numerical(format!(
            "degenerate boundary response {mean}"
        )));
    }
    let spread = off.iter().map(|o| (o - mean).norm()).fold(0.0, f64::max) / mean.norm();
    if spread > tol {
        return Err(Error::Asymmetric { spread, tol });
    }
    Ok(-mean.inv())
}

/// Minimizer of `network_power` subject to the boundary data.
///
/// The dissipation form is the real Laplacian form with conductances
/// `Re(z)/|z|^2`; real and imaginary parts decouple, so a single complex solve
/// against the real-weighted Laplacian gives the minimizer.
pub fn min_dissipation_extension(
    net: &Network,
    boundary_values: &[Complex64],
) -> Result<(Potential, f64)> {
    if let Some((edge, e)) = net.edges.iter().enumerate().find(|(_, e)| !(e.z.re > 0.0)) {
        return Err(Error::NotCoercive { edge, re: e.z.re });
    }
    let lap = laplacian_with(net, |z| Complex64::new(z.re / z.norm_sqr(), 0.0));
    let v = extend(net, &lap, boundary_values)?;
    let p = network_power(net, &v)?;
    Ok((v, p))
}

/// `u^H M u` with conjugation on the left.
pub fn hermitian_form(m: &CMatrix, u: &[Complex64]) -> Complex64 {
    let mut acc = ZERO;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            acc += u[r].conj() * m[(r, c)] * u[c];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn edge(u: usize, v: usize, z: Complex64) -> Edge {
        Edge { u, v, z }
    }

    fn triangle(z: Complex64) -> Network {
        Network::new(
            3,
            vec![0, 1, 2],
            vec![edge(0, 1, z), edge(0, 2, z), edge(1, 2, z)],
        )
        .unwrap()
    }

    #[test]
    fn component_impedances() {
        let w = 2.0;
        assert_eq!(
            impedance_of(&ComponentKind::Inductor { henries: 1.0 }, w).unwrap(),
            c(0.0, 2.0)
        );
        assert_eq!(
            impedance_of(&ComponentKind::Capacitor { farads: 1.0 }, w).unwrap(),
            c(0.0, -0.5)
        );
        let series = ComponentKind::Series(vec![
            ComponentKind::Inductor { henries: 1.0 },
            ComponentKind::Resistor { ohms: 0.01 },
        ]);
        let z = impedance_of(&series, w).unwrap();
        assert!((z - c(0.01, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn component_errors() {
        assert!(impedance_of(&ComponentKind::Resistor { ohms: 1.0 }, 0.0).is_err());
        assert!(impedance_of(&ComponentKind::Resistor { ohms: 1.0 }, -1.0).is_err());
        assert!(impedance_of(&ComponentKind::Capacitor { farads: 0.0 }, 1.0).is_err());
        assert!(impedance_of(&ComponentKind::Series(vec![]), 1.0).is_err());
    }

    #[test]
    fn edge_power_examples() {
        assert_eq!(edge_power(c(1.0, 0.0), ZERO, c(1.0, 0.0)).unwrap(), 0.5);
        assert_eq!(edge_power(c(1.0, 0.0), ZERO, c(0.0, 1.0)).unwrap(), 0.0);
        let p = edge_power(c(2.0, 0.0), ZERO, c(1.0, 1.0)).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(edge_power(ZERO, ZERO, ZERO).is_err());
    }

    #[test]
    fn network_validation() {
        let z = c(1.0, 0.0);
        assert!(Network::new(2, vec![0], vec![edge(0, 0, z)]).is_err());
        assert!(Network::new(2, vec![0], vec![edge(0, 1, z), edge(1, 0, z)]).is_err());
        assert!(Network::new(2, vec![0], vec![edge(0, 1, ZERO)]).is_err());
        assert!(Network::new(3, vec![0], vec![edge(0, 1, z)]).is_err());
        assert!(Network::new(2, vec![], vec![edge(0, 1, z)]).is_err());
        assert!(Network::new(2, vec![0, 0], vec![edge(0, 1, z)]).is_err());
        assert!(Network::new(2, vec![0, 1], vec![edge(0, 1, z)]).is_ok());
    }

    #[test]
    fn network_power_examples() {
        let net = triangle(c(3.0, -1.0));
        let v = Potential::constant(3, c(7.0, 3.0));
        assert_eq!(network_power(&net, &v).unwrap(), 0.0);

        let single = Network::new(2, vec![0, 1], vec![edge(0, 1, c(1.0, 0.0))]).unwrap();
        let p = network_power(&single, &Potential(vec![c(1.0, 0.0), ZERO])).unwrap();
        assert_eq!(p, 0.5);

        // Two unit-difference pairs: 2 * Re(z) / (2|z|^2).
        let z = c(0.7, 0.4);
        let expected = z.re / z.norm_sqr();
        let net = triangle(z);
        let p = network_power(&net, &Potential(vec![c(1.0, 0.0), ZERO, ZERO])).unwrap();
        assert!((p - expected).abs() < 1e-14);
    }

    #[test]
    fn laplacian_examples() {
        let single = Network::new(2, vec![0, 1], vec![edge(0, 1, c(2.0, 0.0))]).unwrap();
        let l = admittance_laplacian(&single);
        assert_eq!(l[(0, 0)], c(0.5, 0.0));
        assert_eq!(l[(0, 1)], c(-0.5, 0.0));
        assert_eq!(l[(1, 0)], c(-0.5, 0.0));

        let z = c(0.3, 2.0);
        let l = admittance_laplacian(&triangle(z));
        for r in 0..3 {
            for col in 0..3 {
                let pattern = if r == col { 2.0 } else { -1.0 };
                assert!((l[(r, col)] - z.inv() * pattern).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn voltage_divider() {
        let (z1, z2) = (c(1.0, 2.0), c(0.5, -3.0));
        let net = Network::new(3, vec![0, 2], vec![edge(0, 1, z1), edge(1, 2, z2)]).unwrap();
        let (vx, vy) = (c(1.0, 0.5), c(-0.25, 2.0));
        let v = kirchhoff_solve(&net, &[vx, vy]).unwrap();
        let expected = (z2 * vx + z1 * vy) / (z1 + z2);
        assert!((v[1] - expected).norm() < 1e-14);
        assert_eq!(v[0], vx);
        assert_eq!(v[2], vy);
    }

    #[test]
    fn constant_boundary_gives_constant_potential() {
        let (z1, z2) = (c(0.0, 2.0), c(0.0, -0.5));
        let net = Network::new(
            4,
            vec![0, 3],
            vec![
                edge(0, 1, z1),
                edge(1, 2, z2),
                edge(2, 3, z1),
                edge(1, 3, z1),
            ],
        )
        .unwrap();
        let k = c(3.0, -1.0);
        let v = kirchhoff_solve(&net, &[k, k]).unwrap();
        assert!(v.values().iter().all(|x| (x - k).norm() < 1e-13));
    }

    #[test]
    fn kirchhoff_dimension_mismatch() {
        let net = triangle(c(1.0, 0.0));
        assert!(matches!(
            kirchhoff_solve(&net, &[ZERO]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn singular_interior_block_is_reported() {
        // L and C in series resonate at w = 1: the interior node has zero admittance.
        let net = Network::new(
            3,
            vec![0, 2],
            vec![edge(0, 1, c(0.0, 1.0)), edge(1, 2, c(0.0, -1.0))],
        )
        .unwrap();
        let err = kirchhoff_solve(&net, &[c(1.0, 0.0), ZERO]).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }), "{err}");
        assert!(schur_trace(&net).is_err());
    }

    #[test]
    fn schur_of_series_pair_is_single_impedance() {
        let (z1, z2) = (c(1.0, 2.0), c(0.5, -3.0));
        let net = Network::new(3, vec![0, 2], vec![edge(0, 1, z1), edge(1, 2, z2)]).unwrap();
        let s = schur_trace(&net).unwrap();
        let y = (z1 + z2).inv();
        assert!((s[(0, 0)] - y).norm() < 1e-14);
        assert!((s[(0, 1)] + y).norm() < 1e-14);
    }

    #[test]
    fn schur_without_interior_is_boundary_block() {
        let net = triangle(c(0.2, 1.0));
        assert_eq!(schur_trace(&net).unwrap(), admittance_laplacian(&net));
    }

    #[test]
    fn equivalent_triangle_inverts_construction() {
        let y = c(0.4, -1.3);
        let s = admittance_laplacian(&triangle(y.inv()));
        let z = equivalent_triangle(&s, 1e-12).unwrap();
        assert!((z - y.inv()).norm() < 1e-14);

        let mut bad = s.clone();
        bad[(0, 1)] *= 1.0 + 1e-3;
        assert!(matches!(
            equivalent_triangle(&bad, 1e-6),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn min_dissipation_matches_kirchhoff_for_resistors() {
        let r = |x: f64| c(x, 0.0);
        let net = Network::new(
            4,
            vec![0, 3],
            vec![
                edge(0, 1, r(1.0)),
                edge(1, 2, r(2.0)),
                edge(2, 3, r(0.5)),
                edge(0, 2, r(3.0)),
            ],
        )
        .unwrap();
        let u = [c(1.0, 0.25), c(-0.5, 1.0)];
        let (v_min, p_min) = min_dissipation_extension(&net, &u).unwrap();
        let v_k = kirchhoff_solve(&net, &u).unwrap();
        for (a, b) in v_min.values().iter().zip(v_k.values()) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!((p_min - network_power(&net, &v_k).unwrap()).abs() < 1e-12);

        let k = c(2.0, 2.0);
        let (_, p0) = min_dissipation_extension(&net, &[k, k]).unwrap();
        assert!(p0.abs() < 1e-24);
    }

    #[test]
    fn min_dissipation_rejects_lossless_edges() {
        let net = triangle(c(0.0, 1.0));
        assert!(matches!(
            min_dissipation_extension(&net, &[ZERO, ZERO, ZERO]),
            Err(Error::NotCoercive { edge: 0, .. })
        ));
    }
}
