//! Planar realization of the ladder: the maps `G_i = F_i o G_0`, node
//! coordinates, edge segments and the length system.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{build_graph, EdgeLabel, VertexId, Word, LETTERS, MAX_LEVEL};

pub type Point = [f64; 2];

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

pub fn distance(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Contraction parameter and the unit triangle centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfsParams {
    pub alpha: f64,
    pub p: [Point; 3],
    pub p0: Point,
}

impl IfsParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        let s3 = 3f64.sqrt();
        Ok(Self {
            alpha,
            p: [[0.0, 1.0 / s3], [-0.5, -0.5 / s3], [0.5, -0.5 / s3]],
            p0: [0.0, 0.0],
        })
    }

    /// `p_i` for `i` in `1..=3`.
    pub fn corner(&self, i: u8) -> Point {
        self.p[(i - 1) as usize]
    }

    /// `G_0(x) = alpha (x - p0) + p0`.
    pub fn apply_g0(&self, x: Point) -> Point {
        add(scale(sub(x, self.p0), self.alpha), self.p0)
    }

    /// `F_i(x) = (x - G_0(p_i)) / 2 + G_0(p_i)`.
    pub fn apply_f(&self, i: u8, x: Point) -> Point {
        let c = self.apply_g0(self.corner(i));
        add(scale(sub(x, c), 0.5), c)
    }

    pub fn apply_g(&self, i: u8, x: Point) -> Point {
        self.apply_f(i, self.apply_g0(x))
    }

    /// `G_{w1} o ... o G_{wm} (x)`.
    pub fn apply_word(&self, w: &Word, x: Point) -> Point {
        w.letters()
            .iter()
            .rev()
            .fold(x, |acc, &l| self.apply_g(l, acc))
    }

    pub fn vertex_coordinates(&self, v: &VertexId) -> Point {
        self.apply_word(v.word(), self.corner(v.corner()))
    }

    /// `G_prefix(p0)` and a bound on its distance to the Cantor point coded
    /// by any infinite extension of `prefix`.
    pub fn cantor_point(&self, prefix: &Word) -> (Point, f64) {
        // Everything lies in the unit triangle, whose diameter is 1.
        (
            self.apply_word(prefix, self.p0),
            (self.alpha / 2.0).powi(prefix.len() as i32),
        )
    }
}

impl Default for IfsParams {
    fn default() -> Self {
        Self::new(0.5).expect("default alpha is valid")
    }
}

/// The segment `e^w_{ij}`; `i == j` marks the radial segment at `p_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub word: Word,
    pub i: u8,
    pub j: u8,
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn length(&self) -> f64 {
        distance(self.a, self.b)
    }
}

/// All segments of level `n` in graph order.
pub fn edge_segments(n: usize, params: &IfsParams) -> Result<Vec<Segment>> {
    let graph = build_graph(n, MAX_LEVEL)?;
    Ok(graph
        .edges()
        .iter()
        .map(|e| {
            let (u, v) = e.label.endpoints();
            let (i, j) = e.label.pair();
            Segment {
                word: e.label.word().clone(),
                i,
                j,
                a: params.vertex_coordinates(&u),
                b: params.vertex_coordinates(&v),
            }
        })
        .collect())
}

/// Whether the closed segments `s` and `t` share a point other than a common
/// endpoint.
fn interiors_meet(s: &Segment, t: &Segment, tol: f64) -> bool {
    let shared = |p: Point| distance(p, t.a) < tol || distance(p, t.b) < tol;
    let r = sub(s.b, s.a);
    let q = sub(t.b, t.a);
    let denom = cross(r, q);
    let qp = sub(t.a, s.a);
    if denom.abs() < tol * r[0].hypot(r[1]) * q[0].hypot(q[1]) {
        if cross(qp, r).abs() > tol * r[0].hypot(r[1]) {
            return false;
        }
        // Collinear: compare projections on r.
        let rr = r[0] * r[0] + r[1] * r[1];
        let t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr;
        let t1 = t0 + (q[0] * r[0] + q[1] * r[1]) / rr;
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        return hi.min(1.0) - lo.max(0.0) > tol;
    }
    let u = cross(qp, q) / denom;
    let v = cross(qp, r) / denom;
    if u < -tol || u > 1.0 + tol || v < -tol || v > 1.0 + tol {
        return false;
    }
    let hit = add(s.a, scale(r, u));
    !(shared(hit) && (distance(hit, s.a) < tol || distance(hit, s.b) < tol))
}

/// First pair of segments whose interiors meet, if any.
pub fn first_crossing(segments: &[Segment]) -> Option<(usize, usize)> {
    for x in 0..segments.len() {
        for y in (x + 1)..segments.len() {
            if interiors_meet(&segments[x], &segments[y], 1e-12) {
                return Some((x, y));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSystem {
    pub n: usize,
    pub lengths: Vec<(Segment, f64)>,
    pub total: f64,
    /// `3 sum_{k<=n} (3a/2)^k + sqrt(3) (1 - a) sum_{k<n} (3a/2)^k`.
    pub closed_form: f64,
    /// Growth ratio `3 alpha / 2` of the level contributions.
    pub ratio: f64,
    /// Whether the partial sums stay bounded as `n` grows.
    pub bounded: bool,
}

pub fn length_system(n: usize, params: &IfsParams) -> Result<LengthSystem> {
    let lengths: Vec<(Segment, f64)> = edge_segments(n, params)?
        .into_iter()
        .map(|s| {
            let l = s.length();
            (s, l)
        })
        .collect();
    let total = lengths.iter().map(|p| p.1).sum();
    let a = params.alpha;
    let ratio = 1.5 * a;
    let geo = |m: usize| (0..m).map(|k| ratio.powi(k as i32)).sum::<f64>();
    let closed_form = 3.0 * geo(n + 1) + 3f64.sqrt() * (1.0 - a) * geo(n);
    Ok(LengthSystem {
        n,
        lengths,
        total,
        closed_form,
        ratio,
        bounded: ratio < 1.0,
    })
}

/// A point given by its address rather than by coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SymbolicPoint {
    Vertex(VertexId),
    /// The point at parameter `s` in `[0, 1]` along the segment `label`.
    OnSegment {
        label: EdgeLabel,
        s: f64,
    },
    /// Plain coordinates; carries no address.
    Raw(Point),
}

pub fn locate(x: &SymbolicPoint, params: &IfsParams) -> Result<Point> {
    match x {
        SymbolicPoint::Vertex(v) => Ok(params.vertex_coordinates(v)),
        SymbolicPoint::OnSegment { label, s } => {
            if !(0.0..=1.0).contains(s) {
                return Err(Error::invalid(format!(
                    "segment parameter {s} outside [0, 1]"
                )));
            }
            let (u, v) = label.endpoints();
            let (a, b) = (params.vertex_coordinates(&u), params.vertex_coordinates(&v));
            Ok(add(a, scale(sub(b, a), *s)))
        }
        SymbolicPoint::Raw(_) => Err(Error::invalid(
            "raw coordinates have no address to transcode",
        )),
    }
}

/// The point with the same address in the geometry of `alpha2`.
pub fn transcode(x: &SymbolicPoint, alpha1: f64, alpha2: f64) -> Result<Point> {
    locate(x, &IfsParams::new(alpha1)?)?;
    locate(x, &IfsParams::new(alpha2)?)
}

/// Box-counting slope of the level-`level` cell centres, fitted over box
/// sizes `(alpha/2)^k` for `k` in `k_min..=k_max`.
pub fn box_counting_dimension(
    params: &IfsParams,
    level: usize,
    k_min: usize,
    k_max: usize,
) -> Result<f64> {
    if level > MAX_LEVEL || k_min >= k_max || k_max > level {
        return Err(Error::invalid(format!(
            "bad box-counting range {k_min}..={k_max} at level {level}"
        )));
    }
    let mut centres = vec![params.p0];
    for _ in 0..level {
        centres = centres
            .iter()
            .flat_map(|&c| LETTERS.map(|l| params.apply_g(l, c)))
            .collect();
    }
    let r = params.alpha / 2.0;
    let pts: Vec<(f64, f64)> = (k_min..=k_max)
        .map(|k| {
            let eps = r.powi(k as i32);
            let boxes: HashSet<(i64, i64)> = centres
                .iter()
                .map(|c| ((c[0] / eps).floor() as i64, (c[1] / eps).floor() as i64))
                .collect();
            (-(eps.ln()), (boxes.len() as f64).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Label {
    word: Word,
    i: u8,
    j: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SegmentRecord {
    label: Label,
    a: Point,
    b: Point,
    len: f64,
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    word: &'a Word,
    i: u8,
    j: u8,
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
    length: f64,
}

pub fn write_geometry_csv<W: Write>(segments: &[Segment], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in segments {
        w.serialize(CsvRow {
            word: &s.word,
            i: s.i,
            j: s.j,
            x1: s.a[0],
            y1: s.a[1],
            x2: s.b[0],
            y2: s.b[1],
            length: s.length(),
        })?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_geometry_json<W: Write>(segments: &[Segment], out: W) -> Result<()> {
    let records: Vec<SegmentRecord> = segments
        .iter()
        .map(|s| SegmentRecord {
            label: Label {
                word: s.word.clone(),
                i: s.i,
                j: s.j,
            },
            a: s.a,
            b: s.b,
            len: s.length(),
        })
        .collect();
    serde_json::to_writer_pretty(out, &records)?;
    Ok(())
}

pub fn read_geometry_json<R: Read>(input: R) -> Result<Vec<Segment>> {
    let records: Vec<SegmentRecord> = serde_json::from_reader(input)?;
    Ok(records
        .into_iter()
        .map(|r| Segment {
            word: r.label.word,
            i: r.label.i,
            j: r.label.j,
            a: r.a,
            b: r.b,
        })
        .collect())
}
