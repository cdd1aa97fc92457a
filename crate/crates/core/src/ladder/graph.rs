use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::word::{VertexId, Word, LETTERS};
use crate::error::{Error, Result};

/// Default bound on the graph level.
pub const MAX_LEVEL: usize = 8;

/// Label of an edge of `G_n`.
///
/// `Outer` is the side `G_w(p_i) - G_w(p_j)` of the triangle of cell `w`
/// (an inductor in the ladder); `Radial` joins `G_w(p_i)` to `G_w(p_ii)`
/// (a capacitor).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeLabel {
    Outer { word: Word, i: u8, j: u8 },
    Radial { word: Word, i: u8 },
}

impl EdgeLabel {
    pub fn word(&self) -> &Word {
        match self {
            EdgeLabel::Outer { word, .. } | EdgeLabel::Radial { word, .. } => word,
        }
    }

    /// The `(i, j)` pair with `i <= j`; radial edges have `i == j`.
    pub fn pair(&self) -> (u8, u8) {
        match self {
            EdgeLabel::Outer { i, j, .. } => (*i, *j),
            EdgeLabel::Radial { i, .. } => (*i, *i),
        }
    }

    pub fn endpoints(&self) -> (VertexId, VertexId) {
        match self {
            EdgeLabel::Outer { word, i, j } => (vertex(word, *i), vertex(word, *j)),
            EdgeLabel::Radial { word, i } => (vertex(word, *i), vertex(&word.child(*i), *i)),
        }
    }
}

fn vertex(word: &Word, corner: u8) -> VertexId {
    VertexId::new(word.clone(), corner).expect("corner letters are valid")
}

#[derive(Debug, Clone)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    pub label: EdgeLabel,
}

/// The approximating graph `G_n` with canonical vertex addresses.
///
/// Vertices `0, 1, 2` are the level-0 corners `p1, p2, p3`.
#[derive(Debug, Clone)]
pub struct LadderGraph {
    level: usize,
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    edges: Vec<GraphEdge>,
}

impl LadderGraph {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn boundary(&self) -> [usize; 3] {
        [0, 1, 2]
    }

    fn intern(&mut self, v: VertexId) -> usize {
        if let Some(&k) = self.index.get(&v) {
            return k;
        }
        let k = self.vertices.len();
        self.index.insert(v.clone(), k);
        self.vertices.push(v);
        k
    }

    fn push(&mut self, label: EdgeLabel) {
        let (a, b) = label.endpoints();
        let u = self.intern(a);
        let v = self.intern(b);
        self.edges.push(GraphEdge { u, v, label });
    }

    /// `E_n = outer(w) u radial(w) (n >= 1) u G_1(E_{n-1}) u G_2(..) u G_3(..)`.
    fn emit(&mut self, word: &Word, remaining: usize) {
        for i in 1..=3u8 {
            for j in (i + 1)..=3 {
                self.push(EdgeLabel::Outer {
                    word: word.clone(),
                    i,
                    j,
                });
            }
        }
        if remaining == 0 {
            return;
        }
        for i in LETTERS {
            self.push(EdgeLabel::Radial {
                word: word.clone(),
                i,
            });
        }
        for l in LETTERS {
            self.emit(&word.child(l), remaining - 1);
        }
    }
}

/// Builds `G_n` for `n <= max_level`.
pub fn build_graph(n: usize, max_level: usize) -> Result<LadderGraph> {
    if n > max_level {
        return Err(Error::LevelTooDeep {
            level: n,
            max: max_level,
        });
    }
    let mut g = LadderGraph {
        level: n,
        vertices: Vec::new(),
        index: HashMap::new(),
        edges: Vec::new(),
    };
    for c in LETTERS {
        g.intern(VertexId::top(c));
    }
    g.emit(&Word::empty(), n);
    Ok(g)
}
