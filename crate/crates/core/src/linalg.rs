//! Dense complex LU helpers shared by the network solvers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Pivot ratios below this are treated as a singular factorization.
pub const MIN_PIVOT_RATIO: f64 = 1e-13;

pub(crate) struct Factored {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factored {
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.lu.solve(rhs).ok_or(Error::Singular { rcond: 0.0 })
    }
}

/// LU with partial pivoting; rejects factorizations whose pivot ratio is below
/// [`MIN_PIVOT_RATIO`].
pub(crate) fn factor(m: CMatrix) -> Result<Factored> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let lu = m.lu();
    if n > 0 {
        let u = lu.u();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for k in 0..n {
            let p = u[(k, k)].norm();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let rcond = if hi > 0.0 { lo / hi } else { 0.0 };
        if !(rcond > MIN_PIVOT_RATIO) {
            return Err(Error::Singular { rcond });
        }
    }
    Ok(Factored { lu })
}

pub(crate) fn submatrix(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}
