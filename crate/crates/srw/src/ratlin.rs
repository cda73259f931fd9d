//! Small dense exact linear algebra over rationals: rank, kernel bases,
//! determinants, and solves. Everything here is O(n^3) Gaussian elimination
//! on matrices of desk-scale size.

use num::{BigRational, One, Signed, Zero};

/// Dense row-major rational matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn row(&self, r: usize) -> &[BigRational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Reduces to row echelon form in place; returns the rank.
    pub fn row_reduce(&mut self) -> usize {
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(pr) = (pivot_row..self.rows).find(|&r| !self[(r, col)].is_zero()) else {
                continue;
            };
            self.swap_rows(pivot_row, pr);
            let inv = self[(pivot_row, col)].recip();
            for c in col..self.cols {
                let v = &self[(pivot_row, c)] * &inv;
                self[(pivot_row, c)] = v;
            }
            for r in 0..self.rows {
                if r != pivot_row && !self[(r, col)].is_zero() {
                    let factor = self[(r, col)].clone();
                    for c in col..self.cols {
                        let v = &self[(r, c)] - &factor * &self[(pivot_row, c)];
                        self[(r, c)] = v;
                    }
                }
            }
            pivot_row += 1;
        }
        pivot_row
    }

    pub fn rank(&self) -> usize {
        self.clone().row_reduce()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Basis of the right kernel, as columns collected into a matrix of
    /// shape (cols, nullity).
    pub fn kernel_basis(&self) -> RatMatrix {
        let mut m = self.clone();
        m.row_reduce();
        // Identify pivot columns.
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r < m.rows && m[(r, c)].is_one() && (0..m.rows).all(|rr| rr == r || m[(rr, c)].is_zero())
            {
                pivots.push(c);
                r += 1;
            }
        }
        let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = RatMatrix::zeros(m.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            basis[(fc, k)] = BigRational::one();
            for (pr, &pc) in pivots.iter().enumerate() {
                basis[(pc, k)] = -m[(pr, fc)].clone();
            }
        }
        basis
    }

    /// Exact determinant of a square matrix.
    pub fn determinant(&self) -> BigRational {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = m.rows;
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(pr) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return BigRational::zero();
            };
            if pr != col {
                m.swap_rows(col, pr);
                det = -det;
            }
            det *= m[(col, col)].clone();
            let inv = m[(col, col)].recip();
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] * &inv;
                for c in col..n {
                    let v = &m[(r, c)] - &factor * &m[(col, c)];
                    m[(r, c)] = v;
                }
            }
        }
        det
    }

    /// Solves self * x = rhs for square invertible self.
    pub fn solve(&self, rhs: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(rhs.len(), self.rows);
        let n = self.rows;
        let mut aug = RatMatrix::zeros(n, n + 1);
        for r in 0..n {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, n)] = rhs[r].clone();
        }
        aug.row_reduce();
        // Invertible iff the coefficient block reduced to the identity.
        for r in 0..n {
            if !aug[(r, r)].is_one() {
                return None;
            }
        }
        Some((0..n).map(|r| aug[(r, n)].clone()).collect())
    }

    pub fn transpose(&self) -> RatMatrix {
        RatMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    /// Selects the given rows into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> RatMatrix {
        RatMatrix::from_fn(rows.len(), self.cols, |r, c| self[(rows[r], c)].clone())
    }

    pub fn abs_max_f64(&self) -> f64 {
        use num::ToPrimitive;
        self.data
            .iter()
            .map(|v| v.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = BigRational;
    fn index(&self, (r, c): (usize, usize)) -> &BigRational {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigRational {
        &mut self.data[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(
            num::BigInt::from_i64(n).unwrap(),
            num::BigInt::from_i64(d).unwrap(),
        )
    }

    #[test]
    fn rank_and_kernel() {
        // x + y + z = 0 has a 2-dimensional kernel.
        let m = RatMatrix::from_fn(1, 3, |_, _| rat(1, 1));
        assert_eq!(m.rank(), 1);
        let k = m.kernel_basis();
        assert_eq!(k.cols, 2);
        for c in 0..2 {
            let s: BigRational = (0..3).map(|r| k[(r, c)].clone()).sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn determinant_2x2() {
        let m = RatMatrix::from_fn(2, 2, |r, c| rat((2 * r + c + 1) as i64, 1));
        // det [[1,2],[3,4]] = -2
        assert_eq!(m.determinant(), rat(-2, 1));
    }

    #[test]
    fn solve_roundtrip() {
        let m = RatMatrix::from_fn(3, 3, |r, c| {
            if r == c {
                rat(2, 1)
            } else {
                rat(1, 3)
            }
        });
        let rhs = vec![rat(1, 1), rat(0, 1), rat(-1, 2)];
        let x = m.solve(&rhs).unwrap();
        for r in 0..3 {
            let got: BigRational = (0..3).map(|c| &m[(r, c)] * &x[c]).sum();
            assert_eq!(got, rhs[r]);
        }
    }

    #[test]
    fn singular_solve_returns_none() {
        let m = RatMatrix::from_fn(2, 2, |_, _| rat(1, 1));
        assert!(m.solve(&[rat(1, 1), rat(2, 1)]).is_none());
    }
}
