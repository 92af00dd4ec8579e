//! Dense real linear algebra and the generalized Cramer engine.
//!
//! A single pivoted factorization of `A` answers every query of the form
//! "determinant of `A` with columns `i_1..i_s` replaced by right-hand sides
//! `b_{k_1}..b_{k_s}`": solve `A x_k = b_k` once per right-hand side, then
//! the replaced determinant is `det(A)` times the `s x s` minor
//! `[x(k_a, i_b)]` of the solution table.

use std::fmt;

use thiserror::Error;

use crate::config::{BRUTE_FORCE_MAX_ORDER, SINGULAR_PIVOT_RELATIVE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LalgError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("entry count {got} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular matrix: smallest pivot {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("column position {0} appears more than once")]
    DuplicateColumn(usize),
    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("brute-force determinant limited to n <= {max}, got {n}")]
    SizeLimitExceeded { n: usize, max: usize },
}

/// Row-major dense real matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LalgError> {
        if rows == 0 || cols == 0 {
            return Err(LalgError::Empty);
        }
        if data.len() != rows * cols {
            return Err(LalgError::ShapeMismatch { rows, cols, got: data.len() });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(LalgError::NonFinite { row: pos / cols, col: pos % cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "DenseMatrix::zeros needs a non-empty shape");
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(LalgError::DimensionMismatch(format!(
                "ragged rows: expected {ncols} entries, found {}",
                bad.len()
            )));
        }
        Self::new(nrows, ncols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, LalgError> {
        if self.cols != other.rows {
            return Err(LalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Square submatrix picking `rows` and `cols` (in the given order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Copy with column `col` overwritten by `values`.
    pub fn with_column(&self, col: usize, values: &[f64]) -> DenseMatrix {
        assert_eq!(values.len(), self.rows);
        let mut m = self.clone();
        for (i, v) in values.iter().enumerate() {
            m[(i, col)] = *v;
        }
        m
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// `P A = L U` with unit-diagonal `L`, packed into one buffer.
#[derive(Clone, Debug)]
pub struct LuDecomposition {
    n: usize,
    packed: Vec<f64>,
    /// `perm[i]` is the original row now sitting in row `i`.
    perm: Vec<usize>,
    parity: f64,
    min_pivot: f64,
    scale: f64,
    singular: bool,
}

impl LuDecomposition {
    /// Factorizes without failing on small pivots; the singular flag records
    /// whether any pivot fell below `1e-13 * max|A|`.
    pub fn new(a: &DenseMatrix) -> Result<Self, LalgError> {
        if !a.is_square() {
            return Err(LalgError::NotSquare { rows: a.rows, cols: a.cols });
        }
        let n = a.rows;
        let scale = a.max_abs();
        let threshold = SINGULAR_PIVOT_RELATIVE * scale;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = 1.0;
        let mut min_pivot = f64::INFINITY;

        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|r| (r, lu[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                parity = -parity;
            }
            min_pivot = min_pivot.min(pmag);
            let pivot = lu[k * n + k];
            if pivot == 0.0 {
                continue;
            }
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor != 0.0 {
                    for c in (k + 1)..n {
                        lu[r * n + c] -= factor * lu[k * n + c];
                    }
                }
            }
        }
        let singular = scale == 0.0 || min_pivot < threshold;
        Ok(Self { n, packed: lu, perm, parity, min_pivot, scale, singular })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> f64 {
        self.parity
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn check_nonsingular(&self) -> Result<(), LalgError> {
        if self.singular {
            Err(LalgError::SingularMatrix {
                pivot: self.min_pivot,
                threshold: SINGULAR_PIVOT_RELATIVE * self.scale,
            })
        } else {
            Ok(())
        }
    }

    pub fn lower(&self) -> DenseMatrix {
        let n = self.n;
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.packed[i * n + j],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn upper(&self) -> DenseMatrix {
        let n = self.n;
        DenseMatrix::from_fn(n, n, |i, j| if j >= i { self.packed[i * n + j] } else { 0.0 })
    }

    /// Parity times the product of the diagonal of `U`, or 0 when flagged singular.
    pub fn determinant(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        self.raw_determinant()
    }

    /// Same product without the singularity cut-off.
    pub fn raw_determinant(&self) -> f64 {
        let n = self.n;
        (0..n).fold(self.parity, |acc, i| acc * self.packed[i * n + i])
    }

    /// Solves `A x = b` for one right-hand side.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LalgError> {
        self.check_nonsingular()?;
        if b.len() != self.n {
            return Err(LalgError::DimensionMismatch(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.packed[i * n..i * n + i];
            x[i] -= row.iter().zip(&x[..i]).map(|(l, xj)| l * xj).sum::<f64>();
        }
        for i in (0..n).rev() {
            let row = &self.packed[i * n + i + 1..(i + 1) * n];
            let acc = x[i] - row.iter().zip(&x[i + 1..]).map(|(u, xj)| u * xj).sum::<f64>();
            x[i] = acc / self.packed[i * n + i];
        }
        Ok(x)
    }

    /// `A^{-1}`, column by column.
    pub fn inverse(&self) -> Result<DenseMatrix, LalgError> {
        let n = self.n;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

/// Strict factorization: fails with `SingularMatrix` on a vanishing pivot.
pub fn lu_factor(a: &DenseMatrix) -> Result<LuDecomposition, LalgError> {
    let lu = LuDecomposition::new(a)?;
    lu.check_nonsingular()?;
    Ok(lu)
}

pub fn determinant(lu: &LuDecomposition) -> f64 {
    lu.determinant()
}

/// Amplitudes `x(k, i)` of `sum_i a_i x(k, i) = b_k`, one row per right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionTable {
    s: usize,
    n: usize,
    values: Vec<f64>,
}

impl SolutionTable {
    pub fn rhs_count(&self) -> usize {
        self.s
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize) -> f64 {
        debug_assert!(k < self.s && i < self.n);
        self.values[k * self.n + i]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Table restricted to the given right-hand sides, in that order.
    pub fn select_rows(&self, rhs_rows: &[usize]) -> SolutionTable {
        let mut values = Vec::with_capacity(rhs_rows.len() * self.n);
        for &k in rhs_rows {
            values.extend_from_slice(self.row(k));
        }
        SolutionTable { s: rhs_rows.len(), n: self.n, values }
    }

    /// The `s x s` block `[x(k_a, i_b)]`.
    pub fn minor_matrix(&self, rhs_rows: &[usize], col_positions: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(rhs_rows.len(), col_positions.len(), |a, b| {
            self.get(rhs_rows[a], col_positions[b])
        })
    }
}

pub fn solve_columns(lu: &LuDecomposition, b: &[Vec<f64>]) -> Result<SolutionTable, LalgError> {
    lu.check_nonsingular()?;
    let n = lu.order();
    let mut values = Vec::with_capacity(b.len() * n);
    for rhs in b {
        values.extend(lu.solve(rhs)?);
    }
    Ok(SolutionTable { s: b.len(), n, values })
}

/// Determinant of a small dense matrix by elimination, no singularity cut-off.
pub fn small_determinant(m: &DenseMatrix) -> f64 {
    assert!(m.is_square());
    match m.rows {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => LuDecomposition::new(m).map(|lu| lu.raw_determinant()).unwrap_or(0.0),
    }
}

/// `det(A)` with column `col_positions[b]` replaced by `b_{rhs_rows[b]}`.
pub fn replaced_determinant(
    det_a: f64,
    x: &SolutionTable,
    rhs_rows: &[usize],
    col_positions: &[usize],
) -> Result<f64, LalgError> {
    if rhs_rows.len() != col_positions.len() {
        return Err(LalgError::DimensionMismatch(format!(
            "{} right-hand sides for {} column positions",
            rhs_rows.len(),
            col_positions.len()
        )));
    }
    if col_positions.len() > x.n {
        return Err(LalgError::DimensionMismatch(format!(
            "cannot replace {} columns of an order-{} matrix",
            col_positions.len(),
            x.n
        )));
    }
    for (idx, &c) in col_positions.iter().enumerate() {
        if c >= x.n {
            return Err(LalgError::IndexOutOfRange { index: c, len: x.n });
        }
        if col_positions[..idx].contains(&c) {
            return Err(LalgError::DuplicateColumn(c));
        }
    }
    if let Some(&k) = rhs_rows.iter().find(|&&k| k >= x.s) {
        return Err(LalgError::IndexOutOfRange { index: k, len: x.s });
    }
    if rhs_rows.is_empty() {
        return Ok(det_a);
    }
    Ok(det_a * small_determinant(&x.minor_matrix(rhs_rows, col_positions)))
}

/// Laplace expansion along the first row. Exponential cost; oracle use only.
pub fn brute_force_determinant(a: &DenseMatrix) -> Result<f64, LalgError> {
    if !a.is_square() {
        return Err(LalgError::NotSquare { rows: a.rows, cols: a.cols });
    }
    if a.rows > BRUTE_FORCE_MAX_ORDER {
        return Err(LalgError::SizeLimitExceeded { n: a.rows, max: BRUTE_FORCE_MAX_ORDER });
    }
    let cols: Vec<usize> = (0..a.cols).collect();
    Ok(laplace(a, 0, &cols))
}

fn laplace(a: &DenseMatrix, row: usize, cols: &[usize]) -> f64 {
    match cols.len() {
        1 => a[(row, cols[0])],
        2 => a[(row, cols[0])] * a[(row + 1, cols[1])] - a[(row, cols[1])] * a[(row + 1, cols[0])],
        _ => {
            let mut sum = 0.0;
            let mut rest = Vec::with_capacity(cols.len() - 1);
            for (pos, &c) in cols.iter().enumerate() {
                let entry = a[(row, c)];
                if entry == 0.0 {
                    continue;
                }
                rest.clear();
                rest.extend(cols.iter().copied().filter(|&cc| cc != c));
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * entry * laplace(a, row + 1, &rest);
            }
            sum
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_factors_trivially() {
        let lu = lu_factor(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(lu.lower(), DenseMatrix::identity(3));
        assert_eq!(lu.upper(), DenseMatrix::identity(3));
        assert_eq!(lu.parity(), 1.0);
        assert_eq!(determinant(&lu), 1.0);
    }

    #[test]
    fn permutation_matrix_flips_parity() {
        let lu = lu_factor(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(lu.parity(), -1.0);
        assert_eq!(lu.permutation(), &[1, 0]);
        assert_eq!(determinant(&lu), -1.0);
    }

    #[test]
    fn small_determinants() {
        // cofactor oracle: 2*3 - 1*4 = 2, 1*4 - 2*3 = -2
        assert!((determinant(&lu_factor(&m(&[&[2.0, 1.0], &[4.0, 3.0]])).unwrap()) - 2.0).abs() < 1e-15);
        assert!((determinant(&lu_factor(&m(&[&[1.0, 2.0], &[3.0, 4.0]])).unwrap()) + 2.0).abs() < 1e-15);
        let d = determinant(&lu_factor(&DenseMatrix::diagonal(&[2.0, 3.0, 4.0])).unwrap());
        assert_eq!(d, 24.0);
    }

    #[test]
    fn singular_flag_and_zero_determinant() {
        let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(lu_factor(&a), Err(LalgError::SingularMatrix { .. })));
        let lu = LuDecomposition::new(&a).unwrap();
        assert!(lu.is_singular());
        assert_eq!(lu.determinant(), 0.0);
        assert!(solve_columns(&lu, &[vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn solve_examples() {
        let lu = lu_factor(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(solve_columns(&lu, &[vec![3.0, 4.0]]).unwrap().row(0), &[3.0, 4.0]);

        // adjugate oracle: A^{-1} = [[-2, 1], [1.5, -0.5]]
        let lu = lu_factor(&m(&[&[1.0, 2.0], &[3.0, 4.0]])).unwrap();
        let x = solve_columns(&lu, &[vec![5.0, 6.0]]).unwrap();
        assert!((x.get(0, 0) + 4.0).abs() < 1e-14);
        assert!((x.get(0, 1) - 4.5).abs() < 1e-14);

        let lu = lu_factor(&DenseMatrix::diagonal(&[2.0, 3.0, 4.0])).unwrap();
        let x = solve_columns(&lu, &[vec![1.0, 1.0, 1.0], vec![2.0, 0.0, 1.0]]).unwrap();
        for (got, want) in x.row(0).iter().zip([0.5, 1.0 / 3.0, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(x.row(1), &[1.0, 0.0, 0.25]);
    }

    #[test]
    fn replaced_determinant_examples() {
        let lu = lu_factor(&DenseMatrix::identity(3)).unwrap();
        let x = solve_columns(&lu, &[vec![0.0, 5.0, 0.0]]).unwrap();
        assert_eq!(replaced_determinant(1.0, &x, &[0], &[1]).unwrap(), 5.0);

        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let lu = lu_factor(&a).unwrap();
        let x = solve_columns(&lu, &[vec![5.0, 6.0]]).unwrap();
        let r = replaced_determinant(lu.determinant(), &x, &[0], &[1]).unwrap();
        assert!((r + 9.0).abs() < 1e-13);

        let lu = lu_factor(&DenseMatrix::diagonal(&[2.0, 3.0, 4.0])).unwrap();
        let x = solve_columns(&lu, &[vec![1.0, 1.0, 1.0], vec![2.0, 0.0, 1.0]]).unwrap();
        let r = replaced_determinant(lu.determinant(), &x, &[0, 1], &[0, 2]).unwrap();
        assert!((r + 3.0).abs() < 1e-13);
    }

    #[test]
    fn replaced_determinant_errors() {
        let lu = lu_factor(&DenseMatrix::identity(3)).unwrap();
        let x = solve_columns(&lu, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(
            replaced_determinant(1.0, &x, &[0], &[0, 1]),
            Err(LalgError::DimensionMismatch(_))
        ));
        assert_eq!(replaced_determinant(1.0, &x, &[0, 1], &[2, 2]), Err(LalgError::DuplicateColumn(2)));
        assert!(matches!(
            replaced_determinant(1.0, &x, &[0], &[3]),
            Err(LalgError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn brute_force_matches_closed_forms() {
        assert_eq!(brute_force_determinant(&DenseMatrix::identity(4)).unwrap(), 1.0);
        assert_eq!(brute_force_determinant(&m(&[&[1.0, 2.0], &[3.0, 4.0]])).unwrap(), -2.0);
        assert!(matches!(
            brute_force_determinant(&DenseMatrix::identity(11)),
            Err(LalgError::SizeLimitExceeded { .. })
        ));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]), Err(LalgError::NonFinite { .. })));
        assert!(matches!(DenseMatrix::new(2, 2, vec![1.0]), Err(LalgError::ShapeMismatch { .. })));
        assert!(matches!(LuDecomposition::new(&DenseMatrix::zeros(2, 3)), Err(LalgError::NotSquare { .. })));
    }
}
