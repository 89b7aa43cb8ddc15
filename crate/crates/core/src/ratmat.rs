//! Dense exact linear algebra over a generic field.
//!
//! Every operator in the workbench (structure maps of sheaves, quiver arrows,
//! comparison maps) is a [`Matrix`]. The intended scalar is
//! [`Rational`](crate::Rational), an arbitrary-precision rational, so that
//! pivoting decisions are exact. Zero-sized matrices are legal and stand for
//! maps to or from the zero space.

use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};

/// Scalar field used by every module.
///
/// Any `Num` type with negation works; elimination tests pivots against
/// exact zero, so only exact types give meaningful ranks and kernels.
pub trait Field:
    Clone + PartialEq + fmt::Debug + fmt::Display + FromStr + Num + Neg<Output = Self> + FromPrimitive
{
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("field admits small integers")
    }
}

impl<T> Field for T where
    T: Clone + PartialEq + fmt::Debug + fmt::Display + FromStr + Num + Neg<Output = T> + FromPrimitive
{
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = F::one();
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar(n: usize, c: F) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                op: "from_vec",
                left: format!("{rows}x{cols}"),
                right: format!("{} entries", data.len()),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from rows; every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: Vec<Vec<F>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape {
                    op: "from_rows",
                    left: format!("{cols} columns"),
                    right: format!("row {i} with {} entries", r.len()),
                });
            }
            data.extend(r);
        }
        Ok(Matrix { rows: n, cols, data })
    }

    /// Convenience constructor from integer rows (all rows nonempty and equal length).
    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged integer matrix literal");
                r.iter().map(|&v| F::from_int(v))
            })
            .collect();
        Matrix { rows: rows.len(), cols, data }
    }

    /// Matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<F>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, v) in c.iter().enumerate() {
                m.data[i * m.cols + j] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[F] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    fn shape_str(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    /// Exact product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Matrix<F>) -> Result<Matrix<F>> {
        if self.cols != rhs.rows {
            return Err(Error::Shape { op: "compose", left: self.shape_str(), right: rhs.shape_str() });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[F]) -> Result<Vec<F>> {
        if v.len() != self.cols {
            return Err(Error::Shape {
                op: "apply",
                left: self.shape_str(),
                right: format!("vector of length {}", v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
            .collect())
    }

    fn zip_with(&self, rhs: &Matrix<F>, op: &'static str, f: impl Fn(&F, &F) -> F) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::Shape { op, left: self.shape_str(), right: rhs.shape_str() });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, rhs: &Matrix<F>) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, rhs: &Matrix<F>) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, c: &F) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v.clone() * c.clone()).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, rhs: &Matrix<F>) -> Self {
        let mut out = Self::zeros(self.rows + rhs.rows, self.cols + rhs.cols);
        out.paste(0, 0, self);
        out.paste(self.rows, self.cols, rhs);
        out
    }

    /// Copies `block` into `self` with its top-left corner at `(r, c)`.
    pub fn paste(&mut self, r: usize, c: usize, block: &Matrix<F>) {
        assert!(r + block.rows <= self.rows && c + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.data[(r + i) * self.cols + c + j] = block.get(i, j).clone();
            }
        }
    }

    pub fn block(&self, r: usize, c: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.data[i * cols + j] = self.get(r + i, c + j).clone();
            }
        }
        out
    }

    /// Stacks matrices vertically; all must share a column count.
    pub fn vstack(cols: usize, parts: &[Matrix<F>]) -> Result<Self> {
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut r = 0;
        for p in parts {
            if p.cols != cols {
                return Err(Error::Shape { op: "vstack", left: format!("{cols} columns"), right: p.shape_str() });
            }
            out.paste(r, 0, p);
            r += p.rows;
        }
        Ok(out)
    }

    /// Places matrices side by side; all must share a row count.
    pub fn hstack(rows: usize, parts: &[Matrix<F>]) -> Result<Self> {
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut c = 0;
        for p in parts {
            if p.rows != rows {
                return Err(Error::Shape { op: "hstack", left: format!("{rows} rows"), right: p.shape_str() });
            }
            out.paste(0, c, p);
            c += p.cols;
        }
        Ok(out)
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Matrix<F>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = F::one() / m.get(r, c).clone();
            for j in c..m.cols {
                let idx = r * m.cols + j;
                m.data[idx] = m.data[idx].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = m.get(r, j).clone();
                    let idx = i * m.cols + j;
                    m.data[idx] = m.data[idx].clone() - factor.clone() * v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel as column vectors.
    ///
    /// The basis matrix is returned in reduced column echelon form, which
    /// depends only on the kernel subspace, so equal kernels give literally
    /// equal outputs.
    pub fn kernel_basis(&self) -> Vec<Vec<F>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![F::zero(); self.cols];
            v[free] = F::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(row, free).clone();
            }
            basis.push(v);
        }
        let k = Matrix::from_columns(self.cols, &basis);
        let k = k.column_echelon();
        (0..k.cols()).map(|j| k.column(j)).collect()
    }

    /// Kernel basis as the columns of a `cols × dim ker` matrix.
    pub fn kernel_matrix(&self) -> Matrix<F> {
        Matrix::from_columns(self.cols, &self.kernel_basis())
    }

    /// Reduced column echelon form with zero columns dropped.
    pub fn column_echelon(&self) -> Matrix<F> {
        let (r, pivots) = self.transpose().rref();
        r.block(0, 0, pivots.len(), r.cols()).transpose()
    }

    /// Smallest `k ≥ 1` with `self^k = 0`, if any (`k ≤ max(rows, 1)`).
    pub fn nilpotency_index(&self) -> Result<Option<usize>> {
        if !self.is_square() {
            return Err(Error::Shape { op: "is_nilpotent", left: self.shape_str(), right: "square matrix".into() });
        }
        let mut p = self.clone();
        for k in 1..=self.rows.max(1) {
            if p.is_zero() {
                return Ok(Some(k));
            }
            p = p.compose(self)?;
        }
        Ok(None)
    }

    pub fn is_nilpotent(&self) -> Result<bool> {
        Ok(self.nilpotency_index()?.is_some())
    }

    /// Exact inverse; `None` unless square and of full rank.
    pub fn inverse(&self) -> Option<Matrix<F>> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = Matrix::hstack(n, &[self.clone(), Matrix::identity(n)]).ok()?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        let inv = r.block(0, n, n, n);
        debug_assert!(self.compose(&inv).ok()? == Matrix::identity(n));
        Some(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.inverse().is_some()
    }

    pub fn pow(&self, k: u32) -> Result<Matrix<F>> {
        let mut out = Matrix::identity(self.rows);
        for _ in 0..k {
            out = out.compose(self)?;
        }
        Ok(out)
    }

    /// Coordinates `X` with `self · X = target`, where the columns of `self`
    /// are linearly independent. `None` if some column of `target` is not in
    /// the column span.
    pub fn solve_in_span(&self, target: &Matrix<F>) -> Option<Matrix<F>> {
        if target.rows != self.rows {
            return None;
        }
        let k = self.cols;
        let aug = Matrix::hstack(self.rows, &[self.clone(), target.clone()]).ok()?;
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= k) || pivots.len() < k {
            return None;
        }
        Some(r.block(0, k, k, target.cols))
    }

    /// Index of the first column of `target` outside the column span of `self`.
    pub fn first_column_outside_span(&self, target: &Matrix<F>) -> Option<usize> {
        let base = self.rank();
        (0..target.cols).find(|&j| {
            let col = Matrix::from_columns(self.rows, &[target.column(j)]);
            Matrix::hstack(self.rows, &[self.clone(), col]).map(|m| m.rank() > base).unwrap_or(true)
        })
    }
}

impl<F: fmt::Display> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> =
                self.data[i * self.cols..(i + 1) * self.cols].iter().map(|v| v.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Matrix literal: `rows cols` header line followed by one line per row.
impl<F: Field> fmt::Display for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::Zero;
    use proptest::prelude::*;

    type M = Matrix<Rational>;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn compose_examples() {
        let id = M::identity(2);
        assert_eq!(id.compose(&id).unwrap(), id);
        let e = M::from_ints(&[&[0, 1], &[0, 0]]);
        assert_eq!(e.compose(&e).unwrap(), M::zeros(2, 2));
        let a = M::from_ints(&[&[1, 2], &[3, 4]]);
        let s = M::from_ints(&[&[0, 1], &[1, 0]]);
        assert_eq!(a.compose(&s).unwrap(), M::from_ints(&[&[2, 1], &[4, 3]]));
    }

    #[test]
    fn compose_shape_error_names_operands() {
        let err = M::zeros(2, 3).compose(&M::zeros(2, 3)).unwrap_err();
        match err {
            Error::Shape { left, right, .. } => {
                assert_eq!(left, "2x3");
                assert_eq!(right, "2x3");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn kernel_examples() {
        assert!(M::identity(3).kernel_basis().is_empty());
        assert_eq!(M::zeros(2, 2).kernel_basis().len(), 2);
        let k = M::from_ints(&[&[1, 1]]).kernel_basis();
        assert_eq!(k, vec![vec![q(1, 1), q(-1, 1)]]);
    }

    #[test]
    fn kernel_of_zero_width_and_height() {
        assert!(M::zeros(3, 0).kernel_basis().is_empty());
        assert_eq!(M::zeros(0, 2).kernel_basis().len(), 2);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(M::identity(4).rank(), 4);
        assert_eq!(M::zeros(3, 5).rank(), 0);
        assert_eq!(M::from_ints(&[&[1, 2], &[2, 4]]).rank(), 1);
    }

    #[test]
    fn nilpotent_examples() {
        assert_eq!(M::zeros(2, 2).nilpotency_index().unwrap(), Some(1));
        assert_eq!(M::identity(2).nilpotency_index().unwrap(), None);
        let n = M::from_ints(&[&[0, 1, 1], &[0, 0, 1], &[0, 0, 0]]);
        assert_eq!(n.nilpotency_index().unwrap(), Some(3));
        assert!(M::zeros(2, 3).nilpotency_index().is_err());
    }

    #[test]
    fn invertible_examples() {
        assert_eq!(M::identity(2).inverse(), Some(M::identity(2)));
        assert!(M::zeros(1, 1).inverse().is_none());
        let a = M::from_ints(&[&[1, 1], &[0, 1]]);
        assert_eq!(a.inverse(), Some(M::from_ints(&[&[1, -1], &[0, 1]])));
        assert!(M::zeros(2, 3).inverse().is_none());
        assert_eq!(M::zeros(0, 0).inverse(), Some(M::zeros(0, 0)));
    }

    #[test]
    fn direct_sum_examples() {
        assert_eq!(M::identity(1).direct_sum(&M::identity(1)), M::identity(2));
        let a = M::from_ints(&[&[1, 2, 3]]);
        assert_eq!(a.direct_sum(&M::zeros(0, 0)), a);
    }

    #[test]
    fn solve_in_span_recovers_coordinates() {
        let basis = M::from_ints(&[&[1, 0], &[1, 1], &[0, 1]]);
        let x = M::from_ints(&[&[2], &[-3]]);
        let t = basis.compose(&x).unwrap();
        assert_eq!(basis.solve_in_span(&t), Some(x));
        let outside = M::from_ints(&[&[1], &[0], &[0]]);
        assert_eq!(basis.solve_in_span(&outside), None);
        assert_eq!(basis.first_column_outside_span(&outside), Some(0));
    }

    #[test]
    fn display_uses_p_over_q_tokens() {
        let m = M::from_vec(1, 2, vec![q(1, 2), q(3, 1)]).unwrap();
        assert_eq!(m.to_string(), "1 2\n1/2 3\n");
    }

    fn small_matrix(max: usize) -> impl Strategy<Value = M> {
        (0..=max, 0..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3i64..=3, r * c)
                .prop_map(move |v| M::from_vec(r, c, v.into_iter().map(Rational::from_int).collect()).unwrap())
        })
    }

    fn strictly_upper(n: usize) -> impl Strategy<Value = M> {
        proptest::collection::vec(-3i64..=3, n * n).prop_map(move |v| {
            let mut m = M::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    m.set(i, j, Rational::from_int(v[i * n + j]));
                }
            }
            m
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(a in small_matrix(5)) {
            prop_assert_eq!(a.rank() + a.kernel_basis().len(), a.cols());
            for v in a.kernel_basis() {
                prop_assert!(a.apply(&v).unwrap().iter().all(|x| x.is_zero()));
            }
        }

        #[test]
        fn rank_of_direct_sum(a in small_matrix(4), b in small_matrix(4)) {
            prop_assert_eq!(a.direct_sum(&b).rank(), a.rank() + b.rank());
        }

        #[test]
        fn compose_is_associative(n in 1usize..4, seed in proptest::collection::vec(-3i64..=3, 27)) {
            let mk = |o: usize| {
                M::from_vec(n, n, seed[o..o + n * n].iter().map(|&v| Rational::from_int(v)).collect()).unwrap()
            };
            let (a, b, c) = (mk(0), mk(9), mk(18));
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn unipotent_is_invertible(u in (1usize..5).prop_flat_map(strictly_upper), g in small_matrix(4)) {
            // Conjugate a strictly upper triangular matrix when `g` happens to be invertible.
            let k = u.rows();
            let nil = match (g.is_square() && g.rows() == k).then(|| g.inverse()).flatten() {
                Some(gi) => g.compose(&u).unwrap().compose(&gi).unwrap(),
                None => u,
            };
            prop_assert!(nil.is_nilpotent().unwrap());
            let t = M::identity(k).add(&nil).unwrap();
            let inv = t.inverse();
            prop_assert!(inv.is_some());
            prop_assert_eq!(t.compose(&inv.unwrap()).unwrap(), M::identity(k));
        }

        #[test]
        fn kernel_basis_is_deterministic_and_canonical(a in small_matrix(4)) {
            prop_assert_eq!(a.kernel_basis(), a.clone().kernel_basis());
            // Row operations do not change the kernel, hence not its normalized basis.
            let (r, _) = a.rref();
            prop_assert_eq!(a.kernel_basis(), r.kernel_basis());
        }
    }
}
