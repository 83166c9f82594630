//! Prime-field arithmetic and dense matrices over `F_q`.
//!
//! Every entry of a [`Matrix`] handed to a [`PrimeField`] operation is
//! assumed to be reduced, i.e. in `[0, q)`. Row reduction is plain modular
//! Gaussian elimination; nothing in this module touches floating point.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field size {0} is not prime")]
    NotPrime(u64),
    #[error("no inverse of zero")]
    ZeroInverse,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("entry {value} at ({row}, {col}) is not reduced modulo {q}")]
    Unreduced {
        row: usize,
        col: usize,
        value: u64,
        q: u64,
    },
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// The prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    q: u64,
}

impl TryFrom<u64> for PrimeField {
    type Error = FieldError;

    fn try_from(q: u64) -> Result<Self, Self::Error> {
        PrimeField::new(q)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.q
    }
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if is_prime(q) {
            Ok(Self { q })
        } else {
            Err(FieldError::NotPrime(q))
        }
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn reduce(&self, v: u64) -> u64 {
        v % self.q
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.q as u128) as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.q)
    }

    pub fn pow(&self, a: u64, exp: u64) -> u64 {
        pow_mod(a, exp, self.q)
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: u64) -> Result<u64, FieldError> {
        let a = self.reduce(a);
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// Checks that every entry of `m` lies in `[0, q)`.
    pub fn check(&self, m: &Matrix) -> Result<(), FieldError> {
        for r in 0..m.rows {
            for c in 0..m.cols {
                let value = m.get(r, c);
                if value >= self.q {
                    return Err(FieldError::Unreduced {
                        row: r,
                        col: c,
                        value,
                        q: self.q,
                    });
                }
            }
        }
        Ok(())
    }

    /// Reduces `m` in place to reduced row echelon form and returns the
    /// pivot columns.
    pub fn row_reduce(&self, m: &mut Matrix) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut lead = 0;
        for col in 0..m.cols {
            if lead == m.rows {
                break;
            }
            let Some(p) = (lead..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            m.swap_rows(lead, p);
            let inv = self.inv(m.get(lead, col)).expect("pivot is nonzero");
            for c in col..m.cols {
                let v = self.mul(m.get(lead, c), inv);
                m.set(lead, c, v);
            }
            for r in 0..m.rows {
                if r == lead {
                    continue;
                }
                let factor = m.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in col..m.cols {
                    let v = self.sub(m.get(r, c), self.mul(factor, m.get(lead, c)));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            lead += 1;
        }
        pivots
    }

    pub fn rank(&self, m: &Matrix) -> usize {
        let mut work = m.clone();
        self.row_reduce(&mut work).len()
    }

    /// True iff every row of `probe` lies in the row space of `m`.
    pub fn rowspace_contains(&self, m: &Matrix, probe: &Matrix) -> Result<bool, FieldError> {
        if m.cols != probe.cols {
            return Err(FieldError::Dimension(format!(
                "row space has {} columns, probe has {}",
                m.cols, probe.cols
            )));
        }
        let mut basis = EchelonBasis::new(m.cols);
        for r in 0..m.rows {
            basis.insert(self, m.row(r));
        }
        Ok((0..probe.rows).all(|r| basis.contains(self, probe.row(r))))
    }

    pub fn mat_mul(&self, a: &Matrix, b: &Matrix) -> Result<Matrix, FieldError> {
        if a.cols != b.rows {
            return Err(FieldError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                a.rows, a.cols, b.rows, b.cols
            )));
        }
        let mut out = Matrix::zeros(a.rows, b.cols);
        for i in 0..a.rows {
            for k in 0..a.cols {
                let aik = a.get(i, k);
                if aik == 0 {
                    continue;
                }
                for j in 0..b.cols {
                    let v = self.add(out.get(i, j), self.mul(aik, b.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Returns `row · m` for a row vector.
    pub fn vec_mat(&self, row: &[u64], m: &Matrix) -> Vec<u64> {
        debug_assert_eq!(row.len(), m.rows);
        let mut out = vec![0; m.cols];
        for (k, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = self.add(*o, self.mul(c, m.get(k, j)));
            }
        }
        out
    }

    /// Solves `x · m = target` for `x`, with free variables set to zero.
    /// Returns `None` when some row of `target` is outside the row space of `m`.
    pub fn solve_left(&self, m: &Matrix, target: &Matrix) -> Result<Option<Matrix>, FieldError> {
        if m.cols != target.cols {
            return Err(FieldError::Dimension(format!(
                "system has {} columns, target has {}",
                m.cols, target.cols
            )));
        }
        // x·m = t  <=>  mᵀ·xᵀ = tᵀ; row reduce [mᵀ | tᵀ].
        let unknowns = m.rows;
        let mut aug = m.transpose().hstack(&target.transpose())?;
        let pivots = self.row_reduce(&mut aug);
        if pivots.iter().any(|&p| p >= unknowns) {
            return Ok(None);
        }
        let mut x = Matrix::zeros(target.rows, unknowns);
        for (r, &p) in pivots.iter().enumerate() {
            for t in 0..target.rows {
                x.set(t, p, aug.get(r, unknowns + t));
            }
        }
        Ok(Some(x))
    }

    /// Uniform element of `F_q`. `Uniform` samples by widening multiply with
    /// rejection, so there is no modulo bias.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        Uniform::new(0, self.q).sample(rng)
    }

    pub fn random_matrix<R: Rng + ?Sized>(&self, rows: usize, cols: usize, rng: &mut R) -> Matrix {
        let dist = Uniform::new(0, self.q);
        let entries = (0..rows * cols).map(|_| dist.sample(rng)).collect();
        Matrix {
            rows,
            cols,
            entries,
        }
    }
}

/// Dense row-major matrix of field elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl TryFrom<MatrixRepr> for Matrix {
    type Error = FieldError;

    fn try_from(r: MatrixRepr) -> Result<Self, Self::Error> {
        Matrix::new(r.rows, r.cols, r.entries)
    }
}

impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            entries: m.entries,
        }
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self, FieldError> {
        if rows * cols != entries.len() {
            return Err(FieldError::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from row vectors. `cols` is needed to type an empty list.
    pub fn from_rows<I, R>(cols: usize, rows: I) -> Result<Self, FieldError>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[u64]>,
    {
        let mut entries = Vec::new();
        let mut n = 0;
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(FieldError::Dimension(format!(
                    "row {n} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
            n += 1;
        }
        Ok(Self {
            rows: n,
            cols,
            entries,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn vstack(&self, other: &Matrix) -> Result<Matrix, FieldError> {
        if self.cols != other.cols {
            return Err(FieldError::Dimension(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix, FieldError> {
        if self.rows != other.rows {
            return Err(FieldError::Dimension(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut entries = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            entries.extend_from_slice(self.row(r));
            entries.extend_from_slice(other.row(r));
        }
        Ok(Matrix {
            rows: self.rows,
            cols,
            entries,
        })
    }

    /// Rows `indices` in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut entries = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            entries.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            entries,
        }
    }

    /// Columns `start..end` of every row.
    pub fn column_block(&self, start: usize, end: usize) -> Matrix {
        let cols = end - start;
        let mut entries = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            entries.extend_from_slice(&self.row(r)[start..end]);
        }
        Matrix {
            rows: self.rows,
            cols,
            entries,
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

/// Incrementally maintained row-echelon basis.
///
/// Rows are kept in insertion order, each normalised to a leading one and
/// reduced against every earlier row, so a probe can be reduced in a single
/// pass. `truncate` undoes insertions, which lets subset enumeration walk a
/// search tree without recomputing prefixes.
#[derive(Debug, Clone)]
pub struct EchelonBasis {
    width: usize,
    rows: Vec<(usize, Vec<u64>)>,
}

impl EchelonBasis {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    fn reduce(&self, f: &PrimeField, v: &[u64]) -> Vec<u64> {
        debug_assert_eq!(v.len(), self.width);
        let mut v = v.to_vec();
        for (pivot, row) in &self.rows {
            let factor = v[*pivot];
            if factor == 0 {
                continue;
            }
            for (x, &b) in v.iter_mut().zip(row) {
                *x = f.sub(*x, f.mul(factor, b));
            }
        }
        v
    }

    pub fn contains(&self, f: &PrimeField, v: &[u64]) -> bool {
        self.reduce(f, v).iter().all(|&x| x == 0)
    }

    /// Adds `v` to the basis. Returns false (and leaves the basis unchanged)
    /// when `v` is already in the span.
    pub fn insert(&mut self, f: &PrimeField, v: &[u64]) -> bool {
        let mut v = self.reduce(f, v);
        let Some(pivot) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(v[pivot]).expect("pivot is nonzero");
        for x in v.iter_mut() {
            *x = f.mul(*x, inv);
        }
        self.rows.push((pivot, v));
        true
    }

    pub fn truncate(&mut self, rank: usize) {
        self.rows.truncate(rank);
    }
}
