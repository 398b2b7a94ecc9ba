//! Dense row-major matrices and symmetric eigendecomposition.
//!
//! The solver is a cyclic Jacobi iteration. Scatter matrices in this crate
//! are at most a few thousand rows, always symmetric, and we need every
//! eigenvector with deterministic output, which is exactly the regime where
//! Jacobi is simple and robust. For high-dimensional pixel covariance the
//! decomposition goes through [`gram_eig`] instead, which solves the small
//! Gram system and maps its eigenvectors back to the ambient space.

use std::fmt;
use std::ops::{Index, IndexMut};

/// Hard cap on full Jacobi sweeps before giving up.
const MAX_JACOBI_SWEEPS: usize = 100;

/// Components smaller than this are ignored when picking the sign of an
/// eigenvector, so the orientation is stable under rounding jitter.
const SIGN_EPS: f64 = 1e-12;

/// Gram eigenvalues below `lambda_max` times this are treated as zero and
/// dropped, since their ambient vectors are pure noise.
const GRAM_RANK_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Matrix dimensions do not allow the requested operation.
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    /// Backing buffer length does not match `rows * cols`.
    BadBufferLength { rows: usize, cols: usize, len: usize },
    /// A matrix dimension is zero.
    EmptyDimension { rows: usize, cols: usize },
    /// An entry is NaN or infinite.
    NonFinite { row: usize, col: usize },
    /// Eigendecomposition requires a square matrix.
    NotSquare { rows: usize, cols: usize },
    /// Asymmetry exceeds the accepted relative rounding slack.
    NotSymmetric { asymmetry: f64 },
    /// Tolerance must be a finite positive number.
    InvalidTolerance(f64),
    /// The Jacobi iteration did not reach the tolerance within the sweep cap.
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    /// The Gram solver needs at least one sample.
    EmptySampleSet,
    /// Sample vectors passed to the Gram solver have differing lengths.
    SampleLengthMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::DimensionMismatch { op, left, right } => write!(
                f,
                "{op}: dimension mismatch between {}x{} and {}x{}",
                left.0, left.1, right.0, right.1
            ),
            LinalgError::BadBufferLength { rows, cols, len } => write!(
                f,
                "buffer of length {len} cannot back a {rows}x{cols} matrix"
            ),
            LinalgError::EmptyDimension { rows, cols } => {
                write!(f, "matrix dimensions must be positive, got {rows}x{cols}")
            }
            LinalgError::NonFinite { row, col } => {
                write!(f, "non-finite entry at ({row}, {col})")
            }
            LinalgError::NotSquare { rows, cols } => {
                write!(f, "eigendecomposition needs a square matrix, got {rows}x{cols}")
            }
            LinalgError::NotSymmetric { asymmetry } => write!(
                f,
                "matrix is not symmetric (asymmetry {asymmetry:.3e} exceeds relative tolerance 1e-9)"
            ),
            LinalgError::InvalidTolerance(t) => {
                write!(f, "tolerance must be finite and positive, got {t}")
            }
            LinalgError::NoConvergence { sweeps, off_diagonal } => write!(
                f,
                "Jacobi iteration still has off-diagonal norm {off_diagonal:.3e} after {sweeps} sweeps"
            ),
            LinalgError::EmptySampleSet => write!(f, "Gram eigensolver needs at least one sample"),
            LinalgError::SampleLengthMismatch { index, expected, got } => write!(
                f,
                "sample {index} has length {got}, expected {expected}"
            ),
        }
    }
}

impl std::error::Error for LinalgError {}

/// Dense matrix of `f64` values in row-major order.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows * self.cols <= 64 {
            writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
            for i in 0..self.rows {
                writeln!(f, "  {:?}", self.row(i))?;
            }
            write!(f, "]")
        } else {
            write!(f, "Matrix {}x{} [..]", self.rows, self.cols)
        }
    }
}

impl Matrix {
    /// Builds a matrix from a row-major buffer, rejecting empty dimensions,
    /// length mismatches, and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyDimension { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(LinalgError::BadBufferLength { rows, cols, len: data.len() });
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite { row: bad / cols, col: bad % cols });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Zero-filled matrix. Dimensions must be positive.
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from slices of rows, which must be non-empty and of
    /// equal length.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Matrix, LinalgError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(LinalgError::EmptyDimension { rows: rows.len(), cols: 0 });
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    op: "from_rows",
                    left: (1, cols),
                    right: (1, r.len()),
                });
            }
            let _ = i;
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Row `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` copied out into a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += aik * b;
                }
            }
        }
        Ok(out)
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op: "sub",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    /// Entrywise sum `self + other`.
    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op: "add",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entrywise difference to `other`, for tests and
    /// convergence reporting. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// One eigenvalue with its unit-length eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = a[i * n + j];
            sum += 2.0 * v * v;
        }
    }
    sum.sqrt()
}

/// Normalizes to unit length and flips the sign so the first component with
/// magnitude above [`SIGN_EPS`] is positive.
fn normalize_and_orient(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    if let Some(lead) = v.iter().find(|x| x.abs() > SIGN_EPS) {
        if *lead < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

struct Rotation {
    p: usize,
    q: usize,
    sn: f64,
    tau: f64,
    app_next: f64,
    aqq_next: f64,
}

/// Advances the round-robin ring one tournament round: position 0 stays
/// fixed while everything else rotates right. Pairing position `i` with
/// position `len - 1 - i` for every round visits each unordered pair of
/// entries exactly once over `len - 1` rounds.
fn advance_ring(ring: &mut [usize]) {
    let last = ring[ring.len() - 1];
    for i in (2..ring.len()).rev() {
        ring[i] = ring[i - 1];
    }
    ring[1] = last;
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input may deviate from exact symmetry by rounding noise, up to
/// `1e-9 * (1 + ||s||_F)` in Frobenius norm; it is symmetrized internally
/// before iterating. Sweeps run until the off-diagonal Frobenius norm drops
/// to `tol * (1 + ||s||_F)`, which bounds the residual `||s v - lambda v||`
/// of every returned pair by the same quantity. Convergence is quadratic, so
/// the cap of 100 sweeps is generous; hitting it reports the remaining
/// off-diagonal mass instead of returning a bad basis.
///
/// Each sweep visits every index pair once, in tournament order: n - 1
/// rounds of disjoint pairs, so a round applies as a batch of independent
/// rotations. Batching keeps the memory traffic to contiguous row passes
/// (a naive rotation mirrors its updates into two matrix columns, and those
/// strided writes dominate the runtime once the matrix outgrows the cache).
/// After a few warmup sweeps, entries too small to move their diagonal at
/// double precision are zeroed instead of rotated.
///
/// Pairs come back sorted by eigenvalue, largest first, with ties broken by
/// the diagonal position in the converged matrix so the order is stable.
/// Every eigenvector has unit length and a deterministic sign.
pub fn sym_eig(s: &Matrix, tol: f64) -> Result<Vec<EigenPair>, LinalgError> {
    if s.rows != s.cols {
        return Err(LinalgError::NotSquare { rows: s.rows, cols: s.cols });
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(LinalgError::InvalidTolerance(tol));
    }
    let n = s.rows;
    let fro = s.frobenius_norm();

    let mut asym = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = s.data[i * n + j] - s.data[j * n + i];
            asym += 2.0 * d * d;
        }
    }
    let asym = asym.sqrt();
    if asym > 1e-9 * (1.0 + fro) {
        return Err(LinalgError::NotSymmetric { asymmetry: asym });
    }

    let mut a = s.data.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }

    // Eigenvectors accumulate as rows of `w`, so each rotation touches two
    // contiguous slices instead of two strided columns.
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        w[i * n + i] = 1.0;
    }

    let threshold = tol * (1.0 + fro);
    let slots = n + (n & 1);
    let mut ring: Vec<usize> = (0..slots).collect();
    let mut rotations: Vec<Rotation> = Vec::with_capacity(slots / 2);
    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a, n);
    while off > threshold {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps, off_diagonal: off });
        }
        for _round in 0..slots - 1 {
            rotations.clear();
            for i in 0..slots / 2 {
                let x = ring[i];
                let y = ring[slots - 1 - i];
                if x >= n || y >= n {
                    continue;
                }
                let (p, q) = if x < y { (x, y) } else { (y, x) };
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Past the warmup sweeps, an entry this far below the
                // diagonal cannot survive a rotation at double precision,
                // so zeroing it outright saves the row traffic.
                let small = 100.0 * apq.abs();
                if sweeps > 4 && app.abs() + small == app.abs() && aqq.abs() + small == aqq.abs()
                {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = 0.5 * (aqq - app) / apq;
                // Smaller-magnitude root of t^2 + 2*theta*t - 1 = 0. When
                // theta^2 overflows to infinity, t underflows to the correct
                // limit 1/(2*theta) ~ 0.
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                let tau = sn / (1.0 + c);
                rotations.push(Rotation {
                    p,
                    q,
                    sn,
                    tau,
                    app_next: app - t * apq,
                    aqq_next: aqq + t * apq,
                });
            }
            advance_ring(&mut ring);
            if rotations.is_empty() {
                continue;
            }

            // The pairs in a round are disjoint, so the round is one
            // two-sided update A <- J^T A J with J a direct sum of plane
            // rotations: first the row pass J^T A, mirrored into the
            // eigenvector rows, then the column pass applied within each
            // row, where the pair of entries sits in cache.
            for rot in &rotations {
                for m in [&mut a, &mut w] {
                    let (head, tail) = m.split_at_mut(rot.q * n);
                    let rp = &mut head[rot.p * n..rot.p * n + n];
                    let rq = &mut tail[..n];
                    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
                        let g = *x;
                        let h = *y;
                        *x = g - rot.sn * (h + g * rot.tau);
                        *y = h + rot.sn * (g - h * rot.tau);
                    }
                }
            }
            for row in a.chunks_exact_mut(n) {
                for rot in &rotations {
                    let g = row[rot.p];
                    let h = row[rot.q];
                    row[rot.p] = g - rot.sn * (h + g * rot.tau);
                    row[rot.q] = h + rot.sn * (g - h * rot.tau);
                }
            }
            // The passes above leave rounding noise in each rotation's own
            // 2x2 block; the closed forms are exact.
            for rot in &rotations {
                a[rot.p * n + rot.p] = rot.app_next;
                a[rot.q * n + rot.q] = rot.aqq_next;
                a[rot.p * n + rot.q] = 0.0;
                a[rot.q * n + rot.p] = 0.0;
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a, n);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));

    let mut pairs = Vec::with_capacity(n);
    for &k in &order {
        let mut v = w[k * n..(k + 1) * n].to_vec();
        normalize_and_orient(&mut v);
        pairs.push(EigenPair { value: a[k * n + k], vector: v });
    }
    Ok(pairs)
}

/// Leading eigenpairs of the scatter `S = (1/M) * sum_j v_j v_j^T` computed
/// without ever forming `S`, for the case where the samples live in a much
/// higher dimension than their count.
///
/// Solves the `M x M` Gram system `K[i][j] = (v_i . v_j) / M` with
/// [`sym_eig`] and lifts each eigenvector `u` back to the ambient space as
/// `sum_j u[j] v_j`, normalized. `K` and `S` share their nonzero spectrum,
/// so this returns exactly the eigenpairs of `S` with eigenvalue above the
/// rank cutoff `lambda_max * 1e-10`; the remaining ambient directions are
/// null space. An all-zero sample set therefore yields an empty list.
pub fn gram_eig(samples: &[Vec<f64>], tol: f64) -> Result<Vec<EigenPair>, LinalgError> {
    if samples.is_empty() {
        return Err(LinalgError::EmptySampleSet);
    }
    let dim = samples[0].len();
    for (index, s) in samples.iter().enumerate() {
        if s.len() != dim {
            return Err(LinalgError::SampleLengthMismatch { index, expected: dim, got: s.len() });
        }
        if let Some(col) = s.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite { row: index, col });
        }
    }
    if dim == 0 {
        return Err(LinalgError::EmptyDimension { rows: samples.len(), cols: 0 });
    }

    let m = samples.len();
    let mf = m as f64;
    let mut k = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let dot: f64 = samples[i].iter().zip(&samples[j]).map(|(x, y)| x * y).sum();
            k[(i, j)] = dot / mf;
            k[(j, i)] = dot / mf;
        }
    }

    let gram_pairs = sym_eig(&k, tol)?;
    let lambda_max = gram_pairs.first().map(|p| p.value).unwrap_or(0.0).max(0.0);
    let cutoff = lambda_max * GRAM_RANK_CUTOFF;

    let mut out = Vec::new();
    for pair in gram_pairs {
        if pair.value <= cutoff {
            continue;
        }
        let mut v = vec![0.0; dim];
        for (coeff, sample) in pair.vector.iter().zip(samples) {
            if *coeff == 0.0 {
                continue;
            }
            for (acc, x) in v.iter_mut().zip(sample) {
                *acc += coeff * x;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        normalize_and_orient(&mut v);
        out.push(EigenPair { value: pair.value, vector: v });
    }
    Ok(out)
}
