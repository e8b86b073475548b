//! Dense symmetric linear algebra kernels.
//!
//! Everything here targets desk-scale problems (n <= 64):
//!
//! 1. [`sym_eig`] computes a full eigendecomposition by cyclic Jacobi
//!    rotations. Jacobi is slower than tridiagonalization but is simple,
//!    unconditionally stable, and bit-deterministic, which matters because
//!    solver runs must be reproducible.
//! 2. [`gram_factor`] turns a near-PSD matrix into an explicit factor
//!    `V V^T`, clamping small negative eigenvalues to zero.
//! 3. [`orthogonal_align`] solves the orthogonal Procrustes problem exactly
//!    for vector sets with matching Gram matrices, via the polar factor of
//!    the cross-covariance.

use thiserror::Error;

/// Sweep cap for the Jacobi iteration. In practice 6-10 sweeps suffice for
/// n <= 64; hitting the cap indicates a non-finite input.
const JACOBI_MAX_SWEEPS: usize = 100;

/// Largest relative asymmetry accepted by [`SymmetricMatrix::from_data`].
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix data has {got} entries, expected {expected}")]
    BadShape { got: usize, expected: usize },
    #[error("asymmetry {asym:.3e} exceeds tolerance {tol:.3e}")]
    NotSymmetric { asym: f64, tol: f64 },
    #[error("matrix contains a non-finite entry")]
    NotFinite,
    #[error("Jacobi iteration failed to converge in {JACOBI_MAX_SWEEPS} sweeps")]
    SweepLimit,
    #[error("matrix is not positive semidefinite: min eigenvalue {lambda_min:.3e} < -{clamp:.3e}")]
    NotPsd { lambda_min: f64, clamp: f64 },
    #[error("vector sets have mismatched Gram matrices: max deviation {dev:.3e}")]
    GramMismatch { dev: f64 },
    #[error("vector sets are empty or have inconsistent dimensions")]
    BadVectors,
}

/// Minimal dense row-major matrix. Only the operations the solvers need.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "shape mismatch in mul_vec");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl serde::Serialize for SymmetricMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("SymmetricMatrix", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("data", &self.data)?;
        st.end()
    }
}

/// Dense symmetric matrix. Construction symmetrizes the payload and rejects
/// asymmetry above `1e-12` relative to the largest entry, so downstream code
/// can rely on exact equality of mirrored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds from row-major data of length `n * n`.
    pub fn from_data(n: usize, data: &[f64]) -> Result<Self, NumericsError> {
        if data.len() != n * n {
            return Err(NumericsError::BadShape {
                got: data.len(),
                expected: n * n,
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(NumericsError::NotFinite);
        }
        let scale = 1.0 + data.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((data[i * n + j] - data[j * n + i]).abs());
            }
        }
        if asym > SYMMETRY_TOL * scale {
            return Err(NumericsError::NotSymmetric {
                asym,
                tol: SYMMETRY_TOL * scale,
            });
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            out[i * n + i] = data[i * n + i];
            for j in (i + 1)..n {
                let v = 0.5 * (data[i * n + j] + data[j * n + i]);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Ok(SymmetricMatrix { n, data: out })
    }

    pub fn from_mat(m: &Mat) -> Result<Self, NumericsError> {
        assert_eq!(m.rows(), m.cols(), "matrix not square");
        SymmetricMatrix::from_data(m.rows(), m.data())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_mat(&self) -> Mat {
        Mat {
            rows: self.n,
            cols: self.n,
            data: self.data.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `<self, other>` (full double sum).
    pub fn inner(&self, other: &SymmetricMatrix) -> f64 {
        assert_eq!(self.n, other.n, "shape mismatch in inner");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> SymmetricMatrix {
        let mut out = self.clone();
        for x in &mut out.data {
            *x *= s;
        }
        out
    }

    pub fn add(&self, other: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.n, other.n, "shape mismatch in add");
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        out
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> SymmetricMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += shift;
        }
        out
    }
}

/// Eigendecomposition `M = Q diag(values) Q^T` with `values` ascending and
/// the columns of `Q` the matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl SymEig {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Terminates when the off-diagonal Frobenius norm drops below
/// `1e-13 * (1 + ||M||_F)`, which bounds the reconstruction error
/// `||Q diag(v) Q^T - M||_F` by the same quantity up to rounding.
pub fn sym_eig(m: &SymmetricMatrix) -> Result<SymEig, NumericsError> {
    let n = m.n;
    if n == 0 {
        return Ok(SymEig {
            values: vec![],
            vectors: Mat::zeros(0, 0),
        });
    }
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NotFinite);
    }
    let mut a = m.data.clone();
    let mut q = Mat::identity(n);
    let target = 1e-13 * (1.0 + m.frobenius_norm());
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for qi in (p + 1)..n {
                let apq = a[p * n + qi];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[qi * n + qi];
                let tau = (aqq - app) / (2.0 * apq);
                // Smaller root of t^2 + 2 tau t - 1 = 0 keeps the rotation angle <= pi/4.
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + qi];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + qi] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[qi * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[qi * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkq = q[(k, qi)];
                    q[(k, p)] = c * qkp - s * qkq;
                    q[(k, qi)] = s * qkp + c * qkq;
                }
            }
        }
    }
    if !converged {
        return Err(NumericsError::SweepLimit);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (newj, &oldj) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, newj)] = q[(i, oldj)];
        }
    }
    Ok(SymEig { values, vectors })
}

/// Default clamp for [`gram_factor`]: eigenvalues in `[-clamp, 0)` are
/// treated as exact zeros.
pub const GRAM_CLAMP: f64 = 1e-10;

/// Factors `M ~ V V^T` for a (numerically) PSD matrix.
///
/// Columns of `V` are ordered by decreasing eigenvalue, so columns past the
/// numerical rank are identically zero. Fails if `lambda_min(M) < -clamp`.
pub fn gram_factor(m: &SymmetricMatrix, clamp: f64) -> Result<Mat, NumericsError> {
    let eig = sym_eig(m)?;
    if let Some(&lo) = eig.values.first() {
        if lo < -clamp {
            return Err(NumericsError::NotPsd {
                lambda_min: lo,
                clamp,
            });
        }
    }
    let n = m.n;
    let mut v = Mat::zeros(n, n);
    // Descending order: eigenvalue index n-1-j goes to column j.
    for j in 0..n {
        let src = n - 1 - j;
        let lam = eig.values[src].max(0.0);
        let s = lam.sqrt();
        for i in 0..n {
            v[(i, j)] = s * eig.vectors[(i, src)];
        }
    }
    Ok(v)
}

/// Orthogonal Procrustes alignment: returns an orthogonal `T` with
/// `T src_i = dst_i` for all `i`.
///
/// Exact alignment is only possible when the two Gram matrices agree, which
/// is checked up front against `tol` (scaled by the largest vector norm).
/// `T` is the polar factor of the cross-covariance `sum dst_i src_i^T`,
/// computed from [`sym_eig`] of its symmetric square; directions lost to
/// rank deficiency are completed deterministically with the lexicographically
/// first standard basis vectors.
pub fn orthogonal_align(
    src: &[Vec<f64>],
    dst: &[Vec<f64>],
    tol: f64,
) -> Result<Mat, NumericsError> {
    if src.is_empty() || src.len() != dst.len() {
        return Err(NumericsError::BadVectors);
    }
    let d = src[0].len();
    if d == 0 || src.iter().chain(dst).any(|v| v.len() != d) {
        return Err(NumericsError::BadVectors);
    }
    let k = src.len();
    let scale = src
        .iter()
        .chain(dst)
        .flat_map(|v| v.iter())
        .fold(0.0f64, |a, x| a.max(x.abs()));
    let scale2 = 1.0 + scale * scale;
    let mut dev = 0.0f64;
    for i in 0..k {
        for j in i..k {
            let gs: f64 = (0..d).map(|t| src[i][t] * src[j][t]).sum();
            let gd: f64 = (0..d).map(|t| dst[i][t] * dst[j][t]).sum();
            dev = dev.max((gs - gd).abs());
        }
    }
    if dev > tol * scale2 {
        return Err(NumericsError::GramMismatch { dev });
    }

    // Cross-covariance and its symmetric square.
    let mut cc = Mat::zeros(d, d);
    for t in 0..k {
        for i in 0..d {
            for j in 0..d {
                cc[(i, j)] += dst[t][i] * src[t][j];
            }
        }
    }
    let sq = SymmetricMatrix::from_mat(&cc.transpose().mul(&cc))?;
    let eig = sym_eig(&sq)?;
    let lam_max = eig.max().max(0.0);
    let rank_tol = 1e-12 * (1.0 + lam_max);
    let rank = eig.values.iter().filter(|&&l| l > rank_tol).count();

    // Columns of `u_range` form an orthonormal basis of range(cc), mapped
    // from the corresponding right singular vectors.
    let mut t = Mat::zeros(d, d);
    let mut range_basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    for idx in (d - rank)..d {
        let lam = eig.values[idx];
        let qcol = eig.vectors.col(idx);
        let ucol: Vec<f64> = {
            let raw = cc.mul_vec(&qcol);
            let s = 1.0 / lam.sqrt();
            raw.iter().map(|x| x * s).collect()
        };
        for i in 0..d {
            for j in 0..d {
                t[(i, j)] += ucol[i] * qcol[j];
            }
        }
        range_basis.push(ucol);
    }
    // Deterministic completion: Gram-Schmidt the standard basis against the
    // mapped range, pairing leftovers with the null-space eigenvectors.
    let mut null_idx = 0usize;
    for e in 0..d {
        if range_basis.len() == d {
            break;
        }
        let mut cand = vec![0.0; d];
        cand[e] = 1.0;
        for b in &range_basis {
            let dot: f64 = (0..d).map(|i| cand[i] * b[i]).sum();
            for i in 0..d {
                cand[i] -= dot * b[i];
            }
        }
        let norm: f64 = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        for x in &mut cand {
            *x /= norm;
        }
        let qcol = eig.vectors.col(null_idx);
        null_idx += 1;
        for i in 0..d {
            for j in 0..d {
                t[(i, j)] += cand[i] * qcol[j];
            }
        }
        range_basis.push(cand);
    }
    debug_assert_eq!(range_basis.len(), d, "basis completion fell short");
    Ok(t)
}

/// Ten-significant-digit decimal rendering with trailing zeros trimmed.
/// Shared by every reporting surface so that text and JSON output agree
/// and golden files stay stable across platforms.
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let trim = |s: String| -> String {
        if !s.contains('.') {
            return s;
        }
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    };
    if (-4..10).contains(&mag) {
        let decimals = (9 - mag).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.9e}");
        let (mant, exp) = s.split_once('e').unwrap();
        format!("{}e{}", trim(mant.to_string()), exp)
    }
}
