//! Nonnegative square matrices and the componentwise order on `R^n`.
//!
//! A matrix `M` with nonnegative entries is *convergent to zero* when its
//! spectral radius is strictly below one. For such matrices the powers `M^k`
//! vanish, `I - M` is invertible and `(I - M)^{-1} = I + M + M^2 + ...` has
//! nonnegative entries. These facts carry the whole vector-metric contraction
//! argument, so every one of them is exposed here and cross-checked in tests.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the power iteration.
const POWER_TOL: f64 = 1e-12;
/// Iteration budget of one power-iteration attempt.
const POWER_MAX_ITER: usize = 5_000;
/// Diagonal shift used when plain power iteration stagnates.
const POWER_SHIFT: f64 = 1e-9;
/// Number of squarings in the Gelfand-formula fallback (`k = 2^64`).
const GELFAND_SQUARINGS: usize = 64;

/// Element of `R^n` ordered componentwise: `a <= b` iff `a_i <= b_i` for all `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderedVector(Vec<f64>);

impl OrderedVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidVector("empty vector".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidVector(format!("non-finite component {v}")));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n.max(1)])
    }

    /// Vector with every component equal to `value`.
    pub fn splat(n: usize, value: f64) -> Self {
        Self(vec![value; n.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Componentwise `self <= other`.
    pub fn leq(&self, other: &OrderedVector) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).all(|(a, b)| a <= b))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&v| v >= 0.0)
    }

    /// Largest component.
    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn add(&self, other: &OrderedVector) -> Result<OrderedVector> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &OrderedVector) -> Result<OrderedVector> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, c: f64) -> OrderedVector {
        Self(self.0.iter().map(|v| c * v).collect())
    }

    /// Componentwise maximum.
    pub fn sup(&self, other: &OrderedVector) -> Result<OrderedVector> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a.max(*b)).collect()))
    }

    fn check_dim(&self, other: &OrderedVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for OrderedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v:.6e}")?;
        }
        write!(f, ")")
    }
}

/// Free-function form of [`OrderedVector::leq`].
pub fn vec_leq(a: &OrderedVector, b: &OrderedVector) -> Result<bool> {
    a.leq(b)
}

/// Square matrix with finite nonnegative entries, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl NonnegMatrix {
    /// Builds a matrix from its rows, validating shape and sign.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMatrix("matrix must have at least one row".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(n, entries)
    }

    pub fn from_row_major(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for n = {n}, found {}",
                n * n,
                entries.len()
            )));
        }
        if let Some((k, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidMatrix(format!(
                "entry ({}, {}) = {v} is not a finite nonnegative real",
                k / n,
                k % n
            )));
        }
        Ok(Self { n, entries })
    }

    pub fn from_array<const N: usize>(rows: [[f64; N]; N]) -> Result<Self> {
        Self::from_row_major(N, rows.iter().flatten().copied().collect())
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut entries = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            entries[i * n + i] = *d;
        }
        Self::from_row_major(n, entries)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum (the operator norm induced by the max norm).
    pub fn max_row_sum(&self) -> f64 {
        self.entries
            .chunks(self.n)
            .map(|r| r.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Scales every entry by `c >= 0`.
    pub fn scale(&self, c: f64) -> Result<NonnegMatrix> {
        Self::from_row_major(self.n, self.entries.iter().map(|v| c * v).collect())
    }

    pub fn add(&self, other: &NonnegMatrix) -> Result<NonnegMatrix> {
        self.check_dim(other.n)?;
        Self::from_row_major(
            self.n,
            self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn mul(&self, other: &NonnegMatrix) -> Result<NonnegMatrix> {
        self.check_dim(other.n)?;
        Ok(Self {
            n: self.n,
            entries: mat_mul(self.n, &self.entries, &other.entries),
        })
    }

    /// Matrix-vector product `M v`.
    pub fn mul_vec(&self, v: &OrderedVector) -> Result<OrderedVector> {
        self.check_dim(v.dim())?;
        let out = self
            .entries
            .chunks(self.n)
            .map(|row| row.iter().zip(v.values()).map(|(a, b)| a * b).sum())
            .collect();
        OrderedVector::new(out)
    }

    /// Entrywise `self <= other`.
    pub fn entrywise_leq(&self, other: &NonnegMatrix) -> Result<bool> {
        self.check_dim(other.n)?;
        Ok(self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b))
    }

    /// Largest modulus among the eigenvalues.
    ///
    /// Closed form from the characteristic polynomial for `n <= 2`. Larger
    /// matrices use power iteration from the all-ones vector; when that
    /// stagnates (reducible or periodic structure) the iteration is retried on
    /// `M + eps I` and finally replaced by the Gelfand limit `||M^k||^{1/k}`
    /// evaluated with `k = 2^64` by repeated normalized squaring.
    pub fn spectral_radius(&self) -> f64 {
        match self.n {
            1 => self.entries[0],
            2 => {
                let (a, b, c, d) = (
                    self.entries[0],
                    self.entries[1],
                    self.entries[2],
                    self.entries[3],
                );
                // Nonnegative 2x2 matrices have real eigenvalues.
                let half_diff = 0.5 * (a - d);
                0.5 * (a + d) + (half_diff * half_diff + b * c).sqrt()
            }
            _ => power_iteration(self.n, &self.entries, 0.0)
                .or_else(|| power_iteration(self.n, &self.entries, POWER_SHIFT))
                .unwrap_or_else(|| gelfand_radius(self.n, &self.entries)),
        }
    }

    /// `true` iff the spectral radius is strictly below one.
    pub fn is_convergent_to_zero(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    /// `(I - M)^{-1}` by Gauss-Jordan elimination with partial pivoting.
    ///
    /// Fails unless `I - M` is invertible with a nonnegative inverse, which
    /// for nonnegative `M` happens exactly when `M` is convergent to zero.
    pub fn neumann_inverse(&self) -> Result<NonnegMatrix> {
        let n = self.n;
        let not_convergent = || Error::NotConvergent {
            spectral_radius: self.spectral_radius(),
        };
        let mut lhs: Vec<f64> = self.entries.iter().map(|v| -v).collect();
        for i in 0..n {
            lhs[i * n + i] += 1.0;
        }
        let mut inv = invert(n, lhs).ok_or_else(not_convergent)?;
        // Entries that are zero in exact arithmetic may come out as -1e-17.
        let scale = inv.iter().copied().fold(1.0, f64::max);
        for v in inv.iter_mut() {
            if !v.is_finite() {
                return Err(not_convergent());
            }
            if *v < 0.0 {
                if *v >= -1e-12 * scale {
                    *v = 0.0;
                } else {
                    return Err(not_convergent());
                }
            }
        }
        NonnegMatrix::from_row_major(n, inv)
    }

    /// `true` iff the largest entry of `M^k` is below `tol`.
    pub fn power_vanishes(&self, k: u32, tol: f64) -> bool {
        let p = mat_pow(self.n, &self.entries, k);
        p.iter().all(|v| *v < tol)
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.n != other {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other,
            });
        }
        Ok(())
    }
}

impl fmt::Display for NonnegMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.n).enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v:.6e}")?;
            }
        }
        write!(f, "]")
    }
}

impl Serialize for NonnegMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NonnegMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        NonnegMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

fn mat_mul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

fn mat_pow(n: usize, m: &[f64], mut k: u32) -> Vec<f64> {
    let mut result = vec![0.0; n * n];
    for i in 0..n {
        result[i * n + i] = 1.0;
    }
    let mut base = m.to_vec();
    while k > 0 {
        if k & 1 == 1 {
            result = mat_mul(n, &result, &base);
        }
        k >>= 1;
        if k > 0 {
            base = mat_mul(n, &base, &base);
        }
    }
    result
}

/// Power iteration on `M + shift I`. Returns `None` on stagnation.
fn power_iteration(n: usize, m: &[f64], shift: f64) -> Option<f64> {
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut prev = f64::NAN;
    let mut settled = 0;
    for _ in 0..POWER_MAX_ITER {
        for i in 0..n {
            let row = &m[i * n..(i + 1) * n];
            w[i] = row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() + shift * v[i];
        }
        let norm = w.iter().copied().fold(0.0, f64::max);
        let positive = v.iter().all(|&x| x > 0.0);
        if norm == 0.0 {
            // M v = 0 with v > 0 forces M = 0.
            return positive.then_some(0.0);
        }
        if positive {
            // Collatz-Wielandt bracket: lo <= rho <= hi.
            let (lo, hi) = w
                .iter()
                .zip(&v)
                .map(|(a, b)| a / b)
                .fold((f64::INFINITY, 0.0_f64), |(lo, hi), q| (lo.min(q), hi.max(q)));
            if hi - lo <= POWER_TOL * hi {
                return Some((0.5 * (lo + hi) - shift).max(0.0));
            }
        }
        if (norm - prev).abs() <= POWER_TOL * norm {
            settled += 1;
            if settled >= 3 {
                return Some((norm - shift).max(0.0));
            }
        } else {
            settled = 0;
        }
        prev = norm;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    None
}

/// `rho(M) = lim ||M^k||^{1/k}` with `k = 2^j`, accumulating log-scales.
/// Entrywise products of nonnegative matrices involve no cancellation, so
/// repeated squaring stays accurate.
fn gelfand_radius(n: usize, m: &[f64]) -> f64 {
    let norm = |a: &[f64]| {
        a.chunks(n)
            .map(|r| r.iter().sum::<f64>())
            .fold(0.0, f64::max)
    };
    let s0 = norm(m);
    if s0 == 0.0 {
        return 0.0;
    }
    let mut log_rho = s0.ln();
    let mut b: Vec<f64> = m.iter().map(|v| v / s0).collect();
    let mut weight = 1.0;
    for _ in 0..GELFAND_SQUARINGS {
        let sq = mat_mul(n, &b, &b);
        let s = norm(&sq);
        if s == 0.0 {
            return 0.0;
        }
        weight *= 0.5;
        log_rho += weight * s.ln();
        b = sq.into_iter().map(|v| v / s).collect();
    }
    log_rho.exp()
}

/// Inverse of a general square matrix; `None` if numerically singular.
fn invert(n: usize, mut a: Vec<f64>) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            a[r * n + col]
                .abs()
                .partial_cmp(&a[s * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        let p = a[pivot * n + col];
        if p.abs() < f64::EPSILON * 16.0 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
                inv.swap(pivot * n + j, col * n + j);
            }
        }
        for j in 0..n {
            a[col * n + j] /= p;
            inv[col * n + j] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r * n + col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                a[r * n + j] -= factor * a[col * n + j];
                inv[r * n + j] -= factor * inv[col * n + j];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> NonnegMatrix {
        NonnegMatrix::from_array([[a, b], [c, d]]).unwrap()
    }

    #[test]
    fn rejects_negative_and_nonfinite_entries() {
        assert!(NonnegMatrix::from_array([[1.0, -0.1], [0.0, 1.0]]).is_err());
        assert!(NonnegMatrix::from_array([[f64::NAN]]).is_err());
        assert!(NonnegMatrix::from_rows(&[]).is_err());
        assert!(NonnegMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn spectral_radius_small_cases() {
        assert_eq!(m2(0.0, 0.0, 0.0, 0.0).spectral_radius(), 0.0);
        assert_eq!(m2(0.5, 0.0, 0.0, 0.25).spectral_radius(), 0.5);
        assert_eq!(m2(0.0990, 0.0, 0.0, 0.0653).spectral_radius(), 0.0990);
        // rho([[0.6,0.3],[0.2,0.5]]) = 0.55 + sqrt(0.0025 + 0.06) = 0.8
        assert!((m2(0.6, 0.3, 0.2, 0.5).spectral_radius() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn spectral_radius_of_periodic_and_defective_matrices() {
        // 3-cycle permutation: eigenvalues are the cube roots of unity.
        let cycle = NonnegMatrix::from_array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
        assert!((cycle.spectral_radius() - 1.0).abs() < 1e-12);
        // Jordan-like upper triangular block, eigenvalue 0.5 with multiplicity 3.
        let jordan = NonnegMatrix::from_array([[0.5, 1.0, 0.0], [0.0, 0.5, 1.0], [0.0, 0.0, 0.5]]).unwrap();
        assert!((jordan.spectral_radius() - 0.5).abs() < 1e-9);
        // Nilpotent.
        let nil = NonnegMatrix::from_array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]).unwrap();
        assert!(nil.spectral_radius() < 1e-9);
        // Reducible: two diagonal blocks with different radii.
        let red = NonnegMatrix::from_array([
            [0.2, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.7, 0.0],
            [0.0, 0.7, 0.0, 0.0],
            [0.3, 0.0, 0.0, 0.1],
        ])
        .unwrap();
        assert!((red.spectral_radius() - 0.7).abs() < 1e-10);
    }

    #[test]
    fn convergent_to_zero_boundary() {
        assert!(NonnegMatrix::from_array([[0.5]]).unwrap().is_convergent_to_zero());
        assert!(!NonnegMatrix::from_array([[1.0]]).unwrap().is_convergent_to_zero());
    }

    #[test]
    fn neumann_inverse_examples() {
        let inv = NonnegMatrix::from_array([[0.5]]).unwrap().neumann_inverse().unwrap();
        assert!((inv.get(0, 0) - 2.0).abs() < 1e-15);

        let inv = NonnegMatrix::zeros(2).neumann_inverse().unwrap();
        assert_eq!(inv, NonnegMatrix::identity(2));

        // (I - M) = [[3/4, -1/4], [-1/4, 3/4]], det = 1/2, inverse = 2 [[3/4, 1/4], [1/4, 3/4]].
        let inv = m2(0.25, 0.25, 0.25, 0.25).neumann_inverse().unwrap();
        let expected = [[1.5, 0.5], [0.5, 1.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv.get(i, j) - expected[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn neumann_inverse_rejects_nonconvergent() {
        let err = NonnegMatrix::from_array([[1.0]]).unwrap().neumann_inverse().unwrap_err();
        assert!(matches!(err, Error::NotConvergent { .. }));
        assert!(m2(0.6, 0.6, 0.6, 0.6).neumann_inverse().is_err());
    }

    #[test]
    fn power_vanishes_examples() {
        assert!(NonnegMatrix::from_array([[0.5]]).unwrap().power_vanishes(20, 1e-3));
        assert!(!NonnegMatrix::from_array([[1.0]]).unwrap().power_vanishes(100, 1e-3));
        assert!(m2(0.6, 0.3, 0.2, 0.5).power_vanishes(60, 1e-6));
    }

    #[test]
    fn power_vanishes_matches_direct_powering() {
        // Independent route: repeated single multiplication.
        let m = m2(0.6, 0.3, 0.2, 0.5);
        let mut p = NonnegMatrix::identity(2);
        for _ in 0..60 {
            p = p.mul(&m).unwrap();
        }
        let fast = mat_pow(2, &m.entries, 60);
        for (a, b) in p.entries.iter().zip(&fast) {
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300));
        }
        assert!(p.max_entry() < 1e-5);
    }

    #[test]
    fn vec_leq_examples() {
        let v = |a: f64, b: f64| OrderedVector::new(vec![a, b]).unwrap();
        assert!(vec_leq(&v(0.0, 0.0), &v(1.0, 1.0)).unwrap());
        assert!(!vec_leq(&v(1.0, 0.0), &v(0.0, 1.0)).unwrap());
        let three = OrderedVector::new(vec![0.0; 3]).unwrap();
        assert!(matches!(
            vec_leq(&v(0.0, 0.0), &three),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ordered_vector_rejects_nonfinite() {
        assert!(OrderedVector::new(vec![f64::INFINITY]).is_err());
        assert!(OrderedVector::new(vec![]).is_err());
    }

    #[test]
    fn serde_roundtrip_matrix() {
        let m = m2(1.0 / 12.0, 0.0, 0.0, 1.0 / 6.0);
        let json = serde_json::to_string(&m).unwrap();
        let back: NonnegMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
        assert!(serde_json::from_str::<NonnegMatrix>("[[1.0,-1.0],[0.0,0.0]]").is_err());
    }
}
