//! Dense matrices and vectors, entrywise absolute values, `l_p` norms and
//! their Hölder duals, and explicit dual-norm extremizers.
//!
//! Vectors are plain `&[f64]` / `Vec<f64>`; [`Matrix`] is dense row-major
//! storage. Everything here is a pure function, safe for concurrent use.

use crate::{Error, Result};

/// Exponent of an `l_p` norm, `1 <= p <= infinity`.
///
/// `1`, `2` and `infinity` are represented exactly; any other exponent is
/// carried as a double. Computations throughout the crate are double
/// precision, so results involving an `Other` exponent are accurate to
/// roughly 1e-12 relative, not to the last bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExponent {
    One,
    Two,
    Infinity,
    Other(f64),
}

impl PExponent {
    /// Classifies a raw exponent. Rejects `p < 1` and NaN.
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(if p == 1.0 {
            PExponent::One
        } else if p == 2.0 {
            PExponent::Two
        } else if p.is_infinite() {
            PExponent::Infinity
        } else {
            PExponent::Other(p)
        })
    }

    pub fn infinity() -> Self {
        PExponent::Infinity
    }

    /// Numeric value; `f64::INFINITY` for the sup norm.
    pub fn value(self) -> f64 {
        match self {
            PExponent::One => 1.0,
            PExponent::Two => 2.0,
            PExponent::Infinity => f64::INFINITY,
            PExponent::Other(p) => p,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PExponent::Infinity)
    }

    /// Hölder conjugate `q` with `1/p + 1/q = 1`, under the convention
    /// `1/infinity = 0`. Exact on the exact variants.
    pub fn conjugate(self) -> Self {
        match self {
            PExponent::One => PExponent::Infinity,
            PExponent::Two => PExponent::Two,
            PExponent::Infinity => PExponent::One,
            PExponent::Other(p) => {
                // p/(p-1), then reclassify so e.g. conjugate(1.5) is Two-free
                // exact Other(3.0) and conjugate(conjugate(p)) round-trips.
                let q = p / (p - 1.0);
                if q == 2.0 {
                    PExponent::Two
                } else {
                    PExponent::Other(q)
                }
            }
        }
    }
}

impl std::fmt::Display for PExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PExponent::Infinity => write!(f, "inf"),
            other => write!(f, "{}", other.value()),
        }
    }
}

impl std::str::FromStr for PExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(PExponent::Infinity);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| Error::InvalidInput(format!("cannot parse l_p exponent from {s:?}")))?;
        PExponent::new(p)
    }
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds an `rows x cols` matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::BadShape(format!(
                "matrix must have at least one row and one column, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::BadShape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::BadShape("matrix must have at least one row".into()));
        }
        let cols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::BadShape(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Matrix::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Matrix::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        Ok(m)
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

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        self.data[i * self.cols + j] = v;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        assert!(i < self.rows, "row index out of range");
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// `A x`; errors when `x` does not match the column count.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// Entrywise absolute value `|A|`.
    pub fn entrywise_abs(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.abs()).collect(),
        }
    }

    /// True iff every entry is nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }
}

/// Dot product; callers guarantee equal lengths.
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Entrywise absolute value `|x|` of a vector.
pub fn entrywise_abs(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.abs()).collect()
}

/// `u >= v` entrywise. Errors on a length mismatch.
pub fn entrywise_geq(u: &[f64], v: &[f64]) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    Ok(u.iter().zip(v).all(|(a, b)| a >= b))
}

/// `||v||_p`. Exactly `max_i |v_i|` for `p = infinity`; the largest entry is
/// factored out of finite-`p` sums to avoid overflow.
pub fn lp_norm(v: &[f64], p: PExponent) -> f64 {
    match p {
        PExponent::Infinity => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        PExponent::One => v.iter().map(|x| x.abs()).sum(),
        PExponent::Two => {
            let m = lp_norm(v, PExponent::Infinity);
            if m == 0.0 {
                return 0.0;
            }
            let s: f64 = v.iter().map(|x| (x / m) * (x / m)).sum();
            m * s.sqrt()
        }
        PExponent::Other(p) => {
            let m = lp_norm(v, PExponent::Infinity);
            if m == 0.0 {
                return 0.0;
            }
            let s: f64 = v.iter().map(|x| (x.abs() / m).powf(p)).sum();
            m * s.powf(1.0 / p)
        }
    }
}

/// Point of the unit `l_p` sphere where the functional `x -> <r, x>` attains
/// its dual norm `||r||_q`, `q` the Hölder conjugate of `p`.
///
/// Three constructions, one per regime:
/// - `1 < p < infinity`: `x_j = sgn(r_j) |r_j|^(q-1) / ||r||_q^(q-1)`;
/// - `p = 1`: the signed standard basis vector at the first index of maximal
///   `|r_j|` (lowest index wins ties, for determinism);
/// - `p = infinity`: the sign vector of `r`, with `x_j = 0` where `r_j = 0`.
///
/// Returns `(x, ||r||_q)`. Errors on the zero vector.
pub fn dual_extremizer(r: &[f64], p: PExponent) -> Result<(Vec<f64>, f64)> {
    let q = p.conjugate();
    let value = lp_norm(r, q);
    if value == 0.0 {
        return Err(Error::ZeroVector);
    }
    let x = match p {
        PExponent::One => {
            let linf = lp_norm(r, PExponent::Infinity);
            let j0 = r
                .iter()
                .position(|v| v.abs() == linf)
                .expect("nonzero vector has a maximal entry");
            let mut x = vec![0.0; r.len()];
            x[j0] = r[j0].signum();
            x
        }
        PExponent::Infinity => r
            .iter()
            .map(|&v| if v == 0.0 { 0.0 } else { v.signum() })
            .collect(),
        PExponent::Two => r.iter().map(|&v| v / value).collect(),
        PExponent::Other(p) => {
            let qm1 = 1.0 / (p - 1.0); // q - 1
            let scale = value.powf(qm1);
            r.iter()
                .map(|&v| {
                    if v == 0.0 {
                        0.0
                    } else {
                        v.signum() * v.abs().powf(qm1) / scale
                    }
                })
                .collect()
        }
    };
    Ok((x, value))
}

/// Dual norms `||r_i||_q` of the rows of `A`, `q = conjugate(p)`.
pub fn row_dual_norms(a: &Matrix, p: PExponent) -> Vec<f64> {
    let q = p.conjugate();
    (0..a.rows()).map(|i| lp_norm(a.row(i), q)).collect()
}

/// Solves the square dense system `A x = b` by Gaussian elimination with
/// partial pivoting. `None` when the matrix is (numerically) singular.
pub fn solve_dense_system(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[i][col] / m[col][col];
            if f != 0.0 {
                for k in col..=n {
                    let d = m[col][k] * f;
                    m[i][k] -= d;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}
