//! Reproducible generators for the matrix families the escape theorems
//! quantify over.
//!
//! Determinism is a contract here: identical `(family, n, seed)` produce
//! bit-identical matrices across runs and platforms. To keep that promise
//! independent of any platform RNG, the generator is an in-repo SplitMix64 —
//! a 64-bit shift-xor mixer with fixed published constants — and all float
//! post-processing uses plain arithmetic on its output bits.

use crate::linalg::{lp_norm, Matrix, PExponent};
use crate::{Error, Result};

/// SplitMix64: `state += 0x9E3779B97F4A7C15` per step, output mixed with
/// two shift-xor-multiply rounds (`0xBF58476D1CE4E5B9`, `0x94D049BB133111EB`).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 significant bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }

    /// Gaussian-like draw: sum of twelve uniforms minus six (Irwin–Hall).
    /// Mean 0, variance 1, support [-6, 6]; avoids transcendental functions
    /// whose last bits vary across libm builds.
    pub fn next_gaussian_like(&mut self) -> f64 {
        let mut s = 0.0;
        for _ in 0..12 {
            s += self.next_f64();
        }
        s - 6.0
    }

    /// `-1.0` with probability `density`, else `+1.0`.
    pub fn next_sign(&mut self, density: f64) -> f64 {
        if self.next_f64() < density {
            -1.0
        } else {
            1.0
        }
    }
}

/// Matrix families quantified over by the escape theorems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `|A|e = ne`: every row on the boundary of the `l_1` ball of radius n.
    CrossPolytope,
    /// Rows rescaled to `||r_i||_q = c` exactly.
    RowQNorm,
    /// Rows rescaled to `||r_i||_q = c * u`, `u` random in `[1, 2)`.
    RowQNormAtLeast,
    /// Unconstrained entries in `[-1, 1]`.
    Arbitrary,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cross-polytope" => Ok(Family::CrossPolytope),
            "row-q-norm" => Ok(Family::RowQNorm),
            "row-q-norm-at-least" => Ok(Family::RowQNormAtLeast),
            "arbitrary" => Ok(Family::Arbitrary),
            other => Err(Error::InvalidInput(format!(
                "unknown family {other:?}; expected cross-polytope, row-q-norm, \
                 row-q-norm-at-least or arbitrary"
            ))),
        }
    }
}

/// A full generation request. `q` and `c` only matter for the row-norm
/// families.
#[derive(Debug, Clone)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub sign_density: f64,
    pub q: PExponent,
    pub c: f64,
}

impl GenSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        GenSpec {
            family,
            n,
            seed,
            sign_density: 0.5,
            q: PExponent::Two,
            c: 1.0,
        }
    }

    pub fn generate(&self) -> Result<Matrix> {
        match self.family {
            Family::CrossPolytope => gen_cross_polytope_with(self.n, self.seed, self.sign_density),
            Family::RowQNorm => {
                gen_row_norm_with(self.n, self.q, self.c, self.seed, false, self.sign_density)
            }
            Family::RowQNormAtLeast => {
                gen_row_norm_with(self.n, self.q, self.c, self.seed, true, self.sign_density)
            }
            Family::Arbitrary => gen_arbitrary(self.n, self.seed, self.sign_density),
        }
    }
}

/// `n x n` matrix with `|A|e = ne`: per row, nonnegative entries are drawn
/// Dirichlet-style (normalized exponentials) and scaled to sum `n` before
/// independent random signs are applied, so the absolute row sums are exact
/// up to rounding.
pub fn gen_cross_polytope(n: usize, seed: u64) -> Result<Matrix> {
    gen_cross_polytope_with(n, seed, 0.5)
}

pub fn gen_cross_polytope_with(n: usize, seed: u64, sign_density: f64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::BadShape("n must be at least 1".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n {
        let (g, sum) = loop {
            let g: Vec<f64> = (0..n).map(|_| -(1.0 - rng.next_f64()).ln()).collect();
            let sum: f64 = g.iter().sum();
            if sum > 1e-300 {
                break (g, sum);
            }
        };
        let magnitudes: Vec<f64> = g.iter().map(|v| n as f64 * v / sum).collect();
        for m in magnitudes {
            data.push(m * rng.next_sign(sign_density));
        }
    }
    Matrix::new(n, n, data)
}

/// `n x n` matrix whose rows satisfy `||r_i||_q = c` (or `>= c` with a random
/// factor in `[1, 2)` when `at_least`): componentwise Gaussian-like draws,
/// rescaled row by row.
pub fn gen_row_norm(
    n: usize,
    q: PExponent,
    c: f64,
    seed: u64,
    at_least: bool,
) -> Result<Matrix> {
    gen_row_norm_with(n, q, c, seed, at_least, 0.5)
}

pub fn gen_row_norm_with(
    n: usize,
    q: PExponent,
    c: f64,
    seed: u64,
    at_least: bool,
    sign_density: f64,
) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::BadShape("n must be at least 1".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "target row norm must be positive, got {c}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n {
        let mags = loop {
            let mags: Vec<f64> = (0..n).map(|_| rng.next_gaussian_like().abs()).collect();
            if lp_norm(&mags, q) > 1e-9 {
                break mags;
            }
        };
        let signs: Vec<f64> = (0..n).map(|_| rng.next_sign(sign_density)).collect();
        let target = if at_least { c * (1.0 + rng.next_f64()) } else { c };
        let scale = target / lp_norm(&mags, q);
        for (m, s) in mags.iter().zip(&signs) {
            data.push(m * scale * s);
        }
    }
    Matrix::new(n, n, data)
}

/// Unconstrained `n x n` matrix with entries in `[-1, 1]`.
pub fn gen_arbitrary(n: usize, seed: u64, sign_density: f64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::BadShape("n must be at least 1".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let m = rng.next_f64();
        data.push(m * rng.next_sign(sign_density));
    }
    Matrix::new(n, n, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::entrywise_abs;

    #[test]
    fn identical_seed_is_bit_identical() {
        for family in [
            Family::CrossPolytope,
            Family::RowQNorm,
            Family::RowQNormAtLeast,
            Family::Arbitrary,
        ] {
            let mut spec = GenSpec::new(family, 5, 1234);
            spec.q = PExponent::Two;
            spec.c = 5.0_f64.sqrt();
            let a = spec.generate().unwrap();
            let b = spec.generate().unwrap();
            assert_eq!(a, b, "family {family:?} must be deterministic");
        }
    }

    #[test]
    fn cross_polytope_row_sums_are_n() {
        for n in 1..=8 {
            let a = gen_cross_polytope(n, 42 + n as u64).unwrap();
            for i in 0..n {
                let s: f64 = entrywise_abs(a.row(i)).iter().sum();
                assert!(
                    (s - n as f64).abs() < 1e-12,
                    "n={n} row {i}: |row| sums to {s}"
                );
            }
        }
    }

    #[test]
    fn single_entry_cross_polytope_is_a_sign() {
        let a = gen_cross_polytope(1, 7).unwrap();
        assert!((a.get(0, 0).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_norm_family_hits_target_exactly() {
        for (q, c) in [
            (PExponent::One, 4.0),
            (PExponent::Other(1.5), 2.5),
            (PExponent::Two, 2.0),
            (PExponent::Infinity, 1.0),
        ] {
            let a = gen_row_norm(4, q, c, 99, false).unwrap();
            for i in 0..4 {
                let norm = lp_norm(a.row(i), q);
                assert!(
                    (norm - c).abs() < 1e-12 * c.max(1.0),
                    "q={q:?}: row {i} norm {norm} != {c}"
                );
            }
        }
    }

    #[test]
    fn at_least_family_lands_in_band() {
        let c = 3.0;
        let a = gen_row_norm(5, PExponent::Two, c, 123, true).unwrap();
        for i in 0..5 {
            let norm = lp_norm(a.row(i), PExponent::Two);
            assert!(norm >= c - 1e-12 && norm <= 2.0 * c + 1e-12);
        }
    }

    #[test]
    fn sign_density_extremes() {
        let pos = gen_cross_polytope_with(4, 5, 0.0).unwrap();
        assert!(pos.is_nonnegative());
        let neg = gen_cross_polytope_with(4, 5, 1.0).unwrap();
        assert!((0..4).all(|i| neg.row(i).iter().all(|&v| v <= 0.0)));
    }
}
