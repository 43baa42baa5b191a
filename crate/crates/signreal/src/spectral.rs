//! Nonnegative-matrix machinery: strongly connected components of the
//! adjacency digraph, Perron roots by power iteration, the Frobenius normal
//! form of `|A|`, and principal submatrix extraction.

use crate::linalg::Matrix;
use crate::{Error, Result};

/// One diagonal block of the Frobenius normal form of `|A|`.
#[derive(Debug, Clone)]
pub struct FrobeniusBlock {
    /// Indices into the original matrix, increasing (0-based).
    pub indices: Vec<usize>,
    /// Perron root of the block.
    pub rho: f64,
    /// Size > 1 strongly connected, or a 1x1 block with a positive entry.
    pub irreducible: bool,
    /// Strictly positive eigenvector with `||u||_1 = 1`, present for
    /// irreducible blocks with `rho > 0`.
    pub perron_vector: Option<Vec<f64>>,
}

/// SCC-based block structure of `B = |A|` with per-block Perron data.
#[derive(Debug, Clone)]
pub struct FrobeniusDecomposition {
    /// Blocks in a topological order of the condensation: edges of the
    /// digraph of `B` go from earlier blocks to later ones.
    pub blocks: Vec<FrobeniusBlock>,
    /// Global spectral radius `rho(B)`, the maximum of the block roots.
    pub rho: f64,
    /// Index into `blocks` of the first block attaining `rho` within
    /// tolerance.
    pub attaining: usize,
}

impl FrobeniusDecomposition {
    pub fn attaining_block(&self) -> &FrobeniusBlock {
        &self.blocks[self.attaining]
    }
}

/// Strongly connected components of the digraph with an edge `i -> j` iff
/// `b_ij > 0`, in a topological order of the condensation. Indices within a
/// component are increasing.
///
/// Tarjan's single-pass algorithm; components are emitted sinks-first, so
/// the reversed emission order is topological.
pub fn scc_decompose(b: &Matrix) -> Result<Vec<Vec<usize>>> {
    require_square_nonnegative(b)?;
    let n = b.rows();
    let graph: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| b.get(i, j) > 0.0).collect())
        .collect();

    struct TarjanState {
        index: usize,
        stack: Vec<usize>,
        on_stack: Vec<bool>,
        idx: Vec<Option<usize>>,
        low: Vec<usize>,
        comps: Vec<Vec<usize>>,
    }

    fn strongconnect(v: usize, graph: &[Vec<usize>], st: &mut TarjanState) {
        st.idx[v] = Some(st.index);
        st.low[v] = st.index;
        st.index += 1;
        st.stack.push(v);
        st.on_stack[v] = true;

        for &w in &graph[v] {
            if st.idx[w].is_none() {
                strongconnect(w, graph, st);
                st.low[v] = st.low[v].min(st.low[w]);
            } else if st.on_stack[w] {
                st.low[v] = st.low[v].min(st.idx[w].unwrap());
            }
        }

        if st.low[v] == st.idx[v].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().expect("stack underflow");
                st.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            st.comps.push(comp);
        }
    }

    let mut st = TarjanState {
        index: 0,
        stack: Vec::new(),
        on_stack: vec![false; n],
        idx: vec![None; n],
        low: vec![0; n],
        comps: Vec::new(),
    };
    // Roots are visited in decreasing vertex order so that, after the
    // topological reversal below, mutually unreachable components come out
    // lowest-index-first.
    for v in (0..n).rev() {
        if st.idx[v].is_none() {
            strongconnect(v, &graph, &mut st);
        }
    }
    st.comps.reverse();
    Ok(st.comps)
}

/// Spectral radius of a square nonnegative `B`, with the strictly positive
/// Perron vector (`||u||_1 = 1`) when `B` is irreducible and `rho > 0`.
///
/// Power iteration runs on `B + I`, which is primitive whenever `B` is
/// irreducible, so periodic matrices converge too; `rho(B) = rho(B+I) - 1`.
/// For irreducible input the stop is the certified Collatz–Wielandt bracket
/// `min_i (Cv)_i/v_i <= rho(C) <= max_i (Cv)_i/v_i`; for reducible input the
/// bracket need not close and a stagnating `l_1` quotient is accepted
/// instead. Iteration cap `100 n^2`, after which the run is a tolerance
/// failure.
pub fn perron_root(b: &Matrix, tol: f64) -> Result<(f64, Option<Vec<f64>>)> {
    require_square_nonnegative(b)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = b.rows();
    let irreducible = is_irreducible(b)?;

    // v > 0 is preserved: (B+I)v >= v entrywise.
    let mut v = vec![1.0 / n as f64; n];
    let cap = (100 * n * n).max(64);
    let mut prev_quot = f64::NAN;
    let mut stagnant = 0;
    let mut result: Option<f64> = None;
    for _ in 0..cap {
        let bv = b.matvec(&v).expect("square matvec");
        let w: Vec<f64> = bv.iter().zip(&v).map(|(a, b)| a + b).collect();
        let ratios: Vec<f64> = w.iter().zip(&v).map(|(wi, vi)| wi / vi).collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let quot: f64 = w.iter().sum::<f64>() / v.iter().sum::<f64>();
        if hi - lo <= tol.max(5e-15) * lo.max(1.0) {
            result = Some((lo + hi) / 2.0 - 1.0);
            break;
        }
        if (quot - prev_quot).abs() <= 0.01 * tol * quot.max(1.0) {
            stagnant += 1;
            if !irreducible && stagnant >= 8 {
                result = Some(quot - 1.0);
                break;
            }
        } else {
            stagnant = 0;
        }
        prev_quot = quot;
        let sum: f64 = w.iter().sum();
        v = w.into_iter().map(|x| x / sum).collect();
    }
    let Some(rho) = result else {
        return Err(Error::ToleranceFailure(format!(
            "power iteration on a {n}x{n} matrix did not converge within {cap} steps"
        )));
    };
    let rho = rho.max(0.0);
    if irreducible && rho > 0.0 {
        Ok((rho, Some(v)))
    } else {
        Ok((rho, None))
    }
}

/// A size-1 block is irreducible only when its entry is positive (the 1x1
/// zero block is reducible by convention).
fn is_irreducible(b: &Matrix) -> Result<bool> {
    let comps = scc_decompose(b)?;
    if comps.len() != 1 {
        return Ok(false);
    }
    Ok(b.rows() > 1 || b.get(0, 0) > 0.0)
}

/// Rows and columns of `A` restricted to the index set, in increasing index
/// order. Duplicates are collapsed (set semantics).
pub fn principal_submatrix(a: &Matrix, indices: &[usize]) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if indices.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let mut idx = indices.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if let Some(&bad) = idx.iter().find(|&&i| i >= a.rows()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: a.rows(),
        });
    }
    let m = idx.len();
    let mut data = Vec::with_capacity(m * m);
    for &i in &idx {
        for &j in &idx {
            data.push(a.get(i, j));
        }
    }
    Matrix::new(m, m, data)
}

/// Full SCC decomposition of `B = |A|` with per-block Perron data, the
/// global spectral radius, and the first block (in topological order)
/// attaining it within `tol`.
///
/// The attaining block's Perron pair is re-verified directly on the block:
/// `|| B_I u - rho u ||_inf <= 1e-8 * rho` whenever `rho > 0`.
pub fn frobenius_form(a: &Matrix, tol: f64) -> Result<FrobeniusDecomposition> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let b = a.entrywise_abs();
    let comps = scc_decompose(&b)?;
    let inner_tol = tol.min(1e-10);
    let mut blocks = Vec::with_capacity(comps.len());
    for indices in comps {
        let sub = principal_submatrix(&b, &indices)?;
        let irreducible = indices.len() > 1 || sub.get(0, 0) > 0.0;
        let (rho, perron_vector) = if indices.len() == 1 {
            let d = sub.get(0, 0);
            (d, if d > 0.0 { Some(vec![1.0]) } else { None })
        } else {
            perron_root(&sub, inner_tol)?
        };
        blocks.push(FrobeniusBlock {
            indices,
            rho,
            irreducible,
            perron_vector,
        });
    }
    let rho = blocks.iter().map(|bl| bl.rho).fold(0.0_f64, f64::max);
    let attaining = blocks
        .iter()
        .position(|bl| bl.rho >= rho - tol * rho.max(1.0))
        .expect("the maximum is attained by some block");

    if rho > 0.0 {
        let bl = &blocks[attaining];
        let u = bl
            .perron_vector
            .as_ref()
            .expect("a block attaining rho > 0 is irreducible and carries a Perron vector");
        let sub = principal_submatrix(&b, &bl.indices)?;
        let bu = sub.matvec(u).expect("dimensions match by construction");
        let resid = bu
            .iter()
            .zip(u)
            .map(|(a, b)| (a - bl.rho * b).abs())
            .fold(0.0_f64, f64::max);
        if resid > 1e-8 * rho {
            return Err(Error::ToleranceFailure(format!(
                "Perron residual {resid:.3e} exceeds 1e-8 * rho for the attaining block"
            )));
        }
    }
    Ok(FrobeniusDecomposition {
        blocks,
        rho,
        attaining,
    })
}

fn require_square_nonnegative(b: &Matrix) -> Result<()> {
    if !b.is_square() {
        return Err(Error::NotSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            if b.get(i, j) < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: j });
            }
        }
    }
    Ok(())
}
