use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, EigVals, FactorizeInto, Solve};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::operators::{FockOperators, LiouvilleOperator, Parity};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Threshold on `|lambda| / gamma` for counting a mode as stationary.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-8;
/// Real parts closer than this (relative) are treated as ties when sorting.
const TIE_TOL: f64 = 1e-10;

/// Liouvillian eigenvalues sorted by descending real part, with the
/// eigenmatrices of the leading modes.
#[derive(Debug, Clone)]
pub struct LiouvilleSpectrum {
    pub params: ModelParams,
    pub n_max: usize,
    pub eigenvalues: Vec<C64>,
    pub parities: Vec<Parity>,
    /// Eigenmatrices for the first `eigenmatrices.len()` eigenvalues.
    pub eigenmatrices: Vec<Array2<C64>>,
}

impl LiouvilleSpectrum {
    /// `-Re lambda_1`.
    pub fn gap(&self) -> f64 {
        -self.eigenvalues.get(1).map_or(f64::NAN, |z| z.re)
    }

    pub fn lambda(&self, k: usize) -> C64 {
        self.eigenvalues[k]
    }

    /// Number of eigenvalues with `|lambda| < ZERO_EIGENVALUE_TOL * gamma`.
    pub fn zero_count(&self) -> usize {
        let tol = ZERO_EIGENVALUE_TOL * self.params.gamma;
        self.eigenvalues.iter().filter(|z| z.norm() < tol).count()
    }

    pub fn leading(&self, k: usize) -> &[C64] {
        &self.eigenvalues[..k.min(self.eigenvalues.len())]
    }
}

fn eig_err(dim: usize) -> impl Fn(ndarray_linalg::error::LinalgError) -> Error {
    move |e| Error::Eigensolver {
        dim,
        message: e.to_string(),
    }
}

fn solve_err(dim: usize) -> impl Fn(ndarray_linalg::error::LinalgError) -> Error {
    move |e| Error::LinearSolve {
        dim,
        message: e.to_string(),
    }
}

/// Sort descending by real part; near-equal real parts by ascending `|Im|`
/// then ascending `Im`.
fn sort_order(values: &[C64]) -> Vec<usize> {
    let scale = values.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].re.total_cmp(&values[a].re));
    let tol = TIE_TOL * scale;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && (values[idx[start]].re - values[idx[end]].re).abs() <= tol {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| {
            let (za, zb) = (values[a], values[b]);
            za.im
                .abs()
                .total_cmp(&zb.im.abs())
                .then(za.im.total_cmp(&zb.im))
                .then(zb.re.total_cmp(&za.re))
        });
        start = end;
    }
    idx
}

fn scatter(l: &LiouvilleOperator, idx: &[usize], v: &Array1<C64>) -> Array2<C64> {
    let d = l.fock_dim();
    let mut m = Array2::<C64>::zeros((d, d));
    for (k, &i) in idx.iter().enumerate() {
        m[[i / d, i % d]] = v[k];
    }
    m
}

/// Unit-trace stationary state from the even sector with one balance
/// equation replaced by the trace condition.
pub fn steady_state(l: &LiouvilleOperator) -> Result<Array2<C64>> {
    let (idx, mut block) = l.block(Parity::Even);
    let d = l.fock_dim();
    let n = idx.len();
    let mut rhs = Array1::<C64>::zeros(n);
    for (k, &i) in idx.iter().enumerate() {
        block[[0, k]] = if i / d == i % d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
    }
    rhs[0] = C64::new(1.0, 0.0);
    let v = block.solve_into(rhs).map_err(solve_err(n))?;
    let rho = scatter(l, &idx, &v);
    // Hermitian part; the anti-Hermitian remainder is solver noise
    Ok(hermitize(&rho))
}

fn hermitize(m: &Array2<C64>) -> Array2<C64> {
    (m + &m.t().mapv(|z| z.conj())) * C64::new(0.5, 0.0)
}

/// Eigenvector of `block` for the (already known) eigenvalue `lambda`.
fn inverse_iteration(block: &Array2<C64>, lambda: C64, seed: u64) -> Result<Array1<C64>> {
    let n = block.nrows();
    let shift = lambda + C64::new(1.0, 1.0) * (1e-10 * (1.0 + lambda.norm()));
    let mut a = block.clone();
    for k in 0..n {
        a[[k, k]] -= shift;
    }
    let lu = a.factorize_into().map_err(solve_err(n))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Array1<C64> = (0..n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    for _ in 0..3 {
        let w = lu.solve(&v).map_err(solve_err(n))?;
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Eigensolver {
                dim: n,
                message: "inverse iteration produced a non-finite vector".into(),
            });
        }
        v = w / C64::new(norm, 0.0);
    }
    Ok(v)
}

struct BlockValues {
    parity: Parity,
    idx: Vec<usize>,
    block: Array2<C64>,
    values: Array1<C64>,
}

fn block_values(l: &LiouvilleOperator, parity: Parity) -> Result<BlockValues> {
    let (idx, block) = l.block(parity);
    let n = idx.len();
    let values = block.eigvals().map_err(eig_err(n))?;
    Ok(BlockValues {
        parity,
        idx,
        block,
        values,
    })
}

/// All eigenvalues, with eigenmatrices for the leading `n_vectors` modes.
///
/// The two parity sectors are diagonalized separately. The stationary mode
/// comes from a trace-constrained linear solve, the others from inverse
/// iteration on their sector.
pub fn diagonalize(l: &LiouvilleOperator, n_vectors: usize) -> Result<LiouvilleSpectrum> {
    let blocks = [block_values(l, Parity::Even)?, block_values(l, Parity::Odd)?];
    let mut values = Vec::with_capacity(l.dim());
    let mut origin = Vec::with_capacity(l.dim());
    for (b, bv) in blocks.iter().enumerate() {
        for &z in bv.values.iter() {
            values.push(z);
            origin.push(b);
        }
    }
    let order = sort_order(&values);
    let eigenvalues: Vec<C64> = order.iter().map(|&k| values[k]).collect();
    let parities: Vec<Parity> = order.iter().map(|&k| blocks[origin[k]].parity).collect();
    let mut eigenmatrices = Vec::with_capacity(n_vectors);
    for (rank, &k) in order.iter().take(n_vectors).enumerate() {
        let bv = &blocks[origin[k]];
        let m = if rank == 0 && bv.parity == Parity::Even {
            steady_state(l)?
        } else {
            let v = inverse_iteration(&bv.block, values[k], rank as u64)?;
            scatter(l, &bv.idx, &v)
        };
        eigenmatrices.push(m);
    }
    Ok(LiouvilleSpectrum {
        params: l.params,
        n_max: l.n_max,
        eigenvalues,
        parities,
        eigenmatrices,
    })
}

/// Every eigenpair from a dense eigen-decomposition of each sector.
pub fn diagonalize_full(l: &LiouvilleOperator) -> Result<LiouvilleSpectrum> {
    let mut values = Vec::new();
    let mut mats = Vec::new();
    let mut pars = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let (idx, block) = l.block(parity);
        let (vals, vecs) = block.eig().map_err(eig_err(idx.len()))?;
        for (k, &z) in vals.iter().enumerate() {
            values.push(z);
            mats.push(scatter(l, &idx, &vecs.column(k).to_owned()));
            pars.push(parity);
        }
    }
    let order = sort_order(&values);
    Ok(LiouvilleSpectrum {
        params: l.params,
        n_max: l.n_max,
        eigenvalues: order.iter().map(|&k| values[k]).collect(),
        parities: order.iter().map(|&k| pars[k]).collect(),
        eigenmatrices: order.iter().map(|&k| mats[k].clone()).collect(),
    })
}

/// Stationary state and the slowest decaying mode, normalized.
#[derive(Debug, Clone)]
pub struct SteadyPair {
    /// Unit trace.
    pub sigma0: Array2<C64>,
    /// Hermitian, unit trace norm, oriented so that
    /// `Tr[(a + a^dag)(sigma0 + sigma1)] >= 0`.
    pub sigma1: Array2<C64>,
    pub lambda1: C64,
    /// Most negative eigenvalue of `sigma0` when it is below `-1e-6`,
    /// which signals an insufficient cutoff.
    pub negativity: Option<f64>,
}

pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Result<Array1<f64>> {
    use ndarray_linalg::{EigValsh, UPLO};
    let h = hermitize(m);
    h.eigvalsh(UPLO::Lower).map_err(eig_err(m.nrows()))
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// Sum of singular values of a Hermitian matrix.
pub fn trace_norm(m: &Array2<C64>) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|x| x.abs()).sum())
}

/// Remove the arbitrary global phase of an eigenmatrix whose eigenvalue is
/// real so that it becomes (numerically) Hermitian.
fn align_phase(m: &Array2<C64>) -> Array2<C64> {
    let d = m.nrows();
    let mut best = (0.0, C64::new(1.0, 0.0));
    for r in 0..d {
        for c in r..d {
            let prod = m[[r, c]] * m[[c, r]];
            if prod.norm() > best.0 {
                best = (prod.norm(), prod);
            }
        }
    }
    if best.0 == 0.0 {
        return m.clone();
    }
    // m = e^{-i chi} X with X Hermitian gives m_rc m_cr = e^{-2 i chi} |X_rc|^2
    let phase = (best.1 / best.0).sqrt().conj();
    m.mapv(|z| z * phase)
}

pub fn steady_pair(spec: &LiouvilleSpectrum) -> Result<SteadyPair> {
    if spec.eigenmatrices.len() < 2 {
        return Err(Error::InvalidData(
            "spectrum needs eigenmatrices for the two leading modes".into(),
        ));
    }
    let raw0 = hermitize(&spec.eigenmatrices[0]);
    let tr = trace(&raw0);
    if tr.norm() == 0.0 {
        return Err(Error::InvalidData("leading mode is traceless".into()));
    }
    let sigma0 = raw0.mapv(|z| z / tr);
    let sigma0 = hermitize(&sigma0);
    let min_eig = hermitian_eigenvalues(&sigma0)?
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let negativity = (min_eig < -1e-6).then_some(min_eig);

    let mut sigma1 = hermitize(&align_phase(&spec.eigenmatrices[1]));
    let norm = trace_norm(&sigma1)?;
    if !(norm > 0.0) {
        return Err(Error::InvalidData("second mode has no Hermitian part".into()));
    }
    sigma1.mapv_inplace(|z| z / norm);
    let d = sigma1.nrows();
    let mut x_sum = C64::new(0.0, 0.0);
    for m in 1..d {
        let s = (m as f64).sqrt();
        // Tr[(a + a^dag) X] = sum_m sqrt(m) (X_{m,m-1} + X_{m-1,m})
        x_sum += s * ((sigma0[[m, m - 1]] + sigma1[[m, m - 1]]) + (sigma0[[m - 1, m]] + sigma1[[m - 1, m]]));
    }
    if x_sum.re < 0.0 {
        sigma1.mapv_inplace(|z| -z);
    }
    Ok(SteadyPair {
        sigma0,
        sigma1,
        lambda1: spec.eigenvalues[1],
        negativity,
    })
}

/// `Tr[a^dag a rho]`.
pub fn observable_n(state: &Array2<C64>, ops: &FockOperators) -> f64 {
    trace(&ops.number.dot(state)).re
}

/// `Tr[op rho]`.
pub fn expectation(state: &Array2<C64>, op: &Array2<C64>) -> C64 {
    trace(&op.dot(state))
}

/// Occupation weight held by the top 10% of Fock levels.
pub fn tail_weight(state: &Array2<C64>) -> f64 {
    let d = state.nrows();
    let start = d - d.div_ceil(10);
    (start..d).map(|k| state[[k, k]].re.abs()).sum()
}
