use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Default cap on the superoperator dimension `(n_max + 1)^2`.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Truncated Fock-space operators and the Hamiltonian
/// `-omega_d a^dag a + (U/2) a^dag a^dag a a + (G/4) a^dag a^dag + (G^*/4) a a`.
#[derive(Debug, Clone)]
pub struct FockOperators {
    pub n_max: usize,
    pub a: Array2<C64>,
    pub a_dag: Array2<C64>,
    pub number: Array2<C64>,
    pub hamiltonian: Array2<C64>,
}

impl FockOperators {
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Parity `exp(i pi a^dag a)`.
    pub fn parity(&self) -> Array2<C64> {
        Array2::from_diag(&ndarray::Array1::from_iter(
            (0..self.dim()).map(|k| C64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)),
        ))
    }
}

fn check_nmax(n_max: usize) -> Result<()> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    Ok(())
}

/// `<k|H|k>`
fn h_diag(params: &ModelParams, k: usize) -> f64 {
    let k = k as f64;
    -params.omega_d * k + 0.5 * params.kerr * k * (k - 1.0)
}

/// `<k+2|H|k> = (G/4) sqrt((k+1)(k+2))`
fn h_raise2(params: &ModelParams, k: usize) -> C64 {
    let k = k as f64;
    0.25 * params.drive * ((k + 1.0) * (k + 2.0)).sqrt()
}

fn h_elem(params: &ModelParams, n_max: usize, r: usize, c: usize) -> C64 {
    if r == c {
        C64::new(h_diag(params, r), 0.0)
    } else if r == c + 2 && r <= n_max {
        h_raise2(params, c)
    } else if c == r + 2 && c <= n_max {
        h_raise2(params, r).conj()
    } else {
        C64::new(0.0, 0.0)
    }
}

pub fn build_hamiltonian(params: &ModelParams, n_max: usize) -> Result<FockOperators> {
    params.validate()?;
    check_nmax(n_max)?;
    let d = n_max + 1;
    let mut a = Array2::<C64>::zeros((d, d));
    for m in 1..d {
        a[[m - 1, m]] = C64::new((m as f64).sqrt(), 0.0);
    }
    let a_dag = a.t().mapv(|z| z.conj());
    let number = Array2::from_diag(&ndarray::Array1::from_iter(
        (0..d).map(|k| C64::new(k as f64, 0.0)),
    ));
    let hamiltonian = Array2::from_shape_fn((d, d), |(r, c)| h_elem(params, n_max, r, c));
    Ok(FockOperators {
        n_max,
        a,
        a_dag,
        number,
        hamiltonian,
    })
}

/// Compressed sparse row storage for the superoperator.
#[derive(Debug, Clone)]
pub struct Csr {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<C64>,
}

impl Csr {
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut sums = vec![0.0; self.dim];
        for (c, v) in self.cols.iter().zip(&self.vals) {
            sums[*c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

/// Parity sector of a vectorized operator `|m><n|`, from `(m + n) mod 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// The vectorized Lindbladian, row-major (`rho_{mn}` at index `m (n_max+1) + n`):
/// `-i H (x) 1 + i 1 (x) H^T + gamma (a (x) a^* - 1 (x) a^T a^* / 2 - a^dag a (x) 1 / 2)`.
#[derive(Debug, Clone)]
pub struct LiouvilleOperator {
    pub params: ModelParams,
    pub n_max: usize,
    pub sparse: Csr,
}

impl LiouvilleOperator {
    pub fn dim(&self) -> usize {
        self.sparse.dim
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let n = self.dim();
        let mut m = Array2::<C64>::zeros((n, n));
        for r in 0..n {
            for k in self.sparse.row_ptr[r]..self.sparse.row_ptr[r + 1] {
                m[[r, self.sparse.cols[k]]] = self.sparse.vals[k];
            }
        }
        m
    }

    /// Indices of one parity sector, in increasing order.
    pub fn sector(&self, parity: Parity) -> Vec<usize> {
        let d = self.fock_dim();
        let want = match parity {
            Parity::Even => 0,
            Parity::Odd => 1,
        };
        (0..self.dim())
            .filter(|i| (i / d + i % d) % 2 == want)
            .collect()
    }

    /// Dense restriction to one parity sector; the sectors are invariant.
    pub fn block(&self, parity: Parity) -> (Vec<usize>, Array2<C64>) {
        let idx = self.sector(parity);
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = Array2::<C64>::zeros((idx.len(), idx.len()));
        for (k, &r) in idx.iter().enumerate() {
            for j in self.sparse.row_ptr[r]..self.sparse.row_ptr[r + 1] {
                let c = pos[self.sparse.cols[j]];
                debug_assert!(c != usize::MAX, "parity sectors must not couple");
                m[[k, c]] = self.sparse.vals[j];
            }
        }
        (idx, m)
    }

    /// `L vec(rho)` reshaped back to a matrix.
    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let d = self.fock_dim();
        let x: Vec<C64> = rho.iter().copied().collect();
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        self.sparse.matvec(&x, &mut y);
        Array2::from_shape_vec((d, d), y).expect("square reshape")
    }
}

pub fn build_liouvillian(params: &ModelParams, n_max: usize) -> Result<LiouvilleOperator> {
    build_liouvillian_capped(params, n_max, DEFAULT_DIM_CAP)
}

pub fn build_liouvillian_capped(params: &ModelParams, n_max: usize, cap: usize) -> Result<LiouvilleOperator> {
    params.validate()?;
    check_nmax(n_max)?;
    let d = n_max + 1;
    let dim = d * d;
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let i = C64::i();
    let gamma = params.gamma;
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::with_capacity(dim * 9);
    let mut vals = Vec::with_capacity(dim * 9);
    row_ptr.push(0);
    let mut row: Vec<(usize, C64)> = Vec::with_capacity(12);
    for m in 0..d {
        for n in 0..d {
            row.clear();
            // -i H rho: coefficient of rho_{kn} is -i H_{mk}
            for k in m.saturating_sub(2)..=(m + 2).min(n_max) {
                let h = h_elem(params, n_max, m, k);
                if h != C64::new(0.0, 0.0) {
                    row.push((k * d + n, -i * h));
                }
            }
            // +i rho H: coefficient of rho_{mk} is +i H_{kn}
            for k in n.saturating_sub(2)..=(n + 2).min(n_max) {
                let h = h_elem(params, n_max, k, n);
                if h != C64::new(0.0, 0.0) {
                    row.push((m * d + k, i * h));
                }
            }
            // gamma a rho a^dag
            if m < n_max && n < n_max {
                let w = gamma * (((m + 1) * (n + 1)) as f64).sqrt();
                row.push(((m + 1) * d + n + 1, C64::new(w, 0.0)));
            }
            // -gamma/2 {a^dag a, rho}
            row.push((m * d + n, C64::new(-0.5 * gamma * (m + n) as f64, 0.0)));
            row.sort_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(c, v) in &row {
                if c == last {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = c;
                }
            }
            row_ptr.push(cols.len());
        }
    }
    Ok(LiouvilleOperator {
        params: *params,
        n_max,
        sparse: Csr {
            dim,
            row_ptr,
            cols,
            vals,
        },
    })
}
