use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::operators::LiouvilleOperator;
use crate::error::{Error, Result};

/// Propagate `rho` by `e^{L t}` with a truncated Taylor series.
///
/// The interval is split so that each substep has `||L dt||_1 <= 1`, and each
/// substep's series is summed until the next term drops below `tol`.
pub fn evolve(l: &LiouvilleOperator, rho: &Array2<C64>, t: f64, tol: f64) -> Result<Array2<C64>> {
    let d = l.fock_dim();
    if rho.dim() != (d, d) {
        return Err(Error::InvalidData(format!(
            "state has shape {:?}, expected ({d}, {d})",
            rho.dim()
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("evolution time must be >= 0, got {t}")));
    }
    let norm = l.sparse.norm1();
    let steps = ((norm * t).ceil() as usize).max(1);
    let dt = t / steps as f64;
    let mut v: Vec<C64> = rho.iter().copied().collect();
    let mut term = vec![C64::new(0.0, 0.0); v.len()];
    let mut next = vec![C64::new(0.0, 0.0); v.len()];
    for _ in 0..steps {
        term.copy_from_slice(&v);
        let mut acc = v.clone();
        for k in 1..200 {
            l.sparse.matvec(&term, &mut next);
            let f = C64::new(dt / k as f64, 0.0);
            let mut size = 0.0f64;
            for (tk, nk) in term.iter_mut().zip(&next) {
                *tk = nk * f;
                size = size.max(tk.norm());
            }
            for (a, tk) in acc.iter_mut().zip(&term) {
                *a += tk;
            }
            if size < tol {
                break;
            }
        }
        v = acc;
    }
    Ok(Array2::from_shape_vec((d, d), v).expect("shape checked above"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::operators::build_liouvillian;
    use crate::params::ModelParams;

    #[test]
    fn coherence_decays_at_half_rate() {
        let p = ModelParams::resonant(0.0, 0.0, 1.0).unwrap();
        let l = build_liouvillian(&p, 3).unwrap();
        let mut rho = Array2::<C64>::zeros((4, 4));
        rho[[1, 1]] = C64::new(1.0, 0.0);
        rho[[0, 1]] = C64::new(0.2, 0.0);
        let out = evolve(&l, &rho, 2.0, 1e-15).unwrap();
        let e = (-2.0f64).exp();
        assert!((out[[1, 1]].re - e).abs() < 1e-12);
        assert!((out[[0, 0]].re - (1.0 - e)).abs() < 1e-12);
        assert!((out[[0, 1]].re - 0.2 * (-1.0f64).exp()).abs() < 1e-12);
    }
}
