//! Lanczos propagation `exp(-i H t) v` for Hermitian operators given by their action.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

/// Krylov dimension per sub-step.
pub const KRYLOV_DIM: usize = 30;

/// One Lanczos step of size `t`. Returns the propagated vector and the
/// a-posteriori error estimate `beta_m |[exp(-i T t)]_{m,0}|`.
fn lanczos_step<F>(apply: &F, v: &CVector, t: f64, m: usize) -> (CVector, f64)
where
    F: Fn(&CVector) -> CVector,
{
    let norm = v.norm();
    let mut basis: Vec<CVector> = vec![v / C64::new(norm, 0.0)];
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut last_beta = 0.0;
    for k in 0..m {
        let mut w = apply(&basis[k]);
        let a = basis[k].dotc(&w).re;
        alpha.push(a);
        // Full reorthogonalization keeps the small Krylov spaces clean.
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w -= b * c;
            }
        }
        let bnorm = w.norm();
        if k + 1 == m || bnorm < 1e-13 {
            last_beta = bnorm;
            break;
        }
        beta.push(bnorm);
        basis.push(w / C64::new(bnorm, 0.0));
    }
    let k = alpha.len();
    let mut tri = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        tri[(i, i)] = alpha[i];
        if i + 1 < k {
            tri[(i, i + 1)] = beta[i];
            tri[(i + 1, i)] = beta[i];
        }
    }
    let eig = tri.symmetric_eigen();
    // c = exp(-i T t) e_0
    let coeff: DVector<C64> = DVector::from_fn(k, |r, _| {
        (0..k)
            .map(|j| {
                let phase = C64::new(0.0, -eig.eigenvalues[j] * t).exp();
                phase * eig.eigenvectors[(r, j)] * eig.eigenvectors[(0, j)]
            })
            .sum()
    });
    let mut out = CVector::zeros(v.len());
    for (b, c) in basis.iter().zip(coeff.iter()) {
        out += b * (*c * norm);
    }
    (out, last_beta * coeff[k - 1].norm() * norm)
}

/// `exp(-i H t) v`, sub-stepping until each step's error estimate is below `tol`.
pub fn expm_multiply<F>(apply: F, v: &CVector, t: f64, tol: f64) -> Result<CVector>
where
    F: Fn(&CVector) -> CVector,
{
    let mut out = v.clone();
    let mut remaining = t;
    let mut h = t;
    let mut halvings = 0;
    while remaining.abs() > 0.0 {
        let step = if h.abs() > remaining.abs() { remaining } else { h };
        let (next, err) = lanczos_step(&apply, &out, step, KRYLOV_DIM);
        if err <= tol || halvings > 60 {
            if err > tol {
                return Err(Error::NoConvergence(format!("Krylov error {err:e} above {tol:e}")));
            }
            out = next;
            remaining -= step;
        } else {
            h = step / 2.0;
            halvings += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    #[test]
    fn matches_dense_exponential() {
        let d = 60;
        let h = CMatrix::from_fn(d, d, |r, c| {
            let x = ((r * 13 + c * 7) % 11) as f64 - 5.0 + ((r * c) % 3) as f64;
            let y = ((r * 5 + c * 17) % 7) as f64 - 3.0;
            C64::new(x, if r == c { 0.0 } else { y })
        });
        let h = (&h + h.adjoint()) * C64::new(0.1, 0.0);
        let v = CVector::from_fn(d, |r, _| C64::new(1.0 / (1.0 + r as f64), 0.0)).normalize();
        let t = 3.7;
        let got = expm_multiply(|x| &h * x, &v, t, 1e-12).unwrap();
        let eig = h.clone().symmetric_eigen();
        let u = &eig.eigenvectors;
        let phases = CVector::from_fn(d, |j, _| C64::new(0.0, -eig.eigenvalues[j] * t).exp());
        let want = u * (u.adjoint() * &v).component_mul(&phases);
        assert!((got - want).norm() < 1e-9);
    }
}
