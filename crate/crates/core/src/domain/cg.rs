use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    None,
    Jacobi,
    /// Exact solves along grid lines (rings of polar grids, rows of Cartesian ones).
    #[default]
    Lines,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradient for an SPD operator.
///
/// `precondition(r, z)` applies an SPD approximation of the inverse. `x` holds
/// the initial guess on entry and the solution on exit. Converges when
/// `|b - A x| <= tol |b|`.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    precondition: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iterations: usize,
) -> Result<CgOutcome> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut res = dot(&r, &r).sqrt();
    if res <= tol * b_norm {
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: res / b_norm,
        });
    }
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = ax;
    for it in 1..=max_iterations {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Numerical(format!(
                "conjugate gradient broke down (p.Ap = {pap}) at iteration {it}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt();
        if res <= tol * b_norm {
            return Ok(CgOutcome {
                iterations: it,
                relative_residual: res / b_norm,
            });
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Numerical(format!(
        "conjugate gradient did not reach relative residual {tol:e} in {max_iterations} iterations (at {:e})",
        res / b_norm
    )))
}

/// The identity preconditioner.
pub fn identity(r: &[f64], z: &mut [f64]) {
    z.copy_from_slice(r);
}

/// Diagonal (Jacobi) preconditioning by `diagonal^{-1}`.
pub fn jacobi(diagonal: &[f64]) -> impl Fn(&[f64], &mut [f64]) {
    let inverse: Vec<f64> = diagonal.iter().map(|d| 1.0 / d).collect();
    move |r, z| {
        for ((z, r), d) in z.iter_mut().zip(r).zip(&inverse) {
            *z = r * d;
        }
    }
}
