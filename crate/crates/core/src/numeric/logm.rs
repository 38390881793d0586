//! Real matrix logarithm.
//!
//! Matrices of the form I + N with N (nearly) nilpotent, which is what a
//! Keplerian monodromy looks like, are handled by the Mercator series.
//! Everything else goes through inverse scaling and squaring: Denman–Beavers
//! square roots until ‖X − I‖ is small, then a Gauss–Legendre (diagonal
//! Padé) approximant of log(I + X).

use nalgebra::{DMatrix, SymmetricEigen};

use super::jordan::{balance, eigenvalues, unbalance};
use crate::error::{Error, Result};

const PADE_NODES: usize = 8;
const ISS_TARGET: f64 = 0.1;
const MAX_SQRTS: usize = 64;

/// Λ = ln(M) / T with the principal real logarithm.
pub fn real_matrix_log(m: &DMatrix<f64>, period: f64) -> Result<DMatrix<f64>> {
    if !(period != 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid period {period}")));
    }
    Ok(logm(m)? / period)
}

pub fn logm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() || m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("logarithm needs a finite square matrix".into()));
    }
    let n = m.nrows();
    let (b, d) = balance(m);
    let scale = b.amax().max(f64::MIN_POSITIVE);
    for z in eigenvalues(&b)? {
        if z.norm() <= 1e-14 * scale {
            return Err(Error::NearSingular { condition: f64::INFINITY });
        }
        if z.re < 0.0 && z.im.abs() <= 1e-10 * z.norm() {
            return Err(Error::NegativeRealEigenvalue { re: z.re, im: z.im });
        }
    }
    let log_b = match mercator(&b) {
        Some(l) => l,
        None => inverse_scaling_squaring(&b)?,
    };
    let err = (log_b.exp() - &b).amax() / scale;
    if !(err <= 1e-8) {
        return Err(Error::LogNonConvergence(format!("exp(log M) misses M by {err:.3e} (n = {n})")));
    }
    Ok(unbalance(&log_b, &d))
}

/// log(I + N) = N − N²/2 + N³/3 − …, accepted only when the terms die off
/// quickly.
fn mercator(b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = b.nrows();
    let x = b - DMatrix::identity(n, n);
    let x_norm = x.amax();
    if x_norm == 0.0 {
        return Some(x);
    }
    let mut sum = x.clone();
    let mut power = x.clone();
    for k in 2..=60 {
        power = &power * &x;
        let p_norm = power.amax();
        if p_norm > 1e3 * x_norm || !p_norm.is_finite() {
            return None;
        }
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        sum += &power * (sign / k as f64);
        if p_norm / k as f64 <= 1e-17 * sum.amax() {
            return Some(sum);
        }
        // a nilpotent part vanishes by the n-th power; slow decay means
        // the spectrum is not clustered at 1
        if k > n + 1 && p_norm > 1e-3 * x_norm {
            return None;
        }
    }
    None
}

fn inverse_scaling_squaring(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = b.nrows();
    let id = DMatrix::identity(n, n);
    let mut x = b.clone();
    let mut s = 0;
    while (&x - &id).column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max) > ISS_TARGET {
        if s == MAX_SQRTS {
            return Err(Error::LogNonConvergence(format!("no convergence after {MAX_SQRTS} square roots")));
        }
        x = sqrtm(&x)?;
        s += 1;
    }
    Ok(pade_log(&(&x - &id))? * 2f64.powi(s as i32))
}

/// Denman–Beavers iteration for the principal square root.
fn sqrtm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..100 {
        let y_inv = y.clone().try_inverse().ok_or(Error::NearSingular { condition: f64::INFINITY })?;
        let z_inv = z.clone().try_inverse().ok_or(Error::NearSingular { condition: f64::INFINITY })?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let change = (&y_next - &y).amax();
        y = y_next;
        z = z_next;
        if change <= 1e-15 * y.amax() {
            return Ok(y);
        }
    }
    Err(Error::LogNonConvergence("square-root iteration did not converge".into()))
}

/// Gauss–Legendre nodes and weights on [0, 1] (Golub–Welsch).
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::zeros(m, m);
    for k in 1..m {
        let beta = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        jac[(k, k - 1)] = beta;
        jac[(k - 1, k)] = beta;
    }
    let eig = SymmetricEigen::new(jac);
    let nodes = eig.eigenvalues.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let weights = (0..m).map(|j| eig.eigenvectors[(0, j)].powi(2)).collect();
    (nodes, weights)
}

/// log(I + X) = ∫₀¹ X (I + tX)⁻¹ dt by Gauss–Legendre quadrature.
fn pade_log(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let (nodes, weights) = gauss_legendre(PADE_NODES);
    let mut out = DMatrix::zeros(n, n);
    for (t, w) in nodes.iter().zip(&weights) {
        let lhs = DMatrix::identity(n, n) + x * *t;
        let sol = lhs.lu().solve(x).ok_or(Error::NearSingular { condition: f64::INFINITY })?;
        out += sol * *w;
    }
    Ok(out)
}
