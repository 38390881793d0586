//! Truncated Fourier series of a sampled matrix-valued function.

use std::f64::consts::TAU;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Ā(t) = A0 + Σ_k (C_k cos kω(t − t0) + S_k sin kω(t − t0)).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierFit {
    pub t0: f64,
    pub period: f64,
    pub mean: DMatrix<f64>,
    pub cos: Vec<DMatrix<f64>>,
    pub sin: Vec<DMatrix<f64>>,
    /// Max-norm of A − Ā over the samples.
    pub residual: f64,
}

impl FourierFit {
    pub fn harmonics(&self) -> usize {
        self.cos.len()
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let w = TAU / self.period * (t - self.t0);
        let (s1, c1) = w.sin_cos();
        let (mut s, mut c) = (0.0, 1.0);
        let mut out = self.mean.clone();
        for (ck, sk) in self.cos.iter().zip(&self.sin) {
            // angle addition keeps one sin_cos call per evaluation
            let (s_next, c_next) = (s * c1 + c * s1, c * c1 - s * s1);
            s = s_next;
            c = c_next;
            out.zip_zip_apply(ck, sk, |o, a, b| *o += a * c + b * s);
        }
        out
    }
}

/// Fits `n_harmonics` harmonics to `samples` taken at t0 + jT/N, j < N, by
/// trapezoidal projection (the least-squares solution on a uniform grid).
pub fn fourier_periodic_fit(samples: &[DMatrix<f64>], t0: f64, period: f64, n_harmonics: usize) -> Result<FourierFit> {
    let n = samples.len();
    if n <= 2 * n_harmonics {
        return Err(Error::Underdetermined {
            samples: n,
            harmonics: n_harmonics,
        });
    }
    if !(period > 0.0) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
    }
    let (rows, cols) = samples[0].shape();
    if samples.iter().any(|s| s.shape() != (rows, cols)) {
        return Err(Error::InvalidArgument("samples differ in shape".into()));
    }
    let mut mean = DMatrix::zeros(rows, cols);
    for s in samples {
        mean += s;
    }
    mean /= n as f64;
    let mut cos = Vec::with_capacity(n_harmonics);
    let mut sin = Vec::with_capacity(n_harmonics);
    for k in 1..=n_harmonics {
        let mut ck = DMatrix::zeros(rows, cols);
        let mut sk = DMatrix::zeros(rows, cols);
        for (j, s) in samples.iter().enumerate() {
            let (sw, cw) = (TAU * (k * j) as f64 / n as f64).sin_cos();
            ck.zip_apply(s, |o, a| *o += a * cw);
            sk.zip_apply(s, |o, a| *o += a * sw);
        }
        cos.push(ck * (2.0 / n as f64));
        sin.push(sk * (2.0 / n as f64));
    }
    let mut fit = FourierFit {
        t0,
        period,
        mean,
        cos,
        sin,
        residual: 0.0,
    };
    fit.residual = samples
        .iter()
        .enumerate()
        .map(|(j, s)| (s - fit.eval(t0 + period * j as f64 / n as f64)).amax())
        .fold(0.0, f64::max);
    Ok(fit)
}

/// Uniform sample abscissae t0 + jT/N, j < N.
pub fn sample_times(t0: f64, period: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| t0 + period * j as f64 / n as f64).collect()
}
