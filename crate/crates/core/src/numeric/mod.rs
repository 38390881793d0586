//! Numerical Floquet decomposition of a periodic linear plant.
//!
//! Pipeline: sample A(t) over one period, fit a truncated Fourier series,
//! integrate the state-transition matrix of the fit, take Λ = ln Φ(T) / T,
//! recover P(t) = Φ(t) e^{−Λ(t − t0)}, and split the solution into
//! spectral-cluster contributions of Λ.

pub mod fourier;
pub mod jordan;
pub mod logm;

use nalgebra::{Complex, DMatrix, DVector, Matrix6};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ode::{integrate, Tolerances};

pub use fourier::{fourier_periodic_fit, sample_times, FourierFit};
pub use jordan::{analyze, balance, spectral_projector, EigenCluster, Eigenstructure, JordanOptions};
pub use logm::{logm, real_matrix_log};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericConfig {
    pub samples: usize,
    pub harmonics: usize,
    /// Number of uniformly spaced LF samples over the period, endpoints included.
    pub lf_samples: usize,
    /// Relative ‖A(t + T) − A(t)‖ above which the plant is rejected.
    pub aperiodicity_threshold: f64,
    pub tol: Tolerances,
    pub jordan: JordanOptions,
    /// Integrate the Fourier fit instead of the plant itself.
    pub use_fit: bool,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            samples: 1024,
            harmonics: 32,
            lf_samples: 129,
            aperiodicity_threshold: 1e-8,
            tol: Tolerances::default(),
            jordan: JordanOptions::default(),
            use_fit: true,
        }
    }
}

/// Adapts a fixed-size 6×6 plant to the dynamic interface used here.
pub fn dynamic_plant<F>(plant: F) -> impl Fn(f64) -> Result<DMatrix<f64>>
where
    F: Fn(f64) -> Result<Matrix6<f64>>,
{
    move |t| plant(t).map(|m| DMatrix::from_column_slice(6, 6, m.as_slice()))
}

fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

fn unflatten(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

/// Φ(t) at each output abscissa, with Φ(t0) = I.
pub fn integrate_stm<F>(plant: F, t0: f64, outputs: &[f64], tol: Tolerances) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    let n = plant(t0)?.nrows();
    let y0 = flatten(&DMatrix::identity(n, n));
    let ys = integrate(|t, y| Ok(flatten(&(plant(t)? * unflatten(y, n)))), t0, &y0, outputs, tol)?;
    Ok(ys.iter().map(|y| unflatten(y, n)).collect())
}

/// P(t) = Φ(t) e^{−Λ(t − t0)}.
pub fn lf_from_stm(stms: &[DMatrix<f64>], times: &[f64], t0: f64, lambda: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    stms.iter()
        .zip(times)
        .map(|(phi, &t)| phi * (lambda * -(t - t0)).exp())
        .collect()
}

/// Largest relative ‖A(t + T) − A(t)‖ over a few probe points in the period.
pub fn periodicity_defect<F>(plant: &F, t0: f64, period: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    let mut worst: f64 = 0.0;
    let mut scale = f64::MIN_POSITIVE;
    for j in 0..8 {
        let t = t0 + period * j as f64 / 8.0;
        let a = plant(t)?;
        scale = scale.max(a.amax());
        worst = worst.max((plant(t + period)? - a).amax());
    }
    Ok(worst / scale)
}

/// Golden-section search for the period in `[lo, hi]` minimizing the
/// periodicity defect. Returns the period and its defect.
pub fn search_period<F>(plant: &F, t0: f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("invalid period bracket [{lo}, {hi}]")));
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = periodicity_defect(plant, t0, c)?;
    let mut fd = periodicity_defect(plant, t0, d)?;
    for _ in 0..200 {
        if (b - a).abs() <= tol * b.abs() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = periodicity_defect(plant, t0, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = periodicity_defect(plant, t0, d)?;
        }
    }
    let t = 0.5 * (a + b);
    Ok((t, periodicity_defect(plant, t0, t)?))
}

/// Relative mismatch between det Φ(T) and exp ∫ tr A dt.
pub fn liouville_error<F>(plant: &F, t0: f64, period: f64, monodromy: &DMatrix<f64>, tol: Tolerances) -> Result<f64>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    let y0 = DVector::from_element(1, 0.0);
    let trace = integrate(|t, _| Ok(DVector::from_element(1, plant(t)?.trace())), t0, &y0, &[t0 + period], tol)?;
    let expected = trace[0][0].exp();
    Ok((monodromy.determinant() - expected).abs() / expected.abs())
}

/// Contribution of one eigenvalue cluster (or conjugate pair of clusters)
/// to x(t) = P(t) e^{Λ(t − t0)} x0.
#[derive(Debug, Clone)]
pub struct ModeSampler {
    pub mode_index: usize,
    pub eigenvalue: Complex64,
    pub chain: usize,
    pub secular: bool,
    pub conjugate_pair: bool,
    projector: DMatrix<Complex64>,
    nilpotent: DMatrix<Complex64>,
}

impl ModeSampler {
    /// P(t) e^{μ dt} Σ_j dt^j/j! N^j Π x0, made real.
    pub fn eval(&self, p: &DMatrix<f64>, dt: f64, x0: &DVector<f64>) -> DVector<f64> {
        let x0c = x0.map(|x| Complex::new(x, 0.0));
        let mut term = &self.projector * x0c;
        let mut sum = term.clone();
        for j in 1..self.chain {
            term = &self.nilpotent * term * Complex::new(dt / j as f64, 0.0);
            sum += &term;
        }
        let z = sum * (self.eigenvalue * dt).exp();
        let factor = if self.conjugate_pair { 2.0 } else { 1.0 };
        p * z.map(|c| c.re * factor)
    }
}

fn build_samplers(lambda: &DMatrix<f64>, eigen: &Eigenstructure) -> Result<Vec<ModeSampler>> {
    let n = lambda.nrows();
    let scale = lambda.amax().max(f64::MIN_POSITIVE);
    let lc = lambda.map(|x| Complex::new(x, 0.0));
    let mut out = Vec::new();
    for cluster in &eigen.clusters {
        let mu = cluster.eigenvalue;
        let real = mu.im.abs() <= 1e-9 * scale.max(mu.norm());
        if !real && mu.im < 0.0 {
            continue;
        }
        let projector = spectral_projector(lambda, cluster)?;
        let nilpotent = &lc - DMatrix::<Complex64>::identity(n, n) * mu;
        let nilpotent = &nilpotent * &projector;
        out.push(ModeSampler {
            mode_index: out.len(),
            eigenvalue: if real { Complex::new(mu.re, 0.0) } else { mu },
            chain: cluster.max_chain().max(1),
            secular: cluster.max_chain() > 1 || mu.re.abs() > 1e-9 * scale,
            conjugate_pair: !real,
            projector,
            nilpotent,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct NumericFloquet {
    pub t0: f64,
    pub period: f64,
    pub fit: Option<FourierFit>,
    /// Max-norm fit residual relative to max |A|.
    pub fit_residual: f64,
    pub periodicity_defect: f64,
    pub liouville_error: f64,
    pub monodromy: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
    pub times: Vec<f64>,
    pub lf_samples: Vec<DMatrix<f64>>,
    pub eigen: Eigenstructure,
    pub modes: Vec<ModeSampler>,
}

impl NumericFloquet {
    /// x at `times[idx] + k T`.
    pub fn reconstruct(&self, idx: usize, periods: u32, x0: &DVector<f64>) -> DVector<f64> {
        let dt = self.times[idx] - self.t0 + periods as f64 * self.period;
        &self.lf_samples[idx] * (&self.lambda * dt).exp() * x0
    }

    /// Contribution of `mode` at `times[idx] + k T`.
    pub fn mode(&self, mode: usize, idx: usize, periods: u32, x0: &DVector<f64>) -> DVector<f64> {
        let dt = self.times[idx] - self.t0 + periods as f64 * self.period;
        self.modes[mode].eval(&self.lf_samples[idx], dt, x0)
    }

    pub fn to_json(&self) -> Value {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> { m.row_iter().map(|r| r.iter().copied().collect()).collect() };
        json!({
            "t0": self.t0,
            "period": self.period,
            "harmonics": self.fit.as_ref().map(FourierFit::harmonics),
            "fit_residual": self.fit_residual,
            "periodicity_defect": self.periodicity_defect,
            "liouville_error": self.liouville_error,
            "monodromy": rows(&self.monodromy),
            "lambda": rows(&self.lambda),
            "clusters": self.eigen.clusters.iter().map(|c| json!({
                "eigenvalue": [c.eigenvalue.re, c.eigenvalue.im],
                "members": c.members.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "chains": c.chains,
            })).collect::<Vec<_>>(),
            "modes": self.modes.iter().map(|m| json!({
                "mode_index": m.mode_index,
                "eigenvalue": [m.eigenvalue.re, m.eigenvalue.im],
                "chain": m.chain,
                "secular": m.secular,
                "conjugate_pair": m.conjugate_pair,
            })).collect::<Vec<_>>(),
            "lf_samples": self.times.iter().zip(&self.lf_samples).map(|(t, p)| json!({
                "t": t,
                "P": rows(p),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Runs the full pipeline on a plant of period `period` starting at `t0`.
pub fn numeric_floquet<F>(plant: F, t0: f64, period: f64, cfg: &NumericConfig) -> Result<NumericFloquet>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid period {period}")));
    }
    if cfg.lf_samples < 2 {
        return Err(Error::InvalidArgument("need at least two LF samples".into()));
    }
    let defect = periodicity_defect(&plant, t0, period).map_err(|e| e.at_stage("plant sampling"))?;
    if defect > cfg.aperiodicity_threshold {
        return Err(Error::Aperiodic {
            residual: defect,
            threshold: cfg.aperiodicity_threshold,
        }
        .at_stage("periodicity check"));
    }

    let samples = sample_times(t0, period, cfg.samples)
        .iter()
        .map(|&t| plant(t))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("plant sampling"))?;
    let fit = fourier_periodic_fit(&samples, t0, period, cfg.harmonics).map_err(|e| e.at_stage("fourier fit"))?;
    let a_scale = samples.iter().map(|s| s.amax()).fold(f64::MIN_POSITIVE, f64::max);
    let fit_residual = fit.residual / a_scale;
    if cfg.use_fit && fit_residual > 1e-8 {
        log::warn!("Fourier fit residual {fit_residual:.3e} with {} harmonics", cfg.harmonics);
    }

    let times: Vec<f64> = crate::dynamics::uniform_grid(t0, t0 + period, cfg.lf_samples);
    let fitted = |t: f64| Ok(fit.eval(t));
    let (stms, liouville) = if cfg.use_fit {
        let stms = integrate_stm(&fitted, t0, &times, cfg.tol).map_err(|e| e.at_stage("stm integration"))?;
        let err = liouville_error(&fitted, t0, period, stms.last().unwrap(), cfg.tol)
            .map_err(|e| e.at_stage("liouville check"))?;
        (stms, err)
    } else {
        let stms = integrate_stm(&plant, t0, &times, cfg.tol).map_err(|e| e.at_stage("stm integration"))?;
        let err = liouville_error(&plant, t0, period, stms.last().unwrap(), cfg.tol)
            .map_err(|e| e.at_stage("liouville check"))?;
        (stms, err)
    };
    let monodromy = stms.last().unwrap().clone();
    let lambda = real_matrix_log(&monodromy, period).map_err(|e| e.at_stage("matrix logarithm"))?;
    let lf_samples = lf_from_stm(&stms, &times, t0, &lambda);
    let eigen = analyze(&lambda, cfg.jordan).map_err(|e| e.at_stage("eigen analysis"))?;
    let modes = build_samplers(&lambda, &eigen).map_err(|e| e.at_stage("mode samplers"))?;
    Ok(NumericFloquet {
        t0,
        period,
        fit: cfg.use_fit.then_some(fit),
        fit_residual,
        periodicity_defect: defect,
        liouville_error: liouville,
        monodromy,
        lambda,
        times,
        lf_samples,
        eigen,
        modes,
    })
}

/// First-order change δP of the LF transform under A0 → A0 + δA with
/// Λ0 → Λ0 + δΛ:
/// δP' = A0 δP − δP Λ0 + δA P0 − P0 δΛ, δP(t0) = 0, P0 = Φ0 e^{−Λ0 (t − t0)}.
pub fn delta_p_correction<A, D>(
    a0: A,
    lambda0: &DMatrix<f64>,
    delta_a: D,
    delta_lambda: &DMatrix<f64>,
    t0: f64,
    outputs: &[f64],
    tol: Tolerances,
) -> Result<Vec<DMatrix<f64>>>
where
    A: Fn(f64) -> Result<DMatrix<f64>>,
    D: Fn(f64) -> Result<DMatrix<f64>>,
{
    let n = lambda0.nrows();
    let mut y0 = DVector::zeros(2 * n * n);
    y0.rows_mut(0, n * n).copy_from(&flatten(&DMatrix::identity(n, n)));
    let ys = integrate(
        |t, y| {
            let phi = DMatrix::from_column_slice(n, n, &y.as_slice()[..n * n]);
            let dp = DMatrix::from_column_slice(n, n, &y.as_slice()[n * n..]);
            let a = a0(t)?;
            let p0 = &phi * (lambda0 * -(t - t0)).exp();
            let d_phi = &a * &phi;
            let d_dp = &a * &dp - &dp * lambda0 + delta_a(t)? * &p0 - &p0 * delta_lambda;
            let mut out = DVector::zeros(2 * n * n);
            out.rows_mut(0, n * n).copy_from_slice(d_phi.as_slice());
            out.rows_mut(n * n, n * n).copy_from_slice(d_dp.as_slice());
            Ok(out)
        },
        t0,
        &y0,
        outputs,
        tol,
    )?;
    Ok(ys.iter().map(|y| DMatrix::from_column_slice(n, n, &y.as_slice()[n * n..])).collect())
}

/// δΛ making δP periodic, δP(t0 + T) = 0, found by superposition over the
/// n² unit perturbations of Λ.
pub fn delta_lambda_periodic<A, D>(
    a0: A,
    lambda0: &DMatrix<f64>,
    delta_a: D,
    t0: f64,
    period: f64,
    tol: Tolerances,
) -> Result<DMatrix<f64>>
where
    A: Fn(f64) -> Result<DMatrix<f64>>,
    D: Fn(f64) -> Result<DMatrix<f64>>,
{
    let n = lambda0.nrows();
    let end = [t0 + period];
    let zero = DMatrix::zeros(n, n);
    let forced = delta_p_correction(&a0, lambda0, &delta_a, &zero, t0, &end, tol)?.remove(0);
    let mut k = DMatrix::zeros(n * n, n * n);
    for col in 0..n * n {
        let mut e = DMatrix::zeros(n, n);
        e[col] = 1.0;
        let resp = delta_p_correction(&a0, lambda0, |_| Ok(DMatrix::zeros(n, n)), &e, t0, &end, tol)?.remove(0);
        k.set_column(col, &flatten(&resp));
    }
    // forced + K δΛ = 0
    let rhs = -flatten(&forced);
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or(Error::NearSingular { condition: f64::INFINITY })?;
    Ok(unflatten(&sol, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn mathieu(eps: f64) -> impl Fn(f64) -> Result<DMatrix<f64>> + Clone {
        move |t: f64| Ok(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -(0.1 + eps * t.cos()), -0.05]))
    }

    #[test]
    fn constant_plant_recovers_itself() {
        let a = DMatrix::from_row_slice(2, 2, &[-0.1, 1.0, -1.0, -0.1]);
        let plant = |_t: f64| Ok(a.clone());
        let cfg = NumericConfig {
            samples: 16,
            harmonics: 2,
            lf_samples: 9,
            ..Default::default()
        };
        let res = numeric_floquet(plant, 0.0, 1.0, &cfg).unwrap();
        assert!((&res.lambda - &a).amax() < 1e-10);
        assert!(res.lf_samples.iter().all(|p| (p - DMatrix::<f64>::identity(2, 2)).amax() < 1e-10));
        assert!(res.liouville_error < 1e-10);
    }

    #[test]
    fn lf_is_periodic_and_reconstructs() {
        let cfg = NumericConfig {
            samples: 64,
            harmonics: 4,
            lf_samples: 33,
            ..Default::default()
        };
        let res = numeric_floquet(mathieu(0.05), 0.0, TAU, &cfg).unwrap();
        assert!((res.lf_samples[0].clone() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        assert!((res.lf_samples.last().unwrap() - &res.lf_samples[0]).amax() < 1e-9);
        let x0 = DVector::from_vec(vec![1.0, -0.5]);
        let direct = integrate_stm(mathieu(0.05), 0.0, &[res.times[10] + 2.0 * TAU], Tolerances::default()).unwrap();
        let want = &direct[0] * &x0;
        assert!((res.reconstruct(10, 2, &x0) - &want).amax() < 1e-8);
        let sum = (0..res.modes.len()).map(|m| res.mode(m, 10, 2, &x0)).fold(DVector::zeros(2), |a, b| a + b);
        assert!((sum - want).amax() < 1e-8);
    }

    #[test]
    fn aperiodic_plant_is_refused() {
        let plant = |t: f64| Ok(DMatrix::from_element(1, 1, t));
        let err = numeric_floquet(plant, 0.0, 1.0, &NumericConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Stage { source, .. } if matches!(*source, Error::Aperiodic { .. })));
    }

    #[test]
    fn period_search_finds_period() {
        let plant = |t: f64| Ok(DMatrix::from_element(1, 1, (t * TAU / 3.7).sin()));
        let (t, defect) = search_period(&plant, 0.0, 3.0, 4.5, 1e-12).unwrap();
        assert!((t - 3.7).abs() < 1e-8);
        assert!(defect < 1e-8);
    }

    #[test]
    fn delta_p_matches_finite_difference() {
        let eps = 1e-5;
        let cfg = NumericConfig {
            samples: 64,
            harmonics: 4,
            lf_samples: 17,
            use_fit: false,
            ..Default::default()
        };
        let base = numeric_floquet(mathieu(0.05), 0.0, TAU, &cfg).unwrap();
        let plus = numeric_floquet(mathieu(0.05 + eps), 0.0, TAU, &cfg).unwrap();
        let minus = numeric_floquet(mathieu(0.05 - eps), 0.0, TAU, &cfg).unwrap();
        let da = |t: f64| Ok(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, -t.cos(), 0.0]));
        let dl = delta_lambda_periodic(mathieu(0.05), &base.lambda, da, 0.0, TAU, Tolerances::default()).unwrap();
        let dl_fd = (&plus.lambda - &minus.lambda) / (2.0 * eps);
        assert!((&dl - &dl_fd).amax() < 1e-6 * dl_fd.amax().max(1.0));
        let dp = delta_p_correction(mathieu(0.05), &base.lambda, da, &dl, 0.0, &base.times, Tolerances::default()).unwrap();
        for (i, d) in dp.iter().enumerate() {
            let fd = (&plus.lf_samples[i] - &minus.lf_samples[i]) / (2.0 * eps);
            assert!((d - &fd).amax() < 1e-6 * fd.amax().max(1.0), "sample {i}");
        }
        assert!(dp.last().unwrap().amax() < 1e-8);
    }
}
