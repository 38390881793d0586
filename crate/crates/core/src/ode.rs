//! Adaptive Dormand–Prince 5(4) integrator.
//!
//! Steps are clipped so the integrator lands exactly on every requested
//! output abscissa; no dense-output interpolation is involved.

use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-12, abs: 1e-14 }
    }
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }
}

const MAX_STEPS: usize = 5_000_000;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded fourth-order error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = rhs(t, y)` from `(t0, y0)` and returns the state at each
/// entry of `outputs`, which must be monotone in the direction of travel.
pub fn integrate<F>(
    mut rhs: F,
    t0: f64,
    y0: &DVector<f64>,
    outputs: &[f64],
    tol: Tolerances,
) -> Result<Vec<DVector<f64>>>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    if outputs.is_empty() {
        return Ok(Vec::new());
    }
    let t_end = *outputs.last().unwrap();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    if outputs.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) || (outputs[0] - t0) * dir < 0.0 {
        return Err(Error::InvalidArgument("output abscissae must be monotone from t0".into()));
    }

    let mut out = Vec::with_capacity(outputs.len());
    let mut t = t0;
    let mut y = y0.clone();
    let mut k1 = rhs(t, &y)?;
    let mut h = initial_step(&mut rhs, t, &y, &k1, dir, tol, (t_end - t0).abs())?;
    let mut steps = 0usize;

    for &target in outputs {
        while (target - t) * dir > 0.0 {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::IntegrationFailure {
                    at: t,
                    reason: "maximum number of steps exceeded".into(),
                });
            }
            let remaining = target - t;
            let mut h_try = h.min(remaining.abs()) * dir;
            let landing = h_try.abs() >= remaining.abs() * (1.0 - 1e-12);
            if landing {
                h_try = remaining;
            }
            if h_try.abs() <= f64::EPSILON * t.abs().max(1.0) * 4.0 && !landing {
                return Err(Error::IntegrationFailure {
                    at: t,
                    reason: format!("step size underflow (h = {h_try:e})"),
                });
            }

            let (y_new, k7, err) = dp_step(&mut rhs, t, &y, &k1, h_try)?;
            let err_norm = error_norm(&err, &y, &y_new, tol);
            if !err_norm.is_finite() {
                return Err(Error::IntegrationFailure {
                    at: t,
                    reason: "non-finite state".into(),
                });
            }
            if err_norm <= 1.0 {
                t = if landing { target } else { t + h_try };
                y = y_new;
                k1 = k7;
                let fac = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a clipped landing step says nothing about the natural step size
                if !landing || fac < 1.0 {
                    h = h_try.abs() * fac;
                }
            } else {
                h = h_try.abs() * (0.9 * err_norm.powf(-0.2)).clamp(0.1, 1.0);
                if h <= f64::EPSILON * t.abs().max(1.0) * 4.0 {
                    return Err(Error::IntegrationFailure {
                        at: t,
                        reason: format!("step size underflow (h = {h:e})"),
                    });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn dp_step<F>(
    rhs: &mut F,
    t: f64,
    y: &DVector<f64>,
    k1: &DVector<f64>,
    h: f64,
) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let k2 = rhs(t + C2 * h, &(y + k1 * (h * A21)))?;
    let k3 = rhs(t + C3 * h, &(y + (k1 * A31 + &k2 * A32) * h))?;
    let k4 = rhs(t + C4 * h, &(y + (k1 * A41 + &k2 * A42 + &k3 * A43) * h))?;
    let k5 = rhs(
        t + C5 * h,
        &(y + (k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h),
    )?;
    let k6 = rhs(
        t + h,
        &(y + (k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h),
    )?;
    let y_new = y + (k1 * B1 + &k3 * B3 + &k4 * B4 + &k5 * B5 + &k6 * B6) * h;
    let k7 = rhs(t + h, &y_new)?;
    let err = (k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
    Ok((y_new, k7, err))
}

fn error_norm(err: &DVector<f64>, y: &DVector<f64>, y_new: &DVector<f64>, tol: Tolerances) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new.iter()))
        .map(|(e, (a, b))| {
            let sc = tol.abs + tol.rel * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &DVector<f64>,
    f0: &DVector<f64>,
    dir: f64,
    tol: Tolerances,
    span: f64,
) -> Result<f64>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let scale = |v: &DVector<f64>| {
        let n = v.len().max(1) as f64;
        (v.iter()
            .zip(y.iter())
            .map(|(a, b)| {
                let sc = tol.abs + tol.rel * b.abs();
                (a / sc) * (a / sc)
            })
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let d0 = scale(y);
    let d1 = scale(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span.max(f64::MIN_POSITIVE));
    let f1 = rhs(t + dir * h0, &(y + f0 * (dir * h0)))?;
    let d2 = scale(&(&f1 - f0)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span.max(f64::MIN_POSITIVE)))
}
