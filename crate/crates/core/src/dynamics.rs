//! Linearized relative-motion plants and the linear propagation oracle.

use nalgebra::{DVector, Matrix4, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::chief::ChiefOrbit;
use crate::error::{Error, Result};
use crate::ode::{integrate, Tolerances};

/// Independent variable of a plant or transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndepVar {
    /// Time since epoch, s.
    Time,
    /// Argument of latitude, rad.
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantMatrix {
    pub entries: Matrix6<f64>,
    pub indep_var: IndepVar,
}

/// Relative position and LVLH-frame velocity (km, km/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub xdot: f64,
    pub ydot: f64,
    pub zdot: f64,
}

impl CartState {
    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            x: v[0],
            y: v[1],
            z: v[2],
            xdot: v[3],
            ydot: v[4],
            zdot: v[5],
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.x, self.y, self.z, self.xdot, self.ydot, self.zdot)
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    /// Logs a warning when the separation is too large for the linear model.
    pub fn check_linear_validity(&self, chief_radius: f64) -> bool {
        let rho = self.position().norm();
        let ok = self.to_vector().iter().all(|v| v.is_finite()) && rho <= 0.01 * chief_radius;
        if !ok {
            log::warn!(
                "relative separation {rho:.3} km is large against chief radius {chief_radius:.1} km; linearization may be poor"
            );
        }
        ok
    }
}

/// Differences in quasi-nonsingular elements (δa km; δθ, δi, δΩ rad).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QnsDiff {
    pub da: f64,
    pub dtheta: f64,
    pub di: f64,
    pub dq1: f64,
    pub dq2: f64,
    pub draan: f64,
}

impl QnsDiff {
    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            da: v[0],
            dtheta: v[1],
            di: v[2],
            dq1: v[3],
            dq2: v[4],
            draan: v[5],
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.da, self.dtheta, self.di, self.dq1, self.dq2, self.draan)
    }

    /// First-order conversion from classical element differences
    /// (δa km, δe, δi, δΩ, δω, δf rad) about `chief`.
    pub fn from_classical(chief: &ChiefOrbit, da: f64, de: f64, di: f64, draan: f64, dargp: f64, df: f64) -> Self {
        let e = chief.e();
        let (s, c) = chief.argp().sin_cos();
        Self {
            da,
            dtheta: dargp + df,
            di,
            dq1: de * c - e * s * dargp,
            dq2: de * s + e * c * dargp,
            draan,
        }
    }
}

/// Planar Clohessy–Wiltshire plant for the state (x, y, ẋ, ẏ).
pub fn cw_planar_plant(n: f64) -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        3.0 * n * n, 0.0, 0.0, 2.0 * n,
        0.0, 0.0, -2.0 * n, 0.0,
    )
}

/// Full six-state Clohessy–Wiltshire plant.
pub fn cw_plant(n: f64) -> Matrix6<f64> {
    let mut a = Matrix6::zeros();
    a[(0, 3)] = 1.0;
    a[(1, 4)] = 1.0;
    a[(2, 5)] = 1.0;
    a[(3, 0)] = 3.0 * n * n;
    a[(3, 4)] = 2.0 * n;
    a[(4, 3)] = -2.0 * n;
    a[(5, 2)] = -n * n;
    a
}

/// Planar CW state transition matrix from epoch 0 to `t`.
pub fn cw_stm_planar(n: f64, t: f64) -> Matrix4<f64> {
    let (s, c) = (n * t).sin_cos();
    Matrix4::new(
        4.0 - 3.0 * c, 0.0, s / n, 2.0 / n * (1.0 - c),
        6.0 * (s - n * t), 1.0, -2.0 / n * (1.0 - c), 4.0 / n * s - 3.0 * t,
        3.0 * n * s, 0.0, c, 2.0 * s,
        -6.0 * n * (1.0 - c), 0.0, -2.0 * s, 4.0 * c - 3.0,
    )
}

/// Keplerian plant of the element differences with θ as independent
/// variable. Only the δθ row is populated.
pub fn qns_plant_theta(chief: &ChiefOrbit, theta: f64) -> PlantMatrix {
    let (s, c) = theta.sin_cos();
    let kappa = chief.kappa(theta);
    let eta2 = 1.0 - chief.q1 * chief.q1 - chief.q2 * chief.q2;
    let mut m = Matrix6::zeros();
    m[(1, 0)] = -1.5 / chief.a;
    m[(1, 1)] = 2.0 * (chief.q2 * c - chief.q1 * s) / kappa;
    m[(1, 3)] = 3.0 * chief.q1 / eta2 + 2.0 * c / kappa;
    m[(1, 4)] = 3.0 * chief.q2 / eta2 + 2.0 * s / kappa;
    PlantMatrix {
        entries: m,
        indep_var: IndepVar::Theta,
    }
}

/// Time-domain counterpart, θ̇ times the θ-domain plant.
pub fn qns_plant_time(chief: &ChiefOrbit, theta: f64) -> PlantMatrix {
    let thetadot = chief.eval_at_theta(theta).thetadot;
    PlantMatrix {
        entries: qns_plant_theta(chief, theta).entries * thetadot,
        indep_var: IndepVar::Time,
    }
}

/// Gauss planetary equations in quasi-nonsingular elements: time rates of
/// (a, θ, i, q1, q2, Ω) under the LVLH acceleration `accel` (km/s²).
pub fn gauss_rates(chief: &ChiefOrbit, theta: f64, accel: Vector3<f64>) -> Result<Vector6<f64>> {
    let (ar, at, an) = (accel[0], accel[1], accel[2]);
    let (si, ci) = chief.inc.sin_cos();
    if an != 0.0 && si.abs() < 1e-9 {
        return Err(Error::InclinationSingularity { sin_i: si.abs() });
    }
    let st = chief.eval_at_theta(theta);
    let (s, c) = theta.sin_cos();
    let (q1, q2, a) = (chief.q1, chief.q2, chief.a);
    let p = chief.p();
    let h = chief.h();
    let r = st.r;
    // a_n terms vanish identically when a_n = 0, including at zero inclination
    let (node_rate, tan_term) = if an == 0.0 { (0.0, 0.0) } else { (r * s / (h * si) * an, r * s * ci / (h * si) * an) };
    Ok(Vector6::new(
        2.0 * a * a / h * ((q1 * s - q2 * c) * ar + p / r * at),
        h / (r * r) - tan_term,
        r * c / h * an,
        p * s / h * ar + ((p + r) * c + r * q1) / h * at + q2 * tan_term,
        -p * c / h * ar + ((p + r) * s + r * q2) / h * at - q1 * tan_term,
        node_rate,
    ))
}

/// Two-body LVLH plant (time domain) evaluated at the chief's argument of
/// latitude.
pub fn cartesian_plant_keplerian(chief: &ChiefOrbit, theta: f64) -> PlantMatrix {
    let st = chief.eval_at_theta(theta);
    let w = st.thetadot;
    let wdot = -2.0 * st.vr * chief.h() / (st.r * st.r * st.r);
    let grav = chief.mu / (st.r * st.r * st.r);
    let mut m = Matrix6::zeros();
    m[(0, 3)] = 1.0;
    m[(1, 4)] = 1.0;
    m[(2, 5)] = 1.0;
    m[(3, 0)] = w * w + 2.0 * grav;
    m[(3, 1)] = wdot;
    m[(3, 4)] = 2.0 * w;
    m[(4, 0)] = -wdot;
    m[(4, 1)] = w * w - grav;
    m[(4, 3)] = -2.0 * w;
    m[(5, 2)] = -grav;
    PlantMatrix {
        entries: m,
        indep_var: IndepVar::Time,
    }
}

/// The Keplerian LVLH plant as a function of time since epoch.
pub fn cartesian_plant_of_time(chief: ChiefOrbit) -> impl Fn(f64) -> Result<Matrix6<f64>> + Send + Sync + Clone {
    move |t| {
        let theta = chief.time_to_theta(t)?;
        Ok(cartesian_plant_keplerian(&chief, theta).entries)
    }
}

/// Keplerian LVLH plant re-expressed with θ as independent variable.
pub fn cartesian_plant_of_theta(chief: ChiefOrbit) -> impl Fn(f64) -> Result<Matrix6<f64>> + Send + Sync + Clone {
    move |theta| {
        let thetadot = chief.eval_at_theta(theta).thetadot;
        Ok(cartesian_plant_keplerian(&chief, theta).entries / thetadot)
    }
}

/// Sampled solution of a linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub indep_var: IndepVar,
    pub abscissa: Vec<f64>,
    pub states: Vec<Vector6<f64>>,
}

/// Uniform grid of `steps` points from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, steps: usize) -> Vec<f64> {
    let n = steps.max(2);
    (0..n)
        .map(|k| {
            if k == n - 1 {
                end
            } else {
                start + (end - start) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Propagates `x' = A(s) x` from `span.0` to `span.1`, sampling `steps`
/// uniformly spaced points (endpoints included).
pub fn propagate_linear<F>(
    plant: F,
    indep_var: IndepVar,
    state0: &Vector6<f64>,
    span: (f64, f64),
    steps: usize,
    tol: Tolerances,
) -> Result<Trajectory>
where
    F: Fn(f64) -> Result<Matrix6<f64>>,
{
    if steps < 2 {
        return Err(Error::InvalidArgument("propagation needs at least two samples".into()));
    }
    if !span.0.is_finite() || !span.1.is_finite() {
        return Err(Error::InvalidArgument("propagation span must be finite".into()));
    }
    let grid = uniform_grid(span.0, span.1, steps);
    propagate_linear_at(plant, indep_var, state0, span.0, &grid, tol)
}

/// Like [`propagate_linear`] but samples at arbitrary monotone abscissae.
pub fn propagate_linear_at<F>(
    plant: F,
    indep_var: IndepVar,
    state0: &Vector6<f64>,
    start: f64,
    grid: &[f64],
    tol: Tolerances,
) -> Result<Trajectory>
where
    F: Fn(f64) -> Result<Matrix6<f64>>,
{
    let y0 = DVector::from_column_slice(state0.as_slice());
    let ys = integrate(
        |s, y| {
            let a = plant(s)?;
            let x = Vector6::from_column_slice(y.as_slice());
            Ok(DVector::from_column_slice((a * x).as_slice()))
        },
        start,
        &y0,
        grid,
        tol,
    )?;
    Ok(Trajectory {
        indep_var,
        abscissa: grid.to_vec(),
        states: ys.iter().map(|y| Vector6::from_column_slice(y.as_slice())).collect(),
    })
}
