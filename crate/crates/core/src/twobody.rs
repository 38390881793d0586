//! Nonlinear two-body machinery used as an independent oracle for the
//! linear models: element → inertial conversion, LVLH relative states and
//! inertial propagation of chief and deputy.

use nalgebra::{DVector, Matrix3, Vector3, Vector6};

use crate::chief::ChiefOrbit;
use crate::error::Result;
use crate::ode::{integrate, Tolerances};

/// Osculating quasi-nonsingular element set (a, θ, i, q1, q2, Ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QnsElements {
    pub a: f64,
    pub theta: f64,
    pub inc: f64,
    pub q1: f64,
    pub q2: f64,
    pub raan: f64,
}

impl QnsElements {
    pub fn of_chief(chief: &ChiefOrbit, theta: f64) -> Self {
        Self {
            a: chief.a,
            theta,
            inc: chief.inc,
            q1: chief.q1,
            q2: chief.q2,
            raan: chief.raan,
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.a, self.theta, self.inc, self.q1, self.q2, self.raan)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            a: v[0],
            theta: v[1],
            inc: v[2],
            q1: v[3],
            q2: v[4],
            raan: v[5],
        }
    }

    /// Inertial position and velocity (km, km/s).
    pub fn to_inertial(&self, mu: f64) -> (Vector3<f64>, Vector3<f64>) {
        let p = self.a * (1.0 - self.q1 * self.q1 - self.q2 * self.q2);
        let h = (mu * p).sqrt();
        let (st, ct) = self.theta.sin_cos();
        let (si, ci) = self.inc.sin_cos();
        let (so, co) = self.raan.sin_cos();
        let kappa = 1.0 + self.q1 * ct + self.q2 * st;
        let r = p / kappa;
        let e_r = Vector3::new(co * ct - so * st * ci, so * ct + co * st * ci, st * si);
        let e_t = Vector3::new(-co * st - so * ct * ci, -so * st + co * ct * ci, ct * si);
        let vr = h / p * (self.q1 * st - self.q2 * ct);
        let vt = h / r;
        (e_r * r, e_r * vr + e_t * vt)
    }
}

/// Rotation whose columns are the LVLH unit vectors (ê_r, ê_t, ê_n).
pub fn lvlh_frame(r: &Vector3<f64>, v: &Vector3<f64>) -> Matrix3<f64> {
    let e_r = r.normalize();
    let e_n = r.cross(v).normalize();
    let e_t = e_n.cross(&e_r);
    Matrix3::from_columns(&[e_r, e_t, e_n])
}

/// Relative state of the deputy resolved in the chief LVLH frame, with the
/// velocity taken as the rotating-frame derivative.
pub fn lvlh_relative(
    rc: &Vector3<f64>,
    vc: &Vector3<f64>,
    rd: &Vector3<f64>,
    vd: &Vector3<f64>,
) -> Vector6<f64> {
    let frame = lvlh_frame(rc, vc);
    let omega = Vector3::new(0.0, 0.0, rc.cross(vc).norm() / rc.norm_squared());
    let rho = frame.transpose() * (rd - rc);
    let rho_dot = frame.transpose() * (vd - vc) - omega.cross(&rho);
    Vector6::new(rho[0], rho[1], rho[2], rho_dot[0], rho_dot[1], rho_dot[2])
}

/// Inverse of [`lvlh_relative`]: deputy inertial state from a relative state.
pub fn deputy_inertial(
    rc: &Vector3<f64>,
    vc: &Vector3<f64>,
    rel: &Vector6<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let frame = lvlh_frame(rc, vc);
    let omega = Vector3::new(0.0, 0.0, rc.cross(vc).norm() / rc.norm_squared());
    let rho = Vector3::new(rel[0], rel[1], rel[2]);
    let rho_dot = Vector3::new(rel[3], rel[4], rel[5]);
    (rc + frame * rho, vc + frame * (rho_dot + omega.cross(&rho)))
}

fn two_body_rhs(mu: f64, y: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(y.len());
    for body in 0..y.len() / 6 {
        let o = body * 6;
        let r = Vector3::new(y[o], y[o + 1], y[o + 2]);
        let acc = -r * (mu / r.norm().powi(3));
        out[o] = y[o + 3];
        out[o + 1] = y[o + 4];
        out[o + 2] = y[o + 5];
        out[o + 3] = acc[0];
        out[o + 4] = acc[1];
        out[o + 5] = acc[2];
    }
    out
}

/// Propagates chief and deputy inertially and returns the LVLH relative
/// state at each requested time after epoch.
pub fn nonlinear_relative_states(
    chief: &ChiefOrbit,
    rel0: &Vector6<f64>,
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<Vector6<f64>>> {
    let (rc, vc) = QnsElements::of_chief(chief, chief.theta0).to_inertial(chief.mu);
    let (rd, vd) = deputy_inertial(&rc, &vc, rel0);
    let y0 = DVector::from_vec(vec![
        rc[0], rc[1], rc[2], vc[0], vc[1], vc[2], rd[0], rd[1], rd[2], vd[0], vd[1], vd[2],
    ]);
    let mu = chief.mu;
    let ys = integrate(|_, y| Ok(two_body_rhs(mu, y)), 0.0, &y0, times, tol)?;
    Ok(ys
        .iter()
        .map(|y| {
            let rc = Vector3::new(y[0], y[1], y[2]);
            let vc = Vector3::new(y[3], y[4], y[5]);
            let rd = Vector3::new(y[6], y[7], y[8]);
            let vd = Vector3::new(y[9], y[10], y[11]);
            lvlh_relative(&rc, &vc, &rd, &vd)
        })
        .collect())
}
