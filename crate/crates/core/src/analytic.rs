//! Closed-form Keplerian Lyapunov-Floquet transformations, LTI forms,
//! eigenstructures and modal constants.
//!
//! Conventions: the Cartesian state is (x, y, z, ẋ, ẏ, ż) in the LVLH frame
//! and the spherical state is (δr, θ_r, φ_r, δṙ, θ̇_r, φ̇_r); rates are time
//! derivatives in both cases. The θ-domain LTI system χ' = Rχ and the
//! time-domain system χ̇ = Λχ share the eigenvector matrix up to the scaling
//! of the chain head v5.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use log::warn;
use nalgebra::{Matrix4, Matrix6, Vector4, Vector6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chief::{ChiefOrbit, Shorthands};
use crate::coords::{checked_inverse, g_map, Domain};
use crate::dynamics::IndepVar;
use crate::error::{Error, Result};

/// |q1| below which the q1-singular terms of the element LF transform are
/// evaluated by regularization.
pub const Q1_REGULARIZATION: f64 = 1e-6;
/// Magnitude substituted for A = −e sin f0 when it vanishes.
pub const A_REGULARIZATION: f64 = 1e-8;
/// |A| below which the closed-form constants give way to a linear solve.
const CLOSED_FORM_MIN_A: f64 = 1e-6;

/// What to do when a closed form hits a removable or structural singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingularityPolicy {
    Reject,
    #[default]
    Regularize,
}

/// Periodic transformation x = P χ with P(θ0) = I.
#[derive(Clone)]
pub struct LfTransform {
    eval: Arc<dyn Fn(f64) -> Matrix6<f64> + Send + Sync>,
    pub theta0: f64,
    pub domain: Domain,
    pub indep: IndepVar,
    pub regularized: bool,
}

impl LfTransform {
    pub fn new<F>(eval: F, theta0: f64, domain: Domain, indep: IndepVar, regularized: bool) -> Self
    where
        F: Fn(f64) -> Matrix6<f64> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            theta0,
            domain,
            indep,
            regularized,
        }
    }

    pub fn at(&self, theta: f64) -> Matrix6<f64> {
        (self.eval)(theta)
    }
}

impl fmt::Debug for LfTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LfTransform")
            .field("theta0", &self.theta0)
            .field("domain", &self.domain)
            .field("indep", &self.indep)
            .field("regularized", &self.regularized)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanBlock {
    pub eigenvalue: Complex64,
    pub size: usize,
}

/// Constant plant with its true and generalized eigenvectors.
///
/// Columns of `v` are ordered as the Jordan blocks in `blocks`: four simple
/// zero eigenvectors followed by the chain (v5, v6) with R v6 = v5.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    pub r: Matrix6<f64>,
    pub v: Matrix6<f64>,
    pub blocks: Vec<JordanBlock>,
    pub domain: Domain,
    pub indep: IndepVar,
    /// True when `v` was built with a regularized A.
    pub regularized: bool,
}

impl LtiSystem {
    pub fn jordan_matrix(&self) -> Matrix6<f64> {
        let mut j = Matrix6::zeros();
        let mut col = 0;
        for block in &self.blocks {
            for k in 0..block.size {
                j[(col + k, col + k)] = block.eigenvalue.re;
                if k + 1 < block.size {
                    j[(col + k, col + k + 1)] = 1.0;
                }
            }
            col += block.size;
        }
        j
    }

    /// exp(R s) = I + R s for the nilpotent Keplerian plant.
    pub fn propagator(&self, s: f64) -> Matrix6<f64> {
        Matrix6::identity() + self.r * s
    }
}

fn keplerian_blocks() -> Vec<JordanBlock> {
    let zero = Complex64::new(0.0, 0.0);
    let mut blocks = vec![JordanBlock { eigenvalue: zero, size: 1 }; 4];
    blocks.push(JordanBlock { eigenvalue: zero, size: 2 });
    blocks
}

/// Modal constants c with the epoch and coordinates they refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalConstants {
    pub c: Vector6<f64>,
    pub theta0: f64,
    pub domain: Domain,
    /// A was replaced by ±[`A_REGULARIZATION`].
    pub regularized: bool,
    /// Produced by the printed closed forms rather than a linear solve.
    pub closed_form: bool,
}

impl ModalConstants {
    pub fn drift(&self) -> f64 {
        self.c[5]
    }
}

// ---------------------------------------------------------------------------
// Element-difference LF transform

/// u − θ/2, where u is the continuous branch of
/// atan((q2 + (1 − q1) tan(θ/2)) / η). The two half-angle directions are never
/// antiparallel for e < 1, so the difference is an ordinary principal angle.
fn anomaly_offset(q1: f64, q2: f64, eta: f64, theta: f64) -> f64 {
    let (s, c) = (0.5 * theta).sin_cos();
    let (re, im) = (eta * c, q2 * c + (1.0 - q1) * s);
    (im * c - re * s).atan2(re * c + im * s)
}

/// F21 with its q1 denominator removed: the printed 3(q2 + e² sθ)/(q1 γ κ)
/// equals 3q2/(q1 γ) + 3(q1 sθ − q2 cθ)/(γ κ), and the constant cancels in
/// every difference F21(θ0) − F21(θ). Returned as (secular-free part, κ·rest).
fn f21_parts(q1: f64, q2: f64, theta: f64) -> (f64, f64, f64) {
    let e2 = q1 * q1 + q2 * q2;
    let eta = (1.0 - e2).sqrt();
    let (s, c) = theta.sin_cos();
    let kappa = 1.0 + q1 * c + q2 * s;
    (6.0 / eta.powi(3) * anomaly_offset(q1, q2, eta, theta), 3.0 * (q1 * s - q2 * c) / (e2 - 1.0), kappa)
}

#[cfg(test)]
fn f21(q1: f64, q2: f64, theta: f64) -> f64 {
    let (angle, num, kappa) = f21_parts(q1, q2, theta);
    angle + num / kappa
}

/// κ² F24.
fn f24_scaled(q1: f64, q2: f64, theta: f64) -> f64 {
    let s = theta.sin();
    let kappa = 1.0 + q1 * theta.cos() + q2 * s;
    4.0 * (q2 + s) + 4.0 * s * kappa
}

/// κ² w, where the printed F25 equals 4/q1 − 4 w(θ).
fn w25_scaled(q1: f64, q2: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c * (2.0 + q2 * s) + q1 * (1.0 + c * c)
}

#[cfg(test)]
fn w25(q1: f64, q2: f64, theta: f64) -> f64 {
    let kappa = 1.0 + q1 * theta.cos() + q2 * theta.sin();
    w25_scaled(q1, q2, theta) / (kappa * kappa)
}

// The κ² prefactor is folded into the θ-dependent terms so that no
// intermediate carries a 1/κ² near apocentre.
fn p_qns_raw(chief: &ChiefOrbit, theta: f64, indep: IndepVar) -> Matrix6<f64> {
    let (a, q1, q2, th0) = (chief.a, chief.q1, chief.q2, chief.theta0);
    let gamma = q1 * q1 + q2 * q2 - 1.0;
    let kappa = chief.kappa(theta);
    let k0 = chief.kappa0();
    let k2 = kappa * kappa;
    let mut p = Matrix6::identity();
    if indep == IndepVar::Theta {
        let (ang0, num0, _) = f21_parts(q1, q2, th0);
        let (ang, num, _) = f21_parts(q1, q2, theta);
        p[(1, 0)] = (k2 * (ang0 - ang + num0 / k0) - kappa * num) / (2.0 * a);
    }
    p[(1, 1)] = k2 / (k0 * k0);
    p[(1, 3)] = (k2 / (k0 * k0) * f24_scaled(q1, q2, th0) - f24_scaled(q1, q2, theta)) / (4.0 * gamma);
    p[(1, 4)] = (w25_scaled(q1, q2, theta) - k2 / (k0 * k0) * w25_scaled(q1, q2, th0)) / gamma;
    p
}

/// Element-difference LF transform at one θ. The flag reports |q1| below
/// [`Q1_REGULARIZATION`], where the printed P21 and P25 forms are 0/0; the
/// evaluation itself uses the equivalent forms without q1 denominators.
pub fn lf_qns_at(chief: &ChiefOrbit, theta: f64, indep: IndepVar) -> (Matrix6<f64>, bool) {
    (p_qns_raw(chief, theta, indep), chief.q1.abs() < Q1_REGULARIZATION)
}

pub fn lf_qns(chief: &ChiefOrbit, indep: IndepVar) -> LfTransform {
    let c = *chief;
    let regularized = c.q1.abs() < Q1_REGULARIZATION;
    if regularized {
        warn!("q1 = {:e}: printed P21/P25 forms are singular, using the removable-singularity forms", c.q1);
    }
    LfTransform::new(move |th| lf_qns_at(&c, th, indep).0, c.theta0, Domain::Qns, indep, regularized)
}

/// LTI form of the element differences. Columns of V: δq1, δi, δq2, δΩ
/// directions, then the chain (R e1, e1).
pub fn lti_qns(chief: &ChiefOrbit, indep: IndepVar) -> LtiSystem {
    let entry = match indep {
        IndepVar::Theta => chief.r21(),
        IndepVar::Time => chief.r21() * chief.n(),
    };
    let mut r = Matrix6::zeros();
    r[(1, 0)] = entry;
    let mut v = Matrix6::zeros();
    v[(3, 0)] = 1.0;
    v[(2, 1)] = 1.0;
    v[(4, 2)] = 1.0;
    v[(5, 3)] = 1.0;
    v[(1, 4)] = entry;
    v[(0, 5)] = 1.0;
    LtiSystem {
        r,
        v,
        blocks: keplerian_blocks(),
        domain: Domain::Qns,
        indep,
        regularized: false,
    }
}

/// δθ from the time-domain transform; the flag reports q1 regularization.
pub fn delta_theta_solution(
    chief: &ChiefOrbit,
    theta: f64,
    dt: f64,
    da: f64,
    dtheta0: f64,
    dq1: f64,
    dq2: f64,
) -> (f64, bool) {
    let (p, reg) = lf_qns_at(chief, theta, IndepVar::Time);
    let value = p[(1, 1)] * chief.r21() * chief.n() * dt * da + p[(1, 1)] * dtheta0 + p[(1, 3)] * dq1 + p[(1, 4)] * dq2;
    (value, reg)
}

// ---------------------------------------------------------------------------
// Mapping theorems

/// R_x = G0 R G0⁻¹.
pub fn map_lti(g0: &Matrix6<f64>, r: &Matrix6<f64>) -> Result<Matrix6<f64>> {
    Ok(g0 * r * checked_inverse(g0)?)
}

/// P_x(θ) = G(θ) P(θ) G(θ0)⁻¹ for an element-difference transform `src`.
pub fn map_lf(chief: &ChiefOrbit, src: &LfTransform, target: Domain) -> Result<LfTransform> {
    if src.domain != Domain::Qns {
        return Err(Error::InvalidArgument(format!(
            "map_lf expects an element-difference transform, got {}",
            src.domain
        )));
    }
    let c = chief.with_epoch(src.theta0);
    let g0_inv = checked_inverse(&g_map(&c, src.theta0, target).entries)?;
    let inner = src.clone();
    Ok(LfTransform::new(
        move |th| g_map(&c, th, target).entries * inner.at(th) * g0_inv,
        src.theta0,
        target,
        src.indep,
        src.regularized,
    ))
}

// ---------------------------------------------------------------------------
// Closed-form local LTI systems

/// Shorthands with A replaced by ±[`A_REGULARIZATION`] when it vanishes.
pub fn regularized_shorthands(chief: &ChiefOrbit, policy: SingularityPolicy) -> Result<(Shorthands, bool)> {
    let mut sh = chief.shorthands();
    if sh.aq.abs() >= A_REGULARIZATION {
        return Ok((sh, false));
    }
    match policy {
        SingularityPolicy::Reject => Err(Error::SingularConfiguration {
            what: format!("A = e sin f0 = {:e} makes the eigenvector matrix singular", -sh.aq),
        }),
        SingularityPolicy::Regularize => {
            warn!("A = {:e}: eigenvectors built with A = ±{A_REGULARIZATION:e}", sh.aq);
            sh.aq = if sh.aq.is_sign_negative() { -A_REGULARIZATION } else { A_REGULARIZATION };
            Ok((sh, true))
        }
    }
}

fn r_cartesian(alpha: f64, sh: &Shorthands) -> Matrix6<f64> {
    let (a, b, c) = (sh.aq, sh.bq, sh.cq);
    let mut r = Matrix6::zeros();
    r[(0, 0)] = a * (b + 2.0);
    r[(0, 1)] = a * a;
    r[(0, 3)] = a * a * c;
    r[(0, 4)] = -a * (b + 1.0) * c;
    r[(1, 0)] = -(b + 1.0) * (b + 2.0);
    r[(1, 1)] = -a * (b + 1.0);
    r[(1, 3)] = -a * (b + 1.0) * c;
    r[(1, 4)] = (b + 1.0).powi(2) * c;
    r[(3, 0)] = b * (b + 2.0) / c;
    r[(3, 1)] = a * b / c;
    r[(3, 3)] = a * b;
    r[(3, 4)] = -b * (b + 1.0);
    r[(4, 0)] = a * (b + 2.0) / c;
    r[(4, 1)] = a * a / c;
    r[(4, 3)] = a * a;
    r[(4, 4)] = -a * (b + 1.0);
    r * alpha
}

fn v_cartesian(alpha: f64, sh: &Shorthands) -> Matrix6<f64> {
    let (a, b, c) = (sh.aq, sh.bq, sh.cq);
    let mut v = Matrix6::zeros();
    v[(1, 0)] = 1.0;
    v[(3, 0)] = -1.0 / c;
    v[(2, 1)] = 1.0;
    v[(3, 2)] = 1.0;
    v[(4, 2)] = a / (b + 1.0);
    v[(5, 3)] = 1.0;
    v[(0, 4)] = -alpha * a * (b + 1.0) * c;
    v[(1, 4)] = alpha * (b + 1.0).powi(2) * c;
    v[(3, 4)] = -alpha * b * (b + 1.0);
    v[(4, 4)] = -alpha * a * (b + 1.0);
    v[(4, 5)] = 1.0;
    v
}

/// Common column R_f of the spherical LTI matrix.
pub fn spherical_rf(chief: &ChiefOrbit, sh: &Shorthands) -> Vector6<f64> {
    let (a, b, c, g) = (sh.aq, sh.bq, sh.cq, sh.gamma);
    let ga = g * chief.a;
    Vector6::new(a * c, c * (b + 1.0).powi(2) / ga, 0.0, b, -2.0 * a * (b + 1.0) / ga, 0.0) * chief.alpha()
}

/// Normal n of the spherical stationary plane.
pub fn spherical_normal(chief: &ChiefOrbit, sh: &Shorthands) -> [f64; 3] {
    [(sh.bq + 2.0) / sh.cq, sh.aq, sh.gamma * chief.a]
}

fn r_spherical(chief: &ChiefOrbit, sh: &Shorthands) -> Matrix6<f64> {
    let rf = spherical_rf(chief, sh);
    let n = spherical_normal(chief, sh);
    let mut r = Matrix6::zeros();
    r.set_column(0, &(rf * n[0]));
    r.set_column(3, &(rf * n[1]));
    r.set_column(4, &(rf * n[2]));
    r
}

fn v_spherical(chief: &ChiefOrbit, sh: &Shorthands) -> Matrix6<f64> {
    let ga = sh.gamma * chief.a;
    let mut v = Matrix6::zeros();
    v[(1, 0)] = 1.0;
    v[(2, 1)] = 1.0;
    v[(3, 2)] = 1.0;
    v[(4, 2)] = -sh.aq / ga;
    v[(5, 3)] = 1.0;
    v.set_column(4, &(spherical_rf(chief, sh) * ga));
    v[(4, 5)] = 1.0;
    v
}

/// Closed-form θ-domain Cartesian LTI system. R uses the true shorthands;
/// V uses the regularized A when `policy` allows it.
pub fn lti_cartesian_closed(chief: &ChiefOrbit, policy: SingularityPolicy) -> Result<LtiSystem> {
    let (sh_reg, regularized) = regularized_shorthands(chief, policy)?;
    let alpha = chief.alpha();
    Ok(LtiSystem {
        r: r_cartesian(alpha, &chief.shorthands()),
        v: v_cartesian(alpha, &sh_reg),
        blocks: keplerian_blocks(),
        domain: Domain::Cartesian,
        indep: IndepVar::Theta,
        regularized,
    })
}

/// Closed-form θ-domain spherical LTI system.
pub fn lti_spherical_closed(chief: &ChiefOrbit, policy: SingularityPolicy) -> Result<LtiSystem> {
    let (sh_reg, regularized) = regularized_shorthands(chief, policy)?;
    Ok(LtiSystem {
        r: r_spherical(chief, &chief.shorthands()),
        v: v_spherical(chief, &sh_reg),
        blocks: keplerian_blocks(),
        domain: Domain::Spherical,
        indep: IndepVar::Theta,
        regularized,
    })
}

/// θ-domain LTI system in any coordinates.
pub fn lti_closed(chief: &ChiefOrbit, domain: Domain, policy: SingularityPolicy) -> Result<LtiSystem> {
    match domain {
        Domain::Qns => Ok(lti_qns(chief, IndepVar::Theta)),
        Domain::Cartesian => lti_cartesian_closed(chief, policy),
        Domain::Spherical => lti_spherical_closed(chief, policy),
    }
}

/// Printed eigenvector matrix; the flag reports A regularization.
pub fn eigvecs_closed(chief: &ChiefOrbit, domain: Domain, policy: SingularityPolicy) -> Result<(Matrix6<f64>, bool)> {
    let sys = lti_closed(chief, domain, policy)?;
    Ok((sys.v, sys.regularized))
}

// ---------------------------------------------------------------------------
// Modal constants

/// Solves V c = x with column equilibration; the fifth column of V is
/// typically orders of magnitude larger than the rest.
pub fn solve_balanced(v: &Matrix6<f64>, x: &Vector6<f64>) -> Result<Vector6<f64>> {
    let mut scaled = *v;
    let mut scale = Vector6::zeros();
    for j in 0..6 {
        let m = v.column(j).amax();
        scale[j] = if m > 0.0 { 1.0 / m } else { 1.0 };
        scaled.column_mut(j).scale_mut(scale[j]);
    }
    let y = scaled
        .lu()
        .solve(x)
        .ok_or(Error::NearSingular { condition: f64::INFINITY })?;
    Ok(y.component_mul(&scale))
}

/// Drift constant c6 in Cartesian coordinates; free of the A singularity.
pub fn cartesian_c6(chief: &ChiefOrbit, x0: &Vector6<f64>) -> f64 {
    let st = chief.eval_at_theta(chief.theta0);
    let sh = chief.shorthands();
    let (p, r0, n) = (chief.p(), st.r, chief.n());
    let one_m_e2 = 1.0 - chief.q1 * chief.q1 - chief.q2 * chief.q2;
    let k = st.vr / st.vt;
    (p / r0 + 1.0) * (p / r0) * n / one_m_e2.powf(1.5) * x0[0] + k / sh.cq * x0[1] + k * x0[3] + x0[4]
}

/// Drift constant c6 in spherical coordinates.
pub fn spherical_c6(chief: &ChiefOrbit, xs0: &Vector6<f64>) -> f64 {
    let st = chief.eval_at_theta(chief.theta0);
    let (p, r0) = (chief.p(), st.r);
    chief.mu / (chief.h() * r0 * r0) * (1.0 + p / r0) * xs0[0] + st.vr / (st.vt * r0) * xs0[3] + xs0[4]
}

fn cartesian_closed_constants(chief: &ChiefOrbit, x0: &Vector6<f64>) -> Vector6<f64> {
    let st = chief.eval_at_theta(chief.theta0);
    let sh = chief.shorthands();
    let (p, r0, n, cq) = (chief.p(), st.r, chief.n(), sh.cq);
    let one_m_e2 = 1.0 - chief.q1 * chief.q1 - chief.q2 * chief.q2;
    let t_over_r = st.vt / st.vr;
    Vector6::new(
        -t_over_r * x0[0] + x0[1],
        x0[2],
        (-t_over_r * r0 / p * x0[0] + x0[1] + cq * x0[3]) / cq,
        x0[5],
        -one_m_e2 * t_over_r / 3.0 * n * (r0 / p).powi(2) * x0[0],
        cartesian_c6(chief, x0),
    )
}

fn spherical_closed_constants(chief: &ChiefOrbit, xs0: &Vector6<f64>) -> Vector6<f64> {
    let st = chief.eval_at_theta(chief.theta0);
    let sh = chief.shorthands();
    let (p, r0, n, cq) = (chief.p(), st.r, chief.n(), sh.cq);
    let t_over_r = st.vt / st.vr;
    Vector6::new(
        -t_over_r / r0 * xs0[0] + xs0[1],
        xs0[2],
        ((1.0 - r0 / p) * t_over_r * xs0[0] + cq * xs0[3]) / cq,
        xs0[5],
        -t_over_r / (3.0 * chief.a) * n * (r0 / p) * xs0[0],
        spherical_c6(chief, xs0),
    )
}

/// Constants c = V⁻¹ χ(θ0) of the state `state0` given at the chief epoch.
pub fn modal_constants(
    chief: &ChiefOrbit,
    state0: &Vector6<f64>,
    domain: Domain,
    policy: SingularityPolicy,
) -> Result<ModalConstants> {
    let aq = chief.shorthands().aq;
    let closed = domain != Domain::Qns && aq.abs() >= CLOSED_FORM_MIN_A;
    let (c, regularized) = if closed {
        let c = match domain {
            Domain::Cartesian => cartesian_closed_constants(chief, state0),
            _ => spherical_closed_constants(chief, state0),
        };
        (c, false)
    } else {
        let sys = lti_closed(chief, domain, policy)?;
        (solve_balanced(&sys.v, state0)?, sys.regularized)
    };
    Ok(ModalConstants {
        c,
        theta0: chief.theta0,
        domain,
        regularized,
        closed_form: closed,
    })
}

/// Constants by the linear solve only.
pub fn modal_constants_numeric(
    chief: &ChiefOrbit,
    state0: &Vector6<f64>,
    domain: Domain,
    policy: SingularityPolicy,
) -> Result<ModalConstants> {
    let sys = lti_closed(chief, domain, policy)?;
    Ok(ModalConstants {
        c: solve_balanced(&sys.v, state0)?,
        theta0: chief.theta0,
        domain,
        regularized: sys.regularized,
        closed_form: false,
    })
}

// ---------------------------------------------------------------------------
// Circular reference: Clohessy-Wiltshire planar modes

/// Planar CW decomposition of (x, y, ẋ, ẏ) into an along-track offset, a
/// drift and one oscillatory pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CwModalDecomp {
    pub n: f64,
    pub c1: f64,
    pub c2: f64,
    pub cr: f64,
    pub ci: f64,
}

impl CwModalDecomp {
    fn v1() -> Vector4<f64> {
        Vector4::new(0.0, 1.0, 0.0, 0.0)
    }

    fn v2(&self) -> Vector4<f64> {
        Vector4::new(-2.0 / (3.0 * self.n), 0.0, 0.0, 1.0)
    }

    fn v_re(&self) -> Vector4<f64> {
        Vector4::new(-0.5 / self.n, 0.0, 0.0, 1.0)
    }

    fn v_im(&self) -> Vector4<f64> {
        Vector4::new(0.0, -1.0 / self.n, -0.5, 0.0)
    }

    /// Mode contributions at time t: offset, drift and oscillation.
    pub fn modes(&self, t: f64) -> [Vector4<f64>; 3] {
        let (s, c) = (self.n * t).sin_cos();
        let (vr, vi) = (self.v_re(), self.v_im());
        [
            Self::v1() * self.c1,
            (Self::v1() * t + self.v2()) * self.c2,
            (vr * c - vi * s) * (2.0 * self.cr) - (vr * s + vi * c) * (2.0 * self.ci),
        ]
    }

    pub fn state(&self, t: f64) -> Vector4<f64> {
        self.modes(t).iter().sum()
    }

    pub fn is_bounded(&self, tol: f64) -> bool {
        self.c2.abs() <= tol
    }

    pub fn eigenvalues(&self) -> [Complex64; 4] {
        let z = Complex64::new(0.0, 0.0);
        [z, z, Complex64::new(0.0, self.n), Complex64::new(0.0, -self.n)]
    }

    /// Eigenvector matrix with columns v1, v2, v3, v̄3.
    pub fn eigvecs(&self) -> Matrix4<Complex64> {
        let n = self.n;
        let r = |x: f64| Complex64::new(x, 0.0);
        let i = |x: f64| Complex64::new(0.0, x);
        Matrix4::new(
            r(0.0), r(-2.0 / (3.0 * n)), r(-0.5 / n), r(-0.5 / n),
            r(1.0), r(0.0), i(-1.0 / n), i(1.0 / n),
            r(0.0), r(0.0), i(-0.5), i(0.5),
            r(0.0), r(1.0), r(1.0), r(1.0),
        )
    }
}

pub fn cw_modal_decomp(n: f64, x0: &Vector4<f64>) -> Result<CwModalDecomp> {
    if !(n > 0.0) {
        return Err(Error::InvalidArgument(format!("mean motion must be positive, got {n}")));
    }
    let (x, y, xd, yd) = (x0[0], x0[1], x0[2], x0[3]);
    Ok(CwModalDecomp {
        n,
        c1: y - 2.0 * xd / n,
        c2: -6.0 * n * x - 3.0 * yd,
        cr: 3.0 * n * x + 2.0 * yd,
        ci: xd,
    })
}

/// Unwrapped angle helper re-exported for callers that need θ modulo a
/// revolution measured from epoch.
pub fn revolutions_since(theta0: f64, theta: f64) -> f64 {
    (theta - theta0) / TAU
}
