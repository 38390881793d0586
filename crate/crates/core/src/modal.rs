//! Fundamental modal solutions of Keplerian relative motion: reconstruction,
//! per-mode curves, epoch remapping, maneuver constraints, the spherical
//! stationary plane and the variation of the modal constants.

use nalgebra::{DVector, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::analytic::{
    lf_qns, lti_closed, map_lf, modal_constants, regularized_shorthands, solve_balanced, spherical_normal,
    spherical_rf, LfTransform, LtiSystem, ModalConstants, SingularityPolicy,
};
use crate::chief::ChiefOrbit;
use crate::coords::{sph_cart_linear, Domain};
use crate::dynamics::{cartesian_plant_keplerian, uniform_grid, IndepVar};
use crate::error::{Error, Result};
use crate::ode::{integrate, Tolerances};

/// LF transform and LTI system of one chief in one set of coordinates.
#[derive(Debug, Clone)]
pub struct ModalModel {
    pub chief: ChiefOrbit,
    pub domain: Domain,
    pub lf: LfTransform,
    pub lti: LtiSystem,
}

impl ModalModel {
    pub fn new(chief: &ChiefOrbit, domain: Domain, policy: SingularityPolicy) -> Result<Self> {
        let src = lf_qns(chief, IndepVar::Theta);
        let lf = if domain == Domain::Qns { src } else { map_lf(chief, &src, domain)? };
        Ok(Self {
            chief: *chief,
            domain,
            lf,
            lti: lti_closed(chief, domain, policy)?,
        })
    }

    pub fn regularized(&self) -> bool {
        self.lf.regularized || self.lti.regularized
    }

    pub fn constants(&self, state0: &Vector6<f64>, policy: SingularityPolicy) -> Result<ModalConstants> {
        modal_constants(&self.chief, state0, self.domain, policy)
    }

    /// Fundamental matrix Ψ(θ) = P(θ) V e^{J(θ−θ0)}.
    pub fn fundamental(&self, theta: f64) -> Matrix6<f64> {
        let mut chain = self.lti.v;
        let dtheta = theta - self.chief.theta0;
        let head = self.lti.v.column(4).into_owned();
        chain.column_mut(5).axpy(dtheta, &head, 1.0);
        self.lf.at(theta) * chain
    }

    fn check(&self, c: &ModalConstants) -> Result<()> {
        if c.domain != self.domain {
            return Err(Error::InvalidArgument(format!(
                "constants are in {} coordinates, model is {}",
                c.domain, self.domain
            )));
        }
        if (c.theta0 - self.chief.theta0).abs() > 1e-12 * self.chief.theta0.abs().max(1.0) {
            return Err(Error::InvalidArgument("constants refer to a different epoch".into()));
        }
        Ok(())
    }

    pub fn reconstruct(&self, c: &ModalConstants, theta: f64) -> Result<Vector6<f64>> {
        self.check(c)?;
        Ok(self.fundamental(theta) * c.c)
    }

    /// Contribution of mode `k` (1-based) to the state at θ.
    pub fn mode_contribution(&self, c: &ModalConstants, k: usize, theta: f64) -> Result<Vector6<f64>> {
        self.check(c)?;
        Ok(self.mode_basis(k, theta)? * c.c[k - 1])
    }

    /// Mode `k` with unit weight.
    pub fn mode_basis(&self, k: usize, theta: f64) -> Result<Vector6<f64>> {
        if !(1..=6).contains(&k) {
            return Err(Error::InvalidArgument(format!("mode index must be 1..=6, got {k}")));
        }
        let v = &self.lti.v;
        let dir = if k == 6 {
            v.column(4) * (theta - self.chief.theta0) + v.column(5)
        } else {
            v.column(k - 1).into_owned()
        };
        Ok(self.lf.at(theta) * dir)
    }

    /// Cartesian-equivalent position norm used for normalization.
    fn position_norm(&self, theta: f64, x: &Vector6<f64>) -> f64 {
        match self.domain {
            Domain::Spherical => {
                let st = self.chief.eval_at_theta(theta);
                (sph_cart_linear(st.r, st.vr) * x).fixed_rows::<3>(0).norm()
            }
            _ => x.fixed_rows::<3>(0).norm(),
        }
    }
}

/// Sampled curve of one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCurve {
    pub mode_index: usize,
    pub secular: bool,
    pub thetas: Vec<f64>,
    pub states: Vec<Vector6<f64>>,
    /// Factor the raw mode was divided by (1 when not normalized).
    pub scale: f64,
}

/// Default θ grid for a mode: one period, three for the drift mode.
pub fn default_mode_grid(chief: &ChiefOrbit, mode_index: usize, steps: usize) -> Vec<f64> {
    let periods = if mode_index == 6 { 3.0 } else { 1.0 };
    uniform_grid(chief.theta0, chief.theta0 + periods * std::f64::consts::TAU, steps)
}

pub fn mode_trajectory(model: &ModalModel, mode_index: usize, grid: &[f64], normalize: bool) -> Result<ModeCurve> {
    let states = grid
        .iter()
        .map(|&th| model.mode_basis(mode_index, th))
        .collect::<Result<Vec<_>>>()?;
    let mut scale = 1.0;
    if normalize {
        let m = grid
            .iter()
            .zip(&states)
            .map(|(&th, x)| model.position_norm(th, x))
            .fold(0.0, f64::max);
        if m > 0.0 {
            scale = m;
        }
    }
    Ok(ModeCurve {
        mode_index,
        secular: mode_index == 6,
        thetas: grid.to_vec(),
        states: states.into_iter().map(|x| x / scale).collect(),
        scale,
    })
}

/// Constants of the same physical motion referred to a new epoch θ0'.
pub fn remap_epoch(
    model: &ModalModel,
    c: &ModalConstants,
    theta0_new: f64,
    policy: SingularityPolicy,
) -> Result<ModalConstants> {
    let x = model.reconstruct(c, theta0_new)?;
    modal_constants(&model.chief.with_epoch(theta0_new), &x, model.domain, policy)
}

/// Unit in-plane impulse direction (Δv_x, Δv_y) that leaves c6 unchanged
/// for an impulse applied at θ.
pub fn no_drift_maneuver_line(chief: &ChiefOrbit, theta: f64) -> [f64; 2] {
    let st = chief.eval_at_theta(theta);
    let norm = st.vt.hypot(st.vr);
    [st.vt / norm, -st.vr / norm]
}

/// Geometry of the spherical LTI dynamics ρ' = α(ρ·n)ζ, ρ = (χ1, χ4, χ5).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPlane {
    pub n_vec: Vector3<f64>,
    pub zeta: Vector3<f64>,
    pub alpha: f64,
    pub rf: Vector6<f64>,
    /// χ2' per unit ρ·n.
    pub chi2_gain: f64,
}

impl StationaryPlane {
    pub fn rho_rate(&self, rho: &Vector3<f64>) -> Vector3<f64> {
        self.zeta * (self.alpha * rho.dot(&self.n_vec))
    }

    pub fn chi2_rate(&self, rho: &Vector3<f64>) -> f64 {
        self.chi2_gain * rho.dot(&self.n_vec)
    }

    pub fn rho_of(chi: &Vector6<f64>) -> Vector3<f64> {
        Vector3::new(chi[0], chi[3], chi[4])
    }
}

pub fn stationary_plane(chief: &ChiefOrbit) -> StationaryPlane {
    let sh = chief.shorthands();
    let n = spherical_normal(chief, &sh);
    let ga = sh.gamma * chief.a;
    let alpha = chief.alpha();
    StationaryPlane {
        n_vec: Vector3::new(n[0], n[1], n[2]),
        zeta: Vector3::new(sh.aq * sh.cq, sh.bq, -2.0 * sh.aq * (sh.bq + 1.0) / ga),
        alpha,
        rf: spherical_rf(chief, &sh),
        chi2_gain: alpha * sh.cq * (sh.bq + 1.0).powi(2) / ga,
    }
}

/// One bounded orbit of a family through a common initial position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub xdot0: f64,
    pub ydot0: f64,
    pub state0: Vector6<f64>,
    pub constants: ModalConstants,
}

/// Planar Cartesian orbits through (x0, y0) at θ0 with c6 = 0, one per ẋ0.
pub fn sweep_bounded_family(
    chief: &ChiefOrbit,
    x0: f64,
    y0: f64,
    xdot0_list: &[f64],
    policy: SingularityPolicy,
) -> Result<Vec<FamilyMember>> {
    regularized_shorthands(chief, policy)?;
    xdot0_list
        .iter()
        .map(|&xd| {
            // c6 is affine in ẏ0 with unit coefficient
            let partial = Vector6::new(x0, y0, 0.0, xd, 0.0, 0.0);
            let yd = -crate::analytic::cartesian_c6(chief, &partial);
            let state0 = Vector6::new(x0, y0, 0.0, xd, yd, 0.0);
            Ok(FamilyMember {
                xdot0: xd,
                ydot0: yd,
                state0,
                constants: modal_constants(chief, &state0, Domain::Cartesian, policy)?,
            })
        })
        .collect()
}

/// Variation of the Cartesian modal constants, integrated in time.
///
/// `forcing(t, θ, x)` returns f(x, u, t) − A(t)x, the part of the dynamics
/// not captured by the Keplerian plant.
pub fn constants_rate(model: &ModalModel, theta: f64, forcing: &Vector6<f64>) -> Result<Vector6<f64>> {
    solve_balanced(&model.fundamental(theta), forcing)
}

/// Forcing of a control acceleration u (LVLH, km/s²): B u with B = [0; I].
pub fn control_forcing(u: &Vector3<f64>) -> Vector6<f64> {
    Vector6::new(0.0, 0.0, 0.0, u[0], u[1], u[2])
}

/// Forcing f − A x for full dynamics `f(t, x)` about the Keplerian plant.
pub fn forcing_from_dynamics<F>(chief: &ChiefOrbit, f: F) -> impl Fn(f64, f64, &Vector6<f64>) -> Result<Vector6<f64>>
where
    F: Fn(f64, &Vector6<f64>) -> Vector6<f64>,
{
    let c = *chief;
    move |t, theta, x| Ok(f(t, x) - cartesian_plant_keplerian(&c, theta).entries * x)
}

/// Integrates ċ = Ψ⁻¹(f − A x) from the model epoch (t = 0) to each time in
/// `times`.
pub fn integrate_constants<F>(
    model: &ModalModel,
    c0: &ModalConstants,
    times: &[f64],
    forcing: F,
    tol: Tolerances,
) -> Result<Vec<Vector6<f64>>>
where
    F: Fn(f64, f64, &Vector6<f64>) -> Result<Vector6<f64>>,
{
    if model.domain != Domain::Cartesian {
        return Err(Error::InvalidArgument("constants dynamics are defined for Cartesian coordinates".into()));
    }
    model.check(c0)?;
    let y0 = DVector::from_column_slice(c0.c.as_slice());
    let chief = model.chief;
    let ys = integrate(
        |t, y| {
            let theta = chief.time_to_theta(t)?;
            let c = Vector6::from_column_slice(y.as_slice());
            let psi = model.fundamental(theta);
            let x = psi * c;
            let rate = solve_balanced(&psi, &forcing(t, theta, &x)?)?;
            Ok(DVector::from_column_slice(rate.as_slice()))
        },
        0.0,
        &y0,
        times,
        tol,
    )?;
    Ok(ys.iter().map(|y| Vector6::from_column_slice(y.as_slice())).collect())
}
