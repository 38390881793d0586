//! Geometric maps from element differences to local coordinates, and the
//! Cartesian ↔ spherical conversions.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::chief::ChiefOrbit;
use crate::dynamics::CartState;
use crate::error::{Error, Result};

/// Relative-state representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Quasi-nonsingular element differences.
    Qns,
    /// LVLH Cartesian position and velocity.
    Cartesian,
    /// Local spherical coordinates.
    Spherical,
}

impl Domain {
    pub fn column_names(&self) -> [&'static str; 6] {
        match self {
            Domain::Qns => ["da_km", "dtheta_rad", "di_rad", "dq1", "dq2", "draan_rad"],
            Domain::Cartesian => ["x_km", "y_km", "z_km", "xdot_km_s", "ydot_km_s", "zdot_km_s"],
            Domain::Spherical => [
                "dr_km",
                "theta_r_rad",
                "phi_r_rad",
                "drdot_km_s",
                "theta_r_dot_rad_s",
                "phi_r_dot_rad_s",
            ],
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Qns => "qns",
            Domain::Cartesian => "cartesian",
            Domain::Spherical => "spherical",
        })
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qns" => Ok(Domain::Qns),
            "cart" | "cartesian" => Ok(Domain::Cartesian),
            "sph" | "spherical" => Ok(Domain::Spherical),
            other => Err(Error::InvalidArgument(format!("unknown representation '{other}'"))),
        }
    }
}

/// Local spherical relative state (km, rad, km/s, rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SphState {
    pub dr: f64,
    pub theta_r: f64,
    pub phi_r: f64,
    pub drdot: f64,
    pub theta_r_dot: f64,
    pub phi_r_dot: f64,
}

impl SphState {
    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            dr: v[0],
            theta_r: v[1],
            phi_r: v[2],
            drdot: v[3],
            theta_r_dot: v[4],
            phi_r_dot: v[5],
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.dr, self.theta_r, self.phi_r, self.drdot, self.theta_r_dot, self.phi_r_dot)
    }
}

/// Linear map from element differences to a local state at one θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoMap {
    pub entries: Matrix6<f64>,
    pub theta: f64,
    pub target: Domain,
}

impl GeoMap {
    pub fn apply(&self, d: &Vector6<f64>) -> Vector6<f64> {
        self.entries * d
    }
}

/// Map to LVLH Cartesian coordinates.
pub fn g_cartesian(chief: &ChiefOrbit, theta: f64) -> GeoMap {
    let st = chief.eval_at_theta(theta);
    let (r, vr, vt) = (st.r, st.vr, st.vt);
    let (a, p, h) = (chief.a, chief.p(), chief.h());
    let (q1, q2) = (chief.q1, chief.q2);
    let (s, c) = theta.sin_cos();
    let (si, ci) = chief.inc.sin_cos();
    let mut g = Matrix6::zeros();

    g[(0, 0)] = r / a;
    g[(0, 1)] = vr / vt * r;
    g[(0, 3)] = -r / p * (2.0 * a * q1 + r * c);
    g[(0, 4)] = -r / p * (2.0 * a * q2 + r * s);

    g[(1, 1)] = r;
    g[(1, 5)] = r * ci;

    g[(2, 2)] = r * s;
    g[(2, 5)] = -r * c * si;

    g[(3, 0)] = -vr / (2.0 * a);
    g[(3, 1)] = (1.0 / r - 1.0 / p) * h;
    g[(3, 3)] = (vr * a * q1 + h * s) / p;
    g[(3, 4)] = (vr * a * q2 - h * c) / p;

    g[(4, 0)] = -1.5 * vt / a;
    g[(4, 1)] = -vr;
    g[(4, 3)] = (3.0 * vt * a * q1 + 2.0 * h * c) / p;
    g[(4, 4)] = (3.0 * vt * a * q2 + 2.0 * h * s) / p;
    g[(4, 5)] = vr * ci;

    g[(5, 2)] = vt * c + vr * s;
    g[(5, 5)] = (vt * s - vr * c) * si;

    GeoMap {
        entries: g,
        theta,
        target: Domain::Cartesian,
    }
}

/// Map to local spherical coordinates (small-angle linearization).
pub fn g_spherical(chief: &ChiefOrbit, theta: f64) -> GeoMap {
    let st = chief.eval_at_theta(theta);
    let (r, vr, vt, w) = (st.r, st.vr, st.vt, st.thetadot);
    let (a, p, h) = (chief.a, chief.p(), chief.h());
    let (q1, q2) = (chief.q1, chief.q2);
    let (s, c) = theta.sin_cos();
    let (si, ci) = chief.inc.sin_cos();
    let mut g = Matrix6::zeros();

    g[(0, 0)] = r / a;
    g[(0, 1)] = vr / vt * r;
    g[(0, 3)] = -r / p * (2.0 * a * q1 + r * c);
    g[(0, 4)] = -r / p * (2.0 * a * q2 + r * s);

    g[(1, 1)] = 1.0;
    g[(1, 5)] = ci;

    g[(2, 2)] = s;
    g[(2, 5)] = -c * si;

    g[(3, 0)] = -vr / (2.0 * a);
    g[(3, 1)] = (1.0 / r - 1.0 / p) * h;
    g[(3, 3)] = (vr * a * q1 + h * s) / p;
    g[(3, 4)] = (vr * a * q2 - h * c) / p;

    g[(4, 0)] = -1.5 * w / a;
    g[(4, 1)] = -2.0 * vr / r;
    g[(4, 3)] = w / p * (3.0 * a * q1 + 2.0 * r * c);
    g[(4, 4)] = w / p * (3.0 * a * q2 + 2.0 * r * s);

    g[(5, 2)] = w * c;
    g[(5, 5)] = w * s * si;

    GeoMap {
        entries: g,
        theta,
        target: Domain::Spherical,
    }
}

/// Map for any domain; the element-difference domain maps by identity.
pub fn g_map(chief: &ChiefOrbit, theta: f64, domain: Domain) -> GeoMap {
    match domain {
        Domain::Qns => GeoMap {
            entries: Matrix6::identity(),
            theta,
            target: Domain::Qns,
        },
        Domain::Cartesian => g_cartesian(chief, theta),
        Domain::Spherical => g_spherical(chief, theta),
    }
}

/// Largest condition number accepted by [`g_inverse`] and [`checked_inverse`].
pub const MAX_CONDITION: f64 = 1e12;

/// Condition number of `m` after row/column equilibration, so that mixed
/// units do not dominate the estimate.
pub fn scaled_condition(m: &Matrix6<f64>) -> f64 {
    let mut s = *m;
    for i in 0..6 {
        let rmax = s.row(i).amax();
        if rmax > 0.0 {
            s.row_mut(i).scale_mut(1.0 / rmax);
        }
    }
    for j in 0..6 {
        let cmax = s.column(j).amax();
        if cmax > 0.0 {
            s.column_mut(j).scale_mut(1.0 / cmax);
        }
    }
    let sv = s.singular_values();
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

/// LU inverse guarded by the scaled condition number.
pub fn checked_inverse(m: &Matrix6<f64>) -> Result<Matrix6<f64>> {
    let condition = scaled_condition(m);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::NearSingular { condition });
    }
    m.lu()
        .try_inverse()
        .ok_or(Error::NearSingular { condition: f64::INFINITY })
}

pub fn g_inverse(map: &GeoMap) -> Result<Matrix6<f64>> {
    checked_inverse(&map.entries)
}

fn total_radius(rc: f64, state: &CartState) -> f64 {
    ((rc + state.x).powi(2) + state.y * state.y + state.z * state.z).sqrt()
}

/// Exact Cartesian → spherical conversion about a chief at radius `rc` with
/// radial rate `rc_dot`.
pub fn cart_to_sph(rc: f64, rc_dot: f64, state: &CartState) -> Result<SphState> {
    let rho = total_radius(rc, state);
    if !(rho > 0.0) {
        return Err(Error::UndefinedDirection);
    }
    let CartState { x, y, z, xdot, ydot, zdot } = *state;
    let dr = rho - rc;
    let drdot = ((rc + x) * (rc_dot + xdot) + y * ydot + z * zdot) / rho - rc_dot;
    let big_r = rc + dr;
    let big_r_dot = rc_dot + drdot;
    Ok(SphState {
        dr,
        theta_r: (y / (rc + x)).atan(),
        phi_r: (z / rho).asin(),
        drdot,
        theta_r_dot: ((rc + x) * ydot - y * (rc_dot + xdot)) / ((rc + x).powi(2) + y * y),
        phi_r_dot: (big_r * zdot - big_r_dot * z) / (big_r * big_r * (1.0 - z * z / (big_r * big_r)).sqrt()),
    })
}

/// Exact spherical → Cartesian conversion; velocities follow from
/// differentiating the position formulas.
pub fn sph_to_cart(rc: f64, rc_dot: f64, state: &SphState) -> Result<CartState> {
    if !(state.phi_r.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "spherical latitude {} outside (-pi/2, pi/2)",
            state.phi_r
        )));
    }
    let big_r = rc + state.dr;
    let big_r_dot = rc_dot + state.drdot;
    if !(big_r > 0.0) {
        return Err(Error::UndefinedDirection);
    }
    let (st, ct) = state.theta_r.sin_cos();
    let (sp, cp) = state.phi_r.sin_cos();
    let (wt, wp) = (state.theta_r_dot, state.phi_r_dot);
    Ok(CartState {
        x: big_r * ct * cp - rc,
        y: big_r * st * cp,
        z: big_r * sp,
        xdot: big_r_dot * ct * cp - big_r * st * cp * wt - big_r * ct * sp * wp - rc_dot,
        ydot: big_r_dot * st * cp + big_r * ct * cp * wt - big_r * st * sp * wp,
        zdot: big_r_dot * sp + big_r * cp * wp,
    })
}

/// Linearized Cartesian → spherical map L.
pub fn cart_sph_linear(rc: f64, rc_dot: f64) -> Matrix6<f64> {
    let mut l = Matrix6::zeros();
    l[(0, 0)] = 1.0;
    l[(1, 1)] = 1.0 / rc;
    l[(2, 2)] = 1.0 / rc;
    l[(3, 3)] = 1.0;
    l[(4, 4)] = 1.0 / rc;
    l[(4, 1)] = -rc_dot / (rc * rc);
    l[(5, 5)] = 1.0 / rc;
    l[(5, 2)] = -rc_dot / (rc * rc);
    l
}

/// Inverse of [`cart_sph_linear`].
pub fn sph_cart_linear(rc: f64, rc_dot: f64) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    m[(0, 0)] = 1.0;
    m[(1, 1)] = rc;
    m[(2, 2)] = rc;
    m[(3, 3)] = 1.0;
    m[(4, 4)] = rc;
    m[(4, 1)] = rc_dot;
    m[(5, 5)] = rc;
    m[(5, 2)] = rc_dot;
    m
}

/// L evaluated along the chief at θ.
pub fn cart_sph_linear_at(chief: &ChiefOrbit, theta: f64) -> Matrix6<f64> {
    let st = chief.eval_at_theta(theta);
    cart_sph_linear(st.r, st.vr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chief::{make_chief, OrbitConfig, MU_EARTH};
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn chief() -> ChiefOrbit {
        make_chief(15_000.0, 0.45, 0.9, 0.3, 1.2, 0.8, MU_EARTH).unwrap()
    }

    #[test]
    fn circular_first_entry_is_unity() {
        let c = make_chief(7000.0, 0.0, 0.9, 0.3, 1.2, 0.8, MU_EARTH).unwrap();
        for k in 0..8 {
            assert_relative_eq!(g_cartesian(&c, 0.8 * k as f64).entries[(0, 0)], 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn molniya_along_radial_coupling() {
        let c = OrbitConfig::molniya().to_chief().unwrap();
        let g = g_cartesian(&c, 0.0);
        let r = c.eval_at_theta(0.0).r;
        let aq = c.shorthands().aq;
        assert_relative_eq!(g.entries[(0, 1)], -aq * r * r / c.p(), max_relative = 1e-12);
        assert_relative_eq!(g.entries[(0, 1)], 0.74 * r * r / c.p(), max_relative = 1e-12);
    }

    #[test]
    fn semimajor_axis_column() {
        let c = chief();
        let th = 2.1;
        let st = c.eval_at_theta(th);
        let da = 0.37;
        let x = g_cartesian(&c, th).apply(&Vector6::new(da, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_relative_eq!(x[0], st.r / c.a * da);
        assert_eq!(x[1], 0.0);
        assert_eq!(x[2], 0.0);
        assert_relative_eq!(x[3], -st.vr / (2.0 * c.a) * da);
        assert_relative_eq!(x[4], -1.5 * st.vt / c.a * da);
        assert_eq!(x[5], 0.0);
    }

    #[test]
    fn spherical_rows_relate_to_cartesian() {
        let c = chief();
        for k in 0..12 {
            let th = -1.0 + 0.9 * k as f64;
            let gc = g_cartesian(&c, th).entries;
            let gs = g_spherical(&c, th).entries;
            let r = c.eval_at_theta(th).r;
            assert_eq!(gc.row(0), gs.row(0));
            assert_eq!(gc.row(3), gs.row(3));
            for j in 0..6 {
                assert_relative_eq!(gs[(1, j)], gc[(1, j)] / r, max_relative = 1e-14);
            }
            let l = cart_sph_linear_at(&c, th);
            let diff = gs - l * gc;
            for i in 0..6 {
                for j in 0..6 {
                    assert!(diff[(i, j)].abs() <= 1e-10 * gs[(i, j)].abs().max(gs.row(i).amax()));
                }
            }
        }
    }

    #[test]
    fn spherical_circular_rate_entry() {
        let c = make_chief(7000.0, 0.0, 0.9, 0.3, 1.2, 0.8, MU_EARTH).unwrap();
        let g = g_spherical(&c, 1.3).entries;
        assert_relative_eq!(g[(4, 0)], -1.5 * c.n() / c.a, max_relative = 1e-13);
    }

    #[test]
    fn maps_are_periodic() {
        let c = chief();
        for k in 0..10 {
            let th = 0.6 * k as f64;
            for d in [Domain::Cartesian, Domain::Spherical] {
                let a = g_map(&c, th, d).entries;
                let b = g_map(&c, th + TAU, d).entries;
                assert!((a - b).abs().max() <= 1e-12 * a.abs().max());
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let c = chief();
        let g = g_cartesian(&c, 0.4);
        let gi = g_inverse(&g).unwrap();
        let prod = g.entries * gi;
        assert!((prod - Matrix6::identity()).abs().max() < 1e-10);
        let d = Vector6::new(0.1, 1e-5, 2e-5, 1e-5, -3e-5, 4e-6);
        let back = gi * g.apply(&d);
        assert!((back - d).norm() < 1e-12 * d.norm().max(1e-300) * 1e3);
    }

    #[test]
    fn inverse_rejects_singular() {
        let mut m = Matrix6::identity();
        m[(5, 5)] = 0.0;
        let g = GeoMap {
            entries: m,
            theta: 0.0,
            target: Domain::Cartesian,
        };
        assert!(matches!(g_inverse(&g), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn equatorial_chief_cartesian_map_is_singular() {
        let c = make_chief(7000.0, 0.1, 0.0, 0.0, 0.0, 0.3, MU_EARTH).unwrap();
        assert!(g_inverse(&g_cartesian(&c, 0.5)).is_err());
    }

    #[test]
    fn sph_coincident_and_simple() {
        let s = cart_to_sph(7000.0, 0.1, &CartState::default()).unwrap();
        assert_eq!(s.to_vector(), Vector6::zeros());
        let s = cart_to_sph(7000.0, 0.0, &CartState { y: 7000.0, ..Default::default() }).unwrap();
        assert_relative_eq!(s.theta_r, std::f64::consts::FRAC_PI_4, max_relative = 1e-15);
        let origin = CartState { x: -7000.0, ..Default::default() };
        assert!(matches!(cart_to_sph(7000.0, 0.0, &origin), Err(Error::UndefinedDirection)));
    }

    #[test]
    fn sph_to_cart_zero_and_pole() {
        let c = sph_to_cart(7000.0, 0.2, &SphState::default()).unwrap();
        assert!(c.to_vector().norm() < 1e-12);
        let pole = SphState {
            phi_r: std::f64::consts::FRAC_PI_2,
            ..Default::default()
        };
        assert!(sph_to_cart(7000.0, 0.0, &pole).is_err());
    }

    #[test]
    fn linear_map_structure() {
        let l = cart_sph_linear(7000.0, 1.5);
        assert_relative_eq!(l[(4, 1)], -1.5 / 49e6);
        assert_relative_eq!(l[(4, 4)], 1.0 / 7000.0);
        let l0 = cart_sph_linear(7000.0, 0.0);
        let diag = [1.0, 1.0 / 7000.0, 1.0 / 7000.0, 1.0, 1.0 / 7000.0, 1.0 / 7000.0];
        assert_eq!(l0, Matrix6::from_diagonal(&Vector6::from_column_slice(&diag)));
        let prod = l * sph_cart_linear(7000.0, 1.5);
        assert!((prod - Matrix6::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn domain_parsing() {
        assert_eq!("cart".parse::<Domain>().unwrap(), Domain::Cartesian);
        assert_eq!("sph".parse::<Domain>().unwrap(), Domain::Spherical);
        assert_eq!("QNS".parse::<Domain>().unwrap(), Domain::Qns);
        assert!("polar".parse::<Domain>().is_err());
    }
}
