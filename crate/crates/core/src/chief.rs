//! Closed two-body chief orbit in quasi-nonsingular elements.
//!
//! The argument of latitude `theta` is carried as a continuously increasing
//! real number (never reduced mod 2π) so that secular terms in `theta - theta0`
//! stay meaningful over several revolutions.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Earth gravitational parameter, km³/s².
pub const MU_EARTH: f64 = 398_600.441_8;

const KEPLER_TOL: f64 = 1e-13;
const KEPLER_MAX_ITER: usize = 50;

/// Reference orbit of the chief satellite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiefOrbit {
    /// Semimajor axis, km.
    pub a: f64,
    /// e cos ω.
    pub q1: f64,
    /// e sin ω.
    pub q2: f64,
    /// Inclination, rad.
    pub inc: f64,
    /// Right ascension of the ascending node, rad.
    pub raan: f64,
    /// Epoch argument of latitude ω + f0, rad.
    pub theta0: f64,
    /// Gravitational parameter, km³/s².
    pub mu: f64,
}

/// Chief quantities evaluated at one argument of latitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitStateAtTheta {
    pub theta: f64,
    pub kappa: f64,
    /// Radius, km.
    pub r: f64,
    /// Radial velocity ṙ, km/s.
    pub vr: f64,
    /// Transverse velocity r θ̇, km/s.
    pub vt: f64,
    /// θ̇ = h / r², rad/s.
    pub thetadot: f64,
}

/// Epoch-dependent shorthand scalars shared by the Cartesian and spherical
/// LTI forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shorthands {
    /// q1² + q2² − 1.
    pub gamma: f64,
    /// q2 cos θ0 − q1 sin θ0.
    pub aq: f64,
    /// q1 cos θ0 + q2 sin θ0.
    pub bq: f64,
    /// h r0² / (a μ γ).
    pub cq: f64,
}

impl ChiefOrbit {
    pub fn new(a: f64, q1: f64, q2: f64, inc: f64, raan: f64, theta0: f64, mu: f64) -> Result<Self> {
        let chief = Self {
            a,
            q1,
            q2,
            inc,
            raan,
            theta0,
            mu,
        };
        chief.validate()?;
        Ok(chief)
    }

    fn validate(&self) -> Result<()> {
        let fields = [self.a, self.q1, self.q2, self.inc, self.raan, self.theta0, self.mu];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidOrbit("non-finite orbit parameter".into()));
        }
        if self.a <= 0.0 {
            return Err(Error::InvalidOrbit(format!("semimajor axis must be positive, got {}", self.a)));
        }
        if self.mu <= 0.0 {
            return Err(Error::InvalidOrbit(format!("mu must be positive, got {}", self.mu)));
        }
        let e2 = self.q1 * self.q1 + self.q2 * self.q2;
        if e2 >= 1.0 {
            return Err(Error::InvalidOrbit(format!(
                "eccentricity {} >= 1: orbit is not closed",
                e2.sqrt()
            )));
        }
        Ok(())
    }

    /// Same orbit with a different epoch argument of latitude.
    pub fn with_epoch(&self, theta0: f64) -> Self {
        Self { theta0, ..*self }
    }

    pub fn e(&self) -> f64 {
        self.q1.hypot(self.q2)
    }

    /// Argument of periapsis; zero for a circular orbit.
    pub fn argp(&self) -> f64 {
        if self.q1 == 0.0 && self.q2 == 0.0 {
            0.0
        } else {
            self.q2.atan2(self.q1)
        }
    }

    pub fn eta(&self) -> f64 {
        (1.0 - self.q1 * self.q1 - self.q2 * self.q2).sqrt()
    }

    /// Semi-latus rectum, km.
    pub fn p(&self) -> f64 {
        let eta = self.eta();
        self.a * eta * eta
    }

    /// Specific angular momentum, km²/s.
    pub fn h(&self) -> f64 {
        (self.mu * self.p()).sqrt()
    }

    /// Mean motion, rad/s.
    pub fn n(&self) -> f64 {
        (self.mu / (self.a * self.a * self.a)).sqrt()
    }

    /// Orbital period, s.
    pub fn period(&self) -> f64 {
        TAU / self.n()
    }

    pub fn kappa(&self, theta: f64) -> f64 {
        1.0 + self.q1 * theta.cos() + self.q2 * theta.sin()
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa(self.theta0)
    }

    /// Radius at epoch, km.
    pub fn r0(&self) -> f64 {
        self.p() / self.kappa0()
    }

    pub fn eval_at_theta(&self, theta: f64) -> OrbitStateAtTheta {
        let kappa = self.kappa(theta);
        let p = self.p();
        let h = self.h();
        let r = p / kappa;
        let (s, c) = theta.sin_cos();
        OrbitStateAtTheta {
            theta,
            kappa,
            r,
            vr: (h / p) * (self.q1 * s - self.q2 * c),
            vt: h / r,
            thetadot: h / (r * r),
        }
    }

    pub fn shorthands(&self) -> Shorthands {
        let (s0, c0) = self.theta0.sin_cos();
        let gamma = self.q1 * self.q1 + self.q2 * self.q2 - 1.0;
        let r0 = self.r0();
        Shorthands {
            gamma,
            aq: self.q2 * c0 - self.q1 * s0,
            bq: self.q1 * c0 + self.q2 * s0,
            cq: self.h() * r0 * r0 / (self.a * self.mu * gamma),
        }
    }

    /// Nonzero entry of the θ-domain LTI matrix in element differences,
    /// −3aη / (2 r0²).
    pub fn r21(&self) -> f64 {
        let r0 = self.r0();
        -1.5 * self.a * self.eta() / (r0 * r0)
    }

    /// Scale factor 2 R21 a / γ of the local-coordinate LTI matrices.
    pub fn alpha(&self) -> f64 {
        let gamma = self.q1 * self.q1 + self.q2 * self.q2 - 1.0;
        2.0 * self.r21() * self.a / gamma
    }

    /// Continuous mean anomaly at argument of latitude `theta`.
    pub fn mean_anomaly(&self, theta: f64) -> f64 {
        let e = self.e();
        let f = theta - self.argp();
        let k = (f / TAU).round();
        let f_red = f - k * TAU;
        let half = 0.5 * f_red;
        let ecc_anom = 2.0 * ((1.0 - e).sqrt() * half.sin()).atan2((1.0 + e).sqrt() * half.cos());
        ecc_anom - e * ecc_anom.sin() + k * TAU
    }

    /// Time since epoch (t(θ0) = 0) at argument of latitude `theta`.
    pub fn theta_to_time(&self, theta: f64) -> f64 {
        (self.mean_anomaly(theta) - self.mean_anomaly(self.theta0)) / self.n()
    }

    /// Argument of latitude reached `t` seconds after epoch.
    pub fn time_to_theta(&self, t: f64) -> Result<f64> {
        let e = self.e();
        let m = self.mean_anomaly(self.theta0) + self.n() * t;
        let k = (m / TAU).round();
        let m_red = m - k * TAU;
        let ecc_anom = solve_kepler(m_red, e)?;
        let half = 0.5 * ecc_anom;
        let f_red = 2.0 * ((1.0 + e).sqrt() * half.sin()).atan2((1.0 - e).sqrt() * half.cos());
        Ok(self.argp() + f_red + k * TAU)
    }
}

/// Builds a chief from classical elements (angles in radians).
pub fn make_chief(a: f64, e: f64, inc: f64, raan: f64, argp: f64, f0: f64, mu: f64) -> Result<ChiefOrbit> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::InvalidOrbit(format!(
            "eccentricity must satisfy 0 <= e < 1, got {e}"
        )));
    }
    ChiefOrbit::new(a, e * argp.cos(), e * argp.sin(), inc, raan, argp + f0, mu)
}

/// Solves Kepler's equation M = E − e sin E for the eccentric anomaly by
/// Newton iteration from Danby's starting guess.
pub fn solve_kepler(mean_anomaly: f64, e: f64) -> Result<f64> {
    let m = mean_anomaly;
    let mut ecc_anom = m + 0.85 * e * m.sin().signum();
    if e == 0.0 {
        return Ok(m);
    }
    for _ in 0..KEPLER_MAX_ITER {
        let (s, c) = ecc_anom.sin_cos();
        let step = (ecc_anom - e * s - m) / (1.0 - e * c);
        ecc_anom -= step;
        if step.abs() < KEPLER_TOL {
            return Ok(ecc_anom);
        }
    }
    Err(Error::KeplerNonConvergence {
        mean_anomaly: m,
        iterations: KEPLER_MAX_ITER,
    })
}

/// Orbit configuration as read from JSON (degrees at this boundary).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    pub a_km: f64,
    pub e: f64,
    pub i_deg: f64,
    pub raan_deg: f64,
    pub argp_deg: f64,
    pub f0_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_km3_s2: Option<f64>,
}

impl OrbitConfig {
    pub fn to_chief(&self) -> Result<ChiefOrbit> {
        make_chief(
            self.a_km,
            self.e,
            self.i_deg.to_radians(),
            self.raan_deg.to_radians(),
            self.argp_deg.to_radians(),
            self.f0_deg.to_radians(),
            self.mu_km3_s2.unwrap_or(MU_EARTH),
        )
    }

    /// The e = 0.74 Molniya-class reference orbit.
    pub fn molniya() -> Self {
        Self {
            a_km: 26_600.0,
            e: 0.74,
            i_deg: 63.4,
            raan_deg: 0.0,
            argp_deg: 270.0,
            f0_deg: 90.0,
            mu_km3_s2: None,
        }
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_pi(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}
