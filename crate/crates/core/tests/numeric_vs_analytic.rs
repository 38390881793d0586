use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Matrix6, Vector4};
use relmodes::analytic::{cw_modal_decomp, lf_qns, lti_closed, lti_qns, map_lf, SingularityPolicy};
use relmodes::chief::{make_chief, ChiefOrbit, OrbitConfig, MU_EARTH};
use relmodes::coords::Domain;
use relmodes::dynamics::{cartesian_plant_of_time, cw_planar_plant, qns_plant_time, IndepVar};
use relmodes::numeric::{dynamic_plant, numeric_floquet, NumericConfig};

fn scaling(chief: &ChiefOrbit) -> DMatrix<f64> {
    let (a, n) = (chief.a, chief.n());
    DMatrix::from_diagonal(&DVector::from_vec(vec![a, a, a, a * n, a * n, a * n]))
}

fn nondim(m: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    d.clone().try_inverse().unwrap() * m * d
}

fn to_dyn(m: &Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(6, 6, m.as_slice())
}

fn check_keplerian(chief: ChiefOrbit) {
    let cfg = NumericConfig {
        harmonics: 320,
        lf_samples: 65,
        ..Default::default()
    };
    let res = numeric_floquet(dynamic_plant(cartesian_plant_of_time(chief)), 0.0, chief.period(), &cfg).unwrap();
    let d = scaling(&chief);
    let analytic = to_dyn(&lti_closed(&chief, Domain::Cartesian, SingularityPolicy::Reject).unwrap().r) * chief.n();
    let (ln, la) = (nondim(&res.lambda, &d), nondim(&analytic, &d));
    assert!((&ln - &la).amax() < 1e-6 * la.amax());

    let lam_t = res.eigen.exponents().iter().map(|z| z.norm()).fold(0.0, f64::max) * chief.period();
    assert!(lam_t < 1e-5, "|λ|T = {lam_t:e}");
    // individual members of the defective cluster split like sqrt(eps)
    assert!(res.eigen.spread() * chief.period() < 1e-4);
    assert_eq!(res.eigen.clusters.len(), 1);
    assert_eq!(res.eigen.clusters[0].chains, vec![2, 1, 1, 1, 1]);
    assert!(res.liouville_error < 1e-8);

    let lf = map_lf(&chief, &lf_qns(&chief, IndepVar::Time), Domain::Cartesian).unwrap();
    for (t, p) in res.times.iter().zip(&res.lf_samples) {
        let theta = chief.time_to_theta(*t).unwrap();
        let err = (nondim(p, &d) - nondim(&to_dyn(&lf.at(theta)), &d)).amax();
        assert!(err < 1e-5, "t = {t}: {err:e}");
    }
}

#[test]
fn keplerian_molniya_matches_closed_form() {
    check_keplerian(OrbitConfig::molniya().to_chief().unwrap());
}

#[test]
fn keplerian_moderate_eccentricity_matches_closed_form() {
    check_keplerian(make_chief(7500.0, 0.2, 0.9, 0.3, 1.0, 2.2, MU_EARTH).unwrap());
}

#[test]
fn qns_monodromy_is_identity_plus_drift() {
    let chief = make_chief(9000.0, 0.3, 0.7, 0.0, 0.4, 1.3, MU_EARTH).unwrap();
    let plant = move |t: f64| {
        let theta = chief.time_to_theta(t)?;
        Ok(to_dyn(&qns_plant_time(&chief, theta).entries))
    };
    let cfg = NumericConfig {
        harmonics: 200,
        lf_samples: 5,
        ..Default::default()
    };
    let res = numeric_floquet(plant, 0.0, chief.period(), &cfg).unwrap();
    let r = to_dyn(&lti_qns(&chief, IndepVar::Theta).r);
    let want = DMatrix::identity(6, 6) + r * TAU;
    let mut scale = DMatrix::identity(6, 6);
    scale[(0, 0)] = chief.a;
    assert!((nondim(&res.monodromy, &scale) - nondim(&want, &scale)).amax() < 1e-8);
}

#[test]
fn cw_clusters_match_closed_form_modes() {
    let n = 1.1e-3;
    let a = DMatrix::from_column_slice(4, 4, cw_planar_plant(n).as_slice());
    let cfg = NumericConfig {
        samples: 16,
        harmonics: 2,
        lf_samples: 9,
        ..Default::default()
    };
    // a full period aliases the oscillatory exponents ±ni onto 0
    let period = TAU / n / 4.0;
    let res = numeric_floquet(move |_| Ok(a.clone()), 0.0, period, &cfg).unwrap();

    let mut eigs = res.eigen.eigenvalues();
    eigs.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
    // the defective zero pair splits by about sqrt(eps)·‖Λ‖
    let want = [-n, 0.0, 0.0, n];
    for (z, w) in eigs.iter().zip(want) {
        assert!((z.im - w).abs() < 1e-6 * n && z.re.abs() < 1e-6 * n, "{z}");
    }
    assert_eq!(res.modes.len(), 2);
    let drift = res.modes.iter().position(|m| !m.conjugate_pair).unwrap();
    assert_eq!(res.modes[drift].chain, 2);
    assert!(res.modes[drift].secular);

    let x0 = Vector4::new(0.3, -1.2, 2e-4, -5e-4);
    let cw = cw_modal_decomp(n, &x0).unwrap();
    let x0d = DVector::from_column_slice(x0.as_slice());
    for idx in 0..res.times.len() {
        for k in 0..3 {
            let t = res.times[idx] + k as f64 * period;
            let [offset, secular, osc] = cw.modes(t);
            let num_drift = res.mode(drift, idx, k, &x0d);
            let num_osc = res.mode(1 - drift, idx, k, &x0d);
            let scale = x0.norm().max(cw.state(t).norm());
            assert!((num_drift - DVector::from_column_slice((offset + secular).as_slice())).amax() < 1e-9 * scale);
            assert!((num_osc - DVector::from_column_slice(osc.as_slice())).amax() < 1e-9 * scale);
        }
    }
}
