use std::f64::consts::TAU;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, Matrix6, Vector6};
use relmodes::analytic::{lf_qns, lti_closed, lti_qns, map_lf, ModalConstants, SingularityPolicy};
use relmodes::chief::ChiefOrbit;
use relmodes::coords::Domain;
use relmodes::dynamics::{
    cartesian_plant_of_theta, cartesian_plant_of_time, cw_plant, propagate_linear, qns_plant_theta, qns_plant_time,
    uniform_grid, IndepVar,
};
use relmodes::io::{
    dmatrix_rows, matrix_rows, write_json, write_matrix_samples_csv, write_trajectory_csv, CurveLabel, TrajectoryRow,
};
use relmodes::modal::{default_mode_grid, mode_trajectory, sweep_bounded_family, ModalModel};
use relmodes::numeric::{dynamic_plant, numeric_floquet, NumericConfig, NumericFloquet};
use relmodes::ode::Tolerances;
use relmodes::validation::run_validation;
use serde_json::{json, Value};

use crate::config::{PlantKind, RunConfig};

const DEFAULT_STEPS: usize = 721;

pub struct Ctx {
    pub cfg: RunConfig,
    pub chief: ChiefOrbit,
    pub domain: Domain,
    pub policy: SingularityPolicy,
    pub out: PathBuf,
    pub periods: Option<f64>,
    pub tol: Tolerances,
}

impl Ctx {
    fn steps(&self) -> usize {
        self.cfg.steps.unwrap_or(DEFAULT_STEPS).max(2)
    }

    fn grid(&self, default_periods: f64) -> Vec<f64> {
        let p = self.periods.unwrap_or(default_periods);
        let th0 = self.chief.theta0;
        uniform_grid(th0, th0 + p * TAU, self.steps())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn model(&self) -> Result<ModalModel> {
        let model = ModalModel::new(&self.chief, self.domain, self.policy)?;
        if model.lti.regularized {
            log::warn!("e sin f0 vanishes; eigenvectors use a regularized A (shift f0 to avoid this)");
        }
        Ok(model)
    }

    fn rows(&self, thetas: &[f64], states: &[Vector6<f64>], label: CurveLabel) -> Vec<TrajectoryRow> {
        thetas
            .iter()
            .zip(states)
            .map(|(&theta, &state)| TrajectoryRow {
                theta,
                t_s: self.chief.theta_to_time(theta),
                state,
                label,
            })
            .collect()
    }
}

fn chief_json(chief: &ChiefOrbit) -> Value {
    json!({
        "a_km": chief.a,
        "e": chief.e(),
        "q1": chief.q1,
        "q2": chief.q2,
        "i_rad": chief.inc,
        "raan_rad": chief.raan,
        "theta0_rad": chief.theta0,
        "mu_km3_s2": chief.mu,
        "n_rad_s": chief.n(),
        "period_s": chief.period(),
    })
}

fn units() -> Value {
    json!({"length": "km", "angle": "rad", "time": "s"})
}

fn pos_norm(model: &ModalModel, theta: f64, x: &Vector6<f64>) -> f64 {
    match model.domain {
        Domain::Cartesian => x.fixed_rows::<3>(0).norm(),
        Domain::Spherical => {
            let st = model.chief.eval_at_theta(theta);
            (relmodes::coords::sph_cart_linear(st.r, st.vr) * x).fixed_rows::<3>(0).norm()
        }
        Domain::Qns => x.norm(),
    }
}

pub fn modes(ctx: &Ctx) -> Result<()> {
    let model = ctx.model()?;
    let mut entries = Vec::new();
    for k in 1..=6 {
        let grid = match ctx.periods {
            Some(_) => ctx.grid(1.0),
            None => default_mode_grid(&ctx.chief, k, ctx.steps()),
        };
        let curve = mode_trajectory(&model, k, &grid, true)?;
        let file = format!("mode_{k}.csv");
        write_trajectory_csv(&ctx.path(&file), ctx.domain, &ctx.rows(&curve.thetas, &curve.states, CurveLabel::Mode(k)))?;
        entries.push(json!({
            "mode_index": k,
            "file": file,
            "secular": curve.secular,
            "scale": curve.scale,
            "periods": (grid.last().unwrap() - grid[0]) / TAU,
        }));
    }
    let lti = &model.lti;
    let meta = json!({
        "representation": ctx.domain,
        "units": units(),
        "chief": chief_json(&ctx.chief),
        "eigenvalues": vec![[0.0, 0.0]; 6],
        "jordan_blocks": lti.blocks.iter().map(|b| json!({"eigenvalue": [b.eigenvalue.re, b.eigenvalue.im], "size": b.size})).collect::<Vec<_>>(),
        "R": matrix_rows(&lti.r),
        "V": matrix_rows(&lti.v),
        "regularized": {"lf": model.lf.regularized, "eigenvectors": lti.regularized},
        "modes": entries,
    });
    write_json(&ctx.path("modes.json"), &meta)?;
    println!("wrote 6 mode files and modes.json to {}", ctx.out.display());
    Ok(())
}

fn constants_json(c: &ModalConstants, model: &ModalModel) -> Value {
    // secular growth of the position per revolution
    let head = model.lf.at(model.chief.theta0) * model.lti.v.column(4);
    let per_rev = TAU * c.drift().abs() * pos_norm(model, model.chief.theta0, &head);
    json!({
        "c": c.c.as_slice(),
        "theta0_rad": c.theta0,
        "regularized": c.regularized,
        "closed_form": c.closed_form,
        "drift": {"c6": c.drift(), "growth_per_rev": per_rev},
    })
}

pub fn decompose(ctx: &Ctx) -> Result<()> {
    let model = ctx.model()?;
    let x0 = ctx
        .cfg
        .initial_state(&ctx.chief, ctx.domain)?
        .context("decompose needs 'state' or 'elements' in the config")?;
    let c = model.constants(&x0, ctx.policy)?;
    let grid = ctx.grid(1.0);
    let mut sum = vec![Vector6::zeros(); grid.len()];
    let mut out_of_plane = Vec::new();
    let mut extent = Vec::new();
    for k in 1..=6 {
        let states = grid
            .iter()
            .map(|&th| model.mode_contribution(&c, k, th))
            .collect::<relmodes::Result<Vec<_>>>()?;
        for (s, x) in sum.iter_mut().zip(&states) {
            *s += x;
        }
        out_of_plane.push(states.iter().map(|x| x[2].abs().max(x[5].abs())).fold(0.0, f64::max));
        extent.push(grid.iter().zip(&states).map(|(&th, x)| pos_norm(&model, th, x)).fold(0.0, f64::max));
        write_trajectory_csv(&ctx.path(&format!("mode_{k}.csv")), ctx.domain, &ctx.rows(&grid, &states, CurveLabel::Mode(k)))?;
    }
    write_trajectory_csv(&ctx.path("modes_sum.csv"), ctx.domain, &ctx.rows(&grid, &sum, CurveLabel::Sum))?;
    let full = grid
        .iter()
        .map(|&th| model.reconstruct(&c, th))
        .collect::<relmodes::Result<Vec<_>>>()?;
    write_trajectory_csv(&ctx.path("trajectory.csv"), ctx.domain, &ctx.rows(&grid, &full, CurveLabel::Sum))?;

    let mut cj = constants_json(&c, &model);
    let scale = grid.iter().zip(&full).map(|(&th, x)| pos_norm(&model, th, x)).fold(f64::MIN_POSITIVE, f64::max);
    let bounded = cj["drift"]["growth_per_rev"].as_f64().unwrap() <= 1e-9 * scale;
    cj["drift"]["bounded"] = json!(bounded);
    if !bounded {
        log::info!("c6 = {:.3e}: trajectory drifts", c.drift());
    }
    let meta = json!({
        "representation": ctx.domain,
        "units": units(),
        "chief": chief_json(&ctx.chief),
        "state0": x0.as_slice(),
        "constants": cj,
        "mode_extent": extent,
        "mode_out_of_plane_max": out_of_plane,
        "files": {"modes": (1..=6).map(|k| format!("mode_{k}.csv")).collect::<Vec<_>>(), "sum": "modes_sum.csv", "trajectory": "trajectory.csv"},
    });
    write_json(&ctx.path("decomposition.json"), &meta)?;
    println!("c = {:?}", c.c.as_slice());
    println!("drift c6 = {:.6e} ({})", c.drift(), if bounded { "bounded" } else { "drifting" });
    Ok(())
}

pub fn reconstruct(ctx: &Ctx) -> Result<()> {
    let model = ctx.model()?;
    let x0 = ctx.cfg.initial_state(&ctx.chief, ctx.domain)?;
    let c = match (&ctx.cfg.constants, x0) {
        (Some(c), _) => ModalConstants {
            c: Vector6::from_column_slice(c),
            theta0: ctx.chief.theta0,
            domain: ctx.domain,
            regularized: model.lti.regularized,
            closed_form: false,
        },
        (None, Some(x0)) => model.constants(&x0, ctx.policy)?,
        (None, None) => bail!("reconstruct needs 'constants', 'state' or 'elements' in the config"),
    };
    let grid = ctx.grid(1.0);
    let states = grid
        .iter()
        .map(|&th| model.reconstruct(&c, th))
        .collect::<relmodes::Result<Vec<_>>>()?;
    write_trajectory_csv(&ctx.path("trajectory.csv"), ctx.domain, &ctx.rows(&grid, &states, CurveLabel::Sum))?;

    let chief = ctx.chief;
    let span = (grid[0], *grid.last().unwrap());
    let propagated = match ctx.domain {
        Domain::Cartesian => Some(propagate_linear(cartesian_plant_of_theta(chief), IndepVar::Theta, &states[0], span, grid.len(), ctx.tol)?),
        Domain::Qns => Some(propagate_linear(
            move |th| Ok(qns_plant_theta(&chief, th).entries),
            IndepVar::Theta,
            &states[0],
            span,
            grid.len(),
            ctx.tol,
        )?),
        Domain::Spherical => None,
    };
    let check = propagated.map(|p| {
        let scale = states.iter().map(|x| x.amax()).fold(f64::MIN_POSITIVE, f64::max);
        p.states.iter().zip(&states).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max) / scale
    });
    let meta = json!({
        "representation": ctx.domain,
        "units": units(),
        "chief": chief_json(&ctx.chief),
        "constants": constants_json(&c, &model),
        "propagation_check": check,
        "file": "trajectory.csv",
    });
    write_json(&ctx.path("reconstruct.json"), &meta)?;
    if let Some(err) = check {
        println!("max relative deviation from integrated plant: {err:.3e}");
    }
    Ok(())
}

pub fn sweep(ctx: &Ctx) -> Result<()> {
    if ctx.domain != Domain::Cartesian {
        log::warn!("sweep is defined in Cartesian coordinates; ignoring representation {}", ctx.domain);
    }
    let sw = ctx.cfg.sweep.clone().unwrap_or_default();
    let members = sweep_bounded_family(&ctx.chief, sw.x0_km, sw.y0_km, &sw.xdot0_km_s, ctx.policy)?;
    let model = ModalModel::new(&ctx.chief, Domain::Cartesian, ctx.policy)?;
    let grid = ctx.grid(1.0);
    let mut entries = Vec::new();
    for (i, m) in members.iter().enumerate() {
        let states = grid
            .iter()
            .map(|&th| model.reconstruct(&m.constants, th))
            .collect::<relmodes::Result<Vec<_>>>()?;
        let file = format!("family_{i:02}.csv");
        write_trajectory_csv(&ctx.path(&file), Domain::Cartesian, &ctx.rows(&grid, &states, CurveLabel::Sum))?;
        let anchor = ((states[0][0] - sw.x0_km).powi(2) + (states[0][1] - sw.y0_km).powi(2)).sqrt();
        entries.push(json!({
            "file": file,
            "xdot0_km_s": m.xdot0,
            "ydot0_km_s": m.ydot0,
            "c": m.constants.c.as_slice(),
            "c6": m.constants.drift(),
            "anchor_miss_km": anchor,
        }));
    }
    let meta = json!({
        "representation": Domain::Cartesian,
        "units": units(),
        "chief": chief_json(&ctx.chief),
        "anchor_km": [sw.x0_km, sw.y0_km],
        "members": entries,
    });
    write_json(&ctx.path("sweep.json"), &meta)?;
    println!("wrote {} family members to {}", members.len(), ctx.out.display());
    Ok(())
}

fn to_dyn(m: &Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(6, 6, m.as_slice())
}

fn nondim(m: &DMatrix<f64>, s: &[f64; 6]) -> DMatrix<f64> {
    DMatrix::from_fn(6, 6, |i, j| m[(i, j)] * s[j] / s[i])
}

fn analytic_comparison(ctx: &Ctx, kind: PlantKind, res: &NumericFloquet) -> Result<Value> {
    let chief = &ctx.chief;
    let (a, n) = (chief.a, chief.n());
    let eig_t = res.eigen.exponents().iter().map(|z| z.norm()).fold(0.0, f64::max) * res.period;
    let spread_t = res.eigen.spread() * res.period;
    Ok(match kind {
        PlantKind::Cw => {
            let mut got: Vec<f64> = res.eigen.exponents().iter().map(|z| z.im).collect();
            got.sort_by(f64::total_cmp);
            let want = [-n, -n, 0.0, 0.0, n, n];
            let err = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max) / n;
            json!({"expected_eigenvalues_im": want, "eigenvalue_rel_error": err})
        }
        PlantKind::CartesianKeplerian => {
            let s = [a, a, a, a * n, a * n, a * n];
            let closed = to_dyn(&lti_closed(chief, Domain::Cartesian, SingularityPolicy::Regularize)?.r) * n;
            let (ln, lc) = (nondim(&res.lambda, &s), nondim(&closed, &s));
            let lf = map_lf(chief, &lf_qns(chief, IndepVar::Time), Domain::Cartesian)?;
            let mut lf_err: f64 = 0.0;
            for (t, p) in res.times.iter().zip(&res.lf_samples) {
                let th = chief.time_to_theta(*t)?;
                lf_err = lf_err.max((nondim(p, &s) - nondim(&to_dyn(&lf.at(th)), &s)).amax());
            }
            json!({
                "lambda_closed_form": dmatrix_rows(&closed),
                "lambda_rel_error": (ln - &lc).amax() / lc.amax(),
                "lambda21_equivalent": {"numeric": res.lambda[(1, 0)], "closed_form": closed[(1, 0)]},
                "lf_max_error": lf_err,
                "eigenvalue_times_period": eig_t,
                "cluster_spread_times_period": spread_t,
            })
        }
        PlantKind::Qns => {
            let s = [a, 1.0, 1.0, 1.0, 1.0, 1.0];
            let want = DMatrix::identity(6, 6) + to_dyn(&lti_qns(chief, IndepVar::Theta).r) * TAU;
            json!({
                "monodromy_expected": dmatrix_rows(&want),
                "monodromy_error": (nondim(&res.monodromy, &s) - nondim(&want, &s)).amax(),
                "eigenvalue_times_period": eig_t,
                "cluster_spread_times_period": spread_t,
            })
        }
    })
}

pub fn floquet_num(ctx: &Ctx) -> Result<()> {
    let sec = ctx.cfg.numeric.clone().unwrap_or_default();
    let cfg = NumericConfig {
        samples: sec.samples,
        harmonics: sec.harmonics,
        lf_samples: sec.lf_samples,
        aperiodicity_threshold: sec.aperiodicity_threshold,
        tol: ctx.tol,
        ..Default::default()
    };
    let chief = ctx.chief;
    let periods = ctx.periods.unwrap_or(1.0);
    let res = match sec.plant {
        PlantKind::Cw => {
            let a = to_dyn(&cw_plant(chief.n()));
            // a quarter revolution keeps ±ni off the logarithm's branch cut
            numeric_floquet(move |_| Ok(a.clone()), 0.0, periods * chief.period() / 4.0, &cfg)?
        }
        PlantKind::CartesianKeplerian => {
            numeric_floquet(dynamic_plant(cartesian_plant_of_time(chief)), 0.0, periods * chief.period(), &cfg)?
        }
        PlantKind::Qns => numeric_floquet(
            move |t| Ok(to_dyn(&qns_plant_time(&chief, chief.time_to_theta(t)?).entries)),
            0.0,
            periods * chief.period(),
            &cfg,
        )?,
    };
    if res.fit_residual > 1e-8 {
        log::warn!("Fourier fit residual {:.3e}; consider more harmonics", res.fit_residual);
    }
    let mut out = res.to_json();
    out["plant"] = serde_json::to_value(format!("{:?}", sec.plant))?;
    out["units"] = units();
    out["chief"] = chief_json(&chief);
    out["analytic_comparison"] = analytic_comparison(ctx, sec.plant, &res)?;
    write_json(&ctx.path("floquet.json"), &out)?;
    write_matrix_samples_csv(&ctx.path("lf_samples.csv"), &res.times, &res.lf_samples)?;
    for c in &res.eigen.clusters {
        println!("eigenvalue {:+.6e}{:+.6e}i  chains {:?}", c.eigenvalue.re, c.eigenvalue.im, c.chains);
    }
    println!("liouville error {:.3e}, fit residual {:.3e}", res.liouville_error, res.fit_residual);
    Ok(())
}

pub fn validate(ctx: &Ctx) -> Result<()> {
    let report = run_validation(&ctx.chief, ctx.tol, &ctx.out);
    write_json(&ctx.path("validate.json"), &report)?;
    for s in &report.suites {
        let status = match (s.skipped, s.passed) {
            (true, _) => "SKIP",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        };
        match (s.residual, s.threshold) {
            (Some(r), Some(t)) => println!("{status} {:<28} {r:.3e} (<= {t:.1e}) {}", s.suite, s.note),
            _ => println!("{status} {:<28} {}", s.suite, s.note),
        }
    }
    Ok(())
}
