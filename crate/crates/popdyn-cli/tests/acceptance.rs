//! End-to-end acceptance checks. Each test prints one pass/fail line; run
//! with `--nocapture` to see them all.

use std::process::Command;
use std::time::Instant;

use rand::Rng;
use popdyn::analysis::{
    convergence_experiment, delta_neighborhood, lattice_state_for, lyapunov_derivative_check,
};
use popdyn::construct::{
    build_population_model, build_sign_model, decompose_field, drift_identity_max_error,
    lorenz_field, lorenz_model, DecomposeMode, VectorField,
};
use popdyn::control::{
    finite_horizon_control, mean_field_control_gap, stationary_cure_rate, stationary_objective,
    ControlProblem,
};
use popdyn::meanfield::systems::{moment_bounds, sis_scalar_rhs};
use popdyn::rate::RateFunction;
use popdyn::rng::{derive_seed, stream_rng};
use popdyn::{
    engine_by_name, integrate, simulate_ensemble, Polynomial, PopulationModel, RewardSpec,
    ScalarFn,
};

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion}: {detail}");
}

fn sinusoidal_sis() -> PopulationModel {
    PopulationModel::make_sis(
        &RateFunction::sinusoid(2.0, 1.0, 1.0, 0.0),
        &RateFunction::constant(1.0),
    )
    .unwrap()
}

fn drift_raw(model: &PopulationModel, t: f64, x: &[f64], dx: &mut [f64]) {
    dx.fill(0.0);
    for ch in &model.channels {
        let r = ch.rate.eval(t, x);
        for (d, &j) in dx.iter_mut().zip(&ch.jump) {
            *d += j as f64 * r;
        }
    }
}

#[test]
fn criterion_01_mean_field_convergence() {
    let start = Instant::now();
    let model = sinusoidal_sis();
    let engine = engine_by_name("thinning").unwrap();
    let rep = convergence_experiment(
        &model,
        engine.as_ref(),
        &[0.7, 0.3],
        10.0,
        &[100, 400, 1600, 6400],
        100,
        42,
    )
    .unwrap();
    let medians: Vec<f64> = rep.entries.iter().map(|e| e.median).collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let slope_ok = (-0.65..=-0.35).contains(&rep.slope);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        decreasing && slope_ok && elapsed < 120.0,
        &format!(
            "sup-deviation medians {medians:?} decreasing={decreasing}, log-log slope {:.3} in [-0.65,-0.35], {elapsed:.1}s < 120s",
            rep.slope
        ),
    );
}

#[test]
fn criterion_02_moment_sandwich() {
    let lambda = RateFunction::constant(2.0);
    let mu = RateFunction::constant(0.8);
    let model = PopulationModel::make_sis(&lambda, &mu).unwrap();
    let engine = engine_by_name("thinning").unwrap();
    let n = 200u64;
    let paths = 400usize;
    let set = moment_bounds(&lambda, &mu, 0.3, n, (0.0, 5.0), 1e-8).unwrap();
    let grid: Vec<f64> = (0..=100).map(|i| 5.0 * i as f64 / 100.0).collect();
    let x0 = lattice_state_for(&model, n, &[0.7, 0.3]).unwrap();
    let summary =
        simulate_ensemble(&model, engine.as_ref(), n, &x0, 5.0, paths, &grid, None, 7).unwrap();
    let mut worst_low = f64::NEG_INFINITY;
    let mut worst_high = f64::NEG_INFINITY;
    let mut worst_order = f64::NEG_INFINITY;
    for (gi, &t) in grid.iter().enumerate() {
        let mean_y = summary.mean[gi * 2 + 1];
        let se = (summary.variance[gi * 2 + 1] / paths as f64).sqrt();
        let [y, z, _, _, _] = set.eval(t);
        worst_low = worst_low.max(z - 3.0 * se - mean_y);
        worst_high = worst_high.max(mean_y - y - 3.0 * se);
        worst_order = worst_order.max(z - y);
    }
    // 1e-12 absorbs rounding in the comparisons themselves
    let pass = worst_low <= 1e-12 && worst_high <= 1e-12 && worst_order <= 1e-7;
    report(
        2,
        pass,
        &format!(
            "z-3SE <= mean <= Y+3SE on [0,5] (margins {worst_low:.2e}, {worst_high:.2e}); z <= Y pointwise (max excess {worst_order:.2e})"
        ),
    );
}

#[test]
fn criterion_03_constant_rate_equilibria() {
    let mut rng = stream_rng(303, 0);
    let mut tested = 0;
    let mut worst = 0.0f64;
    let mut exact_holds = true;
    while tested < 20 {
        let l = 0.5 + 2.5 * rng.random::<f64>();
        let mu = 0.2 + 2.3 * rng.random::<f64>();
        let c = 0.3 + 1.5 * rng.random::<f64>();
        let m = mu / l;
        // skip near-degenerate triples where the two roots almost merge
        if (m - c).abs() < 0.1 {
            continue;
        }
        let target = if m < c { m } else { c };
        let basin = if m < c { c } else { m };
        let rate = l * (m - c).abs();
        let t_end = (15.0 / rate).clamp(10.0, 600.0);
        for j in 0..5 {
            let x0 = 0.95 * basin * j as f64 / 4.0;
            let traj = integrate(
                |_, x, dx| dx[0] = l * (x[0] - m) * (x[0] - c),
                &[x0],
                (0.0, t_end),
                1e-9,
                1e-12,
            )
            .unwrap();
            worst = worst.max((traj.eval(t_end)[0] - target).abs());
        }
        if m < c {
            // x(0) = c sits on the repelling root; the factored field is
            // exactly zero there, so the integrator must not move at all
            let traj = integrate(
                |_, x, dx| dx[0] = l * (x[0] - m) * (x[0] - c),
                &[c],
                (0.0, 5.0),
                1e-9,
                1e-12,
            )
            .unwrap();
            exact_holds &= traj.eval(5.0)[0] == c;
        }
        tested += 1;
    }
    report(
        3,
        worst <= 1e-5 && exact_holds,
        &format!(
            "20 random triples x 5 starts reach the case-predicted limit (worst gap {worst:.2e} <= 1e-5); x(0)=c stays at c exactly: {exact_holds}"
        ),
    );
}

#[test]
fn criterion_04_delta_neighborhood() {
    let lambda = RateFunction::constant(2.0);
    let mu = RateFunction::sinusoid(0.8, 0.1, 1.0, 0.0);
    let (c, psi) = (1.0, 0.9);
    let delta = delta_neighborhood(&lambda, &mu, psi, c, 40.0).unwrap();
    let formula_ok = (delta - 0.25).abs() <= 1e-10;
    let traj = integrate(
        |t, x, dx| dx[0] = sis_scalar_rhs(lambda.value(t), mu.value(t), c, x[0]),
        &[0.9],
        (0.0, 40.0),
        1e-9,
        1e-11,
    )
    .unwrap();
    let tail_ok =
        popdyn::analysis::asymptote_check(&traj, |t| mu.value(t) / lambda.value(t), delta, 20.0)
            .unwrap();
    let lyap = lyapunov_derivative_check(&lambda, &mu, c, &traj, delta, Some(psi)).unwrap();
    report(
        4,
        formula_ok && tail_ok && lyap.passed,
        &format!(
            "delta = {delta:.12} matches 0.25 to 1e-10: {formula_ok}; tail within delta+1e-6 of mu/lambda: {tail_ok}; Lyapunov violations: {}",
            lyap.violations
        ),
    );
}

fn random_scalar_fn(rng: &mut impl Rng) -> ScalarFn {
    match rng.random_range(0..3) {
        0 => ScalarFn::Linear { rate: 2.0 * rng.random::<f64>() },
        1 => ScalarFn::Quadratic { coef: 2.0 * rng.random::<f64>() },
        _ => {
            let x1 = 0.2 + 0.6 * rng.random::<f64>();
            let x2 = x1 + 0.2 + 1.0 * rng.random::<f64>();
            ScalarFn::PiecewiseLinear {
                knots: vec![
                    (0.0, 2.0 * rng.random::<f64>()),
                    (x1, 2.0 * rng.random::<f64>()),
                    (x2, 2.0 * rng.random::<f64>()),
                ],
            }
        }
    }
}

#[test]
fn criterion_05_stationary_control() {
    let linear_spec = |mu_cost: f64| RewardSpec {
        reward: ScalarFn::Linear { rate: 1.0 },
        cost: ScalarFn::Linear { rate: 1.0 },
        control_cost_lambda: ScalarFn::zero(),
        control_cost_mu: ScalarFn::Linear { rate: mu_cost },
        base_lambda: RateFunction::constant(2.0),
        base_mu: RateFunction::constant(0.8),
    };
    let (mu1, v1) = stationary_cure_rate(&linear_spec(0.5), 2.0, 1.0, None).unwrap();
    let (mu2, v2) = stationary_cure_rate(&linear_spec(1.5), 2.0, 1.0, None).unwrap();
    let examples_ok = (mu1 - 2.0).abs() <= 1e-4
        && v1.abs() <= 1e-6
        && mu2.abs() <= 1e-4
        && (v2 + 1.0).abs() <= 1e-6;

    let mut rng = stream_rng(505, 0);
    let mut worst_mu = 0.0f64;
    let mut worst_v = 0.0f64;
    let mut accepted = 0;
    while accepted < 50 {
        let spec = RewardSpec {
            reward: random_scalar_fn(&mut rng),
            cost: random_scalar_fn(&mut rng),
            control_cost_lambda: ScalarFn::zero(),
            // strictly concave tail keeps the maximizer unique
            control_cost_mu: ScalarFn::Quadratic { coef: 0.01 + 0.49 * rng.random::<f64>() },
            base_lambda: RateFunction::constant(2.0),
            base_mu: RateFunction::constant(0.8),
        };
        let lambda = 0.5 + 2.5 * rng.random::<f64>();
        let c = 0.3 + 1.5 * rng.random::<f64>();
        let (mu, v) = stationary_cure_rate(&spec, lambda, c, None).unwrap();
        // a maximizer sitting on an objective kink is resolved only to grid
        // precision by any finite brute-force grid, so the 1e-6 value match
        // is meaningful only for smooth interior peaks; skip kink peaks
        let mut kinks = vec![lambda * c];
        if let ScalarFn::PiecewiseLinear { knots } = &spec.reward {
            kinks.extend(knots.iter().map(|(x, _)| lambda * x));
        }
        if let ScalarFn::PiecewiseLinear { knots } = &spec.cost {
            kinks.extend(knots.iter().map(|(y, _)| lambda * (c - y)));
        }
        if kinks.iter().any(|k| (mu - k).abs() < 0.02) {
            continue;
        }
        accepted += 1;
        let mu_max = 10.0 * lambda * c;
        let mut b_mu = 0.0;
        let mut b_v = stationary_objective(&spec, lambda, c, 0.0);
        for i in 1..=1_000_000 {
            let cand = mu_max * i as f64 / 1e6;
            let val = stationary_objective(&spec, lambda, c, cand);
            if val > b_v + 1e-15 {
                b_v = val;
                b_mu = cand;
            }
        }
        worst_mu = worst_mu.max((mu - b_mu).abs());
        worst_v = worst_v.max((v - b_v).abs());
    }
    report(
        5,
        examples_ok && worst_mu <= 1e-4 && worst_v <= 1e-6,
        &format!(
            "linear examples (mu*={mu1:.6}, J={v1:.2e}) and (mu*={mu2:.2e}, J={v2:.8}); 50 random specs vs 1e6-point brute force: worst |d mu| {worst_mu:.2e} <= 1e-4, worst |dJ| {worst_v:.2e} <= 1e-6"
        ),
    );
}

#[test]
fn criterion_06_control_gap() {
    let model = PopulationModel::make_sis(
        &RateFunction::constant(2.0),
        &RateFunction::constant(0.8),
    )
    .unwrap();
    let engine = engine_by_name("thinning").unwrap();
    let horizon = 5.0;
    let reference = integrate(
        |t, x, dx| drift_raw(&model, t, x, dx),
        &[0.7, 0.3],
        (0.0, horizon),
        1e-9,
        1e-11,
    )
    .unwrap();
    let z_t = reference.eval(horizon);
    let c1 = |_: f64, _: &[f64]| 0.0;
    let c2 = move |z: &[f64]| -> f64 { z.iter().zip(&z_t).map(|(a, b)| (a - b).abs()).sum() };
    let rep = mean_field_control_gap(
        &model,
        engine.as_ref(),
        &c1,
        &c2,
        &[0.7, 0.3],
        horizon,
        &[100, 1000, 10000],
        200,
        606,
    )
    .unwrap();
    let gaps: Vec<f64> = rep.entries.iter().map(|e| e.gap).collect();
    let last = rep.entries.last().unwrap();
    let bound = 3.0 * last.se + 0.01;
    report(
        6,
        rep.decreasing && last.gap <= bound,
        &format!(
            "gaps {gaps:?} decreasing={}; at n=10000 gap {:.4} <= 3*SE+0.01 = {bound:.4}",
            rep.decreasing, last.gap
        ),
    );
}

#[test]
fn criterion_07_ideal_trajectory_realization() {
    let spec = RewardSpec {
        reward: ScalarFn::PiecewiseLinear { knots: vec![(0.0, 0.0), (0.4, 1.0), (1.0, 0.0)] },
        cost: ScalarFn::zero(),
        control_cost_lambda: ScalarFn::zero(),
        control_cost_mu: ScalarFn::zero(),
        base_lambda: RateFunction::constant(2.0),
        base_mu: RateFunction::constant(0.8),
    };
    let (lambda_cap, x_star, c, x0, horizon) = (50.0, 0.4, 1.0, 0.9, 10.0);
    // ideal policy pins mu/lambda at x_star with the rate cap
    let (l_id, m_id) = (lambda_cap, lambda_cap * x_star);
    let traj = integrate(
        |_, x, dx| dx[0] = sis_scalar_rhs(l_id, m_id, c, x[0]),
        &[x0],
        (0.0, horizon),
        1e-10,
        1e-12,
    )
    .unwrap();
    let segs = 2000usize;
    let h = horizon / segs as f64;
    let r = |t: f64| spec.reward.eval(traj.eval(t)[0]);
    let mut acc = r(0.0) + r(horizon);
    for j in 1..segs {
        acc += if j % 2 == 1 { 4.0 } else { 2.0 } * r(h * j as f64);
    }
    let rollout = acc * h / 3.0;

    let problem = ControlProblem {
        spec: &spec,
        c,
        x0,
        horizon,
        knots: 32,
        lambda_box: (0.0, lambda_cap),
        mu_box: (0.0, lambda_cap),
        terminal: None,
    };
    let solution = finite_horizon_control(&problem).unwrap();
    let rel = (rollout - solution.value).abs() / solution.value.abs().max(1e-12);
    report(
        7,
        rel <= 0.05,
        &format!(
            "ideal rollout {rollout:.4} vs 32-knot shooting best {:.4}: relative gap {rel:.4} <= 0.05",
            solution.value
        ),
    );
}

fn acceptance_fields() -> Vec<VectorField> {
    let unit_lorenz = lorenz_field(10.0, 28.0, 8.0 / 3.0)
        .rescaled(
            &popdyn::affine_rescale(&[-20.0, -27.0, 0.0], &[20.0, 27.0, 50.0], 1.0).unwrap(),
        )
        .unwrap();
    vec![
        VectorField::new(vec![Polynomial::from_monomials(1, &[(-1.0, &[1])])]).unwrap(),
        VectorField::new(vec![Polynomial::from_monomials(1, &[(1.0, &[1]), (-0.5, &[0])])])
            .unwrap(),
        VectorField::new(vec![
            Polynomial::from_monomials(2, &[(1.0, &[0, 1]), (-0.5, &[1, 0])]),
            Polynomial::from_monomials(2, &[(-1.0, &[1, 1]), (0.25, &[0, 0])]),
        ])
        .unwrap(),
        VectorField::new(vec![Polynomial::from_monomials(1, &[(0.3, &[0])])]).unwrap(),
        unit_lorenz,
    ]
}

#[test]
fn criterion_08_construction_drift_identity() {
    let mut worst = 0.0f64;
    for (i, field) in acceptance_fields().iter().enumerate() {
        let dec = decompose_field(field, DecomposeMode::Auto).unwrap();
        let p1 = build_population_model(&dec, 0.7, 100, true).unwrap();
        let p2 = build_sign_model(field, 0.7, 100, true).unwrap();
        worst = worst.max(drift_identity_max_error(&p1, field, 1000, 800 + i as u64).unwrap());
        worst = worst.max(drift_identity_max_error(&p2, field, 1000, 900 + i as u64).unwrap());
    }
    let (cm, map) = lorenz_model(10.0, 28.0, 8.0 / 3.0, 0.015, 6000, None).unwrap();
    let lfield = lorenz_field(10.0, 28.0, 8.0 / 3.0).rescaled(&map).unwrap();
    worst = worst.max(drift_identity_max_error(&cm, &lfield, 1000, 808).unwrap());
    report(
        8,
        worst <= 1e-12,
        &format!(
            "sum of jump*rate equals alpha*F for both procedures on 5 fields + Lorenz preset; worst error {worst:.2e} <= 1e-12"
        ),
    );
}

#[test]
fn criterion_09_lorenz_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_popdyn"))
        .args([
            "construct",
            "--preset",
            "lorenz",
            "--seed",
            "11",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    let mut sign_changes = 0usize;
    let mut prev = 0i8;
    let mut inside = 0usize;
    let mut total = 0usize;
    // invariant box [-20,20]x[-27,27]x[0,50] inflated by 10% of each width
    let (lo, hi) = ([-24.0, -32.4, -5.0], [24.0, 32.4, 55.0]);
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let s = if v[1] >= 0.0 { 1i8 } else { -1i8 };
        if prev != 0 && s != prev {
            sign_changes += 1;
        }
        prev = s;
        total += 1;
        if (0..3).all(|k| v[k + 1] >= lo[k] && v[k + 1] <= hi[k]) {
            inside += 1;
        }
    }
    let manifest = std::fs::read_to_string(dir.path().join("construct.json")).unwrap();
    let events: u64 = serde_json::from_str::<serde_json::Value>(&manifest).unwrap()
        ["events_simulated"]
        .as_u64()
        .unwrap();
    let frac = inside as f64 / total as f64;
    report(
        9,
        events >= 1_000_000 && sign_changes >= 20 && frac >= 0.99 && elapsed < 60.0,
        &format!(
            "{events} events: x1 sign changes {sign_changes} >= 20; {:.2}% of samples in inflated box >= 99%; {elapsed:.1}s < 60s",
            100.0 * frac
        ),
    );
}

#[test]
fn criterion_10_engine_cross_validation() {
    let model = sinusoidal_sis();
    let n = 100u64;
    let horizon = 10.0;
    let x0 = lattice_state_for(&model, n, &[0.7, 0.3]).unwrap();
    let batch = |engine_name: &str, master: u64| -> (Vec<f64>, Vec<f64>) {
        let engine = engine_by_name(engine_name).unwrap();
        let mut counts = Vec::with_capacity(500);
        let mut terminals = Vec::with_capacity(500);
        for i in 0..500u64 {
            let path = engine
                .simulate(&model, n, &x0, horizon, derive_seed(master, i))
                .unwrap();
            counts.push(path.event_count() as f64);
            terminals.push(path.scaled_state_at(horizon)[1]);
        }
        (counts, terminals)
    };
    let trial = |seeds: (u64, u64)| -> (f64, f64) {
        let (ca, ta) = batch("thinning", seeds.0);
        let (cb, tb) = batch("next-reaction", seeds.1);
        (
            popdyn::stats::ks_two_sample(&ca, &cb).1,
            popdyn::stats::ks_two_sample(&ta, &tb).1,
        )
    };
    // documented seed pairs; one rerun allowed for a p-value near the tail
    let (mut p_count, mut p_term) = trial((41, 42));
    let mut note = String::from("seeds (41,42)");
    if p_count <= 0.01 || p_term <= 0.01 {
        let (pc, pt) = trial((141, 142));
        p_count = pc;
        p_term = pt;
        note = String::from("rerun with seeds (141,142)");
    }
    report(
        10,
        p_count > 0.01 && p_term > 0.01,
        &format!(
            "{note}: KS p-values {p_count:.3} (event count), {p_term:.3} (terminal state), both > 0.01 at 500 paths"
        ),
    );
}

fn write_config(dir: &std::path::Path, name: &str, value: serde_json::Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_cli(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_popdyn"))
        .args(args)
        .status()
        .unwrap();
    assert!(status.success(), "popdyn {args:?} failed");
}

fn dir_snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_11_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let sis = serde_json::json!({"kind": "sis",
        "lambda": {"form": "sinusoid", "a": 2.0, "b": 1.0, "omega": 1.0, "phi": 0.0},
        "mu": {"form": "constant", "a": 1.0}});
    let cases: Vec<(&str, String)> = vec![
        (
            "simulate",
            write_config(dir.path(), "sim.json", serde_json::json!({
                "model": sis, "n": 200, "z0": [0.7, 0.3], "horizon": 2.0,
                "paths": 4, "grid_points": 21})),
        ),
        (
            "meanfield",
            write_config(dir.path(), "mf.json", serde_json::json!({
                "model": sis, "z0": [0.7, 0.3], "horizon": 2.0,
                "moments": {"n": 100}})),
        ),
        (
            "converge",
            write_config(dir.path(), "conv.json", serde_json::json!({
                "model": sis, "z0": [0.7, 0.3], "horizon": 2.0,
                "n_list": [50, 100], "paths": 10})),
        ),
        (
            "stability",
            write_config(dir.path(), "stab.json", serde_json::json!({
                "lambda": {"form": "constant", "a": 2.0},
                "mu": {"form": "sinusoid", "a": 0.8, "b": 0.1, "omega": 1.0, "phi": 0.0},
                "c": 1.0, "x0": 0.9, "horizon": 10.0})),
        ),
        (
            "control",
            write_config(dir.path(), "ctrl.json", serde_json::json!({
                "mode": "gap", "model": sis, "z0": [0.7, 0.3], "horizon": 2.0,
                "n_list": [50, 100], "paths": 20})),
        ),
        (
            "construct",
            write_config(dir.path(), "cons.json", serde_json::json!({
                "source": "lorenz", "alpha": 0.015, "n": 500,
                "simulate": {"events": 3000, "chunk_horizon": 100.0, "sample_dt": 1.0}})),
        ),
    ];
    let mut checked = Vec::new();
    for (cmd, config) in &cases {
        let runs: Vec<_> = ["a", "b", "c"]
            .iter()
            .map(|tag| dir.path().join(format!("{cmd}_{tag}")))
            .collect();
        for (i, out) in runs.iter().enumerate() {
            let threads = if i == 2 { "4" } else { "2" };
            run_cli(&[
                cmd,
                "--config",
                config,
                "--seed",
                "9",
                "--threads",
                threads,
                "--out",
                out.to_str().unwrap(),
            ]);
        }
        let base = dir_snapshot(&runs[0]);
        assert!(!base.is_empty(), "{cmd} produced no output");
        for other in &runs[1..] {
            assert_eq!(base, dir_snapshot(other), "{cmd} outputs differ between runs");
        }
        checked.push(*cmd);
    }
    report(
        11,
        checked.len() == 6,
        &format!(
            "byte-identical outputs across repeat runs and --threads 2 vs 4 for {checked:?}"
        ),
    );
}
