use popdyn::analysis::lattice_state_for;
use popdyn::rng::derive_seed;
use popdyn::{engine_by_name, integrate, simulate_ensemble, JumpPath};

use crate::config::SimulateConfig;
use crate::{cfg_err, csv_row, drift_raw, rt_err, CliError, CliResult, Ctx};

fn path_csv(path: &JumpPath) -> String {
    let dim = path.dim;
    let mut out = String::from("t");
    for i in 1..=dim {
        out.push_str(&format!(",k_{i}"));
    }
    out.push_str(",channel\n");
    for i in 0..=path.event_count() {
        out.push_str(&path.times[i].to_string());
        for &k in path.state_row(i) {
            out.push(',');
            out.push_str(&k.to_string());
        }
        out.push(',');
        out.push_str(&path.channels[i].to_string());
        out.push('\n');
    }
    out
}

pub fn run(mut ctx: Ctx) -> CliResult<()> {
    let cfg: SimulateConfig = ctx.parse_config()?;
    let model = cfg.model.build().map_err(cfg_err)?;
    let engine = engine_by_name(&cfg.engine)
        .ok_or_else(|| CliError::Config(format!("unknown engine {:?}", cfg.engine)))?;
    if cfg.paths == 0 {
        return Err(CliError::Config("paths must be at least 1".into()));
    }
    if cfg.grid_points < 2 {
        return Err(CliError::Config("grid_points must be at least 2".into()));
    }
    let x0 = lattice_state_for(&model, cfg.n, &cfg.z0).map_err(cfg_err)?;
    let seed = ctx.resolve_seed(cfg.seed);
    ctx.write_manifest(seed)?;

    for p in 0..cfg.paths as u64 {
        let path = engine
            .simulate(&model, cfg.n, &x0, cfg.horizon, derive_seed(seed, p))
            .map_err(rt_err)?;
        ctx.write_text(&format!("path_{p:04}.csv"), &path_csv(&path))?;
    }

    let grid: Vec<f64> = (0..cfg.grid_points)
        .map(|i| cfg.horizon * i as f64 / (cfg.grid_points - 1) as f64)
        .collect();
    let z0: Vec<f64> = x0.iter().map(|&k| k as f64 / cfg.n as f64).collect();
    let reference = integrate(
        |t, x, dx| drift_raw(&model, t, x, dx),
        &z0,
        (0.0, cfg.horizon),
        1e-9,
        1e-11,
    )
    .map_err(rt_err)?;
    let summary = simulate_ensemble(
        &model,
        engine.as_ref(),
        cfg.n,
        &x0,
        cfg.horizon,
        cfg.paths,
        &grid,
        Some(&reference),
        seed,
    )
    .map_err(rt_err)?;

    let dim = model.dim;
    let mut csv = String::from("t");
    for i in 1..=dim {
        csv.push_str(&format!(",mean_{i}"));
    }
    for i in 1..=dim {
        csv.push_str(&format!(",var_{i}"));
    }
    csv.push('\n');
    for (gi, &t) in grid.iter().enumerate() {
        let mut row = vec![t];
        row.extend_from_slice(&summary.mean[gi * dim..(gi + 1) * dim]);
        row.extend_from_slice(&summary.variance[gi * dim..(gi + 1) * dim]);
        csv.push_str(&csv_row(&row));
        csv.push('\n');
    }
    ctx.write_text("ensemble.csv", &csv)?;

    let devs = &summary.sup_deviations;
    let quantiles = [
        popdyn::stats::quantile(devs, 0.1),
        popdyn::stats::quantile(devs, 0.5),
        popdyn::stats::quantile(devs, 0.9),
    ];
    ctx.write_json(
        "ensemble.json",
        &serde_json::json!({
            "n": cfg.n,
            "paths": cfg.paths,
            "seed": seed,
            "engine": cfg.engine,
            "sup_deviation_quantiles": quantiles,
        }),
    )
}
