use popdyn::integrate;
use popdyn::meanfield::systems::moment_bounds;

use crate::config::{MeanfieldConfig, ModelSpec};
use crate::{cfg_err, csv_row, drift_raw, rt_err, CliError, CliResult, Ctx};

pub fn run(mut ctx: Ctx) -> CliResult<()> {
    let cfg: MeanfieldConfig = ctx.parse_config()?;
    let model = cfg.model.build().map_err(cfg_err)?;
    if cfg.z0.len() != model.dim {
        return Err(CliError::Config(format!(
            "z0 has {} entries, model dimension is {}",
            cfg.z0.len(),
            model.dim
        )));
    }
    if cfg.grid_points < 2 {
        return Err(CliError::Config("grid_points must be at least 2".into()));
    }
    ctx.write_manifest(ctx.resolve_seed(None))?;

    let traj = integrate(
        |t, x, dx| drift_raw(&model, t, x, dx),
        &cfg.z0,
        (0.0, cfg.horizon),
        cfg.rtol,
        cfg.rtol * 1e-2,
    )
    .map_err(rt_err)?;

    let grid: Vec<f64> = (0..cfg.grid_points)
        .map(|i| cfg.horizon * i as f64 / (cfg.grid_points - 1) as f64)
        .collect();
    let mut csv = String::from("t");
    for i in 1..=model.dim {
        csv.push_str(&format!(",x_{i}"));
    }
    csv.push('\n');
    for &t in &grid {
        let mut row = vec![t];
        row.extend(traj.eval(t));
        csv.push_str(&csv_row(&row));
        csv.push('\n');
    }
    ctx.write_text("trajectory.csv", &csv)?;

    if let Some(req) = &cfg.moments {
        let ModelSpec::Sis { lambda, mu } = &cfg.model else {
            return Err(CliError::Config(
                "moment bounds require an SIS model".into(),
            ));
        };
        let y0 = cfg.z0[1];
        let set = moment_bounds(lambda, mu, y0, req.n, (0.0, cfg.horizon), cfg.rtol)
            .map_err(rt_err)?;
        let mut csv = String::from("t,Y,z_n,w_n,v1,v2\n");
        for &t in &grid {
            let s = set.eval(t);
            let mut row = vec![t];
            row.extend_from_slice(&s);
            csv.push_str(&csv_row(&row));
            csv.push('\n');
        }
        ctx.write_text("moments.csv", &csv)?;
        ctx.write_json(
            "moments.json",
            &serde_json::json!({
                "n": req.n,
                "clamp_events": set.clamp_events,
            }),
        )?;
    }
    Ok(())
}
