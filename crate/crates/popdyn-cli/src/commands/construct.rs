use popdyn::construct::{
    build_population_model, build_sign_model, decompose_field, lorenz_model, DecomposeMode,
    VectorField,
};
use popdyn::engine_by_name;
use popdyn::rng::derive_seed;

use crate::config::{ConstructConfig, LorenzSimulate};
use crate::{cfg_err, csv_row, rt_err, CliError, CliResult, Ctx};

pub fn run(mut ctx: Ctx, preset: Option<&str>) -> CliResult<()> {
    let cfg: ConstructConfig = match preset {
        Some("lorenz") => {
            if ctx.has_config_file() {
                return Err(CliError::Config(
                    "give either --preset or --config, not both".into(),
                ));
            }
            let v = serde_json::json!({
                "source": "lorenz",
                "alpha": 0.015,
                "n": 6000,
                "simulate": {},
            });
            ctx.set_config_value(v.clone());
            serde_json::from_value(v).map_err(cfg_err)?
        }
        Some(other) => {
            return Err(CliError::Config(format!("unknown preset {other:?}")));
        }
        None => ctx.parse_config()?,
    };

    match cfg {
        ConstructConfig::Lorenz { a, b, c, alpha, n, invariant_box, simulate, seed } => {
            let seed = ctx.resolve_seed(seed);
            ctx.write_manifest(seed)?;
            let (cm, map) = lorenz_model(a, b, c, alpha, n, invariant_box).map_err(cfg_err)?;
            ctx.write_json("model.json", &cm)?;
            if let Some(sim) = simulate {
                run_lorenz_simulation(&ctx, &cm, &map, &sim, seed)?;
            }
            Ok(())
        }
        ConstructConfig::Field { components, decomposition, alpha, n, with_n_scaling, procedure } => {
            ctx.write_manifest(ctx.resolve_seed(None))?;
            let field = VectorField::new(components).map_err(cfg_err)?;
            let cm = match procedure {
                1 => {
                    let mode = match decomposition {
                        Some(pair) => DecomposeMode::User { pos: pair.pos, neg: pair.neg },
                        None => DecomposeMode::Auto,
                    };
                    let dec = decompose_field(&field, mode).map_err(cfg_err)?;
                    build_population_model(&dec, alpha, n, with_n_scaling).map_err(cfg_err)?
                }
                2 => build_sign_model(&field, alpha, n, with_n_scaling).map_err(cfg_err)?,
                other => {
                    return Err(CliError::Config(format!(
                        "procedure must be 1 or 2, got {other}"
                    )));
                }
            };
            ctx.write_json("model.json", &cm)
        }
    }
}

/// Simulates the constructed process in fixed-horizon chunks (the model is
/// autonomous, so restarting the clock per chunk is exact) until the event
/// budget is crossed, sampling original-coordinate states every `sample_dt`.
fn run_lorenz_simulation(
    ctx: &Ctx,
    cm: &popdyn::construct::ConstructedModel,
    map: &popdyn::construct::AffineMap,
    sim: &LorenzSimulate,
    seed: u64,
) -> CliResult<()> {
    let engine = engine_by_name(&sim.engine)
        .ok_or_else(|| CliError::Config(format!("unknown engine {:?}", sim.engine)))?;
    if !(sim.sample_dt > 0.0) || !(sim.chunk_horizon > 0.0) {
        return Err(CliError::Config("sample_dt and chunk_horizon must be positive".into()));
    }
    let mut state = cm.initial_state(&sim.u0).map_err(cfg_err)?;
    let mut t_offset = 0.0f64;
    let mut next_sample = 0.0f64;
    let mut events: u64 = 0;
    let mut chunks: u64 = 0;
    let mut samples: Vec<(f64, Vec<f64>)> = Vec::new();
    while events < sim.events {
        let path = engine
            .simulate(&cm.model, cm.n, &state, sim.chunk_horizon, derive_seed(seed, chunks))
            .map_err(rt_err)?;
        while next_sample <= t_offset + sim.chunk_horizon + 1e-9 {
            let u = path.scaled_state_at((next_sample - t_offset).max(0.0));
            samples.push((next_sample, map.inverse(&u[..3])));
            next_sample += sim.sample_dt;
        }
        state = path.state_row(path.event_count()).to_vec();
        events += path.event_count() as u64;
        t_offset += sim.chunk_horizon;
        chunks += 1;
    }

    let mut ts = String::from("t,x_1,x_2,x_3\n");
    let mut phase = String::from("x_1,x_2,x_3\n");
    for (t, x) in &samples {
        let mut row = vec![*t];
        row.extend_from_slice(x);
        ts.push_str(&csv_row(&row));
        ts.push('\n');
        phase.push_str(&csv_row(x));
        phase.push('\n');
    }
    ctx.write_text("timeseries.csv", &ts)?;
    ctx.write_text("phase_portrait.csv", &phase)?;
    ctx.write_json(
        "construct.json",
        &serde_json::json!({
            "events_simulated": events,
            "horizon_simulated": t_offset,
            "chunks": chunks,
            "samples": samples.len(),
            "seed": seed,
            "map": map,
        }),
    )
}
