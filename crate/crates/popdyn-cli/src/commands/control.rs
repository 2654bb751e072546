use popdyn::control::{finite_horizon_control, mean_field_control_gap, ControlProblem};
use popdyn::control::stationary_cure_rate;
use popdyn::{engine_by_name, integrate, ControlPolicy};

use crate::config::ControlConfig;
use crate::{cfg_err, csv_row, drift_raw, rt_err, CliError, CliResult, Ctx};

pub fn run(mut ctx: Ctx) -> CliResult<()> {
    let cfg: ControlConfig = ctx.parse_config()?;
    ctx.write_manifest(ctx.resolve_seed(match &cfg {
        ControlConfig::Gap { seed, .. } => *seed,
        _ => None,
    }))?;
    match cfg {
        ControlConfig::Stationary { spec, lambda, c, mu_max } => {
            let (mu_star, value) =
                stationary_cure_rate(&spec, lambda, c, mu_max).map_err(rt_err)?;
            ctx.write_json("policy.json", &ControlPolicy::Stationary { lambda, mu: mu_star })?;
            ctx.write_json(
                "solution.json",
                &serde_json::json!({ "mu_star": mu_star, "value": value }),
            )
        }
        ControlConfig::FiniteHorizon {
            spec,
            c,
            x0,
            horizon,
            knots,
            lambda_box,
            mu_box,
            terminal,
        } => {
            let problem = ControlProblem {
                spec: &spec,
                c,
                x0,
                horizon,
                knots,
                lambda_box,
                mu_box,
                terminal,
            };
            let solution = finite_horizon_control(&problem).map_err(rt_err)?;
            ctx.write_json("policy.json", &solution.policy)?;
            let mut csv = String::from("step,value\n");
            for (i, v) in solution.ascent_log.iter().enumerate() {
                csv.push_str(&format!("{i},{v}\n"));
            }
            ctx.write_text("objective_log.csv", &csv)?;
            ctx.write_json(
                "solution.json",
                &serde_json::json!({
                    "value": solution.value,
                    "rejected_candidates": solution.rejected_candidates,
                }),
            )
        }
        ControlConfig::Gap { model, z0, horizon, n_list, paths, engine, seed } => {
            let model = model.build().map_err(cfg_err)?;
            let engine = engine_by_name(&engine)
                .ok_or_else(|| CliError::Config(format!("unknown engine {engine:?}")))?;
            let seed = ctx.resolve_seed(seed);
            let reference = integrate(
                |t, x, dx| drift_raw(&model, t, x, dx),
                &z0,
                (0.0, horizon),
                1e-9,
                1e-11,
            )
            .map_err(rt_err)?;
            let z_t = reference.eval(horizon);
            let c1 = |_: f64, _: &[f64]| 0.0;
            let c2 = move |z: &[f64]| -> f64 {
                z.iter().zip(&z_t).map(|(a, b)| (a - b).abs()).sum()
            };
            let report = mean_field_control_gap(
                &model,
                engine.as_ref(),
                &c1,
                &c2,
                &z0,
                horizon,
                &n_list,
                paths,
                seed,
            )
            .map_err(rt_err)?;
            let mut csv = String::from("n,J_hat,se,J_ode,gap\n");
            for e in &report.entries {
                csv.push_str(&format!(
                    "{},{}\n",
                    e.n,
                    csv_row(&[e.j_hat, e.se, e.j_ode, e.gap])
                ));
            }
            ctx.write_text("gap.csv", &csv)?;
            ctx.write_json("gap.json", &report)
        }
    }
}
