use popdyn::analysis::{
    classify_time_varying, delta_neighborhood, lyapunov_derivative_check, sis_equilibria_constant,
};
use popdyn::integrate;
use popdyn::meanfield::systems::sis_scalar_rhs;
use popdyn::rate::RateFunction;

use crate::config::StabilityConfig;
use crate::{cfg_err, csv_row, rt_err, CliResult, Ctx};

pub fn run(mut ctx: Ctx) -> CliResult<()> {
    let cfg: StabilityConfig = ctx.parse_config()?;
    ctx.write_manifest(ctx.resolve_seed(None))?;
    let window = cfg.window.unwrap_or(cfg.horizon);

    let constant_rates = matches!(
        (&cfg.lambda, &cfg.mu),
        (RateFunction::Constant { .. }, RateFunction::Constant { .. })
    );
    let mut report = if constant_rates {
        sis_equilibria_constant(cfg.lambda.value(0.0), cfg.mu.value(0.0), cfg.c)
            .map_err(cfg_err)?
    } else {
        classify_time_varying(&cfg.lambda, &cfg.mu, cfg.c, window).map_err(cfg_err)?
    };

    // confinement level: explicit, or just above the trajectory start and the
    // ratio supremum
    let psi = cfg.psi.unwrap_or_else(|| {
        let mut sup = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let t = window * i as f64 / 1000.0;
            sup = sup.max(cfg.mu.value(t) / cfg.lambda.value(t));
        }
        cfg.x0.max(sup) + 1e-6
    });
    if !constant_rates && psi < cfg.c {
        report.delta =
            Some(delta_neighborhood(&cfg.lambda, &cfg.mu, psi, cfg.c, window).map_err(rt_err)?);
    }
    ctx.write_json("equilibrium.json", &report)?;

    let traj = integrate(
        |t, x, dx| dx[0] = sis_scalar_rhs(cfg.lambda.value(t), cfg.mu.value(t), cfg.c, x[0]),
        &[cfg.x0],
        (0.0, cfg.horizon),
        1e-9,
        1e-11,
    )
    .map_err(rt_err)?;
    let mut csv = String::from("t,x\n");
    for i in 0..cfg.grid_points {
        let t = cfg.horizon * i as f64 / (cfg.grid_points - 1) as f64;
        csv.push_str(&csv_row(&[t, traj.eval(t)[0]]));
        csv.push('\n');
    }
    ctx.write_text("trajectory.csv", &csv)?;

    let lyap = lyapunov_derivative_check(
        &cfg.lambda,
        &cfg.mu,
        cfg.c,
        &traj,
        report.delta.unwrap_or(0.0),
        Some(psi),
    )
    .map_err(rt_err)?;
    ctx.write_json("lyapunov.json", &lyap)
}
