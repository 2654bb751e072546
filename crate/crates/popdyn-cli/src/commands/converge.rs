use popdyn::analysis::convergence_experiment;
use popdyn::engine_by_name;

use crate::config::ConvergeConfig;
use crate::{cfg_err, csv_row, rt_err, CliError, CliResult, Ctx};

pub fn run(mut ctx: Ctx) -> CliResult<()> {
    let cfg: ConvergeConfig = ctx.parse_config()?;
    let model = cfg.model.build().map_err(cfg_err)?;
    let engine = engine_by_name(&cfg.engine)
        .ok_or_else(|| CliError::Config(format!("unknown engine {:?}", cfg.engine)))?;
    let seed = ctx.resolve_seed(cfg.seed);
    ctx.write_manifest(seed)?;

    let report = convergence_experiment(
        &model,
        engine.as_ref(),
        &cfg.z0,
        cfg.horizon,
        &cfg.n_list,
        cfg.paths,
        seed,
    )
    .map_err(rt_err)?;

    let mut csv = String::from("n,median,q10,q90\n");
    for e in &report.entries {
        csv.push_str(&format!("{},{}\n", e.n, csv_row(&[e.median, e.q10, e.q90])));
    }
    ctx.write_text("convergence.csv", &csv)?;
    ctx.write_json("convergence.json", &report)
}
