use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use super::config::{ExperimentConfig, ExperimentKind};
use super::convergence::{helical_error, min_order, observed_orders, svg_loglog};
use super::report::{CheckResult, Cmp, Condition, Environment, RunReport};
use crate::compatibility::{check_compat, extrinsic_jet, intrinsic_jet};
use crate::error::{Error, Result};
use crate::flow::{dissipation_residual, eps_sweep, evolve, FlowConfig};
use crate::galerkin::solve_galerkin;
use crate::linearized::{assemble_background, solve_vk, Background};
use crate::operators::l2_norm;
use crate::state::{io, Grid, SphereField};

pub const DEFAULT_OUT_DIR: &str = "sphereflow-out";

/// Tangency drift allowed in a linearized run (second order in `h` when
/// `eps > 0`, rounding level at `eps = 0`).
const LINEAR_TANGENCY_TOL: f64 = 1e-6;
/// Relative distance to `v_k` allowed in an `eps = 0` linearized run.
const LINEAR_DEFECT_TOL: f64 = 1e-3;

struct Ctx {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl Ctx {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.artifacts.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }
}

fn context<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::InvalidArgument(format!("{what}: {e}")))
}

fn describe(grid: &Grid) -> String {
    format!("{}D {} points={:?} extents={:?}", grid.dim(), grid.mode().as_str(), grid.points(), grid.extents())
}

/// Runs one experiment, writing its CSV/JSON artifacts and `report.json`
/// into `cfg.out_dir` (default `sphereflow-out`).
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&dir)?;
    let mut ctx = Ctx { dir: dir.clone(), artifacts: Vec::new() };
    let mut env = Environment::new(cfg.seed);
    let checks = match cfg.kind {
        ExperimentKind::Convergence => convergence(cfg, &mut ctx)?,
        kind => {
            let grid = cfg.grid()?;
            let u0 = context("initial data", cfg.initial(&grid))?;
            env.grid = Some(describe(&grid));
            env.dt = Some(cfg.flow.dt);
            env.epsilon = Some(cfg.flow.epsilon);
            match kind {
                ExperimentKind::Evolve => run_evolve(cfg, &u0, &mut ctx)?,
                ExperimentKind::Compat => run_compat(cfg, &u0, &mut ctx)?,
                ExperimentKind::Linearized => {
                    env.epsilon = Some(cfg.linearized.epsilon);
                    run_linearized(cfg, &u0, &mut ctx)?
                }
                ExperimentKind::Galerkin => {
                    env.epsilon = Some(cfg.galerkin.epsilon);
                    run_galerkin(cfg, &u0, &mut ctx)?
                }
                ExperimentKind::EpsSweep => run_sweep(cfg, &u0, &mut ctx)?,
                ExperimentKind::Convergence => unreachable!(),
            }
        }
    };
    let report = RunReport {
        kind: cfg.kind.as_str().into(),
        config: serde_json::to_value(cfg)?,
        environment: env,
        checks,
        artifacts: ctx.artifacts,
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    report.write(&dir)?;
    Ok(report)
}

fn run_evolve(cfg: &ExperimentConfig, u0: &SphereField, ctx: &mut Ctx) -> Result<Vec<CheckResult>> {
    let tr = context("evolve", evolve(u0, &cfg.flow))?;
    tr.trace.write_csv(ctx.create("trace.csv")?)?;
    io::write_csv(ctx.create("final.csv")?, tr.final_state())?;
    ctx.artifacts.push("final.field".into());
    io::save_field(ctx.dir.join("final.field"), tr.final_state())?;
    let mut checks = Vec::new();
    if cfg.flow.renormalize {
        let drift = tr.trace.unit_drift.iter().copied().fold(0.0, f64::max);
        checks.push(CheckResult::new("sphere", "unit constraint", vec![Condition::new("max ||u|-1|", drift, Cmp::Le, 1e-13)]));
    }
    let e = &tr.trace.dirichlet;
    let rel = (e[e.len() - 1] - e[0]).abs() / e[0].max(f64::MIN_POSITIVE);
    if cfg.flow.epsilon > 0.0 && cfg.flow.record_every == 1 {
        let r = dissipation_residual(&tr, cfg.flow.epsilon)?;
        checks.push(CheckResult::new("energy", "energy law", vec![Condition::new("dissipation residual", r, Cmp::Le, 0.05)]));
    } else {
        let mut c = CheckResult::new("energy", "energy law", Vec::new()).with_notes(vec![("relative energy change".into(), rel)]);
        c.pass = true;
        checks.push(c);
    }
    Ok(checks)
}

fn run_compat(cfg: &ExperimentConfig, u0: &SphereField, ctx: &mut Ctx) -> Result<Vec<CheckResult>> {
    let rep = context("compat", check_compat(u0, cfg.compat.order, cfg.compat.tol))?;
    writeln!(ctx.create("compat.json")?, "{}", rep.to_json()?)?;
    let mut w = ctx.create("compat.csv")?;
    writeln!(w, "order,extrinsic,intrinsic,pass")?;
    for r in &rep.per_order {
        writeln!(w, "{},{},{},{}", r.order, r.extrinsic_residual, r.intrinsic_residual, r.pass)?;
    }
    let conds = rep
        .per_order
        .iter()
        .flat_map(|r| {
            [
                Condition::new(format!("extrinsic j={}", r.order), r.extrinsic_residual, Cmp::Le, rep.tolerance),
                Condition::new(format!("intrinsic j={}", r.order), r.intrinsic_residual, Cmp::Le, rep.tolerance),
            ]
        })
        .collect();
    let agree = if rep.verdicts_agree() { 0.0 } else { 1.0 };
    Ok(vec![
        CheckResult::new("compat", "compatibility through the requested order", conds),
        CheckResult::new("agreement", "extrinsic and intrinsic verdicts", vec![Condition::new("disagreements", agree, Cmp::Le, 0.0)]),
    ])
}

fn background(cfg: &ExperimentConfig, u0: &SphereField) -> Result<Background> {
    let flow = FlowConfig { epsilon: 0.0, reverse: false, renormalize: true, ..cfg.flow.clone() };
    context("background", evolve(u0, &flow).and_then(assemble_background))
}

fn run_linearized(cfg: &ExperimentConfig, u0: &SphereField, ctx: &mut Ctx) -> Result<Vec<CheckResult>> {
    let bg = background(cfg, u0)?;
    let sol = context("linearized", solve_vk(&bg, cfg.linearized.k, &cfg.linearized.solver_config()))?;
    sol.write_csv(ctx.create("linearized.csv")?)?;
    let mut checks = vec![CheckResult::new(
        "tangency",
        "tangency of the solution",
        vec![Condition::new("max |<w,u>|", sol.max_tangency_drift(), Cmp::Le, LINEAR_TANGENCY_TOL)],
    )];
    if let Some(d) = sol.max_defect() {
        let scale = bg.v1.iter().map(|v| l2_norm(v.as_field())).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let rel = d / scale;
        // only at eps = 0 is v_k itself the solution
        if cfg.linearized.epsilon == 0.0 {
            checks.push(CheckResult::new(
                "defect",
                "distance to the background time derivative",
                vec![Condition::new("relative max_t ||w - v_k||", rel, Cmp::Le, LINEAR_DEFECT_TOL)],
            ));
        } else {
            checks[0].notes.push(("relative max_t ||w - v_k||".into(), rel));
        }
    }
    Ok(checks)
}

fn run_galerkin(cfg: &ExperimentConfig, u0: &SphereField, ctx: &mut Ctx) -> Result<Vec<CheckResult>> {
    let bg = background(cfg, u0)?;
    let k = cfg.galerkin.k;
    let h0 = intrinsic_jet(&extrinsic_jet(u0, k)?)?.coeff(k).clone();
    let sol = context("galerkin", solve_galerkin(&h0, &bg, &cfg.galerkin))?;
    sol.write_csv(ctx.create("galerkin.csv")?)?;
    let bad = sol.energy_constant.iter().filter(|c| !c.is_finite()).count();
    let c_max = sol.energy_constant.iter().copied().filter(|c| c.is_finite()).fold(0.0, f64::max);
    Ok(vec![CheckResult::new(
        "energy",
        "Galerkin energy inequality constant",
        vec![Condition::new("non-finite samples", bad as f64, Cmp::Le, 0.0)],
    )
    .with_notes(vec![("max C(t)".into(), c_max)])])
}

fn run_sweep(cfg: &ExperimentConfig, u0: &SphereField, ctx: &mut Ctx) -> Result<Vec<CheckResult>> {
    let rep = context("eps_sweep", eps_sweep(u0, &cfg.sweep.eps, &cfg.flow))?;
    let mut w = ctx.create("sweep.csv")?;
    writeln!(w, "eps_a,eps_b,distance")?;
    for (a, b, d) in &rep.distances {
        writeln!(w, "{a},{b},{d}")?;
    }
    let failed = rep.entries.iter().filter(|e| e.error.is_some()).count();
    let mut conds = vec![Condition::new("failed runs", failed as f64, Cmp::Le, 0.0)];
    for (i, p) in rep.distances.windows(2).enumerate() {
        conds.push(Condition::new(format!("d[{}]/d[{i}]", i + 1), p[1].2 / p[0].2, Cmp::Lt, 1.0));
    }
    Ok(vec![CheckResult::new("sweep", "distances decrease with eps", conds)])
}

fn convergence(cfg: &ExperimentConfig, ctx: &mut Ctx) -> Result<Vec<CheckResult>> {
    let c = &cfg.convergence;
    let space = c
        .points
        .iter()
        .map(|&n| helical_error(c.extent, c.alpha, n, c.k_mode, c.dt, c.t_end, false))
        .collect::<Result<Vec<_>>>()?;
    let time = c
        .dts
        .iter()
        .map(|&dt| helical_error(c.extent, c.alpha, c.time_points, c.k_mode, dt, c.time_t_end, true))
        .collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = c.points.iter().map(|&n| c.extent / n as f64).collect();
    let so = observed_orders(&hs, &space);
    let to = observed_orders(&c.dts, &time);
    let mut w = ctx.create("convergence.csv")?;
    writeln!(w, "study,size,error,order")?;
    for (i, (h, e)) in hs.iter().zip(&space).enumerate() {
        writeln!(w, "space,{h},{e},{}", if i == 0 { String::new() } else { so[i - 1].to_string() })?;
    }
    for (i, (dt, e)) in c.dts.iter().zip(&time).enumerate() {
        writeln!(w, "time,{dt},{e},{}", if i == 0 { String::new() } else { to[i - 1].to_string() })?;
    }
    drop(w);
    let svg = svg_loglog(
        "helical wave error",
        &[("space (h)", hs.iter().copied().zip(space.iter().copied()).collect()), ("time (dt)", c.dts.iter().copied().zip(time.iter().copied()).collect())],
    );
    ctx.create("convergence.svg")?.write_all(svg.as_bytes())?;
    Ok(vec![
        CheckResult::new("space", "spatial order", vec![Condition::new("min order", min_order(&so), Cmp::Ge, 1.9)]),
        CheckResult::new("time", "temporal order", vec![Condition::new("min order", min_order(&to), Cmp::Ge, 3.9)]),
    ])
}
