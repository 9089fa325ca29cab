use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use posmild::benchmarks::{run_ladder, BenchmarkKind};
use posmild::solver::{read_trajectory_csv, write_trajectory_csv, RunMetadata};
use posmild::{quasi_positivity_report, solve, CertifyConfig};
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::plot;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_UNCERTIFIABLE: u8 = 2;
pub const EXIT_BLOW_UP: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;

pub struct RunContext {
    pub out: PathBuf,
    pub quiet: bool,
}

impl RunContext {
    fn path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(self.out.join(name))
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn certify(cfg: &Config, ctx: &RunContext) -> Result<u8> {
    let model = cfg.model()?;
    let built = model.build()?;
    let y0 = model.initial_state(&built)?;
    let space = &built.problem.space;
    let m = match cfg.run.certify.m {
        Some(m) => m,
        None => 2.0 * space.norm_of(&y0),
    };
    let defaults = CertifyConfig::default();
    let config = CertifyConfig {
        samples: cfg.run.certify.samples.unwrap_or(defaults.samples),
        seed: cfg.run.certify.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    let report = quasi_positivity_report(built.problem.field.as_ref(), space, m, &config)?;
    let path = ctx.path(&cfg.run.output.report)?;
    write_json(&path, &report)?;
    if report.certified {
        ctx.say(format!(
            "{}: certified at m = {m}: lambda = {}, k = {} ({} samples)",
            built.name, report.lambda_hat, report.k_hat, report.samples_used
        ));
        Ok(EXIT_OK)
    } else {
        let worst = report.worst_violation.as_ref();
        ctx.say(format!(
            "{}: uncertifiable at m = {m}: {} violations, worst at component {:?} with value {:?}",
            built.name,
            report.violation_count,
            worst.map(|w| w.component),
            worst.map(|w| w.value)
        ));
        Ok(EXIT_UNCERTIFIABLE)
    }
}

pub fn simulate(cfg: &Config, ctx: &RunContext) -> Result<u8> {
    let model = cfg.model()?;
    let built = model.build()?;
    let y0 = model.initial_state(&built)?;
    let solver = &cfg.run.solver;
    solver.validate()?;
    let traj = match solve(&built.problem, &y0, solver) {
        Ok(t) => t,
        Err(e) => {
            let path = ctx.path(&cfg.run.output.error)?;
            write_json(
                &path,
                &json!({ "model": built.name, "error": { "kind": e.kind(), "message": e.to_string() } }),
            )?;
            eprintln!("solver error: {e}");
            return Ok(EXIT_SOLVER);
        }
    };
    let space = &built.problem.space;
    let csv_path = ctx.path(&cfg.run.output.trajectory)?;
    let file = File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    write_trajectory_csv(space, &traj, cfg.run.output.columns, BufWriter::new(file))?;
    let meta = RunMetadata::new(&built.name, built.problem.growth, space.dof(), solver.horizon, &traj);
    write_json(&ctx.path(&cfg.run.output.metadata)?, &meta)?;
    match &traj.blow_up {
        Some(b) => {
            ctx.say(format!(
                "{}: blow-up flagged near t = {} (norm {:e}, {:?})",
                built.name, b.time_estimate, b.final_norm, b.reason
            ));
            Ok(EXIT_BLOW_UP)
        }
        None => {
            ctx.say(format!(
                "{}: reached t = {} in {} windows; min component {:e}",
                built.name,
                traj.final_time(),
                traj.windows.len(),
                traj.min_component_overall
            ));
            Ok(EXIT_OK)
        }
    }
}

pub fn convergence(cfg: &Config, ctx: &RunContext) -> Result<u8> {
    let name = cfg
        .run
        .convergence
        .benchmark
        .as_deref()
        .context("config needs [convergence] benchmark = \"...\"")?;
    let kind = BenchmarkKind::parse(name)?;
    let ladder = cfg.run.convergence.ladder.clone().unwrap_or_else(|| kind.default_ladder());
    anyhow::ensure!(!ladder.is_empty(), "convergence ladder is empty");
    let runs = match run_ladder(kind, &ladder) {
        Ok(r) => r,
        Err(e) => {
            write_json(
                &ctx.path(&cfg.run.output.error)?,
                &json!({ "benchmark": name, "error": { "kind": e.kind(), "message": e.to_string() } }),
            )?;
            eprintln!("solver error: {e}");
            return Ok(EXIT_SOLVER);
        }
    };
    let path = ctx.path(&cfg.run.output.convergence)?;
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "resolution,error")?;
    for r in &runs {
        writeln!(w, "{},{}", r.resolution, posmild::solver::format_f64(r.error))?;
        ctx.say(format!("{name}: resolution {} error {:e}", r.resolution, r.error));
    }
    w.flush()?;
    if let [.., a, b] = runs.as_slice() {
        if b.error > a.error {
            eprintln!("error increased on the final rung: {:e} -> {:e}", a.error, b.error);
            return Ok(EXIT_SOLVER);
        }
    }
    Ok(EXIT_OK)
}

pub fn plot(csv: &Path, svg: Option<&Path>, ctx: &RunContext) -> Result<u8> {
    let file = File::open(csv).with_context(|| format!("opening {}", csv.display()))?;
    let table = read_trajectory_csv(file).with_context(|| format!("reading {}", csv.display()))?;
    let out = match svg {
        Some(p) => p.to_path_buf(),
        None => {
            let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
            ctx.path(&format!("{stem}.svg"))?
        }
    };
    std::fs::write(&out, plot::render(&table)).with_context(|| format!("writing {}", out.display()))?;
    ctx.say(format!("wrote {}", out.display()));
    Ok(EXIT_OK)
}
