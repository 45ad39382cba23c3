//! Subcommand execution. Scenarios are prepared, swept over δ and reduced
//! to checks; independent members run on the rayon pool, every reduction and
//! file write happens in scenario and sweep order.

use std::fs;
use std::path::{Path, PathBuf};

use cornerpmt_core::collar::collar_scalar_curvature;
use cornerpmt_core::concentration::concentration_profile;
use cornerpmt_core::mollifier::{mollify_path, verify_lemmas};
use cornerpmt_core::scenario::{
    oracle_checks, prepare, run_delta, run_oracle, sweep_report, Check, DeltaReport, Prepared, Scenario,
};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::format::{
    curvature_rows, oracle_rows, solution_rows, write_table, CheckRow, ConcentrationRow, Format, LemmaRow, MassRow,
    PathDocument,
};

/// Thread count for the worker pool, read from this variable.
pub const THREADS_ENV: &str = "CORNERPMT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Mollify,
    Curvature,
    Pipeline,
    Sweep,
    Oracle,
}

impl Stage {
    /// Acceptance criteria whose checks this stage reports.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Stage::Mollify => &[1],
            Stage::Curvature => &[2, 3],
            Stage::Pipeline => &[4, 5, 6],
            Stage::Sweep => &[1, 2, 3, 4, 5, 6, 7],
            Stage::Oracle => &[7],
        }
    }

    fn pipeline(self) -> bool {
        matches!(self, Stage::Pipeline | Stage::Sweep)
    }

    fn oracle(self) -> bool {
        matches!(self, Stage::Sweep | Stage::Oracle)
    }

    fn members(self) -> bool {
        self != Stage::Oracle
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub scenario: String,
    pub annotation: Option<String>,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Builds the global pool from `CORNERPMT_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn staged(s: &Scenario, stage: Stage) -> Scenario {
    let mut s = s.clone();
    if !stage.pipeline() {
        s.pipeline = None;
    }
    if !stage.oracle() {
        s.oracle = None;
    }
    s
}

fn member_context(s: &Scenario, delta: f64) -> String {
    format!("{} (δ = {delta})", s.name)
}

/// One sweep member; the mollify stage also writes the mollified path.
fn member(s: &Scenario, prep: &Prepared, delta: f64, stage: Stage, dir: &Path) -> Result<(DeltaReport, Option<PathBuf>)> {
    let ctx = member_context(s, delta);
    if stage != Stage::Mollify {
        return Ok((run_delta(s, prep, delta).map_err(CliError::in_scenario(&ctx))?, None));
    }
    let m = mollify_path(&prep.path, &s.config(delta)).map_err(CliError::in_scenario(&ctx))?;
    let lemma = verify_lemmas(&m).map_err(CliError::in_scenario(&ctx))?;
    let concentration = concentration_profile(&m, s.tolerances.line_integral).map_err(CliError::in_scenario(&ctx))?;
    let file = dir.join(format!("mollified_delta{delta}.json"));
    PathDocument::from_mollified(&m, Some(&s.corner)).write(&file)?;
    Ok((DeltaReport { delta, lemma, concentration, pipeline: None }, Some(file)))
}

/// Runs `stage` for every scenario and writes its reports under
/// `out/<scenario>/`, plus `out/checks.*` across all scenarios.
pub fn execute(stage: Stage, scenarios: &[Scenario], out: &Path, format: Format) -> Result<Vec<Outcome>> {
    let scenarios: Vec<Scenario> = scenarios.iter().map(|s| staged(s, stage)).collect();
    let dirs: Vec<PathBuf> = scenarios.iter().map(|s| out.join(&s.name)).collect();
    for d in &dirs {
        fs::create_dir_all(d).map_err(CliError::io(d))?;
    }
    let prepared: Vec<Prepared> = scenarios
        .par_iter()
        .map(|s| prepare(s).map_err(CliError::in_scenario(&s.name)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = if stage.members() {
        scenarios.iter().enumerate().flat_map(|(i, s)| s.delta_sweep.iter().map(move |&d| (i, d))).collect()
    } else {
        Vec::new()
    };
    let results: Vec<(DeltaReport, Option<PathBuf>)> = jobs
        .par_iter()
        .map(|&(i, d)| member(&scenarios[i], &prepared[i], d, stage, &dirs[i]))
        .collect::<Result<_>>()?;
    let oracles = scenarios
        .par_iter()
        .map(|s| run_oracle(s).map_err(CliError::in_scenario(&s.name)))
        .collect::<Result<Vec<_>>>()?;

    let mut members: Vec<Vec<DeltaReport>> = vec![Vec::new(); scenarios.len()];
    let mut written: Vec<Vec<PathBuf>> = vec![Vec::new(); scenarios.len()];
    for (&(i, _), (report, file)) in jobs.iter().zip(results) {
        members[i].push(report);
        written[i].extend(file);
    }

    let mut outcomes = Vec::with_capacity(scenarios.len());
    let mut all_rows = Vec::new();
    for (i, oracle) in oracles.into_iter().enumerate() {
        let (s, prep, dir) = (&scenarios[i], &prepared[i], &dirs[i]);
        let mut files = std::mem::take(&mut written[i]);
        let mut annotation = prep.hypothesis.annotation().map(str::to_string);
        let mut checks = Vec::new();
        if stage.members() {
            let sweep = sweep_report(s, prep, &members[i], oracle).map_err(CliError::in_scenario(&s.name))?;
            annotation = sweep.annotation.clone();
            checks = sweep.checks.iter().filter(|c| stage.criteria().contains(&c.criterion)).cloned().collect();
            files.extend(write_stage_tables(stage, s, prep, &members[i], dir, format)?);
            if let Some(o) = &sweep.oracle {
                files.push(write_table(dir, "oracle", &oracle_rows(o), format)?);
            }
            if stage == Stage::Sweep {
                let file = dir.join("summary.json");
                let f = fs::File::create(&file).map_err(CliError::io(&file))?;
                serde_json::to_writer_pretty(std::io::BufWriter::new(f), &sweep)?;
                files.push(file);
            }
        } else if let Some(o) = &oracle {
            oracle_checks(s, o, &mut checks);
            files.push(write_table(dir, "oracle", &oracle_rows(o), format)?);
        }
        let rows: Vec<CheckRow> = checks.iter().map(|c| CheckRow::new(&s.name, c)).collect();
        files.push(write_table(dir, "checks", &rows, format)?);
        all_rows.extend(rows);
        outcomes.push(Outcome { scenario: s.name.clone(), annotation, checks, files });
    }
    write_table(out, "checks", &all_rows, format)?;
    Ok(outcomes)
}

fn write_stage_tables(
    stage: Stage,
    s: &Scenario,
    prep: &Prepared,
    members: &[DeltaReport],
    dir: &Path,
    format: Format,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if matches!(stage, Stage::Mollify | Stage::Sweep) {
        let rows: Vec<LemmaRow> = members.iter().map(|m| LemmaRow::from(&m.lemma)).collect();
        files.push(write_table(dir, "lemmas", &rows, format)?);
    }
    if stage == Stage::Mollify {
        let file = dir.join("collar.json");
        PathDocument::from_path(&prep.path, Some(&s.corner)).write(&file)?;
        files.push(file);
    }
    if stage == Stage::Curvature {
        let field = collar_scalar_curvature(&prep.path).map_err(CliError::in_scenario(&s.name))?;
        files.push(write_table(dir, "collar_curvature", &curvature_rows(&field), format)?);
    }
    if matches!(stage, Stage::Curvature | Stage::Sweep) {
        let rows: Vec<ConcentrationRow> = members.iter().map(|m| ConcentrationRow::from(&m.concentration)).collect();
        files.push(write_table(dir, "concentration", &rows, format)?);
    }
    if stage.pipeline() {
        let rows: Vec<MassRow> =
            members.iter().filter_map(|m| m.pipeline.as_ref().map(|p| MassRow::new(m.delta, p))).collect();
        if !rows.is_empty() {
            files.push(write_table(dir, "masses", &rows, format)?);
        }
    }
    if stage == Stage::Pipeline {
        for m in members {
            if let Some(p) = &m.pipeline {
                let d = m.delta;
                files.push(write_table(dir, &format!("first_solve_delta{d}"), &solution_rows(&p.metric, &p.first), format)?);
                files.push(write_table(dir, &format!("second_solve_delta{d}"), &solution_rows(&p.metric, &p.second), format)?);
            }
        }
    }
    Ok(files)
}
