use std::path::Path;

use aro_core::model::{NormP, RobustProgram, SampleSet, UncertaintySet};
use aro_core::wasserstein::{quantify as quantify_probability, Mode};
use aro_core::{
    dro_synthesize, solve_robust, synthesize as synthesize_set, AmbiguitySpec, AnchorSearch,
    DroConfig,
};
use aro_core::{DroObjective, SynthesisConfig};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::io::{emit_json, read_json, read_polytope, read_samples, read_scaled_set};
use crate::manifest::RunManifest;
use crate::{AnchorArg, DroArgs, ModeArg, QuantifyArgs, SolveArgs, SynthesizeArgs};

pub fn anchor_search(a: AnchorArg) -> AnchorSearch {
    match a {
        AnchorArg::FixedCenter => AnchorSearch::FixedCenter,
        AnchorArg::CoordinateSearch => AnchorSearch::CoordinateSearch,
    }
}

pub fn parse_norm(s: &str) -> CliResult<NormP> {
    s.parse::<NormP>().map_err(CliError::from)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn out(p: &Option<std::path::PathBuf>) -> Option<&Path> {
    p.as_deref()
}

pub fn synthesize(a: &SynthesizeArgs) -> CliResult<()> {
    let program: RobustProgram = read_json(&a.problem)?;
    let set: UncertaintySet = read_json(&a.set)?;
    let data = match &a.samples {
        Some(p) => read_samples(p)?,
        None => SampleSet::default(),
    };
    let cfg = SynthesisConfig {
        gamma: a.gamma,
        alpha_tol: a.alpha_tol,
        anchor_search: anchor_search(a.anchor_search),
        anchor_grid_steps: a.grid_steps,
    };
    let mut inputs = vec![path_str(&a.problem), path_str(&a.set)];
    inputs.extend(a.samples.as_deref().map(path_str));
    let manifest = RunManifest::new("synthesize", inputs, None, json!(cfg));
    let result = synthesize_set(&program, &set, &data, &cfg)?;
    emit_json(out(&a.out), &manifest, &result)
}

pub fn solve(a: &SolveArgs) -> CliResult<()> {
    let program: RobustProgram = read_json(&a.problem)?;
    let scaled = read_scaled_set(&a.scaled_set)?;
    scaled.check()?;
    let manifest = RunManifest::new(
        "solve",
        vec![path_str(&a.problem), path_str(&a.scaled_set)],
        None,
        json!({ "scaled_set": scaled }),
    );
    let report = solve_robust(&program, &scaled)?;
    emit_json(out(&a.out), &manifest, &report)
}

pub fn quantify(a: &QuantifyArgs) -> CliResult<()> {
    let data = read_samples(&a.samples)?;
    let support = read_polytope(&a.support)?;
    let safe = read_polytope(&a.safe)?;
    let norm = parse_norm(&a.norm)?;
    let mode = match a.mode {
        ModeArg::Worst => Mode::Worst,
        ModeArg::Best => Mode::Best,
    };
    let manifest = RunManifest::new(
        "quantify",
        vec![
            path_str(&a.samples),
            path_str(&a.support),
            path_str(&a.safe),
        ],
        None,
        json!({ "epsilon": a.eps, "ground_norm": norm, "mode": mode }),
    );
    let amb = AmbiguitySpec::new(a.eps, norm, data);
    let q = quantify_probability(&amb, &support, &safe, mode)?;
    emit_json(out(&a.out), &manifest, &q)
}

pub fn dro(a: &DroArgs) -> CliResult<()> {
    let program: RobustProgram = read_json(&a.problem)?;
    let set: UncertaintySet = read_json(&a.set)?;
    let data = read_samples(&a.samples)?;
    let cfg = DroConfig {
        objective: objective(a.objective),
        amb: AmbiguitySpec::new(a.eps, parse_norm(&a.norm)?, data),
        alpha_grid: a.alpha_grid,
        anchor_search: anchor_search(a.anchor_search),
        anchor_grid_steps: a.grid_steps,
        alpha_tol: 1e-6,
    };
    let manifest = RunManifest::new(
        "dro",
        vec![path_str(&a.problem), path_str(&a.set), path_str(&a.samples)],
        None,
        config_echo(&cfg),
    );
    let result = dro_synthesize(&program, &set, &cfg)?;
    emit_json(out(&a.out), &manifest, &result)
}

pub fn objective(m: ModeArg) -> DroObjective {
    match m {
        ModeArg::Worst => DroObjective::MinWorstUnsafe,
        ModeArg::Best => DroObjective::MaxBestSafe,
    }
}

/// DRO configuration without the sample matrix.
pub fn config_echo(cfg: &DroConfig) -> serde_json::Value {
    json!({
        "objective": cfg.objective,
        "epsilon": cfg.amb.epsilon,
        "ground_norm": cfg.amb.ground_norm,
        "samples": cfg.amb.data.len(),
        "alpha_grid": cfg.alpha_grid,
        "anchor_search": cfg.anchor_search,
        "anchor_grid_steps": cfg.anchor_grid_steps,
        "alpha_tol": cfg.alpha_tol,
    })
}
