//! `aro bench`: built-in benchmarks with tables and plot-ready series.

use std::fs;

use aro_core::benchmarks::{
    generate_samples, load_benchmark_with, BenchOptions, Benchmark, OpfVariant,
};
use aro_core::model::{SampleSet, UncertaintySet};
use aro_core::{
    coverage_count, dro_synthesize, robust_feasible_at, solve_robust, synthesize, AmbiguitySpec,
    DroConfig, ScaledSet, SolveReport, SynthesisConfig,
};
use serde_json::{json, Map, Value};

use crate::commands::{config_echo, objective, parse_norm};
use crate::error::{CliError, CliResult};
use crate::io::{emit_json, fmt_row, write_csv, xi_header};
use crate::manifest::RunManifest;
use crate::{BenchArgs, StageArg, VariantArg};

const PROFILE_POINTS: usize = 101;

pub fn run(a: &BenchArgs) -> CliResult<()> {
    let variant = match a.opf_variant {
        Some(VariantArg::Deterministic) => OpfVariant::Deterministic,
        Some(VariantArg::Distributional) => OpfVariant::Distributional,
        None if a.stage == StageArg::Dro => OpfVariant::Distributional,
        None => OpfVariant::Deterministic,
    };
    let opts = BenchOptions {
        opf_variant: variant,
        case_path: a.case.clone(),
    };
    let b = load_benchmark_with(&a.id, &opts)?;
    let data = generate_samples(&b.base_set, a.n, a.seed)?;
    let stage = match a.stage {
        StageArg::One => "1",
        StageArg::Two => "2",
        StageArg::Dro => "dro",
    };
    let mut config = json!({
        "id": b.id,
        "stage": stage,
        "n": a.n,
        "opf_variant": variant,
    });
    let inputs = a.case.iter().map(|p| p.display().to_string()).collect();

    fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let mut result = Map::new();
    result.insert("benchmark".into(), json!(b.id));
    result.insert("stage".into(), json!(stage));
    let mut table: Vec<(String, f64, Option<f64>)> = Vec::new();
    let expected = b.expected.clone();

    let (scaled, profile_header, profile_rows, solve) = match a.stage {
        StageArg::One | StageArg::Two => {
            let r = synthesize(&b.program, &b.base_set, &data, &SynthesisConfig::default())?;
            table.push((
                "alpha_star".into(),
                r.alpha_star,
                expected.as_ref().map(|e| e.alpha_star),
            ));
            table.push(("covered".into(), r.covered as f64, None));
            let (h, rows) = stage1_profile(&b, &r.scaled, &data)?;
            let solve = if a.stage == StageArg::Two {
                Some(solve_robust(&b.program, &r.scaled)?)
            } else {
                None
            };
            result.insert("alpha_star".into(), json!(r.alpha_star));
            result.insert("rhs".into(), json!(r.rhs));
            result.insert("synthesis".into(), json!(r));
            (r.scaled, h, rows, solve)
        }
        StageArg::Dro => {
            let cfg = DroConfig {
                anchor_search: Default::default(),
                ..DroConfig::new(
                    objective(a.objective),
                    AmbiguitySpec::new(a.eps, parse_norm(&a.norm)?, data.clone()),
                )
            };
            config["dro"] = config_echo(&cfg);
            let r = dro_synthesize(&b.program, &b.base_set, &cfg)?;
            table.push((
                "alpha".into(),
                r.scaled.alpha,
                expected.as_ref().map(|e| e.alpha_star),
            ));
            table.push(("prob".into(), r.prob, None));
            let rows = r
                .alpha_profile
                .iter()
                .map(|p| vec![p.alpha.to_string(), p.prob.to_string()])
                .collect();
            let solve = solve_robust(&b.program, &r.scaled)?;
            result.insert("alpha_star".into(), json!(r.scaled.alpha));
            result.insert("rhs".into(), json!(r.rhs));
            result.insert("dro".into(), json!(r));
            (
                r.scaled,
                vec!["alpha".into(), "prob".into()],
                rows,
                Some(solve),
            )
        }
    };

    if let Some(anchor) = &scaled.anchor {
        for (k, v) in anchor.iter().enumerate() {
            let e = expected.as_ref().and_then(|e| e.anchor.get(k).copied());
            table.push((format!("anchor_{}", k + 1), *v, e));
        }
    }
    if let UncertaintySet::Polytope(_) = &scaled.base {
        let rhs = aro_core::homothety_rhs(&scaled)?;
        for (k, v) in rhs.iter().enumerate() {
            let e = expected.as_ref().and_then(|e| e.rhs.get(k).copied());
            table.push((format!("rhs_{}", k + 1), *v, e));
        }
    }
    if let Some(rep) = &solve {
        table.push(("objective".into(), rep.objective, None));
        let named = named_solution(&b, rep);
        for (name, v) in &named {
            let e = expected
                .as_ref()
                .and_then(|e| e.reported.get(name).copied());
            table.push((name.clone(), *v, e));
        }
        result.insert(
            "x_named".into(),
            Value::Object(named.into_iter().map(|(k, v)| (k, json!(v))).collect()),
        );
        result.insert("solve".into(), json!(rep));
    }
    if let Some(e) = &expected {
        result.insert("reference".into(), json!(e));
    }

    let manifest = RunManifest::new("bench", inputs, Some(a.seed), config);
    emit_json(Some(&a.out.join("result.json")), &manifest, &result)?;

    let m = b.base_set.dim();
    let sample_rows: Vec<Vec<String>> = data.samples.iter().map(|s| fmt_row(s)).collect();
    write_csv(
        &a.out.join("samples.csv"),
        &manifest,
        &xi_header(m),
        &sample_rows,
    )?;

    let mut region_header = vec!["set".to_string(), "vertex".to_string()];
    region_header.extend(xi_header(m));
    let mut region_rows = Vec::new();
    let base_anchor = scaled.anchor.clone();
    let base = ScaledSet::identity(b.base_set.clone(), base_anchor)?;
    for (label, set) in [("base", &base), ("scaled", &scaled)] {
        for (k, v) in polygon(set)?.iter().enumerate() {
            let mut row = vec![label.to_string(), k.to_string()];
            row.extend(fmt_row(v));
            region_rows.push(row);
        }
    }
    write_csv(
        &a.out.join("region.csv"),
        &manifest,
        &region_header,
        &region_rows,
    )?;
    write_csv(
        &a.out.join("alpha_profile.csv"),
        &manifest,
        &profile_header,
        &profile_rows,
    )?;

    let table_rows: Vec<Vec<String>> = table
        .iter()
        .map(|(q, v, e)| {
            vec![
                q.clone(),
                v.to_string(),
                e.map(|x| x.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    let header = ["quantity", "value", "reference"].map(String::from);
    write_csv(&a.out.join("table.csv"), &manifest, &header, &table_rows)?;
    Ok(())
}

/// Feasibility and coverage along α at the chosen anchor.
fn stage1_profile(
    b: &Benchmark,
    chosen: &ScaledSet,
    data: &SampleSet,
) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut alphas: Vec<f64> = (0..PROFILE_POINTS)
        .map(|i| i as f64 / (PROFILE_POINTS - 1) as f64)
        .collect();
    alphas.push(chosen.alpha);
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let mut rows = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let s = ScaledSet::new(b.base_set.clone(), alpha, chosen.anchor.clone())?;
        let feasible = robust_feasible_at(&b.program, &s)?.feasible;
        rows.push(vec![
            alpha.to_string(),
            u8::from(feasible).to_string(),
            coverage_count(&s, data).to_string(),
        ]);
    }
    Ok((
        vec!["alpha".into(), "feasible".into(), "covered".into()],
        rows,
    ))
}

/// Vertices in drawing order: counterclockwise in 2-D, ascending in 1-D.
fn polygon(s: &ScaledSet) -> CliResult<Vec<Vec<f64>>> {
    let mut verts = s.vertices()?;
    if s.dim() == 2 && verts.len() > 2 {
        let n = verts.len() as f64;
        let cx = verts.iter().map(|v| v[0]).sum::<f64>() / n;
        let cy = verts.iter().map(|v| v[1]).sum::<f64>() / n;
        verts.sort_by(|p, q| {
            (p[1] - cy)
                .atan2(p[0] - cx)
                .total_cmp(&(q[1] - cy).atan2(q[0] - cx))
        });
    }
    Ok(verts)
}

fn named_solution(b: &Benchmark, rep: &SolveReport) -> Vec<(String, f64)> {
    b.variables
        .iter()
        .cloned()
        .zip(rep.x_opt.iter().copied())
        .collect()
}
