//! Built-in benchmark problems.

pub mod case;
pub mod sampling;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BiAffineConstraint, DecisionSet, Polytope, RobustProgram, UncertaintySet};
use case::{load_case_file, parse_case, CaseData, CASE5_TEXT};

pub use sampling::generate_samples;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkId {
    Motivating,
    NumericalLp,
    #[serde(rename = "opf_5bus")]
    Opf5Bus,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 3] = [
        BenchmarkId::Motivating,
        BenchmarkId::NumericalLp,
        BenchmarkId::Opf5Bus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkId::Motivating => "motivating",
            BenchmarkId::NumericalLp => "numerical_lp",
            BenchmarkId::Opf5Bus => "opf_5bus",
        }
    }
}

impl std::str::FromStr for BenchmarkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownBenchmark(s.to_string()))
    }
}

impl std::fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reference values for a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub alpha_star: f64,
    pub anchor: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Reported decision values by variable name.
    pub reported: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    pub id: BenchmarkId,
    pub program: RobustProgram,
    pub base_set: UncertaintySet,
    pub expected: Option<Expected>,
    pub variables: Vec<String>,
}

/// Which constant set the frequency constraints of the OPF case use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpfVariant {
    /// Base inertia 600, PFR 324 MW, nadir bound 829440/3.2.
    #[default]
    Deterministic,
    /// Base inertia 550, PFR 300 MW, nadir bound 720000/3.2.
    Distributional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyParams {
    /// Inertia of the synchronous fleet.
    pub base_inertia: f64,
    /// Primary frequency response `R` in MW.
    pub pfr_mw: f64,
    /// `ΔP_L² T_d / (4 Δf_lim)` as used in the nadir bound.
    pub nadir_rhs: f64,
    /// Largest generation loss `P_L` in MW.
    pub loss_mw: f64,
    /// RoCoF limit in Hz/s.
    pub rocof_limit: f64,
    pub total_virtual_min: f64,
    pub total_virtual_max: f64,
}

impl FrequencyParams {
    pub fn for_variant(v: OpfVariant) -> Self {
        let (base_inertia, pfr_mw, nadir_rhs) = match v {
            OpfVariant::Deterministic => (600.0, 324.0, 829_440.0 / 3.2),
            OpfVariant::Distributional => (550.0, 300.0, 720_000.0 / 3.2),
        };
        Self {
            base_inertia,
            pfr_mw,
            nadir_rhs,
            loss_mw: 600.0,
            rocof_limit: 0.5,
            total_virtual_min: 116.0,
            total_virtual_max: 175.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchOptions {
    pub opf_variant: OpfVariant,
    /// Case file to read instead of the bundled one.
    pub case_path: Option<PathBuf>,
}

pub fn load_benchmark(id: &str) -> Result<Benchmark> {
    load_benchmark_with(id, &BenchOptions::default())
}

pub fn load_benchmark_with(id: &str, opts: &BenchOptions) -> Result<Benchmark> {
    match id.parse::<BenchmarkId>()? {
        BenchmarkId::Motivating => Ok(motivating()),
        BenchmarkId::NumericalLp => Ok(numerical_lp()),
        BenchmarkId::Opf5Bus => {
            let case = match &opts.case_path {
                Some(p) => load_case_file(p)?,
                None => parse_case(CASE5_TEXT)?,
            };
            opf_5bus(&case, FrequencyParams::for_variant(opts.opf_variant))
        }
    }
}

/// `min x` s.t. `x + ξ - 5 <= 0`, `x ∈ [1, 2]`, `ξ ∈ [3, 5]`.
pub fn motivating() -> Benchmark {
    let program = RobustProgram {
        objective: vec![1.0],
        constraints: vec![BiAffineConstraint::new(vec![1.0], vec![1.0], -5.0)],
        decision_set: DecisionSet::boxed(&[1.0], &[2.0]),
        uncertainty_dim: 1,
    };
    Benchmark {
        id: BenchmarkId::Motivating,
        program,
        base_set: UncertaintySet::Polytope(Polytope::interval(3.0, 5.0)),
        expected: Some(Expected {
            alpha_star: 0.5,
            anchor: vec![3.0],
            rhs: vec![4.0, -3.0],
            reported: BTreeMap::from([("x".to_string(), 1.0)]),
        }),
        variables: vec!["x".into()],
    }
}

/// `min c·x` s.t. `A x <= b + ξ`, `x >= 0`, `ξ` in the box `|ξ_k| <= 10`.
pub fn numerical_lp() -> Benchmark {
    let a = [[1.0, 1.0], [1.0, 2.0]];
    let b = [5.0, 6.0];
    let constraints = (0..2)
        .map(|j| {
            let mut e = vec![0.0; 2];
            e[j] = -1.0;
            BiAffineConstraint::new(a[j].to_vec(), e, -b[j])
        })
        .collect();
    let program = RobustProgram {
        objective: vec![-1.0, -3.0],
        constraints,
        decision_set: DecisionSet::boxed(&[0.0, 0.0], &[f64::INFINITY, f64::INFINITY]),
        uncertainty_dim: 2,
    };
    Benchmark {
        id: BenchmarkId::NumericalLp,
        program,
        base_set: UncertaintySet::Polytope(Polytope::boxed(&[-10.0, -10.0], &[10.0, 10.0])),
        expected: Some(Expected {
            alpha_star: 0.75,
            anchor: vec![10.0, 10.0],
            rhs: vec![10.0, 10.0, 5.0, 5.0],
            reported: BTreeMap::from([("x_1".to_string(), 0.0), ("x_2".to_string(), 0.0)]),
        }),
        variables: vec!["x_1".into(), "x_2".into()],
    }
}

/// Index layout of the OPF decision vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpfLayout {
    pub gen: Vec<usize>,
    pub virtual_inertia: Vec<usize>,
    pub theta: Vec<usize>,
    pub flow: Vec<usize>,
    pub n: usize,
}

impl OpfLayout {
    pub fn new(case: &CaseData) -> Self {
        let ng = case.generators.len();
        let nh = case.inertia.len();
        let nb = case.buses.len();
        let nl = case.branches.len();
        Self {
            gen: (0..ng).collect(),
            virtual_inertia: (ng..ng + nh).collect(),
            theta: (ng + nh..ng + nh + nb).collect(),
            flow: (ng + nh + nb..ng + nh + nb + nl).collect(),
            n: ng + nh + nb + nl,
        }
    }
}

/// DC optimal power flow with frequency-nadir and RoCoF constraints; the
/// uncertain parameter is the inertia `H_i` of the remaining fleet.
pub fn opf_5bus(case: &CaseData, fp: FrequencyParams) -> Result<Benchmark> {
    let lay = OpfLayout::new(case);
    let n = lay.n;
    let unit = |j: usize, v: f64| {
        let mut r = vec![0.0; n];
        r[j] = v;
        r
    };

    let mut objective = vec![0.0; n];
    let mut lo = vec![f64::NEG_INFINITY; n];
    let mut hi = vec![f64::INFINITY; n];
    let mut names = vec![String::new(); n];
    for (g, &j) in case.generators.iter().zip(&lay.gen) {
        objective[j] = g.cost;
        lo[j] = g.pmin;
        hi[j] = g.pmax;
        names[j] = format!("P_g{}", g.id);
    }
    for (h, &j) in case.inertia.iter().zip(&lay.virtual_inertia) {
        objective[j] = h.cost;
        lo[j] = h.hmin;
        hi[j] = h.hmax;
        names[j] = format!("H_c{}", h.id);
    }
    for (b, &j) in case.buses.iter().zip(&lay.theta) {
        lo[j] = 0.0;
        hi[j] = if b.is_ref { 0.0 } else { std::f64::consts::PI };
        names[j] = format!("theta_{}", b.id);
    }
    for (br, &j) in case.branches.iter().zip(&lay.flow) {
        names[j] = format!("P_{}{}", br.from, br.to);
    }

    let mut ds = DecisionSet::boxed(&lo, &hi);
    let mut total = vec![0.0; n];
    for &j in &lay.virtual_inertia {
        total[j] = 1.0;
    }
    ds.g.push(total.clone());
    ds.h.push(fp.total_virtual_max);
    ds.g.push(total.iter().map(|v| -v).collect());
    ds.h.push(-fp.total_virtual_min);

    // nodal balance: generation - load = net outflow
    for (bi, bus) in case.buses.iter().enumerate() {
        let mut row = vec![0.0; n];
        for (g, &j) in case.generators.iter().zip(&lay.gen) {
            if g.bus == bus.id {
                row[j] += 1.0;
            }
        }
        for (br, &j) in case.branches.iter().zip(&lay.flow) {
            if case.bus_index(br.from) == Some(bi) {
                row[j] -= 1.0;
            }
            if case.bus_index(br.to) == Some(bi) {
                row[j] += 1.0;
            }
        }
        ds.g_eq.push(row);
        ds.h_eq.push(bus.load_mw);
    }
    // DC flow: P_mn = base (θ_m - θ_n) / x_mn
    for (br, &j) in case.branches.iter().zip(&lay.flow) {
        let k = case.base_mva / br.x_pu;
        let mut row = unit(j, 1.0);
        row[lay.theta[case.bus_index(br.from).expect("validated")]] -= k;
        row[lay.theta[case.bus_index(br.to).expect("validated")]] += k;
        ds.g_eq.push(row);
        ds.h_eq.push(0.0);
    }

    // R (H0 + H_c + ξ) >= nadir_rhs
    let mut a_nadir = vec![0.0; n];
    let mut a_rocof = vec![0.0; n];
    for &j in &lay.virtual_inertia {
        a_nadir[j] = -fp.pfr_mw;
        a_rocof[j] = -1.0;
    }
    let nadir = BiAffineConstraint::new(
        a_nadir,
        vec![-fp.pfr_mw],
        fp.nadir_rhs - fp.pfr_mw * fp.base_inertia,
    );
    // H0 + H_c + ξ >= P_L / (2 RoCoF_lim)
    let rocof = BiAffineConstraint::new(
        a_rocof,
        vec![-1.0],
        fp.loss_mw / (2.0 * fp.rocof_limit) - fp.base_inertia,
    );

    let program = RobustProgram {
        objective,
        constraints: vec![nadir, rocof],
        decision_set: ds,
        uncertainty_dim: 1,
    };
    let reported = BTreeMap::from(
        [
            ("P_g1", 40.0),
            ("P_g2", 170.0),
            ("P_g3", 520.0),
            ("P_g5", 270.0),
            ("H_c1", 100.0),
            ("H_c2", 75.0),
            ("theta_1", 0.0373),
            ("theta_2", 0.0272),
            ("theta_3", 0.0374),
            ("theta_4", 0.0),
            ("theta_5", 0.0449),
        ]
        .map(|(k, v)| (k.to_string(), v)),
    );
    Ok(Benchmark {
        id: BenchmarkId::Opf5Bus,
        program,
        base_set: UncertaintySet::Polytope(Polytope::interval(20.0, 35.0)),
        expected: Some(Expected {
            alpha_star: 2.0 / 3.0,
            anchor: vec![35.0],
            rhs: vec![35.0, -25.0],
            reported,
        }),
        variables: names,
    })
}

impl Benchmark {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_program;

    #[test]
    fn all_benchmarks_validate() {
        for id in BenchmarkId::ALL {
            let b = load_benchmark(id.as_str()).unwrap();
            let r = validate_program(&b.program, &b.base_set).unwrap();
            assert_eq!(r.n, b.variables.len());
        }
        assert!(matches!(
            load_benchmark("ieee14"),
            Err(Error::UnknownBenchmark(_))
        ));
    }

    #[test]
    fn opf_nadir_constant() {
        let b = load_benchmark("opf_5bus").unwrap();
        let nadir = &b.program.constraints[0];
        // 324 (600 + H_c + H_i) >= 259200
        assert!((nadir.constant - (259_200.0 - 324.0 * 600.0)).abs() < 1e-9);
        assert_eq!(b.program.n(), 17);
    }

    #[test]
    fn missing_case_file() {
        let opts = BenchOptions {
            case_path: Some(PathBuf::from("/no/such/case5.txt")),
            ..Default::default()
        };
        assert!(matches!(
            load_benchmark_with("opf_5bus", &opts),
            Err(Error::MissingCaseFile(_))
        ));
    }
}
