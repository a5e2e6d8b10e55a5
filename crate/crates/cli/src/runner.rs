//! Executes a resolved scenario and writes `reports.json`, `summary.csv` and one
//! CSV per plot series under `plots/`.

use crate::scenario::{resolve, CheckKind, CheckLit, FormLit, FunctionalLit, ModeLit, Resolved, Scenario, ScenarioError};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use symlab::verify::{self, CheckOptions, CheckReport, EnergyMode, EnergySpec, ModulusForm, Penalty, Supermodular, Verdict};

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    #[serde(flatten)]
    pub report: CheckReport,
    pub expected: Verdict,
    /// Whether `verdict == expected`; always false for checks that errored.
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub entries: Vec<Entry>,
}

impl Outcome {
    pub fn all_match(&self) -> bool {
        self.entries.iter().all(|e| e.matches)
    }
}

#[derive(Debug)]
pub enum RunError {
    Scenario(ScenarioError),
    Io(io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Scenario(e) => write!(f, "invalid scenario {e}"),
            RunError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ScenarioError> for RunError {
    fn from(e: ScenarioError) -> Self {
        RunError::Scenario(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub h_override: Option<f64>,
    pub seed: Option<u64>,
}

/// Resolves every name first, so a bad binding fails the whole scenario before
/// any check runs.
fn validate_bindings(r: &Resolved, checks: &[CheckLit]) -> Result<(), ScenarioError> {
    for (i, c) in checks.iter().enumerate() {
        let p = |field: &str| format!("checks[{i}].{field}");
        match &c.kind {
            CheckKind::Equimeasurable { operator, function } => {
                r.operator(operator, &p("operator"))?;
                r.function(function, &p("function"))?;
            }
            CheckKind::LpContraction { operator, f, g, .. } | CheckKind::Crz { operator, f, g, .. } => {
                r.operator(operator, &p("operator"))?;
                r.function(f, &p("f"))?;
                r.function(g, &p("g"))?;
            }
            CheckKind::Smoothing { operator, set, body, .. } => {
                r.operator(operator, &p("operator"))?;
                r.function(set, &p("set"))?;
                r.body(body, &p("body"))?;
            }
            CheckKind::ModulusReduction { operator, function, body, .. } => {
                r.operator(operator, &p("operator"))?;
                r.function(function, &p("function"))?;
                r.body(body, &p("body"))?;
            }
            CheckKind::ModulusCounterexample { .. } => {}
            CheckKind::PolyaSzego { operator, function, phi, body, .. } => {
                r.operator(operator, &p("operator"))?;
                r.spec(function, &p("function"))?;
                phi.build(&p("phi"))?;
                if let Some(b) = body {
                    r.body(b, &p("body"))?;
                }
            }
            CheckKind::Isoperimetric { operator, set } => {
                r.operator(operator, &p("operator"))?;
                r.function(set, &p("set"))?;
            }
            CheckKind::BallImage { operator, .. } => {
                r.operator(operator, &p("operator"))?;
            }
            CheckKind::SubgraphCore { operator, function, body, .. } => {
                r.operator(operator, &p("operator"))?;
                r.function(function, &p("function"))?;
                r.body(body, &p("body"))?;
            }
            CheckKind::EnergyCounterexample { body, .. } => {
                r.body(body, &p("body"))?;
            }
            CheckKind::ContentFormula { function, body, .. } => {
                r.function(function, &p("function"))?;
                r.body(body, &p("body"))?;
            }
            CheckKind::PolarizationFlow { function, .. } => {
                r.function(function, &p("function"))?;
            }
        }
    }
    Ok(())
}

fn run_check(r: &Resolved, c: &CheckLit, index: usize, seed: u64) -> Result<CheckReport, String> {
    let opts = CheckOptions { name: c.name.clone(), counterexample: c.expected == Verdict::ViolatedAsExpected, tolerance: c.tolerance };
    let p = |field: &str| format!("checks[{index}].{field}");
    let s = |e: ScenarioError| e.to_string();
    let report = match &c.kind {
        CheckKind::Equimeasurable { operator, function } => {
            verify::equimeasurable(&opts, r.operator(operator, &p("operator")).map_err(s)?, r.function(function, &p("function")).map_err(s)?)
        }
        CheckKind::LpContraction { operator, f, g, p: exp } => verify::lp_contraction(
            &opts,
            r.operator(operator, &p("operator")).map_err(s)?,
            r.function(f, &p("f")).map_err(s)?,
            r.function(g, &p("g")).map_err(s)?,
            Penalty::AbsPow(*exp),
        ),
        CheckKind::Crz { operator, f, g, functional, seed: own } => {
            let func = match functional {
                FunctionalLit::Product => Supermodular::Product,
                FunctionalLit::Min => Supermodular::Min,
                FunctionalLit::NegAbsPow(q) => Supermodular::NegAbsPow(*q),
            };
            verify::crz(
                &opts,
                r.operator(operator, &p("operator")).map_err(s)?,
                r.function(f, &p("f")).map_err(s)?,
                r.function(g, &p("g")).map_err(s)?,
                func,
                own.unwrap_or(seed),
            )
        }
        CheckKind::Smoothing { operator, set, body, d } => verify::smoothing(
            &opts,
            r.operator(operator, &p("operator")).map_err(s)?,
            &r.function(set, &p("set")).map_err(s)?.support(),
            r.body(body, &p("body")).map_err(s)?,
            *d,
        ),
        CheckKind::ModulusReduction { operator, function, body, d, form } => verify::modulus_reduction(
            &opts,
            r.operator(operator, &p("operator")).map_err(s)?,
            r.function(function, &p("function")).map_err(s)?,
            r.body(body, &p("body")).map_err(s)?,
            d,
            if *form == FormLit::Sharp { ModulusForm::Sharp } else { ModulusForm::Radii },
        ),
        CheckKind::ModulusCounterexample { d } => verify::modulus_counterexample(&opts, &r.grid, *d),
        CheckKind::PolyaSzego { operator, function, phi, body, level, mode, refine } => {
            let e = EnergySpec {
                phi: phi.build(&p("phi")).map_err(s)?,
                body: match body {
                    Some(b) => Some(r.body(b, &p("body")).map_err(s)?.clone()),
                    None => None,
                },
                level: *level,
                mode: match mode {
                    ModeLit::Inequality => EnergyMode::Inequality,
                    ModeLit::Equality => EnergyMode::Equality,
                    ModeLit::Sup => EnergyMode::Sup,
                },
                refine: *refine,
            };
            let spec = r.spec(function, &p("function")).map_err(s)?;
            if *refine && !spec.is_analytic() {
                return Err(format!("{}: refine needs an analytic function, {function:?} is given by samples", p("refine")));
            }
            verify::polya_szego(&opts, r.operator(operator, &p("operator")).map_err(s)?, spec, &r.grid, &e)
        }
        CheckKind::Isoperimetric { operator, set } => {
            verify::isoperimetric(&opts, r.operator(operator, &p("operator")).map_err(s)?, &r.function(set, &p("set")).map_err(s)?.support())
        }
        CheckKind::BallImage { operator, radius } => verify::ball_image(&opts, r.operator(operator, &p("operator")).map_err(s)?, &r.grid, *radius),
        CheckKind::SubgraphCore { operator, function, level, d, body } => verify::subgraph_core(
            &opts,
            r.operator(operator, &p("operator")).map_err(s)?,
            r.function(function, &p("function")).map_err(s)?,
            *level,
            *d,
            r.body(body, &p("body")).map_err(s)?,
        ),
        CheckKind::EnergyCounterexample { body, p: exp } => verify::energy_counterexample(&opts, &r.grid, r.body(body, &p("body")).map_err(s)?, *exp),
        CheckKind::ContentFormula { function, level, body } => {
            verify::content_formula(&opts, r.function(function, &p("function")).map_err(s)?, *level, r.body(body, &p("body")).map_err(s)?)
        }
        CheckKind::PolarizationFlow { function, steps, seed: own } => {
            verify::polarization_flow(&opts, r.function(function, &p("function")).map_err(s)?, *steps, own.unwrap_or(seed))
        }
    };
    report.map_err(|e| e.to_string())
}

fn failed_report(c: &CheckLit, h: f64) -> CheckReport {
    CheckReport {
        name: c.name.clone(),
        check: c.kind.check_name().into(),
        anchor: String::new(),
        lhs: 0.0,
        rhs: 0.0,
        tolerance: 0.0,
        margin: 0.0,
        verdict: Verdict::Violated,
        h,
        details: BTreeMap::new(),
        series: Vec::new(),
        runtime: Default::default(),
    }
}

/// Runs every check (in parallel) and returns entries sorted by check name.
pub fn execute(scenario: &Scenario, opts: &RunOptions) -> Result<Outcome, ScenarioError> {
    let mut scenario = scenario.clone();
    if let Some(h) = opts.h_override {
        scenario.grid.h = h;
    }
    let seed = opts.seed.unwrap_or(scenario.seed);
    let resolved = resolve(&scenario, seed)?;
    validate_bindings(&resolved, &scenario.checks)?;
    let mut entries: Vec<Entry> = scenario
        .checks
        .par_iter()
        .enumerate()
        .map(|(i, c)| match run_check(&resolved, c, i, seed) {
            Ok(report) => Entry { matches: report.verdict == c.expected, expected: c.expected, error: None, report },
            Err(e) => Entry { report: failed_report(c, resolved.grid.h()), expected: c.expected, matches: false, error: Some(e) },
        })
        .collect();
    entries.sort_by(|a, b| a.report.name.cmp(&b.report.name));
    Ok(Outcome { entries })
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn summary_csv(outcome: &Outcome) -> String {
    let mut out = String::from("name,check,expected,verdict,matches,lhs,rhs,tolerance,margin,h\n");
    for e in &outcome.entries {
        let r = &e.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.name),
            r.check,
            e.expected.as_str(),
            r.verdict.as_str(),
            e.matches,
            r.lhs,
            r.rhs,
            r.tolerance,
            r.margin,
            r.h
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `(relative path, contents)` for every output file.
pub fn render(outcome: &Outcome) -> Vec<(PathBuf, String)> {
    let mut files = vec![
        (PathBuf::from("reports.json"), serde_json::to_string_pretty(&outcome.entries).expect("reports serialize") + "\n"),
        (PathBuf::from("summary.csv"), summary_csv(outcome)),
    ];
    let mut used = std::collections::BTreeSet::new();
    for e in &outcome.entries {
        let mut stem = file_stem(&e.report.name);
        while !used.insert(stem.clone()) {
            stem.push('_');
        }
        for s in &e.report.series {
            let mut text = s.columns.join(",") + "\n";
            for row in &s.rows {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                text += &(cells.join(",") + "\n");
            }
            files.push((PathBuf::from("plots").join(format!("{stem}.{}.csv", file_stem(&s.name))), text));
        }
    }
    files
}

/// Writes each file to a temporary sibling and renames it into place.
pub fn write_outputs(dir: &Path, outcome: &Outcome) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (rel, text) in render(outcome) {
        let path = dir.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        written.push(path);
    }
    Ok(written)
}

pub fn run_scenario(scenario: &Scenario, opts: &RunOptions, out_dir: &Path) -> Result<Outcome, RunError> {
    let outcome = execute(scenario, opts)?;
    write_outputs(out_dir, &outcome)?;
    Ok(outcome)
}
