//! Scenario files: named bodies, functions and operators plus a list of checks,
//! each with the verdict it is expected to produce.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use symlab::funcs::{random_blob, random_field, FunctionSpec};
use symlab::gridfn::kcontraction_test_fn;
use symlab::rearrange::{Rearrangement, Side};
use symlab::verify::Verdict;
use symlab::{ConvexBody, Grid, GridFunction, YoungFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub seed: u64,
    pub grid: GridLit,
    #[serde(default)]
    pub bodies: BTreeMap<String, BodyLit>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionLit>,
    #[serde(default)]
    pub operators: BTreeMap<String, OperatorLit>,
    pub checks: Vec<CheckLit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridLit {
    pub h: f64,
    /// `[lo, hi]` per axis.
    pub extent: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyLit {
    Ball { center: Vec<f64>, radius: f64 },
    Polytope { vertices: Vec<Vec<f64>> },
    RegularPolygon {
        sides: usize,
        radius: f64,
        #[serde(default)]
        phase: f64,
    },
    Square { half: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum YoungLit {
    Power(f64),
    SqrtShift(bool),
    Piecewise(Vec<[f64; 2]>),
    PhiMin(bool),
    PhiMax(bool),
    Truncated { base: Box<YoungLit>, r: f64 },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionLit {
    /// `height·(1 − ‖x − center‖_K)⁺`.
    Cone {
        body: String,
        #[serde(default = "one")]
        height: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Tent {
        center: Vec<f64>,
        half_widths: Vec<f64>,
        #[serde(default = "one")]
        height: f64,
    },
    Bump {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        height: f64,
    },
    Indicator {
        body: String,
        #[serde(default = "one")]
        height: f64,
    },
    Sum(Vec<FunctionLit>),
    /// Cell values in storage order (axis 0 fastest).
    Samples { values: Vec<f64> },
    /// Seeded from the scenario seed; see [`resolve`].
    RandomField { density: f64, margin: usize },
    RandomBlob { count: usize, spread: f64, radii: [f64; 2] },
    /// `f_A = (1 − dist_K(·, A)/d)⁺` for `A` the support of another function.
    KContraction { set: String, body: String, d: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SideLit {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorLit {
    Identity(bool),
    SymDecreasing {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Steiner {
        axis: usize,
        #[serde(default)]
        center: f64,
    },
    Schwarz {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    KSchwarz { body: String },
    Polarization { axis: usize, offset: f64, positive_side: SideLit },
    Composite(Vec<OperatorLit>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalLit {
    Product,
    Min,
    NegAbsPow(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormLit {
    #[default]
    Sharp,
    Radii,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeLit {
    #[default]
    Inequality,
    Equality,
    Sup,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLit {
    pub name: String,
    pub expected: Verdict,
    /// Replaces the check's own tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(flatten)]
    pub kind: CheckKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckKind {
    Equimeasurable {
        operator: String,
        function: String,
    },
    LpContraction {
        operator: String,
        f: String,
        g: String,
        p: f64,
    },
    Crz {
        operator: String,
        f: String,
        g: String,
        functional: FunctionalLit,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Smoothing {
        operator: String,
        set: String,
        body: String,
        d: f64,
    },
    ModulusReduction {
        operator: String,
        function: String,
        body: String,
        d: Vec<f64>,
        #[serde(default)]
        form: FormLit,
    },
    ModulusCounterexample {
        d: f64,
    },
    PolyaSzego {
        operator: String,
        function: String,
        phi: YoungLit,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        body: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        level: Option<f64>,
        #[serde(default)]
        mode: ModeLit,
        #[serde(default, skip_serializing_if = "is_false")]
        refine: bool,
    },
    Isoperimetric {
        operator: String,
        set: String,
    },
    BallImage {
        operator: String,
        radius: f64,
    },
    SubgraphCore {
        operator: String,
        function: String,
        level: f64,
        d: f64,
        body: String,
    },
    EnergyCounterexample {
        body: String,
        p: f64,
    },
    ContentFormula {
        function: String,
        level: f64,
        body: String,
    },
    PolarizationFlow {
        function: String,
        steps: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl CheckKind {
    pub fn check_name(&self) -> &'static str {
        match self {
            Self::Equimeasurable { .. } => "equimeasurable",
            Self::LpContraction { .. } => "lp_contraction",
            Self::Crz { .. } => "crz",
            Self::Smoothing { .. } => "smoothing",
            Self::ModulusReduction { .. } => "modulus_reduction",
            Self::ModulusCounterexample { .. } => "modulus_counterexample",
            Self::PolyaSzego { .. } => "polya_szego",
            Self::Isoperimetric { .. } => "isoperimetric",
            Self::BallImage { .. } => "ball_image",
            Self::SubgraphCore { .. } => "subgraph_core",
            Self::EnergyCounterexample { .. } => "energy_counterexample",
            Self::ContentFormula { .. } => "content_formula",
            Self::PolarizationFlow { .. } => "polarization_flow",
        }
    }
}

/// A scenario that could not be parsed or resolved, with the JSON path of the
/// offending field.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "at {}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ScenarioError {}

fn err(path: impl Into<String>, message: impl fmt::Display) -> ScenarioError {
    ScenarioError { path: path.into(), message: message.to_string() }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            check_field_error(text, &path).unwrap_or_else(|| err(path, e.inner()))
        })?;
        scenario.validate_names()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    fn validate_names(&self) -> Result<(), ScenarioError> {
        let mut seen = BTreeMap::new();
        for (i, c) in self.checks.iter().enumerate() {
            if c.name.is_empty() {
                return Err(err(format!("checks[{i}].name"), "check names must be nonempty"));
            }
            if let Some(j) = seen.insert(c.name.clone(), i) {
                return Err(err(format!("checks[{i}].name"), format!("duplicate check name {:?} (also checks[{j}])", c.name)));
            }
        }
        Ok(())
    }
}

/// Check fields are buffered before they are parsed, so errors inside them only
/// report `checks[i]`. A field is the culprit if the check parses once it is
/// removed, apart from the complaint that it is missing.
fn check_field_error(text: &str, path: &str) -> Option<ScenarioError> {
    let index: usize = path.strip_prefix("checks[")?.strip_suffix(']')?.parse().ok()?;
    let root: serde_json::Value = serde_json::from_str(text).ok()?;
    let mut check = root.get("checks")?.get(index)?.as_object()?.clone();
    for key in ["name", "expected", "tolerance"] {
        check.remove(key);
    }
    let original = match serde_path_to_error::deserialize::<_, CheckKind>(serde_json::Value::Object(check.clone())) {
        Ok(_) => return None,
        Err(e) if e.path().to_string() != "." => return Some(err(format!("{path}.{}", e.path()), e.inner())),
        Err(e) => e.into_inner(),
    };
    for key in check.keys().filter(|k| *k != "check") {
        let mut probe = check.clone();
        probe.remove(key);
        let missing = match serde_json::from_value::<CheckKind>(serde_json::Value::Object(probe)) {
            Ok(_) => true,
            Err(e) => e.to_string() == format!("missing field `{key}`"),
        };
        if missing {
            return Some(err(format!("{path}.{key}"), original));
        }
    }
    None
}

/// Scenario literals turned into library objects.
pub struct Resolved {
    pub grid: Grid,
    pub bodies: BTreeMap<String, ConvexBody>,
    pub specs: BTreeMap<String, FunctionSpec>,
    pub functions: BTreeMap<String, GridFunction>,
    pub operators: BTreeMap<String, Rearrangement>,
}

impl BodyLit {
    pub fn build(&self) -> symlab::Result<ConvexBody> {
        match self {
            Self::Ball { center, radius } => ConvexBody::ball(center.clone(), *radius),
            Self::Polytope { vertices } => ConvexBody::polytope(vertices.clone()),
            Self::RegularPolygon { sides, radius, phase } => ConvexBody::regular_polygon(*sides, *radius, *phase),
            Self::Square { half } => ConvexBody::square(*half),
        }
    }
}

impl YoungLit {
    pub fn build(&self, path: &str) -> Result<YoungFunction, ScenarioError> {
        let flag = |on: bool, f: YoungFunction| if on { Ok(f) } else { Err(err(path, "flag literals must be `true`")) };
        match self {
            Self::Power(p) => YoungFunction::power(*p).map_err(|e| err(path, e)),
            Self::SqrtShift(on) => flag(*on, YoungFunction::SqrtShift),
            Self::Piecewise(points) => YoungFunction::piecewise(points.iter().map(|p| (p[0], p[1])).collect()).map_err(|e| err(path, e)),
            Self::PhiMin(on) => flag(*on, YoungFunction::PhiMin),
            Self::PhiMax(on) => flag(*on, YoungFunction::PhiMax),
            Self::Truncated { base, r } => base.build(&format!("{path}.truncated.base"))?.truncate(*r).map_err(|e| err(path, e)),
        }
    }
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, name: &str, kind: &str, path: &str) -> Result<&'a T, ScenarioError> {
    map.get(name).ok_or_else(|| err(path, format!("unknown {kind} {name:?}")))
}

impl Resolved {
    pub fn body(&self, name: &str, path: &str) -> Result<&ConvexBody, ScenarioError> {
        lookup(&self.bodies, name, "body", path)
    }

    pub fn function(&self, name: &str, path: &str) -> Result<&GridFunction, ScenarioError> {
        lookup(&self.functions, name, "function", path)
    }

    pub fn spec(&self, name: &str, path: &str) -> Result<&FunctionSpec, ScenarioError> {
        lookup(&self.specs, name, "function", path)
    }

    pub fn operator(&self, name: &str, path: &str) -> Result<&Rearrangement, ScenarioError> {
        lookup(&self.operators, name, "operator", path)
    }
}

fn function_spec(lit: &FunctionLit, bodies: &BTreeMap<String, ConvexBody>, grid: &Grid, rng: &mut ChaCha8Rng, path: &str) -> Result<FunctionSpec, ScenarioError> {
    Ok(match lit {
        FunctionLit::Cone { body, height, center } => {
            let body = lookup(bodies, body, "body", &format!("{path}.cone.body"))?.clone();
            let center = center.clone().unwrap_or_else(|| vec![0.0; body.dim()]);
            FunctionSpec::Cone { body, height: *height, center }
        }
        FunctionLit::Tent { center, half_widths, height } => FunctionSpec::Tent { center: center.clone(), half_widths: half_widths.clone(), height: *height },
        FunctionLit::Bump { center, radius, height } => FunctionSpec::Bump { center: center.clone(), radius: *radius, height: *height },
        FunctionLit::Indicator { body, height } => {
            FunctionSpec::Indicator { body: lookup(bodies, body, "body", &format!("{path}.indicator.body"))?.clone(), height: *height }
        }
        FunctionLit::Sum(parts) => FunctionSpec::Sum(
            parts
                .iter()
                .enumerate()
                .map(|(i, p)| function_spec(p, bodies, grid, rng, &format!("{path}.sum[{i}]")))
                .collect::<Result<_, _>>()?,
        ),
        FunctionLit::Samples { values } => FunctionSpec::Samples { values: values.clone() },
        FunctionLit::RandomField { density, margin } => {
            if !(0.0..=1.0).contains(density) {
                return Err(err(format!("{path}.random_field.density"), "density must lie in [0, 1]"));
            }
            FunctionSpec::Samples { values: random_field(grid, rng, *density, *margin).map_err(|e| err(path, e))?.into_values() }
        }
        FunctionLit::RandomBlob { count, spread, radii } => {
            if !(radii[0] > 0.0 && radii[0] <= radii[1]) {
                return Err(err(format!("{path}.random_blob.radii"), "radii must satisfy 0 < min <= max"));
            }
            let set = random_blob(grid, rng, *count, *spread, (radii[0], radii[1]));
            FunctionSpec::Samples { values: set.indicator().into_values() }
        }
        FunctionLit::KContraction { .. } => return Err(err(path, "k_contraction cannot be nested")),
    })
}

fn operator(lit: &OperatorLit, bodies: &BTreeMap<String, ConvexBody>, dim: usize, path: &str) -> Result<Rearrangement, ScenarioError> {
    let center = |c: &Option<Vec<f64>>| c.clone().unwrap_or_else(|| vec![0.0; dim]);
    Ok(match lit {
        OperatorLit::Identity(on) => {
            if !on {
                return Err(err(format!("{path}.identity"), "flag literals must be `true`"));
            }
            Rearrangement::Identity
        }
        OperatorLit::SymDecreasing { center: c } => Rearrangement::SymDecreasing { center: center(c) },
        OperatorLit::Steiner { axis, center } => Rearrangement::Steiner { axis: *axis, center: *center },
        OperatorLit::Schwarz { center: c } => Rearrangement::Schwarz { center: center(c) },
        OperatorLit::KSchwarz { body } => Rearrangement::KSchwarz { body: lookup(bodies, body, "body", &format!("{path}.k_schwarz.body"))?.clone() },
        OperatorLit::Polarization { axis, offset, positive_side } => Rearrangement::Polarization {
            axis: *axis,
            offset: *offset,
            positive_side: if *positive_side == SideLit::Plus { Side::Plus } else { Side::Minus },
        },
        OperatorLit::Composite(parts) => Rearrangement::Composite(
            parts
                .iter()
                .enumerate()
                .map(|(i, p)| operator(p, bodies, dim, &format!("{path}.composite[{i}]")))
                .collect::<Result<_, _>>()?,
        ),
    })
}

/// Builds the grid, bodies, functions and operators of a scenario.
///
/// Random functions draw, in name order, from one `ChaCha8Rng` seeded with `seed`.
/// Operators are prepared once here so malformed ones fail before any check runs.
pub fn resolve(s: &Scenario, seed: u64) -> Result<Resolved, ScenarioError> {
    let grid = Grid::from_extent(s.grid.h, &s.grid.extent).map_err(|e| err("grid", e))?;
    let mut bodies = BTreeMap::new();
    for (name, lit) in &s.bodies {
        bodies.insert(name.clone(), lit.build().map_err(|e| err(format!("bodies.{name}"), e))?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = BTreeMap::new();
    let mut functions = BTreeMap::new();
    for (name, lit) in &s.functions {
        if matches!(lit, FunctionLit::KContraction { .. }) {
            continue;
        }
        let path = format!("functions.{name}");
        let spec = function_spec(lit, &bodies, &grid, &mut rng, &path)?;
        functions.insert(name.clone(), spec.sample(&grid).map_err(|e| err(&path, e))?);
        specs.insert(name.clone(), spec);
    }
    for (name, lit) in &s.functions {
        let FunctionLit::KContraction { set, body, d } = lit else { continue };
        let path = format!("functions.{name}.k_contraction");
        let base: &GridFunction = lookup(&functions, set, "function", &format!("{path}.set"))?;
        let k = lookup(&bodies, body, "body", &format!("{path}.body"))?;
        let f = kcontraction_test_fn(&base.support(), k, *d).map_err(|e| err(&path, e))?;
        specs.insert(name.clone(), FunctionSpec::Samples { values: f.values().to_vec() });
        functions.insert(name.clone(), f);
    }
    let mut operators = BTreeMap::new();
    for (name, lit) in &s.operators {
        let path = format!("operators.{name}");
        let t = operator(lit, &bodies, grid.dim(), &path)?;
        t.set_map(&grid).map_err(|e| err(&path, e))?;
        operators.insert(name.clone(), t);
    }
    Ok(Resolved { grid, bodies, specs, functions, operators })
}
