//! Run configuration: a TOML file parsed into validated domain objects.
//!
//! Rational numbers are written as `"p/q"` strings (plain integers are also
//! accepted); floating-point values are rejected by the schema.

use std::path::Path;
use std::sync::Arc;

use kn_core::basis::MarkedSurface;
use kn_core::cocycles::Cycle;
use kn_core::current::CurrentCocycleSpec;
use kn_core::exact::{parse_scalar, RationalFunction, Scalar, SpherePoint};
use kn_core::lie::{build_abelian, build_gl, build_sl, direct_sum, FiniteLieAlgebra};
use kn_core::window::WindowAlgebra;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: impl Into<String>, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid { key: key.into(), message: message.to_string() }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Text(String),
}

impl Number {
    fn to_scalar(&self, key: &str) -> Result<Scalar, ConfigError> {
        match self {
            Number::Int(v) => Ok(Scalar::from_integer((*v).into())),
            Number::Text(t) => parse_scalar(t).map_err(|e| invalid(key, e)),
        }
    }

    fn to_point(&self, key: &str) -> Result<SpherePoint, ConfigError> {
        match self {
            Number::Text(t) if matches!(t.trim(), "inf" | "infinity" | "∞") => Ok(SpherePoint::Infinity),
            other => Ok(SpherePoint::Finite(other.to_scalar(key)?)),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    surface: RawSurface,
    #[serde(default)]
    lie: Option<RawLie>,
    #[serde(default)]
    lambdas: Option<Vec<i32>>,
    #[serde(default)]
    window: Option<i64>,
    #[serde(default)]
    tasks: Option<Vec<String>>,
    #[serde(default)]
    cocycle: Vec<RawCocycle>,
    #[serde(default)]
    h2loc: Option<RawH2loc>,
    #[serde(default)]
    fault: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    #[serde(rename = "in")]
    in_points: Vec<Number>,
    #[serde(default)]
    out: Option<Vec<Number>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLie {
    #[serde(default)]
    algebra: Option<String>,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    /// Entries `[x, y, z, c]` meaning `[x, y] += c z`.
    #[serde(default)]
    brackets: Option<Vec<Vec<Number>>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FormText {
    Named(String),
    Matrix(Vec<Vec<Number>>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LinearText {
    Named(String),
    Vector(Vec<Number>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    coeff: Number,
    #[serde(default)]
    at: Option<Number>,
    power: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCocycle {
    name: String,
    #[serde(default)]
    affine: Option<FormText>,
    #[serde(default)]
    mixing: Option<LinearText>,
    #[serde(default)]
    vector_field: Option<bool>,
    #[serde(default)]
    coefficient: Option<Number>,
    #[serde(default)]
    cycle: Option<String>,
    /// Projective connection, as a sum of `coeff (z - at)^power` terms.
    #[serde(default)]
    r: Option<Vec<RawTerm>>,
    /// Affine connection, same format.
    #[serde(default)]
    t: Option<Vec<RawTerm>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawH2loc {
    #[serde(default)]
    targets: Vec<String>,
    #[serde(default)]
    window: Option<i64>,
}

/// Verification tasks run by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Duality,
    Partition,
    Grading,
    Geometric,
    Jacobi,
    Cocycles,
    Locality,
    Invariance,
    Perfectness,
}

impl Task {
    pub const ALL: [Task; 9] = [
        Task::Duality,
        Task::Partition,
        Task::Grading,
        Task::Geometric,
        Task::Jacobi,
        Task::Cocycles,
        Task::Locality,
        Task::Invariance,
        Task::Perfectness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Duality => "duality",
            Task::Partition => "partition",
            Task::Grading => "grading",
            Task::Geometric => "geometric",
            Task::Jacobi => "jacobi",
            Task::Cocycles => "cocycles",
            Task::Locality => "locality",
            Task::Invariance => "invariance",
            Task::Perfectness => "perfectness",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Negates `γ^v(a, b)` whenever one argument has degree ±3.
    GammaVSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Current,
    D1,
}

#[derive(Debug, Clone)]
pub struct Target {
    pub label: String,
    pub lie: Arc<FiniteLieAlgebra>,
    pub kind: TargetKind,
}

#[derive(Debug, Clone)]
pub struct NamedSpec {
    pub name: String,
    pub spec: CurrentCocycleSpec,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub surface: MarkedSurface,
    pub lie: Arc<FiniteLieAlgebra>,
    pub lambdas: Vec<i32>,
    pub window: i64,
    pub tasks: Vec<Task>,
    pub cocycles: Vec<NamedSpec>,
    pub targets: Vec<Target>,
    pub h2loc_window: i64,
    pub fault: Option<Fault>,
}

impl RunConfig {
    /// `𝒟¹_𝔤` for the configured surface and Lie algebra.
    pub fn algebra(&self) -> WindowAlgebra {
        WindowAlgebra::d1g(&self.surface, self.lie.clone())
    }

    pub fn describe_surface(&self) -> String {
        let fmt = |pts: Vec<String>| pts.join(",");
        format!(
            "I=[{}] O=[{}]",
            fmt(self.surface.in_points().iter().map(kn_core::exact::format_scalar).collect()),
            fmt(self.surface.out_points().iter().map(|p| p.to_string()).collect())
        )
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    build(raw)
}

/// Parses `sl(2)`, `gl(3)`, `abelian(2)` and `+`-separated direct sums.
pub fn parse_lie(text: &str) -> Result<FiniteLieAlgebra, String> {
    let parts: Vec<&str> = text.split('+').map(str::trim).collect();
    let mut built = Vec::new();
    for part in &parts {
        let (head, arg) = part
            .strip_suffix(')')
            .and_then(|p| p.split_once('('))
            .ok_or_else(|| format!("expected name(n), found {part:?}"))?;
        let n: usize = arg.trim().parse().map_err(|_| format!("bad dimension in {part:?}"))?;
        let g = match head.trim() {
            "sl" => build_sl(n),
            "gl" => build_gl(n),
            "abelian" => build_abelian(n),
            other => return Err(format!("unknown Lie algebra family {other:?} (use sl, gl, abelian)")),
        }
        .map_err(|e| e.to_string())?;
        built.push(g);
    }
    if built.len() == 1 {
        Ok(built.pop().expect("one part"))
    } else {
        direct_sum(&built).map_err(|e| e.to_string())
    }
}

fn build_lie(raw: Option<RawLie>) -> Result<FiniteLieAlgebra, ConfigError> {
    let Some(raw) = raw else {
        return Ok(build_sl(2).expect("sl(2)"));
    };
    match (raw.algebra, raw.labels, raw.brackets) {
        (Some(a), None, None) => parse_lie(&a).map_err(|e| invalid("lie.algebra", e)),
        (None, Some(labels), brackets) => {
            let d = labels.len();
            let mut table = vec![vec![Vec::new(); d]; d];
            let find = |key: &str, n: &Number| -> Result<usize, ConfigError> {
                match n {
                    Number::Text(t) => labels.iter().position(|l| l == t).ok_or_else(|| invalid(key, format!("unknown label {t:?}"))),
                    Number::Int(_) => Err(invalid(key, "expected a label")),
                }
            };
            for (i, entry) in brackets.unwrap_or_default().iter().enumerate() {
                let key = format!("lie.brackets[{i}]");
                let [x, y, z, c] = entry.as_slice() else {
                    return Err(invalid(key, "expected [x, y, z, coefficient]"));
                };
                let (x, y, z) = (find(&key, x)?, find(&key, y)?, find(&key, z)?);
                let c = c.to_scalar(&key)?;
                table[x][y].push((z, c.clone()));
                table[y][x].push((z, -c));
            }
            let name = raw.name.unwrap_or_else(|| "custom".into());
            FiniteLieAlgebra::from_structure_constants(&name, labels, table).map_err(|e| invalid("lie", e))
        }
        _ => Err(invalid("lie", "give either `algebra` or `labels` (with optional `brackets`)")),
    }
}

fn build_connection(key: &str, terms: Option<Vec<RawTerm>>) -> Result<RationalFunction, ConfigError> {
    let mut f = RationalFunction::zero();
    for (i, t) in terms.unwrap_or_default().iter().enumerate() {
        let k = format!("{key}[{i}]");
        let c = t.coeff.to_scalar(&k)?;
        let at = match &t.at {
            Some(a) => a.to_scalar(&k)?,
            None => Scalar::from_integer(0.into()),
        };
        f = &f + &RationalFunction::from_root_powers(c, &[(at, t.power)]);
    }
    Ok(f)
}

fn build_cycle(key: &str, text: Option<&str>) -> Result<Cycle, ConfigError> {
    match text.map(str::trim) {
        None | Some("separating") => Ok(Cycle::Separating),
        Some(t) => t
            .strip_prefix("point:")
            .and_then(|i| i.trim().parse().ok())
            .map(Cycle::PerPoint)
            .ok_or_else(|| invalid(key, format!("expected \"separating\" or \"point:<i>\", found {t:?}"))),
    }
}

fn build_form(key: &str, g: &FiniteLieAlgebra, f: &FormText) -> Result<Vec<Vec<Scalar>>, ConfigError> {
    match f {
        FormText::Named(n) => match n.as_str() {
            "trace" => g.trace_form().map_err(|e| invalid(key, e)),
            "trace_outer" => g.trace_outer_form().map_err(|e| invalid(key, e)),
            "killing" => Ok(g.killing_form()),
            other => {
                let space = g.invariant_form_space();
                other
                    .strip_prefix("invariant:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .and_then(|k| space.get(k).cloned())
                    .ok_or_else(|| invalid(key, format!("unknown form {other:?} ({} invariant forms available)", space.len())))
            }
        },
        FormText::Matrix(rows) => {
            if rows.len() != g.dim() || rows.iter().any(|r| r.len() != g.dim()) {
                return Err(invalid(key, format!("matrix must be {0}x{0}", g.dim())));
            }
            rows.iter().map(|r| r.iter().map(|v| v.to_scalar(key)).collect()).collect()
        }
    }
}

fn build_linear(key: &str, g: &FiniteLieAlgebra, f: &LinearText) -> Result<Vec<Scalar>, ConfigError> {
    match f {
        LinearText::Named(n) if n == "trace" => g.trace_functional().map_err(|e| invalid(key, e)),
        LinearText::Named(n) => {
            let space = g.linear_forms_vanishing_on_derived();
            n.strip_prefix("derived:")
                .and_then(|k| k.parse::<usize>().ok())
                .and_then(|k| space.get(k).cloned())
                .ok_or_else(|| invalid(key, format!("unknown linear form {n:?} ({} forms vanish on [g,g])", space.len())))
        }
        LinearText::Vector(v) => {
            if v.len() != g.dim() {
                return Err(invalid(key, format!("vector must have {} entries", g.dim())));
            }
            v.iter().map(|x| x.to_scalar(key)).collect()
        }
    }
}

fn build_cocycle(i: usize, raw: RawCocycle, g: &FiniteLieAlgebra) -> Result<NamedSpec, ConfigError> {
    let key = format!("cocycle[{i}] ({})", raw.name);
    let cycle = build_cycle(&key, raw.cycle.as_deref())?;
    let r = build_connection(&format!("{key}.r"), raw.r)?;
    let t = build_connection(&format!("{key}.t"), raw.t)?;
    let spec = match (&raw.affine, &raw.mixing, raw.vector_field.unwrap_or(false)) {
        (Some(f), None, false) => CurrentCocycleSpec::Affine { alpha: build_form(&key, g, f)?, cycle },
        (None, Some(f), false) => CurrentCocycleSpec::Mixing { phi: build_linear(&key, g, f)?, t, cycle },
        (None, None, true) => CurrentCocycleSpec::VectorField { r, cycle },
        _ => return Err(invalid(key, "give exactly one of `affine`, `mixing`, `vector_field = true`")),
    };
    let spec = match &raw.coefficient {
        Some(c) => spec.scaled(c.to_scalar(&key)?),
        None => spec,
    };
    Ok(NamedSpec { name: raw.name, spec })
}

/// The default family on `𝒟¹_𝔤`: every invariant form, every linear form
/// vanishing on `[𝔤, 𝔤]`, and the vector field cocycle.
pub fn default_cocycles(g: &FiniteLieAlgebra) -> Vec<NamedSpec> {
    let mut out: Vec<NamedSpec> = g
        .invariant_form_space()
        .into_iter()
        .enumerate()
        .map(|(k, alpha)| NamedSpec { name: format!("affine:{k}"), spec: CurrentCocycleSpec::affine(alpha) })
        .collect();
    out.extend(
        g.linear_forms_vanishing_on_derived()
            .into_iter()
            .enumerate()
            .map(|(k, phi)| NamedSpec { name: format!("mixing:{k}"), spec: CurrentCocycleSpec::mixing(phi) }),
    );
    out.push(NamedSpec { name: "vector_field".into(), spec: CurrentCocycleSpec::vector_field() });
    out
}

/// `D1`, `<algebra>-current` or `<algebra>-D1`.
pub fn parse_target(text: &str) -> Result<Target, String> {
    let t = text.trim();
    if t == "D1" {
        return Ok(Target { label: t.into(), lie: Arc::new(build_abelian(1).expect("abelian(1)")), kind: TargetKind::D1 });
    }
    let (alg, kind) = if let Some(a) = t.strip_suffix("-current") {
        (a, TargetKind::Current)
    } else if let Some(a) = t.strip_suffix("-D1") {
        (a, TargetKind::D1)
    } else {
        return Err(format!("target {t:?} must be D1, <algebra>-current or <algebra>-D1"));
    };
    Ok(Target { label: t.into(), lie: Arc::new(parse_lie(alg)?), kind })
}

fn build(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let ins: Vec<SpherePoint> = raw
        .surface
        .in_points
        .iter()
        .enumerate()
        .map(|(i, p)| p.to_point(&format!("surface.in[{i}]")))
        .collect::<Result<_, _>>()?;
    let outs: Vec<SpherePoint> = match &raw.surface.out {
        Some(o) => o.iter().enumerate().map(|(i, p)| p.to_point(&format!("surface.out[{i}]"))).collect::<Result<_, _>>()?,
        None => vec![SpherePoint::Infinity],
    };
    let surface = MarkedSurface::new(ins, outs).map_err(|e| invalid("surface", e))?;
    let lie = Arc::new(build_lie(raw.lie)?);
    let lambdas = raw.lambdas.unwrap_or_else(|| vec![-1, 0, 1, 2]);
    let window = raw.window.unwrap_or(4);
    if !(1..=12).contains(&window) {
        return Err(invalid("window", "must be between 1 and 12"));
    }
    let tasks = match raw.tasks {
        None => Task::ALL.to_vec(),
        Some(names) => names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                Task::ALL
                    .into_iter()
                    .find(|t| t.name() == n)
                    .ok_or_else(|| invalid(format!("tasks[{i}]"), format!("unknown task {n:?}")))
            })
            .collect::<Result<_, _>>()?,
    };
    let mut cocycles = Vec::new();
    for (i, c) in raw.cocycle.into_iter().enumerate() {
        cocycles.push(build_cocycle(i, c, &lie)?);
    }
    if cocycles.is_empty() {
        cocycles = default_cocycles(&lie);
    }
    let alg = WindowAlgebra::d1g(&surface, lie.clone());
    for c in &cocycles {
        c.spec.validate(&alg).map_err(|e| invalid(format!("cocycle {}", c.name), e))?;
    }
    let (targets, h2loc_window) = match raw.h2loc {
        Some(h) => {
            let targets = h
                .targets
                .iter()
                .enumerate()
                .map(|(i, t)| parse_target(t).map_err(|e| invalid(format!("h2loc.targets[{i}]"), e)))
                .collect::<Result<Vec<_>, _>>()?;
            (targets, h.window.unwrap_or(5))
        }
        None => (Vec::new(), 5),
    };
    let targets = if targets.is_empty() {
        vec![
            Target { label: format!("{}-current", lie.name()), lie: lie.clone(), kind: TargetKind::Current },
            Target { label: format!("{}-D1", lie.name()), lie: lie.clone(), kind: TargetKind::D1 },
        ]
    } else {
        targets
    };
    let fault = match raw.fault.as_deref() {
        None => None,
        Some("gamma_v_sign") => Some(Fault::GammaVSign),
        Some(other) => return Err(invalid("fault", format!("unknown fault {other:?} (known: gamma_v_sign)"))),
    };
    Ok(RunConfig { surface, lie, lambdas, window, tasks, cocycles, targets, h2loc_window, fault })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c = parse("[surface]\nin = [\"0\", \"1\"]\n").unwrap();
        assert_eq!(c.surface.k(), 2);
        assert_eq!(c.lie.name(), "sl(2)");
        assert_eq!(c.window, 4);
        assert_eq!(c.targets.len(), 2);
    }

    #[test]
    fn rejects_floats_and_duplicates() {
        assert!(matches!(parse("[surface]\nin = [0.5]\n"), Err(ConfigError::Syntax(_))));
        assert!(matches!(parse("[surface]\nin = [\"1/2\", \"2/4\"]\n"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(parse("[surface]\nin = [\"0.5\"]\n"), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn parses_lie_algebras_and_targets() {
        assert_eq!(parse_lie("sl(2)+sl(2)").unwrap().dim(), 6);
        assert_eq!(parse_lie("gl(2)").unwrap().dim(), 4);
        assert!(parse_lie("so(3)").is_err());
        let t = parse_target("abelian(2)-current").unwrap();
        assert_eq!((t.lie.dim(), t.kind), (2, TargetKind::Current));
        assert_eq!(parse_target("D1").unwrap().kind, TargetKind::D1);
        let custom = "[surface]\nin=[0]\n[lie]\nlabels=[\"x\",\"y\",\"z\"]\nbrackets=[[\"x\",\"y\",\"z\",\"1\"]]\n";
        assert_eq!(parse(custom).unwrap().lie.dim(), 3);
        let bad = "[surface]\nin=[0]\n[lie]\nlabels=[\"x\",\"y\",\"z\"]\nbrackets=[[\"x\",\"y\",\"x\",\"1\"], [\"y\",\"z\",\"y\",\"1\"]]\n";
        assert!(parse(bad).is_err());
    }
}
