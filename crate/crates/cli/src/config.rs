//! Run configuration: defaults, JSON file, dotted overrides and named flags,
//! merged in that order and validated before anything is computed.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use vortexcert::lattice::{Axis, Boundary};
use vortexcert::pipeline::{LatticeSpec, Tolerances, CHECKS};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub lx: usize,
    pub ly: usize,
    pub boundary: Boundary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneConfig {
    pub axis: Option<Axis>,
    pub coordinate: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Value(f64),
    List(Vec<f64>),
    Range(SweepRange),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub rp: f64,
    pub topo: f64,
    pub pos: f64,
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub plane: PlaneConfig,
    pub lambda: Grid,
    pub beta: Grid,
    pub seed: u64,
    pub tolerances: ToleranceConfig,
    pub samples: usize,
    pub max_degree: usize,
    pub output: OutputConfig,
    pub expect_fail: Vec<String>,
    pub cache_dir: Option<PathBuf>,
}

pub fn defaults() -> Value {
    json!({
        "lattice": { "lx": 3, "ly": 3, "boundary": "open" },
        "plane": { "axis": null, "coordinate": null },
        "lambda": 0.1,
        "beta": 1.0,
        "seed": 0,
        "tolerances": { "rp": 1e-9, "topo": 1e-8, "pos": 1e-8, "gap": null },
        "samples": 100,
        "max_degree": 4,
        "output": { "path": null, "format": "json" },
        "expect_fail": [],
        "cache_dir": null,
    })
}

/// Recursively overlays `top` onto `base`; non-object values replace.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, t) => *b = t,
    }
}

/// Sets `path` (dot separated) to `value`, creating objects on the way.
pub fn set_dotted(root: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("malformed option name '{path}'"));
    }
    for part in &parts[..parts.len() - 1] {
        if !cur.is_object() {
            *cur = Value::Object(Map::new());
        }
        cur = cur
            .as_object_mut()
            .expect("object")
            .entry(part.to_string())
            .or_insert(Value::Null);
    }
    if !cur.is_object() {
        *cur = Value::Object(Map::new());
    }
    cur.as_object_mut()
        .expect("object")
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// A flag value as JSON when it parses, otherwise as a string.
pub fn scalar(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// `0.1`, `0,0.1,0.2` or `from:to:steps`.
pub fn grid_value(raw: &str) -> Result<Value, String> {
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("'{s}' is not a number"));
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range '{raw}' must be from:to:steps"));
        }
        let steps: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("'{}' is not a step count", parts[2]))?;
        return Ok(json!({ "from": parse(parts[0])?, "to": parse(parts[1])?, "steps": steps }));
    }
    if raw.contains(',') {
        let values = raw
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse)
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(json!(values));
    }
    if raw.trim().is_empty() {
        return Ok(json!([]));
    }
    Ok(json!(parse(raw)?))
}

fn round12(x: f64) -> f64 {
    format!("{x:.12}").parse().expect("formatted float parses")
}

impl Grid {
    pub fn values(&self, field: &str) -> Result<Vec<f64>, String> {
        let v = match self {
            Grid::Value(x) => vec![*x],
            Grid::List(xs) => xs.clone(),
            Grid::Range(r) => match r.steps {
                0 => Vec::new(),
                1 => vec![r.from],
                n => (0..n)
                    .map(|i| round12(r.from + (r.to - r.from) * i as f64 / (n - 1) as f64))
                    .collect(),
            },
        };
        if v.is_empty() {
            return Err(format!("{field}: empty sweep range"));
        }
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(format!("{field}: {bad} is not finite"));
        }
        Ok(v)
    }

    pub fn single(&self, field: &str) -> Result<f64, String> {
        let v = self.values(field)?;
        match v.as_slice() {
            [x] => Ok(*x),
            _ => Err(format!("{field}: expected a single value, got {}", v.len())),
        }
    }
}

impl RunConfig {
    pub fn from_value(v: Value) -> Result<Self, String> {
        let cfg: RunConfig = serde_path_to_error::deserialize(v).map_err(|e| {
            let path = e.path().to_string();
            format!("{path}: {}", e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.rp", t.rp),
            ("tolerances.topo", t.topo),
            ("tolerances.pos", t.pos),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name}: must be a non-negative number, got {v}"));
            }
        }
        if let Some(g) = t.gap {
            if !(g.is_finite() && g > 0.0) {
                return Err(format!("tolerances.gap: must be positive, got {g}"));
            }
        }
        for b in self.beta.values("beta")? {
            if b < 0.0 {
                return Err(format!("beta: must be non-negative, got {b}"));
            }
        }
        self.lambda.values("lambda")?;
        for e in &self.expect_fail {
            if !CHECKS.contains(&e.as_str()) {
                return Err(format!(
                    "expect_fail: unknown check '{e}' (known: {})",
                    CHECKS.join(", ")
                ));
            }
        }
        Ok(())
    }

    pub fn lattice_spec(&self) -> LatticeSpec {
        LatticeSpec {
            lx: self.lattice.lx,
            ly: self.lattice.ly,
            boundary: self.lattice.boundary,
            plane_axis: self.plane.axis,
            plane_coord: self.plane.coordinate,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rp: self.tolerances.rp,
            topo: self.tolerances.topo,
            pos: self.tolerances.pos,
            gap: self.tolerances.gap,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_deserialize() {
        let c = RunConfig::from_value(defaults()).unwrap();
        assert_eq!(c.lattice.lx, 3);
        assert_eq!(c.lambda.single("lambda").unwrap(), 0.1);
    }

    #[test]
    fn dotted_override_and_merge() {
        let mut v = defaults();
        merge(&mut v, json!({ "lattice": { "lx": 5 } }));
        set_dotted(&mut v, "lattice.ly", json!(5)).unwrap();
        let c = RunConfig::from_value(v).unwrap();
        assert_eq!((c.lattice.lx, c.lattice.ly), (5, 5));
        assert_eq!(c.lattice.boundary, Boundary::Open);
    }

    #[test]
    fn field_precise_errors() {
        let mut v = defaults();
        set_dotted(&mut v, "lattice.lx", json!("three")).unwrap();
        assert!(RunConfig::from_value(v).unwrap_err().starts_with("lattice.lx"));
        let mut v = defaults();
        set_dotted(&mut v, "lattice.colour", json!(1)).unwrap();
        assert!(RunConfig::from_value(v).unwrap_err().contains("colour"));
        let mut v = defaults();
        set_dotted(&mut v, "tolerances.rp", json!(-1.0)).unwrap();
        assert!(RunConfig::from_value(v).unwrap_err().starts_with("tolerances.rp"));
    }

    #[test]
    fn grids() {
        let g: Grid = serde_json::from_value(grid_value("0:0.5:11").unwrap()).unwrap();
        let v = g.values("lambda").unwrap();
        assert_eq!(v.len(), 11);
        assert_eq!(v[3], 0.15);
        assert_eq!(v[10], 0.5);
        let g: Grid = serde_json::from_value(grid_value("0:1:0").unwrap()).unwrap();
        assert!(g.values("lambda").unwrap_err().contains("empty"));
        let g: Grid = serde_json::from_value(grid_value("0.5,1,5").unwrap()).unwrap();
        assert_eq!(g.values("beta").unwrap(), [0.5, 1.0, 5.0]);
        assert!(g.single("beta").is_err());
    }
}
