//! Run configuration: JSON text in, validated [`RunConfig`] out.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::exactq::BigRational;
use crate::numkernel::CMat;
use crate::operator::{fixture, jacobi_from_moments, BlockJacobi, Explicit, MomentSequence};

use super::CliError;

pub const DEFAULT_N_MAX: usize = 200;
pub const DEFAULT_PRECISION_BITS: u32 = 53;
pub const DEFAULT_SECTION_N: usize = 40;
pub const DEFAULT_ALPHA_DEPTH: usize = 60;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Fixture { name: String, param: Option<f64> },
    /// Scalar coefficients as exact rationals (`b_j`, not squared).
    Scalars { a: Vec<BigRational>, b: Vec<BigRational> },
    /// Real `p×p` blocks, row major.
    Blocks { a: Vec<Vec<Vec<f64>>>, b: Vec<Vec<Vec<f64>>> },
    Moments(Vec<BigRational>),
}

/// One requested extension, resolved against `α` at run time.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionConfig {
    Friedrichs,
    Krein,
    /// `h`; `-inf` selects the Krein extension.
    H(#[serde(serialize_with = "serialize_h")] f64),
    /// `h = α + offset`.
    AlphaOffset(f64),
    Pair { c: Vec<Vec<f64>>, d: Vec<Vec<f64>> },
}

fn serialize_h<S: serde::Serializer>(h: &f64, s: S) -> Result<S::Ok, S::Error> {
    match h.is_finite() {
        true => s.serialize_f64(*h),
        false => s.serialize_str(&super::fmt_g17(*h)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub probe: f64,
    pub weyl: f64,
    pub alpha: f64,
    /// Defaults to `1e-6` for `p = 1` and `1e-5` otherwise.
    pub limit: Option<f64>,
    pub zero: f64,
    pub order: f64,
    pub green: f64,
    pub kernel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            probe: crate::polys::PROBE_TOL,
            weyl: crate::numkernel::DEFAULT_TOL,
            alpha: crate::polys::ALPHA_ACCURACY,
            limit: None,
            zero: crate::numkernel::DEFAULT_ZERO_TOL,
            order: crate::sections::ORDER_TOL,
            green: 1e-8,
            kernel: crate::triplet::STRUCT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub p: usize,
    pub source: Source,
    #[serde(rename = "N_max")]
    pub n_max: usize,
    pub precision_bits: u32,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Real evaluation points of `M`.
    pub grid: Vec<f64>,
    /// Extra complex evaluation points `[re, im]`.
    pub points: Vec<[f64; 2]>,
    /// Decreasing grid toward `-∞` for `M(-∞)`.
    pub limit_grid: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Grid toward `0⁻` for `‖(M(x) + γ)⁻¹‖`.
    pub zero_grid: Vec<f64>,
    pub extensions: Vec<ExtensionConfig>,
    /// Section size.
    #[serde(rename = "N")]
    pub n: usize,
    pub h_list: Vec<ExtensionConfig>,
    pub alpha_depth: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    p: Option<Value>,
    source: Option<RawSource>,
    #[serde(rename = "N_max")]
    n_max: Option<Value>,
    precision_bits: Option<Value>,
    tolerances: Option<Tolerances>,
    seed: Option<u64>,
    grid: Option<Vec<f64>>,
    points: Option<Vec<[f64; 2]>>,
    limit_grid: Option<Vec<f64>>,
    gammas: Option<Vec<f64>>,
    zero_grid: Option<Vec<f64>>,
    extension: Option<Value>,
    extensions: Option<Vec<Value>>,
    #[serde(rename = "N")]
    n: Option<Value>,
    h_list: Option<Vec<Value>>,
    alpha_depth: Option<Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    fixture: Option<String>,
    param: Option<f64>,
    a: Option<Vec<Value>>,
    b: Option<Vec<Value>>,
    moments: Option<Vec<Value>>,
}

fn invalid(field: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Validation { field: field.into(), msg: msg.into() }
}

fn count(v: Option<&Value>, field: &str, default: usize, min: usize) -> Result<usize, CliError> {
    let Some(v) = v else { return Ok(default) };
    match v.as_u64() {
        Some(n) if n as usize >= min => Ok(n as usize),
        _ => Err(invalid(field, format!("expected an integer ≥ {min}, got {v}"))),
    }
}

fn rational(v: &Value, field: &str) -> Result<BigRational, CliError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(invalid(field, format!("expected a number or \"n/d\" string, got {other}"))),
    };
    text.parse().map_err(|e| invalid(field, format!("{e}")))
}

fn real_matrix(v: &Value, p: usize, field: &str) -> Result<Vec<Vec<f64>>, CliError> {
    if p == 1 {
        if let Some(x) = v.as_f64() {
            return Ok(vec![vec![x]]);
        }
    }
    let rows: Vec<Vec<f64>> =
        serde_json::from_value(v.clone()).map_err(|_| invalid(field, format!("expected a real {p}x{p} matrix")))?;
    if rows.len() != p || rows.iter().any(|r| r.len() != p) {
        return Err(invalid(field, format!("expected a real {p}x{p} matrix")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(invalid(field, "entries must be finite"));
    }
    Ok(rows)
}

fn h_value(v: &Value, field: &str) -> Result<f64, CliError> {
    match v {
        Value::String(s) if matches!(s.trim(), "-inf" | "-infinity" | "-Infinity") => Ok(f64::NEG_INFINITY),
        Value::Number(n) => n.as_f64().ok_or_else(|| invalid(field, "h must be a real number")),
        other => Err(invalid(field, format!("h must be a number or \"-inf\", got {other}"))),
    }
}

fn extension(v: &Value, p: usize, field: &str) -> Result<ExtensionConfig, CliError> {
    if let Value::String(s) = v {
        return match s.to_ascii_lowercase().as_str() {
            "friedrichs" => Ok(ExtensionConfig::Friedrichs),
            "krein" => Ok(ExtensionConfig::Krein),
            _ => Err(invalid(field, format!("unknown extension {s:?}"))),
        };
    }
    let obj = v.as_object().filter(|o| o.len() == 1).ok_or_else(|| {
        invalid(field, "expected \"friedrichs\", \"krein\", {\"h\": …}, {\"alpha_offset\": …} or {\"pair\": {\"c\": …, \"d\": …}}")
    })?;
    let (key, val) = obj.iter().next().expect("one entry");
    let field = format!("{field}.{key}");
    match key.as_str() {
        "h" => Ok(ExtensionConfig::H(h_value(val, &field)?)),
        "alpha_offset" => match val.as_f64() {
            Some(x) if x.is_finite() => Ok(ExtensionConfig::AlphaOffset(x)),
            _ => Err(invalid(field, "expected a finite number")),
        },
        "pair" => {
            let c = val.get("c").ok_or_else(|| invalid(format!("{field}.c"), "missing"))?;
            let d = val.get("d").ok_or_else(|| invalid(format!("{field}.d"), "missing"))?;
            if val.as_object().map(|o| o.len()) != Some(2) {
                return Err(invalid(field, "pair takes exactly the keys c and d"));
            }
            Ok(ExtensionConfig::Pair { c: real_matrix(c, p, &format!("{field}.c"))?, d: real_matrix(d, p, &format!("{field}.d"))? })
        }
        _ => Err(invalid(field, "unknown extension kind")),
    }
}

fn signed_grid(v: Vec<f64>, field: &str, negative: bool) -> Result<Vec<f64>, CliError> {
    if v.iter().any(|x| !x.is_finite() || (negative && *x >= 0.0) || (!negative && *x <= 0.0)) {
        let want = if negative { "negative" } else { "positive" };
        return Err(invalid(field, format!("all values must be finite and {want}")));
    }
    Ok(v)
}

/// Parses and validates a configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| CliError::Parse { line: e.line(), column: e.column(), msg: e.to_string() })?;
    let p = match &raw.p {
        None => return Err(invalid("p", "missing")),
        Some(v) => match v.as_u64() {
            Some(p) if (1..=64).contains(&p) => p as usize,
            _ => return Err(invalid("p", format!("expected an integer in 1..=64, got {v}"))),
        },
    };
    let source = match raw.source {
        None => return Err(invalid("source", "missing")),
        Some(s) => parse_source(s, p)?,
    };
    let n_max = count(raw.n_max.as_ref(), "N_max", DEFAULT_N_MAX, 20)?;
    let precision_bits = match raw.precision_bits.as_ref().map(|v| v.as_u64()) {
        None => DEFAULT_PRECISION_BITS,
        Some(Some(b @ (53 | 128 | 256))) => b as u32,
        Some(_) => return Err(invalid("precision_bits", "supported values are 53, 128 and 256")),
    };
    let tolerances = raw.tolerances.unwrap_or_default();
    for (name, t) in [
        ("probe", tolerances.probe),
        ("weyl", tolerances.weyl),
        ("alpha", tolerances.alpha),
        ("limit", tolerances.limit.unwrap_or(1.0)),
        ("zero", tolerances.zero),
        ("order", tolerances.order),
        ("green", tolerances.green),
        ("kernel", tolerances.kernel),
    ] {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("tolerances.{name}"), format!("must be positive, got {t}")));
        }
    }
    let pow10 = |ks: std::ops::RangeInclusive<i32>| ks.map(|k| -(10f64.powi(k))).collect::<Vec<f64>>();
    let grid = signed_grid(raw.grid.unwrap_or_else(|| pow10(0..=6)), "grid", true)?;
    let points = raw.points.unwrap_or_default();
    if points.iter().any(|z| !(z[0].is_finite() && z[1].is_finite()) || (z[1] == 0.0 && z[0] >= 0.0)) {
        return Err(invalid("points", "complex points need im ≠ 0 or a negative real part"));
    }
    let limit_grid = raw.limit_grid.unwrap_or_else(|| if p == 1 { pow10(1..=6) } else { pow10(2..=9) });
    let limit_grid = signed_grid(limit_grid, "limit_grid", true)?;
    if limit_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("limit_grid", "must be strictly decreasing"));
    }
    let gammas = signed_grid(raw.gammas.unwrap_or_else(|| vec![1.0, 10.0]), "gammas", false)?;
    let zero_grid = signed_grid(raw.zero_grid.unwrap_or_else(|| (1..=5).map(|k| -(10f64.powi(-k))).collect()), "zero_grid", true)?;
    let mut extensions = Vec::new();
    if let Some(v) = &raw.extension {
        extensions.push(extension(v, p, "extension")?);
    }
    for (i, v) in raw.extensions.iter().flatten().enumerate() {
        extensions.push(extension(v, p, &format!("extensions[{i}]"))?);
    }
    let h_list = raw
        .h_list
        .iter()
        .flatten()
        .enumerate()
        .map(|(i, v)| {
            let field = format!("h_list[{i}]");
            match v {
                Value::Number(_) => Ok(ExtensionConfig::H(h_value(v, &field)?)),
                Value::String(s) if s.starts_with('-') => Ok(ExtensionConfig::H(h_value(v, &field)?)),
                _ => match extension(v, p, &field)? {
                    ExtensionConfig::Pair { .. } => Err(invalid(field, "pairs are not values of h")),
                    e => Ok(e),
                },
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = count(raw.n.as_ref(), "N", DEFAULT_SECTION_N, 1)?;
    let alpha_depth = count(raw.alpha_depth.as_ref(), "alpha_depth", DEFAULT_ALPHA_DEPTH, crate::polys::WINDOW + 1)?;
    let cfg = RunConfig {
        p,
        source,
        n_max,
        precision_bits,
        tolerances,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        grid,
        points,
        limit_grid,
        gammas,
        zero_grid,
        extensions,
        n,
        h_list,
        alpha_depth,
    };
    let op = cfg.operator()?;
    if op.p() != p {
        return Err(invalid("p", format!("source has p = {}, config says {p}", op.p())));
    }
    Ok(cfg)
}

fn parse_source(s: RawSource, p: usize) -> Result<Source, CliError> {
    let kinds = [s.fixture.is_some(), s.a.is_some() || s.b.is_some(), s.moments.is_some()];
    if kinds.iter().filter(|&&k| k).count() != 1 {
        return Err(invalid("source", "give exactly one of fixture, a/b coefficient lists, or moments"));
    }
    if s.param.is_some() && s.fixture.is_none() {
        return Err(invalid("source.param", "only fixtures take a parameter"));
    }
    if let Some(name) = s.fixture {
        return Ok(Source::Fixture { name, param: s.param });
    }
    if let Some(m) = s.moments {
        if p != 1 {
            return Err(invalid("p", "moment sources are scalar"));
        }
        let m = m.iter().enumerate().map(|(i, v)| rational(v, &format!("source.moments[{i}]"))).collect::<Result<_, _>>()?;
        return Ok(Source::Moments(m));
    }
    let (a, b) = match (s.a, s.b) {
        (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => (a, b),
        _ => return Err(invalid("source", "coefficient sources need nonempty a and b")),
    };
    if p == 1 {
        let a = a.iter().enumerate().map(|(i, v)| rational(v, &format!("source.a[{i}]"))).collect::<Result<_, _>>()?;
        let b = b.iter().enumerate().map(|(i, v)| rational(v, &format!("source.b[{i}]"))).collect::<Result<_, _>>()?;
        return Ok(Source::Scalars { a, b });
    }
    let a = a.iter().enumerate().map(|(i, v)| real_matrix(v, p, &format!("source.a[{i}]"))).collect::<Result<_, _>>()?;
    let b = b.iter().enumerate().map(|(i, v)| real_matrix(v, p, &format!("source.b[{i}]"))).collect::<Result<_, _>>()?;
    Ok(Source::Blocks { a, b })
}

impl RunConfig {
    /// Builds the operator described by `source`.
    pub fn operator(&self) -> Result<BlockJacobi, CliError> {
        let op = match &self.source {
            Source::Fixture { name, param } => fixture(name, *param).map_err(|e| invalid("source.fixture", e.to_string()))?,
            Source::Scalars { a, b } => {
                let e = Explicit::from_rationals(a.clone(), b.clone()).map_err(|e| invalid("source", e.to_string()))?;
                BlockJacobi::new(std::sync::Arc::new(e), "explicit")
            }
            Source::Blocks { a, b } => {
                let e = Explicit::from_blocks(a.iter().map(|m| CMat::from_real_rows(m)).collect(), b.iter().map(|m| CMat::from_real_rows(m)).collect())
                    .map_err(|e| invalid("source", e.to_string()))?;
                BlockJacobi::new(std::sync::Arc::new(e), "explicit")
            }
            Source::Moments(m) => {
                let seq = MomentSequence::new(m.clone()).map_err(|e| invalid("source.moments", e.to_string()))?;
                jacobi_from_moments(&seq).map_err(|e| invalid("source.moments", e.to_string()))?
            }
        };
        Ok(op)
    }

    /// Echo of the validated configuration, defaults included.
    pub fn echo(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}
