//! Run configuration: TOML on disk, exact rationals as `"p/q"` strings.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::corpus;
use crate::decomp::Interval;
use crate::error::{Error, Result};
use crate::poly::{parse_rational, rational_to_f64, CurveSpec, PolyCurve};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    corpus: Option<String>,
    dim: Option<usize>,
    coeffs: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    root: Option<f64>,
    quadrature: Option<f64>,
    comparability: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    curve: Option<RawCurve>,
    interval: Option<Vec<String>>,
    seed: Option<u64>,
    samples: Option<usize>,
    tolerances: Option<RawTolerances>,
    params: Option<toml::Table>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveSource {
    Corpus(String),
    Spec(CurveSpec),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Root-finding tolerance.
    pub root: f64,
    /// Relative tolerance of nested quadrature.
    pub quadrature: f64,
    /// Largest accepted `c_hi / c_lo` on a decomposition leaf.
    pub comparability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { root: 1e-10, quadrature: 1e-9, comparability: 1e4 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub curve: Option<CurveSource>,
    /// Endpoints as given (`"p/q"`, `"inf"`, `"-inf"`).
    pub interval: Option<[String; 2]>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerances: Tolerances,
    pub params: BTreeMap<String, toml::Value>,
}

fn parse_endpoint(s: &str, path: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => parse_rational(t).map(|q| rational_to_f64(&q)).map_err(|e| Error::config(path, e.to_string())),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let path = e
                .span()
                .map(|s| format!("line {}", text[..s.start].matches('\n').count() + 1))
                .unwrap_or_else(|| "<root>".into());
            Error::config(path, msg)
        })?;
        let mut cfg = RunConfig::default();
        if let Some(c) = raw.curve {
            cfg.curve = Some(match (c.corpus, c.dim, c.coeffs) {
                (Some(name), None, None) => CurveSource::Corpus(name),
                (None, Some(dim), Some(coeffs)) => CurveSource::Spec(CurveSpec { dim, coeffs }),
                _ => return Err(Error::config("curve", "give either `corpus` or both `dim` and `coeffs`")),
            });
        }
        if let Some(iv) = raw.interval {
            let pair: [String; 2] =
                iv.try_into().map_err(|_| Error::config("interval", "expected two endpoints [lo, hi]"))?;
            cfg.interval = Some(pair);
        }
        cfg.seed = raw.seed;
        cfg.samples = raw.samples;
        if let Some(t) = raw.tolerances {
            let d = Tolerances::default();
            cfg.tolerances = Tolerances {
                root: t.root.unwrap_or(d.root),
                quadrature: t.quadrature.unwrap_or(d.quadrature),
                comparability: t.comparability.unwrap_or(d.comparability),
            };
        }
        if let Some(p) = raw.params {
            cfg.params = p.into_iter().collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [("root", t.root), ("quadrature", t.quadrature), ("comparability", t.comparability)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("tolerances.{name}"), format!("must be positive, got {v}")));
            }
        }
        if self.samples == Some(0) {
            return Err(Error::config("samples", "must be positive"));
        }
        match &self.curve {
            Some(CurveSource::Spec(spec)) => {
                validate_spec(spec)?;
            }
            Some(CurveSource::Corpus(name)) => {
                corpus::lookup(name)?;
            }
            None => {}
        }
        self.interval()?;
        Ok(())
    }

    pub fn curve(&self) -> Result<PolyCurve> {
        match &self.curve {
            Some(CurveSource::Corpus(name)) => corpus::lookup(name),
            Some(CurveSource::Spec(spec)) => validate_spec(spec),
            None => Err(Error::config("curve", "required for this command")),
        }
    }

    pub fn curve_label(&self) -> String {
        match &self.curve {
            Some(CurveSource::Corpus(name)) => name.clone(),
            Some(CurveSource::Spec(_)) => "custom".into(),
            None => "none".into(),
        }
    }

    pub fn interval(&self) -> Result<Option<Interval>> {
        let Some([lo, hi]) = &self.interval else { return Ok(None) };
        let a = parse_endpoint(lo, "interval[0]")?;
        let b = parse_endpoint(hi, "interval[1]")?;
        if !(a < b) {
            return Err(Error::config("interval", format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Some(Interval::new(a, b)))
    }

    /// The seed, which every sampling run must set.
    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::config("seed", "required for sampling runs"))
    }

    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    /// Rejects params outside `allowed`.
    pub fn check_params(&self, allowed: &[&str]) -> Result<()> {
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::config(
                format!("params.{k}"),
                format!("unknown parameter for this command (allowed: {})", allowed.join(", ")),
            ));
        }
        Ok(())
    }

    pub fn param_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => value_f64(v).ok_or_else(|| Error::config(format!("params.{key}"), format!("expected a number, got {v}"))),
        }
    }

    pub fn param_positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.param_f64(key, default)?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::config(format!("params.{key}"), format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn param_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(v) => Err(Error::config(format!("params.{key}"), format!("expected a non-negative integer, got {v}"))),
        }
    }

    pub fn param_str(&self, key: &str, default: &str) -> Result<String> {
        match self.params.get(key) {
            None => Ok(default.to_string()),
            Some(toml::Value::String(s)) => Ok(s.clone()),
            Some(v) => Err(Error::config(format!("params.{key}"), format!("expected a string, got {v}"))),
        }
    }

    pub fn param_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    value_f64(v).ok_or_else(|| Error::config(format!("params.{key}[{i}]"), format!("expected a number, got {v}")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(v) => Err(Error::config(format!("params.{key}"), format!("expected an array, got {v}"))),
        }
    }

    /// `key = value` pairs echoed into reports, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        match &self.curve {
            Some(CurveSource::Corpus(name)) => out.push(("curve".into(), name.clone())),
            Some(CurveSource::Spec(spec)) => {
                out.push(("curve".into(), "custom".into()));
                out.push(("curve.dim".into(), spec.dim.to_string()));
                for (i, c) in spec.coeffs.iter().enumerate() {
                    out.push((format!("curve.coeffs.{i}"), c.join(",")));
                }
            }
            None => {}
        }
        if let Some([lo, hi]) = &self.interval {
            out.push(("interval".into(), format!("{lo},{hi}")));
        }
        if let Some(s) = self.seed {
            out.push(("seed".into(), s.to_string()));
        }
        if let Some(n) = self.samples {
            out.push(("samples".into(), n.to_string()));
        }
        let t = &self.tolerances;
        out.push(("tolerances.root".into(), super::schema::fmt_f64(t.root)));
        out.push(("tolerances.quadrature".into(), super::schema::fmt_f64(t.quadrature)));
        out.push(("tolerances.comparability".into(), super::schema::fmt_f64(t.comparability)));
        for (k, v) in &self.params {
            out.push((format!("params.{k}"), v.to_string()));
        }
        out
    }
}

fn value_f64(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(x) => Some(*x),
        toml::Value::Integer(i) => Some(*i as f64),
        toml::Value::String(s) => parse_endpoint(s, "").ok(),
        _ => None,
    }
}

fn validate_spec(spec: &CurveSpec) -> Result<PolyCurve> {
    if spec.coeffs.len() != spec.dim {
        return Err(Error::config("curve.coeffs", format!("dim = {} but {} coefficient lists", spec.dim, spec.coeffs.len())));
    }
    for (i, list) in spec.coeffs.iter().enumerate() {
        for (k, c) in list.iter().enumerate() {
            parse_rational(c).map_err(|e| Error::config(format!("curve.coeffs[{i}][{k}]"), e.to_string()))?;
        }
    }
    spec.to_curve().map_err(|e| Error::config("curve", e.to_string()))
}

/// Parses `value` as a TOML value, falling back to a plain string.
pub fn parse_param_value(value: &str) -> toml::Value {
    let doc = format!("v = {value}");
    toml::from_str::<toml::Table>(&doc)
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()))
}
