//! JSON map specifications and `builtin:` identifiers.
//!
//! ```json
//! {
//!   "n": 2,
//!   "h": {"kind": "polynomial", "coefficients": {"1,0": [[1, 0], [0, 0]], "0,1": [[0, 0], [1, 0]]}},
//!   "g": {"kind": "closed_form", "family": "power_ratio",
//!         "params": {"scale": [0.5, 0], "rotation": [1, 0], "exponent": 2}}
//! }
//! ```
//!
//! A document of the form `{"builtin": "builtin:upper_thm2?alpha=2&k=0.5"}` is
//! also accepted.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{build_extremal, ExtremalFamily, ExtremalSpec};
use crate::mapping::{ClosedFormModel, HolomorphicModel, MapModel, MultiIndex, PolynomialModel};

pub const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerRatioParams {
    pub scale: [f64; 2],
    pub rotation: [f64; 2],
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartSpec {
    Polynomial {
        coefficients: BTreeMap<String, Vec<[f64; 2]>>,
    },
    ClosedForm {
        family: String,
        params: PowerRatioParams,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub n: usize,
    pub h: PartSpec,
    pub g: PartSpec,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Document {
    Builtin {
        builtin: String,
    },
    Spec(MapSpec),
}

fn complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

pub fn parse_multi_index(key: &str) -> Result<MultiIndex> {
    let exps: std::result::Result<Vec<u32>, _> = key.split(',').map(|s| s.trim().parse::<u32>()).collect();
    exps.map(MultiIndex::new)
        .map_err(|_| Error::BadSpec(format!("multi-index key '{key}' is not a comma-separated list of integers")))
}

impl PartSpec {
    fn to_model(&self, n: usize) -> Result<HolomorphicModel> {
        match self {
            PartSpec::Polynomial { coefficients } => {
                let mut terms = BTreeMap::new();
                for (key, coeff) in coefficients {
                    let beta = parse_multi_index(key)?;
                    if terms.insert(beta, coeff.iter().copied().map(complex).collect()).is_some() {
                        return Err(Error::BadSpec(format!("duplicate multi-index '{key}'")));
                    }
                }
                Ok(HolomorphicModel::Polynomial(PolynomialModel::new(n, terms)?))
            }
            PartSpec::ClosedForm { family, params } => {
                if family != "power_ratio" {
                    return Err(Error::BadSpec(format!("unknown closed-form family '{family}'")));
                }
                if n != 1 {
                    return Err(Error::BadSpec("closed-form parts require n = 1".into()));
                }
                Ok(HolomorphicModel::ClosedForm(ClosedFormModel::power_ratio(
                    complex(params.scale),
                    complex(params.rotation),
                    params.exponent,
                )?))
            }
        }
    }

    fn from_model(h: &HolomorphicModel) -> Self {
        match h {
            HolomorphicModel::Polynomial(p) => PartSpec::Polynomial {
                coefficients: p
                    .terms()
                    .iter()
                    .map(|(beta, c)| (beta.to_string(), c.iter().copied().map(pair).collect()))
                    .collect(),
            },
            HolomorphicModel::ClosedForm(c) => {
                let ClosedFormModel::PowerRatio {
                    scale,
                    rotation,
                    exponent,
                } = *c;
                PartSpec::ClosedForm {
                    family: c.family_id().to_string(),
                    params: PowerRatioParams {
                        scale: pair(scale),
                        rotation: pair(rotation),
                        exponent,
                    },
                }
            }
        }
    }
}

impl MapSpec {
    pub fn to_model(&self, provenance: impl Into<String>) -> Result<MapModel> {
        let h = self.h.to_model(self.n)?;
        let g = self.g.to_model(self.n)?;
        MapModel::new(h, g, provenance)
    }

    pub fn from_model(map: &MapModel) -> Self {
        Self {
            n: map.dim(),
            h: PartSpec::from_model(map.h()),
            g: PartSpec::from_model(map.g()),
        }
    }
}

/// Parses a JSON map document.
pub fn parse_map_document(text: &str, provenance: &str) -> Result<MapModel> {
    let doc: Document =
        serde_json::from_str(text).map_err(|e| Error::BadSpec(format!("malformed JSON: {e}")))?;
    match doc {
        Document::Builtin { builtin } => parse_builtin(&builtin),
        Document::Spec(spec) => spec.to_model(provenance),
    }
}

fn query_params(query: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in query.split('&').filter(|s| !s.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::BadSpec(format!("builtin parameter '{part}' is not key=value")))?;
        let v: f64 = value
            .parse()
            .map_err(|_| Error::BadSpec(format!("builtin parameter {key}='{value}' is not a number")))?;
        if out.insert(key.to_string(), v).is_some() {
            return Err(Error::BadSpec(format!("builtin parameter '{key}' given twice")));
        }
    }
    Ok(out)
}

struct Params {
    values: BTreeMap<String, f64>,
}

impl Params {
    fn take(&mut self, key: &str, default: f64) -> f64 {
        self.values.remove(key).unwrap_or(default)
    }

    fn finish(self, id: &str) -> Result<()> {
        match self.values.keys().next() {
            Some(k) => Err(Error::BadSpec(format!("unknown parameter '{k}' for builtin '{id}'"))),
            None => Ok(()),
        }
    }
}

/// Parses `builtin:<family>?<key>=<value>&...`. The prefix is optional.
pub fn parse_builtin(id: &str) -> Result<MapModel> {
    let body = id.strip_prefix(BUILTIN_PREFIX).unwrap_or(id);
    let (name, query) = body.split_once('?').unwrap_or((body, ""));
    let mut params = Params {
        values: query_params(query)?,
    };
    let map = match name {
        "identity" => {
            let n = params.take("n", 1.0);
            if !(n >= 1.0 && n.fract() == 0.0 && n <= 64.0) {
                return Err(Error::BadSpec(format!("identity dimension must be a positive integer, got {n}")));
            }
            MapModel::identity(n as usize)
        }
        "affine" => {
            let c = params.take("c", 0.0);
            if !c.is_finite() {
                return Err(Error::BadSpec("affine coefficient must be finite".into()));
            }
            MapModel::affine(c)
        }
        other => {
            let family: ExtremalFamily = other
                .parse()
                .map_err(|_| Error::BadSpec(format!("unknown builtin '{other}'")))?;
            let alpha = params.take("alpha", 1.0);
            let k = params.take("k", 0.0);
            let mut spec = ExtremalSpec::new(family, alpha, k);
            match family {
                ExtremalFamily::UpperThm2 | ExtremalFamily::LowerThm2 => spec = spec.with_t(params.take("t", 0.0)),
                ExtremalFamily::CoveringThm4 | ExtremalFamily::CoveringThm4Literal => {
                    let sign = params.take("sign", 1.0);
                    if sign != 1.0 && sign != -1.0 {
                        return Err(Error::BadSpec(format!("sign must be 1 or -1, got {sign}")));
                    }
                    spec = spec.with_sign(sign as i8);
                }
                ExtremalFamily::Pommerenke => {}
            }
            build_extremal(&spec)?
        }
    };
    params.finish(name)?;
    Ok(map.with_provenance(if id.starts_with(BUILTIN_PREFIX) {
        id.to_string()
    } else {
        format!("{BUILTIN_PREFIX}{id}")
    }))
}

/// Loads a map from a `builtin:` identifier or a JSON file path.
pub fn load_map(source: &str) -> Result<MapModel> {
    if source.starts_with(BUILTIN_PREFIX) {
        return parse_builtin(source);
    }
    let text = std::fs::read_to_string(Path::new(source))
        .map_err(|e| Error::BadSpec(format!("cannot read map specification '{source}': {e}")))?;
    parse_map_document(&text, source)
}
