//! Instance files: JSON with exact-rational string scalars.
//!
//! ```json
//! {
//!   "name": "frobenius-k0",
//!   "basis": [{"label": "1", "ghost": 0}, {"label": "e", "ghost": 0}],
//!   "unit": "1",
//!   "product": [{"left": "e", "right": "e", "out": "e^2", "value": "1"}],
//!   "K": {"0": [{"in": "th", "out": "x^3", "value": "1"}]},
//!   "integral": {"dimension": 0, "maps": {"0": {"e^2": "1"}}},
//!   "truncation": {"t_order": 6, "hbar_max": 6}
//! }
//! ```
//!
//! Scalars are strings `"p/q"` or JSON integers; any float literal is rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num::Zero;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{AlgebraSpec, Functional};
use crate::error::{Error, Result};
use crate::graded::{format_scalar, parse_scalar, GradedBasis, Scalar};
use crate::instances::Instance;
use crate::linalg::Matrix;

/// A scalar that serializes as an exact-rational string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rational(pub Scalar);

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_scalar(&self.0))
    }
}

struct RationalVisitor;

impl Visitor<'_> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an exact rational string \"p/q\" or an integer")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
        parse_scalar(v).map(Rational).map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
        Ok(Rational(Scalar::from_integer(v.into())))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
        Ok(Rational(Scalar::from_integer(v.into())))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
        Err(E::custom(format!("floating-point scalar {v} rejected; write it as a \"p/q\" string")))
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(RationalVisitor)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub label: String,
    pub ghost: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub out: String,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapEntry {
    #[serde(rename = "in")]
    pub input: String,
    pub out: String,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalFile {
    pub dimension: i32,
    /// `ℏ`-power → label → value.
    pub maps: BTreeMap<String, BTreeMap<String, Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub t_order: usize,
    pub hbar_max: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub name: String,
    pub basis: Vec<BasisEntry>,
    pub unit: String,
    pub product: Vec<ProductEntry>,
    #[serde(rename = "K")]
    pub k: BTreeMap<String, Vec<MapEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<FunctionalFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral: Option<FunctionalFile>,
    pub truncation: Truncation,
}

fn hbar_index(key: &str, what: &str) -> Result<usize> {
    key.parse().map_err(|_| Error::Input(format!("{what}: hbar power {key:?} is not a non-negative integer")))
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance> {
        let basis = GradedBasis::new(self.basis.iter().map(|b| b.label.clone()).collect(), self.basis.iter().map(|b| b.ghost).collect())?;
        let d = basis.dim();
        let idx = |label: &str, what: &str| basis.index_of(label).ok_or_else(|| Error::Input(format!("{what}: unknown basis label {label:?}")));
        let unit = idx(&self.unit, "unit")?;
        let mut prod: BTreeMap<(usize, usize), Vec<(usize, Scalar)>> = BTreeMap::new();
        for p in &self.product {
            let (i, j, k) = (idx(&p.left, "product")?, idx(&p.right, "product")?, idx(&p.out, "product")?);
            let slot = prod.entry((i, j)).or_default();
            if slot.iter().any(|e| e.0 == k) {
                return Err(Error::Input(format!("product {}*{} -> {} listed twice", p.left, p.right, p.out)));
            }
            slot.push((k, p.value.0.clone()));
        }
        let levels = self.k.keys().map(|key| hbar_index(key, "K")).collect::<Result<Vec<_>>>()?;
        let top = levels.iter().copied().max().unwrap_or(0);
        let mut k = vec![Matrix::zeros(d, d); top + 1];
        for (key, entries) in &self.k {
            let l = hbar_index(key, "K")?;
            for e in entries {
                let (c, r) = (idx(&e.input, "K")?, idx(&e.out, "K")?);
                if !k[l].data[r][c].is_zero() {
                    return Err(Error::Input(format!("K^({l}) entry {} -> {} listed twice", e.input, e.out)));
                }
                k[l].data[r][c] = e.value.0.clone();
            }
        }
        let functional = |f: &FunctionalFile, what: &str| -> Result<Functional> {
            let levels = f.maps.keys().map(|key| hbar_index(key, what)).collect::<Result<Vec<_>>>()?;
            let top = levels.iter().copied().max().unwrap_or(0);
            let mut maps = vec![vec![Scalar::zero(); d]; top + 1];
            for (key, row) in &f.maps {
                let l = hbar_index(key, what)?;
                for (label, x) in row {
                    maps[l][idx(label, what)?] = x.0.clone();
                }
            }
            Ok(Functional { dimension: f.dimension, maps })
        };
        let cycle = self.cycle.as_ref().map(|f| functional(f, "cycle")).transpose()?;
        let integral = self.integral.as_ref().map(|f| functional(f, "integral")).transpose()?;
        let spec = AlgebraSpec::new(self.name.clone(), basis, unit, &prod, k, cycle, integral)?;
        Ok(Instance { spec, t_order: self.truncation.t_order, hbar_max: self.truncation.hbar_max })
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let spec = &inst.spec;
        let lab = |i: usize| spec.basis.labels[i].clone();
        let product = spec
            .product_entries()
            .into_iter()
            .flat_map(|((i, j), entries)| {
                entries.into_iter().map(move |(k, c)| ProductEntry { left: lab(i), right: lab(j), out: lab(k), value: Rational(c) })
            })
            .collect();
        let mut k = BTreeMap::new();
        for (l, m) in spec.k.iter().enumerate() {
            let mut entries = Vec::new();
            for c in 0..m.cols {
                for r in 0..m.rows {
                    if !m.data[r][c].is_zero() {
                        entries.push(MapEntry { input: lab(c), out: lab(r), value: Rational(m.data[r][c].clone()) });
                    }
                }
            }
            if l == 0 || !entries.is_empty() {
                k.insert(l.to_string(), entries);
            }
        }
        let functional = |f: &Functional| FunctionalFile {
            dimension: f.dimension,
            maps: f
                .maps
                .iter()
                .enumerate()
                .filter(|(l, row)| *l == 0 || row.iter().any(|x| !x.is_zero()))
                .map(|(l, row)| {
                    let entries = row.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (lab(i), Rational(x.clone()))).collect();
                    (l.to_string(), entries)
                })
                .collect(),
        };
        InstanceFile {
            name: spec.name.clone(),
            basis: spec.basis.labels.iter().zip(&spec.basis.ghosts).map(|(l, &g)| BasisEntry { label: l.clone(), ghost: g }).collect(),
            unit: lab(spec.unit),
            product,
            k,
            cycle: spec.cycle.as_ref().map(functional),
            integral: spec.integral.as_ref().map(functional),
            truncation: Truncation { t_order: inst.t_order, hbar_max: inst.hbar_max },
        }
    }
}

/// Parses an instance from JSON text. Errors carry line and column.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Input(format!("line {} column {}: {e}", e.line(), e.column())))?;
    file.to_instance()
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_instance(&text)
}

/// Pretty JSON with a trailing newline; field and key order are deterministic.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes");
    s.push('\n');
    s
}

/// Sparse-entry equality of two instances.
pub fn same_instance(a: &Instance, b: &Instance) -> bool {
    InstanceFile::from_instance(a) == InstanceFile::from_instance(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{builtin, BUILTIN_NAMES};

    #[test]
    fn builtins_round_trip() {
        for name in BUILTIN_NAMES {
            let inst = builtin(name).unwrap();
            let text = serialize_instance(&inst);
            let back = parse_instance(&text).unwrap();
            assert!(same_instance(&inst, &back), "{name}");
            assert_eq!(serialize_instance(&back), text);
        }
    }

    #[test]
    fn floats_are_rejected_with_position() {
        let inst = builtin("point-unital").unwrap();
        let text = serialize_instance(&inst).replace("\"value\": \"1\"", "\"value\": 1.0");
        let err = parse_instance(&text).unwrap_err().to_string();
        assert!(err.contains("floating-point") && err.contains("line"), "{err}");
        let text = serialize_instance(&inst).replace("\"value\": \"1\"", "\"value\": \"0.5\"");
        assert!(parse_instance(&text).is_err());
    }

    #[test]
    fn integers_are_accepted() {
        let inst = builtin("point-unital").unwrap();
        let text = serialize_instance(&inst).replace("\"value\": \"1\"", "\"value\": 1");
        assert!(same_instance(&parse_instance(&text).unwrap(), &inst));
    }

    #[test]
    fn unknown_labels_are_rejected() {
        let inst = builtin("point-unital").unwrap();
        let text = serialize_instance(&inst).replace("\"unit\": \"1\"", "\"unit\": \"nope\"");
        assert!(parse_instance(&text).unwrap_err().to_string().contains("unknown basis label"));
    }
}
