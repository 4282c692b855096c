//! Structured input files. Rationals travel as strings ("3", "-5/2") so
//! values round-trip exactly; binary floats never appear.

use num::BigRational;
use qdc::bbf::{Class, ConeSpec, H2Lattice};
use qdc::koszul::DivisorConfig;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for InputError {}

pub fn parse_rat(s: &str) -> Result<BigRational, InputError> {
    BigRational::from_str(s.trim())
        .map_err(|e| InputError(format!("cannot parse rational {:?}: {}", s, e)))
}

pub fn parse_class(items: &[String]) -> Result<Class, InputError> {
    items.iter().map(|s| parse_rat(s)).collect()
}

/// Comma-separated rational vector, e.g. "1,-1/2,3".
pub fn parse_class_arg(arg: &str) -> Result<Class, InputError> {
    arg.split(',')
        .map(|s| parse_rat(s))
        .collect::<Result<_, _>>()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeFile {
    pub rank: usize,
    /// row-major rational strings, rank·rank entries.
    pub gram: Vec<String>,
    pub generators: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl LatticeFile {
    pub fn build(&self) -> Result<(H2Lattice, ConeSpec), InputError> {
        if self.gram.len() != self.rank * self.rank {
            return Err(InputError(format!(
                "gram has {} entries, expected {}",
                self.gram.len(),
                self.rank * self.rank
            )));
        }
        let rows: Vec<Vec<BigRational>> = (0..self.rank)
            .map(|i| {
                (0..self.rank)
                    .map(|j| parse_rat(&self.gram[i * self.rank + j]))
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        let lattice = H2Lattice::new(rows).map_err(|e| InputError(e.to_string()))?;
        let gens: Vec<Class> = self
            .generators
            .iter()
            .map(|g| parse_class(g))
            .collect::<Result<_, _>>()?;
        let cone = ConeSpec::new(&lattice, gens).map_err(|e| InputError(e.to_string()))?;
        Ok((lattice, cone))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyFile {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub lambdas: Option<Vec<String>>,
    #[serde(default)]
    pub checks: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KoszulFile {
    pub lattice: LatticeFile,
    pub nef_class: Vec<String>,
    pub ample_classes: Vec<Vec<String>>,
    pub n: usize,
    #[serde(rename = "N")]
    pub power: i64,
}

impl KoszulFile {
    pub fn build(&self) -> Result<DivisorConfig, InputError> {
        let (lattice, cone) = self.lattice.build()?;
        let nef = parse_class(&self.nef_class)?;
        let amples: Vec<Class> = self
            .ample_classes
            .iter()
            .map(|h| parse_class(h))
            .collect::<Result<_, _>>()?;
        DivisorConfig::new(lattice, cone, nef, amples, self.n, self.power)
            .map_err(|e| InputError(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TripleFile {
    /// dense rational rows of the three square matrices.
    pub h: Vec<Vec<String>>,
    pub f: Vec<Vec<String>>,
    pub g: Vec<Vec<String>>,
}

impl TripleFile {
    pub fn build(&self) -> Result<qdc::Sl2Action, InputError> {
        let to_mat = |rows: &Vec<Vec<String>>| -> Result<qdc::SparseMat, InputError> {
            let parsed: Vec<Vec<qdc::GaussRat>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|s| parse_rat(s).map(qdc::GaussRat::from_rat))
                        .collect::<Result<_, _>>()
                })
                .collect::<Result<_, _>>()?;
            Ok(qdc::SparseMat::from_rows(parsed))
        };
        qdc::Sl2Action::new(to_mat(&self.h)?, to_mat(&self.f)?, to_mat(&self.g)?)
            .map_err(|e| InputError(e.to_string()))
    }
}

pub fn read_json<T: for<'a> Deserialize<'a>>(path: &str) -> Result<T, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {}", path, e)))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("invalid json in {}: {}", path, e)))
}
