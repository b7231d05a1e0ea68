//! Sellmeier coefficient tables and their analytic wavelength derivatives.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient file shipped with the crate.
pub const BUILTIN_DATA: &str = include_str!("../data/sellmeier.txt");

/// File name looked up inside a data directory override.
pub const DATA_FILE_NAME: &str = "sellmeier.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Material {
    Bbo,
    Kdp,
}

impl Material {
    pub fn name(self) -> &'static str {
        match self {
            Material::Bbo => "BBO",
            Material::Kdp => "KDP",
        }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Material {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BBO" => Ok(Material::Bbo),
            "KDP" => Ok(Material::Kdp),
            other => Err(format!("unknown material `{other}` (expected BBO or KDP)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

impl Polarization {
    pub fn name(self) -> &'static str {
        match self {
            Polarization::Ordinary => "ordinary",
            Polarization::Extraordinary => "extraordinary",
        }
    }

    pub fn other(self) -> Self {
        match self {
            Polarization::Ordinary => Polarization::Extraordinary,
            Polarization::Extraordinary => Polarization::Ordinary,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Polarization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "o" | "ordinary" => Ok(Polarization::Ordinary),
            "e" | "extraordinary" => Ok(Polarization::Extraordinary),
            other => Err(format!(
                "unknown polarization `{other}` (expected ordinary or extraordinary)"
            )),
        }
    }
}

/// One principal index, `n^2 = A + B/(l^2 - C) - D l^2 + E l^2/(l^2 - F)`, `l` in µm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierCoefficients {
    pub coefficients: [f64; 6],
    pub range_nm: (f64, f64),
    pub source: String,
}

impl SellmeierCoefficients {
    /// Returns `(n^2, d(n^2)/d lambda)` with lambda in µm.
    fn n_squared(&self, lambda_um: f64) -> (f64, f64) {
        let [a, b, c, d, e, f] = self.coefficients;
        let l2 = lambda_um * lambda_um;
        let pole1 = l2 - c;
        let mut n2 = a + b / pole1 - d * l2;
        let mut dn2 = -2.0 * b * lambda_um / (pole1 * pole1) - 2.0 * d * lambda_um;
        if e != 0.0 {
            let pole2 = l2 - f;
            n2 += e * l2 / pole2;
            dn2 -= 2.0 * e * f * lambda_um / (pole2 * pole2);
        }
        (n2, dn2)
    }

    /// Principal index and its derivative with respect to wavelength in µm.
    pub fn index_and_slope(&self, lambda_um: f64) -> (f64, f64) {
        let (n2, dn2) = self.n_squared(lambda_um);
        let n = n2.sqrt();
        (n, dn2 / (2.0 * n))
    }

    fn contains(&self, lambda_nm: f64) -> bool {
        lambda_nm >= self.range_nm.0 && lambda_nm <= self.range_nm.1
    }
}

/// All coefficient sets loaded from one data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierTable {
    pub version: u32,
    pub name: String,
    entries: BTreeMap<(Material, Polarization), SellmeierCoefficients>,
}

impl SellmeierTable {
    pub fn builtin() -> &'static SellmeierTable {
        static TABLE: OnceLock<SellmeierTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            SellmeierTable::parse(BUILTIN_DATA, Path::new("<builtin sellmeier.txt>"))
                .expect("builtin Sellmeier data is valid")
        })
    }

    /// Loads `sellmeier.txt` from a data directory.
    pub fn from_dir(dir: &Path) -> Result<SellmeierTable> {
        let path = dir.join(DATA_FILE_NAME);
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        SellmeierTable::parse(&text, &path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<SellmeierTable> {
        let err = |line: usize, message: String| Error::Parse {
            path: PathBuf::from(path),
            line,
            message,
        };

        let mut version = None;
        let mut name = String::new();
        let mut entries = BTreeMap::new();
        let mut section: Option<(Material, Polarization, usize)> = None;
        let mut pending: BTreeMap<&str, (usize, String)> = BTreeMap::new();
        let mut seen = std::collections::BTreeSet::new();

        let mut flush = |section: Option<(Material, Polarization, usize)>,
                         pending: &mut BTreeMap<&str, (usize, String)>|
         -> Result<()> {
            let Some((material, pol, line)) = section else {
                return Ok(());
            };
            let coeffs = pending
                .remove("coefficients")
                .ok_or_else(|| err(line, format!("[{material}.{pol}] lacks `coefficients`")))?;
            let range = pending
                .remove("range_nm")
                .ok_or_else(|| err(line, format!("[{material}.{pol}] lacks `range_nm`")))?;
            let source = pending.remove("source").map(|(_, s)| s).unwrap_or_default();
            if let Some((key, (l, _))) = pending.iter().next() {
                return Err(err(*l, format!("unknown key `{key}`")));
            }

            let values = parse_floats(&coeffs.1).map_err(|m| err(coeffs.0, m))?;
            let coefficients: [f64; 6] = values.try_into().map_err(|v: Vec<f64>| {
                err(coeffs.0, format!("expected 6 coefficients, found {}", v.len()))
            })?;
            let bounds = parse_floats(&range.1).map_err(|m| err(range.0, m))?;
            let [lo, hi] = bounds[..] else {
                return Err(err(range.0, "range_nm needs two values".into()));
            };
            if !(lo > 0.0 && hi > lo) {
                return Err(err(range.0, format!("invalid range [{lo}, {hi}]")));
            }
            entries.insert(
                (material, pol),
                SellmeierCoefficients {
                    coefficients,
                    range_nm: (lo, hi),
                    source,
                },
            );
            Ok(())
        };

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let header = header
                    .strip_suffix(']')
                    .ok_or_else(|| err(lineno, "unterminated section header".into()))?;
                let (mat, pol) = header
                    .split_once('.')
                    .ok_or_else(|| err(lineno, "section must be [MATERIAL.polarization]".into()))?;
                let material = mat.parse().map_err(|m| err(lineno, m))?;
                let pol = pol.parse().map_err(|m| err(lineno, m))?;
                flush(section.take(), &mut pending)?;
                if !seen.insert((material, pol)) {
                    return Err(err(lineno, format!("duplicate section [{header}]")));
                }
                section = Some((material, pol, lineno));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(lineno, format!("expected `key = value`, found `{line}`")))?;
            let key = key.trim();
            let value = value.trim().to_string();
            if section.is_none() {
                match key {
                    "version" => {
                        version = Some(value.parse::<u32>().map_err(|e| err(lineno, e.to_string()))?)
                    }
                    "name" => name = value,
                    other => return Err(err(lineno, format!("unknown key `{other}`"))),
                }
            } else {
                let key: &'static str = match key {
                    "coefficients" => "coefficients",
                    "range_nm" => "range_nm",
                    "source" => "source",
                    other => return Err(err(lineno, format!("unknown key `{other}`"))),
                };
                if pending.insert(key, (lineno, value)).is_some() {
                    return Err(err(lineno, format!("duplicate key `{key}`")));
                }
            }
        }
        flush(section.take(), &mut pending)?;

        let version = version.ok_or_else(|| err(1, "missing `version`".into()))?;
        Ok(SellmeierTable {
            version,
            name,
            entries,
        })
    }

    pub fn coefficients(
        &self,
        material: Material,
        polarization: Polarization,
    ) -> Result<&SellmeierCoefficients> {
        self.entries.get(&(material, polarization)).ok_or_else(|| {
            Error::invalid(
                "material",
                format!("no {polarization} Sellmeier data for {material}"),
            )
        })
    }

    /// Principal index `(n, dn/dλ[µm⁻¹])` with a range check.
    pub fn principal(
        &self,
        material: Material,
        polarization: Polarization,
        lambda_nm: f64,
    ) -> Result<(f64, f64)> {
        let coeffs = self.coefficients(material, polarization)?;
        if !coeffs.contains(lambda_nm) || !lambda_nm.is_finite() {
            return Err(Error::WavelengthOutOfRange {
                material: material.to_string(),
                polarization: polarization.to_string(),
                wavelength_nm: lambda_nm,
                min_nm: coeffs.range_nm.0,
                max_nm: coeffs.range_nm.1,
            });
        }
        Ok(coeffs.index_and_slope(lambda_nm * 1e-3))
    }

    /// Intersection of the validity ranges of both polarizations of a material.
    pub fn range_nm(&self, material: Material) -> Result<(f64, f64)> {
        let o = self.coefficients(material, Polarization::Ordinary)?.range_nm;
        let e = self.coefficients(material, Polarization::Extraordinary)?.range_nm;
        Ok((o.0.max(e.0), o.1.min(e.1)))
    }
}

fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number `{}`: {e}", v.trim()))
        })
        .collect()
}
