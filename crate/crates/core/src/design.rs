//! Group-velocity-matched source geometries and parameter scans.
//!
//! Both solvers work on collinear, degenerate type II emission. The outer
//! root find runs over the degenerate wavelength λ_c; at every trial λ_c the
//! cut angle is re-solved so that Δk = 0, so each solution satisfies the
//! group-velocity condition and phasematching together.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::{CrystalSpec, Dispersion, PmType, Walkoff};
use crate::error::{Error, Result};
use crate::gaussian::GAMMA;
use crate::pipeline::{run, PipelineOptions};
use crate::roots::{find_root, scan_bracket};
use crate::scenario::ScenarioConfig;
use crate::sellmeier::{Material, Polarization};

/// Solver tolerance on λ_c, nm.
pub const LAMBDA_TOL_NM: f64 = 1e-6;
/// Largest accepted condition residual at the design length, fs.
pub const RESIDUAL_LIMIT_FS: f64 = 0.1;
/// Recommended minimum of σ·|τ_i| for an AGVM source.
pub const AGVM_QUALITY_THRESHOLD: f64 = 10.0;

const BRACKET_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GvmCondition {
    /// τ_s + τ_i = 0
    Sgvm,
    /// τ_s = 0
    Agvm,
}

impl fmt::Display for GvmCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GvmCondition::Sgvm => "SGVM",
            GvmCondition::Agvm => "AGVM",
        })
    }
}

impl FromStr for GvmCondition {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sgvm" => Ok(GvmCondition::Sgvm),
            "agvm" => Ok(GvmCondition::Agvm),
            other => Err(format!("unknown condition `{other}` (expected sgvm or agvm)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub material: Material,
    pub pm_type: PmType,
    pub condition: GvmCondition,
    pub lambda_c_nm: f64,
    pub cut_angle_deg: f64,
    pub signal_polarization: Polarization,
    pub length_mm: f64,
    pub tau_s_fs: f64,
    pub tau_i_fs: f64,
    pub tau_minus_fs: f64,
    /// `τ_s + τ_i` (SGVM) or `τ_s` (AGVM) at `length_mm`.
    pub residual_fs: f64,
    /// Pump width at which T_si vanishes, `2/(√γ |τ_i|)`; SGVM only.
    pub sigma_star_rad_per_fs: Option<f64>,
}

impl DesignSolution {
    pub fn crystal(&self) -> Result<CrystalSpec> {
        CrystalSpec::new(
            self.material,
            self.cut_angle_deg,
            self.length_mm,
            self.pm_type,
            self.signal_polarization,
        )
    }

    pub fn walkoff(&self) -> Walkoff {
        Walkoff {
            tau_s: self.tau_s_fs,
            tau_i: self.tau_i_fs,
        }
    }
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::invalid(
            "lambda_range",
            format!("need 0 < lo < hi, got {lo}:{hi}"),
        ));
    }
    Ok(())
}

/// Walkoff per millimetre at the phasematched angle for `lambda_c_nm`.
fn walkoff_at(
    disp: &Dispersion,
    material: Material,
    signal: Polarization,
    lambda_c_nm: f64,
) -> Result<(f64, Walkoff)> {
    let theta = disp.phasematch_angle(material, PmType::TypeII, lambda_c_nm)?;
    let crystal = CrystalSpec::new(material, theta, 1.0, PmType::TypeII, signal)?;
    Ok((theta, disp.walkoff_terms(&crystal, lambda_c_nm)?))
}

fn solve(
    disp: &Dispersion,
    material: Material,
    condition: GvmCondition,
    signal: Polarization,
    (lo, hi): (f64, f64),
    length_mm: f64,
) -> Result<Option<DesignSolution>> {
    let residual = |lambda: f64| -> Result<f64> {
        let (_, w) = walkoff_at(disp, material, signal, lambda)?;
        Ok(match condition {
            GvmCondition::Sgvm => w.tau_s + w.tau_i,
            GvmCondition::Agvm => w.tau_s,
        })
    };
    let Some(bracket) = scan_bracket(residual, lo, hi, BRACKET_STEPS)? else {
        return Ok(None);
    };
    let lambda = find_root(residual, bracket, LAMBDA_TOL_NM, 0.0)?;
    let (theta, per_mm) = walkoff_at(disp, material, signal, lambda)?;
    let tau_s = per_mm.tau_s * length_mm;
    let tau_i = per_mm.tau_i * length_mm;
    let residual_fs = match condition {
        GvmCondition::Sgvm => tau_s + tau_i,
        GvmCondition::Agvm => tau_s,
    };
    if residual_fs.abs() >= RESIDUAL_LIMIT_FS {
        return Err(Error::Numeric(format!(
            "{condition} residual {residual_fs:.3e} fs at {lambda:.4} nm exceeds {RESIDUAL_LIMIT_FS} fs"
        )));
    }
    Ok(Some(DesignSolution {
        material,
        pm_type: PmType::TypeII,
        condition,
        lambda_c_nm: lambda,
        cut_angle_deg: theta,
        signal_polarization: signal,
        length_mm,
        tau_s_fs: tau_s,
        tau_i_fs: tau_i,
        tau_minus_fs: tau_s - tau_i,
        residual_fs,
        sigma_star_rad_per_fs: match condition {
            GvmCondition::Sgvm => Some(2.0 / (GAMMA.sqrt() * tau_i.abs())),
            GvmCondition::Agvm => None,
        },
    }))
}

/// Degenerate wavelength in `[lo, hi]` nm where `τ_s + τ_i = 0`.
pub fn find_sgvm(disp: &Dispersion, material: Material, lo: f64, hi: f64, length_mm: f64) -> Result<DesignSolution> {
    check_range(lo, hi)?;
    solve(disp, material, GvmCondition::Sgvm, Polarization::Ordinary, (lo, hi), length_mm)?.ok_or(
        Error::NoDesignPoint {
            condition: "SGVM",
            min_nm: lo,
            max_nm: hi,
        },
    )
}

/// Degenerate wavelength in `[lo, hi]` nm where the pump travels with the
/// signal (`τ_s = 0`). The ordinary daughter is tried as signal first.
pub fn find_agvm(disp: &Dispersion, material: Material, lo: f64, hi: f64, length_mm: f64) -> Result<DesignSolution> {
    check_range(lo, hi)?;
    for signal in [Polarization::Ordinary, Polarization::Extraordinary] {
        if let Some(s) = solve(disp, material, GvmCondition::Agvm, signal, (lo, hi), length_mm)? {
            return Ok(s);
        }
    }
    Err(Error::NoDesignPoint {
        condition: "AGVM",
        min_nm: lo,
        max_nm: hi,
    })
}

pub fn find(
    disp: &Dispersion,
    material: Material,
    condition: GvmCondition,
    lo: f64,
    hi: f64,
    length_mm: f64,
) -> Result<DesignSolution> {
    match condition {
        GvmCondition::Sgvm => find_sgvm(disp, material, lo, hi, length_mm),
        GvmCondition::Agvm => find_agvm(disp, material, lo, hi, length_mm),
    }
}

/// `σ·|τ_i|` for the AGVM geometry cut to `length_mm`; values well above
/// [`AGVM_QUALITY_THRESHOLD`] give a transform-limited heralded photon.
pub fn agvm_quality(solution: &DesignSolution, length_mm: f64, sigma: f64) -> f64 {
    sigma * (solution.tau_i_fs / solution.length_mm * length_mm).abs()
}

/// One cell of a [`ScanTable`]. Fields are empty when the stage was off or
/// the run failed; `error` then holds the message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub cell: usize,
    pub length_mm: f64,
    pub pump_fwhm_nm: f64,
    pub tb_analytic: Option<f64>,
    pub tb_numeric: Option<f64>,
    pub schmidt_number: Option<f64>,
    pub delta_t_analytic_fs: Option<f64>,
    pub delta_t_numeric_fs: Option<f64>,
    pub delta_omega_numeric_rad_per_fs: Option<f64>,
    pub tau_c_analytic_fs: Option<f64>,
    pub tau_c_numeric_fs: Option<f64>,
    /// `Δt_num / Δt_an`.
    pub delta_t_ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub base: std::collections::BTreeMap<String, String>,
    pub lengths_mm: Vec<f64>,
    pub pump_fwhms_nm: Vec<f64>,
    /// Row-major over (length, bandwidth).
    pub records: Vec<ScanRecord>,
}

impl ScanTable {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Runs the pipeline for every (length, pump bandwidth) pair with all other
/// settings taken from `base`.
pub fn scan(
    disp: &Dispersion,
    base: &ScenarioConfig,
    lengths_mm: &[f64],
    pump_fwhms_nm: &[f64],
    opts: PipelineOptions,
) -> Result<ScanTable> {
    if lengths_mm.is_empty() || pump_fwhms_nm.is_empty() {
        return Err(Error::invalid("scan", "both axes need at least one value"));
    }
    let cells: Vec<(usize, f64, f64)> = lengths_mm
        .iter()
        .flat_map(|&l| pump_fwhms_nm.iter().map(move |&f| (l, f)))
        .enumerate()
        .map(|(i, (l, f))| (i, l, f))
        .collect();
    let records = cells
        .par_iter()
        .map(|&(cell, length_mm, pump_fwhm_nm)| {
            let mut cfg = base.clone();
            cfg.length_mm = length_mm;
            cfg.pump_fwhm_nm = pump_fwhm_nm;
            let mut rec = ScanRecord {
                cell,
                length_mm,
                pump_fwhm_nm,
                tb_analytic: None,
                tb_numeric: None,
                schmidt_number: None,
                delta_t_analytic_fs: None,
                delta_t_numeric_fs: None,
                delta_omega_numeric_rad_per_fs: None,
                tau_c_analytic_fs: None,
                tau_c_numeric_fs: None,
                delta_t_ratio: None,
                error: None,
            };
            match run(disp, &cfg, opts) {
                Ok(out) => {
                    let r = out.report;
                    if let Some(g) = &r.gaussian {
                        rec.tb_analytic = Some(g.tb);
                        rec.delta_t_analytic_fs = Some(g.delta_t);
                        rec.tau_c_analytic_fs = Some(g.tau_c);
                    }
                    if let Some(n) = &r.numerical {
                        rec.tb_numeric = Some(n.tb);
                        rec.delta_t_numeric_fs = Some(n.delta_t);
                        rec.delta_omega_numeric_rad_per_fs = Some(n.delta_omega);
                    }
                    rec.schmidt_number = r.schmidt.map(|s| s.schmidt_number);
                    rec.tau_c_numeric_fs = r.tau_c_numeric;
                    rec.delta_t_ratio = rec.delta_t_numeric_fs.zip(rec.delta_t_analytic_fs).map(|(n, a)| n / a);
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect();
    Ok(ScanTable {
        base: base.echo(),
        lengths_mm: lengths_mm.to_vec(),
        pump_fwhms_nm: pump_fwhms_nm.to_vec(),
        records,
    })
}

/// Default family: BBO type II at 800 nm.
pub fn default_scan_base() -> ScenarioConfig {
    ScenarioConfig::new(Material::Bbo, PmType::TypeII, 5.0, 800.0, 5.0)
}

pub const DEFAULT_SCAN_LENGTHS_MM: &[f64] = &[1.0, 2.0, 5.0, 10.0];
pub const DEFAULT_SCAN_FWHMS_NM: &[f64] = &[2.0, 5.0, 10.0];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgvm_bbo() {
        let d = Dispersion::default();
        let s = find_sgvm(&d, Material::Bbo, 1300.0, 1700.0, 2.3).unwrap();
        assert!((s.lambda_c_nm / 1514.0 - 1.0).abs() < 0.01, "{}", s.lambda_c_nm);
        assert!((s.cut_angle_deg - 28.8).abs() < 0.5, "{}", s.cut_angle_deg);
        let w = d.walkoff_terms(&s.crystal().unwrap(), s.lambda_c_nm).unwrap();
        assert!(((w.tau_s + w.tau_i) / w.tau_i).abs() < 1e-3);
        assert!(s.sigma_star_rad_per_fs.unwrap() > 0.0);
    }

    #[test]
    fn agvm_kdp() {
        let d = Dispersion::default();
        let s = find_agvm(&d, Material::Kdp, 780.0, 880.0, 20.0).unwrap();
        assert!((s.lambda_c_nm / 830.0 - 1.0).abs() < 0.01, "{}", s.lambda_c_nm);
        assert!((s.cut_angle_deg - 67.7).abs() < 0.5, "{}", s.cut_angle_deg);
        assert!((s.tau_s_fs / s.tau_i_fs).abs() < 1e-3);
        let q = agvm_quality(&s, 20.0, 0.05);
        assert!(q > AGVM_QUALITY_THRESHOLD);
        assert!((agvm_quality(&s, 10.0, 0.05) / q - 0.5).abs() < 1e-12);
    }

    #[test]
    fn range_without_root() {
        let d = Dispersion::default();
        assert!(matches!(
            find_sgvm(&d, Material::Bbo, 1300.0, 1400.0, 1.0),
            Err(Error::NoDesignPoint { .. })
        ));
        assert!(find_agvm(&d, Material::Kdp, 900.0, 880.0, 1.0).is_err());
    }
}
