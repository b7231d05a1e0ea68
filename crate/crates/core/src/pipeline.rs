//! Runs a scenario end to end and collects everything into a [`RunReport`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::contour::{contour, superlevel_mismatch, ContourLine};
use crate::crystal::Dispersion;
use crate::error::{Error, Result};
use crate::gaussian::{analytic_cwf, GaussianReport};
use crate::io;
use crate::scenario::{ResolvedScenario, ScenarioConfig};
use crate::schmidt::{purity_from_spectrum, schmidt_number, schmidt_spectrum, EntanglementReport, RANK_CUTOFF};
use crate::sellmeier::Polarization;
use crate::state::{build_jsa, JointSpectralAmplitude};
use crate::units::rad_per_fs_to_thz;
use crate::wigner::{
    heralded_density_matrix, joint_temporal_analysis, measure_width, numerical_cwf, ChronocyclicWigner,
    IntensityProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Zero-padding factor of the Wigner time transform.
    pub time_padding: usize,
    /// Zero-padding factor of the joint temporal transform.
    pub joint_temporal_padding: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            time_padding: 2,
            joint_temporal_padding: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSummary {
    pub cut_angle_deg: f64,
    pub signal_polarization: Polarization,
    pub idler_polarization: Polarization,
    pub omega_c_rad_per_fs: f64,
    pub sigma_rad_per_fs: f64,
    pub tau_p_fs: f64,
    pub tau_s_fs: f64,
    pub tau_i_fs: f64,
    pub tau_minus_fs: f64,
    pub grid_n: usize,
    pub grid_spacing_rad_per_fs: f64,
    pub grid_span_rad_per_fs: f64,
    pub boundary_fraction: f64,
}

/// Widths measured on the numerical CWF.
///
/// `delta_omega` is the e⁻¹ half width of the spectral marginal. `delta_t` is
/// the e⁻¹ half width of the CWF cut through its maximum along t, which does
/// not pick up the spread caused by a frequency chirp; the temporal marginal
/// width is reported separately as `delta_t_marginal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericalReport {
    #[serde(rename = "delta_t_fs")]
    pub delta_t: f64,
    #[serde(rename = "delta_omega_rad_per_fs")]
    pub delta_omega: f64,
    pub delta_omega_thz: f64,
    pub tb: f64,
    #[serde(rename = "delta_t_marginal_fs")]
    pub delta_t_marginal: f64,
    #[serde(rename = "delta_omega_slice_rad_per_fs")]
    pub delta_omega_slice: f64,
    #[serde(rename = "t_peak_fs")]
    pub t_peak: f64,
    #[serde(rename = "omega_peak_rad_per_fs")]
    pub omega_peak: f64,
    #[serde(rename = "spectral_centroid_rad_per_fs")]
    pub spectral_centroid: f64,
    #[serde(rename = "temporal_centroid_fs")]
    pub temporal_centroid: f64,
    pub heralded_purity: f64,
    pub cwf_integral: f64,
    pub hermiticity_error: f64,
    #[serde(rename = "time_window_fs")]
    pub time_window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtReport {
    pub schmidt_number: f64,
    pub effective_rank: usize,
    pub eigenvalue_sum: f64,
    pub leading_eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourReport {
    pub level: f64,
    pub closed: bool,
    pub area_numeric: f64,
    pub area_analytic: f64,
    /// `|A_num - A_an| / A_an` for the largest closed line of each.
    pub area_mismatch: f64,
    /// Cells inside one superlevel set but not the other, relative to the numerical set.
    pub overlap_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub photonpair: String,
    pub sellmeier_data: String,
    pub sellmeier_version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: BTreeMap<String, String>,
    pub resolved: ResolvedSummary,
    pub gaussian: Option<GaussianReport>,
    pub numerical: Option<NumericalReport>,
    #[serde(rename = "tau_c_numeric_fs")]
    pub tau_c_numeric: Option<f64>,
    pub schmidt: Option<SchmidtReport>,
    pub entanglement: Option<EntanglementReport>,
    pub contour: Option<ContourReport>,
    pub files: Vec<String>,
    pub versions: Versions,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Numeric(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<report>"),
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// True when every number in the report is finite.
    pub fn all_finite(&self) -> bool {
        fn walk(v: &serde_json::Value) -> bool {
            match v {
                serde_json::Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
                serde_json::Value::Array(a) => a.iter().all(walk),
                serde_json::Value::Object(o) => o.values().all(walk),
                _ => true,
            }
        }
        // serde_json writes non-finite floats as null
        let text = serde_json::to_string(self).unwrap_or_default();
        serde_json::from_str::<serde_json::Value>(&text).is_ok_and(|v| walk(&v) && !has_unexpected_null(&v))
    }
}

fn has_unexpected_null(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Array(a) => a.iter().any(|x| x.is_null() || has_unexpected_null(x)),
        serde_json::Value::Object(o) => o.iter().any(|(k, x)| match x {
            serde_json::Value::Null => !OPTIONAL_SECTIONS.contains(&k.as_str()),
            other => has_unexpected_null(other),
        }),
        _ => false,
    }
}

const OPTIONAL_SECTIONS: &[&str] = &[
    "gaussian",
    "numerical",
    "tau_c_numeric_fs",
    "schmidt",
    "entanglement",
    "contour",
];

/// Report plus the sampled data behind it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub resolved: ResolvedScenario,
    pub jsa: JointSpectralAmplitude,
    pub numeric_cwf: Option<ChronocyclicWigner>,
    pub analytic_cwf: Option<ChronocyclicWigner>,
    pub numeric_contours: Vec<ContourLine>,
    pub analytic_contours: Vec<ContourLine>,
    pub spectrum: Option<IntensityProfile>,
    pub temporal: Option<IntensityProfile>,
    pub s_minus: Option<IntensityProfile>,
    pub lambdas: Option<Vec<f64>>,
}

pub fn run(disp: &Dispersion, cfg: &ScenarioConfig, opts: PipelineOptions) -> Result<RunOutput> {
    let resolved = cfg.resolve(disp)?;
    run_resolved(disp, cfg, resolved, opts)
}

pub fn run_resolved(
    disp: &Dispersion,
    cfg: &ScenarioConfig,
    resolved: ResolvedScenario,
    opts: PipelineOptions,
) -> Result<RunOutput> {
    let source = &resolved.source;
    let grid = resolved.grid;
    let walkoff = source.walkoff(disp)?;
    let jsa = build_jsa(disp, source, &grid)?;

    let summary = ResolvedSummary {
        cut_angle_deg: source.crystal.cut_angle_deg,
        signal_polarization: source.crystal.signal_polarization,
        idler_polarization: source.crystal.idler_polarization(),
        omega_c_rad_per_fs: source.omega_c(),
        sigma_rad_per_fs: source.pump.sigma,
        tau_p_fs: source.pump.tau_p,
        tau_s_fs: walkoff.tau_s,
        tau_i_fs: walkoff.tau_i,
        tau_minus_fs: walkoff.tau_minus(),
        grid_n: grid.size,
        grid_spacing_rad_per_fs: grid.spacing,
        grid_span_rad_per_fs: grid.span(),
        boundary_fraction: jsa.boundary_fraction(),
    };

    let gaussian = if cfg.analytic {
        Some(GaussianReport::new(source.pump.sigma, &source.filters, walkoff, source.omega_c())?)
    } else {
        None
    };

    let density = if cfg.numerical || cfg.schmidt {
        Some(heralded_density_matrix(&jsa, &source.filters)?)
    } else {
        None
    };

    let mut numerical = None;
    let mut numeric_cwf = None;
    let mut spectrum = None;
    let mut temporal = None;
    if cfg.numerical {
        let r = density.as_ref().expect("built above");
        let w = numerical_cwf(r, opts.time_padding)?;
        let (iw, it) = w.marginals();
        let dw = measure_width(&iw)?;
        let dt_marginal = measure_width(&it)?;
        let (slice_w, slice_t) = w.peak_slice_widths()?;
        let (j, k) = w.argmax();
        numerical = Some(NumericalReport {
            delta_t: slice_t.half_width,
            delta_omega: dw.half_width,
            delta_omega_thz: rad_per_fs_to_thz(dw.half_width),
            tb: slice_t.half_width * dw.half_width,
            delta_t_marginal: dt_marginal.half_width,
            delta_omega_slice: slice_w.half_width,
            t_peak: w.t[k],
            omega_peak: w.omega[j],
            spectral_centroid: iw.centroid(),
            temporal_centroid: it.centroid(),
            heralded_purity: r.purity(),
            cwf_integral: w.integral(),
            hermiticity_error: r.hermiticity_error(),
            time_window: w.t.last().copied().unwrap_or(0.0) - w.t[0],
        });
        spectrum = Some(iw);
        temporal = Some(it);
        numeric_cwf = Some(w);
    }

    let analytic = gaussian.as_ref().map(|g| match &numeric_cwf {
        Some(w) => analytic_cwf(g, &w.omega, &w.t),
        None => {
            let n = 257;
            let axis = |c: f64, w: f64| (0..n).map(|i| c + (i as f64 / (n - 1) as f64 - 0.5) * 10.0 * w).collect::<Vec<_>>();
            analytic_cwf(g, &axis(g.peak_omega(), g.delta_omega), &axis(g.t_shift, g.delta_t))
        }
    });

    let mut numeric_contours = Vec::new();
    let mut analytic_contours = Vec::new();
    if let Some(w) = &numeric_cwf {
        numeric_contours = contour(w, cfg.contour_level)?;
    }
    if let Some(w) = &analytic {
        analytic_contours = contour(w, cfg.contour_level)?;
    }
    let contour_report = match (&numeric_cwf, &analytic) {
        (Some(n), Some(a)) => {
            let largest = |lines: &[ContourLine]| lines.iter().map(ContourLine::area).fold(0.0, f64::max);
            let (area_n, area_a) = (largest(&numeric_contours), largest(&analytic_contours));
            Some(ContourReport {
                level: cfg.contour_level,
                closed: numeric_contours.iter().chain(&analytic_contours).all(|l| l.closed),
                area_numeric: area_n,
                area_analytic: area_a,
                area_mismatch: (area_n - area_a).abs() / area_a,
                overlap_mismatch: superlevel_mismatch(n, a, cfg.contour_level)?,
            })
        }
        _ => None,
    };

    let (tau_c_numeric, s_minus) = if cfg.joint_temporal {
        let jt = joint_temporal_analysis(&jsa, opts.joint_temporal_padding)?;
        (Some(jt.tau_c()), Some(jt.s_minus))
    } else {
        (None, None)
    };

    let mut schmidt = None;
    let mut entanglement = None;
    let mut lambdas = None;
    if cfg.schmidt {
        let l = schmidt_spectrum(&jsa)?;
        schmidt = Some(SchmidtReport {
            schmidt_number: schmidt_number(&l),
            effective_rank: l.iter().filter(|&&x| x > RANK_CUTOFF).count(),
            eigenvalue_sum: l.iter().sum(),
            leading_eigenvalues: l.iter().take(10).copied().collect(),
        });
        let r = density.as_ref().expect("built above");
        if !r.trigger_filtered {
            entanglement = Some(purity_from_spectrum(&l, r)?);
        }
        lambdas = Some(l);
    }

    let table = disp.table();
    let report = RunReport {
        scenario: cfg.echo(),
        resolved: summary,
        gaussian,
        numerical,
        tau_c_numeric,
        schmidt,
        entanglement,
        contour: contour_report,
        files: Vec::new(),
        versions: Versions {
            photonpair: env!("CARGO_PKG_VERSION").to_string(),
            sellmeier_data: table.name.clone(),
            sellmeier_version: table.version,
        },
    };
    Ok(RunOutput {
        report,
        resolved,
        jsa,
        numeric_cwf,
        analytic_cwf: analytic,
        numeric_contours,
        analytic_contours,
        spectrum,
        temporal,
        s_minus,
        lambdas,
    })
}

/// Which files [`write_outputs`] emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputSelection {
    pub csv: bool,
    pub json: bool,
}

/// Writes the CSV data files and `report.json` into `dir`, recording the
/// file names in the report.
pub fn write_outputs(out: &mut RunOutput, dir: &Path, which: OutputSelection) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if which.csv {
        let mut put = |name: &str, f: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
            let p = dir.join(name);
            f(&p)?;
            written.push(p);
            Ok(())
        };
        if let Some(w) = &out.numeric_cwf {
            put(io::CWF_FILE, &|p| io::write_cwf(p, w))?;
            put(io::CONTOUR_NUMERIC_FILE, &|p| io::write_contours(p, &out.numeric_contours))?;
        }
        if out.analytic_cwf.is_some() {
            put(io::CONTOUR_ANALYTIC_FILE, &|p| io::write_contours(p, &out.analytic_contours))?;
        }
        if let Some(s) = &out.spectrum {
            put(io::SPECTRUM_FILE, &|p| io::write_profile(p, "omega_thz", s))?;
        }
        if let Some(t) = &out.temporal {
            put(io::TEMPORAL_FILE, &|p| io::write_profile(p, "t_fs", t))?;
        }
        if let Some(s) = &out.s_minus {
            put(io::S_MINUS_FILE, &|p| io::write_profile(p, "t_fs", s))?;
        }
        if let Some(l) = &out.lambdas {
            put(io::SCHMIDT_FILE, &|p| io::write_schmidt(p, l))?;
        }
    }
    out.report.files = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    if which.json {
        let p = dir.join(io::REPORT_FILE);
        io::write_json(&p, &out.report)?;
        written.push(p);
    }
    Ok(written)
}
