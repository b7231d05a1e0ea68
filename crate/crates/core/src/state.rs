//! Joint spectral amplitude `f(ω_s, ω_i) = Φ · α · F` on a uniform grid.
//!
//! The pump bandwidth is given as the intensity FWHM of the pump spectrum in
//! wavelength. It converts to the amplitude 1/e half-width `σ` of
//! `α = exp[-(ω_s + ω_i - 2ω_c)² / σ²]` through
//! `σ = (2πc Δλ / λ_p²) / (2 √(ln 2 / 2))`, and the pump duration is
//! `τ_p = √2 / σ`. A 5 nm bandwidth at 415 nm gives τ_p = 30.4 fs, and 15 nm at
//! 757 nm gives 33.7 fs. Every downstream number depends on this convention.
//!
//! The trigger efficiency `g(ω)` is deliberately not part of the JSA; it is
//! applied when the heralded density matrix is formed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::{CrystalSpec, Dispersion, Walkoff};
use crate::error::{Error, Result};
use crate::gaussian::{self, FilterWidth, GAMMA};
use crate::units::{omega_from_nm, C_NM_PER_FS};

/// Boundary mass fraction above which a grid is considered to clip the JSA.
pub const CLIP_LIMIT: f64 = 1e-4;

/// Amplitude 1/e half-width σ (rad/fs) of the pump envelope.
pub fn sigma_from_fwhm(lambda_p_nm: f64, fwhm_nm: f64) -> Result<f64> {
    if !(lambda_p_nm > 0.0) {
        return Err(Error::invalid("pump wavelength", format!("must be positive, got {lambda_p_nm}")));
    }
    if !(fwhm_nm > 0.0) {
        return Err(Error::invalid("pump_fwhm_nm", format!("must be positive, got {fwhm_nm}")));
    }
    let delta_omega_fwhm = 2.0 * PI * C_NM_PER_FS * fwhm_nm / (lambda_p_nm * lambda_p_nm);
    Ok(delta_omega_fwhm / (2.0 * (std::f64::consts::LN_2 / 2.0).sqrt()))
}

/// Inverse of [`sigma_from_fwhm`]: FWHM in nm of a pump with width `sigma`.
pub fn fwhm_from_sigma(lambda_p_nm: f64, sigma: f64) -> Result<f64> {
    let one_nm = sigma_from_fwhm(lambda_p_nm, 1.0)?;
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    Ok(sigma / one_nm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub center_nm: f64,
    /// Intensity FWHM in wavelength; `None` when built directly from σ.
    pub fwhm_nm: Option<f64>,
    pub sigma: f64,
    pub tau_p: f64,
}

impl PumpSpec {
    pub fn from_fwhm(center_nm: f64, fwhm_nm: f64) -> Result<Self> {
        let sigma = sigma_from_fwhm(center_nm, fwhm_nm)?;
        Ok(PumpSpec {
            center_nm,
            fwhm_nm: Some(fwhm_nm),
            sigma,
            tau_p: 2f64.sqrt() / sigma,
        })
    }

    pub fn from_sigma(center_nm: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
        }
        if !(center_nm > 0.0) {
            return Err(Error::invalid("pump wavelength", format!("must be positive, got {center_nm}")));
        }
        Ok(PumpSpec {
            center_nm,
            fwhm_nm: None,
            sigma,
            tau_p: 2f64.sqrt() / sigma,
        })
    }

    /// Degenerate daughter frequency ω_c = ω_p / 2.
    pub fn omega_c(&self) -> f64 {
        omega_from_nm(self.center_nm) / 2.0
    }
}

/// Pump envelope `exp[-(ω_s + ω_i - 2ω_c)² / σ²]`.
pub fn pump_envelope(omega_s: f64, omega_i: f64, pump: &PumpSpec) -> f64 {
    let detuning = omega_s + omega_i - 2.0 * pump.omega_c();
    (-(detuning * detuning) / (pump.sigma * pump.sigma)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Identical Gaussian filter on both photons.
    pub two_photon: FilterWidth,
    /// Trigger detection efficiency `g(ω) = exp[-(ω - ω_g0)² / σ_g²]`.
    pub trigger: FilterWidth,
    pub trigger_center: f64,
}

impl FilterSpec {
    pub fn unfiltered(omega_c: f64) -> Self {
        FilterSpec {
            two_photon: FilterWidth::Unfiltered,
            trigger: FilterWidth::Unfiltered,
            trigger_center: omega_c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.two_photon.validate("sigma_F")?;
        self.trigger.validate("sigma_g")?;
        if !(self.trigger_center > 0.0) {
            return Err(Error::invalid(
                "omega_g0",
                format!("must be positive, got {}", self.trigger_center),
            ));
        }
        Ok(())
    }

    /// `F(ω_s, ω_i)` around the degenerate frequency.
    pub fn two_photon_filter(&self, omega_s: f64, omega_i: f64, omega_c: f64) -> f64 {
        match self.two_photon {
            FilterWidth::Unfiltered => 1.0,
            FilterWidth::Gaussian(w) => {
                let (a, b) = (omega_s - omega_c, omega_i - omega_c);
                (-(a * a + b * b) / (w * w)).exp()
            }
        }
    }

    pub fn trigger_efficiency(&self, omega: f64) -> f64 {
        match self.trigger {
            FilterWidth::Unfiltered => 1.0,
            FilterWidth::Gaussian(w) => {
                let a = omega - self.trigger_center;
                (-(a * a) / (w * w)).exp()
            }
        }
    }

    pub fn has_trigger_filter(&self) -> bool {
        self.trigger != FilterWidth::Unfiltered
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PmfShape {
    #[default]
    Sinc,
    /// `sinc(x) ≈ exp(-γ x²)`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mismatch {
    /// Exact `Δk` from the Sellmeier data.
    #[default]
    Full,
    /// `L Δk ≈ τ_s (ω_s - ω_c) + τ_i (ω_i - ω_c)`.
    FirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct PmfModel {
    pub shape: PmfShape,
    pub mismatch: Mismatch,
}

impl PmfModel {
    /// The closed-form model's assumptions: Gaussian PMF with first-order mismatch.
    pub const GAUSSIAN_FIRST_ORDER: PmfModel = PmfModel {
        shape: PmfShape::Gaussian,
        mismatch: Mismatch::FirstOrder,
    };
}

impl fmt::Display for PmfShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PmfShape::Sinc => "sinc",
            PmfShape::Gaussian => "gaussian",
        })
    }
}

impl FromStr for PmfShape {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sinc" => Ok(PmfShape::Sinc),
            "gaussian" => Ok(PmfShape::Gaussian),
            o => Err(format!("unknown pmf shape `{o}` (expected sinc or gaussian)")),
        }
    }
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mismatch::Full => "full",
            Mismatch::FirstOrder => "first_order",
        })
    }
}

impl FromStr for Mismatch {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(Mismatch::Full),
            "first_order" => Ok(Mismatch::FirstOrder),
            o => Err(format!("unknown mismatch model `{o}` (expected full or first_order)")),
        }
    }
}

/// Everything needed to evaluate the JSA of one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub crystal: CrystalSpec,
    pub lambda_c_nm: f64,
    pub pump: PumpSpec,
    pub filters: FilterSpec,
    pub pmf: PmfModel,
}

impl SourceSpec {
    pub fn new(
        crystal: CrystalSpec,
        lambda_c_nm: f64,
        pump: PumpSpec,
        filters: FilterSpec,
        pmf: PmfModel,
    ) -> Result<Self> {
        if !(lambda_c_nm > 0.0) {
            return Err(Error::invalid("lambda_c_nm", format!("must be positive, got {lambda_c_nm}")));
        }
        if (pump.center_nm * 2.0 - lambda_c_nm).abs() > 1e-9 * lambda_c_nm {
            return Err(Error::invalid(
                "pump",
                format!(
                    "pump centre {} nm is not half the degenerate wavelength {lambda_c_nm} nm",
                    pump.center_nm
                ),
            ));
        }
        filters.validate()?;
        Ok(SourceSpec {
            crystal,
            lambda_c_nm,
            pump,
            filters,
            pmf,
        })
    }

    pub fn omega_c(&self) -> f64 {
        omega_from_nm(self.lambda_c_nm)
    }

    pub fn walkoff(&self, disp: &Dispersion) -> Result<Walkoff> {
        disp.walkoff_terms(&self.crystal, self.lambda_c_nm)
    }
}

/// Phasematching function `Φ = shape(L Δk / 2) · exp(i L Δk / 2)`.
#[derive(Debug, Clone)]
pub struct PhasematchingFunction<'a> {
    disp: &'a Dispersion,
    crystal: CrystalSpec,
    model: PmfModel,
    walkoff: Walkoff,
    omega_c: f64,
}

impl<'a> PhasematchingFunction<'a> {
    pub fn new(disp: &'a Dispersion, source: &SourceSpec) -> Result<Self> {
        Ok(PhasematchingFunction {
            disp,
            crystal: source.crystal.clone(),
            model: source.pmf,
            walkoff: source.walkoff(disp)?,
            omega_c: source.omega_c(),
        })
    }

    /// Half the accumulated mismatch phase, `L Δk / 2` (dimensionless).
    pub fn half_phase(&self, omega_s: f64, omega_i: f64) -> Result<f64> {
        Ok(match self.model.mismatch {
            Mismatch::Full => {
                // L in mm, Δk in rad/µm
                0.5 * self.crystal.length_mm * 1e3 * self.disp.delta_k(&self.crystal, omega_s, omega_i)?
            }
            Mismatch::FirstOrder => {
                0.5 * (self.walkoff.tau_s * (omega_s - self.omega_c)
                    + self.walkoff.tau_i * (omega_i - self.omega_c))
            }
        })
    }

    pub fn eval(&self, omega_s: f64, omega_i: f64) -> Result<Complex64> {
        let x = self.half_phase(omega_s, omega_i)?;
        let amplitude = match self.model.shape {
            PmfShape::Sinc => sinc(x),
            PmfShape::Gaussian => (-GAMMA * x * x).exp(),
        };
        Ok(Complex64::from_polar(amplitude, x))
    }
}

/// Unnormalized `sin(x)/x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Evaluates Φ at a single point.
pub fn phasematching_function(
    disp: &Dispersion,
    source: &SourceSpec,
    omega_s: f64,
    omega_i: f64,
) -> Result<Complex64> {
    PhasematchingFunction::new(disp, source)?.eval(omega_s, omega_i)
}

/// Uniform frequency axis shared by signal and idler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub center: f64,
    pub spacing: f64,
    pub size: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, spacing: f64, size: usize) -> Result<Self> {
        if size < 64 || !size.is_power_of_two() {
            return Err(Error::invalid("grid_N", format!("must be a power of two >= 64, got {size}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid("grid spacing", format!("must be positive, got {spacing}")));
        }
        if !(center > 0.0) {
            return Err(Error::invalid("grid center", format!("must be positive, got {center}")));
        }
        Ok(FrequencyGrid {
            center,
            spacing,
            size,
        })
    }

    /// Grid with total span `span` (rad/fs) and `size` points.
    pub fn with_span(center: f64, span: f64, size: usize) -> Result<Self> {
        FrequencyGrid::new(center, span / size as f64, size)
    }

    pub fn omega(&self, j: usize) -> f64 {
        self.center + (j as f64 - (self.size / 2) as f64) * self.spacing
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.size).map(|j| self.omega(j)).collect()
    }

    pub fn span(&self) -> f64 {
        self.spacing * self.size as f64
    }

    /// Same span, twice the points.
    pub fn refined(&self) -> Self {
        FrequencyGrid {
            center: self.center,
            spacing: self.spacing / 2.0,
            size: self.size * 2,
        }
    }
}

/// Normalized JSA, `values[[j, k]] = f(ω_j, ω_k)` with signal along rows.
#[derive(Debug, Clone)]
pub struct JointSpectralAmplitude {
    pub grid: FrequencyGrid,
    pub values: Array2<Complex64>,
}

impl JointSpectralAmplitude {
    /// Normalizes arbitrary samples; fails if the boundary carries too much weight.
    pub fn from_samples(grid: FrequencyGrid, mut values: Array2<Complex64>) -> Result<Self> {
        let n = grid.size;
        if values.dim() != (n, n) {
            return Err(Error::invalid(
                "jsa",
                format!("sample array is {:?}, grid is {n}x{n}", values.dim()),
            ));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Numeric("non-finite JSA sample".into()));
        }
        let fraction = boundary_fraction(&values);
        if fraction.is_nan() {
            return Err(Error::Numeric("JSA vanishes on the whole grid".into()));
        }
        if fraction > CLIP_LIMIT {
            return Err(Error::SupportClipped {
                fraction,
                limit: CLIP_LIMIT,
            });
        }
        let norm: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.spacing * grid.spacing;
        let scale = 1.0 / norm.sqrt();
        values.mapv_inplace(|v| v * scale);
        Ok(JointSpectralAmplitude { grid, values })
    }

    /// `Σ |f|² δ²`.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing * self.grid.spacing
    }

    pub fn boundary_fraction(&self) -> f64 {
        boundary_fraction(&self.values)
    }
}

fn boundary_fraction(values: &Array2<Complex64>) -> f64 {
    let (n, m) = values.dim();
    let total: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    let mut edge = 0.0;
    for (j, row) in values.axis_iter(Axis(0)).enumerate() {
        if j == 0 || j == n - 1 {
            edge += row.iter().map(|v| v.norm_sqr()).sum::<f64>();
        } else {
            edge += row[0].norm_sqr() + row[m - 1].norm_sqr();
        }
    }
    edge / total
}

/// Envelope values below this are stored as exact zeros.
const NEGLIGIBLE_ENVELOPE: f64 = 1e-12;

/// Largest grid `auto_grid` will propose.
pub const MAX_AUTO_GRID: usize = 4096;

fn sample_jsa(disp: &Dispersion, source: &SourceSpec, grid: &FrequencyGrid) -> Result<Array2<Complex64>> {
    let pmf = PhasematchingFunction::new(disp, source)?;
    let n = grid.size;
    let omega_c = source.omega_c();
    let axis = grid.axis();
    let rows: Vec<Vec<Complex64>> = axis
        .par_iter()
        .map(|&ws| {
            axis.iter()
                .map(|&wi| {
                    let envelope = pump_envelope(ws, wi, &source.pump)
                        * source.filters.two_photon_filter(ws, wi, omega_c);
                    // far off the pump band the product underflows anyway; skipping
                    // Φ there keeps the pump frequency inside the Sellmeier range
                    if envelope < NEGLIGIBLE_ENVELOPE {
                        return Ok(Complex64::new(0.0, 0.0));
                    }
                    Ok(pmf.eval(ws, wi)? * envelope)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    Ok(Array2::from_shape_vec((n, n), flat).expect("row lengths match grid"))
}

/// Samples `Φ α F` on the grid and normalizes it to unit L² norm.
pub fn build_jsa(
    disp: &Dispersion,
    source: &SourceSpec,
    grid: &FrequencyGrid,
) -> Result<JointSpectralAmplitude> {
    let values = sample_jsa(disp, source, grid)?;
    JointSpectralAmplitude::from_samples(*grid, values)
}

/// Chooses a grid that holds the JSA support and resolves its narrowest feature.
///
/// The span covers the pump width, six Gaussian-model spectral widths and four
/// sinc main lobes. The spacing gives at least eight samples across the
/// narrowest feature and keeps the conjugate time window (±π/(2δ) for the
/// Wigner function) wider than the walkoff plus a few pump durations. The span
/// is then widened until the boundary carries less than a tenth of the clipping
/// limit, as long as the dispersion data covers it.
pub fn auto_grid(disp: &Dispersion, source: &SourceSpec) -> Result<FrequencyGrid> {
    let sigma = source.pump.sigma;
    let walkoff = source.walkoff(disp)?;
    let tau_max = walkoff.tau_s.abs().max(walkoff.tau_i.abs());
    let omega_c = source.omega_c();

    let mut features = vec![2.0 * sigma];
    if tau_max > 0.0 {
        features.push(4.0 * PI / tau_max);
    }
    for w in [source.filters.two_photon, source.filters.trigger] {
        if let FilterWidth::Gaussian(w) = w {
            features.push(2.0 * w);
        }
    }
    let narrowest = features.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut span = 6.0 * sigma;
    if tau_max > 0.0 {
        span = span.max(4.0 * 4.0 * PI / tau_max);
    }
    let free = FilterSpec {
        trigger: FilterWidth::Unfiltered,
        ..source.filters
    };
    let moments = gaussian::second_moments(sigma, &free, walkoff.tau_s, walkoff.tau_i);
    if let Ok((ws, wi)) = gaussian::marginal_spectral_widths(&moments) {
        span = span.max(6.0 * ws.max(wi));
    }

    // the heralded signal occupies [0, τ_s] broadened by the pump; t₋ needs a quarter of that window
    let tau_p = source.pump.tau_p;
    let signal_extent = walkoff.tau_s.abs() + 3.0 * tau_p;
    let difference_extent = 1.25 * ((walkoff.tau_s - walkoff.tau_i).abs() + 8.0 * tau_p) / 4.0;
    let time_extent = signal_extent.max(difference_extent);
    let max_spacing = (narrowest / 8.0).min(PI / (2.0 * time_extent));
    let size_for = |span: f64| {
        ((span / max_spacing).ceil() as usize)
            .max(256)
            .next_power_of_two()
    };

    let (omega_lo, omega_hi) = disp.omega_range(source.crystal.material)?;
    let pump_reach = sigma * (-NEGLIGIBLE_ENVELOPE.ln()).sqrt();
    let fits = |span: f64| {
        let half = span / 2.0;
        omega_c - half > omega_lo
            && omega_c + half < omega_hi
            && 2.0 * omega_c + pump_reach < omega_hi
    };

    let mut size = size_for(span);
    if size > MAX_AUTO_GRID {
        return Err(Error::Numeric(format!(
            "source needs {size} points per axis to resolve (limit {MAX_AUTO_GRID}); set grid_N and grid_span explicitly"
        )));
    }
    let mut grid = FrequencyGrid::with_span(omega_c, span, size)?;
    for _ in 0..8 {
        let values = match sample_jsa(disp, source, &grid) {
            Ok(v) => v,
            Err(_) => break,
        };
        if boundary_fraction(&values) < CLIP_LIMIT / 10.0 {
            break;
        }
        let wider = span * 1.5;
        if !fits(wider) || size_for(wider) > MAX_AUTO_GRID {
            break;
        }
        span = wider;
        size = size_for(span);
        grid = FrequencyGrid::with_span(omega_c, span, size)?;
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::PmType;
    use crate::sellmeier::{Material, Polarization};

    #[test]
    fn pump_durations_match_quoted_values() {
        let p = PumpSpec::from_fwhm(415.0, 5.0).unwrap();
        assert!((p.tau_p - 30.4).abs() < 0.1, "{}", p.tau_p);
        let p = PumpSpec::from_fwhm(757.0, 15.0).unwrap();
        assert!((p.tau_p - 33.7).abs() < 0.1, "{}", p.tau_p);
        let a = PumpSpec::from_fwhm(400.0, 5.0).unwrap();
        let b = PumpSpec::from_fwhm(400.0, 10.0).unwrap();
        assert!((a.tau_p / b.tau_p - 2.0).abs() < 1e-12);
        assert!((a.tau_p * a.sigma - 2f64.sqrt()).abs() < 1e-15);
        assert!(sigma_from_fwhm(400.0, 0.0).is_err());
    }

    #[test]
    fn pump_envelope_examples() {
        let p = PumpSpec::from_fwhm(400.0, 5.0).unwrap();
        let wc = p.omega_c();
        assert_eq!(pump_envelope(wc, wc, &p), 1.0);
        let half = p.sigma / 2.0;
        assert!((pump_envelope(wc + half, wc + half, &p) - (-1f64).exp()).abs() < 1e-14);
        assert_eq!(pump_envelope(wc + 0.01, wc - 0.03, &p), pump_envelope(wc - 0.03, wc + 0.01, &p));
    }

    fn bbo_800(disp: &Dispersion) -> SourceSpec {
        let th = disp.phasematch_angle(Material::Bbo, PmType::TypeII, 800.0).unwrap();
        let crystal = CrystalSpec::new(Material::Bbo, th, 5.0, PmType::TypeII, Polarization::Ordinary).unwrap();
        let pump = PumpSpec::from_fwhm(400.0, 5.0).unwrap();
        SourceSpec::new(crystal, 800.0, pump, FilterSpec::unfiltered(pump.omega_c()), PmfModel::default()).unwrap()
    }

    #[test]
    fn pmf_is_unity_at_phasematched_degeneracy() {
        let disp = Dispersion::default();
        let src = bbo_800(&disp);
        let wc = src.omega_c();
        let phi = phasematching_function(&disp, &src, wc, wc).unwrap();
        assert!((phi - Complex64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn first_sinc_zero_at_pi() {
        let disp = Dispersion::default();
        let mut src = bbo_800(&disp);
        src.pmf.mismatch = Mismatch::FirstOrder;
        let pmf = PhasematchingFunction::new(&disp, &src).unwrap();
        let w = src.walkoff(&disp).unwrap();
        let wc = src.omega_c();
        // along the signal axis L Δk / 2 = τ_s ν / 2
        let nu = 2.0 * PI / w.tau_s;
        assert!(pmf.eval(wc + nu, wc).unwrap().norm() < 1e-12);
        assert!((pmf.half_phase(wc + nu, wc).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn grid_axis_and_validation() {
        let g = FrequencyGrid::new(2.0, 0.01, 64).unwrap();
        assert_eq!(g.omega(32), 2.0);
        assert!((g.omega(0) - 1.68).abs() < 1e-12);
        assert!(FrequencyGrid::new(2.0, 0.01, 100).is_err());
        assert!(FrequencyGrid::new(2.0, 0.01, 32).is_err());
        assert!(FrequencyGrid::new(2.0, -0.01, 64).is_err());
    }

    #[test]
    fn build_normalizes_and_detects_clipping() {
        let disp = Dispersion::default();
        let src = bbo_800(&disp);
        let grid = auto_grid(&disp, &src).unwrap();
        assert!(grid.size.is_power_of_two());
        let jsa = build_jsa(&disp, &src, &grid).unwrap();
        assert!((jsa.norm() - 1.0).abs() < 1e-9);
        let tiny = FrequencyGrid::with_span(src.omega_c(), 0.02, 64).unwrap();
        assert!(matches!(build_jsa(&disp, &src, &tiny), Err(Error::SupportClipped { .. })));
    }

    #[test]
    fn unfiltered_two_photon_filter_is_identity() {
        let f = FilterSpec::unfiltered(2.0);
        assert_eq!(f.two_photon_filter(2.3, 1.7, 2.0), 1.0);
        assert_eq!(f.trigger_efficiency(5.0), 1.0);
    }

    #[test]
    fn rejects_inconsistent_pump_center() {
        let disp = Dispersion::default();
        let src = bbo_800(&disp);
        let pump = PumpSpec::from_fwhm(410.0, 5.0).unwrap();
        assert!(SourceSpec::new(src.crystal, 800.0, pump, src.filters, src.pmf).is_err());
    }
}
