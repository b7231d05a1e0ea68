//! Closed-form heralded-photon properties when the sinc phasematching
//! function is replaced by `exp(-γ x²)` and the mismatch is kept to first order.
//!
//! All widths are amplitude e⁻¹ half-widths of the Gaussian factors of the
//! chronocyclic Wigner function. `T_si²` is a signed quantity and only its
//! square enters the formulas.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::crystal::Walkoff;
use crate::error::{Error, Result};
use crate::state::FilterSpec;
use crate::wigner::ChronocyclicWigner;

/// `sinc(x) ≈ exp(-γ x²)`.
pub const GAMMA: f64 = 0.193;

/// Width of a Gaussian filter; `Unfiltered` stands for an infinite width.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FilterWidth {
    #[default]
    Unfiltered,
    Gaussian(f64),
}

impl FilterWidth {
    /// `1/w²`, zero when unfiltered.
    pub fn inverse_square(self) -> f64 {
        match self {
            FilterWidth::Unfiltered => 0.0,
            FilterWidth::Gaussian(w) => 1.0 / (w * w),
        }
    }

    pub fn validate(self, name: &'static str) -> Result<()> {
        match self {
            FilterWidth::Gaussian(w) if !(w > 0.0 && w.is_finite()) => {
                Err(Error::invalid(name, format!("width must be positive or inf, got {w}")))
            }
            _ => Ok(()),
        }
    }

    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(FilterWidth::Unfiltered);
        }
        let w: f64 = s.parse().map_err(|_| format!("expected a width in rad/fs or `inf`, got `{s}`"))?;
        if w.is_infinite() && w > 0.0 {
            return Ok(FilterWidth::Unfiltered);
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(format!("width must be positive, got {w}"));
        }
        Ok(FilterWidth::Gaussian(w))
    }
}

impl std::fmt::Display for FilterWidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FilterWidth::Unfiltered => f.write_str("inf"),
            FilterWidth::Gaussian(w) => write!(f, "{w}"),
        }
    }
}

impl Serialize for FilterWidth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FilterWidth::Unfiltered => s.serialize_str("inf"),
            FilterWidth::Gaussian(w) => s.serialize_f64(*w),
        }
    }
}

impl<'de> Deserialize<'de> for FilterWidth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(w) => FilterWidth::parse(&w.to_string()).map_err(de::Error::custom),
            Raw::Text(t) => FilterWidth::parse(&t).map_err(de::Error::custom),
        }
    }
}

/// `T_ss²`, `T_ii²`, `T_si²` in fs².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub tss2: f64,
    pub tii2: f64,
    pub tsi2: f64,
}

impl Moments {
    /// `T_ss² T_ii² - T_si⁴`; positive for a physical state.
    pub fn determinant(&self) -> f64 {
        self.tss2 * self.tii2 - self.tsi2 * self.tsi2
    }

    fn checked_determinant(&self) -> Result<f64> {
        let det = self.determinant();
        if det > 0.0 && self.tss2 > 0.0 && self.tii2 > 0.0 {
            Ok(det)
        } else {
            Err(Error::DegenerateState { determinant: det })
        }
    }
}

/// Second-moment coefficients of the Gaussian JSA.
pub fn second_moments(sigma: f64, filters: &FilterSpec, tau_s: f64, tau_i: f64) -> Moments {
    let pump = 2.0 / (sigma * sigma);
    let two_photon = 2.0 * filters.two_photon.inverse_square();
    let trigger = filters.trigger.inverse_square();
    Moments {
        tss2: two_photon + pump + GAMMA * tau_s * tau_s / 2.0,
        tii2: trigger + two_photon + pump + GAMMA * tau_i * tau_i / 2.0,
        tsi2: pump + GAMMA * tau_s * tau_i / 2.0,
    }
}

/// `(Δt, Δω)` of the heralded photon.
pub fn widths(m: &Moments) -> Result<(f64, f64)> {
    let det = m.checked_determinant()?;
    Ok((m.tss2.sqrt(), m.tii2.sqrt() / det.sqrt()))
}

/// e⁻¹ half-widths of the unconditioned signal and idler spectral marginals.
pub fn marginal_spectral_widths(m: &Moments) -> Result<(f64, f64)> {
    let det = m.checked_determinant()?;
    Ok((m.tii2.sqrt() / det.sqrt(), m.tss2.sqrt() / det.sqrt()))
}

/// Temporal shift `T = τ_s/2` and spectral shift `Ω`; the spectrum peaks at `ω_c - Ω`.
pub fn shifts(tau_s: f64, filters: &FilterSpec, omega_c: f64, m: &Moments) -> Result<(f64, f64)> {
    let det = m.checked_determinant()?;
    let omega = filters.trigger.inverse_square() * m.tsi2 / det * (filters.trigger_center - omega_c);
    Ok((tau_s / 2.0, omega))
}

/// `TB = (1 - T_si⁴ / (T_ss² T_ii²))^(-1/2)`.
pub fn time_bandwidth(m: &Moments) -> Result<f64> {
    let det = m.checked_determinant()?;
    Ok((m.tss2 * m.tii2 / det).sqrt())
}

/// Width of the emission-time difference distribution.
pub fn correlation_time(two_photon: FilterWidth, tau_s: f64, tau_i: f64) -> f64 {
    let tm = tau_i - tau_s;
    match two_photon {
        FilterWidth::Unfiltered => (GAMMA / 2.0).sqrt() * tm.abs(),
        FilterWidth::Gaussian(w) => (8.0 + GAMMA * w * w * tm * tm).sqrt() / (2f64.sqrt() * w),
    }
}

/// Heralded duration written in terms of the pump duration (no trigger filter).
pub fn heralded_duration_vs_pump(tau_p: f64, two_photon: FilterWidth, tau_s: f64) -> f64 {
    let filter = 2.0 * two_photon.inverse_square() / (tau_p * tau_p);
    tau_p * (1.0 + filter + GAMMA / 2.0 * tau_s * tau_s / (tau_p * tau_p)).sqrt()
}

/// Time-bandwidth product in the narrow-pump limit, `2 / (√γ σ |τ_-|)`.
pub fn cw_limit_time_bandwidth(sigma: f64, tau_minus: f64) -> f64 {
    2.0 / (GAMMA.sqrt() * sigma * tau_minus.abs())
}

/// All closed-form outputs for one source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianReport {
    #[serde(rename = "tss2_fs2")]
    pub tss2: f64,
    #[serde(rename = "tii2_fs2")]
    pub tii2: f64,
    #[serde(rename = "tsi2_fs2")]
    pub tsi2: f64,
    #[serde(rename = "delta_t_fs")]
    pub delta_t: f64,
    #[serde(rename = "delta_omega_rad_per_fs")]
    pub delta_omega: f64,
    pub tb: f64,
    #[serde(rename = "t_shift_fs")]
    pub t_shift: f64,
    #[serde(rename = "omega_shift_rad_per_fs")]
    pub omega_shift: f64,
    #[serde(rename = "tau_c_fs")]
    pub tau_c: f64,
    #[serde(rename = "tau_p_fs")]
    pub tau_p: f64,
    #[serde(rename = "tau_s_fs")]
    pub tau_s: f64,
    #[serde(rename = "tau_i_fs")]
    pub tau_i: f64,
    #[serde(rename = "omega_c_rad_per_fs")]
    pub omega_c: f64,
    pub gamma: f64,
}

impl GaussianReport {
    pub fn new(sigma: f64, filters: &FilterSpec, walkoff: Walkoff, omega_c: f64) -> Result<Self> {
        let m = second_moments(sigma, filters, walkoff.tau_s, walkoff.tau_i);
        let (delta_t, delta_omega) = widths(&m)?;
        let (t_shift, omega_shift) = shifts(walkoff.tau_s, filters, omega_c, &m)?;
        Ok(GaussianReport {
            tss2: m.tss2,
            tii2: m.tii2,
            tsi2: m.tsi2,
            delta_t,
            delta_omega,
            tb: time_bandwidth(&m)?,
            t_shift,
            omega_shift,
            tau_c: correlation_time(filters.two_photon, walkoff.tau_s, walkoff.tau_i),
            tau_p: 2f64.sqrt() / sigma,
            tau_s: walkoff.tau_s,
            tau_i: walkoff.tau_i,
            omega_c,
            gamma: GAMMA,
        })
    }

    pub fn moments(&self) -> Moments {
        Moments {
            tss2: self.tss2,
            tii2: self.tii2,
            tsi2: self.tsi2,
        }
    }

    /// Spectral peak position `ω_c - Ω`.
    pub fn peak_omega(&self) -> f64 {
        self.omega_c - self.omega_shift
    }

    pub fn wigner_at(&self, omega: f64, t: f64) -> f64 {
        let a = (omega - self.omega_c + self.omega_shift) / self.delta_omega;
        let b = (t - self.t_shift) / self.delta_t;
        (-(a * a) - b * b).exp() / (PI * self.delta_omega * self.delta_t)
    }
}

/// Samples the closed-form CWF on the given axes.
pub fn analytic_cwf(report: &GaussianReport, omega_axis: &[f64], t_axis: &[f64]) -> ChronocyclicWigner {
    let values = Array2::from_shape_fn((omega_axis.len(), t_axis.len()), |(j, k)| {
        report.wigner_at(omega_axis[j], t_axis[k])
    });
    ChronocyclicWigner {
        omega: omega_axis.to_vec(),
        t: t_axis.to_vec(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unfiltered() -> FilterSpec {
        FilterSpec::unfiltered(2.0)
    }

    #[test]
    fn no_walkoff_gives_pump_limited_moments() {
        let m = second_moments(0.05, &unfiltered(), 0.0, 0.0);
        let p = 2.0 / 0.0025;
        for v in [m.tss2, m.tii2, m.tsi2] {
            assert!((v - p).abs() < 1e-9 * p);
        }
        assert!(matches!(widths(&m), Err(Error::DegenerateState { .. })));
    }

    #[test]
    fn sgvm_cancellation() {
        let sigma = 0.04;
        let tau = 2.0 / (GAMMA.sqrt() * sigma);
        let m = second_moments(sigma, &unfiltered(), -tau, tau);
        assert!(m.tsi2.abs() < 1e-9);
        assert!((time_bandwidth(&m).unwrap() - 1.0).abs() < 1e-12);
        let (dt, dw) = widths(&m).unwrap();
        assert!((dw - 1.0 / dt).abs() < 1e-15);
        // Δt = √2 τ_p at the factorable point
        assert!((dt - 2f64.sqrt() * 2f64.sqrt() / sigma).abs() < 1e-9);
    }

    #[test]
    fn time_bandwidth_equals_product_of_widths() {
        let m = second_moments(0.05, &unfiltered(), 400.0, 1370.0);
        let (dt, dw) = widths(&m).unwrap();
        assert!((dt * dw - time_bandwidth(&m).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn shifts_vanish_without_detuning_or_correlation() {
        let mut f = unfiltered();
        f.trigger = FilterWidth::Gaussian(0.01);
        let m = second_moments(0.05, &f, 400.0, 1370.0);
        assert_eq!(shifts(400.0, &f, 2.0, &m).unwrap().1, 0.0);
        f.trigger_center = 2.05;
        assert!(shifts(400.0, &f, 2.0, &m).unwrap().1 > 0.0);
        let m0 = Moments { tsi2: 0.0, ..m };
        assert_eq!(shifts(400.0, &f, 2.0, &m0).unwrap().1, 0.0);
        assert_eq!(shifts(0.0, &f, 2.0, &m).unwrap().0, 0.0);
    }

    #[test]
    fn correlation_time_limits() {
        assert_eq!(correlation_time(FilterWidth::Unfiltered, 900.0, 900.0), 0.0);
        let filtered = correlation_time(FilterWidth::Gaussian(1e6), 0.0, 2888.0);
        let open = correlation_time(FilterWidth::Unfiltered, 0.0, 2888.0);
        assert!((filtered - open).abs() / open < 1e-6);
        assert!((open - (GAMMA / 2.0).sqrt() * 2888.0).abs() < 1e-9);
    }

    #[test]
    fn duration_vs_pump_limits() {
        assert_eq!(heralded_duration_vs_pump(30.0, FilterWidth::Unfiltered, 0.0), 30.0);
        let long = heralded_duration_vs_pump(30.0, FilterWidth::Unfiltered, 1e6);
        assert!((long / ((GAMMA / 2.0).sqrt() * 1e6) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn filter_width_parsing() {
        assert_eq!(FilterWidth::parse("inf").unwrap(), FilterWidth::Unfiltered);
        assert_eq!(FilterWidth::parse(" 0.02 ").unwrap(), FilterWidth::Gaussian(0.02));
        assert!(FilterWidth::parse("-1").is_err());
        assert!(FilterWidth::parse("wide").is_err());
        let json = serde_json::to_string(&[FilterWidth::Unfiltered, FilterWidth::Gaussian(0.5)]).unwrap();
        assert_eq!(json, r#"["inf",0.5]"#);
        let back: Vec<FilterWidth> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![FilterWidth::Unfiltered, FilterWidth::Gaussian(0.5)]);
    }

    #[test]
    fn analytic_cwf_normalization_and_peak() {
        let w = Walkoff { tau_s: 400.0, tau_i: 1370.0 };
        let mut f = unfiltered();
        f.trigger = FilterWidth::Gaussian(0.03);
        f.trigger_center = 2.02;
        let r = GaussianReport::new(0.05, &f, w, 2.0).unwrap();
        let n = 401;
        let omega: Vec<f64> = (0..n).map(|j| r.peak_omega() + (j as f64 - 200.0) * r.delta_omega / 25.0).collect();
        let t: Vec<f64> = (0..n).map(|k| r.t_shift + (k as f64 - 200.0) * r.delta_t / 25.0).collect();
        let cwf = analytic_cwf(&r, &omega, &t);
        let integral = cwf.values.sum() * (omega[1] - omega[0]) * (t[1] - t[0]);
        assert!((integral - 1.0).abs() < 1e-6, "{integral}");
        let (idx, _) = cwf
            .values
            .indexed_iter()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(idx, (200, 200));
    }
}
