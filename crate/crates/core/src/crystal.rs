//! Refractive indices, group velocities, phase mismatch and phasematching
//! angles for uniaxial crystals.
//!
//! The pump is always the extraordinary wave at the cut angle. Daughter
//! polarizations follow the phasematching type: type I is e→o+o, type II is
//! e→o+e with the heralded signal taking either daughter.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{find_root, scan_bracket};
use crate::sellmeier::{Material, Polarization, SellmeierTable};
use crate::units::{nm_from_omega, omega_from_nm, C_UM_PER_FS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PmType {
    #[serde(rename = "I")]
    TypeI,
    #[serde(rename = "II")]
    TypeII,
}

impl fmt::Display for PmType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PmType::TypeI => "I",
            PmType::TypeII => "II",
        })
    }
}

impl FromStr for PmType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "TYPEI" | "TYPE-I" | "1" => Ok(PmType::TypeI),
            "II" | "TYPEII" | "TYPE-II" | "2" => Ok(PmType::TypeII),
            other => Err(format!("unknown phasematching type `{other}` (expected I or II)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec {
    pub material: Material,
    pub cut_angle_deg: f64,
    pub length_mm: f64,
    pub pm_type: PmType,
    pub signal_polarization: Polarization,
}

impl CrystalSpec {
    pub fn new(
        material: Material,
        cut_angle_deg: f64,
        length_mm: f64,
        pm_type: PmType,
        signal_polarization: Polarization,
    ) -> Result<Self> {
        if !(length_mm > 0.0 && length_mm.is_finite()) {
            return Err(Error::invalid("length_mm", format!("must be positive, got {length_mm}")));
        }
        if !(0.0..=90.0).contains(&cut_angle_deg) {
            return Err(Error::invalid(
                "cut_angle_deg",
                format!("must lie in [0, 90], got {cut_angle_deg}"),
            ));
        }
        if pm_type == PmType::TypeI && signal_polarization != Polarization::Ordinary {
            return Err(Error::invalid(
                "signal_polarization",
                "type I daughters are both ordinary",
            ));
        }
        Ok(CrystalSpec {
            material,
            cut_angle_deg,
            length_mm,
            pm_type,
            signal_polarization,
        })
    }

    pub fn idler_polarization(&self) -> Polarization {
        match self.pm_type {
            PmType::TypeI => Polarization::Ordinary,
            PmType::TypeII => self.signal_polarization.other(),
        }
    }

    pub fn with_length(&self, length_mm: f64) -> Result<Self> {
        CrystalSpec::new(
            self.material,
            self.cut_angle_deg,
            length_mm,
            self.pm_type,
            self.signal_polarization,
        )
    }
}

/// Longitudinal walkoff between the pump and each daughter over the crystal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Walkoff {
    /// `L (k'_p(2ω_c) - k'_s(ω_c))`, fs.
    pub tau_s: f64,
    /// `L (k'_p(2ω_c) - k'_i(ω_c))`, fs.
    pub tau_i: f64,
}

impl Walkoff {
    pub fn tau_minus(&self) -> f64 {
        self.tau_s - self.tau_i
    }
}

/// Dispersion evaluator backed by a Sellmeier table. Cheap to clone.
#[derive(Debug, Clone)]
pub struct Dispersion {
    table: Arc<SellmeierTable>,
}

impl Default for Dispersion {
    fn default() -> Self {
        Dispersion::new(SellmeierTable::builtin().clone())
    }
}

impl Dispersion {
    pub fn new(table: SellmeierTable) -> Self {
        Dispersion {
            table: Arc::new(table),
        }
    }

    pub fn table(&self) -> &SellmeierTable {
        &self.table
    }

    /// `(n, dn/dλ)` with λ in µm, for the angle-tuned index when extraordinary.
    fn index_and_slope(
        &self,
        material: Material,
        polarization: Polarization,
        theta_deg: f64,
        lambda_nm: f64,
    ) -> Result<(f64, f64)> {
        let (no, dno) = self
            .table
            .principal(material, Polarization::Ordinary, lambda_nm)?;
        if polarization == Polarization::Ordinary {
            return Ok((no, dno));
        }
        let (ne, dne) = self
            .table
            .principal(material, Polarization::Extraordinary, lambda_nm)?;
        let (sin, cos) = theta_deg.to_radians().sin_cos();
        let (c2, s2) = (cos * cos, sin * sin);
        let u = c2 / (no * no) + s2 / (ne * ne);
        let du = -2.0 * c2 * dno / (no * no * no) - 2.0 * s2 * dne / (ne * ne * ne);
        let n = u.powf(-0.5);
        Ok((n, -0.5 * u.powf(-1.5) * du))
    }

    /// Refractive index; for extraordinary waves the index at angle `theta_deg` to the optic axis.
    pub fn refractive_index(
        &self,
        material: Material,
        polarization: Polarization,
        theta_deg: f64,
        lambda_nm: f64,
    ) -> Result<f64> {
        Ok(self
            .index_and_slope(material, polarization, theta_deg, lambda_nm)?
            .0)
    }

    /// Wavenumber `k = n ω / c` in rad/µm at angular frequency `omega` (rad/fs).
    pub fn wavenumber(
        &self,
        material: Material,
        polarization: Polarization,
        theta_deg: f64,
        omega: f64,
    ) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::invalid("omega", format!("must be positive, got {omega}")));
        }
        let n = self.refractive_index(material, polarization, theta_deg, nm_from_omega(omega))?;
        Ok(n * omega / C_UM_PER_FS)
    }

    /// `k' = dk/dω` in fs/mm, from the analytic Sellmeier derivative.
    pub fn inverse_group_velocity(
        &self,
        material: Material,
        polarization: Polarization,
        theta_deg: f64,
        lambda_nm: f64,
    ) -> Result<f64> {
        let (n, dn) = self.index_and_slope(material, polarization, theta_deg, lambda_nm)?;
        let group_index = n - lambda_nm * 1e-3 * dn;
        Ok(group_index / C_UM_PER_FS * 1e3)
    }

    /// Full phase mismatch `k_p(ω_s+ω_i) - k_s(ω_s) - k_i(ω_i)` in rad/µm.
    pub fn delta_k(&self, crystal: &CrystalSpec, omega_s: f64, omega_i: f64) -> Result<f64> {
        let m = crystal.material;
        let th = crystal.cut_angle_deg;
        let kp = self.wavenumber(m, Polarization::Extraordinary, th, omega_s + omega_i)?;
        let ks = self.wavenumber(m, crystal.signal_polarization, th, omega_s)?;
        let ki = self.wavenumber(m, crystal.idler_polarization(), th, omega_i)?;
        Ok(kp - ks - ki)
    }

    /// Walkoff times for degenerate emission at `lambda_c_nm` (pump at half the wavelength).
    pub fn walkoff_terms(&self, crystal: &CrystalSpec, lambda_c_nm: f64) -> Result<Walkoff> {
        let m = crystal.material;
        let th = crystal.cut_angle_deg;
        let kp = self.inverse_group_velocity(m, Polarization::Extraordinary, th, lambda_c_nm / 2.0)?;
        let ks = self.inverse_group_velocity(m, crystal.signal_polarization, th, lambda_c_nm)?;
        let ki = self.inverse_group_velocity(m, crystal.idler_polarization(), th, lambda_c_nm)?;
        Ok(Walkoff {
            tau_s: crystal.length_mm * (kp - ks),
            tau_i: crystal.length_mm * (kp - ki),
        })
    }

    /// Cut angle at which collinear degenerate emission at `lambda_c_nm` is phasematched.
    pub fn phasematch_angle(
        &self,
        material: Material,
        pm_type: PmType,
        lambda_c_nm: f64,
    ) -> Result<f64> {
        let omega_c = omega_from_nm(lambda_c_nm);
        let mismatch = |theta: f64| -> Result<f64> {
            // the degenerate mismatch does not depend on which type II daughter is heralded
            let crystal = CrystalSpec {
                material,
                cut_angle_deg: theta,
                length_mm: 1.0,
                pm_type,
                signal_polarization: Polarization::Ordinary,
            };
            self.delta_k(&crystal, omega_c, omega_c)
        };
        let (lo, hi) = (1e-6, 90.0 - 1e-6);
        let bracket = scan_bracket(mismatch, lo, hi, 90)?.ok_or_else(|| {
            Error::NotPhasematchable(format!(
                "{material} type {pm_type} at {lambda_c_nm} nm: no sign change of Δk on (0°, 90°)"
            ))
        })?;
        find_root(mismatch, bracket, 1e-13, 1e-12)
    }

    /// Type II signal assignment that puts the heralded photon closer to the
    /// pump group velocity (smaller |τ_s|). Type I always returns ordinary.
    pub fn auto_signal_polarization(
        &self,
        material: Material,
        pm_type: PmType,
        theta_deg: f64,
        lambda_c_nm: f64,
    ) -> Result<Polarization> {
        if pm_type == PmType::TypeI {
            return Ok(Polarization::Ordinary);
        }
        let kp = self.inverse_group_velocity(
            material,
            Polarization::Extraordinary,
            theta_deg,
            lambda_c_nm / 2.0,
        )?;
        let ko = self.inverse_group_velocity(material, Polarization::Ordinary, theta_deg, lambda_c_nm)?;
        let ke = self.inverse_group_velocity(
            material,
            Polarization::Extraordinary,
            theta_deg,
            lambda_c_nm,
        )?;
        Ok(if (kp - ko).abs() <= (kp - ke).abs() {
            Polarization::Ordinary
        } else {
            Polarization::Extraordinary
        })
    }

    /// Frequency interval (rad/fs) inside which every wave of the crystal has dispersion data.
    pub fn omega_range(&self, material: Material) -> Result<(f64, f64)> {
        let (lo_nm, hi_nm) = self.table.range_nm(material)?;
        Ok((omega_from_nm(hi_nm), omega_from_nm(lo_nm)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disp() -> Dispersion {
        Dispersion::default()
    }

    #[test]
    fn extraordinary_limits() {
        let d = disp();
        let no = d.refractive_index(Material::Bbo, Polarization::Ordinary, 0.0, 800.0).unwrap();
        let e0 = d.refractive_index(Material::Bbo, Polarization::Extraordinary, 0.0, 800.0).unwrap();
        assert!((no - e0).abs() < 1e-15);
        let e90 = d.refractive_index(Material::Bbo, Polarization::Extraordinary, 90.0, 800.0).unwrap();
        let (ne, _) = d
            .table()
            .principal(Material::Bbo, Polarization::Extraordinary, 800.0)
            .unwrap();
        assert!((e90 - ne).abs() < 1e-14);
    }

    #[test]
    fn bbo_ordinary_regression_values() {
        // frozen from an independent REPL evaluation of the Kato set
        let d = disp();
        let n = d.refractive_index(Material::Bbo, Polarization::Ordinary, 0.0, 800.0).unwrap();
        assert!((n - 1.660_553_524_880_645).abs() < 1e-12);
        let kp = d
            .inverse_group_velocity(Material::Bbo, Polarization::Ordinary, 0.0, 800.0)
            .unwrap();
        assert!((kp - 5_618.866_816).abs() < 1e-3, "k' = {kp}");
    }

    #[test]
    fn group_velocity_matches_finite_difference() {
        let d = disp();
        let h = 1e-4;
        for (m, p, th, l) in [
            (Material::Bbo, Polarization::Extraordinary, 42.3, 800.0),
            (Material::Kdp, Polarization::Ordinary, 67.7, 830.0),
            (Material::Kdp, Polarization::Extraordinary, 67.7, 415.0),
        ] {
            let w = omega_from_nm(l);
            let fd = (d.wavenumber(m, p, th, w + h).unwrap() - d.wavenumber(m, p, th, w - h).unwrap())
                / (2.0 * h)
                * 1e3;
            let an = d.inverse_group_velocity(m, p, th, l).unwrap();
            assert!(((fd - an) / an).abs() < 1e-6, "{m} {p}: {fd} vs {an}");
        }
    }

    #[test]
    fn phasematching_angles_near_quoted_cuts() {
        let d = disp();
        for (m, t, l, expect) in [
            (Material::Bbo, PmType::TypeII, 800.0, 42.3),
            (Material::Bbo, PmType::TypeI, 800.0, 29.2),
            (Material::Kdp, PmType::TypeII, 830.0, 67.7),
            (Material::Bbo, PmType::TypeII, 1514.0, 28.8),
        ] {
            let th = d.phasematch_angle(m, t, l).unwrap();
            assert!((th - expect).abs() < 0.5, "{m} {t} {l}: {th}");
            let c = CrystalSpec::new(m, th, 1.0, t, Polarization::Ordinary).unwrap();
            let w = omega_from_nm(l);
            assert!(d.delta_k(&c, w, w).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn unphasematchable_is_reported() {
        // KDP cannot phasematch type II at its short-wavelength range edge
        let err = disp().phasematch_angle(Material::Kdp, PmType::TypeII, 710.0).unwrap_err();
        assert!(matches!(err, Error::NotPhasematchable(_)), "{err}");
    }

    #[test]
    fn walkoff_examples() {
        let d = disp();
        let th = d.phasematch_angle(Material::Kdp, PmType::TypeII, 830.0).unwrap();
        let c = CrystalSpec::new(Material::Kdp, th, 20.0, PmType::TypeII, Polarization::Ordinary).unwrap();
        let w = d.walkoff_terms(&c, 830.0).unwrap();
        assert!(w.tau_s.abs() < 0.05 * w.tau_i.abs(), "{w:?}");

        let th = d.phasematch_angle(Material::Bbo, PmType::TypeII, 1514.0).unwrap();
        let c = CrystalSpec::new(Material::Bbo, th, 2.3, PmType::TypeII, Polarization::Ordinary).unwrap();
        let w = d.walkoff_terms(&c, 1514.0).unwrap();
        assert!((w.tau_s + w.tau_i).abs() < 0.05 * w.tau_i.abs(), "{w:?}");

        let th = d.phasematch_angle(Material::Bbo, PmType::TypeI, 800.0).unwrap();
        let c = CrystalSpec::new(Material::Bbo, th, 5.0, PmType::TypeI, Polarization::Ordinary).unwrap();
        let w = d.walkoff_terms(&c, 800.0).unwrap();
        assert_eq!(w.tau_s, w.tau_i);
        assert_eq!(w.tau_minus(), 0.0);
    }

    #[test]
    fn exchange_symmetry_of_mismatch() {
        let d = disp();
        let w = omega_from_nm(800.0);
        let t1 = CrystalSpec::new(Material::Bbo, 29.2, 5.0, PmType::TypeI, Polarization::Ordinary).unwrap();
        let a = d.delta_k(&t1, w + 0.01, w - 0.02).unwrap();
        let b = d.delta_k(&t1, w - 0.02, w + 0.01).unwrap();
        assert_eq!(a, b);
        let t2 = CrystalSpec::new(Material::Bbo, 41.0, 5.0, PmType::TypeII, Polarization::Ordinary).unwrap();
        let a = d.delta_k(&t2, w + 0.01, w - 0.02).unwrap();
        let b = d.delta_k(&t2, w - 0.02, w + 0.01).unwrap();
        assert!((a - b).abs() > 1e-6);
    }

    #[test]
    fn type_i_rejects_extraordinary_signal() {
        assert!(CrystalSpec::new(Material::Bbo, 29.0, 1.0, PmType::TypeI, Polarization::Extraordinary).is_err());
        assert!(CrystalSpec::new(Material::Bbo, 29.0, 0.0, PmType::TypeII, Polarization::Ordinary).is_err());
        assert!(CrystalSpec::new(Material::Bbo, 91.0, 1.0, PmType::TypeII, Polarization::Ordinary).is_err());
    }

    #[test]
    fn auto_assignment_prefers_group_matched_daughter() {
        let d = disp();
        let th = d.phasematch_angle(Material::Kdp, PmType::TypeII, 830.0).unwrap();
        assert_eq!(
            d.auto_signal_polarization(Material::Kdp, PmType::TypeII, th, 830.0).unwrap(),
            Polarization::Ordinary
        );
    }
}
