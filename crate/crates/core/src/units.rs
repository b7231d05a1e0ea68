//! Unit conventions shared by every module.
//!
//! Wavelengths are in nanometres, angular frequencies in rad/fs, crystal
//! lengths in millimetres, wavenumbers in rad/µm and times in femtoseconds.

use std::f64::consts::PI;

/// Speed of light in nm/fs.
pub const C_NM_PER_FS: f64 = 299.792_458;

/// Speed of light in µm/fs.
pub const C_UM_PER_FS: f64 = 0.299_792_458;

/// Angular frequency (rad/fs) of a vacuum wavelength in nm.
pub fn omega_from_nm(lambda_nm: f64) -> f64 {
    2.0 * PI * C_NM_PER_FS / lambda_nm
}

/// Vacuum wavelength (nm) of an angular frequency in rad/fs.
pub fn nm_from_omega(omega: f64) -> f64 {
    2.0 * PI * C_NM_PER_FS / omega
}

/// Reporting unit for spectral widths: 10^12 rad/s.
pub fn rad_per_fs_to_thz(omega: f64) -> f64 {
    omega * 1.0e3
}

pub fn thz_to_rad_per_fs(thz: f64) -> f64 {
    thz * 1.0e-3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_round_trip() {
        for lambda in [350.0, 800.0, 1514.0] {
            assert!((nm_from_omega(omega_from_nm(lambda)) - lambda).abs() < 1e-9);
        }
        // 800 nm sits at 2.3546 rad/fs
        assert!((omega_from_nm(800.0) - 2.354_564_5).abs() < 1e-6);
    }
}
