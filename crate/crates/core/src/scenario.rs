//! Plain-text scenario files: one `key = value` per line, `#` starts a comment.
//!
//! Required keys: `material`, `pm_type`, `length_mm`, `lambda_c_nm`,
//! `pump_fwhm_nm`. Everything else has a default:
//!
//! | key                   | default   |
//! |-----------------------|-----------|
//! | `cut_angle_deg`       | `auto`    |
//! | `signal_polarization` | `auto`    |
//! | `sigma_F`             | `inf`     |
//! | `sigma_g`             | `inf`     |
//! | `omega_g0`            | `center`  |
//! | `grid_N`              | `auto`    |
//! | `grid_span`           | `auto`    |
//! | `pmf`                 | `sinc`    |
//! | `mismatch`            | `full`    |
//! | `analytic`, `numerical`, `schmidt`, `joint_temporal` | `true` |
//! | `contour_level`       | `0.36787944117144233` (e⁻¹) |
//! | `output_dir`          | unset     |
//!
//! Filter widths and `grid_span` are in rad/fs, `omega_g0` in rad/fs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::crystal::{CrystalSpec, Dispersion, PmType};
use crate::error::{Error, Result};
use crate::gaussian::FilterWidth;
use crate::sellmeier::{Material, Polarization};
use crate::state::{
    auto_grid, FilterSpec, FrequencyGrid, Mismatch, PmfModel, PmfShape, PumpSpec, SourceSpec,
};
use crate::wigner::E_INV;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Auto<T> {
    Auto,
    Value(T),
}

impl<T: fmt::Display> fmt::Display for Auto<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Auto::Auto => f.write_str("auto"),
            Auto::Value(v) => v.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TriggerCenter {
    /// Degenerate frequency `ω_c`.
    Center,
    Omega(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub material: Material,
    pub pm_type: PmType,
    pub cut_angle_deg: Auto<f64>,
    pub length_mm: f64,
    pub lambda_c_nm: f64,
    pub pump_fwhm_nm: f64,
    pub sigma_f: FilterWidth,
    pub sigma_g: FilterWidth,
    pub omega_g0: TriggerCenter,
    pub grid_n: Auto<usize>,
    pub grid_span: Auto<f64>,
    pub signal_polarization: Auto<Polarization>,
    pub pmf: PmfShape,
    pub mismatch: Mismatch,
    pub output_dir: Option<PathBuf>,
    pub analytic: bool,
    pub numerical: bool,
    pub schmidt: bool,
    pub joint_temporal: bool,
    pub contour_level: f64,
}

const KEYS: &[&str] = &[
    "material",
    "pm_type",
    "cut_angle_deg",
    "length_mm",
    "lambda_c_nm",
    "pump_fwhm_nm",
    "sigma_F",
    "sigma_g",
    "omega_g0",
    "grid_N",
    "grid_span",
    "signal_polarization",
    "pmf",
    "mismatch",
    "output_dir",
    "analytic",
    "numerical",
    "schmidt",
    "joint_temporal",
    "contour_level",
];

const REQUIRED: &[&str] = &["material", "pm_type", "length_mm", "lambda_c_nm", "pump_fwhm_nm"];

impl ScenarioConfig {
    /// A scenario with every optional key at its default.
    pub fn new(
        material: Material,
        pm_type: PmType,
        length_mm: f64,
        lambda_c_nm: f64,
        pump_fwhm_nm: f64,
    ) -> Self {
        ScenarioConfig {
            material,
            pm_type,
            cut_angle_deg: Auto::Auto,
            length_mm,
            lambda_c_nm,
            pump_fwhm_nm,
            sigma_f: FilterWidth::Unfiltered,
            sigma_g: FilterWidth::Unfiltered,
            omega_g0: TriggerCenter::Center,
            grid_n: Auto::Auto,
            grid_span: Auto::Auto,
            signal_polarization: Auto::Auto,
            pmf: PmfShape::Sinc,
            mismatch: Mismatch::Full,
            output_dir: None,
            analytic: true,
            numerical: true,
            schmidt: true,
            joint_temporal: true,
            contour_level: E_INV,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut seen: BTreeMap<&str, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(lineno, format!("expected `key = value`, found `{line}`")))?;
            let key = key.trim();
            let key = KEYS
                .iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| err(lineno, format!("unknown key `{key}`")))?;
            if let Some((first, _)) = seen.get(key) {
                return Err(err(lineno, format!("duplicate key `{key}` (first set on line {first})")));
            }
            seen.insert(key, (lineno, value.trim().to_string()));
        }
        for key in REQUIRED {
            if !seen.contains_key(key) {
                return Err(err(0, format!("missing required key `{key}`")));
            }
        }

        fn field<T>(
            seen: &BTreeMap<&str, (usize, String)>,
            key: &str,
            err: &dyn Fn(usize, String) -> Error,
            parse: impl Fn(&str) -> std::result::Result<T, String>,
        ) -> Result<Option<T>> {
            match seen.get(key) {
                None => Ok(None),
                Some((line, value)) => parse(value)
                    .map(Some)
                    .map_err(|m| err(*line, format!("`{key}`: {m}"))),
            }
        }
        let f = |key: &str| -> Result<Option<f64>> { field(&seen, key, &err, positive) };
        let flag = |key: &str, default: bool| -> Result<bool> {
            Ok(field(&seen, key, &err, parse_bool)?.unwrap_or(default))
        };
        let width = |key: &str| -> Result<FilterWidth> {
            Ok(field(&seen, key, &err, FilterWidth::parse)?.unwrap_or_default())
        };

        let material = field(&seen, "material", &err, |s| s.parse())?.expect("required");
        let pm_type = field(&seen, "pm_type", &err, |s| s.parse())?.expect("required");
        let mut cfg = ScenarioConfig::new(
            material,
            pm_type,
            f("length_mm")?.expect("required"),
            f("lambda_c_nm")?.expect("required"),
            f("pump_fwhm_nm")?.expect("required"),
        );
        cfg.cut_angle_deg = field(&seen, "cut_angle_deg", &err, |s| {
            auto_or(s, |v| {
                let a: f64 = v.parse().map_err(|_| format!("expected degrees or `auto`, got `{v}`"))?;
                if (0.0..=90.0).contains(&a) {
                    Ok(a)
                } else {
                    Err(format!("angle {a} outside [0, 90] degrees"))
                }
            })
        })?
        .unwrap_or(Auto::Auto);
        cfg.sigma_f = width("sigma_F")?;
        cfg.sigma_g = width("sigma_g")?;
        cfg.omega_g0 = field(&seen, "omega_g0", &err, |s| {
            if s.eq_ignore_ascii_case("center") {
                Ok(TriggerCenter::Center)
            } else {
                positive(s).map(TriggerCenter::Omega)
            }
        })?
        .unwrap_or(TriggerCenter::Center);
        cfg.grid_n = field(&seen, "grid_N", &err, |s| {
            auto_or(s, |v| {
                let n: usize = v.parse().map_err(|_| format!("expected an integer or `auto`, got `{v}`"))?;
                if n >= 64 && n.is_power_of_two() {
                    Ok(n)
                } else {
                    Err(format!("grid size must be a power of two ≥ 64, got {n}"))
                }
            })
        })?
        .unwrap_or(Auto::Auto);
        cfg.grid_span = field(&seen, "grid_span", &err, |s| auto_or(s, positive))?.unwrap_or(Auto::Auto);
        cfg.signal_polarization =
            field(&seen, "signal_polarization", &err, |s| auto_or(s, |v| v.parse()))?.unwrap_or(Auto::Auto);
        cfg.pmf = field(&seen, "pmf", &err, |s| s.parse())?.unwrap_or_default();
        cfg.mismatch = field(&seen, "mismatch", &err, |s| s.parse())?.unwrap_or_default();
        cfg.output_dir = field(&seen, "output_dir", &err, |s| Ok(PathBuf::from(s)))?;
        cfg.analytic = flag("analytic", true)?;
        cfg.numerical = flag("numerical", true)?;
        cfg.schmidt = flag("schmidt", true)?;
        cfg.joint_temporal = flag("joint_temporal", true)?;
        cfg.contour_level = field(&seen, "contour_level", &err, |s| {
            let v: f64 = s.parse().map_err(|_| format!("expected a number, got `{s}`"))?;
            if v > 0.0 && v < 1.0 {
                Ok(v)
            } else {
                Err(format!("level must lie in (0, 1), got {v}"))
            }
        })?
        .unwrap_or(E_INV);
        if cfg.pm_type == PmType::TypeI && cfg.signal_polarization == Auto::Value(Polarization::Extraordinary) {
            let line = seen["signal_polarization"].0;
            return Err(err(line, "type I daughters are both ordinary".into()));
        }
        Ok(cfg)
    }

    /// Key/value pairs that parse back to this scenario.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("material", self.material.to_string());
        put("pm_type", self.pm_type.to_string());
        put("cut_angle_deg", self.cut_angle_deg.to_string());
        put("length_mm", self.length_mm.to_string());
        put("lambda_c_nm", self.lambda_c_nm.to_string());
        put("pump_fwhm_nm", self.pump_fwhm_nm.to_string());
        put("sigma_F", self.sigma_f.to_string());
        put("sigma_g", self.sigma_g.to_string());
        put(
            "omega_g0",
            match self.omega_g0 {
                TriggerCenter::Center => "center".into(),
                TriggerCenter::Omega(w) => w.to_string(),
            },
        );
        put("grid_N", self.grid_n.to_string());
        put("grid_span", self.grid_span.to_string());
        put(
            "signal_polarization",
            match self.signal_polarization {
                Auto::Auto => "auto".into(),
                Auto::Value(p) => p.to_string(),
            },
        );
        put("pmf", self.pmf.to_string());
        put("mismatch", self.mismatch.to_string());
        if let Some(dir) = &self.output_dir {
            put("output_dir", dir.display().to_string());
        }
        put("analytic", self.analytic.to_string());
        put("numerical", self.numerical.to_string());
        put("schmidt", self.schmidt.to_string());
        put("joint_temporal", self.joint_temporal.to_string());
        put("contour_level", self.contour_level.to_string());
        m
    }

    /// Fills in angle, polarization and grid.
    pub fn resolve(&self, disp: &Dispersion) -> Result<ResolvedScenario> {
        let angle = match self.cut_angle_deg {
            Auto::Auto => disp.phasematch_angle(self.material, self.pm_type, self.lambda_c_nm)?,
            Auto::Value(a) => a,
        };
        let signal = match self.signal_polarization {
            Auto::Auto => disp.auto_signal_polarization(self.material, self.pm_type, angle, self.lambda_c_nm)?,
            Auto::Value(p) => p,
        };
        let crystal = CrystalSpec::new(self.material, angle, self.length_mm, self.pm_type, signal)?;
        let pump = PumpSpec::from_fwhm(self.lambda_c_nm / 2.0, self.pump_fwhm_nm)?;
        let omega_c = crate::units::omega_from_nm(self.lambda_c_nm);
        let filters = FilterSpec {
            two_photon: self.sigma_f,
            trigger: self.sigma_g,
            trigger_center: match self.omega_g0 {
                TriggerCenter::Center => omega_c,
                TriggerCenter::Omega(w) => w,
            },
        };
        let source = SourceSpec::new(
            crystal,
            self.lambda_c_nm,
            pump,
            filters,
            PmfModel {
                shape: self.pmf,
                mismatch: self.mismatch,
            },
        )?;
        let grid = match (self.grid_n, self.grid_span) {
            (Auto::Value(n), Auto::Value(span)) => FrequencyGrid::with_span(omega_c, span, n)?,
            (n, span) => {
                let auto = auto_grid(disp, &source)?;
                let span = match span {
                    Auto::Value(s) => s,
                    Auto::Auto => auto.span(),
                };
                let n = match n {
                    Auto::Value(n) => n,
                    Auto::Auto => auto.size,
                };
                FrequencyGrid::with_span(omega_c, span, n)?
            }
        };
        Ok(ResolvedScenario { source, grid })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScenario {
    pub source: SourceSpec,
    pub grid: FrequencyGrid,
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.echo() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got `{s}`"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {v}"))
    }
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

fn auto_or<T>(s: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Auto<T>, String> {
    if s.eq_ignore_ascii_case("auto") {
        Ok(Auto::Auto)
    } else {
        parse(s).map(Auto::Value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::parse(text, Path::new("test.txt"))
    }

    const KDP: &str = "\
# AGVM source
material = KDP
pm_type = II
length_mm = 20
lambda_c_nm = 830
pump_fwhm_nm = 5
";

    #[test]
    fn defaults() {
        let c = parse(KDP).unwrap();
        assert_eq!(c.material, Material::Kdp);
        assert_eq!(c.cut_angle_deg, Auto::Auto);
        assert_eq!(c.sigma_f, FilterWidth::Unfiltered);
        assert_eq!(c.omega_g0, TriggerCenter::Center);
        assert!(c.analytic && c.numerical && c.schmidt && c.joint_temporal);
        assert_eq!(c.contour_level, E_INV);
    }

    #[test]
    fn echo_parses_back() {
        let mut c = parse(KDP).unwrap();
        c.sigma_g = FilterWidth::Gaussian(0.01);
        c.omega_g0 = TriggerCenter::Omega(2.3);
        c.grid_n = Auto::Value(512);
        c.cut_angle_deg = Auto::Value(67.7);
        c.signal_polarization = Auto::Value(Polarization::Ordinary);
        c.output_dir = Some(PathBuf::from("out/kdp"));
        c.joint_temporal = false;
        let back = parse(&c.to_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_name_the_key_and_line() {
        let e = parse(&format!("{KDP}lenght_mm = 3\n")).unwrap_err();
        assert!(e.is_parse());
        assert!(e.to_string().contains("lenght_mm"), "{e}");
        assert!(e.to_string().contains(":7:"), "{e}");

        let e = parse(&format!("{KDP}length_mm = 3\n")).unwrap_err();
        assert!(e.to_string().contains("duplicate key `length_mm`"), "{e}");

        let e = parse(&KDP.replace("pump_fwhm_nm = 5\n", "")).unwrap_err();
        assert!(e.to_string().contains("pump_fwhm_nm"), "{e}");

        for bad in ["sigma_F = -1", "grid_N = 100", "contour_level = 1.5", "numerical = maybe", "pmf = box"] {
            let e = parse(&format!("{KDP}{bad}\n")).unwrap_err();
            let key = bad.split(' ').next().unwrap();
            assert!(e.to_string().contains(key), "{e}");
        }
        assert!(parse("material = BBO\npm_type = I\nlength_mm = 5\nlambda_c_nm = 800\npump_fwhm_nm = 5\nsignal_polarization = e\n").is_err());
        assert!(parse("material BBO\n").is_err());
    }

    #[test]
    fn resolve_kdp() {
        let disp = Dispersion::default();
        let r = parse(KDP).unwrap().resolve(&disp).unwrap();
        assert!((r.source.crystal.cut_angle_deg - 67.7).abs() < 0.5);
        assert_eq!(r.source.crystal.signal_polarization, Polarization::Ordinary);
        assert!(r.grid.size.is_power_of_two() && r.grid.size >= 256);
        let fixed = parse(&format!("{KDP}grid_N = 128\n")).unwrap().resolve(&disp).unwrap();
        assert_eq!(fixed.grid.size, 128);
        assert!((fixed.grid.span() - r.grid.span()).abs() < 1e-12);
    }
}
