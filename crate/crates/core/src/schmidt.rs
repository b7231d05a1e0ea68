//! Schmidt decomposition of the sampled JSA and the purity figures derived from it.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::crystal::Dispersion;
use crate::error::{Error, Result};
use crate::gaussian::GaussianReport;
use crate::state::{auto_grid, build_jsa, FrequencyGrid, JointSpectralAmplitude, PmfModel, SourceSpec};
use crate::wigner::{to_faer, HeraldedDensityMatrix};

/// Eigenvalues below this count as inactive for `effective_rank`.
pub const RANK_CUTOFF: f64 = 1e-6;

/// `f(ω_s, ω_i) = Σ √λ_m u_m(ω_s) v_m(ω_i)`; modes are stored column-wise.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub grid: FrequencyGrid,
    pub lambdas: Vec<f64>,
    pub u: Array2<Complex64>,
    pub v: Array2<Complex64>,
}

impl SchmidtDecomposition {
    pub fn schmidt_number(&self) -> f64 {
        schmidt_number(&self.lambdas)
    }

    pub fn effective_rank(&self) -> usize {
        self.lambdas.iter().filter(|&&l| l > RANK_CUTOFF).count()
    }

    /// Largest deviation of the δ-weighted Gram matrices from the identity,
    /// over the first `modes` modes.
    pub fn orthonormality_error(&self, modes: usize) -> f64 {
        let modes = modes.min(self.lambdas.len());
        let d = self.grid.spacing;
        let mut worst: f64 = 0.0;
        for basis in [&self.u, &self.v] {
            for a in 0..modes {
                for b in a..modes {
                    let dot: Complex64 = basis
                        .column(a)
                        .iter()
                        .zip(basis.column(b).iter())
                        .map(|(x, y)| x.conj() * y)
                        .sum::<Complex64>()
                        * d;
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((dot - target).norm());
                }
            }
        }
        worst
    }

    /// `Σ √λ_m u_m v_m` over the first `modes` modes.
    pub fn reconstruct(&self, modes: usize) -> Array2<Complex64> {
        let n = self.grid.size;
        let mut out = Array2::zeros((n, n));
        for m in 0..modes.min(self.lambdas.len()) {
            let s = self.lambdas[m].sqrt();
            for j in 0..n {
                let uj = self.u[[j, m]] * s;
                for k in 0..n {
                    out[[j, k]] += uj * self.v[[k, m]];
                }
            }
        }
        out
    }
}

/// SVD of `f · δ`; `λ_m = s_m²`, modes normalized under the δ-weighted product.
///
/// Each `u_m` is rotated so that its largest-magnitude sample is real and
/// positive, with the opposite rotation applied to `v_m`.
pub fn decompose(jsa: &JointSpectralAmplitude) -> Result<SchmidtDecomposition> {
    let d = jsa.grid.spacing;
    let n = jsa.grid.size;
    let a = to_faer(&jsa.values) * faer::Scale(Complex64::new(d, 0.0));
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Numeric(format!("singular value decomposition failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let (uu, vv) = (svd.U(), svd.V());
    let scale = 1.0 / d.sqrt();

    let lambdas: Vec<f64> = (0..n).map(|m| s[m].re * s[m].re).collect();
    let mut u = Array2::zeros((n, n));
    let mut v = Array2::zeros((n, n));
    for m in 0..n {
        let mut big = Complex64::new(0.0, 0.0);
        for j in 0..n {
            if uu[(j, m)].norm_sqr() > big.norm_sqr() {
                big = uu[(j, m)];
            }
        }
        let phase = if big.norm() > 0.0 { big.conj() / big.norm() } else { Complex64::new(1.0, 0.0) };
        for j in 0..n {
            u[[j, m]] = uu[(j, m)] * phase * scale;
            v[[j, m]] = vv[(j, m)].conj() * phase.conj() * scale;
        }
    }
    Ok(SchmidtDecomposition {
        grid: jsa.grid,
        lambdas,
        u,
        v,
    })
}

/// Schmidt eigenvalues only, in descending order.
pub fn schmidt_spectrum(jsa: &JointSpectralAmplitude) -> Result<Vec<f64>> {
    let d = jsa.grid.spacing;
    let a = to_faer(&jsa.values) * faer::Scale(Complex64::new(d, 0.0));
    let s = a
        .singular_values()
        .map_err(|e| Error::Numeric(format!("singular value computation failed: {e:?}")))?;
    Ok(s.into_iter().map(|x| x * x).collect())
}

/// `K = 1 / Σ λ_m²`.
pub fn schmidt_number(lambdas: &[f64]) -> f64 {
    1.0 / lambdas.iter().map(|l| l * l).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    #[serde(rename = "schmidt_number")]
    pub k: f64,
    /// `1/K`.
    pub purity: f64,
    /// `Tr(ρ²)` from the heralded density matrix.
    pub purity_density_matrix: f64,
    pub purity_discrepancy: f64,
    /// Event-ready two-source HOM visibility, equal to the purity.
    pub visibility: f64,
    pub effective_rank: usize,
}

/// Purity both as `1/K` and as `Tr(ρ²)`; only valid for an unfiltered trigger.
pub fn purity_report(
    decomposition: &SchmidtDecomposition,
    r: &HeraldedDensityMatrix,
) -> Result<EntanglementReport> {
    purity_from_spectrum(&decomposition.lambdas, r)
}

/// [`purity_report`] from the Schmidt eigenvalues alone.
pub fn purity_from_spectrum(lambdas: &[f64], r: &HeraldedDensityMatrix) -> Result<EntanglementReport> {
    if r.trigger_filtered {
        return Err(Error::FilteredTrigger);
    }
    let k = schmidt_number(lambdas);
    let p = 1.0 / k;
    let p_r = r.purity();
    Ok(EntanglementReport {
        k,
        purity: p,
        purity_density_matrix: p_r,
        purity_discrepancy: (p - p_r).abs(),
        visibility: p,
        effective_rank: lambdas.iter().filter(|&&l| l > RANK_CUTOFF).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KTbCheck {
    pub k_numeric: f64,
    pub tb_analytic: f64,
    pub relative_difference: f64,
    pub passed: bool,
}

pub const K_TB_TOLERANCE: f64 = 0.02;

/// Builds the JSA with the Gaussian phasematching function and a first-order
/// mismatch, then compares its Schmidt number with the closed-form TB.
pub fn gaussian_k_equals_tb_check(disp: &Dispersion, source: &SourceSpec) -> Result<KTbCheck> {
    if source.filters.has_trigger_filter() {
        return Err(Error::FilteredTrigger);
    }
    let mut gaussian = source.clone();
    gaussian.pmf = PmfModel::GAUSSIAN_FIRST_ORDER;
    let grid = auto_grid(disp, &gaussian)?;
    let jsa = build_jsa(disp, &gaussian, &grid)?;
    let k = schmidt_number(&schmidt_spectrum(&jsa)?);
    let report = GaussianReport::new(
        source.pump.sigma,
        &source.filters,
        source.walkoff(disp)?,
        source.omega_c(),
    )?;
    let rel = (k - report.tb).abs() / report.tb;
    Ok(KTbCheck {
        k_numeric: k,
        tb_analytic: report.tb,
        relative_difference: rel,
        passed: rel < K_TB_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::FilterSpec;
    use crate::wigner::heralded_density_matrix;

    fn hermite_like(g: &FrequencyGrid, center: f64, w: f64, order: usize) -> Vec<f64> {
        (0..g.size)
            .map(|j| {
                let x = (g.omega(j) - center) / w;
                let poly = if order == 0 { 1.0 } else { 2f64.sqrt() * x };
                poly * (-(x * x) / 2.0).exp()
            })
            .collect()
    }

    fn jsa_from(g: FrequencyGrid, terms: &[(f64, Vec<f64>, Vec<f64>)]) -> JointSpectralAmplitude {
        let values = Array2::from_shape_fn((g.size, g.size), |(j, k)| {
            let re: f64 = terms.iter().map(|(c, a, b)| c * a[j] * b[k]).sum();
            Complex64::new(re, 0.0)
        });
        JointSpectralAmplitude::from_samples(g, values).unwrap()
    }

    #[test]
    fn separable_state_has_one_mode() {
        let g = FrequencyGrid::new(2.0, 0.004, 64).unwrap();
        let jsa = jsa_from(g, &[(1.0, hermite_like(&g, 2.0, 0.02, 0), hermite_like(&g, 2.0, 0.03, 0))]);
        let d = decompose(&jsa).unwrap();
        assert!((d.lambdas[0] - 1.0).abs() < 1e-10);
        assert!((d.lambdas.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!((d.schmidt_number() - 1.0).abs() < 1e-9);
        assert_eq!(d.effective_rank(), 1);
        assert!(d.orthonormality_error(1) < 1e-8);
    }

    #[test]
    fn two_equal_modes() {
        let g = FrequencyGrid::new(2.0, 0.004, 64).unwrap();
        let jsa = jsa_from(
            g,
            &[
                (1.0, hermite_like(&g, 2.0, 0.02, 0), hermite_like(&g, 2.0, 0.02, 0)),
                (1.0, hermite_like(&g, 2.0, 0.02, 1), hermite_like(&g, 2.0, 0.02, 1)),
            ],
        );
        let d = decompose(&jsa).unwrap();
        assert!((d.lambdas[0] - 0.5).abs() < 1e-8 && (d.lambdas[1] - 0.5).abs() < 1e-8);
        assert!((d.schmidt_number() - 2.0).abs() < 1e-7);
        assert!(d.orthonormality_error(2) < 1e-8);
        let rec = d.reconstruct(2);
        let err: f64 = rec.iter().zip(jsa.values.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
            * g.spacing
            * g.spacing;
        assert!(err.sqrt() < 1e-6);
    }

    #[test]
    fn phase_convention() {
        let g = FrequencyGrid::new(2.0, 0.004, 64).unwrap();
        let jsa = jsa_from(g, &[(1.0, hermite_like(&g, 2.0013, 0.02, 0), hermite_like(&g, 2.0, 0.03, 0))]);
        let mut rotated = jsa.clone();
        rotated.values.mapv_inplace(|z| z * Complex64::from_polar(1.0, 1.1));
        let (a, b) = (decompose(&jsa).unwrap(), decompose(&rotated).unwrap());
        let big = |d: &SchmidtDecomposition| {
            d.u.column(0).iter().copied().max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap()).unwrap()
        };
        for d in [&a, &b] {
            let z = big(d);
            assert!(z.re > 0.0 && z.im.abs() < 1e-12);
        }
        assert!((schmidt_number(&a.lambdas) - schmidt_number(&b.lambdas)).abs() < 1e-12);
    }

    #[test]
    fn purity_paths_agree() {
        let g = FrequencyGrid::new(2.0, 0.004, 128).unwrap();
        let values = Array2::from_shape_fn((g.size, g.size), |(j, k)| {
            let (x, y) = (g.omega(j) - 2.0, g.omega(k) - 2.0);
            Complex64::from_polar((-(x + y).powi(2) / 8e-4 - (x - y).powi(2) / 4e-3).exp(), 30.0 * x)
        });
        let jsa = JointSpectralAmplitude::from_samples(g, values).unwrap();
        let d = decompose(&jsa).unwrap();
        let r = heralded_density_matrix(&jsa, &FilterSpec::unfiltered(2.0)).unwrap();
        let rep = purity_report(&d, &r).unwrap();
        assert!(rep.purity_discrepancy < 1e-6, "{rep:?}");
        assert!(rep.k > 1.0);
        let spectrum = schmidt_spectrum(&jsa).unwrap();
        assert!((schmidt_number(&spectrum) - rep.k).abs() < 1e-9);

        let mut filtered = FilterSpec::unfiltered(2.0);
        filtered.trigger = crate::gaussian::FilterWidth::Gaussian(0.01);
        let rf = heralded_density_matrix(&jsa, &filtered).unwrap();
        assert!(matches!(purity_report(&d, &rf), Err(Error::FilteredTrigger)));
    }
}
