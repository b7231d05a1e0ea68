//! Numerical heralded-photon analysis: density matrix, chronocyclic Wigner
//! function, marginals, e⁻¹ widths and the joint temporal intensity.
//!
//! Time is conjugate to frequency through `exp(-iωt)` everywhere in this
//! module, so a spectral phase `exp(iωT)` places a pulse at `t = +T`.

use std::f64::consts::PI;

use faer::Mat;
use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{FilterSpec, FrequencyGrid, JointSpectralAmplitude};

/// `ρ_s` sampled on the signal grid, normalized so that `trace · δ = 1`.
#[derive(Debug, Clone)]
pub struct HeraldedDensityMatrix {
    pub grid: FrequencyGrid,
    pub values: Array2<Complex64>,
    /// Whether a frequency-dependent trigger efficiency was applied.
    pub trigger_filtered: bool,
}

impl HeraldedDensityMatrix {
    pub fn trace(&self) -> f64 {
        self.values.diag().iter().map(|z| z.re).sum::<f64>() * self.grid.spacing
    }

    /// `Tr(ρ²)`, evaluated as `Σ |R_jk|² δ²` for Hermitian `R`.
    pub fn purity(&self) -> f64 {
        let d = self.grid.spacing;
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * d * d
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.values.nrows();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in j..n {
                worst = worst.max((self.values[[j, k]] - self.values[[k, j]].conj()).norm());
            }
        }
        worst
    }

    /// Spectral intensity read off the diagonal.
    pub fn spectral_intensity(&self) -> IntensityProfile {
        IntensityProfile::new(
            self.grid.axis(),
            self.values.diag().iter().map(|z| z.re).collect(),
        )
    }
}

pub(crate) fn to_faer(a: &Array2<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Trigger efficiencies below this are treated as zero.
const NEGLIGIBLE_TRIGGER: f64 = 1e-24;

/// `R[j][k] = Σ_m g(ω_m) f[j][m] conj(f[k][m]) δ`, renormalized to unit trace.
pub fn heralded_density_matrix(
    jsa: &JointSpectralAmplitude,
    filters: &FilterSpec,
) -> Result<HeraldedDensityMatrix> {
    let grid = jsa.grid;
    let d = grid.spacing;
    // idler samples the trigger never sees drop out of the sum
    let kept: Vec<(usize, f64)> = (0..grid.size)
        .map(|m| (m, filters.trigger_efficiency(grid.omega(m))))
        .filter(|&(_, g)| g > NEGLIGIBLE_TRIGGER)
        .map(|(m, g)| (m, (g * d).sqrt()))
        .collect();
    let a = Mat::from_fn(grid.size, kept.len(), |j, c| {
        let (m, w) = kept[c];
        jsa.values[[j, m]] * w
    });
    let r = &a * a.adjoint();

    let trace: f64 = (0..grid.size).map(|j| r[(j, j)].re).sum::<f64>() * d;
    if !(trace > f64::MIN_POSITIVE) || !trace.is_finite() {
        return Err(Error::EmptyHeralding);
    }
    let values = Array2::from_shape_fn((grid.size, grid.size), |(j, k)| r[(j, k)] / trace);
    Ok(HeraldedDensityMatrix {
        grid,
        values,
        trigger_filtered: filters.has_trigger_filter(),
    })
}

/// Sampled `W(ω, t)`; rows follow `omega`, columns follow `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChronocyclicWigner {
    pub omega: Vec<f64>,
    pub t: Vec<f64>,
    pub values: Array2<f64>,
}

impl ChronocyclicWigner {
    fn step(axis: &[f64]) -> f64 {
        if axis.len() > 1 {
            axis[1] - axis[0]
        } else {
            1.0
        }
    }

    pub fn integral(&self) -> f64 {
        self.values.sum() * Self::step(&self.omega) * Self::step(&self.t)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Row and column of the global maximum.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut value = f64::NEG_INFINITY;
        for ((j, k), &w) in self.values.indexed_iter() {
            if w > value {
                value = w;
                best = (j, k);
            }
        }
        best
    }

    /// `(I_ω, I_t)` by summing over the conjugate axis.
    pub fn marginals(&self) -> (IntensityProfile, IntensityProfile) {
        let spectral = self.values.sum_axis(Axis(1)).to_vec();
        let temporal = self.values.sum_axis(Axis(0)).to_vec();
        (
            IntensityProfile::new(self.omega.clone(), spectral),
            IntensityProfile::new(self.t.clone(), temporal),
        )
    }

    /// Slices through the maximum: `(W(ω, t*), W(ω*, t))`.
    pub fn peak_slices(&self) -> (Vec<f64>, Vec<f64>) {
        let (j, k) = self.argmax();
        (
            self.values.column(k).to_vec(),
            self.values.row(j).to_vec(),
        )
    }

    /// e⁻¹ widths of the slices through the maximum, `(Δω, Δt)`.
    pub fn peak_slice_widths(&self) -> Result<(WidthMeasurement, WidthMeasurement)> {
        let (spectral, temporal) = self.peak_slices();
        Ok((
            measure_width_of(&self.omega, &spectral, E_INV)?,
            measure_width_of(&self.t, &temporal, E_INV)?,
        ))
    }
}

/// Evaluates the CWF of `r`.
///
/// The frequency offset takes even multiples of the grid spacing so that both
/// `ω ± ω′/2` fall on grid points; the time axis then spans `±π/(2δ)`.
/// `time_padding` zero-pads the offset sequence to sample that range more
/// finely.
pub fn numerical_cwf(r: &HeraldedDensityMatrix, time_padding: usize) -> Result<ChronocyclicWigner> {
    if time_padding == 0 {
        return Err(Error::invalid("time_padding", "must be at least 1"));
    }
    let n = r.grid.size;
    let d = r.grid.spacing;
    let m_len = n * time_padding;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m_len);
    let half = (m_len / 2) as isize;

    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m_len];
            let reach = j.min(n - 1 - j) as isize;
            for m in -reach..=reach {
                let idx = m.rem_euclid(m_len as isize) as usize;
                buf[idx] = r.values[[(j as isize + m) as usize, (j as isize - m) as usize]];
            }
            fft.process(&mut buf);
            let scale = d / PI;
            let mut row = vec![0.0; m_len];
            let mut imag: f64 = 0.0;
            for k in -half..half {
                let z = buf[k.rem_euclid(m_len as isize) as usize] * scale;
                row[(k + half) as usize] = z.re;
                imag = imag.max(z.im.abs());
            }
            (row, imag)
        })
        .collect();

    let t_step = PI / (m_len as f64 * d);
    let t: Vec<f64> = (-half..half).map(|k| k as f64 * t_step).collect();
    let mut values = Array2::zeros((n, m_len));
    let mut imag: f64 = 0.0;
    for (j, (row, im)) in rows.into_iter().enumerate() {
        values.row_mut(j).assign(&ndarray::ArrayView1::from(&row));
        imag = imag.max(im);
    }
    let cwf = ChronocyclicWigner {
        omega: r.grid.axis(),
        t,
        values,
    };
    let peak = cwf.values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if imag > 1e-8 * peak {
        return Err(Error::Numeric(format!(
            "Wigner function has imaginary residue {imag:.3e} (max |W| = {peak:.3e})"
        )));
    }
    Ok(cwf)
}

/// A nonnegative density on a uniform axis with unit trapezoidal integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityProfile {
    pub axis: Vec<f64>,
    pub density: Vec<f64>,
}

impl IntensityProfile {
    /// Normalizes `density`; leaves it untouched if its integral is not positive.
    pub fn new(axis: Vec<f64>, density: Vec<f64>) -> Self {
        let mut p = IntensityProfile { axis, density };
        let total = p.integral();
        if total > 0.0 {
            p.density.iter_mut().for_each(|v| *v /= total);
        }
        p
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.axis, &self.density)
    }

    pub fn centroid(&self) -> f64 {
        let weighted: Vec<f64> = self.axis.iter().zip(&self.density).map(|(x, y)| x * y).collect();
        trapezoid(&self.axis, &weighted) / self.integral()
    }

    pub fn min(&self) -> f64 {
        self.density.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

pub const E_INV: f64 = 0.367_879_441_171_442_33;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthMeasurement {
    pub half_width: f64,
    pub left: f64,
    pub right: f64,
    pub peak: f64,
    /// Fraction of the maximum at which the crossings were taken.
    pub level: f64,
}

/// e⁻¹-of-maximum half width.
pub fn measure_width(profile: &IntensityProfile) -> Result<WidthMeasurement> {
    measure_width_of(&profile.axis, &profile.density, E_INV)
}

/// Half the distance between the outermost crossings of `level · max`.
pub fn measure_width_of(axis: &[f64], values: &[f64], level: f64) -> Result<WidthMeasurement> {
    let n = values.len();
    if n < 3 || axis.len() != n {
        return Err(Error::invalid("profile", format!("needs ≥ 3 matching samples, got {n}")));
    }
    let (imax, vmax) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    if imax == 0 || imax == n - 1 {
        return Err(Error::ClippedProfile { index: imax });
    }
    let thr = level * vmax;
    let first = values.iter().position(|&v| v >= thr).unwrap_or(imax);
    let last = values.iter().rposition(|&v| v >= thr).unwrap_or(imax);
    if first == 0 {
        return Err(Error::DegenerateProfile { side: "left" });
    }
    if last == n - 1 {
        return Err(Error::DegenerateProfile { side: "right" });
    }
    let cross = |a: usize, b: usize| {
        let (ya, yb) = (values[a], values[b]);
        axis[a] + (thr - ya) / (yb - ya) * (axis[b] - axis[a])
    };
    let left = cross(first - 1, first);
    let right = cross(last, last + 1);
    Ok(WidthMeasurement {
        half_width: 0.5 * (right - left),
        left,
        right,
        peak: axis[imax],
        level,
    })
}

/// `Σ_m g(ω_m) |f(ω, ω_m)|² δ`, normalized.
pub fn spectral_intensity_direct(jsa: &JointSpectralAmplitude, filters: &FilterSpec) -> IntensityProfile {
    let g = trigger_weights(jsa, filters);
    let density = jsa
        .values
        .outer_iter()
        .map(|row| row.iter().zip(&g).map(|(z, w)| z.norm_sqr() * w).sum::<f64>())
        .collect();
    IntensityProfile::new(jsa.grid.axis(), density)
}

/// `(1/2π) Σ_m g(ω_m) |∫ f(ω, ω_m) e^{-iωt} dω|² δ`, normalized.
pub fn temporal_intensity_direct(
    jsa: &JointSpectralAmplitude,
    filters: &FilterSpec,
    t_axis: &[f64],
) -> IntensityProfile {
    let g = trigger_weights(jsa, filters);
    let grid = jsa.grid;
    let density = t_axis
        .par_iter()
        .map(|&t| {
            let phases: Vec<Complex64> = (0..grid.size)
                .map(|j| Complex64::from_polar(1.0, -(grid.omega(j) - grid.center) * t))
                .collect();
            (0..grid.size)
                .filter(|&m| g[m] > 0.0)
                .map(|m| {
                    let amp: Complex64 = (0..grid.size).map(|j| jsa.values[[j, m]] * phases[j]).sum();
                    g[m] * amp.norm_sqr()
                })
                .sum::<f64>()
        })
        .collect();
    IntensityProfile::new(t_axis.to_vec(), density)
}

fn trigger_weights(jsa: &JointSpectralAmplitude, filters: &FilterSpec) -> Vec<f64> {
    (0..jsa.grid.size)
        .map(|m| filters.trigger_efficiency(jsa.grid.omega(m)))
        .collect()
}

/// Distribution of the emission-time difference and its e⁻¹ half width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTemporal {
    pub s_minus: IntensityProfile,
    pub width: WidthMeasurement,
}

impl JointTemporal {
    pub fn tau_c(&self) -> f64 {
        self.width.half_width
    }
}

/// Fourier transforms `f` to `(t_s, t_i)`, rotates to `t_- = t_s - t_i`
/// and marginalizes over `t_+`.
pub fn joint_temporal_analysis(jsa: &JointSpectralAmplitude, padding: usize) -> Result<JointTemporal> {
    if padding == 0 {
        return Err(Error::invalid("padding", "must be at least 1"));
    }
    let n = jsa.grid.size;
    let m = n * padding;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);

    let mut rows: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut row = vec![Complex64::new(0.0, 0.0); m];
            if a < n {
                for b in 0..n {
                    row[b] = jsa.values[[a, b]];
                }
                fft.process(&mut row);
            }
            row
        })
        .collect();
    // transform along the first axis, one column at a time
    let cols: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|b| {
            let mut col: Vec<Complex64> = rows.iter().map(|r| r[b]).collect();
            fft.process(&mut col);
            col
        })
        .collect();
    rows.clear();

    let half = (m / 2) as isize;
    let density: Vec<f64> = (-half..half)
        .into_par_iter()
        .map(|k| {
            (0..m)
                .map(|a| {
                    let b = (a as isize - k).rem_euclid(m as isize) as usize;
                    cols[b][a].norm_sqr()
                })
                .sum()
        })
        .collect();
    let dt = 2.0 * PI / (m as f64 * jsa.grid.spacing);
    let axis: Vec<f64> = (-half..half).map(|k| k as f64 * dt).collect();
    let s_minus = IntensityProfile::new(axis, density);
    let width = measure_width(&s_minus).map_err(|e| match e {
        Error::ClippedProfile { .. } | Error::DegenerateProfile { .. } => Error::SupportClipped {
            fraction: 1.0,
            limit: crate::state::CLIP_LIMIT,
        },
        other => other,
    })?;
    Ok(JointTemporal { s_minus, width })
}
