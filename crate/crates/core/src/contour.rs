//! Level sets of a sampled Wigner function by marching squares.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wigner::{ChronocyclicWigner, E_INV};

/// One connected piece of a level set, as `(ω, t)` vertices.
///
/// A closed line repeats its first vertex at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourLine {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl ContourLine {
    /// Enclosed area by the shoelace formula; zero for open lines.
    pub fn area(&self) -> f64 {
        if !self.closed {
            return 0.0;
        }
        0.5 * self
            .points
            .windows(2)
            .map(|p| p[0].0 * p[1].1 - p[1].0 * p[0].1)
            .sum::<f64>()
            .abs()
    }

    /// Largest distance of a vertex from `(ω0, t0)` along each axis.
    pub fn extent_from(&self, omega0: f64, t0: f64) -> (f64, f64) {
        self.points.iter().fold((0.0f64, 0.0f64), |(a, b), &(w, t)| {
            (a.max((w - omega0).abs()), b.max((t - t0).abs()))
        })
    }
}

/// Default level: e⁻¹ of the maximum.
pub const DEFAULT_LEVEL: f64 = E_INV;

// Edges of a cell: 0 bottom (t = t_k), 1 right (ω = ω_{j+1}), 2 top, 3 left.
fn segments(case: u8, center_above: bool) -> &'static [[u8; 2]] {
    match case {
        1 | 14 => &[[3, 0]],
        2 | 13 => &[[0, 1]],
        3 | 12 => &[[3, 1]],
        4 | 11 => &[[1, 2]],
        6 | 9 => &[[0, 2]],
        7 | 8 => &[[3, 2]],
        5 if center_above => &[[0, 1], [2, 3]],
        5 => &[[3, 0], [1, 2]],
        10 if center_above => &[[3, 0], [1, 2]],
        10 => &[[0, 1], [2, 3]],
        _ => &[],
    }
}

/// Contour of `W` at `level · max(W)` with linearly interpolated vertices.
pub fn contour(w: &ChronocyclicWigner, level: f64) -> Result<Vec<ContourLine>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("contour_level", format!("must lie in (0, 1), got {level}")));
    }
    let (n, m) = w.values.dim();
    let thr = level * w.max();
    let v = &w.values;

    // edge ids: horizontal edge from node (j, k) to (j+1, k) is 2(jm+k), vertical edge from (j, k) to (j, k+1) is 2(jm+k)+1
    let h = |j: usize, k: usize| 2 * (j * m + k);
    let vert = |j: usize, k: usize| 2 * (j * m + k) + 1;
    let mut points: HashMap<usize, (f64, f64)> = HashMap::new();
    let mut segs: Vec<[usize; 2]> = Vec::new();

    let lerp = |a: f64, b: f64, va: f64, vb: f64| a + (thr - va) / (vb - va) * (b - a);

    for j in 0..n.saturating_sub(1) {
        for k in 0..m.saturating_sub(1) {
            let c = [v[[j, k]], v[[j + 1, k]], v[[j + 1, k + 1]], v[[j, k + 1]]];
            let case = c
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &x)| if x >= thr { acc | (1 << i) } else { acc });
            if case == 0 || case == 15 {
                continue;
            }
            let center_above = c.iter().sum::<f64>() / 4.0 >= thr;
            let ids = [h(j, k), vert(j + 1, k), h(j, k + 1), vert(j, k)];
            for seg in segments(case, center_above) {
                for &e in seg {
                    let id = ids[e as usize];
                    points.entry(id).or_insert_with(|| match e {
                        0 => (lerp(w.omega[j], w.omega[j + 1], c[0], c[1]), w.t[k]),
                        1 => (w.omega[j + 1], lerp(w.t[k], w.t[k + 1], c[1], c[2])),
                        2 => (lerp(w.omega[j], w.omega[j + 1], c[3], c[2]), w.t[k + 1]),
                        _ => (w.omega[j], lerp(w.t[k], w.t[k + 1], c[0], c[3])),
                    });
                }
                segs.push([ids[seg[0] as usize], ids[seg[1] as usize]]);
            }
        }
    }
    if segs.is_empty() {
        return Err(Error::EmptyContour { level });
    }

    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        for &e in s {
            by_edge.entry(e).or_default().push(i);
        }
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();

    // follows unused segments from `edge`, appending edge ids
    let walk = |start_seg: usize, from: usize, used: &mut Vec<bool>, chain: &mut Vec<usize>| {
        let mut seg = start_seg;
        let mut at = from;
        loop {
            let s = segs[seg];
            let next = if s[0] == at { s[1] } else { s[0] };
            chain.push(next);
            let Some(cand) = by_edge[&next].iter().copied().find(|&i| !used[i]) else {
                break;
            };
            used[cand] = true;
            seg = cand;
            at = next;
        }
    };

    for first in 0..segs.len() {
        if used[first] {
            continue;
        }
        used[first] = true;
        let a = segs[first][0];
        let mut forward = vec![a];
        walk(first, a, &mut used, &mut forward);
        let closed = forward.len() > 2 && forward.first() == forward.last();
        let chain = if closed {
            forward
        } else {
            // extend backwards from `a`
            let mut backward = Vec::new();
            if let Some(cand) = by_edge[&a].iter().copied().find(|&i| !used[i]) {
                used[cand] = true;
                let mut tail = vec![a];
                walk(cand, a, &mut used, &mut tail);
                backward = tail;
            }
            backward.reverse();
            if !backward.is_empty() {
                backward.pop();
            }
            backward.extend(forward);
            backward
        };
        lines.push(ContourLine {
            points: chain.iter().map(|e| points[e]).collect(),
            closed,
        });
    }
    lines.sort_by(|x, y| y.points.len().cmp(&x.points.len()));
    Ok(lines)
}

/// Fraction of grid cells on which the superlevel sets `W ≥ level·max W`
/// of two CWFs sampled on the same axes disagree, relative to the first set.
pub fn superlevel_mismatch(a: &ChronocyclicWigner, b: &ChronocyclicWigner, level: f64) -> Result<f64> {
    if a.values.dim() != b.values.dim() {
        return Err(Error::invalid("cwf", "the two functions must share their sampling"));
    }
    let (ta, tb) = (level * a.max(), level * b.max());
    let mut inside = 0usize;
    let mut differ = 0usize;
    for (x, y) in a.values.iter().zip(b.values.iter()) {
        let (ia, ib) = (*x >= ta, *y >= tb);
        inside += ia as usize;
        differ += (ia != ib) as usize;
    }
    if inside == 0 {
        return Err(Error::EmptyContour { level });
    }
    Ok(differ as f64 / inside as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianReport;
    use std::f64::consts::PI;

    fn report(dw: f64, dt: f64) -> GaussianReport {
        GaussianReport {
            tss2: dt * dt,
            tii2: 1.0,
            tsi2: 0.0,
            delta_t: dt,
            delta_omega: dw,
            tb: dt * dw,
            t_shift: 30.0,
            omega_shift: 0.0,
            tau_c: 0.0,
            tau_p: 0.0,
            tau_s: 60.0,
            tau_i: 0.0,
            omega_c: 2.0,
            gamma: 0.193,
        }
    }

    fn sample(r: &GaussianReport, n: usize) -> ChronocyclicWigner {
        let omega: Vec<f64> = (0..n).map(|j| 2.0 + (j as f64 / (n - 1) as f64 - 0.5) * 8.0 * r.delta_omega).collect();
        let t: Vec<f64> = (0..n).map(|k| 30.0 + (k as f64 / (n - 1) as f64 - 0.5) * 8.0 * r.delta_t).collect();
        crate::gaussian::analytic_cwf(r, &omega, &t)
    }

    #[test]
    fn gaussian_contour_is_the_width_ellipse() {
        let r = report(0.05, 120.0);
        let w = sample(&r, 401);
        let lines = contour(&w, DEFAULT_LEVEL).unwrap();
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert!(line.closed);
        assert_eq!(line.points.first(), line.points.last());
        let (a, b) = line.extent_from(2.0, 30.0);
        assert!((a / 0.05 - 1.0).abs() < 0.01, "{a}");
        assert!((b / 120.0 - 1.0).abs() < 0.01, "{b}");
        let area = PI * 0.05 * 120.0;
        assert!((line.area() / area - 1.0).abs() < 0.01);
    }

    #[test]
    fn area_grows_as_level_drops() {
        let w = sample(&report(0.03, 200.0), 201);
        let areas: Vec<f64> = [0.8, 0.5, E_INV, 0.1]
            .iter()
            .map(|&l| contour(&w, l).unwrap()[0].area())
            .collect();
        assert!(areas.windows(2).all(|p| p[1] > p[0]), "{areas:?}");
    }

    #[test]
    fn two_lobes_give_two_lines() {
        let r = report(0.05, 120.0);
        let mut w = sample(&r, 201);
        let shifted = w.values.clone();
        let n = w.values.nrows();
        for j in 0..n {
            for k in 0..n {
                let jj = (j + n / 3) % n;
                w.values[[j, k]] = shifted[[j, k]] + shifted[[jj, k]];
            }
        }
        let lines = contour(&w, 0.6).unwrap();
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().all(|l| l.closed));
    }

    #[test]
    fn bad_levels() {
        let w = sample(&report(0.05, 120.0), 51);
        assert!(contour(&w, 1.0).is_err());
        assert!(contour(&w, 0.0).is_err());
        let mut flat = w.clone();
        flat.values.fill(1.0);
        assert!(matches!(contour(&flat, 0.5), Err(Error::EmptyContour { .. })));
    }

    #[test]
    fn mismatch_of_identical_functions_is_zero() {
        let w = sample(&report(0.05, 120.0), 101);
        assert_eq!(superlevel_mismatch(&w, &w, E_INV).unwrap(), 0.0);
        let other = crate::gaussian::analytic_cwf(&report(0.05, 130.0), &w.omega, &w.t);
        assert!(superlevel_mismatch(&w, &other, E_INV).unwrap() > 0.01);
    }
}
