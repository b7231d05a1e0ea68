//! Bracketing root finder: bisection with a secant (Illinois) refinement step.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

/// Finds `x` in `[lo, hi]` with `f(x) = 0` given a sign change at the ends.
///
/// Stops once the bracket is narrower than `x_tol` or `|f| <= f_tol`.
pub fn find_root<F>(mut f: F, bracket: Bracket, x_tol: f64, f_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numeric(format!(
            "no sign change on [{a}, {b}] (f = {fa:.3e}, {fb:.3e})"
        )));
    }

    // Illinois variant of regula falsi; alternate with bisection so the
    // bracket always shrinks geometrically.
    let mut side = 0i8;
    for iter in 0..400 {
        let x = if iter % 2 == 0 {
            (a * fb - b * fa) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        let x = if x > a.min(b) && x < a.max(b) { x } else { 0.5 * (a + b) };
        let fx = f(x)?;
        if fx.abs() <= f_tol || (b - a).abs() <= x_tol {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Scans `n` equal subintervals of `[lo, hi]` and returns the first bracket with a sign change.
pub fn scan_bracket<F>(mut f: F, lo: f64, hi: f64, n: usize) -> Result<Option<Bracket>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let step = (hi - lo) / n as f64;
    let mut x0 = lo;
    let mut f0 = f(x0)?;
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + step * i as f64 };
        let f1 = f(x1)?;
        if f0 == 0.0 || f0.signum() != f1.signum() {
            return Ok(Some(Bracket { lo: x0, hi: x1 }));
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = find_root(
            |x| Ok(x * x * x - 2.0),
            Bracket { lo: 0.0, hi: 3.0 },
            1e-14,
            0.0,
        )
        .unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        assert!(find_root(|x| Ok(x * x + 1.0), Bracket { lo: -1.0, hi: 1.0 }, 1e-9, 0.0).is_err());
    }

    #[test]
    fn scan_finds_first_bracket() {
        let b = scan_bracket(|x| Ok((x - 0.3) * (x - 0.7)), 0.0, 1.0, 10)
            .unwrap()
            .unwrap();
        assert!(b.lo <= 0.3 && b.hi >= 0.3);
    }
}
