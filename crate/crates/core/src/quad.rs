//! Adaptive Simpson quadrature for smooth real and complex integrands.

use num_complex::Complex64 as c64;

use crate::{Error, Result};

struct Panel {
    a: f64,
    b: f64,
    fa: c64,
    fm: c64,
    fb: c64,
    whole: c64,
}

fn simpson(a: f64, b: f64, fa: c64, fm: c64, fb: c64) -> c64 {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

/// Integrate a complex-valued function on `[a, b]` to absolute tolerance `tol`.
pub fn integrate_complex<F: Fn(f64) -> c64>(f: F, a: f64, b: f64, tol: f64) -> Result<c64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut stack = vec![(
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        },
        tol,
        0usize,
    )];
    let mut total = c64::new(0.0, 0.0);
    let mut worst = 0.0f64;
    const MAX_DEPTH: usize = 48;

    while let Some((p, tol, depth)) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let err = (left + right - p.whole).norm() / 15.0;
        if err <= tol || depth >= MAX_DEPTH {
            total += left + right + (left + right - p.whole) / 15.0;
            worst = worst.max(err);
            if depth >= MAX_DEPTH && err > tol {
                return Err(Error::Quadrature {
                    achieved: err,
                    requested: tol,
                });
            }
        } else {
            stack.push((
                Panel {
                    a: p.a,
                    b: m,
                    fa: p.fa,
                    fm: flm,
                    fb: p.fm,
                    whole: left,
                },
                tol / 2.0,
                depth + 1,
            ));
            stack.push((
                Panel {
                    a: m,
                    b: p.b,
                    fa: p.fm,
                    fm: frm,
                    fb: p.fb,
                    whole: right,
                },
                tol / 2.0,
                depth + 1,
            ));
        }
    }
    let _ = worst;
    Ok(total)
}

/// Integrate a real-valued function on `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_complex(|x| c64::new(f(x), 0.0), a, b, tol).map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_gaussian() {
        // ∫_{-8}^{8} e^{-x²/2} dx ≈ √(2π)
        let v = integrate(|x| (-0.5 * x * x).exp(), -8.0, 8.0, 1e-12).unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn integrates_oscillatory_complex() {
        // ∫_0^π e^{ix} dx = 2i
        let v = integrate_complex(|x| c64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, 1e-12)
            .unwrap();
        assert!((v - c64::new(0.0, 2.0)).norm() < 1e-10);
    }
}
