//! Composite Gauss-Legendre quadrature shared by the oscillatory-integral
//! evaluators. 32-point nodes are generated once by Newton iteration on the
//! Legendre recurrence rather than typed in from a table.

use std::sync::LazyLock;

use crate::{Complex, Error, Result};

const ORDER: usize = 32;

static NODES: LazyLock<[(f64, f64); ORDER]> = LazyLock::new(|| {
    let mut out = [(0.0, 0.0); ORDER];
    let n = ORDER;
    for (i, slot) in out.iter_mut().enumerate() {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let k = k as f64;
                (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
            }
            deriv = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / deriv;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        *slot = (x, w);
    }
    out
});

/// One Gauss-Legendre pass with `panels` equal panels over [a, b].
pub(crate) fn composite<F: Fn(f64) -> Complex>(f: &F, a: f64, b: f64, panels: usize) -> Complex {
    let h = (b - a) / panels as f64;
    let mut sum = Complex::new(0.0, 0.0);
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        let half = 0.5 * h;
        for &(x, w) in NODES.iter() {
            sum += w * f(mid + half * x);
        }
    }
    sum * (0.5 * (b - a) / panels as f64)
}

/// Doubles the panel count until two successive composite rules agree to
/// `tol` in absolute value. `start` seeds the panel count (callers estimate
/// it from the total phase variation of the integrand).
pub(crate) fn adaptive<F: Fn(f64) -> Complex>(
    f: &F,
    a: f64,
    b: f64,
    start: usize,
    tol: f64,
    what: &str,
) -> Result<Complex> {
    let mut panels = start.max(1);
    let mut coarse = composite(f, a, b, panels);
    for _ in 0..14 {
        panels *= 2;
        if panels > (1 << 21) {
            break;
        }
        let fine = composite(f, a, b, panels);
        if (fine - coarse).norm() <= tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Accuracy(format!(
        "{what}: quadrature did not converge to {tol:.1e} within panel budget"
    )))
}

/// Real-valued convenience wrapper around [`adaptive`].
pub(crate) fn adaptive_real<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    start: usize,
    tol: f64,
    what: &str,
) -> Result<f64> {
    adaptive(&|t| Complex::new(f(t), 0.0), a, b, start, tol, what).map(|z| z.re)
}
