//! Weyl sums over the power window and their major-arc pieces.
//!
//! The objects are
//!
//! ```text
//!   T(alpha; x, y)   = sum over x-y < m <= x of e(alpha * m^n)
//!   S(a, q)          = sum over 1 <= k <= q of e(a * k^n / q)
//!   gamma(lambda)    = int_{-1/2}^{1/2} e(lambda*(x - y/2 + y*t)^n) dt
//! ```
//!
//! and on a major arc alpha = a/q + lambda the first factors approximately
//! into the other two: T ~ (y/q) * S(a, q) * gamma(lambda). [`weyl_sum`]
//! evaluates T exactly through the split phase arithmetic in [`crate::arith`],
//! [`complete_sum`] caches the S(a, q) (they recur constantly in sweeps),
//! and [`gamma_integral`] does the oscillatory integral with a panel count
//! tied to the total phase variation.

use std::collections::HashMap;
use std::sync::{LazyLock, Mutex};

use crate::arith::{self, frac_phase, KahanComplex, RationalApprox};
use crate::{quad, Complex, Error, Result};

/// Summation window for a Weyl sum: m runs over (upper - width, upper],
/// phases are degree-th powers. Degrees below 3 belong to other problems
/// and are rejected.
#[derive(Debug, Clone, Copy)]
pub struct SumWindow {
    upper: f64,
    width: f64,
    degree: u32,
}

impl SumWindow {
    pub fn new(upper: f64, width: f64, degree: u32) -> Result<Self> {
        if !(width > 0.0 && width <= upper) {
            return Err(Error::Domain(format!(
                "SumWindow: need 0 < width <= upper, got width {width}, upper {upper}"
            )));
        }
        if degree < 3 {
            return Err(Error::Domain(format!(
                "SumWindow: degree must be >= 3, got {degree}"
            )));
        }
        Ok(Self {
            upper,
            width,
            degree,
        })
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Integer endpoints (first, last) of the summation range, or None when
    /// no integer falls inside.
    pub fn integer_range(&self) -> Option<(u64, u64)> {
        let last = self.upper.floor();
        let first = (self.upper - self.width).floor() + 1.0;
        if last < 1.0 || first > last {
            return None;
        }
        Some((first.max(1.0) as u64, last as u64))
    }

    /// Number of integers in the summation range.
    pub fn term_count(&self) -> u64 {
        self.integer_range().map_or(0, |(a, b)| b - a + 1)
    }
}

/// T(alpha; upper, width): exact evaluation by direct summation.
pub fn weyl_sum(approx: &RationalApprox, w: &SumWindow) -> Result<Complex> {
    let Some((first, last)) = w.integer_range() else {
        return Ok(Complex::new(0.0, 0.0));
    };
    let mut acc = KahanComplex::new();
    for m in first..=last {
        acc.add(arith::e2pi(frac_phase(approx, m, w.degree)?));
    }
    Ok(acc.value())
}

type SumKey = (u64, u64, u32);

static COMPLETE_SUMS: LazyLock<Mutex<HashMap<SumKey, Complex>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Complete exponential sum S(a, q) = sum_{k=1}^{q} e(a k^degree / q).
///
/// Phases are exact rationals (a * (k^degree mod q)) mod q over q. Results
/// are memoized process-wide by (a mod q, q, degree); the map tolerates
/// concurrent lookups and inserts of distinct keys, and a racing duplicate
/// computation just overwrites with the identical value.
pub fn complete_sum(a: i64, q: u64, degree: u32) -> Result<Complex> {
    if q == 0 {
        return Err(Error::Domain("complete_sum: q must be >= 1".into()));
    }
    let a_mod = a.rem_euclid(q as i64) as u64;
    let key = (a_mod, q, degree);
    if let Some(&v) = COMPLETE_SUMS.lock().unwrap().get(&key) {
        return Ok(v);
    }
    let mut acc = KahanComplex::new();
    for k in 1..=q {
        let pow = arith::mod_pow(k, degree as u64, q)?;
        let num = arith::mod_mul(a_mod, pow, q);
        acc.add(arith::e2pi(num as f64 / q as f64));
    }
    let v = acc.value();
    COMPLETE_SUMS.lock().unwrap().insert(key, v);
    Ok(v)
}

/// Oscillatory factor gamma(lambda; upper, width) as a unit-interval
/// integral. The panel count starts at the total phase variation
/// |lambda| * n * upper^(n-1) * width (in turns) over ten, so the rule
/// starts near ten nodes per turn, then doubles until two passes agree to
/// 1e-8 absolutely.
pub fn gamma_integral(lambda: f64, w: &SumWindow) -> Result<Complex> {
    let x = w.upper;
    let y = w.width;
    let n = w.degree;
    let turns = (lambda.abs() * n as f64 * x.powi(n as i32 - 1) * y).max(0.0);
    let start = ((10.0 * turns / 32.0).ceil() as usize).clamp(1, 1 << 20);
    let f = |t: f64| {
        let u = x - y / 2.0 + y * t;
        arith::e2pi(lambda * u.powi(n as i32))
    };
    quad::adaptive(&f, -0.5, 0.5, start, 1e-8, "gamma_integral")
}

/// Major-arc factorization (width/q) * S(a, q) * gamma(lambda).
///
/// Valid under |lambda| <= 1/(2 n q upper^(n-1)); outside that range the
/// factorization has no support and the call is refused unless `force` is
/// set (useful for probing how fast it degrades).
pub fn major_arc_weyl_approx(
    approx: &RationalApprox,
    w: &SumWindow,
    force: bool,
) -> Result<Complex> {
    let hypothesis = 1.0 / (2.0 * w.degree as f64 * approx.q as f64 * w.upper.powi(w.degree as i32 - 1));
    if approx.lambda.abs() > hypothesis && !force {
        return Err(Error::Domain(format!(
            "major_arc_weyl_approx: |lambda| = {:.3e} exceeds hypothesis {:.3e} (use force to override)",
            approx.lambda.abs(),
            hypothesis
        )));
    }
    let s = complete_sum(approx.a, approx.q, w.degree)?;
    let gamma = gamma_integral(approx.lambda, w)?;
    Ok(w.width / approx.q as f64 * s * gamma)
}
