//! Integer and phase arithmetic underneath the exponential sums.
//!
//! The one non-obvious convention lives here: a frequency alpha is never a
//! single f64. It is held as a [`RationalApprox`], alpha = a/q + lambda with
//! gcd(a, q) = 1, and phases alpha * m^n are assembled as
//!
//! ```text
//!   {a * m^n / q}   computed exactly in residue arithmetic, plus
//!   {lambda * m^n}  computed from the exact dyadic expansion of lambda.
//! ```
//!
//! Reconstructing alpha as one float and multiplying by m^n would lose the
//! fractional part entirely once m^n climbs past 2^52; the split keeps the
//! phase good to roughly 2^-50 absolute for m^n up to 2^120.

use crate::{Complex, Error, Result};

/// Rational approximation a/q + lambda to a real frequency.
///
/// Invariants: q >= 1, gcd(a, q) = 1, and a = 0 only together with q = 1.
/// lambda is the leftover real offset; nothing here constrains its size,
/// the producing routine does (see [`dirichlet_approx`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalApprox {
    pub a: i64,
    pub q: u64,
    pub lambda: f64,
}

impl RationalApprox {
    /// Builds an approximation after checking the coprimality invariants.
    pub fn new(a: i64, q: u64, lambda: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("RationalApprox: q must be >= 1".into()));
        }
        if gcd(a.unsigned_abs(), q) != 1 && !(a == 0 && q == 1) {
            return Err(Error::Domain(format!(
                "RationalApprox: gcd({a}, {q}) != 1"
            )));
        }
        if a == 0 && q != 1 {
            return Err(Error::Domain("RationalApprox: a = 0 requires q = 1".into()));
        }
        Ok(Self { a, q, lambda })
    }

    /// The real number represented, a/q + lambda. Diagnostic only; sums must
    /// not be driven off this collapsed value.
    pub fn value(&self) -> f64 {
        self.a as f64 / self.q as f64 + self.lambda
    }
}

/// Greatest common divisor.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// (a * b) mod m without overflow.
pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// base^exp mod modulus by binary exponentiation, 128-bit intermediates.
pub fn mod_pow(base: u64, exp: u64, modulus: u64) -> Result<u64> {
    if modulus == 0 {
        return Err(Error::Domain("mod_pow: modulus must be nonzero".into()));
    }
    if modulus == 1 {
        return Ok(0);
    }
    let mut result = 1u64;
    let mut base = base % modulus;
    let mut exp = exp;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mod_mul(result, base, modulus);
        }
        base = mod_mul(base, base, modulus);
        exp >>= 1;
    }
    Ok(result)
}

/// Deterministic Miller-Rabin for u64 (the first twelve prime bases cover
/// the whole range).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n).expect("modulus checked nonzero");
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, (prime, exponent) pairs in
/// ascending order. Intended for the moderate q that show up in arc
/// denominators and series cutoffs, not for cryptographic sizes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut push = |p: u64, e: u32| {
        if e > 0 {
            out.push((p, e));
        }
    };
    for p in [2u64, 3, 5] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        push(p, e);
    }
    // 7, 11, 13, ... by a mod-30 wheel.
    let mut p = 7u64;
    let wheel = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut wi = 0;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        push(p, e);
        p += wheel[wi];
        wi = (wi + 1) % wheel.len();
    }
    if n > 1 {
        push(n, 1);
    }
    out
}

/// Moebius function.
pub fn moebius(n: u64) -> i32 {
    if n == 0 {
        return 0;
    }
    let mut sign = 1;
    for (_, e) in factorize(n) {
        if e > 1 {
            return 0;
        }
        sign = -sign;
    }
    sign
}

/// Euler totient.
pub fn euler_phi(n: u64) -> u64 {
    let mut phi = n;
    for (p, _) in factorize(n) {
        phi = phi / p * (p - 1);
    }
    phi
}

/// Best rational approximation a/q + lambda with q <= cap, by the continued
/// fraction expansion of alpha.
///
/// The returned approximation satisfies q <= cap, gcd(a, q) = 1 and
/// |lambda| <= 1/(q * cap). Among convergents with equally small |lambda|
/// (which happens only when the expansion terminates) the smaller
/// denominator wins.
pub fn dirichlet_approx(alpha: f64, cap: u64) -> Result<RationalApprox> {
    if cap == 0 {
        return Err(Error::Domain("dirichlet_approx: cap must be >= 1".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::Domain("dirichlet_approx: alpha must be finite".into()));
    }

    // Convergents p_k/q_k of the continued fraction. q grows at least like
    // Fibonacci numbers, so 128 iterations are far more than f64 can feed.
    let mut candidates: Vec<(i64, u64)> = Vec::new();
    let (mut p_prev, mut q_prev): (i128, i128) = (1, 0);
    let (mut p_cur, mut q_cur): (i128, i128) = (alpha.floor() as i128, 1);
    candidates.push((p_cur as i64, 1));
    let mut x = alpha - alpha.floor();
    for _ in 0..128 {
        if x.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / x;
        if !inv.is_finite() || inv >= 9.0e18 {
            break;
        }
        let digit = inv.floor() as i128;
        x = inv - inv.floor();
        let p_next = digit
            .checked_mul(p_cur)
            .and_then(|v| v.checked_add(p_prev));
        let q_next = digit
            .checked_mul(q_cur)
            .and_then(|v| v.checked_add(q_prev));
        let (Some(p_next), Some(q_next)) = (p_next, q_next) else {
            break;
        };
        if q_next as u128 > cap as u128 {
            break;
        }
        (p_prev, q_prev) = (p_cur, q_cur);
        (p_cur, q_cur) = (p_next, q_next);
        candidates.push((p_cur as i64, q_cur as u64));
    }

    // |alpha - a/q| via fused multiply-add: alpha*q - a in one rounding,
    // so the Dirichlet inequality survives in floating point.
    let residual = |a: i64, q: u64| -> f64 { alpha.mul_add(q as f64, -(a as f64)) / q as f64 };
    let mut best = candidates[0];
    let mut best_abs = residual(best.0, best.1).abs();
    for &(a, q) in &candidates[1..] {
        let r = residual(a, q).abs();
        if r < best_abs {
            best = (a, q);
            best_abs = r;
        }
    }
    let (a, q) = best;
    RationalApprox::new(a, q, residual(a, q))
}

/// Fractional part of (a/q + lambda) * m^degree, in [0, 1).
///
/// The rational piece is reduced exactly: {a * m^degree / q} =
/// (a * (m^degree mod q) mod q) / q. The lambda piece uses the exact
/// dyadic expansion lambda = mantissa * 2^e, so lambda * m^degree mod 1
/// is a masked 192-bit integer product, never a rounded f64 product.
pub fn frac_phase(approx: &RationalApprox, m: u64, degree: u32) -> Result<f64> {
    let mn = checked_pow_u128(m, degree)?;
    let q = approx.q;
    let rational = if q == 1 {
        0.0
    } else {
        let a_mod = approx.a.rem_euclid(q as i64) as u64;
        let residue = mod_mul(a_mod, (mn % q as u128) as u64, q);
        residue as f64 / q as f64
    };
    let drift = dyadic_frac(approx.lambda, mn);
    let mut phase = rational + drift;
    phase -= phase.floor();
    if phase >= 1.0 {
        phase = 0.0;
    }
    Ok(phase)
}

/// m^degree as u128, or a range error once it no longer fits.
pub fn checked_pow_u128(m: u64, degree: u32) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..degree {
        acc = acc.checked_mul(m as u128).ok_or_else(|| {
            Error::Range(format!("{m}^{degree} exceeds 128 bits"))
        })?;
    }
    Ok(acc)
}

/// {lambda * k} for an exact integer k, via the dyadic expansion of lambda.
///
/// lambda = sign * mantissa * 2^e exactly (mantissa < 2^53), so
/// lambda * k = sign * (mantissa * k) * 2^e and the fractional part is the
/// low -e bits of the 192-bit product mantissa * k. Absolute error of the
/// final float conversion is below 2^-50.
fn dyadic_frac(lambda: f64, k: u128) -> f64 {
    if lambda == 0.0 || k == 0 {
        return 0.0;
    }
    let bits = lambda.abs().to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let (mantissa, e): (u64, i64) = if raw_exp == 0 {
        ((bits & ((1u64 << 52) - 1)), -1074)
    } else {
        ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), raw_exp - 1075)
    };

    // 192-bit product mantissa * k in three 64-bit limbs.
    let k_lo = k as u64 as u128;
    let k_hi = (k >> 64) as u64 as u128;
    let p_lo = mantissa as u128 * k_lo;
    let p_hi = mantissa as u128 * k_hi;
    let limb0 = p_lo as u64;
    let mid = (p_lo >> 64) + (p_hi & u64::MAX as u128);
    let limb1 = mid as u64;
    let limb2 = ((p_hi >> 64) + (mid >> 64)) as u64;

    let frac_abs = if e >= 0 {
        0.0
    } else {
        let f = -e as u32; // number of fractional bits, 1..=1074
        let (r0, r1, r2) = mask_low_bits(limb0, limb1, limb2, f);
        // (masked product) / 2^f, assembled hi-to-lo so the one rounding
        // that matters happens at the top.
        let value = (r2 as f64) * 2f64.powi(128) + (r1 as f64) * 2f64.powi(64) + r0 as f64;
        value * 2f64.powi(-(f as i32))
    };

    let frac = if lambda < 0.0 && frac_abs > 0.0 {
        1.0 - frac_abs
    } else {
        frac_abs
    };
    if frac >= 1.0 {
        0.0
    } else {
        frac
    }
}

/// Keeps the low `f` bits of a 192-bit little-endian limb triple.
fn mask_low_bits(l0: u64, l1: u64, l2: u64, f: u32) -> (u64, u64, u64) {
    if f >= 192 {
        (l0, l1, l2)
    } else if f >= 128 {
        (l0, l1, l2 & low_mask(f - 128))
    } else if f >= 64 {
        (l0, l1 & low_mask(f - 64), 0)
    } else {
        (l0 & low_mask(f), 0, 0)
    }
}

fn low_mask(bits: u32) -> u64 {
    if bits == 0 {
        0
    } else if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// e(t) = exp(2 pi i t). The caller is expected to pass t already reduced
/// mod 1 (as [`frac_phase`] does); for unreduced t the reduction here is
/// only as good as f64 spacing at |t|.
pub fn e2pi(t: f64) -> Complex {
    let frac = t - t.floor();
    let (s, c) = (std::f64::consts::TAU * frac).sin_cos();
    Complex::new(c, s)
}

/// Compensated (Kahan) accumulator for long float sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Pair of compensated accumulators for a complex sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex {
        Complex::new(self.re.value(), self.im.value())
    }
}
