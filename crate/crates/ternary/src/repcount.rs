//! Representation counting and the analytic prediction it is compared to.
//!
//! [`exact_count`] enumerates ordered triples (p1, p2, m) with
//! p1 + p2 + m^n = N and every summand inside its window. The loop order
//! is m outermost: for each admissible m the remainder N - m^n must split
//! as p1 + p2 with both primes window-constrained, so the inner work is
//! one pass over the first prime window and a membership probe in the
//! second. Windows come pre-sieved from the shared cache.
//!
//! [`brute_count`] answers the same question from a plain boolean sieve
//! and three nested constraint checks, sharing no sieve code and no loop
//! structure with the fast path. The two counters agreeing across window
//! boundaries is the main line of defense for every off-by-one in the
//! window arithmetic.
//!
//! The prediction side assembles
//!
//! ```text
//!   main = 3 S(N) H^2 / (n mu3^(1-1/n) N^(1-1/n) ln^2 N)
//! ```
//!
//! whose shape comes from the major-arc integral: the J-shaped kernel
//! [`j_integral`] contributes 3 H^2 up to a relative error of order
//! ln^(-6) N, the power summand contributes the derivative factor
//! (n mu3^(1-1/n) N^(1-1/n))^(-1), and each prime window contributes one
//! factor of ln^(-1) N.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::arith::checked_pow_u128;
use crate::dissect::ProblemInstance;
use crate::primes::shared_windows;
use crate::sseries::{self, SeriesVariant};
use crate::{quad, Error, Result};

/// Largest target the windowed counter accepts; beyond this the prime
/// windows alone outgrow the sieve span budget.
pub const EXACT_TARGET_CAP: u64 = 10_000_000_000;

/// Largest target for the cross-check counter, which sieves all of [2, N].
pub const BRUTE_TARGET_CAP: u64 = 1_000_000;

/// Default Euler-product truncation for the prediction attached to counts.
pub const DEFAULT_SERIES_CUTOFF: u64 = 100_000;

/// One counted instance with its analytic prediction.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub instance: ProblemInstance,
    /// Ordered-triple count from the windowed enumeration.
    pub exact: u64,
    pub series_value: f64,
    pub main_term: f64,
    /// exact / main_term, absent when the main term vanishes.
    pub ratio: Option<f64>,
    /// Number of admissible m values the count ran over.
    pub m_values_used: u64,
    pub elapsed: Duration,
}

/// Integer endpoints of a window whose real endpoints are estimated by
/// floats: start from the float guesses, then walk each end onto the
/// predicate so counting never trusts a rounded power or product.
fn refine_window(
    est_lo: f64,
    est_hi: f64,
    min_allowed: u64,
    pred: impl Fn(u64) -> bool,
) -> Option<(u64, u64)> {
    if est_hi < min_allowed as f64 {
        return None;
    }
    let mut lo = (est_lo.floor() as i64 - 2).max(min_allowed as i64) as u64;
    let lo_stop = lo + 8;
    while lo <= lo_stop && !pred(lo) {
        lo += 1;
    }
    let mut hi = est_hi.ceil() as u64 + 2;
    let hi_stop = hi.saturating_sub(8).max(min_allowed);
    while hi >= hi_stop && !pred(hi) {
        if hi == 0 {
            return None;
        }
        hi -= 1;
    }
    (lo <= hi && pred(lo) && pred(hi)).then_some((lo, hi))
}

/// Admissible m range of an instance, or None when the window holds no
/// integer m.
fn power_range(inst: &ProblemInstance) -> Option<(u64, u64)> {
    let center = inst.mu[2] * inst.target as f64;
    let inv_n = 1.0 / inst.degree as f64;
    let est_hi = (center + inst.half_width).powf(inv_n);
    let est_lo = (center - inst.half_width).powf(inv_n);
    refine_window(est_lo, est_hi, 1, |m| inst.power_in_window(m))
}

fn prime_range(inst: &ProblemInstance, slot: usize) -> Option<(u64, u64)> {
    let center = inst.mu[slot] * inst.target as f64;
    refine_window(
        center - inst.half_width,
        center + inst.half_width,
        2,
        |p| inst.prime_in_window(slot, p),
    )
}

/// Per-m representation counts, ordered by m, one entry per admissible m
/// including those contributing zero.
pub fn count_by_m(inst: &ProblemInstance) -> Result<Vec<(u64, u64)>> {
    if inst.target > EXACT_TARGET_CAP {
        return Err(Error::Resource(format!(
            "count: target {} exceeds cap {EXACT_TARGET_CAP}",
            inst.target
        )));
    }
    let Some((m_lo, m_hi)) = power_range(inst) else {
        return Ok(Vec::new());
    };
    let Some((p1_lo, p1_hi)) = prime_range(inst, 0) else {
        return Ok((m_lo..=m_hi).map(|m| (m, 0)).collect());
    };
    let Some((p2_lo, p2_hi)) = prime_range(inst, 1) else {
        return Ok((m_lo..=m_hi).map(|m| (m, 0)).collect());
    };
    let w1 = shared_windows().get_or_sieve(p1_lo, p1_hi)?;
    let w2 = shared_windows().get_or_sieve(p2_lo, p2_hi)?;

    let counts: Vec<(u64, u64)> = (m_lo..=m_hi)
        .into_par_iter()
        .map(|m| {
            let pow = checked_pow_u128(m, inst.degree).expect("inside window implies no overflow");
            let rem = inst.target as u128 - pow;
            let mut hits = 0u64;
            for p1 in w1.primes() {
                let Some(p2) = (rem as u64).checked_sub(p1) else {
                    break;
                };
                if p2 >= p2_lo && p2 <= p2_hi && w2.contains(p2) {
                    hits += 1;
                }
            }
            (m, hits)
        })
        .collect();
    Ok(counts)
}

/// Windowed count with the default series cutoff and the derived local
/// factor.
pub fn exact_count(inst: &ProblemInstance) -> Result<CountReport> {
    exact_count_with(inst, DEFAULT_SERIES_CUTOFF, SeriesVariant::RhoMinusOne)
}

pub fn exact_count_with(
    inst: &ProblemInstance,
    series_cutoff: u64,
    variant: SeriesVariant,
) -> Result<CountReport> {
    let start = Instant::now();
    let per_m = count_by_m(inst)?;
    let exact: u64 = per_m.iter().map(|&(_, c)| c).sum();
    let series = sseries::singular_series(inst.target, inst.degree, series_cutoff, variant)?;
    let main = main_term(inst, series.value);
    Ok(CountReport {
        instance: *inst,
        exact,
        series_value: series.value,
        main_term: main,
        ratio: (main > 0.0).then(|| exact as f64 / main),
        m_values_used: per_m.len() as u64,
        elapsed: start.elapsed(),
    })
}

/// Independent recount from first principles: sieve [2, N] once, then try
/// every (p1, m) pair and look the third summand up in the table. No code
/// or loop shape shared with [`count_by_m`].
pub fn brute_count(inst: &ProblemInstance) -> Result<u64> {
    let n = inst.target;
    if n > BRUTE_TARGET_CAP {
        return Err(Error::Resource(format!(
            "brute_count: target {n} exceeds cap {BRUTE_TARGET_CAP}"
        )));
    }
    let mut is_prime = vec![true; n as usize + 1];
    is_prime[0] = false;
    if n >= 1 {
        is_prime[1] = false;
    }
    let mut i = 2usize;
    while i * i <= n as usize {
        if is_prime[i] {
            let mut j = i * i;
            while j <= n as usize {
                is_prime[j] = false;
                j += i;
            }
        }
        i += 1;
    }

    let mut count = 0u64;
    for p1 in 2..=n {
        if !is_prime[p1 as usize] || !inst.prime_in_window(0, p1) {
            continue;
        }
        let mut m = 1u64;
        while let Ok(pow) = checked_pow_u128(m, inst.degree) {
            if pow >= (n - p1) as u128 {
                break;
            }
            let p2 = n - p1 - pow as u64;
            if p2 >= 2
                && is_prime[p2 as usize]
                && inst.prime_in_window(1, p2)
                && inst.power_in_window(m)
            {
                count += 1;
            }
            m += 1;
        }
    }
    Ok(count)
}

/// The heuristic count 3 S H^2 / (n mu3^(1-1/n) N^(1-1/n) ln^2 N).
pub fn main_term(inst: &ProblemInstance, series_value: f64) -> f64 {
    let n = inst.degree as f64;
    let target = inst.target as f64;
    let h = inst.half_width;
    let log_n = target.ln();
    3.0 * series_value * h * h
        / (n * inst.mu[2].powf(1.0 - 1.0 / n) * target.powf(1.0 - 1.0 / n) * log_n * log_n)
}

/// Smallest window half-width the asymptotic analysis tolerates:
/// N^(1-theta) ln^omega N with theta = 1/((n-1)n) and
/// omega = 2^(n+1)/(n-1) + n - 1. Takes the target as a float because the
/// interesting inputs are scales, not specific integers.
pub fn h_threshold(target: f64, degree: u32) -> f64 {
    let n = degree as f64;
    let theta = 1.0 / ((n - 1.0) * n);
    let omega = 2f64.powf(n + 1.0) / (n - 1.0) + n - 1.0;
    target.powf(1.0 - theta) * target.ln().powf(omega)
}

/// Integral of sin^3(u)/u^3 over [0, upper].
///
/// The integrand extends continuously by 1 at u = 0 and the whole-line
/// value is 3 pi / 8; [`sine_cubed_tail_bound`] says how fast the finite
/// integral approaches it.
pub fn sine_cubed_integral(upper: f64) -> Result<f64> {
    if !(upper > 0.0) || !upper.is_finite() {
        return Err(Error::Domain(format!(
            "sine_cubed_integral: bad upper limit {upper}"
        )));
    }
    let f = |u: f64| {
        if u == 0.0 {
            1.0
        } else {
            (u.sin() / u).powi(3)
        }
    };
    let turns = upper / std::f64::consts::TAU;
    let start = ((10.0 * turns / 32.0).ceil() as usize).clamp(1, 1 << 20);
    quad::adaptive_real(&f, 0.0, upper, start, 1e-10, "sine_cubed_integral")
}

/// Writing sin^3 as (3 sin u - sin 3u)/4 and integrating by parts twice
/// bounds the omitted tail over [a, infinity) by 5/(3 a^3).
pub fn sine_cubed_tail_bound(a: f64) -> f64 {
    5.0 / (3.0 * a.powi(3))
}

/// The major-arc kernel integral J(h) = (8 h^2 / pi) * integral of
/// sin^3(u)/u^3 over [0, 2 pi l^2], which is 3 h^2 (1 + O(l^-6)).
pub fn j_integral(h: f64, l: f64) -> Result<f64> {
    if !(h > 0.0) || !(l > 0.0) {
        return Err(Error::Domain(format!(
            "j_integral: h and l must be positive, got {h}, {l}"
        )));
    }
    let upper = std::f64::consts::TAU * l * l;
    Ok(8.0 * h * h / std::f64::consts::PI * sine_cubed_integral(upper)?)
}
