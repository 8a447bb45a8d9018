//! The inequality side: exact difference polynomials, divisor counts, and
//! evaluable right-hand sides for the sum estimates.
//!
//! Weyl differencing replaces a degree-n phase by the polynomial
//!
//! ```text
//!   Delta_j(u^n; h_1..h_j) = h_1 * ... * h_j * p_j(u)
//! ```
//!
//! with p_j of degree n - j and leading coefficient n!/(n-j)!.
//! [`difference_poly`] builds p_j exactly over the integers, which is what
//! lets tests pin the differencing identity with no floating slack. The
//! other half of the module turns the printed estimates into numbers:
//! [`weyl_bound_rhs`] for the differenced sum bound, [`refined_weyl_bound`]
//! for its major-arc refinement, [`min_norm_sum`] for the classical
//! min(y, 1/||alpha*k + beta||) estimate with its explicit constant 6, and
//! [`gauss_bound_ratio`] for |S(a,q)| against q^(1-1/n).

use crate::arith::{self, frac_phase, RationalApprox};
use crate::{expsum, Error, Result};

/// Integer polynomial p_j(u) produced by j rounds of differencing, shifts
/// already substituted. coeffs[k] multiplies u^k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferencePolynomial {
    coeffs: Vec<i128>,
}

impl DifferencePolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading_coeff(&self) -> i128 {
        *self.coeffs.last().expect("polynomial is never empty")
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    /// Exact evaluation at an integer point.
    pub fn eval(&self, u: i128) -> i128 {
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }
}

/// p_j for Delta_j(u^degree) with the given shifts h_1..h_j substituted.
///
/// Applies the forward difference f(u+h) - f(u) once per shift, then
/// divides out h_1*...*h_j, which the differencing identity guarantees is
/// exact. Any zero shift collapses the difference to zero and is rejected.
pub fn difference_poly(degree: u32, j: u32, shifts: &[i64]) -> Result<DifferencePolynomial> {
    if degree < 1 {
        return Err(Error::Domain("difference_poly: degree must be >= 1".into()));
    }
    if j < 1 || j > degree - 1 {
        return Err(Error::Domain(format!(
            "difference_poly: need 1 <= j <= degree-1, got j = {j}, degree = {degree}"
        )));
    }
    if shifts.len() != j as usize {
        return Err(Error::Domain(format!(
            "difference_poly: expected {j} shifts, got {}",
            shifts.len()
        )));
    }
    if shifts.contains(&0) {
        return Err(Error::Domain("difference_poly: shifts must be nonzero".into()));
    }

    // Start from u^degree.
    let mut coeffs = vec![0i128; degree as usize + 1];
    coeffs[degree as usize] = 1;

    for &h in shifts {
        coeffs = forward_difference(&coeffs, h as i128)?;
    }

    let mut divisor: i128 = 1;
    for &h in shifts {
        divisor = divisor
            .checked_mul(h as i128)
            .ok_or_else(|| Error::Range("difference_poly: shift product overflow".into()))?;
    }
    for c in &mut coeffs {
        debug_assert_eq!(*c % divisor, 0, "differencing identity divides exactly");
        *c /= divisor;
    }
    Ok(DifferencePolynomial { coeffs })
}

/// coefficients of f(u+h) - f(u), one degree lower than f.
fn forward_difference(coeffs: &[i128], h: i128) -> Result<Vec<i128>> {
    let deg = coeffs.len() - 1;
    let mut out = vec![0i128; deg]; // degree drops by one
    let overflow = || Error::Range("difference_poly: coefficient overflow".into());
    // (u+h)^k = sum_i C(k,i) h^(k-i) u^i; the i = k term cancels with -u^k.
    for (k, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut binom: i128 = 1; // C(k, i) built incrementally from i = 0
        let mut h_pow: i128 = h.checked_pow(k as u32).ok_or_else(overflow)?;
        for (i, slot) in out[..k].iter_mut().enumerate() {
            // binom = C(k, i), h_pow = h^(k-i)
            let term = c
                .checked_mul(binom)
                .and_then(|v| v.checked_mul(h_pow))
                .ok_or_else(overflow)?;
            *slot = slot.checked_add(term).ok_or_else(overflow)?;
            binom = binom * (k as i128 - i as i128) / (i as i128 + 1);
            h_pow /= h;
        }
    }
    Ok(out)
}

/// tau_r(h): ordered r-tuples of positive integers with product h.
/// Multiplicative with tau_r(p^e) = C(e+r-1, r-1).
pub fn divisor_count(h: u64, r: u32) -> u64 {
    assert!(h >= 1 && r >= 1, "divisor_count needs h >= 1, r >= 1");
    let mut out: u128 = 1;
    for (_, e) in arith::factorize(h) {
        out *= binomial(e as u64 + r as u64 - 1, r as u64 - 1);
    }
    out.try_into().expect("divisor_count exceeds u64")
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (n - i) as u128 / (i + 1) as u128;
    }
    out
}

/// Outcome of the min-norm sum against its closed-form bound.
#[derive(Debug, Clone, Copy)]
pub struct NormSumCheck {
    pub value: f64,
    pub bound: f64,
    pub ok: bool,
}

/// sum over 1 <= k <= x of min(y, 1/||alpha*k + beta||), compared against
/// 6 (x/q + 1)(y + q ln q).
///
/// ||t|| is the distance to the nearest integer; terms where it vanishes
/// contribute y (the min saturates). The bound needs |alpha - a/q| <= 1/q^2,
/// which holds for anything [`arith::dirichlet_approx`] produces.
pub fn min_norm_sum(approx: &RationalApprox, x: f64, y: f64, beta: f64) -> NormSumCheck {
    let mut value = arith::KahanSum::new();
    let last = x.floor() as u64;
    for k in 1..=last {
        let t = frac_phase(approx, k, 1).expect("degree-1 powers cannot overflow");
        let t = (t + beta).rem_euclid(1.0);
        let dist = t.min(1.0 - t);
        let term = if dist == 0.0 { y } else { y.min(1.0 / dist) };
        value.add(term);
    }
    let q = approx.q as f64;
    let bound = 6.0 * (x / q + 1.0) * (y + q * q.ln());
    NormSumCheck {
        value: value.value(),
        bound,
        ok: value.value() <= bound,
    }
}

/// Right-hand side of the differenced Weyl-sum estimate:
/// y * (1/q + 1/y + q/y^n)^(2^-n) * (ln(q*y))^((n-1)^2 * 2^-n).
pub fn weyl_bound_rhs(q: u64, y: f64, n: u32) -> f64 {
    assert!(q >= 1 && y > 1.0, "weyl_bound_rhs needs q >= 1, y > 1");
    let qf = q as f64;
    let outer = 0.5f64.powi(n as i32);
    let bracket = 1.0 / qf + 1.0 / y + qf / y.powi(n as i32);
    let log_exp = ((n - 1) * (n - 1)) as f64 * outer;
    y * bracket.powf(outer) * (qf * y).ln().powf(log_exp)
}

/// Major-arc complement bound:
/// q^(1-1/n) ln q + min(y * q^(-1/n), x^(1/2) * q^(1/2 - 1/n)).
pub fn refined_weyl_bound(q: u64, x: f64, y: f64, n: u32) -> f64 {
    assert!(q >= 1 && x > 0.0 && y > 0.0, "refined_weyl_bound domain");
    let qf = q as f64;
    let inv_n = 1.0 / n as f64;
    qf.powf(1.0 - inv_n) * qf.ln() + (y * qf.powf(-inv_n)).min(x.sqrt() * qf.powf(0.5 - inv_n))
}

/// max over a coprime to q of |S(a, q)| / q^(1-1/n). The complete-sum
/// estimate says this stays bounded by a constant depending only on n.
pub fn gauss_bound_ratio(q: u64, n: u32) -> f64 {
    assert!(q >= 2, "gauss_bound_ratio needs q >= 2");
    let mut worst: f64 = 0.0;
    for a in 1..q {
        if arith::gcd(a, q) != 1 {
            continue;
        }
        let s = expsum::complete_sum(a as i64, q, n).expect("q >= 2 checked");
        worst = worst.max(s.norm());
    }
    worst / (q as f64).powf(1.0 - 1.0 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_difference_of_cube() {
        // Delta_1(u^3; h)/h = 3u^2 + 3hu + h^2.
        for h in [1i64, 2, 5, -3] {
            let p = difference_poly(3, 1, &[h]).unwrap();
            assert_eq!(p.coeffs(), &[(h * h) as i128, 3 * h as i128, 3]);
            assert_eq!(p.degree(), 2);
            assert_eq!(p.leading_coeff(), 3);
        }
    }

    #[test]
    fn second_difference_of_cube() {
        // Delta_2(u^3; h1, h2)/(h1 h2) = 6u + 3(h1 + h2).
        let p = difference_poly(3, 2, &[2, 7]).unwrap();
        assert_eq!(p.coeffs(), &[27, 6]);
        assert_eq!(p.leading_coeff(), 6); // 3!/1!
    }

    #[test]
    fn third_difference_of_fourth_power() {
        // Delta_3(u^4)/(h1 h2 h3) = 24u + 12(h1 + h2 + h3).
        let p = difference_poly(4, 3, &[1, 2, 3]).unwrap();
        assert_eq!(p.coeffs(), &[12 * 6, 24]);
        assert_eq!(p.leading_coeff(), 24); // 4!/1!
    }

    #[test]
    fn zero_shift_rejected() {
        assert!(matches!(
            difference_poly(3, 2, &[1, 0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(difference_poly(3, 3, &[1, 1, 1]), Err(Error::Domain(_))));
    }

    /// The identity h1*...*hj * p_j(u) = iterated difference of u^n, checked
    /// pointwise against direct evaluation of the nested differences.
    #[test]
    fn differencing_identity_pointwise() {
        fn iterated(n: u32, shifts: &[i64], u: i128) -> i128 {
            // Sum over subsets of shifts with inclusion-exclusion signs.
            let j = shifts.len();
            let mut total: i128 = 0;
            for mask in 0..(1u32 << j) {
                let mut point = u;
                for (i, &h) in shifts.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        point += h as i128;
                    }
                }
                let sign = if (j as u32 - mask.count_ones()) % 2 == 0 {
                    1
                } else {
                    -1
                };
                total += sign * point.pow(n);
            }
            total
        }

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = rng.random_range(2u32..=8);
            let j = rng.random_range(1..n);
            let shifts: Vec<i64> = (0..j)
                .map(|_| {
                    let h = rng.random_range(-20i64..=20);
                    if h == 0 {
                        1
                    } else {
                        h
                    }
                })
                .collect();
            let p = difference_poly(n, j, &shifts).unwrap();
            assert_eq!(p.degree(), (n - j) as usize);
            let u = rng.random_range(-50i128..=50);
            let lhs: i128 = shifts.iter().map(|&h| h as i128).product::<i128>() * p.eval(u);
            assert_eq!(lhs, iterated(n, &shifts, u), "n={n} shifts={shifts:?} u={u}");
        }
    }

    #[test]
    fn divisor_count_small_values() {
        assert_eq!(divisor_count(6, 2), 4); // 1*6, 2*3, 3*2, 6*1
        assert_eq!(divisor_count(1, 5), 1);
        assert_eq!(divisor_count(12, 2), 6);
    }

    #[test]
    fn divisor_count_matches_enumeration() {
        // tau_3(4) = 6 by listing; then random spot checks of tau_2 and
        // tau_3 against direct nested loops.
        let enumerate3 = |h: u64| -> u64 {
            let mut count = 0;
            for d1 in 1..=h {
                if h % d1 != 0 {
                    continue;
                }
                for d2 in 1..=h / d1 {
                    if (h / d1) % d2 == 0 {
                        count += 1;
                    }
                }
            }
            count
        };
        assert_eq!(divisor_count(4, 3), 6);
        assert_eq!(enumerate3(4), 6);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..50 {
            let h = rng.random_range(1u64..500);
            assert_eq!(divisor_count(h, 3), enumerate3(h), "h = {h}");
            let tau2 = (1..=h).filter(|d| h % d == 0).count() as u64;
            assert_eq!(divisor_count(h, 2), tau2, "h = {h}");
        }
    }

    #[test]
    fn divisor_count_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..100 {
            let a = rng.random_range(1u64..1000);
            let b = rng.random_range(1u64..1000);
            if arith::gcd(a, b) == 1 {
                for r in 2..=4 {
                    assert_eq!(
                        divisor_count(a * b, r),
                        divisor_count(a, r) * divisor_count(b, r)
                    );
                }
            }
        }
    }

    /// Moment sums of tau_r against the explicit divisor-moment bound
    /// x * r^k / (r!)^((r^k-1)/(r-1)) * (ln x + r^k - 1)^(r^k - 1),
    /// implied constant one. The r = 2, k = 1 case is within ten percent
    /// at x = 1e5, so this is not a vacuous check.
    #[test]
    fn divisor_moment_bound_holds() {
        let x_max = 100_000usize;
        // Smallest-prime-factor table for fast factoring of every h <= x.
        let mut spf = vec![0u32; x_max + 1];
        for i in 2..=x_max {
            if spf[i] == 0 {
                let mut j = i;
                while j <= x_max {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let tau = |mut h: usize, r: u64| -> u64 {
            let mut out: u64 = 1;
            while h > 1 {
                let p = spf[h] as usize;
                let mut e = 0u64;
                while h % p == 0 {
                    h /= p;
                    e += 1;
                }
                out *= binomial(e + r - 1, r - 1) as u64;
            }
            out
        };

        for r in [2u64, 3] {
            for k in [1u32, 2] {
                let rk = r.pow(k) as f64;
                let factorial_r =
                    ((1..=r).product::<u64>() as f64).powf((rk - 1.0) / (r as f64 - 1.0));
                for (x, label) in [(1_000usize, "1e3"), (10_000, "1e4"), (100_000, "1e5")] {
                    let sum: f64 =
                        (1..=x).map(|h| (tau(h, r) as f64).powi(k as i32)).sum();
                    let bound =
                        x as f64 * rk / factorial_r * ((x as f64).ln() + rk - 1.0).powf(rk - 1.0);
                    assert!(
                        sum <= bound,
                        "r={r} k={k} x={label}: sum {sum} > bound {bound}"
                    );
                }
            }
        }
    }

    #[test]
    fn norm_sum_at_half() {
        // alpha = 1/2, beta = 0, x = 4, y = 10: terms 2, 10, 2, 10.
        let approx = RationalApprox::new(1, 2, 0.0).unwrap();
        let check = min_norm_sum(&approx, 4.0, 10.0, 0.0);
        assert_eq!(check.value, 24.0);
        let want_bound = 6.0 * 3.0 * (10.0 + 2.0 * 2f64.ln());
        assert!((check.bound - want_bound).abs() < 1e-12);
        assert!(check.ok);
    }

    #[test]
    fn norm_sum_empty_below_one() {
        let approx = RationalApprox::new(1, 3, 0.0).unwrap();
        let check = min_norm_sum(&approx, 0.7, 5.0, 0.3);
        assert_eq!(check.value, 0.0);
        assert!(check.ok);
    }

    #[test]
    fn norm_sum_all_terms_saturate_at_zero_frequency() {
        let approx = RationalApprox::new(0, 1, 0.0).unwrap();
        let check = min_norm_sum(&approx, 25.0, 7.0, 0.0);
        assert_eq!(check.value, 25.0 * 7.0);
        assert!(check.ok, "bound {} value {}", check.bound, check.value);
    }

    #[test]
    fn norm_sum_bound_on_random_admissible_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..300 {
            let q = rng.random_range(1u64..100);
            let a = if q == 1 {
                0
            } else {
                let mut a = rng.random_range(1u64..q);
                while arith::gcd(a, q) != 1 {
                    a = rng.random_range(1u64..q);
                }
                a as i64
            };
            let lambda = rng.random_range(-1.0..1.0) / (q * q) as f64;
            let approx = RationalApprox::new(a, q, lambda).unwrap();
            let x = rng.random_range(1.0..2000.0);
            let y = rng.random_range(0.5..500.0);
            let beta = rng.random_range(0.0..1.0);
            let check = min_norm_sum(&approx, x, y, beta);
            assert!(check.ok, "q={q} lambda={lambda} x={x} y={y} beta={beta}");
        }
    }

    #[test]
    fn weyl_rhs_trivial_at_q1() {
        // (1 + 1/y + 1/y^n)^(2^-n) >= 1, so the bound can never dip under y.
        for y in [10.0, 100.0, 1e4] {
            for n in 3..=5 {
                assert!(weyl_bound_rhs(1, y, n) >= y);
            }
        }
    }

    #[test]
    fn weyl_rhs_frozen_value() {
        // n = 3, q = y = 100: bracket is 0.01 + 0.01 + 100/1e6 = 0.0201.
        let got = weyl_bound_rhs(100, 100.0, 3);
        let want = 100.0 * 0.0201f64.powf(0.125) * (1e4f64).ln().powf(0.5);
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn weyl_rhs_bracket_symmetric_at_endpoints() {
        // 1/q + q/y^n takes the same value at q = 1 and q = y^n; only the
        // logarithm distinguishes the two ends.
        let (y, n) = (10.0f64, 3u32);
        let q_hi = 1000u64; // y^n
        let strip = |q: u64| {
            weyl_bound_rhs(q, y, n) / (q as f64 * y).ln().powf(4.0 * 0.125)
        };
        assert!((strip(1) - strip(q_hi)).abs() < 1e-10);
    }

    #[test]
    fn refined_weyl_min_picks_branches() {
        // q = 1: ln q = 0 and both min arguments are y and sqrt(x).
        let b = refined_weyl_bound(1, 100.0, 5.0, 3);
        assert!((b - 5.0).abs() < 1e-12);
        let b = refined_weyl_bound(1, 100.0, 50.0, 3);
        assert!((b - 10.0).abs() < 1e-12);
        // Frozen composite value: n = 3, q = 8, x = 1e6, y = 1e3.
        let b = refined_weyl_bound(8, 1e6, 1e3, 3);
        let want = 4.0 * 8f64.ln() + 500.0;
        assert!((b - want).abs() < 1e-9, "got {b}");
    }

    #[test]
    fn gauss_ratio_q2_cubes_vanish() {
        // e(1/2) + e(8/2) cancels exactly; only sin(pi) rounding survives.
        assert!(gauss_bound_ratio(2, 3) < 1e-12);
    }

    #[test]
    fn gauss_ratio_nine_cubes() {
        let got = gauss_bound_ratio(9, 3);
        let smax = 3.0 * (1.0 + 2.0 * (std::f64::consts::TAU / 9.0).cos());
        assert!((got - smax / 9f64.powf(2.0 / 3.0)).abs() < 1e-10);
        assert!((got - 1.7557).abs() < 1e-4);
    }

    #[test]
    fn gauss_ratio_vanishes_when_cubing_permutes() {
        // gcd(3, p-1) = 1 makes k -> k^3 a bijection mod p, so S(a, p) = 0.
        for p in [5u64, 11, 17, 23] {
            assert!(gauss_bound_ratio(p, 3) < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn gauss_ratio_stays_bounded_spot_check() {
        for q in 2u64..=60 {
            for n in [3, 4] {
                let r = gauss_bound_ratio(q, n);
                assert!(r <= n as f64 + 1e-9, "q={q} n={n} ratio={r}");
            }
        }
    }
}
