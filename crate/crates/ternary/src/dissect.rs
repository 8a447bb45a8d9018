//! Problem instances and the Farey dissection of the unit interval.
//!
//! An instance fixes the target N, the power degree n, the proportions
//! mu = (mu1, mu2, mu3) summing to 1, and the half-width H. A valid
//! representation N = p1 + p2 + m^n keeps every summand inside its window:
//! |p_k - mu_k N| <= H and |m^n - mu3 N| <= H. The window predicates live
//! on the instance so that every counting path applies the same closed
//! boundary test; off-by-one disagreements at window edges are exactly the
//! kind of bug two independent counters would otherwise hide.
//!
//! The dissection splits alpha in [0, 1) by its rational approximation
//! a/q + lambda with q at most tau, where
//!
//! ```text
//!   N3  = (mu3 N + H)^(1/n)          largest admissible m
//!   H3  = N3 - (mu3 N - H)^(1/n)     width of the m-range
//!   tau = 2 n (n-1) N3^(n-2) H3
//! ```
//!
//! tau is the phase-variation scale of the power sum: on a frequency
//! window of length 1/tau the degree-n phase over the m-range turns by
//! O(1). Small q and |lambda| <= ln^2(N)/H is the core major arc (Major1);
//! small q with |lambda| up to 1/(q tau) is the transitional band (Major2)
//! where the completed sum still controls the answer; large q is minor.
//! The q-threshold is ln(N)^eta with eta = 2^(n+1) + (n-1)^2, which at
//! practical N exceeds tau itself, so [`classify_with_eta`] accepts a
//! smaller exponent for experiments that want to see nonempty minor arcs.

use serde::Serialize;

use crate::arith::{self, checked_pow_u128, RationalApprox};
use crate::{Error, Result};

/// The counting problem: N, n, proportions, and window half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemInstance {
    pub target: u64,
    pub degree: u32,
    pub mu: [f64; 3],
    pub half_width: f64,
}

impl ProblemInstance {
    pub fn new(target: u64, degree: u32, mu: [f64; 3], half_width: f64) -> Result<Self> {
        if degree < 3 {
            return Err(Error::Domain(format!(
                "instance: degree {degree} below 3"
            )));
        }
        if target < 2 {
            return Err(Error::Domain("instance: target must be >= 2".into()));
        }
        if mu.iter().any(|&m| m <= 0.0 || !m.is_finite()) {
            return Err(Error::Domain(format!(
                "instance: proportions must be positive, got {mu:?}"
            )));
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "instance: proportions sum to {total}, not 1"
            )));
        }
        let min_window = mu.iter().fold(f64::INFINITY, |a, &m| a.min(m)) * target as f64;
        if !(half_width > 0.0) || half_width >= min_window {
            return Err(Error::Domain(format!(
                "instance: half-width {half_width} outside (0, {min_window})"
            )));
        }
        Ok(Self {
            target,
            degree,
            mu,
            half_width,
        })
    }

    /// Uniform proportions 1/3 with H = N^exponent.
    pub fn symmetric(target: u64, degree: u32, exponent: f64) -> Result<Self> {
        let third = 1.0 / 3.0;
        Self::new(
            target,
            degree,
            [third, third, third],
            (target as f64).powf(exponent),
        )
    }

    /// Closed window test for the prime in slot 0 or 1.
    pub fn prime_in_window(&self, slot: usize, p: u64) -> bool {
        assert!(slot < 2, "prime slots are 0 and 1");
        (p as f64 - self.mu[slot] * self.target as f64).abs() <= self.half_width
    }

    /// Closed window test for the power summand m^n.
    pub fn power_in_window(&self, m: u64) -> bool {
        match checked_pow_u128(m, self.degree) {
            Ok(pow) => (pow as f64 - self.mu[2] * self.target as f64).abs() <= self.half_width,
            Err(_) => false,
        }
    }

    pub fn log_target(&self) -> f64 {
        (self.target as f64).ln()
    }
}

/// Derived scales of an instance: window tops, the m-range, the Farey
/// order tau, and the exponents theta, omega, eta tied to the degree.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DissectionParams {
    /// mu_k N + H for the two prime slots.
    pub prime_upper: [f64; 2],
    /// N3: the top of the m-range.
    pub root_upper: f64,
    /// H3: the length of the m-range.
    pub root_width: f64,
    /// Farey order bounding denominators in the dissection.
    pub tau: f64,
    /// Exponent in the admissible-H threshold N^(1-theta) ln^omega N.
    pub theta: f64,
    pub omega: f64,
    /// Exponent of the ln^eta q-threshold separating major from minor.
    pub eta: f64,
    /// ln N.
    pub log_n: f64,
    /// ln^2(N)/H, the |lambda| radius of the core major arc.
    pub major_radius: f64,
}

pub fn dissection_params(inst: &ProblemInstance) -> Result<DissectionParams> {
    let n = inst.degree as f64;
    let target = inst.target as f64;
    let h = inst.half_width;
    let inv_n = 1.0 / n;
    let root_upper = (inst.mu[2] * target + h).powf(inv_n);
    let root_width = root_upper - (inst.mu[2] * target - h).powf(inv_n);
    let tau = 2.0 * n * (n - 1.0) * root_upper.powf(n - 2.0) * root_width;
    if !(tau >= 1.0) {
        return Err(Error::Range(format!(
            "dissection: Farey order tau = {tau} below 1; instance too small"
        )));
    }
    let log_n = target.ln();
    Ok(DissectionParams {
        prime_upper: [
            inst.mu[0] * target + h,
            inst.mu[1] * target + h,
        ],
        root_upper,
        root_width,
        tau,
        theta: 1.0 / ((n - 1.0) * n),
        omega: 2f64.powf(n + 1.0) / (n - 1.0) + n - 1.0,
        eta: 2f64.powf(n + 1.0) + (n - 1.0) * (n - 1.0),
        log_n,
        major_radius: log_n * log_n / h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcClass {
    Major1,
    Major2,
    Minor,
}

impl ArcClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ArcClass::Major1 => "major1",
            ArcClass::Major2 => "major2",
            ArcClass::Minor => "minor",
        }
    }
}

impl std::fmt::Display for ArcClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies alpha with the instance's own eta threshold.
pub fn classify_arc(
    alpha: f64,
    params: &DissectionParams,
) -> Result<(ArcClass, RationalApprox)> {
    classify_with_eta(alpha, params, params.eta)
}

/// Classification with an explicit eta. Every alpha receives a denominator
/// q at most floor(tau) with |lambda| <= 1/(q floor(tau)); the class is
///
/// * Major1: q <= ln^eta N and |lambda| <= ln^2(N)/H,
/// * Major2: q <= ln^eta N and |lambda| beyond the Major1 radius,
/// * Minor: q > ln^eta N.
pub fn classify_with_eta(
    alpha: f64,
    params: &DissectionParams,
    eta: f64,
) -> Result<(ArcClass, RationalApprox)> {
    let cap = params.tau.floor().max(1.0) as u64;
    let approx = arith::dirichlet_approx(alpha, cap)?;
    let q_limit = params.log_n.powf(eta);
    let class = if (approx.q as f64) > q_limit {
        ArcClass::Minor
    } else if approx.lambda.abs() <= params.major_radius {
        ArcClass::Major1
    } else {
        ArcClass::Major2
    };
    Ok((class, approx))
}
