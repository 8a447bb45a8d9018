//! Counting representations of an integer N as p1 + p2 + m^n where p1, p2
//! are primes, m is a positive integer, and all three summands are pinned to
//! prescribed proportions of N: |p_k - mu_k*N| <= H and |m^n - mu_3*N| <= H.
//!
//! The crate has two halves that check each other:
//!
//! * exact machinery: windowed prime sieves and a direct count of the
//!   representations (`primes`, `repcount::exact_count`);
//! * analytic machinery: exponential sums over the m-window and the prime
//!   windows, their major-arc approximants, a singular series, and the
//!   main-term prediction the circle method attaches to the count
//!   (`expsum`, `sseries`, `dissect`, `repcount::main_term`).
//!
//! `bounds` holds the inequality side (Weyl-differencing bound evaluation,
//! divisor-sum and min-norm estimates, complete-sum ratios) so that measured
//! sums can be compared against what the estimates permit. `verify` packages
//! the whole-crate checks behind named criteria; the `ternary` binary exposes
//! everything on the command line.
//!
//! Phase arithmetic never forms a lone floating-point alpha. A frequency is
//! carried as `a/q + lambda` (see [`arith::RationalApprox`]) and the two
//! pieces enter phases separately, the rational part exactly mod 1 and the
//! lambda part through an exact dyadic product. That is what keeps sums with
//! m^n near 2^40 reproducible to the last bit.

// Divisibility tests in sieve and factorization code stay in `x % p == 0`
// form, and parameter guards use `!(x > 0.0)` so that NaN falls into the
// error branch instead of slipping past a `x <= 0.0` test.
#![allow(clippy::manual_is_multiple_of)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod bounds;
pub mod cli;
pub mod dissect;
mod error;
pub mod expsum;
pub mod primes;
mod quad;
pub mod repcount;
pub mod sseries;
pub mod verify;

pub use error::{Error, Result};

/// Complex value type used for every exponential-sum result.
pub type Complex = num_complex::Complex<f64>;
