//! Exact integer and rational primitives: factorization by trial division,
//! p-adic valuations, squarefree parts, and Legendre symbols.
//!
//! Everything here is pure value arithmetic over `num` big integers; there is
//! no floating point anywhere in this crate.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// Default trial-division bound. Any prime factor above this must be the
/// lone remaining cofactor, and only if it is provably prime (below the
/// square of the bound); otherwise factoring fails loudly.
pub const DEFAULT_FACTOR_BOUND: u64 = 1_000_000;

static FACTOR_BOUND: std::sync::atomic::AtomicU64 =
    std::sync::atomic::AtomicU64::new(DEFAULT_FACTOR_BOUND);

/// Override the process-wide trial-division bound used by [`factor`].
pub fn set_factor_bound(bound: u64) {
    assert!(bound >= 2, "factor bound must be at least 2");
    FACTOR_BOUND.store(bound, std::sync::atomic::Ordering::Relaxed);
}

/// The current process-wide trial-division bound.
pub fn factor_bound() -> u64 {
    FACTOR_BOUND.load(std::sync::atomic::Ordering::Relaxed)
}

/// Sign and prime-exponent table of a nonzero integer.
///
/// Invariants: all keys are primes >= 2, all exponents >= 1, and
/// `sign * prod p^e` reconstructs the original integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i32,
    pub factors: BTreeMap<u64, u32>,
}

impl Factorization {
    /// Multiply the factorization back together.
    pub fn value(&self) -> BigInt {
        let mut v = BigInt::from(self.sign);
        for (&p, &e) in &self.factors {
            v *= BigInt::from(p).pow(e);
        }
        v
    }

    /// Exponent of `p`, zero when absent.
    pub fn exponent(&self, p: u64) -> u32 {
        self.factors.get(&p).copied().unwrap_or(0)
    }

    /// The squarefree part: sign times the product of primes with odd exponent.
    pub fn squarefree_part(&self) -> BigInt {
        let mut v = BigInt::from(self.sign);
        for (&p, &e) in &self.factors {
            if e % 2 == 1 {
                v *= BigInt::from(p);
            }
        }
        v
    }

    /// Primes dividing the integer, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.keys().copied()
    }
}

/// Deterministic Miller-Rabin for u64 (the chosen bases cover the full range).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let r = (n - 1).trailing_zeros();
    let d = (n - 1) >> r;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Fast modular exponentiation.
pub fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, modulus);
        }
        base = mod_mul(base, base, modulus);
        exp >>= 1;
    }
    acc
}

/// Simple sieve; returns all primes `<= n` ascending.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            out.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    out
}

/// Factor a nonzero integer by trial division with the process-wide bound.
pub fn factor(n: &BigInt) -> Result<Factorization, Error> {
    factor_with_bound(n, factor_bound())
}

/// Factor a nonzero integer by trial division up to `bound`.
///
/// After removing every prime factor `<= bound`, a remaining cofactor is
/// accepted only if it is necessarily prime (at most `bound^2`); anything
/// larger is an `UnfactoredCofactor` error, never a silent wrong answer.
pub fn factor_with_bound(n: &BigInt, bound: u64) -> Result<Factorization, Error> {
    assert!(!n.is_zero(), "factor: input must be nonzero");
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut rest = n.abs();
    let mut factors = BTreeMap::new();
    let one = BigInt::one();

    let push = |p: u64, e: u32, factors: &mut BTreeMap<u64, u32>| {
        if e > 0 {
            *factors.entry(p).or_insert(0) += e;
        }
    };

    let mut d: u64 = 2;
    while rest > one {
        if d > bound || BigInt::from(d) * BigInt::from(d) > rest {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = rest.div_rem(&BigInt::from(d));
            if r.is_zero() {
                rest = q;
                e += 1;
            } else {
                break;
            }
        }
        push(d, e, &mut factors);
        d = match d {
            2 => 3,
            _ => d + 2,
        };
    }

    if rest > one {
        // No factor <= min(bound, sqrt(rest)) remains. If the loop stopped
        // because d^2 > rest, the cofactor is prime. If it stopped at the
        // bound, the cofactor is prime iff it is <= bound^2.
        let bound_sq = BigInt::from(bound) * BigInt::from(bound);
        if rest <= bound_sq {
            let p: u64 = (&rest).try_into().expect("cofactor fits u64");
            push(p, 1, &mut factors);
        } else {
            return Err(Error::UnfactoredCofactor { cofactor: rest });
        }
    }

    Ok(Factorization { sign, factors })
}

/// Largest `e` with `p^e | n`, for nonzero `n`.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero(), "valuation: input must be nonzero");
    assert!(is_prime(p), "valuation: {p} is not prime");
    let p = BigInt::from(p);
    let mut e = 0;
    let mut rest = n.abs();
    loop {
        let (q, r) = rest.div_rem(&p);
        if r.is_zero() {
            rest = q;
            e += 1;
        } else {
            return e;
        }
    }
}

/// p-adic valuation of a nonzero rational (negative when p divides the denominator).
pub fn valuation_rat(x: &BigRational, p: u64) -> i64 {
    assert!(!x.is_zero(), "valuation_rat: input must be nonzero");
    valuation(x.numer(), p) as i64 - valuation(x.denom(), p) as i64
}

/// Signed squarefree integer `s` such that `x / s` is a square in Q.
pub fn squarefree_part(x: &BigRational) -> Result<BigInt, Error> {
    assert!(!x.is_zero(), "squarefree_part: input must be nonzero");
    // x = n/d and n*d differ by the square d^2.
    let nd = x.numer() * x.denom();
    Ok(factor(&nd)?.squarefree_part())
}

/// Legendre symbol (u/p) for an odd prime p, via Euler's criterion.
pub fn legendre(u: &BigInt, p: u64) -> i32 {
    assert!(p > 2 && is_prime(p), "legendre: {p} must be an odd prime");
    let r = u.mod_floor(&BigInt::from(p));
    let r: u64 = r.try_into().expect("residue fits u64");
    if r == 0 {
        return 0;
    }
    let e = mod_pow(r, (p - 1) / 2, p);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// Parse a rational literal: an integer or a fraction "n/d".
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    let mk_err = || Error::Parse(format!("invalid rational literal `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| mk_err())?;
    let d: BigInt = den.parse().map_err(|_| mk_err())?;
    if d.is_zero() {
        return Err(mk_err());
    }
    Ok(BigRational::new(n, d))
}

/// Render a rational as "n" or "n/d", always in lowest terms.
pub fn rational_to_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
