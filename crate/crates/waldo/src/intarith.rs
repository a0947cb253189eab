//! Exact integer kernel: valuations, square-free parts, factorization, CRT,
//! Kronecker/Jacobi and Hilbert symbols.
//!
//! Everything here works on arbitrary-precision integers; the Hilbert symbol
//! additionally accepts rationals by clearing denominators (it only depends on
//! square classes).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A prime of Q or the Archimedean place.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Place {
    Finite(BigInt),
    Infinity,
}

impl Place {
    pub fn finite(p: u64) -> Self {
        Place::Finite(BigInt::from(p))
    }
}

/// Complete prime factorization of a positive integer.
///
/// Invariants: the product of `p^e` over `factors` equals `value`, primes are
/// strictly increasing, and every listed prime passes a primality check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: BigInt,
    pub factors: Vec<(BigInt, u32)>,
}

impl Factorization {
    /// Primes dividing the value.
    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn exponent_of(&self, p: &BigInt) -> u32 {
        self.factors
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }
}

/// Splits `n = p^e * u` with `p` not dividing `u`.
pub fn valuation(n: &BigInt, p: &BigInt) -> Result<(u32, BigInt)> {
    if n.is_zero() {
        return Err(Error::UndefinedValuation);
    }
    let mut e = 0u32;
    let mut u = n.clone();
    loop {
        let (q, r) = u.div_rem(p);
        if r.is_zero() {
            e += 1;
            u = q;
        } else {
            return Ok((e, u));
        }
    }
}

/// The square-free part `n^sc`: the unique square-free `m` with `n/m` square.
pub fn squarefree_part(n: &BigInt) -> Result<BigInt> {
    if !n.is_positive() {
        return Err(Error::Domain(format!("squarefree_part needs n >= 1, got {n}")));
    }
    let f = factorize(n)?;
    let mut m = BigInt::one();
    for (p, e) in &f.factors {
        if e % 2 == 1 {
            m *= p;
        }
    }
    Ok(m)
}

/// Kronecker symbol `(a/n)`, fully extended to all integers `n`.
pub fn kronecker(a: &BigInt, n: &BigInt) -> i8 {
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    let mut result: i8 = 1;
    let mut n = n.clone();
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            result = -result;
        }
    }
    // factor out twos of n; (a/2) is 0 for even a, else depends on a mod 8
    let mut a = a.clone();
    while n.is_even() {
        n /= 2;
        if a.is_even() {
            return 0;
        }
        let m8 = a.mod_floor(&BigInt::from(8)).to_i64().unwrap();
        if m8 == 3 || m8 == 5 {
            result = -result;
        }
    }
    if n.is_one() {
        return result;
    }
    // Jacobi symbol loop on odd n >= 3
    a = a.mod_floor(&n);
    while !a.is_zero() {
        while a.is_even() {
            a /= 2;
            let m8 = n.mod_floor(&BigInt::from(8)).to_i64().unwrap();
            if m8 == 3 || m8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&BigInt::from(4)).to_i64().unwrap() == 3
            && n.mod_floor(&BigInt::from(4)).to_i64().unwrap() == 3
        {
            result = -result;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// Convenience wrapper for machine-sized arguments.
pub fn kronecker_i64(a: i64, n: i64) -> i8 {
    kronecker(&BigInt::from(a), &BigInt::from(n))
}

/// Hilbert symbol `(a,b)_p` on nonzero rationals.
///
/// Uses the closed forms
/// `(2^s a, 2^t b)_2 = (2/|a|)^t (2/|b|)^s (-1)^{(a-1)(b-1)/4}` (a, b odd),
/// `(p^s a, p^t b)_p = (-1/p)^{st} (a/p)^t (b/p)^s` for odd p, and
/// `(a,b)_inf = -1` iff both arguments are negative.
pub fn hilbert(a: &BigRational, b: &BigRational, place: &Place) -> Result<i8> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::Domain("hilbert symbol needs nonzero arguments".into()));
    }
    // (a,b)_p depends only on square classes, so clear denominators first
    let a = a.numer() * a.denom();
    let b = b.numer() * b.denom();
    match place {
        Place::Infinity => Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 }),
        Place::Finite(p) => {
            let (s, au) = valuation(&a, p)?;
            let (t, bu) = valuation(&b, p)?;
            if *p == BigInt::from(2) {
                let mut r: i8 = 1;
                if t % 2 == 1 {
                    r *= kronecker(&BigInt::from(2), &au.abs());
                }
                if s % 2 == 1 {
                    r *= kronecker(&BigInt::from(2), &bu.abs());
                }
                // (-1)^{(a-1)(b-1)/4} for odd a, b (also valid for negatives)
                let two = BigInt::from(2);
                let ha = ((&au - BigInt::one()) / &two).mod_floor(&two);
                let hb = ((&bu - BigInt::one()) / &two).mod_floor(&two);
                if ha.is_one() && hb.is_one() {
                    r = -r;
                }
                Ok(r)
            } else {
                let mut r: i8 = 1;
                if s % 2 == 1 && t % 2 == 1 {
                    r *= kronecker(&BigInt::from(-1), p);
                }
                if t % 2 == 1 {
                    r *= kronecker(&au, p);
                }
                if s % 2 == 1 {
                    r *= kronecker(&bu, p);
                }
                Ok(r)
            }
        }
    }
}

/// Hilbert symbol on integer arguments.
pub fn hilbert_int(a: i64, b: i64, place: &Place) -> Result<i8> {
    hilbert(
        &BigRational::from(BigInt::from(a)),
        &BigRational::from(BigInt::from(b)),
        place,
    )
}

/// Smallest positive solution of a system of congruences `x = r (mod m)`.
///
/// Moduli need not be pairwise coprime; inconsistent systems are rejected.
pub fn crt(congruences: &[(BigInt, BigInt)]) -> Result<BigInt> {
    if congruences.is_empty() {
        return Err(Error::Domain("crt needs at least one congruence".into()));
    }
    let mut r0 = congruences[0].0.mod_floor(&congruences[0].1);
    let mut m0 = congruences[0].1.clone();
    for (r, m) in &congruences[1..] {
        let g = m0.gcd(m);
        let diff = (r - &r0).mod_floor(m);
        if !(&diff % &g).is_zero() {
            return Err(Error::NoCrtSolution);
        }
        // solve r0 + m0*k = r (mod m)
        let md = m / &g;
        let inv = mod_inverse(&((&m0 / &g).mod_floor(&md)), &md)
            .ok_or(Error::NoCrtSolution)?;
        let k = ((diff / &g) * inv).mod_floor(&md);
        r0 = &r0 + &m0 * k;
        m0 = &m0 * md;
        r0 = r0.mod_floor(&m0);
    }
    if r0.is_zero() {
        r0 = m0;
    }
    Ok(r0)
}

/// Modular inverse of `a` mod `m`, if `gcd(a, m) = 1`.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Deterministic Miller-Rabin; the base set is sufficient below 3.3e24.
pub fn is_prime(n: &BigInt) -> bool {
    if *n < BigInt::from(2) {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let sp = BigInt::from(small);
        if *n == sp {
            return true;
        }
        if (n % sp).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1;
    let (s, d) = valuation(&n_minus_1, &BigInt::from(2)).expect("n > 2");
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = x.modpow(&BigInt::from(2), n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Complete prime factorization: trial division to 1e6, then Pollard rho.
pub fn factorize(n: &BigInt) -> Result<Factorization> {
    if !n.is_positive() {
        return Err(Error::Domain(format!("factorize needs n >= 1, got {n}")));
    }
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut rest = n.clone();
    let mut d = 2u64;
    while d <= TRIAL_LIMIT {
        let bd = BigInt::from(d);
        if (&bd * &bd) > rest {
            break;
        }
        if (&rest % &bd).is_zero() {
            let (e, u) = valuation(&rest, &bd)?;
            factors.push((bd, e));
            rest = u;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > BigInt::one() {
        let bd = BigInt::from(TRIAL_LIMIT);
        if rest <= (&bd * &bd) || is_prime(&rest) {
            factors.push((rest, 1));
        } else {
            let mut stack = vec![rest];
            while let Some(m) = stack.pop() {
                if is_prime(&m) {
                    match factors.iter_mut().find(|(p, _)| *p == m) {
                        Some((_, e)) => *e += 1,
                        None => factors.push((m, 1)),
                    }
                    continue;
                }
                let d = pollard_rho(&m).ok_or_else(|| Error::FactorizationFailed(m.to_string()))?;
                stack.push(&m / &d);
                stack.push(d);
            }
        }
    }
    factors.sort_by(|a, b| a.0.cmp(&b.0));
    // merge duplicates produced by the rho splitting
    let mut merged: Vec<(BigInt, u32)> = Vec::new();
    for (p, e) in factors {
        match merged.last_mut() {
            Some((q, f)) if *q == p => *f += e,
            _ => merged.push((p, e)),
        }
    }
    Ok(Factorization {
        value: n.clone(),
        factors: merged,
    })
}

/// Brent-style Pollard rho. Returns a nontrivial factor of composite odd `n`.
fn pollard_rho(n: &BigInt) -> Option<BigInt> {
    for c in 1u64..64 {
        let c = BigInt::from(c);
        let mut x = BigInt::from(2);
        let mut y = BigInt::from(2);
        let mut d = BigInt::one();
        let f = |v: &BigInt| (v * v + &c).mod_floor(n);
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            d = (&x - &y).abs().gcd(n);
        }
        if &d != n {
            return Some(d);
        }
    }
    None
}
