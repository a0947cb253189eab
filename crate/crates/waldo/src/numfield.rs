//! Exact arithmetic in the ring Q(sqrt2, sqrt3) on the basis 1, sqrt2, sqrt3, sqrt6.
//!
//! Theta combinations carry coefficients like 1/sqrt6, sqrt2 and sqrt3; this is
//! the smallest ring containing all of them, so series coefficients stay exact.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::waldlocal::RadicalValue;

/// Element of Q(sqrt2, sqrt3): `a0 + a1*sqrt2 + a2*sqrt3 + a3*sqrt6`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NF4 {
    pub coords: [BigRational; 4],
}

impl NF4 {
    pub fn new(a0: BigRational, a1: BigRational, a2: BigRational, a3: BigRational) -> Self {
        NF4 {
            coords: [a0, a1, a2, a3],
        }
    }

    pub fn zero() -> Self {
        NF4::default()
    }

    pub fn one() -> Self {
        NF4::from_rational(BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut v = NF4::default();
        v.coords[0] = r;
        v
    }

    pub fn from_int(n: i64) -> Self {
        NF4::from_rational(BigRational::from(BigInt::from(n)))
    }

    /// `r * sqrt(d)` for d in {1, 2, 3, 6}.
    pub fn radical(r: BigRational, d: u64) -> Result<Self> {
        let idx = match d {
            1 => 0,
            2 => 1,
            3 => 2,
            6 => 3,
            _ => return Err(Error::UnsupportedRadicand(d)),
        };
        let mut v = NF4::default();
        v.coords[idx] = r;
        Ok(v)
    }

    /// `1/sqrt6 = sqrt6/6`.
    pub fn inv_sqrt6() -> Self {
        NF4::radical(BigRational::new(BigInt::from(1), BigInt::from(6)), 6).unwrap()
    }

    pub fn sqrt2() -> Self {
        NF4::radical(BigRational::one(), 2).unwrap()
    }

    pub fn sqrt3() -> Self {
        NF4::radical(BigRational::one(), 3).unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// The rational part, when the element is rational.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coords[0])
        } else {
            None
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        NF4 {
            coords: [
                &self.coords[0] * r,
                &self.coords[1] * r,
                &self.coords[2] * r,
                &self.coords[3] * r,
            ],
        }
    }
}

/// Ring product under sqrt2*sqrt3 = sqrt6, sqrt2^2 = 2, sqrt3^2 = 3, sqrt6^2 = 6.
pub fn nf_mul(x: &NF4, y: &NF4) -> NF4 {
    let [a0, a1, a2, a3] = &x.coords;
    let [b0, b1, b2, b3] = &y.coords;
    let two = BigRational::from(BigInt::from(2));
    let three = BigRational::from(BigInt::from(3));
    let six = BigRational::from(BigInt::from(6));
    NF4::new(
        a0 * b0 + &two * (a1 * b1) + &three * (a2 * b2) + &six * (a3 * b3),
        a0 * b1 + a1 * b0 + &three * (a2 * b3 + a3 * b2),
        a0 * b2 + a2 * b0 + &two * (a1 * b3 + a3 * b1),
        a0 * b3 + a3 * b0 + a1 * b2 + a2 * b1,
    )
}

/// `x^2` when it is rational; fails when the square has an irrational part.
pub fn nf_square_rational(x: &NF4) -> Result<BigRational> {
    let sq = nf_mul(x, x);
    sq.as_rational()
        .cloned()
        .ok_or_else(|| Error::NotRational(format!("({x})^2 = {sq}")))
}

/// Bridge from a local-function value into the quartic ring.
pub fn embed_radical(v: &RadicalValue) -> Result<NF4> {
    if v.coeff.is_zero() {
        return Ok(NF4::zero());
    }
    NF4::radical(v.coeff.clone(), v.radicand)
}

impl Add for NF4 {
    type Output = NF4;
    fn add(self, rhs: NF4) -> NF4 {
        &self + &rhs
    }
}

impl Add for &NF4 {
    type Output = NF4;
    fn add(self, rhs: &NF4) -> NF4 {
        NF4 {
            coords: [
                &self.coords[0] + &rhs.coords[0],
                &self.coords[1] + &rhs.coords[1],
                &self.coords[2] + &rhs.coords[2],
                &self.coords[3] + &rhs.coords[3],
            ],
        }
    }
}

impl AddAssign<&NF4> for NF4 {
    fn add_assign(&mut self, rhs: &NF4) {
        for i in 0..4 {
            self.coords[i] += &rhs.coords[i];
        }
    }
}

impl Sub for &NF4 {
    type Output = NF4;
    fn sub(self, rhs: &NF4) -> NF4 {
        NF4 {
            coords: [
                &self.coords[0] - &rhs.coords[0],
                &self.coords[1] - &rhs.coords[1],
                &self.coords[2] - &rhs.coords[2],
                &self.coords[3] - &rhs.coords[3],
            ],
        }
    }
}

impl Neg for &NF4 {
    type Output = NF4;
    fn neg(self) -> NF4 {
        NF4 {
            coords: [
                -&self.coords[0],
                -&self.coords[1],
                -&self.coords[2],
                -&self.coords[3],
            ],
        }
    }
}

impl Mul for &NF4 {
    type Output = NF4;
    fn mul(self, rhs: &NF4) -> NF4 {
        nf_mul(self, rhs)
    }
}

const BASIS_NAMES: [&str; 4] = ["", "s2", "s3", "s6"];

impl fmt::Display for NF4 {
    /// Textual form `p/q + p/q*s2 + p/q*s3 + p/q*s6` with zero terms omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if i == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", BASIS_NAMES[i])?;
            } else {
                write!(f, "{mag}*{}", BASIS_NAMES[i])?;
            }
        }
        Ok(())
    }
}

impl FromStr for NF4 {
    type Err = Error;

    fn from_str(s: &str) -> Result<NF4> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty NF4 literal".into()));
        }
        let mut out = NF4::zero();
        // split into signed terms
        let mut terms: Vec<(i8, String)> = Vec::new();
        let mut sign: i8 = 1;
        let mut cur = String::new();
        for ch in s.chars() {
            match ch {
                '+' | '-' => {
                    if cur.trim().is_empty() && terms.is_empty() {
                        // leading sign
                        if ch == '-' {
                            sign = -sign;
                        }
                    } else if cur.trim().is_empty() {
                        return Err(Error::Parse(format!("dangling sign in {s:?}")));
                    } else {
                        terms.push((sign, std::mem::take(&mut cur)));
                        sign = if ch == '-' { -1 } else { 1 };
                    }
                }
                _ => cur.push(ch),
            }
        }
        if cur.trim().is_empty() {
            return Err(Error::Parse(format!("trailing sign in {s:?}")));
        }
        terms.push((sign, cur));

        for (sign, term) in terms {
            let term = term.trim();
            let (rat_str, idx) = if let Some(stripped) = term.strip_suffix("s2") {
                (stripped.trim().trim_end_matches('*').trim(), 1)
            } else if let Some(stripped) = term.strip_suffix("s3") {
                (stripped.trim().trim_end_matches('*').trim(), 2)
            } else if let Some(stripped) = term.strip_suffix("s6") {
                (stripped.trim().trim_end_matches('*').trim(), 3)
            } else {
                (term, 0)
            };
            let rat = if rat_str.is_empty() {
                BigRational::one()
            } else {
                parse_rational(rat_str)?
            };
            let signed = if sign < 0 { -rat } else { rat };
            out.coords[idx] += signed;
        }
        Ok(out)
    }
}

/// Parses `p` or `p/q` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}
