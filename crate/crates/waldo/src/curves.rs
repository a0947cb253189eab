//! Elliptic-curve side of the pipeline: short Weierstrass models, quadratic
//! twists, period-ratio validity, 2-torsion counts, closed-form Tamagawa
//! products, root numbers for the conductor-496 family, and BSD-conditional
//! Tate-Shafarevich orders.
//!
//! L-values are never computed numerically; every formula is emitted
//! relative to the symbolic period constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intarith::{factorize, kronecker_i64, squarefree_part};
use crate::numfield::{nf_square_rational, NF4};

/// `Y² = X³ + AX² + BX + C` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortModel {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    /// 16 times the discriminant of the cubic.
    pub disc: BigInt,
    /// Set when the quartic-scaled integral model was needed.
    pub scaled: bool,
}

fn cubic_disc(a: i128, b: i128, c: i128) -> BigInt {
    let (a, b, c) = (BigInt::from(a), BigInt::from(b), BigInt::from(c));
    BigInt::from(18) * &a * &b * &c - BigInt::from(4) * &a * &a * &a * &c
        + &a * &a * &b * &b
        - BigInt::from(4) * &b * &b * &b
        - BigInt::from(27) * &c * &c
}

impl ShortModel {
    pub fn from_cubic(a: i128, b: i128, c: i128) -> Result<Self> {
        Self::from_cubic_scaled(a, b, c, false)
    }

    fn from_cubic_scaled(a: i128, b: i128, c: i128, scaled: bool) -> Result<Self> {
        let disc = BigInt::from(16) * cubic_disc(a, b, c);
        if disc.is_zero() {
            return Err(Error::Domain(format!(
                "singular model Y² = X³ + {a}X² + {b}X + {c}"
            )));
        }
        Ok(ShortModel { a, b, c, disc, scaled })
    }

}

impl std::fmt::Display for ShortModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Y^2 = X^3 + {}X^2 + {}X + {}", self.a, self.b, self.c)
    }
}

/// Completes the square of a long Weierstrass model. Returns `(b2/4, b4/2,
/// b6/4)` when integral, otherwise the quartic-scaled integral model
/// `(b2, 8 b4, 16 b6)`.
pub fn short_model(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64) -> Result<ShortModel> {
    let (a1, a2, a3, a4, a6) = (
        a1 as i128,
        a2 as i128,
        a3 as i128,
        a4 as i128,
        a6 as i128,
    );
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    if b2 % 4 == 0 && b4 % 2 == 0 && b6 % 4 == 0 {
        ShortModel::from_cubic(b2 / 4, b4 / 2, b6 / 4)
    } else {
        ShortModel::from_cubic_scaled(b2, 8 * b4, 16 * b6, true)
    }
}

/// The n-th quadratic twist `Y² = X³ + AnX² + Bn²X + Cn³`.
pub fn twist(m: &ShortModel, n: i64) -> Result<ShortModel> {
    if n == 0 {
        return Err(Error::Domain("twist by 0 is undefined".into()));
    }
    let abs = BigInt::from(n.unsigned_abs());
    if squarefree_part(&abs)? != abs {
        return Err(Error::Domain(format!("twist parameter {n} is not square-free")));
    }
    let n = n as i128;
    ShortModel::from_cubic_scaled(m.a * n, m.b * n * n, m.c * n * n * n, m.scaled)
}

/// True iff |disc| is sixth-power free, licensing `Ω(E_n) = Ω(E_1)/√n`.
pub fn period_ratio_valid(m: &ShortModel) -> bool {
    let f = factorize(&m.disc.abs()).expect("nonzero disc");
    f.factors.iter().all(|(_, e)| *e < 6)
}

/// Polynomial arithmetic mod (p, cubic) for counting distinct roots.
fn polymul(a: &[u64; 3], b: &[u64; 3], f: &[u64; 3], p: u64) -> [u64; 3] {
    // multiply then reduce by X³ = -(f2 X² + f1 X + f0)
    let p = p as u128;
    let mut prod = [0u128; 5];
    for i in 0..3 {
        for j in 0..3 {
            prod[i + j] = (prod[i + j] + a[i] as u128 * b[j] as u128) % p;
        }
    }
    for i in (3..5).rev() {
        let coef = prod[i];
        if coef == 0 {
            continue;
        }
        prod[i] = 0;
        for (k, &fk) in f.iter().enumerate() {
            let idx = i - 3 + k;
            prod[idx] = (prod[idx] + coef * (p - fk as u128) % p) % p;
        }
    }
    [prod[0] as u64, prod[1] as u64, prod[2] as u64]
}

/// Number of distinct roots of the monic cubic `X³ + aX² + bX + c` mod p,
/// via deg gcd(X^p - X, cubic).
fn cubic_root_count(a: u64, b: u64, c: u64, p: u64) -> u32 {
    // x^p mod cubic by binary exponentiation
    let f = [c, b, a];
    let mut base = [0u64, 1, 0];
    let mut acc = [1u64, 0, 0];
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            acc = polymul(&acc, &base, &f, p);
        }
        base = polymul(&base, &base, &f, p);
        e >>= 1;
    }
    // g = gcd(cubic, x^p - x)
    acc[1] = (acc[1] + p - 1) % p;
    poly_gcd_degree(&f, acc, p)
}

fn poly_gcd_degree(f: &[u64; 3], r: [u64; 3], p: u64) -> u32 {
    // gcd of the monic cubic (X³ + f2X² + f1X + f0) and r (degree <= 2)
    let mut a: Vec<u64> = vec![f[0], f[1], f[2], 1];
    let mut b: Vec<u64> = r.to_vec();
    loop {
        while b.last() == Some(&0) {
            b.pop();
        }
        if b.is_empty() {
            return (a.len() - 1) as u32;
        }
        let rem = poly_rem(&a, &b, p);
        a = b;
        b = rem;
    }
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = mod_pow(b[db], p - 2, p);
    while a.len() > db {
        while a.last() == Some(&0) && a.len() > db {
            a.pop();
        }
        if a.len() <= db {
            break;
        }
        let da = a.len() - 1;
        let q = a[da] as u128 * lead_inv as u128 % p as u128;
        for (k, &bk) in b.iter().enumerate() {
            let idx = da - db + k;
            let sub = q * bk as u128 % p as u128;
            a[idx] = ((a[idx] as u128 + p as u128 - sub) % p as u128) as u64;
        }
        a.pop();
    }
    a
}

fn mod_pow(base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b = base as u128 % p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        e >>= 1;
    }
    acc as u64
}

/// `#E(F_p)[2] = 1 + #roots of the cubic mod p`, for odd p of good
/// reduction.
pub fn two_torsion_count(m: &ShortModel, p: u64) -> Result<u32> {
    if p < 3 || p.is_multiple_of(2) {
        return Err(Error::Domain("two_torsion_count needs an odd prime".into()));
    }
    if (&m.disc % BigInt::from(p)).is_zero() {
        return Err(Error::Domain(format!("bad reduction: {p} divides the discriminant")));
    }
    let pm = p as i128;
    let red = |x: i128| x.rem_euclid(pm) as u64;
    Ok(1 + cubic_root_count(red(m.a), red(m.b), red(m.c), p))
}

/// Closed-form Tamagawa rules for the two fully tabulated curve families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TamagawaRule {
    /// E: Y² = X³ + X + 1 (conductor 496), twists E_{-n}.
    C496,
    /// E: Y² = X³ - 1 (conductor 144), twists E_{-n}.
    X3m1,
}

impl TamagawaRule {
    /// Reference curve E_{-1} whose 2-torsion counts give the generic c_p.
    pub fn reference_curve(&self) -> ShortModel {
        match self {
            TamagawaRule::C496 => ShortModel::from_cubic(0, 1, -1).unwrap(),
            TamagawaRule::X3m1 => ShortModel::from_cubic(0, 0, 1).unwrap(),
        }
    }
}

/// Product of the Tamagawa numbers of E_{-n} under the rule's case tables.
pub fn tamagawa_product(rule: TamagawaRule, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let nb = BigInt::from(n);
    if squarefree_part(&nb)? != nb {
        return Err(Error::Domain(format!("n = {n} is not square-free")));
    }
    if n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "the c_2 table of {rule:?} covers odd n only, got n = {n}"
        )));
    }
    let reference = rule.reference_curve();
    let mut product: u64 = match rule {
        TamagawaRule::C496 => {
            if n % 8 == 3 || n % 8 == 7 {
                1
            } else {
                2
            }
        }
        TamagawaRule::X3m1 => {
            if n.is_multiple_of(3) {
                return Err(Error::Domain(format!(
                    "X³-1 rule needs n = 1 or 2 mod 3, got n = {n}"
                )));
            }
            let c2 = if n % 8 == 1 { 3 } else { 1 };
            c2 * 2 // times c_3 = 2
        }
    };
    let f = factorize(&nb)?;
    for (p, _) in &f.factors {
        let p = p.to_u64().expect("factor of u64");
        match rule {
            TamagawaRule::C496 if p == 31 => {
                let m = (n / 31) as i64;
                product *= if kronecker_i64(m, 31) == 1 { 4 } else { 2 };
            }
            _ => {
                product *= two_torsion_count(&reference, p)? as u64;
            }
        }
    }
    Ok(product)
}

/// Root number W(E_{-n}/Q) for the conductor-496 family, positive
/// square-free n.
pub fn root_number_496(n: u64) -> Result<i8> {
    let nb = BigInt::from(n);
    if n == 0 || squarefree_part(&nb)? != nb {
        return Err(Error::Domain(format!("n = {n} must be positive square-free")));
    }
    let v31 = if n.is_multiple_of(31) { 1 } else { 0 };
    if v31 == 1 {
        return Ok(if n.is_multiple_of(2) || n % 8 == 5 { -1 } else { 1 });
    }
    let symbol = kronecker_i64(n as i64, 31);
    Ok(if n.is_multiple_of(2) {
        -symbol
    } else if n % 8 == 5 {
        symbol
    } else {
        -symbol
    })
}

/// Outcome of one Sha-order evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShaReport {
    pub n: u64,
    pub coeff: NF4,
    pub tamagawa_product: u64,
    /// Claimed |Sha|; absent when the coefficient vanishes.
    pub sha_order: Option<BigInt>,
    pub root_number: Option<i8>,
    pub coefficient_zero: bool,
}

fn finalize_sha(n: u64, coeff: &NF4, constant: &BigRational, tam: u64, w: Option<i8>) -> Result<ShaReport> {
    if coeff.is_zero() {
        return Ok(ShaReport {
            n,
            coeff: coeff.clone(),
            tamagawa_product: tam,
            sha_order: None,
            root_number: w,
            coefficient_zero: true,
        });
    }
    let sq = nf_square_rational(coeff)?;
    let sha = constant * sq / BigRational::from_integer(BigInt::from(tam));
    if !sha.is_integer() || !sha.is_positive() {
        return Err(Error::Domain(format!(
            "claimed |Sha| = {sha} at n = {n} is not a positive integer"
        )));
    }
    let sha = sha.to_integer();
    let root = sha.sqrt();
    if &root * &root != sha {
        return Err(Error::Domain(format!(
            "claimed |Sha| = {sha} at n = {n} is not a perfect square"
        )));
    }
    Ok(ShaReport {
        n,
        coeff: coeff.clone(),
        tamagawa_product: tam,
        sha_order: Some(sha),
        root_number: w,
        coefficient_zero: false,
    })
}

/// BSD-conditional |Sha(E_{-n})| for the conductor-496 curve:
/// `2^{v31(n)+1} d_n² / prod c_p`, for n = 1, 3, 7 mod 8.
pub fn sha_order_496(n: u64, d_n: &NF4) -> Result<ShaReport> {
    if !(n % 8 == 1 || n % 8 == 3 || n % 8 == 7) {
        return Err(Error::Domain(format!("n = {n} must be 1, 3, or 7 mod 8")));
    }
    let v31: u32 = if n.is_multiple_of(31) { 1 } else { 0 };
    let tam = tamagawa_product(TamagawaRule::C496, n)?;
    let constant = BigRational::from_integer(BigInt::from(2u64.pow(v31 + 1)));
    finalize_sha(n, d_n, &constant, tam, Some(root_number_496(n)?))
}

/// BSD-conditional |Sha(E_{-n})| for Y² = X³ - 1:
/// `4 e_n² / prod c_p`, with 4 replaced by 36 at n = 1 (torsion order 6).
pub fn sha_order_x3m1(n: u64, e_n: &NF4) -> Result<ShaReport> {
    let tam = tamagawa_product(TamagawaRule::X3m1, n)?;
    let constant = BigRational::from_integer(BigInt::from(if n == 1 { 36 } else { 4 }));
    finalize_sha(n, e_n, &constant, tam, None)
}

/// The conductor-50 ratio statement `L(E_{-n},1) = L(E_{-1},1)/√n · c_n²`;
/// the constant L(E_{-1},1) stays symbolic.
#[derive(Debug, Clone, PartialEq)]
pub struct LRatioStatement {
    pub n: u64,
    pub coeff_square: BigRational,
    pub statement: String,
}

pub fn lratio_50(n: u64, c_n: &NF4) -> Result<LRatioStatement> {
    let nb = BigInt::from(n);
    if n == 0 || squarefree_part(&nb)? != nb {
        return Err(Error::Domain(format!("n = {n} must be positive square-free")));
    }
    if n.is_multiple_of(5) {
        return Err(Error::Domain("the conductor-50 formula needs 5 coprime to n".into()));
    }
    let coeff_square = nf_square_rational(c_n)?;
    let statement = format!("L(E_-{n}, 1) = L(E_-1, 1) / sqrt({n}) * {coeff_square}");
    Ok(LRatioStatement {
        n,
        coeff_square,
        statement,
    })
}
