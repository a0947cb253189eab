//! Quadratic Dirichlet characters and local components of the corresponding
//! adelic Hecke characters.
//!
//! A character is stored as a Kronecker-symbol twist of the trivial character:
//! `chi(n) = (d/n)` for `gcd(n, N) = 1` and `chi(n) = 0` otherwise. Local
//! evaluation at a prime dividing the modulus goes through a CRT-constructed
//! auxiliary integer which is then factored.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::intarith::{crt, factorize, kronecker, squarefree_part, valuation, Factorization};

/// Quadratic Dirichlet character modulo `modulus`, given by a Kronecker twist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadDirichletChar {
    pub modulus: BigInt,
    /// Square-free signed twist `d`; `chi(n) = (d/n)` on units.
    pub twist: BigInt,
    pub conductor: BigInt,
}

impl QuadDirichletChar {
    /// Character mod `modulus` with values `(twist/n)` on units.
    ///
    /// The twist is reduced to its square-free signed part; the conductor of
    /// the underlying primitive character must divide the modulus.
    pub fn new(modulus: BigInt, twist: BigInt) -> Result<Self> {
        if !modulus.is_positive() {
            return Err(Error::Domain("character modulus must be positive".into()));
        }
        if twist.is_zero() {
            return Err(Error::Domain("character twist must be nonzero".into()));
        }
        let d = reduce_twist(&twist)?;
        let conductor = kronecker_conductor(&d);
        if !(&modulus % &conductor).is_zero() {
            return Err(Error::Domain(format!(
                "conductor {conductor} of twist {d} does not divide modulus {modulus}"
            )));
        }
        Ok(QuadDirichletChar {
            modulus,
            twist: d,
            conductor,
        })
    }

    /// The trivial character mod `modulus`.
    pub fn trivial(modulus: BigInt) -> Result<Self> {
        QuadDirichletChar::new(modulus, BigInt::one())
    }

    /// `chi(n)`.
    pub fn eval(&self, n: &BigInt) -> i8 {
        if n.gcd(&self.modulus) != BigInt::one() {
            0
        } else {
            kronecker(&self.twist, n)
        }
    }

    pub fn eval_i64(&self, n: i64) -> i8 {
        self.eval(&BigInt::from(n))
    }

    /// Pointwise product, on the lcm of the moduli (kept divisible by 4 so
    /// chi_0-style products stay well formed).
    pub fn mul(&self, other: &QuadDirichletChar) -> Result<QuadDirichletChar> {
        let modulus = self.modulus.lcm(&other.modulus).lcm(&BigInt::from(4));
        QuadDirichletChar::new(modulus, &self.twist * &other.twist)
    }

    pub fn is_trivial_twist(&self) -> bool {
        self.twist.is_one()
    }
}

fn reduce_twist(d: &BigInt) -> Result<BigInt> {
    let sf = squarefree_part(&d.abs())?;
    Ok(if d.is_negative() { -sf } else { sf })
}

/// Conductor of the primitive character `(d/.)` for square-free `d`:
/// `|d|` when `d = 1 (mod 4)`, otherwise `|4d|`.
fn kronecker_conductor(d: &BigInt) -> BigInt {
    if d.mod_floor(&BigInt::from(4)).is_one() {
        d.abs()
    } else {
        BigInt::from(4) * d.abs()
    }
}

/// `chi_t = (t/.)` for square-free nonzero `t`.
pub fn chi_t(t: &BigInt) -> Result<QuadDirichletChar> {
    if t.is_zero() {
        return Err(Error::Domain("chi_t needs nonzero t".into()));
    }
    if squarefree_part(&t.abs())? != t.abs() {
        return Err(Error::Domain(format!("chi_t needs square-free t, got {t}")));
    }
    let conductor = kronecker_conductor(t);
    QuadDirichletChar::new(conductor.clone(), t.clone())
}

/// `chi_0(n) = chi(n) * (-1/n)^{(k-1)/2}` for odd `k`.
pub fn chi_zero(chi: &QuadDirichletChar, k: u32) -> Result<QuadDirichletChar> {
    if k.is_multiple_of(2) {
        return Err(Error::Domain("chi_zero needs odd weight numerator k".into()));
    }
    let modulus = chi.modulus.lcm(&BigInt::from(4));
    let twist = if ((k - 1) / 2) % 2 == 1 {
        -&chi.twist
    } else {
        chi.twist.clone()
    };
    QuadDirichletChar::new(modulus, twist)
}

/// Outcome of a local evaluation, with the CRT intermediate when one was used.
#[derive(Debug, Clone)]
pub struct LocalEval {
    pub value: i8,
    /// The auxiliary positive integer `b` (only for primes dividing the modulus).
    pub b: Option<BigInt>,
    pub b_factorization: Option<Factorization>,
}

/// Local component `chi_p(a)` of the Hecke character attached to `chi`.
///
/// For `p` not dividing the modulus this is `chi(p)^{v_p(a)}`. For `p`
/// dividing the modulus an auxiliary `b` is built with `b = a (mod
/// |a| N Z_p)` and `b = 1 (mod N Z_q)` at the other modulus primes; then
/// `chi_p(a)` is the product of `chi(l)^{-beta}` over the prime factorization
/// of `b / p^{v_p(a)}`.
pub fn local_eval_detailed(
    chi: &QuadDirichletChar,
    p: &BigInt,
    a: &BigInt,
) -> Result<LocalEval> {
    if a.is_zero() {
        return Err(Error::Domain("local_eval needs nonzero a".into()));
    }
    let n = &chi.modulus;
    if !(n % p).is_zero() {
        let (e, _) = valuation(a, p)?;
        let base = chi.eval(p);
        let value = if e % 2 == 0 { base * base } else { base };
        return Ok(LocalEval {
            value,
            b: None,
            b_factorization: None,
        });
    }
    // p | N: CRT construction. Negative a is handled through |a| (the ideal
    // a*N*Z_p only depends on |a|).
    let nf = factorize(n)?;
    let mut congruences: Vec<(BigInt, BigInt)> = Vec::new();
    let (ep, _) = valuation(&(a.abs() * n), p)?;
    congruences.push((a.mod_floor(&p.pow(ep)), p.pow(ep)));
    for (q, eq) in &nf.factors {
        if q != p {
            congruences.push((BigInt::one(), q.pow(*eq)));
        }
    }
    let b = crt(&congruences)?;
    let (vp, rest) = valuation(&b, p)?;
    debug_assert_eq!(vp, valuation(a, p)?.0);
    let bf = factorize(&rest)?;
    let mut value: i8 = 1;
    for (l, beta) in &bf.factors {
        if beta % 2 == 1 {
            let v = chi.eval(l);
            debug_assert!(v != 0, "b must be coprime to the other modulus primes");
            value *= v;
        }
    }
    let mut full = bf;
    if vp > 0 {
        full.factors.push((p.clone(), vp));
        full.factors.sort_by(|a, b| a.0.cmp(&b.0));
        full.value = b.clone();
    }
    Ok(LocalEval {
        value,
        b: Some(b),
        b_factorization: Some(full),
    })
}

/// `chi_p(a)` in `{-1, 0, 1}`.
pub fn local_eval(chi: &QuadDirichletChar, p: &BigInt, a: &BigInt) -> Result<i8> {
    Ok(local_eval_detailed(chi, p, a)?.value)
}

/// The Archimedean component: `-1` iff `a < 0` and `chi(-1) = -1`.
pub fn infinity_eval(chi: &QuadDirichletChar, a: &BigInt) -> i8 {
    if a.is_negative() && chi.eval(&BigInt::from(-1)) == -1 {
        -1
    } else {
        1
    }
}

/// Per-prime facts about the local component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalUnitFacts {
    pub ramified: bool,
    pub value_at_minus_one: i8,
    pub value_at_p_inverse: i8,
}

pub fn local_unit_facts(chi: &QuadDirichletChar, p: &BigInt) -> Result<LocalUnitFacts> {
    Ok(LocalUnitFacts {
        ramified: (&chi.conductor % p).is_zero(),
        value_at_minus_one: local_eval(chi, p, &BigInt::from(-1))?,
        // chi_p(p)^{-1} = chi_p(p) for quadratic chi
        value_at_p_inverse: local_eval(chi, p, p)?,
    })
}

/// Whether `chi_{0,2}` (local component at 2) is trivial on `1 + 4 Z_2`,
/// checked on representatives of the two classes of that subgroup mod squares.
pub fn trivial_on_one_plus_4z2(chi: &QuadDirichletChar) -> Result<bool> {
    let two = BigInt::from(2);
    for rep in [5i64, 9, 13, -3] {
        if local_eval(chi, &two, &BigInt::from(rep))? != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intarith::is_prime;
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    /// chi for the 496 example: (-1/.) times the trivial character mod 496.
    fn chi496() -> QuadDirichletChar {
        QuadDirichletChar::new(big(496), big(-1)).unwrap()
    }

    #[test]
    fn chi_t_conductors() {
        assert_eq!(chi_t(&big(5)).unwrap().conductor, big(5));
        assert_eq!(chi_t(&big(-1)).unwrap().conductor, big(4));
        assert_eq!(chi_t(&big(6)).unwrap().conductor, big(24));
        assert!(chi_t(&big(12)).is_err());
    }

    /// Brute-force conductor: smallest C | N such that chi is trivial on
    /// units congruent to 1 mod C.
    fn conductor_brute(chi: &QuadDirichletChar) -> BigInt {
        let n = chi.modulus.to_u64().unwrap();
        'outer: for c in 1..=n {
            if !n.is_multiple_of(c) {
                continue;
            }
            let mut x = 1 + c;
            while x < n + c {
                let xb = big(x as i64);
                if xb.gcd(&chi.modulus).is_one() && chi.eval(&xb) != 1 {
                    continue 'outer;
                }
                x += c;
            }
            return big(c as i64);
        }
        unreachable!()
    }

    #[test]
    fn conductor_matches_brute_force() {
        for t in [-10i64, -7, -5, -3, -2, -1, 2, 3, 5, 6, 7, 10, 15, 21, 33] {
            if squarefree_part(&big(t).abs()).unwrap() != big(t).abs() {
                continue;
            }
            let chi = chi_t(&big(t)).unwrap();
            assert_eq!(chi.conductor, conductor_brute(&chi), "t={t}");
        }
        // non-primitive characters too
        let chi = chi496();
        assert_eq!(chi.conductor, big(4));
        assert_eq!(conductor_brute(&chi), big(4));
    }

    #[test]
    fn chi_zero_examples() {
        let triv4 = QuadDirichletChar::trivial(big(4)).unwrap();
        let c = chi_zero(&triv4, 3).unwrap();
        assert_eq!(c.twist, big(-1));
        assert_eq!(c.conductor, big(4));

        let triv496 = QuadDirichletChar::trivial(big(496)).unwrap();
        let c = chi_zero(&triv496, 3).unwrap();
        assert_eq!(c.twist, big(-1));
        assert_eq!(c.modulus, big(496));
        for n in [3i64, 5, 7, 9, 11, 13] {
            assert_eq!(c.eval_i64(n), kronecker(&big(-1), &big(n)));
        }

        let neg = QuadDirichletChar::new(big(4), big(-1)).unwrap();
        let c = chi_zero(&neg, 3).unwrap();
        assert!(c.is_trivial_twist());
    }

    #[test]
    fn local_eval_main_anchor() {
        // chi_{31}(31) = -1 for chi = (-1/.) * chi_triv mod 496, via b = 1953
        let chi = chi496();
        let d = local_eval_detailed(&chi, &big(31), &big(31)).unwrap();
        assert_eq!(d.value, -1);
        assert_eq!(d.b, Some(big(1953)));
        let f = d.b_factorization.unwrap();
        assert_eq!(f.factors, vec![(big(3), 2), (big(7), 1), (big(31), 1)]);
    }

    #[test]
    fn local_eval_unramified_branch() {
        let triv4 = QuadDirichletChar::trivial(big(4)).unwrap();
        assert_eq!(local_eval(&triv4, &big(5), &big(7)).unwrap(), 1);
        let neg = QuadDirichletChar::new(big(4), big(-1)).unwrap();
        assert_eq!(local_eval(&neg, &big(3), &big(3)).unwrap(), -1);
    }

    #[test]
    fn local_unit_facts_examples() {
        let chi = chi496();
        let f = local_unit_facts(&chi, &big(31)).unwrap();
        assert!(!f.ramified);
        assert_eq!(f.value_at_p_inverse, -1);

        let triv4 = QuadDirichletChar::trivial(big(4)).unwrap();
        let f = local_unit_facts(&triv4, &big(7)).unwrap();
        assert!(!f.ramified);
        assert_eq!(f.value_at_minus_one, 1);

        let neg = QuadDirichletChar::new(big(4), big(-1)).unwrap();
        let f = local_unit_facts(&neg, &big(2)).unwrap();
        assert!(f.ramified);
        assert_eq!(f.value_at_minus_one, -1);
    }

    /// Primes dividing m.
    fn prime_divisors(m: &BigInt) -> Vec<BigInt> {
        factorize(&m.abs()).unwrap().primes().cloned().collect()
    }

    #[test]
    fn product_formula_over_all_places() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut tested = 0;
        while tested < 200 {
            let t: i64 = rng.gen_range(-50..=50);
            if t == 0 || squarefree_part(&big(t).abs()).unwrap() != big(t).abs() {
                continue;
            }
            let chi = chi_t(&big(t)).unwrap();
            let alpha: i64 = rng.gen_range(-10_000..=10_000);
            if alpha == 0 {
                continue;
            }
            let a = big(alpha);
            let mut prod = infinity_eval(&chi, &a);
            for p in prime_divisors(&(&a * &chi.modulus)) {
                prod *= local_eval(&chi, &p, &a).unwrap();
            }
            assert_eq!(prod, 1, "product formula failed for t={t} alpha={alpha}");
            tested += 1;
        }
    }

    #[test]
    fn stability_under_congruence() {
        // chi_p(alpha) = chi_p(beta) whenever beta = alpha mod alpha*N*Z_p
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let chis = [chi496(), chi_t(&big(-3)).unwrap(), chi_t(&big(10)).unwrap()];
        for chi in &chis {
            for p in prime_divisors(&chi.modulus) {
                for _ in 0..20 {
                    let alpha: i64 = rng.gen_range(1..500);
                    let a = big(alpha);
                    let (e, _) = valuation(&(&a * &chi.modulus), &p).unwrap();
                    let step = p.pow(e);
                    let k: i64 = rng.gen_range(1..50);
                    let b = &a + &step * big(k);
                    assert_eq!(
                        local_eval(chi, &p, &a).unwrap(),
                        local_eval(chi, &p, &b).unwrap(),
                        "p={p} alpha={alpha} beta={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn unramified_triviality_on_units() {
        let chi = chi496();
        for p in [3i64, 5, 7, 11, 13] {
            for u in [1i64, 2, 3, 4, 6, 7, 9, 100] {
                if u % p == 0 {
                    continue;
                }
                assert_eq!(local_eval(&chi, &big(p), &big(u)).unwrap(), 1);
            }
        }
    }

    #[test]
    fn trivial_on_one_plus_4z2_small_even_part() {
        // quadratic chi mod N with v_2(N) <= 2: chi_{0,2} trivial on 1+4Z_2
        for t in [1i64, -3, 5, -7, 13] {
            let chi = chi_t(&big(t)).unwrap();
            let (v2, _) = valuation(&chi.modulus, &big(2)).unwrap_or((0, big(1)));
            if v2 <= 2 {
                let chi0 = chi_zero(&chi, 3).unwrap();
                assert!(
                    trivial_on_one_plus_4z2(&chi0).unwrap(),
                    "t={t} chi0 twist {}",
                    chi0.twist
                );
            }
        }
    }

    #[test]
    fn archimedean_component_forced_by_product_formula() {
        // chi_2(-1) * chi_inf(-1) = 1 for chi = (-1/.) mod 4
        let neg = QuadDirichletChar::new(big(4), big(-1)).unwrap();
        let two = local_eval(&neg, &big(2), &big(-1)).unwrap();
        let inf = infinity_eval(&neg, &big(-1));
        assert_eq!(two * inf, 1);
        assert_eq!(inf, -1);
        assert_eq!(two, -1);
    }

    #[test]
    fn rho_fallback_not_needed_for_typical_b() {
        // the CRT value b can exceed machine range but must still factor
        let chi = QuadDirichletChar::new(big(1984), big(-1)).unwrap();
        let v = local_eval(&chi, &big(31), &big(-1984)).unwrap();
        assert!(v == 1 || v == -1);
        for p in prime_divisors(&chi.modulus) {
            assert!(is_prime(&p));
        }
    }
}
