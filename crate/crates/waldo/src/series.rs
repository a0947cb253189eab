//! q-expansions over Q(√2, √3), theta-combination assembly, support
//! analysis on arithmetic progressions, and Sturm-bound vanishing proofs.
//!
//! Series carry an explicit truncation length and refuse to read past it:
//! fixture expansions end in an O(q^N) marker, so coefficients beyond the
//! marker are unknown, not zero.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::intarith::{factorize, kronecker};
use crate::numfield::NF4;
use crate::thetaforms::{is_positive_definite, repcount, TernaryForm};

/// Optional provenance of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesMeta {
    pub level: u64,
    /// Odd weight numerator k (the form has weight k/2).
    pub weight_num: u32,
}

/// A truncated q-expansion `sum_{n=0}^{length} c_n q^n` with NF4
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<NF4>,
    pub meta: Option<SeriesMeta>,
}

impl Series {
    /// Builds from coefficients 0..=length.
    pub fn new(coeffs: Vec<NF4>, meta: Option<SeriesMeta>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("series needs at least the constant term".into()));
        }
        Ok(Series { coeffs, meta })
    }

    pub fn zero(length: usize, meta: Option<SeriesMeta>) -> Self {
        Series {
            coeffs: vec![NF4::zero(); length + 1],
            meta,
        }
    }

    /// Highest trusted exponent.
    pub fn length(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of q^n; reading past the truncation is an error.
    pub fn coefficient(&self, n: usize) -> Result<&NF4> {
        self.coeffs.get(n).ok_or_else(|| {
            Error::Domain(format!(
                "coefficient {n} requested but series is only known to q^{}",
                self.length()
            ))
        })
    }

    pub fn coefficients(&self) -> &[NF4] {
        &self.coeffs
    }

    pub fn set_coefficient(&mut self, n: usize, v: NF4) -> Result<()> {
        let len = self.length();
        if n > len {
            return Err(Error::Domain(format!(
                "coefficient {n} out of range for series of length {len}"
            )));
        }
        self.coeffs[n] = v;
        Ok(())
    }

    /// Truncation to a shorter length.
    pub fn truncate(&self, length: usize) -> Result<Series> {
        if length > self.length() {
            return Err(Error::Domain(format!(
                "cannot extend series of length {} to {length}",
                self.length()
            )));
        }
        Ok(Series {
            coeffs: self.coeffs[..=length].to_vec(),
            meta: self.meta,
        })
    }

    pub fn scale(&self, c: &NF4) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|x| crate::numfield::nf_mul(c, x)).collect(),
            meta: self.meta,
        }
    }

    /// Sum truncated to the shorter of the two lengths.
    pub fn add(&self, other: &Series) -> Series {
        let len = self.length().min(other.length());
        let coeffs = (0..=len)
            .map(|n| &self.coeffs[n] + &other.coeffs[n])
            .collect();
        Series {
            coeffs,
            meta: self.meta.or(other.meta),
        }
    }

    /// Coefficientwise multiplication by ψ(n) for a quadratic character ψ.
    pub fn twist(&self, psi: &crate::characters::QuadDirichletChar) -> Series {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let v = psi.eval(&BigInt::from(n));
                c.scale(&BigRational::from_integer(BigInt::from(v)))
            })
            .collect();
        Series {
            coeffs,
            meta: self.meta,
        }
    }
}

/// Theta series of a positive definite form, with rational coefficients.
pub fn theta_series(q: &TernaryForm, limit: u64) -> Result<Series> {
    let counts = repcount(q, limit)?;
    Series::new(
        counts.into_iter().map(|c| NF4::from_int(c as i64)).collect(),
        None,
    )
}

/// A linear combination of theta series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaCombo {
    pub terms: Vec<(NF4, TernaryForm)>,
}

impl ThetaCombo {
    pub fn new(terms: Vec<(NF4, TernaryForm)>) -> Result<Self> {
        for (_, q) in &terms {
            if !is_positive_definite(q) {
                return Err(Error::Domain(format!("combo form {q} is not positive definite")));
            }
        }
        Ok(ThetaCombo { terms })
    }
}

/// `sum coeff · θ_Q` truncated at `limit`, exact.
pub fn combine(combo: &ThetaCombo, limit: u64) -> Result<Series> {
    combine_with_meta(combo, limit, None)
}

pub fn combine_with_meta(
    combo: &ThetaCombo,
    limit: u64,
    meta: Option<SeriesMeta>,
) -> Result<Series> {
    let counts = count_all(combo, limit)?;
    let mut out = Series::zero(limit as usize, meta);
    for ((coeff, _), c) in combo.terms.iter().zip(counts) {
        for (n, &v) in c.iter().enumerate() {
            if v != 0 {
                let add = coeff.scale(&BigRational::from_integer(BigInt::from(v)));
                let cur = out.coeffs[n].clone();
                out.coeffs[n] = &cur + &add;
            }
        }
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn count_all(combo: &ThetaCombo, limit: u64) -> Result<Vec<Vec<u64>>> {
    use rayon::prelude::*;
    combo
        .terms
        .par_iter()
        .map(|(_, q)| repcount(q, limit))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn count_all(combo: &ThetaCombo, limit: u64) -> Result<Vec<Vec<u64>>> {
    combo.terms.iter().map(|(_, q)| repcount(q, limit)).collect()
}

/// Residues r mod M witnessed by a nonzero coefficient with n ≡ r, n ≥ 1.
pub fn ap_support(f: &Series, modulus: u64) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    for (n, c) in f.coefficients().iter().enumerate().skip(1) {
        if !c.is_zero() {
            out.insert(n as u64 % modulus);
        }
    }
    out
}

/// `[SL₂(Z) : Γ₀(N)] = N ∏_{p|N} (1 + 1/p)`.
pub fn index_gamma0(n: u64) -> u64 {
    let f = factorize(&BigInt::from(n)).expect("positive n");
    let mut idx = n;
    for (p, _) in &f.factors {
        let p: u64 = p.to_string().parse().unwrap();
        idx = idx / p * (p + 1);
    }
    idx
}

/// `[SL₂(Z) : Γ₁(N)] = N² ∏_{p|N} (1 - 1/p²)` for N ≥ 3, with the small
/// cases ι₁(1) = 1 and ι₁(2) = 3.
///
/// This convention (no quotient by ±I for N ≥ 3) is fixed by matching the
/// Γ₀ anchor below; the Γ₁ branch inherits it.
pub fn index_gamma1(n: u64) -> u64 {
    match n {
        1 => 1,
        2 => 3,
        _ => {
            let f = factorize(&BigInt::from(n)).expect("positive n");
            let mut idx = n * n;
            for (p, _) in &f.factors {
                let p: u64 = p.to_string().parse().unwrap();
                idx = idx / (p * p) * (p * p - 1);
            }
            idx
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CongruenceGroup {
    Gamma0,
    Gamma1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SturmBound {
    /// Integer ceiling of (k/24)·index.
    pub r: u64,
    pub group_used: CongruenceGroup,
    /// Whether the M² | N level refinement applied.
    pub refined: bool,
    /// Level whose index was used.
    pub level: u64,
}

/// Sturm bound for proving that coefficients vanish off `a mod M` for a
/// weight-k/2 form of level N.
pub fn sturm_bound(k: u32, n: u64, m: u64) -> Result<SturmBound> {
    if k.is_multiple_of(2) {
        return Err(Error::Domain("weight numerator k must be odd".into()));
    }
    if !n.is_multiple_of(4) {
        return Err(Error::Domain(format!("level {n} must be divisible by 4")));
    }
    if m == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    let (level, refined) = if n.is_multiple_of(m * m) {
        let q = n / m;
        match q % 4 {
            0 => (n, true),
            2 => (2 * n, true),
            _ => (n * m * m, false),
        }
    } else {
        (n * m * m, false)
    };
    // all Dirichlet characters mod M are quadratic exactly when M | 24;
    // M = 1 has nothing to decompose, so the Γ₀ shortcut starts at M = 2
    let quadratic_only = m > 1 && 24 % m == 0;
    let (group_used, index) = if quadratic_only {
        (CongruenceGroup::Gamma0, index_gamma0(level))
    } else {
        (CongruenceGroup::Gamma1, index_gamma1(level))
    };
    let r_exact = BigRational::new(BigInt::from(k as u64 * index), BigInt::from(24));
    let r = r_exact.ceil().to_integer();
    Ok(SturmBound {
        r: r.to_string().parse().unwrap(),
        group_used,
        refined,
        level,
    })
}

/// Outcome of an arithmetic-progression vanishing proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApOutcome {
    Proven { r: u64 },
    InsufficientCoefficients { have: usize, need: u64 },
    Counterexample { n: u64 },
}

/// Proves `a_n = 0 for n ≢ a (mod M)` by checking coefficients through
/// R + 1 for the applicable Sturm bound.
pub fn prove_ap_vanishing(
    f: &Series,
    a: u64,
    m: u64,
    level: u64,
    k: u32,
) -> Result<ApOutcome> {
    if BigInt::from(a).gcd(&BigInt::from(m)) != BigInt::one() {
        return Err(Error::Domain(format!(
            "progression residue {a} must be coprime to the modulus {m}"
        )));
    }
    let bound = sturm_bound(k, level, m)?;
    let need = bound.r + 1;
    if (f.length() as u64) < need {
        return Ok(ApOutcome::InsufficientCoefficients {
            have: f.length(),
            need,
        });
    }
    for n in 1..=need {
        if n % m != a % m && !f.coefficient(n as usize)?.is_zero() {
            return Ok(ApOutcome::Counterexample { n });
        }
    }
    Ok(ApOutcome::Proven { r: bound.r })
}

/// Whether `n1/n2` is a square in every `Q_p*` for `p | level`, plus the
/// resulting coefficient-ratio statement with symbolic L-values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioCheck {
    pub applicable: bool,
    pub statement: Option<String>,
    pub a_n1: Option<NF4>,
    pub a_n2: Option<NF4>,
}

fn same_square_class(p: u64, n1: u64, n2: u64) -> bool {
    let c1 = crate::waldlocal::square_class(p, n1).expect("positive n");
    let c2 = crate::waldlocal::square_class(p, n2).expect("positive n");
    if p == 2 {
        c1 == c2
    } else {
        // units are in the same class iff their product is a residue
        c1.val_parity == c2.val_parity
            && kronecker(&BigInt::from(c1.unit * c2.unit), &BigInt::from(p)) == 1
    }
}

/// Square-class ratio check: applicable iff n1 and n2 lie in the same
/// square class of Q_p* for every p dividing the level.
pub fn ratio_check(f: &Series, n1: u64, n2: u64, k: u32, level: u64) -> Result<RatioCheck> {
    for n in [n1, n2] {
        let sf = crate::intarith::squarefree_part(&BigInt::from(n))?;
        if sf != BigInt::from(n) {
            return Err(Error::Domain(format!("n = {n} is not square-free")));
        }
    }
    let lf = factorize(&BigInt::from(level))?;
    let applicable = lf.factors.iter().all(|(p, _)| {
        let p: u64 = p.to_string().parse().unwrap();
        same_square_class(p, n1, n2)
    });
    if !applicable {
        return Ok(RatioCheck {
            applicable,
            statement: None,
            a_n1: None,
            a_n2: None,
        });
    }
    let a_n1 = f.coefficient(n1 as usize).ok().cloned();
    let a_n2 = f.coefficient(n2 as usize).ok().cloned();
    let statement = Some(format!(
        "a_{n1}^2 * L(phi, chi_{n2}) * {n2}^({k}/2-1) = a_{n2}^2 * L(phi, chi_{n1}) * {n1}^({k}/2-1)"
    ));
    Ok(RatioCheck {
        applicable,
        statement,
        a_n1,
        a_n2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::QuadDirichletChar;
    use crate::numfield::nf_mul;
    use rand::{Rng, SeedableRng};

    fn q1() -> TernaryForm {
        TernaryForm::new(25, 25, 1, 0, 0, 0)
    }
    fn q2() -> TernaryForm {
        TernaryForm::new(14, 9, 6, 4, 6, 2)
    }
    fn q3() -> TernaryForm {
        TernaryForm::new(25, 13, 2, 2, 0, 0)
    }
    fn q4() -> TernaryForm {
        TernaryForm::new(17, 17, 3, -2, -2, 16)
    }

    fn half() -> NF4 {
        NF4::from_rational(BigRational::new(BigInt::one(), BigInt::from(2)))
    }

    #[test]
    fn combine_conductor50_f1() {
        // f1 = (θ_{Q1} - θ_{Q2})/2 = q + q⁴ - q⁶ - q¹¹ - 2q¹⁴
        let combo = ThetaCombo::new(vec![
            (half(), q1()),
            (half().scale(&BigRational::from_integer(BigInt::from(-1))), q2()),
        ])
        .unwrap();
        let s = combine(&combo, 14).unwrap();
        let mut expected = Series::zero(14, None);
        for (n, v) in [(1i64, 1i64), (4, 1), (6, -1), (11, -1), (14, -2)] {
            expected.set_coefficient(n as usize, NF4::from_int(v)).unwrap();
        }
        assert_eq!(s, expected);
    }

    #[test]
    fn combine_conductor50_f2() {
        // f2 = (θ_{Q3} - θ_{Q4})/2 = q² - q³ + q⁸ - q¹² + 2q¹³
        let combo = ThetaCombo::new(vec![
            (half(), q3()),
            (half().scale(&BigRational::from_integer(BigInt::from(-1))), q4()),
        ])
        .unwrap();
        let s = combine(&combo, 14).unwrap();
        let mut expected = Series::zero(14, None);
        for (n, v) in [(2i64, 1i64), (3, -1), (8, 1), (12, -1), (13, 2)] {
            expected.set_coefficient(n as usize, NF4::from_int(v)).unwrap();
        }
        assert_eq!(s, expected);
    }

    #[test]
    fn combine_empty_is_zero() {
        let combo = ThetaCombo::new(vec![]).unwrap();
        assert_eq!(combine(&combo, 5).unwrap(), Series::zero(5, None));
    }

    #[test]
    fn combine_is_linear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(51);
        for _ in 0..5 {
            let alpha = NF4::new(
                BigRational::from_integer(BigInt::from(rng.gen_range(-3i64..=3))),
                BigRational::from_integer(BigInt::from(rng.gen_range(-3i64..=3))),
                BigRational::from_integer(BigInt::from(rng.gen_range(-3i64..=3))),
                BigRational::from_integer(BigInt::from(rng.gen_range(-3i64..=3))),
            );
            let beta = NF4::new(
                BigRational::from_integer(BigInt::from(rng.gen_range(-3i64..=3))),
                BigRational::from_integer(BigInt::from(rng.gen_range(-3i64..=3))),
                BigRational::from_integer(BigInt::from(rng.gen_range(-3i64..=3))),
                BigRational::from_integer(BigInt::from(rng.gen_range(-3i64..=3))),
            );
            let a = ThetaCombo::new(vec![(alpha.clone(), q1())]).unwrap();
            let b = ThetaCombo::new(vec![(beta.clone(), q2())]).unwrap();
            let ab = ThetaCombo::new(vec![(alpha.clone(), q1()), (beta.clone(), q2())]).unwrap();
            let sa = combine(&a, 40).unwrap();
            let sb = combine(&b, 40).unwrap();
            let sab = combine(&ab, 40).unwrap();
            assert_eq!(sab, sa.add(&sb));
            // scaling commutes with combination
            let two = NF4::from_int(2);
            let scaled_combo = ThetaCombo::new(vec![(nf_mul(&two, &alpha), q1())]).unwrap();
            assert_eq!(combine(&scaled_combo, 40).unwrap(), sa.scale(&two));
        }
    }

    #[test]
    fn ap_support_examples() {
        let mut f = Series::zero(144, None);
        for n in [3usize, 43, 75, 83, 91, 115, 123] {
            f.set_coefficient(n, NF4::from_int(1)).unwrap();
        }
        assert_eq!(ap_support(&f, 8), BTreeSet::from([3]));
        assert!(ap_support(&Series::zero(10, None), 8).is_empty());
    }

    #[test]
    fn index_formulas() {
        assert_eq!(index_gamma0(1984), 3072);
        assert_eq!(index_gamma0(1), 1);
        assert_eq!(index_gamma0(576), 1152);
        assert_eq!(index_gamma1(4), 12);
        assert_eq!(index_gamma1(1), 1);
        assert_eq!(index_gamma1(2), 3);
    }

    /// Coset-style oracle: #{(c,d) in (Z/N)² : gcd(c,d,N)=1} equals the
    /// Γ₁ index for N ≥ 3, and dividing by φ(N) gives |P¹(Z/N)| = Γ₀ index.
    fn pair_count(n: u64) -> u64 {
        let mut count = 0;
        for c in 0..n {
            for d in 0..n {
                let g = BigInt::from(c)
                    .gcd(&BigInt::from(d))
                    .gcd(&BigInt::from(n));
                if g == BigInt::one() {
                    count += 1;
                }
            }
        }
        count
    }

    fn phi(n: u64) -> u64 {
        (1..=n).filter(|&a| BigInt::from(a).gcd(&BigInt::from(n)).is_one()).count() as u64
    }

    #[test]
    fn index_matches_enumeration_oracle() {
        for n in 3..=12 {
            assert_eq!(index_gamma1(n), pair_count(n), "gamma1({n})");
            assert_eq!(index_gamma0(n), pair_count(n) / phi(n), "gamma0({n})");
        }
    }

    #[test]
    fn index_multiplicativity() {
        for (a, b) in [(3u64, 4), (5, 8), (7, 9), (4, 25), (3, 31)] {
            assert_eq!(index_gamma0(a * b), index_gamma0(a) * index_gamma0(b));
            assert_eq!(index_gamma1(a * b), index_gamma1(a) * index_gamma1(b));
        }
    }

    #[test]
    fn sturm_anchor_1984() {
        let b = sturm_bound(3, 1984, 8).unwrap();
        assert_eq!(b.r, 384);
        assert_eq!(b.group_used, CongruenceGroup::Gamma0);
        assert!(b.refined);
        assert_eq!(b.level, 1984);
    }

    #[test]
    fn sturm_576_and_small() {
        let b = sturm_bound(3, 576, 24).unwrap();
        assert_eq!(b.r, 144);
        assert_eq!(b.group_used, CongruenceGroup::Gamma0);
        assert!(b.refined);

        let b = sturm_bound(3, 4, 1).unwrap();
        assert_eq!(b.r, 2);
        assert_eq!(b.group_used, CongruenceGroup::Gamma1);

        assert!(sturm_bound(3, 6, 1).is_err());
        assert!(sturm_bound(4, 4, 1).is_err());
    }

    #[test]
    fn prove_ap_vanishing_outcomes() {
        // counterexample: q³ + q⁵ against 3 mod 8
        let mut f = Series::zero(200, None);
        f.set_coefficient(3, NF4::from_int(1)).unwrap();
        f.set_coefficient(5, NF4::from_int(1)).unwrap();
        assert_eq!(
            prove_ap_vanishing(&f, 3, 8, 64, 3).unwrap(),
            ApOutcome::Counterexample { n: 5 }
        );

        // insufficient coefficients: 496 fixture length vs R = 384
        let f = Series::zero(144, None);
        assert_eq!(
            prove_ap_vanishing(&f, 3, 8, 1984, 3).unwrap(),
            ApOutcome::InsufficientCoefficients { have: 144, need: 385 }
        );

        // zero series of sufficient length proves trivially
        let f = Series::zero(3, None);
        assert!(matches!(
            prove_ap_vanishing(&f, 1, 1, 4, 3).unwrap(),
            ApOutcome::Proven { r: 2 }
        ));

        assert!(prove_ap_vanishing(&f, 2, 8, 4, 3).is_err());
    }

    #[test]
    fn ratio_check_examples() {
        let f = Series::zero(100, None);
        let r = ratio_check(&f, 74, 2, 3, 72).unwrap();
        assert!(!r.applicable);

        let r = ratio_check(&f, 5, 5, 3, 72).unwrap();
        assert!(r.applicable);
        assert!(r.statement.is_some());

        assert!(ratio_check(&f, 12, 3, 3, 72).is_err());
    }

    #[test]
    fn series_refuses_reads_past_truncation() {
        let f = Series::zero(10, None);
        assert!(f.coefficient(10).is_ok());
        assert!(f.coefficient(11).is_err());
        assert!(f.truncate(11).is_err());
        assert_eq!(f.truncate(5).unwrap().length(), 5);
    }

    fn quadratic_characters(m: u64) -> Vec<QuadDirichletChar> {
        let mut out = Vec::new();
        for d in [1i64, -1, 2, -2, 3, -3, 6, -6] {
            if let Ok(chi) = QuadDirichletChar::new(BigInt::from(m), BigInt::from(d)) {
                out.push(chi);
            }
        }
        out
    }

    #[test]
    fn quadratic_twist_indicator_identity() {
        // Σ_ψ ψ(a)⁻¹ ψ(n) / φ(M) = [n ≡ a mod M] for M | 24
        for m in [1u64, 2, 3, 4, 6, 8, 12, 24] {
            let chars = quadratic_characters(m);
            assert_eq!(chars.len() as u64, phi(m), "character count mod {m}");
            for a in (1..m.max(2)).filter(|&a| BigInt::from(a).gcd(&BigInt::from(m)).is_one()) {
                for n in (1..10 * m).filter(|&n| BigInt::from(n).gcd(&BigInt::from(m)).is_one()) {
                    let total: i64 = chars
                        .iter()
                        .map(|psi| {
                            (psi.eval_i64(a as i64) as i64) * (psi.eval_i64(n as i64) as i64)
                        })
                        .sum();
                    let expected = if n % m == a % m { phi(m) as i64 } else { 0 };
                    assert_eq!(total, expected, "M={m} a={a} n={n}");
                }
            }
        }
    }

    #[test]
    fn twist_decomposes_progression_pieces() {
        // for f supported on units mod 8, the averaged twists cut out the
        // class of a mod 8
        let mut f = Series::zero(40, None);
        for n in [1usize, 3, 9, 11, 17, 19, 25, 33] {
            f.set_coefficient(n, NF4::from_int(1)).unwrap();
        }
        let chars = quadratic_characters(8);
        let a = 3u64;
        let mut piece = Series::zero(40, None);
        for psi in &chars {
            let sign = psi.eval_i64(a as i64) as i64;
            let t = f.twist(psi).scale(&NF4::from_int(sign));
            piece = piece.add(&t);
        }
        let quarter = NF4::from_rational(BigRational::new(BigInt::one(), BigInt::from(4)));
        piece = piece.scale(&quarter);
        for n in 1..=40usize {
            let expected = if n % 8 == 3 && [3, 11, 19].contains(&n) {
                NF4::from_int(1)
            } else {
                NF4::zero()
            };
            assert_eq!(piece.coefficient(n).unwrap(), &expected, "n={n}");
        }
    }
}
