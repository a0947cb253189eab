//! Waldspurger's local machinery: representation-type decision rules,
//! hypothesis (H2), the local functions c^(i) and the gamma family, the
//! levels ñ_p, the sets U_p(ñ_p, φ), and the global level Ñ_φ.
//!
//! Values of the local functions live in Z[√p, 1/√p]-type rings; they are
//! represented exactly as a rational multiple of a single square root
//! (`RadicalValue`), optionally with a symbolic δ exponent (`DeltaPoly`).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::characters::{local_unit_facts, trivial_on_one_plus_4z2, QuadDirichletChar};
use crate::error::{Error, Result};
use crate::intarith::{hilbert_int, kronecker_i64, Place};

/// An exact value `coeff * sqrt(radicand)` with square-free radicand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadicalValue {
    pub coeff: BigRational,
    pub radicand: u64,
}

fn split_square(n: u64) -> (u64, u64) {
    // n = square * squarefree
    let mut sq = 1u64;
    let mut sf = 1u64;
    let mut m = n;
    let mut d = 2u64;
    while d * d <= m {
        let mut e = 0;
        while m.is_multiple_of(d) {
            m /= d;
            e += 1;
        }
        sq *= d.pow(e / 2);
        if e % 2 == 1 {
            sf *= d;
        }
        d += 1;
    }
    sf *= m;
    (sq, sf)
}

impl RadicalValue {
    /// Normalizes: the square part of the radicand moves into the
    /// coefficient, and zero is stored as `(0, 1)`.
    pub fn new(coeff: BigRational, radicand: u64) -> Self {
        assert!(radicand > 0, "radicand must be positive");
        if coeff.is_zero() {
            return RadicalValue {
                coeff: BigRational::zero(),
                radicand: 1,
            };
        }
        let (sq, sf) = split_square(radicand);
        RadicalValue {
            coeff: coeff * BigRational::from_integer(BigInt::from(sq)),
            radicand: sf,
        }
    }

    pub fn zero() -> Self {
        RadicalValue::new(BigRational::zero(), 1)
    }

    pub fn one() -> Self {
        RadicalValue::new(BigRational::one(), 1)
    }

    pub fn from_int(n: i64) -> Self {
        RadicalValue::new(BigRational::from_integer(BigInt::from(n)), 1)
    }

    pub fn rational(r: BigRational) -> Self {
        RadicalValue::new(r, 1)
    }

    pub fn sqrt_of(r: u64) -> Self {
        RadicalValue::new(BigRational::one(), r)
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn mul(&self, other: &RadicalValue) -> RadicalValue {
        RadicalValue::new(&self.coeff * &other.coeff, self.radicand * other.radicand)
    }

    pub fn scale(&self, s: i64) -> RadicalValue {
        RadicalValue::new(
            &self.coeff * BigRational::from_integer(BigInt::from(s)),
            self.radicand,
        )
    }

    pub fn neg(&self) -> RadicalValue {
        self.scale(-1)
    }

    /// `1 / (c sqrt(r)) = (1 / (c r)) sqrt(r)`.
    pub fn inv(&self) -> Result<RadicalValue> {
        if self.is_zero() {
            return Err(Error::Domain("inverse of zero RadicalValue".into()));
        }
        let r = BigRational::from_integer(BigInt::from(self.radicand));
        Ok(RadicalValue::new(
            (&self.coeff * r).recip(),
            self.radicand,
        ))
    }

    /// Sum, defined when the radicands agree or one side is zero.
    pub fn checked_add(&self, other: &RadicalValue) -> Result<RadicalValue> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.radicand != other.radicand {
            return Err(Error::Domain(format!(
                "cannot add sqrt({}) and sqrt({}) terms in a RadicalValue",
                self.radicand, other.radicand
            )));
        }
        Ok(RadicalValue::new(
            &self.coeff + &other.coeff,
            self.radicand,
        ))
    }

    /// The rational value, when the radicand is 1.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.radicand == 1 {
            Some(&self.coeff)
        } else {
            None
        }
    }
}

impl fmt::Display for RadicalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand == 1 {
            write!(f, "{}", self.coeff)
        } else if self.coeff.is_one() {
            write!(f, "sqrt({})", self.radicand)
        } else {
            write!(f, "{}*sqrt({})", self.coeff, self.radicand)
        }
    }
}

/// A Laurent polynomial in a symbolic δ with exponents in {-1, 0, 1} and
/// `RadicalValue` coefficients. Concrete local values are constants
/// (supported on exponent 0).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeltaPoly {
    terms: BTreeMap<i8, RadicalValue>,
}

impl DeltaPoly {
    pub fn zero() -> Self {
        DeltaPoly::default()
    }

    pub fn constant(v: RadicalValue) -> Self {
        DeltaPoly::term(0, v)
    }

    pub fn term(exp: i8, v: RadicalValue) -> Self {
        assert!((-1..=1).contains(&exp), "delta exponent out of range");
        let mut terms = BTreeMap::new();
        if !v.is_zero() {
            terms.insert(exp, v);
        }
        DeltaPoly { terms }
    }

    pub fn with_term(mut self, exp: i8, v: RadicalValue) -> Self {
        assert!((-1..=1).contains(&exp), "delta exponent out of range");
        if !v.is_zero() {
            self.terms.insert(exp, v);
        }
        self
    }

    pub fn get(&self, exp: i8) -> RadicalValue {
        self.terms.get(&exp).cloned().unwrap_or_else(RadicalValue::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&e| e == 0)
    }

    /// The constant value when no symbolic δ is present.
    pub fn constant_value(&self) -> Option<RadicalValue> {
        if self.is_constant() {
            Some(self.get(0))
        } else {
            None
        }
    }

    /// Substitutes a concrete δ.
    pub fn specialize(&self, delta: &RadicalValue) -> Result<RadicalValue> {
        let mut acc = RadicalValue::zero();
        for (&e, v) in &self.terms {
            let factor = match e {
                0 => RadicalValue::one(),
                1 => delta.clone(),
                -1 => delta.inv()?,
                _ => unreachable!(),
            };
            acc = acc.checked_add(&v.mul(&factor))?;
        }
        Ok(acc)
    }
}

impl fmt::Display for DeltaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, v) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                1 => write!(f, "({v})*delta")?,
                0 => write!(f, "{v}")?,
                _ => write!(f, "({v})*delta^-1")?,
            }
        }
        Ok(())
    }
}

/// A square class of Q_p*/Q_p*², encoded as (valuation mod 2, unit class).
///
/// For odd p the unit representative is 1 or the least positive non-residue;
/// for p = 2 it is the unit part mod 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SquareClass {
    pub val_parity: u8,
    pub unit: u64,
}

/// Least positive quadratic non-residue mod odd p.
pub fn least_nonresidue(p: u64) -> u64 {
    (2..p).find(|&a| kronecker_i64(a as i64, p as i64) == -1).unwrap_or(1)
}

/// The square class of a positive integer in Q_p*/Q_p*².
pub fn square_class(p: u64, n: u64) -> Result<SquareClass> {
    if n == 0 {
        return Err(Error::Domain("square class of 0 is undefined".into()));
    }
    let mut v = 0u32;
    let mut unit = n;
    while unit.is_multiple_of(p) {
        unit /= p;
        v += 1;
    }
    let unit = if p == 2 {
        unit % 8
    } else if kronecker_i64((unit % p) as i64, p as i64) == 1 {
        1
    } else {
        least_nonresidue(p)
    };
    Ok(SquareClass {
        val_parity: (v % 2) as u8,
        unit,
    })
}

/// All square classes of Q_p*/Q_p*² with positive representatives.
pub fn all_square_classes(p: u64) -> Vec<SquareClass> {
    let units: Vec<u64> = if p == 2 {
        vec![1, 3, 5, 7]
    } else {
        vec![1, least_nonresidue(p)]
    };
    let mut out = Vec::new();
    for parity in [0u8, 1] {
        for &u in &units {
            out.push(SquareClass {
                val_parity: parity,
                unit: u,
            });
        }
    }
    out
}

impl SquareClass {
    /// A small positive square-free representative.
    pub fn representative(&self, p: u64) -> u64 {
        let mut n = if self.val_parity == 1 { p } else { 1 };
        if p == 2 {
            // pick the least odd m = unit mod 8
            n *= self.unit;
        } else if self.unit != 1 {
            // multiply by a unit non-residue coprime to the p-part
            n *= self.unit;
        }
        n
    }
}

/// Tri-state membership in Ω_p(φ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Present,
    Absent,
    Unknown,
}

/// Knowledge about the set Ω_p(φ) of witnessed square classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaSet {
    pub entries: Vec<(SquareClass, Membership)>,
}

impl OmegaSet {
    /// All classes unknown.
    pub fn unknown(p: u64) -> Self {
        OmegaSet {
            entries: all_square_classes(p)
                .into_iter()
                .map(|c| (c, Membership::Unknown))
                .collect(),
        }
    }

    pub fn set(&mut self, class: SquareClass, m: Membership) {
        for e in &mut self.entries {
            if e.0 == class {
                e.1 = m;
                return;
            }
        }
        self.entries.push((class, m));
    }

    pub fn membership(&self, class: &SquareClass) -> Membership {
        self.entries
            .iter()
            .find(|(c, _)| c == class)
            .map(|(_, m)| *m)
            .unwrap_or(Membership::Unknown)
    }

    pub fn present(&self) -> Vec<SquareClass> {
        self.entries
            .iter()
            .filter(|(_, m)| *m == Membership::Present)
            .map(|(c, _)| *c)
            .collect()
    }

    pub fn unknown_classes(&self) -> Vec<SquareClass> {
        self.entries
            .iter()
            .filter(|(_, m)| *m == Membership::Unknown)
            .map(|(c, _)| *c)
            .collect()
    }
}

/// Local facts about χ_0 at p, as needed by the value tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chi0Facts {
    pub ramified: bool,
    pub value_at_minus_one: i8,
    pub value_at_p_inverse: i8,
    /// Only meaningful for p = 2.
    pub trivial_on_one_plus_4z2: bool,
}

impl Chi0Facts {
    pub fn from_character(chi0: &QuadDirichletChar, p: u64) -> Result<Self> {
        let pb = BigInt::from(p);
        let f = local_unit_facts(chi0, &pb)?;
        let trivial = if p == 2 {
            trivial_on_one_plus_4z2(chi0)?
        } else {
            true
        };
        Ok(Chi0Facts {
            ramified: f.ramified,
            value_at_minus_one: f.value_at_minus_one,
            value_at_p_inverse: f.value_at_p_inverse,
            trivial_on_one_plus_4z2: trivial,
        })
    }
}

/// Everything the local machinery needs to know about one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalData {
    pub p: u64,
    /// m_p = ν_p(M_φ).
    pub m_p: u32,
    pub lambda_p_zero: bool,
    /// Atkin-Lehner eigenvalue; present iff m_p = 1 and λ_p ≠ 0.
    pub omega_p: Option<i8>,
    /// Odd weight numerator k (forms of weight k/2, φ of weight k - 1).
    pub k: u32,
    pub chi0: Chi0Facts,
    /// Required when m_p ≥ 1 and λ_p = 0.
    pub omega_set: Option<OmegaSet>,
}

impl LocalData {
    fn check(&self) -> Result<()> {
        let needs_omega_p = self.m_p == 1 && !self.lambda_p_zero;
        if needs_omega_p != self.omega_p.is_some() {
            return Err(Error::Domain(
                "omega_p must be present exactly when m_p = 1 and lambda_p != 0".into(),
            ));
        }
        if self.m_p >= 2 && !self.lambda_p_zero {
            return Err(Error::Domain(
                "m_p >= 2 forces lambda_p = 0 for a newform".into(),
            ));
        }
        Ok(())
    }
}

/// The Atkin-Lehner eigenvalue forced by `λ_p = -ω_p p^{(k-3)/2}`.
pub fn omega_from_lambda(lambda_p: &BigInt, p: u64, k: u32) -> Result<i8> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::Domain(format!("odd weight numerator k >= 3 required, got {k}")));
    }
    let pw = BigInt::from(p).pow((k - 3) / 2);
    if *lambda_p == -&pw {
        Ok(1)
    } else if *lambda_p == pw {
        Ok(-1)
    } else {
        Err(Error::Domain(format!(
            "lambda_p = {lambda_p} is not ±{pw}, no Atkin-Lehner reading at p = {p}"
        )))
    }
}

/// Automorphic representation type at p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepType {
    Principal,
    Special,
    Supercuspidal,
    Undetermined,
}

impl fmt::Display for RepType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RepType::Principal => "principal",
            RepType::Special => "special",
            RepType::Supercuspidal => "supercuspidal",
            RepType::Undetermined => "undetermined",
        };
        write!(f, "{s}")
    }
}

/// Decision rules for the type of ρ_p, for newforms with trivial character.
pub fn rep_type(p: u64, nu_p_level: u32, nu_2_level: u32, a_p_nonzero: bool) -> RepType {
    if nu_p_level == 0 {
        return RepType::Principal;
    }
    if nu_p_level == 1 {
        return if a_p_nonzero {
            RepType::Special
        } else {
            RepType::Undetermined
        };
    }
    if p == 2 && (nu_2_level == 2 || (nu_2_level > 1 && nu_2_level % 2 == 1)) {
        return RepType::Supercuspidal;
    }
    RepType::Undetermined
}

/// Hypothesis (H2): M odd, or ν_2(M) = 1 with λ_2 ≠ 0, or ν_2(M) ≥ 4.
pub fn h2_applicable(m: u64, lambda_2_nonzero: bool) -> bool {
    let v2 = m.trailing_zeros();
    m % 2 == 1 || (v2 == 1 && lambda_2_nonzero) || v2 >= 4
}

/// The local level ñ_p.
pub fn n_tilde(data: &LocalData) -> Result<u32> {
    data.check()?;
    let base = if data.p == 2 { data.m_p + 2 } else { data.m_p };
    if data.m_p >= 1 && data.lambda_p_zero {
        let omega = data.omega_set.as_ref().ok_or_else(|| {
            Error::IncompleteData(format!(
                "omega_set required at p = {} with m_p >= 1 and lambda_p = 0",
                data.p
            ))
        })?;
        let present = omega.present();
        if present.iter().any(|c| c.val_parity == 0) {
            return Ok(base);
        }
        if omega.unknown_classes().iter().any(|c| c.val_parity == 0) {
            return Err(Error::IncompleteData(format!(
                "cannot decide n~_{}: no valuation-0 class witnessed and some are unknown",
                data.p
            )));
        }
        if present.is_empty() {
            return Err(Error::IncompleteData(format!(
                "omega_set at p = {} has no witnessed class",
                data.p
            )));
        }
        return Ok(base + 1);
    }
    if data.m_p == 1 && !data.lambda_p_zero {
        return Ok(if data.p == 2 {
            if data.chi0.trivial_on_one_plus_4z2 {
                2
            } else {
                3
            }
        } else {
            1
        });
    }
    // m_p = 0
    Ok(if data.p == 2 {
        if data.chi0.trivial_on_one_plus_4z2 {
            2
        } else {
            3
        }
    } else if data.chi0.ramified {
        1
    } else {
        0
    })
}

/// Ñ_φ = ∏ p^{ñ_p}; the slice must include p = 2 and every prime dividing M_φ.
pub fn n_tilde_total(data_by_prime: &[LocalData]) -> Result<u64> {
    let mut seen = Vec::new();
    if !data_by_prime.iter().any(|d| d.p == 2) {
        return Err(Error::IncompleteData("local data at p = 2 is required".into()));
    }
    let mut total: u64 = 1;
    for d in data_by_prime {
        if seen.contains(&d.p) {
            return Err(Error::Domain(format!("duplicate local data at p = {}", d.p)));
        }
        seen.push(d.p);
        let e = n_tilde(d)?;
        total = d
            .p
            .checked_pow(e)
            .and_then(|q| total.checked_mul(q))
            .ok_or_else(|| Error::Domain("N~ overflows u64".into()))?;
    }
    Ok(total)
}

/// Which δ a c-function carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delta {
    /// Symbolic root α_p of x² - λ'_p x + 1.
    Alpha,
    /// Symbolic conjugate root α'_p.
    AlphaPrime,
    /// Concrete δ = λ'_p = -ω_p p^{-1/2} (special representation case).
    AtkinLehner,
}

/// A member of U_p(e, φ) or of the ambient γ family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalFunction {
    C { p: u64, index: u8, delta: Delta },
    Gamma { p: u64, e: u32, upsilon: SquareClass },
    GammaPrime { e: u32, upsilon: SquareClass },
    GammaDoublePrime { e: u32 },
    GammaZero { e: u32 },
}

impl fmt::Display for LocalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalFunction::C { p, index, delta } => {
                let d = match delta {
                    Delta::Alpha => "alpha",
                    Delta::AlphaPrime => "alpha'",
                    Delta::AtkinLehner => "lambda'",
                };
                write!(f, "c^({index})_{{{p},{d}}}")
            }
            LocalFunction::Gamma { p, e, upsilon } => {
                write!(f, "gamma_{{{e},{}}}", upsilon.representative(*p))
            }
            LocalFunction::GammaPrime { e, upsilon } => {
                write!(f, "gamma'_{{{e},{}}}", upsilon.unit)
            }
            LocalFunction::GammaDoublePrime { e } => write!(f, "gamma''_{{{e}}}"),
            LocalFunction::GammaZero { e } => write!(f, "gamma^0_{{{e}}}"),
        }
    }
}

/// U_p(e, φ): the witnessed members plus members that would join if an
/// unknown Ω_p class turns out to be present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct USet {
    pub members: Vec<LocalFunction>,
    pub possible: Vec<LocalFunction>,
}

/// The set U_p(e, φ). Only e = ñ_p is defined by the case ledger; other
/// levels are rejected.
pub fn u_set(data: &LocalData, e: u32) -> Result<USet> {
    let expected = n_tilde(data)?;
    if e != expected {
        return Err(Error::UnsupportedLevel { got: e, expected });
    }
    let p = data.p;
    let mut members = Vec::new();
    let mut possible = Vec::new();
    if data.m_p >= 1 && data.lambda_p_zero {
        let omega = data.omega_set.as_ref().expect("checked by n_tilde");
        let base = if p == 2 { data.m_p + 2 } else { data.m_p };
        let parity: u8 = if e == base { 0 } else { 1 };
        let ge = parity as u32;
        for class in all_square_classes(p) {
            if class.val_parity != parity {
                continue;
            }
            let f = LocalFunction::Gamma {
                p,
                e: ge,
                upsilon: class,
            };
            match omega.membership(&class) {
                Membership::Present => members.push(f),
                Membership::Unknown => possible.push(f),
                Membership::Absent => {}
            }
        }
        return Ok(USet { members, possible });
    }
    if data.m_p == 1 && !data.lambda_p_zero {
        if p == 2 {
            if data.chi0.trivial_on_one_plus_4z2 {
                members.push(LocalFunction::C {
                    p,
                    index: 5,
                    delta: Delta::AtkinLehner,
                });
            } else {
                members.push(LocalFunction::C {
                    p,
                    index: 6,
                    delta: Delta::AtkinLehner,
                });
                members.push(LocalFunction::GammaDoublePrime { e: 0 });
            }
        } else if data.chi0.ramified {
            members.push(LocalFunction::C {
                p,
                index: 6,
                delta: Delta::AtkinLehner,
            });
        } else {
            members.push(LocalFunction::C {
                p,
                index: 5,
                delta: Delta::AtkinLehner,
            });
        }
        return Ok(USet { members, possible });
    }
    // m_p = 0. For rational weight-2 newforms α_p ≠ α'_p, so the
    // two-function variant of the ledger applies.
    if p == 2 {
        if data.chi0.trivial_on_one_plus_4z2 {
            members.push(LocalFunction::C { p, index: 1, delta: Delta::Alpha });
            members.push(LocalFunction::C { p, index: 1, delta: Delta::AlphaPrime });
        } else {
            members.push(LocalFunction::C { p, index: 3, delta: Delta::Alpha });
            members.push(LocalFunction::C { p, index: 3, delta: Delta::AlphaPrime });
            members.push(LocalFunction::GammaDoublePrime { e: 0 });
        }
    } else if data.chi0.ramified {
        members.push(LocalFunction::C { p, index: 3, delta: Delta::Alpha });
        members.push(LocalFunction::C { p, index: 3, delta: Delta::AlphaPrime });
    } else {
        members.push(LocalFunction::C { p, index: 0, delta: Delta::Alpha });
    }
    Ok(USet { members, possible })
}

fn check_squarefree_positive(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let (sq, _) = split_square(n);
    if sq != 1 {
        return Err(Error::Domain(format!("n = {n} is not square-free")));
    }
    Ok(())
}

fn hilbert_u(a: i64, b: i64, p: u64) -> i8 {
    hilbert_int(a, b, &Place::finite(p)).expect("nonzero hilbert arguments")
}

/// `p^{-1/2}` as a RadicalValue.
fn p_inv_sqrt(p: u64) -> RadicalValue {
    RadicalValue::new(
        BigRational::new(BigInt::one(), BigInt::from(p)),
        p,
    )
}

/// δ = λ'_p = -ω_p p^{-1/2}.
fn atkin_lehner_delta(data: &LocalData) -> Result<RadicalValue> {
    let omega = data.omega_p.ok_or_else(|| {
        Error::IncompleteData(format!("omega_p required at p = {}", data.p))
    })?;
    Ok(p_inv_sqrt(data.p).scale(-(omega as i64)))
}

/// Raw c^(5) / c^(6) tables at a concrete δ; the branch conditions compare
/// the relevant Hilbert symbol with `p^{1/2} χ_{0,p}(p^{-1}) δ`, which must
/// be ±1 for the comparison to make sense.
fn raw_c(data: &LocalData, index: u8, delta: &RadicalValue, n: u64) -> Result<RadicalValue> {
    let p = data.p;
    let pi = p as i64;
    let ni = n as i64;
    let chi_p_inv = data.chi0.value_at_p_inverse as i64;
    let threshold = RadicalValue::sqrt_of(p).mul(delta).scale(chi_p_inv);
    let threshold = threshold
        .as_rational()
        .and_then(|r| {
            if r.is_one() {
                Some(1i8)
            } else if (-r).is_one() {
                Some(-1i8)
            } else {
                None
            }
        })
        .ok_or_else(|| {
            Error::Domain("raw c^(5)/c^(6) branch condition is not ±1 at this delta".into())
        })?;
    let v = if n.is_multiple_of(p) { 1u32 } else { 0 };
    if p != 2 {
        let symbol = hilbert_u(pi, ni, p);
        return Ok(match (index, v) {
            (5, 0) => {
                if symbol == -threshold {
                    RadicalValue::sqrt_of(2)
                } else {
                    RadicalValue::zero()
                }
            }
            (5, _) => RadicalValue::one(),
            (6, 0) => RadicalValue::one(),
            (6, _) => {
                if symbol == -threshold {
                    RadicalValue::sqrt_of(2).mul(delta)
                } else {
                    RadicalValue::zero()
                }
            }
            _ => unreachable!(),
        });
    }
    let sym_minus_one = hilbert_u(ni, -1, 2);
    let sym_two = hilbert_u(2, ni, 2);
    let chi_minus_one = data.chi0.value_at_minus_one;
    Ok(match (index, v) {
        (5, 0) => {
            if sym_minus_one == chi_minus_one {
                if sym_two == threshold {
                    RadicalValue::zero()
                } else {
                    RadicalValue::sqrt_of(2).mul(delta)
                }
            } else {
                RadicalValue::one()
            }
        }
        (5, _) => RadicalValue::one(),
        (6, 0) => delta.inv()?,
        (6, _) => {
            if sym_minus_one == chi_minus_one {
                if sym_two == threshold {
                    RadicalValue::zero()
                } else {
                    RadicalValue::sqrt_of(2).mul(delta)
                }
            } else {
                RadicalValue::one()
            }
        }
        _ => unreachable!(),
    })
}

/// Evaluates a local function at a square-free positive integer.
///
/// Functions with a symbolic δ yield a genuine `DeltaPoly`; everything else
/// is a constant.
pub fn eval_local(f: &LocalFunction, data: &LocalData, n: u64) -> Result<DeltaPoly> {
    check_squarefree_positive(n)?;
    let p = data.p;
    match f {
        LocalFunction::Gamma { p: fp, e, upsilon } => {
            debug_assert_eq!(*fp, p);
            let class = square_class(p, n)?;
            let v = if n.is_multiple_of(p) { 1u32 } else { 0 };
            let hit = v == *e && class == *upsilon;
            Ok(DeltaPoly::constant(RadicalValue::from_int(hit as i64)))
        }
        LocalFunction::GammaPrime { e, upsilon } => {
            if p != 2 {
                return Err(Error::Domain("gamma' is only defined for p = 2".into()));
            }
            let five_upsilon = SquareClass {
                val_parity: upsilon.val_parity,
                unit: (upsilon.unit * 5) % 8,
            };
            let a = eval_local(
                &LocalFunction::Gamma { p, e: *e, upsilon: *upsilon },
                data,
                n,
            )?;
            let b = eval_local(
                &LocalFunction::Gamma { p, e: *e, upsilon: five_upsilon },
                data,
                n,
            )?;
            let sum = a.get(0).checked_add(&b.get(0))?;
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            Ok(DeltaPoly::constant(RadicalValue::new(
                sum.coeff * half,
                sum.radicand,
            )))
        }
        LocalFunction::GammaDoublePrime { e } => {
            if p != 2 {
                return Err(Error::Domain("gamma'' is only defined for p = 2".into()));
            }
            let v = if n.is_multiple_of(2) { 1u32 } else { 0 };
            Ok(DeltaPoly::constant(RadicalValue::from_int((v == *e) as i64)))
        }
        LocalFunction::GammaZero { e } => {
            if p != 2 {
                return Err(Error::Domain("gamma^0 is only defined for p = 2".into()));
            }
            let v = if n.is_multiple_of(2) { 1u32 } else { 0 };
            let hit = (v == *e
                && hilbert_u(n as i64, -1, 2) == -data.chi0.value_at_minus_one)
                || v == *e + 1;
            Ok(DeltaPoly::constant(RadicalValue::from_int(hit as i64)))
        }
        LocalFunction::C { p: fp, index, delta } => {
            debug_assert_eq!(*fp, p);
            match delta {
                Delta::AtkinLehner => {
                    let d = atkin_lehner_delta(data)?;
                    if *index != 5 && *index != 6 {
                        return Err(Error::Domain(
                            "Atkin-Lehner specialization is defined for c^(5) and c^(6)".into(),
                        ));
                    }
                    Ok(DeltaPoly::constant(raw_c(data, *index, &d, n)?))
                }
                Delta::Alpha | Delta::AlphaPrime => symbolic_c(data, *index, n),
            }
        }
    }
}

/// The c^(0)..c^(4) tables with δ kept symbolic.
fn symbolic_c(data: &LocalData, index: u8, n: u64) -> Result<DeltaPoly> {
    let p = data.p;
    let pi = p as i64;
    let ni = n as i64;
    let v = if n.is_multiple_of(p) { 1u32 } else { 0 };
    let one = DeltaPoly::constant(RadicalValue::one());
    let delta = DeltaPoly::term(1, RadicalValue::one());
    let chi_p = data.chi0.value_at_p_inverse as i64;
    if p != 2 {
        // -(p,n)_p χ_{0,p}(p) p^{-1/2}
        let drift = || p_inv_sqrt(p).scale(-(hilbert_u(pi, ni, p) as i64) * chi_p);
        return Ok(match (index, v) {
            (0, _) => one,
            (1, 0) => one,
            (1, _) => delta,
            (2, 0) => DeltaPoly::constant(RadicalValue::one()).with_term(-1, drift()),
            (2, _) => one,
            (3, 0) => one,
            (3, _) => DeltaPoly::term(1, RadicalValue::one()).with_term(0, drift()),
            (4, 0) => DeltaPoly::zero(),
            (4, _) => DeltaPoly::term(
                1,
                RadicalValue::rational(BigRational::new(
                    BigInt::one(),
                    BigInt::from(pi - 1),
                )),
            ),
            _ => {
                return Err(Error::Domain(
                    "c^(5)/c^(6) need a concrete delta to branch".into(),
                ))
            }
        });
    }
    let matches_chi = hilbert_u(ni, -1, 2) == data.chi0.value_at_minus_one;
    let drift = || p_inv_sqrt(2).scale(-(hilbert_u(2, ni, 2) as i64) * chi_p);
    Ok(match (index, v) {
        (0, 0) => one,
        (0, _) => delta,
        (1, 0) if matches_chi => DeltaPoly::term(1, RadicalValue::one()).with_term(0, drift()),
        (1, _) => one,
        (2, 0) if matches_chi => delta,
        (2, _) => DeltaPoly::zero(),
        (3, 0) => DeltaPoly::term(-1, RadicalValue::one()),
        (3, _) if matches_chi => DeltaPoly::term(1, RadicalValue::one()).with_term(0, drift()),
        (3, _) => one,
        (4, 0) => DeltaPoly::zero(),
        (4, _) if matches_chi => {
            DeltaPoly::term(1, RadicalValue::from_int(2)).with_term(0, drift())
        }
        (4, _) => one,
        _ => {
            return Err(Error::Domain(
                "c^(5)/c^(6) need a concrete delta to branch".into(),
            ))
        }
    })
}

/// Builds Ω_p knowledge from coefficient support: classes witnessed by some
/// n in `support` are present, classes in `proven_absent` are absent, the
/// rest stay unknown.
pub fn infer_omega(support: &[u64], p: u64, proven_absent: &[SquareClass]) -> Result<OmegaSet> {
    let mut omega = OmegaSet::unknown(p);
    for &class in proven_absent {
        omega.set(class, Membership::Absent);
    }
    for &n in support {
        let class = square_class(p, n)?;
        if omega.membership(&class) == Membership::Absent {
            return Err(Error::Domain(format!(
                "support witness {n} contradicts a proven-absent class"
            )));
        }
        omega.set(class, Membership::Present);
    }
    Ok(omega)
}
