//! The affine group `G = ℤ ⋉ 𝔽_q((t))` and its compact open chain.
//!
//! An element `(n, f)` is the matrix `[[tⁿ, f], [0, 1]]`, so the product is
//! `(n₁, f₁)·(n₂, f₂) = (n₁ + n₂, f₁ + tⁿ¹ f₂)`. The subgroups
//! `O_k = tᵏ 𝔽_q[[t]]` of the additive factor are compact and open, nested
//! with index `q`, and conjugation by `(n, f)` carries `O_k` onto `O_{k+n}`.
//! `O_0 = 𝔽_q[[t]]` minimizes every element of `G` at once, so `G` is flat
//! with `G₁ = 𝔽_q((t))` and flat-rank one.
//!
//! Series are stored as Laurent polynomials, that is with finite support.
//! Addition, negation and multiplication by `tᵏ` are then exact, and every
//! coset question at level `k` only looks at finitely many exponents, so
//! nothing here is an approximation.
//!
//! Only prime `q` is supported, so `𝔽_q` is `ℤ/q`.

use std::collections::HashSet;
use std::fmt;
use std::ops::RangeInclusive;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::lattice::{FlatLatticeModel, LatticePoint};
use crate::text::{join, Rational, Record};

/// Upper bound on the number of coset representatives enumerated in one call.
pub const ENUMERATION_CAP: u128 = 1 << 24;

/// Chain range scanned by [`scale`] when the caller has no preference.
pub const DEFAULT_K_RANGE: RangeInclusive<i64> = 0..=4;

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn check_prime(q: u64) -> Result<()> {
    if is_prime(q) && q < (1 << 31) {
        Ok(())
    } else {
        Err(Error::NotPrime(q))
    }
}

/// A finitely supported Laurent series over `ℤ/q`.
///
/// Canonical form: no zero coefficient at either end of `coeffs`; the zero
/// series has empty `coeffs` and `lo = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedLaurent {
    q: u64,
    lo: i64,
    coeffs: Vec<u64>,
}

impl TruncatedLaurent {
    pub fn zero(q: u64) -> Result<Self> {
        check_prime(q)?;
        Ok(Self::zero_unchecked(q))
    }

    fn zero_unchecked(q: u64) -> Self {
        TruncatedLaurent { q, lo: 0, coeffs: Vec::new() }
    }

    /// `c·tᵉ`.
    pub fn monomial(q: u64, c: u64, e: i64) -> Result<Self> {
        Self::from_coeffs(q, e, vec![c])
    }

    /// `Σ coeffs[i]·t^(lo+i)`; coefficients must already be residues.
    pub fn from_coeffs(q: u64, lo: i64, coeffs: Vec<u64>) -> Result<Self> {
        check_prime(q)?;
        if let Some(&c) = coeffs.iter().find(|&&c| c >= q) {
            return Err(Error::BadCoefficient { coeff: c, q });
        }
        Ok(TruncatedLaurent { q, lo, coeffs }.normalized())
    }

    fn normalized(mut self) -> Self {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|&&c| c == 0).count();
        if lead == self.coeffs.len() {
            return Self::zero_unchecked(self.q);
        }
        self.coeffs.drain(..lead);
        self.lo += lead as i64;
        self
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient; `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.lo)
    }

    /// Lowest tracked exponent.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// One past the highest tracked exponent.
    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64
    }

    pub fn coeff(&self, e: i64) -> u64 {
        if e < self.lo || e >= self.hi() {
            0
        } else {
            self.coeffs[(e - self.lo) as usize]
        }
    }

    /// Whether the series lies in `O_k = tᵏ 𝔽_q[[t]]`.
    pub fn in_level(&self, k: i64) -> bool {
        self.valuation().is_none_or(|v| v >= k)
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(Error::FieldMismatch(self.q, other.q))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let coeffs = (lo..hi)
            .map(|e| (self.coeff(e) + other.coeff(e)) % self.q)
            .collect();
        Ok(TruncatedLaurent { q: self.q, lo, coeffs }.normalized())
    }

    pub fn neg(&self) -> Self {
        TruncatedLaurent {
            q: self.q,
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|&c| (self.q - c) % self.q).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Multiplication by `tᵏ`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        TruncatedLaurent { q: self.q, lo: self.lo + k, coeffs: self.coeffs.clone() }
    }

    /// Canonical representative of the class modulo `O_k`: the terms below `tᵏ`.
    pub fn mod_level(&self, k: i64) -> Self {
        if self.is_zero() || k <= self.lo {
            return Self::zero_unchecked(self.q);
        }
        let keep = ((k - self.lo) as usize).min(self.coeffs.len());
        TruncatedLaurent { q: self.q, lo: self.lo, coeffs: self.coeffs[..keep].to_vec() }.normalized()
    }

    /// Parses `c_lo c_lo+1 ... @ lo`. An empty coefficient list is zero.
    pub fn parse(q: u64, text: &str) -> Result<Self> {
        let (coeffs, lo) = text
            .split_once('@')
            .ok_or_else(|| Error::parse(0, "expected `c_lo ... c_hi @ lo`"))?;
        let lo = lo
            .trim()
            .parse::<i64>()
            .map_err(|_| Error::parse(0, format!("malformed exponent `{}`", lo.trim())))?;
        let coeffs = coeffs
            .split_whitespace()
            .map(|c| {
                c.parse::<u64>()
                    .map_err(|_| Error::parse(0, format!("malformed coefficient `{c}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(q, lo, coeffs)
    }
}

impl fmt::Display for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0 @ 0")
        } else {
            write!(f, "{} @ {}", join(&self.coeffs), self.lo)
        }
    }
}

/// An element `(n, f)` of `ℤ ⋉ 𝔽_q((t))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineElement {
    pub n: i64,
    pub f: TruncatedLaurent,
}

impl AffineElement {
    pub fn new(n: i64, f: TruncatedLaurent) -> Self {
        AffineElement { n, f }
    }

    pub fn identity(q: u64) -> Result<Self> {
        Ok(AffineElement { n: 0, f: TruncatedLaurent::zero(q)? })
    }

    /// `(n, 0)`: multiplication by `tⁿ`.
    pub fn translation(q: u64, n: i64) -> Result<Self> {
        Ok(AffineElement { n, f: TruncatedLaurent::zero(q)? })
    }

    /// `(0, f)`.
    pub fn additive(f: TruncatedLaurent) -> Self {
        AffineElement { n: 0, f }
    }

    pub fn q(&self) -> u64 {
        self.f.q
    }

    pub fn is_identity(&self) -> bool {
        self.n == 0 && self.f.is_zero()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(AffineElement {
            n: self.n + other.n,
            f: self.f.add(&other.f.shift(self.n))?,
        })
    }

    pub fn inverse(&self) -> Self {
        AffineElement { n: -self.n, f: self.f.shift(-self.n).neg() }
    }

    pub fn pow(&self, e: u64) -> Result<Self> {
        let mut result = Self::identity(self.q())?;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            base = base.mul(&base)?;
            e >>= 1;
        }
        Ok(result)
    }

    /// `g·h·g⁻¹`.
    pub fn conjugate(&self, h: &Self) -> Result<Self> {
        self.mul(h)?.mul(&self.inverse())
    }

    /// Parses `(n; c_lo ... c_hi @ lo)`; the parentheses are optional.
    pub fn parse(q: u64, text: &str) -> Result<Self> {
        let t = text.trim();
        let t = t.strip_prefix('(').unwrap_or(t);
        let t = t.strip_suffix(')').unwrap_or(t);
        let (n, f) = t
            .split_once(';')
            .ok_or_else(|| Error::parse(0, "expected `(n; c_lo ... c_hi @ lo)`"))?;
        let n = n
            .trim()
            .parse::<i64>()
            .map_err(|_| Error::parse(0, format!("malformed shift `{}`", n.trim())))?;
        Ok(AffineElement { n, f: TruncatedLaurent::parse(q, f)? })
    }
}

impl fmt::Display for AffineElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; {})", self.n, self.f)
    }
}

/// The compact open subgroup `O_k = tᵏ 𝔽_q[[t]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupIndexK(pub i64);

impl SubgroupIndexK {
    /// Whether the additive element `f` lies in this subgroup.
    pub fn contains(&self, f: &TruncatedLaurent) -> bool {
        f.in_level(self.0)
    }
}

/// Level of `g·O_k·g⁻¹`, found by conjugating the monomials `tʲ` for `j`
/// in a window above `k` and reading off the valuations of the images.
///
/// The window spans `|n| + 2` exponents, enough to see that the images are
/// consecutive monomial levels, i.e. that the conjugate is again a member
/// of the chain rather than some other subgroup.
pub fn conjugate_subgroup(g: &AffineElement, k: SubgroupIndexK) -> Result<SubgroupIndexK> {
    let q = g.q();
    let width = g.n.unsigned_abs() as i64 + 2;
    let mut valuations = Vec::with_capacity(width as usize);
    for j in k.0..k.0 + width {
        let h = AffineElement::additive(TruncatedLaurent::monomial(q, 1, j)?);
        let c = g.conjugate(&h)?;
        if c.n != 0 {
            return Err(Error::InvalidArgument(format!(
                "conjugate of {h} by {g} left the additive subgroup"
            )));
        }
        valuations.push(c.f.valuation().expect("conjugation is injective"));
    }
    let level = valuations[0];
    if valuations.iter().zip(level..).any(|(&v, want)| v != want) {
        return Err(Error::InvalidArgument(format!(
            "conjugate of O_{} by {g} is not a chain member",
            k.0
        )));
    }
    Ok(SubgroupIndexK(level))
}

/// `|O_a : O_a ∩ O_b|` by listing representatives of `O_a` modulo
/// `O_max(a,b)` and counting their distinct classes modulo `O_a ∩ O_b`.
pub fn coset_count(q: u64, a: SubgroupIndexK, b: SubgroupIndexK) -> Result<u64> {
    check_prime(q)?;
    let top = a.0.max(b.0);
    let width = (top - a.0) as u32;
    let total = (q as u128)
        .checked_pow(width)
        .filter(|&t| t <= ENUMERATION_CAP)
        .ok_or(Error::EnumerationTooLarge((q as u128).saturating_pow(width)))?;
    let mut classes: HashSet<TruncatedLaurent> = HashSet::with_capacity(total as usize);
    let mut digits = vec![0u64; width as usize];
    for _ in 0..total {
        let rep = TruncatedLaurent { q, lo: a.0, coeffs: digits.clone() }.normalized();
        debug_assert!(a.contains(&rep));
        classes.insert(rep.mod_level(top));
        for d in digits.iter_mut() {
            *d += 1;
            if *d < q {
                break;
            }
            *d = 0;
        }
    }
    Ok(classes.len() as u64)
}

/// `|g·O_k·g⁻¹ : g·O_k·g⁻¹ ∩ O_k|`.
pub fn conjugate_index(g: &AffineElement, k: SubgroupIndexK) -> Result<u64> {
    let image = conjugate_subgroup(g, k)?;
    coset_count(g.q(), image, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMethod {
    IndexMinimization,
    OrbitGrowth,
}

impl fmt::Display for ScaleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleMethod::IndexMinimization => "index-minimization",
            ScaleMethod::OrbitGrowth => "orbit-growth",
        })
    }
}

/// A scale value and how it was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleResult {
    pub value: u64,
    pub method: ScaleMethod,
    /// Least minimizing chain level, for index minimization.
    pub minimizing_k: Option<i64>,
}

impl fmt::Display for ScaleResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.minimizing_k {
            Some(k) => write!(f, "{} ({}, k={k})", self.value, self.method),
            None => write!(f, "{} ({})", self.value, self.method),
        }
    }
}

/// Minimum of [`conjugate_index`] over `O_k` for `k` in `k_range`.
pub fn scale(g: &AffineElement, k_range: RangeInclusive<i64>) -> Result<ScaleResult> {
    if k_range.is_empty() {
        return Err(Error::EmptyRange);
    }
    let mut best: Option<(u64, i64)> = None;
    for k in k_range {
        let idx = conjugate_index(g, SubgroupIndexK(k))?;
        if best.is_none_or(|(b, _)| idx < b) {
            best = Some((idx, k));
        }
    }
    let (value, k) = best.unwrap();
    Ok(ScaleResult { value, method: ScaleMethod::IndexMinimization, minimizing_k: Some(k) })
}

/// Outcome of checking that one subgroup minimizes a list of elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatnessReport {
    pub level: SubgroupIndexK,
    pub flat: bool,
    /// `(element, index at level, scale)` for every element not minimized.
    pub violators: Vec<(AffineElement, u64, u64)>,
}

impl FlatnessReport {
    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.push("level", self.level.0);
        r.push("flat", self.flat);
        for (g, idx, s) in &self.violators {
            r.push("violator", format!("{g} index {idx} scale {s}"));
        }
        r
    }
}

/// Checks that `O_k` attains the scale of every supplied element.
pub fn flatness_certificate(
    q: u64,
    elements: &[AffineElement],
    k: SubgroupIndexK,
) -> Result<FlatnessReport> {
    check_prime(q)?;
    let mut violators = Vec::new();
    for g in elements {
        if g.q() != q {
            return Err(Error::FieldMismatch(q, g.q()));
        }
        let idx = conjugate_index(g, k)?;
        let s = scale(g, DEFAULT_K_RANGE)?.value;
        if idx != s {
            violators.push((g.clone(), idx, s));
        }
    }
    Ok(FlatnessReport { level: k, flat: violators.is_empty(), violators })
}

/// Whether `g` normalizes `O_0`, checked as set equality: the conjugate
/// is contained in `O_0` and contains it.
pub fn g1_membership(g: &AffineElement) -> Result<bool> {
    let base = SubgroupIndexK(0);
    let image = conjugate_subgroup(g, base)?;
    Ok(coset_count(g.q(), image, base)? == 1 && coset_count(g.q(), base, image)? == 1)
}

/// Rank of the image of the probes in `G/G₁ ≅ ℤ`.
pub fn flat_rank_of_example(q: u64, probes: &[AffineElement]) -> Result<u32> {
    check_prime(q)?;
    let mut g = 0i64;
    for p in probes {
        if p.q() != q {
            return Err(Error::FieldMismatch(q, p.q()));
        }
        g = g.gcd(&p.n);
    }
    Ok(u32::from(g != 0))
}

fn exact_log(q: u64, mut v: u64) -> Result<u32> {
    let mut e = 0;
    while v > 1 {
        if !v.is_multiple_of(q) {
            return Err(Error::InvalidArgument(format!("{v} is not a power of {q}")));
        }
        v /= q;
        e += 1;
    }
    Ok(e)
}

/// Scale exponents of `g` and `g⁻¹` and the resulting displacement of `O_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Displacement {
    /// `s(g) = q^e_plus`.
    pub e_plus: u32,
    /// `s(g⁻¹) = q^e_minus`.
    pub e_minus: u32,
    /// `e_plus + e_minus`, in units of `log q`.
    pub displacement: u32,
    /// Distance from `0` to `n` in the rank-one lattice with unit weight.
    pub lattice_distance: Rational,
}

impl Displacement {
    pub fn consistent(&self) -> bool {
        Rational::from_integer(self.displacement.into()) == self.lattice_distance
    }
}

pub fn displacement_metric(g: &AffineElement) -> Result<Displacement> {
    let q = g.q();
    let e_plus = exact_log(q, scale(g, DEFAULT_K_RANGE)?.value)?;
    let e_minus = exact_log(q, scale(&g.inverse(), DEFAULT_K_RANGE)?.value)?;
    let line = FlatLatticeModel::coordinate(1);
    let lattice_distance = line.distance(&LatticePoint::origin(1), &LatticePoint(vec![g.n]))?;
    Ok(Displacement { e_plus, e_minus, displacement: e_plus + e_minus, lattice_distance })
}

/// Whether `⟨g⟩` is finite, detected by looking for `gᵐ = 1` with `m ≤ bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Periodicity {
    pub periodic: bool,
    pub order: Option<u64>,
}

pub fn topological_periodicity_check(g: &AffineElement, bound: u64) -> Result<Periodicity> {
    if bound < g.q() {
        return Err(Error::InvalidArgument(format!(
            "bound {bound} is smaller than q = {}",
            g.q()
        )));
    }
    let mut power = g.clone();
    for m in 1..=bound {
        if power.is_identity() {
            return Ok(Periodicity { periodic: true, order: Some(m) });
        }
        power = power.mul(g)?;
    }
    Ok(Periodicity { periodic: false, order: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::integer;
    use proptest::prelude::*;

    fn el(q: u64, s: &str) -> AffineElement {
        AffineElement::parse(q, s).unwrap()
    }

    /// Closed form for this group.
    fn oracle_scale(q: u64, n: i64) -> u64 {
        if n >= 0 {
            1
        } else {
            q.pow((-n) as u32)
        }
    }

    #[test]
    fn parse_and_display() {
        let g = el(3, "(2; 1 0 2 @ -1)");
        assert_eq!(g.n, 2);
        assert_eq!(g.f.coeff(-1), 1);
        assert_eq!(g.f.coeff(1), 2);
        assert_eq!(g.to_string(), "(2; 1 0 2 @ -1)");
        assert_eq!(el(2, "(1;0@0)"), AffineElement::translation(2, 1).unwrap());
        assert_eq!(el(2, " -3 ; 0 0 1 @ 4 ").f, TruncatedLaurent::monomial(2, 1, 6).unwrap());
        assert!(matches!(AffineElement::parse(2, "(1; 2 @ 0)"), Err(Error::BadCoefficient { coeff: 2, q: 2 })));
        assert!(matches!(AffineElement::parse(4, "(1; 1 @ 0)"), Err(Error::NotPrime(4))));
        assert!(AffineElement::parse(2, "(1 0 @ 0)").is_err());
        assert!(AffineElement::parse(2, "(x; 0 @ 0)").is_err());
    }

    #[test]
    fn conjugate_index_examples() {
        assert_eq!(conjugate_index(&el(2, "(-2; 0 @ 0)"), SubgroupIndexK(0)).unwrap(), 4);
        assert_eq!(conjugate_index(&el(3, "(5; 2 1 @ -3)"), SubgroupIndexK(0)).unwrap(), 1);
        assert_eq!(conjugate_index(&el(2, "(0; 1 @ -3)"), SubgroupIndexK(0)).unwrap(), 1);
    }

    #[test]
    fn scale_examples() {
        let s = scale(&el(2, "(-3; 1 1 @ 0)"), DEFAULT_K_RANGE).unwrap();
        assert_eq!(s.value, 8);
        assert_eq!(s.method, ScaleMethod::IndexMinimization);
        assert_eq!(s.to_string(), "8 (index-minimization, k=0)");
        assert_eq!(scale(&AffineElement::identity(7).unwrap(), -2..=2).unwrap().value, 1);
        assert_eq!(scale(&el(5, "(2; 1 @ -1)"), DEFAULT_K_RANGE).unwrap().value, 1);
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 1..=0;
        assert_eq!(scale(&el(5, "(2; 1 @ -1)"), empty).unwrap_err(), Error::EmptyRange);
    }

    #[test]
    fn coset_enumeration_cap() {
        assert!(matches!(
            coset_count(2, SubgroupIndexK(0), SubgroupIndexK(40)),
            Err(Error::EnumerationTooLarge(_))
        ));
    }

    #[test]
    fn flatness_examples() {
        let elements: Vec<_> = ["(-1; 0 @ 0)", "(1; 0 @ 0)", "(0; 1 @ -2)", "(-2; 1 @ 0)"]
            .iter()
            .map(|s| el(2, s))
            .collect();
        let report = flatness_certificate(2, &elements, SubgroupIndexK(0)).unwrap();
        assert!(report.flat);
        assert!(flatness_certificate(2, &[], SubgroupIndexK(0)).unwrap().flat);
        let elements3: Vec<_> = ["(-1; 0 @ 0)", "(1; 0 @ 0)", "(0; 1 @ -2)", "(-2; 1 @ 0)"]
            .iter()
            .map(|s| el(3, s))
            .collect();
        assert!(flatness_certificate(3, &elements3, SubgroupIndexK(4)).unwrap().flat);
        assert!(flatness_certificate(4, &[], SubgroupIndexK(0)).is_err());
    }

    #[test]
    fn g1_examples() {
        assert!(g1_membership(&el(2, "(0; 1 0 0 0 0 0 0 1 @ -7)")).unwrap());
        assert!(!g1_membership(&el(2, "(1; 0 @ 0)")).unwrap());
        assert!(g1_membership(&AffineElement::identity(3).unwrap()).unwrap());
    }

    #[test]
    fn flat_rank_examples() {
        assert_eq!(flat_rank_of_example(2, &[el(2, "(1; 0 @ 0)")]).unwrap(), 1);
        assert_eq!(flat_rank_of_example(2, &[el(2, "(0; 1 1 @ -2)")]).unwrap(), 0);
        assert_eq!(
            flat_rank_of_example(2, &[el(2, "(2; 0 @ 0)"), el(2, "(-3; 1 @ 1)")]).unwrap(),
            1
        );
        assert_eq!(flat_rank_of_example(3, &[]).unwrap(), 0);
        assert_eq!(flat_rank_of_example(6, &[]).unwrap_err(), Error::NotPrime(6));
    }

    #[test]
    fn displacement_examples() {
        let d = displacement_metric(&el(2, "(-2; 0 @ 0)")).unwrap();
        assert_eq!((d.e_plus, d.e_minus, d.displacement), (2, 0, 2));
        assert!(d.consistent());
        let d = displacement_metric(&AffineElement::identity(2).unwrap()).unwrap();
        assert_eq!((d.e_plus, d.e_minus, d.displacement), (0, 0, 0));
        let d = displacement_metric(&el(3, "(3; 1 @ -1)")).unwrap();
        assert_eq!((d.e_plus, d.e_minus, d.displacement), (0, 3, 3));
        assert_eq!(d.lattice_distance, integer(3));
    }

    #[test]
    fn periodicity_examples() {
        let p = topological_periodicity_check(&el(2, "(0; 1 1 0 1 @ -2)"), 2).unwrap();
        assert!(p.periodic);
        assert!(p.order.unwrap() <= 2);
        let p = topological_periodicity_check(&el(2, "(1; 0 @ 0)"), 64).unwrap();
        assert_eq!(p, Periodicity { periodic: false, order: None });
        let p = topological_periodicity_check(&AffineElement::identity(5).unwrap(), 5).unwrap();
        assert_eq!(p.order, Some(1));
        assert!(topological_periodicity_check(&AffineElement::identity(5).unwrap(), 4).is_err());
    }

    #[test]
    fn mod_level_and_membership() {
        let f = TruncatedLaurent::parse(3, "1 2 0 1 @ -2").unwrap();
        assert_eq!(f.mod_level(0), TruncatedLaurent::parse(3, "1 2 @ -2").unwrap());
        assert_eq!(f.mod_level(-2), TruncatedLaurent::zero(3).unwrap());
        assert!(f.in_level(-2));
        assert!(!f.in_level(-1));
        assert!(TruncatedLaurent::zero(3).unwrap().in_level(1000));
    }

    fn arb_series(q: u64) -> impl Strategy<Value = TruncatedLaurent> {
        (-6i64..6, proptest::collection::vec(0..q, 0..8))
            .prop_map(move |(lo, c)| TruncatedLaurent::from_coeffs(q, lo, c).unwrap())
    }

    fn arb_element(q: u64) -> impl Strategy<Value = AffineElement> {
        (-5i64..=5, arb_series(q)).prop_map(|(n, f)| AffineElement::new(n, f))
    }

    fn arb_q() -> impl Strategy<Value = u64> {
        prop_oneof![Just(2u64), Just(3), Just(5), Just(7)]
    }

    proptest! {
        #[test]
        fn group_axioms((a, b, c) in arb_q().prop_flat_map(|q| (arb_element(q), arb_element(q), arb_element(q)))) {
            let e = AffineElement::identity(a.q()).unwrap();
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(a.mul(&e).unwrap(), a.clone());
            prop_assert_eq!(e.mul(&a).unwrap(), a.clone());
            prop_assert!(a.mul(&a.inverse()).unwrap().is_identity());
            prop_assert!(a.inverse().mul(&a).unwrap().is_identity());
        }

        #[test]
        fn index_matches_closed_form_and_is_constant_in_k(g in arb_q().prop_flat_map(arb_element)) {
            for k in -4..=4 {
                prop_assert_eq!(conjugate_index(&g, SubgroupIndexK(k)).unwrap(), oracle_scale(g.q(), g.n));
            }
        }

        #[test]
        fn rank_one_signature(g in arb_q().prop_flat_map(arb_element)) {
            let s = scale(&g, DEFAULT_K_RANGE).unwrap().value;
            let si = scale(&g.inverse(), DEFAULT_K_RANGE).unwrap().value;
            prop_assert_eq!(s * si, g.q().pow(g.n.unsigned_abs() as u32));
            prop_assert!(s == 1 || si == 1);
            prop_assert_eq!(g1_membership(&g).unwrap(), g.n == 0);
            if g1_membership(&g).unwrap() {
                prop_assert_eq!(s, 1);
                prop_assert_eq!(si, 1);
            }
            let periodic = topological_periodicity_check(&g, g.q()).unwrap().periodic;
            prop_assert_eq!(periodic, g1_membership(&g).unwrap());
        }

        #[test]
        fn flat_rank_at_most_one(probes in arb_q().prop_flat_map(|q| proptest::collection::vec(arb_element(q), 0..6))) {
            let q = probes.first().map_or(2, AffineElement::q);
            let r = flat_rank_of_example(q, &probes).unwrap();
            prop_assert!(r <= 1);
            prop_assert_eq!(r == 1, probes.iter().any(|p| p.n != 0));
        }

        #[test]
        fn text_roundtrip(g in arb_q().prop_flat_map(arb_element)) {
            prop_assert_eq!(AffineElement::parse(g.q(), &g.to_string()).unwrap(), g);
        }
    }
}
