//! Symbolic algebra of Majorana operators.
//!
//! A Majorana polynomial is a finite sum of monomials `z * c_{i1} c_{i2} ... c_{ik}`
//! kept in canonical form: indices strictly ascending, no zero coefficients. The
//! relations `c_i^2 = 1` and `{c_i, c_j} = 2 delta_ij` reduce every product to this
//! form, so equality of canonical polynomials is equality of operators.
//!
//! Coefficients are generic over [`Coefficient`]. Two carriers are provided:
//! double-precision [`Complex64`] for numerics, and [`Exact`] (Gaussian rationals)
//! for identities such as `[W, H] = 0` that must hold exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Identifier of a single Majorana generator `c_i`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MajoranaIndex(pub u32);

impl MajoranaIndex {
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for MajoranaIndex {
    fn from(i: u32) -> Self {
        MajoranaIndex(i)
    }
}

impl fmt::Display for MajoranaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Strictly ascending index sequence of a canonical monomial.
pub type Key = SmallVec<[MajoranaIndex; 8]>;

/// Gaussian rationals, used where an identity must be decided exactly.
pub type Exact = Complex<BigRational>;

/// Absolute pruning threshold for floating-point coefficients after a merge.
pub const FLOAT_PRUNE: f64 = 1e-14;

/// Scalar field of a Majorana polynomial.
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn imag_unit() -> Self;
    fn conjugate(&self) -> Self;
    /// Whether a merged coefficient is dropped from a polynomial.
    fn is_negligible(&self) -> bool;
    /// Zero test used by identity checks; exact carriers ignore `tol`.
    fn is_zero_within(&self, tol: f64) -> bool;
    fn to_c64(&self) -> Complex64;
    /// Text form `(<re>,<im>)`.
    fn render(&self) -> String;
}

fn fmt_f64(x: f64) -> String {
    // -0 and 0 must render identically.
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

impl Coefficient for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn is_negligible(&self) -> bool {
        self.norm() <= FLOAT_PRUNE
    }
    fn is_zero_within(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn render(&self) -> String {
        format!("({},{})", fmt_f64(self.re), fmt_f64(self.im))
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

impl Coefficient for Exact {
    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }
    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn is_negligible(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn is_zero_within(&self, _tol: f64) -> bool {
        self.is_negligible()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn render(&self) -> String {
        format!("({},{})", self.re, self.im)
    }
}

/// Exact rational equal to the shortest decimal rendering of `x`.
///
/// `0.1` becomes `1/10`, not the binary fraction nearest to it, so couplings typed
/// as decimals keep their intended value in exact mode.
pub fn rational_from_decimal(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let text = format!("{x}");
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let numer: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if negative { -r } else { r })
}

/// Exact real coefficient from a decimal-valued `f64`.
pub fn exact_real(x: f64) -> Option<Exact> {
    rational_from_decimal(x).map(|r| Complex::new(r, BigRational::zero()))
}

/// Sorts `factors` and returns `true` if the sorting permutation is odd.
///
/// Stable merge sort; equal indices are never counted as inversions.
fn sort_counting_parity(factors: &mut [MajoranaIndex]) -> bool {
    fn merge_sort(v: &mut [MajoranaIndex], buf: &mut Vec<MajoranaIndex>) -> usize {
        let n = v.len();
        if n < 2 {
            return 0;
        }
        let mid = n / 2;
        let mut inv = merge_sort(&mut v[..mid], buf) + merge_sort(&mut v[mid..], buf);
        buf.clear();
        let (mut i, mut j) = (0, mid);
        while i < mid && j < n {
            if v[j] < v[i] {
                inv += mid - i;
                buf.push(v[j]);
                j += 1;
            } else {
                buf.push(v[i]);
                i += 1;
            }
        }
        buf.extend_from_slice(&v[i..mid]);
        buf.extend_from_slice(&v[j..n]);
        v.copy_from_slice(buf);
        inv
    }
    let mut buf = Vec::with_capacity(factors.len());
    merge_sort(factors, &mut buf) % 2 == 1
}

/// Product of two canonical monomials: `(odd sign, canonical key)`.
fn multiply_keys(a: &[MajoranaIndex], b: &[MajoranaIndex]) -> (bool, Key) {
    let mut negative = false;
    let mut out = Key::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else if a[i] > b[j] {
            // b[j] moves left past every remaining element of a.
            if (a.len() - i) % 2 == 1 {
                negative = !negative;
            }
            out.push(b[j]);
            j += 1;
        } else {
            // Moves past the elements greater than it, then squares to one.
            if (a.len() - i - 1) % 2 == 1 {
                negative = !negative;
            }
            i += 1;
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    (negative, out)
}

/// A single canonical term `coefficient * c_{i1} ... c_{ik}` with `i1 < ... < ik`.
#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaMonomial<C = Complex64> {
    pub coefficient: C,
    pub indices: Key,
}

impl<C: Coefficient> MajoranaMonomial<C> {
    pub fn degree(&self) -> usize {
        self.indices.len()
    }
}

/// Reduces the ordered product `coefficient * c_{f1} c_{f2} ...` to canonical form.
pub fn canonicalize<C: Coefficient>(raw_factors: &[MajoranaIndex], coefficient: C) -> MajoranaMonomial<C> {
    let mut sorted: Key = raw_factors.iter().copied().collect();
    let odd = sort_counting_parity(&mut sorted);
    let mut indices = Key::with_capacity(sorted.len());
    for idx in sorted {
        if indices.last() == Some(&idx) {
            indices.pop();
        } else {
            indices.push(idx);
        }
    }
    let coefficient = if odd { -coefficient } else { coefficient };
    MajoranaMonomial { coefficient, indices }
}

/// Parity of a polynomial whose terms all share one degree parity.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Involutive relabelling of Majoranas together with the left half `Λ₋`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectionMap {
    sigma: Vec<MajoranaIndex>,
    left: Vec<bool>,
}

impl ReflectionMap {
    /// Validates that `sigma` is an involution exchanging `left_set` with its complement.
    pub fn new(sigma: Vec<MajoranaIndex>, left_set: &[MajoranaIndex]) -> Result<Self> {
        let n = sigma.len();
        for (i, s) in sigma.iter().enumerate() {
            if s.get() >= n {
                return Err(Error::InvalidReflection(format!(
                    "sigma({i}) = {} is out of range",
                    s.0
                )));
            }
            if sigma[s.get()].get() != i {
                return Err(Error::InvalidReflection(format!("sigma is not an involution at {i}")));
            }
        }
        let mut left = vec![false; n];
        for l in left_set {
            if l.get() >= n {
                return Err(Error::InvalidReflection(format!(
                    "left-set index {} is out of range",
                    l.0
                )));
            }
            left[l.get()] = true;
        }
        for i in 0..n {
            if left[i] == left[sigma[i].get()] {
                return Err(Error::InvalidReflection(format!(
                    "index {i} and its image {} lie on the same side",
                    sigma[i].0
                )));
            }
        }
        Ok(ReflectionMap { sigma, left })
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn image(&self, i: MajoranaIndex) -> Result<MajoranaIndex> {
        self.sigma.get(i.get()).copied().ok_or(Error::ReflectionDomain(i.0))
    }

    pub fn is_left(&self, i: MajoranaIndex) -> bool {
        self.left.get(i.get()).copied().unwrap_or(false)
    }

    pub fn sigma(&self) -> &[MajoranaIndex] {
        &self.sigma
    }

    pub fn left_set(&self) -> Vec<MajoranaIndex> {
        (0..self.left.len() as u32)
            .map(MajoranaIndex)
            .filter(|&i| self.is_left(i))
            .collect()
    }
}

/// Finite sum of canonical monomials with nonzero coefficients.
#[derive(Clone, PartialEq)]
pub struct MajoranaPolynomial<C = Complex64> {
    terms: BTreeMap<Key, C>,
}

pub type Polynomial = MajoranaPolynomial<Complex64>;
pub type ExactPolynomial = MajoranaPolynomial<Exact>;

impl<C: Coefficient> fmt::Debug for MajoranaPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl<C: Coefficient> Default for MajoranaPolynomial<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> MajoranaPolynomial<C> {
    pub fn zero() -> Self {
        MajoranaPolynomial { terms: BTreeMap::new() }
    }

    pub fn identity() -> Self {
        Self::scalar(C::one())
    }

    pub fn scalar(z: C) -> Self {
        let mut p = Self::zero();
        p.add_term(Key::new(), z);
        p
    }

    pub fn generator(i: impl Into<MajoranaIndex>) -> Self {
        Self::monomial(&[i.into()], C::one())
    }

    /// The ordered product `coefficient * c_{f1} c_{f2} ...`, canonicalized.
    pub fn monomial(factors: &[MajoranaIndex], coefficient: C) -> Self {
        let m = canonicalize(factors, coefficient);
        let mut p = Self::zero();
        p.add_term(m.indices, m.coefficient);
        p
    }

    pub fn from_monomial(m: MajoranaMonomial<C>) -> Self {
        let mut p = Self::zero();
        p.add_term(m.indices, m.coefficient);
        p
    }

    /// Adds `z` to the coefficient of the canonical key `key`.
    fn add_term(&mut self, key: Key, z: C) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                if !z.is_negligible() {
                    e.insert(z);
                }
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + z;
                if sum.is_negligible() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff every coefficient is zero to within `tol` (exactly, for exact carriers).
    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.is_zero_within(tol))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &C)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = MajoranaMonomial<C>> + '_ {
        self.terms.iter().map(|(k, c)| MajoranaMonomial {
            coefficient: c.clone(),
            indices: k.clone(),
        })
    }

    pub fn coefficient(&self, indices: &[MajoranaIndex]) -> C {
        self.terms.get(indices).cloned().unwrap_or_else(C::zero)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|k| k.len() % 2);
        let first = it.next()?;
        if it.all(|p| p == first) {
            Some(if first == 0 { Parity::Even } else { Parity::Odd })
        } else {
            None
        }
    }

    /// One past the largest index used, i.e. the minimal Majorana count.
    pub fn index_bound(&self) -> usize {
        self.terms
            .keys()
            .filter_map(|k| k.last())
            .map(|i| i.get() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.to_c64().norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, z: &C) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.clone() * z.clone());
        }
        out
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let (negative, key) = multiply_keys(ka, kb);
                let z = ca.clone() * cb.clone();
                out.add_term(key, if negative { -z } else { z });
            }
        }
        out
    }

    /// Conjugates coefficients and reverses each factor sequence.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let n = k.len();
            let z = c.conjugate();
            // Reversing n distinct anticommuting factors costs n(n-1)/2 swaps.
            let z = if (n * n.saturating_sub(1) / 2) % 2 == 1 { -z } else { z };
            out.add_term(k.clone(), z);
        }
        out
    }

    /// Anti-linear reflection: `z c_{i1}...c_{ik} -> conj(z) c_{s(i1)}...c_{s(ik)}`.
    pub fn reflect(&self, r: &ReflectionMap) -> Result<Self> {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let image: Key = k.iter().map(|&i| r.image(i)).collect::<Result<_>>()?;
            let m = canonicalize(&image, c.conjugate());
            out.add_term(m.indices, m.coefficient);
        }
        Ok(out)
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> MajoranaPolynomial<D> {
        let mut out = MajoranaPolynomial::<D>::zero();
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    pub fn to_float(&self) -> Polynomial {
        self.map_coefficients(|c| c.to_c64())
    }

    /// Canonical text rendering, terms sorted by key and joined with ` + `.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(k, c)| render_term(k, c))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Rendering of each term on its own, in key order.
    pub fn render_terms(&self) -> Vec<String> {
        self.terms.iter().map(|(k, c)| render_term(k, c)).collect()
    }
}

fn render_term<C: Coefficient>(k: &[MajoranaIndex], c: &C) -> String {
    let mut s = c.render();
    if k.is_empty() {
        s.push_str("*1");
    }
    for i in k {
        s.push_str(&format!("*c{}", i.0));
    }
    s
}

impl<C: Coefficient> Add for &MajoranaPolynomial<C> {
    type Output = MajoranaPolynomial<C>;
    fn add(self, rhs: Self) -> MajoranaPolynomial<C> {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl<C: Coefficient> Sub for &MajoranaPolynomial<C> {
    type Output = MajoranaPolynomial<C>;
    fn sub(self, rhs: Self) -> MajoranaPolynomial<C> {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coefficient> Mul for &MajoranaPolynomial<C> {
    type Output = MajoranaPolynomial<C>;
    fn mul(self, rhs: Self) -> MajoranaPolynomial<C> {
        self.multiply(rhs)
    }
}

impl<C: Coefficient> Neg for &MajoranaPolynomial<C> {
    type Output = MajoranaPolynomial<C>;
    fn neg(self) -> MajoranaPolynomial<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coefficient> std::iter::Sum for MajoranaPolynomial<C> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, p| &acc + &p)
    }
}

/// Whether `p q - q p` vanishes: exactly for exact carriers, else to within 1e-12.
pub fn commutator_is_zero<C: Coefficient>(p: &MajoranaPolynomial<C>, q: &MajoranaPolynomial<C>) -> bool {
    commutator(p, q).is_zero_within(1e-12)
}

pub fn commutator<C: Coefficient>(p: &MajoranaPolynomial<C>, q: &MajoranaPolynomial<C>) -> MajoranaPolynomial<C> {
    &p.multiply(q) - &q.multiply(p)
}

/// Rational magnitude helper for exact-mode reports.
pub fn exact_is_unit(z: &Exact) -> bool {
    let one = BigRational::one();
    (z.re.abs() == one && z.im.is_zero()) || (z.im.abs() == one && z.re.is_zero())
}
