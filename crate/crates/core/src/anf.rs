//! Algebraic normal form over GF(2).
//!
//! A [`Poly`] is a canonical XOR of product-terms. The same machinery is used
//! for feedback functions (terms are [`Monomial`]s over register bits) and for
//! the delayed-tap equations built during feedback-graph reduction, which is
//! why the polynomial type is generic over its [`Term`].

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use crate::error::{Error, Result};

/// Default bound on the number of monomials a product or substitution may
/// produce before it is reported as a [`Error::Capacity`] error.
pub const DEFAULT_TERM_CAP: usize = 1 << 20;

/// A product of distinct variables; the empty product is the constant 1.
pub trait Term: Clone + Ord + fmt::Debug {
    fn one() -> Self;

    fn is_one(&self) -> bool;

    /// Product of two terms. Variables are idempotent (`x * x = x`).
    fn product(&self, other: &Self) -> Self;

    /// Split into single-variable terms.
    fn factors(&self) -> Vec<Self>;
}

/// A set of variable indices `0..64` forming one ANF product-term.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(u64);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);
    pub const MAX_VARS: usize = 64;

    pub fn var(index: usize) -> Result<Self> {
        if index >= Self::MAX_VARS {
            return Err(Error::InvalidMonomial {
                index,
                n: Self::MAX_VARS,
            });
        }
        Ok(Monomial(1 << index))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        indices
            .into_iter()
            .try_fold(Monomial::ONE, |acc, i| Ok(acc.product(&Monomial::var(i)?)))
    }

    pub const fn from_mask(mask: u64) -> Self {
        Monomial(mask)
    }

    pub const fn mask(self) -> u64 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        index < Self::MAX_VARS && self.0 >> index & 1 == 1
    }

    /// Variable indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        })
    }

    pub fn alpha_min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn alpha_max(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn without(self, index: usize) -> Self {
        Monomial(self.0 & !(1u64.checked_shl(index as u32).unwrap_or(0)))
    }

    /// Rename every variable `x_i` to `x_{(i - k) mod n}`.
    pub fn shift_down(self, k: usize, n: usize) -> Result<Self> {
        if n == 0 || n > Self::MAX_VARS {
            return Err(Error::InvalidLength(n));
        }
        if let Some(top) = self.alpha_max() {
            if top >= n {
                return Err(Error::InvalidMonomial { index: top, n });
            }
        }
        let k = k % n;
        Ok(
            Monomial::from_indices(self.indices().map(|i| (i + n - k) % n))
                .expect("indices below n"),
        )
    }

    /// Rename every variable `x_i` to `x_{(i + k) mod n}`.
    pub fn shift_up(self, k: usize, n: usize) -> Result<Self> {
        self.shift_down(n - k % n, n)
    }

    pub fn eval(self, assignment: u64) -> bool {
        assignment & self.0 == self.0
    }
}

impl Term for Monomial {
    fn one() -> Self {
        Monomial::ONE
    }

    fn is_one(&self) -> bool {
        self.0 == 0
    }

    fn product(&self, other: &Self) -> Self {
        Monomial(self.0 | other.0)
    }

    fn factors(&self) -> Vec<Self> {
        self.indices().map(|i| Monomial(1 << i)).collect()
    }
}

// Degree first, then lexicographic on the ascending index list.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let diff = self.0 ^ other.0;
            if diff == 0 {
                Ordering::Equal
            } else if self.0 & (diff & diff.wrapping_neg()) != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("1");
        }
        for (k, i) in self.indices().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "x{i}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// XOR of distinct terms. The empty polynomial is the constant 0.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly<T: Term> {
    terms: BTreeSet<T>,
}

/// A Boolean function over register bits in algebraic normal form.
pub type Anf = Poly<Monomial>;

impl<T: Term> Poly<T> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeSet::new(),
        }
    }

    pub fn one() -> Self {
        Self::from_term(T::one())
    }

    pub fn from_term(term: T) -> Self {
        Poly {
            terms: BTreeSet::from([term]),
        }
    }

    /// Builds a polynomial by XOR-accumulating `terms`; repeated terms cancel.
    pub fn from_terms<I: IntoIterator<Item = T>>(terms: I) -> Self {
        let mut p = Self::zero();
        for t in terms {
            p.toggle(t);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = &T> + '_ {
        self.terms.iter()
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().all(Term::is_one)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(Term::is_one)
    }

    pub fn contains(&self, term: &T) -> bool {
        self.terms.contains(term)
    }

    /// Add `term` over GF(2): inserts it, or removes it if already present.
    pub fn toggle(&mut self, term: T) {
        if !self.terms.remove(&term) {
            self.terms.insert(term);
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let terms = self
            .terms
            .symmetric_difference(&other.terms)
            .cloned()
            .collect();
        Poly { terms }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_capped(other, DEFAULT_TERM_CAP)
    }

    pub fn mul_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        let mut out = Self::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.toggle(a.product(b));
                if out.len() > cap {
                    return Err(Error::Capacity { cap });
                }
            }
        }
        Ok(out)
    }

    /// Replace single-variable factors by polynomials. `map` returns `None`
    /// for variables that stay as they are.
    pub fn substitute_with<F>(&self, mut map: F, cap: usize) -> Result<Self>
    where
        F: FnMut(&T) -> Option<Self>,
    {
        let mut out = Self::zero();
        for term in &self.terms {
            let mut rest = T::one();
            let mut expanded = Self::one();
            for factor in term.factors() {
                match map(&factor) {
                    Some(replacement) => expanded = expanded.mul_capped(&replacement, cap)?,
                    None => rest = rest.product(&factor),
                }
            }
            for t in expanded.terms {
                out.toggle(t.product(&rest));
                if out.len() > cap {
                    return Err(Error::Capacity { cap });
                }
            }
        }
        Ok(out)
    }

    /// Apply `f` to every term, XOR-accumulating the images.
    pub fn map_terms<F: FnMut(&T) -> T>(&self, f: F) -> Self {
        Self::from_terms(self.terms.iter().map(f))
    }
}

impl Anf {
    pub fn var(index: usize) -> Result<Self> {
        Ok(Self::from_term(Monomial::var(index)?))
    }

    /// Convenience constructor from index lists, e.g. `[[0], [1, 3]]` for
    /// `x0 + x1*x3`. An empty inner list is the constant term.
    pub fn from_index_lists<I, J>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = J>,
        J: IntoIterator<Item = usize>,
    {
        let monomials = terms
            .into_iter()
            .map(Monomial::from_indices)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_terms(monomials))
    }

    pub fn eval(&self, assignment: u64) -> bool {
        self.terms
            .iter()
            .fold(false, |acc, m| acc ^ m.eval(assignment))
    }

    /// Bitmask of the dependence set. Exact because the ANF is canonical.
    pub fn support(&self) -> u64 {
        self.terms.iter().fold(0, |acc, m| acc | m.mask())
    }

    pub fn dep(&self) -> BTreeSet<usize> {
        Monomial::from_mask(self.support()).indices().collect()
    }

    pub fn depends_on(&self, index: usize) -> bool {
        Monomial::from_mask(self.support()).contains(index)
    }

    /// Smallest index in the dependence set; `None` for constants.
    pub fn alpha_min(&self) -> Option<usize> {
        Monomial::from_mask(self.support()).alpha_min()
    }

    /// Largest index in the dependence set; `None` for constants.
    pub fn alpha_max(&self) -> Option<usize> {
        Monomial::from_mask(self.support()).alpha_max()
    }

    pub fn substitute(&self, index: usize, g: &Anf) -> Result<Self> {
        self.substitute_capped(index, g, DEFAULT_TERM_CAP)
    }

    pub fn substitute_capped(&self, index: usize, g: &Anf, cap: usize) -> Result<Self> {
        if !self.depends_on(index) {
            return Ok(self.clone());
        }
        let target = Monomial::var(index)?;
        self.substitute_with(|v| (*v == target).then(|| g.clone()), cap)
    }

    /// Apply [`Monomial::shift_down`] to every term.
    pub fn shift_down(&self, k: usize, n: usize) -> Result<Self> {
        let shifted = self
            .terms
            .iter()
            .map(|m| m.shift_down(k, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_terms(shifted))
    }
}

impl<T: Term> BitXor for &Poly<T> {
    type Output = Poly<T>;

    fn bitxor(self, rhs: Self) -> Poly<T> {
        self.xor(rhs)
    }
}

impl<T: Term> BitXor for Poly<T> {
    type Output = Poly<T>;

    fn bitxor(self, rhs: Self) -> Poly<T> {
        self.xor(&rhs)
    }
}

impl<T: Term> BitXorAssign<T> for Poly<T> {
    fn bitxor_assign(&mut self, rhs: T) {
        self.toggle(rhs);
    }
}

impl<T: Term> BitXorAssign<&Poly<T>> for Poly<T> {
    fn bitxor_assign(&mut self, rhs: &Poly<T>) {
        for t in &rhs.terms {
            self.toggle(t.clone());
        }
    }
}

impl<T: Term> FromIterator<T> for Poly<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        Self::from_terms(iter)
    }
}

impl fmt::Display for Anf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, m) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl<T: Term> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.terms.iter()).finish()
    }
}
