//! Equivalence-preserving transformation of registers by shifting product-terms
//! from one feedback function to a lower one.
//!
//! Shifting `p` from `g_a` to `g_b` (`b < a`) removes `p` from `g_a` and adds
//! `p` with every index lowered by `a - b` (mod n) to `g_b`. A register is
//! uniform when every `g_i` with `i >= tau` only depends on bits `<= tau`,
//! `tau` being the terminal bit. Shifts between uniform registers keep the
//! output sequences.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::anf::{Anf, Monomial};
use crate::error::{Error, Result, ShiftRejection};
use crate::register::Nlfsr;

/// Largest `i` such that every bit below `i` is a pure shift.
pub fn terminal_bit(r: &Nlfsr) -> usize {
    r.nonpure_bits().next().unwrap_or(r.len() - 1)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Uniformity {
    Uniform {
        tau: usize,
    },
    /// `g_bit` depends on `x_var` with `var > tau`.
    NonUniform {
        tau: usize,
        bit: usize,
        var: usize,
    },
}

impl Uniformity {
    pub fn is_uniform(&self) -> bool {
        matches!(self, Uniformity::Uniform { .. })
    }

    pub fn tau(&self) -> usize {
        match *self {
            Uniformity::Uniform { tau } | Uniformity::NonUniform { tau, .. } => tau,
        }
    }
}

/// Checks `alpha_max(g_i) <= tau` for all `i >= tau`. Singularity is
/// guaranteed by [`Nlfsr`] construction.
pub fn is_uniform(r: &Nlfsr) -> Uniformity {
    let tau = terminal_bit(r);
    for bit in tau..r.len() {
        if let Some(var) = r.g(bit).alpha_max().filter(|&v| v > tau) {
            return Uniformity::NonUniform { tau, bit, var };
        }
    }
    Uniformity::Uniform { tau }
}

/// Move of product-term `term` from `g_from` to `g_to`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct ShiftMove {
    pub from: usize,
    pub to: usize,
    #[serde(serialize_with = "serialize_display")]
    pub term: Monomial,
}

fn serialize_display<S: serde::Serializer>(m: &Monomial, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(m)
}

impl ShiftMove {
    pub fn new(from: usize, to: usize, term: Monomial) -> Self {
        ShiftMove { from, to, term }
    }

    pub fn distance(&self) -> usize {
        self.from - self.to
    }
}

impl fmt::Display for ShiftMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: g{} -> g{}", self.term, self.from, self.to)
    }
}

/// How much checking [`apply_shift`] performs before moving a term.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Guard {
    /// Structural validity only (term present, singular result).
    #[default]
    Raw,
    /// Additionally `to >= from - alpha_min(term)`.
    Theorem2,
    /// Only moves known to keep the register uniform and equivalent.
    Lemma3,
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Guard::Raw => "raw",
            Guard::Theorem2 => "theorem2",
            Guard::Lemma3 => "lemma3",
        })
    }
}

impl FromStr for Guard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Guard::Raw),
            "theorem2" => Ok(Guard::Theorem2),
            "lemma3" => Ok(Guard::Lemma3),
            other => Err(Error::InvalidArgument(format!("unknown guard {other:?}"))),
        }
    }
}

/// Which sufficient condition admitted a move.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreservingCase {
    /// Destination at or above the terminal bit.
    AtOrAboveTerminal,
    /// Destination below the terminal bit; everything from it upwards stays
    /// within the new bound.
    BelowTerminal,
}

/// Moves `m.term` without any equivalence reasoning.
fn shift_raw(r: &Nlfsr, m: &ShiftMove) -> Result<Nlfsr, ShiftRejection> {
    let n = r.len();
    for bit in [m.from, m.to] {
        if bit >= n {
            return Err(ShiftRejection::BitOutOfRange { bit });
        }
    }
    if m.to >= m.from {
        return Err(ShiftRejection::NotDownward {
            from: m.from,
            to: m.to,
        });
    }
    if m.term == Monomial::ONE {
        return Err(ShiftRejection::ConstantTerm);
    }
    if !r.g(m.from).contains(&m.term) {
        return Err(ShiftRejection::TermMissing {
            from: m.from,
            term: m.term,
        });
    }
    let shifted = m
        .term
        .shift_down(m.distance(), n)
        .expect("terms of a valid register are below n");
    if r.g(m.to).contains(&shifted) {
        return Err(ShiftRejection::Collision { to: m.to, shifted });
    }
    let tap = r.tap(m.to);
    if shifted.contains(tap) {
        return Err(ShiftRejection::BreaksSingularity {
            to: m.to,
            shifted,
            var: tap,
        });
    }
    let mut g = r.gs().to_vec();
    g[m.from].toggle(m.term);
    g[m.to].toggle(shifted);
    Ok(Nlfsr::new(n, g).expect("singularity checked above"))
}

fn min_index_condition(m: &ShiftMove) -> Result<(), ShiftRejection> {
    let alpha_min = m.term.alpha_min().unwrap_or(0);
    if m.to + alpha_min < m.from {
        return Err(ShiftRejection::MinIndexCondition {
            from: m.from,
            to: m.to,
            alpha_min,
        });
    }
    Ok(())
}

/// Decides whether a single-term move on a uniform register is covered by one
/// of the two equivalence-preserving cases.
pub fn can_shift_preserving(r: &Nlfsr, m: &ShiftMove) -> Result<PreservingCase, ShiftRejection> {
    let tau = match is_uniform(r) {
        Uniformity::Uniform { tau } => tau,
        Uniformity::NonUniform { .. } => return Err(ShiftRejection::SourceNotUniform),
    };
    let shifted = shift_raw(r, m)?;
    min_index_condition(m)?;
    if m.to >= tau {
        debug_assert!(is_uniform(&shifted).is_uniform());
        return Ok(PreservingCase::AtOrAboveTerminal);
    }
    for bit in m.to..r.len() {
        let g = shifted.g(bit);
        let Some(var) = g.alpha_max().filter(|&v| v > m.to) else {
            continue;
        };
        if bit == m.from {
            let term = *g
                .terms()
                .find(|t| t.alpha_max() == Some(var))
                .expect("alpha_max comes from some term");
            return Err(ShiftRejection::StrandedSibling {
                bit,
                term,
                var,
                to: m.to,
            });
        }
        return Err(ShiftRejection::BoundExceeded { bit, var, to: m.to });
    }
    Ok(PreservingCase::BelowTerminal)
}

pub fn apply_shift(r: &Nlfsr, m: &ShiftMove, guard: Guard) -> Result<Nlfsr> {
    match guard {
        Guard::Raw => {}
        Guard::Theorem2 => {
            shift_raw(r, m)?;
            min_index_condition(m)?;
        }
        Guard::Lemma3 => {
            can_shift_preserving(r, m)?;
        }
    }
    Ok(shift_raw(r, m)?)
}

/// Applies `moves` in order with the given guard.
pub fn replay(r: &Nlfsr, moves: &[ShiftMove], guard: Guard) -> Result<Nlfsr> {
    moves
        .iter()
        .try_fold(r.clone(), |acc, m| apply_shift(&acc, m, guard))
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TransformReport {
    pub tau_before: usize,
    pub tau_after: usize,
    /// Terminal bit targeted by the algorithm (0 when there is no
    /// non-linear term).
    pub algorithm_tau: usize,
    pub moves: Vec<ShiftMove>,
    pub uniform_before: bool,
    pub uniform_after: bool,
}

/// Target terminal bit: the widest index span of a non-linear term of `g`.
pub fn fully_shifted_tau(g_top: &Anf) -> usize {
    g_top
        .terms()
        .filter(|p| p.degree() > 1)
        .map(|p| p.alpha_max().unwrap() - p.alpha_min().unwrap())
        .max()
        .unwrap_or(0)
}

/// Transforms a Fibonacci register into the fully shifted Galois register
/// with the same output sequences.
///
/// Every term `p` of `g_{n-1}` moves to `g_{n-1-alpha_min(p)}` when
/// `alpha_min(p) <= n-1-tau`, and to `g_tau` otherwise. The constant term,
/// if any, stays in `g_{n-1}`.
pub fn fully_shift(r: &Nlfsr) -> Result<(Nlfsr, TransformReport)> {
    let n = r.len();
    let tau_before = terminal_bit(r);
    if !r.is_fibonacci() {
        return Err(Error::NotFibonacci {
            tau: tau_before,
            expected: n - 1,
        });
    }
    let top = n - 1;
    let tau = fully_shifted_tau(r.g(top));
    let moves: Vec<ShiftMove> = r
        .g(top)
        .terms()
        .filter(|p| **p != Monomial::ONE)
        .map(|&p| {
            let lo = p.alpha_min().unwrap();
            let to = if lo <= top - tau { top - lo } else { tau };
            ShiftMove::new(top, to, p)
        })
        .collect();
    let out = replay(r, &moves, Guard::Raw)?;
    let report = TransformReport {
        tau_before,
        tau_after: terminal_bit(&out),
        algorithm_tau: tau,
        moves,
        uniform_before: is_uniform(r).is_uniform(),
        uniform_after: is_uniform(&out).is_uniform(),
    };
    Ok((out, report))
}

/// `None` when no single product-term can move to a lower function while
/// keeping the register uniform; otherwise the first such move (lowest source
/// bit, then smallest term, then highest destination).
pub fn fully_shifted_witness(r: &Nlfsr) -> Option<ShiftMove> {
    for from in r.nonpure_bits() {
        for &term in r.g(from).terms().filter(|p| **p != Monomial::ONE) {
            for to in (0..from).rev() {
                let m = ShiftMove::new(from, to, term);
                if let Ok(next) = shift_raw(r, &m) {
                    if is_uniform(&next).is_uniform() {
                        return Some(m);
                    }
                }
            }
        }
    }
    None
}

pub fn is_fully_shifted(r: &Nlfsr) -> bool {
    fully_shifted_witness(r).is_none()
}
