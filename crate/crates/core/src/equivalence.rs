//! Output equivalence of two registers of the same length.
//!
//! Two registers are treated as equivalent when they generate the same set of
//! output sequences: every initial state of one has a partner state of the
//! other producing the identical output stream.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{survivor_recurrence, EquationSystem};
use crate::register::{Nlfsr, State};
use crate::transform::is_uniform;

/// Largest register length accepted by the exhaustive search.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    ProvenEquivalent,
    WitnessFound,
    NoWitness,
    Inconclusive,
}

impl Status {
    pub fn is_positive(self) -> bool {
        matches!(self, Status::ProvenEquivalent | Status::WitnessFound)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::ProvenEquivalent => "proven-equivalent",
            Status::WitnessFound => "witness-found",
            Status::NoWitness => "no-witness",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Recurrence,
    Exhaustive,
    Window,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Recurrence => "recurrence",
            Method::Exhaustive => "exhaustive",
            Method::Window => "window",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Witness {
    pub left: State,
    pub right: State,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// What one side of a recurrence comparison looked like.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RecurrenceSide {
    pub survivor: usize,
    pub recurrence: String,
    /// Delay from the survivor to the output bit, if the output is a pure
    /// delay of it.
    pub output_delay: Option<usize>,
    pub uniform: bool,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    Identical,
    Recurrences {
        left: RecurrenceSide,
        right: RecurrenceSide,
    },
    Exhaustive {
        horizon: usize,
        /// A state whose output sequence the other register never produces.
        unmatched: Option<(Side, State)>,
    },
    Window {
        window: usize,
        /// First output position where the two registers disagree.
        mismatch: Option<usize>,
    },
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct EquivalenceVerdict {
    pub status: Status,
    pub method: Method,
    pub witness: Option<Witness>,
    pub evidence: Evidence,
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        self.status.is_positive()
    }
}

fn same_len(r1: &Nlfsr, r2: &Nlfsr) -> Result<usize> {
    if r1.len() != r2.len() {
        return Err(Error::LengthMismatch {
            left: r1.len(),
            right: r2.len(),
        });
    }
    Ok(r1.len())
}

fn recurrence_side(r: &Nlfsr) -> Result<(RecurrenceSide, crate::anf::Anf)> {
    let n = r.len();
    let mut sys = EquationSystem::new(r);
    sys.reduce()?;
    let Some(survivor) = sys.survivor() else {
        return Err(Error::NotDerivable {
            bit: 0,
            reason: format!(
                "feedback graph reduces to {} vertices",
                sys.graph().vertex_count()
            ),
        });
    };
    let rec = survivor_recurrence(&sys, n, survivor)?;
    let output_delay = if survivor == 0 {
        Some(0)
    } else {
        sys.pure_delay_of_survivor(0)?
    };
    let side = RecurrenceSide {
        survivor,
        recurrence: rec.to_string(),
        output_delay,
        uniform: is_uniform(r).is_uniform(),
    };
    Ok((side, rec.anf))
}

/// Proves equivalence by comparing the recurrences of the reduced feedback
/// graphs.
///
/// The verdict is proven-equivalent only if both recurrences are equal, the
/// output bit of each register is a pure delay of its surviving vertex and
/// both registers are uniform. Uniformity makes the first `n` output bits
/// determine the state, so each register produces every sequence satisfying
/// the recurrence. Anything short of that is inconclusive.
pub fn prove_equivalent_uniform(r1: &Nlfsr, r2: &Nlfsr) -> Result<EquivalenceVerdict> {
    same_len(r1, r2)?;
    if r1 == r2 {
        return Ok(EquivalenceVerdict {
            status: Status::ProvenEquivalent,
            method: Method::Recurrence,
            witness: None,
            evidence: Evidence::Identical,
        });
    }
    let (left, a1) = recurrence_side(r1)?;
    let (right, a2) = recurrence_side(r2)?;
    let proven = a1 == a2
        && left.output_delay.is_some()
        && right.output_delay.is_some()
        && left.uniform
        && right.uniform;
    Ok(EquivalenceVerdict {
        status: if proven {
            Status::ProvenEquivalent
        } else {
            Status::Inconclusive
        },
        method: Method::Recurrence,
        witness: None,
        evidence: Evidence::Recurrences { left, right },
    })
}

/// Lexicographically least rotation start of `word` (two-pointer scan).
fn least_rotation(word: &[bool]) -> usize {
    let len = word.len();
    let (mut i, mut j, mut k) = (0, 1, 0);
    while i < len && j < len && k < len {
        let a = word[(i + k) % len];
        let b = word[(j + k) % len];
        if a == b {
            k += 1;
            continue;
        }
        if a && !b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

fn min_period(word: &[bool]) -> usize {
    let mut packed = crate::register::PackedBits::default();
    for &b in word {
        packed.push(b);
    }
    packed.min_cyclic_period()
}

/// Every state of a register placed on its cycle, with the output word of
/// each cycle.
struct CycleMap {
    /// `(cycle, position)` for each state.
    place: Vec<(u32, u32)>,
    cycles: Vec<CycleWord>,
}

struct CycleWord {
    states: Vec<u64>,
    /// Output bit of each state along the cycle.
    word: Vec<bool>,
    period: usize,
    /// Start of the least rotation of `word[..period]`.
    canon_offset: usize,
}

impl CycleWord {
    fn canonical(&self) -> Vec<bool> {
        (0..self.period)
            .map(|k| self.word[(self.canon_offset + k) % self.period])
            .collect()
    }

    fn output(&self, pos: usize, t: usize) -> bool {
        self.word[(pos + t) % self.word.len()]
    }
}

impl CycleMap {
    /// `None` if the step is not a bijection.
    fn build(r: &Nlfsr) -> Option<Self> {
        let size = 1usize << r.len();
        let mut place = vec![(u32::MAX, 0u32); size];
        let mut cycles = Vec::new();
        for start in 0..size {
            if place[start].0 != u32::MAX {
                continue;
            }
            let id = cycles.len() as u32;
            let mut states = Vec::new();
            let mut s = start as u64;
            loop {
                place[s as usize] = (id, states.len() as u32);
                states.push(s);
                s = r.step_bits(s);
                if s == start as u64 {
                    break;
                }
                if place[s as usize].0 != u32::MAX {
                    return None;
                }
            }
            let word: Vec<bool> = states.iter().map(|&s| s & 1 == 1).collect();
            let period = min_period(&word);
            let canon_offset = least_rotation(&word[..period]);
            cycles.push(CycleWord {
                states,
                word,
                period,
                canon_offset,
            });
        }
        Some(CycleMap { place, cycles })
    }

    fn locate(&self, s: u64) -> (&CycleWord, usize) {
        let (c, p) = self.place[s as usize];
        (&self.cycles[c as usize], p as usize)
    }

    fn prefix_key(&self, s: u64, len: usize) -> u64 {
        let (c, p) = self.locate(s);
        (0..len).fold(0, |acc, t| acc | (c.output(p, t) as u64) << t)
    }

    fn max_period(&self) -> usize {
        self.cycles.iter().map(|c| c.period).max().unwrap_or(1)
    }
}

/// Finds, for every state of `a`, a state of `b` with the same output over
/// `horizon` steps. Returns the partner of every state or the first state
/// without one.
fn partners(a: &CycleMap, b: &CycleMap, horizon: usize) -> std::result::Result<Vec<u64>, u64> {
    let mut by_canon: HashMap<Vec<bool>, usize> = HashMap::new();
    for (id, c) in b.cycles.iter().enumerate() {
        by_canon.entry(c.canonical()).or_insert(id);
    }
    let key_len = horizon.min(64);
    let mut by_prefix: Option<HashMap<u64, Vec<u64>>> = None;
    let mut out = vec![0u64; a.place.len()];
    for ca in &a.cycles {
        if let Some(&id) = by_canon.get(&ca.canonical()) {
            let cb = &b.cycles[id];
            for (pos, &s) in ca.states.iter().enumerate() {
                let phase = (pos + ca.period - ca.canon_offset) % ca.period;
                out[s as usize] = cb.states[(cb.canon_offset + phase) % cb.period];
            }
            continue;
        }
        // periodic sequences agreeing on p + q bits are identical, so a
        // match below that horizon can only be a truncation artefact
        if horizon >= ca.period + b.max_period() {
            return Err(*ca.states.iter().min().unwrap());
        }
        let index = by_prefix.get_or_insert_with(|| {
            let mut m: HashMap<u64, Vec<u64>> = HashMap::new();
            for s in 0..b.place.len() as u64 {
                m.entry(b.prefix_key(s, key_len)).or_default().push(s);
            }
            m
        });
        let mut unmatched: Option<u64> = None;
        for (pos, &s) in ca.states.iter().enumerate() {
            let found = index
                .get(&a.prefix_key(s, key_len))
                .into_iter()
                .flatten()
                .find(|&&t| {
                    let (cb, pb) = b.locate(t);
                    (key_len..horizon).all(|k| ca.output(pos, k) == cb.output(pb, k))
                });
            match found {
                Some(&t) => out[s as usize] = t,
                None => unmatched = Some(unmatched.map_or(s, |u| u.min(s))),
            }
        }
        if let Some(s) = unmatched {
            return Err(s);
        }
    }
    Ok(out)
}

fn prefix_key(r: &Nlfsr, mut s: u64, len: usize) -> u64 {
    let mut key = 0;
    for t in 0..len {
        key |= (s & 1) << t;
        s = r.step_bits(s);
    }
    key
}

fn agree(r1: &Nlfsr, mut s1: u64, r2: &Nlfsr, mut s2: u64, horizon: usize) -> bool {
    for _ in 0..horizon {
        if (s1 ^ s2) & 1 == 1 {
            return false;
        }
        s1 = r1.step_bits(s1);
        s2 = r2.step_bits(s2);
    }
    true
}

/// State-by-state variant of [`partners`] for registers whose step is not a
/// bijection.
fn partners_by_simulation(
    a: &Nlfsr,
    b: &Nlfsr,
    horizon: usize,
) -> std::result::Result<Vec<u64>, u64> {
    let key_len = horizon.min(64);
    let size = 1u64 << a.len();
    let mut index: HashMap<u64, Vec<u64>> = HashMap::new();
    for t in 0..size {
        index.entry(prefix_key(b, t, key_len)).or_default().push(t);
    }
    (0..size)
        .map(|s| {
            index
                .get(&prefix_key(a, s, key_len))
                .into_iter()
                .flatten()
                .copied()
                .find(|&t| agree(a, s, b, t, horizon))
                .ok_or(s)
        })
        .collect()
}

fn output_varies(r: &Nlfsr, mut s: u64, horizon: usize) -> bool {
    let first = s & 1;
    // the output repeats after at most 2^n steps
    for _ in 0..horizon.min((1usize << r.len()) + 1) {
        if s & 1 != first {
            return true;
        }
        s = r.step_bits(s);
    }
    false
}

pub fn default_horizon(n: usize) -> usize {
    (1usize << n) + 2 * n
}

/// Exhaustive comparison of the output sequences of all initial states, with
/// the default length limit.
pub fn search_equivalent_exhaustive(
    r1: &Nlfsr,
    r2: &Nlfsr,
    horizon: Option<usize>,
) -> Result<EquivalenceVerdict> {
    search_equivalent_exhaustive_with_limit(r1, r2, horizon, DEFAULT_EXHAUSTIVE_LIMIT)
}

/// Every state of either register must have a partner in the other whose
/// output agrees for `horizon` steps (default `2^n + 2n`). The witness pairs
/// the smallest state of `r1` with non-constant output with its partner.
pub fn search_equivalent_exhaustive_with_limit(
    r1: &Nlfsr,
    r2: &Nlfsr,
    horizon: Option<usize>,
    limit: usize,
) -> Result<EquivalenceVerdict> {
    let n = same_len(r1, r2)?;
    if n > limit {
        return Err(Error::ResourceLimit {
            what: "register length for exhaustive search",
            limit: limit as u64,
        });
    }
    let horizon = horizon.unwrap_or_else(|| default_horizon(n));
    let no_witness = |side, s| EquivalenceVerdict {
        status: Status::NoWitness,
        method: Method::Exhaustive,
        witness: None,
        evidence: Evidence::Exhaustive {
            horizon,
            unmatched: Some((side, State::new(s, n).expect("state fits"))),
        },
    };
    let (forward, backward) = match (CycleMap::build(r1), CycleMap::build(r2)) {
        (Some(m1), Some(m2)) => (
            partners(&m1, &m2, horizon),
            partners(&m2, &m1, horizon).map(|_| ()),
        ),
        _ => (
            partners_by_simulation(r1, r2, horizon),
            partners_by_simulation(r2, r1, horizon).map(|_| ()),
        ),
    };
    let forward = match forward {
        Ok(p) => p,
        Err(s) => return Ok(no_witness(Side::Left, s)),
    };
    if let Err(s) = backward {
        return Ok(no_witness(Side::Right, s));
    }
    let left = (0..1u64 << n)
        .find(|&s| output_varies(r1, s, horizon))
        .unwrap_or(0);
    let right = forward[left as usize];
    Ok(EquivalenceVerdict {
        status: Status::WitnessFound,
        method: Method::Exhaustive,
        witness: Some(Witness {
            left: State::new(left, n)?,
            right: State::new(right, n)?,
        }),
        evidence: Evidence::Exhaustive {
            horizon,
            unmatched: None,
        },
    })
}

/// Aligns Fibonacci register `r1` to the output of `r2` started in `s2`.
///
/// The first `n` outputs of `r2` become the state of `r1` (output `i` is
/// state bit `i`), after which both registers run for `window` steps.
pub fn window_check(
    r1: &Nlfsr,
    r2: &Nlfsr,
    s2: &State,
    window: usize,
) -> Result<EquivalenceVerdict> {
    let n = same_len(r1, r2)?;
    if !r1.is_fibonacci() {
        return Err(Error::NotFibonacci {
            tau: crate::transform::terminal_bit(r1),
            expected: n - 1,
        });
    }
    if window < 2 * n {
        return Err(Error::InvalidArgument(format!(
            "window {window} is shorter than 2n = {}",
            2 * n
        )));
    }
    let out2 = r2.output_sequence(s2, window)?;
    let bits1 = out2.bits()[..n]
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i);
    let s1 = State::new(bits1, n)?;
    let out1 = r1.output_sequence(&s1, window)?;
    let mismatch = out1
        .bits()
        .iter()
        .zip(out2.bits())
        .position(|(a, b)| a != b);
    Ok(EquivalenceVerdict {
        status: if mismatch.is_none() {
            Status::WitnessFound
        } else {
            Status::NoWitness
        },
        method: Method::Window,
        witness: mismatch.is_none().then_some(Witness {
            left: s1,
            right: *s2,
        }),
        evidence: Evidence::Window { window, mismatch },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anf::Anf;
    use crate::fixtures;
    use crate::transform::fully_shift;

    fn naive_least_rotation(word: &[bool]) -> Vec<bool> {
        (0..word.len())
            .map(|r| {
                word[r..]
                    .iter()
                    .chain(&word[..r])
                    .copied()
                    .collect::<Vec<_>>()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn least_rotation_matches_naive() {
        for len in 1..=10usize {
            for mask in 0..1u32 << len {
                let word: Vec<bool> = (0..len).map(|i| mask >> i & 1 == 1).collect();
                let r = least_rotation(&word);
                let rotated: Vec<bool> = word[r..].iter().chain(&word[..r]).copied().collect();
                assert_eq!(rotated, naive_least_rotation(&word), "{word:?}");
            }
        }
    }

    #[test]
    fn recurrence_proof_on_32_bit_variants() {
        let fib = fixtures::fib32_cipher();
        for other in [
            fixtures::galois32_fully_shifted(),
            fixtures::galois32_hand_optimized(),
        ] {
            let v = prove_equivalent_uniform(&fib, &other).unwrap();
            assert_eq!(v.status, Status::ProvenEquivalent);
        }
    }

    #[test]
    fn recurrence_proof_reflexive() {
        let r = fixtures::galois4_same_recurrence();
        assert_eq!(
            prove_equivalent_uniform(&r, &r).unwrap().status,
            Status::ProvenEquivalent
        );
    }

    #[test]
    fn same_recurrence_without_uniformity_is_inconclusive() {
        let v = prove_equivalent_uniform(
            &fixtures::fib4_nonlinear(),
            &fixtures::galois4_same_recurrence(),
        )
        .unwrap();
        assert_eq!(v.status, Status::Inconclusive);
        let Evidence::Recurrences { left, right } = v.evidence else {
            panic!("expected recurrences");
        };
        assert_eq!(left.recurrence, right.recurrence);
        assert!(!right.uniform);
    }

    #[test]
    fn exhaustive_examples() {
        let fib = fixtures::fib4_nonlinear();
        let v =
            search_equivalent_exhaustive(&fib, &fixtures::galois4_nonuniform_equivalent(), None)
                .unwrap();
        assert_eq!(v.status, Status::WitnessFound);
        let w = v.witness.unwrap();
        let a = fib.output_sequence(&w.left, 40).unwrap();
        let b = fixtures::galois4_nonuniform_equivalent()
            .output_sequence(&w.right, 40)
            .unwrap();
        assert_eq!(a, b);

        let v =
            search_equivalent_exhaustive(&fib, &fixtures::galois4_same_recurrence(), None).unwrap();
        assert_eq!(v.status, Status::NoWitness);
        assert!(v.witness.is_none());
    }

    #[test]
    fn exhaustive_reflexive_witness() {
        let r = fixtures::fib4_nonlinear();
        let v = search_equivalent_exhaustive(&r, &r, None).unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.left, w.right);
    }

    #[test]
    fn exhaustive_limit() {
        let r = Nlfsr::pure_shift(12).unwrap();
        assert!(matches!(
            search_equivalent_exhaustive_with_limit(&r, &r, None, 10),
            Err(Error::ResourceLimit { limit: 10, .. })
        ));
    }

    #[test]
    fn short_horizon_matches_prefixes() {
        // with a two-step horizon every pair of output prefixes is realised
        // by both registers
        let v = search_equivalent_exhaustive(
            &fixtures::fib4_nonlinear(),
            &fixtures::galois4_same_recurrence(),
            Some(2),
        )
        .unwrap();
        assert_eq!(v.status, Status::WitnessFound);
    }

    #[test]
    fn exhaustive_without_bijection() {
        // g0 = x0, g1 = x1 merges states; its output sequences are 0000..,
        // 1100.., 0100.. and 1000..
        let merging = Nlfsr::new(2, vec![Anf::var(0).unwrap(), Anf::var(1).unwrap()]).unwrap();
        let v = search_equivalent_exhaustive(&merging, &merging, None).unwrap();
        assert_eq!(v.status, Status::WitnessFound);
        let v =
            search_equivalent_exhaustive(&merging, &Nlfsr::pure_shift(2).unwrap(), None).unwrap();
        assert_eq!(v.status, Status::NoWitness);
        // the exact and the simulated path agree on bijective registers
        let (a, b) = (
            fixtures::fib4_nonlinear(),
            fixtures::galois4_nonuniform_equivalent(),
        );
        let h = default_horizon(4);
        let m1 = CycleMap::build(&a).unwrap();
        let m2 = CycleMap::build(&b).unwrap();
        assert!(partners(&m1, &m2, h).is_ok());
        assert!(partners_by_simulation(&a, &b, h).is_ok());
        let c = fixtures::galois4_same_recurrence();
        let m3 = CycleMap::build(&c).unwrap();
        assert_eq!(
            partners(&m1, &m3, h).is_ok(),
            partners_by_simulation(&a, &c, h).is_ok()
        );
    }

    #[test]
    fn window_examples() {
        let fib = fixtures::fib32_cipher();
        let (galois, _) = fully_shift(&fib).unwrap();
        let s2 = State::new(0xdead_beef, 32).unwrap();
        let v = window_check(&fib, &galois, &s2, 10_000).unwrap();
        assert_eq!(v.status, Status::WitnessFound);

        let s2 = State::parse("0111", 4).unwrap();
        let v = window_check(
            &fixtures::fib4_nonlinear(),
            &fixtures::galois4_same_recurrence(),
            &s2,
            32,
        )
        .unwrap();
        assert_eq!(v.status, Status::NoWitness);
        let Evidence::Window { mismatch, .. } = v.evidence else {
            panic!()
        };
        assert!(mismatch.unwrap() >= 4);
    }

    #[test]
    fn window_requires_fibonacci_and_length() {
        let g = fixtures::galois4_same_recurrence();
        let s = State::zero(4);
        assert!(matches!(
            window_check(&g, &g, &s, 16),
            Err(Error::NotFibonacci { .. })
        ));
        let f = fixtures::fib4_nonlinear();
        assert!(matches!(
            window_check(&f, &f, &s, 7),
            Err(Error::InvalidArgument(_))
        ));
    }
}
