//! The register model: singular feedback functions, synchronous stepping and
//! cycle analysis.
//!
//! Bit `i` is updated as `f_i = x_{(i+1) mod n} + g_i`, where `g_i` must not
//! depend on `x_{(i+1) mod n}`. Bit 0 is the output. A Fibonacci register has
//! `g_i = 0` for every bit below `n - 1`.

use std::fmt;

use serde::Serialize;

use crate::anf::{Anf, Monomial};
use crate::error::{Error, Result};

pub const MAX_LEN: usize = 64;

/// Largest `n` for which [`Nlfsr::state_cycles`] enumerates all states.
pub const DEFAULT_CYCLE_LIMIT: usize = 24;

/// Step budget for [`Nlfsr::period`].
pub const DEFAULT_PERIOD_BUDGET: u64 = 1 << 26;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Nlfsr {
    n: usize,
    g: Vec<Anf>,
    // (bit, term masks) for every bit with g_i != 0
    taps: Vec<(usize, Vec<u64>)>,
}

impl Nlfsr {
    /// Validates singularity and index range of the given `g_i`.
    pub fn new(n: usize, g: Vec<Anf>) -> Result<Self> {
        if !(2..=MAX_LEN).contains(&n) {
            return Err(Error::InvalidLength(n));
        }
        if g.len() != n {
            return Err(Error::FunctionCount {
                expected: n,
                got: g.len(),
            });
        }
        for (i, gi) in g.iter().enumerate() {
            if let Some(top) = gi.alpha_max() {
                if top >= n {
                    return Err(Error::InvalidMonomial { index: top, n });
                }
            }
            let tap = (i + 1) % n;
            if gi.depends_on(tap) {
                return Err(Error::Singularity { bit: i, var: tap });
            }
        }
        let taps = g
            .iter()
            .enumerate()
            .filter(|(_, gi)| !gi.is_zero())
            .map(|(i, gi)| (i, gi.terms().map(|m| m.mask()).collect()))
            .collect();
        Ok(Nlfsr { n, g, taps })
    }

    /// Builds a register from full feedback functions `f_i` of the listed
    /// bits; every other bit is a pure shift.
    pub fn from_feedback<I>(n: usize, functions: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Anf)>,
    {
        if !(2..=MAX_LEN).contains(&n) {
            return Err(Error::InvalidLength(n));
        }
        let mut g = vec![Anf::zero(); n];
        for (bit, f) in functions {
            if bit >= n {
                return Err(Error::InvalidMonomial { index: bit, n });
            }
            let mut gi = f;
            gi.toggle(Monomial::var((bit + 1) % n)?);
            g[bit] = gi;
        }
        Self::new(n, g)
    }

    /// A Fibonacci register with feedback `f_{n-1}` on the top bit.
    pub fn fibonacci(n: usize, f_top: Anf) -> Result<Self> {
        Self::from_feedback(n, [(n - 1, f_top)])
    }

    /// The pure rotation register (`g_i = 0` everywhere).
    pub fn pure_shift(n: usize) -> Result<Self> {
        Self::new(n, vec![Anf::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn g(&self, bit: usize) -> &Anf {
        &self.g[bit]
    }

    pub fn gs(&self) -> &[Anf] {
        &self.g
    }

    pub fn into_gs(self) -> Vec<Anf> {
        self.g
    }

    /// The shift tap index `(bit + 1) mod n`.
    pub fn tap(&self, bit: usize) -> usize {
        (bit + 1) % self.n
    }

    /// Full feedback function `f_i = x_{i+1} + g_i`.
    pub fn feedback(&self, bit: usize) -> Anf {
        let mut f = self.g[bit].clone();
        f.toggle(Monomial::var(self.tap(bit)).expect("tap below 64"));
        f
    }

    pub fn is_pure(&self, bit: usize) -> bool {
        self.g[bit].is_zero()
    }

    /// Bits with `g_i != 0`, ascending.
    pub fn nonpure_bits(&self) -> impl DoubleEndedIterator<Item = usize> + '_ {
        self.taps.iter().map(|(i, _)| *i)
    }

    pub fn is_fibonacci(&self) -> bool {
        self.taps.iter().all(|(i, _)| *i == self.n - 1)
    }

    pub fn state_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// One synchronous update on a raw state word (bit `i` of the word is `s_i`).
    pub fn step_bits(&self, s: u64) -> u64 {
        let n = self.n;
        let mut next = (s >> 1) | ((s & 1) << (n - 1));
        for (bit, masks) in &self.taps {
            let parity = masks.iter().filter(|&&m| s & m == m).count() & 1;
            next ^= (parity as u64) << bit;
        }
        next
    }

    pub fn step(&self, s: &State) -> Result<State> {
        self.check_state(s)?;
        Ok(State {
            bits: self.step_bits(s.bits),
            len: self.n,
        })
    }

    /// Bit 0 at times `0..count`.
    pub fn output_sequence(&self, s0: &State, count: usize) -> Result<BitSequence> {
        self.check_state(s0)?;
        let mut s = s0.bits;
        let mut bits = Vec::with_capacity(count);
        for _ in 0..count {
            bits.push(s & 1 == 1);
            s = self.step_bits(s);
        }
        Ok(BitSequence::new(bits))
    }

    pub fn period(&self, s0: &State) -> Result<Period> {
        self.period_with_budget(s0, DEFAULT_PERIOD_BUDGET)
    }

    /// Cycle reached from `s0`: its length, the number of steps before it is
    /// entered, and the period of the output on it.
    ///
    /// Singularity alone does not make the step a bijection, so `s0` may sit
    /// on a tail leading into the cycle.
    pub fn period_with_budget(&self, s0: &State, budget: u64) -> Result<Period> {
        self.check_state(s0)?;
        let over = || Error::ResourceLimit {
            what: "period search",
            limit: budget,
        };
        // Brent's cycle detection
        let mut used = 0u64;
        let (mut power, mut lambda) = (1u64, 1u64);
        let mut tortoise = s0.bits;
        let mut hare = self.step_bits(tortoise);
        while tortoise != hare {
            if power == lambda {
                tortoise = hare;
                power *= 2;
                lambda = 0;
            }
            hare = self.step_bits(hare);
            lambda += 1;
            used += 1;
            if used >= budget {
                return Err(over());
            }
        }
        let mut tortoise = s0.bits;
        let mut hare = s0.bits;
        for _ in 0..lambda {
            hare = self.step_bits(hare);
        }
        let mut preperiod = 0u64;
        while tortoise != hare {
            tortoise = self.step_bits(tortoise);
            hare = self.step_bits(hare);
            preperiod += 1;
            used += 1;
            if used >= budget {
                return Err(over());
            }
        }
        let mut outputs = PackedBits::default();
        let mut s = tortoise;
        for _ in 0..lambda {
            outputs.push(s & 1 == 1);
            s = self.step_bits(s);
        }
        Ok(Period {
            state_period: lambda,
            output_period: outputs.min_cyclic_period() as u64,
            preperiod,
        })
    }

    pub fn state_cycles(&self) -> Result<CycleDecomposition> {
        self.state_cycles_with_limit(DEFAULT_CYCLE_LIMIT)
    }

    /// All cycles of the state graph, each represented by its smallest
    /// state, and the number of states on no cycle.
    pub fn state_cycles_with_limit(&self, limit: usize) -> Result<CycleDecomposition> {
        if self.n > limit {
            return Err(Error::ResourceLimit {
                what: "register length for exhaustive cycle enumeration",
                limit: limit as u64,
            });
        }
        let total = 1u64 << self.n;
        let words = (total as usize).div_ceil(64);
        let mut done = vec![0u64; words];
        let mut on_path = vec![0u64; words];
        let test = |v: &[u64], s: u64| v[(s / 64) as usize] >> (s % 64) & 1 == 1;
        let set = |v: &mut [u64], s: u64| v[(s / 64) as usize] |= 1 << (s % 64);
        let clear = |v: &mut [u64], s: u64| v[(s / 64) as usize] &= !(1 << (s % 64));
        let mut cycles = Vec::new();
        let mut cyclic = 0u64;
        let mut path = Vec::new();
        for start in 0..total {
            if test(&done, start) {
                continue;
            }
            path.clear();
            let mut s = start;
            while !test(&done, s) && !test(&on_path, s) {
                set(&mut on_path, s);
                path.push(s);
                s = self.step_bits(s);
            }
            if test(&on_path, s) {
                // closed a new cycle at s
                let mut length = 1u64;
                let mut rep = s;
                let mut t = self.step_bits(s);
                while t != s {
                    rep = rep.min(t);
                    length += 1;
                    t = self.step_bits(t);
                }
                cyclic += length;
                cycles.push(Cycle {
                    representative: State {
                        bits: rep,
                        len: self.n,
                    },
                    length,
                });
            }
            for &p in &path {
                clear(&mut on_path, p);
                set(&mut done, p);
            }
        }
        cycles.sort_by_key(|c| c.representative.bits);
        Ok(CycleDecomposition {
            n: self.n,
            cycles,
            transient_states: total - cyclic,
        })
    }

    /// Whether every state has exactly one predecessor (exhaustive).
    pub fn is_bijective(&self) -> Result<bool> {
        Ok(self.state_cycles()?.transient_states == 0)
    }

    fn check_state(&self, s: &State) -> Result<()> {
        if s.len != self.n {
            return Err(Error::StateLength {
                expected: self.n,
                got: s.len,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Nlfsr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Nlfsr");
        d.field("n", &self.n);
        for i in self.nonpure_bits().rev() {
            d.field(&format!("f{i}"), &format_args!("{}", self.feedback(i)));
        }
        d.finish()
    }
}

/// Register contents; rendered `s_{n-1} ... s_0` left to right.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    bits: u64,
    len: usize,
}

impl State {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if !(1..=MAX_LEN).contains(&len) {
            return Err(Error::InvalidLength(len));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::InvalidArgument(format!(
                "state 0x{bits:x} does not fit in {len} bits"
            )));
        }
        Ok(State { bits, len })
    }

    pub fn zero(len: usize) -> Self {
        State { bits: 0, len }
    }

    /// Parses `s_{n-1}...s_0` as binary digits (exactly `len` of them) or a
    /// `0x`-prefixed hexadecimal value.
    pub fn parse(text: &str, len: usize) -> Result<Self> {
        let text = text.trim();
        if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
            let bits = u64::from_str_radix(hex, 16)
                .map_err(|e| Error::InvalidArgument(format!("bad hex state {text:?}: {e}")))?;
            return Self::new(bits, len);
        }
        if text.len() != len || !text.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::InvalidArgument(format!(
                "state {text:?} must be {len} binary digits or 0x-prefixed hex"
            )));
        }
        let bits = text
            .bytes()
            .fold(0u64, |acc, b| (acc << 1) | u64::from(b - b'0'));
        Self::new(bits, len)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len).rev() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State({self})")
    }
}

impl Serialize for State {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A finite run of output bits, optionally tagged with a known period.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BitSequence {
    bits: Vec<bool>,
    period: Option<usize>,
}

impl BitSequence {
    pub fn new(bits: Vec<bool>) -> Self {
        BitSequence { bits, period: None }
    }

    pub fn parse(text: &str) -> Result<Self> {
        text.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "unexpected character {other:?} in bit sequence"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Tags the sequence with `period`; the observed bits must repeat with it.
    pub fn with_period(mut self, period: usize) -> Result<Self> {
        if period == 0
            || (self.bits.len() >= period
                && (period..self.bits.len()).any(|i| self.bits[i] != self.bits[i - period]))
        {
            return Err(Error::InvalidArgument(format!(
                "sequence is not periodic with period {period}"
            )));
        }
        self.period = Some(period);
        Ok(self)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Period {
    pub state_period: u64,
    pub output_period: u64,
    /// Steps from the start state to the cycle.
    pub preperiod: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Cycle {
    pub representative: State,
    pub length: u64,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CycleDecomposition {
    pub n: usize,
    pub cycles: Vec<Cycle>,
    /// States that lie on no cycle; zero iff the step is a bijection.
    pub transient_states: u64,
}

impl CycleDecomposition {
    /// Cycle lengths in ascending order.
    pub fn lengths(&self) -> Vec<u64> {
        let mut l: Vec<u64> = self.cycles.iter().map(|c| c.length).collect();
        l.sort_unstable();
        l
    }

    /// States lying on some cycle.
    pub fn cyclic_states(&self) -> u64 {
        self.cycles.iter().map(|c| c.length).sum()
    }

    pub fn longest(&self) -> Option<&Cycle> {
        self.cycles.iter().max_by_key(|c| c.length)
    }
}

/// Growable bit vector used for cyclic output words.
#[derive(Clone, Default, Debug)]
pub(crate) struct PackedBits {
    words: Vec<u64>,
    len: usize,
}

impl PackedBits {
    pub(crate) fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    pub(crate) fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Smallest `p` dividing the length such that the word, read cyclically,
    /// repeats every `p` positions.
    pub(crate) fn min_cyclic_period(&self) -> usize {
        let l = self.len;
        (1..=l)
            .filter(|p| l.is_multiple_of(*p))
            .find(|&p| (0..l - p).all(|i| self.get(i) == self.get(i + p)))
            .unwrap_or(l)
    }
}
