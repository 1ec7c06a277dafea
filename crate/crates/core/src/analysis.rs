//! Structural metrics of a register and statistics of its output.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::Result;
use crate::register::{BitSequence, Nlfsr, State, DEFAULT_PERIOD_BUDGET};

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RegisterMetrics {
    /// Variables read by some feedback connection: the inputs of every `g_i`
    /// together with `x0`, which wraps around into the top bit.
    pub feedback_variables: Vec<usize>,
    pub feedback_variable_count: usize,
    /// Largest number of product-terms of a single `f_i`.
    pub max_terms_per_function: usize,
    /// Largest `|dep(f_i)|`.
    pub max_fanin: usize,
    /// Number of bits with `g_i != 0`.
    pub nonpure_bits: usize,
}

pub fn metrics(r: &Nlfsr) -> RegisterMetrics {
    let mut vars: BTreeSet<usize> = BTreeSet::from([0]);
    let mut max_terms = 0;
    let mut max_fanin = 0;
    for bit in 0..r.len() {
        vars.extend(r.g(bit).dep());
        let f = r.feedback(bit);
        max_terms = max_terms.max(f.len());
        max_fanin = max_fanin.max(f.dep().len());
    }
    RegisterMetrics {
        feedback_variable_count: vars.len(),
        feedback_variables: vars.into_iter().collect(),
        max_terms_per_function: max_terms,
        max_fanin,
        nonpure_bits: r.nonpure_bits().count(),
    }
}

/// Run lengths mapped to how often they occur.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct RunHistogram {
    pub zeros: BTreeMap<usize, usize>,
    pub ones: BTreeMap<usize, usize>,
}

impl RunHistogram {
    pub fn count(&self) -> usize {
        self.zeros.values().chain(self.ones.values()).sum()
    }

    fn of(&self, symbol: bool) -> &BTreeMap<usize, usize> {
        if symbol {
            &self.ones
        } else {
            &self.zeros
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct GolombReport {
    pub period: usize,
    pub ones: usize,
    pub zeros: usize,
    /// Runs of one period read cyclically.
    pub runs: RunHistogram,
    pub run_count: usize,
    pub postulate1_ok: bool,
    pub postulate2_ok: bool,
}

/// Runs of `bits` read as a cyclic word.
fn cyclic_runs(bits: &[bool]) -> RunHistogram {
    let mut hist = RunHistogram::default();
    let p = bits.len();
    if p == 0 {
        return hist;
    }
    let Some(start) = (0..p).find(|&i| bits[i] != bits[(i + p - 1) % p]) else {
        let map = if bits[0] {
            &mut hist.ones
        } else {
            &mut hist.zeros
        };
        map.insert(p, 1);
        return hist;
    };
    let mut len = 0;
    for k in 0..p {
        let b = bits[(start + k) % p];
        len += 1;
        if k + 1 == p || bits[(start + k + 1) % p] != b {
            let map = if b { &mut hist.ones } else { &mut hist.zeros };
            *map.entry(len).or_insert(0) += 1;
            len = 0;
        }
    }
    hist
}

/// Dyadic run distribution: `R = 2^k` runs with `k >= 1`; for every
/// `l < k` exactly `R / 2^(l+1)` runs of zeros and as many runs of ones have
/// length `l`; the two remaining runs, one of each symbol, are at least `k`
/// long.
fn dyadic_runs(hist: &RunHistogram) -> bool {
    let total = hist.count();
    if total < 2 || !total.is_power_of_two() {
        return false;
    }
    let k = total.trailing_zeros() as usize;
    for l in 1..k {
        let want = total >> (l + 1);
        for symbol in [false, true] {
            if hist.of(symbol).get(&l).copied().unwrap_or(0) != want {
                return false;
            }
        }
    }
    [false, true].into_iter().all(|symbol| {
        let long: usize = hist.of(symbol).range(k..).map(|(_, c)| c).sum();
        long == 1
    })
}

/// Balance and run statistics over one period of `seq`. Without a known
/// period the whole sequence is taken as one period.
///
/// Balance requires both symbols and counts differing by at most one, so a
/// constant sequence never passes.
pub fn golomb_check(seq: &BitSequence) -> GolombReport {
    let period = seq.period().unwrap_or(seq.len());
    let bits = &seq.bits()[..period];
    let ones = bits.iter().filter(|&&b| b).count();
    let zeros = period - ones;
    let runs = cyclic_runs(bits);
    GolombReport {
        period,
        ones,
        zeros,
        run_count: runs.count(),
        postulate1_ok: ones > 0 && zeros > 0 && ones.abs_diff(zeros) <= 1,
        postulate2_ok: dyadic_runs(&runs),
        runs,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct PeriodDiagnostic {
    pub state_period: u64,
    pub output_period: u64,
    pub preperiod: u64,
    /// Output period strictly below the state cycle length.
    pub divergent: bool,
    /// Fibonacci registers always have equal output and state periods.
    pub equality_guaranteed: bool,
}

pub fn period_cycle_diagnostic(r: &Nlfsr, s0: &State) -> Result<PeriodDiagnostic> {
    period_cycle_diagnostic_with_budget(r, s0, DEFAULT_PERIOD_BUDGET)
}

pub fn period_cycle_diagnostic_with_budget(
    r: &Nlfsr,
    s0: &State,
    budget: u64,
) -> Result<PeriodDiagnostic> {
    let p = r.period_with_budget(s0, budget)?;
    Ok(PeriodDiagnostic {
        state_period: p.state_period,
        output_period: p.output_period,
        preperiod: p.preperiod,
        divergent: p.output_period < p.state_period,
        equality_guaranteed: r.is_fibonacci(),
    })
}
