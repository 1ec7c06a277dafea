//! Feedback graphs, substitution-based reduction and recurrence derivation.
//!
//! Vertex `v_j` has an incoming edge from `v_i` whenever `x_i` occurs in the
//! full feedback function `f_j`. A vertex with a single predecessor other than
//! itself can be merged into that predecessor. Reduction repeats this until no
//! such vertex is left; when a single vertex remains, the merged equation is a
//! recurrence for that bit over its own delayed values.
//!
//! The structural graph ([`FeedbackGraph`]) decides which substitutions are
//! legal. [`EquationSystem`] performs the same substitutions symbolically on
//! equations over delayed taps `s_j(t - d)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::anf::{Anf, Monomial, Poly, Term, DEFAULT_TERM_CAP};
use crate::error::{Error, Result};
use crate::register::Nlfsr;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FeedbackGraph {
    n: usize,
    preds: BTreeMap<usize, BTreeSet<usize>>,
    // original bits merged into each live vertex
    members: BTreeMap<usize, BTreeSet<usize>>,
}

impl FeedbackGraph {
    pub fn build(r: &Nlfsr) -> Self {
        let n = r.len();
        let preds = (0..n).map(|j| (j, r.feedback(j).dep())).collect();
        let members = (0..n).map(|j| (j, BTreeSet::from([j]))).collect();
        FeedbackGraph { n, preds, members }
    }

    pub fn register_len(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.preds.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.preds.len()
    }

    /// All edges `(from, to)`.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.preds
            .iter()
            .flat_map(|(&to, ps)| ps.iter().map(move |&from| (from, to)))
            .collect()
    }

    pub fn predecessors(&self, v: usize) -> Option<&BTreeSet<usize>> {
        self.preds.get(&v)
    }

    pub fn successors(&self, v: usize) -> BTreeSet<usize> {
        self.preds
            .iter()
            .filter(|(_, ps)| ps.contains(&v))
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.preds.get(&v).map_or(0, BTreeSet::len)
    }

    /// The predecessor of `v` if it is unique and not `v` itself.
    pub fn unique_predecessor(&self, v: usize) -> Option<usize> {
        let ps = self.preds.get(&v)?;
        match ps.iter().next() {
            Some(&j) if ps.len() == 1 && j != v => Some(j),
            _ => None,
        }
    }

    /// Vertices that can currently be substituted, ascending.
    pub fn substitutable(&self) -> Vec<usize> {
        self.vertices()
            .filter(|&v| self.unique_predecessor(v).is_some())
            .collect()
    }

    /// Merges `v` into its unique predecessor and returns that predecessor.
    pub fn substitute(&mut self, v: usize) -> Result<usize> {
        let j = self
            .unique_predecessor(v)
            .ok_or_else(|| Error::SubstitutionPrecondition {
                vertex: v,
                predecessors: self
                    .preds
                    .get(&v)
                    .map(|p| p.iter().copied().collect())
                    .unwrap_or_default(),
            })?;
        self.preds.remove(&v);
        for ps in self.preds.values_mut() {
            if ps.remove(&v) {
                ps.insert(j);
            }
        }
        let merged = self.members.remove(&v).unwrap_or_default();
        self.members.entry(j).or_default().extend(merged);
        Ok(j)
    }

    /// Reduction with the ascending-index convention.
    pub fn reduce(self) -> ReducedGraph {
        self.reduce_by(|candidates| candidates[0])
    }

    /// Reduction where `choose` picks the next vertex among the currently
    /// substitutable ones.
    pub fn reduce_by<F>(mut self, mut choose: F) -> ReducedGraph
    where
        F: FnMut(&[usize]) -> usize,
    {
        let mut steps = Vec::new();
        loop {
            let candidates = self.substitutable();
            if candidates.is_empty() {
                break;
            }
            let v = choose(&candidates);
            let j = self
                .substitute(v)
                .expect("chosen vertex must be substitutable");
            steps.push(Substitution {
                removed: v,
                into: j,
            });
        }
        ReducedGraph { graph: self, steps }
    }
}

/// One applied `sub(v_removed, v_into)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Substitution {
    pub removed: usize,
    pub into: usize,
}

#[derive(Clone, Debug)]
pub struct ReducedGraph {
    graph: FeedbackGraph,
    steps: Vec<Substitution>,
}

/// Reduced graph with vertices identified by the set of original bits merged
/// into them, which does not depend on the substitution order.
pub type QuotientGraph = (
    BTreeSet<BTreeSet<usize>>,
    BTreeSet<(BTreeSet<usize>, BTreeSet<usize>)>,
);

impl ReducedGraph {
    pub fn graph(&self) -> &FeedbackGraph {
        &self.graph
    }

    pub fn steps(&self) -> &[Substitution] {
        &self.steps
    }

    /// The remaining vertex, if reduction ended with exactly one.
    pub fn survivor(&self) -> Option<usize> {
        let mut it = self.graph.vertices();
        match (it.next(), it.next()) {
            (Some(v), None) => Some(v),
            _ => None,
        }
    }

    pub fn quotient(&self) -> QuotientGraph {
        let class = |v: usize| self.graph.members[&v].clone();
        let classes = self.graph.members.values().cloned().collect();
        let edges = self
            .graph
            .edges()
            .into_iter()
            .map(|(a, b)| (class(a), class(b)))
            .collect();
        (classes, edges)
    }
}

/// A delayed tap `s_bit(t - delay)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Tap {
    pub bit: usize,
    pub delay: usize,
}

/// Product of distinct delayed taps, kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct TapTerm(Vec<Tap>);

// degree first, like `Monomial`
impl Ord for TapTerm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for TapTerm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl TapTerm {
    pub fn tap(bit: usize, delay: usize) -> Self {
        TapTerm(vec![Tap { bit, delay }])
    }

    pub fn taps(&self) -> &[Tap] {
        &self.0
    }

    fn delayed(&self, by: usize) -> Self {
        TapTerm(
            self.0
                .iter()
                .map(|t| Tap {
                    bit: t.bit,
                    delay: t.delay + by,
                })
                .collect(),
        )
    }
}

impl Term for TapTerm {
    fn one() -> Self {
        TapTerm(Vec::new())
    }

    fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn product(&self, other: &Self) -> Self {
        let mut v: Vec<Tap> = self.0.iter().chain(&other.0).copied().collect();
        v.sort_unstable();
        v.dedup();
        TapTerm(v)
    }

    fn factors(&self) -> Vec<Self> {
        self.0.iter().map(|&t| TapTerm(vec![t])).collect()
    }
}

impl fmt::Display for TapTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, t) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "s{}(t-{})", t.bit, t.delay)?;
        }
        Ok(())
    }
}

/// An equation right-hand side over delayed taps.
pub type TapPoly = Poly<TapTerm>;

fn delay_poly(p: &TapPoly, by: usize) -> TapPoly {
    p.map_terms(|t| t.delayed(by))
}

fn render_tap_poly(p: &TapPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    p.terms()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" + ")
}

#[derive(Clone, Debug)]
struct RemovedEquation {
    bit: usize,
    rhs: TapPoly,
}

/// The state equations `s_k(t) = ...` of a register, reduced in lockstep
/// with its feedback graph.
#[derive(Clone, Debug)]
pub struct EquationSystem {
    n: usize,
    graph: FeedbackGraph,
    equations: BTreeMap<usize, TapPoly>,
    removed: Vec<RemovedEquation>,
    cap: usize,
}

impl EquationSystem {
    pub fn new(r: &Nlfsr) -> Self {
        Self::with_cap(r, DEFAULT_TERM_CAP)
    }

    pub fn with_cap(r: &Nlfsr, cap: usize) -> Self {
        let n = r.len();
        let equations = (0..n)
            .map(|k| {
                let rhs = r
                    .feedback(k)
                    .terms()
                    .map(|m| TapTerm(m.indices().map(|bit| Tap { bit, delay: 1 }).collect()))
                    .collect();
                (k, rhs)
            })
            .collect();
        EquationSystem {
            n,
            graph: FeedbackGraph::build(r),
            equations,
            removed: Vec::new(),
            cap,
        }
    }

    pub fn graph(&self) -> &FeedbackGraph {
        &self.graph
    }

    pub fn equation(&self, bit: usize) -> Option<&TapPoly> {
        self.equations.get(&bit)
    }

    /// `s_bit(t) = ...` rendered with delayed taps, if the bit is still live.
    pub fn render(&self, bit: usize) -> Option<String> {
        self.equations
            .get(&bit)
            .map(|rhs| format!("s{bit}(t) = {}", render_tap_poly(rhs)))
    }

    /// `sub(v, pred)`: replaces every `s_v(t - d)` in the successors' equations
    /// by the equation of `v` delayed by `d`.
    pub fn substitute_vertex(&mut self, v: usize) -> Result<Substitution> {
        let successors = self.graph.successors(v);
        let into = self.graph.substitute(v)?;
        let rhs = self
            .equations
            .remove(&v)
            .expect("live vertex has an equation");
        for k in successors {
            if k == v {
                continue;
            }
            let eq = &self.equations[&k];
            let updated = eq.substitute_with(
                |factor| {
                    let tap = factor.taps()[0];
                    (tap.bit == v).then(|| delay_poly(&rhs, tap.delay))
                },
                self.cap,
            )?;
            self.equations.insert(k, updated);
        }
        self.removed.push(RemovedEquation { bit: v, rhs });
        Ok(Substitution { removed: v, into })
    }

    /// Substitutes in ascending vertex order until no vertex qualifies.
    pub fn reduce(&mut self) -> Result<Vec<Substitution>> {
        let mut steps = Vec::new();
        while let Some(&v) = self.graph.substitutable().first() {
            steps.push(self.substitute_vertex(v)?);
        }
        Ok(steps)
    }

    pub fn survivor(&self) -> Option<usize> {
        let mut it = self.equations.keys();
        match (it.next(), it.next()) {
            (Some(&v), None) => Some(v),
            _ => None,
        }
    }

    /// Expresses `s_bit(t)` over the live vertices only.
    pub fn expand(&self, bit: usize) -> Result<TapPoly> {
        if bit >= self.n {
            return Err(Error::InvalidMonomial {
                index: bit,
                n: self.n,
            });
        }
        let removed: BTreeMap<usize, &TapPoly> =
            self.removed.iter().map(|r| (r.bit, &r.rhs)).collect();
        let mut expr = TapPoly::from_term(TapTerm::tap(bit, 0));
        // each removed equation refers only to vertices removed later, so
        // this terminates after at most n rounds
        while expr
            .terms()
            .any(|t| t.taps().iter().any(|tap| removed.contains_key(&tap.bit)))
        {
            expr = expr.substitute_with(
                |factor| {
                    let tap = factor.taps()[0];
                    removed.get(&tap.bit).map(|rhs| delay_poly(rhs, tap.delay))
                },
                self.cap,
            )?;
        }
        Ok(expr)
    }

    /// If `s_bit(t) = s_survivor(t - d)` exactly, returns `d`.
    pub fn pure_delay_of_survivor(&self, bit: usize) -> Result<Option<usize>> {
        let Some(survivor) = self.survivor() else {
            return Ok(None);
        };
        let expr = self.expand(bit)?;
        let mut terms = expr.terms();
        Ok(match (terms.next(), terms.next()) {
            (Some(t), None) => match t.taps() {
                [tap] if tap.bit == survivor => Some(tap.delay),
                _ => None,
            },
            _ => None,
        })
    }
}

/// `s(t) = F(s(t-n), ..., s(t-1))` for the sequence of one bit. Variable `x_k`
/// of the ANF stands for `s(t - n + k)`, so a Fibonacci register's recurrence
/// has the same ANF as its top feedback function.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Recurrence {
    pub bit: usize,
    pub order: usize,
    pub anf: Anf,
}

impl Recurrence {
    /// Delays occurring in each term, e.g. `[[4], [3, 1]]`.
    pub fn delays(&self) -> Vec<Vec<usize>> {
        self.anf
            .terms()
            .map(|m| m.indices().map(|k| self.order - k).collect())
            .collect()
    }

    /// Extends `seed` (oldest first, `order` values) to `len` values.
    pub fn generate(&self, seed: &[bool], len: usize) -> Result<Vec<bool>> {
        if seed.len() != self.order {
            return Err(Error::InvalidArgument(format!(
                "recurrence of order {} needs {} seed values, got {}",
                self.order,
                self.order,
                seed.len()
            )));
        }
        let mut out = seed.to_vec();
        while out.len() < len {
            let t = out.len();
            let window = (0..self.order)
                .filter(|&k| out[t - self.order + k])
                .fold(0u64, |acc, k| acc | 1 << k);
            out.push(self.anf.eval(window));
        }
        out.truncate(len);
        Ok(out)
    }
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s(t) = ")?;
        if self.anf.is_zero() {
            return f.write_str("0");
        }
        for (i, m) in self.anf.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.degree() == 0 {
                f.write_str("1")?;
            }
            for k in m.indices() {
                write!(f, "s(t-{})", self.order - k)?;
            }
        }
        Ok(())
    }
}

pub fn build_graph(r: &Nlfsr) -> FeedbackGraph {
    FeedbackGraph::build(r)
}

pub fn reduce_graph(r: &Nlfsr) -> ReducedGraph {
    FeedbackGraph::build(r).reduce()
}

/// Recurrence for the sequence of `bit`, obtained by reducing the feedback
/// graph to a single vertex.
pub fn derive_recurrence(r: &Nlfsr, bit: usize) -> Result<Recurrence> {
    let mut sys = EquationSystem::new(r);
    sys.reduce()?;
    survivor_recurrence(&sys, r.len(), bit)
}

pub(crate) fn survivor_recurrence(
    sys: &EquationSystem,
    n: usize,
    bit: usize,
) -> Result<Recurrence> {
    let survivor = sys.survivor().ok_or_else(|| Error::NotDerivable {
        bit,
        reason: format!(
            "feedback graph reduces to {} vertices",
            sys.graph().vertex_count()
        ),
    })?;
    let rhs = sys.equation(survivor).expect("survivor equation");
    let mut anf = Anf::zero();
    for term in rhs.terms() {
        let mut m = Monomial::ONE;
        for tap in term.taps() {
            debug_assert_eq!(tap.bit, survivor);
            if tap.delay == 0 || tap.delay > n {
                return Err(Error::NotDerivable {
                    bit,
                    reason: format!("delay {} outside 1..={n}", tap.delay),
                });
            }
            m = m.product(&Monomial::var(n - tap.delay)?);
        }
        anf.toggle(m);
    }
    if bit != survivor && sys.pure_delay_of_survivor(bit)?.is_none() {
        return Err(Error::NotDerivable {
            bit,
            reason: format!("bit {bit} is not a pure delay of the reduced vertex v{survivor}"),
        });
    }
    Ok(Recurrence { bit, order: n, anf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn deps(pairs: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn build_graph_fibonacci() {
        let g = build_graph(&fixtures::fib4_nonlinear());
        assert_eq!(
            g.edges(),
            deps(&[(0, 3), (1, 3), (2, 3), (3, 3), (3, 2), (2, 1), (1, 0)])
        );
        assert_eq!(g.in_degree(3), 4);
    }

    #[test]
    fn build_graph_pure_shift_is_a_cycle() {
        let g = build_graph(&Nlfsr::pure_shift(5).unwrap());
        assert_eq!(g.edges(), deps(&[(1, 0), (2, 1), (3, 2), (4, 3), (0, 4)]));
    }

    #[test]
    fn build_graph_galois() {
        let g = build_graph(&fixtures::galois4_same_recurrence());
        assert_eq!(g.predecessors(3).unwrap(), &BTreeSet::from([0, 1, 3]));
        assert_eq!(g.predecessors(0).unwrap(), &BTreeSet::from([1, 2, 3]));
    }

    #[test]
    fn substitution_steps_follow_the_worked_reduction() {
        let mut sys = EquationSystem::new(&fixtures::fib4_nonlinear());
        sys.substitute_vertex(0).unwrap();
        assert_eq!(
            sys.render(3).unwrap(),
            "s3(t) = s1(t-1) + s1(t-2) + s2(t-1) + s1(t-1)*s3(t-1)"
        );
        sys.substitute_vertex(1).unwrap();
        assert_eq!(
            sys.render(3).unwrap(),
            "s3(t) = s2(t-1) + s2(t-2) + s2(t-3) + s2(t-2)*s3(t-1)"
        );
        sys.substitute_vertex(2).unwrap();
        assert_eq!(
            sys.render(3).unwrap(),
            "s3(t) = s3(t-2) + s3(t-3) + s3(t-4) + s3(t-1)*s3(t-3)"
        );
        assert_eq!(sys.survivor(), Some(3));
    }

    #[test]
    fn substitution_requires_unique_predecessor() {
        let mut sys = EquationSystem::new(&fixtures::fib4_nonlinear());
        let err = sys.substitute_vertex(3).unwrap_err();
        assert_eq!(
            err,
            Error::SubstitutionPrecondition {
                vertex: 3,
                predecessors: vec![0, 1, 2, 3]
            }
        );
    }

    #[test]
    fn self_loop_is_not_substitutable() {
        let mut g = build_graph(&Nlfsr::pure_shift(2).unwrap());
        g.substitute(0).unwrap();
        assert_eq!(g.predecessors(1).unwrap(), &BTreeSet::from([1]));
        assert!(g.substitutable().is_empty());
    }

    #[test]
    fn reduce_examples() {
        let red = reduce_graph(&fixtures::fib4_nonlinear());
        assert_eq!(red.survivor(), Some(3));
        let removed: Vec<_> = red.steps().iter().map(|s| (s.removed, s.into)).collect();
        assert_eq!(removed, vec![(0, 1), (1, 2), (2, 3)]);

        assert_eq!(
            reduce_graph(&fixtures::galois4_same_recurrence()).survivor(),
            Some(3)
        );
    }

    #[test]
    fn irreducible_register_keeps_two_vertices() {
        // f3 = x0 + x2*x3, f2 = x3 + x0*x1 + x1: v3 and v2 both keep two or
        // more predecessors once v0 and v1 are merged away
        let r = Nlfsr::from_feedback(
            4,
            [
                (3, Anf::from_index_lists([vec![0], vec![2, 3]]).unwrap()),
                (
                    2,
                    Anf::from_index_lists([vec![3], vec![0, 1], vec![1]]).unwrap(),
                ),
            ],
        )
        .unwrap();
        let red = reduce_graph(&r);
        assert_eq!(red.survivor(), None);
        assert_eq!(red.graph().vertex_count(), 2);
        assert!(matches!(
            derive_recurrence(&r, 3),
            Err(Error::NotDerivable { .. })
        ));
    }

    #[test]
    fn recurrence_examples() {
        let rec = derive_recurrence(&fixtures::fib4_nonlinear(), 3).unwrap();
        assert_eq!(
            rec.to_string(),
            "s(t) = s(t-4) + s(t-3) + s(t-2) + s(t-3)s(t-1)"
        );
        assert_eq!(rec.delays(), vec![vec![4], vec![3], vec![2], vec![3, 1]]);

        let rec2 = derive_recurrence(&fixtures::galois4_same_recurrence(), 3).unwrap();
        assert_eq!(rec2.anf, rec.anf);

        for bit in 0..5 {
            let rec = derive_recurrence(&Nlfsr::pure_shift(5).unwrap(), bit).unwrap();
            assert_eq!(rec.to_string(), "s(t) = s(t-5)");
        }
    }

    #[test]
    fn recurrence_for_delayed_bits() {
        // bits 2 and 1 repeat bit 3; bit 0 is an XOR of three bits
        let r = fixtures::galois4_same_recurrence();
        assert!(derive_recurrence(&r, 2).is_ok());
        assert!(derive_recurrence(&r, 1).is_ok());
        assert!(matches!(
            derive_recurrence(&r, 0),
            Err(Error::NotDerivable { bit: 0, .. })
        ));
    }

    #[test]
    fn recurrence_generate_matches_simulation() {
        let r = fixtures::fib4_nonlinear();
        let rec = derive_recurrence(&r, 3).unwrap();
        let s0 = crate::register::State::parse("0111", 4).unwrap();
        let out = r.output_sequence(&s0, 40).unwrap();
        let predicted = rec.generate(&out.bits()[..4], 40).unwrap();
        assert_eq!(predicted, out.bits());
    }
}
