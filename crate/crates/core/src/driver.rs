//! Recursive square-free decomposition on top of Ω, and the failure-bound
//! calculators.
//!
//! Each call to Ω either certifies its argument square-free, or yields a
//! factor `c`; the argument is then split into `c/d` and `N/(cd)` with
//! `d = gcd(c, N/c)` and `d²` recorded as known square part. With refinement
//! on (the default), an `M_2` gcd that is itself a square `z²` is taken as
//! square part and only `N/z²` is decomposed further.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{out_of_range, Error, Result};
use crate::numtheory::{
    euler_phi, gcd_u64, is_prime_trial, perfect_square_root, strip_even, two_power_decomposition,
    SquareFreeDecomposition,
};
use crate::qsim::{rng_for_seed, OmegaDistributions, OutcomeKind};

/// Odd primes below this are leaves without running Ω.
pub const SMALL_PRIME_LIMIT: u64 = 16;

/// Euler–Mascheroni constant as used by the `φ(N)/N` lower bound.
pub const EULER_GAMMA: f64 = 0.5772156649;

/// `(d, c/d, N/(cd))` with `d = gcd(c, N/c)`.
pub fn split(c: u64, n: u64) -> Result<(u64, u64, u64)> {
    if c <= 1 || c >= n {
        return Err(out_of_range("driver", format!("split needs 1 < c < N, got c = {c}, N = {n}")));
    }
    if n % c != 0 {
        return Err(Error::NotDivisor {
            context: "driver",
            divisor: c,
            value: n,
        });
    }
    let d = gcd_u64(c, n / c);
    Ok((d, c / d, n / (c * d)))
}

/// Decomposition of `a1·a2·d²` from those of `a1` and `a2`.
pub fn combine(left: SquareFreeDecomposition, right: SquareFreeDecomposition, d: u64) -> SquareFreeDecomposition {
    SquareFreeDecomposition {
        r: left.r * right.r,
        s: left.s * right.s * d,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum DecomposeMode {
    /// One seeded path through the recursion.
    Sample { seed: u64 },
    /// Every nonzero-probability outcome at every node is followed and must
    /// agree; the reported trace follows the most likely outcome.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecomposeOptions {
    pub mode: DecomposeMode,
    /// Stop a branch on a square `M_2` gcd instead of splitting on it.
    pub refine: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            mode: DecomposeMode::Sample { seed: 0 },
            refine: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeOutcome {
    /// Argument 1.
    Trivial,
    /// Odd prime below [`SMALL_PRIME_LIMIT`].
    SmallPrime,
    Certificate,
    FactorAtM1,
    FactorAtM2,
    /// `M_2` gcd was a square `z²`.
    SquarePart,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceNode {
    pub id: usize,
    pub argument: u64,
    pub outcome: NodeOutcome,
    /// Divisor returned by Ω (the gcd at `M_1` or `M_2`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<u64>,
    /// Divisor actually split on; differs from `factor` only when the plain
    /// recursion meets `gcd = N` and falls back to `√N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_on: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    /// `z` of a [`NodeOutcome::SquarePart`] node.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub square_root: Option<u64>,
    /// Probability of this node's outcome class, in exhaustive mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    pub children: Vec<usize>,
    pub r: u64,
    pub s: u64,
    /// Ω rounds until this subtree is finished; see [`rounds_to_finish`].
    pub rounds: u32,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionTrace {
    #[serde(rename = "N")]
    pub n: u64,
    pub two_exponent: u32,
    pub r: u64,
    pub s: u64,
    #[serde(flatten)]
    pub mode: DecomposeMode,
    pub refine: bool,
    /// Distinct `(argument, outcome class)` pairs checked in exhaustive mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branches_checked: Option<usize>,
    /// Node 0 is the root (the odd part of `N`); children follow parents.
    pub nodes: Vec<TraceNode>,
}

impl DecompositionTrace {
    pub fn root(&self) -> &TraceNode {
        &self.nodes[0]
    }

    pub fn depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

/// Iteration steps (levels of parallel Ω calls) until every branch has
/// obtained the square part of its argument. A certificate or square `M_2`
/// gcd finishes a branch in one step; a split costs one step plus the slower
/// child. Small primes count one step, the step Ω would certainly take.
pub fn rounds_to_finish(trace: &DecompositionTrace) -> u32 {
    trace.root().rounds
}

#[derive(Debug, Clone, Copy)]
struct Class {
    kind: OutcomeKind,
    factor: Option<u64>,
    probability: f64,
}

#[derive(Debug, Clone)]
struct Summary {
    result: SquareFreeDecomposition,
    classes: Vec<Class>,
}

/// Holds per-argument caches so that repeated runs share Ω distributions.
#[derive(Default)]
pub struct Decomposer {
    distributions: HashMap<u64, Arc<OmegaDistributions>>,
    summaries: HashMap<(u64, bool), Summary>,
    branches: usize,
}

enum Step {
    Leaf(NodeOutcome),
    Split {
        outcome: NodeOutcome,
        factor: u64,
        c: u64,
    },
    Square {
        factor: u64,
        z: u64,
    },
}

fn step_for(kind: OutcomeKind, factor: Option<u64>, arg: u64, refine: bool) -> Result<Step> {
    match (kind, factor) {
        (OutcomeKind::SquareFreeCertificate, _) => Ok(Step::Leaf(NodeOutcome::Certificate)),
        (OutcomeKind::FactorAtM1, Some(g)) => Ok(Step::Split {
            outcome: NodeOutcome::FactorAtM1,
            factor: g,
            c: g,
        }),
        (OutcomeKind::FactorAtM2, Some(g)) => {
            if refine {
                if let Some(z) = perfect_square_root(g) {
                    return Ok(Step::Square { factor: g, z });
                }
            }
            let c = if g == arg {
                // Only k_0 = 0 reaches gcd = N, which needs N to be a square.
                perfect_square_root(arg).ok_or_else(|| {
                    Error::Driver(format!("M2 returned gcd = N = {arg} for a non-square argument"))
                })?
            } else {
                g
            };
            Ok(Step::Split {
                outcome: NodeOutcome::FactorAtM2,
                factor: g,
                c,
            })
        }
        _ => Err(Error::Driver(format!("Ω outcome {kind:?} carries no factor"))),
    }
}

fn short_circuit(arg: u64) -> Option<NodeOutcome> {
    if arg == 1 {
        Some(NodeOutcome::Trivial)
    } else if arg < SMALL_PRIME_LIMIT && is_prime_trial(arg) {
        Some(NodeOutcome::SmallPrime)
    } else {
        None
    }
}

struct Builder<'a> {
    nodes: Vec<TraceNode>,
    decomposer: &'a mut Decomposer,
    refine: bool,
}

impl Builder<'_> {
    fn push(&mut self, argument: u64, outcome: NodeOutcome, depth: u32) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TraceNode {
            id,
            argument,
            outcome,
            factor: None,
            split_on: None,
            d: None,
            square_root: None,
            probability: None,
            children: Vec::new(),
            r: argument,
            s: 1,
            rounds: 0,
            depth,
        });
        id
    }

    fn leaf(&mut self, arg: u64, outcome: NodeOutcome, depth: u32) -> usize {
        let id = self.push(arg, outcome, depth);
        self.nodes[id].rounds = u32::from(outcome != NodeOutcome::Trivial);
        id
    }

    /// Expands `step` at a fresh node; `child` recurses on sub-arguments.
    fn expand(
        &mut self,
        arg: u64,
        step: Step,
        depth: u32,
        child: &mut dyn FnMut(&mut Self, u64, usize) -> Result<usize>,
    ) -> Result<usize> {
        match step {
            Step::Leaf(outcome) => Ok(self.leaf(arg, outcome, depth)),
            Step::Square { factor, z } => {
                let id = self.push(arg, NodeOutcome::SquarePart, depth);
                let rest = child(self, arg / (z * z), 0)?;
                let (r, s) = (self.nodes[rest].r, self.nodes[rest].s);
                let node = &mut self.nodes[id];
                node.factor = Some(factor);
                node.square_root = Some(z);
                node.children = vec![rest];
                node.r = r;
                node.s = s * z;
                node.rounds = 1;
                Ok(id)
            }
            Step::Split { outcome, factor, c } => {
                let (d, a1, a2) = split(c, arg)?;
                let id = self.push(arg, outcome, depth);
                let left = child(self, a1, 0)?;
                let right = child(self, a2, 1)?;
                let result = combine(self.result(left), self.result(right), d);
                let rounds = 1 + self.nodes[left].rounds.max(self.nodes[right].rounds);
                let node = &mut self.nodes[id];
                node.factor = Some(factor);
                node.split_on = (c != factor).then_some(c);
                node.d = Some(d);
                node.children = vec![left, right];
                node.r = result.r;
                node.s = result.s;
                node.rounds = rounds;
                Ok(id)
            }
        }
    }

    fn result(&self, id: usize) -> SquareFreeDecomposition {
        SquareFreeDecomposition {
            r: self.nodes[id].r,
            s: self.nodes[id].s,
        }
    }

    fn sampled(&mut self, arg: u64, seed: u64, depth: u32) -> Result<usize> {
        if let Some(outcome) = short_circuit(arg) {
            return Ok(self.leaf(arg, outcome, depth));
        }
        let dist = self.decomposer.distributions(arg)?;
        let mut rng = rng_for_seed(seed);
        let run = dist.run(&mut rng);
        let seeds: [u64; 2] = [rng.gen(), rng.gen()];
        let step = step_for(run.kind, run.factor, arg, self.refine)?;
        self.expand(arg, step, depth, &mut |b, a, branch| b.sampled(a, seeds[branch], depth + 1))
    }

    fn most_likely(&mut self, arg: u64, depth: u32) -> Result<usize> {
        if let Some(outcome) = short_circuit(arg) {
            return Ok(self.leaf(arg, outcome, depth));
        }
        let summary = self.decomposer.summary(arg, self.refine)?;
        let best = summary
            .classes
            .iter()
            .copied()
            .fold(None::<Class>, |best, c| match best {
                Some(b) if b.probability >= c.probability => Some(b),
                _ => Some(c),
            })
            .ok_or_else(|| Error::Driver(format!("Ω on {arg} has no outcomes")))?;
        let step = step_for(best.kind, best.factor, arg, self.refine)?;
        let id = self.expand(arg, step, depth, &mut |b, a, _| b.most_likely(a, depth + 1))?;
        self.nodes[id].probability = Some(best.probability);
        Ok(id)
    }
}

impl Decomposer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops cached distributions; exhaustive results are kept.
    pub fn clear_distributions(&mut self) {
        self.distributions.clear();
    }

    fn distributions(&mut self, arg: u64) -> Result<Arc<OmegaDistributions>> {
        if let Some(d) = self.distributions.get(&arg) {
            return Ok(d.clone());
        }
        let d = Arc::new(OmegaDistributions::compute(arg)?);
        self.distributions.insert(arg, d.clone());
        Ok(d)
    }

    /// Follows every outcome class of Ω on `arg` and checks that all lead
    /// to the same decomposition.
    fn summary(&mut self, arg: u64, refine: bool) -> Result<Summary> {
        if let Some(s) = self.summaries.get(&(arg, refine)) {
            return Ok(s.clone());
        }
        let classes: Vec<Class> = OmegaDistributions::compute(arg)?
            .outcome_set()
            .entries
            .iter()
            .map(|e| Class {
                kind: e.kind,
                factor: e.factor,
                probability: e.probability,
            })
            .collect();
        let mut agreed: Option<SquareFreeDecomposition> = None;
        for class in &classes {
            self.branches += 1;
            let result = match step_for(class.kind, class.factor, arg, refine)? {
                Step::Leaf(_) => SquareFreeDecomposition { r: arg, s: 1 },
                Step::Square { z, .. } => {
                    let rest = self.all_traces(arg / (z * z), refine)?;
                    SquareFreeDecomposition {
                        r: rest.r,
                        s: rest.s * z,
                    }
                }
                Step::Split { c, .. } => {
                    let (d, a1, a2) = split(c, arg)?;
                    combine(self.all_traces(a1, refine)?, self.all_traces(a2, refine)?, d)
                }
            };
            match agreed {
                Some(prev) if prev != result => {
                    return Err(Error::Driver(format!(
                        "traces of {arg} disagree: ({}, {}) vs ({}, {})",
                        prev.r, prev.s, result.r, result.s
                    )))
                }
                _ => agreed = Some(result),
            }
        }
        let summary = Summary {
            result: agreed.ok_or_else(|| Error::Driver(format!("Ω on {arg} has no outcomes")))?,
            classes,
        };
        self.summaries.insert((arg, refine), summary.clone());
        Ok(summary)
    }

    /// Decomposition of an odd argument reached by every trace.
    fn all_traces(&mut self, arg: u64, refine: bool) -> Result<SquareFreeDecomposition> {
        if short_circuit(arg).is_some() {
            return Ok(SquareFreeDecomposition { r: arg, s: 1 });
        }
        Ok(self.summary(arg, refine)?.result)
    }

    /// Decomposition of `n` after checking every nonzero-probability trace;
    /// cheaper than [`decompose`](Self::decompose) in exhaustive mode as no
    /// trace is assembled.
    pub fn verify_all_traces(&mut self, n: u64, refine: bool) -> Result<SquareFreeDecomposition> {
        let (odd, e) = strip_even(n)?;
        let odd_part = self.all_traces(odd, refine)?;
        Ok(combine(odd_part, two_power_decomposition(e), 1))
    }

    pub fn decompose(&mut self, n: u64, options: DecomposeOptions) -> Result<DecompositionTrace> {
        let (odd, e) = strip_even(n)?;
        let branches_before = self.branches;
        let mut builder = Builder {
            nodes: Vec::new(),
            decomposer: self,
            refine: options.refine,
        };
        let branches_checked = match options.mode {
            DecomposeMode::Sample { seed } => {
                builder.sampled(odd, seed, 0)?;
                None
            }
            DecomposeMode::Exhaustive => {
                builder.decomposer.all_traces(odd, options.refine)?;
                builder.most_likely(odd, 0)?;
                Some(builder.decomposer.branches - branches_before)
            }
        };
        let nodes = builder.nodes;
        let result = combine(
            SquareFreeDecomposition {
                r: nodes[0].r,
                s: nodes[0].s,
            },
            two_power_decomposition(e),
            1,
        );
        Ok(DecompositionTrace {
            n,
            two_exponent: e,
            r: result.r,
            s: result.s,
            mode: options.mode,
            refine: options.refine,
            branches_checked,
            nodes,
        })
    }
}

/// One-shot [`Decomposer::decompose`].
pub fn decompose(n: u64, options: DecomposeOptions) -> Result<(SquareFreeDecomposition, DecompositionTrace)> {
    let trace = Decomposer::new().decompose(n, options)?;
    Ok((
        SquareFreeDecomposition {
            r: trace.r,
            s: trace.s,
        },
        trace,
    ))
}

/// `1/(e^γ ln ln N + 3/ln ln N)`, a lower bound on `φ(N)/N` for `N >= 3`.
pub fn phi_lower_bound(n: u64) -> Result<f64> {
    if n < 3 {
        return Err(out_of_range("driver", format!("φ lower bound needs N >= 3, got {n}")));
    }
    let ll = (n as f64).ln().ln();
    Ok(1.0 / (EULER_GAMMA.exp() * ll + 3.0 / ll))
}

/// Smallest `N` for which the `1/(2 ln ln N)` form is reported.
pub const PRINTED_BOUND_MIN: u64 = 17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub k: u32,
    /// `(φ(N)/N)²`.
    pub p_lower: f64,
    /// `(1 - p_lower)^k`.
    #[serde(rename = "Q_exact")]
    pub q_exact: f64,
    /// `(1 - (1/(2 ln ln N))²)^k`, for `N >= 17`.
    #[serde(rename = "Q_printed")]
    pub q_printed: Option<f64>,
}

impl BoundReport {
    /// The tighter of the two reported bounds.
    pub fn q_upper(&self) -> f64 {
        self.q_exact
    }
}

/// Probability bounds that the recursion is unfinished after `k` steps.
pub fn iteration_bound(n: u64, k: u32) -> Result<BoundReport> {
    if n < 3 {
        return Err(out_of_range("driver", format!("iteration bound needs N >= 3, got {n}")));
    }
    let ratio = euler_phi(n) as f64 / n as f64;
    let p_lower = ratio * ratio;
    let q_printed = (n >= PRINTED_BOUND_MIN).then(|| {
        let x = 1.0 / (2.0 * (n as f64).ln().ln());
        (1.0 - x * x).powi(k as i32)
    });
    Ok(BoundReport {
        n,
        k,
        p_lower,
        q_exact: (1.0 - p_lower).powi(k as i32),
        q_printed,
    })
}

/// CSV with columns `N,k,p_lower,Q_exact,Q_printed`; `Q_printed` is empty
/// below [`PRINTED_BOUND_MIN`].
pub fn write_bounds_csv<W: Write>(reports: &[BoundReport], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["N", "k", "p_lower", "Q_exact", "Q_printed"])?;
    for r in reports {
        out.write_record([
            r.n.to_string(),
            r.k.to_string(),
            format!("{:.6}", r.p_lower),
            format!("{:.6}", r.q_exact),
            r.q_printed.map(|q| format!("{q:.6}")).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
