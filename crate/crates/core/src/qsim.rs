//! Arithmetic-level statevector simulation of the subroutine Ω.
//!
//! Register A is simulated over the `Z_N` basis (dimension `N`) rather than
//! over qubits, and register B is carried as an integer label on each branch.
//! The pipeline is
//!
//! ```text
//! prepare_uniform -> apply_u1 -> measure_m1 -> collapse(1)
//!                 -> apply_u2 -> apply_qft -> measure_m2
//! ```
//!
//! States are immutable values stored sparsely, sorted by `(register_b,
//! index)`.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numtheory::{gcd_u64, jacobi_table, JacobiValue};

/// Norm drift allowed for any pipeline stage.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Probabilities at or below this are floating-point residue of exact zeros.
///
/// Genuine outcome probabilities are at least `1/(N φ(N))`, about `2e-10`
/// for `N = 10^5`; transform round-off on an exact zero is below `1e-28`.
pub const ZERO_PROBABILITY: f64 = 1e-20;

/// Largest dimension the simulator accepts.
pub const MAX_DIMENSION: u64 = 1 << 22;

fn check_modulus(n: u64) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidModulus {
            modulus: n.to_string(),
            reason: "Ω runs on odd N >= 3",
        });
    }
    if n > MAX_DIMENSION {
        return Err(Error::Simulation(format!("dimension {n} exceeds {MAX_DIMENSION}")));
    }
    Ok(())
}

/// One basis branch `amplitude |index⟩_A |register_b⟩_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub index: u64,
    pub register_b: u64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    dimension: u64,
    branches: Vec<Branch>,
    // Set while every amplitude has magnitude 1/√count, which lets
    // measurements report exact rational probabilities.
    uniform_support: Option<u64>,
}

impl Statevector {
    /// Builds a state from arbitrary branches; duplicates are summed and
    /// zero amplitudes dropped. The result is not renormalized.
    pub fn from_branches(dimension: u64, branches: impl IntoIterator<Item = Branch>) -> Result<Self> {
        let mut merged: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
        for b in branches {
            if b.index >= dimension {
                return Err(Error::Simulation(format!(
                    "basis index {} outside dimension {dimension}",
                    b.index
                )));
            }
            *merged.entry((b.register_b, b.index)).or_default() += b.amplitude;
        }
        let branches = merged
            .into_iter()
            .filter(|(_, amp)| amp.norm_sqr() > 0.0)
            .map(|((register_b, index), amplitude)| Branch {
                index,
                register_b,
                amplitude,
            })
            .collect();
        Ok(Statevector {
            dimension,
            branches,
            uniform_support: None,
        })
    }

    /// `|index⟩_A |0⟩_B`.
    pub fn basis(dimension: u64, index: u64) -> Result<Self> {
        Self::from_branches(
            dimension,
            [Branch {
                index,
                register_b: 0,
                amplitude: Complex64::new(1.0, 0.0),
            }],
        )
    }

    /// Dense register-A amplitudes with `register_b = 0`.
    pub fn from_dense(amplitudes: &[Complex64]) -> Result<Self> {
        Self::from_branches(
            amplitudes.len() as u64,
            amplitudes.iter().enumerate().map(|(i, &amplitude)| Branch {
                index: i as u64,
                register_b: 0,
                amplitude,
            }),
        )
    }

    pub fn dimension(&self) -> u64 {
        self.dimension
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn norm_sqr(&self) -> f64 {
        self.branches.iter().map(|b| b.amplitude.norm_sqr()).sum()
    }

    /// Amplitude of `|index⟩|register_b⟩`, zero when absent.
    pub fn amplitude(&self, index: u64, register_b: u64) -> Complex64 {
        self.branches
            .binary_search_by_key(&(register_b, index), |b| (b.register_b, b.index))
            .map(|i| self.branches[i].amplitude)
            .unwrap_or_default()
    }

    /// Dense register-A amplitudes; fails unless every branch carries the
    /// same register-B value.
    pub fn dense_register_a(&self) -> Result<Vec<Complex64>> {
        let mut dense = vec![Complex64::default(); self.dimension as usize];
        let mut label = None;
        for b in &self.branches {
            if *label.get_or_insert(b.register_b) != b.register_b {
                return Err(Error::Simulation(
                    "register A is entangled with register B".into(),
                ));
            }
            dense[b.index as usize] = b.amplitude;
        }
        Ok(dense)
    }

    fn with_branches(&self, branches: Vec<Branch>, uniform_support: Option<u64>) -> Self {
        Statevector {
            dimension: self.dimension,
            branches,
            uniform_support,
        }
    }
}

fn ratio_as_string<S: Serializer>(value: &Option<Ratio<u64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(r) => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub value: u64,
    pub probability: f64,
    #[serde(serialize_with = "ratio_as_string", skip_serializing_if = "Option::is_none")]
    pub exact: Option<Ratio<u64>>,
}

/// Outcome probabilities of a measurement, sorted by value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MeasurementDistribution {
    outcomes: Vec<Outcome>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl MeasurementDistribution {
    fn new(outcomes: Vec<Outcome>) -> Self {
        let cumulative = outcomes
            .iter()
            .scan(0.0, |acc, o| {
                *acc += o.probability;
                Some(*acc)
            })
            .collect();
        MeasurementDistribution {
            outcomes,
            cumulative,
        }
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn probability_of(&self, value: u64) -> f64 {
        self.find(value).map_or(0.0, |o| o.probability)
    }

    pub fn exact_of(&self, value: u64) -> Option<Ratio<u64>> {
        self.find(value).and_then(|o| o.exact)
    }

    fn find(&self, value: u64) -> Option<&Outcome> {
        self.outcomes
            .binary_search_by_key(&value, |o| o.value)
            .ok()
            .map(|i| &self.outcomes[i])
    }

    /// Inverse-CDF draw over the sorted outcome list.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen::<f64>() * self.total();
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.outcomes[i.min(self.outcomes.len() - 1)].value
    }

    /// CSV with columns `value,probability,exact`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["value", "probability", "exact"])?;
        for o in &self.outcomes {
            let exact = o
                .exact
                .map(|r| format!("{}/{}", r.numer(), r.denom()))
                .unwrap_or_default();
            out.write_record([o.value.to_string(), format!("{:.17e}", o.probability), exact])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Steps recorded while Ω runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Prepare { support: u64 },
    ComputeGcd,
    MeasureM1 { outcome: u64 },
    /// Phase kickback step 1: χ(m) written into B, `-1` encoded as `N - 1`.
    ComputeJacobi { plus: u64, minus: u64 },
    /// Step 2: `e^{iπ(χ(m)-1)/2}` applied on the `N - 1` branches.
    ConditionalPhase { flipped: u64 },
    /// Step 3: B returned to 1.
    UncomputeJacobi,
    Qft,
    MeasureM2 { outcome: u64, gcd: u64 },
}

/// `(N-1)^{-1/2} Σ_{m=1}^{N-1} |m⟩|0⟩`.
pub fn prepare_uniform(n: u64) -> Result<Statevector> {
    check_modulus(n)?;
    let amp = Complex64::new(1.0 / ((n - 1) as f64).sqrt(), 0.0);
    let branches = (1..n)
        .map(|index| Branch {
            index,
            register_b: 0,
            amplitude: amp,
        })
        .collect();
    Ok(Statevector {
        dimension: n,
        branches,
        uniform_support: Some(n - 1),
    })
}

/// `|m⟩|0⟩ -> |m⟩|gcd(m, N)⟩`.
pub fn apply_u1(state: &Statevector, n: u64) -> Result<Statevector> {
    if let Some(b) = state.branches.iter().find(|b| b.register_b != 0) {
        return Err(Error::Simulation(format!(
            "U1 expects register B = 0, found {} on |{}⟩",
            b.register_b, b.index
        )));
    }
    // Input is ordered by index, so bucketing by the new label keeps each
    // bucket ordered and avoids a full sort.
    let mut buckets: BTreeMap<u64, Vec<Branch>> = BTreeMap::new();
    for b in &state.branches {
        let g = gcd_u64(b.index, n);
        buckets.entry(g).or_default().push(Branch { register_b: g, ..*b });
    }
    let branches = buckets.into_values().flatten().collect();
    Ok(state.with_branches(branches, state.uniform_support))
}

/// Distribution of register B.
pub fn measure_register_b(state: &Statevector) -> MeasurementDistribution {
    let mut groups: BTreeMap<u64, (f64, u64)> = BTreeMap::new();
    for b in &state.branches {
        let entry = groups.entry(b.register_b).or_default();
        entry.0 += b.amplitude.norm_sqr();
        entry.1 += 1;
    }
    let outcomes = groups
        .into_iter()
        .map(|(value, (probability, count))| Outcome {
            value,
            probability,
            exact: state.uniform_support.map(|support| Ratio::new(count, support)),
        })
        .collect();
    MeasurementDistribution::new(outcomes)
}

/// `M_1`: the distribution of `gcd(m, N)` held in register B.
pub fn measure_m1(state: &Statevector, _n: u64) -> MeasurementDistribution {
    measure_register_b(state)
}

/// Post-measurement state for register B reading `outcome`, renormalized.
pub fn collapse_register_b(state: &Statevector, outcome: u64) -> Result<Statevector> {
    let kept: Vec<Branch> = state
        .branches
        .iter()
        .filter(|b| b.register_b == outcome)
        .copied()
        .collect();
    let weight: f64 = kept.iter().map(|b| b.amplitude.norm_sqr()).sum();
    if weight <= ZERO_PROBABILITY {
        return Err(Error::Simulation(format!(
            "register B outcome {outcome} has zero probability"
        )));
    }
    let scale = 1.0 / weight.sqrt();
    let count = kept.len() as u64;
    let branches = kept
        .into_iter()
        .map(|b| Branch {
            amplitude: b.amplitude * scale,
            ..b
        })
        .collect();
    Ok(state.with_branches(branches, state.uniform_support.map(|_| count)))
}

/// `|m⟩|1⟩ -> χ_N(m) |m⟩|1⟩` by phase kickback through register B.
pub fn apply_u2(state: &Statevector, n: u64, log: &mut Vec<Event>) -> Result<Statevector> {
    let minus_one = n - 1;
    let table = jacobi_table(n)?;
    // Step 1: compute χ(m) into B.
    let mut computed = Vec::with_capacity(state.branches.len());
    let (mut plus, mut minus) = (0, 0);
    for b in &state.branches {
        if b.register_b != 1 {
            return Err(Error::Simulation(format!(
                "U2 expects register B = 1, found {} on |{}⟩",
                b.register_b, b.index
            )));
        }
        let encoded = match table.get(b.index as usize).copied().and_then(JacobiValue::from_i8) {
            Some(JacobiValue::One) => {
                plus += 1;
                1
            }
            Some(JacobiValue::MinusOne) => {
                minus += 1;
                minus_one
            }
            _ => {
                return Err(Error::Simulation(format!(
                    "U2 support contains |{}⟩ with gcd({}, {n}) != 1",
                    b.index, b.index
                )))
            }
        };
        computed.push(Branch {
            register_b: encoded,
            ..*b
        });
    }
    log.push(Event::ComputeJacobi { plus, minus });

    // Step 2: conditional phase e^{iπ(χ-1)/2}, i.e. -1 on the N-1 branches.
    let mut flipped = 0;
    for b in &mut computed {
        if b.register_b == minus_one {
            b.amplitude = -b.amplitude;
            flipped += 1;
        }
    }
    log.push(Event::ConditionalPhase { flipped });

    // Step 3: uncompute χ, restoring B = 1.
    for b in &mut computed {
        b.register_b = 1;
    }
    log.push(Event::UncomputeJacobi);

    Ok(state.with_branches(computed, state.uniform_support))
}

fn transform_groups(
    state: &Statevector,
    transform: impl Fn(&mut Vec<Complex64>),
) -> Statevector {
    let size = state.dimension as usize;
    let mut branches = Vec::new();
    let mut start = 0;
    while start < state.branches.len() {
        let label = state.branches[start].register_b;
        let end = start
            + state.branches[start..]
                .iter()
                .take_while(|b| b.register_b == label)
                .count();
        let mut dense = vec![Complex64::default(); size];
        for b in &state.branches[start..end] {
            dense[b.index as usize] = b.amplitude;
        }
        transform(&mut dense);
        branches.extend(
            dense
                .into_iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > ZERO_PROBABILITY * ZERO_PROBABILITY)
                .map(|(i, amplitude)| Branch {
                    index: i as u64,
                    register_b: label,
                    amplitude,
                }),
        );
        start = end;
    }
    state.with_branches(branches, None)
}

thread_local! {
    // Inner power-of-two plans are shared between sizes, so keeping a planner
    // across calls roughly halves planning cost. It is dropped periodically
    // because it caches every outer plan it builds.
    static PLANNER: RefCell<(FftPlanner<f64>, usize)> = RefCell::new((FftPlanner::new(), 0));
}

const PLANNER_RESET: usize = 16;

fn run_fft(dense: &mut [Complex64], inverse_direction: bool) {
    let fft = PLANNER.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, built) = &mut *guard;
        if *built >= PLANNER_RESET {
            *planner = FftPlanner::new();
            *built = 0;
        }
        *built += 1;
        if inverse_direction {
            planner.plan_fft_inverse(dense.len())
        } else {
            planner.plan_fft_forward(dense.len())
        }
    });
    fft.process(dense);
}

fn fft_in_place(dense: &mut [Complex64], inverse_direction: bool) {
    run_fft(dense, inverse_direction);
    let scale = 1.0 / (dense.len() as f64).sqrt();
    for a in dense.iter_mut() {
        *a *= scale;
    }
}

/// Order-`N` quantum Fourier transform on register A,
/// `|m⟩ -> N^{-1/2} Σ_k e^{2πimk/N} |k⟩`, via a mixed-radix FFT.
pub fn apply_qft(state: &Statevector, n: u64) -> Result<Statevector> {
    check_dimension(state, n)?;
    // rustfft's inverse transform carries the e^{+2πi...} kernel.
    Ok(transform_groups(state, |dense| fft_in_place(dense, true)))
}

/// Inverse of [`apply_qft`].
pub fn apply_inverse_qft(state: &Statevector, n: u64) -> Result<Statevector> {
    check_dimension(state, n)?;
    Ok(transform_groups(state, |dense| fft_in_place(dense, false)))
}

/// [`apply_qft`] by direct `O(N · support)` summation.
pub fn apply_qft_direct(state: &Statevector, n: u64) -> Result<Statevector> {
    check_dimension(state, n)?;
    let roots: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64))
        .collect();
    let scale = 1.0 / (n as f64).sqrt();
    Ok(transform_groups(state, |dense| {
        let support: Vec<(u64, Complex64)> = dense
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, &a)| (i as u64, a))
            .collect();
        for (k, out) in dense.iter_mut().enumerate() {
            let k = k as u64;
            *out = support
                .iter()
                .fold(Complex64::default(), |acc, &(m, a)| acc + a * roots[(m * k % n) as usize])
                * scale;
        }
    }))
}

fn check_dimension(state: &Statevector, n: u64) -> Result<()> {
    if state.dimension != n {
        return Err(Error::Simulation(format!(
            "state has dimension {}, transform order is {n}",
            state.dimension
        )));
    }
    Ok(())
}

/// `M_2`: distribution of register A, marginalized over register B.
pub fn measure_m2(state: &Statevector, _n: u64) -> MeasurementDistribution {
    let mut totals = vec![0.0f64; state.dimension as usize];
    for b in &state.branches {
        totals[b.index as usize] += b.amplitude.norm_sqr();
    }
    let outcomes = totals
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p > ZERO_PROBABILITY)
        .map(|(value, probability)| Outcome {
            value: value as u64,
            probability,
            exact: None,
        })
        .collect();
    MeasurementDistribution::new(outcomes)
}

/// The state `|φ⟩ = φ(N)^{-1/2} Σ_{(m,N)=1} χ(m) |m⟩|1⟩` reached after `M_1 = 1`
/// and `U_2`, with the events that produced it.
pub fn prepare_phi(n: u64, log: &mut Vec<Event>) -> Result<Statevector> {
    let uniform = prepare_uniform(n)?;
    log.push(Event::Prepare { support: n - 1 });
    let gcds = apply_u1(&uniform, n)?;
    log.push(Event::ComputeGcd);
    log.push(Event::MeasureM1 { outcome: 1 });
    let coprime = collapse_register_b(&gcds, 1)?;
    apply_u2(&coprime, n, log)
}

/// Both measurement distributions of Ω for one argument.
#[derive(Debug, Clone)]
pub struct OmegaDistributions {
    pub n: u64,
    pub m1: MeasurementDistribution,
    /// `M_2` conditioned on `M_1 = 1`.
    pub m2: MeasurementDistribution,
}

impl OmegaDistributions {
    /// Runs the pipeline on dense arrays. Produces the same distributions as
    /// the staged functions above without materializing branch lists.
    pub fn compute(n: u64) -> Result<Self> {
        check_modulus(n)?;
        let table = jacobi_table(n)?;
        // χ(m) = 0 exactly when gcd(m, N) > 1, so gcds are only needed there.
        let mut coprime = 0u64;
        let mut shared: BTreeMap<u64, u64> = BTreeMap::new();
        for (m, &chi) in table.iter().enumerate().skip(1) {
            if chi == 0 {
                *shared.entry(gcd_u64(m as u64, n)).or_default() += 1;
            } else {
                coprime += 1;
            }
        }
        let support = n - 1;
        let m1 = MeasurementDistribution::new(
            std::iter::once((1, coprime))
                .chain(shared)
                .map(|(value, count)| Outcome {
                    value,
                    probability: count as f64 / support as f64,
                    exact: Some(Ratio::new(count, support)),
                })
                .collect(),
        );

        let mut dense: Vec<Complex64> = table
            .iter()
            .map(|&chi| Complex64::new(chi as f64, 0.0))
            .collect();
        run_fft(&mut dense, true);
        let scale = 1.0 / (n as f64 * coprime as f64);
        let m2 = MeasurementDistribution::new(
            dense
                .iter()
                .enumerate()
                .map(|(k, a)| (k as u64, a.norm_sqr() * scale))
                .filter(|&(_, p)| p > ZERO_PROBABILITY)
                .map(|(value, probability)| Outcome {
                    value,
                    probability,
                    exact: None,
                })
                .collect(),
        );
        Ok(OmegaDistributions { n, m1, m2 })
    }

    /// [`compute`](Self::compute) through the staged statevector functions.
    pub fn compute_staged(n: u64) -> Result<Self> {
        let after_u1 = apply_u1(&prepare_uniform(n)?, n)?;
        let m1 = measure_m1(&after_u1, n);
        let coprime = collapse_register_b(&after_u1, 1)?;
        let phi = apply_u2(&coprime, n, &mut Vec::new())?;
        let psi = apply_qft(&phi, n)?;
        let m2 = measure_m2(&psi, n);
        Ok(OmegaDistributions { n, m1, m2 })
    }

    /// One seeded run; consumes one draw for `M_1` and, if reached, one for `M_2`.
    pub fn run<R: Rng>(&self, rng: &mut R) -> OmegaResult {
        let m1 = self.m1.sample(rng);
        if m1 != 1 {
            return OmegaResult {
                kind: OutcomeKind::FactorAtM1,
                factor: Some(m1),
                m1_outcome: m1,
                m2_value: None,
            };
        }
        let k0 = self.m2.sample(rng);
        let (kind, factor) = classify_m2(k0, self.n);
        OmegaResult {
            kind,
            factor,
            m1_outcome: 1,
            m2_value: Some(k0),
        }
    }

    /// Every nonzero-probability classification, grouped by `(kind, factor)`.
    pub fn outcome_set(&self) -> OmegaOutcomeSet {
        let mut groups: BTreeMap<(OutcomeKind, u64), OutcomeEntry> = BTreeMap::new();
        let reach_m2 = self.m1.probability_of(1);
        let reach_m2_exact = self.m1.exact_of(1);
        for o in self.m1.outcomes().iter().filter(|o| o.value != 1) {
            let entry = groups
                .entry((OutcomeKind::FactorAtM1, o.value))
                .or_insert_with(|| OutcomeEntry::new(OutcomeKind::FactorAtM1, Some(o.value)));
            entry.probability += o.probability;
            entry.exact = o.exact;
            entry.witnesses.push(o.value);
        }
        for o in self.m2.outcomes() {
            let (kind, factor) = classify_m2(o.value, self.n);
            let entry = groups
                .entry((kind, factor.unwrap_or(1)))
                .or_insert_with(|| OutcomeEntry::new(kind, factor));
            entry.probability += reach_m2 * o.probability;
            entry.witnesses.push(o.value);
        }
        OmegaOutcomeSet {
            n: self.n,
            reach_m2,
            reach_m2_exact,
            entries: groups.into_values().collect(),
        }
    }
}

fn classify_m2(k0: u64, n: u64) -> (OutcomeKind, Option<u64>) {
    match gcd_u64(k0, n) {
        1 => (OutcomeKind::SquareFreeCertificate, None),
        g => (OutcomeKind::FactorAtM2, Some(g)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    FactorAtM1,
    FactorAtM2,
    SquareFreeCertificate,
}

/// Classification of one Ω run, without the recorded distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OmegaResult {
    pub kind: OutcomeKind,
    /// `gcd` found at the deciding measurement; `> 1` and divides `N`.
    pub factor: Option<u64>,
    pub m1_outcome: u64,
    /// Raw `k_0` read at `M_2`.
    pub m2_value: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeEntry {
    pub kind: OutcomeKind,
    pub factor: Option<u64>,
    pub probability: f64,
    #[serde(serialize_with = "ratio_as_string", skip_serializing_if = "Option::is_none")]
    pub exact: Option<Ratio<u64>>,
    /// Measured values (`M_1` gcds or `M_2` readings) in this class.
    pub witnesses: Vec<u64>,
}

impl OutcomeEntry {
    fn new(kind: OutcomeKind, factor: Option<u64>) -> Self {
        OutcomeEntry {
            kind,
            factor,
            probability: 0.0,
            exact: None,
            witnesses: Vec::new(),
        }
    }
}

/// The full outcome distribution of Ω.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaOutcomeSet {
    #[serde(rename = "N")]
    pub n: u64,
    pub reach_m2: f64,
    #[serde(serialize_with = "ratio_as_string", skip_serializing_if = "Option::is_none")]
    pub reach_m2_exact: Option<Ratio<u64>>,
    pub entries: Vec<OutcomeEntry>,
}

impl OmegaOutcomeSet {
    pub fn probability_of(&self, kind: OutcomeKind) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| e.probability)
            .sum()
    }
}

/// JSON event-log trace of a single sampled run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaTrace {
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: u64,
    pub m1_distribution: MeasurementDistribution,
    pub m1_outcome: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2_distribution: Option<MeasurementDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2_outcome: Option<u64>,
    pub classification: OutcomeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<u64>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaMode {
    Sample { seed: u64 },
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum OmegaReport {
    Run(OmegaTrace),
    Distribution(OmegaOutcomeSet),
}

/// Random stream for one run.
pub fn rng_for_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs Ω once (sample mode) or enumerates its outcome distribution.
pub fn omega(n: u64, mode: OmegaMode) -> Result<OmegaReport> {
    check_modulus(n)?;
    match mode {
        OmegaMode::Exhaustive => Ok(OmegaReport::Distribution(
            OmegaDistributions::compute(n)?.outcome_set(),
        )),
        OmegaMode::Sample { seed } => Ok(OmegaReport::Run(sample_omega(n, seed)?)),
    }
}

fn sample_omega(n: u64, seed: u64) -> Result<OmegaTrace> {
    let mut rng = rng_for_seed(seed);
    let mut events = vec![Event::Prepare { support: n - 1 }];
    let after_u1 = apply_u1(&prepare_uniform(n)?, n)?;
    events.push(Event::ComputeGcd);
    let m1_distribution = measure_m1(&after_u1, n);
    let m1_outcome = m1_distribution.sample(&mut rng);
    events.push(Event::MeasureM1 { outcome: m1_outcome });
    if m1_outcome != 1 {
        return Ok(OmegaTrace {
            n,
            seed,
            m1_distribution,
            m1_outcome,
            m2_distribution: None,
            m2_outcome: None,
            classification: OutcomeKind::FactorAtM1,
            factor: Some(m1_outcome),
            events,
        });
    }
    let coprime = collapse_register_b(&after_u1, 1)?;
    let phi = apply_u2(&coprime, n, &mut events)?;
    let psi = apply_qft(&phi, n)?;
    events.push(Event::Qft);
    let m2_distribution = measure_m2(&psi, n);
    let k0 = m2_distribution.sample(&mut rng);
    let (classification, factor) = classify_m2(k0, n);
    events.push(Event::MeasureM2 {
        outcome: k0,
        gcd: gcd_u64(k0, n),
    });
    Ok(OmegaTrace {
        n,
        seed,
        m1_distribution,
        m1_outcome,
        m2_distribution: Some(m2_distribution),
        m2_outcome: Some(k0),
        classification,
        factor,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::GaussSumTable;
    use crate::numtheory::{euler_phi, is_squarefree};

    fn norm_ok(state: &Statevector) -> bool {
        (state.norm_sqr() - 1.0).abs() < NORM_TOLERANCE
    }

    fn phi_state(n: u64) -> Statevector {
        prepare_phi(n, &mut Vec::new()).unwrap()
    }

    #[test]
    fn prepare_uniform_examples() {
        let s3 = prepare_uniform(3).unwrap();
        let half = 1.0 / 2f64.sqrt();
        assert_eq!(s3.branches().len(), 2);
        assert!((s3.amplitude(1, 0).re - half).abs() < 1e-15);
        assert!((s3.amplitude(2, 0).re - half).abs() < 1e-15);
        assert_eq!(s3.amplitude(0, 0), Complex64::default());
        let s45 = prepare_uniform(45).unwrap();
        assert_eq!(s45.branches().len(), 44);
        assert!(norm_ok(&s45));
        let s15 = prepare_uniform(15).unwrap();
        let first = s15.amplitude(1, 0);
        assert!((1..15).all(|m| s15.amplitude(m, 0) == first));
        assert!(prepare_uniform(1).is_err());
        assert!(prepare_uniform(16).is_err());
    }

    #[test]
    fn u1_writes_gcd() {
        let s = apply_u1(&prepare_uniform(45).unwrap(), 45).unwrap();
        assert_ne!(s.amplitude(9, 9), Complex64::default());
        assert_ne!(s.amplitude(2, 1), Complex64::default());
        assert_ne!(s.amplitude(1, 1), Complex64::default());
        assert!(norm_ok(&s));
        assert!(apply_u1(&s, 45).is_err());
    }

    #[test]
    fn m1_probabilities_are_exact_counts() {
        let s = apply_u1(&prepare_uniform(45).unwrap(), 45).unwrap();
        let d = measure_m1(&s, 45);
        assert_eq!(d.exact_of(1), Some(Ratio::new(6, 11)));
        assert_eq!(d.exact_of(9), Some(Ratio::new(4, 44)));
        assert!((d.probability_of(1) - 24.0 / 44.0).abs() < 1e-12);
        assert!((d.total() - 1.0).abs() < 1e-12);
        let s9 = apply_u1(&prepare_uniform(9).unwrap(), 9).unwrap();
        assert_eq!(measure_m1(&s9, 9).exact_of(3), Some(Ratio::new(2, 8)));
    }

    #[test]
    fn m1_differs_from_simplified_printed_formula() {
        // For N = p q^2 the exact coprime mass is φ(N)/(N-1) = (p-1)q(q-1)/(pq^2-1),
        // not (p-1)(q-1)/(pq-1).
        let (p, q) = (5u64, 3u64);
        let n = p * q * q;
        let s = apply_u1(&prepare_uniform(n).unwrap(), n).unwrap();
        let exact = measure_m1(&s, n).exact_of(1).unwrap();
        assert_eq!(exact, Ratio::new((p - 1) * q * (q - 1), n - 1));
        assert_ne!(exact, Ratio::new((p - 1) * (q - 1), p * q - 1));
    }

    #[test]
    fn collapse_keeps_matching_support() {
        let s = apply_u1(&prepare_uniform(45).unwrap(), 45).unwrap();
        let c = collapse_register_b(&s, 9).unwrap();
        let indices: Vec<u64> = c.branches().iter().map(|b| b.index).collect();
        assert_eq!(indices, vec![9, 18, 27, 36]);
        assert!(norm_ok(&c));
        assert!(collapse_register_b(&s, 2).is_err());
        assert_eq!(measure_register_b(&c).exact_of(9), Some(Ratio::new(1, 1)));
    }

    #[test]
    fn u2_signs_and_trace() {
        let s = apply_u1(&prepare_uniform(5).unwrap(), 5).unwrap();
        let c = collapse_register_b(&s, 1).unwrap();
        let mut log = Vec::new();
        let phi = apply_u2(&c, 5, &mut log).unwrap();
        let signs: Vec<f64> = (1..5).map(|m| phi.amplitude(m, 1).re.signum()).collect();
        assert_eq!(signs, vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(
            log,
            vec![
                Event::ComputeJacobi { plus: 2, minus: 2 },
                Event::ConditionalPhase { flipped: 2 },
                Event::UncomputeJacobi
            ]
        );
        let twice = apply_u2(&phi, 5, &mut Vec::new()).unwrap();
        assert_eq!(twice, c);
    }

    #[test]
    fn u2_rejects_non_coprime_support() {
        let s = apply_u1(&prepare_uniform(15).unwrap(), 15).unwrap();
        let c = collapse_register_b(&s, 3).unwrap();
        let relabeled = Statevector::from_branches(
            15,
            c.branches().iter().map(|b| Branch { register_b: 1, ..*b }),
        )
        .unwrap();
        assert!(apply_u2(&relabeled, 15, &mut Vec::new()).is_err());
        let one = collapse_register_b(&s, 1).unwrap();
        let phi = apply_u2(&one, 15, &mut Vec::new()).unwrap();
        assert_eq!(phi.amplitude(1, 1), one.amplitude(1, 1));
    }

    #[test]
    fn qft_of_delta_is_uniform() {
        for n in [3u64, 15, 45, 97] {
            let out = apply_qft(&Statevector::basis(n, 0).unwrap(), n).unwrap();
            let expected = 1.0 / (n as f64).sqrt();
            for k in 0..n {
                assert!((out.amplitude(k, 0) - Complex64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn qft_roundtrip_and_direct_agreement() {
        for n in [3u64, 9, 45, 101, 225] {
            let phi = phi_state(n);
            let fast = apply_qft(&phi, n).unwrap();
            let direct = apply_qft_direct(&phi, n).unwrap();
            for k in 0..n {
                assert!((fast.amplitude(k, 1) - direct.amplitude(k, 1)).norm() < 1e-12);
            }
            let back = apply_inverse_qft(&fast, n).unwrap();
            for m in 0..n {
                assert!((back.amplitude(m, 1) - phi.amplitude(m, 1)).norm() < 1e-12);
            }
            assert!(norm_ok(&fast) && norm_ok(&back));
        }
    }

    #[test]
    fn qft_amplitudes_are_scaled_gauss_sums() {
        for n in [9u64, 15, 45, 75, 105, 147] {
            let psi = apply_qft(&phi_state(n), n).unwrap();
            let table = GaussSumTable::compute(n).unwrap();
            let scale = 1.0 / ((n * euler_phi(n)) as f64).sqrt();
            for k in 0..n {
                assert!((psi.amplitude(k, 1) - table.get(k) * scale).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn m2_examples() {
        let d45 = measure_m2(&apply_qft(&phi_state(45), 45).unwrap(), 45);
        let values: Vec<u64> = d45.outcomes().iter().map(|o| o.value).collect();
        for k in [9u64, 18, 27, 36] {
            assert!((d45.probability_of(k) - 1.0 / 6.0).abs() < 1e-12);
        }
        let square_mass: f64 = [9u64, 18, 27, 36].iter().map(|&k| d45.probability_of(k)).sum();
        assert!((square_mass - 2.0 / 3.0).abs() < 1e-12);
        assert!(values.iter().all(|&k| gcd_u64(k, 45) > 1));

        let d15 = measure_m2(&apply_qft(&phi_state(15), 15).unwrap(), 15);
        let support: Vec<u64> = d15.outcomes().iter().map(|o| o.value).collect();
        let coprime: Vec<u64> = (0..15).filter(|&k| gcd_u64(k, 15) == 1).collect();
        assert_eq!(support, coprime);

        let d9 = measure_m2(&apply_qft(&phi_state(9), 9).unwrap(), 9);
        assert!(d9.outcomes().iter().all(|o| o.value % 3 == 0));
    }

    #[test]
    fn omega_exhaustive_examples() {
        let OmegaReport::Distribution(set) = omega(45, OmegaMode::Exhaustive).unwrap() else {
            panic!("expected distribution");
        };
        assert!((set.probability_of(OutcomeKind::FactorAtM1) - 20.0 / 44.0).abs() < 1e-12);
        assert!((set.probability_of(OutcomeKind::FactorAtM2) - 24.0 / 44.0).abs() < 1e-12);
        assert_eq!(set.probability_of(OutcomeKind::SquareFreeCertificate), 0.0);
        let m1_exact: Ratio<u64> = set
            .entries
            .iter()
            .filter(|e| e.kind == OutcomeKind::FactorAtM1)
            .map(|e| e.exact.unwrap())
            .sum();
        assert_eq!(m1_exact, Ratio::new(20, 44));

        let OmegaReport::Distribution(set) = omega(15, OmegaMode::Exhaustive).unwrap() else {
            panic!("expected distribution");
        };
        assert!((set.probability_of(OutcomeKind::SquareFreeCertificate) - 8.0 / 14.0).abs() < 1e-12);
        for e in &set.entries {
            if let Some(f) = e.factor {
                assert!(f > 1 && 15 % f == 0);
            }
        }
    }

    #[test]
    fn omega_sample_never_certifies_non_squarefree() {
        for seed in 0..200 {
            let OmegaReport::Run(trace) = omega(9, OmegaMode::Sample { seed }).unwrap() else {
                panic!("expected run");
            };
            assert_ne!(trace.classification, OutcomeKind::SquareFreeCertificate);
            let f = trace.factor.unwrap();
            assert!(f > 1 && 9 % f == 0);
        }
    }

    #[test]
    fn omega_sample_is_reproducible() {
        for seed in [0u64, 1, 42, u64::MAX] {
            let a = serde_json::to_string(&omega(105, OmegaMode::Sample { seed }).unwrap()).unwrap();
            let b = serde_json::to_string(&omega(105, OmegaMode::Sample { seed }).unwrap()).unwrap();
            assert_eq!(a, b);
        }
        assert!(omega(10, OmegaMode::Exhaustive).is_err());
        assert!(omega(1, OmegaMode::Exhaustive).is_err());
    }

    #[test]
    fn trace_json_fields() {
        let OmegaReport::Run(trace) = omega(15, OmegaMode::Sample { seed: 3 }).unwrap() else {
            panic!("expected run");
        };
        let value = serde_json::to_value(&trace).unwrap();
        for key in ["N", "seed", "m1_distribution", "m1_outcome", "classification", "events"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn distributions_run_matches_sample_trace() {
        let dists = OmegaDistributions::compute(105).unwrap();
        for seed in 0..50 {
            let OmegaReport::Run(trace) = omega(105, OmegaMode::Sample { seed }).unwrap() else {
                panic!("expected run");
            };
            let run = dists.run(&mut rng_for_seed(seed));
            assert_eq!(run.kind, trace.classification);
            assert_eq!(run.factor, trace.factor);
            assert_eq!(run.m2_value, trace.m2_outcome);
        }
    }

    #[test]
    fn norm_preserved_small_sweep() {
        for n in (3..=301u64).step_by(2) {
            let u = prepare_uniform(n).unwrap();
            let g = apply_u1(&u, n).unwrap();
            let c = collapse_register_b(&g, 1).unwrap();
            let p = apply_u2(&c, n, &mut Vec::new()).unwrap();
            let q = apply_qft(&p, n).unwrap();
            for s in [&u, &g, &c, &p, &q] {
                assert!(norm_ok(s), "N = {n}");
            }
            let d = measure_m2(&q, n);
            let wrong: f64 = d
                .outcomes()
                .iter()
                .filter(|o| (gcd_u64(o.value, n) == 1) != is_squarefree(n))
                .map(|o| o.probability)
                .sum();
            assert!(wrong < 1e-12, "dichotomy at N = {n}");
        }
    }

    #[test]
    fn distribution_csv() {
        let s = apply_u1(&prepare_uniform(9).unwrap(), 9).unwrap();
        let mut buf = Vec::new();
        measure_m1(&s, 9).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("value,probability,exact\n"));
        let row = text.lines().find(|l| l.starts_with("3,")).unwrap();
        assert!(row.ends_with(",1/4"), "{row}");
    }

    #[test]
    fn dense_compute_matches_staged_pipeline() {
        for n in (3..=1501).step_by(2) {
            let lean = OmegaDistributions::compute(n).unwrap();
            let staged = OmegaDistributions::compute_staged(n).unwrap();
            let exact = |d: &MeasurementDistribution| -> Vec<_> {
                d.outcomes().iter().map(|o| (o.value, o.exact)).collect()
            };
            assert_eq!(exact(&lean.m1), exact(&staged.m1), "N = {n}");
            let (a, b) = (lean.m2.outcomes(), staged.m2.outcomes());
            assert_eq!(a.len(), b.len(), "N = {n}");
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.value, y.value);
                assert!((x.probability - y.probability).abs() < 1e-12 * y.probability.max(1e-3), "N = {n}, k = {}", x.value);
            }
        }
    }
}
