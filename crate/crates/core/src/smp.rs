//! Simultaneous-message-passing protocols for the equality function.
//!
//! Alice holds `x`, Bob holds `y`; each sends one message to a referee who
//! must decide whether `x = y`. Three protocols are simulated:
//!
//! * classical: each party reveals codeword bits at random positions;
//! * quantum: each party sends `k` copies of its fingerprint and the referee
//!   runs `k` SWAP tests;
//! * classical simulation of the quantum protocol: each party sends a
//!   fixed-point description of its fingerprint.
//!
//! Every trial draws from its own generator derived from
//! `(master_seed, trial_index)`, and results are summed with integers, so
//! reports do not depend on thread scheduling.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::codes::{CodeSpec, LinearCode};
use crate::error::{Error, Result};
use crate::fingerprint::{
    build_fingerprint, description_length_bits, fingerprint_qubits, index_qubits, quantize_state,
    QuantizedDescription,
};
use crate::quantum::{inner_product, swap_test, MAX_QUBITS};
use crate::rng::{rng_from_seed, splitmix64, trial_seed};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.5758293035489;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Bits(BitString),
    /// Quantum register sent by reference; only its size is accounted.
    Qubits {
        count: usize,
        label: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Message {
    pub party: Party,
    pub payload: Payload,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    Equal,
    NotEqual,
    Restart,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub classical_bits: usize,
    pub qubits: usize,
    pub decision: Decision,
    pub rounds: usize,
    /// SWAP-test ancilla outcomes, in order, for protocols that run them.
    pub swap_outcomes: Vec<u8>,
}

impl Transcript {
    fn new(messages: Vec<Message>, decision: Decision, swap_outcomes: Vec<u8>) -> Self {
        let (classical_bits, qubits) = Self::count(&messages);
        Transcript {
            messages,
            classical_bits,
            qubits,
            decision,
            rounds: 1,
            swap_outcomes,
        }
    }

    /// Bits and qubits recomputed from the message payloads.
    pub fn count(messages: &[Message]) -> (usize, usize) {
        messages.iter().fold((0, 0), |(b, q), m| match &m.payload {
            Payload::Bits(bits) => (b + bits.len(), q),
            Payload::Qubits { count, .. } => (b, q + count),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassicalVariant {
    SingleIndex,
    MultiIndex { s: usize },
}

/// Indices per party so that two independent uniform `s`-subsets of `m`
/// positions miss each other with probability at most `δ/2`:
/// `ceil(sqrt(m · ln(2/δ)))`, capped at `m`.
pub fn multi_index_count(m: usize, delta_target: f64) -> Result<usize> {
    if !(delta_target > 0.0 && delta_target < 1.0) {
        return Err(Error::input(format!(
            "target failure probability must lie in (0, 1), got {delta_target}"
        )));
    }
    let s = ((m as f64) * (2.0 / delta_target).ln()).sqrt().ceil() as usize;
    Ok(s.clamp(1, m))
}

fn index_bits(m: usize) -> usize {
    index_qubits(m)
}

/// Classical protocol: each party reveals `(index, E_index(input))` pairs at
/// positions drawn from its own private randomness.
pub fn run_classical_equality(
    x: &BitString,
    y: &BitString,
    code: &LinearCode,
    variant: ClassicalVariant,
    seed: u64,
) -> Result<Transcript> {
    let ex = code.encode(x)?;
    let ey = code.encode(y)?;
    let m = code.m();
    let s = match variant {
        ClassicalVariant::SingleIndex => 1,
        ClassicalVariant::MultiIndex { s } if (1..=m).contains(&s) => s,
        ClassicalVariant::MultiIndex { s } => {
            return Err(Error::input(format!(
                "index count s = {s} must lie in 1..={m}"
            )));
        }
    };
    let mut rng = rng_from_seed(seed);
    let mut draw = || -> Vec<usize> {
        if s == 1 {
            vec![rng.random_range(0..m)]
        } else {
            let mut v = sample(&mut rng, m, s).into_vec();
            v.sort_unstable();
            v
        }
    };
    let alice = draw();
    let bob = draw();
    let width = index_bits(m);
    let payload = |positions: &[usize], word: &BitString| {
        let mut b = BitString::with_capacity(positions.len() * (width + 1));
        for &i in positions {
            b.push_bits(i as u64, width);
            b.push(word.get(i));
        }
        Payload::Bits(b)
    };
    let messages = vec![
        Message {
            party: Party::Alice,
            payload: payload(&alice, &ex),
        },
        Message {
            party: Party::Bob,
            payload: payload(&bob, &ey),
        },
    ];
    let collisions: Vec<usize> = alice
        .iter()
        .copied()
        .filter(|i| bob.binary_search(i).is_ok())
        .collect();
    let decision = if collisions.is_empty() {
        Decision::Restart
    } else if collisions.iter().all(|&i| ex.get(i) == ey.get(i)) {
        Decision::Equal
    } else {
        Decision::NotEqual
    };
    Ok(Transcript::new(messages, decision, Vec::new()))
}

fn check_swap_cap(q: usize) -> Result<()> {
    if 2 * q + 1 > MAX_QUBITS {
        return Err(Error::cap(format!(
            "SWAP test on {q}-qubit fingerprints needs {} qubits (cap {MAX_QUBITS})",
            2 * q + 1
        )));
    }
    Ok(())
}

/// `k` SWAP tests with ancilla-1 probability `p1`; Equal iff all give 0.
fn swap_rounds<R: Rng>(p1: f64, k: usize, rng: &mut R) -> (Vec<u8>, Decision) {
    let outcomes: Vec<u8> = (0..k).map(|_| u8::from(rng.random::<f64>() < p1)).collect();
    let decision = if outcomes.iter().all(|&o| o == 0) {
        Decision::Equal
    } else {
        Decision::NotEqual
    };
    (outcomes, decision)
}

fn check_copies(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::input("copy count k must be at least 1"));
    }
    Ok(())
}

/// Quantum fingerprinting: `k` copies of `|h_x⟩` and `|h_y⟩`, `k` SWAP tests.
pub fn run_quantum_equality(
    x: &BitString,
    y: &BitString,
    code: &LinearCode,
    k: usize,
    seed: u64,
) -> Result<Transcript> {
    check_copies(k)?;
    let q = fingerprint_qubits(code.m());
    check_swap_cap(q)?;
    let fx = build_fingerprint(code, x)?;
    let fy = build_fingerprint(code, y)?;
    let [_, p1] = swap_test(&fx.state, &fy.state)?;
    let (outcomes, decision) = swap_rounds(p1, k, &mut rng_from_seed(seed));
    let messages = vec![
        Message {
            party: Party::Alice,
            payload: Payload::Qubits {
                count: k * q,
                label: format!("h_x^{k}"),
            },
        },
        Message {
            party: Party::Bob,
            payload: Payload::Qubits {
                count: k * q,
                label: format!("h_y^{k}"),
            },
        },
    ];
    Ok(Transcript::new(messages, decision, outcomes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimulationMode {
    /// Equal iff the decoded overlap `|⟨h̃_x|h̃_y⟩| ≥ (1 + Δ)/2`.
    Threshold,
    /// `k` SWAP tests drawn from the decoded states.
    Sampled,
}

/// Largest per-component precision under which the decoded overlap stays on
/// the right side of the threshold: `√Δ / 2^{(q−1)/2}`.
pub fn admissible_precision(delta: f64, q: usize) -> f64 {
    delta.sqrt() / 2f64.powf((q as f64 - 1.0) / 2.0)
}

/// Classical simulation: both parties send quantized fingerprint
/// descriptions and the referee works on the decoded states.
pub fn run_classical_simulation_of_quantum(
    x: &BitString,
    y: &BitString,
    code: &LinearCode,
    epsilon_a: f64,
    mode: SimulationMode,
    k: usize,
    seed: u64,
) -> Result<Transcript> {
    check_copies(k)?;
    let delta = code
        .delta_verified()
        .ok_or_else(|| Error::input("classical simulation needs a code with verified Δ"))?;
    let fx = build_fingerprint(code, x)?;
    let fy = build_fingerprint(code, y)?;
    let dx = quantize_state(&fx.state, epsilon_a)?;
    let dy = quantize_state(&fy.state, epsilon_a)?;
    let payload = |d: &QuantizedDescription| Payload::Bits(d.to_bits().slice(0, d.length_bits()));
    let messages = vec![
        Message {
            party: Party::Alice,
            payload: payload(&dx),
        },
        Message {
            party: Party::Bob,
            payload: payload(&dy),
        },
    ];
    let (sx, sy) = (dx.state()?, dy.state()?);
    let (outcomes, decision) = match mode {
        SimulationMode::Threshold => {
            let o = inner_product(&sx, &sy)?.norm();
            let d = if o >= (1.0 + delta) / 2.0 {
                Decision::Equal
            } else {
                Decision::NotEqual
            };
            (Vec::new(), d)
        }
        SimulationMode::Sampled => {
            let [_, p1] = swap_test(&sx, &sy)?;
            swap_rounds(p1, k, &mut rng_from_seed(seed))
        }
    };
    Ok(Transcript::new(messages, decision, outcomes))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Protocol {
    Classical(ClassicalVariant),
    Quantum,
    ClassicalSim {
        mode: SimulationMode,
        epsilon_a: f64,
    },
}

impl Protocol {
    pub fn id(&self) -> &'static str {
        match self {
            Protocol::Classical(_) => "classical",
            Protocol::Quantum => "quantum",
            Protocol::ClassicalSim { .. } => "classical-sim",
        }
    }
}

/// How each trial's input pair is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMode {
    /// Uniform `x`, uniform `y ≠ x`.
    Unequal,
    /// Uniform `x`, `y = x`.
    Equal,
    /// Fair coin between the two.
    Mixed,
}

impl PairMode {
    pub fn id(&self) -> &'static str {
        match self {
            PairMode::Unequal => "unequal",
            PairMode::Equal => "equal",
            PairMode::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub code: CodeSpec,
    pub protocol: Protocol,
    pub trials: u64,
    pub master_seed: u64,
    pub k: usize,
    pub pairs: PairMode,
}

pub const MAX_TRIALS: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DirectionCount {
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
}

impl DirectionCount {
    fn new(errors: u64, trials: u64) -> Self {
        DirectionCount {
            errors,
            trials,
            rate: if trials == 0 {
                f64::NAN
            } else {
                errors as f64 / trials as f64
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerDirection {
    /// Declared Equal on unequal inputs.
    pub false_equal: DirectionCount,
    /// Declared NotEqual on equal inputs.
    pub false_not_equal: DirectionCount,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub protocol: String,
    pub code: String,
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub trials: u64,
    /// Trials that reached Equal/NotEqual (the rest restarted).
    pub decided: u64,
    pub restarts: u64,
    pub errors: u64,
    /// Errors over decided trials.
    pub error_rate: f64,
    pub wilson_99: [f64; 2],
    pub mean_bits: f64,
    pub mean_qubits: f64,
    pub per_direction_errors: PerDirection,
    /// Transcript of trial 0.
    pub first_transcript: Transcript,
}

#[derive(Clone, Copy, Default)]
struct Tally {
    decided: u64,
    restarts: u64,
    unequal: u64,
    equal: u64,
    false_equal: u64,
    false_not_equal: u64,
    bits: u64,
    qubits: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            decided: self.decided + o.decided,
            restarts: self.restarts + o.restarts,
            unequal: self.unequal + o.unequal,
            equal: self.equal + o.equal,
            false_equal: self.false_equal + o.false_equal,
            false_not_equal: self.false_not_equal + o.false_not_equal,
            bits: self.bits + o.bits,
            qubits: self.qubits + o.qubits,
        }
    }
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> [f64; 2] {
    if trials == 0 {
        return [0.0, 1.0];
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    [(center - half).max(0.0), (center + half).min(1.0)]
}

fn draw_pair<R: Rng>(n: usize, mode: PairMode, rng: &mut R) -> (BitString, BitString) {
    let random = |rng: &mut R| BitString::from_bools((0..n).map(|_| rng.random_bool(0.5)));
    let x = random(rng);
    let equal = match mode {
        PairMode::Equal => true,
        PairMode::Unequal => false,
        PairMode::Mixed => rng.random_bool(0.5),
    };
    if equal {
        return (x.clone(), x);
    }
    loop {
        let y = random(rng);
        if y != x {
            return (x, y);
        }
    }
}

/// Inputs and protocol transcript of one trial.
pub fn run_trial(
    config: &ExperimentConfig,
    code: &LinearCode,
    index: u64,
) -> Result<(BitString, BitString, Transcript)> {
    let seed = trial_seed(config.master_seed, index);
    let (x, y) = draw_pair(config.n, config.pairs, &mut rng_from_seed(seed));
    // protocol randomness is independent of the input draw but shared by
    // protocols, so the simulation replays the quantum protocol's outcomes
    let protocol_seed = splitmix64(seed ^ 0x5057_4150_5445_5354);
    let t = match config.protocol {
        Protocol::Classical(v) => run_classical_equality(&x, &y, code, v, protocol_seed)?,
        Protocol::Quantum => run_quantum_equality(&x, &y, code, config.k, protocol_seed)?,
        Protocol::ClassicalSim { mode, epsilon_a } => run_classical_simulation_of_quantum(
            &x,
            &y,
            code,
            epsilon_a,
            mode,
            config.k,
            protocol_seed,
        )?,
    };
    Ok((x, y, t))
}

fn validate(config: &ExperimentConfig) -> Result<LinearCode> {
    if !(1..=MAX_TRIALS).contains(&config.trials) {
        return Err(Error::input(format!(
            "trials must lie in 1..={MAX_TRIALS}, got {}",
            config.trials
        )));
    }
    if config.n < 1 {
        return Err(Error::input("n must be at least 1"));
    }
    let code = config.code.build(config.n)?;
    if let Protocol::Quantum | Protocol::ClassicalSim { .. } = config.protocol {
        check_copies(config.k)?;
        check_swap_cap(fingerprint_qubits(code.m()))?;
    }
    Ok(code)
}

/// Runs `config.trials` independent trials in parallel and aggregates.
pub fn monte_carlo(config: &ExperimentConfig) -> Result<ErrorReport> {
    let code = validate(config)?;
    let (_, _, first_transcript) = run_trial(config, &code, 0)?;
    let tally = (0..config.trials)
        .into_par_iter()
        .map(|i| -> Result<Tally> {
            let (x, y, t) = run_trial(config, &code, i)?;
            let equal = x == y;
            let mut tally = Tally {
                bits: t.classical_bits as u64,
                qubits: t.qubits as u64,
                ..Tally::default()
            };
            if t.decision == Decision::Restart {
                tally.restarts = 1;
                return Ok(tally);
            }
            tally.decided = 1;
            if equal {
                tally.equal = 1;
                tally.false_not_equal = u64::from(t.decision == Decision::NotEqual);
            } else {
                tally.unequal = 1;
                tally.false_equal = u64::from(t.decision == Decision::Equal);
            }
            Ok(tally)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let errors = tally.false_equal + tally.false_not_equal;
    let error_rate = if tally.decided == 0 {
        f64::NAN
    } else {
        errors as f64 / tally.decided as f64
    };
    Ok(ErrorReport {
        protocol: config.protocol.id().to_string(),
        code: config.code.id(),
        n: config.n,
        m: code.m(),
        delta: code.delta_verified().unwrap_or(f64::NAN),
        trials: config.trials,
        decided: tally.decided,
        restarts: tally.restarts,
        errors,
        error_rate,
        wilson_99: wilson_interval(errors, tally.decided, Z_99),
        mean_bits: tally.bits as f64 / config.trials as f64,
        mean_qubits: tally.qubits as f64 / config.trials as f64,
        per_direction_errors: PerDirection {
            false_equal: DirectionCount::new(tally.false_equal, tally.unequal),
            false_not_equal: DirectionCount::new(tally.false_not_equal, tally.equal),
        },
        first_transcript,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommunicationRow {
    pub protocol: String,
    pub n: usize,
    pub m: usize,
    /// Fingerprint register size `log2 m + 1`.
    pub q: usize,
    pub classical_bits: u64,
    pub qubits: u64,
    /// `log2(classical-simulation bits) / quantum qubits` at this `n`.
    pub ratio: f64,
}

/// Closed-form communication cost of the three protocols for the Hadamard
/// code at each `n`: quantum `2k(log2 m + 1)` qubits, classical simulation
/// `2(2^{q+1} p + 64)` bits, classical single-index `2(log2 m + 1)` bits.
pub fn communication_report(ns: &[usize], k: usize, p: usize) -> Result<Vec<CommunicationRow>> {
    check_copies(k)?;
    if !(2..=crate::fingerprint::MAX_COMPONENT_BITS).contains(&p) {
        return Err(Error::input(format!(
            "component width p = {p} out of range"
        )));
    }
    let mut rows = Vec::new();
    for &n in ns {
        if !(1..=crate::codes::MAX_HADAMARD_N).contains(&n) {
            return Err(Error::input(format!("n = {n} outside the Hadamard range")));
        }
        let m = 1usize << n;
        let q = fingerprint_qubits(m);
        let quantum = (2 * k * q) as u64;
        let sim = 2 * description_length_bits(q, p) as u64;
        let ratio = (sim as f64).log2() / quantum as f64;
        let row = |protocol: &str, classical_bits: u64, qubits: u64| CommunicationRow {
            protocol: protocol.to_string(),
            n,
            m,
            q,
            classical_bits,
            qubits,
            ratio,
        };
        rows.push(row("quantum", 0, quantum));
        rows.push(row("classical-sim", sim, 0));
        rows.push(row("classical", 2 * (index_bits(m) as u64 + 1), 0));
    }
    Ok(rows)
}
