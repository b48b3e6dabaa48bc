//! Subcommand bodies. Each produces a report object, a CSV table, a one-line
//! summary and any side files; `main` adds the configuration echo and
//! writes everything out.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use qkolab_core::codes::{CodeSpec, LinearCode, VerifyMode, EXHAUSTIVE_LIMIT};
use qkolab_core::complexity::{
    bell_pair_circuit, cbe_upper, circuit_from_text, encode_circuit, knet_upper,
    observation1_experiment, track_stepwise, CircuitEncoding, ComplexityReport, PolyBound,
    CONTAINER_MAGIC,
};
use qkolab_core::demon::{
    background_information_report, demon_step, multiphoton_comparison, multiphoton_ledger,
    BackgroundSetting, LedgerMode, Strategy, MAX_SIMULATED_PHOTONS,
};
use qkolab_core::fingerprint::{
    build_fingerprint, build_hx_circuit, extract_codeword, fingerprint_qubits, quantize_state,
};
use qkolab_core::quantum::{Circuit, StateVector, MAX_QUBITS};
use qkolab_core::rng::{rng_from_seed, trial_seed};
use qkolab_core::smp::{
    admissible_precision, communication_report, monte_carlo, ClassicalVariant, ExperimentConfig,
    PairMode, Protocol, SimulationMode, MAX_TRIALS,
};
use qkolab_core::BitString;

use crate::args::*;
use crate::emit::{canonical_json, Table};
use crate::error::{CliError, CliResult};

pub struct Output {
    pub report: Map<String, Value>,
    pub table: Table,
    pub summary: String,
    pub side_files: Vec<(PathBuf, Vec<u8>)>,
}

impl Output {
    fn new(report: Value, table: Table, summary: String) -> Self {
        let Value::Object(report) = report else {
            panic!("reports are objects")
        };
        Output {
            report,
            table,
            summary,
            side_files: Vec::new(),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_code(s: &str) -> CliResult<CodeSpec> {
    Ok(CodeSpec::from_str(s)?)
}

fn parse_bits(s: &str, n: usize, what: &str) -> CliResult<BitString> {
    let b = BitString::from_str(s)
        .map_err(|_| config_err(format!("{what} must be a string of 0/1, got {s:?}")))?;
    if b.len() != n {
        return Err(config_err(format!(
            "{what} has {} bits, expected {n}",
            b.len()
        )));
    }
    Ok(b)
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn read_state(path: &Path) -> CliResult<StateVector> {
    let bytes = read_file(path)?;
    let pairs: Vec<[f64; 2]> = serde_json::from_slice(&bytes)
        .map_err(|e| config_err(format!("{}: not a statevector dump: {e}", path.display())))?;
    Ok(StateVector::from_pairs(&pairs)?)
}

/// Statevector dump: JSON array of `[re, im]`, canonical formatting.
pub fn state_dump(s: &StateVector) -> Vec<u8> {
    canonical_json(&to_value(&s.to_pairs())).into_bytes()
}

pub fn codes_verify(a: &CodesVerifyArgs) -> CliResult<Output> {
    let spec = parse_code(&a.code)?;
    let exhaustive_ok = a.n < usize::BITS as usize && (1usize << a.n) <= EXHAUSTIVE_LIMIT;
    let mode = match a.mode {
        VerifyModeArg::Exhaustive => VerifyMode::Exhaustive,
        VerifyModeArg::Auto if exhaustive_ok => VerifyMode::Exhaustive,
        _ => VerifyMode::Sampled {
            samples: a.samples,
            seed: a.seed,
        },
    };
    let code = spec.build(a.n)?.verified(mode)?;
    let mut report = to_value(&code.descriptor());
    report["code"] = json!(spec.id());
    report["rate_c"] = json!(code.rate_c());
    let table = Table::from_objects(
        &[
            "code",
            "name",
            "n",
            "m",
            "rate_c",
            "delta_verified",
            "verification_mode",
        ],
        &[report.clone()],
    );
    let delta = code.delta_verified().expect("verified code carries Δ");
    let summary = format!(
        "Δ = {} ({}, n = {}, m = {})",
        crate::emit::format_g12(delta),
        code.verification().label(),
        code.n(),
        code.m()
    );
    Ok(Output::new(report, table, summary))
}

fn experiment(n: usize, p: &ProtocolArgs) -> CliResult<(ExperimentConfig, Option<f64>)> {
    let code_spec = parse_code(&p.code)?;
    let mut epsilon_used = None;
    let protocol = match p.protocol {
        ProtocolArg::Classical => Protocol::Classical(ClassicalVariant::SingleIndex),
        ProtocolArg::ClassicalMulti => Protocol::Classical(ClassicalVariant::MultiIndex { s: p.s }),
        ProtocolArg::Quantum => Protocol::Quantum,
        ProtocolArg::ClassicalSim => {
            let eps = if p.epsilon_a == "auto" {
                let code = code_spec.build(n)?;
                let delta = code
                    .delta_verified()
                    .ok_or_else(|| config_err("classical-sim needs a code with verified Δ"))?;
                admissible_precision(delta, fingerprint_qubits(code.m()))
            } else {
                p.epsilon_a.parse::<f64>().map_err(|_| {
                    config_err(format!(
                        "--epsilon-a must be a number or `auto`, got {:?}",
                        p.epsilon_a
                    ))
                })?
            };
            epsilon_used = Some(eps);
            let mode = match p.sim_mode {
                SimModeArg::Threshold => SimulationMode::Threshold,
                SimModeArg::Sampled => SimulationMode::Sampled,
            };
            Protocol::ClassicalSim {
                mode,
                epsilon_a: eps,
            }
        }
    };
    let pairs = match p.pairs {
        PairsArg::Unequal => PairMode::Unequal,
        PairsArg::Equal => PairMode::Equal,
        PairsArg::Mixed => PairMode::Mixed,
    };
    if p.trials > MAX_TRIALS {
        return Err(CliError::Cap(format!(
            "--trials {} exceeds {MAX_TRIALS}",
            p.trials
        )));
    }
    Ok((
        ExperimentConfig {
            n,
            code: code_spec,
            protocol,
            trials: p.trials,
            master_seed: p.seed,
            k: p.k,
            pairs,
        },
        epsilon_used,
    ))
}

const EQUALITY_COLUMNS: &[&str] = &[
    "protocol",
    "code",
    "n",
    "m",
    "delta",
    "epsilon_a",
    "trials",
    "decided",
    "restarts",
    "errors",
    "error_rate",
    "wilson_99_low",
    "wilson_99_high",
    "mean_bits",
    "mean_qubits",
    "false_equal_rate",
    "false_not_equal_rate",
];

fn equality_row(n: usize, p: &ProtocolArgs) -> CliResult<Value> {
    let (config, eps) = experiment(n, p)?;
    let report = monte_carlo(&config)?;
    let mut v = to_value(&report);
    v["epsilon_a"] = json!(eps);
    v["wilson_99_low"] = json!(report.wilson_99[0]);
    v["wilson_99_high"] = json!(report.wilson_99[1]);
    v["false_equal_rate"] = to_value(&report.per_direction_errors.false_equal.rate);
    v["false_not_equal_rate"] = to_value(&report.per_direction_errors.false_not_equal.rate);
    Ok(v)
}

pub fn equality(a: &EqualityArgs) -> CliResult<Output> {
    let report = equality_row(a.n, &a.protocol)?;
    let table = Table::from_objects(EQUALITY_COLUMNS, std::slice::from_ref(&report));
    let summary = format!(
        "error_rate = {} (99% Wilson [{}, {}]) over {} decided trials",
        canonical_json(&report["error_rate"]).trim_end(),
        canonical_json(&report["wilson_99_low"]).trim_end(),
        canonical_json(&report["wilson_99_high"]).trim_end(),
        report["decided"]
    );
    Ok(Output::new(report, table, summary))
}

enum Subject {
    Circuit(Circuit),
    State(StateVector),
    Observation1 { size: usize },
}

fn parse_subject(a: &ComplexityReportArgs) -> CliResult<Subject> {
    let (kind, rest) = a
        .subject
        .split_once(':')
        .unwrap_or((a.subject.as_str(), ""));
    let int = |s: &str| -> CliResult<usize> {
        s.parse().map_err(|_| {
            config_err(format!(
                "subject {:?}: expected an integer, got {s:?}",
                a.subject
            ))
        })
    };
    Ok(match kind {
        "bell" => Subject::Circuit(bell_pair_circuit(int(rest)?)?),
        "hx" => {
            let (n, x) = rest
                .split_once(':')
                .ok_or_else(|| config_err("subject hx needs the form hx:<n>:<x bits>"))?;
            let n = int(n)?;
            let code = parse_code(&a.code)?.build(n)?;
            Subject::Circuit(build_hx_circuit(&code, &parse_bits(x, n, "x")?)?)
        }
        "zero" => Subject::State(StateVector::zero(int(rest)?)?),
        "haar" => Subject::State(StateVector::random(int(rest)?, &mut rng_from_seed(a.seed))?),
        "circuit" => {
            let bytes = read_file(Path::new(rest))?;
            if bytes.starts_with(CONTAINER_MAGIC) {
                Subject::Circuit(CircuitEncoding::from_container(&bytes)?.decode()?)
            } else {
                let text = String::from_utf8(bytes)
                    .map_err(|_| config_err(format!("{rest}: neither QKCE nor text")))?;
                Subject::Circuit(circuit_from_text(&text)?)
            }
        }
        "state" => Subject::State(read_state(Path::new(rest))?),
        "observation1" => Subject::Observation1 { size: int(rest)? },
        _ => {
            return Err(config_err(format!(
                "unknown subject {:?} (bell, hx, zero, haar, circuit, state, observation1)",
                a.subject
            )))
        }
    })
}

fn parse_bound(s: &str) -> CliResult<PolyBound> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| config_err(format!("--stepwise expects a,b,d numbers, got {s:?}")))?;
    match v.as_slice() {
        [a, b, d] => Ok(PolyBound {
            a: *a,
            b: *b,
            d: *d,
        }),
        _ => Err(config_err(format!(
            "--stepwise expects three numbers, got {s:?}"
        ))),
    }
}

const REPORT_COLUMNS: &[&str] = &[
    "subject",
    "knet_upper_bits",
    "knet_raw_bits",
    "cbe_upper_bits",
    "cbe_raw_bits",
    "epsilon",
    "method_id",
];

pub fn complexity_report(a: &ComplexityReportArgs) -> CliResult<Output> {
    let bound = a.stepwise.as_deref().map(parse_bound).transpose()?;
    match parse_subject(a)? {
        Subject::Observation1 { size } => {
            if bound.is_some() || a.encoding_out.is_some() {
                return Err(config_err(
                    "--stepwise and --encoding-out need a circuit subject",
                ));
            }
            let code = parse_code(&a.code)?.build(a.n)?;
            let r = observation1_experiment(&code, size, a.seed)?;
            let summary = format!(
                "spearman = {} over {} strings",
                crate::emit::format_g12(r.spearman),
                r.corpus_size
            );
            let pairs: Vec<Value> = r.pairs.iter().map(to_value).collect();
            let table = Table::from_objects(&["x", "kcl_x_bits", "kcl_codeword_bits"], &pairs);
            Ok(Output::new(to_value(&r), table, summary))
        }
        Subject::State(s) => {
            if bound.is_some() || a.encoding_out.is_some() {
                return Err(config_err(
                    "--stepwise and --encoding-out need a circuit subject",
                ));
            }
            let k = cbe_upper(&s, a.epsilon_a)?;
            let r = ComplexityReport::new(a.subject.clone()).with_cbe(&k, a.epsilon_a);
            let mut v = to_value(&r);
            v["qubits"] = json!(s.qubits());
            let summary = format!(
                "cbe_upper = {} bits (raw {})",
                k.compressed_length_bits, k.raw_length_bits
            );
            let table = Table::from_objects(REPORT_COLUMNS, &[v.clone()]);
            Ok(Output::new(v, table, summary))
        }
        Subject::Circuit(c) => {
            let k = knet_upper(&c);
            let mut r = ComplexityReport::new(a.subject.clone()).with_knet(&k);
            let mut summary = format!(
                "knet_upper = {} bits (raw {})",
                k.compressed_length_bits, k.raw_length_bits
            );
            if c.qubits() <= MAX_QUBITS {
                let cbe = cbe_upper(&c.run()?, a.epsilon_a)?;
                summary.push_str(&format!(
                    ", cbe_upper = {} bits (raw {})",
                    cbe.compressed_length_bits, cbe.raw_length_bits
                ));
                r = r.with_cbe(&cbe, a.epsilon_a);
            }
            let mut v = to_value(&r);
            v["qubits"] = json!(c.qubits());
            v["gates"] = json!(c.len());
            let table = match bound {
                Some(b) => {
                    let steps = track_stepwise(&c, b);
                    let exceeded = steps.iter().filter(|s| s.exceeds_bound).count();
                    summary.push_str(&format!(
                        ", {exceeded} of {} steps above the bound",
                        steps.len()
                    ));
                    let rows: Vec<Value> = steps.iter().map(to_value).collect();
                    v["bound"] = to_value(&b);
                    v["steps_exceeding"] = json!(exceeded);
                    v["steps"] = Value::Array(rows.clone());
                    Table::from_objects(
                        &[
                            "step",
                            "knet_upper_bits",
                            "raw_length_bits",
                            "bound_bits",
                            "exceeds_bound",
                        ],
                        &rows,
                    )
                }
                None => Table::from_objects(REPORT_COLUMNS, &[v.clone()]),
            };
            let mut out = Output::new(v, table, summary);
            if let Some(path) = &a.encoding_out {
                out.side_files
                    .push((path.clone(), encode_circuit(&c).to_container()));
            }
            Ok(out)
        }
    }
}

pub fn fingerprint_build(a: &FingerprintBuildArgs) -> CliResult<Output> {
    let code = parse_code(&a.code)?.build(a.n)?;
    let x = parse_bits(&a.x, a.n, "--x")?;
    let fp = build_fingerprint(&code, &x)?;
    let d = quantize_state(&fp.state, a.epsilon_a)?;
    let report = json!({
        "x": fp.x,
        "codeword": fp.codeword,
        "m": fp.m(),
        "qubits": fp.qubits(),
        "state": fp.state.to_pairs(),
        "description_bits": d.length_bits(),
        "description_component_bits": d.p,
    });
    let rows: Vec<Value> = fp
        .state
        .to_pairs()
        .iter()
        .enumerate()
        .map(|(i, [re, im])| json!({"index": i, "re": re, "im": im}))
        .collect();
    let table = Table::from_objects(&["index", "re", "im"], &rows);
    let summary = format!("|h_x⟩ on {} qubits, E(x) = {}", fp.qubits(), fp.codeword);
    let mut out = Output::new(report, table, summary);
    if let Some(p) = &a.state_out {
        out.side_files.push((p.clone(), state_dump(&fp.state)));
    }
    if let Some(p) = &a.description_out {
        out.side_files.push((p.clone(), d.to_bytes()));
    }
    Ok(out)
}

pub fn fingerprint_extract(a: &FingerprintExtractArgs) -> CliResult<Output> {
    let code: LinearCode = parse_code(&a.code)?.build(a.n)?;
    let state = read_state(&a.state)?;
    let e = extract_codeword(&state, &code, a.epsilon)?;
    let report = to_value(&e);
    let table = Table::from_objects(
        &["word", "status", "message", "fidelity"],
        std::slice::from_ref(&report),
    );
    let summary = format!(
        "{}: word {}, message {}",
        e.status.label(),
        e.word.as_ref().map_or("-".to_string(), |w| w.to_string()),
        e.message
            .as_ref()
            .map_or("-".to_string(), |w| w.to_string())
    );
    Ok(Output::new(report, table, summary))
}

const LEDGER_COLUMNS: &[&str] = &[
    "n",
    "m",
    "strategy",
    "S_in",
    "I_in",
    "S_fin",
    "I_fin",
    "delta_total_bits",
    "work_joules",
    "kB",
    "T",
    "surrogate_method",
];

pub fn demon_run(a: &DemonRunArgs) -> CliResult<Output> {
    if a.runs == 0 {
        return Err(config_err("--runs must be at least 1"));
    }
    if a.runs > MAX_TRIALS {
        return Err(CliError::Cap(format!(
            "--runs {} exceeds {MAX_TRIALS}",
            a.runs
        )));
    }
    let (kb, t) = (a.thermal.kb, a.thermal.t);
    let first = demon_step(a.m, trial_seed(a.seed, 0), kb, t)?;
    // (outcome-1 count, ledger violations)
    let (ones, violations) = (0..a.runs)
        .into_par_iter()
        .map(|i| {
            let s = demon_step(a.m, trial_seed(a.seed, i), kb, t)?;
            let bad = !s.ledger.is_consistent() || s.ledger.delta_total_bits != a.m as f64;
            Ok((u64::from(s.record.outcome_bit), u64::from(bad)))
        })
        .try_reduce(|| (0, 0), |x, y| Ok((x.0 + y.0, x.1 + y.1)))
        .map_err(|e: qkolab_core::Error| CliError::from(e))?;
    let zeros = a.runs - ones;
    let freq0 = zeros as f64 / a.runs as f64;
    let sigma = (0.25 / a.runs as f64).sqrt();
    let mut ledger = to_value(&first.ledger);
    ledger["outcome_0"] = json!(zeros);
    ledger["outcome_1"] = json!(ones);
    let report = json!({
        "ledger": first.ledger,
        "first": {
            "record": first.record,
            "theta": first.theta,
            "p0": first.p0,
            "post_state": first.post_state.to_pairs(),
        },
        "runs": a.runs,
        "outcome_counts": [zeros, ones],
        "frequency_0": freq0,
        "sigma": sigma,
        "ledger_violations": violations,
    });
    let mut cols = LEDGER_COLUMNS.to_vec();
    cols.extend(["outcome_0", "outcome_1"]);
    let table = Table::from_objects(&cols, &[ledger]);
    let summary = format!(
        "ΔS̄ = {} bits, work = {} J; outcome 0 frequency {} over {} runs",
        crate::emit::format_g12(first.ledger.delta_total_bits),
        crate::emit::format_g12(first.ledger.work_joules),
        crate::emit::format_g12(freq0),
        a.runs
    );
    Ok(Output::new(report, table, summary))
}

pub fn demon_multi(a: &DemonMultiArgs) -> CliResult<Output> {
    let (kb, t) = (a.thermal.kb, a.thermal.t);
    let mode = match a.mode {
        LedgerModeArg::Formula => LedgerMode::Formula,
        LedgerModeArg::Simulated => LedgerMode::Simulated,
    };
    let mut report = Map::new();
    let ledgers = match a.strategy {
        StrategyArg::Product => vec![multiphoton_ledger(
            a.n,
            a.m,
            Strategy::Product,
            LedgerMode::Formula,
            a.epsilon,
            kb,
            t,
            a.seed,
        )?],
        StrategyArg::Entangled => vec![multiphoton_ledger(
            a.n,
            a.m,
            Strategy::Entangled,
            mode,
            a.epsilon,
            kb,
            t,
            a.seed,
        )?],
        StrategyArg::Compare => {
            let c = multiphoton_comparison(a.n, a.m, mode, a.epsilon, kb, t, a.seed)?;
            report.insert(
                "entangled_exceeds_product".into(),
                json!(c.entangled_exceeds_product),
            );
            vec![c.product, c.entangled]
        }
    };
    let mut background = vec![
        background_information_report(BackgroundSetting::Single, a.m, a.epsilon, a.seed)?,
        background_information_report(
            BackgroundSetting::MultiProduct { n: a.n },
            a.m,
            a.epsilon,
            a.seed,
        )?,
    ];
    if a.n <= MAX_SIMULATED_PHOTONS {
        background.push(background_information_report(
            BackgroundSetting::MultiProjection { n: a.n },
            a.m,
            a.epsilon,
            a.seed,
        )?);
    }
    let rows: Vec<Value> = ledgers.iter().map(to_value).collect();
    let summary = ledgers
        .iter()
        .map(|l| {
            format!(
                "{}: ΔS̄ = {}",
                l.strategy.id(),
                crate::emit::format_g12(l.delta_total_bits)
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    report.insert("ledgers".into(), Value::Array(rows.clone()));
    report.insert("background".into(), to_value(&background));
    let table = Table::from_objects(LEDGER_COLUMNS, &rows);
    Ok(Output::new(Value::Object(report), table, summary))
}

pub fn sweep(a: &SweepArgs) -> CliResult<Output> {
    if a.n_min == 0 || a.n_min > a.n_max {
        return Err(config_err(format!(
            "need 1 ≤ --n-min ≤ --n-max, got {}..{}",
            a.n_min, a.n_max
        )));
    }
    let ns: Vec<usize> = (a.n_min..=a.n_max).collect();
    let (rows, columns): (Vec<Value>, Vec<&str>) = match a.table {
        TableArg::Communication => (
            communication_report(&ns, a.protocol.k, a.p)?
                .iter()
                .map(to_value)
                .collect(),
            vec![
                "protocol",
                "n",
                "m",
                "q",
                "classical_bits",
                "qubits",
                "ratio",
            ],
        ),
        TableArg::Equality => {
            let mut rows = Vec::with_capacity(ns.len());
            for &n in &ns {
                let mut v = equality_row(n, &a.protocol)?;
                if let Value::Object(m) = &mut v {
                    m.remove("first_transcript");
                }
                rows.push(v);
            }
            (rows, EQUALITY_COLUMNS.to_vec())
        }
    };
    let table = Table::from_objects(&columns, &rows);
    let summary = format!("{} rows for n = {}..={}", rows.len(), a.n_min, a.n_max);
    Ok(Output::new(json!({ "rows": rows }), table, summary))
}

pub fn run(cmd: &Command) -> CliResult<Output> {
    match cmd {
        Command::Codes(CodesCommand::Verify(a)) => codes_verify(a),
        Command::Equality(a) => equality(a),
        Command::Complexity(ComplexityCommand::Report(a)) => complexity_report(a),
        Command::Fingerprint(FingerprintCommand::Build(a)) => fingerprint_build(a),
        Command::Fingerprint(FingerprintCommand::Extract(a)) => fingerprint_extract(a),
        Command::Demon(DemonCommand::Run(a)) => demon_run(a),
        Command::Demon(DemonCommand::Multi(a)) => demon_multi(a),
        Command::Sweep(a) => sweep(a),
    }
}
