//! Command-line surface and config-file merging.
//!
//! A config file is a flat list of `key = value` lines whose keys are the
//! long flag names of the chosen subcommand (`#` starts a comment). Its
//! entries are spliced into the argument list ahead of the real flags, so a
//! flag given on the command line overrides the file and an unknown key is
//! rejected exactly like an unknown flag.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "qkolab",
    version,
    about = "Quantum fingerprinting, complexity surrogates and demon ledgers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Linear codes.
    #[command(subcommand)]
    Codes(CodesCommand),
    /// Monte Carlo run of an equality protocol.
    #[command(args_override_self = true)]
    Equality(EqualityArgs),
    /// Compression-based complexity estimates.
    #[command(subcommand)]
    Complexity(ComplexityCommand),
    /// Fingerprint states.
    #[command(subcommand)]
    Fingerprint(FingerprintCommand),
    /// Maxwell-demon entropy ledgers.
    #[command(subcommand)]
    Demon(DemonCommand),
    /// Tables over a range of message lengths.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum CodesCommand {
    /// Builds a code and verifies its distance.
    #[command(args_override_self = true)]
    Verify(CodesVerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum ComplexityCommand {
    /// Complexity bounds for a circuit, a state, or a built-in subject.
    #[command(args_override_self = true)]
    Report(ComplexityReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum FingerprintCommand {
    /// Builds the fingerprint state of a message.
    #[command(args_override_self = true)]
    Build(FingerprintBuildArgs),
    /// Reads a codeword back out of a state.
    #[command(args_override_self = true)]
    Extract(FingerprintExtractArgs),
}

#[derive(Debug, Subcommand)]
pub enum DemonCommand {
    /// Single-photon demon cycles.
    #[command(args_override_self = true)]
    Run(DemonRunArgs),
    /// Multi-photon product vs entangled ledgers.
    #[command(args_override_self = true)]
    Multi(DemonMultiArgs),
}

/// Flags every subcommand accepts; none of them is echoed into outputs
/// except the format.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Flat `key = value` file with default flag values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output file; the document goes to standard output when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyModeArg {
    /// Exhaustive when 2^n ≤ 4096, sampled otherwise.
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CodesVerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// `hadamard` or `concatenated:<c>`.
    #[arg(long, default_value = "hadamard")]
    pub code: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = VerifyModeArg::Auto)]
    pub mode: VerifyModeArg,
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    #[arg(long, default_value_t = qkolab_core::codes::DEFAULT_VERIFY_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolArg {
    Classical,
    ClassicalMulti,
    Quantum,
    ClassicalSim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairsArg {
    Unequal,
    Equal,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimModeArg {
    Threshold,
    Sampled,
}

/// Protocol parameters shared by `equality` and `sweep --table equality`.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ProtocolArgs {
    #[arg(long, value_enum, default_value_t = ProtocolArg::Quantum)]
    pub protocol: ProtocolArg,
    #[arg(long, default_value = "hadamard")]
    pub code: String,
    /// SWAP-test copies (quantum and sampled simulation).
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Revealed positions per party for `classical-multi`.
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    /// Per-component precision for `classical-sim`; `auto` picks the
    /// largest precision that keeps the decision threshold sound.
    #[arg(long, default_value = "auto")]
    pub epsilon_a: String,
    #[arg(long, value_enum, default_value_t = SimModeArg::Threshold)]
    pub sim_mode: SimModeArg,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PairsArg::Unequal)]
    pub pairs: PairsArg,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EqualityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub protocol: ProtocolArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ComplexityReportArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// One of `bell:<pairs>`, `hx:<n>:<x bits>`, `zero:<q>`, `haar:<q>`,
    /// `circuit:<path>` (text or QKCE container), `state:<path>`
    /// (statevector JSON), `observation1:<corpus size>`.
    #[arg(long)]
    pub subject: String,
    /// Precision for CBE descriptions.
    #[arg(long, default_value_t = 3.0517578125e-5)]
    pub epsilon_a: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Message length for `observation1`.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Code for `observation1` and `hx`.
    #[arg(long, default_value = "hadamard")]
    pub code: String,
    /// Per-step tracking against the envelope `a·t^b + d`, given as `a,b,d`.
    #[arg(long)]
    pub stepwise: Option<String>,
    /// Also write the circuit's QKCE container here.
    #[arg(long)]
    #[serde(skip)]
    pub encoding_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FingerprintBuildArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value = "hadamard")]
    pub code: String,
    #[arg(long)]
    pub n: usize,
    /// Message bits, most significant first.
    #[arg(long)]
    pub x: String,
    /// Write the bare statevector JSON dump here.
    #[arg(long)]
    #[serde(skip)]
    pub state_out: Option<PathBuf>,
    /// Write the quantized description bytes here.
    #[arg(long)]
    #[serde(skip)]
    pub description_out: Option<PathBuf>,
    #[arg(long, default_value_t = 3.0517578125e-5)]
    pub epsilon_a: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FingerprintExtractArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value = "hadamard")]
    pub code: String,
    #[arg(long)]
    pub n: usize,
    /// Statevector JSON dump to read.
    #[arg(long)]
    pub state: PathBuf,
    /// Fidelity tolerance for accepting a perturbed state (at most 1 − Δ²).
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Thermal {
    /// Boltzmann constant in J/K.
    #[arg(long = "kb", default_value = "1.380649e-23")]
    #[serde(rename = "kb")]
    pub kb: f64,
    /// Temperature in K.
    #[arg(long = "t", default_value_t = 300.0)]
    #[serde(rename = "t")]
    pub t: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DemonRunArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent cycles; cycle `i` uses a seed derived from `(seed, i)`.
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub thermal: Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Product,
    Entangled,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LedgerModeArg {
    Formula,
    Simulated,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DemonMultiArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Compare)]
    pub strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = LedgerModeArg::Formula)]
    pub mode: LedgerModeArg,
    #[arg(long, default_value_t = 0.0625)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub thermal: Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableArg {
    /// Qubits vs classical-simulation bits per message length.
    Communication,
    /// Protocol error rates per message length.
    Equality,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = TableArg::Communication)]
    pub table: TableArg,
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    /// Bits per amplitude component in the communication table.
    #[arg(long, default_value_t = 16)]
    pub p: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub protocol: ProtocolArgs,
}

impl Command {
    /// Space-separated subcommand path, e.g. `codes verify`.
    pub fn path(&self) -> &'static str {
        match self {
            Command::Codes(CodesCommand::Verify(_)) => "codes verify",
            Command::Equality(_) => "equality",
            Command::Complexity(ComplexityCommand::Report(_)) => "complexity report",
            Command::Fingerprint(FingerprintCommand::Build(_)) => "fingerprint build",
            Command::Fingerprint(FingerprintCommand::Extract(_)) => "fingerprint extract",
            Command::Demon(DemonCommand::Run(_)) => "demon run",
            Command::Demon(DemonCommand::Multi(_)) => "demon multi",
            Command::Sweep(_) => "sweep",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Codes(CodesCommand::Verify(a)) => &a.common,
            Command::Equality(a) => &a.common,
            Command::Complexity(ComplexityCommand::Report(a)) => &a.common,
            Command::Fingerprint(FingerprintCommand::Build(a)) => &a.common,
            Command::Fingerprint(FingerprintCommand::Extract(a)) => &a.common,
            Command::Demon(DemonCommand::Run(a)) => &a.common,
            Command::Demon(DemonCommand::Multi(a)) => &a.common,
            Command::Sweep(a) => &a.common,
        }
    }

    /// The effective configuration echoed into every output: every flag of
    /// the subcommand (defaults included) except file locations, plus the
    /// subcommand path.
    pub fn effective_config(&self) -> Map<String, Value> {
        let v = match self {
            Command::Codes(CodesCommand::Verify(a)) => serde_json::to_value(a),
            Command::Equality(a) => serde_json::to_value(a),
            Command::Complexity(ComplexityCommand::Report(a)) => serde_json::to_value(a),
            Command::Fingerprint(FingerprintCommand::Build(a)) => serde_json::to_value(a),
            Command::Fingerprint(FingerprintCommand::Extract(a)) => serde_json::to_value(a),
            Command::Demon(DemonCommand::Run(a)) => serde_json::to_value(a),
            Command::Demon(DemonCommand::Multi(a)) => serde_json::to_value(a),
            Command::Sweep(a) => serde_json::to_value(a),
        };
        let mut map = match v.expect("arguments serialize") {
            Value::Object(m) => m,
            _ => unreachable!("argument structs serialize to objects"),
        };
        map.insert("command".into(), Value::String(self.path().into()));
        map
    }
}

/// Parses a flat `key = value` file. Keys may use `-` or `_`.
pub fn parse_config_file(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("config line {}: expected `key = value`", i + 1))
        })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Config(format!(
                "config line {}: empty key",
                i + 1
            )));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!(
                "config line {}: duplicate key {key:?}",
                i + 1
            )));
        }
    }
    Ok(out)
}

fn load_config(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config_file(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Value of `--config PATH` / `--config=PATH`, last occurrence winning.
fn config_flag(argv: &[String]) -> Option<PathBuf> {
    let mut found = None;
    let mut args = argv.iter().skip(1);
    while let Some(a) = args.next() {
        if a == "--config" {
            found = args.next().map(PathBuf::from);
        } else if let Some(v) = a.strip_prefix("--config=") {
            found = Some(PathBuf::from(v));
        }
    }
    found
}

/// Leading argv tokens that name a leaf subcommand, e.g. `["codes", "verify"]`.
fn subcommand_path(argv: &[String]) -> Vec<&str> {
    let mut cmd = Cli::command();
    let mut path = Vec::new();
    for a in argv.iter().skip(1) {
        let Some(sub) = cmd.find_subcommand(a).cloned() else {
            break;
        };
        path.push(a.as_str());
        cmd = sub;
    }
    if cmd.has_subcommands() {
        path.clear();
    }
    path
}

/// Long flag names accepted by the subcommand at `path`.
fn known_keys(path: &[&str]) -> Vec<String> {
    let mut cmd = Cli::command();
    for p in path {
        cmd = cmd.find_subcommand(p).expect("subcommand exists").clone();
    }
    cmd.get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect()
}

/// Parses `argv` (program name first), folding in `--config` if present.
/// Help and version requests come back as `Err(clap::Error)` for the caller
/// to print.
pub fn parse(argv: &[String]) -> std::result::Result<CliResult<Cli>, clap::Error> {
    // Located without a full parse: flags that are required on the command
    // line may be supplied by the file.
    let Some(cfg_path) = config_flag(argv) else {
        return Ok(Ok(Cli::try_parse_from(argv)?));
    };
    let path = subcommand_path(argv);
    if path.is_empty() {
        return Ok(Ok(Cli::try_parse_from(argv)?));
    }
    let entries = match load_config(&cfg_path) {
        Ok(e) => e,
        Err(e) => return Ok(Err(e)),
    };
    let known = known_keys(&path);
    for key in entries.keys() {
        if key == "config" || !known.contains(key) {
            return Ok(Err(CliError::Config(format!(
                "{}: unknown key {key:?} for `{}`",
                cfg_path.display(),
                path.join(" ")
            ))));
        }
    }
    // argv = program, subcommand path, file entries, then the original
    // arguments minus the path tokens; later values win.
    let mut rebuilt: Vec<String> = vec![argv[0].clone()];
    rebuilt.extend(path.iter().map(|s| s.to_string()));
    for (k, v) in &entries {
        rebuilt.push(format!("--{k}"));
        rebuilt.push(v.clone());
    }
    let mut pending = path.iter().peekable();
    for a in &argv[1..] {
        if pending.peek().is_some_and(|p| **p == a) {
            pending.next();
            continue;
        }
        rebuilt.push(a.clone());
    }
    Ok(Ok(Cli::try_parse_from(&rebuilt)?))
}
