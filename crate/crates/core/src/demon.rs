//! Maxwell-demon bookkeeping with total entropy `S̄ = S + I`.
//!
//! A single photon starts maximally mixed (`S = 1`, `I = 0`). The demon draws
//! an `m`-bit register `r`, measures in the basis rotated by
//! `θ_k = kπ/2^m` (`k` the value of `r`), and keeps the outcome bit together
//! with `r`. Afterwards the photon is pure (`S = 0`) and the record costs
//! `I = m + 1` bits, so `ΔS̄ = m`; by Landauer this is `m·kB·T·ln 2` of work.
//!
//! The algorithmic information of the equilibrium state is taken as zero by
//! convention.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::cbe_upper;
use crate::error::{Error, Result};
use crate::kcl::METHOD_ID;
use crate::quantum::{DensityMatrix, StateVector, C64};
use crate::rng::{rng_from_seed, splitmix64};
use crate::shannon::shannon_length;

/// Widest register `r` (its value must fit a `u64`).
pub const MAX_RECORD_BITS: usize = 64;
/// Photon count cap for the closed-form ledgers.
pub const MAX_FORMULA_PHOTONS: usize = 16;
/// Photon count cap when the entangled record is measured on a simulated state.
pub const MAX_SIMULATED_PHOTONS: usize = 8;
/// Width of the template identifier in background descriptors.
pub const TEMPLATE_ID_BITS: usize = 8;

/// Boltzmann constant in J/K, the CLI default.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// `θ = kπ/2^m` where `k` is `r` read most significant bit first.
pub fn angle_from_record(r: &BitString) -> Result<f64> {
    let m = r.len();
    if m == 0 {
        return Err(Error::input("record must hold at least one bit"));
    }
    if m > MAX_RECORD_BITS {
        return Err(Error::cap(format!(
            "record of {m} bits exceeds {MAX_RECORD_BITS}"
        )));
    }
    Ok(r.to_u64()? as f64 * PI / 2f64.powi(m as i32))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DemonRecord {
    pub r: BitString,
    pub outcome_bit: u8,
    /// Outcome bit followed by `r`: the fraction `0.b r`, `m + 1` bits.
    pub full_record: BitString,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Single,
    Product,
    Entangled,
}

impl Strategy {
    pub fn id(&self) -> &'static str {
        match self {
            Strategy::Single => "single",
            Strategy::Product => "product",
            Strategy::Entangled => "entangled",
        }
    }
}

/// Entropy bookkeeping in bits; `work_joules` is `delta_total_bits·kB·T·ln 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyLedger {
    pub n: usize,
    pub m: usize,
    pub strategy: Strategy,
    #[serde(rename = "S_in")]
    pub s_in: f64,
    #[serde(rename = "I_in")]
    pub i_in: f64,
    #[serde(rename = "S_fin")]
    pub s_fin: f64,
    #[serde(rename = "I_fin")]
    pub i_fin: f64,
    pub delta_total_bits: f64,
    pub work_joules: f64,
    #[serde(rename = "kB")]
    pub kb: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub surrogate_method: String,
}

impl EntropyLedger {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        m: usize,
        strategy: Strategy,
        (s_in, i_in): (f64, f64),
        (s_fin, i_fin): (f64, f64),
        kb: f64,
        t: f64,
        surrogate_method: impl Into<String>,
    ) -> Self {
        let delta_total_bits = (s_fin + i_fin) - (s_in + i_in);
        EntropyLedger {
            n,
            m,
            strategy,
            s_in,
            i_in,
            s_fin,
            i_fin,
            delta_total_bits,
            work_joules: landauer_work(delta_total_bits, kb, t),
            kb,
            t,
            surrogate_method: surrogate_method.into(),
        }
    }

    /// Recomputes the derived fields from the four entropies.
    pub fn is_consistent(&self) -> bool {
        let delta = (self.s_fin + self.i_fin) - (self.s_in + self.i_in);
        delta == self.delta_total_bits && landauer_work(delta, self.kb, self.t) == self.work_joules
    }
}

pub fn landauer_work(bits: f64, kb: f64, t: f64) -> f64 {
    bits * kb * t * LN_2
}

fn check_thermal(kb: f64, t: f64) -> Result<()> {
    if !(kb.is_finite() && kb > 0.0 && t.is_finite() && t > 0.0) {
        return Err(Error::input(format!(
            "kB and T must be positive and finite, got {kb} and {t}"
        )));
    }
    Ok(())
}

fn check_record_bits(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::input("m must be at least 1"));
    }
    if m > MAX_RECORD_BITS {
        return Err(Error::cap(format!("m = {m} exceeds {MAX_RECORD_BITS}")));
    }
    Ok(())
}

/// `cos θ|0⟩ + sin θ|1⟩` and its orthogonal partner `−sin θ|0⟩ + cos θ|1⟩`.
pub fn measurement_basis(theta: f64) -> [StateVector; 2] {
    let (s, c) = theta.sin_cos();
    let v = |a: f64, b: f64| {
        StateVector::normalized(vec![C64::new(a, 0.0), C64::new(b, 0.0)]).expect("unit vector")
    };
    [v(c, s), v(-s, c)]
}

/// `⟨v|ρ|v⟩`.
fn born_probability(rho: &DensityMatrix, v: &StateVector) -> f64 {
    let a = v.amplitudes();
    let mut p = C64::new(0.0, 0.0);
    for i in 0..a.len() {
        for j in 0..a.len() {
            p += a[i].conj() * rho.entry(i, j) * a[j];
        }
    }
    p.re
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemonStep {
    pub record: DemonRecord,
    pub theta: f64,
    /// Probability the Born rule assigns to outcome 0.
    pub p0: f64,
    pub post_state: StateVector,
    pub ledger: EntropyLedger,
}

/// One demon cycle on a maximally mixed photon.
pub fn demon_step(m: usize, seed: u64, kb: f64, t: f64) -> Result<DemonStep> {
    check_record_bits(m)?;
    check_thermal(kb, t)?;
    let mut rng = rng_from_seed(seed);
    let r = BitString::from_bools((0..m).map(|_| rng.random_bool(0.5)));
    let theta = angle_from_record(&r)?;
    let basis = measurement_basis(theta);
    let rho = DensityMatrix::maximally_mixed(1)?;
    let p0 = born_probability(&rho, &basis[0]).clamp(0.0, 1.0);
    let outcome_bit = u8::from(rng.random::<f64>() >= p0);
    let mut full_record = BitString::from_bools([outcome_bit == 1]);
    full_record.extend_from(&r);
    let ledger = EntropyLedger::new(
        1,
        m,
        Strategy::Single,
        (1.0, 0.0),
        (0.0, (m + 1) as f64),
        kb,
        t,
        "record-length",
    );
    Ok(DemonStep {
        record: DemonRecord {
            r,
            outcome_bit,
            full_record,
        },
        theta,
        p0,
        post_state: basis[outcome_bit as usize].clone(),
        ledger,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerMode {
    /// Closed-form record lengths.
    Formula,
    /// The entangled record is the compressed description of a seeded
    /// Haar-random `n`-photon projection target.
    Simulated,
}

/// Ledger for `n` photons. Product strategy: `n` independent single-photon
/// cycles, `ΔS̄ = n·m`. Entangled strategy: one projection onto an `n`-photon
/// state specified to precision `ε`, `ΔS̄ = 2^n log2(1/ε) − n` in formula
/// mode, or `I − n` with `I` the CBE bound of the target in simulated mode.
#[allow(clippy::too_many_arguments)]
pub fn multiphoton_ledger(
    n: usize,
    m: usize,
    strategy: Strategy,
    mode: LedgerMode,
    epsilon: f64,
    kb: f64,
    t: f64,
    seed: u64,
) -> Result<EntropyLedger> {
    check_thermal(kb, t)?;
    if n == 0 {
        return Err(Error::input("need at least one photon"));
    }
    let cap = match (strategy, mode) {
        (Strategy::Entangled, LedgerMode::Simulated) => MAX_SIMULATED_PHOTONS,
        _ => MAX_FORMULA_PHOTONS,
    };
    if n > cap {
        return Err(Error::cap(format!(
            "n = {n} photons exceeds {cap} in this mode"
        )));
    }
    let s_in = (n as f64, 0.0);
    match strategy {
        Strategy::Single | Strategy::Product => {
            check_record_bits(m)?;
            if strategy == Strategy::Single && n != 1 {
                return Err(Error::input("the single strategy has exactly one photon"));
            }
            Ok(EntropyLedger::new(
                n,
                m,
                strategy,
                s_in,
                (0.0, (n * (m + 1)) as f64),
                kb,
                t,
                "record-length",
            ))
        }
        Strategy::Entangled => {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::input(format!("ε must lie in (0, 1), got {epsilon}")));
            }
            let (i_fin, method) = match mode {
                LedgerMode::Formula => (
                    (1u64 << n) as f64 * (1.0 / epsilon).log2(),
                    "formula".to_string(),
                ),
                LedgerMode::Simulated => {
                    let target = projection_target(n, seed)?;
                    let k = cbe_upper(&target, epsilon)?;
                    (k.compressed_length_bits as f64, format!("cbe:{METHOD_ID}"))
                }
            };
            Ok(EntropyLedger::new(
                n,
                m,
                strategy,
                s_in,
                (0.0, i_fin),
                kb,
                t,
                method,
            ))
        }
    }
}

/// Seeded Haar-random target for the simulated entangled projection.
pub fn projection_target(n: usize, seed: u64) -> Result<StateVector> {
    let mut rng = rng_from_seed(splitmix64(seed ^ 0x5052_4f4a_5441_5247));
    StateVector::random(n, &mut rng)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiphotonComparison {
    pub product: EntropyLedger,
    pub entangled: EntropyLedger,
    pub entangled_exceeds_product: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn multiphoton_comparison(
    n: usize,
    m: usize,
    mode: LedgerMode,
    epsilon: f64,
    kb: f64,
    t: f64,
    seed: u64,
) -> Result<MultiphotonComparison> {
    let product = multiphoton_ledger(
        n,
        m,
        Strategy::Product,
        LedgerMode::Formula,
        epsilon,
        kb,
        t,
        seed,
    )?;
    let entangled = multiphoton_ledger(n, m, Strategy::Entangled, mode, epsilon, kb, t, seed)?;
    Ok(MultiphotonComparison {
        entangled_exceeds_product: entangled.delta_total_bits > product.delta_total_bits,
        product,
        entangled,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BackgroundSetting {
    Single,
    MultiProduct { n: usize },
    MultiProjection { n: usize },
}

impl BackgroundSetting {
    fn template_id(&self) -> u64 {
        match self {
            BackgroundSetting::Single => 1,
            BackgroundSetting::MultiProduct { .. } => 2,
            BackgroundSetting::MultiProjection { .. } => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackgroundReport {
    pub setting: BackgroundSetting,
    pub m: usize,
    /// Template identifier plus integer fields.
    pub template_bits: usize,
    /// Everything needed to reconstruct the candidate list.
    pub descriptor_bits: usize,
    /// Shannon code length of one specific state given the list, under a
    /// uniform prior.
    pub conditional_bits: usize,
    pub cbe_raw_bits: Option<usize>,
    pub cbe_upper_bits: Option<usize>,
    pub method_id: String,
}

/// Elias gamma code of `v ≥ 1`.
pub fn elias_gamma(v: u64) -> BitString {
    assert!(v >= 1, "gamma code needs a positive integer");
    let width = 64 - v.leading_zeros() as usize;
    let mut out = BitString::zeros(width - 1);
    out.push_bits(v, width);
    out
}

/// Description length of the state list a demon must share in advance.
/// Single photon: template plus `m`. Product over `n` photons: also `n`.
/// Arbitrary projection: template, `n`, and the quantized target itself,
/// charged at its compressed length.
pub fn background_information_report(
    setting: BackgroundSetting,
    m: usize,
    epsilon_a: f64,
    seed: u64,
) -> Result<BackgroundReport> {
    check_record_bits(m)?;
    let mut template = BitString::new();
    template.push_bits(setting.template_id(), TEMPLATE_ID_BITS);
    template.extend_from(&elias_gamma(m as u64));
    let per_photon = shannon_length(2f64.powi(-(m as i32)))?;
    let (conditional_bits, cbe) = match setting {
        BackgroundSetting::Single => (per_photon, None),
        BackgroundSetting::MultiProduct { n } => {
            check_photons(n, MAX_FORMULA_PHOTONS)?;
            template.extend_from(&elias_gamma(n as u64));
            (n * per_photon, None)
        }
        BackgroundSetting::MultiProjection { n } => {
            check_photons(n, MAX_SIMULATED_PHOTONS)?;
            template.extend_from(&elias_gamma(n as u64));
            let k = cbe_upper(&projection_target(n, seed)?, epsilon_a)?;
            (1, Some(k))
        }
    };
    let template_bits = template.len();
    Ok(BackgroundReport {
        setting,
        m,
        template_bits,
        descriptor_bits: template_bits + cbe.as_ref().map_or(0, |k| k.compressed_length_bits),
        conditional_bits,
        cbe_raw_bits: cbe.as_ref().map(|k| k.raw_length_bits),
        cbe_upper_bits: cbe.as_ref().map(|k| k.compressed_length_bits),
        method_id: METHOD_ID.to_string(),
    })
}

fn check_photons(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::input("need at least one photon"));
    }
    if n > cap {
        return Err(Error::cap(format!("n = {n} photons exceeds {cap}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::Strategy;
    use super::*;
    use crate::quantum::fidelity;
    use proptest::prelude::*;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn angles() {
        assert_eq!(angle_from_record(&BitString::zeros(5)).unwrap(), 0.0);
        assert_eq!(angle_from_record(&bits("1011")).unwrap(), 11.0 * PI / 16.0);
        assert_eq!(angle_from_record(&bits("1")).unwrap(), PI / 2.0);
        assert!(angle_from_record(&BitString::new()).is_err());
        let top = angle_from_record(&BitString::from_bools(vec![true; 20])).unwrap();
        assert_eq!(top, PI * (1.0 - 2f64.powi(-20)));
        assert!(angle_from_record(&BitString::zeros(65)).is_err());
    }

    #[test]
    fn single_step_ledger() {
        for m in [1, 4, 17, 64] {
            let s = demon_step(m, 3, BOLTZMANN, 300.0).unwrap();
            assert_eq!(s.ledger.delta_total_bits, m as f64);
            assert_eq!(s.ledger.i_fin, (m + 1) as f64);
            assert_eq!(s.ledger.work_joules, m as f64 * BOLTZMANN * 300.0 * LN_2);
            assert!(s.ledger.is_consistent());
            assert_eq!(s.record.full_record.len(), m + 1);
            assert_eq!(s.record.full_record.get(0), s.record.outcome_bit == 1);
            assert_eq!(s.record.full_record.slice(1, m + 1), s.record.r);
            assert!((s.p0 - 0.5).abs() < 1e-15);
            let expected = &measurement_basis(s.theta)[s.record.outcome_bit as usize];
            assert!((fidelity(&s.post_state, expected).unwrap() - 1.0).abs() <= 1e-12);
        }
        assert!(demon_step(0, 1, 1.0, 1.0).is_err());
        assert!(matches!(
            demon_step(65, 1, 1.0, 1.0),
            Err(Error::CapExceeded(_))
        ));
        assert!(demon_step(4, 1, -1.0, 1.0).is_err());
        assert_eq!(
            demon_step(8, 9, 1.0, 1.0).unwrap(),
            demon_step(8, 9, 1.0, 1.0).unwrap()
        );
    }

    #[test]
    fn basis_is_orthonormal() {
        for k in 0..16 {
            let [a, b] = measurement_basis(k as f64 * PI / 16.0);
            assert!(crate::quantum::inner_product(&a, &b).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn multiphoton_formulas() {
        let e = 2f64.powi(-4);
        let p = multiphoton_ledger(2, 3, Strategy::Product, LedgerMode::Formula, e, 1.0, 1.0, 0)
            .unwrap();
        assert_eq!(p.delta_total_bits, 6.0);
        let q = multiphoton_ledger(
            2,
            3,
            Strategy::Entangled,
            LedgerMode::Formula,
            e,
            1.0,
            1.0,
            0,
        )
        .unwrap();
        assert_eq!(q.delta_total_bits, 14.0);
        assert!(p.is_consistent() && q.is_consistent());
        for (n, m) in [(2, 3), (2, 7), (3, 20), (1, 10)] {
            let c = multiphoton_comparison(n, m, LedgerMode::Formula, e, 1.0, 1.0, 0).unwrap();
            let formula = (1u64 << n) as f64 * 4.0 - n as f64;
            assert_eq!(c.entangled_exceeds_product, formula > (n * m) as f64);
        }
        assert!(multiphoton_ledger(
            17,
            3,
            Strategy::Product,
            LedgerMode::Formula,
            e,
            1.0,
            1.0,
            0
        )
        .is_err());
        assert!(multiphoton_ledger(
            9,
            3,
            Strategy::Entangled,
            LedgerMode::Simulated,
            e,
            1.0,
            1.0,
            0
        )
        .is_err());
        assert!(
            multiphoton_ledger(2, 3, Strategy::Single, LedgerMode::Formula, e, 1.0, 1.0, 0)
                .is_err()
        );
    }

    #[test]
    fn simulated_entangled_uses_compressed_target() {
        let l = multiphoton_ledger(
            4,
            3,
            Strategy::Entangled,
            LedgerMode::Simulated,
            1e-4,
            1.0,
            1.0,
            5,
        )
        .unwrap();
        let k = cbe_upper(&projection_target(4, 5).unwrap(), 1e-4).unwrap();
        assert_eq!(l.delta_total_bits, k.compressed_length_bits as f64 - 4.0);
        assert_eq!(l.surrogate_method, "cbe:bitlz-v1");
        assert!(l.is_consistent());
    }

    #[test]
    fn gamma_codes() {
        assert_eq!(elias_gamma(1).to_string(), "1");
        assert_eq!(elias_gamma(2).to_string(), "010");
        assert_eq!(elias_gamma(8).to_string(), "0001000");
    }

    #[test]
    fn background_descriptors() {
        let single = background_information_report(BackgroundSetting::Single, 8, 1e-4, 0).unwrap();
        assert_eq!(single.template_bits, 8 + 7);
        assert!(single.descriptor_bits <= 128);
        assert_eq!(single.conditional_bits, 8);
        let multi =
            background_information_report(BackgroundSetting::MultiProduct { n: 4 }, 8, 1e-4, 0)
                .unwrap();
        assert_eq!(
            multi.template_bits,
            single.template_bits + elias_gamma(4).len()
        );
        assert_eq!(multi.conditional_bits, 32);
        let proj = background_information_report(
            BackgroundSetting::MultiProjection { n: 6 },
            8,
            2f64.powi(-15),
            0,
        )
        .unwrap();
        let raw = proj.cbe_raw_bits.unwrap();
        assert_eq!(raw, (1 << 7) * 16 + 64);
        assert!(proj.descriptor_bits as f64 >= 0.9 * raw as f64, "{proj:?}");
    }

    proptest! {
        #[test]
        fn ledger_identity(m in 1usize..=64, seed in any::<u64>(), t in 1e-3f64..1e4) {
            let s = demon_step(m, seed, BOLTZMANN, t).unwrap();
            prop_assert!(s.ledger.is_consistent());
            prop_assert_eq!(s.ledger.delta_total_bits, m as f64);
            prop_assert_eq!(s.ledger.work_joules, m as f64 * BOLTZMANN * t * LN_2);
        }
    }
}
