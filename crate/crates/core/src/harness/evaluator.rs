use crate::error::{execution, invalid, Result};
use std::cell::Cell;

/// Constants of the per-gate charge `r · (log₂ s)^exponent · c_ot`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel {
    pub c_ot: f64,
    pub log_exponent: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { c_ot: 64.0, log_exponent: 2.0 }
    }
}

pub fn polylog_charge(model: &CostModel, word_bits: u32, entries: u64) -> f64 {
    let log_s = (entries.max(2) as f64).log2();
    f64::from(word_bits) * log_s.powf(model.log_exponent) * model.c_ot
}

/// A read-only memory held by one party.
pub trait RomSource {
    fn word_bits(&self) -> u32;
    /// Entry count used in the cost model.
    fn charged_entries(&self) -> u64;
    fn read(&self, index: u64) -> Option<u64>;
}

/// A materialized ROM.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rom {
    words: Vec<u64>,
    word_bits: u32,
    charged_entries: u64,
}

impl Rom {
    pub fn new(words: Vec<u64>, word_bits: u32) -> Self {
        let charged_entries = words.len() as u64;
        Self { words, word_bits, charged_entries }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), 64)
    }

    /// Overrides the entry count charged by the cost model.
    pub fn with_charged_entries(mut self, entries: u64) -> Self {
        self.charged_entries = entries;
        self
    }
}

impl RomSource for Rom {
    fn word_bits(&self) -> u32 {
        self.word_bits
    }

    fn charged_entries(&self) -> u64 {
        self.charged_entries
    }

    fn read(&self, index: u64) -> Option<u64> {
        usize::try_from(index).ok().and_then(|i| self.words.get(i)).copied()
    }
}

/// Bounds-checked, access-counting reads from both parties' ROMs.
pub struct RomView<'a> {
    a: &'a dyn RomSource,
    b: &'a dyn RomSource,
    lookups: Cell<u64>,
}

impl RomView<'_> {
    pub fn read_a(&self, index: u64) -> Result<u64> {
        self.lookups.set(self.lookups.get() + 1);
        self.a.read(index).ok_or_else(|| execution(format!("ROM index {index} out of bounds on alice's side")))
    }

    pub fn read_b(&self, index: u64) -> Result<u64> {
        self.lookups.set(self.lookups.get() + 1);
        self.b.read(index).ok_or_else(|| execution(format!("ROM index {index} out of bounds on bob's side")))
    }

    pub fn lookups(&self) -> u64 {
        self.lookups.get()
    }
}

/// Declared size of the circuit computing a joint function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircuitSpec {
    /// Gates other than ROM lookups, output gates included.
    pub gates: u64,
    /// Upper bound on ROM lookups.
    pub rom_lookups: u64,
    pub output_bits: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrustedEvaluation {
    pub gates: u64,
    pub rom_lookups: u64,
    pub rom_word_bits: u32,
    pub rom_entries: u64,
    pub output_bits: u64,
    pub modeled_secure_bits: f64,
}

/// Evaluates `f` in the clear and charges the modeled secure cost
/// `(gates + rom_lookups) · polylog_charge(r, s)`.
pub fn trusted_evaluate<O>(
    spec: CircuitSpec,
    model: &CostModel,
    rom_a: &dyn RomSource,
    rom_b: &dyn RomSource,
    f: impl FnOnce(&RomView<'_>) -> Result<O>,
) -> Result<(O, TrustedEvaluation)> {
    if spec.output_bits > spec.gates {
        return Err(invalid("every output bit needs an output gate"));
    }
    let view = RomView { a: rom_a, b: rom_b, lookups: Cell::new(0) };
    let out = f(&view)?;
    if view.lookups() > spec.rom_lookups {
        return Err(execution(format!("function made {} ROM lookups, declared {}", view.lookups(), spec.rom_lookups)));
    }
    let word_bits = rom_a.word_bits().max(rom_b.word_bits());
    let entries = rom_a.charged_entries().max(rom_b.charged_entries());
    let charge = polylog_charge(model, word_bits, entries);
    let eval = TrustedEvaluation {
        gates: spec.gates,
        rom_lookups: spec.rom_lookups,
        rom_word_bits: word_bits,
        rom_entries: entries,
        output_bits: spec.output_bits,
        modeled_secure_bits: (spec.gates + spec.rom_lookups) as f64 * charge,
    };
    Ok((out, eval))
}
