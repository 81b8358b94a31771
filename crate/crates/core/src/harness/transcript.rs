use super::Role;
use crate::error::{parse, Result};
use std::fmt::Write as _;

/// Length prefix charged to the sender of every message.
pub const FRAME_BYTES: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MessageRecord {
    pub sender: Role,
    pub bits: u64,
}

/// Append-only record of channel traffic and modeled secure-evaluation cost.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    messages: Vec<MessageRecord>,
    total_bits: u64,
    modeled_secure_bits: f64,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Charges `8 · (payload_len + FRAME_BYTES)` bits to `sender`.
    pub fn record(&mut self, sender: Role, payload_len: usize) {
        self.record_bits(sender, 8 * (payload_len as u64 + FRAME_BYTES));
    }

    pub fn record_bits(&mut self, sender: Role, bits: u64) {
        self.messages.push(MessageRecord { sender, bits });
        self.total_bits += bits;
    }

    pub fn add_secure_bits(&mut self, bits: f64) {
        self.modeled_secure_bits += bits;
    }

    pub fn messages(&self) -> &[MessageRecord] {
        &self.messages
    }

    pub fn total_bits(&self) -> u64 {
        self.total_bits
    }

    pub fn modeled_secure_bits(&self) -> f64 {
        self.modeled_secure_bits
    }

    pub fn append(&mut self, other: &Transcript) {
        for m in &other.messages {
            self.record_bits(m.sender, m.bits);
        }
        self.modeled_secure_bits += other.modeled_secure_bits;
    }

    /// `step,sender,bits` rows followed by `total,<plaintext>,<secure>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,sender,bits\n");
        for (k, m) in self.messages.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", k + 1, m.sender, m.bits);
        }
        let _ = writeln!(out, "total,{},{}", self.total_bits, self.modeled_secure_bits);
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| parse(1, e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["step", "sender", "bits"] {
            return Err(parse(1, "expected header step,sender,bits"));
        }
        let mut t = Transcript::new();
        let mut summary = None;
        for (k, rec) in reader.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| parse(line, e.to_string()))?;
            if summary.is_some() {
                return Err(parse(line, "rows after the total row"));
            }
            if &rec[0] == "total" {
                let plain: u64 = rec[1].parse().map_err(|_| parse(line, "bad plaintext total"))?;
                let secure: f64 = rec[2].parse().map_err(|_| parse(line, "bad secure total"))?;
                if !(secure.is_finite() && secure >= 0.0) {
                    return Err(parse(line, "secure total must be a nonnegative real"));
                }
                summary = Some((plain, secure));
                continue;
            }
            let step: usize = rec[0].parse().map_err(|_| parse(line, "bad step number"))?;
            if step != t.messages.len() + 1 {
                return Err(parse(line, format!("step {step} out of sequence")));
            }
            let sender = match &rec[1] {
                "alice" => Role::Alice,
                "bob" => Role::Bob,
                other => return Err(parse(line, format!("unknown sender {other}"))),
            };
            let bits: u64 = rec[2].parse().map_err(|_| parse(line, "bad bit count"))?;
            t.messages.push(MessageRecord { sender, bits });
            t.total_bits = t.total_bits.checked_add(bits).ok_or_else(|| parse(line, "bit total overflows"))?;
        }
        let (plain, secure) = summary.ok_or_else(|| parse(0, "missing total row"))?;
        if plain != t.total_bits {
            return Err(parse(0, format!("total row says {plain} bits, rows sum to {}", t.total_bits)));
        }
        t.modeled_secure_bits = secure;
        Ok(t)
    }
}
