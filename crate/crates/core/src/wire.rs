//! Byte encodings of protocol messages.
//!
//! All integers are little-endian.

use crate::dist::Multiset;
use crate::error::{parse, Result};
use crate::harness::Decision;

fn take<'a>(bytes: &'a [u8], at: &mut usize, len: usize, what: &str) -> Result<&'a [u8]> {
    let end = at.checked_add(len).ok_or_else(|| parse(1, format!("{what}: length overflow")))?;
    let out = bytes.get(*at..end).ok_or_else(|| parse(1, format!("{what}: truncated message")))?;
    *at = end;
    Ok(out)
}

fn read_u32(bytes: &[u8], at: &mut usize, what: &str) -> Result<u32> {
    Ok(u32::from_le_bytes(take(bytes, at, 4, what)?.try_into().expect("four bytes")))
}

fn read_u64(bytes: &[u8], at: &mut usize, what: &str) -> Result<u64> {
    Ok(u64::from_le_bytes(take(bytes, at, 8, what)?.try_into().expect("eight bytes")))
}

/// `n: u32`, `pairs: u32`, then `(letter: u32, multiplicity: u32)` sorted by letter.
pub fn encode_multiset(s: &Multiset) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * s.pairs().len());
    out.extend_from_slice(&(s.n() as u32).to_le_bytes());
    out.extend_from_slice(&(s.pairs().len() as u32).to_le_bytes());
    for &(l, c) in s.pairs() {
        out.extend_from_slice(&(l as u32).to_le_bytes());
        out.extend_from_slice(&(c as u32).to_le_bytes());
    }
    out
}

pub fn decode_multiset(bytes: &[u8]) -> Result<Multiset> {
    let mut at = 0;
    let n = read_u32(bytes, &mut at, "multiset")? as usize;
    let count = read_u32(bytes, &mut at, "multiset")? as usize;
    if bytes.len() != 8 + 8 * count {
        return Err(parse(1, "multiset message length does not match its pair count"));
    }
    let mut pairs = Vec::with_capacity(count);
    let mut prev: Option<usize> = None;
    for _ in 0..count {
        let l = read_u32(bytes, &mut at, "multiset")? as usize;
        let c = u64::from(read_u32(bytes, &mut at, "multiset")?);
        if l >= n {
            return Err(parse(1, format!("letter {l} outside alphabet of size {n}")));
        }
        if c == 0 {
            return Err(parse(1, "zero multiplicity"));
        }
        if prev.is_some_and(|p| p >= l) {
            return Err(parse(1, "letters not strictly increasing"));
        }
        prev = Some(l);
        pairs.push((l, c));
    }
    Multiset::from_pairs(&pairs, n).map_err(|e| parse(1, e.to_string()))
}

pub fn encode_f64(x: f64) -> Vec<u8> {
    x.to_le_bytes().to_vec()
}

pub fn decode_f64(bytes: &[u8]) -> Result<f64> {
    let arr: [u8; 8] = bytes.try_into().map_err(|_| parse(1, "expected an 8-byte real"))?;
    Ok(f64::from_le_bytes(arr))
}

pub fn encode_u64(x: u64) -> Vec<u8> {
    x.to_le_bytes().to_vec()
}

pub fn decode_u64(bytes: &[u8]) -> Result<u64> {
    let mut at = 0;
    let v = read_u64(bytes, &mut at, "integer")?;
    if at != bytes.len() {
        return Err(parse(1, "trailing bytes after integer"));
    }
    Ok(v)
}

pub fn encode_decision(d: Decision) -> Vec<u8> {
    vec![match d {
        Decision::Same => 0,
        Decision::Far => 1,
        Decision::Product => 2,
    }]
}

pub fn decode_decision(bytes: &[u8]) -> Result<Decision> {
    match bytes {
        [0] => Ok(Decision::Same),
        [1] => Ok(Decision::Far),
        [2] => Ok(Decision::Product),
        _ => Err(parse(1, "bad decision byte")),
    }
}

/// Appends `value` in the low `width` bits, most significant bit first.
#[derive(Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: u64, width: u32) {
        for k in (0..width).rev() {
            if self.bits.is_multiple_of(8) {
                self.bytes.push(0);
            }
            if (value >> k) & 1 == 1 {
                let last = self.bytes.last_mut().expect("pushed above");
                *last |= 0x80 >> (self.bits % 8);
            }
            self.bits += 1;
        }
    }

    pub fn bit_len(&self) -> u64 {
        self.bits
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn read(&mut self, width: u32) -> Result<u64> {
        if width > 64 {
            return Err(parse(1, "field wider than 64 bits"));
        }
        let mut v = 0u64;
        for _ in 0..width {
            let byte = *self.bytes.get((self.pos / 8) as usize).ok_or_else(|| parse(1, "bit stream truncated"))?;
            v = (v << 1) | u64::from((byte >> (7 - self.pos % 8)) & 1);
            self.pos += 1;
        }
        Ok(v)
    }

    pub fn position(&self) -> u64 {
        self.pos
    }
}

/// Bits needed to write any value in `0..count`.
pub fn width_for(count: u64) -> u32 {
    if count <= 1 {
        0
    } else {
        64 - (count - 1).leading_zeros()
    }
}
