//! In-band chain header carried between weak-learner hosts.
//!
//! Layout for `N` learners, packed most-significant bit first:
//!
//! ```text
//! | id_1 | ... | id_N | O_1 | ... | O_N | M_1 | ... | M_N | zero pad |
//! ```
//!
//! Each id is `max(1, ceil(log2 N))` bits, each output `O_i` and validity
//! flag `M_i` one bit. The header is padded with zeros to a whole byte and
//! decoding rejects non-zero padding.

use crate::ensemble::{VoteRule, BENIGN, MALICIOUS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainHeader {
    ids: Vec<u16>,
    outputs: Vec<bool>,
    mask: Vec<bool>,
}

/// Width of one id field.
pub fn id_width(n: usize) -> u32 {
    if n <= 2 {
        1
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

pub fn header_bits(n: usize) -> usize {
    n * id_width(n) as usize + 2 * n
}

pub fn header_len(n: usize) -> usize {
    header_bits(n).div_ceil(8)
}

impl ChainHeader {
    /// Fresh header with slot `i` holding learner `i` and nothing filled.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 || n > usize::from(u16::MAX) {
            return Err(Error::Header(format!("unsupported learner count {n}")));
        }
        Ok(Self {
            ids: (0..n as u16).collect(),
            outputs: vec![false; n],
            mask: vec![false; n],
        })
    }

    pub fn from_parts(ids: Vec<u16>, outputs: Vec<bool>, mask: Vec<bool>) -> Result<Self> {
        let h = Self { ids, outputs, mask };
        h.check()?;
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[u16] {
        &self.ids
    }

    pub fn outputs(&self) -> &[bool] {
        &self.outputs
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    pub fn has_result(&self, wl_id: u16) -> bool {
        self.slot_of(wl_id).is_some_and(|s| self.mask[s])
    }

    fn slot_of(&self, wl_id: u16) -> Option<usize> {
        self.ids.iter().position(|&id| id == wl_id)
    }

    fn check(&self) -> Result<()> {
        let n = self.ids.len();
        if n == 0 || self.outputs.len() != n || self.mask.len() != n {
            return Err(Error::Header(format!(
                "field lengths disagree: {} ids, {} outputs, {} mask bits",
                n,
                self.outputs.len(),
                self.mask.len()
            )));
        }
        let width = id_width(n);
        if let Some(&id) = self.ids.iter().find(|&&id| u32::from(id) >> width != 0) {
            return Err(Error::Header(format!("id {id} does not fit in {width} bits")));
        }
        Ok(())
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        self.check()?;
        let n = self.n();
        let width = id_width(n);
        let mut w = BitWriter::with_capacity(header_len(n));
        for &id in &self.ids {
            w.push(u32::from(id), width);
        }
        for &o in &self.outputs {
            w.push(u32::from(o), 1);
        }
        for &m in &self.mask {
            w.push(u32::from(m), 1);
        }
        Ok(w.finish())
    }

    pub fn decode(bytes: &[u8], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Header("learner count must be positive".into()));
        }
        let expected = header_len(n);
        if bytes.len() != expected {
            return Err(Error::Header(format!(
                "expected {expected} bytes for N={n}, got {}",
                bytes.len()
            )));
        }
        let width = id_width(n);
        let mut r = BitReader::new(bytes);
        let ids = (0..n).map(|_| r.take(width) as u16).collect();
        let outputs = (0..n).map(|_| r.take(1) == 1).collect();
        let mask = (0..n).map(|_| r.take(1) == 1).collect();
        let pad = expected * 8 - header_bits(n);
        if r.take(pad as u32) != 0 {
            return Err(Error::Header("non-zero padding bits".into()));
        }
        Self::from_parts(ids, outputs, mask)
    }

    /// Records learner `wl_id`'s vote. Appending twice means two hosts ran
    /// the same learner on one flow, which is a deployment error.
    pub fn append_result(&self, wl_id: u16, vote: u8) -> Result<Self> {
        let slot = self
            .slot_of(wl_id)
            .ok_or_else(|| Error::Header(format!("no slot for learner {wl_id}")))?;
        if self.mask[slot] {
            return Err(Error::DuplicateResult(wl_id));
        }
        let mut next = self.clone();
        next.outputs[slot] = vote == MALICIOUS;
        next.mask[slot] = true;
        Ok(next)
    }

    /// Majority vote once every slot is filled.
    pub fn finalize(&self) -> Result<Verdict> {
        let missing: Vec<u16> = self
            .ids
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| !m)
            .map(|(&id, _)| id)
            .collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteChain(missing));
        }
        let votes: Vec<(u16, u8)> = self
            .ids
            .iter()
            .zip(&self.outputs)
            .map(|(&id, &o)| (id, if o { MALICIOUS } else { BENIGN }))
            .collect();
        let malicious = votes.iter().filter(|(_, v)| *v == MALICIOUS).count();
        Ok(Verdict {
            class: VoteRule::default().decide(malicious, votes.len()),
            votes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub class: u8,
    pub votes: Vec<(u16, u8)>,
}

impl Verdict {
    pub fn is_malicious(&self) -> bool {
        self.class == MALICIOUS
    }
}

struct BitWriter {
    bytes: Vec<u8>,
    used: u32,
}

impl BitWriter {
    fn with_capacity(n: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(n),
            used: 8,
        }
    }

    fn push(&mut self, value: u32, width: u32) {
        for i in (0..width).rev() {
            if self.used == 8 {
                self.bytes.push(0);
                self.used = 0;
            }
            let bit = ((value >> i) & 1) as u8;
            let last = self.bytes.last_mut().expect("pushed above");
            *last |= bit << (7 - self.used);
            self.used += 1;
        }
    }

    fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, width: u32) -> u32 {
        let mut v = 0;
        for _ in 0..width {
            let byte = self.bytes[self.pos / 8];
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | u32::from(bit);
            self.pos += 1;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn widths() {
        assert_eq!(id_width(1), 1);
        assert_eq!(id_width(2), 1);
        assert_eq!(id_width(3), 2);
        assert_eq!(id_width(4), 2);
        assert_eq!(id_width(5), 3);
        assert_eq!(id_width(16), 4);
        assert_eq!(id_width(17), 5);
    }

    #[test]
    fn hand_packed_n3() {
        let h = ChainHeader::from_parts(vec![0, 1, 2], bits(&[1, 0, 1]), bits(&[1, 1, 1])).unwrap();
        assert_eq!(h.encode().unwrap(), vec![0x1A, 0xF0]);
        assert_eq!(ChainHeader::decode(&[0x1A, 0xF0], 3).unwrap(), h);
    }

    #[test]
    fn hand_packed_n1() {
        let h = ChainHeader::from_parts(vec![0], bits(&[1]), bits(&[1])).unwrap();
        assert_eq!(h.encode().unwrap(), vec![0x60]);
    }

    #[test]
    fn decode_errors() {
        assert!(ChainHeader::decode(&[0xFF], 3).is_err());
        assert!(matches!(ChainHeader::decode(&[0x1A, 0xF1], 3), Err(Error::Header(_))));
        assert!(ChainHeader::decode(&[0x60, 0x00], 1).is_err());
    }

    #[test]
    fn oversized_id() {
        let h = ChainHeader::from_parts(vec![0, 4, 2], bits(&[0, 0, 0]), bits(&[0, 0, 0]));
        assert!(h.is_err());
    }

    #[test]
    fn append_and_finalize() {
        let h = ChainHeader::empty(3).unwrap().append_result(1, 1).unwrap();
        assert_eq!(h.mask(), &bits(&[0, 1, 0])[..]);
        assert!(h.outputs()[1]);
        assert!(matches!(h.append_result(1, 0), Err(Error::DuplicateResult(1))));
        assert!(matches!(h.finalize(), Err(Error::IncompleteChain(ref m)) if m == &[0, 2]));

        let full = h.append_result(0, 1).unwrap().append_result(2, 0).unwrap();
        assert!(full.is_complete());
        assert!(full.finalize().unwrap().is_malicious());

        let benign = ChainHeader::empty(3)
            .unwrap()
            .append_result(0, 0)
            .unwrap()
            .append_result(1, 0)
            .unwrap()
            .append_result(2, 0)
            .unwrap();
        assert_eq!(benign.finalize().unwrap().class, BENIGN);
    }

    #[test]
    fn unknown_learner() {
        assert!(ChainHeader::empty(2).unwrap().append_result(5, 1).is_err());
    }
}
