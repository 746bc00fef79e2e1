//! Bit strings, documents and histories.
//!
//! Every object that travels over a channel (keys, messages, ciphertexts,
//! signatures, hidden messages) is a [`Bits`]: a big-endian packed bit
//! string whose unused trailing bits are always zero, so that derived
//! equality and ordering are bit-exact.

use std::fmt;

use rand::RngCore;

use crate::error::{Error, Result};

/// A bit string of arbitrary length, most significant bit first.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    bytes: Vec<u8>,
    len: usize,
}

/// A channel document.
pub type Document = Bits;

fn byte_len(bits: usize) -> usize {
    bits.div_ceil(8)
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            bytes: vec![0; byte_len(len)],
            len,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a bit string from packed bytes. Padding bits past `len` are cleared.
    pub fn from_bytes(mut bytes: Vec<u8>, len: usize) -> Result<Self> {
        if bytes.len() != byte_len(len) {
            return Err(Error::LengthMismatch {
                what: "packed bytes",
                expected: byte_len(len) * 8,
                actual: bytes.len() * 8,
            });
        }
        mask_tail(&mut bytes, len);
        Ok(Bits { bytes, len })
    }

    /// Whole bytes, `8 * bytes.len()` bits.
    pub fn from_byte_slice(bytes: &[u8]) -> Self {
        Bits {
            bytes: bytes.to_vec(),
            len: bytes.len() * 8,
        }
    }

    /// The low `len` bits of `value`, written most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut out = Bits::zeros(len);
        for i in 0..len {
            let bit = (value >> (len - 1 - i)) & 1 == 1;
            out.set(i, bit);
        }
        out
    }

    /// Leading `len` bits of `bytes`.
    pub fn from_prefix(bytes: &[u8], len: usize) -> Self {
        assert!(len <= bytes.len() * 8, "prefix longer than input");
        let mut v = bytes[..byte_len(len)].to_vec();
        mask_tail(&mut v, len);
        Bits { bytes: v, len }
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0u8; byte_len(len)];
        rng.fill_bytes(&mut bytes);
        mask_tail(&mut bytes, len);
        Bits { bytes, len }
    }

    pub fn from_hex(hex_str: &str, len: usize) -> Result<Self> {
        let bytes = hex::decode(hex_str).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_bytes(bytes, len)
    }

    pub fn from_bit_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut out = Bits::empty();
        for b in iter {
            out.push(b);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed payload bytes, zero-padded to a byte boundary.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.bytes[i / 8] >> (7 - i % 8) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u8 << (7 - i % 8);
        if bit {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Interprets the (at most 64) bits as an unsigned big-endian integer.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits");
        self.iter().fold(0u64, |acc, b| (acc << 1) | b as u64)
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        if self.len.is_multiple_of(8) {
            let mut bytes = self.bytes.clone();
            bytes.extend_from_slice(&other.bytes);
            return Bits {
                bytes,
                len: self.len + other.len,
            };
        }
        let mut out = self.clone();
        for b in other.iter() {
            out.push(b);
        }
        out
    }

    pub fn slice(&self, start: usize, len: usize) -> Bits {
        assert!(start + len <= self.len, "slice out of range");
        if start.is_multiple_of(8) {
            return Bits::from_prefix(&self.bytes[start / 8..], len);
        }
        Bits::from_bit_iter((start..start + len).map(|i| self.get(i)))
    }

    pub fn xor(&self, other: &Bits) -> Result<Bits> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                what: "xor operand",
                expected: self.len,
                actual: other.len,
            });
        }
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(Bits {
            bytes,
            len: self.len,
        })
    }

    /// Enumerates all `2^len` strings of the given length in counting order.
    pub fn all(len: usize) -> impl Iterator<Item = Bits> {
        assert!(len <= 24, "refusing to enumerate 2^{len} strings");
        (0..1u64 << len).map(move |v| Bits::from_u64(v, len))
    }
}

fn mask_tail(bytes: &mut [u8], len: usize) {
    let rem = len % 8;
    if rem != 0 {
        if let Some(last) = bytes.last_mut() {
            *last &= 0xffu8 << (8 - rem);
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({}:{})", self.len, self.to_hex())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 32 {
            for b in self.iter() {
                f.write_str(if b { "1" } else { "0" })?;
            }
            Ok(())
        } else {
            write!(f, "{}", self.to_hex())
        }
    }
}

/// An ordered sequence of documents previously sent on a channel.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct History {
    docs: Vec<Document>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_docs(docs: Vec<Document>) -> Self {
        History { docs }
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn push(&mut self, doc: Document) {
        self.docs.push(doc);
    }

    pub fn extended(&self, doc: Document) -> History {
        let mut h = self.clone();
        h.push(doc);
        h
    }

    /// Self-delimiting binary form: for every document a 32-bit big-endian
    /// bit length followed by its payload, zero-padded to a byte boundary.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for d in &self.docs {
            out.extend_from_slice(&(d.len() as u32).to_be_bytes());
            out.extend_from_slice(d.as_bytes());
        }
        out
    }

    pub fn decode(mut bytes: &[u8]) -> Result<History> {
        let mut docs = Vec::new();
        while !bytes.is_empty() {
            if bytes.len() < 4 {
                return Err(Error::Malformed("truncated length prefix".into()));
            }
            let len = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
            bytes = &bytes[4..];
            let n = byte_len(len);
            if bytes.len() < n {
                return Err(Error::Malformed(format!(
                    "document of {len} bits needs {n} bytes, {} left",
                    bytes.len()
                )));
            }
            let payload = bytes[..n].to_vec();
            let rem = len % 8;
            if rem != 0 && payload[n - 1] & (0xff >> rem) != 0 {
                return Err(Error::Malformed("non-zero padding bits".into()));
            }
            docs.push(Bits::from_bytes(payload, len)?);
            bytes = &bytes[n..];
        }
        Ok(History { docs })
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.encode())
    }

    pub fn from_hex(s: &str) -> Result<History> {
        let bytes = hex::decode(s).map_err(|e| Error::Malformed(e.to_string()))?;
        History::decode(&bytes)
    }
}

impl From<Vec<Document>> for History {
    fn from(docs: Vec<Document>) -> Self {
        History { docs }
    }
}
