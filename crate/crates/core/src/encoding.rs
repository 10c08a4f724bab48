//! Segment-based binary encoding shared by every key and share format.
//!
//! An [`Encoded`] value is an ordered list of named segments. The binary form
//! is their concatenation; the JSON-hex form lists the same segments with hex
//! bodies, so both carry identical bytes. Segments are tagged as payload or
//! framing, which lets size audits count only the bytes that carry key material.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldVector, PrimeField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Payload,
    Framing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub kind: SegmentKind,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Encoded {
    segments: Vec<Segment>,
}

#[derive(Serialize, Deserialize)]
struct JsonField {
    name: String,
    kind: SegmentKind,
    hex: String,
}

#[derive(Serialize, Deserialize)]
struct JsonDoc {
    format: String,
    fields: Vec<JsonField>,
}

impl Encoded {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.segments.iter().flat_map(|s| s.bytes.iter().copied()).collect()
    }

    /// Bytes in payload segments.
    pub fn payload_bytes(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| s.kind == SegmentKind::Payload)
            .map(|s| s.bytes.len())
            .sum()
    }

    /// Payload bytes in segments whose name starts with `prefix`.
    pub fn payload_bytes_named(&self, prefix: &str) -> usize {
        self.segments
            .iter()
            .filter(|s| s.kind == SegmentKind::Payload && s.name.starts_with(prefix))
            .map(|s| s.bytes.len())
            .sum()
    }

    pub fn to_json_hex(&self, format: &str) -> String {
        let doc = JsonDoc {
            format: format.to_string(),
            fields: self
                .segments
                .iter()
                .map(|s| JsonField {
                    name: s.name.clone(),
                    kind: s.kind,
                    hex: hex::encode(&s.bytes),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    /// Reassembles the binary form from a JSON-hex document.
    pub fn json_hex_to_bytes(json: &str) -> Result<Vec<u8>> {
        let doc: JsonDoc =
            serde_json::from_str(json).map_err(|e| Error::Decode(format!("json-hex: {e}")))?;
        let mut out = Vec::new();
        for f in doc.fields {
            let bytes = hex::decode(&f.hex)
                .map_err(|e| Error::Decode(format!("field {}: {e}", f.name)))?;
            out.extend(bytes);
        }
        Ok(out)
    }
}

/// Builds an [`Encoded`] value one named segment at a time.
#[derive(Default)]
pub struct Encoder {
    out: Encoded,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn segment(&mut self, name: impl Into<String>, kind: SegmentKind, bytes: Vec<u8>) -> &mut Self {
        self.out.segments.push(Segment {
            name: name.into(),
            kind,
            bytes,
        });
        self
    }

    pub fn framing(&mut self, name: impl Into<String>, bytes: Vec<u8>) -> &mut Self {
        self.segment(name, SegmentKind::Framing, bytes)
    }

    pub fn payload(&mut self, name: impl Into<String>, bytes: Vec<u8>) -> &mut Self {
        self.segment(name, SegmentKind::Payload, bytes)
    }

    pub fn element(&mut self, name: impl Into<String>, x: FieldElement) -> &mut Self {
        let bytes = x.field().encode(x);
        self.payload(name, bytes)
    }

    /// A vector as a framing length prefix followed by its payload coordinates.
    pub fn vector(&mut self, name: impl Into<String>, v: &FieldVector) -> &mut Self {
        let name = name.into();
        self.framing(format!("{name}.len"), (v.dim() as u32).to_le_bytes().to_vec());
        let mut body = Vec::new();
        v.encode_into(&mut body);
        self.payload(name, body)
    }

    /// A bit string of known length, packed MSB first.
    pub fn bits(&mut self, name: impl Into<String>, b: &BitString, kind: SegmentKind) -> &mut Self {
        self.segment(name, kind, b.packed())
    }

    pub fn finish(self) -> Encoded {
        self.out
    }
}

/// Cursor over a binary encoding.
pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Decode(format!("truncated input at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn expect_magic(&mut self, magic: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != magic {
            return Err(Error::Decode(format!(
                "expected magic {:?}, found {:?}",
                String::from_utf8_lossy(magic),
                String::from_utf8_lossy(got)
            )));
        }
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn u64_be(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn array32(&mut self) -> Result<[u8; 32]> {
        Ok(self.take(32)?.try_into().expect("32 bytes"))
    }

    pub fn element(&mut self, field: PrimeField) -> Result<FieldElement> {
        let bytes = self.take(field.byte_len())?;
        field.decode(bytes)
    }

    pub fn vector(&mut self, field: PrimeField) -> Result<FieldVector> {
        let dim = self.u32()? as usize;
        let remaining = self.buf.len() - self.pos;
        if dim.saturating_mul(field.byte_len()) > remaining {
            return Err(Error::Decode(format!("vector of length {dim} exceeds input")));
        }
        let coords = (0..dim)
            .map(|_| self.element(field))
            .collect::<Result<Vec<_>>>()?;
        FieldVector::new(field, coords)
    }

    /// A vector whose length is fixed by context.
    pub fn vector_of(&mut self, field: PrimeField, dim: usize) -> Result<FieldVector> {
        let v = self.vector(field)?;
        if v.dim() != dim {
            return Err(Error::Decode(format!("expected vector of length {dim}, got {}", v.dim())));
        }
        Ok(v)
    }

    pub fn bits(&mut self, len: usize) -> Result<BitString> {
        let bytes = self.take(len.div_ceil(8))?;
        BitString::from_packed(bytes, len)
    }

    pub fn is_empty(&self) -> bool {
        self.pos == self.buf.len()
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Decode(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

/// Types with a self-describing binary file format.
pub trait Codec: Sized {
    /// Name written into the JSON-hex `format` field.
    const FORMAT: &'static str;

    fn encode(&self) -> Encoded;

    fn decode(bytes: &[u8]) -> Result<Self>;

    fn to_bytes(&self) -> Vec<u8> {
        self.encode().to_bytes()
    }

    fn to_json_hex(&self) -> String {
        self.encode().to_json_hex(Self::FORMAT)
    }

    fn from_json_hex(json: &str) -> Result<Self> {
        Self::decode(&Encoded::json_hex_to_bytes(json)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_hex_mirrors_binary() {
        let f = PrimeField::new(257).unwrap();
        let mut e = Encoder::new();
        e.framing("magic", b"TEST".to_vec())
            .element("x", f.element(256))
            .vector("v", &FieldVector::from_values(f, &[1, 2, 3]));
        let enc = e.finish();
        assert_eq!(enc.payload_bytes(), 2 + 6);
        let bin = enc.to_bytes();
        assert_eq!(Encoded::json_hex_to_bytes(&enc.to_json_hex("test")).unwrap(), bin);

        let mut d = Decoder::new(&bin);
        d.expect_magic(b"TEST").unwrap();
        assert_eq!(d.element(f).unwrap(), f.element(256));
        assert_eq!(d.vector(f).unwrap(), FieldVector::from_values(f, &[1, 2, 3]));
        d.finish().unwrap();
    }

    #[test]
    fn truncation_is_an_error() {
        let mut d = Decoder::new(&[1, 2, 3]);
        assert!(d.u32().is_err());
        let mut d = Decoder::new(&[0xff, 0xff, 0xff, 0xff]);
        assert!(d.vector(PrimeField::new(5).unwrap()).is_err());
    }
}
