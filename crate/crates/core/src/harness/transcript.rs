use std::fmt;

use serde::{Deserialize, Serialize};

use crate::encoding::Decoder;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    Dealer,
    /// Supplies party inputs and evaluation points.
    Environment,
    Party(u16),
    Carol,
    Reconstructor,
}

impl Actor {
    fn code(self) -> (u8, u16) {
        match self {
            Self::Dealer => (0, 0),
            Self::Environment => (1, 0),
            Self::Party(i) => (2, i),
            Self::Carol => (3, 0),
            Self::Reconstructor => (4, 0),
        }
    }

    fn from_code(kind: u8, i: u16) -> Result<Self> {
        Ok(match kind {
            0 => Self::Dealer,
            1 => Self::Environment,
            2 => Self::Party(i),
            3 => Self::Carol,
            4 => Self::Reconstructor,
            k => return Err(Error::Decode(format!("unknown actor kind {k}"))),
        })
    }
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dealer => f.write_str("dealer"),
            Self::Environment => f.write_str("env"),
            Self::Party(i) => write!(f, "P{i}"),
            Self::Carol => f.write_str("carol"),
            Self::Reconstructor => f.write_str("rec"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Key,
    Input,
    Share,
    Message,
    Output,
    Error,
}

impl Label {
    const ALL: [Self; 6] = [Self::Key, Self::Input, Self::Share, Self::Message, Self::Output, Self::Error];

    fn code(self) -> u8 {
        Self::ALL.iter().position(|&l| l == self).expect("listed") as u8
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    /// Protocol step the event belongs to: 0 for dealing, `h` for the h-th run.
    pub round: u32,
    pub sender: Actor,
    pub receiver: Actor,
    pub label: Label,
    #[serde(with = "hex::serde")]
    pub payload: Vec<u8>,
}

impl Event {
    /// Canonical bytes: seq, round, actors, label, then the length-prefixed payload.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(23 + self.payload.len());
        out.extend_from_slice(&self.seq.to_le_bytes());
        out.extend_from_slice(&self.round.to_le_bytes());
        for actor in [self.sender, self.receiver] {
            let (kind, i) = actor.code();
            out.push(kind);
            out.extend_from_slice(&i.to_le_bytes());
        }
        out.push(self.label.code());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        let event = Self::read(&mut d)?;
        d.finish()?;
        Ok(event)
    }

    fn read(d: &mut Decoder<'_>) -> Result<Self> {
        let seq = d.u64()?;
        let round = d.u32()?;
        let sender = Actor::from_code(d.u8()?, d.u16()?)?;
        let receiver = Actor::from_code(d.u8()?, d.u16()?)?;
        let label = *Label::ALL
            .get(d.u8()? as usize)
            .ok_or_else(|| Error::Decode("unknown label".into()))?;
        let len = d.u32()? as usize;
        let payload = d.take(len)?.to_vec();
        Ok(Self {
            seq,
            round,
            sender,
            receiver,
            label,
            payload,
        })
    }
}

/// An append-only, totally ordered event log.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, event: Event) {
        debug_assert!(self.events.last().is_none_or(|e| e.seq < event.seq));
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn last(&self) -> Option<&Event> {
        self.events.last()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.events.iter().flat_map(|e| e.to_bytes()).collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        let mut events = Vec::new();
        while !d.is_empty() {
            events.push(Event::read(&mut d)?);
        }
        Ok(Self { events })
    }

    pub fn errors(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.label == Label::Error)
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(
                f,
                "{:>4} r{:<3} {:>6} -> {:<6} {:<8} {}",
                e.seq,
                e.round,
                e.sender.to_string(),
                e.receiver.to_string(),
                format!("{:?}", e.label).to_lowercase(),
                if e.label == Label::Error {
                    String::from_utf8_lossy(&e.payload).into_owned()
                } else {
                    hex::encode(&e.payload)
                }
            )?;
        }
        Ok(())
    }
}
