//! Message transport between actors.
//!
//! [`Network`] is an in-memory queue per receiver. Every send is stamped with
//! a global sequence number at enqueue and appended to the transcript, so the
//! transcript order is total even when senders run on different threads.
//! The TCP helpers carry the same event bytes in length-prefixed frames.

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};
use std::sync::Mutex;

use super::transcript::{Actor, Event, Label, Transcript};
use crate::error::{Error, Result};

#[derive(Default)]
struct State {
    next_seq: u64,
    queues: HashMap<Actor, VecDeque<Event>>,
    log: Transcript,
}

#[derive(Default)]
pub struct Network {
    state: Mutex<State>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(&self, round: u32, sender: Actor, receiver: Actor, label: Label, payload: Vec<u8>) -> u64 {
        self.stamp(round, sender, receiver, label, payload, true)
    }

    /// Logs an event without delivering it, such as a final output.
    pub fn record(&self, round: u32, sender: Actor, receiver: Actor, label: Label, payload: Vec<u8>) -> u64 {
        self.stamp(round, sender, receiver, label, payload, false)
    }

    fn stamp(&self, round: u32, sender: Actor, receiver: Actor, label: Label, payload: Vec<u8>, deliver: bool) -> u64 {
        let mut st = self.state.lock().expect("network lock poisoned");
        let seq = st.next_seq;
        st.next_seq += 1;
        let event = Event {
            seq,
            round,
            sender,
            receiver,
            label,
            payload,
        };
        if deliver {
            st.queues.entry(receiver).or_default().push_back(event.clone());
        }
        st.log.push(event);
        seq
    }

    pub fn recv(&self, receiver: Actor) -> Option<Event> {
        self.state
            .lock()
            .expect("network lock poisoned")
            .queues
            .get_mut(&receiver)?
            .pop_front()
    }

    /// Removes every pending event for `receiver`.
    pub fn drain(&self, receiver: Actor) -> Vec<Event> {
        self.state
            .lock()
            .expect("network lock poisoned")
            .queues
            .get_mut(&receiver)
            .map(|q| q.drain(..).collect())
            .unwrap_or_default()
    }

    pub fn transcript(&self) -> Transcript {
        self.state.lock().expect("network lock poisoned").log.clone()
    }

    pub fn into_transcript(self) -> Transcript {
        self.state.into_inner().expect("network lock poisoned").log
    }
}

/// Largest accepted frame body.
pub const MAX_FRAME: usize = 1 << 26;

/// Writes `len(payload)` as 4 big-endian bytes, then the payload.
pub fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> Result<()> {
    let len = u32::try_from(payload.len())
        .ok()
        .filter(|&l| l as usize <= MAX_FRAME)
        .ok_or_else(|| Error::Io(format!("frame of {} bytes too large", payload.len())))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(payload)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; `None` on a clean end of stream.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(Error::Io(format!("frame of {len} bytes too large")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(Some(buf))
}

pub fn send_event<W: Write>(w: &mut W, event: &Event) -> Result<()> {
    write_frame(w, &event.to_bytes())
}

pub fn recv_event<R: Read>(r: &mut R) -> Result<Option<Event>> {
    read_frame(r)?.map(|b| Event::from_bytes(&b)).transpose()
}
