//! Adversary views: canonical byte strings cut out of a transcript.

use serde::{Deserialize, Serialize};

use super::transcript::{Actor, Event, Label, Transcript};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "item", rename_all = "snake_case", deny_unknown_fields)]
pub enum ViewItem {
    /// The whole transcript.
    All,
    /// The key dealt to a party.
    Key { party: u16 },
    /// Every input the environment handed to a party.
    Input { party: u16 },
    /// Evaluation shares a party sent to the reconstructor; all rounds when absent.
    EvalShares {
        party: u16,
        #[serde(default)]
        rounds: Option<Vec<u32>>,
    },
    /// Messages a party sent to Carol; all runs when absent.
    CarolMessages {
        party: u16,
        #[serde(default)]
        runs: Option<Vec<u32>>,
    },
    /// Final outputs and error events.
    Output,
}

fn in_rounds(rounds: &Option<Vec<u32>>, e: &Event) -> bool {
    rounds.as_ref().is_none_or(|r| r.contains(&e.round))
}

impl ViewItem {
    fn matches(&self, e: &Event) -> bool {
        match self {
            Self::All => true,
            Self::Key { party } => e.label == Label::Key && e.receiver == Actor::Party(*party),
            Self::Input { party } => e.label == Label::Input && e.receiver == Actor::Party(*party),
            Self::EvalShares { party, rounds } => {
                e.label == Label::Share && e.sender == Actor::Party(*party) && in_rounds(rounds, e)
            }
            Self::CarolMessages { party, runs } => {
                e.label == Label::Message
                    && e.sender == Actor::Party(*party)
                    && e.receiver == Actor::Carol
                    && in_rounds(runs, e)
            }
            Self::Output => matches!(e.label, Label::Output | Label::Error),
        }
    }

    fn expected(&self) -> Option<usize> {
        match self {
            Self::EvalShares { rounds: Some(r), .. } | Self::CarolMessages { runs: Some(r), .. } => Some(r.len()),
            _ => None,
        }
    }
}

/// Concatenates, per item in order, `u32 LE length || payload` of each
/// selected event. `All` contributes the full transcript bytes.
pub fn extract_view(transcript: &Transcript, items: &[ViewItem]) -> Result<Vec<u8>> {
    if items.is_empty() {
        return Err(Error::SelectorOutOfRange("empty selector".into()));
    }
    let mut out = Vec::new();
    for item in items {
        if *item == ViewItem::All {
            out.extend(transcript.to_bytes());
            continue;
        }
        let selected: Vec<&Event> = transcript.events().iter().filter(|e| item.matches(e)).collect();
        if selected.is_empty() || item.expected().is_some_and(|n| n != selected.len()) {
            return Err(Error::SelectorOutOfRange(format!("{item:?} matches {} events", selected.len())));
        }
        for e in selected {
            out.extend_from_slice(&(e.payload.len() as u32).to_le_bytes());
            out.extend_from_slice(&e.payload);
        }
    }
    Ok(out)
}

/// Splits a view built from event items back into payloads.
pub fn view_records(view: &[u8]) -> Result<Vec<&[u8]>> {
    let mut rest = view;
    let mut records = Vec::new();
    while !rest.is_empty() {
        let (len, tail) = rest
            .split_first_chunk::<4>()
            .ok_or_else(|| Error::Decode("truncated view record".into()))?;
        let len = u32::from_le_bytes(*len) as usize;
        if tail.len() < len {
            return Err(Error::Decode("truncated view record".into()));
        }
        let (record, tail) = tail.split_at(len);
        records.push(record);
        rest = tail;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::protocol::{run_protocol, DpfConfig, EvalPoint, SchemeConfig};

    fn nn() -> SchemeConfig {
        SchemeConfig::DpfNn(DpfConfig {
            q: 101,
            ell: 2,
            lambda: 1,
            n: 3,
            t: None,
            key_dim: None,
            master_seed: None,
            a: "01".into(),
            alpha: 7,
            evals: vec![
                EvalPoint { x: "01".into(), r: None },
                EvalPoint { x: "11".into(), r: None },
            ],
            responders: None,
            r_len: 8,
        })
    }

    #[test]
    fn all_is_the_transcript() {
        let t = run_protocol(&nn(), [1; 32]).unwrap();
        assert_eq!(extract_view(&t, &[ViewItem::All]).unwrap(), t.to_bytes());
    }

    #[test]
    fn key_and_two_evals_of_one_party() {
        let t = run_protocol(&nn(), [1; 32]).unwrap();
        let items = [
            ViewItem::Key { party: 1 },
            ViewItem::EvalShares { party: 1, rounds: Some(vec![1, 2]) },
        ];
        let view = extract_view(&t, &items).unwrap();
        let records = view_records(&view).unwrap();
        let key = &t.events().iter().find(|e| e.label == Label::Key && e.receiver == Actor::Party(1)).unwrap().payload;
        let shares: Vec<&Vec<u8>> = t
            .events()
            .iter()
            .filter(|e| e.label == Label::Share && e.sender == Actor::Party(1))
            .map(|e| &e.payload)
            .collect();
        assert_eq!(records, vec![&key[..], &shares[0][..], &shares[1][..]]);
        let again = extract_view(&run_protocol(&nn(), [1; 32]).unwrap(), &items).unwrap();
        assert_eq!(view, again);
    }

    #[test]
    fn selectors_must_match() {
        let t = run_protocol(&nn(), [1; 32]).unwrap();
        for bad in [
            vec![ViewItem::Key { party: 4 }],
            vec![ViewItem::EvalShares { party: 1, rounds: Some(vec![3]) }],
            vec![ViewItem::CarolMessages { party: 1, runs: None }],
            vec![],
        ] {
            assert!(matches!(extract_view(&t, &bad), Err(Error::SelectorOutOfRange(_))), "{bad:?}");
        }
    }

    #[test]
    fn selector_json() {
        let items: Vec<ViewItem> =
            serde_json::from_str(r#"[{"item":"key","party":1},{"item":"eval_shares","party":2,"rounds":[1]}]"#).unwrap();
        assert_eq!(items[1], ViewItem::EvalShares { party: 2, rounds: Some(vec![1]) });
    }
}
