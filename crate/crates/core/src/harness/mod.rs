//! Protocol simulation, transcripts and distinguishing experiments.

pub mod experiment;
pub mod protocol;
pub mod stats;
pub mod transcript;
pub mod transport;
pub mod view;

pub use experiment::{run_experiment, Expectation, ExperimentReport, ExperimentSpec, Mode, Statistic};
pub use protocol::{run_protocol, Hypothesis, SchemeConfig};
pub use transcript::{Actor, Event, Label, Transcript};
pub use view::{extract_view, ViewItem};
