//! Machine-readable run reports.
//!
//! Every real is written with 17 significant digits, enough to re-parse to
//! the identical `f64`.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::bounds::{BoundReport, SweepSummary};
use crate::coherence::{ScullyBound, ScullyParams};
use crate::decomposition::{effective_temperature, ChannelKind, ReservoirRole, TransitionChannel};
use crate::engine::{HeatReport, SignCase, Tuple};
use crate::model::{Level, Stationarity};
use crate::oracle::OracleComparison;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
}

impl RunMeta {
    pub fn new(command: &str, inputs: Vec<String>, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// One row of a channel table. Non-finite values are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRow {
    pub hi: usize,
    pub lo: usize,
    pub delta_e: f64,
    pub p_hi: f64,
    pub p_lo: f64,
    pub kind: ChannelKind,
    pub log_ratio: Option<f64>,
    pub temperature: Option<f64>,
}

impl ChannelRow {
    pub fn from_channel(c: &TransitionChannel) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        Self {
            hi: c.hi,
            lo: c.lo,
            delta_e: c.delta_e,
            p_hi: c.p_hi,
            p_lo: c.p_lo,
            kind: c.kind,
            log_ratio: finite(c.log_ratio),
            temperature: effective_temperature(c).ok().and_then(finite),
        }
    }

    /// Temperature column for tables: the value or a sentinel.
    pub fn temperature_text(&self) -> String {
        match (self.kind, self.temperature) {
            (ChannelKind::InfiniteTemp, _) => "+INF".into(),
            (ChannelKind::Inert, _) => "INERT".into(),
            (ChannelKind::Undefined, _) => "UNDEFINED".into(),
            (_, Some(t)) => format!("{t:.6e}"),
            (_, None) => "-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub label: String,
    pub stationarity: Stationarity,
    pub levels: Vec<Level>,
    pub role: ReservoirRole,
    pub channels: Vec<ChannelRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignRow {
    pub tuple: Tuple,
    pub case: SignCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub heat: HeatReport,
    pub signs: Vec<SignRow>,
    pub extracting_efficiency: Option<f64>,
    pub bound: BoundReport,
    /// `Some(false)` when the efficiency exceeds an applicable bound.
    pub within_bound: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub bound: BoundReport,
    pub sweep: SweepSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub comparison: OracleComparison,
    /// Largest first-order rate magnitude over the sampled times.
    pub first_order_max: f64,
    pub first_order_samples: usize,
    pub first_order_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scully {
    pub params: ScullyParams,
    pub bound: ScullyBound,
    pub hot_channels: Vec<ChannelRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentPair {
    pub sigma: f64,
    pub channels: Vec<ChannelRow>,
    pub entropy_gap: f64,
    pub hot_temperature: Option<f64>,
    pub pairs: u64,
    pub max_extractable_work: Option<f64>,
    pub bound: Option<BoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Decomposition(Decomposition),
    Bound(BoundReport),
    Simulation(Simulation),
    Verification(Verification),
    Oracle(OracleRun),
    Scully(Scully),
    CoherentPair(CoherentPair),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub meta: RunMeta,
    pub payload: Payload,
}

/// Pretty JSON formatter that writes floats with 17 significant digits.
struct ExactFloats<'a>(serde_json::ser::PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// Serializes any value with [`ExactFloats`] formatting.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).expect("reports contain only finite reals");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
