//! Second-order heat flows for an engine coupling two diagonal reservoirs.
//!
//! With hot levels `m, n` and cold levels `p, q`, every canonical tuple
//! (`E_hot[m] > E_hot[n]`) contributes
//!
//! ```text
//! Q_hot  += lambda^2 w (p_m p_p - p_n p_q) (E_hot[m] - E_hot[n])
//! Q_cold += lambda^2 w (p_m p_p - p_n p_q) (E_cold[p] - E_cold[q])
//! ```
//!
//! where `w = |M|^2` is the weight of the tuple. Positive heat is heat
//! extracted from the reservoir.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiagonalReservoir;
use crate::sum::NeumaierSum;

/// Index 4-tuple: hot transition `m -> n`, cold transition `p -> q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tuple {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

impl Tuple {
    pub const fn new(m: usize, n: usize, p: usize, q: usize) -> Self {
        Self { m, n, p, q }
    }
}

/// Engine as squared magnitudes of the time-integrated coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingOperator {
    entries: BTreeMap<Tuple, f64>,
    lambda: f64,
}

impl CouplingOperator {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Invalid {
                field: "lambda",
                reason: format!("coupling strength must be positive and finite, got {lambda}"),
            });
        }
        Ok(Self {
            entries: BTreeMap::new(),
            lambda,
        })
    }

    /// Sets the weight of a tuple, replacing any previous value.
    pub fn insert(&mut self, tuple: Tuple, weight: f64) -> Result<()> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::Invalid {
                field: "weight",
                reason: format!("weight must be nonnegative and finite, got {weight}"),
            });
        }
        self.entries.insert(tuple, weight);
        Ok(())
    }

    pub fn with_entry(mut self, tuple: Tuple, weight: f64) -> Result<Self> {
        self.insert(tuple, weight)?;
        Ok(self)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Entries in sorted tuple order.
    pub fn entries(&self) -> impl Iterator<Item = (Tuple, f64)> + '_ {
        self.entries.iter().map(|(t, w)| (*t, *w))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks index ranges and the canonical `E_hot[m] > E_hot[n]` order.
    pub fn validate(&self, hot: &DiagonalReservoir, cold: &DiagonalReservoir) -> Result<()> {
        self.entries.keys().try_for_each(|&t| check_tuple(hot, cold, t))
    }
}

pub(crate) fn check_tuple(hot: &DiagonalReservoir, cold: &DiagonalReservoir, t: Tuple) -> Result<()> {
    let Tuple { m, n, p, q } = t;
    if m >= hot.len() || n >= hot.len() || p >= cold.len() || q >= cold.len() {
        return Err(Error::IndexOutOfRange { m, n, p, q });
    }
    if !(hot.energy(m) > hot.energy(n)) {
        return Err(Error::NotCanonical { m, n, p, q });
    }
    Ok(())
}

/// Flux factor and energy gaps of one tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TupleTerms {
    pub flux: f64,
    pub hot_gap: f64,
    pub cold_gap: f64,
}

#[inline]
pub(crate) fn tuple_terms(hot: &DiagonalReservoir, cold: &DiagonalReservoir, t: Tuple) -> TupleTerms {
    let Tuple { m, n, p, q } = t;
    TupleTerms {
        flux: hot.population(m) * cold.population(p) - hot.population(n) * cold.population(q),
        hot_gap: hot.energy(m) - hot.energy(n),
        cold_gap: cold.energy(p) - cold.energy(q),
    }
}

/// Every canonical tuple for a reservoir pair, sorted.
///
/// Hot pairs need `E[m] > E[n]`; cold pairs range over all ordered `(p, q)`,
/// including `p == q`.
pub fn canonical_tuples(hot: &DiagonalReservoir, cold: &DiagonalReservoir) -> Vec<Tuple> {
    let mut out = Vec::new();
    for m in 0..hot.len() {
        for n in 0..hot.len() {
            if hot.energy(m) > hot.energy(n) {
                for p in 0..cold.len() {
                    for q in 0..cold.len() {
                        out.push(Tuple { m, n, p, q });
                    }
                }
            }
        }
    }
    out
}

/// Contribution of one tuple to the totals (already scaled by lambda^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelContribution {
    pub tuple: Tuple,
    pub weight: f64,
    /// `p_m p_p - p_n p_q`.
    pub flux: f64,
    pub q_hot: f64,
    pub q_cold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatReport {
    pub q_hot: f64,
    pub q_cold: f64,
    /// `q_hot + q_cold`.
    pub work: f64,
    /// `work / q_hot`, or `None` when no heat is extracted from the hot side.
    pub efficiency: Option<f64>,
    pub channels: Vec<ChannelContribution>,
}

impl HeatReport {
    /// Efficiency restricted to the channels with positive flux factor.
    ///
    /// Backflow channels (negative flux) are dropped from both sums. This is
    /// the quantity the extremal-temperature argument bounds term by term.
    pub fn extracting_efficiency(&self) -> Option<f64> {
        let mut qh = NeumaierSum::new();
        let mut qc = NeumaierSum::new();
        for c in self.channels.iter().filter(|c| c.flux > 0.0) {
            qh.add(c.q_hot);
            qc.add(c.q_cold);
        }
        let qh = qh.value();
        (qh > 0.0).then(|| (qh + qc.value()) / qh)
    }
}

pub(crate) fn efficiency_of(q_hot: f64, work: f64) -> Option<f64> {
    (q_hot > 0.0).then(|| work / q_hot)
}

/// Heat flows, work and efficiency of `engine` between `hot` and `cold`.
///
/// Contributions are accumulated in sorted tuple order with compensated
/// summation, so the result does not depend on how the engine was built.
pub fn heat_flows(hot: &DiagonalReservoir, cold: &DiagonalReservoir, engine: &CouplingOperator) -> Result<HeatReport> {
    engine.validate(hot, cold)?;
    let scale = engine.lambda() * engine.lambda();
    let channels: Vec<ChannelContribution> = engine
        .entries()
        .map(|(tuple, weight)| {
            let terms = tuple_terms(hot, cold, tuple);
            let base = scale * weight * terms.flux;
            ChannelContribution {
                tuple,
                weight,
                flux: terms.flux,
                q_hot: base * terms.hot_gap,
                q_cold: base * terms.cold_gap,
            }
        })
        .collect();
    let q_hot = channels.iter().map(|c| c.q_hot).collect::<NeumaierSum>().value();
    let q_cold = channels.iter().map(|c| c.q_cold).collect::<NeumaierSum>().value();
    let work = q_hot + q_cold;
    Ok(HeatReport {
        q_hot,
        q_cold,
        work,
        efficiency: efficiency_of(q_hot, work),
        channels,
    })
}

/// Sign pattern of a single tuple's heat contributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SignCase {
    /// Heat taken from the hot side, none taken from the cold side, net work out.
    Extracting,
    /// Anything that does not produce work.
    Dissipating,
    /// Heat taken from both reservoirs.
    ForbiddenBothPositive,
    /// Heat taken from the cold side, deposited into the hot side, net work out.
    ForbiddenReversed,
}

pub fn sign_case(c: &ChannelContribution) -> SignCase {
    let work = c.q_hot + c.q_cold;
    if c.q_hot > 0.0 && c.q_cold > 0.0 {
        SignCase::ForbiddenBothPositive
    } else if c.q_hot < 0.0 && c.q_cold > 0.0 && work > 0.0 {
        SignCase::ForbiddenReversed
    } else if c.q_hot > 0.0 && work > 0.0 {
        SignCase::Extracting
    } else {
        SignCase::Dissipating
    }
}

/// Tags every channel of a report.
///
/// For thermal reservoirs with `T_hot > T_cold` neither forbidden tag can
/// occur; a forbidden tag there means the inputs or the code are wrong.
pub fn channel_sign_analysis(report: &HeatReport) -> Vec<(Tuple, SignCase)> {
    report.channels.iter().map(|c| (c.tuple, sign_case(c))).collect()
}

/// Efficiency of an engine with a single tuple: `1 - cold_gap / hot_gap`.
///
/// The flux factor cancels between work and hot heat, so this holds for any
/// populations as long as heat flows out of the hot reservoir.
pub fn single_channel_efficiency(hot_gap: f64, cold_gap: f64) -> Result<f64> {
    if !(hot_gap > 0.0 && hot_gap.is_finite()) {
        return Err(Error::Invalid {
            field: "hot_gap",
            reason: format!("must be positive, got {hot_gap}"),
        });
    }
    if !(cold_gap >= 0.0 && cold_gap.is_finite()) {
        return Err(Error::Invalid {
            field: "cold_gap",
            reason: format!("must be nonnegative, got {cold_gap}"),
        });
    }
    Ok(1.0 - cold_gap / hot_gap)
}
