//! Carnot-type efficiency bound for nonthermal reservoirs.
//!
//! The bound is `1 - T_cold / T_hot` evaluated on the coldest cold channel
//! and the hottest hot channel. It is computed from the gaps and log
//! population ratios of those two channels,
//! `1 - (dE_cold * L_hot) / (dE_hot * L_cold)`, so a zero-temperature cold
//! channel (`dE_cold = 0`) gives exactly 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{
    classify_reservoir, enumerate_channels, extremal_channels, ChannelKind, ReservoirRole, TransitionChannel,
};
use crate::engine::{canonical_tuples, efficiency_of, heat_flows, tuple_terms, CouplingOperator, Tuple};
use crate::error::{Error, Result, Side};
use crate::model::DiagonalReservoir;
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// Both reservoirs have a single temperature; the bound is Carnot's.
    ThermalLimit,
    Nonthermal,
    /// The bound equals 1.
    Unit,
}

/// Why the bound does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Inapplicable {
    /// Population inversion: a work reservoir.
    Inversion { side: Side, hi: usize, lo: usize },
    /// The coldest cold channel is hotter than the hottest hot channel.
    Bidirectional,
    NoEligibleChannel { side: Side },
}

impl std::fmt::Display for Inapplicable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Inapplicable::Inversion { side, hi, lo } => {
                write!(f, "INVERSION: {side} reservoir is inverted on channel ({hi}, {lo})")
            }
            Inapplicable::Bidirectional => {
                f.write_str("BIDIRECTIONAL: coldest cold channel is hotter than hottest hot channel")
            }
            Inapplicable::NoEligibleChannel { side } => {
                write!(f, "NO_ELIGIBLE_CHANNEL: {side} reservoir has no usable channel")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub applicable: bool,
    pub eta_max: Option<f64>,
    pub regime: Option<Regime>,
    pub hot_channel: Option<TransitionChannel>,
    pub cold_channel: Option<TransitionChannel>,
    pub diagnostic: Option<Inapplicable>,
    pub hot_role: ReservoirRole,
    pub cold_role: ReservoirRole,
    /// Channels skipped because a population is zero.
    pub undefined_channels: usize,
    /// Whether every hot channel is hotter than every cold channel.
    ///
    /// Only the extremal pair is gated on; with mixed orderings a random
    /// engine can pump heat out of a hot cold-side channel and exceed the bound.
    pub strictly_ordered: bool,
}

impl BoundReport {
    fn inapplicable(
        diagnostic: Inapplicable,
        hot_role: ReservoirRole,
        cold_role: ReservoirRole,
        undefined: usize,
        strictly_ordered: bool,
    ) -> Self {
        Self {
            applicable: false,
            eta_max: None,
            regime: None,
            hot_channel: None,
            cold_channel: None,
            diagnostic: Some(diagnostic),
            hot_role,
            cold_role,
            undefined_channels: undefined,
            strictly_ordered,
        }
    }
}

/// Ratio slack before the hottest-hot/coldest-cold ordering counts as reversed.
const ORDER_SLACK: f64 = 1e-12;

/// Whether every non-inert channel shares one positive temperature.
fn single_temperature(channels: &[TransitionChannel]) -> bool {
    let mut reference: Option<f64> = None;
    for c in channels.iter().filter(|c| c.kind != ChannelKind::Inert) {
        if c.kind != ChannelKind::PositiveTemp {
            return false;
        }
        let b = c.log_ratio / c.delta_e;
        match reference {
            None => reference = Some(b),
            Some(r) if (b - r).abs() > 1e-9 * r.abs() => return false,
            Some(_) => {}
        }
    }
    true
}

/// `T_cold / T_hot` of the extremal pair, or `None` if it is infinite.
fn temperature_ratio(hot: &TransitionChannel, cold: &TransitionChannel) -> Option<f64> {
    match cold.kind {
        ChannelKind::ZeroTemp => Some(0.0),
        ChannelKind::InfiniteTemp => {
            if hot.log_ratio == 0.0 {
                // both infinitely hot
                Some(1.0)
            } else {
                None
            }
        }
        _ => Some((cold.delta_e * hot.log_ratio) / (hot.delta_e * cold.log_ratio)),
    }
}

/// The generalized Carnot bound for a reservoir pair.
///
/// Inversions and a reversed temperature ordering make the bound
/// inapplicable; that is reported in the returned value, not as an error.
pub fn generalized_bound(hot: &DiagonalReservoir, cold: &DiagonalReservoir) -> BoundReport {
    let hot_channels = enumerate_channels(hot);
    let cold_channels = enumerate_channels(cold);
    let hot_role = classify_reservoir(&hot_channels);
    let cold_role = classify_reservoir(&cold_channels);
    let undefined = hot_channels
        .iter()
        .chain(&cold_channels)
        .filter(|c| c.kind == ChannelKind::Undefined)
        .count();
    let hottest_cold = cold_channels.iter().filter_map(TransitionChannel::beta).fold(f64::INFINITY, f64::min);
    let coldest_hot = hot_channels.iter().filter_map(TransitionChannel::beta).fold(f64::NEG_INFINITY, f64::max);
    let ordered = coldest_hot < hottest_cold;

    let (h, c) = match extremal_channels(&hot_channels, &cold_channels) {
        Ok(pair) => pair,
        Err(Error::WorkReservoir { side, hi, lo }) => {
            return BoundReport::inapplicable(Inapplicable::Inversion { side, hi, lo }, hot_role, cold_role, undefined, ordered)
        }
        Err(Error::NoEligibleChannel { side }) => {
            return BoundReport::inapplicable(Inapplicable::NoEligibleChannel { side }, hot_role, cold_role, undefined, ordered)
        }
        Err(e) => unreachable!("extremal_channels returned {e}"),
    };

    let ratio = match temperature_ratio(&h, &c) {
        Some(r) if r <= 1.0 + ORDER_SLACK => r,
        _ => {
            let mut report = BoundReport::inapplicable(Inapplicable::Bidirectional, hot_role, cold_role, undefined, ordered);
            report.hot_channel = Some(h);
            report.cold_channel = Some(c);
            return report;
        }
    };
    let eta_max = (1.0 - ratio).max(0.0);
    let regime = if eta_max == 1.0 {
        Regime::Unit
    } else if single_temperature(&hot_channels) && single_temperature(&cold_channels) {
        Regime::ThermalLimit
    } else {
        Regime::Nonthermal
    };

    BoundReport {
        applicable: true,
        eta_max: Some(eta_max),
        regime: Some(regime),
        hot_channel: Some(h),
        cold_channel: Some(c),
        diagnostic: None,
        hot_role,
        cold_role,
        undefined_channels: undefined,
        strictly_ordered: ordered,
    }
}

/// Single-tuple engine joining the two extremal channels of `report`.
///
/// The cold transition is tried upward first (`lo -> hi`), then downward;
/// the first orientation with heat flowing out of the hot reservoir wins.
pub fn saturating_engine(
    hot: &DiagonalReservoir,
    cold: &DiagonalReservoir,
    report: &BoundReport,
) -> Result<CouplingOperator> {
    if !report.applicable {
        let why = report.diagnostic.map(|d| d.to_string()).unwrap_or_default();
        return Err(Error::NotApplicable(why));
    }
    let (h, c) = match (report.hot_channel, report.cold_channel) {
        (Some(h), Some(c)) => (h, c),
        _ => return Err(Error::Construction("bound report carries no extremal channels".into())),
    };
    let mut fluxes = Vec::with_capacity(2);
    for (p, q) in [(c.lo, c.hi), (c.hi, c.lo)] {
        let engine = CouplingOperator::new(1.0)?.with_entry(Tuple::new(h.hi, h.lo, p, q), 1.0)?;
        let flows = heat_flows(hot, cold, &engine)?;
        if flows.q_hot > 0.0 {
            return Ok(engine);
        }
        fluxes.push(flows.channels[0].flux);
    }
    Err(Error::Construction(format!(
        "no orientation of hot ({}, {}) x cold ({}, {}) extracts heat (flux factors {:e}, {:e}); \
         the hot channel is not hot enough for this cold channel",
        h.hi, h.lo, c.hi, c.lo, fluxes[0], fluxes[1]
    )))
}

/// Result of a random-engine sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub trials: usize,
    pub seed: u64,
    pub eta_max: f64,
    /// Trials with heat flowing out of the hot reservoir.
    pub applicable: usize,
    pub max_efficiency: Option<f64>,
    /// Applicable trials with efficiency above `eta_max + 1e-10`.
    pub violations: usize,
    /// Largest `efficiency - eta_max` among violations, 0 when none.
    pub worst_excess: f64,
    /// Same statistics for the efficiency over positive-flux tuples only.
    pub max_extracting_efficiency: Option<f64>,
    pub extracting_violations: usize,
}

/// Slack allowed above the bound before a sweep trial counts as a violation.
pub const SWEEP_TOLERANCE: f64 = 1e-10;

struct TrialOutcome {
    efficiency: Option<f64>,
    extracting: Option<f64>,
}

/// Random stream of one trial; identical in serial and parallel runs.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws `trials` random engines and checks each against the bound.
///
/// Each canonical tuple is included with probability 1/2 and weight uniform
/// in (0, 1]; lambda is 1 since efficiency does not depend on it.
pub fn engine_sweep_verify(
    hot: &DiagonalReservoir,
    cold: &DiagonalReservoir,
    trials: usize,
    seed: u64,
) -> Result<SweepSummary> {
    let bound = generalized_bound(hot, cold);
    let eta_max = match (bound.applicable, bound.eta_max) {
        (true, Some(eta)) => eta,
        _ => {
            let why = bound.diagnostic.map(|d| d.to_string()).unwrap_or_default();
            return Err(Error::NotApplicable(why));
        }
    };
    let terms: Vec<_> = canonical_tuples(hot, cold)
        .into_iter()
        .map(|t| tuple_terms(hot, cold, t))
        .collect();

    let outcomes: Vec<TrialOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let (mut qh, mut qc) = (NeumaierSum::new(), NeumaierSum::new());
            let (mut xh, mut xc) = (NeumaierSum::new(), NeumaierSum::new());
            for t in &terms {
                let include = rng.random_bool(0.5);
                let weight = 1.0 - rng.random::<f64>();
                if include {
                    let base = weight * t.flux;
                    qh.add(base * t.hot_gap);
                    qc.add(base * t.cold_gap);
                    if t.flux > 0.0 {
                        xh.add(base * t.hot_gap);
                        xc.add(base * t.cold_gap);
                    }
                }
            }
            let q_hot = qh.value();
            let xq_hot = xh.value();
            TrialOutcome {
                efficiency: efficiency_of(q_hot, q_hot + qc.value()),
                extracting: efficiency_of(xq_hot, xq_hot + xc.value()),
            }
        })
        .collect();

    let mut summary = SweepSummary {
        trials,
        seed,
        eta_max,
        applicable: 0,
        max_efficiency: None,
        violations: 0,
        worst_excess: 0.0,
        max_extracting_efficiency: None,
        extracting_violations: 0,
    };
    for o in outcomes {
        if let Some(e) = o.efficiency {
            summary.applicable += 1;
            summary.max_efficiency = Some(summary.max_efficiency.map_or(e, |m: f64| m.max(e)));
            if e > eta_max + SWEEP_TOLERANCE {
                summary.violations += 1;
                summary.worst_excess = summary.worst_excess.max(e - eta_max);
            }
        }
        if let Some(e) = o.extracting {
            summary.max_extracting_efficiency = Some(summary.max_extracting_efficiency.map_or(e, |m: f64| m.max(e)));
            if e > eta_max + SWEEP_TOLERANCE {
                summary.extracting_violations += 1;
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::thermal_reservoir;
    use approx::assert_relative_eq;

    #[test]
    fn thermal_pair_is_carnot() {
        let hot = thermal_reservoir(&[0.0, 1.0, 2.0], 2.0).unwrap();
        let cold = thermal_reservoir(&[0.0, 0.5], 1.0).unwrap();
        let b = generalized_bound(&hot, &cold);
        assert!(b.applicable);
        assert_relative_eq!(b.eta_max.unwrap(), 0.5, epsilon = 1e-14);
        assert_eq!(b.regime, Some(Regime::ThermalLimit));
    }

    #[test]
    fn coherent_cold_gives_unit_bound() {
        let hot = thermal_reservoir(&[0.0, 1.0], 3.0).unwrap();
        let cold = DiagonalReservoir::new("pair", &[0.0, 0.0], &[0.75, 0.25]).unwrap();
        let b = generalized_bound(&hot, &cold);
        assert_eq!(b.eta_max, Some(1.0));
        assert_eq!(b.regime, Some(Regime::Unit));
    }

    #[test]
    fn scully_closed_form() {
        let (pa, pb, rho) = (0.2, 0.4, 0.1);
        let hot = DiagonalReservoir::new("hot", &[1.0, 0.0, 0.0], &[pa, pb + rho, pb - rho]).unwrap();
        let cold = DiagonalReservoir::new("cold", &[1.0, 0.0, 0.0], &[pa, pb, pb]).unwrap();
        let b = generalized_bound(&hot, &cold);
        let expected = 1.0 - ((pb - rho) / pa).ln() / (pb / pa).ln();
        assert_relative_eq!(b.eta_max.unwrap(), expected, max_relative = 1e-14);
        assert_eq!(b.regime, Some(Regime::Nonthermal));
        let cold_inert = enumerate_channels(&cold).iter().filter(|c| c.kind == ChannelKind::Inert).count();
        assert_eq!(cold_inert, 1);
    }

    #[test]
    fn inverted_hot_is_inapplicable() {
        let hot = DiagonalReservoir::new("inv", &[0.0, 1.0], &[0.3, 0.7]).unwrap();
        let cold = thermal_reservoir(&[0.0, 1.0], 1.0).unwrap();
        let b = generalized_bound(&hot, &cold);
        assert!(!b.applicable);
        assert!(matches!(b.diagnostic, Some(Inapplicable::Inversion { side: Side::Hot, .. })));
    }

    #[test]
    fn reversed_temperatures_are_bidirectional() {
        let hot = thermal_reservoir(&[0.0, 1.0], 1.0).unwrap();
        let cold = thermal_reservoir(&[0.0, 1.0], 2.0).unwrap();
        let b = generalized_bound(&hot, &cold);
        assert!(!b.applicable);
        assert_eq!(b.diagnostic, Some(Inapplicable::Bidirectional));
    }

    #[test]
    fn saturating_engine_reaches_carnot_in_the_limit() {
        // gap ratio dE_c / dE_h -> T_c / T_h = 1/2 from above: efficiency -> 1/2
        let hot = thermal_reservoir(&[0.0, 2.0], 2.0).unwrap();
        let mut previous = f64::NEG_INFINITY;
        for k in 1..=6 {
            let cold_gap = 1.0 + 0.5f64.powi(k);
            let cold = thermal_reservoir(&[0.0, cold_gap], 1.0).unwrap();
            let b = generalized_bound(&hot, &cold);
            let engine = saturating_engine(&hot, &cold, &b).unwrap();
            let eta = heat_flows(&hot, &cold, &engine).unwrap().efficiency.unwrap();
            assert_relative_eq!(eta, 1.0 - cold_gap / 2.0, epsilon = 1e-14);
            assert!(eta <= b.eta_max.unwrap());
            assert!(eta > previous);
            previous = eta;
        }
        assert!((previous - 0.5).abs() < 0.01);
    }

    #[test]
    fn sweep_is_deterministic_and_empty_sweep_is_vacuous() {
        let hot = thermal_reservoir(&[0.0, 1.0, 2.2], 2.0).unwrap();
        let cold = thermal_reservoir(&[0.0, 0.4, 1.5], 0.8).unwrap();
        let a = engine_sweep_verify(&hot, &cold, 500, 7).unwrap();
        let b = engine_sweep_verify(&hot, &cold, 500, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
        let empty = engine_sweep_verify(&hot, &cold, 0, 7).unwrap();
        assert_eq!((empty.applicable, empty.violations, empty.max_efficiency), (0, 0, None));
    }
}
