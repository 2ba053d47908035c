//! Decomposition of a diagonal reservoir into two-level channels.
//!
//! Every unordered pair of levels behaves like a two-level system in
//! equilibrium at the temperature that reproduces its population ratio,
//! `p_hi / p_lo = exp(-(E_hi - E_lo) / T)`. Channels are stored through the
//! inverse temperature so the zero- and infinite-temperature cases never
//! divide by zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Side};
use crate::model::DiagonalReservoir;

/// Physical character of a channel. Exactly one tag applies to every channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChannelKind {
    PositiveTemp,
    /// Population inversion across a nonzero gap.
    NegativeTemp,
    /// Degenerate levels with unequal populations.
    ZeroTemp,
    /// Degenerate levels with equal populations.
    Inert,
    /// Equal populations across a nonzero gap.
    InfiniteTemp,
    /// At least one population is zero.
    Undefined,
}

/// One pair of levels of a reservoir with its effective temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionChannel {
    pub hi: usize,
    pub lo: usize,
    /// `E[hi] - E[lo]`, never negative; exactly zero for degenerate pairs.
    pub delta_e: f64,
    /// `ln(p[lo] / p[hi])`; may be infinite for `Undefined` channels.
    pub log_ratio: f64,
    pub p_hi: f64,
    pub p_lo: f64,
    pub kind: ChannelKind,
}

impl TransitionChannel {
    /// Builds the channel for levels `i` and `j` of `res`.
    pub fn between(res: &DiagonalReservoir, i: usize, j: usize) -> Self {
        let tol = res.tolerances();
        let (ei, ej) = (res.energy(i), res.energy(j));
        let degenerate = (ei - ej).abs() <= tol.degeneracy;

        let (hi, lo) = if degenerate {
            // the more populated level is `lo`, so the log ratio is >= 0
            let (a, b) = (i.min(j), i.max(j));
            if res.population(b) > res.population(a) {
                (a, b)
            } else {
                (b, a)
            }
        } else if ei > ej {
            (i, j)
        } else {
            (j, i)
        };
        let (p_hi, p_lo) = (res.population(hi), res.population(lo));
        let delta_e = if degenerate { 0.0 } else { res.energy(hi) - res.energy(lo) };

        let (log_ratio, kind) = if p_hi <= 0.0 || p_lo <= 0.0 {
            let l = if p_hi <= 0.0 && p_lo <= 0.0 {
                0.0
            } else if p_hi <= 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            (l, ChannelKind::Undefined)
        } else {
            let mut l = (p_lo / p_hi).ln();
            if l.abs() <= tol.equal_population {
                l = 0.0;
            }
            let kind = match (degenerate, l) {
                (true, l) if l == 0.0 => ChannelKind::Inert,
                (true, _) => ChannelKind::ZeroTemp,
                (false, l) if l == 0.0 => ChannelKind::InfiniteTemp,
                (false, l) if l > 0.0 => ChannelKind::PositiveTemp,
                (false, _) => ChannelKind::NegativeTemp,
            };
            (l, kind)
        };

        Self {
            hi,
            lo,
            delta_e,
            log_ratio,
            p_hi,
            p_lo,
            kind,
        }
    }

    /// Effective inverse temperature `log_ratio / delta_e`.
    ///
    /// `+inf` for zero-temperature channels, `0` for infinite temperature,
    /// `None` when no temperature exists (inert or undefined).
    pub fn beta(&self) -> Option<f64> {
        match self.kind {
            ChannelKind::PositiveTemp | ChannelKind::NegativeTemp => Some(self.log_ratio / self.delta_e),
            ChannelKind::ZeroTemp => Some(f64::INFINITY),
            ChannelKind::InfiniteTemp => Some(0.0),
            ChannelKind::Inert | ChannelKind::Undefined => None,
        }
    }

    /// Whether the channel takes part in the extremal-temperature search.
    pub fn is_eligible(&self) -> bool {
        !matches!(self.kind, ChannelKind::Inert | ChannelKind::Undefined)
    }

    pub fn key(&self) -> (usize, usize) {
        (self.hi, self.lo)
    }
}

/// All `n(n-1)/2` channels of a reservoir, sorted by `(hi, lo)`.
pub fn enumerate_channels(res: &DiagonalReservoir) -> Vec<TransitionChannel> {
    let n = res.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut channels: Vec<TransitionChannel> = if pairs.len() > 4096 {
        pairs.par_iter().map(|&(i, j)| TransitionChannel::between(res, i, j)).collect()
    } else {
        pairs.iter().map(|&(i, j)| TransitionChannel::between(res, i, j)).collect()
    };
    channels.sort_by_key(TransitionChannel::key);
    channels
}

/// Effective temperature of a channel.
///
/// Zero-temperature channels return exactly `0.0` and infinite-temperature
/// channels `f64::INFINITY`; inert and undefined channels have none.
pub fn effective_temperature(ch: &TransitionChannel) -> Result<f64> {
    match ch.kind {
        ChannelKind::PositiveTemp | ChannelKind::NegativeTemp => Ok(ch.delta_e / ch.log_ratio),
        ChannelKind::ZeroTemp => Ok(0.0),
        ChannelKind::InfiniteTemp => Ok(f64::INFINITY),
        ChannelKind::Inert | ChannelKind::Undefined => Err(Error::TemperatureUndefined {
            kind: ch.kind,
            hi: ch.hi,
            lo: ch.lo,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReservoirRole {
    HeatReservoir,
    WorkReservoir,
    Mixed,
}

pub fn classify_reservoir(channels: &[TransitionChannel]) -> ReservoirRole {
    if channels.iter().any(|c| c.kind == ChannelKind::NegativeTemp) {
        ReservoirRole::WorkReservoir
    } else if channels
        .iter()
        .filter(|c| c.kind != ChannelKind::Inert)
        .all(|c| c.kind == ChannelKind::PositiveTemp)
    {
        ReservoirRole::HeatReservoir
    } else {
        ReservoirRole::Mixed
    }
}

/// Relative slack under which two inverse temperatures count as tied.
const TIE: f64 = 1e-12;

fn first_inversion(channels: &[TransitionChannel]) -> Option<&TransitionChannel> {
    channels.iter().find(|c| c.kind == ChannelKind::NegativeTemp)
}

/// Hottest hot channel and coldest cold channel.
///
/// Hot candidates must have a nonzero gap (engine tuples need
/// `E_hot[m] > E_hot[n]`); cold candidates include zero-temperature channels,
/// which count as infinitely cold. Inert and undefined channels are skipped.
/// Ties within a relative `1e-12` go to the smallest `(hi, lo)`.
pub fn extremal_channels(
    hot: &[TransitionChannel],
    cold: &[TransitionChannel],
) -> Result<(TransitionChannel, TransitionChannel)> {
    for (side, chans) in [(Side::Hot, hot), (Side::Cold, cold)] {
        if let Some(c) = first_inversion(chans) {
            return Err(Error::WorkReservoir { side, hi: c.hi, lo: c.lo });
        }
    }

    let mut hot_sorted: Vec<&TransitionChannel> =
        hot.iter().filter(|c| c.is_eligible() && c.delta_e > 0.0).collect();
    hot_sorted.sort_by_key(|c| c.key());
    let mut best_hot: Option<(&TransitionChannel, f64)> = None;
    for c in hot_sorted {
        let b = c.beta().expect("eligible channel has a beta");
        match best_hot {
            Some((_, best)) if !(b < best - TIE * best.abs()) => {}
            _ => best_hot = Some((c, b)),
        }
    }

    let mut cold_sorted: Vec<&TransitionChannel> = cold.iter().filter(|c| c.is_eligible()).collect();
    cold_sorted.sort_by_key(|c| c.key());
    let mut best_cold: Option<(&TransitionChannel, f64)> = None;
    for c in cold_sorted {
        let b = c.beta().expect("eligible channel has a beta");
        match best_cold {
            Some((_, best)) if !(b > best + TIE * best.abs()) => {}
            _ => best_cold = Some((c, b)),
        }
    }

    match (best_hot, best_cold) {
        (None, _) => Err(Error::NoEligibleChannel { side: Side::Hot }),
        (_, None) => Err(Error::NoEligibleChannel { side: Side::Cold }),
        (Some((h, _)), Some((c, _))) => Ok((*h, *c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{thermal_reservoir, DiagonalReservoir};
    use approx::assert_relative_eq;

    #[test]
    fn channel_counts() {
        let r2 = thermal_reservoir(&[0.0, 1.0], 1.0).unwrap();
        assert_eq!(enumerate_channels(&r2).len(), 1);
        let r5 = thermal_reservoir(&[0.0, 1.0, 2.0, 3.5, 4.0], 1.0).unwrap();
        assert_eq!(enumerate_channels(&r5).len(), 10);
        let scully = DiagonalReservoir::new("s", &[1.0, 0.0, 0.0], &[0.2, 0.5, 0.3]).unwrap();
        assert_eq!(enumerate_channels(&scully).len(), 3);
    }

    #[test]
    fn thermal_temperature_is_recovered() {
        let r = thermal_reservoir(&[0.0, 0.7, 1.9], 2.0).unwrap();
        for ch in enumerate_channels(&r) {
            assert_eq!(ch.kind, ChannelKind::PositiveTemp);
            assert_relative_eq!(effective_temperature(&ch).unwrap(), 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn degenerate_unequal_pair_is_zero_temperature() {
        let r = DiagonalReservoir::new("pair", &[0.0, 0.0], &[0.75, 0.25]).unwrap();
        let ch = enumerate_channels(&r)[0];
        assert_eq!(ch.kind, ChannelKind::ZeroTemp);
        assert_eq!((ch.hi, ch.lo), (1, 0));
        assert_eq!(effective_temperature(&ch).unwrap(), 0.0);
        assert_eq!(ch.beta(), Some(f64::INFINITY));
    }

    #[test]
    fn two_level_formula() {
        let r = DiagonalReservoir::new("x", &[0.0, 3.0], &[0.7, 0.3]).unwrap();
        let ch = enumerate_channels(&r)[0];
        // independent scalar evaluation: 3 / ln(7/3)
        let expected = 3.0 / (7.0f64 / 3.0).ln();
        assert_relative_eq!(effective_temperature(&ch).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 3.5406, epsilon = 1e-4);
    }

    #[test]
    fn kinds_cover_all_cases() {
        let r = DiagonalReservoir::new("k", &[0.0, 1.0, 1.0, 2.0, 5.0], &[0.3, 0.2, 0.2, 0.3, 0.0]).unwrap();
        let chans = enumerate_channels(&r);
        let kind = |a: usize, b: usize| {
            chans
                .iter()
                .find(|c| (c.hi == a && c.lo == b) || (c.hi == b && c.lo == a))
                .unwrap()
                .kind
        };
        assert_eq!(kind(1, 0), ChannelKind::PositiveTemp);
        assert_eq!(kind(3, 1), ChannelKind::NegativeTemp);
        assert_eq!(kind(1, 2), ChannelKind::Inert);
        assert_eq!(kind(3, 0), ChannelKind::InfiniteTemp);
        assert_eq!(kind(4, 0), ChannelKind::Undefined);
        assert!(matches!(
            effective_temperature(chans.iter().find(|c| c.kind == ChannelKind::Undefined).unwrap()),
            Err(Error::TemperatureUndefined { .. })
        ));
        assert_eq!(
            effective_temperature(chans.iter().find(|c| c.kind == ChannelKind::InfiniteTemp).unwrap()).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn classification() {
        let thermal = thermal_reservoir(&[0.0, 1.0, 2.0], 1.5).unwrap();
        assert_eq!(classify_reservoir(&enumerate_channels(&thermal)), ReservoirRole::HeatReservoir);
        let inverted = DiagonalReservoir::new("inv", &[0.0, 1.0], &[0.3, 0.7]).unwrap();
        assert_eq!(classify_reservoir(&enumerate_channels(&inverted)), ReservoirRole::WorkReservoir);
        let pair = DiagonalReservoir::new("pair", &[0.0, 0.0], &[0.75, 0.25]).unwrap();
        assert_eq!(classify_reservoir(&enumerate_channels(&pair)), ReservoirRole::Mixed);
    }

    #[test]
    fn scully_hot_extremum() {
        let (pa, pb, rho) = (0.2, 0.4, 0.05);
        let hot = DiagonalReservoir::new("s", &[1.0, 0.0, 0.0], &[pa, pb + rho, pb - rho]).unwrap();
        let cold = thermal_reservoir(&[0.0, 1.0], 1.0).unwrap();
        let (h, _) = extremal_channels(&enumerate_channels(&hot), &enumerate_channels(&cold)).unwrap();
        // the hottest hot channel is the one ending on the less populated lower level
        assert_eq!((h.hi, h.lo), (0, 2));
        assert_relative_eq!(
            effective_temperature(&h).unwrap(),
            1.0 / ((pb - rho) / pa).ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn thermal_ties_go_to_lowest_pair() {
        let hot = thermal_reservoir(&[0.0, 1.0, 2.0, 3.0], 2.0).unwrap();
        let cold = thermal_reservoir(&[0.0, 0.5, 1.7], 1.0).unwrap();
        let (h, c) = extremal_channels(&enumerate_channels(&hot), &enumerate_channels(&cold)).unwrap();
        assert_eq!((h.hi, h.lo), (1, 0));
        assert_eq!((c.hi, c.lo), (1, 0));
    }

    #[test]
    fn zero_temperature_cold_channel_wins() {
        let hot = thermal_reservoir(&[0.0, 1.0], 2.0).unwrap();
        let cold = DiagonalReservoir::new("c", &[0.0, 0.0, 1.0], &[0.5, 0.3, 0.2]).unwrap();
        let (_, c) = extremal_channels(&enumerate_channels(&hot), &enumerate_channels(&cold)).unwrap();
        assert_eq!(c.kind, ChannelKind::ZeroTemp);
    }

    #[test]
    fn inversion_is_refused() {
        let hot = DiagonalReservoir::new("inv", &[0.0, 1.0], &[0.3, 0.7]).unwrap();
        let cold = thermal_reservoir(&[0.0, 1.0], 1.0).unwrap();
        let err = extremal_channels(&enumerate_channels(&hot), &enumerate_channels(&cold)).unwrap_err();
        assert!(matches!(err, Error::WorkReservoir { side: Side::Hot, .. }));
    }

    #[test]
    fn no_eligible_channel() {
        let hot = thermal_reservoir(&[0.0, 1.0], 2.0).unwrap();
        let cold = DiagonalReservoir::new("c", &[0.0, 0.0], &[0.5, 0.5]).unwrap();
        let err = extremal_channels(&enumerate_channels(&hot), &enumerate_channels(&cold)).unwrap_err();
        assert!(matches!(err, Error::NoEligibleChannel { side: Side::Cold }));
    }
}
