//! Coherent reservoirs: the three-level gas with coherence between its two
//! degenerate lower levels, and the degenerate coherent pair.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::generalized_bound;
use crate::error::{Error, Result};
use crate::model::{diagonalize_reservoir, DiagonalReservoir, ReservoirSpec, Tolerances};

/// Three-level gas: upper level `a` at energy `omega`, degenerate lower
/// levels `b` and `c` at 0 with equal populations and coherence
/// `rho_bc * exp(i phi)` between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScullyParams {
    pub p_a: f64,
    pub p_b: f64,
    pub rho_bc: f64,
    pub phi: f64,
    pub omega: f64,
}

impl ScullyParams {
    pub fn new(p_a: f64, p_b: f64, rho_bc: f64, phi: f64, omega: f64) -> Result<Self> {
        let params = Self {
            p_a,
            p_b,
            rho_bc,
            phi,
            omega,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with `p_a + 2 p_b = 1` from the population gap `p_b - p_a`.
    pub fn from_gap(gap: f64, rho_bc: f64, phi: f64, omega: f64) -> Result<Self> {
        let p_a = (1.0 - 2.0 * gap) / 3.0;
        Self::new(p_a, p_a + gap, rho_bc, phi, omega)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.p_a, self.p_b, self.rho_bc, self.phi, self.omega]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Invalid {
                field: "scully",
                reason: "parameters must be finite".into(),
            });
        }
        if self.p_a < 0.0 || self.p_b < 0.0 {
            return Err(Error::Invalid {
                field: "populations",
                reason: format!("p_a = {}, p_b = {} must be nonnegative", self.p_a, self.p_b),
            });
        }
        let trace = self.p_a + 2.0 * self.p_b;
        if (trace - 1.0).abs() > Tolerances::default().trace {
            return Err(Error::Trace { trace });
        }
        if self.rho_bc < 0.0 {
            return Err(Error::Invalid {
                field: "rho_bc",
                reason: format!("coherence magnitude must be nonnegative, got {}", self.rho_bc),
            });
        }
        if self.rho_bc > self.p_b {
            return Err(Error::NotPositive {
                eigenvalue: self.p_b - self.rho_bc,
            });
        }
        if !(self.omega > 0.0) {
            return Err(Error::Invalid {
                field: "omega",
                reason: format!("energy gap must be positive, got {}", self.omega),
            });
        }
        Ok(())
    }
}

/// Density matrix and energies `{omega, 0, 0}` of the coherent gas.
pub fn scully_reservoir(params: &ScullyParams) -> Result<ReservoirSpec> {
    params.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    let coherence = Complex64::from_polar(params.rho_bc, params.phi);
    #[rustfmt::skip]
    let density = DMatrix::from_row_slice(3, 3, &[
        Complex64::new(params.p_a, 0.0), zero, zero,
        zero, Complex64::new(params.p_b, 0.0), coherence,
        zero, coherence.conj(), Complex64::new(params.p_b, 0.0),
    ]);
    ReservoirSpec::new("scully", vec![params.omega, 0.0, 0.0], density)
}

/// The same gas without coherence, at the same temperature.
pub fn scully_cold_reservoir(params: &ScullyParams) -> Result<DiagonalReservoir> {
    DiagonalReservoir::new("scully-incoherent", &[params.omega, 0.0, 0.0], &[params.p_a, params.p_b, params.p_b])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScullyBound {
    /// `1 - ln((p_b - rho_bc) / p_a) / ln(p_b / p_a)`.
    pub exact: f64,
    /// Same bound from the general decomposition pipeline.
    pub pipeline: f64,
    /// High-temperature, small-coherence form `p_a rho_bc / (p_b (p_b - p_a))`.
    pub approximation: f64,
}

/// Closed-form bound for the coherent gas against its incoherent twin,
/// cross-checked against the general pipeline.
pub fn scully_bound(params: &ScullyParams) -> Result<ScullyBound> {
    params.validate()?;
    let ScullyParams { p_a, p_b, rho_bc, .. } = *params;
    if !(p_b > p_a) || !(p_b - rho_bc > p_a) {
        return Err(Error::NotApplicable(format!(
            "WORK_RESERVOIR: requires p_b - rho_bc > p_a (got p_a = {p_a}, p_b = {p_b}, rho_bc = {rho_bc})"
        )));
    }
    let exact = 1.0 - ((p_b - rho_bc) / p_a).ln() / (p_b / p_a).ln();
    let approximation = p_a * rho_bc / (p_b * (p_b - p_a));

    let hot = diagonalize_reservoir(&scully_reservoir(params)?, &Tolerances::default())?;
    let cold = scully_cold_reservoir(params)?;
    let report = generalized_bound(&hot, &cold);
    let pipeline = match (report.applicable, report.eta_max) {
        (true, Some(eta)) => eta,
        _ => {
            let why = report.diagnostic.map(|d| d.to_string()).unwrap_or_default();
            return Err(Error::NotApplicable(why));
        }
    };
    let scale = exact.abs().max(pipeline.abs());
    if (exact - pipeline).abs() > 1e-12 * scale {
        return Err(Error::Consistency(format!(
            "closed-form bound {exact:e} and pipeline bound {pipeline:e} disagree"
        )));
    }
    Ok(ScullyBound {
        exact,
        pipeline,
        approximation,
    })
}

/// Two degenerate levels at energy 0 with density `[[1, s], [s, 1]] / 2`.
pub fn coherent_pair(sigma: f64) -> Result<ReservoirSpec> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::Invalid {
            field: "sigma",
            reason: format!("coherence must lie in [0, 1], got {sigma}"),
        });
    }
    let half = Complex64::new(0.5, 0.0);
    let off = Complex64::new(0.5 * sigma, 0.0);
    let density = DMatrix::from_row_slice(2, 2, &[half, off, off, half]);
    ReservoirSpec::new(format!("coherent-pair(sigma={sigma})"), vec![0.0, 0.0], density)
}

/// Entropy drop (nats) from the maximally mixed pair to the coherent pair.
pub fn coherence_entropy_gap(sigma: f64) -> f64 {
    let plogp = |p: f64| if p > 0.0 { p * p.ln() } else { 0.0 };
    std::f64::consts::LN_2 + plogp(0.5 * (1.0 + sigma)) + plogp(0.5 * (1.0 - sigma))
}

/// Second-law cap on the work obtainable by burning the coherence of
/// `pair_count` pairs against a hot bath: `T_hot * pair_count * dS`.
pub fn max_extractable_work(hot_temperature: f64, pair_count: u64, sigma: f64) -> Result<f64> {
    if !(hot_temperature > 0.0 && hot_temperature.is_finite()) {
        return Err(Error::Temperature(hot_temperature));
    }
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::Invalid {
            field: "sigma",
            reason: format!("coherence must lie in [0, 1], got {sigma}"),
        });
    }
    Ok(hot_temperature * pair_count as f64 * coherence_entropy_gap(sigma))
}
