//! Reservoir representation, validation and diagonalization.
//!
//! Units throughout: hbar = k_B = 1, so temperatures are energies and Gibbs
//! weights are `exp(-E / T)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by validation and decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max |rho_ij - conj(rho_ji)|.
    pub hermitian: f64,
    /// Max |tr(rho) - 1|.
    pub trace: f64,
    /// Eigenvalues down to `-psd` are accepted and clamped to zero.
    pub psd: f64,
    /// Two energies are degenerate iff they differ by at most this much.
    pub degeneracy: f64,
    /// Max Frobenius norm of [H, rho].
    pub stationarity: f64,
    /// Two populations are equal iff |ln(p1 / p2)| is at most this much.
    pub equal_population: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-10,
            psd: 1e-10,
            degeneracy: 1e-12,
            stationarity: 1e-10,
            equal_population: 1e-12,
        }
    }
}

/// Raw reservoir: energy eigenvalues plus a density matrix in the same basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSpec {
    label: String,
    energies: Vec<f64>,
    density: DMatrix<Complex64>,
}

impl ReservoirSpec {
    pub fn new(label: impl Into<String>, energies: Vec<f64>, density: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerances(label, energies, density, &Tolerances::default())
    }

    pub fn with_tolerances(
        label: impl Into<String>,
        energies: Vec<f64>,
        density: DMatrix<Complex64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::Invalid {
                field: "energies",
                reason: "at least one level is required".into(),
            });
        }
        if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::Invalid {
                field: "energies",
                reason: format!("non-finite energy {e}"),
            });
        }
        let n = energies.len();
        if density.nrows() != n || density.ncols() != n {
            return Err(Error::Dimension {
                what: "density",
                expected: n,
                found: if density.nrows() != n { density.nrows() } else { density.ncols() },
            });
        }
        if density.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid {
                field: "density",
                reason: "non-finite entry".into(),
            });
        }

        let mut deviation = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                deviation = deviation.max((density[(i, j)] - density[(j, i)].conj()).norm());
            }
        }
        if deviation > tol.hermitian {
            return Err(Error::NotHermitian { deviation });
        }

        let trace: f64 = (0..n).map(|i| density[(i, i)].re).sum();
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::Trace { trace });
        }

        let hermitian = symmetrize(&density);
        let min_eigenvalue = SymmetricEigen::new(hermitian)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositive {
                eigenvalue: min_eigenvalue,
            });
        }

        Ok(Self {
            label: label.into(),
            energies,
            density,
        })
    }

    /// Spec with a diagonal density matrix.
    pub fn from_populations(label: impl Into<String>, energies: Vec<f64>, populations: &[f64]) -> Result<Self> {
        if populations.len() != energies.len() {
            return Err(Error::Dimension {
                what: "populations",
                expected: energies.len(),
                found: populations.len(),
            });
        }
        let density = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| Complex64::new(p, 0.0)),
        ));
        Self::new(label, energies, density)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn density(&self) -> &DMatrix<Complex64> {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }
}

fn symmetrize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).scale(0.5)
}

/// Outcome of the stationarity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    /// Frobenius norm of [H, rho].
    pub commutator_norm: f64,
    pub stationary: bool,
}

/// Checks [H, rho] = 0 with H diagonal in the spec's basis.
///
/// `[H, rho]_ij = (E_i - E_j) rho_ij`, so only coherences between levels
/// of different energy contribute.
pub fn validate_stationarity(spec: &ReservoirSpec, tol: f64) -> Stationarity {
    let e = spec.energies();
    let n = spec.dim();
    let mut sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sq += ((e[i] - e[j]) * spec.density()[(i, j)].norm()).powi(2);
            }
        }
    }
    let commutator_norm = sq.sqrt();
    Stationarity {
        commutator_norm,
        stationary: commutator_norm <= tol,
    }
}

/// One level of a diagonal reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub population: f64,
}

/// Reservoir in the joint eigenbasis of its Hamiltonian and density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalReservoir {
    label: String,
    levels: Vec<Level>,
    tol: Tolerances,
}

impl DiagonalReservoir {
    pub fn new(label: impl Into<String>, energies: &[f64], populations: &[f64]) -> Result<Self> {
        Self::with_tolerances(label, energies, populations, Tolerances::default())
    }

    /// Validates populations and snaps every degenerate block of energies to
    /// the block's lowest energy, so degenerate gaps are exactly zero.
    pub fn with_tolerances(
        label: impl Into<String>,
        energies: &[f64],
        populations: &[f64],
        tol: Tolerances,
    ) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::Invalid {
                field: "energies",
                reason: "at least one level is required".into(),
            });
        }
        if populations.len() != energies.len() {
            return Err(Error::Dimension {
                what: "populations",
                expected: energies.len(),
                found: populations.len(),
            });
        }
        if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::Invalid {
                field: "energies",
                reason: format!("non-finite energy {e}"),
            });
        }
        let mut pops = Vec::with_capacity(populations.len());
        for &p in populations {
            if !p.is_finite() || p < -tol.psd {
                return Err(Error::Invalid {
                    field: "populations",
                    reason: format!("population {p} is negative or non-finite"),
                });
            }
            pops.push(p.max(0.0));
        }
        let total: f64 = pops.iter().sum();
        if (total - 1.0).abs() > tol.trace {
            return Err(Error::Trace { trace: total });
        }

        let mut snapped = energies.to_vec();
        for block in degenerate_blocks(energies, tol.degeneracy) {
            let base = block.iter().map(|&i| energies[i]).fold(f64::INFINITY, f64::min);
            for &i in &block {
                snapped[i] = base;
            }
        }

        Ok(Self {
            label: label.into(),
            levels: snapped
                .into_iter()
                .zip(pops)
                .map(|(energy, population)| Level { energy, population })
                .collect(),
            tol,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.levels[i].energy
    }

    pub fn population(&self, i: usize) -> f64 {
        self.levels[i].population
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.population).collect()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Same populations with every energy shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        let energies: Vec<f64> = self.levels.iter().map(|l| l.energy + offset).collect();
        Self::with_tolerances(self.label.clone(), &energies, &self.populations(), self.tol)
    }
}

/// Groups level indices into degenerate blocks.
///
/// Indices are visited in ascending energy (ties by index); a level joins
/// the current block iff it lies within `tol` of the block's lowest energy.
/// Each block lists its indices in ascending order.
pub fn degenerate_blocks(energies: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match blocks.last_mut() {
            Some(block) if (energies[i] - energies[block[0]]).abs() <= tol => block.push(i),
            _ => blocks.push(vec![i]),
        }
    }
    for block in &mut blocks {
        block.sort_unstable();
    }
    blocks
}

/// Eigenvalues of a Hermitian block, descending.
fn block_eigenvalues(block: &DMatrix<Complex64>) -> Vec<f64> {
    let mut values = match block.nrows() {
        1 => vec![block[(0, 0)].re],
        2 => {
            let a = block[(0, 0)].re;
            let d = block[(1, 1)].re;
            let b = 0.5 * (block[(0, 1)] + block[(1, 0)].conj());
            let mean = 0.5 * (a + d);
            let radius = (0.5 * (a - d)).hypot(b.norm());
            vec![mean + radius, mean - radius]
        }
        _ => SymmetricEigen::new(symmetrize(block)).eigenvalues.iter().copied().collect(),
    };
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Diagonalizes a stationary reservoir block by block.
///
/// Each degenerate energy block is diagonalized separately; its eigenvalues,
/// sorted descending, are assigned to the block's levels in ascending index
/// order. Levels keep their positions and energies.
pub fn diagonalize_reservoir(spec: &ReservoirSpec, tol: &Tolerances) -> Result<DiagonalReservoir> {
    let check = validate_stationarity(spec, tol.stationarity);
    if !check.stationary {
        return Err(Error::NotStationary {
            norm: check.commutator_norm,
            tol: tol.stationarity,
        });
    }
    let energies = spec.energies();
    let mut populations = vec![0.0; spec.dim()];
    for block in degenerate_blocks(energies, tol.degeneracy) {
        let members = block;
        let sub = DMatrix::from_fn(members.len(), members.len(), |r, c| spec.density()[(members[r], members[c])]);
        for (&i, value) in members.iter().zip(block_eigenvalues(&sub)) {
            populations[i] = if value < 0.0 && value >= -tol.psd { 0.0 } else { value };
        }
    }
    DiagonalReservoir::with_tolerances(spec.label(), energies, &populations, *tol)
}

/// Gibbs state `p_i ∝ exp(-E_i / T)`.
pub fn thermal_reservoir(energies: &[f64], temperature: f64) -> Result<DiagonalReservoir> {
    thermal_reservoir_labeled(format!("thermal(T={temperature})"), energies, temperature)
}

pub fn thermal_reservoir_labeled(
    label: impl Into<String>,
    energies: &[f64],
    temperature: f64,
) -> Result<DiagonalReservoir> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::Temperature(temperature));
    }
    if energies.is_empty() {
        return Err(Error::Invalid {
            field: "energies",
            reason: "at least one level is required".into(),
        });
    }
    let ground = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-(e - ground) / temperature).exp()).collect();
    let z: f64 = weights.iter().sum();
    let populations: Vec<f64> = weights.iter().map(|w| w / z).collect();
    DiagonalReservoir::new(label, energies, &populations)
}
