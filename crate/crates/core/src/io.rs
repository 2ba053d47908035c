//! JSON file formats for reservoirs, engines and driving protocols.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::{CouplingOperator, Tuple};
use crate::error::{Error, Result};
use crate::model::{ReservoirSpec, Tolerances};
use crate::oracle::{DrivingProtocol, Envelope};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffDiagonal {
    pub i: usize,
    pub j: usize,
    pub re: f64,
    pub im: f64,
}

/// `{label, energies, diag, offdiag?}`; `offdiag` lists `rho_ij` for `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirFile {
    pub label: String,
    pub energies: Vec<f64>,
    pub diag: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offdiag: Vec<OffDiagonal>,
}

impl ReservoirFile {
    pub fn to_spec(&self, tol: &Tolerances) -> Result<ReservoirSpec> {
        let n = self.energies.len();
        if self.diag.len() != n {
            return Err(Error::Dimension {
                what: "diag",
                expected: n,
                found: self.diag.len(),
            });
        }
        let mut rho = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(self.diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.offdiag {
            if e.i >= e.j || e.j >= n {
                return Err(Error::Invalid {
                    field: "offdiag",
                    reason: format!("entry ({}, {}) must satisfy i < j < {n}", e.i, e.j),
                });
            }
            if !seen.insert((e.i, e.j)) {
                return Err(Error::Invalid {
                    field: "offdiag",
                    reason: format!("entry ({}, {}) given twice", e.i, e.j),
                });
            }
            let z = Complex64::new(e.re, e.im);
            rho[(e.i, e.j)] = z;
            rho[(e.j, e.i)] = z.conj();
        }
        ReservoirSpec::with_tolerances(self.label.clone(), self.energies.clone(), rho, tol)
    }

    pub fn from_spec(spec: &ReservoirSpec) -> Self {
        let rho = spec.density();
        let n = spec.dim();
        let mut offdiag = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let z = rho[(i, j)];
                if z != Complex64::new(0.0, 0.0) {
                    offdiag.push(OffDiagonal { i, j, re: z.re, im: z.im });
                }
            }
        }
        Self {
            label: spec.label().to_string(),
            energies: spec.energies().to_vec(),
            diag: (0..n).map(|i| rho[(i, i)].re).collect(),
            offdiag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineEntry {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub weight: f64,
}

/// `{lambda, entries: [{m, n, p, q, weight}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineFile {
    pub lambda: f64,
    pub entries: Vec<EngineEntry>,
}

impl EngineFile {
    pub fn to_operator(&self) -> Result<CouplingOperator> {
        let mut op = CouplingOperator::new(self.lambda)?;
        for e in &self.entries {
            let t = Tuple::new(e.m, e.n, e.p, e.q);
            if op.entries().any(|(u, _)| u == t) {
                return Err(Error::Invalid {
                    field: "entries",
                    reason: format!("tuple ({}, {}, {}, {}) given twice", e.m, e.n, e.p, e.q),
                });
            }
            op.insert(t, e.weight)?;
        }
        Ok(op)
    }

    pub fn from_operator(op: &CouplingOperator) -> Self {
        Self {
            lambda: op.lambda(),
            entries: op
                .entries()
                .map(|(t, weight)| EngineEntry {
                    m: t.m,
                    n: t.n,
                    p: t.p,
                    q: t.q,
                    weight,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeEntry {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub re: f64,
    pub im: f64,
}

/// `{envelope, omega, t_final, amplitudes: [{m, n, p, q, re, im}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    pub envelope: Envelope,
    pub omega: f64,
    pub t_final: f64,
    pub amplitudes: Vec<AmplitudeEntry>,
}

impl ProtocolFile {
    pub fn to_protocol(&self) -> Result<DrivingProtocol> {
        let mut proto = DrivingProtocol::new(self.envelope, self.omega, self.t_final)?;
        for a in &self.amplitudes {
            proto.insert(Tuple::new(a.m, a.n, a.p, a.q), Complex64::new(a.re, a.im))?;
        }
        Ok(proto)
    }

    pub fn from_protocol(proto: &DrivingProtocol) -> Self {
        Self {
            envelope: proto.envelope(),
            omega: proto.omega(),
            t_final: proto.t_final(),
            amplitudes: proto
                .amplitudes()
                .map(|(t, v)| AmplitudeEntry {
                    m: t.m,
                    n: t.n,
                    p: t.p,
                    q: t.q,
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
    }
}

/// Reads and parses a JSON file. Failures are input errors naming the path.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid {
        field: "file",
        reason: format!("{}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid {
        field: "file",
        reason: format!("{}: {e}", path.display()),
    })
}
