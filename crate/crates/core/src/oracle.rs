//! Time-domain check of the closed-form heat flows.
//!
//! A driving protocol `V(t) = f(t) V` acts on the product basis of the two
//! reservoirs. In the interaction picture each element picks up the phase
//! `exp(i t (E_a - E_b))`, where `E_a = E_hot[m] + E_cold[p]` for the product
//! state `a = (m, p)`. The second-order heat rate is
//!
//! ```text
//! dQ_j/dt = lambda^2 ∫_0^t Tr([[rho0, V~(tau)], V~(t)] H_j) dtau
//! ```
//!
//! which this module integrates on a uniform grid, independently of the
//! `M = ∫ V~ dt` route used by [`crate::engine`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::{heat_flows, CouplingOperator, Tuple};
use crate::error::{Error, Result};
use crate::model::{DiagonalReservoir, ReservoirSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Envelope {
    /// `cos(omega t)`.
    Cosine,
    /// `+1` on the first half of each period, `-1` on the second.
    Square,
    /// `1`; `omega` only fixes the period that `t_final` must be a multiple of.
    Constant,
}

/// Explicit time-dependent coupling.
///
/// Amplitudes are stored once per Hermitian pair, keyed by the tuple whose
/// product state `(m, p)` is lexicographically smaller than `(n, q)`; the
/// partner element is the complex conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingProtocol {
    envelope: Envelope,
    omega: f64,
    t_final: f64,
    periods: usize,
    amplitudes: BTreeMap<Tuple, Complex64>,
}

fn reversed(t: Tuple) -> Tuple {
    Tuple::new(t.n, t.m, t.q, t.p)
}

fn is_stored_orientation(t: Tuple) -> bool {
    (t.m, t.p) <= (t.n, t.q)
}

impl DrivingProtocol {
    pub fn new(envelope: Envelope, omega: f64, t_final: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Invalid {
                field: "omega",
                reason: format!("envelope frequency must be positive, got {omega}"),
            });
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Invalid {
                field: "t_final",
                reason: format!("must be positive, got {t_final}"),
            });
        }
        let ratio = t_final * omega / (2.0 * PI);
        let periods = ratio.round();
        if periods < 1.0 || (ratio - periods).abs() > 1e-9 * ratio {
            return Err(Error::Invalid {
                field: "t_final",
                reason: format!("must be a positive multiple of the period 2π/ω; got {ratio} periods"),
            });
        }
        Ok(Self {
            envelope,
            omega,
            t_final,
            periods: periods as usize,
            amplitudes: BTreeMap::new(),
        })
    }

    /// Adds the element `V_{(m,p),(n,q)}`; its conjugate partner is implied.
    ///
    /// Giving both halves of a pair is accepted only if they are conjugate.
    pub fn insert(&mut self, tuple: Tuple, value: Complex64) -> Result<()> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Invalid {
                field: "amplitude",
                reason: "non-finite amplitude".into(),
            });
        }
        let diagonal = tuple.m == tuple.n && tuple.p == tuple.q;
        if diagonal && value.im.abs() > 1e-14 * value.norm().max(1.0) {
            return Err(Error::Invalid {
                field: "amplitude",
                reason: format!("diagonal element of a Hermitian operator must be real, got {value}"),
            });
        }
        let (key, stored) = if is_stored_orientation(tuple) {
            (tuple, value)
        } else {
            (reversed(tuple), value.conj())
        };
        if let Some(existing) = self.amplitudes.get(&key) {
            if (existing - stored).norm() > 1e-12 * existing.norm().max(stored.norm()).max(1e-300) {
                return Err(Error::Invalid {
                    field: "amplitudes",
                    reason: format!(
                        "element ({}, {}, {}, {}) conflicts with its Hermitian partner",
                        tuple.m, tuple.n, tuple.p, tuple.q
                    ),
                });
            }
            return Ok(());
        }
        self.amplitudes.insert(key, stored);
        Ok(())
    }

    pub fn with_amplitude(mut self, tuple: Tuple, value: Complex64) -> Result<Self> {
        self.insert(tuple, value)?;
        Ok(self)
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    /// Bare element for any orientation of a tuple (0 if absent).
    pub fn amplitude(&self, tuple: Tuple) -> Complex64 {
        if is_stored_orientation(tuple) {
            self.amplitudes.get(&tuple).copied().unwrap_or_default()
        } else {
            self.amplitudes.get(&reversed(tuple)).map(|v| v.conj()).unwrap_or_default()
        }
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (Tuple, Complex64)> + '_ {
        self.amplitudes.iter().map(|(t, v)| (*t, *v))
    }

    /// Envelope value, right-continuous at the square wave's jumps.
    pub fn envelope_at(&self, t: f64) -> f64 {
        match self.envelope {
            Envelope::Cosine => (self.omega * t).cos(),
            Envelope::Square => {
                if (t / self.period()).rem_euclid(1.0) < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            Envelope::Constant => 1.0,
        }
    }

    /// Half-period segments; the envelope is smooth inside each one.
    fn segments(&self) -> usize {
        2 * self.periods
    }

    fn segment_len(&self) -> f64 {
        self.t_final / self.segments() as f64
    }

    /// Envelope on segment `k`, including its endpoints as one-sided limits.
    fn envelope_on(&self, k: usize, t: f64) -> f64 {
        match self.envelope {
            Envelope::Cosine => (self.omega * t).cos(),
            Envelope::Square => {
                if k % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Envelope::Constant => 1.0,
        }
    }
}

fn bohr_frequency(hot: &[f64], cold: &[f64], t: Tuple) -> f64 {
    (hot[t.m] + cold[t.p]) - (hot[t.n] + cold[t.q])
}

fn check_indices(t: Tuple, n_hot: usize, n_cold: usize) -> Result<()> {
    if t.m >= n_hot || t.n >= n_hot || t.p >= n_cold || t.q >= n_cold {
        return Err(Error::IndexOutOfRange {
            m: t.m,
            n: t.n,
            p: t.p,
            q: t.q,
        });
    }
    Ok(())
}

/// `V~_{(m,p),(n,q)}(t)`.
pub fn interaction_picture_element(
    proto: &DrivingProtocol,
    hot: &DiagonalReservoir,
    cold: &DiagonalReservoir,
    tuple: Tuple,
    t: f64,
) -> Result<Complex64> {
    check_indices(tuple, hot.len(), cold.len())?;
    let w = bohr_frequency(&hot.energies(), &cold.energies(), tuple);
    Ok(proto.amplitude(tuple) * proto.envelope_at(t) * Complex64::from_polar(1.0, w * t))
}

/// `∫_a^b exp(i x t) dt` in a form that stays accurate as `x -> 0`.
fn phasor_integral(x: f64, a: f64, b: f64) -> Complex64 {
    let half = 0.5 * (b - a);
    let y = x * half;
    let sinc = if y.abs() < 1e-4 {
        1.0 - y * y / 6.0
    } else {
        y.sin() / y
    };
    Complex64::from_polar(2.0 * half * sinc, x * 0.5 * (a + b))
}

/// `∫_0^{t_final} f(t) exp(i x t) dt` in closed form.
fn envelope_transform(proto: &DrivingProtocol, x: f64) -> Complex64 {
    let tf = proto.t_final;
    match proto.envelope {
        Envelope::Constant => phasor_integral(x, 0.0, tf),
        Envelope::Cosine => 0.5 * (phasor_integral(x + proto.omega, 0.0, tf) + phasor_integral(x - proto.omega, 0.0, tf)),
        Envelope::Square => {
            let len = proto.segment_len();
            (0..proto.segments())
                .map(|k| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * phasor_integral(x, k as f64 * len, (k + 1) as f64 * len)
                })
                .sum()
        }
    }
}

/// Composite Simpson estimate of the same integral, segment by segment.
fn envelope_transform_quadrature(proto: &DrivingProtocol, x: f64) -> Complex64 {
    let len = proto.segment_len();
    let fastest = x.abs() + proto.omega;
    let mut intervals = ((fastest * len / 0.02).ceil() as usize).max(16);
    intervals += intervals % 2;
    let h = len / intervals as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..proto.segments() {
        let t0 = k as f64 * len;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=intervals {
            let t = t0 + j as f64 * h;
            let w = if j == 0 || j == intervals {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * proto.envelope_on(k, t) * Complex64::from_polar(1.0, x * t);
        }
        total += acc * (h / 3.0);
    }
    total
}

/// Time-integrated interaction-picture coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatedCoupling {
    /// `M` on canonical tuples (`E_hot[m] > E_hot[n]`).
    pub elements: BTreeMap<Tuple, Complex64>,
}

impl AccumulatedCoupling {
    /// `|M|^2` weights in the form [`heat_flows`] consumes.
    pub fn to_operator(&self, lambda: f64) -> Result<CouplingOperator> {
        let mut op = CouplingOperator::new(lambda)?;
        for (t, m) in &self.elements {
            op.insert(*t, m.norm_sqr())?;
        }
        Ok(op)
    }
}

/// Rejects hot-degenerate off-diagonal elements: they carry heat into the
/// cold reservoir only and have no place in the restricted canonical sum.
fn check_protocol(proto: &DrivingProtocol, hot: &DiagonalReservoir, cold: &DiagonalReservoir) -> Result<()> {
    for (t, v) in proto.amplitudes() {
        check_indices(t, hot.len(), cold.len())?;
        let diagonal = t.m == t.n && t.p == t.q;
        if !diagonal && v != Complex64::new(0.0, 0.0) && hot.energy(t.m) == hot.energy(t.n) {
            return Err(Error::NotCanonical {
                m: t.m,
                n: t.n,
                p: t.p,
                q: t.q,
            });
        }
    }
    Ok(())
}

/// `M = ∫_0^{t_final} V~(t) dt`, from closed-form envelope integrals,
/// checked against Simpson quadrature.
pub fn accumulate_m(
    proto: &DrivingProtocol,
    hot: &DiagonalReservoir,
    cold: &DiagonalReservoir,
) -> Result<AccumulatedCoupling> {
    check_protocol(proto, hot, cold)?;
    let (eh, ec) = (hot.energies(), cold.energies());
    let mut elements = BTreeMap::new();
    for (t, v) in proto.amplitudes() {
        if t.m == t.n && t.p == t.q {
            continue;
        }
        let canonical = if eh[t.m] > eh[t.n] { t } else { reversed(t) };
        let value = proto.amplitude(canonical);
        let x = bohr_frequency(&eh, &ec, canonical);
        let closed = value * envelope_transform(proto, x);
        let quad = value * envelope_transform_quadrature(proto, x);
        let tol = 1e-6 * v.norm() * proto.t_final;
        if (closed - quad).norm() > tol {
            return Err(Error::Consistency(format!(
                "M element ({}, {}, {}, {}): closed form {closed} vs quadrature {quad}",
                canonical.m, canonical.n, canonical.p, canonical.q
            )));
        }
        elements.insert(canonical, closed);
    }
    Ok(AccumulatedCoupling { elements })
}

/// One nonzero element of `V` on the product space.
struct Element {
    a: usize,
    b: usize,
    partner: usize,
    value: Complex64,
    bohr: f64,
}

/// Product-space view of a protocol between two diagonal reservoirs.
struct ProductSystem {
    elements: Vec<Element>,
    /// Populations `p_hot[m] p_cold[p]` of product states.
    rho: Vec<f64>,
    hot_energy: Vec<f64>,
    cold_energy: Vec<f64>,
}

impl ProductSystem {
    fn new(proto: &DrivingProtocol, hot: &DiagonalReservoir, cold: &DiagonalReservoir) -> Result<Self> {
        check_protocol(proto, hot, cold)?;
        let nc = cold.len();
        let idx = |i: usize, j: usize| i * nc + j;
        let (eh, ec) = (hot.energies(), cold.energies());
        let mut elements = Vec::new();
        for (t, v) in proto.amplitudes() {
            let (a, b) = (idx(t.m, t.p), idx(t.n, t.q));
            let bohr = bohr_frequency(&eh, &ec, t);
            let k = elements.len();
            if a == b {
                elements.push(Element { a, b, partner: k, value: v, bohr });
            } else {
                elements.push(Element { a, b, partner: k + 1, value: v, bohr });
                elements.push(Element {
                    a: b,
                    b: a,
                    partner: k,
                    value: v.conj(),
                    bohr: -bohr,
                });
            }
        }
        let mut rho = Vec::with_capacity(hot.len() * nc);
        let mut hot_energy = Vec::with_capacity(hot.len() * nc);
        let mut cold_energy = Vec::with_capacity(hot.len() * nc);
        for m in 0..hot.len() {
            for p in 0..nc {
                rho.push(hot.population(m) * cold.population(p));
                hot_energy.push(eh[m]);
                cold_energy.push(ec[p]);
            }
        }
        Ok(Self {
            elements,
            rho,
            hot_energy,
            cold_energy,
        })
    }

    fn interaction_picture(&self, proto: &DrivingProtocol, segment: usize, t: f64, out: &mut [Complex64]) {
        let f = proto.envelope_on(segment, t);
        for (slot, e) in out.iter_mut().zip(&self.elements) {
            *slot = e.value * f * Complex64::from_polar(1.0, e.bohr * t);
        }
    }

    /// `(Tr([[rho0, A], B] H_hot), Tr([[rho0, A], B] H_cold))` for
    /// diagonal `rho0` and `H`, summed over all product pairs `(a, b)`:
    /// `Σ (r_a - r_b) (A_ab B_ba + B_ab A_ba) h_a`.
    fn double_commutator_trace(&self, a_mat: &[Complex64], b_mat: &[Complex64]) -> (f64, f64) {
        let (mut th, mut tc) = (0.0, 0.0);
        for (k, e) in self.elements.iter().enumerate() {
            let dr = self.rho[e.a] - self.rho[e.b];
            if dr == 0.0 {
                continue;
            }
            let j = e.partner;
            let s = (a_mat[k] * b_mat[j] + b_mat[k] * a_mat[j]).re * dr;
            th += s * self.hot_energy[e.a];
            tc += s * self.cold_energy[e.a];
        }
        (th, tc)
    }
}

/// Nested trapezoid estimate of `(Q_hot, Q_cold) / lambda^2` with
/// `steps` intervals per half-period segment.
fn trapezoid_heat(sys: &ProductSystem, proto: &DrivingProtocol, steps: usize) -> (f64, f64) {
    let ne = sys.elements.len();
    let len = proto.segment_len();
    let h = len / steps as f64;
    let mut inner = vec![Complex64::new(0.0, 0.0); ne];
    let mut prev = vec![Complex64::new(0.0, 0.0); ne];
    let mut cur = vec![Complex64::new(0.0, 0.0); ne];
    let (mut qh, mut qc) = (0.0, 0.0);
    for k in 0..proto.segments() {
        let t0 = k as f64 * len;
        sys.interaction_picture(proto, k, t0, &mut prev);
        let (mut gh_prev, mut gc_prev) = sys.double_commutator_trace(&inner, &prev);
        let (mut seg_h, mut seg_c) = (0.0, 0.0);
        for j in 1..=steps {
            let t = if j == steps { (k + 1) as f64 * len } else { t0 + j as f64 * h };
            sys.interaction_picture(proto, k, t, &mut cur);
            for ((i, p), c) in inner.iter_mut().zip(&prev).zip(&cur) {
                *i += 0.5 * h * (p + c);
            }
            let (gh, gc) = sys.double_commutator_trace(&inner, &cur);
            seg_h += 0.5 * h * (gh_prev + gh);
            seg_c += 0.5 * h * (gc_prev + gc);
            gh_prev = gh;
            gc_prev = gc;
            std::mem::swap(&mut prev, &mut cur);
        }
        qh += seg_h;
        qc += seg_c;
    }
    (qh, qc)
}

/// Heat flows from direct time integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratedHeat {
    pub q_hot: f64,
    pub q_cold: f64,
    /// Intervals per half-period segment of the finest grid used.
    pub steps: usize,
    /// Change of the extrapolated result under the last step halving.
    pub error_estimate: f64,
}

/// Comparison tolerance between the time-domain and closed-form heats.
pub fn oracle_tolerance(q: f64) -> f64 {
    1e-8f64.max(1e-6 * q.abs())
}

const MAX_STEPS: usize = 1 << 16;

/// Integrates the second-order heat rate over `[0, t_final]`.
///
/// Trapezoid sums at `s`, `2s` and `4s` steps per segment give two
/// Richardson-extrapolated estimates; the step count doubles until they
/// differ by less than a tenth of [`oracle_tolerance`].
pub fn integrate_heat_flow(
    proto: &DrivingProtocol,
    hot: &DiagonalReservoir,
    cold: &DiagonalReservoir,
    lambda: f64,
    steps: usize,
) -> Result<IntegratedHeat> {
    if !lambda.is_finite() {
        return Err(Error::Invalid {
            field: "lambda",
            reason: format!("must be finite, got {lambda}"),
        });
    }
    let sys = ProductSystem::new(proto, hot, cold)?;
    let l2 = lambda * lambda;
    let mut s = steps.max(2);
    let mut t1 = trapezoid_heat(&sys, proto, s);
    let mut t2 = trapezoid_heat(&sys, proto, 2 * s);
    let richardson = |c: (f64, f64), f: (f64, f64)| ((4.0 * f.0 - c.0) / 3.0, (4.0 * f.1 - c.1) / 3.0);
    loop {
        let t4 = trapezoid_heat(&sys, proto, 4 * s);
        let r1 = richardson(t1, t2);
        let r2 = richardson(t2, t4);
        let dh = l2 * (r2.0 - r1.0).abs();
        let dc = l2 * (r2.1 - r1.1).abs();
        let converged = dh < 0.1 * oracle_tolerance(l2 * r2.0) && dc < 0.1 * oracle_tolerance(l2 * r2.1);
        if converged {
            return Ok(IntegratedHeat {
                q_hot: l2 * r2.0,
                q_cold: l2 * r2.1,
                steps: 4 * s,
                error_estimate: dh.max(dc),
            });
        }
        if 8 * s > MAX_STEPS {
            let (coarse, fine) = if dh >= dc { (r1.0, r2.0) } else { (r1.1, r2.1) };
            return Err(Error::Convergence {
                coarse: l2 * coarse,
                fine: l2 * fine,
            });
        }
        s *= 2;
        t1 = t2;
        t2 = t4;
    }
}

/// First-order heat rates `-i lambda Tr([rho0, V~(t)] H_j)` for the full
/// (possibly coherent) reservoir states, with dense matrices.
///
/// Stationary reservoirs make both rates vanish.
pub fn first_order_rate(
    proto: &DrivingProtocol,
    hot: &ReservoirSpec,
    cold: &ReservoirSpec,
    lambda: f64,
    t: f64,
) -> Result<(f64, f64)> {
    let (nh, nc) = (hot.dim(), cold.dim());
    let dim = nh * nc;
    let (eh, ec) = (hot.energies(), cold.energies());
    let rho0 = hot.density().kronecker(cold.density());
    let f = proto.envelope_at(t);
    let mut v = DMatrix::<Complex64>::zeros(dim, dim);
    for (tuple, value) in proto.amplitudes() {
        check_indices(tuple, nh, nc)?;
        let (a, b) = (tuple.m * nc + tuple.p, tuple.n * nc + tuple.q);
        let w = bohr_frequency(eh, ec, tuple);
        let element = value * f * Complex64::from_polar(1.0, w * t);
        v[(a, b)] = element;
        v[(b, a)] = element.conj();
    }
    let h_hot = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(eh[i / nc], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let h_cold = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(ec[i % nc], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let commutator = &rho0 * &v - &v * &rho0;
    let factor = Complex64::new(0.0, -lambda);
    let rate = |h: &DMatrix<Complex64>| (factor * (&commutator * h).trace()).re;
    Ok((rate(&h_hot), rate(&h_cold)))
}

/// Time-domain heats next to the closed form through `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub integrated_q_hot: f64,
    pub integrated_q_cold: f64,
    pub closed_q_hot: f64,
    pub closed_q_cold: f64,
    pub discrepancy_hot: f64,
    pub discrepancy_cold: f64,
    pub tolerance_hot: f64,
    pub tolerance_cold: f64,
    pub steps: usize,
    pub agree: bool,
}

pub fn compare_with_closed_form(
    proto: &DrivingProtocol,
    hot: &DiagonalReservoir,
    cold: &DiagonalReservoir,
    lambda: f64,
    steps: usize,
) -> Result<OracleComparison> {
    let closed = heat_flows(hot, cold, &accumulate_m(proto, hot, cold)?.to_operator(lambda)?)?;
    let integrated = integrate_heat_flow(proto, hot, cold, lambda, steps)?;
    let discrepancy_hot = (integrated.q_hot - closed.q_hot).abs();
    let discrepancy_cold = (integrated.q_cold - closed.q_cold).abs();
    let tolerance_hot = oracle_tolerance(closed.q_hot);
    let tolerance_cold = oracle_tolerance(closed.q_cold);
    Ok(OracleComparison {
        integrated_q_hot: integrated.q_hot,
        integrated_q_cold: integrated.q_cold,
        closed_q_hot: closed.q_hot,
        closed_q_cold: closed.q_cold,
        discrepancy_hot,
        discrepancy_cold,
        tolerance_hot,
        tolerance_cold,
        steps: integrated.steps,
        agree: discrepancy_hot <= tolerance_hot && discrepancy_cold <= tolerance_cold,
    })
}
