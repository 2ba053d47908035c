#![allow(dead_code)]

use carnot_core::DiagonalReservoir;
use rand::Rng;

/// `n` sorted energies in `[0, span]` with neighbouring gaps of at least `min_gap`.
pub fn random_energies<R: Rng>(rng: &mut R, n: usize, span: f64, min_gap: f64) -> Vec<f64> {
    loop {
        let mut e: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * span).collect();
        e.sort_by(f64::total_cmp);
        if e.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return e;
        }
    }
}

pub fn random_thermal<R: Rng>(rng: &mut R, label: &str, temperature: f64) -> DiagonalReservoir {
    let n = rng.random_range(2..=6);
    let e = random_energies(rng, n, 5.0, 1e-3);
    carnot_core::model::thermal_reservoir_labeled(label, &e, temperature).unwrap()
}

/// Random stationary reservoir without inversions: populations drawn
/// uniformly from the simplex, then sorted to decrease with energy.
pub fn random_nonthermal<R: Rng>(rng: &mut R, label: &str) -> DiagonalReservoir {
    let n = rng.random_range(2..=6);
    let e = random_energies(rng, n, 5.0, 1e-3);
    let mut p: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    p.sort_by(|a, b| b.total_cmp(a));
    let z: f64 = p.iter().sum();
    let p: Vec<f64> = p.iter().map(|x| x / z).collect();
    DiagonalReservoir::new(label, &e, &p).unwrap()
}

/// Random strictly positive populations in no particular order.
pub fn random_populations<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let p: Vec<f64> = (0..n).map(|_| 0.01 + rng.random::<f64>()).collect();
    let z: f64 = p.iter().sum();
    p.iter().map(|x| x / z).collect()
}
