//! Seeded random states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::qmat::{normalized, CMat, DensityMatrix, Dims, PureState, C64};

/// RNG for a given seed; every random object in the crate is drawn from one of these.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect()
}

/// Haar-random unit vector in `C^n`.
pub fn haar_vector(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    normalized(&gaussian_vector(n, rng))
}

/// Haar-random `n × n` unitary (Gram–Schmidt on a Gaussian matrix).
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let cols: Vec<Vec<C64>> = (0..n).map(|_| gaussian_vector(n, rng)).collect();
    CMat::from_columns(&gram_schmidt(cols))
}

pub(crate) fn gram_schmidt(mut cols: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    for j in 0..cols.len() {
        for _ in 0..2 {
            for i in 0..j {
                let c = crate::qmat::vdot(&cols[i], &cols[j]);
                let (head, tail) = cols.split_at_mut(j);
                for (x, y) in tail[0].iter_mut().zip(&head[i]) {
                    *x -= c * y;
                }
            }
        }
        cols[j] = normalized(&cols[j]);
    }
    cols
}

pub fn random_pure_with(dims: &Dims, rng: &mut impl Rng) -> PureState {
    PureState::new(dims.clone(), haar_vector(dims.total(), rng)).expect("normalized")
}

/// Haar-random pure state; identical output for identical `(dims, seed)`.
pub fn random_pure(dims: &Dims, seed: u64) -> PureState {
    random_pure_with(dims, &mut rng_for(seed))
}

pub fn random_density_with(dims: &Dims, rank: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let d = dims.total();
    if rank == 0 || rank > d {
        return Err(invalid(format!("rank {rank} outside 1..={d}")));
    }
    // reduced state of a Haar-random pure state on C^d ⊗ C^rank
    let g = gaussian_vector(d * rank, rng);
    let m = CMat::new(d, rank, g)?;
    DensityMatrix::from_psd_unnormalized(dims.clone(), &m * &m.adjoint())
}

pub fn random_density(dims: &Dims, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(dims, rank, &mut rng_for(seed))
}

/// Tensor product of independent Haar-random local states.
pub fn random_product_pure_with(dims: &Dims, rng: &mut impl Rng) -> PureState {
    let mut amps = vec![C64::new(1.0, 0.0)];
    for &d in dims.as_slice() {
        amps = crate::qmat::kron_vec(&amps, &haar_vector(d, rng));
    }
    PureState::new(dims.clone(), amps).expect("product of unit vectors")
}

/// Random point of the probability simplex (flat Dirichlet).
pub fn random_weights(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}
