//! Relative entropy of coherence in a basis and its minimization over
//! locally distinguishable (conditional product) bases.

mod basis;

pub use basis::ConditionalProductBasis;

use rayon::prelude::*;

use crate::entanglement::random::{haar_unitary, rng_for};
use crate::entanglement::{eof_convex_roof, OptimizerConfig, PureDecomposition};
use crate::entropy::{dephase, shannon_entropy, spectrum_entropy, von_neumann_entropy, OrthonormalBasis};
use crate::error::{Error, Result};
use crate::optim::{bfgs, nelder_mead};
use crate::qmat::{
    complete_basis, hermitian_eig, normalized, unitary_from_params, Bipartition, CMat, DensityMatrix, Dims,
    PureState, C64, ZERO,
};

/// Conditional outcomes with smaller probability get an arbitrary basis.
const NEGLIGIBLE: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct CoherenceResult {
    pub value: f64,
    /// Over the cut dims `(d_A, d_B)`; expand with [`ConditionalProductBasis::expand_across`].
    pub achieving_basis: Option<ConditionalProductBasis>,
    pub achieving_decomposition: Option<PureDecomposition>,
    pub converged: bool,
}

fn check_dims(a: &Dims, b: &Dims) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(a.total(), b.total()));
    }
    Ok(())
}

/// Shannon entropy of `|⟨b_i|ψ⟩|²`.
pub fn coherence_pure(psi: &PureState, basis: &OrthonormalBasis) -> Result<f64> {
    check_dims(psi.dims(), basis.dims())?;
    shannon_entropy(&basis.overlaps(psi))
}

/// `S(Δ_B ρ) − S(ρ)`.
pub fn relative_coherence(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<f64> {
    check_dims(rho.dims(), basis.dims())?;
    let dephased = dephase(rho, basis)?;
    Ok((von_neumann_entropy(&dephased) - von_neumann_entropy(rho)).max(0.0))
}

/// Minimum of [`coherence_pure`] over conditional product bases across `split`.
///
/// Both measurement orders are searched. For a fixed first-party basis the
/// best conditional bases are known exactly (any basis containing the
/// conditional vector), so only the first unitary is optimized numerically.
pub fn min_coherence_pure(psi: &PureState, split: &Bipartition, cfg: &OptimizerConfig) -> Result<CoherenceResult> {
    let problem = CutProblem::new(&psi.projector(), split, true)?;
    let (cpb, converged) = problem.minimize(cfg)?;
    let basis = cpb.expand_across(psi.dims(), split)?;
    let value = coherence_pure(psi, &basis)?;
    Ok(CoherenceResult { value, achieving_basis: Some(cpb), achieving_decomposition: None, converged })
}

/// Minimum of [`relative_coherence`] over conditional product bases across
/// `split`; an upper bound on the minimum over all locally distinguishable bases.
///
/// Conditional bases are the eigenbases of the conditional states, which is
/// optimal for a fixed first-party basis.
pub fn min_relative_coherence(rho: &DensityMatrix, split: &Bipartition, cfg: &OptimizerConfig) -> Result<CoherenceResult> {
    let problem = CutProblem::new(rho, split, false)?;
    let (cpb, converged) = problem.minimize(cfg)?;
    let basis = cpb.expand_across(rho.dims(), split)?;
    let value = relative_coherence(rho, &basis)?;
    Ok(CoherenceResult { value, achieving_basis: Some(cpb), achieving_decomposition: None, converged })
}

/// Convex roof of the minimized pure-state coherence. The inner minimum is
/// the entanglement entropy, so this is the entanglement-of-formation roof.
pub fn convex_roof_coherence(rho: &DensityMatrix, split: &Bipartition, cfg: &OptimizerConfig) -> Result<CoherenceResult> {
    let roof = eof_convex_roof(rho, split, cfg)?;
    Ok(CoherenceResult {
        value: roof.value,
        achieving_basis: None,
        achieving_decomposition: Some(roof.decomposition),
        converged: roof.converged,
    })
}

/// The state seen as a two-party object across a cut, in both orientations.
struct CutProblem {
    da: usize,
    db: usize,
    /// `blocks[0][a][a']` is the `d_B × d_B` block `⟨a|ρ|a'⟩`; `blocks[1]` the
    /// same with the roles of the two sides exchanged.
    blocks: [Vec<Vec<CMat>>; 2],
    entropy: f64,
    pure: bool,
}

struct Level {
    probs: Vec<f64>,
    conditionals: Vec<CMat>,
}

impl CutProblem {
    fn new(rho: &DensityMatrix, split: &Bipartition, pure: bool) -> Result<Self> {
        split.check(rho.dims())?;
        let (map, da, db) = split.index_map(rho.dims());
        let m = rho.matrix();
        let mut ab = vec![vec![CMat::zeros(db, db); da]; da];
        let mut ba = vec![vec![CMat::zeros(da, da); db]; db];
        for (i, &(a, b)) in map.iter().enumerate() {
            for (j, &(a2, b2)) in map.iter().enumerate() {
                ab[a][a2][(b, b2)] = m[(i, j)];
                ba[b][b2][(a, a2)] = m[(i, j)];
            }
        }
        let entropy = if pure { 0.0 } else { von_neumann_entropy(rho) };
        Ok(Self { da, db, blocks: [ab, ba], entropy, pure })
    }

    fn first_dim(&self, side: usize) -> usize {
        if side == 0 { self.da } else { self.db }
    }

    /// Outcome probabilities and unnormalized conditional states when the
    /// `side` party measures first in the columns of `u`.
    fn level(&self, side: usize, u: &CMat) -> Level {
        let blocks = &self.blocks[side];
        let d = self.first_dim(side);
        let dc = blocks[0][0].rows();
        let mut probs = Vec::with_capacity(d);
        let mut conditionals = Vec::with_capacity(d);
        for i in 0..d {
            let mut c = CMat::zeros(dc, dc);
            for a in 0..d {
                for a2 in 0..d {
                    let w = u[(a, i)].conj() * u[(a2, i)];
                    if w != ZERO {
                        c.add_scaled(&blocks[a][a2], w);
                    }
                }
            }
            probs.push(c.trace().re.max(0.0));
            conditionals.push(c);
        }
        Level { probs, conditionals }
    }

    /// `H(p) + Σ p_i S(ρ_i) − S(ρ)`, the best value for this first basis.
    fn objective(&self, side: usize, u: &CMat) -> f64 {
        let level = self.level(side, u);
        let total: f64 = level.probs.iter().sum();
        let mut h = 0.0;
        for (p, c) in level.probs.iter().zip(&level.conditionals) {
            let p = p / total;
            if p <= 0.0 {
                continue;
            }
            h -= p * p.log2();
            if !self.pure && p > NEGLIGIBLE {
                let spectrum = hermitian_eig(&c.hermitian_part().scale_real(1.0 / (p * total)))
                    .map(|e| e.values)
                    .unwrap_or_default();
                h += p * spectrum_entropy(&spectrum);
            }
        }
        h - self.entropy
    }

    /// The conditional product basis realizing [`Self::objective`] at `u`.
    fn basis(&self, side: usize, u: &CMat) -> Result<ConditionalProductBasis> {
        let level = self.level(side, u);
        let dc = level.conditionals[0].rows();
        let conditional: Vec<CMat> = level
            .probs
            .iter()
            .zip(&level.conditionals)
            .map(|(&p, c)| {
                if p <= NEGLIGIBLE {
                    return CMat::identity(dc);
                }
                if self.pure {
                    // rank one: its range is the conditional vector
                    let col = (0..dc).max_by(|&x, &y| c[(x, x)].re.total_cmp(&c[(y, y)].re)).unwrap_or(0);
                    let v = normalized(&(0..dc).map(|r| c[(r, col)]).collect::<Vec<C64>>());
                    CMat::from_columns(&complete_basis(&[v], dc))
                } else {
                    let eig = hermitian_eig(&c.hermitian_part()).expect("square");
                    CMat::from_columns(&(0..dc).rev().map(|k| eig.vector(k)).collect::<Vec<_>>())
                }
            })
            .collect();
        let dims = Dims::new(vec![self.da, self.db])?;
        let order = if side == 0 { vec![0, 1] } else { vec![1, 0] };
        ConditionalProductBasis::new(dims, order, vec![vec![u.clone()], conditional])
    }

    /// Restart `r` measures the smaller side first when `r` is even. Restart 0
    /// starts from the computational basis, the rest from Haar unitaries.
    fn minimize(&self, cfg: &OptimizerConfig) -> Result<(ConditionalProductBasis, bool)> {
        cfg.validate()?;
        let smaller = if self.da <= self.db { 0 } else { 1 };
        let runs: Vec<(f64, usize, CMat, bool)> = (0..cfg.restarts)
            .into_par_iter()
            .map(|r| {
                let side = if r % 2 == 0 { smaller } else { 1 - smaller };
                let d = self.first_dim(side);
                let u0 = if r == 0 { CMat::identity(d) } else { haar_unitary(d, &mut rng_for(cfg.restart_seed(r))) };
                let (u, value, converged) = self.descend(side, u0, cfg);
                (value, side, u, converged)
            })
            .collect();
        let (_, side, u, converged) = runs
            .into_iter()
            .enumerate()
            .min_by(|(ia, a), (ib, b)| a.0.total_cmp(&b.0).then(ia.cmp(ib)))
            .map(|(_, run)| run)
            .expect("at least one restart");
        Ok((self.basis(side, &u)?, converged))
    }

    /// Nelder–Mead then BFGS on `U₀·exp(iH(θ))`, re-centred after each stage.
    fn descend(&self, side: usize, mut u0: CMat, cfg: &OptimizerConfig) -> (CMat, f64, bool) {
        let d = self.first_dim(side);
        let n = d * d;
        let zero = vec![0.0; n];
        let f = |u0: &CMat, x: &[f64]| self.objective(side, &(u0 * &unitary_from_params(d, x)));

        let nm = nelder_mead(&mut |x| f(&u0, x), &zero, 0.3, cfg.max_iters, cfg.tol * 1e-2);
        u0 = &u0 * &unitary_from_params(d, &nm.x);
        let mut value = nm.value;
        let mut converged = false;
        for _ in 0..3 {
            let polish = bfgs(&mut |x| f(&u0, x), &zero, cfg.max_iters, cfg.tol);
            u0 = &u0 * &unitary_from_params(d, &polish.x);
            let gain = value - polish.value;
            value = polish.value;
            converged = polish.converged;
            if gain <= cfg.tol * 1e-2 {
                break;
            }
        }
        (u0, value, converged)
    }
}
