//! Entanglement of formation as a convex roof over pure-state decompositions.
//!
//! Every size-`k` decomposition of `ρ = Σ_j λ_j |e_j⟩⟨e_j|` (rank `r`) is
//! `|ψ̃_i⟩ = Σ_j U_ij √λ_j |e_j⟩` for a `k × r` matrix `U` with orthonormal
//! columns, and `p_i = ‖ψ̃_i‖²`. The average entanglement is minimized over
//! that Stiefel manifold with Riemannian conjugate gradients, using the
//! analytic gradient of `Σ_i p_i S(tr_B ψ_i)` and a Gram–Schmidt retraction.

use rayon::prelude::*;

use crate::entanglement::random::{gaussian_vector, gram_schmidt, rng_for};
use crate::entanglement::{entanglement_entropy, OptimizerConfig, PureDecomposition};
use crate::error::Result;
use crate::qmat::{hermitian_eig, vdot, Bipartition, CMat, DensityMatrix, Dims, PureState, C64, ZERO};

const SPECTRAL_CUTOFF: f64 = 1e-12;
const MIN_WEIGHT: f64 = 1e-14;

/// Best decomposition found and its average entanglement (an upper bound on `E_F`).
#[derive(Clone, Debug)]
pub struct RoofResult {
    pub value: f64,
    pub decomposition: PureDecomposition,
    pub converged: bool,
    /// Number of terms `k` in the parameterized decompositions.
    pub cardinality: usize,
}

#[derive(Clone, Copy, Debug)]
enum Functional {
    /// `p·S(σ/p)` in bits
    Entropy,
    /// `p·(1 − tr(σ/p)²)`, a smooth surrogate used to warm up random starts
    Linear,
}

/// `k = min(r², 2·Πd)`, and never below `r`.
pub fn decomposition_cardinality(rank: usize, total_dim: usize) -> usize {
    (rank * rank).min(2 * total_dim).max(rank)
}

pub(crate) struct RoofProblem {
    dims: Dims,
    map: Vec<(usize, usize)>,
    da: usize,
    db: usize,
    /// `√λ_j |e_j⟩`
    spectral: Vec<Vec<C64>>,
    k: usize,
}

impl RoofProblem {
    pub(crate) fn new(rho: &DensityMatrix, split: &Bipartition) -> Result<Self> {
        split.check(rho.dims())?;
        let eig = rho.eig();
        let mut spectral = Vec::new();
        for idx in (0..rho.dim()).rev() {
            let lam = eig.values[idx];
            if lam > SPECTRAL_CUTOFF {
                spectral.push(eig.vector(idx).iter().map(|z| z * lam.sqrt()).collect());
            }
        }
        let (map, da, db) = split.index_map(rho.dims());
        let k = decomposition_cardinality(spectral.len(), rho.dim());
        Ok(Self { dims: rho.dims().clone(), map, da, db, spectral, k })
    }

    fn rank(&self) -> usize {
        self.spectral.len()
    }

    fn components(&self, u: &CMat) -> Vec<Vec<C64>> {
        let n = self.dims.total();
        (0..self.k)
            .map(|i| {
                let mut v = vec![ZERO; n];
                for (j, e) in self.spectral.iter().enumerate() {
                    let c = u[(i, j)];
                    for (x, y) in v.iter_mut().zip(e) {
                        *x += c * y;
                    }
                }
                v
            })
            .collect()
    }

    /// Objective and its Wirtinger gradient `∂f/∂Ū`.
    fn eval(&self, u: &CMat, functional: Functional) -> (f64, CMat) {
        let comps = self.components(u);
        let mut total = 0.0;
        let mut grad = CMat::zeros(self.k, self.rank());
        for (i, psi) in comps.iter().enumerate() {
            let (val, g) = self.term(psi, functional);
            total += val;
            if let Some(g) = g {
                for (j, e) in self.spectral.iter().enumerate() {
                    grad[(i, j)] = vdot(e, &g);
                }
            }
        }
        (total, grad)
    }

    fn term(&self, psi: &[C64], functional: Functional) -> (f64, Option<Vec<C64>>) {
        let mut m = CMat::zeros(self.da, self.db);
        for (idx, &(a, b)) in self.map.iter().enumerate() {
            m[(a, b)] = psi[idx];
        }
        let left = self.da <= self.db;
        let sigma = if left { &m * &m.adjoint() } else { &m.adjoint() * &m };
        let eig = hermitian_eig(&sigma).expect("Gram matrix is Hermitian");
        let mu: Vec<f64> = eig.values.iter().map(|x| x.max(0.0)).collect();
        let p: f64 = mu.iter().sum();
        if p < MIN_WEIGHT * MIN_WEIGHT {
            return (0.0, None);
        }
        let (val, g) = match functional {
            Functional::Entropy => {
                let val = mu.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum::<f64>() + p * p.log2();
                let lp = p.log2();
                let g = eig.apply_fn(|x| C64::new(lp - x.max(1e-300).log2(), 0.0));
                (val, g)
            }
            Functional::Linear => {
                let purity: f64 = mu.iter().map(|x| x * x).sum();
                let val = p - purity / p;
                let mut g = CMat::identity(sigma.rows()).scale_real(1.0 + purity / (p * p));
                g.add_scaled(&sigma, C64::new(-2.0 / p, 0.0));
                (val, g)
            }
        };
        let gm = if left { &g * &m } else { &m * &g };
        let full = self.map.iter().map(|&(a, b)| gm[(a, b)]).collect();
        (val.max(0.0), Some(full))
    }

    fn decomposition(&self, u: &CMat) -> Result<PureDecomposition> {
        let comps = self.components(u);
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for psi in comps {
            let p: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            if p > MIN_WEIGHT {
                weights.push(p);
                states.push(PureState::from_unnormalized(self.dims.clone(), psi)?);
            }
        }
        let s: f64 = weights.iter().sum();
        PureDecomposition::new(weights.iter().map(|w| w / s).collect(), states)
    }
}

fn retract(u: &CMat) -> CMat {
    let cols: Vec<Vec<C64>> = (0..u.cols()).map(|c| u.column(c)).collect();
    CMat::from_columns(&gram_schmidt(cols))
}

/// Tangent projection at `u`: `X − U·herm(U†X)`.
fn project(u: &CMat, x: &CMat) -> CMat {
    let ux = &u.adjoint() * x;
    x.sub(&(u * &ux.hermitian_part()))
}

fn real_inner(a: &CMat, b: &CMat) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub(crate) struct Descent {
    pub u: CMat,
    pub value: f64,
    pub converged: bool,
}

/// Riemannian Polak–Ribière conjugate gradient with Armijo backtracking.
fn descend(problem: &RoofProblem, u0: CMat, functional: Functional, max_iters: usize, tol: f64) -> Descent {
    let mut u = u0;
    let (mut f, gamma) = problem.eval(&u, functional);
    let mut grad = project(&u, &gamma);
    let mut dir = grad.scale_real(-1.0);
    let mut steepest = true;
    let mut step = 0.1;
    let mut history = vec![f];
    let mut converged = false;

    for iter in 0..max_iters {
        let gnorm2 = real_inner(&grad, &grad);
        if gnorm2.sqrt() <= tol {
            converged = true;
            break;
        }
        let mut slope = 2.0 * real_inner(&grad, &dir);
        if slope >= 0.0 {
            dir = grad.scale_real(-1.0);
            steepest = true;
            slope = -2.0 * gnorm2;
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..50 {
            let cand = retract(&u.add(&dir.scale_real(t)));
            let (fc, gc) = problem.eval(&cand, functional);
            if fc <= f + 1e-4 * t * slope {
                accepted = Some((cand, fc, gc));
                break;
            }
            t *= 0.5;
        }
        let Some((un, fn_, gamma_n)) = accepted else {
            if !steepest {
                dir = grad.scale_real(-1.0);
                steepest = true;
                continue;
            }
            converged = true;
            break;
        };
        step = (t * 2.0).min(10.0);
        let grad_n = project(&un, &gamma_n);
        let moved_grad = project(&un, &grad);
        let moved_dir = project(&un, &dir);
        let beta = (real_inner(&grad_n, &grad_n.sub(&moved_grad)) / gnorm2).max(0.0);
        dir = grad_n.scale_real(-1.0).add(&moved_dir.scale_real(beta));
        steepest = beta == 0.0;
        u = un;
        f = fn_;
        grad = grad_n;
        history.push(f);
        if iter >= 50 && history[history.len() - 51] - f < tol * 1e-2 {
            converged = true;
            break;
        }
    }
    Descent { u, value: f, converged }
}

fn random_isometry(k: usize, r: usize, seed: u64) -> CMat {
    let mut rng = rng_for(seed);
    let cols: Vec<Vec<C64>> = (0..r).map(|_| gaussian_vector(k, &mut rng)).collect();
    CMat::from_columns(&gram_schmidt(cols))
}

fn spectral_start(k: usize, r: usize) -> CMat {
    CMat::from_fn(k, r, |i, j| if i == j { C64::new(1.0, 0.0) } else { ZERO })
}

/// Upper bound on the entanglement of formation across `split`.
///
/// Restart 0 starts from the spectral decomposition; the others start from
/// Haar-random isometries seeded with `cfg.restart_seed(i)` and are first
/// relaxed on the linear-entropy roof.
pub fn eof_convex_roof(rho: &DensityMatrix, split: &Bipartition, cfg: &OptimizerConfig) -> Result<RoofResult> {
    cfg.validate()?;
    let problem = RoofProblem::new(rho, split)?;
    let (k, r) = (problem.k, problem.rank());

    if r == 1 {
        let psi = PureState::from_unnormalized(rho.dims().clone(), problem.spectral[0].clone())?;
        let value = entanglement_entropy(&psi, split)?;
        return Ok(RoofResult {
            value,
            decomposition: PureDecomposition::new(vec![1.0], vec![psi])?,
            converged: true,
            cardinality: 1,
        });
    }

    let runs: Vec<Descent> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                descend(&problem, spectral_start(k, r), Functional::Entropy, cfg.max_iters, cfg.tol)
            } else {
                let u0 = random_isometry(k, r, cfg.restart_seed(i));
                let warm = descend(&problem, u0, Functional::Linear, cfg.max_iters / 4 + 1, cfg.tol);
                descend(&problem, warm.u, Functional::Entropy, cfg.max_iters, cfg.tol)
            }
        })
        .collect();

    let best = runs
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)))
        .map(|(_, d)| d)
        .expect("at least one restart");
    let decomposition = problem.decomposition(&best.u)?;
    // report the value of the returned decomposition itself
    let value = decomposition.average(|psi| entanglement_entropy(psi, split))?;
    Ok(RoofResult { value, decomposition, converged: best.converged, cardinality: k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::random::{random_density, random_product_pure_with, random_weights};
    use crate::entanglement::{eof_2q, random_pure};

    fn cut() -> Bipartition {
        Bipartition::first(2).unwrap()
    }

    fn d(v: &[usize]) -> Dims {
        Dims::new(v.to_vec()).unwrap()
    }

    fn cfg(seed: u64) -> OptimizerConfig {
        OptimizerConfig { restarts: 8, seed, ..Default::default() }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let rho = random_density(&d(&[2, 3]), 3, 17).unwrap();
        let problem = RoofProblem::new(&rho, &cut()).unwrap();
        let u = random_isometry(problem.k, problem.rank(), 4);
        for functional in [Functional::Entropy, Functional::Linear] {
            let (_, grad) = problem.eval(&u, functional);
            let h = 1e-6;
            for (i, j) in [(0, 0), (2, 1), (problem.k - 1, 2)] {
                for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let mut up = u.clone();
                    up[(i, j)] += dir * h;
                    let mut um = u.clone();
                    um[(i, j)] -= dir * h;
                    let fd = (problem.eval(&up, functional).0 - problem.eval(&um, functional).0) / (2.0 * h);
                    // df = 2 Re(conj(Γ)·dU)
                    let analytic = 2.0 * (grad[(i, j)].conj() * dir).re;
                    assert!((fd - analytic).abs() < 1e-5, "{functional:?} {fd} vs {analytic}");
                }
            }
        }
    }

    #[test]
    fn pure_input_gives_entanglement_entropy() {
        let psi = random_pure(&d(&[2, 3]), 8);
        let res = eof_convex_roof(&psi.projector(), &cut(), &cfg(1)).unwrap();
        let e = entanglement_entropy(&psi, &cut()).unwrap();
        assert!((res.value - e).abs() < 1e-10);
        assert_eq!(res.decomposition.len(), 1);
    }

    #[test]
    fn separable_mixture_reaches_zero() {
        let dims = d(&[2, 2]);
        let mut rng = rng_for(99);
        let states: Vec<_> = (0..3).map(|_| random_product_pure_with(&dims, &mut rng)).collect();
        let w = random_weights(3, &mut rng);
        let rho = DensityMatrix::mixture(&w, &states).unwrap();
        let res = eof_convex_roof(&rho, &cut(), &cfg(2)).unwrap();
        assert!(res.value < 1e-6, "value {}", res.value);
    }

    #[test]
    fn rank_two_matches_wootters() {
        for seed in 0..5 {
            let rho = random_density(&d(&[2, 2]), 2, 300 + seed).unwrap();
            let res = eof_convex_roof(&rho, &cut(), &cfg(seed)).unwrap();
            let oracle = eof_2q(&rho).unwrap();
            assert!((res.value - oracle).abs() < 1e-3, "seed {seed}: {} vs {oracle}", res.value);
            assert!(res.decomposition.reconstruct().max_abs_diff(rho.matrix()) < 1e-8);
        }
    }

    #[test]
    fn never_worse_than_spectral_decomposition() {
        let rho = random_density(&d(&[2, 3]), 4, 5).unwrap();
        let eig = rho.eig();
        let mut spectral_value = 0.0;
        for k in 0..rho.dim() {
            if eig.values[k] > 1e-12 {
                let psi = PureState::from_unnormalized(rho.dims().clone(), eig.vector(k)).unwrap();
                spectral_value += eig.values[k] * entanglement_entropy(&psi, &cut()).unwrap();
            }
        }
        let res = eof_convex_roof(&rho, &cut(), &cfg(3)).unwrap();
        assert!(res.value <= spectral_value + 1e-12);
        assert_eq!(res.cardinality, 12);
    }

    #[test]
    fn cardinality_rule() {
        assert_eq!(decomposition_cardinality(1, 4), 1);
        assert_eq!(decomposition_cardinality(2, 4), 4);
        assert_eq!(decomposition_cardinality(4, 4), 8);
        assert_eq!(decomposition_cardinality(6, 6), 12);
    }
}
