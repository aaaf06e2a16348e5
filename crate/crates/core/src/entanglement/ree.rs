//! Relative entropy of entanglement by alternating minimization over a
//! finite separable ansatz `σ = Σ_i w_i |a_i⟩⟨a_i| ⊗ |b_i⟩⟨b_i|`.
//!
//! Each iteration takes a projected-gradient step on the weights, a
//! gradient step on the local vectors (sphere retraction), and one random
//! local perturbation whose size halves every 200 iterations. Steps are only
//! accepted when they lower `S(ρ‖σ)`, so the objective never increases.
//! Gradients use the Fréchet derivative of `log σ`.

use rand::Rng;
use rayon::prelude::*;

use crate::entanglement::random::{gaussian_vector, haar_vector, rng_for};
use crate::entanglement::{schmidt_decompose, OptimizerConfig, SeparableAnsatz};
use crate::entropy::spectrum_entropy;
use crate::error::Result;
use crate::optim::project_to_simplex;
use crate::qmat::{
    complete_basis, embed_across, hermitian_eig, normalized, vdot, Bipartition, CMat, DensityMatrix, Eigen,
    PureState, C64,
};

const NULL_EIG: f64 = 1e-12;
const SUPPORT_EIG: f64 = 1e-10;
const SUPPORT_LEAK: f64 = 1e-10;
const ANNEAL_START: f64 = 0.3;
const ANNEAL_HALVING: usize = 200;

/// Best separable ansatz found; `value` upper-bounds `E_R`.
#[derive(Clone, Debug)]
pub struct ReeResult {
    pub value: f64,
    pub ansatz: SeparableAnsatz,
    pub converged: bool,
}

struct Problem<'a> {
    rho: &'a DensityMatrix,
    split: &'a Bipartition,
    rho_eig: Eigen,
    neg_entropy: f64,
    da: usize,
    db: usize,
}

#[derive(Clone)]
struct Point {
    w: Vec<f64>,
    a: Vec<Vec<C64>>,
    b: Vec<Vec<C64>>,
}

impl Point {
    fn sigma(&self, p: &Problem) -> CMat {
        let d = p.rho.dim();
        let mut s = CMat::zeros(d, d);
        for i in 0..self.w.len() {
            if self.w[i] > 0.0 {
                let v = embed_across(&self.a[i], &self.b[i], p.rho.dims(), p.split);
                s.add_scaled(&CMat::outer(&v), C64::new(self.w[i], 0.0));
            }
        }
        s
    }
}

impl<'a> Problem<'a> {
    fn new(rho: &'a DensityMatrix, split: &'a Bipartition) -> Self {
        let rho_eig = rho.eig();
        let neg_entropy = -spectrum_entropy(&rho_eig.values);
        let (_, da, db) = split.index_map(rho.dims());
        Self { rho, split, rho_eig, neg_entropy, da, db }
    }

    /// `S(ρ‖σ)`, `+∞` on support mismatch.
    fn value(&self, sigma_eig: &Eigen) -> f64 {
        let n = self.rho.dim();
        let mut cross = 0.0;
        for k in 0..n {
            let lam = self.rho_eig.values[k];
            if lam <= SUPPORT_EIG {
                continue;
            }
            let v = self.rho_eig.vector(k);
            let (mut leak, mut acc) = (0.0, 0.0);
            for j in 0..n {
                let ov = vdot(&sigma_eig.vector(j), &v).norm_sqr();
                let mu = sigma_eig.values[j];
                if mu <= NULL_EIG {
                    leak += ov;
                } else {
                    acc += ov * mu.log2();
                }
            }
            if leak > SUPPORT_LEAK {
                return f64::INFINITY;
            }
            cross += lam * acc;
        }
        (self.neg_entropy - cross).max(0.0)
    }

    fn eval(&self, x: &Point) -> (f64, Eigen) {
        let e = hermitian_eig(&x.sigma(self)).expect("σ is Hermitian");
        (self.value(&e), e)
    }

    /// `D log₂ σ [ρ]`, restricted to the support of σ.
    fn frechet(&self, sigma_eig: &Eigen) -> CMat {
        let n = self.rho.dim();
        let v = &sigma_eig.vectors;
        let mu = &sigma_eig.values;
        let rt = &(&v.adjoint() * self.rho.matrix()) * v;
        let ln2 = std::f64::consts::LN_2;
        let inner = CMat::from_fn(n, n, |j, k| {
            let (x, y) = (mu[j], mu[k]);
            if x <= NULL_EIG || y <= NULL_EIG {
                return C64::new(0.0, 0.0);
            }
            let l = if (x - y).abs() > 1e-12 * x.max(y) { (x.log2() - y.log2()) / (x - y) } else { 1.0 / (x * ln2) };
            rt[(j, k)] * l
        });
        &(v * &inner) * &v.adjoint()
    }

    fn weight_gradient(&self, x: &Point, q: &CMat) -> Vec<f64> {
        (0..x.w.len())
            .map(|i| {
                let pi = embed_across(&x.a[i], &x.b[i], self.rho.dims(), self.split);
                -q.sandwich(&pi, &pi).re
            })
            .collect()
    }

    /// Tangent gradients `(g_a, g_b)` of every local vector.
    fn vector_gradients(&self, x: &Point, q: &CMat) -> Vec<(Vec<C64>, Vec<C64>)> {
        let (map, _, _) = self.split.index_map(self.rho.dims());
        (0..x.w.len())
            .map(|i| {
                let pi = embed_across(&x.a[i], &x.b[i], self.rho.dims(), self.split);
                let qpi = q.mat_vec(&pi);
                let mut ga = vec![C64::new(0.0, 0.0); self.da];
                let mut gb = vec![C64::new(0.0, 0.0); self.db];
                for (idx, &(al, be)) in map.iter().enumerate() {
                    ga[al] -= x.w[i] * x.b[i][be].conj() * qpi[idx];
                    gb[be] -= x.w[i] * x.a[i][al].conj() * qpi[idx];
                }
                (tangent(&x.a[i], ga), tangent(&x.b[i], gb))
            })
            .collect()
    }
}

fn tangent(v: &[C64], g: Vec<C64>) -> Vec<C64> {
    let c = vdot(v, &g);
    g.iter().zip(v).map(|(x, y)| x - c * y).collect()
}

fn step_vector(v: &[C64], g: &[C64], t: f64) -> Vec<C64> {
    normalized(&v.iter().zip(g).map(|(x, y)| x - y * t).collect::<Vec<_>>())
}

struct Run {
    point: Point,
    value: f64,
    converged: bool,
}

fn minimize(p: &Problem, mut x: Point, cfg: &OptimizerConfig, seed: u64) -> Run {
    let mut rng = rng_for(seed);
    let (mut f, mut eig) = p.eval(&x);
    let mut eta_w = 0.1;
    let mut eta_v = 0.1;
    let mut history = vec![f];
    let mut converged = false;
    let n = x.w.len();

    for iter in 0..cfg.max_iters {
        if f <= 0.0 {
            converged = true;
            break;
        }
        // weights
        let q = p.frechet(&eig);
        let gw = p.weight_gradient(&x, &q);
        let mut t = eta_w;
        for _ in 0..40 {
            let w_new = project_to_simplex(&x.w.iter().zip(&gw).map(|(w, g)| w - t * g).collect::<Vec<_>>());
            let slope: f64 = gw.iter().zip(w_new.iter().zip(&x.w)).map(|(g, (a, b))| g * (a - b)).sum();
            if slope >= 0.0 {
                break;
            }
            let cand = Point { w: w_new, ..x.clone() };
            let (fc, ec) = p.eval(&cand);
            if fc <= f + 1e-4 * slope {
                x = cand;
                f = fc;
                eig = ec;
                eta_w = (t * 2.0).min(1e3);
                break;
            }
            t *= 0.5;
        }

        // local vectors
        let q = p.frechet(&eig);
        let grads = p.vector_gradients(&x, &q);
        let g2: f64 = grads
            .iter()
            .map(|(ga, gb)| ga.iter().chain(gb).map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        if g2 > 0.0 {
            let mut t = eta_v;
            for _ in 0..40 {
                let mut cand = x.clone();
                for i in 0..n {
                    cand.a[i] = step_vector(&x.a[i], &grads[i].0, t);
                    cand.b[i] = step_vector(&x.b[i], &grads[i].1, t);
                }
                let (fc, ec) = p.eval(&cand);
                if fc <= f - 1e-4 * 2.0 * t * g2 {
                    x = cand;
                    f = fc;
                    eig = ec;
                    eta_v = (t * 2.0).min(1e3);
                    break;
                }
                t *= 0.5;
            }
        }

        // annealed random local move on one weighted term
        let temperature = ANNEAL_START * 0.5f64.powi((iter / ANNEAL_HALVING) as i32);
        let i = rng.gen_range(0..n);
        if x.w[i] > 0.0 && temperature > 1e-9 {
            let mut cand = x.clone();
            let ka: Vec<C64> = gaussian_vector(p.da, &mut rng);
            let kb: Vec<C64> = gaussian_vector(p.db, &mut rng);
            cand.a[i] = normalized(&x.a[i].iter().zip(&ka).map(|(v, k)| v + k * temperature).collect::<Vec<_>>());
            cand.b[i] = normalized(&x.b[i].iter().zip(&kb).map(|(v, k)| v + k * temperature).collect::<Vec<_>>());
            let (fc, ec) = p.eval(&cand);
            if fc < f {
                x = cand;
                f = fc;
                eig = ec;
            }
        }

        history.push(f);
        if iter >= 2 * ANNEAL_HALVING && history[history.len() - 51] - f < cfg.tol * 1e-2 {
            converged = true;
            break;
        }
    }
    Run { point: x, value: f, converged }
}

/// Product basis built from the Schmidt vectors of the leading eigenvector
/// of ρ, weighted by the populations of ρ in it.
fn schmidt_start(p: &Problem, n: usize) -> Result<Point> {
    let top = p.rho_eig.vector(p.rho.dim() - 1);
    let psi = PureState::from_unnormalized(p.rho.dims().clone(), top)?;
    let form = schmidt_decompose(&psi, p.split)?;
    let left: Vec<Vec<C64>> = form.left_basis.iter().map(|s| s.amplitudes().to_vec()).collect();
    let right: Vec<Vec<C64>> = form.right_basis.iter().map(|s| s.amplitudes().to_vec()).collect();
    let left = complete_basis(&left, p.da);
    let right = complete_basis(&right, p.db);
    let mut terms = Vec::new();
    for l in &left {
        for r in &right {
            let pi = embed_across(l, r, p.rho.dims(), p.split);
            let pop = p.rho.matrix().sandwich(&pi, &pi).re.max(0.0);
            terms.push((pop, l.clone(), r.clone()));
        }
    }
    // keep the n most populated terms
    terms.sort_by(|x, y| y.0.total_cmp(&x.0));
    terms.truncate(n);
    let mut rng = rng_for(0);
    while terms.len() < n {
        terms.push((0.0, haar_vector(p.da, &mut rng), haar_vector(p.db, &mut rng)));
    }
    let total: f64 = terms.iter().map(|t| t.0).sum();
    Ok(Point {
        w: terms.iter().map(|t| t.0 / total).collect(),
        a: terms.iter().map(|t| t.1.clone()).collect(),
        b: terms.iter().map(|t| t.2.clone()).collect(),
    })
}

fn random_start(p: &Problem, n: usize, seed: u64) -> Point {
    let mut rng = rng_for(seed);
    Point {
        w: vec![1.0 / n as f64; n],
        a: (0..n).map(|_| haar_vector(p.da, &mut rng)).collect(),
        b: (0..n).map(|_| haar_vector(p.db, &mut rng)).collect(),
    }
}

/// Upper bound on the relative entropy of entanglement across `split`.
pub fn relative_entropy_of_entanglement(
    rho: &DensityMatrix,
    split: &Bipartition,
    cfg: &OptimizerConfig,
) -> Result<ReeResult> {
    cfg.validate()?;
    split.check(rho.dims())?;
    let problem = Problem::new(rho, split);
    let n = cfg.ansatz_size.unwrap_or(rho.dim() * rho.dim());
    let first = schmidt_start(&problem, n)?;

    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let start = if i == 0 { first.clone() } else { random_start(&problem, n, cfg.restart_seed(i)) };
            minimize(&problem, start, cfg, cfg.restart_seed(i).wrapping_add(0x9e37_79b9))
        })
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .expect("at least one restart");

    let states = (0..n)
        .map(|i| PureState::new(rho.dims().clone(), embed_across(&best.point.a[i], &best.point.b[i], rho.dims(), split)))
        .collect::<Result<Vec<_>>>()?;
    let wsum: f64 = best.point.w.iter().sum();
    let ansatz = SeparableAnsatz::new(split.clone(), best.point.w.iter().map(|w| w / wsum).collect(), states)?;
    Ok(ReeResult { value: best.value, ansatz, converged: best.converged })
}
