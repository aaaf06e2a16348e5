//! Reference computations built on nalgebra, independent of the crate's own
//! eigensolver and closed forms.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};

use entcoh::entropy::OrthonormalBasis;
use entcoh::qmat::{CMat, DensityMatrix, PureState};

pub type NaMat = DMatrix<Complex<f64>>;

pub fn to_na(m: &CMat) -> NaMat {
    NaMat::from_fn(m.rows(), m.cols(), |r, c| {
        let z = m[(r, c)];
        Complex::new(z.re, z.im)
    })
}

pub fn hermitian_eigenvalues(m: &NaMat) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn xlog2x_sum(values: &[f64]) -> f64 {
    values.iter().filter(|&&x| x > 1e-12).map(|&x| -x * x.log2()).sum()
}

pub fn binary_entropy(x: f64) -> f64 {
    xlog2x_sum(&[x, 1.0 - x])
}

pub fn entropy(rho: &DensityMatrix) -> f64 {
    xlog2x_sum(&hermitian_eigenvalues(&to_na(rho.matrix())))
}

/// `f(H)` for Hermitian `H` via nalgebra's eigendecomposition.
fn hermitian_fn(h: &NaMat, f: impl Fn(f64) -> f64) -> NaMat {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut out = NaMat::zeros(n, n);
    for k in 0..n {
        let v = eig.eigenvectors.column(k);
        let fx = Complex::new(f(eig.eigenvalues[k]), 0.0);
        out += v * v.adjoint() * fx;
    }
    out
}

/// `S(ρ‖σ)` in bits for full-support `σ`.
pub fn relative_entropy(rho: &NaMat, sigma: &NaMat) -> f64 {
    let log = |x: f64| if x > 1e-300 { x.log2() } else { -1000.0 };
    let a = rho * hermitian_fn(rho, |x| if x > 1e-14 { x.log2() } else { 0.0 });
    let b = rho * hermitian_fn(sigma, log);
    (a.trace() - b.trace()).re
}

/// Entanglement entropy across the first party via SVD of the coefficient matrix.
pub fn entanglement_entropy_first(psi: &PureState) -> f64 {
    let dims = psi.dims().as_slice();
    let da = dims[0];
    let db = psi.dims().total() / da;
    let m = NaMat::from_fn(da, db, |a, b| {
        let z = psi.amplitudes()[a * db + b];
        Complex::new(z.re, z.im)
    });
    let s: Vec<f64> = m.singular_values().iter().map(|x| x * x).collect();
    xlog2x_sum(&s)
}

/// Wootters concurrence from the eigenvalues of `ρ ρ̃` (complex Schur form).
pub fn wootters_concurrence(rho: &DensityMatrix) -> f64 {
    let r = to_na(rho.matrix());
    let yy = NaMat::from_fn(4, 4, |i, j| {
        if i + j == 3 {
            Complex::new(if i == 0 || i == 3 { -1.0 } else { 1.0 }, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let tilde = &yy * r.conjugate() * &yy;
    let product = &r * tilde;
    let eig = product.schur().eigenvalues().expect("complex Schur form is triangular");
    let mut l: Vec<f64> = eig.iter().map(|z| z.re.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

pub fn wootters_eof(rho: &DensityMatrix) -> f64 {
    let c = wootters_concurrence(rho);
    binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0)
}

/// Smallest eigenvalue of the partial transpose on the first qubit of a 2×2 state.
pub fn pt_min_eigenvalue_2x2(rho: &DensityMatrix) -> f64 {
    let r = to_na(rho.matrix());
    // |a b⟩⟨a' b'| ↦ |a' b⟩⟨a b'|
    let pt = NaMat::from_fn(4, 4, |i, j| {
        let (a, b, a2, b2) = (i / 2, i % 2, j / 2, j % 2);
        r[(a2 * 2 + b, a * 2 + b2)]
    });
    hermitian_eigenvalues(&pt)[0]
}

fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, x) in u.iter().enumerate() {
        acc += x;
        let t = (acc - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// `min_w S(ρ‖Σ w_i |b_i⟩⟨b_i|)` by projected gradient on the simplex with
/// Barzilai–Borwein steps and Armijo backtracking (500 iterations, tol 1e-7).
pub fn min_relative_entropy_to_basis_mixtures(rho: &DensityMatrix, basis: &OrthonormalBasis) -> f64 {
    const FLOOR: f64 = 1e-12;
    let r = to_na(rho.matrix());
    let projectors: Vec<NaMat> = basis.elements().iter().map(|e| to_na(&CMat::outer(e.amplitudes()))).collect();
    let n = projectors.len();
    let f = |w: &[f64]| {
        let mut sigma = NaMat::zeros(r.nrows(), r.ncols());
        for (p, wi) in projectors.iter().zip(w) {
            sigma += p * Complex::new(wi.max(FLOOR), 0.0);
        }
        relative_entropy(&r, &sigma)
    };
    let grad = |w: &[f64]| -> Vec<f64> {
        let h = 1e-7;
        (0..n)
            .map(|i| {
                let mut up = w.to_vec();
                let mut dn = w.to_vec();
                up[i] += h;
                dn[i] = (dn[i] - h).max(FLOOR);
                (f(&up) - f(&dn)) / (up[i] - dn[i])
            })
            .collect()
    };
    let feasible = |w: Vec<f64>| -> Vec<f64> {
        let w: Vec<f64> = w.into_iter().map(|x| x.max(FLOOR)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    };

    let mut w = vec![1.0 / n as f64; n];
    let mut fw = f(&w);
    let mut g = grad(&w);
    let mut step = 0.1;
    for _ in 0..500 {
        let mut t = step;
        let (mut wn, mut fwn);
        loop {
            let trial: Vec<f64> = w.iter().zip(&g).map(|(x, gi)| x - t * gi).collect();
            wn = feasible(project_simplex(&trial));
            fwn = f(&wn);
            let decrease: f64 = g.iter().zip(&wn).zip(&w).map(|((gi, a), b)| gi * (a - b)).sum();
            if fwn <= fw + 1e-4 * decrease || t < 1e-14 {
                break;
            }
            t *= 0.5;
        }
        let gn = grad(&wn);
        let s: Vec<f64> = wn.iter().zip(&w).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let ss: f64 = s.iter().map(|x| x * x).sum();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let moved = ss.sqrt();
        w = wn;
        fw = fwn;
        g = gn;
        if moved < 1e-7 {
            break;
        }
        step = if sy > 1e-20 { (ss / sy).clamp(1e-6, 10.0) } else { 0.1 };
    }
    fw
}
