//! Entanglement detection and quantification.
//!
//! Closed forms (Schmidt coefficients, PPT, two-qubit concurrence and
//! entanglement of formation) live here; the two variational quantities are
//! in [`roof`] (entanglement of formation as a convex roof) and [`ree`]
//! (relative entropy of entanglement). Both optimizers return upper bounds
//! together with a convergence flag.

pub mod random;
pub mod ree;
pub mod roof;

use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, spectrum_entropy};
use crate::error::{invalid, Error, Result};
use crate::qmat::{
    hermitian_eig, partial_transpose, reshape_across, Bipartition, CMat, DensityMatrix,
    PureState, C64,
};

pub use random::{random_density, random_pure};
pub use ree::{relative_entropy_of_entanglement, ReeResult};
pub use roof::{eof_convex_roof, RoofResult};

/// Schmidt coefficients below this are dropped.
pub const SCHMIDT_CUTOFF: f64 = 1e-10;
/// A second Schmidt coefficient above this means entangled.
pub const ENTANGLED_TOL: f64 = 1e-8;
/// PPT holds when the partial transpose has no eigenvalue below `-PPT_TOL`.
pub const PPT_TOL: f64 = 1e-9;

/// Settings shared by every variational routine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Product states in the separable ansatz; `None` means `(Πd)²`.
    pub ansatz_size: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 32, max_iters: 2000, tol: 1e-7, seed: 0, ansatz_size: None }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 || self.ansatz_size == Some(0) {
            return Err(invalid("optimizer counts must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("optimizer tolerance must be positive"));
        }
        Ok(())
    }

    /// Seed of one restart: `seed ⊕ restart`.
    pub fn restart_seed(&self, restart: usize) -> u64 {
        self.seed ^ restart as u64
    }
}

/// `ψ = Σ α_i |l_i⟩ ⊗ |r_i⟩` with `α` descending.
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<PureState>,
    pub right_basis: Vec<PureState>,
}

/// All squared Schmidt coefficients (descending, untruncated).
pub fn schmidt_spectrum(psi: &PureState, split: &Bipartition) -> Result<Vec<f64>> {
    split.check(psi.dims())?;
    let m = reshape_across(psi.amplitudes(), psi.dims(), split);
    let small = if m.rows() <= m.cols() { &m * &m.adjoint() } else { &m.adjoint() * &m };
    let mut values = hermitian_eig(&small)?.values;
    values.reverse();
    Ok(values.into_iter().map(|x| x.max(0.0)).collect())
}

pub fn schmidt_decompose(psi: &PureState, split: &Bipartition) -> Result<SchmidtForm> {
    if psi.dims().parties() < 2 {
        return Err(invalid("Schmidt decomposition needs at least two subsystems"));
    }
    split.check(psi.dims())?;
    let m = reshape_across(psi.amplitudes(), psi.dims(), split);
    let eig = hermitian_eig(&(&m * &m.adjoint()))?;
    let dims_a = psi.dims().select(split.party_set_a())?;
    let dims_b = psi.dims().select(&split.party_set_b())?;

    let mut terms = Vec::new();
    for k in (0..m.rows()).rev() {
        let l = eig.vector(k);
        // row l† M has norm α_k to absolute rounding accuracy
        let row: Vec<C64> = (0..m.cols())
            .map(|b| (0..m.rows()).map(|a| l[a].conj() * m[(a, b)]).sum())
            .collect();
        let alpha = crate::qmat::norm(&row);
        if alpha > SCHMIDT_CUTOFF {
            terms.push((alpha, l, row.iter().map(|z| z / alpha).collect::<Vec<_>>()));
        }
    }
    terms.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut form = SchmidtForm { coefficients: vec![], left_basis: vec![], right_basis: vec![] };
    for (alpha, l, r) in terms {
        form.coefficients.push(alpha);
        form.left_basis.push(PureState::from_unnormalized(dims_a.clone(), l)?);
        form.right_basis.push(PureState::from_unnormalized(dims_b.clone(), r)?);
    }
    Ok(form)
}

/// Second Schmidt coefficient (0 for product states).
fn second_schmidt(psi: &PureState, split: &Bipartition) -> Result<f64> {
    let m = reshape_across(psi.amplitudes(), psi.dims(), split);
    let eig = hermitian_eig(&(&m * &m.adjoint()))?;
    let n = m.rows();
    if n < 2 {
        return Ok(0.0);
    }
    let norms: Vec<f64> = (0..n)
        .map(|k| {
            let l = eig.vector(k);
            (0..m.cols())
                .map(|b| (0..n).map(|a| l[a].conj() * m[(a, b)]).sum::<C64>().norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let mut sorted = norms;
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted[1])
}

pub fn is_entangled_pure(psi: &PureState, split: &Bipartition) -> Result<bool> {
    split.check(psi.dims())?;
    Ok(second_schmidt(psi, split)? > ENTANGLED_TOL)
}

/// Entangled across every bipartition.
pub fn is_gme_pure(psi: &PureState) -> Result<bool> {
    let m = psi.dims().parties();
    if m < 2 {
        return Err(invalid("genuine multiparty entanglement needs at least two parties"));
    }
    for split in Bipartition::all(m) {
        if !is_entangled_pure(psi, &split)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First bipartition across which `psi` is a product, if any.
pub fn product_cut(psi: &PureState) -> Result<Option<Bipartition>> {
    for split in Bipartition::all(psi.dims().parties()) {
        if !is_entangled_pure(psi, &split)? {
            return Ok(Some(split));
        }
    }
    Ok(None)
}

/// Entropy of entanglement in ebits.
pub fn entanglement_entropy(psi: &PureState, split: &Bipartition) -> Result<f64> {
    Ok(spectrum_entropy(&schmidt_spectrum(psi, split)?))
}

pub fn is_ppt(rho: &DensityMatrix, split: &Bipartition) -> Result<(bool, f64)> {
    let pt = partial_transpose(rho, split)?;
    let min = hermitian_eig(&pt)?.values[0];
    Ok((min >= -PPT_TOL, min))
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dims().as_slice() != [2, 2] {
        return Err(invalid(format!("two-qubit formula needs dims 2x2, got {}", rho.dims())));
    }
    Ok(())
}

/// Wootters concurrence.
pub fn concurrence_2q(rho: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho)?;
    // Y⊗Y in the computational basis is the anti-diagonal (-1, 1, 1, -1)
    let mut yy = CMat::zeros(4, 4);
    for (r, s) in [(0usize, -1.0), (1, 1.0), (2, 1.0), (3, -1.0)] {
        yy[(r, 3 - r)] = C64::new(s, 0.0);
    }
    let flipped = &(&yy * &rho.matrix().conj()) * &yy;
    let sqrt_rho = rho.eig().apply_fn(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let h = &(&sqrt_rho * &flipped) * &sqrt_rho;
    let mut lam: Vec<f64> = hermitian_eig(&h.hermitian_part())?.values.iter().map(|x| x.max(0.0).sqrt()).collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0))
}

/// Two-qubit entanglement of formation `h((1+√(1−C²))/2)`.
pub fn eof_2q(rho: &DensityMatrix) -> Result<f64> {
    let c = concurrence_2q(rho)?;
    Ok(binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0))
}

/// `ρ = Σ p_i |ψ_i⟩⟨ψ_i|`
#[derive(Clone, Debug)]
pub struct PureDecomposition {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl PureDecomposition {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(invalid("decomposition needs one weight per state"));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(sum));
        }
        if states.iter().any(|s| s.dims() != states[0].dims()) {
            return Err(invalid("decomposition states have different dims"));
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn reconstruct(&self) -> CMat {
        let d = self.states[0].dims().total();
        let mut m = CMat::zeros(d, d);
        for (w, s) in self.weights.iter().zip(&self.states) {
            m.add_scaled(&CMat::outer(s.amplitudes()), C64::new(*w, 0.0));
        }
        m
    }

    /// `Σ p_i f(ψ_i)`
    pub fn average(&self, mut f: impl FnMut(&PureState) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (w, s) in self.weights.iter().zip(&self.states) {
            acc += w * f(s)?;
        }
        Ok(acc)
    }
}

/// A mixture of states that are product across a fixed bipartition.
#[derive(Clone, Debug)]
pub struct SeparableAnsatz {
    split: Bipartition,
    weights: Vec<f64>,
    product_states: Vec<PureState>,
}

impl SeparableAnsatz {
    pub fn new(split: Bipartition, weights: Vec<f64>, product_states: Vec<PureState>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if weights.len() != product_states.len() || product_states.is_empty() {
            return Err(invalid("ansatz needs one weight per product state"));
        }
        if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(sum));
        }
        for s in &product_states {
            if second_schmidt(s, &split)? > ENTANGLED_TOL {
                return Err(invalid("ansatz state is entangled across the bipartition"));
            }
        }
        Ok(Self { split, weights, product_states })
    }

    pub fn split(&self) -> &Bipartition {
        &self.split
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn product_states(&self) -> &[PureState] {
        &self.product_states
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::mixture(&self.weights, &self.product_states)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{kron_vec, ket, Dims, ONE, ZERO};

    fn d(v: &[usize]) -> Dims {
        Dims::new(v.to_vec()).unwrap()
    }

    fn cut() -> Bipartition {
        Bipartition::first(2).unwrap()
    }

    fn state(dims: &[usize], amps: &[(f64, f64)]) -> PureState {
        PureState::from_unnormalized(d(dims), amps.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap()
    }

    fn bell() -> PureState {
        state(&[2, 2], &[(1., 0.), (0., 0.), (0., 0.), (1., 0.)])
    }

    fn cos_sin(theta: f64) -> PureState {
        state(&[2, 2], &[(theta.cos(), 0.), (0., 0.), (0., 0.), (theta.sin(), 0.)])
    }

    fn rho2(p: f64) -> DensityMatrix {
        let pp = state(&[2, 2], &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)]);
        let pm = state(&[2, 2], &[(0., 0.), (1., 0.), (-1., 0.), (0., 0.)]);
        DensityMatrix::mixture(&[p, 1.0 - p], &[pp, pm]).unwrap()
    }

    #[test]
    fn schmidt_of_bell_and_product() {
        let f = schmidt_decompose(&bell(), &cut()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(f.coefficients.len(), 2);
        assert!(f.coefficients.iter().all(|a| (a - s).abs() < 1e-12));

        let plus = crate::qmat::normalized(&[ONE, ONE]);
        let prod = PureState::new(d(&[2, 2]), kron_vec(&ket(2, 0), &plus)).unwrap();
        let f = schmidt_decompose(&prod, &cut()).unwrap();
        assert_eq!(f.coefficients.len(), 1);
        assert!((f.coefficients[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_matches_two_by_two_singular_values() {
        // oracle: singular values of [[1,1],[1,0]]/√3 are √(λ) with λ the
        // eigenvalues of [[2,1],[1,1]]/3, i.e. (3 ± √5)/6
        let psi = state(&[2, 2], &[(1., 0.), (1., 0.), (1., 0.), (0., 0.)]);
        let f = schmidt_decompose(&psi, &cut()).unwrap();
        let expected = [((3.0 + 5f64.sqrt()) / 6.0).sqrt(), ((3.0 - 5f64.sqrt()) / 6.0).sqrt()];
        for (a, e) in f.coefficients.iter().zip(expected) {
            assert!((a - e).abs() < 1e-12);
        }
        // reconstruction
        let dims = psi.dims().clone();
        let mut rebuilt = vec![ZERO; 4];
        for k in 0..2 {
            let v = crate::qmat::embed_across(
                f.left_basis[k].amplitudes(),
                f.right_basis[k].amplitudes(),
                &dims,
                &cut(),
            );
            for (x, y) in rebuilt.iter_mut().zip(v) {
                *x += y * f.coefficients[k];
            }
        }
        let diff = rebuilt.iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8);
    }

    #[test]
    fn schmidt_rejects_single_party() {
        let psi = state(&[3], &[(1., 0.), (0., 0.), (0., 0.)]);
        assert!(schmidt_decompose(&psi, &Bipartition::first(2).unwrap()).is_err());
    }

    #[test]
    fn entanglement_predicates() {
        assert!(is_entangled_pure(&bell(), &cut()).unwrap());
        assert!(is_entangled_pure(&cos_sin(0.01), &cut()).unwrap());
        let prod = state(&[2, 3], &[(1., 0.), (0., 1.), (0., 0.), (2., 0.), (0., 2.), (0., 0.)]);
        assert!(!is_entangled_pure(&prod, &cut()).unwrap());
    }

    #[test]
    fn gme_predicates() {
        let mut ghz = vec![(0., 0.); 8];
        ghz[0] = (1., 0.);
        ghz[7] = (1., 0.);
        assert!(is_gme_pure(&state(&[2, 2, 2], &ghz)).unwrap());
        let mut w = vec![(0., 0.); 8];
        w[1] = (1., 0.);
        w[2] = (1., 0.);
        w[4] = (1., 0.);
        assert!(is_gme_pure(&state(&[2, 2, 2], &w)).unwrap());
        let bell_zero = bell().tensor(&state(&[2], &[(1., 0.), (0., 0.)]));
        assert!(!is_gme_pure(&bell_zero).unwrap());
        assert_eq!(product_cut(&bell_zero).unwrap().unwrap().to_string(), "0,1|2");
    }

    #[test]
    fn entanglement_entropy_values() {
        assert!((entanglement_entropy(&bell(), &cut()).unwrap() - 1.0).abs() < 1e-12);
        let theta = 0.4f64;
        let h = binary_entropy(theta.cos().powi(2));
        assert!((entanglement_entropy(&cos_sin(theta), &cut()).unwrap() - h).abs() < 1e-12);
        let prod = state(&[2, 2], &[(1., 0.), (1., 0.), (1., 0.), (1., 0.)]);
        assert!(entanglement_entropy(&prod, &cut()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ppt_on_rho2_family() {
        let (ok, min) = is_ppt(&rho2(0.75), &cut()).unwrap();
        assert!(!ok && min < 0.0);
        let (ok, min) = is_ppt(&rho2(0.5), &cut()).unwrap();
        assert!(ok && min >= -1e-9);
        let prod = state(&[2, 2], &[(1., 0.), (1., 0.), (1., 0.), (1., 0.)]).projector();
        assert!(is_ppt(&prod, &cut()).unwrap().0);
    }

    #[test]
    fn concurrence_and_eof_closed_forms() {
        assert!((concurrence_2q(&bell().projector()).unwrap() - 1.0).abs() < 1e-9);
        assert!((eof_2q(&bell().projector()).unwrap() - 1.0).abs() < 1e-9);
        let mix = DensityMatrix::new(d(&[2, 2]), CMat::from_real_diag(&[0.5, 0., 0., 0.5])).unwrap();
        assert!(concurrence_2q(&mix).unwrap().abs() < 1e-12);
        assert!(eof_2q(&mix).unwrap().abs() < 1e-12);
        for p in [0.1, 0.3, 0.6, 0.75, 0.9] {
            assert!((concurrence_2q(&rho2(p)).unwrap() - (2.0 * p - 1.0).abs()).abs() < 1e-9);
        }
        let expected = binary_entropy((1.0 + 0.75f64.sqrt()) / 2.0);
        assert!((eof_2q(&rho2(0.75)).unwrap() - expected).abs() < 1e-9);
        assert!((expected - 0.3546).abs() < 1e-4);
        assert!(eof_2q(&DensityMatrix::maximally_mixed(d(&[2, 3]))).is_err());
    }

    #[test]
    fn decomposition_and_ansatz_validation() {
        let comp = |i| PureState::new(d(&[2, 2]), ket(4, i)).unwrap();
        let dec = PureDecomposition::new(vec![0.5, 0.5], vec![comp(0), comp(3)]).unwrap();
        let target = CMat::from_real_diag(&[0.5, 0., 0., 0.5]);
        assert!(dec.reconstruct().max_abs_diff(&target) < 1e-15);
        assert!(PureDecomposition::new(vec![0.5, 0.6], vec![comp(0), comp(3)]).is_err());
        assert!(SeparableAnsatz::new(cut(), vec![1.0], vec![bell()]).is_err());
        assert!(SeparableAnsatz::new(cut(), vec![0.5, 0.5], vec![comp(0), comp(3)]).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        assert!(OptimizerConfig { restarts: 0, ..Default::default() }.validate().is_err());
        assert!(OptimizerConfig { tol: 0.0, ..Default::default() }.validate().is_err());
        let cfg = OptimizerConfig::default().with_seed(6);
        assert_eq!(cfg.restart_seed(3), 5);
    }
}
