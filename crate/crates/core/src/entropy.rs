//! Entropic functionals (base-2 logarithms throughout) and the dephasing map.

use crate::error::{invalid, Error, Result};
use crate::qmat::{vdot, CMat, DensityMatrix, Dims, PureState, C64};

/// Eigenvalues at or below this contribute nothing (`0·log 0 = 0`).
pub const EIG_CLIP: f64 = 1e-12;

const SUPPORT_EIG: f64 = 1e-10;
const SUPPORT_LEAK: f64 = 1e-10;
const BASIS_TOL: f64 = 1e-8;

/// A complete orthonormal basis of a tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    dims: Dims,
    elements: Vec<PureState>,
}

impl OrthonormalBasis {
    pub fn new(dims: Dims, elements: Vec<PureState>) -> Result<Self> {
        let d = dims.total();
        if elements.len() != d {
            return Err(Error::DimensionMismatch(elements.len(), d));
        }
        if let Some(e) = elements.iter().find(|e| e.dims() != &dims) {
            return Err(invalid(format!("basis element has dims {} not {}", e.dims(), dims)));
        }
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let g = elements[i].inner(&elements[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - C64::new(target, 0.0)).norm());
            }
        }
        if worst > BASIS_TOL {
            return Err(Error::NotOrthonormal(worst));
        }
        // d orthonormal vectors in C^d are complete; the explicit resolution
        // of identity guards against accumulated rounding in the Gram check
        let mut sum = CMat::zeros(d, d);
        for e in &elements {
            sum.add_scaled(&CMat::outer(e.amplitudes()), C64::new(1.0, 0.0));
        }
        let dev = sum.max_abs_diff(&CMat::identity(d));
        if dev > BASIS_TOL {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { dims, elements })
    }

    /// Columns of `u` as basis elements.
    pub fn from_unitary(dims: Dims, u: &CMat) -> Result<Self> {
        let elements = (0..u.cols())
            .map(|c| PureState::new(dims.clone(), u.column(c)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, elements)
    }

    pub fn computational(dims: Dims) -> Self {
        let d = dims.total();
        let elements = (0..d)
            .map(|i| PureState::new(dims.clone(), crate::qmat::ket(d, i)).expect("unit vector"))
            .collect();
        Self { dims, elements }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn elements(&self) -> &[PureState] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `⟨b_i|ρ|b_i⟩` for every element.
    pub fn populations(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|b| rho.matrix().sandwich(b.amplitudes(), b.amplitudes()).re)
            .collect()
    }

    /// `|⟨b_i|ψ⟩|²` for every element.
    pub fn overlaps(&self, psi: &PureState) -> Vec<f64> {
        self.elements.iter().map(|b| vdot(b.amplitudes(), psi.amplitudes()).norm_sqr()).collect()
    }

    fn check_dims(&self, dims: &Dims) -> Result<()> {
        if dims.total() != self.dims.total() {
            return Err(Error::DimensionMismatch(dims.total(), self.dims.total()));
        }
        Ok(())
    }
}

/// A probabilistic mixture of the projectors of one basis.
#[derive(Clone, Debug)]
pub struct BasisMixture {
    basis: OrthonormalBasis,
    weights: Vec<f64>,
}

impl BasisMixture {
    pub fn new(basis: OrthonormalBasis, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != basis.len() {
            return Err(Error::DimensionMismatch(weights.len(), basis.len()));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(sum));
        }
        Ok(Self { basis, weights })
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::mixture(&self.weights, self.basis.elements()).expect("valid basis mixture")
    }
}

/// `-Σ λ log₂ λ` over a spectrum, skipping `λ ≤ EIG_CLIP`.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values.iter().filter(|&&x| x > EIG_CLIP).map(|&x| -x * x.log2()).sum::<f64>().max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.eig().values)
}

/// Value of `S(ρ‖σ)`: finite, or infinite when `supp ρ ⊄ supp σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelativeEntropy {
    Finite(f64),
    Infinite,
}

impl RelativeEntropy {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// The finite value, or `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match *self {
            Self::Finite(x) => x,
            Self::Infinite => f64::INFINITY,
        }
    }
}

pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelativeEntropy> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let er = rho.eig();
    let es = sigma.eig();
    let n = rho.dim();
    let mut cross = 0.0;
    for k in 0..n {
        let lam = er.values[k];
        if lam <= SUPPORT_EIG {
            continue;
        }
        let v = er.vector(k);
        let mut leak = 0.0;
        let mut acc = 0.0;
        for j in 0..n {
            let ov = vdot(&es.vector(j), &v).norm_sqr();
            let mu = es.values[j];
            if mu <= EIG_CLIP {
                leak += ov;
            } else {
                acc += ov * mu.log2();
            }
        }
        if leak > SUPPORT_LEAK {
            return Ok(RelativeEntropy::Infinite);
        }
        cross += lam * acc;
    }
    let value = -spectrum_entropy(&er.values) - cross;
    Ok(RelativeEntropy::Finite(value.max(0.0)))
}

/// `Σ_i ⟨b_i|ρ|b_i⟩ |b_i⟩⟨b_i|`
pub fn dephase(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<DensityMatrix> {
    basis.check_dims(rho.dims())?;
    let weights = basis.populations(rho);
    let d = rho.dim();
    let mut mat = CMat::zeros(d, d);
    for (w, b) in weights.iter().zip(basis.elements()) {
        mat.add_scaled(&CMat::outer(b.amplitudes()), C64::new(*w, 0.0));
    }
    DensityMatrix::new(rho.dims().clone(), mat)
}

/// Shannon entropy in bits. Entries down to `-1e-12` are clipped to zero and
/// the vector renormalized.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(invalid("empty probability vector"));
    }
    if let Some(&x) = p.iter().find(|&&x| x < -1e-12 || !x.is_finite()) {
        return Err(invalid(format!("probability entry {x} is negative")));
    }
    let sum: f64 = p.iter().map(|&x| x.max(0.0)).sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidWeights(sum));
    }
    Ok(p
        .iter()
        .map(|&x| x.max(0.0) / sum)
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum::<f64>()
        .max(0.0))
}

/// Binary entropy `h(x)`.
pub fn binary_entropy(x: f64) -> f64 {
    let h = |t: f64| if t > 0.0 { -t * t.log2() } else { 0.0 };
    h(x) + h(1.0 - x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{Dims, ONE, ZERO};

    fn d(v: &[usize]) -> Dims {
        Dims::new(v.to_vec()).unwrap()
    }

    fn diag(v: &[f64]) -> DensityMatrix {
        DensityMatrix::new(d(&[v.len()]), CMat::from_real_diag(v)).unwrap()
    }

    fn plus() -> PureState {
        PureState::from_unnormalized(d(&[2]), vec![ONE, ONE]).unwrap()
    }

    fn rho2(p: f64) -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi_p = PureState::new(d(&[2, 2]), vec![ZERO, C64::new(s, 0.), C64::new(s, 0.), ZERO]).unwrap();
        let psi_m = PureState::new(d(&[2, 2]), vec![ZERO, C64::new(s, 0.), C64::new(-s, 0.), ZERO]).unwrap();
        DensityMatrix::mixture(&[p, 1.0 - p], &[psi_p, psi_m]).unwrap()
    }

    #[test]
    fn entropy_of_pure_and_maximally_mixed() {
        assert!(von_neumann_entropy(&plus().projector()).abs() < 1e-12);
        for dims in [vec![2], vec![3], vec![2, 2], vec![3, 3]] {
            let dd = d(&dims);
            let t = dd.total() as f64;
            let s = von_neumann_entropy(&DensityMatrix::maximally_mixed(dd));
            assert!((s - t.log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_of_three_quarter_diag() {
        // h(3/4) = 2 - (3/4) log2 3
        let h = 2.0 - 0.75 * 3f64.log2();
        assert!((von_neumann_entropy(&diag(&[0.75, 0.25])) - h).abs() < 1e-12);
        assert!((h - 0.8113).abs() < 1e-4);
    }

    #[test]
    fn relative_entropy_basic_cases() {
        let r = diag(&[0.4, 0.6]);
        assert_eq!(relative_entropy(&r, &r).unwrap(), RelativeEntropy::Finite(0.0));
        let r0 = diag(&[1.0, 0.0]);
        let r1 = diag(&[0.0, 1.0]);
        assert_eq!(relative_entropy(&r0, &r1).unwrap(), RelativeEntropy::Infinite);
        assert!(relative_entropy(&r1, &r0).unwrap().value().is_infinite());
        assert!(matches!(
            relative_entropy(&r, &DensityMatrix::maximally_mixed(d(&[3]))),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn relative_entropy_of_schmidt_state_to_its_dephasing() {
        // |ψ⟩ = a|00⟩ + b|11⟩ against a²|00⟩⟨00| + b²|11⟩⟨11|
        let (a, b) = (0.8f64, 0.6f64);
        let psi = PureState::new(d(&[2, 2]), vec![C64::new(a, 0.), ZERO, ZERO, C64::new(b, 0.)]).unwrap();
        let sigma = DensityMatrix::new(d(&[2, 2]), CMat::from_real_diag(&[a * a, 0., 0., b * b])).unwrap();
        let h = shannon_entropy(&[a * a, b * b]).unwrap();
        let s = relative_entropy(&psi.projector(), &sigma).unwrap().value();
        assert!((s - h).abs() < 1e-10, "{s} vs {h}");
    }

    #[test]
    fn dephasing_cases() {
        let comp = OrthonormalBasis::computational(d(&[2]));
        let out = dephase(&plus().projector(), &comp).unwrap();
        assert!(out.matrix().max_abs_diff(&CMat::identity(2).scale_real(0.5)) < 1e-12);

        let mix = BasisMixture::new(comp.clone(), vec![0.3, 0.7]).unwrap().to_density();
        assert!(dephase(&mix, &comp).unwrap().matrix().max_abs_diff(mix.matrix()) < 1e-15);

        let comp4 = OrthonormalBasis::computational(d(&[2, 2]));
        let out = dephase(&rho2(0.75), &comp4).unwrap();
        assert!(out.matrix().max_abs_diff(&CMat::from_real_diag(&[0.0, 0.5, 0.5, 0.0])) < 1e-12);

        assert!(dephase(&rho2(0.75), &comp).is_err());
    }

    #[test]
    fn shannon_cases() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        let h = 2.0 - 0.75 * 3f64.log2();
        assert!((shannon_entropy(&[0.75, 0.25]).unwrap() - h).abs() < 1e-15);
        assert!((shannon_entropy(&[0.75, 0.25, -1e-13]).unwrap() - h).abs() < 1e-12);
        assert!(shannon_entropy(&[0.7, 0.2]).is_err());
        assert!(shannon_entropy(&[1.1, -0.1]).is_err());
        assert!((binary_entropy(0.75) - h).abs() < 1e-15);
    }

    #[test]
    fn basis_validation() {
        let dims = d(&[2]);
        let bad = OrthonormalBasis::new(dims.clone(), vec![plus(), plus()]);
        assert!(matches!(bad, Err(Error::NotOrthonormal(_))));
        let short = OrthonormalBasis::new(dims.clone(), vec![plus()]);
        assert!(matches!(short, Err(Error::DimensionMismatch(1, 2))));
        assert!(BasisMixture::new(OrthonormalBasis::computational(dims), vec![0.5, 0.6]).is_err());
    }
}
