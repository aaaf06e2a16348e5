//! Conditional product bases: party `order[0]` measures in a fixed local
//! basis, each later party in a basis chosen by the outcomes before it.
//! Such bases are one-way LOCC distinguishable by construction.

use rand::Rng;

use crate::entanglement::random::haar_unitary;
use crate::entropy::OrthonormalBasis;
use crate::error::{invalid, Error, Result};
use crate::qmat::{embed_across, kron_vec, unitary_from_params, Bipartition, CMat, Dims, PureState, C64};

const UNITARY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalProductBasis {
    dims: Dims,
    order: Vec<usize>,
    /// `levels[l][chain]` is the unitary (columns = basis) used by party
    /// `order[l]` after earlier outcomes with flat index `chain`.
    levels: Vec<Vec<CMat>>,
}

impl ConditionalProductBasis {
    pub fn new(dims: Dims, order: Vec<usize>, levels: Vec<Vec<CMat>>) -> Result<Self> {
        let m = dims.parties();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..m).collect::<Vec<_>>() {
            return Err(invalid("measurement order must be a permutation of the parties"));
        }
        if levels.len() != m {
            return Err(Error::DimensionMismatch(levels.len(), m));
        }
        let mut chains = 1;
        for (l, level) in levels.iter().enumerate() {
            let d = dims.local(order[l]);
            if level.len() != chains {
                return Err(Error::DimensionMismatch(level.len(), chains));
            }
            for u in level {
                if u.rows() != d || u.cols() != d {
                    return Err(Error::DimensionMismatch(u.rows(), d));
                }
                let dev = (&u.adjoint() * u).max_abs_diff(&CMat::identity(d));
                if dev > UNITARY_TOL {
                    return Err(Error::NotOrthonormal(dev));
                }
            }
            chains *= d;
        }
        Ok(Self { dims, order, levels })
    }

    /// Computational basis, parties measured in index order.
    pub fn computational(dims: Dims) -> Self {
        let order: Vec<usize> = (0..dims.parties()).collect();
        let levels = Self::chain_counts(&dims, &order)
            .into_iter()
            .zip(&order)
            .map(|(n, &p)| vec![CMat::identity(dims.local(p)); n])
            .collect();
        Self { dims, order, levels }
    }

    /// Every node unitary Haar-random; order random too.
    pub fn random(dims: Dims, rng: &mut impl Rng) -> Self {
        let m = dims.parties();
        let mut order: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let levels = Self::chain_counts(&dims, &order)
            .into_iter()
            .zip(&order)
            .map(|(n, &p)| (0..n).map(|_| haar_unitary(dims.local(p), rng)).collect())
            .collect();
        Self { dims, order, levels }
    }

    /// Same local basis for every party regardless of outcomes.
    pub fn uniform(dims: Dims, local: Vec<CMat>) -> Result<Self> {
        let order: Vec<usize> = (0..dims.parties()).collect();
        let counts = Self::chain_counts(&dims, &order);
        let levels = counts.into_iter().zip(&local).map(|(n, u)| vec![u.clone(); n]).collect();
        Self::new(dims, order, levels)
    }

    /// Real parameter count of [`Self::from_params`]: `d²` per node unitary.
    pub fn param_count(dims: &Dims, order: &[usize]) -> usize {
        Self::chain_counts(dims, order).iter().zip(order).map(|(n, &p)| n * dims.local(p).pow(2)).sum()
    }

    /// Node unitaries `exp(iH(θ))`, consumed level by level, chain by chain.
    pub fn from_params(dims: Dims, order: Vec<usize>, params: &[f64]) -> Result<Self> {
        if params.len() != Self::param_count(&dims, &order) {
            return Err(Error::DimensionMismatch(params.len(), Self::param_count(&dims, &order)));
        }
        let mut offset = 0;
        let mut levels = Vec::new();
        for (n, &p) in Self::chain_counts(&dims, &order).iter().zip(&order) {
            let d = dims.local(p);
            let level = (0..*n)
                .map(|_| {
                    let u = unitary_from_params(d, &params[offset..offset + d * d]);
                    offset += d * d;
                    u
                })
                .collect();
            levels.push(level);
        }
        Self::new(dims, order, levels)
    }

    fn chain_counts(dims: &Dims, order: &[usize]) -> Vec<usize> {
        let mut counts = Vec::with_capacity(order.len());
        let mut n = 1;
        for &p in order {
            counts.push(n);
            n *= dims.local(p);
        }
        counts
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn levels(&self) -> &[Vec<CMat>] {
        &self.levels
    }

    /// Elements as per-party local vectors, in outcome-lexicographic order.
    pub fn local_factors(&self) -> Vec<Vec<Vec<C64>>> {
        let m = self.dims.parties();
        let outcome_dims: Vec<usize> = self.order.iter().map(|&p| self.dims.local(p)).collect();
        let total = self.dims.total();
        (0..total)
            .map(|flat| {
                // decode outcome tuple in measurement order
                let mut outcomes = vec![0; m];
                let mut rem = flat;
                for l in (0..m).rev() {
                    outcomes[l] = rem % outcome_dims[l];
                    rem /= outcome_dims[l];
                }
                let mut factors = vec![Vec::new(); m];
                let mut chain = 0;
                for l in 0..m {
                    factors[self.order[l]] = self.levels[l][chain].column(outcomes[l]);
                    chain = chain * outcome_dims[l] + outcomes[l];
                }
                factors
            })
            .collect()
    }

    /// The full orthonormal basis in natural party order.
    pub fn expand(&self) -> Result<OrthonormalBasis> {
        let elements = self
            .local_factors()
            .into_iter()
            .map(|factors| {
                let amps = factors.iter().skip(1).fold(factors[0].clone(), |acc, f| kron_vec(&acc, f));
                PureState::new(self.dims.clone(), amps)
            })
            .collect::<Result<Vec<_>>>()?;
        OrthonormalBasis::new(self.dims.clone(), elements)
    }

    /// For a two-party basis over the cut dims `(d_A, d_B)`: the basis of the
    /// full multiparty space whose elements are `|x⟩_A ⊗ |y⟩_B` across `split`.
    pub fn expand_across(&self, full: &Dims, split: &Bipartition) -> Result<OrthonormalBasis> {
        split.check(full)?;
        let (_, da, db) = split.index_map(full);
        if self.dims.as_slice() != [da, db] {
            return Err(invalid(format!("basis dims {} do not match cut {da}x{db}", self.dims)));
        }
        let elements = self
            .local_factors()
            .into_iter()
            .map(|f| PureState::new(full.clone(), embed_across(&f[0], &f[1], full, split)))
            .collect::<Result<Vec<_>>>()?;
        OrthonormalBasis::new(full.clone(), elements)
    }
}
