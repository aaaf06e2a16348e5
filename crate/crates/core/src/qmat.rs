//! Dense complex linear algebra for small tensor-product Hilbert spaces.
//!
//! Subsystem ordering is fixed once for the whole crate: for local indices
//! `i_1 … i_m` over dims `d_1 … d_m` the flat index is
//! `Σ_k i_k · Π_{j>k} d_j`, i.e. the first subsystem is the most significant
//! digit. Every reshape, partial trace and partial transpose uses this map.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Normalization tolerance for pure states.
pub const TOL_NORM: f64 = 1e-9;
/// Hermiticity / trace / positivity tolerance for density matrices.
pub const TOL_STATE: f64 = 1e-9;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix must have at least one row and column"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(data.len(), rows * cols));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let rows = cols[0].len();
        Self::from_fn(rows, cols.len(), |r, c| cols[c][r])
    }

    /// Projector `|v⟩⟨v|` (no normalization applied).
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Kronecker product: entry `(i·rb + k, j·cb + l) = a[i,j]·b[k,l]`.
    pub fn kron(&self, b: &Self) -> Self {
        let (rb, cb) = (b.rows, b.cols);
        Self::from_fn(self.rows * rb, self.cols * cb, |r, c| {
            self[(r / rb, c / cb)] * b[(r % rb, c % cb)]
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    /// `⟨u|M|v⟩`
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        vdot(u, &self.mat_vec(v))
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: &[C64]) -> Vec<C64> {
    let n = norm(v);
    v.iter().map(|z| z / n).collect()
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Computational basis vector `|i⟩` in dimension `d`.
pub fn ket(d: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d];
    v[i] = ONE;
    v
}

pub fn tensor_product(a: &CMat, b: &CMat) -> CMat {
    a.kron(b)
}

// ---------------------------------------------------------------------------
// Tensor structure
// ---------------------------------------------------------------------------

/// Ordered local dimensions `d_1 … d_m` of a multiparty system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dims(Vec<usize>);

impl Dims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(invalid("dims must list at least one subsystem"));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(invalid(format!("subsystem dimension {d} < 2")));
        }
        Ok(Self(dims))
    }

    /// Parses `2x3x2`.
    pub fn parse(s: &str) -> Result<Self> {
        let dims = s
            .split(['x', 'X'])
            .map(|t| t.trim().parse::<usize>().map_err(|_| invalid(format!("bad dims '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn parties(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn local(&self, k: usize) -> usize {
        self.0[k]
    }

    /// Local indices of a flat index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for k in (0..self.0.len()).rev() {
            out[k] = index % self.0[k];
            index /= self.0[k];
        }
        out
    }

    pub fn flat(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.0).fold(0, |acc, (i, d)| acc * d + i)
    }

    /// Dims of the listed subsystems, in ascending subsystem order.
    pub fn select(&self, parties: &[usize]) -> Result<Self> {
        Self::new(parties.iter().map(|&p| self.0[p]).collect())
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// For every flat index, its `(a, b)` coordinates when subsystems in `set`
/// (ascending) form the row factor and the rest the column factor.
/// Returns the map and the two factor dimensions.
pub fn split_index_map(dims: &Dims, set: &[usize]) -> (Vec<(usize, usize)>, usize, usize) {
    let m = dims.parties();
    let in_a: Vec<bool> = (0..m).map(|k| set.contains(&k)).collect();
    let da: usize = (0..m).filter(|&k| in_a[k]).map(|k| dims.local(k)).product();
    let db: usize = (0..m).filter(|&k| !in_a[k]).map(|k| dims.local(k)).product();
    let map = (0..dims.total())
        .map(|i| {
            let digits = dims.digits(i);
            let (mut a, mut b) = (0, 0);
            for k in 0..m {
                if in_a[k] {
                    a = a * dims.local(k) + digits[k];
                } else {
                    b = b * dims.local(k) + digits[k];
                }
            }
            (a, b)
        })
        .collect();
    (map, da, db)
}

/// A cut of the parties into `A` and its complement `B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    party_set_a: Vec<usize>,
    parties: usize,
}

impl Bipartition {
    pub fn new(mut party_set_a: Vec<usize>, parties: usize) -> Result<Self> {
        party_set_a.sort_unstable();
        party_set_a.dedup();
        if party_set_a.is_empty() || party_set_a.len() >= parties {
            return Err(invalid("bipartition needs a nonempty proper subset of parties"));
        }
        if party_set_a.iter().any(|&p| p >= parties) {
            return Err(invalid("bipartition names a party out of range"));
        }
        Ok(Self { party_set_a, parties })
    }

    /// First party against the rest.
    pub fn first(parties: usize) -> Result<Self> {
        Self::new(vec![0], parties)
    }

    /// All `2^{m-1} - 1` distinct cuts, each listed with party 0 on side A.
    pub fn all(parties: usize) -> Vec<Self> {
        (1usize..(1 << (parties - 1)))
            .map(|mask| {
                // bit k of mask puts party k+1 on side B; party 0 always stays on A
                let a = (0..parties).filter(|&k| k == 0 || mask & (1 << (k - 1)) == 0).collect();
                Self::new(a, parties).expect("valid cut")
            })
            .collect()
    }

    pub fn party_set_a(&self) -> &[usize] {
        &self.party_set_a
    }

    pub fn party_set_b(&self) -> Vec<usize> {
        (0..self.parties).filter(|k| !self.party_set_a.contains(k)).collect()
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.party_set_b(), self.parties).expect("complement of a cut is a cut")
    }

    pub fn check(&self, dims: &Dims) -> Result<()> {
        if dims.parties() != self.parties {
            return Err(Error::DimensionMismatch(dims.parties(), self.parties));
        }
        Ok(())
    }

    /// `(map, d_A, d_B)` as in [`split_index_map`].
    pub fn index_map(&self, dims: &Dims) -> (Vec<(usize, usize)>, usize, usize) {
        split_index_map(dims, &self.party_set_a)
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.party_set_a.iter().map(|p| p.to_string()).collect();
        let b: Vec<String> = self.party_set_b().iter().map(|p| p.to_string()).collect();
        write!(f, "{}|{}", a.join(","), b.join(","))
    }
}

/// Reshape amplitudes into the `d_A × d_B` matrix across a cut.
pub fn reshape_across(amps: &[C64], dims: &Dims, split: &Bipartition) -> CMat {
    let (map, da, db) = split.index_map(dims);
    let mut m = CMat::zeros(da, db);
    for (i, &(a, b)) in map.iter().enumerate() {
        m[(a, b)] = amps[i];
    }
    m
}

/// Inverse of [`reshape_across`] for a product `|x⟩_A ⊗ |y⟩_B`.
pub fn embed_across(a: &[C64], b: &[C64], dims: &Dims, split: &Bipartition) -> Vec<C64> {
    let (map, _, _) = split.index_map(dims);
    map.iter().map(|&(i, j)| a[i] * b[j]).collect()
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Normalized state vector over a tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Dims,
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(dims: Dims, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::DimensionMismatch(amps.len(), dims.total()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = norm(&amps);
        if (n - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self { dims, amps })
    }

    /// Normalizes `amps` first; fails only on the zero vector or a shape mismatch.
    pub fn from_unnormalized(dims: Dims, amps: Vec<C64>) -> Result<Self> {
        let n = norm(&amps);
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Self::new(dims, amps.iter().map(|z| z / n).collect())
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix { dims: self.dims.clone(), mat: CMat::outer(&self.amps) }
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        vdot(&self.amps, &other.amps)
    }

    /// `self ⊗ other`, concatenating the subsystem lists.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.0.clone();
        dims.extend_from_slice(&other.dims.0);
        PureState { dims: Dims(dims), amps: kron_vec(&self.amps, &other.amps) }
    }
}

/// Trace-one positive semidefinite Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Dims,
    mat: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity. Asymmetry below
    /// [`TOL_STATE`] is repaired by symmetrizing.
    pub fn new(dims: Dims, mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(invalid("density matrix must be square"));
        }
        if mat.rows() != dims.total() {
            return Err(Error::DimensionMismatch(mat.rows(), dims.total()));
        }
        let defect = mat.hermitian_defect();
        if defect > TOL_STATE {
            return Err(Error::NotHermitian(defect));
        }
        let mat = mat.hermitian_part();
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > TOL_STATE {
            return Err(Error::InvalidTrace(tr));
        }
        let eig = hermitian_eig(&mat)?;
        if eig.values[0] < -TOL_STATE {
            return Err(Error::NotPositive(eig.values[0]));
        }
        Ok(Self { dims, mat })
    }

    /// Builds `M / tr M` for a matrix known to be PSD up to rounding.
    pub fn from_psd_unnormalized(dims: Dims, mat: CMat) -> Result<Self> {
        let tr = mat.trace().re;
        if !(tr > 0.0) {
            return Err(invalid("matrix has nonpositive trace"));
        }
        Self::new(dims, mat.hermitian_part().scale_real(1.0 / tr))
    }

    /// `Σ w_i |ψ_i⟩⟨ψ_i|`
    pub fn mixture(weights: &[f64], states: &[PureState]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(invalid("mixture needs one weight per state"));
        }
        let dims = states[0].dims.clone();
        let mut mat = CMat::zeros(dims.total(), dims.total());
        for (w, s) in weights.iter().zip(states) {
            if s.dims != dims {
                return Err(invalid("mixture components have different dims"));
            }
            mat.add_scaled(&CMat::outer(&s.amps), C64::new(*w, 0.0));
        }
        Self::new(dims, mat)
    }

    pub fn maximally_mixed(dims: Dims) -> Self {
        let d = dims.total();
        Self { dims, mat: CMat::identity(d).scale_real(1.0 / d as f64) }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn eig(&self) -> Eigen {
        hermitian_eig(&self.mat).expect("density matrices are Hermitian")
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.0.clone();
        dims.extend_from_slice(&other.dims.0);
        DensityMatrix { dims: Dims(dims), mat: self.mat.kron(&other.mat) }
    }

    /// Numerical rank: eigenvalues above `1e-10`.
    pub fn rank(&self) -> usize {
        self.eig().values.iter().filter(|&&x| x > 1e-10).count()
    }
}

/// Partial trace keeping the subsystems in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(invalid("partial trace must keep at least one subsystem"));
    }
    if keep.iter().any(|&k| k >= rho.dims.parties()) {
        return Err(invalid("partial trace names a subsystem out of range"));
    }
    let (map, dk, _) = split_index_map(&rho.dims, &keep);
    let mut out = CMat::zeros(dk, dk);
    let n = rho.dim();
    for i in 0..n {
        let (ki, ti) = map[i];
        for j in 0..n {
            let (kj, tj) = map[j];
            if ti == tj {
                out[(ki, kj)] += rho.mat[(i, j)];
            }
        }
    }
    Ok(DensityMatrix { dims: rho.dims.select(&keep)?, mat: out.hermitian_part() })
}

/// Reduced state of a pure state on `keep`, computed from amplitudes.
pub fn reduced_pure(psi: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace(&psi.projector(), keep)
}

/// Transposes the subsystems on side A of `split`.
pub fn partial_transpose(rho: &DensityMatrix, split: &Bipartition) -> Result<CMat> {
    split.check(&rho.dims)?;
    let dims = &rho.dims;
    let n = rho.dim();
    let a = split.party_set_a();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        let di = dims.digits(i);
        for j in 0..n {
            let dj = dims.digits(j);
            let (mut ri, mut rj) = (di.clone(), dj.clone());
            for &k in a {
                ri[k] = dj[k];
                rj[k] = di[k];
            }
            out[(dims.flat(&ri), dims.flat(&rj))] = rho.mat[(i, j)];
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver
// ---------------------------------------------------------------------------

/// Eigenvalues ascending; eigenvectors are the matching columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `Σ f(λ_k) |v_k⟩⟨v_k|`
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMat {
        let n = self.values.len();
        let v = &self.vectors;
        CMat::from_fn(n, n, |r, c| {
            (0..n).map(|k| f(self.values[k]) * v[(r, k)] * v[(c, k)].conj()).sum()
        })
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eig(m: &CMat) -> Result<Eigen> {
    if !m.is_square() {
        return Err(invalid(format!("eigensolve of non-square {}x{} matrix", m.rows(), m.cols())));
    }
    let defect = m.hermitian_defect();
    if defect > TOL_STATE * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMat::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = (apq / r).conj();
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = phase * (-s);
                let jqq = phase * c;
                rotate_cols(&mut a, p, q, jpp, jpq, jqp, jqq);
                rotate_rows_adj(&mut a, p, q, jpp, jpq, jqp, jqq);
                rotate_cols(&mut v, p, q, jpp, jpq, jqp, jqq);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

// M ← M·J restricted to columns p, q
fn rotate_cols(m: &mut CMat, p: usize, q: usize, jpp: C64, jpq: C64, jqp: C64, jqq: C64) {
    for k in 0..m.rows {
        let (x, y) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = x * jpp + y * jqp;
        m[(k, q)] = x * jpq + y * jqq;
    }
}

// M ← J†·M restricted to rows p, q
fn rotate_rows_adj(m: &mut CMat, p: usize, q: usize, jpp: C64, jpq: C64, jqp: C64, jqq: C64) {
    for k in 0..m.cols {
        let (x, y) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = jpp.conj() * x + jqp.conj() * y;
        m[(q, k)] = jpq.conj() * x + jqq.conj() * y;
    }
}

// ---------------------------------------------------------------------------
// Unitaries
// ---------------------------------------------------------------------------

/// Number of real parameters of a `d × d` unitary generator.
pub fn unitary_param_count(d: usize) -> usize {
    d * d
}

/// `exp(iH)` where the Hermitian `H` is spelled out by `d²` reals:
/// `d` diagonal entries followed by `(re, im)` of each upper off-diagonal.
pub fn unitary_from_params(d: usize, params: &[f64]) -> CMat {
    assert_eq!(params.len(), d * d);
    let mut h = CMat::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = C64::new(params[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = C64::new(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    let eig = hermitian_eig(&h).expect("generator is Hermitian");
    eig.apply_fn(|x| C64::new(0.0, x).exp())
}

/// Gram–Schmidt completion of orthonormal `vectors` to a full basis of `C^d`.
pub fn complete_basis(vectors: &[Vec<C64>], d: usize) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = vectors.to_vec();
    for i in 0..d {
        if out.len() == d {
            break;
        }
        let mut v = ket(d, i);
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for u in &out {
                let c = vdot(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            out.push(v.iter().map(|z| z / n).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn bell_phi() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(Dims::new(vec![2, 2]).unwrap(), vec![c(s, 0.), ZERO, ZERO, c(s, 0.)]).unwrap()
    }

    #[test]
    fn kron_identity_and_projectors() {
        assert_eq!(tensor_product(&CMat::identity(2), &CMat::identity(2)), CMat::identity(4));
        let p0 = CMat::outer(&ket(2, 0));
        let p1 = CMat::outer(&ket(2, 1));
        let m = tensor_product(&p0, &p1);
        for r in 0..4 {
            for cc in 0..4 {
                let expected = if r == 1 && cc == 1 { ONE } else { ZERO };
                assert_eq!(m[(r, cc)], expected);
            }
        }
    }

    #[test]
    fn kron_entry_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let k = a.kron(&b);
        for i in 0..2 {
            for j in 0..2 {
                for kk in 0..3 {
                    for l in 0..3 {
                        assert_eq!(k[(i * 3 + kk, j * 3 + l)], a[(i, j)] * b[(kk, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let r = partial_trace(&bell_phi().projector(), &[0]).unwrap();
        assert!(r.matrix().max_abs_diff(&CMat::identity(2).scale_real(0.5)) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product() {
        let d2 = Dims::new(vec![2]).unwrap();
        let d3 = Dims::new(vec![3]).unwrap();
        let ra = DensityMatrix::new(d2, CMat::from_real_diag(&[0.3, 0.7])).unwrap();
        let rb = DensityMatrix::new(d3, CMat::from_real_diag(&[0.2, 0.5, 0.3])).unwrap();
        let prod = ra.tensor(&rb);
        assert!(partial_trace(&prod, &[0]).unwrap().matrix().max_abs_diff(ra.matrix()) < 1e-12);
        assert!(partial_trace(&prod, &[1]).unwrap().matrix().max_abs_diff(rb.matrix()) < 1e-12);
    }

    #[test]
    fn ghz_single_site_marginal() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![ZERO; 8];
        amps[0] = c(s, 0.);
        amps[7] = c(s, 0.);
        let ghz = PureState::new(Dims::new(vec![2, 2, 2]).unwrap(), amps).unwrap();
        for k in 0..3 {
            let r = partial_trace(&ghz.projector(), &[k]).unwrap();
            assert!(r.matrix().max_abs_diff(&CMat::from_real_diag(&[0.5, 0.5])) < 1e-12);
        }
    }

    #[test]
    fn empty_keep_is_rejected() {
        assert!(matches!(partial_trace(&bell_phi().projector(), &[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn partial_transpose_of_bell_has_negative_half() {
        let split = Bipartition::first(2).unwrap();
        let pt = partial_transpose(&bell_phi().projector(), &split).unwrap();
        let eig = hermitian_eig(&pt).unwrap();
        assert!((eig.values[0] + 0.5).abs() < 1e-12);
        assert!((pt.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_matrix(6, &mut rng);
        let dims = Dims::new(vec![2, 3]).unwrap();
        let rho = DensityMatrix::from_psd_unnormalized(dims.clone(), &g * &g.adjoint()).unwrap();
        for split in Bipartition::all(2) {
            let once = partial_transpose(&rho, &split).unwrap();
            let back = DensityMatrix { dims: dims.clone(), mat: once };
            let twice = partial_transpose(&back, &split).unwrap();
            assert!(twice.max_abs_diff(rho.matrix()) < 1e-15);
        }
    }

    #[test]
    fn eig_diag_and_pauli_x() {
        let e = hermitian_eig(&CMat::from_real_diag(&[0.7, 0.3])).unwrap();
        assert!((e.values[0] - 0.3).abs() < 1e-15 && (e.values[1] - 0.7).abs() < 1e-15);

        let x = CMat::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let e = hermitian_eig(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = [c(s, 0.), c(-s, 0.)];
        let plus = [c(s, 0.), c(s, 0.)];
        assert!((vdot(&minus, &e.vector(0)).norm() - 1.0).abs() < 1e-12);
        assert!((vdot(&plus, &e.vector(1)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_square() {
        assert!(hermitian_eig(&CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn eig_spectral_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 3, 5, 9, 27] {
            let g = random_matrix(n, &mut rng);
            let h = g.add(&g.adjoint());
            let e = hermitian_eig(&h).unwrap();
            let rebuilt = e.apply_fn(|x| c(x, 0.0));
            assert!(rebuilt.max_abs_diff(&h) < 1e-8 * h.max_abs().max(1.0), "n = {n}");
            let gram = &e.vectors.adjoint() * &e.vectors;
            assert!(gram.max_abs_diff(&CMat::identity(n)) < 1e-8);
            for k in 0..n {
                let hv = h.mat_vec(&e.vector(k));
                let lv: Vec<C64> = e.vector(k).iter().map(|z| z * e.values[k]).collect();
                let res = hv.iter().zip(&lv).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(res < 1e-8 * h.frobenius_norm());
            }
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_handles_degenerate_spectrum() {
        let e = hermitian_eig(&CMat::identity(4).scale_real(0.25)).unwrap();
        assert!(e.values.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn eig_rejects_clear_asymmetry() {
        let m = CMat::new(2, 2, vec![ONE, c(0.1, 0.), ZERO, ONE]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn density_validation() {
        let d = Dims::new(vec![2]).unwrap();
        assert!(matches!(
            DensityMatrix::new(d.clone(), CMat::from_real_diag(&[0.6, 0.6])),
            Err(Error::InvalidTrace(_))
        ));
        assert!(matches!(
            DensityMatrix::new(d.clone(), CMat::from_real_diag(&[1.2, -0.2])),
            Err(Error::NotPositive(_))
        ));
        // sub-tolerance asymmetry is repaired
        let m = CMat::new(2, 2, vec![c(0.5, 0.), c(0.1, 1e-12), c(0.1, 0.), c(0.5, 0.)]).unwrap();
        let rho = DensityMatrix::new(d, m).unwrap();
        assert_eq!(rho.matrix().hermitian_defect(), 0.0);
    }

    #[test]
    fn pure_state_normalization() {
        let d = Dims::new(vec![2]).unwrap();
        assert!(matches!(PureState::new(d.clone(), vec![ONE, ONE]), Err(Error::NotNormalized(_))));
        let p = PureState::from_unnormalized(d, vec![ONE, ONE]).unwrap();
        assert!((norm(p.amplitudes()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dims_digits_round_trip() {
        let d = Dims::new(vec![2, 3, 4]).unwrap();
        for i in 0..d.total() {
            assert_eq!(d.flat(&d.digits(i)), i);
        }
        // first subsystem is the most significant digit
        assert_eq!(d.digits(12), vec![1, 0, 0]);
        assert_eq!(Dims::parse("2x3x4").unwrap(), d);
        assert!(Dims::parse("1x2").is_err());
    }

    #[test]
    fn bipartitions_enumerated_once() {
        assert_eq!(Bipartition::all(2).len(), 1);
        assert_eq!(Bipartition::all(3).len(), 3);
        assert_eq!(Bipartition::all(4).len(), 7);
        assert!(Bipartition::new(vec![], 3).is_err());
        assert!(Bipartition::new(vec![0, 1, 2], 3).is_err());
    }

    #[test]
    fn unitary_params_give_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 2..=4 {
            let p: Vec<f64> = (0..unitary_param_count(d)).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let u = unitary_from_params(d, &p);
            assert!((&u.adjoint() * &u).max_abs_diff(&CMat::identity(d)) < 1e-12);
        }
        assert!(unitary_from_params(3, &[0.0; 9]).max_abs_diff(&CMat::identity(3)) < 1e-15);
    }

    #[test]
    fn complete_basis_is_orthonormal() {
        let v = normalized(&[c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0)]);
        let b = complete_basis(&[v.clone()], 3);
        assert_eq!(b.len(), 3);
        assert_eq!(b[0], v);
        let m = CMat::from_columns(&b);
        assert!((&m.adjoint() * &m).max_abs_diff(&CMat::identity(3)) < 1e-12);
    }

    #[test]
    fn product_state_rebuilt_from_marginals() {
        let d2 = Dims::new(vec![2]).unwrap();
        let a = PureState::from_unnormalized(d2.clone(), vec![c(0.6, 0.2), c(0.1, -0.7)]).unwrap();
        let b = PureState::from_unnormalized(d2, vec![c(0.3, 0.0), c(0.4, 0.4)]).unwrap();
        let rho = a.tensor(&b).projector();
        let ra = partial_trace(&rho, &[0]).unwrap();
        let rb = partial_trace(&rho, &[1]).unwrap();
        assert!(tensor_product(ra.matrix(), rb.matrix()).max_abs_diff(rho.matrix()) < 1e-9);
    }

    #[test]
    fn reshape_and_embed_agree() {
        let dims = Dims::new(vec![2, 3, 2]).unwrap();
        let split = Bipartition::new(vec![0, 2], 3).unwrap();
        let a = normalized(&[c(0.1, 0.2), c(0.3, 0.), c(-0.5, 0.1), c(0.2, 0.2)]);
        let b = normalized(&[c(0.4, 0.), c(0.1, -0.3), c(0.2, 0.6)]);
        let v = embed_across(&a, &b, &dims, &split);
        let m = reshape_across(&v, &dims, &split);
        for i in 0..4 {
            for j in 0..3 {
                assert!((m[(i, j)] - a[i] * b[j]).norm() < 1e-15);
            }
        }
    }
}
