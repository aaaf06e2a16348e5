//! Local distinguishability of complete orthonormal bases.
//!
//! A basis with an entangled element is never locally distinguishable.
//! Product bases are searched for an adaptive protocol of local projective
//! measurements that never disturb the surviving candidates; a small catalog
//! of product bases known to be indistinguishable is consulted first.

use std::fmt;

use crate::coherence::ConditionalProductBasis;
use crate::entanglement::is_entangled_pure;
use crate::entropy::OrthonormalBasis;
use crate::error::{invalid, Result};
use crate::qmat::{
    complete_basis, kron_vec, norm, reduced_pure, vdot, Bipartition, CMat, Dims, PureState, C64, ONE,
};

/// Two local factors are orthogonal when `|⟨a|b⟩|` is at most this.
pub const ORTHO_TOL: f64 = 1e-9;
/// Squared weight a factor may leave outside its measurement outcome.
pub const LEAK_TOL: f64 = 1e-9;
/// Gram entries compared when matching catalog bases.
const MATCH_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Distinguishable,
    Indistinguishable,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Distinguishable => "Distinguishable",
            Verdict::Indistinguishable => "Indistinguishable",
            Verdict::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

/// One node of a measurement protocol: the surviving candidate elements and,
/// unless a single candidate is left, the local measurement performed next.
#[derive(Clone, Debug)]
pub struct ProtocolNode {
    pub elements: Vec<usize>,
    pub step: Option<Step>,
}

/// Party `party` measures the projectors of `branches` (summing to identity).
#[derive(Clone, Debug)]
pub struct Step {
    pub party: usize,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub projector: CMat,
    pub child: ProtocolNode,
}

#[derive(Clone, Debug)]
pub enum Certificate {
    Protocol(ProtocolNode),
    EntangledElement { index: usize, cut: Bipartition },
    Catalog { name: String },
    /// The search reached these elements with no admissible local partition.
    Stuck { elements: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct LoccVerdict {
    pub verdict: Verdict,
    pub certificate: Certificate,
}

/// Local factors of a fully product state, or `None` if entangled across
/// some single party. The factors multiply back to `psi` exactly, phase included.
pub fn product_factors(psi: &PureState) -> Result<Option<Vec<Vec<C64>>>> {
    let m = psi.dims().parties();
    let mut factors = Vec::with_capacity(m);
    for p in 0..m {
        if m > 1 && is_entangled_pure(psi, &Bipartition::new(vec![p], m)?)? {
            return Ok(None);
        }
        let eig = reduced_pure(psi, &[p])?.eig();
        factors.push(eig.vector(eig.values.len() - 1));
    }
    let prod = factors.iter().skip(1).fold(factors[0].clone(), |acc, f| kron_vec(&acc, f));
    let phase = vdot(&prod, psi.amplitudes());
    let phase = phase / phase.norm();
    for z in factors[0].iter_mut() {
        *z *= phase;
    }
    Ok(Some(factors))
}

/// Every element is product across every bipartition.
pub fn is_product_basis(basis: &OrthonormalBasis) -> Result<bool> {
    Ok(first_entangled(basis)?.is_none())
}

fn first_entangled(basis: &OrthonormalBasis) -> Result<Option<(usize, Bipartition)>> {
    let m = basis.dims().parties();
    if m < 2 {
        return Err(invalid("local distinguishability needs at least two parties"));
    }
    let cuts = Bipartition::all(m);
    for (i, e) in basis.elements().iter().enumerate() {
        for cut in &cuts {
            if is_entangled_pure(e, cut)? {
                return Ok(Some((i, cut.clone())));
            }
        }
    }
    Ok(None)
}

/// Three-way decision with certificate.
pub fn locc_distinguishable(basis: &OrthonormalBasis) -> Result<LoccVerdict> {
    if let Some((index, cut)) = first_entangled(basis)? {
        return Ok(LoccVerdict {
            verdict: Verdict::Indistinguishable,
            certificate: Certificate::EntangledElement { index, cut },
        });
    }
    let factors = basis_factors(basis)?;
    if let Some(name) = catalog_match(basis.dims(), &factors) {
        return Ok(LoccVerdict { verdict: Verdict::Indistinguishable, certificate: Certificate::Catalog { name } });
    }
    Ok(search(basis.dims(), &factors))
}

/// The partition search alone, without the catalog. Product bases only.
pub fn partition_search(basis: &OrthonormalBasis) -> Result<LoccVerdict> {
    if let Some((i, cut)) = first_entangled(basis)? {
        return Err(invalid(format!("element {i} is entangled across {cut}")));
    }
    Ok(search(basis.dims(), &basis_factors(basis)?))
}

fn basis_factors(basis: &OrthonormalBasis) -> Result<Vec<Vec<Vec<C64>>>> {
    basis
        .elements()
        .iter()
        .map(|e| product_factors(e)?.ok_or_else(|| invalid("entangled element")))
        .collect()
}

fn search(dims: &Dims, factors: &[Vec<Vec<C64>>]) -> LoccVerdict {
    let all: Vec<usize> = (0..factors.len()).collect();
    match build_node(dims, factors, all) {
        Ok(node) => LoccVerdict { verdict: Verdict::Distinguishable, certificate: Certificate::Protocol(node) },
        Err(elements) => LoccVerdict { verdict: Verdict::Unknown, certificate: Certificate::Stuck { elements } },
    }
}

/// Groups of `elements` whose `party` factors are linked by chains of
/// non-orthogonal pairs.
fn components(factors: &[Vec<Vec<C64>>], party: usize, elements: &[usize]) -> Vec<Vec<usize>> {
    let n = elements.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let overlap = vdot(&factors[elements[i]][party], &factors[elements[j]][party]).norm();
            if overlap > ORTHO_TOL {
                let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                label[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = root(&mut label, i);
        match groups.iter_mut().find(|(g, _)| *g == r) {
            Some((_, v)) => v.push(elements[i]),
            None => groups.push((r, vec![elements[i]])),
        }
    }
    groups.into_iter().map(|(_, v)| v).collect()
}

/// Projector onto the span of `vectors`.
fn span_projector(vectors: &[&Vec<C64>], d: usize) -> CMat {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = (*v).clone();
        for _ in 0..2 {
            for b in &basis {
                let c = vdot(b, &w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = norm(&w);
        if n > 1e-6 {
            basis.push(w.iter().map(|z| z / n).collect());
        }
    }
    let mut p = CMat::zeros(d, d);
    for b in &basis {
        p = p.add(&CMat::outer(b));
    }
    p
}

fn build_node(dims: &Dims, factors: &[Vec<Vec<C64>>], elements: Vec<usize>) -> std::result::Result<ProtocolNode, Vec<usize>> {
    if elements.len() == 1 {
        return Ok(ProtocolNode { elements, step: None });
    }
    for party in 0..dims.parties() {
        let groups = components(factors, party, &elements);
        if groups.len() < 2 {
            continue;
        }
        let d = dims.local(party);
        let mut projectors: Vec<CMat> = groups
            .iter()
            .map(|g| span_projector(&g.iter().map(|&e| &factors[e][party]).collect::<Vec<_>>(), d))
            .collect();
        // the unused part of the local space joins the last outcome
        let used = projectors.iter().fold(CMat::zeros(d, d), |acc, p| acc.add(p));
        let last = projectors.len() - 1;
        projectors[last] = projectors[last].add(&CMat::identity(d).sub(&used));

        let mut branches = Vec::with_capacity(groups.len());
        for (g, projector) in groups.into_iter().zip(projectors) {
            branches.push(Branch { projector, child: build_node(dims, factors, g)? });
        }
        return Ok(ProtocolNode { elements, step: Some(Step { party, branches }) });
    }
    Err(elements)
}

/// Runs the protocol on every element of `basis` and checks that each is
/// identified with probability one and never disturbed.
pub fn replay(node: &ProtocolNode, basis: &OrthonormalBasis) -> Result<bool> {
    let factors = basis_factors(basis)?;
    for (e, f) in factors.iter().enumerate() {
        let mut at = node;
        loop {
            if !at.elements.contains(&e) {
                return Ok(false);
            }
            let Some(step) = &at.step else {
                if at.elements != [e] {
                    return Ok(false);
                }
                break;
            };
            let v = &f[step.party];
            let probs: Vec<f64> = step.branches.iter().map(|b| vdot(v, &b.projector.mat_vec(v)).re).collect();
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > LEAK_TOL {
                return Ok(false);
            }
            let Some(k) = probs.iter().position(|&p| p >= 1.0 - LEAK_TOL) else {
                return Ok(false);
            };
            at = &step.branches[k].child;
        }
    }
    Ok(true)
}

/// Expanded basis of a conditional product basis.
pub fn conditional_product_basis_to_basis(cpb: &ConditionalProductBasis) -> Result<OrthonormalBasis> {
    cpb.expand()
}

/// A locally distinguishable product basis whose element 0 is `psi`.
pub fn complete_product_extension(psi: &PureState) -> Result<OrthonormalBasis> {
    extension_cpb(psi)?.expand()
}

/// As [`complete_product_extension`] but across a cut: `psi` need only be
/// product across `split`; element 0 of the result is `psi`.
pub fn complete_product_extension_across(psi: &PureState, split: &Bipartition) -> Result<OrthonormalBasis> {
    split.check(psi.dims())?;
    let (_, da, db) = split.index_map(psi.dims());
    let m = crate::qmat::reshape_across(psi.amplitudes(), psi.dims(), split);
    let flat = PureState::new(Dims::new(vec![da, db])?, m.data().to_vec())?;
    extension_cpb(&flat)?.expand_across(psi.dims(), split)
}

fn extension_cpb(psi: &PureState) -> Result<ConditionalProductBasis> {
    let factors = product_factors(psi)?.ok_or_else(|| invalid("state is entangled; no product extension"))?;
    let dims = psi.dims().clone();
    let local = factors
        .iter()
        .enumerate()
        .map(|(p, f)| CMat::from_columns(&complete_basis(&[f.clone()], dims.local(p))))
        .collect();
    ConditionalProductBasis::uniform(dims, local)
}

/// The 3×3 domino basis: `|1⟩|1⟩, |0⟩|0±1⟩, |2⟩|1±2⟩, |1±2⟩|0⟩, |0±1⟩|2⟩`.
pub fn domino_basis() -> OrthonormalBasis {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let k = |i: usize| crate::qmat::ket(3, i);
    let pm = |i: usize, j: usize, sign: f64| -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); 3];
        v[i] = C64::new(s, 0.0);
        v[j] = C64::new(sign * s, 0.0);
        v
    };
    let pairs = vec![
        (k(1), k(1)),
        (k(0), pm(0, 1, 1.0)),
        (k(0), pm(0, 1, -1.0)),
        (k(2), pm(1, 2, 1.0)),
        (k(2), pm(1, 2, -1.0)),
        (pm(1, 2, 1.0), k(0)),
        (pm(1, 2, -1.0), k(0)),
        (pm(0, 1, 1.0), k(2)),
        (pm(0, 1, -1.0), k(2)),
    ];
    let dims = Dims::new(vec![3, 3]).expect("valid dims");
    let elements = pairs
        .into_iter()
        .map(|(a, b)| PureState::new(dims.clone(), kron_vec(&a, &b)).expect("unit product"))
        .collect();
    OrthonormalBasis::new(dims, elements).expect("domino basis is orthonormal")
}

/// Name of a catalog basis equal to this one up to element order, phases,
/// party exchange and local unitaries.
fn catalog_match(dims: &Dims, factors: &[Vec<Vec<C64>>]) -> Option<String> {
    if dims.as_slice() != [3, 3] {
        return None;
    }
    let domino = basis_factors(&domino_basis()).expect("product basis");
    let swapped: Vec<Vec<Vec<C64>>> = domino.iter().map(|f| vec![f[1].clone(), f[0].clone()]).collect();
    for reference in [&domino, &swapped] {
        if equivalent(factors, reference) {
            return Some("domino".to_string());
        }
    }
    None
}

fn gram(factors: &[Vec<Vec<C64>>], party: usize) -> Vec<Vec<C64>> {
    factors.iter().map(|a| factors.iter().map(|b| vdot(&a[party], &b[party])).collect()).collect()
}

/// Searches a permutation `π` with `|G_p(x)[i][j]| = |G_p(y)[π i][π j]|` for
/// every party, then confirms each party's Gram matrices agree up to
/// per-element phases, which is equivalence under a local unitary.
fn equivalent(x: &[Vec<Vec<C64>>], y: &[Vec<Vec<C64>>]) -> bool {
    if x.len() != y.len() || x[0].len() != y[0].len() {
        return false;
    }
    let parties = x[0].len();
    let gx: Vec<_> = (0..parties).map(|p| gram(x, p)).collect();
    let gy: Vec<_> = (0..parties).map(|p| gram(y, p)).collect();
    let mut perm = vec![usize::MAX; x.len()];
    let mut used = vec![false; y.len()];
    assign(0, &gx, &gy, &mut perm, &mut used)
}

fn assign(i: usize, gx: &[Vec<Vec<C64>>], gy: &[Vec<Vec<C64>>], perm: &mut [usize], used: &mut [bool]) -> bool {
    let n = perm.len();
    if i == n {
        return gx.iter().zip(gy).all(|(a, b)| phase_equivalent(a, b, perm));
    }
    for cand in 0..n {
        if used[cand] {
            continue;
        }
        let fits = (0..=i).all(|j| {
            let pj = if j == i { cand } else { perm[j] };
            gx.iter().zip(gy).all(|(a, b)| (a[i][j].norm() - b[cand][pj].norm()).abs() < MATCH_TOL)
        });
        if fits {
            perm[i] = cand;
            used[cand] = true;
            if assign(i + 1, gx, gy, perm, used) {
                return true;
            }
            used[cand] = false;
            perm[i] = usize::MAX;
        }
    }
    false
}

/// `a[i][j] = conj(z_i) z_j b[π i][π j]` for unit phases `z`.
fn phase_equivalent(a: &[Vec<C64>], b: &[Vec<C64>], perm: &[usize]) -> bool {
    let n = a.len();
    let mut z: Vec<Option<C64>> = vec![None; n];
    for start in 0..n {
        if z[start].is_some() {
            continue;
        }
        z[start] = Some(ONE);
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let bij = b[perm[i]][perm[j]];
                if z[j].is_none() && bij.norm() > MATCH_TOL {
                    // conj(z_i) z_j = a_ij / b_ij
                    let r = a[i][j] / bij;
                    z[j] = Some(z[i].expect("visited") * r / r.norm());
                    stack.push(j);
                }
            }
        }
    }
    (0..n).all(|i| {
        (0..n).all(|j| {
            let (zi, zj) = (z[i].expect("set"), z[j].expect("set"));
            (a[i][j] - zi.conj() * zj * b[perm[i]][perm[j]]).norm() < MATCH_TOL
        })
    })
}

impl fmt::Display for ProtocolNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn walk(node: &ProtocolNode, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let pad = "  ".repeat(depth);
            match &node.step {
                None => writeln!(f, "{pad}identify element {}", node.elements[0]),
                Some(step) => {
                    writeln!(f, "{pad}party {} measures {} outcomes on {:?}", step.party, step.branches.len(), node.elements)?;
                    step.branches.iter().try_for_each(|b| walk(&b.child, depth + 1, f))
                }
            }
        }
        walk(self, 0, f)
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Protocol(node) => write!(f, "{node}"),
            Certificate::EntangledElement { index, cut } => writeln!(f, "element {index} is entangled across {cut}"),
            Certificate::Catalog { name } => writeln!(f, "matches catalog basis '{name}' up to local unitaries"),
            Certificate::Stuck { elements } => writeln!(f, "no local party can split elements {elements:?}"),
        }
    }
}
