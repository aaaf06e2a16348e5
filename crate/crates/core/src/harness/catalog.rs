//! Named states and bases.

use crate::entropy::OrthonormalBasis;
use crate::error::{invalid, Result};
use crate::locc::domino_basis;
use crate::qmat::{DensityMatrix, Dims, PureState, C64, ZERO};

use super::io::QObject;

fn qubits(m: usize) -> Result<Dims> {
    Dims::new(vec![2; m])
}

fn two_qubit(amps: [f64; 4]) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = amps.iter().map(|&x| C64::new(x * s, 0.0)).collect();
    PureState::new(qubits(2).expect("valid"), amps).expect("normalized")
}

/// `(|00⟩ + |11⟩)/√2`
pub fn bell_phi_plus() -> PureState {
    two_qubit([1.0, 0.0, 0.0, 1.0])
}

/// `(|01⟩ + |10⟩)/√2`
pub fn bell_psi_plus() -> PureState {
    two_qubit([0.0, 1.0, 1.0, 0.0])
}

/// `(|01⟩ − |10⟩)/√2`
pub fn bell_psi_minus() -> PureState {
    two_qubit([0.0, 1.0, -1.0, 0.0])
}

/// `p|ψ⁺⟩⟨ψ⁺| + (1−p)|ψ⁻⟩⟨ψ⁻|`
pub fn rho2(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("rho2 needs p in [0, 1], got {p}")));
    }
    DensityMatrix::mixture(&[p, 1.0 - p], &[bell_psi_plus(), bell_psi_minus()])
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `m` qubits.
pub fn ghz(m: usize) -> Result<PureState> {
    if m < 2 {
        return Err(invalid("ghz needs at least 2 qubits"));
    }
    let dims = qubits(m)?;
    let mut amps = vec![ZERO; dims.total()];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = C64::new(s, 0.0);
    amps[dims.total() - 1] = C64::new(s, 0.0);
    PureState::new(dims, amps)
}

/// Equal superposition of the `m` single-excitation states.
pub fn w(m: usize) -> Result<PureState> {
    if m < 2 {
        return Err(invalid("w needs at least 2 qubits"));
    }
    let dims = qubits(m)?;
    let mut amps = vec![ZERO; dims.total()];
    let a = 1.0 / (m as f64).sqrt();
    for k in 0..m {
        amps[1 << k] = C64::new(a, 0.0);
    }
    PureState::new(dims, amps)
}

pub const CATALOG_NAMES: &[&str] =
    &["bell_phi+", "bell_psi+", "bell_psi-", "rho2(p)", "ghz(m)", "w(m)", "domino_basis", "computational(dims)"];

/// Looks up `name`, e.g. `bell_psi-`, `rho2(0.75)`, `ghz(3)`, `computational(2x3)`.
pub fn catalog(name: &str) -> Result<QObject> {
    let name = name.trim();
    let (base, arg) = match name.find('(') {
        Some(i) if name.ends_with(')') => (&name[..i], Some(name[i + 1..name.len() - 1].trim())),
        Some(_) => return Err(invalid(format!("malformed catalog name '{name}'"))),
        None => (name, None),
    };
    let count = |a: Option<&str>| -> Result<usize> {
        a.ok_or_else(|| invalid(format!("{base} needs an argument")))?
            .parse()
            .map_err(|_| invalid(format!("bad party count in '{name}'")))
    };
    let obj = match (base, arg) {
        ("bell_phi+", None) => QObject::Pure(bell_phi_plus()),
        ("bell_psi+", None) => QObject::Pure(bell_psi_plus()),
        ("bell_psi-", None) => QObject::Pure(bell_psi_minus()),
        ("rho2", Some(a)) => {
            let p: f64 = a.parse().map_err(|_| invalid(format!("bad probability in '{name}'")))?;
            QObject::Density(rho2(p)?)
        }
        ("ghz", a) => QObject::Pure(ghz(count(a)?)?),
        ("w", a) => QObject::Pure(w(count(a)?)?),
        ("domino_basis", None) => QObject::Basis(domino_basis()),
        ("computational", Some(a)) => QObject::Basis(OrthonormalBasis::computational(Dims::parse(a)?)),
        _ => {
            return Err(invalid(format!("unknown catalog entry '{name}'; known: {}", CATALOG_NAMES.join(", "))));
        }
    };
    Ok(obj)
}
