//! Plain-text state files.
//!
//! ```text
//! density 2x2
//! 0.5 0
//! 0 0
//! ...
//! ```
//! The header names the kind (`pure`, `density` or `basis`) and the dims;
//! every following line holds one `re im` entry, row-major. A basis lists its
//! elements one after another. Blank lines and `#` comments are ignored.

use std::fmt::{self, Write as _};
use std::path::Path;

use crate::entropy::OrthonormalBasis;
use crate::error::{Error, Result};
use crate::qmat::{CMat, DensityMatrix, Dims, PureState, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Pure,
    Density,
    Basis,
}

impl Kind {
    fn entries(self, dims: &Dims) -> usize {
        match self {
            Kind::Pure => dims.total(),
            Kind::Density | Kind::Basis => dims.total() * dims.total(),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Pure => "pure",
            Kind::Density => "density",
            Kind::Basis => "basis",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateFile {
    pub kind: Kind,
    pub dims: Dims,
    pub data: Vec<C64>,
}

/// A validated object read from or written to a state file.
#[derive(Clone, Debug)]
pub enum QObject {
    Pure(PureState),
    Density(DensityMatrix),
    Basis(OrthonormalBasis),
}

impl QObject {
    pub fn dims(&self) -> &Dims {
        match self {
            QObject::Pure(p) => p.dims(),
            QObject::Density(r) => r.dims(),
            QObject::Basis(b) => b.dims(),
        }
    }

    /// The density matrix of a pure or mixed state.
    pub fn density(&self) -> Option<DensityMatrix> {
        match self {
            QObject::Pure(p) => Some(p.projector()),
            QObject::Density(r) => Some(r.clone()),
            QObject::Basis(_) => None,
        }
    }
}

fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

impl StateFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or_else(|| parse_error(1, "empty file"))?;
        let mut parts = header.split_whitespace();
        let kind = match parts.next() {
            Some("pure") => Kind::Pure,
            Some("density") => Kind::Density,
            Some("basis") => Kind::Basis,
            other => return Err(parse_error(hline, format!("unknown kind {other:?}; expected pure, density or basis"))),
        };
        let dims = parts.next().ok_or_else(|| parse_error(hline, "missing dims after kind"))?;
        let dims = Dims::parse(dims).map_err(|e| parse_error(hline, e.to_string()))?;
        if parts.next().is_some() {
            return Err(parse_error(hline, "trailing tokens in header"));
        }

        let expected = kind.entries(&dims);
        let mut data = Vec::with_capacity(expected);
        let mut last = hline;
        for (n, line) in lines {
            last = n;
            let nums: Vec<&str> = line.split_whitespace().collect();
            if nums.len() != 2 {
                return Err(parse_error(n, format!("expected 're im', got {} tokens", nums.len())));
            }
            let num = |s: &str| -> Result<f64> {
                let v: f64 = s.parse().map_err(|_| parse_error(n, format!("not a number: '{s}'")))?;
                if v.is_finite() { Ok(v) } else { Err(parse_error(n, "non-finite entry")) }
            };
            data.push(C64::new(num(nums[0])?, num(nums[1])?));
            if data.len() > expected {
                return Err(parse_error(n, format!("more than {expected} entries for {kind} {dims}")));
            }
        }
        if data.len() != expected {
            return Err(parse_error(last, format!("expected {expected} entries for {kind} {dims}, got {}", data.len())));
        }
        Ok(Self { kind, dims, data })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.kind, self.dims);
        for z in &self.data {
            // shortest round-trip formatting
            let _ = writeln!(s, "{} {}", z.re, z.im);
        }
        s
    }

    /// Validates the data against the invariants of its kind.
    pub fn into_object(self) -> Result<QObject> {
        let d = self.dims.total();
        Ok(match self.kind {
            Kind::Pure => QObject::Pure(PureState::new(self.dims, self.data)?),
            Kind::Density => QObject::Density(DensityMatrix::new(self.dims, CMat::new(d, d, self.data)?)?),
            Kind::Basis => {
                let elements = self
                    .data
                    .chunks(d)
                    .map(|c| PureState::new(self.dims.clone(), c.to_vec()))
                    .collect::<Result<Vec<_>>>()?;
                QObject::Basis(OrthonormalBasis::new(self.dims, elements)?)
            }
        })
    }

    pub fn from_object(obj: &QObject) -> Self {
        match obj {
            QObject::Pure(p) => Self { kind: Kind::Pure, dims: p.dims().clone(), data: p.amplitudes().to_vec() },
            QObject::Density(r) => Self { kind: Kind::Density, dims: r.dims().clone(), data: r.matrix().data().to_vec() },
            QObject::Basis(b) => Self {
                kind: Kind::Basis,
                dims: b.dims().clone(),
                data: b.elements().iter().flat_map(|e| e.amplitudes().iter().copied()).collect(),
            },
        }
    }
}

/// Reads and validates a state file.
pub fn load(path: &Path) -> Result<QObject> {
    StateFile::read(path)?.into_object()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::catalog::catalog;

    #[test]
    fn round_trip_catalog_objects() {
        for name in ["bell_psi-", "rho2(0.75)", "w(3)", "domino_basis"] {
            let obj = catalog(name).unwrap();
            let file = StateFile::from_object(&obj);
            let text = file.to_text();
            let back = StateFile::parse(&text).unwrap();
            assert_eq!(back, file, "{name}");
            assert!(back.into_object().is_ok());
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# a qubit\npure 2\n\n1 0  # |0>\n0 0\n";
        let f = StateFile::parse(text).unwrap();
        assert_eq!(f.kind, Kind::Pure);
        assert!(matches!(f.into_object().unwrap(), QObject::Pure(_)));
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = |t: &str| StateFile::parse(t).and_then(|f| f.into_object()).unwrap_err().to_string();
        assert!(err("").contains("empty"));
        assert!(err("mixed 2\n1 0\n0 0\n").contains("unknown kind"));
        assert!(err("pure 2\n1 0\n").contains("expected 2 entries"));
        assert!(err("pure 2\n1 0\n0 x\n").contains("line 3"));
        assert!(err("pure 2\n1 0\n1 0\n").contains("not normalized"));
        assert!(err("density 2\n1 0\n0 0\n0 0\n1 0\n").contains("trace"));
        assert!(err("density 2\n0.5 0\n1 0\n0 0\n0.5 0\n").contains("Hermitian"));
        assert!(err("density 2\n1.5 0\n0 0\n0 0\n-0.5 0\n").contains("positive"));
        assert!(err("basis 2\n1 0\n0 0\n1 0\n0 0\n").contains("orthonormal"));
    }
}
