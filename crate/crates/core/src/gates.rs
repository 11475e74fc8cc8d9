//! Instruction sets and gate sequences.
//!
//! A sequence `g1 g2 ... gm` stands for the matrix product `g1 * g2 * ... * gm`,
//! so the gate applied first to a state is the *last* one listed. The
//! circuit-order rendering reverses this.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{c, op_norm_distance, project_su_with, CMatrix, Tolerances, Unitary, C64};

/// Two gates are treated as mutual inverses when `d(g^dagger, h)` is below this.
pub const INVERSE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Gate {
    pub name: String,
    pub unitary: Unitary,
    /// Index of this gate's inverse within the owning set.
    pub inverse: usize,
}

/// A finite, inverse-closed set of SU(d) gates.
#[derive(Clone, Debug)]
pub struct InstructionSet {
    dim: usize,
    gates: Vec<Gate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    /// Matrix-product order: the unitary is `g1 * g2 * ... * gm`.
    #[default]
    Product,
    /// Application order: first gate applied comes first.
    Circuit,
}

impl std::str::FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(Order::Product),
            "circuit" => Ok(Order::Circuit),
            other => Err(Error::InvalidArgument(format!("unknown order `{other}`"))),
        }
    }
}

/// Matrix entry in a gate-set file: either `[re, im]` or the text `"re,im"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Pair([f64; 2]),
    Text(String),
}

impl MatrixEntry {
    fn value(&self) -> Result<C64> {
        match self {
            MatrixEntry::Pair([re, im]) => Ok(c(*re, *im)),
            MatrixEntry::Text(t) => parse_complex_text(t),
        }
    }
}

/// Parses `"re,im"`.
pub fn parse_complex_text(t: &str) -> Result<C64> {
    let (re, im) = t
        .split_once(',')
        .ok_or_else(|| Error::InstructionSet(format!("malformed matrix entry `{t}`")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InstructionSet(format!("malformed matrix entry `{t}`")))
    };
    Ok(c(parse(re)?, parse(im)?))
}

/// Formats `"re,im"` with shortest round-trip decimal text.
pub fn format_complex_text(z: C64) -> String {
    format!("{:?},{:?}", z.re, z.im)
}

/// On-disk gate-set document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateSetFile {
    pub dim: usize,
    pub gates: Vec<GateFileEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateFileEntry {
    pub name: String,
    /// Row-major, `dim * dim` entries.
    pub matrix: Vec<MatrixEntry>,
}

/// Reads a row-major `dim x dim` matrix out of gate-file entries.
pub fn matrix_from_entries(dim: usize, entries: &[MatrixEntry]) -> Result<CMatrix> {
    if entries.len() != dim * dim {
        return Err(Error::InstructionSet(format!(
            "expected {} matrix entries for dim {dim}, found {}",
            dim * dim,
            entries.len()
        )));
    }
    let values = entries.iter().map(MatrixEntry::value).collect::<Result<Vec<_>>>()?;
    Ok(CMatrix::from_row_slice(dim, dim, &values))
}

impl InstructionSet {
    /// Validates the gates, projects them into SU(d) and completes missing
    /// inverses with a `_dag` suffix.
    pub fn from_matrices(dim: usize, gates: Vec<(String, CMatrix)>, tol: &Tolerances) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InstructionSet("dimension must be positive".into()));
        }
        if gates.is_empty() {
            return Err(Error::InstructionSet("gate list is empty".into()));
        }
        let mut names = HashSet::new();
        let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
        for (name, m) in gates {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::InstructionSet(format!(
                    "gate `{name}` is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !names.insert(name.clone()) {
                return Err(Error::InstructionSet(format!("duplicate gate name `{name}`")));
            }
            let u = Unitary::with_tolerance(m, tol.unitarity)
                .map_err(|e| Error::InstructionSet(format!("gate `{name}`: {e}")))?;
            let det_err = (u.determinant() - c(1.0, 0.0)).norm();
            let u = if det_err > tol.determinant {
                log::warn!("gate `{name}` has |det - 1| = {det_err:.3e}; projecting into SU({dim})");
                let p = project_su_with(&u, tol)?;
                let after = (p.determinant() - c(1.0, 0.0)).norm();
                if after > tol.determinant {
                    return Err(Error::InstructionSet(format!(
                        "gate `{name}`: determinant still off by {after:.3e} after projection"
                    )));
                }
                p
            } else {
                u
            };
            out.push(Gate {
                name,
                unitary: u,
                inverse: usize::MAX,
            });
        }

        let original = out.len();
        for i in 0..original {
            if out[i].inverse != usize::MAX {
                continue;
            }
            let adj = out[i].unitary.adjoint();
            let found = (0..out.len()).find(|&j| op_norm_distance(&adj, &out[j].unitary).unwrap() < INVERSE_TOL);
            let j = match found {
                Some(j) => j,
                None => {
                    let name = format!("{}_dag", out[i].name);
                    if !names.insert(name.clone()) {
                        return Err(Error::InstructionSet(format!(
                            "cannot add inverse `{name}`: name already taken by a different gate"
                        )));
                    }
                    log::info!("adding missing inverse `{name}`");
                    out.push(Gate {
                        name,
                        unitary: adj,
                        inverse: i,
                    });
                    out.len() - 1
                }
            };
            out[i].inverse = j;
            out[j].inverse = i;
        }
        log::debug!("universality of the {}-gate set is assumed, not checked", out.len());
        Ok(InstructionSet { dim, gates: out })
    }

    pub fn from_file_doc(doc: &GateSetFile, tol: &Tolerances) -> Result<Self> {
        let gates = doc
            .gates
            .iter()
            .map(|g| Ok((g.name.clone(), matrix_from_entries(doc.dim, &g.matrix)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_matrices(doc.dim, gates, tol)
    }

    /// Parses the JSON gate-set format.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &Tolerances::default())
    }

    pub fn parse_with(text: &str, tol: &Tolerances) -> Result<Self> {
        let doc: GateSetFile = serde_json::from_str(text)?;
        Self::from_file_doc(&doc, tol)
    }

    pub fn load(path: impl AsRef<Path>, tol: &Tolerances) -> Result<Self> {
        Self::parse_with(&std::fs::read_to_string(path)?, tol)
    }

    /// Hadamard, T and T^dagger, each projected into SU(2).
    pub fn clifford_t() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
        let t = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, s)]);
        let tdg = t.adjoint();
        Self::from_matrices(
            2,
            vec![("H".into(), h), ("T".into(), t), ("T_dag".into(), tdg)],
            &Tolerances::default(),
        )
        .expect("built-in gate set is valid")
    }

    /// The document this set serializes to (after projection and completion).
    pub fn to_file_doc(&self) -> GateSetFile {
        GateSetFile {
            dim: self.dim,
            gates: self
                .gates
                .iter()
                .map(|g| GateFileEntry {
                    name: g.name.clone(),
                    matrix: g
                        .unitary
                        .entries_row_major()
                        .into_iter()
                        .map(|z| MatrixEntry::Pair([z.re, z.im]))
                        .collect(),
                })
                .collect(),
        }
    }

    /// SHA-256 over names, inverse map and exact matrix entries.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("dim={}\n", self.dim).as_bytes());
        for g in &self.gates {
            hasher.update(format!("{}|{}|", g.name, g.inverse).as_bytes());
            for z in g.unitary.entries_row_major() {
                hasher.update(format_complex_text(z).as_bytes());
                hasher.update(b";");
            }
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, index: usize) -> Result<&Gate> {
        self.gates.get(index).ok_or(Error::UnknownGate(index))
    }

    pub fn inverse_of(&self, index: usize) -> usize {
        self.gates[index].inverse
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gates.iter().position(|g| g.name == name)
    }

    fn check(&self, seq: &GateSequence) -> Result<()> {
        match seq.0.iter().find(|&&g| g as usize >= self.gates.len()) {
            Some(&g) => Err(Error::UnknownGate(g as usize)),
            None => Ok(()),
        }
    }

    /// `g1 * g2 * ... * gm`.
    pub fn evaluate(&self, seq: &GateSequence) -> Result<Unitary> {
        self.check(seq)?;
        let d = self.dim;
        let mut acc = CMatrix::identity(d, d);
        let mut buf = CMatrix::zeros(d, d);
        for &g in &seq.0 {
            acc.mul_to(self.gates[g as usize].unitary.matrix(), &mut buf);
            std::mem::swap(&mut acc, &mut buf);
        }
        Ok(Unitary::from_matrix_unchecked(acc))
    }

    /// Reversed sequence with every gate replaced by its inverse.
    pub fn invert(&self, seq: &GateSequence) -> Result<GateSequence> {
        self.check(seq)?;
        Ok(GateSequence(
            seq.0.iter().rev().map(|&g| self.gates[g as usize].inverse as u32).collect(),
        ))
    }

    /// Cancels adjacent `g, g^dagger` pairs until none remain.
    pub fn simplify(&self, seq: &GateSequence) -> Result<GateSequence> {
        self.check(seq)?;
        let mut out: Vec<u32> = Vec::with_capacity(seq.len());
        for &g in &seq.0 {
            match out.last() {
                Some(&top) if self.gates[g as usize].inverse == top as usize => {
                    out.pop();
                }
                _ => out.push(g),
            }
        }
        Ok(GateSequence(out))
    }

    /// Whitespace-separated gate names.
    pub fn format_sequence(&self, seq: &GateSequence, order: Order) -> String {
        let names = seq.0.iter().map(|&g| self.gates[g as usize].name.as_str());
        match order {
            Order::Product => names.collect::<Vec<_>>().join(" "),
            Order::Circuit => names.rev().collect::<Vec<_>>().join(" "),
        }
    }

    pub fn parse_sequence(&self, text: &str, order: Order) -> Result<GateSequence> {
        let mut gates = text
            .split_whitespace()
            .map(|name| {
                self.index_of(name)
                    .map(|i| i as u32)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown gate `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if order == Order::Circuit {
            gates.reverse();
        }
        Ok(GateSequence(gates))
    }
}

/// Ordered list of gate indices into an [`InstructionSet`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateSequence(pub Vec<u32>);

impl GateSequence {
    pub fn new(gates: Vec<u32>) -> Self {
        GateSequence(gates)
    }

    pub fn empty() -> Self {
        GateSequence(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn gates(&self) -> &[u32] {
        &self.0
    }

    pub fn last(&self) -> Option<u32> {
        self.0.last().copied()
    }

    pub fn pushed(&self, g: u32) -> GateSequence {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(g);
        GateSequence(v)
    }

    pub fn concat(&self, other: &GateSequence) -> GateSequence {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        GateSequence(v)
    }
}

impl fmt::Display for GateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}
