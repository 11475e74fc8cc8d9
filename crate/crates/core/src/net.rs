//! The basic approximation net: every product of at most `l0` generators,
//! deduplicated, with a nearest-neighbour index for the recursion's base case.
//!
//! Enumeration is breadth-first. Level `l` extends only the level `l - 1`
//! survivors, gates in ascending index order, never appending the inverse of
//! the last gate. A new product is kept only if no earlier entry lies within
//! `dedupe_tol`, which makes every kept sequence the shortest, then
//! lexicographically first, word for its unitary.
//!
//! On SU(2) the index stores quaternion embeddings, whose Euclidean distance
//! *is* the operator-norm distance. For `d > 2` it stores flattened matrices;
//! Frobenius distance only bounds the operator norm (`op <= F <= sqrt(d) op`),
//! so lookups take a shortlist, re-rank it exactly, then sweep the Frobenius
//! ball that could still hold a better entry.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{format_complex_text, parse_complex_text, GateSequence, GateSetFile, InstructionSet};
use crate::kdtree::KdTree;
use crate::linalg::{haar_su, op_norm_distance, quaternion_embed, CMatrix, Tolerances, Unitary};

pub const DEFAULT_DEDUPE_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ENTRIES: usize = 4_000_000;
pub const DEFAULT_SHORTLIST: usize = 32;

const NET_FORMAT: &str = "skc-net";
const NET_VERSION: u32 = 1;
/// Stored unitaries must match their re-evaluated sequences this closely on load.
const ENTRY_CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct NetConfig {
    pub dedupe_tol: f64,
    /// Refuse to enumerate a level whose projected size exceeds this.
    pub max_entries: usize,
    /// Shortlist width for `d > 2` lookups.
    pub shortlist: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            dedupe_tol: DEFAULT_DEDUPE_TOL,
            max_entries: DEFAULT_MAX_ENTRIES,
            shortlist: DEFAULT_SHORTLIST,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NetEntry {
    pub sequence: GateSequence,
    pub unitary: Unitary,
}

#[derive(Clone, Debug)]
pub struct BasicNet {
    set: Arc<InstructionSet>,
    set_fingerprint: String,
    l0: usize,
    dedupe_tol: f64,
    shortlist: usize,
    entries: Vec<NetEntry>,
    index: KdTree,
    measured_eps0: Option<f64>,
}

/// Upper bound on the number of backtrack-free words of length `<= l0`:
/// `1 + sum_{l=1}^{l0} G (G-1)^(l-1)`.
pub fn pruned_word_bound(gates: usize, l0: usize) -> f64 {
    let g = gates as f64;
    let mut total = 1.0;
    let mut level = g;
    for _ in 0..l0 {
        total += level;
        level *= (g - 1.0).max(0.0);
    }
    total
}

/// Order-of-magnitude `l0` needed to reach `eps0` on SU(d):
/// `(d^2 - 1) ln(1/eps0) / ln|G|`.
pub fn l0_estimate(dim: usize, gates: usize, eps0: f64) -> f64 {
    ((dim * dim - 1) as f64) * (1.0 / eps0).ln() / (gates as f64).ln()
}

fn embed(u: &Unitary) -> Vec<f64> {
    if u.dim() == 2 {
        quaternion_embed(u).expect("dim 2").to_vec()
    } else {
        let mut v = Vec::with_capacity(2 * u.dim() * u.dim());
        for z in u.entries_row_major() {
            v.push(z.re);
            v.push(z.im);
        }
        v
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Hash grid over the leading embedding coordinates, used for dedupe.
struct DedupeGrid {
    cell: f64,
    keys: usize,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl DedupeGrid {
    fn new(cell: f64, embed_dim: usize) -> Self {
        DedupeGrid {
            cell,
            keys: embed_dim.min(4),
            cells: HashMap::new(),
        }
    }

    fn key(&self, e: &[f64]) -> Vec<i64> {
        e[..self.keys].iter().map(|x| (x / self.cell).floor() as i64).collect()
    }

    fn neighbours(&self, e: &[f64]) -> Vec<usize> {
        let base = self.key(e);
        let mut out = Vec::new();
        let combos = 3usize.pow(self.keys as u32);
        let mut key = base.clone();
        for mut code in 0..combos {
            for (k, b) in base.iter().enumerate() {
                key[k] = b + (code % 3) as i64 - 1;
                code /= 3;
            }
            if let Some(ids) = self.cells.get(&key) {
                out.extend_from_slice(ids);
            }
        }
        out
    }

    fn insert(&mut self, e: &[f64], id: usize) {
        let key = self.key(e);
        self.cells.entry(key).or_default().push(id);
    }
}

impl BasicNet {
    /// Enumerates every backtrack-free product of length `<= l0`.
    pub fn build(set: Arc<InstructionSet>, l0: usize, config: &NetConfig) -> Result<Self> {
        if !(config.dedupe_tol > 0.0) {
            return Err(Error::InvalidArgument("dedupe tolerance must be positive".into()));
        }
        let dim = set.dim();
        let ngates = set.len();
        let identity = Unitary::identity(dim);
        let embed_dim = embed(&identity).len();
        // Frobenius radius that can contain an operator-norm tol-neighbour
        let radius = if dim == 2 {
            config.dedupe_tol
        } else {
            (dim as f64).sqrt() * config.dedupe_tol
        };
        let mut grid = DedupeGrid::new(radius, embed_dim);
        let mut entries = vec![NetEntry {
            sequence: GateSequence::empty(),
            unitary: identity.clone(),
        }];
        let mut embeddings = vec![embed(&identity)];
        grid.insert(&embeddings[0], 0);
        let mut frontier: Vec<usize> = vec![0];
        let bound = pruned_word_bound(ngates, l0);

        for level in 1..=l0 {
            if frontier.is_empty() {
                break;
            }
            let branching = if level == 1 { ngates } else { ngates.saturating_sub(1) };
            let estimate = entries.len() + frontier.len() * branching;
            if estimate > config.max_entries {
                return Err(Error::NetTooLarge {
                    level,
                    estimate,
                    budget: config.max_entries,
                    l0,
                    bound,
                });
            }
            let entries_ref = &entries;
            let set_ref: &InstructionSet = &set;
            let candidates: Vec<(usize, u32, Unitary)> = frontier
                .par_iter()
                .flat_map_iter(|&parent| {
                    let seq = &entries_ref[parent].sequence;
                    let last = seq.last();
                    (0..ngates as u32).filter_map(move |g| {
                        if last.is_some_and(|l| set_ref.inverse_of(g as usize) == l as usize) {
                            return None;
                        }
                        let u = &entries_ref[parent].unitary * &set_ref.gates()[g as usize].unitary;
                        Some((parent, g, u))
                    })
                })
                .collect();

            let mut next = Vec::new();
            for (parent, g, u) in candidates {
                let e = embed(&u);
                let duplicate = grid.neighbours(&e).into_iter().any(|j| {
                    if dim == 2 {
                        euclid(&embeddings[j], &e) <= config.dedupe_tol
                    } else {
                        euclid(&embeddings[j], &e) <= radius
                            && op_norm_distance(&entries[j].unitary, &u).unwrap() <= config.dedupe_tol
                    }
                });
                if duplicate {
                    continue;
                }
                let id = entries.len();
                grid.insert(&e, id);
                embeddings.push(e);
                entries.push(NetEntry {
                    sequence: entries[parent].sequence.pushed(g),
                    unitary: u,
                });
                next.push(id);
            }
            log::debug!("net level {level}: {} new, {} total", next.len(), entries.len());
            frontier = next;
        }

        let flat: Vec<f64> = embeddings.into_iter().flatten().collect();
        let index = KdTree::build(embed_dim, &flat);
        Ok(BasicNet {
            set_fingerprint: set.fingerprint(),
            set,
            l0,
            dedupe_tol: config.dedupe_tol,
            shortlist: config.shortlist.max(1),
            entries,
            index,
            measured_eps0: None,
        })
    }

    pub fn set(&self) -> &Arc<InstructionSet> {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn set_fingerprint(&self) -> &str {
        &self.set_fingerprint
    }

    pub fn l0(&self) -> usize {
        self.l0
    }

    pub fn dedupe_tol(&self) -> f64 {
        self.dedupe_tol
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[NetEntry] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &NetEntry {
        &self.entries[i]
    }

    pub fn measured_eps0(&self) -> Option<f64> {
        self.measured_eps0
    }

    pub fn set_measured_eps0(&mut self, eps0: Option<f64>) {
        self.measured_eps0 = eps0;
    }

    /// Index and operator-norm distance of the entry closest to `u`.
    ///
    /// Ties go to the lower entry index.
    pub fn nearest(&self, u: &Unitary) -> Result<(usize, f64)> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch(u.dim(), self.dim()));
        }
        let e = embed(u);
        if self.dim() == 2 {
            let (id, d2) = self.index.nearest(&e).expect("net always holds the identity");
            return Ok((id as usize, d2.sqrt()));
        }
        let mut best: Option<(f64, usize)> = None;
        let consider = |id: usize, best: &mut Option<(f64, usize)>| {
            let d = op_norm_distance(&self.entries[id].unitary, u).unwrap();
            let better = match best {
                None => true,
                Some((bd, bi)) => d < *bd || (d == *bd && id < *bi),
            };
            if better {
                *best = Some((d, id));
            }
        };
        let shortlist = self.index.k_nearest(&e, self.shortlist);
        for &(id, _) in &shortlist {
            consider(id as usize, &mut best);
        }
        let (bd, _) = best.expect("net always holds the identity");
        let r = (self.dim() as f64).sqrt() * bd * (1.0 + 1e-12) + 1e-15;
        let checked: std::collections::HashSet<u32> = shortlist.iter().map(|&(id, _)| id).collect();
        for id in self.index.within(&e, r * r) {
            if !checked.contains(&id) {
                consider(id as usize, &mut best);
            }
        }
        let (d, id) = best.unwrap();
        Ok((id, d))
    }

    /// The closest stored sequence and its distance.
    pub fn lookup(&self, u: &Unitary) -> Result<(GateSequence, f64)> {
        let (id, d) = self.nearest(u)?;
        Ok((self.entries[id].sequence.clone(), d))
    }

    /// Lookup distances over `samples` Haar-random targets; stores the max as
    /// the measured eps0 and returns `(max, mean)`.
    pub fn audit(&mut self, samples: usize, seed: u64) -> Result<(f64, f64)> {
        let (max, mean) = self.audit_distances(samples, seed)?;
        self.measured_eps0 = Some(max);
        Ok((max, mean))
    }

    /// Same as [`BasicNet::audit`] without touching the net.
    pub fn audit_distances(&self, samples: usize, seed: u64) -> Result<(f64, f64)> {
        if samples == 0 {
            return Err(Error::InvalidArgument("audit needs at least one sample".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let targets: Vec<Unitary> = (0..samples).map(|_| haar_su(self.dim(), &mut rng)).collect();
        let dists = targets
            .par_iter()
            .map(|u| self.nearest(u).map(|(_, d)| d))
            .collect::<Result<Vec<f64>>>()?;
        let max = dists.iter().copied().fold(0.0, f64::max);
        let mean = dists.iter().sum::<f64>() / samples as f64;
        Ok((max, mean))
    }

    pub fn to_file(&self) -> NetFile {
        NetFile {
            format: NET_FORMAT.into(),
            version: NET_VERSION,
            dim: self.dim(),
            set_fingerprint: self.set_fingerprint.clone(),
            gates: self.set.to_file_doc(),
            l0: self.l0,
            dedupe_tol: self.dedupe_tol,
            measured_eps0: self.measured_eps0,
            entries: self
                .entries
                .iter()
                .map(|e| NetFileEntry {
                    seq: e.sequence.0.clone(),
                    u: e.unitary.entries_row_major().into_iter().map(format_complex_text).collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn from_file(file: NetFile, set: Arc<InstructionSet>, config: &NetConfig) -> Result<Self> {
        if file.format != NET_FORMAT || file.version != NET_VERSION {
            return Err(Error::NetFormat(format!(
                "unsupported container `{}` version {}",
                file.format, file.version
            )));
        }
        let expected = set.fingerprint();
        if file.set_fingerprint != expected {
            return Err(Error::FingerprintMismatch {
                expected,
                found: file.set_fingerprint,
            });
        }
        if file.dim != set.dim() {
            return Err(Error::DimensionMismatch(file.dim, set.dim()));
        }
        if file.entries.is_empty() || !file.entries[0].seq.is_empty() {
            return Err(Error::NetFormat("first entry must be the empty sequence".into()));
        }
        let d = file.dim;
        let mut entries = Vec::with_capacity(file.entries.len());
        for (i, fe) in file.entries.into_iter().enumerate() {
            if fe.u.len() != d * d {
                return Err(Error::NetFormat(format!("entry {i}: expected {} matrix entries", d * d)));
            }
            let values = fe
                .u
                .iter()
                .map(|t| parse_complex_text(t).map_err(|_| Error::NetFormat(format!("entry {i}: bad number `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            let unitary = Unitary::from_matrix_unchecked(CMatrix::from_row_slice(d, d, &values));
            let sequence = GateSequence::new(fe.seq);
            let evaluated = set.evaluate(&sequence)?;
            if op_norm_distance(&evaluated, &unitary)? > ENTRY_CHECK_TOL {
                return Err(Error::NetFormat(format!("entry {i}: matrix does not match its sequence")));
            }
            entries.push(NetEntry { sequence, unitary });
        }
        let flat: Vec<f64> = entries.iter().flat_map(|e| embed(&e.unitary)).collect();
        let index = KdTree::build(embed(&entries[0].unitary).len(), &flat);
        Ok(BasicNet {
            set_fingerprint: expected,
            set,
            l0: file.l0,
            dedupe_tol: file.dedupe_tol,
            shortlist: config.shortlist.max(1),
            entries,
            index,
            measured_eps0: file.measured_eps0,
        })
    }

    pub fn load(path: impl AsRef<Path>, set: Arc<InstructionSet>, config: &NetConfig) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: NetFile = serde_json::from_str(&text)?;
        Self::from_file(file, set, config)
    }

    /// Loads a net with the instruction set embedded in the file.
    pub fn load_standalone(path: impl AsRef<Path>, config: &NetConfig) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: NetFile = serde_json::from_str(&text)?;
        let set = InstructionSet::from_file_doc(&file.gates, &Tolerances::default())?;
        Self::from_file(file, Arc::new(set), config)
    }
}

/// Serialized net. Matrix entries are `"re,im"` shortest round-trip decimals,
/// so save/load is bit-exact.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetFile {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub set_fingerprint: String,
    /// The instruction set after projection and inverse completion.
    pub gates: GateSetFile,
    pub l0: usize,
    pub dedupe_tol: f64,
    pub measured_eps0: Option<f64>,
    pub entries: Vec<NetFileEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetFileEntry {
    pub seq: Vec<u32>,
    pub u: Vec<String>,
}
