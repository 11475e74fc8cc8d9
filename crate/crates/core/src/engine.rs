//! The recursive compiler.
//!
//! `compile(U, n)` approximates `U` at depth `n - 1`, decomposes the residual
//! `Delta = U U_{n-1}^dagger` into a balanced group commutator `V W V^dagger W^dagger`,
//! approximates `V` and `W` at depth `n - 1` and returns
//! `U_n = V_{n-1} W_{n-1} V_{n-1}^dagger W_{n-1}^dagger U_{n-1}`.
//!
//! Results form a DAG: a commutator node holds shared references to its three
//! children, and inverses are produced only when the DAG is flattened.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::commutator::{gc_approx_decompose, gc_decompose_su2, SkConstants};
use crate::error::{Error, Result};
use crate::gates::GateSequence;
use crate::linalg::{haar_su, op_norm_distance, Unitary};
use crate::net::BasicNet;

pub const DEFAULT_DEPTH_CAP: usize = 25;
pub const DEFAULT_CALIBRATED_THRESHOLD: f64 = 0.14;
pub const DEFAULT_MAX_SEQUENCE: u128 = 100_000_000;

/// `ln 5 / ln(3/2)`: length grows as `ln^{3.97}(1/eps)`.
pub const LENGTH_EXPONENT: f64 = 3.969_362_295_916_117_7;
/// `ln 3 / ln(3/2)`: time grows as `ln^{2.71}(1/eps)`.
pub const TIME_EXPONENT: f64 = 2.709_511_291_351_455;

const LN_3_2: f64 = 0.405_465_108_108_164_4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthMode {
    /// Require `eps0 < 1 / c_approx^2` and predict with `c_approx`.
    Strict,
    /// Accept nets up to a practical threshold and predict with a fitted constant.
    Calibrated,
}

impl DepthMode {
    pub fn name(self) -> &'static str {
        match self {
            DepthMode::Strict => "strict",
            DepthMode::Calibrated => "calibrated",
        }
    }
}

impl std::str::FromStr for DepthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(DepthMode::Strict),
            "calibrated" => Ok(DepthMode::Calibrated),
            _ => Err(Error::InvalidArgument(format!("unknown mode `{s}` (strict|calibrated)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub mode: DepthMode,
    /// Largest measured eps0 accepted in calibrated mode.
    pub calibrated_threshold: f64,
    pub depth_cap: usize,
    /// Refuse to flatten sequences longer than this.
    pub max_sequence: u128,
    pub constants: SkConstants,
}

impl EngineConfig {
    pub fn for_dim(dim: usize) -> Self {
        EngineConfig {
            mode: DepthMode::Calibrated,
            calibrated_threshold: DEFAULT_CALIBRATED_THRESHOLD,
            depth_cap: DEFAULT_DEPTH_CAP,
            max_sequence: DEFAULT_MAX_SEQUENCE,
            constants: SkConstants::for_dim(dim),
        }
    }

    pub fn with_mode(mut self, mode: DepthMode) -> Self {
        self.mode = mode;
        self
    }

    /// The largest eps0 the current mode accepts.
    pub fn eps0_threshold(&self) -> f64 {
        match self.mode {
            DepthMode::Strict => self.constants.eps0_bound,
            DepthMode::Calibrated => self.calibrated_threshold,
        }
    }
}

#[derive(Debug)]
pub enum NodeKind {
    /// Index of a net entry.
    Basic { entry: usize },
    Commutator {
        v: Arc<CompileNode>,
        w: Arc<CompileNode>,
        prev: Arc<CompileNode>,
    },
}

#[derive(Debug)]
pub struct CompileNode {
    pub kind: NodeKind,
    pub level: usize,
    /// The unitary this node's sequence evaluates to, up to roundoff.
    pub unitary: Unitary,
}

impl CompileNode {
    pub fn dim(&self) -> usize {
        self.unitary.dim()
    }

    /// Unflattened gate count: `2 L(v) + 2 L(w) + L(prev)` over net lengths.
    pub fn raw_length(&self, net: &BasicNet) -> u128 {
        match &self.kind {
            NodeKind::Basic { entry } => net.entry(*entry).sequence.len() as u128,
            NodeKind::Commutator { v, w, prev } => {
                2 * v.raw_length(net) + 2 * w.raw_length(net) + prev.raw_length(net)
            }
        }
    }

    fn emit(&self, net: &BasicNet, inverse: bool, sink: &mut impl FnMut(u32)) {
        match &self.kind {
            NodeKind::Basic { entry } => {
                let seq = net.entry(*entry).sequence.gates();
                if inverse {
                    let set = net.set();
                    for &g in seq.iter().rev() {
                        sink(set.inverse_of(g as usize) as u32);
                    }
                } else {
                    seq.iter().for_each(|&g| sink(g));
                }
            }
            NodeKind::Commutator { v, w, prev } => {
                if inverse {
                    prev.emit(net, true, sink);
                    w.emit(net, false, sink);
                    v.emit(net, false, sink);
                    w.emit(net, true, sink);
                    v.emit(net, true, sink);
                } else {
                    v.emit(net, false, sink);
                    w.emit(net, false, sink);
                    v.emit(net, true, sink);
                    w.emit(net, true, sink);
                    prev.emit(net, false, sink);
                }
            }
        }
    }

    /// Every leaf with its multiplicity in the raw expansion.
    pub fn leaf_weights(&self) -> Vec<(usize, u128)> {
        let mut out = Vec::new();
        self.collect_leaves(1, &mut out);
        out
    }

    fn collect_leaves(&self, weight: u128, out: &mut Vec<(usize, u128)>) {
        match &self.kind {
            NodeKind::Basic { entry } => out.push((*entry, weight)),
            NodeKind::Commutator { v, w, prev } => {
                v.collect_leaves(2 * weight, out);
                w.collect_leaves(2 * weight, out);
                prev.collect_leaves(weight, out);
            }
        }
    }
}

/// Result of one compile call.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompileReport {
    pub depth: usize,
    pub predicted_eps: Option<f64>,
    pub measured_eps: f64,
    pub raw_length: u128,
    pub simplified_length: usize,
    /// Decomposition calls at each level, index 0 being the net lookups.
    pub evaluations: Vec<u64>,
    /// Seconds spent inside calls at each level, inclusive of children.
    pub level_wall_times: Vec<f64>,
    #[serde(skip)]
    pub sequence: GateSequence,
}

/// Predicted error and length at depth `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub eps: f64,
    pub length: f64,
    pub evaluations: f64,
}

/// `eps_n = (1/c^2) (eps0 c^2)^{(3/2)^n}`, `l_n = 5^n l0`, `t_n = 3^n`.
pub fn predict(c: f64, eps0: f64, l0: f64, n: usize) -> Prediction {
    let c2 = c * c;
    Prediction {
        eps: (eps0 * c2).powf(1.5f64.powi(n as i32)) / c2,
        length: 5f64.powi(n as i32) * l0,
        evaluations: 3f64.powi(n as i32),
    }
}

/// Closed-form depth `ceil(ln(ln(1/(eps c^2)) / ln(1/(eps0 c^2))) / ln(3/2))`.
pub fn depth_formula(eps: f64, eps0: f64, c: f64) -> Result<usize> {
    let c2 = c * c;
    if eps0 * c2 >= 1.0 {
        return Err(Error::OutsideTheoreticalRegime(eps0 * c2));
    }
    if eps >= eps0 {
        return Ok(0);
    }
    let ratio = (1.0 / (eps * c2)).ln() / (1.0 / (eps0 * c2)).ln();
    Ok((ratio.ln() / LN_3_2).ceil().max(0.0) as usize)
}

/// Smallest depth whose predicted error is at most `eps`, capped at `cap`.
pub fn choose_depth(eps: f64, eps0: f64, c: f64, cap: usize) -> Result<usize> {
    let n = depth_formula(eps, eps0, c)?;
    if n > cap {
        return Err(Error::Unreachable { target: eps, cap });
    }
    Ok(n)
}

#[derive(Default)]
struct Stats {
    evaluations: Vec<u64>,
    times: Vec<f64>,
}

/// Compiler over a shared, audited net.
#[derive(Clone, Debug)]
pub struct Compiler {
    net: Arc<BasicNet>,
    config: EngineConfig,
    eps0: f64,
}

impl Compiler {
    /// Fails unless the net is audited and its measured eps0 is within the
    /// mode's threshold.
    pub fn new(net: Arc<BasicNet>, config: EngineConfig) -> Result<Self> {
        if config.constants.dim != net.dim() {
            return Err(Error::DimensionMismatch(config.constants.dim, net.dim()));
        }
        let eps0 = net.measured_eps0().ok_or(Error::NotAudited)?;
        let threshold = config.eps0_threshold();
        if eps0 > threshold {
            return Err(Error::NetTooCoarse {
                measured: eps0,
                threshold,
                mode: config.mode.name(),
            });
        }
        Ok(Compiler { net, config, eps0 })
    }

    pub fn net(&self) -> &Arc<BasicNet> {
        &self.net
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    /// Builds the DAG for `u` at depth `n`.
    pub fn solovay_kitaev(&self, u: &Unitary, n: usize) -> Result<Arc<CompileNode>> {
        let mut stats = Stats::default();
        self.sk(u, n, &mut stats)
    }

    fn sk(&self, u: &Unitary, n: usize, stats: &mut Stats) -> Result<Arc<CompileNode>> {
        let start = Instant::now();
        if stats.evaluations.len() <= n {
            stats.evaluations.resize(n + 1, 0);
            stats.times.resize(n + 1, 0.0);
        }
        stats.evaluations[n] += 1;
        let node = if n == 0 {
            let (entry, _) = self.net.nearest(u)?;
            CompileNode {
                kind: NodeKind::Basic { entry },
                level: 0,
                unitary: self.net.entry(entry).unitary.clone(),
            }
        } else {
            let prev = self.sk(u, n - 1, stats)?;
            let delta = u.mul_adjoint(&prev.unitary);
            let pair = if u.dim() == 2 {
                gc_decompose_su2(&delta)
            } else {
                gc_approx_decompose(&delta)
            }
            .map_err(|e| Error::Decomposition {
                level: n,
                source: Box::new(e),
            })?;
            let v = self.sk(&pair.v, n - 1, stats)?;
            let w = self.sk(&pair.w, n - 1, stats)?;
            let unitary = &Unitary::group_commutator(&v.unitary, &w.unitary) * &prev.unitary;
            CompileNode {
                kind: NodeKind::Commutator { v, w, prev },
                level: n,
                unitary,
            }
        };
        stats.times[n] += start.elapsed().as_secs_f64();
        Ok(Arc::new(node))
    }

    /// Raw depth-first expansion of the DAG, no cancellation.
    pub fn flatten_raw(&self, node: &CompileNode) -> Result<GateSequence> {
        let raw = node.raw_length(&self.net);
        if raw > self.config.max_sequence {
            return Err(Error::SequenceTooLong(raw, self.config.max_sequence));
        }
        let mut out = Vec::with_capacity(raw as usize);
        node.emit(&self.net, false, &mut |g| out.push(g));
        Ok(GateSequence(out))
    }

    /// Expansion with adjacent `g, g^dagger` pairs cancelled as they are emitted.
    pub fn flatten(&self, node: &CompileNode) -> Result<GateSequence> {
        let raw = node.raw_length(&self.net);
        if raw > self.config.max_sequence {
            return Err(Error::SequenceTooLong(raw, self.config.max_sequence));
        }
        let set = self.net.set().clone();
        let mut out: Vec<u32> = Vec::new();
        node.emit(&self.net, false, &mut |g| match out.last() {
            Some(&top) if set.inverse_of(g as usize) == top as usize => {
                out.pop();
            }
            _ => out.push(g),
        });
        Ok(GateSequence(out))
    }

    /// Compiles `u` at depth `n` and measures the flattened result.
    pub fn compile(&self, u: &Unitary, n: usize) -> Result<CompileReport> {
        self.compile_with(u, n, None)
    }

    /// As [`Compiler::compile`], recording the prediction for the calibration constant `c`.
    pub fn compile_with(&self, u: &Unitary, n: usize, c: Option<f64>) -> Result<CompileReport> {
        if n > self.config.depth_cap {
            return Err(Error::InvalidArgument(format!(
                "depth {n} exceeds the cap {}",
                self.config.depth_cap
            )));
        }
        let mut stats = Stats::default();
        let node = self.sk(u, n, &mut stats)?;
        let raw_length = node.raw_length(&self.net);
        let sequence = self.flatten(&node)?;
        let achieved = self.net.set().evaluate(&sequence)?;
        let measured_eps = op_norm_distance(u, &achieved)?;
        let c = c.or(match self.config.mode {
            DepthMode::Strict => Some(self.config.constants.c_approx),
            DepthMode::Calibrated => None,
        });
        Ok(CompileReport {
            depth: n,
            predicted_eps: c.map(|c| predict(c, self.eps0, self.net.l0() as f64, n).eps),
            measured_eps,
            raw_length,
            simplified_length: sequence.len(),
            evaluations: stats.evaluations,
            level_wall_times: stats.times,
            sequence,
        })
    }

    /// Fits `c` in `eps_n = c eps_{n-1}^{3/2}` as a geometric mean over
    /// `samples` Haar targets and levels `1..=depth` that stay above `1e-10`.
    pub fn calibrate(&self, samples: usize, depth: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        let mut count = 0usize;
        for _ in 0..samples {
            let u = haar_su(self.net.dim(), &mut rng);
            let mut prev = op_norm_distance(&u, &self.sk(&u, 0, &mut Stats::default())?.unitary)?;
            for n in 1..=depth {
                let eps = op_norm_distance(&u, &self.sk(&u, n, &mut Stats::default())?.unitary)?;
                if eps > 1e-10 && prev > 1e-10 {
                    sum += eps.ln() - 1.5 * prev.ln();
                    count += 1;
                }
                prev = eps;
            }
        }
        if count == 0 {
            return Err(Error::InvalidArgument("calibration produced no usable levels".into()));
        }
        Ok((sum / count as f64).exp())
    }

    /// The constant used for depth selection: `c_approx` in strict mode,
    /// otherwise the supplied calibration.
    pub fn depth_constant(&self, calibrated: Option<f64>) -> Result<f64> {
        match self.config.mode {
            DepthMode::Strict => Ok(self.config.constants.c_approx),
            DepthMode::Calibrated => calibrated
                .ok_or_else(|| Error::InvalidArgument("calibrated mode needs a fitted constant".into())),
        }
    }

    /// Depth predicted to reach `eps` with constant `c`.
    pub fn choose_depth(&self, eps: f64, c: f64) -> Result<usize> {
        choose_depth(eps, self.eps0, c, self.config.depth_cap)
    }

    /// Upper bound on the raw length at depth `n`: `5^n` times the longest net entry.
    pub fn raw_length_bound(&self, n: usize) -> u128 {
        let longest = self.net.entries().iter().map(|e| e.sequence.len()).max().unwrap_or(0) as u128;
        5u128.saturating_pow(n as u32).saturating_mul(longest)
    }
}
