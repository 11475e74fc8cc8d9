//! Randomized property suites behind `skc verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bench::linear_fit;
use crate::commutator::{
    approx_comm_bound, check_approx_comm_bound, commutator_angle_sine, gc_approx_decompose, gc_decompose_su2,
    lie_solution, solve_phi, SkConstants,
};
use crate::error::Result;
use crate::linalg::{
    c, commutator, distance_to_identity, haar_su, matrix_exp, op_norm_distance, quaternion_embed, random_hermitian,
    spectral_norm, Hermitian, Unitary,
};

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Trials per suite.
    pub samples: usize,
    /// Trials for the approx-comm suites.
    pub comm_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            samples: 1000,
            comm_samples: 10_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub trials: usize,
    /// Largest observed value of the checked quantity.
    pub worst: f64,
    /// The limit it is compared against.
    pub limit: f64,
}

impl CheckResult {
    fn at_most(name: &'static str, trials: usize, worst: f64, limit: f64) -> Self {
        CheckResult {
            name,
            passed: worst <= limit,
            trials,
            worst,
            limit,
        }
    }
}

/// Unitary at operator distance `eps` from I.
pub fn near_identity<R: Rng + ?Sized>(d: usize, eps: f64, rng: &mut R) -> Unitary {
    matrix_exp(&random_hermitian(d, 2.0 * (eps / 2.0).asin(), true, rng))
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn quaternion_isometry(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut r = rng(cfg.seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.samples {
        let (a, b) = (haar_su(2, &mut r), haar_su(2, &mut r));
        let (qa, qb) = (quaternion_embed(&a)?, quaternion_embed(&b)?);
        let euclid = qa.iter().zip(&qb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        worst = worst.max((euclid - op_norm_distance(&a, &b)?).abs());
    }
    Ok(CheckResult::at_most("quaternion_isometry", cfg.samples, worst, 1e-12))
}

pub fn solve_phi_residual(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut r = rng(cfg.seed, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.samples {
        let theta = r.random_range(0.0..std::f64::consts::PI);
        let phi = solve_phi(theta)?;
        worst = worst.max((commutator_angle_sine(phi) - (theta / 2.0).sin()).abs());
    }
    Ok(CheckResult::at_most("solve_phi_residual", cfg.samples, worst, 1e-13))
}

/// Reconstruction residual and balance ratio `d(I,V) / sqrt(d(I,U))` for `d(I,U) < 0.1`.
pub fn su2_commutator(cfg: &VerifyConfig) -> Result<[CheckResult; 2]> {
    let mut r = rng(cfg.seed, 3);
    let (mut residual, mut balance): (f64, f64) = (0.0, 0.0);
    for _ in 0..cfg.samples {
        let u = near_identity(2, r.random_range(1e-9..0.1), &mut r);
        let p = gc_decompose_su2(&u)?;
        residual = residual.max(p.recompute_residual(&u));
        let eps = distance_to_identity(&u);
        balance = balance.max(distance_to_identity(&p.v).max(distance_to_identity(&p.w)) / eps.sqrt());
    }
    let k = SkConstants::for_dim(2);
    Ok([
        CheckResult::at_most("su2_commutator_residual", cfg.samples, residual, 1e-10),
        CheckResult::at_most("su2_commutator_balance", cfg.samples, balance, k.c_gc + k.su2_balance_margin),
    ])
}

struct CommInstance {
    d: usize,
    big: f64,
    small: f64,
    a: Hermitian,
    b: Hermitian,
    ka: Hermitian,
    kb: Hermitian,
}

impl CommInstance {
    fn random<R: Rng + ?Sized>(r: &mut R) -> Self {
        let d = r.random_range(2..=3);
        let big = 10f64.powf(r.random_range(-4.0..-0.5));
        let small = 10f64.powf(r.random_range(-3.0..-0.3));
        let h = |limit: f64, r: &mut R| {
            let norm = 2.0 * (limit * r.random_range(0.0..0.999) / 2.0).asin();
            random_hermitian(d, norm, true, r)
        };
        let (a, b) = (h(small, r), h(small, r));
        let (ka, kb) = (h(big, r), h(big, r));
        CommInstance {
            d,
            big,
            small,
            a,
            b,
            ka,
            kb,
        }
    }

    /// `(lhs / bound)`, or `None` when the instance is inadmissible.
    fn ratio(&self) -> Option<f64> {
        let v = matrix_exp(&self.a);
        let w = matrix_exp(&self.b);
        let vt = &v * &matrix_exp(&self.ka);
        let wt = &w * &matrix_exp(&self.kb);
        check_approx_comm_bound(&v, &w, &vt, &wt, self.big, self.small).ok()?;
        let lhs = op_norm_distance(
            &Unitary::group_commutator(&v, &w),
            &Unitary::group_commutator(&vt, &wt),
        )
        .ok()?;
        Some(lhs / approx_comm_bound(self.big, self.small))
    }

    fn perturbed<R: Rng + ?Sized>(&self, step: f64, r: &mut R) -> Self {
        let d = self.d;
        let nudge = |h: &Hermitian, r: &mut R| {
            let scale = step * h.norm().max(1e-12);
            Hermitian::symmetrized(h.matrix() + random_hermitian(d, scale, true, r).matrix())
        };
        CommInstance {
            d,
            big: self.big,
            small: self.small,
            a: nudge(&self.a, r),
            b: nudge(&self.b, r),
            ka: nudge(&self.ka, r),
            kb: nudge(&self.kb, r),
        }
    }
}

/// Largest `lhs / bound` over random admissible instances; at most 1 means no violation.
pub fn approx_comm_random(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut r = rng(cfg.seed, 4);
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    while trials < cfg.comm_samples {
        if let Some(q) = CommInstance::random(&mut r).ratio() {
            worst = worst.max(q);
            trials += 1;
        }
    }
    Ok(CommInstance::result("approx_comm_random", trials, worst))
}

/// Gradient-free hill climbing on `lhs / bound` from random admissible starts.
pub fn approx_comm_adversarial(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut r = rng(cfg.seed, 5);
    let restarts = (cfg.comm_samples / 100).max(1);
    let steps = cfg.comm_samples / restarts;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for _ in 0..restarts {
        let mut cur = CommInstance::random(&mut r);
        let mut best = match cur.ratio() {
            Some(q) => q,
            None => continue,
        };
        let mut step = 0.3;
        for _ in 0..steps {
            trials += 1;
            let cand = cur.perturbed(step, &mut r);
            match cand.ratio() {
                Some(q) if q > best => {
                    best = q;
                    cur = cand;
                }
                _ => step = (step * 0.9).max(1e-3),
            }
        }
        worst = worst.max(best);
    }
    Ok(CommInstance::result("approx_comm_adversarial", trials, worst))
}

impl CommInstance {
    fn result(name: &'static str, trials: usize, worst: f64) -> CheckResult {
        CheckResult {
            name,
            passed: worst < 1.0,
            trials,
            worst,
            limit: 1.0,
        }
    }
}

/// `||[F,G] - iH|| / max(1, ||H||)` and `max(||F||,||G||) / (c'' sqrt||H||)` over `d = 2, 3, 4`.
pub fn lie_solution_bounds(cfg: &VerifyConfig) -> Result<[CheckResult; 2]> {
    let mut r = rng(cfg.seed, 6);
    let (mut residual, mut norm_ratio): (f64, f64) = (0.0, 0.0);
    for d in 2..=4 {
        let k = SkConstants::for_dim(d);
        for _ in 0..cfg.samples {
            let hn = 10f64.powf(r.random_range(-4.0..0.5));
            let h = random_hermitian(d, hn, true, &mut r);
            let (f, g) = lie_solution(&h)?;
            let resid = spectral_norm(&(commutator(f.matrix(), g.matrix()) - h.matrix() * c(0.0, 1.0)));
            residual = residual.max(resid / h.norm().max(1.0));
            norm_ratio = norm_ratio.max(f.norm().max(g.norm()) / (k.c_gc_dprime * h.norm().sqrt()));
        }
    }
    Ok([
        CheckResult::at_most("lie_solution_residual", 3 * cfg.samples, residual, 1e-10),
        CheckResult::at_most("lie_solution_norm", 3 * cfg.samples, norm_ratio, 1.05),
    ])
}

pub const LIE_APPROX_DELTAS: [f64; 4] = [0.01, 0.05, 0.1, 0.2];

/// `d(e^{iF} e^{iG} e^{-iF} e^{-iG}, e^{-[F,G]}) / (c1 delta^3)` and the
/// log-log slope of the mean distance against `delta`.
pub fn lie_approx(cfg: &VerifyConfig) -> Result<[CheckResult; 2]> {
    let mut r = rng(cfg.seed, 7);
    let c1 = SkConstants::for_dim(2).c1;
    let mut worst: f64 = 0.0;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for delta in LIE_APPROX_DELTAS {
        let mut sum = 0.0;
        for _ in 0..cfg.samples {
            let d = r.random_range(2..=4);
            let f = random_hermitian(d, delta * r.random_range(0.5..0.999), false, &mut r);
            let g = random_hermitian(d, delta * r.random_range(0.5..0.999), false, &mut r);
            let lhs = Unitary::group_commutator(&matrix_exp(&f), &matrix_exp(&g));
            let rhs = matrix_exp(&Hermitian::symmetrized(commutator(f.matrix(), g.matrix()) * c(0.0, 1.0)));
            let dist = op_norm_distance(&lhs, &rhs)?;
            worst = worst.max(dist / (c1 * delta.powi(3)));
            sum += dist;
        }
        xs.push(delta.ln());
        ys.push((sum / cfg.samples as f64).ln());
    }
    let slope = linear_fit(&xs, &ys).0;
    Ok([
        CheckResult::at_most("lie_approx_bound", LIE_APPROX_DELTAS.len() * cfg.samples, worst, 1.1),
        CheckResult {
            name: "lie_approx_slope",
            passed: (2.8..=3.2).contains(&slope),
            trials: LIE_APPROX_DELTAS.len(),
            worst: slope,
            limit: 3.0,
        },
    ])
}

/// Log-log slope of the SU(3) approximate-commutator residual against `eps`.
pub fn approx_commutator_order(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut r = rng(cfg.seed, 8);
    let n = cfg.samples.clamp(10, 200);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for _ in 0..n {
        let eps = 10f64.powf(r.random_range(-4.0..-2.0));
        let u = near_identity(3, eps, &mut r);
        let p = gc_approx_decompose(&u)?;
        xs.push(eps.ln());
        ys.push(p.residual.ln());
    }
    let slope = linear_fit(&xs, &ys).0;
    Ok(CheckResult {
        name: "approx_commutator_order",
        passed: slope >= 1.45,
        trials: n,
        worst: slope,
        limit: 1.45,
    })
}

pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = vec![quaternion_isometry(cfg)?, solve_phi_residual(cfg)?];
    out.extend(su2_commutator(cfg)?);
    out.push(approx_comm_random(cfg)?);
    out.push(approx_comm_adversarial(cfg)?);
    out.extend(lie_solution_bounds(cfg)?);
    out.extend(lie_approx(cfg)?);
    out.push(approx_commutator_order(cfg)?);
    Ok(out)
}
