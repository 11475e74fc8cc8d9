//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
type C = nalgebra::Complex<f64>;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use skc::bench::linear_fit;
use skc::commutator::{approx_comm_bound, check_approx_comm_bound, gc_decompose_su2, lie_solution};
use skc::engine::NodeKind;
use skc::linalg::{matrix_exp, quaternion_embed, Tolerances};
use skc::net::NetConfig;
use skc::{BasicNet, Compiler, DepthMode, EngineConfig, GateSequence, Hermitian, InstructionSet, Unitary};

type M = DMatrix<C>;

// ---------------------------------------------------------------- oracles

fn frobenius(a: &M) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value by power iteration on `A^dagger A`.
fn op_norm(a: &M) -> f64 {
    let ata = a.adjoint() * a;
    let n = a.ncols();
    let mut best: f64 = 0.0;
    for start in 0..n {
        let mut x = nalgebra::DVector::from_fn(n, |i, _| C::new(1.0 + (i == start) as u8 as f64, 0.1 * i as f64));
        for _ in 0..200 {
            let y = &ata * &x;
            let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            x = y / C::new(norm, 0.0);
        }
        let rq = (x.adjoint() * &ata * &x)[(0, 0)].re;
        best = best.max(rq.max(0.0).sqrt());
    }
    best
}

/// Exact operator distance between two SU(2) matrices: `U - V` has equal
/// singular values.
fn su2_dist(a: &M, b: &M) -> f64 {
    frobenius(&(a - b)) / 2f64.sqrt()
}

/// `exp(A)` by scaling and squaring a Taylor series.
fn expm(a: &M) -> M {
    let n = a.nrows();
    let norm = frobenius(a);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a / C::new(2f64.powi(s), 0.0);
    let mut term = M::identity(n, n);
    let mut sum = M::identity(n, n);
    for k in 1..30 {
        term = &term * &b / C::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn i_times(a: &M) -> M {
    a * C::new(0.0, 1.0)
}

/// Random traceless Hermitian with spectral norm `norm`.
fn hermitian(d: usize, norm: f64, traceless: bool, r: &mut ChaCha8Rng) -> M {
    let g = M::from_fn(d, d, |_, _| C::new(r.sample(StandardNormal), r.sample(StandardNormal)));
    let mut h = (&g + g.adjoint()) * C::new(0.5, 0.0);
    if traceless {
        let tr = h.trace() / C::new(d as f64, 0.0);
        for i in 0..d {
            h[(i, i)] -= tr;
        }
    }
    let cur = op_norm(&h);
    h * C::new(norm / cur, 0.0)
}

/// Uniform SU(2) element from a normalized Gaussian quaternion.
fn su2_from_quaternion(q: [f64; 4]) -> M {
    let [a, b, c, d] = q;
    M::from_row_slice(2, 2, &[C::new(a, -d), C::new(-c, -b), C::new(c, -b), C::new(a, d)])
}

fn haar_su2(r: &mut ChaCha8Rng) -> M {
    let q: [f64; 4] = std::array::from_fn(|_| r.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    su2_from_quaternion(q.map(|x| x / n))
}

fn unitary(m: M) -> Unitary {
    Unitary::new(m).expect("unitary")
}

fn evaluate(set: &InstructionSet, seq: &GateSequence) -> M {
    let d = set.dim();
    seq.gates()
        .iter()
        .fold(M::identity(d, d), |acc, &g| acc * set.gate(g as usize).unwrap().unitary.matrix())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- fixtures

struct CliffordNet {
    net: Arc<BasicNet>,
    build_time: Duration,
    eps0_mean: f64,
}

fn clifford_net() -> &'static CliffordNet {
    static NET: OnceLock<CliffordNet> = OnceLock::new();
    NET.get_or_init(|| {
        let set = Arc::new(InstructionSet::clifford_t());
        let t = Instant::now();
        let mut net = BasicNet::build(set, 16, &NetConfig::default()).unwrap();
        let build_time = t.elapsed();
        let (_, eps0_mean) = net.audit(1000, 1).unwrap();
        CliffordNet {
            net: Arc::new(net),
            build_time,
            eps0_mean,
        }
    })
}

fn clifford_compiler() -> Compiler {
    Compiler::new(clifford_net().net.clone(), EngineConfig::for_dim(2)).unwrap()
}

// ---------------------------------------------------------------- criteria

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn c1_base_case() -> Outcome {
    let cn = clifford_net();
    let eps0 = cn.net.measured_eps0().unwrap();
    let ok = (0.08..=0.18).contains(&eps0) && cn.build_time < Duration::from_secs(120);
    outcome(
        ok,
        format!(
            "l0=16 entries={} eps0={eps0:.4} (mean {:.4}) band [0.08, 0.18], build {:.2}s",
            cn.net.len(),
            cn.eps0_mean,
            cn.build_time.as_secs_f64()
        ),
    )
}

fn c2_convergence() -> Outcome {
    let compiler = clifford_compiler();
    let set = compiler.net().set().clone();
    let mut r = rng(2);
    let n_max = 5;
    let (mut orders, mut pairs, mut decreasing) = (Vec::new(), 0, 0);
    for _ in 0..20 {
        let u = haar_su2(&mut r);
        let target = unitary(u.clone());
        let eps: Vec<f64> = (0..=n_max)
            .map(|n| {
                let rep = compiler.compile(&target, n).unwrap();
                su2_dist(&u, &evaluate(&set, &rep.sequence))
            })
            .collect();
        for n in 1..=n_max {
            pairs += 1;
            if eps[n] < eps[n - 1] {
                decreasing += 1;
            }
            if eps[n] > 1e-10 {
                orders.push(eps[n].ln() / eps[n - 1].ln());
            }
        }
    }
    let mean = orders.iter().sum::<f64>() / orders.len() as f64;
    let frac = decreasing as f64 / pairs as f64;
    outcome(
        mean >= 1.3 && frac >= 0.95,
        format!("mean order {mean:.3} over {} levels (>= 1.3), strictly decreasing {decreasing}/{pairs} (>= 95%)", orders.len()),
    )
}

fn c3_length() -> Outcome {
    let compiler = clifford_compiler();
    let net = compiler.net();
    let mut r = rng(3);
    let mut exact = true;
    let mut checked = 0;
    for _ in 0..5 {
        let u = unitary(haar_su2(&mut r));
        for n in 0..=3u32 {
            let node = compiler.solovay_kitaev(&u, n as usize).unwrap();
            let raw = compiler.flatten_raw(&node).unwrap();
            let weights = node.leaf_weights();
            let total_weight: u128 = weights.iter().map(|(_, w)| w).sum();
            let expanded: u128 = weights
                .iter()
                .map(|&(e, w)| w * net.entry(e).sequence.len() as u128)
                .sum();
            let leaf_count = 3u128.pow(n);
            exact &= total_weight == 5u128.pow(n)
                && weights.len() as u128 == leaf_count
                && expanded == raw.len() as u128
                && node.raw_length(net) == raw.len() as u128
                && matches!(
                    (&node.kind, n),
                    (NodeKind::Basic { .. }, 0) | (NodeKind::Commutator { .. }, 1..)
                );
            let product = evaluate(net.set(), &raw);
            exact &= su2_dist(&product, node.unitary.matrix()) < 1e-9;
            checked += 1;
        }
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for _ in 0..10 {
        let u = unitary(haar_su2(&mut r));
        for n in 0..=6 {
            let rep = compiler.compile(&u, n).unwrap();
            if rep.measured_eps > 1e-10 {
                xs.push((1.0 / rep.measured_eps).ln().ln());
                ys.push((rep.raw_length as f64).ln());
            }
        }
    }
    let slope = linear_fit(&xs, &ys).0;
    outcome(
        exact && (3.0..=5.0).contains(&slope),
        format!("expansion exact on {checked} DAGs (n <= 3): {exact}; raw length exponent {slope:.3} in [3, 5] ({} points)", xs.len()),
    )
}

fn c4_time() -> Outcome {
    let compiler = clifford_compiler();
    let mut r = rng(4);
    let u = unitary(haar_su2(&mut r));
    let mut ok = true;
    let mut lookups = Vec::new();
    for n in 0..=8u32 {
        let rep = compiler.compile(&u, n as usize).unwrap();
        for (k, &count) in rep.evaluations.iter().enumerate() {
            ok &= count <= 3u64.pow(n - k as u32);
        }
        ok &= rep.evaluations.len() == n as usize + 1;
        lookups.push(rep.evaluations[0]);
    }
    outcome(ok, format!("level-0 evaluations for n = 0..8: {lookups:?} (each <= 3^n)"))
}

fn c5_su2_commutator() -> Outcome {
    let mut r = rng(5);
    let (mut residual, mut balance): (f64, f64) = (0.0, 0.0);
    let id = M::identity(2, 2);
    for _ in 0..1000 {
        let dist: f64 = r.random_range(1e-8..0.1);
        let theta = 2.0 * (dist / 2.0).asin();
        let axis: [f64; 3] = std::array::from_fn(|_| r.sample(StandardNormal));
        let an = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (s, c) = (theta / 2.0).sin_cos();
        let u = su2_from_quaternion([c, s * axis[0] / an, s * axis[1] / an, s * axis[2] / an]);
        let p = gc_decompose_su2(&unitary(u.clone())).unwrap();
        let (v, w) = (p.v.matrix(), p.w.matrix());
        let rebuilt = v * w * v.adjoint() * w.adjoint();
        residual = residual.max(frobenius(&(rebuilt - &u)));
        let du = su2_dist(&u, &id);
        balance = balance.max(su2_dist(v, &id).max(su2_dist(w, &id)) / du.sqrt());
    }
    outcome(
        residual <= 1e-10 && balance <= 0.81,
        format!("1000 targets: max residual {residual:.2e} (<= 1e-10), max balance {balance:.4} (<= 0.81)"),
    )
}

fn c6_approx_comm() -> Outcome {
    let mut r = rng(6);
    let (mut admissible, mut violations, mut worst) = (0, 0, 0.0f64);
    while admissible < 10_000 {
        let d = r.random_range(2..=3);
        let big = 10f64.powf(r.random_range(-4.0..-0.5));
        let small = 10f64.powf(r.random_range(-3.0..-0.3));
        let near = |limit: f64, r: &mut ChaCha8Rng| {
            let norm = 2.0 * (limit * r.random_range(0.0..0.999) / 2.0).asin();
            expm(&i_times(&hermitian(d, norm, true, r)))
        };
        let v = near(small, &mut r);
        let w = near(small, &mut r);
        let vt = &v * near(big, &mut r);
        let wt = &w * near(big, &mut r);
        let id = M::identity(d, d);
        let admissible_here = op_norm(&(&v - &vt)) < big
            && op_norm(&(&w - &wt)) < big
            && op_norm(&(&v - &id)) < small
            && op_norm(&(&w - &id)) < small;
        if !admissible_here {
            continue;
        }
        let (uv, uw, uvt, uwt) = (unitary(v.clone()), unitary(w.clone()), unitary(vt.clone()), unitary(wt.clone()));
        let lib = match check_approx_comm_bound(&uv, &uw, &uvt, &uwt, big, small) {
            Ok(b) => b,
            Err(_) => continue,
        };
        admissible += 1;
        let lhs = op_norm(&(&v * &w * v.adjoint() * w.adjoint() - &vt * &wt * vt.adjoint() * wt.adjoint()));
        let bound = 8.0 * big * small + 4.0 * big * small * small + 8.0 * big * big + 4.0 * big.powi(3) + big.powi(4);
        if lhs >= bound || !lib || (approx_comm_bound(big, small) - bound).abs() > 1e-15 * bound {
            violations += 1;
        }
        worst = worst.max(lhs / bound);
    }
    outcome(
        violations == 0,
        format!("{admissible} admissible instances, {violations} violations, worst lhs/bound {worst:.4}"),
    )
}

fn c7_lie_solution() -> Outcome {
    let mut r = rng(7);
    let (mut residual, mut ratio): (f64, f64) = (0.0, 0.0);
    for d in 2..=4usize {
        let limit = 1.05 * (d as f64).powf(0.25) * ((d as f64 - 1.0) / 2.0).sqrt();
        for _ in 0..1000 {
            let hn = 10f64.powf(r.random_range(-4.0..0.5));
            let h = hermitian(d, hn, true, &mut r);
            let (f, g) = lie_solution(&Hermitian::new(h.clone()).unwrap()).unwrap();
            let (f, g) = (f.matrix(), g.matrix());
            let comm = f * g - g * f;
            residual = residual.max(frobenius(&(comm - i_times(&h))) / hn.max(1.0));
            ratio = ratio.max(op_norm(f).max(op_norm(g)) / (limit * hn.sqrt()));
        }
    }
    outcome(
        residual <= 1e-10 && ratio <= 1.0,
        format!("d = 2..4, 3000 H: max residual {residual:.2e} (<= 1e-10), max norm / bound {ratio:.4} (<= 1)"),
    )
}

fn c8_lie_approx() -> Outcome {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for delta in [0.01, 0.05, 0.1, 0.2] {
        let mut sum = 0.0;
        for _ in 0..500 {
            let d = r.random_range(2..=4);
            let f = hermitian(d, delta * r.random_range(0.5..0.999), false, &mut r);
            let g = hermitian(d, delta * r.random_range(0.5..0.999), false, &mut r);
            let (ef, eg) = (
                matrix_exp(&Hermitian::new(f.clone()).unwrap()),
                matrix_exp(&Hermitian::new(g.clone()).unwrap()),
            );
            let lhs = Unitary::group_commutator(&ef, &eg);
            let rhs = expm(&-(&f * &g - &g * &f));
            let dist = op_norm(&(lhs.matrix() - rhs));
            worst = worst.max(dist / (4.0 * delta.powi(3)));
            sum += dist;
        }
        xs.push(f64::ln(delta));
        ys.push((sum / 500.0).ln());
    }
    let slope = linear_fit(&xs, &ys).0;
    outcome(
        worst <= 1.1 && (2.8..=3.2).contains(&slope),
        format!("max dist / (4 delta^3) {worst:.4} (<= 1.1), log-log slope {slope:.3} in [2.8, 3.2]"),
    )
}

fn data_path(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn c9_qudit() -> Outcome {
    let set = Arc::new(InstructionSet::load(data_path("data/gatesets/qutrit_ab.json"), &Tolerances::default()).unwrap());
    let t = Instant::now();
    let mut net = BasicNet::build(set, 11, &NetConfig::default()).unwrap();
    let build = t.elapsed().as_secs_f64();
    let (eps0, _) = net.audit(1000, 9).unwrap();
    let mut config = EngineConfig::for_dim(3).with_mode(DepthMode::Calibrated);
    config.calibrated_threshold = 1.0;
    let compiler = Compiler::new(Arc::new(net), config).unwrap();
    let series = |u: &Unitary| -> skc::Result<Vec<f64>> {
        (0..=2)
            .map(|n| {
                let rep = compiler.compile(u, n)?;
                Ok(op_norm(&(u.matrix() - evaluate(compiler.net().set(), &rep.sequence))))
            })
            .collect()
    };
    let decreasing = |e: &skc::Result<Vec<f64>>| matches!(e, Ok(e) if e[0] > e[1] && e[1] > e[2]);
    let targets = skc::bench::haar_targets(3, 5, 9);
    let runs: Vec<skc::Result<Vec<f64>>> = targets.iter().map(series).collect();
    let all = runs.iter().all(decreasing);
    let shown: Vec<String> = runs
        .iter()
        .map(|e| match e {
            Ok(e) => format!("[{:.3e} {:.3e} {:.3e}]", e[0], e[1], e[2]),
            Err(err) => format!("[{err}]"),
        })
        .collect();
    let wide: Vec<skc::Result<Vec<f64>>> = skc::bench::haar_targets(3, 200, 9009).iter().map(series).collect();
    let wide_ok = wide.iter().filter(|e| decreasing(e)).count();
    let wide_err = wide.iter().filter(|e| e.is_err()).count();
    outcome(
        all,
        format!(
            "SU(3), {} entries (l0=11, {build:.1}s), eps0 {eps0:.3}; 5 targets: {}; wider sample strictly decreasing {wide_ok}/200 ({wide_err} stopped by a level-0 error >= 0.5)",
            compiler.net().len(),
            shown.join(" ")
        ),
    )
}

fn skc(args: &[&str]) -> (bool, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_skc")).args(args).output().unwrap();
    (out.status.success(), out.stdout)
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let (na, nb) = (p("a.json"), p("b.json"));
    let build = |out: &str| {
        skc(&["net", "build", "--gateset", "clifford-t", "--l0", "10", "--audit-samples", "200", "--seed", "10", "--out", out])
    };
    let mut mismatches = Vec::new();
    let mut failures = Vec::new();
    let (oka, sa) = build(&na);
    let (okb, sb) = build(&nb);
    if !(oka && okb) {
        failures.push("net build");
    }
    if sa != sb || std::fs::read(&na).unwrap_or_default() != std::fs::read(&nb).unwrap_or_default() {
        mismatches.push("net build");
    }
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("compile", vec!["compile", "--net", &na, "--threshold", "0.5", "--target", "rz(pi/128)", "--depth", "3"]),
        ("compile --json", vec!["compile", "--net", &na, "--threshold", "0.5", "--target", "T", "--depth", "2", "--json"]),
        ("compile --eps", vec!["compile", "--net", &na, "--threshold", "0.5", "--target", "rx(1)", "--eps", "1e-3", "--seed", "10"]),
        ("bench", vec!["bench", "--net", &na, "--threshold", "0.5", "--targets", "3", "--n-max", "2", "--seed", "10"]),
        ("bench --json", vec!["bench", "--net", &na, "--threshold", "0.5", "--targets", "3", "--n-max", "2", "--seed", "10", "--json"]),
        ("verify", vec!["verify", "--seed", "10", "--samples", "100", "--comm-samples", "500", "--json"]),
        ("constants", vec!["constants", "--dim", "3", "--json"]),
    ];
    for (name, args) in &commands {
        let (ok1, o1) = skc(args);
        let (ok2, o2) = skc(args);
        if !(ok1 && ok2) {
            failures.push(*name);
        }
        if o1 != o2 || o1.is_empty() {
            mismatches.push(*name);
        }
    }

    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (a, b) = (haar_su2(&mut r), haar_su2(&mut r));
        let qa = quaternion_embed(&unitary(a.clone())).unwrap();
        let qb = quaternion_embed(&unitary(b.clone())).unwrap();
        let euclid = qa.iter().zip(&qb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        worst = worst.max((euclid - su2_dist(&a, &b)).abs());
    }
    outcome(
        mismatches.is_empty() && failures.is_empty() && worst <= 1e-12,
        format!(
            "{} commands run twice, differing: {mismatches:?}, failing: {failures:?}; isometry max error {worst:.2e} (<= 1e-12)",
            commands.len() + 1
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("base-case calibration", c1_base_case),
        ("convergence order", c2_convergence),
        ("length accounting", c3_length),
        ("time accounting", c4_time),
        ("SU(2) commutator exactness", c5_su2_commutator),
        ("approx-comm bound", c6_approx_comm),
        ("lie-solution", c7_lie_solution),
        ("lie-approx", c8_lie_approx),
        ("qudit end-to-end", c9_qudit),
        ("determinism and isometry", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("criterion_{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| id.contains(p.as_str())) {
            continue;
        }
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.passed {
            failed += 1;
        }
        println!(
            "{} {id} {name}: {} ({:.1}s)",
            if result.passed { "PASS" } else { "FAIL" },
            result.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
