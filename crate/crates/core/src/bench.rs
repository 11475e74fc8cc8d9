//! Scaling benchmark: compile Haar-random targets at every depth up to
//! `n_max` and fit the length and convergence exponents.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{predict, Compiler};
use crate::error::Result;
use crate::gates::GateSequence;
use crate::linalg::{haar_su, Unitary};

/// Levels at or below this error are treated as hitting the roundoff floor.
pub const EPS_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchRecord {
    pub target_id: usize,
    pub n: usize,
    pub predicted_eps: Option<f64>,
    pub measured_eps: f64,
    pub raw_length: u128,
    pub simplified_length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level_wall_times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<GateSequence>,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub targets: usize,
    pub n_max: usize,
    pub seed: u64,
    /// Keep wall times in the records (breaks byte-identical output).
    pub timings: bool,
    pub keep_sequences: bool,
    /// Constant used for `predicted_eps`; `None` leaves it empty.
    pub c: Option<f64>,
}

/// Fitted exponents over a set of records.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BenchSummary {
    /// Slope of `ln(simplified_length)` against `ln ln(1/eps)`.
    pub length_exponent: Option<f64>,
    /// Slope of `ln(raw_length)` against `ln ln(1/eps)`.
    pub raw_length_exponent: Option<f64>,
    /// Mean over targets of `ln eps_n / ln eps_{n-1}`, per level `n >= 1`.
    pub order_by_level: Vec<Option<f64>>,
    pub mean_order: Option<f64>,
    /// Fraction of consecutive level pairs with strictly decreasing error.
    pub decreasing_fraction: Option<f64>,
    /// Geometric-mean fit of `c` in `eps_n = c eps_{n-1}^{3/2}`.
    pub fitted_c: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchOutput {
    pub records: Vec<BenchRecord>,
    pub summary: BenchSummary,
}

/// Least-squares `(slope, intercept)` of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Seeded Haar targets, drawn in order.
pub fn haar_targets(dim: usize, count: usize, seed: u64) -> Vec<Unitary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| haar_su(dim, &mut rng)).collect()
}

pub fn run(compiler: &Compiler, config: &BenchConfig) -> Result<BenchOutput> {
    let targets = haar_targets(compiler.net().dim(), config.targets, config.seed);
    let per_target = targets
        .par_iter()
        .enumerate()
        .map(|(id, u)| {
            (0..=config.n_max)
                .map(|n| {
                    let r = compiler.compile(u, n)?;
                    let predicted_eps = config
                        .c
                        .map(|c| predict(c, compiler.eps0(), compiler.net().l0() as f64, n).eps);
                    Ok(BenchRecord {
                        target_id: id,
                        n,
                        predicted_eps,
                        measured_eps: r.measured_eps,
                        raw_length: r.raw_length,
                        simplified_length: r.simplified_length,
                        level_wall_times: config.timings.then_some(r.level_wall_times),
                        sequence: config.keep_sequences.then_some(r.sequence),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<BenchRecord> = per_target.into_iter().flatten().collect();
    let summary = summarize(&records);
    Ok(BenchOutput { records, summary })
}

pub fn summarize(records: &[BenchRecord]) -> BenchSummary {
    let mut summary = BenchSummary::default();
    let usable: Vec<&BenchRecord> = records
        .iter()
        .filter(|r| r.measured_eps > EPS_FLOOR && r.measured_eps < 1.0)
        .collect();
    let xs: Vec<f64> = usable.iter().map(|r| (1.0 / r.measured_eps).ln().ln()).collect();
    let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if usable.len() >= 2 && spread > 0.0 {
        let ys: Vec<f64> = usable.iter().map(|r| (r.simplified_length.max(1) as f64).ln()).collect();
        summary.length_exponent = Some(linear_fit(&xs, &ys).0);
        let ys: Vec<f64> = usable.iter().map(|r| (r.raw_length.max(1) as f64).ln()).collect();
        summary.raw_length_exponent = Some(linear_fit(&xs, &ys).0);
    }

    let n_max = records.iter().map(|r| r.n).max().unwrap_or(0);
    let mut by_target: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for r in records {
        let v = by_target.entry(r.target_id).or_default();
        if v.len() <= r.n {
            v.resize(r.n + 1, f64::NAN);
        }
        v[r.n] = r.measured_eps;
    }
    let mut all_orders = Vec::new();
    let mut log_c = Vec::new();
    let (mut pairs, mut decreasing) = (0usize, 0usize);
    for n in 1..=n_max {
        let mut orders = Vec::new();
        for eps in by_target.values() {
            let (prev, cur) = (eps[n - 1], eps[n]);
            if prev.is_nan() || cur.is_nan() {
                continue;
            }
            pairs += 1;
            if cur < prev {
                decreasing += 1;
            }
            if cur > EPS_FLOOR && prev > EPS_FLOOR && prev < 1.0 {
                orders.push(cur.ln() / prev.ln());
                log_c.push(cur.ln() - 1.5 * prev.ln());
            }
        }
        all_orders.extend_from_slice(&orders);
        summary
            .order_by_level
            .push((!orders.is_empty()).then(|| orders.iter().sum::<f64>() / orders.len() as f64));
    }
    if !all_orders.is_empty() {
        summary.mean_order = Some(all_orders.iter().sum::<f64>() / all_orders.len() as f64);
    }
    if pairs > 0 {
        summary.decreasing_fraction = Some(decreasing as f64 / pairs as f64);
    }
    if !log_c.is_empty() {
        summary.fitted_c = Some((log_c.iter().sum::<f64>() / log_c.len() as f64).exp());
    }
    summary
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into())
}

/// Tab-separated table, then the summary as `# key<TAB>value` lines.
pub fn to_tsv(out: &BenchOutput) -> String {
    let timings = out.records.iter().any(|r| r.level_wall_times.is_some());
    let mut s = String::from("target_id\tn\tpredicted_eps\tmeasured_eps\traw_length\tsimplified_length");
    if timings {
        s.push_str("\tlevel_wall_times");
    }
    s.push('\n');
    for r in &out.records {
        s.push_str(&format!(
            "{}\t{}\t{}\t{:.6e}\t{}\t{}",
            r.target_id,
            r.n,
            opt(r.predicted_eps),
            r.measured_eps,
            r.raw_length,
            r.simplified_length
        ));
        if let Some(t) = &r.level_wall_times {
            let parts: Vec<String> = t.iter().map(|x| format!("{x:.6}")).collect();
            s.push('\t');
            s.push_str(&parts.join(","));
        }
        s.push('\n');
    }
    let sm = &out.summary;
    s.push_str(&format!("# length_exponent\t{}\n", opt(sm.length_exponent)));
    s.push_str(&format!("# raw_length_exponent\t{}\n", opt(sm.raw_length_exponent)));
    for (i, o) in sm.order_by_level.iter().enumerate() {
        s.push_str(&format!("# order_level_{}\t{}\n", i + 1, opt(*o)));
    }
    s.push_str(&format!("# mean_order\t{}\n", opt(sm.mean_order)));
    s.push_str(&format!("# decreasing_fraction\t{}\n", opt(sm.decreasing_fraction)));
    s.push_str(&format!("# fitted_c\t{}\n", opt(sm.fitted_c)));
    s
}
