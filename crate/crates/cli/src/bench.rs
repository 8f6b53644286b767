//! Size-ladder benchmarks: optimizer against the full-sort oracle, with
//! least-squares slopes on log-log scale.

use std::io::{Read, Write};
use std::time::Instant;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use shortcut_frechet::oracle::{oracle_optimize_discrete, oracle_optimize_semi, OracleVariant};
use shortcut_frechet::{optimize_one_sided, optimize_semi, optimize_two_sided, OptimizeConfig, PointSeq, PolyCurve};

use crate::app::Variant;
use crate::gen::{cluster_centers, clustered, generate, GenParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// Variant name, with an `-oracle` suffix for the reference runs.
    pub variant: String,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub time_ms: f64,
    pub probes: u64,
    pub bifurcations: u64,
    pub retries: u32,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub variant: Variant,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Largest size the oracle is run on.
    pub oracle_max: usize,
    /// Clustered point sets instead of noisy curve samples (discrete variants).
    pub clustered: bool,
    pub opt: OptimizeConfig,
}

/// Per-trial seed, derived from the master seed so that trials are
/// independent of each other and of the ladder.
pub fn trial_seed(master: u64, size: usize, trial: usize) -> u64 {
    let mut z = master ^ (size as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64() * 1e3)
}

pub fn run(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &size in &cfg.sizes {
        for trial in 0..cfg.trials {
            let seed = trial_seed(cfg.seed, size, trial);
            let inst = generate(&GenParams { m: size, n: size, sigma: 0.1, outlier_frac: 0.1, seed });
            let (a, b) = if cfg.clustered {
                let centers = cluster_centers((size as f64).sqrt().ceil() as usize, seed);
                (PointSeq::new(clustered(size, &centers, 0.5, seed ^ 1))?, PointSeq::new(clustered(size, &centers, 0.5, seed ^ 2))?)
            } else {
                (PointSeq::new(inst.a)?, PointSeq::new(inst.b)?)
            };
            let f = PolyCurve::new(inst.curve)?;
            let opt = OptimizeConfig { seed, ..cfg.opt.clone() };
            let name = cfg.variant.name();
            let (stats, ms) = match cfg.variant {
                Variant::OneSided => {
                    let (r, ms) = timed(|| optimize_one_sided(&a, &b, &opt));
                    (r?.stats, ms)
                }
                Variant::TwoSided => {
                    let (r, ms) = timed(|| optimize_two_sided(&a, &b, &opt));
                    (r?.stats, ms)
                }
                Variant::Semi => {
                    let (r, ms) = timed(|| optimize_semi(&a, &f, &opt));
                    (r?.stats, ms)
                }
            };
            rows.push(BenchRow {
                variant: name.to_string(),
                m: size,
                n: size,
                seed,
                time_ms: ms,
                probes: stats.probes,
                bifurcations: stats.bifurcations,
                retries: stats.retries,
            });
            if size <= cfg.oracle_max {
                let ((), ms) = timed(|| {
                    match cfg.variant {
                        Variant::OneSided => oracle_optimize_discrete(&a, &b, OracleVariant::OneSided),
                        Variant::TwoSided => oracle_optimize_discrete(&a, &b, OracleVariant::TwoSided),
                        Variant::Semi => oracle_optimize_semi(&a, &f),
                    };
                });
                rows.push(BenchRow {
                    variant: format!("{name}-oracle"),
                    m: size,
                    n: size,
                    seed,
                    time_ms: ms,
                    probes: 0,
                    bifurcations: 0,
                    retries: 0,
                });
            }
        }
    }
    Ok(rows)
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// distinct `x` or any non-positive value.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slopes of time and probes against `m + n`, per variant name, in order of
/// first appearance.
pub fn slopes(rows: &[BenchRow]) -> Vec<(String, Option<f64>, Option<f64>)> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.variant.as_str()) {
            names.push(&r.variant);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let sel: Vec<&BenchRow> = rows.iter().filter(|r| r.variant == name).collect();
            let size = |r: &BenchRow| (r.m + r.n) as f64;
            let time = fit_slope(&sel.iter().map(|r| (size(r), r.time_ms)).collect::<Vec<_>>());
            let probes = fit_slope(&sel.iter().map(|r| (size(r), r.probes as f64)).collect::<Vec<_>>());
            (name.to_string(), time, probes)
        })
        .collect()
}

pub fn write_csv(rows: &[BenchRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_csv(input: impl Read) -> Result<Vec<BenchRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(1.5))).collect();
        assert!((fit_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(fit_slope(&[(1.0, 1.0)]), None);
        assert_eq!(fit_slope(&[(1.0, 0.0), (2.0, 1.0)]), None);
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![BenchRow {
            variant: "one-sided".into(),
            m: 250,
            n: 250,
            seed: 9,
            time_ms: 1.25,
            probes: 700,
            bifurcations: 31,
            retries: 0,
        }];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("variant,m,n,seed,time_ms,probes,bifurcations,retries\n"));
        assert_eq!(parse_csv(buf.as_slice()).unwrap(), rows);
    }
}
