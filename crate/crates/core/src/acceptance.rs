//! The reproducible experiment suite: fifteen checks with pinned
//! configurations and tolerances, shared by the `acceptance` test target and
//! `mechsim reproduce-all`.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::auction::{
    ascending_auction, inclusion_rate_experiment, matches_vcg, multi_item_sample_size,
    multi_unit_auction, simultaneous_additive, truthfulness_probe, vcg_oracle, AscendingConfig,
    BitLedger, MultiUnitConfig, ProbeReport, SubAuction, ValuationProfile,
};
use crate::experiment::{run_trials, trial_seed, Summary};
use crate::facility::{
    approx_median, exact_expected_sampling_percentile_cost, make_counterexample,
    median_manipulation_check, percentile_mechanism, Instance, Position, SampleSpec,
};
use crate::plurality::{
    approx_plurality, plurality, plurality_sample_size, social_welfare, SingleMindedProfile,
};
use crate::vandermonde::{
    abs_moment, compare, comparison_csv, table_grid, table_rows, BinomialTable, CellStatus,
    TableKind, VandermondeDist, SUSPECT_CELL, TABLE_RHOS,
};
use crate::Result;

/// Thresholds for every check. Loadable from JSON; missing fields keep their
/// defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub table2_abs: f64,
    pub table1_abs: f64,
    pub table_runtime_secs: f64,
    pub moment_band: (f64, f64),
    pub moment_convergence: f64,
    pub median_mean_ratio: f64,
    pub median_fraction: f64,
    pub median_runtime_secs: f64,
    pub star_frequency: f64,
    pub star_frequency_slack: f64,
    pub percentile_growth: f64,
    pub sealed_bits_per_agent: f64,
    pub english_bits_per_agent: f64,
    pub ascending_runtime_secs: f64,
    pub inclusion_mean: (f64, f64),
    pub inclusion_variance_rel: f64,
    pub multi_item_bits_per_agent: f64,
    pub multi_item_round_factor: f64,
    pub multi_unit_bits_per_agent: f64,
    pub multi_unit_runtime_secs: f64,
    pub plurality_ratio: f64,
    pub plurality_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            table2_abs: 2e-4,
            table1_abs: 5e-3,
            table_runtime_secs: 30.0,
            moment_band: (0.5, 1.2),
            moment_convergence: 1e-3,
            median_mean_ratio: 1.1,
            median_fraction: 0.9,
            median_runtime_secs: 120.0,
            star_frequency: 0.5,
            star_frequency_slack: 0.02,
            percentile_growth: 500.0,
            sealed_bits_per_agent: 1.15,
            english_bits_per_agent: 1.5,
            ascending_runtime_secs: 120.0,
            inclusion_mean: (0.18, 0.22),
            inclusion_variance_rel: 0.25,
            multi_item_bits_per_agent: 1.3,
            multi_item_round_factor: 1.1,
            multi_unit_bits_per_agent: 2.0,
            multi_unit_runtime_secs: 300.0,
            plurality_ratio: 0.9,
            plurality_fraction: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// One-line human summary of the measured values.
    pub summary: String,
    pub metrics: Value,
    /// Extra files as `(name, contents)`.
    #[serde(skip)]
    pub artifacts: Vec<(String, String)>,
    #[serde(skip)]
    pub elapsed_secs: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:02} {:<22} {}  {} ({:.1}s)",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.summary,
            self.elapsed_secs
        )
    }
}

pub const CRITERIA: [(u32, &str); 15] = [
    (1, "table-abs-rank"),
    (2, "table-distance"),
    (3, "vandermonde-identity"),
    (4, "moment-law"),
    (5, "sampling-median"),
    (6, "star-counterexample"),
    (7, "percentile-unbounded"),
    (8, "ascending-vcg"),
    (9, "ascending-bits"),
    (10, "inclusion-rate"),
    (11, "multi-item"),
    (12, "multi-unit-vcg"),
    (13, "multi-unit-bits"),
    (14, "truthfulness"),
    (15, "plurality"),
];

/// Master seed of the suite; each check derives its own from it.
pub const SUITE_SEED: u64 = 20_240_601;

fn seed_for(id: u32) -> u64 {
    trial_seed(SUITE_SEED, id as u64)
}

struct Outcome {
    passed: bool,
    summary: String,
    metrics: Value,
    artifacts: Vec<(String, String)>,
}

fn outcome(passed: bool, summary: String, metrics: Value) -> Outcome {
    Outcome {
        passed,
        summary,
        metrics,
        artifacts: Vec::new(),
    }
}

pub fn run_criterion(id: u32, tol: &Tolerances) -> Result<CriterionResult> {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .ok_or_else(|| crate::Error::InvalidParameter(format!("no criterion {id}")))?;
    let start = Instant::now();
    let o = match id {
        1 => table_abs_rank(tol)?,
        2 => table_distance(tol)?,
        3 => vandermonde_identity()?,
        4 => moment_law(tol)?,
        5 => sampling_median(tol)?,
        6 => star_counterexample(tol)?,
        7 => percentile_unbounded(tol)?,
        8 => ascending_vcg()?,
        9 => ascending_bits(tol)?,
        10 => inclusion_rate(tol)?,
        11 => multi_item(tol)?,
        12 => multi_unit_vcg()?,
        13 => multi_unit_bits(tol)?,
        14 => truthfulness()?,
        _ => plurality_welfare(tol)?,
    };
    let elapsed_secs = start.elapsed().as_secs_f64();
    let runtime_cap = match id {
        1 | 2 => Some(tol.table_runtime_secs),
        5 => Some(tol.median_runtime_secs),
        9 => Some(tol.ascending_runtime_secs),
        13 => Some(tol.multi_unit_runtime_secs),
        _ => None,
    };
    let in_time = runtime_cap.is_none_or(|cap| elapsed_secs < cap);
    let summary = if in_time {
        o.summary
    } else {
        format!("{}; over runtime cap", o.summary)
    };
    Ok(CriterionResult {
        id,
        name,
        passed: o.passed && in_time,
        summary,
        metrics: o.metrics,
        artifacts: o.artifacts,
        elapsed_secs,
    })
}

pub fn run_all(tol: &Tolerances) -> Result<Vec<CriterionResult>> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, tol))
        .collect()
}

fn table_abs_rank(tol: &Tolerances) -> Result<Outcome> {
    let rows = table_rows(&table_grid(), false)?;
    let cells = compare(TableKind::B2, &rows, tol.table2_abs);
    let worst = cells.iter().map(|c| c.abs_diff).fold(0.0, f64::max);
    let failed = cells
        .iter()
        .filter(|c| c.status != CellStatus::Pass)
        .count();
    let mut o = outcome(
        failed == 0 && cells.len() == 25,
        format!(
            "{} cells, max |diff| {worst:.2e}, {failed} outside tolerance",
            cells.len()
        ),
        json!({"cells": cells.len(), "max_abs_diff": worst, "failed": failed}),
    );
    o.artifacts.push((
        "tables-b2.csv".into(),
        comparison_csv(TableKind::B2, &cells),
    ));
    Ok(o)
}

fn table_distance(tol: &Tolerances) -> Result<Outcome> {
    let rows = table_rows(&table_grid(), false)?;
    let cells = compare(TableKind::B1, &rows, tol.table1_abs);
    let checked: Vec<_> = cells
        .iter()
        .filter(|c| c.status != CellStatus::Flagged)
        .collect();
    let worst = checked.iter().map(|c| c.abs_diff).fold(0.0, f64::max);
    let failed = checked
        .iter()
        .filter(|c| c.status == CellStatus::Fail)
        .count();
    let flagged = cells
        .iter()
        .find(|c| c.status == CellStatus::Flagged)
        .filter(|c| (c.row.kappa, c.row.rho) == SUSPECT_CELL);
    // Each row must decrease in kappa.
    let monotone = TABLE_RHOS.iter().all(|&r| {
        let tv: Vec<f64> = rows.iter().filter(|x| x.rho == r).map(|x| x.tv).collect();
        tv.windows(2).all(|w| w[0] > w[1])
    });
    let flag_text = flagged.map_or("missing".to_string(), |c| {
        format!("ours {:.4} vs published {}", c.ours, c.reference)
    });
    let mut o = outcome(
        failed == 0 && checked.len() == 24 && flagged.is_some() && monotone,
        format!(
            "24 cells max |diff| {worst:.4}, {failed} outside tolerance; flagged (k=1000, r=40): {flag_text}"
        ),
        json!({
            "max_abs_diff": worst,
            "failed": failed,
            "flagged_ours": flagged.map(|c| c.ours),
            "flagged_published": flagged.map(|c| c.reference),
            "rows_decreasing": monotone,
        }),
    );
    o.artifacts.push((
        "tables-b1.csv".into(),
        comparison_csv(TableKind::B1, &cells),
    ));
    Ok(o)
}

fn vandermonde_identity() -> Result<Outcome> {
    let table = BinomialTable::new(401);
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for kappa in 1..=200 {
        for rho in 0..=kappa {
            checked += 1;
            if !table.vandermonde_identity(kappa, rho) {
                failures.push((kappa, rho));
            }
        }
    }
    Ok(outcome(
        failures.is_empty(),
        format!(
            "{checked} (kappa, rho) pairs, {} mismatches",
            failures.len()
        ),
        json!({"pairs": checked, "mismatches": failures}),
    ))
}

fn moment_law(tol: &Tolerances) -> Result<Outcome> {
    let (lo, hi) = tol.moment_band;
    let mut band_min = f64::INFINITY;
    let mut band_max = f64::NEG_INFINITY;
    for rho in 10..=500u64 {
        let v = abs_moment(rho, 1)? * (rho as f64).sqrt();
        band_min = band_min.min(v);
        band_max = band_max.max(v);
    }
    let mut worst = 0.0f64;
    for &rho in &TABLE_RHOS {
        let d = VandermondeDist::new(5000, rho)?;
        worst = worst.max((d.expected_abs_rank() - abs_moment(rho, 1)?).abs());
    }
    Ok(outcome(
        band_min >= lo && band_max <= hi && worst <= tol.moment_convergence,
        format!("sqrt(rho) E|X| in [{band_min:.4}, {band_max:.4}]; kappa=5000 gap {worst:.2e}"),
        json!({"band_min": band_min, "band_max": band_max, "kappa_5000_max_gap": worst}),
    ))
}

fn sampling_median(tol: &Tolerances) -> Result<Outcome> {
    let seed = seed_for(5);
    let inst = Instance::random_line(100_001, seed)?;
    let ratios = |delta: f64| -> Result<Vec<f64>> {
        run_trials(200, seed ^ delta.to_bits(), |_, s| {
            let spec = SampleSpec::accuracy(0.1, delta, s)?;
            Ok(approx_median(&inst, &spec)?
                .ratio_vs_optimal
                .unwrap_or(f64::INFINITY))
        })
        .into_iter()
        .collect()
    };
    let coarse = ratios(1.0)?;
    let fine = ratios(0.1)?;
    let coarse_mean = Summary::of(&coarse).mean;
    let fine_mean = Summary::of(&fine).mean;
    let fine_frac =
        fine.iter().filter(|&&r| r <= tol.median_mean_ratio).count() as f64 / fine.len() as f64;
    Ok(outcome(
        coarse_mean <= tol.median_mean_ratio
            && fine_mean <= tol.median_mean_ratio
            && fine_frac >= tol.median_fraction,
        format!(
            "c={} mean ratio {coarse_mean:.5}; c={} mean {fine_mean:.6}, {:.1}% of trials <= {}",
            SampleSpec::rule_size(0.1, 1.0),
            SampleSpec::rule_size(0.1, 0.1),
            100.0 * fine_frac,
            tol.median_mean_ratio
        ),
        json!({
            "c_delta_1": SampleSpec::rule_size(0.1, 1.0),
            "mean_ratio_delta_1": coarse_mean,
            "c_delta_0_1": SampleSpec::rule_size(0.1, 0.1),
            "mean_ratio_delta_0_1": fine_mean,
            "fraction_within_delta_0_1": fine_frac,
        }),
    ))
}

fn star_counterexample(tol: &Tolerances) -> Result<Outcome> {
    let inst = Instance::star(100)?;
    let target = 2.0 - 1.0 / 99.0;
    let results = run_trials(10_000, seed_for(6), |_, s| {
        let out = approx_median(&inst, &SampleSpec::fixed(50, s))?;
        Ok((
            out.facilities[0] != Position::Node(0),
            out.social_cost,
            out.ratio_vs_optimal.unwrap_or(f64::NAN),
        ))
    })
    .into_iter()
    .collect::<Result<Vec<(bool, f64, f64)>>>()?;
    let off: Vec<_> = results.iter().filter(|r| r.0).collect();
    let freq = off.len() as f64 / results.len() as f64;
    let exact = off
        .iter()
        .all(|r| r.1 == 197.0 && (r.2 - target).abs() <= 1e-12);
    let center_ok = results.iter().filter(|r| !r.0).all(|r| r.2 == 1.0);
    Ok(outcome(
        (freq - tol.star_frequency).abs() <= tol.star_frequency_slack && exact && center_ok,
        format!(
            "non-center frequency {freq:.4}; ratio in those trials {} 2 - 1/99",
            if exact { "always" } else { "not always" }
        ),
        json!({"non_center_frequency": freq, "ratio_exact": exact, "trials": results.len()}),
    ))
}

fn percentile_unbounded(tol: &Tolerances) -> Result<Outcome> {
    let (n, alpha, inner) = (20, 0.5, 1e-4);
    let c = 10;
    let ranks = [1, n];
    let expected_ratio = |l: f64| -> Result<f64> {
        let inst = make_counterexample(n, alpha, l, inner)?;
        let full = percentile_mechanism(&inst, &ranks)?.social_cost;
        Ok(exact_expected_sampling_percentile_cost(&inst, &ranks, c)? / full)
    };
    let small = expected_ratio(1e3)?;
    let large = expected_ratio(1e6)?;
    let growth = large / small;
    Ok(outcome(
        growth >= tol.percentile_growth,
        format!(
            "exact expected ratio {small:.3} at l=1e3, {large:.1} at l=1e6, growth {growth:.1}x"
        ),
        json!({
            "n": n, "alpha": alpha, "inner": inner, "c": c,
            "ratio_l_1e3": small, "ratio_l_1e6": large, "growth": growth,
        }),
    ))
}

fn ascending_vcg() -> Result<Outcome> {
    let sizes = [10usize, 100, 1_000, 10_000];
    let subs = [SubAuction::SealedBid, SubAuction::English];
    let runs_per = 10_000 / (sizes.len() * subs.len());
    let mut total = 0;
    let mut matched = 0;
    let mut under_n = 0;
    for (si, &n) in sizes.iter().enumerate() {
        for (bi, &sub) in subs.iter().enumerate() {
            let master = seed_for(8) ^ ((si * 2 + bi) as u64) << 32;
            let res = run_trials(runs_per, master, |t, s| -> Result<(bool, bool)> {
                let p = ValuationProfile::uniform(n, 1, 8, s)?;
                let cfg = AscendingConfig::new(sub, 2 + t % 30)?;
                let mut l = BitLedger::new(n);
                let (out, _) = ascending_auction(&p, &cfg, s, &mut l)?;
                Ok((
                    matches_vcg(p.item(0), &out.winners, out.payment),
                    l.total() >= n as u64,
                ))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            total += res.len();
            matched += res.iter().filter(|r| r.0).count();
            under_n += res.iter().filter(|r| !r.1).count();
        }
    }
    Ok(outcome(
        matched == total && under_n == 0,
        format!("{matched}/{total} runs equal the VCG outcome; {under_n} runs below n bits"),
        json!({"runs": total, "matched": matched, "below_n_bits": under_n}),
    ))
}

fn bits_per_agent(
    n: usize,
    k: u32,
    sub: SubAuction,
    trials: usize,
    seed: u64,
) -> Result<(f64, bool)> {
    let res = run_trials(trials, seed, |_, s| -> Result<(f64, bool)> {
        let p = ValuationProfile::uniform(n, 1, k, s)?;
        let cfg = AscendingConfig::new(sub, 100)?;
        let mut l = BitLedger::new(n);
        let (out, _) = ascending_auction(&p, &cfg, s, &mut l)?;
        Ok((
            l.total() as f64 / n as f64,
            matches_vcg(p.item(0), &out.winners, out.payment) && l.total() >= n as u64,
        ))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let bits: Vec<f64> = res.iter().map(|r| r.0).collect();
    Ok((Summary::of(&bits).mean, res.iter().all(|r| r.1)))
}

fn ascending_bits(tol: &Tolerances) -> Result<Outcome> {
    let n = 100_000;
    let (sealed, ok1) = bits_per_agent(n, 16, SubAuction::SealedBid, 50, seed_for(9))?;
    let (english, ok2) = bits_per_agent(n, 8, SubAuction::English, 50, seed_for(9) ^ 1)?;
    Ok(outcome(
        sealed <= tol.sealed_bits_per_agent && english <= tol.english_bits_per_agent && ok1 && ok2,
        format!("sealed k=16: {sealed:.4} bits/agent; english k=8: {english:.4} bits/agent"),
        json!({"sealed_k16": sealed, "english_k8": english, "all_vcg": ok1 && ok2}),
    ))
}

fn inclusion_rate(tol: &Tolerances) -> Result<Outcome> {
    let c = 9usize;
    let stats = inclusion_rate_experiment(100_000, c, 1_000, seed_for(10))?;
    let cf = c as f64;
    let target = 2.0 * (cf - 1.0) / ((cf + 2.0) * (cf + 1.0).powi(2));
    let rel = (stats.variance - target).abs() / target;
    let (lo, hi) = tol.inclusion_mean;
    Ok(outcome(
        stats.mean >= lo && stats.mean <= hi && rel <= tol.inclusion_variance_rel,
        format!(
            "mean {:.4}; variance {:.5} vs {target:.5} ({:.1}% off)",
            stats.mean,
            stats.variance,
            100.0 * rel
        ),
        json!({"mean": stats.mean, "variance": stats.variance, "variance_target": target}),
    ))
}

fn multi_item(tol: &Tolerances) -> Result<Outcome> {
    let (n, m, k, delta) = (100_000usize, 3usize, 8u32, 0.1);
    let c = multi_item_sample_size(m, delta)?;
    let trials = 20;
    let res = run_trials(trials, seed_for(11), |_, s| {
        let p = ValuationProfile::uniform(n, m, k, s)?;
        let cfg = AscendingConfig::new(SubAuction::SealedBid, c)?;
        let mut l = BitLedger::new(n);
        let out = simultaneous_additive(&p, &cfg, s, &mut l)?;
        let vcg = out
            .items
            .iter()
            .enumerate()
            .all(|(j, o)| matches_vcg(p.item(j), &o.winners, o.payment));
        Ok((
            l.total() as f64 / n as f64,
            vcg && l.total() >= n as u64,
            out.encoding,
        ))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let bits = Summary::of(&res.iter().map(|r| r.0).collect::<Vec<_>>()).mean;
    let all_vcg = res.iter().all(|r| r.1);
    // Per global round index: response bits against messaging agents,
    // pooled over trials.
    let rounds = res.iter().map(|r| r.2.len()).max().unwrap_or(0);
    let mut per_round = Vec::new();
    for r in 0..rounds {
        let (b, msg) = res
            .iter()
            .filter_map(|t| t.2.get(r))
            .fold((0u64, 0usize), |acc, e| {
                (acc.0 + e.response_bits, acc.1 + e.messages)
            });
        if msg > 0 {
            per_round.push(b as f64 / msg as f64);
        }
    }
    let worst = per_round.iter().copied().fold(0.0, f64::max);
    Ok(outcome(
        all_vcg && bits <= tol.multi_item_bits_per_agent && worst <= tol.multi_item_round_factor,
        format!(
            "c={c}; per-item VCG {}; {bits:.4} bits/agent; per-round bits / agents max {worst:.4}",
            if all_vcg { "100%" } else { "failed" }
        ),
        json!({"c": c, "bits_per_agent": bits, "all_vcg": all_vcg, "per_round_bits_per_message": per_round}),
    ))
}

fn multi_unit_vcg() -> Result<Outcome> {
    let runs = 1_000;
    let res = run_trials(runs, seed_for(12), |t, s| -> Result<(usize, bool, bool)> {
        let n = 20 + (s % 981) as usize;
        let k = 4 + (t % 5) as u32;
        let eps = [0.2, 0.3, 0.5][t % 3];
        let cfg = MultiUnitConfig::new(eps, 0.2)?;
        let p = ValuationProfile::uniform(n, 1, k, s)?;
        let mut ok = true;
        let mut estimated = false;
        for m in [1, n / 4, n / 2] {
            let mut l = BitLedger::new(n);
            let out = multi_unit_auction(&p, m, &cfg, s, &mut l)?;
            let (w, price) = vcg_oracle(p.item(0), m)?;
            ok &= out.outcome.winners == w && out.outcome.payment == price;
            estimated |= !out.trace.is_empty();
        }
        Ok((n, ok, estimated))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let matched = res.iter().filter(|r| r.1).count();
    let estimated = res.iter().filter(|r| r.2).count();
    Ok(outcome(
        matched == runs,
        format!(
            "{matched}/{runs} runs (3 unit counts each) equal VCG; estimator used in {estimated}"
        ),
        json!({"runs": runs, "matched": matched, "runs_with_estimation": estimated}),
    ))
}

fn multi_unit_bits(tol: &Tolerances) -> Result<Outcome> {
    let measure = |n: usize, trials: usize| -> Result<(f64, bool)> {
        let res = run_trials(
            trials,
            seed_for(13) ^ n as u64,
            |_, s| -> Result<(f64, bool)> {
                let m = (0.3 * n as f64) as usize;
                let p = ValuationProfile::uniform(n, 1, 16, s)?;
                let cfg = MultiUnitConfig::new(0.1, 0.05)?;
                let mut l = BitLedger::new(n);
                let out = multi_unit_auction(&p, m, &cfg, s, &mut l)?;
                let (w, price) = vcg_oracle(p.item(0), m)?;
                Ok((
                    l.total() as f64 / n as f64,
                    out.outcome.winners == w && out.outcome.payment == price,
                ))
            },
        )
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let bits: Vec<f64> = res.iter().map(|r| r.0).collect();
        Ok((Summary::of(&bits).mean, res.iter().all(|r| r.1)))
    };
    let (small, ok1) = measure(100_000, 10)?;
    let (large, ok2) = measure(1_000_000, 10)?;
    Ok(outcome(
        large <= tol.multi_unit_bits_per_agent && large < small && ok1 && ok2,
        format!("n=1e5: {small:.4} bits/agent; n=1e6: {large:.4} bits/agent"),
        json!({"bits_per_agent_1e5": small, "bits_per_agent_1e6": large, "all_vcg": ok1 && ok2}),
    ))
}

fn probe_profiles(
    n: usize,
    m: usize,
    k: u32,
    count: usize,
    seed: u64,
) -> Result<Vec<ValuationProfile>> {
    (0..count)
        .map(|i| ValuationProfile::uniform(n, m, k, trial_seed(seed, i as u64)))
        .collect()
}

fn truthfulness() -> Result<Outcome> {
    let seeds: Vec<u64> = (0..50).map(|s| trial_seed(seed_for(14), s)).collect();
    let mut reports: Vec<(&str, ProbeReport)> = Vec::new();

    let mut single = ProbeReport::default();
    for sub in [SubAuction::SealedBid, SubAuction::English] {
        let cfg = AscendingConfig::new(sub, 2)?;
        for p in probe_profiles(4, 1, 3, 10, seed_for(14) ^ 1)? {
            single.merge(truthfulness_probe(
                &p,
                |q, s| {
                    let mut l = BitLedger::new(q.n());
                    let (out, _) = ascending_auction(q, &cfg, s, &mut l)?;
                    Ok(vec![(out.winners, out.payment)])
                },
                &seeds,
            )?);
        }
    }
    reports.push(("ascending", single));

    let mut multi = ProbeReport::default();
    let cfg = AscendingConfig::new(SubAuction::SealedBid, 2)?;
    for p in probe_profiles(4, 2, 3, 10, seed_for(14) ^ 2)? {
        multi.merge(truthfulness_probe(
            &p,
            |q, s| {
                let mut l = BitLedger::new(q.n());
                let out = simultaneous_additive(q, &cfg, s, &mut l)?;
                Ok(out
                    .items
                    .into_iter()
                    .map(|o| (o.winners, o.payment))
                    .collect())
            },
            &seeds,
        )?);
    }
    reports.push(("multi-item", multi));

    let mut units = ProbeReport::default();
    let mut mcfg = MultiUnitConfig::new(0.3, 0.2)?;
    mcfg.sample_size = Some(3);
    mcfg.direct_threshold = Some(1);
    for m in [1, 2] {
        for p in probe_profiles(4, 1, 3, 10, seed_for(14) ^ (2 + m as u64))? {
            units.merge(truthfulness_probe(
                &p,
                |q, s| {
                    let mut l = BitLedger::new(q.n());
                    let out = multi_unit_auction(q, m, &mcfg, s, &mut l)?;
                    Ok(vec![(out.outcome.winners, out.outcome.payment)])
                },
                &seeds,
            )?);
        }
    }
    reports.push(("multi-unit", units));

    let mut median_tried = 0;
    let mut median_bad = 0;
    for n in 1..=5 {
        let (t, b) = median_manipulation_check(n, 4)?;
        median_tried += t;
        median_bad += b;
    }
    let profitable: usize =
        reports.iter().map(|r| r.1.profitable.len()).sum::<usize>() + median_bad;
    let detail: Vec<String> = reports
        .iter()
        .map(|(name, r)| format!("{name} {}/{}", r.profitable.len(), r.deviations_tested))
        .chain(std::iter::once(format!(
            "median {median_bad}/{median_tried}"
        )))
        .collect();
    Ok(outcome(
        profitable == 0,
        format!("profitable/tried: {}", detail.join(", ")),
        json!({
            "profitable": profitable,
            "ascending_tried": reports[0].1.deviations_tested,
            "multi_item_tried": reports[1].1.deviations_tested,
            "multi_unit_tried": reports[2].1.deviations_tested,
            "median_tried": median_tried,
        }),
    ))
}

fn plurality_welfare(tol: &Tolerances) -> Result<Outcome> {
    let (n, m, eps, delta) = (10_001usize, 2usize, 0.1, 0.1);
    let profile = SingleMindedProfile::near_tie(n, m)?;
    let c = plurality_sample_size(m, eps, delta)?;
    let opt = social_welfare(&profile, plurality(&profile))? as f64;
    let ratios = run_trials(10_000, seed_for(15), |_, s| -> Result<f64> {
        let w = approx_plurality(&profile, eps, delta, s)?;
        Ok(social_welfare(&profile, w)? as f64 / opt)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let frac =
        ratios.iter().filter(|&&r| r >= tol.plurality_ratio).count() as f64 / ratios.len() as f64;
    let optimal = ratios.iter().filter(|&&r| r == 1.0).count() as f64 / ratios.len() as f64;
    Ok(outcome(
        frac >= tol.plurality_fraction,
        format!(
            "c={c}; welfare ratio >= {} in {:.2}% of trials (optimal winner {:.2}%)",
            tol.plurality_ratio,
            100.0 * frac,
            100.0 * optimal
        ),
        json!({"c": c, "fraction_within": frac, "fraction_optimal": optimal}),
    ))
}
