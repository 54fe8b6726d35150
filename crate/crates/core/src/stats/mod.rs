//! Paired comparisons of strategies across seed-level runs.
//!
//! Differences are always taken as `b − a`, so a positive delta or effect
//! size favors the second strategy.

pub mod student_t;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::pairwise_sum;

/// One training run: a strategy evaluated in one condition with one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub task: String,
    pub target: String,
    #[serde(rename = "budget")]
    pub budget_level: String,
    #[serde(rename = "model")]
    pub model_tag: String,
    pub strategy: String,
    pub seed: u64,
    pub metric: f64,
    pub utilization: f64,
}

impl RunResult {
    fn key(&self) -> (&str, &str, &str, &str, &str, u64) {
        (
            &self.task,
            &self.target,
            &self.budget_level,
            &self.model_tag,
            &self.strategy,
            self.seed,
        )
    }
}

/// Checks value ranges and that no run is listed twice.
pub fn validate_results(results: &[RunResult]) -> Result<()> {
    let mut seen = HashSet::new();
    for r in results {
        for (name, v) in [("metric", r.metric), ("utilization", r.utilization)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::input(format!(
                    "{name} {v} outside [0, 1] for {}/{}/{}/{}/{}/seed {}",
                    r.task, r.target, r.budget_level, r.model_tag, r.strategy, r.seed
                )));
            }
        }
        if !seen.insert(r.key()) {
            return Err(Error::input(format!(
                "duplicate run {}/{}/{}/{}/{}/seed {}",
                r.task, r.target, r.budget_level, r.model_tag, r.strategy, r.seed
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub n: usize,
    pub delta: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub t_statistic: f64,
    pub df: f64,
    pub p: f64,
}

fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, (pairwise_sum(&sq) / (n - 1.0)).sqrt())
}

fn paired_differences(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::input(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "paired test needs at least 2 pairs, got {}",
            a.len()
        )));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::input("paired samples must be finite"));
    }
    Ok(a.iter().zip(b).map(|(x, y)| y - x).collect())
}

/// Two-sided paired t-test on `b − a` with a 95% confidence interval.
///
/// Constant differences give [`Error::DegenerateVariance`] carrying the
/// mean difference.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    let diffs = paired_differences(a, b)?;
    let n = diffs.len();
    let (delta, sd) = mean_and_sd(&diffs);
    if sd == 0.0 || diffs.iter().all(|d| *d == diffs[0]) {
        return Err(Error::DegenerateVariance { delta });
    }
    let se = sd / (n as f64).sqrt();
    let df = (n - 1) as f64;
    let t = delta / se;
    let half_width = student_t::quantile(0.975, df) * se;
    Ok(PairedTTest {
        n,
        delta,
        sd,
        ci_low: delta - half_width,
        ci_high: delta + half_width,
        t_statistic: t,
        df,
        p: student_t::two_sided_p(t, df),
    })
}

/// Mean paired difference over its sample standard deviation.
pub fn cohens_d_paired(a: &[f64], b: &[f64]) -> Result<f64> {
    let diffs = paired_differences(a, b)?;
    let (mean, sd) = mean_and_sd(&diffs);
    if sd == 0.0 || diffs.iter().all(|d| *d == diffs[0]) {
        return Err(Error::DegenerateVariance { delta: mean });
    }
    Ok(mean / sd)
}

pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m.max(1) as f64).min(1.0)
}

/// One row of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub comparison: String,
    pub condition: String,
    pub n: usize,
    pub delta: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `None` when the paired differences have zero variance.
    pub p: Option<f64>,
    pub p_adjusted: Option<f64>,
    pub d: Option<f64>,
    #[serde(skip)]
    pub family_size: usize,
}

impl ComparisonReport {
    /// Builds a row from paired samples; degenerate variance yields a row
    /// with the delta and no p or d.
    pub fn from_pairs(
        comparison: impl Into<String>,
        condition: impl Into<String>,
        a: &[f64],
        b: &[f64],
        family_size: usize,
    ) -> Result<Self> {
        if family_size == 0 {
            return Err(Error::input("--family-size must be ≥ 1"));
        }
        let (delta, ci_low, ci_high, p, d) = match paired_t_test(a, b) {
            Ok(t) => (
                t.delta,
                t.ci_low,
                t.ci_high,
                Some(t.p),
                Some(cohens_d_paired(a, b)?),
            ),
            Err(Error::DegenerateVariance { delta }) => (delta, delta, delta, None, None),
            Err(e) => return Err(e),
        };
        Ok(ComparisonReport {
            comparison: comparison.into(),
            condition: condition.into(),
            n: a.len(),
            delta,
            ci_low,
            ci_high,
            p,
            p_adjusted: p.map(|p| bonferroni(p, family_size)),
            d,
            family_size,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.p.is_none()
    }
}

/// Compares strategy `b` against `a` within each `(task, budget)` condition.
///
/// Runs are paired on `(target, model, seed)`. When `model` is given only
/// that model's runs are used. Every run of `a` must have a partner in `b`
/// and vice versa.
pub fn compare(
    results: &[RunResult],
    a: &str,
    b: &str,
    family_size: usize,
    model: Option<&str>,
) -> Result<Vec<ComparisonReport>> {
    validate_results(results)?;
    type PairKey<'r> = (&'r str, &'r str, u64);
    type Sides<'r> = (BTreeMap<PairKey<'r>, f64>, BTreeMap<PairKey<'r>, f64>);
    let mut groups: BTreeMap<(&str, &str), Sides> = BTreeMap::new();
    for r in results {
        if model.is_some_and(|m| m != r.model_tag) {
            continue;
        }
        let side = if r.strategy == a {
            0
        } else if r.strategy == b {
            1
        } else {
            continue;
        };
        let g = groups.entry((&r.task, &r.budget_level)).or_default();
        let key = (r.target.as_str(), r.model_tag.as_str(), r.seed);
        if side == 0 {
            g.0.insert(key, r.metric);
        } else {
            g.1.insert(key, r.metric);
        }
    }
    if groups.is_empty() {
        return Err(Error::Coverage(format!(
            "no runs found for strategies `{a}` or `{b}`"
        )));
    }
    let label = format!("{a} vs {b}");
    let mut rows = Vec::with_capacity(groups.len());
    for ((task, budget), (left, right)) in groups {
        let keys: BTreeSet<&PairKey> = left.keys().chain(right.keys()).collect();
        let mut xs = Vec::with_capacity(keys.len());
        let mut ys = Vec::with_capacity(keys.len());
        for key in keys {
            match (left.get(key), right.get(key)) {
                (Some(x), Some(y)) => {
                    xs.push(*x);
                    ys.push(*y);
                }
                (_, None) | (None, _) => {
                    let missing = if left.contains_key(key) { b } else { a };
                    return Err(Error::Coverage(format!(
                        "{task}-{budget}: no `{missing}` run for target {}, model {}, seed {}",
                        key.0, key.1, key.2
                    )));
                }
            }
        }
        rows.push(ComparisonReport::from_pairs(
            label.clone(),
            format!("{task}-{budget}"),
            &xs,
            &ys,
            family_size,
        )?);
    }
    Ok(rows)
}

fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Three decimals without the leading zero, e.g. `+.038` or `.003`.
fn short(x: f64, signed: bool) -> String {
    let s = format!("{:.3}", x.abs());
    let s = s.strip_prefix('0').unwrap_or(&s).to_string();
    let neg = x < 0.0 && s.chars().any(|c| c.is_ascii_digit() && c != '0');
    match (signed, neg) {
        (_, true) => format!("-{s}"),
        (true, false) => format!("+{s}"),
        (false, false) => s,
    }
}

/// Plain-text table of comparison rows with significance stars
/// (`*` p < .05, `**` p < .01, `***` p < .001) on the unadjusted p.
pub fn render_table(rows: &[ComparisonReport]) -> String {
    let w = rows
        .iter()
        .map(|r| r.comparison.chars().count())
        .chain([10])
        .max()
        .unwrap_or(10);
    let c = rows
        .iter()
        .map(|r| r.condition.chars().count())
        .chain([9])
        .max()
        .unwrap_or(9);
    let mut out = format!(
        "{:<w$}  {:<c$} {:>3} {:>7} {:>16} {:>9} {:>7} {:>6}\n",
        "Comparison", "Condition", "n", "Δ", "95% CI", "p", "p_adj", "d"
    );
    let p_text = |p: f64| {
        if p < 0.0005 {
            "<.001".to_string()
        } else {
            short(p, false)
        }
    };
    for r in rows {
        let ci = format!("[{},{}]", short(r.ci_low, true), short(r.ci_high, true));
        let p =
            r.p.map_or("NA".to_string(), |p| format!("{}{}", p_text(p), stars(p)));
        let p_adj = r.p_adjusted.map_or("NA".to_string(), p_text);
        let d = r.d.map_or("NA".to_string(), |d| format!("{d:+.2}"));
        out.push_str(&format!(
            "{:<w$}  {:<c$} {:>3} {:>7} {:>16} {:>9} {:>7} {:>6}\n",
            r.comparison,
            r.condition,
            r.n,
            short(r.delta, true),
            ci,
            p,
            p_adj,
            d
        ));
    }
    if let Some(m) = rows.first().map(|r| r.family_size) {
        out.push_str(&format!(
            "*p<.05, **p<.01, ***p<.001 (unadjusted); p_adj = Bonferroni with m = {m}\n"
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieMode {
    /// Tied winners share the condition equally.
    #[default]
    Split,
    /// Only conditions with a unique winner are credited; rates may sum below 1.
    StrictOnly,
}

/// Fraction of `(task, target, budget, model, seed)` conditions won by each strategy.
pub fn win_rates(results: &[RunResult], mode: TieMode) -> Result<BTreeMap<String, f64>> {
    validate_results(results)?;
    let strategies: BTreeSet<&str> = results.iter().map(|r| r.strategy.as_str()).collect();
    let mut conditions: BTreeMap<(&str, &str, &str, &str, u64), Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        conditions
            .entry((&r.task, &r.target, &r.budget_level, &r.model_tag, r.seed))
            .or_default()
            .push(r);
    }
    let mut wins: BTreeMap<String, f64> = strategies.iter().map(|s| (s.to_string(), 0.0)).collect();
    for (key, runs) in &conditions {
        if runs.len() != strategies.len() {
            let present: BTreeSet<&str> = runs.iter().map(|r| r.strategy.as_str()).collect();
            let missing: Vec<&str> = strategies.difference(&present).copied().collect();
            return Err(Error::Coverage(format!(
                "condition {}/{}/{}/{}/seed {} lacks {}",
                key.0,
                key.1,
                key.2,
                key.3,
                key.4,
                missing.join(", ")
            )));
        }
        let best = runs
            .iter()
            .map(|r| r.metric)
            .fold(f64::NEG_INFINITY, f64::max);
        let winners: Vec<&str> = runs
            .iter()
            .filter(|r| r.metric == best)
            .map(|r| r.strategy.as_str())
            .collect();
        let share = match mode {
            TieMode::Split => 1.0 / winners.len() as f64,
            TieMode::StrictOnly if winners.len() == 1 => 1.0,
            TieMode::StrictOnly => 0.0,
        };
        for w in winners {
            *wins.get_mut(w).expect("known strategy") += share;
        }
    }
    let total = conditions.len() as f64;
    wins.values_mut().for_each(|w| *w /= total);
    Ok(wins)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtilizationStats {
    pub runs: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean and range of budget utilization per strategy.
pub fn utilization_summary(results: &[RunResult]) -> BTreeMap<String, UtilizationStats> {
    let mut by_strategy: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        by_strategy
            .entry(r.strategy.clone())
            .or_default()
            .push(r.utilization);
    }
    by_strategy
        .into_iter()
        .map(|(s, us)| {
            let stats = UtilizationStats {
                runs: us.len(),
                mean: pairwise_sum(&us) / us.len() as f64,
                min: us.iter().copied().fold(f64::INFINITY, f64::min),
                max: us.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            };
            (s, stats)
        })
        .collect()
}

/// Mean metric per strategy.
pub fn mean_metric(results: &[RunResult]) -> BTreeMap<String, f64> {
    let mut by_strategy: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        by_strategy
            .entry(r.strategy.clone())
            .or_default()
            .push(r.metric);
    }
    by_strategy
        .into_iter()
        .map(|(s, xs)| (s, pairwise_sum(&xs) / xs.len() as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(strategy: &str, seed: u64, metric: f64) -> RunResult {
        RunResult {
            task: "ner".into(),
            target: "hau".into(),
            budget_level: "low".into(),
            model_tag: "m".into(),
            strategy: strategy.into(),
            seed,
            metric,
            utilization: 1.0,
        }
    }

    #[test]
    fn diffs_one_two_three() {
        let a = [0.0, 0.0, 0.0];
        let b = [1.0, 2.0, 3.0];
        let t = paired_t_test(&a, &b).unwrap();
        assert_eq!(t.delta, 2.0);
        assert!((t.t_statistic - 12f64.sqrt()).abs() < 1e-12);
        assert_eq!(t.df, 2.0);
        assert!((t.p - 0.0742).abs() < 1e-3);
        assert_eq!(cohens_d_paired(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn identical_samples_are_degenerate() {
        let a = [0.3, 0.5, 0.7];
        match paired_t_test(&a, &a) {
            Err(Error::DegenerateVariance { delta }) => assert_eq!(delta, 0.0),
            other => panic!("unexpected {other:?}"),
        }
        let row = ComparisonReport::from_pairs("x", "y", &a, &a, 4).unwrap();
        assert!(row.is_degenerate());
        assert!(row.ci_low <= 0.0 && 0.0 <= row.ci_high);
    }

    #[test]
    fn constant_shift_is_degenerate_for_d() {
        let a = [0.25, 0.5, 0.75];
        let b = [0.5, 0.75, 1.0];
        assert!(matches!(
            cohens_d_paired(&a, &b),
            Err(Error::DegenerateVariance { .. })
        ));
    }

    #[test]
    fn bonferroni_cases() {
        assert!((bonferroni(0.01, 4) - 0.04).abs() < 1e-15);
        assert_eq!(bonferroni(0.5, 4), 1.0);
        assert_eq!(bonferroni(0.037, 1), 0.037);
    }

    #[test]
    fn win_rates_dominance_and_ties() {
        let rs = vec![
            run("a", 1, 0.9),
            run("b", 1, 0.1),
            run("a", 2, 0.8),
            run("b", 2, 0.2),
        ];
        let w = win_rates(&rs, TieMode::Split).unwrap();
        assert_eq!(w["a"], 1.0);
        assert_eq!(w["b"], 0.0);

        let tied = vec![
            run("a", 1, 0.5),
            run("b", 1, 0.5),
            run("a", 2, 0.4),
            run("b", 2, 0.4),
        ];
        let w = win_rates(&tied, TieMode::Split).unwrap();
        assert_eq!((w["a"], w["b"]), (0.5, 0.5));
        let w = win_rates(&tied, TieMode::StrictOnly).unwrap();
        assert_eq!((w["a"], w["b"]), (0.0, 0.0));
    }

    #[test]
    fn win_rates_need_full_coverage() {
        let rs = vec![run("a", 1, 0.9), run("b", 1, 0.1), run("a", 2, 0.8)];
        assert!(matches!(
            win_rates(&rs, TieMode::Split),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn duplicate_runs_rejected() {
        let rs = vec![run("a", 1, 0.9), run("a", 1, 0.8)];
        assert!(validate_results(&rs).is_err());
    }

    #[test]
    fn singleton_utilization() {
        let mut r = run("all-from-best", 42, 0.5);
        r.utilization = 0.362;
        let s = utilization_summary(&[r]);
        let u = s["all-from-best"];
        assert_eq!((u.mean, u.min, u.max), (0.362, 0.362, 0.362));
    }

    #[test]
    fn compare_reports_missing_partner() {
        let rs = vec![run("a", 1, 0.9), run("b", 1, 0.1), run("a", 2, 0.8)];
        assert!(matches!(
            compare(&rs, "a", "b", 1, None),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn short_format() {
        assert_eq!(short(0.038, true), "+.038");
        assert_eq!(short(-0.006, true), "-.006");
        assert_eq!(short(0.0, true), "+.000");
        assert_eq!(short(-0.0001, true), "+.000");
        assert_eq!(short(0.003, false), ".003");
    }
}
