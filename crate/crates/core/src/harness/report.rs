//! Sweep reports and their verdicts.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::fit::{fit_loglog_slope, SlopeFit};
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest relative change of a quasi-norm under a 10x change of the tail cut.
pub const MAX_TAIL_SENSITIVITY: f64 = 0.02;

/// Norms at or below this are treated as zero for degeneracy.
pub const ZERO_NORM: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// `alpha`, `r`, or a family index.
    pub parameter: f64,
    /// Sub-sweep label (box size, variant); empty for single sweeps.
    #[serde(default)]
    pub group: String,
    pub measured: f64,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub tail_mass: f64,
    pub tail_sensitivity: Option<f64>,
    pub projection_defect: Option<f64>,
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
    /// Rows kept for the record but left out of the verdict (0/0 ratios).
    #[serde(default)]
    pub excluded: bool,
}

impl Row {
    pub fn new(parameter: f64, measured: f64) -> Self {
        Row {
            parameter,
            group: String::new(),
            measured,
            bound: None,
            ratio: None,
            tail_mass: 0.0,
            tail_sensitivity: None,
            projection_defect: None,
            extra: BTreeMap::new(),
            excluded: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predicted {
    pub exponent: Option<f64>,
    /// The predicted law in words, e.g. `(alpha l rho)^(d/q)`.
    pub law: String,
    pub tolerance: Option<f64>,
}

/// `extra[key] >= min` on every included row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowCheck {
    pub key: String,
    pub min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// Fitted slope of `measured` within `tolerance` of `exponent`. When bounds
    /// are present, the max of `ratio` over the full sweep may exceed its max over
    /// the first half by at most `max_ratio_growth`.
    Slope {
        exponent: f64,
        tolerance: f64,
        max_ratio_growth: Option<f64>,
        #[serde(default)]
        checks: Vec<RowCheck>,
    },
    /// Per group, `(max - min) / mean` of `ratio` below `max_variation`; across
    /// groups (listed from the smallest box) the ratios at equal parameters agree
    /// to `box_consistency` relative and the projection defect decreases.
    RatioStability { max_variation: f64, box_consistency: f64, groups: Vec<String> },
    /// Max ratio over all included rows divided by the max over rows with
    /// `parameter <= prefix` stays below `max_growth`.
    BoundRatio { prefix: f64, max_growth: f64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Proven,
    OutsideProvenScope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub degenerate: bool,
    pub scope: Scope,
    pub reasons: Vec<String>,
    /// Headline statistic: slope, worst variation, or growth.
    pub statistic: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub schema_version: u32,
    pub experiment: String,
    pub name: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub q: f64,
    pub parameter_name: String,
    pub rows: Vec<Row>,
    pub fit: Option<SlopeFit>,
    pub predicted: Predicted,
    pub criterion: Criterion,
    pub scope: Scope,
    pub verdict: Verdict,
    #[serde(default)]
    pub notes: Vec<String>,
}

fn rel_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

impl ScalingReport {
    /// Sorts rows, fits, and derives the verdict.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        config: &ExperimentConfig,
        seed: u64,
        parameter_name: &str,
        mut rows: Vec<Row>,
        predicted: Predicted,
        criterion: Criterion,
        scope: Scope,
        notes: Vec<String>,
    ) -> Self {
        rows.sort_by(|a, b| a.group.cmp(&b.group).then(a.parameter.total_cmp(&b.parameter)));
        let mut r = ScalingReport {
            schema_version: SCHEMA_VERSION,
            experiment: config.kind.name().to_string(),
            name: config.stem(),
            config: config.clone(),
            seed,
            q: config.q,
            parameter_name: parameter_name.to_string(),
            rows,
            fit: None,
            predicted,
            criterion,
            scope,
            verdict: Verdict { pass: false, degenerate: false, scope: Scope::Proven, reasons: vec![], statistic: None },
            notes,
        };
        r.fit = r.recompute_fit();
        r.verdict = r.recompute_verdict();
        r
    }

    fn included(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.excluded)
    }

    pub fn recompute_fit(&self) -> Option<SlopeFit> {
        if !matches!(self.criterion, Criterion::Slope { .. }) {
            return None;
        }
        let pts: Vec<(f64, f64)> = self.included().map(|r| (r.parameter, r.measured)).collect();
        fit_loglog_slope(&pts).ok()
    }

    /// The verdict from the stored rows and criterion alone.
    pub fn recompute_verdict(&self) -> Verdict {
        let mut reasons = Vec::new();
        let rows: Vec<&Row> = self.included().collect();
        let degenerate = !rows.is_empty() && rows.iter().all(|r| r.measured.abs() <= ZERO_NORM);
        if rows.is_empty() {
            reasons.push("no included rows".to_string());
        }
        for r in &rows {
            if !r.measured.is_finite() {
                reasons.push(format!("non-finite measurement at {} = {}", self.parameter_name, r.parameter));
            }
            if let Some(s) = r.tail_sensitivity {
                if !(s < MAX_TAIL_SENSITIVITY) {
                    reasons.push(format!(
                        "tail-cut sensitivity {s:.3e} at {} = {}{} is not below {MAX_TAIL_SENSITIVITY}",
                        self.parameter_name,
                        r.parameter,
                        group_suffix(&r.group)
                    ));
                }
            }
        }
        let mut statistic = None;
        if !degenerate && !rows.is_empty() {
            match &self.criterion {
                Criterion::Slope { exponent, tolerance, max_ratio_growth, checks } => {
                    match self.recompute_fit() {
                        None => reasons.push("slope fit failed (fewer than 4 positive points)".into()),
                        Some(f) => {
                            statistic = Some(f.slope);
                            if !((f.slope - exponent).abs() <= *tolerance) {
                                reasons.push(format!("slope {:.4} is outside {exponent} +- {tolerance}", f.slope));
                            }
                        }
                    }
                    if let Some(g) = max_ratio_growth {
                        let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
                        if ratios.len() == rows.len() && ratios.len() >= 2 {
                            let half = ratios.len().div_ceil(2);
                            let first = ratios[..half].iter().cloned().fold(0.0, f64::max);
                            let all = ratios.iter().cloned().fold(0.0, f64::max);
                            let growth = all / first;
                            if !(growth < *g) {
                                reasons.push(format!("bound ratio grows by {growth:.3} over the sweep (limit {g})"));
                            }
                        }
                    }
                    for c in checks {
                        for r in &rows {
                            match r.extra.get(&c.key) {
                                Some(v) if *v >= c.min => {}
                                Some(v) => reasons.push(format!("{} = {v:.3e} below {} at {}", c.key, c.min, r.parameter)),
                                None => reasons.push(format!("{} missing at {}", c.key, r.parameter)),
                            }
                        }
                    }
                }
                Criterion::RatioStability { max_variation, box_consistency, groups } => {
                    let mut worst = 0.0f64;
                    let mut by_group: Vec<BTreeMap<u64, &Row>> = Vec::new();
                    for g in groups {
                        let gr: Vec<&Row> = rows.iter().copied().filter(|r| &r.group == g).collect();
                        if gr.is_empty() {
                            reasons.push(format!("group `{g}` has no rows"));
                            by_group.push(BTreeMap::new());
                            continue;
                        }
                        let ratios: Vec<f64> = gr.iter().map(|r| r.ratio.unwrap_or(f64::NAN)).collect();
                        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
                        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
                        let var = (max - min) / mean;
                        worst = worst.max(var);
                        if !(var < *max_variation) {
                            reasons.push(format!("ratio variation {var:.4} in `{g}` is not below {max_variation}"));
                        }
                        by_group.push(gr.iter().map(|r| (r.parameter.to_bits(), *r)).collect());
                    }
                    statistic = Some(worst);
                    if let Some((base, rest)) = by_group.split_first() {
                        for (k, other) in rest.iter().enumerate() {
                            let prev = &by_group[k];
                            for (key, row) in other {
                                if let (Some(b), Some(r)) = (base.get(key).and_then(|r| r.ratio), row.ratio) {
                                    let c = rel_change(r, b);
                                    if !(c < *box_consistency) {
                                        reasons.push(format!(
                                            "ratios at {} = {} differ by {c:.4} between `{}` and `{}`",
                                            self.parameter_name, row.parameter, groups[0], groups[k + 1]
                                        ));
                                    }
                                }
                                if let (Some(p), Some(d)) = (prev.get(key).and_then(|r| r.projection_defect), row.projection_defect) {
                                    if !(d < p) {
                                        reasons.push(format!(
                                            "projection defect does not decrease from `{}` to `{}` at {} = {}",
                                            groups[k], groups[k + 1], self.parameter_name, row.parameter
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
                Criterion::BoundRatio { prefix, max_growth } => {
                    let ratios: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.ratio.map(|x| (r.parameter, x))).collect();
                    if ratios.iter().any(|(_, x)| !x.is_finite()) {
                        reasons.push("a bound ratio is not finite".into());
                    }
                    let first = ratios.iter().filter(|(p, _)| p <= prefix).map(|x| x.1).fold(0.0, f64::max);
                    let all = ratios.iter().map(|x| x.1).fold(0.0, f64::max);
                    let growth = all / first;
                    statistic = Some(growth);
                    if !(growth < *max_growth) {
                        reasons.push(format!("max ratio grows by {growth:.4} when the family doubles (limit {max_growth})"));
                    }
                }
            }
        }
        Verdict { pass: reasons.is_empty(), degenerate, scope: self.scope.clone(), reasons, statistic }
    }

    /// True when the stored fit and verdict follow from the stored rows.
    pub fn is_consistent(&self) -> bool {
        self.recompute_fit() == self.fit && self.recompute_verdict() == self.verdict
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn extra_keys(&self) -> Vec<String> {
        let keys: BTreeSet<&String> = self.rows.iter().flat_map(|r| r.extra.keys()).collect();
        keys.into_iter().cloned().collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let keys = self.extra_keys();
        let mut header: Vec<String> = [
            self.parameter_name.as_str(),
            "group",
            "measured",
            "bound",
            "ratio",
            "tail_mass",
            "tail_sensitivity",
            "projection_defect",
            "excluded",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(keys.iter().cloned());
        out.write_record(&header)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![
                format!("{}", r.parameter),
                r.group.clone(),
                format!("{:e}", r.measured),
                opt(r.bound),
                opt(r.ratio),
                format!("{:e}", r.tail_mass),
                opt(r.tail_sensitivity),
                opt(r.projection_defect),
                r.excluded.to_string(),
            ];
            rec.extend(keys.iter().map(|k| opt(r.extra.get(k).copied())));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `<dir>/<name>.json` and `<dir>/<name>.csv`.
    pub fn write_files(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("{}.json", self.name));
        let csvp = dir.join(format!("{}.csv", self.name));
        std::fs::write(&json, self.to_json()? + "\n")?;
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(&csvp, buf)?;
        Ok((json, csvp))
    }

    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("{} [{}]  q = {}  seed = {}\n", self.name, self.experiment, self.q, self.seed));
        let sub = self.rows.iter().any(|r| !r.group.is_empty());
        let mut head = format!("{:>12}", self.parameter_name);
        if sub {
            head.push_str(&format!(" {:>14}", "group"));
        }
        head.push_str(&format!(" {:>13} {:>13} {:>11} {:>10} {:>10}", "measured", "bound", "ratio", "tail_q", "tail_sens"));
        s.push_str(&head);
        s.push('\n');
        let opt = |v: Option<f64>, w: usize| v.map(|x| format!("{x:>w$.4e}")).unwrap_or_else(|| format!("{:>w$}", "-"));
        for r in &self.rows {
            let mut line = format!("{:>12}", format!("{}", r.parameter));
            if sub {
                line.push_str(&format!(" {:>14}", r.group));
            }
            line.push_str(&format!(
                " {:>13.6e} {} {} {:>10.2e} {}",
                r.measured,
                opt(r.bound, 13),
                opt(r.ratio, 11),
                r.tail_mass,
                opt(r.tail_sensitivity, 10)
            ));
            if r.excluded {
                line.push_str("  (excluded)");
            }
            s.push_str(&line);
            s.push('\n');
        }
        if let Some(f) = &self.fit {
            s.push_str(&format!("slope {:.4} +- {:.4} (stderr) over {} points\n", f.slope, f.stderr, f.points));
        }
        let tol = self.predicted.tolerance.map(|t| format!(" +- {t}")).unwrap_or_default();
        match self.predicted.exponent {
            Some(e) => s.push_str(&format!("predicted: {}, exponent {e}{tol}\n", self.predicted.law)),
            None => s.push_str(&format!("predicted: {}\n", self.predicted.law)),
        }
        let v = &self.verdict;
        let mut status = if v.pass { "PASS".to_string() } else { "FAIL".to_string() };
        if v.degenerate {
            status.push_str(" (degenerate)");
        }
        if v.scope == Scope::OutsideProvenScope {
            status.push_str(" [outside proven scope]");
        }
        s.push_str(&format!("verdict: {status}\n"));
        for r in &v.reasons {
            s.push_str(&format!("  - {r}\n"));
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

fn group_suffix(g: &str) -> String {
    if g.is_empty() {
        String::new()
    } else {
        format!(" ({g})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::from_toml(
            "kind = \"smooth_scaling\"\nq = 1.0\nalpha = [4, 8, 16, 32]\n[fixture]\nfamily = \"gaussian_bump\"\n[grid]\nhalf_width = 2.0\nn = 128\n",
        )
        .unwrap()
    }

    fn slope_report(values: &[f64]) -> ScalingReport {
        let rows = [4.0, 8.0, 16.0, 32.0].iter().zip(values).map(|(&a, &v)| Row::new(a, v)).collect();
        ScalingReport::build(
            &cfg(),
            0,
            "alpha",
            rows,
            Predicted { exponent: Some(1.0), law: "alpha^1".into(), tolerance: Some(0.1) },
            Criterion::Slope { exponent: 1.0, tolerance: 0.1, max_ratio_growth: None, checks: vec![] },
            Scope::Proven,
            vec![],
        )
    }

    #[test]
    fn slope_verdicts() {
        assert!(slope_report(&[4.0, 8.0, 16.0, 32.0]).verdict.pass);
        let r = slope_report(&[16.0, 64.0, 256.0, 1024.0]);
        assert!(!r.verdict.pass);
        assert!(r.is_consistent());
    }

    #[test]
    fn zero_rows_are_degenerate_pass() {
        let r = slope_report(&[0.0; 4]);
        assert!(r.verdict.pass && r.verdict.degenerate);
    }

    #[test]
    fn verdict_survives_json_round_trip() {
        let mut r = slope_report(&[4.0, 8.1, 15.9, 32.0]);
        r.rows[0].tail_sensitivity = Some(0.5);
        r.verdict = r.recompute_verdict();
        let back = ScalingReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(back.is_consistent());
        assert!(!back.verdict.pass);
    }

    #[test]
    fn tampered_row_is_detected() {
        let mut r = slope_report(&[4.0, 8.0, 16.0, 32.0]);
        r.rows[3].measured = 1e6;
        assert!(!r.is_consistent());
    }

    #[test]
    fn stability_criterion() {
        let mut rows = Vec::new();
        for (g, scale, defect) in [("small", 1.0, 0.1), ("large", 1.02, 0.05)] {
            for a in [16.0, 32.0, 64.0, 128.0] {
                let mut r = Row::new(a, 0.0);
                r.group = g.into();
                r.ratio = Some(scale * (1.0 + 0.01 * (a as f64).ln()));
                r.measured = r.ratio.unwrap();
                r.projection_defect = Some(defect);
                rows.push(r);
            }
        }
        let crit = Criterion::RatioStability { max_variation: 0.2, box_consistency: 0.1, groups: vec!["small".into(), "large".into()] };
        let pred = Predicted { exponent: None, law: "log alpha".into(), tolerance: None };
        let r = ScalingReport::build(&cfg(), 0, "alpha", rows.clone(), pred.clone(), crit.clone(), Scope::Proven, vec![]);
        assert!(r.verdict.pass, "{:?}", r.verdict.reasons);
        for row in rows.iter_mut().filter(|r| r.group == "large") {
            row.projection_defect = Some(0.2);
        }
        let r = ScalingReport::build(&cfg(), 0, "alpha", rows, pred, crit, Scope::Proven, vec![]);
        assert!(!r.verdict.pass);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = slope_report(&[4.0, 8.0, 16.0, 32.0]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("alpha,group,measured"));
    }
}
