//! Validation-based hyperparameter selection and the test-set report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{HarnessError, Result};
use crate::sweep::{CsvRow, Record};

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub config_id: String,
    pub mean_true_loss: f64,
    /// Number of records averaged.
    pub count: usize,
}

/// Picks the config with the smallest mean true loss over all of its
/// records; ties go to the lexicographically smallest config id. Failed runs
/// (`None` entries) are skipped, but a successful run without a true loss is
/// an error.
pub fn select<'a, I>(records: I) -> Result<Selection>
where
    I: IntoIterator<Item = (&'a str, Option<Option<f64>>)>,
{
    let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (id, outcome) in records {
        let Some(true_loss) = outcome else { continue };
        let t = true_loss.ok_or_else(|| HarnessError::MissingTrueLoss(id.to_owned()))?;
        let e = sums.entry(id).or_default();
        e.0 += t;
        e.1 += 1;
    }
    let mut best: Option<Selection> = None;
    for (id, (sum, count)) in sums {
        let mean = sum / count as f64;
        if best.as_ref().is_none_or(|b| mean < b.mean_true_loss) {
            best = Some(Selection { config_id: id.to_owned(), mean_true_loss: mean, count });
        }
    }
    best.ok_or(HarnessError::NoRecords)
}

pub fn select_records(records: &[Record]) -> Result<Selection> {
    select(records.iter().map(|r| (r.config_id.as_str(), r.outcome.as_ref().ok().map(|o| o.report.true_loss))))
}

pub fn select_rows(rows: &[CsvRow]) -> Result<Selection> {
    select(rows.iter().map(|r| {
        let id = r.get("config_id").unwrap_or("");
        (id, r.is_ok().then(|| r.f64("true_loss")))
    }))
}

/// Mean BER/δ and equivalent 1-D order of one config on one dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub ber_rel: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub datasets: Vec<String>,
    /// The selected config on each dataset.
    pub new: Vec<Option<Cell>>,
    /// The best config in hindsight on each dataset.
    pub best: Vec<Cell>,
}

impl TestReport {
    pub fn from_rows(rows: &[CsvRow], selected: &str) -> Result<Self> {
        // dataset -> config -> (sum, count, k)
        let mut table: BTreeMap<String, BTreeMap<String, (f64, usize, usize)>> = BTreeMap::new();
        for r in rows.iter().filter(|r| r.is_ok()) {
            let (Some(id), Some(ber), Ok(ds)) = (r.get("config_id"), r.f64("ber_rel"), r.dataset()) else {
                continue;
            };
            let k = r.get("k").and_then(|v| v.parse().ok()).unwrap_or(0);
            let e = table.entry(ds.label()).or_default().entry(id.to_owned()).or_insert((0.0, 0, k));
            e.0 += ber;
            e.1 += 1;
        }
        if table.is_empty() {
            return Err(HarnessError::NoRecords);
        }
        let mut report = TestReport { datasets: Vec::new(), new: Vec::new(), best: Vec::new() };
        for (ds, configs) in table {
            let cell = |&(sum, count, k): &(f64, usize, usize)| Cell { ber_rel: sum / count as f64, k };
            let mut best: Option<Cell> = None;
            for v in configs.values() {
                let c = cell(v);
                if best.is_none_or(|b| c.ber_rel < b.ber_rel) {
                    best = Some(c);
                }
            }
            report.new.push(configs.get(selected).map(cell));
            report.best.push(best.expect("non-empty"));
            report.datasets.push(ds);
        }
        Ok(report)
    }

    /// Plain-text table with one column per test dataset.
    pub fn render(&self) -> String {
        let fmt = |c: &Cell| format!("{:.3} (k={})", c.ber_rel, c.k);
        let mut rows = vec![vec!["Models".to_string()]];
        rows[0].extend(self.datasets.iter().cloned());
        let mut new = vec!["New".to_string()];
        new.extend(self.new.iter().map(|c| c.as_ref().map_or_else(|| "-".into(), fmt)));
        let mut best = vec!["Best (cf.)".to_string()];
        best.extend(self.best.iter().map(fmt));
        rows.push(new);
        rows.push(best);
        let widths: Vec<usize> =
            (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (i, r) in rows.iter().enumerate() {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(s, &w)| format!("{s:<w$}")).collect();
            let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                let _ = writeln!(out, "{}", rule.join("-|-"));
            }
        }
        let pairs: Vec<(f64, f64)> =
            self.new.iter().zip(&self.best).filter_map(|(n, b)| n.map(|n| (n.ber_rel, b.ber_rel))).collect();
        if !pairs.is_empty() {
            let mean = |f: fn(&(f64, f64)) -> f64| pairs.iter().map(f).sum::<f64>() / pairs.len() as f64;
            let (n, b) = (mean(|p| p.0), mean(|p| p.1));
            if b > 0.0 {
                let _ = writeln!(out, "New vs Best (cf.), mean BER/delta: {n:.3} vs {b:.3} ({:+.1}%)", 100.0 * (n / b - 1.0));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_smallest_mean_and_breaks_ties_by_id() {
        let recs = [("b", Some(Some(0.03))), ("a", Some(Some(0.02))), ("a", Some(Some(0.02)))];
        let s = select(recs.iter().map(|&(i, t)| (i, t))).unwrap();
        assert_eq!((s.config_id.as_str(), s.count), ("a", 2));
        let tie = [("z", Some(Some(0.1))), ("m", Some(Some(0.1)))];
        assert_eq!(select(tie.iter().map(|&(i, t)| (i, t))).unwrap().config_id, "m");
        let single = [("only", Some(Some(0.5)))];
        assert_eq!(select(single.iter().map(|&(i, t)| (i, t))).unwrap().config_id, "only");
    }

    #[test]
    fn missing_true_loss_is_an_error() {
        let recs = [("a", Some(None))];
        assert!(matches!(select(recs.iter().map(|&(i, t)| (i, t))), Err(HarnessError::MissingTrueLoss(_))));
        let failed = [("a", None), ("b", Some(Some(0.2)))];
        assert_eq!(select(failed.iter().map(|&(i, t)| (i, t))).unwrap().config_id, "b");
        assert!(matches!(select(std::iter::empty()), Err(HarnessError::NoRecords)));
    }
}
