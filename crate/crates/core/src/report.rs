//! Rendering of experiment reports as markdown and CSV, and the JSON
//! helpers that carry NaN through `null`.

use std::fmt::Write as _;

use crate::boruta::FeatureDecision;
use crate::evaluation::{EvaluationSection, ExperimentReport, Metric, Phase, PhaseComparisons, Verdict};

/// Serializes a non-finite `f64` as `null` and reads `null` back as NaN.
pub mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// [`nullable`] for vectors.
pub mod nullable_vec {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.is_finite().then_some(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Option<f64>>::deserialize(d)?
            .into_iter()
            .map(|x| x.unwrap_or(f64::NAN))
            .collect())
    }
}

fn fixed(v: f64, decimals: usize) -> String {
    if v.is_finite() {
        format!("{v:.decimals$}")
    } else {
        "n/a".to_string()
    }
}

fn percent(v: f64) -> String {
    if v.is_finite() {
        format!("{:.2} %", v * 100.0)
    } else {
        "n/a".to_string()
    }
}

fn metric_cell(metric: Metric, v: f64) -> String {
    match metric {
        Metric::Accuracy => percent(v),
        Metric::Rmse | Metric::WeightedAuc => fixed(v, 2),
    }
}

fn metric_value(m: &crate::evaluation::ModelSummary, metric: Metric) -> f64 {
    match metric {
        Metric::Accuracy => m.accuracy,
        Metric::Rmse => m.rmse,
        Metric::WeightedAuc => m.weighted_auc,
    }
}

fn table_row(cells: &[String]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

fn metrics_table(out: &mut String, section: &EvaluationSection) {
    let mut header = vec!["Metric".to_string()];
    header.extend(section.models.iter().map(|m| m.name.clone()));
    out.push_str(&table_row(&header));
    out.push_str(&table_row(&vec!["---".to_string(); header.len()]));
    for metric in Metric::ALL {
        let mut row = vec![metric.label().to_string()];
        row.extend(
            section
                .models
                .iter()
                .map(|m| metric_cell(metric, metric_value(m, metric))),
        );
        out.push_str(&table_row(&row));
    }
}

/// Pairwise verdicts per metric. A cell names the better model of the
/// row/column pair, or holds `=` when the difference is not significant.
fn significance(out: &mut String, section: &EvaluationSection, cmp: &PhaseComparisons) {
    let names: Vec<&str> = section.models.iter().map(|m| m.name.as_str()).collect();
    let _ = writeln!(
        out,
        "Corrected paired t-test, {} × {}-fold, alpha {}. `+`: row model better, `-`: column model better, `=`: no significant difference.\n",
        cmp.ttest_repeats, section.k, cmp.alpha
    );
    for metric in Metric::ALL {
        let _ = writeln!(out, "**{}**\n", metric.label());
        let mut header = vec![String::new()];
        header.extend(names.iter().map(|n| n.to_string()));
        out.push_str(&table_row(&header));
        out.push_str(&table_row(&vec!["---".to_string(); header.len()]));
        for a in &names {
            let mut row = vec![a.to_string()];
            for b in &names {
                let cell = if a == b {
                    "".to_string()
                } else {
                    let found = cmp.results.iter().find(|r| {
                        r.metric == metric
                            && ((r.model_a == *a && r.model_b == *b) || (r.model_a == *b && r.model_b == *a))
                    });
                    match found {
                        None => "n/a".to_string(),
                        Some(r) => {
                            let row_is_a = r.model_a == *a;
                            match (r.verdict, row_is_a) {
                                (Verdict::NoSignificantDifference, _) => "=".to_string(),
                                (Verdict::ABetter, true) | (Verdict::BBetter, false) => "+".to_string(),
                                _ => "-".to_string(),
                            }
                        }
                    }
                };
                row.push(cell);
            }
            out.push_str(&table_row(&row));
        }
        out.push('\n');
    }
}

fn phase_comparisons(report: &ExperimentReport, phase: Phase) -> Option<&PhaseComparisons> {
    report.comparisons.iter().find(|c| c.phase == phase)
}

fn decision_label(d: FeatureDecision) -> &'static str {
    match d {
        FeatureDecision::Confirmed => "Confirmed",
        FeatureDecision::Tentative => "Tentative",
        FeatureDecision::Rejected => "Rejected",
    }
}

pub fn render_markdown(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let ds = &report.dataset_summary;
    let _ = writeln!(out, "# Experiment report: {}\n", ds.name);
    let _ = writeln!(
        out,
        "{} instances, {} predictors, {} classes.\n",
        ds.n_instances, ds.n_predictors, ds.n_classes
    );

    let e1 = &report.evaluation_1;
    let _ = writeln!(out, "## Evaluation 1: all attributes\n");
    let _ = writeln!(out, "{}-fold cross-validation, {} repeat(s).\n", e1.k, e1.repeats);
    metrics_table(&mut out, e1);
    out.push('\n');
    if let Some(cmp) = phase_comparisons(report, Phase::Evaluation1) {
        let _ = writeln!(out, "### Significance\n");
        significance(&mut out, e1, cmp);
    }

    if let Some(sel) = &report.selection {
        let _ = writeln!(out, "## Feature selection\n");
        let _ = writeln!(
            out,
            "Boruta confirmed {} of {} predictors ({} tentative, {} rejected) in {} runs; reduction {:.1} %.\n",
            sel.confirmed,
            sel.n_predictors,
            sel.tentative,
            sel.rejected,
            sel.runs_completed,
            sel.reduction * 100.0
        );
        if let Some(err) = &sel.error {
            let _ = writeln!(out, "Evaluation 2 skipped: {err}.\n");
        }
        out.push_str(&table_row(
            &["Attribute", "Decision", "Hits", "Z"].map(String::from),
        ));
        out.push_str(&table_row(&vec!["---".to_string(); 4]));
        for a in &sel.attributes {
            out.push_str(&table_row(&[
                a.name.clone(),
                decision_label(a.decision).to_string(),
                a.hits.to_string(),
                fixed(a.z_score, 3),
            ]));
        }
        out.push('\n');
    }

    if let Some(e2) = &report.evaluation_2 {
        let _ = writeln!(out, "## Evaluation 2: selected attributes\n");
        let _ = writeln!(
            out,
            "{} predictors, {}-fold cross-validation, {} repeat(s).\n",
            e2.n_predictors, e2.k, e2.repeats
        );
        metrics_table(&mut out, e2);
        out.push('\n');
        if let Some(cmp) = phase_comparisons(report, Phase::Evaluation2) {
            let _ = writeln!(out, "### Significance\n");
            significance(&mut out, e2, cmp);
        }
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

/// One line per (phase, model) with full-precision means.
pub fn render_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("phase,model,algorithm,n_predictors,accuracy,rmse,weighted_auc\n");
    let sections = [
        ("evaluation_1", Some(&report.evaluation_1)),
        ("evaluation_2", report.evaluation_2.as_ref()),
    ];
    for (phase, section) in sections {
        let Some(section) = section else { continue };
        for m in &section.models {
            let num = |v: f64| {
                if v.is_finite() {
                    v.to_string()
                } else {
                    String::new()
                }
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                phase,
                csv_field(&m.name),
                csv_field(&m.algorithm),
                section.n_predictors,
                num(m.accuracy),
                num(m.rmse),
                num(m.weighted_auc)
            );
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{DatasetSummary, FoldValues, ModelSummary};

    fn report(models: &[(&str, f64, f64, f64)]) -> ExperimentReport {
        let section = EvaluationSection {
            n_predictors: 3,
            predictors: vec!["a".into(), "b".into(), "c".into()],
            k: 10,
            repeats: 1,
            models: models
                .iter()
                .map(|&(n, acc, rmse, auc)| ModelSummary {
                    name: n.into(),
                    algorithm: n.into(),
                    accuracy: acc,
                    rmse,
                    weighted_auc: auc,
                    folds: FoldValues {
                        accuracy: vec![acc],
                        rmse: vec![rmse],
                        weighted_auc: vec![auc],
                    },
                })
                .collect(),
        };
        ExperimentReport {
            schema_version: 1,
            dataset_summary: DatasetSummary {
                name: "toy".into(),
                n_instances: 10,
                n_predictors: 3,
                n_classes: 2,
                class_levels: vec!["x".into(), "y".into()],
                class_counts: vec![5, 5],
            },
            evaluation_1: section,
            evaluation_2: None,
            selection: None,
            comparisons: vec![],
        }
    }

    #[test]
    fn table_precision() {
        let md = render_markdown(&report(&[("Random Forest", 0.83281, 0.1749, 0.9612)]));
        assert!(md.contains("| Metric | Random Forest |"));
        assert!(md.contains("| Accuracy | 83.28 % |"));
        assert!(md.contains("| RMSE | 0.17 |"));
        assert!(md.contains("| ROC | 0.96 |"));
    }

    #[test]
    fn nan_round_trips_through_null() {
        let r = report(&[("nb", 0.5, 0.5, f64::NAN)]);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"weighted_auc\":null"));
        let back: ExperimentReport = serde_json::from_str(&json).unwrap();
        assert!(back.evaluation_1.models[0].weighted_auc.is_nan());
        assert_eq!(render_markdown(&back), render_markdown(&r));
        assert!(render_markdown(&r).contains("| ROC | n/a |"));
    }

    #[test]
    fn csv_lines() {
        let csv = render_csv(&report(&[("a,b", 0.25, 0.5, 0.75)]));
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "evaluation_1,\"a,b\",\"a,b\",3,0.25,0.5,0.75"
        );
    }
}
