//! Test report rendering: a structured plain-text block for the terminal
//! and a versioned single-object JSON document for machines.

use relcor_core::inference::TestReport;
use serde_json::{json, Value};

use crate::fmt_f64;

pub const REPORT_SCHEMA: &str = "relcor-test-report-v1";

fn fmt_maybe_infinite(v: f64) -> String {
    if v.is_finite() {
        fmt_f64(v)
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn render_text(r: &TestReport) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(&format!("{k:<22}{v}\n"));
    };
    line("report", REPORT_SCHEMA.to_string());
    line("n", r.n.to_string());
    line("measure", r.measure.to_string());
    line("direction", r.direction.to_string());
    line("delta", fmt_f64(r.delta));
    line("alpha", fmt_f64(r.alpha));
    line("estimate", fmt_f64(r.estimate));
    line("normalizer", fmt_f64(r.normalizer));
    line("statistic", fmt_maybe_infinite(r.statistic));
    line("quantile_used", fmt_f64(r.quantile_used));
    line("decision", r.decision.to_string());
    line("delta_hat", fmt_f64(r.delta_hat));
    line("delta_hat_sim", fmt_f64(r.delta_hat_sim));
    match r.ci {
        Some((lo, hi)) => line("ci", format!("[{}, {}]", fmt_f64(lo), fmt_f64(hi))),
        None => line("ci", "unavailable (table lacks alpha/2 rows)".to_string()),
    }
    if let Some((lo, hi)) = r.ci_clamped {
        line("ci_clamped", format!("[{}, {}]", fmt_f64(lo), fmt_f64(hi)));
    }
    line(
        "degenerate_normalizer",
        r.degenerate_normalizer.to_string(),
    );
    line("delta_zero_flagged", r.delta_zero_flagged.to_string());
    line("quantile_table_id", r.quantile_table_id.clone());
    out
}

/// JSON representation; an infinite statistic is encoded as the string
/// `"inf"` / `"-inf"` since JSON numbers cannot carry it.
fn json_maybe_infinite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn render_json(r: &TestReport) -> Value {
    json!({
        "schema": REPORT_SCHEMA,
        "n": r.n,
        "measure": r.measure.to_string(),
        "direction": r.direction.to_string(),
        "delta": r.delta,
        "alpha": r.alpha,
        "estimate": r.estimate,
        "normalizer": r.normalizer,
        "statistic": json_maybe_infinite(r.statistic),
        "quantile_used": r.quantile_used,
        "decision": r.decision.to_string(),
        "delta_hat": r.delta_hat,
        "delta_hat_sim": r.delta_hat_sim,
        "ci": r.ci.map(|(lo, hi)| json!([lo, hi])),
        "ci_clamped": r.ci_clamped.map(|(lo, hi)| json!([lo, hi])),
        "degenerate_normalizer": r.degenerate_normalizer,
        "delta_zero_flagged": r.delta_zero_flagged,
        "quantile_table_id": r.quantile_table_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use relcor_core::inference::{relevant_test, Measure};
    use relcor_core::metric::PairedSample;
    use relcor_core::pivotal::quantile_table;
    use relcor_core::sequential::GammaMeasure;

    fn sample_report() -> TestReport {
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).sin()).collect();
        let ys: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3 + 0.4).sin()).collect();
        let s = PairedSample::scalar(&xs, &ys).unwrap();
        let table =
            quantile_table(&GammaMeasure::default(), 10_000, &[0.025, 0.05, 0.95, 0.975], 1)
                .unwrap();
        relevant_test(&s, 0.2, 0.05, &table, Measure::Dcor).unwrap()
    }

    #[test]
    fn text_report_has_every_field() {
        let text = render_text(&sample_report());
        for key in [
            "n", "measure", "direction", "delta", "alpha", "estimate", "normalizer",
            "statistic", "quantile_used", "decision", "delta_hat", "delta_hat_sim", "ci",
            "quantile_table_id",
        ] {
            assert!(text.contains(key), "missing {key} in:\n{text}");
        }
    }

    #[test]
    fn json_report_schema() {
        let r = sample_report();
        let v = render_json(&r);
        assert_eq!(v["schema"], REPORT_SCHEMA);
        assert_eq!(v["n"], 40);
        assert_eq!(v["measure"], "dcor");
        assert!(v["statistic"].is_number());
        assert!(v["ci"].is_array());
        // exact f64 round trip through serde_json
        assert_eq!(v["estimate"].as_f64().unwrap(), r.estimate);
    }

    #[test]
    fn infinite_statistic_encodes_as_string() {
        let mut r = sample_report();
        r.statistic = f64::INFINITY;
        let v = render_json(&r);
        assert_eq!(v["statistic"], "inf");
        assert!(render_text(&r).contains("statistic             inf"));
    }
}
