//! Result files: per-model round CSVs with aggregate rows, per-round
//! figure-data CSVs, the cross-model comparison CSV, and a plain-text
//! rendering of all tables.
//!
//! Layout under the output directory:
//!
//! ```text
//! results/<model>/rounds.csv            round,rmse,mon,tue,wed,thu,fri,time_s
//! results/<model>/round_<i>_perday.csv  day,rmse,ratio
//! results/<model>/round_<i>_forecasts.csv
//! results/<model>/round_<i>_weights.txt (only with --save-weights)
//! results/comparison.csv                model,mean_time_s,mean_ratio,time_rank,ratio_rank
//! results/report.txt
//! ```
//!
//! Metric values are written with the shortest decimal form that parses back
//! to the identical f64, so emitted CSVs round-trip exactly.

use std::path::Path;

use granum_core::models::{ModelId, ModelSpec};

use crate::data::csv::write_string;
use crate::error::{Error, Result};
use crate::experiment::{
    rank_models, summarize, ColumnStats, ComparisonRow, ExperimentOutput, RoundResult, SummaryStats,
};

pub const ROUNDS_HEADER: &str = "round,rmse,mon,tue,wed,thu,fri,time_s";
pub const COMPARISON_HEADER: &str = "model,mean_time_s,mean_ratio,time_rank,ratio_rank";
pub const PERDAY_HEADER: &str = "day,rmse,ratio";
pub const FORECASTS_HEADER: &str = "week_start,p1,p2,p3,p4,p5,a1,a2,a3,a4,a5";

const DAY_NAMES: [&str; 5] = ["mon", "tue", "wed", "thu", "fri"];

fn push_stats_row(
    out: &mut String,
    label: &str,
    pick: impl Fn(&ColumnStats) -> Option<f64>,
    s: &SummaryStats,
) {
    out.push_str(label);
    for col in std::iter::once(&s.rmse).chain(s.days.iter()).chain(std::iter::once(&s.time)) {
        out.push(',');
        if let Some(v) = pick(col) {
            out.push_str(&v.to_string());
        }
    }
    out.push('\n');
}

/// Renders one model's rounds CSV: data rows, then mean/min/max/sd rows,
/// then the rmse-over-mean row.
pub fn rounds_csv(rounds: &[RoundResult], summary: &SummaryStats) -> String {
    let mut out = String::from(ROUNDS_HEADER);
    out.push('\n');
    for r in rounds {
        out.push_str(&r.round.to_string());
        out.push(',');
        out.push_str(&r.eval.overall_rmse.to_string());
        for d in 0..5 {
            out.push(',');
            out.push_str(&r.eval.per_day_rmse[d].to_string());
        }
        out.push(',');
        out.push_str(&r.eval.wall_time_seconds.to_string());
        out.push('\n');
    }
    push_stats_row(&mut out, "mean", |c| Some(c.mean), summary);
    push_stats_row(&mut out, "min", |c| Some(c.min), summary);
    push_stats_row(&mut out, "max", |c| Some(c.max), summary);
    push_stats_row(&mut out, "sd", |c| c.sd, summary);
    // Ratio row: overall and per-day ratios; the time cell stays empty.
    out.push_str("rmse_over_mean,");
    out.push_str(&summary.mean_ratio.to_string());
    for d in 0..5 {
        out.push(',');
        out.push_str(&summary.per_day_mean_ratio[d].to_string());
    }
    out.push_str(",\n");
    out
}

/// Figure data for one round: per-weekday RMSE and ratio.
pub fn perday_csv(round: &RoundResult) -> String {
    let mut out = String::from(PERDAY_HEADER);
    out.push('\n');
    for d in 0..5 {
        out.push_str(&format!(
            "{},{},{}\n",
            DAY_NAMES[d], round.eval.per_day_rmse[d], round.eval.per_day_ratio[d]
        ));
    }
    out
}

/// Per-week forecasts next to actuals for one round.
pub fn forecasts_csv(round: &RoundResult) -> String {
    let mut out = String::from(FORECASTS_HEADER);
    out.push('\n');
    for rec in &round.eval.records {
        out.push_str(&rec.week_start.to_string());
        for v in rec.predicted.iter().chain(rec.actual.iter()) {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.model, r.mean_time, r.mean_ratio, r.time_rank, r.ratio_rank
        ));
    }
    out
}

fn model_blurb(id: ModelId) -> String {
    let spec = ModelSpec::of(id);
    let variate = if spec.is_multivariate() { "multivariate" } else { "univariate" };
    let weeks = if spec.window_days() == 5 { "one-week" } else { "two-week" };
    format!("{variate}, {weeks} input window")
}

/// Plain-text rendering of every model table plus the comparison table.
pub fn render_text(
    per_model: &[(ModelId, Vec<RoundResult>, SummaryStats)],
    comparison: &[ComparisonRow],
) -> String {
    let mut out = String::new();
    out.push_str("granum experiment report\n");
    out.push_str("========================\n");
    for (id, rounds, summary) in per_model {
        out.push_str(&format!("\n{} ({})\n", id.table_name(), model_blurb(*id)));
        out.push_str(&format!(
            "{:<16}{:>10}{:>9}{:>9}{:>9}{:>9}{:>9}{:>10}\n",
            "round", "rmse", "mon", "tue", "wed", "thu", "fri", "time_s"
        ));
        for r in rounds {
            out.push_str(&format!(
                "{:<16}{:>10.4}{:>9.3}{:>9.3}{:>9.3}{:>9.3}{:>9.3}{:>10.2}\n",
                r.round,
                r.eval.overall_rmse,
                r.eval.per_day_rmse[0],
                r.eval.per_day_rmse[1],
                r.eval.per_day_rmse[2],
                r.eval.per_day_rmse[3],
                r.eval.per_day_rmse[4],
                r.eval.wall_time_seconds
            ));
        }
        let mut agg = |label: &str, pick: &dyn Fn(&ColumnStats) -> Option<f64>| {
            out.push_str(&format!("{label:<16}"));
            let cols: Vec<Option<f64>> = std::iter::once(&summary.rmse)
                .chain(summary.days.iter())
                .chain(std::iter::once(&summary.time))
                .map(pick)
                .collect();
            for (i, v) in cols.iter().enumerate() {
                let width = if i == 0 || i == 6 { 10 } else { 9 };
                let prec = if i == 0 {
                    4
                } else if i == 6 {
                    2
                } else {
                    3
                };
                match v {
                    Some(v) => out.push_str(&format!("{v:>width$.prec$}")),
                    None => out.push_str(&format!("{:>width$}", "-")),
                }
            }
            out.push('\n');
        };
        agg("mean", &|c| Some(c.mean));
        agg("min", &|c| Some(c.min));
        agg("max", &|c| Some(c.max));
        agg("sd", &|c| c.sd);
        out.push_str(&format!("{:<16}{:>10.5}", "rmse/mean", summary.mean_ratio));
        for d in 0..5 {
            out.push_str(&format!("{:>9.5}", summary.per_day_mean_ratio[d]));
        }
        out.push_str(&format!("{:>10}\n", "-"));
    }

    out.push_str("\nmodel comparison (lower is better on both metrics)\n");
    out.push_str(&format!(
        "{:<12}{:>12}{:>11}{:>12}{:>12}\n",
        "model", "mean_time_s", "time_rank", "rmse/mean", "ratio_rank"
    ));
    for r in comparison {
        out.push_str(&format!(
            "{:<12}{:>12.2}{:>11}{:>12.5}{:>12}\n",
            r.model.table_name(),
            r.mean_time,
            r.time_rank,
            r.mean_ratio,
            r.ratio_rank
        ));
    }
    out
}

/// Writes the full results directory for one experiment.
pub fn emit_report(output: &ExperimentOutput, out_dir: &Path) -> Result<()> {
    let mut text_input: Vec<(ModelId, Vec<RoundResult>, SummaryStats)> = Vec::new();
    for (id, outcomes, summary) in &output.per_model {
        let model_dir = out_dir.join(id.name());
        let results: Vec<RoundResult> = outcomes.iter().map(|o| o.result.clone()).collect();
        write_string(&model_dir.join("rounds.csv"), &rounds_csv(&results, summary))?;
        for outcome in outcomes {
            let r = &outcome.result;
            write_string(&model_dir.join(format!("round_{}_perday.csv", r.round)), &perday_csv(r))?;
            write_string(
                &model_dir.join(format!("round_{}_forecasts.csv", r.round)),
                &forecasts_csv(r),
            )?;
            if let Some(doc) = &outcome.weights_doc {
                write_string(&model_dir.join(format!("round_{}_weights.txt", r.round)), doc)?;
            }
        }
        text_input.push((*id, results, summary.clone()));
    }
    write_string(&out_dir.join("comparison.csv"), &comparison_csv(&output.comparison))?;
    write_string(&out_dir.join("report.txt"), &render_text(&text_input, &output.comparison))?;
    Ok(())
}

/// Parses a rounds CSV back into its data rows (aggregate rows are
/// recomputed, not trusted).
pub fn parse_rounds_csv(model: ModelId, text: &str) -> Result<Vec<RoundResult>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == ROUNDS_HEADER => {}
        _ => return Err(Error::Persistence("rounds csv missing its header".into())),
    }
    let mut rounds = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.is_empty() || raw.trim().is_empty() {
            continue;
        }
        // Aggregate rows carry labels instead of a round number.
        if fields[0].parse::<usize>().is_err() {
            continue;
        }
        if fields.len() != 8 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let round: usize = fields[0].parse().unwrap();
        let parse = |f: &str, name: &str| -> Result<f64> {
            f.parse::<f64>()
                .map_err(|_| Error::Parse { line, msg: format!("bad {name} value `{f}`") })
        };
        let rmse = parse(fields[1], "rmse")?;
        let mut days = [0.0; 5];
        for d in 0..5 {
            days[d] = parse(fields[2 + d], DAY_NAMES[d])?;
        }
        let time = parse(fields[7], "time_s")?;
        rounds.push(RoundResult {
            model,
            round,
            seed: 0,
            eval: crate::walkforward::EvaluationResult {
                overall_rmse: rmse,
                per_day_rmse: days,
                per_day_ratio: [0.0; 5],
                ratio: 0.0,
                test_mean_open: 0.0,
                wall_time_seconds: time,
                records: Vec::new(),
            },
        });
    }
    if rounds.is_empty() {
        return Err(Error::Data("rounds csv has no data rows".into()));
    }
    Ok(rounds)
}

/// Pulls the stored `rmse_over_mean` aggregate row (overall ratio plus the
/// five per-day ratios) out of a rounds CSV.
pub fn parse_ratio_row(text: &str) -> Result<(f64, [f64; 5])> {
    for (idx, raw) in text.lines().enumerate() {
        let Some(rest) = raw.strip_prefix("rmse_over_mean,") else {
            continue;
        };
        let fields: Vec<&str> = rest.split(',').collect();
        if fields.len() < 6 {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("ratio row has {} fields, expected at least 6", fields.len()),
            });
        }
        let parse = |f: &str| -> Result<f64> {
            f.parse::<f64>()
                .map_err(|_| Error::Parse { line: idx + 1, msg: format!("bad ratio value `{f}`") })
        };
        let overall = parse(fields[0])?;
        let mut days = [0.0; 5];
        for d in 0..5 {
            days[d] = parse(fields[1 + d])?;
        }
        return Ok((overall, days));
    }
    Err(Error::Data("rounds csv has no rmse_over_mean row".into()))
}

pub fn parse_comparison_csv(text: &str) -> Result<Vec<ComparisonRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == COMPARISON_HEADER => {}
        _ => return Err(Error::Persistence("comparison csv missing its header".into())),
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let model = ModelId::from_name(fields[0])
            .ok_or_else(|| Error::Parse { line, msg: format!("unknown model `{}`", fields[0]) })?;
        let mean_time: f64 =
            fields[1].parse().map_err(|_| Error::Parse { line, msg: "bad mean_time_s".into() })?;
        let mean_ratio: f64 =
            fields[2].parse().map_err(|_| Error::Parse { line, msg: "bad mean_ratio".into() })?;
        let time_rank: usize =
            fields[3].parse().map_err(|_| Error::Parse { line, msg: "bad time_rank".into() })?;
        let ratio_rank: usize =
            fields[4].parse().map_err(|_| Error::Parse { line, msg: "bad ratio_rank".into() })?;
        rows.push(ComparisonRow { model, mean_time, mean_ratio, time_rank, ratio_rank });
    }
    Ok(rows)
}

/// Re-renders the text report from the CSVs stored in a results directory.
pub fn rerender_from_dir(dir: &Path) -> Result<String> {
    let comparison_text = crate::data::csv::read_to_string(&dir.join("comparison.csv"))?;
    let comparison = parse_comparison_csv(&comparison_text)?;
    let mut per_model = Vec::new();
    for row in &comparison {
        let path = dir.join(row.model.name()).join("rounds.csv");
        let text = crate::data::csv::read_to_string(&path)?;
        let rounds = parse_rounds_csv(row.model, &text)?;
        let mut summary = summarize(&rounds)?;
        // Per-round ratios are not stored in rounds.csv; splice them back in
        // from the stored rmse_over_mean row.
        let (mean_ratio, per_day) = parse_ratio_row(&text)?;
        summary.mean_ratio = mean_ratio;
        summary.per_day_mean_ratio = per_day;
        per_model.push((row.model, rounds, summary));
    }
    let recomputed = rank_models(
        &per_model.iter().map(|(id, _, s)| (*id, s.time.mean, s.mean_ratio)).collect::<Vec<_>>(),
    );
    Ok(render_text(&per_model, &recomputed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walkforward::EvaluationResult;

    fn round(i: usize, rmse: f64) -> RoundResult {
        RoundResult {
            model: ModelId::Cnn1,
            round: i,
            seed: i as u64,
            eval: EvaluationResult {
                overall_rmse: rmse,
                per_day_rmse: [rmse; 5],
                per_day_ratio: [rmse / 628.53; 5],
                ratio: rmse / 628.53,
                test_mean_open: 628.53,
                wall_time_seconds: 83.42,
                records: vec![crate::walkforward::ForecastRecord {
                    week_start: "2014-01-06".parse().unwrap(),
                    predicted: [1.0, 2.0, 3.0, 4.0, 5.0],
                    actual: [1.5, 2.5, 3.5, 4.5, 5.5],
                }],
            },
        }
    }

    #[test]
    fn rounds_csv_shape_and_round_trip() {
        let rounds: Vec<RoundResult> = (1..=10).map(|i| round(i, 3.5 + i as f64 * 0.1)).collect();
        let summary = summarize(&rounds).unwrap();
        let text = rounds_csv(&rounds, &summary);
        // Header + 10 data rows + mean/min/max/sd + rmse_over_mean.
        assert_eq!(text.lines().count(), 1 + 10 + 4 + 1);
        let parsed = parse_rounds_csv(ModelId::Cnn1, &text).unwrap();
        assert_eq!(parsed.len(), 10);
        for (p, r) in parsed.iter().zip(&rounds) {
            assert_eq!(p.eval.overall_rmse.to_bits(), r.eval.overall_rmse.to_bits());
            assert_eq!(p.eval.wall_time_seconds.to_bits(), r.eval.wall_time_seconds.to_bits());
            for d in 0..5 {
                assert_eq!(p.eval.per_day_rmse[d].to_bits(), r.eval.per_day_rmse[d].to_bits());
            }
        }
    }

    #[test]
    fn perday_csv_has_five_rows() {
        let text = perday_csv(&round(5, 4.0));
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("day,rmse,ratio\nmon,"));
    }

    #[test]
    fn comparison_round_trips_and_reranks_to_itself() {
        let rows = rank_models(&crate::experiment::fixtures::published_comparison());
        let text = comparison_csv(&rows);
        let parsed = parse_comparison_csv(&text).unwrap();
        assert_eq!(parsed, rows);
        // Re-ranking the parsed payload reproduces the same ranks.
        let reranked = rank_models(
            &parsed.iter().map(|r| (r.model, r.mean_time, r.mean_ratio)).collect::<Vec<_>>(),
        );
        assert_eq!(reranked, rows);
    }

    #[test]
    fn text_report_is_deterministic() {
        let rounds: Vec<RoundResult> = (1..=3).map(|i| round(i, 4.0)).collect();
        let summary = summarize(&rounds).unwrap();
        let comparison = rank_models(&[(ModelId::Cnn1, 83.42, 0.0066)]);
        let per_model = vec![(ModelId::Cnn1, rounds, summary)];
        let a = render_text(&per_model, &comparison);
        let b = render_text(&per_model, &comparison);
        assert_eq!(a, b);
        assert!(a.contains("CNN #1"));
    }
}
