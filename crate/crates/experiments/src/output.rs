//! CSV tables and SVG line charts of a finished sweep.

use std::io::Write;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::scenario::OutputGroup;
use crate::sweep::{PointOutcome, SweepTable};

/// CSV header, in column order.
pub const COLUMNS: [&str; 14] = [
    "sweep_value",
    "region",
    "p_A_alpha",
    "p_A_beta",
    "p_B_beta",
    "p_B_alpha",
    "xi_alpha",
    "xi_beta",
    "prob_stay_alpha",
    "prob_stay_beta",
    "share_A",
    "profit_A",
    "profit_B",
    "error",
];

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped,
/// exponent form outside `[1e-5, 1e12)`. Negative zero prints as `0`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn record(value: f64, outcome: &Result<PointOutcome, String>) -> Vec<String> {
    let mut r = vec![format_number(value)];
    match outcome {
        Ok(o) => {
            r.push(o.region.clone().unwrap_or_default());
            r.extend(
                [
                    o.prices.a_alpha,
                    o.prices.a_beta,
                    o.prices.b_beta,
                    o.prices.b_alpha,
                    o.xi_alpha,
                    o.xi_beta,
                    o.prob_stay_alpha,
                    o.prob_stay_beta,
                    o.share_a,
                    o.profit_a,
                    o.profit_b,
                ]
                .map(format_number),
            );
            r.push(String::new());
        }
        Err(e) => {
            r.extend(std::iter::repeat_n(String::new(), COLUMNS.len() - 2));
            r.push(e.clone());
        }
    }
    r
}

pub fn write_csv<W: Write>(table: &SweepTable, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(COLUMNS)?;
    for row in &table.rows {
        w.write_record(record(row.sweep_value, &row.outcome))?;
    }
    w.flush()?;
    Ok(())
}

/// Chart files drawn for one output group, as `(file suffix, series)`.
fn chart_files(group: OutputGroup) -> Vec<(&'static str, &'static str, Vec<Series>)> {
    use Series::*;
    match group {
        OutputGroup::Prices => vec![
            (
                "prices_alpha",
                "price (alpha sub-market)",
                vec![PriceAAlpha, PriceBAlpha],
            ),
            ("prices_beta", "price (beta sub-market)", vec![PriceBBeta, PriceABeta]),
        ],
        OutputGroup::Shares => vec![("shares", "market share", vec![ShareA, ShareB])],
        OutputGroup::Profits => vec![("profits", "profit", vec![ProfitA, ProfitB])],
        OutputGroup::Probabilities => vec![("probabilities", "probability of purchase", vec![StayAlpha, StayBeta])],
        OutputGroup::RegionLabels => vec![],
    }
}

#[derive(Debug, Clone, Copy)]
enum Series {
    PriceAAlpha,
    PriceBAlpha,
    PriceBBeta,
    PriceABeta,
    ShareA,
    ShareB,
    ProfitA,
    ProfitB,
    StayAlpha,
    StayBeta,
}

impl Series {
    fn label(self) -> &'static str {
        match self {
            Series::PriceAAlpha => "p_A^alpha",
            Series::PriceBAlpha => "p_B^alpha",
            Series::PriceBBeta => "p_B^beta",
            Series::PriceABeta => "p_A^beta",
            Series::ShareA => "firm A",
            Series::ShareB => "firm B",
            Series::ProfitA => "firm A",
            Series::ProfitB => "firm B",
            Series::StayAlpha => "alpha customers buy from A",
            Series::StayBeta => "beta customers buy from B",
        }
    }

    fn value(self, o: &PointOutcome) -> f64 {
        match self {
            Series::PriceAAlpha => o.prices.a_alpha,
            Series::PriceBAlpha => o.prices.b_alpha,
            Series::PriceBBeta => o.prices.b_beta,
            Series::PriceABeta => o.prices.a_beta,
            Series::ShareA => o.share_a,
            Series::ShareB => 1.0 - o.share_a,
            Series::ProfitA => o.profit_a,
            Series::ProfitB => o.profit_b,
            Series::StayAlpha => o.prob_stay_alpha,
            Series::StayBeta => o.prob_stay_beta,
        }
    }
}

/// Runs of consecutive successful points, so failures show as gaps.
fn segments(table: &SweepTable, series: Series) -> Vec<Vec<(f64, f64)>> {
    let mut out = vec![];
    let mut cur = vec![];
    for row in &table.rows {
        match &row.outcome {
            Ok(o) => cur.push((row.sweep_value, series.value(o))),
            Err(_) if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            Err(_) => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn draw(table: &SweepTable, path: &Path, quantity: &str, series: &[Series]) -> Result<()> {
    let fail = |e: &dyn std::fmt::Display| Error::Chart {
        path: path.into(),
        reason: e.to_string(),
    };
    let range = &table.scenario.sweep;
    let all: Vec<Vec<Vec<(f64, f64)>>> = series.iter().map(|s| segments(table, *s)).collect();
    let ys = all.iter().flatten().flatten().map(|p| p.1);
    let (mut lo, mut hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| fail(&e))?;
    let title = format!("{} ({})", table.scenario.name, table.scenario.setting);
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(44)
        .y_label_area_size(64)
        .build_cartesian_2d(range.lo..range.hi, (lo - pad)..(hi + pad))
        .map_err(|e| fail(&e))?;
    chart
        .configure_mesh()
        .x_desc(range.variable.column_label())
        .y_desc(quantity)
        .draw()
        .map_err(|e| fail(&e))?;
    for (k, (s, segs)) in series.iter().zip(&all).enumerate() {
        let color = Palette99::pick(k).to_rgba();
        for (i, seg) in segs.iter().enumerate() {
            let drawn = chart
                .draw_series(LineSeries::new(seg.iter().copied(), color.stroke_width(2)))
                .map_err(|e| fail(&e))?;
            if i == 0 {
                drawn
                    .label(s.label())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
            }
        }
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| fail(&e))?;
    root.present().map_err(|e| fail(&e))?;
    Ok(())
}

/// Write `<name>.csv` and one SVG per chart of every requested output group
/// into `dir`, creating it if needed. Returns the written paths.
pub fn emit_outputs(table: &SweepTable, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = &table.scenario.name;
    let csv_path = dir.join(format!("{name}.csv"));
    let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_csv(table, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(&csv_path, io),
        other => Error::io(&csv_path, std::io::Error::other(format!("{other:?}"))),
    })?;
    let mut written = vec![csv_path];
    let mut seen = vec![];
    for &group in &table.scenario.outputs {
        if seen.contains(&group) {
            continue;
        }
        seen.push(group);
        for (suffix, quantity, series) in chart_files(group) {
            let path = dir.join(format!("{name}_{suffix}.svg"));
            draw(table, &path, quantity, &series)?;
            written.push(path);
        }
    }
    Ok(written)
}
