//! Monochrome SVG bar charts for monthly series. Rendering is a pure
//! function of the input: fixed canvas, no timestamps, coordinates rounded
//! to two decimals, so equal inputs give byte-identical documents.

use std::collections::BTreeMap;

use crate::model::YearMonth;
use crate::queries::MonthBucket;
use crate::xml::escape_text;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartSeries {
    pub label: String,
    pub buckets: Vec<MonthBucket>,
}

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 48.0;

/// Series are distinguished by fill, in order: white, black, hatched, then
/// grey shades for anything beyond the third.
fn fill_for(index: usize) -> String {
    match index {
        0 => "#ffffff".to_string(),
        1 => "#000000".to_string(),
        2 => "url(#hatch)".to_string(),
        n => format!("#{0:02x}{0:02x}{0:02x}", 64 + ((n * 48) % 160)),
    }
}

/// Renders monthly series as a bar chart. With `stacked`, segments pile up
/// per month; otherwise series bars sit side by side within the month slot.
/// Empty input (or all-empty series) yields the axes alone.
pub fn render_bar_chart(title: &str, series: &[ChartSeries], stacked: bool) -> String {
    let mut months: Vec<YearMonth> = Vec::new();
    let mut by_series: Vec<BTreeMap<YearMonth, u64>> = Vec::new();
    for s in series {
        let mut map = BTreeMap::new();
        for bucket in &s.buckets {
            if !months.contains(&bucket.month) {
                months.push(bucket.month);
            }
            *map.entry(bucket.month).or_insert(0) += bucket.count;
        }
        by_series.push(map);
    }
    months.sort();

    let max_value: u64 = months
        .iter()
        .map(|m| {
            let values = by_series.iter().map(|s| s.get(m).copied().unwrap_or(0));
            if stacked {
                values.sum()
            } else {
                values.max().unwrap_or(0)
            }
        })
        .max()
        .unwrap_or(0);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let baseline = MARGIN_TOP + plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(
        "  <defs>\n    <pattern id=\"hatch\" width=\"6\" height=\"6\" \
         patternUnits=\"userSpaceOnUse\" patternTransform=\"rotate(45)\">\n      \
         <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#000000\" stroke-width=\"1\"/>\n    \
         </pattern>\n  </defs>\n",
    );
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape_text(title)
    ));
    // axes
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" \
         y2=\"{baseline}\" stroke=\"#000000\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{baseline}\" x2=\"{:.2}\" y2=\"{baseline}\" \
         stroke=\"#000000\"/>\n",
        MARGIN_LEFT + plot_w
    ));

    if max_value > 0 && !months.is_empty() {
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"end\">{max_value}</text>\n",
            MARGIN_LEFT - 4.0,
            MARGIN_TOP + 4.0
        ));
        let slot_w = plot_w / months.len() as f64;
        let scale = plot_h / max_value as f64;
        for (mi, month) in months.iter().enumerate() {
            let slot_x = MARGIN_LEFT + slot_w * mi as f64;
            if stacked {
                let mut y = baseline;
                for (si, values) in by_series.iter().enumerate() {
                    let v = values.get(month).copied().unwrap_or(0);
                    if v == 0 {
                        continue;
                    }
                    let h = v as f64 * scale;
                    y -= h;
                    svg.push_str(&bar(slot_x + slot_w * 0.15, y, slot_w * 0.7, h, si));
                }
            } else {
                let bar_w = slot_w * 0.7 / by_series.len().max(1) as f64;
                for (si, values) in by_series.iter().enumerate() {
                    let v = values.get(month).copied().unwrap_or(0);
                    if v == 0 {
                        continue;
                    }
                    let h = v as f64 * scale;
                    svg.push_str(&bar(
                        slot_x + slot_w * 0.15 + bar_w * si as f64,
                        baseline - h,
                        bar_w,
                        h,
                        si,
                    ));
                }
            }
            // label every slot when few months, else every sixth
            if months.len() <= 16 || mi % 6 == 0 {
                svg.push_str(&format!(
                    "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" \
                     font-size=\"9\" text-anchor=\"middle\">{month}</text>\n",
                    slot_x + slot_w / 2.0,
                    baseline + 14.0
                ));
            }
        }
    }

    // legend
    for (si, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 * si as f64;
        svg.push_str(&format!(
            "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{}\" \
             stroke=\"#000000\"/>\n",
            WIDTH - MARGIN_RIGHT - 150.0,
            y,
            fill_for(si)
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
            WIDTH - MARGIN_RIGHT - 136.0,
            y + 9.0,
            escape_text(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

fn bar(x: f64, y: f64, w: f64, h: f64, series_index: usize) -> String {
    format!(
        "  <rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{}\" \
         stroke=\"#000000\" stroke-width=\"0.5\"/>\n",
        fill_for(series_index)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bucket(year: i32, month: u32, count: u64) -> MonthBucket {
        MonthBucket {
            month: YearMonth::new(year, month),
            count,
        }
    }

    #[test]
    fn rendering_is_byte_identical() {
        let series = vec![
            ChartSeries {
                label: "direct".into(),
                buckets: vec![bucket(2004, 1, 3), bucket(2004, 2, 7)],
            },
            ChartSeries {
                label: "reported-by".into(),
                buckets: vec![bucket(2004, 2, 2)],
            },
        ];
        let a = render_bar_chart("posts", &series, true);
        let b = render_bar_chart("posts", &series, true);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_input_still_draws_axes() {
        let svg = render_bar_chart("empty", &[], false);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<line"));
        assert!(!svg.contains("<rect x")); // no bars, no legend chips
    }

    #[test]
    fn all_zero_series_draws_no_bars() {
        let series = vec![ChartSeries {
            label: "direct".into(),
            buckets: vec![bucket(2004, 1, 0)],
        }];
        let svg = render_bar_chart("zeros", &series, true);
        assert_eq!(svg.matches("height=\"10\"").count(), 1); // legend chip only
        assert!(!svg.contains("stroke-width=\"0.5\"")); // bar rects absent
    }

    #[test]
    fn stacked_bars_cover_the_monthly_total() {
        let series = vec![
            ChartSeries {
                label: "a".into(),
                buckets: vec![bucket(2004, 1, 4)],
            },
            ChartSeries {
                label: "b".into(),
                buckets: vec![bucket(2004, 1, 6)],
            },
        ];
        let svg = render_bar_chart("t", &series, true);
        // two stacked segments, one per series
        assert_eq!(svg.matches("stroke-width=\"0.5\"").count(), 2);
        assert!(svg.contains("url(#hatch)") == false);
        assert!(svg.contains("#ffffff") && svg.contains("#000000"));
    }

    #[test]
    fn third_series_uses_the_hatch_pattern() {
        let series: Vec<ChartSeries> = (0..3)
            .map(|i| ChartSeries {
                label: format!("s{i}"),
                buckets: vec![bucket(2004, 1, 1 + i)],
            })
            .collect();
        let svg = render_bar_chart("t", &series, true);
        assert!(svg.contains("fill=\"url(#hatch)\""));
    }

    #[test]
    fn title_is_escaped() {
        let svg = render_bar_chart("a < b & c", &[], false);
        assert!(svg.contains("a &lt; b &amp; c"));
    }
}
