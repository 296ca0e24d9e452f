//! Error-versus-k plots from a cross-validation report, written as plain SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::CliError;

/// One plotted curve: `(k, value)` pairs sorted by `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Mean rows of a report, grouped per channel into `method eps_rom` and
/// `method eps_proj` series.
pub fn series_from_report(
    name: &str,
    bytes: &[u8],
) -> Result<BTreeMap<String, Vec<Series>>, CliError> {
    let mut r = csv::Reader::from_reader(bytes);
    let parse_err = |line: u64, msg: String| CliError::Parse {
        path: name.to_string(),
        line,
        msg,
    };
    let headers = r
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let col = |h: &str| {
        headers
            .iter()
            .position(|x| x == h)
            .ok_or_else(|| parse_err(1, format!("missing column '{h}'")))
    };
    let (c_method, c_fold, c_k, c_channel, c_rom, c_proj) = (
        col("method")?,
        col("fold")?,
        col("k")?,
        col("channel")?,
        col("eps_rom")?,
        col("eps_proj")?,
    );

    let mut curves: BTreeMap<(String, String, &'static str), Vec<(f64, f64)>> = BTreeMap::new();
    let mut rows = 0;
    for rec in r.records() {
        let rec =
            rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows += 1;
        if &rec[c_fold] != "mean" {
            continue;
        }
        let num = |c: usize| {
            rec[c]
                .trim()
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("bad number '{}'", &rec[c])))
        };
        let k = num(c_k)?;
        for (c, what) in [(c_rom, "eps_rom"), (c_proj, "eps_proj")] {
            curves
                .entry((rec[c_channel].to_string(), rec[c_method].to_string(), what))
                .or_default()
                .push((k, num(c)?));
        }
    }
    if rows == 0 {
        return Err(parse_err(1, "report has no rows".into()));
    }
    if curves.is_empty() {
        return Err(parse_err(1, "report has no mean rows".into()));
    }
    let mut out: BTreeMap<String, Vec<Series>> = BTreeMap::new();
    for ((channel, method, what), mut points) in curves {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.entry(channel).or_default().push(Series {
            label: format!("{method} {what}"),
            points,
        });
    }
    Ok(out)
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

/// Decades covering every positive value: `(lo, hi)` exponents of ten.
pub fn log_decades(values: impl Iterator<Item = f64>) -> Option<(i32, i32)> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| *v > 0.0 && v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return None;
    }
    let a = lo.log10().floor() as i32;
    let b = (hi.log10().ceil() as i32).max(a + 1);
    Some((a, b))
}

/// Log-scale y, linear x. Nonpositive values cannot be placed on the log
/// axis and are left out of their polyline.
pub fn render_svg(title: &str, series: &[Series]) -> Result<String, CliError> {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (d_lo, d_hi) = log_decades(all().map(|p| p.1))
        .ok_or_else(|| CliError::usage(format!("{title}: no positive values to plot")))?;
    let (mut k_lo, mut k_hi) = all().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
        (a.min(p.0), b.max(p.0))
    });
    if k_lo == k_hi {
        k_lo -= 1.0;
        k_hi += 1.0;
    }
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let x = |k: f64| LEFT + (k - k_lo) / (k_hi - k_lo) * pw;
    let y = |v: f64| TOP + (d_hi as f64 - v.log10()) / (d_hi - d_lo) as f64 * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#,
        LEFT + pw / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for d in d_lo..=d_hi {
        let ty = y(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line class="ytick" x1="{LEFT}" y1="{ty:.2}" x2="{:.2}" y2="{ty:.2}" stroke="#ddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            LEFT - 6.0,
            ty + 4.0
        );
    }
    let mut ks: Vec<f64> = all().map(|p| p.0).collect();
    ks.sort_by(|a, b| a.total_cmp(b));
    ks.dedup();
    let step = ks.len().div_ceil(10).max(1);
    for k in ks.iter().step_by(step) {
        let tx = x(*k);
        let _ = writeln!(
            s,
            r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{k}</text>"#,
            TOP + ph + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">k</text>"#,
        LEFT + pw / 2.0,
        H - 10.0
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = if ser.label.ends_with("eps_proj") {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.1 > 0.0 && p.1.is_finite())
            .map(|&(k, v)| format!("{:.2},{:.2}", x(k), y(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        );
        let ly = TOP + 14.0 + i as f64 * 18.0;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// The plotted numbers as `series,k,value` rows.
pub fn companion_csv(series: &[Series]) -> String {
    let mut s = String::from("series,k,value\n");
    for ser in series {
        for (k, v) in &ser.points {
            let _ = writeln!(s, "{},{k},{v:e}", ser.label);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decades_cover_range() {
        assert_eq!(log_decades([3e-4, 0.2].into_iter()), Some((-4, 0)));
        assert_eq!(log_decades([1e-2].into_iter()), Some((-2, -1)));
        assert_eq!(log_decades([0.0, -1.0].into_iter()), None);
    }
}
