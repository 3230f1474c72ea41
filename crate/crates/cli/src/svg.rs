//! Standalone SVG 1.1 scatter plots of 2-D embeddings.

use std::fmt::Write;

use gtsa_core::linalg::Matrix;

use crate::error::{CliError, ErrorKind};

pub const PALETTE: [&str; 20] = [
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c", "#98df8a", "#d62728", "#ff9896",
    "#9467bd", "#c5b0d5", "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f", "#c7c7c7",
    "#bcbd22", "#dbdb8d", "#17becf", "#9edae5",
];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const RADIUS: f64 = 3.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Data range widened by 5% of its span on each side.
fn padded_range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    let span = hi - lo;
    if span > 0.0 {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Distinct labels, numerically ordered when all are integers.
fn ordered_labels(labels: &[String]) -> Vec<&str> {
    let mut uniq: Vec<&str> = labels.iter().map(String::as_str).collect();
    uniq.sort_unstable();
    uniq.dedup();
    if uniq.iter().all(|l| l.parse::<i64>().is_ok()) {
        uniq.sort_by_key(|l| l.parse::<i64>().expect("checked above"));
    }
    uniq
}

/// One circle per row of `y`, filled by label. Without labels every point
/// shares the first palette color and no legend is drawn.
pub fn scatter_svg(y: &Matrix, labels: Option<&[String]>) -> Result<String, CliError> {
    if y.cols() != 2 {
        return Err(CliError {
            stage: "plot",
            kind: ErrorKind::Io,
            message: format!(
                "unsupported dimension {}: scatter plots need p = 2",
                y.cols()
            ),
        });
    }
    if let Some(l) = labels {
        if l.len() != y.rows() {
            return Err(CliError::io(
                "plot",
                format!("{} labels for {} points", l.len(), y.rows()),
            ));
        }
    }
    let (x0, x1) = padded_range(y.iter_rows().map(|r| r[0]));
    let (y0, y1) = padded_range(y.iter_rows().map(|r| r[1]));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let py = |v: f64| TOP + (y1 - v) / (y1 - y0) * ph;

    let order = labels.map(ordered_labels).unwrap_or_default();
    let color_of = |l: &str| {
        let i = order.iter().position(|&o| o == l).unwrap_or(0);
        PALETTE[i % PALETTE.len()]
    };

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    s.push_str(
        "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \
         \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n",
    );
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" \
         height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        s,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" \
         stroke=\"#333333\" stroke-width=\"1\"/>"
    );
    let font = "font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\"";
    let base = TOP + ph;
    let _ = writeln!(
        s,
        "<text x=\"{LEFT}\" y=\"{:.2}\" {font}>{x0:.4}</text>",
        base + 15.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" {font} text-anchor=\"end\">{x1:.4}</text>",
        LEFT + pw,
        base + 15.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" {font} text-anchor=\"middle\">y1</text>",
        LEFT + pw / 2.0,
        base + 35.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{base:.2}\" {font} text-anchor=\"end\">{y0:.4}</text>",
        LEFT - 5.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" {font} text-anchor=\"end\">{y1:.4}</text>",
        LEFT - 5.0,
        TOP + 10.0
    );
    let _ = writeln!(
        s,
        "<text x=\"15\" y=\"{:.2}\" {font} text-anchor=\"middle\" \
         transform=\"rotate(-90 15 {:.2})\">y2</text>",
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    s.push_str("<g class=\"points\" fill-opacity=\"0.85\">\n");
    for (i, r) in y.iter_rows().enumerate() {
        let fill = labels.map_or(PALETTE[0], |l| color_of(&l[i]));
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{RADIUS}\" fill=\"{fill}\"/>",
            px(r[0]),
            py(r[1])
        );
    }
    s.push_str("</g>\n");

    if !order.is_empty() {
        s.push_str("<g class=\"legend\">\n");
        let lx = LEFT + pw + 15.0;
        for (t, label) in order.iter().enumerate() {
            let ly = TOP + 10.0 + 18.0 * t as f64;
            let _ = writeln!(
                s,
                "<g class=\"legend-entry\"><rect x=\"{lx:.2}\" y=\"{:.2}\" width=\"10\" \
                 height=\"10\" fill=\"{}\"/><text x=\"{:.2}\" y=\"{:.2}\" {font}>{}</text></g>",
                ly - 9.0,
                color_of(label),
                lx + 16.0,
                ly,
                escape(label)
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}
