//! Deterministic text renderings: baseline CSV and heatmap SVG.

use std::fmt::Write;

use super::{csv_field, BaselineReport, TransferMatrix};

/// `phenomenon,rise_score,random_mean,random_sem,trials,advantage_ratio`;
/// an undefined ratio is left empty.
pub fn baselines_csv(reports: &[BaselineReport]) -> String {
    let mut out = String::from("phenomenon,rise_score,random_mean,random_sem,trials,advantage_ratio\n");
    for r in reports {
        let ratio = r.advantage_ratio.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.phenomenon),
            r.rise_score,
            r.random_mean,
            r.random_sem,
            r.trials,
            ratio
        );
    }
    out
}

const CELL: usize = 64;
const LABEL: usize = 96;
const TITLE: usize = 32;
// Color ramp endpoints: score 0.0 (and below) is white, 1.0 is dark blue.
const LOW: [f64; 3] = [255.0, 255.0, 255.0];
const HIGH: [f64; 3] = [8.0, 48.0, 107.0];

/// Fill color for a score, linear in RGB between the ramp endpoints.
pub fn ramp_color(score: f64) -> String {
    let t = if score.is_nan() { 0.0 } else { score.clamp(0.0, 1.0) };
    let c: Vec<u8> = LOW
        .iter()
        .zip(HIGH)
        .map(|(lo, hi)| (lo + (hi - lo) * t).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the matrix as a heatmap. Rows are training languages, columns are
/// test languages; darker cells mean higher alignment.
pub fn heatmap_svg(m: &TransferMatrix) -> String {
    let rows = m.train_languages.len();
    let cols = m.test_languages.len();
    let width = LABEL + cols * CELL + 8;
    let height = TITLE + LABEL + rows * CELL + 8;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##);
    let title = if m.model_id.is_empty() {
        m.phenomenon.clone()
    } else {
        format!("{} / {}", m.phenomenon, m.model_id)
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        width / 2,
        escape(&title)
    );
    for (j, lang) in m.test_languages.iter().enumerate() {
        let x = LABEL + j * CELL + CELL / 2;
        let y = TITLE + LABEL - 8;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" font-size="12" text-anchor="middle">{}</text>"#,
            escape(lang)
        );
    }
    for (i, lang) in m.train_languages.iter().enumerate() {
        let y = TITLE + LABEL + i * CELL + CELL / 2 + 4;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" font-size="12" text-anchor="end">{}</text>"#,
            LABEL - 8,
            escape(lang)
        );
        for (j, cell) in m.cells[i].iter().enumerate() {
            let x = LABEL + j * CELL;
            let top = TITLE + LABEL + i * CELL;
            let fill = ramp_color(cell.mean_score);
            let ink = if cell.mean_score > 0.5 { "#ffffff" } else { "#000000" };
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{top}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#cccccc"/>"##
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="12" text-anchor="middle" fill="{ink}">{:.3}</text>"#,
                x + CELL / 2,
                top + CELL / 2 + 4,
                cell.mean_score
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
