//! Standalone SVG heatmaps: one `<rect>` per cell on an 8-stop viridis ramp.
//! Output is a pure function of the input, byte for byte.

use std::fmt::Write as _;

use optivmd_core::search::SearchReport;
use optivmd_core::FeatureMap;

/// Viridis sampled at `i / 7`.
pub const RAMP: [[u8; 3]; 8] = [
    [0x44, 0x01, 0x54],
    [0x46, 0x32, 0x7e],
    [0x36, 0x5c, 0x8d],
    [0x27, 0x7f, 0x8e],
    [0x1f, 0xa1, 0x87],
    [0x4a, 0xc1, 0x6d],
    [0xa0, 0xda, 0x39],
    [0xfd, 0xe7, 0x25],
];

const MARGIN_LEFT: usize = 56;
const MARGIN_TOP: usize = 28;
const MARGIN_BOTTOM: usize = 44;
const MARGIN_RIGHT: usize = 16;

/// Color for `v` in `[0, 1]` (clamped; NaN maps to 0) as `#rrggbb`.
pub fn ramp_color(v: f64) -> String {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    let pos = v * (RAMP.len() - 1) as f64;
    let i = (pos.floor() as usize).min(RAMP.len() - 2);
    let t = pos - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    let mix = |j: usize| (a[j] as f64 + (b[j] as f64 - a[j] as f64) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SvgError {
    #[error("channel {channel} out of range for a map with {channels} channel(s)")]
    BadChannel { channel: usize, channels: usize },
}

/// Heatmap of one channel: time frames left to right, feature bins bottom to top.
pub fn render_heatmap_svg(map: &FeatureMap, channel: usize) -> Result<String, SvgError> {
    if channel >= map.channels {
        return Err(SvgError::BadChannel {
            channel,
            channels: map.channels,
        });
    }
    let cell = (512 / map.height.max(map.width)).clamp(1, 64);
    let (pw, ph) = (map.width * cell, map.height * cell);
    let (w, h) = (MARGIN_LEFT + pw + MARGIN_RIGHT, MARGIN_TOP + ph + MARGIN_BOTTOM);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r##"<rect width="{w}" height="{h}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN_LEFT}" y="18" font-family="sans-serif" font-size="13">{} ({} x {})</text>"#,
        escape(&map.channel_names[channel]),
        map.height,
        map.width
    );
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for row in 0..map.height {
        let y = MARGIN_TOP + (map.height - 1 - row) * cell;
        for col in 0..map.width {
            let x = MARGIN_LEFT + col * cell;
            let color = ramp_color(map.get(row, col, channel) as f64);
            let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{color}"/>"#);
        }
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">time frame</text>"#,
        MARGIN_LEFT + pw / 2,
        MARGIN_TOP + ph + 30
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">feature bin</text>"#,
        MARGIN_TOP + ph / 2,
        MARGIN_TOP + ph / 2
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">0</text>"#,
        MARGIN_LEFT - 4,
        MARGIN_TOP + ph
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
        MARGIN_LEFT - 4,
        MARGIN_TOP + 10,
        map.height - 1
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN_LEFT}" y="{}" font-family="sans-serif" font-size="10">0</text>"#,
        MARGIN_TOP + ph + 14
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
        MARGIN_LEFT + pw,
        MARGIN_TOP + ph + 14,
        map.width - 1
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Accuracy over the `K x alpha` grid with the selected cell outlined.
/// Failed cells are grey with an `x`; cells skipped by early stopping are pale with a `-`.
pub fn render_surface_svg(report: &SearchReport, k_grid: &[usize], alpha_grid: &[f64]) -> String {
    let cell = 64;
    let (pw, ph) = (alpha_grid.len() * cell, k_grid.len() * cell);
    let left = 48;
    let (w, h) = (left + pw + MARGIN_RIGHT, MARGIN_TOP + ph + MARGIN_BOTTOM);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r##"<rect width="{w}" height="{h}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="18" font-family="sans-serif" font-size="13">accuracy over K x alpha (best K={}, alpha={})</text>"#,
        report.best_k, report.best_alpha
    );
    for (ri, &k) in k_grid.iter().enumerate() {
        let y = MARGIN_TOP + ri * cell;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">K={k}</text>"#,
            left - 4,
            y + cell / 2 + 4
        );
        for (ci, &alpha) in alpha_grid.iter().enumerate() {
            let x = left + ci * cell;
            let found = report.cells.iter().find(|c| c.k == k && c.alpha == alpha);
            let (fill, label, text_color) = match found.map(|c| c.accuracy()) {
                Some(Some(acc)) => {
                    let color = if acc >= 0.6 { "#000000" } else { "#ffffff" };
                    (ramp_color(acc), format!("{acc:.3}"), color)
                }
                Some(None) => ("#bbbbbb".to_string(), "x".to_string(), "#000000"),
                None => ("#eeeeee".to_string(), "-".to_string(), "#000000"),
            };
            let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>"#);
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" fill="{text_color}">{label}</text>"#,
                x + cell / 2,
                y + cell / 2 + 4
            );
            if k == report.best_k && alpha == report.best_alpha {
                let _ = writeln!(
                    s,
                    r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#d62728" stroke-width="3"/>"##,
                    x + 1,
                    y + 1,
                    cell - 2,
                    cell - 2
                );
            }
        }
    }
    for (ci, &alpha) in alpha_grid.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{alpha}</text>"#,
            left + ci * cell + cell / 2,
            MARGIN_TOP + ph + 14
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">alpha</text>"#,
        left + pw / 2,
        MARGIN_TOP + ph + 32
    );
    s.push_str("</svg>\n");
    s
}
