//! Output helpers: fixed float formatting, metadata lines, file writing and SVG charts.
//!
//! Everything written here is byte-deterministic for identical inputs.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Formats `x` with at most `digits` significant digits, `%g` style, trailing zeros trimmed.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Short, stable hash of any serializable configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Provenance stamped into every output file.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct RunMeta {
    pub tool: String,
    pub config_hash: String,
    pub seed: u64,
}

impl RunMeta {
    pub fn new(config_hash: String, seed: u64) -> Self {
        RunMeta {
            tool: format!("hoopsnet {}", env!("CARGO_PKG_VERSION")),
            config_hash,
            seed,
        }
    }

    /// Lines for `#`-prefixed CSV preambles.
    pub fn comment_lines(&self) -> Vec<String> {
        vec![
            self.tool.clone(),
            format!("config_hash={}", self.config_hash),
            format!("seed={}", self.seed),
        ]
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes a CSV body (header + rows) preceded by `# ` comment lines.
pub fn csv_bytes(comments: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for c in comments {
        out.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    {
        let mut wtr = csv::Writer::from_writer(&mut out);
        wtr.write_record(header)?;
        for r in rows {
            wtr.write_record(r)?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    }
    Ok(out)
}

pub struct Bar {
    pub label: String,
    pub value: f64,
    pub highlight: bool,
}

/// Minimal vertical bar chart with a zero baseline; negative values hang below it.
pub fn bar_chart_svg(title: &str, y_label: &str, bars: &[Bar], comments: &[String]) -> String {
    let width = 80.0 + 36.0 * bars.len().max(1) as f64;
    let height = 360.0;
    let (top, bottom, left) = (40.0, 300.0, 60.0);
    let max = bars.iter().map(|b| b.value).fold(0.0_f64, f64::max);
    let min = bars.iter().map(|b| b.value).fold(0.0_f64, f64::min);
    let span = if max > min { max - min } else { 1.0 };
    let y_of = |v: f64| top + (max - v) / span * (bottom - top);
    let zero = y_of(0.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = fmt_sig(width, 6),
        h = fmt_sig(height, 6)
    );
    for c in comments {
        let _ = writeln!(s, "<!-- {} -->", c.replace("--", "- -"));
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        fmt_sig(width / 2.0, 6),
        xml_escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-family="sans-serif" font-size="11" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
        fmt_sig((top + bottom) / 2.0, 6),
        fmt_sig((top + bottom) / 2.0, 6),
        xml_escape(y_label)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{z}" x2="{r}" y2="{z}" stroke="black"/>"#,
        l = fmt_sig(left, 6),
        r = fmt_sig(width - 20.0, 6),
        z = fmt_sig(zero, 6)
    );
    for (i, b) in bars.iter().enumerate() {
        let x = left + 8.0 + 36.0 * i as f64;
        let y = y_of(b.value.max(0.0));
        let h = (y_of(b.value.min(0.0)) - y).max(0.5);
        let fill = if b.highlight { "#c0392b" } else { "#2e6f9e" };
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="28" height="{}" fill="{}"><title>{}: {}</title></rect>"#,
            fmt_sig(x, 6),
            fmt_sig(y, 6),
            fmt_sig(h, 6),
            fill,
            xml_escape(&b.label),
            fmt_sig(b.value, 6)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            fmt_sig(x + 14.0, 6),
            fmt_sig(bottom + 16.0, 6),
            xml_escape(&b.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
