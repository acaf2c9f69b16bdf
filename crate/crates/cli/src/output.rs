//! CSV tables and SVG charts.

use std::fmt::Write as _;
use std::path::Path;

/// One CSV field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    Real(f64),
    Int(u64),
    Bool(bool),
    Null,
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Real(v)
    }
}

impl From<Option<f64>> for Field {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Field::Null, Field::Real)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl Field {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Field::Real(v) => Some(v),
            Field::Int(v) => Some(v as f64),
            _ => None,
        }
    }
}

fn write_field(out: &mut String, f: &Field) {
    match *f {
        // 12 significant digits; −0 printed as 0
        Field::Real(v) => {
            let v = if v == 0.0 { 0.0 } else { v };
            let _ = write!(out, "{v:.11e}");
        }
        Field::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Field::Bool(v) => out.push_str(if v { "true" } else { "false" }),
        Field::Null => {}
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Field>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, f) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_field(&mut out, f);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        return Some((lo - 0.5, hi + 0.5));
    }
    Some((lo, hi))
}

fn svg_open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        escape(title)
    );
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..=4).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect()
}

impl LinePlot {
    pub fn render(&self) -> String {
        let tx = |v: f64| if self.log_x { v.log10() } else { v };
        let ty = |v: f64| if self.log_y { v.log10() } else { v };
        let usable = |(x, y): &(f64, f64)| {
            (!self.log_x || *x > 0.0) && (!self.log_y || *y > 0.0) && x.is_finite() && y.is_finite()
        };
        let pts = || self.series.iter().flat_map(|s| s.points.iter().filter(|p| usable(p)));
        let mut out = String::new();
        svg_open(&mut out, &self.title);
        let (Some((x0, x1)), Some((y0, y1))) = (
            extent(pts().map(|p| tx(p.0))),
            extent(pts().map(|p| ty(p.1))),
        ) else {
            out.push_str("</svg>\n");
            return out;
        };
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let ph = HEIGHT - MARGIN_T - MARGIN_B;
        let sx = |v: f64| MARGIN_L + (v - x0) / (x1 - x0) * pw;
        let sy = |v: f64| MARGIN_T + ph - (v - y0) / (y1 - y0) * ph;
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for t in ticks(x0, x1) {
            let label = if self.log_x { 10f64.powf(t) } else { t };
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label:.3}</text>"#,
                sx(t),
                MARGIN_T + ph + 16.0
            );
        }
        for t in ticks(y0, y1) {
            let label = if self.log_y { 10f64.powf(t) } else { t };
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label:.3}</text>"#,
                MARGIN_L - 6.0,
                sy(t) + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_L + pw / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            MARGIN_T + ph / 2.0,
            MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .filter(|p| usable(p))
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(tx(x)), sy(ty(y))))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
            let ly = MARGIN_T + 14.0 + 16.0 * i as f64;
            let lx = WIDTH - MARGIN_R + 10.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 18.0,
                lx + 22.0,
                ly + 4.0,
                escape(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Values on a rectangular grid, `values[row][col]` at (xs[col], ys[row]).
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl Heatmap {
    pub fn render(&self) -> String {
        let mut out = String::new();
        svg_open(&mut out, &self.title);
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let ph = HEIGHT - MARGIN_T - MARGIN_B;
        let (nx, ny) = (self.xs.len(), self.ys.len());
        let Some((lo, hi)) = extent(self.values.iter().flatten().flatten().copied()) else {
            out.push_str("</svg>\n");
            return out;
        };
        let (cw, ch) = (pw / nx as f64, ph / ny as f64);
        for (r, row) in self.values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let fill = match v {
                    Some(v) => {
                        let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
                        // white → dark blue
                        let g = (255.0 * (1.0 - 0.8 * t)) as u8;
                        let rr = (255.0 * (1.0 - t)) as u8;
                        format!("rgb({rr},{g},{})", (255.0 * (1.0 - 0.45 * t)) as u8)
                    }
                    None => "#cccccc".to_string(),
                };
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                    MARGIN_L + c as f64 * cw,
                    MARGIN_T + ph - (r + 1) as f64 * ch,
                    cw + 0.3,
                    ch + 0.3
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for i in [0, nx / 2, nx - 1] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.3}</text>"#,
                MARGIN_L + (i as f64 + 0.5) * cw,
                MARGIN_T + ph + 16.0,
                self.xs[i]
            );
        }
        for i in [0, ny / 2, ny - 1] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
                MARGIN_L - 6.0,
                MARGIN_T + ph - (i as f64 + 0.5) * ch + 4.0,
                self.ys[i]
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_L + pw / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            MARGIN_T + ph / 2.0,
            MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );
        let lx = WIDTH - MARGIN_R + 20.0;
        let _ = writeln!(
            out,
            r#"<text x="{lx}" y="{}">max {hi:.4}</text><text x="{lx}" y="{}">min {lo:.4}</text>"#,
            MARGIN_T + 12.0,
            MARGIN_T + ph
        );
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        let mut t = Table::new(vec!["a", "b", "c", "d"]);
        t.push(vec![1.0.into(), Field::Null, 7u64.into(), (-0.0).into()]);
        assert_eq!(t.to_csv(), "a,b,c,d\n1.00000000000e0,,7,0.00000000000e0\n");
    }

    #[test]
    fn plots_are_well_formed() {
        let p = LinePlot {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: true,
            log_y: false,
            series: vec![Series {
                name: "s".into(),
                points: vec![(0.0, 1.0), (1.0, 2.0), (10.0, 3.0)],
            }],
        };
        let svg = p.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        let h = Heatmap {
            title: "h".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            xs: vec![0.0, 1.0],
            ys: vec![0.0],
            values: vec![vec![Some(0.5), None]],
        };
        assert_eq!(h.render().matches("<rect").count(), 4);
    }
}
