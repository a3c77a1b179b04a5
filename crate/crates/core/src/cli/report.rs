//! CSV, verdict summary and SVG output of an experiment run.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// One CSV row: `experiment,series,param,lhs,rhs,rel_err`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub series: String,
    /// ε, t or an index, depending on the series.
    pub param: f64,
    pub lhs: f64,
    pub rhs: Option<f64>,
    pub rel_err: Option<f64>,
}

impl Row {
    pub fn new(series: &str, param: f64, lhs: f64, rhs: Option<f64>) -> Row {
        let rel_err = rhs.filter(|r| *r != 0.0).map(|r| (lhs - r).abs() / r.abs());
        Row { series: series.into(), param, lhs, rhs, rel_err }
    }
}

/// One expectation and what was observed.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    /// The observation is inconclusive rather than wrong.
    pub inconclusive: bool,
}

impl Check {
    pub fn new(name: &str, expected: impl ToString, observed: impl ToString, pass: bool) -> Check {
        Check { name: name.into(), expected: expected.to_string(), observed: observed.to_string(), pass, inconclusive: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub anchor: String,
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
}

/// Shortest round-trip decimal; `inf`, `-inf`, `nan` for non-finite values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v:?}")
    }
}

impl Report {
    pub fn new(experiment: &str, anchor: &str) -> Report {
        Report { experiment: experiment.into(), anchor: anchor.into(), ..Default::default() }
    }

    pub fn meta(&mut self, k: &str, v: impl ToString) {
        self.meta.push((k.into(), v.to_string()));
    }

    pub fn row(&mut self, series: &str, param: f64, lhs: f64, rhs: Option<f64>) {
        self.rows.push(Row::new(series, param, lhs, rhs));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self, strict: bool) -> bool {
        self.checks.iter().all(|c| c.pass && !(strict && c.inconclusive))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# experiment: {}", self.experiment);
        let _ = writeln!(s, "# anchor: {}", self.anchor);
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str("experiment,series,param,lhs,rhs,rel_err\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                self.experiment,
                r.series,
                fmt_f64(r.param),
                fmt_f64(r.lhs),
                r.rhs.map(fmt_f64).unwrap_or_default(),
                r.rel_err.map(fmt_f64).unwrap_or_default()
            );
        }
        s
    }

    pub fn to_summary(&self, strict: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {}", self.experiment);
        let _ = writeln!(s, "anchor = {}", self.anchor);
        for c in &self.checks {
            let tag = if !c.pass {
                "FAIL"
            } else if c.inconclusive {
                "INCONCLUSIVE"
            } else {
                "PASS"
            };
            let _ = writeln!(s, "check {} = {} (expected {}) {tag}", c.name, c.observed, c.expected);
        }
        let _ = writeln!(s, "status = {}", if self.passed(strict) { "pass" } else { "fail" });
        s
    }

    /// One polyline per series over `(param, lhs)`, log-log when all values are positive.
    pub fn to_svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const PAD: f64 = 50.0;
        let mut series: Vec<(&str, Vec<(f64, f64)>)> = Vec::new();
        for r in &self.rows {
            if !(r.param.is_finite() && r.lhs.is_finite()) {
                continue;
            }
            match series.iter_mut().find(|(n, _)| *n == r.series) {
                Some((_, v)) => v.push((r.param, r.lhs)),
                None => series.push((&r.series, vec![(r.param, r.lhs)])),
            }
        }
        let pts = series.iter().flat_map(|(_, v)| v.iter().copied());
        let logx = series.iter().all(|(_, v)| v.iter().all(|p| p.0 > 0.0));
        let logy = series.iter().all(|(_, v)| v.iter().all(|p| p.1 > 0.0));
        let tx = |x: f64| if logx { x.log10() } else { x };
        let ty = |y: f64| if logy { y.log10() } else { y };
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in pts {
            x0 = x0.min(tx(x));
            x1 = x1.max(tx(x));
            y0 = y0.min(ty(y));
            y1 = y1.max(ty(y));
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| PAD + (tx(x) - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (ty(y) - y0) / (y1 - y0) * (H - 2.0 * PAD);
        let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<path d="M{PAD} {PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
            b = H - PAD,
            r = W - PAD
        );
        let _ = writeln!(s, r#"<text x="{PAD}" y="20" font-size="14">{}</text>"#, self.experiment);
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" font-size="11">param{} [{:.3e}, {:.3e}]</text>"#,
            if logx { " (log)" } else { "" },
            if logx { 10f64.powf(x0) } else { x0 },
            if logx { 10f64.powf(x1) } else { x1 },
            x = W / 2.0 - 60.0,
            y = H - 15.0
        );
        let _ = writeln!(
            s,
            r#"<text x="5" y="{y}" font-size="11">lhs{} [{:.3e}, {:.3e}]</text>"#,
            if logy { " (log)" } else { "" },
            if logy { 10f64.powf(y0) } else { y0 },
            if logy { 10f64.powf(y1) } else { y1 },
            y = PAD - 8.0
        );
        for (i, (name, v)) in series.iter().enumerate() {
            let c = colors[i % colors.len()];
            let path: Vec<String> = v.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#, path.join(" "));
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{y}" font-size="11" fill="{c}">{name}</text>"#,
                x = W - PAD - 120.0,
                y = PAD + 14.0 * i as f64
            );
        }
        s.push_str("</svg>\n");
        s
    }

    /// Write `report.csv`, `verdict.txt` and `plot.svg` into `dir`.
    pub fn write(&self, dir: &Path, strict: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.to_csv())?;
        std::fs::write(dir.join("verdict.txt"), self.to_summary(strict))?;
        std::fs::write(dir.join("plot.svg"), self.to_svg())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(1.0), "1.0");
        assert_eq!(fmt_f64(-0.0), "0");
        let v = 0.6065306597126334;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn csv_layout() {
        let mut r = Report::new("demo", "tag");
        r.meta("seed", 3);
        r.row("m", 0.5, 1.0, Some(2.0));
        r.row("m", 0.25, 1.5, None);
        r.check(Check::new("x", "a", "a", true));
        let csv = r.to_csv();
        assert!(csv.starts_with("# experiment: demo\n# anchor: tag\n# seed: 3\nexperiment,series"));
        assert!(csv.contains("demo,m,0.5,1.0,2.0,0.5\n"));
        assert!(csv.contains("demo,m,0.25,1.5,,\n"));
        assert!(r.to_summary(false).ends_with("status = pass\n"));
        assert!(r.to_svg().contains("<polyline"));
    }
}
