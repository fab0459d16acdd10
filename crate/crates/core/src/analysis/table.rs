use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Least-squares line through `(log₁₀ x, log₁₀ y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the points from the line, in decades.
    pub rms: f64,
}

/// Fits `log₁₀ y = slope · log₁₀ x + intercept`. Needs two distinct
/// positive abscissae; non-positive values are rejected.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<LogFit> {
    if xs.len() != ys.len()
        || xs.len() < 2
        || xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite())
    {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some(LogFit {
        slope,
        intercept,
        rms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    /// Whether a slope is fitted for this column.
    pub fit: bool,
    /// Values below this are saturated and left out of the fit.
    pub floor: f64,
}

impl Column {
    pub fn fitted(name: &str, floor: f64) -> Self {
        Self {
            name: name.into(),
            fit: true,
            floor,
        }
    }

    pub fn plain(name: &str) -> Self {
        Self {
            name: name.into(),
            fit: false,
            floor: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    /// `N`, `n` or `N_g`.
    pub param: f64,
    /// Abscissa used for fitting (`2N + 1`, `h` or `N_g`).
    pub x: f64,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub column: String,
    pub fit: Option<LogFit>,
    /// Abscissa range of the rows that entered the fit.
    pub range: Option<(f64, f64)>,
    pub points: usize,
}

/// Errors of a family of discrete solutions against a reference, one row
/// per discretization parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub parameter: String,
    pub abscissa: String,
    pub columns: Vec<Column>,
    pub rows: Vec<StudyRow>,
    pub slopes: Vec<SlopeFit>,
    pub reference: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
    /// Set when a solve failed and only some rows are present.
    #[serde(default)]
    pub partial: bool,
}

impl StudyTable {
    pub fn new(parameter: &str, abscissa: &str, columns: Vec<Column>, reference: String) -> Self {
        Self {
            parameter: parameter.into(),
            abscissa: abscissa.into(),
            columns,
            rows: Vec::new(),
            slopes: Vec::new(),
            reference,
            metadata: BTreeMap::new(),
            partial: false,
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// `(x, value)` pairs of a column, skipping missing values.
    pub fn series(&self, name: &str) -> Vec<(f64, f64)> {
        let Some(j) = self.column_index(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| r.values[j].map(|v| (r.x, v)))
            .collect()
    }

    pub fn value(&self, param: f64, name: &str) -> Option<f64> {
        let j = self.column_index(name)?;
        self.rows.iter().find(|r| r.param == param)?.values[j]
    }

    pub fn slope(&self, name: &str) -> Option<f64> {
        self.slopes
            .iter()
            .find(|s| s.column == name)?
            .fit
            .map(|f| f.slope)
    }

    pub fn is_saturated(&self, row: &StudyRow, j: usize) -> bool {
        row.values[j].is_some_and(|v| v.abs() < self.columns[j].floor)
    }

    /// Sorts rows by parameter and refits every fitted column on its
    /// non-saturated rows.
    pub fn refit(&mut self) {
        self.rows.sort_by(|a, b| a.param.total_cmp(&b.param));
        self.slopes = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.fit)
            .map(|(j, c)| {
                let pts: Vec<(f64, f64)> = self
                    .rows
                    .iter()
                    .filter(|r| !self.is_saturated(r, j))
                    .filter_map(|r| r.values[j].map(|v| (r.x, v.abs())))
                    .collect();
                let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().cloned().unzip();
                let range = if pts.is_empty() {
                    None
                } else {
                    Some((
                        xs.iter().cloned().fold(f64::INFINITY, f64::min),
                        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    ))
                };
                SlopeFit {
                    column: c.name.clone(),
                    fit: fit_slope(&xs, &ys),
                    range,
                    points: pts.len(),
                }
            })
            .collect();
    }

    /// Copy without the row at the largest parameter, refitted.
    pub fn without_last_row(&self) -> Self {
        let mut t = self.clone();
        t.rows.sort_by(|a, b| a.param.total_cmp(&b.param));
        t.rows.pop();
        t.refit();
        t
    }

    /// One line per row, numbers in scientific notation with 17
    /// significant digits, missing values empty. The last column lists the
    /// saturated columns of the row, separated by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(
            out,
            "{},{},{},saturated",
            self.parameter,
            self.abscissa,
            names.join(",")
        );
        for r in &self.rows {
            let mut line = format!("{},{}", num(r.param), num(r.x));
            for v in &r.values {
                line.push(',');
                if let Some(v) = v {
                    line.push_str(&num(*v));
                }
            }
            let sat: Vec<&str> = (0..self.columns.len())
                .filter(|&j| self.columns[j].fit && self.is_saturated(r, j))
                .map(|j| names[j])
                .collect();
            let _ = writeln!(out, "{line},{}", sat.join(";"));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Long format for plotting: one block per column separated by two
    /// blank lines, each line `x value saturated`.
    pub fn to_long_format(&self) -> String {
        let mut out = String::new();
        for (j, c) in self.columns.iter().enumerate() {
            let _ = writeln!(out, "# {} vs {}", c.name, self.abscissa);
            for r in &self.rows {
                if let Some(v) = r.values[j] {
                    let _ = writeln!(
                        out,
                        "{} {} {}",
                        num(r.x),
                        num(v),
                        u8::from(c.fit && self.is_saturated(r, j))
                    );
                }
            }
            out.push_str("\n\n");
        }
        out
    }

    /// Writes `<stem>.csv`, `<stem>.json` and `<stem>.dat` into `dir`.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json()?)?;
        std::fs::write(dir.join(format!("{stem}.dat")), self.to_long_format())?;
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(p: f64) -> StudyTable {
        let mut t = StudyTable::new(
            "N",
            "N",
            vec![Column::fitted("err", 1e-12), Column::plain("note")],
            "none".into(),
        );
        for n in [16.0, 4.0, 8.0, 32.0] {
            t.rows.push(StudyRow {
                param: n,
                x: n,
                values: vec![Some(n.powf(p)), None],
            });
        }
        t.refit();
        t
    }

    #[test]
    fn exact_power_law() {
        let t = synthetic(-3.0);
        assert!((t.slope("err").unwrap() + 3.0).abs() < 1e-12);
        assert_eq!(t.rows[0].param, 4.0);
        assert_eq!(t.slopes.len(), 1);
        assert_eq!(t.slopes[0].range, Some((4.0, 32.0)));
    }

    #[test]
    fn saturated_rows_are_skipped() {
        let mut t = synthetic(-3.0);
        t.rows.push(StudyRow {
            param: 64.0,
            x: 64.0,
            values: vec![Some(1e-13), None],
        });
        t.refit();
        assert!((t.slope("err").unwrap() + 3.0).abs() < 1e-12);
        assert_eq!(t.slopes[0].points, 4);
        assert!(t.to_csv().lines().last().unwrap().ends_with(",err"));
    }

    #[test]
    fn degenerate_fits() {
        assert!(fit_slope(&[1.0], &[1.0]).is_none());
        assert!(fit_slope(&[2.0, 2.0], &[1.0, 3.0]).is_none());
        assert!(fit_slope(&[1.0, 2.0], &[0.0, 3.0]).is_none());
    }

    #[test]
    fn csv_layout() {
        let csv = synthetic(-1.0).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "N,N,err,note,saturated");
        assert_eq!(
            lines[1],
            "4.0000000000000000e0,4.0000000000000000e0,2.5000000000000000e-1,,"
        );
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn json_round_trip() {
        let t = synthetic(-2.0);
        assert_eq!(StudyTable::from_json(&t.to_json().unwrap()).unwrap(), t);
        assert_eq!(
            t.to_long_format()
                .lines()
                .filter(|l| l.starts_with('#'))
                .count(),
            2
        );
    }
}
