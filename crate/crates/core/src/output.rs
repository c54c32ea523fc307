//! Tabular data products and their text encodings.
//!
//! Floats are printed with 12 significant digits in the shortest of fixed or
//! scientific notation (the C `%.12g` rule), which keeps files byte-stable
//! across runs.

use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_sig12(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn render_json(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => format_sig12(*x),
            Cell::Float(_) => "null".to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("strings always serialize"),
        }
    }
}

/// Format with 12 significant digits, `%.12g` style.
pub fn format_sig12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let fixed = format!("{:.*}", (DIGITS - 1 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    } else {
        format!("{}e{}", trim_fraction(mantissa), exp)
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A header plus rows of cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// One JSON object per row, keyed by column name.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push('{');
            for (i, (key, cell)) in self.header.iter().zip(row).enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}:{}", Cell::Text(key.clone()).render_json(), cell.render_json());
            }
            out.push_str("}\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(4.994), "4.994");
        assert_eq!(format_sig12(-2.5), "-2.5");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(2.0 * std::f64::consts::PI * 0.282), "1.77185825662");
        assert_eq!(format_sig12(1.5e-7), "1.5e-7");
        assert_eq!(format_sig12(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_sig12(150.0), "150");
        assert_eq!(format_sig12(f64::NAN), "NaN");
    }

    #[test]
    fn csv_and_json_lines() {
        let mut t = Table::new(["N", "T_us", "fidelity"]);
        t.push(vec![Cell::Int(2), Cell::Float(1.0), Cell::Float(0.25)]);
        assert_eq!(t.to_csv(), "N,T_us,fidelity\n2,1,0.25\n");
        assert_eq!(t.to_json_lines(), "{\"N\":2,\"T_us\":1,\"fidelity\":0.25}\n");
    }

    proptest! {
        #[test]
        fn sig12_round_trips_to_twelve_digits(x in -1e12f64..1e12f64) {
            let parsed: f64 = format_sig12(x).parse().unwrap();
            prop_assert!((parsed - x).abs() <= 1e-11 * x.abs().max(1e-300));
        }
    }
}
