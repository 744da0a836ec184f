/// Formats with 9 significant digits in positional notation.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// A CSV document: comment header, one row of column names, data rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Numeric value of `column` in row `row`.
    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        let idx = self.columns.iter().position(|c| c == column)?;
        self.rows.get(row)?.get(idx)?.parse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_number(6.658211482751795), "6.65821148");
        assert_eq!(format_number(1.4355e-4), "0.000143550000");
        assert_eq!(format_number(1234567.891), "1234567.89");
        assert_eq!(format_number(-0.5), "-0.500000000");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(f64::NAN), "nan");
        assert_eq!(format_number(3e12), "3000000000000");
    }

    #[test]
    fn render_and_lookup() {
        let t = Table {
            comments: vec!["# a = 1".into()],
            columns: vec!["x".into(), "y".into()],
            rows: vec![vec!["1".into(), "2.5".into()]],
        };
        assert_eq!(t.render(), "# a = 1\nx,y\n1,2.5\n");
        assert_eq!(t.value(0, "y"), Some(2.5));
        assert_eq!(t.value(0, "z"), None);
    }
}
