use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

const SIGNIFICANT_DIGITS: i32 = 12;

/// Fixed-point rendering with 12 significant digits, so that identical
/// values always print identically.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = if x == 0.0 {
        0
    } else {
        x.abs().log10().floor() as i32
    };
    let decimals = (SIGNIFICANT_DIGITS - 1 - magnitude).clamp(0, 40) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(format!("create {}", path.display()), e))?;
    f.write_all(contents)
        .map_err(|e| Error::io(format!("write {}", path.display()), e))
}

/// CSV bytes from a header and rows of already formatted cells.
pub(crate) fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| Error::io("flush csv", e.into_error()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_significant_digits() {
        assert_eq!(format_number(0.0), "0.00000000000");
        assert_eq!(format_number(1.0), "1.00000000000");
        assert_eq!(format_number(0.5), "0.500000000000");
        assert_eq!(format_number(10.0), "10.0000000000");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(-2.5e-3), "-0.00250000000000");
        assert_eq!(format_number(-1e-300), "0.0000000000000000000000000000000000000000");
        assert_eq!(format_number(123456.0), "123456.000000");
    }
}
