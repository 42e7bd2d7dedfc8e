//! CSV output shared by the sweep commands: LF line endings, decimal point,
//! 10 significant digits, `inf` for `+∞`.

use std::io::Write;
use std::path::Path;

/// Significant digits of every numeric CSV cell.
pub const SIG_DIGITS: usize = 10;

/// `x` rounded to `digits` significant digits, printed without exponent when
/// the magnitude allows and with trailing zeros trimmed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == f64::INFINITY {
        return "inf".into();
    }
    if x == f64::NEG_INFINITY {
        return "-inf".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim(mantissa.to_string()), exp)
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes `header` and `rows` as CSV to `out`.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, header: &[&str], rows: &[Vec<String>]) -> csv::Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(f), header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.1, 10), "0.1");
        assert_eq!(format_sig(1.0 / 3.0, 10), "0.3333333333");
        assert_eq!(format_sig(123456.789012345, 10), "123456.789");
        assert_eq!(format_sig(-2.5e-9, 10), "-2.5e-9");
        assert_eq!(format_sig(1e12, 10), "1e12");
        assert_eq!(format_sig(f64::INFINITY, 10), "inf");
        assert_eq!(format_sig(0.0, 10), "0");
    }

    #[test]
    fn lf_endings() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,2\n");
    }
}
