//! Price series as delimited text.
//!
//! One row per interval with five columns in this order:
//! `fcr_n,fcr_d_up,fcr_d_down,ffr,spot`. Reservation prices are EUR/MW/h and
//! the spot price EUR/MWh. A header row is optional and `#` starts a comment
//! line. Errors report the 1-based line number in the file.

use std::fmt::Write as _;
use std::path::Path;

use super::{DispatchError, IntervalPrices, PriceSeries};

pub const PRICE_COLUMNS: [&str; 5] = ["fcr_n", "fcr_d_up", "fcr_d_down", "ffr", "spot"];

pub fn parse_price_series(text: &str, duration_h: f64) -> Result<PriceSeries, DispatchError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| DispatchError::Parse {
            row: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let is_header = first && record.get(0).is_some_and(|f| f.parse::<f64>().is_err());
        first = false;
        if is_header {
            continue;
        }
        if record.len() != PRICE_COLUMNS.len() {
            return Err(DispatchError::Parse {
                row,
                message: format!(
                    "expected {} columns, found {}",
                    PRICE_COLUMNS.len(),
                    record.len()
                ),
            });
        }
        let mut values = [0.0; 5];
        for (i, (field, name)) in record.iter().zip(PRICE_COLUMNS).enumerate() {
            let v: f64 = field.parse().map_err(|_| DispatchError::Parse {
                row,
                message: format!("{name}: `{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(DispatchError::Parse {
                    row,
                    message: format!("{name}: `{field}` is not finite"),
                });
            }
            values[i] = v;
        }
        rows.push(IntervalPrices {
            fcr_n: values[0],
            fcr_d_up: values[1],
            fcr_d_down: values[2],
            ffr: values[3],
            spot: values[4],
        });
    }
    PriceSeries::new(rows, duration_h)
}

pub fn read_price_series(path: &Path, duration_h: f64) -> Result<PriceSeries, DispatchError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DispatchError::Io(format!("{}: {e}", path.display())))?;
    parse_price_series(&text, duration_h)
}

/// Serializes with a header row; floats use their shortest round-trip form.
pub fn write_price_series(series: &PriceSeries) -> String {
    let mut out = PRICE_COLUMNS.join(",");
    out.push('\n');
    for p in series.intervals() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.fcr_n, p.fcr_d_up, p.fcr_d_down, p.ffr, p.spot
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_with_and_without_header() {
        let with = "fcr_n,fcr_d_up,fcr_d_down,ffr,spot\n10,1,2,3,45.5\n# gap\n11,1,2,3,-4\n";
        let s = parse_price_series(with, 1.0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.intervals()[1].spot, -4.0);
        let without = parse_price_series("1,2,3,4,5\n", 0.25).unwrap();
        assert_eq!(without.duration_h(), 0.25);
    }

    #[test]
    fn reports_bad_rows() {
        let err = parse_price_series(
            "fcr_n,fcr_d_up,fcr_d_down,ffr,spot\n1,2,3,4,5\n1,2,x,4,5\n",
            1.0,
        )
        .unwrap_err();
        assert!(
            matches!(err, DispatchError::Parse { row: 3, .. }),
            "{err:?}"
        );
        let err = parse_price_series("1,2,3,4\n", 1.0).unwrap_err();
        assert!(matches!(err, DispatchError::Parse { row: 1, .. }));
        assert_eq!(
            parse_price_series("", 1.0).unwrap_err(),
            DispatchError::EmptySeries
        );
        assert!(parse_price_series("1,2,3,4,NaN\n", 1.0).is_err());
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(rows in proptest::collection::vec(proptest::array::uniform5(-1e4f64..1e4), 1..30)) {
            let series = PriceSeries::hourly(rows.iter().map(|r| IntervalPrices {
                fcr_n: r[0], fcr_d_up: r[1], fcr_d_down: r[2], ffr: r[3], spot: r[4],
            }).collect()).unwrap();
            let back = parse_price_series(&write_price_series(&series), 1.0).unwrap();
            prop_assert_eq!(back, series);
        }
    }
}
