//! Two-column `t,u` CSV files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numfmt::g17;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Header `t,u`, `%.17g` values, `\n` line endings.
pub fn format_columns(t: &[f64], u: &[f64]) -> String {
    let mut s = String::with_capacity(40 * t.len() + 4);
    s.push_str("t,u\n");
    for (a, b) in t.iter().zip(u) {
        s.push_str(&g17(*a));
        s.push(',');
        s.push_str(&g17(*b));
        s.push('\n');
    }
    s
}

pub fn write_columns(path: &Path, t: &[f64], u: &[f64]) -> Result<()> {
    std::fs::write(path, format_columns(t, u)).map_err(|e| io_err(path, e))
}

/// Reads a `t,u` file. Parse problems are invalid arguments, missing files I/O errors.
pub fn read_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers().map_err(|e| io_err(path, e))?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "u" {
        return Err(Error::InvalidArgument(format!(
            "{}: expected header `t,u`",
            path.display()
        )));
    }
    let (mut t, mut u) = (Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("{}: row {}: bad number `{s}`", path.display(), row + 1))
            })
        };
        t.push(parse(&rec[0])?);
        u.push(parse(&rec[1])?);
    }
    Ok((t, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let t = [0.0, 0.1, 0.2];
        let u = [0.0, 1.0 / 3.0, -2.5e-300];
        write_columns(&path, &t, &u).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,u\n0,0\n0.10000000000000001,0.33333333333333331\n"));
        assert_eq!(read_columns(&path).unwrap(), (t.to_vec(), u.to_vec()));
    }

    #[test]
    fn rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "x,y\n0,0\n").unwrap();
        assert!(matches!(read_columns(&path), Err(Error::InvalidArgument(_))));
        assert!(matches!(read_columns(&dir.path().join("none.csv")), Err(Error::Io(_))));
    }
}
