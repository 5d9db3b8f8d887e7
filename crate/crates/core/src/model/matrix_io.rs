//! Plain-text matrix files: a `# dim=<n> hermitian` header followed by one CSV
//! line per row; entries are `re`, `re+imi` or `re-imi`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

fn fmt_err<T>(line: usize, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Format(format!("line {line}: {msg}")))
}

/// Parses one entry such as `0.5`, `-1e-3+2i`, `0.5-0.25i`, `2i`.
pub fn parse_entry(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not part of an exponent or the leading sign.
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re, im))
}

/// Parses a correlation-matrix file; the header must carry the `hermitian` tag.
pub fn parse_matrix(text: &str) -> Result<CMat> {
    parse_with(text, true)
}

/// Parses a general square matrix (raw channel factors): `# dim=<n>` suffices.
pub fn parse_general_matrix(text: &str) -> Result<CMat> {
    parse_with(text, false)
}

fn parse_with(text: &str, need_hermitian: bool) -> Result<CMat> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((hl, header)) = lines.next() else {
        return Err(Error::Format("empty matrix file".into()));
    };
    let header = header.trim();
    let rest = header
        .strip_prefix('#')
        .map(str::trim)
        .ok_or_else(|| Error::Format(format!("line {}: missing `# dim=<n> hermitian` header", hl + 1)))?;
    let mut dim = None;
    let mut hermitian = false;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("dim=") {
            dim = v.parse::<usize>().ok();
        } else if tok == "hermitian" {
            hermitian = true;
        }
    }
    let (Some(n), true) = (dim, hermitian || !need_hermitian) else {
        return fmt_err(hl + 1, "header must read `# dim=<n> hermitian`");
    };
    if n == 0 {
        return fmt_err(hl + 1, "dim must be positive");
    }
    let mut m = CMat::zeros(n, n);
    let mut row = 0;
    for (ln, line) in lines {
        if line.trim_start().starts_with('#') {
            continue;
        }
        if row == n {
            return fmt_err(ln + 1, format!("more than {n} rows"));
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
        if fields.len() != n {
            return fmt_err(ln + 1, format!("expected {n} entries, found {}", fields.len()));
        }
        for (j, f) in fields.iter().enumerate() {
            match parse_entry(f) {
                Some(v) if v.re.is_finite() && v.im.is_finite() => m[(row, j)] = v,
                _ => return fmt_err(ln + 1, format!("cannot parse entry `{}`", f.trim())),
            }
        }
        row += 1;
    }
    if row != n {
        return Err(Error::Format(format!("expected {n} rows, found {row}")));
    }
    Ok(m)
}

pub fn format_entry(v: Complex64) -> String {
    if v.im == 0.0 {
        format!("{:.16e}", v.re)
    } else {
        let sign = if v.im.is_sign_negative() { '-' } else { '+' };
        format!("{:.16e}{sign}{:.16e}i", v.re, v.im.abs())
    }
}

pub fn format_matrix(m: &CMat) -> String {
    let mut out = format!("# dim={} hermitian\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_entry(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: &std::path::Path) -> Result<CMat> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn read_general_matrix(path: &std::path::Path) -> Result<CMat> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    parse_general_matrix(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_matrix(path: &std::path::Path, m: &CMat) -> Result<()> {
    std::fs::write(path, format_matrix(m)).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries() {
        assert_eq!(parse_entry("0.5"), Some(Complex64::new(0.5, 0.0)));
        assert_eq!(parse_entry("0.5-0.25i"), Some(Complex64::new(0.5, -0.25)));
        assert_eq!(parse_entry(" -1e-3+2E+1i "), Some(Complex64::new(-1e-3, 20.0)));
        assert_eq!(parse_entry("-2i"), Some(Complex64::new(0.0, -2.0)));
        assert_eq!(parse_entry("1.5e-2i"), Some(Complex64::new(0.0, 1.5e-2)));
        assert_eq!(parse_entry("abc"), None);
        assert_eq!(parse_entry(""), None);
    }

    #[test]
    fn round_trip_is_exact() {
        let m = CMat::from_fn(3, 3, |i, j| Complex64::new(0.1 * i as f64 + 1.0 / 3.0, (j as f64 - 1.0) / 7.0));
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn general_header() {
        let text = "# dim=2\n1,2i\n0,-1\n";
        assert!(parse_matrix(text).is_err());
        let m = parse_general_matrix(text).unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 2.0));
        assert_eq!(m[(1, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_matrix("1,0\n0,1\n").is_err());
        assert!(parse_matrix("# dim=2 hermitian\n1,0\n").is_err());
        assert!(parse_matrix("# dim=2 hermitian\n1,0,0\n0,1\n").is_err());
        assert!(parse_matrix("# dim=2\n1,0\n0,1\n").is_err());
        assert!(parse_matrix("# dim=2 hermitian\n1,x\n0,1\n").is_err());
    }
}
