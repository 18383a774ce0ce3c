//! 1D sample files, binary PGM images and coefficient dumps.
//!
//! * Text samples: one float per line; blank lines and `#` comments skipped.
//! * Raw samples: little-endian `f64`, no header.
//! * PGM: binary `P5` with maxval ≤ 255. Pixels are read as reals in
//!   `[0, 255]` and clamped and rounded on output.
//! * Coefficients: a header line `# coefficients <extent> levels=<L> filter=<f>`
//!   followed by one value per line, in layout storage order.

use std::fs;
use std::path::Path;

use crate::wavelet::{CoefficientVector, Extent, FilterKind, Image2D, Signal1D, SubbandLayout};

use super::BenchError;

/// A 1D signal or an image, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Data {
    Samples(Signal1D),
    Image(Image2D),
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, BenchError> {
    fs::read(path).map_err(|cause| BenchError::Io {
        path: path.display().to_string(),
        cause,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    fs::write(path, bytes).map_err(|cause| BenchError::Io {
        path: path.display().to_string(),
        cause,
    })
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> BenchError {
    BenchError::Malformed {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// True for `.pgm` paths, case-insensitively.
pub fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

pub fn parse_samples_text(path: &Path, text: &str) -> Result<Vec<f64>, BenchError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| malformed(path, i + 1, format!("not a number: {line:?}")))?;
        if !v.is_finite() {
            return Err(malformed(path, i + 1, "non-finite value"));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn read_samples_text(path: &Path) -> Result<Vec<f64>, BenchError> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| malformed(path, 0, "not UTF-8 text"))?;
    parse_samples_text(path, &text)
}

pub fn read_samples_raw(path: &Path) -> Result<Vec<f64>, BenchError> {
    let bytes = read_bytes(path)?;
    if bytes.len() % 8 != 0 {
        return Err(malformed(path, 0, "raw length is not a multiple of 8 bytes"));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(malformed(path, 0, "non-finite value"));
    }
    Ok(values)
}

pub fn format_samples_text(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 20);
    for v in values {
        s.push_str(&format!("{v}\n"));
    }
    s
}

pub fn write_samples_text(path: &Path, values: &[f64]) -> Result<(), BenchError> {
    write_bytes(path, format_samples_text(values).as_bytes())
}

pub fn write_samples_raw(path: &Path, values: &[f64]) -> Result<(), BenchError> {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_bytes(path, &bytes)
}

/// Reads a 1D signal as text, or raw `f64` with `raw`.
pub fn read_signal(path: &Path, raw: bool) -> Result<Signal1D, BenchError> {
    let values = if raw {
        read_samples_raw(path)?
    } else {
        read_samples_text(path)?
    };
    Ok(Signal1D::new(values)?)
}

pub fn write_signal(path: &Path, signal: &Signal1D, raw: bool) -> Result<(), BenchError> {
    if raw {
        write_samples_raw(path, signal.samples())
    } else {
        write_samples_text(path, signal.samples())
    }
}

/// Reads a PGM image by extension, otherwise a 1D signal.
pub fn read_data(path: &Path, raw: bool) -> Result<Data, BenchError> {
    if is_pgm(path) {
        Ok(Data::Image(read_pgm(path)?))
    } else {
        Ok(Data::Samples(read_signal(path, raw)?))
    }
}

pub fn write_data(path: &Path, data: &Data, raw: bool) -> Result<(), BenchError> {
    match data {
        Data::Samples(s) => write_signal(path, s, raw),
        Data::Image(img) => write_pgm(path, img),
    }
}

struct PgmHeader {
    cols: usize,
    rows: usize,
    maxval: usize,
    data_start: usize,
}

fn parse_pgm_header(path: &Path, bytes: &[u8]) -> Result<PgmHeader, BenchError> {
    let bad = |m: &str| BenchError::Pgm {
        path: path.display().to_string(),
        message: m.to_string(),
    };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(bad("missing P5 magic number (only binary graymaps are supported)"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(bad("expected a decimal header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("header field out of range"))?;
    }
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(bad("missing whitespace after maxval"));
    }
    let [cols, rows, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(bad("maxval must be in 1..=255 (16-bit graymaps are not supported)"));
    }
    Ok(PgmHeader {
        cols,
        rows,
        maxval,
        data_start: pos + 1,
    })
}

pub fn read_pgm(path: &Path) -> Result<Image2D, BenchError> {
    let bytes = read_bytes(path)?;
    let header = parse_pgm_header(path, &bytes)?;
    let count = header.rows * header.cols;
    let data = &bytes[header.data_start..];
    if data.len() < count {
        return Err(BenchError::Pgm {
            path: path.display().to_string(),
            message: format!("expected {count} pixels, found {}", data.len()),
        });
    }
    let scale = 255.0 / header.maxval as f64;
    let pixels = data[..count].iter().map(|&b| b as f64 * scale).collect();
    Ok(Image2D::new(header.rows, header.cols, pixels)?)
}

/// Encodes an image as binary PGM, clamping to `[0, 255]` and rounding.
pub fn encode_pgm(image: &Image2D) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.cols(), image.rows()).into_bytes();
    out.extend(image.pixels().iter().map(|&p| p.clamp(0.0, 255.0).round() as u8));
    out
}

pub fn write_pgm(path: &Path, image: &Image2D) -> Result<(), BenchError> {
    write_bytes(path, &encode_pgm(image))
}

/// Text dump of transform coefficients, including the layout header.
pub fn format_coefficients(coeffs: &CoefficientVector, filter: FilterKind) -> String {
    let layout = coeffs.layout();
    let extent = match layout.extent() {
        Extent::OneD(n) => format!("{n}"),
        Extent::TwoD { rows, cols } => format!("{rows}x{cols}"),
    };
    let mut s = format!(
        "# coefficients {extent} levels={} filter={}\n",
        layout.levels(),
        filter.name()
    );
    s.push_str(&format_samples_text(coeffs.values()));
    s
}

pub fn write_coefficients(path: &Path, coeffs: &CoefficientVector, filter: FilterKind) -> Result<(), BenchError> {
    write_bytes(path, format_coefficients(coeffs, filter).as_bytes())
}

pub fn parse_coefficients(path: &Path, text: &str) -> Result<(CoefficientVector, FilterKind), BenchError> {
    let header = text
        .lines()
        .next()
        .ok_or_else(|| malformed(path, 1, "empty coefficient file"))?;
    let bad_header = || malformed(path, 1, "expected `# coefficients <n|RxC> levels=<L> filter=<f>`");
    let mut parts = header
        .strip_prefix("# coefficients ")
        .ok_or_else(bad_header)?
        .split_whitespace();
    let extent = parts.next().ok_or_else(bad_header)?;
    let levels: usize = parts
        .next()
        .and_then(|p| p.strip_prefix("levels="))
        .and_then(|p| p.parse().ok())
        .ok_or_else(bad_header)?;
    let filter: FilterKind = parts
        .next()
        .and_then(|p| p.strip_prefix("filter="))
        .and_then(|p| p.parse().ok())
        .ok_or_else(bad_header)?;
    let layout = match extent.split_once('x') {
        Some((r, c)) => {
            let rows = r.parse().map_err(|_| bad_header())?;
            let cols = c.parse().map_err(|_| bad_header())?;
            SubbandLayout::two_d(rows, cols, levels)?
        }
        None => SubbandLayout::one_d(extent.parse().map_err(|_| bad_header())?, levels)?,
    };
    let values = parse_samples_text(path, text)?;
    Ok((CoefficientVector::new(values, layout)?, filter))
}

pub fn read_coefficients(path: &Path) -> Result<(CoefficientVector, FilterKind), BenchError> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| malformed(path, 0, "not UTF-8 text"))?;
    parse_coefficients(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::{forward_dwt2, WaveletFilter};

    #[test]
    fn text_round_trip_is_exact() {
        let values = vec![0.1, -1e-300, 3.0, 1.0 / 3.0];
        let text = format_samples_text(&values);
        assert_eq!(parse_samples_text(Path::new("x"), &text).unwrap(), values);
    }

    #[test]
    fn text_reports_line_numbers() {
        let err = parse_samples_text(Path::new("x.txt"), "1\n# c\n\nfoo\n").unwrap_err();
        assert!(err.to_string().contains("x.txt:4"), "{err}");
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let pixels: Vec<f64> = (0..64).map(|i| (i * 4) as f64).collect();
        let img = Image2D::new(8, 8, pixels).unwrap();
        write_pgm(&path, &img).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), img);
    }

    #[test]
    fn pgm_clamps_and_rounds() {
        let img = Image2D::new(2, 2, vec![-3.0, 254.6, 300.0, 10.4]).unwrap();
        let bytes = encode_pgm(&img);
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 255, 255, 10]);
    }

    #[test]
    fn pgm_header_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let mut bytes = b"P5\n# made by hand\n2 2\n# max\n15\n".to_vec();
        bytes.extend([0u8, 15, 5, 10]);
        fs::write(&path, bytes).unwrap();
        let img = read_pgm(&path).unwrap();
        assert_eq!(img.pixels(), &[0.0, 255.0, 85.0, 170.0]);
    }

    #[test]
    fn pgm_rejects_ascii_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        fs::write(&path, b"P2\n2 2\n255\n0 0 0 0\n").unwrap();
        assert!(matches!(read_pgm(&path), Err(BenchError::Pgm { .. })));
        fs::write(&path, b"P5\n2 2\n255\n\x00\x01").unwrap();
        assert!(matches!(read_pgm(&path), Err(BenchError::Pgm { .. })));
    }

    #[test]
    fn coefficient_dump_round_trip() {
        let img = Image2D::new(4, 8, (0..32).map(|i| i as f64).collect()).unwrap();
        let c = forward_dwt2(&img, &WaveletFilter::new(FilterKind::D4), 2).unwrap();
        let text = format_coefficients(&c, FilterKind::D4);
        let (back, filter) = parse_coefficients(Path::new("c"), &text).unwrap();
        assert_eq!(filter, FilterKind::D4);
        assert_eq!(back, c);
    }
}
