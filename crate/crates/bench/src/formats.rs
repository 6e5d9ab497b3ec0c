//! Binary PGM images and the plain-text matrix exchange format.

use std::fmt::Write as _;
use std::path::Path;

use bca_core::linalg::DenseMatrix;
use bca_core::Matrix;

use crate::error::{BenchError, Result};

/// Grayscale image held as one `1 × (width·height)` row in `[-1, 1]`, row-major pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Matrix,
}

impl Image {
    pub fn from_row(row: &[f64], width: usize, height: usize) -> Result<Self> {
        if row.len() != width * height || row.is_empty() {
            return Err(BenchError::Config(format!(
                "{} pixels do not fill a {width}x{height} image",
                row.len()
            )));
        }
        let pixels = DenseMatrix::from_vec(1, row.len(), row.to_vec())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }
}

fn pixel_to_level(v: u8) -> f64 {
    v as f64 / 127.5 - 1.0
}

fn level_to_pixel(x: f64) -> u8 {
    ((x + 1.0) * 127.5).clamp(0.0, 255.0).round() as u8
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> std::result::Result<usize, (usize, String)> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err((start, "expected a decimal number".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| (start, "number out of range".into()))
    }
}

/// Parses a binary PGM (`P5`, maxval 255) from memory.
pub fn parse_pgm(bytes: &[u8]) -> std::result::Result<Image, (usize, String)> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err((0, "missing P5 magic".into()));
    }
    let mut h = Header { bytes, pos: 2 };
    let width_at = h.pos;
    let width = h.number()?;
    let height = h.number()?;
    if width == 0 || height == 0 {
        return Err((width_at, format!("empty image {width}x{height}")));
    }
    let maxval_at = h.pos;
    let maxval = h.number()?;
    if maxval != 255 {
        return Err((maxval_at, format!("maxval {maxval} unsupported, need 255")));
    }
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err((h.pos, "expected whitespace before pixel data".into())),
    }
    let n = width
        .checked_mul(height)
        .ok_or((width_at, "dimensions overflow".to_string()))?;
    let data = &bytes[h.pos..];
    if data.len() < n {
        return Err((
            bytes.len(),
            format!("truncated pixel data: {} of {n} bytes", data.len()),
        ));
    }
    let row: Vec<f64> = data[..n].iter().map(|&v| pixel_to_level(v)).collect();
    Ok(Image {
        width,
        height,
        pixels: DenseMatrix::from_vec(1, n, row).expect("nonempty finite row"),
    })
}

pub fn load_pgm(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|e| BenchError::io(path, e))?;
    parse_pgm(&bytes).map_err(|(offset, message)| BenchError::Format {
        path: path.to_path_buf(),
        offset,
        message,
    })
}

pub fn encode_pgm(image: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend(image.pixels.as_slice().iter().map(|&x| level_to_pixel(x)));
    out
}

/// Writes the image, clipping to `[0, 255]` with round-half-away-from-zero.
pub fn save_pgm(image: &Image, path: &Path) -> Result<()> {
    std::fs::write(path, encode_pgm(image)).map_err(|e| BenchError::io(path, e))
}

/// `rows,cols` header, then one comma-separated row per line at full precision.
pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = format!("{},{}\n", m.rows(), m.cols());
    for row in m.rows_iter() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").expect("write to String");
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix_csv(text: &str) -> std::result::Result<Matrix, (usize, String)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or((1, "empty file".to_string()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|f| f.trim().parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| (1, format!("bad header '{header}', expected rows,cols")))?;
    let [rows, cols] = dims[..] else {
        return Err((1, format!("bad header '{header}', expected rows,cols")));
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (i, line) in lines {
        seen += 1;
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| (i + 1, format!("bad number '{}'", field.trim())))?;
            data.push(v);
        }
        if data.len() - before != cols {
            return Err((
                i + 1,
                format!("expected {cols} values, found {}", data.len() - before),
            ));
        }
    }
    if seen != rows {
        return Err((seen + 1, format!("expected {rows} rows, found {seen}")));
    }
    DenseMatrix::from_vec(rows, cols, data).map_err(|e| (1, e.to_string()))
}

/// Reads a matrix file; errors report the line number in place of a byte offset.
pub fn load_matrix_csv(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_matrix_csv(&text).map_err(|(line, message)| BenchError::Format {
        path: path.to_path_buf(),
        offset: line,
        message,
    })
}

pub fn save_matrix_csv(m: &Matrix, path: &Path) -> Result<()> {
    std::fs::write(path, matrix_to_csv(m)).map_err(|e| BenchError::io(path, e))
}
