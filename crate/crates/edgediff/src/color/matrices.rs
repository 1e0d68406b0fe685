//! 3x3 conversion matrices, white points, and the startup matrix table.
//!
//! The published matrices live in `data/matrices.txt` (embedded at compile
//! time, parsed once on first use). Inverses are computed numerically and
//! validated to round-trip against the forward matrix.

use crate::error::{Error, Result};
use crate::image::Space;
use std::collections::HashMap;
use std::sync::OnceLock;

/// Minimum absolute determinant for a usable conversion matrix.
const MIN_DETERMINANT: f64 = 1e-9;
/// Maximum per-entry deviation of M * M^-1 from the identity.
const ROUND_TRIP_TOL: f64 = 1e-10;

/// Tristimulus values of a reference white.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhitePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WhitePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x > 0.0 && y > 0.0 && z > 0.0 && x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidWhite(x, y, z));
        }
        Ok(Self { x, y, z })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// CIE D65, 2-degree observer, Y = 1.
    pub fn d65() -> WhitePoint {
        *table().white("d65").expect("d65 in embedded table")
    }

    /// Equal-energy illuminant E.
    pub fn equal_energy() -> WhitePoint {
        *table().white("equal_energy").expect("equal_energy in embedded table")
    }
}

/// A tagged, invertible 3x3 linear color transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionMatrix {
    entries: [[f64; 3]; 3],
    pub from_space: Space,
    pub to_space: Space,
}

impl ConversionMatrix {
    pub fn new(entries: [[f64; 3]; 3], from_space: Space, to_space: Space) -> Result<Self> {
        let det = det3(&entries);
        if det.abs() <= MIN_DETERMINANT {
            return Err(Error::SingularMatrix(det.abs()));
        }
        let m = Self {
            entries,
            from_space,
            to_space,
        };
        let inv = invert3(&entries, det);
        let rt = mat_mul(&entries, &inv);
        for (i, row) in rt.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (v - expect).abs() > ROUND_TRIP_TOL {
                    return Err(Error::SingularMatrix(det.abs()));
                }
            }
        }
        Ok(m)
    }

    pub fn entries(&self) -> &[[f64; 3]; 3] {
        &self.entries
    }

    pub fn determinant(&self) -> f64 {
        det3(&self.entries)
    }

    /// Numerically computed inverse with swapped space tags.
    pub fn inverse(&self) -> ConversionMatrix {
        ConversionMatrix {
            entries: invert3(&self.entries, det3(&self.entries)),
            from_space: self.to_space,
            to_space: self.from_space,
        }
    }

    #[inline]
    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.entries;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn invert3(m: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let inv_det = 1.0 / det;
    [
        [
            (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det,
        ],
        [
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det,
        ],
        [
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det,
        ],
    ]
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

/// The parsed matrix table: named matrices plus named white points.
#[derive(Debug)]
pub struct MatrixTable {
    matrices: HashMap<String, ConversionMatrix>,
    whites: HashMap<String, WhitePoint>,
}

impl MatrixTable {
    /// Parses the plain-text table format described in `data/matrices.txt`.
    pub fn parse(text: &str) -> Result<MatrixTable> {
        let mut matrices = HashMap::new();
        let mut whites = HashMap::new();
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));

        while let Some(header) = lines.next() {
            let mut parts = header.split_whitespace();
            match parts.next() {
                Some("matrix") => {
                    let name = parts
                        .next()
                        .ok_or_else(|| Error::parse("matrix table", "missing matrix name"))?;
                    let from = parse_space(parts.next(), name)?;
                    let to = parse_space(parts.next(), name)?;
                    let mut entries = [[0.0; 3]; 3];
                    for row in &mut entries {
                        let line = lines.next().ok_or_else(|| {
                            Error::parse("matrix table", format!("truncated matrix {name}"))
                        })?;
                        let vals = parse_row::<3>(line, name)?;
                        *row = vals;
                    }
                    matrices.insert(name.to_string(), ConversionMatrix::new(entries, from, to)?);
                }
                Some("white") => {
                    let name = parts
                        .next()
                        .ok_or_else(|| Error::parse("matrix table", "missing white name"))?;
                    let line = lines.next().ok_or_else(|| {
                        Error::parse("matrix table", format!("truncated white {name}"))
                    })?;
                    let v = parse_row::<3>(line, name)?;
                    whites.insert(name.to_string(), WhitePoint::new(v[0], v[1], v[2])?);
                }
                Some(other) => {
                    return Err(Error::parse(
                        "matrix table",
                        format!("unknown record type {other:?}"),
                    ));
                }
                None => unreachable!(),
            }
        }
        Ok(MatrixTable { matrices, whites })
    }

    /// Loads a table from an external file (same format as the embedded one).
    pub fn load(path: &std::path::Path) -> Result<MatrixTable> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn matrix(&self, name: &str) -> Result<&ConversionMatrix> {
        self.matrices
            .get(name)
            .ok_or_else(|| Error::parse("matrix table", format!("no matrix named {name:?}")))
    }

    pub fn white(&self, name: &str) -> Result<&WhitePoint> {
        self.whites
            .get(name)
            .ok_or_else(|| Error::parse("matrix table", format!("no white named {name:?}")))
    }

    pub fn matrix_names(&self) -> impl Iterator<Item = &str> {
        self.matrices.keys().map(String::as_str)
    }
}

fn parse_space(tok: Option<&str>, name: &str) -> Result<Space> {
    let tok =
        tok.ok_or_else(|| Error::parse("matrix table", format!("missing space tag for {name}")))?;
    Space::parse(tok)
        .ok_or_else(|| Error::parse("matrix table", format!("unknown space tag {tok:?} for {name}")))
}

fn parse_row<const N: usize>(line: &str, name: &str) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    let mut it = line.split_whitespace();
    for slot in &mut out {
        let tok = it
            .next()
            .ok_or_else(|| Error::parse("matrix table", format!("short row in {name}")))?;
        *slot = tok
            .parse::<f64>()
            .map_err(|e| Error::parse("matrix table", format!("bad number in {name}: {e}")))?;
    }
    if it.next().is_some() {
        return Err(Error::parse(
            "matrix table",
            format!("trailing values in row of {name}"),
        ));
    }
    Ok(out)
}

static TABLE: OnceLock<MatrixTable> = OnceLock::new();

/// The embedded matrix table, parsed once at first use.
pub fn table() -> &'static MatrixTable {
    TABLE.get_or_init(|| {
        MatrixTable::parse(include_str!("../../data/matrices.txt"))
            .expect("embedded matrix table is valid")
    })
}

/// Looks up a named matrix from the embedded table, panicking on a bad name.
/// Intended for the fixed names compiled into this crate.
pub(crate) fn builtin(name: &str) -> &'static ConversionMatrix {
    table()
        .matrix(name)
        .unwrap_or_else(|_| panic!("matrix {name:?} missing from embedded table"))
}
