//! Grid CSV files and raster helpers.
//!
//! A grid file holds one grid row per line, fields separated by a single
//! delimiter byte (comma by default), with an optional header line that is
//! skipped. Values are written in the shortest form that parses back to the
//! same `f64`, so a write/read cycle is bit-exact.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Location and layout of a grid CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridFile {
    pub path: PathBuf,
    pub delimiter: u8,
    pub header: bool,
}

impl GridFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        GridFile { path: path.into(), delimiter: b',', header: false }
    }

    pub fn delimiter(mut self, d: u8) -> Self {
        self.delimiter = d;
        self
    }

    pub fn header(mut self, h: bool) -> Self {
        self.header = h;
        self
    }
}

/// Parses grid CSV text. Row and column numbers in errors are 1-based and
/// count data rows only.
pub fn parse_grid<R: Read>(reader: R, delimiter: u8, header: bool) -> Result<Grid> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let row = r + 1;
        let rec = rec.map_err(|e| Error::Parse { row, col: 0, msg: e.to_string() })?;
        if let Some(first) = rows.first() {
            if rec.len() != first.len() {
                return Err(Error::Parse {
                    row,
                    col: rec.len().min(first.len()) + 1,
                    msg: format!("ragged row: {} fields, expected {}", rec.len(), first.len()),
                });
            }
        }
        let mut vals = Vec::with_capacity(rec.len());
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                col: c + 1,
                msg: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { row, col: c + 1, msg: format!("`{field}` is not finite") });
            }
            vals.push(v);
        }
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::Parse { row: 0, col: 0, msg: "no data rows".into() });
    }
    Grid::from_rows(&rows)
}

pub fn read_grid(file: &GridFile) -> Result<Grid> {
    let f = File::open(&file.path).map_err(|e| Error::io(&file.path, e))?;
    parse_grid(std::io::BufReader::new(f), file.delimiter, file.header)
}

/// Renders the grid as delimited text, one line per row.
pub fn format_grid(grid: &Grid, delimiter: u8) -> String {
    let d = delimiter as char;
    let mut out = String::with_capacity(grid.len() * 20);
    for i in 0..grid.n() {
        for j in 0..grid.m() {
            if j > 0 {
                out.push(d);
            }
            out.push_str(&format_f64(grid.get(i, j)));
        }
        out.push('\n');
    }
    out
}

/// Shortest decimal that round-trips; never more than 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_grid(grid: &Grid, file: &GridFile) -> Result<()> {
    write_text(&file.path, &format_grid(grid, file.delimiter))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// NDVI of two bands plus the number of cells where `nir + red = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ndvi {
    pub grid: Grid,
    /// Cells with a zero denominator; these are set to 0.
    pub flagged: usize,
}

/// `(nir - red) / (nir + red)` per cell.
pub fn ndvi(red: &Grid, nir: &Grid) -> Result<Ndvi> {
    if red.n() != nir.n() || red.m() != nir.m() {
        return Err(Error::DimensionMismatch(format!(
            "red band is {}x{}, nir band is {}x{}",
            red.n(),
            red.m(),
            nir.n(),
            nir.m()
        )));
    }
    for (band, g) in [("red", red), ("nir", nir)] {
        if let Some(pos) = g.as_slice().iter().position(|&v| v < 0.0) {
            let (i, j) = (pos % g.n(), pos / g.n());
            return Err(Error::InvalidArgument(format!(
                "{band} band is negative at row {}, column {}",
                i + 1,
                j + 1
            )));
        }
    }
    let mut flagged = 0;
    let vals: Vec<f64> = red
        .as_slice()
        .iter()
        .zip(nir.as_slice())
        .map(|(&r, &n)| {
            let den = n + r;
            if den == 0.0 {
                flagged += 1;
                0.0
            } else {
                (n - r) / den
            }
        })
        .collect();
    Ok(Ndvi { grid: Grid::unvec(red.n(), red.m(), vals)?, flagged })
}

/// Splits into `rows x cols` equal tiles, returned in row-major tile order:
/// tile `t` covers tile row `t / cols` and tile column `t % cols`.
pub fn split_grid(grid: &Grid, rows: usize, cols: usize) -> Result<Vec<Grid>> {
    let (n, m) = (grid.n(), grid.m());
    if rows == 0 || n % rows != 0 {
        return Err(Error::NotDivisible { dim: "rows", len: n, parts: rows });
    }
    if cols == 0 || m % cols != 0 {
        return Err(Error::NotDivisible { dim: "columns", len: m, parts: cols });
    }
    let (tn, tm) = (n / rows, m / cols);
    let mat = grid.matrix();
    let mut tiles = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let sub = mat.view((r * tn, c * tm), (tn, tm)).into_owned();
            tiles.push(Grid::from_matrix(sub)?);
        }
    }
    Ok(tiles)
}

/// Inverse of [`split_grid`].
pub fn assemble_tiles(tiles: &[Grid], rows: usize, cols: usize) -> Result<Grid> {
    if rows == 0 || cols == 0 || tiles.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} tiles cannot form a {rows}x{cols} layout",
            tiles.len()
        )));
    }
    let (tn, tm) = (tiles[0].n(), tiles[0].m());
    if let Some(bad) = tiles.iter().find(|t| t.n() != tn || t.m() != tm) {
        return Err(Error::DimensionMismatch(format!(
            "tile is {}x{}, expected {tn}x{tm}",
            bad.n(),
            bad.m()
        )));
    }
    let mut out = DMatrix::zeros(rows * tn, cols * tm);
    for (t, tile) in tiles.iter().enumerate() {
        let (r, c) = (t / cols, t % cols);
        out.view_mut((r * tn, c * tm), (tn, tm)).copy_from(tile.matrix());
    }
    Grid::from_matrix(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_with_header_and_spaces() {
        let g = parse_grid("a,b\n1, 2\n3 ,4.5\n".as_bytes(), b',', true).unwrap();
        assert_eq!(g.rows(), vec![vec![1.0, 2.0], vec![3.0, 4.5]]);
        let g = parse_grid("1;2\n3;4\n".as_bytes(), b';', false).unwrap();
        assert_eq!(g.get(1, 0), 3.0);
    }

    #[test]
    fn ragged_names_row() {
        let err = parse_grid("1,2,3\n4,5,6\n7,8\n".as_bytes(), b',', false).unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn bad_field_names_cell() {
        let err = parse_grid("1,2\n4,x\n".as_bytes(), b',', false).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, col: 2, .. }), "{err:?}");
        let err = parse_grid("1,NaN\n".as_bytes(), b',', false).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, col: 2, .. }), "{err:?}");
        assert!(matches!(parse_grid("".as_bytes(), b',', false), Err(Error::Parse { .. })));
    }

    #[test]
    fn ndvi_examples() {
        let red = Grid::from_rows(&[vec![0.1, 0.3, 0.2, 0.0]]).unwrap();
        let nir = Grid::from_rows(&[vec![0.5, 0.3, 0.0, 0.0]]).unwrap();
        let out = ndvi(&red, &nir).unwrap();
        assert!((out.grid.get(0, 0) - 0.4 / 0.6).abs() < 1e-15);
        assert_eq!(out.grid.get(0, 1), 0.0);
        assert_eq!(out.grid.get(0, 2), -1.0);
        assert_eq!(out.grid.get(0, 3), 0.0);
        assert_eq!(out.flagged, 1);
    }

    #[test]
    fn ndvi_rejects_bad_bands() {
        let a = Grid::constant(2, 3, 1.0).unwrap();
        let b = Grid::constant(3, 2, 1.0).unwrap();
        assert!(matches!(ndvi(&a, &b), Err(Error::DimensionMismatch(_))));
        let neg = Grid::constant(2, 3, -0.5).unwrap();
        assert!(matches!(ndvi(&neg, &a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn split_layout() {
        let g = Grid::from_matrix(DMatrix::from_fn(144, 125, |i, j| (i * 1000 + j) as f64)).unwrap();
        let tiles = split_grid(&g, 6, 5).unwrap();
        assert_eq!(tiles.len(), 30);
        assert!(tiles.iter().all(|t| t.n() == 24 && t.m() == 25));
        // tile 7 = tile row 1, tile column 2
        assert_eq!(tiles[7].get(0, 0), (24 * 1000 + 50) as f64);
        assert_eq!(split_grid(&g, 1, 1).unwrap()[0], g);
        assert!(matches!(split_grid(&g, 7, 5), Err(Error::NotDivisible { dim: "rows", .. })));
        assert!(matches!(split_grid(&g, 6, 4), Err(Error::NotDivisible { dim: "columns", .. })));
        assert!(matches!(split_grid(&g, 0, 5), Err(Error::NotDivisible { .. })));
    }

    proptest! {
        #[test]
        fn format_parse_roundtrip(vals in prop::collection::vec(-1e300f64..1e300, 12)) {
            let g = Grid::unvec(3, 4, vals).unwrap();
            let back = parse_grid(format_grid(&g, b',').as_bytes(), b',', false).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn split_then_assemble(r in 1usize..5, c in 1usize..5, tn in 1usize..5, tm in 1usize..5, seed in 0u64..1000) {
            let g = Grid::from_matrix(DMatrix::from_fn(r * tn, c * tm, |i, j| {
                ((i * 31 + j * 17) as u64 ^ seed) as f64 * 0.1
            })).unwrap();
            let tiles = split_grid(&g, r, c).unwrap();
            prop_assert_eq!(assemble_tiles(&tiles, r, c).unwrap(), g);
        }
    }
}
