use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Point2, Result};

/// Uniform `n x n` node lattice on `[-L, L]^2`; `n` odd so the origin is a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    n: usize,
}

impl Grid {
    pub const MIN_POINTS: usize = 65;

    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        if n < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} points per side, got {n}",
                Self::MIN_POINTS
            )));
        }
        if n % 2 == 0 {
            return Err(Error::InvalidGrid(format!("points per side must be odd, got {n}")));
        }
        Ok(Self { half_width, n })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node coordinate along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + self.h() * i as f64
    }

    /// Row-major index of node `(i, j)`; `i` runs along x, `j` along y.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    #[inline]
    pub fn node(&self, idx: usize) -> Point2 {
        let (i, j) = self.ij(idx);
        [self.coord(i), self.coord(j)]
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n - 1 || j == self.n - 1
    }

    /// Boundary node indices, counter-clockwise from the bottom-left corner.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let m = self.n - 1;
        let mut out = Vec::with_capacity(4 * m);
        out.extend((0..m).map(|i| self.index(i, 0)));
        out.extend((0..m).map(|j| self.index(m, j)));
        out.extend((1..=m).rev().map(|i| self.index(i, m)));
        out.extend((1..=m).rev().map(|j| self.index(0, j)));
        out
    }

    /// Same lattice on a square of twice the half width and twice the spacing
    /// count, so `h` is unchanged.
    pub fn doubled(&self) -> Result<Self> {
        Self::new(2.0 * self.half_width, 2 * self.n - 1)
    }
}

/// Complex values at the nodes of a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    data: Vec<Complex64>,
}

impl GridField {
    pub fn new(grid: Grid, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), grid.len(), "field length must match the grid");
        Self { grid, data }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::new(grid, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point2) -> Complex64) -> Self {
        let data = (0..grid.len()).map(|idx| f(grid.node(idx))).collect();
        Self::new(grid, data)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.grid.index(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::new(self.grid, self.data.iter().map(|&c| f(c)).collect())
    }

    pub fn sub(&self, other: &GridField) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self::new(self.grid, data))
    }

    /// Piecewise bicubic (4x4 Lagrange) interpolation. Returns `None` when the
    /// stencil would leave the grid.
    pub fn interpolate(&self, p: Point2) -> Option<Complex64> {
        let h = self.grid.h();
        let n = self.grid.n();
        let l = self.grid.half_width();
        let sx = (p[0] + l) / h;
        let sy = (p[1] + l) / h;
        if !(sx >= 0.0 && sy >= 0.0) {
            return None;
        }
        // base node so that the evaluation point lies in [base+1, base+2]
        let base = |s: f64| -> Option<(usize, f64)> {
            let cell = (s.floor() as usize).min(n - 2);
            let b = cell.checked_sub(1)?;
            if b + 3 >= n {
                return None;
            }
            Some((b, s - b as f64))
        };
        let (bx, tx) = base(sx)?;
        let (by, ty) = base(sy)?;
        let wx = lagrange4(tx);
        let wy = lagrange4(ty);
        let mut acc = Complex64::new(0.0, 0.0);
        for (dj, wyj) in wy.iter().enumerate() {
            let row = self.grid.index(bx, by + dj);
            let mut line = Complex64::new(0.0, 0.0);
            for (di, wxi) in wx.iter().enumerate() {
                line += self.data[row + di] * wxi;
            }
            acc += line * wyj;
        }
        Some(acc)
    }

    /// Binary layout: a text header line `"<L> <n>\n"` followed by `n*n`
    /// row-major `(re, im)` pairs of little-endian `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.grid.half_width(), self.grid.n())?;
        let mut buf = Vec::with_capacity(16 * self.data.len());
        for c in &self.data {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let mut parts = header.split_whitespace();
        let half_width: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad header '{}'", header.trim_end())))?;
        let n: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad header '{}'", header.trim_end())))?;
        let grid = Grid::new(half_width, n)?;
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        if bytes.len() != 16 * grid.len() {
            return Err(Error::Format(format!(
                "expected {} payload bytes, found {}",
                16 * grid.len(),
                bytes.len()
            )));
        }
        let data = bytes
            .chunks_exact(16)
            .map(|ch| {
                let re = f64::from_le_bytes(ch[..8].try_into().unwrap());
                let im = f64::from_le_bytes(ch[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self::new(grid, data))
    }

    /// CSV with header `x,y,re,im`, one node per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,re,im")?;
        for (idx, c) in self.data.iter().enumerate() {
            let p = self.grid.node(idx);
            writeln!(w, "{},{},{},{}", p[0], p[1], c.re, c.im)?;
        }
        Ok(())
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_binary(std::io::BufWriter::new(file))
    }
}

/// Cubic Lagrange weights on nodes 0..3 for a point at offset `t` from node 0.
#[inline]
fn lagrange4(t: f64) -> [f64; 4] {
    let (a, b, c, d) = (t, t - 1.0, t - 2.0, t - 3.0);
    [
        -b * c * d / 6.0,
        a * c * d / 2.0,
        -a * b * d / 2.0,
        a * b * c / 6.0,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        assert!(Grid::new(8.0, 64).is_err());
        assert!(Grid::new(8.0, 33).is_err());
        assert!(Grid::new(0.0, 65).is_err());
        let g = Grid::new(8.0, 65).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.coord(32), 0.0);
        assert_eq!(g.boundary_nodes().len(), 4 * 64);
        let d = g.doubled().unwrap();
        assert_eq!(d.h(), g.h());
    }

    #[test]
    fn interpolation_exact_on_cubics() {
        let g = Grid::new(4.0, 65).unwrap();
        let f = |p: Point2| Complex64::new(p[0] * p[0] * p[1] - 2.0 * p[1].powi(3), p[0]);
        let field = GridField::from_fn(g, f);
        for p in [[0.123, -1.7], [3.0, 2.0], [-3.7, 3.74]] {
            let v = field.interpolate(p).unwrap();
            assert!((v - f(p)).norm() < 1e-12, "{p:?}");
        }
        assert!(field.interpolate([3.99, 0.0]).is_none());
        assert!(field.interpolate([-4.5, 0.0]).is_none());
    }

    #[test]
    fn binary_round_trip() {
        let g = Grid::new(2.5, 65).unwrap();
        let field = GridField::from_fn(g, |p| Complex64::new(p[0].sin(), p[1] * 1e-300));
        let mut buf = Vec::new();
        field.write_binary(&mut buf).unwrap();
        assert!(buf.starts_with(b"2.5 65\n"));
        assert_eq!(buf.len(), 7 + 16 * g.len());
        let back = GridField::read_binary(&buf[..]).unwrap();
        assert_eq!(back, field);
        assert!(GridField::read_binary(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = Grid::new(1.0, 65).unwrap();
        let field = GridField::zeros(g);
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,re,im"));
        assert_eq!(lines.next(), Some("-1,-1,0,0"));
        assert_eq!(text.lines().count(), 1 + g.len());
    }
}
