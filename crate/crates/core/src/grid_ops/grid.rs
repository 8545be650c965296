use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Uniform tensor grid of interior nodes.
///
/// Nodes sit on the integer lattice `h·Z^ν`: the node with per-axis index `k`
/// has coordinate `(start + k)·h`. The Dirichlet walls are the lattice points
/// just outside the node range. Values are stored row-major with axis 1 the
/// slowest index.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    nu: usize,
    h: f64,
    start: [i64; 2],
    counts: [usize; 2],
}

impl Grid {
    pub fn new(nu: usize, h: f64, start: &[i64], counts: &[usize]) -> Result<Self> {
        if nu != 1 && nu != 2 {
            return Err(Error::InvalidDimension(nu));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::NonPositiveSpacing(h));
        }
        if start.len() != nu || counts.len() != nu {
            return Err(Error::InvalidArgument(format!(
                "expected {nu} axis entries, got {} starts and {} counts",
                start.len(),
                counts.len()
            )));
        }
        if counts.iter().any(|&c| c < 3) {
            return Err(Error::InvalidArgument(
                "every axis needs at least 3 nodes".into(),
            ));
        }
        let mut s = [0i64; 2];
        let mut c = [1usize; 2];
        s[..nu].copy_from_slice(start);
        c[..nu].copy_from_slice(counts);
        Ok(Grid {
            nu,
            h,
            start: s,
            counts: c,
        })
    }

    /// A 1D grid of `n` nodes at `h, 2h, …, n·h`, used to host small toy operators.
    pub fn line(n: usize, h: f64) -> Self {
        Grid {
            nu: 1,
            h,
            start: [1, 0],
            counts: [n.max(1), 1],
        }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.nu]
    }

    pub fn start(&self) -> &[i64] {
        &self.start[..self.nu]
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of nodes in one axis-1 slice.
    pub fn slice_len(&self) -> usize {
        self.counts[1]
    }

    /// `h^ν`, the quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.nu as i32)
    }

    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        (self.start[axis] + k as i64) as f64 * self.h
    }

    /// First and last node coordinate along `axis`.
    pub fn extent(&self, axis: usize) -> (f64, f64) {
        (self.coord(axis, 0), self.coord(axis, self.counts[axis] - 1))
    }

    /// Lattice range `[first, last]` of node indices along `axis`.
    pub fn lattice_range(&self, axis: usize) -> (i64, i64) {
        (
            self.start[axis],
            self.start[axis] + self.counts[axis] as i64 - 1,
        )
    }

    /// Coordinates of node `idx`; the second entry is 0 in 1D.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let n2 = self.counts[1];
        let (k1, k2) = (idx / n2, idx % n2);
        if self.nu == 1 {
            [self.coord(0, k1), 0.0]
        } else {
            [self.coord(0, k1), self.coord(1, k2)]
        }
    }

    /// Storage index of the node at lattice position `(l1, l2)`, if inside.
    pub fn index_of(&self, l1: i64, l2: i64) -> Option<usize> {
        let k1 = l1 - self.start[0];
        let k2 = l2 - self.start[1];
        if k1 < 0 || k2 < 0 || k1 >= self.counts[0] as i64 || k2 >= self.counts[1] as i64 {
            return None;
        }
        Some(k1 as usize * self.counts[1] + k2 as usize)
    }

    /// Lattice index of `x` when it is an integer multiple of `h` (within 1e-9 steps).
    pub fn lattice_of(&self, x: f64) -> Option<i64> {
        let t = x / self.h;
        let r = t.round();
        ((t - r).abs() <= 1e-9 * r.abs().max(1.0)).then_some(r as i64)
    }

    /// Same spacing and dimension, so node values can be copied by index shift.
    pub fn same_lattice(&self, other: &Grid) -> bool {
        self.nu == other.nu && self.h == other.h
    }
}

/// Real samples on the nodes of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        GridFunction { grid, values }
    }

    /// Samples `f` at every node; `f` receives the node coordinates (length ν).
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let nu = grid.nu();
        let values = (0..grid.len())
            .map(|i| f(&grid.point(i)[..nu]))
            .collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at lattice position `(l1, l2)`, zero outside the grid.
    pub fn at_lattice(&self, l1: i64, l2: i64) -> f64 {
        self.grid.index_of(l1, l2).map_or(0.0, |i| self.values[i])
    }

    /// Grid inner product `h^ν Σ f g`.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.grid.cell_volume() * dot(&self.values, &other.values))
    }

    /// Grid norm `sqrt(h^ν Σ f²)`.
    pub fn norm(&self) -> f64 {
        (self.grid.cell_volume() * dot(&self.values, &self.values)).sqrt()
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= s);
        self
    }

    /// Samples of `x ↦ self(x − steps·h·e₁)` on `target`, zero where the
    /// preimage falls outside this grid.
    pub fn translated_onto(&self, target: &Grid, steps: i64) -> Result<GridFunction> {
        if !self.grid.same_lattice(target) {
            return Err(Error::GridMismatch);
        }
        let t1 = target.lattice_range(0).0;
        let t2 = target.lattice_range(1).0;
        let n2 = target.counts[1];
        let rows_match = self.grid.lattice_range(1) == target.lattice_range(1);
        let mut out = GridFunction::zeros(target.clone());
        for (k1, row) in out.values.chunks_mut(n2).enumerate() {
            let l1 = t1 + k1 as i64 - steps;
            match self.grid.index_of(l1, t2) {
                Some(src) if rows_match => row.copy_from_slice(&self.values[src..src + n2]),
                _ => {
                    for (k2, v) in row.iter_mut().enumerate() {
                        *v = self.at_lattice(l1, t2 + k2 as i64);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `R^{steps·h}` on the same grid.
    pub fn translate(&self, steps: i64) -> GridFunction {
        self.translated_onto(&self.grid, steps)
            .expect("a grid shares its own lattice")
    }

    /// Serializes to the flat binary layout: little-endian f64 header
    /// `ν, counts…, h, origin…` followed by the row-major values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nu = self.grid.nu;
        let mut header = vec![nu as f64];
        header.extend(self.grid.counts().iter().map(|&c| c as f64));
        header.push(self.grid.h);
        header.extend((0..nu).map(|a| self.grid.coord(a, 0)));
        header
            .iter()
            .chain(&self.values)
            .flat_map(|v| v.to_le_bytes())
            .collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if !bytes.len().is_multiple_of(8) {
            return Err("length is not a multiple of 8".into());
        }
        let words: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let nu = *words.first().ok_or("empty file")? as usize;
        if nu != 1 && nu != 2 {
            return Err(format!("unsupported dimension {nu}"));
        }
        let header_len = 1 + 2 * nu + 1;
        if words.len() < header_len {
            return Err("truncated header".into());
        }
        let counts: Vec<usize> = words[1..1 + nu].iter().map(|&c| c as usize).collect();
        let h = words[1 + nu];
        let start: Vec<i64> = words[2 + nu..header_len]
            .iter()
            .map(|&o| (o / h).round() as i64)
            .collect();
        let grid = Grid::new(nu, h, &start, &counts).map_err(|e| e.to_string())?;
        let values = words[header_len..].to_vec();
        GridFunction::new(grid, values).map_err(|e| e.to_string())
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|message| Error::Format {
            path: path.into(),
            message,
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
