//! One- and two-dimensional result tables and their CSV form.
//!
//! A 1-D table has one axis and is written as `<axis>,<value>` rows. A 2-D
//! table has axes `[x, y]` and is written as `<x>,<y>,<value>` rows with `y`
//! varying slowest. Numbers use `{:.16e}`, which round-trips every finite
//! `f64` exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nonempty, finite and strictly monotone.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid!("axis {} is empty", self.name));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid!("axis {} has non-finite values", self.name));
        }
        let inc = self.values.windows(2).all(|w| w[0] < w[1]);
        let dec = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(inc || dec) {
            return Err(invalid!("axis {} is not strictly monotone", self.name));
        }
        Ok(())
    }

    /// `n` evenly spaced points from `start` to `end` inclusive.
    pub fn linspace(name: impl Into<String>, start: f64, end: f64, n: usize) -> Self {
        let values = match n {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..n)
                .map(|k| start + (end - start) * k as f64 / (n - 1) as f64)
                .collect(),
        };
        Self::new(name, values)
    }

    /// `n` logarithmically spaced points from `start` to `end` inclusive.
    pub fn logspace(name: impl Into<String>, start: f64, end: f64, n: usize) -> Self {
        let lin = Self::linspace("", start.ln(), end.ln(), n);
        Self::new(name, lin.values.into_iter().map(f64::exp).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub value_name: String,
    /// 1-D: one value per axis point. 2-D: `values[iy * nx + ix]`.
    pub values: Vec<f64>,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

impl SweepResult {
    pub fn one_d(axis: Axis, value_name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::build(vec![axis], value_name.into(), values)
    }

    pub fn two_d(x: Axis, y: Axis, value_name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::build(vec![x, y], value_name.into(), values)
    }

    fn build(axes: Vec<Axis>, value_name: String, values: Vec<f64>) -> Result<Self> {
        let expected: usize = axes.iter().map(Axis::len).product();
        if expected != values.len() {
            return Err(invalid!(
                "table has {} values but axes span {expected} cells",
                values.len()
            ));
        }
        Ok(Self {
            axes,
            value_name,
            values,
        })
    }

    pub fn is_2d(&self) -> bool {
        self.axes.len() == 2
    }

    pub fn shape(&self) -> (usize, usize) {
        match self.axes.as_slice() {
            [x] => (x.len(), 1),
            [x, y] => (x.len(), y.len()),
            _ => (0, 0),
        }
    }

    /// Value at `(ix, iy)`; `iy` is ignored for 1-D tables.
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        let (nx, _) = self.shape();
        self.values[iy * nx + ix]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(t, value)` pairs of a 1-D table.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.axes[0].values.iter().copied().zip(self.values.iter().copied())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let mut header: Vec<&str> = self.axes.iter().map(|a| a.name.as_str()).collect();
        header.push(&self.value_name);
        out.write_record(&header)?;
        let (nx, ny) = self.shape();
        for iy in 0..ny {
            for ix in 0..nx {
                let mut row = vec![fmt(self.axes[0].values[ix])];
                if self.is_2d() {
                    row.push(fmt(self.axes[1].values[iy]));
                }
                row.push(fmt(self.values[iy * nx + ix]));
                out.write_record(&row)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    /// Parses a table written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let cols = header.len();
        if !(2..=3).contains(&cols) {
            return Err(Error::Parse(format!("expected 2 or 3 columns, found {cols}")));
        }
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("row {}: {f:?}: {e}", line + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != cols {
                return Err(Error::Parse(format!("row {} has {} fields", line + 2, row.len())));
            }
            rows.push(row);
        }
        let value_name = header[cols - 1].clone();
        if cols == 2 {
            let axis = Axis::new(header[0].clone(), rows.iter().map(|r| r[0]).collect());
            return Self::one_d(axis, value_name, rows.iter().map(|r| r[1]).collect());
        }
        // x varies fastest, so the x axis is the prefix before the first y change
        let y0 = rows.first().map(|r| r[1]);
        let nx = rows.iter().take_while(|r| Some(r[1]) == y0).count();
        if nx == 0 || !rows.len().is_multiple_of(nx) {
            return Err(Error::Parse("2-D table is not a full grid".into()));
        }
        let ny = rows.len() / nx;
        let xs: Vec<f64> = rows[..nx].iter().map(|r| r[0]).collect();
        let ys: Vec<f64> = (0..ny).map(|iy| rows[iy * nx][1]).collect();
        for (i, r) in rows.iter().enumerate() {
            if r[0] != xs[i % nx] || r[1] != ys[i / nx] {
                return Err(Error::Parse(format!("row {} breaks the grid layout", i + 2)));
            }
        }
        Self::two_d(
            Axis::new(header[0].clone(), xs),
            Axis::new(header[1].clone(), ys),
            value_name,
            rows.iter().map(|r| r[2]).collect(),
        )
    }
}
