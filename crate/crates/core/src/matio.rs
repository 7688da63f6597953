//! File formats: the flat binary Gram-matrix layout and plot-ready CSV
//! emitters.
//!
//! The binary layout is: two u64 dimensions (rows, cols), the interior
//! quadrature weights as 64-bit floats, then the matrix entries row-major
//! as (re, im) pairs. All values little-endian. Spectra and traces go to
//! CSV, which round-trips f64 through the shortest-representation
//! formatter, so identical runs produce bit-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{GramKernel, GramMeta};
use crate::signals::TimeTrace;
use crate::spectra::SpectrumReport;

pub fn write_gram(path: &Path, gram: &GramKernel) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = gram.n() as u64;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    for weight in &gram.weights {
        w.write_all(&weight.to_le_bytes())?;
    }
    for a in 0..gram.n() {
        for b in 0..gram.n() {
            let z = gram.values[[a, b]];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_gram(path: &Path) -> Result<GramKernel> {
    let mut r = BufReader::new(File::open(path)?);
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf)?;
    let rows = u64::from_le_bytes(u64buf) as usize;
    r.read_exact(&mut u64buf)?;
    let cols = u64::from_le_bytes(u64buf) as usize;
    if rows != cols || rows == 0 || rows > 1 << 20 {
        return Err(Error::Format(format!("gram file has invalid dimensions {rows}x{cols}")));
    }
    let mut weights = vec![0.0f64; cols];
    let mut f64buf = [0u8; 8];
    for w in weights.iter_mut() {
        r.read_exact(&mut f64buf)?;
        *w = f64::from_le_bytes(f64buf);
    }
    let mut values = Array2::<Complex64>::zeros((rows, cols));
    for a in 0..rows {
        for b in 0..cols {
            r.read_exact(&mut f64buf)?;
            let re = f64::from_le_bytes(f64buf);
            r.read_exact(&mut f64buf)?;
            let im = f64::from_le_bytes(f64buf);
            values[[a, b]] = Complex64::new(re, im);
        }
    }
    GramKernel::new(
        values,
        weights,
        GramMeta {
            model: "unknown".into(),
            assembly: "file".into(),
            omega_cut: 0.0,
            n_boundary: 0,
            n_interior: cols,
            spacing: 0.0,
            radius: 0.0,
            eps: 0.0,
        },
    )
}

pub fn write_spectrum_csv(path: &Path, spectrum: &SpectrumReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "n,lambda")?;
    for (i, v) in spectrum.eigenvalues.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectrum_csv(path: &Path) -> Result<SpectrumReport> {
    let r = BufReader::new(File::open(path)?);
    let mut values = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line.trim() != "n,lambda" {
                return Err(Error::Format(format!("expected 'n,lambda' header, got '{line}'")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let value = line
            .split(',')
            .nth(1)
            .ok_or_else(|| Error::Format(format!("bad spectrum row '{line}'")))?;
        values.push(
            value
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("bad eigenvalue '{value}': {e}")))?,
        );
    }
    SpectrumReport::from_eigenvalues(values, "file", "file")
}

pub fn write_trace_csv(path: &Path, trace: &TimeTrace) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,p")?;
    for (t, p) in trace.times.iter().zip(&trace.values) {
        writeln!(w, "{t},{p}")?;
    }
    w.flush()?;
    Ok(())
}

/// Samples of the holomorphic extension on the upper half-plane.
pub fn write_range_csv(path: &Path, samples: &[crate::attenuation::RangeSample]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "re_z,im_z,re_k,im_k")?;
    for s in samples {
        writeln!(w, "{},{},{},{}", s.z.re, s.z.im, s.kappa.re, s.kappa.im)?;
    }
    w.flush()?;
    Ok(())
}

/// Frequency-integral sweep rows (j, integral, fitted envelope bound).
pub fn write_freqint_csv(path: &Path, rows: &[(u32, f64, f64)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "j,integral,bound")?;
    for (j, q, bound) in rows {
        writeln!(w, "{j},{q},{bound}")?;
    }
    w.flush()?;
    Ok(())
}

/// Finite-rank bound sweep rows (r, tail_sum, bound, ok).
pub fn write_bounds_csv(path: &Path, rows: &[(usize, f64, f64, bool)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "r,tail_sum,bound,ok")?;
    for (r, lhs, rhs, ok) in rows {
        writeln!(w, "{r},{lhs},{rhs},{ok}")?;
    }
    w.flush()?;
    Ok(())
}
