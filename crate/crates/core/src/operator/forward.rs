//! The discretized forward operator: boundary data rows indexed by
//! (frequency, detector), interior source columns.

use ndarray::Array2;
use num_complex::Complex64;

use super::{Discretization, FrequencyGrid};
use crate::attenuation::AttenuationModel;
use crate::error::{Error, Result};

/// Dense forward operator matrix. Rows are (ω_i, ξ_j) pairs in frequency-
/// major order, columns are interior points; the interior quadrature
/// weight is folded into each entry, so applying the matrix to source
/// coefficients evaluates the discretized integral.
///
/// The full matrix can be very large, so entries are produced as
/// per-frequency row blocks; [`OperatorMatrix::materialize`] guards
/// against oversized allocations.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub model: AttenuationModel,
    pub disc: Discretization,
    pub freq: FrequencyGrid,
}

impl OperatorMatrix {
    pub fn new(model: AttenuationModel, disc: Discretization, freq: FrequencyGrid) -> Result<Self> {
        model.validate()?;
        Ok(OperatorMatrix { model, disc, freq })
    }

    /// (rows, cols) of the materialized matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.freq.len() * self.disc.n_boundary(), self.disc.n_interior())
    }

    /// Row weights wω_i · wξ_j in frequency-major order.
    pub fn row_weights(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.freq.len() * self.disc.n_boundary());
        for (_, w_omega) in self.freq.nodes() {
            for w_xi in &self.disc.boundary.weights {
                out.push(w_omega * w_xi);
            }
        }
        out
    }

    /// Entry block for one frequency: (n_boundary × n_interior), interior
    /// weights folded in.
    pub fn row_block(&self, omega: f64) -> Array2<Complex64> {
        let mut block = self.disc.kernel_block(self.model.kappa(omega));
        for (k, w) in self.disc.interior.weights.iter().enumerate() {
            for j in 0..self.disc.n_boundary() {
                block[[j, k]] *= *w;
            }
        }
        block
    }

    /// Applies the operator to interior coefficients, returning data in
    /// frequency-major row order.
    pub fn apply(&self, h: &[f64]) -> Result<Vec<Complex64>> {
        if h.len() != self.disc.n_interior() {
            return Err(Error::InvalidParameter(format!(
                "source vector length {} does not match {} interior points",
                h.len(),
                self.disc.n_interior()
            )));
        }
        let hv = ndarray::Array1::from_iter(h.iter().map(|&x| Complex64::new(x, 0.0)));
        let mut out = Vec::with_capacity(self.freq.len() * self.disc.n_boundary());
        for (omega, _) in self.freq.nodes() {
            let block = self.row_block(omega);
            out.extend(block.dot(&hv));
        }
        Ok(out)
    }

    /// Materializes the dense matrix; refuses allocations above ~2 GiB.
    pub fn materialize(&self) -> Result<Array2<Complex64>> {
        let (rows, cols) = self.shape();
        let bytes = rows * cols * std::mem::size_of::<Complex64>();
        if bytes > 2 << 30 {
            return Err(Error::Guard(format!(
                "forward matrix of {rows}x{cols} entries needs {bytes} bytes; \
                 use row_block streaming instead"
            )));
        }
        let mut full = Array2::<Complex64>::zeros((rows, cols));
        let nb = self.disc.n_boundary();
        for (i, (omega, _)) in self.freq.nodes().into_iter().enumerate() {
            let block = self.row_block(omega);
            full.slice_mut(ndarray::s![i * nb..(i + 1) * nb, ..]).assign(&block);
        }
        Ok(full)
    }
}
