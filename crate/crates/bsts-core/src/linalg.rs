//! Banded matrix primitives and multivariate-normal sampling from a
//! precision parameterisation.
//!
//! The state sampler works with the posterior *precision* of the latent
//! states, which is banded once the state vector is interleaved. Everything
//! here is therefore organised around a diagonal-major banded storage with a
//! banded Cholesky, plus a dense fallback for small or unstructured systems.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Square banded matrix with diagonal-major storage.
///
/// Entry `(i, j)` is stored iff `-(lower as isize) <= j - i <= upper as isize`;
/// everything outside the band is identically zero. Each diagonal occupies a
/// contiguous run of length `dim`, indexed by row, so sweeping a column
/// neighbourhood during the Cholesky stays cache-friendly.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    lower: usize,
    upper: usize,
    bands: Vec<f64>,
}

impl BandedMatrix {
    /// All-zero banded matrix. `lower`/`upper` are the sub/superdiagonal counts.
    pub fn zeros(dim: usize, lower: usize, upper: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("banded matrix needs dim >= 1".into()));
        }
        if lower >= dim || upper >= dim {
            return Err(Error::InvalidDimension(format!(
                "bandwidths ({lower}, {upper}) must be < dim {dim}"
            )));
        }
        Ok(Self {
            dim,
            lower,
            upper,
            bands: vec![0.0; (lower + upper + 1) * dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize;
        if off < -(self.lower as isize) || off > self.upper as isize {
            return None;
        }
        Some(((off + self.lower as isize) as usize) * self.dim + i)
    }

    /// Entry `(i, j)`; zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.dim && j < self.dim);
        match self.slot(i, j) {
            Some(s) => self.bands[s],
            None => 0.0,
        }
    }

    /// Set entry `(i, j)`. Panics if the position lies outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside band ({}, {})", self.lower, self.upper));
        self.bands[s] = value;
    }

    /// Add to entry `(i, j)`. Panics outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside band ({}, {})", self.lower, self.upper));
        self.bands[s] += value;
    }

    /// Dense copy, mostly for oracles and error reporting.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            let j_lo = i.saturating_sub(self.lower);
            let j_hi = (i + self.upper).min(self.dim - 1);
            for j in j_lo..=j_hi {
                m[(i, j)] = self.get(i, j);
            }
        }
        m
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim {
            return Err(Error::InvalidDimension(format!(
                "apply: vector length {} != dim {}",
                x.len(),
                self.dim
            )));
        }
        let mut out = DVector::zeros(self.dim);
        for i in 0..self.dim {
            let j_lo = i.saturating_sub(self.lower);
            let j_hi = (i + self.upper).min(self.dim - 1);
            let mut acc = 0.0;
            for j in j_lo..=j_hi {
                acc += self.get(i, j) * x[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Gram product `A' A`, itself banded with bandwidth `lower + upper` on
    /// both sides.
    pub fn gram(&self) -> BandedMatrix {
        let bw = self.lower + self.upper;
        let mut out = BandedMatrix::zeros(self.dim, bw.min(self.dim - 1), bw.min(self.dim - 1))
            .expect("gram bandwidth < dim");
        for i in 0..self.dim {
            let j_hi = (i + bw).min(self.dim - 1);
            for j in i..=j_hi {
                // rows k where both column i and column j are populated
                let k_lo = i.saturating_sub(self.upper).max(j.saturating_sub(self.upper));
                let k_hi = (i + self.lower).min(j + self.lower).min(self.dim - 1);
                let mut acc = 0.0;
                for k in k_lo..=k_hi {
                    acc += self.get(k, i) * self.get(k, j);
                }
                if acc != 0.0 || i == j {
                    out.set(i, j, acc);
                    if i != j {
                        out.set(j, i, acc);
                    }
                }
            }
        }
        out
    }
}

/// First-difference operator: `1` on the diagonal, `-1` on the first
/// subdiagonal. Applying it to a cumulative sum recovers the increments.
pub fn build_first_difference(t: usize) -> Result<BandedMatrix> {
    if t < 2 {
        return Err(Error::InvalidDimension(format!(
            "first-difference matrix needs T >= 2, got {t}"
        )));
    }
    let mut h = BandedMatrix::zeros(t, 1, 0)?;
    for i in 0..t {
        h.set(i, i, 1.0);
        if i > 0 {
            h.set(i, i - 1, -1.0);
        }
    }
    Ok(h)
}

/// Second-difference operator `H * H`: diagonal `1`, first subdiagonal `-2`,
/// second subdiagonal `1`, except row 1 which keeps the boundary `-2, 1`.
pub fn build_second_difference(t: usize) -> Result<BandedMatrix> {
    if t < 3 {
        return Err(Error::InvalidDimension(format!(
            "second-difference matrix needs T >= 3, got {t}"
        )));
    }
    let mut h2 = BandedMatrix::zeros(t, 2, 0)?;
    h2.set(0, 0, 1.0);
    h2.set(1, 0, -2.0);
    h2.set(1, 1, 1.0);
    for i in 2..t {
        h2.set(i, i - 2, 1.0);
        h2.set(i, i - 1, -2.0);
        h2.set(i, i, 1.0);
    }
    Ok(h2)
}

/// Banded Cholesky of a symmetric positive-definite banded matrix.
///
/// Returns the lower-triangular factor `L` with `L L' = P` and the same lower
/// bandwidth as `P`. Positive definiteness is verified pivot by pivot; the
/// failing index is reported so callers can locate which state broke down.
pub fn banded_cholesky(p: &BandedMatrix) -> Result<BandedMatrix> {
    let n = p.dim;
    let bw = p.lower.max(p.upper);
    let mut l = BandedMatrix::zeros(n, bw, 0)?;
    for j in 0..n {
        let k_lo = j.saturating_sub(bw);
        let mut diag = p.get(j, j);
        for k in k_lo..j {
            let v = l.get(j, k);
            diag -= v * v;
        }
        if !(diag.is_finite() && diag > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let ljj = diag.sqrt();
        l.set(j, j, ljj);
        let i_hi = (j + bw).min(n - 1);
        for i in (j + 1)..=i_hi {
            let mut s = p.get(i, j);
            let k_start = i.saturating_sub(bw).max(k_lo);
            for k in k_start..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / ljj);
        }
    }
    Ok(l)
}

/// Solve `L y = b` for lower-triangular banded `L`.
pub fn forward_solve(l: &BandedMatrix, b: &DVector<f64>) -> DVector<f64> {
    let n = l.dim;
    let bw = l.lower;
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let mut acc = b[i];
        let k_lo = i.saturating_sub(bw);
        for k in k_lo..i {
            acc -= l.get(i, k) * y[k];
        }
        y[i] = acc / l.get(i, i);
    }
    y
}

/// Solve `L' x = y` for lower-triangular banded `L`.
pub fn back_solve_transpose(l: &BandedMatrix, y: &DVector<f64>) -> DVector<f64> {
    let n = l.dim;
    let bw = l.lower;
    let mut x = DVector::zeros(n);
    for i in (0..n).rev() {
        let mut acc = y[i];
        let k_hi = (i + bw).min(n - 1);
        for k in (i + 1)..=k_hi {
            acc -= l.get(k, i) * x[k];
        }
        x[i] = acc / l.get(i, i);
    }
    x
}

/// Precision matrix in either banded or dense form.
///
/// The state sampler assembles a banded precision after interleaving; the
/// dense variant is the fallback for small systems (the 4-dimensional theta
/// block) or anything that is not banded after assembly.
#[derive(Debug, Clone)]
pub enum PrecisionMatrix {
    Banded(BandedMatrix),
    Dense(DMatrix<f64>),
}

impl PrecisionMatrix {
    pub fn dim(&self) -> usize {
        match self {
            PrecisionMatrix::Banded(b) => b.dim(),
            PrecisionMatrix::Dense(m) => m.nrows(),
        }
    }
}

/// Gaussian parameterised by its precision `P` and shift `b`, i.e. the
/// distribution `N(P^{-1} b, P^{-1})`.
#[derive(Debug, Clone)]
pub struct PrecisionGaussian {
    pub precision: PrecisionMatrix,
    pub shift: DVector<f64>,
}

impl PrecisionGaussian {
    pub fn new(precision: PrecisionMatrix, shift: DVector<f64>) -> Result<Self> {
        if precision.dim() != shift.len() {
            return Err(Error::InvalidDimension(format!(
                "precision dim {} != shift length {}",
                precision.dim(),
                shift.len()
            )));
        }
        Ok(Self { precision, shift })
    }

    /// Posterior mean `P^{-1} b`.
    pub fn mean(&self) -> Result<DVector<f64>> {
        match &self.precision {
            PrecisionMatrix::Banded(p) => {
                let l = banded_cholesky(p)?;
                let y = forward_solve(&l, &self.shift);
                Ok(back_solve_transpose(&l, &y))
            }
            PrecisionMatrix::Dense(p) => {
                let chol = dense_cholesky(p)?;
                Ok(chol.solve(&self.shift))
            }
        }
    }

    /// One exact draw from `N(P^{-1} b, P^{-1})`.
    ///
    /// The mean comes from a forward/back substitution pair; the stochastic
    /// part back-substitutes a standard-normal vector through `L'`, which has
    /// covariance `P^{-1}` by construction.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DVector<f64>> {
        let n = self.shift.len();
        let z = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        match &self.precision {
            PrecisionMatrix::Banded(p) => {
                let l = banded_cholesky(p)?;
                let y = forward_solve(&l, &self.shift);
                let mean = back_solve_transpose(&l, &y);
                let noise = back_solve_transpose(&l, &z);
                Ok(mean + noise)
            }
            PrecisionMatrix::Dense(p) => {
                let chol = dense_cholesky(p)?;
                let mean = chol.solve(&self.shift);
                let noise = chol
                    .l()
                    .transpose()
                    .solve_upper_triangular(&z)
                    .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
                Ok(mean + noise)
            }
        }
    }
}

/// Dense SPD Cholesky with the crate's error type.
pub fn dense_cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite { pivot: usize::MAX })
}
