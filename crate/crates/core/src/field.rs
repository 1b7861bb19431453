//! Sampled fields on periodic boxes and their discrete Fourier transforms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

type C = Complex64;

/// Shape and extent of a periodic box `[0, L_1) × … × [0, L_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub shape: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, lengths: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        if shape.len() != lengths.len() {
            return Err(Error::DimensionMismatch {
                expected: shape.len(),
                got: lengths.len(),
            });
        }
        if let Some(n) = shape.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGrid(format!("axis size {n} < 2")));
        }
        if let Some(l) = lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidGrid(format!("box length {l} is not positive")));
        }
        Ok(Grid { shape, lengths })
    }

    /// `N` points per axis on `[0, 2π)^dim`.
    pub fn cube(dim: usize, n: usize) -> Self {
        Grid {
            shape: vec![n; dim],
            lengths: vec![2.0 * std::f64::consts::PI; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.shape[axis] as f64
    }

    /// Multi-index of a flat row-major offset.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            idx[d] = flat % self.shape[d];
            flat /= self.shape[d];
        }
        idx
    }

    /// Physical coordinates of a flat offset.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(d, &i)| i as f64 * self.spacing(d))
            .collect()
    }

    /// Signed integer wavevector of a flat spectral offset (standard DFT ordering).
    pub fn wavevector(&self, flat: usize) -> Vec<i64> {
        self.unravel(flat)
            .iter()
            .zip(&self.shape)
            .map(|(&i, &n)| {
                if 2 * i < n {
                    i as i64
                } else {
                    i as i64 - n as i64
                }
            })
            .collect()
    }

    /// Angular wavenumbers `2π k_d / L_d` of a flat spectral offset.
    pub fn angular_wavevector(&self, flat: usize) -> Vec<f64> {
        self.wavevector(flat)
            .iter()
            .zip(&self.lengths)
            .map(|(&k, &l)| 2.0 * std::f64::consts::PI * k as f64 / l)
            .collect()
    }
}

/// Physical-space samples of a complex function on a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub data: Vec<C>,
}

/// Fourier coefficients of a [`Field`], normalized so that
/// `u(x) = Σ_k û_k e^{i k·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub data: Vec<C>,
}

impl Field {
    pub fn new(grid: Grid, data: Vec<C>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: data.len(),
            });
        }
        Ok(Field { grid, data })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Field {
            data: vec![C::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> C) -> Self {
        let data = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Field {
            grid: grid.clone(),
            data,
        }
    }

    pub fn forward(&self) -> SpectralField {
        let mut data = self.data.clone();
        fft_nd(&self.grid.shape, &mut data, FftDirection::Forward);
        let scale = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        SpectralField {
            grid: self.grid.clone(),
            data,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Relative L² distance `‖self − other‖ / ‖other‖`.
    pub fn relative_l2(&self, other: &Field) -> f64 {
        let diff: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        diff / other.l2_norm().max(f64::MIN_POSITIVE)
    }

    pub fn scaled(&self, s: C) -> Field {
        Field {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        Field {
            grid: self.grid.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            data: vec![C::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn inverse(&self) -> Field {
        let mut data = self.data.clone();
        fft_nd(&self.grid.shape, &mut data, FftDirection::Inverse);
        Field {
            grid: self.grid.clone(),
            data,
        }
    }

    /// Seeded random coefficients on every wavevector with `max |k_d| <= kmax`,
    /// Nyquist excluded. Real and imaginary parts are uniform in `[-1, 1)`.
    pub fn random_band_limited(grid: &Grid, kmax: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = SpectralField::zeros(grid);
        for (flat, v) in out.data.iter_mut().enumerate() {
            let inside = grid
                .wavevector(flat)
                .iter()
                .zip(&grid.shape)
                .all(|(&k, &n)| k.abs() <= kmax && 2 * k.unsigned_abs() < n as u64);
            if inside {
                *v = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        out
    }

    /// Trigonometric interpolant `Σ_k û_k e^{i k·x}` at an arbitrary point.
    ///
    /// Nyquist modes are split symmetrically between `±N/2` so that real
    /// band-limited data interpolates to real values.
    pub fn interpolate(&self, x: &[f64]) -> C {
        let grid = &self.grid;
        let dim = grid.dim();
        // Per-axis phase tables; a Nyquist index contributes cos(N/2 · x).
        let tables: Vec<Vec<C>> = (0..dim)
            .map(|d| {
                let n = grid.shape[d];
                let scale = 2.0 * std::f64::consts::PI / grid.lengths[d];
                (0..n)
                    .map(|i| {
                        if n.is_multiple_of(2) && 2 * i == n {
                            C::new((scale * (n / 2) as f64 * x[d]).cos(), 0.0)
                        } else {
                            let k = if 2 * i < n { i as f64 } else { i as f64 - n as f64 };
                            C::from_polar(1.0, scale * k * x[d])
                        }
                    })
                    .collect()
            })
            .collect();
        let mut total = C::new(0.0, 0.0);
        for (flat, coeff) in self.data.iter().enumerate() {
            if coeff.norm_sqr() == 0.0 {
                continue;
            }
            let idx = grid.unravel(flat);
            let phase = idx
                .iter()
                .enumerate()
                .fold(C::new(1.0, 0.0), |acc, (d, &i)| acc * tables[d][i]);
            total += coeff * phase;
        }
        total
    }
}

/// In-place unnormalized n-dimensional FFT over a row-major buffer.
pub(crate) fn fft_nd(shape: &[usize], data: &mut [C], direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = shape.iter().product();
    let mut stride = total;
    let mut line = Vec::new();
    for &n in shape {
        stride /= n;
        let fft = planner.plan_fft(n, direction);
        let block = n * stride;
        line.resize(n, C::new(0.0, 0.0));
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}
