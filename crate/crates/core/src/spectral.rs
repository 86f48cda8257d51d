//! Spectral building blocks shared by the operators and evolvers: FFT sweeps
//! over the two grid axes, spectral derivatives and shifts, and the exact
//! per-lane Ornstein-Uhlenbeck propagator used by the momentum-diffusion
//! sub-steps.

use crate::grid::{deriv_wavenumbers, fft_wavenumbers};
use crate::{C64, Error, PhaseGrid, Result};
use ndarray::Array2;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// FFT plans for one grid. Immutable after construction; safe to share.
pub struct SpectralKit {
    nx: usize,
    np: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_p: Arc<dyn Fft<f64>>,
    inv_p: Arc<dyn Fft<f64>>,
}

fn process_lanes(fft: &Arc<dyn Fft<f64>>, data: &mut [C64], lane: usize, scale: f64) {
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(lane).for_each_init(
        || vec![C64::default(); scratch_len],
        |scratch, row| {
            fft.process_with_scratch(row, scratch);
            if scale != 1.0 {
                for v in row.iter_mut() {
                    *v *= scale;
                }
            }
        },
    );
}

impl SpectralKit {
    pub fn new(grid: &PhaseGrid) -> Self {
        let mut planner = FftPlanner::new();
        SpectralKit {
            nx: grid.nx(),
            np: grid.np(),
            fwd_x: planner.plan_fft_forward(grid.nx()),
            inv_x: planner.plan_fft_inverse(grid.nx()),
            fwd_p: planner.plan_fft_forward(grid.np()),
            inv_p: planner.plan_fft_inverse(grid.np()),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn np(&self) -> usize {
        self.np
    }

    /// Unnormalized forward FFT along the momentum axis (contiguous rows).
    pub fn fft_p(&self, a: &mut Array2<C64>) {
        let slice = a.as_slice_mut().expect("standard layout");
        process_lanes(&self.fwd_p, slice, self.np, 1.0);
    }

    /// Inverse FFT along the momentum axis, scaled by `1/np`.
    pub fn ifft_p(&self, a: &mut Array2<C64>) {
        let slice = a.as_slice_mut().expect("standard layout");
        process_lanes(&self.inv_p, slice, self.np, 1.0 / self.np as f64);
    }

    /// Unnormalized forward FFT along the coordinate axis (strided lanes,
    /// handled by transposing in and out).
    pub fn fft_x(&self, a: &mut Array2<C64>) {
        let mut t = a.t().as_standard_layout().into_owned();
        let slice = t.as_slice_mut().expect("standard layout");
        process_lanes(&self.fwd_x, slice, self.nx, 1.0);
        a.assign(&t.t());
    }

    /// Inverse FFT along the coordinate axis, scaled by `1/nx`.
    pub fn ifft_x(&self, a: &mut Array2<C64>) {
        let mut t = a.t().as_standard_layout().into_owned();
        let slice = t.as_slice_mut().expect("standard layout");
        process_lanes(&self.inv_x, slice, self.nx, 1.0 / self.nx as f64);
        a.assign(&t.t());
    }

    /// Spectral `d/dx` with the Nyquist derivative coefficient zeroed.
    pub fn deriv_x(&self, grid: &PhaseGrid, a: &Array2<C64>) -> Array2<C64> {
        let mut out = a.clone();
        self.fft_x(&mut out);
        let ws = grid.deriv_wavenumbers_x();
        for (mut row, &s) in out.rows_mut().into_iter().zip(ws.iter()) {
            let m = C64::new(0.0, s);
            row.mapv_inplace(|v| v * m);
        }
        self.ifft_x(&mut out);
        out
    }

    /// Spectral `d/dp` with the Nyquist derivative coefficient zeroed.
    pub fn deriv_p(&self, grid: &PhaseGrid, a: &Array2<C64>) -> Array2<C64> {
        let mut out = a.clone();
        self.fft_p(&mut out);
        let ws = grid.deriv_wavenumbers_p();
        for mut row in out.rows_mut() {
            for (v, &w) in row.iter_mut().zip(ws.iter()) {
                *v *= C64::new(0.0, w);
            }
        }
        self.ifft_p(&mut out);
        out
    }

    /// Exact spectral translation along x: lane `j` becomes
    /// `f(x - shifts[j], p_j)`.
    pub fn shift_x(&self, grid: &PhaseGrid, a: &mut Array2<C64>, shifts: &[f64]) {
        assert_eq!(shifts.len(), self.np);
        self.fft_x(a);
        let ws = grid.wavenumbers_x();
        for (mut row, &s) in a.rows_mut().into_iter().zip(ws.iter()) {
            for (v, &d) in row.iter_mut().zip(shifts.iter()) {
                *v *= C64::from_polar(1.0, -s * d);
            }
        }
        self.ifft_x(a);
    }

    /// Exact spectral translation along p: lane `i` becomes
    /// `f(x_i, p - shifts[i])`.
    pub fn shift_p(&self, grid: &PhaseGrid, a: &mut Array2<C64>, shifts: &[f64]) {
        assert_eq!(shifts.len(), self.nx);
        self.fft_p(a);
        let ws = grid.wavenumbers_p();
        for (mut row, &d) in a.rows_mut().into_iter().zip(shifts.iter()) {
            for (v, &w) in row.iter_mut().zip(ws.iter()) {
                *v *= C64::from_polar(1.0, -w * d);
            }
        }
        self.ifft_p(a);
    }
}

/// One-dimensional FFT pair for configuration-axis work.
pub struct Fft1d {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft1d {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft1d {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn forward(&self, v: &mut [C64]) {
        assert_eq!(v.len(), self.n);
        self.fwd.process(v);
    }

    pub fn inverse(&self, v: &mut [C64]) {
        assert_eq!(v.len(), self.n);
        self.inv.process(v);
        let s = 1.0 / self.n as f64;
        for c in v.iter_mut() {
            *c *= s;
        }
    }
}

/// Spectral derivative of a real periodic sample vector.
pub fn spectral_derivative_real(values: &[f64], length: f64) -> Vec<f64> {
    let n = values.len();
    let fft = Fft1d::new(n);
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    fft.forward(&mut buf);
    for (c, &w) in buf.iter_mut().zip(deriv_wavenumbers(n, length).iter()) {
        *c *= C64::new(0.0, w);
    }
    fft.inverse(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Periodic Gaussian smoothing of a real sample vector with standard
/// deviation `sigma` (unit-mass kernel; the zero mode is untouched).
pub fn gaussian_smooth_real(values: &[f64], length: f64, sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return values.to_vec();
    }
    let n = values.len();
    let fft = Fft1d::new(n);
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    fft.forward(&mut buf);
    for (c, &w) in buf.iter_mut().zip(fft_wavenumbers(n, length).iter()) {
        *c *= (-0.5 * sigma * sigma * w * w).exp();
    }
    fft.inverse(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Exact propagator of the Ornstein-Uhlenbeck Fokker-Planck flow
/// `du/dt = gamma * d/dp[(p - mu) u] + gamma * var_eq * d^2u/dp^2`
/// over a fixed interval, applied independently to each row of a
/// `(rows, np)` array; row `r` uses drift center `mu = centers[r]`.
///
/// The update is computed in Fourier space, where the flow is a rescaling of
/// the frequency argument by `lambda = exp(-gamma h)` composed with a Gaussian
/// multiplier. The frequency rescaling is evaluated exactly for fields
/// supported inside the momentum window via a chirp-z (Bluestein) transform,
/// so the stationary Gaussians of each lane are preserved to rounding and the
/// step is unconditionally stable for any `gamma h`.
pub struct OuPropagator {
    np: usize,
    m: usize,
    relax: f64,
    chirp_in: Vec<C64>,
    kernel_fft: Vec<C64>,
    chirp_out: Vec<C64>,
    out_idx: Vec<usize>,
    diag: Array2<C64>,
    fwd_m: Arc<dyn Fft<f64>>,
    inv_m: Arc<dyn Fft<f64>>,
    inv_p: Arc<dyn Fft<f64>>,
}

impl OuPropagator {
    /// `relax = gamma * h`, `var_eq` the equilibrium variance (`kT * m`),
    /// `centers[r]` the drift center of row `r`.
    pub fn new(grid: &PhaseGrid, relax: f64, var_eq: f64, centers: &[f64]) -> Result<Self> {
        if relax < 0.0 || !relax.is_finite() {
            return Err(Error::validation("relaxation increment must be finite and >= 0"));
        }
        if var_eq < 0.0 || !var_eq.is_finite() {
            return Err(Error::validation("equilibrium variance must be finite and >= 0"));
        }
        let np = grid.np();
        let lambda = (-relax).exp();
        let kick = var_eq * (1.0 - lambda * lambda);
        let beta = 2.0 * std::f64::consts::PI * lambda / np as f64;
        let m = (3 * np).next_power_of_two();

        let chirp_in: Vec<C64> = (0..np)
            .map(|j| C64::from_polar(1.0, -0.5 * beta * (j * j) as f64))
            .collect();

        let mut planner = FftPlanner::new();
        let fwd_m = planner.plan_fft_forward(m);
        let inv_m = planner.plan_fft_inverse(m);
        let inv_p = planner.plan_fft_inverse(np);

        // Chirp kernel over signed offsets; 1/M of the convolution and the
        // unnormalized inverse are folded in here.
        let mut kernel_fft: Vec<C64> = (0..m)
            .map(|q| {
                let d = if q <= m / 2 { q as f64 } else { q as f64 - m as f64 };
                C64::from_polar(1.0 / m as f64, 0.5 * beta * d * d)
            })
            .collect();
        fwd_m.process(&mut kernel_fft);

        let signed = |l: usize| -> f64 {
            if 2 * l < np {
                l as f64
            } else {
                l as f64 - np as f64
            }
        };
        let chirp_out: Vec<C64> = (0..np)
            .map(|l| {
                let ls = signed(l);
                C64::from_polar(1.0, -0.5 * beta * ls * ls)
            })
            .collect();
        let out_idx: Vec<usize> = (0..np)
            .map(|l| {
                let ls = if 2 * l < np {
                    l as isize
                } else {
                    l as isize - np as isize
                };
                ls.rem_euclid(m as isize) as usize
            })
            .collect();

        let kappa = grid.wavenumbers_p();
        let scale = 1.0 / np as f64;
        let diag = Array2::from_shape_fn((centers.len(), np), |(r, l)| {
            let k = kappa[l];
            let damp = (-0.5 * kick * k * k).exp() * scale;
            C64::from_polar(damp, (1.0 - lambda) * k * (grid.p_min() - centers[r]))
        });

        Ok(OuPropagator {
            np,
            m,
            relax,
            chirp_in,
            kernel_fft,
            chirp_out,
            out_idx,
            diag,
            fwd_m,
            inv_m,
            inv_p,
        })
    }

    /// Advances every row of `data` by the propagator. Row count must match
    /// the centers passed at construction.
    pub fn apply(&self, data: &mut Array2<C64>) {
        if self.relax == 0.0 {
            return;
        }
        let (rows, cols) = data.dim();
        assert_eq!(cols, self.np);
        assert_eq!(rows, self.diag.nrows());
        let np = self.np;
        let m = self.m;
        let fft_scratch = self
            .fwd_m
            .get_inplace_scratch_len()
            .max(self.inv_m.get_inplace_scratch_len());
        let p_scratch = self.inv_p.get_inplace_scratch_len();

        let diag = &self.diag;
        let slice = data.as_slice_mut().expect("standard layout");
        slice
            .par_chunks_mut(np)
            .enumerate()
            .for_each_init(
                || {
                    (
                        vec![C64::default(); m],
                        vec![C64::default(); fft_scratch],
                        vec![C64::default(); p_scratch],
                    )
                },
                |(work, scratch, scratch_p), (r, row)| {
                    work.fill(C64::default());
                    for j in 0..np {
                        work[j] = row[j] * self.chirp_in[j];
                    }
                    self.fwd_m.process_with_scratch(work, scratch);
                    for (w, k) in work.iter_mut().zip(self.kernel_fft.iter()) {
                        *w *= k;
                    }
                    self.inv_m.process_with_scratch(work, scratch);
                    let drow = diag.row(r);
                    for l in 0..np {
                        row[l] = work[self.out_idx[l]] * self.chirp_out[l] * drow[l];
                    }
                    self.inv_p.process_with_scratch(row, scratch_p);
                },
            );
    }
}
