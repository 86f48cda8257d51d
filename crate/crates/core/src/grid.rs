use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Uniform rectangular discretization of one-dimensional phase space,
/// periodic in both the coordinate `x` and the momentum `p`.
///
/// Samples sit at `x_i = x_min + i*dx` and `p_j = p_min + j*dp`; the points
/// `x_max` and `p_max` are identified with `x_min` and `p_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    nx: usize,
    np: usize,
    x_min: f64,
    x_max: f64,
    p_min: f64,
    p_max: f64,
    dx: f64,
    dp: f64,
}

impl PhaseGrid {
    /// Minimum sample count per axis.
    pub const MIN_SIZE: usize = 8;

    pub fn new(nx: usize, np: usize, x_extent: (f64, f64), p_extent: (f64, f64)) -> Result<Self> {
        if nx < Self::MIN_SIZE || np < Self::MIN_SIZE {
            return Err(Error::validation(format!(
                "grid sizes must be at least {}, got nx={nx}, np={np}",
                Self::MIN_SIZE
            )));
        }
        let (x_min, x_max) = x_extent;
        let (p_min, p_max) = p_extent;
        for v in [x_min, x_max, p_min, p_max] {
            if !v.is_finite() {
                return Err(Error::validation("grid extents must be finite"));
            }
        }
        if x_max <= x_min {
            return Err(Error::validation(format!(
                "x extent must be ordered, got ({x_min}, {x_max})"
            )));
        }
        if p_max <= p_min {
            return Err(Error::validation(format!(
                "p extent must be ordered, got ({p_min}, {p_max})"
            )));
        }
        Ok(PhaseGrid {
            nx,
            np,
            x_min,
            x_max,
            p_min,
            p_max,
            dx: (x_max - x_min) / nx as f64,
            dp: (p_max - p_min) / np as f64,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn np(&self) -> usize {
        self.np
    }
    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn p_min(&self) -> f64 {
        self.p_min
    }
    pub fn p_max(&self) -> f64 {
        self.p_max
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dp(&self) -> f64 {
        self.dp
    }

    /// Domain lengths `(Lx, Lp)`.
    pub fn lengths(&self) -> (f64, f64) {
        (self.x_max - self.x_min, self.p_max - self.p_min)
    }

    /// Cell measure `dx * dp`.
    pub fn cell(&self) -> f64 {
        self.dx * self.dp
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn p_at(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp
    }

    /// Coordinate axis samples.
    pub fn x_axis(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x_at(i)).collect()
    }

    /// Momentum axis samples.
    pub fn p_axis(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p_at(j)).collect()
    }

    /// Periodic wrap of an `x` index.
    pub fn wrap_x(&self, i: isize) -> usize {
        i.rem_euclid(self.nx as isize) as usize
    }

    /// Periodic wrap of a `p` index.
    pub fn wrap_p(&self, j: isize) -> usize {
        j.rem_euclid(self.np as isize) as usize
    }

    /// Signed Fourier wavenumbers `2*pi*k/Lx` in FFT bin order. For even
    /// sizes the Nyquist bin carries the negative sign convention.
    pub fn wavenumbers_x(&self) -> Vec<f64> {
        fft_wavenumbers(self.nx, self.x_max - self.x_min)
    }

    /// Signed Fourier wavenumbers `2*pi*l/Lp` in FFT bin order.
    pub fn wavenumbers_p(&self) -> Vec<f64> {
        fft_wavenumbers(self.np, self.p_max - self.p_min)
    }

    /// Wavenumbers with the Nyquist bin zeroed, used for spectral
    /// differentiation (symmetric convention for the unpaired mode).
    pub fn deriv_wavenumbers_x(&self) -> Vec<f64> {
        deriv_wavenumbers(self.nx, self.x_max - self.x_min)
    }

    pub fn deriv_wavenumbers_p(&self) -> Vec<f64> {
        deriv_wavenumbers(self.np, self.p_max - self.p_min)
    }

    /// True when `other` describes the identical discretization.
    pub fn same_as(&self, other: &PhaseGrid) -> bool {
        self == other
    }
}

/// Signed wavenumbers `2*pi*k_signed/length` in FFT bin order.
pub fn fft_wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let base = 2.0 * PI / length;
    (0..n)
        .map(|k| {
            let signed = if 2 * k < n {
                k as isize
            } else {
                k as isize - n as isize
            };
            base * signed as f64
        })
        .collect()
}

/// As [`fft_wavenumbers`] but with the Nyquist bin set to zero.
pub fn deriv_wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let mut w = fft_wavenumbers(n, length);
    if n % 2 == 0 {
        w[n / 2] = 0.0;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_spacings() {
        let g = PhaseGrid::new(256, 256, (-20.0, 20.0), (-20.0, 20.0)).unwrap();
        assert_eq!(g.dx(), 40.0 / 256.0);
        assert_eq!(g.dp(), 40.0 / 256.0);
        assert_eq!(g.dx(), 0.15625);
        // Spacings recompute from the extents to machine precision.
        assert_eq!(g.dx(), (g.x_max() - g.x_min()) / g.nx() as f64);
        assert_eq!(g.dp(), (g.p_max() - g.p_min()) / g.np() as f64);
    }

    #[test]
    fn minimal_grid() {
        let g = PhaseGrid::new(8, 8, (0.0, 1.0), (0.0, 1.0)).unwrap();
        assert_eq!(g.dx(), 0.125);
        assert_eq!(g.dp(), 0.125);
    }

    #[test]
    fn undersized_grid_rejected() {
        let err = PhaseGrid::new(4, 256, (-20.0, 20.0), (-20.0, 20.0)).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("at least 8"));
    }

    #[test]
    fn degenerate_extents_rejected() {
        assert!(PhaseGrid::new(16, 16, (1.0, 1.0), (0.0, 1.0)).is_err());
        assert!(PhaseGrid::new(16, 16, (0.0, 1.0), (2.0, 1.0)).is_err());
        assert!(PhaseGrid::new(16, 16, (0.0, f64::NAN), (0.0, 1.0)).is_err());
    }

    #[test]
    fn index_arithmetic_wraps() {
        let g = PhaseGrid::new(8, 16, (0.0, 1.0), (0.0, 1.0)).unwrap();
        assert_eq!(g.wrap_x(-1), 7);
        assert_eq!(g.wrap_x(8), 0);
        assert_eq!(g.wrap_p(-17), 15);
    }

    #[test]
    fn wavenumber_layout() {
        let w = fft_wavenumbers(8, 2.0 * PI);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], 1.0);
        assert_eq!(w[3], 3.0);
        assert_eq!(w[4], -4.0); // Nyquist takes the negative convention
        assert_eq!(w[7], -1.0);
        let d = deriv_wavenumbers(8, 2.0 * PI);
        assert_eq!(d[4], 0.0);
        assert_eq!(d[3], 3.0);
    }
}
