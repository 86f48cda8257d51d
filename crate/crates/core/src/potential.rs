use crate::{spectral, Error, Result};
use serde::{Deserialize, Serialize};

/// Analytic descriptor of a potential profile on the coordinate axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialKind {
    Zero,
    /// `V(x) = k x^2 / 2`
    Harmonic { k: f64 },
    /// `V(x) = c4 x^4`
    Quartic { c4: f64 },
    /// `V(x) = h ((x/d)^2 - 1)^2`
    DoubleWell { h: f64, d: f64 },
    /// Samples on the grid's x-axis; the gradient is computed spectrally and
    /// is exact for band-limited tables.
    Tabulated { values: Vec<f64> },
}

impl PotentialKind {
    fn is_zero(&self) -> bool {
        matches!(self, PotentialKind::Zero)
    }

    /// Fills `v` and `dvdx` with the profile and its gradient on `x_axis`.
    /// `length` is the periodic domain length (used by the spectral gradient
    /// of tabulated profiles).
    fn eval_on(&self, x_axis: &[f64], length: f64, v: &mut [f64], dvdx: &mut [f64]) -> Result<()> {
        match self {
            PotentialKind::Zero => {
                v.fill(0.0);
                dvdx.fill(0.0);
            }
            PotentialKind::Harmonic { k } => {
                for (i, &x) in x_axis.iter().enumerate() {
                    v[i] = 0.5 * k * x * x;
                    dvdx[i] = k * x;
                }
            }
            PotentialKind::Quartic { c4 } => {
                for (i, &x) in x_axis.iter().enumerate() {
                    v[i] = c4 * x.powi(4);
                    dvdx[i] = 4.0 * c4 * x.powi(3);
                }
            }
            PotentialKind::DoubleWell { h, d } => {
                if *d == 0.0 {
                    return Err(Error::validation("double well width d must be nonzero"));
                }
                let d2 = d * d;
                for (i, &x) in x_axis.iter().enumerate() {
                    let w = x * x / d2 - 1.0;
                    v[i] = h * w * w;
                    dvdx[i] = 4.0 * h * x * w / d2;
                }
            }
            PotentialKind::Tabulated { values } => {
                if values.len() != x_axis.len() {
                    return Err(Error::validation(format!(
                        "tabulated potential has {} samples, grid x-axis has {}",
                        values.len(),
                        x_axis.len()
                    )));
                }
                if values.iter().any(|x| !x.is_finite()) {
                    return Err(Error::validation("tabulated potential must be finite"));
                }
                v.copy_from_slice(values);
                dvdx.copy_from_slice(&spectral::spectral_derivative_real(values, length));
            }
        }
        Ok(())
    }
}

/// Time-dependent potential of the form `V(x, t) = V0(x) + V1(x) cos(omega t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub base: PotentialKind,
    pub drive: Option<PotentialKind>,
    pub omega: f64,
}

/// Potential samples and spatial gradient on the x-axis at a fixed time.
#[derive(Debug, Clone)]
pub struct PotentialValues {
    pub v: Vec<f64>,
    pub dvdx: Vec<f64>,
}

impl PotentialSpec {
    pub fn static_potential(base: PotentialKind) -> Self {
        PotentialSpec {
            base,
            drive: None,
            omega: 0.0,
        }
    }

    pub fn zero() -> Self {
        Self::static_potential(PotentialKind::Zero)
    }

    pub fn harmonic(k: f64) -> Self {
        Self::static_potential(PotentialKind::Harmonic { k })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() || self.omega < 0.0 {
            return Err(Error::validation("omega must be finite and >= 0"));
        }
        Ok(())
    }

    /// True when the evaluated potential does not depend on `t`.
    pub fn is_static(&self) -> bool {
        match &self.drive {
            None => true,
            Some(d) => d.is_zero() || self.omega == 0.0,
        }
    }

    /// True when both the base and the drive vanish identically.
    pub fn is_zero(&self) -> bool {
        self.base.is_zero() && self.drive.as_ref().map_or(true, |d| d.is_zero())
    }

    /// Evaluates `V` and `dV/dx` on the given x-axis at time `t`.
    pub fn eval(&self, x_axis: &[f64], length: f64, t: f64) -> Result<PotentialValues> {
        self.validate()?;
        let n = x_axis.len();
        let mut v = vec![0.0; n];
        let mut dvdx = vec![0.0; n];
        self.base.eval_on(x_axis, length, &mut v, &mut dvdx)?;
        if let Some(drive) = &self.drive {
            if !drive.is_zero() {
                let mut v1 = vec![0.0; n];
                let mut dv1 = vec![0.0; n];
                drive.eval_on(x_axis, length, &mut v1, &mut dv1)?;
                let c = (self.omega * t).cos();
                for i in 0..n {
                    v[i] += c * v1[i];
                    dvdx[i] += c * dv1[i];
                }
            }
        }
        Ok(PotentialValues { v, dvdx })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn axis(n: usize, x_min: f64, x_max: f64) -> (Vec<f64>, f64) {
        let l = x_max - x_min;
        let dx = l / n as f64;
        ((0..n).map(|i| x_min + i as f64 * dx).collect(), l)
    }

    #[test]
    fn harmonic_profile() {
        let (xs, l) = axis(64, -10.0, 10.0);
        let spec = PotentialSpec::harmonic(1.0);
        let pv = spec.eval(&xs, l, 123.4).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            assert_eq!(pv.v[i], 0.5 * x * x);
            assert_eq!(pv.dvdx[i], x);
        }
    }

    #[test]
    fn drive_at_t_zero_is_full_strength() {
        let (xs, l) = axis(64, -10.0, 10.0);
        let spec = PotentialSpec {
            base: PotentialKind::Zero,
            drive: Some(PotentialKind::Harmonic { k: 1.0 }),
            omega: 10.0,
        };
        let pv = spec.eval(&xs, l, 0.0).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            assert_eq!(pv.v[i], 0.5 * x * x);
        }
    }

    #[test]
    fn drive_vanishes_at_quarter_period() {
        let (xs, l) = axis(64, -10.0, 10.0);
        let spec = PotentialSpec {
            base: PotentialKind::Zero,
            drive: Some(PotentialKind::Harmonic { k: 1.0 }),
            omega: 10.0,
        };
        // cos(10 * pi/20) = cos(pi/2) = 0 up to rounding of pi/2.
        let pv = spec.eval(&xs, l, PI / 20.0).unwrap();
        let vmax = pv.v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(vmax < 1e-14 * 50.0, "vmax = {vmax}");
    }

    #[test]
    fn omega_zero_is_time_independent_bitwise() {
        let (xs, l) = axis(64, -10.0, 10.0);
        let spec = PotentialSpec {
            base: PotentialKind::Harmonic { k: 2.0 },
            drive: Some(PotentialKind::Quartic { c4: 0.1 }),
            omega: 0.0,
        };
        let a = spec.eval(&xs, l, 0.0).unwrap();
        let b = spec.eval(&xs, l, 17.321).unwrap();
        assert_eq!(a.v, b.v);
        assert_eq!(a.dvdx, b.dvdx);
    }

    #[test]
    fn tabulated_wrong_length_rejected() {
        let (xs, l) = axis(64, -10.0, 10.0);
        let spec = PotentialSpec::static_potential(PotentialKind::Tabulated {
            values: vec![0.0; 63],
        });
        assert!(spec.eval(&xs, l, 0.0).is_err());
    }

    #[test]
    fn tabulated_gradient_is_spectral() {
        // A band-limited table: sin(2*pi*x/L); spectral gradient is exact.
        let n = 64;
        let (xs, l) = axis(n, -10.0, 10.0);
        let k = 2.0 * PI / l;
        let table: Vec<f64> = xs.iter().map(|&x| (k * x).sin()).collect();
        let spec = PotentialSpec::static_potential(PotentialKind::Tabulated { values: table });
        let pv = spec.eval(&xs, l, 0.0).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            assert!((pv.dvdx[i] - k * (k * x).cos()).abs() < 1e-12);
        }
    }
}
