//! Discrete realizations of the model's differential operators.
//!
//! All operators return rates (time-derivative contributions) on a fresh
//! field; nothing is updated in place. Derivatives are spectral under the
//! periodic topology. Products of the momentum coordinate with a field are
//! expanded by the analytic product rule (`d/dp (p f) = f + p df/dp`) so that
//! the sawtooth of the periodized coordinate is never differentiated; this
//! keeps constant fields and the per-mode stationary Gaussians exact.

use crate::potential::PotentialSpec;
use crate::spectral::SpectralKit;
use crate::{C64, Error, PhaseGrid, PhysicalParams, Result, WaveField};
use ndarray::Array2;

fn check_field(field: &WaveField) -> Result<()> {
    if !field.is_finite() {
        return Err(Error::validation("operator input field must be finite"));
    }
    Ok(())
}

/// Hamiltonian transport with the internal phase rotation:
/// `dV/dx dphi/dp - (p/m) dphi/dx - (i/hbar)(E + V - p^2/2m) phi`,
/// where `E` is the rest energy when enabled and zero otherwise.
pub fn apply_transport_phase(
    field: &WaveField,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    t: f64,
) -> Result<WaveField> {
    check_field(field)?;
    params.validate()?;
    let grid = &field.grid;
    let pot = spec.eval(&grid.x_axis(), grid.lengths().0, t)?;
    let kit = SpectralKit::new(grid);
    let dx = kit.deriv_x(grid, &field.values);
    let dp = kit.deriv_p(grid, &field.values);

    let e0 = params.effective_rest_energy();
    let inv_m = 1.0 / params.mass;
    let inv_h = 1.0 / params.hbar;
    let values = Array2::from_shape_fn((grid.nx(), grid.np()), |(i, j)| {
        let p = grid.p_at(j);
        let freq = (e0 + pot.v[i] - 0.5 * p * p * inv_m) * inv_h;
        pot.dvdx[i] * dp[[i, j]] - p * inv_m * dx[[i, j]]
            - C64::new(0.0, freq) * field.values[[i, j]]
    });
    Ok(WaveField {
        grid: grid.clone(),
        values,
        time: field.time,
    })
}

/// Momentum-diffusion operator (pre-friction):
/// `d/dp [ (p + i hbar d/dx) phi + kT m dphi/dp ]`, expanded as
/// `phi + p dphi/dp + i hbar d/dx dphi/dp + kT m d^2 phi/dp^2`.
///
/// Its kernel is spanned by the modes `e^{isx} exp(-(p - hbar s)^2 / (2 kT m))`,
/// one per coordinate wavenumber.
pub fn apply_momentum_diffusion(field: &WaveField, params: &PhysicalParams) -> Result<WaveField> {
    check_field(field)?;
    params.validate()?;
    let grid = &field.grid;
    let kit = SpectralKit::new(grid);
    let dp = kit.deriv_p(grid, &field.values);
    let dxdp = kit.deriv_x(grid, &dp);
    let dpdp = kit.deriv_p(grid, &dp);

    let ktm = params.kt_mass();
    let ih = C64::new(0.0, params.hbar);
    let values = Array2::from_shape_fn((grid.nx(), grid.np()), |(i, j)| {
        let p = grid.p_at(j);
        field.values[[i, j]] + p * dp[[i, j]] + ih * dxdp[[i, j]] + ktm * dpdp[[i, j]]
    });
    Ok(WaveField {
        grid: grid.clone(),
        values,
        time: field.time,
    })
}

/// Coordinate-and-momentum diffusion operator
/// `a^2 (d/dx - i p/hbar)^2 phi + b^2 d^2 phi/dp^2 + (a b / hbar) phi`.
///
/// The squared covariant x-derivative is evaluated per coordinate wavenumber
/// `s`, where it is multiplication by `-(s - p/hbar)^2`.
pub fn apply_xp_diffusion(field: &WaveField, params: &PhysicalParams) -> Result<WaveField> {
    check_field(field)?;
    params.validate()?;
    params.require_xp_diffusion()?;
    let grid = &field.grid;
    let kit = SpectralKit::new(grid);

    let mut xterm = field.values.clone();
    kit.fft_x(&mut xterm);
    let ws = grid.wavenumbers_x();
    let a2 = params.a * params.a;
    let inv_h = 1.0 / params.hbar;
    for (mut row, &s) in xterm.rows_mut().into_iter().zip(ws.iter()) {
        for (j, v) in row.iter_mut().enumerate() {
            let r = s - grid.p_at(j) * inv_h;
            *v *= -a2 * r * r;
        }
    }
    kit.ifft_x(&mut xterm);

    let dp = kit.deriv_p(grid, &field.values);
    let dpdp = kit.deriv_p(grid, &dp);
    let b2 = params.b * params.b;
    let c0 = params.a * params.b / params.hbar;
    let values = Array2::from_shape_fn((grid.nx(), grid.np()), |(i, j)| {
        xterm[[i, j]] + b2 * dpdp[[i, j]] + c0 * field.values[[i, j]]
    });
    Ok(WaveField {
        grid: grid.clone(),
        values,
        time: field.time,
    })
}

/// Gauge potentials sampled on a grid at a fixed time, together with the
/// momentum derivatives needed for product-rule differentiation.
#[derive(Debug, Clone)]
pub struct GaugePotentials {
    pub grid: PhaseGrid,
    pub a0: Array2<f64>,
    pub ax: Array2<f64>,
    pub bp: Array2<f64>,
    /// `d ax / dp`
    pub dax_dp: Array2<f64>,
    /// `d bp / dp`
    pub dbp_dp: Array2<f64>,
}

impl GaugePotentials {
    /// The transport-with-momentum-diffusion specialization:
    /// `A0 = H(x, p) = E + p^2/2m + V`, `Ax = -p`, `Bp = 0`.
    pub fn kramers_form(
        grid: &PhaseGrid,
        params: &PhysicalParams,
        spec: &PotentialSpec,
        t: f64,
    ) -> Result<Self> {
        let pot = spec.eval(&grid.x_axis(), grid.lengths().0, t)?;
        let e0 = params.effective_rest_energy();
        let inv_m = 1.0 / params.mass;
        let a0 = Array2::from_shape_fn((grid.nx(), grid.np()), |(i, j)| {
            let p = grid.p_at(j);
            e0 + 0.5 * p * p * inv_m + pot.v[i]
        });
        let ax = Array2::from_shape_fn((grid.nx(), grid.np()), |(_, j)| -grid.p_at(j));
        let zeros = Array2::zeros((grid.nx(), grid.np()));
        Ok(GaugePotentials {
            grid: grid.clone(),
            a0,
            ax,
            bp: zeros.clone(),
            dax_dp: Array2::from_elem((grid.nx(), grid.np()), -1.0),
            dbp_dp: zeros,
        })
    }

    fn check_grid(&self, grid: &PhaseGrid) -> Result<()> {
        if !self.grid.same_as(grid) {
            return Err(Error::GridMismatch(
                "gauge potentials sampled on a different grid".into(),
            ));
        }
        Ok(())
    }
}

/// A real gauge function `g(x, p, t)` with the partial derivatives used by
/// the transformation laws.
pub enum GaugeFunction {
    Analytic {
        g: Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
        dg_dt: Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
        dg_dx: Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
        dg_dp: Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
        d2g_dxdp: Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
        d2g_dp2: Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    },
    /// Time-independent grid tables; partials are spectral.
    Tabulated { grid: PhaseGrid, g: Array2<f64> },
}

/// Gauge function and partials sampled on a grid at one time.
#[derive(Debug, Clone)]
pub struct GaugeSamples {
    pub g: Array2<f64>,
    pub gt: Array2<f64>,
    pub gx: Array2<f64>,
    pub gp: Array2<f64>,
    pub gxp: Array2<f64>,
    pub gpp: Array2<f64>,
}

impl GaugeFunction {
    pub fn zero() -> Self {
        GaugeFunction::quadratic([0.0; 6])
    }

    /// `g = c0 x p + c1 x + c2 p + c3 x^2 + c4 p^2 + c5 t x`.
    pub fn quadratic(c: [f64; 6]) -> Self {
        let [cxp, cx, cp, cxx, cpp, ctx] = c;
        GaugeFunction::Analytic {
            g: Box::new(move |x, p, t| {
                cxp * x * p + cx * x + cp * p + cxx * x * x + cpp * p * p + ctx * t * x
            }),
            dg_dt: Box::new(move |x, _, _| ctx * x),
            dg_dx: Box::new(move |x, p, t| cxp * p + cx + 2.0 * cxx * x + ctx * t),
            dg_dp: Box::new(move |x, p, _| cxp * x + cp + 2.0 * cpp * p),
            d2g_dxdp: Box::new(move |_, _, _| cxp),
            d2g_dp2: Box::new(move |_, _, _| 2.0 * cpp),
        }
    }

    pub fn analytic(
        g: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        dg_dt: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        dg_dx: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        dg_dp: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        d2g_dxdp: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        d2g_dp2: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        GaugeFunction::Analytic {
            g: Box::new(g),
            dg_dt: Box::new(dg_dt),
            dg_dx: Box::new(dg_dx),
            dg_dp: Box::new(dg_dp),
            d2g_dxdp: Box::new(d2g_dxdp),
            d2g_dp2: Box::new(d2g_dp2),
        }
    }

    pub fn sample(&self, grid: &PhaseGrid, t: f64) -> Result<GaugeSamples> {
        match self {
            GaugeFunction::Analytic {
                g,
                dg_dt,
                dg_dx,
                dg_dp,
                d2g_dxdp,
                d2g_dp2,
            } => {
                let tabulate = |f: &(dyn Fn(f64, f64, f64) -> f64 + Send + Sync)| {
                    Array2::from_shape_fn((grid.nx(), grid.np()), |(i, j)| {
                        f(grid.x_at(i), grid.p_at(j), t)
                    })
                };
                Ok(GaugeSamples {
                    g: tabulate(g.as_ref()),
                    gt: tabulate(dg_dt.as_ref()),
                    gx: tabulate(dg_dx.as_ref()),
                    gp: tabulate(dg_dp.as_ref()),
                    gxp: tabulate(d2g_dxdp.as_ref()),
                    gpp: tabulate(d2g_dp2.as_ref()),
                })
            }
            GaugeFunction::Tabulated { grid: tg, g } => {
                if !tg.same_as(grid) {
                    return Err(Error::GridMismatch(
                        "tabulated gauge function lives on a different grid".into(),
                    ));
                }
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::validation("gauge table must be finite"));
                }
                let kit = SpectralKit::new(grid);
                let gc = g.mapv(|v| C64::new(v, 0.0));
                let gx = kit.deriv_x(grid, &gc);
                let gp = kit.deriv_p(grid, &gc);
                let gxp = kit.deriv_p(grid, &gx);
                let gpp = kit.deriv_p(grid, &gp);
                Ok(GaugeSamples {
                    g: g.clone(),
                    gt: Array2::zeros((grid.nx(), grid.np())),
                    gx: gx.mapv(|c| c.re),
                    gp: gp.mapv(|c| c.re),
                    gxp: gxp.mapv(|c| c.re),
                    gpp: gpp.mapv(|c| c.re),
                })
            }
        }
    }
}

/// Transformation direction for [`gauge_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeDirection {
    /// `phi -> exp(-(i/hbar) g) phi`
    Forward,
    /// `phi -> exp(+(i/hbar) g) phi`
    Inverse,
}

/// Pointwise multiplication by the unit-modulus gauge factor.
pub fn gauge_transform(
    field: &WaveField,
    g: &GaugeFunction,
    params: &PhysicalParams,
    t: f64,
    direction: GaugeDirection,
) -> Result<WaveField> {
    check_field(field)?;
    let samples = g.sample(&field.grid, t)?;
    let sign = match direction {
        GaugeDirection::Forward => -1.0,
        GaugeDirection::Inverse => 1.0,
    };
    let inv_h = sign / params.hbar;
    let mut values = field.values.clone();
    values.zip_mut_with(&samples.g, |v, &gv| {
        *v *= C64::from_polar(1.0, inv_h * gv);
    });
    Ok(WaveField {
        grid: field.grid.clone(),
        values,
        time: field.time,
    })
}

/// Compensating shift of the potentials:
/// `A0 += dg/dt`, `Ax += dg/dx`, `Bp += dg/dp` (momentum derivatives of the
/// shifted potentials updated accordingly).
pub fn gauge_shift_potentials(
    pots: &GaugePotentials,
    g: &GaugeFunction,
    t: f64,
) -> Result<GaugePotentials> {
    let samples = g.sample(&pots.grid, t)?;
    Ok(GaugePotentials {
        grid: pots.grid.clone(),
        a0: &pots.a0 + &samples.gt,
        ax: &pots.ax + &samples.gx,
        bp: &pots.bp + &samples.gp,
        dax_dp: &pots.dax_dp + &samples.gxp,
        dbp_dp: &pots.dbp_dp + &samples.gpp,
    })
}

/// Gauge-covariant right-hand side: with covariant derivatives
/// `Dx = d/dx + (i/hbar) Ax` and `Dp = d/dp + (i/hbar) Bp`, and
/// `H = E + p^2/2m + V`, returns the rate
///
/// `dphi/dt = dH/dx Dp(phi) - dH/dp Dx(phi)
///            + gamma Dp( i hbar Dx(phi) + kT m Dp(phi) ) - (i/hbar) A0 phi`.
///
/// With `A0 = H`, `Ax = -p`, `Bp = 0` this reduces exactly to
/// [`apply_transport_phase`] plus gamma times [`apply_momentum_diffusion`].
pub fn apply_covariant_rhs(
    field: &WaveField,
    pots: &GaugePotentials,
    params: &PhysicalParams,
    h_spec: &PotentialSpec,
    t: f64,
) -> Result<WaveField> {
    check_field(field)?;
    params.validate()?;
    pots.check_grid(&field.grid)?;
    let grid = &field.grid;
    let pot = h_spec.eval(&grid.x_axis(), grid.lengths().0, t)?;
    let kit = SpectralKit::new(grid);

    let dxf = kit.deriv_x(grid, &field.values);
    let dpf = kit.deriv_p(grid, &field.values);
    let dxdpf = kit.deriv_p(grid, &dxf);
    let dppf = kit.deriv_p(grid, &dpf);

    let (nx, np) = (grid.nx(), grid.np());
    let ih = C64::new(0.0, params.hbar);
    let i_over_h = C64::new(0.0, 1.0 / params.hbar);
    let ktm = params.kt_mass();
    let inv_m = 1.0 / params.mass;
    let gamma = params.gamma;

    let values = Array2::from_shape_fn((nx, np), |(i, j)| {
        let phi = field.values[[i, j]];
        let ax = pots.ax[[i, j]];
        let bp = pots.bp[[i, j]];
        let dpphi = dpf[[i, j]] + i_over_h * bp * phi;
        let dxphi = dxf[[i, j]] + i_over_h * ax * phi;

        // Hamiltonian block
        let p = grid.p_at(j);
        let ham = pot.dvdx[i] * dpphi - p * inv_m * dxphi;

        // Dissipative block: Dp(X), X = i hbar Dx(phi) + kT m Dp(phi)
        //                         = i hbar dphi/dx - Ax phi + kT m Dp(phi)
        let x_val = ih * dxphi + ktm * dpphi;
        // d/dp of X, with the potential factors differentiated analytically
        let dp_x = ih * dxdpf[[i, j]] - (ax * dpf[[i, j]] + pots.dax_dp[[i, j]] * phi)
            + ktm
                * (dppf[[i, j]]
                    + i_over_h * (bp * dpf[[i, j]] + pots.dbp_dp[[i, j]] * phi));
        let dp_xfull = dp_x + i_over_h * bp * x_val;

        ham + gamma * dp_xfull - i_over_h * pots.a0[[i, j]] * phi
    });

    Ok(WaveField {
        grid: grid.clone(),
        values,
        time: field.time,
    })
}
