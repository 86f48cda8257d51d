//! Maps between representations: configuration wave functions, phase-space
//! wave fields, the stationary subspace, Wigner and Husimi distributions,
//! and the Galileo boost.

use crate::spectral::{Fft1d, SpectralKit};
use crate::{
    C64, ConfigWavefunction, DensityField, Error, PhaseGrid, PhysicalParams, Result, WaveField,
};
use ndarray::{Array1, Array2};
use std::f64::consts::PI;

fn stationary_width(params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    let var = params.kt_mass();
    if var <= 0.0 {
        return Err(Error::validation(
            "the stationary family needs kT * m > 0 (degenerate momentum Gaussians otherwise)",
        ));
    }
    Ok(var)
}

/// Builds the phase-space wave with momentum profile
/// `exp(-(p - hbar s)^2 / (2 kT m))` on each coordinate mode `s` of `psi`,
/// normalized to unit L2 norm. Every summand lies in the kernel of the
/// momentum-diffusion operator, so the result is a stationary state of the
/// dissipative sub-flow.
pub fn lift_to_phase_space(
    psi: &ConfigWavefunction,
    params: &PhysicalParams,
    grid: &PhaseGrid,
) -> Result<WaveField> {
    lift_profile(psi, params, grid, false)?.normalized()
}

/// As [`lift_to_phase_space`] but with the first excited momentum profile
/// `(p - hbar s) exp(-(p - hbar s)^2 / (2 kT m))` per mode: a unit-norm field
/// orthogonal to the whole stationary family, relaxing at the slowest
/// nonzero dissipative rate.
pub fn lift_excited(
    psi: &ConfigWavefunction,
    params: &PhysicalParams,
    grid: &PhaseGrid,
) -> Result<WaveField> {
    lift_profile(psi, params, grid, true)?.normalized()
}

fn lift_profile(
    psi: &ConfigWavefunction,
    params: &PhysicalParams,
    grid: &PhaseGrid,
    excited: bool,
) -> Result<WaveField> {
    if !psi.matches_grid(grid) {
        return Err(Error::GridMismatch(
            "wave function x-axis does not match the grid".into(),
        ));
    }
    let var = stationary_width(params)?;
    let nx = grid.nx();
    let np = grid.np();
    let fft = Fft1d::new(nx);
    let mut modes: Vec<C64> = psi.values.iter().copied().collect();
    fft.forward(&mut modes);

    let ws = grid.wavenumbers_x();
    let mut values = Array2::<C64>::zeros((nx, np));
    for k in 0..nx {
        let center = params.hbar * ws[k];
        let c = modes[k];
        if c == C64::default() {
            continue;
        }
        for j in 0..np {
            let u = grid.p_at(j) - center;
            let mut profile = (-u * u / (2.0 * var)).exp();
            if excited {
                profile *= u;
            }
            values[[k, j]] = c * profile;
        }
    }
    let kit = SpectralKit::new(grid);
    kit.ifft_x(&mut values);
    Ok(WaveField {
        grid: grid.clone(),
        values,
        time: psi.time,
    })
}

/// Result of [`project_stationary`].
#[derive(Debug, Clone)]
pub struct StationaryProjection {
    /// The orthogonal projection of the input onto the stationary family.
    pub projected: WaveField,
    /// The coordinate wave function parameterizing the projection, unit norm.
    pub psi: ConfigWavefunction,
    /// `|| field - projected || / || field ||`.
    pub residual: f64,
}

/// Per coordinate wavenumber `s`, orthogonally projects the momentum profile
/// onto the span of `exp(-(p - hbar s)^2 / (2 kT m))` and reassembles the
/// field; the per-mode coefficients define the extracted wave function.
pub fn project_stationary(
    field: &WaveField,
    params: &PhysicalParams,
) -> Result<StationaryProjection> {
    let var = stationary_width(params)?;
    let norm_in = field.l2_norm();
    if norm_in <= 0.0 || !norm_in.is_finite() {
        return Err(Error::validation("cannot project a zero-norm field"));
    }
    let grid = &field.grid;
    let (nx, np) = (grid.nx(), grid.np());
    let kit = SpectralKit::new(grid);
    let mut modes = field.values.clone();
    kit.fft_x(&mut modes);

    let ws = grid.wavenumbers_x();
    let mut coeffs = vec![C64::default(); nx];
    let mut projected = Array2::<C64>::zeros((nx, np));
    let mut gauss = vec![0.0; np];
    for k in 0..nx {
        let center = params.hbar * ws[k];
        let mut g2 = 0.0;
        for j in 0..np {
            let u = grid.p_at(j) - center;
            gauss[j] = (-u * u / (2.0 * var)).exp();
            g2 += gauss[j] * gauss[j];
        }
        if g2 < 1e-280 {
            continue; // mode center far outside the momentum window
        }
        let mut ip = C64::default();
        for j in 0..np {
            ip += gauss[j] * modes[[k, j]];
        }
        let c = ip / g2;
        coeffs[k] = c;
        for j in 0..np {
            projected[[k, j]] = c * gauss[j];
        }
    }
    kit.ifft_x(&mut projected);
    let projected = WaveField {
        grid: grid.clone(),
        values: projected,
        time: field.time,
    };

    let mut diff2 = 0.0;
    for (a, b) in field.values.iter().zip(projected.values.iter()) {
        diff2 += (a - b).norm_sqr();
    }
    let residual = (diff2 * grid.cell()).sqrt() / norm_in;

    let fft = Fft1d::new(nx);
    fft.inverse(&mut coeffs);
    let psi_raw = ConfigWavefunction {
        nx,
        x_min: grid.x_min(),
        x_max: grid.x_max(),
        values: Array1::from_vec(coeffs),
        time: field.time,
    };
    let psi = match psi_raw.normalized() {
        Ok(p) => p,
        Err(_) => psi_raw, // field orthogonal to the family: zero extraction
    };

    Ok(StationaryProjection {
        projected,
        psi,
        residual,
    })
}

/// A Wigner distribution sample with its numerical diagnostics.
#[derive(Debug, Clone)]
pub struct WignerField {
    pub grid: PhaseGrid,
    pub values: Array2<f64>,
    pub time: f64,
    /// Largest imaginary residue discarded when taking the real part.
    pub imag_residue: f64,
    pub warnings: Vec<String>,
}

impl WignerField {
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// `W(x, p) = (1/(pi hbar)) Integral psi*(x+y) psi(x-y) e^{2ipy/hbar} dy`
/// by periodic quadrature, evaluated on the target grid's momentum axis.
///
/// The offsets `y` run over a half-step grid (the wave function is upsampled
/// spectrally by a factor of two), so the quadrature resolves momenta up to
/// `pi hbar / dx` and covers symmetric grids without frequency folding.
pub fn wigner(
    psi: &ConfigWavefunction,
    params: &PhysicalParams,
    target: &PhaseGrid,
) -> Result<WignerField> {
    if !psi.matches_grid(target) {
        return Err(Error::GridMismatch(
            "wave function x-axis does not match the target grid".into(),
        ));
    }
    params.validate()?;
    let nx = target.nx();
    let np = target.np();
    let dx = target.dx();
    let hbar = params.hbar;

    // Trigonometric upsampling of psi onto the half-step grid (2 nx points).
    let n2 = 2 * nx;
    let fft_n = Fft1d::new(nx);
    let fft_2n = Fft1d::new(n2);
    let mut spec: Vec<C64> = psi.values.iter().copied().collect();
    fft_n.forward(&mut spec);
    let mut spec2 = vec![C64::default(); n2];
    for k in 0..nx {
        if 2 * k < nx {
            spec2[k] = spec[k];
        } else if 2 * k == nx {
            // split the Nyquist bin symmetrically
            spec2[k] = spec[k] * 0.5;
            spec2[n2 - k] = spec[k] * 0.5;
        } else {
            spec2[n2 - (nx - k)] = spec[k];
        }
    }
    let mut psi_fine = spec2;
    fft_2n.inverse(&mut psi_fine);
    for v in psi_fine.iter_mut() {
        *v *= 2.0; // keep sample values: length doubled, spectrum unchanged
    }

    // Signed half-step offsets, truncated at |y| = Lx/4. Beyond that point
    // the two periodized arguments x + y and x - y can straddle the wrap and
    // meet the state again (an antipodal ghost); for states supported inside
    // a quarter-length ball the truncation is exact up to tails.
    let dy = 0.5 * dx;
    let j_max = n2 / 4;
    let offsets: Vec<isize> = (-(j_max as isize)..=j_max as isize).collect();
    let ny = offsets.len();

    // Phase table e^{2 i p y / hbar} with the quadrature weight folded in.
    let weight = dy / (PI * hbar);
    let phase = Array2::from_shape_fn((ny, np), |(j, l)| {
        let y = offsets[j] as f64 * dy;
        C64::from_polar(weight, 2.0 * target.p_at(l) * y / hbar)
    });

    let wrap = |i: isize| -> usize { i.rem_euclid(n2 as isize) as usize };
    let mut values = Array2::<f64>::zeros((nx, np));
    let mut imag_residue = 0.0f64;
    let mut corr_peak = 0.0f64;
    let mut corr_alias = 0.0f64;
    let mut corr_cut = 0.0f64;
    // Offset beyond which the momentum grid no longer resolves the
    // oscillation e^{2ipy/hbar}: y* = pi hbar / (2 dp).
    let y_star = PI * hbar / (2.0 * target.dp());
    let j_star = (y_star / dy).round() as isize;

    let mut g = vec![C64::default(); ny];
    for i in 0..nx {
        for (j, &sj) in offsets.iter().enumerate() {
            let plus = psi_fine[wrap(2 * i as isize + sj)];
            let minus = psi_fine[wrap(2 * i as isize - sj)];
            g[j] = plus.conj() * minus;
        }
        for (j, v) in g.iter().enumerate() {
            let n = v.norm();
            corr_peak = corr_peak.max(n);
            if offsets[j].abs() == j_max as isize {
                corr_cut = corr_cut.max(n);
            }
            if offsets[j].abs() == j_star {
                corr_alias = corr_alias.max(n);
            }
        }
        for l in 0..np {
            let mut acc = C64::default();
            for j in 0..ny {
                acc += g[j] * phase[[j, l]];
            }
            values[[i, l]] = acc.re;
            imag_residue = imag_residue.max(acc.im.abs());
        }
    }

    let mut warnings = Vec::new();
    if corr_peak > 0.0 && j_star <= j_max as isize && corr_alias > 1e-10 * corr_peak {
        warnings.push(format!(
            "momentum axis under-resolves the phase-space transform: correlation amplitude {:.3e} at offset y = {:.3} (peak {:.3e})",
            corr_alias, y_star, corr_peak
        ));
    }
    if corr_peak > 0.0 && corr_cut > 1e-10 * corr_peak {
        warnings.push(format!(
            "state too broad for a faithful phase-space transform: correlation amplitude {:.3e} at the quarter-domain truncation (peak {:.3e})",
            corr_cut, corr_peak
        ));
    }

    Ok(WignerField {
        grid: target.clone(),
        values,
        time: psi.time,
        imag_residue,
        warnings,
    })
}

/// Default smoothing deviation `hbar a / (2 b)` when both diffusion
/// amplitudes are set.
pub fn default_husimi_sigma(params: &PhysicalParams) -> Option<f64> {
    (params.a > 0.0 && params.b > 0.0).then(|| params.hbar * params.a / (2.0 * params.b))
}

/// Gaussian-smooths the Wigner transform with deviation `sigma_x` in x and
/// the conjugate deviation `hbar/(2 sigma_x)` in p (minimum-uncertainty
/// smoothing), yielding a nonnegative distribution up to rounding.
pub fn husimi(
    psi: &ConfigWavefunction,
    params: &PhysicalParams,
    sigma_x: f64,
    target: &PhaseGrid,
) -> Result<DensityField> {
    if sigma_x <= 0.0 || !sigma_x.is_finite() {
        return Err(Error::validation("husimi smoothing needs sigma_x > 0"));
    }
    let w = wigner(psi, params, target)?;
    let sigma_p = params.hbar / (2.0 * sigma_x);

    let kit = SpectralKit::new(target);
    let mut buf = w.values.mapv(|v| C64::new(v, 0.0));
    kit.fft_x(&mut buf);
    let sx = target.wavenumbers_x();
    for (mut row, &s) in buf.rows_mut().into_iter().zip(sx.iter()) {
        let damp = (-0.5 * sigma_x * sigma_x * s * s).exp();
        row.mapv_inplace(|v| v * damp);
    }
    kit.ifft_x(&mut buf);
    kit.fft_p(&mut buf);
    let sp = target.wavenumbers_p();
    for mut row in buf.rows_mut() {
        for (v, &k) in row.iter_mut().zip(sp.iter()) {
            *v *= (-0.5 * sigma_p * sigma_p * k * k).exp();
        }
    }
    kit.ifft_p(&mut buf);

    Ok(DensityField {
        grid: target.clone(),
        values: buf.mapv(|c| c.re),
        time: psi.time,
    })
}

/// Result of [`galileo_boost`] with wrap-around diagnostics.
#[derive(Debug, Clone)]
pub struct BoostOutcome {
    pub field: WaveField,
    pub warnings: Vec<String>,
}

/// Transition to the frame moving at velocity `u` at time `t`:
/// `phi'(x', p') = exp(-(i/hbar)(m u x' + m u^2 t / 2)) phi(x' + u t, p' + m u)`,
/// realized by exact spectral shifts and a pointwise phase. Norm-preserving.
pub fn galileo_boost(
    field: &WaveField,
    u: f64,
    params: &PhysicalParams,
    t: f64,
) -> Result<BoostOutcome> {
    params.validate()?;
    if !u.is_finite() {
        return Err(Error::validation("boost velocity must be finite"));
    }
    if u == 0.0 {
        return Ok(BoostOutcome {
            field: field.clone(),
            warnings: Vec::new(),
        });
    }
    let grid = &field.grid;
    let (lx, lp) = grid.lengths();
    let mut warnings = Vec::new();
    let dx_shift = u * t;
    let dp_shift = params.mass * u;
    if dx_shift.abs() > 0.5 * lx {
        warnings.push(format!(
            "coordinate shift {dx_shift:.3} exceeds half the domain ({:.3}); wrap-around aliasing likely",
            0.5 * lx
        ));
    }
    if dp_shift.abs() > 0.5 * lp {
        warnings.push(format!(
            "momentum shift {dp_shift:.3} exceeds half the domain ({:.3}); wrap-around aliasing likely",
            0.5 * lp
        ));
    }

    let kit = SpectralKit::new(grid);
    let mut values = field.values.clone();
    // phi(x + u t, p + m u): spectral shifts by -u t in x and -m u in p.
    kit.shift_x(grid, &mut values, &vec![-dx_shift; grid.np()]);
    kit.shift_p(grid, &mut values, &vec![-dp_shift; grid.nx()]);

    let mu = params.mass * u;
    let phase0 = 0.5 * params.mass * u * u * t;
    let inv_h = 1.0 / params.hbar;
    for ((i, _), v) in values.indexed_iter_mut() {
        let x = grid.x_at(i);
        *v *= C64::from_polar(1.0, -(mu * x + phase0) * inv_h);
    }

    Ok(BoostOutcome {
        field: WaveField {
            grid: grid.clone(),
            values,
            time: field.time,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::apply_momentum_diffusion;
    use crate::spectral::gaussian_smooth_real;
    use approx::assert_relative_eq;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(256, 256, (-20.0, 20.0), (-20.0, 20.0)).unwrap()
    }

    fn params() -> PhysicalParams {
        PhysicalParams::default()
    }

    fn gaussian_psi(g: &PhaseGrid, x0: f64, p0: f64) -> ConfigWavefunction {
        ConfigWavefunction::gaussian_packet(g, x0, p0, 1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn lift_of_plane_wave_is_single_mode() {
        let g = grid();
        let pr = params();
        let s0 = 2.0 * PI / 40.0 * 12.0;
        let psi = ConfigWavefunction::from_fn(&g, 0.0, |x| C64::from_polar(1.0, s0 * x));
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();
        // Expected: e^{i s0 x} Gaussian centered at hbar s0, normalized.
        let expect = WaveField::from_fn(&g, 0.0, |x, p| {
            C64::from_polar((-(p - s0) * (p - s0) / 2.0).exp(), s0 * x)
        })
        .normalized()
        .unwrap();
        let mut diff = 0.0f64;
        for (a, b) in f.values.iter().zip(expect.values.iter()) {
            diff = diff.max((a - b).norm());
        }
        assert!(diff < 1e-12, "max deviation {diff}");
    }

    #[test]
    fn lift_is_annihilated_by_momentum_diffusion() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 0.7, 1.2);
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();
        let residual = apply_momentum_diffusion(&f, &pr).unwrap().l2_norm() / f.l2_norm();
        assert!(residual <= 1e-8, "residual {residual}");
    }

    #[test]
    fn lift_centroid_matches_packet_moments() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 1.0, 1.5);
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();
        let m = f.metrics().unwrap();
        assert_relative_eq!(m.centroid.0, 1.0, epsilon = 1e-8);
        assert_relative_eq!(m.centroid.1, 1.5, epsilon = 1e-8);
    }

    #[test]
    fn lift_requires_positive_temperature() {
        let g = grid();
        let pr = params().with_kt(0.0);
        let psi = gaussian_psi(&g, 0.0, 0.0);
        assert!(lift_to_phase_space(&psi, &pr, &g).is_err());
    }

    #[test]
    fn project_recovers_lifted_state() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, -0.5, 0.8);
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();
        let proj = project_stationary(&f, &pr).unwrap();
        assert!(proj.residual <= 1e-10, "residual {}", proj.residual);
        let d = proj.psi.phase_aligned_distance(&psi).unwrap();
        assert!(d <= 1e-10, "psi distance {d}");
        // And the recovered psi has no extra phase: plain distance too.
        let mut diff = 0.0f64;
        for (a, b) in proj.psi.values.iter().zip(psi.values.iter()) {
            diff += (a - b).norm_sqr();
        }
        assert!((diff * psi.dx()).sqrt() <= 1e-10);
    }

    #[test]
    fn project_is_idempotent() {
        let g = grid();
        let pr = params();
        let f = WaveField::from_fn(&g, 0.0, |x, p| {
            C64::new((-(x * x) / 6.0 - (p - 0.4) * (p - 0.4) / 3.0).exp(), 0.12 * (-(x * x + p * p) / 8.0).exp())
        });
        let p1 = project_stationary(&f, &pr).unwrap();
        let p2 = project_stationary(&p1.projected, &pr).unwrap();
        assert!(p2.residual <= 1e-12, "second residual {}", p2.residual);
        let mut diff = 0.0f64;
        for (a, b) in p1.projected.values.iter().zip(p2.projected.values.iter()) {
            diff += (a - b).norm_sqr();
        }
        assert!((diff * g.cell()).sqrt() <= 1e-12);
    }

    #[test]
    fn excited_profile_has_unit_residual() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 0.0, 1.0);
        let f = lift_excited(&psi, &pr, &g).unwrap();
        let proj = project_stationary(&f, &pr).unwrap();
        assert!(
            (proj.residual - 1.0).abs() <= 1e-10,
            "residual {}",
            proj.residual
        );
    }

    #[test]
    fn lift_project_roundtrip_phase_convention() {
        let g = grid();
        let pr = params();
        // Unit-norm input: the roundtrip returns it with coefficient one.
        let psi = gaussian_psi(&g, 0.3, -0.9);
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();
        let proj = project_stationary(&f, &pr).unwrap();
        let ip = proj.psi.inner(&psi).unwrap();
        assert!((ip.norm() - 1.0).abs() <= 1e-10);
        assert!((ip - C64::new(1.0, 0.0)).norm() <= 1e-10, "c = {ip}");
    }

    #[test]
    fn wigner_of_coherent_gaussian_is_analytic() {
        let g = grid();
        let pr = params();
        // psi = pi^{-1/4} e^{-x^2/2}: W = (1/pi) e^{-x^2 - p^2}.
        let psi = ConfigWavefunction::from_fn(&g, 0.0, |x| {
            C64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0)
        });
        let w = wigner(&psi, &pr, &g).unwrap();
        let mut max_err = 0.0f64;
        for ((i, l), v) in w.values.indexed_iter() {
            let x = g.x_at(i);
            let p = g.p_at(l);
            let want = (1.0 / PI) * (-x * x - p * p).exp();
            max_err = max_err.max((v - want).abs());
        }
        assert!(max_err <= 1e-8, "max error {max_err}");
        assert!(w.imag_residue <= 1e-10);
    }

    #[test]
    fn wigner_mass_equals_norm_squared() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 1.0, 2.0);
        let w = wigner(&psi, &pr, &g).unwrap();
        assert_relative_eq!(w.mass(), 1.0, epsilon = 1e-8);
    }

    fn cat_state(g: &PhaseGrid) -> ConfigWavefunction {
        ConfigWavefunction::from_fn(g, 0.0, |x| {
            let a = (-(x - 2.0) * (x - 2.0) / 2.0).exp();
            let b = (-(x + 2.0) * (x + 2.0) / 2.0).exp();
            C64::new(a + b, 0.0)
        })
        .normalized()
        .unwrap()
    }

    #[test]
    fn wigner_husimi_dichotomy_for_cat_state() {
        let g = grid();
        let pr = params();
        let psi = cat_state(&g);
        let w = wigner(&psi, &pr, &g).unwrap();
        assert!(w.min_value() < -0.01, "wigner min {}", w.min_value());

        let h = husimi(&psi, &pr, 1.0 / 2.0f64.sqrt(), &g).unwrap();
        assert!(h.min_value() >= -1e-9, "husimi min {}", h.min_value());
        assert_relative_eq!(h.mass(), w.mass(), epsilon = 1e-8);
    }

    #[test]
    fn husimi_widens_gaussian_variances_add() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 0.0, 0.0); // |psi|^2 variance = 1
        let sigma_x = 0.8;
        let h = husimi(&psi, &pr, sigma_x, &g).unwrap();
        // x-marginal variance of the smoothed distribution.
        let mut mass = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for ((i, _), v) in h.values.indexed_iter() {
            let x = g.x_at(i);
            mass += v;
            m1 += x * v;
            m2 += x * x * v;
        }
        let mean = m1 / mass;
        let var = m2 / mass - mean * mean;
        assert_relative_eq!(var, 1.0 + sigma_x * sigma_x, epsilon = 1e-6);
    }

    #[test]
    fn husimi_rejects_nonpositive_sigma() {
        let g = grid();
        let psi = gaussian_psi(&g, 0.0, 0.0);
        assert!(husimi(&psi, &params(), 0.0, &g).is_err());
    }

    #[test]
    fn default_sigma_from_diffusion_amplitudes() {
        let pr = params().with_ab(0.6, 1.5);
        assert_relative_eq!(default_husimi_sigma(&pr).unwrap(), 0.2);
        assert!(default_husimi_sigma(&params()).is_none());
    }

    #[test]
    fn lift_momentum_marginal_is_smoothed_position_density() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 0.5, 1.0);
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();

        // Marginal over p of |phi|^2, normalized to unit mass.
        let np = g.np();
        let mut marginal = vec![0.0; g.nx()];
        for (i, row) in f.values.rows().into_iter().enumerate() {
            marginal[i] = (0..np).map(|j| row[j].norm_sqr()).sum::<f64>() * g.dp();
        }
        let mass: f64 = marginal.iter().sum::<f64>() * g.dx();
        for v in marginal.iter_mut() {
            *v /= mass;
        }

        // Reference: |psi|^2 smoothed with deviation hbar / sqrt(2 kT m).
        let width = pr.hbar / (2.0 * pr.kt_mass()).sqrt();
        let dens: Vec<f64> = psi.values.iter().map(|c| c.norm_sqr()).collect();
        let smoothed = gaussian_smooth_real(&dens, g.lengths().0, width);

        let mut max_err = 0.0f64;
        for i in 0..g.nx() {
            max_err = max_err.max((marginal[i] - smoothed[i]).abs());
        }
        assert!(max_err <= 1e-6, "max deviation {max_err}");
    }

    #[test]
    fn boost_zero_velocity_is_identity() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 0.0, 0.0);
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();
        let b = galileo_boost(&f, 0.0, &pr, 4.2).unwrap();
        assert_eq!(b.field.values, f.values);
        assert!(b.warnings.is_empty());
    }

    #[test]
    fn boost_preserves_norm() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 1.0, -0.5);
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();
        let b = galileo_boost(&f, 1.7, &pr, 0.6).unwrap();
        assert_relative_eq!(b.field.l2_norm(), f.l2_norm(), max_relative = 1e-12);
    }

    #[test]
    fn boosts_compose_at_time_zero() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 0.0, 0.0);
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();
        let two_step = galileo_boost(
            &galileo_boost(&f, 0.9, &pr, 0.0).unwrap().field,
            0.6,
            &pr,
            0.0,
        )
        .unwrap()
        .field;
        let one_step = galileo_boost(&f, 1.5, &pr, 0.0).unwrap().field;
        // Densities must agree; the residual phase must be uniform.
        let d1 = two_step.density();
        let d2 = one_step.density();
        let mut max_err = 0.0f64;
        for (a, b) in d1.values.iter().zip(d2.values.iter()) {
            max_err = max_err.max((a - b).abs());
        }
        assert!(max_err <= 1e-10, "density deviation {max_err}");

        let mut phase_ref = None;
        for (a, b) in one_step.values.iter().zip(two_step.values.iter()) {
            if a.norm() > 1e-6 {
                let ratio = b / a;
                match phase_ref {
                    None => phase_ref = Some(ratio),
                    Some(r) => assert!((ratio - r).norm() <= 1e-8, "nonuniform phase"),
                }
            }
        }
    }

    #[test]
    fn boost_warns_on_large_shift() {
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 0.0, 0.0);
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();
        let b = galileo_boost(&f, 25.0, &pr, 1.0).unwrap();
        assert!(!b.warnings.is_empty());
    }

    #[test]
    fn gauge_transform_leaves_density_bitwise_close() {
        use crate::operators::{gauge_transform, GaugeDirection, GaugeFunction};
        let g = grid();
        let pr = params();
        let psi = gaussian_psi(&g, 0.4, 0.3);
        let f = lift_to_phase_space(&psi, &pr, &g).unwrap();
        let gf = GaugeFunction::quadratic([0.2, -0.4, 0.3, 0.02, 0.05, 0.0]);
        let ft = gauge_transform(&f, &gf, &pr, 1.1, GaugeDirection::Forward).unwrap();
        let d0 = f.density();
        let d1 = ft.density();
        for (a, b) in d0.values.iter().zip(d1.values.iter()) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.max(1e-300));
        }
    }
}
