use super::Scheme;
use crate::potential::PotentialValues;
use crate::spectral::SpectralKit;
use crate::{C64, Error, PhaseGrid, PhysicalParams, PotentialSpec, Result, WaveField};
use ndarray::Array2;

/// One-step integrator for the coordinate-and-momentum diffusion wave flow:
/// Hamiltonian transport with the internal phase (identical machinery to the
/// momentum-diffusion model, since `H - p dH/dp = E + V - p^2/2m`) composed
/// with the diffusion factor, which splits per coordinate wavenumber into an
/// exact pointwise decay `e^{-a^2 (s - p/hbar)^2 tau}`, exact spectral
/// momentum diffusion `e^{-b^2 kappa^2 tau}`, and the uniform growth
/// `e^{(ab/hbar) tau}`.
pub struct XpDiffusionStepper {
    grid: PhaseGrid,
    params: PhysicalParams,
    spec: PotentialSpec,
    dt: f64,
    scheme: Scheme,
    kit: SpectralKit,
    /// Decay in coordinate-mode space for a quarter of the diffusion
    /// interval: `e^{-a^2 (s_k - p_j/hbar)^2 tau/2} * growth-share`.
    ridge_decay: Array2<f64>,
    /// Momentum-mode diffusion for half the diffusion interval.
    heat_decay: Vec<f64>,
    /// Transport tables (same construction as the momentum-diffusion model).
    x_shift: Array2<C64>,
    kin_phase: Vec<C64>,
    v_phase: Vec<C64>,
    p_shift: Array2<C64>,
    warnings: Vec<String>,
    static_tables: bool,
}

impl XpDiffusionStepper {
    pub fn new(
        grid: &PhaseGrid,
        params: &PhysicalParams,
        spec: &PotentialSpec,
        dt: f64,
        scheme: Scheme,
    ) -> Result<Self> {
        params.validate()?;
        params.require_xp_diffusion()?;
        spec.validate()?;
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::validation("dt must be finite and > 0"));
        }
        let kit = SpectralKit::new(grid);

        // Diffusion interval per application: dt/2 for the symmetric scheme
        // (two half factors around transport), dt for the sequential one.
        let tau = match scheme {
            Scheme::Strang => 0.5 * dt,
            Scheme::Lie => dt,
        };
        let a2 = params.a * params.a;
        let b2 = params.b * params.b;
        let inv_h = 1.0 / params.hbar;
        let ws = grid.wavenumbers_x();
        // The inner diffusion factorization is itself symmetric:
        // ridge(tau/2) heat(tau) ridge(tau/2); the uniform growth commutes
        // and is folded into the ridge tables.
        let growth_half = (0.5 * params.a * params.b * inv_h * tau).exp();
        let ridge_decay = Array2::from_shape_fn((grid.nx(), grid.np()), |(k, j)| {
            let r = ws[k] - grid.p_at(j) * inv_h;
            growth_half * (-0.5 * a2 * r * r * tau).exp()
        });
        let kappa = grid.wavenumbers_p();
        let heat_decay: Vec<f64> = kappa.iter().map(|&k| (-b2 * k * k * tau).exp()).collect();

        let half = 0.5 * dt;
        let inv_m = 1.0 / params.mass;
        let x_shift = Array2::from_shape_fn((grid.nx(), grid.np()), |(k, j)| {
            C64::from_polar(1.0, -ws[k] * grid.p_at(j) * inv_m * half)
        });
        let e0 = params.effective_rest_energy();
        let kin_phase: Vec<C64> = (0..grid.np())
            .map(|j| {
                let p = grid.p_at(j);
                C64::from_polar(1.0, half * (0.5 * p * p * inv_m - e0) / params.hbar)
            })
            .collect();

        let pot0 = spec.eval(&grid.x_axis(), grid.lengths().0, 0.0)?;
        let mut warnings = Vec::new();
        let p_abs = grid.p_min().abs().max(grid.p_max().abs());
        if p_abs * inv_m * dt > grid.dx() {
            warnings.push(format!(
                "transport resolution bound exceeded: max|p|/m * dt = {:.3e} > dx = {:.3e}",
                p_abs * inv_m * dt,
                grid.dx()
            ));
        }

        let static_tables = spec.is_static();
        let mut stepper = XpDiffusionStepper {
            grid: grid.clone(),
            params: *params,
            spec: spec.clone(),
            dt,
            scheme,
            kit,
            ridge_decay,
            heat_decay,
            x_shift,
            kin_phase,
            v_phase: Vec::new(),
            p_shift: Array2::zeros((0, 0)),
            warnings,
            static_tables,
        };
        stepper.build_potential_tables(&pot0);
        Ok(stepper)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn build_potential_tables(&mut self, pot: &PotentialValues) {
        let half = 0.5 * self.dt;
        let inv_h = 1.0 / self.params.hbar;
        self.v_phase = pot
            .v
            .iter()
            .map(|&v| C64::from_polar(1.0, -half * v * inv_h))
            .collect();
        let kappa = self.grid.wavenumbers_p();
        let dt = self.dt;
        self.p_shift = Array2::from_shape_fn((self.grid.nx(), self.grid.np()), |(i, l)| {
            // momentum foot point is p + dV/dx * dt: shift by -dV/dx * dt,
            // multiplier e^{-i kappa * shift} = e^{+i kappa dV/dx dt}
            C64::from_polar(1.0, kappa[l] * pot.dvdx[i] * dt)
        });
    }

    fn phase_half(&self, values: &mut Array2<C64>) {
        for (i, mut row) in values.rows_mut().into_iter().enumerate() {
            let vx = self.v_phase[i];
            for (v, k) in row.iter_mut().zip(self.kin_phase.iter()) {
                *v *= vx * k;
            }
        }
    }

    fn transport(&self, values: &mut Array2<C64>) {
        self.kit.fft_x(values);
        values.zip_mut_with(&self.x_shift, |v, m| *v *= m);
        self.kit.ifft_x(values);
        self.phase_half(values);
        self.kit.fft_p(values);
        values.zip_mut_with(&self.p_shift, |v, m| *v *= m);
        self.kit.ifft_p(values);
        self.phase_half(values);
        self.kit.fft_x(values);
        values.zip_mut_with(&self.x_shift, |v, m| *v *= m);
        self.kit.ifft_x(values);
    }

    /// Diffusion factor over its interval: ridge-half, momentum heat,
    /// ridge-half (a symmetric inner split; the two factors do not commute).
    fn diffusion(&self, values: &mut Array2<C64>) {
        self.kit.fft_x(values);
        values.zip_mut_with(&self.ridge_decay, |v, &d| *v *= d);
        self.kit.ifft_x(values);

        self.kit.fft_p(values);
        for mut row in values.rows_mut() {
            for (v, &d) in row.iter_mut().zip(self.heat_decay.iter()) {
                *v *= d;
            }
        }
        self.kit.ifft_p(values);

        self.kit.fft_x(values);
        values.zip_mut_with(&self.ridge_decay, |v, &d| *v *= d);
        self.kit.ifft_x(values);
    }

    fn check_finite(values: &Array2<C64>, substep: &str) -> Result<()> {
        if values.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::numerical(
                "coordinate-and-momentum diffusion wave step",
                format!("non-finite values after the {substep} sub-step"),
            ));
        }
        Ok(())
    }

    pub fn step(&mut self, field: &mut WaveField) -> Result<()> {
        if !self.grid.same_as(&field.grid) {
            return Err(Error::GridMismatch(
                "stepper grid differs from the field grid".into(),
            ));
        }
        if !self.static_tables {
            let t_mid = field.time + 0.5 * self.dt;
            let pot = self
                .spec
                .eval(&self.grid.x_axis(), self.grid.lengths().0, t_mid)?;
            self.build_potential_tables(&pot);
        }
        match self.scheme {
            Scheme::Strang => {
                self.diffusion(&mut field.values);
                Self::check_finite(&field.values, "diffusion (entry)")?;
                self.transport(&mut field.values);
                Self::check_finite(&field.values, "transport")?;
                self.diffusion(&mut field.values);
                Self::check_finite(&field.values, "diffusion (exit)")?;
            }
            Scheme::Lie => {
                self.diffusion(&mut field.values);
                Self::check_finite(&field.values, "diffusion")?;
                self.transport(&mut field.values);
                Self::check_finite(&field.values, "transport")?;
            }
        }
        field.time += self.dt;
        Ok(())
    }
}

/// One-shot convenience wrapper around [`XpDiffusionStepper`].
pub fn step_xp_diffusion(
    field: &WaveField,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    dt: f64,
) -> Result<WaveField> {
    let mut stepper = XpDiffusionStepper::new(&field.grid, params, spec, dt, Scheme::Strang)?;
    let mut out = field.clone();
    stepper.step(&mut out)?;
    Ok(out)
}
