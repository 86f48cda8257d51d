use crate::potential::PotentialValues;
use crate::spectral::{OuPropagator, SpectralKit};
use crate::{C64, DensityField, Error, PhaseGrid, PhysicalParams, PotentialSpec, Result};
use ndarray::Array2;

/// Conservative transport stepper for the classical reference equations,
/// optionally composed with the exact Ornstein-Uhlenbeck momentum update
/// (drift center zero, rate `gamma`, equilibrium variance `kT m`).
///
/// Transport is the symmetric composition of exact spectral shifts
/// X(dt/2) P(dt) X(dt/2); every factor preserves the total mass exactly, so
/// mass is conserved to rounding.
pub struct ClassicalStepper {
    grid: PhaseGrid,
    params: PhysicalParams,
    spec: PotentialSpec,
    dt: f64,
    friction: bool,
    kit: SpectralKit,
    ou: Option<OuPropagator>,
    x_shift: Array2<C64>,
    p_shift: Array2<C64>,
    warnings: Vec<String>,
    static_tables: bool,
}

impl ClassicalStepper {
    /// `friction = true` integrates the full dissipative equation with the
    /// `gamma` of `params`; `friction = false` integrates pure Hamiltonian
    /// transport.
    pub fn new(
        grid: &PhaseGrid,
        params: &PhysicalParams,
        spec: &PotentialSpec,
        dt: f64,
        friction: bool,
    ) -> Result<Self> {
        params.validate()?;
        spec.validate()?;
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::validation("dt must be finite and > 0"));
        }
        let kit = SpectralKit::new(grid);
        let ou = if friction && params.gamma > 0.0 {
            let centers = vec![0.0; grid.nx()];
            Some(OuPropagator::new(
                grid,
                0.5 * params.gamma * dt,
                params.kt_mass(),
                &centers,
            )?)
        } else {
            None
        };

        let half = 0.5 * dt;
        let inv_m = 1.0 / params.mass;
        let ws = grid.wavenumbers_x();
        let x_shift = Array2::from_shape_fn((grid.nx(), grid.np()), |(k, j)| {
            C64::from_polar(1.0, -ws[k] * grid.p_at(j) * inv_m * half)
        });

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
        let mut stepper = ClassicalStepper {
            grid: grid.clone(),
            params: *params,
            spec: spec.clone(),
            dt,
            friction,
            kit,
            ou,
            x_shift,
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
        let kappa = self.grid.wavenumbers_p();
        let dt = self.dt;
        self.p_shift = Array2::from_shape_fn((self.grid.nx(), self.grid.np()), |(i, l)| {
            // momentum foot point is p + dV/dx * dt: shift by -dV/dx * dt,
            // multiplier e^{-i kappa * shift} = e^{+i kappa dV/dx dt}
            C64::from_polar(1.0, kappa[l] * pot.dvdx[i] * dt)
        });
    }

    fn transport(&self, values: &mut Array2<C64>) {
        self.kit.fft_x(values);
        values.zip_mut_with(&self.x_shift, |v, m| *v *= m);
        self.kit.ifft_x(values);
        self.kit.fft_p(values);
        values.zip_mut_with(&self.p_shift, |v, m| *v *= m);
        self.kit.ifft_p(values);
        self.kit.fft_x(values);
        values.zip_mut_with(&self.x_shift, |v, m| *v *= m);
        self.kit.ifft_x(values);
    }

    /// Advances the density by one step, updating its time stamp. Fails when
    /// the step does not conserve mass to the documented tolerance.
    pub fn step(&mut self, density: &mut DensityField) -> Result<()> {
        if !self.grid.same_as(&density.grid) {
            return Err(Error::GridMismatch(
                "stepper grid differs from the density grid".into(),
            ));
        }
        if !self.static_tables {
            let t_mid = density.time + 0.5 * self.dt;
            let pot = self
                .spec
                .eval(&self.grid.x_axis(), self.grid.lengths().0, t_mid)?;
            self.build_potential_tables(&pot);
        }
        let mass_in = density.mass();

        let mut buf = density.values.mapv(|v| C64::new(v, 0.0));
        if let Some(ou) = &self.ou {
            // centers are x-independent: rows are already momentum lanes
            ou.apply(&mut buf);
        }
        self.transport(&mut buf);
        if let Some(ou) = &self.ou {
            ou.apply(&mut buf);
        }
        if buf.iter().any(|c| !c.re.is_finite()) {
            return Err(Error::numerical(
                "classical transport step",
                "non-finite values after the step",
            ));
        }
        density.values.zip_mut_with(&buf, |d, c| *d = c.re);
        density.time += self.dt;

        let mass_out = density.mass();
        let drift = (mass_out - mass_in).abs() / mass_in.abs().max(1e-300);
        if drift > 1e-8 {
            return Err(Error::numerical(
                "classical transport step",
                format!("mass drift {drift:.3e} exceeds 1e-8 in one step"),
            ));
        }
        let _ = self.friction;
        Ok(())
    }
}

/// One step of the dissipative phase-space transport (Kramers equation):
/// `df/dt = dV/dx df/dp - (p/m) df/dx + gamma d/dp (p f + kT m df/dp)`.
pub fn step_kramers_fp(
    density: &DensityField,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    dt: f64,
) -> Result<DensityField> {
    let mut stepper = ClassicalStepper::new(&density.grid, params, spec, dt, true)?;
    let mut out = density.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

/// One step of pure Hamiltonian transport (Liouville equation):
/// `drho/dt = dV/dx drho/dp - (p/m) drho/dx`.
pub fn step_liouville(
    density: &DensityField,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    dt: f64,
) -> Result<DensityField> {
    let mut stepper = ClassicalStepper::new(&density.grid, params, spec, dt, false)?;
    let mut out = density.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(128, 128, (-16.0, 16.0), (-16.0, 16.0)).unwrap()
    }

    fn blob(g: &PhaseGrid, x0: f64, p0: f64) -> DensityField {
        DensityField::from_fn(g, 0.0, |x, p| {
            (-((x - x0) * (x - x0) + (p - p0) * (p - p0)) / 2.0).exp()
        })
    }

    #[test]
    fn uniform_density_is_invariant() {
        let g = grid();
        let params = PhysicalParams::default();
        let rho = DensityField::from_fn(&g, 0.0, |_, _| 1.0);
        let out = step_liouville(&rho, &params, &PotentialSpec::harmonic(1.0), 1e-2).unwrap();
        for v in out.values.iter() {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn free_transport_follows_characteristics() {
        let g = grid();
        let params = PhysicalParams::default();
        let rho = blob(&g, 0.0, 2.0);
        let dt = 0.05;
        let mut cur = rho.clone();
        for _ in 0..10 {
            cur = step_liouville(&cur, &params, &PotentialSpec::zero(), dt).unwrap();
        }
        let t = 0.5;
        let mut max_err = 0.0f64;
        for ((i, j), v) in cur.values.indexed_iter() {
            let x = g.x_at(i);
            let p = g.p_at(j);
            let want = (-((x - p * t) * (x - p * t) + (p - 2.0) * (p - 2.0)) / 2.0).exp();
            max_err = max_err.max((v - want).abs());
        }
        assert!(max_err <= 1e-9, "characteristics deviation {max_err}");
    }

    #[test]
    fn harmonic_rotation_returns_after_one_period() {
        let g = PhaseGrid::new(256, 256, (-16.0, 16.0), (-16.0, 16.0)).unwrap();
        let params = PhysicalParams::default();
        let spec = PotentialSpec::harmonic(1.0);
        let rho0 = blob(&g, 2.0, 0.0);
        // dt divides the period exactly so the return error is pure
        // splitting error, not a period-rounding offset.
        let period = 2.0 * std::f64::consts::PI;
        let steps = 12600usize;
        let dt = period / steps as f64;
        let mut stepper = ClassicalStepper::new(&g, &params, &spec, dt, false).unwrap();
        let mut rho = rho0.clone();
        for _ in 0..steps {
            stepper.step(&mut rho).unwrap();
        }
        let mut l1 = 0.0;
        for (a, b) in rho.values.iter().zip(rho0.values.iter()) {
            l1 += (a - b).abs();
        }
        l1 *= g.cell();
        let mass = rho0.mass();
        assert!(l1 / mass <= 1e-4, "return L1 distance {l1} (mass {mass})");
    }

    #[test]
    fn mass_is_conserved_every_step() {
        let g = grid();
        let params = PhysicalParams::default().with_gamma(2.0);
        let spec = PotentialSpec::harmonic(1.0);
        let mut rho = blob(&g, 1.0, -1.0);
        let m0 = rho.mass();
        let mut stepper = ClassicalStepper::new(&g, &params, &spec, 1e-2, true).unwrap();
        for _ in 0..50 {
            stepper.step(&mut rho).unwrap();
            assert_relative_eq!(rho.mass(), m0, max_relative = 1e-10);
        }
    }

    #[test]
    fn maxwell_boltzmann_density_is_stationary() {
        // f = exp(-(p^2/2m + V)/kT) is a fixed point of the dissipative
        // transport; the symmetric splitting preserves it up to O(dt^2) per
        // unit time.
        let g = PhaseGrid::new(192, 192, (-16.0, 16.0), (-16.0, 16.0)).unwrap();
        let params = PhysicalParams::default().with_gamma(1.0); // kT = 1
        let spec = PotentialSpec::harmonic(1.0);
        let f0 = DensityField::from_fn(&g, 0.0, |x, p| (-(0.5 * p * p + 0.5 * x * x)).exp());
        let dt = 5e-4;
        let steps = (1.0 / dt) as usize; // one unit of time
        let mut stepper = ClassicalStepper::new(&g, &params, &spec, dt, true).unwrap();
        let mut f = f0.clone();
        for _ in 0..steps {
            stepper.step(&mut f).unwrap();
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in f.values.iter().zip(f0.values.iter()) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        let rel = (num / den).sqrt();
        assert!(rel <= 1e-6, "stationary residual over unit time: {rel}");
    }
}
