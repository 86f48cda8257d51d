use crate::grid::{deriv_wavenumbers, fft_wavenumbers};
use crate::spectral::{gaussian_smooth_real, Fft1d};
use crate::{C64, ConfigWavefunction, Error, PhaseGrid, PhysicalParams, PotentialSpec, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Split-step spectral integrator for the configuration-axis equation
/// `i hbar dpsi/dt = (-hbar^2/(2m) d^2/dx^2 + V_sigma) psi`, where
/// `V_sigma` is the potential convolved with a Gaussian of deviation
/// `sigma` (`sigma = 0` means the raw potential). Norm-preserving by
/// construction.
pub struct SchrodingerStepper {
    nx: usize,
    x_min: f64,
    x_max: f64,
    params: PhysicalParams,
    spec: PotentialSpec,
    sigma: f64,
    dt: f64,
    fft: Fft1d,
    kinetic: Vec<C64>,
    v_phase: Vec<C64>,
    static_tables: bool,
}

impl SchrodingerStepper {
    pub fn new(
        grid: &PhaseGrid,
        params: &PhysicalParams,
        spec: &PotentialSpec,
        dt: f64,
        sigma: f64,
    ) -> Result<Self> {
        params.validate()?;
        spec.validate()?;
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::validation("dt must be finite and > 0"));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::validation("smoothing sigma must be finite and >= 0"));
        }
        let nx = grid.nx();
        let lx = grid.lengths().0;
        let kinetic: Vec<C64> = deriv_wavenumbers(nx, lx)
            .iter()
            .zip(fft_wavenumbers(nx, lx).iter())
            .map(|(_, &s)| {
                // full wavenumbers: the kinetic factor is even in s
                C64::from_polar(1.0, -params.hbar * s * s * dt / (2.0 * params.mass))
            })
            .collect();

        let static_tables = spec.is_static();
        let mut stepper = SchrodingerStepper {
            nx,
            x_min: grid.x_min(),
            x_max: grid.x_max(),
            params: *params,
            spec: spec.clone(),
            sigma,
            dt,
            fft: Fft1d::new(nx),
            kinetic,
            v_phase: Vec::new(),
            static_tables,
        };
        stepper.build_potential_tables(0.0)?;
        Ok(stepper)
    }

    fn x_axis(&self) -> Vec<f64> {
        let dx = (self.x_max - self.x_min) / self.nx as f64;
        (0..self.nx).map(|i| self.x_min + i as f64 * dx).collect()
    }

    fn build_potential_tables(&mut self, t: f64) -> Result<()> {
        let lx = self.x_max - self.x_min;
        let pot = self.spec.eval(&self.x_axis(), lx, t)?;
        let v_sigma = if self.sigma > 0.0 {
            gaussian_smooth_real(&pot.v, lx, self.sigma)
        } else {
            pot.v
        };
        let half = 0.5 * self.dt / self.params.hbar;
        self.v_phase = v_sigma
            .iter()
            .map(|&v| C64::from_polar(1.0, -half * v))
            .collect();
        Ok(())
    }

    pub fn step(&mut self, psi: &mut ConfigWavefunction) -> Result<()> {
        if psi.nx != self.nx || psi.x_min != self.x_min || psi.x_max != self.x_max {
            return Err(Error::GridMismatch(
                "stepper x-axis differs from the wave function".into(),
            ));
        }
        if !self.static_tables {
            self.build_potential_tables(psi.time + 0.5 * self.dt)?;
        }
        let values = psi.values.as_slice_mut().expect("contiguous");
        for (v, ph) in values.iter_mut().zip(self.v_phase.iter()) {
            *v *= ph;
        }
        self.fft.forward(values);
        for (v, k) in values.iter_mut().zip(self.kinetic.iter()) {
            *v *= k;
        }
        self.fft.inverse(values);
        for (v, ph) in values.iter_mut().zip(self.v_phase.iter()) {
            *v *= ph;
        }
        psi.time += self.dt;
        Ok(())
    }
}

/// One split step of the smoothed-potential equation on the coordinate axis.
pub fn step_schrodinger(
    psi: &ConfigWavefunction,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    dt: f64,
    smoothing_sigma: f64,
    grid: &PhaseGrid,
) -> Result<ConfigWavefunction> {
    let mut stepper = SchrodingerStepper::new(grid, params, spec, dt, smoothing_sigma)?;
    let mut out = psi.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

/// Fixed-step evolution returning the states at every `stride` steps
/// (including the initial and final states).
pub fn evolve_schrodinger(
    psi: &ConfigWavefunction,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    dt: f64,
    t_final: f64,
    smoothing_sigma: f64,
    stride: usize,
    grid: &PhaseGrid,
) -> Result<Vec<ConfigWavefunction>> {
    let steps = if t_final == 0.0 {
        0
    } else {
        (t_final / dt).round().max(1.0) as usize
    };
    let mut out = vec![psi.clone()];
    if steps == 0 {
        return Ok(out);
    }
    let mut stepper = SchrodingerStepper::new(grid, params, spec, dt, smoothing_sigma)?;
    let mut cur = psi.clone();
    let stride = stride.max(1);
    for step in 1..=steps {
        stepper.step(&mut cur)?;
        if step % stride == 0 || step == steps {
            out.push(cur.clone());
        }
    }
    Ok(out)
}

/// Lowest eigenpairs of the discretized Hamiltonian
/// `-hbar^2/(2m) d^2/dx^2 + V_sigma(x)` by dense symmetric diagonalization.
/// The kinetic block is the spectral differentiation matrix, consistent with
/// the split-step integrator. Eigenvectors are returned unit-norm in L2(dx)
/// with a deterministic sign convention, sorted by ascending energy.
pub fn schrodinger_eigenstates(
    grid: &PhaseGrid,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    smoothing_sigma: f64,
    t: f64,
    count: usize,
) -> Result<Vec<(f64, ConfigWavefunction)>> {
    params.validate()?;
    let nx = grid.nx();
    if count == 0 || count > nx {
        return Err(Error::validation(format!(
            "eigenstate count must be in 1..={nx}"
        )));
    }
    let lx = grid.lengths().0;
    let x_axis = grid.x_axis();
    let pot = spec.eval(&x_axis, lx, t)?;
    let v_sigma = if smoothing_sigma > 0.0 {
        gaussian_smooth_real(&pot.v, lx, smoothing_sigma)
    } else {
        pot.v
    };

    // Dense kinetic matrix via the spectral second derivative of unit
    // vectors: column j = -hbar^2/(2m) d^2/dx^2 e_j.
    let fft = Fft1d::new(nx);
    let kappa2: Vec<f64> = fft_wavenumbers(nx, lx).iter().map(|&s| s * s).collect();
    let coef = params.hbar * params.hbar / (2.0 * params.mass);
    let mut h = DMatrix::<f64>::zeros(nx, nx);
    let mut col = vec![C64::default(); nx];
    for j in 0..nx {
        col.fill(C64::default());
        col[j] = C64::new(1.0, 0.0);
        fft.forward(&mut col);
        for (c, &k2) in col.iter_mut().zip(kappa2.iter()) {
            *c *= coef * k2;
        }
        fft.inverse(&mut col);
        for i in 0..nx {
            h[(i, j)] = col[i].re;
        }
    }
    for i in 0..nx {
        h[(i, i)] += v_sigma[i];
    }
    // enforce exact symmetry before factorization
    let ht = h.transpose();
    let h = (&h + &ht) * 0.5;

    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..nx).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });

    let dx = grid.dx();
    let mut out = Vec::with_capacity(count);
    for &idx in order.iter().take(count) {
        let col = eig.eigenvectors.column(idx);
        // unit L2(dx) norm with the dominant component real positive
        let mut peak = 0.0f64;
        let mut sign = 1.0f64;
        for &v in col.iter() {
            if v.abs() > peak {
                peak = v.abs();
                sign = v.signum();
            }
        }
        let scale = sign / dx.sqrt();
        let values = ndarray::Array1::from_iter(col.iter().map(|&v| C64::new(v * scale, 0.0)));
        out.push((
            eig.eigenvalues[idx],
            ConfigWavefunction {
                nx,
                x_min: grid.x_min(),
                x_max: grid.x_max(),
                values,
                time: t,
            },
        ));
    }
    Ok(out)
}
