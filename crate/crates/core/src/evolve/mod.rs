//! Time integration for the dynamical equations: the wave-field flows
//! (momentum-diffusion transport and coordinate-and-momentum diffusion), the
//! classical references (Kramers/Fokker-Planck and Liouville), the
//! split-step Schrodinger solver on the coordinate axis, mixed-wave
//! ensembles, and the small dense density-operator flow.

mod classical;
mod density_matrix;
mod ensemble;
mod kramers;
mod schrodinger;
mod xp_diffusion;

pub use classical::{step_kramers_fp, step_liouville, ClassicalStepper};
pub use density_matrix::{
    build_wave_generator, hermitian_eigenvalues, step_density_matrix, SmallDensityMatrix,
};
pub use ensemble::{evolve_ensemble, EnsembleTrajectory};
pub use kramers::{step_modified_kramers, ModifiedKramersStepper};
pub use schrodinger::{
    evolve_schrodinger, schrodinger_eigenstates, step_schrodinger, SchrodingerStepper,
};
pub use xp_diffusion::{step_xp_diffusion, XpDiffusionStepper};

use crate::{transforms, Error, PhysicalParams, PotentialSpec, Result, WaveField};
use serde::{Deserialize, Serialize};

/// Splitting scheme for the wave-field steppers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Symmetric composition, second order in the step size.
    Strang,
    /// Sequential composition, first order; kept for comparisons.
    Lie,
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme::Strang
    }
}

/// Fixed-step evolution parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveSpec {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub snapshot_stride: usize,
    /// Rescale to unit norm after each step (off by default: dissipation is
    /// part of the model).
    pub renormalize: bool,
    /// Record the mean energy per step.
    pub track_energy: bool,
    /// Record the distance to the stationary family per step.
    pub track_residual: bool,
}

impl EvolveSpec {
    pub fn new(dt: f64, t_final: f64) -> Self {
        EvolveSpec {
            dt,
            t_final,
            scheme: Scheme::Strang,
            snapshot_stride: usize::MAX,
            renormalize: false,
            track_energy: false,
            track_residual: false,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride.max(1);
        self
    }

    pub fn with_residual_tracking(mut self) -> Self {
        self.track_residual = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::validation("dt must be finite and > 0"));
        }
        if !self.t_final.is_finite() || self.t_final < 0.0 {
            return Err(Error::validation("t_final must be finite and >= 0"));
        }
        if self.t_final > 0.0 && self.dt > self.t_final * (1.0 + 1e-12) {
            return Err(Error::validation("dt must not exceed t_final"));
        }
        Ok(())
    }

    /// Number of fixed steps covering `t_final` (rounded to the nearest
    /// multiple of `dt`).
    pub fn step_count(&self) -> usize {
        if self.t_final == 0.0 {
            0
        } else {
            (self.t_final / self.dt).round().max(1.0) as usize
        }
    }
}

/// Per-step scalar diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub time: f64,
    pub l2_norm: f64,
    pub energy: Option<f64>,
    pub stationary_residual: Option<f64>,
}

/// Evolution record: snapshots per stride plus per-step diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<WaveField>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn initial(&self) -> &WaveField {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &WaveField {
        self.snapshots.last().expect("at least one snapshot")
    }
}

fn mean_energy(
    field: &WaveField,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    t: f64,
) -> Result<f64> {
    let grid = &field.grid;
    let pot = spec.eval(&grid.x_axis(), grid.lengths().0, t)?;
    let e0 = params.effective_rest_energy();
    let inv_m = 1.0 / params.mass;
    let mut num = 0.0;
    let mut den = 0.0;
    for ((i, j), v) in field.values.indexed_iter() {
        let p = grid.p_at(j);
        let w = v.norm_sqr();
        num += w * (e0 + 0.5 * p * p * inv_m + pot.v[i]);
        den += w;
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

fn make_diagnostics(
    field: &WaveField,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    ev: &EvolveSpec,
) -> Result<StepDiagnostics> {
    let energy = if ev.track_energy {
        Some(mean_energy(field, params, spec, field.time)?)
    } else {
        None
    };
    let stationary_residual = if ev.track_residual {
        Some(transforms::project_stationary(field, params)?.residual)
    } else {
        None
    };
    Ok(StepDiagnostics {
        time: field.time,
        l2_norm: field.l2_norm(),
        energy,
        stationary_residual,
    })
}

/// Fixed-step driver around [`ModifiedKramersStepper`]. Snapshots cover the
/// initial and final states; the observer (when given) sees every step.
pub fn evolve(
    field: &WaveField,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    ev: &EvolveSpec,
    mut observer: Option<&mut dyn FnMut(usize, &WaveField)>,
) -> Result<Trajectory> {
    ev.validate()?;
    params.validate()?;
    let steps = ev.step_count();
    let mut current = field.clone();
    let mut snapshots = vec![current.clone()];
    let mut diagnostics = vec![make_diagnostics(&current, params, spec, ev)?];
    let mut warnings = Vec::new();

    if steps == 0 {
        return Ok(Trajectory {
            snapshots,
            diagnostics,
            warnings,
        });
    }

    let mut stepper = ModifiedKramersStepper::new(&field.grid, params, spec, ev.dt, ev.scheme)?;
    warnings.extend(stepper.warnings().iter().cloned());
    let decay = field.p_boundary_level();
    if decay > 1e-12 {
        warnings.push(format!(
            "initial field decays to only {decay:.3e} (relative) at the momentum boundary; periodic wrap may contaminate the dissipative update"
        ));
    }

    for step in 1..=steps {
        stepper.step(&mut current).map_err(|e| match e {
            Error::Numerical { context, detail } => Error::Numerical {
                context,
                detail: format!("{detail} at t = {:.6}", (step as f64) * ev.dt),
            },
            other => other,
        })?;
        if ev.renormalize {
            current = current.normalized()?;
        }
        diagnostics.push(make_diagnostics(&current, params, spec, ev)?);
        if let Some(obs) = observer.as_mut() {
            obs(step, &current);
        }
        if step % ev.snapshot_stride == 0 || step == steps {
            snapshots.push(current.clone());
        }
    }

    Ok(Trajectory {
        snapshots,
        diagnostics,
        warnings,
    })
}
