use super::{EvolveSpec, ModifiedKramersStepper};
use crate::{DensityField, Ensemble, Error, PhysicalParams, PotentialSpec, Result, C64};

/// Evolution record of a mixed-wave ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleTrajectory {
    /// Ensemble snapshots at the stride schedule (initial and final included).
    pub snapshots: Vec<Ensemble>,
    /// Time stamp per step (including step zero).
    pub times: Vec<f64>,
    /// Trace before the common renormalization at each step.
    pub traces_before: Vec<f64>,
    /// Mixture density of the final ensemble.
    pub final_density: DensityField,
    pub warnings: Vec<String>,
}

/// Advances every member by the momentum-diffusion wave flow; after each
/// step the whole ensemble is rescaled by one common positive factor so the
/// trace `sum w_k ||phi_k||^2` is exactly one. Member phases are untouched
/// by the rescaling.
pub fn evolve_ensemble(
    ens: &Ensemble,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    ev: &EvolveSpec,
) -> Result<EnsembleTrajectory> {
    ev.validate()?;
    let mut current = ens.clone();
    let tr = current.trace();
    if (tr - 1.0).abs() > 1e-8 {
        return Err(Error::validation(format!(
            "ensemble must enter trace-one (found {tr})"
        )));
    }
    let steps = ev.step_count();
    let grid = current.members[0].field.grid.clone();
    let mut snapshots = vec![current.clone()];
    let mut times = vec![current.members[0].field.time];
    let mut traces_before = vec![tr];
    let mut warnings = Vec::new();

    if steps > 0 {
        let mut stepper = ModifiedKramersStepper::new(&grid, params, spec, ev.dt, ev.scheme)?;
        warnings.extend(stepper.warnings().iter().cloned());
        for step in 1..=steps {
            for m in current.members.iter_mut() {
                stepper.step(&mut m.field)?;
            }
            let tr = current.trace();
            traces_before.push(tr);
            if tr <= 0.0 || !tr.is_finite() {
                return Err(Error::numerical(
                    "ensemble evolution",
                    format!("trace collapsed to {tr}"),
                ));
            }
            let c = C64::new(1.0 / tr.sqrt(), 0.0);
            for m in current.members.iter_mut() {
                m.field = m.field.scaled(c);
            }
            times.push(current.members[0].field.time);
            if step % ev.snapshot_stride == 0 || step == steps {
                snapshots.push(current.clone());
            }
        }
    }

    let final_density = current.mixed_density();
    Ok(EnsembleTrajectory {
        snapshots,
        times,
        traces_before,
        final_density,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::evolve;
    use crate::field::EnsembleMember;
    use crate::transforms::lift_to_phase_space;
    use crate::{ConfigWavefunction, PhaseGrid};
    use approx::assert_relative_eq;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(64, 64, (-12.0, 12.0), (-12.0, 12.0)).unwrap()
    }

    fn lifted(g: &PhaseGrid, params: &PhysicalParams, x0: f64) -> crate::WaveField {
        let psi = ConfigWavefunction::gaussian_packet(g, x0, 0.0, 1.0, 1.0, 0.0).unwrap();
        lift_to_phase_space(&psi, params, g).unwrap()
    }

    #[test]
    fn trace_is_one_after_every_step() {
        let g = grid();
        let params = PhysicalParams::default().with_gamma(2.0);
        let spec = PotentialSpec::harmonic(1.0);
        let f1 = lifted(&g, &params, 1.0);
        let f2 = lifted(&g, &params, -1.0);
        let ens = Ensemble::new(vec![
            EnsembleMember {
                weight: 0.5,
                field: f1,
            },
            EnsembleMember {
                weight: 0.5,
                field: f2,
            },
        ])
        .unwrap();
        let mut ens = ens;
        ens.normalize_trace().unwrap();
        let ev = EvolveSpec::new(1e-2, 0.2).with_stride(5);
        let traj = evolve_ensemble(&ens, &params, &spec, &ev).unwrap();
        for snap in &traj.snapshots {
            assert_relative_eq!(snap.trace(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_member_matches_plain_evolution_up_to_positive_scale() {
        let g = grid();
        let params = PhysicalParams::default().with_gamma(3.0);
        let spec = PotentialSpec::harmonic(1.0);
        let f = lifted(&g, &params, 0.5);
        let mut ens = Ensemble::new(vec![EnsembleMember {
            weight: 1.0,
            field: f.clone(),
        }])
        .unwrap();
        ens.normalize_trace().unwrap();

        let ev = EvolveSpec::new(1e-2, 0.3);
        let etraj = evolve_ensemble(&ens, &params, &spec, &ev).unwrap();
        let wtraj = evolve(&f.normalized().unwrap(), &params, &spec, &ev, None).unwrap();

        let a = &etraj.snapshots.last().unwrap().members[0].field;
        let b = wtraj.last();
        // a = b / ||b||: same direction, positive real scale.
        let ip = a.inner(b).unwrap();
        let cosang = ip.norm() / (a.l2_norm() * b.l2_norm());
        assert_relative_eq!(cosang, 1.0, epsilon = 1e-12);
        assert!(ip.re > 0.0 && ip.im.abs() <= 1e-12 * ip.re);
    }

    #[test]
    fn mixture_density_of_orthogonal_pair_is_average() {
        let g = grid();
        let params = PhysicalParams::default();
        let f1 = lifted(&g, &params, 2.0);
        // Orthogonalize the second member against the first.
        let f2_raw = lifted(&g, &params, -2.0);
        let ip = f1.inner(&f2_raw).unwrap();
        let f2 = crate::WaveField {
            grid: g.clone(),
            values: &f2_raw.values - &f1.values.mapv(|v| v * ip),
            time: 0.0,
        }
        .normalized()
        .unwrap();
        let mut ens = Ensemble::new(vec![
            EnsembleMember {
                weight: 0.5,
                field: f1.clone(),
            },
            EnsembleMember {
                weight: 0.5,
                field: f2.clone(),
            },
        ])
        .unwrap();
        ens.normalize_trace().unwrap();
        let mix = ens.mixed_density();
        for ((i, j), v) in mix.values.indexed_iter() {
            let want =
                0.5 * f1.values[[i, j]].norm_sqr() + 0.5 * f2.values[[i, j]].norm_sqr();
            assert!((v - want).abs() <= 1e-12 + 1e-12 * want);
        }
    }
}
