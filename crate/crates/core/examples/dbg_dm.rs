use ndarray::Array2;
use phasewave::evolve::{build_wave_generator, evolve, step_density_matrix, EvolveSpec, SmallDensityMatrix};
use phasewave::{C64, PhaseGrid, PhysicalParams, PotentialSpec, WaveField};

fn run(g: &PhaseGrid, params: &PhysicalParams, spec: &PotentialSpec, f0: &WaveField, dt: f64, steps: usize) -> f64 {
    let rho0 = SmallDensityMatrix::pure(f0).unwrap();
    let gen = build_wave_generator(g, params, spec, 0.0).unwrap();
    let mut rho = rho0;
    for _ in 0..steps {
        rho = step_density_matrix(&rho, &gen, dt).unwrap();
    }
    let ev = EvolveSpec::new(dt, dt * steps as f64);
    let traj = evolve(f0, params, spec, &ev, None).unwrap();
    let phi = traj.last().normalized().unwrap();
    let flat: Vec<C64> = phi.values.iter().copied().collect();
    let n = flat.len();
    let pure = Array2::from_shape_fn((n, n), |(r, c)| flat[r] * flat[c].conj());
    let mut d2 = 0.0;
    for (a, b) in rho.matrix.iter().zip(pure.iter()) {
        d2 += (a - b).norm_sqr();
    }
    (d2).sqrt() * g.cell()
}

fn main() {
    let g = PhaseGrid::new(16, 16, (-8.0, 8.0), (-8.0, 8.0)).unwrap();
    let params = PhysicalParams::default().with_gamma(1.0);
    let spec = PotentialSpec::harmonic(1.0);
    let f0 = WaveField::from_fn(&g, 0.0, |x, p| {
        C64::new((-(x * x + p * p) / 4.0).exp(), 0.1 * (-(x * x + p * p) / 5.0).exp())
    })
    .normalized()
    .unwrap();
    for (dt, steps) in [(2e-4, 100), (2e-5, 100), (2e-6, 100)] {
        let d = run(&g, &params, &spec, &f0, dt, steps);
        println!("dt={dt:.1e} steps={steps} T={:.1e}: frob dist = {d:.3e}", dt * steps as f64);
    }
    let s2 = 2.55f64;
    let f1 = WaveField::from_fn(&g, 0.0, |x, p| {
        C64::new((-(x * x + p * p) / (2.0 * s2)).exp(), 0.0)
    })
    .normalized()
    .unwrap();
    for (dt, steps) in [(2e-4, 100), (2e-5, 100)] {
        let d = run(&g, &params, &spec, &f1, dt, steps);
        println!("balanced: dt={dt:.1e} steps={steps}: frob dist = {d:.3e}");
    }
}
