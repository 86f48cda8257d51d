use crate::operators::{apply_momentum_diffusion, apply_transport_phase};
use crate::{C64, Error, PhaseGrid, PhysicalParams, PotentialSpec, Result, WaveField};
use ndarray::{Array1, Array2};

/// Dense Hermitian density operator on a tiny grid (`nx * np <= 4096`),
/// trace one under the quadrature weight `dx * dp`.
#[derive(Debug, Clone)]
pub struct SmallDensityMatrix {
    pub grid: PhaseGrid,
    pub matrix: Array2<C64>,
    pub time: f64,
}

/// Dense-algebra budget for the small density-operator flow.
pub const MAX_DENSE_DIM: usize = 4096;

impl SmallDensityMatrix {
    pub fn new(grid: PhaseGrid, matrix: Array2<C64>, time: f64) -> Result<Self> {
        let n = grid.nx() * grid.np();
        if n > MAX_DENSE_DIM {
            return Err(Error::validation(format!(
                "dense density operators are limited to {MAX_DENSE_DIM} grid points, got {n}"
            )));
        }
        if matrix.dim() != (n, n) {
            return Err(Error::validation(format!(
                "density matrix must be {n} x {n}, got {:?}",
                matrix.dim()
            )));
        }
        let rho = SmallDensityMatrix { grid, matrix, time };
        let herm = rho.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::validation(format!(
                "density matrix is not Hermitian (max |rho - rho^H| = {herm:.3e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::validation(format!(
                "density matrix must have unit trace, got {tr}"
            )));
        }
        Ok(rho)
    }

    /// Rank-one projector onto a (normalized) wave field.
    pub fn pure(field: &WaveField) -> Result<Self> {
        let f = field.normalized()?;
        let n = f.grid.nx() * f.grid.np();
        if n > MAX_DENSE_DIM {
            return Err(Error::validation(format!(
                "dense density operators are limited to {MAX_DENSE_DIM} grid points, got {n}"
            )));
        }
        let flat: Vec<C64> = f.values.iter().copied().collect();
        // Tr = cell * sum |phi_i|^2 = ||phi||^2 = 1 for the normalized field.
        let matrix = Array2::from_shape_fn((n, n), |(r, c)| flat[r] * flat[c].conj());
        SmallDensityMatrix::new(f.grid.clone(), matrix, f.time)
    }

    /// Trace under the quadrature weight.
    pub fn trace(&self) -> C64 {
        let mut tr = C64::default();
        for i in 0..self.matrix.nrows() {
            tr += self.matrix[[i, i]];
        }
        tr * self.grid.cell()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.matrix[[r, c]] - self.matrix[[c, r]].conj()).norm());
            }
        }
        worst
    }

    /// Diagonal of the kernel: the phase-space density `rho(x, p)`.
    pub fn diagonal_density(&self) -> Array2<f64> {
        let np = self.grid.np();
        Array2::from_shape_fn((self.grid.nx(), np), |(i, j)| {
            self.matrix[[i * np + j, i * np + j]].re
        })
    }

    /// Overlap `<phi| rho |phi>` for a unit-norm field (population of the
    /// direction `phi`).
    pub fn population(&self, field: &WaveField) -> Result<f64> {
        if !field.grid.same_as(&self.grid) {
            return Err(Error::GridMismatch("population on a different grid".into()));
        }
        let flat: Vec<C64> = field.values.iter().copied().collect();
        let n = flat.len();
        let mut acc = C64::default();
        for r in 0..n {
            let mut row = C64::default();
            for c in 0..n {
                row += self.matrix[[r, c]] * flat[c];
            }
            acc += flat[r].conj() * row;
        }
        // two quadrature weights: one from each contraction
        Ok((acc * self.grid.cell() * self.grid.cell()).re)
    }
}

/// Dense matrix of the wave-flow generator (transport-phase plus
/// `gamma` times momentum diffusion) on a tiny grid, built column by column
/// from the operator evaluations.
pub fn build_wave_generator(
    grid: &PhaseGrid,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    t: f64,
) -> Result<Array2<C64>> {
    let n = grid.nx() * grid.np();
    if n > MAX_DENSE_DIM {
        return Err(Error::validation(format!(
            "dense generators are limited to {MAX_DENSE_DIM} grid points, got {n}"
        )));
    }
    let np = grid.np();
    let mut gen = Array2::<C64>::zeros((n, n));
    for col in 0..n {
        let mut unit = WaveField::zeros(grid, t);
        unit.values[[col / np, col % np]] = C64::new(1.0, 0.0);
        let a = apply_transport_phase(&unit, params, spec, t)?;
        let rate = if params.gamma > 0.0 {
            let b = apply_momentum_diffusion(&unit, params)?;
            &a.values + &b.values.mapv(|v| v * params.gamma)
        } else {
            a.values
        };
        for (r, v) in rate.iter().enumerate() {
            gen[[r, col]] = *v;
        }
    }
    Ok(gen)
}

/// One explicit second-order (Heun) step of the trace-normalized flow
/// `drho/dt = D rho + rho D* - rho Tr(D rho + rho D*)`, followed by exact
/// re-Hermitization and trace renormalization.
pub fn step_density_matrix(
    rho: &SmallDensityMatrix,
    generator: &Array2<C64>,
    dt: f64,
) -> Result<SmallDensityMatrix> {
    let n = rho.matrix.nrows();
    if generator.dim() != (n, n) {
        return Err(Error::validation(format!(
            "generator must be {n} x {n}, got {:?}",
            generator.dim()
        )));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::validation("dt must be finite and > 0"));
    }
    let w = rho.grid.cell();
    let gen_h = generator.t().mapv(|v| v.conj());

    let flow = |m: &Array2<C64>| -> Array2<C64> {
        let drho = generator.dot(m) + m.dot(&gen_h);
        let mut tr = C64::default();
        for i in 0..n {
            tr += drho[[i, i]];
        }
        tr *= w;
        &drho - &m.mapv(|v| v * tr)
    };

    let k1 = flow(&rho.matrix);
    let mid = &rho.matrix + &k1.mapv(|v| v * dt);
    let k2 = flow(&mid);
    let mut next = &rho.matrix + &(&k1 + &k2).mapv(|v| v * (0.5 * dt));

    // re-symmetrize
    let next_h = next.t().mapv(|v| v.conj());
    next = (&next + &next_h).mapv(|v| v * 0.5);

    let mut tr = C64::default();
    for i in 0..n {
        tr += next[[i, i]];
    }
    let tr = (tr * w).re;
    if tr <= 0.0 || !tr.is_finite() {
        return Err(Error::numerical(
            "density-operator step",
            format!("trace collapsed to {tr} before renormalization (dt too large)"),
        ));
    }
    next.mapv_inplace(|v| v / tr);

    SmallDensityMatrix::new(rho.grid.clone(), next, rho.time + dt)
}

/// Eigenvalues of a Hermitian matrix by the cyclic Jacobi method, ascending.
/// Dense test/diagnostic helper for rank and spectrum drift measurements.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for r in 0..n {
            for c in (r + 1)..n {
                off += a[[r, c]].norm_sqr();
            }
        }
        if off.sqrt() < 1e-13 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                // Hermitian 2x2 rotation: phase out apq, then real Jacobi.
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let cs = C64::new(c, 0.0);
                let sn = phase * s;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = akp * cs - akq * sn.conj();
                    a[[k, q]] = akp * sn + akq * cs;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = apk * cs - aqk * sn;
                    a[[q, k]] = apk * sn.conj() + aqk * cs;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[[i, i]].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eigs
}

/// Largest eigenvalue magnitudes of a Hermitian matrix by deflated power
/// iteration; cheap rank diagnostic (`k` small).
pub fn dominant_eigenvalues(m: &Array2<C64>, k: usize, iters: usize) -> Vec<f64> {
    let n = m.nrows();
    let mut deflated = m.clone();
    let mut out = Vec::with_capacity(k);
    for seed in 0..k {
        let mut v = Array1::from_shape_fn(n, |i| {
            C64::new(((i + 7 * seed + 1) as f64).sin(), ((2 * i + seed) as f64).cos())
        });
        let mut lambda = 0.0;
        for _ in 0..iters {
            let w = deflated.dot(&v);
            let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-300 {
                break;
            }
            v = w.mapv(|c| c / norm);
            let mv = deflated.dot(&v);
            lambda = v
                .iter()
                .zip(mv.iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>();
        }
        out.push(lambda);
        let outer = Array2::from_shape_fn((n, n), |(r, c)| v[r] * v[c].conj() * lambda);
        deflated = &deflated - &outer;
    }
    out
}
