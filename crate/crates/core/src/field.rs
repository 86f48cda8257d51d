use crate::{C64, Error, PhaseGrid, Result};
use ndarray::{Array1, Array2};

/// Complex wave field sample on a [`PhaseGrid`] at a time stamp. The model's
/// fundamental state; `|values|^2` is proportional to the phase-space
/// probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: PhaseGrid,
    pub values: Array2<C64>,
    pub time: f64,
}

impl WaveField {
    pub fn new(grid: PhaseGrid, values: Array2<C64>, time: f64) -> Result<Self> {
        if values.dim() != (grid.nx(), grid.np()) {
            return Err(Error::validation(format!(
                "field shape {:?} does not match grid ({}, {})",
                values.dim(),
                grid.nx(),
                grid.np()
            )));
        }
        let f = WaveField { grid, values, time };
        if !f.is_finite() {
            return Err(Error::validation("wave field entries must be finite"));
        }
        Ok(f)
    }

    /// Builds a field from a closure of `(x, p)`.
    pub fn from_fn(grid: &PhaseGrid, time: f64, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = Array2::from_shape_fn((grid.nx(), grid.np()), |(i, j)| {
            f(grid.x_at(i), grid.p_at(j))
        });
        WaveField {
            grid: grid.clone(),
            values,
            time,
        }
    }

    pub fn zeros(grid: &PhaseGrid, time: f64) -> Self {
        WaveField {
            grid: grid.clone(),
            values: Array2::zeros((grid.nx(), grid.np())),
            time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `sqrt( sum |values|^2 dx dp )`, summed in a fixed order.
    pub fn l2_norm(&self) -> f64 {
        (self.norm_sqr_unweighted() * self.grid.cell()).sqrt()
    }

    fn norm_sqr_unweighted(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `<self, other> = sum conj(self) * other dx dp`, fixed order.
    pub fn inner(&self, other: &WaveField) -> Result<C64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("inner product of fields on different grids".into()));
        }
        let s: C64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell())
    }

    pub fn scaled(&self, c: C64) -> WaveField {
        WaveField {
            grid: self.grid.clone(),
            values: self.values.mapv(|v| v * c),
            time: self.time,
        }
    }

    /// Rescales to unit L2 norm.
    pub fn normalized(&self) -> Result<WaveField> {
        let n = self.l2_norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::validation("cannot normalize a zero or non-finite field"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// Pointwise `|values|^2` as a density sample.
    pub fn density(&self) -> DensityField {
        DensityField {
            grid: self.grid.clone(),
            values: self.values.mapv(|c| c.norm_sqr()),
            time: self.time,
        }
    }

    /// Largest modulus on the two momentum boundary rows, relative to the
    /// global maximum. Fields should keep this below ~1e-12 for the periodic
    /// momentum topology to be harmless.
    pub fn p_boundary_level(&self) -> f64 {
        let np = self.grid.np();
        let mut edge = 0.0f64;
        let mut peak = 0.0f64;
        for row in self.values.rows() {
            edge = edge.max(row[0].norm()).max(row[np - 1].norm());
            for c in row {
                peak = peak.max(c.norm());
            }
        }
        if peak > 0.0 {
            edge / peak
        } else {
            0.0
        }
    }

    pub fn metrics(&self) -> Result<FieldMetrics> {
        if !self.is_finite() {
            return Err(Error::validation("field metrics require finite entries"));
        }
        let density = self.density();
        let l2 = (density.values.iter().sum::<f64>() * self.grid.cell()).sqrt();
        let mass = density.mass();
        let mut cx = 0.0;
        let mut cp = 0.0;
        if mass > 0.0 {
            for ((i, j), d) in density.values.indexed_iter() {
                cx += self.grid.x_at(i) * d;
                cp += self.grid.p_at(j) * d;
            }
            let w = self.grid.cell() / mass;
            cx *= w;
            cp *= w;
        }
        Ok(FieldMetrics {
            l2_norm: l2,
            density,
            centroid: (cx, cp),
        })
    }
}

/// Metrics bundle returned by [`WaveField::metrics`].
#[derive(Debug, Clone)]
pub struct FieldMetrics {
    pub l2_norm: f64,
    pub density: DensityField,
    /// Density-weighted means `(x_bar, p_bar)`.
    pub centroid: (f64, f64),
}

/// Nonnegative real field for the classical reference equations. Values may
/// dip slightly below zero from spectral transport; solvers clamp reporting,
/// never the state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: PhaseGrid,
    pub values: Array2<f64>,
    pub time: f64,
}

impl DensityField {
    pub fn new(grid: PhaseGrid, values: Array2<f64>, time: f64) -> Result<Self> {
        if values.dim() != (grid.nx(), grid.np()) {
            return Err(Error::validation(format!(
                "density shape {:?} does not match grid ({}, {})",
                values.dim(),
                grid.nx(),
                grid.np()
            )));
        }
        let f = DensityField { grid, values, time };
        if !f.values.iter().all(|v| v.is_finite()) {
            return Err(Error::validation("density entries must be finite"));
        }
        Ok(f)
    }

    pub fn from_fn(grid: &PhaseGrid, time: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.nx(), grid.np()), |(i, j)| {
            f(grid.x_at(i), grid.p_at(j))
        });
        DensityField {
            grid: grid.clone(),
            values,
            time,
        }
    }

    /// `sum values dx dp`, fixed order.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Rescales to unit mass.
    pub fn normalized(&self) -> Result<DensityField> {
        let m = self.mass();
        if m <= 0.0 || !m.is_finite() {
            return Err(Error::validation("cannot normalize a density with nonpositive mass"));
        }
        let inv = 1.0 / m;
        Ok(DensityField {
            grid: self.grid.clone(),
            values: self.values.mapv(|v| v * inv),
            time: self.time,
        })
    }

    /// `sum |self - other| dx dp`.
    pub fn l1_distance(&self, other: &DensityField) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("L1 distance of densities on different grids".into()));
        }
        let s: f64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(s * self.grid.cell())
    }
}

/// Complex wave function on the coordinate axis of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigWavefunction {
    pub nx: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub values: Array1<C64>,
    pub time: f64,
}

impl ConfigWavefunction {
    pub fn new(nx: usize, x_min: f64, x_max: f64, values: Array1<C64>, time: f64) -> Result<Self> {
        if values.len() != nx {
            return Err(Error::validation(format!(
                "wave function has {} samples, expected {nx}",
                values.len()
            )));
        }
        if x_max <= x_min {
            return Err(Error::validation("x extent must be ordered"));
        }
        let w = ConfigWavefunction {
            nx,
            x_min,
            x_max,
            values,
            time,
        };
        if !w.values.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::validation("wave function entries must be finite"));
        }
        Ok(w)
    }

    /// Builds a wave function on the x-axis of `grid` from a closure.
    pub fn from_fn(grid: &PhaseGrid, time: f64, f: impl Fn(f64) -> C64) -> Self {
        ConfigWavefunction {
            nx: grid.nx(),
            x_min: grid.x_min(),
            x_max: grid.x_max(),
            values: Array1::from_iter((0..grid.nx()).map(|i| f(grid.x_at(i)))),
            time,
        }
    }

    /// Normalized Gaussian packet `exp(-(x-x0)^2/(4 sigma^2) + i p0 x / hbar)`
    /// with position spread `sigma` (standard deviation of `|psi|^2`).
    pub fn gaussian_packet(
        grid: &PhaseGrid,
        x0: f64,
        p0: f64,
        sigma: f64,
        hbar: f64,
        time: f64,
    ) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::validation("gaussian packet needs sigma > 0"));
        }
        let psi = Self::from_fn(grid, time, |x| {
            let u = x - x0;
            C64::from_polar((-u * u / (4.0 * sigma * sigma)).exp(), p0 * x / hbar)
        });
        psi.normalized()
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn x_axis(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x_at(i)).collect()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dx()).sqrt()
    }

    pub fn inner(&self, other: &ConfigWavefunction) -> Result<C64> {
        if self.nx != other.nx || self.x_min != other.x_min || self.x_max != other.x_max {
            return Err(Error::GridMismatch("wave functions on different x-axes".into()));
        }
        let s: C64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.dx())
    }

    pub fn scaled(&self, c: C64) -> ConfigWavefunction {
        ConfigWavefunction {
            nx: self.nx,
            x_min: self.x_min,
            x_max: self.x_max,
            values: self.values.mapv(|v| v * c),
            time: self.time,
        }
    }

    pub fn normalized(&self) -> Result<ConfigWavefunction> {
        let n = self.l2_norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::validation("cannot normalize a zero wave function"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// True if the x-axis matches the grid's.
    pub fn matches_grid(&self, grid: &PhaseGrid) -> bool {
        self.nx == grid.nx() && self.x_min == grid.x_min() && self.x_max == grid.x_max()
    }

    /// Phase-aligned L2 distance `min_theta || self - e^{i theta} other ||`.
    pub fn phase_aligned_distance(&self, other: &ConfigWavefunction) -> Result<f64> {
        let ip = self.inner(other)?;
        let a2 = self.l2_norm().powi(2);
        let b2 = other.l2_norm().powi(2);
        Ok((a2 + b2 - 2.0 * ip.norm()).max(0.0).sqrt())
    }
}

/// Weighted member of a mixed-wave ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub weight: f64,
    pub field: WaveField,
}

/// Mixed waves: a finite family of weighted wave fields sharing one grid and
/// time stamp, kept at unit trace `sum w_k ||phi_k||^2 = 1`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub members: Vec<EnsembleMember>,
}

impl Ensemble {
    pub fn new(members: Vec<EnsembleMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::validation("ensemble must have at least one member"));
        }
        let g0 = members[0].field.grid.clone();
        let t0 = members[0].field.time;
        for m in &members {
            if m.weight <= 0.0 || !m.weight.is_finite() {
                return Err(Error::validation("ensemble weights must be positive and finite"));
            }
            if !m.field.grid.same_as(&g0) {
                return Err(Error::GridMismatch("ensemble members must share one grid".into()));
            }
            if m.field.time != t0 {
                return Err(Error::validation("ensemble members must share one time stamp"));
            }
        }
        Ok(Ensemble { members })
    }

    /// `sum w_k ||phi_k||^2`.
    pub fn trace(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.weight * m.field.l2_norm().powi(2))
            .sum()
    }

    /// Rescales every member field by one common positive factor so the
    /// trace is exactly one.
    pub fn normalize_trace(&mut self) -> Result<f64> {
        let tr = self.trace();
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::numerical("ensemble trace", format!("trace = {tr}")));
        }
        let c = C64::new(1.0 / tr.sqrt(), 0.0);
        for m in &mut self.members {
            m.field = m.field.scaled(c);
        }
        Ok(tr)
    }

    /// Mixture density `sum w_k |phi_k|^2 / trace`.
    pub fn mixed_density(&self) -> DensityField {
        let g = &self.members[0].field.grid;
        let mut values = Array2::<f64>::zeros((g.nx(), g.np()));
        for m in &self.members {
            values.zip_mut_with(&m.field.values, |acc, c| *acc += m.weight * c.norm_sqr());
        }
        let tr = self.trace();
        if tr > 0.0 {
            values.mapv_inplace(|v| v / tr);
        }
        DensityField {
            grid: g.clone(),
            values,
            time: self.members[0].field.time,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(256, 256, (-20.0, 20.0), (-20.0, 20.0)).unwrap()
    }

    #[test]
    fn constant_field_norm_is_domain_volume() {
        let g = grid();
        let f = WaveField::from_fn(&g, 0.0, |_, _| C64::new(1.0, 0.0));
        assert_relative_eq!(f.l2_norm().powi(2), 1600.0, max_relative = 1e-12);
    }

    #[test]
    fn single_cell_mass() {
        let g = grid();
        let mut f = WaveField::zeros(&g, 0.0);
        f.values[[3, 7]] = C64::new(0.6, 0.8); // modulus 1
        assert_relative_eq!(f.l2_norm().powi(2), g.cell(), max_relative = 1e-12);
    }

    #[test]
    fn gaussian_centroid_at_origin() {
        let g = grid();
        let f = WaveField::from_fn(&g, 0.0, |x, p| {
            C64::new((-(x * x + p * p) / 2.0).exp(), 0.0)
        })
        .normalized()
        .unwrap();
        let m = f.metrics().unwrap();
        assert!(m.centroid.0.abs() < 1e-12);
        assert!(m.centroid.1.abs() < 1e-12);
    }

    #[test]
    fn scalar_homogeneity_of_norm() {
        let g = PhaseGrid::new(16, 16, (-2.0, 2.0), (-3.0, 3.0)).unwrap();
        let f = WaveField::from_fn(&g, 0.0, |x, p| C64::new(x + 0.3, p - 0.1));
        let c = C64::new(-1.7, 2.2);
        assert_relative_eq!(
            f.scaled(c).l2_norm(),
            c.norm() * f.l2_norm(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn density_integrates_to_norm_squared() {
        let g = PhaseGrid::new(32, 32, (-5.0, 5.0), (-4.0, 4.0)).unwrap();
        let f = WaveField::from_fn(&g, 0.0, |x, p| C64::new((x * 0.3).sin(), (p * 0.2).cos()));
        let m = f.metrics().unwrap();
        assert_relative_eq!(m.density.mass(), m.l2_norm.powi(2), max_relative = 1e-12);
    }

    #[test]
    fn ensemble_trace_normalization() {
        let g = PhaseGrid::new(16, 16, (-2.0, 2.0), (-2.0, 2.0)).unwrap();
        let f1 = WaveField::from_fn(&g, 0.0, |x, p| C64::new(x, p));
        let f2 = WaveField::from_fn(&g, 0.0, |x, p| C64::new(p, -x));
        let mut ens = Ensemble::new(vec![
            EnsembleMember { weight: 0.25, field: f1 },
            EnsembleMember { weight: 0.75, field: f2 },
        ])
        .unwrap();
        ens.normalize_trace().unwrap();
        assert_relative_eq!(ens.trace(), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn rejects_shape_mismatch() {
        let g = grid();
        let bad = Array2::<C64>::zeros((8, 8));
        assert!(WaveField::new(g, bad, 0.0).is_err());
    }
}
