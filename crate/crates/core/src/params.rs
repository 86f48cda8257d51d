use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Physical constants of the model in nondimensional units.
///
/// Defaults put `hbar = 1`, `mass = 1`; all remaining coefficients are free
/// inputs of the nondimensionalized equations. `kT` sets the momentum
/// diffusion scale, `gamma` the friction per unit mass, and `a`, `b` the
/// coordinate/momentum diffusion amplitudes of the two-sided diffusion
/// model. `rest_energy` contributes a uniform phase rotation only when
/// `include_rest_phase` is set; it is dynamically inert otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    pub kt: f64,
    pub gamma: f64,
    pub rest_energy: f64,
    pub a: f64,
    pub b: f64,
    pub include_rest_phase: bool,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            hbar: 1.0,
            mass: 1.0,
            kt: 1.0,
            gamma: 0.0,
            rest_energy: 0.0,
            a: 0.0,
            b: 0.0,
            include_rest_phase: false,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("kt", self.kt),
            ("gamma", self.gamma),
            ("rest_energy", self.rest_energy),
            ("a", self.a),
            ("b", self.b),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::validation(format!("{name} must be finite")));
            }
        }
        if self.hbar <= 0.0 {
            return Err(Error::validation("hbar must be > 0"));
        }
        if self.mass <= 0.0 {
            return Err(Error::validation("mass must be > 0"));
        }
        if self.kt < 0.0 {
            return Err(Error::validation("kt must be >= 0"));
        }
        if self.gamma < 0.0 {
            return Err(Error::validation("gamma must be >= 0"));
        }
        if self.rest_energy < 0.0 {
            return Err(Error::validation("rest_energy must be >= 0"));
        }
        if self.a < 0.0 || self.b < 0.0 {
            return Err(Error::validation("a and b must be >= 0"));
        }
        Ok(())
    }

    /// Momentum variance `kT * m` of the per-mode stationary Gaussians.
    pub fn kt_mass(&self) -> f64 {
        self.kt * self.mass
    }

    /// Rest energy actually entering the phase rotation.
    pub fn effective_rest_energy(&self) -> f64 {
        if self.include_rest_phase {
            self.rest_energy
        } else {
            0.0
        }
    }

    /// Both diffusion amplitudes of the two-sided model must be positive.
    pub fn require_xp_diffusion(&self) -> Result<()> {
        if self.a <= 0.0 || self.b <= 0.0 {
            return Err(Error::validation(
                "the coordinate-and-momentum diffusion model requires a > 0 and b > 0",
            ));
        }
        Ok(())
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_kt(mut self, kt: f64) -> Self {
        self.kt = kt;
        self
    }

    pub fn with_ab(mut self, a: f64, b: f64) -> Self {
        self.a = a;
        self.b = b;
        self
    }
}
