//! Physical parameters, pressure laws, and stepper configuration.

use lowmach_core::error::{Error, Result};

/// Barotropic pressure law, normalized so the sound speed at the reference
/// density is 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PressureLaw {
    /// P(rho) = rho. The pressure correction k equals J: k(z) = z/(1+z).
    Isothermal,
    /// P(rho) = rho^gamma / gamma, so P'(1) = 1 for every gamma.
    Gamma { gamma: f64 },
}

impl PressureLaw {
    pub fn validate(&self) -> Result<()> {
        if let PressureLaw::Gamma { gamma } = self {
            if !gamma.is_finite() || *gamma <= 0.0 {
                return Err(Error::validation("gamma", "must be positive and finite"));
            }
        }
        Ok(())
    }

    /// The nonlinear pressure correction k(z) = P'(1) - P'(1+z)/(1+z),
    /// evaluated in a cancellation-free form. k(0) = 0 and k is smooth on
    /// z > -1.
    pub fn k(&self, z: f64) -> f64 {
        match self {
            PressureLaw::Isothermal => z / (1.0 + z),
            // 1 - (1+z)^(gamma-2), computed via expm1/ln_1p so that the
            // leading (gamma-2) z term survives at small amplitude.
            PressureLaw::Gamma { gamma } => -f64::exp_m1((gamma - 2.0) * f64::ln_1p(z)),
        }
    }
}

/// The smooth coefficient functions of the perturbation-form systems; all
/// vanish at 0. Viscosity variations are identically zero for the
/// constant-coefficient stepper but kept so states carry the full contract.
#[derive(Clone, Copy, Debug)]
pub struct CoefficientFunctions {
    pub pressure: PressureLaw,
}

impl CoefficientFunctions {
    /// J(z) = z/(1+z), the relative density excess.
    pub fn j(z: f64) -> f64 {
        z / (1.0 + z)
    }

    pub fn k(&self, z: f64) -> f64 {
        self.pressure.k(z)
    }

    /// Shear viscosity variation mu(1+z) - mu(1); constant coefficients.
    pub fn mu_var(_z: f64) -> f64 {
        0.0
    }

    /// Second viscosity variation lambda(1+z) - lambda(1); constant.
    pub fn lambda_var(_z: f64) -> f64 {
        0.0
    }
}

/// Mach number, viscosities, optional heat conduction, and the pressure law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub eps: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Heat conduction; required by the heat-conducting system only.
    pub kappa: Option<f64>,
    pub pressure: PressureLaw,
}

impl PhysicalParams {
    pub fn barotropic(eps: f64, lambda: f64, mu: f64, pressure: PressureLaw) -> Result<Self> {
        let p = PhysicalParams { eps, lambda, mu, kappa: None, pressure };
        p.validate()?;
        Ok(p)
    }

    pub fn heat_conducting(eps: f64, lambda: f64, mu: f64, kappa: f64) -> Result<Self> {
        // The heat-conducting model is a perfect gas; its pressure
        // linearization enters through nabla(a + theta) directly.
        let p = PhysicalParams { eps, lambda, mu, kappa: Some(kappa), pressure: PressureLaw::Isothermal };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::validation("eps", "Mach number must be positive and finite"));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::validation("mu", "shear viscosity must be positive"));
        }
        if !self.lambda.is_finite() || !(self.nu() > 0.0) {
            return Err(Error::validation("lambda", "need lambda + 2 mu > 0"));
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::validation("kappa", "heat conduction must be positive"));
            }
        }
        self.pressure.validate()
    }

    /// Total viscosity nu = lambda + 2 mu (the damping rate of the
    /// gradient-part velocity).
    pub fn nu(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// The acoustic scale eps * nu separating low and high frequencies.
    pub fn eps_tilde(&self) -> f64 {
        self.eps * self.nu()
    }

    pub fn mu_tilde(&self) -> f64 {
        self.mu / self.nu()
    }

    pub fn lambda_tilde(&self) -> f64 {
        self.lambda / self.nu()
    }

    pub fn kappa_tilde(&self) -> Result<f64> {
        let k = self.kappa.ok_or_else(|| {
            Error::validation("kappa", "heat conduction not set on these parameters")
        })?;
        Ok(k / self.nu())
    }

    pub fn coefficients(&self) -> CoefficientFunctions {
        CoefficientFunctions { pressure: self.pressure }
    }
}

/// Time-integration scheme order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Lawson-Euler: one nonlinearity evaluation, first order.
    Order1,
    /// Exponential midpoint with an Euler predictor, second order.
    Order2,
}

/// Dealiasing policy for nonlinear products. Exact 3/2 zero padding is the
/// only supported policy: every oracle tolerance in the test suite assumes
/// products are computed without aliasing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DealiasPolicy {
    #[default]
    Exact,
}

/// Two algebraically equal assemblies of the variable-coefficient viscous
/// correction; they must agree to fine tolerance on smooth states and the
/// cross-check test keeps both routes honest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ViscousAssembly {
    /// Coefficient J(z) = z/(1+z) evaluated directly.
    #[default]
    ViaJ,
    /// Coefficient 1 - 1/(1+z) evaluated as written.
    ViaReciprocal,
}

/// Step size, scheme, dealias policy, snapshot cadence, and the advective
/// Courant guard.
#[derive(Clone, Copy, Debug)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub dealias: DealiasPolicy,
    /// Record every k-th state when assembling trajectories (0 = only ends).
    pub snapshot_every: usize,
    /// Upper bound on dt * max|u| * max|xi|.
    pub courant_limit: f64,
    /// Drop all nonlinear terms; the step is the exact linear propagator.
    pub linear_only: bool,
    pub viscous: ViscousAssembly,
}

impl StepperConfig {
    pub fn new(dt: f64) -> Result<StepperConfig> {
        let cfg = StepperConfig {
            dt,
            scheme: Scheme::Order2,
            dealias: DealiasPolicy::Exact,
            snapshot_every: 1,
            courant_limit: 0.9,
            linear_only: false,
            viscous: ViscousAssembly::ViaJ,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> StepperConfig {
        self.scheme = scheme;
        self
    }

    pub fn with_snapshot_every(mut self, k: usize) -> StepperConfig {
        self.snapshot_every = k;
        self
    }

    pub fn with_courant_limit(mut self, limit: f64) -> StepperConfig {
        self.courant_limit = limit;
        self
    }

    pub fn with_linear_only(mut self, on: bool) -> StepperConfig {
        self.linear_only = on;
        self
    }

    pub fn with_viscous(mut self, route: ViscousAssembly) -> StepperConfig {
        self.viscous = route;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::validation("dt", "step size must be positive and finite"));
        }
        if !(self.courant_limit > 0.0) {
            return Err(Error::validation("courant_limit", "must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pressure_corrections_vanish_at_zero_and_match_small_amplitude_slope() {
        for law in [PressureLaw::Isothermal, PressureLaw::Gamma { gamma: 1.4 }] {
            assert_eq!(law.k(0.0), 0.0);
        }
        // k'(0) = 1 - (gamma - 2) - 1 ... direct: k(z) ~ (2 - gamma) z.
        let law = PressureLaw::Gamma { gamma: 1.4 };
        let z = 1e-9;
        let slope = law.k(z) / z;
        assert!((slope - 0.6).abs() < 1e-6, "slope {slope}");
        // Isothermal k coincides with J.
        let z = 0.3;
        assert!((PressureLaw::Isothermal.k(z) - CoefficientFunctions::j(z)).abs() < 1e-15);
        // gamma = 2 is the exactly linear pressure: no correction at all.
        assert_eq!(PressureLaw::Gamma { gamma: 2.0 }.k(0.37), 0.0);
    }

    #[test]
    fn derived_parameters_and_validation() {
        let p = PhysicalParams::barotropic(0.1, -0.5, 1.0, PressureLaw::Isothermal).unwrap();
        assert!((p.nu() - 1.5).abs() < 1e-15);
        assert!((p.eps_tilde() - 0.15).abs() < 1e-15);
        assert!((p.mu_tilde() - 1.0 / 1.5).abs() < 1e-15);
        assert!(p.kappa_tilde().is_err());

        assert!(PhysicalParams::barotropic(0.0, 0.0, 1.0, PressureLaw::Isothermal).is_err());
        assert!(PhysicalParams::barotropic(0.1, -3.0, 1.0, PressureLaw::Isothermal).is_err());
        assert!(PhysicalParams::heat_conducting(0.1, 0.0, 1.0, 0.0).is_err());
        let h = PhysicalParams::heat_conducting(0.1, 0.0, 1.0, 0.5).unwrap();
        assert!((h.kappa_tilde().unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn stepper_config_guards() {
        assert!(StepperConfig::new(0.0).is_err());
        let cfg = StepperConfig::new(0.01).unwrap().with_scheme(Scheme::Order1);
        assert_eq!(cfg.scheme, Scheme::Order1);
        assert_eq!(cfg.dealias, DealiasPolicy::Exact);
    }
}
