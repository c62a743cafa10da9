//! Outer boundary condition families for the chemical potential and the velocity.

use crate::error::{Error, Result};

/// Condition on ∂Ω for μ⁻.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MuOuter {
    /// n·∇μ⁻ = a₄ on all of ∂Ω.
    Neumann,
    /// μ⁻ = a₄ on all of ∂Ω.
    Dirichlet,
}

/// Condition on ∂Ω for (v⁻, p⁻); the whole boundary carries one family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VelocityOuter {
    /// B₁: v = g.
    Dirichlet,
    /// B₂: n·v = n·g and (I − n⊗n)(2D_s v n + α₂v) = (I − n⊗n)g.
    NavierSlip { alpha: f64 },
    /// B₃: (2D_s v − pI)n + α₃v = g.
    Robin { alpha: f64 },
}

impl VelocityOuter {
    pub fn alpha(&self) -> f64 {
        match *self {
            VelocityOuter::Dirichlet => 0.0,
            VelocityOuter::NavierSlip { alpha } | VelocityOuter::Robin { alpha } => alpha,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryConfig {
    pub mu_outer: MuOuter,
    pub v_outer: VelocityOuter,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            mu_outer: MuOuter::Neumann,
            v_outer: VelocityOuter::Dirichlet,
        }
    }
}

impl BoundaryConfig {
    pub fn new(mu_outer: MuOuter, v_outer: VelocityOuter) -> Self {
        Self { mu_outer, v_outer }
    }

    /// True when no part of ∂Ω carries the Robin condition (Γ₃ᵛ = ∅).
    pub fn gamma3_empty(&self) -> bool {
        !matches!(self.v_outer, VelocityOuter::Robin { .. })
    }

    /// Friction constants must be finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        let a = self.v_outer.alpha();
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "friction constant must be finite and nonnegative, got {a}"
            )));
        }
        Ok(())
    }

    /// |Γ₁ᵛ| + α₂|Γ₂ᵛ| + α₃|Γ₃ᵛ| > 0.
    pub fn check_coercive(&self) -> Result<()> {
        self.validate()?;
        match self.v_outer {
            VelocityOuter::Dirichlet => Ok(()),
            VelocityOuter::NavierSlip { alpha } if alpha > 0.0 => Ok(()),
            VelocityOuter::Robin { alpha } if alpha > 0.0 => Ok(()),
            VelocityOuter::NavierSlip { .. } => Err(Error::CoercivityViolated(
                "Navier slip with zero friction admits rigid rotations".into(),
            )),
            VelocityOuter::Robin { .. } => Err(Error::CoercivityViolated(
                "Robin condition with zero friction admits rigid motions".into(),
            )),
        }
    }
}
