//! Physical constants, dimensional helpers, and the radial Poisson reduction.
//!
//! Everything downstream — profile ODEs, solution families, residual checks —
//! pulls its constants from here: the Poisson coupling α(N), unit-ball
//! volumes, the N-dimensional Green's function, and the radial potential
//! gradient Φ_r(t,r) = α(N) r^{1-N} ∫₀^r ρ(t,s) s^{N-1} ds evaluated by
//! composite Simpson quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign of the body force in the momentum equation.
///
/// `Attractive` is self-gravity (Poisson coupling with +α(N)ρ source);
/// `Repulsive` flips the force term, which flips the sign of the y⁴ term in
/// the profile ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceSign {
    Attractive,
    Repulsive,
}

impl ForceSign {
    /// +1 for attractive, -1 for repulsive; multiplies the gravity term.
    pub fn factor(self) -> f64 {
        match self {
            ForceSign::Attractive => 1.0,
            ForceSign::Repulsive => -1.0,
        }
    }
}

/// Physical and similarity constants defining one solution-family instance.
///
/// The self-similar ansatz is ρ(t,r) = y(r/(T-Ct))⁴/(T-Ct)⁴,
/// u(t,r) = -C r/(T-Ct); `alpha0` is the profile center value y(0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Spatial dimension N ≥ 1 (4 for the blowup families).
    pub dim: u32,
    /// Viscosity exponent θ in μ(ρ) = κρ^θ (5/4 for the blowup families).
    pub theta: f64,
    /// Viscosity coefficient κ > 0.
    pub kappa: f64,
    /// Similarity speed C ≠ 0; C > 0 blows up at t = T/C, C < 0 is global.
    pub big_c: f64,
    /// Similarity time T > 0.
    pub big_t: f64,
    /// Profile center value α = y(0) > 0.
    pub alpha0: f64,
    /// Sign of the body force.
    pub force_sign: ForceSign,
}

impl ModelParams {
    /// Parameters of the Theorem-1 family: N = 4, θ = 5/4, attractive force.
    pub fn theorem1(big_c: f64, big_t: f64, kappa: f64, alpha0: f64) -> Self {
        ModelParams {
            dim: 4,
            theta: 1.25,
            kappa,
            big_c,
            big_t,
            alpha0,
            force_sign: ForceSign::Attractive,
        }
    }

    /// Check the domain invariants: T > 0, κ > 0, α > 0, C ≠ 0, θ ≥ 0,
    /// N ≥ 1, all finite.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dimension must be ≥ 1".into()));
        }
        for (name, v) in [
            ("theta", self.theta),
            ("kappa", self.kappa),
            ("C", self.big_c),
            ("T", self.big_t),
            ("alpha", self.alpha0),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if self.theta < 0.0 {
            return Err(Error::Config(format!("theta must be ≥ 0, got {}", self.theta)));
        }
        if self.kappa <= 0.0 {
            return Err(Error::Config(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if self.big_c == 0.0 {
            return Err(Error::Config("C must be nonzero".into()));
        }
        if self.big_t <= 0.0 {
            return Err(Error::Config(format!("T must be > 0, got {}", self.big_t)));
        }
        if self.alpha0 <= 0.0 {
            return Err(Error::Config(format!(
                "alpha must be > 0 (alpha = 0 is the trivial vacuum), got {}",
                self.alpha0
            )));
        }
        Ok(())
    }

    /// Blowup time T/C for C > 0; `None` for the global (C < 0) families.
    pub fn blowup_time(&self) -> Option<f64> {
        (self.big_c > 0.0).then(|| self.big_t / self.big_c)
    }
}

/// γ-law pressure P(ρ) = K ρ^γ. `big_k = 0` encodes the pressureless case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    /// Coefficient K ≥ 0.
    pub big_k: f64,
    /// Adiabatic exponent γ ≥ 1.
    pub gamma: f64,
}

impl PressureLaw {
    /// The pressureless law K = 0 (γ kept at 1; it never enters).
    pub fn pressureless() -> Self {
        PressureLaw { big_k: 0.0, gamma: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.big_k >= 0.0 && self.big_k.is_finite()) {
            return Err(Error::Config(format!("K must be ≥ 0, got {}", self.big_k)));
        }
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be ≥ 1, got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn is_pressureless(&self) -> bool {
        self.big_k == 0.0
    }

    /// P(ρ) = K ρ^γ; nondecreasing in ρ for ρ ≥ 0.
    pub fn pressure(&self, rho: f64) -> f64 {
        self.big_k * rho.powf(self.gamma)
    }
}

/// Γ(k/2) for positive half-integer arguments, exact recursion from
/// Γ(1/2) = √π and Γ(1) = 1. Every Γ use in the model is half-integer
/// (arguments N/2 + 1), so no general-purpose Gamma is needed.
pub(crate) fn gamma_half(two_x: u32) -> f64 {
    assert!(two_x >= 1, "gamma_half argument must be ≥ 1/2");
    let mut value = if two_x % 2 == 1 { std::f64::consts::PI.sqrt() } else { 1.0 };
    // Γ(x) = (x-1)·Γ(x-1), climbing from 1/2 or 1 to two_x/2.
    let start = if two_x % 2 == 1 { 1 } else { 2 };
    let mut k = start;
    while k < two_x {
        value *= k as f64 / 2.0;
        k += 2;
    }
    value
}

/// π^{N/2}, with the integer part via `powi` so even dimensions stay exact.
fn pi_pow_half(dim: u32) -> f64 {
    let p = std::f64::consts::PI.powi((dim / 2) as i32);
    if dim % 2 == 1 {
        p * std::f64::consts::PI.sqrt()
    } else {
        p
    }
}

/// Volume of the unit ball in R^N: V(N) = π^{N/2}/Γ(N/2 + 1).
pub fn unit_ball_volume(dim: u32) -> Result<f64> {
    if dim == 0 {
        return Err(Error::Config("unit_ball_volume: dimension must be ≥ 1".into()));
    }
    Ok(pi_pow_half(dim) / gamma_half(dim + 2))
}

/// Poisson coupling constant α(N): 2 for N = 1, 2π for N = 2, and
/// N(N-2)·V(N) for N ≥ 3 (so α(4) = 4π²).
pub fn alpha_constant(dim: u32) -> Result<f64> {
    match dim {
        0 => Err(Error::Config("alpha_constant: dimension must be ≥ 1".into())),
        1 => Ok(2.0),
        2 => Ok(2.0 * std::f64::consts::PI),
        n => Ok((n * (n - 2)) as f64 * unit_ball_volume(n)?),
    }
}

/// Green's function of the N-dimensional Poisson equation at radius |x|:
/// |x| for N = 1, log|x| for N = 2, -1/|x|^{N-2} for N ≥ 3.
pub fn green_function(dim: u32, radius: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::Config("green_function: dimension must be ≥ 1".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::Domain(format!(
            "green_function is singular at the origin; radius must be > 0, got {radius}"
        )));
    }
    Ok(match dim {
        1 => radius,
        2 => radius.ln(),
        n => -radius.powi(-((n - 2) as i32)),
    })
}

/// Composite Simpson quadrature of `f` over [a, b] with an even number of
/// panels. Exact for cubics; error O(panels^{-4}) for smooth integrands.
/// Nodes are a + (b-a)·i/panels so power-of-two panel counts nest exactly.
pub fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> Result<f64> {
    if panels == 0 || panels % 2 != 0 {
        return Err(Error::Config(format!(
            "composite_simpson: panel count must be even and positive, got {panels}"
        )));
    }
    let n = panels as f64;
    let width = b - a;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let x = a + width * (i as f64 / n);
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(x);
    }
    let value = sum * width / (3.0 * n);
    if !value.is_finite() {
        return Err(Error::Numeric(format!(
            "composite_simpson: non-finite integrand sample on [{a}, {b}]"
        )));
    }
    Ok(value)
}

/// Radial potential gradient Φ_r(t,r) = α(N)/r^{N-1} · ∫₀^r ρ(t,s) s^{N-1} ds
/// by composite Simpson on `quad_points` panels. `density` is ρ(t, s).
///
/// The integrand s^{N-1}ρ vanishes at s = 0 for N ≥ 2 and is ρ itself for
/// N = 1, so no origin special-casing is needed. Nonnegative whenever ρ ≥ 0.
pub fn potential_gradient(
    density: impl Fn(f64, f64) -> f64,
    dim: u32,
    t: f64,
    r: f64,
    quad_points: usize,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "potential_gradient: radius must be > 0, got {r}"
        )));
    }
    let alpha = alpha_constant(dim)?;
    let p = (dim - 1) as i32;
    let integral = composite_simpson(
        |s| {
            let rho = density(t, s);
            rho * s.powi(p)
        },
        0.0,
        r,
        quad_points,
    )
    .map_err(|e| match e {
        Error::Numeric(_) => Error::Numeric(format!(
            "potential_gradient: non-finite density sample on [0, {r}] at t = {t}"
        )),
        other => other,
    })?;
    Ok(alpha * r.powi(-p) * integral)
}
