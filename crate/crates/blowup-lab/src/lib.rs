//! Analytical self-similar blowup solutions of the 4-dimensional pressureless
//! Navier–Stokes–Poisson equations with density-dependent viscosity
//! (μ(ρ) = κρ^{5/4}), and the numerical machinery to certify them.
//!
//! The central object is the separable family
//!
//! ```text
//! ρ(t,r) = y(r/(T-Ct))⁴ / (T-Ct)⁴,    u(t,r) = -C r/(T-Ct),
//! ```
//!
//! where the profile y solves the singular Emden-type equation
//! ÿ + (3/z)ẏ + (α(4)/(5Cκ)) y⁴ = 0 with y(0) = α > 0, ẏ(0) = 0. For C > 0
//! the density blows up at t = T/C; C < 0 gives a global solution, and a
//! sign-flipped y⁴ term gives the repulsive-force variant. The crate
//!
//! - integrates the profile and scale-factor ODEs with an adaptive
//!   Dormand–Prince 5(4) pair and C² dense output ([`ode`]),
//! - assembles the blowup/global/repulsive families, the Lane–Emden closed
//!   forms, the γ = 6/5 stationary star, and the pressured background
//!   families ([`families`]),
//! - certifies every identity numerically: continuity residual, the momentum
//!   identity through the conserved functional Q(z), the blowup rate, and
//!   hydrostatic balance ([`verify`]),
//! - exposes it all through a small CLI ([`cli`]).
//!
//! # Quickstart
//!
//! ```
//! use blowup_lab::families::build_blowup_solution;
//! use blowup_lab::model::ModelParams;
//!
//! let params = ModelParams::theorem1(1.0, 1.0, 1.0, 1.0); // C, T, κ, α
//! let sol = build_blowup_solution(&params, 1e-10).unwrap();
//! assert_eq!(sol.density(0.0, 0.0).unwrap(), 1.0); // y(0)⁴/T⁴
//! assert_eq!(sol.blowup_time(), Some(1.0)); // t = T/C
//! ```
//!
//! # Runnable examples
//!
//! Each major capability has a runnable example under `examples/`:
//!
//! - `blowup_profile` — build the Theorem-1 solution and walk its fields
//! - `lane_emden` — numeric vs closed-form Lane–Emden profiles and zeros
//! - `global_and_repulsive` — the C < 0 and repulsive-force variants
//! - `verify_identities` — the full residual-certification suite
//! - `scale_factor_collapse` — dust collapse of a(t) and its bracketed time
//! - `stationary_star` — the γ = 6/5 hydrostatic star
//! - `background_families` — the N ≥ 3 polytropic and N = 2 isothermal families
//! - `parameter_sweep` — in-process sweep over (C, α) with residual columns
//!
//! Run one with `cargo run --example blowup_profile`.

pub mod cli;
pub mod error;
pub mod families;
pub mod model;
pub mod ode;
pub mod verify;

pub use error::{Error, Result};

/// Named numerical defaults shared by the library, the CLI, and the tests.
pub mod defaults {
    /// Handoff point between the origin Taylor series and the RK integrator.
    pub const Z_START: f64 = 1e-6;
    /// Adaptive-step tolerance (absolute and relative weight).
    pub const TOL: f64 = 1e-10;
    /// Step-size cap for profile integration; keeps dense output uniformly
    /// accurate for the quadrature-grade residual checks.
    pub const MAX_STEP: f64 = 0.01;
    /// |y| threshold for first-zero refinement.
    pub const ZERO_TOL: f64 = 1e-12;
    /// Composite-Simpson panel count for quadrature-grade checks.
    pub const QUAD_POINTS: usize = 1024;
    /// Profile integration horizon for the 4-d families. The attractive
    /// profile has no finite first zero (y⁴ is supercritical in four
    /// dimensions), so the horizon is a windowing choice, not physics.
    pub const Z_MAX: f64 = 4.0;
    /// Growing profiles (C < 0 or repulsive) diverge at finite z; stop when
    /// y reaches this multiple of y(0).
    pub const Y_CEILING_FACTOR: f64 = 50.0;
    /// Density/velocity evaluation refuses |T-Ct| < this multiple of T
    /// (the quartic overflows near blowup; failure is made explicit).
    pub const TIME_GUARD_FACTOR: f64 = 1e-8;
    /// Scale-factor integration stops when a(t) < this multiple of a0 and
    /// reports a bracketed collapse time.
    pub const A_FLOOR_FACTOR: f64 = 1e-6;
    /// Residual sampling keeps r ≥ this multiple of (T-Ct)·Z away from the
    /// coordinate axis; the r = 0 limits are checked as closed forms.
    pub const R_MIN_FACTOR: f64 = 1e-6;
    /// Fraction of a ceiling-terminated profile grid used for the default
    /// verification window. Growing profiles diverge at finite z; their
    /// grid deliberately runs close to the divergence (up to y = 50·α), but
    /// fixed-panel quadrature cannot certify identities at the advertised
    /// tolerances arbitrarily close to a singularity, so default residual
    /// grids stop at this fraction of z_end. Identities remain checkable
    /// beyond it by passing explicit samples with more panels.
    pub const VERIFY_WINDOW_FACTOR: f64 = 0.8;
    /// Panel counts for quadrature convergence-order measurement.
    pub const RESOLUTIONS: [usize; 4] = [256, 512, 1024, 2048];
}
