//! The companion background families: densities of the form
//! ρ(t,r) = a(t)^{-N} F(y(r/a(t))) whose radial profile solves an
//! Emden-type equation and whose scale factor obeys ä = -λ/a^{N-1}.
//!
//! The separation constant λ links the two halves: it drives the scale
//! factor's free fall and enters the profile equation as the constant
//! term μ. Setting λ = 0 freezes a(t) and recovers classical stationary
//! polytropes; λ > 0 makes the whole configuration collapse homologously.
//!
//! Run with `cargo run --example background_families`.

use blowup_lab::families::{
    background_velocity, isothermal_density, isothermal_problem, polytropic_density,
    polytropic_problem,
};
use blowup_lab::ode::{integrate_profile, integrate_scale_factor};
use blowup_lab::{defaults, Result};

fn main() -> Result<()> {
    // Static polytrope: λ = 0 keeps a(t) ≡ 1, and the profile equation is
    // the Lane–Emden equation of index N/(N-2) = 3 (up to a coefficient
    // from the Poisson coupling). The first zero marks the star's edge.
    let problem = polytropic_problem(3, 1.0, 0.0, 1.0, 20.0)?;
    let profile = integrate_profile(&problem, defaults::TOL, defaults::MAX_STEP)?;
    println!("static polytropic star (dim 3, K = 1, lambda = 0, alpha = 1)");
    println!("  end event  : {:?}", profile.end_event());
    println!("  edge Z_mu  : {:?}", profile.first_zero());
    println!("  density profile rho(r) = y(r)^3:");
    for r in [0.0, 1.0, 2.0, 3.0] {
        println!("    r = {r:3.1}   rho = {:.12e}", polytropic_density(&profile, 3, 1.0, r)?);
    }
    println!("    beyond the edge the density is exactly zero: rho({:.3}) = {}",
        profile.first_zero().unwrap() + 0.5,
        polytropic_density(&profile, 3, 1.0, profile.first_zero().unwrap() + 0.5)?);
    println!();

    // Collapsing polytropic background: λ = 1 couples the same kind of
    // profile (now with a constant drive μ > 0) to a free-falling a(t).
    // The density at the center grows like a^{-3} while the edge r = a·Z_mu
    // sweeps inward — homologous collapse.
    let problem = polytropic_problem(3, 1.0, 1.0, 1.0, 20.0)?;
    let profile = integrate_profile(&problem, defaults::TOL, defaults::MAX_STEP)?;
    let scale = integrate_scale_factor(1.0, 3, 1.0, 0.0, 1.0, 1e-12)?;
    println!("collapsing polytropic background (lambda = 1, a(0) = 1, da(0) = 0)");
    println!("  profile edge Z_mu : {:?}", profile.first_zero());
    println!("  {:>6} {:>14} {:>20} {:>16}", "t", "a(t)", "rho(t, 0)", "u(t, 0.5)");
    for t in [0.0, 0.5, 0.9, 1.0] {
        let (a, da) = scale.eval(t)?;
        let rho0 = polytropic_density(&profile, 3, a, 0.0)?;
        let u = background_velocity(a, da, 0.5);
        println!("  {t:>6.2} {a:>14.9} {rho0:>20.12e} {u:>16.9e}");
    }
    println!();

    // Isothermal background (2-d, pressure P = Kρ): the profile variable
    // is the log-density, the nonlinearity is exponential, and the
    // density e^{y(r/a)}/a² is positive at every radius — no edge.
    let problem = isothermal_problem(1.0, 1.0, 0.0, 10.0)?;
    let profile_iso = integrate_profile(&problem, defaults::TOL, defaults::MAX_STEP)?;
    let scale_iso = integrate_scale_factor(1.0, 2, 1.0, 0.0, 0.5, 1e-12)?;
    println!("isothermal background (dim 2, K = 1, lambda = 1, alpha = 0)");
    println!("  end event  : {:?}", profile_iso.end_event());
    println!("  first zero : {:?} (log-density; no surface)", profile_iso.first_zero());
    let (a, da) = scale_iso.eval(0.25)?;
    println!("  at t = 0.25: a = {a:.9}, da = {da:.9}");
    for r in [0.0, 1.0, 2.0, 4.0] {
        println!("    r = {r:3.1}   rho = {:.12e}", isothermal_density(&profile_iso, a, r)?);
    }
    println!();

    // Every background family shares the homologous velocity u = (ȧ/a) r:
    // u/r depends on time alone, exactly like the blowup family's
    // u = -Cr/(T-Ct). That linearity is what cancels the continuity
    // equation identically.
    println!("homologous velocity at t = 0.25 (u/r is r-independent):");
    for r in [0.5, 1.0, 2.0] {
        let u = background_velocity(a, da, r);
        println!("  r = {r:3.1}   u = {u:+.12}   u/r = {:+.12}", u / r);
    }
    Ok(())
}
