//! The two non-blowup branches of the 4-d self-similar family.
//!
//! Taking C < 0 turns the contraction r/(T-Ct) into an expansion: the
//! solution exists for all t ≥ 0 and decays, with the same profile
//! equation but the opposite sign of the y⁴ term. Flipping the force to
//! repulsive with C > 0 produces the *same* growing profile ODE, so both
//! branches ride one integration — they differ only in how the similarity
//! variable moves with time.
//!
//! The growing profile blows up at a finite z* ≈ 0.8, so these profiles
//! terminate at a ceiling rather than an outer radius.
//!
//! Run with `cargo run --example global_and_repulsive`.

use blowup_lab::families::build_blowup_solution;
use blowup_lab::model::{ForceSign, ModelParams};
use blowup_lab::ode::EndEvent;
use blowup_lab::{defaults, Result};

fn main() -> Result<()> {
    // Global decaying solution: C = -1, attractive force.
    let global = ModelParams::theorem1(-1.0, 1.0, 1.0, 1.0);
    global.validate()?;
    let sol = build_blowup_solution(&global, defaults::TOL)?;
    println!("global family (C = -1, attractive)");
    println!("  blowup time : {:?} (none: T - Ct = T + t > 0 forever)", sol.blowup_time());
    println!("  end event   : {:?}", sol.profile().end_event());
    println!("  z_end       : {:.9} (profile diverges at finite z)", sol.profile().z_end());
    // A fixed radius r maps to z = r/(T+t), which *decreases* with time
    // here — points fall deeper into the window as the solution spreads.
    println!("  density decays at fixed r = 0.5:");
    for t in [0.0, 1.0, 10.0, 100.0] {
        println!("    t = {t:>5}   rho = {:.6e}", sol.density(t, 0.5)?);
    }
    println!();

    // Repulsive blowup: C = +1 with the force sign flipped. The density
    // still focuses as t -> T/C; repulsion feeds the growing profile.
    let mut repulsive = ModelParams::theorem1(1.0, 1.0, 1.0, 1.0);
    repulsive.force_sign = ForceSign::Repulsive;
    repulsive.validate()?;
    let sol_rep = build_blowup_solution(&repulsive, defaults::TOL)?;
    println!("repulsive family (C = +1, repulsive)");
    println!("  blowup time : {:?}", sol_rep.blowup_time());
    println!("  end event   : {:?}", sol_rep.profile().end_event());
    println!("  z_end       : {:.9}", sol_rep.profile().z_end());
    println!();

    // Same ODE, same profile: the two branches agree point by point.
    println!("shared growing profile (y values coincide):");
    let z_hi = sol.profile().z_end().min(sol_rep.profile().z_end());
    for k in 1..=4 {
        let z = z_hi * k as f64 / 5.0;
        let (y_g, _) = sol.profile().eval(z)?;
        let (y_r, _) = sol_rep.profile().eval(z)?;
        println!(
            "  z = {z:.6}   global y = {y_g:.12}   repulsive y = {y_r:.12}   diff = {:.1e}",
            (y_g - y_r).abs()
        );
    }
    println!();

    // Growth toward the finite-z singularity: y passes the ceiling
    // 50 α where integration stops by design.
    println!("growth toward z* (ceiling event at y = 50 alpha):");
    assert_eq!(sol.profile().end_event(), EndEvent::Ceiling);
    for frac in [0.5, 0.9, 0.99, 1.0] {
        let z = sol.profile().z_end() * frac;
        let (y, _) = sol.profile().eval(z)?;
        println!("  z/z_end = {frac:4.2}   y = {y:12.4}");
    }
    Ok(())
}
