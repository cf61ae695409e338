//! Solve the Lane–Emden equation y'' + (2/z) y' + yⁿ = 0, y(0) = 1,
//! y'(0) = 0 for several polytropic indices and compare against the three
//! classical closed forms
//!
//!   n = 0 : y = 1 - z²/6           (first zero √6)
//!   n = 1 : y = sin z / z          (first zero π)
//!   n = 5 : y = (1 + z²/3)^{-1/2}  (no zero)
//!
//! Run with `cargo run --example lane_emden`.

use blowup_lab::families::{lane_emden_analytic, lane_emden_analytic_zero};
use blowup_lab::ode::{integrate_profile, EmdenProblem};
use blowup_lab::{defaults, Result};

fn main() -> Result<()> {
    println!("analytic indices: numeric solution vs. closed form");
    println!();
    for n in [0u32, 1, 5] {
        let problem = EmdenProblem::lane_emden(n as f64, 10.0);
        let sol = integrate_profile(&problem, defaults::TOL, defaults::MAX_STEP)?;

        // Sup-norm error of the integrated profile over its own grid.
        let mut max_err = 0f64;
        for (z, y, _) in sol.nodes() {
            let y_exact = lane_emden_analytic(n, z)?;
            max_err = max_err.max((y - y_exact).abs());
        }

        println!("n = {n}");
        println!("  nodes        : {}", sol.len());
        println!("  end event    : {:?}", sol.end_event());
        println!("  max |y - y*| : {max_err:.3e}");
        match (sol.first_zero(), lane_emden_analytic_zero(n)?) {
            (Some(numeric), Some(exact)) => {
                println!("  first zero   : {numeric:.12} (exact {exact:.12}, err {:.3e})", (numeric - exact).abs());
            }
            (None, None) => println!("  first zero   : none (solution stays positive, matching the closed form)"),
            (numeric, exact) => println!("  first zero   : MISMATCH numeric {numeric:?} vs exact {exact:?}"),
        }
        println!();
    }

    // The astrophysically standard n = 3 polytrope has no closed form; its
    // first zero ξ₁ ≈ 6.8968486 is the benchmark value for stellar models.
    let problem = EmdenProblem::lane_emden(3.0, 10.0);
    let sol = integrate_profile(&problem, defaults::TOL, defaults::MAX_STEP)?;
    println!("n = 3 (no closed form)");
    println!("  first zero   : {:?}", sol.first_zero());
    println!("  reference    : 6.896848... from high-precision tables");
    Ok(())
}
