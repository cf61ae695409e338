//! Integrate the scale-factor equation ä = -λ/a^{N-1} for a homologous
//! dust ball. Three independent checks pin the integrator: the conserved
//! energy E = ½ȧ² - λ/((N-2)a^{N-2}) stays flat along the trajectory,
//! the N = 3 collapse-time bracket contains the parametric-cycloid value
//! t_c = π/(2√(2λ)) · a₀^{3/2}, and the bracket machinery extends to
//! higher dimensions where no closed form exists.
//!
//! Run with `cargo run --example scale_factor_collapse`.

use blowup_lab::ode::integrate_scale_factor;
use blowup_lab::Result;

fn main() -> Result<()> {
    // A ball released from rest: a(0) = 1, ȧ(0) = 0, N = 3, λ = 1.
    // The parametric cycloid solution collapses at t_c = π/(2√2λ) · a₀^{3/2}.
    let lambda = 1.0f64;
    let t_c = std::f64::consts::PI / (2.0 * (2.0 * lambda).sqrt());
    println!("free-fall collapse (N = 3, lambda = 1, a0 = 1, a1 = 0)");
    println!("  analytic collapse time : {t_c:.12}");

    let run = integrate_scale_factor(lambda, 3, 1.0, 0.0, 2.0, 1e-12)?;
    match run.collapse() {
        Some((lo, hi)) => {
            println!("  numeric bracket        : [{lo:.12}, {hi:.12}]");
            println!("  bracket width          : {:.3e}", hi - lo);
            println!("  contains analytic time : {}", lo <= t_c && t_c <= hi);
        }
        None => println!("  no collapse detected (unexpected for attractive free fall)"),
    }
    println!();

    // Energy drift measured on the safely-resolved window [0, 0.9 t_c]:
    // the integrator holds E = ½ȧ² - λ/a to a few parts in 10⁹ even as
    // ȧ steepens toward the singularity.
    let windowed = integrate_scale_factor(lambda, 3, 1.0, 0.0, 0.9 * t_c, 1e-12)?;
    println!("energy conservation on [0, 0.9 t_c]");
    println!("  nodes        : {}", windowed.nodes().count());
    println!("  energy drift : {:.3e} (relative)", windowed.energy_drift());
    println!();

    // Trajectory snapshot: a(t) falls monotonically, ȧ(t) runs away.
    println!("trajectory:");
    println!("  {:>10} {:>16} {:>16}", "t", "a", "da/dt");
    let nodes: Vec<_> = windowed.nodes().collect();
    for k in 0..=5 {
        let (t, a, da) = nodes[(nodes.len() - 1) * k / 5];
        println!("  {t:>10.6} {a:>16.12} {da:>16.9}");
    }
    println!();

    // Higher dimensions collapse too, just on different clocks: the force
    // -λ/a^{N-1} weakens with N at a < 1 but every bound release still
    // reaches a = 0.
    println!("collapse brackets across dimension (a0 = 1, a1 = 0, lambda = 1):");
    for dim in [3u32, 4, 5] {
        let run = integrate_scale_factor(1.0, dim, 1.0, 0.0, 5.0, 1e-12)?;
        match run.collapse() {
            Some((lo, hi)) => println!("  N = {dim}   t_collapse in [{lo:.9}, {hi:.9}]"),
            None => println!("  N = {dim}   no collapse before t = 5"),
        }
    }
    Ok(())
}
