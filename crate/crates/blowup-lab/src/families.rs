//! Solution families assembled from integrated profiles.
//!
//! The centerpiece is the 4-d self-similar family
//! ρ(t,r) = y(r/(T-Ct))⁴/(T-Ct)⁴, u(t,r) = -C r/(T-Ct), whose profile
//! solves ÿ + (3/z)ẏ ± (α(4)/(5Cκ)) y⁴ = 0. Three sign combinations are
//! realizable: attractive force with C > 0 (blowup at t = T/C), attractive
//! with C < 0 (global, decaying), repulsive with C > 0. The attractive
//! profile decays without ever vanishing (y⁴ is supercritical in four
//! dimensions); the other two grow and diverge at finite z, so their
//! profiles are truncated at a ceiling.
//!
//! Also here: the Lane–Emden closed forms (n = 0, 1, 5), the γ = 6/5
//! hydrostatic star in 3-d, and the expanding/collapsing background
//! families — polytropic in N ≥ 3 and isothermal in N = 2 — whose profiles
//! ride on a scale factor a(t) with ä = -λ a^{1-N}.

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::model::{alpha_constant, ForceSign, ModelParams};
use crate::ode::{integrate_profile, EmdenProblem, Nonlinearity, RadialProfile};

/// The three realizable sign combinations of the 4-d self-similar family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Attractive force, C > 0: density blows up like (T-Ct)^{-4} at t = T/C.
    Blowup4d,
    /// Attractive force, C < 0: global solution, density decays forever.
    Global4d,
    /// Repulsive force, C > 0: blowup driven against the outward force.
    Repulsive4d,
}

fn classify(params: &ModelParams) -> Result<Family> {
    match (params.force_sign, params.big_c > 0.0) {
        (ForceSign::Attractive, true) => Ok(Family::Blowup4d),
        (ForceSign::Attractive, false) => Ok(Family::Global4d),
        (ForceSign::Repulsive, true) => Ok(Family::Repulsive4d),
        (ForceSign::Repulsive, false) => Err(Error::Config(
            "repulsive force with C < 0 is not one of the constructed families".into(),
        )),
    }
}

/// A self-similar solution: parameters, integrated profile, and family tag.
///
/// All field evaluations use the similarity variable z = r/(T-Ct) and are
/// guarded against |T-Ct| collapsing below TIME_GUARD_FACTOR·T, where the
/// quartic scalings drown in floating-point error; the guard failure is an
/// explicit `Domain` error rather than a quietly wrong number.
#[derive(Debug, Clone)]
pub struct SelfSimilarSolution {
    params: ModelParams,
    profile: RadialProfile,
    family: Family,
}

impl SelfSimilarSolution {
    /// Assemble a solution from an already-integrated profile. The profile
    /// must solve the family's Emden equation for these parameters; this is
    /// not re-checked here, which makes the constructor useful for building
    /// deliberately wrong solutions as negative controls.
    pub fn from_parts(params: ModelParams, profile: RadialProfile) -> Result<Self> {
        params.validate()?;
        validate_family_params(&params)?;
        let family = classify(&params)?;
        Ok(SelfSimilarSolution { params, profile, family })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Blowup time T/C for the blowup families; `None` when C < 0.
    pub fn blowup_time(&self) -> Option<f64> {
        self.params.blowup_time()
    }

    /// Similarity scaling s(t) = T - Ct, guarded away from 0.
    pub fn scaling(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("t must be finite, got {t}")));
        }
        let s = self.params.big_t - self.params.big_c * t;
        let guard = defaults::TIME_GUARD_FACTOR * self.params.big_t;
        if s < guard {
            return Err(Error::Domain(format!(
                "T - Ct = {s:e} at t = {t} is below the evaluation guard {guard:e} \
                 (at or past the blowup time)"
            )));
        }
        Ok(s)
    }

    /// Similarity variable z = r/(T-Ct).
    pub fn z_of(&self, t: f64, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be ≥ 0, got {r}")));
        }
        Ok(r / self.scaling(t)?)
    }

    /// Extent of the profile in z: the first zero when one exists, the
    /// grid end otherwise.
    pub fn z_horizon(&self) -> f64 {
        self.profile.horizon()
    }

    /// ρ(t,r) = y(z)⁴/(T-Ct)⁴; 0 beyond a first zero of the profile.
    /// Radii mapping beyond the grid of a zero-free profile are a `Domain`
    /// error — there is nothing to truncate at, so the value is unknown.
    pub fn density(&self, t: f64, r: f64) -> Result<f64> {
        let s = self.scaling(t)?;
        let z = check_z(&self.profile, r, s)?;
        match z {
            None => Ok(0.0),
            Some(z) => {
                let (y, _) = self.profile.eval(z)?;
                let w = y / s;
                Ok(w * w * w * w)
            }
        }
    }

    /// u(t,r) = -C r/(T-Ct): linear in radius, independent of the profile.
    pub fn velocity(&self, t: f64, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be ≥ 0, got {r}")));
        }
        let s = self.scaling(t)?;
        Ok(-self.params.big_c * r / s)
    }

    /// (ρ_t, ρ_r) in closed form through the chain rule:
    /// ρ_t = 4C (y⁴ + z y³ ẏ)/(T-Ct)⁵ and ρ_r = 4 y³ ẏ/(T-Ct)⁵.
    /// Zero beyond a first zero of the profile.
    pub fn density_partials(&self, t: f64, r: f64) -> Result<(f64, f64)> {
        let s = self.scaling(t)?;
        let z = check_z(&self.profile, r, s)?;
        match z {
            None => Ok((0.0, 0.0)),
            Some(z) => {
                let (y, dy) = self.profile.eval(z)?;
                let s5 = s.powi(5);
                let y3 = y * y * y;
                let rho_t = 4.0 * self.params.big_c / s5 * (y3 * y + z * y3 * dy);
                let rho_r = 4.0 * y3 * dy / s5;
                Ok((rho_t, rho_r))
            }
        }
    }
}

/// Map a radius to the profile argument z = r/s: `Ok(None)` means "in the
/// truncated vacuum region" (at or beyond a first zero), `Ok(Some(z))` is
/// evaluatable.
fn check_z(profile: &RadialProfile, r: f64, s: f64) -> Result<Option<f64>> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be ≥ 0, got {r}")));
    }
    let z = r / s;
    if let Some(z0) = profile.first_zero() {
        if z >= z0 {
            return Ok(None);
        }
    }
    if z > profile.z_end() {
        return Err(Error::Domain(format!(
            "z = {z} (radius {r}) lies beyond the computed profile grid \
             (z_end = {}) and the profile has no zero to truncate at",
            profile.z_end()
        )));
    }
    Ok(Some(z))
}

fn validate_family_params(params: &ModelParams) -> Result<()> {
    if params.dim != 4 {
        return Err(Error::Config(format!(
            "the self-similar families exist in N = 4, got N = {}",
            params.dim
        )));
    }
    if params.theta != 1.25 {
        return Err(Error::Config(format!(
            "the self-similar families need θ = 5/4 exactly, got {}",
            params.theta
        )));
    }
    Ok(())
}

/// Integrate the profile equation for `params` and assemble the solution.
///
/// The quartic coefficient is α(4)/(5Cκ), sign-flipped for the repulsive
/// force. When the coefficient is negative the profile grows and diverges
/// at finite z, so integration stops at Y_CEILING_FACTOR·α; the decaying
/// attractive-blowup profile runs to Z_MAX.
pub fn build_blowup_solution(params: &ModelParams, tol: f64) -> Result<SelfSimilarSolution> {
    params.validate()?;
    validate_family_params(params)?;
    let family = classify(params)?;
    let coeff = params.force_sign.factor() * alpha_constant(params.dim)?
        / (5.0 * params.big_c * params.kappa);
    let problem = EmdenProblem {
        m: (params.dim - 1) as f64,
        nonlinearity: Nonlinearity::Power { coeff, exponent: 4.0 },
        mu: 0.0,
        y0: params.alpha0,
        z_max: defaults::Z_MAX,
        stop_at_first_zero: true,
        y_ceiling: (coeff < 0.0).then_some(defaults::Y_CEILING_FACTOR * params.alpha0),
    };
    let profile = integrate_profile(&problem, tol, defaults::MAX_STEP)?;
    Ok(SelfSimilarSolution { params: *params, profile, family })
}

/// Closed-form Lane–Emden solutions of ÿ + (2/z)ẏ + yⁿ = 0, y(0) = 1:
/// n = 0 parabola 1 - z²/6, n = 1 sinc sin(z)/z, n = 5 Schuster sphere
/// (1 + z²/3)^{-1/2}. Other indices have no elementary closed form.
pub fn lane_emden_analytic(n: u32, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("z must be ≥ 0, got {z}")));
    }
    match n {
        0 => Ok(1.0 - z * z / 6.0),
        1 => Ok(if z == 0.0 { 1.0 } else { z.sin() / z }),
        5 => Ok((1.0 + z * z / 3.0).powf(-0.5)),
        _ => Err(Error::Config(format!(
            "no closed-form Lane–Emden solution for n = {n}; have n ∈ {{0, 1, 5}}"
        ))),
    }
}

/// First zero of the closed-form Lane–Emden solutions: √6 for n = 0, π for
/// n = 1, and none for n = 5 (the Schuster sphere is strictly positive).
pub fn lane_emden_analytic_zero(n: u32) -> Result<Option<f64>> {
    match n {
        0 => Ok(Some(6.0f64.sqrt())),
        1 => Ok(Some(std::f64::consts::PI)),
        5 => Ok(None),
        _ => Err(Error::Config(format!(
            "no closed-form Lane–Emden solution for n = {n}; have n ∈ {{0, 1, 5}}"
        ))),
    }
}

/// Stationary star of the γ = 6/5 Euler–Poisson system in 3-d:
///
/// ```text
/// ρ(r) = (3KA²/(2π))^{5/4} (1 + A²r²/3)^{-5/2},
/// ```
///
/// in exact hydrostatic balance K(ρ^{6/5})_r = -ρ Φ_r with the Newtonian
/// potential of its own mass. The mass integral has the closed form
/// ∫₀^r ρ s² ds = ρ_c r³/3 · (1 + A²r²/3)^{-3/2}, which is what makes the
/// balance checkable to quadrature accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryStar {
    /// Pressure coefficient K > 0 in P = Kρ^{6/5}.
    pub big_k: f64,
    /// Inverse length scale A > 0.
    pub big_a: f64,
}

impl StationaryStar {
    /// The star lives in three dimensions.
    pub const DIM: u32 = 3;

    pub fn new(big_k: f64, big_a: f64) -> Result<Self> {
        if !(big_k > 0.0 && big_k.is_finite()) {
            return Err(Error::Config(format!("K must be > 0, got {big_k}")));
        }
        if !(big_a > 0.0 && big_a.is_finite()) {
            return Err(Error::Config(format!("A must be > 0, got {big_a}")));
        }
        Ok(StationaryStar { big_k, big_a })
    }

    /// Central density ρ(0) = (3KA²/(2π))^{5/4}, pinned by the balance
    /// condition 2KA²ρ_c^{4/5} = (4π/3)ρ_c².
    pub fn central_density(&self) -> f64 {
        self.base().powf(1.25)
    }

    /// 3KA²/(2π) = ρ_c^{4/5}.
    fn base(&self) -> f64 {
        3.0 * self.big_k * self.big_a * self.big_a / (2.0 * std::f64::consts::PI)
    }

    /// ρ(r) = ρ_c (1 + A²r²/3)^{-5/2}.
    pub fn density(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be ≥ 0, got {r}")));
        }
        Ok(self.central_density() * (1.0 + self.big_a * self.big_a * r * r / 3.0).powf(-2.5))
    }

    /// d/dr [K ρ^{6/5}] = -2KA² ρ_c^{6/5} r (1 + A²r²/3)^{-4}, closed form.
    /// ρ_c^{6/5} = (3KA²/(2π))^{3/2}.
    pub fn pressure_gradient(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be ≥ 0, got {r}")));
        }
        let a2 = self.big_a * self.big_a;
        Ok(-2.0 * self.big_k * a2 * self.base().powf(1.5) * r
            * (1.0 + a2 * r * r / 3.0).powi(-4))
    }
}

/// Emden problem of the polytropic background family in N ≥ 3 dimensions
/// with pressure P = Kρ^{(2N-2)/N} on a scale factor a(t):
/// m = N-1, f(y) = [α(N)/((2N-2)K)] y^{N/(N-2)}, μ = N(N-2)λ/((2N-2)K).
/// λ = 0 reduces to the Lane–Emden equation of index N/(N-2); λ > 0 adds a
/// constant drive that can hold the profile above zero entirely.
pub fn polytropic_problem(
    dim: u32,
    big_k: f64,
    lambda_: f64,
    alpha0: f64,
    z_max: f64,
) -> Result<EmdenProblem> {
    if dim < 3 {
        return Err(Error::Config(format!(
            "the polytropic background family needs N ≥ 3, got {dim}"
        )));
    }
    if !(big_k > 0.0 && big_k.is_finite()) {
        return Err(Error::Config(format!("K must be > 0, got {big_k}")));
    }
    if !lambda_.is_finite() {
        return Err(Error::Config(format!("lambda must be finite, got {lambda_}")));
    }
    if !(alpha0 > 0.0 && alpha0.is_finite()) {
        return Err(Error::Config(format!("alpha must be > 0, got {alpha0}")));
    }
    let n = dim as f64;
    let denom = (2.0 * n - 2.0) * big_k;
    Ok(EmdenProblem {
        m: n - 1.0,
        nonlinearity: Nonlinearity::Power {
            coeff: alpha_constant(dim)? / denom,
            exponent: n / (n - 2.0),
        },
        mu: n * (n - 2.0) * lambda_ / denom,
        y0: alpha0,
        z_max,
        stop_at_first_zero: true,
        y_ceiling: None,
    })
}

/// Density of the polytropic background solution:
/// ρ(t,r) = a^{-N} y(r/a)^{N/(N-2)}, zero beyond the profile's first zero.
pub fn polytropic_density(profile: &RadialProfile, dim: u32, a: f64, r: f64) -> Result<f64> {
    if dim < 3 {
        return Err(Error::Config(format!(
            "the polytropic background family needs N ≥ 3, got {dim}"
        )));
    }
    if !(a > 0.0) {
        return Err(Error::Domain(format!("scale factor must be > 0, got {a}")));
    }
    let z = match check_z(profile, r, a)? {
        None => return Ok(0.0),
        Some(z) => z,
    };
    let (y, _) = profile.eval(z)?;
    // Interpolation can graze -0 right at a surface node.
    let y = y.max(0.0);
    let n = dim as f64;
    Ok(a.powi(-(dim as i32)) * y.powf(n / (n - 2.0)))
}

/// Emden problem of the isothermal background family in N = 2 dimensions
/// with pressure P = Kρ: m = 1, f(y) = (2π/K) e^y, μ = 2λ/K. The center
/// value y(0) = α is a free parameter of any sign (the density e^y/a² is
/// positive regardless), and y has no meaningful first zero.
pub fn isothermal_problem(big_k: f64, lambda_: f64, alpha0: f64, z_max: f64) -> Result<EmdenProblem> {
    if !(big_k > 0.0 && big_k.is_finite()) {
        return Err(Error::Config(format!("K must be > 0, got {big_k}")));
    }
    if !lambda_.is_finite() {
        return Err(Error::Config(format!("lambda must be finite, got {lambda_}")));
    }
    if !alpha0.is_finite() {
        return Err(Error::Config(format!("alpha must be finite, got {alpha0}")));
    }
    Ok(EmdenProblem {
        m: 1.0,
        nonlinearity: Nonlinearity::Exponential { coeff: 2.0 * std::f64::consts::PI / big_k },
        mu: 2.0 * lambda_ / big_k,
        y0: alpha0,
        z_max,
        stop_at_first_zero: false,
        y_ceiling: None,
    })
}

/// Density of the isothermal background solution: ρ(t,r) = e^{y(r/a)}/a².
/// Everywhere positive; radii beyond the grid are a `Domain` error.
pub fn isothermal_density(profile: &RadialProfile, a: f64, r: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("scale factor must be > 0, got {a}")));
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be ≥ 0, got {r}")));
    }
    let (y, _) = profile.eval(r / a)?;
    Ok(y.exp() / (a * a))
}

/// Velocity of both background families: u(t,r) = (ȧ/a) r.
pub fn background_velocity(a: f64, da: f64, r: f64) -> f64 {
    da / a * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{first_zero, integrate_scale_factor, EndEvent};
    use std::f64::consts::PI;

    fn theorem1(big_c: f64) -> ModelParams {
        ModelParams::theorem1(big_c, 1.0, 1.0, 1.0)
    }

    #[test]
    fn families_classify_by_sign_combination() {
        let blowup = build_blowup_solution(&theorem1(1.0), defaults::TOL).unwrap();
        assert_eq!(blowup.family(), Family::Blowup4d);
        assert_eq!(blowup.blowup_time(), Some(1.0));

        let global = build_blowup_solution(&theorem1(-1.0), defaults::TOL).unwrap();
        assert_eq!(global.family(), Family::Global4d);
        assert_eq!(global.blowup_time(), None);

        let mut params = theorem1(1.0);
        params.force_sign = ForceSign::Repulsive;
        let repulsive = build_blowup_solution(&params, defaults::TOL).unwrap();
        assert_eq!(repulsive.family(), Family::Repulsive4d);

        params.big_c = -1.0;
        assert!(build_blowup_solution(&params, defaults::TOL).is_err());
    }

    #[test]
    fn build_rejects_wrong_dimension_or_viscosity_exponent() {
        let mut params = theorem1(1.0);
        params.dim = 3;
        assert!(build_blowup_solution(&params, defaults::TOL).is_err());
        params = theorem1(1.0);
        params.theta = 1.3;
        assert!(build_blowup_solution(&params, defaults::TOL).is_err());
    }

    #[test]
    fn blowup_field_values_match_the_ansatz() {
        let sol = build_blowup_solution(&theorem1(1.0), defaults::TOL).unwrap();
        // ρ(0,0) = y(0)⁴/T⁴ = 1 with stored-exact y(0).
        assert_eq!(sol.density(0.0, 0.0).unwrap(), 1.0);
        // u = -Cr/(T-Ct): at t = 0.5, r = 0.2 this is -0.4.
        assert_eq!(sol.velocity(0.5, 0.2).unwrap(), -0.4);
        // Density rides the profile: ρ(t, z(T-Ct))·(T-Ct)⁴ = y(z)⁴.
        let (y1, _) = sol.profile().eval(1.0).unwrap();
        for &t in &[0.0, 0.5, 0.9] {
            let s = 1.0 - t;
            let got = sol.density(t, s).unwrap() * s.powi(4);
            assert!((got - y1.powi(4)).abs() < 1e-13 * y1.powi(4), "t = {t}");
        }
    }

    #[test]
    fn blowup_rate_is_alpha_fourth_at_the_center() {
        let mut params = theorem1(2.0);
        params.alpha0 = 1.5;
        let sol = build_blowup_solution(&params, defaults::TOL).unwrap();
        let want = 1.5f64.powi(4);
        for k in 0..=6 {
            let s = 10f64.powi(-k); // T - Ct = 10^{-k}
            let t = (1.0 - s) / 2.0;
            let got = sol.density(t, 0.0).unwrap() * sol.scaling(t).unwrap().powi(4);
            assert!((got - want).abs() < 1e-12 * want, "s = {s:e}");
        }
    }

    #[test]
    fn time_guard_rejects_near_blowup_evaluation() {
        let sol = build_blowup_solution(&theorem1(1.0), defaults::TOL).unwrap();
        // Blowup at t = 1: s = 1e-9 is inside the 1e-8 guard.
        assert!(sol.density(1.0 - 1e-9, 0.0).is_err());
        assert!(sol.density(1.5, 0.0).is_err()); // past blowup: s < 0
        assert!(sol.velocity(1.0, 1.0).is_err());
        assert!(sol.density(f64::NAN, 0.0).is_err());
        // Just outside the guard is fine.
        assert!(sol.density(1.0 - 1e-7, 0.0).is_ok());
    }

    #[test]
    fn negative_radius_is_rejected() {
        let sol = build_blowup_solution(&theorem1(1.0), defaults::TOL).unwrap();
        assert!(sol.density(0.0, -0.5).is_err());
        assert!(sol.velocity(0.0, -0.5).is_err());
        assert!(sol.z_of(0.0, -0.5).is_err());
    }

    #[test]
    fn zero_free_profile_rejects_radii_beyond_the_grid() {
        let sol = build_blowup_solution(&theorem1(1.0), defaults::TOL).unwrap();
        // z = 5 > Z_MAX = 4 and the attractive profile has no zero.
        assert!(sol.density(0.0, 5.0).is_err());
        assert!(sol.density_partials(0.0, 5.0).is_err());
        assert!(sol.density(0.0, 4.0).is_ok());
    }

    #[test]
    fn global_family_decays_in_forward_time() {
        let sol = build_blowup_solution(&theorem1(-1.0), defaults::TOL).unwrap();
        // s = 1 + t: the center density is α⁴/(1+t)⁴.
        assert!((sol.density(1.0, 0.0).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        assert!((sol.density(3.0, 0.0).unwrap() - 1.0 / 256.0).abs() < 1e-17);
        // Outward velocity: u = -Cr/s = +r/(1+t).
        assert_eq!(sol.velocity(1.0, 3.0).unwrap(), 1.5);
        // The growing profile was truncated by its ceiling.
        assert_eq!(sol.profile().end_event(), EndEvent::Ceiling);
        assert!(sol.z_horizon() < defaults::Z_MAX);
    }

    #[test]
    fn repulsive_profile_grows_to_its_ceiling() {
        let mut params = theorem1(1.0);
        params.force_sign = ForceSign::Repulsive;
        let sol = build_blowup_solution(&params, defaults::TOL).unwrap();
        let profile = sol.profile();
        assert_eq!(profile.end_event(), EndEvent::Ceiling);
        assert!(profile.y_values().last().unwrap() > profile.y_values().first().unwrap());
        // Same ODE as the global family at |C| = κ = α = 1: the ceiling
        // crossing sits at the independently computed z ≈ 0.7975.
        assert!(profile.z_end() > 0.797 && profile.z_end() < 0.798);
    }

    #[test]
    fn density_partials_match_finite_differences() {
        let params = ModelParams::theorem1(2.0, 1.0, 0.5, 1.5);
        let sol = build_blowup_solution(&params, defaults::TOL).unwrap();
        let (t, r) = (0.3, 0.07);
        let (rho_t, rho_r) = sol.density_partials(t, r).unwrap();
        let h = 1e-5;
        let fd_t = (sol.density(t + h, r).unwrap() - sol.density(t - h, r).unwrap()) / (2.0 * h);
        let fd_r = (sol.density(t, r + h).unwrap() - sol.density(t, r - h).unwrap()) / (2.0 * h);
        assert!((rho_t - fd_t).abs() < 1e-6 * rho_t.abs());
        assert!((rho_r - fd_r).abs() < 1e-6 * rho_r.abs().max(1.0));
    }

    #[test]
    fn from_parts_reuses_a_profile_and_validates() {
        let built = build_blowup_solution(&theorem1(1.0), defaults::TOL).unwrap();
        let again =
            SelfSimilarSolution::from_parts(*built.params(), built.profile().clone()).unwrap();
        assert_eq!(again.family(), Family::Blowup4d);
        let mut params = theorem1(-1.0);
        params.force_sign = ForceSign::Repulsive;
        assert!(SelfSimilarSolution::from_parts(params, built.profile().clone()).is_err());
    }

    #[test]
    fn lane_emden_closed_forms_and_zeros() {
        assert_eq!(lane_emden_analytic(0, 0.0).unwrap(), 1.0);
        assert_eq!(lane_emden_analytic(1, 0.0).unwrap(), 1.0);
        assert_eq!(lane_emden_analytic(5, 0.0).unwrap(), 1.0);
        assert!((lane_emden_analytic(0, 1.2).unwrap() - (1.0 - 1.44 / 6.0)).abs() < 1e-16);
        assert!((lane_emden_analytic(1, 2.0).unwrap() - 2.0f64.sin() / 2.0).abs() < 1e-16);
        assert!((lane_emden_analytic(5, 3.0).unwrap() - 0.5).abs() < 1e-16);
        // sinc is numerically clean down to tiny z.
        assert!((lane_emden_analytic(1, 1e-8).unwrap() - 1.0).abs() < 1e-15);
        assert!(lane_emden_analytic(2, 1.0).is_err());
        assert!(lane_emden_analytic(1, -0.1).is_err());
        assert_eq!(lane_emden_analytic_zero(0).unwrap(), Some(6.0f64.sqrt()));
        assert_eq!(lane_emden_analytic_zero(1).unwrap(), Some(PI));
        assert_eq!(lane_emden_analytic_zero(5).unwrap(), None);
        assert!(lane_emden_analytic_zero(3).is_err());
    }

    #[test]
    fn stationary_star_density_spot_values() {
        // K = 2π/3, A = 1 makes the central density exactly 1.
        let star = StationaryStar::new(2.0 * PI / 3.0, 1.0).unwrap();
        assert!((star.central_density() - 1.0).abs() < 1e-15);
        assert!((star.density(0.0).unwrap() - 1.0).abs() < 1e-15);
        // ρ(1) = (1 + 1/3)^{-5/2} = (3/4)^{5/2}.
        let want = 0.75f64.powf(2.5);
        assert!((star.density(1.0).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.4871392896287468).abs() < 1e-15); // frozen oracle
        assert!(star.density(-1.0).is_err());
        assert!(StationaryStar::new(0.0, 1.0).is_err());
        assert!(StationaryStar::new(1.0, 0.0).is_err());
    }

    #[test]
    fn stationary_star_pressure_gradient_matches_finite_differences() {
        let star = StationaryStar::new(2.0, 0.7).unwrap();
        let p = |r: f64| star.big_k * star.density(r).unwrap().powf(1.2);
        for &r in &[0.3, 1.0, 2.5] {
            let h = 1e-6;
            let fd = (p(r + h) - p(r - h)) / (2.0 * h);
            let got = star.pressure_gradient(r).unwrap();
            assert!((got - fd).abs() < 1e-8 * got.abs(), "r = {r}");
        }
        assert_eq!(star.pressure_gradient(0.0).unwrap(), 0.0);
    }

    #[test]
    fn polytropic_lambda_zero_is_lane_emden_n3() {
        // N = 3, K = π makes the quartic coefficient α(3)/(4K) = 1, i.e.
        // the classical Lane–Emden n = 3 problem with ξ₁ = 6.8968486.
        let problem = polytropic_problem(3, PI, 0.0, 1.0, 8.0).unwrap();
        assert_eq!(problem.m, 2.0);
        let profile = integrate_profile(&problem, defaults::TOL, 0.01).unwrap();
        let z0 = first_zero(&profile, defaults::ZERO_TOL).unwrap();
        assert!((z0 - 6.8968486).abs() < 1e-5, "ξ₁ = {z0}");
        // Density: support ends at a·ξ₁, vacuum beyond.
        let a = 2.0;
        assert!(polytropic_density(&profile, 3, a, 0.0).unwrap() > 0.0);
        assert_eq!(polytropic_density(&profile, 3, a, 2.0 * z0 + 0.1).unwrap(), 0.0);
        // y³ scaling at the center: ρ = a^{-3}·1.
        assert!((polytropic_density(&profile, 3, a, 0.0).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn polytropic_equilibrium_drive_never_vanishes() {
        // λ = α(N)/(N(N-2)) with y(0) = 1 makes μ = f(1): the constant
        // solution y ≡ 1. The profile stays pinned there, so λ > 0 can
        // remove the vacuum boundary entirely.
        let lambda_ = alpha_constant(3).unwrap() / 3.0;
        let problem = polytropic_problem(3, 1.0, lambda_, 1.0, 10.0).unwrap();
        let profile = integrate_profile(&problem, defaults::TOL, 0.01).unwrap();
        assert!(profile.first_zero().is_none());
        assert!((profile.eval(10.0).unwrap().0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn polytropic_rejects_bad_input() {
        assert!(polytropic_problem(2, 1.0, 0.0, 1.0, 5.0).is_err());
        assert!(polytropic_problem(3, 0.0, 0.0, 1.0, 5.0).is_err());
        assert!(polytropic_problem(3, 1.0, f64::NAN, 1.0, 5.0).is_err());
        assert!(polytropic_problem(3, 1.0, 0.0, 0.0, 5.0).is_err());
        let problem = polytropic_problem(3, PI, 0.0, 1.0, 8.0).unwrap();
        let profile = integrate_profile(&problem, defaults::TOL, 0.01).unwrap();
        assert!(polytropic_density(&profile, 3, 0.0, 1.0).is_err());
        assert!(polytropic_density(&profile, 3, 1.0, -1.0).is_err());
    }

    #[test]
    fn isothermal_family_has_positive_unbounded_support() {
        let problem = isothermal_problem(1.0, 1.0, 0.0, 5.0).unwrap();
        assert_eq!(problem.m, 1.0);
        let profile = integrate_profile(&problem, defaults::TOL, 0.01).unwrap();
        // e^y > 0: density positive across the whole grid even where y < 0.
        let a = 2.0;
        assert_eq!(isothermal_density(&profile, a, 0.0).unwrap(), 0.25); // e⁰/a²
        for &r in &[1.0, 4.0, 10.0] {
            assert!(isothermal_density(&profile, a, r).unwrap() > 0.0);
        }
        assert!(isothermal_density(&profile, a, 10.1).is_err()); // beyond grid
        assert!(isothermal_density(&profile, 0.0, 1.0).is_err());
        // y(0) = α may be negative.
        assert!(isothermal_problem(1.0, 1.0, -2.0, 5.0).is_ok());
        assert!(isothermal_problem(0.0, 1.0, 0.0, 5.0).is_err());
    }

    #[test]
    fn background_velocity_is_hubble_flow() {
        assert_eq!(background_velocity(2.0, 0.5, 4.0), 1.0);
        // Matches the scale-factor state it came from.
        let state = integrate_scale_factor(1.0, 3, 1.0, 0.0, 0.5, defaults::TOL).unwrap();
        let (a, da) = state.eval(0.5).unwrap();
        assert!(background_velocity(a, da, 1.0) < 0.0); // infalling
    }
}
