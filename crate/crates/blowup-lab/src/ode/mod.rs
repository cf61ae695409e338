//! Singular Emden-type profile ODEs and the collapse scale-factor ODE.
//!
//! The profile equation is
//!
//! ```text
//! ÿ + (m/z) ẏ + f(y) = μ,    y(0) = y0,  ẏ(0) = 0,
//! ```
//!
//! integrated from a Taylor bootstrap at z_start (the z = 0 coefficient is
//! singular but the solution is regular and even to leading orders) by an
//! adaptive Dormand–Prince 5(4) pair. Every accepted node stores value,
//! first, second, and third derivatives, so the dense output is a chain of
//! quintic Hermite segments that is globally C² — smooth enough that
//! quadrature convergence-order measurements on top of it are not polluted
//! by interpolation kinks.
//!
//! The scale-factor equation ä = -λ a^{1-N} shares the stepper; it is a
//! regular IVP, so it starts directly from (a0, a1) and stops either at
//! t_max or when a falls to a collapse floor, reporting a bracket that
//! provably contains the zero of a (a is concave while falling, so the
//! tangent line from the floor crossing undershoots the zero).

mod dopri5;

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use dopri5::{bisect_root, error_norm, hermite_quintic, next_step_size, step};

/// Hard cap on stored nodes per integration; a run that needs more is stuck.
const MAX_NODES: usize = 2_000_000;

/// Nonlinearity f(y) in the profile equation.
///
/// `Power` evaluates coeff·y^p with `powi` when p is a small integer. For
/// non-integer p the odd extension coeff·sign(y)·|y|^p is used, so the RHS
/// stays defined through a first zero (the physical profile is truncated at
/// the zero anyway, and the extension is C¹ there for p > 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    Power { coeff: f64, exponent: f64 },
    Exponential { coeff: f64 },
}

impl Nonlinearity {
    /// f(y).
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            Nonlinearity::Power { coeff, exponent } => coeff * signed_pow(y, exponent),
            Nonlinearity::Exponential { coeff } => coeff * y.exp(),
        }
    }

    /// f'(y); for the odd-extended power this is p·|y|^{p-1} (even in y).
    pub fn deriv(&self, y: f64) -> f64 {
        match *self {
            Nonlinearity::Power { coeff, exponent } => {
                if exponent == 0.0 {
                    0.0
                } else if is_small_integer(exponent) {
                    coeff * exponent * y.powi(exponent as i32 - 1)
                } else {
                    coeff * exponent * y.abs().powf(exponent - 1.0)
                }
            }
            Nonlinearity::Exponential { coeff } => coeff * y.exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        let coeff = match *self {
            Nonlinearity::Power { coeff, exponent } => {
                if !exponent.is_finite() {
                    return Err(Error::Config(format!(
                        "nonlinearity exponent must be finite, got {exponent}"
                    )));
                }
                coeff
            }
            Nonlinearity::Exponential { coeff } => coeff,
        };
        if !coeff.is_finite() {
            return Err(Error::Config(format!(
                "nonlinearity coefficient must be finite, got {coeff}"
            )));
        }
        Ok(())
    }
}

fn is_small_integer(p: f64) -> bool {
    p.fract() == 0.0 && p.abs() <= 60.0
}

/// y^p for integer p via `powi`, odd extension sign(y)·|y|^p otherwise.
fn signed_pow(y: f64, p: f64) -> f64 {
    if is_small_integer(p) {
        y.powi(p as i32)
    } else {
        y.signum() * y.abs().powf(p)
    }
}

/// Problem statement for ÿ + (m/z)ẏ + f(y) = μ from a regular origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmdenProblem {
    /// Damping exponent m ≥ 0 in the (m/z)ẏ term (N-1 for radial problems
    /// in N dimensions).
    pub m: f64,
    /// Nonlinearity f(y).
    pub nonlinearity: Nonlinearity,
    /// Constant forcing μ on the right-hand side.
    pub mu: f64,
    /// Center value y(0).
    pub y0: f64,
    /// Integration horizon.
    pub z_max: f64,
    /// Stop at the first zero of y (the zero is recorded either way).
    pub stop_at_first_zero: bool,
    /// Stop when y reaches this value; required for profiles that diverge at
    /// finite z. Must exceed y0.
    pub y_ceiling: Option<f64>,
}

impl EmdenProblem {
    /// Classic Lane–Emden problem of index n: ÿ + (2/z)ẏ + yⁿ = 0, y(0) = 1.
    /// Integrates past the first zero (which is still recorded) so the full
    /// grid is available; set `stop_at_first_zero` to truncate instead.
    pub fn lane_emden(n: f64, z_max: f64) -> Self {
        EmdenProblem {
            m: 2.0,
            nonlinearity: Nonlinearity::Power { coeff: 1.0, exponent: n },
            mu: 0.0,
            y0: 1.0,
            z_max,
            stop_at_first_zero: false,
            y_ceiling: None,
        }
    }

    /// Check the domain invariants: m ≥ 0, z_max > 0, finite data, and a
    /// ceiling (when present) strictly above y0.
    pub fn validate(&self) -> Result<()> {
        self.nonlinearity.validate()?;
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("m must be ≥ 0 and finite, got {}", self.m)));
        }
        if !self.mu.is_finite() {
            return Err(Error::Config(format!("mu must be finite, got {}", self.mu)));
        }
        if !self.y0.is_finite() {
            return Err(Error::Config(format!("y0 must be finite, got {}", self.y0)));
        }
        if !(self.z_max > 0.0 && self.z_max.is_finite()) {
            return Err(Error::Config(format!("z_max must be > 0, got {}", self.z_max)));
        }
        if let Some(c) = self.y_ceiling {
            if !(c.is_finite() && c > self.y0) {
                return Err(Error::Config(format!(
                    "y_ceiling must be finite and exceed y0 = {}, got {c}",
                    self.y0
                )));
            }
        }
        Ok(())
    }
}

/// Why an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndEvent {
    /// Reached the requested horizon z_max.
    ReachedZMax,
    /// Stopped at the first zero of y (`stop_at_first_zero` was set).
    FirstZero,
    /// y reached the configured ceiling; the profile diverges beyond.
    Ceiling,
}

/// Dense-output node storage: abscissae plus the derivative chain
/// (v, v', v'', v''') of one scalar component. Consecutive nodes define
/// quintic Hermite segments; shared (v, v', v'') node data makes the chain
/// globally C².
#[derive(Debug, Clone, Default)]
struct DenseNodes {
    x: Vec<f64>,
    v: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

impl DenseNodes {
    fn push(&mut self, x: f64, v: f64, d1: f64, d2: f64, d3: f64) {
        self.x.push(x);
        self.v.push(v);
        self.d1.push(d1);
        self.d2.push(d2);
        self.d3.push(d3);
    }

    fn pop(&mut self) {
        self.x.pop();
        self.v.pop();
        self.d1.pop();
        self.d2.pop();
        self.d3.pop();
    }

    fn len(&self) -> usize {
        self.x.len()
    }

    fn last_x(&self) -> f64 {
        *self.x.last().expect("dense grid is never empty")
    }

    /// (value, first derivative) at xq inside segment [x_i, x_{i+1}].
    fn eval_on(&self, i: usize, xq: f64) -> (f64, f64) {
        let (l, r) = (i, i + 1);
        let value = hermite_quintic(
            self.x[l], self.x[r], self.v[l], self.d1[l], self.d2[l], self.v[r], self.d1[r],
            self.d2[r], xq,
        );
        let deriv = hermite_quintic(
            self.x[l], self.x[r], self.d1[l], self.d2[l], self.d3[l], self.d1[r], self.d2[r],
            self.d3[r], xq,
        );
        (value, deriv)
    }

    /// (value, first derivative) at xq, `None` outside [x_0, x_last].
    fn eval(&self, xq: f64) -> Option<(f64, f64)> {
        let n = self.x.len();
        if n == 0 || !(xq >= self.x[0] && xq <= self.x[n - 1]) {
            return None;
        }
        match self.x.binary_search_by(|p| p.partial_cmp(&xq).expect("grid is finite")) {
            Ok(i) => Some((self.v[i], self.d1[i])),
            Err(i) => Some(self.eval_on(i - 1, xq)),
        }
    }
}

/// Integrated profile y(z) on [0, z_end] with C² dense output.
///
/// The grid starts at z = 0 (with ẏ(0) = 0 by construction) and ends at
/// z_max, at the refined ceiling crossing, or just past the first zero —
/// when stopping at a zero the overshoot node is kept so the dense output
/// covers the zero itself.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    nodes: DenseNodes,
    first_zero: Option<f64>,
    end_event: EndEvent,
}

impl RadialProfile {
    /// Node abscissae, starting at exactly 0.
    pub fn grid(&self) -> &[f64] {
        &self.nodes.x
    }

    /// y at the nodes.
    pub fn y_values(&self) -> &[f64] {
        &self.nodes.v
    }

    /// ẏ at the nodes; the first entry is exactly 0.
    pub fn dy_values(&self) -> &[f64] {
        &self.nodes.d1
    }

    /// First zero of y, refined by bisection on the dense output; `None` if
    /// y never changed sign on the computed grid.
    pub fn first_zero(&self) -> Option<f64> {
        self.first_zero
    }

    /// Why the integration ended.
    pub fn end_event(&self) -> EndEvent {
        self.end_event
    }

    /// Last grid point.
    pub fn z_end(&self) -> f64 {
        self.nodes.last_x()
    }

    /// Extent of the physically meaningful profile: the first zero when one
    /// exists, the grid end otherwise.
    pub fn horizon(&self) -> f64 {
        self.first_zero.unwrap_or_else(|| self.z_end())
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True only for a default-constructed profile; integration always
    /// produces at least the origin and handoff nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 0
    }

    /// (y, ẏ) at z via the C² dense output; `Err(Domain)` outside
    /// [0, z_end].
    pub fn eval(&self, z: f64) -> Result<(f64, f64)> {
        self.nodes.eval(z).ok_or_else(|| {
            Error::Domain(format!(
                "profile evaluation at z = {z} outside the computed grid [0, {}]",
                self.z_end()
            ))
        })
    }

    /// Node rows (z, y, ẏ) in grid order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.nodes.len())
            .map(move |i| (self.nodes.x[i], self.nodes.v[i], self.nodes.d1[i]))
    }
}

/// Taylor bootstrap at z_start: the regular solution satisfies
/// y ≈ y0 - (f(y0) - μ)·z²/(2(m+1)), so ÿ(0) = (μ - f(y0))/(m+1); the z = 0
/// coefficient singularity cancels against ẏ(0) = 0. Truncation error is
/// O(z_start⁴).
pub fn taylor_start(problem: &EmdenProblem, z_start: f64) -> Result<(f64, f64)> {
    problem.validate()?;
    if !(z_start > 0.0 && z_start.is_finite()) {
        return Err(Error::Config(format!("z_start must be > 0, got {z_start}")));
    }
    let f0 = problem.nonlinearity.eval(problem.y0);
    if !f0.is_finite() {
        return Err(Error::Config(format!(
            "nonlinearity is not finite at y0 = {}",
            problem.y0
        )));
    }
    let drive = f0 - problem.mu;
    let denom = problem.m + 1.0;
    Ok((
        problem.y0 - drive * z_start * z_start / (2.0 * denom),
        -drive * z_start / denom,
    ))
}

/// One accepted adaptive step from (x, state) with slope f = rhs(x, state).
/// Returns (x_new, state_new, f_new, suggested next h). `Err(Numeric)` when
/// the step size underflows or the RHS keeps producing non-finite samples.
fn advance(
    rhs: &impl Fn(f64, &[f64; 2]) -> [f64; 2],
    x: f64,
    state: &[f64; 2],
    f: &[f64; 2],
    h_init: f64,
    tol: f64,
    what: &str,
) -> Result<(f64, [f64; 2], [f64; 2], f64)> {
    let mut h = h_init;
    loop {
        let (s_new, f_new, err) = step(rhs, x, state, f, h);
        let en = error_norm(state, &s_new, &err, tol);
        if en.is_finite() && en <= 1.0 {
            return Ok((x + h, s_new, f_new, next_step_size(h, en)));
        }
        // Shrink: controller for a finite estimate, hard cut on NaN/inf.
        h = if en.is_finite() { next_step_size(h, en) } else { 0.1 * h };
        if h < 4.0 * f64::EPSILON * x.abs().max(1e-6) {
            return Err(Error::Numeric(format!(
                "{what}: step size underflow at {x} (solution not resolvable in f64)"
            )));
        }
    }
}

/// Integrate an Emden problem with the default Taylor handoff point
/// (min(Z_START, z_max/2)).
pub fn integrate_profile(problem: &EmdenProblem, tol: f64, max_step: f64) -> Result<RadialProfile> {
    integrate_profile_from(problem, tol, max_step, defaults::Z_START.min(0.5 * problem.z_max))
}

/// Integrate an Emden problem with an explicit Taylor handoff point. The
/// solution is insensitive to z_start over orders of magnitude (the Taylor
/// truncation is O(z_start⁴)); exposing it lets that be tested.
pub fn integrate_profile_from(
    problem: &EmdenProblem,
    tol: f64,
    max_step: f64,
    z_start: f64,
) -> Result<RadialProfile> {
    problem.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("tol must be > 0, got {tol}")));
    }
    if !(max_step > 0.0 && max_step.is_finite()) {
        return Err(Error::Config(format!("max_step must be > 0, got {max_step}")));
    }
    if !(z_start > 0.0 && z_start < problem.z_max) {
        return Err(Error::Config(format!(
            "z_start must lie in (0, z_max), got {z_start}"
        )));
    }

    let (m, mu) = (problem.m, problem.mu);
    let nl = problem.nonlinearity;
    let rhs = move |z: f64, s: &[f64; 2]| [s[1], mu - m / z * s[1] - nl.eval(s[0])];
    // d³y/dz³ from differentiating the RHS; stored per node for the C²
    // dense output of ẏ.
    let jerk = move |z: f64, s: &[f64; 2], f: &[f64; 2]| {
        m / (z * z) * s[1] - m / z * f[1] - nl.deriv(s[0]) * s[1]
    };

    let mut nodes = DenseNodes::default();
    // Origin node: ẏ(0) = 0, ÿ(0) = (μ - f(y0))/(m+1), y''' (0) = 0 (the
    // regular solution is even to this order).
    let f0 = nl.eval(problem.y0);
    nodes.push(0.0, problem.y0, 0.0, (mu - f0) / (m + 1.0), 0.0);

    let (ys, dys) = taylor_start(problem, z_start)?;
    let mut state = [ys, dys];
    let mut f = rhs(z_start, &state);
    nodes.push(z_start, ys, dys, f[1], jerk(z_start, &state, &f));

    let mut z = z_start;
    let mut h_next = 0.5 * z_start;
    let mut first_zero = None;
    let mut end_event = EndEvent::ReachedZMax;

    while z < problem.z_max {
        if nodes.len() > MAX_NODES {
            return Err(Error::Numeric(format!(
                "integrate_profile: node budget exceeded at z = {z}"
            )));
        }
        let h_cap = max_step.min(problem.z_max - z);
        let (mut z_new, s_new, f_new, h_sugg) =
            advance(&rhs, z, &state, &f, h_next.min(h_cap), tol, "integrate_profile")?;
        // Snap the final node onto z_max so eval(z_max) is always in range.
        if (problem.z_max - z_new).abs() <= 4.0 * f64::EPSILON * problem.z_max {
            z_new = problem.z_max;
        }
        if z_new == z {
            // Accepted step below f64 resolution of z: pushing it would
            // create a zero-width segment and poison the dense output.
            return Err(Error::Numeric(format!(
                "integrate_profile: step size underflow at z = {z} \
                 (solution not resolvable in f64)"
            )));
        }
        nodes.push(z_new, s_new[0], s_new[1], f_new[1], jerk(z_new, &s_new, &f_new));
        z = z_new;
        state = s_new;
        f = f_new;
        h_next = h_sugg;

        // Events on the just-accepted segment.
        let n = nodes.len();
        let (ya, yb) = (nodes.v[n - 2], nodes.v[n - 1]);
        let (zl, zr) = (nodes.x[n - 2], nodes.x[n - 1]);
        if let Some(ceiling) = problem.y_ceiling {
            if yb >= ceiling {
                // Refine the crossing, drop the overshoot node, and replace
                // it with the crossing node (derivatives from the exact RHS
                // so the truncated dense output stays self-consistent).
                let zc = bisect_root(|x| nodes.eval_on(n - 2, x).0 - ceiling, zl, zr, 0.0);
                let (yc, dyc) = nodes.eval_on(n - 2, zc);
                nodes.pop();
                let sc = [yc, dyc];
                let fc = rhs(zc, &sc);
                nodes.push(zc, yc, dyc, fc[1], jerk(zc, &sc, &fc));
                end_event = EndEvent::Ceiling;
                break;
            }
        }
        if first_zero.is_none() && (ya * yb < 0.0 || (yb == 0.0 && ya != 0.0)) {
            let zc = bisect_root(|x| nodes.eval_on(n - 2, x).0, zl, zr, defaults::ZERO_TOL);
            first_zero = Some(zc);
            if problem.stop_at_first_zero {
                // Keep the overshoot node: dense output covers the zero.
                end_event = EndEvent::FirstZero;
                break;
            }
        }
    }

    Ok(RadialProfile { nodes, first_zero, end_event })
}

/// First zero of the dense-output profile: scan the nodes for a sign change
/// and bisect the interpolant down to |y| ≤ zero_tol (or floating-point
/// resolution, whichever comes first). `None` if y never changes sign.
pub fn first_zero(profile: &RadialProfile, zero_tol: f64) -> Option<f64> {
    let nodes = &profile.nodes;
    for i in 1..nodes.len() {
        let (ya, yb) = (nodes.v[i - 1], nodes.v[i]);
        if ya == 0.0 {
            return Some(nodes.x[i - 1]);
        }
        if ya * yb < 0.0 || yb == 0.0 {
            return Some(bisect_root(
                |x| nodes.eval_on(i - 1, x).0,
                nodes.x[i - 1],
                nodes.x[i],
                zero_tol,
            ));
        }
    }
    None
}

/// Integrated scale factor a(t) on [0, t_end] with C² dense output.
#[derive(Debug, Clone)]
pub struct ScaleFactorState {
    /// Coupling λ in ä = -λ a^{1-N}.
    pub lambda_: f64,
    /// Spatial dimension N ≥ 2.
    pub dim: u32,
    nodes: DenseNodes,
    collapse: Option<(f64, f64)>,
    energy_drift: f64,
}

impl ScaleFactorState {
    /// Node times, starting at exactly 0.
    pub fn t_grid(&self) -> &[f64] {
        &self.nodes.x
    }

    /// a at the nodes.
    pub fn a_values(&self) -> &[f64] {
        &self.nodes.v
    }

    /// ȧ at the nodes.
    pub fn da_values(&self) -> &[f64] {
        &self.nodes.d1
    }

    /// Last stored time: t_max, or the collapse-floor crossing.
    pub fn t_end(&self) -> f64 {
        self.nodes.last_x()
    }

    /// Bracket (t_lo, t_hi) that contains the collapse time a(t) = 0, when
    /// the run hit the collapse floor; `None` if a stayed above it. The
    /// lower end is the floor crossing; the upper end adds a/|ȧ| there
    /// (a is concave while falling, so its zero precedes the tangent's).
    pub fn collapse(&self) -> Option<(f64, f64)> {
        self.collapse
    }

    /// max over nodes of |E(t) - E(0)| / scale, where E is the conserved
    /// energy and scale is the larger of |E(0)| and its constituent terms.
    /// Runs that reach the collapse floor legitimately report large drift:
    /// E is a difference of two terms that both diverge as a → 0, so the
    /// subtraction loses digits even though the trajectory is accurate.
    pub fn energy_drift(&self) -> f64 {
        self.energy_drift
    }

    /// Conserved energy of ä = -λ a^{1-N}: ȧ²/2 - λ/((N-2) a^{N-2}) for
    /// N ≥ 3, and ȧ²/2 + λ ln a for N = 2.
    pub fn energy(lambda_: f64, dim: u32, a: f64, da: f64) -> f64 {
        debug_assert!(dim >= 2, "scale-factor energy needs N ≥ 2");
        let kinetic = 0.5 * da * da;
        if dim == 2 {
            kinetic + lambda_ * a.ln()
        } else {
            kinetic - lambda_ / ((dim as f64 - 2.0) * a.powi(dim as i32 - 2))
        }
    }

    /// (a, ȧ) at t via the C² dense output; `Err(Domain)` outside
    /// [0, t_end].
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        self.nodes.eval(t).ok_or_else(|| {
            Error::Domain(format!(
                "scale-factor evaluation at t = {t} outside the computed range [0, {}]",
                self.t_end()
            ))
        })
    }

    /// Node rows (t, a, ȧ) in grid order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.nodes.len())
            .map(move |i| (self.nodes.x[i], self.nodes.v[i], self.nodes.d1[i]))
    }
}

/// Integrate ä = -λ a^{1-N} from (a, ȧ)(0) = (a0, a1) up to t_max, stopping
/// early (with a collapse bracket) if a falls to A_FLOOR_FACTOR·a0.
///
/// N = 2 is the log-potential case; N ≥ 3 are the power-law potentials.
/// λ may take any sign: λ > 0 is attraction (collapse for suitable data),
/// λ = 0 is free streaming, λ < 0 is repulsion.
pub fn integrate_scale_factor(
    lambda_: f64,
    dim: u32,
    a0: f64,
    a1: f64,
    t_max: f64,
    tol: f64,
) -> Result<ScaleFactorState> {
    if dim < 2 {
        return Err(Error::Config(format!(
            "scale-factor integration needs N ≥ 2, got {dim}"
        )));
    }
    if !lambda_.is_finite() {
        return Err(Error::Config(format!("lambda must be finite, got {lambda_}")));
    }
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(Error::Config(format!("a0 must be > 0, got {a0}")));
    }
    if !a1.is_finite() {
        return Err(Error::Config(format!("a1 must be finite, got {a1}")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Config(format!("t_max must be > 0, got {t_max}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("tol must be > 0, got {tol}")));
    }

    let power = 1 - dim as i32;
    let rhs = move |_t: f64, s: &[f64; 2]| [s[1], -lambda_ * s[0].powi(power)];
    let jerk = move |_t: f64, s: &[f64; 2], _f: &[f64; 2]| {
        -lambda_ * power as f64 * s[0].powi(power - 1) * s[1]
    };
    let a_floor = defaults::A_FLOOR_FACTOR * a0;

    let mut nodes = DenseNodes::default();
    let mut state = [a0, a1];
    let mut f = rhs(0.0, &state);
    if !f[1].is_finite() {
        return Err(Error::Numeric(format!(
            "integrate_scale_factor: acceleration not finite at a0 = {a0}"
        )));
    }
    nodes.push(0.0, a0, a1, f[1], jerk(0.0, &state, &f));

    let mut t = 0.0;
    let mut h_next = 1e-6 * t_max;
    let mut collapse = None;

    while t < t_max {
        if nodes.len() > MAX_NODES {
            return Err(Error::Numeric(format!(
                "integrate_scale_factor: node budget exceeded at t = {t}"
            )));
        }
        let h_cap = t_max - t;
        let (mut t_new, s_new, f_new, h_sugg) =
            advance(&rhs, t, &state, &f, h_next.min(h_cap), tol, "integrate_scale_factor")?;
        if (t_max - t_new).abs() <= 4.0 * f64::EPSILON * t_max {
            t_new = t_max;
        }
        if t_new == t {
            // The accepted step is below f64 time resolution: the dynamics
            // (|ä| ~ λ a^{1-N} near the floor) are now faster than the clock
            // can represent. For a falling solution that means collapse is
            // within one ulp of t; report the tangent bracket from the last
            // resolvable state instead of corrupting the grid with a
            // zero-width segment. (a is concave while falling, so its zero
            // precedes the tangent's.)
            let (ac, dac) = if s_new[0] > 0.0 && s_new[0].is_finite() && s_new[1].is_finite() {
                (s_new[0], s_new[1])
            } else {
                (state[0], state[1])
            };
            if dac < 0.0 {
                collapse = Some((t, t + ac / -dac));
                break;
            }
            return Err(Error::Numeric(format!(
                "integrate_scale_factor: step size underflow at t = {t} \
                 (solution not resolvable in f64)"
            )));
        }
        nodes.push(t_new, s_new[0], s_new[1], f_new[1], jerk(t_new, &s_new, &f_new));
        t = t_new;
        state = s_new;
        f = f_new;
        h_next = h_sugg;

        let n = nodes.len();
        if nodes.v[n - 1] <= a_floor {
            let (tl, tr) = (nodes.x[n - 2], nodes.x[n - 1]);
            let tc = bisect_root(|x| nodes.eval_on(n - 2, x).0 - a_floor, tl, tr, 0.0);
            let (ac, dac) = nodes.eval_on(n - 2, tc);
            nodes.pop();
            let sc = [ac, dac];
            let fc = rhs(tc, &sc);
            nodes.push(tc, ac, dac, fc[1], jerk(tc, &sc, &fc));
            let rate = (-dac).max(f64::MIN_POSITIVE);
            collapse = Some((tc, tc + ac / rate));
            break;
        }
    }

    // Conservation diagnostic over the stored nodes.
    let e0 = ScaleFactorState::energy(lambda_, dim, a0, a1);
    let pot0 = e0 - 0.5 * a1 * a1;
    let scale = e0.abs().max(0.5 * a1 * a1).max(pot0.abs()).max(f64::MIN_POSITIVE);
    let mut energy_drift = 0.0f64;
    for i in 0..nodes.len() {
        let e = ScaleFactorState::energy(lambda_, dim, nodes.v[i], nodes.d1[i]);
        energy_drift = energy_drift.max((e - e0).abs() / scale);
    }

    Ok(ScaleFactorState { lambda_, dim, nodes, collapse, energy_drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::alpha_constant;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn lane_emden(n: f64, z_max: f64) -> EmdenProblem {
        EmdenProblem::lane_emden(n, z_max)
    }

    /// Profile equation of the 4-d blowup family at C = κ = α = 1:
    /// ÿ + (3/z)ẏ + (α(4)/5) y⁴ = 0, y(0) = 1.
    fn theorem1_problem() -> EmdenProblem {
        EmdenProblem {
            m: 3.0,
            nonlinearity: Nonlinearity::Power {
                coeff: alpha_constant(4).unwrap() / 5.0,
                exponent: 4.0,
            },
            mu: 0.0,
            y0: 1.0,
            z_max: 4.0,
            stop_at_first_zero: false,
            y_ceiling: None,
        }
    }

    #[test]
    fn nonlinearity_eval_and_deriv_closed_forms() {
        let p = Nonlinearity::Power { coeff: 2.0, exponent: 4.0 };
        assert_eq!(p.eval(0.5), 2.0 * 0.0625);
        assert_eq!(p.deriv(0.5), 2.0 * 4.0 * 0.125);
        assert_eq!(p.eval(-0.5), 2.0 * 0.0625); // even integer power
        let e = Nonlinearity::Exponential { coeff: 3.0 };
        assert_eq!(e.eval(0.2), 3.0 * 0.2f64.exp());
        assert_eq!(e.deriv(0.2), e.eval(0.2));
        let constant = Nonlinearity::Power { coeff: 5.0, exponent: 0.0 };
        assert_eq!(constant.eval(-2.0), 5.0); // y⁰ = 1 on both sides of 0
        assert_eq!(constant.deriv(0.0), 0.0);
    }

    #[test]
    fn noninteger_power_uses_odd_extension() {
        let p = Nonlinearity::Power { coeff: 1.0, exponent: 2.5 };
        let want = 0.04f64.powf(2.5);
        assert!((p.eval(0.04) - want).abs() < 1e-18);
        assert!((p.eval(-0.04) + want).abs() < 1e-18); // odd in y
        let dwant = 2.5 * 0.04f64.powf(1.5);
        assert!((p.deriv(0.04) - dwant).abs() < 1e-16);
        assert!((p.deriv(-0.04) - dwant).abs() < 1e-16); // even in y
    }

    #[test]
    fn taylor_start_matches_hand_expansion() {
        let problem = EmdenProblem {
            m: 3.0,
            nonlinearity: Nonlinearity::Power { coeff: 1.0, exponent: 4.0 },
            mu: 0.0,
            y0: 1.0,
            z_max: 1.0,
            stop_at_first_zero: false,
            y_ceiling: None,
        };
        let (y, dy) = taylor_start(&problem, 0.1).unwrap();
        assert_eq!(y, 1.0 - 0.1 * 0.1 / 8.0); // y0 - f(y0) z²/(2(m+1))
        assert_eq!(dy, -0.1 / 4.0);
    }

    #[test]
    fn taylor_start_is_flat_at_equilibrium_drive() {
        // μ = f(y0) makes y0 a constant solution; the expansion must agree.
        let problem = EmdenProblem {
            m: 2.0,
            nonlinearity: Nonlinearity::Power { coeff: 3.0, exponent: 2.0 },
            mu: 12.0, // 3·2²
            y0: 2.0,
            z_max: 1.0,
            stop_at_first_zero: false,
            y_ceiling: None,
        };
        let (y, dy) = taylor_start(&problem, 0.5).unwrap();
        assert_eq!(y, 2.0);
        assert_eq!(dy, 0.0);
    }

    #[test]
    fn taylor_start_rejects_bad_handoff() {
        let problem = lane_emden(1.0, 1.0);
        assert!(taylor_start(&problem, 0.0).is_err());
        assert!(taylor_start(&problem, -1.0).is_err());
        assert!(taylor_start(&problem, f64::NAN).is_err());
    }

    #[test]
    fn lane_emden_n0_is_the_exact_parabola() {
        // n = 0: y = 1 - z²/6 exactly; the RHS is polynomial so the only
        // error is roundoff. Continuation past the zero stays on the
        // parabola because y⁰ = 1 holds for negative y too.
        let profile = integrate_profile(&lane_emden(0.0, 3.0), defaults::TOL, 0.05).unwrap();
        let mut z = 0.0;
        while z <= 3.0 {
            let (y, dy) = profile.eval(z).unwrap();
            assert!((y - (1.0 - z * z / 6.0)).abs() < 1e-12, "y off at z = {z}");
            assert!((dy + z / 3.0).abs() < 1e-12, "dy off at z = {z}");
            z += 0.01;
        }
        let z0 = profile.first_zero().expect("parabola crosses zero");
        assert!((z0 - 6.0f64.sqrt()).abs() < 5e-12);
        let z0_refined = first_zero(&profile, defaults::ZERO_TOL).unwrap();
        assert!((z0_refined - 6.0f64.sqrt()).abs() < 5e-12);
        assert_eq!(profile.end_event(), EndEvent::ReachedZMax);
    }

    #[test]
    fn lane_emden_n1_matches_sin_z_over_z() {
        let profile = integrate_profile(&lane_emden(1.0, 6.0), defaults::TOL, 0.01).unwrap();
        let mut z: f64 = 0.05;
        while z <= 6.0 {
            let (y, dy) = profile.eval(z).unwrap();
            let want = z.sin() / z;
            let dwant = z.cos() / z - z.sin() / (z * z);
            assert!((y - want).abs() < 1e-9, "y off at z = {z}");
            assert!((dy - dwant).abs() < 1e-9, "dy off at z = {z}");
            z += 0.0317;
        }
        // y(π/2) = 2/π and the first zero sits at π.
        assert!((profile.eval(FRAC_PI_2).unwrap().0 - 2.0 / PI).abs() < 1e-10);
        assert!((profile.first_zero().unwrap() - PI).abs() < 1e-9);
        assert!((first_zero(&profile, defaults::ZERO_TOL).unwrap() - PI).abs() < 1e-9);
    }

    #[test]
    fn lane_emden_n5_matches_closed_form_and_never_vanishes() {
        // n = 5: y = (1 + z²/3)^{-1/2} > 0 everywhere.
        let profile = integrate_profile(&lane_emden(5.0, 50.0), defaults::TOL, 0.01).unwrap();
        for &z in &[0.5, 1.0, 3.0, 10.0, 25.0, 50.0] {
            let want = (1.0 + z * z / 3.0f64).powf(-0.5);
            assert!((profile.eval(z).unwrap().0 - want).abs() < 1e-9, "y off at z = {z}");
        }
        // (1 + 9/3)^{-1/2} = 1/2 exactly.
        assert!((profile.eval(3.0).unwrap().0 - 0.5).abs() < 1e-9);
        assert!(profile.first_zero().is_none());
        assert!(first_zero(&profile, defaults::ZERO_TOL).is_none());
        assert!(profile.y_values().iter().all(|&y| y > 0.0));
    }

    #[test]
    fn theorem1_profile_matches_frozen_oracle() {
        // Reference values computed with an independent high-order
        // integrator at tolerance 1e-12.
        let profile = integrate_profile(&theorem1_problem(), defaults::TOL, 0.01).unwrap();
        let (y1, dy1) = profile.eval(1.0).unwrap();
        assert!((y1 - 0.5618118322704375).abs() < 1e-8);
        assert!((dy1 - -0.4044189692254060).abs() < 1e-8);
        let (y4, _) = profile.eval(4.0).unwrap();
        assert!((y4 - 0.17494332311566252).abs() < 1e-8);
        // The attractive 4-d profile never vanishes: y⁴ is supercritical in
        // four dimensions, so the profile decays (~z^{-2/3}) without a zero.
        assert!(profile.first_zero().is_none());
        assert!(profile.y_values().iter().all(|&y| y > 0.0));
    }

    #[test]
    fn profile_flow_consistent_with_rk4_oracle() {
        // Advance the dense state at z = 0.5 to z = 1 with an independent
        // fixed-step classic RK4 and compare against the dense output. The
        // oracle's own error at h = 1.25e-4 is far below the band.
        let coeff = alpha_constant(4).unwrap() / 5.0;
        let profile = integrate_profile(&theorem1_problem(), 1e-12, 0.01).unwrap();
        let (y_half, dy_half) = profile.eval(0.5).unwrap();
        let rhs = |z: f64, s: [f64; 2]| [s[1], -3.0 / z * s[1] - coeff * s[0].powi(4)];
        let n = 4000;
        let h = 0.5 / n as f64;
        let mut s = [y_half, dy_half];
        let mut z = 0.5;
        for _ in 0..n {
            let k1 = rhs(z, s);
            let k2 = rhs(z + 0.5 * h, [s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]]);
            let k3 = rhs(z + 0.5 * h, [s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]]);
            let k4 = rhs(z + h, [s[0] + h * k3[0], s[1] + h * k3[1]]);
            s[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            s[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            z += h;
        }
        let (y1, dy1) = profile.eval(1.0).unwrap();
        assert!((s[0] - y1).abs() < 1e-10);
        assert!((s[1] - dy1).abs() < 1e-10);
    }

    #[test]
    fn z_start_choice_does_not_move_the_solution() {
        let problem = theorem1_problem();
        let a = integrate_profile_from(&problem, defaults::TOL, 0.01, 1e-6).unwrap();
        let b = integrate_profile_from(&problem, defaults::TOL, 0.01, 1e-5).unwrap();
        let (ya, dya) = a.eval(1.0).unwrap();
        let (yb, dyb) = b.eval(1.0).unwrap();
        assert!((ya - yb).abs() <= 1e-10, "y differs by {}", (ya - yb).abs());
        assert!((dya - dyb).abs() <= 1e-10, "dy differs by {}", (dya - dyb).abs());
    }

    #[test]
    fn profile_grid_structure() {
        let profile = integrate_profile(&theorem1_problem(), defaults::TOL, 0.01).unwrap();
        let grid = profile.grid();
        assert_eq!(grid[0], 0.0);
        assert_eq!(profile.dy_values()[0], 0.0);
        assert_eq!(profile.y_values()[0], 1.0);
        assert!(grid.windows(2).all(|w| w[0] < w[1]), "grid not strictly increasing");
        assert_eq!(*grid.last().unwrap(), 4.0); // snapped onto z_max
        assert_eq!(profile.z_end(), 4.0);
        assert_eq!(profile.horizon(), 4.0); // no zero: horizon is the grid end
        assert!(profile.len() > 100);
        assert!(!profile.is_empty());
    }

    #[test]
    fn profile_eval_domain_and_node_hits() {
        let profile = integrate_profile(&theorem1_problem(), defaults::TOL, 0.01).unwrap();
        assert!(profile.eval(-0.1).is_err());
        assert!(profile.eval(4.1).is_err());
        assert!(profile.eval(f64::NAN).is_err());
        assert_eq!(profile.eval(0.0).unwrap(), (1.0, 0.0));
        // Exact node hits return the stored values.
        let (z, y, dy) = profile.nodes().nth(profile.len() / 2).unwrap();
        assert_eq!(profile.eval(z).unwrap(), (y, dy));
    }

    #[test]
    fn growing_profile_stops_at_ceiling() {
        // Flipping the quartic's sign (the global/repulsive profile) makes
        // y grow and diverge at finite z; the ceiling event truncates the
        // grid at the refined crossing.
        let mut problem = theorem1_problem();
        problem.nonlinearity = Nonlinearity::Power {
            coeff: -alpha_constant(4).unwrap() / 5.0,
            exponent: 4.0,
        };
        problem.y_ceiling = Some(50.0);
        let profile = integrate_profile(&problem, defaults::TOL, 0.01).unwrap();
        assert_eq!(profile.end_event(), EndEvent::Ceiling);
        let y_end = *profile.y_values().last().unwrap();
        assert!((y_end - 50.0).abs() < 1e-9, "ceiling missed: y_end = {y_end}");
        // Independently computed crossing: z ≈ 0.7975.
        assert!(profile.z_end() > 0.797 && profile.z_end() < 0.798);
        assert!(profile.first_zero().is_none());
    }

    #[test]
    fn first_zero_stop_keeps_the_overshoot_node() {
        let mut problem = lane_emden(1.0, 6.0);
        problem.stop_at_first_zero = true;
        let profile = integrate_profile(&problem, defaults::TOL, 0.01).unwrap();
        assert_eq!(profile.end_event(), EndEvent::FirstZero);
        let z0 = profile.first_zero().unwrap();
        assert!((z0 - PI).abs() < 1e-9);
        assert!(profile.z_end() >= z0, "overshoot node must cover the zero");
        assert_eq!(profile.horizon(), z0);
        // Dense output is defined at the zero itself.
        assert!(profile.eval(z0).unwrap().0.abs() <= 1e-9);
    }

    #[test]
    fn lane_emden_three_halves_zero_matches_literature() {
        // n = 3/2 (non-integer: exercises the odd extension through the
        // overshoot). First zero ξ₁ = 3.65375 in the classical tables.
        let mut problem = lane_emden(1.5, 6.0);
        problem.stop_at_first_zero = true;
        let profile = integrate_profile(&problem, defaults::TOL, 0.01).unwrap();
        let z0 = profile.first_zero().unwrap();
        assert!((z0 - 3.65375).abs() < 2e-4, "ξ₁ = {z0}");
    }

    #[test]
    fn integrate_profile_rejects_bad_problems() {
        let good = theorem1_problem();
        let mut p = good;
        p.z_max = 0.0;
        assert!(integrate_profile(&p, defaults::TOL, 0.01).is_err());
        p = good;
        p.m = -1.0;
        assert!(integrate_profile(&p, defaults::TOL, 0.01).is_err());
        p = good;
        p.mu = f64::INFINITY;
        assert!(integrate_profile(&p, defaults::TOL, 0.01).is_err());
        p = good;
        p.y_ceiling = Some(0.5); // below y0 = 1
        assert!(integrate_profile(&p, defaults::TOL, 0.01).is_err());
        assert!(integrate_profile(&good, 0.0, 0.01).is_err());
        assert!(integrate_profile(&good, defaults::TOL, 0.0).is_err());
        assert!(integrate_profile_from(&good, defaults::TOL, 0.01, 5.0).is_err());
    }

    #[test]
    fn runaway_without_ceiling_is_a_numeric_error() {
        // The growing profile diverges at finite z; without a ceiling the
        // step size underflows chasing the singularity and the failure is
        // explicit rather than silent.
        let mut problem = theorem1_problem();
        problem.nonlinearity = Nonlinearity::Power { coeff: -1.0, exponent: 4.0 };
        let err = integrate_profile(&problem, defaults::TOL, 0.01).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)), "got {err:?}");
    }

    #[test]
    fn scale_factor_is_linear_when_lambda_is_zero() {
        let state = integrate_scale_factor(0.0, 3, 1.0, 2.0, 3.0, defaults::TOL).unwrap();
        let (a, da) = state.eval(3.0).unwrap();
        assert!((a - 7.0).abs() < 1e-13);
        assert!((da - 2.0).abs() < 1e-13);
        let (a, da) = state.eval(1.234).unwrap();
        assert!((a - (1.0 + 2.0 * 1.234)).abs() < 1e-13);
        assert!((da - 2.0).abs() < 1e-13);
        assert!(state.collapse().is_none());
        assert!(state.energy_drift() < 1e-14);
        assert_eq!(state.t_end(), 3.0);
    }

    #[test]
    fn scale_factor_floor_crossing_brackets_a_linear_zero() {
        // a = 1 - t hits the floor just before t = 1; the bracket must
        // contain the exact zero.
        let state = integrate_scale_factor(0.0, 3, 1.0, -1.0, 2.0, defaults::TOL).unwrap();
        let (lo, hi) = state.collapse().expect("floor crossing expected");
        assert!(lo < 1.0 && 1.0 <= hi, "bracket [{lo}, {hi}] misses t = 1");
        assert!(hi - lo < 1e-5);
        assert!(state.t_end() < 1.0);
    }

    #[test]
    fn dust_collapse_matches_cycloid_and_brackets_collapse_time() {
        // λ = 1, N = 3, a(0) = 1, ȧ(0) = 0: the cycloid solution
        // a = cos²η, t = (η + sin η cos η)/√2, collapsing at t = π/(2√2).
        let t_c = PI / (2.0 * SQRT_2);
        let state = integrate_scale_factor(1.0, 3, 1.0, 0.0, 2.0, defaults::TOL).unwrap();
        let (lo, hi) = state.collapse().expect("dust collapse must hit the floor");
        assert!(hi - lo <= 1e-6, "bracket width {}", hi - lo);
        assert!(lo <= t_c && t_c <= hi, "bracket [{lo}, {hi}] misses t_c = {t_c}");
        // Cycloid midpoint η = π/4: a = 1/2 at t = (π/4 + 1/2)/√2.
        let t_half = (PI / 4.0 + 0.5) / SQRT_2;
        assert!((state.eval(t_half).unwrap().0 - 0.5).abs() < 1e-8);
    }

    #[test]
    fn steep_collapse_brackets_stay_finite_when_the_clock_saturates() {
        // N ≥ 4 potentials make ä = -λ a^{1-N} so stiff near the floor that
        // accepted steps stop advancing t in f64; the integrator must then
        // emit a finite tangent bracket, not repeated abscissae or NaN.
        //
        // Closed forms from E = ȧ²/2 - λ/((N-2) a^{N-2}):
        //   N = 4: a = √(1 - t²), collapse at exactly t = 1;
        //   N = 5: t_c = √(3/2)·B(5/6, 1/2)/3 = 0.9146813565019624.
        for (dim, t_c) in [(4u32, 1.0), (5, 0.914_681_356_501_962_4)] {
            let state = integrate_scale_factor(1.0, dim, 1.0, 0.0, 5.0, defaults::TOL).unwrap();
            let (lo, hi) = state.collapse().expect("steep collapse must be detected");
            assert!(lo.is_finite() && hi.is_finite(), "N = {dim}: bracket [{lo}, {hi}]");
            assert!(lo < hi && hi - lo < 1e-6, "N = {dim}: bracket [{lo}, {hi}]");
            // The tangent bracket localizes the *integrated* trajectory's
            // collapse; against the exact time it is good to the global
            // integration accuracy, not the bracket width.
            assert!((lo - t_c).abs() < 1e-9, "N = {dim}: lo = {lo} vs t_c = {t_c}");
            for w in state.t_grid().windows(2) {
                assert!(w[0] < w[1], "N = {dim}: repeated node abscissae");
            }
            for (t, a, da) in state.nodes() {
                assert!(t.is_finite() && a.is_finite() && da.is_finite(), "N = {dim}: NaN node");
            }
        }
    }

    #[test]
    fn dust_collapse_conserves_energy_away_from_the_floor() {
        // Drift is measured away from the collapse floor, where the energy
        // is not a difference of diverging terms (0.99 < 0.9·t_c here).
        let state = integrate_scale_factor(1.0, 3, 1.0, 0.0, 0.99, defaults::TOL).unwrap();
        assert!(state.collapse().is_none());
        assert!(state.energy_drift() <= 1e-8, "drift {}", state.energy_drift());
    }

    #[test]
    fn scale_factor_dim2_uses_log_potential() {
        let state = integrate_scale_factor(1.0, 2, 1.0, 0.3, 0.5, defaults::TOL).unwrap();
        // E = ȧ²/2 + λ ln a is conserved with the log potential; a wrong
        // potential branch would show up as O(1) drift here.
        assert!(state.energy_drift() <= 1e-9, "drift {}", state.energy_drift());
        assert_eq!(ScaleFactorState::energy(1.0, 2, 1.0, 0.0), 0.0); // ln 1 = 0
    }

    #[test]
    fn scale_factor_energy_closed_forms() {
        // N = 3: E = ȧ²/2 - λ/a.
        assert_eq!(ScaleFactorState::energy(1.0, 3, 2.0, 3.0), 4.5 - 0.5);
        // N = 4: E = ȧ²/2 - λ/(2a²).
        assert_eq!(ScaleFactorState::energy(2.0, 4, 2.0, 0.0), -0.25);
    }

    #[test]
    fn scale_factor_rejects_bad_input() {
        assert!(integrate_scale_factor(1.0, 1, 1.0, 0.0, 1.0, 1e-10).is_err());
        assert!(integrate_scale_factor(1.0, 3, 0.0, 0.0, 1.0, 1e-10).is_err());
        assert!(integrate_scale_factor(1.0, 3, -1.0, 0.0, 1.0, 1e-10).is_err());
        assert!(integrate_scale_factor(1.0, 3, 1.0, 0.0, 0.0, 1e-10).is_err());
        assert!(integrate_scale_factor(1.0, 3, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(integrate_scale_factor(f64::NAN, 3, 1.0, 0.0, 1.0, 1e-10).is_err());
        assert!(integrate_scale_factor(1.0, 3, 1.0, f64::NAN, 1.0, 1e-10).is_err());
    }

    #[test]
    fn scale_factor_eval_domain_and_nodes() {
        let state = integrate_scale_factor(1.0, 3, 1.0, 0.0, 1.0, defaults::TOL).unwrap();
        assert!(state.eval(-0.1).is_err());
        assert!(state.eval(1.1).is_err());
        assert_eq!(state.eval(0.0).unwrap(), (1.0, 0.0));
        assert_eq!(state.t_grid()[0], 0.0);
        assert_eq!(*state.t_grid().last().unwrap(), 1.0);
        let (t, a, da) = state.nodes().nth(state.t_grid().len() / 2).unwrap();
        assert_eq!(state.eval(t).unwrap(), (a, da));
    }
}
