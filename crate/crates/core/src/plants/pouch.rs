//! Multi-pouch electrohydraulic actuator with zipping-electrode geometry.
//!
//! Cross-section geometry of one pouch: the fluid-filled (unzipped) region
//! is a lens of two circular arcs with half-angle `alpha` and arc length
//! `l_p`; the remaining film of length `l_e = L_p - l_p` is zipped flat.
//! Film inextensibility and fluid incompressibility fix the fill area
//!
//! ```text
//! A = l_p(alpha)^2 (alpha - sin alpha cos alpha) / (2 alpha^2)
//! ```
//!
//! so `l_p(alpha) = sqrt(2 A alpha^2 / (alpha - sin alpha cos alpha))`.
//! `l_p` shrinks as `alpha` grows: zipping drives `alpha` from the resting
//! half-angle `alpha0` (no zip, zero stroke) towards `pi/2` (maximal zip).
//! Stroke and zipped capacitance
//!
//! ```text
//! x(alpha) = h - (l_p sin(alpha)/alpha + l_e),   h = L_p sin(alpha0)/alpha0
//! C(alpha) = eps_r eps_0 w l_e / (2 t)
//! ```
//!
//! are both strictly increasing in `alpha`, hence C is strictly increasing
//! in stroke. Per pouch with stroke `x_i` and zipped-region charge `Q_i`:
//!
//! ```text
//! m x_i'' + c x_i' + k x_i = m g + (1/2) Q_i^2 C'(x_i) / C(x_i)^2
//! Q_i'    = -Q_i / (R C(x_i)) + u / R
//! ```
//!
//! The electrostatic term is the capacitor-energy gradient -d/dx[Q^2/(2C)];
//! below the zipping threshold voltage the charging source is gated off.
//! `C'(x)` comes from a 2048-point monotone-cubic tabulation of
//! `(x(alpha), C(alpha))`, and `1/C` is kept finite at zero zipping by the
//! smooth floor `C_eff = sqrt(C^2 + C_floor^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::Plant;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;

const TABLE_POINTS: usize = 2048;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "T: crate::scalar::Real")]
pub struct PouchParams<T> {
    /// Undeformed pouch film length L_p, m.
    pub pouch_length: T,
    /// Pouch width, m.
    pub width: T,
    /// Film thickness, m.
    pub film_thickness: T,
    /// Resting half-angle alpha0, rad.
    pub initial_half_angle: T,
    pub relative_permittivity: T,
    /// Moving mass per pouch, kg.
    pub mass: T,
    /// Viscous damping, N s/m.
    pub damping: T,
    /// Elastic stiffness, N/m.
    pub stiffness: T,
    /// Charging circuit resistance, ohm.
    pub resistance: T,
    pub gravity: T,
    /// Zipping threshold voltage, V.
    pub voltage_threshold: T,
    pub n_pouches: usize,
}

impl<T: Real> Default for PouchParams<T> {
    fn default() -> Self {
        PouchParams {
            pouch_length: T::lit(0.02),
            width: T::lit(0.02),
            film_thickness: T::lit(18e-6),
            initial_half_angle: T::lit(0.6),
            relative_permittivity: T::lit(2.7),
            mass: T::lit(0.05),
            damping: T::lit(18.0),
            stiffness: T::lit(400.0),
            resistance: T::lit(6e7),
            gravity: T::lit(9.81),
            voltage_threshold: T::zero(),
            n_pouches: 15,
        }
    }
}

/// Geometric state of one pouch at a given half-angle.
#[derive(Clone, Debug, PartialEq)]
pub struct PouchGeometry<T> {
    pub alpha: T,
    pub area: T,
    /// Arc length of the unzipped film, l_p.
    pub unzipped_arc: T,
    /// Zipped electrode length, l_e.
    pub zipped_length: T,
    pub stroke: T,
    pub capacitance: T,
    /// dC/dx from the monotone tabulation.
    pub capacitance_slope: T,
}

/// Monotone cubic (Fritsch-Carlson) interpolant of capacitance vs stroke.
#[derive(Clone, Debug)]
struct GeometryTable<T> {
    strokes: Vec<T>,
    caps: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> GeometryTable<T> {
    fn build(strokes: Vec<T>, caps: Vec<T>) -> Self {
        let n = strokes.len();
        let h: Vec<T> = (0..n - 1).map(|i| strokes[i + 1] - strokes[i]).collect();
        let delta: Vec<T> = (0..n - 1).map(|i| (caps[i + 1] - caps[i]) / h[i]).collect();
        let mut slopes = vec![T::zero(); n];
        // one-sided three-point endpoint slopes, clamped to preserve shape
        let endpoint = |h0: T, h1: T, d0: T, d1: T| -> T {
            let m = ((h0 + h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if m * d0 <= T::zero() {
                T::zero()
            } else if d0 * d1 <= T::zero() && m.abs() > T::lit(3.0) * d0.abs() {
                T::lit(3.0) * d0
            } else {
                m
            }
        };
        slopes[0] = endpoint(h[0], h[1], delta[0], delta[1]);
        slopes[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= T::zero() {
                slopes[i] = T::zero();
            } else {
                let w1 = T::lit(2.0) * h[i] + h[i - 1];
                let w2 = h[i] + T::lit(2.0) * h[i - 1];
                slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        GeometryTable { strokes, caps, slopes }
    }

    fn segment(&self, x: T) -> usize {
        let n = self.strokes.len();
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.strokes[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `(C, dC/dx)` at a stroke, clamped to the tabulated range.
    fn capacitance(&self, x: T) -> (T, T) {
        let n = self.strokes.len();
        let x = x.clamp(self.strokes[0], self.strokes[n - 1]);
        let i = self.segment(x);
        let h = self.strokes[i + 1] - self.strokes[i];
        let s = (x - self.strokes[i]) / h;
        let (y0, y1) = (self.caps[i], self.caps[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let value = (two * s3 - three * s2 + T::one()) * y0
            + (s3 - two * s2 + s) * m0
            + (three * s2 - two * s3) * y1
            + (s3 - s2) * m1;
        let deriv = ((T::lit(6.0) * s2 - T::lit(6.0) * s) * (y0 - y1)
            + (three * s2 - T::lit(4.0) * s + T::one()) * m0
            + (three * s2 - two * s) * m1)
            / h;
        (value, deriv)
    }
}

#[derive(Clone, Debug)]
pub struct HaselPlant<T> {
    params: PouchParams<T>,
    fill_area: T,
    initial_height: T,
    max_stroke: T,
    cap_floor: T,
    cap_per_length: T,
    table: GeometryTable<T>,
}

impl<T: Real> HaselPlant<T> {
    pub fn new(params: PouchParams<T>) -> Result<Self> {
        let half_pi = T::pi() * T::lit(0.5);
        if !(params.initial_half_angle > T::zero() && params.initial_half_angle < half_pi) {
            return Err(Error::InvalidParameter(
                "initial half-angle must lie in (0, pi/2)".into(),
            ));
        }
        for (name, v) in [
            ("pouch_length", params.pouch_length),
            ("width", params.width),
            ("film_thickness", params.film_thickness),
            ("relative_permittivity", params.relative_permittivity),
            ("mass", params.mass),
            ("damping", params.damping),
            ("stiffness", params.stiffness),
            ("resistance", params.resistance),
            ("gravity", params.gravity),
        ] {
            if !(v > T::zero()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(params.voltage_threshold >= T::zero()) {
            return Err(Error::InvalidParameter("voltage threshold must be nonnegative".into()));
        }
        if params.n_pouches == 0 {
            return Err(Error::InvalidParameter("need at least one pouch".into()));
        }

        let a0 = params.initial_half_angle;
        let fill_area = params.pouch_length * params.pouch_length * T::lit(0.5)
            * (a0 - a0.sin() * a0.cos())
            / (a0 * a0);
        let initial_height = params.pouch_length * a0.sin() / a0;
        let cap_per_length = params.relative_permittivity * T::lit(VACUUM_PERMITTIVITY)
            * params.width
            / (T::lit(2.0) * params.film_thickness);

        let mut plant = HaselPlant {
            params,
            fill_area,
            initial_height,
            max_stroke: T::zero(),
            cap_floor: T::zero(),
            cap_per_length,
            table: GeometryTable {
                strokes: Vec::new(),
                caps: Vec::new(),
                slopes: Vec::new(),
            },
        };

        let mut strokes = Vec::with_capacity(TABLE_POINTS);
        let mut caps = Vec::with_capacity(TABLE_POINTS);
        for i in 0..TABLE_POINTS {
            let frac = T::of_usize(i) / T::of_usize(TABLE_POINTS - 1);
            let alpha = a0 + (half_pi - a0) * frac;
            let (_, le, stroke, cap) = plant.closed_form(alpha);
            let _ = le;
            strokes.push(stroke);
            caps.push(cap);
        }
        for i in 1..strokes.len() {
            if !(strokes[i] > strokes[i - 1]) || !(caps[i] > caps[i - 1]) {
                return Err(Error::InvalidParameter(
                    "pouch geometry tabulation is not strictly monotone".into(),
                ));
            }
        }
        plant.max_stroke = strokes[TABLE_POINTS - 1];
        plant.table = GeometryTable::build(strokes, caps);
        let (_, _, _, floor) = plant.closed_form(a0 + T::lit(1e-6));
        plant.cap_floor = floor;
        Ok(plant)
    }

    pub fn params(&self) -> &PouchParams<T> {
        &self.params
    }

    pub fn fill_area(&self) -> T {
        self.fill_area
    }

    pub fn initial_height(&self) -> T {
        self.initial_height
    }

    /// Stroke of the fully zipped limit (alpha -> pi/2), per pouch.
    pub fn max_stroke(&self) -> T {
        self.max_stroke
    }

    pub fn capacitance_floor(&self) -> T {
        self.cap_floor
    }

    /// `(l_p, l_e, stroke, C)` from the closed forms.
    fn closed_form(&self, alpha: T) -> (T, T, T, T) {
        let lp = alpha
            * (T::lit(2.0) * self.fill_area / (alpha - alpha.sin() * alpha.cos())).sqrt();
        let le = self.params.pouch_length - lp;
        let stroke = self.initial_height - (lp * alpha.sin() / alpha + le);
        let cap = self.cap_per_length * le;
        (lp, le, stroke, cap)
    }

    /// Full geometric state at a half-angle in `[alpha0, pi/2]`.
    pub fn geometry(&self, alpha: T) -> Result<PouchGeometry<T>> {
        let half_pi = T::pi() * T::lit(0.5);
        let margin = T::lit(1e-12);
        if !(alpha >= self.params.initial_half_angle - margin && alpha <= half_pi + margin) {
            return Err(Error::InvalidParameter(format!(
                "half-angle {alpha} outside [{}, {half_pi}]",
                self.params.initial_half_angle
            )));
        }
        let (lp, le, stroke, cap) = self.closed_form(alpha);
        let area = lp * lp * T::lit(0.5) * (alpha - alpha.sin() * alpha.cos()) / (alpha * alpha);
        let (_, slope) = self.table.capacitance(stroke);
        Ok(PouchGeometry {
            alpha,
            area,
            unzipped_arc: lp,
            zipped_length: le,
            stroke,
            capacitance: cap,
            capacitance_slope: slope,
        })
    }

    /// `(C_eff, dC/dx)` at a stroke, with the smooth floor applied.
    pub fn capacitance_at(&self, stroke: T) -> (T, T) {
        let (cap, slope) = self.table.capacitance(stroke);
        let eff = (cap * cap + self.cap_floor * self.cap_floor).sqrt();
        (eff, slope)
    }

    /// Charge rate at frozen stroke; the source is gated below threshold.
    pub fn charge_rate(&self, stroke: T, charge: T, input: T) -> T {
        let (cap_eff, _) = self.capacitance_at(stroke);
        let gated = if input < self.params.voltage_threshold {
            T::zero()
        } else {
            input
        };
        (-charge / cap_eff + gated) / self.params.resistance
    }

    fn pouch_accel(&self, stroke: T, velocity: T, charge: T) -> T {
        let p = &self.params;
        let (cap_eff, slope) = self.capacitance_at(stroke);
        let electro = T::lit(0.5) * charge * charge * slope / (cap_eff * cap_eff);
        (p.mass * p.gravity - p.stiffness * stroke - p.damping * velocity + electro) / p.mass
    }
}

impl<T: Real> Plant<T> for HaselPlant<T> {
    fn state_dim(&self) -> usize {
        3 * self.params.n_pouches
    }

    fn state_names(&self) -> Vec<String> {
        (0..self.params.n_pouches)
            .flat_map(|i| [format!("x{i}"), format!("v{i}"), format!("q{i}")])
            .collect()
    }

    fn rhs(&self, state: &[T], input: T, deriv: &mut [T]) {
        for i in 0..self.params.n_pouches {
            let (x, v, q) = (state[3 * i], state[3 * i + 1], state[3 * i + 2]);
            deriv[3 * i] = v;
            deriv[3 * i + 1] = self.pouch_accel(x, v, q);
            deriv[3 * i + 2] = self.charge_rate(x, q, input);
        }
    }

    fn observable(&self, state: &[T], _input: T) -> T {
        (0..self.params.n_pouches).map(|i| state[3 * i]).sum()
    }

    fn check_state(&self, state: &[T]) -> Result<()> {
        let lower = -T::lit(1e-6);
        for i in 0..self.params.n_pouches {
            let x = state[3 * i];
            if !(x >= lower && x <= self.max_stroke) {
                return Err(Error::SimulationFault(format!(
                    "pouch {i} stroke {x} outside [0, {}]",
                    self.max_stroke
                )));
            }
        }
        Ok(())
    }

    fn min_time_constant(&self, state: &[T]) -> Option<T> {
        let mut tau = T::max_value().unwrap();
        for i in 0..self.params.n_pouches {
            let (cap_eff, _) = self.capacitance_at(state[3 * i]);
            tau = tau.min(self.params.resistance * cap_eff);
        }
        Some(tau)
    }

    /// Per-pouch equilibrium: bisection on
    /// `k x - m g - (1/2) u^2 C'(x) = 0`, then `Q = C_eff(x) u`.
    fn steady_state(&self, input: T) -> Result<Vec<T>> {
        let p = &self.params;
        let gated = if input < p.voltage_threshold { T::zero() } else { input };
        let residual = |x: T| {
            let (cap_eff, slope) = self.capacitance_at(x);
            let q = cap_eff * gated;
            p.stiffness * x - p.mass * p.gravity
                - T::lit(0.5) * q * q * slope / (cap_eff * cap_eff)
        };
        let (mut lo, mut hi) = (T::zero(), self.max_stroke);
        if !(residual(lo) <= T::zero() && residual(hi) >= T::zero()) {
            return Err(Error::NoConvergence(format!(
                "no pouch equilibrium in the stroke range at input {input}"
            )));
        }
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            if residual(mid) > T::zero() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let x = T::lit(0.5) * (lo + hi);
        let (cap_eff, _) = self.capacitance_at(x);
        let q = cap_eff * gated;
        Ok((0..p.n_pouches).flat_map(|_| [x, T::zero(), q]).collect())
    }

    fn residual_scales(&self) -> Vec<T> {
        let p = &self.params;
        let velocity = p.mass * p.gravity / p.damping;
        let charge_rate = T::one() / p.resistance;
        (0..p.n_pouches)
            .flat_map(|_| [velocity, p.gravity, charge_rate])
            .collect()
    }
}
