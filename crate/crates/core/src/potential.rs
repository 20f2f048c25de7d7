//! Potential family: scale-invariant profiles `Vhat(u)` together with
//! the physical parameters (g, hbar, mass convention) and the three
//! coordinate frames the solvers work in.
//!
//! A polynomial profile is `Vhat(u) = sum c_k u^k`, k = 2..2p, confining
//! (`c_2p > 0`, even degree) with a single global minimum at the origin.
//! The sine-Gordon profile `Vhat(u) = sin^2 u` is the one non-polynomial
//! member of the family; it hands out exact Taylor coefficients on
//! demand.
//!
//! Every value here is immutable after construction, so potentials can
//! be shared freely between worker threads.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{rat_from_f64, rat_from_string, rat_int, rat_to_f64, rat_to_string, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Polynomial,
    SineGordon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassConvention {
    /// m = 1/2: kinetic term -hbar^2 d^2/dx^2.
    Half,
    /// m = 1: kinetic term -(hbar^2/2) d^2/dx^2.
    Unit,
}

impl MassConvention {
    pub fn mass(self) -> f64 {
        match self {
            MassConvention::Half => 0.5,
            MassConvention::Unit => 1.0,
        }
    }
}

/// The three frames the dynamics is formulated in: the physical
/// coordinate x, the quantum coordinate v = x / hbar^(1/2) and the
/// classical coordinate u = g x = lambda v.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    PhysicalX,
    QuantumV,
    ClassicalU,
}

#[derive(Debug, Clone)]
pub struct Potential {
    kind: Kind,
    /// Dense profile coefficients, index = power of u (polynomial kind).
    coeffs: Vec<f64>,
    /// Exact mirror of `coeffs` for series recursions.
    exact: Vec<Rat>,
    g: f64,
    hbar: f64,
    mass: MassConvention,
}

impl Potential {
    /// Build and validate a polynomial potential from (power, coefficient)
    /// pairs. Rejects non-confining shapes and profiles with a second
    /// global minimum.
    pub fn polynomial(
        coeffs: &[(usize, f64)],
        g: f64,
        hbar: f64,
        mass: MassConvention,
    ) -> Result<Self> {
        let exact: Vec<(usize, Rat)> = coeffs
            .iter()
            .map(|&(k, c)| {
                rat_from_f64(c)
                    .map(|r| (k, r))
                    .ok_or_else(|| Error::ConfigParse(format!("non-finite coefficient c_{k}")))
            })
            .collect::<Result<_>>()?;
        Self::polynomial_exact(&exact, g, hbar, mass)
    }

    /// Same as [`Potential::polynomial`] with exact rational coefficients.
    pub fn polynomial_exact(
        coeffs: &[(usize, Rat)],
        g: f64,
        hbar: f64,
        mass: MassConvention,
    ) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        validate_params(g, hbar)?;
        let top = coeffs.iter().map(|(k, _)| *k).max().unwrap();
        for &(k, _) in coeffs {
            if k < 2 {
                return Err(Error::ConfigParse(format!(
                    "profile coefficients start at power 2, got c_{k}"
                )));
            }
        }
        let mut exact = vec![Rat::zero(); top + 1];
        for (k, c) in coeffs {
            exact[*k] = exact[*k].clone() + c;
        }
        while exact.last().is_some_and(|c| c.is_zero()) {
            exact.pop();
        }
        if exact.len() < 3 {
            return Err(Error::EmptyCoefficients);
        }
        let degree = exact.len() - 1;
        if degree % 2 != 0 {
            return Err(Error::NonConfining(format!("odd leading degree {degree}")));
        }
        if !exact[degree].is_positive() {
            return Err(Error::NonConfining(format!(
                "leading coefficient c_{degree} <= 0"
            )));
        }
        if exact[2].is_negative() {
            return Err(Error::NonConfining("c_2 < 0".into()));
        }
        let floats: Vec<f64> = exact.iter().map(rat_to_f64).collect();
        let pot = Potential {
            kind: Kind::Polynomial,
            coeffs: floats,
            exact,
            g,
            hbar,
            mass,
        };
        if let Some(u) = pot.find_degenerate_minimum() {
            return Err(Error::DegenerateMinima(u));
        }
        Ok(pot)
    }

    pub fn sine_gordon(g: f64, hbar: f64, mass: MassConvention) -> Result<Self> {
        validate_params(g, hbar)?;
        Ok(Potential {
            kind: Kind::SineGordon,
            coeffs: vec![],
            exact: vec![],
            g,
            hbar,
            mass,
        })
    }

    /// Quartic profile u^2 + u^4, the workhorse example.
    pub fn quartic_aho(g: f64, hbar: f64) -> Result<Self> {
        Self::polynomial(&[(2, 1.0), (4, 1.0)], g, hbar, MassConvention::Half)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass_convention(&self) -> MassConvention {
        self.mass
    }

    /// Effective coupling lambda = hbar^(1/2) g; derived, never stored.
    pub fn lambda(&self) -> f64 {
        self.hbar.sqrt() * self.g
    }

    pub fn lambda_sq(&self) -> f64 {
        self.hbar * self.g * self.g
    }

    /// Profile degree 2p (polynomial kind only).
    pub fn degree(&self) -> Result<usize> {
        match self.kind {
            Kind::Polynomial => Ok(self.coeffs.len() - 1),
            Kind::SineGordon => Err(Error::NonPolynomial),
        }
    }

    /// Half-degree p of a polynomial profile.
    pub fn half_degree(&self) -> Result<usize> {
        Ok(self.degree()? / 2)
    }

    /// Profile coefficient c_k as a float (0 beyond the stored degree).
    /// For sine-Gordon this is the Taylor coefficient of sin^2 u.
    pub fn coeff(&self, k: usize) -> f64 {
        match self.kind {
            Kind::Polynomial => self.coeffs.get(k).copied().unwrap_or(0.0),
            Kind::SineGordon => rat_to_f64(&self.exact_coeff(k)),
        }
    }

    /// Exact profile coefficient c_k. Polynomial kind returns the stored
    /// mirror; sine-Gordon computes sin^2 u = sum (-1)^(m+1) 2^(2m-1)/(2m)! u^(2m).
    pub fn exact_coeff(&self, k: usize) -> Rat {
        match self.kind {
            Kind::Polynomial => self.exact.get(k).cloned().unwrap_or_else(Rat::zero),
            Kind::SineGordon => {
                if k < 2 || k % 2 != 0 {
                    return Rat::zero();
                }
                let m = (k / 2) as i64;
                let mut c = rat_int(if m % 2 == 1 { 1 } else { -1 });
                // 2^(2m-1) / (2m)!
                c *= rat_int(2).pow(2 * m as i32 - 1);
                let mut fact = rat_int(1);
                for i in 2..=(2 * m) {
                    fact *= rat_int(i);
                }
                c / fact
            }
        }
    }

    /// True when c_2 is exactly one (the normalization the quantum-frame
    /// series requires).
    pub fn is_normalized(&self) -> bool {
        self.exact_coeff(2).is_one()
    }

    /// True when the profile is even in u.
    pub fn is_even(&self) -> bool {
        match self.kind {
            Kind::SineGordon => true,
            Kind::Polynomial => self
                .exact
                .iter()
                .enumerate()
                .all(|(k, c)| k % 2 == 0 || c.is_zero()),
        }
    }

    /// Vhat(u).
    pub fn vhat(&self, u: f64) -> f64 {
        self.vhat_deriv(u, 0)
    }

    /// d^order Vhat / du^order, order in 0..=3.
    pub fn vhat_deriv(&self, u: f64, order: usize) -> f64 {
        assert!(order <= 3, "derivative order must be 0..=3");
        match self.kind {
            Kind::SineGordon => {
                // V = sin^2 u, V' = sin 2u, V'' = 2 cos 2u, V''' = -4 sin 2u
                match order {
                    0 => u.sin().powi(2),
                    1 => (2.0 * u).sin(),
                    2 => 2.0 * (2.0 * u).cos(),
                    _ => -4.0 * (2.0 * u).sin(),
                }
            }
            Kind::Polynomial => {
                let mut acc = 0.0;
                for k in (order..self.coeffs.len()).rev() {
                    let mut c = self.coeffs[k];
                    for j in 0..order {
                        c *= (k - j) as f64;
                    }
                    acc = acc * u + c;
                }
                acc
            }
        }
    }

    /// Vhat''(0): squared frequency of the fluctuation operator tail in
    /// the unit-mass convention.
    pub fn omega_sq(&self) -> f64 {
        self.vhat_deriv(0.0, 2)
    }

    /// Physical potential V(x) = Vhat(g x) / g^2; reduces to the
    /// harmonic profile c_2 x^2 (+ higher terms scaled by g) as g -> 0.
    pub fn physical(&self, x: f64) -> f64 {
        if self.g == 0.0 {
            match self.kind {
                Kind::SineGordon => return x * x, // sin^2(gx)/g^2 -> x^2
                Kind::Polynomial => return self.coeff(2) * x * x,
            }
        }
        self.vhat(self.g * x) / (self.g * self.g)
    }

    /// Frame conversion for coordinate values. The classical frame is
    /// only reachable for g > 0.
    pub fn convert(&self, value: f64, from: Frame, to: Frame) -> f64 {
        let x = match from {
            Frame::PhysicalX => value,
            Frame::QuantumV => value * self.hbar.sqrt(),
            Frame::ClassicalU => value / self.g,
        };
        match to {
            Frame::PhysicalX => x,
            Frame::QuantumV => x / self.hbar.sqrt(),
            Frame::ClassicalU => x * self.g,
        }
    }

    /// Scan for a second global minimum: dense sampling plus golden
    /// section polish. Returns its location if one exists.
    fn find_degenerate_minimum(&self) -> Option<f64> {
        let degree = self.coeffs.len() - 1;
        let top = self.coeffs[degree];
        let mut bound: f64 = 1.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k < degree && *c != 0.0 {
                bound = bound.max(2.0 * (c.abs() / top).powf(1.0 / (degree - k) as f64));
            }
        }
        let n = 4096;
        let scale = self
            .coeffs
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
            .max(1.0);
        let tol = 1e-10 * scale;
        let h = 2.0 * bound / n as f64;
        let mut prev2 = self.vhat(-bound);
        let mut prev1 = self.vhat(-bound + h);
        for i in 2..=n {
            let u = -bound + i as f64 * h;
            let v = self.vhat(u);
            // interior local minimum triple
            if prev1 <= prev2 && prev1 <= v {
                let a = u - 2.0 * h;
                let b = u;
                let (u_min, v_min) = golden_min(|t| self.vhat(t), a, b);
                if u_min.abs() > 1e-7 * bound && v_min < tol * (1.0 + u_min.abs().powi(degree as i32)) {
                    return Some(u_min);
                }
            }
            prev2 = prev1;
            prev1 = v;
        }
        None
    }

    /// Serialize to the canonical JSON object. With `exact`, profile
    /// coefficients are rendered as "num/den" strings.
    pub fn to_json(&self, exact: bool) -> Value {
        let kind = match self.kind {
            Kind::Polynomial => "polynomial",
            Kind::SineGordon => "sine_gordon",
        };
        let mass = match self.mass {
            MassConvention::Half => "half",
            MassConvention::Unit => "unit",
        };
        let mut coeffs = serde_json::Map::new();
        if self.kind == Kind::Polynomial {
            for (k, c) in self.exact.iter().enumerate() {
                if !c.is_zero() {
                    let key = k.to_string();
                    if exact {
                        coeffs.insert(key, Value::String(rat_to_string(c)));
                    } else {
                        coeffs.insert(key, json!(rat_to_f64(c)));
                    }
                }
            }
        }
        json!({
            "kind": kind,
            "coeffs": coeffs,
            "g": self.g,
            "hbar": self.hbar,
            "mass": mass,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::ConfigParse(format!("invalid potential JSON: {e}")))?;
        Self::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::ConfigParse("potential JSON must be an object".into()))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::ConfigParse("missing 'kind'".into()))?;
        let g = obj
            .get("g")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::ConfigParse("missing numeric 'g'".into()))?;
        let hbar = obj.get("hbar").and_then(Value::as_f64).unwrap_or(1.0);
        let mass = match obj.get("mass").and_then(Value::as_str).unwrap_or("half") {
            "half" => MassConvention::Half,
            "unit" => MassConvention::Unit,
            other => {
                return Err(Error::ConfigParse(format!(
                    "mass must be 'half' or 'unit', got '{other}'"
                )))
            }
        };
        match kind {
            "sine_gordon" => Self::sine_gordon(g, hbar, mass),
            "polynomial" => {
                let coeffs = obj
                    .get("coeffs")
                    .and_then(Value::as_object)
                    .ok_or_else(|| Error::ConfigParse("missing 'coeffs' map".into()))?;
                let mut parsed: BTreeMap<usize, Rat> = BTreeMap::new();
                for (key, val) in coeffs {
                    let k: usize = key.parse().map_err(|_| {
                        Error::ConfigParse(format!("coefficient key '{key}' is not a power"))
                    })?;
                    let r = match val {
                        Value::String(s) => rat_from_string(s)?,
                        Value::Number(n) => {
                            let f = n.as_f64().ok_or_else(|| {
                                Error::ConfigParse(format!("coefficient {key} is not finite"))
                            })?;
                            rat_from_f64(f).ok_or_else(|| {
                                Error::ConfigParse(format!("coefficient {key} is not finite"))
                            })?
                        }
                        _ => {
                            return Err(Error::ConfigParse(format!(
                                "coefficient {key} must be a number or 'num/den' string"
                            )))
                        }
                    };
                    parsed.insert(k, r);
                }
                let pairs: Vec<(usize, Rat)> = parsed.into_iter().collect();
                Self::polynomial_exact(&pairs, g, hbar, mass)
            }
            other => Err(Error::ConfigParse(format!("unknown kind '{other}'"))),
        }
    }
}

fn validate_params(g: f64, hbar: f64) -> Result<()> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::ConfigParse(format!("g must be >= 0, got {g}")));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::ConfigParse(format!("hbar must be > 0, got {hbar}")));
    }
    Ok(())
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-14 * (1.0 + a.abs() + b.abs()) {
            break;
        }
    }
    let u = 0.5 * (a + b);
    (u, f(u))
}
