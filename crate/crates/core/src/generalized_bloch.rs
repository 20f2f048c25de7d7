//! Semiclassical expansion in the classical frame.
//!
//! In the classical coordinate u the log-derivative `Z(u)` obeys
//!
//! ```text
//!     lam^2 Z' - Z^2 = lam^2 eps(lam) - Vhat(u) ,
//! ```
//!
//! whose expansion `Z = sum lam^n Z_n(u)` starts from the zero-energy
//! classical momentum `Z_0 = sign(u) sqrt(Vhat)` and proceeds through
//!
//! ```text
//!     Z_n = (Z_(n-2)' - eps_(n-2) - sum_(k=1)^(n-1) Z_k Z_(n-k)) / (2 Z_0) .
//! ```
//!
//! Terms beyond the closed forms are evaluated pointwise with truncated
//! Taylor arithmetic (see [`crate::jet`]), so the nested derivatives in
//! the recursion carry only rounding error. The integral of the second
//! order term has the closed form
//!
//! ```text
//!     int Z_2 du = (1/4) log Vhat - (eps_0 / 2) int du / sqrt(Vhat) ,
//! ```
//!
//! the logarithm of the one-loop determinant; both routes are exposed
//! here and cross-checked in the tests.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::{rat_to_f64, Rat};
use crate::jet::Jet;
use crate::potential::{Kind, Potential};
use crate::quad::{integrate, QuadOpts};

/// Evaluable semiclassical series.
#[derive(Debug, Clone)]
pub struct GbSeries {
    pot: Potential,
    eps: Vec<f64>,
    order: usize,
}

/// Build the series consuming energy coefficients from the
/// quantum-frame expansion.
pub fn gb_series(pot: &Potential, eps: &[Rat], order: usize) -> Result<GbSeries> {
    let eps_f: Vec<f64> = eps.iter().map(rat_to_f64).collect();
    gb_series_f64(pot, &eps_f, order)
}

/// Build the series from plain floating-point energy coefficients;
/// used for pure-power profiles where only eps_0 exists and must be
/// supplied from outside.
pub fn gb_series_f64(pot: &Potential, eps: &[f64], order: usize) -> Result<GbSeries> {
    if order >= 2 && eps.len() < order - 1 {
        return Err(Error::MissingEps(order - 2));
    }
    Ok(GbSeries {
        pot: pot.clone(),
        eps: eps.to_vec(),
        order,
    })
}

impl GbSeries {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn potential(&self) -> &Potential {
        &self.pot
    }

    /// All terms Z_0(u) .. Z_order(u) at a point.
    pub fn terms_at(&self, u: f64) -> Result<Vec<f64>> {
        Ok(self.jets_at(u, 0)?.iter().map(Jet::value).collect())
    }

    pub fn term_at(&self, n: usize, u: f64) -> Result<f64> {
        assert!(n <= self.order);
        Ok(self.jets_at(u, 0)?[n].value())
    }

    /// Terms together with their first u-derivatives (used by residual
    /// checks).
    pub fn terms_with_derivative(&self, u: f64) -> Result<Vec<(f64, f64)>> {
        Ok(self
            .jets_at(u, 1)?
            .iter()
            .map(|j| (j.value(), j.derivative(1)))
            .collect())
    }

    fn jets_at(&self, u: f64, extra_depth: usize) -> Result<Vec<Jet>> {
        if u == 0.0 && self.order >= 2 {
            return Err(Error::OriginSingularity);
        }
        let depth = self.order + 2 + extra_depth;
        let z0 = match self.pot.kind() {
            Kind::SineGordon => Jet::variable(u, depth).sin_cos().0,
            Kind::Polynomial => {
                let vhat = vhat_jet(&self.pot, u, depth);
                if vhat.value() <= 0.0 {
                    return Err(Error::PotentialZeroInside(u));
                }
                let s = vhat.sqrt();
                if u > 0.0 {
                    s
                } else {
                    s.scale(-1.0)
                }
            }
        };
        let mut z: Vec<Jet> = Vec::with_capacity(self.order + 1);
        z.push(z0);
        if self.order >= 1 {
            z.push(Jet::constant(0.0, depth));
        }
        for n in 2..=self.order {
            let mut num = z[n - 2].deriv().add_scalar(-self.eps[n - 2]);
            for k in 1..n {
                num = num.sub(&z[k].mul(&z[n - k]));
            }
            z.push(num.div(&z[0].scale(2.0)));
        }
        Ok(z)
    }
}

fn vhat_jet(pot: &Potential, u: f64, depth: usize) -> Jet {
    match pot.kind() {
        Kind::SineGordon => {
            let (s, _) = Jet::variable(u, depth).sin_cos();
            s.mul(&s)
        }
        Kind::Polynomial => {
            let degree = pot.degree().expect("polynomial");
            let coeffs: Vec<f64> = (0..=degree).map(|k| pot.coeff(k)).collect();
            Jet::variable(u, depth).poly_eval(&coeffs)
        }
    }
}

/// Closed-form leading term: the zero-energy classical momentum with
/// the square-integrability sign convention.
pub fn leading_closed(pot: &Potential, u: f64) -> f64 {
    match pot.kind() {
        Kind::SineGordon => u.sin(),
        Kind::Polynomial => u.signum() * pot.vhat(u).sqrt(),
    }
}

/// Closed-form second-order term Vhat'/(4 Vhat) - eps_0 / (2 Z_0).
pub fn second_order_closed(pot: &Potential, eps0: f64, u: f64) -> f64 {
    let z0 = leading_closed(pot, u);
    pot.vhat_deriv(u, 1) / (4.0 * pot.vhat(u)) - eps0 / (2.0 * z0)
}

/// Regularized integrand of the determinant integral for the
/// pole-cancelling branch (c_2 = 1, eps_0 = 1): writing
/// Vhat = u^2 W(u), delta = W - 1,
///
///   Z_2 = delta / (2 u sqrt(W) (sqrt(W) + 1)) + W' / (4 W)
///
/// with no subtractive cancellation near the origin.
fn z2_regular(pot: &Potential, u: f64) -> f64 {
    let (w, dw, delta) = profile_w(pot, u);
    let sw = w.sqrt();
    delta / (2.0 * u * sw * (sw + 1.0)) + dw / (4.0 * w)
}

/// W = Vhat/u^2, W' and delta = W - 1 without forming Vhat/u^2 naively.
fn profile_w(pot: &Potential, u: f64) -> (f64, f64, f64) {
    match pot.kind() {
        Kind::SineGordon => {
            let s = u.sin() / u;
            let w = s * s;
            // W' = (sin 2u - 2 sin^2(u)/u) / u^2
            let dw = ((2.0 * u).sin() - 2.0 * u.sin().powi(2) / u) / (u * u);
            (w, dw, w - 1.0)
        }
        Kind::Polynomial => {
            let degree = pot.degree().expect("polynomial");
            let mut delta = 0.0;
            let mut dw = 0.0;
            if degree >= 3 {
                for k in (3..=degree).rev() {
                    let c = pot.coeff(k);
                    delta = delta * u + c;
                    dw = dw * u + c * (k - 2) as f64;
                }
                delta *= u;
            }
            let w = pot.coeff(2) + delta;
            (w, dw, delta + (pot.coeff(2) - 1.0))
        }
    }
}

/// log determinant: integral of Z_2 from the origin (regular branch) or
/// from an explicit cutoff. The regular branch needs c_2 = 1 and
/// eps_0 = 1 so the two 1/(2u) poles cancel.
pub fn det_log(pot: &Potential, eps0: f64, u: f64, cutoff: Option<f64>) -> Result<f64> {
    if u <= 0.0 {
        return Err(Error::QuadratureFailure("det_log needs u > 0".into()));
    }
    let opts = QuadOpts::with_tol(1e-13);
    match cutoff {
        None => {
            if !pot.is_normalized() || eps0 != 1.0 {
                return Err(Error::CutoffRequired);
            }
            let r = integrate(|t| z2_regular(pot, t), 0.0, u, &opts)?;
            Ok(r.value)
        }
        Some(u_min) => {
            if !(u_min > 0.0 && u_min < u) {
                return Err(Error::ConfigParse(format!(
                    "cutoff must satisfy 0 < cutoff < u, got {u_min}"
                )));
            }
            let r = integrate(|t| second_order_closed(pot, eps0, t), u_min, u, &opts)?;
            Ok(r.value)
        }
    }
}

/// The closed-form side of the determinant identity, regularized the
/// same way: (1/4) log Vhat(u) - (1/2) [ int_0^u (1/sqrt(Vhat) - 1/t) dt
/// + log u ]. Defined on the pole-cancelling branch.
pub fn det_log_identity_rhs(pot: &Potential, u: f64) -> Result<f64> {
    if u <= 0.0 {
        return Err(Error::QuadratureFailure("identity needs u > 0".into()));
    }
    if !pot.is_normalized() {
        return Err(Error::CutoffRequired);
    }
    let opts = QuadOpts::with_tol(1e-13);
    let sub = integrate(
        |t| {
            let (w, _, delta) = profile_w(pot, t);
            let sw = w.sqrt();
            -delta / (t * sw * (1.0 + sw))
        },
        0.0,
        u,
        &opts,
    )?;
    Ok(0.25 * pot.vhat(u).ln() - 0.5 * (sub.value + u.ln()))
}

// ---------------------------------------------------------------------------
// Large-u asymptotics with symbolic dependence tracking.
// ---------------------------------------------------------------------------

/// Polynomial in (lam^2, eps) with float coefficients; the exponent
/// pair is the key. Used to track which asymptotic coefficients depend
/// on the coupling and on the energy.
#[derive(Debug, Clone, Default)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    fn constant(c: f64) -> Self {
        let mut p = Poly2::default();
        if c != 0.0 {
            p.terms.insert((0, 0), c);
        }
        p
    }

    fn add_assign(&mut self, other: &Poly2, scale: f64) {
        for (k, v) in &other.terms {
            let e = self.terms.entry(*k).or_insert(0.0);
            *e += v * scale;
            if e.abs() < 1e-300 {
                self.terms.remove(k);
            }
        }
    }

    fn mul_lam2(&self) -> Poly2 {
        let mut out = Poly2::default();
        for ((l, e), v) in &self.terms {
            out.terms.insert((l + 1, *e), *v);
        }
        out
    }

    fn mul_eps(&self) -> Poly2 {
        let mut out = Poly2::default();
        for ((l, e), v) in &self.terms {
            out.terms.insert((*l, e + 1), *v);
        }
        out
    }

    fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::default();
        for ((l1, e1), v1) in &self.terms {
            for ((l2, e2), v2) in &other.terms {
                let key = (l1 + l2, e1 + e2);
                let e = out.terms.entry(key).or_insert(0.0);
                *e += v1 * v2;
            }
        }
        out.terms.retain(|_, v| v.abs() > 1e-300);
        out
    }

    fn scale(&self, s: f64) -> Poly2 {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= s;
        }
        out
    }

    pub fn eval(&self, lam2: f64, eps: f64) -> f64 {
        self.terms
            .iter()
            .map(|((l, e), v)| v * lam2.powi(*l as i32) * eps.powi(*e as i32))
            .sum()
    }

    pub fn lambda_free(&self) -> bool {
        self.terms.keys().all(|(l, _)| *l == 0)
    }

    pub fn eps_free(&self) -> bool {
        self.terms.keys().all(|(_, e)| *e == 0)
    }
}

#[derive(Debug, Clone)]
pub struct AsymCoeff {
    /// Power of u this coefficient multiplies.
    pub power: i64,
    /// Numeric value at the supplied (lambda, eps).
    pub value: f64,
    /// True when the coefficient carries no coupling dependence.
    pub lambda_free: bool,
    /// True when the coefficient carries no energy dependence.
    pub eps_free: bool,
    /// Symbolic form for re-evaluation at perturbed parameters.
    pub symbolic: Poly2,
}

#[derive(Debug, Clone)]
pub struct AsymptoticTable {
    pub half_degree: usize,
    /// Coefficients in descending powers of u starting at u^p.
    pub coeffs: Vec<AsymCoeff>,
}

impl AsymptoticTable {
    pub fn coeff(&self, power: i64) -> Option<&AsymCoeff> {
        self.coeffs.iter().find(|c| c.power == power)
    }
}

/// Descending-power solution of the classical-frame equation: the
/// ansatz Z = sum_(j<=p) c_j u^j is substituted and powers of u matched
/// from u^(2p) downward; the coefficient of u^(m-p) is produced by the
/// u^m equation. Coefficients are kept symbolic in (lam^2, eps) so the
/// energy-independence structure can be verified rather than assumed.
pub fn large_u_series(
    pot: &Potential,
    depth: usize,
    eps: f64,
    lambda: f64,
    positive_u: bool,
) -> Result<AsymptoticTable> {
    let degree = pot.degree().map_err(|_| Error::NonPolynomial)?;
    let p = (degree / 2) as i64;
    if depth < degree + 1 {
        return Err(Error::ConfigParse(format!(
            "asymptotic depth must be at least 2p + 1 = {}",
            degree + 1
        )));
    }
    let v = |k: i64| -> f64 {
        if k >= 2 && k <= degree as i64 {
            pot.coeff(k as usize)
        } else {
            0.0
        }
    };
    let sigma = if positive_u || p % 2 == 1 { 1.0 } else { -1.0 };
    let c_p = sigma * v(2 * p).sqrt();

    let mut coeffs: BTreeMap<i64, Poly2> = BTreeMap::new();
    coeffs.insert(p, Poly2::constant(c_p));

    for step in 1..depth as i64 {
        let m = 2 * p - step; // equation order
        let t = m - p; // index being solved for
        let mut rhs = Poly2::constant(v(m));
        if m + 1 <= p {
            if let Some(c_next) = coeffs.get(&(m + 1)) {
                rhs.add_assign(&c_next.mul_lam2(), (m + 1) as f64);
            }
        }
        if m == 0 {
            rhs.add_assign(&Poly2::constant(1.0).mul_lam2().mul_eps(), -1.0);
        }
        // inner products c_j c_(m-j) with both indices strictly inside (t, p)
        let lo = (t + 1).max(m - (p - 1));
        let hi = (p - 1).min(m - t - 1);
        let mut inner = Poly2::default();
        let mut j = lo;
        while j <= hi {
            if let (Some(a), Some(b)) = (coeffs.get(&j), coeffs.get(&(m - j))) {
                inner.add_assign(&a.mul(b), 1.0);
            }
            j += 1;
        }
        rhs.add_assign(&inner, -1.0);
        coeffs.insert(t, rhs.scale(1.0 / (2.0 * c_p)));
    }

    let lam2 = lambda * lambda;
    let mut table = Vec::with_capacity(depth);
    for j in ((p - depth as i64 + 1)..=p).rev() {
        let sym = coeffs.remove(&j).unwrap_or_default();
        table.push(AsymCoeff {
            power: j,
            value: sym.eval(lam2, eps),
            lambda_free: sym.lambda_free(),
            eps_free: sym.eps_free(),
            symbolic: sym,
        });
    }
    Ok(AsymptoticTable {
        half_degree: p as usize,
        coeffs: table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::MassConvention;
    use crate::riccati_bloch::rb_ground_series;

    fn quartic() -> Potential {
        Potential::quartic_aho(1.0, 1.0).unwrap()
    }

    fn quartic_series(order: usize) -> GbSeries {
        let pot = quartic();
        let rb = rb_ground_series(&pot, order).unwrap();
        gb_series(&pot, rb.energy_coeffs(), order).unwrap()
    }

    #[test]
    fn closed_forms_quartic() {
        let gb = quartic_series(2);
        for &u in &[0.2, 0.7, 1.3, 2.5, 3.0, -0.4, -2.1] {
            let z = gb.terms_at(u).unwrap();
            let z0_expect = u * (1.0 + u * u).sqrt();
            assert!(
                (z[0] - z0_expect).abs() < 1e-13 * z0_expect.abs().max(1.0),
                "u={u}"
            );
            assert_eq!(z[1], 0.0);
            // Z_2 = (1/4) d/du log(u^2 (1+u^2)) - 1 / (2 u sqrt(1+u^2))
            let z2_expect = 0.25 * (2.0 / u + 2.0 * u / (1.0 + u * u))
                - 1.0 / (2.0 * u * (1.0 + u * u).sqrt());
            assert!(
                (z[2] - z2_expect).abs() < 1e-12 * z2_expect.abs().max(1.0),
                "u={u}: {} vs {z2_expect}",
                z[2]
            );
            assert!(
                (second_order_closed(&quartic(), 1.0, u) - z2_expect).abs() < 1e-13,
                "closed-form helper at u={u}"
            );
        }
    }

    #[test]
    fn closed_forms_sine_gordon() {
        let pot = Potential::sine_gordon(1.0, 1.0, MassConvention::Half).unwrap();
        let rb = rb_ground_series(&pot, 2).unwrap();
        let gb = gb_series(&pot, rb.energy_coeffs(), 2).unwrap();
        for &u in &[0.2, 0.9, 1.8, 3.0] {
            let z = gb.terms_at(u).unwrap();
            assert!((z[0] - u.sin()).abs() < 1e-14, "u={u}");
            let z2_expect = 0.5 / u.tan() - 0.5 / u.sin();
            assert!(
                (z[2] - z2_expect).abs() < 1e-13,
                "u={u}: {} vs {z2_expect}",
                z[2]
            );
        }
    }

    #[test]
    fn closed_forms_pure_quartic() {
        // pure power: no coupling series, eps_0 must be supplied
        let pot = Potential::polynomial(&[(4, 1.0)], 1.0, 1.0, MassConvention::Half).unwrap();
        let eps0 = 1.0604;
        let gb = gb_series_f64(&pot, &[eps0], 2).unwrap();
        for &u in &[0.2, 1.0, 3.0] {
            let z = gb.terms_at(u).unwrap();
            assert!((z[0] - u * u).abs() < 1e-13, "u={u}");
            let z2_expect = 1.0 / u - eps0 / (2.0 * u * u);
            assert!((z[2] - z2_expect).abs() < 1e-12, "u={u}");
        }
        // negative u: Z_0 = u|u|, Z_2 = 1/u - eps0/(2 u |u|)
        let z = gb.terms_at(-1.5).unwrap();
        assert!((z[0] - (-2.25)).abs() < 1e-13);
        assert!((z[2] - (1.0 / -1.5 - eps0 / (2.0 * -1.5 * 1.5))).abs() < 1e-12);
    }

    #[test]
    fn odd_terms_vanish_for_even_profiles() {
        let gb = quartic_series(6);
        for &u in &[0.4, 1.1, 2.6] {
            let z = gb.terms_at(u).unwrap();
            assert_eq!(z[1], 0.0);
            assert_eq!(z[3], 0.0, "u = {u}");
            assert_eq!(z[5], 0.0, "u = {u}");
        }
    }

    #[test]
    fn reconstructed_phase_grows_at_both_infinities() {
        // trapezoid integral of the leading term from 0 outward
        let pot = quartic();
        let phase_to = |u_end: f64| -> f64 {
            let n = 400;
            let mut acc = 0.0;
            for i in 0..n {
                let a = u_end * i as f64 / n as f64;
                let b = u_end * (i + 1) as f64 / n as f64;
                acc += 0.5 * (leading_closed(&pot, a) + leading_closed(&pot, b)) * (b - a);
            }
            acc
        };
        let plus = phase_to(3.0);
        let minus = phase_to(-3.0);
        assert!(plus > 1.0, "phase(+3) = {plus}");
        assert!(minus > 1.0, "phase(-3) = {minus}");
        assert!(phase_to(4.0) > plus && phase_to(-4.0) > minus);
    }

    #[test]
    fn missing_eps_is_rejected() {
        let pot = quartic();
        assert!(matches!(
            gb_series_f64(&pot, &[1.0], 4),
            Err(Error::MissingEps(2))
        ));
    }

    #[test]
    fn origin_is_singular() {
        let gb = quartic_series(4);
        assert!(matches!(gb.terms_at(0.0), Err(Error::OriginSingularity)));
    }

    #[test]
    fn gb_residual_order_by_order() {
        // lam^k coefficient of lam^2 Z' - Z^2 - lam^2 eps + Vhat must
        // vanish: order k picks up Z'_(k-2) - sum Z_j Z_(k-j) - eps_(k-2).
        let order = 8;
        let pot = quartic();
        let rb = rb_ground_series(&pot, order).unwrap();
        let gb = gb_series(&pot, rb.energy_coeffs(), order).unwrap();
        let mut u = 0.2;
        while u <= 3.0 {
            let terms = gb.terms_with_derivative(u).unwrap();
            for k in 0..=order {
                let mut r = 0.0;
                if k >= 2 {
                    r += terms[k - 2].1 - rb.energy_coeff_f64(k - 2);
                }
                for j in 0..=k {
                    r -= terms[j].0 * terms[k - j].0;
                }
                if k == 0 {
                    r += pot.vhat(u);
                }
                assert!(r.abs() < 1e-10, "order {k} residual {r} at u = {u}");
            }
            u += 0.35;
        }
    }

    #[test]
    fn det_log_harmonic_vanishes() {
        let pot = Potential::polynomial(&[(2, 1.0)], 0.0, 1.0, MassConvention::Half).unwrap();
        for &u in &[0.5, 1.0, 2.0] {
            assert!(det_log(&pot, 1.0, u, None).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn det_log_identity_two_routes() {
        let pot = quartic();
        let mut u = 0.5;
        while u <= 3.0 {
            let lhs = det_log(&pot, 1.0, u, None).unwrap();
            let rhs = det_log_identity_rhs(&pot, u).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "u = {u}: {lhs} vs {rhs}");
            u += 0.25;
        }
    }

    #[test]
    fn det_log_derivative_is_z2() {
        let pot = quartic();
        for &u in &[0.7, 1.0, 2.0] {
            let h = 1e-5;
            let d = (det_log(&pot, 1.0, u + h, None).unwrap()
                - det_log(&pot, 1.0, u - h, None).unwrap())
                / (2.0 * h);
            let z2 = second_order_closed(&pot, 1.0, u);
            assert!((d - z2).abs() < 1e-9, "u = {u}: {d} vs {z2}");
        }
    }

    #[test]
    fn det_log_cutoff_branch() {
        // non-normalized profile: the pole does not cancel
        let pot =
            Potential::polynomial(&[(2, 2.0), (4, 1.0)], 1.0, 1.0, MassConvention::Half).unwrap();
        assert!(matches!(
            det_log(&pot, 1.0, 1.0, None),
            Err(Error::CutoffRequired)
        ));
        let v = det_log(&pot, 1.0, 1.0, Some(0.1)).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn asymptotics_pure_power() {
        // Vhat = a^2 u^(2p): Z = a u^p + (lam^2 p / 2) / u
        //        - lam^2 eps / (2a) u^(-p) - lam^4 p (p+2) / (8a) u^(-p-2) + ...
        for (p, a) in [(2usize, 1.5f64), (3, 0.8)] {
            let pot =
                Potential::polynomial(&[(2 * p, a * a)], 1.0, 1.0, MassConvention::Half).unwrap();
            let (eps, lambda) = (1.37, 0.6);
            let lam2 = lambda * lambda;
            let table = large_u_series(&pot, 2 * p + 4, eps, lambda, true).unwrap();
            let p_i = p as i64;
            let check = |power: i64, expect: f64| {
                let c = table.coeff(power).unwrap();
                assert!(
                    (c.value - expect).abs() < 1e-12 * expect.abs().max(1.0),
                    "p={p}, power {power}: {} vs {expect}",
                    c.value
                );
            };
            check(p_i, a);
            check(-1, lam2 * p as f64 / 2.0);
            check(-p_i, -lam2 * eps / (2.0 * a));
            // note the derivative term enters twice, so this carries lam^4
            check(-p_i - 2, -lam2 * lam2 * (p * (p + 2)) as f64 / (8.0 * a));
            // vanishing slots: non-negative degrees below p, negative
            // degrees between -2 and -(p-1), and -(p+1)
            for power in 0..p_i {
                check(power, 0.0);
            }
            for power in (-(p_i - 1))..=-2 {
                check(power, 0.0);
            }
            check(-p_i - 1, 0.0);
        }
    }

    #[test]
    fn asymptotics_reject_non_polynomial() {
        let pot = Potential::sine_gordon(1.0, 1.0, MassConvention::Half).unwrap();
        assert!(matches!(
            large_u_series(&pot, 7, 1.0, 0.5, true),
            Err(Error::NonPolynomial)
        ));
    }

    #[test]
    fn asymptotics_harmonic_collapses() {
        let pot = Potential::polynomial(&[(2, 1.0)], 0.1, 1.0, MassConvention::Half).unwrap();
        let table = large_u_series(&pot, 8, 1.0, 0.4, true).unwrap();
        for c in &table.coeffs {
            let expect = if c.power == 1 { 1.0 } else { 0.0 };
            assert!((c.value - expect).abs() < 1e-14, "power {}", c.power);
        }
    }

    #[test]
    fn asymptotics_quartic_leading_block() {
        let table = large_u_series(&quartic(), 9, 1.0, 0.7, true).unwrap();
        let got: Vec<f64> = table.coeffs.iter().take(3).map(|c| c.value).collect();
        assert!((got[0] - 1.0).abs() < 1e-14);
        assert!(got[1].abs() < 1e-14);
        assert!((got[2] - 0.5).abs() < 1e-14);
        for c in table.coeffs.iter().take(3) {
            assert!(c.lambda_free && c.eps_free, "power {}", c.power);
        }
    }

    #[test]
    fn asymptotics_flag_structure() {
        // first p coefficients lam-free, first 2p eps-free
        let pot = Potential::polynomial(
            &[(2, 1.0), (3, 0.5), (4, 0.25), (5, 0.1), (6, 0.75)],
            1.0,
            1.0,
            MassConvention::Half,
        )
        .unwrap();
        let p = 3usize;
        let table = large_u_series(&pot, 2 * p + 3, 1.3, 0.5, true).unwrap();
        for (i, c) in table.coeffs.iter().enumerate() {
            if i < p {
                assert!(
                    c.lambda_free,
                    "coefficient {i} (power {}) should be lam-free",
                    c.power
                );
            }
            if i < 2 * p {
                assert!(
                    c.eps_free,
                    "coefficient {i} (power {}) should be eps-free",
                    c.power
                );
            }
        }
        // the u^(-p) coefficient must depend on eps
        assert!(!table.coeffs[2 * p].eps_free);
    }

    #[test]
    fn asymptotics_sign_flips_for_even_p_negative_u() {
        let pot = quartic();
        let plus = large_u_series(&pot, 9, 1.0, 0.5, true).unwrap();
        let minus = large_u_series(&pot, 9, 1.0, 0.5, false).unwrap();
        assert!((plus.coeffs[0].value - 1.0).abs() < 1e-14);
        assert!((minus.coeffs[0].value + 1.0).abs() < 1e-14);
    }

    #[test]
    fn asymptotics_match_series_tail() {
        // numeric check: the truncated asymptotic sum approaches the
        // jet-evaluated series at large u
        let order = 4;
        let pot = quartic();
        let rb = rb_ground_series(&pot, order).unwrap();
        let gb = gb_series(&pot, rb.energy_coeffs(), order).unwrap();
        let lambda: f64 = 0.3;
        let eps: f64 = (0..=order)
            .map(|n| rb.energy_coeff_f64(n) * lambda.powi(n as i32))
            .sum();
        let table = large_u_series(&pot, 11, eps, lambda, true).unwrap();
        let u = 100.0;
        let z_series: f64 = {
            let terms = gb.terms_at(u).unwrap();
            (0..=order).map(|n| terms[n] * lambda.powi(n as i32)).sum()
        };
        let z_asym: f64 = table
            .coeffs
            .iter()
            .map(|c| c.value * u.powi(c.power as i32))
            .sum();
        // far out both truncations represent the same function; the
        // leftover is the dropped lam^6 term, ~1e-12 relative here
        assert!(
            (z_series - z_asym).abs() / z_series.abs() < 1e-11,
            "{z_series} vs {z_asym}"
        );
    }
}
