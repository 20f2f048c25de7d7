//! Exact-rational ground-state perturbation theory in the quantum
//! frame.
//!
//! Writing the ground state as `psi = exp(-phi/hbar)` and passing to the
//! quantum coordinate v, the logarithmic derivative `Y(v)` obeys
//!
//! ```text
//!     Y' - Y^2 = eps - U(v),      U(v) = sum_k c_k lam^(k-2) v^k,
//! ```
//!
//! with `lam = hbar^(1/2) g`. Expanding `Y = sum lam^n Y_n(v)` and
//! `eps = sum lam^n eps_n` about the harmonic solution `Y_0 = v`,
//! `eps_0 = 1` gives, at each order n >= 1, the linear problem
//!
//! ```text
//!     Y_n' - 2 v Y_n = eps_n - c_(n+2) v^(n+2) + sum_(k=1)^(n-1) Y_k Y_(n-k)
//! ```
//!
//! which closes in polynomials of degree n+1; the constant eps_n is
//! fixed by the v^0 coefficient. Everything here is exact rational
//! arithmetic: the coefficients grow factorially and floats would
//! corrupt high orders silently.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{rat_int, rat_to_f64, Rat, RatPoly};
use crate::potential::Potential;

/// Energy and log-derivative series of the ground state.
#[derive(Debug, Clone)]
pub struct RbSeries {
    order: usize,
    energy: Vec<Rat>,
    log_deriv: Vec<RatPoly>,
}

/// Default cap on coefficient size: numerator plus denominator bits.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 22;

impl RbSeries {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Exact energy coefficient eps_n.
    pub fn energy_coeff(&self, n: usize) -> &Rat {
        &self.energy[n]
    }

    pub fn energy_coeffs(&self) -> &[Rat] {
        &self.energy
    }

    pub fn energy_coeff_f64(&self, n: usize) -> f64 {
        rat_to_f64(&self.energy[n])
    }

    pub fn energy_coeffs_f64(&self) -> Vec<f64> {
        self.energy.iter().map(rat_to_f64).collect()
    }

    /// Log-derivative polynomial Y_n(v).
    pub fn log_deriv_poly(&self, n: usize) -> &RatPoly {
        &self.log_deriv[n]
    }
}

/// Ground-state series to order `n_max` in the effective coupling.
pub fn rb_ground_series(pot: &Potential, n_max: usize) -> Result<RbSeries> {
    rb_ground_series_budget(pot, n_max, DEFAULT_BIT_BUDGET)
}

pub fn rb_ground_series_budget(pot: &Potential, n_max: usize, bit_budget: u64) -> Result<RbSeries> {
    if !pot.is_normalized() {
        return Err(Error::NotNormalized(pot.coeff(2)));
    }
    let mut energy: Vec<Rat> = Vec::with_capacity(n_max + 1);
    let mut log_deriv: Vec<RatPoly> = Vec::with_capacity(n_max + 1);
    energy.push(Rat::one());
    log_deriv.push(RatPoly::monomial(Rat::one(), 1));

    for n in 1..=n_max {
        // rhs = -c_(n+2) v^(n+2) + sum_(k=1)^(n-1) Y_k Y_(n-k)
        let mut rhs = RatPoly::monomial(-pot.exact_coeff(n + 2), n + 2);
        for k in 1..n {
            rhs = rhs.add(&log_deriv[k].mul(&log_deriv[n - k]));
        }
        // descending coefficient match: v^m gives (m+1) y_(m+1) - 2 y_(m-1) = rhs_m
        let mut y = vec![Rat::zero(); n + 2];
        for m in (1..=(n + 2)).rev() {
            let upper = if m + 1 <= n + 1 {
                y[m + 1].clone() * rat_int(m as i64 + 1)
            } else {
                Rat::zero()
            };
            y[m - 1] = (upper - rhs.coeff(m)) / rat_int(2);
        }
        let poly = RatPoly::from_coeffs(y);
        let eps_n = poly.coeff(1) - rhs.coeff(0);
        if poly.max_bits().max(crate::exact::rat_bits(&eps_n)) > bit_budget {
            return Err(Error::Overflow(n));
        }
        energy.push(eps_n);
        log_deriv.push(poly);
    }
    Ok(RbSeries {
        order: n_max,
        energy,
        log_deriv,
    })
}

/// Partial sum of the energy series with the optimal-truncation index.
#[derive(Debug, Clone, Copy)]
pub struct PartialSum {
    pub value: f64,
    /// Index of the smallest nonzero term |eps_n lam^n|; summing past it
    /// stops improving the asymptotic estimate.
    pub optimal_index: usize,
    /// False when the terms were still shrinking at the series cap.
    pub diverging_within_order: bool,
}

pub fn eps_partial_sum(series: &RbSeries, lambda: f64, n: usize) -> PartialSum {
    assert!(n <= series.order, "partial sum order exceeds series order");
    let mut value = 0.0;
    for k in 0..=n {
        value += series.energy_coeff_f64(k) * lambda.powi(k as i32);
    }
    let mut optimal = series.order;
    let mut best = f64::INFINITY;
    let mut grew = false;
    for k in 0..=series.order {
        let term = (series.energy_coeff_f64(k) * lambda.powi(k as i32)).abs();
        if term == 0.0 {
            continue;
        }
        if term < best {
            best = term;
            optimal = k;
        } else if k > optimal {
            grew = true;
            break;
        }
    }
    PartialSum {
        value,
        optimal_index: optimal,
        diverging_within_order: grew,
    }
}

/// Expansion of the log-derivative in powers of v with free parameters
/// (alpha, eps): the value at the origin and the scaled energy.
#[derive(Debug, Clone)]
pub struct SmallVExpansion {
    pub alpha: f64,
    pub eps: f64,
    /// Taylor coefficients of Y about v = 0; index = power of v.
    pub coeffs: Vec<f64>,
}

/// Taylor recursion for Y in powers of v:
/// `(j+1) t_(j+1) = eps delta_(j,0) - U_j + sum_(i<=j) t_i t_(j-i)`.
pub fn rb_small_v(pot: &Potential, alpha: f64, eps: f64, n_max: usize) -> SmallVExpansion {
    let lambda = pot.lambda();
    let mut t = vec![0.0_f64; n_max + 1];
    t[0] = alpha;
    for j in 0..n_max {
        let u_j = if j >= 2 {
            pot.coeff(j) * lambda.powi(j as i32 - 2)
        } else {
            0.0
        };
        let mut conv = 0.0;
        for i in 0..=j {
            conv += t[i] * t[j - i];
        }
        let mut rhs = conv - u_j;
        if j == 0 {
            rhs += eps;
        }
        t[j + 1] = rhs / (j + 1) as f64;
    }
    SmallVExpansion {
        alpha,
        eps,
        coeffs: t,
    }
}

/// Residual of the truncated series in the quantum-frame equation,
/// order by order in the coupling. Exact: every returned polynomial
/// must be zero for a valid series. Kept separate from the solver so
/// the identity is checked against the full equation, not against the
/// recursion that produced the data.
pub fn rb_residuals(pot: &Potential, series: &RbSeries) -> Vec<RatPoly> {
    let n_max = series.order;
    let mut residuals = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        // Y_n' - sum_(k=0)^(n) Y_k Y_(n-k) - eps_n + c_(n+2) v^(n+2)
        let mut r = series.log_deriv[n].derivative();
        for k in 0..=n {
            r = r.sub(&series.log_deriv[k].mul(&series.log_deriv[n - k]));
        }
        r = r.sub(&RatPoly::monomial(series.energy[n].clone(), 0));
        r = r.add(&RatPoly::monomial(pot.exact_coeff(n + 2), n + 2));
        residuals.push(r);
    }
    residuals
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::potential::MassConvention;
    use num_traits::Signed;

    fn quartic() -> Potential {
        Potential::quartic_aho(1.0, 1.0).unwrap()
    }

    #[test]
    fn harmonic_base_case() {
        let series = rb_ground_series(&quartic(), 0).unwrap();
        assert_eq!(*series.energy_coeff(0), rat_int(1));
        let y0 = series.log_deriv_poly(0);
        assert_eq!(y0.coeff(1), rat_int(1));
        assert_eq!(y0.degree(), Some(1));
    }

    #[test]
    fn cubic_term_first_order() {
        // c_3 = a: Y_1 = (a/2)(v^2 + 1), eps_1 = 0
        let pot = Potential::polynomial(
            &[(2, 1.0), (3, 0.5), (4, 1.0)],
            1.0,
            1.0,
            MassConvention::Half,
        )
        .unwrap();
        let series = rb_ground_series(&pot, 1).unwrap();
        assert_eq!(*series.energy_coeff(1), rat_int(0));
        let y1 = series.log_deriv_poly(1);
        assert_eq!(y1.coeff(0), rat(1, 4));
        assert_eq!(y1.coeff(1), rat_int(0));
        assert_eq!(y1.coeff(2), rat(1, 4));
    }

    #[test]
    fn quartic_energy_coefficients() {
        let series = rb_ground_series(&quartic(), 10).unwrap();
        assert_eq!(*series.energy_coeff(1), rat_int(0));
        assert_eq!(*series.energy_coeff(2), rat(3, 4));
        assert_eq!(*series.energy_coeff(3), rat_int(0));
        assert_eq!(*series.energy_coeff(4), rat(-21, 16));
        assert_eq!(*series.energy_coeff(6), rat(333, 64));
        assert_eq!(*series.energy_coeff(8), rat(-30885, 1024));
        assert_eq!(*series.energy_coeff(10), rat(916731, 4096));
    }

    #[test]
    fn log_deriv_degree_and_parity() {
        let series = rb_ground_series(&quartic(), 12).unwrap();
        for n in 0..=12 {
            let y = series.log_deriv_poly(n);
            if y.is_zero() {
                continue;
            }
            assert_eq!(y.degree(), Some(n + 1), "degree of Y_{n}");
            assert!(y.is_odd(), "even potential must give odd Y_{n}");
        }
    }

    #[test]
    fn residuals_vanish_exactly() {
        let pot = Potential::polynomial(
            &[(2, 1.0), (3, -0.25), (4, 0.75), (5, 0.125), (6, 0.5)],
            1.0,
            1.0,
            MassConvention::Half,
        )
        .unwrap();
        let series = rb_ground_series(&pot, 8).unwrap();
        for (n, r) in rb_residuals(&pot, &series).iter().enumerate() {
            assert!(r.is_zero(), "residual at order {n}: {r}");
        }
    }

    #[test]
    fn partial_sum_at_small_coupling() {
        let series = rb_ground_series(&quartic(), 10).unwrap();
        let s = eps_partial_sum(&series, 0.0, 10);
        assert_eq!(s.value, 1.0);
        let s = eps_partial_sum(&series, 0.1, 2);
        assert!((s.value - 1.0075).abs() < 1e-15);
    }

    #[test]
    fn partial_sums_diverge_at_strong_coupling() {
        let series = rb_ground_series(&quartic(), 30).unwrap();
        let s = eps_partial_sum(&series, 2.0, 30);
        assert!(s.diverging_within_order);
        assert!(s.optimal_index < 30, "optimal index {}", s.optimal_index);
        // terms at the cap dwarf the optimum
        let t_opt = series.energy_coeff_f64(s.optimal_index).abs() * 2.0_f64.powi(s.optimal_index as i32);
        let t_cap = series.energy_coeff_f64(30).abs() * 2.0_f64.powi(30);
        assert!(t_cap > 1e3 * t_opt);
    }

    #[test]
    fn small_v_generic_coefficients() {
        // t_1 = eps + alpha^2, t_2 = alpha (eps + alpha^2)
        let pot = quartic();
        let (alpha, eps) = (0.37, 1.21);
        let e = rb_small_v(&pot, alpha, eps, 5);
        assert!((e.coeffs[1] - (eps + alpha * alpha)).abs() < 1e-15);
        assert!((e.coeffs[2] - alpha * (eps + alpha * alpha)).abs() < 1e-15);
        // t_3 = (eps^2 + alpha^2 (4 eps + 3 alpha^2) - c_2) / 3
        let t3 = (eps * eps + alpha * alpha * (4.0 * eps + 3.0 * alpha * alpha) - 1.0) / 3.0;
        assert!((e.coeffs[3] - t3).abs() < 1e-15);
    }

    #[test]
    fn small_v_even_potential_parity() {
        // alpha = 0 on an even potential kills all even-order terms
        let e = rb_small_v(&quartic(), 0.0, 1.3, 8);
        assert_eq!(e.coeffs[0], e.alpha);
        for j in (0..=8).step_by(2) {
            assert_eq!(e.coeffs[j], 0.0, "coefficient {j}");
        }
    }

    #[test]
    fn small_v_harmonic_is_exact() {
        let pot = Potential::polynomial(&[(2, 1.0)], 0.0, 1.0, MassConvention::Half).unwrap();
        let e = rb_small_v(&pot, 0.0, 1.0, 9);
        assert_eq!(e.coeffs[1], 1.0);
        for (j, c) in e.coeffs.iter().enumerate() {
            if j != 1 {
                assert!(c.abs() < 1e-15, "coefficient {j} = {c}");
            }
        }
    }

    #[test]
    fn small_v_matches_series_re_expansion() {
        // At tiny coupling the truncation mismatch between the two routes
        // sits far below 1e-12, so a direct numeric comparison is clean.
        let pot = Potential::quartic_aho(1e-3, 1.0).unwrap();
        let lambda = pot.lambda();
        let series = rb_ground_series(&pot, 12).unwrap();
        let eps: f64 = (0..=8)
            .map(|n| series.energy_coeff_f64(n) * lambda.powi(n as i32))
            .sum();
        let small = rb_small_v(&pot, 0.0, eps, 9);
        for j in 0..=9 {
            let from_series: f64 = (0..=12)
                .map(|n| {
                    series
                        .log_deriv_poly(n)
                        .coeffs()
                        .get(j)
                        .map_or(0.0, rat_to_f64)
                        * lambda.powi(n as i32)
                })
                .sum();
            assert!(
                (small.coeffs[j] - from_series).abs() < 1e-12,
                "v^{j}: {} vs {}",
                small.coeffs[j],
                from_series
            );
        }
    }

    #[test]
    fn small_v_cross_expansion_order_by_order() {
        // Run the v-recursion with the energy kept as a truncated
        // polynomial in the coupling; each coupling order of each Taylor
        // coefficient must match the exact series polynomials.
        let pot = quartic();
        let n_lam = 4usize;
        let series = rb_ground_series(&pot, n_lam).unwrap();
        let eps: Vec<f64> = (0..=n_lam).map(|n| series.energy_coeff_f64(n)).collect();

        let conv = |a: &[f64], b: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n_lam + 1];
            for i in 0..=n_lam {
                for j in 0..=(n_lam - i) {
                    out[i + j] += a[i] * b[j];
                }
            }
            out
        };

        let j_max = 7usize;
        let mut t: Vec<Vec<f64>> = vec![vec![0.0; n_lam + 1]; j_max + 2];
        for j in 0..=j_max {
            let mut rhs = vec![0.0; n_lam + 1];
            if j == 0 {
                rhs.clone_from_slice(&eps);
            }
            if j >= 2 && j - 2 <= n_lam {
                rhs[j - 2] -= pot.coeff(j);
            }
            for i in 0..=j {
                let prod = conv(&t[i], &t[j - i]);
                for (r, p) in rhs.iter_mut().zip(prod) {
                    *r += p;
                }
            }
            for n in 0..=n_lam {
                t[j + 1][n] = rhs[n] / (j + 1) as f64;
            }
        }
        for n in 0..=n_lam {
            for j in 0..=j_max + 1 {
                let expect = series
                    .log_deriv_poly(n)
                    .coeffs()
                    .get(j)
                    .map_or(0.0, rat_to_f64);
                assert!(
                    (t[j][n] - expect).abs() < 1e-12,
                    "order {n}, v^{j}: {} vs {}",
                    t[j][n],
                    expect
                );
            }
        }
    }

    #[test]
    fn not_normalized_rejected() {
        let pot =
            Potential::polynomial(&[(2, 2.0), (4, 1.0)], 1.0, 1.0, MassConvention::Half).unwrap();
        assert!(matches!(
            rb_ground_series(&pot, 4),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn sine_gordon_series_runs_on_taylor_coefficients() {
        let pot = Potential::sine_gordon(1.0, 1.0, MassConvention::Half).unwrap();
        let series = rb_ground_series(&pot, 8).unwrap();
        // even profile: odd orders vanish
        assert_eq!(*series.energy_coeff(1), rat_int(0));
        assert_eq!(*series.energy_coeff(3), rat_int(0));
        assert!(series.energy_coeff(2).is_negative());
        for (n, r) in rb_residuals(&pot, &series).iter().enumerate() {
            assert!(r.is_zero(), "residual at order {n}");
        }
    }

    #[test]
    fn tiny_bit_budget_overflows() {
        assert!(matches!(
            rb_ground_series_budget(&quartic(), 10, 8),
            Err(Error::Overflow(_))
        ));
    }
}
