//! Cross-module consistency properties that tie the expansions, the
//! classical paths and the spectra together.

use anharmonic::approximant::{optimize_params, OptimizeOpts};
use anharmonic::flucton::{flucton_action_opts, gy_det_ratio, Arms};
use anharmonic::potential::{MassConvention, Potential};
use anharmonic::reference::{log_density_ratio, reference_energy};
use anharmonic::riccati_bloch::{eps_partial_sum, rb_ground_series};

/// The exact density ratio approaches the leading classical exponent
/// as the effective coupling shrinks, with O(lambda^2) corrections.
#[test]
fn density_matrix_consistency() {
    let u0 = 1.0;
    for &lambda in &[0.3, 0.1, 0.03] {
        let pot = Potential::quartic_aho(lambda, 1.0).unwrap();
        let e0 = reference_energy(&pot, 0).unwrap();
        let x0 = u0 / pot.g();
        let measured = log_density_ratio(&pot, e0, x0).unwrap();
        // two arms in the m = 1/2 convention of this potential
        let theory = flucton_action_opts(&pot, u0, Arms::Two, MassConvention::Half)
            .unwrap()
            .exponent;
        let ratio = measured / theory;
        assert!(
            (ratio - 1.0).abs() < 1.0 * lambda * lambda,
            "lambda = {lambda}: ratio = {ratio}"
        );
    }
}

/// Truncating the energy series at a fixed order leaves a remainder of
/// the first dropped order: the measured order over a lambda halving
/// must agree with the expected one within 20 percent.
#[test]
fn pt_consistency_order_test() {
    let profile = Potential::quartic_aho(1.0, 1.0).unwrap();
    let series = rb_ground_series(&profile, 12).unwrap();
    let trunc_at = 6usize;
    let diff = |lambda: f64| -> f64 {
        let pot = Potential::quartic_aho(lambda, 1.0).unwrap();
        let eps_ref = reference_energy(&pot, 0).unwrap() / pot.hbar();
        (eps_ref - eps_partial_sum(&series, lambda, trunc_at).value).abs()
    };
    let (l1, l2) = (0.1, 0.05);
    let measured_order = (diff(l1) / diff(l2)).ln() / (l1 / l2).ln();
    // even profile: the first omitted order is lambda^8
    let expected = 8.0;
    assert!(
        (measured_order / expected - 1.0).abs() < 0.2,
        "measured order {measured_order:.3}"
    );
}

/// The optimized variational energy is continuous and monotone
/// increasing in the coupling for the ground state.
#[test]
fn variational_energy_monotone_in_g() {
    let opts = OptimizeOpts::default();
    let grid = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    let mut prev = f64::NEG_INFINITY;
    for &g in &grid {
        let r = optimize_params(0, 0, g, &opts).unwrap();
        assert!(
            r.energy > prev,
            "E_var({g}) = {} did not increase past {prev}",
            r.energy
        );
        prev = r.energy;
    }
    // continuity at the harmonic end: small coupling stays near 1
    let r = optimize_params(0, 0, 1e-3, &opts).unwrap();
    assert!((r.energy - 1.0).abs() < 1e-3, "E_var(1e-3) = {}", r.energy);
}

/// After orthogonalization at the optimum, the polynomial factor of
/// each excited state has the node structure of its quantum number.
#[test]
fn orthogonalized_polynomials_have_positive_roots() {
    use anharmonic::approximant::build_approximant;
    let opts = OptimizeOpts::default();
    for (n, p) in [(1usize, 0usize), (1, 1), (2, 0), (2, 1)] {
        let r = optimize_params(n, p, 1.0, &opts).unwrap();
        let psi = build_approximant(n, p, 1.0, r.a, r.b, r.poly.clone()).unwrap();
        assert!(
            psi.poly_roots_positive(),
            "(n, p) = ({n}, {p}): poly {:?}",
            r.poly
        );
    }
}

/// The fluctuation background carries no zero mode: the determinant
/// ratio stays strictly positive and bounded away from zero.
#[test]
fn no_zero_modes_on_flucton_background() {
    let pot = Potential::quartic_aho(1.0, 1.0).unwrap();
    for &u0 in &[0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let r = gy_det_ratio(&pot, u0, 16.0).unwrap();
        assert!(r > 0.5, "u0 = {u0}: ratio = {r}");
    }
}
