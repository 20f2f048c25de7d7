//! Shared test oracles, independent of the library's series machinery.

use anharmonic::exact::{rat_int, Rat};
use anharmonic::potential::Potential;
use num_traits::Zero;

/// Exact-rational Rayleigh-Schrodinger matrix perturbation theory for
/// the ground state in the quantum frame.
///
/// The Hamiltonian -d^2/dv^2 + v^2 + sum_(k>=3) c_k lam^(k-2) v^k is
/// expressed in the oscillator eigenbasis of -d^2/dv^2 + v^2. A diagonal
/// similarity rescaling turns the position ladder into the rational
/// matrix X[i][i+1] = i+1, X[i+1][i] = 1/2, which leaves the spectrum
/// untouched, so the whole recursion runs in exact rationals:
///
///   (D - e_0) psi_n = -(sum_j W_j psi_(n-j)) + sum_(j<n) e_j psi_(n-j) + e_n psi_0
///
/// with D = diag(2m+1), gauge psi_n[0] = 0 for n >= 1, and e_n read off
/// the zeroth component.
pub fn rs_matrix_ground_series(pot: &Potential, n_max: usize) -> Vec<Rat> {
    let degree = pot
        .degree()
        .expect("matrix oracle needs a polynomial potential");
    assert!(
        pot.is_normalized(),
        "matrix oracle assumes c_2 = 1 exactly"
    );
    let dim = degree * n_max + degree + 2;

    // banded rational position matrix (scaled similarity image)
    let mut x = vec![vec![Rat::zero(); dim]; dim];
    for i in 0..dim - 1 {
        x[i][i + 1] = rat_int(i as i64 + 1);
        x[i + 1][i] = Rat::new(1.into(), 2.into());
    }
    let mat_mul = |a: &Vec<Vec<Rat>>, b: &Vec<Vec<Rat>>| -> Vec<Vec<Rat>> {
        let mut c = vec![vec![Rat::zero(); dim]; dim];
        for i in 0..dim {
            for k in 0..dim {
                if a[i][k].is_zero() {
                    continue;
                }
                for j in 0..dim {
                    if !b[k][j].is_zero() {
                        let t = &a[i][k] * &b[k][j];
                        c[i][j] += t;
                    }
                }
            }
        }
        c
    };

    // W_j = c_(j+2) X^(j+2) for j = 1 .. degree-2
    let mut powers = Vec::with_capacity(degree + 1);
    powers.push(x.clone()); // X^1
    for _ in 2..=degree {
        let next = mat_mul(powers.last().unwrap(), &x);
        powers.push(next);
    }
    let w_of = |j: usize| -> Option<(&Vec<Vec<Rat>>, Rat)> {
        let k = j + 2;
        if k > degree {
            return None;
        }
        let c = pot.exact_coeff(k);
        if c.is_zero() {
            None
        } else {
            Some((&powers[k - 1], c))
        }
    };

    let mut energies: Vec<Rat> = vec![rat_int(1)];
    let mut psis: Vec<Vec<Rat>> = Vec::with_capacity(n_max + 1);
    let mut psi0 = vec![Rat::zero(); dim];
    psi0[0] = rat_int(1);
    psis.push(psi0);

    for n in 1..=n_max {
        let mut r = vec![Rat::zero(); dim];
        for j in 1..=n.min(degree.saturating_sub(2)) {
            if let Some((w, c)) = w_of(j) {
                let prev = &psis[n - j];
                for i in 0..dim {
                    let mut acc = Rat::zero();
                    for (k, p) in prev.iter().enumerate() {
                        if !p.is_zero() && !w[i][k].is_zero() {
                            acc += &w[i][k] * p;
                        }
                    }
                    if !acc.is_zero() {
                        r[i] += acc * &c;
                    }
                }
            }
        }
        for j in 1..n {
            if energies[j].is_zero() {
                continue;
            }
            for i in 0..dim {
                if !psis[n - j][i].is_zero() {
                    let t = &energies[j] * &psis[n - j][i];
                    r[i] -= t;
                }
            }
        }
        let e_n = r[0].clone();
        let mut psi_n = vec![Rat::zero(); dim];
        for (m, psi) in psi_n.iter_mut().enumerate().skip(1) {
            if !r[m].is_zero() {
                *psi = -&r[m] / rat_int(2 * m as i64);
            }
        }
        energies.push(e_n);
        psis.push(psi_n);
    }
    energies
}
