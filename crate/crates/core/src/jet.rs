//! Truncated Taylor arithmetic (forward-mode AD to arbitrary depth).
//!
//! A [`Jet`] holds the Taylor coefficients of a function about a fixed
//! expansion point: `c[k] = f^(k)(u0) / k!`. Arithmetic on jets is exact
//! up to rounding, so chains of derivatives (as needed by recursive
//! series constructions) incur no truncation error.

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, depth: usize) -> Self {
        let mut c = vec![0.0; depth];
        if depth > 0 {
            c[0] = value;
        }
        Jet { c }
    }

    /// The identity function u -> u expanded about `u0`.
    pub fn variable(u0: f64, depth: usize) -> Self {
        let mut c = vec![0.0; depth];
        if depth > 0 {
            c[0] = u0;
        }
        if depth > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn depth(&self) -> usize {
        self.c.len()
    }

    pub fn value(&self) -> f64 {
        self.c.first().copied().unwrap_or(0.0)
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.c.get(k).map_or(0.0, |c| c * fact)
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let n = self.depth().min(other.depth());
        Jet {
            c: (0..n).map(|i| self.c[i] + other.c[i]).collect(),
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let n = self.depth().min(other.depth());
        Jet {
            c: (0..n).map(|i| self.c[i] - other.c[i]).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut c = self.c.clone();
        if !c.is_empty() {
            c[0] += s;
        }
        Jet { c }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.depth().min(other.depth());
        let mut c = vec![0.0; n];
        for i in 0..n {
            for j in 0..(n - i) {
                c[i + j] += self.c[i] * other.c[j];
            }
        }
        Jet { c }
    }

    /// Reciprocal; the value at the expansion point must be nonzero.
    pub fn recip(&self) -> Jet {
        let n = self.depth();
        let mut c = vec![0.0; n];
        let a0 = self.c[0];
        assert!(a0 != 0.0, "reciprocal of a jet vanishing at its base point");
        c[0] = 1.0 / a0;
        for k in 1..n {
            let mut acc = 0.0;
            for j in 0..k {
                acc += c[j] * self.c[k - j];
            }
            c[k] = -acc / a0;
        }
        Jet { c }
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    /// Square root; the value at the expansion point must be positive.
    pub fn sqrt(&self) -> Jet {
        let n = self.depth();
        let mut c = vec![0.0; n];
        let a0 = self.c[0];
        assert!(a0 > 0.0, "sqrt of a jet non-positive at its base point");
        c[0] = a0.sqrt();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..k {
                acc += c[j] * c[k - j];
            }
            c[k] = (self.c[k] - acc) / (2.0 * c[0]);
        }
        Jet { c }
    }

    /// Derivative as a jet, one coefficient shorter.
    pub fn deriv(&self) -> Jet {
        let n = self.depth();
        if n <= 1 {
            return Jet { c: vec![0.0] };
        }
        Jet {
            c: (1..n).map(|k| k as f64 * self.c[k]).collect(),
        }
    }

    /// sin(j) and cos(j) for a jet argument, via the coupled recurrence
    /// s' = c * j', c' = -s * j'.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.depth();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..n {
            let mut s_acc = 0.0;
            let mut c_acc = 0.0;
            for j in 1..=k {
                let dj = j as f64 * self.c[j];
                s_acc += dj * c[k - j];
                c_acc += dj * s[k - j];
            }
            s[k] = s_acc / k as f64;
            c[k] = -c_acc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    /// Evaluate the polynomial sum(coeffs[k] * u^k) as a jet, where the
    /// jet argument is `self`.
    pub fn poly_eval(&self, coeffs: &[f64]) -> Jet {
        let mut acc = Jet::constant(0.0, self.depth());
        for &a in coeffs.iter().rev() {
            acc = acc.mul(self).add_scalar(a);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_jet_matches_hand_derivatives() {
        // f(u) = u^2 + u^4 at u = 2: f = 20, f' = 36, f'' = 50, f''' = 48
        let u = Jet::variable(2.0, 6);
        let f = u.poly_eval(&[0.0, 0.0, 1.0, 0.0, 1.0]);
        assert!((f.derivative(0) - 20.0).abs() < 1e-12);
        assert!((f.derivative(1) - 36.0).abs() < 1e-12);
        assert!((f.derivative(2) - 50.0).abs() < 1e-12);
        assert!((f.derivative(3) - 48.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_jet_round_trip() {
        let u = Jet::variable(1.7, 8);
        let f = u.poly_eval(&[0.0, 0.0, 1.0, 0.5, 2.0]);
        let s = f.sqrt();
        let back = s.mul(&s);
        for k in 0..8 {
            assert!((back.c[k] - f.c[k]).abs() < 1e-10 * (1.0 + f.c[k].abs()));
        }
    }

    #[test]
    fn sin_cos_derivatives() {
        let u = Jet::variable(0.9, 6);
        let (s, c) = u.sin_cos();
        assert!((s.derivative(1) - 0.9_f64.cos()).abs() < 1e-14);
        assert!((s.derivative(2) + 0.9_f64.sin()).abs() < 1e-13);
        assert!((c.derivative(1) + 0.9_f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn recip_against_closed_form() {
        // 1/(1+u) around 0: coefficients (-1)^k
        let u = Jet::variable(0.0, 7);
        let r = u.add_scalar(1.0).recip();
        for k in 0..7 {
            let expect = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((r.c[k] - expect).abs() < 1e-14);
        }
    }
}
