//! Adaptive quadrature and ODE integration used across the crate.
//!
//! Quadrature is globally adaptive 15-point Gauss-Kronrod: the interval
//! with the largest error estimate is bisected until the requested
//! tolerance is met. Integrands may be vector-valued so that ratios of
//! integrals (e.g. Rayleigh quotients) share one subdivision.

use crate::error::{Error, Result};

// 15-point Kronrod abscissae on [-1, 1] (positive half) and weights,
// with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Neumaier-compensated accumulation of interval contributions.
    pub compensated: bool,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_intervals: 4096,
            compensated: false,
        }
    }
}

impl QuadOpts {
    pub fn with_tol(tol: f64) -> Self {
        QuadOpts {
            rel_tol: tol,
            abs_tol: tol * 1e-2,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// QUADPACK-style error rescaling: sharpens the raw |K15 - G7|
/// difference using the magnitude and smoothness of the integrand.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

fn gk15<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Segment<N> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut res_abs = [0.0; N];
    let mut samples: Vec<(f64, [f64; N])> = Vec::with_capacity(15);

    for i in 0..N {
        kronrod[i] = WGK[7] * f_center[i];
        res_abs[i] = WGK[7] * f_center[i].abs();
    }
    samples.push((WGK[7], f_center));

    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for i in 0..N {
            kronrod[i] += WGK[j] * (f1[i] + f2[i]);
            res_abs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
        }
        // odd Kronrod points carry the Gauss weights
        if j % 2 == 1 {
            let gw = WG[j / 2];
            for i in 0..N {
                gauss[i] += gw * (f1[i] + f2[i]);
            }
        }
        samples.push((WGK[j], f1));
        samples.push((WGK[j], f2));
    }
    // the centre point belongs to the Gauss rule as well
    for i in 0..N {
        gauss[i] += WG[3] * f_center[i];
    }

    let mut error = 0.0_f64;
    let mut value = [0.0; N];
    for i in 0..N {
        let mean = kronrod[i] * 0.5;
        let mut res_asc = 0.0;
        for (w, s) in &samples {
            res_asc += w * (s[i] - mean).abs();
        }
        let raw = ((kronrod[i] - gauss[i]) * half).abs();
        error = error.max(rescale_error(
            raw,
            res_abs[i] * half.abs(),
            res_asc * half.abs(),
        ));
        value[i] = kronrod[i] * half;
    }
    Segment {
        a,
        b,
        value,
        error,
    }
}

fn norm_inf<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Globally adaptive integral of a vector-valued integrand over [a, b].
pub fn integrate_vec<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOpts,
) -> Result<([f64; N], f64, usize)> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::QuadratureFailure("non-finite bounds".into()));
    }
    if a == b {
        return Ok(([0.0; N], 0.0, 0));
    }
    let mut segs = vec![gk15(&f, a, b)];
    loop {
        let mut total = [0.0; N];
        let mut comp = [0.0; N];
        let mut err_total = 0.0;
        for s in &segs {
            for i in 0..N {
                if opts.compensated {
                    neumaier_add(&mut total[i], &mut comp[i], s.value[i]);
                } else {
                    total[i] += s.value[i];
                }
            }
            err_total += s.error;
        }
        if opts.compensated {
            for i in 0..N {
                total[i] += comp[i];
            }
        }
        let scale = norm_inf(&total).max(opts.abs_tol / opts.rel_tol.max(1e-300));
        if err_total <= opts.abs_tol.max(opts.rel_tol * scale) {
            let n = segs.len();
            return Ok((total, err_total, n));
        }
        if segs.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure(format!(
                "tolerance not reached with {} intervals (err = {:.3e})",
                segs.len(),
                err_total
            )));
        }
        // bisect the worst interval
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let seg = segs.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::QuadratureFailure(
                "interval collapsed below machine precision".into(),
            ));
        }
        segs.push(gk15(&f, seg.a, mid));
        segs.push(gk15(&f, mid, seg.b));
    }
}

fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOpts) -> Result<QuadResult> {
    let (v, e, n) = integrate_vec(|x| [f(x)], a, b, opts)?;
    Ok(QuadResult {
        value: v[0],
        error: e,
        intervals: n,
    })
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with adaptive step control.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct OdeOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOpts {
    fn default() -> Self {
        OdeOpts {
            rel_tol: 1e-12,
            abs_tol: 1e-13,
            h_max: 0.1,
            max_steps: 2_000_000,
        }
    }
}

/// Integrate y' = f(t, y) from `t0` to `t_end`, recording the state at
/// each requested output time (which must be sorted ascending). The
/// stepper lands exactly on every output time, so no interpolation
/// error enters the recorded samples.
pub fn integrate_ode<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    outputs: &[f64],
    opts: &OdeOpts,
) -> Result<Vec<(f64, [f64; N])>> {
    assert!(t_end > t0, "integration must advance forward");
    let mut recorded = Vec::with_capacity(outputs.len());
    let mut next_out = 0usize;
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h_max.min((t_end - t0) / 16.0);
    let mut k1 = f(t, &y);

    while next_out < outputs.len() && outputs[next_out] <= t0 {
        recorded.push((outputs[next_out], y0));
        next_out += 1;
    }

    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StiffnessBudgetExceeded(t));
        }
        let mut h_try = h.min(t_end - t);
        if next_out < outputs.len() {
            h_try = h_try.min(outputs[next_out] - t).max(1e-14 * (1.0 + t.abs()));
        }
        let (y_new, k_new, err) = dp54_step(&f, t, &y, &k1, h_try);
        let tol_norm = step_error_norm(&y, &y_new, &err, opts);
        if tol_norm <= 1.0 {
            t += h_try;
            y = y_new;
            k1 = k_new;
            while next_out < outputs.len() && outputs[next_out] <= t + 1e-14 * (1.0 + t.abs()) {
                recorded.push((outputs[next_out], y));
                next_out += 1;
            }
        }
        let factor = if tol_norm > 0.0 {
            (0.9 * tol_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h_try * factor).min(opts.h_max);
    }
    Ok(recorded)
}

/// Integrate to `t_end` and return only the final state.
pub fn ode_final<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOpts,
) -> Result<[f64; N]> {
    let out = [t_end];
    let rec = integrate_ode(f, t0, y0, t_end, &out, opts)?;
    Ok(rec.last().expect("stepper records t_end").1)
}

fn step_error_norm<const N: usize>(
    y: &[f64; N],
    y_new: &[f64; N],
    err: &[f64; N],
    opts: &OdeOpts,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
        acc += (err[i] / sc) * (err[i] / sc);
    }
    (acc / N as f64).sqrt()
}

#[allow(clippy::type_complexity)]
fn dp54_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N]) {
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 35.0 / 384.0 - 5179.0 / 57600.0;
    const E3: f64 = 500.0 / 1113.0 - 7571.0 / 16695.0;
    const E4: f64 = 125.0 / 192.0 - 393.0 / 640.0;
    const E5: f64 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
    const E6: f64 = 11.0 / 84.0 - 187.0 / 2100.0;
    const E7: f64 = -1.0 / 40.0;

    let stage = |coeffs: &[(f64, &[f64; N])]| -> [f64; N] {
        let mut out = *y;
        for &(c, k) in coeffs {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
        out
    };

    let k2 = f(t + h / 5.0, &stage(&[(A21, k1)]));
    let k3 = f(t + 3.0 * h / 10.0, &stage(&[(A31, k1), (A32, &k2)]));
    let k4 = f(t + 4.0 * h / 5.0, &stage(&[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        t + 8.0 * h / 9.0,
        &stage(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &stage(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = stage(&[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y_new);

    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, k7, err)
}
