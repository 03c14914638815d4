//! Adaptive Gauss–Kronrod quadrature and a numerical Laplace transform.
//!
//! The 7/15-point Gauss–Kronrod pair and the QUADPACK error rescaling are the
//! standard ones; the adaptive driver bisects the interval with the largest
//! error estimate until the global estimate meets the requested tolerance.
//! All Kronrod abscissae are interior, so integrands may be singular at the
//! endpoints as long as they are integrable.
//!
//! [`forward_laplace`] evaluates `int_0^inf e^{-lambda t} g(t) dt` for
//! integrands with an algebraic singularity `|g| ~ t^{-p}` at the origin by
//! substituting the singularity away on `[0, 1]` and summing geometrically
//! growing windows on `[1, inf)` until the damped tail is exhausted.

use crate::{Error, Result};

// 15-point Kronrod abscissae (positive half, descending); even indices are
// the Kronrod-only nodes, odd indices the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

// 7-point Gauss weights, matching XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

// 15-point Kronrod weights, matching XGK.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// QUADPACK error rescaling: sharpen the raw `|K15 - G7|` difference using
/// the scale of the integrand's variation, with a floor at roundoff level.
fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * result_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

/// One 7/15 Gauss–Kronrod panel on `[a, b]`: returns the Kronrod result,
/// its rescaled error estimate, and the integral of `|f|` (the roundoff
/// scale).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..3 {
        let jtw = 2 * j + 1;
        let x = half * XGK[jtw];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += WG[j] * (f1 + f2);
        resk += WGK[jtw] * (f1 + f2);
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        if jtwm1 == 7 {
            break;
        }
        let x = half * XGK[jtwm1];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += WGK[jtwm1] * (f1 + f2);
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    let err = rescale_error((resk - resg) * half, resabs * half.abs(), resasc * half.abs());
    (result, err, resabs * half.abs())
}

/// Adaptive integral of `f` over `[a, b]` to the requested relative and
/// absolute tolerance (the looser of the two applies).
///
/// Fails with [`Error::Quadrature`] if the tolerance is not met after 4000
/// bisections, which in practice means the integrand is not integrable or
/// the tolerance is below what roundoff permits.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integrate requires finite bounds, got [{a}, {b}]")));
    }
    let mut segs: Vec<(f64, f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (r, e, rabs) = qk15(&f, a, b);
    segs.push((a, b, r, e, rabs));
    for _ in 0..4000 {
        let mut total = 0.0;
        let mut err = 0.0;
        let mut resabs = 0.0;
        for s in &segs {
            total += s.2;
            err += s.3;
            resabs += s.4;
        }
        // the second acceptance branch is the roundoff floor: once the error
        // estimate sits at rounding level of the absolute mass, further
        // splitting cannot help
        if err <= abs_tol.max(rel_tol * total.abs()) || err <= 200.0 * f64::EPSILON * resabs {
            return Ok(total);
        }
        // bisect the segment with the largest error estimate
        let (mut worst, mut worst_err) = (0, -1.0);
        for (i, s) in segs.iter().enumerate() {
            if s.3 > worst_err {
                worst = i;
                worst_err = s.3;
            }
        }
        let (sa, sb, _, _, _) = segs.swap_remove(worst);
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            return Err(Error::Quadrature(format!(
                "interval [{sa}, {sb}] cannot be split further; error estimate {worst_err:.3e}"
            )));
        }
        let (r1, e1, rabs1) = qk15(&f, sa, mid);
        let (r2, e2, rabs2) = qk15(&f, mid, sb);
        segs.push((sa, mid, r1, e1, rabs1));
        segs.push((mid, sb, r2, e2, rabs2));
    }
    Err(Error::Quadrature(format!(
        "no convergence on [{a}, {b}] after 4000 bisections (rel_tol {rel_tol:.1e})"
    )))
}

/// Numerical Laplace transform `int_0^inf e^{-lambda t} g(t) dt` for
/// `lambda > 0` and integrands bounded by `C t^{-p}` near the origin with
/// `p` in `[0, 1)`.
///
/// On `[0, 1]` the substitution `t = u^{1/(1-p)}` makes the integrand
/// bounded; on `[1, inf)` dyadic windows `[2^j, 2^{j+1}]` are summed until
/// either a window contributes below roundoff relative to the accumulated
/// value or the exponential damping underflows.
pub fn forward_laplace<F: Fn(f64) -> f64>(g: F, lambda: f64, p: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("forward_laplace requires lambda > 0, got {lambda}")));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "forward_laplace requires singularity exponent p in [0, 1), got {p}"
        )));
    }
    // [0, 1]: t = u^pow, dt = pow u^{pow-1} du, with pow - 1 = p/(1-p) >= 0
    let pow = 1.0 / (1.0 - p);
    let head = integrate(
        |u: f64| {
            let t = u.powf(pow);
            g(t) * (-lambda * t).exp() * pow * u.powf(pow - 1.0)
        },
        0.0,
        1.0,
        1e-11,
        1e-300,
    )?;
    let mut acc = head;
    // [1, inf): dyadic windows until damped out
    for j in 0..64 {
        let lo = f64::powi(2.0, j);
        let hi = 2.0 * lo;
        if lambda * lo > 745.0 {
            break; // e^{-lambda t} underflows on the whole window
        }
        let piece = integrate(
            |t| g(t) * (-lambda * t).exp(),
            lo,
            hi,
            1e-11,
            1e-17 * acc.abs().max(1e-30),
        )?;
        acc += piece;
        if piece.abs() <= 1e-16 * acc.abs() && j >= 2 {
            break;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{eval_f, eval_m, eval_q, KernelParams};
    use crate::testutil::{assert_close, assert_rel};

    #[test]
    fn polynomial_is_exact() {
        // K15 integrates degree <= 22 exactly; x^2 and x^9 are both inside
        let r = integrate(|x| x * x, 0.0, 1.0, 1e-14, 0.0).unwrap();
        assert_close(r, 1.0 / 3.0, 1e-15);
        let r = integrate(|x| x.powi(9), -1.0, 2.0, 1e-14, 0.0).unwrap();
        assert_close(r, (1024.0 - 1.0) / 10.0, 1e-12);
    }

    #[test]
    fn smooth_and_oscillatory_integrands() {
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-13, 0.0).unwrap();
        assert_rel(r, 2.0, 1e-13);
        let r = integrate(|x| (50.0 * x).cos(), 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert_rel(r, f64::sin(50.0) / 50.0, 1e-11);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // x^{-1/2} is integrable and never evaluated at 0 (interior nodes)
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert_rel(r, 2.0, 1e-9);
    }

    #[test]
    fn impossible_tolerance_is_an_error() {
        // a genuinely non-integrable singularity must be reported, not
        // silently truncated
        assert!(integrate(|x| 1.0 / x, 0.0, 1.0, 1e-10, 0.0).is_err());
    }

    #[test]
    fn laplace_of_constant_and_exponential() {
        for lambda in [0.5, 1.0, 2.0, 5.0] {
            assert_rel(forward_laplace(|_| 1.0, lambda, 0.0).unwrap(), 1.0 / lambda, 1e-10);
        }
        let r = forward_laplace(|t| (-t).exp(), 2.0, 0.0).unwrap();
        assert_rel(r, 1.0 / 3.0, 1e-10);
    }

    #[test]
    fn laplace_of_power_kernels() {
        // L[t^{-1/2}/Gamma(1/2)](lambda) = lambda^{-1/2}, exercising the
        // origin substitution with p = 1/2
        let bare = KernelParams::new(0.0, 0.5).unwrap();
        for lambda in [0.5, 1.0, 4.0] {
            let r = forward_laplace(|t| eval_f(bare, t).unwrap(), lambda, 0.5).unwrap();
            assert_rel(r, 1.0 / lambda.sqrt(), 1e-9);
        }
        // L[f(alpha, 1/2)](lambda) = (lambda + alpha)^{-1/2}
        let damped = KernelParams::new(1.0, 0.5).unwrap();
        let r = forward_laplace(|t| eval_f(damped, t).unwrap(), 2.0, 0.5).unwrap();
        assert_rel(r, 1.0 / 3.0f64.sqrt(), 1e-9);
    }

    #[test]
    fn laplace_of_memory_and_flux_kernels() {
        // L[m_1](lambda) = 2 (sqrt(lambda+1) - 1)/lambda
        let refs = [
            (0.5, 0.8989794855663561963946),
            (1.0, 0.8284271247461900976034),
            (2.0, 0.7320508075688772935274),
            (5.0, 0.5797958971132712392789),
        ];
        for (lambda, want) in refs {
            let r = forward_laplace(|t| eval_m(1.0, t).unwrap(), lambda, 0.5).unwrap();
            assert_rel(r, want, 1e-9);
        }
        // L[q_1](lambda) = 1/(sqrt(lambda) + 1)
        let refs = [
            (0.5, 0.5857864376269049511983),
            (1.0, 0.5),
            (2.0, 0.4142135623730950488017),
            (5.0, 0.3090169943749474241023),
        ];
        for (lambda, want) in refs {
            let r = forward_laplace(|t| eval_q(1.0, t).unwrap(), lambda, 0.5).unwrap();
            assert_rel(r, want, 1e-9);
        }
    }

    #[test]
    fn laplace_at_large_lambda() {
        // lambda far beyond the window cutoff: only the head contributes
        let bare = KernelParams::new(0.0, 0.5).unwrap();
        let r = forward_laplace(|t| eval_f(bare, t).unwrap(), 1e6, 0.5).unwrap();
        assert_rel(r, 1e-3, 1e-8);
    }

    #[test]
    fn laplace_domain_errors() {
        assert!(forward_laplace(|_| 1.0, 0.0, 0.0).is_err());
        assert!(forward_laplace(|_| 1.0, -1.0, 0.0).is_err());
        assert!(forward_laplace(|_| 1.0, 1.0, 1.0).is_err());
        assert!(forward_laplace(|_| 1.0, 1.0, -0.1).is_err());
        assert!(forward_laplace(|_| 1.0, 1.0, 1.5).is_err());
    }
}
