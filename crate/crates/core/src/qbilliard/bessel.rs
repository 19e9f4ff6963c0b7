//! Bessel functions of the first kind for real order.
//!
//! Small arguments use the power series. Otherwise the ratio `J'/J` comes
//! from a continued fraction, the order is lowered by backward recurrence
//! and the normalization follows from the complex continued fraction for
//! `(J' + iY')/(J + iY)` together with the Wronskian (Steed's method).

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{exp, log, sqrt};

pub const MAX_ORDER: f64 = 1000.0;
pub const MAX_ARGUMENT: f64 = 1e4;

const SERIES_LIMIT: f64 = 2.0;
const EPS: f64 = f64::EPSILON;
const FPMIN: f64 = f64::MIN_POSITIVE / f64::EPSILON;
const MAX_ITER: usize = 100_000;
const RESCALE: f64 = 1e250;

/// `J_ν(x)` for `0 ≤ ν ≤ 1000`, `0 ≤ x ≤ 10⁴`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(0.0..=MAX_ORDER).contains(&nu) || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::OutOfRange(alloc::format!("J_nu(x) with nu = {nu}, x = {x}")));
    }
    Ok(if x < SERIES_LIMIT { series(nu, x) } else { steed(nu, x).0 })
}

/// `(J_ν(x), J'_ν(x))` for `x ≥ 2`; the series branch differentiates
/// term by term.
pub fn bessel_j_and_derivative(nu: f64, x: f64) -> Result<(f64, f64)> {
    if !(0.0..=MAX_ORDER).contains(&nu) || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::OutOfRange(alloc::format!("J_nu(x) with nu = {nu}, x = {x}")));
    }
    if x < SERIES_LIMIT {
        // J'_ν = (J_{ν−1} − J_{ν+1})/2 with J_{−1} = −J_1 at ν = 0
        let lower = if nu >= 1.0 { series(nu - 1.0, x) } else { series_signed(nu - 1.0, x) };
        Ok((series(nu, x), 0.5 * (lower - series(nu + 1.0, x))))
    } else {
        Ok(steed(nu, x))
    }
}

fn series(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let lead = nu * log(half) - libm::lgamma(nu + 1.0);
    if lead < -745.0 {
        return 0.0;
    }
    let mut term = exp(lead);
    let mut sum = term;
    let q = -half * half;
    for k in 1..200 {
        term *= q / (k as f64 * (k as f64 + nu));
        sum += term;
        if term.abs() <= EPS * sum.abs() {
            break;
        }
    }
    sum
}

/// Series for `−1 < ν < 0`, used only for the derivative at small order.
fn series_signed(nu: f64, x: f64) -> f64 {
    if (nu + 1.0).abs() < 1e-15 {
        return -series(1.0, x);
    }
    let half = 0.5 * x;
    let mut sum = 0.0;
    let mut k = 0.0;
    loop {
        let g = libm::tgamma(k + nu + 1.0);
        let term = libm::pow(-1.0, k) * libm::pow(half, 2.0 * k + nu) / (libm::tgamma(k + 1.0) * g);
        sum += term;
        k += 1.0;
        if term.abs() <= EPS * sum.abs() || k > 200.0 {
            return sum;
        }
    }
}

fn steed(nu: f64, x: f64) -> (f64, f64) {
    let nl = ((nu - x + 1.5).max(0.0)) as usize;
    let xmu = nu - nl as f64;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: f = J'_ν / J_ν
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..MAX_ITER {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }

    // downward recurrence to order xmu, rescaling to avoid overflow
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let mut rjl1 = rjl;
    let mut rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let t = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * t - rjl;
        rjl = t;
        if rjl.abs() > RESCALE {
            rjl /= RESCALE;
            rjpl /= RESCALE;
            rjl1 /= RESCALE;
            rjp1 /= RESCALE;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    // CF2: p + iq = (J' + iY')/(J + iY) at order xmu
    let mut a = 0.25 - xmu * xmu;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    for i in 1..MAX_ITER {
        a += (2 * i) as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() <= EPS {
            break;
        }
    }
    let gam = (p - f) / q;
    let rjmu = sqrt(w / ((p - f) * gam + q)).copysign(rjl);
    let scale = rjmu / rjl;
    (rjl1 * scale, rjp1 * scale)
}

/// Zeros of `J_ν` in `(0, x_max]`, ascending, each refined by bisection
/// to `tol`.
///
/// No zero lies below `ν` and consecutive zeros are more than `2.5` apart
/// for the orders used here, so a scan in steps of one half brackets each
/// one exactly once.
pub fn bessel_zeros(nu: f64, x_max: f64, tol: f64) -> Result<alloc::vec::Vec<f64>> {
    const STEP: f64 = 0.5;
    let mut out = alloc::vec::Vec::new();
    let mut a = nu.max(1e-3);
    if a >= x_max {
        return Ok(out);
    }
    let mut fa = bessel_j(nu, a)?;
    while a < x_max {
        let b = (a + STEP).min(x_max);
        let fb = bessel_j(nu, b)?;
        if fb == 0.0 {
            out.push(b);
        } else if fa * fb < 0.0 {
            out.push(bisect(nu, a, b, fa, tol)?);
        }
        a = b;
        fa = fb;
    }
    Ok(out)
}

fn bisect(nu: f64, mut lo: f64, mut hi: f64, mut flo: f64, tol: f64) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = bessel_j(nu, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sin};

    /// Independent oracle: `J_ν(x) = (1/π)∫₀^π cos(ντ − x sin τ)dτ
    /// − (sin νπ/π)∫₀^∞ e^{−x sinh t − νt}dt` by composite Simpson.
    fn integral(nu: f64, x: f64) -> f64 {
        let n = 200_000;
        let h = PI / n as f64;
        let f = |t: f64| cos(nu * t - x * sin(t));
        let mut s = f(0.0) + f(PI);
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        let mut total = s * h / 3.0 / PI;
        let snp = sin(nu * PI);
        if snp.abs() > 1e-15 {
            let (m, tmax) = (400_000, 12.0);
            let h = tmax / m as f64;
            let g = |t: f64| exp(-x * libm::sinh(t) - nu * t);
            let mut s = g(0.0) + g(tmax);
            for k in 1..m {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
            }
            total -= snp / PI * s * h / 3.0;
        }
        total
    }

    #[test]
    fn against_integral_representation() {
        for &(nu, x) in &[
            (0.0, 0.5),
            (0.0, 2.404825557695773),
            (1.0, 1.9),
            (1.0, 2.1),
            (2.0, 5.0),
            (2.5, 7.3),
            (12.0, 3.0),
            (12.0, 20.0),
            (24.0, 30.0),
            (7.5, 100.0),
            (36.0, 36.5),
            (0.3, 40.0),
        ] {
            let want = integral(nu, x);
            let got = bessel_j(nu, x).unwrap();
            assert!((got - want).abs() < 1e-12, "J_{nu}({x}) = {got}, oracle {want}");
        }
    }

    #[test]
    fn trivial_values_and_range() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3.0, 0.0).unwrap(), 0.0);
        assert!(bessel_j(1001.0, 1.0).is_err());
        assert!(bessel_j(1.0, 2e4).is_err());
        assert!(bessel_j(-1.0, 1.0).is_err());
        // tiny but finite far below the turning point
        let v = bessel_j(900.0, 50.0).unwrap();
        assert!(v.is_finite() && v.abs() < 1e-300);
    }

    #[test]
    fn large_argument_asymptote() {
        let mut last = f64::INFINITY;
        for x in [50.0, 500.0, 5000.0] {
            let nu = 2.0;
            let asym = sqrt(2.0 / (PI * x)) * cos(x - nu * PI / 2.0 - PI / 4.0);
            let err = (bessel_j(nu, x).unwrap() - asym).abs() / sqrt(2.0 / (PI * x));
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn recurrence_holds_across_branches() {
        // J_{ν−1} + J_{ν+1} = (2ν/x) J_ν
        for &(nu, x) in &[(1.5, 1.99), (1.5, 2.01), (60.0, 61.0), (250.0, 300.0), (480.0, 9000.0)] {
            let l = bessel_j(nu - 1.0, x).unwrap();
            let r = bessel_j(nu + 1.0, x).unwrap();
            let m = bessel_j(nu, x).unwrap();
            assert!((l + r - 2.0 * nu / x * m).abs() < 1e-12, "{nu} {x}");
        }
    }

    #[test]
    fn derivative_matches_difference() {
        for &(nu, x) in &[(0.0, 1.0), (3.0, 1.5), (3.0, 10.0), (40.0, 45.0)] {
            let (_, d) = bessel_j_and_derivative(nu, x).unwrap();
            let h = 1e-5;
            let fd = (bessel_j(nu, x + h).unwrap() - bessel_j(nu, x - h).unwrap()) / (2.0 * h);
            assert!((d - fd).abs() < 1e-8, "{nu} {x}: {d} {fd}");
        }
    }

    #[test]
    fn low_zeros() {
        let z0 = bessel_zeros(0.0, 10.0, 1e-12).unwrap();
        assert!((z0[0] - 2.404_825_557_695_773).abs() < 1e-10);
        assert_eq!(z0.len(), 3);
        let z2 = bessel_zeros(2.0, 6.0, 1e-12).unwrap();
        assert!((z2[0] - 5.135_622_301_840_683).abs() < 1e-10);
        assert!(z0.iter().all(|&z| bessel_j(0.0, z).unwrap().abs() < 1e-10));
        assert!(bessel_j(2.0, z2[0]).unwrap().abs() < 1e-10);
    }

    #[test]
    fn zeros_interlace_and_approach_pi() {
        for nu in [12.0, 24.0, 100.0] {
            let a = bessel_zeros(nu, 400.0, 1e-11).unwrap();
            let b = bessel_zeros(nu + 1.0, 400.0, 1e-11).unwrap();
            for k in 0..b.len() {
                assert!(a[k] < b[k]);
                if k + 1 < a.len() {
                    assert!(b[k] < a[k + 1]);
                }
            }
            let gaps: alloc::vec::Vec<f64> = a.windows(2).map(|w| w[1] - w[0]).collect();
            assert!(gaps.windows(2).all(|g| g[1] < g[0]));
            // McMahon: gaps exceed π by O(ν²/x²)
            let (last, x) = (gaps[gaps.len() - 1], a[a.len() - 1]);
            assert!(last > PI && last < PI * (1.0 + nu * nu / (x * x)), "{nu}: {last}");
        }
    }
}
