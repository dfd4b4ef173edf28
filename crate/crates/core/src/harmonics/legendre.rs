//! Orthonormal associated Legendre functions and real solid harmonics.
//!
//! Real harmonics follow `Y_lm = P̄_l^|m|(cos θ) T_m(φ)` with `T_0 = 1`,
//! `T_m = √2 cos mφ` and `T_{-m} = √2 sin mφ`, and no Condon–Shortley phase,
//! so that `Y_{1,1}, Y_{1,-1}, Y_{1,0}` are `√(3/4π)` times `x, y, z`.

use std::f64::consts::PI;

use crate::jet::Jet;

/// Packed index of `(l, m)` with `m >= 0`.
#[inline]
pub fn packed(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

pub fn packed_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// `P̄_l^m(cos θ)` for all `0 <= m <= l <= lmax`, packed.
pub fn legendre_values(lmax: usize, x: f64, s: f64) -> Vec<f64> {
    let mut p = vec![0.0; packed_len(lmax)];
    p[0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            p[packed(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[packed(m - 1, m - 1)];
        }
        if m < lmax {
            p[packed(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * p[packed(m, m)];
        }
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[packed(l, m)] = a * (x * p[packed(l - 1, m)] - b * p[packed(l - 2, m)]);
        }
    }
    p
}

/// Values plus first and second θ-derivatives. Requires `sin θ != 0`.
pub fn legendre_with_derivatives(lmax: usize, theta: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (x, s) = (theta.cos(), theta.sin());
    let p = legendre_values(lmax, x, s);
    let mut dp = vec![0.0; p.len()];
    let mut d2p = vec![0.0; p.len()];
    for l in 0..=lmax {
        for m in 0..=l {
            let (lf, mf) = (l as f64, m as f64);
            let k = packed(l, m);
            let prev = if l > m {
                ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt() * p[packed(l - 1, m)]
            } else {
                0.0
            };
            dp[k] = (lf * x * p[k] - prev) / s;
            d2p[k] = -(x / s) * dp[k] - (lf * (lf + 1.0) - mf * mf / (s * s)) * p[k];
        }
    }
    (p, dp, d2p)
}

/// The φ factor `T_m(φ)`.
#[inline]
pub fn trig_factor(m: i64, phi: f64) -> f64 {
    match m {
        0 => 1.0,
        m if m > 0 => std::f64::consts::SQRT_2 * (m as f64 * phi).cos(),
        m => std::f64::consts::SQRT_2 * ((-m) as f64 * phi).sin(),
    }
}

/// A single real spherical harmonic at `(θ, φ)`.
pub fn real_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let p = legendre_values(l, theta.cos(), theta.sin());
    p[packed(l, m.unsigned_abs() as usize)] * trig_factor(m, phi)
}

fn factorial_ratio(l: usize, m: usize) -> f64 {
    // (l - m)! / (l + m)!
    ((l - m + 1)..=(l + m)).fold(1.0, |acc, k| acc / k as f64)
}

/// Regular solid harmonic `r^l Y_lm(x / r)` as a polynomial in jets.
pub fn solid_harmonic(l: usize, m: i64, x: &[Jet; 3]) -> Jet {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "|m| must not exceed l");
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let z = x[2];

    // (x + iy)^|m|
    let (mut re, mut im) = (Jet::constant(1.0), Jet::ZERO);
    for _ in 0..am {
        let nre = re * x[0] - im * x[1];
        let nim = re * x[1] + im * x[0];
        re = nre;
        im = nim;
    }

    // Π_l^m(z, r²), homogeneous part of r^l P_l^m(z/r) / ρ^m
    let dfact: f64 = (1..=am).map(|k| (2 * k - 1) as f64).product();
    let mut prev2 = Jet::ZERO;
    let mut prev = Jet::constant(dfact);
    for ll in (am + 1)..=l {
        let lf = ll as f64;
        let mf = am as f64;
        let next = (z * prev * (2.0 * lf - 1.0) - r2 * prev2 * (lf + mf - 1.0)) / (lf - mf);
        prev2 = prev;
        prev = next;
    }
    let norm = ((2.0 * l as f64 + 1.0) / (4.0 * PI) * factorial_ratio(l, am)).sqrt();
    let angular = match m {
        0 => Jet::constant(1.0),
        m if m > 0 => re * std::f64::consts::SQRT_2,
        _ => im * std::f64::consts::SQRT_2,
    };
    prev * angular * norm
}
