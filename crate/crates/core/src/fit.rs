//! Least-squares power laws and limit extrapolation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `y ≈ prefactor · x^exponent`, fitted in log-log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS residual of the log-log regression.
    pub residual: f64,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "power-law fit needs at least two matched samples".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "power-law fit needs positive finite samples".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - icpt - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(PowerFit {
        exponent: slope,
        prefactor: icpt.exp(),
        residual: res,
    })
}

/// Result of fitting `v(r) = limit + Σ_k c_k r^{-e_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub coefficients: Vec<f64>,
    pub exponents: Vec<f64>,
    /// RMS residual of the fit (zero when the system is square).
    pub residual: f64,
}

/// Least-squares extrapolation to `r → ∞` with the decay model
/// `limit + Σ c_k r^{-e_k}`. Needs more samples than model terms minus one.
pub fn extrapolate(radii: &[f64], values: &[f64], exponents: &[f64]) -> Result<Extrapolation> {
    let n = radii.len();
    let p = exponents.len() + 1;
    if n != values.len() || n < p {
        return Err(Error::InvalidArgument(format!(
            "extrapolation with {} terms needs at least {} samples (got {})",
            p, p, n
        )));
    }
    // scale radii to keep the normal equations well conditioned
    let r0 = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let a = DMatrix::from_fn(n, p, |i, j| {
        if j == 0 {
            1.0
        } else {
            (radii[i] / r0).powf(-exponents[j - 1])
        }
    });
    let b = DVector::from_column_slice(values);
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidArgument(format!("extrapolation solve failed: {e}")))?;
    let r = &a * &x - &b;
    let coefficients = (1..p).map(|j| x[j] * r0.powf(exponents[j - 1])).collect();
    Ok(Extrapolation {
        limit: x[0],
        coefficients,
        exponents: exponents.to_vec(),
        residual: (r.norm_squared() / n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_law() {
        let xs = [10.0, 20.0, 40.0, 80.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-2.5)).collect();
        let f = fit_power_law(&xs, &ys).unwrap();
        assert!((f.exponent + 2.5).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-10);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn richardson_limit() {
        let rs = [50.0, 100.0, 200.0];
        let vs: Vec<f64> = rs.iter().map(|r: &f64| 1.0 + 1.5 / r + 0.75 / (r * r)).collect();
        let e = extrapolate(&rs, &vs, &[1.0, 2.0]).unwrap();
        assert!((e.limit - 1.0).abs() < 1e-12);
        assert!((e.coefficients[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_underdetermined_models() {
        assert!(extrapolate(&[1.0, 2.0], &[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0], &[1.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
