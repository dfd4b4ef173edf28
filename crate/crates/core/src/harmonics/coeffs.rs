use serde::{Deserialize, Serialize};

use super::legendre::{legendre_values, packed, trig_factor};
use crate::linalg3::Vec3;

/// `√(3/4π)`: converts `Y_1m` coefficients to Cartesian components.
pub(crate) fn l1_scale() -> f64 {
    (3.0 / (4.0 * std::f64::consts::PI)).sqrt()
}

/// Index of `(l, m)` in the flat coefficient layout.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    l * l + (l as i64 + m) as usize
}

/// Inverse of [`lm_index`].
pub fn lm_of_index(k: usize) -> (usize, i64) {
    let l = (k as f64).sqrt() as usize;
    let l = if (l + 1) * (l + 1) <= k { l + 1 } else { l };
    (l, k as i64 - (l * l + l) as i64)
}

/// Real spherical-harmonic coefficients `a_lm`, `0 <= l <= lmax`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCoeffs {
    lmax: usize,
    data: Vec<f64>,
}

impl HarmonicCoeffs {
    pub fn zeros(lmax: usize) -> Self {
        HarmonicCoeffs {
            lmax,
            data: vec![0.0; (lmax + 1) * (lmax + 1)],
        }
    }

    pub fn from_vec(lmax: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == (lmax + 1) * (lmax + 1)).then_some(HarmonicCoeffs { lmax, data })
    }

    /// A single harmonic with unit coefficient.
    pub fn single(lmax: usize, l: usize, m: i64, value: f64) -> Self {
        let mut c = Self::zeros(lmax.max(l));
        c.set(l, m, value);
        c
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        if l > self.lmax {
            0.0
        } else {
            self.data[lm_index(l, m)]
        }
    }

    pub fn set(&mut self, l: usize, m: i64, v: f64) {
        self.data[lm_index(l, m)] = v;
    }

    /// Iterates `(l, m, a_lm)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        self.data.iter().enumerate().map(|(k, &v)| {
            let (l, m) = lm_of_index(k);
            (l, m, v)
        })
    }

    /// Truncates or zero-pads to a new band limit.
    pub fn resized(&self, lmax: usize) -> Self {
        let mut out = Self::zeros(lmax);
        let n = out.data.len().min(self.data.len());
        out.data[..n].copy_from_slice(&self.data[..n]);
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        HarmonicCoeffs {
            lmax: self.lmax,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s * other`, padding to the larger band limit.
    pub fn axpy(&self, s: f64, other: &HarmonicCoeffs) -> Self {
        let mut out = self.resized(self.lmax.max(other.lmax));
        for (k, v) in other.data.iter().enumerate() {
            out.data[k] += s * v;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Euclidean norm of the coefficient vector (the L² norm on the unit sphere).
    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Keeps only odd-degree terms, doubled: the coefficients of `f(y) - f(-y)`.
    pub fn odd_part(&self) -> Self {
        let mut out = self.clone();
        for (k, v) in out.data.iter_mut().enumerate() {
            let (l, _) = lm_of_index(k);
            *v = if l % 2 == 1 { 2.0 * *v } else { 0.0 };
        }
        out
    }

    /// Coefficients of `-Δ₀ f` on the unit sphere.
    pub fn laplace_beltrami_apply(&self) -> Self {
        let mut out = self.clone();
        for (k, v) in out.data.iter_mut().enumerate() {
            let (l, _) = lm_of_index(k);
            *v *= (l * (l + 1)) as f64;
        }
        out
    }

    /// Splits off the `l = 1` part as a Cartesian vector `b`, so that
    /// `f(y) = b · y + remainder(y)` on the unit sphere.
    pub fn l1_projection(&self) -> (Vec3, HarmonicCoeffs) {
        let mut rem = self.clone();
        if self.lmax == 0 {
            return ([0.0; 3], rem);
        }
        let c = l1_scale();
        let b = [self.get(1, 1) * c, self.get(1, -1) * c, self.get(1, 0) * c];
        for m in -1..=1 {
            rem.set(1, m, 0.0);
        }
        (b, rem)
    }

    /// Coefficients of the linear function `b · y`.
    pub fn from_l1_vector(lmax: usize, b: Vec3) -> Self {
        let mut out = Self::zeros(lmax.max(1));
        let c = 1.0 / l1_scale();
        out.set(1, 1, b[0] * c);
        out.set(1, -1, b[1] * c);
        out.set(1, 0, b[2] * c);
        out
    }

    /// Pointwise evaluation in direction `dir` (need not be normalized).
    pub fn evaluate(&self, dir: Vec3) -> f64 {
        let r = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        let x = (dir[2] / r).clamp(-1.0, 1.0);
        let s = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt() / r;
        let phi = dir[1].atan2(dir[0]);
        let p = legendre_values(self.lmax, x, s);
        self.iter()
            .map(|(l, m, a)| a * p[packed(l, m.unsigned_abs() as usize)] * trig_factor(m, phi))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for k in 0..400 {
            let (l, m) = lm_of_index(k);
            assert!(m.unsigned_abs() as usize <= l);
            assert_eq!(lm_index(l, m), k);
        }
    }

    #[test]
    fn laplacian_eigenvalues() {
        let c = HarmonicCoeffs::single(3, 1, 0, 1.0);
        assert_eq!(c.laplace_beltrami_apply().get(1, 0), 2.0);
        let c = HarmonicCoeffs::single(3, 2, -2, 1.0);
        assert_eq!(c.laplace_beltrami_apply().get(2, -2), 6.0);
        let c = HarmonicCoeffs::single(3, 0, 0, 1.0);
        assert_eq!(c.laplace_beltrami_apply().max_abs(), 0.0);
    }

    #[test]
    fn l1_roundtrip_through_cartesian_vector() {
        let b = [3.0, 0.0, -1.0];
        let c = HarmonicCoeffs::from_l1_vector(4, b);
        let (b2, rem) = c.l1_projection();
        for i in 0..3 {
            assert!((b[i] - b2[i]).abs() < 1e-14);
        }
        assert!(rem.max_abs() < 1e-15);
    }

    #[test]
    fn l1_projection_of_y20_is_zero() {
        let c = HarmonicCoeffs::single(4, 2, 0, 1.0);
        let (b, rem) = c.l1_projection();
        assert_eq!(b, [0.0; 3]);
        assert_eq!(rem, c);
    }

    #[test]
    fn pointwise_evaluation_of_linear_function() {
        let c = HarmonicCoeffs::from_l1_vector(2, [3.0, 0.0, -1.0]);
        let d = [0.48, 0.6, 0.64];
        assert!((c.evaluate(d) - (3.0 * 0.48 - 0.64)).abs() < 1e-14);
    }
}
