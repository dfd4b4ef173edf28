//! Second-order forward-mode differentiation in three variables.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to the Cartesian coordinates. Closed-form metric families are
//! written once in terms of jets and get exact first and second derivatives
//! for free.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet {
    pub const ZERO: Jet = Jet {
        v: 0.0,
        d: [0.0; 3],
        h: [[0.0; 3]; 3],
    };

    pub fn constant(v: f64) -> Self {
        Jet { v, ..Jet::ZERO }
    }

    pub fn variable(v: f64, axis: usize) -> Self {
        let mut j = Jet::constant(v);
        j.d[axis] = 1.0;
        j
    }

    /// The three coordinate functions seeded at `x`.
    pub fn coords(x: [f64; 3]) -> [Jet; 3] {
        [Jet::variable(x[0], 0), Jet::variable(x[1], 1), Jet::variable(x[2], 2)]
    }

    /// Composes with a scalar function given its value and first two derivatives.
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Jet {
        let mut out = Jet::constant(f0);
        for i in 0..3 {
            out.d[i] = f1 * self.d[i];
            for j in 0..3 {
                out.h[i][j] = f2 * self.d[i] * self.d[j] + f1 * self.h[i][j];
            }
        }
        out
    }

    pub fn recip(self) -> Jet {
        let inv = 1.0 / self.v;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn sqrt(self) -> Jet {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn powi(self, n: i32) -> Jet {
        match n {
            0 => Jet::constant(1.0),
            1 => self,
            _ => {
                let nf = n as f64;
                self.chain(
                    self.v.powi(n),
                    nf * self.v.powi(n - 1),
                    nf * (nf - 1.0) * self.v.powi(n - 2),
                )
            }
        }
    }

    pub fn powf(self, a: f64) -> Jet {
        self.chain(
            self.v.powf(a),
            a * self.v.powf(a - 1.0),
            a * (a - 1.0) * self.v.powf(a - 2.0),
        )
    }

    pub fn ln(self) -> Jet {
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }

    pub fn exp(self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    /// Trace of the Hessian (flat Laplacian).
    pub fn laplacian(&self) -> f64 {
        self.h[0][0] + self.h[1][1] + self.h[2][2]
    }

    pub fn scale(self, s: f64) -> Jet {
        let mut out = self;
        out.v *= s;
        for i in 0..3 {
            out.d[i] *= s;
            for j in 0..3 {
                out.h[i][j] *= s;
            }
        }
        out
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out.v += o.v;
        for i in 0..3 {
            out.d[i] += o.d[i];
            for j in 0..3 {
                out.h[i][j] += o.h[i][j];
            }
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..3 {
            out.d[i] = self.d[i] * o.v + self.v * o.d[i];
            for j in 0..3 {
                out.h[i][j] = self.h[i][j] * o.v + self.v * o.h[i][j] + self.d[i] * o.d[j] + self.d[j] * o.d[i];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, o: f64) -> Jet {
        let mut out = self;
        out.v += o;
        out
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, o: f64) -> Jet {
        self + (-o)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.scale(o)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, o: f64) -> Jet {
        self.scale(1.0 / o)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        o + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        (-o) + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        o.scale(self)
    }
}

/// Euclidean norm of a jet-valued vector.
pub fn norm(x: &[Jet; 3]) -> Jet {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn([f64; 3]) -> f64, jet: Jet, x: [f64; 3]) {
        let h = 1e-4;
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let d = (f(xp) - f(xm)) / (2.0 * h);
            assert!((d - jet.d[i]).abs() < 1e-7, "d{i}: {d} vs {}", jet.d[i]);
            for j in 0..3 {
                let g = |y: [f64; 3]| {
                    let mut yp = y;
                    let mut ym = y;
                    yp[j] += h;
                    ym[j] -= h;
                    (f(yp) - f(ym)) / (2.0 * h)
                };
                let dd = (g(xp) - g(xm)) / (2.0 * h);
                assert!((dd - jet.h[i][j]).abs() < 1e-5, "h{i}{j}: {dd} vs {}", jet.h[i][j]);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let x = [1.3, -0.4, 2.1];
        let f = |y: [f64; 3]| {
            let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
            (1.0 + 0.5 / r).powi(4) * y[1].exp() / (2.0 + y[2]).sqrt() + r.powf(-0.75) * y[0] * y[2]
        };
        let [a, b, c] = Jet::coords(x);
        let r = norm(&[a, b, c]);
        let jet = (1.0 + r.recip() * 0.5).powi(4) * b.exp() / (c + 2.0).sqrt() + r.powf(-0.75) * a * c;
        assert!((jet.v - f(x)).abs() < 1e-14);
        fd_check(f, jet, x);
    }

    #[test]
    fn harmonic_function_has_zero_laplacian() {
        let [a, b, c] = Jet::coords([2.0, 1.0, -3.0]);
        let r = norm(&[a, b, c]);
        let u = 1.0 + r.recip() * 0.5 + a / r.powi(3);
        assert!(u.laplacian().abs() < 1e-15);
    }
}
