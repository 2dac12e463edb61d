//! Bracketing root finder (Brent's method) and a uniform sign-change scan.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default absolute energy tolerance for polished roots, in eV.
pub const ENERGY_TOL: f64 = 1e-12;
/// Iteration cap for [`brent`].
pub const MAX_ITER: usize = 200;

/// Finds a root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` differ in sign.
///
/// Inverse quadratic interpolation and secant steps are accepted only while
/// they stay inside the bracket and shrink it fast enough; otherwise the step
/// falls back to bisection, so convergence is guaranteed.
pub fn brent<T, F>(mut f: F, lo: T, hi: T, xtol: T, max_iter: usize) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let two = T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::RootNotBracketed(format!(
            "f({lo}) = {fa}, f({hi}) = {fb}"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + xtol / two;
        let m = (c - b) / two;
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (two * m * s, T::one() - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (two * m * q0 * (q0 - r) - (b - a) * (r - T::one())),
                    (q0 - T::one()) * (r - T::one()) * (s - T::one()),
                )
            };
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            let three = T::lit(3.0);
            if two * p < (three * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol {
            b + d
        } else if m > T::zero() {
            b + tol
        } else {
            b - tol
        };
        fb = f(b);
    }
    Err(Error::RootNotBracketed(format!(
        "no convergence in {max_iter} iterations near {b}"
    )))
}

/// Scans `[start, end]` with a uniform step and returns every sub-interval
/// on which `f` changes sign (or hits zero at the left node).
pub fn sign_changes<T, F>(mut f: F, start: T, end: T, step: T) -> Vec<(T, T)>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let count = ((end - start) / step).ceil().to_usize().unwrap_or(0).max(1);
    let node = |i: usize| -> T {
        if i == count {
            end
        } else {
            start + step * T::from_usize(i).expect("index fits scalar")
        }
    };
    let mut out = Vec::new();
    let mut x0 = node(0);
    let mut f0 = f(x0);
    for i in 1..=count {
        let x1 = node(i);
        let f1 = f(x1);
        let repeated = f0 == T::zero() && out.last().is_some_and(|&(_, b)| b == x0);
        if (f0 == T::zero() || f0.signum() != f1.signum()) && !repeated {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = brent(|x: f64| x * x * x - 2.0 * x - 5.0, 2.0, 3.0, 1e-14, 200).unwrap();
        assert!((r - 2.094_551_481_542_326_6).abs() < 1e-13);
    }

    #[test]
    fn finds_transcendental_root() {
        let r = brent(|x: f64| x.cos() - x, 0.0, 1.0, 1e-15, 200).unwrap();
        assert!((r - 0.739_085_133_215_160_6).abs() < 1e-14);
    }

    #[test]
    fn handles_steep_functions() {
        let r = brent(|x: f64| (x - 0.3).powi(3) * 1e8, 0.0, 1.0, 1e-12, 200).unwrap();
        assert!((r - 0.3).abs() < 1e-4);
        let r = brent(|x: f64| (50.0 * (x - 0.123)).tanh(), -3.0, 4.0, 1e-12, 200).unwrap();
        assert!((r - 0.123).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(brent(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12, 200).is_err());
    }

    #[test]
    fn endpoints_that_are_roots() {
        assert_eq!(brent(|x: f64| x - 1.0, 1.0, 2.0, 1e-12, 10).unwrap(), 1.0);
        assert_eq!(brent(|x: f64| x - 2.0, 1.0, 2.0, 1e-12, 10).unwrap(), 2.0);
    }

    #[test]
    fn scan_reports_each_crossing_once() {
        let brackets = sign_changes(|x: f64| (3.0 * x).sin(), 0.1, 7.0, 0.05);
        assert_eq!(brackets.len(), 6);
        for (k, (a, b)) in brackets.iter().enumerate() {
            let root = std::f64::consts::PI * (k + 1) as f64 / 3.0;
            assert!(*a <= root && root <= *b);
        }
        // exact zero on a node
        let brackets = sign_changes(|x: f64| x - 0.5, 0.0, 1.0, 0.25);
        assert_eq!(brackets.len(), 1);
    }
}
