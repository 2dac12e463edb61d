//! Gauss-Legendre quadrature.

use crate::scalar::{real, Cplx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Rule with `order` nodes on `[-1, 1]`, found by Newton iteration on `P_order`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let m = T::from_usize(order).expect("order fits scalar");
        let (one, two, quarter, half) = (T::one(), T::lit(2.0), T::lit(0.25), T::lit(0.5));
        let mut nodes = vec![T::zero(); order];
        let mut weights = vec![T::zero(); order];
        for i in 0..order.div_ceil(2) {
            let fi = T::from_usize(i + 1).expect("index fits scalar");
            let mut x = (T::PI() * (fi - quarter) / (m + half)).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (mut p0, mut p1) = (one, x);
                for l in 2..=order {
                    let fl = T::from_usize(l).expect("index fits scalar");
                    let p2 = ((two * fl - one) * x * p1 - (fl - one) * p0) / fl;
                    p0 = p1;
                    p1 = p2;
                }
                let (p, pm1) = if order == 1 { (x, one) } else { (p1, p0) };
                dp = m * (x * p - pm1) / (x * x - one);
                let dx = p / dp;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    break;
                }
            }
            if order == 1 {
                nodes[0] = T::zero();
                weights[0] = two;
                break;
            }
            let w = two / ((one - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, lo: T, hi: T, mut f: F) -> T {
        let half = T::lit(0.5);
        let (mid, rad) = ((lo + hi) * half, (hi - lo) * half);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + rad * x))
            .sum::<T>()
            * rad
    }

    pub fn integrate_complex<F: FnMut(T) -> Cplx<T>>(&self, lo: T, hi: T, mut f: F) -> Cplx<T> {
        let half = T::lit(0.5);
        let (mid, rad) = ((lo + hi) * half, (hi - lo) * half);
        let mut acc = Cplx::new(T::zero(), T::zero());
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + rad * x) * real(w);
        }
        acc * real(rad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for m in 1..40 {
            let g = GaussLegendre::<f64>::new(m);
            let s: f64 = g.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "order {m}");
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2m_minus_1() {
        let g = GaussLegendre::<f64>::new(6);
        for p in 0..12 {
            let got = g.integrate(0.0, 2.0, |x| x.powi(p));
            let exact = 2f64.powi(p + 1) / (p + 1) as f64;
            assert!((got - exact).abs() < 1e-12 * exact, "degree {p}");
        }
    }

    #[test]
    fn oscillatory_and_complex() {
        let g = GaussLegendre::<f64>::new(32);
        let got = g.integrate(0.0, 5.0, |x| (3.0 * x).cos());
        assert!((got - (15.0f64).sin() / 3.0).abs() < 1e-13);
        let z = g.integrate_complex(0.0, 1.0, |x| Cplx::new(0.0, 2.0 * x).exp());
        let exact = (Cplx::new(0.0, 2.0).exp() - 1.0) / Cplx::new(0.0, 2.0);
        assert!((z - exact).norm() < 1e-14);
    }

    #[test]
    fn single_precision_rule() {
        let g = GaussLegendre::<f32>::new(8);
        let got = g.integrate(0.0, 1.0, |x| x * x);
        assert!((got - 1.0 / 3.0).abs() < 1e-6);
    }
}
