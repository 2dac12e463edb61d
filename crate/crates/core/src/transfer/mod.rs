//! Transfer matrices of time-reversal symmetric, flux-conserving regions.
//!
//! Coefficients of the plane waves `A+ exp(ik(x - x0))` and
//! `A- exp(-ik(x - x0))`, each referenced to its own interface `x0`, satisfy
//! `(A_L+, A_L-) = M (A_R+, A_R-)` with
//!
//! ```text
//! M = | a   b  |
//!     | b*  a* |,     |a|^2 - |b|^2 = 1.
//! ```
//!
//! A wave incident from the left gives `t = 1/a` and `r = b*/a`; a
//! potential-free slab of length d has `a = exp(-ikd)`.

pub mod barrier_well;

use crate::error::{Error, Result};
use crate::potential::{wavevector_well, Kernels, Layer, UnitCell};
use crate::scalar::{cplx, imag, real, Cplx, Real};

pub use barrier_well::BarrierWellForm;

/// Unit-cell transfer matrix stored as its first row `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix<T> {
    pub a: Cplx<T>,
    pub b: Cplx<T>,
}

impl<T: Real> TransferMatrix<T> {
    pub fn new(a: Cplx<T>, b: Cplx<T>) -> Self {
        Self { a, b }
    }

    pub fn identity() -> Self {
        Self::new(real(T::one()), real(T::zero()))
    }

    /// Inverse of a determinant-one matrix: `(a*, -b)`.
    pub fn inverse(&self) -> Self {
        Self::new(self.a.conj(), -self.b)
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &Self) -> Self {
        Self::new(
            self.a * rhs.a + self.b * rhs.b.conj(),
            self.a * rhs.b + self.b * rhs.a.conj(),
        )
    }

    /// `|a|^2 - |b|^2`, equal to one for physical matrices.
    pub fn determinant(&self) -> T {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    pub fn transmission_amplitude(&self) -> Cplx<T> {
        self.a.inv()
    }

    pub fn reflection_amplitude(&self) -> Cplx<T> {
        self.b.conj() / self.a
    }

    pub fn transmission(&self) -> T {
        T::one() / self.a.norm_sqr()
    }

    /// Product of `n` copies, evaluated left to right.
    pub fn power_by_repeated_product(&self, n: usize) -> NPeriodMatrix<T> {
        let mut acc = Self::identity();
        for _ in 0..n {
            acc = acc.compose(self);
        }
        NPeriodMatrix {
            a_n: acc.a,
            b_n: acc.b,
            n,
        }
    }

    /// n-th power through Chebyshev polynomials of `Re a`.
    pub fn nth_power(&self, n: usize) -> NPeriodMatrix<T> {
        nth_power_chebyshev(self, n)
    }
}

/// Transfer matrix of `n` identical periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NPeriodMatrix<T> {
    pub a_n: Cplx<T>,
    pub b_n: Cplx<T>,
    pub n: usize,
}

impl<T: Real> NPeriodMatrix<T> {
    pub fn as_matrix(&self) -> TransferMatrix<T> {
        TransferMatrix::new(self.a_n, self.b_n)
    }

    pub fn determinant(&self) -> T {
        self.as_matrix().determinant()
    }

    /// `T^(n) = |a^(n)|^-2`.
    pub fn transmission(&self) -> T {
        T::one() / self.a_n.norm_sqr()
    }

    /// `T^(n) = [1 + |b|^2 U_{n-1}^2(Re a)]^-1`, i.e. `[1 + |b^(n)|^2]^-1`.
    pub fn transmission_chebyshev_form(&self) -> T {
        T::one() / (T::one() + self.b_n.norm_sqr())
    }

    pub fn transmission_amplitude(&self) -> Cplx<T> {
        self.a_n.inv()
    }

    pub fn reflection_amplitude(&self) -> Cplx<T> {
        self.b_n.conj() / self.a_n
    }
}

/// `a^(n) = a U_{n-1}(Re a) - U_{n-2}(Re a)`, `b^(n) = b U_{n-1}(Re a)`.
pub fn nth_power_chebyshev<T: Real>(m: &TransferMatrix<T>, n: usize) -> NPeriodMatrix<T> {
    nth_power_with(m, n, crate::chebyshev::chebyshev_u)
}

/// Chebyshev power with a caller-supplied evaluator for U_m.
pub fn nth_power_with<T, F>(m: &TransferMatrix<T>, n: usize, u: F) -> NPeriodMatrix<T>
where
    T: Real,
    F: Fn(i64, T) -> T,
{
    assert!(n >= 1, "number of periods must be at least one");
    let x = m.a.re;
    let (u1, u2) = (u(n as i64 - 1, x), u(n as i64 - 2, x));
    NPeriodMatrix {
        a_n: m.a * u1 - real(u2),
        b_n: m.b * u1,
        n,
    }
}

/// Transfer matrix of a single layer embedded between zero-potential
/// reference media with wavenumber `k`.
///
/// `a = cos(Kw) - (i/2)(K sin(Kw)/k + k sin(Kw)/K)`,
/// `b = -(i/2)(K sin(Kw)/k - k sin(Kw)/K)`.
pub fn layer_matrix<T: Real>(k: T, lambda: T, width: T) -> TransferMatrix<T> {
    let kern = Kernels::new(lambda, width);
    let half = T::lit(0.5);
    let s1_over_k = kern.s1(lambda) / k;
    let k_s0 = k * kern.s0;
    TransferMatrix::new(
        cplx(kern.c, -half * (s1_over_k + k_s0)),
        imag(-half * (s1_over_k - k_s0)),
    )
}

/// Unit-cell matrix by composing the matrix of every layer.
pub fn unit_cell_matrix<T: Real>(energy: T, cell: &UnitCell<T>) -> Result<TransferMatrix<T>> {
    let k = wavevector_well(energy, cell)?;
    Ok(stack_matrix(energy, k, cell.layers(), cell))
}

pub(crate) fn stack_matrix<T: Real>(
    energy: T,
    k: T,
    layers: &[Layer<T>],
    cell: &UnitCell<T>,
) -> TransferMatrix<T> {
    layers
        .iter()
        .fold(TransferMatrix::identity(), |acc, layer| {
            let lambda = cell.wavenumber_squared(energy, layer.potential);
            acc.compose(&layer_matrix(k, lambda, layer.width))
        })
}

/// Energy derivative `da/dE` of the unit-cell element `a`.
///
/// Barrier/well cells use the analytic derivative of the closed form;
/// any other stack uses a Richardson-extrapolated central difference.
pub fn unit_cell_derivative<T: Real>(energy: T, cell: &UnitCell<T>) -> Result<Cplx<T>> {
    if let Some(form) = BarrierWellForm::from_cell(cell) {
        return Ok(form.evaluate(energy)?.da_de);
    }
    richardson_derivative(energy, |e| unit_cell_matrix(e, cell).map(|m| m.a))
}

/// Central difference with one Richardson step: `(4 D(h/2) - D(h)) / 3`.
pub fn richardson_derivative<T, F>(x: T, f: F) -> Result<Cplx<T>>
where
    T: Real,
    F: Fn(T) -> Result<Cplx<T>>,
{
    let h = T::lit(1e-5)
        * (T::one() + x.abs())
        * (T::epsilon() / T::lit(f64::EPSILON)).powf(T::lit(0.25));
    if !(x - h > T::zero()) {
        return Err(Error::StepUnderflow {
            energy: x.to_f64_lossy(),
            step: h.to_f64_lossy(),
        });
    }
    let central =
        |step: T| -> Result<Cplx<T>> { Ok((f(x + step)? - f(x - step)?) / real(step + step)) };
    let coarse = central(h)?;
    let fine = central(h * T::lit(0.5))?;
    Ok((fine * real(T::lit(4.0)) - coarse) / real(T::lit(3.0)))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::chebyshev::chebyshev_u;
    use std::f64::consts::PI;

    fn reference_cell() -> UnitCell<f64> {
        UnitCell::gaas_superlattice()
    }

    fn close(x: Cplx<f64>, y: Cplx<f64>, tol: f64) -> bool {
        (x - y).norm() <= tol * (1.0 + y.norm())
    }

    #[test]
    fn free_slab_is_a_phase() {
        let cell = UnitCell::free(9.0, 0.072).unwrap();
        for &e in &[0.01, 0.05, 0.2, 1.3] {
            let m = unit_cell_matrix(e, &cell).unwrap();
            let k = wavevector_well(e, &cell).unwrap();
            assert!(close(m.a, Cplx::new(0.0, -k * 9.0).exp(), 1e-14));
            assert!(m.b.norm() < 1e-15);
            assert!(close(
                m.transmission_amplitude(),
                Cplx::new(0.0, k * 9.0).exp(),
                1e-14
            ));
            assert!(m.reflection_amplitude().norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_positive_energy() {
        assert!(unit_cell_matrix(0.0, &reference_cell()).is_err());
        assert!(unit_cell_matrix(-0.1, &reference_cell()).is_err());
    }

    #[test]
    fn matches_reference_values_at_50_mev() {
        // mpmath evaluation of the closed-form cell at E = 0.050 eV
        let m = unit_cell_matrix(0.050, &reference_cell()).unwrap();
        assert!(close(
            m.a,
            Cplx::new(0.876_885_097_065_324_04, -3.439_747_450_030_516_5),
            1e-13
        ));
        assert!(close(
            m.b,
            Cplx::new(-3.099_839_784_783_692_7, -1.411_305_531_101_927_5),
            1e-13
        ));
    }

    #[test]
    fn composition_identities() {
        let m = unit_cell_matrix(0.061, &reference_cell()).unwrap();
        assert_eq!(m.compose(&TransferMatrix::identity()), m);
        let id = m.compose(&m.inverse());
        assert!(close(id.a, Cplx::new(1.0, 0.0), 1e-13));
        assert!(id.b.norm() < 1e-13 * m.a.norm_sqr());
    }

    #[test]
    fn six_periods_at_60_mev_match_reference() {
        let m6 = unit_cell_matrix(0.060, &reference_cell())
            .unwrap()
            .nth_power(6);
        assert!(close(
            m6.a_n,
            Cplx::new(-0.833_747_677_638_779_14, 1.783_780_845_681_336_3),
            1e-10
        ));
        assert!(close(
            m6.b_n,
            Cplx::new(1.382_505_922_956_241_9, 0.982_693_578_069_273_16),
            1e-10
        ));
    }

    #[test]
    fn first_power_is_unchanged() {
        let m = unit_cell_matrix(0.07, &reference_cell()).unwrap();
        let m1 = m.nth_power(1);
        assert_eq!((m1.a_n, m1.b_n), (m.a, m.b));
    }

    #[test]
    fn chebyshev_power_vanishing_b_at_resonance_argument() {
        let m = TransferMatrix::new(Cplx::new((2.0 * PI / 6.0).cos(), -2.7), Cplx::new(0.0, 1.0));
        // fix |b| so that det = 1
        let b_abs = (m.a.norm_sqr() - 1.0).sqrt();
        let m = TransferMatrix::new(m.a, Cplx::new(0.0, b_abs));
        let m6 = m.nth_power(6);
        assert!(m6.b_n.norm() < 1e-14);
        assert!(close(m6.a_n, Cplx::new(1.0, 0.0), 1e-14));
    }

    #[test]
    fn transmission_forms_agree() {
        let m = unit_cell_matrix(0.055, &reference_cell()).unwrap();
        let m6 = m.nth_power(6);
        assert!((m6.transmission() - 0.114_178_717_880_443_47).abs() < 1e-12);
        assert!((m6.transmission() - m6.transmission_chebyshev_form()).abs() < 1e-12);
        let u = chebyshev_u(5, m.a.re);
        let direct = 1.0 / (1.0 + m.b.norm_sqr() * u * u);
        assert!((m6.transmission() - direct).abs() < 1e-12);
    }

    #[test]
    fn injected_evaluator_is_used() {
        let m = unit_cell_matrix(0.055, &reference_cell()).unwrap();
        let broken = nth_power_with(&m, 4, |k, x| chebyshev_u(k, x) * 1.01);
        assert!((broken.determinant() - 1.0).abs() > 1e-3);
    }

    #[test]
    fn analytic_derivative_matches_richardson() {
        let cell = reference_cell();
        for i in 1..40 {
            let e = 0.288 * i as f64 / 40.0 + 0.003;
            let analytic = unit_cell_derivative(e, &cell).unwrap();
            let numeric =
                richardson_derivative(e, |x| unit_cell_matrix(x, &cell).map(|m| m.a)).unwrap();
            assert!(
                close(analytic, numeric, 1e-7),
                "E={e}: {analytic} vs {numeric}"
            );
        }
    }
}
