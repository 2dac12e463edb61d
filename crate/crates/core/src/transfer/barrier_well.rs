//! Closed-form matrix elements of a barrier/well cell and their energy derivatives.
//!
//! ```text
//! Re a = cosh(kappa Lb) cos(k Lw) - c2 sinh(kappa Lb) sin(k Lw)
//! Im a = -cosh(kappa Lb) sin(k Lw) - c2 sinh(kappa Lb) cos(k Lw)
//! b    = i c1 sinh(kappa Lb) exp(i k Lw)
//! ```
//!
//! Written through the kernels of `lambda_b = -kappa^2`, so
//! `c2 sinh(kappa Lb) = s0 (k^2 + lambda_b) / 2k` and
//! `c1 sinh(kappa Lb) = s0 (k^2 - lambda_b) / 2k`; the same expressions
//! continue above the barrier top and through `E = Vb`.

use crate::error::{Error, Result};
use crate::potential::{Kernels, UnitCell};
use crate::scalar::{cplx, imag, Cplx, Real};

use super::TransferMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierWellForm<T> {
    pub barrier_width: T,
    pub well_width: T,
    pub barrier_height: T,
    inverse_kinetic_scale: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCell<T> {
    pub matrix: TransferMatrix<T>,
    /// dRe a/dE + i dIm a/dE, in 1/eV.
    pub da_de: Cplx<T>,
}

impl<T: Real> BarrierWellForm<T> {
    pub fn from_cell(cell: &UnitCell<T>) -> Option<Self> {
        let (barrier, well) = cell.as_barrier_well()?;
        Some(Self {
            barrier_width: barrier.width,
            well_width: well.width,
            barrier_height: barrier.potential,
            inverse_kinetic_scale: cell.inverse_kinetic_scale(),
        })
    }

    pub fn evaluate(&self, energy: T) -> Result<ClosedFormCell<T>> {
        if !(energy > T::zero()) {
            return Err(Error::Domain {
                quantity: "energy",
                value: energy.to_f64_lossy(),
            });
        }
        let g = self.inverse_kinetic_scale;
        let two = T::lit(2.0);
        let k = (g * energy).sqrt();
        let dk = g / (two * k);
        let lambda_b = g * (energy - self.barrier_height);

        let kern = Kernels::new(lambda_b, self.barrier_width);
        let (dc_dl, ds0_dl) = Kernels::d_dlambda(lambda_b, self.barrier_width);
        let (cb, s0b) = (kern.c, kern.s0);
        let (dcb, ds0b) = (dc_dl * g, ds0_dl * g);

        // c2 sinh(kappa Lb) and c1 sinh(kappa Lb)
        let mix = g * (two * energy - self.barrier_height);
        let x = s0b * mix / (two * k);
        let y = s0b * g * self.barrier_height / (two * k);
        let dx =
            ds0b * mix / (two * k) + s0b * (two * g) / (two * k) - s0b * mix * dk / (two * k * k);

        let theta = k * self.well_width;
        let dtheta = dk * self.well_width;
        let (sin, cos) = theta.sin_cos();

        let re_a = cb * cos - x * sin;
        let im_a = -cb * sin - x * cos;
        let d_re = dcb * cos - cb * sin * dtheta - dx * sin - x * cos * dtheta;
        let d_im = -dcb * sin - cb * cos * dtheta - dx * cos + x * sin * dtheta;

        let b = imag(y) * cplx(cos, sin);
        Ok(ClosedFormCell {
            matrix: TransferMatrix::new(cplx(re_a, im_a), b),
            da_de: cplx(d_re, d_im),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{c_coefficients, decay_constant_barrier, wavevector_well};
    use crate::transfer::unit_cell_matrix;

    fn reference_cell() -> UnitCell<f64> {
        UnitCell::gaas_superlattice()
    }

    #[test]
    fn closed_form_matches_layer_composition() {
        let cell = reference_cell();
        let form = BarrierWellForm::from_cell(&cell).unwrap();
        for i in 0..400 {
            let e = 1e-4 + 0.6 * i as f64 / 400.0;
            let closed = form.evaluate(e).unwrap().matrix;
            let composed = unit_cell_matrix(e, &cell).unwrap();
            let scale = 1.0 + closed.a.norm();
            assert!((closed.a - composed.a).norm() < 1e-13 * scale, "a at {e}");
            assert!((closed.b - composed.b).norm() < 1e-13 * scale, "b at {e}");
        }
    }

    #[test]
    fn textbook_hyperbolic_form_below_barrier() {
        let cell = reference_cell();
        let form = BarrierWellForm::from_cell(&cell).unwrap();
        let e = 0.1;
        let k = wavevector_well(e, &cell).unwrap();
        let kappa = decay_constant_barrier(e, 0.288, &cell).unwrap();
        let (c1, c2) = c_coefficients(k, kappa).unwrap();
        let re =
            (kappa * 2.5).cosh() * (k * 6.5).cos() - c2 * (kappa * 2.5).sinh() * (k * 6.5).sin();
        let im =
            -(kappa * 2.5).cosh() * (k * 6.5).sin() - c2 * (kappa * 2.5).sinh() * (k * 6.5).cos();
        let b = Cplx::new(0.0, c1 * (kappa * 2.5).sinh()) * Cplx::new(0.0, k * 6.5).exp();
        let got = form.evaluate(e).unwrap().matrix;
        assert!((got.a - Cplx::new(re, im)).norm() < 1e-13);
        assert!((got.b - b).norm() < 1e-13);
    }

    #[test]
    fn continuous_through_barrier_top() {
        let form = BarrierWellForm::from_cell(&reference_cell()).unwrap();
        let below = form.evaluate(0.288 - 1e-12).unwrap();
        let at = form.evaluate(0.288).unwrap();
        let above = form.evaluate(0.288 + 1e-12).unwrap();
        assert!((below.matrix.a - at.matrix.a).norm() < 1e-9);
        assert!((above.matrix.a - at.matrix.a).norm() < 1e-9);
        assert!((at.matrix.determinant() - 1.0).abs() < 1e-12);
        assert!((below.da_de - above.da_de).norm() < 1e-6 * at.da_de.norm());
    }

    #[test]
    fn derivative_matches_fine_central_difference() {
        let form = BarrierWellForm::from_cell(&reference_cell()).unwrap();
        let h = 1e-7;
        for i in 0..100 {
            let e = 0.049 + 0.0235 * i as f64 / 99.0;
            let d = form.evaluate(e).unwrap().da_de;
            let f = |x: f64| form.evaluate(x).unwrap().matrix.a;
            // one Richardson step on the 1e-7 eV central difference
            let d1 = (f(e + h) - f(e - h)) / (2.0 * h);
            let d2 = (f(e + h / 2.0) - f(e - h / 2.0)) / h;
            let rich = (d2 * 4.0 - d1) / 3.0;
            assert!((d.re - rich.re).abs() < 1e-6 * d.re.abs(), "E={e}");
        }
    }
}
