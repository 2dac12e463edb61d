//! Piecewise-constant potential model: layers, unit cell and unit conventions.
//!
//! Energies are in eV, lengths in nm and masses are ratios to the free
//! electron mass. The embedding half-spaces sit at zero potential.

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// hbar^2 / (2 m0) in eV nm^2 (CODATA 2018).
pub const HBAR2_OVER_2M0_EV_NM2: f64 = 0.038_099_821_1;
/// Reduced Planck constant in eV fs (CODATA 2018).
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// Unit carrier for the kinetic-energy scale and the time scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    pub hbar2_over_2m0: T,
    pub hbar: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn codata() -> Self {
        Self {
            hbar2_over_2m0: T::lit(HBAR2_OVER_2M0_EV_NM2),
            hbar: T::lit(HBAR_EV_FS),
        }
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata()
    }
}

/// One constant-potential slab.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer<T> {
    #[serde(rename = "width_nm")]
    pub width: T,
    #[serde(rename = "potential_ev")]
    pub potential: T,
}

impl<T: Real> Layer<T> {
    pub fn new(width: T, potential: T) -> Result<Self> {
        let layer = Self { width, potential };
        layer.validate(0)?;
        Ok(layer)
    }

    fn validate(&self, index: usize) -> Result<()> {
        if !(self.width > T::zero()) || !self.width.is_finite() {
            return Err(Error::InvalidCell(format!(
                "layer {index} has non-positive width {}",
                self.width
            )));
        }
        if !self.potential.is_finite() {
            return Err(Error::InvalidCell(format!(
                "layer {index} has non-finite potential"
            )));
        }
        Ok(())
    }
}

/// How a uniform potential offset is applied to a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PotentialShift {
    /// Every layer of the structure moves; the half-spaces stay at zero.
    #[default]
    AllLayers,
    /// Only layers with positive potential move.
    BarriersOnly,
}

/// One period of the structure: an ordered layer stack and the effective mass.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCell<T> {
    layers: Vec<Layer<T>>,
    effective_mass_ratio: T,
    constants: PhysicalConstants<T>,
}

impl<T: Real> UnitCell<T> {
    pub fn new(layers: Vec<Layer<T>>, effective_mass_ratio: T) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidCell(
                "a unit cell needs at least one layer".into(),
            ));
        }
        for (i, layer) in layers.iter().enumerate() {
            layer.validate(i)?;
        }
        if !(effective_mass_ratio > T::zero()) || !effective_mass_ratio.is_finite() {
            return Err(Error::InvalidCell(format!(
                "effective mass ratio must be positive, got {effective_mass_ratio}"
            )));
        }
        Ok(Self {
            layers,
            effective_mass_ratio,
            constants: PhysicalConstants::codata(),
        })
    }

    /// Barrier followed by well, wells at the half-space potential.
    pub fn barrier_well(
        barrier_width: T,
        well_width: T,
        barrier_height: T,
        effective_mass_ratio: T,
    ) -> Result<Self> {
        Self::new(
            vec![
                Layer::new(barrier_width, barrier_height)?,
                Layer::new(well_width, T::zero())?,
            ],
            effective_mass_ratio,
        )
    }

    /// GaAs/Al0.3Ga0.7As cell: 2.5 nm barrier, 6.5 nm well, 288 meV offset, m* = 0.072 m0.
    pub fn gaas_superlattice() -> Self {
        Self::barrier_well(T::lit(2.5), T::lit(6.5), T::lit(0.288), T::lit(0.072))
            .expect("reference parameters are valid")
    }

    /// Potential-free cell of length `width`.
    pub fn free(width: T, effective_mass_ratio: T) -> Result<Self> {
        Self::new(vec![Layer::new(width, T::zero())?], effective_mass_ratio)
    }

    pub fn with_constants(mut self, constants: PhysicalConstants<T>) -> Self {
        self.constants = constants;
        self
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn effective_mass_ratio(&self) -> T {
        self.effective_mass_ratio
    }

    pub fn constants(&self) -> &PhysicalConstants<T> {
        &self.constants
    }

    /// Period length d.
    pub fn period(&self) -> T {
        self.layers.iter().map(|l| l.width).sum()
    }

    pub fn is_free(&self) -> bool {
        self.layers.iter().all(|l| l.potential == T::zero())
    }

    /// Largest layer potential.
    pub fn max_potential(&self) -> T {
        self.layers
            .iter()
            .map(|l| l.potential)
            .fold(T::neg_infinity(), T::max)
    }

    /// `(barrier, well)` when the cell is a two-layer stack whose second layer
    /// sits at the half-space potential.
    pub fn as_barrier_well(&self) -> Option<(Layer<T>, Layer<T>)> {
        match self.layers.as_slice() {
            [barrier, well] if well.potential == T::zero() => Some((*barrier, *well)),
            _ => None,
        }
    }

    /// Copy with every affected layer potential raised by `delta`.
    pub fn shifted(&self, delta: T, shift: PotentialShift) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let moves = match shift {
                    PotentialShift::AllLayers => true,
                    PotentialShift::BarriersOnly => l.potential > T::zero(),
                };
                Layer {
                    width: l.width,
                    potential: if moves {
                        l.potential + delta
                    } else {
                        l.potential
                    },
                }
            })
            .collect();
        Self {
            layers,
            effective_mass_ratio: self.effective_mass_ratio,
            constants: self.constants,
        }
    }

    /// 2m*/hbar^2 in 1/(eV nm^2): converts an energy to a squared wavenumber.
    pub fn inverse_kinetic_scale(&self) -> T {
        self.effective_mass_ratio / self.constants.hbar2_over_2m0
    }

    /// Squared wavenumber K^2 = 2m*(E - V)/hbar^2 in a layer with potential `v`.
    /// Negative inside classically forbidden layers.
    pub fn wavenumber_squared(&self, energy: T, potential: T) -> T {
        (energy - potential) * self.inverse_kinetic_scale()
    }

    /// hbar k / m* in nm/fs for a real wavenumber `k` in 1/nm.
    pub fn velocity_of_wavenumber(&self, k: T) -> T {
        let two = T::lit(2.0);
        two * self.constants.hbar2_over_2m0 * k / (self.effective_mass_ratio * self.constants.hbar)
    }

    /// hbar / m* in nm^2/fs.
    pub fn hbar_over_mass(&self) -> T {
        self.velocity_of_wavenumber(T::one())
    }
}

/// Wavenumber in a zero-potential region, k = sqrt(2 m* E) / hbar, in 1/nm.
pub fn wavevector_well<T: Real>(energy: T, cell: &UnitCell<T>) -> Result<T> {
    if !(energy > T::zero()) {
        return Err(Error::Domain {
            quantity: "energy",
            value: energy.to_f64_lossy(),
        });
    }
    Ok((energy * cell.inverse_kinetic_scale()).sqrt())
}

/// Decay constant under a barrier, kappa = sqrt(2 m* (Vb - E)) / hbar, in 1/nm.
///
/// Requires `0 < E < Vb`; at or above the barrier top the barrier wavenumber
/// is real and callers work with [`UnitCell::wavenumber_squared`] instead.
pub fn decay_constant_barrier<T: Real>(energy: T, barrier: T, cell: &UnitCell<T>) -> Result<T> {
    if !(energy > T::zero()) {
        return Err(Error::Domain {
            quantity: "energy",
            value: energy.to_f64_lossy(),
        });
    }
    if energy >= barrier {
        return Err(Error::PropagatingBarrier {
            energy: energy.to_f64_lossy(),
            barrier: barrier.to_f64_lossy(),
        });
    }
    Ok(((barrier - energy) * cell.inverse_kinetic_scale()).sqrt())
}

/// Mismatch coefficients c1,2 = (k/kappa +- kappa/k) / 2.
pub fn c_coefficients<T: Real>(k: T, kappa: T) -> Result<(T, T)> {
    if !(k > T::zero()) {
        return Err(Error::Domain {
            quantity: "k",
            value: k.to_f64_lossy(),
        });
    }
    if !(kappa > T::zero()) {
        return Err(Error::Domain {
            quantity: "kappa",
            value: kappa.to_f64_lossy(),
        });
    }
    let half = T::lit(0.5);
    Ok((
        half * (k / kappa + kappa / k),
        half * (k / kappa - kappa / k),
    ))
}

/// Below this |K s| the trigonometric kernels switch to their Taylor series.
const SERIES_THRESHOLD: f64 = 1e-5;

/// Propagation kernels of one layer as functions of lambda = K^2 (real).
///
/// `c = cos(K s)` and `s0 = sin(K s)/K` are even in K, hence real for real
/// lambda and independent of the square-root branch. Inside a barrier they
/// become `cosh(kappa s)` and `sinh(kappa s)/kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernels<T> {
    pub c: T,
    pub s0: T,
}

impl<T: Real> Kernels<T> {
    pub fn new(lambda: T, s: T) -> Self {
        let x2 = lambda * s * s;
        if x2.abs() < T::lit(SERIES_THRESHOLD * SERIES_THRESHOLD) {
            // cos: 1 - x^2/2 + x^4/24 ; sin(x)/x: 1 - x^2/6 + x^4/120
            let c = T::one() - x2 / T::lit(2.0) + x2 * x2 / T::lit(24.0);
            let s0 = s * (T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0));
            return Self { c, s0 };
        }
        if lambda > T::zero() {
            let k = lambda.sqrt();
            Self {
                c: (k * s).cos(),
                s0: (k * s).sin() / k,
            }
        } else {
            let kappa = (-lambda).sqrt();
            Self {
                c: (kappa * s).cosh(),
                s0: (kappa * s).sinh() / kappa,
            }
        }
    }

    /// `K sin(K s) = lambda * s0`.
    #[inline]
    pub fn s1(&self, lambda: T) -> T {
        lambda * self.s0
    }

    /// Derivatives `(dc/dlambda, ds0/dlambda)`.
    pub fn d_dlambda(lambda: T, s: T) -> (T, T) {
        let kern = Self::new(lambda, s);
        let half = T::lit(0.5);
        let dc = -half * s * kern.s0;
        let x2 = lambda * s * s;
        let ds0 = if x2.abs() < T::lit(1e-2) {
            // sum_{m>=1} m (-1)^m lambda^{m-1} s^{2m+1} / (2m+1)!
            let mut sum = T::zero();
            let mut pow = s * s * s; // lambda^{m-1} s^{2m+1}
            let mut fact = T::lit(6.0); // (2m+1)!
            for m in 1..=12u32 {
                let mf = T::lit(m as f64);
                let term = mf * pow / fact;
                sum = if m % 2 == 1 { sum - term } else { sum + term };
                pow = pow * lambda * s * s;
                fact = fact * T::lit(((2 * m + 2) * (2 * m + 3)) as f64);
            }
            sum
        } else {
            (s * kern.c - kern.s0) / (T::lit(2.0) * lambda)
        };
        (dc, ds0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_cell() -> UnitCell<f64> {
        UnitCell::gaas_superlattice()
    }

    #[test]
    fn codata_constant_matches_reference() {
        let c = PhysicalConstants::<f64>::codata();
        assert!((c.hbar2_over_2m0 / 0.0380998 - 1.0).abs() < 1e-6);
        assert!((c.hbar / 0.6582120 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn wavevector_examples() {
        let cell = reference_cell();
        assert!(matches!(
            wavevector_well(0.0, &cell),
            Err(Error::Domain { .. })
        ));
        let k = wavevector_well(0.288, &cell).unwrap();
        let expected = (0.288f64 * 0.072 / 0.0380998).sqrt();
        assert!((k / expected - 1.0).abs() < 1e-6);
        assert!((k - 0.7377).abs() < 1e-4);
        let k2 = wavevector_well(0.576, &cell).unwrap();
        assert!((k2 / k - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn decay_constant_examples() {
        let cell = reference_cell();
        let kappa = decay_constant_barrier(0.144, 0.288, &cell).unwrap();
        let k = wavevector_well(0.144, &cell).unwrap();
        assert!((kappa - k).abs() < 1e-15);
        let near = decay_constant_barrier(0.288 - 1e-12, 0.288, &cell).unwrap();
        assert!(near < 1e-5);
        let kappa = decay_constant_barrier(0.100, 0.288, &cell).unwrap();
        // sqrt(0.188 * 0.072 / 0.0380998211) = 0.596051...
        assert!((kappa - 0.596_051_389).abs() < 1e-8);
        assert!(matches!(
            decay_constant_barrier(0.3, 0.288, &cell),
            Err(Error::PropagatingBarrier { .. })
        ));
    }

    #[test]
    fn c_coefficient_examples() {
        assert_eq!(c_coefficients(1.3f64, 1.3).unwrap(), (1.0, 0.0));
        let (c1, c2): (f64, f64) = c_coefficients(2.0, 1.0).unwrap();
        assert!((c1 - 1.25).abs() < 1e-15 && (c2 - 0.75).abs() < 1e-15);
        assert!(c_coefficients(0.0, 1.0).is_err());
        assert!(c_coefficients(1.0, 0.0).is_err());
    }

    #[test]
    fn k_squared_plus_kappa_squared_is_constant() {
        let cell = reference_cell();
        let reference = 0.288 * cell.inverse_kinetic_scale();
        for i in 1..=100 {
            let e = 0.288 * i as f64 / 101.0;
            let k = wavevector_well(e, &cell).unwrap();
            let kappa = decay_constant_barrier(e, 0.288, &cell).unwrap();
            assert!(((k * k + kappa * kappa) / reference - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cell_validation_names_layer() {
        let err = UnitCell::new(
            vec![
                Layer {
                    width: 1.0,
                    potential: 0.0,
                },
                Layer {
                    width: -2.0,
                    potential: 0.1,
                },
            ],
            0.07,
        )
        .unwrap_err();
        assert!(err.to_string().contains("layer 1"), "{err}");
        assert!(UnitCell::<f64>::new(vec![], 0.07).is_err());
        assert!(UnitCell::free(1.0, 0.0).is_err());
    }

    #[test]
    fn kernels_are_continuous_across_series_switch() {
        for &s in &[0.5f64, 2.5, 6.5] {
            for &sign in &[1.0f64, -1.0] {
                let lam = sign * (0.99e-5 / s) * (0.99e-5 / s);
                let series = Kernels::new(lam, s);
                let k = lam.abs().sqrt();
                let (c, s0) = if sign > 0.0 {
                    ((k * s).cos(), (k * s).sin() / k)
                } else {
                    ((k * s).cosh(), (k * s).sinh() / k)
                };
                assert!((series.c - c).abs() < 1e-15);
                assert!((series.s0 - s0).abs() < 1e-10 * s);
            }
        }
        let zero = Kernels::new(0.0f64, 2.0);
        assert_eq!(zero.c, 1.0);
        assert_eq!(zero.s0, 2.0);
    }

    #[test]
    fn kernel_derivatives_match_finite_differences() {
        for &lambda in &[-0.7f64, -1e-4, 1e-4, 0.3, 1.2] {
            let s = 2.5f64;
            let (dc, ds0) = Kernels::d_dlambda(lambda, s);
            let h = 1e-6;
            let p = Kernels::new(lambda + h, s);
            let m = Kernels::new(lambda - h, s);
            assert!((dc - (p.c - m.c) / (2.0 * h)).abs() < 1e-7 * (1.0 + dc.abs()));
            assert!((ds0 - (p.s0 - m.s0) / (2.0 * h)).abs() < 1e-7 * (1.0 + ds0.abs()));
        }
    }
}
