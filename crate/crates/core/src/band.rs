//! Dispersion relation `cos(q d) = Re a(E)` of the infinite periodic medium,
//! band-edge location and group velocity.

use crate::error::{Error, Result};
use crate::potential::UnitCell;
use crate::roots::{brent, ENERGY_TOL, MAX_ITER};
use crate::scalar::{Cplx, Real};
use crate::transfer::{unit_cell_derivative, unit_cell_matrix, TransferMatrix};

/// Default scan step for band and resonance searches, in eV (0.1 meV).
pub const DEFAULT_SCAN_STEP: f64 = 1e-4;

/// Uniform energy scan used to locate bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyScan<T> {
    pub e_min: T,
    pub e_max: T,
    pub step: T,
}

impl<T: Real> EnergyScan<T> {
    pub fn new(e_min: T, e_max: T, step: T) -> Self {
        Self { e_min, e_max, step }
    }

    /// From zero up to `e_max` with the default 0.1 meV step.
    pub fn up_to(e_max: T) -> Self {
        Self::new(T::zero(), e_max, T::lit(DEFAULT_SCAN_STEP))
    }

    /// Scan window ending 20 % above the largest layer potential.
    pub fn for_cell(cell: &UnitCell<T>) -> Self {
        let top = cell.max_potential().max(T::lit(0.05));
        Self::up_to(top * T::lit(1.2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandKind {
    /// Bands separated by gaps where |Re a| > 1.
    Gapped,
    /// Potential-free cell: |Re a| <= 1 everywhere and neighbouring bands touch.
    FreeMedium,
}

/// One allowed band: `|Re a| <= 1` on `[e_low, e_high]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandWindow<T> {
    pub band_index: usize,
    pub e_low: T,
    pub e_high: T,
    pub period: T,
    pub kind: BandKind,
}

impl<T: Real> BandWindow<T> {
    pub fn width(&self) -> T {
        self.e_high - self.e_low
    }

    pub fn contains(&self, energy: T) -> bool {
        energy >= self.e_low && energy <= self.e_high
    }

    pub(crate) fn check(&self, energy: T) -> Result<()> {
        if self.contains(energy) {
            Ok(())
        } else {
            Err(Error::OutOfBand {
                energy: energy.to_f64_lossy(),
                band: self.band_index,
                e_low: self.e_low.to_f64_lossy(),
                e_high: self.e_high.to_f64_lossy(),
            })
        }
    }
}

/// Point of the dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint<T> {
    pub energy: T,
    /// Bloch wavenumber in `[0, pi/d]`.
    pub q: T,
    pub band_index: usize,
}

impl<T: Real> DispersionPoint<T> {
    /// `exp(i q d)`.
    pub fn xi(&self, period: T) -> Cplx<T> {
        Cplx::from_polar(T::one(), self.q * period)
    }
}

/// A value that degenerates at band edges, where it is reported as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeValue<T> {
    pub value: T,
    pub at_edge: bool,
}

/// Locates the `band_index`-th allowed band (counted from the lowest energy).
pub fn find_band<T: Real>(
    cell: &UnitCell<T>,
    band_index: usize,
    scan: EnergyScan<T>,
) -> Result<BandWindow<T>> {
    if band_index == 0 {
        return Err(Error::Domain {
            quantity: "band index",
            value: 0.0,
        });
    }
    let not_found = || Error::BandNotFound {
        band: band_index,
        e_min: scan.e_min.to_f64_lossy(),
        e_max: scan.e_max.to_f64_lossy(),
    };
    let truncated = || Error::BandTruncated {
        band: band_index,
        e_min: scan.e_min.to_f64_lossy(),
        e_max: scan.e_max.to_f64_lossy(),
    };
    let period = cell.period();

    if cell.is_free() {
        // kd in [(m-1) pi, m pi]; known in closed form, so the scan window is not consulted
        let g = cell.inverse_kinetic_scale();
        let edge = |m: usize| {
            let k = T::PI() * T::from_usize(m).expect("band index fits") / period;
            k * k / g
        };
        return Ok(BandWindow {
            band_index,
            e_low: edge(band_index - 1),
            e_high: edge(band_index),
            period,
            kind: BandKind::FreeMedium,
        });
    }

    let re_a = |e: T| -> T {
        unit_cell_matrix(e, cell)
            .map(|m| m.a.re)
            .unwrap_or_else(|_| T::nan())
    };
    let start = if scan.e_min > T::zero() {
        scan.e_min
    } else {
        scan.step
    };
    if !(scan.step > T::zero()) || !(scan.e_max > start) {
        return Err(not_found());
    }
    let count = ((scan.e_max - start) / scan.step)
        .floor()
        .to_usize()
        .unwrap_or(0);
    let node = |i: usize| start + scan.step * T::from_usize(i).expect("node index fits");

    let polish = |outside: T, inside: T, re_out: T| -> Result<T> {
        let target = re_out.signum();
        let (lo, hi) = if outside < inside {
            (outside, inside)
        } else {
            (inside, outside)
        };
        brent(|e| re_a(e) - target, lo, hi, T::lit(ENERGY_TOL), MAX_ITER)
    };

    let mut seen = 0usize;
    let mut prev_e = node(0);
    let mut prev_re = re_a(prev_e);
    let mut prev_in = prev_re.abs() <= T::one();
    let mut low: Option<(T, bool)> = if prev_in { Some((prev_e, true)) } else { None };
    for i in 1..=count {
        let e = node(i);
        let re = re_a(e);
        let inside = re.abs() <= T::one();
        match (prev_in, inside) {
            (false, true) => {
                low = Some((polish(prev_e, e, prev_re)?, false));
            }
            (true, false) => {
                seen += 1;
                if seen == band_index {
                    let (e_low, cut) = low.expect("band start recorded");
                    if cut {
                        return Err(truncated());
                    }
                    let e_high = polish(e, prev_e, re)?;
                    return Ok(BandWindow {
                        band_index,
                        e_low,
                        e_high,
                        period,
                        kind: BandKind::Gapped,
                    });
                }
            }
            _ => {}
        }
        prev_e = e;
        prev_re = re;
        prev_in = inside;
    }
    if prev_in && seen + 1 == band_index {
        return Err(truncated());
    }
    Err(not_found())
}

/// All quantities of the unit cell needed at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellResponse<T> {
    pub energy: T,
    pub matrix: TransferMatrix<T>,
    pub da_de: Cplx<T>,
}

impl<T: Real> CellResponse<T> {
    pub fn at(energy: T, cell: &UnitCell<T>) -> Result<Self> {
        Ok(Self {
            energy,
            matrix: unit_cell_matrix(energy, cell)?,
            da_de: unit_cell_derivative(energy, cell)?,
        })
    }

    pub fn re_a(&self) -> T {
        self.matrix.a.re
    }

    pub fn im_a(&self) -> T {
        self.matrix.a.im
    }

    /// `1 - Re^2 a`, clamped at zero.
    pub fn sin_sq_qd(&self) -> T {
        (T::one() - self.re_a() * self.re_a()).max(T::zero())
    }
}

/// Bloch wavenumber `q = arccos(Re a) / d` on the principal branch `[0, pi/d]`.
pub fn bloch_q<T: Real>(energy: T, window: &BandWindow<T>, cell: &UnitCell<T>) -> Result<T> {
    window.check(energy)?;
    let re = unit_cell_matrix(energy, cell)?.a.re;
    Ok(re.max(-T::one()).min(T::one()).acos() / window.period)
}

pub fn dispersion_point<T: Real>(
    energy: T,
    window: &BandWindow<T>,
    cell: &UnitCell<T>,
) -> Result<DispersionPoint<T>> {
    Ok(DispersionPoint {
        energy,
        q: bloch_q(energy, window, cell)?,
        band_index: window.band_index,
    })
}

/// Inverse dispersion: the energy in `window` with Bloch wavenumber `q`.
pub fn energy_at_q<T: Real>(q: T, window: &BandWindow<T>, cell: &UnitCell<T>) -> Result<T> {
    let target = (q * window.period).cos();
    let f = |e: T| {
        unit_cell_matrix(e, cell)
            .map(|m| m.a.re - target)
            .unwrap_or_else(|_| T::nan())
    };
    let lo = if window.e_low > T::zero() {
        window.e_low
    } else {
        T::epsilon()
    };
    let (f_lo, f_hi) = (f(lo), f(window.e_high));
    if f_lo.signum() == f_hi.signum() {
        // q at a zone boundary: the polished edge satisfies |Re a| = 1 only to 1e-9
        let (e, fe) = if f_lo.abs() < f_hi.abs() {
            (lo, f_lo)
        } else {
            (window.e_high, f_hi)
        };
        if fe.abs() <= T::lit(1e-9) {
            return Ok(e);
        }
    }
    brent(f, lo, window.e_high, T::lit(ENERGY_TOL), MAX_ITER)
}

/// Group velocity `v_g = d sqrt(1 - Re^2 a) / (hbar (-dRe a/dE))` in nm/fs.
///
/// Negative for bands whose energy decreases with q. Reported as zero with
/// `at_edge` set where `1 - Re^2 a` vanishes.
pub fn group_velocity<T: Real>(
    energy: T,
    window: &BandWindow<T>,
    cell: &UnitCell<T>,
) -> Result<EdgeValue<T>> {
    window.check(energy)?;
    let resp = CellResponse::at(energy, cell)?;
    Ok(group_velocity_from(&resp, cell))
}

pub(crate) fn group_velocity_from<T: Real>(
    resp: &CellResponse<T>,
    cell: &UnitCell<T>,
) -> EdgeValue<T> {
    let sin_qd = resp.sin_sq_qd().sqrt();
    if sin_qd <= T::epsilon().sqrt() * T::lit(1e-3) || resp.da_de.re == T::zero() {
        return EdgeValue {
            value: T::zero(),
            at_edge: true,
        };
    }
    EdgeValue {
        value: cell.period() * sin_qd / (cell.constants().hbar * -resp.da_de.re),
        at_edge: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_cell() -> UnitCell<f64> {
        UnitCell::gaas_superlattice()
    }

    fn band1() -> BandWindow<f64> {
        find_band(&reference_cell(), 1, EnergyScan::up_to(0.288)).unwrap()
    }

    #[test]
    fn band_one_edges_match_dense_scan_reference() {
        let w = band1();
        // 1 ueV scan + bisection in 50-digit arithmetic
        assert!((w.e_low - 0.048_896_757_913_084_22).abs() < 1e-11);
        assert!((w.e_high - 0.072_576_061_000_212_19).abs() < 1e-11);
        let cell = reference_cell();
        let lo = unit_cell_matrix(w.e_low, &cell).unwrap().a.re;
        let hi = unit_cell_matrix(w.e_high, &cell).unwrap().a.re;
        assert!((lo - 1.0).abs() < 1e-9);
        assert!((hi + 1.0).abs() < 1e-9);
        assert_eq!(w.kind, BandKind::Gapped);
    }

    #[test]
    fn band_two_lies_above_band_one() {
        let cell = reference_cell();
        let w2 = find_band(&cell, 2, EnergyScan::up_to(0.6)).unwrap();
        assert!(w2.e_low > band1().e_high);
        assert!(matches!(
            find_band(&cell, 9, EnergyScan::up_to(0.288)),
            Err(Error::BandNotFound { .. })
        ));
        assert!(matches!(
            find_band(&cell, 1, EnergyScan::new(0.05, 0.288, 1e-4)),
            Err(Error::BandTruncated { .. })
        ));
    }

    #[test]
    fn free_medium_bands_touch() {
        let cell = UnitCell::free(9.0, 0.072).unwrap();
        let w1 = find_band(&cell, 1, EnergyScan::up_to(1.0)).unwrap();
        let w2 = find_band(&cell, 2, EnergyScan::up_to(1.0)).unwrap();
        assert_eq!(w1.kind, BandKind::FreeMedium);
        assert_eq!(w1.e_low, 0.0);
        assert_eq!(w1.e_high, w2.e_low);
    }

    #[test]
    fn q_at_edges_and_midband() {
        let cell = reference_cell();
        let w = band1();
        let d = cell.period();
        assert!(bloch_q(w.e_low, &w, &cell).unwrap() * d < 1e-5);
        assert!((bloch_q(w.e_high, &w, &cell).unwrap() * d - std::f64::consts::PI).abs() < 1e-5);
        let e_mid = energy_at_q(std::f64::consts::PI / (2.0 * d), &w, &cell).unwrap();
        let re = unit_cell_matrix(e_mid, &cell).unwrap().a.re;
        assert!(re.abs() < 1e-10);
        let q = bloch_q(e_mid, &w, &cell).unwrap();
        assert!((q - std::f64::consts::PI / (2.0 * d)).abs() < 1e-10);
        assert!(matches!(
            bloch_q(0.03, &w, &cell),
            Err(Error::OutOfBand { .. })
        ));
    }

    #[test]
    fn dispersion_is_consistent_and_monotone() {
        let cell = reference_cell();
        let w = band1();
        let d = cell.period();
        let mut last = -1.0;
        for i in 0..=2000 {
            let e = w.e_low + w.width() * i as f64 / 2000.0;
            let q = bloch_q(e, &w, &cell).unwrap();
            let re = unit_cell_matrix(e, &cell).unwrap().a.re;
            assert!(((q * d).cos() - re).abs() < 1e-10);
            assert!(q >= last);
            last = q;
        }
    }

    #[test]
    fn group_velocity_equals_inverse_dq_de() {
        let cell = reference_cell();
        let w = band1();
        let hbar = cell.constants().hbar;
        for i in 1..20 {
            let e = w.e_low + w.width() * i as f64 / 20.0;
            let v = group_velocity(e, &w, &cell).unwrap();
            let h = 1e-7;
            let dq = (bloch_q(e + h, &w, &cell).unwrap() - bloch_q(e - h, &w, &cell).unwrap())
                / (2.0 * h);
            let fd = 1.0 / (hbar * dq);
            assert!(!v.at_edge);
            assert!(
                (v.value / fd - 1.0).abs() < 1e-6,
                "E={e}: {} vs {fd}",
                v.value
            );
        }
    }

    #[test]
    fn free_cell_group_velocity_is_free_velocity() {
        let cell = UnitCell::free(9.0, 0.072).unwrap();
        let w = find_band(&cell, 1, EnergyScan::up_to(1.0)).unwrap();
        for &e in &[0.005f64, 0.02, 0.05] {
            let k = crate::potential::wavevector_well(e, &cell).unwrap();
            let v = group_velocity(e, &w, &cell).unwrap().value;
            assert!((v / cell.velocity_of_wavenumber(k) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn group_velocity_vanishes_towards_edges() {
        let cell = reference_cell();
        let w = band1();
        let edge = group_velocity(w.e_low, &w, &cell).unwrap();
        assert!(edge.at_edge || edge.value.abs() < 1e-4);
        // monotone decay inside the last 1% of the band
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let e = w.e_high - w.width() * 0.01 * (1.0 - i as f64 / 20.0) - 1e-13;
            let v = group_velocity(e, &w, &cell).unwrap().value;
            assert!(v <= prev);
            prev = v;
        }
        assert!(prev < 1e-3);
    }
}
