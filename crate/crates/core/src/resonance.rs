//! Transmission resonances of the n-period structure and the tunneling times
//! and velocities evaluated there.

use rayon::prelude::*;

use crate::band::{
    find_band, group_velocity_from, BandWindow, CellResponse, EdgeValue, EnergyScan,
};
use crate::chebyshev::chebyshev_u;
use crate::error::{Error, Result};
use crate::potential::{PotentialShift, UnitCell};
use crate::roots::{brent, sign_changes, ENERGY_TOL, MAX_ITER};
use crate::scalar::{cplx, real, Cplx, Real};
use crate::transfer::{unit_cell_matrix, NPeriodMatrix};

/// One transmission-unity state of the n-period structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceLevel<T> {
    pub n: usize,
    pub j: usize,
    pub band_index: usize,
    pub energy: T,
    /// `j pi / (n d)`.
    pub q: T,
}

impl<T: Real> ResonanceLevel<T> {
    /// `cos(j pi / n)`, the value of `Re a` at the level.
    pub fn target_re_a(&self) -> T {
        resonance_cosine(self.j, self.n)
    }

    /// Structure length `n d`.
    pub fn length(&self, cell: &UnitCell<T>) -> T {
        cell.period() * T::from_usize(self.n).expect("period count fits")
    }
}

fn resonance_cosine<T: Real>(j: usize, n: usize) -> T {
    let j = T::from_usize(j).expect("level index fits");
    let n = T::from_usize(n).expect("period count fits");
    (T::PI() * j / n).cos()
}

fn periods<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("period count fits")
}

/// Matrix of the n-period structure at `energy`.
pub fn structure_matrix<T: Real>(
    energy: T,
    cell: &UnitCell<T>,
    n: usize,
) -> Result<NPeriodMatrix<T>> {
    Ok(unit_cell_matrix(energy, cell)?.nth_power(n))
}

/// The `n - 1` resonances of band `band_index`, located inside `scan`.
pub fn find_resonances<T: Real>(
    cell: &UnitCell<T>,
    n: usize,
    band_index: usize,
    scan: EnergyScan<T>,
) -> Result<Vec<ResonanceLevel<T>>> {
    let window = find_band(cell, band_index, scan)?;
    resonances_in_band(cell, n, &window, scan.step)
}

/// Resonances inside a located band: every `j` in `1..n` is bracketed by a
/// uniform scan of step `step` and polished with Brent's method.
pub fn resonances_in_band<T: Real>(
    cell: &UnitCell<T>,
    n: usize,
    window: &BandWindow<T>,
    step: T,
) -> Result<Vec<ResonanceLevel<T>>> {
    if n < 2 {
        return Err(Error::Domain {
            quantity: "period count for resonances",
            value: n as f64,
        });
    }
    let period = cell.period();
    let found: Vec<(usize, Option<T>)> = (1..n)
        .into_par_iter()
        .map(|j| {
            let target = resonance_cosine::<T>(j, n);
            let f = |e: T| {
                unit_cell_matrix(e, cell)
                    .map(|m| m.a.re - target)
                    .unwrap_or_else(|_| T::nan())
            };
            let lo = window.e_low.max(T::epsilon());
            let root = sign_changes(f, lo, window.e_high, step)
                .first()
                .and_then(|&(a, b)| brent(f, a, b, T::lit(ENERGY_TOL), MAX_ITER).ok());
            (j, root)
        })
        .collect();

    let missing: Vec<usize> = found
        .iter()
        .filter(|(_, e)| e.is_none())
        .map(|(j, _)| *j)
        .collect();
    if !missing.is_empty() {
        return Err(Error::PartialResonances {
            band: window.band_index,
            periods: n,
            missing,
        });
    }
    let mut levels: Vec<ResonanceLevel<T>> = found
        .into_iter()
        .map(|(j, e)| ResonanceLevel {
            n,
            j,
            band_index: window.band_index,
            energy: e.expect("missing levels rejected above"),
            q: T::PI() * T::from_usize(j).expect("level index fits") / (periods::<T>(n) * period),
        })
        .collect();
    levels.sort_by(|x, y| x.energy.partial_cmp(&y.energy).expect("finite energies"));
    Ok(levels)
}

/// Phase time `hbar d arg t^(n) / dE` from the closed form in terms of the
/// unit-cell matrix, in fs.
pub fn phase_time<T: Real>(energy: T, cell: &UnitCell<T>, n: usize) -> Result<T> {
    let resp = CellResponse::at(energy, cell)?;
    phase_time_from(&resp, cell, n)
}

pub(crate) fn phase_time_from<T: Real>(
    resp: &CellResponse<T>,
    cell: &UnitCell<T>,
    n: usize,
) -> Result<T> {
    let (re, im) = (resp.re_a(), resp.im_a());
    let sin_sq = T::one() - re * re;
    if sin_sq.abs() <= T::epsilon() {
        return Err(Error::Singular {
            energy: resp.energy.to_f64_lossy(),
            reason: "|Re a| = 1 in the phase-time formula",
        });
    }
    let half = T::lit(0.5);
    let nn = periods::<T>(n);
    let u = chebyshev_u(2 * n as i64 - 1, re);
    let transmission = resp.matrix.nth_power(n).transmission();
    let bracket = (nn - half * re * u) * im / sin_sq * resp.da_de.re - half * u * resp.da_de.im;
    Ok(cell.constants().hbar * transmission * bracket)
}

/// Phase time at a resonance, `hbar n Im a dRe a/dE / (1 - Re^2 a)`, in fs.
pub fn resonant_time<T: Real>(level: &ResonanceLevel<T>, cell: &UnitCell<T>) -> Result<T> {
    let resp = CellResponse::at(level.energy, cell)?;
    resonant_time_from(&resp, cell, level.n)
}

fn resonant_time_from<T: Real>(resp: &CellResponse<T>, cell: &UnitCell<T>, n: usize) -> Result<T> {
    let sin_sq = resp.sin_sq_qd();
    if sin_sq <= T::epsilon().sqrt() {
        return Err(Error::Singular {
            energy: resp.energy.to_f64_lossy(),
            reason: "resonance at a band edge",
        });
    }
    Ok(cell.constants().hbar * periods::<T>(n) * resp.im_a() * resp.da_de.re / sin_sq)
}

/// Resonant tunneling velocity, evaluated three ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantVelocity<T> {
    /// `L / tau_res`.
    pub from_time: T,
    /// `hbar^-1 d (1 - Re^2 a) / (-Im a) (-dRe a/dE)^-1`.
    pub a_form: T,
    /// The same expression through the unit-cell transmission amplitude `t = 1/a`:
    /// `hbar^-1 d (|t|^4 - Re^2 t) / (|t|^2 Im t) (-d(Re t/|t|^2)/dE)^-1`.
    pub t_form: T,
}

pub fn resonant_velocity<T: Real>(
    level: &ResonanceLevel<T>,
    cell: &UnitCell<T>,
) -> Result<ResonantVelocity<T>> {
    let resp = CellResponse::at(level.energy, cell)?;
    let tau = resonant_time_from(&resp, cell, level.n)?;
    let hbar = cell.constants().hbar;
    let d = cell.period();
    let (re, im) = (resp.re_a(), resp.im_a());
    let a_form = d * (T::one() - re * re) / (hbar * -im * -resp.da_de.re);

    let t = unit_t(&resp);
    let t2 = t.norm_sqr();
    let ratio_num = t2 * t2 - t.re * t.re;
    let d_re_t_over_t2 = unit_t_derivative_of_re_ratio(&resp);
    let t_form = d * ratio_num / (t2 * t.im) / (hbar * -d_re_t_over_t2);

    Ok(ResonantVelocity {
        from_time: level.length(cell) / tau,
        a_form,
        t_form,
    })
}

/// The t-form with `-dRe t/dE` in place of `-d(Re t/|t|^2)/dE`.
///
/// Differs from the other forms wherever the unit cell is not transparent.
pub fn resonant_velocity_t_form_literal<T: Real>(
    level: &ResonanceLevel<T>,
    cell: &UnitCell<T>,
) -> Result<T> {
    let resp = CellResponse::at(level.energy, cell)?;
    let t = unit_t(&resp);
    let dt = unit_t_derivative(&resp);
    let t2 = t.norm_sqr();
    Ok(cell.period() * (t2 * t2 - t.re * t.re) / (t2 * t.im) / (cell.constants().hbar * -dt.re))
}

fn unit_t<T: Real>(resp: &CellResponse<T>) -> Cplx<T> {
    resp.matrix.transmission_amplitude()
}

/// `dt/dE = -(da/dE) / a^2`.
fn unit_t_derivative<T: Real>(resp: &CellResponse<T>) -> Cplx<T> {
    -resp.da_de / (resp.matrix.a * resp.matrix.a)
}

/// `d(Re t / |t|^2)/dE` from `t` and `dt/dE`.
fn unit_t_derivative_of_re_ratio<T: Real>(resp: &CellResponse<T>) -> T {
    let t = unit_t(resp);
    let dt = unit_t_derivative(resp);
    let t2 = t.norm_sqr();
    let two = T::lit(2.0);
    (dt.re * t2 - t.re * two * (t.conj() * dt).re) / (t2 * t2)
}

/// `v_res / |v_g| = sqrt(1 - Re^2 a) / |Im a|`.
///
/// The sign of `Im a` follows the sign of `dRe a/dE` within a band, so the
/// resonant velocity is positive on every band. Zero with `at_edge` set at
/// band edges.
pub fn velocity_ratio<T: Real>(
    energy: T,
    window: &BandWindow<T>,
    cell: &UnitCell<T>,
) -> Result<EdgeValue<T>> {
    if !window.contains(energy) {
        return Err(Error::OutOfBand {
            energy: energy.to_f64_lossy(),
            band: window.band_index,
            e_low: window.e_low.to_f64_lossy(),
            e_high: window.e_high.to_f64_lossy(),
        });
    }
    let resp = CellResponse::at(energy, cell)?;
    Ok(velocity_ratio_from(&resp))
}

pub(crate) fn velocity_ratio_from<T: Real>(resp: &CellResponse<T>) -> EdgeValue<T> {
    let s = resp.sin_sq_qd().sqrt();
    if s == T::zero() {
        return EdgeValue {
            value: T::zero(),
            at_edge: true,
        };
    }
    EdgeValue {
        value: s / resp.im_a().abs(),
        at_edge: false,
    }
}

/// Finite-difference step for derivatives in energy or potential.
fn difference_step<T: Real>(scale: T) -> T {
    T::lit(1e-5) * scale * (T::epsilon() / T::lit(f64::EPSILON)).powf(T::lit(0.25))
}

/// `-i hbar d ln t^(n) / dE`, in fs.
///
/// The logarithm is taken of `t(E + h) / t(E - h)`, which stays near one and
/// never crosses the branch cut.
pub fn tunneling_time_te<T: Real>(energy: T, cell: &UnitCell<T>, n: usize) -> Result<Cplx<T>> {
    let h = difference_step(energy);
    if !(h > T::zero()) || !(energy - h > T::zero()) {
        return Err(Error::StepUnderflow {
            energy: energy.to_f64_lossy(),
            step: h.to_f64_lossy(),
        });
    }
    let t = |e: T| structure_matrix(e, cell, n).map(|m| m.transmission_amplitude());
    let dlog = richardson_log_derivative(h, |x| t(energy + x), |x| t(energy - x))?;
    Ok(cplx(T::zero(), -cell.constants().hbar) * dlog)
}

/// `i hbar d ln t^(n) / dV` for a uniform potential shift `V`, in fs.
///
/// `shift` selects which layers move; the half-spaces are held fixed.
pub fn tunneling_time_tv<T: Real>(
    energy: T,
    cell: &UnitCell<T>,
    n: usize,
    delta_v: T,
    shift: PotentialShift,
) -> Result<Cplx<T>> {
    if !(delta_v > T::zero()) {
        return Err(Error::StepUnderflow {
            energy: energy.to_f64_lossy(),
            step: delta_v.to_f64_lossy(),
        });
    }
    let t = |dv: T| {
        structure_matrix(energy, &cell.shifted(dv, shift), n).map(|m| m.transmission_amplitude())
    };
    let dlog = richardson_log_derivative(delta_v, t, |x| t(-x))?;
    Ok(cplx(T::zero(), cell.constants().hbar) * dlog)
}

/// Default potential step for [`tunneling_time_tv`]: the energy step scaled to `energy`.
pub fn default_potential_step<T: Real>(energy: T) -> T {
    difference_step(energy)
}

fn richardson_log_derivative<T, P, M>(h: T, plus: P, minus: M) -> Result<Cplx<T>>
where
    T: Real,
    P: Fn(T) -> Result<Cplx<T>>,
    M: Fn(T) -> Result<Cplx<T>>,
{
    let central =
        |step: T| -> Result<Cplx<T>> { Ok((plus(step)? / minus(step)?).ln() / real(step + step)) };
    let coarse = central(h)?;
    let fine = central(h * T::lit(0.5))?;
    Ok((fine * real(T::lit(4.0)) - coarse) / real(T::lit(3.0)))
}

/// Times at one energy of the n-period structure, in fs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeReport<T> {
    pub tau_phase: T,
    pub tau_res: Option<T>,
    pub tau_dwell: T,
    pub tau_te: Cplx<T>,
    pub tau_tv: Cplx<T>,
}

/// All time definitions at a resonance level.
pub fn time_report<T: Real>(
    level: &ResonanceLevel<T>,
    cell: &UnitCell<T>,
) -> Result<TimeReport<T>> {
    let e = level.energy;
    let state =
        crate::bloch::scattering_state(e, cell, level.n, crate::bloch::DEFAULT_SAMPLES_PER_LAYER)?;
    Ok(TimeReport {
        tau_phase: phase_time(e, cell, level.n)?,
        tau_res: Some(resonant_time(level, cell)?),
        tau_dwell: crate::bloch::dwell_time(&state),
        tau_te: tunneling_time_te(e, cell, level.n)?,
        tau_tv: tunneling_time_tv(
            e,
            cell,
            level.n,
            default_potential_step(e),
            PotentialShift::AllLayers,
        )?,
    })
}

/// Comparable velocities and times at a resonance level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityReport<T> {
    pub energy: T,
    pub v_g: T,
    pub v_res: T,
    pub v_expect: T,
    pub tau_phase: T,
    pub tau_res: T,
    pub tau_dwell: T,
    pub abs_t_unit: T,
}

pub fn velocity_report<T: Real>(
    level: &ResonanceLevel<T>,
    cell: &UnitCell<T>,
) -> Result<VelocityReport<T>> {
    let resp = CellResponse::at(level.energy, cell)?;
    let times = time_report(level, cell)?;
    let state = crate::bloch::scattering_state(
        level.energy,
        cell,
        level.n,
        crate::bloch::DEFAULT_SAMPLES_PER_LAYER,
    )?;
    Ok(VelocityReport {
        energy: level.energy,
        v_g: group_velocity_from(&resp, cell).value,
        v_res: resonant_velocity(level, cell)?.a_form,
        v_expect: crate::bloch::velocity_expectation(&state, cell)?.quadrature,
        tau_phase: times.tau_phase,
        tau_res: times.tau_res.expect("level time"),
        tau_dwell: times.tau_dwell,
        abs_t_unit: resp.matrix.transmission_amplitude().norm(),
    })
}
