//! In-structure wave function of the n-period structure and its split into
//! the two Bloch waves of the infinite medium.

use crate::band::{group_velocity_from, BandWindow, CellResponse};
use crate::error::{Error, Result};
use crate::potential::{wavevector_well, Kernels, UnitCell};
use crate::quadrature::GaussLegendre;
use crate::scalar::{cplx, real, Cplx, Real};
use crate::transfer::{unit_cell_matrix, TransferMatrix};

/// Samples per layer for reported wave functions.
pub const DEFAULT_SAMPLES_PER_LAYER: usize = 64;
/// Gauss-Legendre nodes per layer.
pub const QUADRATURE_ORDER: usize = 32;
/// Smallest admissible `1 - |alpha~|^2`.
pub const DEGENERACY_EPS: f64 = 1e-10;
/// Largest `|1 - T^(n)|` accepted as a resonance.
pub const RESONANCE_TOL: f64 = 1e-8;

/// Wave function inside one layer, `psi(x0 + s) = psi0 c(s) + dpsi0 s0(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment<T> {
    x0: T,
    width: T,
    lambda: T,
    psi0: Cplx<T>,
    dpsi0: Cplx<T>,
}

impl<T: Real> Segment<T> {
    fn eval(&self, s: T) -> (Cplx<T>, Cplx<T>) {
        let k = Kernels::new(self.lambda, s);
        (
            self.psi0 * real(k.c) + self.dpsi0 * real(k.s0),
            self.psi0 * real(-self.lambda * k.s0) + self.dpsi0 * real(k.c),
        )
    }

    /// Closed form of `int |psi|^2` over the layer.
    fn norm_integral(&self) -> T {
        let (w, lam) = (self.width, self.lambda);
        let (two, four) = (T::lit(2.0), T::lit(4.0));
        let s0_2w = Kernels::new(lam, two * w).s0;
        let s0_w = Kernels::new(lam, w).s0;
        let int_cc = w / two + s0_2w / four;
        let int_cs = s0_w * s0_w / two;
        let int_ss = sine_square_integral(lam, w);
        self.psi0.norm_sqr() * int_cc
            + self.dpsi0.norm_sqr() * int_ss
            + two * (self.psi0 * self.dpsi0.conj()).re * int_cs
    }
}

/// `int_0^w s0(s)^2 ds = (w/2 - s0(2w)/4) / lambda`.
fn sine_square_integral<T: Real>(lambda: T, w: T) -> T {
    let x2 = lambda * w * w;
    if x2.abs() < T::lit(1e-2) {
        // sum_{m>=1} (-1)^{m+1} 2^{2m-1} lambda^{m-1} w^{2m+1} / (2m+1)!
        let mut sum = T::zero();
        let mut term = T::lit(2.0) * w * w * w / T::lit(6.0);
        for m in 1..=12u32 {
            sum = sum + term;
            let next = T::lit(((2 * m + 2) * (2 * m + 3)) as f64);
            term = -term * T::lit(4.0) * lambda * w * w / next;
        }
        sum
    } else {
        let two = T::lit(2.0);
        (w / two - Kernels::new(lambda, two * w).s0 / T::lit(4.0)) / lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    /// Position in nm, measured from the left end of the structure.
    pub x: T,
    pub psi: Cplx<T>,
    /// `d psi/dx` in 1/nm.
    pub dpsi: Cplx<T>,
}

/// Stationary scattering state for a unit-amplitude wave incident from the left.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringState<T> {
    pub energy: T,
    pub n: usize,
    /// Wavenumber in the half-spaces.
    pub k: T,
    pub r_n: Cplx<T>,
    pub t_n: Cplx<T>,
    pub samples: Vec<Sample<T>>,
    pub samples_per_period: usize,
    period: T,
    hbar_over_mass: T,
    segments: Vec<Segment<T>>,
}

/// Wave function of the n-period structure, propagated layer by layer in
/// closed form from `psi(0) = 1 + r`, `psi'(0) = ik(1 - r)`.
pub fn scattering_state<T: Real>(
    energy: T,
    cell: &UnitCell<T>,
    n: usize,
    samples_per_layer: usize,
) -> Result<ScatteringState<T>> {
    if n == 0 {
        return Err(Error::Domain {
            quantity: "period count",
            value: 0.0,
        });
    }
    let k = wavevector_well(energy, cell)?;
    let m = unit_cell_matrix(energy, cell)?.nth_power(n);
    let (r_n, t_n) = (m.reflection_amplitude(), m.transmission_amplitude());
    let one = real(T::one());
    let mut psi = one + r_n;
    let mut dpsi = cplx(T::zero(), k) * (one - r_n);

    let period = cell.period();
    let per_layer = samples_per_layer.max(1);
    let mut segments = Vec::with_capacity(n * cell.layers().len());
    let mut samples = Vec::with_capacity(n * cell.layers().len() * per_layer + 1);
    for p in 0..n {
        let mut x0 = period * T::from_usize(p).expect("period index fits");
        for layer in cell.layers() {
            let seg = Segment {
                x0,
                width: layer.width,
                lambda: cell.wavenumber_squared(energy, layer.potential),
                psi0: psi,
                dpsi0: dpsi,
            };
            for i in 0..per_layer {
                let s = layer.width * T::from_usize(i).expect("sample index fits")
                    / T::from_usize(per_layer).expect("sample count fits");
                let (v, dv) = seg.eval(s);
                samples.push(Sample {
                    x: x0 + s,
                    psi: v,
                    dpsi: dv,
                });
            }
            let (v, dv) = seg.eval(layer.width);
            psi = v;
            dpsi = dv;
            x0 = x0 + layer.width;
            segments.push(seg);
        }
    }
    samples.push(Sample {
        x: period * T::from_usize(n).expect("period count fits"),
        psi,
        dpsi,
    });
    Ok(ScatteringState {
        energy,
        n,
        k,
        r_n,
        t_n,
        samples,
        samples_per_period: cell.layers().len() * per_layer,
        period,
        hbar_over_mass: cell.hbar_over_mass(),
        segments,
    })
}

impl<T: Real> ScatteringState<T> {
    /// Structure length `L = n d`.
    pub fn length(&self) -> T {
        self.period * T::from_usize(self.n).expect("period count fits")
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn transmission(&self) -> T {
        self.t_n.norm_sqr()
    }

    /// `hbar k / m*`, the incident current and velocity, in nm/fs.
    pub fn incident_current(&self) -> T {
        self.hbar_over_mass * self.k
    }

    /// `(psi, psi')` at `x` in `[0, L]`.
    pub fn psi_at(&self, x: T) -> (Cplx<T>, Cplx<T>) {
        let i = self.segments.partition_point(|s| s.x0 <= x).max(1) - 1;
        let seg = &self.segments[i];
        seg.eval(x - seg.x0)
    }

    /// `(hbar/m*) Im(psi* psi')`.
    pub fn current(&self, psi: Cplx<T>, dpsi: Cplx<T>) -> T {
        self.hbar_over_mass * (psi.conj() * dpsi).im
    }

    pub fn current_at(&self, x: T) -> T {
        let (p, dp) = self.psi_at(x);
        self.current(p, dp)
    }

    /// `int_0^L |psi|^2 dx` from the per-layer closed forms.
    pub fn norm_integral(&self) -> T {
        self.segments.iter().map(Segment::norm_integral).sum()
    }

    /// `int_0^L |psi|^2 dx` by Gauss-Legendre quadrature of order `order` per layer.
    pub fn norm_integral_quadrature(&self, order: usize) -> T {
        let g = GaussLegendre::new(order);
        self.segments
            .iter()
            .map(|seg| g.integrate(T::zero(), seg.width, |s| seg.eval(s).0.norm_sqr()))
            .sum()
    }

    /// `<psi| v P |psi> = int_0^L psi* (-i hbar/m*) psi' dx` by quadrature, in nm^2/fs.
    ///
    /// Usable at any energy; its imaginary part vanishes only at resonance.
    pub fn velocity_numerator(&self) -> Cplx<T> {
        let minus_i = cplx(T::zero(), -self.hbar_over_mass);
        self.integrate(|psi, dpsi| psi.conj() * dpsi) * minus_i
    }

    fn integrate<F: Fn(Cplx<T>, Cplx<T>) -> Cplx<T>>(&self, f: F) -> Cplx<T> {
        let g = GaussLegendre::new(QUADRATURE_ORDER);
        self.segments
            .iter()
            .fold(cplx(T::zero(), T::zero()), |acc, seg| {
                acc + g.integrate_complex(T::zero(), seg.width, |s| {
                    let (p, dp) = seg.eval(s);
                    f(p, dp)
                })
            })
    }

    /// `|1 - T^(n)|`.
    pub fn resonance_deviation(&self) -> T {
        (T::one() - self.transmission()).abs()
    }

    fn require_resonance(&self) -> Result<()> {
        let dev = self.resonance_deviation();
        if dev > T::lit(RESONANCE_TOL) {
            return Err(Error::OffResonance {
                energy: self.energy.to_f64_lossy(),
                deviation: dev.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Rows for the wave-function dump.
    pub fn wavefunction_rows(&self) -> Vec<WaveRow<T>> {
        self.samples
            .iter()
            .map(|s| WaveRow {
                x: s.x,
                psi: s.psi,
                abs2: s.psi.norm_sqr(),
                current: self.current(s.psi, s.dpsi),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveRow<T> {
    pub x: T,
    pub psi: Cplx<T>,
    pub abs2: T,
    pub current: T,
}

/// Dwell time `int_0^L |psi|^2 dx / v_in`, in fs.
pub fn dwell_time<T: Real>(state: &ScatteringState<T>) -> T {
    state.norm_integral() / state.incident_current()
}

/// Right-moving Bloch factor of the band at the unit-cell matrix `m`.
///
/// `xi = exp(i s q d)` with `s = -sign(Im a)`, the sign of the group velocity.
pub fn bloch_factor<T: Real>(m: &TransferMatrix<T>, period: T) -> (Cplx<T>, T) {
    let q = m.a.re.max(-T::one()).min(T::one()).acos() / period;
    let s = if m.a.im > T::zero() {
        -T::one()
    } else {
        T::one()
    };
    (Cplx::from_polar(T::one(), s * q * period), s * q)
}

fn check_band<T: Real>(energy: T, m: &TransferMatrix<T>, window: &BandWindow<T>) -> Result<()> {
    window.check(energy)?;
    if m.a.re.abs() > T::one() + T::lit(1e-9) {
        return Err(Error::OutOfBand {
            energy: energy.to_f64_lossy(),
            band: window.band_index,
            e_low: window.e_low.to_f64_lossy(),
            e_high: window.e_high.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `(a* - b* - xi, a - b - xi)`.
fn alpha_parts<T: Real>(
    energy: T,
    m: &TransferMatrix<T>,
    xi: Cplx<T>,
) -> Result<(Cplx<T>, Cplx<T>)> {
    let num = m.a.conj() - m.b.conj() - xi;
    let den = m.a - m.b - xi;
    if den.norm() <= T::epsilon() * T::lit(16.0) * (T::one() + m.a.norm()) {
        return Err(Error::DegenerateDecomposition {
            energy: energy.to_f64_lossy(),
            gap: den.norm().to_f64_lossy(),
        });
    }
    Ok((num, den))
}

/// Ratio `alpha~ = alpha_{-q} / alpha_q*` of the left- and right-moving Bloch
/// amplitudes: `(a* - b* - xi) / (a - b - xi) t^(n) / t^(n)*`.
pub fn tilde_alpha<T: Real>(
    energy: T,
    cell: &UnitCell<T>,
    n: usize,
    window: &BandWindow<T>,
) -> Result<Cplx<T>> {
    let m = unit_cell_matrix(energy, cell)?;
    check_band(energy, &m, window)?;
    let (xi, _) = bloch_factor(&m, cell.period());
    let (num, den) = alpha_parts(energy, &m, xi)?;
    let t_n = m.nth_power(n).transmission_amplitude();
    Ok(num / den * t_n / t_n.conj())
}

/// The same ratio before eliminating `r^(n)`:
/// `(A + r B) / (B + r* A)` with `A = a* - b* - xi`, `B = a - b - xi`.
pub fn tilde_alpha_from_reflection<T: Real>(
    energy: T,
    cell: &UnitCell<T>,
    n: usize,
    window: &BandWindow<T>,
) -> Result<Cplx<T>> {
    let m = unit_cell_matrix(energy, cell)?;
    check_band(energy, &m, window)?;
    let (xi, _) = bloch_factor(&m, cell.period());
    let (num, den) = alpha_parts(energy, &m, xi)?;
    let r = m.nth_power(n).reflection_amplitude();
    Ok((num + r * den) / (den + r.conj() * num))
}

/// `|alpha~|^2 = (|Im a| - sqrt(1 - Re^2 a)) / (|Im a| + sqrt(1 - Re^2 a))`.
pub fn abs_tilde_alpha_sq<T: Real>(m: &TransferMatrix<T>) -> T {
    let s = (T::one() - m.a.re * m.a.re).max(T::zero()).sqrt();
    let im = m.a.im.abs();
    (im - s) / (im + s)
}

/// The two-Bloch-wave form `psi = alpha_q phi_q + alpha_{-q} phi_q*` with
/// `phi_q = u_q exp(iqx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochDecomposition<T> {
    pub energy: T,
    /// Bloch wavenumber of the right-moving wave (signed as the group velocity).
    pub q: T,
    pub xi: Cplx<T>,
    pub tilde_alpha: Cplx<T>,
    /// Real and positive.
    pub alpha_q: Cplx<T>,
    pub alpha_minus_q: Cplx<T>,
    /// `|v_g|` in nm/fs.
    pub group_speed: T,
    /// `u_q` on the first period.
    pub u_q_samples: Vec<(T, Cplx<T>)>,
}

impl<T: Real> BlochDecomposition<T> {
    fn gap(&self) -> T {
        T::one() - self.tilde_alpha.norm_sqr()
    }

    /// `alpha_q phi_q = (psi - alpha~ psi*) / (1 - |alpha~|^2)` and its derivative.
    fn right_wave(&self, psi: Cplx<T>, dpsi: Cplx<T>) -> (Cplx<T>, Cplx<T>) {
        let g = real(self.gap());
        (
            (psi - self.tilde_alpha * psi.conj()) / g,
            (dpsi - self.tilde_alpha * dpsi.conj()) / g,
        )
    }

    /// `int_0^d |u_q|^2 dx` by quadrature.
    pub fn uq_norm(&self, state: &ScatteringState<T>) -> T {
        let g = GaussLegendre::new(QUADRATURE_ORDER);
        let per_cell = state.segments.len() / state.n;
        let scale = self.alpha_q.norm_sqr();
        state.segments[..per_cell]
            .iter()
            .map(|seg| {
                g.integrate(T::zero(), seg.width, |s| {
                    let (p, dp) = seg.eval(s);
                    self.right_wave(p, dp).0.norm_sqr() / scale
                })
            })
            .sum()
    }
}

/// Bloch amplitudes of a scattering state.
///
/// `alpha_q = [2 pi j / ((1 - |alpha~|^2) |v_g|)]^{1/2}` with `j` the current
/// of the state, which is `j_in` at resonance.
pub fn bloch_coefficients<T: Real>(
    state: &ScatteringState<T>,
    cell: &UnitCell<T>,
    window: &BandWindow<T>,
) -> Result<BlochDecomposition<T>> {
    let resp = CellResponse::at(state.energy, cell)?;
    check_band(state.energy, &resp.matrix, window)?;
    let tilde = tilde_alpha(state.energy, cell, state.n, window)?;
    let gap = T::one() - tilde.norm_sqr();
    let vg = group_velocity_from(&resp, cell);
    if gap < T::lit(DEGENERACY_EPS) || vg.at_edge {
        return Err(Error::DegenerateDecomposition {
            energy: state.energy.to_f64_lossy(),
            gap: gap.to_f64_lossy(),
        });
    }
    let (xi, q) = bloch_factor(&resp.matrix, cell.period());
    let speed = vg.value.abs();
    let j = state.incident_current() * state.transmission();
    let alpha_q = real((T::lit(2.0) * T::PI() * j / (gap * speed)).sqrt());
    let mut dec = BlochDecomposition {
        energy: state.energy,
        q,
        xi,
        tilde_alpha: tilde,
        alpha_q,
        alpha_minus_q: tilde * alpha_q.conj(),
        group_speed: speed,
        u_q_samples: Vec::new(),
    };
    dec.u_q_samples = state.samples[..state.samples_per_period]
        .iter()
        .map(|s| {
            let phi = dec.right_wave(s.psi, s.dpsi).0;
            (s.x, phi * Cplx::from_polar(T::one(), -q * s.x) / alpha_q)
        })
        .collect();
    Ok(dec)
}

/// `u~_q(x) = (psi - alpha~ psi*) / (1 - |alpha~|^2) exp(-iqx)` on the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPart<T> {
    pub samples: Vec<(T, Cplx<T>)>,
    /// `max |u~(x + p d) - u~(x)| / max |u~|` over the grid.
    pub periodicity_residual: T,
    /// `max |psi - psi_rebuilt|` with `psi` rebuilt from `u~` on the first period.
    pub reconstruction_residual: T,
}

pub fn extract_uq<T: Real>(
    state: &ScatteringState<T>,
    dec: &BlochDecomposition<T>,
) -> Result<PeriodicPart<T>> {
    if dec.gap() < T::lit(DEGENERACY_EPS) {
        return Err(Error::DegenerateDecomposition {
            energy: state.energy.to_f64_lossy(),
            gap: dec.gap().to_f64_lossy(),
        });
    }
    let samples: Vec<(T, Cplx<T>)> = state
        .samples
        .iter()
        .map(|s| {
            let phi = dec.right_wave(s.psi, s.dpsi).0;
            (s.x, phi * Cplx::from_polar(T::one(), -dec.q * s.x))
        })
        .collect();
    let p = state.samples_per_period;
    let scale = samples.iter().map(|s| s.1.norm()).fold(T::zero(), T::max);
    let mut periodicity = T::zero();
    let mut rebuild = T::zero();
    for (i, (x, u)) in samples.iter().enumerate() {
        let u0 = samples[i % p].1;
        periodicity = periodicity.max((*u - u0).norm());
        let phi = u0 * Cplx::from_polar(T::one(), dec.q * *x);
        let psi = phi + dec.tilde_alpha * phi.conj();
        rebuild = rebuild.max((psi - state.samples[i].psi).norm());
    }
    Ok(PeriodicPart {
        samples,
        periodicity_residual: periodicity / scale,
        reconstruction_residual: rebuild,
    })
}

/// Velocity expectation value in the structure at a resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityExpectation<T> {
    /// `<psi| v P |psi>` by quadrature.
    pub numerator: Cplx<T>,
    /// `<psi| P |psi>` in closed form.
    pub norm: T,
    /// `Re(numerator) / norm`.
    pub quadrature: T,
    /// `(1 - |alpha~|^2) / (1 + |alpha~|^2) |v_g|`.
    pub closed_form: T,
    /// `sqrt(1 - Re^2 a) / |Im a| |v_g|`.
    pub ratio_form: T,
}

/// Refuses states off resonance, where the closed forms do not hold.
pub fn velocity_expectation<T: Real>(
    state: &ScatteringState<T>,
    cell: &UnitCell<T>,
) -> Result<VelocityExpectation<T>> {
    state.require_resonance()?;
    let resp = CellResponse::at(state.energy, cell)?;
    let speed = group_velocity_from(&resp, cell).value.abs();
    let numerator = state.velocity_numerator();
    let norm = state.norm_integral();
    let a2 = abs_tilde_alpha_sq(&resp.matrix);
    Ok(VelocityExpectation {
        numerator,
        norm,
        quadrature: numerator.re / norm,
        closed_form: (T::one() - a2) / (T::one() + a2) * speed,
        ratio_form: resp.sin_sq_qd().sqrt() / resp.im_a().abs() * speed,
    })
}

/// Cross integrals of the right-moving Bloch wave over `[0, L]`, each relative
/// to its diagonal counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixChecks<T> {
    /// `|int phi phi'| / |int phi* phi'|`.
    pub derivative_cross: T,
    /// `|int phi^2| / int |phi|^2`.
    pub square_cross: T,
}

pub fn appendix_integral_checks<T: Real>(
    state: &ScatteringState<T>,
    dec: &BlochDecomposition<T>,
) -> AppendixChecks<T> {
    let cross_d = state.integrate(|p, dp| {
        let (phi, dphi) = dec.right_wave(p, dp);
        phi * dphi
    });
    let diag_d = state.integrate(|p, dp| {
        let (phi, dphi) = dec.right_wave(p, dp);
        phi.conj() * dphi
    });
    let cross_s = state.integrate(|p, dp| {
        let phi = dec.right_wave(p, dp).0;
        phi * phi
    });
    let diag_s = state.integrate(|p, dp| real(dec.right_wave(p, dp).0.norm_sqr()));
    AppendixChecks {
        derivative_cross: cross_d.norm() / diag_d.norm(),
        square_cross: cross_s.norm() / diag_s.re,
    }
}
