//! Numerical battery over every identity of the model, each reported as a
//! measured residual against a tolerance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::band::{group_velocity_from, BandKind, BandWindow, CellResponse};
use crate::bloch::{
    abs_tilde_alpha_sq, appendix_integral_checks, bloch_coefficients, dwell_time, extract_uq,
    scattering_state, tilde_alpha, tilde_alpha_from_reflection, velocity_expectation,
};
use crate::chebyshev::chebyshev_u;
use crate::error::Result;
use crate::potential::{PotentialShift, UnitCell};
use crate::resonance::{
    default_potential_step, phase_time, resonances_in_band, resonant_time, resonant_velocity,
    structure_matrix, tunneling_time_te, tunneling_time_tv, velocity_ratio_from, ResonanceLevel,
};
use crate::transfer::{nth_power_with, unit_cell_matrix};

use super::{resonance_levels, SweepConfig};

/// Tolerances of the battery; any subset can be overridden from the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub determinant: f64,
    pub chebyshev_relative: f64,
    pub transmission: f64,
    pub t_sign: f64,
    pub dwell_vs_phase: f64,
    pub te_imaginary: f64,
    pub tv_vs_phase: f64,
    pub phase_numeric: f64,
    pub velocity_agreement: f64,
    pub bound_slack: f64,
    pub bound_equality: f64,
    pub alpha_n_independence: f64,
    pub alpha_closed_form: f64,
    pub alpha_reflection_form: f64,
    pub alpha_edge: f64,
    pub appendix_cross: f64,
    pub uq_norm: f64,
    pub periodicity: f64,
    pub reconstruction: f64,
    pub current_constancy: f64,
    pub boundary_identity: f64,
    pub hermiticity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            determinant: 1e-12,
            chebyshev_relative: 1e-9,
            transmission: 1e-10,
            t_sign: 1e-8,
            dwell_vs_phase: 1e-8,
            te_imaginary: 1e-5,
            tv_vs_phase: 1e-4,
            phase_numeric: 1e-5,
            velocity_agreement: 1e-7,
            bound_slack: 1e-12,
            bound_equality: 1e-9,
            alpha_n_independence: 1e-10,
            alpha_closed_form: 1e-10,
            alpha_reflection_form: 1e-9,
            alpha_edge: 1e-6,
            appendix_cross: 1e-8,
            uq_norm: 1e-8,
            periodicity: 1e-8,
            reconstruction: 1e-8,
            current_constancy: 1e-8,
            boundary_identity: 1e-7,
            hermiticity: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }

    fn attempt(name: &str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> Self {
        match f() {
            Ok(r) => Self::new(name, r, tolerance),
            Err(e) => Self {
                name: format!("{name} ({e})"),
                residual: f64::INFINITY,
                tolerance,
                passed: false,
            },
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<44} residual {:.3e} <= {:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.residual,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn find(&self, prefix: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name.starts_with(prefix))
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

pub fn run_verify(config: &SweepConfig) -> Result<VerifyReport> {
    run_verify_with(config, &chebyshev_u::<f64>)
}

/// Low-discrepancy points in `(0, 1)`.
fn golden_points(count: usize) -> impl Iterator<Item = f64> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    (1..=count).map(|i| (0.5 + PHI * i as f64).fract())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn max_over<T>(items: &[T], f: impl Fn(&T) -> Result<f64>) -> Result<f64> {
    items.iter().try_fold(0.0f64, |acc, x| Ok(acc.max(f(x)?)))
}

/// Runs the battery with `u` standing in for the Chebyshev polynomials in
/// every n-th power that is checked; used for fault injection.
pub fn run_verify_with(
    config: &SweepConfig,
    u: &(dyn Fn(i64, f64) -> f64 + Sync),
) -> Result<VerifyReport> {
    config.validate()?;
    let tol = &config.tolerances;
    let cell = config.cell()?;
    let n = config.periods;
    let e_top = config.scan(&cell).e_max;
    let mut checks = Vec::new();

    checks.push(Check::attempt(
        "(|a|^2-|b|^2-1)/|a|^2, unit cell",
        tol.determinant,
        || {
            let mut worst = 0.0f64;
            for i in 1..=10_000 {
                let m = unit_cell_matrix(e_top * i as f64 / 10_000.0, &cell)?;
                worst = worst.max((m.determinant() - 1.0).abs() / m.a.norm_sqr());
            }
            Ok(worst)
        },
    ));
    checks.push(Check::attempt(
        "(|a_n|^2-|b_n|^2-1)/|a_n|^2, n periods",
        tol.determinant,
        || {
            let mut worst = 0.0f64;
            for i in 1..=10_000 {
                let m = unit_cell_matrix(e_top * i as f64 / 10_000.0, &cell)?;
                let p = nth_power_with(&m, n, u);
                worst = worst.max((p.determinant() - 1.0).abs() / p.a_n.norm_sqr());
            }
            Ok(worst)
        },
    ));
    checks.push(Check::attempt(
        "Chebyshev power vs repeated product",
        tol.chebyshev_relative,
        || {
            let mut worst = 0.0f64;
            for x in golden_points(100) {
                let m = unit_cell_matrix(e_top * x, &cell)?;
                for k in 2..=n.max(50) {
                    let c = nth_power_with(&m, k, u);
                    let b = m.power_by_repeated_product(k);
                    worst = worst
                        .max((c.a_n - b.a_n).norm() / b.a_n.norm())
                        .max((c.b_n - b.b_n).norm() / b.b_n.norm());
                }
            }
            Ok(worst)
        },
    ));
    checks.push(Check::attempt(
        "T^(n) = 1/|a_n|^2 = Chebyshev form",
        tol.transmission,
        || {
            let mut worst = 0.0f64;
            for x in golden_points(1000) {
                let m = unit_cell_matrix(e_top * x, &cell)?;
                let p = nth_power_with(&m, n, u);
                worst = worst
                    .max((p.transmission() - p.transmission_chebyshev_form()).abs())
                    .max((p.transmission() + p.reflection_amplitude().norm_sqr() - 1.0).abs());
            }
            Ok(worst)
        },
    ));

    let (_, window, levels) = match resonance_levels(config) {
        Ok(found) => found,
        Err(e) => {
            checks.push(Check {
                name: format!("resonances of band {} ({e})", config.band_index),
                residual: f64::INFINITY,
                tolerance: 0.0,
                passed: false,
            });
            return Ok(VerifyReport { checks });
        }
    };
    checks.extend(resonance_checks(config, &cell, &window, &levels));
    checks.extend(bloch_checks(config, &cell, &window, &levels));
    if cell == UnitCell::gaas_superlattice() {
        checks.extend(reference_claims(&cell, &window, n, &levels));
    }
    Ok(VerifyReport { checks })
}

fn resonance_checks(
    config: &SweepConfig,
    cell: &UnitCell<f64>,
    window: &BandWindow<f64>,
    levels: &[ResonanceLevel<f64>],
) -> Vec<Check> {
    let tol = &config.tolerances;
    let n = config.periods;
    let mut out = vec![Check::new(
        format!("resonance count = n - 1 = {}", n - 1),
        (levels.len() as f64 - (n - 1) as f64).abs(),
        0.0,
    )];
    out.push(Check::attempt(
        "T^(n) = 1 at resonances",
        tol.transmission,
        || {
            max_over(levels, |l| {
                Ok((1.0 - structure_matrix(l.energy, cell, n)?.transmission()).abs())
            })
        },
    ));
    out.push(Check::attempt(
        "t^(n) = (-1)^j at resonances",
        tol.t_sign,
        || {
            max_over(levels, |l| {
                let sign = if l.j % 2 == 0 { 1.0 } else { -1.0 };
                Ok((structure_matrix(l.energy, cell, n)?.transmission_amplitude() - sign).norm())
            })
        },
    ));
    out.push(Check::attempt(
        "tau_phase = tau_res (closed forms)",
        tol.dwell_vs_phase,
        || {
            max_over(levels, |l| {
                Ok(rel(phase_time(l.energy, cell, n)?, resonant_time(l, cell)?))
            })
        },
    ));
    out.push(Check::attempt(
        "tau_D = tau_phase",
        tol.dwell_vs_phase,
        || {
            max_over(levels, |l| {
                let s = scattering_state(l.energy, cell, n, 1)?;
                Ok(rel(dwell_time(&s), phase_time(l.energy, cell, n)?))
            })
        },
    ));
    out.push(Check::attempt(
        "Im tau_T^E / Re tau_T^E at resonances",
        tol.te_imaginary,
        || {
            max_over(levels, |l| {
                let te = tunneling_time_te(l.energy, cell, n)?;
                Ok(te.im.abs() / te.re)
            })
        },
    ));
    out.push(Check::attempt(
        "tau_T^V = tau_phase",
        tol.tv_vs_phase,
        || {
            max_over(levels, |l| {
                let tau = phase_time(l.energy, cell, n)?;
                let tv = tunneling_time_tv(
                    l.energy,
                    cell,
                    n,
                    default_potential_step(l.energy),
                    PotentialShift::AllLayers,
                )?;
                Ok((tv - tau).norm() / tau)
            })
        },
    ));
    out.push(Check::attempt(
        "tau_phase = hbar d arg t / dE (numeric)",
        tol.phase_numeric,
        || {
            max_over(levels, |l| {
                Ok(rel(
                    phase_time(l.energy, cell, n)?,
                    numeric_phase_time(l.energy, cell, n)?,
                ))
            })
        },
    ));
    out.push(Check::attempt(
        "L/tau_res = v_res(a) = v_res(t) = <v>",
        tol.velocity_agreement,
        || {
            max_over(levels, |l| {
                let v = resonant_velocity(l, cell)?;
                let s = scattering_state(l.energy, cell, n, 1)?;
                let e = velocity_expectation(&s, cell)?;
                let all = [
                    v.from_time,
                    v.a_form,
                    v.t_form,
                    e.quadrature,
                    e.closed_form,
                    e.ratio_form,
                ];
                let mut worst = 0.0f64;
                for a in &all {
                    for b in &all {
                        worst = worst.max(rel(*a, *b));
                    }
                }
                Ok(worst)
            })
        },
    ));
    out.push(Check::attempt(
        "v_res > 0 and v_res <= |t| |v_g|, n = 2..12",
        tol.bound_slack,
        || {
            let mut worst = 0.0f64;
            for k in 2..=12 {
                for l in resonances_in_band(cell, k, window, config.scan_step_ev)? {
                    let resp = CellResponse::at(l.energy, cell)?;
                    let v = resonant_velocity(&l, cell)?.a_form;
                    if !(v > 0.0) {
                        return Ok(f64::INFINITY);
                    }
                    let bound = resp.matrix.transmission_amplitude().norm()
                        * group_velocity_from(&resp, cell).value.abs();
                    worst = worst.max(v / bound - 1.0);
                }
            }
            Ok(worst)
        },
    ));
    out.push(Check::attempt(
        "v_res = |t| |v_g| at q = pi/(2d)",
        tol.bound_equality,
        || {
            let l = resonances_in_band(cell, 2, window, config.scan_step_ev)?[0];
            let resp = CellResponse::at(l.energy, cell)?;
            let v = resonant_velocity(&l, cell)?.a_form;
            let bound = resp.matrix.transmission_amplitude().norm()
                * group_velocity_from(&resp, cell).value.abs();
            Ok(rel(v, bound))
        },
    ));
    out
}

/// `hbar d arg t^(n)/dE` by a Richardson central difference of the unwrapped phase.
pub fn numeric_phase_time(energy: f64, cell: &UnitCell<f64>, n: usize) -> Result<f64> {
    use std::f64::consts::PI;
    let h = 1e-6 * energy;
    let arg = |e: f64| -> Result<f64> {
        Ok(structure_matrix(e, cell, n)?.transmission_amplitude().arg())
    };
    let unwrap = |d: f64| d - 2.0 * PI * (d / (2.0 * PI)).round();
    let d1 = unwrap(arg(energy + h)? - arg(energy - h)?) / (2.0 * h);
    let d2 = unwrap(arg(energy + h / 2.0)? - arg(energy - h / 2.0)?) / h;
    Ok(cell.constants().hbar * (4.0 * d2 - d1) / 3.0)
}

fn bloch_checks(
    config: &SweepConfig,
    cell: &UnitCell<f64>,
    window: &BandWindow<f64>,
    levels: &[ResonanceLevel<f64>],
) -> Vec<Check> {
    let tol = &config.tolerances;
    let n = config.periods;
    let interior: Vec<f64> = (1..50)
        .map(|i| window.e_low + window.width() * i as f64 / 50.0)
        .collect();
    let mut out = vec![Check::attempt(
        "|alpha~| independent of n (2, 3, 6, 12)",
        tol.alpha_n_independence,
        || {
            max_over(&interior, |&e| {
                let base = tilde_alpha(e, cell, 2, window)?.norm();
                let mut worst = 0.0f64;
                for k in [3, 6, 12] {
                    worst = worst.max((tilde_alpha(e, cell, k, window)?.norm() - base).abs());
                }
                Ok(worst)
            })
        },
    )];
    out.push(Check::attempt(
        "|alpha~|^2 closed form",
        tol.alpha_closed_form,
        || {
            max_over(&interior, |&e| {
                let m = unit_cell_matrix(e, cell)?;
                Ok((abs_tilde_alpha_sq(&m) - tilde_alpha(e, cell, n, window)?.norm_sqr()).abs())
            })
        },
    ));
    out.push(Check::attempt(
        "alpha~ from r^(n) = reduced form",
        tol.alpha_reflection_form,
        || {
            max_over(&interior, |&e| {
                Ok((tilde_alpha_from_reflection(e, cell, n, window)?
                    - tilde_alpha(e, cell, n, window)?)
                .norm())
            })
        },
    ));
    if window.kind == BandKind::Gapped {
        out.push(Check::attempt(
            "|alpha~| = 1 at the band edges",
            tol.alpha_edge,
            || {
                let lo = tilde_alpha(window.e_low, cell, n, window)?.norm();
                let hi = tilde_alpha(window.e_high, cell, n, window)?.norm();
                Ok((1.0 - lo).abs().max((1.0 - hi).abs()))
            },
        ));
    }

    let per_level =
        |name: &str, tolerance: f64, f: &dyn Fn(&ResonanceLevel<f64>) -> Result<f64>| {
            Check::attempt(name, tolerance, || max_over(levels, f))
        };
    let samples = config.samples_per_layer;
    out.push(per_level(
        "appendix cross integrals at resonances",
        tol.appendix_cross,
        &|l| {
            let s = scattering_state(l.energy, cell, n, 1)?;
            let dec = bloch_coefficients(&s, cell, window)?;
            let c = appendix_integral_checks(&s, &dec);
            Ok(c.derivative_cross.max(c.square_cross))
        },
    ));
    out.push(per_level("int_0^d |u_q|^2 = d/(2 pi)", tol.uq_norm, &|l| {
        let s = scattering_state(l.energy, cell, n, 1)?;
        let dec = bloch_coefficients(&s, cell, window)?;
        let d = cell.period();
        Ok(rel(dec.uq_norm(&s), d / (2.0 * std::f64::consts::PI)))
    }));
    out.push(per_level(
        "u~_q periodic across periods",
        tol.periodicity,
        &|l| {
            let s = scattering_state(l.energy, cell, n, samples)?;
            Ok(extract_uq(&s, &bloch_coefficients(&s, cell, window)?)?.periodicity_residual)
        },
    ));
    out.push(per_level(
        "psi rebuilt from Bloch waves",
        tol.reconstruction,
        &|l| {
            let s = scattering_state(l.energy, cell, n, samples)?;
            Ok(extract_uq(&s, &bloch_coefficients(&s, cell, window)?)?.reconstruction_residual)
        },
    ));
    out.push(per_level(
        "current constancy std/mean",
        tol.current_constancy,
        &|l| {
            let s = scattering_state(l.energy, cell, n, samples)?;
            let j: Vec<f64> = s.samples.iter().map(|p| s.current(p.psi, p.dpsi)).collect();
            let mean = j.iter().sum::<f64>() / j.len() as f64;
            let var = j.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / j.len() as f64;
            Ok(var.sqrt() / mean)
        },
    ));
    out.push(per_level(
        "<psi|v P|psi> = j_in L",
        tol.boundary_identity,
        &|l| {
            let s = scattering_state(l.energy, cell, n, 1)?;
            Ok(rel(
                s.velocity_numerator().re,
                s.incident_current() * s.length(),
            ))
        },
    ));
    out.push(per_level(
        "Im <psi|v P|psi> / Re at resonances",
        tol.hermiticity,
        &|l| {
            let s = scattering_state(l.energy, cell, n, 1)?;
            let v = s.velocity_numerator();
            Ok(v.im.abs() / v.re)
        },
    ));
    out
}

/// Statements specific to the reference superlattice.
fn reference_claims(
    cell: &UnitCell<f64>,
    window: &BandWindow<f64>,
    n: usize,
    levels: &[ResonanceLevel<f64>],
) -> Vec<Check> {
    let mut out = Vec::new();
    if n == 6 && levels.len() == 5 {
        let argmax = |f: &dyn Fn(&ResonanceLevel<f64>) -> Result<f64>| -> Result<usize> {
            let mut best = (0usize, f64::NEG_INFINITY);
            for l in levels {
                let v = f(l)?;
                if v > best.1 {
                    best = (l.j, v);
                }
            }
            Ok(best.0)
        };
        out.push(Check::attempt(
            "argmax_j v_g = 4 (reference cell, n = 6)",
            0.0,
            || {
                let j = argmax(&|l| {
                    Ok(group_velocity_from(&CellResponse::at(l.energy, cell)?, cell).value)
                })?;
                Ok((j as f64 - 4.0).abs())
            },
        ));
        out.push(Check::attempt(
            "argmax_j v_res = 3 (reference cell, n = 6)",
            0.0,
            || {
                let j = argmax(&|l| Ok(resonant_velocity(l, cell)?.a_form))?;
                Ok((j as f64 - 3.0).abs())
            },
        ));
    }
    out.push(Check::attempt(
        "max v_res/v_g over band 1 below 1/3",
        1.0 / 3.0,
        || max_ratio(cell, window),
    ));
    out
}

/// Largest `v_res / |v_g|` over the band: dense grid plus golden-section polish.
pub fn max_ratio(cell: &UnitCell<f64>, window: &BandWindow<f64>) -> Result<f64> {
    let ratio =
        |e: f64| -> Result<f64> { Ok(velocity_ratio_from(&CellResponse::at(e, cell)?).value) };
    let count = 4000;
    let grid: Vec<f64> = (0..=count)
        .map(|i| window.e_low + window.width() * i as f64 / count as f64)
        .collect();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &e) in grid.iter().enumerate() {
        let r = ratio(e)?;
        if r > best.1 {
            best = (i, r);
        }
    }
    let (mut a, mut b) = (
        grid[best.0.saturating_sub(1)],
        grid[(best.0 + 1).min(count)],
    );
    let g = 0.618_033_988_749_894_9;
    for _ in 0..80 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if ratio(c)? > ratio(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(best.1.max(ratio(0.5 * (a + b))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_passes() {
        let report = run_verify(&SweepConfig::default()).unwrap();
        assert!(report.passed(), "{report}");
        assert!(report.find("argmax_j v_res").is_some());
    }

    #[test]
    fn minimal_two_period_config_passes() {
        let config = SweepConfig {
            periods: 2,
            ..SweepConfig::default()
        };
        let report = run_verify(&config).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn broken_chebyshev_branch_fails_determinant() {
        let broken = |m: i64, x: f64| {
            let u = chebyshev_u(m, x);
            if x.abs() > 1.0 {
                u * 1.001
            } else {
                u
            }
        };
        let report = run_verify_with(&SweepConfig::default(), &broken).unwrap();
        assert!(!report.passed());
        assert!(!report.find("(|a_n|^2").unwrap().passed);
        assert!(report.find("(|a|^2").unwrap().passed);
    }

    #[test]
    fn report_lines_show_residual_and_tolerance() {
        let line = Check::new("x", 2e-13, 1e-12).to_string();
        assert!(line.starts_with("PASS") && line.contains("2.000e-13") && line.contains("1.0e-12"));
        assert!(Check::new("y", 1.0, 0.5).to_string().starts_with("FAIL"));
    }
}
