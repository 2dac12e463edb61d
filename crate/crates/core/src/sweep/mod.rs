//! JSON configuration, energy and Bloch-wavenumber sweeps, resonance tables,
//! wave-function dumps and the verification battery. Fixed to `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band::{
    energy_at_q, find_band, group_velocity_from, BandWindow, CellResponse, EnergyScan,
};
use crate::bloch::{abs_tilde_alpha_sq, scattering_state, velocity_expectation};
use crate::error::{Error, Result};
use crate::potential::{Layer, UnitCell};
use crate::resonance::{
    phase_time_from, resonances_in_band, time_report, velocity_ratio_from, ResonanceLevel,
};

pub mod verify;

pub use verify::{run_verify, run_verify_with, Check, Tolerances, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Parameterization {
    #[default]
    Energy,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyRange {
    pub min_ev: f64,
    pub max_ev: f64,
    pub step_ev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QRange {
    pub min_per_nm: f64,
    pub max_per_nm: f64,
    pub step_per_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub sweep_csv: Option<PathBuf>,
    pub resonances_csv: Option<PathBuf>,
    pub wavefunction_csv: Option<PathBuf>,
}

/// Sweep configuration. Every field has a default; the defaults describe the
/// GaAs/AlGaAs superlattice with six periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub layers: Vec<Layer<f64>>,
    pub effective_mass_ratio: f64,
    pub periods: usize,
    pub band_index: usize,
    pub parameterize: Parameterization,
    /// Number of sweep points when no explicit range is given.
    pub points: usize,
    pub energy_range: Option<EnergyRange>,
    pub q_range: Option<QRange>,
    /// Band-search scan step.
    pub scan_step_ev: f64,
    /// Upper end of the band search; defaults to 1.2 times the largest layer potential.
    pub scan_max_ev: Option<f64>,
    pub samples_per_layer: usize,
    /// Recorded with the run, not used by any formula.
    pub temperature_k: f64,
    pub output: OutputPaths,
    pub tolerances: Tolerances,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            layers: vec![
                Layer {
                    width: 2.5,
                    potential: 0.288,
                },
                Layer {
                    width: 6.5,
                    potential: 0.0,
                },
            ],
            effective_mass_ratio: 0.072,
            periods: 6,
            band_index: 1,
            parameterize: Parameterization::Energy,
            points: 401,
            energy_range: None,
            q_range: None,
            scan_step_ev: crate::band::DEFAULT_SCAN_STEP,
            scan_max_ev: None,
            samples_per_layer: crate::bloch::DEFAULT_SAMPLES_PER_LAYER,
            temperature_k: 4.0,
            output: OutputPaths::default(),
            tolerances: Tolerances::default(),
        }
    }
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::ConfigInvalid {
        field: field.into(),
        reason: reason.into(),
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(invalid("layers", "at least one layer is required"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.width > 0.0) || !l.width.is_finite() {
                return Err(invalid(
                    format!("layers[{i}].width_nm"),
                    format!("must be positive, got {}", l.width),
                ));
            }
            if !l.potential.is_finite() {
                return Err(invalid(
                    format!("layers[{i}].potential_ev"),
                    "must be finite",
                ));
            }
        }
        if !(self.effective_mass_ratio > 0.0) || !self.effective_mass_ratio.is_finite() {
            return Err(invalid("effective_mass_ratio", "must be positive"));
        }
        if self.periods < 2 {
            return Err(invalid(
                "periods",
                format!("must be at least 2, got {}", self.periods),
            ));
        }
        if self.band_index == 0 {
            return Err(invalid("band_index", "bands are counted from 1"));
        }
        if self.points < 2 {
            return Err(invalid("points", "must be at least 2"));
        }
        if !(self.scan_step_ev > 0.0) {
            return Err(invalid("scan_step_ev", "must be positive"));
        }
        if let Some(m) = self.scan_max_ev {
            if !(m > 0.0) {
                return Err(invalid("scan_max_ev", "must be positive"));
            }
        }
        if self.samples_per_layer == 0 {
            return Err(invalid("samples_per_layer", "must be positive"));
        }
        if let Some(r) = self.energy_range {
            if !(r.step_ev > 0.0) {
                return Err(invalid("energy_range.step_ev", "must be positive"));
            }
            if !(r.min_ev > 0.0) || !(r.max_ev > r.min_ev) {
                return Err(invalid("energy_range", "needs 0 < min_ev < max_ev"));
            }
        }
        if let Some(r) = self.q_range {
            if !(r.step_per_nm > 0.0) {
                return Err(invalid("q_range.step_per_nm", "must be positive"));
            }
            if !(r.min_per_nm >= 0.0) || !(r.max_per_nm > r.min_per_nm) {
                return Err(invalid("q_range", "needs 0 <= min_per_nm < max_per_nm"));
            }
        }
        Ok(())
    }

    pub fn cell(&self) -> Result<UnitCell<f64>> {
        UnitCell::new(self.layers.clone(), self.effective_mass_ratio)
    }

    pub fn scan(&self, cell: &UnitCell<f64>) -> EnergyScan<f64> {
        let top = self
            .scan_max_ev
            .unwrap_or_else(|| EnergyScan::for_cell(cell).e_max);
        EnergyScan::new(0.0, top, self.scan_step_ev)
    }

    pub fn band(&self, cell: &UnitCell<f64>) -> Result<BandWindow<f64>> {
        find_band(cell, self.band_index, self.scan(cell))
    }
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::ConfigNotFound(path.to_path_buf()))
        }
        Err(e) => return Err(e.into()),
    };
    let config: SweepConfig = serde_json::from_str(&text).map_err(|source| Error::ConfigParse {
        path: path.to_path_buf(),
        source,
    })?;
    config.validate()?;
    Ok(config)
}

/// One sweep row. `None` marks a value that is singular or undefined there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub energy: f64,
    pub q: Option<f64>,
    pub re_a: f64,
    pub im_a: f64,
    pub t_n: f64,
    pub abs_t_unit: f64,
    pub tilde_alpha_abs: Option<f64>,
    pub v_g: Option<f64>,
    pub v_res: Option<f64>,
    pub ratio: Option<f64>,
    pub tau_phase: Option<f64>,
    pub resonance_j: Option<usize>,
    pub v_expect: Option<f64>,
}

pub const SWEEP_HEADER: [&str; 13] = [
    "energy_ev",
    "q_per_nm",
    "re_a",
    "im_a",
    "t_n",
    "abs_t_unit",
    "tilde_alpha_abs",
    "v_g_nm_per_fs",
    "v_res_nm_per_fs",
    "ratio",
    "tau_phase_fs",
    "resonance_j",
    "v_expect_nm_per_fs",
];

/// Twelve significant digits, `.` as decimal separator.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map(fmt12).unwrap_or_default()
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        vec![
            fmt12(self.energy),
            opt(self.q),
            fmt12(self.re_a),
            fmt12(self.im_a),
            fmt12(self.t_n),
            fmt12(self.abs_t_unit),
            opt(self.tilde_alpha_abs),
            opt(self.v_g),
            opt(self.v_res),
            opt(self.ratio),
            opt(self.tau_phase),
            self.resonance_j.map(|j| j.to_string()).unwrap_or_default(),
            opt(self.v_expect),
        ]
    }
}

pub fn sweep_row(
    energy: f64,
    cell: &UnitCell<f64>,
    n: usize,
    window: &BandWindow<f64>,
) -> Result<SweepRow> {
    let resp = CellResponse::at(energy, cell)?;
    let (re, im) = (resp.re_a(), resp.im_a());
    let in_band = window.contains(energy) && re.abs() <= 1.0 + 1e-9;
    let at_edge = energy <= window.e_low || energy >= window.e_high;
    let vg = group_velocity_from(&resp, cell);
    let interior = in_band && !at_edge && !vg.at_edge;
    let v_res = interior
        .then(|| cell.period() * resp.sin_sq_qd() / (cell.constants().hbar * -im * -resp.da_de.re));
    Ok(SweepRow {
        energy,
        q: in_band.then(|| re.clamp(-1.0, 1.0).acos() / cell.period()),
        re_a: re,
        im_a: im,
        t_n: resp.matrix.nth_power(n).transmission(),
        abs_t_unit: resp.matrix.transmission_amplitude().norm(),
        tilde_alpha_abs: in_band.then(|| abs_tilde_alpha_sq(&resp.matrix).max(0.0).sqrt()),
        v_g: interior.then_some(vg.value),
        v_res,
        ratio: interior.then(|| velocity_ratio_from(&resp).value),
        tau_phase: phase_time_from(&resp, cell, n).ok(),
        resonance_j: None,
        v_expect: None,
    })
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect()
}

fn stepped(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize;
    (0..=count).map(|i| lo + step * i as f64).collect()
}

/// Energies of the sweep grid.
pub fn sweep_energies(
    config: &SweepConfig,
    cell: &UnitCell<f64>,
    window: &BandWindow<f64>,
) -> Result<Vec<f64>> {
    match config.parameterize {
        Parameterization::Energy => Ok(match config.energy_range {
            Some(r) => stepped(r.min_ev, r.max_ev, r.step_ev),
            None => linspace(window.e_low, window.e_high, config.points),
        }),
        Parameterization::Q => {
            let zone = std::f64::consts::PI / cell.period();
            let qs = match config.q_range {
                Some(r) => stepped(r.min_per_nm, r.max_per_nm.min(zone), r.step_per_nm),
                None => linspace(0.0, zone, config.points),
            };
            let mut es = qs
                .par_iter()
                .map(|&q| energy_at_q(q, window, cell))
                .collect::<Result<Vec<f64>>>()?;
            es.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
            Ok(es)
        }
    }
}

/// Cell, band window and resonance levels of a configuration.
pub type LevelSet = (UnitCell<f64>, BandWindow<f64>, Vec<ResonanceLevel<f64>>);

/// Resonance levels of the configured structure.
pub fn resonance_levels(config: &SweepConfig) -> Result<LevelSet> {
    let cell = config.cell()?;
    let window = config.band(&cell)?;
    let levels = resonances_in_band(&cell, config.periods, &window, config.scan_step_ev)?;
    Ok((cell, window, levels))
}

/// Sweep rows in ascending energy, with one extra row at every resonance.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let (cell, window, levels) = resonance_levels(config)?;
    let n = config.periods;
    let energies = sweep_energies(config, &cell, &window)?;
    let mut rows = energies
        .par_iter()
        .map(|&e| sweep_row(e, &cell, n, &window))
        .collect::<Result<Vec<_>>>()?;
    let resonant = levels
        .par_iter()
        .map(|l| {
            let mut row = sweep_row(l.energy, &cell, n, &window)?;
            let state = scattering_state(l.energy, &cell, n, 1)?;
            row.resonance_j = Some(l.j);
            row.q = Some(l.q);
            row.v_expect = Some(velocity_expectation(&state, &cell)?.quadrature);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.extend(resonant);
    rows.sort_by(|a, b| {
        a.energy
            .partial_cmp(&b.energy)
            .expect("finite energies")
            .then(a.resonance_j.cmp(&b.resonance_j))
    });
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub const RESONANCE_HEADER: [&str; 20] = [
    "n",
    "j",
    "band",
    "energy_ev",
    "q_per_nm",
    "t_n",
    "re_t_n",
    "im_t_n",
    "abs_t_unit",
    "tilde_alpha_abs",
    "v_g_nm_per_fs",
    "v_res_nm_per_fs",
    "v_expect_nm_per_fs",
    "tau_phase_fs",
    "tau_res_fs",
    "tau_dwell_fs",
    "re_tau_te_fs",
    "im_tau_te_fs",
    "re_tau_tv_fs",
    "im_tau_tv_fs",
];

/// Table of the resonances with every time and velocity definition.
pub fn resonance_table(config: &SweepConfig) -> Result<Vec<Vec<String>>> {
    config.validate()?;
    let (cell, _window, levels) = resonance_levels(config)?;
    levels
        .par_iter()
        .map(|l| {
            let resp = CellResponse::at(l.energy, &cell)?;
            let m = resp.matrix.nth_power(l.n);
            let times = time_report(l, &cell)?;
            let state = scattering_state(l.energy, &cell, l.n, 1)?;
            let t = m.transmission_amplitude();
            Ok(vec![
                l.n.to_string(),
                l.j.to_string(),
                l.band_index.to_string(),
                fmt12(l.energy),
                fmt12(l.q),
                fmt12(m.transmission()),
                fmt12(t.re),
                fmt12(t.im),
                fmt12(resp.matrix.transmission_amplitude().norm()),
                fmt12(abs_tilde_alpha_sq(&resp.matrix).max(0.0).sqrt()),
                fmt12(group_velocity_from(&resp, &cell).value),
                fmt12(crate::resonance::resonant_velocity(l, &cell)?.a_form),
                fmt12(velocity_expectation(&state, &cell)?.quadrature),
                fmt12(times.tau_phase),
                opt(times.tau_res),
                fmt12(times.tau_dwell),
                fmt12(times.tau_te.re),
                fmt12(times.tau_te.im),
                fmt12(times.tau_tv.re),
                fmt12(times.tau_tv.im),
            ])
        })
        .collect()
}

pub fn write_records<W: Write>(header: &[&str], records: &[Vec<String>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in records {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const WAVEFUNCTION_HEADER: [&str; 5] = ["x_nm", "re_psi", "im_psi", "abs2_psi", "current"];

/// Wave function of resonance `j` sampled on the configured grid.
pub fn emit_wavefunction(config: &SweepConfig, j: usize) -> Result<Vec<Vec<String>>> {
    config.validate()?;
    let (cell, _window, levels) = resonance_levels(config)?;
    let level = levels
        .iter()
        .find(|l| l.j == j)
        .ok_or(Error::UnknownLevel {
            requested: j,
            available: config.periods - 1,
        })?;
    let state = scattering_state(
        level.energy,
        &cell,
        config.periods,
        config.samples_per_layer,
    )?;
    Ok(state
        .wavefunction_rows()
        .iter()
        .map(|r| {
            vec![
                fmt12(r.x),
                fmt12(r.psi.re),
                fmt12(r.psi.im),
                fmt12(r.abs2),
                fmt12(r.current),
            ]
        })
        .collect())
}
