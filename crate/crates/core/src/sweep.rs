//! Zone-annotated sweeps over `n²` at fixed `v` and `wL`.
//!
//! Points are evaluated independently (in parallel when requested), merged
//! in grid order, and then the phase column is unwrapped in a single ordered
//! pass. `v = 0` selects the non-relativistic pipeline.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{classify_mode, edge_mode, mode_from_n2, BarrierSetup, Edge, Zone};
use crate::numeric::{richardson_central, unwrap_in_place};
use crate::phasetime::{
    edge_limit_magnitude_paper, nr_point, phase_ratio, phase_time_numeric, RICHARDSON_TOLERANCE,
};
use crate::scattering::{match_boundaries, paper_eq4_magnitude};

/// Grid points closer than this (relative) to a zone edge are evaluated on it.
pub const EDGE_SNAP: f64 = 1e-9;

pub const CSV_HEADER: [&str; 8] = [
    "n2",
    "E_over_m",
    "zone",
    "T2_exact",
    "T2_eq4",
    "phase_rad",
    "ratio_eq7",
    "ratio_numeric",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outputs {
    pub t2_exact: bool,
    pub t2_eq4: bool,
    pub phase: bool,
    pub ratio_eq7: bool,
    pub ratio_numeric: bool,
}

impl Outputs {
    pub const ALL: Outputs = Outputs {
        t2_exact: true,
        t2_eq4: true,
        phase: true,
        ratio_eq7: true,
        ratio_numeric: true,
    };
    pub const NONE: Outputs = Outputs {
        t2_exact: false,
        t2_eq4: false,
        phase: false,
        ratio_eq7: false,
        ratio_numeric: false,
    };

    /// Parses a comma-separated list of column names (`zone` is always emitted).
    pub fn parse_list(list: &str) -> Result<Self> {
        let mut out = Outputs::NONE;
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "T2_exact" => out.t2_exact = true,
                "T2_eq4" => out.t2_eq4 = true,
                "phase" | "phase_rad" => out.phase = true,
                "ratio_eq7" => out.ratio_eq7 = true,
                "ratio_numeric" => out.ratio_numeric = true,
                "zone" => {}
                other => return Err(Error::domain(format!("unknown output column {other:?}"))),
            }
        }
        Ok(out)
    }
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs::ALL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRequest {
    pub v: f64,
    #[serde(rename = "wL")]
    pub wl: f64,
    pub m: f64,
    pub n2_min: f64,
    pub n2_max: f64,
    pub count: usize,
    pub outputs: Outputs,
}

impl SweepRequest {
    pub fn validate(&self) -> Result<()> {
        if !(self.n2_min > 0.0) || !(self.n2_max > self.n2_min) || !self.n2_max.is_finite() {
            return Err(Error::domain(format!(
                "n² grid needs 0 < min < max, got [{}, {}]",
                self.n2_min, self.n2_max
            )));
        }
        if self.count < 2 {
            return Err(Error::domain(format!(
                "n² grid needs count ≥ 2, got {}",
                self.count
            )));
        }
        if !(self.v >= 0.0) || !self.v.is_finite() {
            return Err(Error::domain(format!("v must be ≥ 0, got {}", self.v)));
        }
        if !(self.wl >= 0.0) || !self.wl.is_finite() {
            return Err(Error::domain(format!("wL must be ≥ 0, got {}", self.wl)));
        }
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(Error::domain(format!("m must be positive, got {}", self.m)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.n2_max
                } else {
                    self.n2_min + (self.n2_max - self.n2_min) * (i as f64 / last)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n2: f64,
    #[serde(rename = "E_over_m")]
    pub e_over_m: f64,
    pub zone: Zone,
    #[serde(rename = "T2_exact")]
    pub t2_exact: Option<f64>,
    #[serde(rename = "T2_eq4")]
    pub t2_eq4: Option<f64>,
    pub phase_rad: Option<f64>,
    pub ratio_eq7: Option<f64>,
    pub ratio_numeric: Option<f64>,
}

/// A per-point condition that left a column empty or changed how the point
/// was evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointNote {
    pub index: usize,
    pub n2: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub request: SweepRequest,
    pub records: Vec<SweepRecord>,
    pub notes: Vec<PointNote>,
}

struct PointResult {
    record: SweepRecord,
    notes: Vec<String>,
}

/// Edge hit by `n2` within [`EDGE_SNAP`], if any.
fn snapped_edge(n2: f64, v: f64) -> Option<Edge> {
    [Edge::Lower, Edge::Upper].into_iter().find(|e| {
        let target = e.n2(v);
        target > 0.0 && (n2 - target).abs() <= EDGE_SNAP * target
    })
}

fn relativistic_point(req: &SweepRequest, setup: &BarrierSetup, n2: f64) -> Result<PointResult> {
    let out = req.outputs;
    let mut notes = Vec::new();
    let v = req.v;
    let wl = req.wl;

    if let Some(edge) = snapped_edge(n2, v) {
        let mode = edge_mode(setup, edge)?;
        let sol = match_boundaries(setup, &mode)?;
        notes.push(format!(
            "evaluated on the {edge:?} zone edge (linear channel)"
        ));
        if out.ratio_numeric {
            notes.push("ratio_numeric: finite-difference stencil straddles the edge".into());
        }
        return Ok(PointResult {
            record: SweepRecord {
                n2,
                e_over_m: mode.energy() / setup.m(),
                zone: edge.zone(),
                t2_exact: out.t2_exact.then(|| sol.t.norm_sqr()),
                t2_eq4: if out.t2_eq4 {
                    edge_limit_magnitude_paper(v, wl, edge).ok().map(|t| t * t)
                } else {
                    None
                },
                phase_rad: out.phase.then(|| sol.transmission().phase),
                ratio_eq7: (out.ratio_eq7 && setup.l() > 0.0)
                    .then(|| phase_ratio(edge.n2(v), 0.0, v, wl)),
                ratio_numeric: None,
            },
            notes,
        });
    }

    let mode = mode_from_n2(setup, n2)?;
    let zone = classify_mode(setup, &mode);
    let sol = match_boundaries(setup, &mode)?;
    let tunneling = zone == Zone::Tunneling;
    let t2_eq4 = if out.t2_eq4 && tunneling {
        Some(paper_eq4_magnitude(setup, &mode)?.powi(2))
    } else {
        None
    };
    let ratio_eq7 = if out.ratio_eq7 && tunneling && setup.l() > 0.0 {
        let rho_n = crate::kinematics::barrier_channel(setup, &mode)
            .rho_n
            .unwrap_or(0.0);
        Some(phase_ratio(n2, rho_n * rho_n, v, wl))
    } else {
        None
    };
    let ratio_numeric = if out.ratio_numeric {
        match phase_time_numeric(setup, &mode, None) {
            Ok(r) => {
                if r.ratio.is_none() {
                    notes.push("ratio_numeric: undefined (0/0) at L = 0".into());
                }
                r.ratio
            }
            Err(e) => {
                notes.push(format!("ratio_numeric: {e}"));
                None
            }
        }
    } else {
        None
    };
    Ok(PointResult {
        record: SweepRecord {
            n2,
            e_over_m: mode.energy() / setup.m(),
            zone,
            t2_exact: out.t2_exact.then(|| sol.t.norm_sqr()),
            t2_eq4,
            phase_rad: out.phase.then(|| sol.transmission().phase),
            ratio_eq7,
            ratio_numeric,
        },
        notes,
    })
}

/// Non-relativistic reference at `v = 0`: only `n²` and `wL` matter, so a
/// nominal `V0 = m` fixes the scale. `E/m` is reported as its `v → 0` value 1.
fn nr_sweep_point(req: &SweepRequest, setup: &BarrierSetup, n2: f64) -> Result<PointResult> {
    let out = req.outputs;
    let mut notes = Vec::new();
    let on_edge = (n2 - 1.0).abs() <= EDGE_SNAP;
    let e_nr = if on_edge { setup.v0() } else { n2 * setup.v0() };
    let p = nr_point(setup, e_nr)?;
    if on_edge {
        notes.push("evaluated on the zone edge E_NR = V0 (linear channel)".into());
    }
    let tunneling = p.zone == Zone::Tunneling;
    let ratio_eq7 = if out.ratio_eq7 && (tunneling || on_edge) && setup.l() > 0.0 {
        Some(phase_ratio(
            n2,
            if on_edge { 0.0 } else { 1.0 - n2 },
            0.0,
            req.wl,
        ))
    } else {
        None
    };
    let ratio_numeric = if !out.ratio_numeric {
        None
    } else if on_edge {
        notes.push("ratio_numeric: finite-difference stencil straddles the edge".into());
        None
    } else if p.tau == 0.0 {
        notes.push("ratio_numeric: undefined (0/0) at L = 0".into());
        None
    } else {
        let distance = (setup.v0() - e_nr).abs().min(e_nr);
        let h0 = (1e-3 * setup.v0()).min(distance / 10.0);
        let zone = p.zone;
        let phase_at = |e: f64| -> Result<f64> {
            let q = nr_point(setup, e)?;
            if q.zone != zone {
                return Err(Error::ZoneCrossing { energy: e_nr });
            }
            Ok(q.phase)
        };
        match richardson_central(phase_at, e_nr, h0, RICHARDSON_TOLERANCE, p.tau, 12) {
            Ok(d) => Some(d.value / p.tau),
            Err(e) => {
                notes.push(format!("ratio_numeric: {e}"));
                None
            }
        }
    };
    Ok(PointResult {
        record: SweepRecord {
            n2,
            e_over_m: 1.0,
            zone: p.zone,
            t2_exact: out.t2_exact.then_some(p.magnitude * p.magnitude),
            t2_eq4: (out.t2_eq4 && tunneling).then_some(p.magnitude * p.magnitude),
            phase_rad: out.phase.then_some(p.phase),
            ratio_eq7,
            ratio_numeric,
        },
        notes,
    })
}

fn sweep_setup(req: &SweepRequest) -> Result<BarrierSetup> {
    if req.v == 0.0 {
        BarrierSetup::from_dimensionless(req.m, 1.0, req.wl)
    } else {
        BarrierSetup::from_dimensionless(req.m, req.v, req.wl)
    }
}

/// Re-derives the zone tag from `(E/m, v)` alone, or from `n²` when `v = 0`.
pub fn reclassify(record: &SweepRecord, v: f64) -> Zone {
    if v == 0.0 {
        let d = record.n2 - 1.0;
        return if d.abs() <= EDGE_SNAP {
            Zone::EdgeUpper
        } else if d < 0.0 {
            Zone::Tunneling
        } else {
            Zone::AboveBarrier
        };
    }
    let e = record.e_over_m;
    let tol = 1e-9 * e.max(1.0);
    if e <= 1.0 {
        Zone::NonPropagating
    } else if (e - (v + 1.0)).abs() <= tol {
        Zone::EdgeUpper
    } else if (e - (v - 1.0)).abs() <= tol {
        Zone::EdgeLower
    } else if e > v + 1.0 {
        Zone::AboveBarrier
    } else if e < v - 1.0 {
        Zone::Klein
    } else {
        Zone::Tunneling
    }
}

/// Evaluates every grid point; `workers = None` uses the global thread pool.
///
/// Per-point failures leave empty columns and a [`PointNote`]; they never
/// abort the sweep. The output does not depend on the worker count.
pub fn run_sweep(req: &SweepRequest, workers: Option<usize>) -> Result<SweepOutput> {
    req.validate()?;
    let setup = sweep_setup(req)?;
    let grid = req.grid();
    let eval = |n2: f64| -> PointResult {
        let result = if req.v == 0.0 {
            nr_sweep_point(req, &setup, n2)
        } else {
            relativistic_point(req, &setup, n2)
        };
        result.unwrap_or_else(|e| PointResult {
            record: SweepRecord {
                n2,
                e_over_m: f64::NAN,
                zone: Zone::NonPropagating,
                t2_exact: None,
                t2_eq4: None,
                phase_rad: None,
                ratio_eq7: None,
                ratio_numeric: None,
            },
            notes: vec![e.to_string()],
        })
    };
    let points: Vec<PointResult> = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))?
            .install(|| grid.par_iter().map(|&n2| eval(n2)).collect()),
        None => grid.par_iter().map(|&n2| eval(n2)).collect(),
    };

    let mut records = Vec::with_capacity(points.len());
    let mut notes = Vec::new();
    for (index, p) in points.into_iter().enumerate() {
        for message in p.notes {
            notes.push(PointNote {
                index,
                n2: p.record.n2,
                message,
            });
        }
        records.push(p.record);
    }
    unwrap_phase_column(&mut records);
    Ok(SweepOutput {
        request: *req,
        records,
        notes,
    })
}

/// Unwraps each run of consecutive non-empty phases in grid order.
fn unwrap_phase_column(records: &mut [SweepRecord]) {
    let mut start = 0;
    while start < records.len() {
        if records[start].phase_rad.is_none() {
            start += 1;
            continue;
        }
        let mut end = start;
        while end < records.len() && records[end].phase_rad.is_some() {
            end += 1;
        }
        let mut phases: Vec<f64> = records[start..end]
            .iter()
            .map(|r| r.phase_rad.unwrap_or_default())
            .collect();
        unwrap_in_place(&mut phases);
        for (r, p) in records[start..end].iter_mut().zip(phases) {
            r.phase_rad = Some(p);
        }
        start = end;
    }
}

/// The five datasets at `wL = 2π`, `v ∈ {0, 1, 2, 5, 10}`, each with 2000
/// points on `n² ∈ (0, v/2 + 3]` spaced by `(v/2 + 3)/2000`.
pub fn fig1_preset() -> Vec<(String, SweepRequest)> {
    [0.0, 1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|v: f64| {
            let max = v / 2.0 + 3.0;
            (
                format!("fig1_v{v}.csv"),
                SweepRequest {
                    v,
                    wl: std::f64::consts::TAU,
                    m: 1.0,
                    n2_min: max / 2000.0,
                    n2_max: max,
                    count: 2000,
                    outputs: Outputs::ALL,
                },
            )
        })
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// CSV rendering of the records (LF line endings, header row, empty fields
/// for absent values, shortest round-trip floats).
pub fn csv_bytes(records: &[SweepRecord]) -> Result<Vec<u8>> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let csv_err = |source| Error::Csv {
        path: PathBuf::from("<memory>"),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::domain(format!("csv buffer: {e}")))
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let bytes = csv_bytes(records)?;
    std::fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)
}

pub fn write_json(records: &[SweepRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, records).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_json(path: &Path) -> Result<Vec<SweepRecord>> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
