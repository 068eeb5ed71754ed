//! Sweep tables and their CSV / JSON files.
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `v`, `b` | passage parameters |
//! | `transition_probability` | `|U10|^2` of the full passage |
//! | `half_p` | population in the upper adiabatic state at `z = 0` |
//! | `eta` | first-order transition estimator |
//! | `zn_p`, `alpha00`, `alpha01`, `fit_residual` | fitted symmetric-passage form |
//! | `d_max_iX`, `d_max_iZ`, `d_max_Tphased`, `d_max_iH` | gate error against each achieved target |
//! | `status` | `ok`, or the error that stopped the row |
//!
//! Failed rows leave their numeric cells empty.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use diabatic::gatemodel::{fit_zn_form, gate_error};
use diabatic::propagator::{full_evolution_operator, half_passage_p};
use diabatic::synthesis::{target_unitary, GateName};
use diabatic::{eta, Model, Passage, Settings};

use crate::config::{Format, Range, RunConfig};

/// Targets with a `d_max` column in every sweep.
pub const REGISTERED_TARGETS: [GateName; 4] = [GateName::IX, GateName::IZ, GateName::TPhased, GateName::IH];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub v: f64,
    pub b: f64,
    pub transition_probability: Option<f64>,
    pub half_p: Option<f64>,
    pub eta: Option<f64>,
    pub zn_p: Option<f64>,
    pub alpha00: Option<f64>,
    pub alpha01: Option<f64>,
    pub fit_residual: Option<f64>,
    #[serde(rename = "d_max_iX")]
    pub d_max_ix: Option<f64>,
    #[serde(rename = "d_max_iZ")]
    pub d_max_iz: Option<f64>,
    #[serde(rename = "d_max_Tphased")]
    pub d_max_tphased: Option<f64>,
    #[serde(rename = "d_max_iH")]
    pub d_max_ih: Option<f64>,
    pub status: String,
}

impl SweepRow {
    fn failed(v: f64, b: f64, status: String) -> Self {
        SweepRow {
            v,
            b,
            transition_probability: None,
            half_p: None,
            eta: None,
            zn_p: None,
            alpha00: None,
            alpha01: None,
            fit_residual: None,
            d_max_ix: None,
            d_max_iz: None,
            d_max_tphased: None,
            d_max_ih: None,
            status,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Evaluates every column at `(v, b)`; errors are recorded, not raised.
    pub fn evaluate(model: &Model, settings: &Settings, v: f64, b: f64) -> Self {
        let run = || -> diabatic::Result<SweepRow> {
            let traj = Passage::new(v, b)?;
            let u = full_evolution_operator(model, &traj, settings)?.unitary;
            let half_p = half_passage_p(model, &traj, settings)?;
            let zn = fit_zn_form(&u, half_p)?;
            let d = |g: GateName| gate_error(&u, &target_unitary(g).matrix).map(|r| r.d_max);
            Ok(SweepRow {
                v,
                b,
                transition_probability: Some(u[(1, 0)].norm_sqr()),
                half_p: Some(half_p),
                eta: Some(eta(model, &traj)?),
                zn_p: Some(zn.p),
                alpha00: Some(zn.alpha00),
                alpha01: Some(zn.alpha01),
                fit_residual: Some(zn.fit_residual),
                d_max_ix: Some(d(GateName::IX)?),
                d_max_iz: Some(d(GateName::IZ)?),
                d_max_tphased: Some(d(GateName::TPhased)?),
                d_max_ih: Some(d(GateName::IH)?),
                status: "ok".into(),
            })
        };
        run().unwrap_or_else(|e| SweepRow::failed(v, b, e.to_string()))
    }
}

/// A labelled point of interest, kept apart from the grid rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: String,
    pub v: f64,
    pub b: f64,
    pub half_p: Option<f64>,
    pub transition_probability: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axes {
    pub v: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config: RunConfig,
    pub axes: Axes,
    /// `v`-major, both axes ascending.
    pub rows: Vec<SweepRow>,
    pub annotations: Vec<Annotation>,
}

impl SweepTable {
    /// Evaluates the full `v x b` grid on the current rayon pool.
    pub fn evaluate(config: &RunConfig, model: &Model, settings: &Settings, v: &Range, b: &Range) -> Self {
        let vs = v.values();
        let bs = b.values();
        let cells: Vec<(f64, f64)> = vs.iter().flat_map(|&v| bs.iter().map(move |&b| (v, b))).collect();
        let rows = cells
            .par_iter()
            .map(|&(v, b)| SweepRow::evaluate(model, settings, v, b))
            .collect();
        SweepTable {
            config: config.clone(),
            axes: Axes { v: vs, b: bs },
            rows,
            annotations: Vec::new(),
        }
    }

    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    /// Writes the table as `<stem>.csv` (plus `<stem>.annotations.csv` when
    /// there are annotations) or `<stem>.json`. Returns the paths written.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        match format {
            Format::Json => {
                let path = dir.join(format!("{stem}.json"));
                write_json(&path, self)?;
                Ok(vec![path])
            }
            Format::Csv => {
                let path = dir.join(format!("{stem}.csv"));
                write_csv(&path, &self.rows)?;
                let mut out = vec![path];
                if !self.annotations.is_empty() {
                    let ann = dir.join(format!("{stem}.annotations.csv"));
                    write_csv(&ann, &self.annotations)?;
                    out.push(ann);
                }
                Ok(out)
            }
        }
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Ok(serde_json::from_reader(BufReader::new(f))?)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .map(|row| row.map_err(anyhow::Error::from))
        .collect()
}

/// Interior strict local maxima of `y`, returned as indices.
pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] > y[i + 1])
        .collect()
}
