use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::certify::CertificationReport;
use crate::error::{Error, Result};
use crate::lattice::SpaceSpec;
use crate::semigroup::GrowthBound;

use super::solve::{BlowUp, Trajectory};
use super::window::WindowResult;

/// Columns written after `t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsvColumns {
    /// Every degree of freedom, labelled `name` or `name[j]`.
    #[default]
    Full,
    /// One norm per component, labelled `|name|`.
    Norms,
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_trajectory_csv<W: Write>(
    space: &SpaceSpec,
    traj: &Trajectory,
    columns: CsvColumns,
    out: W,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["t".to_string()];
    match columns {
        CsvColumns::Full => header.extend(space.labels()),
        CsvColumns::Norms => header.extend(space.components().iter().map(|c| format!("|{}|", c.label))),
    }
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for (t, s) in traj.times.iter().zip(&traj.states) {
        row.clear();
        row.push(format_f64(*t));
        match columns {
            CsvColumns::Full => row.extend(s.iter().map(|v| format_f64(*v))),
            CsvColumns::Norms => row.extend(space.component_norms(s).into_iter().map(format_f64)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed trajectory CSV: header labels (without `t`) and rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads a `t,<labels>` CSV. A missing `t` column, ragged rows, unparsable numbers or an
/// empty body are parse errors.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<CsvTable> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0).map(str::trim) != Some("t") {
        return Err(Error::Parse("first CSV column must be `t`".into()));
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != labels.len() + 1 {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                line + 1,
                rec.len(),
                labels.len() + 1
            )));
        }
        let mut vals = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: `{field}` is not a number", line + 1)))?;
            vals.push(v);
        }
        times.push(vals[0]);
        rows.push(vals[1..].to_vec());
    }
    if rows.is_empty() {
        return Err(Error::Parse("CSV has no data rows".into()));
    }
    Ok(CsvTable { labels, times, rows })
}

/// Per-window summary kept in the run metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub t_start: f64,
    pub t_len: f64,
    pub iterations: usize,
    pub residual: f64,
    pub max_contraction_ratio: Option<f64>,
    pub contraction_bound: f64,
    pub radius: f64,
    pub certified_radius: f64,
    pub lambda: f64,
    pub k: f64,
    pub min_component: f64,
}

impl From<&WindowResult> for WindowSummary {
    fn from(w: &WindowResult) -> Self {
        Self {
            t_start: w.t_start,
            t_len: w.t_len,
            iterations: w.iterations,
            residual: w.residual,
            max_contraction_ratio: w.contraction_ratios.iter().copied().reduce(f64::max),
            contraction_bound: w.contraction_bound,
            radius: w.radius,
            certified_radius: w.certified_radius,
            lambda: w.lambda,
            k: w.k,
            min_component: w.min_component,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub model: String,
    pub dof: usize,
    pub growth: GrowthBound,
    pub gamma_f: f64,
    pub horizon: f64,
    pub final_time: f64,
    pub saved_states: usize,
    pub window_count: usize,
    pub min_component: f64,
    pub min_scaled_component: f64,
    pub max_lambda: f64,
    pub max_k: f64,
    pub blow_up: Option<BlowUp>,
    pub certifications: Vec<CertificationReport>,
    pub windows: Vec<WindowSummary>,
    pub notes: Vec<String>,
}

impl RunMetadata {
    pub fn new(model: &str, growth: GrowthBound, dof: usize, horizon: f64, traj: &Trajectory) -> Self {
        Self {
            model: model.to_string(),
            dof,
            growth,
            gamma_f: traj.gamma_f,
            horizon,
            final_time: traj.final_time(),
            saved_states: traj.states.len(),
            window_count: traj.windows.len(),
            min_component: traj.min_component_overall,
            min_scaled_component: traj.min_scaled_component,
            max_lambda: traj.windows.iter().map(|w| w.lambda).fold(0.0, f64::max),
            max_k: traj.windows.iter().map(|w| w.k).fold(0.0, f64::max),
            blow_up: traj.blow_up.clone(),
            certifications: traj.certifications.clone(),
            windows: traj.windows.iter().map(WindowSummary::from).collect(),
            notes: traj.notes.clone(),
        }
    }
}
