//! File formats: matrix and dataset CSV in, JSON and CSV records out.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::altmin::AltMinTrace;
use crate::covmodel::{correlation_from_data, pitprops, ComponentSet, Dataset, MatrixKind, SparsityBudget, SpikedInstance, SymMatrix};
use crate::error::{Result, SpcaError};
use crate::eval::{AllocationStudy, RocCurve};
use crate::relax::{RelaxationKind, RelaxationResult};

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix_of(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(SpcaError::InvalidInput("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn parse_rows(text: &str) -> Result<(Vec<Vec<f64>>, bool)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut header = false;
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if n == 0 => header = true,
            Err(e) => return Err(SpcaError::InvalidInput(format!("line {}: {e}", n + 1))),
        }
    }
    Ok((rows, header))
}

fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path)?.read_to_string(&mut s)?;
    Ok(s)
}

/// `p x p` matrix CSV without header; symmetrized by averaging. Unit diagonal means correlation
/// unless `kind` says otherwise.
pub fn read_matrix_csv(path: &Path, kind: Option<MatrixKind>) -> Result<SymMatrix> {
    let (rows, header) = parse_rows(&read_text(path)?)?;
    if header {
        return Err(SpcaError::InvalidInput("matrix files have no header row".into()));
    }
    let m = matrix_of(&rows)?;
    let kind = kind.unwrap_or(if (0..m.nrows()).all(|i| (m[(i, i)] - 1.0).abs() <= 1e-9) { MatrixKind::Correlation } else { MatrixKind::Covariance });
    SymMatrix::symmetrized(m, kind)
}

/// `n x p` data CSV with an optional header row.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let (rows, _) = parse_rows(&read_text(path)?)?;
    Dataset::new(matrix_of(&rows)?)
}

pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in rows_of(m) {
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// `pitprops`, `identity:<n>`, or a path to a matrix CSV.
pub fn load_matrix(spec: &str, kind: Option<MatrixKind>) -> Result<SymMatrix> {
    if spec == "pitprops" {
        return Ok(pitprops());
    }
    if let Some(n) = spec.strip_prefix("identity:") {
        let n: usize = n.parse().map_err(|_| SpcaError::InvalidInput(format!("bad identity size in '{spec}'")))?;
        if n == 0 {
            return Err(SpcaError::InvalidInput("identity size must be positive".into()));
        }
        return Ok(SymMatrix::identity(n));
    }
    read_matrix_csv(Path::new(spec), kind)
}

/// Sample covariance (or correlation) of a data CSV.
pub fn load_dataset(path: &Path, standardize: bool) -> Result<SymMatrix> {
    correlation_from_data(&read_dataset_csv(path)?, standardize)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    #[serde(rename = "Z")]
    pub z: Vec<Vec<u8>>,
    pub objective: f64,
    pub variance_fraction: f64,
    pub violation: f64,
    pub gap: Option<f64>,
    pub upper_bound: Option<f64>,
    pub relaxation_kind: Option<RelaxationKind>,
    pub method: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SolutionRecord {
    pub fn new(sol: &ComponentSet, method: &str) -> Self {
        Self {
            u: rows_of(&sol.u),
            z: (0..sol.z.nrows()).map(|i| sol.z.row(i).iter().copied().collect()).collect(),
            objective: sol.objective,
            variance_fraction: sol.variance_fraction,
            violation: sol.violation,
            gap: None,
            upper_bound: None,
            relaxation_kind: None,
            method: method.to_string(),
            notes: Vec::new(),
        }
    }

    pub fn with_bound(mut self, relax: &RelaxationResult, gap: f64) -> Self {
        self.gap = Some(gap);
        self.upper_bound = Some(relax.upper_bound);
        self.relaxation_kind = Some(relax.kind);
        self
    }

    /// Rebuilds the solution; objective and violation are recomputed against `sigma`.
    pub fn to_component_set(&self, sigma: &DMatrix<f64>) -> Result<ComponentSet> {
        let u = matrix_of(&self.u)?;
        if u.nrows() != sigma.nrows() {
            return Err(SpcaError::DimensionMismatch(format!("U has {} rows, matrix is {}", u.nrows(), sigma.nrows())));
        }
        let mut cs = ComponentSet::from_loadings(u, sigma);
        let z: Vec<Vec<f64>> = self.z.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        cs.z = matrix_of(&z)?.map(|v| v as u8);
        Ok(cs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub status: String,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub kind: RelaxationKind,
    pub budget: SparsityBudget,
    pub upper_bound: f64,
    pub raw_bound: f64,
    pub cuts_added: usize,
    pub stalled_cuts: bool,
    pub zstar: Vec<Vec<f64>>,
    pub residuals: ResidualRecord,
}

impl BoundRecord {
    pub fn new(res: &RelaxationResult, trace: f64) -> Self {
        let r = &res.report;
        Self {
            kind: res.kind,
            budget: res.budget.clone(),
            upper_bound: res.upper_bound,
            raw_bound: res.upper_bound * trace,
            cuts_added: res.cuts_added,
            stalled_cuts: res.stalled_cuts,
            zstar: rows_of(&res.zstar),
            residuals: ResidualRecord {
                primal: r.residuals.primal_rel,
                dual: r.residuals.dual_rel,
                gap: r.residuals.gap_rel,
                status: format!("{:?}", r.status),
                iterations: r.iterations,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub p: usize,
    pub sigma: f64,
    pub k_true: usize,
    pub q: f64,
    pub seed: u64,
    pub supports: [Vec<usize>; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl InstanceRecord {
    /// Without a path the matrix is stored inline.
    pub fn new(inst: &SpikedInstance, matrix_path: Option<&str>) -> Self {
        Self {
            p: inst.p,
            sigma: inst.sigma,
            k_true: inst.k_true,
            q: inst.q,
            seed: inst.seed,
            supports: inst.supports.clone(),
            matrix_path: matrix_path.map(str::to_string),
            matrix: matrix_path.is_none().then(|| rows_of(inst.matrix.matrix())),
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}

/// `iteration,component,lambda,objective,violation`
pub fn write_trace_csv<W: Write>(w: W, trace: &AltMinTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["iteration", "component", "lambda", "objective", "violation"])?;
    for r in &trace.rows {
        w.write_record([r.iteration.to_string(), r.component.to_string(), r.lambda.to_string(), r.objective.to_string(), r.violation.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `k,mean_fpr,mean_tpr`
pub fn write_roc_csv<W: Write>(w: W, curve: &RocCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["k", "mean_fpr", "mean_tpr"])?;
    for p in &curve.points {
        w.write_record([p.k.to_string(), p.fpr.to_string(), p.tpr.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocSummary {
    pub auc: f64,
    pub method: String,
    pub config: crate::eval::RocConfig,
    /// TP/FP counts are pooled over both components before forming rates.
    pub pooling: String,
}

impl RocSummary {
    pub fn new(curve: &RocCurve) -> Self {
        Self { auc: curve.auc, method: curve.method.to_string(), config: curve.config.clone(), pooling: "micro".into() }
    }
}

/// `allocation,asymmetry,upper_bound,objective,violation`, allocation joined by `-`.
pub fn write_study_csv<W: Write>(w: W, st: &AllocationStudy) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["allocation", "asymmetry", "upper_bound", "objective", "violation"])?;
    for r in &st.rows {
        let a: Vec<String> = r.allocation.iter().map(|k| k.to_string()).collect();
        w.write_record([a.join("-"), r.asymmetry.to_string(), r.upper_bound.to_string(), r.objective.to_string(), r.violation.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
