//! File formats: CSV ingestion, JSON intermediates and plot-ready CSV outputs.
//!
//! Every writer goes through [`write_atomic`], so a reader never sees a
//! half-written file. CSVs use `,` separators, `.` decimals and LF endings.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::complex::{enumerate_simplices, BoundaryMatrix, SimplexId, StructuralSimplex};
use crate::distribution::{ContinuousSeriesTable, DiscreteSeriesTable, GaussianModel, JointDistribution};
use crate::error::{Error, Result};
use crate::spectral::{BasisDiagnostics, FourierBasis, LaplacianConvention};
use crate::synth::RankCurve;
use crate::transform::{CevReport, ControlComparison, HighOrderSignal};
use crate::workflow::Model;

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::validation(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    w.into_inner()
        .map_err(|e| Error::validation(format!("CSV buffer: {e}")))
}

fn write_csv<F>(path: &Path, header: &[&str], fill: F) -> Result<()>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    write_atomic(path, &csv_bytes(header, fill)?)
}

/// Reads a headed CSV into column-major cells, one column per header field.
fn read_columns<T>(path: &Path, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<(Vec<String>, Vec<Vec<T>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| tag_csv(e, path))?;
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| tag_csv(e, path))?
        .iter()
        .map(str::to_owned)
        .collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(Error::Malformed {
            line: 1,
            message: "header has an empty column name".into(),
        }
        .context(path.display().to_string()));
    }
    let mut columns: Vec<Vec<T>> = (0..names.len()).map(|_| Vec::new()).collect();
    for record in reader.records() {
        let record = record.map_err(|e| tag_csv(e, path))?;
        let line = record.position().map_or(0, |p| p.line());
        for (j, cell) in record.iter().enumerate() {
            let value = parse(cell).ok_or_else(|| {
                Error::Malformed {
                    line,
                    message: format!("column {:?}: {cell:?} is not {what}", names[j]),
                }
                .context(path.display().to_string())
            })?;
            columns[j].push(value);
        }
    }
    Ok((names, columns))
}

fn tag_csv(e: csv::Error, path: &Path) -> Error {
    match Error::from(e) {
        Error::Io { source, .. } => Error::io(path, source),
        other => other.context(path.display().to_string()),
    }
}

/// Symbol-valued series: a header of variable names and non-negative integer cells.
pub fn read_discrete_csv(path: &Path) -> Result<DiscreteSeriesTable> {
    let (names, columns) = read_columns(path, |s| s.parse::<u32>().ok(), "a non-negative integer symbol")?;
    DiscreteSeriesTable::with_inferred_alphabets(names, columns)
}

/// Real-valued series: a header of variable names and finite numeric cells.
pub fn read_continuous_csv(path: &Path) -> Result<ContinuousSeriesTable> {
    let (names, columns) = read_columns(
        path,
        |s| s.parse::<f64>().ok().filter(|v| v.is_finite()),
        "a finite number",
    )?;
    ContinuousSeriesTable::new(names, columns)
}

pub fn write_continuous_csv(path: &Path, table: &ContinuousSeriesTable) -> Result<()> {
    let names: Vec<&str> = table.variable_names().iter().map(String::as_str).collect();
    write_csv(path, &names, |w| {
        for t in 0..table.len() {
            w.serialize(table.columns().iter().map(|c| c[t]).collect::<Vec<_>>())?;
        }
        Ok(())
    })
}

/// JSON form of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelFile {
    Discrete {
        variables: Vec<String>,
        alphabet_sizes: Vec<u32>,
        /// Outcome tuples with positive probability, in lexicographic order.
        mass: Vec<(Vec<u32>, f64)>,
    },
    Gaussian {
        variables: Vec<String>,
        correlation: Vec<Vec<f64>>,
    },
}

impl ModelFile {
    pub fn from_model(model: &Model, variables: Vec<String>) -> Self {
        match model {
            Model::Discrete(d) => ModelFile::Discrete {
                variables,
                alphabet_sizes: d.alphabet_sizes().to_vec(),
                mass: d.iter().map(|(o, p)| (o.to_vec(), p)).collect(),
            },
            Model::Gaussian(g) => ModelFile::Gaussian {
                variables,
                correlation: matrix_rows(g.correlation()),
            },
        }
    }

    pub fn variables(&self) -> &[String] {
        match self {
            ModelFile::Discrete { variables, .. } | ModelFile::Gaussian { variables, .. } => variables,
        }
    }

    pub fn to_model(&self) -> Result<Model> {
        match self {
            ModelFile::Discrete {
                alphabet_sizes, mass, ..
            } => Ok(Model::Discrete(JointDistribution::from_mass(
                alphabet_sizes.clone(),
                mass.iter().cloned(),
            )?)),
            ModelFile::Gaussian { correlation, .. } => {
                Ok(Model::Gaussian(GaussianModel::new(matrix_from_rows(correlation)?)?))
            }
        }
    }
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::validation("matrix rows have different lengths"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// JSON form of a structural simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub variables: Vec<String>,
    pub similarity: Vec<Vec<f64>>,
    /// `weights[n]` lists the n-simplex weights in lexicographic order.
    pub weights: Vec<Vec<f64>>,
}

impl ComplexFile {
    pub fn new(variables: Vec<String>, similarity: &DMatrix<f64>, s: &StructuralSimplex) -> Self {
        Self {
            variables,
            similarity: matrix_rows(similarity),
            weights: (0..=s.top_dimension()).map(|n| s.weights(n).to_vec()).collect(),
        }
    }

    pub fn structural(&self) -> Result<StructuralSimplex> {
        let top = self
            .weights
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::validation("complex file has no weights"))?;
        StructuralSimplex::new(top, self.weights.clone())
    }
}

/// JSON form of a Laplacian spectrum and its Fourier basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub dimension: usize,
    pub convention: LaplacianConvention,
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
    /// Rows of `F`.
    pub forward: Vec<Vec<f64>>,
    /// Rows of `F^{-1}`; its columns are the eigenvectors.
    pub inverse: Vec<Vec<f64>>,
    pub diagnostics: BasisDiagnostics,
}

impl SpectrumFile {
    pub fn new(basis: &FourierBasis, convention: LaplacianConvention, diagnostics: BasisDiagnostics) -> Self {
        Self {
            dimension: basis.dimension(),
            convention,
            eigenvalues: basis.eigenvalues().iter().copied().collect(),
            weights: basis.weights().iter().copied().collect(),
            forward: matrix_rows(basis.forward()),
            inverse: matrix_rows(basis.inverse()),
            diagnostics,
        }
    }

    pub fn basis(&self) -> Result<FourierBasis> {
        FourierBasis::from_parts(
            self.dimension,
            self.eigenvalues.clone(),
            matrix_from_rows(&self.forward)?,
            matrix_from_rows(&self.inverse)?,
            self.weights.clone(),
        )
    }
}

/// `simplex,value` rows with simplex labels such as `0-2-5`.
pub fn write_signal_csv(path: &Path, signal: &HighOrderSignal) -> Result<()> {
    let labels: Vec<String> = match signal.basis() {
        crate::transform::BasisTag::Canonical => enumerate_simplices(signal.num_vertices() - 1, signal.dimension())?
            .iter()
            .map(SimplexId::label)
            .collect(),
        _ => (0..signal.len()).map(|i| i.to_string()).collect(),
    };
    let key = match signal.basis() {
        crate::transform::BasisTag::Canonical => "simplex",
        _ => "component",
    };
    write_csv(path, &[key, "value"], |w| {
        for (label, v) in labels.iter().zip(signal.coefficients()) {
            w.serialize((label, v))?;
        }
        Ok(())
    })
}

pub fn write_boundary_csv(path: &Path, b: &BoundaryMatrix) -> Result<()> {
    write_csv(path, &["row", "col", "value"], |w| {
        for &(r, c, v) in b.triplets() {
            w.serialize((r, c, v))?;
        }
        Ok(())
    })
}

/// Structural weights as `dimension,simplex,weight`.
pub fn write_weights_csv(path: &Path, s: &StructuralSimplex) -> Result<()> {
    write_csv(path, &["dimension", "simplex", "weight"], |w| {
        for n in 0..=s.top_dimension() {
            for (id, weight) in enumerate_simplices(s.top_dimension(), n)?.iter().zip(s.weights(n)) {
                w.serialize((n, id.label(), weight))?;
            }
        }
        Ok(())
    })
}

pub fn write_eigenvalues_csv(path: &Path, basis: &FourierBasis) -> Result<()> {
    write_csv(path, &["index", "eigenvalue"], |w| {
        for (i, v) in basis.eigenvalues().iter().enumerate() {
            w.serialize((i, v))?;
        }
        Ok(())
    })
}

/// `k,component,ev,cev` with `k` starting at 1.
pub fn write_cev_csv(path: &Path, report: &CevReport) -> Result<()> {
    write_csv(path, &["k", "component", "ev", "cev"], |w| {
        for (i, ((ev, cev), comp)) in report.sorted_ev.iter().zip(&report.cev).zip(&report.order).enumerate() {
            w.serialize((i + 1, comp, ev, cev))?;
        }
        Ok(())
    })
}

/// One row per (dimension, measure, threshold) with the component count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentsRow {
    pub dimension: usize,
    pub measure: String,
    pub basis: String,
    pub simplices: usize,
    pub threshold: f64,
    pub components: usize,
}

pub fn write_components_csv(path: &Path, rows: &[ComponentsRow]) -> Result<()> {
    write_csv(
        path,
        &["dimension", "measure", "basis", "simplices", "threshold", "components"],
        |w| {
            for r in rows {
                w.serialize((r.dimension, &r.measure, &r.basis, r.simplices, r.threshold, r.components))?;
            }
            Ok(())
        },
    )
}

/// Long format `basis_kind,replicate,k,cev`; the Fourier curve has replicate 0.
pub fn write_control_csv(path: &Path, c: &ControlComparison) -> Result<()> {
    write_csv(path, &["basis_kind", "replicate", "k", "cev"], |w| {
        for (k, v) in c.fourier_cev.iter().enumerate() {
            w.serialize(("fourier", 0, k + 1, v))?;
        }
        for (r, curve) in c.random_cev.iter().enumerate() {
            for (k, v) in curve.iter().enumerate() {
                w.serialize(("random", r + 1, k + 1, v))?;
            }
        }
        Ok(())
    })
}

/// `k,fourier_cev,random_mean,ci_low,ci_high` summary of a control comparison.
pub fn write_control_summary_csv(path: &Path, c: &ControlComparison) -> Result<()> {
    write_csv(path, &["k", "fourier_cev", "random_mean", "ci_low", "ci_high"], |w| {
        for k in 0..c.fourier_cev.len() {
            w.serialize((
                k + 1,
                c.fourier_cev[k],
                c.random.mean[k],
                c.random.ci_low[k],
                c.random.ci_high[k],
            ))?;
        }
        Ok(())
    })
}

/// Long format `rank,dimension,measure,k,mean_cev,ci_low,ci_high`.
pub fn write_rank_curves_csv(path: &Path, curves: &[RankCurve]) -> Result<()> {
    write_csv(
        path,
        &["rank", "dimension", "measure", "k", "mean_cev", "ci_low", "ci_high"],
        |w| {
            for c in curves {
                for k in 0..c.band.mean.len() {
                    w.serialize((
                        c.rank,
                        c.dimension,
                        c.measure.short_name(),
                        k + 1,
                        c.band.mean[k],
                        c.band.ci_low[k],
                        c.band.ci_high[k],
                    ))?;
                }
            }
            Ok(())
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::MeasureKind;
    use crate::transform::BasisTag;

    #[test]
    fn discrete_csv_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        fs::write(&p, "a,b,c\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n").unwrap();
        let t = read_discrete_csv(&p).unwrap();
        assert_eq!(t.num_variables(), 3);
        assert_eq!(t.len(), 4);
        assert_eq!(t.alphabet_sizes(), &[2, 2, 2]);

        fs::write(&p, "a,b\n0,1\n2,x\n").unwrap();
        let err = read_discrete_csv(&p).unwrap_err();
        assert!(matches!(err.root(), Error::Malformed { line: 3, .. }), "{err}");
        assert_eq!(err.exit_code(), 2);

        fs::write(&p, "a,b\n0,1\n2\n").unwrap();
        assert_eq!(read_discrete_csv(&p).unwrap_err().exit_code(), 2);
        assert_eq!(read_discrete_csv(&dir.path().join("missing.csv")).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn continuous_csv_rejects_non_finite() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("y.csv");
        fs::write(&p, "u,v\n0.5,1e3\nNaN,2\n").unwrap();
        let err = read_continuous_csv(&p).unwrap_err();
        assert!(matches!(err.root(), Error::Malformed { line: 3, .. }));
        let table = ContinuousSeriesTable::new(vec!["u".into(), "v".into()], vec![vec![0.25, -1.0], vec![3.0, 1e-300]]).unwrap();
        write_continuous_csv(&p, &table).unwrap();
        assert_eq!(read_continuous_csv(&p).unwrap(), table);
    }

    #[test]
    fn signal_csv_has_simplex_labels() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let sig = HighOrderSignal::new(4, 2, MeasureKind::OInformation, BasisTag::Canonical, vec![-1.0, 0.5, 0.0, 2.0]).unwrap();
        write_signal_csv(&p, &sig).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "simplex,value\n0-1-2,-1.0\n0-1-3,0.5\n0-2-3,0.0\n1-2-3,2.0\n");
        assert!(!dir.path().join(".s.csv.tmp").exists());
    }

    #[test]
    fn model_file_roundtrip() {
        let d = JointDistribution::from_weights(vec![2, 2], [(vec![0, 0], 1.0), (vec![1, 1], 3.0)]).unwrap();
        let file = ModelFile::from_model(&Model::Discrete(d.clone()), vec!["a".into(), "b".into()]);
        let json = serde_json::to_string(&file).unwrap();
        let back: ModelFile = serde_json::from_str(&json).unwrap();
        match back.to_model().unwrap() {
            Model::Discrete(e) => assert_eq!(e, d),
            Model::Gaussian(_) => panic!("wrong kind"),
        }
    }
}
