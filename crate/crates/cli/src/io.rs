//! File schemas: state files, seed decompositions, and certificates.
//!
//! Everything is JSON with a fixed key order (struct declaration order) and
//! serde_json's shortest round-trip float formatting, so identical runs
//! produce identical bytes. Complex entries are `[re, im]` pairs; matrices
//! are arrays of rows.

use num_complex::Complex64;
use sepgamma::bipartite::BipartiteDims;
use sepgamma::crossnorm::{Certificate, Evidence, SearchConfig, Verdict};
use sepgamma::matrix::ComplexMatrix;
use sepgamma::states::{DensityOperator, SeparableDecomposition, SeparableTerm};
use serde::{Deserialize, Serialize};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix, String> {
    if rows.is_empty() {
        return Err("matrix has no rows".into());
    }
    let cols = rows[0].len();
    if cols == 0 {
        return Err("matrix has empty rows".into());
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err("matrix rows have inconsistent lengths".into());
    }
    let entries = rows
        .iter()
        .flat_map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)))
        .collect();
    ComplexMatrix::from_entries(rows.len(), cols, entries).map_err(|e| e.to_string())
}

/// On-disk density operator: `{"kind":"density","dims":[d1,d2],"matrix":[...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub kind: String,
    pub dims: [usize; 2],
    pub matrix: MatrixJson,
}

impl StateFile {
    pub fn from_state(rho: &DensityOperator) -> Self {
        Self {
            kind: "density".into(),
            dims: [rho.dims().d1(), rho.dims().d2()],
            matrix: matrix_to_json(rho.matrix()),
        }
    }

    pub fn into_state(self) -> Result<DensityOperator, String> {
        if self.kind != "density" {
            return Err(format!("expected kind \"density\", got \"{}\"", self.kind));
        }
        let dims = BipartiteDims::new(self.dims[0], self.dims[1]).map_err(|e| e.to_string())?;
        let matrix = matrix_from_json(&self.matrix)?;
        DensityOperator::from_matrix(matrix, dims).map_err(|e| e.to_string())
    }
}

/// One weighted product term of a separable decomposition file.
#[derive(Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub weight: f64,
    pub rho1: MatrixJson,
    pub rho2: MatrixJson,
}

/// On-disk separable decomposition, used both as certificate evidence and
/// as the `--seed-dec` input to `certify`.
#[derive(Debug, Serialize, Deserialize)]
pub struct SeedDecompositionFile {
    pub kind: String,
    pub dims: [usize; 2],
    pub terms: Vec<TermJson>,
}

impl SeedDecompositionFile {
    pub fn from_decomposition(dec: &SeparableDecomposition) -> Self {
        Self {
            kind: "separable_decomposition".into(),
            dims: [dec.dims().d1(), dec.dims().d2()],
            terms: dec
                .terms()
                .iter()
                .map(|t| TermJson {
                    weight: t.weight,
                    rho1: matrix_to_json(&t.rho1),
                    rho2: matrix_to_json(&t.rho2),
                })
                .collect(),
        }
    }

    pub fn into_decomposition(self) -> Result<SeparableDecomposition, String> {
        if self.kind != "separable_decomposition" {
            return Err(format!(
                "expected kind \"separable_decomposition\", got \"{}\"",
                self.kind
            ));
        }
        let dims = BipartiteDims::new(self.dims[0], self.dims[1]).map_err(|e| e.to_string())?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(SeparableTerm {
                    weight: t.weight,
                    rho1: matrix_from_json(&t.rho1)?,
                    rho2: matrix_from_json(&t.rho2)?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        SeparableDecomposition::new(dims, terms).map_err(|e| e.to_string())
    }
}

/// Full echo of the search configuration, seed included.
#[derive(Debug, Serialize, Deserialize)]
pub struct ConfigJson {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub step_shrink: f64,
    pub seed: u64,
    pub rank_padding: usize,
    pub entangled_tol: f64,
    pub sep_tol: f64,
    pub sep_reconstruction_tol: f64,
    pub convergence_tol: f64,
}

impl From<&SearchConfig> for ConfigJson {
    fn from(c: &SearchConfig) -> Self {
        Self {
            restarts: c.restarts,
            max_iters: c.max_iters,
            step_init: c.step_init,
            step_shrink: c.step_shrink,
            seed: c.seed,
            rank_padding: c.rank_padding,
            entangled_tol: c.entangled_tol,
            sep_tol: c.sep_tol,
            sep_reconstruction_tol: c.sep_reconstruction_tol,
            convergence_tol: c.convergence_tol,
        }
    }
}

impl From<&ConfigJson> for SearchConfig {
    fn from(c: &ConfigJson) -> Self {
        Self {
            restarts: c.restarts,
            max_iters: c.max_iters,
            step_init: c.step_init,
            step_shrink: c.step_shrink,
            seed: c.seed,
            rank_padding: c.rank_padding,
            entangled_tol: c.entangled_tol,
            sep_tol: c.sep_tol,
            sep_reconstruction_tol: c.sep_reconstruction_tol,
            convergence_tol: c.convergence_tol,
        }
    }
}

/// Certificate evidence: separable terms, or entangled witness families.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvidenceJson {
    Separable {
        terms: Vec<TermJson>,
    },
    Entangled {
        #[serde(rename = "A")]
        a: MatrixJson,
        #[serde(rename = "B")]
        b: MatrixJson,
        value: f64,
    },
}

/// On-disk certificate. Key order is fixed by declaration order.
#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    pub verdict: String,
    pub gamma_lower: f64,
    pub gamma_upper: Option<f64>,
    pub lower_method: String,
    pub entanglement_measure: (f64, Option<f64>),
    pub evidence: Option<EvidenceJson>,
    pub reconstruction_error: Option<f64>,
    pub config: ConfigJson,
    pub tool_version: String,
}

impl CertificateFile {
    pub fn from_certificate(cert: &Certificate, config: &SearchConfig) -> Self {
        let evidence = cert.evidence.as_ref().map(|e| match e {
            Evidence::Separable(dec) => EvidenceJson::Separable {
                terms: dec
                    .terms()
                    .iter()
                    .map(|t| TermJson {
                        weight: t.weight,
                        rho1: matrix_to_json(&t.rho1),
                        rho2: matrix_to_json(&t.rho2),
                    })
                    .collect(),
            },
            Evidence::Entangled { a, b, value } => EvidenceJson::Entangled {
                a: matrix_to_json(a),
                b: matrix_to_json(b),
                value: *value,
            },
        });
        Self {
            verdict: cert.verdict.as_str().into(),
            gamma_lower: cert.bounds.lower,
            gamma_upper: cert.bounds.upper,
            lower_method: cert.bounds.lower_method.as_str().into(),
            entanglement_measure: (cert.bounds.lower - 1.0, cert.bounds.upper.map(|u| u - 1.0)),
            evidence,
            reconstruction_error: cert.reconstruction_error,
            config: ConfigJson::from(config),
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn verdict(&self) -> Result<Verdict, String> {
        match self.verdict.as_str() {
            "Separable" => Ok(Verdict::Separable),
            "Entangled" => Ok(Verdict::Entangled),
            "Undecided" => Ok(Verdict::Undecided),
            other => Err(format!("unknown verdict \"{other}\"")),
        }
    }
}

/// Output of the `bounds` command.
#[derive(Debug, Serialize, Deserialize)]
pub struct BoundsOutput {
    pub gamma_lower: f64,
    pub gamma_upper: f64,
    pub lower_method: String,
    pub spectrum: Vec<f64>,
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serialization cannot fail");
    out.push('\n');
    out
}
