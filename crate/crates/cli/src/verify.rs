//! Independent re-check of a written certificate.
//!
//! Works from the parsed files alone: the state file supplies the operator,
//! the certificate supplies verdict, bounds, tolerances (config echo), and
//! evidence. Separable evidence must re-validate as a separable
//! decomposition and sit within the recorded trace distance of the state;
//! entangled evidence must be genuinely orthonormal witness families whose
//! recomputed pairing value matches the file and clears the entanglement
//! threshold.

use num_complex::Complex64;
use sepgamma::crossnorm::{witness_pairing_value, SearchConfig, Verdict};
use sepgamma::linalg::trace_norm;
use sepgamma::matrix::ComplexMatrix;
use sepgamma::states::{DensityOperator, SeparableDecomposition, SeparableTerm};

use crate::io::{matrix_from_json, CertificateFile, EvidenceJson};

const VALUE_RECHECK_TOL: f64 = 1e-9;
const ORTHONORMALITY_TOL: f64 = 1e-8;

pub fn verify_certificate(cert: &CertificateFile, rho: &DensityOperator) -> Result<(), String> {
    let verdict = cert.verdict()?;
    let config = SearchConfig::from(&cert.config);
    config
        .validate()
        .map_err(|e| format!("config echo invalid: {e}"))?;

    if cert.gamma_lower < 1.0 - 1e-12 {
        return Err(format!("gamma_lower {} below 1", cert.gamma_lower));
    }
    if let Some(upper) = cert.gamma_upper {
        if cert.gamma_lower > upper + 1e-6 {
            return Err(format!(
                "bound ordering violated: lower {} > upper {}",
                cert.gamma_lower, upper
            ));
        }
    }
    let (lo, hi) = cert.entanglement_measure;
    if (lo - (cert.gamma_lower - 1.0)).abs() > 1e-12 {
        return Err("entanglement_measure lower end disagrees with gamma_lower".into());
    }
    match (hi, cert.gamma_upper) {
        (Some(h), Some(u)) if (h - (u - 1.0)).abs() > 1e-12 => {
            return Err("entanglement_measure upper end disagrees with gamma_upper".into());
        }
        (Some(_), None) | (None, Some(_)) => {
            return Err("entanglement_measure and gamma_upper presence disagree".into());
        }
        _ => {}
    }

    match verdict {
        Verdict::Separable => {
            let terms = match &cert.evidence {
                Some(EvidenceJson::Separable { terms }) => terms,
                _ => return Err("Separable verdict needs separable evidence".into()),
            };
            let reported = cert
                .reconstruction_error
                .ok_or("Separable verdict needs a reconstruction_error")?;
            let dec_terms = terms
                .iter()
                .map(|t| {
                    Ok(SeparableTerm {
                        weight: t.weight,
                        rho1: matrix_from_json(&t.rho1)?,
                        rho2: matrix_from_json(&t.rho2)?,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?;
            // Re-validates every invariant: positive weights summing to one,
            // Hermitian positive unit-trace factors of the right shapes.
            let dec = SeparableDecomposition::new(rho.dims(), dec_terms)
                .map_err(|e| format!("evidence is not a valid separable decomposition: {e}"))?;
            let error =
                trace_norm(&(&dec.mixture_matrix() - rho.matrix())).map_err(|e| e.to_string())?;
            if (error - reported).abs() > VALUE_RECHECK_TOL {
                return Err(format!(
                    "reconstruction error mismatch: recomputed {error}, file says {reported}"
                ));
            }
            if error > config.sep_reconstruction_tol {
                return Err(format!(
                    "reconstruction error {error} exceeds tolerance {}",
                    config.sep_reconstruction_tol
                ));
            }
        }
        Verdict::Entangled => {
            let (a, b, value) = match &cert.evidence {
                Some(EvidenceJson::Entangled { a, b, value }) => {
                    (matrix_from_json(a)?, matrix_from_json(b)?, *value)
                }
                _ => return Err("Entangled verdict needs witness evidence".into()),
            };
            let (d1, d2) = (rho.dims().d1(), rho.dims().d2());
            if a.rows() != d1 * d1 || b.rows() != d2 * d2 || a.cols() != b.cols() || a.cols() == 0 {
                return Err("witness family shapes do not match the state".into());
            }
            // The pairing only bounds the cross norm for orthonormal
            // families, so orthonormality is part of the evidence.
            check_orthonormal_columns(&a).map_err(|e| format!("left family: {e}"))?;
            check_orthonormal_columns(&b).map_err(|e| format!("right family: {e}"))?;
            let pairing = witness_pairing_value(rho, &a, &b);
            if (pairing - value).abs() > VALUE_RECHECK_TOL {
                return Err(format!(
                    "witness value mismatch: recomputed {pairing}, file says {value}"
                ));
            }
            if value <= 1.0 + config.entangled_tol {
                return Err(format!(
                    "witness value {value} does not clear 1 + entangled_tol"
                ));
            }
            if cert.gamma_lower + VALUE_RECHECK_TOL < value {
                return Err("gamma_lower is below the witness value it came from".into());
            }
        }
        Verdict::Undecided => {
            if cert.evidence.is_some() {
                return Err("Undecided verdict must not carry evidence".into());
            }
            if cert.reconstruction_error.is_some() {
                return Err("Undecided verdict must not carry a reconstruction error".into());
            }
        }
    }
    Ok(())
}

fn check_orthonormal_columns(m: &ComplexMatrix) -> Result<(), String> {
    for p in 0..m.cols() {
        for q in p..m.cols() {
            let inner: Complex64 = (0..m.rows()).map(|i| m[(i, p)].conj() * m[(i, q)]).sum();
            let target = if p == q {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            if (inner - target).norm() > ORTHONORMALITY_TOL {
                return Err(format!(
                    "columns {p} and {q} have inner product {inner} (expected {target})"
                ));
            }
        }
    }
    Ok(())
}
