//! Validated density operators, explicit separable mixtures, named state
//! families, and seeded random generators.

use crate::bipartite::{kron, BipartiteDims};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eig;
use crate::matrix::ComplexMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Deliberately looser than the 1e-9 kernel residuals so validated states
// survive round-trips through the transforms.
pub const VALIDATION_TOL: f64 = 1e-8;

/// A positive unit-trace operator on a bipartite space, validated at
/// construction. May carry the separable decomposition it was built from.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    dims: BipartiteDims,
    matrix: ComplexMatrix,
    provenance: Option<SeparableDecomposition>,
}

impl DensityOperator {
    /// Validates Hermiticity (max entry 1e-8), positivity (min eigenvalue
    /// >= -1e-8), and unit trace (1e-8).
    pub fn from_matrix(matrix: ComplexMatrix, dims: BipartiteDims) -> Result<Self> {
        dims.check_operator(&matrix)?;
        if !matrix.is_finite() {
            return Err(Error::NotFinite);
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > VALIDATION_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let eig = hermitian_eig(&matrix)?;
        let min_eigenvalue = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if min_eigenvalue < -VALIDATION_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > VALIDATION_TOL || trace.im.abs() > VALIDATION_TOL {
            return Err(Error::TraceNotOne {
                trace_re: trace.re,
                trace_im: trace.im,
            });
        }
        Ok(Self {
            dims,
            matrix,
            provenance: None,
        })
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The separable decomposition this state was constructed from, if any.
    pub fn provenance(&self) -> Option<&SeparableDecomposition> {
        self.provenance.as_ref()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// One term of an explicit separable mixture.
#[derive(Debug, Clone)]
pub struct SeparableTerm {
    pub weight: f64,
    pub rho1: ComplexMatrix,
    pub rho2: ComplexMatrix,
}

/// Finite convex mixture of product density operators:
/// `sum_i w_i rho1_i (x) rho2_i` with positive weights summing to one.
#[derive(Debug, Clone)]
pub struct SeparableDecomposition {
    dims: BipartiteDims,
    terms: Vec<SeparableTerm>,
}

impl SeparableDecomposition {
    pub fn new(dims: BipartiteDims, terms: Vec<SeparableTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter(
                "separable decomposition needs at least one term".into(),
            ));
        }
        let mut weight_sum = 0.0;
        for term in &terms {
            if !(term.weight.is_finite() && term.weight > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "weights must be positive, got {}",
                    term.weight
                )));
            }
            weight_sum += term.weight;
            check_density_factor(&term.rho1, dims.d1())?;
            check_density_factor(&term.rho2, dims.d2())?;
        }
        if (weight_sum - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "weights must sum to one, got {weight_sum}"
            )));
        }
        Ok(Self { dims, terms })
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn terms(&self) -> &[SeparableTerm] {
        &self.terms
    }

    /// The mixture as an explicit matrix.
    pub fn mixture_matrix(&self) -> ComplexMatrix {
        let n = self.dims.total();
        let mut out = ComplexMatrix::zeros(n, n);
        for term in &self.terms {
            out = &out + &kron(&term.rho1.scale_re(term.weight), &term.rho2);
        }
        out
    }
}

fn check_density_factor(m: &ComplexMatrix, d: usize) -> Result<()> {
    if m.rows() != d || m.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: format!("{d}x{d} factor"),
            actual: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let deviation = m.hermiticity_deviation();
    if deviation > VALIDATION_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let min_eigenvalue = hermitian_eig(m)?.eigenvalues.last().copied().unwrap_or(0.0);
    if min_eigenvalue < -VALIDATION_TOL {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    let trace = m.trace();
    if (trace.re - 1.0).abs() > VALIDATION_TOL || trace.im.abs() > VALIDATION_TOL {
        return Err(Error::TraceNotOne {
            trace_re: trace.re,
            trace_im: trace.im,
        });
    }
    Ok(())
}

/// Builds the mixed state of an explicit separable decomposition, retaining
/// the decomposition as a provenance witness on the returned state.
pub fn separable_mixture(dec: SeparableDecomposition) -> Result<DensityOperator> {
    let mut state = DensityOperator::from_matrix(dec.mixture_matrix(), dec.dims())?;
    state.provenance = Some(dec);
    Ok(state)
}

/// The pure state |psi><psi|. `psi` must be unit norm within 1e-10.
pub fn pure_density(psi: &[Complex64], dims: BipartiteDims) -> Result<DensityOperator> {
    if psi.len() != dims.total() {
        return Err(Error::DimensionMismatch {
            expected: format!("vector of length {}", dims.total()),
            actual: format!("{}", psi.len()),
        });
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    let n = psi.len();
    let matrix = ComplexMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
    DensityOperator::from_matrix(matrix, dims)
}

/// Werner family on 2 (x) 2: `p |Psi-><Psi-| + (1-p) I/4` with the singlet
/// `|Psi-> = (|01> - |10>)/sqrt(2)` and p in [0, 1].
pub fn werner(p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "werner parameter must lie in [0, 1], got {p}"
        )));
    }
    let dims = BipartiteDims::new(2, 2)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = [
        Complex64::ZERO,
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
        Complex64::ZERO,
    ];
    let mut matrix = ComplexMatrix::from_fn(4, 4, |i, j| singlet[i] * singlet[j].conj() * p);
    for i in 0..4 {
        matrix[(i, i)] += Complex64::new((1.0 - p) / 4.0, 0.0);
    }
    DensityOperator::from_matrix(matrix, dims)
}

/// Projector onto the maximally entangled state `(1/sqrt d) sum_k |kk>` on
/// d (x) d, for d >= 2.
pub fn max_entangled(d: usize) -> Result<DensityOperator> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "maximally entangled state needs d >= 2, got {d}"
        )));
    }
    let dims = BipartiteDims::new(d, d)?;
    let amp = 1.0 / (d as f64).sqrt();
    let mut psi = vec![Complex64::ZERO; d * d];
    for k in 0..d {
        psi[k * d + k] = Complex64::new(amp, 0.0);
    }
    pure_density(&psi, dims)
}

/// Random-state family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    /// Haar-style random pure state.
    Pure,
    /// Hilbert-Schmidt-style mixed state `G G^H / tr(G G^H)` with G of the
    /// given rank.
    MixedHs { rank: usize },
    /// Mixture of `terms` random pure product states with uniform-simplex
    /// weights; the decomposition is attached as provenance.
    Separable { terms: usize },
}

/// Seeded random-state request. The seed fully determines the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSpec {
    pub seed: u64,
    pub kind: RandomKind,
}

/// Draws the requested random state, bit-reproducibly in the seed.
pub fn random_state(spec: RandomSpec, dims: BipartiteDims) -> Result<DensityOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        RandomKind::Pure => {
            let psi = random_unit_vector(&mut rng, dims.total());
            pure_density(&psi, dims)
        }
        RandomKind::MixedHs { rank } => {
            if rank == 0 || rank > dims.total() {
                return Err(Error::InvalidParameter(format!(
                    "mixed_hs rank must lie in 1..={}, got {rank}",
                    dims.total()
                )));
            }
            let g = random_gaussian_matrix(&mut rng, dims.total(), rank);
            let gg = &g * &g.dagger();
            let matrix = gg.scale_re(1.0 / gg.trace().re);
            DensityOperator::from_matrix(matrix, dims)
        }
        RandomKind::Separable { terms } => {
            if terms == 0 {
                return Err(Error::InvalidParameter(
                    "separable term count must be positive".into(),
                ));
            }
            // Uniform simplex weights: normalized unit exponentials.
            let raw: Vec<f64> = (0..terms)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let total: f64 = raw.iter().sum();
            let mut dec_terms = Vec::with_capacity(terms);
            for w in raw {
                let a = random_unit_vector(&mut rng, dims.d1());
                let b = random_unit_vector(&mut rng, dims.d2());
                dec_terms.push(SeparableTerm {
                    weight: w / total,
                    rho1: projector(&a),
                    rho2: projector(&b),
                });
            }
            separable_mixture(SeparableDecomposition::new(dims, dec_terms)?)
        }
    }
}

fn projector(psi: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj())
}

/// Standard complex Gaussian via Box-Muller.
pub(crate) fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    // Real and imaginary parts each N(0, 1/2) so |z|^2 has unit mean.
    Complex64::new(r * theta.cos(), r * theta.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

pub(crate) fn random_gaussian_matrix(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub(crate) fn random_unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    loop {
        let mut v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for z in v.iter_mut() {
                *z /= norm;
            }
            return v;
        }
    }
}

/// Haar-style random unitary: Gram-Schmidt of a Gaussian matrix.
pub(crate) fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    loop {
        let g = random_gaussian_matrix(rng, d, d);
        if let Some(q) = gram_schmidt(&g) {
            return q;
        }
    }
}

fn gram_schmidt(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.rows();
    let mut q = m.clone();
    for j in 0..n {
        for prev in 0..j {
            let proj: Complex64 = (0..n).map(|i| q[(i, prev)].conj() * q[(i, j)]).sum();
            for i in 0..n {
                let correction = proj * q[(i, prev)];
                q[(i, j)] -= correction;
            }
        }
        let norm = (0..n).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        for i in 0..n {
            q[(i, j)] /= norm;
        }
    }
    Some(q)
}
