//! Upper bounds: stochastic descent over finite decompositions, and the
//! closed-form optimal decomposition for pure states.
//!
//! The search keeps reconstruction exact by construction. Every move
//! replaces the terms by `u_i' = sum_j G_ij u_j`, `v_i' = sum_j (G^-T)_ij v_j`
//! for an invertible mixing matrix G, which leaves `sum_i u_i' (x) v_i'`
//! invariant, so only the cost needs tracking. The objective (a sum of
//! products of trace norms) is nonsmooth; derivative-free multiplicative
//! hill-climbing with adaptive step size and seeded restarts is robust and
//! simple at these dimensions.

use crate::bipartite::{operator_schmidt, BipartiteDims};
use crate::error::{Error, Result};
use crate::linalg::{svd, trace_norm};
use crate::matrix::ComplexMatrix;
use crate::states::{complex_gaussian, DensityOperator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{decomposition_cost, reconstruct, ElementaryDecomposition, SearchConfig};

/// Singular values of the realignment below this are treated as zero when
/// building the starting decomposition.
const SCHMIDT_RANK_TOL: f64 = 1e-12;
/// Stop once the cost is this close to the floor at 1; no move can improve it.
const COST_FLOOR_EXIT: f64 = 1e-12;
/// Consecutive rejected moves before the step size shrinks.
const SHRINK_PATIENCE: usize = 30;
/// Floor of the step anneal; the step then resets to `RESET_FACTOR *
/// step_init` and descent continues, so a restart always spends its full
/// iteration budget (cost is monotone, so cycling cannot hurt).
const STEP_FLOOR: f64 = 1e-8;
const RESET_FACTOR: f64 = 0.005;

/// Best decomposition found by the search and its cost.
#[derive(Debug, Clone)]
pub struct UpperBound {
    pub cost: f64,
    pub witness: ElementaryDecomposition,
    pub iterations: usize,
}

/// Stochastic hill-climbing search for a low-cost decomposition of `rho`.
///
/// Starts from the operator-Schmidt decomposition, or from `seed_dec` when
/// given (it must reconstruct `rho` within 1e-8 in trace norm). Restarts
/// run independently with seeds `config.seed + restart index` and may be
/// scheduled in parallel; the best cost wins, ties broken by lowest restart
/// index, so the outcome matches sequential execution.
pub fn upper_bound_search(
    rho: &DensityOperator,
    config: &SearchConfig,
    seed_dec: Option<&ElementaryDecomposition>,
) -> Result<UpperBound> {
    config.validate()?;
    let dims = rho.dims();
    let mut terms: Vec<FactorPair> = match seed_dec {
        Some(dec) => {
            if dec.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: format!("dims ({}, {})", dims.d1(), dims.d2()),
                    actual: format!("dims ({}, {})", dec.dims().d1(), dec.dims().d2()),
                });
            }
            let gap = trace_norm(&(&reconstruct(dec) - rho.matrix()))?;
            if gap > 1e-8 {
                return Err(Error::SeedMismatch { gap });
            }
            dec.terms().to_vec()
        }
        None => {
            let schmidt = operator_schmidt(rho.matrix(), dims, SCHMIDT_RANK_TOL)?;
            schmidt
                .coefficients
                .iter()
                .zip(schmidt.left_factors.iter().zip(&schmidt.right_factors))
                .map(|(c, (a, b))| (a.scale_re(*c), b.clone()))
                .collect()
        }
    };
    for _ in 0..config.rank_padding {
        terms.push((
            ComplexMatrix::zeros(dims.d1(), dims.d1()),
            ComplexMatrix::zeros(dims.d2(), dims.d2()),
        ));
    }
    let start = ElementaryDecomposition::new(dims, terms)?;
    let start_cost = decomposition_cost(&start);
    if start_cost <= 1.0 + COST_FLOOR_EXIT || start.len() < 2 {
        // Already at the density-operator cost floor, or nothing to mix.
        return Ok(UpperBound {
            cost: start_cost,
            witness: start,
            iterations: 0,
        });
    }

    // Restart 0 descends straight from the start, so the best result never
    // exceeds the starting cost; later restarts first kick the
    // decomposition with a random mixing of growing strength to land in
    // different basins.
    let results: Vec<ClimbResult> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let kick = match restart {
                0 => 0.0,
                r => 0.25 * (1 + (r - 1) % 4) as f64,
            };
            climb(
                start.terms(),
                config.seed.wrapping_add(restart as u64),
                config,
                kick,
            )
        })
        .collect();

    let mut best_idx = 0;
    for (idx, result) in results.iter().enumerate() {
        if result.0 < results[best_idx].0 - 1e-15 {
            best_idx = idx;
        }
    }
    let (cost, terms, iterations) = results.into_iter().nth(best_idx).expect("restarts >= 1");
    Ok(UpperBound {
        cost,
        witness: ElementaryDecomposition::new(dims, terms)?,
        iterations,
    })
}

type FactorPair = (ComplexMatrix, ComplexMatrix);
type ClimbResult = (f64, Vec<FactorPair>, usize);

struct Climber {
    terms: Vec<FactorPair>,
    tn_left: Vec<f64>,
    tn_right: Vec<f64>,
}

impl Climber {
    fn cost(&self) -> f64 {
        self.tn_left
            .iter()
            .zip(&self.tn_right)
            .map(|(a, b)| a * b)
            .sum()
    }
}

fn climb(start: &[FactorPair], seed: u64, config: &SearchConfig, kick: f64) -> ClimbResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tn = |m: &ComplexMatrix| trace_norm(m).expect("factors are square");
    let mut state = Climber {
        terms: start.to_vec(),
        tn_left: start.iter().map(|(u, _)| tn(u)).collect(),
        tn_right: start.iter().map(|(_, v)| tn(v)).collect(),
    };
    let r = state.terms.len();
    if kick > 0.0 {
        // Cost-increasing random mixing that relocates the descent into a
        // different basin; reconstruction stays exact.
        apply_full_mixing(&mut state, &mut rng, kick);
    }
    let mut cost = state.cost();
    let mut step = config.step_init;
    let mut rejects = 0usize;
    let mut iterations = 0usize;

    while iterations < config.max_iters {
        iterations += 1;

        let accepted = if r > 2 && rng.random::<f64>() < 0.2 {
            try_full_move(&mut state, &mut rng, step, cost)
        } else {
            try_pair_move(&mut state, &mut rng, step, cost)
        };
        match accepted {
            Some(new_cost) => {
                cost = new_cost;
                rejects = 0;
                if cost <= 1.0 + COST_FLOOR_EXIT {
                    break;
                }
            }
            None => {
                rejects += 1;
                shrink(&mut step, &mut rejects, config);
            }
        }
    }

    (cost, state.terms, iterations)
}

/// Mixes a random pair of terms with an invertible 2x2 block `I + step X`.
/// Returns the new cost on acceptance.
fn try_pair_move(state: &mut Climber, rng: &mut ChaCha8Rng, step: f64, cost: f64) -> Option<f64> {
    let r = state.terms.len();
    let i = rng.random_range(0..r);
    let mut j = rng.random_range(0..r - 1);
    if j >= i {
        j += 1;
    }

    let g = [
        Complex64::ONE + complex_gaussian(rng) * step,
        complex_gaussian(rng) * step,
        complex_gaussian(rng) * step,
        Complex64::ONE + complex_gaussian(rng) * step,
    ];
    let det = g[0] * g[3] - g[1] * g[2];
    if det.norm() < 1e-8 {
        return None;
    }
    let ginv = [g[3] / det, -g[1] / det, -g[2] / det, g[0] / det];

    let tn = |m: &ComplexMatrix| trace_norm(m).expect("factors are square");
    let new_ui = &state.terms[i].0.scale(g[0]) + &state.terms[j].0.scale(g[1]);
    let new_uj = &state.terms[i].0.scale(g[2]) + &state.terms[j].0.scale(g[3]);
    // v picks up the inverse transpose: v_i' = sum_j (G^-1)_ji v_j.
    let new_vi = &state.terms[i].1.scale(ginv[0]) + &state.terms[j].1.scale(ginv[2]);
    let new_vj = &state.terms[i].1.scale(ginv[1]) + &state.terms[j].1.scale(ginv[3]);

    let tn_ui = tn(&new_ui);
    let tn_uj = tn(&new_uj);
    let tn_vi = tn(&new_vi);
    let tn_vj = tn(&new_vj);
    let new_cost =
        cost - state.tn_left[i] * state.tn_right[i] - state.tn_left[j] * state.tn_right[j]
            + tn_ui * tn_vi
            + tn_uj * tn_vj;
    if new_cost >= cost - 1e-15 {
        return None;
    }

    state.terms[i] = (new_ui, new_vi);
    state.terms[j] = (new_uj, new_vj);
    state.tn_left[i] = tn_ui;
    state.tn_right[i] = tn_vi;
    state.tn_left[j] = tn_uj;
    state.tn_right[j] = tn_vj;
    rebalance(state, i);
    rebalance(state, j);
    Some(state.cost())
}

/// Mixes all terms at once with `I + step X`; catches descent directions
/// that no two-term move sees.
fn try_full_move(state: &mut Climber, rng: &mut ChaCha8Rng, step: f64, cost: f64) -> Option<f64> {
    let r = state.terms.len();
    let g = ComplexMatrix::from_fn(r, r, |i, j| {
        let noise = complex_gaussian(rng) * step;
        if i == j {
            Complex64::ONE + noise
        } else {
            noise
        }
    });
    let candidate = mixed_terms(state, &g)?;
    let tn = |m: &ComplexMatrix| trace_norm(m).expect("factors are square");
    let tn_left: Vec<f64> = candidate.iter().map(|(u, _)| tn(u)).collect();
    let tn_right: Vec<f64> = candidate.iter().map(|(_, v)| tn(v)).collect();
    let new_cost: f64 = tn_left.iter().zip(&tn_right).map(|(a, b)| a * b).sum();
    if new_cost >= cost - 1e-15 {
        return None;
    }

    state.terms = candidate;
    state.tn_left = tn_left;
    state.tn_right = tn_right;
    for idx in 0..r {
        rebalance(state, idx);
    }
    Some(state.cost())
}

fn apply_full_mixing(state: &mut Climber, rng: &mut ChaCha8Rng, strength: f64) {
    let r = state.terms.len();
    loop {
        let g = ComplexMatrix::from_fn(r, r, |i, j| {
            let noise = complex_gaussian(rng) * strength;
            if i == j {
                Complex64::ONE + noise
            } else {
                noise
            }
        });
        if let Some(mixed) = mixed_terms(state, &g) {
            let tn = |m: &ComplexMatrix| trace_norm(m).expect("factors are square");
            state.tn_left = mixed.iter().map(|(u, _)| tn(u)).collect();
            state.tn_right = mixed.iter().map(|(_, v)| tn(v)).collect();
            state.terms = mixed;
            for idx in 0..r {
                rebalance(state, idx);
            }
            return;
        }
    }
}

/// `u_i' = sum_j G_ij u_j`, `v_i' = sum_j (G^-1)_ji v_j`; None when G is
/// too close to singular.
fn mixed_terms(state: &Climber, g: &ComplexMatrix) -> Option<Vec<FactorPair>> {
    let ginv = invert(g)?;
    let r = state.terms.len();
    let (d1, d2) = (state.terms[0].0.rows(), state.terms[0].1.rows());
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let mut u = ComplexMatrix::zeros(d1, d1);
        let mut v = ComplexMatrix::zeros(d2, d2);
        for j in 0..r {
            if g[(i, j)] != Complex64::ZERO {
                u = &u + &state.terms[j].0.scale(g[(i, j)]);
            }
            if ginv[(j, i)] != Complex64::ZERO {
                v = &v + &state.terms[j].1.scale(ginv[(j, i)]);
            }
        }
        out.push((u, v));
    }
    Some(out)
}

/// Gauss-Jordan inverse with partial pivoting; None when a pivot collapses.
fn invert(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| a[(x, col)].norm().partial_cmp(&a[(y, col)].norm()).unwrap())?;
        if a[(pivot_row, col)].norm() < 1e-10 {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(pivot_row, j)];
                a[(pivot_row, j)] = tmp;
                let tmp = inv[(col, j)];
                inv[(col, j)] = inv[(pivot_row, j)];
                inv[(pivot_row, j)] = tmp;
            }
        }
        let pivot = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= pivot;
            inv[(col, j)] /= pivot;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[(row, col)];
            if factor == Complex64::ZERO {
                continue;
            }
            for j in 0..n {
                let aj = a[(col, j)];
                let ij = inv[(col, j)];
                a[(row, j)] -= factor * aj;
                inv[(row, j)] -= factor * ij;
            }
        }
    }
    Some(inv)
}

fn shrink(step: &mut f64, rejects: &mut usize, config: &SearchConfig) {
    if *rejects >= SHRINK_PATIENCE {
        *step *= config.step_shrink;
        *rejects = 0;
        if *step < STEP_FLOOR {
            *step = (config.step_init * RESET_FACTOR).max(STEP_FLOOR);
        }
    }
}

/// Keep the two factors of a term at comparable scale; the product
/// `|u|_1 |v|_1` is invariant under u/s, v*s.
fn rebalance(state: &mut Climber, idx: usize) {
    let (tu, tv) = (state.tn_left[idx], state.tn_right[idx]);
    if tu > 1e-200 && tv > 1e-200 {
        let s = (tu / tv).sqrt();
        state.terms[idx].0 = state.terms[idx].0.scale_re(1.0 / s);
        state.terms[idx].1 = state.terms[idx].1.scale_re(s);
        state.tn_left[idx] = tu / s;
        state.tn_right[idx] = tv * s;
    }
}

/// Closed-form optimal decomposition of a pure state |psi><psi|.
///
/// With Schmidt form `|psi> = sum_k c_k |k_k>|k'_k>` of rank r, the r^2
/// terms `(1/r^2) |a_m><a_n| (x) |b_m><b_n|`, where
/// `a_m = sum_k w^{mk} sqrt(c_k) |k_k>` with `w = exp(2 pi i / r)` and
/// `b_m` its Fourier conjugate in the primed basis, reconstruct the state
/// exactly at cost `(sum_k c_k)^2`. That meets the realignment lower bound,
/// so the infimum is attained on this family.
pub fn pure_state_decomposition(
    psi: &[Complex64],
    dims: BipartiteDims,
) -> Result<ElementaryDecomposition> {
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
    let (d1, d2) = (dims.d1(), dims.d2());
    let reshaped = ComplexMatrix::from_fn(d1, d2, |i, k| psi[i * d2 + k]);
    let s = svd(&reshaped);
    let rank = s
        .singular_values
        .iter()
        .take_while(|&&c| c > SCHMIDT_RANK_TOL)
        .count()
        .max(1);

    // a_m and b_m for m = 0..r: discrete-Fourier recombinations of the
    // Schmidt vectors weighted by sqrt(c_k).
    let omega = 2.0 * std::f64::consts::PI / rank as f64;
    let mut left_vectors = Vec::with_capacity(rank);
    let mut right_vectors = Vec::with_capacity(rank);
    for m in 0..rank {
        let mut a = vec![Complex64::ZERO; d1];
        let mut b = vec![Complex64::ZERO; d2];
        for k in 0..rank {
            let c_sqrt = s.singular_values[k].sqrt();
            let phase = Complex64::from_polar(1.0, omega * (m * k) as f64);
            for (row, entry) in a.iter_mut().enumerate() {
                *entry += phase * c_sqrt * s.u[(row, k)];
            }
            // Primed Schmidt vectors are conj(V) columns; the Fourier phase
            // enters conjugated.
            for (row, entry) in b.iter_mut().enumerate() {
                *entry += phase.conj() * c_sqrt * s.v[(row, k)].conj();
            }
        }
        left_vectors.push(a);
        right_vectors.push(b);
    }

    let weight = 1.0 / (rank * rank) as f64;
    let mut terms = Vec::with_capacity(rank * rank);
    for m in 0..rank {
        for n in 0..rank {
            let left = ComplexMatrix::from_fn(d1, d1, |p, q| {
                left_vectors[m][p] * left_vectors[n][q].conj() * weight
            });
            let right = ComplexMatrix::from_fn(d2, d2, |p, q| {
                right_vectors[m][p] * right_vectors[n][q].conj()
            });
            terms.push((left, right));
        }
    }
    ElementaryDecomposition::new(dims, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{max_entangled, pure_density, random_state, RandomKind, RandomSpec};

    fn dims22() -> BipartiteDims {
        BipartiteDims::new(2, 2).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_state_search_returns_cost_one_immediately() {
        let rho1 = ComplexMatrix::diag(&[0.7, 0.3]);
        let rho2 = ComplexMatrix::diag(&[0.4, 0.6]);
        let rho = crate::states::DensityOperator::from_matrix(
            crate::bipartite::kron(&rho1, &rho2),
            dims22(),
        )
        .unwrap();
        let out = upper_bound_search(&rho, &SearchConfig::default(), None).unwrap();
        assert!((out.cost - 1.0).abs() < 1e-9, "cost {}", out.cost);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn seeded_search_on_separable_mixture_needs_zero_iterations() {
        let rho = random_state(
            RandomSpec {
                seed: 17,
                kind: RandomKind::Separable { terms: 4 },
            },
            dims22(),
        )
        .unwrap();
        let seed = ElementaryDecomposition::from_separable(rho.provenance().unwrap());
        let out = upper_bound_search(&rho, &SearchConfig::default(), Some(&seed)).unwrap();
        assert!((out.cost - 1.0).abs() < 1e-10);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn seed_mismatch_is_rejected() {
        let rho = max_entangled(2).unwrap();
        let wrong = ElementaryDecomposition::new(
            dims22(),
            vec![(
                ComplexMatrix::diag(&[1.0, 0.0]),
                ComplexMatrix::diag(&[1.0, 0.0]),
            )],
        )
        .unwrap();
        assert!(matches!(
            upper_bound_search(&rho, &SearchConfig::default(), Some(&wrong)),
            Err(Error::SeedMismatch { .. })
        ));
    }

    #[test]
    fn search_preserves_reconstruction() {
        let rho = random_state(
            RandomSpec {
                seed: 5,
                kind: RandomKind::MixedHs { rank: 4 },
            },
            dims22(),
        )
        .unwrap();
        let config = SearchConfig {
            restarts: 4,
            max_iters: 400,
            ..SearchConfig::default()
        };
        let out = upper_bound_search(&rho, &config, None).unwrap();
        let gap = trace_norm(&(&reconstruct(&out.witness) - rho.matrix())).unwrap();
        assert!(gap < 1e-9, "reconstruction drifted by {gap}");
        assert!((decomposition_cost(&out.witness) - out.cost).abs() < 1e-10);
    }

    #[test]
    fn bell_search_reaches_the_pure_state_optimum() {
        let bell = max_entangled(2).unwrap();
        let out = upper_bound_search(&bell, &SearchConfig::default(), None).unwrap();
        assert!(out.cost <= 2.0 + 1e-2, "cost {}", out.cost);
        // Never below the realignment lower bound.
        assert!(out.cost >= 2.0 - 1e-9, "cost {}", out.cost);
    }

    #[test]
    fn search_is_deterministic_in_seed() {
        let rho = random_state(
            RandomSpec {
                seed: 23,
                kind: RandomKind::MixedHs { rank: 4 },
            },
            dims22(),
        )
        .unwrap();
        let config = SearchConfig {
            restarts: 4,
            max_iters: 300,
            ..SearchConfig::default()
        };
        let a = upper_bound_search(&rho, &config, None).unwrap();
        let b = upper_bound_search(&rho, &config, None).unwrap();
        assert_eq!(a.cost, b.cost);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn pure_decomposition_of_product_vector_is_single_unit_cost_term() {
        let psi = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let dec = pure_state_decomposition(&psi, dims22()).unwrap();
        assert_eq!(dec.len(), 1);
        assert!((decomposition_cost(&dec) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pure_decomposition_of_bell_costs_two() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        let dec = pure_state_decomposition(&psi, dims22()).unwrap();
        assert_eq!(dec.len(), 4);
        assert!((decomposition_cost(&dec) - 2.0).abs() < 1e-10);
        let rho = pure_density(&psi, dims22()).unwrap();
        let gap = (&reconstruct(&dec) - rho.matrix()).frobenius_norm();
        assert!(gap < 1e-10, "reconstruction gap {gap}");
    }

    #[test]
    fn pure_decomposition_matches_realignment_on_random_3x3() {
        let dims = BipartiteDims::new(3, 3).unwrap();
        for seed in 0..10 {
            let rho = random_state(
                RandomSpec {
                    seed,
                    kind: RandomKind::Pure,
                },
                dims,
            )
            .unwrap();
            // Recover the state vector from the projector's top eigenvector.
            let eig = crate::linalg::hermitian_eig(rho.matrix()).unwrap();
            let psi: Vec<Complex64> = (0..9).map(|i| eig.eigenvectors[(i, 0)]).collect();
            let dec = pure_state_decomposition(&psi, dims).unwrap();
            let (lb, _) = crate::crossnorm::lower_bound_realignment(&rho);
            let cost = decomposition_cost(&dec);
            assert!(
                (cost - lb).abs() < 1e-9,
                "seed {seed}: cost {cost} vs realignment {lb}"
            );
            let gap = (&reconstruct(&dec) - rho.matrix()).frobenius_norm();
            assert!(gap < 1e-9);
        }
    }

    #[test]
    fn pure_decomposition_rejects_unnormalized() {
        let psi = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(
            pure_state_decomposition(&psi, dims22()),
            Err(Error::NotNormalized { .. })
        ));
    }
}
