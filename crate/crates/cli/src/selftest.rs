//! Built-in invariant suite, runnable in any installed copy.
//!
//! Each check exercises one property the rest of the tool depends on, at
//! small dimensions with seeded randomness. The report prints one line per
//! property with timing; any failure flips the exit code.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sepgamma::baselines::ppt_check;
use sepgamma::bipartite::{
    kron, operator_schmidt, partial_trace, partial_transpose, realignment, BipartiteDims, Subsystem,
};
use sepgamma::crossnorm::{
    certify, decomposition_cost, lower_bound_realignment, lower_bound_witness, positivize,
    pure_state_decomposition, reconstruct, upper_bound_search, ElementaryDecomposition,
    SearchConfig, Verdict,
};
use sepgamma::linalg::{hermitian_eig, operator_norm, svd, trace_norm};
use sepgamma::matrix::ComplexMatrix;
use sepgamma::states::{max_entangled, random_state, werner, RandomKind, RandomSpec};
use std::time::Instant;

type Check = (&'static str, fn(&mut ChaCha8Rng) -> Result<(), String>);

const CHECKS: &[Check] = &[
    ("kron_mixed_product_identity", check_kron_mixed_product),
    ("svd_residuals", check_svd_residuals),
    ("hermitian_eig_residuals", check_eig_residuals),
    (
        "trace_norm_multiplicative_on_products",
        check_trace_norm_cross,
    ),
    ("realignment_product_rule", check_realignment_product_rule),
    ("realignment_frobenius_isometry", check_realignment_isometry),
    (
        "realignment_local_unitary_invariance",
        check_realignment_lu_invariance,
    ),
    ("partial_transpose_involution", check_partial_transpose),
    ("partial_trace_product_recovery", check_partial_trace),
    (
        "operator_schmidt_reconstruction",
        check_schmidt_reconstruction,
    ),
    ("decomposition_cost_floor", check_cost_floor),
    ("dual_pairing_bound", check_dual_pairing),
    ("realignment_spectral_bound", check_spectral_bound),
    (
        "mixing_invariance_of_reconstruction",
        check_mixing_invariance,
    ),
    ("bell_anchor", check_bell_anchor),
    ("werner_closed_forms", check_werner_formulas),
    ("pure_state_tightness", check_pure_tightness),
    ("ppt_necessity_for_separable", check_ppt_necessity),
    ("bound_ordering", check_bound_ordering),
    ("positivize_exact_roundtrip", check_positivize_roundtrip),
    ("seeded_certification", check_seeded_certification),
];

/// Runs every check; returns true when all pass. A panicking check is
/// reported as a failure rather than aborting the report.
pub fn run(seed: u64) -> bool {
    let mut all_ok = true;
    println!("self-test (seed {seed})");
    let default_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    for (name, check) in CHECKS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fxhash(name));
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(&mut rng)))
            .unwrap_or_else(|payload| {
                let message = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "opaque panic".into());
                Err(format!("panicked: {message}"))
            });
        let millis = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(()) => println!("PASS {name} ({millis:.1} ms)"),
            Err(reason) => {
                all_ok = false;
                println!("FAIL {name} ({millis:.1} ms): {reason}");
            }
        }
    }
    std::panic::set_hook(default_hook);
    println!(
        "{}",
        if all_ok {
            "self-test: OK"
        } else {
            "self-test: FAILED"
        }
    );
    all_ok
}

/// Tiny deterministic string hash so each check gets its own stream.
fn fxhash(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    })
}

fn fail(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        )
    })
}

fn random_mixed(rng: &mut ChaCha8Rng, dims: BipartiteDims) -> sepgamma::states::DensityOperator {
    random_state(
        RandomSpec {
            seed: rng.random(),
            kind: RandomKind::MixedHs { rank: dims.total() },
        },
        dims,
    )
    .expect("mixed_hs construction always validates")
}

/// A random decomposition of a random density operator: the operator-Schmidt
/// terms pushed through a random invertible mixing matrix.
fn random_density_decomposition(
    rng: &mut ChaCha8Rng,
    dims: BipartiteDims,
) -> (sepgamma::states::DensityOperator, ElementaryDecomposition) {
    let rho = random_mixed(rng, dims);
    let schmidt = operator_schmidt(rho.matrix(), dims, 1e-12).unwrap();
    let terms: Vec<_> = schmidt
        .coefficients
        .iter()
        .zip(schmidt.left_factors.iter().zip(&schmidt.right_factors))
        .map(|(c, (a, b))| (a.scale_re(*c), b.clone()))
        .collect();
    let dec = ElementaryDecomposition::new(dims, terms).unwrap();
    let mixed = apply_random_mixing(rng, &dec, 0.4);
    (rho, mixed)
}

fn apply_random_mixing(
    rng: &mut ChaCha8Rng,
    dec: &ElementaryDecomposition,
    strength: f64,
) -> ElementaryDecomposition {
    let r = dec.len();
    let g = ComplexMatrix::from_fn(r, r, |i, j| {
        let noise = Complex64::new(
            (rng.random::<f64>() * 2.0 - 1.0) * strength,
            (rng.random::<f64>() * 2.0 - 1.0) * strength,
        );
        if i == j {
            Complex64::ONE + noise
        } else {
            noise
        }
    });
    let ginv = match invert(&g) {
        Some(inv) => inv,
        None => return dec.clone(),
    };
    let terms: Vec<_> = (0..r)
        .map(|i| {
            let mut u = ComplexMatrix::zeros(dec.dims().d1(), dec.dims().d1());
            let mut v = ComplexMatrix::zeros(dec.dims().d2(), dec.dims().d2());
            for j in 0..r {
                u = &u + &dec.terms()[j].0.scale(g[(i, j)]);
                v = &v + &dec.terms()[j].1.scale(ginv[(j, i)]);
            }
            (u, v)
        })
        .collect();
    ElementaryDecomposition::new(dec.dims(), terms).unwrap()
}

/// Gauss-Jordan inverse; None when a pivot collapses.
fn invert(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| a[(x, col)].norm().partial_cmp(&a[(y, col)].norm()).unwrap())?;
        if a[(pivot_row, col)].norm() < 1e-12 {
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

fn check_kron_mixed_product(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..5 {
        let (a, b) = (random_matrix(rng, 2, 2), random_matrix(rng, 3, 3));
        let (c, d) = (random_matrix(rng, 2, 2), random_matrix(rng, 3, 3));
        let gap =
            (&(&kron(&a, &b) * &kron(&c, &d)) - &kron(&(&a * &c), &(&b * &d))).max_abs_entry();
        fail(gap < 1e-12, || format!("mixed-product gap {gap}"))?;
    }
    Ok(())
}

fn check_svd_residuals(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for (rows, cols) in [(5, 3), (4, 4), (2, 6)] {
        let m = random_matrix(rng, rows, cols);
        let s = svd(&m);
        let k = s.singular_values.len();
        let scaled = ComplexMatrix::from_fn(rows, k, |i, j| s.u[(i, j)] * s.singular_values[j]);
        let residual = (&(&scaled * &s.v.dagger()) - &m).frobenius_norm();
        fail(residual < 1e-9, || {
            format!("{rows}x{cols} residual {residual}")
        })?;
    }
    Ok(())
}

fn check_eig_residuals(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let m = random_matrix(rng, 6, 6).hermitian_part();
    let e = hermitian_eig(&m).map_err(|err| err.to_string())?;
    let lam = ComplexMatrix::diag(&e.eigenvalues);
    let residual = (&(&(&e.eigenvectors * &lam) * &e.eigenvectors.dagger()) - &m).frobenius_norm();
    fail(residual < 1e-9, || {
        format!("reconstruction residual {residual}")
    })
}

fn check_trace_norm_cross(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..5 {
        let u = random_matrix(rng, 2, 2);
        let v = random_matrix(rng, 3, 3);
        let lhs = trace_norm(&kron(&u, &v)).unwrap();
        let rhs = trace_norm(&u).unwrap() * trace_norm(&v).unwrap();
        fail((lhs - rhs).abs() < 1e-10, || {
            format!("|u(x)v|_1 = {lhs} vs {rhs}")
        })?;
    }
    Ok(())
}

fn check_realignment_product_rule(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 3).unwrap();
    let a = random_matrix(rng, 2, 2);
    let b = random_matrix(rng, 3, 3);
    let r = realignment(&kron(&a, &b), dims).map_err(|e| e.to_string())?;
    let va = a.vec_row_major();
    let vb = b.vec_row_major();
    let oracle = ComplexMatrix::from_fn(4, 9, |x, y| va[x] * vb[y]);
    let gap = (&r - &oracle).max_abs_entry();
    fail(gap < 1e-12, || {
        format!("R(a(x)b) differs from vec(a)vec(b)^T by {gap}")
    })
}

fn check_realignment_isometry(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(3, 2).unwrap();
    let m = random_matrix(rng, 6, 6);
    let r = realignment(&m, dims).map_err(|e| e.to_string())?;
    let gap = (r.frobenius_norm() - m.frobenius_norm()).abs();
    fail(gap < 1e-12, || format!("Frobenius norm changed by {gap}"))
}

fn check_realignment_lu_invariance(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 2).unwrap();
    let rho = random_mixed(rng, dims);
    let (before, _) = lower_bound_realignment(&rho);
    let u = haar_unitary(rng, 2);
    let v = haar_unitary(rng, 2);
    let uv = kron(&u, &v);
    let rotated = &(&uv * rho.matrix()) * &uv.dagger();
    let rho2 =
        sepgamma::states::DensityOperator::from_matrix(rotated, dims).map_err(|e| e.to_string())?;
    let (after, _) = lower_bound_realignment(&rho2);
    fail((before - after).abs() < 1e-9, || {
        format!("bound moved under local unitaries: {before} -> {after}")
    })
}

fn haar_unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    // Polar factor of a Gaussian matrix.
    let g = random_matrix(rng, d, d);
    let s = svd(&g);
    &s.u * &s.v.dagger()
}

fn check_partial_transpose(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 3).unwrap();
    let rho = random_mixed(rng, dims);
    let pt = partial_transpose(rho.matrix(), dims).map_err(|e| e.to_string())?;
    let back = partial_transpose(&pt, dims).map_err(|e| e.to_string())?;
    fail(&back == rho.matrix(), || {
        "double application is not the identity".into()
    })?;
    let trace_gap = (pt.trace() - rho.matrix().trace()).norm();
    fail(trace_gap < 1e-12, || {
        format!("trace changed by {trace_gap}")
    })?;
    fail(pt.hermiticity_deviation() < 1e-12, || {
        "Hermiticity lost".into()
    })
}

fn check_partial_trace(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let r1 = random_density_factor(rng, 2);
    let r2 = random_density_factor(rng, 3);
    let dims = BipartiteDims::new(2, 3).unwrap();
    let prod = kron(&r1, &r2);
    let back1 = partial_trace(&prod, dims, Subsystem::Second).map_err(|e| e.to_string())?;
    let back2 = partial_trace(&prod, dims, Subsystem::First).map_err(|e| e.to_string())?;
    let gap = (&back1 - &r1)
        .max_abs_entry()
        .max((&back2 - &r2).max_abs_entry());
    fail(gap < 1e-12, || {
        format!("product factors not recovered, gap {gap}")
    })
}

fn random_density_factor(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let g = random_matrix(rng, d, d);
    let gg = &g * &g.dagger();
    gg.scale_re(1.0 / gg.trace().re)
}

fn check_schmidt_reconstruction(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 3).unwrap();
    let rho = random_mixed(rng, dims);
    let schmidt = operator_schmidt(rho.matrix(), dims, 1e-12).map_err(|e| e.to_string())?;
    let gap = (&schmidt.reconstruct() - rho.matrix()).frobenius_norm();
    fail(gap < 1e-10, || format!("Schmidt reconstruction gap {gap}"))
}

fn check_cost_floor(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 2).unwrap();
    for _ in 0..20 {
        let (_, dec) = random_density_decomposition(rng, dims);
        let cost = decomposition_cost(&dec);
        fail(cost >= 1.0 - 1e-9, || {
            format!("cost {cost} fell under the floor")
        })?;
    }
    Ok(())
}

fn check_dual_pairing(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 2).unwrap();
    for _ in 0..10 {
        let (_, dec) = random_density_decomposition(rng, dims);
        let cost = decomposition_cost(&dec);
        let t = reconstruct(&dec);
        let a = contraction(rng, 2);
        let b = contraction(rng, 2);
        let value = (&t * &kron(&a, &b)).trace().norm();
        fail(value <= cost + 1e-9, || {
            format!("pairing {value} exceeded the cost {cost}")
        })?;
    }
    Ok(())
}

fn contraction(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let m = random_matrix(rng, d, d);
    m.scale_re(1.0 / operator_norm(&m).max(1e-12))
}

fn check_spectral_bound(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 2).unwrap();
    for _ in 0..10 {
        let (_, dec) = random_density_decomposition(rng, dims);
        let cost = decomposition_cost(&dec);
        let r = realignment(&reconstruct(&dec), dims).map_err(|e| e.to_string())?;
        let nuclear: f64 = svd(&r).singular_values.iter().sum();
        fail(cost >= nuclear - 1e-9, || {
            format!("cost {cost} under realignment nuclear norm {nuclear}")
        })?;
    }
    Ok(())
}

fn check_mixing_invariance(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 2).unwrap();
    let (rho, dec) = random_density_decomposition(rng, dims);
    let gap = trace_norm(&(&reconstruct(&dec) - rho.matrix())).unwrap();
    fail(gap < 1e-9, || {
        format!("mixed decomposition drifted by {gap}")
    })
}

fn check_bell_anchor(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let bell = max_entangled(2).unwrap();
    let (lb, _) = lower_bound_realignment(&bell);
    fail((lb - 2.0).abs() < 1e-9, || {
        format!("realignment bound {lb}")
    })?;

    let config = SearchConfig {
        seed: rng.random(),
        ..SearchConfig::default()
    };
    let wit = lower_bound_witness(&bell, &config);
    fail(wit.value >= 2.0 - 1e-6, || {
        format!("witness bound {}", wit.value)
    })?;

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [
        Complex64::new(h, 0.0),
        Complex64::ZERO,
        Complex64::ZERO,
        Complex64::new(h, 0.0),
    ];
    let dims = BipartiteDims::new(2, 2).unwrap();
    let pure_cost = decomposition_cost(&pure_state_decomposition(&psi, dims).unwrap());
    fail((pure_cost - 2.0).abs() < 1e-10, || {
        format!("pure-state cost {pure_cost}")
    })?;

    let search = upper_bound_search(&bell, &config, None).map_err(|e| e.to_string())?;
    fail(search.cost <= 2.0 + 1e-2, || {
        format!("search cost {}", search.cost)
    })?;
    fail(search.cost >= 2.0 - 1e-9, || {
        format!("search cost {} under the lower bound", search.cost)
    })
}

fn check_werner_formulas(_rng: &mut ChaCha8Rng) -> Result<(), String> {
    for p in [0.0, 0.2, 1.0 / 3.0, 0.6, 1.0] {
        let rho = werner(p).unwrap();
        let (lb, _) = lower_bound_realignment(&rho);
        let expected = (0.5 + 1.5 * p).max(1.0);
        fail((lb - expected).abs() < 1e-9, || {
            format!("realignment at p={p}: {lb} vs {expected}")
        })?;
        let report = ppt_check(&rho, 1e-9);
        let expected_min = (1.0 - 3.0 * p) / 4.0;
        fail((report.min_eigenvalue - expected_min).abs() < 1e-9, || {
            format!(
                "ppt minimum at p={p}: {} vs {expected_min}",
                report.min_eigenvalue
            )
        })?;
    }
    Ok(())
}

fn check_pure_tightness(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for (d1, d2) in [(2, 2), (3, 3), (2, 3)] {
        let dims = BipartiteDims::new(d1, d2).unwrap();
        let rho = random_state(
            RandomSpec {
                seed: rng.random(),
                kind: RandomKind::Pure,
            },
            dims,
        )
        .unwrap();
        let eig = hermitian_eig(rho.matrix()).unwrap();
        let psi: Vec<Complex64> = (0..dims.total())
            .map(|i| eig.eigenvectors[(i, 0)])
            .collect();
        let (lb, _) = lower_bound_realignment(&rho);
        let gamma = sepgamma::baselines::pure_gamma(&psi, dims).map_err(|e| e.to_string())?;
        let cost = decomposition_cost(&pure_state_decomposition(&psi, dims).unwrap());
        fail(
            (lb - gamma).abs() < 1e-9 && (cost - gamma).abs() < 1e-9,
            || format!("{d1}x{d2}: realignment {lb}, schmidt {gamma}, decomposition {cost}"),
        )?;
    }
    Ok(())
}

fn check_ppt_necessity(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 2).unwrap();
    for _ in 0..10 {
        let rho = random_state(
            RandomSpec {
                seed: rng.random(),
                kind: RandomKind::Separable { terms: 4 },
            },
            dims,
        )
        .unwrap();
        let report = ppt_check(&rho, 1e-9);
        fail(report.is_ppt, || {
            format!(
                "separable state with PT eigenvalue {}",
                report.min_eigenvalue
            )
        })?;
    }
    Ok(())
}

fn check_bound_ordering(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 2).unwrap();
    let config = SearchConfig {
        restarts: 4,
        max_iters: 400,
        seed: rng.random(),
        ..SearchConfig::default()
    };
    for _ in 0..5 {
        let rho = random_mixed(rng, dims);
        let cert = certify(&rho, &config, None).map_err(|e| e.to_string())?;
        if let Some(upper) = cert.bounds.upper {
            fail(cert.bounds.lower <= upper + 1e-6, || {
                format!("lower {} above upper {upper}", cert.bounds.lower)
            })?;
        }
    }
    Ok(())
}

fn check_positivize_roundtrip(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 2).unwrap();
    let rho = random_state(
        RandomSpec {
            seed: rng.random(),
            kind: RandomKind::Separable { terms: 4 },
        },
        dims,
    )
    .unwrap();
    let dec = ElementaryDecomposition::from_separable(rho.provenance().unwrap());
    let (_, error) = positivize(&dec, &rho, &SearchConfig::default()).map_err(|e| e.to_string())?;
    fail(error < 1e-12, || {
        format!("exact witness reconstructed with error {error}")
    })
}

fn check_seeded_certification(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dims = BipartiteDims::new(2, 2).unwrap();
    let rho = random_state(
        RandomSpec {
            seed: rng.random(),
            kind: RandomKind::Separable { terms: 3 },
        },
        dims,
    )
    .unwrap();
    let seed = ElementaryDecomposition::from_separable(rho.provenance().unwrap());
    let cert = certify(&rho, &SearchConfig::default(), Some(&seed)).map_err(|e| e.to_string())?;
    fail(cert.verdict == Verdict::Separable, || {
        format!("seeded certification returned {:?}", cert.verdict)
    })
}
