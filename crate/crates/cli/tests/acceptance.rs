//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the numbers that back it. Run with
//! `cargo test -p sepgamma-cli --test acceptance -- --nocapture`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sepgamma::baselines::{ppt_check, pure_gamma};
use sepgamma::bipartite::{kron, operator_schmidt, BipartiteDims};
use sepgamma::crossnorm::{
    certify, decomposition_cost, lower_bound_realignment, lower_bound_witness,
    pure_state_decomposition, reconstruct, upper_bound_search, ElementaryDecomposition,
    SearchConfig, Verdict,
};
use sepgamma::linalg::{hermitian_eig, svd, trace_norm};
use sepgamma::matrix::ComplexMatrix;
use sepgamma::states::{max_entangled, random_state, DensityOperator, RandomKind, RandomSpec};
use std::path::PathBuf;
use std::process::Command;

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_sepgamma"))
}

fn dims(d1: usize, d2: usize) -> BipartiteDims {
    BipartiteDims::new(d1, d2).unwrap()
}

fn mixed(seed: u64, d: usize) -> DensityOperator {
    random_state(
        RandomSpec {
            seed,
            kind: RandomKind::MixedHs { rank: d * d },
        },
        dims(d, d),
    )
    .unwrap()
}

fn separable(seed: u64, terms: usize, d: usize) -> DensityOperator {
    random_state(
        RandomSpec {
            seed,
            kind: RandomKind::Separable { terms },
        },
        dims(d, d),
    )
    .unwrap()
}

/// Random decomposition of a random density operator: operator-Schmidt
/// terms pushed through a random invertible mixing matrix (reconstruction
/// is preserved exactly by the parameterization).
fn random_density_decomposition(rng: &mut ChaCha8Rng, d: usize) -> ElementaryDecomposition {
    let rho = mixed(rng.random(), d);
    let schmidt = operator_schmidt(rho.matrix(), rho.dims(), 1e-12).unwrap();
    let base: Vec<_> = schmidt
        .coefficients
        .iter()
        .zip(schmidt.left_factors.iter().zip(&schmidt.right_factors))
        .map(|(c, (a, b))| (a.scale_re(*c), b.clone()))
        .collect();
    let r = base.len();
    // G = I + 0.3 X with Gaussian X; retry the rare near-singular draw.
    loop {
        let g = ComplexMatrix::from_fn(r, r, |i, j| {
            let noise = Complex64::new(
                (rng.random::<f64>() - 0.5) * 0.6,
                (rng.random::<f64>() - 0.5) * 0.6,
            );
            if i == j {
                Complex64::ONE + noise
            } else {
                noise
            }
        });
        if let Some(ginv) = invert(&g) {
            let terms: Vec<_> = (0..r)
                .map(|i| {
                    let mut u = ComplexMatrix::zeros(d, d);
                    let mut v = ComplexMatrix::zeros(d, d);
                    for j in 0..r {
                        u = &u + &base[j].0.scale(g[(i, j)]);
                        v = &v + &base[j].1.scale(ginv[(j, i)]);
                    }
                    (u, v)
                })
                .collect();
            return ElementaryDecomposition::new(dims(d, d), terms).unwrap();
        }
    }
}

fn invert(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[(x, col)].norm().partial_cmp(&a[(y, col)].norm()).unwrap())?;
        if a[(pivot, col)].norm() < 1e-10 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                let t = a[(col, j)];
                a[(col, j)] = a[(pivot, j)];
                a[(pivot, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(pivot, j)];
                inv[(pivot, j)] = t;
            }
        }
        let p = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[(row, col)];
            if f == Complex64::ZERO {
                continue;
            }
            for j in 0..n {
                let aj = a[(col, j)];
                let ij = inv[(col, j)];
                a[(row, j)] -= f * aj;
                inv[(row, j)] -= f * ij;
            }
        }
    }
    Some(inv)
}

#[test]
fn criterion_01_bound_ordering() {
    let config = SearchConfig::default();
    let mut with_upper = 0usize;
    let mut worst_gap = f64::NEG_INFINITY;
    for seed in 0..1000u64 {
        let rho = mixed(seed, 2);
        let cert = certify(&rho, &config, None).unwrap();
        if let Some(upper) = cert.bounds.upper {
            with_upper += 1;
            worst_gap = worst_gap.max(cert.bounds.lower - upper);
            assert!(
                cert.bounds.lower <= upper + 1e-6,
                "2x2 seed {seed}: lower {} > upper {upper}",
                cert.bounds.lower
            );
        }
    }
    for seed in 0..200u64 {
        let rho = mixed(seed, 3);
        let cert = certify(&rho, &config, None).unwrap();
        if let Some(upper) = cert.bounds.upper {
            with_upper += 1;
            worst_gap = worst_gap.max(cert.bounds.lower - upper);
            assert!(
                cert.bounds.lower <= upper + 1e-6,
                "3x3 seed {seed}: lower {} > upper {upper}",
                cert.bounds.lower
            );
        }
    }
    println!(
        "criterion 01 PASS: bound ordering held in all {with_upper} certificates with an upper bound (worst lower-upper gap {worst_gap:.3e})"
    );
}

#[test]
fn criterion_02_cost_floor_and_lower_clamp() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut min_cost = f64::INFINITY;
    for i in 0..1000 {
        let d = if i % 5 == 0 { 3 } else { 2 };
        let dec = random_density_decomposition(&mut rng, d);
        let cost = decomposition_cost(&dec);
        assert!(
            cost >= 1.0 - 1e-9,
            "decomposition {i}: cost {cost} under the floor"
        );
        min_cost = min_cost.min(cost);
    }
    let config = SearchConfig::default();
    for seed in 0..50u64 {
        let rho = mixed(seed, 2);
        let (lb, _) = lower_bound_realignment(&rho);
        assert!(lb >= 1.0, "realignment bound {lb} below 1");
        let wit = lower_bound_witness(&rho, &config);
        assert!(wit.value >= 1.0, "witness bound {} below 1", wit.value);
    }
    println!(
        "criterion 02 PASS: 1000 random decomposition costs stayed >= 1 - 1e-9 (min {min_cost:.12}); lower bounds never reported below 1"
    );
}

#[test]
fn criterion_03_bell_anchor() {
    let bell = max_entangled(2).unwrap();
    let config = SearchConfig::default();

    let (lb, _) = lower_bound_realignment(&bell);
    assert!((lb - 2.0).abs() <= 1e-9, "realignment bound {lb}");

    let wit = lower_bound_witness(&bell, &config);
    assert!(wit.value >= 2.0 - 1e-6, "witness bound {}", wit.value);

    let search = upper_bound_search(&bell, &config, None).unwrap();
    assert!(search.cost <= 2.0 + 1e-2, "search cost {}", search.cost);
    assert!(
        search.cost >= 2.0 - 1e-9,
        "search cost {} under gamma",
        search.cost
    );

    let cert = certify(&bell, &config, None).unwrap();
    assert_eq!(cert.verdict, Verdict::Entangled);

    println!(
        "criterion 03 PASS: Bell anchors at realignment {lb:.12}, witness {:.12}, search {:.12}, verdict Entangled",
        wit.value, search.cost
    );
}

#[test]
fn criterion_04_pure_state_tightness() {
    let mut worst = 0.0f64;
    for d in [2usize, 3, 4] {
        for seed in 0..200u64 {
            let rho = random_state(
                RandomSpec {
                    seed,
                    kind: RandomKind::Pure,
                },
                dims(d, d),
            )
            .unwrap();
            let eig = hermitian_eig(rho.matrix()).unwrap();
            let psi: Vec<Complex64> = (0..d * d).map(|i| eig.eigenvectors[(i, 0)]).collect();
            let dec = pure_state_decomposition(&psi, dims(d, d)).unwrap();
            let cost = decomposition_cost(&dec);
            let (lb, _) = lower_bound_realignment(&rho);
            let gamma = pure_gamma(&psi, dims(d, d)).unwrap();
            let spread = (cost - lb)
                .abs()
                .max((cost - gamma).abs())
                .max((lb - gamma).abs());
            assert!(
                spread <= 1e-9,
                "d={d} seed {seed}: cost {cost}, realignment {lb}, schmidt form {gamma}"
            );
            worst = worst.max(spread);
            let err = trace_norm(&(&reconstruct(&dec) - rho.matrix())).unwrap();
            assert!(err <= 1e-9, "d={d} seed {seed}: reconstruction error {err}");
        }
    }
    println!(
        "criterion 04 PASS: 600 pure states, three cross-norm routes agree pairwise within 1e-9 (worst spread {worst:.3e})"
    );
}

#[test]
fn criterion_05_werner_sweep() {
    let out = tempfile("werner_sweep.csv");
    let status = Command::new(bin())
        .args([
            "sweep",
            "werner",
            "--param-range",
            "0:1",
            "--steps",
            "21",
            "--seed",
            "11",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "param,gamma_lower,gamma_upper,measure_lo,measure_hi,ppt_min_eig,verdict"
    );
    let mut rows = 0;
    let mut last_measure_lo = f64::NEG_INFINITY;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7, "row {line}");
        let p: f64 = fields[0].parse().unwrap();
        let gamma_lower: f64 = fields[1].parse().unwrap();
        let measure_lo: f64 = fields[3].parse().unwrap();
        let ppt_min: f64 = fields[5].parse().unwrap();
        let verdict = fields[6];

        if p <= 1.0 / 3.0 {
            assert!(
                (gamma_lower - 1.0).abs() <= 1e-9,
                "p={p}: gamma_lower {gamma_lower} != 1"
            );
            assert_ne!(verdict, "Entangled", "p={p} certified Entangled");
        } else {
            let expected = (1.0 + 3.0 * p) / 2.0;
            assert!(
                (gamma_lower - expected).abs() <= 1e-9,
                "p={p}: gamma_lower {gamma_lower} vs {expected}"
            );
        }
        if p >= 0.4 {
            assert_eq!(verdict, "Entangled", "p={p} not certified Entangled");
        }
        let expected_min = (1.0 - 3.0 * p) / 4.0;
        assert!(
            (ppt_min - expected_min).abs() <= 1e-9,
            "p={p}: ppt_min_eig {ppt_min} vs {expected_min}"
        );
        assert!(
            measure_lo >= last_measure_lo - 1e-12,
            "p={p}: measure_lo decreased ({last_measure_lo} -> {measure_lo})"
        );
        last_measure_lo = measure_lo;
        rows += 1;
    }
    assert_eq!(rows, 21);
    println!("criterion 05 PASS: 21-point Werner sweep matched both closed forms and all verdict constraints");
}

#[test]
fn criterion_06_seeded_separability() {
    let config = SearchConfig::default();
    let mut worst_err = 0.0f64;
    let mut count = 0;
    for d in [2usize, 3] {
        for seed in 0..50u64 {
            let terms = 1 + (seed as usize % 6);
            let rho = separable(seed, terms, d);
            let seed_dec = ElementaryDecomposition::from_separable(rho.provenance().unwrap());
            let cert = certify(&rho, &config, Some(&seed_dec)).unwrap();
            assert_eq!(
                cert.verdict,
                Verdict::Separable,
                "d={d} seed {seed}: verdict {:?}",
                cert.verdict
            );
            let evidence = match cert.evidence {
                Some(sepgamma::crossnorm::Evidence::Separable(dec)) => dec,
                other => panic!("d={d} seed {seed}: evidence {other:?}"),
            };
            // Re-validating from parts exercises every invariant of the type.
            sepgamma::states::SeparableDecomposition::new(
                evidence.dims(),
                evidence.terms().to_vec(),
            )
            .expect("evidence must satisfy the separable-decomposition invariants");
            let err = cert.reconstruction_error.unwrap();
            assert!(err <= 1e-8, "d={d} seed {seed}: reconstruction error {err}");
            worst_err = worst_err.max(err);
            count += 1;
        }
    }
    println!(
        "criterion 06 PASS: {count} seeded mixtures certified Separable with valid evidence (worst reconstruction error {worst_err:.3e})"
    );
}

#[test]
fn criterion_07_soundness_against_ppt_oracle() {
    let config = SearchConfig::default();
    let mut npt_checked = 0;
    let mut seed = 0u64;
    while npt_checked < 500 {
        let rho = mixed(seed, 2);
        seed += 1;
        let report = ppt_check(&rho, 1e-9);
        if report.is_ppt {
            continue;
        }
        let cert = certify(&rho, &config, None).unwrap();
        assert_ne!(
            cert.verdict,
            Verdict::Separable,
            "NPT state (seed {}, min PT eigenvalue {}) certified Separable",
            seed - 1,
            report.min_eigenvalue
        );
        npt_checked += 1;
    }

    let mut entangled_hits = 0;
    for seed in 0..500u64 {
        let rho = separable(seed, 1 + (seed as usize % 6), 2);
        let cert = certify(&rho, &config, None).unwrap();
        if cert.verdict == Verdict::Entangled {
            entangled_hits += 1;
        }
    }
    assert_eq!(
        entangled_hits, 0,
        "{entangled_hits} separable states certified Entangled"
    );
    println!(
        "criterion 07 PASS: 0 Separable verdicts over 500 NPT states; 0 Entangled verdicts over 500 separable-by-construction states"
    );
}

#[test]
fn criterion_08_local_unitary_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x10c4);
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let rho = mixed(seed, 2);
        let (before, _) = lower_bound_realignment(&rho);
        let u = haar_unitary(&mut rng, 2);
        let v = haar_unitary(&mut rng, 2);
        let uv = kron(&u, &v);
        let rotated = &(&uv * rho.matrix()) * &uv.dagger();
        let rho2 = DensityOperator::from_matrix(rotated, rho.dims()).unwrap();
        let (after, _) = lower_bound_realignment(&rho2);
        assert!(
            (before - after).abs() <= 1e-9,
            "seed {seed}: bound moved {before} -> {after}"
        );
        worst = worst.max((before - after).abs());
    }
    println!(
        "criterion 08 PASS: realignment bound invariant under 100 random local unitaries (worst drift {worst:.3e})"
    );
}

fn haar_unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let s = svd(&g);
    &s.u * &s.v.dagger()
}

#[test]
fn criterion_09_determinism() {
    let dir = tempdir("determinism");
    let state = dir.join("state.json");
    let status = Command::new(bin())
        .args(["gen", "werner", "--p", "0.2", "--out"])
        .arg(&state)
        .status()
        .unwrap();
    assert!(status.success());

    let certify_to = |path: &std::path::Path, threads: Option<&str>| {
        let mut cmd = Command::new(bin());
        cmd.args(["certify", "--in"])
            .arg(&state)
            .args(["--seed", "42", "--out"])
            .arg(path);
        match threads {
            Some(n) => cmd.env("SEPGAMMA_THREADS", n),
            None => cmd.env_remove("SEPGAMMA_THREADS"),
        };
        let status = cmd.status().unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };

    let a = certify_to(&dir.join("a.json"), None);
    let b = certify_to(&dir.join("b.json"), None);
    assert_eq!(a, b, "identical runs differ");
    let t1 = certify_to(&dir.join("t1.json"), Some("1"));
    let t4 = certify_to(&dir.join("t4.json"), Some("4"));
    assert_eq!(t1, t4, "results depend on SEPGAMMA_THREADS");
    assert_eq!(a, t1, "threaded runs differ from the default");

    // werner(0.2) sits below the realignment threshold, so the certificate
    // must never claim entanglement.
    let parsed: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_ne!(parsed["verdict"], "Entangled");
    assert_eq!(parsed["gamma_lower"].as_f64().unwrap(), 1.0);

    println!(
        "criterion 09 PASS: byte-identical certificates across repeated runs and SEPGAMMA_THREADS in {{1, 4}}"
    );
}

#[test]
fn criterion_10_blind_search_progress() {
    let config = SearchConfig::default();
    let mut reached = 0;
    for seed in 0..50u64 {
        let terms = 1 + (seed as usize % 6);
        let rho = separable(seed + 1000, terms, 2);
        let schmidt = operator_schmidt(rho.matrix(), rho.dims(), 1e-12).unwrap();
        let start_cost: f64 = schmidt
            .coefficients
            .iter()
            .zip(schmidt.left_factors.iter().zip(&schmidt.right_factors))
            .map(|(c, (a, b))| c * trace_norm(a).unwrap() * trace_norm(b).unwrap())
            .sum();
        let cert = certify(&rho, &config, None).unwrap();
        let upper = cert.bounds.upper.expect("separable path always searches");
        assert!(
            upper <= start_cost + 1e-9,
            "seed {seed}: final {upper} above start {start_cost}"
        );
        if upper <= 1.1 {
            reached += 1;
        }
        assert!(
            cert.verdict == Verdict::Separable || cert.verdict == Verdict::Undecided,
            "seed {seed}: wrong verdict {:?}",
            cert.verdict
        );
    }
    assert!(
        reached >= 40,
        "only {reached}/50 blind searches reached cost <= 1.1"
    );
    println!(
        "criterion 10 PASS: blind search never exceeded its start and reached cost <= 1.1 in {reached}/50 cases (bar: 40)"
    );
}

fn tempdir(tag: &str) -> PathBuf {
    let dir =
        std::env::temp_dir().join(format!("sepgamma-acceptance-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn tempfile(name: &str) -> PathBuf {
    tempdir("files").join(name)
}
