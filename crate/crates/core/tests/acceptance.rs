//! Acceptance run: one line per criterion, exit status non-zero on any
//! failure not listed in `KNOWN_FAILURES`.

mod common;

use std::time::{Duration, Instant};

use common::*;
use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortexcert::clifford::{exact_real, Exact, ExactPolynomial, MajoranaIndex, Polynomial};
use vortexcert::fock::{generator_matrix, to_matrix, LinearOperator, PauliSum, StateVector};
use vortexcert::lattice::{build_lattice, default_plane, reflection_data, Boundary, IslandLattice};
use vortexcert::model::{build_hamiltonian, vortex_operator};
use vortexcert::pipeline::{certify, solve, sweep, LatticeSpec, RunParams, SweepParams, Tolerances};
use vortexcert::spectral::{dense_spectrum, ground_space, thermal_expectation, GibbsState};
use vortexcert::verify::{
    check_conservation, check_ground_positivity, check_topological_order, rp_report, vortex_map, ParityFilter,
    RPSampleSpec, VortexClass,
};

/// Sub-checks expected to fail, with the reason printed next to them.
const KNOWN_FAILURES: &[(&str, &str)] = &[(
    "8b",
    "the lowest W = -1 level sits ~6.2e-5 above the ground cluster, so beta = 50 is far from the ground-state limit",
)];

const LAMBDAS: [f64; 3] = [0.0, 0.1, 0.5];

/// Reference ground energy of the 4x4 torus at lambda = 0.1 from an
/// independent sparse diagonalization (scipy eigsh).
const TORUS_E0: f64 = -8.041292393584671;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

struct Runner {
    outcomes: Vec<Outcome>,
}

impl Runner {
    fn record(&mut self, id: &'static str, title: &'static str, pass: bool, detail: String) {
        let known = KNOWN_FAILURES.iter().find(|k| k.0 == id).map(|k| k.1);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL (known)",
            (false, None) => "FAIL",
        };
        println!("criterion {id:<3} {title:<40} {tag:<13} {detail}");
        if let (false, Some(reason)) = (pass, known) {
            println!("             reason: {reason}");
        }
        self.outcomes.push(Outcome {
            id,
            title,
            pass,
            detail,
        });
    }

    fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
        let t = Instant::now();
        let out = f();
        (out, t.elapsed())
    }
}

fn diamond() -> IslandLattice {
    build_lattice(3, 3, Boundary::Open).unwrap()
}

fn torus() -> IslandLattice {
    build_lattice(4, 4, Boundary::Periodic).unwrap()
}

fn exact(lambda: f64) -> Exact {
    exact_real(lambda).unwrap()
}

fn random_polynomial(rng: &mut ChaCha8Rng, majoranas: usize) -> (Polynomial, Vec<(Vec<usize>, Complex64)>) {
    let mut raw = Vec::new();
    let mut p = Polynomial::zero();
    for _ in 0..rng.random_range(1..=4) {
        let len = rng.random_range(0..=5);
        let ix: Vec<usize> = (0..len).map(|_| rng.random_range(0..majoranas)).collect();
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let idx: Vec<MajoranaIndex> = ix.iter().map(|&i| MajoranaIndex(i as u32)).collect();
        p = &p + &Polynomial::monomial(&idx, z);
        raw.push((ix, z));
    }
    (p, raw)
}

fn oracle_matrix(raw: &[(Vec<usize>, Complex64)], modes: usize) -> M {
    raw.iter().fold(M::zeros(1 << modes, 1 << modes), |acc, (ix, z)| {
        acc + product(ix, modes) * *z
    })
}

fn criterion_1(run: &mut Runner) {
    let ((err, oracle_err, anti_ok), t) = Runner::timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut err, mut oracle_err) = (0.0f64, 0.0f64);
        for _ in 0..200 {
            let (p, rp) = random_polynomial(&mut rng, 4);
            let (q, rq) = random_polynomial(&mut rng, 4);
            let mp = to_matrix(&p, 2).unwrap().to_dense().unwrap();
            let mq = to_matrix(&q, 2).unwrap().to_dense().unwrap();
            let mpq = to_matrix(&(&p * &q), 2).unwrap().to_dense().unwrap();
            err = err.max(max_abs_diff(&mpq, &(&mp * &mq)));
            oracle_err = oracle_err.max(max_abs_diff(&mpq, &(oracle_matrix(&rp, 2) * oracle_matrix(&rq, 2))));
        }
        let mut anti_ok = true;
        for modes in 1..=2 {
            let n = 2 * modes;
            for i in 0..n {
                for j in 0..n {
                    let ci = generator_matrix(MajoranaIndex(i as u32), modes)
                        .unwrap()
                        .to_dense()
                        .unwrap();
                    let cj = generator_matrix(MajoranaIndex(j as u32), modes)
                        .unwrap()
                        .to_dense()
                        .unwrap();
                    let dim = 1 << modes;
                    let expected = if i == j {
                        M::identity(dim, dim) * c(2.0, 0.0)
                    } else {
                        M::zeros(dim, dim)
                    };
                    anti_ok &= &ci * &cj + &cj * &ci == expected;
                    let gi = ExactPolynomial::generator(MajoranaIndex(i as u32));
                    let gj = ExactPolynomial::generator(MajoranaIndex(j as u32));
                    let sym = &(&gi * &gj) + &(&gj * &gi);
                    let sym_expected = if i == j {
                        ExactPolynomial::scalar(exact(2.0))
                    } else {
                        ExactPolynomial::zero()
                    };
                    anti_ok &= sym == sym_expected;
                }
            }
        }
        (err, oracle_err, anti_ok)
    });
    run.record(
        "1",
        "algebra faithfulness",
        err <= 1e-12 && oracle_err <= 1e-12 && anti_ok && t < Duration::from_secs(5),
        format!("max err {err:.1e}, vs Kronecker {oracle_err:.1e}, anticommutators exact {anti_ok}, {t:.2?}"),
    );
}

fn criterion_2(run: &mut Runner) {
    let (cases, t) = Runner::timed(|| {
        let mut ok = 0;
        for lat in [diamond(), torus()] {
            let r = reflection_data(&lat, default_plane(&lat)).unwrap();
            for lambda in LAMBDAS {
                let h = build_hamiltonian::<Exact>(&lat, exact(lambda));
                ok += (h.reflect(&r.map).unwrap() == h) as usize;
            }
        }
        ok
    });
    run.record(
        "2",
        "reflection symmetry",
        cases == 6 && t < Duration::from_secs(1),
        format!("{cases}/6 exact θ(H) = H, {t:.2?}"),
    );
}

fn criterion_3(run: &mut Runner) {
    let ((ok, total), t) = Runner::timed(|| {
        let (mut ok, mut total) = (0, 0);
        for lat in [diamond(), torus()] {
            for lambda in LAMBDAS {
                total += 1;
                ok += check_conservation(&lat, lambda).unwrap().passed() as usize;
            }
        }
        (ok, total)
    });
    run.record(
        "3",
        "conservation [W, H] = 0",
        ok == total && t < Duration::from_secs(1),
        format!("{ok}/{total} lattice x lambda cases, all octagons exact, {t:.2?}"),
    );
}

fn criterion_4(run: &mut Runner) {
    let ((squares, eig_err, bisected, factor_ok, oracle_ok), t) = Runner::timed(|| {
        let (mut squares, mut bisected, mut factor_ok) = (0usize, 0usize, true);
        let mut eig_err = 0.0f64;
        let mut oracle_ok = false;
        for lat in [diamond(), torus()] {
            let r = reflection_data(&lat, default_plane(&lat)).unwrap();
            for o in lat.octagons() {
                let v = vortex_operator::<Exact>(&lat, o, Some(&r)).unwrap();
                squares += (&v.w * &v.w == ExactPolynomial::identity()) as usize;
                if let Some(a) = &v.a_factor {
                    bisected += 1;
                    factor_ok &= a.multiply(&a.reflect(&r.map).unwrap()) == v.w;
                }
                let wf = v.w.to_float();
                if lat.num_modes() <= 8 {
                    let s = dense_spectrum(&to_matrix(&wf, lat.num_modes()).unwrap()).unwrap();
                    for e in s.eigenvalues {
                        eig_err = eig_err.max((e.abs() - 1.0).abs());
                    }
                    if let Some(sites) = v.a_sites {
                        let ix: Vec<usize> = sites.iter().map(|m| m.get()).collect();
                        let a = product(&ix, 8);
                        let ta = reflected_monomial(c(1.0, 0.0), &ix, &DIAMOND_SIGMA, 8);
                        oracle_ok = max_abs_diff(&(a * ta), &diamond_loop()) == 0.0;
                    }
                } else {
                    // Hermitian and squaring to one pins the spectrum to ±1.
                    let op = PauliSum::from_polynomial(&wf, lat.num_modes()).unwrap();
                    let mut rng = ChaCha8Rng::seed_from_u64(4);
                    let x = StateVector::random(1 << lat.num_modes(), &mut rng);
                    let wx = op.apply_vec(&x.0);
                    let wwx = op.apply_vec(&wx);
                    let sq = wwx.iter().zip(&x.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                    let wx = StateVector(wx);
                    let herm = (x.inner(&wx) - wx.inner(&x)).norm();
                    eig_err = eig_err.max(sq).max(herm);
                }
            }
        }
        (squares, eig_err, bisected, factor_ok, oracle_ok)
    });
    run.record(
        "4",
        "vortex operator structure",
        squares == 9 && eig_err <= 1e-10 && bisected >= 2 && factor_ok && oracle_ok && t < Duration::from_secs(5),
        format!(
            "W² = 1 for {squares}/9 loops, eigenvalue err {eig_err:.1e}, A·θ(A) = W on {bisected} bisected loops {factor_ok}, oracle {oracle_ok}, {t:.2?}"
        ),
    );
}

fn criterion_5(run: &mut Runner) {
    let ((min_re, max_im, oracle_err, cases), t) = Runner::timed(|| {
        let lat = diamond();
        let r = reflection_data(&lat, default_plane(&lat)).unwrap();
        let spec = RPSampleSpec {
            exhaustive: true,
            max_degree: 4,
            random_count: 100,
            seed: 0,
            parity: ParityFilter::Even,
        };
        let samples = spec.samples(&r.map.left_set());
        let (mut min_re, mut max_im, mut oracle_err, mut cases) = (f64::INFINITY, 0.0f64, 0.0f64, 0);
        for lambda in LAMBDAS {
            let op = to_matrix(&build_hamiltonian(&lat, Complex64::new(lambda, 0.0)), 8).unwrap();
            let spectrum = dense_spectrum(&op).unwrap();
            let h_oracle = diamond_hamiltonian(lambda);
            for beta in [0.5, 1.0, 5.0] {
                let gibbs = GibbsState::new(&spectrum, beta).unwrap();
                let report = rp_report(&lat, &r, &gibbs, lambda, &spec, 1e-9).unwrap();
                cases += report.passed() as usize;
                min_re = min_re.min(report.details["min_real"].as_f64().unwrap());
                max_im = max_im.max(report.details["max_abs_imag"].as_f64().unwrap());
                // Spot-check a few exhaustive monomials against the Kronecker oracle.
                for s in &samples[1..6] {
                    let ix: Vec<usize> = s.monomials().next().unwrap().indices.iter().map(|m| m.get()).collect();
                    let ours = vortexcert::spectral::rp_functional(s, &r.map, &gibbs).unwrap();
                    let w = product(&ix, 8) * reflected_monomial(c(1.0, 0.0), &ix, &DIAMOND_SIGMA, 8);
                    oracle_err = oracle_err.max((ours - gibbs_average(&h_oracle, &w, beta)).norm());
                }
            }
        }
        (min_re, max_im, oracle_err, cases)
    });
    run.record(
        "5",
        "reflection positivity",
        cases == 9 && min_re >= -1e-9 && max_im <= 1e-9 && oracle_err <= 1e-10 && t < Duration::from_secs(120),
        format!("{cases}/9 (lambda, beta) pass, min re {min_re:.3e}, max |im| {max_im:.1e}, oracle err {oracle_err:.1e}, {t:.2?}"),
    );
}

fn diamond_setup(lambda: f64) -> (vortexcert::spectral::GroundSpace, vortexcert::fock::SparseOperator) {
    let lat = diamond();
    let g = ground_space(
        &to_matrix(&build_hamiltonian(&lat, Complex64::new(lambda, 0.0)), 8).unwrap(),
        None,
    )
    .unwrap();
    let w = vortex_operator::<Complex64>(&lat, &lat.octagons()[0], None).unwrap();
    (g, to_matrix(&w.w, 8).unwrap())
}

fn criterion_6(run: &mut Runner) {
    let ((topo, pos, oracle_dev, oracle_min), t) = Runner::timed(|| {
        let (g, w) = diamond_setup(0.1);
        let topo = check_topological_order(&g, &w, 1e-8);
        let pos = check_ground_positivity(&g, &w, 1e-8);
        let oracle = eigh(&diamond_hamiltonian(0.1));
        let (p, n) = ground_projector(&oracle, 1e-7);
        let (dev, _) = order_deviation(&p, &diamond_loop());
        // Smallest <Ω, W Ω> over the whole ground space, not just one basis.
        let v = oracle.vectors.columns(0, n).into_owned();
        let restricted = v.adjoint() * diamond_loop() * &v;
        let min = SymmetricEigen::new(restricted).eigenvalues.min();
        (topo, pos, dev, min)
    });
    let pass = topo.deviation <= 1e-8
        && (topo.alpha - 1.0).abs() <= 1e-8
        && pos.min >= 1.0 - 1e-8
        && pos.spread <= 1e-8
        && oracle_dev <= 1e-8
        && oracle_min >= 1.0 - 1e-8
        && t < Duration::from_secs(30);
    run.record(
        "6",
        "topological order, vortex freedom",
        pass,
        format!(
            "alpha {:.12}, deviation {:.1e} (oracle {oracle_dev:.1e}), min <W> {:.12} (oracle {oracle_min:.12}), spread {:.1e}, {t:.2?}",
            topo.alpha, topo.deviation, pos.min, pos.spread
        ),
    );
}

fn criterion_7(run: &mut Runner) {
    let ((n, dev, n_oracle, dev_oracle), t) = Runner::timed(|| {
        let (g, w) = diamond_setup(0.0);
        let topo = check_topological_order(&g, &w, 1e-8);
        let oracle = eigh(&diamond_hamiltonian(0.0));
        let (p, n_oracle) = ground_projector(&oracle, 1e-8);
        let (dev_oracle, _) = order_deviation(&p, &diamond_loop());
        (g.degeneracy(), topo.deviation, n_oracle, dev_oracle)
    });
    let islands = diamond().islands().len();
    run.record(
        "7",
        "negative control at lambda = 0",
        n == 1 << islands
            && n_oracle == n
            && dev >= 0.5
            && (dev - dev_oracle).abs() <= 1e-10
            && t < Duration::from_secs(30),
        format!("degeneracy {n} (2^{islands}), deviation {dev:.6} (oracle {dev_oracle:.6}), {t:.2?}"),
    );
}

fn criterion_8(run: &mut Runner) {
    let ((values, oracle_err, alpha), t) = Runner::timed(|| {
        let lat = diamond();
        let op = to_matrix(&build_hamiltonian(&lat, Complex64::new(0.1, 0.0)), 8).unwrap();
        let s = dense_spectrum(&op).unwrap();
        let (g, w) = diamond_setup(0.1);
        let alpha = check_topological_order(&g, &w, 1e-8).alpha;
        let h = diamond_hamiltonian(0.1);
        let mut oracle_err = 0.0f64;
        let values: Vec<(f64, f64)> = [0.5, 1.0, 5.0, 10.0, 50.0]
            .iter()
            .map(|&beta| {
                let v = thermal_expectation(&w, &s, beta).unwrap();
                oracle_err = oracle_err.max((v - gibbs_average(&h, &diamond_loop(), beta)).norm());
                (beta, v.re)
            })
            .collect();
        (values, oracle_err, alpha)
    });
    let listed: Vec<String> = values.iter().map(|(b, v)| format!("β={b}: {v:.3e}")).collect();
    run.record(
        "8a",
        "thermal <W> nonnegative",
        values.iter().all(|v| v.1 >= 0.0) && oracle_err <= 1e-10 && t < Duration::from_secs(60),
        format!("{}, oracle err {oracle_err:.1e}, {t:.2?}", listed.join(", ")),
    );
    let at50 = values.last().unwrap().1;
    run.record(
        "8b",
        "thermal <W> at β = 50 reaches alpha",
        (at50 - alpha).abs() <= 1e-6,
        format!(
            "|<W>_50 - alpha| = {:.6e} (alpha {alpha:.12}), tolerance 1e-6",
            (at50 - alpha).abs()
        ),
    );
}

fn criterion_9(run: &mut Runner) {
    let ((energies, degeneracies, alpha_min, free), t) = Runner::timed(|| {
        let lat = torus();
        let mut energies = Vec::new();
        let mut degeneracies = Vec::new();
        let mut alpha_min = f64::INFINITY;
        let mut free = true;
        for seed in 0..5 {
            let sol = solve(&lat, 0.1, None, seed, None).unwrap();
            energies.push(sol.ground.e0);
            degeneracies.push(sol.ground.degeneracy());
            let records = vortex_map(&lat, &sol.ground, 1e-6).unwrap();
            free &= records.len() == 8 && records.iter().all(|r| r.classification == VortexClass::VortexFree);
            alpha_min = records.iter().map(|r| r.alpha).fold(alpha_min, f64::min);
        }
        (energies, degeneracies, alpha_min, free)
    });
    let lo = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    run.record(
        "9",
        "4x4 torus with Lanczos",
        hi - lo <= 1e-8
            && (lo - TORUS_E0).abs() <= 1e-8
            && free
            && alpha_min >= 1.0 - 1e-6
            && t < Duration::from_secs(600),
        format!(
            "E0 {lo:.12} (spread {:.1e}, reference {TORUS_E0}), degeneracy {degeneracies:?}, 8 vortex-free {free}, alpha min {alpha_min:.12}, {t:.2?}",
            hi - lo
        ),
    );
}

fn criterion_10(run: &mut Runner) {
    let ((certify_same, sweep_same), t) = Runner::timed(|| {
        let mut params = RunParams::new(LatticeSpec::new(3, 3, Boundary::Open), 0.1, 1.0);
        params.seed = 7;
        let a = serde_json::to_vec_pretty(&certify(&params, None).unwrap().0).unwrap();
        let b = serde_json::to_vec_pretty(&certify(&params, None).unwrap().0).unwrap();
        let sp = SweepParams {
            lattice: LatticeSpec::new(3, 3, Boundary::Open),
            lambdas: vec![0.0, 0.1, 0.3],
            betas: vec![1.0],
            seed: 7,
            tolerances: Tolerances::default(),
            samples: 20,
            max_degree: 4,
        };
        let s1 = serde_json::to_vec_pretty(&sweep(&sp).unwrap()).unwrap();
        let s2 = serde_json::to_vec_pretty(&sweep(&sp).unwrap()).unwrap();
        (a == b, s1 == s2)
    });
    run.record(
        "10",
        "determinism",
        certify_same && sweep_same,
        format!("certify byte-identical {certify_same}, sweep byte-identical {sweep_same}, {t:.2?}"),
    );
}

fn main() {
    // `cargo test -- --list` and similar harness probes pass arguments; there is nothing to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut run = Runner { outcomes: Vec::new() };
    criterion_1(&mut run);
    criterion_2(&mut run);
    criterion_3(&mut run);
    criterion_4(&mut run);
    criterion_5(&mut run);
    criterion_6(&mut run);
    criterion_7(&mut run);
    criterion_8(&mut run);
    criterion_9(&mut run);
    criterion_10(&mut run);

    let unexpected: Vec<&Outcome> = run
        .outcomes
        .iter()
        .filter(|o| !o.pass && !KNOWN_FAILURES.iter().any(|k| k.0 == o.id))
        .collect();
    let known = run.outcomes.iter().filter(|o| !o.pass).count() - unexpected.len();
    println!(
        "acceptance: {} passed, {} failed ({known} known)",
        run.outcomes.iter().filter(|o| o.pass).count(),
        run.outcomes.len() - run.outcomes.iter().filter(|o| o.pass).count()
    );
    if !unexpected.is_empty() {
        for o in unexpected {
            eprintln!("unexpected failure: criterion {} {}: {}", o.id, o.title, o.detail);
        }
        std::process::exit(1);
    }
}
