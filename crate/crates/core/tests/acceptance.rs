//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p fps-core --test acceptance`.

use std::time::{Duration, Instant};

use fps_core::heisenberg::{self, gates, kron_vectors, qft, qft_product_state, rep_x, rep_z, Generator};
use fps_core::matrix::random;
use fps_core::phasepoint::{build_phase_point_set, verify_wigner_set, wigner};
use fps_core::radon::{even_precondition, marginal_even_general, marginal_qubit_w1, marginal_simple_odd, radon_direct};
use fps_core::reconstruct::{exact_dataset, process_radon_check, reconstruct_state};
use fps_core::zn::l1_check;
use fps_core::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL_QFT: f64 = 1e-10;
const TOL_PRODUCT: f64 = 1e-10;
const TOL_AXIOMS: f64 = 1e-9;
const TOL_OVERLAP: f64 = 1e-9;
const TOL_AXIS: f64 = 1e-9;
const TOL_MARGINAL: f64 = 1e-9;
const WITNESS_GAP: f64 = 1e-3;
const TOL_ROUND_TRIP: f64 = 1e-8;
const TOL_GATES: f64 = 1e-12;
const TOL_PROCESS: f64 = 1e-9;
const NONZERO: f64 = 1e-12;

const WIGNER_CASES: [(Variant, usize); 10] = [
    (Variant::Odd, 3),
    (Variant::Odd, 5),
    (Variant::Odd, 7),
    (Variant::Odd, 9),
    (Variant::EvenNu, 4),
    (Variant::EvenNu, 6),
    (Variant::EvenNu, 8),
    (Variant::QubitW1, 4),
    (Variant::QubitW1, 8),
    (Variant::QubitW1, 16),
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_matrix(rng: &mut ChaCha8Rng, all: &[Sl2Matrix]) -> Sl2Matrix {
    all[rng.random_range(0..all.len())]
}

fn c1_qft() -> Outcome {
    let worst = (2..=16)
        .map(|n| {
            let o = qft(n);
            (&(&o.adjoint() * &rep_x(n)) * &o).max_abs_diff(&rep_z(n))
        })
        .fold(0.0, f64::max);
    outcome(worst < TOL_QFT, format!("max |Ω†XΩ - Z| = {worst:.2e} over N = 2..16"))
}

fn c2_product_state() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, m) in [(2usize, 2usize), (2, 3), (3, 2)] {
        let big = d.pow(m as u32);
        let o = qft(big);
        for j in 0..big {
            let psi = kron_vectors(&qft_product_state(j, d, m).unwrap());
            let col = o.column(j);
            let e = psi.iter().zip(&col).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst = worst.max(e);
        }
    }
    outcome(worst < TOL_PRODUCT, format!("max column error {worst:.2e}"))
}

fn c3_axioms() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut msg = String::new();
    for (v, n) in WIGNER_CASES {
        let set = match build_phase_point_set(v, n) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("{v} N={n}: {e}")),
        };
        let r = verify_wigner_set(&set);
        let m = [r.hermiticity, r.orthogonality, r.completeness, r.diagonal].into_iter().fold(0.0, f64::max);
        if m > worst {
            worst = m;
            msg = format!("{v} N={n}");
        }
    }
    outcome(worst < TOL_AXIOMS, format!("max violation {worst:.2e} ({msg})"))
}

fn c4_overlap(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for (v, n) in WIGNER_CASES {
        let set = build_phase_point_set(v, n).unwrap();
        for _ in 0..50 {
            let r1 = random::mixed_density(rng, n);
            let r2 = random::pure_density(rng, n);
            let (w1, w2) = (wigner(&r1, &set).unwrap(), wigner(&r2, &set).unwrap());
            let s: f64 = w1.values.iter().zip(&w2.values).map(|(a, b)| a * b).sum();
            worst = worst.max((r1.trace_product(&r2).re - n as f64 * s).abs());
        }
    }
    outcome(worst < TOL_OVERLAP, format!("max |tr ρρ' - NΣWW'| = {worst:.2e} (50 pairs per case)"))
}

fn c5_axis(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for (v, n) in WIGNER_CASES {
        let set = build_phase_point_set(v, n).unwrap();
        let o = qft(n);
        for _ in 0..10 {
            let rho = random::mixed_density(rng, n);
            let w = wigner(&rho, &set).unwrap();
            let pos: Vec<f64> = (0..n).map(|z| rho[(z, z)].re).collect();
            let mom: Vec<f64> = (0..n).map(|x| rho.expectation(&o.column(x)).re).collect();
            worst = worst.max(max_diff(&w.position_marginal(), &pos));
            worst = worst.max(max_diff(&w.momentum_marginal(), &mom));
        }
    }
    outcome(worst < TOL_AXIS, format!("max axis-marginal error {worst:.2e}"))
}

fn c6_odd_marginals(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [3usize, 5, 7, 9] {
        let set = build_phase_point_set(Variant::Odd, n).unwrap();
        let all = Sl2Matrix::enumerate(n);
        let mats: Vec<Sl2Matrix> =
            if n <= 5 { all.clone() } else { (0..100).map(|_| random_matrix(rng, &all)).collect() };
        for m in mats {
            let rho = random::mixed_density(rng, n);
            let w = wigner(&rho, &set).unwrap();
            let rec = marginal_simple_odd(&rho, &m, &set).unwrap();
            worst = worst.max(max_diff(&rec.probs, &radon_direct(&w, &m).unwrap()));
            count += 1;
        }
    }
    outcome(worst < TOL_MARGINAL, format!("{count} matrices, max error {worst:.2e}"))
}

fn c7_witness(rng: &mut ChaCha8Rng) -> Outcome {
    let n = 4;
    let set = build_phase_point_set(Variant::EvenNu, n).unwrap();
    let rho = random::mixed_density(rng, n);
    let w = wigner(&rho, &set).unwrap();
    let mut witnesses = 0;
    let mut best = 0.0f64;
    for m in Sl2Matrix::enumerate(n) {
        let direct = &radon_direct(&w, &m).unwrap();
        // both σ_M(Z) and σ_{M^{-1}}(Z), every cyclic shift
        let mut candidates = Vec::new();
        for op in [heisenberg::sigma_m_image(&m, Generator::Z), heisenberg::measured_monomial(&m).matrix()] {
            if let Ok(b) = heisenberg::ordered_eigenbasis(&op, 1e-10) {
                candidates.push(b.probabilities(&rho));
            }
        }
        let gap = candidates
            .iter()
            .flat_map(|p| {
                (0..n).map(move |k| (0..n).map(|z| (direct[z] - p[(z + n - k) % n]).abs()).fold(0.0, f64::max))
            })
            .fold(f64::INFINITY, f64::min);
        if gap > WITNESS_GAP {
            witnesses += 1;
            best = best.max(gap);
        }
    }
    outcome(witnesses >= 1, format!("{witnesses} of 48 matrices are not Born-simple (largest gap {best:.3})"))
}

fn c8_even_closed_form(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [4usize, 8] {
        let set = build_phase_point_set(Variant::EvenNu, n).unwrap();
        let admissible: Vec<Sl2Matrix> =
            Sl2Matrix::enumerate(n).into_iter().filter(|m| even_precondition(m).is_ok()).collect();
        for _ in 0..50 {
            let m = random_matrix(rng, &admissible);
            let rho = random::mixed_density(rng, n);
            let rec = marginal_even_general(&rho, &m, &set).unwrap();
            worst = worst.max(max_diff(&rec.probs, &radon_direct(&wigner(&rho, &set).unwrap(), &m).unwrap()));
        }
    }
    outcome(worst < TOL_MARGINAL, format!("100 pairs, max error {worst:.2e}"))
}

/// Measurement-frame matrices `M = L^{-1}` for `L ∈ L1`.
fn l1_frame(n: usize) -> Vec<Sl2Matrix> {
    Sl2Matrix::enumerate(n).into_iter().filter(|l| l1_check(l).unwrap()).map(|l| l.inverse()).collect()
}

fn c9_qubit(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [4usize, 8, 16] {
        let set = build_phase_point_set(Variant::QubitW1, n).unwrap();
        let pool = l1_frame(n);
        let mats: Vec<Sl2Matrix> =
            if n == 4 { pool.clone() } else { (0..200).map(|_| random_matrix(rng, &pool)).collect() };
        for m in mats {
            let rho = random::mixed_density(rng, n);
            let rec = match marginal_qubit_w1(&rho, &m, &set) {
                Ok(r) => r,
                Err(e) => return outcome(false, format!("N={n} {m}: {e}")),
            };
            worst = worst.max(max_diff(&rec.probs, &radon_direct(&wigner(&rho, &set).unwrap(), &m).unwrap()));
            count += 1;
        }
    }
    outcome(worst < TOL_MARGINAL, format!("{count} L1 matrices, max error {worst:.2e}"))
}

fn c10_round_trip(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    let cases = [
        (Variant::Odd, 3),
        (Variant::Odd, 5),
        (Variant::Odd, 7),
        (Variant::Odd, 9),
        (Variant::QubitW1, 4),
        (Variant::QubitW1, 8),
        (Variant::QubitW1, 16),
    ];
    for (v, n) in cases {
        let set = build_phase_point_set(v, n).unwrap();
        let plan = MeasurementPlan::for_dimension(n).unwrap();
        for i in 0..20 {
            let rho = if i % 2 == 0 { random::pure_density(rng, n) } else { random::mixed_density(rng, n) };
            let ds = exact_dataset(&rho, &set, &plan).unwrap();
            let rec = reconstruct_state(&ds, &set).unwrap();
            worst = worst.max((&rec.rho - &rho).frobenius_norm());
        }
    }
    outcome(worst < TOL_ROUND_TRIP, format!("max ‖ρ̂ - ρ‖_F = {worst:.2e} (20 states per case)"))
}

fn c11_gates() -> Outcome {
    let mut worst: f64 = 0.0;
    for nbits in [2u32, 3, 4] {
        let n = 1usize << nbits;
        for k in 0..nbits {
            let p = 1usize << k;
            let x = rep_x(n).pow(p).max_abs_diff(&rep_x(n >> k).kron(&ComplexMatrix::identity(p)));
            let z = rep_z(n).pow(p).max_abs_diff(&ComplexMatrix::identity(p).kron(&rep_z(n >> k)));
            worst = worst.max(x).max(z);
        }
    }
    let x4 = &gates::cnot_low_control() * &gates::sigma1().kron(&gates::sigma1());
    worst = worst.max(x4.max_abs_diff(&rep_x(4)));
    worst = worst.max(gates::sigma3().kron(&gates::phase_s()).max_abs_diff(&rep_z(4)));
    outcome(worst < TOL_GATES, format!("max deviation {worst:.2e}"))
}

fn c12_process(rng: &mut ChaCha8Rng) -> Outcome {
    let n = 3;
    let set = build_phase_point_set(Variant::Odd, n).unwrap();
    let all = Sl2Matrix::enumerate(n);
    let mut channels = vec![Superoperator::identity(n), Superoperator::depolarizing(n, 1.0)];
    for _ in 0..10 {
        channels.push(Superoperator::unitary(&random::unitary(rng, n)));
    }
    let mut worst: f64 = 0.0;
    for ch in &channels {
        for _ in 0..5 {
            let (m, mp) = (random_matrix(rng, &all), random_matrix(rng, &all));
            worst = worst.max(process_radon_check(ch, &set, &m, &mp).unwrap());
        }
    }
    outcome(worst < TOL_PROCESS, format!("{} channels x 5 pairs, max deviation {worst:.2e}", channels.len()))
}

/// Random pure state supported on `|b - a>, …, |b + a>`.
fn band_state(rng: &mut ChaCha8Rng, n: usize, b: usize, a: usize) -> ComplexMatrix {
    let g = random::gaussian_vector(rng, 2 * a + 1);
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    for (i, c) in g.iter().enumerate() {
        psi[(b + i + n - a) % n] = *c;
    }
    let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|c| *c /= norm);
    ComplexMatrix::outer(&psi)
}

fn c13_sparsity(rng: &mut ChaCha8Rng) -> Outcome {
    let (no, ne) = (9usize, 8usize);
    let odd = build_phase_point_set(Variant::Odd, no).unwrap();
    let even = build_phase_point_set(Variant::EvenNu, ne).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for a in 1..=3usize {
        let co = wigner(&band_state(rng, no, no / 2, a), &odd).unwrap().count_nonzero(NONZERO);
        let ce = wigner(&band_state(rng, ne, ne / 2, a), &even).unwrap().count_nonzero(NONZERO);
        let fo = co as f64 / (no * no) as f64;
        let fe = ce as f64 / (ne * ne) as f64;
        // odd: at most 4a+1 populated columns of N cells; even never sparser
        pass &= co <= no * (4 * a + 1) && fe >= fo;
        parts.push(format!("a={a}: odd {co}/{} even {ce}/{}", no * no, ne * ne));
    }
    outcome(pass, parts.join(", "))
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    type Check<'a> = Box<dyn FnMut() -> Outcome + 'a>;
    let mut results = Vec::new();
    {
        let rng = std::cell::RefCell::new(&mut rng);
        let checks: Vec<(&str, Option<Duration>, Check)> = vec![
            ("C1 QFT conjugation", Some(Duration::from_secs(1)), Box::new(c1_qft)),
            ("C2 product-state QFT", None, Box::new(c2_product_state)),
            ("C3 Wigner-set axioms", Some(Duration::from_secs(30)), Box::new(c3_axioms)),
            ("C4 overlap law", None, Box::new(|| c4_overlap(&mut rng.borrow_mut()))),
            ("C5 axis marginals", None, Box::new(|| c5_axis(&mut rng.borrow_mut()))),
            (
                "C6 odd simple marginals",
                Some(Duration::from_secs(120)),
                Box::new(|| c6_odd_marginals(&mut rng.borrow_mut())),
            ),
            ("C7 even impossibility witness", None, Box::new(|| c7_witness(&mut rng.borrow_mut()))),
            ("C8 even closed form", None, Box::new(|| c8_even_closed_form(&mut rng.borrow_mut()))),
            ("C9 qubit W1 simple marginals", None, Box::new(|| c9_qubit(&mut rng.borrow_mut()))),
            (
                "C10 inverse Radon round trip",
                Some(Duration::from_secs(120)),
                Box::new(|| c10_round_trip(&mut rng.borrow_mut())),
            ),
            ("C11 qubit factorisations", None, Box::new(c11_gates)),
            ("C12 process tomography", None, Box::new(|| c12_process(&mut rng.borrow_mut()))),
            ("C13 sparsity", None, Box::new(|| c13_sparsity(&mut rng.borrow_mut()))),
        ];
        for (name, limit, mut check) in checks {
            let start = Instant::now();
            let mut out = check();
            let elapsed = start.elapsed();
            if let Some(limit) = limit {
                if elapsed > limit {
                    out.pass = false;
                    out.detail.push_str(&format!("; exceeded {limit:?}"));
                }
            }
            let tag = if out.pass { "PASS" } else { "FAIL" };
            println!("[{tag}] {name}: {} ({:.2?})", out.detail, elapsed);
            results.push(out.pass);
        }
    }
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
