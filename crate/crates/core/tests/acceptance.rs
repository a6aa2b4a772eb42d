//! End-to-end acceptance checks, one test per criterion. Each prints a
//! PASS line with the measured quantities (visible under --nocapture).

use std::sync::Arc;
use std::time::Instant;

use ndarray::{Array1, Array2};
use ndarray_linalg::c64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use digh_core::diffusion::{
    build, transform_condition_number, MultiResolutionMode, DEFAULT_EPS_BIORTHOGONAL,
    DEFAULT_EPS_ORTHOGONAL,
};
use digh_core::filters::{
    label_accuracy, learn_signal_model, reconstruct_labels, MomentEstimate, SamplingModel,
};
use digh_core::frame::{
    analyze, build_bank, check_pr, synthesize, AnalysisDesign, FilterBankSpec, ResponseFn,
};
use digh_core::graph::{
    gen_directed_cycle, gen_directed_torus, gen_directed_watts_strogatz, gen_random_digraph,
    largest_scc_subgraph, read_label_file, DirectedGraph,
};
use digh_core::laplacian::{combinatorial_laplacian, normalized_laplacian, random_walk_laplacian};
use digh_core::linalg::max_abs;
use digh_core::spectral::{
    decompose, decompose_reversibilized, dirichlet_energy, gft, rayleigh_quotient_c,
};
use digh_core::ssl::{
    default_gamma_grid, evaluate_ssl, heat_kernel_bank, normalized_adjacency, ssl_l1,
    ssl_l2_moura_solution, ssl_l2_solution, LabelProblem, SslEvalConfig, SslMethod, SslSpace,
};
use digh_core::walk::{
    from_graph, isometry_to_pi, lazy, reversibilized, similar_operator_t, time_reversal,
};

fn random_signal(n: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    Array1::from_iter((0..n).map(|_| rng.random_range(-1.0..1.0)))
}

fn l2_norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Conjugate gradient for symmetric positive definite systems; the
/// independent minimizer used against the closed forms.
fn conjugate_gradient(a: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = b.len();
    let mut x = Array1::zeros(n);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs_old = r.dot(&r);
    let b_norm = rs_old.sqrt().max(1e-300);
    for _ in 0..20 * n {
        let ap = a.dot(&p);
        let alpha = rs_old / p.dot(&ap);
        x.scaled_add(alpha, &p);
        r.scaled_add(-alpha, &ap);
        let rs_new = r.dot(&r);
        if rs_new.sqrt() <= 1e-13 * b_norm {
            break;
        }
        p = &r + &(&p * (rs_new / rs_old));
        rs_old = rs_new;
    }
    x
}

/// Criterion 1: on random strongly connected digraphs, every eigenpair of
/// every reversibilization satisfies the Rayleigh-quotient law
/// |R(xi) - (1 - Re theta)| <= 1e-8, in under 30 seconds.
#[test]
fn criterion_1_rayleigh_eigenvalue_law() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let n = 10 + (seed as usize * 7) % 41; // sizes 10..=50
        let g = gen_random_digraph(n, 3 * n, seed);
        let w = from_graph(&g).unwrap();
        for &alpha in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let wa = reversibilized(&w, alpha).unwrap();
            let dec = decompose(wa.transition()).unwrap();
            for j in 0..n {
                let r = rayleigh_quotient_c(dec.eigvecs().column(j), &w).unwrap();
                let gap = (r - (1.0 - dec.eigvals()[j].re)).abs();
                worst = worst.max(gap);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-8, "worst Rayleigh gap {worst:.3e}");
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}");
    println!("criterion 1 PASS: Rayleigh-eigenvalue law, worst gap {worst:.3e} in {elapsed:.2?}");
}

/// Criterion 2: lazy 256-cycle frequencies match the classical formula to
/// 1e-10 and the DGFT matches a direct DFT evaluation to 1e-8.
#[test]
fn criterion_2_cycle_classical_consistency() {
    let n = 256;
    let gamma = 0.5;
    let g = gen_directed_cycle(n).unwrap();
    let w = lazy(&from_graph(&g).unwrap(), gamma).unwrap();
    let dec = decompose(w.transition()).unwrap();

    let mut computed: Vec<f64> = dec.frequencies().to_vec();
    computed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut expected: Vec<f64> = (0..n)
        .map(|k| (1.0 - gamma) * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()))
        .collect();
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut worst_freq: f64 = 0.0;
    for (c, e) in computed.iter().zip(&expected) {
        worst_freq = worst_freq.max((c - e).abs());
    }
    assert!(worst_freq <= 1e-10, "worst frequency gap {worst_freq:.3e}");

    // DGFT vs direct DFT, matching eigenvalues (1 + e^{i theta_k})/2 to
    // their classical index k.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_coeff: f64 = 0.0;
    for _ in 0..5 {
        let s: Array1<c64> = Array1::from_iter(
            (0..n).map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        );
        let shat = gft(&dec, s.view());
        for j in 0..n {
            let root = (dec.eigvals()[j] - gamma) / (1.0 - gamma);
            let k = (root.im.atan2(root.re) * n as f64 / (2.0 * std::f64::consts::PI)).round();
            let k = ((k as i64).rem_euclid(n as i64)) as usize;
            let mut dft = c64::new(0.0, 0.0);
            for (x, sv) in s.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (k * x % n) as f64 / n as f64;
                dft += sv * c64::from_polar(1.0, phase);
            }
            dft /= (n as f64).sqrt();
            worst_coeff = worst_coeff.max((shat[j] - dft).norm());
        }
    }
    assert!(worst_coeff <= 1e-8, "worst DGFT/DFT gap {worst_coeff:.3e}");
    println!(
        "criterion 2 PASS: cycle frequencies within {worst_freq:.3e}, DGFT vs DFT within {worst_coeff:.3e}"
    );
}

/// Criterion 3: the 6x4 torus walk spectrum is the pairwise mean of the two
/// cycle spectra (as multisets, 1e-8) and groups at Re = +-0.25 exist.
#[test]
fn criterion_3_torus_spectrum() {
    let (m, n) = (6, 4);
    let g = gen_directed_torus(m, n).unwrap();
    let w = from_graph(&g).unwrap();
    let dec = decompose(w.transition()).unwrap();

    let mut expected = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let li = c64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / m as f64);
            let mj = c64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
            expected.push((li + mj) / 2.0);
        }
    }
    let got = dec.eigvals().to_vec();
    let mut used = vec![false; got.len()];
    let mut worst: f64 = 0.0;
    for e in &expected {
        let (best, dist) = got
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, g)| (i, (g - e).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        used[best] = true;
        worst = worst.max(dist);
    }
    assert!(worst <= 1e-8, "worst eigenvalue match {worst:.3e}");

    let group_res: Vec<f64> = dec.groups().iter().map(|g| 1.0 - g.frequency).collect();
    let plus = group_res.iter().any(|r| (r - 0.25).abs() <= 1e-9);
    let minus = group_res.iter().any(|r| (r + 0.25).abs() <= 1e-9);
    assert!(
        plus && minus,
        "groups at Re = +-0.25 not found: {group_res:?}"
    );
    println!("criterion 3 PASS: torus spectrum within {worst:.3e}, groups at Re = +-0.25 detected");
}

/// Criterion 4: the alpha = 1/2 orthonormalized basis preserves
/// <.,.>_pi <-> <.,.> within 1e-10 on 100 random vector pairs.
#[test]
fn criterion_4_generalized_parseval() {
    let n = 60;
    let g = gen_random_digraph(n, 180, 4);
    let w = from_graph(&g).unwrap();
    let dec = decompose_reversibilized(&w).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = random_signal(n, &mut rng);
        let y = random_signal(n, &mut rng);
        let xs = dec.eigvecs().dot(&x.mapv(|v| c64::new(v, 0.0)));
        let ys = dec.eigvecs().dot(&y.mapv(|v| c64::new(v, 0.0)));
        let lhs: c64 = xs
            .iter()
            .zip(ys.iter())
            .zip(w.stationary().iter())
            .map(|((a, b), &p)| a.conj() * b * p)
            .sum();
        let rhs = x.dot(&y);
        worst = worst.max((lhs - rhs).norm());
    }
    assert!(worst <= 1e-10, "worst Parseval gap {worst:.3e}");
    println!("criterion 4 PASS: generalized Parseval within {worst:.3e} on 100 pairs");
}

/// Criterion 5: the default filter-bank design reconstructs perfectly on
/// the 256-cycle and on DWS(64, 2, 0.02), and a deliberately violated
/// design fails check_pr with the injected residual.
#[test]
fn criterion_5_perfect_reconstruction() {
    let mut worst_cycle: f64 = 0.0;
    {
        let g = gen_directed_cycle(256).unwrap();
        let w = lazy(&from_graph(&g).unwrap(), 0.5).unwrap();
        let dec = decompose(w.transition()).unwrap();
        let spec = FilterBankSpec::default_dyadic(6).unwrap();
        let bank = build_bank(dec.groups(), &spec).unwrap();
        let check = check_pr(&bank, dec.groups(), &spec).unwrap();
        assert!(check.passes, "cycle bank fails PR: {check:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let f = random_signal(256, &mut rng);
            let back = synthesize(&bank, &analyze(&bank, f.view())).unwrap();
            worst_cycle = worst_cycle.max(l2_norm(&(&back - &f)) / l2_norm(&f));
        }
        assert!(worst_cycle <= 1e-8, "cycle round trip {worst_cycle:.3e}");
    }

    let mut worst_dws: f64 = 0.0;
    let (dws_groups, dws_spec) = {
        let g = gen_directed_watts_strogatz(64, 2, 0.02, 7).unwrap();
        let w = from_graph(&g).unwrap();
        let half = reversibilized(&w, 0.5).unwrap();
        let t = similar_operator_t(&half).unwrap();
        let dec = decompose(&t).unwrap();
        let spec = FilterBankSpec::default_dyadic(4).unwrap();
        let bank = build_bank(dec.groups(), &spec).unwrap();
        let check = check_pr(&bank, dec.groups(), &spec).unwrap();
        assert!(check.passes, "DWS bank fails PR: {check:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let f = random_signal(64, &mut rng);
            let back = synthesize(&bank, &analyze(&bank, f.view())).unwrap();
            worst_dws = worst_dws.max(l2_norm(&(&back - &f)) / l2_norm(&f));
        }
        assert!(worst_dws <= 1e-8, "DWS round trip {worst_dws:.3e}");
        (dec.groups().to_vec(), spec)
    };

    // Violated design: shift the low-pass analysis response by 1e-3; at the
    // zero frequency h = 1, so the scalar residual equals the injection.
    let injected = 1e-3;
    let base = dws_spec.clone();
    let perturbed = FilterBankSpec::new(
        dws_spec.scales().to_vec(),
        Arc::new(|x: f64| (-x).exp()),
        Arc::new(|x: f64| (-x / 2.0).exp() - (-x).exp()),
        AnalysisDesign::Explicit {
            h_tilde: {
                let base = base.clone();
                Arc::new(move |omega| base.analysis_responses(omega).unwrap().0 + injected)
            },
            g_tilde: (0..dws_spec.n_scales())
                .map(|j| {
                    let base = base.clone();
                    let f: ResponseFn =
                        Arc::new(move |omega| base.analysis_responses(omega).unwrap().1[j]);
                    f
                })
                .collect(),
        },
    )
    .unwrap();
    let bad_bank = build_bank(&dws_groups, &perturbed).unwrap();
    let check = check_pr(&bad_bank, &dws_groups, &perturbed).unwrap();
    assert!(!check.passes);
    assert!(
        (check.max_scalar_residual - injected).abs() <= 0.1 * injected,
        "residual {:.3e} does not match injection {injected:.3e} within 10%",
        check.max_scalar_residual
    );
    println!(
        "criterion 5 PASS: PR round trips within {worst_cycle:.3e} (cycle) / {worst_dws:.3e} (DWS); violated design residual {:.3e}",
        check.max_scalar_residual
    );
}

/// Criterion 6: diffusion-wavelet conditioning on the 256-cycle at six
/// scales — orthogonal kappa in [5, 500], biorthogonal/orthogonal ratio at
/// least 100, biorthogonal duality at every scale within 1e-8.
#[test]
fn criterion_6_diffusion_wavelet_conditioning() {
    let g = gen_directed_cycle(256).unwrap();
    let w = lazy(&from_graph(&g).unwrap(), 0.5).unwrap();
    let t = similar_operator_t(&w).unwrap();

    let ortho = build(
        &t,
        6,
        DEFAULT_EPS_ORTHOGONAL,
        MultiResolutionMode::Orthogonal,
    )
    .unwrap();
    let kappa_o = transform_condition_number(&ortho).unwrap();
    assert!(
        (5.0..=500.0).contains(&kappa_o),
        "orthogonal kappa {kappa_o:.3e} outside [5, 500]"
    );
    // Critical sampling: per-scale wavelet counts plus the coarsest scaling
    // dimension add up to N.
    let wavelet_total: usize = (1..=6).map(|j| ortho.wavelet_basis(j).ncols()).sum();
    assert_eq!(wavelet_total + ortho.scaling_basis_in_v0(6).ncols(), 256);

    let biorth = build(
        &t,
        6,
        DEFAULT_EPS_BIORTHOGONAL,
        MultiResolutionMode::Biorthogonal,
    )
    .unwrap();
    let kappa_b = transform_condition_number(&biorth).unwrap();
    assert!(
        kappa_b / kappa_o >= 1e2,
        "conditioning ratio {:.3e} below 1e2",
        kappa_b / kappa_o
    );

    let mut worst_duality: f64 = 0.0;
    for j in 1..=6 {
        let psi = biorth.wavelet_basis(j);
        if psi.ncols() == 0 {
            continue;
        }
        let mut gram = biorth.dual_wavelet_basis(j).t().dot(psi);
        for i in 0..gram.nrows() {
            gram[[i, i]] -= 1.0;
        }
        worst_duality = worst_duality.max(max_abs(gram.view()));
    }
    assert!(
        worst_duality <= 1e-8,
        "duality residual {worst_duality:.3e}"
    );
    println!(
        "criterion 6 PASS: kappa_ortho = {kappa_o:.3e}, kappa_biorth = {kappa_b:.3e} (ratio {:.3e}), duality within {worst_duality:.3e}",
        kappa_b / kappa_o
    );
}

/// Criterion 7: on 30-vertex digraphs every l2 closed form matches a
/// conjugate-gradient minimization of its own objective within 1e-6 in
/// solution norm, and the l1 solver matches a coordinate-descent oracle
/// within 1e-6 in objective value.
#[test]
fn criterion_7_closed_forms_vs_oracles() {
    let n = 30;
    let gamma = 0.7;
    let mut worst_l2: f64 = 0.0;
    for seed in 0..5u64 {
        let g = gen_random_digraph(n, 90, seed);
        let w = from_graph(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let labels = Array1::from_iter((0..n).map(|_| match rng.random_range(0..3) {
            0 => -1.0,
            1 => 0.0,
            _ => 1.0,
        }));
        let problem = LabelProblem::new(labels.clone(), gamma).unwrap();
        let masked = problem.labels().clone();

        // Method 1: minimize c||M_l(f - y)||^2 + c||M_u f||^2 + g <f, L f>;
        // CG on the SPD stationarity system (I + gamma L) f = M_l y.
        let l_norm = normalized_laplacian(&w).unwrap();
        let f1 = ssl_l2_solution(&problem, &l_norm, SslSpace::Counting, None).unwrap();
        let mut a = &l_norm * gamma;
        for i in 0..n {
            a[[i, i]] += 1.0;
        }
        let cg1 = conjugate_gradient(&a, &masked);
        worst_l2 = worst_l2.max(l2_norm(&(&f1 - &cg1)));

        // Method 2 in l2(V, pi): stationarity Pi (I + gamma L_RW) f =
        // Pi M_l y, with SPD matrix Pi + gamma L_comb.
        let l_rw = random_walk_laplacian(&w).unwrap();
        let pi = w.stationary_measure();
        let f2 = ssl_l2_solution(&problem, &l_rw, SslSpace::Stationary, Some(&pi)).unwrap();
        let l_comb = combinatorial_laplacian(&w).unwrap();
        let mut a2 = &l_comb * gamma;
        for i in 0..n {
            a2[[i, i]] += w.stationary()[i];
        }
        let b2 = Array1::from_iter(masked.iter().zip(w.stationary()).map(|(&y, &p)| y * p));
        let cg2 = conjugate_gradient(&a2, &b2);
        worst_l2 = worst_l2.max(l2_norm(&(&f2 - &cg2)));

        // Method 3: (M_l + gamma R_M) f = M_l y.
        let w_norm = normalized_adjacency(&g).unwrap();
        let f3 = ssl_l2_moura_solution(&problem, &w_norm).unwrap();
        let mut i_minus = -w_norm.clone();
        for i in 0..n {
            i_minus[[i, i]] += 1.0;
        }
        let r_m = i_minus.t().dot(&i_minus);
        let mut a3 = &r_m * gamma;
        let mask = problem.mask();
        for i in 0..n {
            a3[[i, i]] += mask[i];
        }
        let cg3 = conjugate_gradient(&a3, &masked);
        worst_l2 = worst_l2.max(l2_norm(&(&f3 - &cg3)));

        // Symmetrized variants of methods 1 and 2.
        let gs = digh_core::graph::symmetrize(&g);
        let ws = from_graph(&gs).unwrap();
        let l_sym = normalized_laplacian(&ws).unwrap();
        let f1s = ssl_l2_solution(&problem, &l_sym, SslSpace::Counting, None).unwrap();
        let mut a1s = &l_sym * gamma;
        for i in 0..n {
            a1s[[i, i]] += 1.0;
        }
        worst_l2 = worst_l2.max(l2_norm(&(&f1s - &conjugate_gradient(&a1s, &masked))));

        let l_rw_sym = random_walk_laplacian(&ws).unwrap();
        let pis = ws.stationary_measure();
        let f2s = ssl_l2_solution(&problem, &l_rw_sym, SslSpace::Stationary, Some(&pis)).unwrap();
        let l_comb_sym = combinatorial_laplacian(&ws).unwrap();
        let mut a2s = &l_comb_sym * gamma;
        for i in 0..n {
            a2s[[i, i]] += ws.stationary()[i];
        }
        let b2s = Array1::from_iter(masked.iter().zip(ws.stationary()).map(|(&y, &p)| y * p));
        worst_l2 = worst_l2.max(l2_norm(&(&f2s - &conjugate_gradient(&a2s, &b2s))));
    }
    assert!(worst_l2 <= 1e-6, "worst l2 closed-form gap {worst_l2:.3e}");

    // l1 solver against cyclic coordinate descent on the same objective.
    let g = gen_random_digraph(n, 90, 11);
    let w = from_graph(&g).unwrap();
    let l_norm = normalized_laplacian(&w).unwrap();
    let bank = heat_kernel_bank(&l_norm, &[2.0, 4.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let labels = Array1::from_iter((0..n).map(|_| match rng.random_range(0..3) {
        0 => -1.0,
        1 => 0.0,
        _ => 1.0,
    }));
    let problem = LabelProblem::new(labels, 0.0).unwrap();
    let lambda = 0.1;
    let sol = ssl_l1(&problem, &bank, lambda, 50_000, 1e-14).unwrap();

    let x = {
        let mask = problem.mask();
        let stack = bank.synthesis_stack();
        let mut x = stack.clone();
        for (i, mut row) in x.rows_mut().into_iter().enumerate() {
            row.mapv_inplace(|v| v * mask[i]);
        }
        x
    };
    let y = problem.labels().clone();
    let width = x.ncols();
    let col_sq: Vec<f64> = (0..width).map(|j| x.column(j).dot(&x.column(j))).collect();
    let mut w_cd = Array1::zeros(width);
    let mut residual = y.clone();
    for _ in 0..5000 {
        for j in 0..width {
            if col_sq[j] == 0.0 {
                continue;
            }
            let xj = x.column(j);
            let rho = xj.dot(&residual) + col_sq[j] * w_cd[j];
            let t = lambda / 2.0;
            let new = if rho > t {
                (rho - t) / col_sq[j]
            } else if rho < -t {
                (rho + t) / col_sq[j]
            } else {
                0.0
            };
            if new != w_cd[j] {
                residual.scaled_add(w_cd[j] - new, &xj.to_owned());
                w_cd[j] = new;
            }
        }
    }
    let obj_cd = {
        let r = &y - &x.dot(&w_cd);
        r.dot(&r) + lambda * w_cd.mapv(f64::abs).sum()
    };
    let gap = (sol.objective - obj_cd).abs();
    assert!(gap <= 1e-6, "l1 objective gap {gap:.3e}");
    println!(
        "criterion 7 PASS: l2 closed forms within {worst_l2:.3e} of CG, l1 objective within {gap:.3e} of coordinate descent"
    );
}

/// Criterion 8: the trace-formula normal equations match a brute-force
/// least-squares fit over 5000 Monte Carlo draws within 2%, and the
/// trace-based Gram matrix matches Monte Carlo second moments within
/// 3 sigma.
#[test]
fn criterion_8_signal_model_normal_equations() {
    let n = 10;
    let degree = 2;
    let g = gen_random_digraph(n, 30, 8);
    let w = from_graph(&g).unwrap();
    let f0 = Array1::from_iter((0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }));
    let sampling = SamplingModel::uniform(n, 0.5, 88).unwrap();
    let mu = digh_core::walk::Measure::counting(n);
    let model = learn_signal_model(
        w.transition(),
        f0.view(),
        &sampling,
        degree,
        &mu,
        MomentEstimate::ClosedForm,
    )
    .unwrap();

    // Brute-force oracle: accumulate the empirical normal equations from
    // raw draws and solve them directly.
    let draws = 5000;
    let mut powers = vec![Array2::eye(n)];
    for _ in 0..degree {
        let next = w.transition().dot(powers.last().unwrap());
        powers.push(next);
    }
    let k1 = degree + 1;
    let mut z_hat = Array2::zeros((k1, k1));
    let mut rhs_hat = Array1::zeros(k1);
    let mut z_samples: Vec<Vec<f64>> = vec![Vec::with_capacity(draws); k1 * k1];
    for i in 0..draws {
        let y = sampling.draw(f0.view(), i as u64);
        let ry: Vec<Array1<f64>> = powers.iter().map(|p| p.dot(&y)).collect();
        for k in 0..k1 {
            rhs_hat[k] += ry[k].dot(&f0);
            for l in 0..k1 {
                let v = ry[k].dot(&ry[l]);
                z_hat[[k, l]] += v;
                z_samples[k * k1 + l].push(v);
            }
        }
    }
    z_hat /= draws as f64;
    rhs_hat /= draws as f64;
    let theta_mc = {
        use ndarray_linalg::Solve;
        z_hat.solve(&rhs_hat).unwrap()
    };
    let rel = l2_norm(&(&model.theta - &theta_mc)) / l2_norm(&model.theta);
    assert!(
        rel <= 0.02,
        "closed-form theta differs from Monte Carlo fit by {rel:.3}"
    );

    let mut worst_sigma: f64 = 0.0;
    for k in 0..k1 {
        for l in 0..k1 {
            let samples = &z_samples[k * k1 + l];
            let mean = samples.iter().sum::<f64>() / draws as f64;
            let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / draws as f64;
            let sigma = (var / draws as f64).sqrt();
            let gap = (model.gram()[[k, l]] - mean).abs();
            if sigma > 0.0 {
                worst_sigma = worst_sigma.max(gap / sigma);
            } else {
                assert!(gap < 1e-12);
            }
        }
    }
    assert!(worst_sigma <= 3.0, "Z entry off by {worst_sigma:.2} sigma");
    println!(
        "criterion 8 PASS: theta within {:.2}% of the Monte Carlo fit, Z within {worst_sigma:.2} sigma",
        rel * 100.0
    );
}

/// Criterion 9: qualitative orderings. Without the external blog dataset
/// the Watts-Strogatz analogues stand in: Laplacian-energy SSL beats the
/// adjacency-regularized method, and signal-model filters on P / P- beat
/// filters on W_norm at matched sampling. When the dataset is supplied via
/// DIGH_POLBLOGS_EDGES / DIGH_POLBLOGS_LABELS, the same orderings are
/// asserted on its largest strongly connected subgraph.
#[test]
fn criterion_9_qualitative_orderings() {
    let n = 64;
    let g = gen_directed_watts_strogatz(n, 2, 0.05, 9).unwrap();
    let labels = Array1::from_iter((0..n).map(|i| if i < n / 2 { 1.0 } else { -1.0 }));

    let accuracy_of = |method: SslMethod| {
        let config = SslEvalConfig {
            method,
            known_fraction: 0.15,
            n_realizations: 200,
            param_grid: default_gamma_grid(),
            seed: 99,
        };
        evaluate_ssl(&g, &labels, &config).unwrap().mean_accuracy
    };
    let laplacian_acc = accuracy_of(SslMethod::NormalizedLaplacian);
    let moura_acc = accuracy_of(SslMethod::Moura);
    assert!(
        laplacian_acc >= moura_acc,
        "Laplacian SSL {laplacian_acc:.3} below adjacency-regularized {moura_acc:.3}"
    );

    // Signal-model ordering at p = 0.3 over 200 fresh draws.
    let w = from_graph(&g).unwrap();
    let p_bar = reversibilized(&w, 0.5).unwrap();
    let w_norm = normalized_adjacency(&g).unwrap();
    let sampling = SamplingModel::uniform(n, 0.3, 7).unwrap();
    let mu = digh_core::walk::Measure::counting(n);
    let model_accuracy = |reference: &Array2<f64>| {
        let model = learn_signal_model(
            reference,
            labels.view(),
            &sampling,
            10,
            &mu,
            MomentEstimate::ClosedForm,
        )
        .unwrap();
        let filter =
            digh_core::filters::PolynomialFilter::new(model.theta.to_vec(), reference.clone())
                .unwrap()
                .dense();
        let mut acc = 0.0;
        for draw in 0..200u64 {
            let y = sampling.draw(labels.view(), 1000 + draw);
            let rec = reconstruct_labels(&filter, y.view());
            acc += label_accuracy(rec.view(), labels.view());
        }
        acc / 200.0
    };
    let acc_p = model_accuracy(w.transition());
    let acc_p_bar = model_accuracy(p_bar.transition());
    let acc_w_norm = model_accuracy(&w_norm);
    assert!(
        acc_p >= acc_w_norm && acc_p_bar >= acc_w_norm,
        "walk-based filters (P {acc_p:.3}, P- {acc_p_bar:.3}) should beat W_norm ({acc_w_norm:.3})"
    );
    println!(
        "criterion 9 PASS (DWS stand-in): SSL {laplacian_acc:.3} >= {moura_acc:.3}; models P {acc_p:.3} / P- {acc_p_bar:.3} >= W_norm {acc_w_norm:.3}"
    );

    match (
        std::env::var("DIGH_POLBLOGS_EDGES"),
        std::env::var("DIGH_POLBLOGS_LABELS"),
    ) {
        (Ok(edges), Ok(label_path)) => {
            let full = DirectedGraph::from_edge_list_file(&edges).unwrap();
            let (sub, mapping) = largest_scc_subgraph(&full);
            println!(
                "criterion 9: blog dataset loaded, largest SCC has {} of {} vertices",
                sub.n_vertices(),
                full.n_vertices()
            );
            assert_eq!(
                sub.n_vertices(),
                793,
                "largest SCC should have 793 vertices"
            );
            let full_labels = read_label_file(&label_path, full.n_vertices()).unwrap();
            let sub_labels = Array1::from_iter(mapping.iter().map(|&old| full_labels[old]));
            let run = |method: SslMethod| {
                let config = SslEvalConfig {
                    method,
                    known_fraction: 0.1,
                    n_realizations: 200,
                    param_grid: default_gamma_grid(),
                    seed: 7,
                };
                evaluate_ssl(&sub, &sub_labels, &config)
                    .unwrap()
                    .mean_accuracy
            };
            let lap = run(SslMethod::NormalizedLaplacian);
            let moura = run(SslMethod::Moura);
            assert!(
                lap >= moura,
                "dataset ordering violated: {lap:.3} < {moura:.3}"
            );
            println!("criterion 9 PASS (dataset): Laplacian {lap:.3} >= R_M {moura:.3}");
        }
        _ => {
            println!(
                "criterion 9 NOTE: blog dataset not supplied (DIGH_POLBLOGS_EDGES / DIGH_POLBLOGS_LABELS unset); DWS stand-ins above apply"
            );
        }
    }
}

/// Criterion 10: the consolidated property suite — row stochasticity,
/// shared stationary distribution, adjointness, projector completeness and
/// idempotence, alpha-invariance of the random walk Laplacian.
#[test]
fn criterion_10_property_suite() {
    let mut worst_row: f64 = 0.0;
    let mut worst_shared: f64 = 0.0;
    let mut worst_adjoint: f64 = 0.0;
    let mut worst_projector: f64 = 0.0;
    let mut worst_alpha: f64 = 0.0;
    for seed in 0..4u64 {
        let n = 24;
        let g = gen_random_digraph(n, 70, seed);
        let w = from_graph(&g).unwrap();
        let reversed = time_reversal(&w).unwrap();

        let mut walks = vec![reversed.clone()];
        for &alpha in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            walks.push(reversibilized(&w, alpha).unwrap());
        }
        for &gamma in &[0.0, 0.5] {
            walks.push(lazy(&w, gamma).unwrap());
        }
        let g2 = gen_random_digraph(n, 70, 1000 + seed);
        walks.push(digh_core::walk::google_matrix(&g2, 0.85).unwrap());
        walks.push(digh_core::walk::rank_one_walk(&g2, 1e-4).unwrap());
        for walk in &walks {
            for row in walk.transition().rows() {
                worst_row = worst_row.max((row.sum() - 1.0).abs());
            }
            let drift = walk.stationary().dot(walk.transition()) - walk.stationary();
            worst_shared = worst_shared.max(drift.mapv(f64::abs).sum());
        }

        // Adjointness of the reversal.
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        for _ in 0..10 {
            let f = random_signal(n, &mut rng);
            let h = random_signal(n, &mut rng);
            let lhs = digh_core::linalg::dot_weighted(
                f.view(),
                w.transition().dot(&h).view(),
                w.stationary().view(),
            );
            let rhs = digh_core::linalg::dot_weighted(
                reversed.transition().dot(&f).view(),
                h.view(),
                w.stationary().view(),
            );
            worst_adjoint = worst_adjoint.max((lhs - rhs).abs() / (l2_norm(&f) * l2_norm(&h)));
        }

        // Projector family.
        let dec = decompose(w.transition()).unwrap();
        let mut sum: Array2<f64> = Array2::zeros((n, n));
        for group in dec.groups() {
            sum += &group.projector;
            let idem = group.projector.dot(&group.projector);
            worst_projector = worst_projector.max(max_abs((&idem - &group.projector).view()));
        }
        for i in 0..n {
            sum[[i, i]] -= 1.0;
        }
        worst_projector = worst_projector.max(max_abs(sum.view()));

        // alpha-invariance of L_RW.
        let base = random_walk_laplacian(&w).unwrap();
        for &alpha in &[0.0, 0.3, 0.7, 1.0] {
            let la = random_walk_laplacian(&reversibilized(&w, alpha).unwrap()).unwrap();
            worst_alpha = worst_alpha.max(max_abs((&la - &base).view()));
        }

        // Dirichlet energy is alpha-invariant too.
        let f = random_signal(n, &mut rng);
        let e0 = dirichlet_energy(f.view(), &w);
        for &alpha in &[0.0, 0.5, 1.0] {
            let ea = dirichlet_energy(f.view(), &reversibilized(&w, alpha).unwrap());
            worst_alpha = worst_alpha.max((ea - e0).abs());
        }

        // The isometry preserves inner products (spot check).
        let pi = w.stationary_measure();
        let f = random_signal(n, &mut rng);
        let phi_f = isometry_to_pi(&f, &pi).unwrap();
        let back: f64 = phi_f
            .iter()
            .zip(phi_f.iter())
            .zip(pi.weights())
            .map(|((a, b), &p)| a * b * p)
            .sum();
        worst_adjoint = worst_adjoint.max((back - f.dot(&f)).abs() / f.dot(&f));
    }
    assert!(worst_row <= 1e-12, "row sums {worst_row:.3e}");
    assert!(worst_shared <= 1e-12, "shared pi {worst_shared:.3e}");
    assert!(worst_adjoint <= 1e-10, "adjointness {worst_adjoint:.3e}");
    assert!(worst_projector <= 1e-8, "projectors {worst_projector:.3e}");
    assert!(worst_alpha <= 1e-12, "alpha invariance {worst_alpha:.3e}");
    println!(
        "criterion 10 PASS: rows {worst_row:.1e}, shared pi {worst_shared:.1e}, adjointness {worst_adjoint:.1e}, projectors {worst_projector:.1e}, alpha-invariance {worst_alpha:.1e}"
    );
}
