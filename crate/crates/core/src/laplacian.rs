//! The three directed-graph Laplacians built from an ergodic random walk.

use ndarray::Array2;

use crate::error::Result;
use crate::linalg::{positive_sqrt, scale_rows};
use crate::walk::{similar_operator_t, time_reversal, RandomWalk, PI_POSITIVITY_THRESHOLD};

/// Which Laplacian to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// `L_norm = I - (Pi^{1/2} P Pi^{-1/2} + Pi^{-1/2} P^T Pi^{1/2}) / 2`,
    /// symmetric positive semidefinite on `l2(V)`.
    Normalized,
    /// `L_RW = I - (P + P*) / 2`, self-adjoint on `l2(V, pi)`.
    RandomWalk,
    /// `L = Pi - (Pi P + P^T Pi) / 2`, symmetric positive semidefinite.
    Combinatorial,
}

/// Builds the Laplacian of the requested kind.
pub fn laplacian(w: &RandomWalk, kind: LaplacianKind) -> Result<Array2<f64>> {
    match kind {
        LaplacianKind::Normalized => normalized_laplacian(w),
        LaplacianKind::RandomWalk => random_walk_laplacian(w),
        LaplacianKind::Combinatorial => combinatorial_laplacian(w),
    }
}

/// Normalized directed Laplacian `I - (T + T^T) / 2` with
/// `T = Pi^{1/2} P Pi^{-1/2}`; symmetric by construction.
pub fn normalized_laplacian(w: &RandomWalk) -> Result<Array2<f64>> {
    let t = similar_operator_t(w)?;
    let n = t.nrows();
    let mut l = -(&t + &t.t()) / 2.0;
    for i in 0..n {
        l[[i, i]] += 1.0;
    }
    Ok(l)
}

/// Random walk Laplacian `I - (P + P*) / 2 = I - P-`, invariant across the
/// whole reversibilization family.
pub fn random_walk_laplacian(w: &RandomWalk) -> Result<Array2<f64>> {
    let reversed = time_reversal(w)?;
    let n = w.n_vertices();
    let mut l = -(w.transition() + reversed.transition()) / 2.0;
    for i in 0..n {
        l[[i, i]] += 1.0;
    }
    Ok(l)
}

/// Combinatorial Laplacian `Pi - (Pi P + P^T Pi) / 2`; symmetric because
/// `(Pi P)^T = P^T Pi`.
pub fn combinatorial_laplacian(w: &RandomWalk) -> Result<Array2<f64>> {
    // Reuse the positivity guard so all three Laplacians fail alike.
    positive_sqrt(w.stationary().view(), PI_POSITIVITY_THRESHOLD)?;
    let pi = w.stationary();
    let pi_p = scale_rows(pi.view(), w.transition());
    let mut l = -(&pi_p + &pi_p.t()) / 2.0;
    for i in 0..w.n_vertices() {
        l[[i, i]] += pi[i];
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_directed_cycle, gen_random_digraph, DirectedGraph};
    use crate::linalg::{dot_weighted, max_abs, scale_cols};
    use crate::walk::{from_graph, lazy, reversibilized};
    use ndarray::{Array1, Array2};
    use ndarray_linalg::{EigValsh, UPLO};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Classical normalized Laplacian of an undirected graph,
    /// `I - D^{-1/2} W D^{-1/2}`; the independent oracle for the
    /// undirected-consistency checks.
    fn classical_normalized(w: &Array2<f64>) -> Array2<f64> {
        let n = w.nrows();
        let d: Array1<f64> = w.rows().into_iter().map(|r| r.sum()).collect();
        let mut l = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                l[[i, j]] = f64::from(u8::from(i == j)) - w[[i, j]] / (d[i] * d[j]).sqrt();
            }
        }
        l
    }

    fn undirected_test_graph() -> DirectedGraph {
        DirectedGraph::from_arcs(
            4,
            &[
                (0, 1),
                (1, 0),
                (1, 2),
                (2, 1),
                (2, 3),
                (3, 2),
                (3, 0),
                (0, 3),
                (0, 2),
                (2, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn normalized_matches_classical_on_undirected_graphs() {
        let g = undirected_test_graph();
        let w = from_graph(&g).unwrap();
        let ours = normalized_laplacian(&w).unwrap();
        let classical = classical_normalized(&g.adjacency_matrix());
        assert!(max_abs((&ours - &classical).view()) < 1e-12);
    }

    #[test]
    fn normalized_is_symmetric_psd_and_annihilates_sqrt_pi() {
        let g = gen_random_digraph(14, 30, 2);
        let w = from_graph(&g).unwrap();
        let l = normalized_laplacian(&w).unwrap();
        assert!(max_abs((&l - &l.t()).view()) < 1e-12);
        let eigs: Array1<f64> = l.eigvalsh(UPLO::Lower).unwrap();
        assert!(eigs.iter().all(|&e| e >= -1e-10));
        // Null vector Pi^{1/2} 1.
        let sqrt_pi = w.stationary().mapv(f64::sqrt);
        let image = l.dot(&sqrt_pi);
        assert!(image.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn lazy_cycle_normalized_spectrum_matches_formula() {
        // Oracle: eigenvalues of the lazy-cycle normalized Laplacian are
        // (1 - gamma) (1 - cos(2 pi k / N)).
        let g = gen_directed_cycle(4).unwrap();
        let w = lazy(&from_graph(&g).unwrap(), 0.5).unwrap();
        let l = normalized_laplacian(&w).unwrap();
        let mut eigs: Vec<f64> = l.eigvalsh(UPLO::Lower).unwrap().to_vec();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expected: Vec<f64> = (0..4)
            .map(|k| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / 4.0).cos()))
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, v) in expected.iter().zip([0.0, 0.5, 0.5, 1.0]) {
            assert!((e - v).abs() < 1e-15);
        }
        for (got, want) in eigs.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn random_walk_laplacian_of_reversible_chain_is_i_minus_p() {
        let g = undirected_test_graph();
        let w = from_graph(&g).unwrap();
        let l = random_walk_laplacian(&w).unwrap();
        let mut expected = -w.transition().clone();
        for i in 0..g.n_vertices() {
            expected[[i, i]] += 1.0;
        }
        assert!(max_abs((&l - &expected).view()) < 1e-12);
    }

    #[test]
    fn random_walk_laplacian_is_alpha_invariant() {
        let g = gen_random_digraph(12, 25, 5);
        let w = from_graph(&g).unwrap();
        let base = random_walk_laplacian(&w).unwrap();
        for &alpha in &[0.0, 0.3, 0.7, 1.0] {
            let wa = reversibilized(&w, alpha).unwrap();
            let la = random_walk_laplacian(&wa).unwrap();
            assert!(max_abs((&la - &base).view()) < 1e-12);
        }
        // Row sums vanish.
        for row in base.rows() {
            assert!(row.sum().abs() < 1e-12);
        }
    }

    #[test]
    fn combinatorial_matches_degree_form_on_undirected_graphs() {
        // pi = d / vol, so L should be (D - W_sym) / vol with
        // W_sym = (W + W^T)/2.
        let g = undirected_test_graph();
        let w = from_graph(&g).unwrap();
        let l = combinatorial_laplacian(&w).unwrap();
        let adj = g.adjacency_matrix();
        let vol: f64 = g.out_degrees().sum();
        let mut expected = -(&adj + &adj.t()) / 2.0;
        for i in 0..g.n_vertices() {
            expected[[i, i]] += g.out_degrees()[i];
        }
        expected /= vol;
        assert!(max_abs((&l - &expected).view()) < 1e-12);
    }

    #[test]
    fn combinatorial_identities() {
        let g = gen_random_digraph(13, 30, 7);
        let w = from_graph(&g).unwrap();
        let l = combinatorial_laplacian(&w).unwrap();
        // L 1 = 0.
        let ones = Array1::ones(13);
        assert!(l.dot(&ones).iter().all(|v: &f64| v.abs() < 1e-12));
        // L = Pi L_RW.
        let l_rw = random_walk_laplacian(&w).unwrap();
        let pi_l_rw = scale_rows(w.stationary().view(), &l_rw);
        assert!(max_abs((&l - &pi_l_rw).view()) < 1e-12);
        // L_norm = Pi^{1/2} L_RW Pi^{-1/2}.
        let sqrt_pi = w.stationary().mapv(f64::sqrt);
        let inv_sqrt_pi = sqrt_pi.mapv(|v| 1.0 / v);
        let conjugated = scale_rows(sqrt_pi.view(), &scale_cols(&l_rw, inv_sqrt_pi.view()));
        let l_norm = normalized_laplacian(&w).unwrap();
        assert!(max_abs((&l_norm - &conjugated).view()) < 1e-12);
    }

    #[test]
    fn quadratic_forms_agree_under_isometry() {
        let n = 11;
        let g = gen_random_digraph(n, 22, 3);
        let w = from_graph(&g).unwrap();
        let l_rw = random_walk_laplacian(&w).unwrap();
        let l_norm = normalized_laplacian(&w).unwrap();
        let sqrt_pi = w.stationary().mapv(f64::sqrt);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..25 {
            let f = Array1::from_iter((0..n).map(|_| rng.random_range(-1.0..1.0)));
            let lhs = dot_weighted(f.view(), l_rw.dot(&f).view(), w.stationary().view());
            let f_prime = &f * &sqrt_pi;
            let rhs = f_prime.dot(&l_norm.dot(&f_prime));
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn kind_selector_dispatches() {
        let g = gen_random_digraph(8, 16, 1);
        let w = from_graph(&g).unwrap();
        assert_eq!(
            laplacian(&w, LaplacianKind::Normalized).unwrap(),
            normalized_laplacian(&w).unwrap()
        );
        assert_eq!(
            laplacian(&w, LaplacianKind::RandomWalk).unwrap(),
            random_walk_laplacian(&w).unwrap()
        );
        assert_eq!(
            laplacian(&w, LaplacianKind::Combinatorial).unwrap(),
            combinatorial_laplacian(&w).unwrap()
        );
    }
}
