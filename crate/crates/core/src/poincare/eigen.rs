use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::PoincareInstance;
use crate::{Error, Result};

/// Largest domain the dense solver accepts.
pub const DEFAULT_EIGEN_LIMIT: usize = 3000;

/// Exact σ = 2 constant of an instance with a function attaining it.
#[derive(Clone, Debug, Serialize)]
pub struct OptimalConstant {
    pub value: f64,
    /// Extremal function on the domain, ν-centered on the inner ball and of
    /// unit Euclidean norm.
    pub extremal: Vec<f64>,
    /// `‖N·u − θ·D·u‖` for the returned `u`.
    pub residual: f64,
}

/// The centered form `N` on the inner ball and the gradient form `D` on the
/// dilated ball, so that `LHS(u) = uᵀNu` and `RHS(u) = uᵀDu` at σ = 2.
fn quadratic_forms(inst: &PoincareInstance<'_>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = inst.domain().len();
    let nu = inst.local_measure();
    let b = inst.ball_len();
    let mass: f64 = nu[..b].iter().sum();
    let mut big_n = DMatrix::zeros(n, n);
    for i in 0..b {
        big_n[(i, i)] += nu[i];
        for j in 0..b {
            big_n[(i, j)] -= nu[i] * nu[j] / mass;
        }
    }
    let mut big_d = DMatrix::zeros(n, n);
    for y in 0..inst.dilated_len() {
        for &z in inst.local_neighbors(y) {
            let w = nu[y];
            big_d[(y, y)] += w;
            big_d[(z, z)] += w;
            big_d[(y, z)] -= w;
            big_d[(z, y)] -= w;
        }
    }
    (big_n, big_d)
}

/// `sup LHS(u)/RHS(u)` over non-constant `u` at σ = 2: the largest
/// generalized eigenvalue of the pencil `(N, D)`.
///
/// Both forms vanish on constants, so the kernel is removed by pinning the
/// center to 0. On the pinned subspace `D` must be positive definite; its
/// Cholesky factor `L` turns the pencil into the symmetric matrix
/// `L⁻¹ N L⁻ᵀ`.
pub fn optimal_constant_sigma2(inst: &PoincareInstance<'_>) -> Result<OptimalConstant> {
    optimal_constant_sigma2_with_limit(inst, DEFAULT_EIGEN_LIMIT)
}

pub fn optimal_constant_sigma2_with_limit(inst: &PoincareInstance<'_>, limit: usize) -> Result<OptimalConstant> {
    if inst.sigma() != 2.0 {
        return Err(Error::input(format!("the exact constant needs sigma = 2, got {}", inst.sigma())));
    }
    let n = inst.domain().len();
    if n > limit {
        return Err(Error::Budget { what: "dense eigensolver domain vertices", limit: limit as u64 });
    }
    if n == 1 {
        return Ok(OptimalConstant { value: 0.0, extremal: vec![0.0], residual: 0.0 });
    }
    let (big_n, big_d) = quadratic_forms(inst);
    let pinned_n = big_n.view((1, 1), (n - 1, n - 1)).into_owned();
    let pinned_d = big_d.view((1, 1), (n - 1, n - 1)).into_owned();
    let chol = pinned_d.cholesky().ok_or_else(|| {
        Error::input("the gradient form has a kernel larger than the constants; the domain is disconnected")
    })?;
    let l = chol.l();
    let half = l
        .solve_lower_triangular(&pinned_n)
        .ok_or_else(|| Error::Numerical { message: "singular Cholesky factor".into(), residual: f64::NAN })?;
    let mut pencil = l
        .solve_lower_triangular(&half.transpose())
        .ok_or_else(|| Error::Numerical { message: "singular Cholesky factor".into(), residual: f64::NAN })?;
    pencil = (&pencil + pencil.transpose()) * 0.5;

    let eig = SymmetricEigen::new(pencil);
    let (top, &theta) =
        eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("pencil is nonempty");
    let theta = theta.max(0.0);
    let v = eig.eigenvectors.column(top).into_owned();
    let y = l
        .transpose()
        .solve_upper_triangular(&v)
        .ok_or_else(|| Error::Numerical { message: "singular Cholesky factor".into(), residual: f64::NAN })?;

    let mut u = DVector::zeros(n);
    u.rows_mut(1, n - 1).copy_from(&y);
    let mean = inst.ball_mean(u.as_slice())?;
    u.add_scalar_mut(-mean);
    let norm = u.norm();
    if norm > 0.0 {
        u /= norm;
    }
    let residual = (&big_n * &u - theta * (&big_d * &u)).norm();
    let scale = 1.0_f64.max(big_n.amax()).max(theta * big_d.amax());
    if !(residual <= 1e-8 * scale * u.norm().max(1.0)) {
        return Err(Error::Numerical {
            message: "generalized eigenpair fails the stationarity check".into(),
            residual,
        });
    }
    Ok(OptimalConstant { value: theta, extremal: u.as_slice().to_vec(), residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmgraph::generators::{complete_graph, cycle_graph, path_graph, random_connected_graph};
    use crate::MeasuredGraph;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn whole(g: &MeasuredGraph, center: usize) -> PoincareInstance<'_> {
        PoincareInstance::new(g, center, g.vertex_count() as f64, 2.0, 1.0).unwrap()
    }

    #[test]
    fn cycles_match_closed_form() {
        for n in [4usize, 5, 6, 12, 50] {
            let g = cycle_graph(n);
            let got = optimal_constant_sigma2(&whole(&g, 0)).unwrap();
            let expected = 1.0 / (2.0 * (2.0 - 2.0 * (2.0 * PI / n as f64).cos()));
            assert!((got.value - expected).abs() <= 1e-9 * expected, "C_{n}: {} vs {expected}", got.value);
        }
    }

    #[test]
    fn small_pencils_by_hand() {
        let p3 = path_graph(3);
        let inst = PoincareInstance::new(&p3, 1, 1.0, 2.0, 1.0).unwrap();
        assert!((optimal_constant_sigma2(&inst).unwrap().value - 0.5).abs() < 1e-12);
        let edge = path_graph(2);
        assert!((optimal_constant_sigma2(&whole(&edge, 0)).unwrap().value - 0.25).abs() < 1e-12);
        // K_n: LHS = ‖u‖² on mean-zero u, RHS = 2n‖u‖²
        for n in [3usize, 5, 8] {
            let g = complete_graph(n);
            let got = optimal_constant_sigma2(&whole(&g, 0)).unwrap().value;
            assert!((got - 1.0 / (2.0 * n as f64)).abs() < 1e-12, "K_{n}: {got}");
        }
        let single = MeasuredGraph::counting(1, &[]).unwrap();
        assert_eq!(optimal_constant_sigma2(&whole(&single, 0)).unwrap().value, 0.0);
    }

    #[test]
    fn rejects_other_exponents_and_large_domains() {
        let g = cycle_graph(10);
        let inst = PoincareInstance::new(&g, 0, 5.0, 1.0, 1.0).unwrap();
        assert!(matches!(optimal_constant_sigma2(&inst), Err(Error::Input(_))));
        let inst = inst.with_sigma(2.0).unwrap();
        assert!(matches!(optimal_constant_sigma2_with_limit(&inst, 5), Err(Error::Budget { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        /// The extremal function attains the value, satisfies the pencil
        /// equation, and no random function beats it.
        #[test]
        fn extremal_is_stationary_and_maximal(seed in 0u64..5000, radius in 1usize..4, lambda in 1usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_connected_graph(&mut rng, 30, 0.08, (0.1, 10.0)).unwrap();
            let inst = PoincareInstance::new(&g, seed as usize % 30, radius as f64, 2.0, lambda as f64).unwrap();
            let opt = optimal_constant_sigma2(&inst).unwrap();
            let u = &opt.extremal;
            prop_assert!(opt.residual <= 1e-8 * u.iter().map(|x| x * x).sum::<f64>().sqrt());
            if let Some(r) = inst.ratio(u).unwrap() {
                prop_assert!((r - opt.value).abs() <= 1e-9 * opt.value.max(1e-300));
            }
            use rand::Rng;
            for _ in 0..20 {
                let v: Vec<f64> = (0..u.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                if let Some(r) = inst.ratio(&v).unwrap() {
                    prop_assert!(r <= opt.value * (1.0 + 1e-9));
                }
            }
        }
    }
}
