//! Randomized structural invariants: norm axioms of the Luxemburg functional,
//! order reversal of conjugation, and exactness of the discrete duality pair.

use proptest::prelude::*;

use musielak::catalog::from_key;
use musielak::field::{norm, VecField};
use musielak::grid::GridDomain;
use musielak::modular::luxemburg_norm;
use musielak::profile::{conjugate_1d, SampledProfile1D};
use musielak::solver::{apply_div, apply_grad};

fn small_grid() -> GridDomain {
    GridDomain::unit_box(1.0, 2, 2, 5, false)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn luxemburg_is_absolutely_homogeneous(
        c in -4.0f64..4.0,
        vals in prop::collection::vec(-2.0f64..2.0, 2 * 16 * 2),
    ) {
        prop_assume!(c.abs() > 1e-3);
        let grid = small_grid();
        let m = from_key("p_laplace(2)", 2).unwrap();
        let mut xi = VecField::zeros(&grid);
        xi.values.copy_from_slice(&vals);
        let n1 = luxemburg_norm(&m, &xi).unwrap();
        let n2 = luxemburg_norm(&m, &xi.scale(c)).unwrap();
        prop_assert!((n2 - c.abs() * n1).abs() <= 1e-6 * (1.0 + n2));
    }

    #[test]
    fn luxemburg_satisfies_the_triangle_inequality(
        a in prop::collection::vec(-2.0f64..2.0, 2 * 16 * 2),
        b in prop::collection::vec(-2.0f64..2.0, 2 * 16 * 2),
    ) {
        let grid = small_grid();
        let m = from_key("p_laplace(3)", 2).unwrap();
        let mut xa = VecField::zeros(&grid);
        xa.values.copy_from_slice(&a);
        let mut xb = VecField::zeros(&grid);
        xb.values.copy_from_slice(&b);
        let mut xs = xa.clone();
        for (v, w) in xs.values.iter_mut().zip(&xb.values) {
            *v += w;
        }
        let na = luxemburg_norm(&m, &xa).unwrap();
        let nb = luxemburg_norm(&m, &xb).unwrap();
        let ns = luxemburg_norm(&m, &xs).unwrap();
        prop_assert!(ns <= na + nb + 1e-7 * (1.0 + na + nb));
    }

    #[test]
    fn conjugation_reverses_pointwise_order(scale in 1.0f64..3.0) {
        // f <= g pointwise implies g* <= f*
        let nodes: Vec<f64> = (0..64).map(|i| i as f64 / 4.0).collect();
        let f = SampledProfile1D::new(nodes.clone(), nodes.iter().map(|s| s * s).collect()).unwrap();
        let g = SampledProfile1D::new(nodes.clone(), nodes.iter().map(|s| scale * s * s).collect()).unwrap();
        let fc = conjugate_1d(&f).unwrap();
        let gc = conjugate_1d(&g).unwrap();
        // compare on the shared part of the dual grids via interpolation
        for &t in fc.nodes.iter().filter(|&&t| t <= gc.nodes[gc.nodes.len() - 1]) {
            prop_assert!(gc.interpolate(t) <= fc.interpolate(t) + 1e-9 * (1.0 + fc.interpolate(t).abs()));
        }
    }

    #[test]
    fn divergence_is_the_negative_adjoint_of_the_gradient(
        w in prop::collection::vec(-1.0f64..1.0, 25),
        v in prop::collection::vec(-1.0f64..1.0, 2 * 16),
    ) {
        let g = GridDomain::unit_box(1.0, 1, 2, 5, false);
        let mut wz = w.clone();
        for i in 0..g.node_count() {
            if g.is_boundary(i) {
                wz[i] = 0.0;
            }
        }
        let lhs: f64 = apply_div(&g, &v).iter().zip(&wz).map(|(a, b)| a * b).sum();
        let rhs: f64 = -apply_grad(&g, &wz).iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * (norm(&v) * norm(&wz) + 1.0));
    }
}
