//! Randomized invariants of the discrete operators, the flow step and the
//! field container.

use proptest::prelude::*;
use sphereflow::compatibility::check_compat;
use sphereflow::flow::{step, FlowConfig};
use sphereflow::operators::{dirichlet_energy, grad_inner, inner, l2_norm, laplacian, project_tangent, tension};
use sphereflow::state::io::{read_field, write_field};
use sphereflow::state::{cosine_forward, cosine_inverse, make_grid, normalize_to_sphere, BoundaryMode, Grid, Vec3Field};

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (1usize..=2, 5usize..=12, 5usize..=9, 0.5f64..4.0).prop_map(|(dim, n0, n1, l)| {
        make_grid(dim, &[l, 0.7 * l][..dim], &[n0, n1][..dim], BoundaryMode::NeumannMirror).unwrap()
    })
}

fn field_on(g: Grid) -> impl Strategy<Value = Vec3Field> {
    prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), g.len())
        .prop_map(move |d| Vec3Field::from_vec(g, d).unwrap())
}

fn grid_and_fields() -> impl Strategy<Value = (Vec3Field, Vec3Field)> {
    grid_strategy().prop_flat_map(|g| (field_on(g), field_on(g)))
}

/// Smooth sphere data: a small random rotation profile of the pole.
fn smooth_sphere(g: Grid, c: [f64; 3]) -> sphereflow::state::SphereField {
    let l = g.extents()[0];
    normalize_to_sphere(&Vec3Field::from_fn(g, |x| {
        let s = std::f64::consts::PI * x[0] / l;
        [c[0] * s.cos(), c[1] * (2.0 * s).cos(), 1.0 + c[2] * s.cos()]
    }))
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_symmetric_and_negative((f, h) in grid_and_fields()) {
        let scale = l2_norm(&laplacian(&f)).max(1.0) * l2_norm(&h).max(1.0);
        let a = inner(&laplacian(&f), &h);
        prop_assert!((a - inner(&f, &laplacian(&h))).abs() <= 1e-12 * scale);
        prop_assert!((a + grad_inner(&f, &h)).abs() <= 1e-12 * scale);
        prop_assert!(grad_inner(&f, &f) >= -1e-12 * scale);
    }

    #[test]
    fn cosine_transform_roundtrip((f, _) in grid_and_fields()) {
        let back = cosine_inverse(&cosine_forward(&f).unwrap());
        prop_assert!(l2_norm(&(&back - &f)) <= 1e-12 * l2_norm(&f).max(1.0));
    }

    #[test]
    fn normalization_and_tangent_projection((f, w) in grid_and_fields()) {
        prop_assume!(f.norms().data().iter().all(|&n| n > 1e-3));
        let u = normalize_to_sphere(&f).unwrap();
        prop_assert!(u.unit_drift() <= 1e-15);
        let p = project_tangent(&w, &u);
        prop_assert!(p.as_field().tangency_drift(&u) <= 1e-14);
        let again = project_tangent(p.as_field(), &u);
        prop_assert!(l2_norm(&(again.as_field() - p.as_field())) <= 1e-14 * l2_norm(&w).max(1.0));
        prop_assert!(tension(&u).as_field().tangency_drift(&u) <= 1e-10 * laplacian(&f).max_norm().max(1.0));
    }

    #[test]
    fn field_container_roundtrip_is_bitwise((f, _) in grid_and_fields()) {
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        let back = read_field(buf.as_slice()).unwrap();
        prop_assert_eq!(back.data(), f.data());
        prop_assert!(back.grid().compatible(f.grid()));
    }

    #[test]
    fn projected_step_stays_on_sphere_and_dissipates(
        c in prop::array::uniform3(-0.5f64..0.5),
        eps in 0.0f64..0.5,
    ) {
        let g = make_grid(1, &[3.0], &[33], BoundaryMode::NeumannMirror).unwrap();
        let u = smooth_sphere(g, c);
        let cfg = FlowConfig { epsilon: eps, dt: 1e-3, t_end: 1e-3, ..Default::default() };
        let v = step(u.as_field(), &cfg).unwrap();
        prop_assert!(v.unit_drift() <= 1e-14);
        let (e0, e1) = (dirichlet_energy(u.as_field()), dirichlet_energy(&v));
        prop_assert!(e1 <= e0 * (1.0 + 1e-9) + 1e-14);
    }

    #[test]
    fn even_cosine_data_is_order_zero_compatible(c in prop::array::uniform3(-0.5f64..0.5)) {
        let g = make_grid(1, &[3.0], &[65], BoundaryMode::NeumannMirror).unwrap();
        let rep = check_compat(&smooth_sphere(g, c), 1, None).unwrap();
        prop_assert!(rep.per_order[0].pass);
        prop_assert!(rep.verdicts_agree());
    }
}
