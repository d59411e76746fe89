use pdangles::mesh::{betti_numbers, relative_betti_numbers};
use pdangles::mesh::{
    generate_annulus, generate_flat_torus, generate_punctured_torus, load_off, write_off, SimplicialComplex,
};
use proptest::prelude::*;

fn assert_dd_zero(c: &SimplicialComplex) {
    for p in 0..c.dim().saturating_sub(1) {
        let dd = c.incidence(p + 1).compose(c.incidence(p));
        assert!(
            dd.iter().all(|row| row.iter().all(|&(_, v)| v == 0)),
            "d∘d ≠ 0 in degree {p}"
        );
    }
}

fn alternating(b: &[usize]) -> i64 {
    b.iter()
        .enumerate()
        .map(|(i, &x)| if i % 2 == 0 { x as i64 } else { -(x as i64) })
        .sum()
}

#[test]
fn generated_meshes_have_expected_topology() {
    let cases = [
        (
            generate_annulus(3, 10, 1.0, 2.0).unwrap(),
            vec![1, 1, 0],
            vec![0, 1, 1],
            2,
        ),
        (generate_punctured_torus(6, 2).unwrap(), vec![1, 2, 0], vec![0, 2, 1], 1),
        (generate_flat_torus(5).unwrap(), vec![1, 2, 1], vec![1, 2, 1], 0),
    ];
    for (mesh, betti, relative, circles) in cases {
        let c = &mesh.complex;
        assert_eq!(betti_numbers(c), betti);
        assert_eq!(relative_betti_numbers(c), relative);
        assert_eq!(c.euler_characteristic(), alternating(&betti));
        assert_eq!(c.connected_components(), 1);
        let boundary_components = c.boundary().map_or(0, |b| b.complex.connected_components());
        assert_eq!(boundary_components, circles);
        assert_dd_zero(c);
    }
}

#[test]
fn annulus_area_converges_to_exact() {
    let exact = std::f64::consts::PI * (4.0 - 1.0);
    let coarse = (generate_annulus(2, 16, 1.0, 2.0).unwrap().total_volume() - exact).abs();
    let fine = (generate_annulus(4, 32, 1.0, 2.0).unwrap().total_volume() - exact).abs();
    assert!(fine < 0.3 * coarse);
}

#[test]
fn boundary_is_a_closed_curve_with_consistent_orientation() {
    let mesh = generate_annulus(2, 8, 1.0, 2.0).unwrap();
    let b = mesh.complex.boundary().unwrap();
    assert!(b.complex.is_closed());
    assert_eq!(b.complex.count(0), b.complex.count(1));
    assert_eq!(b.complex.count(0), 16);
    assert_eq!(mesh.complex.boundary_indices(1).len(), 16);
    assert_eq!(mesh.complex.boundary_indices(2).len(), 0);
}

#[test]
fn off_errors_are_reported() {
    for bad in [
        "",
        "OFF\n3 1 0\n0 0 0\n1 0 0\n",
        "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n",
        "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n4 0 1 2 3\n",
        "OFF\n3 1 0\n0 0 0\n1 0 0\n2 0 0\n3 0 1 2\n",
    ] {
        assert!(load_off(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn degenerate_cycle_rejected() {
    let text = "OFF\n4 3 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 2\n3 0 1 3\n3 0 2 1\n";
    assert!(load_off(text).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn annulus_invariants(radial in 1usize..4, angular in 3usize..12, inner in 0.2f64..1.0, width in 0.2f64..2.0) {
        let mesh = generate_annulus(radial, angular, inner, inner + width).unwrap();
        let c = &mesh.complex;
        assert_dd_zero(c);
        prop_assert_eq!(c.euler_characteristic(), 0);
        prop_assert_eq!(betti_numbers(c), vec![1, 1, 0]);
        prop_assert_eq!(relative_betti_numbers(c), vec![0, 1, 1]);
        let back = load_off(&write_off(&mesh).unwrap()).unwrap();
        prop_assert_eq!(back.complex.simplices(2), c.simplices(2));
        prop_assert!((back.total_volume() - mesh.total_volume()).abs() < 1e-9);
    }

    #[test]
    fn punctured_torus_invariants(divisions in 3usize..8, hole_seed in 0usize..8) {
        let hole = 1 + hole_seed % (divisions - 2);
        let mesh = generate_punctured_torus(divisions, hole).unwrap();
        let c = &mesh.complex;
        assert_dd_zero(c);
        prop_assert_eq!(c.euler_characteristic(), -1);
        prop_assert_eq!(betti_numbers(c), vec![1, 2, 0]);
        prop_assert_eq!(relative_betti_numbers(c), vec![0, 2, 1]);
    }
}
