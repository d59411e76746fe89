use nalgebra::{DMatrix, DVector};
use pdangles::dtn::Dtn;
use pdangles::forms::{Carrier, Cochain, FormSpace};
use pdangles::hodge::HodgeDegree;
use pdangles::linalg::{column_space, pinv, subspace_distance};
use pdangles::mesh::{generate_annulus, generate_punctured_torus, load_off, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn meshes() -> Vec<(&'static str, Mesh)> {
    vec![
        ("annulus", generate_annulus(2, 8, 1.0, 2.0).unwrap()),
        ("punctured torus", generate_punctured_torus(8, 2).unwrap()),
    ]
}

fn random(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Unit disk: `rings` concentric rings, ring i has 6i vertices.
fn disk_off(rings: usize) -> String {
    let mut pts = vec![(0.0f64, 0.0f64)];
    let mut start = vec![0usize];
    for i in 1..=rings {
        start.push(pts.len());
        let r = i as f64 / rings as f64;
        for j in 0..6 * i {
            let t = 2.0 * std::f64::consts::PI * j as f64 / (6 * i) as f64;
            pts.push((r * t.cos(), r * t.sin()));
        }
    }
    let mut faces = Vec::new();
    for i in 1..=rings {
        let (inner_n, outer_n) = (6 * (i - 1), 6 * i);
        let inner = |k: usize| if i == 1 { 0 } else { start[i - 1] + k % inner_n };
        let outer = |k: usize| start[i] + k % outer_n;
        for s in 0..6 {
            for k in 0..i {
                let o = s * i + k;
                let ik = s * (i - 1) + k;
                faces.push([inner(ik), outer(o), outer(o + 1)]);
                if k + 1 < i {
                    faces.push([inner(ik), outer(o + 1), inner(ik + 1)]);
                }
            }
        }
    }
    let mut text = format!("OFF\n{} {} 0\n", pts.len(), faces.len());
    for (x, y) in &pts {
        text.push_str(&format!("{x} {y} 0\n"));
    }
    for f in &faces {
        text.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    text
}

#[test]
fn zero_order_dtn_on_disk_is_normal_derivative() {
    let mut errors = Vec::new();
    for rings in [2, 4, 8] {
        let mesh = load_off(&disk_off(rings)).unwrap();
        let fs = FormSpace::new(&mesh).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        let coords = mesh.geometry.vertex_coords.as_ref().unwrap();
        let verts: Vec<usize> = fs
            .boundary_indices(0)
            .iter()
            .map(|&i| mesh.complex.simplices(0)[i][0])
            .collect();
        let k = 2.0;
        let theta: Vec<f64> = verts.iter().map(|&v| coords[v][1].atan2(coords[v][0])).collect();
        let phi = DVector::from_iterator(theta.len(), theta.iter().map(|t| (k * t).cos()));
        let out = dtn.lambda_matrix(0) * &phi;
        let density = fs.boundary_mass_inv(0) * out;
        let exact = &phi * k;
        errors.push((density - &exact).amax());
    }
    assert!(errors[2] < errors[1] && errors[1] < errors[0], "{errors:?}");
    assert!(errors[2] < 0.05, "{errors:?}");
}

#[test]
fn linear_function_extends_harmonically() {
    let mesh = load_off(&disk_off(6)).unwrap();
    let fs = FormSpace::new(&mesh).unwrap();
    let dtn = Dtn::new(&fs).unwrap();
    let coords = mesh.geometry.vertex_coords.as_ref().unwrap();
    let x: Vec<f64> = mesh.complex.simplices(0).iter().map(|s| coords[s[0]][0]).collect();
    let phi = DVector::from_iterator(fs.boundary_count(0), fs.boundary_indices(0).iter().map(|&i| x[i]));
    let sol = dtn.solve_bvp(&Cochain::new(0, Carrier::Boundary, phi)).unwrap();
    let err = sol
        .omega
        .values
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-10, "{err}");
}

#[test]
fn harmonic_traces_are_in_the_kernel() {
    for (name, mesh) in meshes() {
        let fs = FormSpace::new(&mesh).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        for p in 0..2 {
            let h = HodgeDegree::new(&fs, p).unwrap();
            for j in 0..h.harmonic.dim() {
                let phi = fs.tangential(p) * h.harmonic.columns.column(j);
                let out = dtn.lambda(&Cochain::new(p, Carrier::Boundary, phi.clone())).unwrap();
                assert!(
                    out.values.norm() < 1e-8 * dtn.lambda_matrix(p).norm() * phi.norm(),
                    "{name} p={p}"
                );
            }
        }
    }
}

#[test]
fn dtn_kernel_equals_image_of_complementary_degree() {
    for (name, mesh) in meshes() {
        let fs = FormSpace::new(&mesh).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        for p in 0..2 {
            let (primal, dual) = dtn.harmonic_trace_distance(p).unwrap();
            assert!(primal < 1e-7 && dual < 1e-7, "{name} p={p}: {primal} {dual}");
            assert!(dtn.exact_annihilation(p).unwrap() < 1e-8);
            assert!(dtn.hilbert_well_definedness(p).unwrap() < 1e-8);
        }
    }
}

#[test]
fn dirichlet_ambiguity_does_not_change_lambda() {
    let mesh = generate_annulus(2, 8, 1.0, 2.0).unwrap();
    let fs = FormSpace::new(&mesh).unwrap();
    let dtn = Dtn::new(&fs).unwrap();
    let h = HodgeDegree::new(&fs, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let phi = Cochain::new(1, Carrier::Boundary, random(&mut rng, fs.boundary_count(1)));
    let sol = dtn.solve_bvp(&phi).unwrap();
    let shifted = &sol.omega.values + h.harmonic_dirichlet.columns.column(0) * 3.0;
    let a = fs.normal(2) * fs.d_matrix(1) * &sol.omega.values;
    let b = fs.normal(2) * fs.d_matrix(1) * shifted;
    assert!((&a - &b).norm() < 1e-10 * a.norm().max(1.0));
    assert!(sol.residuals.trace < 1e-12);
    assert!(sol.residuals.coclosed < 1e-10);
}

#[test]
fn t_squared_spectrum_matches_duality_angles() {
    let mesh = generate_punctured_torus(8, 2).unwrap();
    let fs = FormSpace::new(&mesh).unwrap();
    let dtn = Dtn::new(&fs).unwrap();
    let h = HodgeDegree::new(&fs, 1).unwrap();
    let t2 = dtn.t_squared(1).unwrap();
    let mut cos2: Vec<f64> = h
        .poincare_duality_angles()
        .unwrap()
        .cosines
        .iter()
        .map(|c| c * c)
        .collect();
    cos2.sort_by(f64::total_cmp);
    let mut eig: Vec<f64> = t2.eigenvalues.iter().map(|e| e.abs()).collect();
    eig.sort_by(f64::total_cmp);
    assert_eq!(eig.len(), cos2.len());
    for (e, c) in eig.iter().zip(&cos2) {
        assert!((e - c).abs() < 1e-6, "{e} vs {c}");
    }
    assert!(t2.eigenvalues.iter().all(|&e| e < 0.0));
    assert!(t2.max_imaginary < 1e-10);
    assert!(t2.invariance_residual < 1e-8);
}

#[test]
fn boundary_traces_lie_in_kernel_of_t_squared() {
    let mesh = generate_annulus(2, 8, 1.0, 2.0).unwrap();
    let fs = FormSpace::new(&mesh).unwrap();
    let dtn = Dtn::new(&fs).unwrap();
    let h = HodgeDegree::new(&fs, 1).unwrap();
    let t2 = dtn
        .t_squared_on(1, &(fs.tangential(1) * &h.boundary_n.columns))
        .unwrap();
    assert!(t2.eigenvalues.iter().all(|e| e.abs() < 1e-7), "{:?}", t2.eigenvalues);
}

#[test]
fn t_squared_is_minus_identity_on_exact_coexact_traces() {
    for (name, mesh) in meshes() {
        let fs = FormSpace::new(&mesh).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        let h = HodgeDegree::new(&fs, 1).unwrap();
        let traces = fs.tangential(1) * &h.exact_coexact.columns;
        let image = dtn.t_squared_matrix(1).unwrap() * &traces;
        let rel = (&image + &traces).norm() / traces.norm();
        assert!(rel < 1e-6, "{name}: {rel}");
    }
}

#[test]
fn g_operator_recovers_neumann_traces() {
    for (name, mesh) in meshes() {
        let fs = FormSpace::new(&mesh).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        let h = HodgeDegree::new(&fs, 1).unwrap();
        let g = dtn.g_operator(1).unwrap();
        let img = column_space(&g, "test").unwrap();
        let traces = column_space(&(fs.tangential(1) * &h.harmonic_neumann.columns), "test").unwrap();
        assert_eq!(img.ncols(), h.harmonic_neumann.dim(), "{name}");
        let eye = DMatrix::identity(img.nrows(), img.nrows());
        assert!(subspace_distance(&img, &traces, &eye) < 1e-6, "{name}");
    }
}

#[test]
fn projection_identities() {
    for (name, mesh) in meshes() {
        let fs = FormSpace::new(&mesh).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        let h = HodgeDegree::new(&fs, 1).unwrap();
        for j in 0..h.harmonic_neumann.dim() {
            let r = dtn
                .t_projection_check(&h, &h.harmonic_neumann.columns.column(j).into())
                .unwrap();
            assert!(r.residual < 1e-6, "{name}: {r:?}");
        }
        for j in 0..h.harmonic_dirichlet.dim() {
            let r = dtn
                .t_projection_dirichlet_check(&h, &h.harmonic_dirichlet.columns.column(j).into())
                .unwrap();
            assert!(r.residual < 1e-6, "{name}: {r:?}");
        }
    }
}

#[test]
fn kernel_decomposition_dimensions() {
    let expect = [("annulus", 1usize, 15usize, 14usize), ("punctured torus", 0, 7, 7)];
    for ((name, mesh), (_, bn, ker, exact)) in meshes().into_iter().zip(expect) {
        let fs = FormSpace::new(&mesh).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        let h = HodgeDegree::new(&fs, 1).unwrap();
        let k = dtn.kernel_decomposition(&h).unwrap();
        assert_eq!(
            (k.boundary_n_dim, k.kernel_dim, k.exact_dim),
            (bn, ker, exact),
            "{name}"
        );
        assert_eq!(k.quotient_dim, k.boundary_n_dim);
        assert!(k.sum_residual < 1e-7);
        assert!(k.max_cross_cosine < 1.0 - 1e-6);
    }
}

#[test]
fn mixed_primitives_on_random_primitives() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, mesh) in meshes() {
        let fs = FormSpace::new(&mesh).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        for p in 0..2 {
            let top = HodgeDegree::new(&fs, p + 1).unwrap();
            let own = HodgeDegree::new(&fs, p).unwrap();
            for j in 0..top.boundary_d.dim() {
                let h = top.boundary_d.columns.column(j).into_owned();
                let rho = pinv(&fs.d_matrix(p), "test").unwrap() * &h;
                for _ in 0..5 {
                    let mut eps = random(&mut rng, fs.count(p));
                    for &i in fs.boundary_indices(p) {
                        eps[i] = 0.0;
                    }
                    let mut closed = &own.harmonic_neumann.columns * random(&mut rng, own.harmonic_neumann.dim());
                    if p > 0 {
                        closed += fs.d_matrix(p - 1) * random(&mut rng, fs.count(p - 1));
                    }
                    let r = dtn.mixed_primitive_residual(p, &rho, &eps, &closed).unwrap();
                    assert!(r < 1e-6, "{name} p={p}: {r}");
                }
            }
        }
    }
}

#[test]
fn cup_product_with_unit_class() {
    let mesh = generate_annulus(2, 8, 1.0, 2.0).unwrap();
    let fs = FormSpace::new(&mesh).unwrap();
    let dtn = Dtn::new(&fs).unwrap();
    let h1 = HodgeDegree::new(&fs, 1).unwrap();
    let one = DVector::from_element(fs.count(0), 1.0);
    let beta = h1.boundary_d.columns.column(0).into_owned();
    let cup = dtn.cup_product_reconstruct(0, &one, 1, &beta).unwrap();
    let psi = fs.normal(1) * &beta;
    assert!((&cup.reconstructed - &psi).norm() < 1e-10 * psi.norm());
    assert!(cup.residual < 1e-10);
}

#[test]
fn cup_product_above_top_degree_is_zero() {
    let mesh = generate_annulus(1, 6, 1.0, 2.0).unwrap();
    let fs = FormSpace::new(&mesh).unwrap();
    let dtn = Dtn::new(&fs).unwrap();
    let beta = DVector::zeros(fs.count(2));
    let alpha = DVector::zeros(fs.count(1));
    let cup = dtn.cup_product_evaluate(1, &alpha, 2, &beta).unwrap();
    assert_eq!(cup.reconstructed.len(), 0);
}

#[test]
fn cup_product_degree_one_on_annulus() {
    let mut residuals = Vec::new();
    for (nr, na) in [(2, 16), (4, 32)] {
        let mesh = generate_annulus(nr, na, 1.0, 2.0).unwrap();
        let fs = FormSpace::new(&mesh).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        let h1 = HodgeDegree::new(&fs, 1).unwrap();
        let alpha = h1.harmonic_neumann.columns.column(0).into_owned();
        let beta = h1.boundary_d.columns.column(0).into_owned();
        let cup = dtn.cup_product_reconstruct(1, &alpha, 1, &beta).unwrap();
        residuals.push(cup.residual);
    }
    assert!(residuals.iter().all(|r| *r < 1e-8), "{residuals:?}");
}

#[test]
fn well_definedness_of_cup_reconstruction() {
    let mesh = generate_annulus(2, 8, 1.0, 2.0).unwrap();
    let fs = FormSpace::new(&mesh).unwrap();
    let dtn = Dtn::new(&fs).unwrap();
    let h1 = HodgeDegree::new(&fs, 1).unwrap();
    let phi = fs.tangential(1) * h1.harmonic_neumann.columns.column(0);
    let psi = fs.normal(1) * h1.boundary_d.columns.column(0);
    let ker = dtn.kernel_basis(0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let zero = DVector::zeros(fs.boundary_count(0));
    assert_eq!(dtn.well_definedness_check(1, &phi, 1, &psi, &zero).unwrap(), 0.0);
    for _ in 0..5 {
        let sigma = &ker * random(&mut rng, ker.ncols());
        assert!(dtn.well_definedness_check(1, &phi, 1, &psi, &sigma).unwrap() < 1e-6);
    }
    let h0 = HodgeDegree::new(&fs, 0).unwrap();
    let sigma = fs.tangential(0) * h0.harmonic.columns.column(0);
    assert!(dtn.well_definedness_check(1, &phi, 1, &psi, &sigma).unwrap() < 1e-6);
}

#[test]
fn report_matches_both_pipelines() {
    let fs = FormSpace::new(&generate_punctured_torus(6, 2).unwrap()).unwrap();
    let dtn = Dtn::new(&fs).unwrap();
    let h = HodgeDegree::new(&fs, 1).unwrap();
    let report = dtn.report(&h).unwrap();
    assert_eq!(report.t_squared_eigenvalues.len(), 2);
    assert!(report.discrepancies.iter().all(|d| *d < 1e-6));
    assert_eq!(report.kernel_dim + report.lambda_rank, fs.boundary_count(1));
    let annulus = FormSpace::new(&generate_annulus(2, 8, 1.0, 2.0).unwrap()).unwrap();
    let dtn = Dtn::new(&annulus).unwrap();
    let h = HodgeDegree::new(&annulus, 1).unwrap();
    let report = dtn.report(&h).unwrap();
    let boundary: Vec<_> = report.cup_products.iter().filter(|c| c.boundary_beta).collect();
    assert_eq!(boundary.len(), 1);
    assert!(boundary[0].residual < 1e-8);
}
