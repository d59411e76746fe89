//! Acceptance suite: one PASS/FAIL line per criterion, then a single assertion
//! that every criterion passed.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use nalgebra::DVector;
use pdangles::cohom1::{
    asymptotic_exponent, closed_form_angle, closing_exponent, geometric_grid, numeric_angle, Family, FamilyParams,
};
use pdangles::dtn::Dtn;
use pdangles::forms::{Carrier, Cochain, FormSpace};
use pdangles::hodge::HodgeDegree;
use pdangles::linalg::pinv;
use pdangles::mesh::{betti_numbers, generate_annulus, generate_punctured_torus, relative_betti_numbers, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &'static str, pass: bool, detail: String) -> Outcome {
    println!(
        "{} criterion {id} ({name}): {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    Outcome { id, name, pass, detail }
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn random(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

fn test_meshes() -> Vec<(&'static str, Mesh)> {
    vec![
        ("annulus", generate_annulus(2, 8, 1.0, 2.0).unwrap()),
        ("punctured torus", generate_punctured_torus(8, 2).unwrap()),
    ]
}

fn closed_form_reproduction() -> Outcome {
    let start = Instant::now();
    let (mut closed_err, mut numeric_err) = (0.0f64, 0.0f64);
    for i in 1..=50 {
        let r = FRAC_PI_2 * i as f64 / 51.0;
        let s = r.sin().powi(2);
        let exact = (1.0 - s) / (1.0 + s);
        let params = FamilyParams::new(Family::Grassmann, 2, 1, r).unwrap();
        closed_err = closed_err.max((closed_form_angle(&params).unwrap().cos_theta - exact).abs());
        numeric_err = numeric_err.max((numeric_angle(&params).unwrap().cos_theta - exact).abs());
    }
    let elapsed = start.elapsed();
    let pass = closed_err <= 1e-12 && numeric_err <= 1e-8 && within(elapsed, 5.0);
    report(
        1,
        "closed-form reproduction",
        pass,
        format!("closed err {closed_err:.2e} (tol 1e-12), numeric err {numeric_err:.2e} (tol 1e-8), {elapsed:.2?} (limit 5 s)"),
    )
}

fn cross_route_grid() -> Outcome {
    let start = Instant::now();
    let mut worst = (0.0f64, String::new());
    let mut count = 0;
    for family in [Family::CPn, Family::Grassmann] {
        for n in 2..=6 {
            for k in 1..n {
                for r in [0.1, 0.3, 0.7, 1.2] {
                    let params = FamilyParams::new(family, n, k, r).unwrap();
                    let diff = (closed_form_angle(&params).unwrap().cos_theta
                        - numeric_angle(&params).unwrap().cos_theta)
                        .abs();
                    count += 1;
                    if diff >= worst.0 {
                        worst = (diff, format!("{family} n={n} k={k} r={r}"));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst.0 <= 1e-8 && within(elapsed, 60.0);
    report(
        2,
        "cross-route agreement grid",
        pass,
        format!(
            "{count} points, max diff {:.2e} at {} (tol 1e-8), {elapsed:.2?} (limit 60 s)",
            worst.0, worst.1
        ),
    )
}

fn lens_independence() -> Outcome {
    let mut closed = Vec::new();
    let mut numeric = Vec::new();
    for m in [1, 2, 3, 5, 10] {
        let params = FamilyParams::new(Family::Lens(m), 3, 1, 0.5).unwrap();
        closed.push(closed_form_angle(&params).unwrap().cos_theta);
        numeric.push(numeric_angle(&params).unwrap().cos_theta);
    }
    let spread = |v: &[f64]| {
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        hi - lo
    };
    let (c, n) = (spread(&closed), spread(&numeric));
    report(
        3,
        "lens m-independence",
        c <= 1e-10 && n <= 1e-10,
        format!("closed spread {c:.2e}, numeric spread {n:.2e} (tol 1e-10)"),
    )
}

fn asymptotic_exponents() -> Outcome {
    let grid = geometric_grid(1e-1, 1e-3, 9);
    let mut worst = (0.0f64, String::new());
    for family in [Family::CPn, Family::Grassmann] {
        for n in 2..=4 {
            for k in 1..n {
                let fit = asymptotic_exponent(family, n, k, &grid).unwrap();
                if fit.rel_err >= worst.0 {
                    worst = (
                        fit.rel_err,
                        format!("{family} n={n} k={k} slope {:.4} vs {}", fit.slope, fit.expected),
                    );
                }
            }
        }
    }
    let mut closing_worst = 0.0f64;
    for family in [Family::CPn, Family::Grassmann] {
        for n in 2..=4 {
            for k in 1..n {
                let slope = closing_exponent(family, n, k, &grid).unwrap();
                closing_worst = closing_worst.max((slope - 2.0).abs() / 2.0);
            }
        }
    }
    let pass = worst.0 <= 0.02 && closing_worst <= 0.02;
    report(
        4,
        "asymptotic exponents",
        pass,
        format!(
            "worst small-r rel err {:.2e} ({}), worst closing rel err {closing_worst:.2e} (tol 2%)",
            worst.0, worst.1
        ),
    )
}

fn hodge_dimensions() -> Outcome {
    let expect = [(0usize, 1usize), (2, 0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for ((name, mesh), split) in test_meshes().into_iter().zip(expect) {
        let fs = FormSpace::new(&mesh).unwrap();
        let h = HodgeDegree::new(&fs, 1).unwrap();
        let betti = betti_numbers(&mesh.complex)[1];
        let relative = relative_betti_numbers(&mesh.complex)[1];
        let n_split = (h.interior_n.dim(), h.boundary_n.dim());
        let d_split = (h.interior_d.dim(), h.boundary_d.dim());
        ok &= h.harmonic_neumann.dim() == betti
            && h.harmonic_dirichlet.dim() == relative
            && n_split == split
            && d_split == split;
        parts.push(format!(
            "{name}: H_N {} (b1 {betti}), H_D {} (rel b1 {relative}), split N {n_split:?} D {d_split:?}",
            h.harmonic_neumann.dim(),
            h.harmonic_dirichlet.dim()
        ));
    }
    report(5, "discrete Hodge dimensions", ok, parts.join("; "))
}

fn flagship() -> Outcome {
    let start = Instant::now();
    let fs = FormSpace::new(&generate_punctured_torus(8, 2).unwrap()).unwrap();
    let h = HodgeDegree::new(&fs, 1).unwrap();
    let mut cos2: Vec<f64> = h
        .poincare_duality_angles()
        .unwrap()
        .cosines
        .iter()
        .map(|c| c * c)
        .collect();
    let dtn = Dtn::new(&fs).unwrap();
    let mut eig: Vec<f64> = dtn.t_squared(1).unwrap().eigenvalues.iter().map(|e| e.abs()).collect();
    let elapsed = start.elapsed();
    cos2.sort_by(f64::total_cmp);
    eig.sort_by(f64::total_cmp);
    let diff = if eig.len() == cos2.len() {
        eig.iter().zip(&cos2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    report(
        6,
        "T̃² spectrum vs SVD angles",
        diff <= 1e-6 && !eig.is_empty() && within(elapsed, 120.0),
        format!(
            "{} eigenvalues {eig:?}, cos² {cos2:?}, max diff {diff:.2e} (tol 1e-6), {elapsed:.2?} (limit 120 s)",
            eig.len()
        ),
    )
}

fn property_battery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = [0.0f64; 7];
    for (_, mesh) in test_meshes() {
        let fs = FormSpace::new(&mesh).unwrap();
        for p in 1..=2 {
            for _ in 0..200 {
                let a = Cochain::new(p - 1, Carrier::Interior, random(&mut rng, fs.count(p - 1)));
                let b = Cochain::new(p, Carrier::Interior, random(&mut rng, fs.count(p)));
                let scale = fs.norm(&fs.d(&a).unwrap()).unwrap() * fs.norm(&b).unwrap()
                    + fs.norm(&a).unwrap() * fs.norm(&fs.delta(&b).unwrap()).unwrap();
                worst[0] = worst[0].max(fs.greens_residual(&a, &b).unwrap().abs() / scale);
            }
        }
        for p in 0..=2 {
            worst[1] = worst[1].max(HodgeDegree::new(&fs, p).unwrap().orthogonality_residuals().max());
        }
        let dtn = Dtn::new(&fs).unwrap();
        for p in 0..2 {
            worst[2] = worst[2].max(dtn.exact_annihilation(p).unwrap());
            let (primal, dual) = dtn.harmonic_trace_distance(p).unwrap();
            worst[3] = worst[3].max(primal.max(dual));
        }
        let h1 = HodgeDegree::new(&fs, 1).unwrap();
        let traces = fs.tangential(1) * &h1.exact_coexact.columns;
        let image = dtn.t_squared_matrix(1).unwrap() * &traces;
        worst[4] = worst[4].max((&image + &traces).norm() / traces.norm());
        for j in 0..h1.harmonic_neumann.dim() {
            let r = dtn
                .t_projection_check(&h1, &h1.harmonic_neumann.columns.column(j).into())
                .unwrap();
            worst[5] = worst[5].max(r.residual);
        }
        for j in 0..h1.harmonic_dirichlet.dim() {
            let r = dtn
                .t_projection_dirichlet_check(&h1, &h1.harmonic_dirichlet.columns.column(j).into())
                .unwrap();
            worst[5] = worst[5].max(r.residual);
        }
        for p in 0..2 {
            let top = HodgeDegree::new(&fs, p + 1).unwrap();
            let own = HodgeDegree::new(&fs, p).unwrap();
            for j in 0..top.boundary_d.dim() {
                let rho = pinv(&fs.d_matrix(p), "acceptance").unwrap() * top.boundary_d.columns.column(j);
                for _ in 0..5 {
                    let mut eps = random(&mut rng, fs.count(p));
                    for &i in fs.boundary_indices(p) {
                        eps[i] = 0.0;
                    }
                    let mut closed = &own.harmonic_neumann.columns * random(&mut rng, own.harmonic_neumann.dim());
                    if p > 0 {
                        closed += fs.d_matrix(p - 1) * random(&mut rng, fs.count(p - 1));
                    }
                    worst[6] = worst[6].max(dtn.mixed_primitive_residual(p, &rho, &eps, &closed).unwrap());
                }
            }
        }
    }
    let tol = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-6, 1e-6];
    let names = [
        "green",
        "orthogonality",
        "exact annihilation",
        "ker/im distance",
        "T² on EcE",
        "tproj",
        "mixed primitives",
    ];
    let pass = worst.iter().zip(tol).all(|(w, t)| *w < t);
    let detail = names
        .iter()
        .zip(worst.iter().zip(tol))
        .map(|(n, (w, t))| format!("{n} {w:.2e} (<{t:.0e})"))
        .collect::<Vec<_>>()
        .join(", ");
    report(7, "property battery", pass, detail)
}

/// i*⋆η for the unit Neumann field dθ and unit Dirichlet field dr/r on the
/// annulus 1 ≤ r ≤ 2, both of unit norm: the Dirichlet-harmonic part of their
/// wedge is the mean of vol/(2π ln 2 r²), so i*⋆η has modulus 1/(3π).
fn smooth_cup_density() -> f64 {
    1.0 / (3.0 * PI)
}

fn cup_product_refinement() -> Outcome {
    let mut discrete = Vec::new();
    let mut smooth = Vec::new();
    for (radial, angular) in [(2, 16), (4, 32)] {
        let fs = FormSpace::new(&generate_annulus(radial, angular, 1.0, 2.0).unwrap()).unwrap();
        let dtn = Dtn::new(&fs).unwrap();
        let h1 = HodgeDegree::new(&fs, 1).unwrap();
        let alpha = h1.harmonic_neumann.columns.column(0).into_owned();
        let beta = h1.boundary_d.columns.column(0).into_owned();
        let cup = dtn.cup_product_reconstruct(1, &alpha, 1, &beta).unwrap();
        discrete.push(cup.residual);
        let target = smooth_cup_density();
        smooth.push(
            cup.reconstructed
                .iter()
                .map(|v| (v.abs() - target).abs() / target)
                .fold(0.0, f64::max),
        );
    }
    let ratio = smooth[1] / smooth[0];
    let pass = discrete.iter().all(|r| *r < 1e-8) && ratio < 0.6;
    report(
        8,
        "cup-product reconstruction",
        pass,
        format!(
            "discrete residuals {:.2e} -> {:.2e}; error vs smooth i*⋆η {:.3e} -> {:.3e}, ratio {ratio:.3} (tol 0.6)",
            discrete[0], discrete[1], smooth[0], smooth[1]
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let outcomes = [
        closed_form_reproduction(),
        cross_route_grid(),
        lens_independence(),
        asymptotic_exponents(),
        hodge_dimensions(),
        flagship(),
        property_battery(),
        cup_product_refinement(),
    ];
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.pass)
        .map(|o| format!("{} {}: {}", o.id, o.name, o.detail))
        .collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
