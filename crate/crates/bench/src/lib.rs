//! Shared fixtures for the benchmarks.

use pdangles::cohom1::{Family, FamilyParams};
use pdangles::mesh::{generate_annulus, generate_punctured_torus, Mesh};

/// Meshes used by the mesh pipeline benchmarks, by label.
pub fn meshes() -> Vec<(&'static str, Mesh)> {
    vec![
        (
            "annulus-2x16",
            generate_annulus(2, 16, 1.0, 2.0).expect("valid annulus"),
        ),
        (
            "punctured-torus-8",
            generate_punctured_torus(8, 2).expect("valid punctured torus"),
        ),
    ]
}

/// A representative parameter tuple per family.
pub fn angle_params() -> Vec<FamilyParams> {
    [(Family::CPn, 4, 1), (Family::Grassmann, 4, 2), (Family::Lens(3), 3, 1)]
        .into_iter()
        .map(|(f, n, k)| FamilyParams::new(f, n, k, 0.7).expect("valid parameters"))
        .collect()
}
