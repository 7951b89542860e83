//! Generates the three mesh families, validates them, and demonstrates the
//! JSON round trip.
//!
//! Run with: cargo run --release --example mesh_generation

use vemasp::mesh::{
    aspect_ratio, cut_with_line, generate_diamond, generate_triangle_grid, read_mesh, validate,
    write_mesh,
};

fn main() {
    for n in [1, 2, 4] {
        let mesh = generate_diamond(n);
        let report = validate(&mesh);
        println!(
            "diamond N={n}: {} vertices, {} facets, {} cells, Euler characteristic {}, valid: {}",
            mesh.vertices.len(),
            mesh.facets.len(),
            mesh.cells.len(),
            report.euler_characteristic,
            report.is_valid()
        );
    }

    let base = generate_triangle_grid(16);
    println!(
        "\ntriangle N=16: {} facets, alpha = {:.2}",
        base.facets.len(),
        aspect_ratio(&base).unwrap()
    );
    for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
        let cut = cut_with_line(&base, 0.5 + eps).unwrap();
        println!(
            "cut at y = 1/2 + {eps:.0e}: {} facets, alpha = {:.2e}, valid: {}",
            cut.facets.len(),
            aspect_ratio(&cut).unwrap(),
            validate(&cut).is_valid()
        );
    }

    let path = std::env::temp_dir().join("vemasp_example_mesh.json");
    let mesh = generate_diamond(2);
    write_mesh(&mesh, &path).unwrap();
    let reread = read_mesh(&path).unwrap();
    assert_eq!(mesh.vertices.len(), reread.vertices.len());
    assert_eq!(mesh.facets, reread.facets);
    println!("\nJSON round trip through {} preserved the topology", path.display());
}
