//! Pairwise, region and hybrid graphs of a small hand-made scene.
//!
//! Run with `cargo run --example graphs`.

use personrank::graph::{build_hybrid, build_hyper, build_pairwise, partition_regions};
use personrank::{
    build_bundles, validate_scene, BoundingBox, ChannelId, FeatureConfig, InteractionMatrix,
    PersonObservation, Scene, WeightSet,
};

fn print(label: &str, m: &InteractionMatrix) {
    println!("{label} ({} x {}):", m.rows, m.cols);
    for row in m.to_rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:7.3}")).collect();
        println!("  {}", cells.join(" "));
    }
}

fn main() -> personrank::Result<()> {
    let boxes = [
        (500.0, 400.0, 140.0), // large and central
        (250.0, 300.0, 60.0),
        (760.0, 320.0, 70.0),
        (300.0, 620.0, 55.0),
        (700.0, 650.0, 65.0),
    ];
    let persons = boxes
        .iter()
        .enumerate()
        .map(|(k, &(cx, cy, s))| {
            PersonObservation::face(format!("p{k}"), BoundingBox::from_center(cx, cy, s, s * 1.2))
        })
        .collect();
    let scene = validate_scene(&Scene {
        id: "five-people".into(),
        image_w: 1000.0,
        image_h: 1000.0,
        category: None,
        persons,
    })?;

    let bundles = build_bundles(&scene, &FeatureConfig::default())?;
    let weights = WeightSet::default();

    let regions = partition_regions(&scene, 0)?;
    for (k, members) in regions.non_empty() {
        println!("region {k} around p0: {members:?}");
    }

    let gp = build_pairwise(&bundles, ChannelId::Spatial, &weights)?;
    let gr = build_hyper(&scene, &bundles, ChannelId::Spatial, &weights)?;
    print("pairwise", &gp);
    print("regions", &gr);
    print("hybrid", &build_hybrid(&gp, &gr)?);
    Ok(())
}
