//! Average precision and CMC on hand-made predictions.
//!
//! Run with `cargo run --example metrics`.

use personrank::eval::{cmc, mean_average_precision, CmcEntry, PredictionRecord};

fn record(id: &str, score: f64, correct: bool, category: &str) -> PredictionRecord {
    PredictionRecord {
        scene_id: id.into(),
        predicted_index: 0,
        predicted_score: score,
        gt_index: Some(if correct { 0 } else { 1 }),
        category: Some(category.into()),
    }
}

fn main() -> personrank::Result<()> {
    let records = vec![
        record("a", 0.9, true, "street"),
        record("b", 0.8, false, "street"),
        record("c", 0.7, true, "street"),
        record("d", 0.95, true, "classroom"),
        record("e", 0.6, false, "classroom"),
    ];
    let map = mean_average_precision(&records)?;
    for (cat, ap) in &map.per_category {
        println!("AP {cat:<10} {ap:.4}");
    }
    println!("mean of categories {:.4}, pooled {:.4}", map.mean_ap, map.pooled_ap);

    let entries = vec![
        CmcEntry { scene_id: "a".into(), ranking: vec![0, 1, 2], gt_index: Some(0) },
        CmcEntry { scene_id: "b".into(), ranking: vec![2, 1, 0], gt_index: Some(1) },
        CmcEntry { scene_id: "c".into(), ranking: vec![1, 2, 0], gt_index: Some(0) },
    ];
    print!("{}", cmc(&entries, 3)?.to_csv());
    Ok(())
}
