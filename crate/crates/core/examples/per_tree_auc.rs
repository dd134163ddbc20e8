//! Validation AUC after every tree, and where it peaks.
use gbdt_engine::quantizer::{transform, BinMap, RawDataset};
use gbdt_engine::{evaluate_per_tree, train, TrainConfig};

fn table(n: usize, offset: usize) -> RawDataset {
    let rows: Vec<Vec<f64>> = (offset..offset + n)
        .map(|i| vec![(i * 31 % 97) as f64, (i * 17 % 53) as f64, (i % 7) as f64])
        .collect();
    let labels = (offset..offset + n)
        .map(|i| u8::from((i * 31 % 97) as f64 + (i * 7919 % 60) as f64 > 80.0))
        .collect();
    RawDataset::from_rows(&rows, labels).unwrap()
}

fn main() -> gbdt_engine::Result<()> {
    let (tr, va) = (table(3000, 0), table(1000, 3000));
    let bins = BinMap::fit(&tr, 255)?;
    let cfg = TrainConfig {
        n_trees: 30,
        ..TrainConfig::default()
    };
    let model = train(&transform(&tr, &bins)?, tr.labels(), &cfg)?.model;
    let per_tree = evaluate_per_tree(&model, &transform(&va, &bins)?, va.labels())?;
    for (t, a) in per_tree.aucs.iter().enumerate().step_by(5) {
        println!("after {:>2} trees: auc {a:.4}", t + 1);
    }
    println!(
        "best: {:.4} after {} trees",
        per_tree.max, per_tree.best_trees
    );
    Ok(())
}
