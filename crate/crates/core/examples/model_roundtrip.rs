//! Saves a model as JSON, loads it back and compares predictions bit for bit.
use gbdt_engine::io::{load_model, save_model};
use gbdt_engine::quantizer::{transform, BinMap, RawDataset};
use gbdt_engine::{train, TrainConfig};

fn main() -> gbdt_engine::Result<()> {
    let rows: Vec<Vec<f64>> = (0..500)
        .map(|i| vec![(i % 23) as f64, ((i * 7) % 19) as f64])
        .collect();
    let labels = (0..500).map(|i| u8::from(i % 23 > 11)).collect();
    let raw = RawDataset::from_rows(&rows, labels)?;
    let data = transform(&raw, &BinMap::fit(&raw, 255)?)?;
    let cfg = TrainConfig {
        n_trees: 8,
        max_depth: 2,
        eta: 0.4,
        ..TrainConfig::default()
    };
    let model = train(&data, raw.labels(), &cfg)?.model;

    let path = std::env::temp_dir().join("gbdt_engine_roundtrip.json");
    save_model(&model, &path)?;
    let back = load_model(&path)?;
    let same = model
        .predict_proba(&data)?
        .iter()
        .zip(back.predict_proba(&data)?)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!(
        "wrote {} ({} bytes)",
        path.display(),
        std::fs::metadata(&path)?.len()
    );
    println!("identical model: {}", back == model);
    println!("bitwise identical predictions: {same}");
    std::fs::remove_file(&path)?;
    Ok(())
}
