//! Trains on a synthetic problem and prints held-out AUC and a few
//! probabilities.
use gbdt_engine::quantizer::{transform, BinMap, RawDataset};
use gbdt_engine::{auc, train, TrainConfig};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic(rng: &mut ChaCha8Rng, n: usize) -> RawDataset {
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..6).map(|_| 2.0 * unit() - 1.0).collect();
        let logit = 3.0 * x[0] - 2.0 * x[1] * x[2] + x[3].abs();
        labels.push(u8::from(unit() < 1.0 / (1.0 + (-logit).exp())));
        rows.push(x);
    }
    RawDataset::from_rows(&rows, labels).unwrap()
}

fn main() -> gbdt_engine::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (train_raw, test_raw) = (synthetic(&mut rng, 4000), synthetic(&mut rng, 2000));
    let bins = BinMap::fit(&train_raw, 255)?;
    let config = TrainConfig {
        n_trees: 60,
        max_depth: 3,
        eta: 0.3,
        subsample: 0.8,
        n_engines: 8,
        ..TrainConfig::default()
    };
    let outcome = train(&transform(&train_raw, &bins)?, train_raw.labels(), &config)?;
    let test = transform(&test_raw, &bins)?;
    let margins = outcome.model.predict_margin(&test)?;
    println!("trees: {}", outcome.model.trees.len());
    println!(
        "final train loss: {:.4}",
        outcome.log.trees.last().unwrap().train_loss
    );
    println!("test auc: {:.4}", auc(&margins, test_raw.labels())?);
    for (p, y) in outcome
        .model
        .predict_proba(&test)?
        .iter()
        .zip(test_raw.labels())
        .take(5)
    {
        println!("p = {p:.3}  label = {y}");
    }
    Ok(())
}
