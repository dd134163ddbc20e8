//! Fits bin centroids on a small table and shows how values map to bins,
//! including ties and missing entries.
use gbdt_engine::quantizer::{transform, BinMap, RawDataset};
use gbdt_engine::MISSING_BIN;

fn main() -> gbdt_engine::Result<()> {
    let rows = vec![
        vec![0.1, 10.0],
        vec![0.4, f64::NAN],
        vec![0.4, 30.0],
        vec![0.9, 20.0],
        vec![1.5, 10.0],
    ];
    let raw = RawDataset::from_rows(&rows, vec![0, 0, 1, 1, 1])?;
    let bins = BinMap::fit(&raw, 255)?;
    for f in 0..bins.n_features() {
        println!("feature {f}: centroids {:?}", bins.centroids(f));
    }
    // 0.25 sits halfway between 0.1 and 0.4 and takes the lower bin.
    for v in [0.25, 0.26, -3.0, 7.0, f64::NAN] {
        println!("feature 0, value {v}: bin {}", bins.bin(0, v));
    }
    let q = transform(&raw, &bins)?;
    for i in 0..q.n_samples() {
        let row = q.row(i);
        let shown: Vec<String> = row
            .iter()
            .map(|&b| {
                if b == MISSING_BIN {
                    "missing".into()
                } else {
                    b.to_string()
                }
            })
            .collect();
        println!("sample {i}: {}", shown.join(" "));
    }
    Ok(())
}
