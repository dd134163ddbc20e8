//! Estimates accelerator cycles for one training run at several engine
//! counts.
use gbdt_engine::quantizer::{transform, BinMap, RawDataset};
use gbdt_engine::{estimate, train, CostParams, TrainConfig};

fn main() -> gbdt_engine::Result<()> {
    let n = 10_048;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i: usize| {
            (0..28usize)
                .map(|f| (i.wrapping_mul(f + 7).wrapping_mul(2_654_435_761) % 1009) as f64)
                .collect()
        })
        .collect();
    let labels: Vec<u8> = rows
        .iter()
        .map(|r| u8::from(r[0] + r[3] > 1009.0))
        .collect();
    let raw = RawDataset::from_rows(&rows, labels)?;
    let data = transform(&raw, &BinMap::fit(&raw, 255)?)?;
    let cfg = TrainConfig {
        n_trees: 100,
        max_depth: 1,
        subsample: 0.5,
        ..TrainConfig::default()
    };
    let log = train(&data, raw.labels(), &cfg)?.log;

    let params = CostParams::default();
    print!("{}", estimate(&log, 64, &params)?.to_text());
    println!();
    for engines in [1, 8, 64, 256] {
        let r = estimate(&log, engines, &params)?;
        println!(
            "{engines:>4} engines: {:>9} cycles, {:.3} ms",
            r.total_cycles,
            r.wall_seconds * 1e3
        );
    }
    Ok(())
}
