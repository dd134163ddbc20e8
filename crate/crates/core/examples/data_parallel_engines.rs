//! Shards one node's samples across engines, merges their histograms and
//! checks the result against a single engine. Then trains the same
//! ensemble with several engine counts.
use gbdt_engine::node_trainer::build_histogram;
use gbdt_engine::parallel::{merge_histograms, shard, shard_bounds};
use gbdt_engine::quantizer::{transform, BinMap, RawDataset};
use gbdt_engine::{train, EngineMemory, FixedFormat, TrainConfig};

fn main() -> gbdt_engine::Result<()> {
    println!("10 samples over 4 engines: {:?}", shard_bounds(10, 4));

    let rows: Vec<Vec<f64>> = (0..1000)
        .map(|i| vec![(i % 37) as f64, (i % 11) as f64])
        .collect();
    let labels: Vec<u8> = (0..1000).map(|i| u8::from(i % 37 > 18)).collect();
    let raw = RawDataset::from_rows(&rows, labels)?;
    let data = transform(&raw, &BinMap::fit(&raw, 255)?)?;

    let fx = FixedFormat::default();
    let mem = EngineMemory::load(data.clone(), raw.labels(), 0.0, fx)?;
    let active: Vec<usize> = (0..1000).step_by(3).collect();
    let mut single = mem.clone();
    single.init_index_table(&active)?;
    let whole = build_histogram(&single, (0, active.len()));

    for engines in [2, 8, 64] {
        let parts: Vec<_> = shard(&active, engines)
            .into_iter()
            .map(|idx| {
                let mut m = mem.clone();
                m.init_index_table(&idx).unwrap();
                build_histogram(&m, (0, idx.len()))
            })
            .collect();
        println!(
            "{engines:>3} engines merge to the single-engine histogram: {}",
            merge_histograms(&parts)? == whole
        );
    }

    let mut models = Vec::new();
    for engines in [1, 4, 64] {
        let cfg = TrainConfig {
            n_trees: 10,
            max_depth: 2,
            n_engines: engines,
            ..TrainConfig::default()
        };
        models.push(train(&data, raw.labels(), &cfg)?.model);
    }
    println!(
        "models identical across 1, 4, 64 engines: {}",
        models.windows(2).all(|w| w[0] == w[1])
    );
    Ok(())
}
