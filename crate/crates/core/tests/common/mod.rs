//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use gbdt_engine::quantizer::{self, BinMap, RawDataset};
use gbdt_engine::{QuantizedMatrix, TrainConfig, TreeModel, TreeNode};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small deterministic generator for test data.
pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.0.next_u64() % n
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

/// Random raw dataset: features take one of `n_distinct` values (or are
/// missing), and labels depend noisily on the first two features.
pub fn random_raw(
    rng: &mut TestRng,
    n: usize,
    n_features: usize,
    n_distinct: u64,
    missing: f64,
) -> RawDataset {
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..n_features)
            .map(|_| {
                if rng.chance(missing) {
                    f64::NAN
                } else {
                    rng.below(n_distinct) as f64 * 0.5 - 1.0
                }
            })
            .collect();
        let signal = row.iter().take(2).filter(|v| !v.is_nan()).sum::<f64>();
        labels.push(u8::from(signal + 2.0 * (rng.unit() - 0.5) > 0.0));
        rows.push(row);
    }
    // Every feature needs at least one present value.
    for f in 0..n_features {
        if rows.iter().all(|r| r[f].is_nan()) {
            rows[0][f] = 0.0;
        }
    }
    RawDataset::from_rows(&rows, labels).unwrap()
}

pub fn quantize(raw: &RawDataset) -> QuantizedMatrix {
    let bins = BinMap::fit(raw, 255).unwrap();
    quantizer::transform(raw, &bins).unwrap()
}

// ---------------------------------------------------------------------------
// Brute-force exact-greedy GBDT: no histograms, no index table. Every
// candidate (feature, threshold, missing direction) partitions the node's
// samples directly.

pub struct Reference {
    pub trees: Vec<TreeModel>,
    pub scores: Vec<i64>,
}

fn scale(frac_bits: u32) -> f64 {
    (1u64 << frac_bits) as f64
}

fn q(frac_bits: u32, v: f64) -> i64 {
    (v * scale(frac_bits)).round_ties_even() as i64
}

fn dq(frac_bits: u32, raw: i64) -> f64 {
    raw as f64 / scale(frac_bits)
}

fn ref_sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Candidate {
    pub gain: f64,
    pub feature: usize,
    pub threshold: u8,
    pub missing_left: bool,
}

fn goes_left(bin: u8, threshold: u8, missing_left: bool) -> bool {
    if bin == 255 {
        missing_left
    } else {
        bin <= threshold
    }
}

fn sums(samples: &[usize], g: &[i64], h: &[i64]) -> (i64, i64) {
    samples
        .iter()
        .fold((0, 0), |(a, b), &i| (a + g[i], b + h[i]))
}

pub fn gain_of(fb: u32, l: (i64, i64), r: (i64, i64), lambda: f64, gamma: f64) -> f64 {
    let (gl, hl, gr, hr) = (dq(fb, l.0), dq(fb, l.1), dq(fb, r.0), dq(fb, r.1));
    let (gp, hp) = (dq(fb, l.0 + r.0), dq(fb, l.1 + r.1));
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - gp * gp / (hp + lambda)) - gamma
}

/// Best candidate over all `(feature, threshold 0..=254, missing side)`
/// triples, visiting them in that nesting order with strict improvement.
pub fn brute_best_split(
    data: &QuantizedMatrix,
    samples: &[usize],
    g: &[i64],
    h: &[i64],
    cfg: &TrainConfig,
) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for f in 0..data.n_features() {
        for t in 0..=254u8 {
            for ml in [true, false] {
                let (left, right): (Vec<usize>, Vec<usize>) = samples
                    .iter()
                    .partition(|&&i| goes_left(data.get(i, f), t, ml));
                if left.is_empty() || right.is_empty() {
                    continue;
                }
                let gain = gain_of(
                    cfg.frac_bits,
                    sums(&left, g, h),
                    sums(&right, g, h),
                    cfg.lambda,
                    cfg.gamma,
                );
                if best.is_none_or(|b| gain > b.gain) {
                    best = Some(Candidate {
                        gain,
                        feature: f,
                        threshold: t,
                        missing_left: ml,
                    });
                }
            }
        }
    }
    best
}

fn leaf(fb: u32, samples: &[usize], g: &[i64], h: &[i64], lambda: f64) -> i64 {
    if samples.is_empty() {
        return 0;
    }
    let (sg, sh) = sums(samples, g, h);
    q(fb, -dq(fb, sg) / (dq(fb, sh) + lambda))
}

fn route(tree: &[Vec<TreeNode>], data: &QuantizedMatrix, i: usize) -> i64 {
    let mut node = 0;
    for level in tree {
        match level[node] {
            TreeNode::Leaf { weight } => return weight,
            TreeNode::Split {
                feature,
                threshold_bin,
                missing_left,
                left_child,
            } => {
                node = if goes_left(data.get(i, feature), threshold_bin, missing_left) {
                    left_child
                } else {
                    left_child + 1
                };
            }
        }
    }
    panic!("reference tree has no leaf on this path");
}

/// Trains with every sample in every tree.
pub fn reference_train(data: &QuantizedMatrix, labels: &[u8], cfg: &TrainConfig) -> Reference {
    let fb = cfg.frac_bits;
    let n = data.n_samples();
    let mut scores = vec![0i64; n];
    let mut trees = Vec::new();
    for _ in 0..cfg.n_trees {
        let (g, h): (Vec<i64>, Vec<i64>) = (0..n)
            .map(|i| {
                let p = ref_sigmoid(dq(fb, scores[i]));
                (q(fb, p - f64::from(labels[i])), q(fb, p * (1.0 - p)).max(1))
            })
            .unzip();
        let mut levels: Vec<Vec<TreeNode>> = Vec::new();
        let mut frontier: Vec<Vec<usize>> = vec![(0..n).collect()];
        for depth in 0..=cfg.max_depth {
            if frontier.is_empty() {
                break;
            }
            let mut level = Vec::new();
            let mut next = Vec::new();
            for samples in &frontier {
                let cand = if depth < cfg.max_depth && samples.len() >= 2 {
                    brute_best_split(data, samples, &g, &h, cfg).filter(|c| c.gain > 0.0)
                } else {
                    None
                };
                match cand {
                    Some(c) => {
                        let (l, r): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&i| {
                            goes_left(data.get(i, c.feature), c.threshold, c.missing_left)
                        });
                        level.push(TreeNode::Split {
                            feature: c.feature,
                            threshold_bin: c.threshold,
                            missing_left: c.missing_left,
                            left_child: next.len(),
                        });
                        next.push(l);
                        next.push(r);
                    }
                    None => level.push(TreeNode::Leaf {
                        weight: leaf(fb, samples, &g, &h, cfg.lambda),
                    }),
                }
            }
            levels.push(level);
            frontier = next;
        }
        for (i, s) in scores.iter_mut().enumerate() {
            let w = route(&levels, data, i);
            *s += q(fb, cfg.eta * dq(fb, w));
        }
        trees.push(TreeModel::from_levels(levels).unwrap());
    }
    Reference { trees, scores }
}

/// Structural equality with leaf weights allowed to differ by `ulps`.
pub fn trees_match(a: &TreeModel, b: &TreeModel, ulps: i64) -> Result<(), String> {
    if a.depth() != b.depth() {
        return Err(format!("depth {} vs {}", a.depth(), b.depth()));
    }
    for (d, (la, lb)) in a.levels().iter().zip(b.levels()).enumerate() {
        if la.len() != lb.len() {
            return Err(format!("depth {d}: width {} vs {}", la.len(), lb.len()));
        }
        for (k, (na, nb)) in la.iter().zip(lb).enumerate() {
            let ok = match (na, nb) {
                (TreeNode::Leaf { weight: wa }, TreeNode::Leaf { weight: wb }) => {
                    (wa - wb).abs() <= ulps
                }
                _ => na == nb,
            };
            if !ok {
                return Err(format!("depth {d} node {k}: {na:?} vs {nb:?}"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Arbitrary-precision logistic oracle on binary fixed point.

const PREC: u32 = 256;

fn one() -> BigInt {
    BigInt::one() << PREC
}

/// exp(x) for x given as an integer scaled by 2^PREC.
fn big_exp(x: &BigInt) -> BigInt {
    // Halve until |r| < 2^-12, Taylor-expand, then square back.
    let mut halvings = 0u32;
    let limit = BigInt::one() << (PREC - 12);
    let mut r = x.clone();
    while r.abs() >= limit {
        r >>= 1u32;
        halvings += 1;
    }
    let mut term = one();
    let mut sum = one();
    for k in 1..60u32 {
        term = (&term * &r) >> PREC;
        term /= k;
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    for _ in 0..halvings {
        sum = (&sum * &sum) >> PREC;
    }
    sum
}

/// Rounds `v * 2^frac_bits / 2^PREC` to the nearest integer, ties to even.
/// Panics if `v` is too close to a rounding boundary to decide.
fn round_scaled(v: &BigInt, frac_bits: u32) -> i64 {
    let shift = PREC - frac_bits;
    let q = v >> shift; // floor
    let rem = v - (&q << shift);
    let half = BigInt::one() << (shift - 1);
    let margin = BigInt::one() << 64;
    let diff = &rem - &half;
    assert!(
        diff.abs() > margin,
        "value too close to a rounding boundary"
    );
    let q = q.to_i64().unwrap();
    if diff.is_positive() {
        q + 1
    } else {
        q
    }
}

/// Exact `(grad, hess)` for a fixed-point score:
/// `round(sigmoid(s) - y)` and `max(round(p (1 - p)), 1)`.
pub fn oracle_gradient_pair(score_raw: i64, label: u8, frac_bits: u32) -> (i64, i64) {
    // -s scaled by 2^PREC
    let neg_s = -(BigInt::from(score_raw) << (PREC - frac_bits));
    let e = big_exp(&neg_s);
    let p = (one() << PREC) / (one() + &e);
    let pq = (&p * (one() - &p)) >> PREC;
    let p_fixed = round_scaled(&p, frac_bits);
    let grad = p_fixed - i64::from(label) * (1i64 << frac_bits);
    let hess = round_scaled(&pq, frac_bits).max(1);
    (grad, hess)
}
