#![allow(dead_code)]

use mflab_core::factor::FactorMap;
use mflab_core::scalar::{ratio, Ratio};
use mflab_core::{Alphabet, FactorProcess, MarkovModel};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Primitive chain on at most 5 states with a surjective code onto at most 3
/// symbols whose image is the induced 1-step shift.
pub fn random_model(seed: u64) -> FactorProcess<Ratio> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(2..=5usize);
        let nb = rng.gen_range(2..=n.min(3));
        let rows: Vec<Vec<Ratio>> = (0..n)
            .map(|_| {
                let mut w: Vec<i64> = (0..n).map(|_| if rng.gen_bool(0.6) { rng.gen_range(1..=4) } else { 0 }).collect();
                if w.iter().all(|&v| v == 0) {
                    w[rng.gen_range(0..n)] = 1;
                }
                let total: i64 = w.iter().sum();
                w.iter().map(|&v| ratio(v, total)).collect()
            })
            .collect();
        let labels: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let Ok(model) = MarkovModel::exact(Alphabet::new(labels).unwrap(), rows) else { continue };
        if !model.shift().is_primitive() {
            continue;
        }
        let mut assign: Vec<usize> = (0..n).map(|i| if i < nb { i } else { rng.gen_range(0..nb) }).collect();
        for i in (1..n).rev() {
            assign.swap(i, rng.gen_range(0..=i));
        }
        let target = Alphabet::new((0..nb).map(|b| ((b'A' + b as u8) as char).to_string())).unwrap();
        let map = FactorMap::new(model.shift().alphabet().clone(), target, assign).unwrap();
        let fp = FactorProcess::from_map(model, map).unwrap();
        if fp.system().verify_image_sft(8).realized {
            return fp;
        }
    }
}

pub fn corpus(count: usize) -> Vec<FactorProcess<Ratio>> {
    (0..count as u64).map(|s| random_model(0x5eed_0000 + s)).collect()
}

/// Every domain word of the given length with positive probability.
pub fn domain_words(fp: &FactorProcess<Ratio>, len: usize) -> Vec<Vec<usize>> {
    fp.model().shift().allowed_words(len).into_iter().map(|w| w.symbols).collect()
}

/// `ν[y]` by summing `μ[x]` over every domain word with `π(x) = y`.
pub fn brute_cylinder(fp: &FactorProcess<Ratio>, y: &[usize]) -> Ratio {
    fn go(fp: &FactorProcess<Ratio>, y: &[usize], x: &mut Vec<usize>, acc: &mut Ratio) {
        if x.len() == y.len() {
            *acc += fp.model().cylinder_probability(x);
            return;
        }
        for &a in fp.map().preimage(y[x.len()]) {
            x.push(a);
            go(fp, y, x, acc);
            x.pop();
        }
    }
    let mut acc = Ratio::zero();
    go(fp, y, &mut Vec::new(), &mut acc);
    acc
}

/// `μ[x] restricted to π⁻¹[w]`, with `x` occupying positions `pins`.
pub fn brute_pinned(fp: &FactorProcess<Ratio>, w: &[usize], pins: &[Option<usize>]) -> Ratio {
    fn go(fp: &FactorProcess<Ratio>, w: &[usize], pins: &[Option<usize>], x: &mut Vec<usize>, acc: &mut Ratio) {
        let i = x.len();
        if i == w.len() {
            *acc += fp.model().cylinder_probability(x);
            return;
        }
        for &a in fp.map().preimage(w[i]) {
            if pins.get(i).copied().flatten().is_some_and(|p| p != a) {
                continue;
            }
            x.push(a);
            go(fp, w, pins, x, acc);
            x.pop();
        }
    }
    let mut acc = Ratio::zero();
    go(fp, w, pins, &mut Vec::new(), &mut acc);
    acc
}

/// Every image word of length `len` with positive probability.
pub fn image_words(fp: &FactorProcess<Ratio>, len: usize) -> Vec<Vec<usize>> {
    fp.image()
        .allowed_words(len)
        .into_iter()
        .map(|w| w.symbols)
        .filter(|y| !fp.factor_cylinder_probability(y).is_zero())
        .collect()
}
