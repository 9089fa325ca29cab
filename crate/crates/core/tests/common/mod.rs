#![allow(dead_code)]

use posmild::lattice::SpaceSpec;
use posmild::semigroup::GeneratorMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Metzler matrix: off-diagonal entries in `[0, 2)` with the given density,
/// diagonal in `[-4, 1)`.
pub fn random_metzler(rng: &mut ChaCha8Rng, n: usize, density: f64) -> GeneratorMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, rng.gen_range(-4.0..1.0)));
        for j in 0..n {
            if i != j && rng.gen_bool(density) {
                t.push((i, j, rng.gen_range(0.0..2.0)));
            }
        }
    }
    GeneratorMatrix::from_triplets(n, t).unwrap()
}

/// Random matrix with at least one strongly negative off-diagonal entry.
pub fn random_non_metzler(rng: &mut ChaCha8Rng, n: usize) -> (GeneratorMatrix, usize, usize) {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, rng.gen_range(-1.0..0.0)));
        for j in 0..n {
            if i != j && rng.gen_bool(0.3) {
                t.push((i, j, rng.gen_range(0.0..0.5)));
            }
        }
    }
    let i = rng.gen_range(0..n);
    let j = (i + 1 + rng.gen_range(0..n - 1)) % n;
    t.push((i, j, -rng.gen_range(2.0..5.0)));
    (GeneratorMatrix::from_triplets(n, t).unwrap(), i, j)
}

pub fn random_nonnegative(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()
}

/// Nonnegative state with roughly a third of its entries exactly zero, scaled to `norm`.
pub fn random_cone_state(rng: &mut ChaCha8Rng, space: &SpaceSpec, norm: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..space.dof())
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) })
            .collect();
        let n = space.norm_of(&v);
        if n > 0.0 {
            return v.iter().map(|x| x * norm / n).collect();
        }
    }
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}
