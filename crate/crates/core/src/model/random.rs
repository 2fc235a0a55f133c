//! Seeded random instances for the property suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Distribution, RngSpec, Scenario};
use crate::production::{ConcaveFn, UnitFn, ValueFunction};

/// The BSP members of the catalogue used for random single-project instances.
pub fn bsp_catalogue() -> Vec<ValueFunction> {
    vec![
        ValueFunction::TotalProduction(ConcaveFn::Sqrt),
        ValueFunction::BestShot,
        ValueFunction::Ces(1.0),
        ValueFunction::Ces(1.5),
        ValueFunction::Ces(2.0),
        ValueFunction::Ces(4.0),
        ValueFunction::SuccessProbability(UnitFn::OneMinusExp(0.5)),
    ]
}

/// Every catalogue shape, including the non-BSP top-r.
pub fn full_catalogue() -> Vec<ValueFunction> {
    let mut all = bsp_catalogue();
    all.extend([
        ValueFunction::TotalProduction(ConcaveFn::Identity),
        ValueFunction::TotalProduction(ConcaveFn::Log1p),
        ValueFunction::TotalProduction(ConcaveFn::Power(0.3)),
        ValueFunction::SuccessProbability(UnitFn::ClampLinear(4.0)),
        ValueFunction::TopR(1),
        ValueFunction::TopR(2),
        ValueFunction::TopR(3),
    ]);
    all
}

/// A distribution with 1..=`max_support` atoms on a coarse grid in `[0, 5]`.
///
/// Zero is favoured so that risky agents are common.
pub fn random_distribution(rng: &mut ChaCha8Rng, max_support: usize) -> Distribution {
    let len = rng.random_range(1..=max_support.max(1));
    let mut atoms = Vec::with_capacity(len);
    while atoms.len() < len {
        let v = if rng.random_bool(0.25) {
            0.0
        } else {
            (rng.random_range(1..=50) as f64) / 10.0
        };
        if atoms.iter().all(|&(u, _)| u != v) {
            atoms.push((v, rng.random_range(0.05..1.0)));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    Distribution::new(atoms.into_iter().map(|(v, w)| (v, w / total)))
        .expect("normalized random weights")
}

/// Single-project instance with `n ∈ [k, max_n]`, `k ∈ ks` and `g` drawn from `catalogue`.
pub fn random_single_project(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    ks: &[usize],
    max_support: usize,
    catalogue: &[ValueFunction],
) -> Scenario {
    let k = ks[rng.random_range(0..ks.len())];
    let n = rng.random_range(k..=max_n.max(k));
    let g = catalogue[rng.random_range(0..catalogue.len())];
    let dists = (0..n).map(|_| random_distribution(rng, max_support)).collect();
    Scenario::single_project(dists, g, k).expect("k <= n by construction")
}

/// The `index`-th instance of the standard single-project family:
/// `n <= 7`, `k ∈ {2, 3, 4}`, supports of at most 3 values, BSP catalogue.
pub fn standard_single_project(seed: u64, index: u64) -> Scenario {
    let mut rng = RngSpec::new(seed).stream(index);
    random_single_project(&mut rng, 7, &[2, 3, 4], 3, &bsp_catalogue())
}

/// Welfare instance with `n <= max_n`, `m <= max_m`, `k_j <= max_k` and
/// `Σ k_j <= n`, value functions from `catalogue`.
pub fn random_welfare(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    max_m: usize,
    max_k: usize,
    max_support: usize,
    catalogue: &[ValueFunction],
) -> Scenario {
    let m = rng.random_range(1..=max_m);
    let mut ks: Vec<usize> = (0..m).map(|_| rng.random_range(1..=max_k)).collect();
    while ks.iter().sum::<usize>() > max_n {
        let j = ks.iter().enumerate().max_by_key(|&(_, k)| *k).unwrap().0;
        ks[j] -= 1;
        if ks[j] == 0 {
            ks.remove(j);
        }
    }
    let total: usize = ks.iter().sum();
    let n = rng.random_range(total..=max_n);
    let gs: Vec<ValueFunction> = ks
        .iter()
        .map(|_| catalogue[rng.random_range(0..catalogue.len())])
        .collect();
    let dists = (0..n)
        .map(|_| ks.iter().map(|_| random_distribution(rng, max_support)).collect())
        .collect();
    Scenario::new(dists, gs, ks).expect("feasible by construction")
}

/// The `index`-th instance of the standard welfare family:
/// `n <= 8`, `m <= 3`, `k_j <= 3`, supports of at most 3 values, BSP catalogue.
pub fn standard_welfare(seed: u64, index: u64) -> Scenario {
    let mut rng = RngSpec::new(seed).stream(index);
    random_welfare(&mut rng, 8, 3, 3, 3, &bsp_catalogue())
}

/// Random non-negative vector of length `len` with entries in `[0, scale)`,
/// with roughly one entry in five set to zero.
pub fn random_vector(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.0..scale)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_families_respect_their_bounds() {
        for idx in 0..50 {
            let s = standard_single_project(11, idx);
            assert!(s.n_agents() <= 7 && (2..=4).contains(&s.cardinality(0)));
            assert!(s.value_fn(0).is_bsp());
            for i in s.agents() {
                assert!(s.dist(i, 0).len() <= 3);
            }
            let w = standard_welfare(11, idx);
            assert!(w.n_agents() <= 8 && w.n_projects() <= 3);
            assert!(w.cardinalities().iter().all(|&k| (1..=3).contains(&k)));
            assert!(w.cardinalities().iter().sum::<usize>() <= w.n_agents());
        }
    }

    #[test]
    fn generation_is_reproducible() {
        assert_eq!(standard_single_project(3, 9), standard_single_project(3, 9));
        assert_eq!(standard_welfare(3, 9), standard_welfare(3, 9));
    }
}
