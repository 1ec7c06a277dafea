//! Random register generators shared by the integration tests.

#![allow(dead_code)]

use nlfsr::{Anf, Monomial, Nlfsr};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random polynomial over the variables in `allowed` with up to `max_terms`
/// terms of degree at most 3.
pub fn random_poly(rng: &mut StdRng, allowed: &[usize], max_terms: usize, constant: bool) -> Anf {
    let mut p = Anf::zero();
    if allowed.is_empty() {
        if constant && rng.random_bool(0.5) {
            p.toggle(Monomial::ONE);
        }
        return p;
    }
    for _ in 0..rng.random_range(0..=max_terms) {
        let degree = rng.random_range(1..=3usize.min(allowed.len()));
        let mut m = Monomial::ONE;
        for _ in 0..degree {
            let v = allowed[rng.random_range(0..allowed.len())];
            m = Monomial::from_mask(m.mask() | 1 << v);
        }
        p.toggle(m);
    }
    if constant && rng.random_bool(0.1) {
        p.toggle(Monomial::ONE);
    }
    p
}

/// Any singular register: every `g_i` avoids its own shift tap.
pub fn random_singular(rng: &mut StdRng, n: usize) -> Nlfsr {
    let g = (0..n)
        .map(|i| {
            if rng.random_bool(0.5) {
                return Anf::zero();
            }
            let allowed: Vec<usize> = (0..n).filter(|&v| v != (i + 1) % n).collect();
            random_poly(rng, &allowed, 3, true)
        })
        .collect();
    Nlfsr::new(n, g).expect("singular by construction")
}

/// Uniform register with a random terminal bit: bits below it are pure and
/// every function from it upwards reads only variables up to it.
pub fn random_uniform(rng: &mut StdRng, n: usize) -> Nlfsr {
    loop {
        let tau = rng.random_range(0..n);
        let mut g = vec![Anf::zero(); n];
        for (i, gi) in g.iter_mut().enumerate().skip(tau) {
            if i != tau && rng.random_bool(0.4) {
                continue;
            }
            let allowed: Vec<usize> = (0..=tau).filter(|&v| v != (i + 1) % n).collect();
            *gi = random_poly(rng, &allowed, 4, true);
        }
        if tau < n - 1 && g[tau].is_zero() {
            continue;
        }
        return Nlfsr::new(n, g).expect("singular by construction");
    }
}

pub fn random_fibonacci(rng: &mut StdRng, n: usize) -> Nlfsr {
    let allowed: Vec<usize> = (1..n).collect();
    let mut g = random_poly(rng, &allowed, 5, true);
    if rng.random_bool(0.5) {
        // keep the recurrence of full order
        g.toggle(Monomial::from_mask(1 << rng.random_range(1..n)));
    }
    let mut f = g;
    f.toggle(Monomial::from_mask(1));
    Nlfsr::fibonacci(n, f).expect("singular by construction")
}
