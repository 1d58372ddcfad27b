//! Random generators shared by unit tests.

use nalgebra::DMatrix;
use rand::Rng;

use crate::bracket::Bracket;

/// Arbitrary skew bracket with up to `max_entries` nonzero coefficients.
pub fn random_bracket<R: Rng>(rng: &mut R, n: usize, max_entries: usize) -> Bracket {
    let mut b = Bracket::zero(n);
    let count = rng.gen_range(1..=max_entries);
    for _ in 0..count {
        let i = rng.gen_range(1..=n);
        let j = rng.gen_range(1..=n);
        if i == j {
            continue;
        }
        let k = rng.gen_range(1..=n);
        b.set(i, j, k, rng.gen_range(-2.0..2.0)).unwrap();
    }
    b
}

/// Random 2-step nilpotent bracket: generators `1..=p`, center `p+1..=n`.
pub fn random_two_step<R: Rng>(rng: &mut R, p: usize, n: usize, max_entries: usize) -> Bracket {
    let mut b = Bracket::zero(n);
    for _ in 0..max_entries {
        let i = rng.gen_range(1..=p);
        let j = rng.gen_range(1..=p);
        if i == j {
            continue;
        }
        let k = rng.gen_range(p + 1..=n);
        b.set(i, j, k, rng.gen_range(-2.0..2.0)).unwrap();
    }
    b
}

/// Random bracket whose outputs lie strictly above both inputs, which makes
/// it nilpotent but not necessarily Jacobi.
pub fn random_triangular<R: Rng>(rng: &mut R, n: usize, max_entries: usize) -> Bracket {
    let mut b = Bracket::zero(n);
    for _ in 0..max_entries {
        let i = rng.gen_range(1..n - 1);
        let j = rng.gen_range(i + 1..n);
        let k = rng.gen_range(j + 1..=n);
        b.set(i, j, k, rng.gen_range(-2.0..2.0)).unwrap();
    }
    b
}

pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    a.qr().q()
}
