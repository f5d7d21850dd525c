//! Seeded, draw-counting randomness. Every randomized choice in the crate
//! flows from a single `u64` seed through [`CountedRng`].

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::determinant;
use crate::matrix::RMatrix;
use crate::scalar::{q, Rational, Real, Scalar};

#[derive(Clone, Debug)]
pub struct CountedRng {
    inner: ChaCha8Rng,
    draws: u64,
}

impl CountedRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
        }
    }

    /// Independent stream for a named task, so results do not depend on the
    /// order in which tasks run.
    pub fn derive(seed: u64, label: &str) -> Self {
        // FNV-1a over the label
        let h = label.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        });
        Self::new(seed ^ h.rotate_left(17))
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// `p/d` with `p` uniform in `-num..=num` and `d` uniform in `1..=den`.
    pub fn rational(&mut self, num: i64, den: i64) -> Rational {
        let p = self.random_range(-num..=num);
        let d = self.random_range(1..=den);
        q(p, d)
    }

    pub fn nonzero_rational(&mut self, num: i64, den: i64) -> Rational {
        loop {
            let x = self.rational(num, den);
            if !x.negligible(0.0) {
                return x;
            }
        }
    }

    /// Random invertible rational matrix with small entries.
    pub fn invertible(&mut self, dim: usize) -> RMatrix {
        loop {
            let g = RMatrix::from_fn(dim, dim, |_, _| self.rational(3, 2));
            if !determinant(&g).expect("square").negligible(0.0) {
                return g;
            }
        }
    }

    /// `Id + E` with small rational entries in `E` and positive determinant.
    pub fn near_identity(&mut self, dim: usize, scale: i64) -> RMatrix {
        loop {
            let g = RMatrix::from_fn(dim, dim, |r, c| {
                let e = self.rational(2, 3) * q(1, scale);
                if r == c {
                    e + Rational::from_i64(1)
                } else {
                    e
                }
            });
            if determinant(&g).expect("square").sign(0.0) > 0 {
                return g;
            }
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.random_range(lo..hi)
    }
}

impl RngCore for CountedRng {
    fn next_u32(&mut self) -> u32 {
        self.draws += 1;
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.draws += 1;
        self.inner.fill_bytes(dst)
    }
}
