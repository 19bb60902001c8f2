//! Fixed-point lift for integer-slope piecewise-affine maps.
//!
//! A point `x ∈ [0,1)` is stored as `n = ⌊x·2^64⌋`; the discarded fraction is
//! treated as uniform. One branch `x ↦ s·x + c` then acts on the lattice as
//! `n ↦ s·n + c + d`, where `d` is the integer carry of `s·U` for the unknown
//! sub-resolution part `U`. Drawing `d` uniformly keeps the lifted chain
//! distributed exactly like the real orbit of a Lebesgue-random point, and
//! avoids the collapse to 0 that plain binary floating point suffers under
//! the doubling map.

use rand::{Rng, RngCore};

use super::map::MapSpec;

const TWO_64: f64 = 18_446_744_073_709_551_616.0;

/// `⌊x·2^64⌋` of `x mod 1`.
#[inline]
pub fn to_fixed(x: f64) -> u64 {
    let v = super::map::wrap_unit(x) * TWO_64;
    if v >= TWO_64 {
        0
    } else {
        v as u64
    }
}

#[inline]
pub fn from_fixed(n: u64) -> f64 {
    let v = n as f64 / TWO_64;
    if v >= 1.0 {
        0.0
    } else {
        v
    }
}

/// Fixed-point representation of a signed displacement `|v| < 1/2`.
#[inline]
pub(crate) fn signed_fixed(v: f64) -> i64 {
    (v * TWO_64).round() as i64
}

/// Buffered random bits for power-of-two carries.
#[derive(Debug, Clone, Default)]
pub(crate) struct BitPool {
    word: u64,
    left: u32,
}

impl BitPool {
    #[inline]
    fn take<R: RngCore>(&mut self, rng: &mut R, bits: u32) -> u64 {
        if self.left < bits {
            self.word = rng.next_u64();
            self.left = 64;
        }
        let v = self.word & ((1u64 << bits) - 1);
        self.word >>= bits;
        self.left -= bits;
        v
    }

    /// Uniform digit in `0..base`.
    #[inline]
    pub(crate) fn digit<R: RngCore>(&mut self, rng: &mut R, base: u64) -> u64 {
        if base.is_power_of_two() {
            match base.trailing_zeros() {
                0 => 0,
                b => self.take(rng, b),
            }
        } else {
            rng.random_range(0..base)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Branch {
    slope: i64,
    offset: u64,
}

/// Lattice action of one map.
#[derive(Debug, Clone)]
pub(crate) struct LiftMap {
    /// Lower lattice cut of each branch after the first.
    cuts: Vec<u64>,
    branches: Vec<Branch>,
}

/// Nearest lattice point to `2^64 · num / den`.
fn lattice_cut(num: u128, den: u128) -> u64 {
    let scaled = (num << 64) + den / 2;
    (scaled / den) as u64
}

impl LiftMap {
    pub(crate) fn from_spec(map: &MapSpec) -> Option<Self> {
        match map {
            MapSpec::MarkovThreeBranch => Some(LiftMap {
                // x ≥ 1/3 ⇔ n ≥ ⌈2^64/3⌉ up to a sub-resolution sliver
                cuts: vec![lattice_cut(1, 3) + 1, lattice_cut(2, 3)],
                branches: vec![
                    Branch { slope: 3, offset: 0 },
                    Branch { slope: -2, offset: lattice_cut(2, 3) },
                    Branch { slope: 3, offset: 0 },
                ],
            }),
            _ => {
                let (slope, offset) = map.integer_affine()?;
                Some(LiftMap { cuts: Vec::new(), branches: vec![Branch { slope, offset: to_fixed(offset) }] })
            }
        }
    }

    #[inline]
    pub(crate) fn apply<R: RngCore>(&self, n: u64, rng: &mut R, bits: &mut BitPool) -> u64 {
        let b =
            if self.cuts.is_empty() { self.branches[0] } else { self.branches[self.cuts.partition_point(|&c| c <= n)] };
        let base = (b.slope as u64).wrapping_mul(n).wrapping_add(b.offset);
        let s = b.slope.unsigned_abs();
        if b.slope > 0 {
            base.wrapping_add(bits.digit(rng, s))
        } else {
            base.wrapping_sub(1 + bits.digit(rng, s))
        }
    }
}

/// One step of the cat map on the `(2^-64 Z)^2` lattice; exact and invertible.
#[inline]
pub(crate) fn cat_step(p: [u64; 2]) -> [u64; 2] {
    let x = p[0].wrapping_add(p[1]);
    [x, x.wrapping_add(p[1])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Channel};

    #[test]
    fn fixed_roundtrip() {
        for x in [0.0, 0.2, 0.5, 0.8, 1.0 - 1e-16] {
            assert!((from_fixed(to_fixed(x)) - x).abs() < 1e-15);
        }
        assert_eq!(to_fixed(1.0), 0);
        assert_eq!(to_fixed(-0.25), to_fixed(0.75));
        assert_eq!(from_fixed(u64::MAX), 0.0);
    }

    #[test]
    fn doubling_lift_does_not_collapse() {
        let lift = LiftMap::from_spec(&MapSpec::Doubling).unwrap();
        let mut rng = stream(1, Channel::Dynamics, 0);
        let mut bits = BitPool::default();
        let mut n = to_fixed(0.3);
        let mut zeros = 0;
        for _ in 0..1000 {
            n = lift.apply(n, &mut rng, &mut bits);
            zeros += usize::from(n == 0);
        }
        assert_eq!(zeros, 0);
    }

    #[test]
    fn lift_tracks_float_map_for_a_few_steps() {
        let mut rng = stream(2, Channel::Dynamics, 0);
        let mut bits = BitPool::default();
        for map in [
            MapSpec::Doubling,
            MapSpec::Tripling,
            MapSpec::MarkovThreeBranch,
            MapSpec::affine(2.0, 0.5),
            MapSpec::affine(3.0, 0.1),
        ] {
            let lift = LiftMap::from_spec(&map).unwrap();
            for &x0 in &[0.1234, 0.45, 0.7] {
                let (mut n, mut x) = (to_fixed(x0), x0);
                for _ in 0..5 {
                    n = lift.apply(n, &mut rng, &mut bits);
                    x = map.step_scalar(x);
                    let d = (from_fixed(n) - x).abs();
                    assert!(d.min(1.0 - d) < 1e-12, "{map:?} from {x0}");
                }
            }
        }
    }

    #[test]
    fn markov_cuts_sit_on_thirds() {
        let lift = LiftMap::from_spec(&MapSpec::MarkovThreeBranch).unwrap();
        assert!((from_fixed(lift.cuts[0]) - 1.0 / 3.0).abs() < 1e-18);
        assert!((from_fixed(lift.cuts[1]) - 2.0 / 3.0).abs() < 1e-18);
    }

    #[test]
    fn carry_digits_are_uniform() {
        let mut rng = stream(3, Channel::Dynamics, 0);
        let mut bits = BitPool::default();
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[bits.digit(&mut rng, 3) as usize] += 1;
        }
        assert!(counts.iter().all(|&c| (c as i64 - 10_000).abs() < 400));
        let ones: u64 = (0..10_000).map(|_| bits.digit(&mut rng, 2)).sum();
        assert!((ones as i64 - 5_000).abs() < 300);
    }

    #[test]
    fn cat_lattice_step_matches_float() {
        let p = [to_fixed(0.3), to_fixed(0.55)];
        let q = cat_step(p);
        assert!((from_fixed(q[0]) - 0.85).abs() < 1e-15);
        assert!((from_fixed(q[1]) - 0.4).abs() < 1e-15);
    }
}
