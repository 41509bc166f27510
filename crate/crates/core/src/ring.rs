//! Arithmetic in the residue ring `Z/n`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CategoryError;

/// The ring of integers modulo `n`, with `n >= 2`.
///
/// Residues are always kept in the canonical range `[0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZMod {
    n: u32,
}

/// Extended gcd over the integers: returns `(g, s, t)` with `s*a + t*b = g >= 0`.
pub fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl ZMod {
    pub fn new(n: u32) -> Result<Self, CategoryError> {
        if n < 2 {
            return Err(CategoryError::InvalidRing(format!("modulus must be at least 2, got {n}")));
        }
        if n > (1 << 30) {
            return Err(CategoryError::InvalidRing(format!("modulus {n} is too large")));
        }
        Ok(ZMod { n })
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn reduce(&self, x: i64) -> u32 {
        x.rem_euclid(self.n as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.n as u64) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.n as u64 - b as u64) % self.n as u64) as u32
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.n as u64) as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.n - a
        }
    }

    /// `gcd(a, n)`, the canonical generator of the ideal `aR`.
    /// Zero maps to `n` itself, i.e. the zero ideal.
    pub fn ideal_generator(&self, a: u32) -> u32 {
        gcd(a as u64, self.n as u64) as u32
    }

    pub fn is_unit(&self, a: u32) -> bool {
        self.ideal_generator(a) == 1
    }

    pub fn inverse(&self, a: u32) -> Option<u32> {
        let (g, s, _) = egcd(a as i64, self.n as i64);
        (g == 1).then(|| self.reduce(s))
    }

    /// A unit `u` with `u * a = gcd(a, n)` (mod n). For `a = 0` this is 1.
    pub fn unit_normalizer(&self, a: u32) -> u32 {
        let a = a % self.n;
        if a == 0 {
            return 1;
        }
        let g = self.ideal_generator(a) as u64;
        let n = self.n as u64;
        let reduced_n = n / g;
        if reduced_n == 1 {
            return 1;
        }
        let a_red = (a as u64 / g) % reduced_n;
        let (_, s, _) = egcd(a_red as i64, reduced_n as i64);
        let base = s.rem_euclid(reduced_n as i64) as u64;
        // Lift base from Z/(n/g) to a unit of Z/n.
        (0..g)
            .map(|k| base + k * reduced_n)
            .find(|&u| gcd(u, n) == 1)
            .expect("a unit lift always exists") as u32
    }

    /// Whether `a` is divisible by the ideal generator `d` (a divisor of n).
    pub fn divides(&self, d: u32, a: u32) -> bool {
        let d = self.ideal_generator(d);
        a.is_multiple_of(d)
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.n
    }

    pub fn units(&self) -> Vec<u32> {
        (1..self.n).filter(|&a| self.is_unit(a)).collect()
    }

    pub fn idempotents(&self) -> Vec<u32> {
        (0..self.n).filter(|&a| self.mul(a, a) == a).collect()
    }

    /// Divisors of n, in increasing order.
    pub fn divisors(&self) -> Vec<u32> {
        (1..=self.n).filter(|d| self.n.is_multiple_of(*d)).collect()
    }

    /// The additive order of the cyclic module `R/dR` where `d` is the
    /// canonical generator (zero meaning the zero ideal).
    pub fn quotient_order(&self, d: u32) -> u64 {
        let g = self.ideal_generator(d);
        g as u64
    }

    pub fn is_field(&self) -> bool {
        let n = self.n;
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }
}

impl fmt::Display for ZMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_moduli() {
        assert!(ZMod::new(0).is_err());
        assert!(ZMod::new(1).is_err());
        assert!(ZMod::new(2).is_ok());
    }

    #[test]
    fn arithmetic_mod_six() {
        let r = ZMod::new(6).unwrap();
        assert_eq!(r.mul(2, 3), 0);
        assert_eq!(r.add(5, 4), 3);
        assert_eq!(r.sub(1, 4), 3);
        assert_eq!(r.neg(2), 4);
        assert_eq!(r.units(), vec![1, 5]);
        assert_eq!(r.idempotents(), vec![0, 1, 3, 4]);
        assert_eq!(r.inverse(5), Some(5));
        assert_eq!(r.inverse(3), None);
    }

    #[test]
    fn unit_normalizer_hits_ideal_generator() {
        for n in [4u32, 6, 8, 9, 12, 30] {
            let r = ZMod::new(n).unwrap();
            for a in 0..n {
                let u = r.unit_normalizer(a);
                assert!(r.is_unit(u), "n={n} a={a} u={u}");
                let expected = if a == 0 { 0 } else { r.ideal_generator(a) % n };
                assert_eq!(r.mul(u, a), expected, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn field_detection() {
        assert!(ZMod::new(2).unwrap().is_field());
        assert!(ZMod::new(7).unwrap().is_field());
        assert!(!ZMod::new(6).unwrap().is_field());
    }
}
