//! Arithmetic on the residue ring Z/nZ.
//!
//! Residues are always stored fully reduced in `[0, n)`. Products are formed
//! in 64-bit intermediates, which is why the modulus is capped at `2^31 - 1`.

use std::fmt;
use std::ops::{Add, Mul};

use thiserror::Error;

/// Largest supported number of states.
pub const MAX_MODULUS: u64 = (1 << 31) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZmodError {
    #[error("modulus must satisfy 2 <= n <= {MAX_MODULUS}, got {0}")]
    InvalidModulus(u64),
    #[error("gcd(0, 0) is undefined")]
    GcdOfZeros,
    #[error("no inverse: seed {value} not coprime to modulus {modulus}")]
    NotAUnit { value: u32, modulus: u32 },
    #[error("{divisor} does not divide {modulus} into a quotient with at least two states")]
    InvalidDivisor { modulus: u32, divisor: u32 },
    #[error("state {value} outside subgroup {divisor}Z/{modulus}Z")]
    OutsideSubgroup {
        value: u32,
        divisor: u32,
        modulus: u32,
    },
}

/// The number of states `n`, with `2 <= n <= 2^31 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Modulus(u32);

impl Modulus {
    pub fn new(n: u64) -> Result<Self, ZmodError> {
        if (2..=MAX_MODULUS).contains(&n) {
            Ok(Modulus(n as u32))
        } else {
            Err(ZmodError::InvalidModulus(n))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Reduces an arbitrary signed integer into `[0, n)` (floor-mod).
    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    pub fn residue(self, x: i64) -> Residue {
        Residue {
            value: self.reduce(x),
            modulus: self,
        }
    }

    pub fn zero(self) -> Residue {
        self.residue(0)
    }

    /// Iterates over every residue `0, 1, ..., n-1`.
    pub fn residues(self) -> impl Iterator<Item = Residue> {
        (0..self.0).map(move |value| Residue {
            value,
            modulus: self,
        })
    }

    pub fn is_unit(self, value: u32) -> bool {
        gcd_u64(value as u64, self.0 as u64) == 1
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An element of Z/nZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Residue {
    value: u32,
    modulus: Modulus,
}

impl Residue {
    /// Builds a residue from a value that must already lie in `[0, n)`.
    pub fn new(value: u64, modulus: Modulus) -> Option<Self> {
        (value < modulus.get() as u64).then_some(Residue {
            value: value as u32,
            modulus,
        })
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn is_unit(self) -> bool {
        self.modulus.is_unit(self.value)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Residue {
    type Output = Residue;

    fn add(self, rhs: Residue) -> Residue {
        assert_eq!(self.modulus, rhs.modulus, "residues from different rings");
        let n = self.modulus.get() as u64;
        Residue {
            value: ((self.value as u64 + rhs.value as u64) % n) as u32,
            modulus: self.modulus,
        }
    }
}

impl Mul for Residue {
    type Output = Residue;

    fn mul(self, rhs: Residue) -> Residue {
        assert_eq!(self.modulus, rhs.modulus, "residues from different rings");
        Residue {
            value: mul_mod(self.value, rhs.value, self.modulus.get()),
            modulus: self.modulus,
        }
    }
}

#[inline]
pub(crate) fn mul_mod(x: u32, y: u32, n: u32) -> u32 {
    ((x as u64 * y as u64) % n as u64) as u32
}

fn gcd_u64(mut x: u64, mut y: u64) -> u64 {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

/// Greatest common divisor, with `gcd(x, 0) = x`. `(0, 0)` is rejected.
pub fn gcd(x: u64, y: u64) -> Result<u64, ZmodError> {
    if x == 0 && y == 0 {
        return Err(ZmodError::GcdOfZeros);
    }
    Ok(gcd_u64(x, y))
}

/// The unit group (Z/nZ)^x: residues in `[1, n)` coprime to `n`, ascending.
///
/// Every unit is also a generator of the additive group Z/nZ.
pub fn units(n: Modulus) -> Vec<Residue> {
    n.residues().skip(1).filter(|r| r.is_unit()).collect()
}

/// Multiplicative inverse via the extended Euclidean algorithm.
pub fn inverse(k: Residue) -> Result<Residue, ZmodError> {
    let n = k.modulus.get() as i64;
    let (mut old_r, mut r) = (k.value as i64, n);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return Err(ZmodError::NotAUnit {
            value: k.value,
            modulus: k.modulus.get(),
        });
    }
    Ok(k.modulus.residue(old_s))
}

/// Multiplication by a fixed residue, `b -> k*b mod n`.
///
/// This is a group automorphism of Z/nZ exactly when `k` is a unit. Non-unit
/// multipliers are allowed and give a plain, non-injective map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleMap {
    k: Residue,
}

impl ScaleMap {
    pub fn multiplier(&self) -> Residue {
        self.k
    }

    pub fn apply(&self, b: Residue) -> Residue {
        self.k * b
    }

    pub fn is_automorphism(&self) -> bool {
        self.k.is_unit()
    }
}

pub fn scale_map(k: Residue) -> ScaleMap {
    ScaleMap { k }
}

/// The isomorphism `dZ/nZ -> Z/(n/d)Z`, `b -> b/d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientMap {
    source: Modulus,
    divisor: u32,
    target: Modulus,
}

impl QuotientMap {
    pub fn source(&self) -> Modulus {
        self.source
    }

    pub fn target(&self) -> Modulus {
        self.target
    }

    pub fn divisor(&self) -> u32 {
        self.divisor
    }

    /// The domain `dZ/nZ`, ascending.
    pub fn domain(&self) -> impl Iterator<Item = Residue> + '_ {
        (0..self.target.get()).map(move |j| Residue {
            value: j * self.divisor,
            modulus: self.source,
        })
    }

    pub fn apply(&self, b: Residue) -> Result<Residue, ZmodError> {
        assert_eq!(b.modulus, self.source, "residue from a different ring");
        if !b.value.is_multiple_of(self.divisor) {
            return Err(ZmodError::OutsideSubgroup {
                value: b.value,
                divisor: self.divisor,
                modulus: self.source.get(),
            });
        }
        Ok(Residue {
            value: b.value / self.divisor,
            modulus: self.target,
        })
    }
}

/// Builds the quotient map for a divisor `d` of `n`. The target ring must have
/// at least two states, so `d = n` is rejected.
pub fn quotient_map(n: Modulus, d: u32) -> Result<QuotientMap, ZmodError> {
    let invalid = ZmodError::InvalidDivisor {
        modulus: n.get(),
        divisor: d,
    };
    if d == 0 || !n.get().is_multiple_of(d) {
        return Err(invalid);
    }
    let target = Modulus::new((n.get() / d) as u64).map_err(|_| invalid)?;
    Ok(QuotientMap {
        source: n,
        divisor: d,
        target,
    })
}
