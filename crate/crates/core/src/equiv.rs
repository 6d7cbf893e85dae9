//! Explicit state maps between patterns and finite-horizon isomorphism
//! certificates.
//!
//! Two constructions are provided:
//!
//! * unit seeds `a`, `b` of the same ring are related by multiplication with
//!   `k = b * a^-1` ([`seed_map`]);
//! * any nonzero seed `a` over `n` reduces to seed 1 over `r = n / gcd(n, a)`
//!   by dividing by `d = gcd(n, a)` and then multiplying by `(a/d)^-1 mod r`
//!   ([`canonicalize`]).
//!
//! [`verify_isomorphism`] checks a candidate map cell by cell over both light
//! cones up to the patterns' common horizon.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::engine::{evolve, EngineError, Pattern};
use crate::rule::TransitionRule;
use crate::zmod::{self, Modulus, Residue, ZmodError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("seed must be nonzero")]
    ZeroSeed,
    #[error("seed {seed} out of range for {modulus} states")]
    SeedOutOfRange { seed: u64, modulus: u32 },
    #[error("seed {seed} is not a unit mod {modulus}; unit-seed maps need gcd(seed, n) = 1, use canonicalize")]
    NonUnitSeed { seed: u32, modulus: u32 },
    #[error("seeds lie in different canonical classes: r_a={r_a} r_b={r_b}")]
    DifferentClasses { r_a: u32, r_b: u32 },
    #[error("state map is not injective: {first} and {second} both map to {image}")]
    NotInjective { first: u32, second: u32, image: u32 },
    #[error("state map must send 0 to 0")]
    ZeroNotFixed,
    #[error("state {state} listed twice in map")]
    DuplicateState { state: u32 },
    #[error("state {state} out of range for {modulus} states")]
    StateOutOfRange { state: u32, modulus: u32 },
    #[error("patterns are not comparable: {0}")]
    Incomparable(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Zmod(#[from] ZmodError),
}

/// An injective table between state sets, always fixing 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateMap {
    source: Modulus,
    target: Modulus,
    table: BTreeMap<u32, u32>,
}

impl StateMap {
    pub fn new(
        source: Modulus,
        target: Modulus,
        pairs: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, EquivError> {
        let mut table = BTreeMap::new();
        let mut images: BTreeMap<u32, u32> = BTreeMap::new();
        for (b, image) in pairs {
            if b >= source.get() {
                return Err(EquivError::StateOutOfRange {
                    state: b,
                    modulus: source.get(),
                });
            }
            if image >= target.get() {
                return Err(EquivError::StateOutOfRange {
                    state: image,
                    modulus: target.get(),
                });
            }
            if table.insert(b, image).is_some() {
                return Err(EquivError::DuplicateState { state: b });
            }
            if let Some(first) = images.insert(image, b) {
                return Err(EquivError::NotInjective {
                    first,
                    second: b,
                    image,
                });
            }
        }
        if table.get(&0) != Some(&0) {
            return Err(EquivError::ZeroNotFixed);
        }
        Ok(StateMap {
            source,
            target,
            table,
        })
    }

    pub fn identity(n: Modulus) -> Self {
        StateMap {
            source: n,
            target: n,
            table: (0..n.get()).map(|b| (b, b)).collect(),
        }
    }

    pub fn source(&self) -> Modulus {
        self.source
    }

    pub fn target(&self) -> Modulus {
        self.target
    }

    pub fn apply(&self, b: u32) -> Option<u32> {
        self.table.get(&b).copied()
    }

    pub fn domain(&self) -> impl Iterator<Item = u32> + '_ {
        self.table.keys().copied()
    }

    /// `(b, f(b))` pairs in ascending `b`.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.table.iter().map(|(&b, &v)| (b, v))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.table.iter().all(|(b, v)| b == v)
    }

    pub fn inverse(&self) -> StateMap {
        StateMap {
            source: self.target,
            target: self.source,
            table: self.table.iter().map(|(&b, &v)| (v, b)).collect(),
        }
    }

    /// The map restricted to `states`, keeping `0 -> 0`.
    pub fn restricted_to(&self, states: &BTreeSet<u32>) -> StateMap {
        StateMap {
            source: self.source,
            target: self.target,
            table: self
                .table
                .iter()
                .filter(|(b, _)| **b == 0 || states.contains(b))
                .map(|(&b, &v)| (b, v))
                .collect(),
        }
    }

    /// `other ∘ self`, defined where `self`'s image lies in `other`'s domain.
    pub fn then(&self, other: &StateMap) -> Result<StateMap, EquivError> {
        if self.target != other.source {
            return Err(EquivError::Incomparable(format!(
                "cannot compose a map into Z/{}Z with a map from Z/{}Z",
                self.target, other.source
            )));
        }
        let pairs = self
            .table
            .iter()
            .filter_map(|(&b, &v)| other.apply(v).map(|w| (b, w)));
        StateMap::new(self.source, other.target, pairs)
    }
}

impl fmt::Display for StateMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, (b, v)) in self.pairs().enumerate() {
            if idx > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{b}->{v}")?;
        }
        Ok(())
    }
}

fn nonzero_seed(n: Modulus, seed: u64) -> Result<Residue, EquivError> {
    if seed == 0 {
        return Err(EquivError::ZeroSeed);
    }
    Residue::new(seed, n).ok_or(EquivError::SeedOutOfRange {
        seed,
        modulus: n.get(),
    })
}

fn unit_seed(n: Modulus, seed: u64) -> Result<Residue, EquivError> {
    let a = nonzero_seed(n, seed)?;
    if !a.is_unit() {
        return Err(EquivError::NonUnitSeed {
            seed: a.value(),
            modulus: n.get(),
        });
    }
    Ok(a)
}

/// `b -> k*b` on all of Z/nZ with `k = target_seed * seed^-1`; both seeds must
/// be units.
pub fn seed_map(n: Modulus, seed: u64, target_seed: u64) -> Result<StateMap, EquivError> {
    let a = unit_seed(n, seed)?;
    let b = unit_seed(n, target_seed)?;
    let f = zmod::scale_map(b * zmod::inverse(a)?);
    Ok(StateMap {
        source: n,
        target: n,
        table: n
            .residues()
            .map(|x| (x.value(), f.apply(x).value()))
            .collect(),
    })
}

/// Reduction of `(n, a)` to `(r, 1)` with `r = n / gcd(n, a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonical {
    pub divisor: u32,
    pub modulus: Modulus,
    pub map: StateMap,
}

/// Maps the subgroup `dZ/nZ` onto Z/rZ so that the seed lands on 1.
pub fn canonicalize(n: Modulus, seed: u64) -> Result<Canonical, EquivError> {
    let a = nonzero_seed(n, seed)?;
    let d = zmod::gcd(n.get() as u64, a.value() as u64)? as u32;
    let quotient = zmod::quotient_map(n, d)?;
    let r = quotient.target();
    let to_seed_one = zmod::scale_map(zmod::inverse(quotient.apply(a)?)?);
    let table = quotient
        .domain()
        .map(|b| {
            let image = to_seed_one.apply(quotient.apply(b).expect("domain element"));
            (b.value(), image.value())
        })
        .collect();
    Ok(Canonical {
        divisor: d,
        modulus: r,
        map: StateMap {
            source: n,
            target: r,
            table,
        },
    })
}

/// A map from seed `a`'s pattern to seed `b`'s pattern over the same ring.
///
/// Unit seeds use [`seed_map`]. Otherwise both seeds are canonicalized and the
/// first canonical map is followed by the inverse of the second; this needs
/// `gcd(n, a) = gcd(n, b)`.
pub fn transfer_map(n: Modulus, a: u64, b: u64) -> Result<StateMap, EquivError> {
    let ca = canonicalize(n, a)?;
    let cb = canonicalize(n, b)?;
    if ca.modulus != cb.modulus {
        return Err(EquivError::DifferentClasses {
            r_a: ca.modulus.get(),
            r_b: cb.modulus.get(),
        });
    }
    if ca.divisor == 1 {
        return seed_map(n, a, b);
    }
    ca.map.then(&cb.map.inverse())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Verified,
    /// First failing cell in `(t, site)` lexicographic order.
    Falsified {
        t: usize,
        site: Vec<i64>,
    },
}

/// Finite-horizon witness that `map` carries one pattern onto another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub rule: TransitionRule,
    pub source_modulus: Modulus,
    pub source_seed: u32,
    pub target_modulus: Modulus,
    pub target_seed: u32,
    pub horizon: usize,
    pub map: StateMap,
    pub status: Status,
}

impl Certificate {
    pub fn is_verified(&self) -> bool {
        self.status == Status::Verified
    }
}

/// Line-oriented text form, one `map` line per domain element.
impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "certificate v1")?;
        writeln!(
            f,
            "source n={} a={} rule=\"{}\" tmax={}",
            self.source_modulus, self.source_seed, self.rule, self.horizon
        )?;
        writeln!(f, "target n={} a={}", self.target_modulus, self.target_seed)?;
        for (b, v) in self.map.pairs() {
            writeln!(f, "map {b}->{v}")?;
        }
        match &self.status {
            Status::Verified => writeln!(f, "status verified"),
            Status::Falsified { t, site } => {
                let site: Vec<String> = site.iter().map(i64::to_string).collect();
                writeln!(f, "status falsified t={t} i={}", site.join(","))
            }
        }
    }
}

pub(crate) fn check_comparable(p: &Pattern, q: &Pattern) -> Result<(), EquivError> {
    if p.rule() != q.rule() {
        return Err(EquivError::Incomparable(format!(
            "rules differ: \"{}\" vs \"{}\"",
            p.rule(),
            q.rule()
        )));
    }
    if p.t_max() != q.t_max() {
        return Err(EquivError::Incomparable(format!(
            "horizons differ: {} vs {}",
            p.t_max(),
            q.t_max()
        )));
    }
    Ok(())
}

/// Checks `f(p[t][i]) == q[t][i]` for every `t <= t_max` and every site in the
/// union of both light cones. A source state outside `f`'s domain counts as a
/// failure.
pub fn verify_isomorphism(
    p: &Pattern,
    q: &Pattern,
    f: &StateMap,
) -> Result<Certificate, EquivError> {
    check_comparable(p, q)?;
    if f.source() != p.modulus() || f.target() != q.modulus() {
        return Err(EquivError::Incomparable(format!(
            "map goes Z/{}Z -> Z/{}Z but patterns are over {} and {} states",
            f.source(),
            f.target(),
            p.modulus(),
            q.modulus()
        )));
    }
    let status = first_mismatch(p, q, |b| f.apply(b))
        .map_or(Status::Verified, |(t, site)| Status::Falsified { t, site });
    Ok(Certificate {
        rule: p.rule().clone(),
        source_modulus: p.modulus(),
        source_seed: p.seed().value(),
        target_modulus: q.modulus(),
        target_seed: q.seed().value(),
        horizon: p.t_max(),
        map: f.clone(),
        status,
    })
}

pub(crate) fn first_mismatch(
    p: &Pattern,
    q: &Pattern,
    f: impl Fn(u32) -> Option<u32>,
) -> Option<(usize, Vec<i64>)> {
    for (t, (row_p, row_q)) in p.rows().iter().zip(q.rows()).enumerate() {
        let bounds = row_p.bounds().union(row_q.bounds());
        for site in bounds.sites() {
            if f(row_p.get(&site)) != Some(row_q.get(&site)) {
                return Some((t, site));
            }
        }
    }
    None
}

/// Seeds of one ring sharing the canonical modulus `n / gcd(n, a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedClass {
    pub divisor: u32,
    pub canonical: Modulus,
    pub seeds: Vec<u32>,
    /// One certificate per seed, each against the canonical `(r, 1)` pattern.
    pub certificates: Vec<Certificate>,
}

impl SeedClass {
    pub fn is_verified(&self) -> bool {
        self.certificates.iter().all(Certificate::is_verified)
    }
}

/// Partitions seeds `1..n` by canonical modulus, ordered by ascending
/// `gcd(n, a)`, and certifies each seed against its canonical pattern.
pub fn equivalence_classes(
    n: Modulus,
    rule: &TransitionRule,
    t_max: usize,
) -> Result<Vec<SeedClass>, EquivError> {
    let divisors: BTreeSet<u32> = (1..n.get())
        .map(|a| zmod::gcd(n.get() as u64, a as u64).map(|d| d as u32))
        .collect::<Result<_, _>>()?;
    let mut classes = Vec::with_capacity(divisors.len());
    for d in divisors {
        let canonical = Modulus::new((n.get() / d) as u64)?;
        let target = evolve(canonical, rule, 1, t_max)?;
        let seeds: Vec<u32> = (1..n.get())
            .filter(|&a| zmod::gcd(n.get() as u64, a as u64) == Ok(d as u64))
            .collect();
        let mut certificates = Vec::with_capacity(seeds.len());
        for &a in &seeds {
            let source = evolve(n, rule, a as u64, t_max)?;
            let canon = canonicalize(n, a as u64)?;
            certificates.push(verify_isomorphism(&source, &target, &canon.map)?);
        }
        classes.push(SeedClass {
            divisor: d,
            canonical,
            seeds,
            certificates,
        });
    }
    Ok(classes)
}
