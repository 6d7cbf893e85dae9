//! Finite-support configurations over Z^D and their exact evolution.
//!
//! A configuration stores a dense array over an axis-aligned box; every site
//! outside the box holds 0. One step expands the box by the rule radius in
//! every axis, so row `t` of a single-site pattern covers `[-r*t, r*t]^D`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::rule::TransitionRule;
use crate::zmod::{Modulus, Residue};

/// Upper bound on the total number of stored cells in one pattern.
pub const MAX_PATTERN_CELLS: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("seed must be nonzero")]
    ZeroSeed,
    #[error("seed {seed} out of range for {modulus} states")]
    SeedOutOfRange { seed: u64, modulus: u32 },
    #[error("rule dimension {rule} does not match configuration dimension {config}")]
    DimensionMismatch { rule: usize, config: usize },
    #[error("dimension must be between 1 and 3, got {0}")]
    Dimension(usize),
    #[error("pattern would need more than {MAX_PATTERN_CELLS} cells")]
    TooLarge,
    #[error("box and cell data disagree: expected {expected} cells, got {found}")]
    CellCount { expected: usize, found: usize },
    #[error("cell value {value} out of range for {modulus} states")]
    CellOutOfRange { value: u32, modulus: u32 },
}

/// Inclusive axis-aligned box `[lo_k, hi_k]` in Z^D.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl SupportBox {
    /// # Panics
    /// If the corner vectors have different lengths or `lo > hi` on some axis.
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "corner dimensions differ");
        assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b), "empty box");
        SupportBox { lo, hi }
    }

    /// The cube `[-radius, radius]^dimension`.
    pub fn centered(dimension: usize, radius: i64) -> Self {
        SupportBox::new(vec![-radius; dimension], vec![radius; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn shape(&self) -> Vec<usize> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a + 1) as usize)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        site.len() == self.lo.len()
            && site
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| a <= x && x <= b)
    }

    pub fn expand(&self, by: i64) -> Self {
        SupportBox {
            lo: self.lo.iter().map(|x| x - by).collect(),
            hi: self.hi.iter().map(|x| x + by).collect(),
        }
    }

    pub fn union(&self, other: &SupportBox) -> Self {
        SupportBox {
            lo: self
                .lo
                .iter()
                .zip(&other.lo)
                .map(|(a, b)| *a.min(b))
                .collect(),
            hi: self
                .hi
                .iter()
                .zip(&other.hi)
                .map(|(a, b)| *a.max(b))
                .collect(),
        }
    }

    /// Row-major index of `site`, last axis fastest.
    fn index(&self, site: &[i64]) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let idx = site
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .fold(0usize, |idx, (x, (lo, hi))| {
                idx * (hi - lo + 1) as usize + (x - lo) as usize
            });
        Some(idx)
    }

    /// All sites in lexicographic order.
    pub fn sites(&self) -> Sites<'_> {
        Sites {
            bounds: self,
            next: Some(self.lo.clone()),
        }
    }
}

/// Lexicographic iterator over the sites of a [`SupportBox`].
pub struct Sites<'a> {
    bounds: &'a SupportBox,
    next: Option<Vec<i64>>,
}

impl Iterator for Sites<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for k in (0..succ.len()).rev() {
            if succ[k] < self.bounds.hi[k] {
                succ[k] += 1;
                self.next = Some(succ);
                break;
            }
            succ[k] = self.bounds.lo[k];
        }
        Some(current)
    }
}

/// A finite-support configuration `u: Z^D -> Z/nZ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    modulus: Modulus,
    bounds: SupportBox,
    cells: Vec<u32>,
}

impl Configuration {
    pub fn new(modulus: Modulus, bounds: SupportBox, cells: Vec<u32>) -> Result<Self, EngineError> {
        if !(1..=3).contains(&bounds.dimension()) {
            return Err(EngineError::Dimension(bounds.dimension()));
        }
        if bounds.len() != cells.len() {
            return Err(EngineError::CellCount {
                expected: bounds.len(),
                found: cells.len(),
            });
        }
        if let Some(&value) = cells.iter().find(|&&v| v >= modulus.get()) {
            return Err(EngineError::CellOutOfRange {
                value,
                modulus: modulus.get(),
            });
        }
        Ok(Configuration {
            modulus,
            bounds,
            cells,
        })
    }

    /// The all-zero configuration stored over `bounds`.
    pub fn zeros(modulus: Modulus, bounds: SupportBox) -> Self {
        let cells = vec![0; bounds.len()];
        Configuration {
            modulus,
            bounds,
            cells,
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    pub fn bounds(&self) -> &SupportBox {
        &self.bounds
    }

    /// Raw cell values in row-major order over [`Self::bounds`].
    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    /// State at `site`; 0 outside the stored box.
    pub fn get(&self, site: &[i64]) -> u32 {
        self.bounds.index(site).map_or(0, |i| self.cells[i])
    }

    pub fn nonzero_sites(&self) -> impl Iterator<Item = (Vec<i64>, u32)> + '_ {
        self.bounds
            .sites()
            .zip(self.cells.iter().copied())
            .filter(|&(_, v)| v != 0)
    }

    /// Equality as functions on Z^D, ignoring how much zero padding is stored.
    pub fn same_cells(&self, other: &Configuration) -> bool {
        self.modulus == other.modulus
            && self.dimension() == other.dimension()
            && self
                .bounds
                .union(&other.bounds)
                .sites()
                .all(|s| self.get(&s) == other.get(&s))
    }

    /// Re-stores the configuration over a larger box.
    pub fn padded_to(&self, bounds: &SupportBox) -> Configuration {
        let target = self.bounds.union(bounds);
        let cells = target.sites().map(|s| self.get(&s)).collect();
        Configuration {
            modulus: self.modulus,
            bounds: target,
            cells,
        }
    }

    /// Cell-wise sum mod n over the union of both boxes.
    pub fn add(&self, other: &Configuration) -> Configuration {
        assert_eq!(
            self.modulus, other.modulus,
            "configurations over different rings"
        );
        let n = self.modulus.get() as u64;
        let bounds = self.bounds.union(&other.bounds);
        let cells = bounds
            .sites()
            .map(|s| ((self.get(&s) as u64 + other.get(&s) as u64) % n) as u32)
            .collect();
        Configuration {
            modulus: self.modulus,
            bounds,
            cells,
        }
    }

    /// Cell-wise product with `k` mod n.
    pub fn scale(&self, k: Residue) -> Configuration {
        assert_eq!(
            self.modulus,
            k.modulus(),
            "multiplier from a different ring"
        );
        let n = self.modulus.get();
        Configuration {
            modulus: self.modulus,
            bounds: self.bounds.clone(),
            cells: self
                .cells
                .iter()
                .map(|&v| crate::zmod::mul_mod(v, k.value(), n))
                .collect(),
        }
    }

    /// One application of `rule`. Each output cell is
    /// `sum_j c_j * u[i + v_j] mod n` with `c_j` floor-reduced mod n.
    pub fn step(&self, rule: &TransitionRule) -> Result<Configuration, EngineError> {
        if rule.dimension() != self.dimension() {
            return Err(EngineError::DimensionMismatch {
                rule: rule.dimension(),
                config: self.dimension(),
            });
        }
        let n = self.modulus.get() as u64;
        let out_bounds = self.bounds.expand(rule.radius() as i64);
        let shape = out_bounds.shape();
        let mut strides = vec![1i64; shape.len()];
        for k in (0..shape.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * shape[k + 1] as i64;
        }
        let mut acc = vec![0u64; out_bounds.len()];

        // Input cell at s feeds output cell s - v_j for each term.
        let reduced: Vec<(u64, i64)> = rule
            .terms()
            .iter()
            .map(|t| {
                let c = self.modulus.reduce(t.coefficient) as u64;
                let shift: i64 = t.offset.iter().zip(&strides).map(|(v, s)| v * s).sum();
                (c, shift)
            })
            .filter(|&(c, _)| c != 0)
            .collect();
        for (site, value) in self.bounds.sites().zip(self.cells.iter().copied()) {
            if value == 0 {
                continue;
            }
            let base = out_bounds
                .index(&site)
                .expect("output box covers input box") as i64;
            for &(c, shift) in &reduced {
                let slot = &mut acc[(base - shift) as usize];
                *slot = (*slot + c * value as u64) % n;
            }
        }
        Ok(Configuration {
            modulus: self.modulus,
            bounds: out_bounds,
            cells: acc.into_iter().map(|v| v as u32).collect(),
        })
    }
}

pub fn step(c: &Configuration, rule: &TransitionRule) -> Result<Configuration, EngineError> {
    c.step(rule)
}

fn check_seed(n: Modulus, seed: u64) -> Result<Residue, EngineError> {
    if seed == 0 {
        return Err(EngineError::ZeroSeed);
    }
    Residue::new(seed, n).ok_or(EngineError::SeedOutOfRange {
        seed,
        modulus: n.get(),
    })
}

/// `u_<a>`: value `seed` at the origin of Z^D, 0 elsewhere.
pub fn single_site_seed(
    n: Modulus,
    dimension: usize,
    seed: u64,
) -> Result<Configuration, EngineError> {
    if !(1..=3).contains(&dimension) {
        return Err(EngineError::Dimension(dimension));
    }
    let a = check_seed(n, seed)?;
    Ok(Configuration {
        modulus: n,
        bounds: SupportBox::centered(dimension, 0),
        cells: vec![a.value()],
    })
}

/// The spatio-temporal pattern `T^0 u_<a>, ..., T^tmax u_<a>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    modulus: Modulus,
    rule: TransitionRule,
    seed: Residue,
    rows: Vec<Configuration>,
}

impl Pattern {
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn rule(&self) -> &TransitionRule {
        &self.rule
    }

    pub fn seed(&self) -> Residue {
        self.seed
    }

    pub fn dimension(&self) -> usize {
        self.rule.dimension()
    }

    pub fn t_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn rows(&self) -> &[Configuration] {
        &self.rows
    }

    pub fn row(&self, t: usize) -> &Configuration {
        &self.rows[t]
    }

    /// State at time `t` and `site`.
    pub fn cell(&self, t: usize, site: &[i64]) -> u32 {
        self.rows[t].get(site)
    }
}

/// Evolves the single-site seed `seed` for `t_max` steps, row by row.
pub fn evolve(
    n: Modulus,
    rule: &TransitionRule,
    seed: u64,
    t_max: usize,
) -> Result<Pattern, EngineError> {
    let origin = single_site_seed(n, rule.dimension(), seed)?;
    let r = rule.radius();
    let d = rule.dimension() as u32;
    let total: u64 = (0..=t_max as u64)
        .map(|t| (2 * r * t + 1).checked_pow(d).unwrap_or(u64::MAX))
        .try_fold(0u64, |acc, x| acc.checked_add(x))
        .unwrap_or(u64::MAX);
    if total > MAX_PATTERN_CELLS {
        return Err(EngineError::TooLarge);
    }
    let seed = Residue::new(seed, n).expect("seed checked");
    let mut rows = Vec::with_capacity(t_max + 1);
    rows.push(origin);
    for _ in 0..t_max {
        let next = rows.last().expect("nonempty").step(rule)?;
        rows.push(next);
    }
    Ok(Pattern {
        modulus: n,
        rule: rule.clone(),
        seed,
        rows,
    })
}

/// The states seen in a pattern up to its horizon: a finite truncation of the
/// full reachable-state set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachableStates {
    pub modulus: Modulus,
    pub horizon: usize,
    pub states: BTreeSet<u32>,
}

impl ReachableStates {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, state: u32) -> bool {
        self.states.contains(&state)
    }
}

pub fn reachable_states(p: &Pattern) -> ReachableStates {
    let states = p
        .rows
        .iter()
        .flat_map(|row| row.cells.iter().copied())
        .collect();
    ReachableStates {
        modulus: p.modulus,
        horizon: p.t_max(),
        states,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::parse_rule;
    use proptest::prelude::*;

    fn m(n: u64) -> Modulus {
        Modulus::new(n).unwrap()
    }

    fn line(n: u64, lo: i64, cells: &[u32]) -> Configuration {
        let hi = lo + cells.len() as i64 - 1;
        Configuration::new(m(n), SupportBox::new(vec![lo], vec![hi]), cells.to_vec()).unwrap()
    }

    fn nonzero(c: &Configuration) -> Vec<(i64, u32)> {
        c.nonzero_sites().map(|(s, v)| (s[0], v)).collect()
    }

    #[test]
    fn seeds() {
        let c = single_site_seed(m(3), 1, 2).unwrap();
        assert_eq!(nonzero(&c), vec![(0, 2)]);
        let c = single_site_seed(m(5), 2, 4).unwrap();
        assert_eq!(c.get(&[0, 0]), 4);
        assert_eq!(c.nonzero_sites().count(), 1);
        assert_eq!(single_site_seed(m(4), 1, 0), Err(EngineError::ZeroSeed));
        assert_eq!(
            single_site_seed(m(4), 1, 4),
            Err(EngineError::SeedOutOfRange {
                seed: 4,
                modulus: 4
            })
        );
        assert_eq!(single_site_seed(m(4), 4, 1), Err(EngineError::Dimension(4)));
    }

    #[test]
    fn step_examples() {
        let r90 = TransitionRule::rule90_analog();
        let c = single_site_seed(m(2), 1, 1).unwrap().step(&r90).unwrap();
        assert_eq!(nonzero(&c), vec![(-1, 1), (1, 1)]);

        let c = line(5, -1, &[1, 0, 1]).step(&r90).unwrap();
        assert_eq!(nonzero(&c), vec![(-2, 1), (0, 2), (2, 1)]);
        assert_eq!(c.bounds(), &SupportBox::centered(1, 2));

        let id = parse_rule("1@(0)", 1).unwrap();
        let c = line(7, -2, &[3, 0, 6, 1, 5]);
        assert_eq!(c.step(&id).unwrap(), c);
    }

    #[test]
    fn step_reduces_negative_coefficients_by_floor_mod() {
        let rule = parse_rule("-1@(0)", 1).unwrap();
        let c = line(5, 0, &[2]).step(&rule).unwrap();
        assert_eq!(c.get(&[0]), 3);
    }

    #[test]
    fn rule_vanishing_mod_n_gives_zero_after_one_step() {
        let rule = parse_rule("2@(-1);2@(1)", 1).unwrap();
        let p = evolve(m(2), &rule, 1, 3).unwrap();
        for t in 1..=3 {
            assert_eq!(p.row(t).nonzero_sites().count(), 0);
        }
    }

    #[test]
    fn step_rejects_dimension_mismatch() {
        let rule = parse_rule("1@(0,1)", 2).unwrap();
        assert_eq!(
            line(3, 0, &[1]).step(&rule),
            Err(EngineError::DimensionMismatch { rule: 2, config: 1 })
        );
    }

    #[test]
    fn evolve_examples() {
        let r90 = TransitionRule::rule90_analog();
        let p = evolve(m(2), &r90, 1, 2).unwrap();
        assert_eq!(nonzero(p.row(2)), vec![(-2, 1), (2, 1)]);
        let p = evolve(m(3), &r90, 1, 2).unwrap();
        assert_eq!(nonzero(p.row(2)), vec![(-2, 1), (0, 2), (2, 1)]);
        let p = evolve(m(9), &r90, 1, 0).unwrap();
        assert_eq!(p.rows().len(), 1);
        assert_eq!(nonzero(p.row(0)), vec![(0, 1)]);
    }

    #[test]
    fn evolve_rows_cover_light_cone() {
        let rule = parse_rule("1@(-2);1@(1)", 1).unwrap();
        let p = evolve(m(7), &rule, 3, 5).unwrap();
        for (t, row) in p.rows().iter().enumerate() {
            assert_eq!(row.bounds(), &SupportBox::centered(1, 2 * t as i64));
        }
    }

    #[test]
    fn evolve_rejects_oversized_patterns() {
        let rule = parse_rule("1@(0,0,-1);1@(0,0,1)", 3).unwrap();
        assert_eq!(evolve(m(2), &rule, 1, 500), Err(EngineError::TooLarge));
    }

    #[test]
    fn reachable_state_examples() {
        let r90 = TransitionRule::rule90_analog();
        let states = |n, a| {
            let p = evolve(m(n), &r90, a, 16).unwrap();
            let rs = reachable_states(&p);
            assert_eq!(rs.horizon, 16);
            rs.states.into_iter().collect::<Vec<_>>()
        };
        assert_eq!(states(4, 2), vec![0, 2]);
        assert_eq!(states(2, 1), vec![0, 1]);
        assert_eq!(states(6, 3), vec![0, 3]);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let rule = parse_rule("1@(-1);2@(0);3@(1)", 1).unwrap();
        let z = Configuration::zeros(m(6), SupportBox::centered(1, 3));
        let next = z.step(&rule).unwrap();
        assert!(next.same_cells(&z));
    }

    fn arb_config(n: u64, d: usize) -> impl Strategy<Value = Configuration> {
        (
            prop::collection::vec(-3i64..=0, d),
            prop::collection::vec(1usize..4, d),
        )
            .prop_flat_map(move |(lo, ext)| {
                let hi: Vec<i64> = lo
                    .iter()
                    .zip(&ext)
                    .map(|(a, e)| a + *e as i64 - 1)
                    .collect();
                let len: usize = ext.iter().product();
                prop::collection::vec(0..n as u32, len).prop_map(move |cells| {
                    Configuration::new(m(n), SupportBox::new(lo.clone(), hi.clone()), cells)
                        .unwrap()
                })
            })
    }

    fn arb_rule(d: usize) -> impl Strategy<Value = TransitionRule> {
        let term = (-4i64..5, prop::collection::vec(-2i64..3, d))
            .prop_map(|(c, v)| crate::rule::RuleTerm::new(c, v));
        prop::collection::vec(term, 1..5)
            .prop_filter_map("null rule", move |terms| TransitionRule::new(d, terms).ok())
    }

    fn arb_case() -> impl Strategy<Value = (Configuration, Configuration, TransitionRule, u32)> {
        (2u64..=10, 1usize..=2)
            .prop_flat_map(|(n, d)| (arb_config(n, d), arb_config(n, d), arb_rule(d), 0..n as u32))
    }

    proptest! {
        #[test]
        fn step_is_additive((u, v, rule, _) in arb_case()) {
            let lhs = u.add(&v).step(&rule).unwrap();
            let rhs = u.step(&rule).unwrap().add(&v.step(&rule).unwrap());
            prop_assert!(lhs.same_cells(&rhs));
        }

        #[test]
        fn step_commutes_with_scaling((u, _, rule, k) in arb_case()) {
            let k = u.modulus().residue(k as i64);
            let lhs = u.scale(k).step(&rule).unwrap();
            let rhs = u.step(&rule).unwrap().scale(k);
            prop_assert!(lhs.same_cells(&rhs));
        }

        #[test]
        fn step_ignores_stored_padding((u, _, rule, _) in arb_case()) {
            let padded = u.padded_to(&u.bounds().expand(2));
            prop_assert!(u.step(&rule).unwrap().same_cells(&padded.step(&rule).unwrap()));
        }

        #[test]
        fn seeded_pattern_is_seed_times_unit_pattern(
            (n, a) in (2u64..=10).prop_flat_map(|n| (Just(n), 1..n)),
            rule in arb_rule(1),
            t_max in 0usize..12,
        ) {
            let p = evolve(m(n), &rule, a, t_max).unwrap();
            let one = evolve(m(n), &rule, 1, t_max).unwrap();
            let k = m(n).residue(a as i64);
            for t in 0..=t_max {
                prop_assert_eq!(p.row(t), &one.row(t).scale(k));
            }
        }

        #[test]
        fn support_stays_in_light_cone(
            n in 2u64..=10, rule in arb_rule(2), t_max in 0usize..6,
        ) {
            let p = evolve(m(n), &rule, 1, t_max).unwrap();
            let r = rule.radius() as i64;
            for (t, row) in p.rows().iter().enumerate() {
                for (site, _) in row.nonzero_sites() {
                    prop_assert!(site.iter().all(|x| x.abs() <= r * t as i64));
                }
            }
        }
    }

    #[test]
    fn evolve_is_deterministic() {
        let rule = parse_rule("1@(-1,0);1@(1,0);1@(0,-1);1@(0,1)", 2).unwrap();
        let a = evolve(m(7), &rule, 3, 8).unwrap();
        let b = evolve(m(7), &rule, 3, 8).unwrap();
        assert_eq!(a, b);
    }
}
