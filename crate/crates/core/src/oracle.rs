//! Reference computations that share no evolution code with [`crate::engine`].
//!
//! * [`naive_cell`] evaluates `(T^t u_<a>)_i` by top-down recursion on `t`,
//!   memoized over `(t, i)`.
//! * [`search_state_maps`] enumerates every 0-fixing bijection between the
//!   observed state sets of two patterns and keeps those that carry one
//!   pattern onto the other.
//! * [`binomial_parity_row`] gives row `t` of the two-state rule-90 analog as
//!   `C(t, (t+i)/2) mod 2` from Pascal's triangle.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::engine::{reachable_states, Pattern};
use crate::equiv::StateMap;
use crate::rule::TransitionRule;
use crate::zmod::Modulus;

/// Deepest time step [`naive_cell`] accepts.
pub const ORACLE_MAX_STEPS: usize = 20;
/// Largest state set [`search_state_maps`] will permute.
pub const SEARCH_MAX_STATES: usize = 8;
/// Deepest row [`binomial_parity_row`] accepts.
pub const BINOMIAL_MAX_STEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("time step {t} beyond oracle bound {max}")]
    StepBound { t: usize, max: usize },
    #[error("seed {seed} out of range for {modulus} states")]
    SeedOutOfRange { seed: u64, modulus: u32 },
    #[error("site has {found} coordinates, rule has dimension {expected}")]
    SiteDimension { expected: usize, found: usize },
    #[error("state sets of sizes {left} and {right} exceed search bound {max}")]
    TooManyStates {
        left: usize,
        right: usize,
        max: usize,
    },
    #[error("patterns are not comparable: {0}")]
    Incomparable(String),
}

/// Memoized top-down evaluator for one `(n, rule, seed)` triple.
#[derive(Debug, Clone)]
pub struct NaiveEvaluator<'r> {
    modulus: i128,
    rule: &'r TransitionRule,
    seed: u32,
    radius: i64,
    memo: HashMap<(usize, Vec<i64>), u32>,
}

impl<'r> NaiveEvaluator<'r> {
    pub fn new(n: Modulus, rule: &'r TransitionRule, seed: u64) -> Result<Self, OracleError> {
        if seed >= n.get() as u64 {
            return Err(OracleError::SeedOutOfRange {
                seed,
                modulus: n.get(),
            });
        }
        Ok(NaiveEvaluator {
            modulus: n.get() as i128,
            rule,
            seed: seed as u32,
            radius: rule.radius() as i64,
            memo: HashMap::new(),
        })
    }

    pub fn cell(&mut self, t: usize, site: &[i64]) -> Result<u32, OracleError> {
        if t > ORACLE_MAX_STEPS {
            return Err(OracleError::StepBound {
                t,
                max: ORACLE_MAX_STEPS,
            });
        }
        if site.len() != self.rule.dimension() {
            return Err(OracleError::SiteDimension {
                expected: self.rule.dimension(),
                found: site.len(),
            });
        }
        Ok(self.eval(t, site))
    }

    fn eval(&mut self, t: usize, site: &[i64]) -> u32 {
        if t == 0 {
            return if site.iter().all(|&x| x == 0) {
                self.seed
            } else {
                0
            };
        }
        if site.iter().any(|x| x.abs() > self.radius * t as i64) {
            return 0;
        }
        if let Some(&v) = self.memo.get(&(t, site.to_vec())) {
            return v;
        }
        let mut sum: i128 = 0;
        let rule = self.rule;
        for term in rule.terms() {
            let neighbour: Vec<i64> = site.iter().zip(&term.offset).map(|(x, v)| x + v).collect();
            sum += term.coefficient as i128 * self.eval(t - 1, &neighbour) as i128;
        }
        let v = sum.rem_euclid(self.modulus) as u32;
        self.memo.insert((t, site.to_vec()), v);
        v
    }
}

/// `(T^t u_<seed>)_site` over Z/nZ, for `t <= ORACLE_MAX_STEPS`.
pub fn naive_cell(
    n: Modulus,
    rule: &TransitionRule,
    seed: u64,
    t: usize,
    site: &[i64],
) -> Result<u32, OracleError> {
    NaiveEvaluator::new(n, rule, seed)?.cell(t, site)
}

/// All bijections `f` between the observed state sets of `p` and `q` with
/// `f(0) = 0` under which `f(p[t][i]) = q[t][i]` for every cell up to the
/// common horizon, in lexicographic order of their tables.
///
/// State sets of different sizes admit no bijection and give an empty list.
pub fn search_state_maps(p: &Pattern, q: &Pattern) -> Result<Vec<StateMap>, OracleError> {
    if p.rule() != q.rule() || p.t_max() != q.t_max() {
        return Err(OracleError::Incomparable(
            "patterns must share rule, dimension and horizon".to_string(),
        ));
    }
    let left = reachable_states(p).states;
    let right = reachable_states(q).states;
    if left.len() > SEARCH_MAX_STATES || right.len() > SEARCH_MAX_STATES {
        return Err(OracleError::TooManyStates {
            left: left.len(),
            right: right.len(),
            max: SEARCH_MAX_STATES,
        });
    }
    if left.len() != right.len() || left.contains(&0) != right.contains(&0) {
        return Ok(Vec::new());
    }
    let sources: Vec<u32> = left.iter().copied().filter(|&s| s != 0).collect();
    let targets: Vec<u32> = right.iter().copied().filter(|&s| s != 0).collect();

    // Distinct (p, q) value pairs seen anywhere; a candidate must agree on all.
    let mut observed: BTreeSet<(u32, u32)> = BTreeSet::new();
    for t in 0..=p.t_max() {
        let (rp, rq) = (p.row(t), q.row(t));
        for site in rp.bounds().union(rq.bounds()).sites() {
            observed.insert((rp.get(&site), rq.get(&site)));
        }
    }

    let mut found = Vec::new();
    let mut used = vec![false; targets.len()];
    let mut assignment = Vec::with_capacity(sources.len());
    permute(
        &targets,
        &mut used,
        &mut assignment,
        &mut |images: &[u32]| {
            let image_of = |s: u32| {
                if s == 0 {
                    0
                } else {
                    images[sources.binary_search(&s).expect("observed state")]
                }
            };
            if observed.iter().all(|&(a, b)| image_of(a) == b) {
                let pairs = std::iter::once((0, 0))
                    .chain(sources.iter().copied().zip(images.iter().copied()));
                found.push(
                    StateMap::new(p.modulus(), q.modulus(), pairs).expect("bijection fixing 0"),
                );
            }
        },
    );
    Ok(found)
}

/// Visits every arrangement of `pool` in lexicographic order.
fn permute(
    pool: &[u32],
    used: &mut [bool],
    current: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32]),
) {
    if current.len() == pool.len() {
        visit(current);
        return;
    }
    for k in 0..pool.len() {
        if !used[k] {
            used[k] = true;
            current.push(pool[k]);
            permute(pool, used, current, visit);
            current.pop();
            used[k] = false;
        }
    }
}

/// Row `t` of the two-state rule-90 analog over sites `-t..=t`.
pub fn binomial_parity_row(t: usize) -> Result<Vec<u8>, OracleError> {
    if t > BINOMIAL_MAX_STEPS {
        return Err(OracleError::StepBound {
            t,
            max: BINOMIAL_MAX_STEPS,
        });
    }
    let mut pascal: Vec<u128> = vec![1];
    for _ in 0..t {
        let mut next = vec![1u128; pascal.len() + 1];
        for k in 1..pascal.len() {
            next[k] = pascal[k - 1] + pascal[k];
        }
        pascal = next;
    }
    Ok((0..=2 * t)
        .map(|j| {
            if j % 2 == 0 {
                (pascal[j / 2] % 2) as u8
            } else {
                0
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::evolve;
    use crate::equiv::seed_map;
    use crate::rule::parse_rule;

    fn m(n: u64) -> Modulus {
        Modulus::new(n).unwrap()
    }

    fn r90() -> TransitionRule {
        TransitionRule::rule90_analog()
    }

    #[test]
    fn naive_cell_examples() {
        assert_eq!(naive_cell(m(2), &r90(), 1, 4, &[0]), Ok(0));
        assert_eq!(naive_cell(m(2), &r90(), 1, 4, &[4]), Ok(1));
        assert_eq!(naive_cell(m(7), &r90(), 5, 0, &[0]), Ok(5));
        assert_eq!(naive_cell(m(7), &r90(), 5, 0, &[3]), Ok(0));
        // binomial (1, 3, 3, 1) mod 5 at t = 3
        let row: Vec<u32> = (-3..=3)
            .map(|i| naive_cell(m(5), &r90(), 1, 3, &[i]).unwrap())
            .collect();
        assert_eq!(row, vec![1, 0, 3, 0, 3, 0, 1]);
    }

    #[test]
    fn naive_cell_bounds() {
        assert_eq!(
            naive_cell(m(2), &r90(), 1, 21, &[0]),
            Err(OracleError::StepBound { t: 21, max: 20 })
        );
        assert!(naive_cell(m(2), &r90(), 1, 20, &[0]).is_ok());
        assert_eq!(
            naive_cell(m(2), &r90(), 1, 1, &[0, 0]),
            Err(OracleError::SiteDimension {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn naive_cell_handles_negative_coefficients() {
        let rule = parse_rule("-1@(0)", 1).unwrap();
        assert_eq!(naive_cell(m(5), &rule, 2, 1, &[0]), Ok(3));
        assert_eq!(naive_cell(m(5), &rule, 2, 2, &[0]), Ok(2));
    }

    #[test]
    fn binomial_rows() {
        assert_eq!(binomial_parity_row(0).unwrap(), vec![1]);
        assert_eq!(binomial_parity_row(2).unwrap(), vec![1, 0, 0, 0, 1]);
        assert_eq!(binomial_parity_row(4).unwrap()[4], 0);
        assert_eq!(binomial_parity_row(64).unwrap().len(), 129);
        assert!(binomial_parity_row(65).is_err());
    }

    #[test]
    fn search_finds_table_row() {
        let p = evolve(m(5), &r90(), 1, 10).unwrap();
        let q = evolve(m(5), &r90(), 2, 10).unwrap();
        let maps = search_state_maps(&p, &q).unwrap();
        assert!(maps.contains(&seed_map(m(5), 1, 2).unwrap()));
    }

    #[test]
    fn search_across_gcd_classes_is_empty() {
        let p = evolve(m(4), &r90(), 1, 10).unwrap();
        let q = evolve(m(4), &r90(), 2, 10).unwrap();
        assert_eq!(search_state_maps(&p, &q).unwrap(), vec![]);
    }

    #[test]
    fn search_on_identical_patterns_contains_identity() {
        let p = evolve(m(6), &r90(), 5, 10).unwrap();
        let maps = search_state_maps(&p, &p).unwrap();
        assert!(maps.iter().any(StateMap::is_identity));
        let mut sorted = maps.clone();
        sorted.sort();
        assert_eq!(sorted, maps);
    }

    #[test]
    fn search_rejects_large_state_sets() {
        let p = evolve(m(11), &r90(), 1, 20).unwrap();
        assert!(matches!(
            search_state_maps(&p, &p),
            Err(OracleError::TooManyStates { .. })
        ));
    }

    #[test]
    fn search_at_horizon_zero_has_no_zero_state() {
        // t_max = 0 shows only the seed; the witness still fixes 0.
        let p = evolve(m(5), &r90(), 1, 0).unwrap();
        let q = evolve(m(5), &r90(), 3, 0).unwrap();
        let maps = search_state_maps(&p, &q).unwrap();
        assert_eq!(maps.len(), 1);
        assert_eq!(maps[0].pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 3)]);
    }
}
