//! Linear cellular automata over Z/nZ grown from single-site seeds.
//!
//! A rule `(Tu)_i = sum_j c_j * u_{i + v_j}` is applied over `n` states to the
//! configuration holding a nonzero seed `a` at the origin. The pattern for
//! `(n, a)` is isomorphic, cell by cell, to the pattern for `(n / gcd(n, a), 1)`
//! under an explicit state map; [`equiv::canonicalize`] builds that map and
//! [`equiv::verify_isomorphism`] checks it up to a finite horizon.
//!
//! ```
//! use linca_core::{canonicalize, evolve, verify_isomorphism, Modulus, TransitionRule};
//!
//! let rule = TransitionRule::rule90_analog();
//! let six = Modulus::new(6).unwrap();
//! let canon = canonicalize(six, 4).unwrap();
//! assert_eq!(canon.modulus.get(), 3);
//!
//! let p = evolve(six, &rule, 4, 15).unwrap();
//! let q = evolve(canon.modulus, &rule, 1, 15).unwrap();
//! assert!(verify_isomorphism(&p, &q, &canon.map).unwrap().is_verified());
//! ```

pub mod engine;
pub mod equiv;
pub mod oracle;
pub mod render;
pub mod rule;
pub mod zmod;

pub use engine::{
    evolve, reachable_states, single_site_seed, step, Configuration, EngineError, Pattern,
    ReachableStates, SupportBox,
};
pub use equiv::{
    canonicalize, equivalence_classes, seed_map, transfer_map, verify_isomorphism, Canonical,
    Certificate, EquivError, SeedClass, StateMap, Status,
};
pub use oracle::{binomial_parity_row, naive_cell, search_state_maps, NaiveEvaluator, OracleError};
pub use render::{
    parse_pattern_text, render_image, render_text, GrayImage, PatternText, RenderError,
};
pub use rule::{parse_rule, rule_radius, RuleError, RuleTerm, TransitionRule};
pub use zmod::{gcd, inverse, quotient_map, scale_map, units, Modulus, Residue, ZmodError};
