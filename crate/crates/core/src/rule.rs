//! Linear transition rules `(Tu)_i = sum_j c_j * u_{i + v_j}`.
//!
//! Coefficients are kept as plain integers so the same rule can be applied
//! over any modulus; reduction happens at application time.
//!
//! Text form: `rule := term (';' term)*`, `term := int '@' '(' int (',' int)* ')'`,
//! `int := ['-'] digit+`, whitespace allowed between tokens.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub const MAX_DIMENSION: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("term {term} has {found} offset components, expected dimension {expected}")]
    Arity {
        term: usize,
        expected: usize,
        found: usize,
    },
    #[error("rule has no terms")]
    Empty,
    #[error("null rule: every coefficient is zero after merging duplicate offsets")]
    NullRule,
    #[error("dimension must be between 1 and {MAX_DIMENSION}, got {0}")]
    Dimension(usize),
    #[error("coefficient overflow while merging offset {0:?}")]
    Overflow(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleTerm {
    pub coefficient: i64,
    pub offset: Vec<i64>,
}

impl RuleTerm {
    pub fn new(coefficient: i64, offset: impl Into<Vec<i64>>) -> Self {
        RuleTerm {
            coefficient,
            offset: offset.into(),
        }
    }
}

/// A linear rule in canonical form: offsets pairwise distinct and sorted
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransitionRule {
    dimension: usize,
    terms: Vec<RuleTerm>,
}

impl TransitionRule {
    /// Builds a rule from raw terms, merging duplicate offsets by summing
    /// their coefficients.
    ///
    /// Terms whose merged coefficient is zero are kept; a rule is rejected as
    /// null only when all merged coefficients vanish.
    pub fn new(dimension: usize, terms: Vec<RuleTerm>) -> Result<Self, RuleError> {
        if !(1..=MAX_DIMENSION).contains(&dimension) {
            return Err(RuleError::Dimension(dimension));
        }
        if terms.is_empty() {
            return Err(RuleError::Empty);
        }
        let mut merged: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
        for (idx, term) in terms.into_iter().enumerate() {
            if term.offset.len() != dimension {
                return Err(RuleError::Arity {
                    term: idx + 1,
                    expected: dimension,
                    found: term.offset.len(),
                });
            }
            let slot = merged.entry(term.offset.clone()).or_insert(0);
            *slot = slot
                .checked_add(term.coefficient)
                .ok_or(RuleError::Overflow(term.offset))?;
        }
        if merged.values().all(|&c| c == 0) {
            return Err(RuleError::NullRule);
        }
        let terms = merged
            .into_iter()
            .map(|(offset, coefficient)| RuleTerm {
                coefficient,
                offset,
            })
            .collect();
        Ok(TransitionRule { dimension, terms })
    }

    /// `(Tu)_i = u_{i-1} + u_{i+1}`, the one-dimensional rule-90 analog.
    pub fn rule90_analog() -> Self {
        TransitionRule::new(1, vec![RuleTerm::new(1, [-1]), RuleTerm::new(1, [1])])
            .expect("rule-90 analog is well formed")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn terms(&self) -> &[RuleTerm] {
        &self.terms
    }

    /// Largest infinity-norm of any offset.
    pub fn radius(&self) -> u64 {
        self.terms
            .iter()
            .flat_map(|t| t.offset.iter())
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0)
    }
}

pub fn rule_radius(rule: &TransitionRule) -> u64 {
    rule.radius()
}

impl fmt::Display for TransitionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, term) in self.terms.iter().enumerate() {
            if idx > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}@(", term.coefficient)?;
            for (k, x) in term.offset.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Parses a rule written in the term grammar. Offsets must have exactly
/// `dimension` components.
pub fn parse_rule(text: &str, dimension: usize) -> Result<TransitionRule, RuleError> {
    if !(1..=MAX_DIMENSION).contains(&dimension) {
        return Err(RuleError::Dimension(dimension));
    }
    if text.trim().is_empty() {
        return Err(RuleError::Empty);
    }
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut terms = Vec::new();
    loop {
        terms.push(parser.term()?);
        parser.skip_ws();
        match parser.peek() {
            None => break,
            Some(b';') => parser.pos += 1,
            Some(_) => return Err(parser.error("expected ';' or end of rule")),
        }
    }
    TransitionRule::new(dimension, terms)
}

/// Parses a one-dimensional rule.
impl FromStr for TransitionRule {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rule(s, 1)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, message: &str) -> RuleError {
        RuleError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), RuleError> {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", byte as char)))
        }
    }

    fn int(&mut self) -> Result<i64, RuleError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.error("expected integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse().map_err(|_| RuleError::Syntax {
            position: start,
            message: "integer out of range".to_string(),
        })
    }

    fn term(&mut self) -> Result<RuleTerm, RuleError> {
        let coefficient = self.int()?;
        self.expect(b'@')?;
        self.expect(b'(')?;
        let mut offset = vec![self.int()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    offset.push(self.int()?);
                }
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error("expected ',' or ')'")),
            }
        }
        Ok(RuleTerm {
            coefficient,
            offset,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_rule90_analog() {
        let rule = parse_rule("1@(-1);1@(1)", 1).unwrap();
        assert_eq!(
            rule.terms(),
            &[RuleTerm::new(1, [-1]), RuleTerm::new(1, [1])]
        );
        assert_eq!(rule, TransitionRule::rule90_analog());
    }

    #[test]
    fn parses_identity() {
        let rule = parse_rule("1@(0)", 1).unwrap();
        assert_eq!(rule.terms(), &[RuleTerm::new(1, [0])]);
    }

    #[test]
    fn merges_duplicate_offsets() {
        let rule = parse_rule("2@(1);3@(1)", 1).unwrap();
        assert_eq!(rule.terms(), &[RuleTerm::new(5, [1])]);
    }

    #[test]
    fn normalizes_term_order() {
        let rule = parse_rule("3@(1) ; 2@( 0 ) ;1@(-1)", 1).unwrap();
        assert_eq!(rule.to_string(), "1@(-1);2@(0);3@(1)");
    }

    #[test]
    fn radius_examples() {
        assert_eq!(rule_radius(&parse_rule("1@(-1);1@(1)", 1).unwrap()), 1);
        assert_eq!(rule_radius(&parse_rule("1@(0)", 1).unwrap()), 0);
        assert_eq!(rule_radius(&parse_rule("1@(-2,3);1@(1,1)", 2).unwrap()), 3);
    }

    #[test]
    fn syntax_errors_report_position() {
        assert_eq!(
            parse_rule("1@(-1);1(1)", 1),
            Err(RuleError::Syntax {
                position: 8,
                message: "expected '@'".into()
            })
        );
        assert!(matches!(
            parse_rule("1@(1", 1),
            Err(RuleError::Syntax { position: 4, .. })
        ));
        assert!(matches!(
            parse_rule("1@(1);", 1),
            Err(RuleError::Syntax { position: 6, .. })
        ));
        assert!(matches!(
            parse_rule("- 1@(1)", 1),
            Err(RuleError::Syntax { position: 0, .. })
        ));
        assert!(matches!(
            parse_rule("99999999999999999999@(1)", 1),
            Err(RuleError::Syntax { position: 0, .. })
        ));
    }

    #[test]
    fn arity_mismatch() {
        assert_eq!(
            parse_rule("1@(0);1@(1,0)", 1),
            Err(RuleError::Arity {
                term: 2,
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn empty_and_null_rules() {
        assert_eq!(parse_rule("   ", 1), Err(RuleError::Empty));
        assert_eq!(parse_rule("1@(1);-1@(1)", 1), Err(RuleError::NullRule));
        assert_eq!(parse_rule("0@(0)", 1), Err(RuleError::NullRule));
        // vanishes mod 2 only, which is legal
        assert!(parse_rule("2@(0)", 1).is_ok());
    }

    #[test]
    fn dimension_bounds() {
        assert_eq!(parse_rule("1@(0)", 0), Err(RuleError::Dimension(0)));
        assert_eq!(parse_rule("1@(0,0,0,0)", 4), Err(RuleError::Dimension(4)));
        assert!(parse_rule("1@(0,0,1)", 3).is_ok());
    }

    fn arb_rule() -> impl Strategy<Value = (usize, Vec<RuleTerm>)> {
        (1usize..=3).prop_flat_map(|d| {
            let term = (-9i64..10, prop::collection::vec(-3i64..4, d))
                .prop_map(|(c, v)| RuleTerm::new(c, v));
            (Just(d), prop::collection::vec(term, 1..7))
        })
    }

    proptest! {
        #[test]
        fn format_then_parse_is_identity((d, terms) in arb_rule()) {
            if let Ok(rule) = TransitionRule::new(d, terms) {
                let reparsed = parse_rule(&rule.to_string(), d).unwrap();
                prop_assert_eq!(reparsed, rule);
            }
        }
    }
}
