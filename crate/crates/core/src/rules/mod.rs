//! Rule programs for the supervised filter and their evaluation.
//!
//! A program names a topic and lists rules of three kinds. `assert` rules
//! derive named facts (token spans) and are chained to a fixpoint; `accept`
//! and `reject` rules are then checked once over the derived facts. A
//! document is selected when some accept rule fires and no reject rule does.
//!
//! ```text
//! topic "Saint-Louis (company)"
//! assert SL when "Saint-Louis"
//! accept when fact(SL) scope document
//! reject when "maire" near/3 fact(SL)
//! ```

mod engine;
mod parser;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::TokenSpan;

pub use engine::evaluate;
pub use parser::{parse_rules, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    /// Every clause must match inside one sentence.
    Sentence,
    /// Clauses may match anywhere in the document.
    Document,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Head {
    Fact(String),
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    /// Consecutive tokens, already lowercased by the tokenizer.
    Literal(Vec<String>),
    Fact(String),
}

/// One conjunct of a rule body: a single atom, or two atoms that must occur
/// in the same sentence with at most `distance` tokens between them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub left: Atom,
    pub near: Option<(usize, Atom)>,
}

impl Clause {
    pub fn atom(atom: Atom) -> Self {
        Clause {
            left: atom,
            near: None,
        }
    }

    pub fn near(left: Atom, distance: usize, right: Atom) -> Self {
        Clause {
            left,
            near: Some((distance, right)),
        }
    }

    fn atoms(&self) -> impl Iterator<Item = &Atom> {
        core::iter::once(&self.left).chain(self.near.as_ref().map(|(_, a)| a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Head,
    pub clauses: Vec<Clause>,
    pub scope: Scope,
}

/// A parsed rule program for one topic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub topic_name: String,
    pub assert_rules: Vec<Rule>,
    pub accept_rules: Vec<Rule>,
    pub reject_rules: Vec<Rule>,
    /// Every literal token mentioned in any pattern.
    pub rule_terms: BTreeSet<String>,
}

impl RuleSet {
    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.assert_rules
            .iter()
            .chain(&self.accept_rules)
            .chain(&self.reject_rules)
    }

    /// Names of all facts some assert rule can derive.
    pub fn fact_names(&self) -> BTreeSet<&str> {
        self.assert_rules
            .iter()
            .filter_map(|r| match &r.head {
                Head::Fact(name) => Some(name.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// Outcome of the rule filter on one document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Verdict {
    pub selected: bool,
    /// Atom spans of the accept rules that fired.
    pub matches: Vec<TokenSpan>,
    pub facts: BTreeMap<String, Vec<TokenSpan>>,
}
