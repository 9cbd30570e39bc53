use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::{Atom, Clause, Head, Rule, RuleSet, Scope, Verdict};
use crate::corpus::{Document, Span, TokenSpan};

type FactStore = BTreeMap<String, BTreeSet<Span>>;

#[derive(Debug, Clone)]
struct ClauseMatch {
    span: Span,
    atoms: [Option<Span>; 2],
}

struct Firing {
    span: Span,
    atoms: Vec<Span>,
}

struct Context<'a> {
    tokens: &'a [String],
    sentences: &'a [Span],
}

impl Context<'_> {
    fn sentence_of(&self, span: Span) -> Option<usize> {
        let idx = self.sentences.partition_point(|s| s.end <= span.start);
        self.sentences
            .get(idx)
            .filter(|s| s.contains(&span))
            .map(|_| idx)
    }

    fn atom_spans(&self, atom: &Atom, facts: &FactStore) -> Vec<Span> {
        match atom {
            Atom::Literal(words) => {
                let n = words.len();
                if n == 0 || n > self.tokens.len() {
                    return Vec::new();
                }
                self.tokens
                    .windows(n)
                    .enumerate()
                    .filter(|(_, w)| *w == words.as_slice())
                    .map(|(i, _)| Span::new(i, i + n))
                    .collect()
            }
            Atom::Fact(name) => facts
                .get(name)
                .map(|s| s.iter().copied().collect())
                .unwrap_or_default(),
        }
    }

    fn clause_matches(&self, clause: &Clause, facts: &FactStore) -> Vec<ClauseMatch> {
        let left = self.atom_spans(&clause.left, facts);
        let Some((distance, right_atom)) = &clause.near else {
            return left
                .into_iter()
                .map(|span| ClauseMatch {
                    span,
                    atoms: [Some(span), None],
                })
                .collect();
        };
        let right = self.atom_spans(right_atom, facts);
        let mut out = Vec::new();
        for a in &left {
            let Some(sa) = self.sentence_of(*a) else { continue };
            for b in &right {
                if a.gap(b) <= *distance && self.sentence_of(*b) == Some(sa) {
                    out.push(ClauseMatch {
                        span: a.union(b),
                        atoms: [Some(*a), Some(*b)],
                    });
                }
            }
        }
        out
    }

    fn firings(&self, rule: &Rule, facts: &FactStore) -> Vec<Firing> {
        let per_clause: Vec<Vec<ClauseMatch>> = rule
            .clauses
            .iter()
            .map(|c| self.clause_matches(c, facts))
            .collect();
        if per_clause.iter().any(Vec::is_empty) {
            return Vec::new();
        }
        let mut out = Vec::new();
        match rule.scope {
            Scope::Document => combine(&per_clause, &mut out),
            Scope::Sentence => {
                for sentence in self.sentences {
                    let within: Vec<Vec<ClauseMatch>> = per_clause
                        .iter()
                        .map(|ms| {
                            ms.iter()
                                .filter(|m| sentence.contains(&m.span))
                                .cloned()
                                .collect()
                        })
                        .collect();
                    if within.iter().all(|ms| !ms.is_empty()) {
                        combine(&within, &mut out);
                    }
                }
            }
        }
        out
    }
}

// One firing per choice of a match for every clause.
fn combine(per_clause: &[Vec<ClauseMatch>], out: &mut Vec<Firing>) {
    let mut choice = alloc::vec![0usize; per_clause.len()];
    loop {
        let mut span = per_clause[0][choice[0]].span;
        let mut atoms = Vec::with_capacity(per_clause.len() * 2);
        for (ms, &i) in per_clause.iter().zip(&choice) {
            span = span.union(&ms[i].span);
            atoms.extend(ms[i].atoms.iter().flatten().copied());
        }
        out.push(Firing { span, atoms });

        let mut k = 0;
        loop {
            if k == choice.len() {
                return;
            }
            choice[k] += 1;
            if choice[k] < per_clause[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Run the rule program on a document.
///
/// Assert rules are fired repeatedly until no new fact span appears; each
/// firing asserts the union span of its matched atoms. Accept and reject
/// rules are then checked against the final facts.
pub fn evaluate(rules: &RuleSet, doc: &Document) -> Verdict {
    let ctx = Context {
        tokens: doc.tokens(),
        sentences: doc.sentences(),
    };

    let mut facts = FactStore::new();
    loop {
        let mut changed = false;
        for rule in &rules.assert_rules {
            let Head::Fact(name) = &rule.head else { continue };
            let new: Vec<Span> = ctx.firings(rule, &facts).into_iter().map(|f| f.span).collect();
            let entry = facts.entry(name.clone()).or_default();
            for span in new {
                changed |= entry.insert(span);
            }
        }
        if !changed {
            break;
        }
    }
    facts.retain(|_, spans| !spans.is_empty());

    let rejected = rules
        .reject_rules
        .iter()
        .any(|r| !ctx.firings(r, &facts).is_empty());

    let mut matched = BTreeSet::new();
    for rule in &rules.accept_rules {
        for firing in ctx.firings(rule, &facts) {
            matched.extend(firing.atoms);
        }
    }
    let selected = !matched.is_empty() && !rejected;

    let id = doc.id();
    Verdict {
        selected,
        matches: matched.into_iter().map(|s| TokenSpan::new(id, s)).collect(),
        facts: facts
            .into_iter()
            .map(|(name, spans)| (name, spans.into_iter().map(|s| TokenSpan::new(id, s)).collect()))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Timestamp;
    use crate::rules::parse_rules;
    use proptest::prelude::*;

    const SAINT_LOUIS: &str = r#"
topic "Saint-Louis (company)"
assert SL when "Saint-Louis"
accept when fact(SL) scope document
reject when "maire" near/3 fact(SL)
"#;

    fn doc(body: &str) -> Document {
        Document::new("d", Timestamp(0), "", body).unwrap()
    }

    #[test]
    fn mayor_sentence_is_rejected() {
        let rs = parse_rules(SAINT_LOUIS).unwrap();
        let v = evaluate(&rs, &doc("le maire de Saint-Louis a inauguré"));
        assert!(!v.selected);
        assert_eq!(v.facts["SL"], [TokenSpan::new("d", Span::new(3, 4))]);
    }

    #[test]
    fn company_results_are_accepted() {
        let rs = parse_rules(SAINT_LOUIS).unwrap();
        let v = evaluate(&rs, &doc("saint-louis annonce ses résultats"));
        assert!(v.selected);
        assert_eq!(v.matches, [TokenSpan::new("d", Span::new(0, 1))]);
    }

    #[test]
    fn empty_document_is_never_selected() {
        let rs = parse_rules(SAINT_LOUIS).unwrap();
        let v = evaluate(&rs, &doc(""));
        assert!(!v.selected);
        assert!(v.matches.is_empty());
        assert!(v.facts.is_empty());
    }

    #[test]
    fn proximity_respects_distance_and_sentence() {
        let rs = parse_rules("topic \"t\"\naccept when \"a\" near/2 \"b\"").unwrap();
        assert!(evaluate(&rs, &doc("a x x b")).selected);
        assert!(!evaluate(&rs, &doc("a x x x b")).selected);
        assert!(evaluate(&rs, &doc("b x a")).selected);
        assert!(!evaluate(&rs, &doc("a. b")).selected);
    }

    #[test]
    fn sentence_scope_requires_one_sentence() {
        let rs = parse_rules("topic \"t\"\naccept when \"a\" and \"b\"").unwrap();
        assert!(evaluate(&rs, &doc("x a y b. z")).selected);
        assert!(!evaluate(&rs, &doc("a. b.")).selected);
        let rs = parse_rules("topic \"t\"\naccept when \"a\" and \"b\" scope document").unwrap();
        assert!(evaluate(&rs, &doc("a. b.")).selected);
    }

    #[test]
    fn multi_token_literals_match_consecutively() {
        let rs = parse_rules("topic \"t\"\naccept when \"caisse des dépôts\"").unwrap();
        let v = evaluate(&rs, &doc("la Caisse des Dépôts investit"));
        assert!(v.selected);
        assert_eq!(v.matches, [TokenSpan::new("d", Span::new(1, 4))]);
        assert!(!evaluate(&rs, &doc("caisse et dépôts des")).selected);
    }

    #[test]
    fn facts_chain_through_several_rules() {
        let src = r#"topic "t"
assert CDC when "caisse des dépôts"
assert CDC when "cdc"
assert INVEST when fact(CDC) near/2 "investit"
accept when fact(INVEST)
"#;
        let rs = parse_rules(src).unwrap();
        let v = evaluate(&rs, &doc("la CDC investit. La caisse des dépôts, elle, investit"));
        assert!(v.selected);
        assert_eq!(v.facts["CDC"].len(), 2);
        assert_eq!(
            v.facts["INVEST"],
            [
                TokenSpan::new("d", Span::new(1, 3)),
                TokenSpan::new("d", Span::new(4, 9)),
            ]
        );
    }

    #[test]
    fn cyclic_facts_reach_a_fixpoint() {
        let src = r#"topic "t"
assert A when "x"
assert B when fact(A)
assert A when fact(B) near/1 "y"
accept when fact(A) and fact(B)
"#;
        let rs = parse_rules(src).unwrap();
        let v = evaluate(&rs, &doc("x y"));
        assert!(v.selected);
        assert_eq!(v.facts["A"].len(), 2);
    }

    #[test]
    fn all_overlapping_matches_are_asserted() {
        let rs = parse_rules("topic \"t\"\nassert P when \"a a\"\naccept when fact(P)").unwrap();
        let v = evaluate(&rs, &doc("a a a"));
        assert_eq!(v.facts["P"].len(), 2);
    }

    fn vocab() -> impl Strategy<Value = String> {
        prop::sample::select(alloc::vec!["a", "b", "c", "d"]).prop_map(String::from)
    }

    fn arb_doc() -> impl Strategy<Value = Document> {
        prop::collection::vec((vocab(), prop::bool::weighted(0.2)), 0..14).prop_map(|words| {
            let mut body = String::new();
            for (w, stop) in words {
                body.push_str(&w);
                body.push_str(if stop { ". " } else { " " });
            }
            doc(&body)
        })
    }

    fn arb_atom() -> impl Strategy<Value = String> {
        prop_oneof![
            vocab().prop_map(|w| alloc::format!("\"{w}\"")),
            (vocab(), vocab()).prop_map(|(a, b)| alloc::format!("\"{a} {b}\"")),
            prop::sample::select(alloc::vec!["fact(F)", "fact(G)"]).prop_map(String::from),
        ]
    }

    fn arb_rule(head: &'static str) -> impl Strategy<Value = String> {
        let clause = (arb_atom(), prop::option::of((1usize..4, arb_atom()))).prop_map(|(a, near)| {
            match near {
                Some((k, b)) => alloc::format!("{a} near/{k} {b}"),
                None => a,
            }
        });
        (prop::collection::vec(clause, 1..3), any::<bool>()).prop_map(move |(cs, doc_scope)| {
            let scope = if doc_scope { " scope document" } else { "" };
            alloc::format!("{head} when {}{scope}", cs.join(" and "))
        })
    }

    fn program(asserts: &[String], accepts: &[String], rejects: &[String]) -> String {
        let mut src = String::from("topic \"p\"\nassert F when \"a\"\nassert G when \"b\"\n");
        for r in asserts.iter().chain(accepts).chain(rejects) {
            src.push_str(r);
            src.push('\n');
        }
        src
    }

    proptest! {
        #[test]
        fn adding_assert_rule_keeps_facts(
            asserts in prop::collection::vec(prop_oneof![arb_rule("assert F"), arb_rule("assert G")], 0..3),
            extra in prop_oneof![arb_rule("assert F"), arb_rule("assert G")],
            d in arb_doc(),
        ) {
            let base = parse_rules(&program(&asserts, &[], &[])).unwrap();
            let mut more = asserts.clone();
            more.push(extra);
            let bigger = parse_rules(&program(&more, &[], &[])).unwrap();
            let before = evaluate(&base, &d).facts;
            let after = evaluate(&bigger, &d).facts;
            for (name, spans) in &before {
                for s in spans {
                    prop_assert!(after.get(name).is_some_and(|a| a.contains(s)));
                }
            }
        }

        #[test]
        fn reject_dominates(
            accepts in prop::collection::vec(arb_rule("accept"), 1..3),
            rejects in prop::collection::vec(arb_rule("reject"), 1..3),
            d in arb_doc(),
        ) {
            let rs = parse_rules(&program(&[], &accepts, &rejects)).unwrap();
            let v = evaluate(&rs, &d);
            let only_rejects = parse_rules(&program(&[], &["accept when \"zzz\"".into()], &rejects)).unwrap();
            let ctx = Context { tokens: d.tokens(), sentences: d.sentences() };
            let mut facts = FactStore::new();
            for (name, spans) in &v.facts {
                facts.insert(name.clone(), spans.iter().map(TokenSpan::span).collect());
            }
            let fired = only_rejects.reject_rules.iter().any(|r| !ctx.firings(r, &facts).is_empty());
            if fired {
                prop_assert!(!v.selected);
            }
            if v.selected {
                prop_assert!(!v.matches.is_empty());
            }
        }

        #[test]
        fn rule_order_is_irrelevant(
            asserts in prop::collection::vec(prop_oneof![arb_rule("assert F"), arb_rule("assert G")], 0..4),
            accepts in prop::collection::vec(arb_rule("accept"), 1..3),
            rejects in prop::collection::vec(arb_rule("reject"), 0..3),
            d in arb_doc(),
        ) {
            let forward = parse_rules(&program(&asserts, &accepts, &rejects)).unwrap();
            let mut a = asserts.clone();
            a.reverse();
            let mut acc = accepts.clone();
            acc.reverse();
            let mut rej = rejects.clone();
            rej.reverse();
            let backward = parse_rules(&program(&a, &acc, &rej)).unwrap();
            prop_assert_eq!(evaluate(&forward, &d), evaluate(&backward, &d));
        }
    }
}
