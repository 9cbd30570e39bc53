use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{Atom, Clause, Head, Rule, RuleSet, Scope};
use crate::corpus::tokenize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyProgram,
    Syntax(String),
    UndefinedFact(String),
}

/// Parse failure with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::EmptyProgram => write!(f, "empty program"),
            ParseErrorKind::Syntax(msg) => {
                write!(f, "syntax error at {}:{}: {}", self.line, self.column, msg)
            }
            ParseErrorKind::UndefinedFact(name) => {
                write!(f, "undefined fact `{}` at {}:{}", name, self.line, self.column)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Int(usize),
    Slash,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Lexeme {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax(msg.into()),
        line,
        column,
    }
}

fn lex(source: &str) -> Result<Vec<Lexeme>, ParseError> {
    let mut out = Vec::new();
    for (line_idx, line) in source.lines().enumerate() {
        let line_no = line_idx + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let tok = match c {
                '/' => {
                    i += 1;
                    Tok::Slash
                }
                '(' => {
                    i += 1;
                    Tok::LParen
                }
                ')' => {
                    i += 1;
                    Tok::RParen
                }
                '"' => {
                    let mut s = String::new();
                    i += 1;
                    loop {
                        match chars.get(i) {
                            None => return Err(syntax(line_no, column, "unterminated string")),
                            Some('"') => {
                                i += 1;
                                break;
                            }
                            Some('\\') if matches!(chars.get(i + 1), Some('"' | '\\')) => {
                                s.push(chars[i + 1]);
                                i += 2;
                            }
                            Some(&ch) => {
                                s.push(ch);
                                i += 1;
                            }
                        }
                    }
                    Tok::Str(s)
                }
                c if c.is_ascii_digit() => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let digits: String = chars[start..i].iter().collect();
                    let n = digits
                        .parse()
                        .map_err(|_| syntax(line_no, column, "integer out of range"))?;
                    Tok::Int(n)
                }
                c if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len()
                        && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '-')
                    {
                        i += 1;
                    }
                    Tok::Ident(chars[start..i].iter().collect())
                }
                other => {
                    return Err(syntax(line_no, column, alloc::format!("unexpected character `{other}`")))
                }
            };
            out.push(Lexeme {
                tok,
                line: line_no,
                column,
            });
        }
    }
    Ok(out)
}

struct Parser {
    lexemes: Vec<Lexeme>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Lexeme> {
        self.lexemes.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |l| (l.line, l.column))
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        syntax(line, column, msg)
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Lexeme { tok: Tok::Ident(s), .. }) if s.eq_ignore_ascii_case(kw))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.peek_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(alloc::format!("expected `{kw}`")))
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().map(|l| &l.tok) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(alloc::format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Lexeme {
                tok: Tok::Ident(s), ..
            }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Lexeme { tok: Tok::Str(s), .. }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected string literal")),
        }
    }

    fn atom(&mut self, refs: &mut Vec<(String, usize, usize)>) -> Result<Atom, ParseError> {
        let (line, column) = self.here();
        match self.peek().map(|l| &l.tok) {
            Some(Tok::Str(_)) => {
                let raw = self.string()?;
                let tokens = tokenize(&raw);
                if tokens.is_empty() {
                    return Err(syntax(line, column, "literal contains no tokens"));
                }
                Ok(Atom::Literal(tokens))
            }
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("fact") => {
                self.pos += 1;
                self.expect(Tok::LParen, "`(`")?;
                let name = self.ident()?;
                self.expect(Tok::RParen, "`)`")?;
                refs.push((name.clone(), line, column));
                Ok(Atom::Fact(name))
            }
            _ => Err(self.error("expected string literal or fact(NAME)")),
        }
    }

    fn clause(&mut self, refs: &mut Vec<(String, usize, usize)>) -> Result<Clause, ParseError> {
        let left = self.atom(refs)?;
        if !self.peek_keyword("near") {
            return Ok(Clause::atom(left));
        }
        self.pos += 1;
        self.expect(Tok::Slash, "`/` after `near`")?;
        let distance = match self.peek().map(|l| &l.tok) {
            Some(Tok::Int(n)) if *n >= 1 => *n,
            Some(Tok::Int(_)) => return Err(self.error("proximity must be at least 1")),
            _ => return Err(self.error("expected integer after `near/`")),
        };
        self.pos += 1;
        let right = self.atom(refs)?;
        Ok(Clause::near(left, distance, right))
    }

    fn rule(&mut self, refs: &mut Vec<(String, usize, usize)>) -> Result<Rule, ParseError> {
        let head = if self.peek_keyword("assert") {
            self.pos += 1;
            Head::Fact(self.ident()?)
        } else if self.peek_keyword("accept") {
            self.pos += 1;
            Head::Accept
        } else if self.peek_keyword("reject") {
            self.pos += 1;
            Head::Reject
        } else {
            return Err(self.error("expected `assert`, `accept` or `reject`"));
        };
        self.keyword("when")?;
        let mut clauses = alloc::vec![self.clause(refs)?];
        while self.peek_keyword("and") {
            self.pos += 1;
            clauses.push(self.clause(refs)?);
        }
        let mut scope = Scope::Sentence;
        if self.peek_keyword("scope") {
            self.pos += 1;
            scope = if self.peek_keyword("sentence") {
                Scope::Sentence
            } else if self.peek_keyword("document") {
                Scope::Document
            } else {
                return Err(self.error("expected `sentence` or `document`"));
            };
            self.pos += 1;
        }
        Ok(Rule {
            head,
            clauses,
            scope,
        })
    }
}

/// Parse a rule program.
pub fn parse_rules(source: &str) -> Result<RuleSet, ParseError> {
    let lexemes = lex(source)?;
    if lexemes.is_empty() {
        return Err(ParseError {
            kind: ParseErrorKind::EmptyProgram,
            line: 1,
            column: 1,
        });
    }
    let last_line = source.lines().count().max(1);
    let last_col = source.lines().last().map_or(0, |l| l.chars().count()) + 1;
    let mut p = Parser {
        lexemes,
        pos: 0,
        end: (last_line, last_col),
    };
    p.keyword("topic")?;
    let topic_name = p.string()?;

    let mut refs = Vec::new();
    let mut set = RuleSet {
        topic_name,
        assert_rules: Vec::new(),
        accept_rules: Vec::new(),
        reject_rules: Vec::new(),
        rule_terms: BTreeSet::new(),
    };
    while p.peek().is_some() {
        let rule = p.rule(&mut refs)?;
        for clause in &rule.clauses {
            for atom in clause.atoms() {
                if let Atom::Literal(tokens) = atom {
                    set.rule_terms.extend(tokens.iter().cloned());
                }
            }
        }
        match rule.head {
            Head::Fact(_) => set.assert_rules.push(rule),
            Head::Accept => set.accept_rules.push(rule),
            Head::Reject => set.reject_rules.push(rule),
        }
    }
    if set.assert_rules.is_empty() && set.accept_rules.is_empty() && set.reject_rules.is_empty() {
        return Err(ParseError {
            kind: ParseErrorKind::EmptyProgram,
            line: 1,
            column: 1,
        });
    }

    let defined = set.fact_names();
    if let Some((name, line, column)) = refs.iter().find(|(n, _, _)| !defined.contains(n.as_str())) {
        return Err(ParseError {
            kind: ParseErrorKind::UndefinedFact(name.to_string()),
            line: *line,
            column: *column,
        });
    }
    Ok(set)
}
