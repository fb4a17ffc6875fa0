//! Plain-text logic notation.
//!
//! `!` negates, `&` conjoins, `->` implies, `|` separates clause literals,
//! `exists X. f` quantifies. Variables start with an uppercase letter;
//! anything else in argument position is a constant. Symbols that do not fit
//! the bare form are double-quoted. With embeddings enabled a symbol may be
//! followed by `@[x, y, ...]`. The empty clause is `[]`.

use crate::similarity::{Embedding, Symbol};

use super::{implication_clause, Clause, Formula, Implication, Literal, LogicError, Term};

/// Printer settings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Notation {
    pub embeddings: bool,
}

impl Notation {
    pub fn plain() -> Self {
        Self { embeddings: false }
    }

    pub fn with_embeddings() -> Self {
        Self { embeddings: true }
    }

    fn symbol(&self, s: &Symbol, bare: fn(&str) -> bool) -> String {
        let mut out = if bare(&s.name) { s.name.clone() } else { quoted(&s.name) };
        if self.embeddings {
            if let Some(e) = &s.embedding {
                out.push_str("@[");
                let parts: Vec<String> = e.values().iter().map(|v| format!("{v:?}")).collect();
                out.push_str(&parts.join(","));
                out.push(']');
            }
        }
        out
    }

    pub fn term(&self, t: &Term) -> String {
        match t {
            Term::Var(v) => v.clone(),
            Term::Const(s) => self.symbol(s, bare_constant),
        }
    }

    pub fn literal(&self, l: &Literal) -> String {
        let args: Vec<String> = l.args.iter().map(|t| self.term(t)).collect();
        format!(
            "{}{}({})",
            if l.positive { "" } else { "!" },
            self.symbol(&l.predicate, bare_predicate),
            args.join(", ")
        )
    }

    pub fn clause(&self, c: &Clause) -> String {
        if c.is_empty() {
            return "[]".into();
        }
        let lits: Vec<String> = c.literals.iter().map(|l| self.literal(l)).collect();
        lits.join(" | ")
    }

    pub fn implication(&self, i: &Implication) -> String {
        self.formula(&i.to_formula())
    }

    pub fn formula(&self, f: &Formula) -> String {
        match f {
            Formula::Implies(a, b) => format!("{} -> {}", self.conj(a), self.conj(b)),
            other => self.conj(other),
        }
    }

    fn conj(&self, f: &Formula) -> String {
        match f {
            Formula::And(fs) if !fs.is_empty() => {
                let parts: Vec<String> = fs.iter().map(|g| self.unary(g)).collect();
                parts.join(" & ")
            }
            Formula::Implies(..) => format!("({})", self.formula(f)),
            other => self.unary(other),
        }
    }

    fn unary(&self, f: &Formula) -> String {
        match f {
            Formula::Atom(l) => self.literal(l),
            Formula::Not(g) => format!("!{}", self.unary(g)),
            Formula::Exists(v, g) => format!("exists {v}. {}", self.unary(g)),
            Formula::And(fs) if fs.is_empty() => "()".into(),
            Formula::And(_) | Formula::Implies(..) => format!("({})", self.formula(f)),
        }
    }
}

fn bare_constant(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit())
        && s.chars().all(ident_char)
        && !s.contains("->")
        && s != "exists"
}

fn bare_predicate(s: &str) -> bool {
    let body = s.strip_prefix(':').unwrap_or(s);
    matches!(body.chars().next(), Some(c) if c.is_ascii_alphanumeric())
        && body.chars().all(ident_char)
        && !s.contains("->")
        && s != "exists"
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | ':' | '\'')
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, LogicError> {
        Err(LogicError::Parse {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), LogicError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected {s:?}"))
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut end = 0;
        for (i, c) in rest.char_indices() {
            if !ident_char(c) || rest[i..].starts_with("->") {
                break;
            }
            end = i + c.len_utf8();
        }
        if end == 0 {
            return None;
        }
        self.pos += end;
        Some(&rest[..end])
    }

    fn quoted(&mut self) -> Result<Option<String>, LogicError> {
        if self.peek() != Some('"') {
            return Ok(None);
        }
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(Some(out));
                }
                '\\' => match chars.next() {
                    Some((_, e)) => out.push(e),
                    None => break,
                },
                c => out.push(c),
            }
        }
        self.pos = self.text.len();
        self.err("unterminated string")
    }

    /// A bare or quoted name; the flag tells whether it was quoted.
    fn name(&mut self) -> Result<Option<(String, bool)>, LogicError> {
        if let Some(q) = self.quoted()? {
            return Ok(Some((q, true)));
        }
        Ok(self.ident().map(|s| (s.to_string(), false)))
    }

    fn embedding(&mut self) -> Result<Option<Embedding>, LogicError> {
        if !self.rest().starts_with("@[") {
            return Ok(None);
        }
        self.pos += 2;
        let Some(close) = self.rest().find(']') else {
            return self.err("unterminated embedding");
        };
        let body = &self.rest()[..close];
        let values: Result<Vec<f64>, _> = body.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let Ok(values) = values else {
            return self.err("bad embedding component");
        };
        match Embedding::new(values) {
            Ok(e) => {
                self.pos += close + 1;
                Ok(Some(e))
            }
            Err(e) => self.err(e.to_string()),
        }
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        let start = self.pos;
        let Some((name, was_quoted)) = self.name()? else {
            return self.err("expected a term");
        };
        let embedding = self.embedding()?;
        let is_var = !was_quoted && name.starts_with(|c: char| c.is_ascii_uppercase());
        if is_var {
            if embedding.is_some() {
                self.pos = start;
                return self.err("variables cannot carry embeddings");
            }
            return Ok(Term::Var(name));
        }
        Ok(Term::Const(Symbol::with_embedding(name, embedding)))
    }

    fn atom(&mut self) -> Result<Literal, LogicError> {
        let Some((name, _)) = self.name()? else {
            return self.err("expected a predicate");
        };
        let embedding = self.embedding()?;
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.eat(")") {
            loop {
                args.push(self.term()?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        Ok(Literal::new(Symbol::with_embedding(name, embedding), args))
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.conj()?;
        if self.eat("->") {
            let rhs = self.conj()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Formula, LogicError> {
        let mut parts = vec![self.unary()?];
        while self.eat("&") {
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        if self.eat("!") {
            let inner = self.unary()?;
            return Ok(match inner {
                Formula::Atom(l) => Formula::Atom(l.negated()),
                other => Formula::Not(Box::new(other)),
            });
        }
        if self.eat("(") {
            if self.eat(")") {
                return Ok(Formula::And(Vec::new()));
            }
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        let save = self.pos;
        if self.ident() == Some("exists") && self.peek() != Some('(') {
            let Some(var) = self.ident() else {
                return self.err("expected a variable after exists");
            };
            if !var.starts_with(|c: char| c.is_ascii_uppercase()) {
                return self.err("quantified variables start with an uppercase letter");
            }
            let var = var.to_string();
            self.expect(".")?;
            let body = self.unary()?;
            return Ok(Formula::Exists(var, Box::new(body)));
        }
        self.pos = save;
        Ok(Formula::Atom(self.atom()?))
    }

    fn finish(&mut self) -> Result<(), LogicError> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    let mut p = Parser::new(text);
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_literal(text: &str) -> Result<Literal, LogicError> {
    let mut p = Parser::new(text);
    let negative = p.eat("!");
    let l = p.atom()?;
    p.finish()?;
    Ok(if negative { l.negated() } else { l })
}

fn literal_list(f: &Formula) -> Option<Vec<Literal>> {
    match f {
        Formula::Atom(l) => Some(vec![l.clone()]),
        Formula::And(fs) => fs.iter().map(literal_list).collect::<Option<Vec<_>>>().map(|v| v.concat()),
        _ => None,
    }
}

/// Clauses from one line: a disjunction `a | !b`, a single literal, or an
/// implication whose sides are conjunctions of literals (one literal on the
/// right). A conjunction of literals gives one unit clause per literal.
fn line_clauses(line: &str) -> Result<Vec<Clause>, LogicError> {
    let trimmed = line.trim();
    if trimmed == "[]" {
        return Ok(vec![Clause::empty()]);
    }
    if has_top_level_pipe(trimmed) {
        let lits = split_top_level(trimmed, '|')
            .into_iter()
            .map(parse_literal)
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(vec![Clause::new(lits)]);
    }
    let f = parse_formula(trimmed)?;
    let not_clausal = || LogicError::Parse {
        offset: 0,
        message: "line is not a clause, literal conjunction, or simple implication".into(),
    };
    match &f {
        Formula::Implies(a, b) => {
            let antecedent = literal_list(a).ok_or_else(not_clausal)?;
            let mut rhs = literal_list(b).ok_or_else(not_clausal)?;
            if rhs.len() != 1 {
                return Err(not_clausal());
            }
            Ok(vec![implication_clause(&Implication {
                antecedent,
                consequent: rhs.pop().unwrap(),
            })])
        }
        other => Ok(literal_list(other)
            .ok_or_else(not_clausal)?
            .into_iter()
            .map(Clause::unit)
            .collect()),
    }
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut in_str, mut escaped, mut start) = (0i32, false, false, 0);
    for (i, c) in s.char_indices() {
        if in_str {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn has_top_level_pipe(s: &str) -> bool {
    split_top_level(s, '|').len() > 1
}

pub fn parse_clause(text: &str) -> Result<Clause, LogicError> {
    let mut cs = line_clauses(text)?;
    if cs.len() != 1 {
        return Err(LogicError::Parse {
            offset: 0,
            message: "expected exactly one clause".into(),
        });
    }
    Ok(cs.pop().unwrap())
}

/// Clauses from a file: one item per line, `#` starts a comment line.
pub fn parse_clauses(text: &str) -> Result<Vec<Clause>, LogicError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let cs = line_clauses(t).map_err(|e| match e {
            LogicError::Parse { offset, message } => LogicError::Parse {
                offset,
                message: format!("line {}: {message}", n + 1),
            },
            other => other,
        })?;
        out.extend(cs);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_round_trip() {
        for text in [
            "!exists G. (go(G) & exists B. (:ARG0(G, B) & boy(B)))",
            "exists B. boy(B)",
            r#"exists X. (person(X) & :named(X, "Mr Krupp") & exists E. (dry(E) & :ARG0(E, X) & :ARG1(E, X)))"#,
            "hang-up(H) & :ARG2(H, S) & someone(S) -> BAD(H)",
            "a(X) & !b(X) -> !GOOD(X)",
            "exists A. exists B. (p(A) & q(B))",
            r#""odd name"(x, "-", 5)"#,
        ] {
            let f = parse_formula(text).unwrap();
            assert_eq!(f.to_string(), text);
        }
    }

    #[test]
    fn constants_variables_and_quotes() {
        let l = parse_literal(r#"!p(X, a, "B c", 5)"#).unwrap();
        assert!(!l.positive);
        assert_eq!(l.args[0], Term::var("X"));
        assert_eq!(l.args[1], Term::constant("a"));
        assert_eq!(l.args[2], Term::constant("B c"));
        assert_eq!(l.args[3], Term::constant("5"));
        // a constant that looks like a variable must stay quoted
        assert_eq!(Term::constant("Bart").to_string(), "\"Bart\"");
        assert_eq!(parse_literal(&Literal::atom("p", &[Term::constant("Bart")]).to_string()).unwrap().args[0], Term::constant("Bart"));
    }

    #[test]
    fn embeddings_round_trip() {
        let e = Embedding::new(vec![0.1, -2.5, 1e-7]).unwrap();
        let l = Literal::new(
            Symbol::with_embedding("dog", Some(e.clone())),
            vec![Term::Const(Symbol::with_embedding("d", Some(e.clone()))), Term::var("Y")],
        );
        let text = Notation::with_embeddings().literal(&l);
        assert_eq!(parse_literal(&text).unwrap(), l);
        assert_eq!(l.to_string(), "dog(d, Y)");
        assert!(parse_literal("p(X@[1.0])").is_err());
    }

    #[test]
    fn clause_lines() {
        let text = "# kb\np(a)\n!p(X) | q(X)\n\nr(X) & s(X) -> t(X)\nu(b) & v(b)\n[]\n";
        let cs = parse_clauses(text).unwrap();
        let shown: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, ["p(a)", "!p(X) | q(X)", "!r(X) | !s(X) | t(X)", "u(b)", "v(b)", "[]"]);
        assert!(parse_clauses("exists X. p(X)").is_err());
        assert!(parse_clauses("p(a) -> q(a) & r(a)").is_err());
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match parse_formula("p(a) & ") {
            Err(LogicError::Parse { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("p(a").is_err());
        assert!(parse_formula("p(a) q(b)").is_err());
        assert!(parse_formula("\"open(a)").is_err());
        assert!(parse_formula("exists x. p(x)").is_err());
    }

    #[test]
    fn exists_as_predicate_name() {
        let f = parse_formula("\"exists\"(a)").unwrap();
        assert_eq!(f.to_string(), "\"exists\"(a)");
        let g = parse_formula("exists(a)").unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn arrow_splits_identifiers() {
        let f = parse_formula("p(a)->q(a)").unwrap();
        assert!(matches!(f, Formula::Implies(..)));
    }
}
