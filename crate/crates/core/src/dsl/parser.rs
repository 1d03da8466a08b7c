//! Recursive-descent parser for `.scm` files.
//!
//! Grammar (informal):
//!
//! ```text
//! file     := block*
//! block    := "scm" NAME "{" stmt* "}"
//!           | "query" NAME "on" NAME "=" "P" "(" NAME "=" INT "|" "do" "(" assigns ")" [";" "given" assigns] ")"
//! stmt     := "exo" NAME "~" dist
//!           | "var" NAME "=" expr
//!           | "mixture" NAME "=" "tuple" "(" names ")"
//!           | "label" NAME "uses" "{" names? "}" "=" (expr | "bayes" "(" NAME ")")
//! dist     := "bernoulli" "(" prob ")" | "categorical" "(" prob ("," prob)* ")"
//! prob     := NUMBER ["/" NUMBER]
//! expr     := or
//! or       := xor (("or" | "|") xor)*
//! xor      := and (("xor" | "^") and)*
//! and      := cmp (("and" | "&") cmp)*
//! cmp      := sum [("<" | ">" | "=") sum]
//! sum      := prod (("+" | "-") prod)*
//! prod     := unary ("*" unary)*
//! unary    := ("not" | "!") unary | atom
//! atom     := INT | "true" | "false" | NAME | "indicator" "(" expr ")" | "(" expr ")"
//! ```
//!
//! Statements end at the start of the next statement keyword; no separators
//! are required. Declarations may appear in any order inside a block.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::error::{DslError, Pos};
use super::lexer::{tokenize, Tok, Token};
use crate::prob::{self, Prob};

/// Words that can never name a variable or block.
pub const RESERVED: &[&str] = &[
    "scm", "exo", "var", "mixture", "label", "uses", "query", "on", "given", "do", "bayes",
    "tuple", "bernoulli", "categorical", "not", "and", "or", "xor", "true", "false", "indicator",
];

pub fn parse(text: &str) -> Result<SourceFile, DslError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, at: 0 };
    let mut raw = Vec::new();
    while !parser.check(&Tok::Eof) {
        raw.push(parser.block()?);
    }
    validate(raw)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

/// A reference to a name, with where it was written.
type Refs = Vec<(String, Pos)>;

struct RawStmt {
    pos: Pos,
    stmt: Stmt,
    refs: Refs,
    /// Only for labels: the `uses {..}` names.
    uses: Refs,
}

enum RawBlock {
    Scm { pos: Pos, name: String, stmts: Vec<RawStmt> },
    Query { pos: Pos, query: QueryBlock, scm_pos: Pos, outcome_pos: Pos, do_names: Refs, given_names: Refs },
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn check(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn check_word(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(w) if w == word)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> DslError {
        let t = self.peek();
        DslError::syntax(t.pos, t.tok.describe(), expected)
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, DslError> {
        if self.check(&tok) {
            Ok(self.bump().pos)
        } else {
            let sym = format!("`{}`", tok.symbol());
            Err(self.error(&[&sym]))
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<Pos, DslError> {
        if self.check_word(word) {
            Ok(self.bump().pos)
        } else {
            let w = format!("`{word}`");
            Err(self.error(&[&w]))
        }
    }

    fn name(&mut self) -> Result<(String, Pos), DslError> {
        match &self.peek().tok {
            Tok::Ident(w) if !RESERVED.contains(&w.as_str()) => {
                let t = self.bump();
                match t.tok {
                    Tok::Ident(w) => Ok((w, t.pos)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.error(&["a name"])),
        }
    }

    fn integer(&mut self) -> Result<i64, DslError> {
        let negative = if self.check(&Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        match &self.peek().tok {
            Tok::Number(lit) if lit.bytes().all(|b| b.is_ascii_digit()) => {
                let pos = self.peek().pos;
                let v: i64 = lit.parse().map_err(|_| DslError::Invalid {
                    pos,
                    message: format!("integer `{lit}` out of range"),
                })?;
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.error(&["an integer"])),
        }
    }

    fn block(&mut self) -> Result<RawBlock, DslError> {
        if self.check_word("scm") {
            let pos = self.bump().pos;
            let (name, _) = self.name()?;
            self.expect(Tok::LBrace)?;
            let mut stmts = Vec::new();
            while !self.check(&Tok::RBrace) {
                stmts.push(self.stmt()?);
            }
            self.expect(Tok::RBrace)?;
            Ok(RawBlock::Scm { pos, name, stmts })
        } else if self.check_word("query") {
            self.query()
        } else {
            Err(self.error(&["`scm`", "`query`"]))
        }
    }

    fn stmt(&mut self) -> Result<RawStmt, DslError> {
        let pos = self.peek().pos;
        if self.check_word("exo") {
            self.bump();
            let (name, _) = self.name()?;
            self.expect(Tok::Tilde)?;
            let dist = self.dist()?;
            Ok(RawStmt { pos, stmt: Stmt::Exo { name, dist }, refs: vec![], uses: vec![] })
        } else if self.check_word("var") {
            self.bump();
            let (name, _) = self.name()?;
            self.expect(Tok::Assign)?;
            let mut refs = Vec::new();
            let expr = self.expr(&mut refs)?;
            Ok(RawStmt { pos, stmt: Stmt::Var { name, expr }, refs, uses: vec![] })
        } else if self.check_word("mixture") {
            self.bump();
            let (name, _) = self.name()?;
            self.expect(Tok::Assign)?;
            self.expect_word("tuple")?;
            self.expect(Tok::LParen)?;
            let refs = self.name_list(&Tok::RParen)?;
            self.expect(Tok::RParen)?;
            let components = refs.iter().map(|(n, _)| n.clone()).collect();
            Ok(RawStmt { pos, stmt: Stmt::Mixture { name, components }, refs, uses: vec![] })
        } else if self.check_word("label") {
            self.bump();
            let (name, _) = self.name()?;
            self.expect_word("uses")?;
            self.expect(Tok::LBrace)?;
            let uses_refs = self.name_list(&Tok::RBrace)?;
            self.expect(Tok::RBrace)?;
            self.expect(Tok::Assign)?;
            let mut refs = Vec::new();
            let body = if self.check_word("bayes") {
                self.bump();
                self.expect(Tok::LParen)?;
                let (target, tpos) = self.name()?;
                self.expect(Tok::RParen)?;
                refs.push((target.clone(), tpos));
                LabelBody::Bayes(target)
            } else {
                LabelBody::Expr(self.expr(&mut refs)?)
            };
            let uses = uses_refs.iter().map(|(n, _)| n.clone()).collect();
            let stmt = Stmt::Label(LabelDecl { name, uses, body });
            Ok(RawStmt { pos, stmt, refs, uses: uses_refs })
        } else {
            Err(self.error(&["`exo`", "`var`", "`mixture`", "`label`", "`}`"]))
        }
    }

    fn name_list(&mut self, close: &Tok) -> Result<Refs, DslError> {
        let mut out = Vec::new();
        if self.check(close) {
            return Ok(out);
        }
        loop {
            out.push(self.name()?);
            if self.check(&Tok::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn prob_literal(&mut self) -> Result<(Prob, Pos), DslError> {
        let pos = self.peek().pos;
        let num = match &self.peek().tok {
            Tok::Number(n) => n.clone(),
            _ => return Err(self.error(&["a probability"])),
        };
        self.bump();
        let text = if self.check(&Tok::Slash) {
            self.bump();
            match &self.peek().tok {
                Tok::Number(d) => {
                    let d = d.clone();
                    self.bump();
                    format!("{num}/{d}")
                }
                _ => return Err(self.error(&["a denominator"])),
            }
        } else {
            num
        };
        let p = prob::parse_literal(&text).ok_or_else(|| DslError::ProbabilityRange {
            pos,
            detail: format!("`{text}` is not a valid probability"),
        })?;
        if !prob::is_probability(&p) {
            return Err(DslError::ProbabilityRange {
                pos,
                detail: format!("`{text}` is outside [0, 1]"),
            });
        }
        Ok((p, pos))
    }

    fn dist(&mut self) -> Result<DistSpec, DslError> {
        if self.check_word("bernoulli") {
            self.bump();
            self.expect(Tok::LParen)?;
            let (p, _) = self.prob_literal()?;
            self.expect(Tok::RParen)?;
            Ok(DistSpec::Bernoulli(p))
        } else if self.check_word("categorical") {
            let pos = self.bump().pos;
            self.expect(Tok::LParen)?;
            let mut ps = vec![self.prob_literal()?.0];
            while self.check(&Tok::Comma) {
                self.bump();
                ps.push(self.prob_literal()?.0);
            }
            self.expect(Tok::RParen)?;
            let total: Prob = ps.iter().cloned().sum();
            if total != prob::one() {
                return Err(DslError::ProbabilityRange {
                    pos,
                    detail: format!("categorical probabilities sum to {}, not 1", prob::fraction(&total)),
                });
            }
            Ok(DistSpec::Categorical(ps))
        } else {
            Err(self.error(&["`bernoulli`", "`categorical`"]))
        }
    }

    fn expr(&mut self, refs: &mut Refs) -> Result<Expr, DslError> {
        self.or_expr(refs)
    }

    fn or_expr(&mut self, refs: &mut Refs) -> Result<Expr, DslError> {
        let mut lhs = self.xor_expr(refs)?;
        while self.check(&Tok::Pipe) || self.check_word("or") {
            self.bump();
            let rhs = self.xor_expr(refs)?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn xor_expr(&mut self, refs: &mut Refs) -> Result<Expr, DslError> {
        let mut lhs = self.and_expr(refs)?;
        while self.check(&Tok::Caret) || self.check_word("xor") {
            self.bump();
            let rhs = self.and_expr(refs)?;
            lhs = Expr::binary(BinOp::Xor, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self, refs: &mut Refs) -> Result<Expr, DslError> {
        let mut lhs = self.cmp_expr(refs)?;
        while self.check(&Tok::Amp) || self.check_word("and") {
            self.bump();
            let rhs = self.cmp_expr(refs)?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self, refs: &mut Refs) -> Result<Expr, DslError> {
        let lhs = self.sum_expr(refs)?;
        let op = match self.peek().tok {
            Tok::Lt => BinOp::Lt,
            Tok::Gt => BinOp::Gt,
            Tok::Assign => BinOp::Eq,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.sum_expr(refs)?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn sum_expr(&mut self, refs: &mut Refs) -> Result<Expr, DslError> {
        let mut lhs = self.prod_expr(refs)?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.prod_expr(refs)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn prod_expr(&mut self, refs: &mut Refs) -> Result<Expr, DslError> {
        let mut lhs = self.unary(refs)?;
        while self.check(&Tok::Star) {
            self.bump();
            let rhs = self.unary(refs)?;
            lhs = Expr::binary(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self, refs: &mut Refs) -> Result<Expr, DslError> {
        if self.check(&Tok::Bang) || self.check_word("not") {
            self.bump();
            return Ok(Expr::not(self.unary(refs)?));
        }
        self.atom(refs)
    }

    fn atom(&mut self, refs: &mut Refs) -> Result<Expr, DslError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Number(lit) => {
                if !lit.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(DslError::Invalid {
                        pos: t.pos,
                        message: format!("expressions take integer constants, found `{lit}`"),
                    });
                }
                Ok(Expr::Int(self.integer()?))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(refs)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(Expr::Bool(w == "true"))
            }
            Tok::Ident(w) if w == "indicator" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.expr(refs)?;
                self.expect(Tok::RParen)?;
                Ok(Expr::indicator(e))
            }
            Tok::Ident(_) => {
                let (name, pos) = self
                    .name()
                    .map_err(|_| self.error(&["an expression"]))?;
                refs.push((name.clone(), pos));
                Ok(Expr::Var(name))
            }
            _ => Err(self.error(&["an expression"])),
        }
    }

    fn assignments(&mut self, names: &mut Refs) -> Result<Vec<(String, i64)>, DslError> {
        let mut out = Vec::new();
        loop {
            let (name, pos) = self.name()?;
            self.expect(Tok::Assign)?;
            let v = self.integer()?;
            names.push((name.clone(), pos));
            out.push((name, v));
            if self.check(&Tok::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn query(&mut self) -> Result<RawBlock, DslError> {
        let pos = self.expect_word("query")?;
        let (name, _) = self.name()?;
        self.expect_word("on")?;
        let (scm, scm_pos) = self.name()?;
        self.expect(Tok::Assign)?;
        self.expect_word("P")?;
        self.expect(Tok::LParen)?;
        let (label, outcome_pos) = self.name()?;
        self.expect(Tok::Assign)?;
        let value = self.integer()?;
        self.expect(Tok::Pipe)?;
        self.expect_word("do")?;
        self.expect(Tok::LParen)?;
        let mut do_names = Vec::new();
        let intervention = if self.check(&Tok::RParen) {
            vec![]
        } else {
            self.assignments(&mut do_names)?
        };
        self.expect(Tok::RParen)?;
        let mut given_names = Vec::new();
        let evidence = if self.check(&Tok::Semi) {
            self.bump();
            self.expect_word("given")?;
            self.assignments(&mut given_names)?
        } else {
            vec![]
        };
        self.expect(Tok::RParen)?;
        if intervention.is_empty() {
            return Err(DslError::Invalid {
                pos,
                message: format!("query `{name}` has an empty intervention"),
            });
        }
        let query = QueryBlock { name, scm, outcome: (label, value), intervention, evidence };
        Ok(RawBlock::Query { pos, query, scm_pos, outcome_pos, do_names, given_names })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Exo,
    Var,
    Mixture,
    Label,
}

fn validate(raw: Vec<RawBlock>) -> Result<SourceFile, DslError> {
    let mut seen_blocks: HashMap<String, Pos> = HashMap::new();
    let mut scm_kinds: HashMap<String, HashMap<String, Kind>> = HashMap::new();
    let mut mixture_components: HashMap<String, BTreeSet<String>> = HashMap::new();

    for block in &raw {
        let (name, pos) = match block {
            RawBlock::Scm { name, pos, .. } => (name, *pos),
            RawBlock::Query { query, pos, .. } => (&query.name, *pos),
        };
        if seen_blocks.insert(name.clone(), pos).is_some() {
            return Err(DslError::Duplicate { pos, name: name.clone() });
        }
    }

    for block in &raw {
        if let RawBlock::Scm { name, stmts, .. } = block {
            let kinds = validate_scm(stmts)?;
            let comps = stmts
                .iter()
                .find_map(|s| match &s.stmt {
                    Stmt::Mixture { components, .. } => Some(components.iter().cloned().collect()),
                    _ => None,
                })
                .unwrap_or_default();
            mixture_components.insert(name.clone(), comps);
            scm_kinds.insert(name.clone(), kinds);
        }
    }

    for block in &raw {
        if let RawBlock::Query { query, scm_pos, outcome_pos, do_names, given_names, .. } = block {
            let kinds = scm_kinds.get(&query.scm).ok_or_else(|| DslError::Undeclared {
                pos: *scm_pos,
                name: query.scm.clone(),
                context: "no scm block with this name".into(),
            })?;
            let comps = &mixture_components[&query.scm];
            match kinds.get(&query.outcome.0) {
                Some(Kind::Label) => {}
                Some(_) => {
                    return Err(DslError::Invalid {
                        pos: *outcome_pos,
                        message: format!("query outcome `{}` is not the model's label", query.outcome.0),
                    })
                }
                None => {
                    return Err(DslError::Undeclared {
                        pos: *outcome_pos,
                        name: query.outcome.0.clone(),
                        context: format!("not declared in scm `{}`", query.scm),
                    })
                }
            }
            let n_do = do_names.len();
            for (i, (name, pos)) in do_names.iter().chain(given_names).enumerate() {
                let kind = kinds.get(name).ok_or_else(|| DslError::Undeclared {
                    pos: *pos,
                    name: name.clone(),
                    context: format!("not declared in scm `{}`", query.scm),
                })?;
                if i < n_do {
                    if *kind != Kind::Var {
                        return Err(DslError::Invalid {
                            pos: *pos,
                            message: format!("cannot intervene on `{name}`: only endogenous variables can be intervened on"),
                        });
                    }
                } else if *kind != Kind::Var && !comps.contains(name) {
                    return Err(DslError::Invalid {
                        pos: *pos,
                        message: format!("evidence on `{name}`: must be an endogenous variable or a mixture component"),
                    });
                }
            }
            for names in [do_names, given_names] {
                let mut dup = BTreeSet::new();
                for (name, pos) in names {
                    if !dup.insert(name) {
                        return Err(DslError::Duplicate { pos: *pos, name: name.clone() });
                    }
                }
            }
        }
    }

    let blocks = raw
        .into_iter()
        .map(|b| match b {
            RawBlock::Scm { name, stmts, .. } => Block::Scm(ScmBlock {
                name,
                stmts: stmts.into_iter().map(|s| s.stmt).collect(),
            }),
            RawBlock::Query { query, .. } => Block::Query(query),
        })
        .collect();
    Ok(SourceFile { blocks })
}

fn validate_scm(stmts: &[RawStmt]) -> Result<HashMap<String, Kind>, DslError> {
    let mut kinds: HashMap<String, Kind> = HashMap::new();
    let mut mixture: Option<(&str, Pos)> = None;
    let mut label_seen = false;
    for s in stmts {
        let kind = match &s.stmt {
            Stmt::Exo { .. } => Kind::Exo,
            Stmt::Var { .. } => Kind::Var,
            Stmt::Mixture { name, .. } => {
                if mixture.is_some() {
                    return Err(DslError::Invalid { pos: s.pos, message: "at most one mixture per scm".into() });
                }
                mixture = Some((name, s.pos));
                Kind::Mixture
            }
            Stmt::Label(_) => {
                if label_seen {
                    return Err(DslError::Invalid { pos: s.pos, message: "at most one label per scm".into() });
                }
                label_seen = true;
                Kind::Label
            }
        };
        if kinds.insert(s.stmt.name().to_string(), kind).is_some() {
            return Err(DslError::Duplicate { pos: s.pos, name: s.stmt.name().to_string() });
        }
    }

    let lookup = |name: &str, pos: Pos, context: &str| -> Result<Kind, DslError> {
        kinds.get(name).copied().ok_or_else(|| DslError::Undeclared {
            pos,
            name: name.to_string(),
            context: context.to_string(),
        })
    };

    let mut var_deps: BTreeMap<String, (Pos, BTreeSet<String>)> = BTreeMap::new();
    let mut components: BTreeSet<String> = BTreeSet::new();

    for s in stmts {
        match &s.stmt {
            Stmt::Exo { .. } => {}
            Stmt::Var { name, .. } => {
                let mut deps = BTreeSet::new();
                for (r, pos) in &s.refs {
                    match lookup(r, *pos, &format!("in the equation of `{name}`"))? {
                        Kind::Exo => {}
                        Kind::Var => {
                            deps.insert(r.clone());
                        }
                        k => {
                            return Err(DslError::Invalid {
                                pos: *pos,
                                message: format!("equation of `{name}` reads `{r}`, which is a {}", kind_word(k)),
                            })
                        }
                    }
                }
                var_deps.insert(name.clone(), (s.pos, deps));
            }
            Stmt::Mixture { name, components: comps } => {
                for (r, pos) in &s.refs {
                    match lookup(r, *pos, &format!("component of mixture `{name}`"))? {
                        Kind::Exo | Kind::Var => {}
                        k => {
                            return Err(DslError::Invalid {
                                pos: *pos,
                                message: format!("mixture component `{r}` is a {}", kind_word(k)),
                            })
                        }
                    }
                }
                let mut seen = BTreeSet::new();
                for (c, (_, pos)) in comps.iter().zip(&s.refs) {
                    if !seen.insert(c) {
                        return Err(DslError::Duplicate { pos: *pos, name: c.clone() });
                    }
                }
                components = comps.iter().cloned().collect();
            }
            Stmt::Label(_) => {}
        }
    }

    for s in stmts {
        if let Stmt::Label(decl) = &s.stmt {
            let (uses_refs, body_refs) = (&s.uses, &s.refs);
            let mut reads_mixture = false;
            let mut seen = BTreeSet::new();
            for (r, pos) in uses_refs {
                if !seen.insert(r) {
                    return Err(DslError::Duplicate { pos: *pos, name: r.clone() });
                }
                match lookup(r, *pos, &format!("feature of label `{}`", decl.name))? {
                    Kind::Var => {}
                    Kind::Mixture => reads_mixture = true,
                    k => {
                        return Err(DslError::Invalid {
                            pos: *pos,
                            message: format!("label `{}` cannot use `{r}`, which is a {}", decl.name, kind_word(k)),
                        })
                    }
                }
            }
            if reads_mixture && uses_refs.len() > 1 {
                return Err(DslError::Invalid {
                    pos: s.pos,
                    message: format!("label `{}` mixes the mixture with features; a classifier reads either the mixture alone or a set of features", decl.name),
                });
            }
            match &decl.body {
                LabelBody::Bayes(target) => {
                    let (_, pos) = &body_refs[0];
                    if reads_mixture {
                        return Err(DslError::Invalid {
                            pos: s.pos,
                            message: "bayes(...) classifiers read features, not the mixture".into(),
                        });
                    }
                    if lookup(target, *pos, "bayes target")? != Kind::Var {
                        return Err(DslError::Invalid {
                            pos: *pos,
                            message: format!("bayes target `{target}` must be an endogenous variable"),
                        });
                    }
                }
                LabelBody::Expr(_) => {
                    for (r, pos) in body_refs {
                        lookup(r, *pos, &format!("in the classifier of `{}`", decl.name))?;
                        let allowed = if reads_mixture {
                            components.contains(r)
                        } else {
                            decl.uses.contains(r)
                        };
                        if !allowed {
                            return Err(DslError::Invalid {
                                pos: *pos,
                                message: format!(
                                    "classifier of `{}` reads `{r}`, which is not among its inputs",
                                    decl.name
                                ),
                            });
                        }
                    }
                }
            }
        }
    }

    if let Some(cycle) = find_cycle(&var_deps) {
        let pos = var_deps[&cycle[0]].0;
        return Err(DslError::Cycle { pos, cycle });
    }
    Ok(kinds)
}

fn kind_word(k: Kind) -> &'static str {
    match k {
        Kind::Exo => "exogenous variable",
        Kind::Var => "endogenous variable",
        Kind::Mixture => "mixture",
        Kind::Label => "label",
    }
}

/// Returns the members of one directed cycle, closed (first == last).
fn find_cycle(deps: &BTreeMap<String, (Pos, BTreeSet<String>)>) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit(
        node: &str,
        deps: &BTreeMap<String, (Pos, BTreeSet<String>)>,
        marks: &mut HashMap<String, Mark>,
        stack: &mut Vec<String>,
    ) -> Option<Vec<String>> {
        match marks.get(node) {
            Some(Mark::Done) => return None,
            Some(Mark::Open) => {
                let start = stack.iter().position(|n| n == node).unwrap_or(0);
                let mut cycle = stack[start..].to_vec();
                cycle.push(node.to_string());
                return Some(cycle);
            }
            None => {}
        }
        marks.insert(node.to_string(), Mark::Open);
        stack.push(node.to_string());
        if let Some((_, ds)) = deps.get(node) {
            for d in ds {
                if let Some(c) = visit(d, deps, marks, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        marks.insert(node.to_string(), Mark::Done);
        None
    }
    let mut marks = HashMap::new();
    for node in deps.keys() {
        let mut stack = Vec::new();
        if let Some(c) = visit(node, deps, &mut marks, &mut stack) {
            return Some(c);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const M_BP: &str = "
        scm m_bp {
            exo U_F ~ bernoulli(0.4)
            exo U_S ~ bernoulli(0.6)
            exo U_C1 ~ bernoulli(0.3)
            exo U_C2 ~ bernoulli(0.6)
            var F = U_F xor U_S
            var S = U_S
            var C = (not S and U_C1) xor (S and U_C2)
            mixture X = tuple(F, S, C, U_S)
            label Yhat uses {X} = indicator(S > 0)
        }";

    #[test]
    fn parses_blackbox_model() {
        let f = parse(M_BP).unwrap();
        let b = f.scm_block("m_bp").unwrap();
        let exo = b.stmts.iter().filter(|s| matches!(s, Stmt::Exo { .. })).count();
        let var = b.stmts.iter().filter(|s| matches!(s, Stmt::Var { .. })).count();
        assert_eq!((exo, var), (4, 3));
        let Stmt::Var { expr, .. } = &b.stmts[4] else { panic!() };
        assert_eq!(*expr, Expr::xor(Expr::var("U_F"), Expr::var("U_S")));
        let Stmt::Var { expr, .. } = &b.stmts[6] else { panic!() };
        let expected = Expr::xor(
            Expr::and(Expr::not(Expr::var("S")), Expr::var("U_C1")),
            Expr::and(Expr::var("S"), Expr::var("U_C2")),
        );
        assert_eq!(*expr, expected);
    }

    #[test]
    fn degenerate_distribution() {
        let f = parse("scm s { exo U ~ bernoulli(1) var A = U }").unwrap();
        assert_eq!(f.blocks.len(), 1);
    }

    #[test]
    fn two_cycle_is_reported() {
        let err = parse("scm s { exo U ~ bernoulli(0.5) var A = B var B = A }").unwrap_err();
        let DslError::Cycle { cycle, .. } = err else { panic!("{err}") };
        let members: BTreeSet<_> = cycle.iter().cloned().collect();
        assert_eq!(members, ["A", "B"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let err = parse("scm s { var A = A + 1 }").unwrap_err();
        assert!(matches!(err, DslError::Cycle { .. }));
    }

    #[test]
    fn forward_references_are_allowed() {
        parse("scm s { var B = A exo U ~ bernoulli(1/2) var A = not U }").unwrap();
    }

    #[test]
    fn undeclared_identifier_has_position() {
        let err = parse("scm s {\n  exo U ~ bernoulli(0.5)\n  var A = U and Z\n}").unwrap_err();
        match err {
            DslError::Undeclared { pos, name, .. } => {
                assert_eq!(name, "Z");
                assert_eq!(pos, Pos { line: 3, col: 17 });
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn probability_errors() {
        assert!(matches!(
            parse("scm s { exo U ~ bernoulli(1.5) }").unwrap_err(),
            DslError::ProbabilityRange { .. }
        ));
        assert!(matches!(
            parse("scm s { exo U ~ categorical(0.5, 0.4) }").unwrap_err(),
            DslError::ProbabilityRange { .. }
        ));
        assert!(matches!(
            parse("scm s { exo U ~ bernoulli(3/2) }").unwrap_err(),
            DslError::ProbabilityRange { .. }
        ));
        parse("scm s { exo U ~ categorical(1/3, 1/3, 1/3) }").unwrap();
    }

    #[test]
    fn duplicates() {
        assert!(matches!(
            parse("scm s { exo U ~ bernoulli(0.5) var U = 1 }").unwrap_err(),
            DslError::Duplicate { .. }
        ));
        assert!(matches!(
            parse("scm s { } scm s { }").unwrap_err(),
            DslError::Duplicate { .. }
        ));
    }

    #[test]
    fn syntax_error_lists_expectations() {
        let err = parse("scm s { exo U bernoulli(0.5) }").unwrap_err();
        match err {
            DslError::Syntax { pos, expected, .. } => {
                assert_eq!(pos, Pos { line: 1, col: 15 });
                assert_eq!(expected, vec!["`~`".to_string()]);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn label_rules() {
        // Hybrid classifier.
        let err = parse(
            "scm s { exo U ~ bernoulli(0.5) var A = U mixture X = tuple(A) label Y uses {X, A} = A }",
        )
        .unwrap_err();
        assert!(matches!(err, DslError::Invalid { .. }), "{err}");
        // Reads a feature outside T.
        let err = parse(
            "scm s { exo U ~ bernoulli(0.5) var A = U var B = A label Y uses {A} = B }",
        )
        .unwrap_err();
        assert!(matches!(err, DslError::Invalid { .. }), "{err}");
        // Mixture classifier may read exogenous components of the mixture.
        parse("scm s { exo U ~ bernoulli(0.5) var A = U mixture X = tuple(A, U) label Y uses {X} = U }")
            .unwrap();
        parse("scm s { exo U ~ bernoulli(0.5) var A = U var T = A label Y uses {A} = bayes(T) }").unwrap();
    }

    #[test]
    fn query_resolution() {
        let src = format!(
            "{M_BP}\nquery q on m_bp = P(Yhat = 1 | do(S = 0) ; given F = 0, S = 1, C = 1)"
        );
        let f = parse(&src).unwrap();
        let q = f.query_block("q").unwrap();
        assert_eq!(q.outcome, ("Yhat".to_string(), 1));
        assert_eq!(q.intervention, vec![("S".to_string(), 0)]);
        assert_eq!(q.evidence.len(), 3);

        let bad = format!("{M_BP}\nquery q on nope = P(Yhat = 1 | do(S = 0))");
        assert!(matches!(parse(&bad).unwrap_err(), DslError::Undeclared { .. }));
        let bad = format!("{M_BP}\nquery q on m_bp = P(Yhat = 1 | do(U_S = 0))");
        assert!(matches!(parse(&bad).unwrap_err(), DslError::Invalid { .. }));
        let bad = format!("{M_BP}\nquery q on m_bp = P(Yhat = 1 | do(Q = 0))");
        assert!(matches!(parse(&bad).unwrap_err(), DslError::Undeclared { .. }));
        let bad = format!("{M_BP}\nquery q on m_bp = P(Yhat = 1 | do())");
        assert!(matches!(parse(&bad).unwrap_err(), DslError::Invalid { .. }));
    }

    #[test]
    fn comments_and_unicode_operators() {
        let f = parse("# header\nscm s { exo U ~ bernoulli(0.5) # trailing\n var A = ¬U ∧ U ⊕ U ∨ U }").unwrap();
        let Stmt::Var { expr, .. } = &f.scm_block("s").unwrap().stmts[1] else { panic!() };
        let u = || Expr::var("U");
        let expected = Expr::or(Expr::xor(Expr::and(Expr::not(u()), u()), u()), u());
        assert_eq!(*expr, expected);
    }
}
