use std::collections::BTreeSet;
use std::fmt;

use crate::prob::Prob;

/// A parsed and validated `.scm` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Scm(ScmBlock),
    Query(QueryBlock),
}

impl Block {
    pub fn name(&self) -> &str {
        match self {
            Block::Scm(b) => &b.name,
            Block::Query(q) => &q.name,
        }
    }
}

impl SourceFile {
    pub fn scm_blocks(&self) -> impl Iterator<Item = &ScmBlock> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Scm(s) => Some(s),
            Block::Query(_) => None,
        })
    }

    pub fn query_blocks(&self) -> impl Iterator<Item = &QueryBlock> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Query(q) => Some(q),
            Block::Scm(_) => None,
        })
    }

    pub fn scm_block(&self, name: &str) -> Option<&ScmBlock> {
        self.scm_blocks().find(|b| b.name == name)
    }

    pub fn query_block(&self, name: &str) -> Option<&QueryBlock> {
        self.query_blocks().find(|q| q.name == name)
    }
}

/// `scm NAME { ... }`. Statements keep their declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScmBlock {
    pub name: String,
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Exo { name: String, dist: DistSpec },
    Var { name: String, expr: Expr },
    Mixture { name: String, components: Vec<String> },
    Label(LabelDecl),
}

impl Stmt {
    pub fn name(&self) -> &str {
        match self {
            Stmt::Exo { name, .. } | Stmt::Var { name, .. } | Stmt::Mixture { name, .. } => name,
            Stmt::Label(l) => &l.name,
        }
    }
}

/// `label NAME uses {T} = EXPR` or `label NAME uses {T} = bayes(TARGET)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelDecl {
    pub name: String,
    pub uses: Vec<String>,
    pub body: LabelBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelBody {
    Expr(Expr),
    /// Bayes-optimal classifier for the named endogenous target.
    Bayes(String),
}

/// Exogenous marginal. Probabilities are exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistSpec {
    /// Domain {0, 1}; the parameter is `P(U = 1)`.
    Bernoulli(Prob),
    /// Domain {0, .., k-1}.
    Categorical(Vec<Prob>),
}

impl DistSpec {
    pub fn domain_size(&self) -> usize {
        match self {
            DistSpec::Bernoulli(_) => 2,
            DistSpec::Categorical(ps) => ps.len(),
        }
    }

    /// `P(U = value)`; zero outside the domain.
    pub fn prob(&self, value: i64) -> Prob {
        match self {
            DistSpec::Bernoulli(p) => match value {
                1 => p.clone(),
                0 => crate::prob::one() - p,
                _ => crate::prob::zero(),
            },
            DistSpec::Categorical(ps) => usize::try_from(value)
                .ok()
                .and_then(|i| ps.get(i).cloned())
                .unwrap_or_else(crate::prob::zero),
        }
    }
}

/// `query NAME on SCM = P(LABEL = VALUE | do(...) ; given ...)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryBlock {
    pub name: String,
    pub scm: String,
    pub outcome: (String, i64),
    pub intervention: Vec<(String, i64)>,
    pub evidence: Vec<(String, i64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    Xor,
    And,
    Lt,
    Gt,
    Eq,
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::Xor => 2,
            BinOp::And => 3,
            BinOp::Lt | BinOp::Gt | BinOp::Eq => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::Xor => "xor",
            BinOp::And => "and",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Eq => "=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    /// Integer semantics; logical operators treat nonzero as true and return 0/1.
    pub fn apply(self, a: i64, b: i64) -> i64 {
        match self {
            BinOp::Or => ((a != 0) || (b != 0)) as i64,
            BinOp::Xor => ((a != 0) != (b != 0)) as i64,
            BinOp::And => ((a != 0) && (b != 0)) as i64,
            BinOp::Lt => (a < b) as i64,
            BinOp::Gt => (a > b) as i64,
            BinOp::Eq => (a == b) as i64,
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::Mul => a.wrapping_mul(b),
        }
    }
}

/// Structural-equation expression over integer-valued variables.
///
/// Booleans are the integers 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Not(Box<Expr>),
    Indicator(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn indicator(e: Expr) -> Expr {
        Expr::Indicator(Box::new(e))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::And, a, b)
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Or, a, b)
    }

    pub fn xor(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Xor, a, b)
    }

    /// Variable names referenced anywhere in the expression.
    pub fn references(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Not(e) | Expr::Indicator(e) => e.collect_refs(out),
            Expr::Binary(_, a, b) => {
                a.collect_refs(out);
                b.collect_refs(out);
            }
        }
    }

    /// Evaluates with a name lookup. Unknown names evaluate to 0.
    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<i64>) -> i64 {
        match self {
            Expr::Int(v) => *v,
            Expr::Bool(b) => *b as i64,
            Expr::Var(n) => lookup(n).unwrap_or(0),
            Expr::Not(e) => (e.eval_with(lookup) == 0) as i64,
            Expr::Indicator(e) => (e.eval_with(lookup) != 0) as i64,
            Expr::Binary(op, a, b) => op.apply(a.eval_with(lookup), b.eval_with(lookup)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::render_expr(self))
    }
}
