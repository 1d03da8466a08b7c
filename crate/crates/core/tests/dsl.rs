use ascm::corpus;
use ascm::dsl::{self, BinOp, Block, DistSpec, Expr, LabelBody, LabelDecl, ScmBlock, SourceFile, Stmt};
use ascm::prob::{self, ratio};
use proptest::prelude::*;

const OPS: [BinOp; 9] =
    [BinOp::Or, BinOp::Xor, BinOp::And, BinOp::Lt, BinOp::Gt, BinOp::Eq, BinOp::Add, BinOp::Sub, BinOp::Mul];

fn expr_over(names: Vec<String>) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..4).prop_map(Expr::Int),
        any::<bool>().prop_map(Expr::Bool),
        proptest::sample::select(names).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::not),
            inner.clone().prop_map(Expr::indicator),
            (0..OPS.len(), inner.clone(), inner).prop_map(|(i, a, b)| Expr::binary(OPS[i], a, b)),
        ]
    })
}

fn probability() -> impl Strategy<Value = ascm::Prob> {
    (1i64..40).prop_flat_map(|d| (0..=d).prop_map(move |n| ratio(n, d)))
}

/// A block with exogenous `U0..`, and features `V0..` each reading only
/// earlier names, plus a mixture and an expression label.
fn scm_block() -> impl Strategy<Value = ScmBlock> {
    (1usize..4, 1usize..4).prop_flat_map(|(n_exo, n_var)| {
        let exo = proptest::collection::vec(probability(), n_exo);
        let exprs: Vec<_> = (0..n_var)
            .map(|i| {
                let mut names: Vec<String> = (0..n_exo).map(|k| format!("U{k}")).collect();
                names.extend((0..i).map(|k| format!("V{k}")));
                expr_over(names)
            })
            .collect();
        let features: Vec<String> = (0..n_var).map(|k| format!("V{k}")).collect();
        let label = expr_over(features.clone());
        (exo, exprs, label).prop_map(move |(ps, es, label)| {
            let mut stmts = Vec::new();
            for (k, p) in ps.into_iter().enumerate() {
                stmts.push(Stmt::Exo { name: format!("U{k}"), dist: DistSpec::Bernoulli(p) });
            }
            for (k, e) in es.into_iter().enumerate() {
                stmts.push(Stmt::Var { name: format!("V{k}"), expr: e });
            }
            stmts.push(Stmt::Mixture { name: "X".into(), components: features.clone() });
            let uses: Vec<String> = label.references().into_iter().collect();
            stmts.push(Stmt::Label(LabelDecl { name: "Yhat".into(), uses, body: LabelBody::Expr(label) }));
            ScmBlock { name: "m".into(), stmts }
        })
    })
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(block in scm_block()) {
        let f = SourceFile { blocks: vec![Block::Scm(block)] };
        let text = dsl::render(&f);
        let again = dsl::parse(&text);
        prop_assert_eq!(again.as_ref().ok(), Some(&f), "{}", text);
    }

    #[test]
    fn fractions_survive_exactly(n in 0i64..=1000, d in 1i64..=1000) {
        prop_assume!(n <= d);
        let text = format!("scm m {{ exo U ~ bernoulli({n}/{d}) var A = U }}");
        let f = dsl::parse(&text).unwrap();
        let again = dsl::parse(&dsl::render(&f)).unwrap();
        let Some(Stmt::Exo { dist: DistSpec::Bernoulli(p), .. }) = again.scm_block("m").and_then(|b| b.stmts.first()) else {
            panic!("exo lost")
        };
        prop_assert_eq!(p, &ratio(n, d));
    }
}

#[test]
fn one_eighteenth_keeps_numerator_and_denominator() {
    let f = dsl::parse("scm m { exo U ~ bernoulli(1/18) var A = U }").unwrap();
    let f = dsl::parse(&dsl::render(&dsl::parse(&dsl::render(&f)).unwrap())).unwrap();
    let Stmt::Exo { dist: DistSpec::Bernoulli(p), .. } = &f.scm_block("m").unwrap().stmts[0] else { panic!() };
    assert_eq!((p.numer().to_string(), p.denom().to_string()), ("1".into(), "18".into()));
}

#[test]
fn categorical_thirds_round_trip() {
    let f = dsl::parse("scm m { exo U ~ categorical(1/3, 1/3, 1/3) var A = U }").unwrap();
    assert_eq!(dsl::parse(&dsl::render(&f)).unwrap(), f);
    let Stmt::Exo { dist, .. } = &f.scm_block("m").unwrap().stmts[0] else { panic!() };
    assert_eq!(dist, &DistSpec::Categorical(vec![ratio(1, 3); 3]));
    assert_eq!(dist.prob(0) + dist.prob(1) + dist.prob(2), prob::one());
}

fn declared(line: &str) -> Option<String> {
    let mut words = line.split_whitespace();
    match words.next()? {
        "exo" | "var" | "mixture" | "label" => words.next().map(String::from),
        _ => None,
    }
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn mentions(text: &str, name: &str) -> bool {
    text.match_indices(name).any(|(i, _)| {
        let before = text[..i].chars().next_back().map_or(true, |c| !is_word(c));
        let after = text[i + name.len()..].chars().next().map_or(true, |c| !is_word(c));
        before && after
    })
}

/// Deletes each declaration line in turn. Whenever the deleted name is
/// still referenced inside its block, the file must be rejected.
#[test]
fn deleting_a_referenced_declaration_is_rejected() {
    let mut rejected = 0;
    for (file, text) in corpus::BUNDLED {
        let lines: Vec<&str> = text.lines().collect();
        for (i, line) in lines.iter().enumerate() {
            let Some(name) = declared(line) else { continue };
            let start = lines[..i].iter().rposition(|l| l.trim_start().starts_with("scm ")).unwrap();
            let end = i + lines[i..].iter().position(|l| l.trim() == "}").unwrap();
            let rest: Vec<&str> = lines.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, l)| *l).collect();
            let block: String = lines[start..=end]
                .iter()
                .enumerate()
                .filter(|&(k, _)| start + k != i)
                .map(|(_, l)| l.split('#').next().unwrap_or(""))
                .collect::<Vec<_>>()
                .join("\n");
            let mutated = rest.join("\n");
            if mentions(&block, &name) {
                assert!(dsl::parse(&mutated).is_err(), "{file}: deleting `{name}` was accepted");
                rejected += 1;
            }
        }
    }
    assert!(rejected > 20, "only {rejected} deletions exercised");
}

#[test]
fn two_cycle_is_rejected() {
    let err = dsl::parse("scm m { exo U ~ bernoulli(0.5) var A = B var B = A }").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains('A') && msg.contains('B'), "{msg}");
}

#[test]
fn syntax_errors_carry_a_position() {
    let err = dsl::parse("scm m {\n  exo U ~ bernoulli(0.5\n}").unwrap_err();
    assert_eq!(err.pos().line, 3);
}
