//! Parse a model from text, print its canonical rendering, and show that
//! the rendering parses back to the same file.

use ascm::dsl;
use ascm::Scm;

const SOURCE: &str = "
scm coin {
    exo U_A ~ bernoulli(1/18)
    exo U_B ~ categorical(1/3, 1/3, 1/3)
    var A = U_A
    var B = indicator(U_B + A > 1)
    mixture X = tuple(A, B)
    label Yhat uses {A, B} = A or B
}
query q on coin = P(Yhat = 1 | do(A = 0) ; given B = 1)
";

fn main() -> ascm::Result<()> {
    let file = dsl::parse(SOURCE)?;
    let text = dsl::render(&file);
    println!("{text}");
    assert_eq!(dsl::parse(&text)?, file);

    let m = Scm::from_block(file.scm_block("coin").expect("declared"))?;
    println!("{} exogenous states", m.exo_state_count());

    if let Err(e) = dsl::parse("scm bad { var A = B }") {
        println!("rejected: {e}");
    }
    Ok(())
}
