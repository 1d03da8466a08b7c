//! Text format for models and queries.
//!
//! ```text
//! scm m_cp {
//!     exo U_F ~ bernoulli(0.4)
//!     exo U_S ~ bernoulli(0.6)
//!     var F = U_F xor U_S
//!     var S = U_S
//!     mixture X = tuple(F, S)
//!     label Yhat uses {F, S} = indicator(S + F > 0)
//! }
//! query q on m_cp = P(Yhat = 1 | do(S = 0) ; given F = 0, S = 1)
//! ```

mod ast;
mod error;
mod lexer;
mod parser;
mod render;

pub use ast::*;
pub use error::{DslError, Pos};
pub use parser::{parse, RESERVED};
pub use render::{render, render_dist, render_expr, render_prob};
