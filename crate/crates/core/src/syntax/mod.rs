//! Text forms of sets, expressions and functions.

mod parse;
mod print;

pub use parse::{
    parse_expr, parse_expr_in, parse_fun, parse_fun_in, parse_pred_in, parse_term, parse_term_in, Pos, SyntaxError,
};
pub use print::{print_expr, print_fun, print_majorant, print_term};
