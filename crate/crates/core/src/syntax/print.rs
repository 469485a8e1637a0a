//! Canonical printer. Output parses back to the identical interned value.

use crate::expr::Expr;
use crate::functions::{Fun, FunNode};
use crate::term::{Majorant, Node, Stream, Term};
use std::fmt::Write;

pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    term_into(&mut out, t, 0);
    out
}

fn level(t: &Term) -> u8 {
    match t.node() {
        Node::Or(_) => 0,
        Node::And(_) => 2,
        _ => 3,
    }
}

fn term_into(out: &mut String, t: &Term, min: u8) {
    if level(t) < min {
        out.push('(');
        term_into(out, t, 0);
        out.push(')');
        return;
    }
    match t.node() {
        Node::Zero => out.push('0'),
        Node::One => out.push('1'),
        Node::Gen(g) => {
            let name = if g.closed { "cylc" } else { "cyl" };
            let _ = write!(out, "{name}({}, {}, {})", g.coord, g.lo, g.hi);
        }
        Node::Not(x) => {
            out.push('!');
            term_into(out, x, 3);
        }
        Node::And(xs) | Node::Or(xs) => {
            let (sep, kid) = if matches!(t.node(), Node::And(_)) {
                (" & ", 3)
            } else {
                (" | ", 1)
            };
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                term_into(out, x, kid);
            }
        }
        Node::Join(s) => stream_into(out, "Vee", s),
        Node::Meet(s) => stream_into(out, "Wedge", s),
        Node::Cond(p, a, b) => {
            let _ = write!(out, "if({p}, ");
            term_into(out, a, 0);
            out.push_str(", ");
            term_into(out, b, 0);
            out.push(')');
        }
    }
}

fn stream_into(out: &mut String, head: &str, s: &Stream) {
    let _ = write!(out, "{head}({} in {}.., ", s.var, s.start);
    term_into(out, &s.body, 0);
    if let Some(m) = &s.tail {
        let _ = write!(out, ", tail {}", print_majorant(m));
    }
    if s.monotone {
        out.push_str(", mono");
    }
    out.push(')');
}

pub fn print_majorant(m: &Majorant) -> String {
    match *m {
        Majorant::Geom { c, r } => format!("geom({c:?}, {r:?})"),
        Majorant::Pow { c, p } => format!("pow({c:?}, {p:?})"),
        Majorant::GaussTail { alpha, beta } => format!("gauss({alpha:?}, {beta:?})"),
    }
}

pub fn print_expr(e: &Expr) -> String {
    e.to_string()
}

pub fn print_fun(f: &Fun) -> String {
    let mut out = String::new();
    fun_into(&mut out, f, false);
    out
}

fn fun_into(out: &mut String, f: &Fun, operand: bool) {
    let pair = |out: &mut String, name: &str, a: &Fun, b: &Fun| {
        let _ = write!(out, "{name}(");
        fun_into(out, a, false);
        out.push_str(", ");
        fun_into(out, b, false);
        out.push(')');
    };
    match f.node() {
        FunNode::Simple(s) => {
            out.push_str("simple(");
            for (i, (a, x)) in s.parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push('(');
                term_into(out, a, 0);
                let _ = write!(out, ", {x})");
            }
            out.push(')');
        }
        FunNode::Indicator(a) => {
            out.push_str("ind(");
            term_into(out, a, 0);
            out.push(')');
        }
        FunNode::Const(c) => {
            let _ = write!(out, "const({c})");
        }
        FunNode::Coord { coord, neg } => {
            let name = if *neg { "negcoord" } else { "coord" };
            let _ = write!(out, "{name}({coord})");
        }
        FunNode::Sum(a, b) => {
            if operand {
                out.push('(');
            }
            fun_into(out, a, false);
            out.push_str(" + ");
            fun_into(out, b, true);
            if operand {
                out.push(')');
            }
        }
        FunNode::Hypot(a, b) => pair(out, "hypot", a, b),
        FunNode::Min(a, b) => pair(out, "min", a, b),
        FunNode::Max(a, b) => pair(out, "max", a, b),
        FunNode::Monus(a, b) => pair(out, "monus", a, b),
        FunNode::Scale(c, a) => {
            let _ = write!(out, "scale({c}, ");
            fun_into(out, a, false);
            out.push(')');
        }
        FunNode::Approx(a, n) => {
            out.push_str("approx(");
            fun_into(out, a, false);
            let _ = write!(out, ", {n})");
        }
        FunNode::Sup(s) | FunNode::Inf(s) => {
            let head = if matches!(f.node(), FunNode::Sup(_)) { "sup" } else { "inf" };
            let _ = write!(out, "{head}({} in {}.., ", s.var, s.start);
            fun_into(out, &s.body, false);
            out.push(')');
        }
        FunNode::Cond(p, a, b) => {
            let _ = write!(out, "if({p}, ");
            fun_into(out, a, false);
            out.push_str(", ");
            fun_into(out, b, false);
            out.push(')');
        }
    }
}
