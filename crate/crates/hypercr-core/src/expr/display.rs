//! Canonical text form. `parse` of the rendered text rebuilds an equal
//! expression, which is what the round-trip property tests pin down.

use super::canon::split_coeff;
use super::{Expr, Node};
use crate::rat::{self, Rat};
use core::fmt;
use num_traits::Signed;

fn base_needs_parens(b: &Expr) -> bool {
    match b.node() {
        Node::Add(_) | Node::Mul(_) | Node::Pow(..) => true,
        Node::Num(q) => q.is_negative() || !rat::is_integer(q),
        Node::Var(_) => false,
    }
}

fn fmt_exponent(f: &mut fmt::Formatter<'_>, e: &Rat) -> fmt::Result {
    if rat::is_integer(e) && e.is_positive() {
        write!(f, "^{}", e.numer())
    } else {
        write!(f, "^({})", rat::format_rat(e))
    }
}

fn fmt_factor(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Add(_) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(q) => write!(f, "{}", rat::format_rat(q)),
            Node::Var(v) => write!(f, "{}", v.name()),
            Node::Pow(b, e) => {
                if base_needs_parens(b) {
                    write!(f, "({b})")?;
                } else {
                    write!(f, "{b}")?;
                }
                fmt_exponent(f, e)
            }
            Node::Mul(fs) => {
                for (i, factor) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    fmt_factor(f, factor)?;
                }
                Ok(())
            }
            Node::Add(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i == 0 {
                        write!(f, "{t}")?;
                        continue;
                    }
                    let (c, mono) = split_coeff(t);
                    if c.is_negative() {
                        let flipped = Expr::mul(alloc::vec![Expr::num(-c), mono]);
                        write!(f, " - {flipped}")?;
                    } else {
                        write!(f, " + {t}")?;
                    }
                }
                Ok(())
            }
        }
    }
}
