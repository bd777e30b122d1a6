//! Partial differentiation, substitution and the size-guarded entry points.

use super::{canon, Expr, Node, Var};
use crate::error::{Error, Result};
use crate::rat::Rat;
use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::One;

/// Node-count guard applied by the fallible operations.
pub const DEFAULT_NODE_LIMIT: usize = 2_000_000;

/// Simultaneous variable bindings for substitution.
pub type Bindings = BTreeMap<Var, Expr>;

type PtrMemo = BTreeMap<usize, Expr>;

fn ptr_key(e: &Expr) -> usize {
    Arc::as_ptr(&e.0) as usize
}

impl Expr {
    /// Exact partial derivative. Total: canonical inputs cannot trigger
    /// re-expansion, so no size guard is needed.
    pub fn diff(&self, v: Var) -> Expr {
        let mut memo = PtrMemo::new();
        self.diff_memo(v, &mut memo)
    }

    fn diff_memo(&self, v: Var, memo: &mut PtrMemo) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        let key = ptr_key(self);
        if let Some(hit) = memo.get(&key) {
            return hit.clone();
        }
        let out = match self.node() {
            Node::Num(_) => Expr::zero(),
            Node::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(ts) => Expr::add(ts.iter().map(|t| t.diff_memo(v, memo)).collect()),
            Node::Mul(fs) => {
                // Product rule assembled factor-by-factor: the cofactor
                // list stays sorted, so each piece is a cheap monomial
                // product with the factor derivative distributed over it.
                let mut pieces = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    if !f.depends_on(v) {
                        continue;
                    }
                    let rest: Vec<Expr> = fs
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, g)| g.clone())
                        .collect();
                    let cofactor = match rest.len() {
                        0 => Expr::one(),
                        1 => rest.into_iter().next().unwrap(),
                        _ => Expr::new_raw(Node::Mul(rest)),
                    };
                    let df = f.diff_memo(v, memo);
                    pieces.push(canon::distribute(&cofactor, &df));
                }
                Expr::add(pieces)
            }
            Node::Pow(b, e) => {
                let down = Expr::mul(vec![
                    Expr::num(e.clone()),
                    Expr::pow(b.clone(), e - Rat::one()),
                ]);
                canon::distribute(&down, &b.diff_memo(v, memo))
            }
        };
        memo.insert(key, out.clone());
        out
    }

    /// Repeated partial derivative.
    pub fn diff_n(&self, v: Var, n: u32) -> Expr {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.diff(v);
        }
        e
    }

    /// Simultaneous substitution followed by canonicalization, guarded by
    /// the default node limit.
    pub fn substitute(&self, bindings: &Bindings) -> Result<Expr> {
        self.substitute_with_limit(bindings, DEFAULT_NODE_LIMIT)
    }

    pub fn substitute_with_limit(&self, bindings: &Bindings, limit: usize) -> Result<Expr> {
        let mask: u8 = bindings.keys().fold(0, |m, v| m | v.bit());
        let mut memo = PtrMemo::new();
        self.subst_memo(bindings, mask, limit, &mut memo)
    }

    fn subst_memo(
        &self,
        bindings: &Bindings,
        mask: u8,
        limit: usize,
        memo: &mut PtrMemo,
    ) -> Result<Expr> {
        if self.var_mask() & mask == 0 {
            return Ok(self.clone());
        }
        let key = ptr_key(self);
        if let Some(hit) = memo.get(&key) {
            return Ok(hit.clone());
        }
        let out = match self.node() {
            Node::Num(_) => self.clone(),
            Node::Var(v) => match bindings.get(v) {
                Some(r) => r.clone(),
                None => self.clone(),
            },
            Node::Add(ts) => {
                let mut parts = Vec::with_capacity(ts.len());
                for t in ts {
                    parts.push(t.subst_memo(bindings, mask, limit, memo)?);
                }
                Expr::add(parts)
            }
            Node::Mul(fs) => {
                let mut parts = Vec::with_capacity(fs.len());
                for f in fs {
                    parts.push(f.subst_memo(bindings, mask, limit, memo)?);
                }
                Expr::mul(parts)
            }
            Node::Pow(b, e) => {
                let nb = b.subst_memo(bindings, mask, limit, memo)?;
                Expr::pow(nb, e.clone())
            }
        };
        ensure_size(&out, limit)?;
        memo.insert(key, out.clone());
        Ok(out)
    }

    /// Returns the canonical form. Expressions are canonical by
    /// construction, so this only enforces the size guard; it is idempotent
    /// and value-preserving by definition.
    pub fn simplify(&self) -> Result<Expr> {
        self.simplify_with_limit(DEFAULT_NODE_LIMIT)
    }

    pub fn simplify_with_limit(&self, limit: usize) -> Result<Expr> {
        ensure_size(self, limit)?;
        Ok(self.clone())
    }
}

pub(crate) fn ensure_size(e: &Expr, limit: usize) -> Result<()> {
    // The tree count bounds the DAG count from above, so the walk only
    // runs when sharing might still keep the expression under the limit.
    if e.tree_count() <= limit {
        return Ok(());
    }
    let nodes = e.node_count();
    if nodes > limit {
        Err(Error::ExpressionTooLarge { nodes, limit })
    } else {
        Ok(())
    }
}
