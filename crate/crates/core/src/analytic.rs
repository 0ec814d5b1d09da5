//! Conditional-free analytic expressions, guards, and analytic sets.
//!
//! Expressions are immutable DAGs behind `Arc`, so substitution and
//! differentiation share subterms instead of copying them. Smart constructors
//! fold operations whose operands are all constants; no other rewriting is
//! done, which keeps evaluation bit-for-bit identical to running the same
//! operations on `f64` directly.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Sin,
    Cos,
    Log,
    Sqrt,
}

impl UnaryOp {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Neg => -x,
            UnaryOp::Exp => x.exp(),
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Log => x.ln(),
            UnaryOp::Sqrt => x.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Exp => "exp",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mult",
            BinaryOp::Div => "div",
        }
    }
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    /// Zero-based variable index.
    Var(usize),
    Unary(UnaryOp, AnalyticExpr),
    Binary(BinaryOp, AnalyticExpr, AnalyticExpr),
}

/// Shared handle to an analytic expression node.
#[derive(Clone, Debug)]
pub struct AnalyticExpr(Arc<Node>);

type Memo = HashMap<*const Node, AnalyticExpr>;

impl AnalyticExpr {
    pub fn constant(c: f64) -> Self {
        AnalyticExpr(Arc::new(Node::Const(c)))
    }

    pub fn var(index: usize) -> Self {
        AnalyticExpr(Arc::new(Node::Var(index)))
    }

    pub fn unary(op: UnaryOp, arg: AnalyticExpr) -> Self {
        if let Some(c) = arg.as_const() {
            return AnalyticExpr::constant(op.apply(c));
        }
        AnalyticExpr(Arc::new(Node::Unary(op, arg)))
    }

    pub fn binary(op: BinaryOp, lhs: AnalyticExpr, rhs: AnalyticExpr) -> Self {
        if let (Some(a), Some(b)) = (lhs.as_const(), rhs.as_const()) {
            return AnalyticExpr::constant(op.apply(a, b));
        }
        AnalyticExpr(Arc::new(Node::Binary(op, lhs, rhs)))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    fn key(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    /// Same node (pointer identity).
    pub fn ptr_eq(&self, other: &AnalyticExpr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.node() {
            Node::Const(c) => *c,
            Node::Var(i) => x[*i],
            Node::Unary(op, a) => op.apply(a.eval(x)),
            Node::Binary(op, a, b) => op.apply(a.eval(x), b.eval(x)),
        }
    }

    /// Largest variable index plus one; zero for closed expressions.
    pub fn var_bound(&self) -> usize {
        fn walk(e: &AnalyticExpr, seen: &mut HashMap<*const Node, usize>) -> usize {
            if let Some(&b) = seen.get(&e.key()) {
                return b;
            }
            let b = match e.node() {
                Node::Const(_) => 0,
                Node::Var(i) => i + 1,
                Node::Unary(_, a) => walk(a, seen),
                Node::Binary(_, a, b) => walk(a, seen).max(walk(b, seen)),
            };
            seen.insert(e.key(), b);
            b
        }
        walk(self, &mut HashMap::new())
    }

    /// Replace variable `i` by `args[i]`.
    pub fn substitute(&self, args: &[AnalyticExpr]) -> AnalyticExpr {
        self.substitute_memo(args, &mut Memo::new())
    }

    fn substitute_memo(&self, args: &[AnalyticExpr], memo: &mut Memo) -> AnalyticExpr {
        if let Some(done) = memo.get(&self.key()) {
            return done.clone();
        }
        let out = match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => args[*i].clone(),
            Node::Unary(op, a) => AnalyticExpr::unary(*op, a.substitute_memo(args, memo)),
            Node::Binary(op, a, b) => {
                let a = a.substitute_memo(args, memo);
                let b = b.substitute_memo(args, memo);
                AnalyticExpr::binary(*op, a, b)
            }
        };
        memo.insert(self.key(), out.clone());
        out
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> AnalyticExpr {
        self.derivative_memo(var, &mut Memo::new())
    }

    pub(crate) fn derivative_memo(&self, var: usize, memo: &mut Memo) -> AnalyticExpr {
        use AnalyticExpr as E;
        if let Some(done) = memo.get(&self.key()) {
            return done.clone();
        }
        let out = match self.node() {
            Node::Const(_) => E::constant(0.0),
            Node::Var(i) => E::constant(if *i == var { 1.0 } else { 0.0 }),
            Node::Unary(op, a) => {
                let da = a.derivative_memo(var, memo);
                match op {
                    UnaryOp::Neg => E::unary(UnaryOp::Neg, da),
                    UnaryOp::Exp => E::binary(BinaryOp::Mul, self.clone(), da),
                    UnaryOp::Sin => E::binary(BinaryOp::Mul, E::unary(UnaryOp::Cos, a.clone()), da),
                    UnaryOp::Cos => {
                        let s = E::unary(UnaryOp::Neg, E::unary(UnaryOp::Sin, a.clone()));
                        E::binary(BinaryOp::Mul, s, da)
                    }
                    UnaryOp::Log => E::binary(BinaryOp::Div, da, a.clone()),
                    UnaryOp::Sqrt => {
                        let twice = E::binary(BinaryOp::Mul, E::constant(2.0), self.clone());
                        E::binary(BinaryOp::Div, da, twice)
                    }
                }
            }
            Node::Binary(op, a, b) => {
                let da = a.derivative_memo(var, memo);
                let db = b.derivative_memo(var, memo);
                match op {
                    BinaryOp::Add => E::binary(BinaryOp::Add, da, db),
                    BinaryOp::Sub => E::binary(BinaryOp::Sub, da, db),
                    BinaryOp::Mul => E::binary(
                        BinaryOp::Add,
                        E::binary(BinaryOp::Mul, da, b.clone()),
                        E::binary(BinaryOp::Mul, a.clone(), db),
                    ),
                    // da/b - (a·db)/(b·b)
                    BinaryOp::Div => E::binary(
                        BinaryOp::Sub,
                        E::binary(BinaryOp::Div, da, b.clone()),
                        E::binary(
                            BinaryOp::Div,
                            E::binary(BinaryOp::Mul, a.clone(), db),
                            E::binary(BinaryOp::Mul, b.clone(), b.clone()),
                        ),
                    ),
                }
            }
        };
        memo.insert(self.key(), out.clone());
        out
    }

    /// Number of distinct nodes reachable from this root.
    pub fn dag_size(&self) -> usize {
        fn walk(e: &AnalyticExpr, seen: &mut std::collections::HashSet<*const Node>) {
            if !seen.insert(e.key()) {
                return;
            }
            match e.node() {
                Node::Const(_) | Node::Var(_) => {}
                Node::Unary(_, a) => walk(a, seen),
                Node::Binary(_, a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }
}

/// Structural equality (not pointer equality). Constants compare by bits.
impl PartialEq for AnalyticExpr {
    fn eq(&self, other: &Self) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a.to_bits() == b.to_bits(),
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Unary(o1, a1), Node::Unary(o2, a2)) => o1 == o2 && a1 == a2,
            (Node::Binary(o1, a1, b1), Node::Binary(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            _ => false,
        }
    }
}

impl fmt::Display for AnalyticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{}", crate::expr::format_number(*c)),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Node::Binary(op, a, b) => write!(f, "{}({a}, {b})", op.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// `g(x) > 0`
    Positive,
    /// `g(x) <= 0`
    NonPositive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Guard {
    pub expr: AnalyticExpr,
    pub sense: Sense,
}

impl Guard {
    pub fn positive(expr: AnalyticExpr) -> Self {
        Guard {
            expr,
            sense: Sense::Positive,
        }
    }

    pub fn nonpositive(expr: AnalyticExpr) -> Self {
        Guard {
            expr,
            sense: Sense::NonPositive,
        }
    }

    /// NaN (guard queried outside its expression's domain) satisfies neither sense.
    pub fn holds_at(&self, value: f64) -> bool {
        match self.sense {
            Sense::Positive => value > 0.0,
            Sense::NonPositive => value <= 0.0,
        }
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        self.holds_at(self.expr.eval(x))
    }

    pub fn substitute(&self, args: &[AnalyticExpr]) -> Guard {
        Guard {
            expr: self.expr.substitute(args),
            sense: self.sense,
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sense {
            Sense::Positive => write!(f, "{} > 0", self.expr),
            Sense::NonPositive => write!(f, "{} <= 0", self.expr),
        }
    }
}

/// Conjunction of guards. The empty conjunction is the whole space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnalyticSet {
    pub guards: Vec<Guard>,
}

impl AnalyticSet {
    pub fn whole() -> Self {
        AnalyticSet { guards: Vec::new() }
    }

    pub fn new(guards: Vec<Guard>) -> Self {
        AnalyticSet { guards }
    }

    /// Guards are checked in order and the check stops at the first failure,
    /// so later guards are only evaluated where earlier ones hold.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.guards.iter().all(|g| g.holds(x))
    }

    pub fn intersect(&self, other: &AnalyticSet) -> AnalyticSet {
        let mut guards = self.guards.clone();
        guards.extend(other.guards.iter().cloned());
        AnalyticSet { guards }
    }

    pub fn substitute(&self, args: &[AnalyticExpr]) -> AnalyticSet {
        AnalyticSet {
            guards: self.guards.iter().map(|g| g.substitute(args)).collect(),
        }
    }

    pub fn var_bound(&self) -> usize {
        self.guards.iter().map(|g| g.expr.var_bound()).max().unwrap_or(0)
    }
}

impl fmt::Display for AnalyticSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.guards.is_empty() {
            return write!(f, "true");
        }
        for (i, g) in self.guards.iter().enumerate() {
            if i > 0 {
                write!(f, " && ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> AnalyticExpr {
        AnalyticExpr::var(i)
    }

    #[test]
    fn constant_folding_only_on_constants() {
        let c = AnalyticExpr::binary(BinaryOp::Add, AnalyticExpr::constant(1.0), AnalyticExpr::constant(2.0));
        assert_eq!(c.as_const(), Some(3.0));
        let m = AnalyticExpr::binary(BinaryOp::Mul, AnalyticExpr::constant(0.0), x(0));
        assert!(m.as_const().is_none());
    }

    #[test]
    fn derivative_of_square() {
        let sq = AnalyticExpr::binary(BinaryOp::Mul, x(0), x(0));
        assert_eq!(sq.derivative(0).eval(&[3.0]), 6.0);
    }

    #[test]
    fn derivative_of_quotient() {
        let q = AnalyticExpr::binary(BinaryOp::Div, x(0), x(1));
        let (a, b) = (3.0, 2.0);
        assert_eq!(q.derivative(0).eval(&[a, b]), 1.0 / b);
        assert_eq!(q.derivative(1).eval(&[a, b]), -(a / (b * b)));
    }

    #[test]
    fn derivative_shares_subterms() {
        let mut e = x(0);
        for _ in 0..40 {
            e = AnalyticExpr::binary(BinaryOp::Mul, e.clone(), e);
        }
        // A tree walk would be 2^40 nodes.
        assert!(e.derivative(0).dag_size() < 400);
    }

    #[test]
    fn substitution_replaces_variables() {
        let g = AnalyticExpr::unary(UnaryOp::Exp, x(0));
        let f = AnalyticExpr::binary(BinaryOp::Add, x(0), x(1));
        let h = g.substitute(&[f]);
        assert_eq!(h.eval(&[1.0, 2.0]), 3.0f64.exp());
        assert_eq!(h.to_string(), "exp(add(x1, x2))");
    }

    #[test]
    fn nan_guard_is_never_satisfied() {
        let g = Guard::positive(AnalyticExpr::unary(UnaryOp::Log, x(0)));
        let h = Guard::nonpositive(AnalyticExpr::unary(UnaryOp::Log, x(0)));
        assert!(!g.holds(&[-1.0]));
        assert!(!h.holds(&[-1.0]));
    }

    #[test]
    fn set_display() {
        let s = AnalyticSet::new(vec![
            Guard::positive(x(0)),
            Guard::nonpositive(AnalyticExpr::unary(UnaryOp::Neg, x(1))),
        ]);
        assert_eq!(s.to_string(), "x1 > 0 && neg(x2) <= 0");
        assert_eq!(AnalyticSet::whole().to_string(), "true");
    }
}
