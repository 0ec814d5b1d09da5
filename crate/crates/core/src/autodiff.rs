//! Derivatives of programs.
//!
//! Three evaluators share one contract: the row `D̃⟦e⟧v` obtained by the
//! chain rule over the designated primitive derivatives, with conditionals
//! differentiated along the branch actually taken.
//!
//! * [`symbolic_jacobian`] materialises the row by structural recursion.
//! * [`jvp`] propagates [`Dual`] numbers and returns `D̃⟦e⟧v · w`.
//! * [`vjp`] records a [`Tape`] and accumulates adjoints, returning `u · D̃⟦e⟧v`.
//!
//! [`nth_derivative`] nests forward mode with [`Jet`].

use crate::error::EvalError;
use crate::expr::{eval_in, Expr, InputVector};
use crate::primitives::PrimOp;
use crate::scalar::{Dual, Jet, Scalar};

/// `1 × N` derivative row.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianRow(pub Vec<f64>);

impl JacobianRow {
    pub fn zeros(n: usize) -> Self {
        JacobianRow(vec![0.0; n])
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut row = vec![0.0; n];
        row[index] = 1.0;
        JacobianRow(row)
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.0.iter().zip(w).map(|(a, b)| a * b).sum()
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), EvalError> {
    if expected == found {
        Ok(())
    } else {
        Err(EvalError::LengthMismatch { expected, found })
    }
}

/// `D̃⟦e⟧v` by structural recursion. Returns the value alongside the row.
pub fn value_and_jacobian(e: &Expr, v: &InputVector) -> Result<(f64, JacobianRow), EvalError> {
    let n = v.len();
    let x = v.as_slice();
    match e {
        Expr::Const(c) => Ok((*c, JacobianRow::zeros(n))),
        Expr::Input(i) => {
            let value = *x.get(i - 1).ok_or(EvalError::InputOutOfRange { index: *i, arity: n })?;
            Ok((value, JacobianRow::basis(n, i - 1)))
        }
        Expr::Call(op, args) => {
            let mut values = Vec::with_capacity(args.len());
            let mut rows = Vec::with_capacity(args.len());
            for a in args {
                let (val, row) = value_and_jacobian(a, v)?;
                values.push(val);
                rows.push(row);
            }
            let value = op.eval_f64(&values)?;
            let local = op.ideriv(&values)?;
            // (1×n local row) · (n×N stacked argument rows)
            let mut row = vec![0.0; n];
            for (d, r) in local.iter().zip(&rows) {
                for (acc, entry) in row.iter_mut().zip(&r.0) {
                    *acc += d * entry;
                }
            }
            Ok((value, JacobianRow(row)))
        }
        Expr::Cond(g, t, f) => {
            let guard = eval_in(g, x, &mut 0)?;
            if guard > 0.0 {
                value_and_jacobian(t, v)
            } else {
                value_and_jacobian(f, v)
            }
        }
    }
}

pub fn symbolic_jacobian(e: &Expr, v: &InputVector) -> Result<JacobianRow, EvalError> {
    value_and_jacobian(e, v).map(|(_, row)| row)
}

/// Forward mode: `D̃⟦e⟧v · w` without materialising the row.
pub fn jvp(e: &Expr, v: &InputVector, w: &[f64]) -> Result<f64, EvalError> {
    check_len(v.len(), w.len())?;
    let inputs: Vec<Dual<f64>> = v.as_slice().iter().zip(w).map(|(x, t)| Dual::new(*x, *t)).collect();
    Ok(eval_in(e, &inputs, &mut 0)?.tangent)
}

/// Value and directional derivative in one forward pass.
pub fn value_and_jvp(e: &Expr, v: &InputVector, w: &[f64]) -> Result<(f64, f64), EvalError> {
    check_len(v.len(), w.len())?;
    let inputs: Vec<Dual<f64>> = v.as_slice().iter().zip(w).map(|(x, t)| Dual::new(*x, *t)).collect();
    let out = eval_in(e, &inputs, &mut 0)?;
    Ok((out.primal, out.tangent))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TapeOp {
    Const,
    /// Zero-based input index.
    Input(usize),
    Prim(PrimOp),
    /// Forwards the value of the taken branch of a conditional.
    Select,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TapeNode {
    pub op: TapeOp,
    pub args: Vec<usize>,
    pub value: f64,
    /// Partial derivatives of this node with respect to each of `args`.
    pub local: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchRecord {
    pub node: usize,
    pub guard: f64,
    pub took_then: bool,
}

/// Record of one forward evaluation, in topological order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tape {
    pub nodes: Vec<TapeNode>,
    pub branches: Vec<BranchRecord>,
    pub arity: usize,
}

impl Tape {
    /// Runs `e` at `v`, recording every node. Returns the tape and the
    /// index of the output node.
    pub fn record(e: &Expr, v: &InputVector) -> Result<(Tape, usize), EvalError> {
        let mut tape = Tape {
            arity: v.len(),
            ..Tape::default()
        };
        let out = tape.push_expr(e, v.as_slice())?;
        Ok((tape, out))
    }

    fn push(&mut self, op: TapeOp, args: Vec<usize>, value: f64, local: Vec<f64>) -> usize {
        self.nodes.push(TapeNode { op, args, value, local });
        self.nodes.len() - 1
    }

    fn push_expr(&mut self, e: &Expr, x: &[f64]) -> Result<usize, EvalError> {
        match e {
            Expr::Const(c) => Ok(self.push(TapeOp::Const, vec![], *c, vec![])),
            Expr::Input(i) => {
                let value = *x.get(i - 1).ok_or(EvalError::InputOutOfRange {
                    index: *i,
                    arity: x.len(),
                })?;
                Ok(self.push(TapeOp::Input(i - 1), vec![], value, vec![]))
            }
            Expr::Call(op, args) => {
                let ids = args
                    .iter()
                    .map(|a| self.push_expr(a, x))
                    .collect::<Result<Vec<_>, _>>()?;
                let vals: Vec<f64> = ids.iter().map(|&i| self.nodes[i].value).collect();
                let value = op.eval_f64(&vals)?;
                let local = op.ideriv(&vals)?;
                Ok(self.push(TapeOp::Prim(*op), ids, value, local))
            }
            Expr::Cond(g, t, f) => {
                let gid = self.push_expr(g, x)?;
                let guard = self.nodes[gid].value;
                let took_then = guard > 0.0;
                let branch = self.push_expr(if took_then { t } else { f }, x)?;
                let value = self.nodes[branch].value;
                let id = self.push(TapeOp::Select, vec![branch], value, vec![1.0]);
                self.branches.push(BranchRecord {
                    node: id,
                    guard,
                    took_then,
                });
                Ok(id)
            }
        }
    }

    /// Reverse sweep from `output` seeded with cotangent `u`.
    pub fn backward(&self, output: usize, u: f64) -> Vec<f64> {
        let mut adjoint = vec![0.0; self.nodes.len()];
        adjoint[output] = u;
        let mut grad = vec![0.0; self.arity];
        for id in (0..=output).rev() {
            let a = adjoint[id];
            if a == 0.0 {
                continue;
            }
            let node = &self.nodes[id];
            if let TapeOp::Input(i) = node.op {
                grad[i] += a;
            }
            for (arg, d) in node.args.iter().zip(&node.local) {
                adjoint[*arg] += a * d;
            }
        }
        grad
    }
}

/// Reverse mode: `u · D̃⟦e⟧v`.
pub fn vjp(e: &Expr, v: &InputVector, u: f64) -> Result<Vec<f64>, EvalError> {
    let (tape, out) = Tape::record(e, v)?;
    Ok(tape.backward(out, u))
}

/// `k`-th order directional derivative `D̃ᵏ⟦e⟧v[d₁, …, dₖ]` by nesting
/// forward mode `k` times. `k = 0` is plain evaluation.
pub fn nth_derivative(e: &Expr, v: &InputVector, dirs: &[Vec<f64>]) -> Result<f64, EvalError> {
    let n = v.len();
    for d in dirs {
        check_len(n, d.len())?;
    }
    let k = dirs.len() as u32;
    // Input i is x_i + Σ_l d_l[i]·ε_l, nested one level per direction.
    let inputs: Vec<Jet> = (0..n)
        .map(|i| {
            dirs.iter().enumerate().fold(Jet::Real(v.as_slice()[i]), |acc, (l, d)| {
                Jet::dual(l as u32 + 1, acc, Jet::Real(d[i]))
            })
        })
        .collect();
    let out = eval_in(e, &inputs, &mut 0)?;
    Ok(if k == 0 { out.primal() } else { out.mixed_coefficient(k) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn iv(v: &[f64]) -> InputVector {
        InputVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn symbolic_base_cases() {
        let c = parse("7", 3).unwrap();
        assert_eq!(symbolic_jacobian(&c, &iv(&[1.0, 2.0, 3.0])).unwrap().0, vec![0.0; 3]);
        let x2 = parse("x2", 3).unwrap();
        assert_eq!(
            symbolic_jacobian(&x2, &iv(&[1.0, 2.0, 3.0])).unwrap().0,
            vec![0.0, 1.0, 0.0]
        );
        let r = parse("relu(x1)", 1).unwrap();
        assert_eq!(symbolic_jacobian(&r, &iv(&[0.0])).unwrap().0, vec![0.0]);
    }

    #[test]
    fn jvp_examples() {
        let e = parse("mult(x1,x2)", 2).unwrap();
        assert_eq!(jvp(&e, &iv(&[3.0, 2.0]), &[1.0, 0.0]).unwrap(), 2.0);
        let e = parse("sqrt(mult(x1, 0))", 1).unwrap();
        let d = jvp(&e, &iv(&[5.0]), &[1.0]).unwrap();
        assert_eq!(d, 0.0);
        let e = parse("add(relu(sub(0.5, 0.5)), 0.5)", 1).unwrap();
        assert_eq!(jvp(&e, &iv(&[0.3]), &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn vjp_examples() {
        let e = parse("mult(x1,x2)", 2).unwrap();
        assert_eq!(vjp(&e, &iv(&[3.0, 2.0]), 1.0).unwrap(), vec![2.0, 3.0]);
        let e = parse("relu(x1)", 1).unwrap();
        assert_eq!(vjp(&e, &iv(&[0.0]), 1.0).unwrap(), vec![0.0]);
        let e = parse("if (x1 > 0) x1 else neg(x1)", 1).unwrap();
        assert_eq!(vjp(&e, &iv(&[-4.0]), 2.0).unwrap(), vec![-2.0]);
    }

    #[test]
    fn tape_records_taken_branch() {
        let e = parse("if (x1 > 0) exp(x1) else neg(x1)", 1).unwrap();
        let (tape, out) = Tape::record(&e, &iv(&[-1.0])).unwrap();
        assert_eq!(tape.branches.len(), 1);
        assert!(!tape.branches[0].took_then);
        assert_eq!(tape.nodes[out].value, 1.0);
        assert!(!tape.nodes.iter().any(|n| n.op == TapeOp::Prim(PrimOp::Exp)));
    }

    #[test]
    fn reused_input_accumulates() {
        let e = parse("mult(x1, x1)", 1).unwrap();
        assert_eq!(vjp(&e, &iv(&[3.0]), 1.0).unwrap(), vec![6.0]);
    }

    #[test]
    fn higher_order_examples() {
        let sq = parse("mult(x1,x1)", 1).unwrap();
        assert_eq!(nth_derivative(&sq, &iv(&[5.0]), &[vec![1.0], vec![1.0]]).unwrap(), 2.0);
        assert_eq!(nth_derivative(&sq, &iv(&[5.0]), &[]).unwrap(), 25.0);
        assert_eq!(nth_derivative(&sq, &iv(&[5.0]), &[vec![1.0]]).unwrap(), 10.0);
        let r = parse("relu(x1)", 1).unwrap();
        assert_eq!(nth_derivative(&r, &iv(&[0.0]), &[vec![1.0], vec![1.0]]).unwrap(), 0.0);
        assert_eq!(nth_derivative(&r, &iv(&[0.7]), &[vec![1.0], vec![1.0]]).unwrap(), 0.0);
    }

    #[test]
    fn third_derivative_of_sin() {
        let e = parse("sin(x1)", 1).unwrap();
        let d3 = nth_derivative(&e, &iv(&[0.4]), &vec![vec![1.0]; 3]).unwrap();
        assert!((d3 + 0.4f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn mixed_partial() {
        // ∂²/∂x1∂x2 of x1·x2·x2 = 2·x2
        let e = parse("mult(x1, mult(x2, x2))", 2).unwrap();
        let d = nth_derivative(&e, &iv(&[1.5, -2.0]), &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(d, -4.0);
    }

    #[test]
    fn static_and_runtime_nesting_agree() {
        let e = parse("div(exp(x1), add(mult(x1, x1), 1))", 1).unwrap();
        let x = 0.3;
        let inner = Dual::new(x, 1.0);
        let input = Dual::new(inner, Dual::new(1.0, 0.0));
        let out: Dual<Dual<f64>> = eval_in(&e, &[input], &mut 0).unwrap();
        let jet = nth_derivative(&e, &iv(&[x]), &[vec![1.0], vec![1.0]]).unwrap();
        assert!((out.tangent.tangent - jet).abs() <= 1e-13 * jet.abs().max(1.0));
    }

    #[test]
    fn length_mismatch() {
        let e = parse("x1", 1).unwrap();
        assert!(jvp(&e, &iv(&[1.0]), &[1.0, 2.0]).is_err());
    }
}
