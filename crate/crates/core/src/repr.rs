//! Finite piecewise-analytic representations and their algebra.
//!
//! A [`PapRepr`] is an ordered list of pieces `⟨cell, component⟩`. The cells
//! are meant to partition the domain; that is not decidable in general, so
//! it is checked by sampling ([`PapRepr::containing_pieces`]). Cells that
//! happen to be empty are kept: composition results have exactly the
//! product piece counts.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::analytic::{AnalyticExpr, AnalyticSet, Guard, Node};
use crate::error::ReprError;
use crate::expr::Expr;
use crate::primitives::primitive;

#[derive(Clone, Debug, PartialEq)]
pub struct PapPiece {
    pub cell: AnalyticSet,
    pub component: Vec<AnalyticExpr>,
}

impl PapPiece {
    pub fn new(cell: AnalyticSet, component: Vec<AnalyticExpr>) -> Self {
        PapPiece { cell, component }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.component.iter().map(|c| c.eval(x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PapRepr {
    pub input_dim: usize,
    pub output_dim: usize,
    pub pieces: Vec<PapPiece>,
}

/// Shares rewritten nodes across every expression of one piece.
struct Substitution<'a> {
    args: &'a [AnalyticExpr],
    memo: HashMap<*const Node, AnalyticExpr>,
}

impl<'a> Substitution<'a> {
    fn new(args: &'a [AnalyticExpr]) -> Self {
        Substitution {
            args,
            memo: HashMap::new(),
        }
    }

    fn expr(&mut self, e: &AnalyticExpr) -> AnalyticExpr {
        let key = e.node() as *const Node;
        if let Some(done) = self.memo.get(&key) {
            return done.clone();
        }
        let out = match e.node() {
            Node::Const(_) => e.clone(),
            Node::Var(i) => self.args[*i].clone(),
            Node::Unary(op, a) => {
                let a = self.expr(a);
                AnalyticExpr::unary(*op, a)
            }
            Node::Binary(op, a, b) => {
                let a = self.expr(a);
                let b = self.expr(b);
                AnalyticExpr::binary(*op, a, b)
            }
        };
        self.memo.insert(key, out.clone());
        out
    }

    fn set(&mut self, s: &AnalyticSet) -> AnalyticSet {
        AnalyticSet::new(
            s.guards
                .iter()
                .map(|g| Guard {
                    expr: self.expr(&g.expr),
                    sense: g.sense,
                })
                .collect(),
        )
    }
}

impl PapRepr {
    pub fn new(input_dim: usize, output_dim: usize, pieces: Vec<PapPiece>) -> Result<Self, ReprError> {
        if pieces.is_empty() {
            return Err(ReprError::Empty);
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.component.len() != output_dim {
                return Err(ReprError::DimensionMismatch(format!(
                    "piece {i} has {} component(s), expected {output_dim}",
                    p.component.len()
                )));
            }
            let bound = p
                .component
                .iter()
                .map(AnalyticExpr::var_bound)
                .chain(std::iter::once(p.cell.var_bound()))
                .max()
                .unwrap_or(0);
            if bound > input_dim {
                return Err(ReprError::DimensionMismatch(format!(
                    "piece {i} reads x{bound} but the input dimension is {input_dim}"
                )));
            }
        }
        Ok(PapRepr {
            input_dim,
            output_dim,
            pieces,
        })
    }

    /// Single piece over the whole space.
    pub fn whole(input_dim: usize, component: Vec<AnalyticExpr>) -> Self {
        PapRepr {
            input_dim,
            output_dim: component.len(),
            pieces: vec![PapPiece::new(AnalyticSet::whole(), component)],
        }
    }

    pub fn constant(input_dim: usize, c: f64) -> Self {
        PapRepr::whole(input_dim, vec![AnalyticExpr::constant(c)])
    }

    /// Projection onto zero-based coordinate `index`.
    pub fn projection(input_dim: usize, index: usize) -> Self {
        PapRepr::whole(input_dim, vec![AnalyticExpr::var(index)])
    }

    /// The identity map on `R^n`.
    pub fn identity(n: usize) -> Self {
        PapRepr::whole(n, (0..n).map(AnalyticExpr::var).collect())
    }

    /// Indices of every piece whose cell contains `x`.
    pub fn containing_pieces(&self, x: &[f64]) -> Vec<usize> {
        self.pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.cell.contains(x))
            .map(|(i, _)| i)
            .collect()
    }

    /// Index of the unique piece containing `x`.
    pub fn locate(&self, x: &[f64]) -> Result<usize, ReprError> {
        let hits = self.containing_pieces(x);
        match hits.as_slice() {
            [] => Err(ReprError::NoPiece(x.to_vec())),
            [i] => Ok(*i),
            _ => Err(ReprError::MultiplePieces {
                point: x.to_vec(),
                pieces: hits,
            }),
        }
    }

    /// Evaluates the component of the unique piece containing `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, ReprError> {
        if x.len() != self.input_dim {
            return Err(ReprError::DimensionMismatch(format!(
                "point has {} coordinate(s), representation expects {}",
                x.len(),
                self.input_dim
            )));
        }
        let i = self.locate(x)?;
        Ok(self.pieces[i].eval(x))
    }

    /// Same cells; each component replaced by its Jacobian, flattened
    /// row-major into `output_dim · input_dim` entries.
    pub fn derivative(&self) -> PapRepr {
        let n = self.input_dim;
        let mut memos: Vec<HashMap<*const Node, AnalyticExpr>> = vec![HashMap::new(); n];
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut jac = Vec::with_capacity(p.component.len() * n);
                for c in &p.component {
                    for (var, memo) in memos.iter_mut().enumerate() {
                        jac.push(c.derivative_memo(var, memo));
                    }
                }
                PapPiece::new(p.cell.clone(), jac)
            })
            .collect();
        PapRepr {
            input_dim: n,
            output_dim: self.output_dim * n,
            pieces,
        }
    }

    /// `outer ∘ inner`, with cells `{x ∈ Aⁱ | fⁱ(x) ∈ Bʲ}` and components
    /// `gʲ ∘ fⁱ`, ordered with the inner index outermost.
    pub fn compose(outer: &PapRepr, inner: &PapRepr) -> Result<PapRepr, ReprError> {
        if inner.output_dim != outer.input_dim {
            return Err(ReprError::DimensionMismatch(format!(
                "inner output dimension {} does not match outer input dimension {}",
                inner.output_dim, outer.input_dim
            )));
        }
        let mut pieces = Vec::with_capacity(inner.pieces.len() * outer.pieces.len());
        for f in &inner.pieces {
            let mut subst = Substitution::new(&f.component);
            for g in &outer.pieces {
                let cell = f.cell.intersect(&subst.set(&g.cell));
                let component = g.component.iter().map(|c| subst.expr(c)).collect();
                pieces.push(PapPiece::new(cell, component));
            }
        }
        Ok(PapRepr {
            input_dim: inner.input_dim,
            output_dim: outer.output_dim,
            pieces,
        })
    }

    /// Representation of `if (γ1 > 0) γ2 else γ3`.
    ///
    /// Pieces are indexed by `(i, j, k, l)` over `[I]×[J]×[K]×{0,1}`; `l = 1`
    /// adds the guard `fⁱ > 0` and takes `gʲ`, `l = 0` adds `fⁱ <= 0` and
    /// takes `hᵏ`.
    pub fn cond_compose(guard: &PapRepr, then: &PapRepr, otherwise: &PapRepr) -> Result<PapRepr, ReprError> {
        let n = guard.input_dim;
        if then.input_dim != n || otherwise.input_dim != n {
            return Err(ReprError::DimensionMismatch(
                "conditional branches must share the guard's input dimension".into(),
            ));
        }
        if guard.output_dim != 1 {
            return Err(ReprError::DimensionMismatch(format!(
                "guard must be scalar-valued, has output dimension {}",
                guard.output_dim
            )));
        }
        if then.output_dim != otherwise.output_dim {
            return Err(ReprError::DimensionMismatch(format!(
                "branch output dimensions differ: {} vs {}",
                then.output_dim, otherwise.output_dim
            )));
        }
        let mut pieces = Vec::with_capacity(guard.pieces.len() * then.pieces.len() * otherwise.pieces.len() * 2);
        for a in &guard.pieces {
            let f = &a.component[0];
            for b in &then.pieces {
                for c in &otherwise.pieces {
                    for l in [0, 1] {
                        let mut guards = a.cell.guards.clone();
                        guards.push(if l == 1 {
                            Guard::positive(f.clone())
                        } else {
                            Guard::nonpositive(f.clone())
                        });
                        guards.extend(b.cell.guards.iter().cloned());
                        guards.extend(c.cell.guards.iter().cloned());
                        let component = if l == 1 {
                            b.component.clone()
                        } else {
                            c.component.clone()
                        };
                        pieces.push(PapPiece::new(AnalyticSet::new(guards), component));
                    }
                }
            }
        }
        Ok(PapRepr {
            input_dim: n,
            output_dim: then.output_dim,
            pieces,
        })
    }

    /// Refinement by a family of analytic sets: cells `Aⁱ ∩ Bʲ`, components unchanged.
    pub fn refine(&self, sets: &[AnalyticSet]) -> Result<PapRepr, ReprError> {
        if let Some(s) = sets.iter().find(|s| s.var_bound() > self.input_dim) {
            return Err(ReprError::DimensionMismatch(format!(
                "refining set `{s}` reads beyond input dimension {}",
                self.input_dim
            )));
        }
        let pieces: Vec<PapPiece> = self
            .pieces
            .iter()
            .flat_map(|p| {
                sets.iter()
                    .map(move |s| PapPiece::new(p.cell.intersect(s), p.component.clone()))
            })
            .collect();
        PapRepr::new(self.input_dim, self.output_dim, pieces)
    }

    /// `x ↦ (γ₁(x), …, γₖ(x))` over the product of the piece lists.
    pub fn tuple(reprs: &[PapRepr]) -> Result<PapRepr, ReprError> {
        let Some(first) = reprs.first() else {
            return Err(ReprError::Empty);
        };
        let n = first.input_dim;
        if reprs.iter().any(|r| r.input_dim != n) {
            return Err(ReprError::DimensionMismatch(
                "tupled representations must share the input dimension".into(),
            ));
        }
        let mut pieces = first.pieces.clone();
        for r in &reprs[1..] {
            pieces = pieces
                .iter()
                .flat_map(|p| {
                    r.pieces.iter().map(move |q| {
                        let mut component = p.component.clone();
                        component.extend(q.component.iter().cloned());
                        PapPiece::new(p.cell.intersect(&q.cell), component)
                    })
                })
                .collect();
        }
        Ok(PapRepr {
            input_dim: n,
            output_dim: reprs.iter().map(|r| r.output_dim).sum(),
            pieces,
        })
    }

    /// Drops pieces whose cells contain none of `points`. Not applied by any
    /// other operation.
    pub fn prune(&self, points: &[Vec<f64>]) -> PapRepr {
        let kept: Vec<PapPiece> = self
            .pieces
            .iter()
            .filter(|p| points.iter().any(|x| p.cell.contains(x)))
            .cloned()
            .collect();
        if kept.is_empty() {
            return self.clone();
        }
        PapRepr {
            pieces: kept,
            ..self.clone()
        }
    }

    pub fn table(&self) -> Vec<PieceRow> {
        self.pieces
            .iter()
            .enumerate()
            .map(|(index, p)| PieceRow {
                index,
                cell: p.cell.guards.iter().map(ToString::to_string).collect(),
                component: p.component.iter().map(ToString::to_string).collect(),
            })
            .collect()
    }

    pub fn to_json_view(&self) -> ReprView {
        ReprView {
            input_dim: self.input_dim,
            output_dim: self.output_dim,
            pieces: self.table(),
        }
    }
}

/// One row of a printed piece table.
#[derive(Clone, Debug, Serialize)]
pub struct PieceRow {
    pub index: usize,
    pub cell: Vec<String>,
    pub component: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReprView {
    pub input_dim: usize,
    pub output_dim: usize,
    pub pieces: Vec<PieceRow>,
}

impl fmt::Display for PapRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# {} piece(s), R^{} -> R^{}",
            self.pieces.len(),
            self.input_dim,
            self.output_dim
        )?;
        for (i, p) in self.pieces.iter().enumerate() {
            let comps: Vec<String> = p.component.iter().map(ToString::to_string).collect();
            writeln!(f, "{i}\t{}\t[{}]", p.cell, comps.join(", "))?;
        }
        Ok(())
    }
}

/// Representation of a program's denotation over `R^arity`, built by
/// structural induction: constants and inputs use the trivial partition,
/// calls compose the primitive's piece table with the tuple of argument
/// representations, and conditionals use [`PapRepr::cond_compose`].
///
/// Partial primitives contribute cells only over their domain, so the
/// result is undefined (no piece) wherever some primitive along every
/// owning path would be out of domain.
pub fn expr_to_repr(e: &Expr, arity: usize) -> PapRepr {
    match e {
        Expr::Const(c) => PapRepr::constant(arity, *c),
        Expr::Input(i) => PapRepr::projection(arity, i - 1),
        Expr::Call(op, args) => {
            let args: Vec<PapRepr> = args.iter().map(|a| expr_to_repr(a, arity)).collect();
            let inner = PapRepr::tuple(&args).expect("argument representations share the input dimension");
            PapRepr::compose(&primitive(*op).pieces, &inner).expect("tuple width equals primitive arity")
        }
        Expr::Cond(g, t, f) => PapRepr::cond_compose(
            &expr_to_repr(g, arity),
            &expr_to_repr(t, arity),
            &expr_to_repr(f, arity),
        )
        .expect("program sub-representations are scalar over a shared input space"),
    }
}

/// Number of pieces [`expr_to_repr`] would produce, without building it.
pub fn repr_piece_count(e: &Expr) -> u128 {
    match e {
        Expr::Const(_) | Expr::Input(_) => 1,
        Expr::Call(op, args) => args
            .iter()
            .map(repr_piece_count)
            .fold(primitive(*op).pieces.pieces.len() as u128, u128::saturating_mul),
        Expr::Cond(g, t, f) => 2u128
            .saturating_mul(repr_piece_count(g))
            .saturating_mul(repr_piece_count(t))
            .saturating_mul(repr_piece_count(f)),
    }
}
