//! Random program generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::value_and_jacobian;
use crate::expr::{Expr, InputVector};
use crate::primitives::PrimOp;
use crate::repr::repr_piece_count;

/// Programs whose representation would exceed this many pieces are redrawn.
pub const MAX_CORPUS_PIECES: u128 = 4096;

/// Programs whose value or derivative exceeds this magnitude at a probe
/// point in `[-1, 1]ᴺ` are redrawn.
pub const CORPUS_PROBE_BOUND: f64 = 1e6;

const PROBES: usize = 32;
const MAX_ATTEMPTS: usize = 10_000;

struct Generator {
    rng: ChaCha8Rng,
    arity: usize,
}

impl Generator {
    fn constant(&mut self) -> Expr {
        let c: f64 = self.rng.gen_range(-2.0..2.0);
        Expr::Const((c * 1000.0).round() / 1000.0)
    }

    fn offset(&mut self) -> Expr {
        let c: f64 = self.rng.gen_range(0.1..1.0);
        Expr::Const((c * 1000.0).round() / 1000.0)
    }

    fn input(&mut self) -> Expr {
        Expr::Input(self.rng.gen_range(1..=self.arity))
    }

    fn leaf(&mut self) -> Expr {
        if self.rng.gen_bool(0.5) {
            self.constant()
        } else {
            self.input()
        }
    }

    /// `add(relu(e), c)` with `c > 0`: strictly positive, two levels deep.
    fn positive(&mut self, depth: usize) -> Expr {
        let inner = self.expr(depth - 2);
        Expr::Call(PrimOp::Add, vec![Expr::Call(PrimOp::Relu, vec![inner]), self.offset()])
    }

    fn expr(&mut self, depth: usize) -> Expr {
        if depth == 0 {
            return self.leaf();
        }
        let roll: f64 = self.rng.gen();
        if roll < 0.4 {
            self.call(depth)
        } else if roll < 0.6 {
            Expr::cond(self.expr(depth - 1), self.expr(depth - 1), self.expr(depth - 1))
        } else if roll < 0.8 {
            self.input()
        } else {
            self.constant()
        }
    }

    fn call(&mut self, depth: usize) -> Expr {
        // Partial primitives need two extra levels for their guard wrapper.
        let candidates: Vec<PrimOp> = PrimOp::ALL
            .into_iter()
            .filter(|op| depth >= 3 || !matches!(op, PrimOp::Log | PrimOp::Sqrt | PrimOp::Div))
            .collect();
        let op = candidates[self.rng.gen_range(0..candidates.len())];
        let args = match op {
            PrimOp::Log | PrimOp::Sqrt => vec![self.positive(depth - 1)],
            PrimOp::Div => vec![self.expr(depth - 1), self.positive(depth - 1)],
            _ => (0..op.arity()).map(|_| self.expr(depth - 1)).collect(),
        };
        Expr::Call(op, args)
    }
}

fn acceptable(e: &Expr, arity: usize, rng: &mut ChaCha8Rng) -> bool {
    if repr_piece_count(e) > MAX_CORPUS_PIECES {
        return false;
    }
    (0..PROBES).all(|_| {
        let x: Vec<f64> = (0..arity).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = InputVector::new(x).expect("finite probe");
        match value_and_jacobian(e, &v) {
            Ok((value, row)) => {
                value.abs() <= CORPUS_PROBE_BOUND && row.0.iter().all(|d| d.abs() <= CORPUS_PROBE_BOUND)
            }
            Err(_) => false,
        }
    })
}

/// `count` random programs over `arity` inputs with depth at most
/// `max_depth`, reproducible from `seed`.
///
/// Node kinds are drawn 40% primitive call, 20% conditional, 20% input,
/// 20% constant; depth-0 positions are inputs or constants. Arguments of
/// `log`, `sqrt`, and the denominator of `div` are wrapped as
/// `add(relu(e), c)` with `c ∈ [0.1, 1)`. Drafts that would need more than
/// [`MAX_CORPUS_PIECES`] representation pieces, or that fail or exceed
/// [`CORPUS_PROBE_BOUND`] on probe points in `[-1, 1]ᴺ`, are redrawn.
pub fn generate_corpus(seed: u64, count: usize, max_depth: usize, arity: usize) -> Vec<Expr> {
    assert!(arity >= 1, "programs need at least one input");
    let mut gen = Generator {
        rng: ChaCha8Rng::seed_from_u64(seed),
        arity,
    };
    let mut probe_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut corpus = Vec::with_capacity(count);
    for _ in 0..count {
        let mut attempts = 0;
        loop {
            attempts += 1;
            let e = gen.expr(max_depth);
            if acceptable(&e, arity, &mut probe_rng) {
                corpus.push(e);
                break;
            }
            assert!(attempts < MAX_ATTEMPTS, "corpus generator cannot satisfy its filters");
        }
    }
    corpus
}
