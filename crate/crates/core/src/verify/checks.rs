use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::Sampler;
use crate::autodiff::{jvp, symbolic_jacobian, vjp};
use crate::error::ReprError;
use crate::expr::{eval, Expr, InputVector};
use crate::numeric::rel_err;
use crate::repr::{expr_to_repr, PapRepr};

/// Cross-mode agreement tolerance.
pub const MODE_TOL: f64 = 1e-10;
/// Tolerance between `⟦Dγ⟧` and the symbolic row.
pub const REPR_DERIV_TOL: f64 = 1e-12;
/// Tolerance for the representation-level chain rule.
pub const CHAIN_RULE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ModeReport {
    pub samples: usize,
    pub agree: usize,
    pub max_rel_err: f64,
    pub failures: Vec<Vec<f64>>,
    pub skipped: usize,
}

impl ModeReport {
    pub fn passed(&self) -> bool {
        self.samples > 0 && self.agree == self.samples
    }
}

/// Checks forward, reverse, and symbolic modes pairwise at sampled points
/// with random tangents `w ∈ [-1, 1]ᴺ` and cotangents `u ∈ [-1, 1]`.
pub fn mode_consistency(e: &Expr, sampler: &Sampler, count: usize) -> ModeReport {
    let points = sampler.points(count);
    let mut rng = sampler.rng(1);
    let n = sampler.dim();
    let dirs: Vec<(Vec<f64>, f64)> = (0..count)
        .map(|_| {
            let w = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (w, rng.gen_range(-1.0..1.0))
        })
        .collect();
    let results: Vec<Option<f64>> = points
        .par_iter()
        .zip(dirs.par_iter())
        .map(|(x, (w, u))| {
            let v = InputVector::try_from(x.as_slice()).ok()?;
            let row = symbolic_jacobian(e, &v).ok()?;
            let forward = jvp(e, &v, w).ok()?;
            let reverse = vjp(e, &v, *u).ok()?;
            let mut err = rel_err(forward, row.dot(w));
            for (r, s) in reverse.iter().zip(&row.0) {
                err = err.max(rel_err(*r, u * s));
            }
            let reverse_dot: f64 = reverse.iter().zip(w).map(|(a, b)| a * b).sum();
            err = err.max(rel_err(reverse_dot, u * forward));
            Some(err)
        })
        .collect();
    let mut report = ModeReport::default();
    for (x, r) in points.into_iter().zip(results) {
        match r {
            None => report.skipped += 1,
            Some(err) => {
                report.samples += 1;
                report.max_rel_err = report.max_rel_err.max(err);
                if err <= MODE_TOL {
                    report.agree += 1;
                } else {
                    report.failures.push(x);
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReprEquivalenceReport {
    pub pieces: usize,
    pub samples: usize,
    /// Points where `⟦γ⟧(v)` is bit-identical to `⟦e⟧v`.
    pub eval_exact: usize,
    /// Points where `⟦Dγ⟧(v)` matches the symbolic row within [`REPR_DERIV_TOL`].
    pub deriv_agree: usize,
    pub max_deriv_rel_err: f64,
    /// Points contained in zero or several cells while the program is defined.
    pub exclusivity_violations: usize,
    /// Points where the program itself is undefined.
    pub skipped: usize,
    pub failures: Vec<Vec<f64>>,
}

impl ReprEquivalenceReport {
    pub fn passed(&self) -> bool {
        self.samples > 0
            && self.eval_exact == self.samples
            && self.deriv_agree == self.samples
            && self.exclusivity_violations == 0
    }
}

/// Builds `γ = expr_to_repr(e)` and `Dγ` once, then checks at sampled
/// points that `⟦γ⟧ = ⟦e⟧` exactly, that `⟦Dγ⟧` equals the symbolic row,
/// and that exactly one cell contains each point.
pub fn repr_equivalence(e: &Expr, sampler: &Sampler, count: usize) -> ReprEquivalenceReport {
    let n = sampler.dim();
    let repr = expr_to_repr(e, n);
    let deriv = repr.derivative();
    repr_equivalence_with(e, &repr, &deriv, &sampler.points(count))
}

/// As [`repr_equivalence`], with prebuilt representations and explicit points.
pub fn repr_equivalence_with(e: &Expr, repr: &PapRepr, deriv: &PapRepr, points: &[Vec<f64>]) -> ReprEquivalenceReport {
    #[derive(Clone, Copy)]
    enum Outcome {
        Skipped,
        Checked {
            exact: bool,
            deriv_err: f64,
            exclusive: bool,
        },
    }
    let outcomes: Vec<Outcome> = points
        .par_iter()
        .map(|x| {
            let Ok(v) = InputVector::try_from(x.as_slice()) else {
                return Outcome::Skipped;
            };
            let (Ok(value), Ok(row)) = (eval(e, &v), symbolic_jacobian(e, &v)) else {
                return Outcome::Skipped;
            };
            let hits = repr.containing_pieces(x);
            let dhits = deriv.containing_pieces(x);
            let exclusive = hits.len() == 1 && dhits == hits;
            let Some(&i) = hits.first() else {
                return Outcome::Checked {
                    exact: false,
                    deriv_err: f64::INFINITY,
                    exclusive,
                };
            };
            let exact = repr.pieces[i].eval(x) == [value];
            let d = deriv.pieces[i].eval(x);
            let deriv_err = d.iter().zip(&row.0).map(|(a, b)| rel_err(*a, *b)).fold(0.0, f64::max);
            Outcome::Checked {
                exact,
                deriv_err,
                exclusive,
            }
        })
        .collect();
    let mut report = ReprEquivalenceReport {
        pieces: repr.pieces.len(),
        ..Default::default()
    };
    for (x, o) in points.iter().zip(outcomes) {
        match o {
            Outcome::Skipped => report.skipped += 1,
            Outcome::Checked {
                exact,
                deriv_err,
                exclusive,
            } => {
                report.samples += 1;
                report.max_deriv_rel_err = report.max_deriv_rel_err.max(deriv_err);
                let deriv_ok = deriv_err <= REPR_DERIV_TOL;
                report.eval_exact += exact as usize;
                report.deriv_agree += deriv_ok as usize;
                report.exclusivity_violations += !exclusive as usize;
                if !(exact && deriv_ok && exclusive) {
                    report.failures.push(x.clone());
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ChainRuleReport {
    pub samples: usize,
    pub agree: usize,
    pub max_rel_err: f64,
    /// Points contained in zero or several cells of the composite, or of
    /// either factor along the evaluation path.
    pub exclusivity_violations: usize,
    pub failures: Vec<Vec<f64>>,
}

impl ChainRuleReport {
    pub fn passed(&self) -> bool {
        self.samples > 0 && self.agree == self.samples && self.exclusivity_violations == 0
    }
}

/// `⟦D(g ∘ f)⟧(x)` against `⟦Dγg⟧(⟦γf⟧(x)) · ⟦Dγf⟧(x)` at each point.
pub fn chain_rule_check(outer: &PapRepr, inner: &PapRepr, points: &[Vec<f64>]) -> Result<ChainRuleReport, ReprError> {
    let composite = PapRepr::compose(outer, inner)?;
    let d_composite = composite.derivative();
    let d_outer = outer.derivative();
    let d_inner = inner.derivative();
    let (m, k, n) = (outer.output_dim, inner.output_dim, inner.input_dim);
    let outcomes: Vec<Result<f64, ReprError>> = points
        .par_iter()
        .map(|x| {
            let lhs = d_composite.eval(x)?;
            let fx = inner.eval(x)?;
            let dg = d_outer.eval(&fx)?;
            let df = d_inner.eval(x)?;
            // Exclusivity of the composite's own cells.
            composite.locate(x)?;
            let mut err = 0.0f64;
            for r in 0..m {
                for c in 0..n {
                    let rhs: f64 = (0..k).map(|j| dg[r * k + j] * df[j * n + c]).sum();
                    err = err.max(rel_err(lhs[r * n + c], rhs));
                }
            }
            Ok(err)
        })
        .collect();
    let mut report = ChainRuleReport::default();
    for (x, o) in points.iter().zip(outcomes) {
        report.samples += 1;
        match o {
            Ok(err) => {
                report.max_rel_err = report.max_rel_err.max(err);
                if err <= CHAIN_RULE_TOL {
                    report.agree += 1;
                } else {
                    report.failures.push(x.clone());
                }
            }
            Err(_) => {
                report.exclusivity_violations += 1;
                report.failures.push(x.clone());
            }
        }
    }
    Ok(report)
}
