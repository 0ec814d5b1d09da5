//! Registered primitive functions.
//!
//! Each primitive carries a finite piece table (a [`PapRepr`] over its
//! arguments) and a designated derivative row, [`PrimOp::ideriv`]. The
//! derivative row is the evaluated intensional derivative of that piece
//! table, so at a non-differentiable point it returns the slope of whichever
//! piece owns the point:
//!
//! | primitive | boundary value | owning piece |
//! |-----------|----------------|--------------|
//! | `relu` at 0 | 0 | `x <= 0 ↦ 0` |
//! | `abs` at 0 | -1 | `x <= 0 ↦ -x` |
//! | `sqrt` at 0 | 0 | `x = 0 ↦ 0` |
//! | `reciprocal_no_nan` at 0 | 0 | `x = 0 ↦ 0` |

use std::sync::OnceLock;

use serde::Serialize;

use crate::analytic::{AnalyticExpr, AnalyticSet, BinaryOp, Guard, UnaryOp};
use crate::error::{EvalError, UnknownPrimitive};
use crate::numeric::{central_difference, rel_err};
use crate::repr::{PapPiece, PapRepr};
use crate::scalar::Scalar;
use crate::verify::Sampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Mult,
    Neg,
    Div,
    Exp,
    Sin,
    Cos,
    Log,
    Sqrt,
    Relu,
    Abs,
    ReciprocalNoNan,
    Zero,
}

impl PrimOp {
    pub const ALL: [PrimOp; 14] = [
        PrimOp::Add,
        PrimOp::Sub,
        PrimOp::Mult,
        PrimOp::Neg,
        PrimOp::Div,
        PrimOp::Exp,
        PrimOp::Sin,
        PrimOp::Cos,
        PrimOp::Log,
        PrimOp::Sqrt,
        PrimOp::Relu,
        PrimOp::Abs,
        PrimOp::ReciprocalNoNan,
        PrimOp::Zero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrimOp::Add => "add",
            PrimOp::Sub => "sub",
            PrimOp::Mult => "mult",
            PrimOp::Neg => "neg",
            PrimOp::Div => "div",
            PrimOp::Exp => "exp",
            PrimOp::Sin => "sin",
            PrimOp::Cos => "cos",
            PrimOp::Log => "log",
            PrimOp::Sqrt => "sqrt",
            PrimOp::Relu => "relu",
            PrimOp::Abs => "abs",
            PrimOp::ReciprocalNoNan => "reciprocal_no_nan",
            PrimOp::Zero => "zero",
        }
    }

    pub fn from_name(name: &str) -> Option<PrimOp> {
        PrimOp::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            PrimOp::Add | PrimOp::Sub | PrimOp::Mult | PrimOp::Div => 2,
            _ => 1,
        }
    }

    fn domain_error<T: Scalar>(self, args: &[T]) -> EvalError {
        EvalError::Domain {
            primitive: self.name(),
            args: args.iter().map(Scalar::primal).collect(),
        }
    }

    /// Checks arity and the primitive's domain on the primal values.
    fn check<T: Scalar>(self, args: &[T]) -> Result<(), EvalError> {
        if args.len() != self.arity() {
            return Err(EvalError::LengthMismatch {
                expected: self.arity(),
                found: args.len(),
            });
        }
        let ok = match self {
            PrimOp::Div => args[1].primal() != 0.0,
            PrimOp::Log => args[0].primal() > 0.0,
            PrimOp::Sqrt => args[0].primal() >= 0.0,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(self.domain_error(args))
        }
    }

    /// Scalar evaluation. Uses exactly the floating-point operations of the
    /// owning piece's component, so it agrees bit-for-bit with the piece table.
    pub fn eval_f64(self, args: &[f64]) -> Result<f64, EvalError> {
        self.check(args)?;
        let x = args[0];
        let value = match self {
            PrimOp::Add => x + args[1],
            PrimOp::Sub => x - args[1],
            PrimOp::Mult => x * args[1],
            PrimOp::Neg => -x,
            PrimOp::Div => x / args[1],
            PrimOp::Exp => x.exp(),
            PrimOp::Sin => x.sin(),
            PrimOp::Cos => x.cos(),
            PrimOp::Log => x.ln(),
            PrimOp::Sqrt => {
                if x > 0.0 {
                    x.sqrt()
                } else {
                    0.0
                }
            }
            PrimOp::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            PrimOp::Abs => {
                if x > 0.0 {
                    x
                } else {
                    -x
                }
            }
            PrimOp::ReciprocalNoNan => {
                if x != 0.0 {
                    1.0 / x
                } else {
                    0.0
                }
            }
            PrimOp::Zero => 0.0,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite {
                primitive: self.name(),
                args: args.to_vec(),
            })
        }
    }

    /// The designated derivative row at `args`, evaluated in any carrier.
    ///
    /// Never NaN or infinite inside the domain: boundary points take the
    /// slope of the piece that owns them.
    pub fn ideriv<T: Scalar>(self, args: &[T]) -> Result<Vec<T>, EvalError> {
        self.check(args)?;
        let c = T::from_f64;
        let x = args[0].clone();
        let row = match self {
            PrimOp::Add => vec![c(1.0), c(1.0)],
            PrimOp::Sub => vec![c(1.0), c(-1.0)],
            PrimOp::Mult => vec![args[1].clone(), x],
            PrimOp::Neg => vec![c(-1.0)],
            PrimOp::Div => {
                let y = args[1].clone();
                vec![c(1.0) / y.clone(), -(x / (y.clone() * y))]
            }
            PrimOp::Exp => vec![T::apply_primitive(PrimOp::Exp, args)?],
            PrimOp::Sin => vec![T::apply_primitive(PrimOp::Cos, args)?],
            PrimOp::Cos => vec![-T::apply_primitive(PrimOp::Sin, args)?],
            PrimOp::Log => vec![c(1.0) / x],
            PrimOp::Sqrt => {
                if x.primal() > 0.0 {
                    vec![c(1.0) / (c(2.0) * T::apply_primitive(PrimOp::Sqrt, args)?)]
                } else {
                    vec![c(0.0)]
                }
            }
            PrimOp::Relu => vec![c(if x.primal() > 0.0 { 1.0 } else { 0.0 })],
            PrimOp::Abs => vec![c(if x.primal() > 0.0 { 1.0 } else { -1.0 })],
            PrimOp::ReciprocalNoNan => {
                if x.primal() != 0.0 {
                    vec![-(c(1.0) / (x.clone() * x))]
                } else {
                    vec![c(0.0)]
                }
            }
            PrimOp::Zero => vec![c(0.0)],
        };
        Ok(row)
    }

    fn domain_description(self) -> &'static str {
        match self {
            PrimOp::Div => "x2 != 0",
            PrimOp::Log => "x1 > 0",
            PrimOp::Sqrt => "x1 >= 0",
            _ if self.arity() == 2 => "R^2",
            _ => "R",
        }
    }

    fn piece_table(self) -> Vec<PapPiece> {
        use AnalyticExpr as E;
        let x = E::var(0);
        let y = E::var(1);
        let neg = |e: &E| E::unary(UnaryOp::Neg, e.clone());
        let whole = |component: E| vec![PapPiece::new(AnalyticSet::whole(), vec![component])];
        let piece = |guards: Vec<Guard>, component: E| PapPiece::new(AnalyticSet::new(guards), vec![component]);
        // {x = 0} as two nonpositive guards.
        let at_zero = |e: &E| vec![Guard::nonpositive(e.clone()), Guard::nonpositive(neg(e))];
        match self {
            PrimOp::Add => whole(E::binary(BinaryOp::Add, x, y)),
            PrimOp::Sub => whole(E::binary(BinaryOp::Sub, x, y)),
            PrimOp::Mult => whole(E::binary(BinaryOp::Mul, x, y)),
            PrimOp::Neg => whole(neg(&x)),
            PrimOp::Div => {
                let q = E::binary(BinaryOp::Div, x, y.clone());
                vec![
                    piece(vec![Guard::positive(y.clone())], q.clone()),
                    piece(vec![Guard::positive(neg(&y))], q),
                ]
            }
            PrimOp::Exp => whole(E::unary(UnaryOp::Exp, x)),
            PrimOp::Sin => whole(E::unary(UnaryOp::Sin, x)),
            PrimOp::Cos => whole(E::unary(UnaryOp::Cos, x)),
            PrimOp::Log => vec![piece(vec![Guard::positive(x.clone())], E::unary(UnaryOp::Log, x))],
            PrimOp::Sqrt => vec![
                piece(vec![Guard::positive(x.clone())], E::unary(UnaryOp::Sqrt, x.clone())),
                piece(at_zero(&x), E::constant(0.0)),
            ],
            PrimOp::Relu => vec![
                piece(vec![Guard::positive(x.clone())], x.clone()),
                piece(vec![Guard::nonpositive(x)], E::constant(0.0)),
            ],
            PrimOp::Abs => vec![
                piece(vec![Guard::positive(x.clone())], x.clone()),
                piece(vec![Guard::nonpositive(x.clone())], neg(&x)),
            ],
            PrimOp::ReciprocalNoNan => {
                let r = E::binary(BinaryOp::Div, E::constant(1.0), x.clone());
                vec![
                    piece(vec![Guard::positive(x.clone())], r.clone()),
                    piece(vec![Guard::positive(neg(&x))], r),
                    piece(at_zero(&x), E::constant(0.0)),
                ]
            }
            PrimOp::Zero => whole(E::constant(0.0)),
        }
    }
}

/// A registered primitive with its piece table.
#[derive(Clone, Debug)]
pub struct Primitive {
    pub op: PrimOp,
    pub name: &'static str,
    pub arity: usize,
    /// Human-readable domain; the domain itself is the union of the piece cells.
    pub domain: &'static str,
    pub pieces: PapRepr,
}

impl Primitive {
    fn build(op: PrimOp) -> Primitive {
        let pieces = PapRepr::new(op.arity(), 1, op.piece_table()).expect("primitive piece tables are well-formed");
        Primitive {
            op,
            name: op.name(),
            arity: op.arity(),
            domain: op.domain_description(),
            pieces,
        }
    }

    pub fn in_domain(&self, args: &[f64]) -> bool {
        self.op.check(args).is_ok()
    }

    pub fn eval(&self, args: &[f64]) -> Result<f64, EvalError> {
        self.op.eval_f64(args)
    }

    pub fn info(&self) -> PrimitiveInfo {
        PrimitiveInfo {
            name: self.name,
            arity: self.arity,
            domain: self.domain,
            pieces: self.pieces.pieces.len(),
        }
    }
}

/// Registry listing entry.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PrimitiveInfo {
    pub name: &'static str,
    pub arity: usize,
    pub domain: &'static str,
    pub pieces: usize,
}

pub fn registry() -> &'static [Primitive] {
    static REGISTRY: OnceLock<Vec<Primitive>> = OnceLock::new();
    REGISTRY.get_or_init(|| PrimOp::ALL.into_iter().map(Primitive::build).collect())
}

pub fn lookup(name: &str) -> Result<&'static Primitive, UnknownPrimitive> {
    registry()
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| UnknownPrimitive(name.to_string()))
}

pub fn primitive(op: PrimOp) -> &'static Primitive {
    &registry()[PrimOp::ALL.iter().position(|o| *o == op).expect("registered")]
}

/// Designated derivative row of `p` at `args`.
pub fn primitive_ideriv(p: &Primitive, args: &[f64]) -> Result<Vec<f64>, EvalError> {
    p.op.ideriv(args)
}

/// Outcome of checking a primitive's derivative row against finite differences.
#[derive(Clone, Debug, Serialize)]
pub struct PrimitiveReport {
    pub name: &'static str,
    pub samples: usize,
    pub agree: usize,
    pub agreement_fraction: f64,
    pub worst_rel_err: f64,
    pub worst_point: Vec<f64>,
    /// Points where the derivative row disagreed with finite differences.
    pub failures: Vec<Vec<f64>>,
    /// Draws outside the domain, or whose perturbation left it.
    pub skipped: usize,
}

/// Compares `ideriv` with central differences at `count` sampled points.
pub fn validate_primitive(p: &Primitive, sampler: &Sampler, count: usize, tol: f64) -> PrimitiveReport {
    let mut report = PrimitiveReport {
        name: p.name,
        samples: 0,
        agree: 0,
        agreement_fraction: 0.0,
        worst_rel_err: 0.0,
        worst_point: Vec::new(),
        failures: Vec::new(),
        skipped: 0,
    };
    for x in sampler.points(count) {
        let Ok(row) = p.op.ideriv(&x) else {
            report.skipped += 1;
            continue;
        };
        let fd: Option<Vec<f64>> = (0..p.arity).map(|i| central_difference(|v| p.eval(v), &x, i)).collect();
        let Some(fd) = fd else {
            report.skipped += 1;
            continue;
        };
        report.samples += 1;
        let err = row.iter().zip(&fd).map(|(a, b)| rel_err(*a, *b)).fold(0.0, f64::max);
        if err > report.worst_rel_err || report.worst_point.is_empty() {
            report.worst_rel_err = report.worst_rel_err.max(err);
            report.worst_point = x.clone();
        }
        if err <= tol {
            report.agree += 1;
        } else {
            report.failures.push(x);
        }
    }
    if report.samples > 0 {
        report.agreement_fraction = report.agree as f64 / report.samples as f64;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_examples() {
        assert_eq!(lookup("relu").unwrap().arity, 1);
        assert_eq!(lookup("mult").unwrap().arity, 2);
        assert_eq!(lookup("bogus").unwrap_err(), UnknownPrimitive("bogus".into()));
    }

    #[test]
    fn boundary_derivatives() {
        let at = |name: &str, x: f64| primitive_ideriv(lookup(name).unwrap(), &[x]).unwrap();
        assert_eq!(at("relu", 0.0), vec![0.0]);
        assert_eq!(at("sqrt", 0.0), vec![0.0]);
        assert_eq!(at("reciprocal_no_nan", 0.5), vec![-4.0]);
        assert_eq!(at("reciprocal_no_nan", 0.0), vec![0.0]);
        assert_eq!(at("abs", 0.0), vec![-1.0]);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            lookup("sqrt").unwrap().eval(&[-1.0]),
            Err(EvalError::Domain { primitive: "sqrt", .. })
        ));
        assert!(lookup("log").unwrap().eval(&[0.0]).is_err());
        assert!(lookup("div").unwrap().eval(&[1.0, 0.0]).is_err());
        assert!(primitive_ideriv(lookup("log").unwrap(), &[-2.0]).is_err());
        assert_eq!(lookup("sqrt").unwrap().eval(&[0.0]), Ok(0.0));
    }

    #[test]
    fn overflow_is_an_error() {
        assert!(matches!(
            lookup("exp").unwrap().eval(&[1000.0]),
            Err(EvalError::NonFinite { .. })
        ));
    }

    #[test]
    fn names_round_trip() {
        for op in PrimOp::ALL {
            assert_eq!(PrimOp::from_name(op.name()), Some(op));
        }
        assert_eq!(registry().len(), PrimOp::ALL.len());
    }

    fn probe_points(p: &Primitive) -> Vec<Vec<f64>> {
        let grid = [-2.5, -1.0, -0.3, -0.0, 0.0, 1e-9, 0.3, 1.0, 2.5];
        if p.arity == 1 {
            grid.iter().map(|x| vec![*x]).collect()
        } else {
            grid.iter()
                .flat_map(|a| grid.iter().map(move |b| vec![*a, *b]))
                .collect()
        }
    }

    #[test]
    fn piece_table_matches_scalar_evaluation_exactly() {
        for p in registry() {
            for x in probe_points(p) {
                match p.eval(&x) {
                    Ok(v) => assert_eq!(p.pieces.eval(&x).unwrap(), vec![v], "{} at {x:?}", p.name),
                    Err(_) => assert!(p.pieces.eval(&x).is_err(), "{} at {x:?}", p.name),
                }
            }
        }
    }

    #[test]
    fn ideriv_matches_piece_table_derivative_exactly() {
        for p in registry() {
            let d = p.pieces.derivative();
            for x in probe_points(p) {
                if let Ok(row) = primitive_ideriv(p, &x) {
                    assert_eq!(d.eval(&x).unwrap(), row, "{} at {x:?}", p.name);
                }
            }
        }
    }

    #[test]
    fn registry_json_fields() {
        let info = lookup("sqrt").unwrap().info();
        assert_eq!(info.pieces, 2);
        assert_eq!(info.domain, "x1 >= 0");
    }

    #[test]
    fn validate_relu_and_exp() {
        let relu = validate_primitive(lookup("relu").unwrap(), &Sampler::uniform(1, -1.0, 1.0, 7), 1000, 1e-4);
        assert!(relu.agreement_fraction >= 0.999, "{relu:?}");
        let exp = validate_primitive(lookup("exp").unwrap(), &Sampler::uniform(1, -2.0, 2.0, 7), 1000, 1e-4);
        assert_eq!(exp.agreement_fraction, 1.0);
        let zero = validate_primitive(lookup("zero").unwrap(), &Sampler::uniform(1, -5.0, 5.0, 7), 200, 1e-4);
        assert_eq!(zero.agreement_fraction, 1.0);
    }

    #[test]
    fn validate_every_primitive_on_its_domain() {
        for p in registry() {
            let (lo, hi) = match p.op {
                PrimOp::Log | PrimOp::Sqrt => (0.1, 3.0),
                _ => (-3.0, 3.0),
            };
            let mut sampler = Sampler::uniform(p.arity, lo, hi, 11);
            if p.op == PrimOp::Div {
                sampler = Sampler::new(vec![(-3.0, 3.0), (0.5, 3.0)], 11);
            }
            let r = validate_primitive(p, &sampler, 500, 1e-4);
            assert!(r.agreement_fraction >= 0.99, "{r:?}");
        }
    }
}
