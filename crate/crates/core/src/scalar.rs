//! Number types the evaluator can run over.
//!
//! Plain `f64` gives the ordinary semantics. [`Dual`] carries one tangent and
//! is used for forward mode; it can be nested statically (`Dual<Dual<f64>>`).
//! [`Jet`] is the same tower built at runtime, so the nesting depth can be
//! chosen per call (higher-order derivatives).
//!
//! Dual-like types never evaluate a primitive's derivative themselves: they
//! ask the primitive for its designated derivative row via
//! [`PrimOp::ideriv`], evaluated one level down. That is what makes the
//! tangent of `relu` at `0` equal to `0` rather than whatever a generic rule
//! would produce.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::EvalError;
use crate::primitives::PrimOp;

/// Arithmetic carrier for program evaluation.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;

    /// The real part; branch decisions are made on this value.
    fn primal(&self) -> f64;

    /// Apply a registered primitive.
    fn apply_primitive(op: PrimOp, args: &[Self]) -> Result<Self, EvalError>;
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }

    fn primal(&self) -> f64 {
        *self
    }

    fn apply_primitive(op: PrimOp, args: &[Self]) -> Result<Self, EvalError> {
        op.eval_f64(args)
    }
}

/// First-order dual number `primal + tangent·ε` with `ε² = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<T> {
    pub primal: T,
    pub tangent: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(primal: T, tangent: T) -> Self {
        Dual { primal, tangent }
    }

    pub fn constant(c: T) -> Self {
        Dual {
            primal: c,
            tangent: T::from_f64(0.0),
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.primal + rhs.primal, self.tangent + rhs.tangent)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.primal - rhs.primal, self.tangent - rhs.tangent)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let tangent = self.primal.clone() * rhs.tangent + self.tangent * rhs.primal.clone();
        Dual::new(self.primal * rhs.primal, tangent)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let quotient = self.primal / rhs.primal.clone();
        let tangent = (self.tangent - quotient.clone() * rhs.tangent) / rhs.primal;
        Dual::new(quotient, tangent)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.primal, -self.tangent)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(c: f64) -> Self {
        Dual::constant(T::from_f64(c))
    }

    fn primal(&self) -> f64 {
        self.primal.primal()
    }

    fn apply_primitive(op: PrimOp, args: &[Self]) -> Result<Self, EvalError> {
        let primals: Vec<T> = args.iter().map(|a| a.primal.clone()).collect();
        let value = T::apply_primitive(op, &primals)?;
        let row = op.ideriv(&primals)?;
        let tangent = row
            .into_iter()
            .zip(args)
            .map(|(d, a)| d * a.tangent.clone())
            .reduce(|acc, t| acc + t)
            .unwrap_or_else(|| T::from_f64(0.0));
        Ok(Dual::new(value, tangent))
    }
}

/// Runtime-depth tower of dual numbers.
///
/// A `Jet` of level `L` is `primal + tangent·ε_L` where both parts have level
/// at most `L - 1`. A value of lower level than its partner in a binary
/// operation is constant in the partner's top infinitesimal.
#[derive(Clone, Debug, PartialEq)]
pub enum Jet {
    Real(f64),
    Dual {
        level: u32,
        primal: Box<Jet>,
        tangent: Box<Jet>,
    },
}

impl Jet {
    pub fn level(&self) -> u32 {
        match self {
            Jet::Real(_) => 0,
            Jet::Dual { level, .. } => *level,
        }
    }

    pub fn dual(level: u32, primal: Jet, tangent: Jet) -> Jet {
        debug_assert!(level >= 1);
        debug_assert!(primal.level() < level && tangent.level() < level);
        Jet::Dual {
            level,
            primal: Box::new(primal),
            tangent: Box::new(tangent),
        }
    }

    /// Split into `(primal, tangent)` with respect to `ε_level`.
    fn split(&self, level: u32) -> (Jet, Jet) {
        match self {
            Jet::Dual {
                level: l,
                primal,
                tangent,
            } if *l == level => ((**primal).clone(), (**tangent).clone()),
            _ => (self.clone(), Jet::Real(0.0)),
        }
    }

    /// Coefficient of `ε_1·ε_2·…·ε_level`.
    pub fn mixed_coefficient(&self, level: u32) -> f64 {
        match self {
            Jet::Real(c) if level == 0 => *c,
            Jet::Real(_) => 0.0,
            Jet::Dual { level: l, tangent, .. } if *l == level => tangent.mixed_coefficient(level - 1),
            // No dependence on ε_level.
            Jet::Dual { .. } => 0.0,
        }
    }

    fn binary(self, rhs: Jet, real: impl Fn(f64, f64) -> f64, dual: impl Fn(Dual<Jet>, Dual<Jet>) -> Dual<Jet>) -> Jet {
        if let (Jet::Real(a), Jet::Real(b)) = (&self, &rhs) {
            return Jet::Real(real(*a, *b));
        }
        let level = self.level().max(rhs.level());
        let (ap, at) = self.split(level);
        let (bp, bt) = rhs.split(level);
        let out = dual(Dual::new(ap, at), Dual::new(bp, bt));
        Jet::dual(level, out.primal, out.tangent)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.binary(rhs, |a, b| a + b, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.binary(rhs, |a, b| a - b, |a, b| a - b)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.binary(rhs, |a, b| a * b, |a, b| a * b)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.binary(rhs, |a, b| a / b, |a, b| a / b)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        match self {
            Jet::Real(c) => Jet::Real(-c),
            Jet::Dual { level, primal, tangent } => Jet::dual(level, -*primal, -*tangent),
        }
    }
}

impl Scalar for Jet {
    fn from_f64(c: f64) -> Self {
        Jet::Real(c)
    }

    fn primal(&self) -> f64 {
        match self {
            Jet::Real(c) => *c,
            Jet::Dual { primal, .. } => primal.primal(),
        }
    }

    fn apply_primitive(op: PrimOp, args: &[Self]) -> Result<Self, EvalError> {
        let level = args.iter().map(Jet::level).max().unwrap_or(0);
        if level == 0 {
            let reals: Vec<f64> = args.iter().map(Jet::primal).collect();
            return op.eval_f64(&reals).map(Jet::Real);
        }
        let (primals, tangents): (Vec<Jet>, Vec<Jet>) = args.iter().map(|a| a.split(level)).unzip();
        let value = Jet::apply_primitive(op, &primals)?;
        let row = op.ideriv(&primals)?;
        let tangent = row
            .into_iter()
            .zip(tangents)
            .map(|(d, t)| d * t)
            .reduce(|acc, t| acc + t)
            .unwrap_or(Jet::Real(0.0));
        Ok(Jet::dual(level, value, tangent))
    }
}
