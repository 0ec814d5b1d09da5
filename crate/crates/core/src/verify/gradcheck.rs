use rayon::prelude::*;
use serde::Serialize;

use super::Sampler;
use crate::autodiff::symbolic_jacobian;
use crate::error::EvalError;
use crate::expr::{eval_at, Expr, InputVector};
use crate::numeric::{central_difference, fd_step, rel_err};
use crate::primitives::PrimOp;

/// A sampled point where the derivative row and finite differences disagree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub point: Vec<f64>,
    pub intensional: Vec<f64>,
    /// `None` where the perturbed point left the domain.
    pub finite_difference: Vec<Option<f64>>,
    /// Whether some branch decision differs between `x - h·eᵢ` and `x + h·eᵢ`
    /// along a disagreeing coordinate.
    pub branch_flip: bool,
    /// Distance from the point to the nearest branch flip located by
    /// bisection along a disagreeing coordinate, when one was observed.
    pub flip_distance: Option<f64>,
    /// Smallest `|switch value|` among the branch decisions taken at the point
    /// (conditional guards and the arguments of piecewise primitives).
    pub guard_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub samples: usize,
    pub agree: usize,
    pub agreement_fraction: f64,
    pub worst_rel_err: f64,
    pub failures: Vec<Failure>,
    /// Points where the program itself failed to evaluate.
    #[serde(skip)]
    pub skipped_points: usize,
    /// Coordinates whose perturbation left the domain.
    #[serde(skip)]
    pub skipped_coordinates: usize,
}

enum PointOutcome {
    Skipped,
    Checked {
        worst: f64,
        skipped_coords: usize,
        failure: Option<Failure>,
    },
}

/// Value at which a branch decision switches, for every decision taken while
/// evaluating `e` at `x`.
fn switch_values(e: &Expr, x: &[f64], out: &mut Vec<f64>) -> Result<f64, EvalError> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Input(i) => Ok(x[i - 1]),
        Expr::Call(op, args) => {
            let vals = args
                .iter()
                .map(|a| switch_values(a, x, out))
                .collect::<Result<Vec<_>, _>>()?;
            match op {
                PrimOp::Relu | PrimOp::Abs | PrimOp::Sqrt | PrimOp::ReciprocalNoNan => out.push(vals[0]),
                PrimOp::Div => out.push(vals[1]),
                _ => {}
            }
            op.eval_f64(&vals)
        }
        Expr::Cond(g, t, f) => {
            let gv = switch_values(g, x, out)?;
            out.push(gv);
            if gv > 0.0 {
                switch_values(t, x, out)
            } else {
                switch_values(f, x, out)
            }
        }
    }
}

fn branch_signature(e: &Expr, x: &[f64]) -> Option<Vec<bool>> {
    let mut vals = Vec::new();
    switch_values(e, x, &mut vals).ok()?;
    Some(vals.iter().map(|v| *v > 0.0).collect())
}

/// Bisects `[x - h, x + h]` along coordinate `i` for the point where the
/// branch signature changes, if the two ends differ.
fn flip_distance(e: &Expr, x: &[f64], i: usize) -> Option<f64> {
    let h = fd_step(x[i]);
    let at = |t: f64| {
        let mut p = x.to_vec();
        p[i] = t;
        branch_signature(e, &p)
    };
    let (mut lo, mut hi) = (x[i] - h, x[i] + h);
    let left = at(lo);
    if left == at(hi) {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid) == left {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((x[i] - lo).abs().min((x[i] - hi).abs()))
}

fn check_point(e: &Expr, x: &[f64], tol: f64) -> PointOutcome {
    let Ok(v) = InputVector::try_from(x) else {
        return PointOutcome::Skipped;
    };
    let Ok(row) = symbolic_jacobian(e, &v) else {
        return PointOutcome::Skipped;
    };
    let fd: Vec<Option<f64>> = (0..x.len())
        .map(|i| central_difference(|p| eval_at(e, p), x, i))
        .collect();
    let skipped_coords = fd.iter().filter(|d| d.is_none()).count();
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (i, (a, b)) in row.0.iter().zip(&fd).enumerate() {
        if let Some(b) = b {
            let err = rel_err(*a, *b);
            worst = worst.max(err);
            if err > tol {
                bad.push(i);
            }
        }
    }
    let failure = (!bad.is_empty()).then(|| {
        let mut vals = Vec::new();
        let _ = switch_values(e, x, &mut vals);
        let guard_margin = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let distances: Vec<Option<f64>> = bad.iter().map(|&i| flip_distance(e, x, i)).collect();
        Failure {
            point: x.to_vec(),
            intensional: row.0.clone(),
            finite_difference: fd.clone(),
            branch_flip: distances.iter().any(Option::is_some),
            flip_distance: distances.into_iter().flatten().reduce(f64::min),
            guard_margin,
        }
    });
    PointOutcome::Checked {
        worst,
        skipped_coords,
        failure,
    }
}

/// Compares the symbolic derivative row with central finite differences at
/// `count` points drawn from `sampler`. A point agrees when every coordinate
/// that stayed in the domain under perturbation is within `tol`
/// (see [`rel_err`]).
pub fn gradcheck(e: &Expr, sampler: &Sampler, count: usize, tol: f64) -> GradCheckReport {
    let outcomes: Vec<PointOutcome> = sampler
        .points(count)
        .par_iter()
        .map(|x| check_point(e, x, tol))
        .collect();
    let mut report = GradCheckReport {
        samples: 0,
        agree: 0,
        agreement_fraction: 0.0,
        worst_rel_err: 0.0,
        failures: Vec::new(),
        skipped_points: 0,
        skipped_coordinates: 0,
    };
    for o in outcomes {
        match o {
            PointOutcome::Skipped => report.skipped_points += 1,
            PointOutcome::Checked {
                worst,
                skipped_coords,
                failure,
            } => {
                report.samples += 1;
                report.skipped_coordinates += skipped_coords;
                report.worst_rel_err = report.worst_rel_err.max(worst);
                match failure {
                    Some(f) => report.failures.push(f),
                    None => report.agree += 1,
                }
            }
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
    use crate::expr::parse;

    #[test]
    fn relu_gradcheck() {
        let e = parse("relu(x1)", 1).unwrap();
        let r = gradcheck(&e, &Sampler::uniform(1, -1.0, 1.0, 1), 1000, 1e-4);
        assert_eq!(r.samples, 1000);
        assert!(r.agreement_fraction >= 0.995, "{r:?}");
        assert_eq!(r.agree + r.failures.len(), r.samples);
    }

    #[test]
    fn sqrt_of_zero_product_gradcheck() {
        let e = parse("sqrt(mult(x1, 0))", 1).unwrap();
        let r = gradcheck(&e, &Sampler::uniform(1, -5.0, 5.0, 2), 1000, 1e-4);
        assert_eq!(r.agreement_fraction, 1.0);
        assert_eq!(r.worst_rel_err, 0.0);
    }

    #[test]
    fn square_gradcheck() {
        let e = parse("mult(x1, x1)", 1).unwrap();
        let r = gradcheck(&e, &Sampler::uniform(1, -3.0, 3.0, 3), 1000, 1e-4);
        assert_eq!(r.agreement_fraction, 1.0);
    }

    #[test]
    fn failure_forensics_at_a_kink() {
        let e = parse("relu(x1)", 1).unwrap();
        // Force the sampler onto the kink.
        let r = gradcheck(&e, &Sampler::new(vec![(0.0, 0.0)], 1), 3, 1e-4);
        assert_eq!(r.agree, 0);
        let f = &r.failures[0];
        assert!(f.branch_flip);
        assert!(f.flip_distance.unwrap() < 1e-15);
        assert_eq!(f.guard_margin, 0.0);
        assert_eq!(f.intensional, vec![0.0]);
        assert_eq!(f.finite_difference, vec![Some(0.5)]);
    }

    #[test]
    fn domain_exits_are_counted_separately() {
        let e = parse("sqrt(x1)", 1).unwrap();
        let r = gradcheck(&e, &Sampler::new(vec![(0.0, 0.0)], 1), 2, 1e-4);
        assert_eq!(r.skipped_coordinates, 2);
        let e = parse("log(x1)", 1).unwrap();
        let r = gradcheck(&e, &Sampler::uniform(1, -2.0, -1.0, 1), 10, 1e-4);
        assert_eq!(r.skipped_points, 10);
        assert_eq!(r.samples, 0);
    }

    #[test]
    fn report_json_has_exactly_the_report_fields() {
        let e = parse("x1", 1).unwrap();
        let r = gradcheck(&e, &Sampler::uniform(1, -1.0, 1.0, 1), 5, 1e-4);
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["agree", "agreement_fraction", "failures", "samples", "worst_rel_err"]
        );
    }
}
