//! Finite-difference steps and error measures shared by the checkers.

/// Relative step used for central differences: `h = FD_STEP_SCALE · max(1, |x|)`.
pub const FD_STEP_SCALE: f64 = 1e-5;

/// Default agreement tolerance between intensional and finite-difference derivatives.
pub const FD_REL_TOL: f64 = 1e-4;

pub fn fd_step(x: f64) -> f64 {
    FD_STEP_SCALE * x.abs().max(1.0)
}

/// `|a - b| / max(1, |a|, |b|)`: relative error with a unit floor, so values
/// near zero are compared absolutely.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    rel_err(a, b) <= tol
}

/// Largest [`rel_err`] over two equal-length slices.
pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| rel_err(*x, *y)).fold(0.0, f64::max)
}

/// Central difference of `f` along coordinate `i` at `x`.
///
/// Returns `None` when either perturbed evaluation fails (the point leaves
/// the function's domain).
pub fn central_difference<F, E>(f: F, x: &[f64], i: usize) -> Option<f64>
where
    F: Fn(&[f64]) -> Result<f64, E>,
{
    let h = fd_step(x[i]);
    let mut p = x.to_vec();
    p[i] = x[i] + h;
    let plus = f(&p).ok()?;
    p[i] = x[i] - h;
    let minus = f(&p).ok()?;
    // Use the step actually represented in floating point.
    let span = (x[i] + h) - (x[i] - h);
    Some((plus - minus) / span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_difference_of_cube() {
        let f = |v: &[f64]| -> Result<f64, ()> { Ok(v[0] * v[0] * v[0]) };
        let d = central_difference(f, &[2.0], 0).unwrap();
        assert!(rel_close(d, 12.0, 1e-8));
    }

    #[test]
    fn central_difference_reports_domain_exit() {
        let f = |v: &[f64]| if v[0] < 0.0 { Err(()) } else { Ok(v[0].sqrt()) };
        assert!(central_difference(f, &[0.0], 0).is_none());
    }

    #[test]
    fn rel_err_has_unit_floor() {
        assert_eq!(rel_err(0.0, 1e-6), 1e-6);
        assert!((rel_err(100.0, 101.0) - 1.0 / 101.0).abs() < 1e-15);
    }
}
