//! Finite-depth Cantor constructions and difference-quotient probes.
//!
//! The limits in the classical constructions are replaced by a fixed depth
//! `K`: the step-`k` removed intervals are stored for `k ≤ K`, and the Cantor
//! function is linearly interpolated across each depth-`K` surviving interval.
//! None of these functions are language primitives.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::GalleryError;

/// Depth used when none is given.
pub const DEFAULT_DEPTH: u32 = 20;

/// Largest supported depth; the interval table holds `2ᴷ - 1` entries.
pub const MAX_DEPTH: u32 = 26;

/// Required accuracy of `F(f(x)) = x`.
pub const INVERSE_TOL: f64 = 1e-12;

/// Where a point sits in the depth-`K` construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    /// Inside the open removed interval `index` of step `step`.
    Removed {
        step: u32,
        index: usize,
        interval: (f64, f64),
    },
    /// In the closed depth-`K` surviving interval `index`.
    Surviving { index: usize, interval: (f64, f64) },
}

/// Interval bookkeeping for the depth-`K` approximation of `C_λ`.
#[derive(Clone, Debug)]
pub struct CantorApprox {
    lambda: f64,
    depth: u32,
    /// `removed[k - 1][j]` is the open interval removed at step `k` from the
    /// `j`-th (left to right) interval surviving step `k - 1`.
    removed: Vec<Vec<(f64, f64)>>,
}

impl CantorApprox {
    pub fn new(lambda: f64, depth: u32) -> Result<Self, GalleryError> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(GalleryError::InvalidParameter(format!(
                "lambda must lie in (0, 1], got {lambda}"
            )));
        }
        if depth == 0 || depth > MAX_DEPTH {
            return Err(GalleryError::InvalidParameter(format!(
                "depth must lie in 1..={MAX_DEPTH}, got {depth}"
            )));
        }
        let mut removed = Vec::with_capacity(depth as usize);
        let mut surviving = vec![(0.0f64, 1.0f64)];
        let mut third = 1.0f64;
        for _ in 0..depth {
            third /= 3.0;
            let half = lambda * third / 2.0;
            let mut step = Vec::with_capacity(surviving.len());
            let mut next = Vec::with_capacity(2 * surviving.len());
            for &(a, b) in &surviving {
                let m = (a + b) / 2.0;
                let (l, r) = (m - half, m + half);
                step.push((l, r));
                next.push((a, l));
                next.push((r, b));
            }
            removed.push(step);
            surviving = next;
        }
        Ok(CantorApprox { lambda, depth, removed })
    }

    /// A table shared across calls with the same parameters.
    pub fn shared(lambda: f64, depth: u32) -> Result<Arc<CantorApprox>, GalleryError> {
        type Cache = Mutex<HashMap<(u64, u32), Arc<CantorApprox>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = (lambda.to_bits(), depth);
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().expect("cache lock").get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(CantorApprox::new(lambda, depth)?);
        cache.lock().expect("cache lock").insert(key, table.clone());
        Ok(table)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// The `2^{k-1}` open intervals removed at step `k`, left to right.
    pub fn removed(&self, step: u32) -> &[(f64, f64)] {
        &self.removed[step as usize - 1]
    }

    /// Surviving closed interval `index` after `step` removals.
    pub fn surviving(&self, step: u32, index: usize) -> (f64, f64) {
        assert!(step <= self.depth && index < 1usize << step);
        let (mut a, mut b) = (0.0, 1.0);
        for k in 1..=step {
            let bit = (index >> (step - k)) & 1;
            let (l, r) = self.removed[k as usize - 1][index >> (step - k + 1)];
            if bit == 0 {
                b = l;
            } else {
                a = r;
            }
        }
        (a, b)
    }

    /// Total length removed through the configured depth.
    pub fn removed_length(&self) -> f64 {
        self.removed.iter().flat_map(|s| s.iter().map(|(l, r)| r - l)).sum()
    }

    fn check(x: f64) -> Result<(), GalleryError> {
        if (0.0..=1.0).contains(&x) {
            Ok(())
        } else {
            Err(GalleryError::OutOfRange(x))
        }
    }

    /// Descends the construction, stopping at the first removed interval
    /// that contains `x`. Points on a removed interval's boundary belong to
    /// the surviving side.
    pub fn locate(&self, x: f64) -> Result<Location, GalleryError> {
        Self::check(x)?;
        Ok(self.locate_to(x, self.depth))
    }

    fn locate_to(&self, x: f64, depth: u32) -> Location {
        let (mut a, mut b, mut j) = (0.0, 1.0, 0usize);
        for k in 1..=depth {
            let (l, r) = self.removed[k as usize - 1][j];
            if l < x && x < r {
                return Location::Removed {
                    step: k,
                    index: j,
                    interval: (l, r),
                };
            }
            if x <= l {
                b = l;
                j *= 2;
            } else {
                a = r;
                j = 2 * j + 1;
            }
        }
        Location::Surviving {
            index: j,
            interval: (a, b),
        }
    }

    /// `φ_λ(x)`: `(2j + 1)/2ᵏ` on the removed interval `j` (zero-based) of
    /// step `k`, and linear from `j/2ᴷ` to `(j + 1)/2ᴷ` across surviving
    /// interval `j`.
    pub fn phi(&self, x: f64) -> Result<f64, GalleryError> {
        Self::check(x)?;
        Ok(self.phi_unchecked(x))
    }

    fn phi_unchecked(&self, x: f64) -> f64 {
        match self.locate_to(x, self.depth) {
            Location::Removed { step, index, .. } => plateau(step, index),
            Location::Surviving {
                index,
                interval: (a, b),
            } => (index as f64 + (x - a) / (b - a)) / pow2(self.depth),
        }
    }

    /// Whether `x` survives all `K` removal steps.
    pub fn contains(&self, x: f64) -> bool {
        (0.0..=1.0).contains(&x) && matches!(self.locate_to(x, self.depth), Location::Surviving { .. })
    }
}

fn pow2(k: u32) -> f64 {
    2f64.powi(k as i32)
}

fn plateau(step: u32, index: usize) -> f64 {
    (2 * index + 1) as f64 / pow2(step)
}

/// `d(k) = ½·2⁻ᵏ + ¾·3⁻ᵏ`, half the length of a step-`(k-1)` surviving
/// interval of `C_{1/2}`.
pub fn quotient_bound(k: u32) -> f64 {
    0.5 * 2f64.powi(-(k as i32)) + 0.75 * 3f64.powi(-(k as i32))
}

/// `φ_λ(x)` at depth `K`.
pub fn cantor_fn(lambda: f64, depth: u32, x: f64) -> Result<f64, GalleryError> {
    CantorApprox::shared(lambda, depth)?.phi(x)
}

/// The depth-`K` homeomorphism `F(x) = ½(φ₁(x) + x)` and its inverse `f`,
/// together with the bump function `g` over `C₁`.
#[derive(Clone, Debug)]
pub struct Gallery {
    one: Arc<CantorApprox>,
    half: Arc<CantorApprox>,
}

impl Gallery {
    pub fn new(depth: u32) -> Result<Self, GalleryError> {
        Ok(Gallery {
            one: CantorApprox::shared(1.0, depth)?,
            half: CantorApprox::shared(0.5, depth)?,
        })
    }

    pub fn depth(&self) -> u32 {
        self.one.depth
    }

    /// Tables for `C₁`.
    pub fn c_one(&self) -> &CantorApprox {
        &self.one
    }

    /// Tables for `C_{1/2}`.
    pub fn c_half(&self) -> &CantorApprox {
        &self.half
    }

    /// `F(x) = ½(φ₁(x) + x)`.
    pub fn big_f(&self, x: f64) -> Result<f64, GalleryError> {
        Ok(0.5 * (self.one.phi(x)? + x))
    }

    /// `f = F⁻¹` by bisection on `[0, 1]`, run until the bracket stops
    /// shrinking.
    pub fn f(&self, y: f64) -> Result<f64, GalleryError> {
        CantorApprox::check(y)?;
        let big_f = |x: f64| 0.5 * (self.one.phi_unchecked(x) + x);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if big_f(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = if (big_f(lo) - y).abs() < (big_f(hi) - y).abs() {
            lo
        } else {
            hi
        };
        // f carries each interval of the C_{1/2} construction onto the
        // matching interval of C₁. Clamping keeps rounding in the last bisection
        // step from crossing into a neighbouring interval.
        let (a, b) = match self.half.locate_to(y, self.depth()) {
            Location::Removed { step, index, .. } => self.one.removed(step)[index],
            Location::Surviving { index, .. } => self.one.surviving(self.depth(), index),
        };
        let x = x.clamp(a, b);
        let residual = (big_f(x) - y).abs();
        if residual > INVERSE_TOL {
            return Err(GalleryError::BisectionFailed { target: y, residual });
        }
        Ok(x)
    }

    /// `g(y) = 2⁻ᵏ[1 - (y - c)²/h²]` on a step-`k` removed interval of `C₁`
    /// with center `c` and half-length `h`, and 0 on the depth-`K` survivors.
    pub fn g(&self, y: f64) -> Result<f64, GalleryError> {
        Ok(match self.one.locate(y)? {
            Location::Removed {
                step, interval: (l, r), ..
            } => {
                let c = (l + r) / 2.0;
                let h = (r - l) / 2.0;
                let t = (y - c) / h;
                (1.0 - t * t) / pow2(step)
            }
            Location::Surviving { .. } => 0.0,
        })
    }

    /// `g(f(x))`.
    pub fn g_of_f(&self, x: f64) -> Result<f64, GalleryError> {
        self.g(self.f(x)?)
    }

    /// `φ₁(f(x))`, which equals `φ_{1/2}(x)`.
    pub fn phi_one_of_f(&self, x: f64) -> Result<f64, GalleryError> {
        self.one.phi(self.f(x)?)
    }

    /// Claim-1 probe around a depth-`K` point `x` of `C_{1/2}`.
    ///
    /// `x₁` is the midpoint of the depth-`K` surviving interval holding `x`
    /// (its left end when `x` is that midpoint), so `g∘f` vanishes at both
    /// and `q₁ = 0`. `x₂` is the midpoint of the step-`k` removed interval
    /// inside the step-`(k-1)` surviving interval holding `x`; `f` maps it to
    /// the midpoint of a step-`k` removed interval of `C₁`, where `g = 2⁻ᵏ`.
    pub fn probe_claim1(&self, x: f64, step: u32) -> Result<ProbeRecord, GalleryError> {
        let depth = self.depth();
        let not_found = |reason: String| GalleryError::ProbeNotFound { depth, step, reason };
        if step == 0 || step > depth {
            return Err(not_found(format!("step must lie in 1..={depth}")));
        }
        let Location::Surviving { interval: (a, b), .. } = self.half.locate(x)? else {
            return Err(not_found(format!("{x} is not in the depth-{depth} set")));
        };
        let mid = (a + b) / 2.0;
        let x1 = if mid == x { a } else { mid };
        let Location::Surviving { index, .. } = self.half.locate_to(x, step - 1) else {
            unreachable!("x survives every step");
        };
        let (l, r) = self.half.removed(step)[index];
        let x2 = (l + r) / 2.0;
        let h0 = self.g_of_f(x)?;
        let q1 = (self.g_of_f(x1)? - h0) / (x1 - x);
        let q2 = (self.g_of_f(x2)? - h0) / (x2 - x);
        let record = ProbeRecord {
            x,
            x1,
            x2,
            q1,
            q2,
            step,
            bound: quotient_bound(step),
        };
        if record.q1 != 0.0 {
            return Err(not_found(format!("q1 = {q1:e} is not zero")));
        }
        if record.q2.abs() <= 1.0 {
            return Err(not_found(format!("|q2| = {} does not exceed 1", q2.abs())));
        }
        if (x - x2).abs() > record.bound {
            return Err(not_found(format!("|x - x2| = {} exceeds d(k)", (x - x2).abs())));
        }
        Ok(record)
    }

    /// Claim-3 probe: slopes of `f` and `φ₁∘f` at `midpoints` removed-interval
    /// midpoints of `C_{1/2}` (step uniform in `1..=K`, index uniform within
    /// the step), and `|φ₁(f(x)) - φ_{1/2}(x)|` at `comparisons` uniform points.
    pub fn probe_claim3(&self, midpoints: usize, comparisons: usize, seed: u64) -> Result<Claim3Report, GalleryError> {
        let depth = self.depth();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picks: Vec<(u32, usize)> = (0..midpoints)
            .map(|_| {
                let step = rng.gen_range(1..=depth);
                (step, rng.gen_range(0..1usize << (step - 1)))
            })
            .collect();
        let samples: Vec<f64> = (0..comparisons).map(|_| rng.gen_range(0.0..1.0)).collect();

        let records = picks
            .par_iter()
            .map(|&(step, index)| {
                let (l, r) = self.half.removed(step)[index];
                let x = (l + r) / 2.0;
                let h = (1e-7f64).min((r - l) / 4.0);
                let span = (x + h) - (x - h);
                let f_slope = (self.f(x + h)? - self.f(x - h)?) / span;
                let composed_slope = (self.phi_one_of_f(x + h)? - self.phi_one_of_f(x - h)?) / span;
                Ok(Claim3Record {
                    x,
                    step,
                    f_slope,
                    composed_slope,
                })
            })
            .collect::<Result<Vec<_>, GalleryError>>()?;
        let diffs = samples
            .par_iter()
            .map(|&x| Ok((self.phi_one_of_f(x)? - self.half.phi(x)?).abs()))
            .collect::<Result<Vec<f64>, GalleryError>>()?;
        let max_f_slope_err = records.iter().map(|r| (r.f_slope - 2.0).abs()).fold(0.0, f64::max);
        let max_composed_slope = records.iter().map(|r| r.composed_slope.abs()).fold(0.0, f64::max);
        Ok(Claim3Report {
            depth,
            records,
            max_f_slope_err,
            max_composed_slope,
            comparisons,
            max_composition_diff: diffs.into_iter().fold(0.0, f64::max),
        })
    }
}

/// `f(x) = F⁻¹(x)` at depth `K`.
pub fn cantor_inverse_f(depth: u32, x: f64) -> Result<f64, GalleryError> {
    Gallery::new(depth)?.f(x)
}

/// The bump function `g` at depth `K`.
pub fn bump_g(depth: u32, y: f64) -> Result<f64, GalleryError> {
    Gallery::new(depth)?.g(y)
}

/// Difference quotients of `g∘f` around a point of `C_{1/2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub x: f64,
    pub x1: f64,
    pub x2: f64,
    pub q1: f64,
    pub q2: f64,
    #[serde(rename = "k")]
    pub step: u32,
    #[serde(rename = "d_k")]
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim3Record {
    pub x: f64,
    #[serde(rename = "k")]
    pub step: u32,
    pub f_slope: f64,
    pub composed_slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim3Report {
    pub depth: u32,
    pub records: Vec<Claim3Record>,
    /// Largest `|f' - 2|` over the midpoints.
    pub max_f_slope_err: f64,
    /// Largest `|(φ₁∘f)'|` over the midpoints.
    pub max_composed_slope: f64,
    pub comparisons: usize,
    pub max_composition_diff: f64,
}

impl Claim3Report {
    pub fn passed(&self, slope_tol: f64, diff_tol: f64) -> bool {
        self.max_f_slope_err <= slope_tol
            && self.max_composed_slope <= slope_tol
            && self.max_composition_diff <= diff_tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The piecewise-linear inverse read off the interval tables: on a removed
    /// interval of `C_{1/2}` with plateau `c`, `f(y) = 2y - c`; on a surviving
    /// interval it is the affine map onto the matching interval of `C₁`.
    fn exact_f(gal: &Gallery, y: f64) -> f64 {
        match gal.c_half().locate(y).unwrap() {
            Location::Removed { step, index, .. } => 2.0 * y - plateau(step, index),
            Location::Surviving {
                index,
                interval: (a, b),
            } => {
                let (a1, b1) = gal.c_one().surviving(gal.depth(), index);
                a1 + (y - a) * (b1 - a1) / (b - a)
            }
        }
    }

    #[test]
    fn first_plateau() {
        assert_eq!(cantor_fn(1.0, 1, 0.5).unwrap(), 0.5);
        assert_eq!(cantor_fn(1.0, 7, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn depth_three_small_argument() {
        let v = cantor_fn(1.0, 3, 0.01).unwrap();
        // x = 0.01 lies in the first depth-3 survivor [0, 1/27].
        assert!((0.0..=0.125).contains(&v));
        assert!((v - 0.01 * 27.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(cantor_fn(1.0, 3, 1.5), Err(GalleryError::OutOfRange(_))));
        assert!(matches!(cantor_fn(1.0, 3, f64::NAN), Err(GalleryError::OutOfRange(_))));
        assert!(CantorApprox::new(0.0, 3).is_err());
        assert!(CantorApprox::new(0.5, 0).is_err());
    }

    #[test]
    fn interval_tables() {
        for lambda in [1.0, 0.5, 0.25] {
            let c = CantorApprox::new(lambda, 10).unwrap();
            for k in 1..=10 {
                let step = c.removed(k);
                assert_eq!(step.len(), 1 << (k - 1));
                let len = lambda * 3f64.powi(-(k as i32));
                for (j, &(l, r)) in step.iter().enumerate() {
                    assert!(((r - l) - len).abs() < 1e-15);
                    let (a, b) = c.surviving(k - 1, j);
                    assert!(((l - a) - (b - r)).abs() < 1e-15, "not centered");
                }
                for w in step.windows(2) {
                    assert!(w[0].1 < w[1].0);
                }
            }
            let expected = lambda * (1.0 - (2.0f64 / 3.0).powi(10));
            assert!((c.removed_length() - expected).abs() < 1e-12);
        }
        let half = CantorApprox::new(0.5, 8).unwrap();
        for k in 1..=8 {
            let want = 0.5 * (2f64.powi(-k) + 3f64.powi(-k));
            for j in 0..1usize << k {
                let (a, b) = half.surviving(k as u32, j);
                assert!(((b - a) - want).abs() < 1e-14);
            }
        }
        let surviving: f64 = (0..1usize << 8)
            .map(|j| {
                let (a, b) = half.surviving(8, j);
                b - a
            })
            .sum();
        assert!((surviving - 0.5 * (1.0 + (2.0f64 / 3.0).powi(8))).abs() < 1e-12);
    }

    #[test]
    fn plateaus_are_exact_at_every_step() {
        let c = CantorApprox::new(1.0, 9).unwrap();
        for k in 1..=9 {
            for (j, &(l, r)) in c.removed(k).iter().enumerate() {
                let want = (2 * j + 1) as f64 / 2f64.powi(k as i32);
                assert_eq!(c.phi((l + r) / 2.0).unwrap(), want);
                assert_eq!(c.phi(l).unwrap(), want);
                assert_eq!(c.phi(r).unwrap(), want);
            }
        }
    }

    #[test]
    fn symmetry_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for lambda in [1.0, 0.5] {
            let c = CantorApprox::new(lambda, 12).unwrap();
            let mut xs: Vec<f64> = (0..5000).map(|_| rng.gen_range(0.0..1.0)).collect();
            for &x in &xs {
                let s = c.phi(x).unwrap() + c.phi(1.0 - x).unwrap();
                assert!((s - 1.0).abs() < 1e-12, "{x}");
            }
            xs.sort_by(f64::total_cmp);
            let vals: Vec<f64> = xs.iter().map(|&x| c.phi(x).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn inverse_defining_property() {
        let gal = Gallery::new(20).unwrap();
        let y = gal.f(0.37).unwrap();
        assert!((gal.big_f(y).unwrap() - 0.37).abs() <= 1e-12);
        assert_eq!(gal.f(0.0).unwrap(), 0.0);
        assert_eq!(gal.f(1.0).unwrap(), 1.0);
    }

    #[test]
    fn bisection_matches_the_exact_inverse() {
        let gal = Gallery::new(15).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut xs: Vec<f64> = (0..2000).map(|_| rng.gen_range(0.0..1.0)).collect();
        for &x in &xs {
            let got = gal.f(x).unwrap();
            assert!((got - exact_f(&gal, x)).abs() < 1e-12, "{x}");
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let fs: Vec<f64> = xs.iter().map(|&x| gal.f(x).unwrap()).collect();
        assert!(fs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn inverse_is_two_lipschitz() {
        let gal = Gallery::new(15).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let (x, y): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let d = (gal.f(x).unwrap() - gal.f(y).unwrap()).abs();
            assert!(d <= 2.0 * (x - y).abs() + 1e-11);
        }
    }

    #[test]
    fn inverse_maps_half_set_endpoints_into_the_one_set() {
        let gal = Gallery::new(12).unwrap();
        for j in (0..1usize << 12).step_by(7) {
            let (a, b) = gal.c_half().surviving(12, j);
            let (a1, b1) = gal.c_one().surviving(12, j);
            assert!((gal.f(a).unwrap() - a1).abs() < 1e-9);
            assert!((gal.f(b).unwrap() - b1).abs() < 1e-9);
        }
    }

    #[test]
    fn bump_values() {
        assert_eq!(bump_g(20, 0.5).unwrap(), 0.5);
        assert_eq!(bump_g(20, 1.0 / 3.0).unwrap(), 0.0);
        let gal = Gallery::new(10).unwrap();
        let (a, b) = gal.c_one().surviving(10, 37);
        assert_eq!(gal.g((a + b) / 2.0).unwrap(), 0.0);
        for k in 1..=10 {
            for &(l, r) in gal.c_one().removed(k).iter().take(8) {
                let top = gal.g((l + r) / 2.0).unwrap();
                assert!((top - 2f64.powi(-(k as i32))).abs() < 1e-15);
                assert!(gal.g(l).unwrap() == 0.0 && gal.g(r).unwrap() == 0.0);
            }
        }
    }

    #[test]
    fn bumps_sharpen_with_depth() {
        let gal = Gallery::new(12).unwrap();
        let mut last = 0.0;
        for k in 2..=12 {
            let (l, r) = gal.c_one().removed(k)[0];
            let h = (r - l) * 1e-6;
            let slope = (gal.g(l + 2.0 * h).unwrap() - gal.g(l + h).unwrap()) / h;
            assert!(slope > 1.0, "step {k}: {slope}");
            assert!(slope > last);
            last = slope;
        }
    }

    #[test]
    fn quotient_bound_value() {
        assert!((quotient_bound(5) - 0.018711).abs() < 1e-6);
        assert_eq!(quotient_bound(5), 0.5 / 32.0 + 0.75 / 243.0);
    }

    #[test]
    fn claim1_at_a_left_endpoint() {
        let gal = Gallery::new(12).unwrap();
        let (a, _) = gal.c_half().surviving(12, 1234);
        let rec = gal.probe_claim1(a, 5).unwrap();
        assert_eq!(rec.q1, 0.0);
        assert!(rec.q2.abs() > 1.0);
        assert!((rec.x - rec.x2).abs() <= quotient_bound(5));
        assert_eq!(gal.g_of_f(a).unwrap(), 0.0);
    }

    #[test]
    fn claim1_rejects_points_outside_the_set() {
        let gal = Gallery::new(12).unwrap();
        assert!(matches!(
            gal.probe_claim1(0.5, 5),
            Err(GalleryError::ProbeNotFound { .. })
        ));
        assert!(matches!(
            gal.probe_claim1(0.0, 13),
            Err(GalleryError::ProbeNotFound { .. })
        ));
    }

    #[test]
    fn claim3_small() {
        let gal = Gallery::new(10).unwrap();
        let rep = gal.probe_claim3(50, 200, 1).unwrap();
        assert_eq!(rep.records.len(), 50);
        assert!(rep.passed(1e-3, 1e-9), "{rep:?}");
    }
}
