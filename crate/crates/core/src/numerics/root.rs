use crate::{Error, Result};

/// Search interval and stopping rule for [`find_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    lo: f64,
    hi: f64,
    max_iterations: usize,
    tolerance: f64,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64, max_iterations: usize, tolerance: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidBracket("need finite lo < hi"));
        }
        if !(tolerance > 0.0) {
            return Err(Error::InvalidBracket("tolerance must be positive"));
        }
        if max_iterations == 0 {
            return Err(Error::InvalidBracket("max_iterations must be positive"));
        }
        Ok(Self { lo, hi, max_iterations, tolerance })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

/// Safeguarded Newton iteration starting from the bracket midpoint.
///
/// `f` returns `(value, derivative)`. A Newton step is taken when it lands
/// inside the current sign-change interval and shrinks it fast enough,
/// otherwise the interval is bisected. Iterates never leave the bracket.
pub fn find_root<F>(f: F, bracket: &RootBracket) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    find_root_from(f, bracket, 0.5 * (bracket.lo + bracket.hi))
}

/// [`find_root`] with an explicit starting point (clamped into the bracket).
pub fn find_root_from<F>(mut f: F, bracket: &RootBracket, start: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (f_lo, _) = f(bracket.lo);
    if f_lo == 0.0 {
        return Ok(bracket.lo);
    }
    let (f_hi, _) = f(bracket.hi);
    if f_hi == 0.0 {
        return Ok(bracket.hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(Error::NoSignChange { lo: bracket.lo, hi: bracket.hi });
    }
    // orient so that f(neg) < 0 < f(pos)
    let (neg, pos) = if f_lo < 0.0 { (bracket.lo, bracket.hi) } else { (bracket.hi, bracket.lo) };
    refine(f, neg, pos, start, bracket.max_iterations, bracket.tolerance)
}

/// Safeguarded Newton core for callers that already know `f(neg) < 0 < f(pos)`.
pub(crate) fn refine<F>(mut f: F, neg: f64, pos: f64, start: f64, max_iterations: usize, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (a, b) = if neg < pos { (neg, pos) } else { (pos, neg) };
    let x = if start > a && start < b { start } else { 0.5 * (a + b) };
    let (fx, dfx) = f(x);
    refine_evaluated(f, neg, pos, (x, fx, dfx), max_iterations, tol)
}

/// [`refine`] with the starting point already evaluated as `(x, f(x), f'(x))`.
pub(crate) fn refine_evaluated<F>(
    mut f: F,
    mut neg: f64,
    mut pos: f64,
    start: (f64, f64, f64),
    max_iterations: usize,
    tol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut x, mut fx, mut dfx) = start;
    let mut last_step = (pos - neg).abs();
    let mut step = last_step;

    for _ in 0..max_iterations {
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let newton_ok = dfx.is_finite() && dfx != 0.0 && {
            let candidate = x - fx / dfx;
            let (a, b) = if neg < pos { (neg, pos) } else { (pos, neg) };
            candidate > a && candidate < b && (2.0 * fx).abs() <= (last_step * dfx).abs()
        };
        last_step = step;
        let next = if newton_ok {
            step = fx / dfx;
            x - step
        } else {
            let mid = 0.5 * (neg + pos);
            step = x - mid;
            mid
        };
        if step.abs() <= tol || (pos - neg).abs() <= tol || next == x {
            return Ok(next);
        }
        x = next;
        let r = f(x);
        fx = r.0;
        dfx = r.1;
    }
    Err(Error::NonConvergence { iterations: max_iterations })
}
