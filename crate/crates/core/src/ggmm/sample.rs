use alloc::vec::Vec;

use super::GgmmModel;
use crate::numerics::{find_root_from, RngStream, RootBracket};
use crate::Result;

// initial half-width of the search interval in units of each component's scale
const SPAN: f64 = 8.0;

/// `n` independent draws by inverting the mixture CDF.
///
/// Each uniform `u` is matched by a safeguarded Newton iteration on
/// `F(y) - u` with the mixture density as derivative, inside an interval that
/// is widened until it straddles `u`.
pub fn sample(model: &GgmmModel, n: usize, stream: &mut RngStream) -> Result<Vec<f64>> {
    let lo0 = model.components().iter().map(|c| c.location() - SPAN * c.scale()).fold(f64::INFINITY, f64::min);
    let hi0 = model.components().iter().map(|c| c.location() + SPAN * c.scale()).fold(f64::NEG_INFINITY, f64::max);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u = stream.uniform();
        out.push(invert(model, u, lo0, hi0)?);
    }
    Ok(out)
}

fn invert(model: &GgmmModel, u: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let width = hi - lo;
    let mut step = width;
    while model.cdf(lo) > u {
        lo -= step;
        step *= 2.0;
    }
    step = width;
    while model.cdf(hi) < u {
        hi += step;
        step *= 2.0;
    }
    let bracket = RootBracket::new(lo, hi, 400, 1e-13 * width)?;
    // start where a linear interpolation of the CDF would put u
    let start = lo + u * (hi - lo);
    find_root_from(|y| (model.cdf(y) - u, model.pdf(y)), &bracket, start)
}
