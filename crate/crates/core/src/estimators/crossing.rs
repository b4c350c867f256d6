use super::{ModelSpec, Sampling};
use crate::error::{Error, Result};
use crate::metric::{rect_crossing, RectSpec};
use crate::stats::Estimate;

/// Crossing probabilities of `rect` dilated by each scale, for colour `j`.
///
/// Models are stationary, so each dilated box is recentred at the origin
/// before sampling; only its shape and size matter.
pub fn estimate_crossing(
    model: &ModelSpec,
    rect: &RectSpec,
    scales: &[f64],
    colour: u8,
    run: &Sampling,
) -> Result<Vec<(f64, Estimate)>> {
    model.validate()?;
    run.require(1)?;
    if rect.lo.len() != model.dim() {
        return Err(Error::param("rect", "rectangle dimension differs from the model"));
    }
    if scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::param("scales", "scales must be > 0"));
    }
    let mut out = Vec::with_capacity(scales.len());
    for &s in scales {
        let lo: Vec<f64> = rect.lo.iter().zip(&rect.hi).map(|(l, h)| s * (l - h) / 2.0).collect();
        let hi: Vec<f64> = lo.iter().map(|l| -l).collect();
        let half = hi.iter().fold(0.0f64, |m, x| m.max(*x));
        let scaled = RectSpec::new(lo, hi, rect.axis)?;
        let label = format!("crossing/j{colour}/s{s}");
        let hits = run.run(&label, |seed| rect_crossing(&model.realize(half, seed)?, &scaled, colour))?;
        let k = hits.iter().filter(|&&b| b).count();
        out.push((s, Estimate::proportion(k, hits.len()).with_provenance(run.seed.master, run.seed.child(&label).label)));
    }
    Ok(out)
}
