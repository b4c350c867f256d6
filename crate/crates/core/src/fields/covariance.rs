use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::stats::Estimate;

/// Cross-replica estimate of `E[f(x) f(x + lag·h)]` for a centered field.
///
/// Each replica contributes the average of `f(x) f(x + lag)` over all node
/// pairs inside its grid; the estimate is the mean of these per-replica
/// values with the cross-replica standard error.
pub fn empirical_covariance(fields: &[ScalarField], lag: &[i64]) -> Result<Estimate> {
    let first = fields.first().ok_or(Error::Empty("replica list"))?;
    if fields.len() < 2 {
        return Err(Error::param("fields", "need at least 2 replicas"));
    }
    let grid = first.grid();
    if fields.iter().any(|f| f.grid() != grid) {
        return Err(Error::param("fields", "replicas must share one grid"));
    }
    let dim = grid.dim();
    if lag.len() != dim {
        return Err(Error::param("lag", format!("expected {dim} components")));
    }
    let ext = grid.extents();
    if lag.iter().zip(ext).any(|(&l, &n)| l.unsigned_abs() as usize >= n) {
        return Err(Error::param("lag", "must lie within the grid extents"));
    }

    let mut pairs = Vec::new();
    let mut shifted = [0i64; 3];
    for k in 0..grid.node_count() {
        let m = grid.multi(k);
        for a in 0..dim {
            shifted[a] = m[a] as i64 + lag[a];
        }
        if let Some(j) = grid.try_index(&shifted[..dim]) {
            pairs.push((k, j));
        }
    }
    let per_replica: Vec<f64> = fields
        .iter()
        .map(|f| {
            let v = f.values();
            pairs.iter().map(|&(a, b)| v[a] * v[b]).sum::<f64>() / pairs.len() as f64
        })
        .collect();
    Ok(Estimate::from_samples(&per_replica))
}
