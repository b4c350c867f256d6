use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{CostGraph, Medium};
use crate::error::{Error, Result};

/// Axis-aligned box `[lo, hi]`, crossed along `axis` (0 = x: left to right).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default)]
    pub axis: usize,
}

impl RectSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, axis: usize) -> Result<Self> {
        if lo.len() != hi.len() || !(2..=3).contains(&lo.len()) {
            return Err(Error::Geometry("rectangle corners must share dimension 2 or 3".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::Geometry(format!("degenerate rectangle {lo:?}..{hi:?}")));
        }
        if axis >= lo.len() {
            return Err(Error::Geometry(format!("crossing axis {axis} out of range")));
        }
        Ok(Self { lo, hi, axis })
    }

    /// The box `[0, a] × [0, b]` crossed in the x direction.
    pub fn horizontal(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![0.0, 0.0], vec![a, b], 0)
    }
}

/// Whether colour `j` crosses the box along its axis: a path of colour-`j`
/// nodes (continuum, king-move adjacency) or colour-`j` edges (lattice:
/// edge time equal to `j`) inside the box, joining its two opposite faces.
pub fn rect_crossing(medium: &Medium, rect: &RectSpec, colour: u8) -> Result<bool> {
    if colour > 1 {
        return Err(Error::param("colour", "must be 0 (white) or 1 (black)"));
    }
    if !medium.is_two_valued() {
        let (node, value) = match medium {
            Medium::Continuum(c) => {
                let n = c.first_non_binary().unwrap_or(0);
                (n, c.density()[n])
            }
            Medium::Lattice(w) => (0, w.edges().find(|&x| x != 0.0 && x != 1.0).unwrap_or(f64::NAN)),
        };
        return Err(Error::NotColouring { node, value });
    }
    let grid = medium.grid();
    let dim = grid.dim();
    if rect.lo.len() != dim {
        return Err(Error::Dimension { expected: if dim == 2 { "2" } else { "3" }, found: rect.lo.len() });
    }
    let (glo, ghi) = grid.bounds();
    let h = grid.spacing();
    let eps = 1e-9 * h;
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..dim {
        if rect.lo[a] < glo[a] - eps || rect.hi[a] > ghi[a] + eps {
            return Err(Error::Geometry(format!("rectangle {:?}..{:?} leaves the grid", rect.lo, rect.hi)));
        }
        let o = grid.origin()[a];
        let l = ((rect.lo[a] - o) / h - 1e-9).ceil().max(0.0) as usize;
        let u = ((rect.hi[a] - o) / h + 1e-9).floor() as usize;
        if u < l + 1 {
            return Err(Error::Geometry("rectangle spans fewer than two grid nodes per axis".into()));
        }
        lo[a] = l;
        hi[a] = u.min(grid.extents()[a] - 1);
    }
    let inside = |v: usize| {
        let m = grid.multi(v);
        (0..dim).all(|a| m[a] >= lo[a] && m[a] <= hi[a])
    };
    let n = grid.node_count();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let ax = rect.axis;
    // Start face: the box nodes with the smallest index along the axis.
    let mut m = lo;
    loop {
        m[ax] = lo[ax];
        let v = grid.index(&m[..dim]);
        if medium.node_has_colour(v, colour) {
            seen[v] = true;
            queue.push_back(v);
        }
        // Advance over the remaining axes, odometer style.
        let mut a = dim;
        loop {
            if a == 0 {
                break;
            }
            a -= 1;
            if a == ax {
                continue;
            }
            if m[a] < hi[a] {
                m[a] += 1;
                break;
            }
            m[a] = lo[a];
        }
        if (0..dim).all(|b| b == ax || m[b] == lo[b]) {
            break;
        }
    }
    while let Some(u) = queue.pop_front() {
        if grid.multi(u)[ax] == hi[ax] {
            return Ok(true);
        }
        medium.visit_edges(u, |v, w| {
            if !seen[v] && inside(v) && medium.same_colour_edge(u, v, w, colour) {
                seen[v] = true;
                queue.push_back(v);
            }
        });
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colourings::{Colouring, EdgeWeights, ModelTag};
    use crate::grid::GridSpec;

    fn pattern(bits: u16, colour_of_one: f64) -> Medium {
        let grid = GridSpec::new(vec![0.0, 0.0], 1.0, vec![3, 3]).unwrap();
        let dens = (0..9).map(|i| if bits >> i & 1 == 1 { colour_of_one } else { 1.0 - colour_of_one }).collect();
        Medium::Continuum(Colouring::new(grid, dens, ModelTag::GaussianSign).unwrap())
    }

    /// Reference flood fill written on a 3×3 bit pattern directly.
    fn reference(bits: u16) -> bool {
        let on = |x: i32, y: i32| (0..3).contains(&x) && (0..3).contains(&y) && bits >> (x * 3 + y) & 1 == 1;
        let mut seen = [[false; 3]; 3];
        let mut stack: Vec<(i32, i32)> = (0..3).filter(|&y| on(0, y)).map(|y| (0, y)).collect();
        for &(x, y) in &stack {
            seen[x as usize][y as usize] = true;
        }
        while let Some((x, y)) = stack.pop() {
            if x == 2 {
                return true;
            }
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let (a, b) = (x + dx, y + dy);
                    if on(a, b) && !seen[a as usize][b as usize] {
                        seen[a as usize][b as usize] = true;
                        stack.push((a, b));
                    }
                }
            }
        }
        false
    }

    #[test]
    fn all_3x3_patterns_match_reference() {
        let rect = RectSpec::horizontal(2.0, 2.0).unwrap();
        for bits in 0u16..512 {
            assert_eq!(rect_crossing(&pattern(bits, 1.0), &rect, 1).unwrap(), reference(bits), "black {bits:09b}");
            assert_eq!(rect_crossing(&pattern(bits, 0.0), &rect, 0).unwrap(), reference(bits), "white {bits:09b}");
        }
    }

    #[test]
    fn lattice_crossing_uses_edge_colour() {
        // A single straight row of open (zero) edges at y = 0.
        let w = EdgeWeights::from_fn(vec![5, 5], |v, axis| if axis == 0 && v % 5 == 2 { 0.0 } else { 1.0 }).unwrap();
        let m = Medium::Lattice(w);
        let rect = RectSpec::new(vec![-2.0, -2.0], vec![2.0, 2.0], 0).unwrap();
        assert!(rect_crossing(&m, &rect, 0).unwrap());
        assert!(rect_crossing(&m, &rect, 1).unwrap());
        let rect_y = RectSpec::new(vec![-2.0, -2.0], vec![2.0, 2.0], 1).unwrap();
        assert!(!rect_crossing(&m, &rect_y, 0).unwrap());
    }

    #[test]
    fn three_d_crossing() {
        let grid = GridSpec::new(vec![0.0; 3], 1.0, vec![4, 3, 3]).unwrap();
        let dens: Vec<f64> = (0..grid.node_count())
            .map(|v| { let m = grid.multi(v); if m[1] == 1 && m[2] == 2 { 0.0 } else { 1.0 } })
            .collect();
        let m = Medium::Continuum(Colouring::new(grid, dens, ModelTag::Voronoi).unwrap());
        let rect = RectSpec::new(vec![0.0; 3], vec![3.0, 2.0, 2.0], 0).unwrap();
        assert!(rect_crossing(&m, &rect, 0).unwrap());
        let rect_z = RectSpec::new(vec![0.0; 3], vec![3.0, 2.0, 2.0], 2).unwrap();
        assert!(!rect_crossing(&m, &rect_z, 0).unwrap());
    }

    #[test]
    fn rejects_non_colourings_and_bad_boxes() {
        let grid = GridSpec::new(vec![0.0, 0.0], 1.0, vec![3, 3]).unwrap();
        let c = Medium::Continuum(Colouring::constant(grid, 0.5).unwrap());
        let rect = RectSpec::horizontal(2.0, 2.0).unwrap();
        assert!(matches!(rect_crossing(&c, &rect, 0), Err(Error::NotColouring { .. })));
        let m = pattern(0, 1.0);
        assert!(rect_crossing(&m, &RectSpec::horizontal(3.0, 2.0).unwrap(), 0).is_err());
        assert!(RectSpec::horizontal(0.0, 1.0).is_err());
    }
}
