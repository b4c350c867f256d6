use crate::colourings::{Colouring, EdgeWeights};
use crate::grid::GridSpec;

/// A weighted graph over the nodes of a grid.
pub trait CostGraph {
    fn grid(&self) -> &GridSpec;

    /// Calls `f(v, w)` for every neighbour `v` of `u` with edge cost `w >= 0`.
    fn visit_edges<F: FnMut(usize, f64)>(&self, u: usize, f: F);

    /// Whether the edge `u–v` belongs to the colour-`j` subgraph.
    fn same_colour_edge(&self, u: usize, v: usize, w: f64, colour: u8) -> bool;

    /// Whether node `u` may lie on a colour-`j` path.
    fn node_has_colour(&self, u: usize, colour: u8) -> bool;
}

/// Neighbour stencil: per-axis displacement and Euclidean length.
pub(crate) fn king_stencil(dim: usize, h: f64) -> Vec<([i64; 3], f64)> {
    let mut out = Vec::new();
    let zr = if dim == 3 { -1..=1 } else { 0..=0 };
    for dx in -1i64..=1 {
        for dy in -1i64..=1 {
            for dz in zr.clone() {
                let d = [dx, dy, dz];
                let nz = d.iter().filter(|&&c| c != 0).count();
                if nz == 0 {
                    continue;
                }
                out.push((d, h * (nz as f64).sqrt()));
            }
        }
    }
    out
}

fn neighbours_in_grid(grid: &GridSpec, u: usize, stencil: &[([i64; 3], f64)], mut f: impl FnMut(usize, f64)) {
    let dim = grid.dim();
    let ext = grid.extents();
    let m = grid.multi(u);
    'outer: for (d, len) in stencil {
        let mut v = 0usize;
        for a in 0..dim {
            let c = m[a] as i64 + d[a];
            if c < 0 || c as usize >= ext[a] {
                continue 'outer;
            }
            v = v * ext[a] + c as usize;
        }
        f(v, *len);
    }
}

impl CostGraph for Colouring {
    fn grid(&self) -> &GridSpec {
        Colouring::grid(self)
    }

    fn visit_edges<F: FnMut(usize, f64)>(&self, u: usize, mut f: F) {
        let grid = Colouring::grid(self);
        let stencil = stencil_for(grid);
        let dens = self.density();
        let a = dens[u];
        neighbours_in_grid(grid, u, &stencil, |v, len| f(v, len * (0.5 * (a + dens[v]))));
    }

    fn same_colour_edge(&self, u: usize, v: usize, _w: f64, colour: u8) -> bool {
        self.node_has_colour(u, colour) && self.node_has_colour(v, colour)
    }

    fn node_has_colour(&self, u: usize, colour: u8) -> bool {
        self.density()[u] == colour as f64
    }
}

/// Stencils for the handful of (dim, spacing) pairs in use are cheap to rebuild,
/// but Dijkstra calls `visit_edges` once per settled node, so they are cached.
fn stencil_for(grid: &GridSpec) -> std::sync::Arc<Vec<([i64; 3], f64)>> {
    use std::cell::RefCell;
    use std::sync::Arc;
    thread_local! {
        static CACHE: RefCell<Option<(usize, u64, Arc<Vec<([i64; 3], f64)>>)>> = const { RefCell::new(None) };
    }
    CACHE.with(|c| {
        let mut c = c.borrow_mut();
        match &*c {
            Some((d, h, s)) if *d == grid.dim() && *h == grid.spacing().to_bits() => s.clone(),
            _ => {
                let s = Arc::new(king_stencil(grid.dim(), grid.spacing()));
                *c = Some((grid.dim(), grid.spacing().to_bits(), s.clone()));
                s
            }
        }
    })
}

impl CostGraph for EdgeWeights {
    fn grid(&self) -> &GridSpec {
        EdgeWeights::grid(self)
    }

    fn visit_edges<F: FnMut(usize, f64)>(&self, u: usize, mut f: F) {
        let grid = EdgeWeights::grid(self);
        let dim = grid.dim();
        let ext = grid.extents();
        let m = grid.multi(u);
        let mut stride = 1usize;
        for a in (0..dim).rev() {
            if m[a] + 1 < ext[a] {
                f(u + stride, self.weight(u, a));
            }
            if m[a] > 0 {
                f(u - stride, self.weight(u - stride, a));
            }
            stride *= ext[a];
        }
    }

    fn same_colour_edge(&self, _u: usize, _v: usize, w: f64, colour: u8) -> bool {
        w == colour as f64
    }

    fn node_has_colour(&self, _u: usize, _colour: u8) -> bool {
        true
    }
}

/// One realization of a random medium: a grid density or lattice edge times.
#[derive(Debug, Clone, PartialEq)]
pub enum Medium {
    Continuum(Colouring),
    Lattice(EdgeWeights),
}

impl Medium {
    /// True when every density / edge time is 0 or 1.
    pub fn is_two_valued(&self) -> bool {
        match self {
            Medium::Continuum(c) => c.first_non_binary().is_none(),
            Medium::Lattice(w) => w.edges().all(|x| x == 0.0 || x == 1.0),
        }
    }
}

impl CostGraph for Medium {
    fn grid(&self) -> &GridSpec {
        match self {
            Medium::Continuum(c) => c.grid(),
            Medium::Lattice(w) => w.grid(),
        }
    }

    fn visit_edges<F: FnMut(usize, f64)>(&self, u: usize, f: F) {
        match self {
            Medium::Continuum(c) => c.visit_edges(u, f),
            Medium::Lattice(w) => w.visit_edges(u, f),
        }
    }

    fn same_colour_edge(&self, u: usize, v: usize, w: f64, colour: u8) -> bool {
        match self {
            Medium::Continuum(c) => c.same_colour_edge(u, v, w, colour),
            Medium::Lattice(l) => l.same_colour_edge(u, v, w, colour),
        }
    }

    fn node_has_colour(&self, u: usize, colour: u8) -> bool {
        match self {
            Medium::Continuum(c) => c.node_has_colour(u, colour),
            Medium::Lattice(l) => l.node_has_colour(u, colour),
        }
    }
}
