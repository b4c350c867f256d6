use super::{Colouring, ModelTag, PointCloud};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rng::RngSeed;

/// Γ(4/3), for the mean nearest-neighbour distance in 3D.
const GAMMA_4_3: f64 = 0.892_979_511_569_249_2;

/// Three mean nearest-neighbour spacings of a Poisson process of intensity `lambda`.
pub fn voronoi_margin(dim: usize, lambda: f64) -> f64 {
    let spacing = if dim == 2 {
        0.5 / lambda.sqrt()
    } else {
        GAMMA_4_3 * (4.0 * std::f64::consts::PI * lambda / 3.0).powf(-1.0 / 3.0)
    };
    3.0 * spacing
}

/// Uniform bins over the cloud region for exact nearest-neighbour queries.
struct Bins {
    dim: usize,
    lo: [f64; 3],
    side: f64,
    counts: [usize; 3],
    start: Vec<usize>,
    items: Vec<u32>,
}

impl Bins {
    fn new(cloud: &PointCloud) -> Self {
        let dim = cloud.dim();
        let region = cloud.region();
        let n = cloud.len().max(1) as f64;
        let side = (2.0 * region.volume() / n).powf(1.0 / dim as f64);
        let mut lo = [0.0; 3];
        let mut counts = [1; 3];
        for a in 0..dim {
            lo[a] = region.lo[a];
            counts[a] = (((region.hi[a] - region.lo[a]) / side).ceil() as usize).max(1);
        }
        let total: usize = counts[..dim].iter().product();
        let mut bucket_of = Vec::with_capacity(cloud.len());
        let mut sizes = vec![0usize; total + 1];
        let mut tmp = Self {
            dim,
            lo,
            side,
            counts,
            start: Vec::new(),
            items: Vec::new(),
        };
        for p in cloud.points() {
            let b = tmp.flat(&tmp.cell_of(p));
            bucket_of.push(b);
            sizes[b + 1] += 1;
        }
        for i in 0..total {
            sizes[i + 1] += sizes[i];
        }
        let mut fill = sizes.clone();
        let mut items = vec![0u32; cloud.len()];
        for (i, &b) in bucket_of.iter().enumerate() {
            items[fill[b]] = i as u32;
            fill[b] += 1;
        }
        tmp.start = sizes;
        tmp.items = items;
        tmp
    }

    fn cell_of(&self, x: &[f64; 3]) -> [i64; 3] {
        let mut c = [0i64; 3];
        for a in 0..self.dim {
            let k = ((x[a] - self.lo[a]) / self.side).floor() as i64;
            c[a] = k.clamp(0, self.counts[a] as i64 - 1);
        }
        c
    }

    fn flat(&self, c: &[i64; 3]) -> usize {
        (0..self.dim).fold(0, |acc, a| acc * self.counts[a] + c[a] as usize)
    }

    fn nearest(&self, cloud: &PointCloud, x: &[f64; 3]) -> u32 {
        let c0 = self.cell_of(x);
        let pts = cloud.points();
        let mut best: Option<(f64, u32)> = None;
        let max_k = (0..self.dim).map(|a| self.counts[a]).max().unwrap() as i64;
        for k in 0..=max_k {
            let mut lo = [0i64; 3];
            let mut hi = [0i64; 3];
            for a in 0..self.dim {
                lo[a] = (c0[a] - k).max(0);
                hi[a] = (c0[a] + k).min(self.counts[a] as i64 - 1);
            }
            let (zlo, zhi) = if self.dim == 3 { (lo[2], hi[2]) } else { (0, 0) };
            for cx in lo[0]..=hi[0] {
                for cy in lo[1]..=hi[1] {
                    for cz in zlo..=zhi {
                        let c = [cx, cy, cz];
                        let cheb = (0..self.dim).map(|a| (c[a] - c0[a]).abs()).max().unwrap();
                        if cheb != k {
                            continue;
                        }
                        let b = self.flat(&c);
                        for &i in &self.items[self.start[b]..self.start[b + 1]] {
                            let p = &pts[i as usize];
                            let d2: f64 = (0..self.dim).map(|a| (p[a] - x[a]).powi(2)).sum();
                            let better = match best {
                                None => true,
                                Some((bd, bi)) => d2 < bd || (d2 == bd && i < bi),
                            };
                            if better {
                                best = Some((d2, i));
                            }
                        }
                    }
                }
            }
            if let Some((d2, _)) = best {
                // unexamined bins lie at least k * side away
                let reach = k as f64 * self.side;
                if d2 < reach * reach {
                    break;
                }
            }
        }
        best.expect("cloud is nonempty").1
    }
}

/// Index of the nearest cloud point for every node (ties: lowest index).
/// Key of the per-cell colour uniforms drawn by [`voronoi_colouring`].
pub fn voronoi_colour_key(seed: &RngSeed) -> u64 {
    seed.child("colour").digest()
}

pub fn nearest_points(cloud: &PointCloud, grid: &GridSpec) -> Result<Vec<u32>> {
    if cloud.is_empty() {
        return Err(Error::Empty("point cloud"));
    }
    if cloud.dim() != grid.dim() {
        return Err(Error::param("cloud", "dimension differs from the grid"));
    }
    let bins = Bins::new(cloud);
    Ok((0..grid.node_count())
        .map(|k| bins.nearest(cloud, &grid.coords(k)))
        .collect())
}

/// Voronoi colouring: every cell is white with probability `p`, decided by
/// a per-point uniform `u` hashed from the point's coordinates and `seed`
/// (white iff `u < p`). With a shared cloud and seed, raising `p` only
/// turns black cells white.
pub fn voronoi_colouring(
    cloud: &PointCloud,
    p: f64,
    grid: &GridSpec,
    seed: &RngSeed,
) -> Result<Colouring> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", "p must lie in [0,1]"));
    }
    let owner = nearest_points(cloud, grid)?;
    let key = voronoi_colour_key(seed);
    let white: Vec<bool> = (0..cloud.len()).map(|i| cloud.uniform(i, key) < p).collect();
    let density = owner
        .iter()
        .map(|&i| if white[i as usize] { 0.0 } else { 1.0 })
        .collect();
    Colouring::new(grid.clone(), density, ModelTag::Voronoi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colourings::{sample_poisson, BoxRegion};

    fn brute(cloud: &PointCloud, x: &[f64; 3], dim: usize) -> u32 {
        let mut best = (f64::INFINITY, 0u32);
        for (i, p) in cloud.points().iter().enumerate() {
            let d2: f64 = (0..dim).map(|a| (p[a] - x[a]).powi(2)).sum();
            if d2 < best.0 {
                best = (d2, i as u32);
            }
        }
        best.1
    }

    #[test]
    fn rasterization_matches_brute_force() {
        for (dim, lambda, seed) in [(2, 3.0, 1u64), (2, 0.2, 2), (3, 1.0, 3)] {
            let grid = GridSpec::centered(0.3, vec![15; dim]).unwrap();
            let region = BoxRegion::of_grid(&grid).expanded(voronoi_margin(dim, lambda));
            let cloud = sample_poisson(&region, lambda, &RngSeed::new(seed, 0, "v")).unwrap();
            let owner = nearest_points(&cloud, &grid).unwrap();
            for k in 0..grid.node_count() {
                assert_eq!(owner[k], brute(&cloud, &grid.coords(k), dim), "node {k}");
            }
        }
    }

    #[test]
    fn single_point_colours_everything() {
        let grid = GridSpec::centered(0.5, vec![9, 9]).unwrap();
        let region = BoxRegion::of_grid(&grid).expanded(1.0);
        let cloud = PointCloud::new(vec![[0.3, -0.2, 0.0]], region, 1.0).unwrap();
        let seed = RngSeed::new(4, 0, "v");
        let u = cloud.uniform(0, seed.child("colour").digest());
        for p in [0.0, u * 0.5, u, (u + 1.0) / 2.0, 1.0] {
            let c = voronoi_colouring(&cloud, p, &grid, &seed).unwrap();
            let expect = if u < p { 0.0 } else { 1.0 };
            assert!(c.density().iter().all(|&v| v == expect));
        }
    }

    #[test]
    fn two_points_split_by_bisector() {
        let grid = GridSpec::centered(0.25, vec![17, 17]).unwrap();
        let region = BoxRegion::of_grid(&grid).expanded(1.0);
        let a = [-1.0, 0.5, 0.0];
        let b = [1.2, -0.3, 0.0];
        let cloud = PointCloud::new(vec![a, b], region, 1.0).unwrap();
        let owner = nearest_points(&cloud, &grid).unwrap();
        for k in 0..grid.node_count() {
            let x = grid.coords(k);
            let da = (x[0] - a[0]).powi(2) + (x[1] - a[1]).powi(2);
            let db = (x[0] - b[0]).powi(2) + (x[1] - b[1]).powi(2);
            let expect = if da <= db { 0 } else { 1 };
            assert_eq!(owner[k], expect);
        }
    }

    #[test]
    fn monotone_in_p_with_shared_uniforms() {
        let grid = GridSpec::centered(0.2, vec![30, 30]).unwrap();
        let region = BoxRegion::of_grid(&grid).expanded(voronoi_margin(2, 2.0));
        let seed = RngSeed::new(8, 0, "v");
        let cloud = sample_poisson(&region, 2.0, &seed).unwrap();
        let lo = voronoi_colouring(&cloud, 0.3, &grid, &seed).unwrap();
        let hi = voronoi_colouring(&cloud, 0.7, &grid, &seed).unwrap();
        assert!(lo.density().iter().zip(hi.density()).all(|(a, b)| a >= b));
    }

    #[test]
    fn errors() {
        let grid = GridSpec::centered(0.5, vec![3, 3]).unwrap();
        let region = BoxRegion::of_grid(&grid);
        let empty = PointCloud::new(vec![], region, 1.0).unwrap();
        let seed = RngSeed::new(1, 0, "v");
        assert!(matches!(
            voronoi_colouring(&empty, 0.5, &grid, &seed),
            Err(Error::Empty(_))
        ));
        assert!(voronoi_colouring(&empty, 1.3, &grid, &seed).is_err());
    }
}
