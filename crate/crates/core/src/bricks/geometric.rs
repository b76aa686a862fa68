//! The brick on (F_p)⁵: X₀ a uniform linear plane, X₁ a uniform affine line
//! whose direction lies in X₀, X₂ a uniform point of X₁.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::BrickError;
use crate::coupling::kr::transport_cost;
use crate::exec::{map_reduce, Execution};
use crate::field::{Field, Gf};
use crate::rational;

const DIM: usize = 5;

#[derive(Debug, Clone)]
pub struct GeometricBrick {
    p: u32,
    field: Field,
    /// Row-echelon bases of the planes, as vector codes.
    planes: Vec<[u64; 2]>,
    /// Normalised direction vectors (first nonzero coordinate 1).
    directions: Vec<u64>,
    /// Lines as (direction index, smallest point code).
    lines: Vec<(u32, u64)>,
    /// Sorted point codes of each line.
    line_points: Vec<Vec<u64>>,
    /// Line ids with direction inside each plane, ascending.
    plane_lines: Vec<Vec<u32>>,
    /// Direction ids inside each plane.
    plane_directions: Vec<Vec<u32>>,
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl GeometricBrick {
    pub fn new(p: u32) -> Result<GeometricBrick, BrickError> {
        if ![2, 3, 5].contains(&p) {
            return Err(BrickError::Budget(format!("p = {p}: enumeration is limited to p ∈ {{2, 3, 5}}")));
        }
        let field = Field::new(p, 1).map_err(|e| BrickError::BadParameter(e.to_string()))?;
        let points = (p as u64).pow(DIM as u32);
        let planes = echelon_planes(&field);

        let mut directions = Vec::new();
        for code in 1..points {
            let v = field.decode_vec(code, DIM);
            if v.iter().find(|x| !x.is_zero()) == Some(&Gf::ONE) {
                directions.push(code);
            }
        }
        let dir_index: HashMap<u64, u32> = directions.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect();

        let mut lines = Vec::new();
        let mut line_points = Vec::new();
        let mut dir_lines: Vec<Vec<u32>> = vec![Vec::new(); directions.len()];
        for (di, &d) in directions.iter().enumerate() {
            let dv = field.decode_vec(d, DIM);
            for x in 0..points {
                let xv = field.decode_vec(x, DIM);
                let mut pts: Vec<u64> = (0..p)
                    .map(|t| {
                        let w: Vec<Gf> = xv
                            .iter()
                            .zip(&dv)
                            .map(|(&a, &b)| field.add(a, field.mul(Gf(t), b)))
                            .collect();
                        field.encode_vec(&w)
                    })
                    .collect();
                pts.sort_unstable();
                if pts[0] != x {
                    continue;
                }
                dir_lines[di].push(lines.len() as u32);
                lines.push((di as u32, x));
                line_points.push(pts);
            }
        }

        let mut plane_lines = Vec::with_capacity(planes.len());
        let mut plane_directions = Vec::with_capacity(planes.len());
        for basis in &planes {
            let u = field.decode_vec(basis[0], DIM);
            let v = field.decode_vec(basis[1], DIM);
            let mut dirs = Vec::new();
            for a in 0..p {
                for b in 0..p {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let w: Vec<Gf> = u
                        .iter()
                        .zip(&v)
                        .map(|(&x, &y)| field.add(field.mul(Gf(a), x), field.mul(Gf(b), y)))
                        .collect();
                    let code = field.encode_vec(&w);
                    if let Some(&di) = dir_index.get(&code) {
                        dirs.push(di);
                    }
                }
            }
            dirs.sort_unstable();
            dirs.dedup();
            let mut ls: Vec<u32> = dirs.iter().flat_map(|&d| dir_lines[d as usize].iter().copied()).collect();
            ls.sort_unstable();
            plane_lines.push(ls);
            plane_directions.push(dirs);
        }
        Ok(GeometricBrick { p, field, planes, directions, lines, line_points, plane_lines, plane_directions })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// |F₀|.
    pub fn plane_count(&self) -> u64 {
        self.planes.len() as u64
    }

    pub fn line_count(&self) -> u64 {
        self.lines.len() as u64
    }

    pub fn point_count(&self) -> u64 {
        (self.p as u64).pow(DIM as u32)
    }

    pub fn lines_through_origin_in_plane(&self, plane: usize) -> usize {
        self.plane_directions[plane].len()
    }

    pub fn plane_basis(&self, plane: usize) -> [Vec<Gf>; 2] {
        let [a, b] = self.planes[plane];
        [self.field.decode_vec(a, DIM), self.field.decode_vec(b, DIM)]
    }

    /// Support of X₁ given X₀ = plane (line ids).
    pub fn lines_of_plane(&self, plane: usize) -> &[u32] {
        &self.plane_lines[plane]
    }

    pub fn line_points(&self, line: u32) -> &[u64] {
        &self.line_points[line as usize]
    }

    pub fn line_direction(&self, line: u32) -> u64 {
        self.directions[self.lines[line as usize].0 as usize]
    }

    /// (p⁴+p³+p²+p+1)(p²+1).
    pub fn plane_count_formula(p: u64) -> u64 {
        (p.pow(4) + p.pow(3) + p * p + p + 1) * (p * p + 1)
    }

    /// Common points of two lines.
    pub fn line_meet(&self, a: u32, b: u32) -> usize {
        let (x, y) = (&self.line_points[a as usize], &self.line_points[b as usize]);
        x.iter().filter(|p| y.binary_search(p).is_ok()).count()
    }

    /// ρ₁: total variation between uniform laws on two lines, times p.
    fn rho1_scaled(&self, a: u32, b: u32) -> u64 {
        self.p as u64 - self.line_meet(a, b) as u64
    }

    pub fn rho1(&self, a: u32, b: u32) -> BigRational {
        r(self.rho1_scaled(a, b) as i64, self.p as i64)
    }

    /// ρ₀: KR distance between the X₁-laws of two planes over ρ₁.
    pub fn rho0(&self, a: usize, b: usize) -> BigRational {
        let (la, lb) = (&self.plane_lines[a], &self.plane_lines[b]);
        let n = la.len();
        let cost = transport_cost(&vec![1; n], &vec![1; lb.len()], |i, j| self.rho1_scaled(la[i], lb[j]));
        BigRational::new(BigInt::from(cost), BigInt::from(n as u64 * self.p as u64))
    }
}

/// Reduced row-echelon 2×5 bases, enumerated by pivot pair.
fn echelon_planes(field: &Field) -> Vec<[u64; 2]> {
    let p = field.order() as u64;
    let mut out = Vec::new();
    for c1 in 0..DIM {
        for c2 in c1 + 1..DIM {
            let free1: Vec<usize> = (c1 + 1..DIM).filter(|&c| c != c2).collect();
            let free2: Vec<usize> = (c2 + 1..DIM).collect();
            let nfree = free1.len() + free2.len();
            for code in 0..p.pow(nfree as u32) {
                let vals = field.decode_vec(code, nfree);
                let mut r1 = vec![Gf::ZERO; DIM];
                let mut r2 = vec![Gf::ZERO; DIM];
                r1[c1] = Gf::ONE;
                r2[c2] = Gf::ONE;
                for (k, &c) in free1.iter().enumerate() {
                    r1[c] = vals[k];
                }
                for (k, &c) in free2.iter().enumerate() {
                    r2[c] = vals[free1.len() + k];
                }
                out.push([field.encode_vec(&r1), field.encode_vec(&r2)]);
            }
        }
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometricReport {
    pub p: u32,
    pub planes: u64,
    pub planes_formula: u64,
    pub lines_per_plane: u64,
    pub directions_per_plane_ok: bool,
    pub x2_uniform: bool,
    pub x0_x2_independent: bool,
    /// Two distinct lines share at most one point (pairs of points lie on
    /// exactly one line).
    pub lines_meet_at_most_once: bool,
    #[serde(with = "rational::serde_str")]
    pub min_rho1: BigRational,
    #[serde(with = "rational::serde_str")]
    pub rho1_bound: BigRational,
    /// Minimum ρ₀ over the plane pairs examined.
    #[serde(serialize_with = "rational::serialize_opt")]
    pub min_rho0: Option<BigRational>,
    #[serde(with = "rational::serde_str")]
    pub rho0_bound: BigRational,
    pub rho0_pairs: u64,
    pub rho0_exhaustive: bool,
    pub rho0_holds: Option<bool>,
    pub worst_plane_pair: Option<(u64, u64)>,
}

impl GeometricReport {
    pub fn passes(&self) -> bool {
        self.planes == self.planes_formula
            && self.directions_per_plane_ok
            && self.x2_uniform
            && self.x0_x2_independent
            && self.lines_meet_at_most_once
            && self.min_rho1 >= self.rho1_bound
            && self.rho0_holds != Some(false)
    }
}

/// Which plane pairs to run the KR linear program on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rho0Scope {
    Skip,
    All,
    /// The first `n` pairs in a seeded random order.
    Sample { pairs: u64, seed: u64 },
}

pub fn verify_geometric_brick(b: &GeometricBrick, scope: Rho0Scope, exec: Execution) -> GeometricReport {
    let p = b.p as u64;
    let points = b.point_count() as usize;
    let per_plane = (p + 1) * p.pow(4);
    let directions_per_plane_ok = (0..b.planes.len())
        .all(|i| b.plane_directions[i].len() as u64 == p + 1 && b.plane_lines[i].len() as u64 == per_plane);

    // Law of X₂ given X₀: count[z] over the plane's lines, each line point
    // carrying weight 1 out of per_plane · p.
    let (uniform_given_plane, marginal) = map_reduce(
        exec,
        b.planes.len() as u64,
        (true, vec![0u64; points]),
        |i| {
            let mut count = vec![0u64; points];
            for &l in &b.plane_lines[i as usize] {
                for &z in &b.line_points[l as usize] {
                    count[z as usize] += 1;
                }
            }
            let first = count[0];
            (count.iter().all(|&c| c == first), count)
        },
        |(ua, mut ma), (ub, mb)| {
            ma.iter_mut().zip(mb).for_each(|(x, y)| *x += y);
            (ua && ub, ma)
        },
    );
    let x2_uniform = marginal.iter().all(|&c| c == marginal[0])
        && marginal[0] * points as u64 == b.plane_count() * per_plane * p;
    let x0_x2_independent = uniform_given_plane;

    let lines_meet_at_most_once = {
        let mut seen = vec![false; points * points];
        let mut ok = true;
        for pts in &b.line_points {
            for (i, &x) in pts.iter().enumerate() {
                for &y in &pts[i + 1..] {
                    let k = x as usize * points + y as usize;
                    ok &= !seen[k];
                    seen[k] = true;
                }
            }
        }
        ok
    };
    // Two distinct lines meet in at most one point, so ρ₁ ≥ (p − 1)/p with
    // equality attained by intersecting lines.
    let min_rho1 = if lines_meet_at_most_once { r(p as i64 - 1, p as i64) } else { BigRational::zero() };
    let rho1_bound = r(p as i64 - 1, p as i64);

    let n = b.plane_count();
    let total_pairs = n * (n - 1) / 2;
    let pairs: Vec<(u64, u64)> = match scope {
        Rho0Scope::Skip => Vec::new(),
        Rho0Scope::All => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        Rho0Scope::Sample { pairs, seed } => {
            use rand::Rng;
            let mut rng = crate::exec::rng_for(seed, "geometric_rho0", 0);
            (0..pairs.min(total_pairs))
                .map(|_| {
                    let i = rng.random_range(0..n);
                    let mut j = rng.random_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    (i.min(j), i.max(j))
                })
                .collect()
        }
    };
    let rho0_bound = BigRational::one() - r(2, p as i64 + 1);
    let scaled: Vec<(u128, u64, u64)> = crate::exec::map_slice(exec, &pairs, |&(i, j)| {
        let la = &b.plane_lines[i as usize];
        let lb = &b.plane_lines[j as usize];
        let c = transport_cost(&vec![1; la.len()], &vec![1; lb.len()], |x, y| b.rho1_scaled(la[x], lb[y]));
        (c, i, j)
    });
    let worst = scaled.iter().min_by_key(|x| x.0);
    let min_rho0 = worst.map(|&(c, _, _)| BigRational::new(BigInt::from(c), BigInt::from(per_plane * p)));
    let rho0_holds = min_rho0.as_ref().map(|m| m >= &rho0_bound);
    GeometricReport {
        p: b.p,
        planes: n,
        planes_formula: GeometricBrick::plane_count_formula(p),
        lines_per_plane: p + 1,
        directions_per_plane_ok,
        x2_uniform,
        x0_x2_independent,
        lines_meet_at_most_once,
        min_rho1,
        rho1_bound,
        min_rho0,
        rho0_bound,
        rho0_pairs: pairs.len() as u64,
        rho0_exhaustive: scope == Rho0Scope::All,
        rho0_holds,
        worst_plane_pair: worst.map(|&(_, i, j)| (i, j)),
    }
}
