//! Partition families Π_z (z ∈ F₀) of a finite set F₂ whose blocks from
//! different partitions meet in few points.
//!
//! Blocks are addressed as (z₀, j) with j ∈ 1..=r₁; points of F₂ are `u64`
//! codes and every block lists its points in ascending code order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::BrickError;
use crate::field::{Field, Gf, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// F₂ is listed and clauses are checked exhaustively where the budget
    /// allows.
    #[default]
    Materialized,
    /// Blocks and intersections are computed on demand.
    Generator,
}

/// Largest F₂ a materialised family may list.
pub const MATERIALIZE_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone)]
enum Kind {
    /// Blocks {(x, Ax + b)} of K⁴ × K⁴, indexed by A ∈ M₄(K) and b ∈ K⁴.
    Matrix { field: Field },
    /// Graphs {(x, ax⁴ + bx³ + cx² + dx + e)} in K², indexed by (a,b,c,d)
    /// and e.
    Quartic { field: Field },
    /// Blocks listed per index, each sorted.
    Explicit { blocks: Vec<Vec<Vec<u64>>> },
}

#[derive(Debug, Clone)]
pub struct PartitionFamily {
    kind: Kind,
    mode: Mode,
    r1: u64,
    r2: u64,
    alpha: (u64, u64),
    /// Number of leading index coordinates in use (the rest are zero).
    index_dim: u32,
    index_count: u64,
    base_size: u64,
}

fn ceil_pow(q: u64, e: u32) -> Option<u64> {
    q.checked_pow(e)
}

impl PartitionFamily {
    /// Matrix family over GF(q) with every matrix as an index.
    pub fn matrix(q: u64, mode: Mode) -> Result<Self, BrickError> {
        Self::matrix_indexed(q, 16, mode)
    }

    /// Matrix family restricted to matrices whose entries after the first
    /// `index_dim` (row-major) vanish.
    pub fn matrix_indexed(q: u64, index_dim: u32, mode: Mode) -> Result<Self, BrickError> {
        let field = Field::with_order(q).map_err(|e| BrickError::BadParameter(e.to_string()))?;
        if !(1..=16).contains(&index_dim) {
            return Err(BrickError::BadParameter(format!("index dimension {index_dim} not in 1..=16")));
        }
        let r = ceil_pow(q, 4).ok_or_else(|| BrickError::BadParameter("q⁴ overflows".into()))?;
        let index_count = ceil_pow(q, index_dim).filter(|_| (q as f64).powi(index_dim as i32) < 1.8e19);
        let index_count = index_count.ok_or_else(|| BrickError::BadParameter("index set too large".into()))?;
        let base_size = r * r;
        if mode == Mode::Materialized && base_size > MATERIALIZE_LIMIT {
            return Err(BrickError::Budget(format!("F₂ has {base_size} points; use generator mode")));
        }
        Ok(PartitionFamily {
            kind: Kind::Matrix { field },
            mode,
            r1: r,
            r2: r,
            alpha: (1, q),
            index_dim,
            index_count,
            base_size,
        })
    }

    pub fn quartic(q: u64) -> Result<Self, BrickError> {
        Self::quartic_indexed(q, 4)
    }

    /// Quartic family restricted to polynomials whose trailing 4 − `index_dim`
    /// of (a, b, c, d) vanish.
    pub fn quartic_indexed(q: u64, index_dim: u32) -> Result<Self, BrickError> {
        let field = Field::with_order(q).map_err(|e| BrickError::BadParameter(e.to_string()))?;
        if q < 5 {
            return Err(BrickError::BadParameter(format!(
                "quartic family needs q ≥ 5: α = 4/{q} is not below 1"
            )));
        }
        if !(1..=4).contains(&index_dim) {
            return Err(BrickError::BadParameter(format!("index dimension {index_dim} not in 1..=4")));
        }
        Ok(PartitionFamily {
            kind: Kind::Quartic { field },
            mode: Mode::Materialized,
            r1: q,
            r2: q,
            alpha: (4, q),
            index_dim,
            index_count: q.pow(index_dim),
            base_size: q * q,
        })
    }

    /// Family from explicit blocks: `blocks[z0][j − 1]`. Invariants are not
    /// assumed; run [`verify_family`](super::verify_family).
    pub fn explicit(blocks: Vec<Vec<Vec<u64>>>, alpha: (u64, u64)) -> Result<Self, BrickError> {
        let r1 = blocks.first().map_or(0, |b| b.len() as u64);
        let r2 = blocks.first().and_then(|b| b.first()).map_or(0, |s| s.len() as u64);
        if r1 == 0 || r2 == 0 || alpha.1 == 0 {
            return Err(BrickError::BadParameter("empty family".into()));
        }
        let blocks: Vec<Vec<Vec<u64>>> = blocks
            .into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|mut s| {
                        s.sort_unstable();
                        s
                    })
                    .collect()
            })
            .collect();
        let base_size = blocks.iter().flatten().flatten().max().map_or(0, |&m| m + 1).max(r1 * r2);
        let index_count = blocks.len() as u64;
        Ok(PartitionFamily {
            kind: Kind::Explicit { blocks },
            mode: Mode::Materialized,
            r1,
            r2,
            alpha,
            index_dim: 1,
            index_count,
            base_size,
        })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::Matrix { .. } => "matrix",
            Kind::Quartic { .. } => "quartic",
            Kind::Explicit { .. } => "explicit",
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn field(&self) -> Option<&Field> {
        match &self.kind {
            Kind::Matrix { field } | Kind::Quartic { field } => Some(field),
            Kind::Explicit { .. } => None,
        }
    }

    pub fn r1(&self) -> u64 {
        self.r1
    }

    pub fn r2(&self) -> u64 {
        self.r2
    }

    /// α as (numerator, denominator).
    pub fn alpha(&self) -> (u64, u64) {
        self.alpha
    }

    pub fn index_count(&self) -> u64 {
        self.index_count
    }

    pub fn index_dim(&self) -> u32 {
        self.index_dim
    }

    pub fn base_size(&self) -> u64 {
        self.base_size
    }

    /// Whether `count` common points respect |S′ ∩ S″| ≤ α·r₂.
    pub fn within_alpha(&self, count: u64) -> bool {
        count as u128 * self.alpha.1 as u128 <= self.alpha.0 as u128 * self.r2 as u128
    }

    fn q(&self) -> u64 {
        self.field().map_or(0, |f| f.order() as u64)
    }

    /// Full coordinate vector of index z₀ (matrix entries row-major, or
    /// (a, b, c, d)).
    fn index_coords(&self, z0: u64, full: usize) -> Vec<Gf> {
        let f = self.field().expect("algebraic family");
        let mut v = f.decode_vec(z0, self.index_dim as usize);
        v.resize(full, Gf::ZERO);
        v
    }

    pub fn matrix_of(&self, z0: u64) -> Matrix {
        Matrix::from_entries(4, 4, self.index_coords(z0, 16))
    }

    fn quartic_poly(&self, z0: u64, e: Gf) -> [Gf; 5] {
        let c = self.index_coords(z0, 4);
        [c[0], c[1], c[2], c[3], e]
    }

    /// i-th point (0-based) of block (z₀, j).
    pub fn block_point(&self, z0: u64, j: u64, i: u64) -> u64 {
        match &self.kind {
            Kind::Matrix { field } => {
                let q4 = self.r2;
                let x = field.decode_vec(i, 4);
                let b = field.decode_vec(j - 1, 4);
                let ax = self.matrix_of(z0).mul_vec(field, &x);
                let y: Vec<Gf> = ax.iter().zip(&b).map(|(&u, &v)| field.add(u, v)).collect();
                i * q4 + field.encode_vec(&y)
            }
            Kind::Quartic { field } => {
                let x = field.element(i as u32);
                let e = field.element((j - 1) as u32);
                let y = field.eval_poly(&self.quartic_poly(z0, e), x);
                i * self.q() + y.0 as u64
            }
            Kind::Explicit { blocks } => blocks[z0 as usize][(j - 1) as usize][i as usize],
        }
    }

    pub fn block(&self, z0: u64, j: u64) -> Vec<u64> {
        (0..self.r2).map(|i| self.block_point(z0, j, i)).collect()
    }

    /// Index j of the block of Π_{z₀} containing z₂ (the first one, for
    /// explicit families that fail to partition).
    pub fn block_of(&self, z0: u64, z2: u64) -> Option<u64> {
        match &self.kind {
            Kind::Matrix { field } => {
                let q4 = self.r2;
                let x = field.decode_vec(z2 / q4, 4);
                let y = field.decode_vec(z2 % q4, 4);
                let ax = self.matrix_of(z0).mul_vec(field, &x);
                let b: Vec<Gf> = y.iter().zip(&ax).map(|(&u, &v)| field.sub(u, v)).collect();
                Some(field.encode_vec(&b) + 1)
            }
            Kind::Quartic { field } => {
                let q = self.q();
                let x = field.element((z2 / q) as u32);
                let y = field.element((z2 % q) as u32);
                let fx = field.eval_poly(&self.quartic_poly(z0, Gf::ZERO), x);
                Some(field.sub(y, fx).0 as u64 + 1)
            }
            Kind::Explicit { blocks } => blocks[z0 as usize]
                .iter()
                .position(|s| s.binary_search(&z2).is_ok())
                .map(|p| p as u64 + 1),
        }
    }

    /// Rank of z₂ inside block (z₀, j).
    pub fn block_rank(&self, z0: u64, j: u64, z2: u64) -> Option<u64> {
        match &self.kind {
            Kind::Matrix { .. } => (self.block_of(z0, z2) == Some(j)).then(|| z2 / self.r2),
            Kind::Quartic { .. } => (self.block_of(z0, z2) == Some(j)).then(|| z2 / self.q()),
            Kind::Explicit { blocks } => blocks[z0 as usize][(j - 1) as usize]
                .binary_search(&z2)
                .ok()
                .map(|p| p as u64),
        }
    }

    /// |S_{a} ∩ S_{b}| by algebra (matrix: rank formula, quartic: root count).
    pub fn intersection_count(&self, a: (u64, u64), b: (u64, u64)) -> u64 {
        match &self.kind {
            Kind::Matrix { field } => self.matrix_intersection(field, a, b).map_or(0, |s| s.size(field)),
            Kind::Quartic { field } => self.quartic_common_x(field, a, b).len() as u64,
            Kind::Explicit { .. } => self.intersection_brute(a, b).len() as u64,
        }
    }

    /// Intersection points in a fixed order (not necessarily ascending).
    pub fn intersection_point(&self, a: (u64, u64), b: (u64, u64), index: u64) -> u64 {
        match &self.kind {
            Kind::Matrix { field } => {
                let sol = self.matrix_intersection(field, a, b).expect("non-empty intersection");
                let x = sol.point(field, index);
                self.block_point(a.0, a.1, field.encode_vec(&x))
            }
            Kind::Quartic { field } => {
                let xs = self.quartic_common_x(field, a, b);
                self.block_point(a.0, a.1, xs[index as usize])
            }
            Kind::Explicit { .. } => self.intersection_brute(a, b)[index as usize],
        }
    }

    /// Solution set in x of (A′ − A″)x = b″ − b′.
    fn matrix_intersection(&self, field: &Field, a: (u64, u64), b: (u64, u64)) -> Option<crate::field::AffineSolution> {
        let d = self.matrix_of(a.0).sub(field, &self.matrix_of(b.0));
        let ba = field.decode_vec(a.1 - 1, 4);
        let bb = field.decode_vec(b.1 - 1, 4);
        let rhs: Vec<Gf> = bb.iter().zip(&ba).map(|(&u, &v)| field.sub(u, v)).collect();
        d.solve(field, &rhs)
    }

    fn quartic_common_x(&self, field: &Field, a: (u64, u64), b: (u64, u64)) -> Vec<u64> {
        let pa = self.quartic_poly(a.0, field.element((a.1 - 1) as u32));
        let pb = self.quartic_poly(b.0, field.element((b.1 - 1) as u32));
        let diff: Vec<Gf> = pa.iter().zip(&pb).map(|(&u, &v)| field.sub(u, v)).collect();
        (0..self.q()).filter(|&x| field.eval_poly(&diff, field.element(x as u32)).is_zero()).collect()
    }

    /// Intersection by listing one block and testing membership in the other.
    pub fn intersection_brute(&self, a: (u64, u64), b: (u64, u64)) -> Vec<u64> {
        let sb: BTreeSet<u64> = self.block(b.0, b.1).into_iter().collect();
        self.block(a.0, a.1).into_iter().filter(|p| sb.contains(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quartic_shapes() {
        let f = PartitionFamily::quartic(5).unwrap();
        assert_eq!((f.index_count(), f.r1(), f.r2(), f.base_size()), (625, 5, 5, 25));
        assert!(matches!(PartitionFamily::quartic(3), Err(BrickError::BadParameter(_))));
        for j in 1..=5 {
            for p in f.block(17, j) {
                assert_eq!(f.block_of(17, p), Some(j));
            }
        }
        // Same index, different offsets: parallel graphs.
        assert_eq!(f.intersection_count((9, 1), (9, 2)), 0);
    }

    #[test]
    fn matrix_shapes() {
        let f = PartitionFamily::matrix(2, Mode::Materialized).unwrap();
        assert_eq!((f.r1(), f.r2(), f.base_size()), (16, 16, 256));
        assert_eq!(f.intersection_count((5, 3), (5, 4)), 0);
        assert_eq!(f.intersection_count((5, 3), (5, 3)), 16);
    }

    #[test]
    fn matrix_rank_formula_matches_brute_force() {
        let f = PartitionFamily::matrix(2, Mode::Materialized).unwrap();
        let field = f.field().unwrap().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = (rng.random_range(0..f.index_count()), rng.random_range(1..=16));
            let b = (rng.random_range(0..f.index_count()), rng.random_range(1..=16));
            let brute = f.intersection_brute(a, b);
            assert_eq!(f.intersection_count(a, b), brute.len() as u64);
            if a.0 != b.0 && !brute.is_empty() {
                let rank = f.matrix_of(a.0).sub(&field, &f.matrix_of(b.0)).rank(&field);
                assert_eq!(brute.len() as u64, 2u64.pow(4 - rank as u32));
            }
            let mut pts: Vec<u64> = (0..brute.len() as u64).map(|i| f.intersection_point(a, b, i)).collect();
            pts.sort_unstable();
            assert_eq!(pts, brute);
        }
    }

    #[test]
    fn embedded_indices_use_leading_coordinates() {
        let f = PartitionFamily::matrix_indexed(2, 8, Mode::Materialized).unwrap();
        assert_eq!(f.index_count(), 256);
        let m = f.matrix_of(255);
        assert!((8..16).all(|k| m.entries()[k].is_zero()));
        assert!((0..8).all(|k| m.entries()[k] == Gf::ONE));
    }
}
