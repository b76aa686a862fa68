use super::{Field, Gf};

/// L = K[x]/(x² + c₁x + c₀), the field with q² elements, together with the
/// coefficient bijection K² → L, (a, b) ↦ a + b·x̄.
#[derive(Debug, Clone)]
pub struct QuadraticExtension {
    base: Field,
    c0: Gf,
    c1: Gf,
}

impl QuadraticExtension {
    /// Uses the smallest monic irreducible quadratic over K (c₁ most significant).
    pub fn new(base: Field) -> QuadraticExtension {
        let q = base.order();
        let (c0, c1) = (0..q * q)
            .map(|idx| (Gf(idx % q), Gf(idx / q)))
            .find(|&(c0, c1)| {
                base.elements().all(|x| {
                    let v = base.add(base.add(base.mul(x, x), base.mul(c1, x)), c0);
                    !v.is_zero()
                })
            })
            .expect("an irreducible quadratic exists over every finite field");
        QuadraticExtension { base, c0, c1 }
    }

    pub fn base(&self) -> &Field {
        &self.base
    }

    pub fn order(&self) -> u64 {
        let q = self.base.order() as u64;
        q * q
    }

    /// Coefficients (c₀, c₁) of the modulus x² + c₁x + c₀.
    pub fn modulus(&self) -> (Gf, Gf) {
        (self.c0, self.c1)
    }

    /// The bijection K² → L; codes are `a + b·q`.
    pub fn to_ext(&self, a: Gf, b: Gf) -> u64 {
        a.0 as u64 + b.0 as u64 * self.base.order() as u64
    }

    pub fn from_ext(&self, code: u64) -> (Gf, Gf) {
        let q = self.base.order() as u64;
        assert!(code < q * q);
        (Gf((code % q) as u32), Gf((code / q) as u32))
    }

    pub fn add(&self, x: u64, y: u64) -> u64 {
        let f = &self.base;
        let ((a, b), (c, d)) = (self.from_ext(x), self.from_ext(y));
        self.to_ext(f.add(a, c), f.add(b, d))
    }

    pub fn mul(&self, x: u64, y: u64) -> u64 {
        let f = &self.base;
        let ((a, b), (c, d)) = (self.from_ext(x), self.from_ext(y));
        // (a + b t)(c + d t) with t² = -c₁ t - c₀
        let bd = f.mul(b, d);
        let constant = f.sub(f.mul(a, c), f.mul(bd, self.c0));
        let linear = f.sub(f.add(f.mul(a, d), f.mul(b, c)), f.mul(bd, self.c1));
        self.to_ext(constant, linear)
    }

    pub fn inv(&self, x: u64) -> Option<u64> {
        if x == 0 {
            return None;
        }
        (1..self.order()).find(|&y| self.mul(x, y) == 1)
    }
}
