use super::{gcd_u64, kronecker, lcm_u64, modp};
use crate::{Error, Result};

/// A real Dirichlet character: the Kronecker character (D/·), optionally
/// multiplied by the principal character mod `principal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirichletCharacter {
    modulus: u64,
    principal: u64,
    disc: Option<i64>,
}

impl DirichletCharacter {
    /// χ₀[n].
    pub fn principal(n: u64) -> Self {
        assert!(n >= 1);
        Self { modulus: n, principal: n, disc: None }
    }

    /// (D/·) for a discriminant D ≡ 0, 1 mod 4.
    pub fn kronecker(d: i64) -> Result<Self> {
        Self::product(1, d)
    }

    /// χ₀[n]·(D/·).
    pub fn product(n: u64, d: i64) -> Result<Self> {
        if d == 0 || !matches!(modp(d as i128, 4), 0 | 1) {
            return Err(Error::Precondition(format!("{d} is not a discriminant")));
        }
        if d == 1 {
            return Ok(Self::principal(n));
        }
        Ok(Self {
            modulus: lcm_u64(n, d.unsigned_abs()),
            principal: n,
            disc: Some(d),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn discriminant(&self) -> Option<i64> {
        self.disc
    }

    pub fn is_principal(&self) -> bool {
        self.disc.is_none()
    }

    pub fn value(&self, n: i64) -> i8 {
        let r = modp(n as i128, self.modulus as i128) as u64;
        if gcd_u64(r, self.modulus) != 1 {
            return 0;
        }
        match self.disc {
            None => 1,
            Some(d) => kronecker(d, r as i64),
        }
    }
}
