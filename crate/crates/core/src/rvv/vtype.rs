use std::fmt;

use crate::{Error, Result};

/// Element width. Used both as SEW (selected) and EEW (effective/encoded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Eew {
    E8,
    E16,
    E32,
    E64,
}

impl Eew {
    pub const ALL: [Eew; 4] = [Eew::E8, Eew::E16, Eew::E32, Eew::E64];

    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            8 => Ok(Eew::E8),
            16 => Ok(Eew::E16),
            32 => Ok(Eew::E32),
            64 => Ok(Eew::E64),
            _ => Err(Error::illegal(format!("element width {bits} not in {{8,16,32,64}}"))),
        }
    }

    pub fn bits(self) -> u32 {
        8 << (self as u32)
    }

    pub fn bytes(self) -> usize {
        1 << (self as usize)
    }

    pub fn double(self) -> Option<Eew> {
        match self {
            Eew::E8 => Some(Eew::E16),
            Eew::E16 => Some(Eew::E32),
            Eew::E32 => Some(Eew::E64),
            Eew::E64 => None,
        }
    }

    pub fn half(self) -> Option<Eew> {
        match self {
            Eew::E8 => None,
            Eew::E16 => Some(Eew::E8),
            Eew::E32 => Some(Eew::E16),
            Eew::E64 => Some(Eew::E32),
        }
    }
}

impl fmt::Display for Eew {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.bits())
    }
}

/// Register-group multiplier. Fractional LMUL is not modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lmul {
    M1,
    M2,
    M4,
    M8,
}

impl Lmul {
    pub const ALL: [Lmul; 4] = [Lmul::M1, Lmul::M2, Lmul::M4, Lmul::M8];

    pub fn from_factor(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Lmul::M1),
            2 => Ok(Lmul::M2),
            4 => Ok(Lmul::M4),
            8 => Ok(Lmul::M8),
            _ => Err(Error::illegal(format!("LMUL {n} not in {{1,2,4,8}}"))),
        }
    }

    pub fn factor(self) -> usize {
        1 << (self as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VType {
    pub sew: Eew,
    pub lmul: Lmul,
    /// Tail-agnostic request. Executed as tail-undisturbed.
    pub ta: bool,
    /// Mask-agnostic request. Executed as mask-undisturbed.
    pub ma: bool,
}

impl VType {
    pub fn new(sew: Eew, lmul: Lmul) -> Self {
        VType { sew, lmul, ta: false, ma: false }
    }
}

impl Default for VType {
    fn default() -> Self {
        VType::new(Eew::E64, Lmul::M1)
    }
}

pub const DEFAULT_VLEN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsrState {
    pub vl: usize,
    pub vtype: VType,
    /// Bits per vector register.
    pub vlen: usize,
}

impl CsrState {
    pub fn new(vlen: usize) -> Result<Self> {
        if vlen < 64 || !vlen.is_power_of_two() {
            return Err(Error::Config(format!("VLEN {vlen} must be a power of two >= 64")));
        }
        Ok(CsrState { vl: 0, vtype: VType::default(), vlen })
    }

    pub fn vlmax(&self) -> usize {
        vlmax(self.vlen, self.vtype)
    }

    pub fn vlenb(&self) -> usize {
        self.vlen / 8
    }
}

impl Default for CsrState {
    fn default() -> Self {
        CsrState { vl: 0, vtype: VType::default(), vlen: DEFAULT_VLEN }
    }
}

pub fn vlmax(vlen: usize, vtype: VType) -> usize {
    vtype.lmul.factor() * vlen / vtype.sew.bits() as usize
}

/// `vsetvli`: vl = min(avl, VLMAX) for the requested vtype.
pub fn set_vtype(avl: usize, req: VType, csr: &CsrState) -> Result<CsrState> {
    let max = vlmax(csr.vlen, req);
    if max == 0 {
        return Err(Error::illegal(format!(
            "{} with LMUL {} leaves no element in VLEN {}",
            req.sew,
            req.lmul.factor(),
            csr.vlen
        )));
    }
    Ok(CsrState { vl: avl.min(max), vtype: req, vlen: csr.vlen })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(sew: u32, lmul: u32) -> VType {
        VType::new(Eew::from_bits(sew).unwrap(), Lmul::from_factor(lmul).unwrap())
    }

    #[test]
    fn vl_examples() {
        let csr = CsrState::default();
        assert_eq!(set_vtype(10, req(64, 1), &csr).unwrap().vl, 10);
        assert_eq!(set_vtype(100, req(64, 1), &csr).unwrap().vl, 64);
        assert_eq!(set_vtype(5000, req(8, 8), &csr).unwrap().vl, 4096);
    }

    #[test]
    fn rejects_illegal_widths() {
        assert!(Eew::from_bits(128).is_err());
        assert!(Lmul::from_factor(3).is_err());
        assert!(CsrState::new(100).is_err());
    }

    #[test]
    fn idempotent_and_bounded() {
        let csr = CsrState::new(512).unwrap();
        for sew in [8, 16, 32, 64] {
            for lmul in [1, 2, 4, 8] {
                for avl in [0, 1, 7, 63, 64, 65, 1000, 100_000] {
                    let a = set_vtype(avl, req(sew, lmul), &csr).unwrap();
                    let b = set_vtype(avl, req(sew, lmul), &a).unwrap();
                    assert_eq!(a, b);
                    assert!(a.vl <= a.vlmax());
                }
            }
        }
    }
}
