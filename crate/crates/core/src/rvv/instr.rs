use std::fmt;

use super::vtype::{Eew, VType};
use crate::{Error, Result};

/// Architectural vector register index in `[0, 31]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VReg(u8);

impl VReg {
    pub const V0: VReg = VReg(0);

    pub fn new(idx: u32) -> Result<Self> {
        if idx < 32 {
            Ok(VReg(idx as u8))
        } else {
            Err(Error::illegal(format!("register v{idx} out of range")))
        }
    }

    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VReg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// First source operand: a vector register, an integer scalar or a float scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Src {
    V(VReg),
    X(i64),
    F(f64),
}

impl fmt::Display for Src {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Src::V(r) => write!(f, "{r}"),
            Src::X(x) => write!(f, "{x}"),
            Src::F(x) => {
                if x.fract() == 0.0 && x.is_finite() {
                    write!(f, "{x:.1}")
                } else {
                    write!(f, "{x:?}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    And,
    Or,
    Xor,
    Mul,
    Macc,
    Mv,
    FAdd,
    FMul,
    FMacc,
}

impl ArithOp {
    pub fn mnemonic(self) -> &'static str {
        match self {
            ArithOp::Add => "vadd",
            ArithOp::Sub => "vsub",
            ArithOp::And => "vand",
            ArithOp::Or => "vor",
            ArithOp::Xor => "vxor",
            ArithOp::Mul => "vmul",
            ArithOp::Macc => "vmacc",
            ArithOp::Mv => "vmv",
            ArithOp::FAdd => "vfadd",
            ArithOp::FMul => "vfmul",
            ArithOp::FMacc => "vfmacc",
        }
    }

    pub fn is_float(self) -> bool {
        matches!(self, ArithOp::FAdd | ArithOp::FMul | ArithOp::FMacc)
    }

    /// Multiplies and FP ops run on the multiplier/FPU unit, the rest on the ALU.
    pub fn uses_multiplier(self) -> bool {
        matches!(self, ArithOp::Mul | ArithOp::Macc) || self.is_float()
    }

    /// Reads the destination as an accumulator.
    pub fn accumulates(self) -> bool {
        matches!(self, ArithOp::Macc | ArithOp::FMacc)
    }

    pub fn flops_per_element(self) -> u64 {
        match self {
            ArithOp::FMacc => 2,
            ArithOp::FAdd | ArithOp::FMul => 1,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WideOp {
    Add,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Lt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlideDir {
    Up,
    Down,
}

/// Coarse instruction class, one per trace construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpClass {
    Config,
    ArithVV,
    ArithVX,
    ArithVF,
    Widening,
    Narrowing,
    MaskGen,
    Slide,
    IntReduction,
    Load,
    Store,
    ScalarLoadEvt,
    ScalarStoreEvt,
    /// Non-memory scalar instruction; occupies one dispatch slot.
    ScalarOp,
    Barrier,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VectorInstr {
    Config { avl: usize, vtype: VType },
    /// `vs2` is absent only for `vmv`.
    Arith { op: ArithOp, vd: VReg, src: Src, vs2: Option<VReg>, masked: bool },
    /// `wide_vs2` selects the `.wv`/`.wx` forms where `vs2` is already 2*SEW wide.
    Widening { op: WideOp, vd: VReg, src: Src, vs2: VReg, wide_vs2: bool, masked: bool },
    /// Narrowing logical right shift; `src` is the shift amount.
    Narrowing { vd: VReg, src: Src, vs2: VReg, masked: bool },
    MaskGen { op: CmpOp, vd: VReg, src: Src, vs2: VReg, masked: bool },
    Slide { dir: SlideDir, vd: VReg, vs2: VReg, offset: usize, masked: bool },
    Reduction { vd: VReg, vs2: VReg, vs1: VReg, masked: bool },
    Load { eew: Eew, vd: VReg, base: u64, stride: Option<i64>, masked: bool },
    Store { eew: Eew, vs3: VReg, base: u64, stride: Option<i64>, masked: bool },
    ScalarLoad { addr: u64 },
    ScalarStore { addr: u64, val: u8 },
    ScalarOp,
    Barrier,
    /// Accepted for compatibility; ordering is enforced in hardware.
    Fence,
}

impl VectorInstr {
    pub fn opclass(&self) -> OpClass {
        match self {
            VectorInstr::Config { .. } => OpClass::Config,
            VectorInstr::Arith { src, .. } => match src {
                Src::V(_) => OpClass::ArithVV,
                Src::X(_) => OpClass::ArithVX,
                Src::F(_) => OpClass::ArithVF,
            },
            VectorInstr::Widening { .. } => OpClass::Widening,
            VectorInstr::Narrowing { .. } => OpClass::Narrowing,
            VectorInstr::MaskGen { .. } => OpClass::MaskGen,
            VectorInstr::Slide { .. } => OpClass::Slide,
            VectorInstr::Reduction { .. } => OpClass::IntReduction,
            VectorInstr::Load { .. } => OpClass::Load,
            VectorInstr::Store { .. } => OpClass::Store,
            VectorInstr::ScalarLoad { .. } => OpClass::ScalarLoadEvt,
            VectorInstr::ScalarStore { .. } => OpClass::ScalarStoreEvt,
            VectorInstr::ScalarOp | VectorInstr::Fence => OpClass::ScalarOp,
            VectorInstr::Barrier => OpClass::Barrier,
        }
    }

    pub fn is_masked(&self) -> bool {
        match *self {
            VectorInstr::Arith { masked, .. }
            | VectorInstr::Widening { masked, .. }
            | VectorInstr::Narrowing { masked, .. }
            | VectorInstr::MaskGen { masked, .. }
            | VectorInstr::Slide { masked, .. }
            | VectorInstr::Reduction { masked, .. }
            | VectorInstr::Load { masked, .. }
            | VectorInstr::Store { masked, .. } => masked,
            _ => false,
        }
    }

    /// True for instructions executed by the vector unit (not the scalar side).
    pub fn is_vector(&self) -> bool {
        !matches!(
            self.opclass(),
            OpClass::ScalarLoadEvt | OpClass::ScalarStoreEvt | OpClass::ScalarOp | OpClass::Barrier
        )
    }
}

fn mask_suffix(masked: bool) -> &'static str {
    if masked {
        ", v0.m"
    } else {
        ""
    }
}

fn src_suffix(src: &Src) -> &'static str {
    match src {
        Src::V(_) => "vv",
        Src::X(_) => "vx",
        Src::F(_) => "vf",
    }
}

fn stride_suffix(stride: Option<i64>) -> String {
    stride.map(|s| format!(", stride={s}")).unwrap_or_default()
}

/// Prints the canonical trace syntax accepted by [`super::decode_line`].
impl fmt::Display for VectorInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorInstr::Config { avl, vtype } => write!(
                f,
                "vsetvli {avl} {} m{} t{} m{}",
                vtype.sew,
                vtype.lmul.factor(),
                if vtype.ta { 'a' } else { 'u' },
                if vtype.ma { 'a' } else { 'u' }
            ),
            VectorInstr::Arith { op, vd, src, vs2, masked } => {
                write!(f, "{}.{} {vd}, {src}", op.mnemonic(), src_suffix(src))?;
                if let Some(vs2) = vs2 {
                    write!(f, ", {vs2}")?;
                }
                f.write_str(mask_suffix(*masked))
            }
            VectorInstr::Widening { op, vd, src, vs2, wide_vs2, masked } => {
                let m = match op {
                    WideOp::Add => "vwadd",
                    WideOp::Mul => "vwmul",
                };
                let sfx = match (wide_vs2, src) {
                    (false, Src::V(_)) => "vv",
                    (false, _) => "vx",
                    (true, Src::V(_)) => "wv",
                    (true, _) => "wx",
                };
                write!(f, "{m}.{sfx} {vd}, {src}, {vs2}{}", mask_suffix(*masked))
            }
            VectorInstr::Narrowing { vd, src, vs2, masked } => {
                let sfx = if matches!(src, Src::V(_)) { "wv" } else { "wx" };
                write!(f, "vnsrl.{sfx} {vd}, {src}, {vs2}{}", mask_suffix(*masked))
            }
            VectorInstr::MaskGen { op, vd, src, vs2, masked } => {
                let m = match op {
                    CmpOp::Eq => "vmseq",
                    CmpOp::Lt => "vmslt",
                };
                write!(f, "{m}.{} {vd}, {src}, {vs2}{}", src_suffix(src), mask_suffix(*masked))
            }
            VectorInstr::Slide { dir, vd, vs2, offset, masked } => {
                let m = match dir {
                    SlideDir::Up => "vslideup",
                    SlideDir::Down => "vslidedown",
                };
                write!(f, "{m} {vd}, {vs2}, {offset}{}", mask_suffix(*masked))
            }
            VectorInstr::Reduction { vd, vs2, vs1, masked } => {
                write!(f, "vredsum.vs {vd}, {vs2}, {vs1}{}", mask_suffix(*masked))
            }
            VectorInstr::Load { eew, vd, base, stride, masked } => write!(
                f,
                "vle{} {vd}, base={base:#x}{}{}",
                eew.bits(),
                stride_suffix(*stride),
                mask_suffix(*masked)
            ),
            VectorInstr::Store { eew, vs3, base, stride, masked } => write!(
                f,
                "vse{} {vs3}, base={base:#x}{}{}",
                eew.bits(),
                stride_suffix(*stride),
                mask_suffix(*masked)
            ),
            VectorInstr::ScalarLoad { addr } => write!(f, "sload addr={addr:#x}"),
            VectorInstr::ScalarStore { addr, val } => write!(f, "sstore addr={addr:#x} val={val}"),
            VectorInstr::ScalarOp => f.write_str("sop"),
            VectorInstr::Barrier => f.write_str("barrier"),
            VectorInstr::Fence => f.write_str("fence"),
        }
    }
}
