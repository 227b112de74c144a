use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rvv::{ArithOp, Eew, FlatMachineState, Lmul, ProgramTrace, Src, VReg, VType, VectorInstr};
use crate::{Error, Result};

pub const A_BASE: u64 = 0x10_0000;
pub const B_BASE: u64 = 0x40_0000;
pub const C_BASE: u64 = 0x70_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `n` x `n` double-precision matmul; `gap` dispatch slots per FMA.
    Fmatmul { n: usize, gap: usize },
    /// `n` x `n` image, 3 channels, 7 x 7 filter, double precision.
    Fconv2d { n: usize },
    /// Integer dot product over `bytes` bytes of `eew` elements.
    Dotp { bytes: usize, eew: Eew },
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Fmatmul { .. } => "fmatmul",
            Kernel::Fconv2d { .. } => "fconv2d",
            Kernel::Dotp { .. } => "dotp",
        }
    }

    pub fn size(&self) -> usize {
        match *self {
            Kernel::Fmatmul { n, .. } | Kernel::Fconv2d { n } => n,
            Kernel::Dotp { bytes, .. } => bytes,
        }
    }

    /// Useful floating-point operations (zero for integer kernels).
    pub fn flops(&self) -> u64 {
        match *self {
            Kernel::Fmatmul { n, .. } => 2 * (n as u64).pow(3),
            Kernel::Fconv2d { n } => 2 * 3 * 49 * (n as u64).pow(2),
            Kernel::Dotp { .. } => 0,
        }
    }

    pub fn parse(name: &str, size: usize) -> Result<Self> {
        match name {
            "fmatmul" => Ok(Kernel::Fmatmul { n: size, gap: 4 }),
            "fconv2d" => Ok(Kernel::Fconv2d { n: size }),
            "dotp" => Ok(Kernel::Dotp { bytes: size, eew: Eew::E64 }),
            _ => Err(Error::Config(format!("unknown kernel `{name}`"))),
        }
    }
}

/// A generated benchmark: trace, initial memory and the output region.
#[derive(Debug, Clone)]
pub struct KernelInstance {
    pub kernel: Kernel,
    pub trace: ProgramTrace,
    pub init: FlatMachineState,
    /// Trace index where the measured region starts (dotp only).
    pub measure_from: usize,
}

fn lmul_for(bytes: usize, vlenb: usize) -> Result<Lmul> {
    let regs = bytes.div_ceil(vlenb).next_power_of_two();
    Lmul::from_factor(regs as u32).map_err(|_| Error::Config(format!("{bytes} bytes do not fit in eight registers")))
}

fn reg(i: usize) -> VReg {
    VReg::new(i as u32).expect("generated register index is in range")
}

fn small_f64(rng: &mut impl Rng) -> f64 {
    f64::from(rng.gen_range(-4i32..=4))
}

fn write_f64s(state: &mut FlatMachineState, base: u64, vals: &[f64]) {
    for (i, v) in vals.iter().enumerate() {
        state.write_bytes(base + 8 * i as u64, &v.to_le_bytes());
    }
}

pub fn read_f64s(state: &FlatMachineState, base: u64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let b = state.read_bytes(base + 8 * i as u64, 8);
            f64::from_le_bytes(b.try_into().expect("eight bytes"))
        })
        .collect()
}

pub fn generate(kernel: Kernel, vlen: usize, seed: u64) -> Result<KernelInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kernel {
        Kernel::Fmatmul { n, gap } => fmatmul(n, gap, vlen, &mut rng),
        Kernel::Fconv2d { n } => fconv2d(n, vlen, &mut rng),
        Kernel::Dotp { bytes, eew } => dotp(bytes, eew, vlen, &mut rng),
    }
    .map(|(trace, init, measure_from)| KernelInstance { kernel, trace, init, measure_from })
}

/// Row-block outer-product matmul: C[i] += A[i][k] * B[k] with double-buffered B rows.
fn fmatmul(n: usize, gap: usize, vlen: usize, rng: &mut impl Rng) -> Result<(ProgramTrace, FlatMachineState, usize)> {
    if n == 0 || gap < 2 {
        return Err(Error::Config("fmatmul needs n >= 1 and a gap of at least 2".into()));
    }
    let vlenb = vlen / 8;
    let lmul = lmul_for(n * 8, vlenb)?;
    let l = lmul.factor();
    let rows = n.min(8).min(32 / l - 2);
    if rows == 0 {
        return Err(Error::Config(format!("n = {n} leaves no room for accumulators")));
    }
    let mut init = FlatMachineState::new(vlen);
    let a: Vec<f64> = (0..n * n).map(|_| small_f64(rng)).collect();
    let b: Vec<f64> = (0..n * n).map(|_| small_f64(rng)).collect();
    write_f64s(&mut init, A_BASE, &a);
    write_f64s(&mut init, B_BASE, &b);

    let mut t = ProgramTrace::new();
    t.push(VectorInstr::Config { avl: n, vtype: VType::new(Eew::E64, lmul) });
    let bufs = [reg(rows * l), reg((rows + 1) * l)];
    for i0 in (0..n).step_by(rows) {
        let block = rows.min(n - i0);
        let load_b = |t: &mut ProgramTrace, k: usize| {
            t.push(VectorInstr::Load { eew: Eew::E64, vd: bufs[k % 2], base: B_BASE + (k * n * 8) as u64, stride: None, masked: false });
        };
        load_b(&mut t, 0);
        for k in 0..n {
            let vb = bufs[k % 2];
            if k + 1 < n {
                load_b(&mut t, k + 1);
            }
            for r in 0..block {
                let i = i0 + r;
                t.push(VectorInstr::ScalarLoad { addr: A_BASE + ((i * n + k) * 8) as u64 });
                for _ in 0..gap - 2 {
                    t.push(VectorInstr::ScalarOp);
                }
                let op = if k == 0 { ArithOp::FMul } else { ArithOp::FMacc };
                t.push(VectorInstr::Arith { op, vd: reg(r * l), src: Src::F(a[i * n + k]), vs2: Some(vb), masked: false });
            }
        }
        for r in 0..block {
            let i = i0 + r;
            t.push(VectorInstr::Store { eew: Eew::E64, vs3: reg(r * l), base: C_BASE + (i * n * 8) as u64, stride: None, masked: false });
        }
    }
    Ok((t, init, 0))
}

/// Direct 7 x 7 convolution over three channels, one output row at a time.
fn fconv2d(n: usize, vlen: usize, rng: &mut impl Rng) -> Result<(ProgramTrace, FlatMachineState, usize)> {
    const K: usize = 7;
    const CH: usize = 3;
    if n == 0 {
        return Err(Error::Config("fconv2d needs n >= 1".into()));
    }
    let w = n + K - 1;
    let lmul = lmul_for(w * 8, vlen / 8)?;
    let l = lmul.factor();
    if 3 * l > 32 {
        return Err(Error::Config(format!("image width {n} does not fit")));
    }
    let mut init = FlatMachineState::new(vlen);
    let img: Vec<f64> = (0..CH * w * w).map(|_| small_f64(rng)).collect();
    let filt: Vec<f64> = (0..CH * K * K).map(|_| small_f64(rng)).collect();
    write_f64s(&mut init, A_BASE, &img);
    write_f64s(&mut init, B_BASE, &filt);

    let mut t = ProgramTrace::new();
    t.push(VectorInstr::Config { avl: n, vtype: VType::new(Eew::E64, lmul) });
    let acc = reg(0);
    let bufs = [reg(l), reg(2 * l)];
    let mut step = 0;
    for y in 0..n {
        for c in 0..CH {
            for ky in 0..K {
                for kx in 0..K {
                    let vin = bufs[step % 2];
                    let base = A_BASE + ((c * w * w + (y + ky) * w + kx) * 8) as u64;
                    t.push(VectorInstr::Load { eew: Eew::E64, vd: vin, base, stride: None, masked: false });
                    let f = filt[c * K * K + ky * K + kx];
                    t.push(VectorInstr::ScalarLoad { addr: B_BASE + ((c * K * K + ky * K + kx) * 8) as u64 });
                    let op = if step % (CH * K * K) == 0 { ArithOp::FMul } else { ArithOp::FMacc };
                    t.push(VectorInstr::Arith { op, vd: acc, src: Src::F(f), vs2: Some(vin), masked: false });
                    step += 1;
                }
            }
        }
        t.push(VectorInstr::Store { eew: Eew::E64, vs3: acc, base: C_BASE + (y * n * 8) as u64, stride: None, masked: false });
    }
    Ok((t, init, 0))
}

/// Loads two vectors, drains, then times the multiply and the sum reduction.
fn dotp(bytes: usize, eew: Eew, vlen: usize, rng: &mut impl Rng) -> Result<(ProgramTrace, FlatMachineState, usize)> {
    let eb = eew.bytes();
    if bytes == 0 || !bytes.is_multiple_of(eb) {
        return Err(Error::Config(format!("{bytes} bytes is not a whole number of {eew} elements")));
    }
    let lmul = lmul_for(bytes, vlen / 8)?;
    let vl = bytes / eb;
    let mut init = FlatMachineState::new(vlen);
    for i in 0..bytes as u64 {
        init.write_byte(A_BASE + i, rng.gen_range(0..4));
        init.write_byte(B_BASE + i, rng.gen_range(0..4));
    }
    let (x, y, p, z) = (reg(8), reg(16), reg(24), reg(0));
    let mut t = ProgramTrace::new();
    t.push(VectorInstr::Config { avl: vl, vtype: VType::new(eew, lmul) });
    t.push(VectorInstr::Load { eew, vd: x, base: A_BASE, stride: None, masked: false });
    t.push(VectorInstr::Load { eew, vd: y, base: B_BASE, stride: None, masked: false });
    t.push(VectorInstr::Arith { op: ArithOp::Mv, vd: z, src: Src::X(0), vs2: None, masked: false });
    t.push(VectorInstr::Barrier);
    let measure_from = t.len();
    t.push(VectorInstr::Arith { op: ArithOp::Mul, vd: p, src: Src::V(x), vs2: Some(y), masked: false });
    t.push(VectorInstr::Reduction { vd: reg(1), vs2: p, vs1: z, masked: false });
    t.push(VectorInstr::Config { avl: 1, vtype: VType::new(eew, Lmul::M1) });
    t.push(VectorInstr::Store { eew, vs3: reg(1), base: C_BASE, stride: None, masked: false });
    Ok((t, init, measure_from))
}

/// Dense reference result for the kernel's output region.
pub fn reference(inst: &KernelInstance) -> Vec<f64> {
    match inst.kernel {
        Kernel::Fmatmul { n, .. } => {
            let a = read_f64s(&inst.init, A_BASE, n * n);
            let b = read_f64s(&inst.init, B_BASE, n * n);
            let mut c = vec![0.0; n * n];
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        c[i * n + j] += a[i * n + k] * b[k * n + j];
                    }
                }
            }
            c
        }
        Kernel::Fconv2d { n } => {
            let w = n + 6;
            let img = read_f64s(&inst.init, A_BASE, 3 * w * w);
            let f = read_f64s(&inst.init, B_BASE, 3 * 49);
            let mut out = vec![0.0; n * n];
            for y in 0..n {
                for x in 0..n {
                    let mut s = 0.0;
                    for c in 0..3 {
                        for ky in 0..7 {
                            for kx in 0..7 {
                                s += img[c * w * w + (y + ky) * w + x + kx] * f[c * 49 + ky * 7 + kx];
                            }
                        }
                    }
                    out[y * n + x] = s;
                }
            }
            out
        }
        Kernel::Dotp { bytes, eew } => {
            let eb = eew.bytes();
            let mask = if eb == 8 { u64::MAX } else { (1u64 << (8 * eb)) - 1 };
            let mut acc = 0u64;
            for i in 0..bytes / eb {
                let a = inst.init.read_bytes(A_BASE + (i * eb) as u64, eb);
                let b = inst.init.read_bytes(B_BASE + (i * eb) as u64, eb);
                let le = |v: Vec<u8>| v.iter().rev().fold(0u64, |s, x| s << 8 | u64::from(*x));
                acc = acc.wrapping_add(le(a).wrapping_mul(le(b))) & mask;
            }
            vec![acc as f64]
        }
    }
}

/// Reads the kernel's output region back from a final state.
pub fn output(inst: &KernelInstance, state: &FlatMachineState) -> Vec<f64> {
    match inst.kernel {
        Kernel::Fmatmul { n, .. } | Kernel::Fconv2d { n } => read_f64s(state, C_BASE, n * n),
        Kernel::Dotp { eew, .. } => {
            let b = state.read_bytes(C_BASE, eew.bytes());
            vec![b.iter().rev().fold(0u64, |s, x| s << 8 | u64::from(*x)) as f64]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rvv::run_program;

    #[test]
    fn kernels_match_dense_references() {
        for k in [
            Kernel::Fmatmul { n: 8, gap: 4 },
            Kernel::Fmatmul { n: 12, gap: 5 },
            Kernel::Fconv2d { n: 4 },
            Kernel::Dotp { bytes: 64, eew: Eew::E8 },
            Kernel::Dotp { bytes: 512, eew: Eew::E64 },
        ] {
            let inst = generate(k, 1024, 7).unwrap();
            let res = run_program(&inst.trace, inst.init.clone()).unwrap();
            assert_eq!(output(&inst, &res.state), reference(&inst), "{k:?}");
        }
    }
}
