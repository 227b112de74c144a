use super::instr::{ArithOp, CmpOp, SlideDir, Src, VReg, VectorInstr, WideOp};
use super::vtype::{Eew, Lmul, VType};
use crate::{Error, Result};

/// Decodes one trace line (comment and surrounding whitespace already allowed).
///
/// Errors carry line number 0; [`super::ProgramTrace::parse`] fills in the real one.
pub fn decode_line(text: &str) -> Result<VectorInstr> {
    decode(text).map_err(|msg| Error::Decode { line: 0, msg })
}

type Res<T> = std::result::Result<T, String>;

fn decode(text: &str) -> Res<VectorInstr> {
    let text = text.split('#').next().unwrap_or("").trim();
    if text.is_empty() {
        return Err("empty line".into());
    }
    let (mnemonic, rest) = match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim()),
        None => (text, ""),
    };
    let mut ops: Vec<&str> = rest
        .split(|c: char| c == ',' || c.is_whitespace())
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let masked = match ops.last() {
        Some(&"v0.m") | Some(&"v0.t") => {
            ops.pop();
            true
        }
        _ => false,
    };
    let (base, suffix) = match mnemonic.split_once('.') {
        Some((b, s)) => (b, Some(s)),
        None => (mnemonic, None),
    };

    match base {
        "vsetvli" => config(&ops, masked),
        "sload" => {
            no_mask(masked)?;
            let kv = keyvals(&ops)?;
            Ok(VectorInstr::ScalarLoad { addr: req_u64(&kv, "addr")? })
        }
        "sstore" => {
            no_mask(masked)?;
            let kv = keyvals(&ops)?;
            let val = req_u64(&kv, "val")?;
            let val = u8::try_from(val).map_err(|_| format!("sstore value {val} is not a byte"))?;
            Ok(VectorInstr::ScalarStore { addr: req_u64(&kv, "addr")?, val })
        }
        "sop" | "barrier" | "fence" => {
            no_mask(masked)?;
            if !ops.is_empty() {
                return Err(format!("{base} takes no operands"));
            }
            Ok(match base {
                "sop" => VectorInstr::ScalarOp,
                "barrier" => VectorInstr::Barrier,
                _ => VectorInstr::Fence,
            })
        }
        "vslideup" | "vslidedown" => {
            arity(&ops, 3, base)?;
            let offset = parse_int(ops[2])?;
            let offset = usize::try_from(offset).map_err(|_| format!("negative slide offset {offset}"))?;
            let dir = if base == "vslideup" { SlideDir::Up } else { SlideDir::Down };
            Ok(VectorInstr::Slide { dir, vd: vreg(ops[0])?, vs2: vreg(ops[1])?, offset, masked })
        }
        "vredsum" => {
            arity(&ops, 3, base)?;
            expect_suffix(suffix, &["vs"], base)?;
            Ok(VectorInstr::Reduction { vd: vreg(ops[0])?, vs2: vreg(ops[1])?, vs1: vreg(ops[2])?, masked })
        }
        b if b.starts_with("vle") || b.starts_with("vse") => memory(b, suffix, &ops, masked),
        _ => arith(base, suffix, &ops, masked),
    }
}

fn no_mask(masked: bool) -> Res<()> {
    if masked {
        Err("instruction cannot be masked".into())
    } else {
        Ok(())
    }
}

fn arity(ops: &[&str], n: usize, what: &str) -> Res<()> {
    if ops.len() == n {
        Ok(())
    } else {
        Err(format!("{what} expects {n} operands, got {}", ops.len()))
    }
}

fn expect_suffix(suffix: Option<&str>, allowed: &[&str], base: &str) -> Res<()> {
    match suffix {
        Some(s) if allowed.contains(&s) => Ok(()),
        Some(s) => Err(format!("{base}.{s}: unsupported operand form")),
        None => Err(format!("{base}: missing operand-form suffix")),
    }
}

fn vreg(tok: &str) -> Res<VReg> {
    let idx = tok
        .strip_prefix('v')
        .and_then(|n| n.parse::<u32>().ok())
        .ok_or_else(|| format!("malformed vector register `{tok}`"))?;
    VReg::new(idx).map_err(|e| e.to_string())
}

fn is_vreg(tok: &str) -> bool {
    tok.strip_prefix('v').is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

fn parse_int(tok: &str) -> Res<i64> {
    let (neg, body) = match tok.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, tok),
    };
    let mag = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).map_err(|_| format!("malformed integer `{tok}`"))? as i64
    } else {
        body.parse::<u64>().map_err(|_| format!("malformed integer `{tok}`"))? as i64
    };
    Ok(if neg { mag.wrapping_neg() } else { mag })
}

fn parse_float(tok: &str) -> Res<f64> {
    tok.parse::<f64>().map_err(|_| format!("malformed float `{tok}`"))
}

fn keyvals<'a>(ops: &[&'a str]) -> Res<Vec<(&'a str, &'a str)>> {
    ops.iter()
        .map(|t| t.split_once('=').ok_or_else(|| format!("expected key=value, got `{t}`")))
        .collect()
}

fn req_u64(kv: &[(&str, &str)], key: &str) -> Res<u64> {
    let (_, v) = kv
        .iter()
        .find(|(k, _)| *k == key)
        .ok_or_else(|| format!("missing `{key}=`"))?;
    let x = parse_int(v)?;
    u64::try_from(x).map_err(|_| format!("`{key}` must be non-negative"))
}

fn config(ops: &[&str], masked: bool) -> Res<VectorInstr> {
    if masked {
        return Err("vsetvli cannot be masked".into());
    }
    arity(ops, 5, "vsetvli")?;
    let avl = parse_int(ops[0])?;
    let avl = usize::try_from(avl).map_err(|_| format!("negative AVL {avl}"))?;
    let sew = ops[1]
        .strip_prefix('e')
        .and_then(|s| s.parse::<u32>().ok())
        .ok_or_else(|| format!("malformed SEW `{}`", ops[1]))?;
    let lmul = ops[2]
        .strip_prefix('m')
        .and_then(|s| s.parse::<u32>().ok())
        .ok_or_else(|| format!("malformed LMUL `{}`", ops[2]))?;
    let policy = |tok: &str, prefix: char| -> Res<bool> {
        match tok.strip_prefix(prefix) {
            Some("a") => Ok(true),
            Some("u") => Ok(false),
            _ => Err(format!("malformed policy `{tok}`")),
        }
    };
    let vtype = VType {
        sew: Eew::from_bits(sew).map_err(|e| e.to_string())?,
        lmul: Lmul::from_factor(lmul).map_err(|e| e.to_string())?,
        ta: policy(ops[3], 't')?,
        ma: policy(ops[4], 'm')?,
    };
    Ok(VectorInstr::Config { avl, vtype })
}

fn memory(base: &str, suffix: Option<&str>, ops: &[&str], masked: bool) -> Res<VectorInstr> {
    if let Some(s) = suffix {
        if s != "v" {
            return Err(format!("{base}.{s}: unsupported memory form"));
        }
    }
    let eew = base[3..]
        .parse::<u32>()
        .map_err(|_| format!("malformed memory mnemonic `{base}`"))
        .and_then(|b| Eew::from_bits(b).map_err(|e| e.to_string()))?;
    let (reg, rest) = ops.split_first().ok_or("missing register operand")?;
    let reg = vreg(reg)?;
    let kv = keyvals(rest)?;
    if let Some((k, _)) = kv.iter().find(|(k, _)| *k != "base" && *k != "stride") {
        return Err(format!("unknown memory operand `{k}`"));
    }
    let addr = req_u64(&kv, "base")?;
    let stride = match kv.iter().find(|(k, _)| *k == "stride") {
        Some((_, v)) => Some(parse_int(v)?),
        None => None,
    };
    Ok(if base.starts_with("vle") {
        VectorInstr::Load { eew, vd: reg, base: addr, stride, masked }
    } else {
        VectorInstr::Store { eew, vs3: reg, base: addr, stride, masked }
    })
}

/// Splits the two operands after `vd` into (scalar-or-vector first source, vs2).
/// Scalar forms accept the scalar on either side of `vs2`.
fn sources(form: &str, a: &str, b: &str) -> Res<(Src, VReg)> {
    match form {
        "vv" | "wv" => Ok((Src::V(vreg(a)?), vreg(b)?)),
        "vx" | "wx" | "vi" => {
            let (s, v) = if is_vreg(a) && !is_vreg(b) { (b, a) } else { (a, b) };
            Ok((Src::X(parse_int(s)?), vreg(v)?))
        }
        "vf" => {
            let (s, v) = if is_vreg(a) && !is_vreg(b) { (b, a) } else { (a, b) };
            Ok((Src::F(parse_float(s)?), vreg(v)?))
        }
        _ => Err(format!("unsupported operand form `.{form}`")),
    }
}

fn arith(base: &str, suffix: Option<&str>, ops: &[&str], masked: bool) -> Res<VectorInstr> {
    let form = suffix.ok_or_else(|| format!("`{base}`: missing operand-form suffix"))?;
    let op = match base {
        "vadd" => Some(ArithOp::Add),
        "vsub" => Some(ArithOp::Sub),
        "vand" => Some(ArithOp::And),
        "vor" => Some(ArithOp::Or),
        "vxor" => Some(ArithOp::Xor),
        "vmul" => Some(ArithOp::Mul),
        "vmacc" => Some(ArithOp::Macc),
        "vmv" => Some(ArithOp::Mv),
        "vfadd" => Some(ArithOp::FAdd),
        "vfmul" => Some(ArithOp::FMul),
        "vfmacc" => Some(ArithOp::FMacc),
        _ => None,
    };
    if let Some(op) = op {
        if op == ArithOp::Mv {
            arity(ops, 2, base)?;
            let src = match form {
                "vv" | "v" => Src::V(vreg(ops[1])?),
                "vx" | "vi" | "x" => Src::X(parse_int(ops[1])?),
                _ => return Err(format!("vmv.{form}: unsupported operand form")),
            };
            return Ok(VectorInstr::Arith { op, vd: vreg(ops[0])?, src, vs2: None, masked });
        }
        arity(ops, 3, base)?;
        let allowed: &[&str] = if op.is_float() { &["vv", "vf"] } else { &["vv", "vx", "vi"] };
        expect_suffix(Some(form), allowed, base)?;
        let (src, vs2) = sources(form, ops[1], ops[2])?;
        return Ok(VectorInstr::Arith { op, vd: vreg(ops[0])?, src, vs2: Some(vs2), masked });
    }

    arity(ops, 3, base)?;
    let vd = vreg(ops[0])?;
    match base {
        "vwadd" | "vwmul" => {
            let op = if base == "vwadd" { WideOp::Add } else { WideOp::Mul };
            let allowed: &[&str] = if op == WideOp::Add { &["vv", "vx", "wv", "wx"] } else { &["vv", "vx"] };
            expect_suffix(Some(form), allowed, base)?;
            let (src, vs2) = sources(form, ops[1], ops[2])?;
            Ok(VectorInstr::Widening { op, vd, src, vs2, wide_vs2: form.starts_with('w'), masked })
        }
        "vnsrl" => {
            expect_suffix(Some(form), &["wv", "wx", "wi"], base)?;
            let form = if form == "wi" { "wx" } else { form };
            let (src, vs2) = sources(form, ops[1], ops[2])?;
            Ok(VectorInstr::Narrowing { vd, src, vs2, masked })
        }
        "vmseq" | "vmslt" => {
            expect_suffix(Some(form), &["vv", "vx", "vi"], base)?;
            let op = if base == "vmseq" { CmpOp::Eq } else { CmpOp::Lt };
            let (src, vs2) = sources(form, ops[1], ops[2])?;
            Ok(VectorInstr::MaskGen { op, vd, src, vs2, masked })
        }
        _ => Err(format!("unknown mnemonic `{base}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VReg {
        VReg::new(i).unwrap()
    }

    #[test]
    fn decodes_examples() {
        assert_eq!(
            decode_line("vadd.vv v1, v2, v3").unwrap(),
            VectorInstr::Arith { op: ArithOp::Add, vd: v(1), src: Src::V(v(2)), vs2: Some(v(3)), masked: false }
        );
        assert_eq!(
            decode_line("vfmacc.vf v4, 3.5, v8").unwrap(),
            VectorInstr::Arith { op: ArithOp::FMacc, vd: v(4), src: Src::F(3.5), vs2: Some(v(8)), masked: false }
        );
        assert_eq!(
            decode_line("vnsrl.wx v2, v2, 4").unwrap(),
            VectorInstr::Narrowing { vd: v(2), src: Src::X(4), vs2: v(2), masked: false }
        );
    }

    #[test]
    fn decodes_memory_and_scalar_events() {
        assert_eq!(
            decode_line("vle64 v8, base=0x1000, stride=16, v0.m").unwrap(),
            VectorInstr::Load { eew: Eew::E64, vd: v(8), base: 0x1000, stride: Some(16), masked: true }
        );
        assert_eq!(
            decode_line("sstore addr=0x40 val=7  # comment").unwrap(),
            VectorInstr::ScalarStore { addr: 0x40, val: 7 }
        );
        assert_eq!(decode_line("barrier").unwrap(), VectorInstr::Barrier);
        assert_eq!(decode_line("fence").unwrap(), VectorInstr::Fence);
    }

    #[test]
    fn rejects_bad_lines() {
        for bad in [
            "vfoo.vv v1, v2, v3",
            "vadd.vv v1, v2",
            "vadd.vv v32, v2, v3",
            "vadd.vv v1, x2, v3",
            "vsetvli 4 e64 m1 ta ma, v0.m",
            "vsetvli 4 e128 m1 ta ma",
            "vfadd.vx v1, 2, v3",
            "sstore addr=0x10 val=300",
            "vle64 v1",
            "",
        ] {
            assert!(decode_line(bad).is_err(), "accepted `{bad}`");
        }
    }
}
