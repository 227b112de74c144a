use std::path::Path;

use crate::banks::BankConfig;
use crate::layout::{LayoutConfig, DATAPATH_BYTES};
use crate::rvv::DEFAULT_VLEN;
use crate::{Error, Result};

/// Microarchitecture parameters of the timed vector unit.
///
/// `startup_latency`, `reduction_step_overhead` and `memory_latency` are
/// calibration values; the defaults reproduce the dot-product reduction
/// cycle counts measured on the reference hardware.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingConfig {
    pub layout: LayoutConfig,
    pub banks: BankConfig,
    pub fpu_lat: u32,
    pub alu_lat: u32,
    pub sldu_lat: u32,
    /// Unit-stride memory bandwidth in bytes/cycle; `None` means 8 bytes per lane.
    pub vlsu_bytes_per_cycle: Option<usize>,
    /// Cycles from a vector load beat request to its data.
    pub memory_latency: u32,
    /// Words each operand queue can hold ahead of execution.
    pub operand_queue_depth: usize,
    /// Instructions each functional unit accepts before the dispatcher stalls.
    pub unit_queue_depth: usize,
    /// Extra cycles per inter-lane reduction step.
    pub reduction_step_overhead: u32,
    /// Cycles from dispatch until a unit may request its first operand.
    pub startup_latency: u32,
    /// Cycles until a scalar store is written through to memory.
    pub scalar_store_latency: u32,
    /// Memory-roof slope for the roofline model; `None` means 4 bytes per lane.
    pub roof_bytes_per_cycle: Option<f64>,
}

impl TimingConfig {
    pub fn new(lanes: usize, vlen: usize) -> Result<Self> {
        Ok(TimingConfig {
            layout: LayoutConfig::new(lanes, vlen)?,
            banks: BankConfig::default(),
            fpu_lat: 5,
            alu_lat: 1,
            sldu_lat: 2,
            vlsu_bytes_per_cycle: None,
            memory_latency: 2,
            operand_queue_depth: 2,
            unit_queue_depth: 8,
            reduction_step_overhead: 0,
            startup_latency: 3,
            scalar_store_latency: 2,
            roof_bytes_per_cycle: None,
        })
    }

    pub fn with_lanes(lanes: usize) -> Result<Self> {
        Self::new(lanes, DEFAULT_VLEN)
    }

    pub fn lanes(&self) -> usize {
        self.layout.lanes
    }

    pub fn vlsu_bandwidth(&self) -> usize {
        self.vlsu_bytes_per_cycle.unwrap_or(DATAPATH_BYTES * self.layout.lanes)
    }

    pub fn roof_bandwidth(&self) -> f64 {
        self.roof_bytes_per_cycle.unwrap_or(4.0 * self.layout.lanes as f64)
    }

    pub fn validate(&self) -> Result<()> {
        self.banks.validate()?;
        LayoutConfig::new(self.layout.lanes, self.layout.vlen)?;
        for (name, v) in [
            ("fpu_lat", self.fpu_lat),
            ("alu_lat", self.alu_lat),
            ("sldu_lat", self.sldu_lat),
            ("memory_latency", self.memory_latency),
            ("scalar_store_latency", self.scalar_store_latency),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.operand_queue_depth == 0 || self.unit_queue_depth == 0 {
            return Err(Error::Config("queue depths must be at least 1".into()));
        }
        if self.vlsu_bandwidth() == 0 {
            return Err(Error::Config("VLSU bandwidth must be positive".into()));
        }
        Ok(())
    }
}

/// How vector instructions reach the unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispatcherModel {
    /// Pre-filled instruction queue: one trace entry per cycle whenever the back end accepts it.
    Ideal,
    /// Scalar host core with a write-through L1 D-cache feeding the unit.
    ScalarCore(ScalarCoreParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCoreParams {
    pub dcache_line_bits: u32,
    pub axi_bits: u32,
    /// Extra cycles spent handing each vector instruction to the unit.
    pub base_gap: f64,
    /// Scalar loads per loop iteration (analytic gap only).
    pub loads_per_iter: u32,
    /// Fixed part of the miss penalty, in cycles.
    pub miss_base: f64,
    /// Width of each scalar load, in bits.
    pub load_bits: u32,
}

impl ScalarCoreParams {
    /// Calibrated against the throughput-ideality grid of a 16-lane, n = 16 fmatmul.
    pub fn calibrated(dcache_line_bits: u32, axi_bits: u32) -> Self {
        ScalarCoreParams { dcache_line_bits, axi_bits, base_gap: 0.0, loads_per_iter: 1, miss_base: 3.0, load_bits: 64 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok_line = matches!(self.dcache_line_bits, 128 | 256 | 512);
        let ok_axi = matches!(self.axi_bits, 64 | 128 | 256 | 512);
        if !ok_line || !ok_axi || self.axi_bits > self.dcache_line_bits {
            return Err(Error::Config(format!(
                "unsupported D-cache line / AXI width pair ({}, {})",
                self.dcache_line_bits, self.axi_bits
            )));
        }
        if self.base_gap < 0.0 || self.miss_base < 0.0 {
            return Err(Error::Config("scalar-core delays must be non-negative".into()));
        }
        Ok(())
    }

    /// Cycles to refill one line over the AXI port.
    pub fn miss_penalty(&self) -> f64 {
        self.miss_base + f64::from(self.dcache_line_bits) / f64::from(self.axi_bits)
    }

    /// Misses per scalar load for a streaming access pattern.
    pub fn miss_rate(&self) -> f64 {
        f64::from(self.load_bits) / f64::from(self.dcache_line_bits)
    }
}

impl DispatcherModel {
    pub fn label(&self) -> String {
        match self {
            DispatcherModel::Ideal => "ideal".into(),
            DispatcherModel::ScalarCore(p) => format!("scalar:{}:{}", p.dcache_line_bits, p.axi_bits),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DispatcherModel::Ideal => Ok(()),
            DispatcherModel::ScalarCore(p) => p.validate(),
        }
    }

    /// Parses `ideal` or `scalar:<line_bits>:<axi_bits>` (calibrated constants).
    pub fn parse(s: &str) -> Result<Self> {
        if s == "ideal" {
            return Ok(DispatcherModel::Ideal);
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["scalar", line, axi] => {
                let line = line.parse().map_err(|_| Error::Config(format!("bad line width `{line}`")))?;
                let axi = axi.parse().map_err(|_| Error::Config(format!("bad AXI width `{axi}`")))?;
                let d = DispatcherModel::ScalarCore(ScalarCoreParams::calibrated(line, axi));
                d.validate()?;
                Ok(d)
            }
            _ => Err(Error::Config(format!("unknown dispatcher `{s}`"))),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

/// Reads a flat `key = value` config. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<(TimingConfig, DispatcherModel)> {
    let mut kv = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
        kv.push((k.trim().to_string(), v.trim().to_string()));
    }
    let get = |k: &str| kv.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
    let lanes = get("lanes").map(|v| parse_num("lanes", v)).transpose()?.unwrap_or(4);
    let vlen = get("vlen").map(|v| parse_num("vlen", v)).transpose()?.unwrap_or(DEFAULT_VLEN);
    let mut cfg = TimingConfig::new(lanes, vlen)?;
    let mut disp = DispatcherModel::Ideal;
    let mut sc = ScalarCoreParams::calibrated(256, 128);
    for (k, v) in &kv {
        let v = v.as_str();
        match k.as_str() {
            "lanes" | "vlen" => {}
            "banks_per_lane" => cfg.banks.banks_per_lane = parse_num(k, v)?,
            "masters_per_lane" => cfg.banks.masters_per_lane = parse_num(k, v)?,
            "fpu_lat" => cfg.fpu_lat = parse_num(k, v)?,
            "alu_lat" => cfg.alu_lat = parse_num(k, v)?,
            "sldu_lat" => cfg.sldu_lat = parse_num(k, v)?,
            "vlsu_bytes_per_cycle" => cfg.vlsu_bytes_per_cycle = Some(parse_num(k, v)?),
            "memory_latency" => cfg.memory_latency = parse_num(k, v)?,
            "operand_queue_depth" => cfg.operand_queue_depth = parse_num(k, v)?,
            "unit_queue_depth" => cfg.unit_queue_depth = parse_num(k, v)?,
            "reduction_step_overhead" => cfg.reduction_step_overhead = parse_num(k, v)?,
            "startup_latency" => cfg.startup_latency = parse_num(k, v)?,
            "scalar_store_latency" => cfg.scalar_store_latency = parse_num(k, v)?,
            "roof_bytes_per_cycle" => cfg.roof_bytes_per_cycle = Some(parse_num(k, v)?),
            "dispatcher" => {
                disp = match v {
                    "ideal" => DispatcherModel::Ideal,
                    "scalar" => DispatcherModel::ScalarCore(sc),
                    _ => DispatcherModel::parse(v)?,
                }
            }
            "dcache_line_bits" => sc.dcache_line_bits = parse_num(k, v)?,
            "axi_bits" => sc.axi_bits = parse_num(k, v)?,
            "base_gap" => sc.base_gap = parse_num(k, v)?,
            "loads_per_iter" => sc.loads_per_iter = parse_num(k, v)?,
            "miss_base" => sc.miss_base = parse_num(k, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
    }
    if let DispatcherModel::ScalarCore(_) = disp {
        disp = DispatcherModel::ScalarCore(sc);
    }
    cfg.validate()?;
    disp.validate()?;
    Ok((cfg, disp))
}

pub fn load_config(path: &Path) -> Result<(TimingConfig, DispatcherModel)> {
    parse_config(&std::fs::read_to_string(path)?)
}
