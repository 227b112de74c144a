//! Command-line front end used by the `vlanesim` binary.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::banks::{xbar_area, XbarTopology};
use crate::bench::{generate, run_kernel, sweep, write_csv, Kernel, ReportRow, SweepSpec};
use crate::coherency::{explore, LitmusConfig};
use crate::layout::{map_byte, LayoutConfig};
use crate::rvv::{Eew, FlatMachineState, ProgramTrace};
use crate::timing::{fmatmul_intensity, load_config, roofline, simulate_with, DispatcherModel, SimOptions, TimingConfig};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "vlanesim", version, about = "Lane-based RISC-V vector unit simulator")]
pub struct Cli {
    /// Flat key=value machine configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write tabular results to this CSV file instead of stdout.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Time a trace file and check it against the functional model.
    Run {
        trace: PathBuf,
        #[arg(long)]
        lanes: Option<usize>,
        #[arg(long)]
        vlen: Option<usize>,
        /// `ideal` or `scalar:<line_bits>:<axi_bits>`.
        #[arg(long)]
        dispatcher: Option<String>,
    },
    /// Sweep a kernel over lane counts, sizes and dispatchers.
    Sweep {
        #[arg(long, default_value = "fmatmul")]
        kernel: String,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        lanes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "ideal")]
        dispatchers: Vec<String>,
    },
    /// Measured fmatmul throughput against the roofline bound.
    Roofline {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        lanes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        sizes: Vec<usize>,
    },
    /// Random scalar/vector interleavings checked for stale loads.
    Litmus {
        #[arg(long, default_value_t = 100)]
        traces: usize,
        #[arg(long, default_value_t = 10)]
        schedules: usize,
        #[arg(long, default_value_t = 24)]
        events: usize,
        #[arg(long, default_value_t = 6)]
        jitter: u32,
        /// Drop the ordering rules (expected to find violations).
        #[arg(long)]
        no_rules: bool,
    },
    /// Relative VRF crossbar area for split and monolithic topologies.
    XbarArea {
        #[arg(long, default_value_t = 5)]
        masters: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        lanes: Vec<u64>,
    },
    /// Print where each byte of a register lands.
    LayoutDump {
        #[arg(long, default_value_t = 4)]
        lanes: usize,
        #[arg(long, default_value_t = 128)]
        vlen: usize,
        #[arg(long, default_value_t = 32)]
        eew: u32,
        #[arg(long)]
        elems: Option<usize>,
    },
    /// List kernels, or emit one as a trace.
    Kernels {
        #[arg(long)]
        emit: Option<String>,
        #[arg(long, default_value_t = 16)]
        size: usize,
        #[arg(long, default_value_t = 4096)]
        vlen: usize,
    },
}

fn base_config(cli: &Cli, lanes: Option<usize>, vlen: Option<usize>) -> Result<(TimingConfig, DispatcherModel)> {
    let (mut cfg, disp) = match &cli.config {
        Some(p) => load_config(p)?,
        None => (TimingConfig::with_lanes(4)?, DispatcherModel::Ideal),
    };
    let l = lanes.unwrap_or(cfg.lanes());
    let v = vlen.unwrap_or(cfg.layout.vlen);
    cfg.layout = LayoutConfig::new(l, v)?;
    Ok((cfg, disp))
}

fn sink(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.csv {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout()),
    })
}

fn emit_rows(cli: &Cli, rows: &[ReportRow]) -> Result<()> {
    write_csv(rows, sink(cli)?)
}

pub fn execute(cli: &Cli) -> Result<()> {
    let mut out = io::stdout();
    match &cli.command {
        Command::Run { trace, lanes, vlen, dispatcher } => {
            let (cfg, mut disp) = base_config(cli, *lanes, *vlen)?;
            if let Some(d) = dispatcher {
                disp = DispatcherModel::parse(d)?;
            }
            let t = ProgramTrace::load(trace)?;
            let res = simulate_with(&t, FlatMachineState::new(cfg.layout.vlen), &cfg, &disp, &SimOptions::default())?;
            let s = &res.stats;
            writeln!(out, "cycles          {}", s.cycles)?;
            writeln!(out, "instructions    {}", s.dispatched)?;
            writeln!(out, "flops           {}", s.flops)?;
            writeln!(out, "flop/cycle      {:.3}", s.flop_per_cycle())?;
            writeln!(out, "utilization     {:.3}", s.utilization())?;
            writeln!(out, "bank stalls     {}", s.bank_conflict_stalls())?;
            writeln!(out, "reshuffles      {}", s.reshuffles)?;
            writeln!(out, "oracle          match")?;
        }
        Command::Sweep { kernel, lanes, sizes, dispatchers } => {
            let (base, _) = base_config(cli, None, None)?;
            let dispatchers = dispatchers.iter().map(|d| DispatcherModel::parse(d)).collect::<Result<Vec<_>>>()?;
            let spec = SweepSpec {
                kernel: kernel.clone(),
                lanes: lanes.clone(),
                sizes: sizes.clone(),
                dispatchers,
                base,
                seed: cli.seed,
            };
            emit_rows(cli, &sweep(&spec)?)?;
        }
        Command::Roofline { lanes, sizes } => {
            let (base, disp) = base_config(cli, None, None)?;
            let mut w = csv::Writer::from_writer(sink(cli)?);
            w.write_record(["lanes", "n", "intensity", "flop_per_cycle", "bound"]).map_err(|e| Error::Io(e.to_string()))?;
            for &l in lanes {
                let mut cfg = base.clone();
                cfg.layout = LayoutConfig::new(l, base.layout.vlen)?;
                for &n in sizes {
                    let run = run_kernel(Kernel::Fmatmul { n, gap: 4 }, &cfg, &disp, cli.seed)?;
                    let ai = fmatmul_intensity(n);
                    w.write_record([
                        l.to_string(),
                        n.to_string(),
                        format!("{ai:.3}"),
                        format!("{:.3}", run.flop_per_cycle()),
                        format!("{:.3}", roofline(ai, &cfg)),
                    ])
                    .map_err(|e| Error::Io(e.to_string()))?;
                }
            }
            w.flush()?;
        }
        Command::Litmus { traces, schedules, events, jitter, no_rules } => {
            let (cfg, _) = base_config(cli, None, Some(512))?;
            let lc = LitmusConfig { timing: cfg, seed: cli.seed, schedules: *schedules, max_jitter: *jitter, enforce_rules: !no_rules };
            let v = explore(&lc, *traces, *schedules, *events)?;
            writeln!(out, "schedules       {}", v.schedules)?;
            writeln!(out, "loads checked   {}", v.loads_checked)?;
            match &v.counterexample {
                None => writeln!(out, "violations      0")?,
                Some((seed, viol)) => writeln!(
                    out,
                    "violation       seed {seed}: line {} read {:#x} = {} (expected {}) at cycle {}",
                    viol.instr_index, viol.addr, viol.observed, viol.expected, viol.cycle
                )?,
            }
        }
        Command::XbarArea { masters, lanes } => {
            let mut w = csv::Writer::from_writer(sink(cli)?);
            w.write_record(["masters", "lanes", "split", "mono", "ratio"]).map_err(|e| Error::Io(e.to_string()))?;
            for &l in lanes {
                let s = xbar_area(*masters, l, XbarTopology::Split);
                let m = xbar_area(*masters, l, XbarTopology::Mono);
                w.write_record([masters.to_string(), l.to_string(), s.to_string(), m.to_string(), (m / s).to_string()])
                    .map_err(|e| Error::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        Command::LayoutDump { lanes, vlen, eew, elems } => {
            let cfg = LayoutConfig::new(*lanes, *vlen)?;
            let eew = Eew::from_bits(*eew)?;
            let n = elems.unwrap_or(cfg.vlenb() / eew.bytes());
            writeln!(out, "elem byte lane offset")?;
            for e in 0..n {
                for b in 0..eew.bytes() {
                    let m = map_byte(e, b, eew, &cfg)?;
                    writeln!(out, "{e:4} {b:4} {:4} {:6}", m.lane, m.offset)?;
                }
            }
        }
        Command::Kernels { emit, size, vlen } => match emit {
            None => {
                writeln!(out, "fmatmul  n x n double-precision matrix multiply")?;
                writeln!(out, "fconv2d  n x n x 3 image, 7 x 7 filter")?;
                writeln!(out, "dotp     integer dot product over `size` bytes")?;
            }
            Some(name) => {
                let inst = generate(Kernel::parse(name, *size)?, *vlen, cli.seed)?;
                write!(out, "{}", inst.trace)?;
            }
        },
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_subcommand() {
        for args in [
            vec!["vlanesim", "run", "t.trace", "--lanes", "4"],
            vec!["vlanesim", "--seed", "3", "sweep", "--lanes", "2,4"],
            vec!["vlanesim", "roofline", "--csv", "out.csv"],
            vec!["vlanesim", "litmus", "--no-rules"],
            vec!["vlanesim", "xbar-area", "--masters", "5"],
            vec!["vlanesim", "layout-dump", "--eew", "16"],
            vec!["vlanesim", "kernels", "--emit", "dotp", "--size", "64"],
            vec!["vlanesim", "--config", "m.cfg", "kernels"],
        ] {
            assert!(Cli::try_parse_from(&args).is_ok(), "{args:?}");
        }
        assert!(Cli::try_parse_from(["vlanesim", "frobnicate"]).is_err());
    }

    #[test]
    fn bad_arguments_fail_cleanly() {
        assert_eq!(run_cli(["vlanesim", "layout-dump", "--lanes", "3"]), 1);
        assert_eq!(run_cli(["vlanesim", "run", "/nonexistent.trace"]), 1);
        assert_eq!(run_cli(["vlanesim", "bogus"]), 2);
    }
}
