//! Random scalar/vector memory interleavings under jittered timing, with
//! and without the ordering rules.

use vlanesim::coherency::{explore, LitmusConfig};
use vlanesim::timing::TimingConfig;

fn main() -> vlanesim::Result<()> {
    let timing = TimingConfig::new(4, 512)?;
    for enforce_rules in [true, false] {
        let cfg = LitmusConfig { timing: timing.clone(), seed: 3, schedules: 20, max_jitter: 6, enforce_rules };
        let v = explore(&cfg, 100, 20, 24)?;
        print!("rules {}: {} schedules, {} loads checked, ", if enforce_rules { "on " } else { "off" }, v.schedules, v.loads_checked);
        match v.counterexample {
            None => println!("no stale reads"),
            Some((seed, viol)) => println!(
                "stale read at seed {seed}: line {} got {} instead of {} from {:#x}",
                viol.instr_index, viol.observed, viol.expected, viol.addr
            ),
        }
    }
    Ok(())
}
