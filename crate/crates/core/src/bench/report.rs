use std::io::Write;

use serde::Serialize;

use crate::Result;

/// One line of a sweep report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub kernel: String,
    pub lanes: usize,
    pub vlen: usize,
    pub size: usize,
    pub dispatcher: String,
    pub cycles: u64,
    pub flops: u64,
    pub flop_per_cycle: f64,
    pub utilization: f64,
    /// Throughput relative to the same run with an ideal dispatcher.
    pub ideality: f64,
    pub conflicts: u64,
    pub reshuffles: u64,
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| crate::Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_row() {
        let row = ReportRow {
            kernel: "dotp".into(),
            lanes: 2,
            vlen: 4096,
            size: 64,
            dispatcher: "ideal".into(),
            cycles: 23,
            flops: 0,
            flop_per_cycle: 0.0,
            utilization: 0.0,
            ideality: 1.0,
            conflicts: 0,
            reshuffles: 0,
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "kernel,lanes,vlen,size,dispatcher,cycles,flops,flop_per_cycle,utilization,ideality,conflicts,reshuffles"
        );
        assert_eq!(lines.next().unwrap(), "dotp,2,4096,64,ideal,23,0,0.0,0.0,1.0,0,0");
    }
}
