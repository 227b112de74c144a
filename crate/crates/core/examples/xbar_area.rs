//! Crossbar area of a lane-split VRF against one shared register file.

use vlanesim::banks::{xbar_area, XbarTopology};

fn main() {
    let masters = 5;
    println!("lanes  split    mono  ratio");
    for lanes in [1, 2, 4, 8, 16, 32] {
        let s = xbar_area(masters, lanes, XbarTopology::Split);
        let m = xbar_area(masters, lanes, XbarTopology::Mono);
        println!("{lanes:>5} {s:>6} {m:>7} {:>6}", m / s);
    }
}
