use std::path::PathBuf;

use vlanesim::cli::run_cli;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vlanesim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> i32 {
    run_cli(std::iter::once("vlanesim").chain(args.iter().copied()))
}

#[test]
fn emitted_kernel_runs_back_through_the_simulator() {
    let trace = scratch("dotp.trace");
    let text = {
        let inst = vlanesim::bench::generate(vlanesim::bench::Kernel::parse("dotp", 64).unwrap(), 4096, 1).unwrap();
        inst.trace.to_string()
    };
    std::fs::write(&trace, text).unwrap();
    assert_eq!(run(&["run", trace.to_str().unwrap(), "--lanes", "2"]), 0);
    assert_eq!(run(&["run", trace.to_str().unwrap(), "--dispatcher", "scalar:512:512"]), 0);
    assert_eq!(run(&["run", trace.to_str().unwrap(), "--dispatcher", "scalar:64:512"]), 1);
}

#[test]
fn csv_outputs() {
    let out = scratch("sweep.csv");
    let p = out.to_str().unwrap();
    assert_eq!(run(&["--csv", p, "--seed", "2", "sweep", "--lanes", "2", "--sizes", "8"]), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("kernel,lanes,vlen,size,dispatcher,cycles"));
    assert_eq!(text.lines().count(), 2);

    assert_eq!(run(&["--csv", p, "xbar-area", "--masters", "5", "--lanes", "4"]), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().nth(1), Some("5,4,160,640,4"));

    assert_eq!(run(&["--csv", p, "roofline", "--lanes", "2", "--sizes", "8"]), 0);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("lanes,n,intensity"));
}

#[test]
fn config_file_is_honoured() {
    let cfg = scratch("unit.cfg");
    std::fs::write(&cfg, "lanes = 8\nvlen = 1024\nfpu_lat = 4\n").unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(run(&["--config", c, "kernels", "--emit", "fmatmul", "--size", "8", "--vlen", "1024"]), 0);
    std::fs::write(&cfg, "lanes = 6\n").unwrap();
    assert_eq!(run(&["--config", c, "sweep", "--sizes", "8"]), 1);
}

#[test]
fn remaining_subcommands() {
    assert_eq!(run(&["layout-dump", "--lanes", "4", "--vlen", "128", "--eew", "64"]), 0);
    assert_eq!(run(&["kernels"]), 0);
    assert_eq!(run(&["litmus", "--traces", "4", "--schedules", "3"]), 0);
    assert_eq!(run(&["layout-dump", "--eew", "12"]), 1);
}
