use vlanesim::bench::{generate, output, reference, run_kernel, sweep, write_csv, Kernel, SweepSpec};
use vlanesim::rvv::{run_program, Eew};
use vlanesim::timing::{simulate, DispatcherModel, TimingConfig};

#[test]
fn every_kernel_matches_its_dense_reference_on_the_timed_model() {
    let cfg = TimingConfig::new(4, 1024).unwrap();
    for k in [
        Kernel::Fmatmul { n: 8, gap: 4 },
        Kernel::Fmatmul { n: 12, gap: 3 },
        Kernel::Fconv2d { n: 8 },
        Kernel::Dotp { bytes: 128, eew: Eew::E16 },
    ] {
        let inst = generate(k, cfg.layout.vlen, 9).unwrap();
        let (_, state) = simulate(&inst.trace, inst.init.clone(), &cfg, &DispatcherModel::Ideal).unwrap();
        assert_eq!(output(&inst, &state), reference(&inst), "{k:?}");
        let oracle = run_program(&inst.trace, inst.init.clone()).unwrap();
        assert_eq!(oracle.state, state, "{k:?}");
    }
}

#[test]
fn flops_are_counted_exactly() {
    let cfg = TimingConfig::with_lanes(4).unwrap();
    for n in [8, 16] {
        let r = run_kernel(Kernel::Fmatmul { n, gap: 4 }, &cfg, &DispatcherModel::Ideal, 1).unwrap();
        // the first k-step of each row is a plain multiply
        let n = n as u64;
        assert_eq!(r.stats.flops, 2 * n.pow(3) - n * n);
        assert!(r.flop_per_cycle() <= 2.0 * cfg.lanes() as f64);
    }
}

#[test]
fn sweep_is_deterministic_and_writes_csv() {
    let spec = SweepSpec {
        kernel: "fmatmul".into(),
        lanes: vec![2, 4],
        sizes: vec![8, 16],
        dispatchers: vec![DispatcherModel::Ideal, DispatcherModel::parse("scalar:256:128").unwrap()],
        base: TimingConfig::with_lanes(2).unwrap(),
        seed: 4,
    };
    let a = sweep(&spec).unwrap();
    let b = sweep(&spec).unwrap();
    assert_eq!(a.len(), 8);
    assert_eq!(a, b);
    for r in &a {
        if r.dispatcher == "ideal" {
            assert!((r.ideality - 1.0).abs() < 1e-12);
        } else {
            assert!(r.ideality > 0.0 && r.ideality <= 1.0 + 1e-9, "{r:?}");
        }
    }
    let mut buf = Vec::new();
    write_csv(&a, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().nth(1).unwrap().starts_with("fmatmul,2,4096,8,ideal,"));
}
