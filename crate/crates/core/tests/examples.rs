// Quick examples run as tests; the slower ones are exercised by `cargo run --example`.

mod watershed_split {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/watershed_split.rs"));
}

mod evaluate_masks {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/evaluate_masks.rs"));
}

mod threshold_trace {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/threshold_trace.rs"));
}

mod diffusion {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/diffusion.rs"));
}

mod bench_scaling {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bench_scaling.rs"));
}

#[test]
fn watershed_split_runs() {
    watershed_split::run_example().unwrap();
}

#[test]
fn evaluate_masks_runs() {
    evaluate_masks::run_example().unwrap();
}

#[test]
fn threshold_trace_runs() {
    threshold_trace::run_example().unwrap();
}

#[test]
fn diffusion_runs() {
    diffusion::run_example().unwrap();
}

#[test]
fn bench_scaling_runs() {
    bench_scaling::run_example().unwrap();
}
