// Likelihood evaluation time, eigen-based versus dense Cholesky.
// Usage: `bench_scaling [side ...]` (default 10 20 40).

use gpseg::bench::{run_bench, write_bench_csv};
use gpseg::KernelFamily;

pub fn run_sides(sides: &[usize]) -> gpseg::Result<()> {
    let rows = run_bench(sides, &[KernelFamily::Matern52, KernelFamily::Exponential], 3, 0)?;
    write_bench_csv(std::io::stdout().lock(), &rows)?;
    Ok(())
}

pub fn run_example() -> gpseg::Result<()> {
    run_sides(&[10, 20])
}

#[allow(dead_code)]
fn main() {
    let sides: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let sides = if sides.is_empty() { vec![10, 20, 40] } else { sides };
    run_sides(&sides).unwrap();
}
