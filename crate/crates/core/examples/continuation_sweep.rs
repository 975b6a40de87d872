//! Follow one Kerr branch as the emitted intensity grows, seeding each solve
//! with the previous one, and write the table as CSV to stdout.

use specsing::singularity_finder::{sweep, write_sweep_csv, FinderConfig, SweepAxis};
use specsing::NonlinearitySpec;

fn main() -> specsing::Result<()> {
    let eta = 3.0;
    let kerr = NonlinearitySpec::kerr(1e-2);
    let grid: Vec<f64> = (0..=10).map(|i| 0.5 * i as f64).collect();
    let rows = sweep(eta, &kerr, 1.0, 2, &SweepAxis::Intensity(grid), &FinderConfig::default())?;
    write_sweep_csv(eta, &rows, std::io::stdout().lock())?;
    Ok(())
}
