//! Bound table over a mix of families, written as CSV to stdout.

use fastmix::experiment::{run_experiment, ExperimentSpec};
use fastmix::families::Family;

fn main() -> fastmix::Result<()> {
    let spec = ExperimentSpec::new(vec![
        Family::Knkn { n: 4 },
        Family::Cycle { n: 9 },
        Family::Torus { m: 3, d: 2 },
        Family::Geometric { m: 8, k: 2, d: 1 },
        Family::IsingTree { b: 2, r: 1, beta: 0.3 },
    ]);
    let table = run_experiment(&spec)?;
    table.write_csv(std::io::stdout())?;
    Ok(())
}
