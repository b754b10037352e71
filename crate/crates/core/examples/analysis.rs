//! Print the state-space and decision-size report.

use std::time::Instant;

fn main() {
    let start = Instant::now();
    print!("{}", arena::analysis::full_report());
    println!("computed in {:.2?}", start.elapsed());
}
