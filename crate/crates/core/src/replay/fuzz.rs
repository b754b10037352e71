//! Line-level mutation fuzzing of battle logs.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{parse_log, ReplayError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    DeleteLine,
    DuplicateLine,
    SwapWithNext,
    ReplaceField,
    FlipChar,
    Truncate,
}

const MUTATIONS: [Mutation; 6] = [
    Mutation::DeleteLine,
    Mutation::DuplicateLine,
    Mutation::SwapWithNext,
    Mutation::ReplaceField,
    Mutation::FlipChar,
    Mutation::Truncate,
];

const TOKENS: [&str; 8] = ["p1a", "p2:7", "thunderbolt", "", "101/100", "-3", "win", "\\"];

fn mutate_line(lines: &mut Vec<String>, i: usize, m: Mutation, rng: &mut ChaCha8Rng) {
    match m {
        Mutation::DeleteLine => {
            lines.remove(i);
        }
        Mutation::DuplicateLine => {
            let l = lines[i].clone();
            lines.insert(i, l);
        }
        Mutation::SwapWithNext => {
            if i + 1 < lines.len() {
                lines.swap(i, i + 1);
            }
        }
        Mutation::ReplaceField => {
            let mut fields: Vec<String> = lines[i].split('|').map(String::from).collect();
            if fields.len() > 1 {
                let k = rng.random_range(1..fields.len());
                fields[k] = TOKENS.choose(rng).expect("tokens").to_string();
            }
            lines[i] = fields.join("|");
        }
        Mutation::FlipChar => {
            let chars: Vec<char> = lines[i].chars().collect();
            if !chars.is_empty() {
                let k = rng.random_range(0..chars.len());
                let c = (b'!' + rng.random_range(0..94u8)) as char;
                lines[i] = chars.iter().enumerate().map(|(j, &x)| if j == k { c } else { x }).collect();
            }
        }
        Mutation::Truncate => {
            let n = lines[i].chars().count();
            lines[i] = lines[i].chars().take(n / 2).collect();
        }
    }
}

/// Corrupt each line with probability `rate`. The result always differs
/// from the input.
pub fn mutate(text: &str, rate: f64, rng: &mut ChaCha8Rng) -> String {
    let original: Vec<String> = text.lines().map(String::from).collect();
    loop {
        let mut lines = original.clone();
        let mut i = 0;
        while i < lines.len() {
            if rng.random_bool(rate) {
                let m = *MUTATIONS.choose(rng).expect("mutations");
                mutate_line(&mut lines, i, m, rng);
            }
            i += 1;
        }
        if lines == original && !lines.is_empty() {
            let i = rng.random_range(0..lines.len());
            mutate_line(&mut lines, i, Mutation::DeleteLine, rng);
        }
        let mut out = lines.join("\n");
        out.push('\n');
        if out != text {
            return out;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub cases: usize,
    /// Corrupted logs rejected with a diagnostic.
    pub diagnosed: usize,
    /// Corrupted logs accepted as valid.
    pub undetected: usize,
    pub crashes: usize,
    pub parse_errors: usize,
    pub reconstruct_errors: usize,
    pub integrity_errors: usize,
}

impl FuzzReport {
    pub fn all_diagnosed(&self) -> bool {
        self.crashes == 0 && self.undetected == 0 && self.diagnosed == self.cases
    }
}

/// Mutate every log `rounds` times and check each corruption is reported.
pub fn fuzz_logs(logs: &[String], rate: f64, rounds: usize, seed: u64) -> FuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FuzzReport::default();
    for log in logs {
        for _ in 0..rounds {
            let bad = mutate(log, rate, &mut rng);
            report.cases += 1;
            match catch_unwind(AssertUnwindSafe(|| parse_log(&bad))) {
                Err(_) => report.crashes += 1,
                Ok(Ok(_)) => report.undetected += 1,
                Ok(Err(e)) => {
                    report.diagnosed += 1;
                    match e {
                        ReplayError::Parse { .. } => report.parse_errors += 1,
                        ReplayError::Reconstruct { .. } => report.reconstruct_errors += 1,
                        ReplayError::Integrity(_) => report.integrity_errors += 1,
                    }
                }
            }
        }
    }
    report
}
