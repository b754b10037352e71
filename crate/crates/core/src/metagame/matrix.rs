//! Empirical win-rate matrix and its plain-text file format.

use serde::{Deserialize, Serialize};

use super::MetaError;

/// Row-player win rates between pool members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub ids: Vec<String>,
    pub win: Vec<Vec<f64>>,
    pub games: Vec<Vec<u64>>,
    pub seed: Option<u64>,
}

impl PayoffMatrix {
    /// Matrix with 0.5 on the diagonal and zero counts elsewhere.
    pub fn new(ids: Vec<String>) -> PayoffMatrix {
        let n = ids.len();
        let win = (0..n).map(|i| (0..n).map(|j| if i == j { 0.5 } else { 0.0 }).collect()).collect();
        PayoffMatrix { ids, win, games: vec![vec![0; n]; n], seed: None }
    }

    pub fn from_rows(ids: Vec<String>, win: Vec<Vec<f64>>) -> Result<PayoffMatrix, MetaError> {
        let n = ids.len();
        let m = PayoffMatrix { games: vec![vec![0; n]; n], ids, win, seed: None };
        m.validate()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn validate(&self) -> Result<(), MetaError> {
        let n = self.ids.len();
        if self.win.len() != n || self.win.iter().any(|r| r.len() != n) {
            return Err(MetaError::Input("win-rate matrix must be square and match the id list".into()));
        }
        if self.games.len() != n || self.games.iter().any(|r| r.len() != n) {
            return Err(MetaError::Input("game-count matrix must match the id list".into()));
        }
        for (i, row) in self.win.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(MetaError::Input(format!("entry ({i},{j}) = {p} is not a probability")));
                }
            }
        }
        for id in &self.ids {
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                return Err(MetaError::Input(format!("policy id {id:?} must be non-empty without whitespace")));
            }
        }
        Ok(())
    }

    /// Zero-sum payoffs `2p - 1`.
    pub fn zero_sum(&self) -> Vec<Vec<f64>> {
        self.win.iter().map(|r| r.iter().map(|p| 2.0 * p - 1.0).collect()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# payoff matrix: row-player win rates\n");
        s += &format!("ids {}\n", self.ids.join(" "));
        if let Some(seed) = self.seed {
            s += &format!("seed {seed}\n");
        }
        s += "games\n";
        for r in &self.games {
            s += &r.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
            s += "\n";
        }
        s += "win\n";
        for r in &self.win {
            s += &r.iter().map(|p| format!("{p:.6}")).collect::<Vec<_>>().join(" ");
            s += "\n";
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PayoffMatrix, MetaError> {
        let err = |line: usize, message: &str| MetaError::Parse { line, message: message.to_string() };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, first) = lines.next().ok_or_else(|| err(0, "empty file"))?;
        let ids: Vec<String> = match first.strip_prefix("ids ") {
            Some(rest) => rest.split_whitespace().map(str::to_string).collect(),
            None => return Err(err(ln, "expected `ids` header")),
        };
        let n = ids.len();
        let mut seed = None;
        let (mut ln, mut line) = lines.next().ok_or_else(|| err(ln, "missing `games` section"))?;
        if let Some(rest) = line.strip_prefix("seed ") {
            seed = Some(rest.trim().parse().map_err(|_| err(ln, "seed must be an unsigned integer"))?);
            (ln, line) = lines.next().ok_or_else(|| err(ln, "missing `games` section"))?;
        }
        if line != "games" {
            return Err(err(ln, "expected `games`"));
        }
        let mut games = Vec::with_capacity(n);
        for _ in 0..n {
            let (l, row) = lines.next().ok_or_else(|| err(ln, "truncated games section"))?;
            let r: Result<Vec<u64>, _> = row.split_whitespace().map(str::parse).collect();
            let r = r.map_err(|_| err(l, "game counts must be unsigned integers"))?;
            if r.len() != n {
                return Err(err(l, "wrong number of columns"));
            }
            games.push(r);
            ln = l;
        }
        match lines.next() {
            Some((_, "win")) => {}
            Some((l, _)) => return Err(err(l, "expected `win`")),
            None => return Err(err(ln, "missing `win` section")),
        }
        let mut win = Vec::with_capacity(n);
        for _ in 0..n {
            let (l, row) = lines.next().ok_or_else(|| err(ln, "truncated win section"))?;
            let r: Result<Vec<f64>, _> = row.split_whitespace().map(str::parse).collect();
            let r = r.map_err(|_| err(l, "win rates must be numbers"))?;
            if r.len() != n {
                return Err(err(l, "wrong number of columns"));
            }
            win.push(r);
            ln = l;
        }
        if let Some((l, _)) = lines.next() {
            return Err(err(l, "trailing content"));
        }
        let m = PayoffMatrix { ids, win, games, seed };
        m.validate()?;
        Ok(m)
    }
}
