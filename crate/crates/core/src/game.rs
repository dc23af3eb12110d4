//! Stochastic games, matrix games and strategies, with a line-oriented text
//! format.
//!
//! File layout:
//!
//! ```text
//! states: 2
//! state 1:
//! rewards:
//! -2 4 6
//! 6 2 0
//! transitions:
//! 3/10 7/10
//! ...
//! ```
//!
//! Transition lines list `p(1|s,a,b) ... p(N|s,a,b)` for every action pair in
//! row-major order. Blank lines and `#` comments are ignored.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::rational::{fmt_rational, parse_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Stage payoffs weighted by `1 - beta`; values are averages.
    Normalized,
    /// Raw discounted sums; values are normalized values over `1 - beta`.
    Unnormalized,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Normalized => "normalized",
            Mode::Unnormalized => "unnormalized",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("state {state}, actions ({row},{col}): transitions sum to {sum} ≠ 1")]
    NotStochastic { state: usize, row: usize, col: usize, sum: String },
    #[error("state {state}, actions ({row},{col}): negative probability {value} for target state {target}")]
    NegativeProbability { state: usize, row: usize, col: usize, target: usize, value: String },
    #[error("{0}")]
    Shape(String),
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> GameError {
    GameError::Syntax { line, col, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixGame {
    entries: Vec<Vec<Rational>>,
}

impl MatrixGame {
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self, GameError> {
        if entries.is_empty() || entries[0].is_empty() {
            return Err(GameError::Shape("matrix game needs at least one row and one column".into()));
        }
        let n = entries[0].len();
        if entries.iter().any(|r| r.len() != n) {
            return Err(GameError::Shape("matrix rows have different lengths".into()));
        }
        Ok(MatrixGame { entries })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let entries = rows.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect();
        MatrixGame::new(entries).expect("nonempty rectangular matrix")
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn min_entry(&self) -> Rational {
        self.entries.iter().flatten().min().cloned().expect("nonempty")
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<Rational>> {
        rows.iter().map(|&i| cols.iter().map(|&j| self.entries[i][j].clone()).collect()).collect()
    }

    /// `scale * A + shift * J`.
    pub fn affine(&self, scale: &Rational, shift: &Rational) -> MatrixGame {
        let entries = self.entries.iter().map(|r| r.iter().map(|x| x * scale + shift).collect()).collect();
        MatrixGame { entries }
    }

    /// `(x^T A)_j` for every column.
    pub fn column_payoffs(&self, x: &[Rational]) -> Vec<Rational> {
        (0..self.cols())
            .map(|j| self.entries.iter().zip(x).map(|(row, xi)| &row[j] * xi).sum())
            .collect()
    }

    /// `(A y)_i` for every row.
    pub fn row_payoffs(&self, y: &[Rational]) -> Vec<Rational> {
        self.entries.iter().map(|row| row.iter().zip(y).map(|(a, yj)| a * yj).sum()).collect()
    }

    /// Parses rows of whitespace-separated rationals.
    pub fn parse(text: &str) -> Result<Self, GameError> {
        let mut rows = Vec::new();
        for (line, raw) in Lines::new(text) {
            rows.push(parse_row(line, raw)?);
        }
        if rows.is_empty() {
            return Err(syntax(1, 1, "empty matrix"));
        }
        let n = rows[0].len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(GameError::Shape(format!("row {} has {} entries, expected {n}", bad + 1, rows[bad].len())));
        }
        MatrixGame::new(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateData {
    pub rewards: Vec<Vec<Rational>>,
    /// `transitions[a][b][t] = p(t | s, a, b)`.
    pub transitions: Vec<Vec<Vec<Rational>>>,
}

impl StateData {
    pub fn rows(&self) -> usize {
        self.rewards.len()
    }

    pub fn cols(&self) -> usize {
        self.rewards[0].len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticGame {
    states: Vec<StateData>,
}

impl StochasticGame {
    pub fn new(states: Vec<StateData>) -> Result<Self, GameError> {
        let g = StochasticGame { states };
        g.validate()?;
        Ok(g)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, s: usize) -> &StateData {
        &self.states[s]
    }

    pub fn states(&self) -> &[StateData] {
        &self.states
    }

    pub fn rewards(&self, s: usize) -> MatrixGame {
        MatrixGame { entries: self.states[s].rewards.clone() }
    }

    pub fn min_reward(&self) -> Rational {
        self.states.iter().flat_map(|st| st.rewards.iter().flatten()).min().cloned().expect("nonempty")
    }

    fn validate(&self) -> Result<(), GameError> {
        let n = self.states.len();
        if n == 0 {
            return Err(GameError::Shape("game has no states".into()));
        }
        for (s, st) in self.states.iter().enumerate() {
            let m = st.rewards.len();
            if m == 0 || st.rewards[0].is_empty() {
                return Err(GameError::Shape(format!("state {}: empty reward matrix", s + 1)));
            }
            let k = st.rewards[0].len();
            if st.rewards.iter().any(|r| r.len() != k) {
                return Err(GameError::Shape(format!("state {}: reward rows have different lengths", s + 1)));
            }
            if st.transitions.len() != m || st.transitions.iter().any(|r| r.len() != k) {
                return Err(GameError::Shape(format!("state {}: transition table does not match rewards", s + 1)));
            }
            for (a, row) in st.transitions.iter().enumerate() {
                for (b, p) in row.iter().enumerate() {
                    if p.len() != n {
                        return Err(GameError::Shape(format!(
                            "state {}, actions ({},{}): expected {n} probabilities, found {}",
                            s + 1,
                            a + 1,
                            b + 1,
                            p.len()
                        )));
                    }
                    if let Some(t) = p.iter().position(|x| x.is_negative()) {
                        return Err(GameError::NegativeProbability {
                            state: s + 1,
                            row: a + 1,
                            col: b + 1,
                            target: t + 1,
                            value: fmt_rational(&p[t]),
                        });
                    }
                    let sum: Rational = p.iter().sum();
                    if !sum.is_one() {
                        return Err(GameError::NotStochastic {
                            state: s + 1,
                            row: a + 1,
                            col: b + 1,
                            sum: fmt_rational(&sum),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Relabels states so that old state `s` becomes `perm[s]`.
    pub fn permute_states(&self, perm: &[usize]) -> StochasticGame {
        let n = self.num_states();
        assert_eq!(perm.len(), n, "permutation length");
        let mut states = vec![None; n];
        for (s, st) in self.states.iter().enumerate() {
            let transitions = st
                .transitions
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|p| {
                            let mut q = vec![Rational::zero(); n];
                            for (t, x) in p.iter().enumerate() {
                                q[perm[t]] = x.clone();
                            }
                            q
                        })
                        .collect()
                })
                .collect();
            states[perm[s]] = Some(StateData { rewards: st.rewards.clone(), transitions });
        }
        StochasticGame { states: states.into_iter().map(|s| s.expect("permutation")).collect() }
    }

    /// Canonical text form.
    pub fn serialize(&self) -> String {
        let mut out = format!("states: {}\n", self.num_states());
        for (s, st) in self.states.iter().enumerate() {
            out.push_str(&format!("state {}:\nrewards:\n", s + 1));
            for row in &st.rewards {
                out.push_str(&join(row));
                out.push('\n');
            }
            out.push_str("transitions:\n");
            for p in st.transitions.iter().flatten() {
                out.push_str(&join(p));
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, GameError> {
        parse_game(text)
    }
}

fn join(xs: &[Rational]) -> String {
    xs.iter().map(fmt_rational).collect::<Vec<_>>().join(" ")
}

/// Non-blank, comment-stripped lines with 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate() }
    }
}

impl<'a> Iterator for Lines<'a> {
    type Item = (usize, &'a str);

    fn next(&mut self) -> Option<Self::Item> {
        for (i, raw) in self.inner.by_ref() {
            let body = raw.split('#').next().unwrap_or("");
            if !body.trim().is_empty() {
                return Some((i + 1, body));
            }
        }
        None
    }
}

fn parse_row(line: usize, raw: &str) -> Result<Vec<Rational>, GameError> {
    let mut out = Vec::new();
    let mut rest = raw;
    let mut offset = 0;
    while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
        let tail = &rest[start..];
        let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
        let tok = &tail[..len];
        let col = offset + start + 1;
        out.push(parse_rational(tok).map_err(|e| syntax(line, col, e.to_string()))?);
        offset += start + len;
        rest = &tail[len..];
    }
    Ok(out)
}

fn column_of(raw: &str) -> usize {
    raw.find(|c: char| !c.is_whitespace()).unwrap_or(0) + 1
}

/// Matches `keyword:` optionally followed by a value, returning the value.
fn keyword<'a>(raw: &'a str, key: &str) -> Option<&'a str> {
    let t = raw.trim();
    let rest = t.strip_prefix(key)?;
    let rest = rest.trim_start();
    rest.strip_prefix(':').map(str::trim)
}

pub fn parse_game(text: &str) -> Result<StochasticGame, GameError> {
    let mut lines = Lines::new(text).peekable();
    let (line, raw) = lines.next().ok_or_else(|| syntax(1, 1, "empty input, expected `states: N`"))?;
    let n: usize = keyword(raw, "states")
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| syntax(line, column_of(raw), "expected `states: N` with N >= 1"))?;
    let end = |what: &str| syntax(text.lines().count().max(1), 1, format!("unexpected end of input, expected {what}"));

    let mut states = Vec::with_capacity(n);
    for s in 1..=n {
        let (line, raw) = lines.next().ok_or_else(|| end(&format!("`state {s}:`")))?;
        let label = raw.trim().strip_prefix("state").and_then(|r| r.trim().strip_suffix(':'));
        if label.map(str::trim) != Some(&s.to_string()) {
            return Err(syntax(line, column_of(raw), format!("expected `state {s}:`")));
        }
        let (line, raw) = lines.next().ok_or_else(|| end("`rewards:`"))?;
        if keyword(raw, "rewards") != Some("") {
            return Err(syntax(line, column_of(raw), "expected `rewards:`"));
        }
        let mut rewards: Vec<Vec<Rational>> = Vec::new();
        loop {
            let (line, raw) = lines.next().ok_or_else(|| end("`transitions:`"))?;
            if keyword(raw, "transitions") == Some("") {
                break;
            }
            let row = parse_row(line, raw)?;
            if let Some(first) = rewards.first() {
                if row.len() != first.len() {
                    return Err(syntax(
                        line,
                        column_of(raw),
                        format!("reward row has {} entries, expected {}", row.len(), first.len()),
                    ));
                }
            }
            rewards.push(row);
        }
        if rewards.is_empty() {
            return Err(GameError::Shape(format!("state {s}: no reward rows")));
        }
        let (m, k) = (rewards.len(), rewards[0].len());
        let mut transitions = vec![Vec::with_capacity(k); m];
        for a in 0..m {
            for b in 0..k {
                let (line, raw) = lines
                    .next()
                    .ok_or_else(|| end(&format!("transition line for actions ({},{})", a + 1, b + 1)))?;
                let p = parse_row(line, raw)?;
                if p.len() != n {
                    return Err(syntax(
                        line,
                        column_of(raw),
                        format!("expected {n} probabilities for actions ({},{}), found {}", a + 1, b + 1, p.len()),
                    ));
                }
                transitions[a].push(p);
            }
        }
        states.push(StateData { rewards, transitions });
    }
    if let Some((line, raw)) = lines.next() {
        return Err(syntax(line, column_of(raw), "unexpected content after last state"));
    }
    StochasticGame::new(states)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedStrategy(Vec<Rational>);

impl MixedStrategy {
    pub fn new(p: Vec<Rational>) -> Result<Self, GameError> {
        if p.is_empty() || p.iter().any(|x| x.is_negative()) || !p.iter().sum::<Rational>().is_one() {
            return Err(GameError::Shape("not a probability vector".into()));
        }
        Ok(MixedStrategy(p))
    }

    pub fn pure(n: usize, i: usize) -> Self {
        let mut p = vec![Rational::zero(); n];
        p[i] = Rational::one();
        MixedStrategy(p)
    }

    pub fn probs(&self) -> &[Rational] {
        &self.0
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| !self.0[i].is_zero()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationaryStrategyPair {
    pub maximizer: Vec<MixedStrategy>,
    pub minimizer: Vec<MixedStrategy>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftRecord {
    pub c: Rational,
}

/// Adds `c = max(0, 1 - min reward)` to every reward.
pub fn shift_rewards(g: &StochasticGame) -> (StochasticGame, ShiftRecord) {
    let c = (Rational::one() - g.min_reward()).max(Rational::zero());
    let states = g
        .states
        .iter()
        .map(|st| StateData {
            rewards: st.rewards.iter().map(|r| r.iter().map(|x| x + &c).collect()).collect(),
            transitions: st.transitions.clone(),
        })
        .collect();
    (StochasticGame { states }, ShiftRecord { c })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unnormalized values are undefined at beta = 1")]
pub struct UnshiftError;

/// Undoes a reward shift on a value computed in the given mode.
pub fn unshift_value(v: &Rational, c: &Rational, mode: Mode, beta: &Rational) -> Result<Rational, UnshiftError> {
    match mode {
        Mode::Normalized => Ok(v - c),
        Mode::Unnormalized => {
            let gap = Rational::one() - beta;
            if gap.is_zero() {
                return Err(UnshiftError);
            }
            Ok(v - c / gap)
        }
    }
}
