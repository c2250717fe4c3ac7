//! Two-player non-local games with real-valued scoring, correlations, and
//! their evaluation.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::TiltedParams;
use crate::strategies::QuantumStrategy;

/// Largest number of deterministic strategy pairs `classical_value` will scan.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// Question distribution and scoring tensor of a non-local game.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlocalGame {
    pub name: String,
    pub nx: usize,
    pub ny: usize,
    pub na: usize,
    pub nb: usize,
    dist: Vec<f64>,
    score: Vec<f64>,
}

impl NonlocalGame {
    /// Build and validate. `dist` is x-major, `score` is nested x, y, a, b.
    pub fn new(
        name: impl Into<String>,
        (nx, ny, na, nb): (usize, usize, usize, usize),
        dist: Vec<f64>,
        score: Vec<f64>,
    ) -> Result<Self> {
        let game = Self {
            name: name.into(),
            nx,
            ny,
            na,
            nb,
            dist,
            score,
        };
        game.validate(1e-12)?;
        Ok(game)
    }

    fn validate(&self, dist_tol: f64) -> Result<()> {
        let (nx, ny, na, nb) = (self.nx, self.ny, self.na, self.nb);
        if nx == 0 || ny == 0 || na == 0 || nb == 0 {
            return Err(Error::schema("question and answer set sizes must be positive"));
        }
        if self.dist.len() != nx * ny {
            return Err(Error::schema(format!(
                "dist has {} entries, expected {}",
                self.dist.len(),
                nx * ny
            )));
        }
        if self.score.len() != nx * ny * na * nb {
            return Err(Error::schema(format!(
                "score has {} entries, expected {}",
                self.score.len(),
                nx * ny * na * nb
            )));
        }
        if let Some(bad) = self.dist.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::schema(format!("dist entry {bad} is negative or not finite")));
        }
        if let Some(bad) = self.score.iter().find(|s| !s.is_finite()) {
            return Err(Error::schema(format!("score entry {bad} is not finite")));
        }
        let total: f64 = self.dist.iter().sum();
        if (total - 1.0).abs() > dist_tol {
            return Err(Error::schema(format!("dist sums to {total}, not 1")));
        }
        Ok(())
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.ny + y]
    }

    pub fn score(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.score[self.score_index(x, y, a, b)]
    }

    pub fn dist_table(&self) -> &[f64] {
        &self.dist
    }

    pub fn score_table(&self) -> &[f64] {
        &self.score
    }

    fn score_index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.ny + y) * self.na + a) * self.nb + b
    }

    /// Overwrite one scoring entry (used to probe zero-probability pairs).
    pub fn with_score(mut self, (x, y, a, b): (usize, usize, usize, usize), v: f64) -> Self {
        let i = self.score_index(x, y, a, b);
        self.score[i] = v;
        self
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.nx, self.ny, self.na, self.nb)
    }

    pub fn to_file(&self) -> GameFile {
        GameFile {
            name: self.name.clone(),
            nx: self.nx,
            ny: self.ny,
            na: self.na,
            nb: self.nb,
            dist: self.dist.clone(),
            score: self.score.clone(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(s).map_err(|e| Error::schema(e.to_string()))?;
        file.into_game()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json_str(&text)
    }

    /// Game with the same shape and uniform distribution, scoring constant `v`.
    pub fn constant(name: &str, shape: (usize, usize, usize, usize), v: f64) -> Result<Self> {
        let (nx, ny, na, nb) = shape;
        Self::new(
            name,
            shape,
            vec![1.0 / (nx * ny) as f64; nx * ny],
            vec![v; nx * ny * na * nb],
        )
    }
}

/// On-disk game definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub name: String,
    pub nx: usize,
    pub ny: usize,
    pub na: usize,
    pub nb: usize,
    pub dist: Vec<f64>,
    pub score: Vec<f64>,
}

impl GameFile {
    /// Tolerance on `Σ dist` accepted from files.
    pub const DIST_TOL: f64 = 1e-9;

    pub fn into_game(self) -> Result<NonlocalGame> {
        let game = NonlocalGame {
            name: self.name,
            nx: self.nx,
            ny: self.ny,
            na: self.na,
            nb: self.nb,
            dist: self.dist,
            score: self.score,
        };
        game.validate(Self::DIST_TOL)?;
        Ok(game)
    }
}

/// Table `p(a, b | x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Correlation {
    pub nx: usize,
    pub ny: usize,
    pub na: usize,
    pub nb: usize,
    p: Vec<f64>,
}

impl Correlation {
    pub const NORMALIZATION_TOL: f64 = 1e-10;
    pub const RANGE_TOL: f64 = 1e-12;

    pub fn new(shape: (usize, usize, usize, usize), p: Vec<f64>) -> Result<Self> {
        let (nx, ny, na, nb) = shape;
        if p.len() != nx * ny * na * nb {
            return Err(Error::shape(format!(
                "correlation needs {} entries, got {}",
                nx * ny * na * nb,
                p.len()
            )));
        }
        let c = Self { nx, ny, na, nb, p };
        c.validate()?;
        Ok(c)
    }

    pub fn from_fn(
        shape: (usize, usize, usize, usize),
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let (nx, ny, na, nb) = shape;
        let mut p = Vec::with_capacity(nx * ny * na * nb);
        for x in 0..nx {
            for y in 0..ny {
                for a in 0..na {
                    for b in 0..nb {
                        p.push(f(x, y, a, b));
                    }
                }
            }
        }
        Self::new(shape, p)
    }

    /// Uniform over answers for every question pair.
    pub fn uniform(shape: (usize, usize, usize, usize)) -> Self {
        let (_, _, na, nb) = shape;
        Self::from_fn(shape, |_, _, _, _| 1.0 / (na * nb) as f64).expect("uniform is valid")
    }

    /// Deterministic answers `(a, b)` regardless of the questions.
    pub fn deterministic(shape: (usize, usize, usize, usize), a0: usize, b0: usize) -> Self {
        Self::from_fn(shape, |_, _, a, b| if a == a0 && b == b0 { 1.0 } else { 0.0 })
            .expect("deterministic is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let block = self.na * self.nb;
        for (q, chunk) in self.p.chunks(block).enumerate() {
            let total: f64 = chunk.iter().sum();
            if (total - 1.0).abs() > Self::NORMALIZATION_TOL {
                return Err(Error::invalid(format!(
                    "p(.,.|x={},y={}) sums to {total}",
                    q / self.ny,
                    q % self.ny
                )));
            }
            if let Some(bad) = chunk
                .iter()
                .find(|&&v| !(-Self::RANGE_TOL..=1.0 + Self::RANGE_TOL).contains(&v))
            {
                return Err(Error::invalid(format!("probability {bad} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[((x * self.ny + y) * self.na + a) * self.nb + b]
    }

    pub fn table(&self) -> &[f64] {
        &self.p
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.nx, self.ny, self.na, self.nb)
    }
}

fn check_strategy_shape(g: &NonlocalGame, s: &QuantumStrategy) -> Result<()> {
    if s.meas_a.len() != g.nx || s.meas_b.len() != g.ny {
        return Err(Error::shape(format!(
            "strategy answers {}x{} questions, game asks {}x{}",
            s.meas_a.len(),
            s.meas_b.len(),
            g.nx,
            g.ny
        )));
    }
    if s.meas_a.iter().any(|m| m.len() != g.na) || s.meas_b.iter().any(|m| m.len() != g.nb) {
        return Err(Error::shape(format!(
            "strategy answer counts do not match the game's {}x{}",
            g.na, g.nb
        )));
    }
    Ok(())
}

/// Raw `⟨Ψ|P_x^a ⊗ Q_y^b|Ψ⟩` in x, y, a, b order, without validation.
pub(crate) fn joint_table(s: &QuantumStrategy) -> Vec<f64> {
    let m = s.state_matrix();
    let nx = s.meas_a.len();
    let ny = s.meas_b.len();
    let na = s.meas_a.first().map_or(0, Vec::len);
    let nb = s.meas_b.first().map_or(0, Vec::len);
    let pairs: Vec<(usize, usize)> = (0..nx).flat_map(|x| (0..na).map(move |a| (x, a))).collect();
    let blocks: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(x, a)| {
            // X = M† P M, then ⟨P ⊗ Q⟩ = Σ_jl Q_jl X_jl
            let reduced = m.adjoint() * s.meas_a[x][a].matrix() * &m;
            let mut out = Vec::with_capacity(ny * nb);
            for y in 0..ny {
                for b in 0..nb {
                    let q = s.meas_b[y][b].matrix();
                    let v = q
                        .iter()
                        .zip(reduced.iter())
                        .fold(0.0, |acc, (qe, xe)| acc + (qe * xe).re);
                    out.push(v);
                }
            }
            out
        })
        .collect();
    let mut p = vec![0.0; nx * ny * na * nb];
    for (k, &(x, a)) in pairs.iter().enumerate() {
        for y in 0..ny {
            for b in 0..nb {
                p[((x * ny + y) * na + a) * nb + b] = blocks[k][y * nb + b];
            }
        }
    }
    p
}

fn value_of_table(g: &NonlocalGame, p: &[f64]) -> f64 {
    let mut total = 0.0;
    for x in 0..g.nx {
        for y in 0..g.ny {
            let d = g.dist(x, y);
            if d == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for a in 0..g.na {
                for b in 0..g.nb {
                    let i = g.score_index(x, y, a, b);
                    inner += g.score[i] * p[i];
                }
            }
            total += d * inner;
        }
    }
    total
}

/// Expected score `Σ D(x,y) V(x,y,a,b) ⟨Ψ|P_x^a ⊗ Q_y^b|Ψ⟩`.
pub fn strategy_value(g: &NonlocalGame, s: &QuantumStrategy) -> Result<f64> {
    check_strategy_shape(g, s)?;
    Ok(value_of_table(g, &joint_table(s)))
}

pub fn correlation_of_strategy(s: &QuantumStrategy) -> Result<Correlation> {
    let nx = s.meas_a.len();
    let ny = s.meas_b.len();
    let na = s.meas_a.first().map_or(0, Vec::len);
    let nb = s.meas_b.first().map_or(0, Vec::len);
    if s.meas_a.iter().any(|m| m.len() != na) || s.meas_b.iter().any(|m| m.len() != nb) {
        return Err(Error::shape("ragged measurement lists"));
    }
    Correlation::new((nx, ny, na, nb), joint_table(s))
}

pub fn correlation_value(g: &NonlocalGame, c: &Correlation) -> Result<f64> {
    if c.shape() != g.shape() {
        return Err(Error::shape(format!(
            "correlation shape {:?} vs game shape {:?}",
            c.shape(),
            g.shape()
        )));
    }
    Ok(value_of_table(g, &c.p))
}

/// `max |p − q|` over all entries.
pub fn correlation_distance(p: &Correlation, q: &Correlation) -> Result<f64> {
    if p.shape() != q.shape() {
        return Err(Error::shape(format!("{:?} vs {:?}", p.shape(), q.shape())));
    }
    Ok(p.p
        .iter()
        .zip(q.p.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn enumeration_size(g: &NonlocalGame) -> Option<u128> {
    let alice = (g.na as u128).checked_pow(g.nx as u32)?;
    let bob = (g.nb as u128).checked_pow(g.ny as u32)?;
    alice.checked_mul(bob)
}

/// Best score over all deterministic strategy pairs, by exhaustive scan.
pub fn classical_value(g: &NonlocalGame) -> Result<f64> {
    let size = enumeration_size(g).unwrap_or(u128::MAX);
    if size > ENUMERATION_CAP {
        return Err(Error::cap("deterministic strategy pairs", size, ENUMERATION_CAP));
    }
    let alice_count = g.na.pow(g.nx as u32);
    let bob_count = g.nb.pow(g.ny as u32);
    let best = (0..alice_count)
        .into_par_iter()
        .map(|alice| {
            let answers_a = digits(alice, g.na, g.nx);
            // payoff[y][b] for this Alice assignment, summed over x in order
            let mut payoff = vec![0.0; g.ny * g.nb];
            for y in 0..g.ny {
                for b in 0..g.nb {
                    let mut acc = 0.0;
                    for (x, &a) in answers_a.iter().enumerate() {
                        acc += g.dist(x, y) * g.score(x, y, a, b);
                    }
                    payoff[y * g.nb + b] = acc;
                }
            }
            let mut best = f64::NEG_INFINITY;
            let mut answers_b = vec![0usize; g.ny];
            for _ in 0..bob_count {
                let v: f64 = answers_b
                    .iter()
                    .enumerate()
                    .map(|(y, &b)| payoff[y * g.nb + b])
                    .sum();
                best = best.max(v);
                increment(&mut answers_b, g.nb);
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

fn digits(mut n: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = n % base;
        n /= base;
    }
    out
}

fn increment(v: &mut [usize], base: usize) {
    for d in v.iter_mut() {
        *d += 1;
        if *d < base {
            return;
        }
        *d = 0;
    }
}

/// Tilted CHSH `(−1)^{a⊕b⊕xy} ± δ_{x=y=0} β (−1)^a`; `flipped` selects the
/// minus sign.
pub fn build_tchsh(alpha: f64, flipped: bool) -> Result<NonlocalGame> {
    let params = TiltedParams::from_alpha(alpha)?;
    let sign = if flipped { -1.0 } else { 1.0 };
    let mut score = Vec::with_capacity(16);
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    score.push(tchsh_score(params.beta, sign, x, y, a, b));
                }
            }
        }
    }
    let name = if flipped {
        format!("flipped-tchsh(alpha={alpha})")
    } else {
        format!("tchsh(alpha={alpha})")
    };
    NonlocalGame::new(name, (2, 2, 2, 2), vec![0.25; 4], score)
}

fn tchsh_score(beta: f64, sign: f64, x: usize, y: usize, a: usize, b: usize) -> f64 {
    let parity = if (a ^ b ^ (x & y)) == 0 { 1.0 } else { -1.0 };
    let marginal = if x == 0 && y == 0 {
        sign * beta * if a == 0 { 1.0 } else { -1.0 }
    } else {
        0.0
    };
    parity + marginal
}

const THREE_CHSH_FIXTURE: &str = include_str!("../fixtures/three_chsh.json");

/// The qutrit CHSH generalization, loaded from a definition file and checked
/// against its required shape.
pub fn build_three_chsh(defn: GameFile) -> Result<NonlocalGame> {
    if (defn.nx, defn.ny, defn.na, defn.nb) != (3, 4, 3, 3) {
        return Err(Error::schema(format!(
            "3-CHSH needs 3x4 questions and 3x3 answers, got {}x{} / {}x{}",
            defn.nx, defn.ny, defn.na, defn.nb
        )));
    }
    let game = defn.into_game()?;
    if game.dist.iter().any(|&d| (d - 1.0 / 12.0).abs() > 1e-12) {
        return Err(Error::schema("3-CHSH questions must be uniform (1/12 each)"));
    }
    Ok(game)
}

/// The 3-CHSH scoring tensor shipped with the crate.
pub fn shipped_three_chsh() -> NonlocalGame {
    let file: GameFile = serde_json::from_str(THREE_CHSH_FIXTURE).expect("fixture parses");
    build_three_chsh(file).expect("fixture validates")
}

/// Which sub-game a composed question belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubGame {
    ThreeChsh,
    FlippedTchsh,
}

/// Part of the composed game a question pair is drawn in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    A,
    B,
    C,
}

impl Part {
    pub const ALL: [Part; 3] = [Part::A, Part::B, Part::C];
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Part::A => "a",
            Part::B => "b",
            Part::C => "c",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionLabel {
    pub sub: SubGame,
    pub index: usize,
}

/// Question bookkeeping for the composed embezzlement game.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbQuestionMap {
    pub alice: Vec<QuestionLabel>,
    pub bob: Vec<QuestionLabel>,
    pub prob: Vec<f64>,
}

/// Alice's questions `0..3` are 3-CHSH, `3..5` flipped tilted CHSH.
pub const EMB_ALICE_SPLIT: usize = 3;
/// Bob's questions `0..4` are 3-CHSH, `4..6` flipped tilted CHSH.
pub const EMB_BOB_SPLIT: usize = 4;
/// Ratio of the flipped tilted CHSH sub-game.
pub const EMB_TILT_ALPHA: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl EmbQuestionMap {
    fn new() -> Self {
        let alice = (0..5)
            .map(|x| {
                if x < EMB_ALICE_SPLIT {
                    QuestionLabel { sub: SubGame::ThreeChsh, index: x }
                } else {
                    QuestionLabel {
                        sub: SubGame::FlippedTchsh,
                        index: x - EMB_ALICE_SPLIT,
                    }
                }
            })
            .collect();
        let bob = (0..6)
            .map(|y| {
                if y < EMB_BOB_SPLIT {
                    QuestionLabel { sub: SubGame::ThreeChsh, index: y }
                } else {
                    QuestionLabel {
                        sub: SubGame::FlippedTchsh,
                        index: y - EMB_BOB_SPLIT,
                    }
                }
            })
            .collect();
        let mut map = Self {
            alice,
            bob,
            prob: vec![0.0; 30],
        };
        for x in 0..5 {
            for y in 0..6 {
                map.prob[x * 6 + y] = match map.part_of(x, y) {
                    Some(Part::A) => 1.0 / 36.0,
                    Some(Part::B) => 1.0 / 12.0,
                    Some(Part::C) => 1.0 / 3.0,
                    None => 0.0,
                };
            }
        }
        map
    }

    pub fn part_of(&self, x: usize, y: usize) -> Option<Part> {
        let (qa, qb) = (self.alice[x], self.bob[y]);
        match (qa.sub, qb.sub) {
            (SubGame::ThreeChsh, SubGame::ThreeChsh) => Some(Part::A),
            (SubGame::FlippedTchsh, SubGame::FlippedTchsh) => Some(Part::B),
            (SubGame::ThreeChsh, SubGame::FlippedTchsh) if qa.index == 0 && qb.index == 0 => Some(Part::C),
            _ => None,
        }
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.prob[x * 6 + y]
    }

    /// Weighted contribution `Σ D·V·p` of each part; the three sum to the value.
    pub fn contributions(&self, g: &NonlocalGame, c: &Correlation) -> Result<PartBreakdown> {
        if c.shape() != g.shape() || g.shape() != (5, 6, 3, 3) {
            return Err(Error::shape("part breakdown needs the 5x6x3x3 composed game"));
        }
        let mut out = PartBreakdown::default();
        for x in 0..5 {
            for y in 0..6 {
                let Some(part) = self.part_of(x, y) else { continue };
                let mut inner = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        inner += g.score(x, y, a, b) * c.get(x, y, a, b);
                    }
                }
                *out.slot(part) += g.dist(x, y) * inner;
            }
        }
        Ok(out)
    }
}

/// Per-part weighted contributions to the composed game's value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PartBreakdown {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PartBreakdown {
    fn slot(&mut self, part: Part) -> &mut f64 {
        match part {
            Part::A => &mut self.a,
            Part::B => &mut self.b,
            Part::C => &mut self.c,
        }
    }

    pub fn total(&self) -> f64 {
        self.a + self.b + self.c
    }

    /// Value of the strategy on one part alone (contribution / 1/3).
    pub fn restricted(&self, part: Part) -> f64 {
        3.0 * match part {
            Part::A => self.a,
            Part::B => self.b,
            Part::C => self.c,
        }
    }
}

/// Compose the embezzlement game from a 3-CHSH definition.
pub fn build_emb(three_chsh: &NonlocalGame) -> Result<(NonlocalGame, EmbQuestionMap)> {
    if three_chsh.shape() != (3, 4, 3, 3) {
        return Err(Error::schema(format!(
            "3-CHSH sub-game has shape {:?}, expected (3, 4, 3, 3)",
            three_chsh.shape()
        )));
    }
    let map = EmbQuestionMap::new();
    let beta = TiltedParams::from_alpha(EMB_TILT_ALPHA)?.beta;
    let worst = -1.0 - beta;
    let mut score = vec![0.0; 5 * 6 * 9];
    let mut dist = vec![0.0; 30];
    for x in 0..5 {
        for y in 0..6 {
            dist[x * 6 + y] = map.prob(x, y);
            let part = map.part_of(x, y);
            for a in 0..3 {
                for b in 0..3 {
                    let v = match part {
                        Some(Part::A) => three_chsh.score(x, y, a, b),
                        Some(Part::B) => {
                            let (xp, yp) = (x - EMB_ALICE_SPLIT, y - EMB_BOB_SPLIT);
                            if a == 2 || b == 2 {
                                worst
                            } else {
                                // roles switched: Bob is the first player
                                tchsh_score(beta, -1.0, yp, xp, b, a)
                            }
                        }
                        Some(Part::C) => {
                            let win = (a == 0 && b == 0) || (a != 0 && b != 0);
                            if win {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        None => 0.0,
                    };
                    score[((x * 6 + y) * 3 + a) * 3 + b] = v;
                }
            }
        }
    }
    // parts are disjoint, so every pair has at most one owner
    let owned = (0..5)
        .flat_map(|x| (0..6).map(move |y| (x, y)))
        .filter(|&(x, y)| map.part_of(x, y).is_some())
        .count();
    assert_eq!(owned, 12 + 4 + 1);
    let game = NonlocalGame::new("emb", (5, 6, 3, 3), dist, score)?;
    Ok((game, map))
}

/// The composed game built from the shipped 3-CHSH fixture.
pub fn shipped_emb() -> (NonlocalGame, EmbQuestionMap) {
    build_emb(&shipped_three_chsh()).expect("shipped fixture composes")
}
