//! Exact solver for the embedding game on finite structures.
//!
//! A round: Duplicator picks embeddings f: A → B and g: B → A respecting the
//! current pairs; Spoiler then picks a tuple on one side and the pairs grow
//! by (c, f c) or (g d, d). A position only matters as its set of pairs, so
//! Spoiler's tuples are enumerated as subsets of the universe (up to the
//! width cap) and positions are memoized by their sorted pair set. Because
//! the two sides do not interact within a round, Duplicator survives n
//! rounds iff some f answers every left move and some g answers every right
//! move.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphism::{check_idx, Matcher, MorphismKind, PartialMap};
use crate::structure::Structure;

use super::Side;

/// Default cap on memoized positions.
pub const MEMO_CAP: usize = 1_000_000;

/// (A, ā, B, b̄).
#[derive(Clone, Debug)]
pub struct Position {
    pub left: Structure,
    pub a: Vec<String>,
    pub right: Structure,
    pub b: Vec<String>,
}

impl Position {
    pub fn new(left: Structure, a: Vec<String>, right: Structure, b: Vec<String>) -> Result<Self> {
        left.vocab().ensure_same(right.vocab())?;
        if a.len() != b.len() {
            return Err(Error::InconsistentPins(format!(
                "tuples of different lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        for id in &a {
            left.element(id)?;
        }
        for id in &b {
            right.element(id)?;
        }
        Ok(Position { left, a, right, b })
    }

    pub fn unpinned(left: Structure, right: Structure) -> Result<Self> {
        Position::new(left, Vec::new(), right, Vec::new())
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let pairs = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(x, y)| {
                (
                    self.left.element(x).unwrap(),
                    self.right.element(y).unwrap(),
                )
            })
            .collect();
        normalize(pairs)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GameConfig {
    /// Longest Spoiler tuple; `None` means |A| + |B|, which is exhaustive.
    pub width: Option<usize>,
    pub memo_cap: usize,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            width: None,
            memo_cap: MEMO_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpoilerNode {
    /// Duplicator has no embedding on `side` extending the pairs.
    NoEmbedding { side: Side },
    /// Spoiler plays on `side`; one reply for every embedding Duplicator may
    /// choose there.
    Refute {
        side: Side,
        replies: Vec<SpoilerReply>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpoilerReply {
    pub embedding: PartialMap,
    /// Elements Spoiler picks on the refuted side.
    pub chosen: Vec<String>,
    pub next: SpoilerNode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub pairs: Vec<(String, String)>,
    /// Rounds this choice is known to survive.
    pub rounds: usize,
    pub forward: PartialMap,
    pub backward: PartialMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "player", rename_all = "snake_case")]
pub enum FiniteWitness {
    Spoiler { tree: SpoilerNode },
    Duplicator { strategy: Vec<StrategyEntry> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub survives: bool,
    pub rounds: usize,
    pub witness: FiniteWitness,
    /// Positions stored in the memo table.
    pub positions: usize,
}

type Pairs = Vec<(usize, usize)>;

fn normalize(mut pairs: Pairs) -> Pairs {
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Subsets of `0..n` of size at most `k`, by size then lexicographically.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            cur.push(x);
            go(x + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 0..=k.min(n) {
        go(0, n, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Memoized solver for one pair of structures.
pub struct FiniteGame<'a> {
    a: &'a Structure,
    b: &'a Structure,
    forward: Matcher<'a>,
    backward: Matcher<'a>,
    moves_a: Vec<Vec<usize>>,
    moves_b: Vec<Vec<usize>>,
    memo: HashMap<(Pairs, usize), bool>,
    memo_cap: usize,
}

impl<'a> FiniteGame<'a> {
    pub fn new(a: &'a Structure, b: &'a Structure, cfg: GameConfig) -> Result<Self> {
        let width = cfg.width.unwrap_or(a.len() + b.len());
        Ok(FiniteGame {
            a,
            b,
            forward: Matcher::new(MorphismKind::Embedding, a, b)?,
            backward: Matcher::new(MorphismKind::Embedding, b, a)?,
            moves_a: subsets(a.len(), width),
            moves_b: subsets(b.len(), width),
            memo: HashMap::new(),
            memo_cap: cfg.memo_cap,
        })
    }

    pub fn positions(&self) -> usize {
        self.memo.len()
    }

    /// Embeddings on `side` extending `pairs`; none when the pairs are not
    /// even a partial injection.
    pub fn embeddings(&self, side: Side, pairs: &Pairs) -> Result<Vec<Vec<usize>>> {
        let (m, pins): (&Matcher, Pairs) = match side {
            Side::Left => (&self.forward, pairs.clone()),
            Side::Right => (&self.backward, pairs.iter().map(|&(x, y)| (y, x)).collect()),
        };
        match m.enumerate(&pins, None) {
            Ok(all) => Ok(all),
            Err(Error::InconsistentPins(_)) => Ok(Vec::new()),
            Err(e) => Err(e),
        }
    }

    pub fn moves(&self, side: Side) -> &[Vec<usize>] {
        match side {
            Side::Left => &self.moves_a,
            Side::Right => &self.moves_b,
        }
    }

    /// Pairs after Spoiler picks `chosen` on `side` against embedding `h`.
    pub fn advance(pairs: &Pairs, side: Side, h: &[usize], chosen: &[usize]) -> Pairs {
        let mut next = pairs.clone();
        for &c in chosen {
            next.push(match side {
                Side::Left => (c, h[c]),
                Side::Right => (h[c], c),
            });
        }
        normalize(next)
    }

    /// Whether `h` answers every Spoiler move on `side` for `n - 1` more rounds.
    pub fn answers(&mut self, pairs: &Pairs, side: Side, h: &[usize], n: usize) -> Result<bool> {
        for k in 0..self.moves(side).len() {
            let next = Self::advance(pairs, side, h, &self.moves(side)[k].clone());
            if !self.solve(&next, n - 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn side_survives(&mut self, pairs: &Pairs, side: Side, n: usize) -> Result<Option<Vec<usize>>> {
        for h in self.embeddings(side, pairs)? {
            if self.answers(pairs, side, &h, n)? {
                return Ok(Some(h));
            }
        }
        Ok(None)
    }

    pub fn solve(&mut self, pairs: &Pairs, n: usize) -> Result<bool> {
        if n == 0 {
            return Ok(true);
        }
        let key = (pairs.clone(), n);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = self.side_survives(pairs, Side::Left, n)?.is_some()
            && self.side_survives(pairs, Side::Right, n)?.is_some();
        if self.memo.len() >= self.memo_cap {
            return Err(Error::cap("memoized game positions", self.memo_cap));
        }
        self.memo.insert(key, v);
        Ok(v)
    }

    fn map_of(&self, side: Side, h: &[usize]) -> PartialMap {
        let (src, dst) = match side {
            Side::Left => (self.a, self.b),
            Side::Right => (self.b, self.a),
        };
        PartialMap {
            map: h
                .iter()
                .enumerate()
                .map(|(x, &y)| (src.id(x).to_string(), dst.id(y).to_string()))
                .collect(),
        }
    }

    fn ids(&self, side: Side, xs: &[usize]) -> Vec<String> {
        let s = match side {
            Side::Left => self.a,
            Side::Right => self.b,
        };
        xs.iter().map(|&x| s.id(x).to_string()).collect()
    }

    /// Spoiler's winning tree from a position Duplicator loses in `n` rounds.
    pub fn spoiler_tree(&mut self, pairs: &Pairs, n: usize) -> Result<SpoilerNode> {
        debug_assert!(n > 0);
        for side in [Side::Left, Side::Right] {
            if self.embeddings(side, pairs)?.is_empty() {
                return Ok(SpoilerNode::NoEmbedding { side });
            }
        }
        let side = if self.side_survives(pairs, Side::Left, n)?.is_none() {
            Side::Left
        } else {
            Side::Right
        };
        let mut replies = Vec::new();
        for h in self.embeddings(side, pairs)? {
            let mut found = None;
            for k in 0..self.moves(side).len() {
                let chosen = self.moves(side)[k].clone();
                let next = Self::advance(pairs, side, &h, &chosen);
                if !self.solve(&next, n - 1)? {
                    found = Some((chosen, next));
                    break;
                }
            }
            let (chosen, next) = found.expect("refuting move exists");
            replies.push(SpoilerReply {
                embedding: self.map_of(side, &h),
                chosen: self.ids(side, &chosen),
                next: self.spoiler_tree(&next, n - 1)?,
            });
        }
        Ok(SpoilerNode::Refute { side, replies })
    }

    /// Positional strategy covering every position reachable in `n` rounds.
    pub fn duplicator_strategy(&mut self, pairs: &Pairs, n: usize) -> Result<Vec<StrategyEntry>> {
        let mut table: HashMap<Pairs, (usize, Vec<usize>, Vec<usize>)> = HashMap::new();
        let mut order = Vec::new();
        self.fill_strategy(pairs, n, &mut table, &mut order)?;
        Ok(order
            .into_iter()
            .map(|p| {
                let (rounds, f, g) = &table[&p];
                StrategyEntry {
                    pairs: p
                        .iter()
                        .map(|&(x, y)| (self.a.id(x).to_string(), self.b.id(y).to_string()))
                        .collect(),
                    rounds: *rounds,
                    forward: self.map_of(Side::Left, f),
                    backward: self.map_of(Side::Right, g),
                }
            })
            .collect())
    }

    fn fill_strategy(
        &mut self,
        pairs: &Pairs,
        n: usize,
        table: &mut HashMap<Pairs, (usize, Vec<usize>, Vec<usize>)>,
        order: &mut Vec<Pairs>,
    ) -> Result<()> {
        if n == 0 || table.get(pairs).is_some_and(|(r, _, _)| *r >= n) {
            return Ok(());
        }
        let f = self
            .side_survives(pairs, Side::Left, n)?
            .expect("winning position");
        let g = self
            .side_survives(pairs, Side::Right, n)?
            .expect("winning position");
        if !table.contains_key(pairs) {
            order.push(pairs.clone());
        }
        table.insert(pairs.clone(), (n, f.clone(), g.clone()));
        for (side, h) in [(Side::Left, f), (Side::Right, g)] {
            for k in 0..self.moves(side).len() {
                let chosen = self.moves(side)[k].clone();
                let next = Self::advance(pairs, side, &h, &chosen);
                self.fill_strategy(&next, n - 1, table, order)?;
            }
        }
        Ok(())
    }
}

pub fn duplicator_survives(p: &Position, n: usize) -> Result<GameOutcome> {
    duplicator_survives_with(p, n, GameConfig::default())
}

pub fn duplicator_survives_with(p: &Position, n: usize, cfg: GameConfig) -> Result<GameOutcome> {
    let mut game = FiniteGame::new(&p.left, &p.right, cfg)?;
    let pairs = p.pairs();
    let survives = game.solve(&pairs, n)?;
    let witness = if survives {
        FiniteWitness::Duplicator {
            strategy: game.duplicator_strategy(&pairs, n)?,
        }
    } else {
        FiniteWitness::Spoiler {
            tree: game.spoiler_tree(&pairs, n)?,
        }
    };
    Ok(GameOutcome {
        survives,
        rounds: n,
        witness,
        positions: game.positions(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinguishingRound {
    /// Least n at which Duplicator loses, if any up to the cap.
    pub round: Option<usize>,
    pub cap: usize,
    /// True when no distinguishing round was found up to the cap.
    pub cap_reached: bool,
}

pub fn min_distinguishing_round(
    a: &Structure,
    b: &Structure,
    cap: usize,
) -> Result<DistinguishingRound> {
    let mut game = FiniteGame::new(a, b, GameConfig::default())?;
    for n in 1..=cap {
        if !game.solve(&Vec::new(), n)? {
            return Ok(DistinguishingRound {
                round: Some(n),
                cap,
                cap_reached: false,
            });
        }
    }
    Ok(DistinguishingRound {
        round: None,
        cap,
        cap_reached: true,
    })
}

/// Replays a witness through the move rules; true iff it establishes the
/// claimed outcome.
pub fn verify_outcome(p: &Position, outcome: &GameOutcome) -> Result<bool> {
    let width = p.left.len() + p.right.len();
    let game = FiniteGame::new(&p.left, &p.right, GameConfig::default())?;
    let pairs = p.pairs();
    match (&outcome.witness, outcome.survives) {
        (FiniteWitness::Spoiler { tree }, false) => {
            verify_spoiler(&game, &pairs, outcome.rounds, tree)
        }
        (FiniteWitness::Duplicator { strategy }, true) => {
            let mut table = HashMap::new();
            for e in strategy {
                let pairs = e
                    .pairs
                    .iter()
                    .map(|(x, y)| Ok((p.left.element(x)?, p.right.element(y)?)))
                    .collect::<Result<Vec<_>>>()?;
                let f = to_indices(&p.left, &p.right, &e.forward)?;
                let g = to_indices(&p.right, &p.left, &e.backward)?;
                table.insert(normalize(pairs), (e.rounds, f, g));
            }
            let _ = width;
            let mut seen = HashMap::new();
            verify_duplicator(&game, &table, &pairs, outcome.rounds, &mut seen)
        }
        _ => Ok(false),
    }
}

fn to_indices(src: &Structure, dst: &Structure, m: &PartialMap) -> Result<Vec<usize>> {
    src.ids()
        .iter()
        .map(|id| {
            let t = m
                .get(id)
                .ok_or_else(|| Error::Invalid(format!("map is not total: `{id}` unmapped")))?;
            dst.element(t)
        })
        .collect()
}

fn extends(pairs: &Pairs, side: Side, h: &[usize]) -> bool {
    pairs.iter().all(|&(x, y)| match side {
        Side::Left => h[x] == y,
        Side::Right => h[y] == x,
    })
}

fn verify_spoiler(game: &FiniteGame, pairs: &Pairs, n: usize, node: &SpoilerNode) -> Result<bool> {
    if n == 0 {
        return Ok(false);
    }
    match node {
        SpoilerNode::NoEmbedding { side } => Ok(game.embeddings(*side, pairs)?.is_empty()),
        SpoilerNode::Refute { side, replies } => {
            let (src, dst) = match side {
                Side::Left => (game.a, game.b),
                Side::Right => (game.b, game.a),
            };
            for h in game.embeddings(*side, pairs)? {
                let Some(reply) = replies
                    .iter()
                    .find(|r| to_indices(src, dst, &r.embedding).ok().as_deref() == Some(&h[..]))
                else {
                    return Ok(false);
                };
                let chosen = reply
                    .chosen
                    .iter()
                    .map(|id| src.element(id))
                    .collect::<Result<Vec<_>>>()?;
                let next = FiniteGame::advance(pairs, *side, &h, &chosen);
                if !verify_spoiler(game, &next, n - 1, &reply.next)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

fn verify_duplicator(
    game: &FiniteGame,
    table: &HashMap<Pairs, (usize, Vec<usize>, Vec<usize>)>,
    pairs: &Pairs,
    n: usize,
    seen: &mut HashMap<Pairs, usize>,
) -> Result<bool> {
    if n == 0 || seen.get(pairs).is_some_and(|&r| r >= n) {
        return Ok(true);
    }
    let Some((rounds, f, g)) = table.get(pairs) else {
        return Ok(false);
    };
    if *rounds < n
        || !check_idx(MorphismKind::Embedding, game.a, game.b, f)
        || !check_idx(MorphismKind::Embedding, game.b, game.a, g)
        || !extends(pairs, Side::Left, f)
        || !extends(pairs, Side::Right, g)
    {
        return Ok(false);
    }
    for (side, h) in [(Side::Left, f), (Side::Right, g)] {
        for chosen in game.moves(side) {
            let next = FiniteGame::advance(pairs, side, h, chosen);
            if !verify_duplicator(game, table, &next, n - 1, seen)? {
                return Ok(false);
            }
        }
    }
    seen.insert(pairs.clone(), n);
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{complete, im_kn, path};

    fn pos(a: Structure, b: Structure) -> Position {
        Position::unpinned(a, b).unwrap()
    }

    #[test]
    fn examples() {
        let p = pos(complete(3), complete(3));
        let out = duplicator_survives(&p, 99).unwrap();
        assert!(out.survives);
        assert!(verify_outcome(&p, &out).unwrap());

        let p = pos(complete(2), complete(3));
        let out = duplicator_survives(&p, 1).unwrap();
        assert!(!out.survives);
        assert_eq!(
            out.witness,
            FiniteWitness::Spoiler {
                tree: SpoilerNode::NoEmbedding { side: Side::Right }
            }
        );
        assert!(verify_outcome(&p, &out).unwrap());
    }

    #[test]
    fn pinned_positions() {
        let p3 = path(3);
        let ends =
            Position::new(p3.clone(), vec!["0".into()], p3.clone(), vec!["2".into()]).unwrap();
        assert!(duplicator_survives(&ends, 3).unwrap().survives);
        let mismatch =
            Position::new(p3.clone(), vec!["0".into()], p3.clone(), vec!["1".into()]).unwrap();
        let out = duplicator_survives(&mismatch, 1).unwrap();
        assert!(!out.survives);
        assert!(verify_outcome(&mismatch, &out).unwrap());
        assert!(duplicator_survives(&mismatch, 0).unwrap().survives);
        assert!(Position::new(p3.clone(), vec!["0".into()], p3, vec![]).is_err());
    }

    #[test]
    fn distinguishing_rounds() {
        let r = min_distinguishing_round(&complete(3), &complete(3), 4).unwrap();
        assert_eq!(r.round, None);
        assert!(r.cap_reached);
        let r = min_distinguishing_round(&complete(2), &im_kn(2, 1), 4).unwrap();
        assert_eq!(r.round, Some(1));
    }

    #[test]
    fn tampered_witnesses_fail() {
        let p = pos(complete(2), complete(3));
        let mut out = duplicator_survives(&p, 1).unwrap();
        out.witness = FiniteWitness::Spoiler {
            tree: SpoilerNode::NoEmbedding { side: Side::Left },
        };
        assert!(!verify_outcome(&p, &out).unwrap());

        let p = pos(complete(3), complete(3));
        let mut out = duplicator_survives(&p, 2).unwrap();
        if let FiniteWitness::Duplicator { strategy } = &mut out.witness {
            strategy.retain(|e| e.pairs.is_empty());
        }
        assert!(!verify_outcome(&p, &out).unwrap());
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(3, 1), vec![vec![], vec![0], vec![1], vec![2]]);
        assert_eq!(subsets(3, 9).len(), 8);
        assert_eq!(subsets(0, 2), vec![Vec::<usize>::new()]);
    }
}
