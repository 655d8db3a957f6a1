//! Turn-by-turn play against the solver over any line-based reader/writer.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphism::{check_idx, MorphismKind, PartialMap};
use crate::structure::Structure;

use super::finite::{FiniteGame, GameConfig, Position};
use super::symbolic::{SymEqStructure, SymGame, SymMove, SymPosition, SYM_MEMO_CAP};
use super::Side;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Spoiler,
    Duplicator,
}

impl FromStr for Player {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spoiler" => Ok(Player::Spoiler),
            "duplicator" => Ok(Player::Duplicator),
            _ => Err(Error::Invalid(format!(
                "unknown role `{s}`, expected spoiler or duplicator"
            ))),
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Spoiler => "Spoiler",
            Player::Duplicator => "Duplicator",
        })
    }
}

pub enum GameInstance {
    Finite(Position),
    Symbolic {
        left: SymEqStructure,
        right: SymEqStructure,
    },
}

/// Everything needed to reproduce a session: the raw input lines in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub human: Player,
    pub rounds: usize,
    pub inputs: Vec<String>,
    pub log: Vec<String>,
    pub winner: Player,
    /// Round in which Spoiler won; `None` when Duplicator survived.
    pub decided_in: Option<usize>,
}

struct Session<R, W> {
    input: R,
    out: W,
    inputs: Vec<String>,
    log: Vec<String>,
}

impl<R: BufRead, W: Write> Session<R, W> {
    fn say(&mut self, line: String) -> Result<()> {
        writeln!(self.out, "{line}").map_err(|e| Error::Invalid(format!("cannot write: {e}")))?;
        self.log.push(line);
        Ok(())
    }

    fn ask(&mut self, prompt: &str) -> Result<String> {
        write!(self.out, "{prompt}> ")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::Invalid(format!("cannot write: {e}")))?;
        let mut line = String::new();
        let n = self
            .input
            .read_line(&mut line)
            .map_err(|e| Error::Invalid(format!("cannot read: {e}")))?;
        if n == 0 {
            return Err(Error::Invalid("input ended before the game did".into()));
        }
        let line = line.trim().to_string();
        self.inputs.push(line.clone());
        Ok(line)
    }

    fn reject(&mut self, why: impl fmt::Display) -> Result<()> {
        writeln!(self.out, "invalid: {why}")
            .map_err(|e| Error::Invalid(format!("cannot write: {e}")))
    }
}

fn side_word(word: &str) -> Option<Side> {
    match word {
        "left" | "l" | "A" => Some(Side::Left),
        "right" | "r" | "B" => Some(Side::Right),
        _ => None,
    }
}

/// Runs a game of `rounds` rounds with the human in role `human`.
pub fn play_interactive<R: BufRead, W: Write>(
    game: &GameInstance,
    human: Player,
    rounds: usize,
    input: R,
    out: W,
) -> Result<Transcript> {
    let mut s = Session {
        input,
        out,
        inputs: Vec::new(),
        log: Vec::new(),
    };
    let decided_in = match game {
        GameInstance::Finite(p) => play_finite(&mut s, p, human, rounds)?,
        GameInstance::Symbolic { left, right } => {
            play_symbolic(&mut s, left, right, human, rounds)?
        }
    };
    let winner = if decided_in.is_some() {
        Player::Spoiler
    } else {
        Player::Duplicator
    };
    match decided_in {
        Some(r) => s.say(format!("Spoiler wins in round {r}"))?,
        None => s.say(format!("Duplicator survives {rounds} rounds"))?,
    }
    Ok(Transcript {
        human,
        rounds,
        inputs: s.inputs,
        log: s.log,
        winner,
        decided_in,
    })
}

/// Plays the recorded inputs again; the result equals the original when
/// the engine is deterministic.
pub fn replay(game: &GameInstance, t: &Transcript) -> Result<Transcript> {
    let text = t
        .inputs
        .iter()
        .map(|l| format!("{l}\n"))
        .collect::<String>();
    play_interactive(game, t.human, t.rounds, text.as_bytes(), std::io::sink())
}

fn show_map(src: &Structure, dst: &Structure, h: &[usize]) -> String {
    h.iter()
        .enumerate()
        .map(|(x, &y)| format!("{}={}", src.id(x), dst.id(y)))
        .collect::<Vec<_>>()
        .join(",")
}

fn play_finite<R: BufRead, W: Write>(
    s: &mut Session<R, W>,
    p: &Position,
    human: Player,
    rounds: usize,
) -> Result<Option<usize>> {
    let (a, b) = (&p.left, &p.right);
    let mut game = FiniteGame::new(a, b, GameConfig::default())?;
    let mut pairs: Vec<(usize, usize)> =
        p.a.iter()
            .zip(&p.b)
            .map(|(x, y)| Ok((a.element(x)?, b.element(y)?)))
            .collect::<Result<_>>()?;
    pairs.sort_unstable();
    pairs.dedup();
    for round in 1..=rounds {
        let left = rounds - round + 1;
        s.say(format!("round {round}"))?;
        let mut chosen = Vec::new();
        for side in [Side::Left, Side::Right] {
            let all = game.embeddings(side, &pairs)?;
            if all.is_empty() {
                s.say(format!(
                    "Duplicator has no embedding {}; concedes",
                    side.arrow()
                ))?;
                return Ok(Some(round));
            }
            let h = match human {
                Player::Spoiler => {
                    let mut pick = all[0].clone();
                    for h in &all {
                        if game.answers(&pairs, side, h, left)? {
                            pick = h.clone();
                            break;
                        }
                    }
                    pick
                }
                Player::Duplicator => ask_embedding(s, side, a, b, &all)?,
            };
            let (src, dst) = side.pick(a, b);
            s.say(format!(
                "Duplicator {}: {}",
                side.arrow(),
                show_map(src, dst, &h)
            ))?;
            chosen.push(h);
        }
        let (side, elems) = match human {
            Player::Spoiler => ask_tuple(s, a, b)?,
            Player::Duplicator => {
                let mut pick = None;
                'search: for side in [Side::Left, Side::Right] {
                    let h = &chosen[side as usize];
                    for m in game.moves(side).to_vec() {
                        if !game.solve(&FiniteGame::advance(&pairs, side, h, &m), left - 1)? {
                            pick = Some((side, m));
                            break 'search;
                        }
                    }
                }
                pick.unwrap_or_else(|| (Side::Left, (0..a.len()).collect()))
            }
        };
        let src = side.pick(a, b).0;
        let ids: Vec<&str> = elems.iter().map(|&x| src.id(x)).collect();
        s.say(format!(
            "Spoiler picks {} in {}",
            ids.join(","),
            side.name()
        ))?;
        pairs = FiniteGame::advance(&pairs, side, &chosen[side as usize], &elems);
    }
    Ok(None)
}

fn ask_tuple<R: BufRead, W: Write>(
    s: &mut Session<R, W>,
    a: &Structure,
    b: &Structure,
) -> Result<(Side, Vec<usize>)> {
    loop {
        let line = s.ask("spoiler (left|right ids...)")?;
        let mut words = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|w| !w.is_empty());
        let Some(side) = words.next().and_then(side_word) else {
            s.reject("start with `left` or `right`")?;
            continue;
        };
        let src = side.pick(a, b).0;
        match words.map(|w| src.element(w)).collect::<Result<Vec<_>>>() {
            Ok(elems) => return Ok((side, elems)),
            Err(e) => s.reject(e)?,
        }
    }
}

fn ask_embedding<R: BufRead, W: Write>(
    s: &mut Session<R, W>,
    side: Side,
    a: &Structure,
    b: &Structure,
    allowed: &[Vec<usize>],
) -> Result<Vec<usize>> {
    let (src, dst) = side.pick(a, b);
    loop {
        let line = s.ask(&format!("duplicator {} (x=y,...)", side.arrow()))?;
        let parsed = PartialMap::parse(&line).and_then(|m| {
            src.ids()
                .iter()
                .map(|id| {
                    m.get(id)
                        .ok_or_else(|| Error::Invalid(format!("`{id}` is not mapped")))
                        .and_then(|t| dst.element(t))
                })
                .collect::<Result<Vec<_>>>()
        });
        match parsed {
            Ok(h) if !check_idx(MorphismKind::Embedding, src, dst, &h) => {
                s.reject("not an embedding")?
            }
            Ok(h) if !allowed.contains(&h) => s.reject("does not respect the chosen elements")?,
            Ok(h) => return Ok(h),
            Err(e) => s.reject(e)?,
        }
    }
}

fn play_symbolic<R: BufRead, W: Write>(
    s: &mut Session<R, W>,
    left: &SymEqStructure,
    right: &SymEqStructure,
    human: Player,
    rounds: usize,
) -> Result<Option<usize>> {
    let mut game = SymGame::new(SYM_MEMO_CAP);
    let pairs: Vec<(String, String)> = left
        .pins
        .iter()
        .filter(|p| right.pins.iter().any(|q| q.id == p.id))
        .map(|p| (p.id.clone(), p.id.clone()))
        .collect();
    let mut pos = match SymPosition::from_pins(left, right, &pairs) {
        Ok(p) => p,
        Err(Error::InconsistentPins(why)) if rounds > 0 => {
            s.say(format!(
                "round 1\nDuplicator cannot respect the pins ({why}); concedes"
            ))?;
            return Ok(Some(1));
        }
        Err(e) => return Err(e),
    };
    for round in 1..=rounds {
        let remaining = rounds - round + 1;
        s.say(format!("round {round}"))?;
        for (i, t) in pos.touched.iter().enumerate() {
            s.say(format!(
                "  touched class {}: size {} on the left, {} on the right, {} chosen",
                i + 1,
                t.left_size,
                t.right_size,
                t.pinned
            ))?;
        }
        let mut schemas = Vec::new();
        for side in [Side::Left, Side::Right] {
            let all = pos.schemas(side);
            if all.is_empty() {
                s.say(format!(
                    "Duplicator has no embedding {}; concedes",
                    side.arrow()
                ))?;
                return Ok(Some(round));
            }
            let schema = match human {
                Player::Spoiler => match game.winning_schema(&pos, side, remaining)? {
                    Some(w) => w,
                    None => all[0].clone(),
                },
                Player::Duplicator => {
                    for (i, sc) in all.iter().enumerate() {
                        writeln!(s.out, "  {}: {sc}", i + 1)
                            .map_err(|e| Error::Invalid(e.to_string()))?;
                    }
                    loop {
                        let line = s.ask(&format!("duplicator {} (number)", side.arrow()))?;
                        match line.parse::<usize>() {
                            Ok(k) if (1..=all.len()).contains(&k) => break all[k - 1].clone(),
                            _ => s.reject(format!("expected a number from 1 to {}", all.len()))?,
                        }
                    }
                }
            };
            s.say(format!("Duplicator {}: {schema}", side.arrow()))?;
            schemas.push(schema);
        }
        let (side, mv) = match human {
            Player::Spoiler => {
                for side in [Side::Left, Side::Right] {
                    for (i, mv) in pos.moves(side, &schemas[side as usize]).iter().enumerate() {
                        writeln!(s.out, "  {} {}: {mv}", side.name(), i + 1)
                            .map_err(|e| Error::Invalid(e.to_string()))?;
                    }
                }
                loop {
                    let line = s.ask("spoiler (left|right number)")?;
                    let mut words = line.split_whitespace();
                    let side = words.next().and_then(side_word);
                    let k = words.next().and_then(|w| w.parse::<usize>().ok());
                    if let (Some(side), Some(k)) = (side, k) {
                        let moves = pos.moves(side, &schemas[side as usize]);
                        if (1..=moves.len()).contains(&k) {
                            break (side, moves[k - 1]);
                        }
                    }
                    s.reject("expected `left N` or `right N` from the listed moves")?;
                }
            }
            Player::Duplicator => {
                let mut pick = None;
                for side in [Side::Left, Side::Right] {
                    if let Some(mv) =
                        game.refuting_move(&pos, side, &schemas[side as usize], remaining)?
                    {
                        pick = Some((side, mv));
                        break;
                    }
                }
                pick.unwrap_or((Side::Left, SymMove::Pass))
            }
        };
        s.say(format!("Spoiler picks in {}: {mv}", side.name()))?;
        pos = pos.advance(side, &mv);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::complete;

    fn k3k3() -> GameInstance {
        GameInstance::Finite(Position::unpinned(complete(3), complete(3)).unwrap())
    }

    #[test]
    fn human_spoiler_cannot_beat_isomorphic_pair() {
        let input = "left 0\nbogus\nright 1,2\nleft 0 1 2\n";
        let mut out = Vec::new();
        let t = play_interactive(&k3k3(), Player::Spoiler, 3, input.as_bytes(), &mut out).unwrap();
        assert_eq!(t.winner, Player::Duplicator);
        assert_eq!(t.inputs.len(), 4);
        assert!(String::from_utf8(out).unwrap().contains("invalid:"));
        assert_eq!(replay(&k3k3(), &t).unwrap(), t);
    }

    #[test]
    fn human_duplicator_loses_without_embeddings() {
        let g = GameInstance::Finite(Position::unpinned(complete(2), complete(3)).unwrap());
        let input = "0=0,1=1\n";
        let t =
            play_interactive(&g, Player::Duplicator, 2, input.as_bytes(), std::io::sink()).unwrap();
        assert_eq!(t.winner, Player::Spoiler);
        assert_eq!(t.decided_in, Some(1));
    }

    #[test]
    fn human_duplicator_on_isomorphic_pair() {
        let input = "0=1,1=0\n0=0,1=2,2=1\n0=0,1=1,2=2\n";
        let t = play_interactive(
            &k3k3(),
            Player::Duplicator,
            1,
            input.as_bytes(),
            std::io::sink(),
        )
        .unwrap();
        assert_eq!(t.winner, Player::Duplicator);
        assert_eq!(t.inputs.len(), 3);
    }

    #[test]
    fn ended_input_is_an_error() {
        assert!(
            play_interactive(&k3k3(), Player::Spoiler, 2, "".as_bytes(), std::io::sink()).is_err()
        );
    }

    #[test]
    fn symbolic_hierarchy_play() {
        let g = GameInstance::Symbolic {
            left: SymEqStructure::parse_profile("(aleph1 x aleph0)").unwrap(),
            right: SymEqStructure::parse_profile("(aleph1 x aleph0),(aleph0 x 1)").unwrap(),
        };
        let input = "right 2\n";
        let mut out = Vec::new();
        let t = play_interactive(&g, Player::Spoiler, 2, input.as_bytes(), &mut out).unwrap();
        assert_eq!(t.winner, Player::Spoiler);
        assert_eq!(t.decided_in, Some(2));
        assert!(t.log.iter().any(|l| l.contains("size aleph0")));
        assert_eq!(replay(&g, &t).unwrap(), t);
    }
}
