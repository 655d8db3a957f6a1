//! The embedding game on pure equivalence structures with possibly infinite
//! classes, described by a profile of (class size, class count) pairs.
//!
//! Embeddings between equivalence structures are injective class
//! assignments in which every class lands in a class at least as large, so
//! a position reduces to: the touched class pairs (sizes on both sides and
//! how many elements are pinned in them) and the multisets of untouched
//! class sizes. Duplicator's embedding is abstracted to a schema naming, for
//! each untouched source size, the set of target sizes it uses; Spoiler
//! picks one element per round, described by which class it comes from.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::equiv_classes;
use crate::error::{Error, Result};
use crate::structure::Structure;

use super::Side;

/// Largest round count `sym_game` accepts by default.
pub const SYM_ROUND_CAP: usize = 4;
/// Default cap on memoized symbolic positions.
pub const SYM_MEMO_CAP: usize = 200_000;

/// A cardinal: finite, ℵ0 or ℵ1. The derived order is the cardinal order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymCard {
    Finite(u64),
    Aleph0,
    Aleph1,
}

/// Cardinal addition: finite sums add, anything plus an infinite cardinal
/// is the larger of the two.
impl std::ops::Add for SymCard {
    type Output = SymCard;

    fn add(self, other: SymCard) -> SymCard {
        match (self, other) {
            (SymCard::Finite(a), SymCard::Finite(b)) => SymCard::Finite(a.saturating_add(b)),
            _ => self.max(other),
        }
    }
}

impl SymCard {
    pub fn is_finite(self) -> bool {
        matches!(self, SymCard::Finite(_))
    }

    /// Removes finitely many; infinite cardinals are unchanged.
    pub fn sub_finite(self, k: u64) -> Option<SymCard> {
        match self {
            SymCard::Finite(a) => a.checked_sub(k).map(SymCard::Finite),
            inf => Some(inf),
        }
    }

    pub fn sum(xs: impl IntoIterator<Item = SymCard>) -> SymCard {
        xs.into_iter().fold(SymCard::Finite(0), |a, b| a + b)
    }

    /// Whether more than `k` things fit.
    fn exceeds(self, k: u64) -> bool {
        self > SymCard::Finite(k)
    }
}

impl fmt::Display for SymCard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymCard::Finite(n) => write!(f, "{n}"),
            SymCard::Aleph0 => f.write_str("aleph0"),
            SymCard::Aleph1 => f.write_str("aleph1"),
        }
    }
}

impl FromStr for SymCard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "aleph0" | "ℵ0" | "ℵ₀" => Ok(SymCard::Aleph0),
            "aleph1" | "ℵ1" | "ℵ₁" => Ok(SymCard::Aleph1),
            t => t
                .parse()
                .map(SymCard::Finite)
                .map_err(|_| Error::Symbolic(format!("not a cardinal: `{t}`"))),
        }
    }
}

impl Serialize for SymCard {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SymCard::Finite(n) => s.serialize_u64(*n),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for SymCard {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(SymCard::Finite(n)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassGroup {
    pub size: SymCard,
    pub count: SymCard,
}

/// A named element: element `element` of class `class` within `group`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymPin {
    pub id: String,
    pub group: usize,
    pub class: u64,
    pub element: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymEqStructure {
    pub profile: Vec<ClassGroup>,
    #[serde(default)]
    pub pins: Vec<SymPin>,
}

impl SymEqStructure {
    pub fn new(profile: Vec<ClassGroup>, pins: Vec<SymPin>) -> Result<Self> {
        let s = SymEqStructure { profile, pins };
        s.validate()?;
        Ok(s)
    }

    /// Parses `(size x count),(size x count)`.
    pub fn parse_profile(text: &str) -> Result<Self> {
        let mut profile = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Symbolic(format!("expected `(` at `{rest}`")))?;
            let close = open
                .find(')')
                .ok_or_else(|| Error::Symbolic("unclosed `(` in profile".into()))?;
            let inner = &open[..close];
            let (size, count) = inner
                .split_once(" x ")
                .or_else(|| inner.split_once('×'))
                .or_else(|| inner.split_once('x'))
                .ok_or_else(|| {
                    Error::Symbolic(format!("expected `size x count`, got `{inner}`"))
                })?;
            profile.push(ClassGroup {
                size: size.parse()?,
                count: count.parse()?,
            });
            rest = open[close + 1..].trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
                if rest.is_empty() {
                    return Err(Error::Symbolic("trailing `,` in profile".into()));
                }
            }
        }
        SymEqStructure::new(profile, Vec::new())
    }

    pub fn with_pin(mut self, id: &str, group: usize, class: u64, element: u64) -> Result<Self> {
        self.pins.push(SymPin {
            id: id.to_string(),
            group,
            class,
            element,
        });
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.profile {
            if g.size == SymCard::Finite(0) {
                return Err(Error::Symbolic("classes must be nonempty".into()));
            }
        }
        for (i, p) in self.pins.iter().enumerate() {
            if self.pins[..i].iter().any(|q| q.id == p.id) {
                return Err(Error::Symbolic(format!("duplicate pin `{}`", p.id)));
            }
            let g = self.profile.get(p.group).ok_or_else(|| {
                Error::Symbolic(format!("pin `{}`: no class group {}", p.id, p.group))
            })?;
            if !g.count.exceeds(p.class) {
                return Err(Error::Symbolic(format!(
                    "pin `{}`: group has no class {}",
                    p.id, p.class
                )));
            }
            if !g.size.exceeds(p.element) {
                return Err(Error::Symbolic(format!(
                    "pin `{}`: class has no element {}",
                    p.id, p.element
                )));
            }
        }
        Ok(())
    }

    fn pin(&self, id: &str) -> Result<&SymPin> {
        self.pins
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| Error::Symbolic(format!("unknown pin `{id}`")))
    }

    /// The finite structure this profile denotes, with pin ids mapped to
    /// element ids; `None` when some size or count is infinite.
    pub fn materialize(&self) -> Option<(Structure, BTreeMap<String, String>)> {
        let mut sizes = Vec::new();
        let mut first = Vec::new();
        for g in &self.profile {
            let (SymCard::Finite(size), SymCard::Finite(count)) = (g.size, g.count) else {
                return None;
            };
            first.push(sizes.len());
            sizes.extend(std::iter::repeat_n(size as usize, count as usize));
        }
        let pins = self
            .pins
            .iter()
            .map(|p| {
                (
                    p.id.clone(),
                    format!("{}.{}", first[p.group] + p.class as usize, p.element),
                )
            })
            .collect();
        Some((equiv_classes(&sizes), pins))
    }
}

impl fmt::Display for SymEqStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let groups: Vec<String> = self
            .profile
            .iter()
            .map(|g| format!("({} x {})", g.size, g.count))
            .collect();
        f.write_str(&groups.join(","))
    }
}

/// A class touched by the pairs: its size on each side and how many
/// distinct elements are pinned in it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TouchedPair {
    pub left_size: SymCard,
    pub right_size: SymCard,
    pub pinned: u64,
}

impl TouchedPair {
    fn size(&self, side: Side) -> SymCard {
        match side {
            Side::Left => self.left_size,
            Side::Right => self.right_size,
        }
    }
}

/// Normalized game position.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymPosition {
    pub touched: Vec<TouchedPair>,
    /// Untouched classes by size, ascending, counts nonzero.
    pub left: Vec<ClassGroup>,
    pub right: Vec<ClassGroup>,
}

fn merge_groups(groups: impl IntoIterator<Item = ClassGroup>) -> Vec<ClassGroup> {
    let mut by_size: BTreeMap<SymCard, SymCard> = BTreeMap::new();
    for g in groups {
        let c = by_size.entry(g.size).or_insert(SymCard::Finite(0));
        *c = *c + g.count;
    }
    by_size
        .into_iter()
        .filter(|&(_, count)| count != SymCard::Finite(0))
        .map(|(size, count)| ClassGroup { size, count })
        .collect()
}

fn take_one(groups: &mut Vec<ClassGroup>, size: SymCard) {
    let g = groups
        .iter_mut()
        .find(|g| g.size == size)
        .expect("class of that size");
    g.count = g.count.sub_finite(1).expect("nonzero count");
    groups.retain(|g| g.count != SymCard::Finite(0));
}

impl SymPosition {
    /// Position given by pairing pins of `left` with pins of `right`.
    pub fn from_pins(
        left: &SymEqStructure,
        right: &SymEqStructure,
        pairs: &[(String, String)],
    ) -> Result<Self> {
        left.validate()?;
        right.validate()?;
        let resolved = pairs
            .iter()
            .map(|(x, y)| Ok((left.pin(x)?, right.pin(y)?)))
            .collect::<Result<Vec<_>>>()?;
        let class = |p: &SymPin| (p.group, p.class);
        let elem = |p: &SymPin| (p.group, p.class, p.element);
        for (i, (l1, r1)) in resolved.iter().enumerate() {
            for (l2, r2) in &resolved[..i] {
                if (class(l1) == class(l2)) != (class(r1) == class(r2))
                    || (elem(l1) == elem(l2)) != (elem(r1) == elem(r2))
                {
                    return Err(Error::InconsistentPins(format!(
                        "pins `{}`->`{}` and `{}`->`{}` disagree on equality or equivalence",
                        l1.id, r1.id, l2.id, r2.id
                    )));
                }
            }
        }
        // touched classes keyed by their left class, with distinct pinned elements
        let mut touched: BTreeMap<(usize, u64), ((usize, u64), Vec<u64>)> = BTreeMap::new();
        for (l, r) in &resolved {
            let e = touched.entry(class(l)).or_insert((class(r), Vec::new()));
            if !e.1.contains(&l.element) {
                e.1.push(l.element);
            }
        }
        let mut used_left = vec![0u64; left.profile.len()];
        let mut used_right = vec![0u64; right.profile.len()];
        let mut pairs_out = Vec::new();
        for (&(lg, _), &((rg, _), ref elems)) in &touched {
            used_left[lg] += 1;
            used_right[rg] += 1;
            pairs_out.push(TouchedPair {
                left_size: left.profile[lg].size,
                right_size: right.profile[rg].size,
                pinned: elems.len() as u64,
            });
        }
        let untouched = |s: &SymEqStructure, used: &[u64]| {
            merge_groups(s.profile.iter().zip(used).map(|(g, &u)| ClassGroup {
                size: g.size,
                count: g.count.sub_finite(u).expect("pins name existing classes"),
            }))
        };
        pairs_out.sort();
        Ok(SymPosition {
            touched: pairs_out,
            left: untouched(left, &used_left),
            right: untouched(right, &used_right),
        })
    }

    fn sides(&self, side: Side) -> (&[ClassGroup], &[ClassGroup]) {
        match side {
            Side::Left => (&self.left, &self.right),
            Side::Right => (&self.right, &self.left),
        }
    }

    /// Whether an embedding on `side` (left = forward) extends the pairs.
    pub fn embedding_exists(&self, side: Side) -> bool {
        let other = side.other();
        if self.touched.iter().any(|t| t.size(side) > t.size(other)) {
            return false;
        }
        let (src, dst) = self.sides(side);
        src.iter().all(|g| {
            let need = SymCard::sum(src.iter().filter(|h| h.size >= g.size).map(|h| h.count));
            let have = SymCard::sum(dst.iter().filter(|h| h.size >= g.size).map(|h| h.count));
            need <= have
        })
    }

    /// Every feasible class-assignment schema on `side`.
    pub fn schemas(&self, side: Side) -> Vec<Schema> {
        let other = side.other();
        if self.touched.iter().any(|t| t.size(side) > t.size(other)) {
            return Vec::new();
        }
        let (src, dst) = self.sides(side);
        let options: Vec<Vec<Vec<SymCard>>> = src
            .iter()
            .map(|g| {
                let cands: Vec<SymCard> = dst
                    .iter()
                    .filter(|h| h.size >= g.size)
                    .map(|h| h.size)
                    .collect();
                (1u32..1 << cands.len())
                    .map(|mask| {
                        cands
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .map(|(_, &c)| c)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut pick = vec![0usize; src.len()];
        if options.iter().any(|o| o.is_empty()) {
            return out;
        }
        loop {
            let schema = Schema {
                assign: src
                    .iter()
                    .zip(&pick)
                    .zip(&options)
                    .map(|((g, &k), o)| (g.size, o[k].clone()))
                    .collect(),
            };
            if schema.feasible(src, dst) {
                out.push(schema);
            }
            let mut i = 0;
            loop {
                if i == pick.len() {
                    return out;
                }
                pick[i] += 1;
                if pick[i] < options[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
        }
    }

    /// Spoiler's single-element moves on `side` against `schema`.
    pub fn moves(&self, side: Side, schema: &Schema) -> Vec<SymMove> {
        let mut out = vec![SymMove::Pass];
        for (i, t) in self.touched.iter().enumerate() {
            if t.size(side).exceeds(t.pinned) {
                out.push(SymMove::FreshTouched { class: i });
            }
        }
        for (size, targets) in &schema.assign {
            for &target in targets {
                out.push(SymMove::FreshUntouched {
                    size: *size,
                    target,
                });
            }
        }
        out
    }

    pub fn advance(&self, side: Side, mv: &SymMove) -> SymPosition {
        let mut next = self.clone();
        match *mv {
            SymMove::Pass => {}
            SymMove::FreshTouched { class } => next.touched[class].pinned += 1,
            SymMove::FreshUntouched { size, target } => {
                let (l, r) = match side {
                    Side::Left => (size, target),
                    Side::Right => (target, size),
                };
                take_one(&mut next.left, l);
                take_one(&mut next.right, r);
                next.touched.push(TouchedPair {
                    left_size: l,
                    right_size: r,
                    pinned: 1,
                });
            }
        }
        next.touched.sort();
        next
    }
}

/// For each untouched source size, the target sizes its classes go to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schema {
    pub assign: Vec<(SymCard, Vec<SymCard>)>,
}

impl Schema {
    /// Hall's condition for sending each source group into its targets.
    fn feasible(&self, src: &[ClassGroup], dst: &[ClassGroup]) -> bool {
        let n = self.assign.len();
        (1u32..1 << n).all(|mask| {
            let chosen = (0..n).filter(|i| mask >> i & 1 == 1);
            let mut need = SymCard::Finite(0);
            let mut targets: Vec<SymCard> = Vec::new();
            for i in chosen {
                need = need + src[i].count;
                targets.extend(&self.assign[i].1);
            }
            targets.sort();
            targets.dedup();
            let have = SymCard::sum(
                dst.iter()
                    .filter(|g| targets.contains(&g.size))
                    .map(|g| g.count),
            );
            need <= have
        })
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.assign.is_empty() {
            return f.write_str("(pinned classes only)");
        }
        let parts: Vec<String> = self
            .assign
            .iter()
            .map(|(s, ts)| {
                let ts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                format!("size {s} -> {{{}}}", ts.join(", "))
            })
            .collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum SymMove {
    /// An already pinned element; the position does not change.
    Pass,
    /// A new element of the touched class at this index.
    FreshTouched { class: usize },
    /// An element of an untouched class of `size` that the schema sends to
    /// a class of size `target`.
    FreshUntouched { size: SymCard, target: SymCard },
}

impl fmt::Display for SymMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymMove::Pass => f.write_str("a pinned element"),
            SymMove::FreshTouched { class } => write!(f, "a new element of touched class {class}"),
            SymMove::FreshUntouched { size, target } => {
                write!(
                    f,
                    "an element of an untouched class of size {size} (mapped into size {target})"
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymSpoilerNode {
    NoEmbedding { side: Side },
    Refute { side: Side, replies: Vec<SymReply> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymReply {
    pub schema: Schema,
    #[serde(rename = "spoiler_move")]
    pub mv: SymMove,
    pub next: SymSpoilerNode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymStrategyEntry {
    pub position: SymPosition,
    pub rounds: usize,
    pub forward: Schema,
    pub backward: Schema,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "player", rename_all = "snake_case")]
pub enum SymWitness {
    Spoiler { tree: SymSpoilerNode },
    Duplicator { strategy: Vec<SymStrategyEntry> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymGameOutcome {
    pub survives: bool,
    pub rounds: usize,
    pub start: SymPosition,
    pub witness: SymWitness,
    pub positions: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SymConfig {
    pub round_cap: usize,
    pub memo_cap: usize,
}

impl Default for SymConfig {
    fn default() -> Self {
        SymConfig {
            round_cap: SYM_ROUND_CAP,
            memo_cap: SYM_MEMO_CAP,
        }
    }
}

/// Whether some embedding of `left` into `right` sends each mapped pin to
/// its partner.
pub fn sym_embedding_exists(
    left: &SymEqStructure,
    right: &SymEqStructure,
    pin_map: &[(String, String)],
) -> Result<bool> {
    Ok(SymPosition::from_pins(left, right, pin_map)?.embedding_exists(Side::Left))
}

/// Memoized solver over normalized symbolic positions.
#[derive(Default)]
pub struct SymGame {
    memo: HashMap<(SymPosition, usize), bool>,
    memo_cap: usize,
}

impl SymGame {
    pub fn new(memo_cap: usize) -> Self {
        SymGame {
            memo: HashMap::new(),
            memo_cap,
        }
    }

    pub fn positions(&self) -> usize {
        self.memo.len()
    }

    fn answers(&mut self, p: &SymPosition, side: Side, schema: &Schema, n: usize) -> Result<bool> {
        for mv in p.moves(side, schema) {
            if !self.solve(&p.advance(side, &mv), n - 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A schema on `side` that answers every Spoiler move, if any.
    pub fn winning_schema(
        &mut self,
        p: &SymPosition,
        side: Side,
        n: usize,
    ) -> Result<Option<Schema>> {
        for schema in p.schemas(side) {
            if self.answers(p, side, &schema, n)? {
                return Ok(Some(schema));
            }
        }
        Ok(None)
    }

    pub fn solve(&mut self, p: &SymPosition, n: usize) -> Result<bool> {
        if n == 0 {
            return Ok(true);
        }
        let key = (p.clone(), n);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = self.winning_schema(p, Side::Left, n)?.is_some()
            && self.winning_schema(p, Side::Right, n)?.is_some();
        if self.memo.len() >= self.memo_cap {
            return Err(Error::cap("memoized symbolic positions", self.memo_cap));
        }
        self.memo.insert(key, v);
        Ok(v)
    }

    /// A Spoiler move beating `schema` on `side`, if any.
    pub fn refuting_move(
        &mut self,
        p: &SymPosition,
        side: Side,
        schema: &Schema,
        n: usize,
    ) -> Result<Option<SymMove>> {
        for mv in p.moves(side, schema) {
            if !self.solve(&p.advance(side, &mv), n - 1)? {
                return Ok(Some(mv));
            }
        }
        Ok(None)
    }

    pub fn spoiler_tree(&mut self, p: &SymPosition, n: usize) -> Result<SymSpoilerNode> {
        for side in [Side::Left, Side::Right] {
            if p.schemas(side).is_empty() {
                return Ok(SymSpoilerNode::NoEmbedding { side });
            }
        }
        let side = if self.winning_schema(p, Side::Left, n)?.is_none() {
            Side::Left
        } else {
            Side::Right
        };
        let mut replies = Vec::new();
        for schema in p.schemas(side) {
            let mv = self
                .refuting_move(p, side, &schema, n)?
                .expect("losing position has a refutation");
            let next = self.spoiler_tree(&p.advance(side, &mv), n - 1)?;
            replies.push(SymReply { schema, mv, next });
        }
        Ok(SymSpoilerNode::Refute { side, replies })
    }

    pub fn duplicator_strategy(
        &mut self,
        p: &SymPosition,
        n: usize,
    ) -> Result<Vec<SymStrategyEntry>> {
        let mut table: HashMap<SymPosition, usize> = HashMap::new();
        let mut out: Vec<SymStrategyEntry> = Vec::new();
        self.fill(p, n, &mut table, &mut out)?;
        Ok(out)
    }

    fn fill(
        &mut self,
        p: &SymPosition,
        n: usize,
        table: &mut HashMap<SymPosition, usize>,
        out: &mut Vec<SymStrategyEntry>,
    ) -> Result<()> {
        if n == 0 || table.get(p).is_some_and(|&i| out[i].rounds >= n) {
            return Ok(());
        }
        let forward = self
            .winning_schema(p, Side::Left, n)?
            .expect("winning position");
        let backward = self
            .winning_schema(p, Side::Right, n)?
            .expect("winning position");
        let entry = SymStrategyEntry {
            position: p.clone(),
            rounds: n,
            forward: forward.clone(),
            backward: backward.clone(),
        };
        match table.get(p) {
            Some(&i) => out[i] = entry,
            None => {
                table.insert(p.clone(), out.len());
                out.push(entry);
            }
        }
        for (side, schema) in [(Side::Left, forward), (Side::Right, backward)] {
            for mv in p.moves(side, &schema) {
                self.fill(&p.advance(side, &mv), n - 1, table, out)?;
            }
        }
        Ok(())
    }
}

/// Pins present in both structures, paired by id.
fn shared_pins(left: &SymEqStructure, right: &SymEqStructure) -> Result<Vec<(String, String)>> {
    for p in &right.pins {
        left.pin(&p.id)?;
    }
    left.pins
        .iter()
        .map(|p| {
            right.pin(&p.id)?;
            Ok((p.id.clone(), p.id.clone()))
        })
        .collect()
}

pub fn sym_game(left: &SymEqStructure, right: &SymEqStructure, n: usize) -> Result<SymGameOutcome> {
    sym_game_with(left, right, n, SymConfig::default())
}

/// Pins with equal ids start paired.
pub fn sym_game_with(
    left: &SymEqStructure,
    right: &SymEqStructure,
    n: usize,
    cfg: SymConfig,
) -> Result<SymGameOutcome> {
    if n > cfg.round_cap {
        return Err(Error::cap("symbolic game rounds", cfg.round_cap));
    }
    let start = match SymPosition::from_pins(left, right, &shared_pins(left, right)?) {
        Ok(p) => p,
        Err(Error::InconsistentPins(_)) if n > 0 => {
            return Ok(SymGameOutcome {
                survives: false,
                rounds: n,
                start: SymPosition::from_pins(left, right, &[])?,
                witness: SymWitness::Spoiler {
                    tree: SymSpoilerNode::NoEmbedding { side: Side::Left },
                },
                positions: 0,
            })
        }
        Err(e) => return Err(e),
    };
    let mut game = SymGame::new(cfg.memo_cap);
    let survives = game.solve(&start, n)?;
    let witness = if survives {
        SymWitness::Duplicator {
            strategy: game.duplicator_strategy(&start, n)?,
        }
    } else {
        SymWitness::Spoiler {
            tree: game.spoiler_tree(&start, n)?,
        }
    };
    Ok(SymGameOutcome {
        survives,
        rounds: n,
        start,
        witness,
        positions: game.positions(),
    })
}

/// Replays a symbolic witness from its start position through the move rules.
pub fn verify_sym_outcome(outcome: &SymGameOutcome) -> bool {
    match (&outcome.witness, outcome.survives) {
        (SymWitness::Spoiler { tree }, false) => {
            verify_spoiler(&outcome.start, outcome.rounds, tree)
        }
        (SymWitness::Duplicator { strategy }, true) => {
            let table: HashMap<&SymPosition, &SymStrategyEntry> =
                strategy.iter().map(|e| (&e.position, e)).collect();
            verify_duplicator(&table, &outcome.start, outcome.rounds)
        }
        _ => false,
    }
}

fn verify_spoiler(p: &SymPosition, n: usize, node: &SymSpoilerNode) -> bool {
    if n == 0 {
        return false;
    }
    match node {
        SymSpoilerNode::NoEmbedding { side } => p.schemas(*side).is_empty(),
        SymSpoilerNode::Refute { side, replies } => p.schemas(*side).iter().all(|schema| {
            replies.iter().any(|r| {
                &r.schema == schema
                    && p.moves(*side, schema).contains(&r.mv)
                    && verify_spoiler(&p.advance(*side, &r.mv), n - 1, &r.next)
            })
        }),
    }
}

fn verify_duplicator(
    table: &HashMap<&SymPosition, &SymStrategyEntry>,
    p: &SymPosition,
    n: usize,
) -> bool {
    if n == 0 {
        return true;
    }
    let Some(e) = table.get(p) else {
        return false;
    };
    if e.rounds < n {
        return false;
    }
    [(Side::Left, &e.forward), (Side::Right, &e.backward)]
        .into_iter()
        .all(|(side, schema)| {
            p.schemas(side).contains(schema)
                && p.moves(side, schema)
                    .iter()
                    .all(|mv| verify_duplicator(table, &p.advance(side, mv), n - 1))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use SymCard::*;

    fn e0() -> SymEqStructure {
        SymEqStructure::parse_profile("(aleph1 x aleph0)").unwrap()
    }

    fn e1() -> SymEqStructure {
        SymEqStructure::parse_profile("(aleph1 x aleph0),(aleph0 x 1)").unwrap()
    }

    #[test]
    fn card_arithmetic() {
        assert!(Finite(7) < Aleph0 && Aleph0 < Aleph1);
        assert_eq!(Aleph0 + Finite(3), Aleph0);
        assert_eq!(Aleph0 + Aleph1, Aleph1);
        assert_eq!(Finite(2) + Finite(3), Finite(5));
        assert_eq!(Aleph1.sub_finite(5), Some(Aleph1));
        assert_eq!(Finite(2).sub_finite(3), None);
        assert_eq!("aleph0".parse::<SymCard>().unwrap(), Aleph0);
        assert!("aleph2".parse::<SymCard>().is_err());
        let json = serde_json::to_string(&vec![Finite(3), Aleph1]).unwrap();
        assert_eq!(json, r#"[3,"aleph1"]"#);
        assert_eq!(
            serde_json::from_str::<Vec<SymCard>>(&json).unwrap(),
            vec![Finite(3), Aleph1]
        );
    }

    #[test]
    fn profile_parsing() {
        let e = e1();
        assert_eq!(
            e.profile,
            vec![
                ClassGroup {
                    size: Aleph1,
                    count: Aleph0
                },
                ClassGroup {
                    size: Aleph0,
                    count: Finite(1)
                },
            ]
        );
        assert_eq!(e.to_string(), "(aleph1 x aleph0),(aleph0 x 1)");
        assert_eq!(
            SymEqStructure::parse_profile("(2 x 3)").unwrap().profile[0].count,
            Finite(3)
        );
        assert!(SymEqStructure::parse_profile("(0 x 3)").is_err());
        assert!(SymEqStructure::parse_profile("(2 x 3),").is_err());
        assert!(SymEqStructure::parse_profile("2 x 3").is_err());
    }

    #[test]
    fn hierarchy_example_embeddings() {
        assert!(sym_embedding_exists(&e0(), &e1(), &[]).unwrap());
        assert!(sym_embedding_exists(&e1(), &e0(), &[]).unwrap());
        let left = e0().with_pin("a", 0, 0, 0).unwrap();
        let right = e1().with_pin("a", 1, 0, 0).unwrap();
        let pin = [("a".to_string(), "a".to_string())];
        assert!(!sym_embedding_exists(&left, &right, &pin).unwrap());
        assert!(sym_embedding_exists(&right, &left, &pin).unwrap());
    }

    #[test]
    fn hierarchy_example_game() {
        let one = sym_game(&e0(), &e1(), 1).unwrap();
        assert!(one.survives);
        assert!(verify_sym_outcome(&one));
        let two = sym_game(&e0(), &e1(), 2).unwrap();
        assert!(!two.survives);
        assert!(verify_sym_outcome(&two));
        let SymWitness::Spoiler {
            tree: SymSpoilerNode::Refute { side, replies },
        } = &two.witness
        else {
            panic!("expected a refutation, got {:?}", two.witness);
        };
        assert_eq!(*side, Side::Right);
        assert_eq!(
            replies[0].mv,
            SymMove::FreshUntouched {
                size: Aleph0,
                target: Aleph1
            }
        );
        assert_eq!(
            replies[0].next,
            SymSpoilerNode::NoEmbedding { side: Side::Left }
        );
    }

    #[test]
    fn identical_profiles_survive() {
        for text in [
            "(aleph1 x aleph0),(aleph0 x 1)",
            "(2 x 3),(aleph0 x aleph0)",
            "(1 x 2)",
        ] {
            let e = SymEqStructure::parse_profile(text).unwrap();
            for n in 0..=SYM_ROUND_CAP {
                let out = sym_game(&e, &e, n).unwrap();
                assert!(out.survives, "{text} at {n}");
                assert!(verify_sym_outcome(&out));
            }
        }
        assert!(sym_game(&e0(), &e0(), 5).unwrap_err().is_cap());
    }

    #[test]
    fn inconsistent_pins() {
        let left = SymEqStructure::parse_profile("(2 x 1)")
            .unwrap()
            .with_pin("a", 0, 0, 0)
            .unwrap()
            .with_pin("b", 0, 0, 1)
            .unwrap();
        let right = SymEqStructure::parse_profile("(2 x 2)")
            .unwrap()
            .with_pin("a", 0, 0, 0)
            .unwrap()
            .with_pin("b", 0, 1, 0)
            .unwrap();
        let pins = [("a".into(), "a".into()), ("b".into(), "b".into())];
        assert!(matches!(
            sym_embedding_exists(&left, &right, &pins),
            Err(Error::InconsistentPins(_))
        ));
        assert!(!sym_game(&left, &right, 1).unwrap().survives);
        assert!(SymEqStructure::parse_profile("(2 x 1)")
            .unwrap()
            .with_pin("a", 0, 1, 0)
            .is_err());
        assert!(SymEqStructure::parse_profile("(2 x 1)")
            .unwrap()
            .with_pin("a", 0, 0, 2)
            .is_err());
    }

    #[test]
    fn materialization() {
        let e = SymEqStructure::parse_profile("(2 x 2),(1 x 1)")
            .unwrap()
            .with_pin("p", 1, 0, 0)
            .unwrap();
        let (s, pins) = e.materialize().unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(pins["p"], "2.0");
        assert!(e1().materialize().is_none());
    }
}
