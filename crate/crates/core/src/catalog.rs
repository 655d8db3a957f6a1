//! Named structures: the finite homogeneous graphs, paths and cycles, the
//! parity chain used for the equicardinality example, and finite equivalence
//! structures.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::structure::{Structure, Vocabulary};

pub const NAMES: &[&str] = &[
    "complete",
    "ImKn",
    "pentagon",
    "k3xk3",
    "path",
    "haertig_chain",
    "cycle",
    "equiv_classes",
];

fn graph_on(ids: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Structure {
    let mut s = Structure::new(Vocabulary::graph(), ids).expect("distinct ids");
    for (a, b) in edges {
        s.add_idx("E", &[a, b]).unwrap();
        s.add_idx("E", &[b, a]).unwrap();
    }
    s
}

fn numbered_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// K_n.
pub fn complete(n: usize) -> Structure {
    let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
    graph_on(numbered_ids(n), edges)
}

/// m disjoint copies of K_n; element `c.v` is vertex v of copy c.
pub fn im_kn(m: usize, n: usize) -> Structure {
    let ids = (0..m)
        .flat_map(|c| (0..n).map(move |v| format!("{c}.{v}")))
        .collect();
    let edges = (0..m)
        .flat_map(|c| (0..n).flat_map(move |a| (a + 1..n).map(move |b| (c * n + a, c * n + b))));
    graph_on(ids, edges)
}

/// The 5-cycle: i ~ j iff |i - j| is 1 or 4.
pub fn pentagon() -> Structure {
    cycle(5)
}

/// The rook's graph on a 3x3 board: same row or same column.
pub fn k3xk3() -> Structure {
    let ids = (0..3)
        .flat_map(|r| (0..3).map(move |c| format!("r{r}c{c}")))
        .collect();
    let mut edges = Vec::new();
    for a in 0..9 {
        for b in a + 1..9 {
            if a / 3 == b / 3 || a % 3 == b % 3 {
                edges.push((a, b));
            }
        }
    }
    graph_on(ids, edges)
}

/// Path on n vertices 0 - 1 - ... - (n-1).
pub fn path(n: usize) -> Structure {
    graph_on(numbered_ids(n), (1..n).map(|i| (i - 1, i)))
}

/// Cycle on n vertices; for n < 3 this degenerates to a path.
pub fn cycle(n: usize) -> Structure {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    if n >= 3 {
        edges.push((n - 1, 0));
    }
    graph_on(numbered_ids(n), edges)
}

pub fn unary_pair() -> Vocabulary {
    Vocabulary::new([("U", 1), ("V", 1)]).unwrap()
}

/// A_i = ({0..i}, U = evens, V = odds).
pub fn haertig_chain(i: usize) -> Structure {
    let mut s = Structure::numbered(unary_pair(), i + 1).unwrap();
    for e in 0..=i {
        let rel = if e % 2 == 0 { "U" } else { "V" };
        s.add_idx(rel, &[e]).unwrap();
    }
    s
}

/// Reflexive equivalence relation with one class per entry of `sizes`;
/// element `k.j` is member j of class k.
pub fn equiv_classes(sizes: &[usize]) -> Structure {
    let ids = sizes
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| (0..n).map(move |j| format!("{k}.{j}")))
        .collect();
    let mut s = Structure::new(Vocabulary::graph(), ids).unwrap();
    let mut start = 0;
    for &n in sizes {
        for a in start..start + n {
            for b in start..start + n {
                s.add_idx("E", &[a, b]).unwrap();
            }
        }
        start += n;
    }
    s
}

fn param(params: &Map<String, Value>, key: &str) -> Result<usize> {
    let v = params
        .get(key)
        .ok_or_else(|| Error::InvalidParams(format!("missing parameter `{key}`")))?;
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::InvalidParams(format!("`{key}` must be a natural number, got {v}")))
}

fn check_keys(params: &Map<String, Value>, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::InvalidParams(format!("unexpected parameter `{k}`"))),
        None => Ok(()),
    }
}

/// Build a catalog structure by name.
pub fn catalog_generate(name: &str, params: &Map<String, Value>) -> Result<Structure> {
    let (keys, build): (&[&str], fn(&Map<String, Value>) -> Result<Structure>) = match name {
        "complete" => (&["n"], |p| Ok(complete(param(p, "n")?))),
        "ImKn" => (&["m", "n"], |p| Ok(im_kn(param(p, "m")?, param(p, "n")?))),
        "pentagon" => (&[], |_| Ok(pentagon())),
        "k3xk3" => (&[], |_| Ok(k3xk3())),
        "path" => (&["n"], |p| Ok(path(param(p, "n")?))),
        "cycle" => (&["n"], |p| Ok(cycle(param(p, "n")?))),
        "haertig_chain" => (&["i"], |p| Ok(haertig_chain(param(p, "i")?))),
        "equiv_classes" => (&["sizes"], |p| {
            let sizes = p
                .get("sizes")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidParams("`sizes` must be an array".into()))?
                .iter()
                .map(|v| {
                    v.as_u64().map(|n| n as usize).ok_or_else(|| {
                        Error::InvalidParams(format!(
                            "class size must be a natural number, got {v}"
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(equiv_classes(&sizes))
        }),
        other => return Err(Error::UnknownCatalog(other.to_string())),
    };
    check_keys(params, keys)?;
    build(params)
}
