use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{GraphRegister, LocalClifford, VertexId};
use crate::statevec::Pauli;

type Adjacency = BTreeMap<VertexId, BTreeSet<VertexId>>;

/// Largest number of removable vertices searched exhaustively.
const BRUTE_FORCE_LIMIT: usize = 16;

/// One measurement of a pruning prelude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PreludeStep {
    pub vertex: VertexId,
    pub basis: Pauli,
}

/// Local Cliffords applied while running a prelude, in order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PreludeRecord {
    pub outcomes: Vec<u8>,
    pub applied: Vec<(VertexId, LocalClifford)>,
}

fn adjacency(rows: usize, cols: usize) -> Adjacency {
    let g = GraphRegister::cluster(rows, cols);
    g.vertices().map(|v| (v, g.neighbours(v).expect("live vertex").clone())).collect()
}

fn edge_set(adj: &Adjacency) -> BTreeSet<(VertexId, VertexId)> {
    adj.iter().flat_map(|(&a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b))).collect()
}

/// The graph left by a prelude when every vertex operator is kept at
/// identity: `Z` deletes a vertex, `Y` complements its neighbourhood and
/// then deletes it.
fn simulate(mut adj: Adjacency, prelude: &[PreludeStep]) -> Adjacency {
    for step in prelude {
        let nbrs = adj.remove(&step.vertex).unwrap_or_default();
        for n in &nbrs {
            adj.get_mut(n).expect("symmetric adjacency").remove(&step.vertex);
        }
        if step.basis == Pauli::Y {
            let list: Vec<_> = nbrs.into_iter().collect();
            for (i, &a) in list.iter().enumerate() {
                for &b in &list[i + 1..] {
                    let has = adj[&a].contains(&b);
                    for (p, q) in [(a, b), (b, a)] {
                        let set = adj.get_mut(&p).expect("live vertex");
                        if has {
                            set.remove(&q);
                        } else {
                            set.insert(q);
                        }
                    }
                }
            }
        }
    }
    adj
}

fn path_strategy(
    adj: &Adjacency,
    keep: &BTreeSet<VertexId>,
    targets: &BTreeSet<(VertexId, VertexId)>,
) -> Option<Vec<PreludeStep>> {
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    let mut paths = Vec::new();
    for &(u, v) in targets {
        if adj[&u].contains(&v) {
            continue;
        }
        let usable = |w: VertexId, used: &BTreeSet<VertexId>| {
            !keep.contains(&w)
                && !used.contains(&w)
                && adj[&w].iter().all(|n| !keep.contains(n) || *n == u || *n == v)
                && adj[&w].iter().all(|n| !used.contains(n))
        };
        let mut prev: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut queue = VecDeque::from([u]);
        let mut found = false;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[&x] {
                if y == v && x != u {
                    prev.insert(v, x);
                    found = true;
                    break;
                }
                if !prev.contains_key(&y) && y != u && usable(y, &used) {
                    prev.insert(y, x);
                    queue.push_back(y);
                }
            }
            if found {
                break;
            }
        }
        if !found {
            return None;
        }
        let mut interior = Vec::new();
        let mut at = prev[&v];
        while at != u {
            interior.push(at);
            at = prev[&at];
        }
        interior.reverse();
        used.extend(&interior);
        paths.push(interior);
    }
    let mut prelude: Vec<PreludeStep> = adj
        .keys()
        .filter(|w| !keep.contains(w) && !used.contains(w))
        .map(|&vertex| PreludeStep { vertex, basis: Pauli::Z })
        .collect();
    prelude.extend(paths.into_iter().flatten().map(|vertex| PreludeStep { vertex, basis: Pauli::Y }));
    Some(prelude)
}

/// Pauli measurements that carve a `rows x cols` cluster down to `keep`
/// with exactly `target_edges` among the kept vertices.
///
/// Each missing edge is routed along a path of removed vertices measured in
/// `Y`; all other removed vertices are measured in `Z` first. When that
/// fails and at most sixteen vertices are removed, every `Z`/`Y` assignment
/// is tried.
pub fn prune_cluster(
    rows: usize,
    cols: usize,
    keep: &[VertexId],
    target_edges: &[(VertexId, VertexId)],
) -> Result<Vec<PreludeStep>> {
    let unembeddable = |reason: String| Error::Unembeddable { rows, cols, reason };
    let adj = adjacency(rows, cols);
    let keep: BTreeSet<VertexId> = keep.iter().copied().collect();
    if let Some(v) = keep.iter().find(|v| !adj.contains_key(v)) {
        return Err(unembeddable(format!("vertex {v} is outside the cluster")));
    }
    let mut targets = BTreeSet::new();
    for &(a, b) in target_edges {
        if a == b || !keep.contains(&a) || !keep.contains(&b) {
            return Err(unembeddable(format!("edge ({a}, {b}) must join two distinct kept vertices")));
        }
        targets.insert((a.min(b), a.max(b)));
    }
    let achieves = |prelude: &[PreludeStep]| edge_set(&simulate(adj.clone(), prelude)) == targets;
    if let Some(prelude) = path_strategy(&adj, &keep, &targets) {
        if achieves(&prelude) {
            return Ok(prelude);
        }
    }
    let removable: Vec<VertexId> = adj.keys().copied().filter(|v| !keep.contains(v)).collect();
    if removable.len() > BRUTE_FORCE_LIMIT {
        return Err(unembeddable(format!("no path routing found and {} removable vertices is too many to search", removable.len())));
    }
    for mask in 0u32..1 << removable.len() {
        let (ys, zs): (Vec<_>, Vec<_>) = removable.iter().enumerate().partition(|(i, _)| (mask >> i) & 1 == 1);
        let prelude: Vec<PreludeStep> = zs
            .into_iter()
            .map(|(_, &vertex)| PreludeStep { vertex, basis: Pauli::Z })
            .chain(ys.into_iter().map(|(_, &vertex)| PreludeStep { vertex, basis: Pauli::Y }))
            .collect();
        if achieves(&prelude) {
            return Ok(prelude);
        }
    }
    Err(unembeddable("no Z/Y assignment of the removed vertices yields the target graph".into()))
}

/// Runs a prelude on `register`. After each measurement the neighbours'
/// vertex operators are reset to identity and the resets recorded, so the
/// surviving graph is exactly the one `prune_cluster` predicted.
pub fn apply_prelude<R: Rng + ?Sized>(
    register: &mut GraphRegister,
    prelude: &[PreludeStep],
    rng: &mut R,
) -> Result<PreludeRecord> {
    let mut record = PreludeRecord::default();
    for step in prelude {
        let nbrs: Vec<VertexId> = register.neighbours(step.vertex)?.iter().copied().collect();
        for v in std::iter::once(step.vertex).chain(nbrs.iter().copied()) {
            normalise(register, v, &mut record)?;
        }
        record.outcomes.push(register.measure_pauli(step.vertex, step.basis, rng)?);
        for &v in &nbrs {
            normalise(register, v, &mut record)?;
        }
    }
    Ok(record)
}

fn normalise(register: &mut GraphRegister, v: VertexId, record: &mut PreludeRecord) -> Result<()> {
    let undo = register.vop(v)?.inverse();
    if undo != LocalClifford::IDENTITY {
        register.apply_local_clifford(v, undo)?;
        record.applied.push((v, undo));
    }
    Ok(())
}
