use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;

use super::clifford::{reduction_word, LocalClifford};
use super::VertexId;
use crate::erasure::ParityPhase;
use crate::error::{Error, Result};
use crate::statevec::gates::{Pauli, ZERO};
use crate::statevec::{PureState, MAX_PURE_QUBITS};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Node {
    vop: LocalClifford,
    nbrs: BTreeSet<VertexId>,
}

/// A graph state with local Clifford corrections.
///
/// The represented state is `(⊗_v VOp_v) · (∏_{edges} CZ) · |+...+>`.
/// Vertex ids are handed out in increasing order and never reused.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphRegister {
    nodes: BTreeMap<VertexId, Node>,
    next_id: VertexId,
}

/// The Pauli part of a vertex operator, present when the operator is itself
/// a Pauli: the vertex carries `X^x Z^z` on top of the bare graph state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PauliByproduct {
    pub x: bool,
    pub z: bool,
}

impl GraphRegister {
    pub fn new() -> Self {
        Self::default()
    }

    /// A register with vertices `0..num_vertices` and the given edges.
    pub fn from_edges(num_vertices: u32, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut g = Self::new();
        for _ in 0..num_vertices {
            g.new_vertex();
        }
        for &(a, b) in edges {
            g.toggle_edge(a, b)?;
        }
        Ok(g)
    }

    /// A `rows x cols` square-lattice cluster; vertex `r * cols + c` sits at
    /// row `r`, column `c`.
    pub fn cluster(rows: usize, cols: usize) -> Self {
        let mut g = Self::new();
        for _ in 0..rows * cols {
            g.new_vertex();
        }
        for r in 0..rows {
            for c in 0..cols {
                let v = (r * cols + c) as VertexId;
                if c + 1 < cols {
                    g.toggle_edge(v, v + 1).expect("fresh vertices");
                }
                if r + 1 < rows {
                    g.toggle_edge(v, v + cols as VertexId).expect("fresh vertices");
                }
            }
        }
        g
    }

    /// Adds a vertex in `|+>` with no edges.
    pub fn new_vertex(&mut self) -> VertexId {
        let v = self.next_id;
        self.next_id += 1;
        self.nodes.insert(v, Node::default());
        v
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.nodes.contains_key(&v)
    }

    /// Live vertices in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.nodes.keys().copied()
    }

    /// The id the next call to [`new_vertex`](Self::new_vertex) will return.
    pub fn next_id(&self) -> VertexId {
        self.next_id
    }

    pub fn neighbours(&self, v: VertexId) -> Result<&BTreeSet<VertexId>> {
        self.node(v).map(|n| &n.nbrs)
    }

    pub fn degree(&self, v: VertexId) -> Result<usize> {
        self.neighbours(v).map(BTreeSet::len)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.nodes.get(&a).is_some_and(|n| n.nbrs.contains(&b))
    }

    pub fn num_edges(&self) -> usize {
        self.nodes.values().map(|n| n.nbrs.len()).sum::<usize>() / 2
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        self.nodes
            .iter()
            .flat_map(|(&a, n)| n.nbrs.range(a + 1..).map(move |&b| (a, b)))
            .collect()
    }

    pub fn vop(&self, v: VertexId) -> Result<LocalClifford> {
        self.node(v).map(|n| n.vop)
    }

    /// The Pauli byproduct carried by `v`, or `None` if its vertex operator
    /// is not a Pauli.
    pub fn pauli_byproduct(&self, v: VertexId) -> Result<Option<PauliByproduct>> {
        Ok(self.vop(v)?.as_pauli().map(|(x, z)| PauliByproduct { x, z }))
    }

    /// Applies `c` to vertex `v` after its current operator.
    pub fn apply_local_clifford(&mut self, v: VertexId, c: LocalClifford) -> Result<()> {
        let node = self.node_mut(v)?;
        node.vop = c * node.vop;
        Ok(())
    }

    /// Local complementation at `v`. The represented state is unchanged: the
    /// neighbourhood of `v` is complemented and the vertex operators absorb
    /// the compensating local Cliffords.
    pub fn local_complement(&mut self, v: VertexId) -> Result<()> {
        let nbrs: Vec<VertexId> = self.neighbours(v)?.iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                self.toggle_edge(a, b)?;
            }
        }
        let undo_x = LocalClifford::sqrt_x().inverse();
        let undo_z = LocalClifford::sqrt_z().inverse();
        let node = self.node_mut(v)?;
        node.vop = node.vop * undo_x;
        for b in nbrs {
            let node = self.node_mut(b)?;
            node.vop = node.vop * undo_z;
        }
        Ok(())
    }

    /// Applies control-phase between `a` and `b`.
    pub fn add_cz(&mut self, a: VertexId, b: VertexId) -> Result<()> {
        if a == b {
            return Err(Error::IndexCollision(a as usize));
        }
        self.node(a)?;
        self.node(b)?;
        if self.vop(a)?.is_diagonal() && self.vop(b)?.is_diagonal() {
            return self.toggle_edge(a, b);
        }
        if self.has_other_neighbour(a, b) {
            self.reduce_vop(a, b)?;
        }
        if self.has_other_neighbour(b, a) {
            self.reduce_vop(b, a)?;
        }
        if self.has_other_neighbour(a, b) && !self.vop(a)?.is_diagonal() {
            self.reduce_vop(a, b)?;
        }
        let key = CzKey {
            edge: self.has_edge(a, b),
            va: self.vop(a)?,
            vb: self.vop(b)?,
            pinned_a: self.has_other_neighbour(a, b),
            pinned_b: self.has_other_neighbour(b, a),
        };
        let out = *cz_table().get(&key).unwrap_or_else(|| panic!("no control-phase rule for {key:?}"));
        if out.edge != key.edge {
            self.toggle_edge(a, b)?;
        }
        self.node_mut(a)?.vop = out.va;
        self.node_mut(b)?.vop = out.vb;
        Ok(())
    }

    /// Measures `v` in the Pauli basis `axis` and removes it. Outcome 0 is
    /// the +1 eigenvalue.
    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, v: VertexId, axis: Pauli, rng: &mut R) -> Result<u8> {
        self.measure_with(v, axis, |det| Ok(det.unwrap_or_else(|| rng.random_bool(0.5) as u8)))
            .map(|(m, _)| m)
    }

    /// Post-selects `outcome` and returns its probability (1/2 or 1).
    /// Fails without touching the register if the outcome is impossible.
    pub fn measure_pauli_forced(&mut self, v: VertexId, axis: Pauli, outcome: u8) -> Result<f64> {
        self.measure_with(v, axis, |det| match det {
            Some(d) if d != outcome => Err(Error::ZeroProbability { outcome }),
            _ => Ok(outcome),
        })
        .map(|(_, p)| p)
    }

    /// True if measuring `axis` on `v` has a predetermined outcome.
    pub fn is_deterministic(&self, v: VertexId, axis: Pauli) -> Result<bool> {
        let mut probe = self.clone();
        probe.measure_with(v, axis, |det| Ok(det.unwrap_or(0))).map(|(_, p)| p == 1.0)
    }

    fn measure_with(
        &mut self,
        v: VertexId,
        axis: Pauli,
        choose: impl FnOnce(Option<u8>) -> Result<u8>,
    ) -> Result<(u8, f64)> {
        loop {
            let (effective, negative) = self.vop(v)?.conjugate_pauli(axis);
            match effective {
                Pauli::Z => {
                    let outcome = choose(None)?;
                    if outcome ^ negative as u8 == 1 {
                        let z = LocalClifford::pauli(Pauli::Z);
                        for b in self.neighbours(v)?.clone() {
                            let node = self.node_mut(b)?;
                            node.vop = node.vop * z;
                        }
                    }
                    self.remove_vertex(v);
                    return Ok((outcome, 0.5));
                }
                Pauli::Y => self.local_complement(v)?,
                Pauli::X => match self.neighbours(v)?.first().copied() {
                    Some(w) => self.local_complement(w)?,
                    None => {
                        let outcome = choose(Some(negative as u8))?;
                        self.remove_vertex(v);
                        return Ok((outcome, 1.0));
                    }
                },
            }
        }
    }

    /// Applies `|10><10| + p|01><01|` to `(a, b)` and renormalises; returns
    /// the odd-parity probability. An even-parity state yields
    /// [`Error::ZeroNorm`] and is left as it was.
    pub fn parity_project(&mut self, a: VertexId, b: VertexId, phase: ParityPhase) -> Result<f64> {
        if a == b {
            return Err(Error::IndexCollision(a as usize));
        }
        self.node(a)?;
        self.node(b)?;
        let ancilla = self.new_vertex();
        self.add_cz(ancilla, a)?;
        self.add_cz(ancilla, b)?;
        match self.measure_pauli_forced(ancilla, Pauli::X, 1) {
            Ok(p) => {
                self.apply_local_clifford(b, phase.clifford())?;
                Ok(p)
            }
            Err(Error::ZeroProbability { .. }) => {
                self.measure_pauli_forced(ancilla, Pauli::X, 0)?;
                Err(Error::ZeroNorm)
            }
            Err(e) => Err(e),
        }
    }

    /// Dense state with qubit `k` holding the `k`-th smallest live vertex.
    pub fn to_dense(&self) -> Result<PureState> {
        let n = self.nodes.len();
        if n > MAX_PURE_QUBITS {
            return Err(Error::SizeLimit { requested: n, limit: MAX_PURE_QUBITS });
        }
        let pos: HashMap<VertexId, usize> = self.vertices().enumerate().map(|(i, v)| (v, i)).collect();
        let edge_masks: Vec<usize> = self.edges().iter().map(|(a, b)| (1 << pos[a]) | (1 << pos[b])).collect();
        let amp = (0.5f64).powf(n as f64 / 2.0);
        let amps = (0..1usize << n)
            .map(|x| {
                let odd = edge_masks.iter().filter(|&&m| x & m == m).count() % 2 == 1;
                Complex64::new(if odd { -amp } else { amp }, 0.0)
            })
            .collect();
        let mut psi = PureState::from_amplitudes(amps)?;
        for (v, node) in &self.nodes {
            if node.vop != LocalClifford::IDENTITY {
                psi.apply_1q_unchecked(pos[v], &node.vop.matrix());
            }
        }
        Ok(psi)
    }

    /// One `a b` line per edge (`a < b`), sorted.
    pub fn export_adjacency(&self) -> String {
        self.edges().iter().fold(String::new(), |mut s, (a, b)| {
            let _ = writeln!(s, "{a} {b}");
            s
        })
    }

    /// Graphviz listing: every vertex, then every edge, both ascending.
    pub fn export_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        for v in self.vertices() {
            let _ = writeln!(s, "  {v};");
        }
        for (a, b) in self.edges() {
            let _ = writeln!(s, "  {a} -- {b};");
        }
        s.push_str("}\n");
        s
    }

    /// Removes `v` without measuring it. Only sound when `v` is known to be
    /// disentangled; callers in this crate use it after a measurement.
    fn remove_vertex(&mut self, v: VertexId) {
        if let Some(node) = self.nodes.remove(&v) {
            for b in node.nbrs {
                if let Some(n) = self.nodes.get_mut(&b) {
                    n.nbrs.remove(&v);
                }
            }
        }
    }

    fn toggle_edge(&mut self, a: VertexId, b: VertexId) -> Result<()> {
        if a == b {
            return Err(Error::IndexCollision(a as usize));
        }
        self.node(b)?;
        let na = self.node_mut(a)?;
        let added = na.nbrs.insert(b);
        if !added {
            na.nbrs.remove(&b);
        }
        let nb = self.node_mut(b)?;
        if added {
            nb.nbrs.insert(a);
        } else {
            nb.nbrs.remove(&a);
        }
        Ok(())
    }

    fn has_other_neighbour(&self, v: VertexId, partner: VertexId) -> bool {
        self.nodes[&v].nbrs.iter().any(|&w| w != partner)
    }

    /// Drives `VOp_v` to a diagonal element using local complementations on
    /// `v` and on one neighbour other than `avoid`.
    fn reduce_vop(&mut self, v: VertexId, avoid: VertexId) -> Result<()> {
        let helper = *self.nodes[&v].nbrs.iter().find(|&&w| w != avoid).expect("caller checked");
        for &on_self in reduction_word(self.vop(v)?) {
            self.local_complement(if on_self { v } else { helper })?;
        }
        Ok(())
    }

    fn node(&self, v: VertexId) -> Result<&Node> {
        self.nodes.get(&v).ok_or(Error::DeadVertex(v))
    }

    fn node_mut(&mut self, v: VertexId) -> Result<&mut Node> {
        self.nodes.get_mut(&v).ok_or(Error::DeadVertex(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CzKey {
    edge: bool,
    va: LocalClifford,
    vb: LocalClifford,
    /// The vertex has neighbours besides its partner, so its new operator
    /// must stay diagonal to commute past those edges.
    pinned_a: bool,
    pinned_b: bool,
}

#[derive(Debug, Clone, Copy)]
struct CzOut {
    edge: bool,
    va: LocalClifford,
    vb: LocalClifford,
}

type Ket2 = [Complex64; 4];

/// `(Va ⊗ Vb) CZ^edge |++>` with index `2 * x_a + x_b`.
fn pair_state(edge: bool, va: LocalClifford, vb: LocalClifford) -> Ket2 {
    let (ma, mb) = (va.matrix(), vb.matrix());
    let base = |k: usize, l: usize| {
        let s = if edge && k == 1 && l == 1 { -0.5 } else { 0.5 };
        Complex64::new(s, 0.0)
    };
    let mut out = [ZERO; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + j] += ma[i][k] * mb[j][l] * base(k, l);
                }
            }
        }
    }
    out
}

fn cz_table() -> &'static HashMap<CzKey, CzOut> {
    static TABLE: OnceLock<HashMap<CzKey, CzOut>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut candidates = Vec::with_capacity(2 * 24 * 24);
        for edge in [false, true] {
            for va in LocalClifford::all() {
                for vb in LocalClifford::all() {
                    candidates.push((CzOut { edge, va, vb }, pair_state(edge, va, vb)));
                }
            }
        }
        let mut table = HashMap::new();
        for (input, ket) in &candidates {
            let mut target = *ket;
            target[3] = -target[3];
            for (pinned_a, pinned_b) in [(false, false), (true, false), (false, true), (true, true)] {
                if (pinned_a && !input.va.is_diagonal()) || (pinned_b && !input.vb.is_diagonal()) {
                    continue;
                }
                let found = candidates.iter().find(|(c, k)| {
                    (!pinned_a || c.va.is_diagonal())
                        && (!pinned_b || c.vb.is_diagonal())
                        && k.iter().zip(&target).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm() > 1.0 - 1e-9
                });
                if let Some((out, _)) = found {
                    let key = CzKey { edge: input.edge, va: input.va, vb: input.vb, pinned_a, pinned_b };
                    table.insert(key, *out);
                }
            }
        }
        table
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::gates::ONE;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus_pair_with_edge() -> PureState {
        PureState::from_labels(&[("00", ONE), ("01", ONE), ("10", ONE), ("11", -ONE)]).unwrap()
    }

    #[test]
    fn fresh_vertices() {
        let mut g = GraphRegister::new();
        assert_eq!(g.to_dense().unwrap().amplitudes(), &[ONE]);
        let v = g.new_vertex();
        assert_eq!((g.len(), g.num_edges()), (1, 0));
        assert!(g.to_dense().unwrap().equal_up_to_global_phase(&PureState::init_plus(1).unwrap(), 1e-12).unwrap());
        g.new_vertex();
        assert!(g.to_dense().unwrap().equal_up_to_global_phase(&PureState::init_plus(2).unwrap(), 1e-12).unwrap());
        assert_eq!(v, 0);
    }

    #[test]
    fn cz_toggles_an_edge() {
        let mut g = GraphRegister::new();
        let (a, b) = (g.new_vertex(), g.new_vertex());
        g.add_cz(a, b).unwrap();
        assert!(g.has_edge(a, b));
        assert!(g.to_dense().unwrap().equal_up_to_global_phase(&plus_pair_with_edge(), 1e-12).unwrap());
        assert_eq!(g.export_adjacency(), "0 1\n");
        g.add_cz(a, b).unwrap();
        assert_eq!(g.num_edges(), 0);
        assert_eq!(g.add_cz(a, a), Err(Error::IndexCollision(0)));
        assert_eq!(g.add_cz(a, 9), Err(Error::DeadVertex(9)));
    }

    #[test]
    fn hadamard_on_fresh_vertex_gives_zero() {
        let mut g = GraphRegister::new();
        let v = g.new_vertex();
        g.apply_local_clifford(v, LocalClifford::hadamard()).unwrap();
        assert!(g.to_dense().unwrap().equal_up_to_global_phase(&PureState::zero(1).unwrap(), 1e-12).unwrap());
        let before = g.clone();
        g.apply_local_clifford(v, LocalClifford::IDENTITY).unwrap();
        assert_eq!(g, before);
    }

    #[test]
    fn local_complement_preserves_state() {
        let mut g = GraphRegister::cluster(2, 3);
        let before = g.to_dense().unwrap();
        g.local_complement(1).unwrap();
        assert!(g.has_edge(0, 2) && g.has_edge(0, 4) && g.has_edge(2, 4));
        assert!(g.to_dense().unwrap().equal_up_to_global_phase(&before, 1e-12).unwrap());
    }

    #[test]
    fn chain_middle_z_measurement_disconnects() {
        let mut g = GraphRegister::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        g.measure_pauli_forced(1, Pauli::Z, 0).unwrap();
        assert_eq!(g.vertices().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(g.num_edges(), 0);
        assert!(g.to_dense().unwrap().equal_up_to_global_phase(&PureState::init_plus(2).unwrap(), 1e-12).unwrap());
    }

    #[test]
    fn chain_middle_y_measurement_connects() {
        for outcome in 0..2 {
            let mut g = GraphRegister::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
            g.measure_pauli_forced(1, Pauli::Y, outcome).unwrap();
            assert!(g.has_edge(0, 2));
        }
    }

    #[test]
    fn isolated_x_is_deterministic() {
        let mut g = GraphRegister::new();
        let v = g.new_vertex();
        assert!(g.is_deterministic(v, Pauli::X).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(g.clone().measure_pauli(v, Pauli::X, &mut rng).unwrap(), 0);
        assert_eq!(g.measure_pauli_forced(v, Pauli::X, 1), Err(Error::ZeroProbability { outcome: 1 }));
        assert!(g.contains(v));
    }

    #[test]
    fn parity_projection_of_plus_pair() {
        let mut g = GraphRegister::new();
        let (a, b) = (g.new_vertex(), g.new_vertex());
        let p = g.parity_project(a, b, ParityPhase::MinusI).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        // qubit 0 = a, qubit 1 = b; label order is (b, a)
        let expected = PureState::from_labels(&[("01", ONE), ("10", -Complex64::i())]).unwrap();
        assert!(g.to_dense().unwrap().equal_up_to_global_phase(&expected, 1e-12).unwrap());
    }

    #[test]
    fn parity_projection_of_even_state_fails_cleanly() {
        let mut g = GraphRegister::new();
        let (a, b) = (g.new_vertex(), g.new_vertex());
        g.apply_local_clifford(a, LocalClifford::hadamard()).unwrap();
        g.apply_local_clifford(b, LocalClifford::hadamard()).unwrap();
        let before = g.to_dense().unwrap();
        assert_eq!(g.parity_project(a, b, ParityPhase::PlusI), Err(Error::ZeroNorm));
        assert_eq!(g.len(), 2);
        assert!(g.to_dense().unwrap().equal_up_to_global_phase(&before, 1e-12).unwrap());
    }

    #[test]
    fn exports() {
        let g = GraphRegister::from_edges(3, &[(1, 2), (0, 1)]).unwrap();
        assert_eq!(g.export_adjacency(), "0 1\n1 2\n");
        assert_eq!(g.export_dot(), "graph G {\n  0;\n  1;\n  2;\n  0 -- 1;\n  1 -- 2;\n}\n");
        assert_eq!(GraphRegister::new().export_adjacency(), "");
    }

    #[test]
    fn cluster_2x2_matches_direct_construction() {
        let g = GraphRegister::cluster(2, 2);
        let mut psi = PureState::init_plus(4).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            psi.apply_cz(a, b).unwrap();
        }
        assert!(g.to_dense().unwrap().equal_up_to_global_phase(&psi, 1e-12).unwrap());
    }

    #[test]
    fn ids_are_never_reused() {
        let mut g = GraphRegister::new();
        let v = g.new_vertex();
        g.measure_pauli_forced(v, Pauli::Z, 0).unwrap();
        assert_eq!(g.new_vertex(), 1);
    }
}
