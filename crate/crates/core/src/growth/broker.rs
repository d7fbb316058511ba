use rand::Rng;

use super::LinkModel;
use crate::error::{Error, Result};
use crate::graph::{GraphBackend, LocalClifford, VertexId};
use crate::statevec::Pauli;

/// A network node: an optically active broker qubit and a storage client.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BrokerNode {
    pub id: usize,
    pub broker: VertexId,
    pub client: VertexId,
}

impl BrokerNode {
    /// Adds a client and a broker, both in `|+>` and unentangled.
    pub fn new<B: GraphBackend>(register: &mut B, id: usize) -> Result<Self> {
        let client = register.new_vertex()?;
        let broker = register.new_vertex()?;
        Ok(BrokerNode { id, broker, client })
    }
}

/// Local operations done while transferring a broker pair onto clients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeCorrection {
    /// Local Cliffords applied, in order.
    pub applied: Vec<(VertexId, LocalClifford)>,
    /// `Y` outcomes of the two brokers.
    pub outcomes: [u8; 2],
    pub clients: (VertexId, VertexId),
}

fn fresh_broker<B: GraphBackend>(register: &B, v: VertexId) -> Result<bool> {
    let g = register.graph();
    Ok(g.degree(v)? == 0 && g.vop(v)? == LocalClifford::IDENTITY)
}

/// One link attempt between two fresh brokers. On success the brokers are
/// parity-projected and `true` is returned. On failure both brokers are
/// measured out and replaced with fresh ones; clients are never touched.
pub fn broker_attempt<B: GraphBackend, R: Rng + ?Sized>(
    a: &mut BrokerNode,
    b: &mut BrokerNode,
    link: &LinkModel,
    register: &mut B,
    rng: &mut R,
) -> Result<bool> {
    link.validate()?;
    if a.id == b.id {
        return Err(Error::BrokerState(format!("node {} cannot link to itself", a.id)));
    }
    for node in [&*a, &*b] {
        if !fresh_broker(register, node.broker)? {
            return Err(Error::BrokerState(format!("broker of node {} is not a fresh |+>", node.id)));
        }
    }
    if let Some(phase) = link.attempt(rng) {
        register.parity_project(a.broker, b.broker, phase)?;
        return Ok(true);
    }
    for node in [&mut *a, &mut *b] {
        register.measure_pauli(node.broker, Pauli::Z, rng)?;
        node.broker = register.new_vertex()?;
    }
    Ok(false)
}

/// Repeats [`broker_attempt`] until one succeeds and returns the number of
/// attempts.
pub fn broker_bell<B: GraphBackend, R: Rng + ?Sized>(
    a: &mut BrokerNode,
    b: &mut BrokerNode,
    link: &LinkModel,
    register: &mut B,
    rng: &mut R,
) -> Result<u64> {
    let mut attempts = 1;
    while !broker_attempt(a, b, link, register, rng)? {
        attempts += 1;
    }
    Ok(attempts)
}

/// Moves the entanglement of a linked broker pair onto the two clients:
/// each broker is joined to its client by control-phase and both brokers
/// are measured in `Y`. The client pair gains an edge and fresh brokers are
/// issued.
pub fn broker_to_client_edge<B: GraphBackend, R: Rng + ?Sized>(
    a: &mut BrokerNode,
    b: &mut BrokerNode,
    register: &mut B,
    rng: &mut R,
) -> Result<EdgeCorrection> {
    {
        let g = register.graph();
        let isolated_pair = g.has_edge(a.broker, b.broker) && g.degree(a.broker)? == 1 && g.degree(b.broker)? == 1;
        if !isolated_pair {
            return Err(Error::BrokerState(format!("brokers of nodes {} and {} are not a linked pair", a.id, b.id)));
        }
    }
    let mut applied = Vec::new();
    let mut normalise = |register: &mut B, v: VertexId| -> Result<()> {
        let undo = register.graph().vop(v)?.inverse();
        if undo != LocalClifford::IDENTITY {
            register.apply_local_clifford(v, undo)?;
            applied.push((v, undo));
        }
        Ok(())
    };
    for v in [a.broker, b.broker, a.client, b.client] {
        normalise(register, v)?;
    }
    register.add_cz(a.broker, a.client)?;
    register.add_cz(b.broker, b.client)?;
    let first = register.measure_pauli(a.broker, Pauli::Y, rng)?;
    normalise(register, b.broker)?;
    let second = register.measure_pauli(b.broker, Pauli::Y, rng)?;
    a.broker = register.new_vertex()?;
    b.broker = register.new_vertex()?;
    Ok(EdgeCorrection { applied, outcomes: [first, second], clients: (a.client, b.client) })
}
