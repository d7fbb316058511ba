//! Local-unitary equivalence checks against graph states.

use crate::error::{Error, Result};
use crate::graph::LocalClifford;
use crate::statevec::{PureState, ACCUMULATED_TOL};

/// `|G>` on `n` qubits; edge `(a, b)` joins qubits `a` and `b`.
pub fn graph_state(n: usize, edges: &[(usize, usize)]) -> Result<PureState> {
    let mut psi = PureState::init_plus(n)?;
    for &(a, b) in edges {
        psi.apply_cz(a, b)?;
    }
    Ok(psi)
}

/// True when `state` equals `(⊗_q ops[q]) |G>` up to global phase.
pub fn certificate_holds(state: &PureState, edges: &[(usize, usize)], ops: &[LocalClifford]) -> Result<bool> {
    let n = state.num_qubits();
    if ops.len() != n {
        return Err(Error::DimensionMismatch(ops.len(), n));
    }
    let mut g = graph_state(n, edges)?;
    for (q, c) in ops.iter().enumerate() {
        g.apply_1q(q, &c.matrix())?;
    }
    state.equal_up_to_global_phase(&g, ACCUMULATED_TOL)
}

/// Searches all `24^n` products of local Cliffords for one taking `from`
/// to `to` up to global phase. Limited to four qubits.
pub fn find_local_clifford(from: &PureState, to: &PureState) -> Result<Option<Vec<LocalClifford>>> {
    let n = from.num_qubits();
    if to.num_qubits() != n {
        return Err(Error::DimensionMismatch(n, to.num_qubits()));
    }
    if n > 4 {
        return Err(Error::SizeLimit { requested: n, limit: 4 });
    }
    let mut chosen = Vec::with_capacity(n);
    search(from, to, 0, &mut chosen)
}

fn search(
    partial: &PureState,
    target: &PureState,
    qubit: usize,
    chosen: &mut Vec<LocalClifford>,
) -> Result<Option<Vec<LocalClifford>>> {
    if qubit == partial.num_qubits() {
        return Ok(partial.equal_up_to_global_phase(target, ACCUMULATED_TOL)?.then(|| chosen.clone()));
    }
    for c in LocalClifford::all() {
        let mut next = partial.clone();
        next.apply_1q(qubit, &c.matrix())?;
        chosen.push(c);
        if let Some(found) = search(&next, target, qubit + 1, chosen)? {
            return Ok(Some(found));
        }
        chosen.pop();
    }
    Ok(None)
}

/// True when some product of local Cliffords maps `state` onto `|G>`.
pub fn lc_equivalent_to_graph(state: &PureState, edges: &[(usize, usize)]) -> Result<bool> {
    let g = graph_state(state.num_qubits(), edges)?;
    Ok(find_local_clifford(state, &g)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::gates::ONE;

    #[test]
    fn bell_state_is_lc_equivalent_to_an_edge() {
        let bell = PureState::from_labels(&[("00", ONE), ("11", ONE)]).unwrap();
        assert!(lc_equivalent_to_graph(&bell, &[(0, 1)]).unwrap());
        assert!(!lc_equivalent_to_graph(&bell, &[]).unwrap());
    }

    #[test]
    fn certificate_for_hadamard_on_plus() {
        let zero = PureState::zero(1).unwrap();
        assert!(certificate_holds(&zero, &[], &[LocalClifford::hadamard()]).unwrap());
        assert!(!certificate_holds(&zero, &[], &[LocalClifford::IDENTITY]).unwrap());
    }
}
