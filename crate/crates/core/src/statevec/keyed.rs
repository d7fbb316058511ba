use rand::Rng;

use super::gates::{Mat2, Pauli};
use super::state::{Basis, PureState};
use crate::error::{Error, Result};

/// A dense pure state whose qubits are addressed by stable integer keys
/// instead of positions. New qubits are appended on top; measured qubits
/// are removed and the remaining positions close up.
#[derive(Debug, Clone)]
pub struct KeyedRegister {
    state: PureState,
    keys: Vec<u32>,
}

impl Default for KeyedRegister {
    fn default() -> Self {
        Self::new()
    }
}

impl KeyedRegister {
    pub fn new() -> Self {
        KeyedRegister { state: PureState::zero(0).expect("empty register"), keys: Vec::new() }
    }

    /// Wraps `state`, naming its qubit `k` as `keys[k]`.
    pub fn from_state(keys: Vec<u32>, state: PureState) -> Result<Self> {
        if keys.len() != state.num_qubits() {
            return Err(Error::DimensionMismatch(keys.len(), state.num_qubits()));
        }
        for (i, k) in keys.iter().enumerate() {
            if keys[..i].contains(k) {
                return Err(Error::IndexCollision(*k as usize));
            }
        }
        Ok(KeyedRegister { state, keys })
    }

    pub fn keys(&self) -> &[u32] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn contains(&self, key: u32) -> bool {
        self.keys.contains(&key)
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub(crate) fn state_mut(&mut self) -> &mut PureState {
        &mut self.state
    }

    pub fn position(&self, key: u32) -> Result<usize> {
        self.keys.iter().position(|&k| k == key).ok_or(Error::DeadVertex(key))
    }

    /// Adds a qubit in `single` (a one-qubit state) under `key`.
    pub fn add(&mut self, key: u32, single: &PureState) -> Result<()> {
        if self.contains(key) {
            return Err(Error::param("key", format!("{key} already present")));
        }
        if single.num_qubits() != 1 {
            return Err(Error::DimensionMismatch(single.num_qubits(), 1));
        }
        self.state = self.state.append(single)?;
        self.keys.push(key);
        Ok(())
    }

    pub fn add_plus(&mut self, key: u32) -> Result<()> {
        self.add(key, &PureState::init_plus(1)?)
    }

    pub fn apply(&mut self, key: u32, u: &Mat2) -> Result<()> {
        let q = self.position(key)?;
        self.state.apply_1q(q, u)
    }

    pub fn cz(&mut self, a: u32, b: u32) -> Result<()> {
        let (qa, qb) = (self.position(a)?, self.position(b)?);
        self.state.apply_cz(qa, qb)
    }

    /// Measures `key`, removes it, and returns `(outcome, probability)`.
    pub fn measure<R: Rng + ?Sized>(&mut self, key: u32, basis: Basis, rng: &mut R) -> Result<(u8, f64)> {
        let q = self.position(key)?;
        let m = self.state.measure(q, basis, rng)?;
        self.state = m.post_state;
        self.keys.remove(q);
        Ok((m.outcome, m.probability))
    }

    /// Post-selects `outcome` on `key`, removes it, and returns the
    /// probability of that branch.
    pub fn measure_forced(&mut self, key: u32, basis: Basis, outcome: u8) -> Result<f64> {
        let q = self.position(key)?;
        let m = self.state.measure_forced(q, basis, outcome)?;
        self.state = m.post_state;
        self.keys.remove(q);
        Ok(m.probability)
    }

    pub fn measure_pauli_forced(&mut self, key: u32, axis: Pauli, outcome: u8) -> Result<f64> {
        self.measure_forced(key, Basis::Pauli(axis), outcome)
    }

    /// The state with qubit `k` holding `order[k]`. `order` must list every
    /// key exactly once.
    pub fn state_in_order(&self, order: &[u32]) -> Result<PureState> {
        if order.len() != self.keys.len() {
            return Err(Error::DimensionMismatch(order.len(), self.keys.len()));
        }
        let positions = order.iter().map(|&k| self.position(k)).collect::<Result<Vec<_>>>()?;
        self.state.permute(&positions)
    }

    /// The state with keys in ascending order, the layout used by
    /// [`GraphRegister::to_dense`](crate::graph::GraphRegister::to_dense).
    pub fn state_sorted(&self) -> Result<PureState> {
        let mut order = self.keys.clone();
        order.sort_unstable();
        self.state_in_order(&order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::gates::ONE;

    #[test]
    fn keys_follow_their_qubits() {
        let mut reg = KeyedRegister::new();
        reg.add_plus(10).unwrap();
        reg.add(3, &PureState::zero(1).unwrap()).unwrap();
        reg.add_plus(7).unwrap();
        reg.cz(10, 7).unwrap();
        assert!((reg.measure_pauli_forced(3, Pauli::Z, 0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(reg.keys(), &[10, 7]);
        let sorted = reg.state_sorted().unwrap();
        let g = PureState::from_labels(&[("00", ONE), ("01", ONE), ("10", ONE), ("11", -ONE)]).unwrap();
        assert!(sorted.equal_up_to_global_phase(&g, 1e-12).unwrap());
        assert_eq!(reg.cz(3, 7), Err(Error::DeadVertex(3)));
    }
}
