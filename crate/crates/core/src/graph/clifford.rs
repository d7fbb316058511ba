//! The 24-element single-qubit Clifford group modulo global phase.
//!
//! Elements are enumerated once by breadth-first search from the identity
//! using `H` and `S` as generators; index 0 is the identity. Multiplication,
//! inversion and Pauli conjugation are precomputed tables.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::Mul;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::statevec::gates::{self, Mat2, Pauli, I, ONE};

pub const GROUP_ORDER: usize = 24;

/// A single-qubit Clifford, identified by its index in the fixed enumeration.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct LocalClifford(u8);

struct Tables {
    mats: Vec<Mat2>,
    mul: [[u8; GROUP_ORDER]; GROUP_ORDER],
    inv: [u8; GROUP_ORDER],
    /// `conj[c][p] = (p', negative)` with `C^dagger P C = (-1)^negative P'`.
    conj: [[(Pauli, bool); 3]; GROUP_ORDER],
    diagonal: [bool; GROUP_ORDER],
    hadamard: u8,
    s: u8,
    sdg: u8,
    paulis: [u8; 3],
    sqrt_x: u8,
    sqrt_z: u8,
}

fn canonical(m: &Mat2) -> Mat2 {
    let pivot = m.iter().flatten().find(|z| z.norm() > 1e-9).copied().unwrap_or(ONE);
    let phase = pivot.conj() / pivot.norm();
    gates::scale(m, phase)
}

fn find(mats: &[Mat2], m: &Mat2) -> Option<u8> {
    let c = canonical(m);
    mats.iter().position(|x| gates::equal_up_to_phase(x, &c, 1e-9)).map(|i| i as u8)
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let gens = [gates::hadamard(), gates::diag(I)];
        let mut mats = vec![canonical(&gates::identity())];
        let mut frontier = 0;
        while frontier < mats.len() {
            let current = mats[frontier];
            for g in &gens {
                let next = gates::matmul(g, &current);
                if find(&mats, &next).is_none() {
                    mats.push(canonical(&next));
                }
            }
            frontier += 1;
        }
        assert_eq!(mats.len(), GROUP_ORDER, "H and S must generate 24 Cliffords");

        let mut mul = [[0u8; GROUP_ORDER]; GROUP_ORDER];
        let mut inv = [0u8; GROUP_ORDER];
        let mut conj = [[(Pauli::X, false); 3]; GROUP_ORDER];
        let mut diagonal = [false; GROUP_ORDER];
        for a in 0..GROUP_ORDER {
            for b in 0..GROUP_ORDER {
                mul[a][b] = find(&mats, &gates::matmul(&mats[a], &mats[b])).expect("group closure");
                if mul[a][b] == 0 {
                    inv[a] = b as u8;
                }
            }
            for p in Pauli::ALL {
                let c = &mats[a];
                let image = gates::matmul(&gates::matmul(&gates::adjoint(c), &p.matrix()), c);
                conj[a][p.index()] = Pauli::ALL
                    .iter()
                    .find_map(|&q| {
                        let qm = q.matrix();
                        if gates::equal_up_to_phase(&image, &qm, 1e-9) {
                            Some((q, (image[0][0] + image[0][1] - qm[0][0] - qm[0][1]).norm() > 1e-6))
                        } else {
                            None
                        }
                    })
                    .expect("Cliffords map Paulis to Paulis");
            }
            diagonal[a] = mats[a][0][1].norm() < 1e-9 && mats[a][1][0].norm() < 1e-9;
        }

        let h = FRAC_1_SQRT_2;
        let sqrt_x = [[ONE * h, -I * h], [-I * h, ONE * h]]; // exp(-i pi/4 X)
        let sqrt_z = gates::diag(-I); // exp(i pi/4 Z) up to phase
        let idx = |m: &Mat2| find(&mats, m).expect("named element present");
        Tables {
            hadamard: idx(&gates::hadamard()),
            s: idx(&gates::diag(I)),
            sdg: idx(&gates::diag(-I)),
            paulis: [idx(&gates::pauli_x()), idx(&gates::pauli_y()), idx(&gates::pauli_z())],
            sqrt_x: idx(&sqrt_x),
            sqrt_z: idx(&sqrt_z),
            mats,
            mul,
            inv,
            conj,
            diagonal,
        }
    })
}

impl LocalClifford {
    pub const IDENTITY: LocalClifford = LocalClifford(0);

    pub fn from_index(index: u8) -> Result<Self> {
        if (index as usize) < GROUP_ORDER {
            Ok(LocalClifford(index))
        } else {
            Err(Error::BadClifford(index))
        }
    }

    /// Looks up a 2x2 unitary; `None` if it is not Clifford.
    pub fn from_matrix(m: &Mat2) -> Option<Self> {
        find(&tables().mats, m).map(LocalClifford)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = LocalClifford> {
        (0..GROUP_ORDER as u8).map(LocalClifford)
    }

    /// Representative matrix (phase fixed so the first nonzero entry is
    /// real and positive).
    pub fn matrix(self) -> Mat2 {
        tables().mats[self.0 as usize]
    }

    pub fn inverse(self) -> Self {
        LocalClifford(tables().inv[self.0 as usize])
    }

    /// True for the four elements that commute with control-phase
    /// (`I`, `Z`, `S`, `S^dagger`).
    pub fn is_diagonal(self) -> bool {
        tables().diagonal[self.0 as usize]
    }

    /// Returns `(P', negative)` with `C^dagger P C = (-1)^negative P'`.
    pub fn conjugate_pauli(self, p: Pauli) -> (Pauli, bool) {
        tables().conj[self.0 as usize][p.index()]
    }

    pub fn hadamard() -> Self {
        LocalClifford(tables().hadamard)
    }

    pub fn phase_s() -> Self {
        LocalClifford(tables().s)
    }

    pub fn phase_sdg() -> Self {
        LocalClifford(tables().sdg)
    }

    pub fn pauli(p: Pauli) -> Self {
        LocalClifford(tables().paulis[p.index()])
    }

    /// `exp(-i pi/4 X)`, applied to a vertex by local complementation.
    pub fn sqrt_x() -> Self {
        LocalClifford(tables().sqrt_x)
    }

    /// `exp(i pi/4 Z)`, applied to each neighbour by local complementation.
    pub fn sqrt_z() -> Self {
        LocalClifford(tables().sqrt_z)
    }

    /// Pauli content of this element, if it is one of `I, X, Y, Z`:
    /// `(x, z)` such that the element equals `X^x Z^z` up to phase.
    pub fn as_pauli(self) -> Option<(bool, bool)> {
        let t = tables();
        match self.0 {
            0 => Some((false, false)),
            i if i == t.paulis[0] => Some((true, false)),
            i if i == t.paulis[1] => Some((true, true)),
            i if i == t.paulis[2] => Some((false, true)),
            _ => None,
        }
    }
}

impl Mul for LocalClifford {
    type Output = LocalClifford;

    /// Matrix product: `(a * b)` applies `b` first.
    fn mul(self, rhs: LocalClifford) -> LocalClifford {
        LocalClifford(tables().mul[self.0 as usize][rhs.0 as usize])
    }
}

impl Default for LocalClifford {
    fn default() -> Self {
        LocalClifford::IDENTITY
    }
}

impl fmt::Debug for LocalClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LC{}", self.0)
    }
}

impl fmt::Display for LocalClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Breadth-first words over the two local-complementation moves that carry
/// an element to one of the diagonal Cliffords. `true` = complement the
/// vertex itself (right-multiply by `sqrt_x^-1`), `false` = complement a
/// neighbour (right-multiply by `sqrt_z^-1`).
pub(crate) fn reduction_word(c: LocalClifford) -> &'static [bool] {
    static WORDS: OnceLock<Vec<Vec<bool>>> = OnceLock::new();
    let words = WORDS.get_or_init(|| {
        let moves = [(true, LocalClifford::sqrt_x().inverse()), (false, LocalClifford::sqrt_z().inverse())];
        (0..GROUP_ORDER as u8)
            .map(|start| {
                let mut queue = std::collections::VecDeque::from([(LocalClifford(start), Vec::new())]);
                let mut seen = [false; GROUP_ORDER];
                seen[start as usize] = true;
                while let Some((c, word)) = queue.pop_front() {
                    if c.is_diagonal() {
                        return word;
                    }
                    for (is_self, m) in moves {
                        let next = c * m;
                        if !seen[next.0 as usize] {
                            seen[next.0 as usize] = true;
                            let mut w = word.clone();
                            w.push(is_self);
                            queue.push_back((next, w));
                        }
                    }
                }
                unreachable!("sqrt_x and sqrt_z generate the whole group")
            })
            .collect()
    });
    &words[c.0 as usize]
}
