use super::linalg::{c, embed, identity, kron, kron_all, pauli, CMatrix};
use super::model::{FiniteModel, Operator, PartyMeasurement, SourceState};
use crate::scenario::NetworkScenario;

/// Pauli sign patterns (XX, YY, ZZ) of the four Bell projectors, each
/// ¼(II ± XX ± YY ± ZZ): Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
pub const BELL_SIGNS: [[f64; 3]; 4] = [
    [1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0],
    [-1.0, -1.0, -1.0],
];

/// Schmidt factors of Bell projector `a` (0-based): four terms
/// (σ_k/2) ⊗ (±σ_k/2), k = 0..3.
pub fn bell_factors(a: usize) -> Vec<(CMatrix, CMatrix)> {
    let half = c(0.5, 0.0);
    (0..4)
        .map(|k| {
            let sign = if k == 0 { 1.0 } else { BELL_SIGNS[a][k - 1] };
            (pauli(k) * half, pauli(k) * c(0.5 * sign, 0.0))
        })
        .collect()
}

pub fn bell_projector(a: usize) -> CMatrix {
    bell_factors(a)
        .iter()
        .fold(CMatrix::zeros(4, 4), |acc, (l, r)| acc + kron(l, r))
}

/// Every party of the triangle measures its two qubits in the magic (Bell)
/// basis; every source emits Φ⁺. Inflated elements E^{ij}_a act on qubit
/// 𝒜ⁱ₋ (first slot, copy i) and 𝒜ʲ₊ (second slot, copy j).
#[derive(Clone, Debug)]
pub struct MagicBasisModel {
    pub model: FiniteModel,
    pub n_copies: usize,
}

pub fn magic_basis_model(n_copies: usize) -> MagicBasisModel {
    assert!(n_copies >= 1, "need at least one copy");
    let net = NetworkScenario::triangle(4);
    let phi = bell_projector(0);
    let sources = (0..net.sources.len())
        .map(|s| SourceState {
            endpoints: (0..net.parties.len())
                .filter(|&p| net.parties[p].slots.iter().any(|sl| sl.sources[0] == s))
                .collect(),
            dims: vec![2, 2],
            state: Operator(phi.clone()),
        })
        .collect();
    let measurements = net
        .parties
        .iter()
        .map(|_| PartyMeasurement {
            povm: vec![(0..4).map(|a| Operator(bell_projector(a))).collect()],
            factors: Some(vec![(0..3)
                .map(|a| {
                    bell_factors(a)
                        .into_iter()
                        .map(|(l, r)| vec![Operator(l), Operator(r)])
                        .collect()
                })
                .collect()]),
        })
        .collect();
    MagicBasisModel {
        model: FiniteModel {
            network: net,
            r: 4,
            c_bound: 0.5,
            seed: None,
            sources,
            measurements,
        },
        n_copies,
    }
}

impl MagicBasisModel {
    fn qubits(&self) -> Vec<usize> {
        vec![2; 2 * self.n_copies]
    }

    /// E^{ij}_a (copies 1-based, outcome 0-based) on the 2n local qubits,
    /// ordered first-slot copies then second-slot copies.
    pub fn element(&self, i: usize, j: usize, a: usize) -> CMatrix {
        let n = self.n_copies;
        assert!((1..=n).contains(&i) && (1..=n).contains(&j) && a < 4);
        embed(&bell_projector(a), &[i - 1, n + j - 1], &self.qubits())
    }

    /// X^{⊗2n}.
    pub fn x_bar(&self) -> CMatrix {
        let x = pauli(1);
        kron_all(std::iter::repeat_n(&x, 2 * self.n_copies))
    }

    /// Z^{⊗2n}.
    pub fn z_bar(&self) -> CMatrix {
        let z = pauli(3);
        kron_all(std::iter::repeat_n(&z, 2 * self.n_copies))
    }

    pub fn local_identity(&self) -> CMatrix {
        identity(1 << (2 * self.n_copies))
    }
}
