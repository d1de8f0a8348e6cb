//! Named inclusions `C ⊆ A ⊆ D` used by the driver and the CLI.

use cstar_core::mat::random::{random_unitary_near_identity, rng, unitary_from_generator};
use cstar_core::{CMatrix, CondExpectation, Subalgebra, C64};

/// How `E_C^D` is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectationKind {
    TracePreserving,
    /// `E(x) = ¼ Σ g x g*` over `g ∈ {I, σ_x, σ_y, σ_z}`.
    PauliAverage,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub c: Subalgebra,
    pub a: Subalgebra,
    pub d: Subalgebra,
    pub kind: ExpectationKind,
    /// `Index E_C^D = expected_index · I`.
    pub expected_index: Option<f64>,
    /// A second intermediate, not conjugate to `a` by a nearby unitary.
    pub other: Option<Subalgebra>,
}

pub fn pauli_matrices() -> [CMatrix; 4] {
    let z = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        CMatrix::identity(2),
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        CMatrix::from_fn(2, |r, c| match (r, c) {
            (0, 1) => -i,
            (1, 0) => i,
            _ => z,
        }),
        CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
    ]
}

impl Scenario {
    pub fn n(&self) -> usize {
        self.d.ambient_dim()
    }

    /// `E_C^D` for this scenario.
    pub fn expectation(&self) -> CondExpectation {
        match self.kind {
            ExpectationKind::TracePreserving => {
                CondExpectation::trace_preserving(&self.d, &self.c).expect("catalog inclusions are nested")
            }
            ExpectationKind::PauliAverage => {
                let paulis = pauli_matrices();
                CondExpectation::from_fn(&self.d, &self.c, |x| {
                    let mut acc = CMatrix::zeros(2);
                    for g in &paulis {
                        acc = &acc + &x.conjugate_by(g);
                    }
                    acc.scale_re(0.25)
                })
                .expect("the Pauli average lands in the scalars")
            }
        }
    }

    /// `C′ ∩ D`.
    pub fn commutant(&self) -> Subalgebra {
        Subalgebra::relative_commutant(&self.c, &self.d).expect("catalog inclusions are nested")
    }

    /// Seeded unitary `u₀ ∈ C′ ∩ D` with `‖u₀ − I‖ = eps`.
    ///
    /// When `C′ ∩ D = D` this is exactly `random_unitary_near_identity`.
    pub fn planted_unitary(&self, eps: f64, seed: u64) -> cstar_core::Result<CMatrix> {
        let commutant = self.commutant();
        if commutant.dim() == self.d.dim() {
            return random_unitary_near_identity(self.n(), eps, seed);
        }
        let h = commutant.random_hermitian(&mut rng(seed));
        unitary_from_generator(&h, eps)
    }
}

fn scalars_in(n: usize, a: Subalgebra) -> Scenario {
    Scenario {
        name: ["scalars-in-M2", "scalars-in-M3", "scalars-in-M4"][n - 2],
        description: "scalars inside the full matrix algebra",
        c: Subalgebra::scalars(n),
        a,
        d: Subalgebra::full(n),
        kind: ExpectationKind::TracePreserving,
        expected_index: Some((n * n) as f64),
        other: None,
    }
}

fn diag_in(n: usize, a: Subalgebra) -> Scenario {
    Scenario {
        name: ["diag-in-M2", "diag-in-M3", "diag-in-M4"][n - 2],
        description: "diagonal matrices inside the full matrix algebra",
        c: Subalgebra::diagonal(n),
        a,
        d: Subalgebra::full(n),
        kind: ExpectationKind::TracePreserving,
        expected_index: Some(n as f64),
        other: None,
    }
}

/// `M_k ⊗ I_m ⊂ A = M_k ⊗ diag_m ⊂ M_{km}`.
fn tensor_in(name: &'static str, k: usize, m: usize) -> Scenario {
    Scenario {
        name,
        description: "left tensor factor inside the full matrix algebra",
        c: Subalgebra::tensor_left(k, m),
        a: Subalgebra::tensor(&Subalgebra::full(k), &Subalgebra::diagonal(m)),
        d: Subalgebra::full(k * m),
        kind: ExpectationKind::TracePreserving,
        expected_index: Some((m * m) as f64),
        other: None,
    }
}

/// Every catalog scenario, in a fixed order.
pub fn catalog() -> Vec<Scenario> {
    vec![
        scalars_in(2, Subalgebra::diagonal(2)),
        scalars_in(3, Subalgebra::diagonal(3)),
        scalars_in(4, Subalgebra::tensor_left(2, 2)),
        diag_in(2, Subalgebra::full(2)),
        diag_in(3, Subalgebra::block_diagonal(&[2, 1])),
        diag_in(4, Subalgebra::block_diagonal(&[2, 2])),
        tensor_in("M2-in-M4", 2, 2),
        tensor_in("M2-in-M6", 2, 3),
        tensor_in("M3-in-M6", 3, 2),
        tensor_in("M3-in-M9", 3, 3),
        Scenario {
            name: "pauli-fixed-in-M2",
            description: "fixed points of the Pauli-group conjugation action on M_2",
            c: Subalgebra::scalars(2),
            a: Subalgebra::diagonal(2),
            d: Subalgebra::full(2),
            kind: ExpectationKind::PauliAverage,
            expected_index: Some(4.0),
            other: None,
        },
        Scenario {
            name: "M2-in-M4-tower",
            description: "scalars inside M_2 ⊗ I inside M_4",
            c: Subalgebra::scalars(4),
            a: Subalgebra::tensor_left(2, 2),
            d: Subalgebra::full(4),
            kind: ExpectationKind::TracePreserving,
            expected_index: Some(16.0),
            other: Some(Subalgebra::tensor_right(2, 2)),
        },
    ]
}

pub fn find(name: &str) -> Option<Scenario> {
    catalog().into_iter().find(|s| s.name == name)
}

pub fn names() -> Vec<&'static str> {
    catalog().iter().map(|s| s.name).collect()
}
