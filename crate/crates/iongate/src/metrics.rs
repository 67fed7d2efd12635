//! Truth tables for the reversible gates, outcome-probability tables and the
//! classical fidelity: the probability of the correct classical output under
//! a uniformly random computational input.

use crate::math::CMatrix;
use crate::pulse::{self, NoiseModel, PulseError, PulseProgram};

/// Bijective map from input basis states to correct outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    name: String,
    map: Vec<usize>,
}

impl TruthTable {
    pub fn new(name: &str, map: Vec<usize>) -> Self {
        let mut seen = vec![false; map.len()];
        for &y in &map {
            assert!(y < map.len() && !seen[y], "truth table must be a bijection");
            seen[y] = true;
        }
        Self { name: name.to_string(), map }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn output(&self, input: usize) -> usize {
        self.map[input]
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new("identity", (0..1usize << n_qubits).collect())
    }

    /// Controlled-controlled-NOT: controls are the outer qubits 0 and 2,
    /// the target is the middle qubit.
    pub fn toffoli() -> Self {
        let map = (0..8)
            .map(|b| {
                let (b0, b2) = ((b >> 2) & 1, b & 1);
                if b0 == 1 && b2 == 1 {
                    b ^ 0b010
                } else {
                    b
                }
            })
            .collect();
        Self::new("toffoli", map)
    }

    /// CNOT on three qubits with arbitrary control/target.
    pub fn cnot(control: usize, target: usize) -> Self {
        assert!(control < 3 && target < 3 && control != target);
        let map = (0..8)
            .map(|b| {
                if (b >> (2 - control)) & 1 == 1 {
                    b ^ (1 << (2 - target))
                } else {
                    b
                }
            })
            .collect();
        Self::new("cnot", map)
    }

    /// The paper's Half-Adder CNOT: control qubit 0, target qubit 2.
    pub fn cnot_canonical() -> Self {
        Self::cnot(0, 2)
    }

    /// Toffoli followed by CNOT(0→2): carry on the middle qubit, sum on the
    /// last.
    pub fn half_adder() -> Self {
        let tof = Self::toffoli();
        let cx = Self::cnot_canonical();
        let map = (0..8).map(|b| cx.output(tof.output(b))).collect();
        Self::new("half_adder", map)
    }

    pub fn not_gate(qubit: usize) -> Self {
        assert!(qubit < 3);
        Self::new("not", (0..8).map(|b| b ^ (1 << (2 - qubit))).collect())
    }

    /// Single-qubit NOT on an n-qubit register.
    pub fn not_on(qubit: usize, n_qubits: usize) -> Self {
        assert!(qubit < n_qubits);
        let d = 1usize << n_qubits;
        Self::new("not", (0..d).map(|b| b ^ (1 << (n_qubits - 1 - qubit))).collect())
    }
}

/// Row-stochastic matrix of measured-output probabilities; rows are input
/// basis states, columns measured outputs.
#[derive(Debug, Clone)]
pub struct OutcomeTable {
    n_qubits: usize,
    rows: Vec<Vec<f64>>,
}

impl OutcomeTable {
    pub fn new(n_qubits: usize, rows: Vec<Vec<f64>>) -> Self {
        let d = 1usize << n_qubits;
        assert_eq!(rows.len(), d);
        assert!(rows.iter().all(|r| r.len() == d));
        Self { n_qubits, rows }
    }

    /// |⟨y|U|x⟩|² for every input column of a unitary.
    pub fn from_unitary(u: &CMatrix) -> Self {
        let d = u.rows();
        let n = d.trailing_zeros() as usize;
        let rows = (0..d)
            .map(|x| (0..d).map(|y| u[(y, x)].norm_sqr()).collect())
            .collect();
        Self { n_qubits: n, rows }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn probability(&self, input: usize, output: usize) -> f64 {
        self.rows[input][output]
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.rows[input]
    }

    pub fn max_row_sum_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `input,out000,...`; inputs as bit strings,
    /// probabilities with 6 decimals.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let n = self.n_qubits;
        let mut s = String::from("input");
        for y in 0..d {
            s.push_str(&format!(",out{:0width$b}", y, width = n));
        }
        s.push('\n');
        for (x, row) in self.rows.iter().enumerate() {
            s.push_str(&format!("{:0width$b}", x, width = n));
            for p in row {
                s.push_str(&format!(",{p:.6}"));
            }
            s.push('\n');
        }
        s
    }
}

/// F = (1/2ⁿ) Σₓ P(correct output | input x).
pub fn classical_fidelity(table: &OutcomeTable, tt: &TruthTable) -> f64 {
    assert_eq!(table.dim(), tt.dim());
    let d = table.dim();
    (0..d).map(|x| table.probability(x, tt.output(x))).sum::<f64>() / d as f64
}

/// Execute a program over every basis input and collect the outcome table.
/// In noise mode the Monte Carlo per-sample unitaries are shared across all
/// inputs, and the average is accumulated in fixed sample order.
pub fn outcome_table(
    prog: &PulseProgram,
    noise: Option<&NoiseModel>,
) -> Result<OutcomeTable, PulseError> {
    let probs = pulse::execute_all(prog, noise)?;
    Ok(OutcomeTable::new(prog.n_qubits(), probs))
}
