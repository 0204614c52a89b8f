use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{bitstring, Angle, CircuitError, Gate, IsingModel, MeasurementCounts, QuantumCircuit};
use crate::MAX_SIMULATOR_QUBITS;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("qubit cap exceeded: {requested} qubits requested, simulator supports {max}")]
    TooManyQubits { requested: usize, max: usize },
    #[error("dimension mismatch: state has {state} qubits, model has {model}")]
    DimensionMismatch { state: usize, model: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Dense `2^n` amplitude vector; basis index bit `k` is qubit `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self, SimError> {
        if num_qubits > MAX_SIMULATOR_QUBITS {
            return Err(SimError::TooManyQubits {
                requested: num_qubits,
                max: MAX_SIMULATOR_QUBITS,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `index`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, SimError> {
        let mut s = Self::zero(num_qubits)?;
        s.amplitudes[0] = Complex64::new(0.0, 0.0);
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        assert!(amplitudes.len().is_power_of_two(), "length must be a power of two");
        Self {
            num_qubits: amplitudes.len().trailing_zeros() as usize,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// Applies the 2x2 unitary `[[a, b], [c, d]]` to qubit `q`.
    fn apply_single(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        let mask = 1usize << q;
        for block in self.amplitudes.chunks_exact_mut(mask << 1) {
            let (lo, hi) = block.split_at_mut(mask);
            for (x0, x1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a0, a1) = (*x0, *x1);
                *x0 = u[0][0] * a0 + u[0][1] * a1;
                *x1 = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    pub fn apply_h(&mut self, q: usize) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(q, [[s, s], [s, -s]]);
    }

    pub fn apply_rx(&mut self, q: usize, theta: f64) {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new(0.0, -(theta / 2.0).sin());
        self.apply_single(q, [[c, s], [s, c]]);
    }

    pub fn apply_rz(&mut self, q: usize, theta: f64) {
        let mask = 1usize << q;
        let p0 = Complex64::from_polar(1.0, -theta / 2.0);
        let p1 = Complex64::from_polar(1.0, theta / 2.0);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= if i & mask == 0 { p0 } else { p1 };
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (cm, tm) = (1usize << control, 1usize << target);
        for i in 0..self.amplitudes.len() {
            // visit each swapped pair once, from its target-0 member
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
    }

    pub fn apply(&mut self, gate: &Gate, binding: &BTreeMap<String, f64>) -> Result<(), SimError> {
        for q in gate.qubits() {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                }
                .into());
            }
        }
        match gate {
            Gate::H { qubit } => self.apply_h(*qubit),
            Gate::Rx { qubit, angle } => self.apply_rx(*qubit, angle.resolve(binding)?),
            Gate::Rz { qubit, angle } => self.apply_rz(*qubit, angle.resolve(binding)?),
            Gate::Cx { control, target } => {
                if control == target {
                    return Err(CircuitError::RepeatedOperand(*control).into());
                }
                self.apply_cx(*control, *target)
            }
        }
        Ok(())
    }

    /// `Σ_b |a_b|^2 · diag[b]` for a precomputed diagonal observable.
    pub fn expectation_diagonal(&self, diagonal: &[f64]) -> f64 {
        self.amplitudes
            .iter()
            .zip(diagonal)
            .map(|(a, e)| a.norm_sqr() * e)
            .sum()
    }
}

/// Runs `circuit` from `|0...0⟩` with free parameters resolved by `binding`.
pub fn simulate(circuit: &QuantumCircuit, binding: &BTreeMap<String, f64>) -> Result<StateVector, SimError> {
    // fail before touching amplitudes if anything is unbound
    for g in &circuit.gates {
        if let Some(a @ Angle::Param { .. }) = g.angle() {
            a.resolve(binding)?;
        }
    }
    let mut state = StateVector::zero(circuit.num_qubits)?;
    for g in &circuit.gates {
        state.apply(g, binding)?;
    }
    Ok(state)
}

/// Expected Ising energy of `state`.
pub fn expectation(state: &StateVector, model: &IsingModel) -> Result<f64, SimError> {
    if state.num_qubits != model.n {
        return Err(SimError::DimensionMismatch {
            state: state.num_qubits,
            model: model.n,
        });
    }
    Ok(state.expectation_diagonal(&model.diagonal()))
}

/// Draws `shots` independent basis-state measurements, seeded.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> MeasurementCounts {
    let probs = state.probabilities();
    let dist = WeightedIndex::new(&probs).expect("state has nonzero norm");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits: BTreeMap<usize, u64> = BTreeMap::new();
    for _ in 0..shots {
        *hits.entry(dist.sample(&mut rng)).or_insert(0) += 1;
    }
    let counts = hits
        .into_iter()
        .map(|(i, c)| (bitstring(i, state.num_qubits), c))
        .collect();
    MeasurementCounts { shots, counts }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_h(0);
        assert!(close(s.amplitudes()[0], Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn rx_pi_on_zero() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rx(0, PI);
        assert!(close(s.amplitudes()[0], Complex64::new(0.0, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn bell_state() {
        let mut c = QuantumCircuit::new(2);
        c.push(Gate::H { qubit: 0 }).unwrap();
        c.push(Gate::Cx { control: 0, target: 1 }).unwrap();
        let s = simulate(&c, &BTreeMap::new()).unwrap();
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let expected = [r, z, z, r];
        assert!(s.amplitudes().iter().zip(expected).all(|(a, b)| close(*a, b)));
    }

    #[test]
    fn cx_uses_qubit_zero_as_low_bit() {
        // |q0=1, q1=0⟩ is index 1; CX(0,1) maps it to |11⟩ = index 3
        let mut s = StateVector::basis(2, 1).unwrap();
        s.apply_cx(0, 1);
        assert!(close(s.amplitudes()[3], Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let mut c = QuantumCircuit::new(1);
        c.declare_parameter("beta_1").unwrap();
        c.push(Gate::Rx { qubit: 0, angle: Angle::param("beta_1", 2.0) }).unwrap();
        assert_eq!(
            simulate(&c, &BTreeMap::new()),
            Err(SimError::Circuit(CircuitError::UnboundParameter("beta_1".into())))
        );
    }

    #[test]
    fn qubit_cap() {
        assert!(matches!(
            StateVector::zero(MAX_SIMULATOR_QUBITS + 1),
            Err(SimError::TooManyQubits { .. })
        ));
    }

    #[test]
    fn expectation_of_basis_state() {
        let mut m = IsingModel::new(2);
        m.add_coupling(0, 1, 0.5);
        m.offset = -0.5;
        // "10": qubit 0 set
        let s = StateVector::basis(2, 0b01).unwrap();
        assert_eq!(expectation(&s, &m).unwrap(), -1.0);
        assert!(matches!(
            expectation(&s, &IsingModel::new(3)),
            Err(SimError::DimensionMismatch { state: 2, model: 3 })
        ));
    }

    #[test]
    fn sampling_a_basis_state() {
        let s = StateVector::basis(2, 0b10).unwrap();
        let counts = sample(&s, 1000, 7);
        assert_eq!(counts.counts, BTreeMap::from([("01".to_string(), 1000)]));
        assert_eq!(counts.shots, 1000);
    }

    #[test]
    fn sampling_is_seeded() {
        let mut s = StateVector::zero(3).unwrap();
        (0..3).for_each(|q| s.apply_h(q));
        assert_eq!(sample(&s, 500, 11), sample(&s, 500, 11));
        assert_ne!(sample(&s, 500, 11), sample(&s, 500, 12));
    }
}
