use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Spin Hamiltonian `offset + Σ h_i z_i + Σ J_ij z_i z_j` over `z_i ∈ {-1, +1}`.
///
/// Basis bit 0 corresponds to `z = +1` and bit 1 to `z = -1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub n: usize,
    #[serde(default)]
    pub h: BTreeMap<usize, f64>,
    #[serde(default, with = "super::pair_map")]
    pub j: BTreeMap<(usize, usize), f64>,
    #[serde(default)]
    pub offset: f64,
}

impl IsingModel {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            h: BTreeMap::new(),
            j: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn add_field(&mut self, i: usize, value: f64) {
        *self.h.entry(i).or_insert(0.0) += value;
    }

    /// Accumulates into the coupling of the unordered pair `{i, j}`.
    pub fn add_coupling(&mut self, i: usize, j: usize, value: f64) {
        assert_ne!(i, j, "coupling endpoints must differ");
        *self.j.entry((i.min(j), i.max(j))).or_insert(0.0) += value;
    }

    /// Energy of basis state `index` (qubit `k` is bit `k` of the index).
    pub fn energy_of_index(&self, index: usize) -> f64 {
        let spin = |k: usize| if (index >> k) & 1 == 1 { -1.0 } else { 1.0 };
        let fields: f64 = self.h.iter().map(|(&i, &h)| h * spin(i)).sum();
        let couplings: f64 = self
            .j
            .iter()
            .map(|(&(a, b), &j)| j * spin(a) * spin(b))
            .sum();
        self.offset + fields + couplings
    }

    /// Energy of an explicit spin vector.
    pub fn energy(&self, spins: &[i8]) -> f64 {
        let fields: f64 = self.h.iter().map(|(&i, &h)| h * f64::from(spins[i])).sum();
        let couplings: f64 = self
            .j
            .iter()
            .map(|(&(a, b), &j)| j * f64::from(spins[a] * spins[b]))
            .sum();
        self.offset + fields + couplings
    }

    /// Energies of all `2^n` basis states, indexed like a state vector.
    pub fn diagonal(&self) -> Vec<f64> {
        let dim = 1usize << self.n;
        let mut out = vec![self.offset; dim];
        for (&i, &h) in &self.h {
            for (b, e) in out.iter_mut().enumerate() {
                *e += if (b >> i) & 1 == 1 { -h } else { h };
            }
        }
        for (&(a, c), &j) in &self.j {
            for (b, e) in out.iter_mut().enumerate() {
                let parity = ((b >> a) ^ (b >> c)) & 1;
                *e += if parity == 1 { -j } else { j };
            }
        }
        out
    }

    /// Multiplies every coefficient and the offset by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            h: self.h.iter().map(|(&k, &v)| (k, v * factor)).collect(),
            j: self.j.iter().map(|(&k, &v)| (k, v * factor)).collect(),
            offset: self.offset * factor,
        }
    }

    pub fn check_indices(&self) -> Result<(), String> {
        if let Some(i) = self.h.keys().find(|&&i| i >= self.n) {
            return Err(format!("field index {i} out of range for {} qubits", self.n));
        }
        if let Some((a, b)) = self.j.keys().find(|&&(a, b)| a >= self.n || b >= self.n) {
            return Err(format!(
                "coupling ({a}, {b}) out of range for {} qubits",
                self.n
            ));
        }
        Ok(())
    }
}

/// Minimisation-sense QUBO `offset + Σ a_i x_i + Σ b_ij x_i x_j` over `x ∈ {0,1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboModel {
    pub n: usize,
    #[serde(default)]
    pub linear: BTreeMap<usize, f64>,
    #[serde(default, with = "super::pair_map")]
    pub quadratic: BTreeMap<(usize, usize), f64>,
    #[serde(default)]
    pub offset: f64,
}

impl QuboModel {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn add_linear(&mut self, i: usize, value: f64) {
        *self.linear.entry(i).or_insert(0.0) += value;
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) {
        assert_ne!(i, j, "quadratic endpoints must differ");
        *self.quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += value;
    }

    /// Objective of assignment `index` (variable `k` is bit `k`).
    pub fn value_of_index(&self, index: usize) -> f64 {
        let x = |k: usize| (index >> k) & 1 == 1;
        let lin: f64 = self
            .linear
            .iter()
            .filter(|(&i, _)| x(i))
            .map(|(_, &a)| a)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|(&(i, j), _)| x(i) && x(j))
            .map(|(_, &b)| b)
            .sum();
        self.offset + lin + quad
    }
}
