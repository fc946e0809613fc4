//! State vectors, the gate library, lifted gate application and qubit
//! permutations.
//!
//! Basis indices are big-endian: in an `n`-qubit register, qubit 1 is the most
//! significant bit of the index and qubit `n` the least significant. Wires and
//! qubits are numbered from 1 everywhere in the public API.

mod gates;
mod text;

use num_complex::Complex64;
use thiserror::Error;

pub use gates::{Gate, GateLibrary};
pub use text::{format_amplitude, format_register, parse_register};

/// Tolerance for unitarity of gate matrices.
pub const UNITARY_TOLERANCE: f64 = 1e-9;
/// Tolerance on the norm of a register.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("wire {wire} is out of range for a {qubits}-qubit register")]
    WireOutOfRange { wire: usize, qubits: usize },
    #[error("wire {0} is used twice")]
    DuplicateWire(usize),
    #[error("gate {gate} has arity {expected} but was given {found} wires")]
    ArityMismatch { gate: String, expected: usize, found: usize },
    #[error("permutation on {permutation} elements applied to a {qubits}-qubit register")]
    SizeMismatch { permutation: usize, qubits: usize },
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("malformed amplitude at offset {offset}: {message}")]
    MalformedAmplitude { offset: usize, message: String },
    #[error("register is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("basis states of different widths ({first} and {other})")]
    InconsistentBitWidth { first: usize, other: usize },
    #[error("matrix of gate {name} is not unitary (deviation {deviation:e})")]
    NonUnitaryMatrix { name: String, deviation: f64 },
    #[error("gate {name}: {message}")]
    BadDimension { name: String, message: String },
    #[error("gate {0} is defined more than once")]
    NameClash(String),
    #[error("invalid gate library: {0}")]
    InvalidLibrary(String),
}

/// A normalized vector in `C^(2^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl Register {
    /// Builds a register, checking length and norm.
    pub fn new(amps: Vec<Complex64>) -> Result<Register, QuantumError> {
        let r = Register::from_raw(amps)?;
        let norm = r.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QuantumError::NotNormalized { norm });
        }
        Ok(r)
    }

    /// Builds a register without checking the norm.
    pub fn from_raw(amps: Vec<Complex64>) -> Result<Register, QuantumError> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(QuantumError::BadLength(len));
        }
        Ok(Register { qubits: len.trailing_zeros() as usize, amps })
    }

    /// The 0-qubit register, unit for [`Register::tensor`].
    pub fn empty() -> Register {
        Register { qubits: 0, amps: vec![Complex64::new(1.0, 0.0)] }
    }

    /// `|b_1 … b_n>`.
    pub fn basis(bits: &[bool]) -> Register {
        let n = bits.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[basis_index(bits)] = Complex64::new(1.0, 0.0);
        Register { qubits: n, amps }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: &[bool]) -> Complex64 {
        assert_eq!(bits.len(), self.qubits, "bit string width");
        self.amps[basis_index(bits)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product; the qubits of `self` come first.
    pub fn tensor(&self, other: &Register) -> Register {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Register { qubits: self.qubits + other.qubits, amps }
    }

    /// Applies `gate` with its wire `k` acting on qubit `wires[k]`, identity
    /// elsewhere.
    pub fn apply_lifted(&self, gate: &Gate, wires: &[usize]) -> Result<Register, QuantumError> {
        let mut out = self.clone();
        out.apply_lifted_in_place(gate, wires)?;
        Ok(out)
    }

    pub fn apply_lifted_in_place(
        &mut self,
        gate: &Gate,
        wires: &[usize],
    ) -> Result<(), QuantumError> {
        let n = self.qubits;
        let m = gate.arity();
        if wires.len() != m {
            return Err(QuantumError::ArityMismatch {
                gate: gate.name().to_string(),
                expected: m,
                found: wires.len(),
            });
        }
        let mut all = 0usize;
        let mut masks = Vec::with_capacity(m);
        for &w in wires {
            if w == 0 || w > n {
                return Err(QuantumError::WireOutOfRange { wire: w, qubits: n });
            }
            let mask = 1usize << (n - w);
            if all & mask != 0 {
                return Err(QuantumError::DuplicateWire(w));
            }
            all |= mask;
            masks.push(mask);
        }
        let dim = 1usize << m;
        // offsets[s]: where sub-basis state s of the gate sits inside the register index.
        let offsets: Vec<usize> = (0..dim)
            .map(|s| {
                (0..m)
                    .filter(|k| s & (1 << (m - 1 - k)) != 0)
                    .map(|k| masks[k])
                    .sum()
            })
            .collect();
        let matrix = gate.matrix();
        let mut local = vec![Complex64::new(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (s, off) in offsets.iter().enumerate() {
                local[s] = self.amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = &matrix[r * dim..(r + 1) * dim];
                self.amps[base + off] = row.iter().zip(&local).map(|(a, b)| a * b).sum();
            }
        }
        Ok(())
    }

    /// Sends `|b_1 … b_n>` to `|b_p(1) … b_p(n)>`.
    pub fn apply_permutation(&self, p: &Permutation) -> Result<Register, QuantumError> {
        let n = self.qubits;
        if p.len() != n {
            return Err(QuantumError::SizeMismatch { permutation: p.len(), qubits: n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            let mut target = 0usize;
            for i in 0..n {
                let src = p.map[i];
                if idx & (1 << (n - 1 - src)) != 0 {
                    target |= 1 << (n - 1 - i);
                }
            }
            amps[target] = *a;
        }
        Ok(Register { qubits: n, amps })
    }

    /// Largest entrywise modulus of the difference; `None` on width mismatch.
    pub fn max_distance(&self, other: &Register) -> Option<f64> {
        if self.qubits != other.qubits {
            return None;
        }
        Some(
            self.amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        )
    }

    pub fn approx_eq(&self, other: &Register, tol: f64) -> bool {
        self.max_distance(other).is_some_and(|d| d <= tol)
    }
}

/// Big-endian index of a bit string.
pub fn basis_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// Bit string of a big-endian index.
pub fn index_bits(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| index & (1 << (n - 1 - i)) != 0).collect()
}

/// Lifted application `U^{wires}` to `r`.
pub fn apply_lifted(g: &Gate, wires: &[usize], r: &Register) -> Result<Register, QuantumError> {
    r.apply_lifted(g, wires)
}

pub fn apply_permutation(p: &Permutation, r: &Register) -> Result<Register, QuantumError> {
    r.apply_permutation(p)
}

pub fn tensor(r1: &Register, r2: &Register) -> Register {
    r1.tensor(r2)
}

/// A bijection on `{1, …, n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    // 0-based images
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Permutation {
        Permutation { map: (0..n).collect() }
    }

    /// From 1-based images `[p(1), …, p(n)]`; `None` if not a bijection.
    pub fn from_images(images: &[usize]) -> Option<Permutation> {
        let n = images.len();
        let mut seen = vec![false; n];
        let mut map = Vec::with_capacity(n);
        for &i in images {
            if i == 0 || i > n || seen[i - 1] {
                return None;
            }
            seen[i - 1] = true;
            map.push(i - 1);
        }
        Some(Permutation { map })
    }

    /// Transposition of `a` and `b` (1-based) on `n` elements.
    pub fn swap(n: usize, a: usize, b: usize) -> Permutation {
        let mut p = Permutation::identity(n);
        p.map.swap(a - 1, b - 1);
        p
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `p(i)`, 1-based.
    pub fn image(&self, i: usize) -> usize {
        self.map[i - 1] + 1
    }

    /// 1-based images in order.
    pub fn images(&self) -> Vec<usize> {
        self.map.iter().map(|i| i + 1).collect()
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            map[j] = i;
        }
        Permutation { map }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// The permutation whose register operator is `self`'s operator applied
    /// after `inner`'s, i.e. `apply(compose(p, q)) = apply(p) ∘ apply(q)`.
    /// As a map it sends `i` to `inner(self(i))`.
    pub fn compose(&self, inner: &Permutation) -> Permutation {
        assert_eq!(self.len(), inner.len(), "composing permutations of different sizes");
        Permutation { map: self.map.iter().map(|&i| inner.map[i]).collect() }
    }

    /// Reorders a sequence: `p(a_1, …, a_n) = a_p(1), …, a_p(n)`.
    pub fn permute<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.map.iter().map(|&i| items[i].clone()).collect()
    }
}
