use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{QuantumError, UNITARY_TOLERANCE};

/// A unitary on `arity` qubits, stored row-major in the big-endian basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    name: String,
    arity: usize,
    matrix: Vec<Complex64>,
}

impl Gate {
    /// Validates dimension and unitarity.
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        matrix: Vec<Complex64>,
    ) -> Result<Gate, QuantumError> {
        let name = name.into();
        if arity == 0 {
            return Err(QuantumError::BadDimension { name, message: "arity must be positive".into() });
        }
        if arity > 16 {
            return Err(QuantumError::BadDimension { name, message: format!("arity {arity} is too large") });
        }
        let dim = 1usize << arity;
        if matrix.len() != dim * dim {
            return Err(QuantumError::BadDimension {
                name,
                message: format!("expected a {dim}x{dim} matrix, got {} entries", matrix.len()),
            });
        }
        let gate = Gate { name, arity, matrix };
        let deviation = gate.unitarity_deviation();
        if deviation > UNITARY_TOLERANCE {
            return Err(QuantumError::NonUnitaryMatrix { name: gate.name, deviation });
        }
        Ok(gate)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    /// Row-major entries.
    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    /// `max |(M†M - I)_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.entry(k, i).conj() * self.entry(k, j);
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

#[derive(Serialize, Deserialize)]
struct LibraryFile {
    gates: Vec<GateEntry>,
}

#[derive(Serialize, Deserialize)]
struct GateEntry {
    name: String,
    arity: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

/// Named gates available to terms. Built-ins are always present.
#[derive(Debug, Clone)]
pub struct GateLibrary {
    gates: BTreeMap<String, Gate>,
}

impl Default for GateLibrary {
    fn default() -> Self {
        GateLibrary::builtins()
    }
}

fn real_matrix(rows: &[&[f64]]) -> Vec<Complex64> {
    rows.iter().flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0))).collect()
}

fn diagonal(entries: &[Complex64]) -> Vec<Complex64> {
    let d = entries.len();
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    for (i, e) in entries.iter().enumerate() {
        m[i * d + i] = *e;
    }
    m
}

impl GateLibrary {
    pub const BUILTIN_NAMES: [&'static str; 9] = ["X", "Y", "Z", "H", "S", "T", "CNOT", "CZ", "SWAP"];

    /// X, Y, Z, H, S, T, CNOT, CZ and SWAP. CNOT's control is its first wire.
    pub fn builtins() -> GateLibrary {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let h = FRAC_1_SQRT_2;
        let defs: Vec<(&str, usize, Vec<Complex64>)> = vec![
            ("X", 1, real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]])),
            ("Y", 1, vec![0.0 * one, -i, i, 0.0 * one]),
            ("Z", 1, real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]])),
            ("H", 1, real_matrix(&[&[h, h], &[h, -h]])),
            ("S", 1, diagonal(&[one, i])),
            ("T", 1, diagonal(&[one, Complex64::from_polar(1.0, FRAC_PI_4)])),
            (
                "CNOT",
                2,
                real_matrix(&[
                    &[1.0, 0.0, 0.0, 0.0],
                    &[0.0, 1.0, 0.0, 0.0],
                    &[0.0, 0.0, 0.0, 1.0],
                    &[0.0, 0.0, 1.0, 0.0],
                ]),
            ),
            ("CZ", 2, diagonal(&[one, one, one, -one])),
            (
                "SWAP",
                2,
                real_matrix(&[
                    &[1.0, 0.0, 0.0, 0.0],
                    &[0.0, 0.0, 1.0, 0.0],
                    &[0.0, 1.0, 0.0, 0.0],
                    &[0.0, 0.0, 0.0, 1.0],
                ]),
            ),
        ];
        let gates = defs
            .into_iter()
            .map(|(name, arity, m)| {
                let g = Gate::new(name, arity, m).expect("built-in gates are unitary");
                (name.to_string(), g)
            })
            .collect();
        GateLibrary { gates }
    }

    /// Built-ins plus the gates of a JSON library file.
    pub fn load(config: &str) -> Result<GateLibrary, QuantumError> {
        let mut lib = GateLibrary::builtins();
        lib.merge(config)?;
        Ok(lib)
    }

    /// Adds the gates of a JSON library file to this library.
    pub fn merge(&mut self, config: &str) -> Result<(), QuantumError> {
        let file: LibraryFile =
            serde_json::from_str(config).map_err(|e| QuantumError::InvalidLibrary(e.to_string()))?;
        for entry in file.gates {
            if !entry.name.starts_with(|c: char| c.is_uppercase())
                || !entry.name.chars().all(|c| c.is_alphanumeric() || c == '_')
            {
                return Err(QuantumError::InvalidLibrary(format!(
                    "gate name `{}` must be an identifier starting with an uppercase letter",
                    entry.name
                )));
            }
            if entry.arity == 0 || entry.arity > 16 {
                return Err(QuantumError::BadDimension {
                    name: entry.name,
                    message: format!("unsupported arity {}", entry.arity),
                });
            }
            let dim = 1usize << entry.arity;
            if entry.matrix.len() != dim || entry.matrix.iter().any(|row| row.len() != dim) {
                return Err(QuantumError::BadDimension {
                    name: entry.name,
                    message: format!("arity {} requires a {dim}x{dim} matrix", entry.arity),
                });
            }
            if self.gates.contains_key(&entry.name) {
                return Err(QuantumError::NameClash(entry.name));
            }
            let matrix = entry
                .matrix
                .iter()
                .flat_map(|row| row.iter().map(|[re, im]| Complex64::new(*re, *im)))
                .collect();
            let gate = Gate::new(entry.name.clone(), entry.arity, matrix)?;
            self.gates.insert(entry.name, gate);
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Gate> {
        self.gates.get(name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.gates.get(name).map(Gate::arity)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Gate> {
        self.gates.values()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}
