use serde_json::{json, Value};

use super::{build_routing, drive, initial_symbolic_state, MachineError, Scheduler, TraceEvent};
use crate::quantum::{GateLibrary, Permutation, Register};
use crate::typing::Derivation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitInput {
    Free,
    Bit(bool),
}

/// The gates fired by a canonical run, on the machine's slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub inputs: Vec<CircuitInput>,
    /// Gate names with 1-based wires, in firing order.
    pub gates: Vec<(String, Vec<usize>)>,
    /// Slot `i` becomes output qubit `σ(i)`.
    pub output_permutation: Permutation,
}

impl Circuit {
    pub fn qubit_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn free_inputs(&self) -> usize {
        self.inputs.iter().filter(|i| **i == CircuitInput::Free).count()
    }

    /// `output_order[j]` is the 1-based slot that becomes output qubit `j + 1`.
    pub fn output_order(&self) -> Vec<usize> {
        self.output_permutation.inverse().images()
    }

    pub fn to_json(&self) -> Value {
        let inputs: Vec<Value> = self
            .inputs
            .iter()
            .enumerate()
            .map(|(i, inp)| match inp {
                CircuitInput::Free => json!({ "slot": i + 1, "kind": "free" }),
                CircuitInput::Bit(b) => json!({ "slot": i + 1, "kind": "bit", "value": u8::from(*b) }),
            })
            .collect();
        let gates: Vec<Value> =
            self.gates.iter().map(|(name, wires)| json!({ "name": name, "wires": wires })).collect();
        json!({
            "qubits": self.qubit_count(),
            "inputs": inputs,
            "gates": gates,
            "output_order": self.output_order(),
        })
    }

    /// One gate per line (`CNOT 1 2`). Constant inputs come first as
    /// `bit SLOT VALUE` lines; a trailing `output` line lists
    /// [`Circuit::output_order`] when it is not the identity.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, inp) in self.inputs.iter().enumerate() {
            if let CircuitInput::Bit(b) = inp {
                out.push_str(&format!("bit {} {}\n", i + 1, u8::from(*b)));
            }
        }
        for (name, wires) in &self.gates {
            out.push_str(name);
            for w in wires {
                out.push_str(&format!(" {w}"));
            }
            out.push('\n');
        }
        if !self.output_permutation.is_identity() {
            let order: Vec<String> = self.output_order().iter().map(usize::to_string).collect();
            out.push_str(&format!("output {}\n", order.join(" ")));
        }
        out
    }
}

/// Runs the machine without a register under the canonical scheduler and
/// records the gates it fires.
pub fn extract_circuit(d: &Derivation) -> Result<Circuit, MachineError> {
    let g = build_routing(d);
    let mut s = initial_symbolic_state(&g)?;
    // Symbolic runs never look gates up.
    let trace = drive(&g, &mut s, &mut Scheduler::canonical(), &GateLibrary::builtins())?;
    let gates = trace
        .into_iter()
        .filter_map(|e| match e {
            TraceEvent::Fire { gate, wires, .. } => Some((gate, wires)),
            TraceEvent::Move { .. } => None,
        })
        .collect();
    let mut inputs = vec![CircuitInput::Free; g.input_count()];
    inputs.extend(g.bits.iter().map(|&b| CircuitInput::Bit(b)));
    let output_permutation = s.sigma().ok_or(MachineError::Deadlock)?;
    Ok(Circuit { inputs, gates, output_permutation })
}

/// Applies the circuit to `input` (the free wires, in order).
pub fn eval_circuit(c: &Circuit, input: &Register, gates: &GateLibrary) -> Result<Register, MachineError> {
    if input.qubit_count() != c.free_inputs() {
        return Err(MachineError::InputArityMismatch { expected: c.free_inputs(), found: input.qubit_count() });
    }
    // Free wires first, then constants; then move each to its slot.
    let consts: Vec<bool> = c
        .inputs
        .iter()
        .filter_map(|i| match i {
            CircuitInput::Bit(b) => Some(*b),
            CircuitInput::Free => None,
        })
        .collect();
    let reg = input.tensor(&Register::basis(&consts));
    let mut slots: Vec<usize> = (0..c.inputs.len()).filter(|&i| c.inputs[i] == CircuitInput::Free).collect();
    slots.extend((0..c.inputs.len()).filter(|&i| c.inputs[i] != CircuitInput::Free));
    let mut images = vec![0; slots.len()];
    for (k, &slot) in slots.iter().enumerate() {
        images[slot] = k + 1;
    }
    let layout = Permutation::from_images(&images).expect("slots form a permutation");
    let mut reg = reg.apply_permutation(&layout)?;
    for (name, wires) in &c.gates {
        let g = gates.get(name).ok_or_else(|| MachineError::UnknownGate(name.clone()))?;
        reg.apply_lifted_in_place(g, wires)?;
    }
    Ok(reg.apply_permutation(&c.output_permutation.inverse())?)
}
