use crate::circuit::{Circuit, Gate};
use crate::coupling::CouplingMap;
use crate::error::{Error, Result};

/// Makes every CX of `c` legal on `m` by inserting SWAPs (three CX each).
///
/// Each non-adjacent CX moves its control along a shortest path until it
/// neighbours the target. SWAPs are never undone: the routed circuit's wires
/// are relabeled so that wire w ends on physical qubit `layout[w]` and holds
/// logical qubit w of `c`. Starting from |0…0⟩ both circuits therefore
/// produce the same logical state.
pub fn route(c: &Circuit, m: &CouplingMap) -> Result<Circuit> {
    let n = c.n_qubits();
    if n != m.n_qubits() {
        return Err(Error::DimensionMismatch { expected: m.n_qubits(), found: n });
    }
    let mut pos = c.layout().to_vec();
    let mut occ = c.inverse_layout();
    let mut physical = Vec::with_capacity(c.len());
    for g in c.gates() {
        if let Gate::Cx { control, target } = *g {
            let (pc, pt) = (pos[control], pos[target]);
            if !m.is_adjacent(pc, pt) {
                let path = m.shortest_path(pc, pt);
                if path.len() < 2 {
                    return Err(Error::Disconnected);
                }
                for w in path[..path.len() - 1].windows(2) {
                    let (a, b) = (w[0], w[1]);
                    physical.extend([Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)]);
                    occ.swap(a, b);
                    pos[occ[a]] = a;
                    pos[occ[b]] = b;
                }
            }
        }
        physical.push(g.map_qubits(|q| pos[q]));
    }
    let gates = physical.into_iter().map(|g| g.map_qubits(|p| occ[p])).collect();
    Circuit::with_layout(n, gates, pos)
}
