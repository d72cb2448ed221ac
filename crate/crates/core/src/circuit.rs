//! Native-gate circuits: the genome the evolutionary search works on.
//!
//! Gates are drawn from {RZ(θ), X, SX, CX}. A [`Circuit`] lists gates on
//! logical qubits and carries a layout mapping each logical qubit to a
//! physical one; only the layout decides whether a CX is legal on a given
//! [`CouplingMap`].

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coupling::CouplingMap;
use crate::error::{Error, Result};

/// Angles below this distance from 0 (mod 2π) count as the identity.
pub const ANGLE_TOLERANCE: f64 = 1e-12;

/// Rotation angle normalized to `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub fn new(theta: f64) -> Self {
        let mut t = theta.rem_euclid(TAU);
        // rem_euclid can round tiny negatives up to exactly 2π
        if t >= TAU {
            t = 0.0;
        }
        Angle(t)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// True when the rotation is the identity up to global phase.
    pub fn is_zero(self) -> bool {
        self.0 < ANGLE_TOLERANCE || TAU - self.0 < ANGLE_TOLERANCE
    }

    pub fn neg(self) -> Self {
        Angle::new(TAU - self.0)
    }
}

impl From<f64> for Angle {
    fn from(theta: f64) -> Self {
        Angle::new(theta)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    Rz,
    X,
    Sx,
    Cx,
}

impl GateKind {
    pub const ALL: [GateKind; 4] = [GateKind::Rz, GateKind::X, GateKind::Sx, GateKind::Cx];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Rz { qubit: usize, theta: Angle },
    X { qubit: usize },
    Sx { qubit: usize },
    Cx { control: usize, target: usize },
}

impl Gate {
    pub fn rz(qubit: usize, theta: f64) -> Self {
        Gate::Rz { qubit, theta: Angle::new(theta) }
    }

    pub fn x(qubit: usize) -> Self {
        Gate::X { qubit }
    }

    pub fn sx(qubit: usize) -> Self {
        Gate::Sx { qubit }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate::Cx { control, target }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Rz { .. } => GateKind::Rz,
            Gate::X { .. } => GateKind::X,
            Gate::Sx { .. } => GateKind::Sx,
            Gate::Cx { .. } => GateKind::Cx,
        }
    }

    /// Qubits in gate order: `[q]`, or `[control, target]` for CX.
    pub fn qubits(&self) -> QubitList {
        match *self {
            Gate::Rz { qubit, .. } | Gate::X { qubit } | Gate::Sx { qubit } => QubitList::One(qubit),
            Gate::Cx { control, target } => QubitList::Two(control, target),
        }
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.qubits().iter().any(|x| x == q)
    }

    pub fn param(&self) -> Option<f64> {
        match self {
            Gate::Rz { theta, .. } => Some(theta.radians()),
            _ => None,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cx { .. })
    }

    /// Same gate with every qubit index passed through `f`.
    pub fn map_qubits(&self, mut f: impl FnMut(usize) -> usize) -> Gate {
        match *self {
            Gate::Rz { qubit, theta } => Gate::Rz { qubit: f(qubit), theta },
            Gate::X { qubit } => Gate::X { qubit: f(qubit) },
            Gate::Sx { qubit } => Gate::Sx { qubit: f(qubit) },
            Gate::Cx { control, target } => Gate::Cx { control: f(control), target: f(target) },
        }
    }

    /// Inverse expressed in native gates, equal up to global phase.
    ///
    /// SX† is not native and is emitted as RZ(π)·SX·RZ(π).
    pub fn inverse(&self) -> Vec<Gate> {
        match *self {
            Gate::Rz { qubit, theta } => vec![Gate::Rz { qubit, theta: theta.neg() }],
            Gate::X { .. } | Gate::Cx { .. } => vec![*self],
            Gate::Sx { qubit } => vec![Gate::rz(qubit, PI), Gate::sx(qubit), Gate::rz(qubit, PI)],
        }
    }
}

/// One or two qubit indices without allocating.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitList {
    One(usize),
    Two(usize, usize),
}

impl QubitList {
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let (a, b) = match self {
            QubitList::One(q) => (q, None),
            QubitList::Two(c, t) => (c, Some(t)),
        };
        std::iter::once(a).chain(b)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // `{}` on f64 prints the shortest string that parses back to the same bits.
            Gate::Rz { qubit, theta } => write!(f, "rz {qubit} {}", theta.radians()),
            Gate::X { qubit } => write!(f, "x {qubit}"),
            Gate::Sx { qubit } => write!(f, "sx {qubit}"),
            Gate::Cx { control, target } => write!(f, "cx {control} {target}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    layout: Vec<usize>,
}

impl Circuit {
    /// Circuit with the identity layout. Fails if a gate touches a qubit
    /// outside `0..n_qubits` or a CX uses the same qubit twice.
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        Self::with_layout(n_qubits, gates, (0..n_qubits).collect())
    }

    pub fn with_layout(n_qubits: usize, gates: Vec<Gate>, layout: Vec<usize>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidCircuit("zero qubits".into()));
        }
        check_layout(n_qubits, &layout)?;
        for (i, g) in gates.iter().enumerate() {
            for q in g.qubits().iter() {
                if q >= n_qubits {
                    return Err(Error::InvalidCircuit(format!("gate {i} ({g}) touches qubit {q} of {n_qubits}")));
                }
            }
            if let Gate::Cx { control, target } = g {
                if control == target {
                    return Err(Error::InvalidCircuit(format!("gate {i}: cx with equal qubits")));
                }
            }
        }
        Ok(Self { n_qubits, gates, layout })
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self::new(n_qubits, Vec::new()).expect("empty circuit is valid")
    }

    /// Internal constructor for operators that only rearrange already valid
    /// gates of the same register.
    pub(crate) fn from_parts(n_qubits: usize, gates: Vec<Gate>, layout: Vec<usize>) -> Self {
        debug_assert!(Self::with_layout(n_qubits, gates.clone(), layout.clone()).is_ok());
        Self { n_qubits, gates, layout }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `layout[logical] = physical`.
    pub fn layout(&self) -> &[usize] {
        &self.layout
    }

    /// `inverse[physical] = logical`.
    pub fn inverse_layout(&self) -> Vec<usize> {
        invert_permutation(&self.layout)
    }

    /// Same register and layout, new gates.
    pub fn with_gates(&self, gates: Vec<Gate>) -> Result<Self> {
        Self::with_layout(self.n_qubits, gates, self.layout.clone())
    }

    pub(crate) fn replace_gates(&self, gates: Vec<Gate>) -> Self {
        Self::from_parts(self.n_qubits, gates, self.layout.clone())
    }

    pub fn into_gates(self) -> Vec<Gate> {
        self.gates
    }

    /// Weighted length: one per single-qubit gate, ten per CX.
    pub fn cost(&self) -> u64 {
        self.gates.iter().map(|g| if g.is_two_qubit() { 10 } else { 1 }).sum()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Checks every CX against `map` after applying the layout.
    pub fn validate(&self, map: &CouplingMap) -> std::result::Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        if map.n_qubits() != self.n_qubits {
            violations.push(Violation {
                gate_index: None,
                reason: ViolationReason::SizeMismatch { circuit: self.n_qubits, coupling: map.n_qubits() },
            });
            return Err(violations);
        }
        for (i, g) in self.gates.iter().enumerate() {
            let mut in_range = true;
            for q in g.qubits().iter() {
                if q >= self.n_qubits {
                    in_range = false;
                    violations.push(Violation { gate_index: Some(i), reason: ViolationReason::OutOfRange { qubit: q } });
                }
            }
            if let (true, Gate::Cx { control, target }) = (in_range, g) {
                let (pc, pt) = (self.layout[*control], self.layout[*target]);
                if !map.is_adjacent(pc, pt) {
                    violations.push(Violation {
                        gate_index: Some(i),
                        reason: ViolationReason::NotAdjacent { physical: (pc, pt) },
                    });
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Peephole simplification. See [`clean`].
    pub fn clean(&self) -> Circuit {
        clean(self)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

fn check_layout(n_qubits: usize, layout: &[usize]) -> Result<()> {
    if layout.len() != n_qubits {
        return Err(Error::InvalidCircuit(format!("layout has {} entries for {n_qubits} qubits", layout.len())));
    }
    let mut seen = vec![false; n_qubits];
    for &p in layout {
        if p >= n_qubits || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidCircuit(format!("layout {layout:?} is not a permutation")));
        }
    }
    Ok(())
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// `None` for circuit-level problems.
    pub gate_index: Option<usize>,
    pub reason: ViolationReason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationReason {
    NotAdjacent { physical: (usize, usize) },
    OutOfRange { qubit: usize },
    SizeMismatch { circuit: usize, coupling: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(i) = self.gate_index {
            write!(f, "gate {i}: ")?;
        }
        match &self.reason {
            ViolationReason::NotAdjacent { physical: (a, b) } => {
                write!(f, "cx on non-adjacent physical qubits {a} and {b}")
            }
            ViolationReason::OutOfRange { qubit } => write!(f, "qubit {qubit} out of range"),
            ViolationReason::SizeMismatch { circuit, coupling } => {
                write!(f, "circuit has {circuit} qubits, coupling map {coupling}")
            }
        }
    }
}

/// Removes adjacent inverse pairs and merges consecutive RZ rotations until
/// nothing changes.
///
/// Two gates are adjacent when no gate between them touches their qubits,
/// so cancellations see through gates on other wires. The rewrite rules are
/// X·X → I, CX·CX → I (same control and target), RZ(a)·RZ(b) → RZ(a+b)
/// (dropped when the sum is 0 mod 2π), and SX·RZ(π)·SX → RZ(π), which
/// catches SX next to its native inverse RZ(π)·SX·RZ(π). Every rule
/// shortens the circuit, so cost never increases and the action is kept up
/// to global phase.
pub fn clean(c: &Circuit) -> Circuit {
    let mut gates = c.gates.clone();
    loop {
        let next = clean_pass(c.n_qubits, &gates);
        if next.len() == gates.len() {
            return c.replace_gates(next);
        }
        gates = next;
    }
}

fn clean_pass(n_qubits: usize, gates: &[Gate]) -> Vec<Gate> {
    let mut out: Vec<Option<Gate>> = Vec::with_capacity(gates.len());
    // live gate indices touching each wire, most recent last
    let mut wires: Vec<Vec<usize>> = vec![Vec::new(); n_qubits];

    fn top(wires: &[Vec<usize>], q: usize) -> Option<usize> {
        wires[q].last().copied()
    }

    fn remove(out: &mut [Option<Gate>], wires: &mut [Vec<usize>], idx: usize) {
        let g = out[idx].take().expect("live gate");
        for q in g.qubits().iter() {
            let popped = wires[q].pop();
            debug_assert_eq!(popped, Some(idx));
        }
    }

    fn push(out: &mut Vec<Option<Gate>>, wires: &mut [Vec<usize>], g: Gate) {
        let idx = out.len();
        for q in g.qubits().iter() {
            wires[q].push(idx);
        }
        out.push(Some(g));
    }

    fn add(out: &mut Vec<Option<Gate>>, wires: &mut [Vec<usize>], g: Gate) {
        match g {
            Gate::Rz { qubit, theta } => {
                if let Some(i) = top(wires, qubit) {
                    if let Some(Gate::Rz { theta: prev, .. }) = out[i] {
                        remove(out, wires, i);
                        let merged = Angle::new(prev.radians() + theta.radians());
                        if !merged.is_zero() {
                            add(out, wires, Gate::Rz { qubit, theta: merged });
                        }
                        return;
                    }
                }
                if !theta.is_zero() {
                    push(out, wires, g);
                }
            }
            Gate::X { qubit } => {
                if let Some(i) = top(wires, qubit) {
                    if let Some(Gate::X { .. }) = out[i] {
                        remove(out, wires, i);
                        return;
                    }
                }
                push(out, wires, g);
            }
            Gate::Sx { qubit } => {
                // SX · RZ(π) · SX = RZ(π) up to phase
                if let Some(i) = top(wires, qubit) {
                    if let Some(Gate::Rz { theta, .. }) = out[i] {
                        if (theta.radians() - PI).abs() < ANGLE_TOLERANCE {
                            let below = wires[qubit].len().checked_sub(2).map(|k| wires[qubit][k]);
                            if let Some(j) = below {
                                if let Some(Gate::Sx { .. }) = out[j] {
                                    remove(out, wires, i);
                                    remove(out, wires, j);
                                    add(out, wires, Gate::rz(qubit, PI));
                                    return;
                                }
                            }
                        }
                    }
                }
                push(out, wires, g);
            }
            Gate::Cx { control, target } => {
                if let (Some(i), Some(j)) = (top(wires, control), top(wires, target)) {
                    if i == j {
                        if let Some(Gate::Cx { control: c2, target: t2 }) = out[i] {
                            if c2 == control && t2 == target {
                                remove(out, wires, i);
                                return;
                            }
                        }
                    }
                }
                push(out, wires, g);
            }
        }
    }

    for &g in gates {
        add(&mut out, &mut wires, g);
    }
    out.into_iter().flatten().collect()
}

/// Upper bound on CNOTs for exact preparation of any `n`-qubit state with
/// all-to-all connectivity, rounded up. For `n ≤ 4` the known exact values
/// 1, 3 and 9 are used since the closed form only holds for odd `n ≥ 5`.
pub fn cnot_upper_bound(n: usize) -> Result<u64> {
    match n {
        0 | 1 => Err(Error::Domain(format!("cnot_upper_bound needs n >= 2, got {n}"))),
        2 => Ok(1),
        3 => Ok(3),
        4 => Ok(9),
        n if n > 60 => Err(Error::Domain(format!("cnot_upper_bound overflows for n = {n}"))),
        n => {
            // 24 × bound, evaluated exactly in integers
            let pow = 1i128 << n;
            let scaled = if n % 2 == 1 {
                23 * pow - 36 * (1i128 << ((n + 1) / 2)) + 32
            } else {
                23 * pow - 48 * (1i128 << (n / 2)) + 40
            };
            Ok(((scaled + 23) / 24) as u64)
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        write!(f, "layout")?;
        for p in &self.layout {
            write!(f, " {p}")?;
        }
        writeln!(f)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    /// Parses the text format written by `Display`: a `qubits <n>` header,
    /// an optional `layout ...` line (identity when absent), then one gate
    /// per line. Blank lines and `#` comments are skipped.
    fn from_str(text: &str) -> Result<Self> {
        let mut n_qubits: Option<usize> = None;
        let mut layout: Option<Vec<usize>> = None;
        let mut gates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let Some(n) = n_qubits else {
                match fields.as_slice() {
                    ["qubits", v] => {
                        let n: usize =
                            v.parse().map_err(|_| Error::parse(line_no, format!("bad qubit count {v:?}")))?;
                        if n == 0 || n > 64 {
                            return Err(Error::parse(line_no, format!("qubit count {n} out of range")));
                        }
                        n_qubits = Some(n);
                        continue;
                    }
                    _ => return Err(Error::parse(line_no, "expected `qubits <n>` header")),
                }
            };
            let qubit = |s: &str| -> Result<usize> {
                let q: usize = s.parse().map_err(|_| Error::parse(line_no, format!("bad qubit index {s:?}")))?;
                if q >= n {
                    return Err(Error::parse(line_no, format!("qubit {q} out of range for {n} qubits")));
                }
                Ok(q)
            };
            match fields.as_slice() {
                ["layout", rest @ ..] => {
                    if layout.is_some() || !gates.is_empty() {
                        return Err(Error::parse(line_no, "layout must follow the qubits header"));
                    }
                    let perm = rest.iter().map(|s| qubit(s)).collect::<Result<Vec<_>>>()?;
                    check_layout(n, &perm).map_err(|e| Error::parse(line_no, e.to_string()))?;
                    layout = Some(perm);
                }
                ["rz", q, theta] => {
                    let q = qubit(q)?;
                    let theta: f64 =
                        theta.parse().map_err(|_| Error::parse(line_no, format!("bad angle {theta:?}")))?;
                    if !theta.is_finite() {
                        return Err(Error::parse(line_no, "angle must be finite"));
                    }
                    gates.push(Gate::rz(q, theta));
                }
                ["x", q] => gates.push(Gate::x(qubit(q)?)),
                ["sx", q] => gates.push(Gate::sx(qubit(q)?)),
                ["cx", c, t] => {
                    let (c, t) = (qubit(c)?, qubit(t)?);
                    if c == t {
                        return Err(Error::parse(line_no, "cx control equals target"));
                    }
                    gates.push(Gate::cx(c, t));
                }
                _ => return Err(Error::parse(line_no, format!("unrecognized line {line:?}"))),
            }
        }
        let n = n_qubits.ok_or_else(|| Error::parse(0, "missing `qubits <n>` header"))?;
        Circuit::with_layout(n, gates, layout.unwrap_or_else(|| (0..n).collect()))
    }
}
