"""Classical reversible-gate engine over per-molecule bit registers.

The model is a ladder: a row of computation bits and a parallel row of
rapidly-relaxing reset (RRTR) bits. Gates are CNOT, SWAP, a
zero-controlled SWAP, and a column-wise RESET that swaps computation
bits with their thermal neighbours.

For throughput the register is batched: position i is stored as a packed
machine-word bitset across all molecules in the batch, so one gate is a
handful of word-wide boolean operations regardless of batch size. A
single-molecule register is simply a batch of one.

Each position additionally carries a provenance tag (purification level,
dirty, or supervisor). Tags travel with bits through SWAP/ZCSWAP; CNOT
is the compression comparator and rewrites the tags of its operands;
RESET restores tags to level 0. Tags are simulation metadata only - they
never influence bit values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

__all__ = [
    "PROV_DIRTY",
    "PROV_SUPERVISOR",
    "Cnot",
    "Swap",
    "ZcSwap",
    "Reset",
    "Gate",
    "Marker",
    "Schedule",
    "StepCounter",
    "GateError",
    "Register",
    "new_register",
    "apply_gate",
    "run_schedule",
    "validate_schedule",
    "schedule_to_text",
    "schedule_from_text",
]

PROV_DIRTY = 254
PROV_SUPERVISOR = 255


class GateError(ValueError):
    """A gate is malformed for the register it is applied to."""


@dataclass(frozen=True)
class Cnot:
    control: int
    target: int
    KIND = "CNOT"

    def positions(self) -> tuple[int, ...]:
        return (self.control, self.target)

    def line(self) -> str:
        return f"CNOT {self.control} {self.target}"


@dataclass(frozen=True)
class Swap:
    a: int
    b: int
    KIND = "SWAP"

    def positions(self) -> tuple[int, ...]:
        return (self.a, self.b)

    def line(self) -> str:
        return f"SWAP {self.a} {self.b}"


@dataclass(frozen=True)
class ZcSwap:
    """Swap a and b on molecules whose zero_control bit reads 0."""

    zero_control: int
    a: int
    b: int
    KIND = "ZCSWAP"

    def positions(self) -> tuple[int, ...]:
        return (self.zero_control, self.a, self.b)

    def line(self) -> str:
        return f"ZCSWAP {self.zero_control} {self.a} {self.b}"


@dataclass(frozen=True)
class Reset:
    """Column-wise reset: swap [start, start+length) with the RRTR row."""

    start: int
    length: int
    KIND = "RESET"

    def positions(self) -> tuple[int, ...]:
        return tuple(range(self.start, self.start + self.length))

    def line(self) -> str:
        return f"RESET {self.start} {self.length}"


Gate = Union[Cnot, Swap, ZcSwap, Reset]


@dataclass(frozen=True)
class Marker:
    """A non-gate annotation line; serialized as a '# ...' comment."""

    text: str


@dataclass
class Schedule:
    """An ordered, data-independent list of gates plus marker lines."""

    items: list[Union[Gate, Marker]] = field(default_factory=list)

    def gates(self) -> list[Gate]:
        return [g for g in self.items if not isinstance(g, Marker)]

    def step_total(self, costs: Optional[dict[str, int]] = None) -> int:
        costs = costs if costs is not None else DEFAULT_GATE_COSTS
        return sum(costs[g.KIND] for g in self.gates())

    def reset_rows(self) -> int:
        """Total fresh rows a run will draw from the reset pool."""
        return sum(g.length for g in self.gates() if isinstance(g, Reset))

    def __len__(self) -> int:
        return len(self.items)


#: One time step per gate; a RESET of any width is one parallel step.
DEFAULT_GATE_COSTS = {"CNOT": 1, "SWAP": 1, "ZCSWAP": 1, "RESET": 1}


@dataclass
class StepCounter:
    """Accumulates time steps with configurable per-gate-kind costs."""

    steps: int = 0
    gate_costs: dict[str, int] = field(
        default_factory=lambda: dict(DEFAULT_GATE_COSTS)
    )

    def add(self, gate: Gate) -> None:
        self.steps += self.gate_costs[gate.KIND]


def _pack_rows(bits: np.ndarray, words: int) -> np.ndarray:
    """Pack a bool array (rows, molecules) into uint64 words (rows, words)."""
    rows, n_mol = bits.shape
    padded = np.zeros((rows, words * 64), dtype=np.uint8)
    padded[:, :n_mol] = bits
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64)


def _unpack_row(row: np.ndarray, n_mol: int) -> np.ndarray:
    """Unpack one uint64 word row back to a bool vector over molecules."""
    return np.unpackbits(row.view(np.uint8), bitorder="little")[:n_mol].astype(bool)


class Register:
    """Batched ladder register: comp/RRTR bit rows plus provenance tags.

    A Register is a single-owner mutable value; distinct registers are
    independent. ``comp`` and ``rrtr`` have shape (n, words) in packed
    uint64; ``prov`` has shape (n, num_molecules) in uint8.
    """

    def __init__(
        self,
        comp: np.ndarray,
        rrtr: np.ndarray,
        num_molecules: int,
        *,
        reset_pool: Optional[np.ndarray] = None,
        rng: Optional[np.random.Generator] = None,
        one_probability: float = 0.0,
        strict: bool = True,
        neighbor_distance: int = 1,
    ):
        self.n = comp.shape[0]
        self.num_molecules = num_molecules
        self.words = comp.shape[1]
        self.comp = comp
        self.rrtr = rrtr
        self.prov = np.zeros((self.n, num_molecules), dtype=np.uint8)
        self.strict = strict
        self.neighbor_distance = neighbor_distance
        self._reset_pool = reset_pool
        self._pool_cursor = 0
        self._rng = rng
        self._one_probability = one_probability

    # -- construction ---------------------------------------------------

    @classmethod
    def from_comp_bits(cls, bits: np.ndarray, **kwargs) -> "Register":
        """Build a register from explicit computation bits (rows, molecules)."""
        bits = np.asarray(bits, dtype=bool)
        n, n_mol = bits.shape
        words = (n_mol + 63) // 64
        comp = _pack_rows(bits, words)
        rrtr = np.zeros_like(comp)
        return cls(comp, rrtr, n_mol, **kwargs)

    # -- reset randomness -----------------------------------------------

    def draw_reset_rows(self, length: int) -> np.ndarray:
        """Fresh thermal rows for a RESET, packed (length, words)."""
        if self._reset_pool is not None:
            end = self._pool_cursor + length
            if end > self._reset_pool.shape[0]:
                raise GateError("reset pool exhausted")
            rows = self._reset_pool[self._pool_cursor:end]
            self._pool_cursor = end
            return rows
        if self._rng is not None:
            fresh = self._rng.random((length, self.num_molecules)) < self._one_probability
            return _pack_rows(fresh, self.words)
        raise GateError("register has no reset bit source")

    # -- views ----------------------------------------------------------

    def comp_bit_rows(self, start: int, stop: int) -> np.ndarray:
        """Unpacked computation bits for [start, stop) as uint8 (rows, molecules)."""
        out = np.empty((stop - start, self.num_molecules), dtype=np.uint8)
        for i, r in enumerate(range(start, stop)):
            out[i] = _unpack_row(self.comp[r], self.num_molecules)
        return out

    def molecule_bits(self, index: int = 0) -> list[int]:
        """All computation bits of one molecule, as a plain list."""
        word, bit = divmod(index, 64)
        return [int((int(self.comp[r, word]) >> bit) & 1) for r in range(self.n)]

    def purified_run_length(self, start: int, level: int, max_rows: int) -> np.ndarray:
        """Per-molecule length of the contiguous run of ``level``-tagged
        positions beginning at ``start``."""
        stop = min(start + max_rows, self.n)
        block = self.prov[start:stop] == level
        if block.shape[0] == 0:
            return np.zeros(self.num_molecules, dtype=np.int64)
        return np.cumprod(block, axis=0, dtype=np.int64).sum(axis=0)


def new_register(
    n: int,
    epsilon0: float,
    bit_source: np.random.Generator,
    *,
    num_molecules: int = 1,
    **kwargs,
) -> Register:
    """Thermal register: every comp and RRTR bit is 0 with prob (1+eps)/2.

    All randomness, including later RESET redraws, comes from
    ``bit_source``; identical streams give identical registers.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= epsilon0 <= 1.0:
        raise ValueError("epsilon0 must be in [0, 1]")
    p_one = (1.0 - epsilon0) / 2.0
    words = (num_molecules + 63) // 64
    comp = _pack_rows(bit_source.random((n, num_molecules)) < p_one, words)
    rrtr = _pack_rows(bit_source.random((n, num_molecules)) < p_one, words)
    return Register(
        comp, rrtr, num_molecules, rng=bit_source, one_probability=p_one, **kwargs
    )


# -- gate application ---------------------------------------------------


def _adjacency_violation(gate: Gate, distance: int) -> Optional[str]:
    if isinstance(gate, (Cnot, Swap)):
        i, j = gate.positions()
        if abs(i - j) > distance:
            return f"{gate.line()}: operands farther than {distance} apart"
    elif isinstance(gate, ZcSwap):
        if abs(gate.a - gate.b) > distance:
            return f"{gate.line()}: swap operands farther than {distance} apart"
        if min(abs(gate.zero_control - gate.a), abs(gate.zero_control - gate.b)) > distance:
            return f"{gate.line()}: control not adjacent to swap operands"
    return None  # RESET is column-wise, no row adjacency


def _range_violation(gate: Gate, n: int) -> Optional[str]:
    pos = gate.positions()
    if not pos:
        return f"{gate.line()}: empty"
    if min(pos) < 0 or max(pos) >= n:
        return f"{gate.line()}: position out of range for n={n}"
    if not isinstance(gate, Reset) and len(set(pos)) != len(pos):
        return f"{gate.line()}: operands must be pairwise distinct"
    if isinstance(gate, Reset) and gate.length < 1:
        return f"{gate.line()}: length must be >= 1"
    return None


def apply_gate(reg: Register, gate: Gate, counter: Optional[StepCounter] = None) -> None:
    """Apply one gate in place and advance the step counter."""
    err = _range_violation(gate, reg.n)
    if err is None and reg.strict:
        err = _adjacency_violation(gate, reg.neighbor_distance)
    if err is not None:
        raise GateError(err)

    if isinstance(gate, Cnot):
        c, t = gate.control, gate.target
        new_t = reg.comp[t] ^ reg.comp[c]
        equal = ~_unpack_row(new_t, reg.num_molecules)
        pc, pt = reg.prov[c], reg.prov[t]
        kept = equal & (pc == pt) & (pc < PROV_DIRTY)
        reg.prov[c] = np.where(kept, pc + 1, PROV_DIRTY)
        reg.prov[t] = PROV_SUPERVISOR
        reg.comp[t] = new_t
    elif isinstance(gate, Swap):
        a, b = gate.a, gate.b
        reg.comp[[a, b]] = reg.comp[[b, a]]
        reg.prov[[a, b]] = reg.prov[[b, a]]
    elif isinstance(gate, ZcSwap):
        z, a, b = gate.zero_control, gate.a, gate.b
        zero = ~reg.comp[z]
        diff = (reg.comp[a] ^ reg.comp[b]) & zero
        reg.comp[a] ^= diff
        reg.comp[b] ^= diff
        sel = _unpack_row(zero, reg.num_molecules)
        pa = reg.prov[a].copy()
        reg.prov[a] = np.where(sel, reg.prov[b], pa)
        reg.prov[b] = np.where(sel, pa, reg.prov[b])
    elif isinstance(gate, Reset):
        rows = slice(gate.start, gate.start + gate.length)
        fresh = reg.draw_reset_rows(gate.length)
        reg.comp[rows] = reg.rrtr[rows]
        reg.rrtr[rows] = fresh
        reg.prov[rows] = 0
    else:
        raise GateError(f"unknown gate {gate!r}")

    if counter is not None:
        counter.add(gate)


def run_schedule(
    reg: Register, schedule: Schedule, counter: Optional[StepCounter] = None
) -> StepCounter:
    """Apply every gate of a schedule in order; markers cost nothing."""
    counter = counter if counter is not None else StepCounter()
    for item in schedule.items:
        if not isinstance(item, Marker):
            apply_gate(reg, item, counter)
    return counter


def validate_schedule(
    schedule: Schedule, n: int, *, neighbor_distance: int = 1, strict: bool = True
) -> list[str]:
    """Pure static check of index ranges and adjacency; no execution.

    Returns the list of violations (empty means ok).
    """
    violations = []
    for g in schedule.gates():
        err = _range_violation(g, n)
        if err is None and strict:
            err = _adjacency_violation(g, neighbor_distance)
        if err is not None:
            violations.append(err)
    return violations


# -- serialization ------------------------------------------------------

_GATE_PARSERS = {
    "CNOT": (2, lambda a: Cnot(a[0], a[1])),
    "SWAP": (2, lambda a: Swap(a[0], a[1])),
    "ZCSWAP": (3, lambda a: ZcSwap(a[0], a[1], a[2])),
    "RESET": (2, lambda a: Reset(a[0], a[1])),
}


def schedule_to_text(schedule: Schedule) -> str:
    """Line-oriented text form, one gate per line; markers as comments."""
    lines = []
    for item in schedule.items:
        if isinstance(item, Marker):
            lines.append(f"# {item.text}")
        else:
            lines.append(item.line())
    return "\n".join(lines) + "\n" if lines else ""


def schedule_from_text(text: str) -> Schedule:
    """Parse the text format back; bit-exact round trip with to_text."""
    items: list[Union[Gate, Marker]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            items.append(Marker(line[1:].strip()))
            continue
        parts = line.split()
        kind = parts[0].upper()
        if kind not in _GATE_PARSERS:
            raise ValueError(f"line {lineno}: unknown gate {parts[0]!r}")
        arity, build = _GATE_PARSERS[kind]
        if len(parts) - 1 != arity:
            raise ValueError(f"line {lineno}: {kind} expects {arity} operands")
        try:
            args = [int(p) for p in parts[1:]]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: non-integer operand") from exc
        items.append(build(args))
    return Schedule(items)
