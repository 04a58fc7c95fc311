"""Measurement dynamics: instantaneous stabilizer group evolution.

The group is held as a plain list of commuting signed generators, which
stays sparse under the standard update rule: measuring an operator that
anticommutes with generators g1..gk replaces g2..gk by g2*g1..gk*g1,
drops g1, and installs the signed measurement operator.  Span and sign
queries go through a lazily rebuilt row-reduced mirror.

Outcome policies: forced_plus picks +1 whenever the outcome is free,
random draws it from an rng, and frame replays a forced_plus reference
with every check flipped that anticommutes with a fixed Pauli frame.
Determined outcomes always report the sign recorded in the group (the
frame policy flips those too).
"""

from __future__ import annotations

from dataclasses import dataclass

from .lattice import Lattice
from .operators import all_checks
from .symplectic import GeneratorSet, PauliOp, sympl


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Round:
    label: str
    checks: tuple[PauliOp, ...]


class Schedule:
    """An initialization prefix plus a repeating cycle of rounds.

    Checks within one round must pairwise commute; that is what makes
    them simultaneously measurable and the trace well defined.
    """

    def __init__(self, prefix: list[Round], cycle: list[Round]):
        for rnd in list(prefix) + list(cycle):
            for i, a in enumerate(rnd.checks):
                for b in rnd.checks[i + 1:]:
                    if not a.commutes_with(b):
                        raise ScheduleError(
                            f"round {rnd.label!r} contains non-commuting checks"
                        )
        self.prefix = list(prefix)
        self.cycle = list(cycle)

    def rounds(self, cycles: int) -> list[Round]:
        return self.prefix + self.cycle * cycles


def canonical_schedule(lat: Lattice) -> Schedule:
    """Toric-code initialization prefix, then the period-six sequence.

    The prefix measures yellow, green, blue, yellow on the fresh
    maximally mixed state; each cycle then runs yellow+onsite, blue,
    green, yellow, blue, green.
    """
    checks = all_checks(lat)
    y, b, g, o = (tuple(checks[k]) for k in ("yellow", "blue", "green", "onsite"))
    prefix = [
        Round("init:yellow", y),
        Round("init:green", g),
        Round("init:blue", b),
        Round("init:yellow", y),
    ]
    cycle = [
        Round("yellow+onsite", y + o),
        Round("blue", b),
        Round("green", g),
        Round("yellow", y),
        Round("blue", b),
        Round("green", g),
    ]
    return Schedule(prefix, cycle)


class ISG:
    """Signed abelian generator list with a cached row-reduced mirror."""

    __slots__ = ("n", "gens", "_mirror")

    def __init__(self, n: int, gens: list[PauliOp] | None = None):
        self.n = n
        self.gens: list[PauliOp] = list(gens or [])
        self._mirror: GeneratorSet | None = None

    @property
    def group(self) -> GeneratorSet:
        if self._mirror is None:
            self._mirror = GeneratorSet(self.n, self.gens)
        return self._mirror

    @property
    def rank(self) -> int:
        return self.group.rank

    @property
    def logical_count(self) -> int:
        return self.n - self.rank

    def copy(self) -> "ISG":
        return ISG(self.n, self.gens)

    def _append(self, signed: PauliOp) -> None:
        self.gens.append(signed)
        if self._mirror is not None:
            self._mirror.add(signed)

    def _replace(self, op: PauliOp, anti: list[int], outcome: int) -> None:
        pivot = self.gens[anti[0]]
        for i in anti[1:]:
            self.gens[i] = self.gens[i] * pivot
        del self.gens[anti[0]]
        self.gens.append(op if outcome > 0 else op.negate())
        self._mirror = None


def logical_count(isg: ISG) -> int:
    return isg.n - isg.rank


def signed_group_equal(a: GeneratorSet, b: GeneratorSet) -> bool:
    """True when the two abelian groups contain the same signed elements."""
    if a.n != b.n or a.rank != b.rank:
        return False
    return all(b.sign_of(op) == 1 for op in a.ops())


def _fresh_outcome(policy, rng, frame, op: PauliOp) -> int:
    if policy == "forced_plus":
        return 1
    if policy == "random":
        if rng is None:
            raise ValueError("random policy needs an rng")
        return rng.choice((1, -1))
    if policy == "frame":
        if frame is None:
            raise ValueError("frame policy needs a frame operator")
        return -1 if sympl(frame, op) else 1
    raise ValueError(f"unknown outcome policy {policy!r}")


def _frame_flip(policy, frame, op: PauliOp, sign: int) -> int:
    if policy == "frame" and sympl(frame, op):
        return -sign
    return sign


def measure_pauli(isg: ISG, op: PauliOp, policy="forced_plus", rng=None, frame=None):
    """Measure one Hermitian Pauli; returns (isg, outcome, deterministic).

    The group object is updated in place.  A determined outcome is the
    sign the group records for the operator (flipped under the frame
    policy when the frame anticommutes).
    """
    if not op.is_hermitian:
        raise ValueError("measurement operator must be Hermitian")
    if op.is_identity:
        raise ValueError("refusing to measure the identity")
    anti = [i for i, g in enumerate(isg.gens) if not g.commutes_with(op)]
    if anti:
        outcome = _fresh_outcome(policy, rng, frame, op)
        isg._replace(op, anti, outcome)
        return isg, outcome, False
    sign = isg.group.sign_of(op)
    if sign is not None:
        return isg, _frame_flip(policy, frame, op, sign), True
    outcome = _fresh_outcome(policy, rng, frame, op)
    isg._append(op if outcome > 0 else op.negate())
    return isg, outcome, False


def measure_round(isg: ISG, checks, policy="forced_plus", rng=None, frame=None):
    """Measure a list of mutually commuting checks.

    Equivalent to sequential measure_pauli calls, but commuting checks
    are resolved against a single mirror built after all the
    anticommuting updates; round-mates commute, so deferral changes
    neither the group nor any outcome.
    """
    outcomes = [0] * len(checks)
    determined = [False] * len(checks)
    deferred = []
    for k, op in enumerate(checks):
        if not op.is_hermitian:
            raise ValueError("measurement operator must be Hermitian")
        if op.is_identity:
            raise ValueError("refusing to measure the identity")
        anti = [i for i, g in enumerate(isg.gens) if not g.commutes_with(op)]
        if anti:
            outcomes[k] = _fresh_outcome(policy, rng, frame, op)
            isg._replace(op, anti, outcomes[k])
        else:
            deferred.append(k)
    mirror = isg.group
    for k in deferred:
        op = checks[k]
        sign = mirror.sign_of(op)
        if sign is not None:
            outcomes[k] = _frame_flip(policy, frame, op, sign)
            determined[k] = True
        else:
            outcomes[k] = _fresh_outcome(policy, rng, frame, op)
            isg._append(op if outcomes[k] > 0 else op.negate())
    return outcomes, determined


@dataclass
class TraceEntry:
    index: int
    label: str
    outcomes: tuple[int, ...]
    rank: int
    logical_count: int
    isg: ISG | None


@dataclass
class Trace:
    n: int
    entries: list[TraceEntry]
    prefix_length: int
    rounds: tuple[Round, ...]

    def entry(self, index: int) -> TraceEntry:
        return self.entries[index]

    def export_lines(self):
        """One line per round; outcome bits record -1 as 1, +1 as 0."""
        for e in self.entries:
            bits = "".join("1" if o < 0 else "0" for o in e.outcomes)
            yield (
                f"round={e.index} label={e.label} checks={len(e.outcomes)} "
                f"outcomes={bits} rank={e.rank} logicals={e.logical_count}"
            )


def run_schedule(
    lat: Lattice,
    schedule: Schedule | None = None,
    cycles: int = 1,
    policy: str = "forced_plus",
    rng=None,
    frame: PauliOp | None = None,
    snapshots: str = "all",
) -> Trace:
    """Run the schedule from the empty group, recording every round.

    snapshots: "all" keeps a group copy per round, "cycle" only at the
    end of each full cycle, "none" keeps outcomes and ranks only.
    """
    if snapshots not in ("all", "cycle", "none"):
        raise ValueError(f"unknown snapshot mode {snapshots!r}")
    if schedule is None:
        schedule = canonical_schedule(lat)
    isg = ISG(lat.n_qubits)
    entries = []
    rounds = schedule.rounds(cycles)
    npre = len(schedule.prefix)
    for idx, rnd in enumerate(rounds):
        outcomes, _ = measure_round(isg, rnd.checks, policy, rng, frame)
        in_cycle = idx - npre
        keep = snapshots == "all" or (
            snapshots == "cycle"
            and in_cycle >= 0
            and (in_cycle + 1) % len(schedule.cycle) == 0
        )
        entries.append(
            TraceEntry(
                idx, rnd.label, tuple(outcomes), isg.rank, isg.logical_count,
                isg.copy() if keep else None,
            )
        )
    return Trace(lat.n_qubits, entries, npre, tuple(rounds))
