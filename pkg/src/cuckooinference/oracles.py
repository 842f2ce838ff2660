"""Independent feasibility deciders used to referee the inference graph code.

brute_force_feasible enumerates all 2^n side assignments in a compiled kernel and shares
nothing with the graph code. implication_sat_feasible solves the 2-SAT encoding of the
placement constraints through strongly connected components.
"""
import logging
from dataclasses import dataclass, field
from typing import cast

import numpy as np
from numba import get_num_threads  # type: ignore

from src.cuckooinference.constants import BRUTE_FORCE_CAP, BRUTE_FORCE_HARD_CAP, SIDES
from src.cuckooinference.core_model import Instance, Placement, emit_instance, is_legal
from src.cuckooinference.hash_types import Side
from src.cuckooinference.inference_graph import InferenceGraph, NodeId, build_graph, has_bad_item, place_all
from src.cuckooinference.numba_funcs import first_legal_code

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleVerdict:
    feasible: bool
    witness: Placement | None = None


def brute_force_feasible(inst: Instance, *, cap: int = BRUTE_FORCE_CAP) -> OracleVerdict:
    """Tries all 2^n assignments; the witness is the lexicographically first legal one
    (item 0 most significant, side 0 before side 1)."""
    if inst.n > min(cap, BRUTE_FORCE_HARD_CAP):
        msg = f"instance has n={inst.n} items but brute force is capped at n={min(cap, BRUTE_FORCE_HARD_CAP)}"
        raise ValueError(msg)

    chunks = 1 if inst.n < 10 else 4 * get_num_threads()  # noqa: PLR2004
    code = int(first_legal_code(inst.hashes, inst.m, chunks))
    if code < 0:
        return OracleVerdict(feasible=False)

    n = inst.n
    witness = Placement.of([(code >> (n - 1 - i)) & 1 for i in range(n)])
    if not is_legal(inst, witness):
        msg = f"enumerator returned an illegal assignment {witness.as_tuple()}"
        raise RuntimeError(msg)

    return OracleVerdict(feasible=True, witness=witness)


def _implications(inst: Instance) -> list[list[int]]:
    """Implication graph on literals 2*i + s ("item i sits in table s"); the negation of
    literal u is u ^ 1. Two items sharing a slot of table s give the clause
    (not 2i+s or not 2j+s), a repeated slot gives the unit clause (not 2i+s)."""
    n, d = inst.n, inst.d
    implications: list[set[int]] = [set() for _ in range(2 * n)]

    for side in SIDES:
        slots = inst.hashes[:, side, :]
        owners = np.repeat(np.arange(n), d)
        flat = slots.reshape(-1)
        order = np.lexsort((owners, flat))
        flat, owners = flat[order], owners[order]

        boundaries = np.flatnonzero(np.diff(flat)) + 1
        for group in np.split(owners, boundaries):
            members = group.tolist()
            for a, i in enumerate(members):
                for j in members[a + 1 :]:
                    if i == j:
                        implications[2 * i + side].add(2 * i + 1 - side)
                    else:
                        implications[2 * i + side].add(2 * j + 1 - side)
                        implications[2 * j + side].add(2 * i + 1 - side)

    return [sorted(s) for s in implications]


def _strong_components(adjacency: list[list[int]]) -> list[int]:
    """Iterative Tarjan. Component ids come out in reverse topological order."""
    size = len(adjacency)
    index = [-1] * size
    low = [0] * size
    on_stack = [False] * size
    component = [-1] * size
    stack: list[int] = []
    counter = 0
    components = 0

    for root in range(size):
        if index[root] != -1:
            continue

        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, iter(adjacency[root]))]

        while work:
            u, successors = work[-1]
            descended = False
            for w in successors:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(adjacency[w])))
                    descended = True
                    break
                if on_stack[w]:
                    low[u] = min(low[u], index[w])

            if descended:
                continue

            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[u])

            if low[u] == index[u]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    component[w] = components
                    if w == u:
                        break
                components += 1

    return component


def implication_sat_solve(inst: Instance) -> Placement | None:
    """Satisfying side assignment of the 2-SAT encoding, or None if unsatisfiable."""
    component = _strong_components(_implications(inst))

    sides: dict[int, Side] = {}
    for i in range(inst.n):
        if component[2 * i] == component[2 * i + 1]:
            return None
        # the literal whose component is later in topological order is true
        sides[i] = 0 if component[2 * i] < component[2 * i + 1] else 1

    return Placement(sides)


def implication_sat_feasible(inst: Instance) -> bool:
    return implication_sat_solve(inst) is not None


def reference_edges(inst: Instance) -> set[tuple[NodeId, NodeId]]:
    """Inference graph edges by direct pairwise comparison, O(n^2 d)."""
    table = inst.slot_table()
    edges: set[tuple[NodeId, NodeId]] = set()
    for side in SIDES:
        s = cast(Side, side)
        other = cast(Side, 1 - side)
        vectors = [row[side] for row in table]
        for i, vi in enumerate(vectors):
            if len(set(vi)) < len(vi):
                edges.add((NodeId(i, s), NodeId(i, other)))
            for j, vj in enumerate(vectors):
                if i != j and not set(vi).isdisjoint(vj):
                    edges.add((NodeId(i, s), NodeId(j, other)))

    return edges


@dataclass(frozen=True)
class CrossValidationReport:
    instance: Instance
    verdicts: dict[str, bool]
    errors: tuple[str, ...] = ()
    missing_edges: tuple[tuple[NodeId, NodeId], ...] = ()
    spurious_edges: tuple[tuple[NodeId, NodeId], ...] = ()
    three_way: bool = field(default=True)
    witness: Placement | None = None

    @property
    def agree(self) -> bool:
        return (
            len(set(self.verdicts.values())) <= 1
            and not self.errors
            and not self.missing_edges
            and not self.spurious_edges
        )

    @property
    def vacuous(self) -> bool:
        return self.instance.n == 0

    def first_disagreement(self) -> str | None:
        if self.errors:
            return self.errors[0]

        if len(set(self.verdicts.values())) > 1:
            return ", ".join(f"{name}={verdict}" for name, verdict in self.verdicts.items())

        if self.missing_edges:
            v, w = self.missing_edges[0]
            return f"graph lacks edge {v} -> {w}"

        if self.spurious_edges:
            v, w = self.spurious_edges[0]
            return f"graph has spurious edge {v} -> {w}"

        return None

    def describe(self) -> str:
        if self.agree:
            return "agree (vacuous)" if self.vacuous else "agree"

        return f"disagree: {self.first_disagreement()}\ninstance:\n{emit_instance(self.instance)}"


def cross_validate(
    inst: Instance,
    *,
    graph: InferenceGraph | None = None,
    cap: int = BRUTE_FORCE_CAP,
) -> CrossValidationReport:
    """Checks that brute force (when n <= cap), implication-SAT, place_all and the absence
    of bad items all give the same verdict, and that the graph matches the instance's collisions.
    A supplied graph replaces the one built from inst."""
    g = graph if graph is not None else build_graph(inst)
    verdicts: dict[str, bool] = {}
    errors: list[str] = []

    three_way = inst.n <= cap
    witness = None
    if three_way:
        verdict = brute_force_feasible(inst, cap=cap)
        verdicts["brute_force"] = verdict.feasible
        witness = verdict.witness

    verdicts["implication_sat"] = implication_sat_feasible(inst)

    try:
        placement = place_all(inst, graph=g)
    except RuntimeError as err:
        errors.append(f"place_all failed: {err}")
        placement = None
    else:
        if placement is not None and not is_legal(inst, placement):
            errors.append(f"place_all returned an illegal placement {placement.as_tuple()}")
    if not errors:
        verdicts["place_all"] = placement is not None

    verdicts["no_bad_item"] = not has_bad_item(g)

    expected = reference_edges(inst)
    actual = set(g.edges())

    report = CrossValidationReport(
        instance=inst,
        verdicts=verdicts,
        errors=tuple(errors),
        missing_edges=tuple(sorted(expected - actual)),
        spurious_edges=tuple(sorted(actual - expected)),
        three_way=three_way,
        witness=witness,
    )

    if not report.agree:
        logger.warning("oracles disagree on %r: %s", inst, report.first_disagreement())

    return report
