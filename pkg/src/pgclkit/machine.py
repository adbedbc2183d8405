"""Finite flip machines: the sampler's reachable configurations as a graph.

An interior node consumes one fair flip and routes to its heads/tails
successors; a leaf emits an outcome.  Building the machine explores the
cumulative-list sampler's configuration space breadth-first, identifying
configurations by (low, window slice, high) so revisited configurations
become back-edges and every outcome gets a single shared leaf.  Cycles are
expected: a machine need not be a tree, only absorbing.

Analysis solves the absorption equations exactly over the rationals:

    P_o(leaf)      = [leaf outcome = o]
    P_o(interior)  = (P_o(heads) + P_o(tails)) / 2
    E(leaf)        = 0
    E(interior)    = 1 + (E(heads) + E(tails)) / 2

by Gaussian elimination with partial pivoting on rational magnitude.  A
singular system means some interior node is never absorbed; the machine is
rejected loudly.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import MachineAnalysisError, MachineFormatError
from .sampler import CumulativeDist, TrialsResult, WeightedDist, run_trials

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)

DEFAULT_MAX_NODES = 100_000


@dataclass(frozen=True)
class MachineNode:
    id: int
    kind: str  # "interior" | "leaf"
    heads: Optional[int] = None
    tails: Optional[int] = None
    outcome: Optional[int] = None  # 1-based
    label: str = ""

    def __post_init__(self):
        if self.kind == "interior":
            if self.heads is None or self.tails is None:
                raise MachineFormatError(f"interior node {self.id} missing successors")
        elif self.kind == "leaf":
            if self.outcome is None or self.outcome < 1:
                raise MachineFormatError(f"leaf node {self.id} needs a 1-based outcome")
        else:
            raise MachineFormatError(f"node {self.id} has unknown kind {self.kind!r}")


@dataclass(frozen=True)
class Machine:
    nodes: tuple[MachineNode, ...]
    root: int
    outcomes: int

    def __post_init__(self):
        by_id = {}
        for node in self.nodes:
            if node.id in by_id:
                raise MachineFormatError(f"duplicate node id {node.id}")
            by_id[node.id] = node
        if self.root not in by_id:
            raise MachineFormatError(f"root {self.root} is not a node")
        for node in self.nodes:
            if node.kind == "interior":
                for succ in (node.heads, node.tails):
                    if succ not in by_id:
                        raise MachineFormatError(
                            f"node {node.id} points at missing node {succ}"
                        )
            else:
                if node.outcome > self.outcomes:
                    raise MachineFormatError(
                        f"leaf outcome {node.outcome} exceeds declared "
                        f"outcome count {self.outcomes}"
                    )
        object.__setattr__(self, "_by_id", by_id)

    def node(self, node_id: int) -> MachineNode:
        return self._by_id[node_id]

    @property
    def size(self) -> int:
        return len(self.nodes)

    def interior_count(self) -> int:
        return sum(1 for n in self.nodes if n.kind == "interior")

    def leaf_count(self) -> int:
        return sum(1 for n in self.nodes if n.kind == "leaf")


@dataclass(frozen=True)
class MachineAnalysis:
    outcome_prob: tuple[Fraction, ...]  # index i holds P(outcome i+1)
    expected_flips: Fraction
    node_count: int

    def probability(self, outcome: int) -> Fraction:
        return self.outcome_prob[outcome - 1]


def build_machine(d: WeightedDist, max_nodes: int = DEFAULT_MAX_NODES) -> Machine:
    """Explore the sampler's configurations from the initial one.

    Node ids are assigned in discovery order (root is 0), so the result is
    reproducible.  Leaves are shared per outcome, which follows from keying
    configurations on the active window alone.
    """
    start = CumulativeDist.initial(d)
    ids: dict[tuple, int] = {start.key(): 0}
    todo: deque[CumulativeDist] = deque([start])
    entries: dict[int, dict] = {}
    while todo:
        c = todo.popleft()
        node_id = ids[c.key()]
        if c.is_terminal:
            entries[node_id] = {"kind": "leaf", "outcome": c.outcome}
            continue
        succ_ids = []
        for succ in (c.split_left(), c.split_right()):
            succ.check_invariant()
            key = succ.key()
            if key not in ids:
                if len(ids) >= max_nodes:
                    raise MachineFormatError(
                        f"machine construction exceeded {max_nodes} nodes"
                    )
                ids[key] = len(ids)
                todo.append(succ)
            succ_ids.append(ids[key])
        window = " ".join(str(v) for v in c.window())
        entries[node_id] = {
            "kind": "interior",
            "heads": succ_ids[0],
            "tails": succ_ids[1],
            "label": f"{c.low} | {window} | {c.high}",
        }
    nodes = []
    for node_id in range(len(ids)):
        e = entries[node_id]
        if e["kind"] == "leaf":
            nodes.append(MachineNode(node_id, "leaf", outcome=e["outcome"]))
        else:
            nodes.append(MachineNode(node_id, "interior", heads=e["heads"],
                                     tails=e["tails"], label=e["label"]))
    return Machine(tuple(nodes), root=0, outcomes=d.size)


def solve_linear(matrix: list[list[Fraction]],
                 rhs: list[list[Fraction]]) -> list[list[Fraction]]:
    """Solve A X = B exactly; A square over Fractions, B a list of rows.

    Partial pivoting picks the largest remaining |entry| per column, which
    keeps intermediate numerators and denominators from ballooning.
    Raises MachineAnalysisError when A is singular.
    """
    n = len(matrix)
    a = [row[:] for row in matrix]
    b = [row[:] for row in rhs]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[pivot][col] == 0:
            raise MachineAnalysisError("singular system: absorption is not almost sure")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        inv = ONE / a[col][col]
        a[col] = [v * inv for v in a[col]]
        b[col] = [v * inv for v in b[col]]
        for r in range(n):
            if r == col or a[r][col] == 0:
                continue
            factor = a[r][col]
            a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
            b[r] = [v - factor * w for v, w in zip(b[r], b[col])]
    return b


def analyze(m: Machine) -> MachineAnalysis:
    """Exact outcome probabilities and expected flips from the root."""
    interior = [n for n in m.nodes if n.kind == "interior"]
    index = {n.id: k for k, n in enumerate(interior)}
    k = len(interior)
    width = m.outcomes + 1  # one column per outcome, then expected flips

    def leaf_row(node: MachineNode) -> list[Fraction]:
        row = [ZERO] * width
        row[node.outcome - 1] = ONE
        return row

    if k == 0:
        root = m.node(m.root)
        probs = leaf_row(root)[: m.outcomes]
        return MachineAnalysis(tuple(probs), ZERO, m.size)

    a = [[ZERO] * k for _ in range(k)]
    b = [[ZERO] * width for _ in range(k)]
    for node in interior:
        r = index[node.id]
        a[r][r] = ONE
        b[r][m.outcomes] = ONE  # each interior node costs one flip
        for succ_id in (node.heads, node.tails):
            succ = m.node(succ_id)
            if succ.kind == "interior":
                a[r][index[succ.id]] -= HALF
            else:
                row = leaf_row(succ)
                for c in range(m.outcomes):
                    b[r][c] += HALF * row[c]
    solution = solve_linear(a, b)

    if m.node(m.root).kind == "leaf":
        root_row = leaf_row(m.node(m.root))
    else:
        root_row = solution[index[m.root]]
    probs = tuple(root_row[: m.outcomes])
    if sum(probs, ZERO) != ONE:
        raise MachineAnalysisError(
            f"outcome probabilities sum to {sum(probs, ZERO)}, not 1"
        )
    return MachineAnalysis(probs, root_row[m.outcomes], m.size)


def load_machine(text: str) -> Machine:
    """Parse the line-oriented machine format.

    node <id> interior <heads-id> <tails-id> [label...]
    node <id> leaf <outcome>
    root <id>
    outcomes <N>

    Blank lines and lines starting with '#' are ignored.  Nodes that cannot
    be reached from the root are dropped with a warning.
    """
    nodes: list[MachineNode] = []
    root: Optional[int] = None
    outcomes: Optional[int] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "root" and len(parts) == 2:
                root = int(parts[1])
            elif parts[0] == "outcomes" and len(parts) == 2:
                outcomes = int(parts[1])
            elif parts[0] == "node" and parts[2] == "leaf" and len(parts) == 4:
                nodes.append(MachineNode(int(parts[1]), "leaf", outcome=int(parts[3])))
            elif parts[0] == "node" and parts[2] == "interior" and len(parts) >= 5:
                nodes.append(MachineNode(
                    int(parts[1]), "interior",
                    heads=int(parts[3]), tails=int(parts[4]),
                    label=" ".join(parts[5:]),
                ))
            else:
                raise ValueError("unrecognised line")
        except (ValueError, IndexError) as exc:
            raise MachineFormatError(f"line {lineno}: {exc}: {raw!r}") from None
    if root is None:
        raise MachineFormatError("missing 'root' line")
    if outcomes is None:
        raise MachineFormatError("missing 'outcomes' line")
    machine = Machine(tuple(nodes), root=root, outcomes=outcomes)

    reachable = set()
    todo = [root]
    while todo:
        node_id = todo.pop()
        if node_id in reachable:
            continue
        reachable.add(node_id)
        node = machine.node(node_id)
        if node.kind == "interior":
            todo.extend((node.heads, node.tails))
    if len(reachable) != machine.size:
        dropped = sorted(n.id for n in machine.nodes if n.id not in reachable)
        warnings.warn(f"pruning unreachable machine nodes {dropped}")
        machine = Machine(
            tuple(n for n in machine.nodes if n.id in reachable),
            root=root, outcomes=outcomes,
        )
    return machine


def machine_to_text(m: Machine) -> str:
    lines = [f"outcomes {m.outcomes}", f"root {m.root}"]
    for node in m.nodes:
        if node.kind == "leaf":
            lines.append(f"node {node.id} leaf {node.outcome}")
        else:
            label = f" {node.label}" if node.label else ""
            lines.append(f"node {node.id} interior {node.heads} {node.tails}{label}")
    return "\n".join(lines) + "\n"


def to_dot(m: Machine) -> str:
    """Deterministic GraphViz rendering: interior nodes show their window
    label, edges carry H/T, leaves show the outcome."""
    lines = [
        "digraph flip_machine {",
        "  rankdir=TB;",
        "  node [fontname=\"Helvetica\"];",
    ]
    for node in sorted(m.nodes, key=lambda n: n.id):
        if node.kind == "interior":
            label = node.label or f"n{node.id}"
            lines.append(f"  n{node.id} [shape=box, label=\"{label}\"];")
        else:
            lines.append(f"  n{node.id} [shape=circle, label=\"{node.outcome}\"];")
    for node in sorted(m.nodes, key=lambda n: n.id):
        if node.kind == "interior":
            lines.append(f"  n{node.id} -> n{node.heads} [label=\"H\"];")
            lines.append(f"  n{node.id} -> n{node.tails} [label=\"T\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CrosscheckReport:
    """Exact analysis against an empirical run, with z-scores."""

    analysis: MachineAnalysis
    trials: TrialsResult
    outcome_z: tuple[float, ...]
    flips_z: float

    def max_outcome_z(self) -> float:
        return max(abs(z) for z in self.outcome_z)


def crosscheck(d: WeightedDist, runs: int, seed: int,
               shards: int = 1) -> CrosscheckReport:
    """Run trials and score them against the exact machine analysis."""
    analysis = analyze(build_machine(d))
    trials = run_trials(d, runs, seed, shards=shards)
    zs = []
    for i in range(d.size):
        p = float(analysis.outcome_prob[i])
        mean = runs * p
        sigma = math.sqrt(runs * p * (1 - p)) if 0 < p < 1 else 0.0
        if sigma == 0:
            zs.append(0.0 if trials.tallies[i] == round(mean) else math.inf)
        else:
            zs.append((trials.tallies[i] - mean) / sigma)
    var = float(trials.flip_variance())
    if var <= 0:
        flips_z = 0.0 if trials.avg_flips == analysis.expected_flips else math.inf
    else:
        flips_z = (float(trials.avg_flips) - float(analysis.expected_flips)) / math.sqrt(
            var / runs
        )
    return CrosscheckReport(analysis, trials, tuple(zs), flips_z)
