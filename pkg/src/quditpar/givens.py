"""Numerical realization of two-level rotations and their verification.

Conventions: a rotation G_jk(gamma, phi) acts as
exp(-i*gamma*(cos(phi)*Lx - sin(phi)*Ly)) on span{|j>,|k>}, i.e. the 2x2
block [[c, -i e^{i phi} s], [-i e^{-i phi} s, c]] with c = cos(gamma),
s = sin(gamma), rows/cols ordered (j, k).  Zeroing parameters are chosen so
the surviving pivot amplitude keeps the pivot's phase (real inputs stay
real non-negative).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .coupling_graph import CouplingGraph, Edge, GraphError, SpanningTree, EdgeColoring, normalize_edge
from .scheduler import (
    PrecedenceDag,
    RotationLabel,
    Schedule,
    ScheduleError,
    constrain_width,
    tree_precedence,
)

UNITARITY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
EXACT_TOL = 1e-12


class NumericsError(ValueError):
    pass


@dataclass(frozen=True)
class GivensRotation:
    j: int
    k: int
    gamma: float
    phi: float

    def __post_init__(self):
        if self.j == self.k:
            raise NumericsError(f"rotation needs two distinct levels, got {self.j}")

    def block(self) -> np.ndarray:
        c, s = math.cos(self.gamma), math.sin(self.gamma)
        e = cmath.exp(1j * self.phi)
        return np.array([[c, -1j * e * s], [-1j * s / e, c]], dtype=complex)

    def render(self) -> str:
        return f"G({self.j},{self.k}) gamma={self.gamma:.17g} phi={self.phi:.17g}"


def givens_matrix(r: GivensRotation, d: int) -> np.ndarray:
    """Dense d x d unitary for the rotation; identity outside the (j,k) block."""
    if not (0 <= r.j < d and 0 <= r.k < d):
        raise NumericsError(f"levels ({r.j},{r.k}) outside dimension {d}")
    m = np.eye(d, dtype=complex)
    b = r.block()
    m[r.j, r.j] = b[0, 0]
    m[r.j, r.k] = b[0, 1]
    m[r.k, r.j] = b[1, 0]
    m[r.k, r.k] = b[1, 1]
    return m


def apply_rotation(vec: np.ndarray, r: GivensRotation) -> np.ndarray:
    out = vec.copy()
    b = r.block()
    out[r.j] = b[0, 0] * vec[r.j] + b[0, 1] * vec[r.k]
    out[r.k] = b[1, 0] * vec[r.j] + b[1, 1] * vec[r.k]
    return out


def apply_rotation_rows(mat: np.ndarray, r: GivensRotation) -> np.ndarray:
    out = mat.copy()
    b = r.block()
    out[r.j, :] = b[0, 0] * mat[r.j, :] + b[0, 1] * mat[r.k, :]
    out[r.k, :] = b[1, 0] * mat[r.j, :] + b[1, 1] * mat[r.k, :]
    return out


def _wrap_angle(x: float) -> float:
    y = math.fmod(x, 2 * math.pi)
    if y <= -math.pi:
        y += 2 * math.pi
    elif y > math.pi:
        y -= 2 * math.pi
    return y


def zeroing_params(a: complex, b: complex, pivot: int, target: int) -> GivensRotation:
    """Rotation G(pivot,target) sending amplitude pair (a at pivot, b at target)
    to (sqrt(|a|^2+|b|^2) with a's phase, 0)."""
    if abs(b) < 1e-300:
        return GivensRotation(j=pivot, k=target, gamma=0.0, phi=0.0)
    alpha = cmath.phase(a) if abs(a) > 1e-300 else 0.0
    beta = cmath.phase(b)
    gamma = math.atan2(abs(b), abs(a))
    phi = _wrap_angle(alpha - beta - 1.5 * math.pi)
    return GivensRotation(j=pivot, k=target, gamma=gamma, phi=phi)


def zeroing_for_state(v: np.ndarray, target: int, pivot: int) -> GivensRotation:
    """Rotation emptying v[target] into v[pivot]; identity when v[target]=0."""
    if target == pivot:
        raise NumericsError("target and pivot must differ")
    return zeroing_params(v[pivot], v[target], pivot=pivot, target=target)


def unitarity_defect(m: np.ndarray) -> float:
    d = m.shape[0]
    return float(np.linalg.norm(m.conj().T @ m - np.eye(d)))


def require_unitary(m: np.ndarray, tol: float = UNITARITY_TOL, what: str = "matrix"):
    defect = unitarity_defect(m)
    if defect > tol:
        raise NumericsError(f"{what} is not unitary: defect {defect:.3e} > {tol:.1e}")


def global_phase_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>| for vectors, |tr(a^H b)|/d for matrices: 1 means equal up to phase."""
    if a.ndim == 1:
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        return float(abs(np.vdot(a, b)) / (na * nb))
    d = a.shape[0]
    return float(abs(np.trace(a.conj().T @ b)) / d)


# ---------------------------------------------------------------------------
# State reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateReduction:
    steps: tuple[tuple[GivensRotation, ...], ...]
    residual: np.ndarray
    target: int
    residual_phase: float  # arg of the surviving amplitude

    def rotations(self) -> list[GivensRotation]:
        return [r for step in self.steps for r in step]

    def render_rotations(self) -> str:
        groups = []
        for step in self.steps:
            groups.append("\n".join(r.render() for r in step))
        return "\n\n".join(groups) + "\n"


def state_reduce(
    g: CouplingGraph, s: Schedule, psi: np.ndarray, target: int
) -> StateReduction:
    """Parameterize the schedule so it reduces psi to (phase)|target>."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (g.d,):
        raise NumericsError(f"state must have dimension {g.d}")
    for step in s.steps:
        for lab in step:
            if not g.has_edge(lab.pivot, lab.target):
                raise ScheduleError(
                    f"schedule rotation ({lab.pivot},{lab.target}) is not a coupling edge"
                )
    v = psi.copy()
    out_steps: list[list[GivensRotation]] = []
    for step in s.steps:
        rots = []
        for lab in step:
            r = zeroing_for_state(v, target=lab.target, pivot=lab.pivot)
            v = apply_rotation(v, r)
            rots.append(r)
        out_steps.append(rots)
    others = np.linalg.norm(np.delete(v, target))
    if others > 1e-10:
        raise ScheduleError(
            f"schedule does not reduce the state to |{target}>: residual off-target "
            f"norm {others:.3e}"
        )
    return StateReduction(
        steps=tuple(tuple(s) for s in out_steps),
        residual=v,
        target=target,
        residual_phase=float(cmath.phase(v[target])),
    )


# ---------------------------------------------------------------------------
# QR decomposition over a precedence DAG
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalGate:
    """diag(e^{i theta_l}); optionally realized as z-phases over tree edges."""

    phases: tuple[float, ...]
    edge_phases: tuple[tuple[int, int, float], ...] | None = None

    @property
    def d(self) -> int:
        return len(self.phases)

    def matrix(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.array(self.phases)))

    def phase_sum(self) -> float:
        return float(sum(self.phases))


@dataclass(frozen=True)
class QrDecomposition:
    steps: tuple[tuple[GivensRotation, ...], ...]
    diagonal: DiagonalGate
    schedule: Schedule

    def rotations(self) -> list[GivensRotation]:
        return [r for step in self.steps for r in step]

    def reconstruct(self, d: int) -> np.ndarray:
        """U = D * G_T ... G_1 (rotations in application order)."""
        m = np.eye(d, dtype=complex)
        for step in self.steps:
            for r in step:
                m = apply_rotation_rows(m, r)
        return self.diagonal.matrix() @ m


def qr_decompose(
    g: CouplingGraph,
    dag: PrecedenceDag,
    u: np.ndarray,
    k: int | None = None,
) -> QrDecomposition:
    """Reduce u^dagger to diagonal form with the DAG's rotations.

    Each rotation zeroes one subdiagonal entry of the row-ordered matrix; the
    result satisfies u = D * (product of rotations) to reconstruction
    tolerance.
    """
    u = np.asarray(u, dtype=complex)
    d = g.d
    if u.shape != (d, d):
        raise NumericsError(f"matrix must be {d}x{d}")
    require_unitary(u, UNITARITY_TOL, "input")
    if len(dag) != d * (d - 1) // 2:
        raise ScheduleError(
            f"DAG must cover all {d * (d - 1) // 2} subdiagonal eliminations"
        )
    sched = constrain_width(dag, k)
    order = dag.row_order
    m = u.conj().T.copy()
    out_steps: list[list[GivensRotation]] = []
    for step in sched.steps:
        rots = []
        for lab in step:
            col_level = order[lab.column] if lab.column is not None else None
            if col_level is None:
                raise ScheduleError("QR schedule rotation lacks a column")
            r = zeroing_params(
                m[lab.pivot, col_level], m[lab.target, col_level],
                pivot=lab.pivot, target=lab.target,
            )
            m = apply_rotation_rows(m, r)
            rots.append(r)
        out_steps.append(rots)
    off = m - np.diag(np.diag(m))
    if np.linalg.norm(off) > 1e-8:
        raise NumericsError(
            f"QR reduction left off-diagonal mass {np.linalg.norm(off):.3e}"
        )
    # m is D^dagger
    phases = tuple(float(-cmath.phase(m[i, i])) for i in range(d))
    return QrDecomposition(
        steps=tuple(tuple(s) for s in out_steps),
        diagonal=DiagonalGate(phases=phases),
        schedule=sched,
    )


# ---------------------------------------------------------------------------
# Spectral synthesis
# ---------------------------------------------------------------------------


def eig_unitary(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues/orthonormal eigenvectors of a unitary, sorted by phase
    angle ascending in (-pi, pi]."""
    try:
        t, z = scipy.linalg.schur(np.asarray(u, dtype=complex), output="complex")
    except Exception as exc:  # pragma: no cover - scipy failure is exotic
        raise NumericsError(f"eigensolver failure: {exc}") from exc
    offdiag = np.linalg.norm(t - np.diag(np.diag(t)))
    if offdiag > 1e-8:
        raise NumericsError(f"eigensolver failure: non-normal input (defect {offdiag:.2e})")
    vals = np.diag(t)
    angles = np.angle(vals)
    angles = np.where(angles <= -np.pi + 1e-15, np.pi, angles)
    idx = np.argsort(angles, kind="stable")
    return vals[idx], z[:, idx]


def completion_unitary(v: np.ndarray, col: int) -> np.ndarray:
    """Deterministic unitary whose column `col` is v (Gram-Schmidt completion)."""
    d = v.shape[0]
    basis = [v / np.linalg.norm(v)]
    for m in range(d):
        if len(basis) == d:
            break
        e = np.zeros(d, dtype=complex)
        e[m] = 1.0
        for q in basis:
            e = e - np.vdot(q, e) * q
        n = np.linalg.norm(e)
        if n > 1e-9:
            basis.append(e / n)
    w = np.zeros((d, d), dtype=complex)
    w[:, col] = basis[0]
    rest = [i for i in range(d) if i != col]
    for i, q in zip(rest, basis[1:]):
        w[:, i] = q
    return w


def spectral_synthesize(u: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Factor u as a product over eigenpairs of W_l C_l W_l^dagger.

    W_l maps |l> to the l-th eigenvector; C_l is the identity with entry
    (l,l) replaced by the l-th eigenvalue.
    """
    u = np.asarray(u, dtype=complex)
    require_unitary(u, UNITARITY_TOL, "input")
    d = u.shape[0]
    vals, vecs = eig_unitary(u)
    factors = []
    for l in range(d):
        w = completion_unitary(vecs[:, l], l)
        c = np.eye(d, dtype=complex)
        c[l, l] = vals[l]
        factors.append((w, c))
    return factors


def spectral_reconstruct(factors: Sequence[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    d = factors[0][0].shape[0]
    out = np.eye(d, dtype=complex)
    for w, c in factors:
        out = out @ (w @ c @ w.conj().T)
    return out


def spectral_step_count(depths: Sequence[int]) -> int:
    """Rotation steps for the spectral route: forward and inverse synthesis
    per eigenvector, phases excluded."""
    return 2 * int(sum(depths))


# ---------------------------------------------------------------------------
# Diagonal gates
# ---------------------------------------------------------------------------


def normalize_su_phases(phases: Sequence[float]) -> tuple[float, ...]:
    """Shift phases by a multiple of 2*pi/d wraps so they sum to 0 exactly,
    without changing the diagonal gate."""
    ph = list(float(x) for x in phases)
    total = sum(ph)
    wraps = total / (2 * math.pi)
    n = round(wraps)
    if abs(total - 2 * math.pi * n) > 1e-8:
        raise NumericsError(
            "diagonal phases do not sum to 0 mod 2*pi; normalize to SU(d) first"
        )
    ph[0] -= total  # exact cancellation; still the same gate up to 2*pi*n
    return tuple(ph)


def diag_solve(t: SpanningTree, gate: DiagonalGate) -> tuple[tuple[int, int, float], ...]:
    """Phases over the tree's edges with prod_m exp(i phi_m Lz_{jm,km}) equal
    to the gate: one pass from the leaves upward solves the linear system."""
    if gate.d != t.d:
        raise NumericsError(f"gate dimension {gate.d} != tree dimension {t.d}")
    theta = list(normalize_su_phases(gate.phases))
    children = {v: set(cs) for v, cs in t.children().items()}
    parent = dict(t.parent)
    out: list[tuple[int, int, float]] = []
    pending = set(range(t.d)) - {t.root}
    while pending:
        leaves = [v for v in pending if not (children[v] & pending)]
        for v in leaves:
            u = parent[v]
            j, k = normalize_edge(u, v)
            # edge contributes +phi at j, -phi at k
            phi = theta[v] if v == j else -theta[v]
            contrib_u = phi if u == j else -phi
            theta[u] -= contrib_u
            out.append((j, k, phi))
            pending.discard(v)
    if abs(theta[t.root]) > 1e-9:
        raise NumericsError(
            f"tree phase solve left residue {theta[t.root]:.3e} at the root"
        )
    return tuple(out)


def diag_reconstruct(d: int, edge_phases: Iterable[tuple[int, int, float]]) -> np.ndarray:
    acc = np.zeros(d)
    for j, k, phi in edge_phases:
        acc[j] += phi
        acc[k] -= phi
    return np.diag(np.exp(1j * acc))


def euler_z_as_xyx(phi: float) -> tuple[float, float, float]:
    """Timings with e^{i phi Lz} = e^{i t1 Lx} e^{i t2 Ly} e^{i t3 Lx}."""
    return (math.pi / 4, -phi, -math.pi / 4)


def _axis_generator(axis: str) -> np.ndarray:
    if axis == "x":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if axis == "y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if axis == "z":
        return np.array([[1, 0], [0, -1]], dtype=complex)
    raise NumericsError(f"unknown axis {axis}")


def axis_pulse_2x2(axis: str, t: float) -> np.ndarray:
    return scipy.linalg.expm(1j * t * _axis_generator(axis))


def axis_pulse_matrix(d: int, j: int, k: int, axis: str, t: float) -> np.ndarray:
    m = np.eye(d, dtype=complex)
    b = axis_pulse_2x2(axis, t)
    m[j, j], m[j, k] = b[0, 0], b[0, 1]
    m[k, j], m[k, k] = b[1, 0], b[1, 1]
    return m


@dataclass(frozen=True)
class DiagonalPulseSchedule:
    """3c steps: per color class an x layer, a y layer, and an x layer.

    Step entries are (j, k, slot) with slot in {"x_pre", "y", "x_post"};
    chronologically x_pre carries t3, y carries t2 and x_post carries t1 of
    the Euler decomposition, so the product per edge is
    e^{i t1 Lx} e^{i t2 Ly} e^{i t3 Lx} = e^{i phi Lz}.
    """

    steps: tuple[tuple[tuple[int, int, str], ...], ...]

    @property
    def depth(self) -> int:
        return len(self.steps)

    def realize(self, d: int, edge_phases: dict[Edge, float]) -> list[np.ndarray]:
        mats = []
        for step in self.steps:
            m = np.eye(d, dtype=complex)
            for j, k, slot in step:
                phi = edge_phases[normalize_edge(j, k)]
                t1, t2, t3 = euler_z_as_xyx(phi)
                t = {"x_pre": t3, "y": t2, "x_post": t1}[slot]
                m = axis_pulse_matrix(d, j, k, "y" if slot == "y" else "x", t) @ m
            mats.append(m)
        return mats


def parallel_diagonal_schedule(
    t: SpanningTree, coloring: EdgeColoring
) -> DiagonalPulseSchedule:
    """Group same-color edges into three consecutive pulse layers each."""
    colored = set(coloring.color)
    if colored != set(t.edges):
        raise NumericsError("coloring does not cover exactly the tree edges")
    if not coloring.is_proper():
        raise NumericsError("improper coloring: adjacent edges share a color")
    steps: list[tuple[tuple[int, int, str], ...]] = []
    for cls in coloring.classes():
        for slot in ("x_pre", "y", "x_post"):
            steps.append(tuple((j, k, slot) for j, k in cls))
    return DiagonalPulseSchedule(steps=tuple(steps))


def realize_diagonal(
    t: SpanningTree, gate: DiagonalGate, coloring: EdgeColoring | None = None
) -> tuple[DiagonalPulseSchedule, np.ndarray]:
    """Solve for edge phases and realize the gate as 3c pulse layers.

    Returns the schedule and the realized matrix (equal to the normalized
    gate up to floating round-off).
    """
    from .coupling_graph import color_tree

    coloring = coloring or color_tree(t)
    edge_phases = {normalize_edge(j, k): phi for j, k, phi in diag_solve(t, gate)}
    sched = parallel_diagonal_schedule(t, coloring)
    mats = sched.realize(t.d, edge_phases)
    out = np.eye(t.d, dtype=complex)
    for m in mats:
        out = m @ out
    return sched, out


# ---------------------------------------------------------------------------
# Interleaved phasing after QR
# ---------------------------------------------------------------------------

# Published phase layers: one color class per entry, applied as x-y-x triples.
RB87_PHASE_LAYERS: tuple[tuple[Edge, ...], ...] = (
    ((0, 6),),
    ((0, 7), (1, 6), (2, 5)),
    ((0, 5), (1, 4), (2, 3)),
)
CS133_PHASE_LAYERS: tuple[tuple[Edge, ...], ...] = (
    ((0, 14),),
    ((0, 15), (1, 14), (2, 13), (3, 12), (4, 11), (5, 10), (6, 9)),
    ((0, 13), (1, 12), (2, 11), (3, 10), (4, 9), (5, 8), (6, 7)),
)


@dataclass(frozen=True)
class InterleavedSchedule:
    qr_depth: int
    total_depth: int
    # layer index -> (start_step, edges); each layer spans 3 steps (x, y, x)
    layers: tuple[tuple[int, tuple[Edge, ...]], ...]


def _row_finish_steps(qr_schedule: Schedule) -> dict[int, int]:
    finish: dict[int, int] = {}
    for i, step in enumerate(qr_schedule.steps, start=1):
        for r in step:
            finish[r.pivot] = i
            finish[r.target] = i
    return finish


def _auto_layers(qr_schedule: Schedule, edges: Iterable[Edge]) -> tuple[tuple[Edge, ...], ...]:
    finish = _row_finish_steps(qr_schedule)
    legal = {e: max(finish.get(e[0], 0), finish.get(e[1], 0)) + 1 for e in edges}
    layers: list[list[Edge]] = []
    for e in sorted(edges, key=lambda e: (legal[e], e)):
        for layer in layers:
            if all(not (set(e) & set(f)) for f in layer):
                layer.append(e)
                break
        else:
            layers.append([e])
    layers.sort(key=lambda layer: max(legal[e] for e in layer))
    return tuple(tuple(layer) for layer in layers)


def interleave_phasing(
    qr_schedule: Schedule,
    phase_edges: "Iterable[Edge] | Sequence[Sequence[Edge]]",
    k: int | None = None,
) -> InterleavedSchedule:
    """Overlap x-y-x phase layers with the tail of a QR schedule.

    The first layer starts at step (depth - 2) so the phase block extends the
    schedule by 3c - 3 steps; each layer must only touch rows already finished
    in the QR schedule, and must stay disjoint from concurrent rotations.
    """
    edges_arg = list(phase_edges)
    if edges_arg and isinstance(edges_arg[0][0], int):
        # flat edge set: derive the layer partition
        layers = _auto_layers(qr_schedule, [normalize_edge(*e) for e in edges_arg])
    else:
        layers = tuple(tuple(normalize_edge(*e) for e in grp) for grp in edges_arg)
    if not layers:
        return InterleavedSchedule(
            qr_depth=qr_schedule.depth, total_depth=qr_schedule.depth, layers=()
        )
    for grp in layers:
        used: set[int] = set()
        for e in grp:
            if set(e) & used:
                raise NumericsError(f"phase layer has overlapping edges at {e}")
            used |= set(e)

    finish = _row_finish_steps(qr_schedule)
    depth = qr_schedule.depth
    placed: list[tuple[int, tuple[Edge, ...]]] = []
    start = max(1, depth - 2)
    for grp in layers:
        for j, k2 in grp:
            need = max(finish.get(j, 0), finish.get(k2, 0)) + 1
            if need > start:
                raise NumericsError(
                    f"ordering violation: edge ({j},{k2}) becomes free at step "
                    f"{need}, after its phase layer start {start}"
                )
        # layer occupies steps start .. start+2; check disjointness/capacity
        for s in range(start, start + 3):
            concurrent = (
                qr_schedule.steps[s - 1] if s - 1 < len(qr_schedule.steps) else ()
            )
            used_levels = {x for r in concurrent for x in (r.pivot, r.target)}
            for e in grp:
                if set(e) & used_levels:
                    raise NumericsError(
                        f"phase edge {e} collides with QR rotations at step {s}"
                    )
            if k is not None and len(concurrent) + len(grp) > k:
                raise NumericsError(
                    f"step {s} exceeds the {k}-way budget with phase layer {grp}"
                )
        placed.append((start, grp))
        start += 3
    total = max(depth, placed[-1][0] + 2)
    return InterleavedSchedule(qr_depth=depth, total_depth=total, layers=tuple(placed))


# ---------------------------------------------------------------------------
# Matrix file format and random unitaries
# ---------------------------------------------------------------------------


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("dim"):
        raise NumericsError("matrix file must start with 'dim <n>'")
    try:
        n = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise NumericsError("matrix file must start with 'dim <n>'") from None
    if len(lines) != n + 1:
        raise NumericsError(f"expected {n} matrix rows, found {len(lines) - 1}")
    rows = []
    for i, ln in enumerate(lines[1:], start=1):
        toks = ln.split()
        if len(toks) != n:
            raise NumericsError(f"row {i}: expected {n} entries, found {len(toks)}")
        try:
            rows.append([complex(tok) for tok in toks])
        except ValueError as exc:
            raise NumericsError(f"row {i}: {exc}") from None
    return np.array(rows, dtype=complex)


def format_matrix(m: np.ndarray) -> str:
    n = m.shape[0]
    lines = [f"dim {n}"]
    for i in range(n):
        lines.append(" ".join(_fmt_complex(m[i, j]) for j in range(n)))
    return "\n".join(lines) + "\n"


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def random_unitary(d: int, seed: int = 0, special: bool = False) -> np.ndarray:
    """Seeded pseudorandom unitary: orthonormalized complex Gaussian matrix."""
    rng = np.random.default_rng(seed)
    ginv = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(ginv)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    u = q @ np.diag(ph)
    if special:
        det = np.linalg.det(u)
        u = u * det ** (-1.0 / d)
    return u


def random_state(d: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)
