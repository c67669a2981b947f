"""Convex and concave roofs of pure-state entanglement functionals, and the
one-way unlocalizable q-entanglement, by multi-start derivative-free search.

Every pure-state decomposition of rho with r = rank(rho) arises from an
m x r isometry V acting on the weighted eigenvectors (HJW), and every
rank-1 measurement with n outcomes on a d-dimensional system is an
n x d isometry. Both searches therefore run over isometries, parametrized
by unconstrained complex matrices and projected back by Gram-Schmidt.

Search: each restart evaluates `samples_per_restart` Haar isometries and
hill-climbs from its own random start with Gaussian steps whose scale decays
geometrically from `step_start` to `step_end`. A few structured anchor
points (eigenbasis, Fourier basis, ...) are always climbed as well. The
result is the best value seen anywhere, so it is a one-sided bound: an
upper bound for minimizations and a lower bound for maximizations.

Restarts are batched through numpy; restart i draws from its own streams
seeded by (seed, i), so adding restarts or samples never changes what the
existing ones see and can only improve the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .entropy import (
    is_limit,
    renyi_from_spectrum,
    tsallis_from_spectrum,
    tsallis_quantum,
)
from .states import (
    DensityMatrix,
    PureState,
    RANK_TOL,
    State,
    eigendecompose,
    eigendecompose_array,
    partial_trace,
    schmidt_decompose,
    _check_subsystems,
)

ZERO_PROB = 1e-12
CONVERGENCE_TOL = 1e-7


@dataclass(frozen=True)
class OptimizerBudget:
    restarts: int = 64
    samples_per_restart: int = 16
    refine_steps: int = 1500
    seed: int = 0
    step_start: float = 0.2
    step_end: float = 1e-4

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.samples_per_restart < 1:
            raise ValueError("samples_per_restart must be at least 1")
        if self.refine_steps < 0:
            raise ValueError("refine_steps must be nonnegative")


@dataclass(frozen=True)
class PureFunctional:
    """Entanglement of a pure state as a function of its Schmidt spectrum."""

    kind: str
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("tsallis", "renyi", "tangle"):
            raise ValueError(f"unknown pure-state functional {self.kind!r}")
        if not self.param > 0:
            raise ValueError("functional parameter must be positive")

    def __call__(self, spectra: np.ndarray) -> np.ndarray:
        if self.kind == "tsallis":
            return tsallis_from_spectrum(spectra, self.param)
        if self.kind == "renyi":
            return renyi_from_spectrum(spectra, self.param)
        return 2.0 * (1.0 - np.sum(spectra**2, axis=-1))

    @property
    def label(self) -> str:
        if self.kind == "tangle":
            return "tangle"
        return f"{self.kind}({self.param:g})"


def tsallis(q: float) -> PureFunctional:
    return PureFunctional("tsallis", q)


def renyi(alpha: float) -> PureFunctional:
    return PureFunctional("renyi", alpha)


def tangle() -> PureFunctional:
    return PureFunctional("tangle")


# --- certificates ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PureDecomposition:
    probs: np.ndarray
    states: tuple[PureState, ...]
    target: DensityMatrix

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("decomposition weights must be a probability distribution")
        if len(p) != len(self.states):
            raise ValueError("need one weight per state")
        recon = sum(pi * np.outer(s.amplitudes, s.amplitudes.conj()) for pi, s in zip(p, self.states))
        err = np.max(np.abs(recon - self.target.matrix))
        if err > 1e-9:
            raise ValueError(f"decomposition does not reproduce its target (error {err:.3g})")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "states", tuple(self.states))

    def average(self, functional: PureFunctional, cut: Sequence[int], q_weight: float = 1.0) -> float:
        """sum_i p_i^w f(psi_i); w = 1 gives the plain roof average."""
        vals = [pure_value(s, cut, functional) for s in self.states]
        return float(np.sum(self.probs**q_weight * np.asarray(vals)))


@dataclass(frozen=True, eq=False)
class RankOneMeasurement:
    operators: np.ndarray  # (n, d, d)

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=np.complex128)
        d = ops.shape[-1]
        if ops.ndim != 3 or ops.shape[1] != d:
            raise ValueError("operators must have shape (n, d, d)")
        if np.max(np.abs(ops.sum(axis=0) - np.eye(d))) > 1e-10:
            raise ValueError("measurement operators do not sum to the identity")
        for m in ops:
            w = np.linalg.eigvalsh(m)
            if w[0] < -1e-10 or (d > 1 and w[-2] > 1e-10):
                raise ValueError("every measurement operator must be positive and rank one")
        object.__setattr__(self, "operators", ops)

    @property
    def outcomes(self) -> int:
        return self.operators.shape[0]


Certificate = Union[PureDecomposition, RankOneMeasurement]


@dataclass(frozen=True, eq=False)
class RoofResult:
    value: float
    bound_direction: str  # "upper" or "lower"
    certificate: Certificate
    restarts_used: int
    converged: bool


# --- pure-state values -------------------------------------------------------


def _cut_groups(dims: Sequence[int], cut: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    left = _check_subsystems(cut, len(dims))
    right = tuple(i for i in range(len(dims)) if i not in left)
    if not right:
        raise ValueError("cut must leave a nonempty complement")
    return left, right


def pure_value(psi: PureState, cut: Sequence[int], functional: PureFunctional) -> float:
    coeffs, _, _ = schmidt_decompose(psi, cut)
    return float(functional(coeffs**2))


def tsallis_entanglement_pure(psi: PureState, cut: Sequence[int], q: float) -> float:
    """T_q(|psi>) = S_q of the marginal on `cut`."""
    return pure_value(psi, cut, tsallis(q))


def tangle_pure(psi: PureState, cut: Sequence[int]) -> float:
    """4 det(rho_A) for a qubit A = `cut`."""
    left, _ = _cut_groups(psi.dims, cut)
    if math.prod(psi.dims[i] for i in left) != 2:
        raise ValueError("tangle needs a qubit on the cut side")
    rho_a = partial_trace(psi, left)
    return float(4.0 * np.linalg.det(rho_a.matrix).real)


# --- isometry machinery ------------------------------------------------------


def _polar(a: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(a, full_matrices=False)
    return u @ vh


def _orthonormalize(a: np.ndarray) -> np.ndarray:
    """Batched Gram-Schmidt on the columns of (..., m, r) matrices.

    Two passes keep the columns orthonormal to machine precision; much
    cheaper than a batched SVD for the small r used here.
    """
    cols = []
    for j in range(a.shape[-1]):
        v = a[..., j]
        for _ in range(2):
            for u in cols:
                v = v - np.sum(u.conj() * v, axis=-1, keepdims=True) * u
        v = v / np.linalg.norm(v, axis=-1, keepdims=True)
        cols.append(v)
    return np.stack(cols, axis=-1)


def _eigvalsh_small(h: np.ndarray) -> np.ndarray:
    """Eigenvalues of batched Hermitian matrices; closed form for 2 x 2."""
    if h.shape[-1] == 2:
        a, c = h[..., 0, 0].real, h[..., 1, 1].real
        mean = 0.5 * (a + c)
        rad = np.sqrt((0.5 * (a - c)) ** 2 + np.abs(h[..., 0, 1]) ** 2)
        return np.stack([mean - rad, mean + rad], axis=-1)
    return np.linalg.eigvalsh(h)


def _eigvalsh_gram(t: np.ndarray) -> np.ndarray:
    """Eigenvalues of t t^dagger for (..., k, n) arrays; closed form for k = 2."""
    if t.shape[-2] == 2:
        a = np.sum(np.abs(t[..., 0, :]) ** 2, axis=-1)
        c = np.sum(np.abs(t[..., 1, :]) ** 2, axis=-1)
        b = np.sum(t[..., 0, :] * t[..., 1, :].conj(), axis=-1)
        mean = 0.5 * (a + c)
        rad = np.sqrt((0.5 * (a - c)) ** 2 + np.abs(b) ** 2)
        return np.stack([mean - rad, mean + rad], axis=-1)
    return np.linalg.eigvalsh(t @ np.swapaxes(t.conj(), -1, -2))


def _haar_isometries(rng: np.random.Generator, count: int, rows: int, cols: int) -> np.ndarray:
    # candidate k only consumes the k-th slice of draws, so batches are prefixes of larger ones
    raw = rng.standard_normal((count, rows, cols, 2))
    g = raw[..., 0] + 1j * raw[..., 1]
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[:, None, :]


class _DecompositionSpace:
    """Pure-state decompositions of rho across a cut, indexed by isometries."""

    def __init__(self, rho: DensityMatrix, cut: Sequence[int], functional: PureFunctional, m: int | None):
        self.rho = rho
        self.functional = functional
        self.left, self.right = _cut_groups(rho.dims, cut)
        w, v = eigendecompose_array(rho.matrix)
        r = int(np.sum(w > RANK_TOL))
        self.rank = r
        self.weighted = v[:, :r] * np.sqrt(w[:r])  # D x r
        self.m = r * r if m is None else int(m)
        if self.m < r:
            raise ValueError(f"cardinality {self.m} is below rank {r}")
        self.shape = (self.m, r)
        self._perm = self.left + self.right
        self._dl = math.prod(rho.dims[i] for i in self.left)
        self._dr = math.prod(rho.dims[i] for i in self.right)

    def vectors(self, iso: np.ndarray) -> np.ndarray:
        """Unnormalized members phi_x = sum_i V_xi sqrt(l_i) |e_i>, shape (..., m, D)."""
        return iso @ self.weighted.T

    def _spectra(self, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lead = phi.shape[:-1]
        t = phi.reshape(lead + self.rho.dims)
        k = len(lead)
        if self._perm != tuple(range(len(self._perm))):
            t = t.transpose(tuple(range(k)) + tuple(k + i for i in self._perm))
        t = t.reshape(lead + (self._dl, self._dr))
        if self._dl > self._dr:
            t = np.swapaxes(t, -1, -2)
        ev = _eigvalsh_gram(t)
        p = ev.sum(axis=-1)
        return p, ev

    def evaluate(self, iso: np.ndarray) -> np.ndarray:
        p, ev = self._spectra(self.vectors(iso))
        ok = p > ZERO_PROB
        spectra = ev / np.where(ok, p, 1.0)[..., None]
        vals = self.functional(spectra)
        return np.sum(np.where(ok, p * vals, 0.0), axis=-1)

    def anchors(self) -> np.ndarray:
        m, r = self.shape
        eye = np.zeros((m, r), dtype=np.complex128)
        eye[:r, :r] = np.eye(r)
        out = [eye]
        if r > 1:
            dft = np.zeros((m, r), dtype=np.complex128)
            dft[:r] = np.exp(2j * np.pi * np.outer(np.arange(r), np.arange(r)) / r) / np.sqrt(r)
            out.append(dft)
        return np.stack(out)

    def certificate(self, iso: np.ndarray) -> PureDecomposition:
        phi = self.vectors(iso)
        p = np.sum(np.abs(phi) ** 2, axis=-1)
        keep = p > ZERO_PROB
        states = tuple(PureState.normalized(v, self.rho.dims) for v in phi[keep])
        return PureDecomposition(p[keep], states, self.rho)


class _MeasurementSpace:
    """Rank-1 measurements on B of a bipartite rho_AB, valued by chi_q."""

    def __init__(self, rho: DensityMatrix, q: float, outcomes: int | None):
        if len(rho.dims) != 2:
            raise ValueError(f"expected a bipartite state, got dims {rho.dims}")
        self.rho = rho
        self.q = q
        self.d_a, self.d_b = rho.dims
        self.n = self.d_b**2 if outcomes is None else int(outcomes)
        if self.n < self.d_b:
            raise ValueError(f"need at least {self.d_b} outcomes")
        self.shape = (self.n, self.d_b)
        # (b, a c d) layout so that rows w contract with a single matmul
        t = rho.matrix.reshape(self.d_a, self.d_b, self.d_a, self.d_b)
        self._t = t.transpose(1, 0, 2, 3).reshape(self.d_b, -1)
        self.s_a = tsallis_quantum(partial_trace(rho, [0]), q)

    def evaluate(self, iso: np.ndarray) -> np.ndarray:
        # rows w_x give M_x = |v><v| with v = conj(w_x)
        lead = iso.shape[:-1]
        half = (iso @ self._t).reshape(lead + (self.d_a * self.d_a, self.d_b))
        parts = (half @ iso.conj()[..., None]).reshape(lead + (self.d_a, self.d_a))
        ev = _eigvalsh_small(parts)
        p = ev.sum(axis=-1)
        ok = p > ZERO_PROB
        spectra = ev / np.where(ok, p, 1.0)[..., None]
        pw = p if is_limit(self.q) else np.where(ok, p, 0.0) ** self.q
        kept = np.sum(np.where(ok, pw * tsallis_from_spectrum(spectra, self.q), 0.0), axis=-1)
        return self.s_a - kept

    def _basis_rows(self, basis: np.ndarray, scale: float) -> np.ndarray:
        return basis.conj().T * scale

    def anchors(self) -> np.ndarray:
        rho_b = partial_trace(self.rho, [1])
        e = eigendecompose(rho_b).eigenvectors
        d = self.d_b
        f = e @ np.exp(2j * np.pi * np.outer(np.arange(d), np.arange(d)) / d) / np.sqrt(d)
        out = []
        for rows in (
            self._basis_rows(e, 1.0),
            self._basis_rows(f, 1.0),
            np.vstack([self._basis_rows(e, 2**-0.5), self._basis_rows(f, 2**-0.5)]),
        ):
            if rows.shape[0] <= self.n:
                pad = np.zeros(self.shape, dtype=np.complex128)
                pad[: rows.shape[0]] = rows
                out.append(pad)
        return np.stack(out)

    def certificate(self, iso: np.ndarray) -> RankOneMeasurement:
        norms = np.sum(np.abs(iso) ** 2, axis=-1)
        rows = iso[norms > ZERO_PROB]
        ops = np.einsum("xb,xd->xbd", rows.conj(), rows)
        return RankOneMeasurement(ops)


def measurement_value(rho_ab: DensityMatrix, measurement: RankOneMeasurement, q: float) -> float:
    """chi_q of the ensemble of A induced by a rank-1 measurement on B."""
    space = _MeasurementSpace(rho_ab, q, measurement.outcomes)
    rows = []
    for m in measurement.operators:
        w, v = np.linalg.eigh(m)
        rows.append(np.sqrt(max(w[-1], 0.0)) * v[:, -1].conj())
    return float(space.evaluate(np.array(rows)))


# --- search ------------------------------------------------------------------


def _search(space, maximize: bool, budget: OptimizerBudget) -> tuple[np.ndarray, float, bool]:
    """Best isometry, its value, and the convergence flag."""
    sign = -1.0 if maximize else 1.0
    rows, cols = space.shape
    anchors = space.anchors()
    n_anchor = len(anchors)
    n_restart = budget.restarts
    root = np.random.SeedSequence(budget.seed)

    def stream(*key):
        return np.random.default_rng(np.random.SeedSequence(root.entropy, spawn_key=key))

    # sampling phase: the net of random candidates, plus each restart's start
    best_sample = np.empty(n_restart)
    best_sample_iso = np.empty((n_restart, rows, cols), dtype=np.complex128)
    starts = np.empty((n_restart, rows, cols), dtype=np.complex128)
    for i in range(n_restart):
        cand = _haar_isometries(stream(0, i, 0), budget.samples_per_restart, rows, cols)
        vals = sign * space.evaluate(cand)
        j = int(np.argmin(vals))
        best_sample[i], best_sample_iso[i] = vals[j], cand[j]
        starts[i] = _haar_isometries(stream(0, i, 2), 1, rows, cols)[0]

    current = np.concatenate([anchors, starts])
    score = sign * space.evaluate(current)
    noise_rngs = [stream(1, j) for j in range(n_anchor)] + [stream(0, i, 1) for i in range(n_restart)]
    steps = budget.refine_steps
    chunk = 256
    for start in range(0, steps, chunk):
        size = min(chunk, steps - start)
        noise = np.stack([
            g.standard_normal((size, rows, cols, 2)) for g in noise_rngs
        ])
        noise = noise[..., 0] + 1j * noise[..., 1]
        for k in range(size):
            frac = (start + k) / max(steps - 1, 1)
            sigma = budget.step_start * (budget.step_end / budget.step_start) ** frac
            trial = _orthonormalize(current + sigma * noise[:, k])
            trial_score = sign * space.evaluate(trial)
            better = trial_score < score
            current = np.where(better[:, None, None], trial, current)
            score = np.where(better, trial_score, score)

    # merge: anchors first, then restarts in index order
    climb_anchor, climb_restart = score[:n_anchor], score[n_anchor:]
    per_restart = np.minimum(climb_restart, best_sample)
    per_iso = np.where(
        (climb_restart <= best_sample)[:, None, None], current[n_anchor:], best_sample_iso
    )
    all_scores = np.concatenate([climb_anchor, per_restart])
    all_isos = np.concatenate([current[:n_anchor], per_iso])
    running = np.minimum.accumulate(all_scores)
    tail = n_anchor + int(math.ceil(0.75 * n_restart)) - 1
    converged = bool(running[tail] - running[-1] < CONVERGENCE_TOL)
    best = int(np.argmin(all_scores))
    return all_isos[best], float(sign * all_scores[best]), converged


def _check_functional_cut(rho: DensityMatrix, cut: Sequence[int], functional: PureFunctional):
    left, _ = _cut_groups(rho.dims, cut)
    if functional.kind == "tangle" and math.prod(rho.dims[i] for i in left) != 2:
        raise ValueError("tangle needs a qubit on the cut side")


def _roof(rho: State, cut, functional, budget, cardinality, maximize: bool) -> RoofResult:
    if isinstance(rho, PureState):
        rho = rho.density()
    budget = budget or OptimizerBudget()
    _check_functional_cut(rho, cut, functional)
    space = _DecompositionSpace(rho, cut, functional, cardinality)
    direction = "lower" if maximize else "upper"
    if space.rank == 1:
        iso = np.ones((1, 1), dtype=np.complex128)
        space.m, space.shape = 1, (1, 1)
        cert = space.certificate(iso)
        return RoofResult(float(space.evaluate(iso)), direction, cert, 0, True)
    iso, value, converged = _search(space, maximize, budget)
    return RoofResult(value, direction, space.certificate(iso), budget.restarts, converged)


def convex_roof(
    rho: State,
    cut: Sequence[int],
    functional: PureFunctional,
    budget: OptimizerBudget | None = None,
    cardinality: int | None = None,
) -> RoofResult:
    """min over decompositions of sum_i p_i f(psi_i); an upper bound.

    `cardinality` is the number of decomposition members searched
    (default rank^2).
    """
    return _roof(rho, cut, functional, budget, cardinality, maximize=False)


def concave_roof(
    rho: State,
    cut: Sequence[int],
    functional: PureFunctional,
    budget: OptimizerBudget | None = None,
    cardinality: int | None = None,
) -> RoofResult:
    """max over decompositions of sum_i p_i f(psi_i); a lower bound."""
    return _roof(rho, cut, functional, budget, cardinality, maximize=True)


def decomposition_from_isometry(rho: DensityMatrix, isometry: np.ndarray) -> PureDecomposition:
    """Decomposition |phi_x> ~ sum_i V_xi sqrt(l_i) |e_i> for an m x r matrix V.

    V is replaced by its polar (isometric) factor, so any full-rank
    parameter matrix is accepted.
    """
    v = np.atleast_2d(np.asarray(isometry, dtype=np.complex128))
    space = _DecompositionSpace(rho, [0], tsallis(1.0), v.shape[0] if v.shape[0] >= 1 else None)
    if v.shape[1] != space.rank:
        raise ValueError(f"isometry needs {space.rank} columns (the rank), got {v.shape[1]}")
    if v.shape[0] < space.rank:
        raise ValueError(f"cardinality {v.shape[0]} is below rank {space.rank}")
    return space.certificate(_polar(v))


def unlocalizable_q_entanglement(
    rho_ab: DensityMatrix,
    q: float,
    budget: OptimizerBudget | None = None,
    outcomes: int | None = None,
) -> RoofResult:
    """min over rank-1 measurements on B of the Tsallis-q difference of the
    induced ensemble of A; the returned value is an upper bound.

    Searches measurements with `outcomes` elements (default d_B^2).
    """
    q = float(q)
    if q < 1.0 and not is_limit(q):
        raise ValueError(f"unlocalizable q-entanglement needs q >= 1, got {q}")
    space = _MeasurementSpace(rho_ab, q, outcomes)
    iso, value, converged = _search(space, False, budget or OptimizerBudget())
    return RoofResult(value, "upper", space.certificate(iso), (budget or OptimizerBudget()).restarts, converged)


def qb_split_measurement(rho_ab: DensityMatrix) -> RankOneMeasurement:
    """2d-outcome measurement: eigenbasis projectors of rho_B and Fourier
    projectors, each with weight 1/2."""
    if len(rho_ab.dims) != 2:
        raise ValueError(f"expected a bipartite state, got dims {rho_ab.dims}")
    e = eigendecompose(partial_trace(rho_ab, [1])).eigenvectors
    d = e.shape[0]
    f = e @ np.exp(2j * np.pi * np.outer(np.arange(d), np.arange(d)) / d) / np.sqrt(d)
    vecs = np.concatenate([e, f], axis=1)
    return RankOneMeasurement(0.5 * np.einsum("bx,dx->xbd", vecs, vecs.conj()))
