"""Finite-dimensional quantum states on multi-qudit Hilbert spaces.

Subsystems are ordered row-major: the first subsystem is the most
significant tensor index. States are immutable once constructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-12
TRACE_TOL = 1e-12
NORM_TOL = 1e-12
DEGENERACY_TOL = 1e-10
RANK_TOL = 1e-12

SeedLike = Union[int, np.random.Generator, None]

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    """Normalize a subsystem-dimension list to a tuple of ints.

    A one-dimensional entry is allowed so that trivial ancillas (the
    purification of a pure state) can be represented.
    """
    out = tuple(int(d) for d in dims)
    if not out:
        raise ValueError("dims must be a nonempty list")
    if any(d < 1 for d in out):
        raise ValueError(f"every subsystem dimension must be positive, got {out}")
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = check_dims(self.dims)
        amp = _frozen(np.ravel(self.amplitudes))
        if amp.shape != (math.prod(dims),):
            raise ValueError(f"amplitude length {amp.shape[0]} does not match dims {dims}")
        norm = np.linalg.norm(amp)
        if abs(norm**2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: squared norm {norm**2!r}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def normalized(cls, vector, dims) -> "PureState":
        vector = np.asarray(vector, dtype=np.complex128).ravel()
        return cls(vector / np.linalg.norm(vector), dims)

    @property
    def total_dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.dims)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = check_dims(self.dims)
        m = _frozen(self.matrix)
        n = math.prod(dims)
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
        herm_err = np.max(np.abs(m - m.conj().T)) if n else 0.0
        if herm_err > HERMITIAN_TOL:
            raise ValueError(f"matrix is not Hermitian (deviation {herm_err:.3g})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace must be 1, got {tr!r}")
        min_eig = np.linalg.eigvalsh(m).min()
        if min_eig < -PSD_TOL:
            raise ValueError(f"matrix is not positive semidefinite (eigenvalue {min_eig:.3g})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @property
    def total_dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Spectrum in descending order."""
        return np.linalg.eigvalsh(self.matrix)[::-1]


State = Union[PureState, DensityMatrix]


def from_computed(matrix: np.ndarray, dims: Sequence[int]) -> DensityMatrix:
    """Wrap a matrix produced by our own arithmetic as a DensityMatrix.

    Roundoff from normalizing small-weight operators can push the result
    just outside the validity tolerances, so the matrix is Hermitized,
    clipped to the PSD cone and renormalized first. Never use this on
    user-supplied input.
    """
    m = np.asarray(matrix, dtype=np.complex128)
    m = 0.5 * (m + m.conj().T)
    tr = np.trace(m).real
    m = m / tr
    w = np.linalg.eigvalsh(m)
    if w.min() < -PSD_TOL:
        w, v = np.linalg.eigh(m)
        w = np.clip(w, 0.0, None)
        m = (v * (w / w.sum())) @ v.conj().T
        m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m, dims)


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    dims = check_dims(dims)
    n = math.prod(dims)
    return DensityMatrix(np.eye(n) / n, dims)


def basis_state(index: Sequence[int], dims: Sequence[int]) -> PureState:
    dims = check_dims(dims)
    v = np.zeros(math.prod(dims), dtype=np.complex128)
    v[np.ravel_multi_index(tuple(index), dims)] = 1.0
    return PureState(v, dims)


# --- tensor structure -------------------------------------------------------


def tensor_product(a: State, b: State) -> State:
    """Tensor product of two states of the same kind, dims concatenated."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), a.dims + b.dims)
    raise TypeError("tensor_product needs two PureStates or two DensityMatrices")


def _check_subsystems(keep: Iterable[int], n: int) -> tuple[int, ...]:
    keep = tuple(sorted(set(int(k) for k in keep)))
    if not keep:
        raise ValueError("subsystem selection must be nonempty")
    for k in keep:
        if not 0 <= k < n:
            raise IndexError(f"subsystem index {k} out of range for {n} subsystems")
    return keep


def partial_trace_array(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced matrix on `keep` (sorted indices); works on raw arrays."""
    n = len(dims)
    row = _LETTERS[:n]
    col = "".join(row[i] if i not in keep else _LETTERS[n + i] for i in range(n))
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    t = np.asarray(matrix).reshape(tuple(dims) * 2)
    reduced = np.einsum(f"{row}{col}->{out}", t)
    k = math.prod(dims[i] for i in keep)
    return reduced.reshape(k, k)


def partial_trace(rho: State, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the subsystems listed in `keep` (order is ignored)."""
    if isinstance(rho, PureState):
        rho = rho.density()
    keep = _check_subsystems(keep, len(rho.dims))
    m = partial_trace_array(rho.matrix, rho.dims, keep)
    return DensityMatrix(0.5 * (m + m.conj().T), tuple(rho.dims[i] for i in keep))


def permute_subsystems(rho: State, order: Sequence[int]) -> State:
    """Reorder subsystems so that new subsystem k is old subsystem order[k]."""
    order = tuple(order)
    if sorted(order) != list(range(len(rho.dims))):
        raise ValueError(f"{order} is not a permutation of the subsystems")
    dims = tuple(rho.dims[i] for i in order)
    if isinstance(rho, PureState):
        t = rho.amplitudes.reshape(rho.dims).transpose(order)
        return PureState(t.ravel(), dims)
    n = len(order)
    t = rho.matrix.reshape(rho.dims * 2).transpose(order + tuple(n + i for i in order))
    return DensityMatrix(t.reshape(math.prod(dims), -1), dims)


def embed_local(rho: DensityMatrix, local_dim: int) -> DensityMatrix:
    """Zero-pad every subsystem into C^local_dim (isometric embedding)."""
    if any(d > local_dim for d in rho.dims):
        raise ValueError(f"cannot embed dims {rho.dims} into local dimension {local_dim}")
    if all(d == local_dim for d in rho.dims):
        return rho
    n = len(rho.dims)
    big = np.zeros((local_dim,) * (2 * n), dtype=np.complex128)
    big[tuple(slice(0, d) for d in rho.dims * 2)] = rho.matrix.reshape(rho.dims * 2)
    return DensityMatrix(big.reshape(local_dim**n, -1), (local_dim,) * n)


def embed_pure(psi: PureState, local_dim: int) -> PureState:
    if any(d > local_dim for d in psi.dims):
        raise ValueError(f"cannot embed dims {psi.dims} into local dimension {local_dim}")
    big = np.zeros((local_dim,) * len(psi.dims), dtype=np.complex128)
    big[tuple(slice(0, d) for d in psi.dims)] = psi.amplitudes.reshape(psi.dims)
    return PureState(big.ravel(), (local_dim,) * len(psi.dims))


# --- spectral structure -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mags = np.abs(v)
    idx = int(np.argmax(mags >= mags.max() - 1e-9))
    return v * (abs(v[idx]) / v[idx])


def _canonical_cluster(vecs: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis for span(vecs): Gram-Schmidt of the
    projected computational basis vectors, taken in index order."""
    k = vecs.shape[1]
    proj = vecs @ vecs.conj().T
    out = []
    for i in range(proj.shape[0]):
        u = proj[:, i].copy()
        for w in out:
            u -= (w.conj() @ u) * w
        # second pass keeps orthogonality at machine precision
        for w in out:
            u -= (w.conj() @ u) * w
        nrm = np.linalg.norm(u)
        if nrm > 1e-6:
            out.append(u / nrm)
            if len(out) == k:
                break
    return np.stack(out, axis=1)


def eigendecompose_array(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(matrix)
    w, v = w[::-1], v[:, ::-1]
    cols = []
    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and abs(w[stop - 1] - w[stop]) < DEGENERACY_TOL:
            stop += 1
        block = v[:, start:stop]
        if stop - start > 1:
            block = _canonical_cluster(block)
        cols.extend(_fix_phase(block[:, j]) for j in range(block.shape[1]))
        start = stop
    return w.copy(), np.stack(cols, axis=1)


def eigendecompose(rho: DensityMatrix) -> EigenDecomposition:
    """Spectral decomposition with descending eigenvalues.

    Eigenvectors inside a degenerate cluster are fixed by Gram-Schmidt on
    the computational basis; each vector's largest entry is made real
    positive.
    """
    w, v = eigendecompose_array(rho.matrix)
    return EigenDecomposition(w, v)


def schmidt_decompose(
    psi: PureState, cut: Sequence[int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt coefficients and bases of `psi` across `cut` | rest.

    Returns (coefficients, left, right) with left/right basis vectors as
    columns; coefficients below 1e-12 are dropped.
    """
    n = len(psi.dims)
    left = _check_subsystems(cut, n)
    right = tuple(i for i in range(n) if i not in left)
    if not right:
        raise ValueError("cut must leave a nonempty complement")
    dl = math.prod(psi.dims[i] for i in left)
    t = psi.amplitudes.reshape(psi.dims).transpose(left + right).reshape(dl, -1)
    u, s, vh = np.linalg.svd(t, full_matrices=False)
    keep = s > 1e-12
    return s[keep], u[:, keep], vh[keep].T


def purify(rho: DensityMatrix) -> PureState:
    """Purification on system (x) ancilla, ancilla dimension = rank(rho)."""
    w, v = eigendecompose_array(rho.matrix)
    keep = w > RANK_TOL
    w, v = w[keep], v[:, keep]
    psi = (v * np.sqrt(w)).reshape(-1)  # sum_i sqrt(w_i) |e_i>|i>
    return PureState.normalized(psi, rho.dims + (len(w),))


# --- random states ----------------------------------------------------------


def haar_random_pure(dims: Sequence[int], seed: SeedLike = None) -> PureState:
    """Haar-distributed pure state (normalized complex Gaussian vector)."""
    dims = check_dims(dims)
    rng = as_rng(seed)
    n = math.prod(dims)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PureState.normalized(v, dims)


def random_density(dims: Sequence[int], rank: int | None = None, seed: SeedLike = None) -> DensityMatrix:
    """Marginal of a Haar-random purification with a `rank`-dim ancilla."""
    dims = check_dims(dims)
    n = math.prod(dims)
    rank = n if rank is None else int(rank)
    if not 1 <= rank <= n:
        raise ValueError(f"rank must be between 1 and {n}, got {rank}")
    psi = haar_random_pure(dims + (rank,), seed)
    m = psi.amplitudes.reshape(n, rank)
    m = m @ m.conj().T
    return DensityMatrix(0.5 * (m + m.conj().T), dims)


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar isometry via QR of a complex Ginibre matrix."""
    g = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# --- named states -----------------------------------------------------------


def ghz_state(n: int, d: int = 2) -> PureState:
    v = np.zeros(d**n, dtype=np.complex128)
    for k in range(d):
        v[np.ravel_multi_index((k,) * n, (d,) * n)] = 1.0
    return PureState.normalized(v, (d,) * n)


def w_state(n: int = 3) -> PureState:
    v = np.zeros(2**n, dtype=np.complex128)
    for k in range(n):
        v[1 << (n - 1 - k)] = 1.0
    return PureState.normalized(v, (2,) * n)


def bell_state() -> PureState:
    return ghz_state(2)


# --- serialization ----------------------------------------------------------


def state_to_record(state: State) -> dict:
    """Structured record {dims, re, im}; pure states carry 1-D lists."""
    a = state.amplitudes if isinstance(state, PureState) else state.matrix
    return {"dims": list(state.dims), "re": a.real.tolist(), "im": a.imag.tolist()}


def state_from_record(record: dict) -> State:
    try:
        dims = record["dims"]
        re = np.asarray(record["re"], dtype=float)
        im = np.asarray(record.get("im", np.zeros_like(re)), dtype=float)
    except KeyError as exc:
        raise ValueError(f"state record is missing field {exc.args[0]!r}") from None
    if re.shape != im.shape:
        raise ValueError("state record fields 're' and 'im' differ in shape")
    data = re + 1j * im
    if data.ndim == 1:
        return PureState(data, dims)
    if data.ndim == 2:
        return DensityMatrix(data, dims)
    raise ValueError(f"state record has {data.ndim}-dimensional data")
