"""Weyl operators, the two dephasing channels and the four-party
classical-classical-quantum state built from a bipartite state.

The flagged state is

    Omega_XYAB = 1/d^2 sum_{x,y} |x><x| (x) |y><y| (x) sigma^{xy}_AB,
    sigma^{xy} = (I (x) X^x Z^y) rho_AB (I (x) Z^-y X^-x),

with X, Z the shift and clock operators written in the eigenbasis of
rho_B. A CcqState in general form holds arbitrary blocks sigma^{xy}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .entropy import (
    Ensemble,
    is_limit,
    q_log,
    tsallis_from_spectrum,
    tsallis_mutual,
    tsallis_q_difference,
    tsallis_quantum,
)
from .states import (
    DensityMatrix,
    as_rng,
    random_density,
    EigenDecomposition,
    eigendecompose,
    embed_local,
    from_computed,
    maximally_mixed,
    partial_trace,
    state_to_record,
    state_from_record,
)

ZERO_WEIGHT = 1e-12
FULL_ASSEMBLY_MAX_D = 4


@dataclass(frozen=True, eq=False)
class WeylPair:
    d: int
    Z: np.ndarray
    X: np.ndarray
    omega: complex
    basis: np.ndarray  # columns |e_j>


@dataclass(frozen=True, eq=False)
class FourierBasis:
    vectors: np.ndarray  # columns |e~_j> = d^-1/2 sum_k w^{jk} |e_k>


def build_weyl(eig: EigenDecomposition) -> tuple[WeylPair, FourierBasis]:
    """Clock/shift pair and Fourier basis over the eigenbasis `eig`."""
    e = np.asarray(eig.eigenvectors)
    d = e.shape[0]
    if e.shape != (d, d) or np.max(np.abs(e.conj().T @ e - np.eye(d))) > 1e-10:
        raise ValueError("eigenbasis must be a complete orthonormal basis")
    omega = np.exp(2j * np.pi / d)
    phases = omega ** np.arange(d)
    Z = (e * phases) @ e.conj().T
    X = np.roll(e, -1, axis=1) @ e.conj().T  # |e_{j+1}><e_j|
    jk = np.outer(np.arange(d), np.arange(d))
    fourier = e @ (omega**jk) / np.sqrt(d)  # column j = sum_k w^{jk} |e_k> / sqrt d
    return WeylPair(d, Z, X, omega, e), FourierBasis(fourier)


def shift_in_fourier_form(pair: WeylPair, fourier: FourierBasis) -> np.ndarray:
    """X written as sum_j w^-j |e~_j><e~_j|."""
    f = fourier.vectors
    return (f * pair.omega ** (-np.arange(pair.d))) @ f.conj().T


def _dephase(sigma: np.ndarray, basis: np.ndarray) -> np.ndarray:
    diag = np.einsum("ij,ik,kj->j", basis.conj(), sigma, basis)
    return (basis * diag) @ basis.conj().T


def dephase_channels(sigma: DensityMatrix, pair: WeylPair) -> tuple[DensityMatrix, DensityMatrix]:
    """(M0(sigma), M1(sigma)): dephasing in the eigenbasis and in the
    Fourier basis, projector form."""
    if sigma.total_dim != pair.d:
        raise ValueError(f"state of dimension {sigma.total_dim} does not match d={pair.d}")
    _, fourier = build_weyl(EigenDecomposition(np.zeros(pair.d), pair.basis))
    m0 = _dephase(sigma.matrix, pair.basis)
    m1 = _dephase(sigma.matrix, fourier.vectors)
    return DensityMatrix(m0, sigma.dims), DensityMatrix(m1, sigma.dims)


def twirl_channels(sigma: DensityMatrix, pair: WeylPair) -> tuple[DensityMatrix, DensityMatrix]:
    """The same channels as Weyl twirls: 1/d sum_b Z^b s Z^-b and 1/d sum_a X^a s X^-a."""
    if sigma.total_dim != pair.d:
        raise ValueError(f"state of dimension {sigma.total_dim} does not match d={pair.d}")
    d, s = pair.d, sigma.matrix
    zs = [np.linalg.matrix_power(pair.Z, b) for b in range(d)]
    xs = [np.linalg.matrix_power(pair.X, a) for a in range(d)]
    m0 = sum(z @ s @ z.conj().T for z in zs) / d
    m1 = sum(x @ s @ x.conj().T for x in xs) / d
    return DensityMatrix(m0, sigma.dims), DensityMatrix(m1, sigma.dims)


# --- ccq states -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CcqState:
    """Flagged state with blocks[x, y] = sigma^{xy}_AB and weights 1/d^2."""

    blocks: np.ndarray  # (d, d, D, D)
    dims_ab: tuple[int, int]
    form: str = "general"

    def __post_init__(self):
        b = np.array(self.blocks, dtype=np.complex128)
        if b.ndim != 4 or b.shape[0] != b.shape[1] or b.shape[2] != b.shape[3]:
            raise ValueError("blocks must have shape (d, d, D, D)")
        dims_ab = tuple(int(x) for x in self.dims_ab)
        if b.shape[2] != dims_ab[0] * dims_ab[1]:
            raise ValueError("block size does not match dims_ab")
        if self.form not in ("weyl", "general"):
            raise ValueError(f"unknown ccq form {self.form!r}")
        for x in range(b.shape[0]):
            for y in range(b.shape[1]):
                DensityMatrix(b[x, y], dims_ab)  # validates each block
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)
        object.__setattr__(self, "dims_ab", dims_ab)

    @property
    def d(self) -> int:
        return self.blocks.shape[0]

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.d, self.d) + self.dims_ab

    def matrix(self) -> np.ndarray:
        d, big = self.d, self.blocks.shape[2]
        out = np.zeros((d, d, big, d, d, big), dtype=np.complex128)
        for x in range(d):
            for y in range(d):
                out[x, y, :, x, y, :] = self.blocks[x, y] / d**2
        return out.reshape(d * d * big, -1)

    def assemble(self) -> DensityMatrix:
        return DensityMatrix(self.matrix(), self.dims)

    def omega_xab(self) -> DensityMatrix:
        d, big = self.d, self.blocks.shape[2]
        out = np.zeros((d, big, d, big), dtype=np.complex128)
        for x in range(d):
            out[x, :, x, :] = self.blocks[x].sum(axis=0) / d**2
        return DensityMatrix(out.reshape(d * big, -1), (d,) + self.dims_ab)

    def omega_yab(self) -> DensityMatrix:
        d, big = self.d, self.blocks.shape[2]
        out = np.zeros((d, big, d, big), dtype=np.complex128)
        for y in range(d):
            out[y, :, y, :] = self.blocks[:, y].sum(axis=0) / d**2
        return DensityMatrix(out.reshape(d * big, -1), (d,) + self.dims_ab)

    def omega_ab(self) -> DensityMatrix:
        return DensityMatrix(self.blocks.sum(axis=(0, 1)) / self.d**2, self.dims_ab)

    def omega_xy(self) -> DensityMatrix:
        n = self.d**2
        return DensityMatrix(np.eye(n) / n, (self.d, self.d))

    def to_record(self) -> dict:
        return {
            "form": self.form,
            "blocks": [
                {"x": x, "y": y, "state": state_to_record(DensityMatrix(self.blocks[x, y], self.dims_ab))}
                for x in range(self.d)
                for y in range(self.d)
            ],
        }

    @classmethod
    def from_record(cls, record: dict) -> "CcqState":
        entries = record["blocks"]
        d = int(round(np.sqrt(len(entries))))
        first = state_from_record(entries[0]["state"])
        big = first.total_dim
        blocks = np.zeros((d, d, big, big), dtype=np.complex128)
        for e in entries:
            blocks[e["x"], e["y"]] = state_from_record(e["state"]).matrix
        return cls(blocks, first.dims, record.get("form", "general"))


def _as_square_bipartite(rho_ab: DensityMatrix) -> DensityMatrix:
    if len(rho_ab.dims) != 2:
        raise ValueError(f"expected a bipartite state, got dims {rho_ab.dims}")
    return embed_local(rho_ab, max(rho_ab.dims))


def _local_b(op: np.ndarray, d_a: int) -> np.ndarray:
    return np.kron(np.eye(d_a), op)


def build_ccq(rho_ab: DensityMatrix) -> CcqState:
    """The flagged state built from rho_AB (embedded to equal local dims)."""
    rho = _as_square_bipartite(rho_ab)
    d = rho.dims[0]
    pair, _ = build_weyl(eigendecompose(partial_trace(rho, [1])))
    blocks = np.empty((d, d, d * d, d * d), dtype=np.complex128)
    for x in range(d):
        for y in range(d):
            u = _local_b(np.linalg.matrix_power(pair.X, x) @ np.linalg.matrix_power(pair.Z, y), d)
            m = u @ rho.matrix @ u.conj().T
            blocks[x, y] = 0.5 * (m + m.conj().T)
    return CcqState(blocks, rho.dims, "weyl")


class InducedEnsembles(NamedTuple):
    e0: Ensemble  # {lambda_i, sigma_A^i}: eigenbasis measurement on B
    e1: Ensemble  # {1/d, tau_A^j}: Fourier-basis measurement on B


def _conditional_states(rho: DensityMatrix, basis: np.ndarray) -> tuple[np.ndarray, list]:
    """Outcome weights and normalized A-states for a projective measurement
    of B in the columns of `basis`."""
    d_a, d_b = rho.dims
    t = rho.matrix.reshape(d_a, d_b, d_a, d_b)
    # <v|_B rho |v>_B for each column v
    parts = np.einsum("bx,abcd,dx->xac", basis.conj(), t, basis)
    weights = np.einsum("xaa->x", parts).real
    states = []
    for w, m in zip(weights, parts):
        if w < ZERO_WEIGHT:
            states.append(maximally_mixed((d_a,)))
        else:
            states.append(from_computed(m, (d_a,)))
    weights = np.where(weights < ZERO_WEIGHT, 0.0, weights)
    return weights / weights.sum(), states


def induced_ensembles(rho_ab: DensityMatrix) -> InducedEnsembles:
    """Ensembles of A induced by measuring B in the eigenbasis of rho_B and
    in its Fourier basis. Zero-weight outcomes keep a placeholder state so
    both ensembles always have d members."""
    rho = _as_square_bipartite(rho_ab)
    pair, fourier = build_weyl(eigendecompose(partial_trace(rho, [1])))
    w0, s0 = _conditional_states(rho, pair.basis)
    w1, s1 = _conditional_states(rho, fourier.vectors)
    return InducedEnsembles(Ensemble(w0, tuple(s0)), Ensemble(w1, tuple(s1)))


class CcqMutualEntropies(NamedTuple):
    xy_ab: float
    x_ab: float
    y_ab: float


def _check_q_at_least_one(q: float) -> float:
    q = float(q)
    if q < 1.0 and not is_limit(q):
        raise ValueError(f"ccq mutual entropies need q >= 1, got {q}")
    return q


def closed_form_Iq(rho_ab: DensityMatrix, q: float) -> CcqMutualEntropies:
    """Closed-form Tsallis-q mutual entropies of Omega_XY:AB, Omega_X:AB
    and Omega_Y:AB, expressed through rho_AB, its marginals and the
    Tsallis-q differences of the induced ensembles."""
    q = _check_q_at_least_one(q)
    rho = _as_square_bipartite(rho_ab)
    d = rho.dims[0]
    h_d = q_log(d, q)  # S_q(I/d)
    dq = 1.0 if is_limit(q) else d ** (1.0 - q)
    s_a = tsallis_quantum(partial_trace(rho, [0]), q)
    s_b = tsallis_quantum(partial_trace(rho, [1]), q)
    s_ab = tsallis_quantum(rho, q)
    ens = induced_ensembles(rho)
    chi0 = tsallis_q_difference(ens.e0, q)
    chi1 = tsallis_q_difference(ens.e1, q)
    return CcqMutualEntropies(
        xy_ab=h_d + dq * s_a - dq * dq * s_ab,
        x_ab=h_d - dq * s_b + dq * chi0,
        y_ab=(1.0 - dq) * h_d + dq * chi1,
    )


def _blockdiag_tsallis(blocks: list[np.ndarray], q: float) -> float:
    spectrum = np.concatenate([np.linalg.eigvalsh(b) for b in blocks])
    return float(tsallis_from_spectrum(spectrum, q))


def direct_Iq(ccq: CcqState, q: float) -> CcqMutualEntropies:
    """The three mutual entropies evaluated from the ccq state itself.

    For d <= FULL_ASSEMBLY_MAX_D the full matrices are assembled and fed to
    tsallis_mutual; above that, spectra are collected block by block.
    """
    q = _check_q_at_least_one(q)
    d = ccq.d
    if d <= FULL_ASSEMBLY_MAX_D:
        return CcqMutualEntropies(
            tsallis_mutual(ccq.assemble(), [0, 1], q),
            tsallis_mutual(ccq.omega_xab(), [0], q),
            tsallis_mutual(ccq.omega_yab(), [0], q),
        )
    s_ab = tsallis_quantum(ccq.omega_ab(), q)
    h1, h2 = q_log(d, q), q_log(d * d, q)
    b = ccq.blocks
    s_xyab = _blockdiag_tsallis([b[x, y] / d**2 for x in range(d) for y in range(d)], q)
    s_xab = _blockdiag_tsallis([b[x].sum(axis=0) / d**2 for x in range(d)], q)
    s_yab = _blockdiag_tsallis([b[:, y].sum(axis=0) / d**2 for y in range(d)], q)
    return CcqMutualEntropies(h2 + s_ab - s_xyab, h1 + s_ab - s_xab, h1 + s_ab - s_yab)


def verify_closed_forms(rho_ab: DensityMatrix, q: float) -> float:
    """Largest absolute gap between closed forms and direct evaluation."""
    closed = closed_form_Iq(rho_ab, q)
    direct = direct_Iq(build_ccq(rho_ab), q)
    return max(abs(a - b) for a, b in zip(closed, direct))


def random_general_ccq(d: int, dims_ab: tuple[int, int] | None = None, seed=None) -> CcqState:
    """General-form ccq state with independent random blocks."""
    dims_ab = (d, d) if dims_ab is None else tuple(dims_ab)
    rng = as_rng(seed)
    big = dims_ab[0] * dims_ab[1]
    blocks = np.empty((d, d, big, big), dtype=np.complex128)
    for x in range(d):
        for y in range(d):
            rank = int(rng.integers(1, big + 1))
            blocks[x, y] = random_density(dims_ab, rank, rng).matrix
    return CcqState(blocks, dims_ab, "general")
