"""Entropic functionals: q-logarithm, Tsallis, von Neumann, Renyi,
relative entropy, Holevo quantity and their q-expectation relatives.

All logarithms are natural. Functions that depend on a parameter switch
to the exact q -> 1 limit when |q - 1| < LIMIT_TOL; away from it the
q-logarithm is evaluated through expm1, which stays accurate close to 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .states import DensityMatrix, partial_trace, State, PureState

LIMIT_TOL = 1e-9
EIG_CLIP = 1e-12
SUPPORT_TOL = 1e-10
PROB_TOL = 1e-12


def is_limit(q: float) -> bool:
    return abs(q - 1.0) < LIMIT_TOL


def _check_q(q: float) -> float:
    q = float(q)
    if not q > 0:
        raise ValueError(f"entropic parameter must be positive, got {q}")
    return q


def check_probabilities(p: Sequence[float]) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0:
        raise ValueError("probability distribution is empty")
    if np.any(p < 0):
        raise ValueError("probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"probabilities must sum to 1, got {p.sum()!r}")
    return p


def q_log(x: float, q: float) -> float:
    """ln_q x = (x^(1-q) - 1) / (1 - q), natural log in the limit."""
    q = _check_q(q)
    if not x > 0:
        raise ValueError(f"q_log needs a positive argument, got {x}")
    if is_limit(q):
        return float(np.log(x))
    return float(np.expm1((1.0 - q) * np.log(x)) / (1.0 - q))


def tsallis_from_spectrum(lam: np.ndarray, q: float) -> np.ndarray:
    """Tsallis-q entropy of the distributions along the last axis.

    Works batched. Entries at or below EIG_CLIP count as zero. Uses
    S_q = sum_i lam_i ln_q(1/lam_i), which equals (1 - sum lam^q)/(q - 1)
    on normalized spectra.
    """
    lam = np.asarray(lam, dtype=float)
    pos = lam > EIG_CLIP
    safe = np.where(pos, lam, 1.0)
    logs = np.log(safe)
    if is_limit(q):
        terms = -safe * logs
    else:
        terms = -safe * np.expm1((q - 1.0) * logs) / (q - 1.0)
    return np.sum(np.where(pos, terms, 0.0), axis=-1)


def renyi_from_spectrum(lam: np.ndarray, alpha: float) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    pos = lam > EIG_CLIP
    safe = np.where(pos, lam, 1.0)
    logs = np.log(safe)
    if is_limit(alpha):
        return np.sum(np.where(pos, -safe * logs, 0.0), axis=-1)
    # tr rho^alpha - 1 = sum lam (lam^(alpha-1) - 1), kept in expm1 form
    excess = np.sum(np.where(pos, safe * np.expm1((alpha - 1.0) * logs), 0.0), axis=-1)
    return np.log1p(excess) / (1.0 - alpha)


def _spectrum(rho: DensityMatrix) -> np.ndarray:
    return np.linalg.eigvalsh(rho.matrix)


def tsallis_classical(p: Sequence[float], q: float) -> float:
    """H_q(P) = (sum p_i^q - 1)/(1 - q); Shannon entropy (nats) at q = 1."""
    q = _check_q(q)
    return float(tsallis_from_spectrum(check_probabilities(p), q))


def tsallis_quantum(rho: DensityMatrix, q: float) -> float:
    """S_q(rho) = (1 - tr rho^q)/(q - 1); von Neumann entropy at q = 1."""
    q = _check_q(q)
    return float(tsallis_from_spectrum(_spectrum(rho), q))


def von_neumann(rho: DensityMatrix) -> float:
    return float(tsallis_from_spectrum(_spectrum(rho), 1.0))


def renyi_entropy(rho: DensityMatrix, alpha: float) -> float:
    """R_alpha(rho) = ln(tr rho^alpha)/(1 - alpha)."""
    alpha = _check_q(alpha)
    return float(renyi_from_spectrum(_spectrum(rho), alpha))


def pseudoadditivity_defect(rho: DensityMatrix, sigma: DensityMatrix, q: float) -> float:
    """S_q(rho x sigma) - S_q(rho) - S_q(sigma) - (1-q) S_q(rho) S_q(sigma).

    Zero up to roundoff for every pair of states.
    """
    q = _check_q(q)
    joint = np.kron(np.linalg.eigvalsh(rho.matrix), np.linalg.eigvalsh(sigma.matrix))
    s_joint = float(tsallis_from_spectrum(joint, q))
    s_r, s_s = tsallis_quantum(rho, q), tsallis_quantum(sigma, q)
    return s_joint - s_r - s_s - (1.0 - q) * s_r * s_s


def _q_weights(p: np.ndarray, q: float) -> np.ndarray:
    return p.copy() if is_limit(q) else p**q


def _check_same_dims(states: Sequence[DensityMatrix]) -> tuple[int, ...]:
    if not states:
        raise ValueError("need at least one state")
    dims = states[0].dims
    if any(s.dims != dims for s in states):
        raise ValueError("all states must share the same dims")
    return dims


def joint_entropy_flagged(
    p: Sequence[float], states: Sequence[DensityMatrix], q: float
) -> tuple[float, float]:
    """Both sides of the q-joint-entropy identity.

    lhs is S_q of the explicitly assembled sum_i p_i rho_i (x) |i><i|;
    rhs is sum_i p_i^q S_q(rho_i) + H_q(P).
    """
    q = _check_q(q)
    p = check_probabilities(p)
    dims = _check_same_dims(states)
    if len(p) != len(states):
        raise ValueError("need one probability per state")
    k = len(p)
    big = sum(
        np.kron(pi * s.matrix, np.diag(np.eye(k)[i])) for i, (pi, s) in enumerate(zip(p, states))
    )
    lhs = tsallis_quantum(DensityMatrix(big, dims + (k,)), q)
    rhs = float(_q_weights(p, q) @ [tsallis_quantum(s, q) for s in states])
    return lhs, rhs + tsallis_classical(p, q)


def orthogonal_support_entropy(
    p: Sequence[float], states: Sequence[DensityMatrix], q: float
) -> tuple[float, float]:
    """lhs = S_q(sum_i p_i rho_i), rhs = sum_i p_i^q S_q(rho_i) + H_q(P) for
    states with mutually orthogonal supports."""
    q = _check_q(q)
    p = check_probabilities(p)
    dims = _check_same_dims(states)
    if len(p) != len(states):
        raise ValueError("need one probability per state")
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            overlap = np.linalg.norm(states[i].matrix @ states[j].matrix, 2)
            if overlap > SUPPORT_TOL:
                raise ValueError(f"states {i} and {j} do not have orthogonal supports")
    mix = sum(pi * s.matrix for pi, s in zip(p, states))
    lhs = tsallis_quantum(DensityMatrix(mix, dims), q)
    rhs = float(_q_weights(p, q) @ [tsallis_quantum(s, q) for s in states])
    return lhs, rhs + tsallis_classical(p, q)


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """S(rho||sigma) = tr rho ln rho - tr rho ln sigma, +inf off support."""
    if rho.dims != sigma.dims:
        raise ValueError("relative entropy needs states of equal dims")
    mu, f = np.linalg.eigh(sigma.matrix)
    # <f_j| rho |f_j>
    weights = np.einsum("ij,ik,kj->j", f.conj(), rho.matrix, f).real
    kernel = mu <= SUPPORT_TOL
    if np.any(weights[kernel] > SUPPORT_TOL):
        return float("inf")
    cross = float(np.sum(weights[~kernel] * np.log(mu[~kernel])))
    return -von_neumann(rho) - cross


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Probability-weighted list of states sharing one set of dims."""

    probs: np.ndarray
    states: tuple[DensityMatrix, ...]

    def __post_init__(self):
        p = check_probabilities(self.probs)
        states = tuple(self.states)
        _check_same_dims(states)
        if len(p) != len(states):
            raise ValueError("need one probability per state")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "states", states)

    @classmethod
    def from_pairs(cls, pairs) -> "Ensemble":
        pairs = list(pairs)
        return cls(np.array([p for p, _ in pairs], dtype=float), tuple(s for _, s in pairs))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.states[0].dims

    def average_matrix(self) -> np.ndarray:
        return sum(p * s.matrix for p, s in zip(self.probs, self.states))

    def average(self) -> DensityMatrix:
        m = self.average_matrix()
        return DensityMatrix(0.5 * (m + m.conj().T), self.dims)

    def __len__(self) -> int:
        return len(self.states)


def holevo_chi(e: Ensemble) -> float:
    """chi = S(average) - sum_i p_i S(rho_i)."""
    return von_neumann(e.average()) - float(e.probs @ [von_neumann(s) for s in e.states])


def holevo_chi_relative(e: Ensemble) -> float:
    """chi written as sum_i p_i S(rho_i || average)."""
    avg = e.average()
    return float(sum(p * relative_entropy(s, avg) for p, s in zip(e.probs, e.states) if p > 0))


def tsallis_q_difference(e: Ensemble, q: float) -> float:
    """chi_q = S_q(average) - sum_i p_i^q S_q(rho_i).

    Nonnegative for q >= 1; no sign guarantee below 1.
    """
    q = _check_q(q)
    weights = _q_weights(e.probs, q)
    return tsallis_quantum(e.average(), q) - float(
        weights @ [tsallis_quantum(s, q) for s in e.states]
    )


def tsallis_mutual(rho: State, cut: Sequence[int], q: float) -> float:
    """I_q(A:B) = S_q(rho_A) + S_q(rho_B) - S_q(rho_AB) with A = `cut`.

    Only defined for q >= 1.
    """
    q = _check_q(q)
    if q < 1.0 and not is_limit(q):
        raise ValueError(f"Tsallis-q mutual entropy is only defined for q >= 1, got {q}")
    if isinstance(rho, PureState):
        rho = rho.density()
    n = len(rho.dims)
    a = tuple(sorted(set(cut)))
    b = tuple(i for i in range(n) if i not in a)
    if not a or not b:
        raise ValueError("cut must split the subsystems into two nonempty groups")
    return (
        tsallis_quantum(partial_trace(rho, a), q)
        + tsallis_quantum(partial_trace(rho, b), q)
        - tsallis_quantum(rho, q)
    )
