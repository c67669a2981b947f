"""Numerical checks of the polygamy, monogamy and ccq subadditivity
inequalities, with one-sided bound bookkeeping.

Roof values only come out of the optimizer as one-sided bounds, so every
check carries a provenance map saying which side is exact and which is an
upper or lower bound. A check is `verified` when the bounds point the safe
way, `violated` when bounds certify the opposite, `inconclusive` otherwise.

Gap convention: gap = (side that should be larger) - (side that should be
smaller), evaluated with the bounds used for verification. gap >= -tol is
what `verified` means.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ccq import (
    CcqState,
    closed_form_Iq,
    direct_Iq,
    induced_ensembles,
    random_general_ccq,
    verify_closed_forms,
)
from .entropy import (
    is_limit,
    relative_entropy,
    tsallis_q_difference,
    tsallis_quantum,
)
from .roof import (
    OptimizerBudget,
    PureDecomposition,
    PureFunctional,
    RankOneMeasurement,
    concave_roof,
    convex_roof,
    measurement_value,
    qb_split_measurement,
    tsallis,
    unlocalizable_q_entanglement,
)
from .states import (
    DensityMatrix,
    PureState,
    State,
    embed_pure,
    haar_random_pure,
    partial_trace,
    random_density,
    state_to_record,
)

EXACT_TOL = 1e-10
ROOF_TOL = 1e-6
PURITY_TOL = 1e-10


class Verdict(str, enum.Enum):
    VERIFIED = "verified"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class InequalityVerdict:
    name: str
    lhs: float
    rhs: float
    gap: float
    verdict: Verdict
    provenance: dict
    details: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "verdict": self.verdict.value,
            "provenance": dict(self.provenance),
            "details": _plain(self.details),
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def _decide(safe_gap: float, certified_gap: float | None, tol: float) -> Verdict:
    """`safe_gap` uses the bounds that make `verified` sound;
    `certified_gap` uses the bounds that make `violated` sound."""
    if safe_gap >= -tol:
        return Verdict.VERIFIED
    if certified_gap is not None and certified_gap < -tol:
        return Verdict.VIOLATED
    return Verdict.INCONCLUSIVE


def combine(verdicts: Sequence[Verdict]) -> Verdict:
    verdicts = list(verdicts)
    if Verdict.VIOLATED in verdicts:
        return Verdict.VIOLATED
    if Verdict.INCONCLUSIVE in verdicts:
        return Verdict.INCONCLUSIVE
    return Verdict.VERIFIED


def _q_at_least_one(q: float) -> float:
    q = float(q)
    if q < 1.0 and not is_limit(q):
        raise ValueError(f"this check needs q >= 1, got {q}")
    return q


def _density(rho: State) -> DensityMatrix:
    return rho.density() if isinstance(rho, PureState) else rho


def _is_pure(rho: DensityMatrix) -> bool:
    return float(np.linalg.eigvalsh(rho.matrix)[-1]) > 1.0 - PURITY_TOL


def _pure_from(rho: State) -> PureState:
    if isinstance(rho, PureState):
        return rho
    w, v = np.linalg.eigh(rho.matrix)
    return PureState.normalized(v[:, -1], rho.dims)


def _square(psi: PureState) -> PureState:
    d = max(psi.dims)
    return psi if all(x == d for x in psi.dims) else embed_pure(psi, d)


# --- ccq subadditivity -------------------------------------------------------


def subadditivity_gap(rho_ab: DensityMatrix, q: float) -> float:
    """I_q(XY:AB) - I_q(X:AB) - I_q(Y:AB) of the flagged state of rho_AB,
    from the closed forms. Nonnegative means the sufficient condition holds."""
    q = _q_at_least_one(q)
    xy, x, y = closed_form_Iq(rho_ab, q)
    return xy - x - y


@dataclass(frozen=True)
class GeneralGap:
    gap: float
    relative_lhs: float  # sum_{x,y} S(sigma^{xy} || rho^y) / d^2
    relative_rhs: float  # sum_x S(rho^x || rho) / d


def general_ccq_subadditivity_gap(gamma: CcqState, q: float = 1.0) -> GeneralGap:
    """Mutual-information gap of a general-form ccq state (q = 1 only),
    alongside the two sides of the equivalent relative-entropy inequality.

    With rho^x, rho^y the conditional AB states and rho the AB marginal,
    the gap equals relative_lhs - relative_rhs, and joint convexity of the
    relative entropy makes it nonnegative.
    """
    if not is_limit(float(q)):
        raise ValueError(f"the general ccq gap is only available at q = 1, got {q}")
    xy, x, y = direct_Iq(gamma, 1.0)
    d, b, dims = gamma.d, gamma.blocks, gamma.dims_ab
    rho = gamma.omega_ab()
    rho_x = [DensityMatrix(b[i].sum(axis=0) / d, dims) for i in range(d)]
    rho_y = [DensityMatrix(b[:, j].sum(axis=0) / d, dims) for j in range(d)]
    lhs = sum(
        relative_entropy(DensityMatrix(b[i, j], dims), rho_y[j]) for i in range(d) for j in range(d)
    ) / d**2
    rhs = sum(relative_entropy(r, rho) for r in rho_x) / d
    return GeneralGap(xy - x - y, float(lhs), float(rhs))


# --- Xi terms ----------------------------------------------------------------


@dataclass(frozen=True)
class XiBounds:
    xi_b: float
    xi_c: float


def _xi(s: float, d: int, q: float) -> float:
    t = float(d) ** (q - 1.0)
    return (t - 1.0) / t * ((t - 1.0) / (q - 1.0) - s)


def xi_bounds(psi_abc: PureState, q: float) -> XiBounds:
    """Xi_B and Xi_C of a three-party pure state, d the largest local dim."""
    q = float(q)
    if not q > 1.0 or is_limit(q):
        raise ValueError(f"Xi terms need q > 1, got {q}")
    if len(psi_abc.dims) != 3:
        raise ValueError(f"expected a three-party state, got dims {psi_abc.dims}")
    d = max(psi_abc.dims)
    s_b = tsallis_quantum(partial_trace(psi_abc, [1]), q)
    s_c = tsallis_quantum(partial_trace(psi_abc, [2]), q)
    return XiBounds(_xi(s_b, d, q), _xi(s_c, d, q))


# --- polygamy ----------------------------------------------------------------


def _assistance_bounds(rho: DensityMatrix, q: float, budget: OptimizerBudget | None):
    """(lower, upper, converged) for the concave roof of S_q across [0]."""
    res = concave_roof(rho, [0], tsallis(q), budget)
    upper = min(
        tsallis_quantum(partial_trace(rho, [0]), q),
        tsallis_quantum(partial_trace(rho, list(range(1, len(rho.dims)))), q),
    )
    return res.value, upper, res.converged


def _polygamy(
    name: str,
    rho: DensityMatrix,
    q: float,
    budget: OptimizerBudget | None,
    tol: float,
    extra: dict | None = None,
) -> InequalityVerdict:
    n = len(rho.dims)
    if _is_pure(rho):
        lhs_low = lhs_up = tsallis_quantum(partial_trace(rho, [0]), q)
        lhs_kind, lhs_converged = "exact", True
    else:
        lhs_low, lhs_up, lhs_converged = _assistance_bounds(rho, q, budget)
        lhs_kind = "upper"
    lows, ups, conv = [], [], []
    for i in range(1, n):
        lo, up, c = _assistance_bounds(partial_trace(rho, [0, i]), q, budget)
        lows.append(lo)
        ups.append(up)
        conv.append(c)
    rhs_low, rhs_up = sum(lows), sum(ups)
    gap = rhs_low - lhs_up
    verdict = _decide(gap, rhs_up - lhs_low, tol)
    details = {
        "pair_lower_bounds": lows,
        "pair_upper_bounds": ups,
        "rhs_upper": rhs_up,
        "lhs_lower": lhs_low,
        "optimizer_converged": bool(all(conv) and lhs_converged),
        "tolerance": tol,
    }
    details.update(extra or {})
    return InequalityVerdict(
        name, lhs_up, rhs_low, gap, verdict, {"lhs": lhs_kind, "rhs": "lower"}, details
    )


def theorem1_check(
    psi_abc: PureState,
    q: float,
    budget: OptimizerBudget | None = None,
    tol: float = ROOF_TOL,
) -> InequalityVerdict:
    """S_q(rho_A) <= T^a_q(rho_AB) + T^a_q(rho_AC) for a three-party pure state.

    The verdict is about the polygamy inequality itself. The two ccq
    subadditivity gaps (the sufficient condition) are reported in
    `details`; a violated verdict needs concavity upper bounds on both
    assisted terms, so optimizer looseness cannot produce one.
    """
    q = _q_at_least_one(q)
    psi = _pure_from(psi_abc)
    if len(psi.dims) != 3:
        raise ValueError(f"expected a three-party state, got dims {psi.dims}")
    gap_ab = subadditivity_gap(partial_trace(psi, [0, 1]), q)
    gap_ac = subadditivity_gap(partial_trace(psi, [0, 2]), q)
    extra = {
        "condition_gap_ab": gap_ab,
        "condition_gap_ac": gap_ac,
        "condition_holds": bool(gap_ab >= -EXACT_TOL and gap_ac >= -EXACT_TOL),
    }
    return _polygamy("three_party_polygamy", psi.density(), q, budget, tol, extra)


def polygamy_check_nparty(
    rho: State,
    q: float,
    budget: OptimizerBudget | None = None,
    tol: float = ROOF_TOL,
) -> InequalityVerdict:
    """T^a_q(A1 | A2...An) <= sum_i T^a_q(A1 | Ai).

    Pure inputs use the exact LHS. Mixed inputs use the concavity upper
    bound min(S_q(rho_A1), S_q(rho_rest)) for the LHS and report the
    optimizer's lower bound as `lhs_lower`.
    """
    q = _q_at_least_one(q)
    rho = _density(rho)
    if len(rho.dims) < 3:
        raise ValueError(f"need at least three parties, got dims {rho.dims}")
    return _polygamy("polygamy_nparty", rho, q, budget, tol)


def monogamy_check_multiqubit(
    rho: State,
    measure: PureFunctional,
    budget: OptimizerBudget | None = None,
    tol: float = ROOF_TOL,
) -> InequalityVerdict:
    """E(A1 | A2...An) >= sum_i E(A1 | Ai) for qubits, with E the convex
    roof of Tsallis-q (2 <= q <= 3) or Renyi-alpha (alpha >= 2) entropy."""
    rho = _density(rho)
    if any(d != 2 for d in rho.dims):
        raise ValueError(f"monogamy check needs qubits only, got dims {rho.dims}")
    if len(rho.dims) < 3:
        raise ValueError(f"need at least three parties, got dims {rho.dims}")
    if measure.kind == "tsallis":
        if not 2.0 <= measure.param <= 3.0:
            raise ValueError(f"Tsallis monogamy needs 2 <= q <= 3, got {measure.param}")
    elif measure.kind == "renyi":
        if measure.param < 2.0:
            raise ValueError(f"Renyi monogamy needs alpha >= 2, got {measure.param}")
    else:
        raise ValueError(f"unsupported measure {measure.label}")
    n = len(rho.dims)
    if _is_pure(rho):
        psi = _pure_from(rho)
        lhs_low = lhs_up = float(measure(np.linalg.eigvalsh(partial_trace(psi, [0]).matrix)))
        lhs_kind, conv = "exact", [True]
    else:
        res = convex_roof(rho, [0], measure, budget)
        lhs_low, lhs_up, lhs_kind, conv = 0.0, res.value, "lower", [res.converged]
    ups = []
    for i in range(1, n):
        res = convex_roof(partial_trace(rho, [0, i]), [0], measure, budget)
        ups.append(res.value)
        conv.append(res.converged)
    rhs_up = sum(ups)
    gap = lhs_low - rhs_up
    # the RHS is only bounded below by 0
    verdict = _decide(gap, lhs_up, tol)
    return InequalityVerdict(
        f"monogamy_{measure.label}",
        lhs_low,
        rhs_up,
        gap,
        verdict,
        {"lhs": lhs_kind, "rhs": "upper"},
        {"pair_upper_bounds": ups, "optimizer_converged": bool(all(conv)), "tolerance": tol},
    )


# --- the unlocalizable-entanglement chain -----------------------------------


@dataclass(frozen=True)
class ChainReport:
    links: tuple[InequalityVerdict, ...]
    condition_gap_ab: float
    condition_gap_ac: float
    xi: XiBounds

    @property
    def verdict(self) -> Verdict:
        return combine([l.verdict for l in self.links])

    @property
    def gap(self) -> float:
        return min(l.gap for l in self.links)

    def to_record(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "condition_gap_ab": self.condition_gap_ab,
            "condition_gap_ac": self.condition_gap_ac,
            "xi_b": self.xi.xi_b,
            "xi_c": self.xi.xi_c,
            "links": [l.to_record() for l in self.links],
        }


def _induced_decomposition(psi: PureState, meas: RankOneMeasurement, on: int) -> PureDecomposition:
    """Decomposition of the marginal on the other two parties induced by
    measuring party `on` of a three-party pure state."""
    keep = [i for i in range(3) if i != on]
    t = np.moveaxis(psi.amplitudes.reshape(psi.dims), on, 0)
    t = t.reshape(psi.dims[on], -1)
    dims = tuple(psi.dims[i] for i in keep)
    probs, states = [], []
    for m in meas.operators:
        w, v = np.linalg.eigh(m)
        phi = np.sqrt(max(w[-1], 0.0)) * (v[:, -1].conj() @ t)
        p = float(np.vdot(phi, phi).real)
        if p > 1e-14:
            probs.append(p)
            states.append(PureState.normalized(phi, dims))
    probs = np.array(probs) / sum(probs)
    return PureDecomposition(probs, tuple(states), partial_trace(psi, keep))


def _chain_side(psi, q, budget, tol, measured: int, gap_cond: float, assist_other):
    """Links for uE of the pair (A, measured); `assist_other` bounds T^a of
    A with the remaining party."""
    tag = "ab" if measured == 1 else "ac"
    rho = partial_trace(psi, [0, measured])
    d = psi.dims[0]
    dq = d ** (1.0 - q)
    s_a = tsallis_quantum(partial_trace(psi, [0]), q)
    s_m = tsallis_quantum(partial_trace(psi, [measured]), q)
    s_pair = tsallis_quantum(rho, q)
    ens = induced_ensembles(rho)
    chi0, chi1 = tsallis_q_difference(ens.e0, q), tsallis_q_difference(ens.e1, q)
    avg = 0.5 * (chi0 + chi1)
    ue = unlocalizable_q_entanglement(rho, q, budget)
    qb = measurement_value(rho, qb_split_measurement(rho), q)
    links = []

    links.append(InequalityVerdict(
        f"ue_{tag}_le_ensemble_average", ue.value, avg, avg - ue.value,
        _decide(avg - ue.value, None, tol), {"lhs": "upper", "rhs": "exact"},
        {"chi_eigenbasis": chi0, "chi_fourier": chi1, "chi_split_measurement": qb},
    ))

    k = (dq - 1.0) ** 2 / (dq * (1.0 - q))
    bound = 0.5 * (s_a + s_m - dq * s_pair + k)
    holds = gap_cond >= -EXACT_TOL
    v = _decide(bound - ue.value, None, tol)
    links.append(InequalityVerdict(
        f"ue_{tag}_le_entropy_bound", ue.value, bound, bound - ue.value, v,
        {"lhs": "upper", "rhs": "exact"},
        {"conditional_on": f"subadditivity_{tag}", "condition_holds": bool(holds)},
    ))

    # chi_q of the best measurement found versus S_q(rho_A) - T^a(rho_A,other):
    # the plain average of the induced decomposition and the optimizer
    # both give lower bounds on T^a, concavity an upper bound
    cert_value = measurement_value(rho, ue.certificate, q)
    induced = _induced_decomposition(psi, ue.certificate, measured)
    ta_low = max(induced.average(tsallis(q), [0]), assist_other[0])
    ta_up = assist_other[1]
    links.append(InequalityVerdict(
        f"certificate_{tag}_ge_assistance_gap", cert_value, s_a - ta_low,
        cert_value - (s_a - ta_low), _decide(cert_value - (s_a - ta_low), cert_value - (s_a - ta_up), tol),
        {"lhs": "exact (certificate measurement)", "rhs": "upper"},
        {"assistance_lower": ta_low, "assistance_upper": ta_up},
    ))
    return links, ue


def ue_bound_chain(
    psi_abc: PureState,
    q: float,
    budget: OptimizerBudget | None = None,
    tol: float = ROOF_TOL,
) -> ChainReport:
    """Every link of the bound chain from q-UE to S_q(rho_A) + (Xi_B + Xi_C)/2,
    with the assisted quantity on the right-hand sides."""
    q = float(q)
    if not q > 1.0 or is_limit(q):
        raise ValueError(f"the bound chain needs q > 1, got {q}")
    psi = _square(_pure_from(psi_abc))
    if len(psi.dims) != 3:
        raise ValueError(f"expected a three-party state, got dims {psi.dims}")
    gap_ab = subadditivity_gap(partial_trace(psi, [0, 1]), q)
    gap_ac = subadditivity_gap(partial_trace(psi, [0, 2]), q)
    assist_ab = _assistance_bounds(partial_trace(psi, [0, 1]), q, budget)
    assist_ac = _assistance_bounds(partial_trace(psi, [0, 2]), q, budget)
    links_ab, _ = _chain_side(psi, q, budget, tol, 1, gap_ab, assist_ac)
    links_ac, _ = _chain_side(psi, q, budget, tol, 2, gap_ac, assist_ab)
    xi = xi_bounds(psi, q)
    s_a = tsallis_quantum(partial_trace(psi, [0]), q)
    target = s_a + 0.5 * (xi.xi_b + xi.xi_c)
    low, up = assist_ab[0] + assist_ac[0], assist_ab[1] + assist_ac[1]
    both = gap_ab >= -EXACT_TOL and gap_ac >= -EXACT_TOL
    v = _decide(low - target, up - target, tol)
    if v is Verdict.VIOLATED and not both:
        v = Verdict.INCONCLUSIVE  # the link is only claimed under the condition
    final = InequalityVerdict(
        "assistance_sum_ge_xi_bound", low, target, low - target, v,
        {"lhs": "lower", "rhs": "exact"},
        {"conditional_on": "subadditivity_ab and subadditivity_ac", "condition_holds": bool(both),
         "lhs_upper": up},
    )
    xi_link = InequalityVerdict(
        "xi_nonnegative", min(xi.xi_b, xi.xi_c), 0.0, min(xi.xi_b, xi.xi_c),
        _decide(min(xi.xi_b, xi.xi_c), min(xi.xi_b, xi.xi_c), EXACT_TOL),
        {"lhs": "exact", "rhs": "exact"},
    )
    links = links_ab + links_ac
    # the conditional entropy bounds make no claim when their condition fails
    links = [
        l if l.details.get("condition_holds", True) or l.verdict is not Verdict.VIOLATED
        else InequalityVerdict(l.name, l.lhs, l.rhs, l.gap, Verdict.INCONCLUSIVE, l.provenance, l.details)
        for l in links
    ]
    return ChainReport(tuple(links + [final, xi_link]), gap_ab, gap_ac, xi)


# --- scans -------------------------------------------------------------------

DEFAULT_Q_GRID = (1.0, 1.1, 1.5, 2.0, 3.0, 4.0)
WORST_CASES = 10


@dataclass(frozen=True)
class ScanConfig:
    check: str
    dims: tuple[int, ...] = (2, 2)
    q_values: tuple[float, ...] = DEFAULT_Q_GRID
    samples: int = 100
    seed: int = 0
    budget: OptimizerBudget = field(default_factory=OptimizerBudget)
    tolerance: float | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "q_values", tuple(float(q) for q in self.q_values))
        if self.check not in CHECKS:
            raise ValueError(f"unknown check {self.check!r}; choose from {sorted(CHECKS)}")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if not self.q_values or any(not q > 0 for q in self.q_values):
            raise ValueError("q_values must be a nonempty list of positive numbers")
        if any(d < 1 for d in self.dims):
            raise ValueError("dims must be positive")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        CHECKS[self.check].validate(self)

    @property
    def tol(self) -> float:
        return self.tolerance if self.tolerance is not None else CHECKS[self.check].tol

    def params(self) -> dict:
        b = self.budget
        return {
            "dims": list(self.dims),
            "q_values": list(self.q_values),
            "samples": self.samples,
            "seed": self.seed,
            "tolerance": self.tol,
            "budget": {
                "restarts": b.restarts,
                "samples_per_restart": b.samples_per_restart,
                "refine_steps": b.refine_steps,
                "seed": b.seed,
            },
        }


@dataclass(frozen=True)
class ScanRow:
    check: str
    q: float
    d: int
    sample_index: int
    gap: float
    verdict: Verdict
    seed: int

    def to_record(self) -> dict:
        return {
            "check": self.check,
            "q": self.q,
            "d": self.d,
            "sample_index": self.sample_index,
            "gap": self.gap,
            "verdict": self.verdict.value,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ScanReport:
    check: str
    params: dict
    counts: dict
    gap_stats: dict
    worst_cases: tuple
    rows: tuple[ScanRow, ...]

    def to_record(self) -> dict:
        return {
            "check": self.check,
            "params": self.params,
            "counts": dict(self.counts),
            "gap_stats": dict(self.gap_stats),
            "worst_cases": [dict(w) for w in self.worst_cases],
        }


@dataclass(frozen=True)
class _Check:
    sample: callable  # (rng, dims) -> instance
    evaluate: callable  # (instance, q, budget, tol) -> (gap, verdict)
    record: callable  # instance -> serializable state
    tol: float
    validate: callable


def _need_parties(n_min: int, n_max: int | None = None):
    def check(cfg: ScanConfig):
        n = len(cfg.dims)
        if n < n_min or (n_max is not None and n > n_max):
            want = f"{n_min}" if n_max == n_min else f"at least {n_min}"
            raise ValueError(f"check {cfg.check!r} needs {want} subsystems in dims, got {cfg.dims}")
    return check


def _need_q(pred, text):
    def check(cfg: ScanConfig):
        bad = [q for q in cfg.q_values if not pred(q)]
        if bad:
            raise ValueError(f"check {cfg.check!r} needs {text}; got q values {bad}")
    return check


def _all(*checks):
    def check(cfg):
        for c in checks:
            c(cfg)
    return check


def _need_qubits(cfg: ScanConfig):
    if any(d != 2 for d in cfg.dims):
        raise ValueError(f"check {cfg.check!r} needs qubit dims, got {cfg.dims}")


_q_ge_1 = _need_q(lambda q: q >= 1.0 or is_limit(q), "q >= 1")
_q_gt_1 = _need_q(lambda q: q > 1.0 and not is_limit(q), "q > 1")


def _sample_mixed(rng, dims):
    big = math.prod(dims)
    return random_density(dims, int(rng.integers(1, big + 1)), rng)


def _sample_pure(rng, dims):
    return haar_random_pure(dims, rng)


def _exact(gap, tol):
    return gap, _decide(gap, gap, tol)


def _eval_subadd(rho, q, budget, tol):
    return _exact(subadditivity_gap(rho, q), tol)


def _eval_general(gamma, q, budget, tol):
    return _exact(general_ccq_subadditivity_gap(gamma, q).gap, tol)


def _eval_closed(rho, q, budget, tol):
    return _exact(-verify_closed_forms(rho, q), tol)


def _eval_xi(psi, q, budget, tol):
    xi = xi_bounds(psi, q)
    return _exact(min(xi.xi_b, xi.xi_c), tol)


def _eval_theorem1(psi, q, budget, tol):
    v = theorem1_check(psi, q, budget, tol)
    return v.gap, v.verdict


def _eval_polygamy(psi, q, budget, tol):
    v = polygamy_check_nparty(psi, q, budget, tol)
    return v.gap, v.verdict


def _eval_monogamy(psi, q, budget, tol):
    v = monogamy_check_multiqubit(psi, tsallis(q), budget, tol)
    return v.gap, v.verdict


def _eval_chain(psi, q, budget, tol):
    r = ue_bound_chain(psi, q, budget, tol)
    return r.gap, r.verdict


CHECKS: dict[str, _Check] = {
    "subadd": _Check(_sample_mixed, _eval_subadd, state_to_record, EXACT_TOL,
                     _all(_need_parties(2, 2), _q_ge_1)),
    "general-subadd": _Check(
        lambda rng, dims: random_general_ccq(dims[0], dims, rng), _eval_general,
        lambda g: g.to_record(), EXACT_TOL,
        _all(_need_parties(2, 2), _need_q(is_limit, "q = 1"))),
    "closed-form": _Check(_sample_mixed, _eval_closed, state_to_record, 1e-9,
                          _all(_need_parties(2, 2), _q_ge_1)),
    "xi": _Check(_sample_pure, _eval_xi, state_to_record, EXACT_TOL,
                 _all(_need_parties(3, 3), _q_gt_1)),
    "theorem1": _Check(_sample_pure, _eval_theorem1, state_to_record, ROOF_TOL,
                       _all(_need_parties(3, 3), _q_ge_1)),
    "polygamy": _Check(_sample_pure, _eval_polygamy, state_to_record, ROOF_TOL,
                       _all(_need_parties(3), _q_ge_1)),
    "monogamy": _Check(_sample_pure, _eval_monogamy, state_to_record, ROOF_TOL,
                       _all(_need_parties(3),
                            _need_q(lambda q: 2.0 <= q <= 3.0, "2 <= q <= 3"),
                            _need_qubits)),
    "ue-chain": _Check(_sample_pure, _eval_chain, state_to_record, ROOF_TOL,
                       _all(_need_parties(3, 3), _q_gt_1)),
}


def sample_seed(seed: int, index: int) -> int:
    """Replay seed of sample `index` in a scan seeded with `seed`."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


def scan_instance(check: str, dims: Sequence[int], seed: int):
    """Rebuild the instance a scan evaluated from its replay seed."""
    return CHECKS[check].sample(np.random.default_rng(seed), tuple(dims))


def _run_sample(cfg: ScanConfig, index: int):
    chk = CHECKS[cfg.check]
    s = sample_seed(cfg.seed, index)
    inst = scan_instance(cfg.check, cfg.dims, s)
    out = []
    for q in cfg.q_values:
        gap, verdict = chk.evaluate(inst, q, cfg.budget, cfg.tol)
        out.append((q, float(gap), verdict))
    return s, chk.record(inst), out


def scan(config: ScanConfig) -> ScanReport:
    """Run a named check over `samples` random instances and every q value.

    Samples may run in a process pool; results are folded in sample order,
    so the report does not depend on `workers`.
    """
    idx = range(config.samples)
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_run_sample, [config] * config.samples, idx))
    else:
        results = [_run_sample(config, i) for i in idx]

    d = max(config.dims)
    rows, cases = [], []
    for i, (s, state, per_q) in enumerate(results):
        for q, gap, verdict in per_q:
            rows.append(ScanRow(config.check, q, d, i, gap, verdict, s))
            cases.append((gap, i, q, verdict, s, state))
    counts = {v.value: sum(r.verdict is v for r in rows) for v in Verdict}
    gaps = np.array([r.gap for r in rows])
    stats = {"min": float(gaps.min()), "max": float(gaps.max()), "mean": float(gaps.mean())}
    order = sorted(range(len(cases)), key=lambda k: (cases[k][0], k))[:WORST_CASES]
    worst = tuple(
        {
            "seed": cases[k][4],
            "sample_index": cases[k][1],
            "q": cases[k][2],
            "gap": cases[k][0],
            "verdict": cases[k][3].value,
            "state": cases[k][5],
        }
        for k in order
    )
    return ScanReport(config.check, config.params(), counts, stats, worst, tuple(rows))
