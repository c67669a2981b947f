import math

import numpy as np
import pytest

from qpolygamy.ccq import CcqState, build_ccq, random_general_ccq
from qpolygamy.entropy import relative_entropy
from qpolygamy.inequalities import (
    CHECKS,
    ScanConfig,
    Verdict,
    _decide,
    combine,
    general_ccq_subadditivity_gap,
    monogamy_check_multiqubit,
    polygamy_check_nparty,
    sample_seed,
    scan,
    scan_instance,
    subadditivity_gap,
    theorem1_check,
    ue_bound_chain,
    xi_bounds,
)
from qpolygamy.roof import OptimizerBudget, renyi, tangle, tsallis
from qpolygamy.states import (
    DensityMatrix,
    PureState,
    basis_state,
    bell_state,
    ghz_state,
    haar_random_pure,
    partial_trace,
    random_density,
    tensor_product,
    w_state,
)

FAST = OptimizerBudget(restarts=8, samples_per_restart=8, refine_steps=400)
MEDIUM = OptimizerBudget(restarts=16, samples_per_restart=16, refine_steps=800)


@pytest.mark.parametrize(
    "safe, cert, expected",
    [
        (0.0, -1.0, Verdict.VERIFIED),
        (-1e-7, -1.0, Verdict.VERIFIED),
        (-1e-3, -1e-3, Verdict.VIOLATED),
        (-1e-3, 0.5, Verdict.INCONCLUSIVE),
        (-1e-3, None, Verdict.INCONCLUSIVE),
    ],
)
def test_decide(safe, cert, expected):
    assert _decide(safe, cert, 1e-6) is expected


def test_combine():
    v, x, i = Verdict.VERIFIED, Verdict.VIOLATED, Verdict.INCONCLUSIVE
    assert combine([v, v]) is v
    assert combine([v, i]) is i
    assert combine([i, x, v]) is x


def test_subadditivity_bell():
    assert subadditivity_gap(bell_state().density(), 2) == pytest.approx(-0.25, abs=1e-12)
    assert abs(subadditivity_gap(bell_state().density(), 1)) <= 1e-10
    with pytest.raises(ValueError):
        subadditivity_gap(bell_state().density(), 0.8)


@pytest.mark.parametrize("seed", range(20))
def test_subadditivity_at_one_is_nonnegative(seed):
    assert subadditivity_gap(random_density((3, 3), seed=seed), 1.0) >= -1e-10


def test_general_gap_examples():
    sigma = random_density((2, 2), seed=1).matrix
    equal = CcqState(np.broadcast_to(sigma, (2, 2, 4, 4)).copy(), (2, 2), "general")
    assert abs(general_ccq_subadditivity_gap(equal).gap) <= 1e-12
    assert abs(general_ccq_subadditivity_gap(build_ccq(bell_state().density())).gap) <= 1e-10
    with pytest.raises(ValueError):
        general_ccq_subadditivity_gap(equal, 2.0)


def test_general_gap_random_and_relative_form():
    rng = np.random.default_rng(0)
    for _ in range(100):
        g = random_general_ccq(2, seed=rng)
        res = general_ccq_subadditivity_gap(g)
        assert res.gap >= -1e-10
        assert res.relative_lhs - res.relative_rhs == pytest.approx(res.gap, abs=1e-10)


def test_general_gap_relative_sides_by_hand():
    g = random_general_ccq(2, seed=4)
    d = 2
    blocks = g.blocks
    rho_x = [DensityMatrix(blocks[x].sum(axis=0) / d, g.dims_ab) for x in range(d)]
    rho_y = [DensityMatrix(blocks[:, y].sum(axis=0) / d, g.dims_ab) for y in range(d)]
    rho = DensityMatrix(blocks.sum(axis=(0, 1)) / d**2, g.dims_ab)
    lhs = sum(relative_entropy(DensityMatrix(blocks[x, y], g.dims_ab), rho_y[y]) for x in range(d) for y in range(d)) / d**2
    rhs = sum(relative_entropy(r, rho) for r in rho_x) / d
    res = general_ccq_subadditivity_gap(g)
    assert res.relative_lhs == pytest.approx(lhs, abs=1e-10)
    assert res.relative_rhs == pytest.approx(rhs, abs=1e-10)


def test_xi_examples():
    ghz = xi_bounds(ghz_state(3), 2)
    assert (ghz.xi_b, ghz.xi_c) == pytest.approx((0.25, 0.25), abs=1e-12)
    prod = xi_bounds(basis_state([0, 0, 0], [2, 2, 2]), 2)
    assert (prod.xi_b, prod.xi_c) == pytest.approx((0.5, 0.5), abs=1e-12)
    with pytest.raises(ValueError):
        xi_bounds(ghz_state(3), 1.0)


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_xi_maximally_mixed_formula(q):
    # |Phi_AB>|0>_C with d = 3 leaves rho_B maximally mixed, S_q = (t - 1)/(t (q - 1))
    d = 3
    phi = np.eye(d).ravel() / np.sqrt(d)
    psi = PureState(np.kron(phi, np.eye(d)[0]).astype(complex), (d, d, d))
    assert np.allclose(partial_trace(psi, [1]).matrix, np.eye(d) / d)
    t = d ** (q - 1)
    expected = (t - 1) ** 3 / ((q - 1) * t**2)
    xi = xi_bounds(psi, q)
    assert xi.xi_b == pytest.approx(expected, abs=1e-12)
    assert xi.xi_c == pytest.approx((t - 1) ** 2 / (t * (q - 1)), abs=1e-12)


def test_three_party_polygamy_ghz_q1():
    v = theorem1_check(ghz_state(3), 1.0, FAST)
    assert v.verdict is Verdict.VERIFIED
    assert v.lhs == pytest.approx(math.log(2), abs=1e-12)
    assert v.rhs >= 2 * math.log(2) - 1e-6
    assert v.details["condition_holds"]
    assert v.provenance == {"lhs": "exact", "rhs": "lower"}


def test_three_party_polygamy_w_q2():
    v = theorem1_check(w_state(), 2.0, MEDIUM)
    assert v.lhs == pytest.approx(4 / 9, abs=1e-12)
    assert v.rhs >= 4 / 9 - 1e-4
    assert v.rhs == pytest.approx(2 / 3, abs=1e-5)
    assert v.verdict is Verdict.VERIFIED
    assert v.details["condition_gap_ab"] < 0 and not v.details["condition_holds"]


def test_three_party_polygamy_product():
    v = theorem1_check(basis_state([0, 0, 0], [2, 2, 2]), 2.0, FAST)
    assert v.lhs == pytest.approx(0.0, abs=1e-14)
    assert v.verdict is Verdict.VERIFIED


def test_three_party_polygamy_rejects_wrong_shape():
    with pytest.raises(ValueError):
        theorem1_check(bell_state(), 1.0, FAST)
    with pytest.raises(ValueError):
        theorem1_check(ghz_state(3), 0.5, FAST)


def test_polygamy_ghz4():
    v = polygamy_check_nparty(ghz_state(4), 1.0, FAST)
    assert v.verdict is Verdict.VERIFIED
    assert v.lhs == pytest.approx(math.log(2), abs=1e-12)
    assert v.rhs >= math.log(2) - 1e-6


def test_polygamy_product():
    v = polygamy_check_nparty(basis_state([0, 1, 0], [2, 2, 2]), 2.0, FAST)
    assert v.lhs == pytest.approx(0.0, abs=1e-14) and v.verdict is Verdict.VERIFIED


def test_polygamy_w_density_matches_three_party_check():
    a = polygamy_check_nparty(w_state().density(), 2.0, MEDIUM)
    b = theorem1_check(w_state(), 2.0, MEDIUM)
    assert a.verdict is b.verdict
    assert a.lhs == pytest.approx(b.lhs, abs=1e-12)
    assert a.rhs == pytest.approx(b.rhs, abs=1e-12)


def test_polygamy_mixed_input_bounds():
    rho = partial_trace(haar_random_pure((2, 2, 2, 2), 1), [0, 1, 2])
    v = polygamy_check_nparty(rho, 2.0, FAST)
    assert v.provenance["lhs"] == "upper"
    assert v.details["lhs_lower"] <= v.lhs + 1e-12
    assert v.verdict is not Verdict.VIOLATED


def test_monogamy_examples():
    ghz = monogamy_check_multiqubit(ghz_state(3), tsallis(2), FAST)
    assert ghz.lhs == pytest.approx(0.5, abs=1e-12)
    assert ghz.rhs <= 1e-6 and ghz.verdict is Verdict.VERIFIED
    w = monogamy_check_multiqubit(w_state(), tsallis(2), MEDIUM)
    assert w.lhs == pytest.approx(4 / 9, abs=1e-12)
    assert w.rhs <= 4 / 9 + 1e-6 and w.verdict is Verdict.VERIFIED
    prod = monogamy_check_multiqubit(basis_state([0, 0, 0], [2, 2, 2]), tsallis(2.5), FAST)
    assert prod.verdict is Verdict.VERIFIED


def test_monogamy_renyi():
    assert monogamy_check_multiqubit(ghz_state(3), renyi(2), FAST).verdict is Verdict.VERIFIED


@pytest.mark.parametrize(
    "state, measure",
    [
        (haar_random_pure((2, 3, 2), 0), tsallis(2)),
        (ghz_state(3), tsallis(1.5)),
        (ghz_state(3), renyi(1.5)),
        (ghz_state(3), tangle()),
        (bell_state(), tsallis(2)),
    ],
)
def test_monogamy_rejects(state, measure):
    with pytest.raises(ValueError):
        monogamy_check_multiqubit(state, measure, FAST)


def _links(report):
    return {l.name: l for l in report.links}


def test_chain_ghz():
    r = ue_bound_chain(ghz_state(3), 2.0, FAST)
    links = _links(r)
    assert links["ue_ab_le_ensemble_average"].verdict is Verdict.VERIFIED
    assert links["ue_ac_le_ensemble_average"].verdict is Verdict.VERIFIED
    assert links["xi_nonnegative"].lhs == pytest.approx(0.25, abs=1e-12)
    assert Verdict.VIOLATED not in [l.verdict for l in r.links]
    rec = r.to_record()
    assert rec["verdict"] == r.verdict.value and len(rec["links"]) == len(r.links)


def test_chain_bell_with_product_c():
    psi = tensor_product(bell_state().density(), basis_state([0], [2]).density())
    pure = PureState(np.kron(bell_state().amplitudes, [1, 0]).astype(complex), (2, 2, 2))
    assert np.allclose(pure.density().matrix, psi.matrix)
    r = ue_bound_chain(pure, 2.0, FAST)
    links = _links(r)
    # rho_AC = I/2 (x) |0><0| is product, so its q-UE vanishes
    assert links["ue_ac_le_ensemble_average"].lhs <= 1e-10
    assert links["ue_ab_le_ensemble_average"].lhs == pytest.approx(0.5, abs=1e-8)
    assert Verdict.VIOLATED not in [l.verdict for l in r.links]


def test_chain_random_qutrits_never_violated():
    rng = np.random.default_rng(3)
    for _ in range(3):
        r = ue_bound_chain(haar_random_pure((3, 3, 3), rng), 2.0, FAST)
        assert all(l.verdict is not Verdict.VIOLATED for l in r.links)
        cond = [l for l in r.links if "conditional_on" in l.details]
        assert all(l.details["condition_holds"] or l.verdict is not Verdict.VIOLATED for l in cond)


def test_chain_rejects_q1():
    with pytest.raises(ValueError):
        ue_bound_chain(ghz_state(3), 1.0, FAST)


def test_verdict_record_is_plain():
    rec = theorem1_check(ghz_state(3), 1.0, FAST).to_record()
    assert rec["verdict"] == "verified"
    assert isinstance(rec["details"]["condition_holds"], bool)


def test_scan_subadd_q1():
    rep = scan(ScanConfig("subadd", (2, 2), (1.0,), samples=500, seed=0))
    assert rep.counts == {"verified": 500, "violated": 0, "inconclusive": 0}
    assert rep.gap_stats["min"] >= -1e-10
    assert len(rep.worst_cases) == 10
    assert rep.worst_cases[0]["gap"] == rep.gap_stats["min"]


def test_scan_subadd_q2_reports_failures():
    rep = scan(ScanConfig("subadd", (2, 2), (2.0,), samples=50, seed=1))
    assert rep.counts["violated"] > 0
    assert rep.gap_stats["max"] >= rep.gap_stats["min"]


def test_scan_worst_case_replays():
    rep = scan(ScanConfig("subadd", (2, 2), (2.0,), samples=20, seed=5))
    w = rep.worst_cases[0]
    assert w["seed"] == sample_seed(5, w["sample_index"])
    again = scan_instance("subadd", (2, 2), w["seed"])
    assert subadditivity_gap(again, 2.0) == w["gap"]


@pytest.mark.parametrize(
    "kwargs, msg",
    [
        (dict(check="nope"), "unknown check"),
        (dict(check="subadd", samples=0), "samples"),
        (dict(check="subadd", q_values=(0.5,)), "q >= 1"),
        (dict(check="xi", dims=(2, 2, 2), q_values=(1.0,)), "q > 1"),
        (dict(check="theorem1", dims=(2, 2)), "3"),
        (dict(check="monogamy", dims=(2, 3, 2), q_values=(2.0,)), "qubit"),
        (dict(check="general-subadd", q_values=(2.0,)), "q = 1"),
    ],
)
def test_scan_config_errors(kwargs, msg):
    with pytest.raises(ValueError, match=msg):
        ScanConfig(**kwargs)


def test_scan_is_deterministic_and_worker_independent():
    cfg = ScanConfig("closed-form", (2, 2), (1.0, 2.0), samples=12, seed=7)
    a, b = scan(cfg), scan(cfg)
    assert a.to_record() == b.to_record()
    par = scan(ScanConfig("closed-form", (2, 2), (1.0, 2.0), samples=12, seed=7, workers=2))
    assert par.to_record() == a.to_record()
    assert par.rows == a.rows


@pytest.mark.parametrize("check", sorted(CHECKS))
def test_every_check_runs(check):
    dims = {"subadd": (2, 2), "general-subadd": (2, 2), "closed-form": (2, 2)}.get(check, (2, 2, 2))
    q = {"general-subadd": 1.0, "xi": 2.0, "ue-chain": 2.0, "monogamy": 2.0}.get(check, 1.0)
    budget = OptimizerBudget(restarts=2, samples_per_restart=2, refine_steps=50)
    rep = scan(ScanConfig(check, dims, (q,), samples=2, seed=0, budget=budget))
    assert sum(rep.counts.values()) == 2
    assert len(rep.rows) == 2
