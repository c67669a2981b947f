import math

import numpy as np
import pytest

from oracles import tsallis_direct
from qpolygamy.entropy import (
    Ensemble,
    holevo_chi,
    holevo_chi_relative,
    joint_entropy_flagged,
    orthogonal_support_entropy,
    pseudoadditivity_defect,
    q_log,
    relative_entropy,
    renyi_entropy,
    tsallis_classical,
    tsallis_mutual,
    tsallis_q_difference,
    tsallis_quantum,
    von_neumann,
)
from qpolygamy.states import (
    DensityMatrix,
    basis_state,
    bell_state,
    haar_random_pure,
    maximally_mixed,
    random_density,
    tensor_product,
)


def _pure(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), (len(v),))


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 3.7])
def test_q_log_of_one(q):
    assert q_log(1.0, q) == 0.0


def test_q_log_values():
    assert q_log(2.0, 2.0) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        q_log(0.0, 2.0)
    with pytest.raises(ValueError):
        q_log(1.0, -1.0)


@pytest.mark.parametrize("x", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("q", [1 - 1e-10, 1 + 1e-10])
def test_q_log_limit(x, q):
    assert abs(q_log(x, q) - math.log(x)) <= 1e-8


def test_tsallis_classical_examples():
    assert tsallis_classical([1, 0, 0], 2) == 0.0
    for d in (2, 3, 5):
        assert tsallis_classical(np.full(d, 1 / d), 2) == pytest.approx(1 - 1 / d, abs=1e-14)
    assert abs(tsallis_classical([0.5, 0.5], 1 + 1e-10) - math.log(2)) <= 1e-8
    with pytest.raises(ValueError):
        tsallis_classical([0.5, 0.6], 2)


def test_tsallis_quantum_examples():
    assert tsallis_quantum(bell_state().density(), 2) == pytest.approx(0.0, abs=1e-14)
    assert tsallis_quantum(maximally_mixed((2,)), 2) == pytest.approx(0.5, abs=1e-15)
    for d, q in [(3, 1.5), (4, 3.0)]:
        assert tsallis_quantum(maximally_mixed((d,)), q) == pytest.approx((1 - d ** (1 - q)) / (q - 1), abs=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_tsallis_two_matches_purity(seed):
    rho = random_density((3,), seed=seed)
    purity = np.trace(rho.matrix @ rho.matrix).real
    assert abs(tsallis_quantum(rho, 2) - (1 - purity)) <= 1e-10


@pytest.mark.parametrize("q", [0.5, 1.0, 1.5, 2.0, 3.7])
def test_tsallis_matches_direct_oracle(q):
    rho = random_density((2, 3), seed=42)
    assert abs(tsallis_quantum(rho, q) - tsallis_direct(rho.matrix, q)) <= 1e-12


def test_renyi_examples():
    assert renyi_entropy(basis_state([0], [3]).density(), 2) == pytest.approx(0.0, abs=1e-15)
    for alpha in (0.5, 2.0, 5.0):
        assert renyi_entropy(maximally_mixed((3,)), alpha) == pytest.approx(math.log(3), abs=1e-13)
    rho = DensityMatrix(np.diag([0.7, 0.3]), (2,))
    assert renyi_entropy(rho, 2) == pytest.approx(-math.log(0.58), abs=1e-14)


def test_pseudoadditivity_examples():
    half = maximally_mixed((2,))
    assert tsallis_quantum(tensor_product(half, half), 2) == pytest.approx(0.75)
    assert abs(pseudoadditivity_defect(half, half, 2)) <= 1e-15
    pure = basis_state([1], [2]).density()
    assert abs(pseudoadditivity_defect(pure, random_density((3,), seed=1), 2.5)) <= 1e-12


def test_joint_entropy_examples():
    states = [basis_state([0], [2]).density(), _pure([1, 1])]
    lhs, rhs = joint_entropy_flagged([0.5, 0.5], states, 2)
    assert lhs == pytest.approx(0.5, abs=1e-14) and rhs == pytest.approx(0.5, abs=1e-14)
    rho = random_density((3,), seed=5)
    lhs, rhs = joint_entropy_flagged([1.0], [rho], 1.7)
    assert lhs == pytest.approx(tsallis_quantum(rho, 1.7), abs=1e-13)
    rng = np.random.default_rng(8)
    states = [random_density((3,), seed=rng) for _ in range(3)]
    p = rng.dirichlet(np.ones(3))
    lhs, rhs = joint_entropy_flagged(p, states, 1.5)
    assert abs(lhs - rhs) <= 1e-10


def test_orthogonal_support_examples():
    a, b = random_density((2,), seed=1).matrix, random_density((2,), seed=2).matrix
    z = np.zeros((2, 2))
    ra = DensityMatrix(np.block([[a, z], [z, z]]), (4,))
    rb = DensityMatrix(np.block([[z, z], [z, b]]), (4,))
    lhs, rhs = orthogonal_support_entropy([0.3, 0.7], [ra, rb], 2)
    assert abs(lhs - rhs) <= 1e-10
    lhs, _ = orthogonal_support_entropy([1.0, 0.0], [ra, rb], 2)
    assert lhs == pytest.approx(tsallis_quantum(ra, 2), abs=1e-14)
    # three blocks of a random unitary frame in d = 9
    u = np.linalg.qr(np.random.default_rng(3).standard_normal((9, 9)) + 0j)[0]
    blocks = []
    for k in range(3):
        w = random_density((3,), seed=10 + k).matrix
        v = u[:, 3 * k : 3 * k + 3]
        m = v @ w @ v.conj().T
        blocks.append(DensityMatrix(0.5 * (m + m.conj().T), (9,)))
    lhs, rhs = orthogonal_support_entropy([0.2, 0.5, 0.3], blocks, 2.5)
    assert abs(lhs - rhs) <= 1e-10


def test_orthogonal_support_rejects_overlap():
    with pytest.raises(ValueError, match="orthogonal"):
        orthogonal_support_entropy([0.5, 0.5], [maximally_mixed((2,)), maximally_mixed((2,))], 2)


def test_relative_entropy_examples():
    rho = random_density((3,), seed=0)
    assert abs(relative_entropy(rho, rho)) <= 1e-12
    zero, one = basis_state([0], [2]).density(), basis_state([1], [2]).density()
    assert relative_entropy(zero, maximally_mixed((2,))) == pytest.approx(math.log(2), abs=1e-14)
    assert relative_entropy(zero, one) == math.inf


@pytest.mark.parametrize("seed", range(10))
def test_relative_entropy_nonnegative(seed):
    rng = np.random.default_rng(seed)
    a, b = random_density((3,), seed=rng), random_density((3,), seed=rng)
    assert relative_entropy(a, b) > 1e-8


def test_holevo_examples():
    rho = random_density((2,), seed=1)
    assert abs(holevo_chi(Ensemble([0.3, 0.7], (rho, rho)))) <= 1e-14
    bit = Ensemble([0.5, 0.5], (basis_state([0], [2]).density(), basis_state([1], [2]).density()))
    assert holevo_chi(bit) == pytest.approx(math.log(2), abs=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_holevo_two_formulas(seed):
    rng = np.random.default_rng(seed)
    e = Ensemble(rng.dirichlet(np.ones(3)), tuple(random_density((2,), seed=rng) for _ in range(3)))
    assert abs(holevo_chi(e) - holevo_chi_relative(e)) <= 1e-10


def test_tsallis_difference_examples():
    e = Ensemble([0.5, 0.5], (basis_state([0], [2]).density(), basis_state([1], [2]).density()))
    assert tsallis_q_difference(e, 2) == pytest.approx(0.5, abs=1e-15)
    single = Ensemble([1.0], (random_density((3,), seed=2),))
    assert abs(tsallis_q_difference(single, 2.4)) <= 1e-14


@pytest.mark.parametrize("q", [1 - 1e-9 / 2, 1 + 1e-9 / 2, 1 + 2e-9])
def test_tsallis_difference_limit(q):
    rng = np.random.default_rng(4)
    e = Ensemble(rng.dirichlet(np.ones(3)), tuple(random_density((2,), seed=rng) for _ in range(3)))
    assert abs(tsallis_q_difference(e, q) - holevo_chi(e)) <= 1e-7


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0, 4.0])
def test_tsallis_difference_nonnegative(q):
    rng = np.random.default_rng(6)
    for _ in range(50):
        e = Ensemble(rng.dirichlet(np.ones(4)), tuple(random_density((3,), seed=rng) for _ in range(4)))
        assert tsallis_q_difference(e, q) >= -1e-10


def test_tsallis_mutual_examples():
    prod = tensor_product(random_density((2,), seed=1), random_density((3,), seed=2))
    assert abs(tsallis_mutual(prod, [0], 1.0)) <= 1e-12
    assert tsallis_mutual(bell_state(), [0], 1.0) == pytest.approx(2 * math.log(2), abs=1e-14)
    assert tsallis_mutual(bell_state(), [0], 2.0) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError, match="q >= 1"):
        tsallis_mutual(bell_state(), [0], 0.9)


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 3.0])
def test_concavity(q):
    rng = np.random.default_rng(int(q * 10))
    for _ in range(200):
        a, b = random_density((3,), seed=rng), random_density((3,), seed=rng)
        lam = rng.uniform()
        mix = DensityMatrix(lam * a.matrix + (1 - lam) * b.matrix, (3,))
        assert tsallis_quantum(mix, q) >= lam * tsallis_quantum(a, q) + (1 - lam) * tsallis_quantum(b, q) - 1e-10


@pytest.mark.parametrize("d", [2, 3, 5, 9])
def test_maximality(d):
    rng = np.random.default_rng(d)
    for q in (0.5, 1.0, 2.0, 3.0):
        top = tsallis_quantum(maximally_mixed((d,)), q)
        for _ in range(20):
            assert tsallis_quantum(random_density((d,), seed=rng), q) <= top + 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_joint_convexity(seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(3))
    rs = [random_density((2,), seed=rng) for _ in range(3)]
    ss = [random_density((2,), seed=rng) for _ in range(3)]
    lhs = sum(pi * relative_entropy(r, s) for pi, r, s in zip(p, rs, ss))
    r_bar = DensityMatrix(sum(pi * r.matrix for pi, r in zip(p, rs)), (2,))
    s_bar = DensityMatrix(sum(pi * s.matrix for pi, s in zip(p, ss)), (2,))
    assert lhs >= relative_entropy(r_bar, s_bar) - 1e-10


def test_entropies_of_pure_states_vanish():
    psi = haar_random_pure((4,), 0).density()
    for q in (0.5, 1.0, 2.0):
        assert abs(tsallis_quantum(psi, q)) <= 1e-12
        assert abs(renyi_entropy(psi, q)) <= 1e-12
    assert abs(von_neumann(psi)) <= 1e-12
