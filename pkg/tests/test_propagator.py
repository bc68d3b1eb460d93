"""Closed-form propagators: structure, frozen amplitudes, oracle agreement.

The frozen column amplitudes below were produced by an eigendecomposition
of the coupling operator built from scratch (no package code), then copied
here verbatim.
"""

import math

import numpy as np
import pytest

from tcprop import (
    CompositeOperator,
    FockSpace,
    GaussSingularityError,
    annihilator,
    apply,
    compare,
    cosz,
    coupling_operator,
    creator,
    evolve_full,
    evolve_one_atom,
    evolve_spin_one,
    evolve_two_atoms,
    expm_hermitian,
    gauss_decompose_one_atom,
    hamiltonian,
    reconstruct_two_atoms,
    reduction_transform,
    spectral_fn,
    trusted_mask,
)

SPACE = FockSpace(60, 8)
SMALL = FockSpace(40, 5)

# |ee,0> column of the two-atom propagator at t=0.7, g=1.3 (frozen from the
# independent eigendecomposition; phases are exactly -i on the middle pair)
AMP_EE0 = 0.46275833533992833
AMP_EG1 = -0.3229531781698155j
AMP_GG2 = -0.7597744484341714


def _trusted_submatrix(op: CompositeOperator) -> np.ndarray:
    keep = trusted_mask(op.n_blocks, op.space)
    return op.matrix[np.ix_(keep, keep)]


def _max_dev(x, y) -> float:
    return float(np.max(np.abs(np.asarray(x) - np.asarray(y))))


def test_one_atom_identity_at_zero():
    u = evolve_one_atom(SPACE, 0.0, 1.7)
    np.testing.assert_array_equal(u.matrix, np.eye(2 * SPACE.cutoff))


def test_one_atom_block_structure():
    t, g = 0.45, 1.2
    tg = t * g
    u2 = tg * tg
    u = evolve_one_atom(SPACE, t, g)
    cos_up = spectral_fn(SPACE, lambda m: cosz(u2 * (m + 1)))
    np.testing.assert_array_equal(u.block(0, 0), cos_up)
    np.testing.assert_allclose(
        np.diag(u.block(1, 1)),
        [math.cos(tg * math.sqrt(m)) for m in range(SPACE.cutoff)],
        atol=1e-14,
    )
    # off-diagonal blocks carry a single ladder operator each
    assert np.count_nonzero(u.block(0, 1)) == SPACE.cutoff - 1
    np.testing.assert_array_equal(u.block(1, 0), -u.block(0, 1).conj().T)


def test_one_atom_flip_at_half_period():
    # tg = pi/2 sends |e,0> to -i|g,1>
    u = evolve_one_atom(SPACE, math.pi / 2, 1.0)
    col = u.matrix[:, 0]
    expected = np.zeros_like(col)
    expected[SPACE.cutoff + 1] = -1j
    assert _max_dev(col, expected) <= 1e-12


def test_one_atom_against_direct_eigendecomposition():
    # self-contained reference: coupling matrix built here, numpy eigh
    c = SPACE.cutoff
    m = np.arange(c)
    a = np.zeros((c, c), dtype=complex)
    a[m[:-1], m[1:]] = np.sqrt(m[1:])
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    big_a = np.kron(sp, a) + np.kron(sp.conj().T, a.conj().T)
    w, v = np.linalg.eigh(big_a)
    t, g = 0.7, 1.3
    ref = (v * np.exp(-1j * t * g * w)) @ v.conj().T
    got = evolve_one_atom(SPACE, t, g)
    keep = trusted_mask(2, SPACE)
    dev = np.abs((got.matrix - ref)[np.ix_(keep, keep)]).max()
    assert dev <= 1e-10


@pytest.mark.parametrize("t", [0.1, 0.7, 2.5, 10.0])
@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
def test_one_atom_oracle_grid(t, g):
    closed = evolve_one_atom(SPACE, t, g)
    ref = expm_hermitian(coupling_operator(1, SPACE), t * g)
    assert compare(closed, ref).max_abs_deviation <= 1e-10


@pytest.mark.parametrize("t", [0.1, 0.7, 2.5, 10.0])
@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
def test_two_atom_oracle_grid(t, g):
    closed = evolve_two_atoms(SPACE, t, g)
    ref = expm_hermitian(coupling_operator(2, SPACE), t * g)
    assert compare(closed, ref).max_abs_deviation <= 1e-10


def test_two_atom_identity_at_zero():
    u = evolve_two_atoms(SPACE, 0.0, 2.0)
    np.testing.assert_array_equal(u.matrix, np.eye(4 * SPACE.cutoff))


def test_two_atom_frozen_top_column():
    u = evolve_two_atoms(SPACE, 0.7, 1.3)
    c = SPACE.cutoff
    col = u.matrix[:, 0]
    assert abs(col[0] - AMP_EE0) <= 1e-12
    assert abs(col[c + 1] - AMP_EG1) <= 1e-12
    assert abs(col[2 * c + 1] - AMP_EG1) <= 1e-12
    assert abs(col[3 * c + 2] - AMP_GG2) <= 1e-12
    # everything else in the column vanishes, and the norm is exactly one
    rest = np.delete(col, [0, c + 1, 2 * c + 1, 3 * c + 2])
    assert _max_dev(rest, 0.0) <= 1e-12
    assert abs(np.linalg.norm(col) - 1.0) <= 1e-12


def test_two_atom_top_column_formulas():
    # the frozen values match the closed expressions through branch 2(2m+3)
    root6 = math.sqrt(6.0)
    u = 0.7 * 1.3
    c = math.cos(root6 * u)
    assert abs((2.0 + c) / 3.0 - AMP_EE0) <= 1e-12
    assert abs(-1j * math.sin(root6 * u) / root6 - AMP_EG1) <= 1e-12
    assert abs(math.sqrt(2.0) * (c - 1.0) / 3.0 - AMP_GG2) <= 1e-12


def test_two_atom_ground_column_stationary():
    u = evolve_two_atoms(SPACE, 3.1, 0.9)
    col = u.matrix[:, 3 * SPACE.cutoff]  # |gg,0>
    expected = np.zeros_like(col)
    expected[3 * SPACE.cutoff] = 1.0
    np.testing.assert_array_equal(col, expected)


def test_two_atom_middle_sum_blocks():
    # the two middle-to-last-column blocks agree with each other and carry
    # a single annihilator pattern; checked against the oracle entrywise
    t, g = 0.6, 1.1
    closed = evolve_two_atoms(SPACE, t, g)
    ref = expm_hermitian(coupling_operator(2, SPACE), t * g)
    tr = SPACE.trusted
    for i, j in ((1, 3), (2, 3), (3, 1), (3, 2)):
        dev = _max_dev(
            closed.block(i, j)[:tr, :tr], ref.block(i, j)[:tr, :tr]
        )
        assert dev <= 1e-10, f"block ({i}, {j})"
    np.testing.assert_array_equal(closed.block(1, 3), closed.block(2, 3))


def test_full_propagator_free_phase_only():
    # g = 0 leaves the pure free rotation
    t, omega = 0.8, 1.7
    u = evolve_full(1, SPACE, t, omega, 0.0)
    m = np.arange(SPACE.cutoff)
    phase = np.concatenate(
        [np.exp(-1j * t * omega * (0.5 + m)), np.exp(-1j * t * omega * (-0.5 + m))]
    )
    assert _max_dev(u.matrix, np.diag(phase)) <= 1e-15


@pytest.mark.parametrize("n", [1, 2])
def test_full_propagator_against_hamiltonian_oracle(n):
    t, omega, g = 0.7, 1.3, 0.8
    h = hamiltonian(n, SPACE, omega, omega, g)
    ref = expm_hermitian(h.total, t)
    got = evolve_full(n, SPACE, t, omega, g)
    assert compare(got, ref).max_abs_deviation <= 1e-10


def test_full_propagator_rejects_three_atoms():
    with pytest.raises(ValueError):
        evolve_full(3, SPACE, 0.1, 1.0, 1.0)


@pytest.mark.parametrize("kind", ["one", "two", "spin1"])
@pytest.mark.parametrize("t", [0.1, 1.0, 5.0, 20.0])
def test_unitarity_on_trusted(kind, t):
    g = 1.3
    builders = {
        "one": evolve_one_atom,
        "two": evolve_two_atoms,
        "spin1": evolve_spin_one,
    }
    u = builders[kind](SMALL, t, g)
    keep = trusted_mask(u.n_blocks, SMALL)
    gram = (u.dagger() @ u).matrix[np.ix_(keep, keep)]
    assert _max_dev(gram, np.eye(gram.shape[0])) <= 1e-10


@pytest.mark.parametrize("builder", [evolve_one_atom, evolve_two_atoms])
def test_group_law(builder):
    t1, t2, g = 0.4, 0.9, 1.3
    lhs = builder(SPACE, t1 + t2, g)
    rhs = builder(SPACE, t1, g) @ builder(SPACE, t2, g)
    assert compare(lhs, rhs).max_abs_deviation <= 1e-9


def test_gauss_product_matches_propagator():
    t, g = 0.3, 1.0
    factors = gauss_decompose_one_atom(SPACE, t, g)
    direct = evolve_one_atom(SPACE, t, g)
    assert compare(factors.product(), direct).max_abs_deviation <= 1e-9


def test_gauss_factor_shapes():
    factors = gauss_decompose_one_atom(SPACE, 0.3, 1.0)
    eye = np.eye(SPACE.cutoff)
    zero = np.zeros((SPACE.cutoff, SPACE.cutoff))
    np.testing.assert_array_equal(factors.lower.block(0, 0), eye)
    np.testing.assert_array_equal(factors.lower.block(0, 1), zero)
    np.testing.assert_array_equal(factors.upper.block(1, 0), zero)
    np.testing.assert_array_equal(factors.diagonal.block(0, 1), zero)
    np.testing.assert_allclose(
        np.diag(factors.diagonal.block(1, 1)),
        [1.0 / math.cos(0.3 * math.sqrt(m)) for m in range(SPACE.cutoff)],
        rtol=1e-12,
    )


def test_gauss_lower_variants_agree():
    factors = gauss_decompose_one_atom(SPACE, 0.3, 1.0)
    dev = _max_dev(factors.lower.matrix, factors.lower_alt.matrix)
    assert dev <= 1e-12


def test_gauss_identity_at_zero():
    factors = gauss_decompose_one_atom(SPACE, 0.0, 1.0)
    eye = np.eye(2 * SPACE.cutoff)
    for f in (factors.lower, factors.diagonal, factors.upper, factors.lower_alt):
        np.testing.assert_array_equal(f.matrix, eye)


def test_gauss_refuses_singular_point():
    # tg = pi/2 makes cos(tg sqrt(1)) vanish
    with pytest.raises(GaussSingularityError) as exc:
        gauss_decompose_one_atom(SPACE, math.pi / 2, 1.0)
    assert exc.value.level == 1
    assert exc.value.value <= 1e-8
    assert "m=1" in str(exc.value)


def test_gauss_threshold_is_adjustable():
    # a generous threshold rejects points where the default succeeds
    gauss_decompose_one_atom(SPACE, 0.3, 1.0)
    with pytest.raises(GaussSingularityError) as exc:
        gauss_decompose_one_atom(SPACE, 0.3, 1.0, tau_sing=0.999)
    assert exc.value.level == 1


def test_reduction_similarity_is_unitary():
    similarity, _ = reduction_transform(SPACE)
    gram = (similarity.dagger() @ similarity).matrix
    assert _max_dev(gram, np.eye(4 * SPACE.cutoff)) <= 1e-15


def test_reduction_block_diagonalizes():
    similarity, reduced = reduction_transform(SPACE)
    a_op = coupling_operator(2, SPACE)
    conj = (similarity @ a_op @ similarity.dagger()).matrix
    c = SPACE.cutoff
    expected = np.zeros_like(conj)
    expected[c:, c:] = reduced.matrix
    assert _max_dev(conj, expected) <= 1e-14


def test_reduced_coupling_pattern():
    _, reduced = reduction_transform(SPACE)
    root2 = math.sqrt(2.0)
    a = annihilator(SPACE)
    ad = creator(SPACE)
    zero = np.zeros_like(a)
    expected = np.block(
        [
            [zero, root2 * a, zero],
            [root2 * ad, zero, root2 * a],
            [zero, root2 * ad, zero],
        ]
    )
    assert _max_dev(reduced.matrix, expected) <= 1e-15


def test_spin_one_against_oracle():
    t, g = 0.9, 0.8
    _, reduced = reduction_transform(SPACE)
    closed = evolve_spin_one(SPACE, t, g)
    ref = expm_hermitian(reduced, t * g)
    assert compare(closed, ref).max_abs_deviation <= 1e-10


def test_spin_one_identity_at_zero():
    u = evolve_spin_one(SPACE, 0.0, 1.0)
    np.testing.assert_array_equal(u.matrix, np.eye(3 * SPACE.cutoff))


def test_reconstruction_matches_two_atom_form():
    got = reconstruct_two_atoms(SPACE, 0.9, 0.8)
    want = evolve_two_atoms(SPACE, 0.9, 0.8)
    assert compare(got, want).max_abs_deviation <= 1e-10


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("g", [0.5, 1.0])
def test_schrodinger_residual_quadratic_in_step(n, g):
    # central-difference residual of i dU/dt = H U drops by ~4 when the
    # step is halved
    t, omega = 0.7, 1.0
    h = 1e-4 * max(1.0, 1.0 / g)
    h_total = hamiltonian(n, SPACE, omega, omega, g).total.matrix
    keep = trusted_mask(2**n, SPACE)

    def residual(step):
        up = evolve_full(n, SPACE, t + step, omega, g).matrix
        dn = evolve_full(n, SPACE, t - step, omega, g).matrix
        mid = evolve_full(n, SPACE, t, omega, g).matrix
        res = (up - dn) / (2.0 * step) + 1j * (h_total @ mid)
        return float(np.abs(res[np.ix_(keep, keep)]).max())

    ratio = residual(h) / residual(h / 2.0)
    assert 3.5 <= ratio <= 4.5


def test_apply_flips_excited_state():
    u = evolve_one_atom(SPACE, math.pi / 2, 1.0)
    state = np.zeros(2 * SPACE.cutoff, dtype=complex)
    state[0] = 1.0
    out = apply(u, state)
    assert abs(out[SPACE.cutoff + 1] + 1j) <= 1e-12
    assert abs(np.linalg.norm(out) - 1.0) <= 1e-12


def test_apply_rejects_wrong_shape():
    u = evolve_one_atom(SPACE, 0.1, 1.0)
    with pytest.raises(ValueError):
        apply(u, np.zeros(3))
