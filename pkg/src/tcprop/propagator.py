"""Closed-form interaction propagators exp(-i t g A) and the full evolution.

The coupling operator A of one or two atoms satisfies a low-degree
polynomial relation (A^2 is diagonal for one atom, A^3 = D A for two), so
exp(-i t g A) collapses to finitely many terms whose coefficients are
spectral functions of the photon number.  Every block below is assembled as
spectral_fn(f) times a power of the ladder operators, with f built from the
entire functions cosz and sincz of the argument (t g)^2 d(m); the branch
d(m) = 2(2m - 1) goes negative at m = 0, which is why the entire-function
forms are used throughout.

With the resonant full Hamiltonian the free part commutes with the
coupling, so the full propagator is the free phase times the interaction
propagator.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .fock import FockSpace, annihilator, cosz, creator, sincz, spectral_fn
from .spinchain import CompositeOperator, collective

__all__ = [
    "GaussFactors",
    "GaussSingularityError",
    "evolve_one_atom",
    "evolve_two_atoms",
    "evolve_full",
    "evolve_spin_one",
    "gauss_decompose_one_atom",
    "reduction_transform",
    "reconstruct_two_atoms",
    "apply",
]

_SQRT2 = sqrt(2.0)


def evolve_one_atom(space: FockSpace, t: float, g: float) -> CompositeOperator:
    """Closed-form exp(-i t g A) for one atom.

    Blocks (atomic order e, g):

        [[ cos(tg sqrt(N+1)),            -i sin(tg sqrt(N+1))/sqrt(N+1) a ],
         [ -i sin(tg sqrt(N))/sqrt(N) a+, cos(tg sqrt(N))                 ]]

    written with cosz/sincz so every factor is total.
    """
    tg = t * g
    u = tg * tg
    a = annihilator(space)
    ad = creator(space)
    c_up = spectral_fn(space, lambda m: cosz(u * (m + 1)))
    c_dn = spectral_fn(space, lambda m: cosz(u * m))
    s_up = spectral_fn(space, lambda m: tg * sincz(u * (m + 1)))
    s_dn = spectral_fn(space, lambda m: tg * sincz(u * m))
    return CompositeOperator.from_blocks(
        space,
        [
            [c_up, -1j * (s_up @ a)],
            [-1j * (s_dn @ ad), c_dn],
        ],
    )


class GaussSingularityError(ValueError):
    """Raised when the Gauss factorization does not exist at (t, g).

    The triangular factors contain tan(tg sqrt(m)); the factorization
    breaks down when cos(tg sqrt(m)) vanishes for some level m.
    """

    def __init__(self, level: int, value: float):
        self.level = level
        self.value = value
        super().__init__(
            f"cos(t g sqrt(m)) vanishes at level m={level} (|cos| = {value:.3e}); "
            "the triangular factorization does not exist at this (t, g)"
        )


@dataclass(frozen=True, eq=False)
class GaussFactors:
    """Lower-unitriangular, diagonal and upper-unitriangular factors.

    ``lower`` puts the spectral function left of the creator; ``lower_alt``
    is the same factor with the creator written first, i.e. the pair related
    by the shifting identity f(N) a+ = a+ f(N+1).  The two are equal
    entrywise; both are kept so the agreement can be checked directly.
    """

    lower: CompositeOperator
    diagonal: CompositeOperator
    upper: CompositeOperator
    lower_alt: CompositeOperator

    def product(self) -> CompositeOperator:
        return self.lower @ self.diagonal @ self.upper


def gauss_decompose_one_atom(
    space: FockSpace, t: float, g: float, tau_sing: float = 1e-8
) -> GaussFactors:
    """Triangular factorization of the one-atom propagator.

        exp(-i t g A) = lower @ diagonal @ upper

    with lower = [[1, 0], [-i tan(tg sqrt(N))/sqrt(N) a+, 1]],
    diagonal = [[cos(tg sqrt(N+1)), 0], [0, 1/cos(tg sqrt(N))]] and
    upper = [[1, -i tan(tg sqrt(N+1))/sqrt(N+1) a], [0, 1]].

    Refuses with :class:`GaussSingularityError` when |cos(tg sqrt(m))| falls
    below ``tau_sing`` for any level m in 0..cutoff-1.
    """
    tg = t * g
    u = tg * tg
    cos_levels = cosz(u * np.arange(space.cutoff, dtype=float))
    bad = np.nonzero(np.abs(cos_levels) < tau_sing)[0]
    if bad.size:
        level = int(bad[0])
        raise GaussSingularityError(level, float(abs(cos_levels[level])))

    a = annihilator(space)
    ad = creator(space)

    def tan_up(m):
        # tan(tg sqrt(m+1))/sqrt(m+1)
        return tg * sincz(u * (m + 1)) / cosz(u * (m + 1))

    def tan_dn(m):
        # tan(tg sqrt(m))/sqrt(m); total because sincz(0) = 1, cosz(0) = 1
        return tg * sincz(u * m) / cosz(u * m)

    lower = CompositeOperator.from_blocks(
        space, [[1, 0], [-1j * (spectral_fn(space, tan_dn) @ ad), 1]]
    )
    lower_alt = CompositeOperator.from_blocks(
        space, [[1, 0], [-1j * (ad @ spectral_fn(space, tan_up)), 1]]
    )
    diagonal = CompositeOperator.from_blocks(
        space,
        [
            [spectral_fn(space, lambda m: cosz(u * (m + 1))), 0],
            [0, spectral_fn(space, lambda m: 1.0 / cosz(u * m))],
        ],
    )
    upper = CompositeOperator.from_blocks(
        space, [[1, -1j * (spectral_fn(space, tan_up) @ a)], [0, 1]]
    )
    return GaussFactors(lower=lower, diagonal=diagonal, upper=upper, lower_alt=lower_alt)


def _two_atom_spectral(space: FockSpace, tg: float):
    """The distinct spectral functions of the two-atom closed form.

    Branch arguments are d(m) = 2(2m+3), 2(2m+1), 2(2m-1) for the top,
    middle and bottom atomic rows.  The bottom-row functions are pinned to
    their exact limits at m = 0 (coefficient 0, or a structurally zero
    ladder row) so the factors stay finite for any tg.
    """
    u = tg * tg

    def d_top(m):
        return 2.0 * (2 * m + 3)

    def d_mid(m):
        return 2.0 * (2 * m + 1)

    def d_bot(m):
        return 2.0 * (2 * m - 1)

    f = {}
    f["top_diag"] = lambda m: (m + 2 + (m + 1) * cosz(u * d_top(m))) / (2 * m + 3)
    f["top_sin"] = lambda m: tg * sincz(u * d_top(m))
    f["top_two"] = lambda m: (cosz(u * d_top(m)) - 1) / (2 * m + 3)
    f["mid_sin"] = lambda m: tg * sincz(u * d_mid(m))
    f["mid_plus"] = lambda m: (1 + cosz(u * d_mid(m))) / 2
    f["mid_minus"] = lambda m: (cosz(u * d_mid(m)) - 1) / 2
    f["mid_cos"] = lambda m: cosz(u * d_mid(m))
    f["bot_two"] = lambda m: 0.0 if m == 0 else (cosz(u * d_bot(m)) - 1) / (2 * m - 1)
    f["bot_sin"] = lambda m: 0.0 if m == 0 else tg * sincz(u * d_bot(m))
    f["bot_diag"] = lambda m: 1.0 if m == 0 else (m - 1 + m * cosz(u * d_bot(m))) / (2 * m - 1)
    return {name: spectral_fn(space, fn) for name, fn in f.items()}


def evolve_two_atoms(space: FockSpace, t: float, g: float) -> CompositeOperator:
    """Closed-form exp(-i t g A) for two atoms (basis ee, eg, ge, gg).

    Follows from exp(-i t g A) = 1 + D^-1 (cos(tg sqrt(D)) - 1) A^2
    - i D^-1/2 sin(tg sqrt(D)) A with the cubic relation A^3 = D A,
    D = diag(2(2N+3), 2(2N+1), 2(2N+1), 2(2N-1)).  The (1,3)/(2,3) blocks
    mirror (0,1)/(1,0): -i sin(tg sqrt(2(2N+1)))/sqrt(2(2N+1)) times a.
    """
    tg = t * g
    a = annihilator(space)
    ad = creator(space)
    sf = _two_atom_spectral(space, tg)

    top_off = -1j * (sf["top_sin"] @ a)
    mid_dn = -1j * (sf["mid_sin"] @ ad)
    mid_up = -1j * (sf["mid_sin"] @ a)
    bot_off = -1j * (sf["bot_sin"] @ ad)
    return CompositeOperator.from_blocks(
        space,
        [
            [sf["top_diag"], top_off, top_off, sf["top_two"] @ a @ a],
            [mid_dn, sf["mid_plus"], sf["mid_minus"], mid_up],
            [mid_dn, sf["mid_minus"], sf["mid_plus"], mid_up],
            [sf["bot_two"] @ ad @ ad, bot_off, bot_off, sf["bot_diag"]],
        ],
    )


def evolve_full(n: int, space: FockSpace, t: float, omega: float, g: float) -> CompositeOperator:
    """Resonant full propagator: free phase times the interaction propagator.

    U(t) = (exp(-i t omega S_3) kron exp(-i t omega N)) exp(-i t g A).
    Available for n = 1 and n = 2; no closed interaction form exists for
    three atoms.
    """
    if n == 1:
        interaction = evolve_one_atom(space, t, g)
    elif n == 2:
        interaction = evolve_two_atoms(space, t, g)
    else:
        raise ValueError(f"closed-form full propagator exists for 1 or 2 atoms, got n={n!r}")
    _, _, s_3 = collective(n)
    s3_diag = np.diag(s_3).real
    m = np.arange(space.cutoff, dtype=float)
    phase = np.exp(-1j * t * omega * (s3_diag[:, None] + m[None, :])).ravel()
    return CompositeOperator(interaction.n_blocks, space, phase[:, None] * interaction.matrix)


def reduction_transform(space: FockSpace) -> tuple[CompositeOperator, CompositeOperator]:
    """Similarity that block-diagonalizes the two-atom coupling operator.

    Returns (ST kron 1, B) where T rotates the one-excitation pair into
    antisymmetric/symmetric combinations, S swaps the antisymmetric state to
    the front, and

        (ST kron 1) A (ST kron 1)+ = blockdiag(0, B),
        B = [[0, sqrt(2) a, 0], [sqrt(2) a+, 0, sqrt(2) a], [0, sqrt(2) a+, 0]].

    The singlet decouples; B is the spin-1 coupling operator on 3 blocks.
    """
    r = 1.0 / _SQRT2
    t_mat = np.array(
        [[1, 0, 0, 0], [0, r, -r, 0], [0, r, r, 0], [0, 0, 0, 1]], dtype=complex
    )
    s_mat = np.array(
        [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=complex
    )
    similarity = CompositeOperator(
        4, space, np.kron(s_mat @ t_mat, np.eye(space.cutoff, dtype=complex))
    )
    j_plus = _SQRT2 * np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=complex)
    b_mat = np.kron(j_plus, annihilator(space)) + np.kron(j_plus.conj().T, creator(space))
    return similarity, CompositeOperator(3, space, b_mat)


def evolve_spin_one(space: FockSpace, t: float, g: float) -> CompositeOperator:
    """Closed-form exp(-i t g B) for the spin-1 block of the reduction.

    Same structure as the two-atom form with the sqrt(2) ladder factors
    absorbed, e.g. the (1,2) block is -i sin(tg sqrt(2(2N+3)))/sqrt(2N+3) a.
    """
    tg = t * g
    a = annihilator(space)
    ad = creator(space)
    sf = _two_atom_spectral(space, tg)
    u = tg * tg

    def bot_sin2(m):
        return 0.0 if m == 0 else _SQRT2 * tg * sincz(u * 2.0 * (2 * m - 1))

    top_sin2 = _SQRT2 * sf["top_sin"]
    mid_sin2 = _SQRT2 * sf["mid_sin"]
    bot2 = spectral_fn(space, bot_sin2)
    return CompositeOperator.from_blocks(
        space,
        [
            [sf["top_diag"], -1j * (top_sin2 @ a), sf["top_two"] @ a @ a],
            [-1j * (mid_sin2 @ ad), sf["mid_cos"], -1j * (mid_sin2 @ a)],
            [sf["bot_two"] @ ad @ ad, -1j * (bot2 @ ad), sf["bot_diag"]],
        ],
    )


def reconstruct_two_atoms(space: FockSpace, t: float, g: float) -> CompositeOperator:
    """Two-atom propagator rebuilt through the spin-1 reduction.

    (ST)+ blockdiag(1, exp(-i t g B)) (ST); must agree with
    :func:`evolve_two_atoms` on the trusted subspace.
    """
    similarity, _ = reduction_transform(space)
    spin1 = evolve_spin_one(space, t, g)
    c = space.cutoff
    block = np.eye(4 * c, dtype=complex)
    block[c:, c:] = spin1.matrix
    inner = CompositeOperator(4, space, block)
    return similarity.dagger() @ inner @ similarity


def apply(u: CompositeOperator, state: np.ndarray) -> np.ndarray:
    """Apply a composite operator to a state vector of matching dimension."""
    vec = np.asarray(state, dtype=complex)
    dim = u.n_blocks * u.space.cutoff
    if vec.shape != (dim,):
        raise ValueError(f"state has shape {vec.shape}, operator expects ({dim},)")
    return u.matrix @ vec
