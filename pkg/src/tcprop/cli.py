"""Command line interface.

Subcommands: verify (invariant suite), evolve (state trajectory to CSV),
decompose (triangular factorization report), relation-search (diagonal
relation fit).  Exit codes: 0 success, 1 check or singularity failure,
2 invalid configuration or arguments.

Options may come from a config file of ``key = value`` lines (``#``
comments allowed); explicit command line flags win over the file, the file
wins over defaults.  No command uses randomness, so identical
configurations produce identical output bytes.
"""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
from dataclasses import dataclass

import numpy as np

from .fock import FockSpace, default_guard
from .oracle import compare, relation_fit
from .propagator import GaussSingularityError, apply, evolve_full, evolve_one_atom, gauss_decompose_one_atom
from .spinchain import atomic_labels
from .verify import run_checks

__all__ = ["ConfigError", "RunConfig", "InitialStateSpec", "main", "entry"]

COHERENT_WEIGHT_TOL = 1e-10


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


_DEFAULTS = {
    "atoms": 1,
    "cutoff": 60,
    "guard": None,
    "g": 1.0,
    "omega": 1.0,
    "t0": 0.0,
    "t1": 10.0,
    "steps": 500,
    "tol": 1e-9,
    "initial": None,
    "out": None,
    "max_power": 3,
}

_KEY_TYPES = {
    "atoms": int,
    "cutoff": int,
    "guard": int,
    "steps": int,
    "max_power": int,
    "g": float,
    "omega": float,
    "t0": float,
    "t1": float,
    "tol": float,
    "initial": str,
    "out": str,
}


@dataclass(frozen=True)
class InitialStateSpec:
    """Parsed ``<atomic>:fock(<m>)`` or ``<atomic>:coherent(<re>[+<im>i])``."""

    atomic: str
    kind: str
    fock_level: int | None = None
    alpha: complex | None = None


@dataclass(frozen=True)
class RunConfig:
    atoms: int
    cutoff: int
    guard: int
    g: float
    omega: float
    t0: float
    t1: float
    steps: int
    tol: float
    initial: str | None
    out: str | None
    max_power: int


def read_config_file(path: str) -> dict:
    """Parse a plain key=value config file into typed values."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, _, text = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _KEY_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _KEY_TYPES[key](text.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {text.strip()!r}") from exc
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file and explicit flags, then validate."""
    merged = dict(_DEFAULTS)
    if args.config is not None:
        merged.update(read_config_file(args.config))
    for key in _DEFAULTS:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            merged[key] = cli_val

    if merged["atoms"] not in (1, 2, 3):
        raise ConfigError(f"atoms must be 1, 2 or 3, got {merged['atoms']}")
    if merged["cutoff"] < 2:
        raise ConfigError(f"cutoff must be >= 2, got {merged['cutoff']}")
    if merged["guard"] is None:
        merged["guard"] = default_guard(merged["cutoff"])
    if not 0 <= merged["guard"] <= merged["cutoff"] - 2:
        raise ConfigError(
            f"guard must satisfy 0 <= guard <= cutoff-2, got guard={merged['guard']} "
            f"with cutoff={merged['cutoff']}"
        )
    for key in ("g", "omega", "t0", "t1", "tol"):
        if not math.isfinite(merged[key]):
            raise ConfigError(f"{key} must be finite, got {merged[key]}")
    if merged["t1"] < merged["t0"]:
        raise ConfigError(f"t1 must be >= t0, got t0={merged['t0']}, t1={merged['t1']}")
    if merged["steps"] < 1:
        raise ConfigError(f"steps must be >= 1, got {merged['steps']}")
    if merged["tol"] <= 0:
        raise ConfigError(f"tol must be positive, got {merged['tol']}")
    if merged["max_power"] not in (3, 5):
        raise ConfigError(f"max-power must be 3 or 5, got {merged['max_power']}")
    return RunConfig(**merged)


_INITIAL_RE = re.compile(r"(?P<atomic>[eg]+):(?P<kind>fock|coherent)\((?P<arg>[^)]*)\)")
_COMPLEX_RE = re.compile(
    r"(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"(?:(?P<im>[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i)?"
)


def parse_initial(text: str, atoms: int) -> InitialStateSpec:
    """Parse the initial-state grammar and check the atomic label length."""
    match = _INITIAL_RE.fullmatch(text.strip())
    if match is None:
        raise ConfigError(
            f"bad initial state {text!r}; expected <atomic>:fock(<m>) or "
            "<atomic>:coherent(<re>[+<im>i]) with atomic letters e/g"
        )
    atomic = match.group("atomic")
    if len(atomic) != atoms:
        raise ConfigError(
            f"atomic label {atomic!r} has {len(atomic)} letters, expected {atoms}"
        )
    arg = match.group("arg").strip()
    if match.group("kind") == "fock":
        try:
            level = int(arg)
        except ValueError as exc:
            raise ConfigError(f"bad fock level {arg!r}") from exc
        if level < 0:
            raise ConfigError(f"fock level must be >= 0, got {level}")
        return InitialStateSpec(atomic=atomic, kind="fock", fock_level=level)
    cmatch = _COMPLEX_RE.fullmatch(arg)
    if cmatch is None:
        raise ConfigError(f"bad coherent amplitude {arg!r}; expected <re> or <re>+<im>i")
    alpha = complex(float(cmatch.group("re")), float(cmatch.group("im") or 0.0))
    return InitialStateSpec(atomic=atomic, kind="coherent", alpha=alpha)


def _atomic_index(label: str) -> int:
    return int("".join("1" if ch == "g" else "0" for ch in label), 2)


def build_state(spec: InitialStateSpec, space: FockSpace) -> np.ndarray:
    """Composite state vector for a parsed initial-state spec.

    Fock levels must sit inside the trusted band.  Coherent amplitudes are
    truncated at the cutoff, refused if the discarded weight exceeds 1e-10
    or if |alpha|^2 strays past a quarter of the top trusted level, and
    renormalized after truncation.
    """
    top_trusted = space.trusted - 1
    if spec.kind == "fock":
        if spec.fock_level > top_trusted:
            raise ConfigError(
                f"fock level {spec.fock_level} exceeds the top trusted level {top_trusted}"
            )
        field = np.zeros(space.cutoff, dtype=complex)
        field[spec.fock_level] = 1.0
    else:
        alpha = spec.alpha
        mean = abs(alpha) ** 2
        if mean > top_trusted / 4:
            raise ConfigError(
                f"|alpha|^2 = {mean:.3f} exceeds (cutoff-1-guard)/4 = {top_trusted / 4:.3f}; "
                "raise the cutoff"
            )
        field = np.empty(space.cutoff, dtype=complex)
        field[0] = math.exp(-mean / 2)
        for m in range(1, space.cutoff):
            field[m] = field[m - 1] * alpha / math.sqrt(m)
        kept = float(np.sum(np.abs(field) ** 2))
        discarded = max(0.0, 1.0 - kept)
        if discarded > COHERENT_WEIGHT_TOL:
            raise ConfigError(
                f"coherent state loses weight {discarded:.3e} past the cutoff "
                f"(> {COHERENT_WEIGHT_TOL:.0e}); raise the cutoff"
            )
        field /= math.sqrt(kept)
    state = np.zeros(2 ** len(spec.atomic) * space.cutoff, dtype=complex)
    k = _atomic_index(spec.atomic)
    state[k * space.cutoff : (k + 1) * space.cutoff] = field
    return state


def _fmt(x: float) -> str:
    return format(x, ".17g")


def cmd_evolve(cfg: RunConfig) -> int:
    if cfg.atoms == 3:
        raise ConfigError(
            "no closed-form propagator exists for three atoms; evolve supports atoms=1 or 2"
        )
    if cfg.initial is None:
        raise ConfigError("evolve requires --initial (or initial= in the config file)")
    spec = parse_initial(cfg.initial, cfg.atoms)
    space = FockSpace(cfg.cutoff, cfg.guard)
    psi0 = build_state(spec, space)
    labels = atomic_labels(cfg.atoms)
    m_values = np.arange(cfg.cutoff, dtype=float)

    rows = []
    for i in range(cfg.steps + 1):
        t = cfg.t0 + (cfg.t1 - cfg.t0) * i / cfg.steps
        psi = apply(evolve_full(cfg.atoms, space, t, cfg.omega, cfg.g), psi0)
        probs = np.abs(psi.reshape(len(labels), cfg.cutoff)) ** 2
        per_label = probs.sum(axis=1)
        mean_photon = float((probs * m_values[None, :]).sum())
        norm = float(np.sqrt(per_label.sum()))
        rows.append([t, *per_label.tolist(), mean_photon, norm])

    header = ["t", *[f"P_{lab}" for lab in labels], "mean_photon", "norm"]
    if cfg.out is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    space = FockSpace(cfg.cutoff, cfg.guard)
    results, notes = run_checks(cfg.atoms, space, cfg.tol)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        extra = f"  ({res.note})" if res.note else ""
        print(
            f"{status} {res.name:28s} deviation {res.deviation:.3e}  tol {res.tol:.3e}{extra}"
        )
    for note in notes:
        print(f"note: {note}")
    failed = sum(not res.passed for res in results)
    if failed:
        print(f"{failed} of {len(results)} checks failed")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def cmd_decompose(cfg: RunConfig) -> int:
    if cfg.atoms != 1:
        raise ConfigError("the triangular factorization exists for one atom only (atoms=1)")
    space = FockSpace(cfg.cutoff, cfg.guard)
    t, g = cfg.t0, cfg.g
    try:
        factors = gauss_decompose_one_atom(space, t, g)
    except GaussSingularityError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1
    closed = evolve_one_atom(space, t, g)
    product_dev = compare(factors.product(), closed).max_abs_deviation
    variant_dev = float(np.abs(factors.lower.matrix - factors.lower_alt.matrix).max())
    print(f"factorization at t={_fmt(t)}, g={_fmt(g)}, cutoff={cfg.cutoff}, guard={cfg.guard}")
    print(f"product vs closed form deviation {product_dev:.3e} (tol {cfg.tol:.3e})")
    print(f"lower-factor variant agreement  {variant_dev:.3e}")
    return 0 if product_dev <= cfg.tol else 1


def cmd_relation_search(cfg: RunConfig) -> int:
    space = FockSpace(cfg.cutoff, cfg.guard)
    shown = 10
    for power in (3, 5):
        if power > cfg.max_power:
            break
        report = relation_fit(cfg.atoms, space, power)
        print(f"relation A^{power} = D A^{power - 2} for atoms={cfg.atoms}")
        print(f"relative residual {report.relative_residual:.6e}")
        for k in range(2**cfg.atoms):
            vals = report.best_fit_values[k]
            head = ", ".join(
                "unconstrained" if np.isnan(v) else format(v, ".12g") for v in vals[:shown]
            )
            more = " ..." if vals.size > shown else ""
            print(f"  block {k}: [{head}{more}]")
        degrees = report.sector_min_poly_degrees
        histo: dict[int, int] = {}
        for deg in degrees.values():
            histo[deg] = histo.get(deg, 0) + 1
        histo_text = ", ".join(f"degree {d}: {c} sectors" for d, c in sorted(histo.items()))
        print(f"  sector minimal-polynomial degrees: {histo_text}")
        if report.relative_residual > 1e-6:
            print(
                "  no diagonal relation of this shape fits "
                "(informational; expected for three atoms)"
            )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value config file")
    common.add_argument("--atoms", type=int, help="number of atoms (1, 2 or 3; default 1)")
    common.add_argument("--cutoff", type=int, help="Fock space cutoff (default 60)")
    common.add_argument("--guard", type=int, help="guard band width (default max(4, cutoff/8))")
    common.add_argument("--g", type=float, help="coupling strength (default 1)")
    common.add_argument("--omega", type=float, help="mode and transition frequency (default 1)")
    common.add_argument("--t0", type=float, help="start time (default 0); decompose evaluates here")
    common.add_argument("--t1", type=float, help="end time (default 10)")
    common.add_argument("--steps", type=int, help="number of time steps (default 500)")
    common.add_argument("--tol", type=float, help="comparison tolerance (default 1e-9)")
    common.add_argument("--initial", help="initial state, e.g. e:fock(0) or ee:coherent(1.5)")
    common.add_argument("--out", metavar="PATH", help="CSV output path (default stdout)")
    common.add_argument("--max-power", type=int, dest="max_power", help="highest relation power, 3 or 5")

    parser = argparse.ArgumentParser(
        prog="tcprop",
        description="Closed-form atom-cavity propagators on a truncated Fock space",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the invariant check suite")
    sub.add_parser("evolve", parents=[common], help="write a state trajectory as CSV")
    sub.add_parser("decompose", parents=[common], help="triangular factorization report (atoms=1)")
    sub.add_parser(
        "relation-search", parents=[common], help="fit diagonal relations A^p = D A^(p-2)"
    )
    return parser


_COMMANDS = {
    "verify": cmd_verify,
    "evolve": cmd_evolve,
    "decompose": cmd_decompose,
    "relation-search": cmd_relation_search,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, ValueError) as exc:
        if isinstance(exc, GaussSingularityError):
            print(f"refused: {exc}", file=sys.stderr)
            return 1
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
