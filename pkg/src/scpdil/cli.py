"""Command line driver: load JSON descriptions, run checks and constructions, emit JSON reports.

Report layout (fixed order): ``tool``, ``config``, ``sections`` (a list, in the
order of the task's section table), ``passed``, and finally ``timing``. The
``timing`` block is the only part that varies between identical runs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from itertools import product
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from . import classical as cl
from . import dilations as dl
from . import lattice as lw
from . import reps
from .opcore import DEFAULT_POLICY, StructureError, TolerancePolicy, classify, opnorm, parse_matrix

TASKS = ("check", "dilate", "classical", "cpd", "sweep")
DILATION_KINDS = (
    "fock",
    "doubly_commuting",
    "exact_unitary",
    "free_schaeffer",
    "free_schaeffer_minimal",
    "free_unitary",
    "trivial_action",
    "ando",
    "gns",
)
SWEEP_FAMILIES = ("classical", "doubly_commuting")
MAX_POINTS = 5
MAX_DIM = 8


class InputError(ValueError):
    """Input file does not match the schema or violates an invariant."""


# -- input -------------------------------------------------------------------------


def _field(data: dict, name: str, where: str):
    if name not in data:
        raise InputError(f"{where}: missing field '{name}'")
    return data[name]


def _matrix(value, where: str) -> np.ndarray:
    try:
        return parse_matrix(value)
    except (StructureError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _ops(data: dict, where: str) -> list[np.ndarray]:
    raw = _field(data, "ops", where)
    if not isinstance(raw, list) or not raw:
        raise InputError(f"{where}: field 'ops' must be a nonempty list of matrices")
    return [_matrix(m, f"{where}.ops[{k}]") for k, m in enumerate(raw)]


def _system(data: dict, where: str) -> cl.ClassicalSystem:
    try:
        return cl.ClassicalSystem.from_json(data)
    except cl.SystemError_ as exc:
        raise InputError(f"{where}: {exc}") from None


def _tuple(data: dict, where: str, pol: TolerancePolicy) -> reps.TupleRep:
    kind = data.get("kind", "grid")
    if kind not in ("grid", "free"):
        raise InputError(f"{where}: field 'kind' must be 'grid' or 'free'")
    try:
        t = reps.TupleRep(_ops(data, where), kind)
    except StructureError as exc:
        raise InputError(f"{where}: {exc}") from None
    for i, T in enumerate(t.ops, start=1):
        nrm = opnorm(T)
        if nrm > 1 + pol.residual_tol:
            raise InputError(f"{where}.ops[{i - 1}]: not a contraction (norm {nrm:.6g})")
    return t


def _rep(data: dict, dim: int, size: int, where: str, pol: TolerancePolicy) -> reps.FiniteSpectrumRep:
    if "point_of_basis" in data:
        pts = data["point_of_basis"]
        if not isinstance(pts, list) or len(pts) != dim:
            raise InputError(f"{where}: field 'point_of_basis' must list one point per basis vector ({dim})")
        for k, x in enumerate(pts):
            if not isinstance(x, int) or not 0 <= x < size:
                raise InputError(f"{where}.point_of_basis[{k}]: index {x!r} out of range 0..{size - 1}")
        return reps.FiniteSpectrumRep.diagonal(pts, size)
    projs = [_matrix(m, f"{where}.projections[{k}]") for k, m in enumerate(_field(data, "projections", where))]
    try:
        rep = reps.FiniteSpectrumRep(tuple(projs))
        rep.validate(pol)
    except StructureError as exc:
        raise InputError(f"{where}: {exc}") from None
    return rep


def parse_input(data, pol: TolerancePolicy = DEFAULT_POLICY):
    """Typed object from decoded JSON: ClassicalSystem, TupleRep or CovariantPair."""
    if not isinstance(data, dict):
        raise InputError("input: top level must be a JSON object")
    if "parrott" in data:
        spec = data["parrott"]
        U = _matrix(_field(spec, "U", "parrott"), "parrott.U")
        V = _matrix(_field(spec, "V", "parrott"), "parrott.V")
        try:
            return reps.parrott_triple(U, V, pol)
        except StructureError as exc:
            raise InputError(f"parrott: {exc}") from None
    if "system" in data:
        sys_ = _system(data["system"], "system")
        t = _tuple(data, "pair", pol)
        rep = _rep(_field(data, "rep", "pair"), t.dim, sys_.size, "rep", pol)
        try:
            return reps.CovariantPair(rep, t, sys_)
        except StructureError as exc:
            raise InputError(f"pair: {exc}") from None
    if "ops" in data:
        return _tuple(data, "tuple", pol)
    if "maps" in data:
        return _system(data, "system")
    raise InputError("input: expected one of the fields 'maps', 'ops', 'system', 'parrott'")


def load_input(path, pol: TolerancePolicy = DEFAULT_POLICY):
    p = Path(path)
    if not p.exists():
        raise InputError(f"input file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"input is not valid JSON: {exc}") from None
    return parse_input(data, pol)


# -- config and report -------------------------------------------------------------


@dataclass
class RunConfig:
    task: str
    input: str | None = None
    depth: int = 3
    budget: int | None = None
    radius: int = 3
    seed: int = 0
    tol: float = DEFAULT_POLICY.residual_tol
    psd_tol: float = DEFAULT_POLICY.psd_tol
    rank_tol: float = DEFAULT_POLICY.rank_tol
    report: str | None = None
    kind: str = "ando"
    family: str = "classical"
    count: int = 100
    size: int = 3
    dim: int = 6

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {', '.join(TASKS)}")
        if self.budget is None:
            self.budget = max(1, self.depth - 1)
        if self.budget > self.depth:
            raise ValueError(f"budget {self.budget} exceeds depth {self.depth}")
        if self.radius < 1:
            raise ValueError("radius must be at least 1")
        if self.count < 0:
            raise ValueError("count must be nonnegative")

    @property
    def policy(self) -> TolerancePolicy:
        return TolerancePolicy(self.tol, self.psd_tol, self.rank_tol)

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("report")
        return out


def to_jsonable(obj):
    """Recursively convert numpy scalars, tuples, sets and complex numbers for JSON."""
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, str) else k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    return obj


def _passed_fields(obj) -> list[bool]:
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if k == "passed" and isinstance(v, bool):
                out.append(v)
            else:
                out.extend(_passed_fields(v))
    elif isinstance(obj, list):
        for v in obj:
            out.extend(_passed_fields(v))
    return out


def report_body(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=True)


# -- tasks ---------------------------------------------------------------------------


Section = tuple[str, Callable[[], dict]]


def _check_sections(obj, cfg: RunConfig) -> list[Section]:
    pol = cfg.policy
    t = obj.tuple if isinstance(obj, reps.CovariantPair) else obj
    if not isinstance(t, reps.TupleRep):
        raise InputError("check: input must be a tuple or covariant pair")
    secs: list[Section] = [
        ("classify", lambda: {"ops": [classify(T, pol) for T in t.ops]}),
    ]
    if t.kind == "grid" and t.n > 1:
        secs.append(("commuting", lambda: reps.check_commuting(t, pol).to_json()))
        # informational: doubly commuting is a property, not a requirement
        secs.append(("doubly_commuting", lambda: _doubly(t, pol)))
    if isinstance(obj, reps.CovariantPair):
        secs.append(
            ("covariance", lambda: {str(i): reps.check_covariance(obj, i, pol).to_json() for i in range(1, t.n + 1)})
        )
    return secs


def _doubly(t: reps.TupleRep, pol: TolerancePolicy) -> dict:
    c = reps.check_doubly_commuting(t, pol)
    return {"residual": c.residual, "doubly_commuting": c.passed}


def _as_pair(obj, kind: str | None = None) -> reps.CovariantPair:
    if isinstance(obj, reps.CovariantPair):
        return obj
    if isinstance(obj, reps.TupleRep):
        t = obj if kind is None else reps.TupleRep(obj.ops, kind)
        return reps.trivial_pair(t)
    raise InputError("input must be a tuple or covariant pair")


def build_dilation(obj, cfg: RunConfig) -> tuple[reps.CovariantPair, dl.DilationResult]:
    pol, N, kind = cfg.policy, cfg.depth, cfg.kind
    if kind == "fock":
        p = _as_pair(obj)
        return dl.zero_pair(p.rep, p.system), dl.fock_pair(p.rep, p.system, N)
    if kind in ("free_schaeffer", "free_schaeffer_minimal", "free_unitary", "trivial_action"):
        p = _as_pair(obj, "free")
        if p.tuple.kind != "free":
            p = reps.CovariantPair(p.rep, reps.TupleRep(p.tuple.ops, "free"), p.system)
        if kind == "free_unitary":
            return p, dl.free_unitary_dilation(p, N, pol)
        if kind == "trivial_action":
            return p, dl.trivial_action_unitary_dilation(p, pol, budget=cfg.budget)
        return p, dl.free_schaeffer_dilation(p, N, kind.endswith("minimal"), pol)
    p = _as_pair(obj)
    if kind == "doubly_commuting":
        return p, dl.doubly_commuting_dilation(p.tuple, N, pol, p)
    if kind == "exact_unitary":
        if p.n != 1:
            raise InputError("exact_unitary: input must be a single operator")
        return p, dl.exact_unitary_step_dilation(p.tuple.gen(1), N, pol)
    if kind == "ando":
        return p, dl.ando_dilation(p, N, cfg.budget, pol)
    if kind == "gns":
        return p, dl.gns_coextension(p.tuple, N, pol, p)
    raise InputError(f"unknown dilation kind '{kind}'")


def _dilate_sections(obj, cfg: RunConfig) -> list[Section]:
    state: dict = {}

    def construct():
        orig, d = build_dilation(obj, cfg)
        state["orig"], state["d"] = orig, d
        return {"kind": d.kind, "dim": d.space.dim, "budget": d.budget, "params": d.params,
                "diagnostics": d.diagnostics}

    def verify():
        if "d" not in state:
            raise RuntimeError("construction failed")
        return dl.verify_dilation(state["orig"], state["d"], cfg.budget, cfg.policy)

    return [("construction", construct), ("verification", verify)]


def _classical_sections(sys_: cl.ClassicalSystem, cfg: RunConfig) -> list[Section]:
    N = max(2, cfg.depth)

    def labels(Z):
        return sys_.labels(Z)

    def system():
        return {"points": list(sys_.points), "n": sys_.n, "commuting": sys_.is_commuting(),
                "bijective": sys_.is_bijective()}

    def ideals():
        return {"ideals": [{"support": sorted(S), "vanishing_set": labels(cl.ideal_Ix(sys_, S))}
                           for S in cl.all_supports(sys_.n)]}

    def tail():
        tl = cl.adding_tail(sys_, N)
        worst = 0
        funcs = [tuple(1 if q == p else 0 for q in range(sys_.size)) for p in range(sys_.size)]
        funcs.append((1,) * sys_.size)
        for x in lw.enumerate_box(sys_.n, N - 1):
            for a in funcs:
                worst = max(worst, cl.verify_on0(sys_, tl, a, x))
        bc = cl.beta_injective_and_commuting(tl)
        out = {"depth": N, "carriers": [{"support": sorted(S), "carrier": labels(W)} for S, W in tl.profile.items()],
               "on0_residual": worst, "on0": {"passed": worst == 0}, "beta_injective": bc["injective"]}
        if sys_.is_commuting():
            out["beta_commuting"] = {"passed": bc["commuting"]}
        else:
            out["beta_commuting_informational"] = bc["commuting"]
        return out

    def minimality():
        rep = cl.minimality_report(sys_, N)
        out = {
            "minimal_A": rep["minimal_A"],
            "injective": rep["injective"],
            "minimal_witness": labels(rep["minimal_witness"]) if rep["minimal_witness"] is not None else None,
            "tail_ideal_witness": None,
        }
        if rep["tail_ideal_witness"] is not None:
            out["tail_ideal_witness"] = [{"position": list(x), "carrier": labels(c)}
                                         for x, c in rep["tail_ideal_witness"].items()]
            out["tail_invariant"] = {"passed": bool(rep["tail_invariant"])}
        if sys_.is_commuting():
            out["minimal_implies_injective"] = {"passed": not rep["implication_violation"]}
        return out

    def radical():
        E, q = cl.radical_quotient(sys_) if sys_.is_commuting() else (None, None)
        if E is None:
            return {"skipped": "maps do not commute"}
        return {"eventual_image": labels(E), "quotient_bijective": q.is_bijective()}

    def distinct():
        rep = cl.distinctness_report(sys_)
        return {k: (list(map(list, v)) if k == "witness" and v is not None else v) for k, v in rep.items()}

    return [("system", system), ("ideals", ideals), ("adding_tail", tail), ("minimality", minimality),
            ("radical", radical), ("distinctness", distinct)]


def _cpd_sections(t: reps.TupleRep, cfg: RunConfig) -> list[Section]:
    pol = cfg.policy

    def commuting():
        return reps.check_commuting(t, pol).to_json()

    def sweep():
        return reps.cpd_radius_sweep(t, cfg.radius, pol)

    return [("commuting", commuting), ("doubly_commuting", lambda: _doubly(t, pol)), ("gram_sweep", sweep)]


def classical_family_sweep(size: int, n: int = 2) -> dict:
    """Every pair of self-maps of a ``size``-point set, checked against the minimality implications."""
    if size > MAX_POINTS:
        raise ValueError(f"classical sweep is limited to |X| <= {MAX_POINTS}")
    if size < 1:
        return {"systems": 0, "commuting": 0, "violations": 0, "tail_violations": 0,
                "noncommuting_minimal_not_injective": 0, "passed": True}
    funcs = list(product(range(size), repeat=size))
    counts = {"systems": 0, "commuting": 0, "minimal": 0, "injective": 0, "violations": 0,
              "tail_violations": 0, "noncommuting_minimal_not_injective": 0}
    for maps in product(funcs, repeat=n):
        sys_ = cl.ClassicalSystem(tuple(range(size)), maps)
        rep = cl.minimality_report(sys_, 2)
        counts["systems"] += 1
        commuting = sys_.is_commuting()
        counts["commuting"] += commuting
        counts["minimal"] += rep["minimal_A"]
        counts["injective"] += rep["injective"]
        if rep["implication_violation"]:
            if commuting:
                counts["violations"] += 1
            else:
                counts["noncommuting_minimal_not_injective"] += 1
        if not rep["injective"] and not (rep["tail_ideal_witness"] and rep["tail_invariant"]):
            counts["tail_violations"] += 1
    counts["passed"] = counts["violations"] == 0 and counts["tail_violations"] == 0
    return counts


def doubly_commuting_family_sweep(count: int, dim: int, radius: int, seed: int,
                                  pol: TolerancePolicy = DEFAULT_POLICY) -> dict:
    if dim > MAX_DIM:
        raise ValueError(f"tuple sweep is limited to dimension <= {MAX_DIM}")
    rng = np.random.default_rng(seed)
    worst = None
    for _ in range(count):
        t = reps.random_doubly_commuting_pair(rng, dim)
        for r in range(1, radius + 1):
            _, lam, _ = reps.cpd_gram(t, lw.enumerate_cube(2, r), pol)
            worst = lam if worst is None else min(worst, lam)
    return {"tuples": count, "radius": radius, "min_gram_eig": worst,
            "passed": worst is None or worst >= -pol.psd_tol}


def _sweep_sections(cfg: RunConfig) -> list[Section]:
    if cfg.family == "classical":
        return [("classical_sweep", lambda: classical_family_sweep(cfg.size if cfg.count else 0))]
    if cfg.family == "doubly_commuting":
        return [("doubly_commuting_sweep",
                 lambda: doubly_commuting_family_sweep(cfg.count, cfg.dim, cfg.radius, cfg.seed, cfg.policy))]
    raise ValueError(f"unknown sweep family '{cfg.family}'")


def _sections(cfg: RunConfig) -> list[Section]:
    if cfg.task == "sweep":
        return _sweep_sections(cfg)
    if cfg.input is None:
        raise InputError(f"task '{cfg.task}' needs --input")
    obj = load_input(cfg.input, cfg.policy)
    if cfg.task == "classical":
        if not isinstance(obj, cl.ClassicalSystem):
            raise InputError("classical: input must be a classical system")
        return _classical_sections(obj, cfg)
    if cfg.task == "check":
        return _check_sections(obj, cfg)
    if cfg.task == "cpd":
        t = obj.tuple if isinstance(obj, reps.CovariantPair) else obj
        if not isinstance(t, reps.TupleRep):
            raise InputError("cpd: input must be a tuple")
        return _cpd_sections(t, cfg)
    return _dilate_sections(obj, cfg)


def run(cfg: RunConfig) -> tuple[dict, int]:
    """Execute a task; returns the report and the process exit status."""
    np.random.seed(cfg.seed)
    report: dict = {"tool": {"name": "scpdil", "version": __version__}, "config": cfg.echo(), "sections": []}
    timing: dict = {}
    try:
        sections = _sections(cfg)
    except (InputError, ValueError) as exc:
        sections = []
        report["sections"].append({"name": "input", "error": str(exc), "passed": False})
    for name, fn in sections:
        t0 = time.perf_counter()
        try:
            result = to_jsonable(fn())
            entry = {"name": name, "result": result}
            flags = _passed_fields(result)
            entry["passed"] = all(flags)
        except Exception as exc:  # surfaced per section, never a crash
            entry = {"name": name, "error": f"{type(exc).__name__}: {exc}", "passed": False}
        timing[name] = time.perf_counter() - t0
        report["sections"].append(entry)
    report["passed"] = all(s["passed"] for s in report["sections"])
    report["timing"] = timing
    return report, 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scpdil", description=__doc__.splitlines()[0])
    ap.add_argument("task", choices=TASKS)
    ap.add_argument("--input", help="JSON input file")
    ap.add_argument("--depth", type=int, default=3, help="truncation depth N")
    ap.add_argument("--budget", type=int, default=None, help="word-length budget k (default N-1)")
    ap.add_argument("--radius", type=int, default=3, help="largest Gram window radius")
    ap.add_argument("--tol", type=float, default=DEFAULT_POLICY.residual_tol)
    ap.add_argument("--psd-tol", type=float, default=DEFAULT_POLICY.psd_tol)
    ap.add_argument("--rank-tol", type=float, default=DEFAULT_POLICY.rank_tol)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--report", help="write the JSON report here instead of stdout")
    ap.add_argument("--kind", choices=DILATION_KINDS, default="ando", help="construction for 'dilate'")
    ap.add_argument("--family", choices=SWEEP_FAMILIES, default="classical", help="family for 'sweep'")
    ap.add_argument("--count", type=int, default=100, help="number of random tuples for 'sweep'")
    ap.add_argument("--size", type=int, default=3, help="|X| for the classical sweep")
    ap.add_argument("--dim", type=int, default=6, help="largest dimension for random tuples")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            task=args.task, input=args.input, depth=args.depth, budget=args.budget, radius=args.radius,
            seed=args.seed, tol=args.tol, psd_tol=args.psd_tol, rank_tol=args.rank_tol, report=args.report,
            kind=args.kind, family=args.family, count=args.count, size=args.size, dim=args.dim,
        )
    except ValueError as exc:
        print(f"scpdil: {exc}", file=sys.stderr)
        return 2
    report, status = run(cfg)
    text = dumps(report)
    if cfg.report:
        Path(cfg.report).write_text(text + "\n")
    else:
        print(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
