"""Scenario files, the check orchestrator, convergence studies and reports.

A scenario is a TOML document::

    [scenario]
    name = "frw"

    [constants]
    H = 0.5

    [gravity]
    diagonal = ["1", "exp(-H*x0)", "exp(-H*x0)", "exp(-H*x0)"]   # or vierbein = 4x4

    [sfield]
    phi = "0"
    lambda = 0.0

    [connection]
    mode = "levi-civita"        # "frame" (frame = 4x4) or "direct" ([connection.components])

    [dirac]
    mass = 1.0
    psi = [["re0", "im0"], ["re1", "im1"], ["re2", "im2"], ["re3", "im3"]]
    adjoint_sign = "as-printed"

    [sample]
    mode = "random"             # or "grid" with n = N per axis
    box = [[-1, 1], [-1, 1], [-1, 1], [-1, 1]]
    count = 64
    seed = 1

Optional sections: [tolerances], [fd] (nested, divergence), [assert]
(eq23, eq33, eq37, eq47 switch those residuals from informational to
asserted), [oracle] (metric = 4x4 lower-index metric expressions),
[momentum] (x0, box, n) and [experimental] (eq43).
"""

from __future__ import annotations

import datetime
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from . import dirac as dd
from . import geometry as geo
from .errors import ExpressionSyntaxError, ScenarioParseError, UnknownSymbol, ValidationError
from .expr import parse_complex, parse_expression
from .oracles import metric_curvature
from .tensor import lorentz_matrix

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

PASS, FAIL, INFO = "pass", "fail", "informational"

DEFAULT_BOX = ((-1.0, 1.0),) * 4
DEFAULT_COUNT = 64
DEFAULT_SEED = 1
SATURATION_FLOOR = 1e-11
MIN_ORDER = 1.8

# fixed boost along x1 combined with a rotation in the x2-x3 plane
SPOT_OMEGA = np.array(
    [
        [0.0, 0.3, 0.0, 0.0],
        [-0.3, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.4],
        [0.0, 0.0, -0.4, 0.0],
    ]
)


@dataclass(frozen=True)
class CheckSpec:
    name: str
    equation: str
    tolerance: Optional[float]  # None: informational only
    description: str


CHECKS: Tuple[CheckSpec, ...] = (
    CheckSpec("metric_inverse", "Eq. 3", 1e-10, "g^{mu a} g_{a nu} = delta"),
    CheckSpec("lorentz_invariance", "Eq. 5", 1e-12, "metric unchanged by a constant frame rotation"),
    CheckSpec("volume_element", "Eq. 8", None, "equal volume elements of the two bundles"),
    CheckSpec("adjoint_sign", "Eq. 16", None, "(psi_;mu)^dagger gamma^0 - psibar_;mu with the configured sign"),
    CheckSpec("connection_antisymmetry", "Eq. 15", 1e-8, "A^{kl}_mu + A^{lk}_mu"),
    CheckSpec("vierbein_postulate", "Eq. 18", 1e-10, "total covariant derivative of the vierbein"),
    CheckSpec("christoffel_oracle", "Eq. 18", 1e-8, "Gamma against the metric Christoffel symbols"),
    CheckSpec("ricci_scalar_oracle", "Eq. 31", 1e-8, "R against the metric oracle"),
    CheckSpec("curvature_antisymmetry", "Eq. 30", 1e-10, "R^{kl}_{mu nu} antisymmetry in both pairs"),
    CheckSpec("dirac_equation", "Eq. 23", 1e-10, "Dirac residual"),
    CheckSpec("dirac_forms", "Eq. 22", 1e-10, "Eq. 22 against h times Eq. 23, relative"),
    CheckSpec("onshell_identity", "Eq. 24", 1e-10, "2 L_D against the residual combination, relative"),
    CheckSpec("commutator", "Eq. 29", 1e-5, "commutator of covariant derivatives"),
    CheckSpec("field_eq_A_antisymmetry", "Eq. 33", 1e-10, "connection equation antisymmetry in (k, l)"),
    CheckSpec("field_eq_A", "Eq. 33", 1e-8, "connection field equation"),
    CheckSpec("field_eq_h", "Eq. 37", 1e-8, "vierbein field equation"),
    CheckSpec("stress_energy_reality", "Eq. 38", None, "imaginary part of T^l_mu"),
    CheckSpec("naive_T_divergence", "Eq. 42", None, "T^mu_{nu;mu}"),
    CheckSpec("eq43_experimental", "Eq. 43", None, "one reading of the torsion-corrected law"),
    CheckSpec("bianchi", "Eq. 45", 1e-6, "B^mu_{nu;mu}"),
    CheckSpec("current_divergence", "Eq. 47", 1e-8, "d_mu (h psibar gamma^mu psi)"),
    CheckSpec("four_momentum", "Eq. 48", 1e-2, "relative change of P_mu under grid doubling"),
)
CHECK_BY_NAME = {c.name: c for c in CHECKS}


@dataclass(frozen=True)
class Sample:
    mode: str = "random"
    box: Tuple[Tuple[float, float], ...] = DEFAULT_BOX
    count: int = DEFAULT_COUNT
    n: int = 2
    seed: int = DEFAULT_SEED

    def points(self) -> np.ndarray:
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        if self.mode == "grid":
            axes = [lo[i] + (np.arange(self.n) + 0.5) * (hi[i] - lo[i]) / self.n for i in range(4)]
            return np.array(np.meshgrid(*axes, indexing="ij")).reshape(4, -1).T
        rng = np.random.default_rng(self.seed)
        return lo + (hi - lo) * rng.random((self.count, 4))


@dataclass(frozen=True)
class Momentum:
    x0: float
    box: Tuple[Tuple[float, float], ...]
    n: int


@dataclass
class Scenario:
    name: str
    constants: Dict[str, float]
    gravity: geo.VierbeinBundle
    sfield: geo.SFieldConfig
    connection_mode: str
    connection: object
    dirac: dd.DiracField
    adjoint_sign: dd.AdjointSign
    sample: Sample
    tolerances: Dict[str, float] = field(default_factory=dict)
    fd_nested: float = dd.NESTED_FD_STEP
    fd_divergence: float = dd.DIVERGENCE_FD_STEP
    asserted: Dict[str, bool] = field(default_factory=dict)
    oracle_metric: Optional[tuple] = None
    momentum: Optional[Momentum] = None
    experimental_eq43: bool = False
    source: str = "<memory>"

    @property
    def bundle(self):
        """The composite bundle the dynamics see."""
        return geo.CompositeVierbein(self.gravity, self.sfield)

    def tolerance(self, name: str) -> Optional[float]:
        return self.tolerances.get(name, CHECK_BY_NAME[name].tolerance)

    def with_overrides(self, tolerances=None, seed=None, points=None) -> "Scenario":
        tol = dict(self.tolerances)
        for k, v in (tolerances or {}).items():
            if k not in CHECK_BY_NAME:
                raise ValidationError(f"tolerances.{k}", "unknown check name")
            tol[k] = float(v)
        sample = self.sample
        if seed is not None:
            sample = replace(sample, seed=int(seed))
        if points is not None:
            if points < 1:
                raise ValidationError("sample.count", "must be at least 1")
            sample = replace(sample, count=int(points)) if sample.mode == "random" else replace(sample, n=int(points))
        return replace(self, tolerances=tol, sample=sample)


# ---------------------------------------------------------------------------
# loading


def _expr(text, where, constants):
    if not isinstance(text, str):
        raise ValidationError(where, "expected an expression string")
    try:
        return parse_expression(text, constants)
    except (ExpressionSyntaxError, UnknownSymbol) as exc:
        raise ScenarioParseError(str(exc), where) from exc


def _matrix(raw, where, constants):
    if not isinstance(raw, list) or len(raw) != 4 or any(not isinstance(r, list) or len(r) != 4 for r in raw):
        raise ValidationError(where, "expected a 4x4 array of expression strings")
    return [[_expr(raw[i][j], f"{where}[{i}][{j}]", constants) for j in range(4)] for i in range(4)]


def _number(table, key, where, default=None, kind=float):
    if key not in table:
        if default is None:
            raise ValidationError(where)
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(where, "expected a number")
    if kind is int and not float(v).is_integer():
        raise ValidationError(where, "expected an integer")
    return kind(v)


def _box(raw, where, dims):
    if not isinstance(raw, list) or len(raw) != dims:
        raise ValidationError(where, f"expected {dims} [lo, hi] pairs")
    out = []
    for i, pair in enumerate(raw):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValidationError(f"{where}[{i}]", "expected [lo, hi]")
        lo, hi = (float(x) for x in pair)
        if not hi > lo:
            raise ValidationError(f"{where}[{i}]", "empty interval")
        out.append((lo, hi))
    return tuple(out)


def _table(doc, key):
    t = doc.get(key, {})
    if not isinstance(t, dict):
        raise ValidationError(key, "expected a table")
    return t


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError(str(exc), source) from exc

    name = str(_table(doc, "scenario").get("name", os.path.splitext(os.path.basename(source))[0]))
    constants = {}
    for k, v in _table(doc, "constants").items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"constants.{k}", "expected a number")
        constants[k] = float(v)

    grav = _table(doc, "gravity")
    if "vierbein" in grav:
        gravity = geo.VierbeinBundle(_matrix(grav["vierbein"], "gravity.vierbein", constants))
    elif "diagonal" in grav:
        diag = grav["diagonal"]
        if not isinstance(diag, list) or len(diag) != 4:
            raise ValidationError("gravity.diagonal", "expected four expression strings")
        zero = parse_expression("0")
        entries = [
            [_expr(diag[k], f"gravity.diagonal[{k}]", constants) if k == m else zero for m in range(4)]
            for k in range(4)
        ]
        gravity = geo.VierbeinBundle(entries)
    else:
        raise ValidationError("gravity.vierbein")

    sf = _table(doc, "sfield")
    phi = _expr(sf.get("phi", "0"), "sfield.phi", constants)
    lam = _number(sf, "lambda", "sfield.lambda", default=0.0)
    if lam < 0:
        raise ValidationError("sfield.lambda", "must be non-negative")
    sfield = geo.SFieldConfig(phi, lam)

    conn = _table(doc, "connection")
    mode = conn.get("mode", "levi-civita")
    if mode == "levi-civita":
        connection = geo.LeviCivitaConnection(geo.CompositeVierbein(gravity, sfield))
    elif mode == "frame":
        if "frame" not in conn:
            raise ValidationError("connection.frame")
        connection = geo.FrameConnection(_matrix(conn["frame"], "connection.frame", constants))
    elif mode == "direct":
        comps = conn.get("components", {})
        if not isinstance(comps, dict):
            raise ValidationError("connection.components", "expected a table")
        parsed = {}
        for key, exprs in comps.items():
            where = f"connection.components.{key}"
            if len(key) != 2 or not key.isdigit() or not int(key[0]) < int(key[1]) <= 3:
                raise ValidationError(where, "key must be two digits kl with k < l <= 3")
            if not isinstance(exprs, list) or len(exprs) != 4:
                raise ValidationError(where, "expected four expression strings")
            parsed[(int(key[0]), int(key[1]))] = [_expr(e, f"{where}[{i}]", constants) for i, e in enumerate(exprs)]
        connection = geo.DirectConnection(parsed)
    elif mode == "zero":
        connection = geo.ZeroConnection()
    else:
        raise ValidationError("connection.mode", f"unknown mode {mode!r}")

    if "dirac" not in doc:
        raise ValidationError("dirac")
    dt = _table(doc, "dirac")
    mass = _number(dt, "mass", "dirac.mass")
    if mass < 0:
        raise ValidationError("dirac.mass", "must be non-negative")
    if "plane_wave" in dt:
        mom = dt["plane_wave"]
        if not isinstance(mom, list) or len(mom) != 4:
            raise ValidationError("dirac.plane_wave", "expected four momentum components p_mu")
        try:
            psi = dd.plane_wave([float(x) for x in mom], mass, which=int(dt.get("spinor", 0)))
        except ValueError as exc:
            raise ValidationError("dirac.plane_wave", str(exc)) from exc
    elif "psi" in dt:
        comps = dt["psi"]
        if not isinstance(comps, list) or len(comps) != 4:
            raise ValidationError("dirac.psi", "expected four [re, im] pairs")
        parsed = []
        for a, pair in enumerate(comps):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ValidationError(f"dirac.psi[{a}]", "expected [re, im]")
            for part, label in ((pair[0], "re"), (pair[1], "im")):
                _expr(part, f"dirac.psi[{a}].{label}", constants)
            parsed.append(parse_complex((pair[0], pair[1]), constants))
        psi = dd.DiracField(parsed, mass)
    else:
        psi = dd.zero_dirac(mass)
    try:
        adjoint_sign = dd.AdjointSign(dt.get("adjoint_sign", "as-printed"))
    except ValueError as exc:
        raise ValidationError("dirac.adjoint_sign", "expected 'as-printed' or 'standard'") from exc

    st = _table(doc, "sample")
    smode = st.get("mode", "random")
    if smode not in ("random", "grid"):
        raise ValidationError("sample.mode", "expected 'random' or 'grid'")
    sample = Sample(
        mode=smode,
        box=_box(st["box"], "sample.box", 4) if "box" in st else DEFAULT_BOX,
        count=_number(st, "count", "sample.count", default=DEFAULT_COUNT, kind=int),
        n=_number(st, "n", "sample.n", default=2, kind=int),
        seed=_number(st, "seed", "sample.seed", default=DEFAULT_SEED, kind=int),
    )
    if sample.count < 1:
        raise ValidationError("sample.count", "must be at least 1")
    if sample.n < 1:
        raise ValidationError("sample.n", "must be at least 1")
    if not 0 <= sample.seed < 2**64:
        raise ValidationError("sample.seed", "must fit in 64 unsigned bits")

    tolerances = {}
    for k, v in _table(doc, "tolerances").items():
        if k not in CHECK_BY_NAME:
            raise ValidationError(f"tolerances.{k}", "unknown check name")
        tolerances[k] = _number({k: v}, k, f"tolerances.{k}")

    fd = _table(doc, "fd")
    nested = _number(fd, "nested", "fd.nested", default=dd.NESTED_FD_STEP)
    divergence = _number(fd, "divergence", "fd.divergence", default=dd.DIVERGENCE_FD_STEP)
    if not (nested > 0 and divergence > 0):
        raise ValidationError("fd", "steps must be positive")

    asserted = {}
    for k, v in _table(doc, "assert").items():
        if k not in ("eq23", "eq33", "eq37", "eq47"):
            raise ValidationError(f"assert.{k}", "expected one of eq23, eq33, eq37, eq47")
        if not isinstance(v, bool):
            raise ValidationError(f"assert.{k}", "expected true or false")
        asserted[k] = v

    oracle_metric = None
    orc = _table(doc, "oracle")
    if "metric" in orc:
        oracle_metric = tuple(tuple(r) for r in _matrix(orc["metric"], "oracle.metric", constants))

    momentum = None
    mt = _table(doc, "momentum")
    if mt:
        momentum = Momentum(
            x0=_number(mt, "x0", "momentum.x0"),
            box=_box(mt.get("box"), "momentum.box", 3),
            n=_number(mt, "n", "momentum.n", default=4, kind=int),
        )
        if momentum.n < 1:
            raise ValidationError("momentum.n", "must be at least 1")

    experimental = bool(_table(doc, "experimental").get("eq43", False))

    return Scenario(
        name=name,
        constants=constants,
        gravity=gravity,
        sfield=sfield,
        connection_mode=mode,
        connection=connection,
        dirac=psi,
        adjoint_sign=adjoint_sign,
        sample=sample,
        tolerances=tolerances,
        fd_nested=nested,
        fd_divergence=divergence,
        asserted=asserted,
        oracle_metric=oracle_metric,
        momentum=momentum,
        experimental_eq43=experimental,
        source=source,
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioParseError(exc.strerror or str(exc), str(path)) from exc
    return parse_scenario(text, str(path))


# ---------------------------------------------------------------------------
# pointwise checks


def _rel(diff, *scales):
    return float(diff) / max([1.0] + [float(s) for s in scales])


def evaluate_point(s: Scenario, p, nested_step=None, divergence_step=None) -> Dict[str, float]:
    """Residual of every applicable check at one point, keyed by check name."""
    nested_step = s.fd_nested if nested_step is None else nested_step
    divergence_step = s.fd_divergence if divergence_step is None else divergence_step
    p = np.asarray(p, dtype=float)
    out: Dict[str, float] = {}
    h, c, d = s.bundle, s.connection, s.dirac

    g_up, g_down = geo.composite_metric(s.gravity, s.sfield, p)
    out["metric_inverse"] = float(np.abs(g_up @ g_down - np.eye(4)).max())
    lam = lorentz_matrix(SPOT_OMEGA)
    g_rot, _ = geo.composite_metric(s.gravity.transformed(lam), s.sfield, p)
    out["lorentz_invariance"] = _rel(np.abs(g_rot - g_up).max(), np.abs(g_up).max())
    vol = geo.volume_element_check(s.gravity, s.sfield, p)
    out["volume_element"] = abs(abs(vol.det_gravity) - abs(vol.sfield_det))
    out["_sfield_rank"] = float(vol.sfield_rank)

    fp = dd.field_point(d, h, c, p, with_curvature=True)
    out["adjoint_sign"] = dd.adjoint_consistency(d, c, p)[s.adjoint_sign.value]
    out["connection_antisymmetry"] = geo.antisymmetry_residual(fp.A)
    gc = geo.global_connection_from(fp.E, fp.dE, fp.A, p)
    out["vierbein_postulate"] = gc.residual
    out["_torsion"] = float(np.abs(geo.torsion(gc.gamma)).max())
    R = geo.curvature_from(fp.A, fp.dA)
    out["curvature_antisymmetry"] = float(
        max(np.abs(R + np.swapaxes(R, 0, 1)).max(), np.abs(R + np.swapaxes(R, 2, 3)).max())
    )
    ric = geo.ricci_from(fp.E, R)
    if s.oracle_metric is not None:
        orc = metric_curvature(s.oracle_metric, p)
        out["christoffel_oracle"] = float(np.abs(gc.gamma - orc.christoffel).max())
        out["ricci_scalar_oracle"] = abs(ric.scalar - orc.scalar)

    r23 = dd.residual_eq23_at(fp)
    r22 = dd.residual_eq22_at(fp)
    out["dirac_equation"] = r23.max_abs()
    gap = max(np.abs(r22.psi - fp.h * r23.psi).max(), np.abs(r22.psibar - fp.h * r23.psibar).max())
    out["dirac_forms"] = _rel(gap, abs(fp.h) * r23.max_abs(), r22.max_abs())
    oc = dd.onshell_check_at(fp)
    out["onshell_identity"] = _rel(oc.gap, abs(oc.two_lagrangian), oc.bound, abs(oc.combination))
    out["commutator"] = dd.commutator_check(d, h, c, p, step=nested_step).diff

    resA = dd.field_eq_A_at(fp)
    out["field_eq_A_antisymmetry"] = float(np.abs(resA + np.swapaxes(resA, 1, 2)).max())
    out["field_eq_A"] = float(np.abs(resA).max())
    T = dd.stress_energy_at(fp, strict=False)
    out["stress_energy_reality"] = T.imag_residue
    out["field_eq_h"] = float(np.abs(fp.h * (fp.Einv.T * ric.scalar - 2.0 * ric.ricci) + T.T).max())
    out["naive_T_divergence"] = float(np.abs(dd.naive_T_divergence(d, h, c, p, step=divergence_step)).max())
    if s.experimental_eq43:
        out["eq43_experimental"] = float(np.abs(dd.eq43_experimental(d, h, c, p, step=divergence_step)).max())
    out["bianchi"] = float(np.abs(dd.B_divergence(h, c, p, step=divergence_step)).max())
    _, div = dd.current_and_divergence(d, h, p, step=divergence_step)
    out["current_divergence"] = abs(div)
    return out


def _status(s: Scenario, name: str, residual: float, torsion_free: bool) -> Tuple[Optional[float], str]:
    tol = s.tolerance(name)
    conditional = {
        "dirac_equation": "eq23",
        "field_eq_A": "eq33",
        "field_eq_h": "eq37",
        "current_divergence": "eq47",
    }
    informational = tol is None
    if name in conditional and not s.asserted.get(conditional[name], False):
        informational = True
    if name == "bianchi" and not torsion_free:
        informational = True
    if informational:
        return tol, INFO
    ok = math.isfinite(residual) and residual <= tol
    return tol, PASS if ok else FAIL


def _threads() -> int:
    raw = os.environ.get("SFIELD_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, min(n, 32))


def _map_points(fn, points):
    workers = _threads()
    if workers == 1 or len(points) == 1:
        return [fn(q) for q in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, points))  # results stay indexed by point


@dataclass
class CheckRecord:
    name: str
    equation: str
    points: int
    max_residual: float
    tolerance: Optional[float]
    status: str
    worst_point: Optional[List[float]] = None
    detail: Optional[dict] = None

    def as_dict(self):
        d = {
            "name": self.name,
            "equation": self.equation,
            "points": self.points,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "status": self.status,
            "worst_point": self.worst_point,
        }
        if self.detail is not None:
            d["detail"] = self.detail
        return d


@dataclass
class CheckReport:
    scenario: str
    checks: List[CheckRecord]
    environment: dict
    timestamp: str

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def as_dict(self, include_timestamp=True):
        d = {
            "scenario": self.scenario,
            "status": PASS if self.passed else FAIL,
            "environment": self.environment,
            "checks": [c.as_dict() for c in self.checks],
        }
        if include_timestamp:
            d["timestamp"] = self.timestamp
        return d

    def to_json(self, include_timestamp=True) -> str:
        return dumps(self.as_dict(include_timestamp))


def _environment(s: Scenario, n_points: int) -> dict:
    return {
        "version": __version__,
        "seed": s.sample.seed,
        "sample_mode": s.sample.mode,
        "points": n_points,
        "fd_steps": {"nested": s.fd_nested, "divergence": s.fd_divergence},
        "adjoint_sign": s.adjoint_sign.value,
        "connection": s.connection_mode,
        "gamma_representation": "dirac",
    }


def _four_momentum_record(s: Scenario) -> CheckRecord:
    m = s.momentum
    h = s.bundle
    coarse = dd.four_momentum(h, s.connection, m.x0, m.box, m.n)
    fine = dd.four_momentum(h, s.connection, m.x0, m.box, 2 * m.n)
    change = float(np.abs(fine - coarse).max()) / max(float(np.abs(fine).max()), 1.0e-12)
    tol, status = _status(s, "four_momentum", change, True)
    return CheckRecord(
        "four_momentum",
        "Eq. 48",
        (2 * m.n) ** 3 + m.n**3,
        change,
        tol,
        status,
        None,
        {"P_coarse": [float(x) for x in coarse], "P_fine": [float(x) for x in fine], "n": m.n},
    )


def run_all_checks(s: Scenario) -> CheckReport:
    points = s.sample.points()
    results = _map_points(lambda q: evaluate_point(s, q), points)
    torsion_free = max(r["_torsion"] for r in results) <= 1e-9
    records = []
    for chk in CHECKS:
        vals = [r.get(chk.name) for r in results]
        if any(v is None for v in vals):
            continue
        arr = np.array(vals, dtype=float)
        worst = int(np.nanargmax(arr)) if np.any(np.isfinite(arr)) else 0
        tol, status = _status(s, chk.name, float(np.max(arr)), torsion_free)
        detail = None
        if chk.name == "volume_element":
            rank = int(max(r["_sfield_rank"] for r in results))
            detail = {"max_sfield_rank": rank, "equal_volumes_possible": rank == 4}
        if chk.name == "bianchi":
            detail = {"max_torsion": float(max(r["_torsion"] for r in results))}
        if chk.name == "adjoint_sign":
            detail = {
                conv.value: float(max(dd.adjoint_consistency(s.dirac, s.connection, q)[conv.value] for q in points))
                for conv in dd.AdjointSign
            }
        records.append(
            CheckRecord(
                chk.name,
                chk.equation,
                len(points),
                float(np.max(arr)),
                tol,
                status,
                [float(x) for x in points[worst]],
                detail,
            )
        )
    if s.momentum is not None:
        records.append(_four_momentum_record(s))
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return CheckReport(s.name, records, _environment(s, len(points)), stamp)


# ---------------------------------------------------------------------------
# convergence


@dataclass
class ConvergenceRow:
    name: str
    equation: str
    steps: List[float]
    residuals: List[float]
    order: Optional[float]
    label: str  # "converging", "saturated", "slow" or "informational"

    @property
    def passed(self) -> bool:
        return self.label in ("converging", "saturated", "informational")

    def as_dict(self):
        return {
            "name": self.name,
            "equation": self.equation,
            "steps": self.steps,
            "residuals": self.residuals,
            "order": self.order,
            "label": self.label,
        }


def fitted_order(steps, residuals) -> Optional[float]:
    """Least-squares slope of log(residual) against log(step)."""
    ls = np.log(np.asarray(steps, dtype=float))
    lr = np.log(np.asarray(residuals, dtype=float))
    if not np.all(np.isfinite(lr)):
        return None
    return float(np.polyfit(ls, lr, 1)[0])


def classify(steps, residuals, expect_zero=True):
    if not expect_zero:
        return fitted_order(steps, residuals) if min(residuals) > 0 else None, "informational"
    if min(residuals) < SATURATION_FLOOR:
        return None, "saturated"
    order = fitted_order(steps, residuals)
    return order, "converging" if order is not None and order >= MIN_ORDER else "slow"


def convergence_study(s: Scenario, steps) -> List[ConvergenceRow]:
    """Residuals of the finite-difference checks for each step; observed order by log fit.

    The same step drives the nested (commutator) and divergence stencils.
    """
    steps = [float(x) for x in steps]
    if len(steps) < 3:
        raise ValidationError("steps", "need at least three steps")
    if any(b >= a for a, b in zip(steps, steps[1:])) or steps[-1] <= 0:
        raise ValidationError("steps", "steps must be positive and strictly decreasing")
    points = s.sample.points()
    names = ("commutator", "bianchi", "current_divergence")
    table = {n: [] for n in names}
    torsion = 0.0
    for step in steps:
        res = _map_points(lambda q: evaluate_point(s, q, nested_step=step, divergence_step=step), points)
        torsion = max(torsion, max(r["_torsion"] for r in res))
        for n in names:
            table[n].append(float(max(r[n] for r in res)))
    rows = []
    for n in names:
        expect = True
        if n == "bianchi" and torsion > 1e-9:
            expect = False
        if n == "current_divergence" and not s.asserted.get("eq47", False):
            expect = False
        order, label = classify(steps, table[n], expect)
        rows.append(ConvergenceRow(n, CHECK_BY_NAME[n].equation, steps, table[n], order, label))
    return rows


# ---------------------------------------------------------------------------
# serialisation


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    text = format(x, ".17g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    import json

    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")
