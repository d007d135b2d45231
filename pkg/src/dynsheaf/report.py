"""The analysis pipeline and the built-in verification suites.

``analyze`` runs every module on one map and records each identity with both
sides and a verdict.  Module failures become report warnings; only parse and
degree errors abort.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .cycles import cycles_up_to_period, gamma
from .divisors import claim_divisor, lambda_truncated, rigid_divisor
from .errors import DegreeZero, DynsheafError
from .jets import cycle_divisor, global_deformation_dims, hom_dim, hom_ext
from .map_core import critical_data, postcritical
from .numerics.tolerances import DEFAULT
from .pairs_ext import ideal_sheaf_ext
from .quad_diff import is_lattes_2222, nabla_and_ext2, orbifold_signature

SCHEMA = "dynsheaf/1"


@dataclass(frozen=True)
class AnalysisConfig:
    kmax: int = 2
    N: int = None
    seed: int = 0
    tol: object = DEFAULT

    @property
    def tolerances(self):
        return replace(self.tol, rng_seed=self.seed)


@dataclass(frozen=True)
class Identity:
    name: str
    lhs: object
    rhs: object
    relation: str = "=="

    @property
    def passed(self):
        if self.relation == "<=":
            return self.lhs <= self.rhs
        return self.lhs == self.rhs

    def to_json(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "relation": self.relation, "pass": self.passed}


def _cx(z):
    # -0.0 would make otherwise identical reports differ
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


@dataclass(eq=False)
class AnalysisReport:
    expression: str
    map: object
    config: AnalysisConfig
    critical: object = None
    post: object = None
    cycles: tuple = ()
    gamma: object = None
    divisors: dict = field(default_factory=dict)
    dims: dict = field(default_factory=dict)
    per_cycle: list = field(default_factory=list)
    identities: list = field(default_factory=list)
    lattes: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def D(self):
        return self.map.D

    @property
    def all_pass(self):
        return all(i.passed for i in self.identities)

    def identity(self, name):
        for i in self.identities:
            if i.name == name:
                return i
        raise KeyError(name)

    def invariant_block(self):
        """The coordinate-free part of the report (degree, classes, multipliers, dimensions, verdicts)."""
        cyc = sorted(
            (c.period, c.kind, tuple(_cx(complex(np.round(c.multiplier, 5)))), v)
            for c, v in zip(self.cycles, self.gamma.values if self.gamma else ())
        )
        return {
            "degree": self.D,
            "ramification_degree": self.critical.ramification.degree if self.critical else None,
            "critical_multiplicities": sorted(m for _, m in self.critical.ramification) if self.critical else None,
            "delta_f": self.post.delta if self.post else None,
            "cycles": [list(c) for c in cyc],
            "gamma_A": self.gamma.gamma_A if self.gamma else None,
            "dims": dict(sorted(self.dims.items())),
            "identities": [[i.name, i.passed] for i in self.identities],
        }

    def to_json(self):
        tol = self.config.tolerances
        return {
            "schema": SCHEMA,
            "version": __version__,
            "expression": self.expression,
            "map": self.map.to_json(),
            "degree": self.D,
            "critical": self.critical.to_json() if self.critical else None,
            "postcritical": self.post.to_json() if self.post else None,
            "cycles": [dict(c.to_json(), gamma=v) for c, v in zip(self.cycles, self.gamma.values if self.gamma else ())],
            "gamma": self.gamma.to_json() if self.gamma else None,
            "divisors": self.divisors,
            "dims": self.dims,
            "per_cycle_hom": self.per_cycle,
            "identities": [i.to_json() for i in self.identities],
            "lattes": self.lattes,
            "config": {"kmax": self.config.kmax, "N": self.config.N, "seed": self.config.seed},
            "tolerances": tol.as_dict(),
            "warnings": list(self.warnings),
        }

    def to_text(self):
        lines = [f"map: {self.expression}", f"degree D = {self.D}"]
        if self.critical:
            lines.append(f"critical points: {len(self.critical.critical_points)}, deg Gamma_f = {self.critical.ramification.degree}")
        if self.post:
            state = "stabilized" if self.post.stabilized else "not stabilized"
            lines.append(f"delta_f = {self.post.delta} (N = {self.post.suggested_N}, {state})")
        for c, v in zip(self.cycles, self.gamma.values if self.gamma else ()):
            rho = complex(c.multiplier)
            lines.append(f"  period {c.period} {c.kind:<24} |rho| = {abs(rho):.6g}  gamma = {v}")
        if self.gamma:
            lines.append(f"gamma_A = {self.gamma.gamma_A} (lower bound for gamma_f)")
        for k, v in sorted(self.dims.items()):
            lines.append(f"{k} = {v}")
        lines.append("identities:")
        for i in self.identities:
            mark = "PASS" if i.passed else "FAIL"
            lines.append(f"  [{mark}] {i.name}: {i.lhs} {i.relation} {i.rhs}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines)


def _attempt(report, what, fn):
    try:
        return fn()
    except DynsheafError as e:
        report.warnings.append(f"{what}: {type(e).__name__}: {e}")
        return None


def analyze(f, config=None, expression=None):
    """Run the pipeline on a rational map of degree at least 2."""
    config = config or AnalysisConfig()
    tol = config.tolerances
    if f.D < 2:
        raise DegreeZero(f"analysis needs degree at least 2, got {f.D}")
    rep = AnalysisReport(expression or repr(f), f, config, warnings=list(f.warnings))
    d = f.D
    rep.critical = _attempt(rep, "critical data", lambda: critical_data(f, tol))
    if rep.critical is None:
        rep.identities.append(Identity("deg Gamma_f = 2D-2", None, 2 * d - 2))
        return rep
    rep.identities.append(Identity("deg Gamma_f = 2D-2", rep.critical.ramification.degree, 2 * d - 2))

    rep.post = _attempt(rep, "postcritical", lambda: postcritical(f, tol=tol))
    if rep.post is not None:
        if not rep.post.stabilized:
            rep.warnings.append("postcritical increments did not stabilize; delta_f is the last increment")
        rep.warnings.extend(rep.post.warnings)

    cycles = _attempt(rep, "cycles", lambda: cycles_up_to_period(f, config.kmax, tol)) or []
    rep.cycles = tuple(cycles)
    rep.gamma = _attempt(rep, "gamma", lambda: gamma(f, cycles))

    g = _attempt(rep, "global deformations", lambda: global_deformation_dims(f, tol))
    if g is not None:
        rep.dims["global_hom"] = g.hom
        rep.dims["global_coker"] = g.coker
        rep.identities.append(Identity("global Hom = 0", g.hom, 0))
        rep.identities.append(Identity("global coker = 2D-2", g.coker, 2 * d - 2))

    rigid = [c for c in cycles if c.kind != "superattracting"]
    rdiv = _attempt(rep, "rigid divisor", lambda: rigid_divisor(f, rigid, tol=tol))
    if rdiv is not None:
        rep.divisors["rigid"] = rdiv.to_json()

    if rep.post is None:
        return rep
    delta_f = rep.post.delta
    n = config.N

    lam = _attempt(rep, "Lambda pair", lambda: lambda_truncated(f, n, tol, rep.post))
    if lam is not None:
        rep.divisors["lambda"] = lam.to_json()
        he = _attempt(rep, "Lambda Hom/Ext", lambda: hom_ext(f, lam.delta0, lam.delta1, tol))
        if he is not None:
            deg_g = rep.critical.ramification.degree
            rep.dims["hom_lambda"] = he.hom
            rep.dims["ext1_lambda"] = he.ext1
            rep.identities.append(Identity("Hom(Omega, O_Lambda) = deg Gamma_f", he.hom, deg_g))
            rep.identities.append(Identity("Ext1(Omega, O_Lambda) = deg(Gamma_f) - delta_f", he.ext1, deg_g - delta_f))

    for i, c in enumerate(rigid):
        m = rdiv.mult(c.points[0]) if rdiv is not None else None
        if m is None:
            break
        h = _attempt(rep, f"cycle {i} Hom", lambda c=c, m=m: hom_dim(f, cycle_divisor(c, m, tol), cycle_divisor(c, m, tol), tol))
        if h is not None:
            gv = rep.gamma.values[cycles.index(c)]
            rep.per_cycle.append({"period": c.period, "class": c.kind, "multiplicity": m, "hom": h, "gamma": gv})
            rep.identities.append(Identity(f"Hom at rigid cycle {i} = gamma", h, gv))

    pair = _attempt(rep, "claim divisor", lambda: claim_divisor(f, rigid, n, tol, rep.post))
    if pair is not None and rep.gamma is not None:
        rep.divisors["claim"] = pair.to_json()
        ga = rep.gamma.gamma_A
        he = _attempt(rep, "claim Hom/Ext", lambda: hom_ext(f, pair.delta0, pair.delta1, tol))
        if he is not None:
            rep.dims["hom_delta"] = he.hom
            rep.dims["ext1_delta"] = he.ext1
            rep.identities.append(Identity("Hom(Omega, O_Delta) = 2D-2+gamma_A", he.hom, 2 * d - 2 + ga))
            rep.identities.append(Identity("Ext1(Omega, O_Delta) = 2D-2+gamma_A-delta_f", he.ext1, 2 * d - 2 + ga - delta_f))
        nab = _attempt(rep, "nabla", lambda: nabla_and_ext2(f, pair, tol))
        if nab is not None:
            rep.dims["ext2_ideal"] = nab.ext2_dim
            rep.lattes["nabla_margin"] = nab.margin
        ie = _attempt(rep, "ideal sheaf assembly", lambda: ideal_sheaf_ext(f, pair, tol))
        if ie is not None:
            rep.dims["ext1_ideal"] = ie.ext1
            rep.identities.append(Identity("ext1 - ext2 of O(-Delta) = 2D-2+delta", ie.ext1 - ie.ext2, ie.rr_value))
            if nab is not None:
                rep.identities.append(Identity("assembled ext2 = dim ker nabla_f", ie.ext2, nab.ext2_dim))
            if he is not None:
                rep.identities.append(
                    Identity(
                        "long exact sequence Euler count",
                        he.hom - he.ext1,
                        ie.ext1 - ie.ext2 - rep.dims.get("global_coker", 2 * d - 2),
                    )
                )
        rep.identities.append(Identity("Fatou-Shishikura gamma_A <= delta_f", ga, delta_f, "<="))

    sig = _attempt(rep, "orbifold signature", lambda: orbifold_signature(f, tol))
    rep.lattes["signature"] = [str(v) for v in sig] if sig is not None else None
    rep.lattes["is_2222"] = sig == (2, 2, 2, 2)
    return rep


def load_schema():
    """The JSON schema that ``report_json`` output conforms to."""
    from importlib.resources import files

    return json.loads(files(__package__).joinpath("schema/dynsheaf-1.json").read_text())


def report_json(rep):
    return json.dumps(rep.to_json(), sort_keys=True, indent=2)


# built-in suites

BUILTIN_MAPS = {
    "z^2": "z^2",
    "z^2 - 1": "z^2 - 1",
    "z^2 + 1": "z^2 + 1",
    "z^2 + 0.1": "z^2 + 0.1",
    "z^3 + 1": "z^3 + 1",
}

LATTES = "(z^2+1)^2/(4*z*(z^2-1))"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _core_suite(tol):
    from .parser import parse_map

    out = []
    for text in BUILTIN_MAPS.values():
        rep = analyze(parse_map(text, tol), AnalysisConfig(tol=tol), text)
        failed = [i.name for i in rep.identities if not i.passed]
        out.append(CheckResult(f"analyze {text}", not failed and bool(rep.identities), ", ".join(failed)))
    return out


def _lattes_suite(tol):
    from .divisors import Divisor, EDivisorPair
    from .numerics.geometry import ProjPoint
    from .parser import parse_map

    f = parse_map(LATTES, tol)
    crit = critical_data(f, tol)
    post = postcritical(f, tol=tol)
    p4 = Divisor([(x, 1) for x in post.sets[-1]], tol)
    pair = EDivisorPair(crit.ramification + p4, crit.ramification + p4)
    nab = nabla_and_ext2(f, pair, tol)
    ie = ideal_sheaf_ext(f, pair, tol)
    expected = Divisor([(ProjPoint.from_complex(z), 1) for z in (0, 1, -1, complex("inf"))], tol)
    return [
        CheckResult("postcritical set is {0, 1, -1, inf}", p4 == expected, repr(p4)),
        CheckResult("orbifold signature (2,2,2,2)", is_lattes_2222(f, tol)),
        CheckResult("ext2 = 1 on the four simple poles", nab.ext2_dim == 1, f"ext2 = {nab.ext2_dim}"),
        CheckResult("ext1 - ext2 = 2D-2+delta", ie.rr_holds, f"{ie.ext1} - {ie.ext2} vs {ie.rr_value}"),
    ]


SUITES = {"core": _core_suite, "lattes": _lattes_suite}


def verify(suite_name, tol=DEFAULT):
    """Run a named suite; raises ``KeyError`` for an unknown name."""
    if suite_name not in SUITES:
        raise KeyError(f"unknown suite {suite_name!r}; choose from {sorted(SUITES)}")
    return SUITES[suite_name](tol)
