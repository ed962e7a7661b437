"""Asymptotic parameter system over exact rational powers of X.

Every named scale is X^e for an exact rational e, where X = (rho_a3)^m and
rho_a3 is the diluteness parameter (density times scattering length cubed,
always < 1). "f << g" means f/g <= (rho_a3)^eps for some eps > 0; in exponent
arithmetic this is margin := exp_X(f) - exp_X(g) > 0, since X < 1. Constant
prefactors are carried as notes and excluded from margins.

Canonical ASCII names (used by the relation DSL):

    s, d, eT, eN, eR   small parameters (eT = soft kinetic weight,
                       eN = uniform-ellipticity weight, eR = density-window
                       weight; eR has no X-power form and is only checked
                       numerically)
    Kl, KB, KN, KR, KH1, KH2, KM
                       large parameters (box scale, a-priori constant,
                       ellipticity constant, interaction-integral constant,
                       outer/inner high-momentum cuts, excitation cap)
    rho_a3             the diluteness parameter itself, exponent 1/m
    calR               (8 pi a)^-1 int v, input-dependent

DSL grammar, one relation per line, '#' comments::

    relation := product ('<<' | '>>' | '<=C') product
    product  := factor ('*' factor)*
    factor   := NAME ['^' RATIONAL] | '(' 'rho_a3' ')' '^' RATIONAL | '1'
    RATIONAL := '-'? digits ['/' digits]

Example: ``KM * KR^1/2 * KN^1/8 * KH1^3/4 * KB^3/4 << Kl^5/2 * (rho_a3)^-1/16``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

__all__ = [
    "PowerQuantity",
    "Relation",
    "RelationResult",
    "SystemReport",
    "ParamSystem",
    "DSLSyntaxError",
    "standard_system",
    "check",
    "evaluate",
    "parse_relations",
]

RHO = "rho_a3"


@dataclass(frozen=True)
class PowerQuantity:
    name: str
    exponent: Fraction | None  # X-power; None means no X-power form
    note: str = ""


@dataclass(frozen=True)
class Relation:
    lhs: tuple  # of (name, Fraction power)
    rhs: tuple
    kind: str  # "<<", ">>", "<=C"
    group: str = ""
    text: str = ""

    def names(self):
        return {n for n, _ in self.lhs} | {n for n, _ in self.rhs}


@dataclass
class RelationResult:
    relation: Relation
    lhs_exp: Fraction | None
    rhs_exp: Fraction | None
    margin: Fraction | None
    passed: bool | None  # None = conditional (needs numeric inputs)


@dataclass
class SystemReport:
    results: list
    passed: bool
    min_margin: Fraction | None
    failing: list = field(default_factory=list)
    conditional: list = field(default_factory=list)


@dataclass
class ParamSystem:
    kappa: Fraction
    m: Fraction
    M: int
    quantities: dict
    relations: list
    cC: float = 1.0


def _t(name, power=1) -> tuple:
    return (name, Fraction(power))


def standard_system(kappa, cC: float = 1.0) -> ParamSystem:
    """The full quantity table and relation list of the asymptotic regime.

    kappa controls the allowed support growth R/a <= C (rho_a3)^(kappa-1/2);
    admissible range is 0 < kappa <= 1/4, the upper end meaning the limiting
    choice (m and M are locally constant there). X = (rho_a3)^m with
    m = min(1/928, kappa/11); M is the smallest multiple of 4 exceeding
    max(79, (11/12)/kappa).
    """
    kappa = Fraction(kappa)
    if not (0 < kappa <= Fraction(1, 4)):
        raise ValueError("kappa must lie in (0, 1/4]")
    m = min(Fraction(1, 928), kappa / 11)
    floor = max(Fraction(79), Fraction(11, 12) / kappa)
    M = 4
    while Fraction(M) <= floor:
        M += 4

    q = {
        "s": Fraction(1), "d": Fraction(6), "eT": Fraction(23, 4),
        "Kl": Fraction(-3, 2), "KB": Fraction(-6), "KN": Fraction(-1),
        "KR": Fraction(-1), "KH2": Fraction(-13), "KH1": Fraction(-14),
        "KM": Fraction(-46),
    }
    quantities = {name: PowerQuantity(name, e) for name, e in q.items()}
    quantities["KR"] = PowerQuantity("KR", q["KR"], note=f"prefactor {cC:g}")
    quantities[RHO] = PowerQuantity(RHO, Fraction(1) / m, note="X = rho_a3^m")
    quantities["eN"] = PowerQuantity("eN", q["KN"] * -1 + Fraction(1, 2) / m,
                                     note="KN^-1 sqrt(rho_a3)")
    quantities["eR"] = PowerQuantity("eR", None,
                                     note="sqrt(rho_mu a R^2 Kl^-2 KB^-3), needs R")
    quantities["calR"] = PowerQuantity("calR", None,
                                       note="(8 pi a)^-1 int v, input-dependent")
    quantities["M"] = PowerQuantity("M", Fraction(0), note=f"regularity, = {M}")

    R = []

    def rel(lhs, rhs, kind, group):
        R.append(Relation(tuple(lhs), tuple(rhs), kind, group))

    # interdependence of the small/large parameters
    rel([_t("d", 2), _t("Kl", 2)], [_t("eT"), _t("Kl", -2)], "<<", "eTdK")
    rel([_t("eT"), _t("Kl", -2)], [_t("eT")], "<<", "eTdK")
    rel([_t("eT")], [_t("s"), _t("d"), _t("Kl")], "<<", "eTdK")
    rel([_t("s"), _t("Kl")], [], ">>", "sKell")
    rel([_t("s"), _t("d"), _t("Kl")], [_t("KB", -1)], ">>", "sdKellKB")
    rel([_t("d", -2)], [_t("KH2")], "<<", "disjoint")
    rel([_t("KH2")], [_t("KH1")], "<<", "disjoint")
    rel([_t("Kl", 4), _t("KH2", 3)], [_t("KM")], "<<", "KH3n")
    # magnitudes in the diluteness parameter
    rel([_t("KB", 3), _t("Kl", 2)], [(RHO, Fraction(-1, 4))], "<<", "KBKell")
    rel([_t("KM"), _t("KB", 3), _t("Kl", 2)], [(RHO, Fraction(-1, 2))], "<<", "KBellKM")
    rel([("KN", Fraction(1, 2)), _t("Kl"), _t("KB", 3), _t("KH1", 3)],
        [(RHO, Fraction(-1, 4))], "<<", "Constants")
    rel([_t("KM"), ("KR", Fraction(1, 2)), ("KN", Fraction(1, 8)),
         ("KH1", Fraction(3, 4)), ("KB", Fraction(3, 4))],
        [("Kl", Fraction(5, 2)), (RHO, Fraction(-1, 16))], "<<", "newML")
    rel([_t("Kl"), _t("d")], [(RHO, Fraction(1, 6))], ">>", "Newlambda")
    # support radius (conditional: needs R/a)
    rel([("R_over_a", Fraction(1))],
        [_t("d"), _t("Kl"), (RHO, Fraction(-1, 2))], "<<", "RNew")
    # density window weight (first two conditional through eR)
    rel([("rho_mu_a_R2", Fraction(1))], [("eR", Fraction(1))], "<<", "ER")
    rel([("eR", Fraction(1))], [_t("Kl", -2), _t("KB", -3)], "<<", "ER")
    rel([_t("Kl", -2), _t("KB", -3)], [], "<<", "ER")
    # regularity M
    rel([_t("d", -5), ("s", Fraction(M - 2))], [], "<<", "d5s")
    rel([("d", Fraction(2 * M))], [_t("KM", -1)], "<<", "KHsML")
    rel([("KH2", Fraction(-M, 2))], [_t("KM", -1)], "<<", "KHsML")
    rel([("d", Fraction(-4 * M)), ("KH2", Fraction(-2 * M))], [_t("KM", -1)],
        "<<", "KHsML")
    rel([("KH2", Fraction(M)), ("KH1", Fraction(-M))], [_t("KM", -1)], "<<", "KHsML")
    rel([("d", Fraction(2 * M))], [(RHO, Fraction(1, 2))], "<<", "dMsmall")
    rel([("KH2", Fraction(4 - M)), ("Kl", Fraction(3, 2))],
        [(RHO, Fraction(3, 4))], "<<", "boghamerror")
    # interaction integral (conditional: needs the potential)
    rel([("calR", Fraction(1))], [_t("KR"), (RHO, Fraction(-1, 2))], "<=C", "intv")

    return ParamSystem(kappa=kappa, m=m, M=M, quantities=quantities,
                       relations=R, cC=cC)


def _exponent(terms, quantities, m: Fraction) -> Fraction | None:
    total = Fraction(0)
    for name, power in terms:
        if name == RHO:
            total += power / m
            continue
        q = quantities.get(name)
        if q is None or q.exponent is None:
            return None
        total += power * q.exponent
    return total


def check(system: ParamSystem, m: Fraction | None = None) -> SystemReport:
    """Exact-rational margins for every relation; pass iff all margins > 0.

    Relations involving quantities without an X-power form (eR, calR, R/a)
    are reported as conditional and excluded from the pass decision; they are
    verified numerically by `evaluate` when concrete inputs are supplied.
    """
    m = system.m if m is None else Fraction(m)
    if m <= 0:
        raise ValueError("m must be positive")
    unresolved = set()
    for r in system.relations:
        for name in r.names():
            if name not in system.quantities and name != RHO and not name.startswith(
                    ("R_over_a", "rho_mu_a_R2")):
                unresolved.add(name)
    if unresolved:
        raise KeyError(f"unresolved quantity names: {sorted(unresolved)}")

    results = []
    failing = []
    conditional = []
    min_margin = None
    for r in system.relations:
        le = _exponent(r.lhs, system.quantities, m)
        re_ = _exponent(r.rhs, system.quantities, m)
        if le is None or re_ is None:
            res = RelationResult(r, le, re_, None, None)
            conditional.append(res)
            results.append(res)
            continue
        if r.kind == "<<":
            margin = le - re_
            ok = margin > 0
        elif r.kind == ">>":
            margin = re_ - le
            ok = margin > 0
        else:  # <=C, constants absorbed
            margin = le - re_
            ok = margin >= 0
        res = RelationResult(r, le, re_, margin, ok)
        results.append(res)
        if not ok:
            failing.append(res)
        if min_margin is None or margin < min_margin:
            min_margin = margin
    return SystemReport(results=results, passed=not failing,
                        min_margin=min_margin, failing=failing,
                        conditional=conditional)


@dataclass
class ValueTable:
    values: dict
    conditional_checks: list  # (description, ratio, ok)


def evaluate(system: ParamSystem, rho_a3: float, a: float = 1.0,
             R: float | None = None) -> ValueTable:
    """Concrete values of all scales at a given diluteness.

    Derived quantities: ell = Kl (rho_mu a)^(-1/2), eps_N = KN^-1 sqrt(rho_a3),
    ML = KM^-1 rho_mu ell^3, rho_mu ell^3 = Kl^3 (rho_a3)^(-1/2), and with R
    supplied, eps_R = sqrt(rho_mu a R^2 Kl^-2 KB^-3) plus the R-dependent
    window checks.
    """
    if not (0 < rho_a3 < 1):
        raise ValueError("rho_a3 must lie in (0, 1)")
    X = rho_a3 ** float(system.m)
    vals = {"X": X, RHO: rho_a3, "M": system.M, "kappa": float(system.kappa)}
    for name, q in system.quantities.items():
        if q.exponent is not None and name not in (RHO, "M"):
            vals[name] = X ** float(q.exponent)
    vals["KR"] *= system.cC
    rho_mu = rho_a3 / a**3
    ell = vals["Kl"] * (rho_mu * a) ** -0.5
    vals["ell"] = ell
    vals["eps_N"] = rho_a3**0.5 / vals["KN"]
    vals["rho_ell3"] = vals["Kl"] ** 3 * rho_a3 ** -0.5
    vals["ML"] = vals["rho_ell3"] / vals["KM"]
    checks = []
    if R is not None:
        eps_R = (rho_mu * a * R**2 / (vals["Kl"] ** 2 * vals["KB"] ** 3)) ** 0.5
        vals["eps_R"] = eps_R
        box = vals["Kl"] ** -2 * vals["KB"] ** -3
        checks.append(("rho_mu a R^2 << eps_R", rho_mu * a * R**2 / eps_R,
                       rho_mu * a * R**2 < eps_R))
        checks.append(("eps_R << Kl^-2 KB^-3", eps_R / box, eps_R < box))
        rhs = vals["d"] * vals["Kl"] * rho_a3 ** -0.5
        checks.append(("R/a << d Kl rho_a3^-1/2", (R / a) / rhs, R / a < rhs))
    return ValueTable(values=vals, conditional_checks=checks)


# -- relation DSL -------------------------------------------------------------


class DSLSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op><<|>>|<=C)
  | (?P<pow>\^)
  | (?P<star>\*)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<rat>-?\d+(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)


def _tokenize(text: str, lineno: int):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    out.append(("end", "", len(text) + 1))
    return out


def _parse_product(tokens, i, lineno):
    terms = []
    while True:
        kind, value, col = tokens[i]
        if kind == "rat" and value == "1" and not terms:
            i += 1  # bare '1' = empty product
        elif kind == "lpar":
            if tokens[i + 1][:2] != ("name", RHO) or tokens[i + 2][0] != "rpar":
                raise DSLSyntaxError(f"expected ({RHO})", lineno, col)
            i += 3
            if tokens[i][0] != "pow":
                raise DSLSyntaxError("expected '^' after (rho_a3)", lineno, tokens[i][2])
            if tokens[i + 1][0] != "rat":
                raise DSLSyntaxError("expected a rational exponent", lineno, tokens[i + 1][2])
            terms.append((RHO, Fraction(tokens[i + 1][1])))
            i += 2
        elif kind == "name":
            power = Fraction(1)
            i += 1
            if tokens[i][0] == "pow":
                if tokens[i + 1][0] != "rat":
                    raise DSLSyntaxError("expected a rational exponent", lineno,
                                         tokens[i + 1][2] if tokens[i + 1][2] else col)
                power = Fraction(tokens[i + 1][1])
                i += 2
            terms.append((value, power))
        else:
            raise DSLSyntaxError(f"expected a quantity, got {value!r}", lineno, col)
        if tokens[i][0] == "star":
            i += 1
            continue
        return tuple(terms), i


def parse_relations(text: str) -> list:
    """Parse DSL text into relations; malformed input raises DSLSyntaxError."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = _tokenize(line, lineno)
        lhs, i = _parse_product(tokens, 0, lineno)
        kind, value, col = tokens[i]
        if kind != "op":
            raise DSLSyntaxError("expected '<<', '>>' or '<=C'", lineno, col)
        rhs, i = _parse_product(tokens, i + 1, lineno)
        if tokens[i][0] != "end":
            raise DSLSyntaxError(f"trailing input {tokens[i][1]!r}", lineno, tokens[i][2])
        out.append(Relation(lhs, rhs, value, group="user", text=line))
    return out
