"""Command-line frontend: lattice files, the corpus verifier, series and tables.

Exit codes: 0 pass, 1 mathematical failure, 2 infrastructure error, 3 bad input.
"""

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from sympy import divisors

from . import exact
from .enumeration import (DEFAULT_CAP, EnumerationOverflow, coset_minimum, coset_theta, minimum, root_count,
                          root_system, theta_series)
from .genus import GenusTooLarge, Limits, classify_long_shadow
from .isometry import Undecided, automorphism_group, isometric
from .lattice import (LEVELS, Lattice, LatticeError, c_n, is_rationally_equivalent, is_strongly_modular,
                      mod_params, power, shadow)
from .qseries import (DEFAULT_PREC, GRID, DecompositionError, PrecisionError, ShadowLevelError, decompose_theta,
                      format_series, g1, g2, level_from_leading, root_count_formula, s1, s2, shadow_prediction)
from .qseries import M as shadow_ladder

EXIT_OK, EXIT_FAIL, EXIT_INFRA, EXIT_INPUT = 0, 1, 2, 3
INFRA_ERRORS = (EnumerationOverflow, Undecided, PrecisionError, GenusTooLarge, MemoryError)


class BadInput(ValueError):
    pass


# --- lattice files ----------------------------------------------------------

@dataclass
class LatticeFile:
    name: str
    N: int
    gram: list
    title: str = ""
    k: int = None
    expected: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @property
    def lattice(self):
        return Lattice.from_gram(self.gram)


def _no_floats(s):
    raise BadInput(f"non-integer number {s!r} in lattice file")


def parse_lattice_file(text, origin="<input>"):
    try:
        d = json.loads(text, parse_float=_no_floats, parse_constant=_no_floats)
    except json.JSONDecodeError as exc:
        raise BadInput(f"{origin}: {exc}") from None
    if not isinstance(d, dict):
        raise BadInput(f"{origin}: expected a JSON object")
    for key in ("name", "N", "gram"):
        if key not in d:
            raise BadInput(f"{origin}: missing field {key!r}")
    gram = d["gram"]
    if not (isinstance(gram, list) and all(isinstance(r, list) for r in gram)
            and all(type(x) is int for r in gram for x in r)):
        raise BadInput(f"{origin}: gram must be a list of integer rows")
    if type(d["N"]) is not int or d["N"] not in LEVELS:
        raise BadInput(f"{origin}: N must be one of {sorted(LEVELS)}")
    expected = d.get("expected", {}) or {}
    provenance = d.get("provenance", {}) or {}
    for key, val in expected.items():
        if key == "known_flags" and not val:
            continue
        if key not in provenance:
            raise BadInput(f"{origin}: expected value {key!r} has no provenance")
    lf = LatticeFile(d["name"], d["N"], gram, d.get("title", ""), d.get("k"), expected, provenance)
    try:
        lf.lattice
    except LatticeError as exc:
        raise BadInput(f"{origin}: {exc}") from None
    return lf


def corpus_names():
    root = resources.files("shadowlat") / "corpus"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_lattice_file(ref):
    """Load a lattice from a path or from a corpus name such as ``L_2_7``."""
    path = Path(ref)
    if path.exists():
        return parse_lattice_file(path.read_text(), str(path))
    res = resources.files("shadowlat") / "corpus" / f"{ref}.json"
    if res.is_file():
        return parse_lattice_file(res.read_text(), ref)
    raise BadInput(f"no such lattice file or corpus entry: {ref}")


def load_corpus():
    return [load_lattice_file(n) for n in corpus_names()]


# --- verification -----------------------------------------------------------

@dataclass
class Check:
    name: str
    computed: object
    expected: object
    verdict: str  # pass | fail | known-flag | error
    claim: str
    seconds: float = 0.0


@dataclass
class VerifyReport:
    name: str
    N: int
    dim: int
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def status(self):
        verdicts = {c.verdict for c in self.checks}
        if "error" in verdicts:
            return "error"
        if "fail" in verdicts:
            return "fail"
        if "known-flag" in verdicts:
            return "known-flag"
        return "pass"

    @property
    def exit_code(self):
        return {"pass": EXIT_OK, "known-flag": EXIT_OK, "fail": EXIT_FAIL, "error": EXIT_INFRA}[self.status]

    def to_dict(self):
        d = asdict(self)
        d["status"] = self.status
        for c in d["checks"]:
            c["seconds"] = round(c["seconds"], 3)
        return d


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


class _Verifier:
    def __init__(self, lf, prec, cap, skip_aut):
        self.lf = lf
        self.L = lf.lattice
        self.N = lf.N
        self.prec = prec
        self.cap = cap
        self.skip_aut = skip_aut
        self.flags = set(lf.expected.get("known_flags", []))
        self.report = VerifyReport(lf.name, lf.N, self.L.dim)

    def record(self, name, claim, fn, expected=None):
        t = time.perf_counter()
        try:
            computed, ok = fn()
            verdict = "pass" if ok else ("known-flag" if name in self.flags else "fail")
        except INFRA_ERRORS as exc:
            computed, verdict = f"{type(exc).__name__}: {exc}", "error"
        except (ShadowLevelError, DecompositionError, LatticeError) as exc:
            computed = f"{type(exc).__name__}: {exc}"
            verdict = "known-flag" if name in self.flags else "fail"
        self.report.checks.append(Check(name, _jsonable(computed), _jsonable(expected), verdict, claim,
                                        time.perf_counter() - t))
        return verdict

    def run(self):
        L, N, exp = self.L, self.N, self.lf.expected
        p = mod_params(N)
        n = L.dim
        if n % p.sigma0:
            raise BadInput(f"dimension {n} is not a multiple of σ0({N}) = {p.sigma0}")
        k = n // p.sigma0
        self.k = k

        self.record("integral", "Gram matrix is integral, symmetric and positive definite",
                    lambda: (True, exact.is_positive_definite(L.as_list())), True)
        det_target = N ** (n // 2)  # n is even unless N = 1
        self.record("det", "det(L) = N^(n/2)", lambda: (L.det, L.det == det_target), det_target)

        def rational():
            ok = is_rationally_equivalent(L, power(c_n(N), k))
            return ok, ok
        self.record("rational_class", "L is rationally equivalent to C_N^k", rational, True)

        def strong():
            rep = is_strongly_modular(L, N)
            return rep.verdicts, rep.ok
        self.record("strongly_modular", "L is isometric to every rescaled partial dual √m·L^{*,m}, m | N", strong,
                    {m: True for m in divisors(N)})

        self.record("min", "minimum of L", lambda: (minimum(L, cap=self.cap),
                                                     "min" not in exp or minimum(L, cap=self.cap) == exp["min"]),
                    exp.get("min"))

        target = shadow_ladder(N, 1, k)

        def min0():
            m0 = coset_minimum(shadow(L), start=max(shadow_ladder(N, 0, k), Fraction(1, 4)), cap=self.cap)
            self.min0 = m0
            want = Fraction(exp["min0_shadow"]) if "min0_shadow" in exp else target
            return m0, m0 == want
        self.record("min0_shadow", "least norm in the shadow equals M(N,1,k)", min0,
                    exp.get("min0_shadow", target))

        def level():
            m0 = getattr(self, "min0", None)
            if m0 is None:
                raise ShadowLevelError("shadow minimum unavailable")
            m = level_from_leading(N, k, m0 * N)
            if m.denominator != 1 or m < 0:
                raise ShadowLevelError(f"min0 = {m0} gives m = {m}, not a nonnegative integer")
            return int(m), m == 1
        self.record("shadow_level", "the shadow minimum sits at ladder position m = 1", level, 1)

        def decomp():
            dr = decompose_theta(L, N, k, prec=self.prec)
            self.dr = dr
            ok = "c_vector" not in exp or [Fraction(x) for x in exp["c_vector"]] == dr.c
            return {"c": dr.c, "m_structural": dr.m_structural, "m_shadow": dr.m_shadow}, ok and dr.m_shadow == 1
        self.record("decomposition", "Θ_L = g1^k Σ c_i g2^i with a shadow prediction at m = 1", decomp,
                    {"c": exp.get("c_vector"), "m_shadow": 1})

        def round_trip():
            dr = getattr(self, "dr", None)
            if dr is None:
                raise DecompositionError("no decomposition")
            pred = shadow_prediction(dr, N, k, self.prec)
            actual = coset_theta(shadow(L), self.prec, scale=N, cap=self.cap)
            bad = [Fraction(g, GRID) for g in set(pred.coeffs) | set(actual.coeffs) if pred[g] != actual[g]]
            return {"through": str(Fraction(self.prec - 1, GRID)), "mismatches": [str(x) for x in sorted(bad)]}, not bad
        self.record("round_trip", "enumerated rescaled shadow theta equals s1^k Σ c_i s2^i", round_trip,
                    {"through": str(Fraction(self.prec - 1, GRID)), "mismatches": []})

        formula = root_count_formula(N, k)
        self.record("root_count", "number of norm-2 vectors is 2k(s + ev − (k+1))",
                    lambda: (root_count(L), root_count(L) == exp.get("root_count", formula)),
                    exp.get("root_count", formula))
        if "root_system" in exp:
            self.record("root_system", "ADE type of the root sublattice",
                        lambda: (str(root_system(L)), str(root_system(L)) == exp["root_system"]), exp["root_system"])
        if not self.skip_aut:
            def aut():
                g = automorphism_group(L)
                return g.order, "aut_order" not in exp or g.order == exp["aut_order"]
            self.record("aut_order", "order of the automorphism group", aut, exp.get("aut_order"))
        if "candidate_gram" in exp:
            self._candidate(exp["candidate_gram"], k)
        return self.report

    def _candidate(self, gram, k):
        C = Lattice.from_gram(gram)
        N = self.N
        facts = {
            "det": C.det,
            "rational_class": is_rationally_equivalent(C, power(c_n(N), k)),
            "strongly_modular": is_strongly_modular(C, N).ok,
            "min": minimum(C),
            "min0_shadow": coset_minimum(shadow(C), start=Fraction(1, 4)),
        }
        self.report.notes.append({"candidate_gram": gram, "candidate_checks": _jsonable(facts),
                                  "note": "reported only; the listed Gram is verified as given"})


def cmd_verify(lf, prec=DEFAULT_PREC, cap=DEFAULT_CAP, skip_aut=False):
    return _Verifier(lf, prec, cap, skip_aut).run()


def cmd_verify_corpus(prec=DEFAULT_PREC, cap=DEFAULT_CAP, skip_aut=False, progress=None):
    reports = []
    for lf in load_corpus():
        reports.append(cmd_verify(lf, prec, cap, skip_aut))
        if progress:
            progress(reports[-1])
    return reports


def format_report(rep):
    lines = [f"{rep.name} (N={rep.N}, dim {rep.dim}): {rep.status.upper()}"]
    for c in rep.checks:
        shown = c.computed if not isinstance(c.computed, (dict, list)) else json.dumps(c.computed, ensure_ascii=False)
        lines.append(f"  [{c.verdict:>10}] {c.name:<16} {shown}   ({c.claim})")
    for note in rep.notes:
        lines.append(f"  note: {json.dumps(note, ensure_ascii=False)}")
    return "\n".join(lines)


# --- other commands ---------------------------------------------------------

SERIES = {"g1": g1, "g2": g2, "s1": s1, "s2": s2}


def cmd_series(N, which, prec):
    return SERIES[which](N, prec)


def cmd_table():
    rows = []
    for N in sorted(LEVELS):
        p = mod_params(N)
        rows.append(f"N={N}: σ1={p.sigma1}, k_max={p.kmax}, n_max={p.nmax}")
    return "\n".join(rows) + "\n"


def cmd_classify(N, k, p=None, limits=None):
    res = classify_long_shadow(N, k, limits=limits, p=p)
    corpus = []
    if res.lattices:
        dim = res.lattices[0].dim
        for lf in load_corpus():
            if lf.N != N or lf.lattice.dim != dim:
                continue
            corpus.append((lf.name, lf.lattice))
            # a flagged Gram may come with a corrected candidate; match against that too
            if "candidate_gram" in lf.expected:
                corpus.append((lf.name + " (candidate)", Lattice.from_gram(lf.expected["candidate_gram"])))
    matches = []
    for L in res.lattices:
        matches.append([name for name, M in corpus if isometric(L, M)])
    return res, matches


def _emit(args, text, data):
    if args.json:
        print(json.dumps(_jsonable(data), ensure_ascii=False, indent=2, sort_keys=True))
    else:
        print(text)


def _series_dict(f):
    return {"prec": str(Fraction(f.prec, GRID)), "terms": {str(Fraction(g, GRID)): str(c) for g, c in f.terms()}}


def main(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--prec", type=int, default=None, help="precision on the q^(1/24) grid")
    common.add_argument("--max-vectors", type=int, default=DEFAULT_CAP, help="enumeration cap")
    ap = argparse.ArgumentParser(prog="shadowlat", description="Strongly modular lattices, shadows and theta series.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    sp = add("verify", help="run every check on one lattice file or corpus entry")
    sp.add_argument("file")
    sp.add_argument("--skip-aut", action="store_true")
    sp = add("verify-corpus", help="verify all shipped lattices")
    sp.add_argument("--skip-aut", action="store_true")
    sp = add("series", help="print g1, g2, s1 or s2")
    sp.add_argument("N", type=int)
    sp.add_argument("which", choices=sorted(SERIES))
    for name, what in (("theta", "theta series"), ("shadow", "theta series of the shadow rescaled by √N"),
                       ("decompose", "coefficients c_i of Θ_L in the g1/g2 basis"),
                       ("aut", "automorphism group order"), ("roots", "root system")):
        sp = add(name, help=what)
        sp.add_argument("file")
    add("table", help="σ1, k_max and n_max for every level")
    add("corpus", help="list shipped lattices")
    sp = add("classify", help="classify the long-shadow lattices for (N, k) by genus search")
    sp.add_argument("N", type=int)
    sp.add_argument("k", type=int)
    sp.add_argument("--prime", type=int, default=None)
    sp.add_argument("--max-dim", type=int, default=Limits.max_dim)
    sp = add("isometric", help="isometry test with a certificate")
    sp.add_argument("file1")
    sp.add_argument("file2")

    args = ap.parse_args(argv)
    try:
        return _dispatch(args)
    except BadInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except INFRA_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except (ValueError, LatticeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _dispatch(args):
    cap = args.max_vectors
    if args.cmd == "verify":
        rep = cmd_verify(load_lattice_file(args.file), args.prec or DEFAULT_PREC, cap, args.skip_aut)
        _emit(args, format_report(rep), rep.to_dict())
        return rep.exit_code
    if args.cmd == "verify-corpus":
        reports = []

        def show(rep):
            if not args.json:
                print(format_report(rep), flush=True)
        reports = cmd_verify_corpus(args.prec or DEFAULT_PREC, cap, args.skip_aut, progress=show)
        worst = max(r.exit_code for r in reports)
        if args.json:
            print(json.dumps({"reports": [r.to_dict() for r in reports], "exit_code": worst},
                             ensure_ascii=False, indent=2, sort_keys=True))
        else:
            print(f"{sum(r.status == 'pass' for r in reports)}/{len(reports)} lattices pass")
        return worst
    if args.cmd == "series":
        mod_params(args.N)
        f = cmd_series(args.N, args.which, args.prec or 6 * GRID)
        _emit(args, format_series(f), _series_dict(f))
        return EXIT_OK
    if args.cmd == "table":
        text = cmd_table()
        data = [{"N": N, "sigma1": mod_params(N).sigma1, "k_max": mod_params(N).kmax, "n_max": mod_params(N).nmax}
                for N in sorted(LEVELS)]
        if args.json:
            _emit(args, text, data)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if args.cmd == "corpus":
        names = corpus_names()
        _emit(args, "\n".join(names), names)
        return EXIT_OK
    if args.cmd == "classify":
        res, matches = cmd_classify(args.N, args.k, args.prime, Limits(max_dim=args.max_dim))
        lines = [f"N={res.N}, k={res.k}: {len(res.lattices)} class(es) with min ≥ 2 and shadow minimum "
                 f"{res.target_min0}; genus classes examined: {res.genus_size}; complete: {res.complete}"]
        for L, hit in zip(res.lattices, matches):
            lines.append(f"  {L.as_list()}  matches: {', '.join(hit) or 'none'}")
        lines += [f"  note: {x}" for x in res.notes]
        data = {"N": res.N, "k": res.k, "target_min0": res.target_min0, "complete": res.complete,
                "genus_size": res.genus_size, "primes": [r.p for r in res.runs],
                "classes": [{"gram": L.as_list(), "matches": hit} for L, hit in zip(res.lattices, matches)],
                "notes": res.notes}
        _emit(args, "\n".join(lines), data)
        return EXIT_OK
    if args.cmd == "isometric":
        a, b = load_lattice_file(args.file1), load_lattice_file(args.file2)
        cert = isometric(a.lattice, b.lattice)
        text = "isometric" if cert else f"not isometric ({cert.witness})"
        if cert:
            text += "\nU = " + json.dumps(cert.U)
        _emit(args, text, {"isometric": cert.isometric, "U": cert.U, "witness": cert.witness})
        return EXIT_OK
    lf = load_lattice_file(args.file)
    L = lf.lattice
    if args.cmd == "theta":
        f = theta_series(L, args.prec or 8 * GRID + 1, cap=cap)
        _emit(args, format_series(f), _series_dict(f))
    elif args.cmd == "shadow":
        f = coset_theta(shadow(L), args.prec or 8 * GRID + 1, scale=lf.N, cap=cap)
        _emit(args, format_series(f), _series_dict(f))
    elif args.cmd == "decompose":
        dr = decompose_theta(L, lf.N, prec=args.prec or DEFAULT_PREC)
        text = f"c = [{', '.join(str(x) for x in dr.c)}], m_structural = {dr.m_structural}, m_shadow = {dr.m_shadow}"
        _emit(args, text, {"N": dr.N, "k": dr.k, "c": dr.c, "m_structural": dr.m_structural, "m_shadow": dr.m_shadow})
    elif args.cmd == "aut":
        g = automorphism_group(L)
        _emit(args, f"order {g.order} ({len(g.generators)} generators)",
              {"order": g.order, "generators": g.generators, "orbit_lengths": g.orbit_lengths})
    elif args.cmd == "roots":
        rs = root_system(L)
        _emit(args, f"{rs} ({rs.total_roots} roots)",
              {"root_system": str(rs), "root_count": rs.total_roots,
               "components": [list(c) for c in rs.components]})
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
