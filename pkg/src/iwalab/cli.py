"""Command line front end: ``iwalab <command> [options]``.

Exit status 0 when every asserted check passes, 1 when a conclusion fails
under satisfied hypotheses, 2 on input errors. Output is JSON (default) or CSV.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import group_algebra as ga
from . import iwasawa as iw
from . import modules as lm
from . import pairing as pl
from . import pgroups as pg
from .errors import InputError, IwalabError
from .groups import CycloCharacter, FiniteGroup
from .iwasawa import LambdaElem, LambdaQuot
from .padic import is_prime


class Result:
    def __init__(self, data, rows: Optional[List[Dict[str, object]]] = None, failures: Optional[List[dict]] = None):
        self.data = data
        self.rows = rows
        self.failures = failures or []


# ------------------------------------------------------------------ argument helpers

def _ints(text) -> List[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    text = str(text).strip()
    if text.startswith("["):
        return [int(v) for v in json.loads(text)]
    return [int(v) for v in text.split(",") if v.strip()]


def _load_json(value):
    if isinstance(value, (dict, list)):
        return value
    text = str(value).strip()
    if text.startswith("{") or text.startswith("["):
        return json.loads(text)
    path = Path(text)
    if not path.exists():
        bundled = _bundled_fixture(path.name)
        if bundled is None:
            raise InputError(f"file not found: {text}")
        return bundled
    return json.loads(path.read_text())


def _bundled_fixture(name: str):
    stem = name[:-5] if name.endswith(".json") else name
    try:
        ref = resources.files("iwalab").joinpath("fixtures", stem + ".json")
        if ref.is_file():
            return json.loads(ref.read_text())
    except (FileNotFoundError, ModuleNotFoundError):
        return None
    return None


def _group(spec) -> FiniteGroup:
    if isinstance(spec, dict):
        if "table" in spec:
            return FiniteGroup(np.array(spec["table"]))
        spec = f"{spec['kind']}:{spec.get('arg', '')}"
    spec = str(spec)
    kind, _, arg = spec.partition(":")
    if kind == "cyclic":
        return FiniteGroup.cyclic(int(arg))
    if kind == "abelian":
        return FiniteGroup.abelian(_ints(arg))
    if kind == "symmetric":
        return FiniteGroup.symmetric(int(arg))
    if kind == "dihedral":
        return FiniteGroup.dihedral(int(arg))
    if kind == "semidirect":
        P, m, a = _ints(arg)
        gen = FiniteGroup.cyclic(m)
        return FiniteGroup.semidirect(P, gen, [pow(a, k, P) for k in range(m)])
    path = Path(spec)
    if path.exists():
        return FiniteGroup.from_file(path)
    raise InputError(f"unknown group '{spec}' (cyclic:m, abelian:a,b, symmetric:k, dihedral:m, semidirect:P,m,a or a file)")


def _module(value) -> lm.ElemLambdaModule:
    return lm.ElemLambdaModule.from_json(_load_json(value))


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise InputError(f"missing parameter --{n.replace('_', '-')}")


# ------------------------------------------------------------------ commands

def cmd_omega(a) -> Result:
    _need(a, "p", "kappa", "n")
    w = iw.omega(a.p, a.kappa, a.n)
    return Result({"p": a.p, "kappa": a.kappa, "n": a.n, "coefficients": list(w.coeffs)},
                  [{"degree": i, "coefficient": c} for i, c in enumerate(w.coeffs)])


def cmd_norm(a) -> Result:
    _need(a, "p", "kappa", "m", "n")
    v = iw.norm_elem(a.p, a.kappa, a.m, a.n)
    return Result({"p": a.p, "kappa": a.kappa, "m": a.m, "n": a.n, "coefficients": list(v.coeffs)},
                  [{"degree": i, "coefficient": c} for i, c in enumerate(v.coeffs)])


def cmd_involution(a) -> Result:
    _need(a, "p", "kappa", "n", "N")
    f = _ints(a.f) if a.f is not None else [0, 1]
    x = LambdaQuot.from_elem(LambdaElem(a.p, a.kappa, f), a.n, a.N)
    y = iw.involution(x)
    back = iw.involution(y)
    ok = list(back.coeffs) == list(x.reduce(back.N).coeffs)
    fails = [] if ok else [{"check": "involutive", "x": list(x.coeffs), "x**": list(back.coeffs)}]
    return Result({"input": list(x.coeffs), "image": list(y.coeffs), "precision": y.N, "truncated": y.truncated,
                   "involutive": ok}, [{"degree": i, "coefficient": c} for i, c in enumerate(y.coeffs)], fails)


def cmd_duality(a) -> Result:
    _need(a, "p", "kappa", "n", "N")
    rep = iw.check_omega_duality(a.p, a.kappa, a.n, a.N)
    d = rep.to_json()
    fails = []
    if not rep.identity_holds:
        fails.append({"check": "omega duality", "level": a.n})
    if not rep.lifted_identity_holds:
        fails.append({"check": "omega duality (lifted)", "level": a.n + 2})
    return Result(d, [{"e": d["e"], "c": d["c"], "identity": d["identity_holds"],
                       "lifted": d["lifted_identity_holds"]}], fails)


def cmd_p_content(a) -> Result:
    _need(a, "p", "kappa", "n", "N", "f")
    v = iw.ideal_p_content(LambdaElem(a.p, a.kappa, _ints(a.f)), a.n, a.N)
    out = {"p_content": str(v), "capped": bool(getattr(v, "capped", False))}
    return Result(out, [out])


def cmd_solve_system(a) -> Result:
    _need(a, "system")
    s = _load_json(a.system)
    try:
        cons = [iw.Constraint(c["coeffs"], c.get("rhs", []), c.get("ideal", []), c.get("member", True))
                for c in s["constraints"]]
        sol = iw.solve_congruence_system(cons, s["names"], int(s["degree_bound"]), int(s["N"]), int(s["p"]),
                                         int(s.get("kappa", 0)), s.get("level"), seed=a.seed)
    except KeyError as exc:
        raise InputError(f"system description lacks {exc}") from exc
    d = sol.to_json()
    return Result(d, [{"unknown": k, "value": json.dumps(v)} for k, v in sol.assignment.items()])


def cmd_idempotents(a) -> Result:
    _need(a, "group", "p", "N")
    G = _group(a.group)
    idems = ga.central_idempotents(G, a.p, a.N, use_center=a.use_center)
    check = ga.verify_idempotent_system(idems)
    fails = [{"check": k} for k, v in check.items() if not v]
    rows = [{"index": i, "rank": ga.idem_rank(e), "coefficients": json.dumps([int(c) for c in e.coeffs])}
            for i, e in enumerate(idems)]
    return Result({"order": G.order, "p": a.p, "N": a.N, "idempotents": [e.to_json() for e in idems],
                   "ranks": [r["rank"] for r in rows], "checks": check}, rows, fails)


def cmd_reflect(a) -> Result:
    _need(a, "group", "p", "n", "alpha")
    G = _group(a.group)
    chi = CycloCharacter(G, a.p, a.n, tuple(_ints(a.chi))) if a.chi is not None else CycloCharacter.trivial(G, a.p, a.n)
    alpha = ga.GroupAlgebraElem(G, a.p, a.n + 1, _ints(a.alpha))
    r = ga.leopoldt_reflect(alpha, chi)
    rr = ga.leopoldt_reflect(r, chi)
    fails = [] if rr == alpha else [{"check": "reflection is an involution"}]
    return Result({"alpha": alpha.to_json(), "reflected": r.to_json(), "involutive": rr == alpha},
                  [{"element": g, "coefficient": int(c)} for g, c in enumerate(r.coeffs)], fails)


def cmd_annihilator(a) -> Result:
    _need(a, "config_data")
    c = a.config_data
    try:
        G = _group(c["group"])
        X = pg.FinAbPGroup.of(int(c["p"]), c["X"])
        rep = ga.annihilator_and_support(G, X, [np.array(m, dtype=object) for m in c["action"]], c["x"])
    except KeyError as exc:
        raise InputError(f"annihilator config lacks {exc}") from exc
    d = rep.to_json()
    return Result(d, [{"component": i, "annihilates": i in rep.annihilating} for i in range(len(rep.components))])


def cmd_classify(a) -> Result:
    _need(a, "p", "relations")
    rel = _load_json(a.relations)
    X = pg.snf_classify(np.array(rel, dtype=object), a.p)
    return Result(X.to_json(), [{"exponent": e, "order": a.p ** e} for e in X.exps])


def cmd_stats(a) -> Result:
    _need(a, "p", "exps")
    X = pg.FinAbPGroup.of(a.p, _ints(a.exps))
    s = pg.structure_stats(X)
    d = s.to_json()
    return Result(d, [{k: (json.dumps(v) if isinstance(v, list) else v) for k, v in d.items()}])


_HYP_NAMES = {"N_surjective": "N-surjective", "equal_p_ranks": "equal-p-ranks", "index_is_p_to_r": "index-p^r",
              "N_iota_is_p": "N∘ι=p", "iota_rank_preserving": "ι-rank-preserving"}


def cmd_lemma_ab(a) -> Result:
    if a.fixture is None and a.config_data is None:
        raise InputError("lemma-ab needs --fixture or --config")
    d = _load_json(a.fixture) if a.fixture is not None else a.config_data
    try:
        p = int(d["p"])
        A = pg.FinAbPGroup(p, tuple(d["A"]))
        B = pg.FinAbPGroup(p, tuple(d["B"]))
        N = pg.PGroupHom(B, A, np.array(d["N"], dtype=object))
        iota = pg.PGroupHom(A, B, np.array(d["iota"], dtype=object))
    except KeyError as exc:
        raise InputError(f"fixture lacks {exc}") from exc
    rep = pg.verify_lemma_ab(A, B, N, iota, seed=a.seed)
    lines = [f"hypothesis {_HYP_NAMES.get(k, k)}: {'PASS' if v else 'FAIL'}" for k, v in rep.hypotheses.items()]
    lines += [f"conclusion {k}: {'n/a' if v is None else ('PASS' if v else 'FAIL')}" for k, v in rep.conclusions.items()]
    out = rep.to_json()
    out["report"] = lines
    rows = [{"kind": "hypothesis", "name": _HYP_NAMES.get(k, k), "value": "PASS" if v else "FAIL"}
            for k, v in rep.hypotheses.items()]
    rows += [{"kind": "conclusion", "name": k, "value": "n/a" if v is None else ("PASS" if v else "FAIL")}
             for k, v in rep.conclusions.items()]
    fails = [{"check": "lemma ab", "witness": rep.data.get("witness")}] if rep.violated else []
    return Result(out, rows, fails)


def cmd_quotient(a) -> Result:
    _need(a, "module", "n")
    M = _module(a.module)
    lq = lm.level_quotient(M, a.n, a.N)
    d = lq.to_json()
    return Result(d, [{"n": a.n, "exponents": json.dumps(d["exponents"]), "v_p_order": d["v_p_order"],
                       "p_rank": d["p_rank"]}])


def _levels(a, M) -> Optional[List[int]]:
    if a.levels is None:
        return None
    lv = _ints(a.levels)
    if len(lv) == 1:
        return list(range(M.kappa, M.kappa + lv[0]))
    return lv


def cmd_growth(a) -> Result:
    _need(a, "module")
    M = _module(a.module)
    g = lm.growth_stats(M, _levels(a, M))
    fails = [] if g.matches else [{"check": "growth invariants", "fit": [g.mu, g.lam], "expected": list(g.expected)}]
    rows = [{"n": n, "v_p_order": v, "residual": r} for n, v, r in zip(g.levels, g.log_sizes, g.residuals)]
    return Result(g.to_json(), rows, fails)


def cmd_fukuda(a) -> Result:
    _need(a, "module")
    M = _module(a.module)
    lv = _ints(a.levels)[0] if a.levels is not None else 4
    r = lm.fukuda_check(M, lv, seed=a.seed)
    return Result(r.to_json(), r.rows(), [{"check": v} for v in r.violations])


def cmd_z(a) -> Result:
    _need(a, "module")
    M = _module(a.module)
    top = a.n if a.n is not None else M.kappa + 4
    tw = lm.Tower(M, top)
    if a.element is not None:
        comps = _load_json(a.element)
        x = lm.TowerElement.from_global(tw, comps)
    else:
        x = lm.TowerElement.generator(tw, a.generator or 0, a.scale)
    z = lm.z_invariant(x)
    return Result(z.to_json(), [{"n": n, "value": v} for n, v in z.values.items()] + [{"n": "z", "value": z.value}])


def cmd_dual(a) -> Result:
    _need(a, "module")
    M = _module(a.module)
    D = lm.iwasawa_dual(M)
    DD = lm.iwasawa_dual(D)
    ok = DD.to_json() == M.to_json()
    top = M.kappa + (3 if a.n is None else a.n - M.kappa)
    rows = [{"n": n, "v_p_order": lm.log_size(M, n)[0], "v_p_order_dual": lm.log_size(D, n)[0]}
            for n in range(M.kappa, top + 1)]
    fails = [] if ok else [{"check": "double dual", "got": DD.to_json()}]
    return Result({"module": M.to_json(), "dual": D.to_json(), "double_dual_matches": ok}, rows, fails)


def cmd_pairing(a) -> Result:
    _need(a, "table", "check")
    P = pl.PairingTable.from_json(_load_json(a.table))
    if a.check == "nondeg":
        v = pl.is_nondegenerate(P)
    elif a.check == "covar":
        v = pl.covariance_check(P)
    elif a.check == "reflect":
        if a.alpha is None:
            alpha = None
        elif P.group is not None:
            alpha = ga.GroupAlgebraElem(P.group, P.p, P.n + 1, _ints(a.alpha))
        else:
            alpha = _ints(a.alpha)
        v = pl.reflection_adjunction(P, alpha)
    elif a.check == "skew":
        v = pl.skew_check(P, a.conj)
    else:
        raise InputError(f"unknown check {a.check}")
    d = v.to_json()
    return Result(d, [{"check": a.check, "ok": v.ok, "witness": json.dumps(v.witness) if v.witness else ""}],
                  [] if v.ok else [{"check": a.check, "witness": v.witness}])


def cmd_suite(a) -> Result:
    from .suite import run_suite
    records = run_suite(seed=a.seed, quick=a.quick)
    fails = [r for r in records if r["asserted"] and not r["ok"]]
    return Result({"checks": records}, [{k: r[k] for k in ("name", "asserted", "ok", "detail")} for r in records], fails)


COMMANDS: Dict[str, Callable] = {
    "omega": cmd_omega, "norm": cmd_norm, "involution": cmd_involution, "duality-check": cmd_duality,
    "p-content": cmd_p_content, "solve-system": cmd_solve_system, "idempotents": cmd_idempotents,
    "reflect": cmd_reflect, "annihilator": cmd_annihilator, "classify": cmd_classify, "stats": cmd_stats,
    "lemma-ab": cmd_lemma_ab, "quotient": cmd_quotient, "growth": cmd_growth, "fukuda": cmd_fukuda, "z": cmd_z,
    "dual": cmd_dual, "pairing": cmd_pairing, "suite": cmd_suite,
}


# ------------------------------------------------------------------ parser

def _common(sp):
    sp.add_argument("--config", help="JSON file with parameters (flags override)")
    sp.add_argument("--format", choices=["json", "csv"], default=None)
    sp.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iwalab", description="Iwasawa-module laboratory: finite-level computations.")
    sub = ap.add_subparsers(dest="command")
    for name in COMMANDS:
        sp = sub.add_parser(name)
        _common(sp)
        for flag in ("p", "kappa", "n", "m", "N", "generator"):
            sp.add_argument(f"--{flag}", type=int, default=None)
        sp.add_argument("--scale", type=int, default=1)
        for flag in ("f", "alpha", "chi", "exps", "levels", "group", "module", "system", "relations", "fixture",
                     "table", "element"):
            sp.add_argument(f"--{flag}", default=None)
        sp.add_argument("--use-center", action="store_true", default=None)
        sp.add_argument("--check", choices=["nondeg", "covar", "reflect", "skew"], default=None)
        sp.add_argument("--conj", type=int, default=None)
        sp.add_argument("--quick", action="store_true", default=None)
    return ap


_CSV_COMMANDS = ("quotient", "growth", "fukuda", "z", "dual")
_DEFAULTS = {"format": "json", "seed": 0, "kappa": 0, "use_center": False, "conj": -1, "quick": False, "scale": 1}


def _emit(command: str, res: Result, fmt: str, out) -> None:
    if fmt == "csv":
        rows = res.rows if res.rows is not None else [{"result": json.dumps(res.data, sort_keys=True, default=str)}]
        buf = io.StringIO()
        if rows:
            fields: List[str] = []
            for r in rows:
                for k in r:
                    if k not in fields:
                        fields.append(k)
            w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow(r)
        for f in res.failures:
            buf.write("# FAIL " + json.dumps(f, sort_keys=True, default=str, ensure_ascii=False) + "\n")
        out.write(buf.getvalue())
    else:
        rec = {"command": command, "ok": not res.failures, "result": res.data, "failures": res.failures}
        out.write(json.dumps(rec, sort_keys=True, default=str, ensure_ascii=False, indent=1) + "\n")


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    # a config file may name the command
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    config = {}
    try:
        if known.config:
            path = Path(known.config)
            if not path.exists():
                raise InputError(f"config file not found: {known.config}")
            config = json.loads(path.read_text())
            if not isinstance(config, dict):
                raise InputError("config must be a JSON object")
    except (InputError, json.JSONDecodeError) as exc:
        print(f"iwalab: input error: {exc}", file=sys.stderr)
        return 2
    if not any(a in COMMANDS for a in argv) and "command" in config:
        argv = [str(config["command"])] + argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    for k, v in config.items():
        key = k.replace("-", "_")
        if key != "command" and getattr(args, key, None) is None:
            setattr(args, key, v)
    if args.format is None and args.command in _CSV_COMMANDS:
        args.format = "csv"
    for k, v in _DEFAULTS.items():
        if getattr(args, k, None) is None:
            setattr(args, k, v)
    for k in ("p", "kappa", "n", "m", "N", "generator", "seed", "conj"):
        if getattr(args, k, None) is not None:
            try:
                setattr(args, k, int(getattr(args, k)))
            except (TypeError, ValueError):
                print(f"iwalab: input error: --{k} must be an integer", file=sys.stderr)
                return 2
    if args.p is not None and not is_prime(args.p):
        print(f"iwalab: input error: p = {args.p} is not prime", file=sys.stderr)
        return 2
    args.config_data = config or None
    try:
        res = COMMANDS[args.command](args)
    except (InputError, ValueError, json.JSONDecodeError) as exc:
        print(f"iwalab: input error: {exc}", file=sys.stderr)
        return 2
    except IwalabError as exc:
        res = Result({"error": type(exc).__name__, "message": str(exc)}, None,
                     [{"check": "computation", "error": type(exc).__name__, "message": str(exc)}])
    _emit(args.command, res, args.format, out)
    return 1 if res.failures else 0


if __name__ == "__main__":
    sys.exit(main())
