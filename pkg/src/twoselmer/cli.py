"""Command-line workbench: classify curves, run descents and audits, search
for rank-divergence twists, and validate ingestion files.

Exit codes: 0 success, 2 actionable not-found / missing-ingested-rank,
1 internal error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .characters import NotFound, SearchError
from .curves import (
    CurveError,
    CurveQ,
    bad_primes,
    classify_two_torsion_field,
    parse_curve_file,
    same_two_torsion_field,
)
from .datastore import Datastore, DatastoreError
from .descent import (
    CLASSICAL,
    DescentError,
    MissingIngestedRank,
    kramer_parity_check,
    relaxed_at,
    selmer,
    strict_at,
    twisted_at,
    verify_ptd,
)
from .f2 import all_lagrangians, count_disjoint_lagrangians, standard_metabolic, F2Subspace
from .local import LocalCharacter, UnsupportedLocalCase
from .procedures import (
    ProcedureError,
    RefusedSameTorsionField,
    demo_case1,
    demo_case2,
    demo_case3,
    gap_amplifier,
    route_case,
)
from .reporting import Report


@dataclass
class WorkbenchConfig:
    prime_bound: int = 10**5
    twist_bound: int = 10**6
    sampling_seed: int = 0
    descent_candidate_cap: int = 1 << 18
    datastore_path: str = ""
    output_format: str = "table"  # 'table' | 'records'

    def stamp(self, report: Report) -> None:
        report.add("prime_bound", self.prime_bound)
        report.add("twist_bound", self.twist_bound)
        report.add("seed", self.sampling_seed)


def _load_curves(path: str) -> list[CurveQ]:
    with open(path) as fh:
        return parse_curve_file(fh.read())


def _pick(curves, label: str) -> CurveQ:
    for E in curves:
        if E.label == label:
            return E
    raise CurveError(f"no curve labeled {label!r} in the file "
                     f"(have: {', '.join(E.label or '?' for E in curves)})")


def _parse_variant(spec: str, cfg):
    if not spec or spec == "classical":
        return CLASSICAL
    parts = spec.split(":")
    mode = parts[0]
    if mode in ("relaxed", "strict"):
        if len(parts) != 2:
            raise SearchError(f"variant {spec!r}: expected {mode}:q")
        q = int(parts[1])
        return relaxed_at(q) if mode == "relaxed" else strict_at(q)
    if mode == "twisted":
        if len(parts) != 3:
            raise SearchError(f"variant {spec!r}: expected twisted:q:t")
        q, t = int(parts[1]), int(parts[2])
        return twisted_at(q, LocalCharacter(q, t))
    raise SearchError(f"unknown variant {spec!r}")


def cmd_classify(args, cfg) -> Report:
    curves = _load_curves(args.curves)
    rep = Report("classify")
    cfg.stamp(rep)
    rep.add("curve_count", len(curves))
    for E in curves:
        info = classify_two_torsion_field(E)
        rep.add(f"curve.{E.label}.degree", info.degree)
        rep.add(f"curve.{E.label}.factorization", info.factorization)
        rep.add(f"curve.{E.label}.disc_class", info.disc_square_class)
        rep.add(f"curve.{E.label}.bad_primes", list(bad_primes(E)))
    for i, E in enumerate(curves):
        for A in curves[i + 1:]:
            rep.add(f"same_field.{E.label}.{A.label}",
                    same_two_torsion_field(E, A))
    return rep


def cmd_selmer(args, cfg) -> Report:
    curves = _load_curves(args.curves)
    E = _pick(curves, args.label)
    variant = _parse_variant(args.variant, cfg)
    store = Datastore.load(cfg.datastore_path) if cfg.datastore_path else None
    basis = selmer(E, args.d, backend=args.backend, variant=variant,
                   datastore=store, candidate_cap=cfg.descent_candidate_cap)
    rep = Report("selmer")
    cfg.stamp(rep)
    rep.add("curve", E.label)
    rep.add("twist", args.d)
    rep.add("variant", variant.mode + (f":{variant.q}" if variant.q else ""))
    rep.add("rank", basis.rank)
    rep.add("representation", basis.representation)
    rep.add("provenance", basis.provenance)
    for i, r in enumerate(basis.element_reps):
        rep.add(f"generator.{i}", r)
    return rep


def cmd_verify_ptd(args, cfg) -> Report:
    curves = _load_curves(args.curves)
    E = _pick(curves, args.label)
    out = verify_ptd(E, args.d, args.q)
    rep = Report("verify-ptd")
    cfg.stamp(rep)
    rep.add("curve", E.label)
    rep.add("twist", args.d)
    rep.add("q", args.q)
    rep.add("dim_strict", out.dim_strict)
    rep.add("dim_classical", out.dim_classical)
    rep.add("dim_relaxed", out.dim_relaxed)
    rep.add("relaxed_minus_strict", out.dim_relaxed - out.dim_strict)
    rep.add("res_q_dim", out.res_relaxed.dim)
    rep.add("gap_ok", out.gap_ok)
    rep.add("lagrangian_ok", out.lagrangian_ok)
    rep.add("chain_ok", out.chain_ok)
    rep.add("ok", out.ok)
    return rep


def cmd_find_twist(args, cfg) -> Report:
    curves = _load_curves(args.curves)
    E = _pick(curves, args.label_e)
    A = _pick(curves, args.label_a)
    case = args.case
    if case == "auto":
        case = route_case(E, A)
    rep = Report("find-twist")
    cfg.stamp(rep)
    rep.add("E", E.label)
    rep.add("A", A.label)
    rep.add("case", case)
    store = Datastore.load(cfg.datastore_path) if cfg.datastore_path else None
    if args.gap and case in ("2", "3"):
        certs = gap_amplifier(E, A, args.gap, cfg.prime_bound, cfg.twist_bound)
    elif case == "1":
        if store is None:
            raise MissingIngestedRank("case 1 needs --datastore with ingested ranks")
        certs = [demo_case1(E, A, store, cfg.prime_bound)]
    elif case == "2":
        certs = [demo_case2(E, A, cfg.prime_bound)]
    else:
        certs = [demo_case3(E, A, cfg.prime_bound, cfg.twist_bound)]
    rep.add("rounds", len(certs))
    for i, cert in enumerate(certs):
        rep.add(f"round.{i}.case", cert.case)
        rep.add(f"round.{i}.d", cert.chi.d)
        rep.add(f"round.{i}.q", cert.prime)
        if cert.auxiliary:
            rep.add(f"round.{i}.aux", list(cert.auxiliary))
        for side, (before, after, prov) in sorted(cert.ranks.items()):
            rep.add(f"round.{i}.rank.{side}", f"{before} -> {after} [{prov}]")
        for p, curve, h in cert.h_table:
            rep.add(f"round.{i}.h.{curve}.{p}", h)
        for c in cert.claims:
            rep.add(f"round.{i}.claim.{c.name}", c.ok)
        rep.add(f"round.{i}.certified", cert.certified)
    return rep


def cmd_parity_audit(args, cfg) -> Report:
    curves = _load_curves(args.curves)
    E = _pick(curves, args.label)
    rep = Report("parity-audit")
    cfg.stamp(rep)
    rep.add("curve", E.label)
    rep.add("count", args.count)
    S_odd = [p for p in bad_primes(E) if p != 2]
    passes = fails = 0
    d = 1
    produced = 0
    from .arith import is_square_in_Qv, is_squarefree

    while produced < args.count:
        d += 8  # admissible generator: d = 1 mod 8, positive, squarefree,
        if not is_squarefree(d):
            continue
        if any(not is_square_in_Qv(d, p) for p in S_odd):
            continue
        out = kramer_parity_check(E, d)
        produced += 1
        rep.add(f"twist.{d}.ranks", f"{out.rank_base} -> {out.rank_twist}")
        rep.add(f"twist.{d}.h_sum", out.h_sum)
        rep.add(f"twist.{d}.ok", out.parity_ok)
        if out.parity_ok:
            passes += 1
        else:
            fails += 1
    rep.add("passes", passes)
    rep.add("failures", fails)
    return rep


def cmd_lagrangian(args, cfg) -> Report:
    if args.n > 4:
        raise ProcedureError("exhaustive enumeration is capped at n = 4")
    rep = Report("lagrangian")
    cfg.stamp(rep)
    space = standard_metabolic(args.n)
    X = F2Subspace.from_vectors(space.dim, [1 << (2 * i) for i in range(args.n)])
    count = count_disjoint_lagrangians(space, X)
    expected = 2 ** (args.n * (args.n - 1) // 2)
    rep.add("n", args.n)
    rep.add("total_lagrangians", len(all_lagrangians(space)))
    rep.add("disjoint_from_X", count)
    rep.add("formula_2^(n(n-1)/2)", expected)
    rep.add("match", count == expected)
    return rep


def cmd_ingest(args, cfg) -> Report:
    known = None
    if args.against:
        known = {E.label for E in _load_curves(args.against)}
    store = Datastore.load(args.datafile, known_labels=known)
    rep = Report("ingest")
    cfg.stamp(rep)
    rep.add("source", args.datafile)
    rep.add("labels_validated", args.against or "-")
    rep.add("records", len(store.records))
    # round-trip determinism
    again = Datastore.parse(store.dump(), source="<roundtrip>")
    rep.add("roundtrip_ok", again.records == store.records)
    for (label, d), rank in sorted(store.records.items()):
        rep.add(f"rank.{label}.{d}", rank)
    return rep


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twoselmer",
                                 description=__doc__.split("\n")[0])
    ap.add_argument("--format", choices=("table", "records"), default="table")
    ap.add_argument("--bound", type=int, default=10**5, help="prime search bound")
    ap.add_argument("--twist-bound", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--datastore", default="")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="2-torsion field degrees and pairwise equality")
    p.add_argument("curves")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("selmer", help="2-Selmer rank and basis of a twist")
    p.add_argument("curves")
    p.add_argument("label")
    p.add_argument("-d", type=int, default=1)
    p.add_argument("--variant", default="classical",
                   help="classical | strict:q | relaxed:q | twisted:q:t")
    p.add_argument("--backend", choices=("auto", "internal-only", "ingested"),
                   default="auto")
    p.set_defaults(fn=cmd_selmer)

    p = sub.add_parser("verify-ptd", help="Poitou-Tate rank identity at q")
    p.add_argument("curves")
    p.add_argument("label")
    p.add_argument("-d", type=int, default=1)
    p.add_argument("-q", type=int, required=True)
    p.set_defaults(fn=cmd_verify_ptd)

    p = sub.add_parser("find-twist", help="certified rank-divergence twists")
    p.add_argument("curves")
    p.add_argument("label_e")
    p.add_argument("label_a")
    p.add_argument("--case", choices=("auto", "1", "2", "3"), default="auto")
    p.add_argument("--gap", type=int, default=0)
    p.set_defaults(fn=cmd_find_twist)

    p = sub.add_parser("parity-audit", help="Kramer parity over admissible twists")
    p.add_argument("curves")
    p.add_argument("label")
    p.add_argument("--count", type=int, default=25)
    p.set_defaults(fn=cmd_parity_audit)

    p = sub.add_parser("lagrangian", help="Lagrangian counts in 2n dimensions")
    p.add_argument("n", type=int)
    p.set_defaults(fn=cmd_lagrangian)

    p = sub.add_parser("ingest", help="validate an ingestion file")
    p.add_argument("datafile")
    p.add_argument("--against", default="",
                   help="curve file whose labels the records must match")
    p.set_defaults(fn=cmd_ingest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    cfg = WorkbenchConfig(prime_bound=args.bound, twist_bound=args.twist_bound,
                          sampling_seed=args.seed, datastore_path=args.datastore,
                          output_format=args.format)
    try:
        report = args.fn(args, cfg)
    except (NotFound, MissingIngestedRank, RefusedSameTorsionField) as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return 2
    except (CurveError, DatastoreError, SearchError, DescentError,
            UnsupportedLocalCase, ProcedureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(report.render(cfg.output_format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
