"""Command-line surface: generation, analysis, diversity, simulation.

JSON is the single interchange format; markdown/CSV are render-only.
Exit codes: 0 success, 1 verification failure, 2 usage error.  The
FORGE_SEED environment variable overrides any --seed default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import constructions, decodability, design as design_mod, diversity, simulator
from .f4 import enumerate_labels, hr_orthogonal, weight
from .pauli import hr_orthogonal_matrix, is_hermitian, matrix_from_label


def _seed_default(value: int) -> int:
    env = os.environ.get("FORGE_SEED")
    return int(env) if env else value


def _load_design(path: str) -> design_mod.Design:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise SystemExit(f"forge: cannot read {path}: {e}") from None
    try:
        return design_mod.parse(text)
    except ValueError as e:
        print(f"forge: {path}: {e}", file=sys.stderr)
        raise SystemExit(2) from None


def _emit(obj, out: str | None) -> None:
    text = obj if isinstance(obj, str) else json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_sizes(text: str):
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise SystemExit(2) from None


def cmd_generate(args) -> int:
    if args.source in constructions.catalog():
        d = constructions.catalog()[args.source]
    else:
        try:
            recipe = json.loads(Path(args.source).read_text())
        except OSError:
            names = ", ".join(sorted(constructions.catalog()))
            print(
                f"forge: {args.source!r} is neither a catalog name nor a readable "
                f"recipe file; catalog names: {names}",
                file=sys.stderr,
            )
            return 2
        except json.JSONDecodeError as e:
            print(f"forge: bad recipe JSON: {e}", file=sys.stderr)
            return 2
        try:
            d = constructions.generate(recipe)
        except (ValueError, KeyError) as e:
            print(f"forge: bad recipe: {e}", file=sys.stderr)
            return 2
    _emit(design_mod.serialize(d), args.out)
    return 0


def cmd_analyze(args) -> int:
    d = _load_design(args.design)
    report = decodability.analyze(d, use_hint=not args.no_hint)
    out = report.to_dict()
    out["requested_regime"] = args.regime
    _emit(out, args.out)
    return 0


def cmd_verify_f4(args) -> int:
    m = args.m
    labels = enumerate_labels(m)
    mats = [matrix_from_label(v) for v in labels]
    pairs = 0
    ortho_ok = herm_ok = True
    for i, u in enumerate(labels):
        if is_hermitian(mats[i]) != (weight(u) % 2 == 0):
            herm_ok = False
        for j in range(i, len(labels)):
            pairs += 1
            if hr_orthogonal_matrix(mats[i], mats[j]) != hr_orthogonal(u, labels[j]):
                ortho_ok = False
    report = {
        "m": m,
        "labels": len(labels),
        "pairs_checked": pairs,
        "orthogonality_agreement": ortho_ok,
        "hermitian_agreement": herm_ok,
    }
    _emit(report, args.out)
    return 0 if ortho_ok and herm_ok else 1


def cmd_qr_structure(args) -> int:
    d = _load_design(args.design)
    rep = simulator.verify_r_structure(
        d, trials=args.trials, tol=args.tol, seed=_seed_default(args.seed), n_rx=args.n_rx
    )
    _emit(
        {
            "design": rep.design_name,
            "trials": rep.trials,
            "tol": rep.tol,
            "claimed_zeros": rep.n_claimed,
            "max_claimed": rep.max_claimed,
            "controls": rep.n_controls,
            "median_control": rep.median_control,
            "passed": rep.passed,
        },
        args.out,
    )
    return 0 if rep.passed else 1


def _cert_dict(cert: diversity.DiversityCertificate) -> dict:
    return {
        "min_abs_det": cert.min_abs_det,
        "min_scaled": cert.min_scaled,
        "argmin_pair": [list(p) for p in cert.argmin_pair] if cert.argmin_pair else None,
        "pair_count": cert.pair_count,
        "evaluated_tuples": cert.evaluated_tuples,
        "tol": cert.tol,
        "passed": cert.passed,
    }


def cmd_diversity(args) -> int:
    d = _load_design(args.design)
    if args.constellation:
        con = diversity.Constellation.from_dict(json.loads(Path(args.constellation).read_text()))
    elif args.q:
        con = diversity.build_constellations(
            d, _parse_sizes(args.q), seed=_seed_default(args.seed), tol=args.tol
        )
    else:
        print("forge: diversity needs --constellation or --q", file=sys.stderr)
        return 2
    cert = diversity.verify_full_diversity(d, con, tol=args.tol)
    _emit({"constellation": con.to_dict(), "certificate": _cert_dict(cert)}, args.out)
    return 0 if cert.passed else 1


def cmd_build_constellation(args) -> int:
    d = _load_design(args.design)
    fixed = None
    if args.pam:
        symbols = _parse_sizes(args.pam)
        fixed = diversity.regular_pam_assignment(d, symbols, args.pam_q)
    con = diversity.build_constellations(
        d, _parse_sizes(args.q), seed=_seed_default(args.seed), tol=args.tol, fixed=fixed
    )
    cert = diversity.verify_full_diversity(d, con, tol=args.tol)
    _emit({"constellation": con.to_dict(), "certificate": _cert_dict(cert)}, args.out)
    return 0 if cert.passed else 1


def cmd_decode_count(args) -> int:
    d = _load_design(args.design)
    rep = simulator.decode_count(
        d,
        m_size=args.m_size,
        trials=args.trials,
        seed=_seed_default(args.seed),
        noise_sigma=args.noise,
    )
    if args.format == "csv":
        text = (
            "design,m_size,trials,agreements,conditional_count,flat_count,closed_form_count\n"
            f"{rep.design_name},{rep.m_size},{rep.trials},{rep.agreements},"
            f"{rep.conditional_count},{rep.flat_count},{rep.closed_form_count}\n"
        )
        _emit(text, args.out)
    else:
        _emit(
            {
                "design": rep.design_name,
                "m_size": rep.m_size,
                "trials": rep.trials,
                "agreements": rep.agreements,
                "conditional_count": rep.conditional_count,
                "flat_count": rep.flat_count,
                "closed_form_count": rep.closed_form_count,
                "all_agree": rep.all_agree,
            },
            args.out,
        )
    return 0 if rep.all_agree else 1


def cmd_table1(args) -> int:
    if args.format == "csv":
        _emit(decodability.table1_csv(), args.out)
    else:
        _emit(decodability.table1_markdown(), args.out)
    return 0


def cmd_catalog(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, d in sorted(constructions.catalog().items()):
        path = out_dir / f"{name}.json"
        path.write_text(design_mod.serialize(d))
        written.append(str(path))
    _emit({"written": written}, None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="forge",
        description="construct, verify and analyze low-complexity space-time block code designs",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="emit a named or recipe-built design as JSON")
    g.add_argument("source", help="catalog name or recipe JSON path")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="decodability report for a design")
    a.add_argument("design")
    a.add_argument("--regime", choices=["arbitrary", "reduced"], default="arbitrary")
    a.add_argument("--no-hint", action="store_true", help="ignore recorded structure hints")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify-f4", help="exhaustive label/matrix agreement check")
    v.add_argument("--m", type=int, default=2)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify_f4)

    q = sub.add_parser("qr-structure", help="verify structural zeros of the QR factor")
    q.add_argument("design")
    q.add_argument("--trials", type=int, default=100)
    q.add_argument("--tol", type=float, default=1e-9)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--n-rx", type=int, default=None)
    q.add_argument("--out")
    q.set_defaults(func=cmd_qr_structure)

    dv = sub.add_parser("diversity", help="certify full diversity of a constellation")
    dv.add_argument("design")
    dv.add_argument("--q", help="comma-separated per-symbol sizes (builds first)")
    dv.add_argument("--constellation", help="verify an existing constellation JSON")
    dv.add_argument("--tol", type=float, default=1e-9)
    dv.add_argument("--seed", type=int, default=0)
    dv.add_argument("--out")
    dv.set_defaults(func=cmd_diversity)

    b = sub.add_parser("build-constellation", help="grow a full-diversity constellation")
    b.add_argument("design")
    b.add_argument("--q", required=True, help="comma-separated per-symbol sizes")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--tol", type=float, default=1e-9)
    b.add_argument("--pam", help="symbols (1-based, comma-separated) pinned to regular PAM")
    b.add_argument("--pam-q", type=int, default=2)
    b.add_argument("--out")
    b.set_defaults(func=cmd_build_constellation)

    dc = sub.add_parser("decode-count", help="conditional vs flat ML decode comparison")
    dc.add_argument("design")
    dc.add_argument("--m-size", type=int, default=4)
    dc.add_argument("--trials", type=int, default=50)
    dc.add_argument("--seed", type=int, default=0)
    dc.add_argument("--noise", type=float, default=0.1)
    dc.add_argument("--format", choices=["json", "csv"], default="json")
    dc.add_argument("--out")
    dc.set_defaults(func=cmd_decode_count)

    t = sub.add_parser("table1", help="decoding-complexity comparison table")
    t.add_argument("--format", choices=["md", "csv"], default="md")
    t.add_argument("--out")
    t.set_defaults(func=cmd_table1)

    c = sub.add_parser("catalog", help="write every named design as a JSON fixture")
    c.add_argument("--out-dir", default="catalog")
    c.set_defaults(func=cmd_catalog)

    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except SystemExit as e:
        if isinstance(e.code, str):
            print(e.code, file=sys.stderr)
            return 2
        return int(e.code or 0)
    except (ValueError, RuntimeError) as e:
        print(f"forge: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
