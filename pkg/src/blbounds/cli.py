"""Command-line interface: ``blbounds {analyze,bound,perceive,oracle,visual}``.

Every command prints a human-readable table, a ``---`` fence, then flat
``key=value`` lines with numbers at 12 significant digits. Exit codes: 0 on
success or a finite bound, 1 on usage or parse errors, 2 when a hypothesis
fails or the bound is infinite.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass

import numpy as np

from . import bounds
from .datum import (
    Datum,
    LocalizedRegularizedDatum,
    exponential_entropy,
    is_globally_critical,
    projector_reduction,
    singular_values,
    total_acuity,
)
from .exceptions import InvalidInput, NotSurjective, RankDeficient
from .lieb_oracle import DEFAULT_EPS_VALUES, DEFAULT_T_VALUES, bl_limit, maximize_gaussian
from .linalg import Subspace
from .perceptivity import Status, beta_min_estimate, check_perceptivity
from .visual import fit_slope, read_cloud, visual_check

EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS = 0, 1, 2

SCHEDULES = {
    "default": (DEFAULT_T_VALUES, DEFAULT_EPS_VALUES),
    "fast": ((1e0, 1e2, 1e4, 1e6), (1e0, 1e-2, 1e-4, 1e-6)),
}


class UsageError(Exception):
    """Bad command line or input file (exit code 1)."""


class HypothesisError(Exception):
    """A mathematical precondition failed (exit code 2)."""


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return ",".join(fmt(v) for v in np.ravel(np.asarray(x, dtype=float)))
    return str(x)


def mkey(name: str) -> str:
    """Machine-readable key: runs of non-alphanumerics become ``_``."""
    return re.sub(r"[^A-Za-z0-9.]+", "_", name).strip("_")


def emit(rows, kv, out=None):
    """Print an aligned two-column table, the fence, then ``key=value`` lines."""
    out = out or sys.stdout
    width = max((len(k) for k, _ in rows), default=0)
    for k, v in rows:
        out.write(f"{k.ljust(width)}  {v if isinstance(v, str) else fmt(v)}\n")
    out.write("---\n")
    for k, v in kv:
        out.write(f"{k}={fmt(v)}\n")


# datum files


@dataclass
class DatumFile:
    datum: Datum
    regs: tuple | None = None
    loc: np.ndarray | None = None
    alphas: object = None
    beta: float | None = None

    @property
    def localized(self) -> LocalizedRegularizedDatum | None:
        if self.regs is None or self.loc is None:
            return None
        return LocalizedRegularizedDatum(self.datum, self.regs, self.loc)


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise UsageError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def _matrix(obj, where, shape=None):
    if isinstance(obj, dict):
        for key in ("rows", "cols", "entries"):
            if key not in obj:
                raise UsageError(f"{where}: missing field '{key}'")
        rows, cols = obj["rows"], obj["cols"]
        if not (isinstance(rows, int) and isinstance(cols, int) and rows >= 1 and cols >= 1):
            raise UsageError(f"{where}: rows and cols must be positive integers")
        entries = obj["entries"]
        if not isinstance(entries, list) or len(entries) != rows * cols:
            raise UsageError(f"{where}.entries: expected {rows * cols} numbers")
        m = np.array([_number(v, f"{where}.entries[{i}]") for i, v in enumerate(entries)]).reshape(rows, cols)
    elif isinstance(obj, list) and obj and all(isinstance(r, list) for r in obj):
        widths = {len(r) for r in obj}
        if len(widths) != 1:
            raise UsageError(f"{where}: rows have different lengths")
        m = np.array([[_number(v, f"{where}[{i}][{k}]") for k, v in enumerate(r)] for i, r in enumerate(obj)])
    else:
        raise UsageError(f"{where}: expected a matrix ({{rows, cols, entries}} or a list of rows)")
    if shape is not None and m.shape != shape:
        raise UsageError(f"{where}: expected shape {shape}, got {m.shape}")
    return m


def _codomain_frame(m):
    """Range frame for a square orthogonal projector of deficient rank, else ``None``."""
    if m.shape[0] != m.shape[1]:
        return None
    if np.abs(m - m.T).max() > 1e-9 or np.abs(m @ m - m).max() > 1e-9:
        return None
    w = Subspace.from_columns(m)
    return w.frame if 0 < w.dim < m.shape[0] else None


def parse_datum(doc, source="<datum>") -> DatumFile:
    """Validate a decoded JSON document; errors name the offending field.

    Square orthogonal projectors are given their range as codomain, so a
    regulariser for such a map is a ``rank x rank`` matrix in the coordinates
    of an orthonormal basis of the range.
    """
    if not isinstance(doc, dict):
        raise UsageError(f"{source}: top level must be an object")
    known = {"ambient_dim", "maps", "weights", "regs", "loc", "alphas", "beta", "name", "comment"}
    extra = sorted(set(doc) - known)
    if extra:
        raise UsageError(f"{source}: unknown field '{extra[0]}'")
    for key in ("ambient_dim", "maps", "weights"):
        if key not in doc:
            raise UsageError(f"{source}: missing field '{key}'")
    d = doc["ambient_dim"]
    if not (isinstance(d, int) and not isinstance(d, bool) and d >= 1):
        raise UsageError(f"{source}: ambient_dim must be a positive integer")
    if not isinstance(doc["maps"], list) or not doc["maps"]:
        raise UsageError(f"{source}: maps must be a non-empty list")
    maps = []
    for j, m in enumerate(doc["maps"]):
        where = f"{source}: maps[{j}]"
        a = _matrix(m, where)
        if a.shape[1] != d:
            raise UsageError(f"{where}: has {a.shape[1]} columns, ambient_dim is {d}")
        maps.append(a)
    w = doc["weights"]
    if not isinstance(w, list) or len(w) != len(maps):
        raise UsageError(f"{source}: weights must list {len(maps)} numbers")
    weights = [_number(v, f"{source}: weights[{j}]") for j, v in enumerate(w)]
    try:
        datum = Datum(maps, weights, [_codomain_frame(m) for m in maps])
    except InvalidInput as err:
        raise UsageError(f"{source}: {err}") from None
    out = DatumFile(datum)
    if ("regs" in doc) != ("loc" in doc):
        raise UsageError(f"{source}: regs and loc must be given together")
    if "regs" in doc:
        if not isinstance(doc["regs"], list) or len(doc["regs"]) != len(maps):
            raise UsageError(f"{source}: regs must list {len(maps)} matrices")
        dims = datum.target_dims
        out.regs = tuple(
            _matrix(r, f"{source}: regs[{j}]", (int(n), int(n))) for j, (r, n) in enumerate(zip(doc["regs"], dims))
        )
        out.loc = _matrix(doc["loc"], f"{source}: loc", (d, d))
        try:
            out.localized
        except InvalidInput as err:
            raise UsageError(f"{source}: {err}") from None
    if "alphas" in doc:
        a = doc["alphas"]
        if isinstance(a, list):
            if len(a) != len(maps):
                raise UsageError(f"{source}: alphas must list {len(maps)} numbers")
            out.alphas = [_number(v, f"{source}: alphas[{j}]") for j, v in enumerate(a)]
        else:
            out.alphas = _number(a, f"{source}: alphas")
    if "beta" in doc:
        out.beta = _number(doc["beta"], f"{source}: beta")
    return out


def datum_document(datum: Datum, **extra) -> dict:
    """JSON-ready document for ``datum``; ``extra`` adds regs, loc, alphas or beta."""
    doc = {
        "ambient_dim": datum.d,
        "maps": [{"rows": m.rows, "cols": m.cols, "entries": m.matrix.ravel().tolist()} for m in datum.maps],
        "weights": datum.weights.tolist(),
    }
    for k, v in extra.items():
        doc[k] = [np.asarray(x).tolist() for x in v] if k == "regs" else np.asarray(v).tolist()
    return doc


def load_datum_file(path) -> DatumFile:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise UsageError(f"{path}: {err.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise UsageError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from None
    return parse_datum(doc, str(path))


def read_overrides(path) -> dict:
    """``alpha.j`` and ``beta`` keys from a machine-readable report block."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise UsageError(f"{path}: {err.strerror}") from None
    if "---" in lines:
        lines = lines[lines.index("---") + 1:]
    kv = {}
    for n, ln in enumerate(lines, 1):
        if "=" in ln:
            k, v = ln.split("=", 1)
            kv[k.strip()] = v.strip()
    out = {}
    alpha_keys = sorted((k for k in kv if k.startswith("alpha.")), key=lambda k: int(k.split(".")[1]))
    try:
        if alpha_keys:
            out["alphas"] = [float(kv[k]) for k in alpha_keys]
        if "beta" in kv:
            out["beta"] = float(kv["beta"])
    except ValueError:
        raise UsageError(f"{path}: malformed alpha or beta value") from None
    return out


def read_frame(path, d) -> Subspace:
    """Subspace spanned by the columns of a ``d k`` header plus ``d`` rows file."""
    try:
        with open(path) as fh:
            rows = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as err:
        raise UsageError(f"{path}: {err.strerror}") from None
    try:
        dd, k = (int(x) for x in rows[0])
        m = np.array([[float(x) for x in r] for r in rows[1:]])
    except (ValueError, IndexError):
        raise UsageError(f"{path}: expected a 'd k' header followed by d rows of k numbers") from None
    if dd != d or m.shape != (d, k):
        raise UsageError(f"{path}: expected a {d} x {k} matrix")
    return Subspace.from_columns(m)


# commands


def _alphas(args, dfile: DatumFile, overrides):
    if args.alpha:
        return args.alpha[0] if len(args.alpha) == 1 else list(args.alpha)
    if "alphas" in overrides:
        return overrides["alphas"]
    if dfile.alphas is not None:
        return dfile.alphas
    raise UsageError("no thresholds: pass --alpha or put 'alphas' in the datum file")


def _beta(args, dfile, overrides):
    if args.beta is not None:
        return args.beta
    if "beta" in overrides:
        return overrides["beta"]
    return dfile.beta if dfile.beta is not None else 0.0


def cmd_analyze(args):
    dfile = load_datum_file(args.datum)
    datum = dfile.datum
    crit, defect = is_globally_critical(datum)
    sv = singular_values(datum)
    try:
        _, distortion = projector_reduction(datum)
    except NotSurjective:
        distortion = None
    bmin, wmin = beta_min_estimate(datum)
    rows = [("d", datum.d), ("maps", len(datum))]
    kv = [("d", datum.d), ("maps", len(datum))]
    for j, s in enumerate(sv):
        rows.append((f"sigma(l_{j})", fmt(s)))
        kv.append((f"sigma.{j}", s))
    rows += [
        ("globally critical", "yes" if crit else "no"),
        ("criticality defect", defect),
        ("acuity A", total_acuity(datum)),
        ("entropy E", exponential_entropy(datum)),
        ("distortion Upsilon", "n/a (not surjective)" if distortion is None else fmt(distortion)),
        ("beta_min estimate", bmin),
        ("beta_min subspace dim", wmin.dim),
    ]
    kv += [
        ("critical", crit),
        ("criticality_defect", defect),
        ("acuity", total_acuity(datum)),
        ("entropy", exponential_entropy(datum)),
        ("distortion", "nan" if distortion is None else distortion),
        ("beta_min", bmin),
    ]
    if dfile.alphas is not None:
        a = np.broadcast_to(np.asarray(dfile.alphas, dtype=float), (len(datum),))
        kv += [(f"alpha.{j}", v) for j, v in enumerate(a)]
    kv.append(("beta", dfile.beta if dfile.beta is not None else bmin))
    emit(rows, kv)
    return EXIT_OK


def _bound_report(args, dfile, overrides):
    datum = dfile.datum
    kind = args.kind
    if kind in ("lower", "lower-localized"):
        alpha = _alphas(args, dfile, overrides)
        alpha = float(np.ravel(alpha)[0])
        w = read_frame(args.w, datum.d) if args.w else None
        if kind == "lower":
            return bounds.lower_bound_global(datum, alpha, w)
        if args.t is None:
            raise UsageError("--kind lower-localized needs --t")
        return bounds.lower_bound_localized(datum, args.t, alpha, w)
    alphas = _alphas(args, dfile, overrides)
    force = args.force_unknown
    if kind == "upper":
        return bounds.upper_bound_global(datum, alphas, force=force)
    if kind == "upper-variant":
        try:
            return bounds.upper_bound_variant(datum, alphas, force=force)
        except NotSurjective as err:
            raise HypothesisError(f"hypothesis 'surjectivity' failed: {err}") from None
    lrd = dfile.localized
    if lrd is None:
        if args.t is None:
            raise UsageError("--kind upper-localized needs regs/loc in the datum file or --t")
        lrd = LocalizedRegularizedDatum.isotropic(datum, 1.0, args.t)
    try:
        return bounds.upper_bound_localized(lrd, alphas, _beta(args, dfile, overrides), force=force)
    except RankDeficient as err:
        raise HypothesisError(f"hypothesis 'full essential rank' failed: {err}") from None


def cmd_bound(args):
    dfile = load_datum_file(args.datum)
    overrides = read_overrides(args.overrides) if args.overrides else {}
    rep = _bound_report(args, dfile, overrides)
    rows = [("kind", rep.kind.value), ("value", rep.value)]
    rows += [(f"hypothesis: {name}", verdict) for name, verdict in rep.hypotheses]
    kv = [("kind", rep.kind.value), ("value", rep.value), ("finite", rep.finite), ("forced", rep.forced)]
    kv += [(f"hypothesis.{mkey(name)}", mkey(verdict)) for name, verdict in rep.hypotheses]
    for key, val in rep.inputs.items():
        if key == "alphas":
            kv += [(f"alpha.{j}", v) for j, v in enumerate(val)]
        elif isinstance(val, (int, float, np.floating)):
            kv.append((key, val))
    emit(rows, kv)
    if not rep.finite:
        failed = ", ".join(rep.failed) or "value"
        print(f"error: bound is infinite; failed hypothesis: {failed}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_perceive(args):
    dfile = load_datum_file(args.datum)
    alphas = _alphas(args, dfile, {})
    beta = _beta(args, dfile, {})
    v = check_perceptivity(dfile.datum, alphas, beta)
    rows = [("status", v.status.value), ("method", v.method), ("min slack", v.min_slack)]
    kv = [("status", v.status.value), ("method", v.method), ("min_slack", v.min_slack), ("samples", v.samples_used)]
    if v.witness is not None:
        rows.append(("witness dim", v.witness.dim))
        rows.append(("witness frame", fmt(v.witness.frame)))
        kv += [("witness_dim", v.witness.dim), ("witness_frame", v.witness.frame)]
    emit(rows, kv)
    return EXIT_OK if v.status is Status.CERTIFIED else EXIT_HYPOTHESIS


def _schedule(text):
    if text in SCHEDULES:
        return SCHEDULES[text]
    try:
        ts, es = text.split("/")
        return tuple(float(x) for x in ts.split(",")), tuple(float(x) for x in es.split(","))
    except ValueError:
        raise UsageError(f"bad schedule {text!r}: use {', '.join(SCHEDULES)} or 't1,t2,../e1,e2,..'") from None


def cmd_oracle(args):
    dfile = load_datum_file(args.datum)
    lrd = dfile.localized
    if lrd is not None and not args.limit:
        r = maximize_gaussian(lrd, seed=args.seed, restarts=args.restarts)
        rows = [("value", r.value), ("iterations", r.iterations), ("converged", "yes" if r.converged else "NO")]
        kv = [("value", r.value), ("iterations", r.iterations), ("converged", r.converged)]
        emit(rows, kv)
        return EXIT_OK
    t_values, eps_values = _schedule(args.schedule)
    try:
        est, trace = bl_limit(dfile.datum, t_values, eps_values, seed=args.seed, restarts=args.restarts)
    except InvalidInput as err:
        raise UsageError(str(err)) from None
    print("t\teps\tvalue\tconverged\titerations")
    for p in trace:
        print(f"{fmt(p.t)}\t{fmt(p.eps)}\t{fmt(p.value)}\t{fmt(p.converged)}\t{p.iterations}")
    all_conv = all(p.converged for p in trace)
    rows = [("estimate", est), ("extrapolated", trace.extrapolated), ("all converged", "yes" if all_conv else "NO")]
    kv = [("estimate", est), ("extrapolated", trace.extrapolated), ("converged", all_conv), ("points", len(trace))]
    emit(rows, kv)
    return EXIT_OK


def _deltas(text):
    try:
        ds = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad delta sweep {text!r}") from None
    if not ds or any(not 0 < x < 1 for x in ds):
        raise UsageError("every delta must lie in (0, 1)")
    return ds


def cmd_visual(args):
    dfile = load_datum_file(args.datum)
    try:
        cloud = read_cloud(args.cloud)
    except InvalidInput as err:
        raise UsageError(str(err)) from None
    deltas = _deltas(args.delta_sweep)
    alphas = _alphas(args, dfile, {})
    beta = _beta(args, dfile, {})
    try:
        verdict = check_perceptivity(dfile.datum, alphas, beta)
        reports = [
            visual_check(dfile.datum, cloud, delta, alphas, beta, verdict, force=args.force_unknown) for delta in deltas
        ]
    except InvalidInput as err:
        raise HypothesisError(str(err)) from None
    print("delta\tlhs\tprojected_product\trhs\tratio")
    for r in reports:
        print(f"{fmt(r.delta)}\t{r.lhs}\t{fmt(r.product)}\t{fmt(r.rhs)}\t{fmt(r.ratio)}")
    slope = math.nan
    if len(reports) > 1:
        # rounded so that exact power laws print cleanly
        slope = round(fit_slope([1 / r.delta for r in reports], [r.lhs / r.product for r in reports]), 9) + 0.0
    max_ratio = max(r.ratio for r in reports)
    holds = all(r.holds for r in reports)
    rows = [
        ("fitted beta slope", slope),
        ("max ratio", max_ratio),
        ("constant estimate", reports[0].constant_estimate),
        ("within 4^d constant", "yes" if holds else "NO"),
    ]
    kv = [
        ("slope", slope),
        ("max_ratio", max_ratio),
        ("constant_estimate", reports[0].constant_estimate),
        ("allowance", reports[0].allowance),
        ("holds", holds),
        ("perceptivity", reports[0].perceptivity),
    ]
    emit(rows, kv)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blbounds", description="Brascamp-Lieb constants: bounds, perceptivity and oracles.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="structural functionals of a datum")
    a.add_argument("datum")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bound", help="evaluate an upper or lower bound")
    b.add_argument("datum")
    b.add_argument(
        "--kind",
        choices=["upper", "upper-variant", "lower", "upper-localized", "lower-localized"],
        default="upper",
    )
    b.add_argument("--alpha", type=float, action="append", help="threshold; repeat once per map or give one for all")
    b.add_argument("--beta", type=float)
    b.add_argument("--w", help="frame file for the subspace W of the lower bounds")
    b.add_argument("--t", type=float, help="localisation scale T = t I")
    b.add_argument("--force-unknown", action="store_true", help="evaluate even if perceptivity is UNKNOWN")
    b.add_argument("--overrides", help="take alpha.j and beta from a key=value report (e.g. from analyze)")
    b.set_defaults(func=cmd_bound)

    c = sub.add_parser("perceive", help="certify or refute (alpha, beta)-perceptivity")
    c.add_argument("datum")
    c.add_argument("--alpha", type=float, action="append")
    c.add_argument("--beta", type=float)
    c.set_defaults(func=cmd_perceive)

    o = sub.add_parser("oracle", help="numerical lower estimate of the constant over Gaussians")
    o.add_argument("datum")
    o.add_argument("--schedule", default="default", help="default, fast, or 't1,t2,../e1,e2,..'")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--restarts", type=int, default=0)
    o.add_argument("--limit", action="store_true", help="run the limit schedule even if regs/loc are given")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("visual", help="covering-number check of the visual inequality")
    v.add_argument("datum")
    v.add_argument("cloud")
    v.add_argument("--delta-sweep", default="0.5,0.25,0.125,0.0625,0.03125")
    v.add_argument("--alpha", type=float, action="append")
    v.add_argument("--beta", type=float)
    v.add_argument("--force-unknown", action="store_true")
    v.set_defaults(func=cmd_visual)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except InvalidInput as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
