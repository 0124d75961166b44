"""Command-line front end producing CSV/JSON reports.

One binary, eight subcommands: mps, wielandt-scan, primitivity,
injectivity, parent-gap, dl-check, boundary-fit, spt-classify.  Reports
are CSV (default for tabular commands) or JSON; boundary-fit and
spt-classify are JSON only.  Every attempted instance appears as a row
with a status (ok | indeterminate | size-limited | error) and the report
body is byte-identical across runs with the same config and seed (the
wall-time field lives in the header and is excluded from that promise).

Exit codes: 0 when no row has status error, 1 on usage errors, 2 on data
errors or when some row errored.  Size caps can be overridden through
environment variables TNLAB_<CAP> (integers); nothing else is
configurable through the environment.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import channels, constants, detectability, models, mps, parent, peps, symmetry
from . import io as tnio
from .constants import SizeLimitError
from .io import FileFormatError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

CAP_NAMES = (
    "DENSE_EIG_MAX",
    "DENSE_STATE_MAX",
    "GAMMA_ENTRIES_MAX",
    "SPARSE_DIM_MAX",
    "PEPS_VIRTUAL_MAX",
    "PEPS_STATE_MAX",
    "MPO_ENTRIES_MAX",
)

MPS_BUILTINS = ("aklt", "ghz", "cluster", "cluster2")
PEPS_BUILTINS = ("injective", "copy", "random")


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def apply_cap_overrides(environ):
    """Apply TNLAB_<CAP> integer overrides to every module that uses them."""
    overrides = {}
    submodules = (channels, detectability, models, mps, parent, peps, symmetry)
    for name in CAP_NAMES:
        raw = environ.get("TNLAB_" + name)
        if raw is None:
            continue
        try:
            value = int(raw)
        except ValueError:
            raise UsageError(f"TNLAB_{name} must be an integer, got {raw!r}") from None
        if value < 1:
            raise UsageError(f"TNLAB_{name} must be positive, got {value}")
        overrides[name] = value
        setattr(constants, name, value)
        for mod in submodules:
            if hasattr(mod, name):
                setattr(mod, name, value)
    return overrides


def parse_int_list(text, what):
    """Parse "6", "4..10", or "4,6,8" into a sorted list of ints."""
    items = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, _, hi = part.partition("..")
            try:
                lo, hi = int(lo), int(hi)
            except ValueError:
                raise UsageError(f"bad {what} range {part!r}") from None
            if hi < lo:
                raise UsageError(f"empty {what} range {part!r}")
            items.extend(range(lo, hi + 1))
        else:
            try:
                items.append(int(part))
            except ValueError:
                raise UsageError(f"bad {what} value {part!r}") from None
    if not items:
        raise UsageError(f"no {what} values in {text!r}")
    return sorted(set(items))


def load_site(spec):
    """MPS site tensor from a builtin name or a TNT v1 file."""
    builtins = {
        "aklt": models.aklt_site,
        "ghz": models.ghz_site,
        "cluster": models.cluster_site,
        "cluster2": models.cluster_blocked_site,
    }
    if spec in builtins:
        return builtins[spec]()
    t = tnio.load_tensor(spec)
    if sorted(t.labels) != sorted(mps.MPS_LABELS):
        raise FileFormatError(
            f"site tensor needs labels {mps.MPS_LABELS}, got {t.labels}", field="labels"
        )
    return t


def load_peps_site(spec, seed):
    """PEPS site tensor from a builtin name or a TNT v1 file."""
    builtins = {
        "injective": lambda: models.injective_peps_site(bond=2, seed=seed),
        "copy": lambda: models.copy_peps_site(2),
        "random": lambda: models.random_peps_site(2, 2, seed=seed),
    }
    if spec in builtins:
        return builtins[spec]()
    t = tnio.load_tensor(spec)
    if sorted(t.labels) != sorted(models.PEPS_LABELS):
        raise FileFormatError(
            f"PEPS tensor needs labels {models.PEPS_LABELS}, got {t.labels}",
            field="labels",
        )
    return t


def _document_columns(pairs):
    width = max(len(name) for name, _ in pairs)
    lines = ["report columns:"]
    lines += [f"  {name.ljust(width)}  {meaning}" for name, meaning in pairs]
    return "\n".join(lines)


STATUS_NOTE = (
    ("status", "ok | indeterminate | size-limited | error"),
    ("note", "free-text detail for non-ok rows"),
)


def _csv_cell(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, complex):
        return repr(complex(x)).strip("()")
    return str(x)


def _json_safe(x):
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (complex, np.complexfloating)):
        return [_json_safe(float(x.real)), _json_safe(float(x.imag))]
    if isinstance(x, np.ndarray):
        return _json_safe(x.tolist())
    return x


def matrix_payload(m):
    """Matrix as {re, im} nested lists for JSON reports."""
    m = np.asarray(m, dtype=complex)
    return {
        "re": [[float(v) for v in row] for row in m.real],
        "im": [[float(v) for v in row] for row in m.imag],
    }


def _config_echo(args):
    skip = {"run", "cmd", "plot", "out"}
    pairs = []
    for key in sorted(vars(args)):
        if key in skip:
            continue
        value = getattr(args, key)
        if value is None:
            continue
        pairs.append(f"{key}={value}")
    return " ".join(pairs)


def render_csv(header, columns, rows):
    buf = _stdio.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(col)) for col in columns])
    return buf.getvalue()


def render_json(header, payload):
    doc = {"header": _json_safe(header)}
    doc.update(_json_safe(payload))
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def thread_map(fn, items, threads):
    """Map preserving input order; threads only when asked and useful."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def guarded(fn):
    """Run one instance; exceptions become (status, note) row fragments."""
    def wrapper(item):
        try:
            return fn(item)
        except SizeLimitError as exc:
            return {"status": "size-limited", "note": str(exc)}
        except (ValueError, FileFormatError, np.linalg.LinAlgError) as exc:
            return {"status": "error", "note": str(exc)}
    return wrapper


# ---------------------------------------------------------------- subcommands


def run_mps(args):
    if args.action == "from-state":
        if args.state is None:
            raise UsageError("--state is required for from-state")
        t = tnio.load_tensor(args.state)
        psi = t.data.reshape(-1)
        d = args.d
        if d is None:
            if t.rank > 1 and len(set(t.dims)) == 1:
                d = t.dims[0]
            else:
                raise UsageError("--d is required when the input tensor is flat")
        m = mps.from_dense(psi, int(d), threshold=args.threshold)
        recon = m.to_dense(max_entries=mps.DENSE_STATE_MAX)
        scale = np.linalg.norm(psi)
        err = float(np.linalg.norm(recon - psi) / scale) if scale > 0 else 0.0
        if args.save:
            tnio.save_mps(m, args.save)
        row = {
            "id": 0,
            "n_sites": m.n_sites,
            "d": int(d),
            "max_bond": max(m.bond_dims) if m.bond_dims else 1,
            "reconstruction_error": err,
            "status": "ok",
            "note": f"saved {args.save}" if args.save else "",
        }
        columns = ["id", "n_sites", "d", "max_bond", "reconstruction_error",
                   "status", "note"]
        return columns, [row], None, None

    if args.action == "entropy":
        if args.mps is None:
            raise UsageError("--mps is required for entropy")
        m = tnio.load_mps(args.mps)
        psi = m.to_dense(max_entries=mps.DENSE_STATE_MAX)
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ValueError("state contracts to zero")
        psi = psi / nrm
        if args.cut == "all":
            cuts = list(range(1, m.n_sites))
        else:
            cuts = parse_int_list(args.cut, "cut")
        bonds = m.bond_dims

        @guarded
        def one(cut):
            s = mps.entanglement_entropy(psi, cut, d=m.phys_dim)
            row = {"cut": cut, "entropy": s, "status": "ok", "note": ""}
            if m.boundary == "open" and 1 <= cut < m.n_sites:
                bond = bonds[cut]
                row["bond"] = bond
                row["log_bond"] = math.log(bond)
            return row

        rows = thread_map(one, cuts, args.threads)
        for cut, row in zip(cuts, rows):
            row.setdefault("cut", cut)
        columns = ["cut", "entropy", "bond", "log_bond", "status", "note"]

        def plot(path):
            from .plotting import save_series

            good = [r for r in rows if r["status"] == "ok"]
            return save_series(
                path,
                [("entropy", [r["cut"] for r in good], [r["entropy"] for r in good])],
                xlabel="cut",
                ylabel="entropy (nats)",
                title="entanglement entropy by cut",
            )

        return columns, rows, None, plot

    if args.action == "expval":
        if args.mps is None or args.op is None:
            raise UsageError("--mps and --op are required for expval")
        m = tnio.load_mps(args.mps)
        with open(args.op, "r", encoding="utf-8") as fh:
            fmt = json.load(fh).get("format")
        if fmt == tnio.MPO_FORMAT:
            op = tnio.load_mpo(args.op)
            site = None
            site_cell = "mpo"
        else:
            t = tnio.load_tensor(args.op)
            if t.rank != 2:
                raise FileFormatError(
                    f"local operator must be a matrix, got rank {t.rank}", field="dims"
                )
            if args.site is None:
                raise UsageError("--site is required for a local operator")
            op = t.data
            site = int(args.site)
            site_cell = site
        value = mps.expectation_value(m, op, site=site)
        row = {
            "id": 0,
            "site": site_cell,
            "value_re": float(np.real(value)),
            "value_im": float(np.imag(value)),
            "status": "ok",
            "note": "",
        }
        return ["id", "site", "value_re", "value_im", "status", "note"], [row], None, None

    raise UsageError(f"unknown mps action {args.action!r}")


def run_wielandt_scan(args):
    dim = args.dim
    if not 2 <= dim <= 4:
        raise UsageError("--dim must be 2, 3, or 4 (the scan is exhaustive over 2^(D^2) patterns)")
    indices = channels.pattern_scan(dim)
    bound = channels.classical_wielandt_bound(dim)
    rows = []
    for pid, idx in enumerate(indices):
        idx = int(idx)
        rows.append(
            {
                "id": pid,
                "D": dim,
                "d": None,
                "index": idx if idx > 0 else None,
                "bound": bound,
                "verdict": "found" if idx > 0 else "not-found",
                "status": "ok",
                "note": "" if idx > 0 else "pattern is not primitive",
            }
        )
    columns = ["id", "D", "d", "index", "bound", "verdict", "status", "note"]

    def plot(path):
        from .plotting import save_scatter

        xs = [r["id"] for r in rows if r["index"]]
        ys = [r["index"] for r in rows if r["index"]]
        return save_scatter(
            path, xs, ys,
            xlabel="pattern id",
            ylabel="primitivity index",
            title=f"exhaustive 0/1 pattern scan, D={dim}",
            hline=bound,
        )

    return columns, rows, None, plot


def _channel_row(report, dim, d, bound):
    row = {
        "id": 0,
        "D": dim,
        "d": d,
        "index": report.index,
        "bound": bound,
        "verdict": report.status,
        "status": "ok",
        "note": "",
    }
    if report.status == "indeterminate":
        row["status"] = "indeterminate"
    return row


def run_primitivity(args):
    ch = tnio.load_channel(args.channel)
    report = channels.primitivity_index(ch, n_max=args.n_max, seed=args.seed)
    bound = 2 * (ch.dim - 1) ** 2
    row = _channel_row(report, ch.dim, ch.n_kraus, bound)
    cert = report.certificate.get("spectral")
    if report.status == "not-found":
        if cert is not None and cert.status == "not-primitive":
            row["note"] = "channel is not primitive (peripheral spectrum)"
        else:
            row["status"] = "indeterminate"
            row["note"] = f"no verdict within n_max={report.n_searched}"
    elif report.status == "indeterminate":
        row["note"] = "zero-pair search could not certify some length"
    columns = ["id", "D", "d", "index", "bound", "verdict", "status", "note"]
    return columns, [row], None, None


def injectivity_bound(d, dim):
    """Tighter of the two blocking-length bounds for a normal tensor."""
    return min(2 * dim * dim * (6 + math.log2(dim)), float((dim * dim - d + 1) * dim * dim))


def run_injectivity(args):
    site = load_site(args.mps)
    mats = mps.site_matrices(site)
    d, dim = mats.shape[0], mats.shape[1]
    report = channels.injectivity_index_mps(site, n_max=args.n_max)
    row = _channel_row(report, dim, d, injectivity_bound(d, dim))
    if report.status == "not-found":
        stalled = report.certificate.get("span_stabilized_at")
        if stalled is not None:
            row["note"] = f"word span stabilized at length {stalled}; tensor is not normal"
        else:
            row["status"] = "indeterminate"
            row["note"] = f"no verdict within n_max={report.n_searched}"
    columns = ["id", "D", "d", "index", "bound", "verdict", "status", "note"]
    return columns, [row], None, None


def run_parent_gap(args):
    site = load_site(args.mps)
    sizes = parse_int_list(args.sizes, "size")
    if args.region == "auto":
        report = channels.injectivity_index_mps(site)
        if report.index is None:
            raise ValueError("site tensor is not normal; give --region explicitly")
        region = report.index + 1
    else:
        try:
            region = int(args.region)
        except ValueError:
            raise UsageError(f"--region must be an integer or 'auto', got {args.region!r}") from None
        if region < 1:
            raise UsageError("--region must be at least 1")
    h = parent.parent_term(site, region)

    @guarded
    def one(L):
        spec = parent.low_spectrum(parent.assemble(h, L), seed=args.seed)
        evals = spec.eigenvalues
        return {
            "L": L,
            "E0": evals[0],
            "E1": evals[0] + spec.gap,
            "degeneracy": spec.ground_degeneracy,
            "gap": spec.gap,
            "solver_residual": spec.solver_residual,
            "status": "ok",
            "note": "",
        }

    rows = thread_map(one, sizes, args.threads)
    for L, row in zip(sizes, rows):
        row.setdefault("L", L)
    columns = ["L", "E0", "E1", "degeneracy", "gap", "solver_residual", "status", "note"]

    def plot(path):
        from .plotting import save_series

        good = [r for r in rows if r["status"] == "ok"]
        return save_series(
            path,
            [("gap", [r["L"] for r in good], [r["gap"] for r in good])],
            xlabel="ring size L",
            ylabel="finite-size gap",
            title=f"parent-Hamiltonian gap, region {region}",
        )

    return columns, rows, None, plot


def run_dl_check(args):
    if args.model == "ising":
        term = models.ising_pair_projector()
    elif args.model == "aklt":
        term = parent.parent_term(models.aklt_site(), 2).term
    else:
        t = tnio.load_tensor(args.model)
        if t.rank != 2:
            raise FileFormatError(
                f"pair projector must be a matrix, got rank {t.rank}", field="dims"
            )
        term = t.data
    sizes = parse_int_list(args.L, "L")
    ells = parse_int_list(args.ell, "ell")
    if any(e < 1 for e in ells):
        raise UsageError("--ell values must be positive")

    def per_size(L):
        dl = detectability.DlOperator(term, L)
        ground = detectability.ground_data(dl, seed=args.seed)

        @guarded
        def one(ell):
            rep = detectability.dl_bound_check(dl, ell, seed=args.seed, ground=ground)
            return {
                "L": L,
                "ell": ell,
                "lhs": rep.lhs,
                "rhs": rep.rhs,
                "margin": rep.margin,
                "status": "ok",
                "note": "degenerate ground space" if rep.degenerate_ground_space else "",
            }

        out = []
        for ell, row in zip(ells, [one(e) for e in ells]):
            row.setdefault("L", L)
            row.setdefault("ell", ell)
            out.append(row)
        return out

    chunks = thread_map(guarded(per_size), sizes, args.threads)
    rows = []
    for L, chunk in zip(sizes, chunks):
        if isinstance(chunk, dict):
            chunk.setdefault("L", L)
            rows.append(chunk)
        else:
            rows.extend(chunk)
    columns = ["L", "ell", "lhs", "rhs", "margin", "status", "note"]

    def plot(path):
        from .plotting import save_series

        series = []
        for L in sizes:
            good = [r for r in rows if r["status"] == "ok" and r["L"] == L]
            if good:
                series.append((f"lhs L={L}", [r["ell"] for r in good], [r["lhs"] for r in good]))
                series.append((f"rhs L={L}", [r["ell"] for r in good], [r["rhs"] for r in good]))
        return save_series(
            path, series,
            xlabel="ell",
            ylabel="operator norm / bound",
            title=f"detectability lemma, model {args.model}",
            logy=True,
        )

    return columns, rows, None, plot


def run_boundary_fit(args):
    site = load_peps_site(args.peps, args.seed)
    b = peps.boundary_state(site, args.region, args.L)
    fit = peps.gibbs_fit(b)
    payload = {
        "region": args.region,
        "torus": args.L,
        "n_sites": b.n_sites,
        "site_dim": b.site_dim,
        "min_eigenvalue": b.min_eigenvalue,
        "support_rank": fit.support_rank,
        "support_deficient": fit.support_deficient,
        "identity_coefficient": fit.identity_coefficient,
        "single_norms": list(fit.single_norms),
        "two_body_norms": [[i, j, norm] for i, j, _, norm in fit.pairs],
        "pairs": [[i, j, dist, norm] for i, j, dist, norm in fit.pairs],
        "J": fit.J,
        "alpha": fit.alpha,
        "residual": fit.residual,
        "status": "ok",
    }

    def plot(path):
        from .plotting import save_decay_fit

        return save_decay_fit(
            path,
            [p[2] for p in fit.pairs],
            [p[3] for p in fit.pairs],
            fit.J,
            fit.alpha,
            title=f"boundary interaction decay, {args.region}x{args.region} region on {args.L}x{args.L} torus",
        )

    return None, None, payload, plot


def run_spt_classify(args):
    site = load_site(args.mps)
    if args.group == "z2z2":
        group = symmetry.z2z2_group()
    elif args.group.startswith("z") and args.group[1:].isdigit():
        group = symmetry.cyclic_group(int(args.group[1:]))
    else:
        raise UsageError(f"unknown group {args.group!r} (use z2z2 or zN)")
    if args.reps == "cluster":
        partial = models.cluster_symmetry()
    elif args.reps == "aklt":
        sym = models.aklt_symmetry()
        partial = {"a": sym["x"], "b": sym["z"]}
    else:
        _, partial = tnio.load_reps(args.reps)
    rep = symmetry.complete_representation(group, partial)
    report = symmetry.spt_classify(site, group, rep)
    payload = {
        "group": args.group,
        "elements": list(group.labels),
        "block_length": report.block_length,
        "class": report.class_label,
        "residual": report.residual,
        "virtual": {g: matrix_payload(v) for g, v in report.virtual.items()},
        "phases": {g: [float(np.real(c)), float(np.imag(c))] for g, c in report.phases.items()},
        "cocycle": [[g, h, float(np.real(w)), float(np.imag(w))]
                    for (g, h), w in sorted(report.cocycle.items())],
        "beta": [[g, h, float(np.real(b)), float(np.imag(b))]
                 for (g, h), b in sorted(report.beta.items())],
        "status": "ok",
    }
    return None, None, payload, None


# ------------------------------------------------------------------- plumbing


def build_parser():
    parser = Parser(
        prog="tnlab",
        description=__doc__.splitlines()[0],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"tnlab {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=Parser)

    def common(p, fmt_default="csv"):
        p.add_argument("--seed", type=int, default=0, help="global RNG seed (default 0)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default,
                       help=f"report format (default {fmt_default})")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for independent instances (default 1)")
        p.add_argument("--plot", action="store_true",
                       help="also render a figure next to the report (PNG)")

    p = sub.add_parser(
        "mps",
        help="build, inspect, and evaluate matrix product states",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_document_columns([
            ("id", "instance id (always 0 for single-instance actions)"),
            ("n_sites", "chain length of the built MPS"),
            ("d", "physical dimension"),
            ("max_bond", "largest bond dimension"),
            ("reconstruction_error", "relative dense-reconstruction error"),
            ("cut", "bipartition after this many sites (entropy action)"),
            ("entropy", "von Neumann entropy in nats"),
            ("bond", "bond dimension at the cut (open chains)"),
            ("log_bond", "natural log of the bond dimension"),
            ("site", "site of the local operator, or 'mpo'"),
            ("value_re/value_im", "normalized expectation value"),
            *STATUS_NOTE,
        ]),
    )
    p.add_argument("action", choices=("from-state", "entropy", "expval"))
    p.add_argument("--state", help="TNT v1 state vector (from-state)")
    p.add_argument("--d", type=int, help="physical dimension of the input state")
    p.add_argument("--threshold", type=float, default=0.0,
                   help="relative truncation threshold for from-state (default 0)")
    p.add_argument("--save", help="write the built MPS here (from-state)")
    p.add_argument("--mps", help="MPS v1 input file (entropy, expval)")
    p.add_argument("--cut", default="all", help="cut list, e.g. 3 or 1..5 (default all)")
    p.add_argument("--op", help="TNT v1 matrix or MPO v1 file (expval)")
    p.add_argument("--site", type=int, help="site for a local operator (expval)")
    common(p)
    p.set_defaults(run=run_mps)

    p = sub.add_parser(
        "wielandt-scan",
        help="exhaustive primitivity-index scan over 0/1 patterns",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_document_columns([
            ("id", "pattern id; bit k of id is entry (k // D, k % D)"),
            ("D", "matrix dimension"),
            ("d", "unused for classical patterns (empty)"),
            ("index", "primitivity index (empty when not primitive)"),
            ("bound", "Wielandt bound D^2 - 2D + 2"),
            ("verdict", "found | not-found"),
            *STATUS_NOTE,
        ]),
    )
    p.add_argument("--dim", type=int, required=True, help="matrix dimension D (2..4)")
    common(p)
    p.set_defaults(run=run_wielandt_scan)

    p = sub.add_parser(
        "primitivity",
        help="primitivity index of a quantum channel",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_document_columns([
            ("id", "instance id (0)"),
            ("D", "channel dimension"),
            ("d", "number of Kraus operators"),
            ("index", "primitivity index (empty when none found)"),
            ("bound", "quantum Wielandt bound 2(D-1)^2"),
            ("verdict", "found | not-found | indeterminate"),
            *STATUS_NOTE,
        ]),
    )
    p.add_argument("--channel", required=True, help="TNT v1 Kraus stack (kraus,row,col)")
    p.add_argument("--n-max", type=int, help="override the search horizon")
    common(p)
    p.set_defaults(run=run_primitivity)

    p = sub.add_parser(
        "injectivity",
        help="injectivity index of an MPS site tensor",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_document_columns([
            ("id", "instance id (0)"),
            ("D", "bond dimension"),
            ("d", "physical dimension"),
            ("index", "injectivity index (empty when none found)"),
            ("bound", "min of 2D^2(6+log2 D) and (D^2-d+1)D^2"),
            ("verdict", "found | not-found | indeterminate"),
            *STATUS_NOTE,
        ]),
    )
    p.add_argument("--mps", required=True,
                   help=f"TNT v1 site tensor (left,phys,right) or builtin: {', '.join(MPS_BUILTINS)}")
    p.add_argument("--n-max", type=int, help="override the search horizon")
    common(p)
    p.set_defaults(run=run_injectivity)

    p = sub.add_parser(
        "parent-gap",
        help="low spectrum of the parent Hamiltonian on rings",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_document_columns([
            ("L", "ring size"),
            ("E0", "lowest eigenvalue"),
            ("E1", "first level above the ground multiplet (E0 + gap)"),
            ("degeneracy", "ground-state degeneracy"),
            ("gap", "E1 - E0"),
            ("solver_residual", "max |H v - lambda v| over returned pairs"),
            *STATUS_NOTE,
        ]),
    )
    p.add_argument("--mps", required=True,
                   help=f"TNT v1 site tensor or builtin: {', '.join(MPS_BUILTINS)}")
    p.add_argument("--region", default="auto",
                   help="projector region size, or 'auto' for i(A)+1 (default auto)")
    p.add_argument("--sizes", default="4..8", help="ring sizes, e.g. 4..10 (default 4..8)")
    common(p)
    p.set_defaults(run=run_parent_gap)

    p = sub.add_parser(
        "dl-check",
        help="detectability-lemma bound against the exact gap",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_document_columns([
            ("L", "even ring size"),
            ("ell", "number of DL rounds"),
            ("lhs", "operator norm of Pi_GS - DL^ell"),
            ("rhs", "(gap/4 + 1)^(-ell/2)"),
            ("margin", "rhs - lhs (bound holds when margin >= -1e-8)"),
            *STATUS_NOTE,
        ]),
    )
    p.add_argument("--model", default="ising",
                   help="ising | aklt | path to a TNT v1 pair projector (default ising)")
    p.add_argument("--L", default="6", help="even ring sizes, e.g. 4,6,8 (default 6)")
    p.add_argument("--ell", default="1..6", help="DL rounds, e.g. 1..8 (default 1..6)")
    common(p)
    p.set_defaults(run=run_dl_check)

    p = sub.add_parser(
        "boundary-fit",
        help="boundary state of a PEPS region and its Gibbs-decay fit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="JSON fields: region, torus, n_sites, site_dim, min_eigenvalue,\n"
               "support_rank, support_deficient, identity_coefficient, single_norms,\n"
               "two_body_norms (list of [i, j, norm]), pairs (list of [i, j,\n"
               "loop-distance, norm]), J, alpha, residual, status.  alpha is null\n"
               "when the fit is degenerate (fewer than two distinct distances\n"
               "survive the norm floor).",
    )
    p.add_argument("--peps", required=True,
                   help=f"TNT v1 PEPS tensor or builtin: {', '.join(PEPS_BUILTINS)}")
    p.add_argument("--L", type=int, default=3, help="torus side (default 3)")
    p.add_argument("--region", type=int, default=2,
                   help="region side n; the fit needs 4n >= 6 boundary sites (default 2)")
    common(p, fmt_default="json")
    p.set_defaults(run=run_boundary_fit)

    p = sub.add_parser(
        "spt-classify",
        help="abelian SPT class of a normal MPS under an on-site symmetry",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="JSON fields: group, elements, block_length, class (trivial |\n"
               "nontrivial), residual, virtual (per-element V as re/im), phases\n"
               "(per-element [re, im]), cocycle and beta (lists of [g, h, re, im]).\n"
               "Reps files are REPS v1 JSON; generator images are completed to the\n"
               "whole group automatically.",
    )
    p.add_argument("--mps", required=True,
                   help=f"TNT v1 site tensor or builtin: {', '.join(MPS_BUILTINS)}")
    p.add_argument("--group", default="z2z2", help="z2z2 or zN, N <= 16 (default z2z2)")
    p.add_argument("--reps", required=True,
                   help="REPS v1 file, or builtin: cluster (X x 1, 1 x X), aklt (pi rotations)")
    common(p, fmt_default="json")
    p.set_defaults(run=run_spt_classify)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        overrides = apply_cap_overrides(os.environ)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    start = time.monotonic()
    try:
        columns, rows, payload, plot = args.run(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileFormatError, OSError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SizeLimitError as exc:
        # a cap hit before any row existed still yields a report, exit 0
        columns = ["status", "note"]
        rows = [{"status": "size-limited", "note": str(exc)}]
        payload, plot = None, None
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA

    header = {
        "tool": f"tnlab {__version__}",
        "subcommand": args.cmd,
        "seed": args.seed,
        "config": _config_echo(args),
    }
    if overrides:
        header["cap_overrides"] = " ".join(f"{k}={v}" for k, v in sorted(overrides.items()))
    header["wall_time_s"] = f"{time.monotonic() - start:.3f}"

    if payload is not None:
        if args.format == "csv":
            print("usage error: this subcommand reports JSON only", file=sys.stderr)
            return EXIT_USAGE
        text = render_json(header, payload)
        exit_code = EXIT_OK if payload.get("status", "ok") == "ok" else EXIT_DATA
    else:
        if args.format == "json":
            text = render_json(header, {"columns": columns, "rows": rows})
        else:
            text = render_csv(header, columns, rows)
        exit_code = EXIT_OK
        if any(row.get("status") == "error" for row in rows):
            exit_code = EXIT_DATA

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    if args.plot:
        if plot is None:
            print("note: no figure for this subcommand", file=sys.stderr)
        else:
            base = os.path.splitext(args.out)[0] if args.out else f"tnlab-{args.cmd}"
            path = plot(base + ".png")
            print(f"wrote figure {path}", file=sys.stderr)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
