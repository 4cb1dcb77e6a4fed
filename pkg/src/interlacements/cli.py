"""
Command line entry point: ``python3 -m interlacements <command>``.

Vertex sets are given as ``ids:0,3,5`` (vertex indices), ``ball:R`` (generated
families: lattice or biased-Z coordinates with sup-norm at most R, tree depth
at most R) or ``all``. Exit status is 0 when every check passes, 1 when a check
fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import criteria, harness
from . import potential as pot
from . import sampler as smp
from .graph import (GraphError, dumps_graph, make_biased_z, make_exhaustion, make_lattice_box,
                    make_regular_tree, read_graph)

DEFAULT_SEED = 1
FAMILIES = ("biased_z", "tree", "lattice")


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# parsing helpers


def parse_params(items) -> dict:
    out = {}
    for it in items or ():
        if "=" not in it:
            raise UsageError(f"parameter {it!r} is not key=value")
        k, v = it.split("=", 1)
        out[k.strip()] = int(v) if v.strip().lstrip("-").isdigit() else float(v)
    return out


def make_family_graph(family: str, params: dict):
    if family == "biased_z":
        return make_biased_z(int(params.get("radius", 4)))[0]
    if family == "tree":
        return make_regular_tree(int(params.get("branching", 2)), int(params.get("depth", 3)))
    if family == "lattice":
        return make_lattice_box(int(params.get("dimension", 3)), int(params.get("radius", 3)))
    raise UsageError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def load_graph(family=None, params=None, graph_file=None):
    if graph_file:
        return read_graph(graph_file)
    if family:
        return make_family_graph(family, params or {})
    raise UsageError("give a graph file or a family")


def _radius_of(label) -> int:
    if isinstance(label, tuple):
        return max((abs(int(c)) for c in label), default=0)
    return abs(int(label))


def _label_text(label) -> str:
    if isinstance(label, tuple):
        return " ".join(map(str, label))
    return str(label)


def resolve_set(graph, text: str) -> list[int]:
    text = str(text).strip()
    if text == "all":
        return list(range(graph.n))
    if text.startswith("ball:"):
        r = int(text[5:])
        fam = graph.meta.get("family") if graph.meta else None
        if fam == "tree":
            return [i for i, lab in enumerate(graph.labels) if len(lab) <= r]
        return [i for i, lab in enumerate(graph.labels) if _radius_of(lab) <= r]
    if text.startswith("ids:"):
        text = text[4:]
    try:
        ids = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse vertex set {text!r}") from exc
    if not ids or any(not 0 <= i < graph.n for i in ids):
        raise UsageError(f"vertex set {text!r} is empty or out of range")
    return ids


def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    cfg = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected key = value")
        k, v = line.split("=", 1)
        cfg[k.strip()] = v.strip()
    return cfg


def _floats(s) -> list[float]:
    return [float(v) for v in str(s).split(",") if v.strip()]


def _ints(s) -> list[int]:
    return [int(v) for v in str(s).split(",") if v.strip()]


def _write(out: Path | None, name: str, text: str):
    if out is None:
        sys.stdout.write(text)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


# --------------------------------------------------------------------------
# operations (shared by subcommands and config runs)


def op_graph(cfg, out):
    g = load_graph(cfg.get("family"), cfg.get("params"), cfg.get("graph_file"))
    _write(out, "graph.txt", dumps_graph(g))
    return True


def op_potential(cfg, out):
    g = load_graph(cfg.get("family"), cfg.get("params"), cfg.get("graph_file"))
    K = resolve_set(g, cfg.get("K", "ball:0"))
    prof = pot.equilibrium(g, K)
    H = pot.hinge(g, K)
    lines = ["vertex,label,escape,equilibrium,harmonic"]
    for i, v in enumerate(prof.K):
        lines.append(f"{v},{_label_text(g.label(v))},{prof.escape[i]:.17g},{prof.e[v]:.17g},{prof.harm[v]:.17g}")
    _write(out, "equilibrium.csv", "\n".join(lines) + "\n")
    rows = ["x,y,h"] + [f"{x},{y},{H.h[i, j]:.17g}" for i, x in enumerate(H.K) for j, y in enumerate(H.K)
                        if H.h[i, j] != 0]
    _write(out, "hinge.csv", "\n".join(rows) + "\n")
    _write(out, "summary.txt", f"capacity = {prof.cap:.17g}\nsize = {len(prof.K)}\n"
                               f"hinge_asymmetry = {H.asymmetry():.17g}\n")
    return True


def op_sample(cfg, out):
    g = load_graph(cfg.get("family"), cfg.get("params"), cfg.get("graph_file"))
    K = resolve_set(g, cfg.get("K", "ball:0"))
    n = int(cfg.get("samples", 10))
    rng = smp.RngStream(int(cfg.get("seed", DEFAULT_SEED)), 0)
    u = float(cfg.get("u", 1.0))
    traj_parts, field_rows = [], ["draw,vertex,indicator,traj_count,visit_count"]
    for d in range(n):
        w = smp.sample_window(g, K, rng, u=u)
        traj_parts.append(f"# draw {d}\n" + smp.dumps_trajectories(w))
        for i, v in enumerate(w.K):
            field_rows.append(f"{d},{v},{w.indicator[i]},{w.traj_count[i]},{w.visit_count[i]}")
    _write(out, "trajectories.txt", "".join(traj_parts))
    _write(out, "fields.csv", "\n".join(field_rows) + "\n")
    return True


def _exhaustion(cfg):
    fam = cfg.get("family") or "tree"
    levels = _ints(cfg.get("levels", "2,3,4,5,6"))
    params = dict(cfg.get("params") or {})
    return make_exhaustion(fam, levels, **params)


def _site(cfg):
    """Site label: JSON (``0``, ``[0,0,0]``, ``[]``) or the family origin by default."""
    fam = cfg.get("family") or "tree"
    x = cfg.get("x")
    if x not in (None, "", "origin"):
        v = json.loads(x)
        return tuple(v) if isinstance(v, list) else v
    if fam == "tree":
        return ()
    if fam == "biased_z":
        return 0
    return (0,) * int((cfg.get("params") or {}).get("dimension", 3))


def op_criteria(cfg, out):
    ex = _exhaustion(cfg)
    x = _site(cfg)
    kind = cfg.get("kind", "strong")
    if kind in ("strong", "weak"):
        eps = float(cfg.get("eps", 0.3))
        tr = criteria.strong_criterion(ex, x, eps) if kind == "strong" else \
            criteria.weak_criterion(ex, x, eps, assert_vanishing=False)
        _write(out, f"{kind}.csv", tr.to_csv())
        _write(out, f"{kind}_report.txt", tr.report())
        expect = cfg.get("expect")
        return expect is None or tr.verdict == expect
    if kind == "cap_identity":
        res = criteria.cap_identity(ex, x)
        _write(out, "cap_identity.txt", "".join(f"{r:.17g}\n" for r in res))
        return max(res) <= 1e-10
    if kind == "atoms":
        tr = criteria.atom_flow(ex, cfg.get("A", "-"), cfg.get("B", "+"))
        _write(out, "atoms.csv", tr.to_csv())
        expect = cfg.get("expect")
        return expect is None or tr.verdict == expect
    raise UsageError(f"unknown criteria kind {kind!r}")


def op_test(cfg, out):
    name = cfg.get("test", "vacancy")
    g = load_graph(cfg.get("family"), cfg.get("params"), cfg.get("graph_file"))
    K = resolve_set(g, cfg.get("K", "ball:0"))
    n = int(cfg.get("samples", 10_000))
    seed = int(cfg.get("seed", DEFAULT_SEED))
    if name == "vacancy":
        reports = [harness.vacancy_test(g, K, n, seed, u=float(cfg.get("u", 1.0)),
                                        multiplier=float(cfg.get("multiplier", harness.SIGMA)))]
    elif name == "fkg":
        reports = harness.fkg_suite(g, K, harness.catalog(K), n, seed)
    elif name in ("consistency", "extension"):
        L = resolve_set(g, cfg.get("L", "ball:1"))
        fn = harness.consistency_test if name == "consistency" else harness.extension_test
        reports = fn(g, K, L, n, seed)
    elif name == "hinge":
        reports = harness.hinge_test(g, K, n, seed)
    elif name == "levels":
        mono, reports = harness.levels_test(g, K, _floats(cfg.get("levels", "0.5,1,2")), n, seed)
        if not mono:
            _write(out, "monotone.txt", "monotone = False\n")
            return False
    elif name == "bridge":
        x = int(cfg.get("x", K[0]))
        reports = harness.bridge_test(g, K, x, n, seed)
    else:
        raise UsageError(f"unknown test {name!r}")
    _write(out, f"{name}.txt", "\n".join(r.to_text() for r in reports))
    for r in reports:
        print(r.line())
    return all(r.passed for r in reports)


def op_suite(cfg, out):
    seed = int(cfg.get("seed", DEFAULT_SEED))
    samples = cfg.get("samples")
    samples = int(samples) if samples not in (None, "") else None
    only = set(_ints(cfg["only"])) if cfg.get("only") else None
    checks = harness.run_battery(seed, samples, only)
    summary = []
    for c in checks:
        print(c.summary())
        for line in c.lines:
            print("    " + line)
        summary.append(c.summary())
        body = "\n".join(line for line in c.lines if not line.startswith(("[PASS] runtime", "[FAIL] runtime", "runtime ")))
        _write(out, f"criterion_{c.number:02d}.txt", body + "\n")
        for name, text in sorted(c.artifacts.items()):
            _write(out, name, text)
        if out is not None:
            with open(out / "timing.txt", "a") as fh:
                fh.write(f"criterion {c.number}: {c.seconds:.3f}s\n")
    _write(out, "summary.txt", "\n".join(summary) + "\n")
    return all(c.passed for c in checks)


OPS = {
    "graph": op_graph,
    "potential": op_potential,
    "sample": op_sample,
    "criteria": op_criteria,
    "test": op_test,
    "suite": op_suite,
}


def run(config: dict, out: Path | None = None) -> int:
    """Execute a flat config. Returns 0 if all checks pass, 1 on failure, 2 on unknown op."""
    cfg = dict(config)
    op = cfg.pop("op", None)
    if op not in OPS:
        print(f"unknown op {op!r}; choose from {', '.join(OPS)}", file=sys.stderr)
        return 2
    params = {k[len("param."):]: v for k, v in cfg.items() if k.startswith("param.")}
    cfg["params"] = parse_params(f"{k}={v}" for k, v in params.items())
    if out is None and cfg.get("out"):
        out = Path(cfg["out"])
    try:
        return 0 if OPS[op](cfg, out) else 1
    except (UsageError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


# --------------------------------------------------------------------------
# argparse front end


def _common(p, graph=True):
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--config", type=Path, help="flat key = value file; command-line flags win")
    if graph:
        p.add_argument("--family", choices=FAMILIES)
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
        p.add_argument("--graph-file", dest="graph_file")
        p.add_argument("--K", dest="K")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="interlacements",
                                 description="Random interlacements on killed weighted graphs.")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("graph", help="generate a graph and write it in text format"))
    _common(sub.add_parser("potential", help="equilibrium measure, capacity and hinge"))
    p = sub.add_parser("sample", help="draw window samples")
    _common(p)
    p.add_argument("--u", type=float)
    p = sub.add_parser("criteria", help="strong/weak criteria, capacity identity, atom flows")
    _common(p)
    p.add_argument("--kind", choices=("strong", "weak", "cap_identity", "atoms"))
    p.add_argument("--levels")
    p.add_argument("--eps", type=float)
    p.add_argument("--x")
    p.add_argument("--A")
    p.add_argument("--B")
    p.add_argument("--expect")
    p = sub.add_parser("test", help="one Monte Carlo test")
    _common(p)
    p.add_argument("name", nargs="?", choices=("vacancy", "fkg", "consistency", "extension",
                                               "hinge", "levels", "bridge"))
    p.add_argument("--L", dest="L")
    p.add_argument("--levels")
    p.add_argument("--x")
    p = sub.add_parser("suite", help="run the acceptance battery")
    _common(p, graph=False)
    p.add_argument("--only", help="comma separated criterion numbers")
    p = sub.add_parser("run", help="execute a config file")
    p.add_argument("config_file", type=Path)
    p.add_argument("--out", type=Path)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "run":
        try:
            cfg = parse_config(args.config_file.read_text())
        except (OSError, UsageError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return run(cfg, args.out)
    cfg = {}
    if getattr(args, "config", None):
        cfg.update(parse_config(args.config.read_text()))
    cfg["op"] = args.command
    ns = vars(args)
    if args.command == "test" and ns.get("name"):
        cfg["test"] = ns["name"]
    for key in ("seed", "samples", "family", "graph_file", "K", "L", "u", "kind", "levels",
                "eps", "x", "A", "B", "expect", "only"):
        val = ns.get(key)
        if val is not None:
            cfg[key] = str(val)
    for item in ns.get("param") or ():
        k, _, v = item.partition("=")
        cfg[f"param.{k}"] = v
    return run(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
