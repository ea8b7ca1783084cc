"""Command-line front end: experiments, bound reports, verification suites.

Configuration precedence is CLI flags > config file > preset > defaults.
The master seed defaults to a fixed constant so every run is reproducible
unless randomness is explicitly requested (`--seed random`).  Each command
that writes files also writes a manifest with content digests; a manifest
plus this tool reproduces the outputs byte-for-byte.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import secrets
import sys
from pathlib import Path

from . import __version__, bounds, mc
from .alloc import SmaParams, compute_network_params
from .core import SeedPath
from .datadep import InputSet, pair_collision_log_prob, search_orthogonal_map, verify_map
from .errors import SearchFailure, SmaError, UsageError
from .mc import ExperimentConfig

DEFAULT_SEED = 20240817

DEFAULTS = {
    "n": 10000,
    "p": 2.5e-3,
    "c1": 0.5,
    "c2": 0.57,
    "rn": 100,
    "gamma": None,
    "trials": 10,
    "seed": DEFAULT_SEED,
    "densities": [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5],
    "distances": [1, 3, 10, 30, 100],
    "threads": 1,
    "out": ".",
}

PRESETS = {
    # parameters of the published simulation figures
    "paper-fig1a": {"n": 100000, "p": 2.5e-3, "c1": 0.5, "c2": 0.57, "trials": 10},
    "paper-fig1b": {"n": 100000, "p": 2.5e-3, "c1": 0.5, "c2": 0.57, "trials": 10,
                    "distances": [1, 3, 10, 30, 100]},
    # quick desk-scale variants
    "smoke-fig1a": {"n": 5000, "p": 0.01, "trials": 5},
    "smoke-fig1b": {"n": 5000, "p": 0.01, "trials": 5, "distances": [1, 10, 100]},
}


def _parse_floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _parse_ints(text):
    return [int(v) for v in text.replace(",", " ").split()]


def _read_config_file(path):
    """Flat key=value file; keys mirror the flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(key, value):
    if isinstance(value, str):
        if key in ("n", "rn", "trials", "threads"):
            return int(value)
        if key in ("p", "c1", "c2", "gamma"):
            return float(value)
        if key == "densities":
            return _parse_floats(value)
        if key == "distances":
            return _parse_ints(value)
        if key == "seed":
            return value if value == "random" else int(value)
    return value


def resolve_config(args):
    """Overlay defaults < preset < config file < explicit CLI flags."""
    cfg = dict(DEFAULTS)
    preset = getattr(args, "preset", None)
    if preset:
        if preset not in PRESETS:
            raise UsageError(f"unknown preset {preset!r}; available: {sorted(PRESETS)}")
        cfg.update(PRESETS[preset])
    if getattr(args, "config", None):
        for key, value in _read_config_file(args.config).items():
            if key not in DEFAULTS:
                raise UsageError(f"unknown config key {key!r}")
            cfg[key] = _coerce(key, value)
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = _coerce(key, flag)
    if cfg["seed"] == "random":
        cfg["seed"] = secrets.randbits(63)
    if cfg["threads"] < 1:
        raise UsageError(f"threads must be >= 1, got {cfg['threads']}")
    import numba
    # requesting more threads than the machine has is not an error, just a cap
    numba.set_num_threads(min(cfg["threads"], numba.config.NUMBA_NUM_THREADS))
    return cfg


def _fmt(value):
    # full round-trip precision for floats
    return repr(float(value)) if isinstance(value, float) else str(value)


class ManifestWriter:
    def __init__(self, command, cfg, out_dir):
        self.command = command
        self.cfg = cfg
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.started = datetime.datetime.now(datetime.timezone.utc).isoformat()
        self.outputs = {}
        self.notes = []

    def write_csv(self, name, header, rows):
        path = self.out_dir / name
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        data = ("\n".join(lines) + "\n").encode()
        path.write_bytes(data)
        self.outputs[name] = hashlib.sha256(data).hexdigest()
        return path

    def finish(self):
        manifest = {
            "tool": f"sma {__version__}",
            "command": self.command,
            "config": {k: v for k, v in self.cfg.items()},
            "master_seed": self.cfg.get("seed"),
            "started": self.started,
            "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "outputs": self.outputs,
            "notes": self.notes,
        }
        path = self.out_dir / f"{self.command}.manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


def _experiment_config(cfg):
    return ExperimentConfig(
        allocator_kind="neural", n=cfg["n"], trials=cfg["trials"],
        master_seed=cfg["seed"], density_grid=tuple(cfg["densities"]),
        distance_grid=tuple(cfg["distances"]), p=cfg["p"], c1=cfg["c1"],
        c2=cfg["c2"], gamma=cfg["gamma"], r_n=cfg["rn"])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_stability(args):
    cfg = resolve_config(args)
    manifest = ManifestWriter("stability", cfg, cfg["out"])
    rows = mc.stability_curve(_experiment_config(cfg))
    if cfg["trials"] < 2:
        manifest.notes.append("degenerate: trials < 2, std-error columns are zero")
        print("warning: trials < 2, std-error columns are degenerate", file=sys.stderr)
    table = [(r.input_density, r.layer2_density.mean, r.layer2_density.std_error,
              r.output_density.mean, r.output_density.std_error, cfg["trials"])
             for r in rows]
    path = manifest.write_csv(
        "stability.csv",
        ["input_density", "layer2_mean", "layer2_se", "output_mean", "output_se", "trials"],
        table)
    manifest.finish()
    print(f"wrote {path}")
    return 0


def cmd_expansion(args):
    cfg = resolve_config(args)
    manifest = ManifestWriter("expansion", cfg, cfg["out"])
    rows = mc.expansion_curve(_experiment_config(cfg))
    table = sorted(
        ((r.input_density, r.distance, r.expansion_rate.mean,
          r.expansion_rate.std_error, cfg["trials"]) for r in rows),
        key=lambda row: (row[0], row[1]))
    path = manifest.write_csv(
        "expansion.csv",
        ["input_density", "L", "expansion_mean", "expansion_se", "trials"],
        table)
    manifest.finish()
    print(f"wrote {path}")
    return 0


def _bound_report(args):
    name = args.name

    def need(*keys):
        missing = [k for k in keys if getattr(args, k, None) is None]
        if missing:
            raise UsageError(f"bounds {name} requires --" + " --".join(missing))
        return [getattr(args, k) for k in keys]

    if name == "entropy":
        (q,) = need("q")
        return bounds.BoundReport(name, {"q": q}, bounds.entropy(q), log_domain=False)
    if name == "theorem1":
        eps, slack = need("eps_n", "slack")
        value = bounds.capacity_from_pairwise_error(eps, slack)
        return bounds.BoundReport(name, {"eps_n": eps, "slack": slack}, value,
                                  log_domain=False, asserted=False,
                                  notes="slack stands in for the vanishing sequence")
    if name == "theorem2":
        n, r, delta, mu, lam = need("n", "r", "delta", "mu", "lam")
        value = bounds.error_prob_lower_bound(n, r, delta, mu, lam)
        return bounds.BoundReport(name, {"n": n, "r": r, "delta": delta,
                                         "mu": mu, "lam": lam}, value,
                                  log_domain=True, asserted=False,
                                  notes="main term; hidden constant not asserted")
    if name in ("theorem3", "theorem4"):
        n, r, b = need("n", "r", "b")
        fn = bounds.capacity_upper_bound if name == "theorem3" else bounds.datadep_capacity_lower
        return bounds.BoundReport(name, {"n": n, "r": r, "b": b}, fn(n, r, b),
                                  log_domain=True,
                                  notes="main term; vanishing correction omitted")
    if name == "theorem5":
        n, r, s0, gamma, eps, t = need("n", "r", "s0", "gamma", "epsilon", "t")
        tb = bounds.theorem5_tail_bounds(n, r, s0, gamma, eps, t,
                                         z0=args.z0, a=args.a, distance=args.distance)
        return bounds.BoundReport(name, {"n": n, "r": r, "s0": s0, "gamma": gamma,
                                         "epsilon": eps, "t": t, "z0": args.z0,
                                         "a": args.a, "distance": args.distance},
                                  {"stability": tb.stability, "continuity": tb.continuity,
                                   "orthogonality": tb.orthogonality, "b": tb.b},
                                  log_domain=False, asserted=False,
                                  notes="holds for large n; constants calibrated, not asserted")
    if name == "lemma1":
        m, p = need("m", "p")
        p_zero, p_one = bounds.lemma1_exact(int(m), p)
        return bounds.BoundReport(name, {"m": m, "p": p},
                                  {"p_zero": p_zero, "p_one": p_one}, log_domain=False)
    if name == "lemma2":
        m, p = need("m", "p")
        gap, flip = bounds.lemma12_bounds(int(m), p)
        return bounds.BoundReport(name, {"m": m, "p": p},
                                  {"stability_gap_bound": gap, "onebit_flip_bound": flip},
                                  log_domain=False)
    if name == "lemma3":
        wx, wy, overlap = need("wx", "wy", "overlap")
        res = bounds.lemma3_flip_prob(wx, wy, overlap)
        return bounds.BoundReport(name, {"wx": wx, "wy": wy, "overlap": overlap},
                                  res.value, log_domain=False,
                                  notes="correlation clamped" if res.clamped else "")
    if name == "lemma4":
        n, c, p, eta = need("n", "c", "p", "eta")
        value = bounds.lemma4_flip_prob(n, c, p, eta)
        return bounds.BoundReport(name, {"n": n, "c": c, "p": p, "eta": eta},
                                  value, log_domain=False)
    raise UsageError(f"unknown bound name {name!r}")


def cmd_bounds(args):
    report = _bound_report(args)
    if args.json:
        print(json.dumps(report.as_dict(), sort_keys=True))
        return 0
    print(f"name: {report.name}")
    for key, value in report.inputs.items():
        print(f"input.{key}: {_fmt(value)}")
    if isinstance(report.value, dict):
        for key, value in report.value.items():
            print(f"value.{key}: {_fmt(value)}")
    else:
        print(f"value: {_fmt(report.value)}")
    print(f"log_domain: {'yes' if report.log_domain else 'no'}")
    print(f"asserted: {'yes' if report.asserted else 'no'}")
    if report.notes:
        print(f"notes: {report.notes}")
    return 0


def cmd_datadep(args):
    cfg = resolve_config(args)
    n, r_n, b_n = cfg["n"], cfg["rn"], args.b
    set_size = args.set_size
    seed = SeedPath(cfg["seed"])
    items = [mc.random_bitvector(n, 0.5, seed.child("item", i)) for i in range(set_size)]
    input_set = InputSet(n=n, items=items)
    try:
        result = search_orthogonal_map(input_set, r_n, b_n, args.max_attempts,
                                       seed.child("search"))
    except SearchFailure as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return 1
    ok, violations = verify_map(result, input_set, r_n, b_n)
    if not ok:
        print("returned map failed verification:", violations, file=sys.stderr)
        return 1
    manifest = ManifestWriter("datadep", cfg, cfg["out"])
    table = [(i, image.weight, " ".join(map(str, image.active_indices())))
             for i, image in enumerate(result.assignments)]
    path = manifest.write_csv("datadep.csv", ["item", "weight", "image_indices"], table)
    manifest.finish()
    log_q = pair_collision_log_prob(n, r_n, b_n)
    print(f"placed {set_size} items in {result.attempts_used} attempts "
          f"(pair close-collision log-prob {log_q:.3f}); wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------

class _Suite:
    def __init__(self):
        self.rows = []

    def check(self, name, empirical, analytic, tolerance, ok):
        self.rows.append((name, empirical, analytic, tolerance, bool(ok)))

    def report(self):
        width = max(len(r[0]) for r in self.rows) + 2
        for name, emp, ana, tol, ok in self.rows:
            verdict = "PASS" if ok else "FAIL"
            print(f"{name:<{width}} empirical={emp:<12.6g} analytic={ana:<12.6g} "
                  f"tolerance={tol:<10.4g} {verdict}")
        return all(r[4] for r in self.rows)


def _suite_lemmas(suite, trials, seed):
    checks = [
        (1, {"m": 400, "p": 0.01}),
        (2, {"m": 400, "p": 0.01}),
        (3, {"wx": 1000, "wy": 1000, "wxy": 900, "p": 0.05}),
        (4, {"n": 100000, "c": 0.5, "p": 2.5e-3, "eta": 0.1}),
    ]
    for lemma_id, params in checks:
        res = mc.lemma_check(lemma_id, params, trials, seed.child("lemma", lemma_id))
        if res.analytic_is_bound:
            ok = res.empirical.mean <= res.analytic + 3 * res.empirical.std_error
            tol = 3 * res.empirical.std_error
        else:
            tol = 0.01 if lemma_id == 3 else 0.02
            ok = res.abs_gap <= tol + 3 * res.empirical.std_error
        suite.check(f"lemma{lemma_id}", res.empirical.mean, res.analytic, tol, ok)


def _suite_selectflip(suite, trials, seed):
    n, r_n = 10000, 500
    x = mc.random_bitvector(n, 0.3, seed.child("x"))
    fails = mc.selectflip_continuity_failures(64, 8, trials, seed.child("cont"))
    suite.check("selectflip-continuity", fails, 0.0, 0.0, fails == 0)

    delta = 0.1
    weights = mc.selectflip_weight_samples(n, r_n, x, trials, seed.child("stab"))
    freq = float(((weights <= (1 - delta) * r_n) | (weights >= (1 + delta) * r_n)).mean())
    chernoff = bounds.selectflip_stability_tail(r_n, delta)
    se = (freq * (1 - freq) / trials) ** 0.5
    suite.check("selectflip-stability", freq, chernoff, 3 * se, freq <= chernoff + 3 * se)

    d = 1000
    y = x.flip(seed.child("toggle").generator().choice(n, size=d, replace=False))
    dists = mc.selectflip_pair_distance_samples(n, r_n, x, y, trials, seed.child("orth"))
    threshold = (1 - delta) * (2 * r_n / n) * d
    freq = float((dists <= threshold).mean())
    chvatal = bounds.selectflip_orthogonality_tail(n, r_n, d, delta)
    se = (freq * (1 - freq) / trials) ** 0.5
    suite.check("selectflip-orthogonality", freq, chvatal, 3 * se, freq <= chvatal + 3 * se)


def _suite_neural(suite, trials, seed):
    n, p = 20000, 2.5e-3
    target = 0.015
    params = compute_network_params(n, p, int(target * n))
    cfg = ExperimentConfig(allocator_kind="neural", n=n, p=p, c1=0.5, c2=params.c2,
                           trials=max(trials, 5), master_seed=seed.master_seed,
                           density_grid=(0.1, 0.3, 0.5))
    rows = mc.stability_curve(cfg)
    for row in rows:
        mid = row.layer2_density.mean
        est = bounds.output_density_estimate(n, params.c2, p, mid)
        gap = abs(row.output_density.mean - est)
        tol = 0.005 + 3 * row.output_density.std_error
        suite.check(f"neural-density@{row.input_density}", row.output_density.mean,
                    est, tol, gap <= tol)
    again = mc.stability_curve(cfg)
    identical = all(a.output_density.mean == b.output_density.mean
                    for a, b in zip(rows, again))
    suite.check("neural-determinism", float(identical), 1.0, 0.0, identical)


def _suite_datadep(suite, trials, seed):
    n, r_n, b_n, set_size = 200, 20, 10, 16
    runs = min(max(trials, 10), 100)
    successes = 0
    for i in range(runs):
        s = seed.child("run", i)
        items = [mc.random_bitvector(n, 0.5, s.child("item", j)) for j in range(set_size)]
        try:
            result = search_orthogonal_map(InputSet(n=n, items=items), r_n, b_n,
                                           10000, s.child("search"))
        except SearchFailure:
            continue
        ok, _ = verify_map(result, InputSet(n=n, items=items), r_n, b_n)
        successes += ok
    suite.check("datadep-success", successes / runs, 0.99, 0.01,
                successes / runs >= 0.99)


SUITES = {
    "lemmas": (_suite_lemmas, 100000),
    "selectflip": (_suite_selectflip, 20000),
    "neural": (_suite_neural, 5),
    "datadep": (_suite_datadep, 100),
}


def cmd_verify(args):
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; "
                         f"choose from {sorted(SUITES)} or 'all'")
    cfg = resolve_config(args)
    seed = SeedPath(cfg["seed"])
    suite = _Suite()
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    for name in names:
        fn, default_trials = SUITES[name]
        fn(suite, args.trials or default_trials, seed.child(name))
    return 0 if suite.report() else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(parser):
    parser.add_argument("--n", type=int)
    parser.add_argument("--p", type=float)
    parser.add_argument("--c1", type=float)
    parser.add_argument("--c2", type=float)
    parser.add_argument("--rn", type=int)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed")
    parser.add_argument("--preset", choices=sorted(PRESETS))
    parser.add_argument("--out")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--config")
    parser.add_argument("--densities", help="comma-separated input densities")
    parser.add_argument("--distances", help="comma-separated Hamming distances")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sma",
        description="Stable memory allocators: simulation, bounds, verification")
    parser.add_argument("--version", action="version", version=f"sma {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stability", help="middle/output density vs input density")
    _add_common(p)
    p.set_defaults(fn=cmd_stability)

    p = sub.add_parser("expansion", help="expansion rate vs input density and distance")
    _add_common(p)
    p.set_defaults(fn=cmd_expansion)

    p = sub.add_parser("bounds", help="evaluate one analytic bound")
    p.add_argument("name")
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--wx", type=int)
    p.add_argument("--wy", type=int)
    p.add_argument("--overlap", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--lam", type=float)
    p.add_argument("--eps-n", type=float, dest="eps_n")
    p.add_argument("--slack", type=float)
    p.add_argument("--s0", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--z0", type=float, default=1.0)
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--distance", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("verify", help="run an acceptance suite")
    p.add_argument("suite")
    _add_common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("datadep", help="search a data-dependent separated map")
    _add_common(p)
    p.add_argument("--b", type=int, default=10)
    p.add_argument("--set-size", type=int, default=16, dest="set_size")
    p.add_argument("--max-attempts", type=int, default=10000, dest="max_attempts")
    p.set_defaults(fn=cmd_datadep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SmaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
