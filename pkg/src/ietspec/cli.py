"""Command line front-end.

    ietspec --config run.json --out results/
    ietspec --task verify

The configuration is one JSON document: ``{"task": ..., "iet": ..., "params":
{...}, "seed": ...}`` with every scalar written as a string.  Data goes to
``--out`` (or standard output), logs to standard error.  Exit status is 0 on
success, 1 for errors raised by the library (reported by code), 2 for usage
and configuration errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import IetError, InvalidPermutationError, ParseError, UndefinedStepError
from .iet import Iet, Permutation, golden_rotation, induce, orbit_symbols, rotation
from .rauzy import (
    build_tower,
    capture_lengths,
    candidate_report,
    periodic_iet,
    rauzy_class,
    rauzy_orbit,
    rauzy_step,
    rauzy_step_via_induce,
    tower_reports,
)
from .scalar import format_scalar, parse_scalar
from .serialize import dumps, iet_from_json
from .spectral import (
    Potential,
    band_spectrum,
    default_potential,
    fibonacci_traces,
    finite_box_eigenvalues,
    gordon_nondecay_check,
    hull_invariance_check,
    lyapunov_estimate,
    trace_map_invariant,
)
from .symbolic import build_cylinders, condition_b_scores, gordon_scan

log = logging.getLogger("ietspec")

TASKS = (
    "rauzy-orbit", "classes", "tower", "candidates", "itinerary", "cylinders",
    "condition-b", "gordon-scan", "gordon-tower", "spectrum", "eigenbox",
    "lyapunov", "hull-check", "fibonacci-check", "verify",
)


class UsageError(Exception):
    pass


@dataclass
class Output:
    """Named payloads produced by a task: ``.json`` payloads are dicts, ``.csv`` are text."""

    files: dict


def _scalar(params, key, default=None, d=None):
    raw = params.get(key, default)
    if raw is None:
        raise UsageError(f"missing parameter {key!r}")
    return parse_scalar(str(raw), d)


def _iet(config) -> Iet:
    if "iet" not in config:
        raise UsageError("configuration needs an 'iet' entry")
    return iet_from_json(config["iet"])


def _potential(params, n: int) -> Potential:
    spec = params.get("potential")
    if spec is None:
        return default_potential(n, Fraction(str(params.get("coupling", "2"))))
    values = tuple(parse_scalar(str(v)) for v in spec["values"])
    return Potential(values, parse_scalar(str(spec.get("coupling", "1"))))


def _word(raw) -> tuple:
    """``"1212"`` or ``[1, 2, 1, 2]``."""
    return tuple(int(c) for c in raw)


def _point(params, E: Iet, key="x"):
    d = getattr(E.field, "d", None)
    return _scalar(params, key, "0", d)


# tasks ----------------------------------------------------------------------------------


def task_rauzy_orbit(config, params, mode, rng, threads):
    E = _iet(config)
    steps = rauzy_orbit(E.perm, E.lengths.values, int(params.get("steps", 20)))
    rows = [{
        "step": i + 1,
        "type": st.step_type,
        "nu": format_scalar(st.nu),
        "perm": list(st.after_perm.images),
        "lambda": [format_scalar(v) for v in st.after_lengths],
    } for i, st in enumerate(steps)]
    return Output({"rauzy-orbit.json": {"steps": rows}})


def task_classes(config, params, mode, rng, threads):
    if "perm" in params:
        perm = Permutation(tuple(int(i) for i in params["perm"]))
    else:
        perm = _iet(config).perm
    cls = rauzy_class(perm)
    edges = [{"from": list(p.images), "type": kind, "to": list(q.images)} for (p, kind), q in cls.edges.items()]
    return Output({"classes.json": {"size": len(cls), "members": [list(p.images) for p in cls.members],
                                    "edges": edges}})


def _tower(config, params):
    E = _iet(config)
    levels = int(params.get("levels", 3))
    deltas = params.get("deltas")
    if deltas is not None:
        deltas = [parse_scalar(str(x)) for x in deltas]
    cap = int(params.get("step_cap", 10**5))
    return E, levels, deltas, cap


def task_tower(config, params, mode, rng, threads):
    E, levels, deltas, cap = _tower(config, params)
    status = "complete"
    try:
        tower = build_tower(E, levels, deltas, cap)
    except IetError as exc:
        if getattr(exc, "tower", None) is None:
            raise
        tower, status = exc.tower, f"{exc.code}: {exc}"
    rows = [{
        "m": lev.m,
        "N": lev.steps,
        "J": [format_scalar(x) for x in lev.J],
        "delta": format_scalar(lev.delta),
        "perm": list(lev.iet.perm.images),
        "lambda": [format_scalar(v) for v in lev.iet.lengths.values],
    } for lev in tower.levels]
    return Output({"tower.json": {"status": status, "levels": rows}})


def _record_json(rec):
    return {
        "k": rec.k,
        "I": [format_scalar(x) for x in rec.I],
        "L": [format_scalar(x) for x in rec.L],
        "M": None if rec.M is None else [format_scalar(x) for x in rec.M],
        "fraction": format_scalar(rec.fraction),
        "return_time": rec.return_time,
        "length": rec.length,
        "tower_return_time": rec.tower_return_time,
        "certified": rec.certified,
    }


def task_candidates(config, params, mode, rng, threads):
    E, levels, deltas, cap = _tower(config, params)
    eps = parse_scalar(str(params.get("eps", "1/2")))
    strict = bool(params.get("strict", False))
    if strict:
        tower = build_tower(E, levels, deltas, cap)
        reports = [candidate_report(tower, lev.m, eps, strict=True) for lev in tower.levels]
    else:
        tower, reports = tower_reports(E, levels, eps, deltas, cap, certify=True)
    doc = {"levels": [{
        "level": rep.level,
        "bound": format_scalar(rep.bound),
        "meets_bound": rep.meets_bound(),
        "covered_measure": format_scalar(rep.covered_measure),
        "records": [_record_json(r) for r in rep.records],
    } for rep in reports]}
    return Output({"candidates.json": doc})


def task_itinerary(config, params, mode, rng, threads):
    E = _iet(config)
    x = _point(params, E)
    lo, hi = int(params.get("lo", 0)), int(params.get("hi", 99))
    it = orbit_symbols(E, x, lo, hi)
    return Output({"itinerary.json": {"x": format_scalar(x), "lo": lo, "hi": hi,
                                      "symbols": "".join(str(s) if s < 10 else f"({s})" for s in it.symbols)}})


def task_cylinders(config, params, mode, rng, threads):
    E = _iet(config)
    depth = int(params.get("depth", 5))
    tree = build_cylinders(E, depth)
    lines = ["word,lo,hi,length"]
    for word, lo, hi in tree.nodes(depth):
        lines.append(",".join(["".join(map(str, word)), format_scalar(lo), format_scalar(hi),
                               format_scalar(hi - lo)]))
    counts = {"depth": depth, "complexity": list(tree.counts)}
    return Output({"cylinders.csv": "\n".join(lines) + "\n", "cylinders.json": counts})


def task_condition_b(config, params, mode, rng, threads):
    E = _iet(config)
    tree = build_cylinders(E, int(params.get("depth", 100)))
    threshold = params.get("threshold")
    rep = condition_b_scores(tree, None if threshold is None else parse_scalar(str(threshold)))
    return Output({"condition-b.csv": rep.to_csv(), "condition-b.json": rep.to_json()})


def task_gordon_scan(config, params, mode, rng, threads):
    E = _iet(config)
    x = _point(params, E)
    max_k = int(params.get("max_k", 1000))
    lo = int(params.get("lo", -max_k))
    hi = int(params.get("hi", 2 * max_k - 1))
    cert = gordon_scan(orbit_symbols(E, x, lo, hi), max_k)
    doc = cert.to_json()
    if "energies" in params:
        V = _potential(params, E.n)
        energies = [float(parse_scalar(str(e))) for e in params["energies"]]
        rep = gordon_nondecay_check(energies, cert, V)
        doc["nondecay"] = {"checks": rep.checks, "violations": len(rep.violations),
                           "min_log_margin": rep.min_log_margin, "message": rep.message}
    return Output({"gordon-scan.json": doc, "gordon-scan.csv": cert.to_csv()})


def task_gordon_tower(config, params, mode, rng, threads):
    E, levels, deltas, cap = _tower(config, params)
    x = _point(params, E)
    eps = parse_scalar(str(params.get("eps", "1/2")))
    tower, reports = tower_reports(E, levels, eps, deltas, cap)
    lengths = capture_lengths(reports, E.field(x))
    return Output({"gordon-tower.json": {"x": format_scalar(x), "levels_built": len(tower.levels),
                                         "lengths": lengths}})


def task_spectrum(config, params, mode, rng, threads):
    words = params.get("words") or [params.get("word", "1")]
    words = [_word(w) for w in words]
    n = int(params.get("n", max(max(w) for w in words)))
    V = _potential(params, n)
    tol = float(params.get("tol", 1e-12))

    def one(w):
        return band_spectrum(w, V, mode, tol)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(one, words))
    files = {}
    if len(results) == 1:
        files["spectrum.json"] = results[0].to_json()
        files["spectrum.csv"] = results[0].to_csv()
    else:
        files["spectrum.json"] = {"spectra": [r.to_json() for r in results]}
        for i, r in enumerate(results):
            files[f"spectrum-{i}.csv"] = r.to_csv()
    return Output(files)


def task_eigenbox(config, params, mode, rng, threads):
    q = int(params.get("q", 50))
    if "word" in params:
        window = _word(params["word"])
        n = int(params.get("n", max(window)))
    else:
        E = _iet(config)
        window = orbit_symbols(E, _point(params, E), 0, q - 1)
        n = E.n
    V = _potential(params, n)
    eigs = finite_box_eigenvalues(window, V, q, float(params.get("tol", 1e-10)))
    text = "index,eigenvalue\n" + "".join(f"{i + 1},{e:.17g}\n" for i, e in enumerate(eigs))
    return Output({"eigenbox.csv": text})


def task_lyapunov(config, params, mode, rng, threads):
    E = _iet(config)
    x = _point(params, E)
    V = _potential(params, E.n)
    length = int(params.get("length", 10**4))
    energies = [float(parse_scalar(str(e))) for e in params.get("energies", ["0"])]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        ests = list(pool.map(lambda e: lyapunov_estimate(e, E, x, V, length), energies))
    text = "energy,lyapunov,tail\n" + "".join(f"{r.energy!r},{r.value:.12g},{r.tail:.12g}\n" for r in ests)
    return Output({"lyapunov.csv": text})


def task_hull_check(config, params, mode, rng, threads):
    word = _word(params.get("word", "12"))
    V = _potential(params, int(params.get("n", max(word))))
    ok = hull_invariance_check(word, V, mode)
    return Output({"hull-check.json": {"word": list(word), "invariant": ok}})


def task_fibonacci_check(config, params, mode, rng, threads):
    coupling = parse_scalar(str(params.get("coupling", "2")))
    V = Potential((0, 1), coupling)
    lo, hi = (int(v) for v in params.get("orders", [3, 15]))
    if lo < 3:
        raise UsageError("orders start at 3")
    if "energies" in params:
        energies = [parse_scalar(str(e)) for e in params["energies"]]
    else:
        energies = [Fraction(rng.randrange(-300, 301), 100) for _ in range(int(params.get("count", 20)))]
    rows = ["energy,order,trace_approx,recursion_holds,invariant"]
    for e in energies:
        t = fibonacci_traces(e, range(lo - 3, hi + 1), V)
        for k in range(lo, hi + 1):
            rec = t[k] == t[k - 1] * t[k - 2] - t[k - 3]
            inv = trace_map_invariant(t[k], t[k - 1], t[k - 2])
            rows.append(f"{format_scalar(e)},{k},{float(t[k]):.12g},{rec},{format_scalar(inv)}")
    return Output({"fibonacci-check.csv": "\n".join(rows) + "\n"})


def task_verify(config, params, mode, rng, threads):
    report = verify_suite(seed=rng.randrange(2**32))
    for name, ok, detail in report:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=sys.stderr)
    return Output({"verify.json": {"results": [{"name": n, "passed": ok, "detail": d} for n, ok, d in report]}})


HANDLERS = {
    "rauzy-orbit": task_rauzy_orbit,
    "classes": task_classes,
    "tower": task_tower,
    "candidates": task_candidates,
    "itinerary": task_itinerary,
    "cylinders": task_cylinders,
    "condition-b": task_condition_b,
    "gordon-scan": task_gordon_scan,
    "gordon-tower": task_gordon_tower,
    "spectrum": task_spectrum,
    "eigenbox": task_eigenbox,
    "lyapunov": task_lyapunov,
    "hull-check": task_hull_check,
    "fibonacci-check": task_fibonacci_check,
    "verify": task_verify,
}


# verification suite ------------------------------------------------------------------------


def _random_instance(rng, n):
    while True:
        images = list(range(1, n + 1))
        rng.shuffle(images)
        perm = Permutation(tuple(images))
        if perm.is_irreducible:
            break
    raw = [rng.randrange(1, 60) for _ in range(n)]
    total = sum(raw)
    return perm, tuple(Fraction(r, total) for r in raw)


def verify_suite(seed: int = 0) -> list[tuple]:
    """Cross-module oracle checks on fixed instances, plus two negative controls.

    Returns ``(name, passed, detail)`` triples; a failing check never stops the suite.
    """
    rng = random.Random(seed)
    results = []

    def run(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # the suite reports, it does not crash
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, ok, detail))

    def rauzy_vs_induce():
        checked = 0
        for _ in range(30):
            perm, lam = _random_instance(rng, rng.randrange(2, 6))
            try:
                st = rauzy_step(perm, lam)
            except UndefinedStepError:
                continue
            if (st.after_perm, st.after_lengths) != rauzy_step_via_induce(perm, lam):
                return False, f"mismatch at {perm} {lam}"
            checked += 1
        return True, f"{checked} random steps agree"

    def tiling():
        G = golden_rotation()
        for lo, hi in [(0, Fraction(1, 3)), (Fraction(1, 5), Fraction(4, 5)), (0, G.lengths.values[1])]:
            S = induce(G, (G.field(lo), G.field(hi)))
            if S.tiling_measure() != 1:
                return False, f"sum (r+1)|I| = {S.tiling_measure()} on [{lo}, {hi})"
        return True, "sum (r_k + 1)|I_k| = 1 on three subintervals"

    def trace_map():
        V = Potential((0, 1), 2)
        for e in (Fraction(-7, 3), Fraction(1, 2), Fraction(13, 10)):
            t = fibonacci_traces(e, range(0, 12), V)
            for k in range(3, 12):
                if t[k] != t[k - 1] * t[k - 2] - t[k - 3] or trace_map_invariant(t[k], t[k - 1], t[k - 2]) != 1:
                    return False, f"trace map fails at E = {e}, order {k}"
        return True, "recursion and invariant exact on 3 energies"

    def hull():
        V = default_potential(3)
        word = tuple(rng.randrange(1, 4) for _ in range(6))
        return hull_invariance_check(word, V), f"word {''.join(map(str, word))}"

    def containment():
        E = rotation(Fraction(1, 2) + Fraction(1, 50) + Fraction(1, 5000))
        tower, reports = tower_reports(E, 4)
        captured = 0
        for i in range(10):
            x = Fraction(2 * i + 1, 20)
            lengths = capture_lengths(reports, x)
            if not lengths:
                continue
            captured += 1
            K = max(lengths)
            cert = gordon_scan(orbit_symbols(E, x, -K, 2 * K - 1), K)
            if not set(lengths) <= set(cert.lengths):
                return False, f"tower lengths {lengths} not all found by the scan at x = {x}"
        return captured > 0, f"{captured} captured points, all tower lengths found by the scan"

    def periodic():
        P = periodic_iet(3, Permutation((2, 3, 1)))
        tower = build_tower(P.iet, 1, [Fraction(1)])
        rep = candidate_report(tower, 1)
        return all(r.fraction == 1 for r in rep.records), "candidate fraction 1 on the periodic exchange"

    def corrupted():
        try:
            rauzy_step(Permutation((1, 2)), (Fraction(1, 2), Fraction(1, 2)))
        except InvalidPermutationError as exc:
            return True, f"irreducibility failure reported ({exc.code})"
        return False, "reducible permutation accepted"

    def tie():
        try:
            rauzy_step(Permutation((2, 1)), (Fraction(1, 2), Fraction(1, 2)))
        except UndefinedStepError as exc:
            return True, f"undefined step reported ({exc.code})"
        return False, "tie accepted"

    run("rauzy-vs-induce", rauzy_vs_induce)
    run("tiling-identity", tiling)
    run("trace-map-invariant", trace_map)
    run("hull-invariance", hull)
    run("gordon-containment", containment)
    run("periodic-candidates", periodic)
    run("negative-control-reducible", corrupted)
    run("negative-control-tie", tie)
    return results


# entry point -----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ietspec", description="Interval exchanges, Rauzy towers and Schroedinger spectra.")
    p.add_argument("--config", type=Path, help="JSON configuration file")
    p.add_argument("--task", choices=TASKS, help="task to run (overrides the configuration)")
    p.add_argument("--out", type=Path, help="output directory (default: standard output)")
    p.add_argument("--threads", type=int, default=1, help="worker cap within a task")
    p.add_argument("--mode", choices=("exact", "float"), default=None, help="numeric mode for spectral tasks")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized sampling (u64)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load_config(path):
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read configuration: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("configuration must be a JSON object")
    return doc


def _write(out: Path, name: str, payload):
    text = payload if isinstance(payload, str) else dumps(payload)
    (out / name).write_text(text)


def run(config: dict, task: str, out: Path | None, threads: int = 1, mode: str = "exact",
        seed: int = 0) -> int:
    """Run one task; returns the exit status."""
    canonical = json.dumps(config, sort_keys=True)
    meta = {
        "tool": "ietspec",
        "version": __version__,
        "task": task,
        "mode": mode,
        "seed": seed,
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if task in ("spectrum", "eigenbox", "lyapunov"):
        meta["approximant_note"] = "periodic approximant words are chosen by the caller"
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    params = config.get("params", {})
    try:
        result = HANDLERS[task](config, params, mode, rng, max(1, threads))
    except ParseError as exc:
        raise UsageError(str(exc)) from exc
    except IetError as exc:
        report = {"error": exc.code, "message": str(exc)}
        log.error("%s: %s", exc.code, exc)
        meta["status"] = "error"
        if out is not None:
            _write(out, "error.json", report)
            _write(out, "metadata.json", meta)
        sys.stderr.write(dumps(report))
        return 1
    meta["status"] = "ok"
    meta["files"] = sorted(result.files)
    if out is None:
        files = result.files
        if len(files) == 1:
            payload = next(iter(files.values()))
            sys.stdout.write(payload if isinstance(payload, str) else dumps(payload))
        else:
            sys.stdout.write(dumps(files))
        return 0
    for name, payload in result.files.items():
        _write(out, name, payload)
    _write(out, "metadata.json", meta)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        config = _load_config(args.config)
        task = args.task or config.get("task")
        if task is None:
            raise UsageError("no task given (use --task or a 'task' entry)")
        if task not in HANDLERS:
            raise UsageError(f"unknown task {task!r}")
        mode = args.mode or config.get("mode", "exact")
        if mode not in ("exact", "float"):
            raise UsageError(f"mode must be 'exact' or 'float', not {mode!r}")
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        if not 0 <= seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        return run(config, task, args.out, args.threads, mode, seed)
    except (UsageError, ParseError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
