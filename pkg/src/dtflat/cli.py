"""Command line front end: ``dtflat [options] SYSTEM.flatsys``."""

import argparse
import json
import random
import re
import sys as _sys
import time
from dataclasses import dataclass

from .errors import DtflatError, InputError, ParseError, VerificationError
from .expr import parse
from .flatness import FLAT, INCONCLUSIVE, NOT_FLAT, construct, flat_outputs, test_flat
from .system import SampledSystem, random_rational, validate
from .verify import check_flat_outputs_numeric, simulate

EXIT_CODES = {FLAT: 0, NOT_FLAT: 1, INCONCLUSIVE: 2}
EXIT_INPUT_ERROR = 3

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass
class AnalysisConfig:
    mode: str = "test"
    max_ansatz_degree: int = 3
    max_elim_degree: int = 8
    seed: int = 42
    check_points: int = 100
    fb_rows: list = None
    hints: list = None
    format: str = "text"

    def __post_init__(self):
        if self.mode not in ("test", "construct", "verify"):
            raise InputError(f"unknown mode {self.mode!r}")
        if self.format not in ("text", "json"):
            raise InputError(f"unknown format {self.format!r}")
        if self.max_ansatz_degree < 1 or self.max_elim_degree < 1:
            raise InputError("degree caps must be at least 1")
        if self.check_points < 1:
            raise InputError("check_points must be at least 1")


# --------------------------------------------------------------------------
# input files

def _names(text, lineno, what):
    names = text.replace(",", " ").split()
    if not names:
        raise InputError(f"empty {what} list", line=lineno)
    for n in names:
        if not _NAME.match(n):
            raise InputError(f"invalid {what[:-1]} name {n!r}", line=lineno)
    return names


def _expr(text, lineno):
    try:
        return parse(text)
    except ParseError as exc:
        raise InputError(str(exc), line=lineno) from None


def parse_system(text):
    """Read the ``.flatsys`` format into a :class:`SampledSystem`."""
    states = inputs = None
    eqs = {}
    eq_lines = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if sep and key.strip() in ("states", "inputs"):
            if key.strip() == "states":
                if states is not None:
                    raise InputError("states declared twice", line=lineno)
                states = _names(rest, lineno, "states")
            else:
                if inputs is not None:
                    raise InputError("inputs declared twice", line=lineno)
                inputs = _names(rest, lineno, "inputs")
            continue
        if line.startswith("next "):
            lhs, eq, rhs = line[5:].partition("=")
            name = lhs.strip()
            if not eq or not _NAME.match(name):
                raise InputError("expected 'next NAME = EXPR'", line=lineno)
            if name in eqs:
                raise InputError(f"second equation for {name}", line=lineno)
            eqs[name] = _expr(rhs, lineno)
            eq_lines[name] = lineno
            continue
        raise InputError(f"cannot read {line!r}", line=lineno)
    if states is None:
        raise InputError("missing 'states:' line")
    if inputs is None:
        raise InputError("missing 'inputs:' line")
    for name, lineno in eq_lines.items():
        if name not in states:
            raise InputError(f"{name} is not a state", line=lineno)
    try:
        return SampledSystem(states, inputs, eqs)
    except DtflatError as exc:
        raise InputError(str(exc)) from None


def parse_hints(text):
    """``g1 = expr`` lines, returned ordered by index."""
    found = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lhs, eq, rhs = line.partition("=")
        m = re.match(r"^g(\d+)$", lhs.strip())
        if not eq or not m:
            raise InputError("expected 'gN = EXPR'", line=lineno)
        k = int(m.group(1))
        if k in found:
            raise InputError(f"g{k} given twice", line=lineno)
        found[k] = _expr(rhs, lineno)
    return [found[k] for k in sorted(found)]


# --------------------------------------------------------------------------
# analysis

def _fields(fields):
    return [f.to_strings() for f in fields]


def _dist(D):
    return _fields([v.primitive() for v in D.echelon_basis()])


def _rollout_residual(sys, points, seed):
    """Max relative gap between floating and exact rollouts of 3 steps."""
    rng = random.Random(seed)
    worst, done, tries = 0.0, 0, 0
    while done < points and tries < 20 * points:
        tries += 1
        x0 = [random_rational(rng) for _ in sys.states]
        us = [[random_rational(rng) for _ in sys.inputs] for _ in range(3)]
        try:
            exact = simulate(sys, x0, us)
            approx = simulate(sys, [float(v) for v in x0], [[float(v) for v in u] for u in us])
        except DtflatError:
            continue
        for xe, xa in zip(exact.states, approx.states):
            for a, b in zip(xe, xa):
                worst = max(worst, abs(float(a) - b) / max(1.0, abs(float(a))))
        done += 1
    return worst


def analyze(system, config):
    """Run the configured analysis; returns ``(exit code, report dict)``."""
    hint_rows = None
    if config.fb_rows:
        bad = [r for r in config.fb_rows if r not in system.states]
        if bad:
            raise InputError(f"--fb-rows names unknown states {bad}")
        hint_rows = list(config.fb_rows)
    warnings = validate(system, samples=10, seed=config.seed)
    notes = list(warnings)
    report = {
        "verdict": INCONCLUSIVE,
        "mode": config.mode,
        "states": list(system.states),
        "inputs": list(system.inputs),
        "passes": [],
        "R_final": [],
        "Y_final": [],
        "flat_outputs": [],
        "extraction_status": "SKIPPED",
        "verification": None,
        "notes": notes,
    }
    try:
        res = test_flat(system, max_elim_degree=config.max_elim_degree,
                        ansatz_degree=config.max_ansatz_degree, fb_hint=hint_rows)
    except DtflatError as exc:
        notes.append(f"{exc.code}: {exc}")
        return EXIT_CODES[INCONCLUSIVE], report
    report["verdict"] = res.verdict
    report["chart"] = list(res.system.chart.names)
    report["redundant_inputs"] = list(res.redundant_inputs)
    for t in res.traces:
        report["passes"].append({
            "index": t.index,
            "Y_S": _dist(t.Y_S),
            "Uhat": _dist(t.Uhat),
            "V_S": _dist(t.V_S),
            "kappa_before": t.kappa_before,
            "kappa_after": t.kappa_after,
            "fb_rows": list(t.fb_rows),
            "shifted_fields": _fields(t.shifted_fields),
        })
    report["R_final"] = _dist(res.R_final)
    report["Y_final"] = _dist(res.Y_final)
    notes.extend(res.notes)
    outputs = None
    if res.verdict == FLAT:
        try:
            outputs = flat_outputs(res, max_degree=config.max_ansatz_degree)
        except DtflatError as exc:
            notes.append(f"{exc.code}: {exc}")
            res.extraction_status = "FAILED"
        report["extraction_status"] = res.extraction_status
        if config.mode == "construct":
            outputs = _construct(system, config, outputs, report, notes)
        if outputs:
            report["flat_outputs"] = [str(y) for y in outputs]
        if config.mode == "verify":
            report["verification"] = _verify(system, outputs, config, notes)
    return EXIT_CODES[res.verdict], report


def _construct(system, config, outputs, report, notes):
    try:
        con = construct(system, hints=config.hints, max_degree=config.max_ansatz_degree,
                        max_elim_degree=config.max_elim_degree,
                        ansatz_degree=config.max_ansatz_degree)
    except DtflatError as exc:
        notes.append(f"construction: {exc.code}: {exc}")
        return outputs
    report["construction"] = {
        "status": con.status,
        "levels": len(con.levels),
        "outputs": [str(y) for y in con.flat_outputs],
    }
    notes.extend(con.notes)
    known = set(system.chart.names)
    usable = (con.status == "FOUND" and len(con.flat_outputs) == system.m
              and all(set(y.free_symbols) <= known for y in con.flat_outputs))
    if usable:
        report["extraction_status"] = "FOUND"
        return sorted(con.flat_outputs, key=lambda e: (e.complexity(), str(e)))
    notes.append("construction did not give outputs in the original coordinates")
    return outputs


def _verify(system, outputs, config, notes):
    out = {"residual_max": _rollout_residual(system, config.check_points, config.seed),
           "rank_ok": False}
    if not outputs:
        notes.append("verification: no flat outputs to check")
        return out
    try:
        rep = check_flat_outputs_numeric(system, outputs, trials=config.check_points,
                                         seed=config.seed)
        out["rank_ok"] = rep.rank_ok
        out["window"] = rep.window
        out["rank"] = rep.rank
    except VerificationError as exc:
        notes.append(f"verification: {exc.code}: {exc}")
    except DtflatError as exc:
        notes.append(f"verification skipped: {exc.code}: {exc}")
    return out


# --------------------------------------------------------------------------
# output

def emit_json(report):
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def _fmt_fields(chart, fields):
    out = []
    for coeffs in fields:
        parts = []
        for n, c in zip(chart, coeffs):
            if c == "0":
                continue
            if c == "1":
                parts.append(f"d_{n}")
            else:
                parts.append(f"({c})*d_{n}")
        out.append(" + ".join(parts) or "0")
    return "span{" + ", ".join(out) + "}"


def emit_text(report):
    chart = report.get("chart", report["states"] + report["inputs"])
    lines = [f"verdict: {report['verdict']}"]
    for p in report["passes"]:
        lines.append(
            f"pass {p['index']}: kappa {p['kappa_before']} -> {p['kappa_after']}"
            + (f", f_b rows {' '.join(p['fb_rows'])}" if p["fb_rows"] else "")
        )
        lines.append(f"  Y_S  = {_fmt_fields(chart, p['Y_S'])}")
        lines.append(f"  Uhat = {_fmt_fields(chart, p['Uhat'])}")
        lines.append(f"  V_S  = {_fmt_fields(chart, p['V_S'])}")
        if p["shifted_fields"]:
            lines.append(f"  shifted = {_fmt_fields(report['states'], p['shifted_fields'])}")
    lines.append(f"R_final = {_fmt_fields(chart, report['R_final'])}")
    lines.append(f"Y_final = {_fmt_fields(chart, report['Y_final'])}")
    if report["flat_outputs"]:
        lines.append("flat outputs: " + ", ".join(report["flat_outputs"]))
    lines.append(f"extraction: {report['extraction_status']}")
    ver = report.get("verification")
    if ver:
        lines.append(f"verification: residual_max={ver['residual_max']:.3e} rank_ok={ver['rank_ok']}")
    for n in report["notes"]:
        lines.append(f"note: {n}")
    return "\n".join(lines) + "\n"


def build_parser():
    p = argparse.ArgumentParser(prog="dtflat", description="Forward-shift flatness analysis.")
    p.add_argument("system", help="system definition (.flatsys)")
    p.add_argument("--mode", choices=["test", "construct", "verify"], default="test")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--max-ansatz-degree", type=int, default=3)
    p.add_argument("--max-elim-degree", type=int, default=8)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--check-points", type=int, default=100)
    p.add_argument("--fb-rows", default=None, help="comma separated state names for f_b")
    p.add_argument("--hints", default=None, help="file with 'gN = EXPR' lines")
    p.add_argument("--timing", action="store_true", help="report wall time on stderr")
    return p


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or _sys.stdout
    stderr = stderr or _sys.stderr
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        with open(args.system, encoding="utf-8") as fh:
            system = parse_system(fh.read())
        hints = None
        if args.hints:
            with open(args.hints, encoding="utf-8") as fh:
                hints = parse_hints(fh.read())
        fb = [r for r in re.split(r"[,\s]+", args.fb_rows) if r] if args.fb_rows else None
        config = AnalysisConfig(args.mode, args.max_ansatz_degree, args.max_elim_degree,
                                args.seed, args.check_points, fb, hints, args.format)
        code, report = analyze(system, config)
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT_ERROR
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT_ERROR
    except DtflatError as exc:
        if exc.code in ("NOT_SUBMERSION", "INPUT_ERROR"):
            print(f"error: {exc.code}: {exc}", file=stderr)
            return EXIT_INPUT_ERROR
        print(f"error: {exc.code}: {exc}", file=stderr)
        return EXIT_CODES[INCONCLUSIVE]
    out = emit_json(report) if args.format == "json" else emit_text(report)
    stdout.write(out)
    if args.timing:
        print(f"elapsed {time.perf_counter() - start:.3f} s", file=stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
