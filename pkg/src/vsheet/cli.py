"""Command-line front end.

    vsheet critical-points|solve|sweep|verify --config FILE [--out DIR] [--jobs N]

Exit codes: 0 success, 1 numerical failure, 2 input error.  The logging
level is read from the VSHEET_LOG environment variable (default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import domain as dom
from . import kirchhoff_routh as kr
from . import sheet as sh
from . import solver as so
from . import verify as vf
from .errors import InputError, NumericalFailure, VsheetError

log = logging.getLogger("vsheet")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2

_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_CENTERS = {"type": "array", "items": _POINT, "minItems": 1}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "domain": {"enum": [k.value for k in dom.DomainKind]},
        "centers": _CENTERS,
        "seeds": {"type": "array", "items": _CENTERS, "minItems": 1},
        "strengths": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "epsilon": {"type": "array", "items": _POSITIVE, "minItems": 1},
        "continuation_steps": {"type": "array", "items": _POSITIVE, "minItems": 1},
        "tau": {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 1}]},
        "N": {"type": "integer", "minimum": 16, "multipleOf": 2},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "residual": _POSITIVE,
                "center": _POSITIVE,
                "max_outer": {"type": "integer", "minimum": 1},
                "fallback_after": {"type": "integer", "minimum": 0},
            },
        },
        "threshold": _POSITIVE,
        "state": {"type": "string"},
    },
}

_REQUIRED = {
    "critical-points": ("domain", "strengths"),
    "solve": ("domain", "strengths", "centers", "epsilon"),
    "sweep": ("domain", "strengths", "centers", "epsilon"),
}


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------

def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(data) -> str:
    return json.dumps(data, indent=1, default=_json_default)


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def load_config(path: str, command: str) -> dict:
    cfg = load_json(path)
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise InputError(f"invalid config at {where}: {exc.message}") from exc
    missing = [k for k in _REQUIRED.get(command, ()) if k not in cfg]
    if command == "critical-points" and "seeds" not in cfg and "centers" not in cfg:
        missing.append("seeds")
    if missing:
        raise InputError(f"config for {command} lacks: {', '.join(missing)}")
    return cfg


def _taus(cfg: dict) -> list:
    tau = cfg.get("tau", 0.0)
    return [float(t) for t in (tau if isinstance(tau, list) else [tau])]


def _options(cfg: dict, tau: float) -> so.SolveOptions:
    tol = cfg.get("tolerances", {})
    return so.SolveOptions(
        max_outer=tol.get("max_outer", 50),
        tol_residual=tol.get("residual", 1e-10),
        tol_center=tol.get("center", 1e-10),
        fallback_after=tol.get("fallback_after", 10),
        continuation_steps=cfg.get("continuation_steps"),
        tau=tau,
        N=cfg.get("N", 128),
    )


# ---------------------------------------------------------------------------
# SVG plot
# ---------------------------------------------------------------------------

def render_svg(state: sh.SheetState, x0=None, size: int = 480) -> str:
    """Domain boundary, sheet curves and centers as a standalone SVG."""
    curves = [sh.sheet_points(state, i) for i in range(state.m)]
    if state.domain.kind is dom.DomainKind.DISK:
        lo, hi = np.array([-1.1, -1.1]), np.array([1.1, 1.1])
    else:
        pts = np.vstack(curves + [state.centers])
        span = max(float(np.ptp(pts[:, 0])), float(np.ptp(pts[:, 1])), 4 * state.epsilon)
        mid = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
        lo, hi = mid - 0.75 * span, mid + 0.75 * span
        if state.domain.kind is dom.DomainKind.HALFPLANE:
            lo[1] = min(lo[1], -0.05 * span)
    scale = size / float(np.max(hi - lo))

    def px(p):
        p = np.atleast_2d(p)
        return np.column_stack([(p[:, 0] - lo[0]) * scale, (hi[1] - p[:, 1]) * scale])

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if state.domain.kind is dom.DomainKind.DISK:
        c = px([0.0, 0.0])[0]
        out.append(f'<circle class="boundary" cx="{c[0]:.3f}" cy="{c[1]:.3f}" r="{scale:.3f}" '
                   'fill="none" stroke="black" stroke-width="1.5"/>')
    elif state.domain.kind is dom.DomainKind.HALFPLANE:
        y = px([0.0, 0.0])[0, 1]
        out.append(f'<line class="boundary" x1="0" y1="{y:.3f}" x2="{size}" y2="{y:.3f}" '
                   'stroke="black" stroke-width="1.5"/>')
    for i, pts in enumerate(curves):
        p = " ".join(f"{a:.3f},{b:.3f}" for a, b in px(pts))
        colour = "#1f5fa8" if state.strengths[i] > 0 else "#b8321a"
        out.append(f'<polygon class="sheet" points="{p}" fill="none" stroke="{colour}" stroke-width="1.2"/>')
    for c in px(state.centers):
        out.append(f'<circle class="center" cx="{c[0]:.3f}" cy="{c[1]:.3f}" r="2" fill="black"/>')
    if x0 is not None:
        for c in px(x0):
            out.append(f'<circle class="x0" cx="{c[0]:.3f}" cy="{c[1]:.3f}" r="3.5" fill="none" stroke="gray"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _seed_list(cfg: dict) -> list:
    return cfg["seeds"] if "seeds" in cfg else [cfg["centers"]]


def cmd_critical_points(cfg: dict, out: Path) -> int:
    d = dom.from_key(cfg["domain"])
    reports = []
    for seed in _seed_list(cfg):
        rep = kr.find_critical(d, kr.VortexConfig(seed, cfg["strengths"]))
        reports.append(rep)
        print(f"seed {seed}: {'usable' if rep.usable else 'rejected'} "
              f"point={rep.point.centers.tolist()} |grad|={rep.gradient_norm:.3e} ({rep.message})")
    write_atomic(out / "critical_points.json", dumps({"domain": d.key, "reports": [r.to_dict() for r in reports]}))
    return EXIT_OK if any(r.usable for r in reports) else EXIT_FAILURE


def _anchor(cfg: dict) -> kr.VortexConfig:
    d = dom.from_key(cfg["domain"])
    rep = kr.find_critical(d, kr.VortexConfig(cfg["centers"], cfg["strengths"]))
    if not rep.usable:
        raise NumericalFailure(f"no nondegenerate critical point near the given centers: {rep.message}")
    return rep.point


def _job_name(eps: float, tau: float) -> str:
    return f"eps{eps:g}_tau{tau:g}"


def run_job(job: dict) -> dict:
    """One (ε, τ) solve; writes trace, state, curve CSV and SVG. Picklable."""
    d = dom.from_key(job["domain"])
    x0 = kr.VortexConfig(job["x0"], job["strengths"])
    eps, tau = job["epsilon"], job["tau"]
    out = Path(job["out"])
    name = _job_name(eps, tau)
    trace = so.solve_at(d, x0, eps, tau, _options(job["config"], tau))
    write_atomic(out / f"trace_{name}.json", dumps(trace.to_dict()))
    summary = {"epsilon": eps, "tau": tau, "converged": trace.converged, "message": trace.message}
    if trace.state is not None:
        st = trace.state
        write_atomic(out / f"state_{name}.json", sh.state_to_json(st))
        write_atomic(out / f"curve_{name}.csv", sh.geometry_csv(st))
        write_atomic(out / f"plot_{name}.svg", render_svg(st, x0.centers))
        summary["residual"] = trace.final_residual
    if trace.converged:
        rep = vf.direct_residual(trace.state)
        summary["direct_residual"] = rep.max_residual
        summary["convex"] = all(sh.convexity_check(trace.state, i) for i in range(trace.state.m))
    return summary


def _run_jobs(cfg: dict, out: Path, taus: list, jobs: int) -> int:
    x0 = _anchor(cfg)
    specs = [
        {
            "domain": cfg["domain"],
            "x0": x0.centers.tolist(),
            "strengths": x0.strengths.tolist(),
            "epsilon": float(eps),
            "tau": tau,
            "out": str(out),
            "config": cfg,
        }
        for eps in cfg["epsilon"]
        for tau in taus
    ]
    if jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_job, specs))
    else:
        results = [run_job(s) for s in specs]
    for r in results:
        extra = f" direct={r['direct_residual']:.2e} convex={r['convex']}" if r["converged"] else ""
        print(f"eps={r['epsilon']:g} tau={r['tau']:g}: {r['message']}{extra}")
    write_atomic(out / "summary.json", dumps({"x0": x0.centers.tolist(), "runs": results}))
    return EXIT_OK if all(r["converged"] for r in results) else EXIT_FAILURE


def cmd_solve(cfg: dict, out: Path, jobs: int = 1) -> int:
    return _run_jobs(cfg, out, _taus(cfg)[:1], jobs)


def cmd_sweep(cfg: dict, out: Path, jobs: int = 1) -> int:
    return _run_jobs(cfg, out, _taus(cfg), jobs)


def cmd_verify(path: str, out: Path | None = None) -> int:
    data = load_json(path)
    threshold = 1e-8
    if isinstance(data, dict) and data.get("format") != sh.STATE_FORMAT:
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise InputError(f"invalid verify config: {exc.message}") from exc
        if "state" not in data:
            raise InputError("verify config needs a 'state' path")
        threshold = data.get("threshold", threshold)
        state_path = Path(data["state"])
        if not state_path.is_absolute():
            state_path = Path(path).parent / state_path
        data = load_json(str(state_path))
    if not isinstance(data, dict):
        raise InputError("state document must be a JSON object")
    state = sh.state_from_dict(data)
    rep = vf.direct_residual(state)
    convex = [sh.convexity_check(state, i) for i in range(state.m)]
    ok = rep.max_residual < threshold and all(convex)
    result = dict(rep.to_dict(), convex=convex, threshold=threshold, passed=ok)
    text = dumps(result)
    print(text)
    if out is not None:
        write_atomic(out / "verify.json", text)
    return EXIT_OK if ok else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vsheet", description="Stationary vortex sheets near point-vortex equilibria.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("critical-points", "solve", "sweep", "verify"):
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON configuration (for verify: a state file or config)")
        s.add_argument("--out", default=None, help="output directory (default: vsheet_out)")
        s.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes for sweeps")
    return p


def _setup_logging() -> None:
    level = os.environ.get("VSHEET_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.jobs < 1:
            raise InputError("--jobs must be at least 1")
        if args.command == "verify":
            return cmd_verify(args.config, Path(args.out) if args.out else None)
        out = Path(args.out or "vsheet_out")
        cfg = load_config(args.config, args.command)
        if args.command == "critical-points":
            return cmd_critical_points(cfg, out)
        if args.command == "solve":
            return cmd_solve(cfg, out, args.jobs)
        return cmd_sweep(cfg, out, args.jobs)
    except InputError as exc:
        print(f"vsheet: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VsheetError as exc:
        print(f"vsheet: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
