"""``susy-band`` command-line front end.

Every subcommand reads an optional JSON config (``--config``), applies flag
overrides, validates the merged config against :data:`CONFIG_SCHEMA`, runs
the computation and writes CSV/JSON files into the output directory.  A JSON
summary is printed on stdout.  Exit codes: 0 success, 1 computation failure
or invariant violation above tolerance, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import contextlib
import copy
import hashlib
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import numerics as nm
from .errors import ComputationFailed, ConfigInvalid, SusyBandError

# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def _enc(obj: Any) -> str:
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return "null" if not math.isfinite(x) else "%.17g" % x
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {_enc(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return _enc(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_enc(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON text with every float printed as ``%.17g``; non-finite floats become ``null``."""
    return _enc(obj)


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical (sorted-key) JSON form of ``cfg``.

    ``output_dir`` is left out: where results are written does not change them,
    so identical runs into different directories produce identical files.
    """
    body = {k: v for k, v in cfg.items() if k != "output_dir"}
    return hashlib.sha256(json.dumps(body, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

CONFIG_SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": ["kitaev", "chiral_sc", "random"]},
                "mu": {"type": "number"},
                "t": {"type": "number"},
                "m": {"type": "number"},
                "class": {"type": "string"},
                "n": {"type": "integer", "minimum": 1, "maximum": 8},
                "range": {"type": "integer", "minimum": 1},
            },
        },
        "grid": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1, "maxItems": 3},
        "construction": {"enum": ["closed_form", "strict", "general", "two_band", "local"]},
        "subsystems": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "start": {"type": "integer", "minimum": 0},
        "ray": {"type": "array", "items": {"type": "integer"}, "minItems": 1, "maxItems": 3},
        "r_max": {"type": "integer", "minimum": 1},
        "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "output_dir": {"type": "string"},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gap_floor": {"type": "number", "exclusiveMinimum": 0},
                "ode_tol": {"type": "number", "exclusiveMinimum": 0},
                "invariant": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "az_class": {"type": "string"},
        "dim": {"type": "integer", "minimum": 0},
        "n_max": {"type": "integer", "minimum": 1, "maximum": 8},
    },
}

DEFAULT_TOLERANCES = {"gap_floor": nm.GAP_FLOOR, "ode_tol": 1e-6, "invariant": 1e-9}

DEFAULTS: dict = {
    "model": {"name": "kitaev", "mu": 1.0, "t": 0.7},
    "construction": "closed_form",
    "output_dir": "susyband_out",
    "seed": 0,
}


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config must be a JSON object")
    return cfg


def _parse_grid(text: str) -> list[int]:
    try:
        return [int(x) for x in text.lower().split("x")]
    except ValueError as exc:
        raise ConfigInvalid(f"bad grid {text!r}; use e.g. 60 or 400x400") from exc


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigInvalid(f"bad integer list {text!r}") from exc


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigInvalid(f"bad number list {text!r}") from exc


def merge_config(file_cfg: dict, args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then command-line flags."""
    cfg = copy.deepcopy(DEFAULTS)
    file_model = file_cfg.get("model")
    for k, v in file_cfg.items():
        if k != "model":
            cfg[k] = copy.deepcopy(v)
    if isinstance(file_model, dict):
        if file_model.get("name", cfg["model"]["name"]) != cfg["model"]["name"]:
            cfg["model"] = {}
        cfg["model"].update(file_model)
    elif file_model is not None:
        cfg["model"] = file_model
    a = vars(args)
    if a.get("model"):
        if a["model"] != cfg["model"].get("name"):
            cfg["model"] = {"name": a["model"]}
    for flag, key in (("mu", "mu"), ("t", "t"), ("m", "m"), ("cls", "class"), ("n", "n"), ("range", "range")):
        if a.get(flag) is not None and isinstance(cfg["model"], dict):
            cfg["model"][key] = a[flag]
    if a.get("grid"):
        cfg["grid"] = _parse_grid(a["grid"])
    if a.get("ray"):
        cfg["ray"] = _parse_ints(a["ray"])
    if a.get("l"):
        cfg["subsystems"] = _parse_ints(a["l"])
    if a.get("window"):
        cfg["window"] = _parse_floats(a["window"])
    for flag in ("construction", "r_max", "seed", "start", "n_max", "dim"):
        if a.get(flag) is not None:
            cfg[flag] = a[flag]
    if a.get("az_class") is not None:
        cfg["az_class"] = a["az_class"]
    if a.get("out"):
        cfg["output_dir"] = a["out"]
    if a.get("gap_floor") is not None:
        cfg.setdefault("tolerances", {})["gap_floor"] = a["gap_floor"]
    return cfg


def validate_config(cfg: dict) -> dict:
    """Schema validation plus the cross-field checks the schema cannot express."""
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigInvalid(f"config invalid at {list(exc.absolute_path)}: {exc.message}") from exc
    grid = cfg.get("grid")
    if grid is not None and any(g % 2 for g in grid):
        raise ConfigInvalid("grid sizes must be even")
    model = cfg["model"]
    if model["name"] == "kitaev" and grid is not None and len(grid) != 1:
        raise ConfigInvalid("the Kitaev chain needs a 1D grid")
    if model["name"] == "chiral_sc" and grid is not None and len(grid) != 2:
        raise ConfigInvalid("the chiral superconductor needs a 2D grid")
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(cfg.get("tolerances", {}))
    cfg["tolerances"] = tol
    return cfg


# ---------------------------------------------------------------------------
# Model wiring
# ---------------------------------------------------------------------------


def _grid(cfg: dict, default: list[int]) -> list[int]:
    return list(cfg.get("grid") or default)


def build_supercharge(cfg: dict, default_grid: list[int] | None = None):
    """``(q, h_f, info)`` for the configured model and construction."""
    from .models import chiral_sc, kitaev_blocks, kitaev_chain, random_supercharge
    from .supercharge import bdi_strict, from_hf_general

    model = cfg["model"]
    name = model["name"]
    con = cfg.get("construction", "closed_form")
    gap_floor = cfg["tolerances"]["gap_floor"]
    try:
        if name == "kitaev":
            mu, t = float(model.get("mu", 1.0)), float(model.get("t", 0.7))
            (N,) = _grid(cfg, default_grid or [60])
            km = kitaev_chain(mu, t, N)
            if con == "closed_form":
                q = km.q_closed
            elif con == "strict":
                q = bdi_strict(*kitaev_blocks(mu, t, N), gap_floor=gap_floor)
            elif con == "general":
                q = from_hf_general(km.h_f, gap_floor)
            else:
                raise ConfigInvalid(f"construction {con!r} is not available for the Kitaev chain")
            return q, km.h_f, {"mu": mu, "t": t, "N": N}
        if name == "chiral_sc":
            m = float(model.get("m", 1.0))
            Nx, Ny = _grid(cfg, default_grid or [64, 64])
            cm = chiral_sc(m, Nx, Ny)
            if con in ("closed_form", "two_band"):
                q = cm.q_nonlocal
            elif con == "local":
                if cm.q_local is None:
                    raise ComputationFailed("no local supercharge exists in the topological phase 0 < |m| < 2")
                q = cm.q_local
            elif con == "general":
                q = from_hf_general(cm.h_f, gap_floor)
            else:
                raise ConfigInvalid(f"construction {con!r} is not available for the chiral superconductor")
            return q, cm.h_f, {"m": m, "grid": [Nx, Ny]}
        # random
        sizes = tuple(_grid(cfg, default_grid or [16]))
        q = random_supercharge(model.get("class", "none"), int(model.get("n", 2)), int(model.get("range", 1)),
                               int(cfg.get("seed", 0)), sizes)
        return q, q.h_f(), {"class": q.class_label, "grid": list(sizes)}
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


class Outcome:
    """Collected outputs of one subcommand run."""

    def __init__(self, cfg: dict, command: str):
        self.cfg = cfg
        self.command = command
        self.files: dict[str, str] = {}
        self.ok = True
        self.failures: list[str] = []

    def add_file(self, name: str, text: str):
        self.files[name] = text

    def check(self, label: str, value: float, tol: float, upper: bool = True) -> bool:
        good = (value <= tol) if upper else (value >= tol)
        if not good:
            self.ok = False
            self.failures.append(f"{label} = {value:.3e} violates tolerance {tol:.3e}")
        return good

    def envelope(self, payload: dict) -> dict:
        return {
            "command": self.command,
            "config_hash": config_hash(self.cfg),
            "tolerances": self.cfg["tolerances"],
            "ok": self.ok,
            "failures": self.failures,
            **payload,
        }


def cmd_pair(cfg: dict, out: Outcome) -> dict:
    from .susy_pair import build_pair, validate_pair

    q, h_f, info = build_supercharge(cfg)
    pair = build_pair(q, cfg["tolerances"]["gap_floor"])
    rep = validate_pair(pair)
    tol = cfg["tolerances"]["invariant"]
    out.check("spectral duality", rep.duality, tol)
    out.check("complex structure J^2 + 1", rep.complex_structure, tol)
    out.add_file("spectrum.csv", pair.spectrum_csv())
    body = {"model": info, "construction": q.construction, "duality": rep.duality, "phs_f": rep.phs_f,
            "phs_b": rep.phs_b, "complex_structure": rep.complex_structure, "boson_frame": rep.boson_frame,
            "min_epsilon": float(pair.epsilon.min())}
    out.add_file("duality_report.json", dumps(out.envelope(body)) + "\n")
    return body


def _default_window(cfg: dict) -> list[float]:
    return [5.0, 50.0] if cfg["model"]["name"] == "kitaev" else [10.0, 100.0]


def cmd_decay(cfg: dict, out: Outcome) -> dict:
    from .bloch import fit_decay, fourier_ray

    default = [400] if cfg["model"]["name"] == "kitaev" else [400, 400]
    q, _, info = build_supercharge(cfg, default)
    dim = q.grid.dim
    ray = cfg.get("ray") or [1] * dim
    if len(ray) != dim:
        raise ConfigInvalid("ray length must match the grid dimension")
    window = cfg.get("window") or _default_window(cfg)
    r_max = int(cfg.get("r_max") or max(window[1], 1))
    prof = fourier_ray(q.field, ray, r_max)
    out.add_file("decay.csv", prof.to_csv())
    fits = {}
    for comp in ("diag", "offdiag", "total"):
        try:
            f = fit_decay(prof, window, comp)
            fits[comp] = {"model": f.model, "rate_or_exponent": f.rate_or_exponent, "r2": f.goodness,
                          "exponential": list(f.exp_fit), "powerlaw": list(f.pow_fit)}
        except ValueError as exc:
            fits[comp] = {"error": str(exc)}
    body = {"model": info, "construction": q.construction, "ray": ray, "window": window, "fits": fits}
    out.add_file("decay_fit.json", dumps(out.envelope(body)) + "\n")
    return body


def _pair_and_structures(cfg: dict):
    from .entanglement import pair_structures
    from .susy_pair import build_pair

    q, _, info = build_supercharge(cfg)
    if q.grid.dim != 1:
        raise ConfigInvalid("entanglement subcommands need a 1D model")
    pair = build_pair(q, cfg["tolerances"]["gap_floor"])
    return pair, pair_structures(pair), info


def cmd_entangle(cfg: dict, out: Outcome) -> dict:
    from .entanglement import (SubsystemSpec, edge_mode_profile, entropy_scaling_curve, mirror_asymmetry,
                               mirror_ratio, site_weights, squeezing_commutator)

    pair, st, info = _pair_and_structures(cfg)
    N = pair.grid.sizes[0]
    ls = cfg.get("subsystems") or list(range(2, min(N // 2, 30) + 1, 2))
    start = int(cfg.get("start", 0))
    curve = entropy_scaling_curve(pair, ls, start, st)
    out.add_file("entropy_scaling.csv", curve.to_csv())
    edges = []
    for l in ls:
        sub = SubsystemSpec.contiguous(pair.grid, pair.n, int(l), start)
        mode = edge_mode_profile(st.J_f, sub)
        wf = site_weights(mode.w, pair.grid, pair.n)
        u = mode.w @ st.maps.L1
        wb = site_weights(u, pair.grid, pair.n)
        edges.append({
            "l": int(l), "lambda_min": mode.lam, "squeezing_commutator": squeezing_commutator(st.maps, mode),
            "mirror_ratio_f": mirror_ratio(wf, sub.sites, N), "mirror_ratio_b": mirror_ratio(wb, sub.sites, N),
            "mirror_asymmetry_f": mirror_asymmetry(wf, sub.sites, N),
            "mirror_asymmetry_b": mirror_asymmetry(wb, sub.sites, N),
        })
    body = {"model": info, "l": [int(x) for x in curve.l], "S_f": curve.S_f, "S_b": curve.S_b,
            "diverged": curve.diverged, "edge_modes": edges}
    out.add_file("entanglement.json", dumps(out.envelope(body)) + "\n")
    return body


def cmd_duality(cfg: dict, out: Outcome) -> dict:
    from .entanglement import SubsystemSpec, duality_check

    pair, st, info = _pair_and_structures(cfg)
    ls = cfg.get("subsystems") or [4, 8, 12]
    start = int(cfg.get("start", 0))
    rows = []
    tol = max(cfg["tolerances"]["invariant"], 1e-6)
    for l in ls:
        sub = SubsystemSpec.contiguous(pair.grid, pair.n, int(l), start)
        res = duality_check(st.J_f, st.J_b, st.maps, sub)
        out.check(f"entanglement duality l={l}", res.max_deviation, tol)
        rows.append({"l": int(l), "max_deviation": res.max_deviation, "diverged_count": res.diverged_count,
                     "lambda_f": res.lambda_f, "lambda_b": res.lambda_b})
    body = {"model": info, "subsystems": rows}
    out.add_file("duality.json", dumps(out.envelope(body)) + "\n")
    return body


def cmd_chern(cfg: dict, out: Outcome) -> dict:
    from .topology import chern_number

    if cfg["model"]["name"] != "chiral_sc":
        cfg["model"] = {"name": "chiral_sc", "m": 1.0} if cfg["model"]["name"] == "kitaev" else cfg["model"]
    _, h_f, info = build_supercharge(cfg, [64, 64])
    res = chern_number(h_f, gap_floor=cfg["tolerances"]["gap_floor"])
    body = {"model": info, "chern": res.value, "residual": res.residual}
    out.add_file("chern.json", dumps(out.envelope(body)) + "\n")
    return body


def cmd_winding(cfg: dict, out: Outcome) -> dict:
    from .topology import mirror_violation, winding_parity_mirror_test

    q, _, info = build_supercharge(cfg)
    if q.grid.dim != 1:
        raise ConfigInvalid("winding needs a 1D model")
    r = winding_parity_mirror_test(q)
    body = {"model": info, "construction": q.construction, "winding": r.winding, "parity": r.parity,
            "is_mirror_symmetric": r.is_mirror_symmetric, "mirror_violation": mirror_violation(q)}
    out.add_file("winding.json", dumps(out.envelope(body)) + "\n")
    return body


def cmd_gauge(cfg: dict, out: Outcome) -> dict:
    from .supercharge import gauge_boson_number_conserving, gauge_fermion_number_conserving

    q, _, info = build_supercharge(cfg)
    gf = cfg["tolerances"]["gap_floor"]
    n = q.n
    Z = nm.Z(n)
    tol = cfg["tolerances"]["invariant"]

    def comm(h):
        return nm.max_abs(Z @ h - h @ Z)

    gb = gauge_boson_number_conserving(q, gf).q
    gfe = gauge_fermion_number_conserving(q, gf).q
    rep = {
        "boson_gauge": {
            "commutator_Z_hb": comm(gb.h_b().values),
            "hf_change": nm.max_abs(gb.h_f().values - q.h_f().values),
        },
        "fermion_gauge": {
            "commutator_Z_hf": comm(gfe.h_f().values),
            "hb_change": nm.max_abs(gfe.h_b().values - q.h_b().values),
            "spectrum_change": nm.max_abs(np.linalg.eigvalsh(gfe.h_f().values) - np.linalg.eigvalsh(q.h_f().values)),
        },
    }
    for section, vals in rep.items():
        for key, v in vals.items():
            out.check(f"{section}.{key}", v, tol)
    body = {"model": info, "construction": q.construction, **rep}
    out.add_file("gauge.json", dumps(out.envelope(body)) + "\n")
    return body


def cmd_classify(cfg: dict, out: Outcome) -> dict:
    from .topology import classify

    if "az_class" not in cfg or "dim" not in cfg:
        raise ConfigInvalid("classify needs --class and --dim")
    try:
        e = classify(cfg["az_class"], cfg["dim"])
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc
    body = {"group": e.group, "category": e.susy_category, "class": e.az_class, "dim": e.d}
    out.add_file("classify.json", dumps(out.envelope(body)) + "\n")
    return body


def cmd_oracle(cfg: dict, out: Outcome) -> dict:
    from .fock_oracle import default_suite, run_oracle

    n_max = int(cfg.get("n_max", 6))
    reports = []
    for model in default_suite():
        r = run_oracle(model, n_max)
        out.check(f"{r.name} algebra residual", r.algebra_residual, 1e-10)
        out.check(f"{r.name} gap mismatch", max(r.pairing.mismatch, r.epsilon_mismatch), 1e-9)
        reports.append(r.as_dict())
    body = {"n_max": n_max, "models": reports}
    out.add_file("oracle.json", dumps(out.envelope(body)) + "\n")
    return body


def cmd_all(cfg: dict, out: Outcome) -> dict:
    """Decay profiles of both examples plus the Kitaev entanglement suite."""
    base = {k: v for k, v in cfg.items() if k not in ("model", "grid", "ray", "window", "subsystems", "r_max")}
    runs = {
        "decay_kitaev": (cmd_decay, {"model": {"name": "kitaev", "mu": 1.0, "t": 0.7}, "grid": [400]}),
        "decay_chiral": (cmd_decay, {"model": {"name": "chiral_sc", "m": 1.0}, "grid": [400, 400], "ray": [1, 1],
                                     "r_max": 100}),
        "pair_kitaev": (cmd_pair, {"model": {"name": "kitaev", "mu": 1.0, "t": 0.7}, "grid": [60]}),
        "entangle_kitaev": (cmd_entangle, {"model": {"name": "kitaev", "mu": 1.0, "t": 0.7}, "grid": [60],
                                           "subsystems": sorted(set(range(2, 31, 2)) | set(range(16, 25)))}),
        "duality_kitaev": (cmd_duality, {"model": {"name": "kitaev", "mu": 1.0, "t": 0.7}, "grid": [60]}),
    }
    summary = {}
    for name, (fn, extra) in runs.items():
        sub_cfg = validate_config({**copy.deepcopy(base), **extra, "construction": "closed_form"})
        sub = Outcome(sub_cfg, name)
        fn(sub_cfg, sub)
        for fname, text in sub.files.items():
            out.add_file(f"{name}/{fname}", text)
        if not sub.ok:
            out.ok = False
            out.failures.extend(f"{name}: {f}" for f in sub.failures)
        summary[name] = {"ok": sub.ok, "files": sorted(sub.files)}
    out.add_file("all.json", dumps(out.envelope({"runs": summary})) + "\n")
    return {"runs": summary}


COMMANDS: dict[str, Callable[[dict, Outcome], dict]] = {
    "pair": cmd_pair,
    "decay": cmd_decay,
    "entangle": cmd_entangle,
    "duality": cmd_duality,
    "chern": cmd_chern,
    "winding": cmd_winding,
    "gauge": cmd_gauge,
    "classify": cmd_classify,
    "oracle": cmd_oracle,
    "all": cmd_all,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="susy-band", description="Supersymmetric fermion/boson band pairs.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--out", help="output directory")
        s.add_argument("--model", choices=["kitaev", "chiral_sc", "random"])
        s.add_argument("--mu", type=float)
        s.add_argument("--t", type=float)
        s.add_argument("--m", type=float)
        s.add_argument("--class", dest="az_class" if name == "classify" else "cls",
                       help="AZ class (classify) or random-model class")
        s.add_argument("--n", type=int, help="orbitals of a random model")
        s.add_argument("--range", type=int, help="coupling range of a random model")
        s.add_argument("--grid", help="grid sizes, e.g. 60 or 400x400")
        s.add_argument("--construction", choices=["closed_form", "strict", "general", "two_band", "local"])
        s.add_argument("--ray", help="lattice direction, e.g. 1,1")
        s.add_argument("--r-max", dest="r_max", type=int)
        s.add_argument("--window", help="fit window, e.g. 10,100")
        s.add_argument("--l", help="subsystem lengths, e.g. 4,8,12")
        s.add_argument("--start", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--dim", type=int)
        s.add_argument("--n-max", dest="n_max", type=int)
        s.add_argument("--gap-floor", dest="gap_floor", type=float)
    return p


def _thread_limit():
    val = os.environ.get("SUSYBAND_THREADS")
    if not val:
        return contextlib.nullcontext()
    try:
        n = int(val)
        if n < 1:
            raise ValueError
    except ValueError as exc:
        raise ConfigInvalid(f"SUSYBAND_THREADS must be a positive integer, got {val!r}") from exc
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def write_outputs(outdir: Path, files: dict[str, str]) -> None:
    for name in sorted(files):
        path = outdir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(files[name])


def run(command: str, cfg: dict) -> tuple[int, dict]:
    """Run one subcommand on an already merged config; returns ``(exit_code, summary)``."""
    try:
        cfg = validate_config(cfg)
        out = Outcome(cfg, command)
        with _thread_limit():
            body = COMMANDS[command](cfg, out)
        write_outputs(Path(cfg["output_dir"]), out.files)
        summary = out.envelope({"result": body, "files": sorted(out.files)})
        return (0 if out.ok else 1), summary
    except ConfigInvalid as exc:
        return 2, {"command": command, "error": "ConfigInvalid", "message": str(exc)}
    except (SusyBandError, np.linalg.LinAlgError) as exc:
        return 1, {"command": command, "error": type(exc).__name__, "message": str(exc)}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(load_config(args.config), args)
    except ConfigInvalid as exc:
        print(dumps({"command": args.command, "error": "ConfigInvalid", "message": str(exc)}))
        return 2
    code, summary = run(args.command, cfg)
    print(dumps(summary))
    return code


if __name__ == "__main__":
    sys.exit(main())
