"""Declarative run configuration: parse, validate, normalize, serialize.

A config is one YAML document.  Parsing validates every field and fills
documented defaults, keeping the result as a plain normalized tree so that
serialize/parse round trips are lossless; ``build_*`` methods materialize
the runtime objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import yaml

from .benchmarks import EXPERIMENTS, SYNTHETIC_DIMS, discretized_normal_weights, eval_synthetic, grid_points
from .env import EnvModel, uniform_env
from .gp import KernelSpec, NoiseModel
from .optimizer import (BASELINE_KINDS, BetaSchedule, BoundMethod, ErrorParams,
                        GPConfig, Objective, ProblemSpec)
from .risk import RISK_KINDS, AmbiguitySet, RiskSpec

__all__ = ["ConfigError", "RunConfig", "parse_config", "serialize_config"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _dict(node, path) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        _fail(path, f"expected a mapping, got {type(node).__name__}")
    return node


def _num(node, path, *, lo=None, hi=None, allow_none=False):
    if node is None and allow_none:
        return None
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        _fail(path, f"expected a number, got {node!r}")
    v = float(node)
    if lo is not None and v < lo:
        _fail(path, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        _fail(path, f"must be <= {hi}, got {v}")
    return v


def _int(node, path, *, lo=None):
    if isinstance(node, bool) or not isinstance(node, int):
        _fail(path, f"expected an integer, got {node!r}")
    if lo is not None and node < lo:
        _fail(path, f"must be >= {lo}, got {node}")
    return int(node)


def _choice(node, path, options):
    if node not in options:
        _fail(path, f"expected one of {sorted(options)}, got {node!r}")
    return node


def _numlist(node, path) -> list[float]:
    if not isinstance(node, list) or not node:
        _fail(path, "expected a nonempty list of numbers")
    return [_num(v, f"{path}[{i}]") for i, v in enumerate(node)]


# ---------------------------------------------------------------------------
# section normalizers


def _norm_grid(node, path) -> dict:
    node = _dict(node, path)
    if "points" in node:
        pts = node["points"]
        if not isinstance(pts, list) or not pts:
            _fail(f"{path}.points", "expected a nonempty list of points")
        rows = [[_num(v, f"{path}.points[{i}][{j}]") for j, v in enumerate(np.atleast_1d(row))]
                for i, row in enumerate(pts)]
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            _fail(f"{path}.points", "ragged point list")
        return {"points": rows}
    for key in ("lower", "upper", "counts"):
        if key not in node:
            _fail(f"{path}.{key}", "required for a linspace grid")
    lower = _numlist(node["lower"], f"{path}.lower")
    upper = _numlist(node["upper"], f"{path}.upper")
    counts = [_int(c, f"{path}.counts[{i}]", lo=1) for i, c in enumerate(node["counts"])]
    if not len(lower) == len(upper) == len(counts):
        _fail(path, "lower/upper/counts lengths differ")
    return {"lower": lower, "upper": upper, "counts": counts}


def _grid_size(spec: dict) -> int:
    if "points" in spec:
        return len(spec["points"])
    return int(np.prod(spec["counts"]))


def _norm_env(node, path, n_env: int) -> dict:
    node = _dict(node, path)
    kind = _choice(node.get("distribution", "uniform"), f"{path}.distribution",
                   ("uniform", "discretized_normal", "explicit"))
    out: dict[str, Any] = {"distribution": kind}
    if kind == "explicit":
        w = _numlist(node.get("weights"), f"{path}.weights")
        if len(w) != n_env:
            _fail(f"{path}.weights", f"expected {n_env} weights, got {len(w)}")
        if any(v < 0 for v in w):
            _fail(f"{path}.weights", "weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-9:
            _fail(f"{path}.weights", f"weights sum to {sum(w)}, expected 1")
        out["weights"] = w
    if "per_design" in node:
        pd = _dict(node["per_design"], f"{path}.per_design")
        norm = {}
        for key, sub in pd.items():
            sub = _dict(sub, f"{path}.per_design[{key}]")
            sup = [_int(i, f"{path}.per_design[{key}].support[]", lo=0)
                   for i in sub.get("support", [])]
            if not sup:
                _fail(f"{path}.per_design[{key}].support", "empty support")
            if max(sup) >= n_env:
                _fail(f"{path}.per_design[{key}].support", "index outside the env grid")
            w = _numlist(sub.get("weights"), f"{path}.per_design[{key}].weights")
            if len(w) != len(sup):
                _fail(f"{path}.per_design[{key}].weights", "length mismatch with support")
            norm[int(key)] = {"support": sup, "weights": w}
        out["per_design"] = norm
    return out


def _norm_objective(node, path, d_x: int, d_w: int) -> dict:
    node = _dict(node, path)
    noise = _num(node.get("noise_std", 0.0), f"{path}.noise_std", lo=0.0)
    if "table" in node:
        table = node["table"]
        if not isinstance(table, list) or not table:
            _fail(f"{path}.table", "expected a nonempty matrix of values")
        rows = [[_num(v, f"{path}.table[{i}][{j}]") for j, v in enumerate(r)]
                for i, r in enumerate(table)]
        return {"table": rows, "noise_std": noise}
    kind = _choice(node.get("function"), f"{path}.function", tuple(SYNTHETIC_DIMS))
    inputs = node.get("inputs", "x")
    if isinstance(inputs, str):
        _choice(inputs, f"{path}.inputs", ("x", "w", "x_plus_w"))
    else:
        if not isinstance(inputs, list) or not inputs:
            _fail(f"{path}.inputs", "expected 'x', 'w', 'x_plus_w', or a token list")
        for i, tok in enumerate(inputs):
            ok = (isinstance(tok, str) and len(tok) >= 2 and tok[0] in "xw"
                  and tok[1:].isdigit())
            if not ok:
                _fail(f"{path}.inputs[{i}]", f"expected tokens like 'x0'/'w1', got {tok!r}")
            dim = int(tok[1:])
            limit = d_x if tok[0] == "x" else d_w
            if dim >= limit:
                _fail(f"{path}.inputs[{i}]", f"coordinate {tok!r} outside the grid dimension")
    return {"function": kind, "inputs": inputs, "noise_std": noise}


def _norm_risk(node, path, n_objectives: int) -> dict:
    node = _dict(node, path)
    kind = _choice(node.get("kind"), f"{path}.kind", RISK_KINDS)
    out: dict[str, Any] = {"kind": kind}
    obj = node.get("objective", 0)
    out["objective"] = _int(obj, f"{path}.objective", lo=0)
    if out["objective"] >= n_objectives:
        _fail(f"{path}.objective", f"objective {out['objective']} not defined")
    if kind in ("var", "cvar"):
        a = _num(node.get("alpha"), f"{path}.alpha")
        if not 0.0 < a < 1.0:
            _fail(f"{path}.alpha", f"must lie in (0, 1), got {a}")
        out["alpha"] = a
    if kind == "prob_threshold":
        out["threshold"] = _num(node.get("threshold"), f"{path}.threshold")
    if "rkhs_bound" in node:
        b = _num(node["rkhs_bound"], f"{path}.rkhs_bound")
        if b <= 0:
            _fail(f"{path}.rkhs_bound", "must be positive")
        out["rkhs_bound"] = b
    if kind in ("dist_robust", "lipschitz"):
        out["inner"] = _norm_risk(node.get("inner"), f"{path}.inner", n_objectives)
    if kind == "dist_robust":
        amb = _dict(node.get("ambiguity"), f"{path}.ambiguity")
        akind = _choice(amb.get("kind"), f"{path}.ambiguity.kind", ("explicit_list", "l1_ball"))
        if akind == "l1_ball":
            out["ambiguity"] = {"kind": akind,
                                "radius": _num(amb.get("radius", 0.0),
                                               f"{path}.ambiguity.radius", lo=0.0, hi=2.0)}
        else:
            cands = amb.get("candidates")
            if not isinstance(cands, list) or not cands:
                _fail(f"{path}.ambiguity.candidates", "expected a nonempty list of weight vectors")
            out["ambiguity"] = {"kind": akind,
                                "candidates": [_numlist(c, f"{path}.ambiguity.candidates[{i}]")
                                               for i, c in enumerate(cands)]}
    if kind == "lipschitz":
        m = _dict(node.get("map"), f"{path}.map")
        _choice(m.get("kind", "affine"), f"{path}.map.kind", ("affine",))
        scale = _num(m.get("scale", 1.0), f"{path}.map.scale")
        if scale == 0:
            _fail(f"{path}.map.scale", "scale 0 is not a monotone map")
        out["map"] = {"kind": "affine", "scale": scale,
                      "offset": _num(m.get("offset", 0.0), f"{path}.map.offset")}
        k = _num(node.get("constant", abs(scale)), f"{path}.constant")
        if k <= 0:
            _fail(f"{path}.constant", "Lipschitz constant must be positive")
        out["constant"] = k
    if kind == "weighted_sum":
        terms = node.get("terms")
        if not isinstance(terms, list) or not terms:
            _fail(f"{path}.terms", "expected a nonempty term list")
        norm_terms = []
        for i, term in enumerate(terms):
            term = _dict(term, f"{path}.terms[{i}]")
            coeff = _num(term.get("coeff"), f"{path}.terms[{i}].coeff", lo=0.0)
            if "risk" in term:
                sub = _norm_risk(term["risk"], f"{path}.terms[{i}].risk", n_objectives)
            else:
                sub = {"kind": "bayes",
                       "objective": _int(term.get("objective", 0),
                                         f"{path}.terms[{i}].objective", lo=0)}
                if sub["objective"] >= n_objectives:
                    _fail(f"{path}.terms[{i}].objective", "objective not defined")
            norm_terms.append({"coeff": coeff, "risk": sub})
        out["terms"] = norm_terms
    return out


def _norm_schedule(node, path) -> dict:
    node = _dict(node, path)
    kind = _choice(node.get("kind", "fixed"), f"{path}.kind",
                   ("fixed", "theoretical", "srinivas", "sampled"))
    out = {"kind": kind}
    if kind == "fixed":
        out["value"] = _num(node.get("value", 3.0), f"{path}.value", lo=0.0)
    else:
        d = _num(node.get("delta", 0.1), f"{path}.delta")
        if not 0 < d < 1:
            _fail(f"{path}.delta", f"must lie in (0, 1), got {d}")
        out["delta"] = d
    if kind == "sampled":
        out["rate"] = _num(node.get("rate", 0.5), f"{path}.rate", lo=0.0)
    return out


def _norm_gp(node, path) -> dict:
    node = _dict(node, path)
    kern = _dict(node.get("kernel"), f"{path}.kernel")
    out = {"kernel": {
        "kind": _choice(kern.get("kind", "gaussian"), f"{path}.kernel.kind", ("gaussian",)),
        "length_scale": _num(kern.get("length_scale", 1.0), f"{path}.kernel.length_scale"),
        "variance": _num(kern.get("variance", 1.0), f"{path}.kernel.variance"),
        "scaling": _num(kern.get("scaling", 1.0), f"{path}.kernel.scaling"),
    }}
    for key in ("length_scale", "variance", "scaling"):
        if out["kernel"][key] <= 0:
            _fail(f"{path}.kernel.{key}", "must be positive")
    noise = _dict(node.get("noise"), f"{path}.noise")
    out["noise"] = {"variance": _num(noise.get("variance", 1e-6), f"{path}.noise.variance", lo=0.0)}
    out["jitter"] = _num(node.get("jitter", 1e-10), f"{path}.jitter", lo=0.0)
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Normalized configuration tree plus builders for the runtime objects."""

    data: dict

    # -- convenience accessors -------------------------------------------
    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def trials(self) -> int:
        return self.data["trials"]

    @property
    def is_benchmark(self) -> bool:
        return "benchmark" in self.data

    @property
    def output(self) -> dict:
        return self.data["output"]

    # -- builders ----------------------------------------------------------
    def build_grids(self) -> tuple[np.ndarray, np.ndarray]:
        p = self.data["problem"]
        return _materialize_grid(p["design_grid"]), _materialize_grid(p["env_grid"])

    def build_env_model(self) -> EnvModel:
        p = self.data["problem"]
        env_grid = _materialize_grid(p["env_grid"])
        n = env_grid.shape[0]
        spec = p["env"]
        if spec["distribution"] == "uniform":
            weights = np.full(n, 1.0 / n)
        elif spec["distribution"] == "discretized_normal":
            weights = discretized_normal_weights(env_grid)
        else:
            weights = np.asarray(spec["weights"], float)
        per_design = None
        mode = "shared"
        if "per_design" in spec:
            mode = "per_design"
            per_design = {x: (tuple(v["support"]), tuple(v["weights"]))
                          for x, v in spec["per_design"].items()}
        return EnvModel(support=tuple(range(n)), weights=tuple(weights), mode=mode,
                        per_design=per_design, distribution_kind=spec["distribution"])

    def build_problem(self) -> ProblemSpec:
        p = self.data["problem"]
        design_grid, env_grid = self.build_grids()
        objectives = tuple(_materialize_objective(o, design_grid, env_grid)
                           for o in p["objectives"])
        risks = tuple(_materialize_risk(r, self) for r in p["risks"])
        eps = p["epsilon"]
        return ProblemSpec(
            design_grid=design_grid, env_grid=env_grid, env_model=self.build_env_model(),
            objectives=objectives, risks=risks, mode=p["mode"],
            bound_method=BoundMethod(kind=p["bound_method"]["kind"],
                                     sample_count=p["bound_method"].get("count", 64)),
            epsilon=None if eps is None else float(eps),
            budget=p["budget"], init_points=p["init_points"],
            error_params=ErrorParams(**p["error_params"]))

    def build_gp_configs(self) -> list[GPConfig]:
        out = []
        for g in self.data["gp"]:
            k = g["kernel"]
            out.append(GPConfig(
                kernel=KernelSpec(kind=k["kind"], length_scale=k["length_scale"],
                                  variance=k["variance"], scaling=k["scaling"]),
                noise=NoiseModel(variance=g["noise"]["variance"]),
                jitter=g["jitter"]))
        return out

    def build_schedule(self) -> BetaSchedule:
        return BetaSchedule(**self.data["schedule"])


def _materialize_grid(spec: dict) -> np.ndarray:
    if "points" in spec:
        return np.asarray(spec["points"], float)
    return grid_points(spec["lower"], spec["upper"], spec["counts"])


def _materialize_objective(spec: dict, design_grid, env_grid) -> Objective:
    if "table" in spec:
        table = np.asarray(spec["table"], float)
        n_x, n_w = design_grid.shape[0], env_grid.shape[0]
        if table.shape != (n_x, n_w):
            raise ConfigError(f"problem.objectives.table: expected shape {(n_x, n_w)}, "
                              f"got {table.shape}")
        dmap = {tuple(row): i for i, row in enumerate(np.round(design_grid, 12))}
        emap = {tuple(row): i for i, row in enumerate(np.round(env_grid, 12))}

        def fn(x, w, _t=table, _d=dmap, _e=emap):
            return float(_t[_d[tuple(np.round(x, 12))], _e[tuple(np.round(w, 12))]])

        return Objective(fn=fn, noise_std=spec["noise_std"])

    kind, inputs = spec["function"], spec["inputs"]
    need = SYNTHETIC_DIMS[kind]

    if isinstance(inputs, str):
        if inputs == "x":
            fn = lambda x, w: eval_synthetic(kind, x)
            have = design_grid.shape[1]
        elif inputs == "w":
            fn = lambda x, w: eval_synthetic(kind, w)
            have = env_grid.shape[1]
        else:
            fn = lambda x, w: eval_synthetic(kind, x + w)
            have = design_grid.shape[1]
            if env_grid.shape[1] != have:
                raise ConfigError("problem.objectives.inputs: x_plus_w needs matching "
                                  "design/env dimensions")
    else:
        toks = [(t[0], int(t[1:])) for t in inputs]
        fn = lambda x, w: eval_synthetic(kind, [x[i] if s == "x" else w[i] for s, i in toks])
        have = len(toks)
    if have != need:
        raise ConfigError(f"problem.objectives: {kind} expects {need} inputs, wired {have}")
    return Objective(fn=fn, noise_std=spec["noise_std"])


def _materialize_risk(spec: dict, cfg: RunConfig) -> RiskSpec:
    kind = spec["kind"]
    kwargs: dict[str, Any] = {"kind": kind, "objective_index": spec.get("objective", 0)}
    if "alpha" in spec:
        kwargs["alpha"] = spec["alpha"]
    if "threshold" in spec:
        kwargs["threshold"] = spec["threshold"]
    if "rkhs_bound" in spec:
        kwargs["rkhs_bound"] = spec["rkhs_bound"]
    if kind in ("dist_robust", "lipschitz"):
        kwargs["inner"] = _materialize_risk(spec["inner"], cfg)
    if kind == "dist_robust":
        amb = spec["ambiguity"]
        if amb["kind"] == "l1_ball":
            kwargs["ambiguity"] = AmbiguitySet(kind="l1_ball", radius=amb["radius"])
        else:
            env = cfg.build_env_model()
            cands = tuple(env.reweighted(c) for c in amb["candidates"])
            kwargs["ambiguity"] = AmbiguitySet(kind="explicit_list", candidates=cands)
    if kind == "lipschitz":
        a, b = spec["map"]["scale"], spec["map"]["offset"]
        kwargs["mapping"] = lambda v, _a=a, _b=b: _a * v + _b
        kwargs["lipschitz_constant"] = spec["constant"]
    if kind == "weighted_sum":
        kwargs["terms"] = tuple((t["coeff"], _materialize_risk(t["risk"], cfg))
                                for t in spec["terms"])
    return RiskSpec(**kwargs)


# ---------------------------------------------------------------------------
# top-level parse


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML run configuration."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    raw = _dict(raw, "config")
    data: dict[str, Any] = {}
    data["seed"] = _int(raw.get("seed", 0), "seed", lo=0)
    data["trials"] = _int(raw.get("trials", 1), "trials", lo=1)

    out = _dict(raw.get("output"), "output")
    data["output"] = {
        "directory": str(out.get("directory", "out")),
        "figures": bool(out.get("figures", True)),
        "workers": _int(out.get("workers", 1), "output.workers", lo=1),
    }
    data["schedule"] = _norm_schedule(raw.get("schedule"), "schedule")

    if "benchmark" in raw:
        b = _dict(raw["benchmark"], "benchmark")
        data["benchmark"] = {
            "name": _choice(b.get("name"), "benchmark.name", tuple(EXPERIMENTS)),
            "trials": _int(b.get("trials", data["trials"]), "benchmark.trials", lo=1),
            "budget": _int(b.get("budget", 150), "benchmark.budget", lo=1),
            "methods": [
                _choice(m, f"benchmark.methods[{i}]", ("proposed",) + BASELINE_KINDS)
                for i, m in enumerate(b.get("methods", ["proposed", "random", "us"]))],
            "mode": _choice(b.get("mode", "simulator"), "benchmark.mode",
                            ("simulator", "uncontrollable")),
        }
        return RunConfig(data=data)

    if "problem" not in raw:
        _fail("problem", "required unless a benchmark section is given")
    p = _dict(raw["problem"], "problem")
    prob: dict[str, Any] = {}
    prob["design_grid"] = _norm_grid(p.get("design_grid"), "problem.design_grid")
    prob["env_grid"] = _norm_grid(p.get("env_grid"), "problem.env_grid")
    n_env = _grid_size(prob["env_grid"])
    prob["env"] = _norm_env(p.get("env"), "problem.env", n_env)

    objs = p.get("objectives")
    if not isinstance(objs, list) or not objs:
        _fail("problem.objectives", "expected a nonempty list")
    d_x = (len(prob["design_grid"].get("counts", []))
           or len(prob["design_grid"]["points"][0]))
    d_w = (len(prob["env_grid"].get("counts", []))
           or len(prob["env_grid"]["points"][0]))
    prob["objectives"] = [_norm_objective(o, f"problem.objectives[{i}]", d_x, d_w)
                          for i, o in enumerate(objs)]

    risks = p.get("risks")
    if not isinstance(risks, list) or len(risks) < 2:
        _fail("problem.risks", "expected a list of at least two risk measures")
    prob["risks"] = [_norm_risk(r, f"problem.risks[{i}]", len(prob["objectives"]))
                     for i, r in enumerate(risks)]

    prob["mode"] = _choice(p.get("mode", "simulator"), "problem.mode",
                           ("simulator", "uncontrollable"))
    bm = _dict(p.get("bound_method"), "problem.bound_method")
    bm_kind = _choice(bm.get("kind", "decomposition"), "problem.bound_method.kind",
                      ("decomposition", "sampling"))
    prob["bound_method"] = {"kind": bm_kind}
    if bm_kind == "sampling":
        prob["bound_method"]["count"] = _int(bm.get("count", 64),
                                             "problem.bound_method.count", lo=1)
    eps = p.get("epsilon", None)
    prob["epsilon"] = None if eps is None else _num(eps, "problem.epsilon", lo=0.0)
    prob["budget"] = _int(p.get("budget", 100), "problem.budget", lo=0)
    prob["init_points"] = _int(p.get("init_points", 1), "problem.init_points", lo=0)
    ep = _dict(p.get("error_params"), "problem.error_params")
    prob["error_params"] = {k: _num(ep.get(k, 0.0), f"problem.error_params.{k}", lo=0.0)
                            for k in ("lcb", "ucb", "pf", "design", "env")}
    prob["compute_truth"] = bool(p.get("compute_truth", False))
    data["problem"] = prob

    gps = raw.get("gp")
    n_obj = len(prob["objectives"])
    if gps is None:
        gps = [{} for _ in range(n_obj)]
    if not isinstance(gps, list):
        _fail("gp", "expected a list with one entry per objective")
    if len(gps) == 1 and n_obj > 1:
        gps = gps * n_obj
    if len(gps) != n_obj:
        _fail("gp", f"expected {n_obj} entries (one per objective), got {len(gps)}")
    data["gp"] = [_norm_gp(g, f"gp[{i}]") for i, g in enumerate(gps)]
    return RunConfig(data=data)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical YAML for a parsed config; parse(serialize(c)) == c."""
    return yaml.safe_dump(cfg.data, sort_keys=True, default_flow_style=None)
