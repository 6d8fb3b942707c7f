"""Batch experiments over Garnet instances.

A sweep config (JSON) fixes how instances and policy pairs are drawn from a
seed, the discount factors to evaluate, and which checks to run. Every record
is a pure function of ``(config, seed, gamma)``, so sweeps are reproducible
and records can be recomputed one at a time.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import jsonschema
import numpy as np

from . import linalg
from .bounds import (
    SLACK_TOL,
    average_bound,
    occupancy_gap_chain,
    perturbation_identity_check,
    refined_bound,
)
from .ergodicity import (
    discounted_group_inverse,
    matr_diff_check,
    minorization_bound,
    spectral_bounds,
    tau1,
)
from .errors import ChainStructureError, MinorizationError, ValidationError
from .mdp import Mdp, Policy, chain_diagnostics, garnet, induce_chain
from .occupancy import all_occupancies, discounted_transition

ALL_CHECKS = (
    "occupancy",
    "group_inverse",
    "matr_diff",
    "bounds",
    "perturbation",
    "gap_chain",
    "spectral",
    "minorization",
    "average",
)

_INT_OR_RANGE = {
    "oneOf": [
        {"type": "integer", "minimum": 1},
        {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 2,
            "maxItems": 2,
        },
    ]
}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["seeds", "gammas"],
    "properties": {
        "n_states": _INT_OR_RANGE,
        "n_actions": _INT_OR_RANGE,
        "branching": _INT_OR_RANGE,
        "reward_sparsity": {"type": "number", "minimum": 0, "maximum": 1},
        "mix": {
            "oneOf": [
                {"type": "number", "minimum": 0, "maximum": 1},
                {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            ]
        },
        "seeds": {
            "oneOf": [
                {"type": "array", "items": {"type": "integer", "minimum": 0}},
                {
                    "type": "object",
                    "required": ["start", "stop"],
                    "additionalProperties": False,
                    "properties": {
                        "start": {"type": "integer", "minimum": 0},
                        "stop": {"type": "integer", "minimum": 0},
                    },
                },
            ]
        },
        "gammas": {
            "type": "array",
            "items": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        },
        "checks": {"type": "array", "items": {"enum": list(ALL_CHECKS)}},
        "ell_cap": {"type": ["integer", "null"], "minimum": 1},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
    },
}

DEFAULTS = {
    "n_states": [2, 20],
    "n_actions": [2, 5],
    "branching": [2, 20],
    "reward_sparsity": 0.0,
    "mix": [0.0, 1.0],
    "checks": list(ALL_CHECKS),
    "ell_cap": None,
    "tolerance": SLACK_TOL,
}


def load_config(data: dict, source: str = "config") -> dict:
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in exc.absolute_path)
        raise ValidationError(exc.message, f"{source}{path}") from exc
    cfg = {**DEFAULTS, **data}
    seeds = cfg["seeds"]
    if isinstance(seeds, dict):
        seeds = list(range(seeds["start"], seeds["stop"]))
    cfg["seeds"] = sorted(set(seeds))
    return cfg


def _draw(rng: np.random.Generator, value, cap: int | None = None) -> int:
    if isinstance(value, int):
        lo = hi = value
    else:
        lo, hi = value
    if cap is not None:
        lo, hi = min(lo, cap), min(hi, cap)
    return int(rng.integers(lo, hi + 1))


@dataclass(frozen=True)
class Instance:
    seed: int
    mdp: Mdp
    pi: Policy
    pi_tilde: Policy


def make_instance(cfg: dict, seed: int) -> Instance:
    """Draw the Garnet MDP and the (old, new) policy pair for one seed.

    ``pi`` has every row drawn from the uniform simplex; ``pi_tilde`` mixes
    ``pi`` with an independent random policy at a weight drawn from ``mix``.
    """
    rng = np.random.default_rng([seed, 0x5EED])
    n = _draw(rng, cfg["n_states"])
    m = _draw(rng, cfg["n_actions"])
    b = _draw(rng, cfg["branching"], cap=n)
    mdp = garnet(n, m, b, cfg["reward_sparsity"], seed=seed)
    pi = Policy.random(n, m, rng)
    mix = cfg["mix"]
    w = float(mix) if not isinstance(mix, list) else float(rng.uniform(mix[0], mix[1]))
    pi_tilde = pi.mix(Policy.random(n, m, rng), w)
    return Instance(seed, mdp, pi, pi_tilde)


RECORD_FIELDS = (
    "seed",
    "n_states",
    "n_actions",
    "gamma",
    "surrogate",
    "epsilon",
    "tv_mean",
    "tau1",
    "classical_rhs",
    "refined_rhs",
    "true_lhs",
    "classical_slack",
    "refined_slack",
    "trace_bound",
    "cardinality_bound",
    "lambda2_modulus",
    "minorization_ell",
    "minorization_delta",
    "minorization_bound",
    "perturbation_residual",
    "perturbation_residual_opposite_sign",
    "occupancy_gap",
    "contraction_term",
    "tv_term",
    "stationarity_residual",
    "occupancy_method_gap",
    "group_inverse_residual",
    "group_inverse_row_sum",
    "matr_diff_gap",
    "matr_diff_gap_stationary",
    "matr_diff_tau_gap",
    "violations",
)


def _discounted_record(inst: Instance, gamma: float, cfg: dict) -> dict:
    checks = set(cfg["checks"])
    tol = cfg["tolerance"]
    mdp, pi, pt = inst.mdp, inst.pi, inst.pi_tilde
    mu = mdp.initial_dist
    old, new = induce_chain(mdp, pi), induce_chain(mdp, pt)
    rec = dict.fromkeys(RECORD_FIELDS)
    rec.update(seed=inst.seed, n_states=mdp.n_states, n_actions=mdp.n_actions, gamma=gamma)
    bad = []
    if "occupancy" in checks:
        occ = all_occupancies(old, mu, gamma, tol=np.inf)
        pg = discounted_transition(old, mu, gamma)
        rec["stationarity_residual"] = occ["resolvent"].stationarity_residual(pg)
        dists = [o.dist for o in occ.values()]
        rec["occupancy_method_gap"] = max(
            float(np.abs(a - b).sum()) for a in dists for b in dists
        )
        if rec["stationarity_residual"] > 1e-9:
            bad.append("stationarity")
        if rec["occupancy_method_gap"] > 1e-8:
            bad.append("occupancy_agreement")
    if "group_inverse" in checks:
        gi = discounted_group_inverse(old, mu, gamma)
        rec["group_inverse_residual"] = gi.max_residual
        rec["group_inverse_row_sum"] = float(np.abs(gi.d_matrix.sum(axis=1)).max())
        if gi.max_residual > 1e-8:
            bad.append("group_inverse")
        if rec["group_inverse_row_sum"] > 1e-9:
            bad.append("group_inverse_row_sum")
    ergodic_old = chain_diagnostics(old.transition)
    ergodic_old = ergodic_old.unichain and ergodic_old.aperiodic
    diag_new = chain_diagnostics(new.transition)
    ergodic_new = diag_new.unichain and diag_new.aperiodic
    if "matr_diff" in checks and ergodic_old and gamma > 0.0:
        md = matr_diff_check(old, mu, gamma)
        rec["matr_diff_gap"] = md.gap_with_occupancy
        rec["matr_diff_gap_stationary"] = md.gap_with_stationary
        rec["matr_diff_tau_gap"] = md.tau_gap
        if md.gap_with_occupancy > 1e-8:
            bad.append("matr_diff")
        if md.tau_gap > 1e-12:
            bad.append("matr_diff_tau")
    if "bounds" in checks:
        rep = refined_bound(mdp, pi, pt, gamma)
        rec.update(
            surrogate=rep.surrogate,
            epsilon=rep.epsilon,
            tv_mean=rep.tv_mean,
            tau1=rep.tau1_value,
            classical_rhs=rep.classical_rhs,
            refined_rhs=rep.refined_rhs,
            true_lhs=rep.true_lhs,
            classical_slack=rep.classical_slack,
            refined_slack=rep.refined_slack,
        )
        bad.extend(rep.violations(tol))
        if rep.tau1_value is not None and rep.tau1_value > 1.0 / (1.0 - gamma) + tol:
            bad.append("tau1_dominance")
    if "perturbation" in checks:
        pr = perturbation_identity_check(mdp, pi, pt, gamma)
        rec["perturbation_residual"] = pr.residual
        rec["perturbation_residual_opposite_sign"] = pr.opposite_sign
        if pr.residual > 1e-9:
            bad.append("perturbation_identity")
    if "gap_chain" in checks:
        gc = occupancy_gap_chain(mdp, pi, pt, gamma, strict=False)
        rec.update(
            occupancy_gap=gc.occupancy_gap,
            contraction_term=gc.contraction_term,
            tv_term=gc.tv_term,
        )
        if not gc.ordered(tol):
            bad.append("gap_chain")
    if "spectral" in checks and ergodic_new:
        sb = spectral_bounds(new, mu, gamma)
        rec.update(
            tau1=sb.tau1,
            trace_bound=sb.trace_bound,
            cardinality_bound=sb.cardinality_bound,
            lambda2_modulus=sb.lambda2_modulus,
        )
        if sb.tau1 > sb.trace_bound + tol or sb.trace_bound > sb.cardinality_bound + tol:
            bad.append("spectral_chain")
    if "minorization" in checks and diag_new.irreducible and diag_new.aperiodic:
        try:
            cert = minorization_bound(new, mu, gamma, cfg["ell_cap"])
        except MinorizationError:
            bad.append("minorization_unavailable")
        else:
            rec.update(
                minorization_ell=cert.ell,
                minorization_delta=cert.delta,
                minorization_bound=cert.bound_value,
            )
            t = rec["tau1"]
            if t is None:
                t = _tau1_new(new, mu, gamma)
                rec["tau1"] = t
            if t > cert.bound_value + tol:
                bad.append("minorization_bound")
    rec["violations"] = bad
    return rec


def _tau1_new(chain, mu, gamma) -> float:
    return tau1(discounted_group_inverse(chain, mu, gamma).d_matrix).value


def _average_record(inst: Instance, cfg: dict) -> dict | None:
    mdp = inst.mdp
    rec = dict.fromkeys(RECORD_FIELDS)
    rec.update(seed=inst.seed, n_states=mdp.n_states, n_actions=mdp.n_actions, gamma="average")
    bad = []
    try:
        rep = average_bound(mdp, inst.pi, inst.pi_tilde)
    except ChainStructureError:
        return None
    rec.update(
        surrogate=rep.surrogate,
        epsilon=rep.epsilon,
        tv_mean=rep.tv_mean,
        tau1=rep.tau1_value,
        refined_rhs=rep.refined_rhs,
        true_lhs=rep.true_lhs,
        refined_slack=rep.refined_slack,
    )
    bad.extend(rep.violations(cfg["tolerance"]))
    if "group_inverse" in cfg["checks"]:
        gi = linalg.group_inverse(induce_chain(mdp, inst.pi).transition)
        rec["group_inverse_residual"] = gi.max_residual
        rec["group_inverse_row_sum"] = float(np.abs(gi.d_matrix.sum(axis=1)).max())
        if gi.max_residual > 1e-8:
            bad.append("group_inverse")
        if rec["group_inverse_row_sum"] > 1e-9:
            bad.append("group_inverse_row_sum")
    rec["violations"] = bad
    return rec


def instance_records(cfg: dict, seed: int) -> list[dict]:
    inst = make_instance(cfg, seed)
    records = [_discounted_record(inst, float(g), cfg) for g in cfg["gammas"]]
    if "average" in cfg["checks"]:
        avg = _average_record(inst, cfg)
        if avg is not None:
            records.append(avg)
    return records


def _instance_records_star(args):
    return instance_records(*args)


@dataclass(frozen=True)
class SweepResult:
    records: list[dict]
    summary: dict


def summarize(records: list[dict], n_instances: int) -> dict:
    violations: dict[str, int] = {}
    for rec in records:
        for v in rec["violations"]:
            violations[v] = violations.get(v, 0) + 1

    def _max(name):
        vals = [r[name] for r in records if r[name] is not None]
        return max(vals) if vals else None

    def _min(name):
        vals = [r[name] for r in records if r[name] is not None]
        return min(vals) if vals else None

    slacks = [
        s for r in records for s in (r["classical_slack"], r["refined_slack"]) if s is not None
    ]
    return {
        "n_instances": n_instances,
        "n_records": len(records),
        "n_violations": sum(violations.values()),
        "violations": dict(sorted(violations.items())),
        "max_stationarity_residual": _max("stationarity_residual"),
        "max_occupancy_method_gap": _max("occupancy_method_gap"),
        "max_group_inverse_residual": _max("group_inverse_residual"),
        "max_matr_diff_gap": _max("matr_diff_gap"),
        "max_perturbation_residual": _max("perturbation_residual"),
        "min_classical_slack": _min("classical_slack"),
        "min_refined_slack": _min("refined_slack"),
        "max_negative_slack": min([0.0] + slacks) if slacks else 0.0,
        "refined_unavailable": sum(
            1 for r in records if r["surrogate"] is not None and r["refined_rhs"] is None
        ),
    }


def run_sweep(cfg: dict, jobs: int = 1) -> SweepResult:
    """Run every seed; records are ordered by (seed, gamma as listed, average last)."""
    seeds = cfg["seeds"]
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_instance_records_star, [(cfg, s) for s in seeds]))
    else:
        chunks = [instance_records(cfg, s) for s in seeds]
    records = [r for chunk in chunks for r in chunk]
    return SweepResult(records, summarize(records, len(seeds)))


# --- output ----------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, list):
        return ";".join(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for rec in records:
        w.writerow([_cell(rec[k]) for k in RECORD_FIELDS])
    return buf.getvalue()


def records_to_json(records: list[dict]) -> str:
    from .io import dumps

    return dumps({"fields": list(RECORD_FIELDS), "records": records})


def timed_sweep(cfg: dict, jobs: int = 1) -> SweepResult:
    """:func:`run_sweep` plus wall time in the summary (records stay timing-free)."""
    t0 = time.perf_counter()
    res = run_sweep(cfg, jobs)
    summary = dict(res.summary, elapsed_seconds=round(time.perf_counter() - t0, 3))
    return SweepResult(res.records, summary)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """JSON-decode a config, reporting syntax errors as ``source:line:col``."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from exc


def config_from_text(text: str, source: str = "<config>") -> dict:
    return load_config(parse_config_text(text, source), source)
