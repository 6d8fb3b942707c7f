"""Command-line entry point.

Exit status: 0 success, 1 a mathematical contract (slack or residual) was
violated, 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import io as mio
from .bounds import SLACK_TOL, average_bound, refined_bound
from .errors import ChainStructureError, MdpBoundsError, ValidationError
from .evaluation import eval_average, eval_discounted
from .improve import DEFAULT_ALPHA_GRID, improve, line_search
from .mdp import Policy, garnet, validate_reachability
from .sweep import load_config, parse_config_text, records_to_csv, records_to_json, timed_sweep

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _gamma(text: str) -> float:
    try:
        g = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= g < 1.0:
        raise argparse.ArgumentTypeError(f"discount factor {g} outside [0, 1)")
    return g


def _gamma_list(text: str) -> list[float]:
    return [_gamma(t) for t in text.split(",") if t.strip()]


def _seeds(text: str) -> list[int]:
    """``"0:200"`` (half-open range) or ``"1,5,9"``."""
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return list(range(int(lo), int(hi)))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


# --- commands --------------------------------------------------------------


def cmd_eval(args) -> int:
    mdp = mio.load_mdp(args.mdp)
    policy = mio.load_policy(args.policy)
    diag = validate_reachability(mdp, policy)
    report = {"diagnostics": diag.summary()}
    disc = avg = None
    if args.gamma is not None:
        disc = eval_discounted(mdp, policy, args.gamma)
        zero_mean = np.abs(np.einsum("xa,xa->x", policy.probs, disc.adv)).max()
        report["discounted"] = {
            "gamma": disc.gamma,
            "eta": disc.eta,
            "v": disc.v,
            "q": disc.q,
            "adv": disc.adv,
            "bellman_residual": disc.bellman_residual(mdp, policy),
            "advantage_mean_residual": float(zero_mean),
        }
    try:
        avg = eval_average(mdp, policy)
    except ChainStructureError as exc:
        report["average"] = {"unavailable": str(exc)}
    else:
        report["average"] = {
            "eta": avg.eta,
            "v": avg.v,
            "q": avg.q,
            "adv": avg.adv,
            "stationary": avg.stationary,
            "method": avg.method,
            "poisson_residual": avg.poisson_residual(mdp, policy),
            "normalization_residual": float(abs(avg.stationary @ avg.v)),
        }
    if args.format == "csv":
        rows = []
        for x in range(mdp.n_states):
            rows.append(
                [
                    x,
                    None if disc is None else float(disc.v[x]),
                    None if avg is None else float(avg.v[x]),
                    None if avg is None else float(avg.stationary[x]),
                ]
            )
        _emit(_csv(["state", "v_discounted", "v_average", "stationary"], rows), args.out)
    else:
        _emit(mio.dumps(report), args.out)
    return EXIT_OK


BOUND_COLUMNS = (
    "gamma",
    "kind",
    "surrogate",
    "epsilon",
    "tv_mean",
    "tau1_value",
    "classical_rhs",
    "refined_rhs",
    "true_lhs",
    "classical_slack",
    "refined_slack",
    "unavailable",
)


def cmd_bounds(args) -> int:
    mdp = mio.load_mdp(args.mdp)
    pi = mio.load_policy(args.pi)
    pi_tilde = mio.load_policy(args.pi_tilde)
    rows = []
    for g in args.gamma_list:
        rows.append(refined_bound(mdp, pi, pi_tilde, g))
    try:
        rows.append(average_bound(mdp, pi, pi_tilde))
        avg_note = None
    except ChainStructureError as exc:
        avg_note = str(exc)
    records = []
    violated = False
    for rep in rows:
        rec = rep.to_dict()
        rec["gamma"] = "average" if rep.gamma is None else rep.gamma
        rec["violations"] = rep.violations(args.tolerance)
        violated |= bool(rec["violations"])
        records.append(rec)
    if args.format == "csv":
        text = _csv(
            BOUND_COLUMNS + ("violations",),
            [[r[c] for c in BOUND_COLUMNS] + [";".join(r["violations"])] for r in records],
        )
    else:
        text = mio.dumps({"records": records, "average_unavailable": avg_note})
    _emit(text, args.out)
    if violated:
        print("contract violated: negative slack or dominance failure", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg_path = Path(args.config)
    raw = parse_config_text(cfg_path.read_text(), str(cfg_path))
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object", str(cfg_path))
    if args.seeds is not None:
        raw["seeds"] = args.seeds
    if args.gamma_list is not None:
        raw["gammas"] = args.gamma_list
    if args.ell_cap is not None:
        raw["ell_cap"] = args.ell_cap
    if args.tolerance is not None:
        raw["tolerance"] = args.tolerance
    cfg = load_config(raw, str(cfg_path))
    res = timed_sweep(cfg, jobs=args.jobs)
    body = records_to_csv(res.records) if args.format == "csv" else records_to_json(res.records)
    summary = mio.dumps(res.summary)
    if args.out is None:
        sys.stdout.write(body)
        sys.stderr.write(summary)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / ("records.csv" if args.format == "csv" else "records.json")).write_text(body)
        (out / "summary.json").write_text(summary)
    return EXIT_VIOLATION if res.summary["n_violations"] else EXIT_OK


def cmd_improve(args) -> int:
    mdp = mio.load_mdp(args.mdp)
    pi = mio.load_policy(args.pi)
    run = improve(mdp, pi, args.gamma, iterations=args.iterations)
    steps = [s.to_dict() for s in run.steps]
    eta_series = [[i, eta] for i, eta in enumerate(run.eta_trajectory)]
    step_sizes = []
    for g in args.gamma_list or []:
        st = line_search(mdp, pi, g, DEFAULT_ALPHA_GRID)
        step_sizes.append([g, st.alpha, st.alpha_classical])
    violated = any(
        s.realized_gain < max(s.certified_gain_refined, s.certified_gain_classical) - SLACK_TOL
        for s in run.steps
    )
    if args.format == "csv":
        text = _csv(["iteration", "eta"], eta_series)
    else:
        text = mio.dumps(
            {
                "gamma": run.gamma,
                "converged": run.converged,
                "steps": steps,
                "eta_series": eta_series,
                "step_size_series": {
                    "columns": ["gamma", "alpha_refined", "alpha_classical"],
                    "rows": step_sizes,
                },
                "final_policy": mio.policy_to_dict(run.final_policy),
            }
        )
    _emit(text, args.out)
    return EXIT_VIOLATION if violated else EXIT_OK


def cmd_garnet(args) -> int:
    mdp = garnet(args.n_states, args.n_actions, args.branching, args.sparsity, args.seed)
    _emit(mio.dumps_mdp(mdp), args.out)
    if args.policy_out:
        rng = np.random.default_rng(args.policy_seed)
        policy = Policy.random(mdp.n_states, mdp.n_actions, rng)
        Path(args.policy_out).write_text(mio.dumps_policy(policy))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mdpbounds", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, default="report"):
        sp.add_argument("--out", help="output file (directory for sweep); stdout if omitted")
        sp.add_argument("--format", choices=("report", "csv"), default=default)

    e = sub.add_parser("eval", help="evaluate one policy")
    e.add_argument("mdp")
    e.add_argument("policy")
    e.add_argument("--gamma", type=_gamma)
    common(e)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bounds", help="compare the improvement bounds for a policy pair")
    b.add_argument("mdp")
    b.add_argument("pi")
    b.add_argument("pi_tilde")
    b.add_argument("--gamma-list", type=_gamma_list, default=[0.9, 0.99, 0.999, 0.9999])
    b.add_argument("--tolerance", type=float, default=SLACK_TOL)
    common(b)
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("sweep", help="run a Garnet batch from a JSON config")
    s.add_argument("config")
    s.add_argument("--seeds", type=_seeds)
    s.add_argument("--gamma-list", type=_gamma_list)
    s.add_argument("--ell-cap", type=int)
    s.add_argument("--tolerance", type=float)
    s.add_argument("--jobs", type=int, default=1)
    common(s, default="csv")
    s.set_defaults(func=cmd_sweep)

    i = sub.add_parser("improve", help="run the conservative improvement loop")
    i.add_argument("mdp")
    i.add_argument("pi")
    i.add_argument("--gamma", type=_gamma, required=True)
    i.add_argument("--iterations", type=int, default=10)
    i.add_argument("--gamma-list", type=_gamma_list, help="discount factors for the step-size series")
    common(i)
    i.set_defaults(func=cmd_improve)

    g = sub.add_parser("garnet", help="write a random Garnet MDP (and optionally a random policy)")
    g.add_argument("--n-states", type=int, required=True)
    g.add_argument("--n-actions", type=int, required=True)
    g.add_argument("--branching", type=int, required=True)
    g.add_argument("--sparsity", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--policy-out")
    g.add_argument("--policy-seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_garnet)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MdpBoundsError, OSError) as exc:
        if isinstance(exc, ValidationError):
            err = {"error": "validation", "location": exc.location, "message": str(exc)}
        else:
            err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
