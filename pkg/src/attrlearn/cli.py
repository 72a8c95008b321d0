"""Command-line front end.

Every command writes a CSV: a ``#``-prefixed header block (tool version,
command, seed, resolved parameters), a column header, then data rows.  Rows
are certified before anything is written; a failed certificate aborts.

Exit codes: 0 success, 2 invalid input, 3 oracle/certificate disagreement.
Parameters come from flags and/or ``--config file.json`` (flags win).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .core_model import GameSpec, InvalidArgument, Prior, value_single
from .oracle_mc import GridSpec, default_workers, grid_argmax, rng_for, single_value_batch

EXIT_OK, EXIT_INVALID, EXIT_ORACLE = 0, 2, 3


class CertificateFailure(RuntimeError):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x) + 0.0, ".12g")
    return str(x)


def parallel_map(fn, items):
    workers = default_workers()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# ------------------------------------------------------------------ parameters


def _number(v, name):
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise InvalidArgument(f"{name}: not a number: {v!r}") from None
    if not np.isfinite(x):
        raise InvalidArgument(f"{name}: must be finite")
    return x


def _vector(v, name):
    if isinstance(v, str):
        v = [s for s in v.split(",") if s.strip()]
    if not isinstance(v, (list, tuple)):
        v = [v]
    return [_number(x, name) for x in v]


def _integer(v, name):
    x = _number(v, name)
    if x != int(x):
        raise InvalidArgument(f"{name}: must be an integer")
    return int(x)


KINDS = {"num": _number, "vec": _vector, "int": _integer, "str": lambda v, n: str(v)}

# command -> {param: (kind, default)}
PARAMS = {
    "solve": {"alpha": ("vec", None), "mu0": ("vec", []), "sigma0": ("vec", None), "budget": ("num", None)},
    "equilibrium": {
        "alpha_r": ("vec", None),
        "alpha_d": ("vec", None),
        "mu0": ("vec", []),
        "sigma0": ("vec", None),
        "budget": ("num", None),
        "resolution": ("num", 0.02),
    },
    "oracle-check": {
        "instances": ("int", 200),
        "k_min": ("int", 2),
        "k_max": ("int", 5),
        "resolution": ("num", 0.1),
        "tolerance": ("num", 1e-6),
    },
    "frameworks": {
        "alpha_r": ("vec", None),
        "alpha_d": ("vec", None),
        "mu0": ("vec", []),
        "sigma0": ("vec", None),
        "budget": ("num", None),
        "resolution": ("num", 0.05),
    },
    "org-map": {
        "alpha_d": ("vec", [2.0, 1.0]),
        "sigma0": ("vec", [1.0, 1.0]),
        "budget": ("num", 1.0),
        "beta_max": ("num", 2.0),
        "beta_steps": ("int", 80),
        "gamma_steps": ("int", 80),
    },
    "discrim-frontier": {"delta": ("vec", [0.5]), "p_steps": ("int", 101), "p_max": ("num", 0.99)},
    "media": {
        "alpha_a": ("vec", [0.7, 0.3]),
        "alpha_b": ("vec", [0.3, 0.7]),
        "alpha_v": ("vec", [0.5, 0.5]),
        "sigma0": ("vec", [1.0, 1.0]),
        "mu0": ("vec", [0.0, 0.0]),
        "budget": ("vec", [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]),
    },
    "dualself": {"alpha_r": ("vec", [1.0, 1.0]), "p": ("vec", [0.25, 0.5, 0.75]), "c": ("vec", [0.5, 2.0, 3.0])},
}
COMMON = {"output": ("str", None), "seed": ("int", 0)}


def resolve(command: str, flags: dict, config_path: str | None) -> dict:
    spec = {**PARAMS[command], **COMMON}
    raw = {}
    if config_path:
        try:
            with open(config_path) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidArgument(f"cannot read config: {e}") from None
        if not isinstance(cfg, dict):
            raise InvalidArgument("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        if cfg.get("command", command) != command:
            raise InvalidArgument(f"config is for command {cfg['command']!r}")
        cfg.pop("command", None)
        unknown = sorted(set(cfg) - set(spec))
        if unknown:
            raise InvalidArgument(f"unknown config keys: {', '.join(unknown)}")
        raw.update(cfg)
    raw.update({k: v for k, v in flags.items() if v is not None})
    out = {}
    for name, (kind, default) in spec.items():
        if name in raw and raw[name] is not None:
            out[name] = KINDS[kind](raw[name], name)
        elif default is None and name not in COMMON:
            raise InvalidArgument(f"missing required parameter {name}")
        else:
            out[name] = default
    return out


def prior_from(params, K):
    mu0 = params.get("mu0") or [0.0] * K
    return Prior(mu0, params["sigma0"])


# ------------------------------------------------------------------- commands


def cmd_solve(P):
    from .solver import kkt_certificate, optimal_allocation, solve_via_multiplier

    prior = prior_from(P, len(P["alpha"]))
    sol = optimal_allocation(P["alpha"], prior, P["budget"])
    cert = kkt_certificate(P["alpha"], prior, sol)
    alt = solve_via_multiplier(P["alpha"], prior, P["budget"])
    if not cert.ok or np.max(np.abs(alt.tau_star - sol.tau_star)) > 1e-9:
        raise CertificateFailure("; ".join(cert.notes) or "multiplier route disagrees")
    cols = ["k", "alpha", "sigma0", "tau", "marginal_value", "kkt"]
    rows = [
        [k + 1, P["alpha"][k], prior.sigma0[k], sol.tau_star[k], cert.marginals[k], cert.ok]
        for k in range(prior.K)
    ]
    return cols, rows


def cmd_equilibrium(P):
    from .equilibrium import auxiliary_weights, equilibrium_allocation, misalignment, verify_equilibrium

    K = len(P["alpha_r"])
    g = GameSpec(prior_from(P, K), P["alpha_d"], P["alpha_r"], P["budget"])
    sol = equilibrium_allocation(g)
    chk = verify_equilibrium(g, sol.tau_star, resolution=P["resolution"] if K <= 4 else 0.1)
    if not chk.ok:
        raise CertificateFailure(f"equilibrium verifier gap {chk.gap!r}")
    lam = misalignment(g.alpha_r, g.alpha_d).lam
    ah = auxiliary_weights(g.alpha_r, g.alpha_d)
    cols = ["k", "alpha_r", "alpha_d", "lambda", "alpha_hat", "tau", "verified"]
    rows = [[k + 1, g.alpha_r[k], g.alpha_d[k], lam[k], ah[k], sol.tau_star[k], chk.ok] for k in range(K)]
    return cols, rows


def cmd_oracle_check(P):
    from .solver import optimal_allocation

    if not (1 <= P["k_min"] <= P["k_max"] <= 6):
        raise InvalidArgument("need 1 <= k_min <= k_max <= 6")

    def one(i):
        rng = rng_for(P["seed"], i)
        K = int(rng.integers(P["k_min"], P["k_max"] + 1))
        alpha = np.exp(rng.uniform(np.log(0.1), np.log(10.0), K))
        prior = Prior(np.zeros(K), rng.uniform(0.1, 10.0, K))
        T = float(np.exp(rng.uniform(np.log(0.01), np.log(100.0))))
        tau = optimal_allocation(alpha, prior, T).tau_star
        fn = single_value_batch(alpha, prior)
        grid = grid_argmax(fn, K, T, GridSpec(P["resolution"]), vectorized=True)
        err = float(np.max(np.abs(grid - tau)) / T)
        gap = float(fn(grid)[0] - fn(tau)[0])
        return [i, K, T, err, gap, err <= P["tolerance"] and gap <= 1e-9]

    rows = parallel_map(one, range(P["instances"]))
    if not all(r[-1] for r in rows):
        raise CertificateFailure(f"{sum(not r[-1] for r in rows)} instance(s) disagree with the grid oracle")
    return ["instance", "K", "budget", "max_rel_error", "value_gap", "agree"], rows


def cmd_frameworks(P):
    from .frameworks import equivalence_check

    K = len(P["alpha_r"])
    g = GameSpec(prior_from(P, K), P["alpha_d"], P["alpha_r"], P["budget"])
    rep = equivalence_check(g, P["resolution"])
    if not rep.agree:
        raise CertificateFailure(f"frameworks disagree (max diff {rep.max_diff!r}, grid {rep.max_grid_diff!r})")
    cols = ["framework"] + [f"tau{k + 1}" for k in range(K)] + [f"grid_tau{k + 1}" for k in range(K)]
    rows = [[t, *rep.allocations[t], *rep.grid_allocations[t]] for t in rep.allocations]
    return cols, rows


def cmd_org_map(P):
    from .equilibrium import equilibrium_allocation
    from .organizations import Region, game_of, in_no_test_rectangle, OrgSpec, region_map

    ad = P["alpha_d"]
    prior = Prior([0.0, 0.0], P["sigma0"])
    rows = region_map(ad, prior, P["budget"], P["beta_max"], P["beta_steps"], P["gamma_steps"])

    def certify(r):
        eq = equilibrium_allocation(game_of(OrgSpec(ad, r.beta, r.gamma, prior, P["budget"]))).tau_star
        same = np.max(np.abs(eq - r.tau)) <= 1e-9
        rect = (r.region is Region.L0) == in_no_test_rectangle(r.alpha_r, ad)
        return bool(same and rect)

    bad = [i for i, ok in enumerate(parallel_map(certify, rows)) if not ok]
    if bad:
        raise CertificateFailure(f"{len(bad)} lattice point(s) fail the equilibrium/rectangle check")
    cols = ["beta", "gamma", "alphaR1", "alphaR2", "region", "tau1", "tau2", "vD"]
    return cols, [[r.beta, r.gamma, *r.alpha_r, r.region.value, *r.tau, r.v_d] for r in rows]


def cmd_discrim_frontier(P):
    from . import discrimination as dm
    from .equilibrium import equilibrium_allocation

    if P["p_steps"] < 2 or not (0 < P["p_max"] < 1):
        raise InvalidArgument("need p_steps >= 2 and 0 < p_max < 1")
    out = []
    for delta in P["delta"]:
        grid = np.linspace(0.0, P["p_max"], P["p_steps"])
        rows = dm.frontier_sweep(delta, grid)
        p_hat = dm.equality_restoring_p(delta)
        if dm.inequality(p_hat, delta) > 1e-9:
            raise CertificateFailure("equality-restoring partiality leaves a gap")
        for r in rows:
            generic = equilibrium_allocation(dm.game(r.p, delta)).tau_star[1]
            if abs(generic - r.tau2_star) > 1e-9:
                raise CertificateFailure(f"closed form disagrees with the generic solver at p={r.p}")
        front = [r for r in rows if r.p <= p_hat]
        for a, b in zip(front, front[1:]):
            if not (b.welfare < a.welfare and b.inequality < a.inequality):
                raise CertificateFailure(f"frontier not strictly decreasing near p={b.p}")
        if not dm.welfare(p_hat, delta) > dm.omega(dm.unchecked_tau2(delta), delta):
            raise CertificateFailure("checked discrimination does not beat the unchecked politician")
        out += [[delta, r.p, 1 - r.tau2_star, r.tau2_star, r.welfare, r.inequality, r.regime] for r in rows]
    return ["delta", "p", "tau1", "tau2", "welfare", "inequality", "regime"], out


def cmd_media(P):
    from .media import MediaSpec, deviation_check, duopoly_equilibrium, monopoly_outcome, voter_value

    prior = Prior(P["mu0"], P["sigma0"])
    out = []
    for T in P["budget"]:
        spec = MediaSpec(P["alpha_a"], P["alpha_b"], P["alpha_v"], prior, T)
        o = duopoly_equilibrium(spec)
        dev = deviation_check(spec, o)
        v = voter_value(spec, o.tau_star)
        ma, mb = monopoly_outcome(spec, "A").voter_value, monopoly_outcome(spec, "B").voter_value
        if not dev.ok:
            raise CertificateFailure(f"outlet gains {dev.max_gain!r} by deviating at T={T}")
        if v < max(ma, mb) - 1e-9:
            raise CertificateFailure(f"duopoly worse for the voter than a monopoly at T={T}")
        out.append([o.case_label.value, T, *o.t_star, *o.q_a, *o.q_b, *o.tau_star, v, ma, mb])
    cols = ["case", "budget", "tA", "tB", "qA1", "qA2", "qB1", "qB2", "tau1", "tau2", "voter_value", "monopolyA_value", "monopolyB_value"]
    return cols, out


def cmd_dualself(P):
    from . import dualself as ds

    out = []
    for p in P["p"]:
        for c in P["c"]:
            s = ds.DualSelfSpec(P["alpha_r"], p, c)
            tn, ts = ds.naif_allocation(s), ds.sophisticate_allocation(s)
            ign = ds.strategic_ignorance(s)
            if ts[0] < tn[0] - 1e-12 or ign != (ds.sophisticate_aux_weights(s)[1] == 0):
                raise CertificateFailure(f"dual-self consistency fails at p={p}, c={c}")
            oi = ds.welfare_compare(s, "initial")
            if oi.ordering is ds.Ordering.NAIF:
                raise CertificateFailure("naif beats the sophisticate on the sophisticate's own objective")
            oc = ds.welfare_compare(s, "changed")
            out.append([*s.alpha_r, p, c, tn[0], ts[0], ign, oi.ordering.value, oc.ordering.value])
    return ["alphaR1", "alphaR2", "p", "c", "tauN1", "tauS1", "ignorance", "order_initial", "order_changed"], out


COMMANDS = {
    "solve": (cmd_solve, "single-player optimal tests (water-filling) with KKT certificate"),
    "equilibrium": (cmd_equilibrium, "strategic equilibrium tests, verified against a grid"),
    "oracle-check": (cmd_oracle_check, "random instances: closed form vs brute-force grid"),
    "frameworks": (cmd_frameworks, "equilibrium tests under the three payoff frameworks"),
    "org-map": (cmd_org_map, "equilibrium region map over sensitivity and distortion"),
    "discrim-frontier": (cmd_discrim_frontier, "welfare and inequality across advisor partiality"),
    "media": (cmd_media, "duopoly equilibrium vs monopolies across attention budgets"),
    "dualself": (cmd_dualself, "naif vs sophisticate allocations and welfare orderings"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="attrlearn", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"attrlearn {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--config", help="JSON file with parameters (flags override)")
        for pname, (kind, default) in {**PARAMS[name], **COMMON}.items():
            metavar = "V1,V2,..." if kind == "vec" else None
            shown = "" if default is None else f" (default: {','.join(map(fmt, default)) if isinstance(default, list) else default})"
            sp.add_argument("--" + pname.replace("_", "-"), dest=pname, metavar=metavar, help=f"{kind}{shown}")
    return ap


def render(command, params, cols, rows) -> str:
    lines = [
        f"# attrlearn {__version__}",
        f"# command: {command}",
        f"# seed: {params['seed']}",
        "# params: " + json.dumps({k: v for k, v in params.items() if k != "output"}, sort_keys=True),
        ",".join(cols),
    ]
    lines += [",".join(fmt(x) for x in r) for r in rows]
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        params = resolve(args.command, flags, args.config)
        cols, rows = COMMANDS[args.command][0](params)
    except InvalidArgument as e:
        print(f"attrlearn: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except CertificateFailure as e:
        print(f"attrlearn: certificate failed: {e}", file=sys.stderr)
        return EXIT_ORACLE
    text = render(args.command, params, cols, rows)
    if params["output"]:
        with open(params["output"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
