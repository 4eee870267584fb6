"""Command-line front end: thresholds, scaling constants, simulation,
prediction, the achievable-rate search, and the end-to-end pipeline.

Every output table embeds the resolved configuration and its hash as leading
comment lines, so results stay self-describing.  Exit codes: 0 ok, 2 config
error, 3 stage error, 4 infeasible result.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import de, meanevol, scaling
from .ensemble import (DopingPattern, EnsembleSpec, EnsembleError, StreamSpec,
                       design_rate)
from .meanevol import NU_BREVE_5_10, ScalingParams
from .scaling import DopingSwitchModel, TerminatedRateProvider, provider_fill
from .stream import WindowConfig, simulate_stream

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_INFEASIBLE = 4


class ConfigError(ValueError):
    pass


def _config_hash(cfg):
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w"), True


def _emit_table(path, cfg, header, rows):
    fh, close = _open_out(path)
    try:
        fh.write(f"# config: {json.dumps(cfg, sort_keys=True)}\n")
        fh.write(f"# hash: {_config_hash(cfg)}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(x) for x in row) + "\n")
    finally:
        if close:
            fh.close()


def _parse_ints(text):
    return tuple(int(x) for x in text.split(",")) if text else ()


def _parse_floats(text):
    return tuple(float(x) for x in text.split(",")) if text else ()


def _pattern_from_args(args):
    positions = _parse_ints(getattr(args, "positions", "") or "")
    alpha = _parse_floats(getattr(args, "alpha", "") or "")
    try:
        return DopingPattern(positions, alpha)
    except EnsembleError as e:
        raise ConfigError(str(e)) from e


def _load_config(args):
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    return cfg


def _add_ensemble_flags(sp, N_default=10_000):
    sp.add_argument("--dv", type=int, default=5)
    sp.add_argument("--dc", type=int, default=10)
    sp.add_argument("--N", type=int, default=N_default)
    sp.add_argument("--positions", default="",
                    help="comma-separated doped positions")
    sp.add_argument("--alpha", default="",
                    help="comma-separated doping fractions (default: hard)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="-", help="output path (default stdout)")


# ---------------------------------------------------------------- threshold

def cmd_threshold(args):
    pattern = _pattern_from_args(args)
    spec = EnsembleSpec(args.dv, args.dc, args.L, args.N, args.boundary, pattern)
    cfg = {"cmd": "threshold", "dv": args.dv, "dc": args.dc, "L": args.L,
           "boundary": args.boundary, "positions": pattern.positions,
           "alpha": pattern.alpha, "tol": args.tol,
           "bracket": [args.bracket_lo, args.bracket_hi]}
    res = de.find_threshold(spec, (args.bracket_lo, args.bracket_hi), args.tol)
    name = args.label or ("D=" + "+".join(map(str, pattern.positions))
                          if pattern.positions else "undoped")
    _emit_table(args.out, cfg, ["pattern", "threshold", "iterations"],
                [[name, f"{res.epsilon_star:.6f}", res.iterations_used]])
    return EXIT_OK


# ----------------------------------------------------------------- meanevol

def cmd_meanevol(args):
    pattern = _pattern_from_args(args)
    if pattern.positions:
        spec = meanevol.doped_chain_spec(args.dv, args.dc, args.N, pattern,
                                         args.half_length)
    else:
        spec = EnsembleSpec(args.dv, args.dc, 2 * args.half_length, args.N,
                            "terminated")
    cfg = {"cmd": "meanevol", "dv": args.dv, "dc": args.dc, "N": args.N,
           "epsilon": args.epsilon, "trials": args.trials, "seed": args.seed,
           "positions": pattern.positions, "alpha": pattern.alpha,
           "half_length": args.half_length}
    mt = meanevol.mean_trajectory(spec, args.epsilon, args.trials, args.seed)
    _emit_table(args.out, cfg, ["iteration", "mean_degree1"],
                [[i, f"{v:.6f}"] for i, v in enumerate(mt.mean)])
    if pattern.positions:
        dip = meanevol.locate_dip(mt)
        print(f"dip: ell_star={dip.ell_star} S={dip.S:.3f}", file=sys.stderr)
    return EXIT_OK


# -------------------------------------------------------------------- kappa

def _thresholds_for(dv, dc, pattern, L, tol):
    doped = EnsembleSpec(dv, dc, L, 100 * dc, "tail-biting", pattern)
    eps_d = de.find_threshold(doped, tol=tol).epsilon_star
    term = EnsembleSpec(dv, dc, L, 100 * dc, "terminated")
    eps_sc = de.find_threshold(term, tol=tol).epsilon_star
    return eps_d, eps_sc


def cmd_kappa(args):
    pattern = _pattern_from_args(args)
    if not pattern.positions:
        raise ConfigError("kappa needs a doping pattern")
    cfg = {"cmd": "kappa", "dv": args.dv, "dc": args.dc, "N": args.N,
           "positions": pattern.positions, "alpha": pattern.alpha,
           "trials": args.trials, "seed": args.seed}
    if args.eps_star_d is None or args.eps_star_sc is None:
        eps_d, eps_sc = _thresholds_for(args.dv, args.dc, pattern, 100, 1e-5)
    else:
        eps_d, eps_sc = args.eps_star_d, args.eps_star_sc
    kappa, gamma, points, _ = meanevol.estimate_kappa(
        args.dv, args.dc, pattern, eps_d, eps_sc,
        N=args.N, trials=args.trials, seed=args.seed)
    result = {"config": cfg, "hash": _config_hash(cfg),
              "eps_star_d": eps_d, "eps_star_sc": eps_sc,
              "gamma": gamma, "kappa": kappa, "nu_breve": NU_BREVE_5_10,
              "points": points}
    fh, close = _open_out(args.out)
    json.dump(result, fh, indent=2)
    fh.write("\n")
    if close:
        fh.close()
    return EXIT_OK


# ----------------------------------------------------------------- simulate

def cmd_simulate(args):
    pattern = _pattern_from_args(args)
    spec = StreamSpec(args.dv, args.dc, args.Ltilde, args.N, pattern,
                      args.periods)
    window = WindowConfig(args.W)
    eps_list = _parse_floats(args.eps)
    if not eps_list:
        raise ConfigError("--eps must list at least one erasure probability")
    cfg = {"cmd": "simulate", "dv": args.dv, "dc": args.dc, "N": args.N,
           "Ltilde": args.Ltilde, "W": args.W, "periods": args.periods,
           "positions": pattern.positions, "alpha": pattern.alpha,
           "trials": args.trials, "seed": args.seed,
           "filter": not args.no_filter, "eps": list(eps_list)}
    rows = []
    for eps in eps_list:
        st = simulate_stream(spec, window, eps, args.trials, args.seed,
                             filter_deg2=not args.no_filter)
        blo, bhi = st.ber_ci()
        klo, khi = st.bler_ci()
        rows.append([eps, f"{st.ber:.3e}", f"{blo:.3e}", f"{bhi:.3e}",
                     f"{st.bler:.3e}", f"{klo:.3e}", f"{khi:.3e}",
                     st.trials, args.periods])
    _emit_table(args.out, cfg,
                ["epsilon", "ber", "ber_lo", "ber_hi",
                 "bler", "bler_lo", "bler_hi", "trials", "periods"], rows)
    return EXIT_OK


# ------------------------------------------------------------------ predict

def _params_from_args(args):
    vals = {}
    if getattr(args, "params", None):
        with open(args.params) as fh:
            data = json.load(fh)
        vals = {k: data[k] for k in
                ("eps_star_d", "eps_star_sc", "gamma", "kappa", "nu_breve")
                if k in data}
    for k in ("eps_star_d", "eps_star_sc", "gamma", "kappa", "nu_breve"):
        v = getattr(args, k, None)
        if v is not None:
            vals[k] = v
    vals.setdefault("nu_breve", NU_BREVE_5_10)
    missing = [k for k in ("eps_star_d", "eps_star_sc", "gamma", "kappa")
               if k not in vals]
    if missing:
        raise ConfigError(f"missing scaling parameters: {', '.join(missing)}")
    return ScalingParams(**vals)


def _provider_lengths(Ltilde, ks):
    return [k * Ltilde for k in ks]


def cmd_predict(args):
    params = _params_from_args(args)
    model = DopingSwitchModel(params, args.N)
    eps_list = _parse_floats(args.eps)
    if not eps_list:
        raise ConfigError("--eps must list at least one erasure probability")
    provider = TerminatedRateProvider(args.dv, args.dc, args.N,
                                      cache_path=args.cache)
    ks = _parse_ints(args.fill_k) or (1, 2, 3)
    cfg = {"cmd": "predict", "dv": args.dv, "dc": args.dc, "N": args.N,
           "Ltilde": args.Ltilde, "W": args.W, "eps": list(eps_list),
           "budget": args.budget, "fill_k": list(ks),
           "params": params.__dict__, "tail_mass": args.tail_mass}
    rows = []
    for eps in eps_list:
        provider_fill(provider, _provider_lengths(args.Ltilde, ks),
                      args.W, eps, args.budget, args.seed)
        ber, bler = scaling.predict_stream(model, provider, args.Ltilde,
                                           args.W, eps, args.tail_mass)
        rows.append([eps, f"{ber:.6e}", f"{bler:.6e}"])
    _emit_table(args.out, cfg, ["epsilon", "ber_pred", "bler_pred"], rows)
    return EXIT_OK


# -------------------------------------------------------------- rate-search

@dataclass
class RateSearchResult:
    epsilon: float
    Ltilde: int
    rate: float
    predicted_ber: float
    feasible: bool
    capped: bool = False


def rate_search(pattern, N, W, target_ber, eps_grid, params, provider,
                step=5, cap=500, fill_lengths=(50, 100, 150, 200, 250, 300),
                budget=2000, seed=0, tail_mass=1e-6, dv=5, dc=10):
    """Largest Ltilde with predicted streaming BER below target, per epsilon.

    Linear scan in steps of `step`; the returned Ltilde passes and
    Ltilde + step fails (unless the cap was reached, which is flagged).
    The provider is filled once per epsilon at a fixed length ladder; other
    lengths are served through the provider's extrapolation model, so the
    simulation cost is shared across the whole scan (and across patterns,
    since the terminated component rates are pattern-independent).
    """
    model = DopingSwitchModel(params, N)
    results = []
    for eps in eps_grid:
        provider_fill(provider, fill_lengths, W, eps, budget, seed)
        best = None
        capped = False
        Lt = step
        while Lt <= cap:
            try:
                ber, _ = scaling.predict_stream(model, provider, Lt, W, eps,
                                                tail_mass)
            except ValueError:
                break
            if ber < target_ber:
                best = (Lt, ber)
                Lt += step
            else:
                break
        else:
            capped = best is not None
        if best is None:
            results.append(RateSearchResult(eps, 0, 0.0, 1.0, False))
        else:
            rate = design_rate(best[0], pattern, dv, dc)
            results.append(RateSearchResult(eps, best[0], rate, best[1],
                                            True, capped))
    return results


def cmd_rate_search(args):
    pattern = _pattern_from_args(args)
    params = _params_from_args(args)
    eps_list = _parse_floats(args.eps)
    if not eps_list:
        raise ConfigError("--eps must list at least one erasure probability")
    provider = TerminatedRateProvider(args.dv, args.dc, args.N,
                                      cache_path=args.cache)
    lengths = _parse_ints(args.fill_lengths) or (50, 100, 150, 200, 250, 300)
    cfg = {"cmd": "rate-search", "dv": args.dv, "dc": args.dc, "N": args.N,
           "W": args.W, "target_ber": args.target_ber, "eps": list(eps_list),
           "step": args.step, "cap": args.cap, "budget": args.budget,
           "positions": pattern.positions, "alpha": pattern.alpha,
           "fill_lengths": list(lengths), "params": params.__dict__}
    results = rate_search(pattern, args.N, args.W, args.target_ber, eps_list,
                          params, provider, args.step, args.cap, lengths,
                          args.budget, args.seed, args.tail_mass,
                          args.dv, args.dc)
    rows = [[r.epsilon, r.Ltilde, f"{r.rate:.5f}", f"{r.predicted_ber:.3e}",
             r.feasible, r.capped] for r in results]
    _emit_table(args.out, cfg,
                ["epsilon", "Ltilde", "design_rate", "ber_pred",
                 "feasible", "capped"], rows)
    if not any(r.feasible for r in results):
        return EXIT_INFEASIBLE
    return EXIT_OK


# ----------------------------------------------------------------- pipeline

def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _stage_cache(outdir, stage, params, compute):
    """Hash-scoped JSON stage cache: reuse the artifact when params match."""
    key = _config_hash({"stage": stage, **params})
    path = os.path.join(outdir, "cache", f"{stage}_{key}.json")
    if os.path.exists(path):
        with open(path) as fh:
            return json.load(fh), path, True
    result = compute()
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as fh:
        json.dump({"params": params, "result": result}, fh, indent=2)
    with open(path) as fh:
        return json.load(fh), path, False


def run_pipeline(cfg, outdir):
    """de -> meanevol -> scaling -> stream with per-stage hash caching."""
    required = ("dv", "dc", "N", "Ltilde", "W", "positions", "eps")
    missing = [k for k in required if k not in cfg]
    if missing:
        raise ConfigError(f"pipeline config missing keys: {', '.join(missing)}")
    dv, dc, N = int(cfg["dv"]), int(cfg["dc"]), int(cfg["N"])
    pattern = DopingPattern(tuple(cfg["positions"]),
                            tuple(cfg.get("alpha", ())))
    eps_grid = [float(e) for e in cfg["eps"]]
    Ltilde, W = int(cfg["Ltilde"]), int(cfg["W"])
    os.makedirs(outdir, exist_ok=True)
    manifest = {"config": cfg, "hash": _config_hash(cfg), "artifacts": []}

    def record(path, stage, params, cached):
        manifest["artifacts"].append({
            "path": os.path.relpath(path, outdir), "stage": stage,
            "params": params, "sha256": _sha256_file(path), "cached": cached,
        })

    # stage 1: density evolution thresholds
    de_params = {"dv": dv, "dc": dc, "L": int(cfg.get("de_L", 100)),
                 "positions": pattern.positions, "alpha": pattern.alpha,
                 "tol": cfg.get("de_tol", 1e-5)}
    art, path, cached = _stage_cache(outdir, "de", de_params, lambda: dict(
        zip(("eps_star_d", "eps_star_sc"),
            _thresholds_for(dv, dc, pattern, de_params["L"], de_params["tol"]))))
    record(path, "de", de_params, cached)
    eps_d = art["result"]["eps_star_d"]
    eps_sc = art["result"]["eps_star_sc"]

    # stage 2: scaling constants from mean trajectories
    me_params = {"dv": dv, "dc": dc, "N": int(cfg.get("kappa_N", N)),
                 "positions": pattern.positions, "alpha": pattern.alpha,
                 "trials": int(cfg.get("kappa_trials", 200)),
                 "seed": int(cfg.get("seed", 0)),
                 "eps_star_d": eps_d, "eps_star_sc": eps_sc}

    def _run_meanevol():
        kappa, gamma, points, _ = meanevol.estimate_kappa(
            dv, dc, pattern, eps_d, eps_sc, N=me_params["N"],
            trials=me_params["trials"], seed=me_params["seed"])
        return {"kappa": kappa, "gamma": gamma, "points": points}

    art, path, cached = _stage_cache(outdir, "meanevol", me_params,
                                     _run_meanevol)
    record(path, "meanevol", me_params, cached)
    params = ScalingParams(eps_d, eps_sc, art["result"]["gamma"],
                           art["result"]["kappa"],
                           float(cfg.get("nu_breve", NU_BREVE_5_10)))

    # stage 3: streaming predictions via the scaling law
    model = DopingSwitchModel(params, N)
    provider = TerminatedRateProvider(
        dv, dc, N, cache_path=os.path.join(outdir, "cache", "provider.jsonl"))
    ks = tuple(cfg.get("fill_k", (1, 2, 3)))
    budget = int(cfg.get("budget", 2000))
    pred_rows = []
    for eps in eps_grid:
        provider_fill(provider, _provider_lengths(Ltilde, ks), W, eps,
                      budget, int(cfg.get("seed", 0)))
        ber, bler = scaling.predict_stream(model, provider, Ltilde, W, eps)
        pred_rows.append([eps, f"{ber:.6e}", f"{bler:.6e}"])
    pred_path = os.path.join(outdir, "predictions.csv")
    _emit_table(pred_path, cfg, ["epsilon", "ber_pred", "bler_pred"],
                pred_rows)
    record(pred_path, "scaling", {"Ltilde": Ltilde, "W": W, "eps": eps_grid,
                                  "budget": budget}, False)

    # stage 4: streaming simulation for validation
    sim_params = {"Ltilde": Ltilde, "W": W, "eps": eps_grid,
                  "trials": int(cfg.get("stream_trials", 100)),
                  "periods": int(cfg.get("periods", 5)),
                  "seed": int(cfg.get("seed", 0)),
                  "positions": pattern.positions, "alpha": pattern.alpha,
                  "dv": dv, "dc": dc, "N": N}

    def _run_stream():
        spec = StreamSpec(dv, dc, Ltilde, N, pattern, sim_params["periods"])
        rows = []
        for eps in eps_grid:
            st = simulate_stream(spec, WindowConfig(W), eps,
                                 sim_params["trials"], sim_params["seed"])
            rows.append([eps, st.ber, st.bler, st.trials])
        return rows

    art, path, cached = _stage_cache(outdir, "stream", sim_params, _run_stream)
    record(path, "stream", sim_params, cached)
    sim_path = os.path.join(outdir, "stream.csv")
    _emit_table(sim_path, cfg, ["epsilon", "ber", "bler", "trials"],
                [[e, f"{b:.6e}", f"{bl:.6e}", t]
                 for e, b, bl, t in art["result"]])
    record(sim_path, "stream", sim_params, cached)

    manifest_path = os.path.join(outdir, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest_path


def cmd_pipeline(args):
    cfg = _load_config(args)
    if not cfg:
        raise ConfigError("pipeline requires --config")
    path = run_pipeline(cfg, args.outdir)
    print(path)
    return EXIT_OK


# ------------------------------------------------------------------- parser

def build_parser():
    ap = argparse.ArgumentParser(
        prog="scldpc",
        description="Doped SC-LDPC ensembles on the BEC: thresholds, scaling "
                    "constants, streaming simulation and prediction.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("threshold", help="BP threshold via density evolution")
    _add_ensemble_flags(sp)
    sp.add_argument("--L", type=int, default=100)
    sp.add_argument("--boundary", default="tail-biting",
                    choices=("tail-biting", "terminated"))
    sp.add_argument("--tol", type=float, default=1e-5)
    sp.add_argument("--bracket-lo", type=float, default=0.25)
    sp.add_argument("--bracket-hi", type=float, default=0.52)
    sp.add_argument("--label", default="")
    sp.set_defaults(func=cmd_threshold)

    sp = sub.add_parser("meanevol", help="Monte-Carlo mean decoding trajectory")
    _add_ensemble_flags(sp)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--half-length", type=int, default=50)
    sp.set_defaults(func=cmd_meanevol)

    sp = sub.add_parser("kappa", help="estimate the dip-slope constant kappa")
    _add_ensemble_flags(sp)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--eps-star-d", type=float, default=None)
    sp.add_argument("--eps-star-sc", type=float, default=None)
    sp.set_defaults(func=cmd_kappa)

    sp = sub.add_parser("simulate", help="sliding-window streaming simulation")
    _add_ensemble_flags(sp, N_default=1000)
    sp.add_argument("--Ltilde", type=int, required=True)
    sp.add_argument("--W", type=int, required=True)
    sp.add_argument("--eps", required=True,
                    help="comma-separated erasure probabilities")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--periods", type=int, default=5)
    sp.add_argument("--no-filter", action="store_true",
                    help="keep degree-2 stopping sets in the statistics")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("predict", help="streaming BER/BLER via the scaling law")
    _add_ensemble_flags(sp, N_default=1000)
    sp.add_argument("--Ltilde", type=int, required=True)
    sp.add_argument("--W", type=int, required=True)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--params", default=None,
                    help="JSON file with eps_star_d/eps_star_sc/gamma/kappa")
    sp.add_argument("--eps-star-d", type=float, default=None)
    sp.add_argument("--eps-star-sc", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--kappa", type=float, default=None)
    sp.add_argument("--nu-breve", type=float, default=None, dest="nu_breve")
    sp.add_argument("--cache", default=None, help="provider cache path")
    sp.add_argument("--budget", type=int, default=2000)
    sp.add_argument("--fill-k", default="", dest="fill_k",
                    help="interval multiples to simulate (default 1,2,3)")
    sp.add_argument("--tail-mass", type=float, default=1e-6)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("rate-search",
                        help="highest Ltilde meeting a target BER, per epsilon")
    _add_ensemble_flags(sp, N_default=1000)
    sp.add_argument("--W", type=int, required=True)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--target-ber", type=float, default=1e-4)
    sp.add_argument("--step", type=int, default=5)
    sp.add_argument("--cap", type=int, default=500)
    sp.add_argument("--params", default=None)
    sp.add_argument("--eps-star-d", type=float, default=None)
    sp.add_argument("--eps-star-sc", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--kappa", type=float, default=None)
    sp.add_argument("--nu-breve", type=float, default=None, dest="nu_breve")
    sp.add_argument("--cache", default=None)
    sp.add_argument("--budget", type=int, default=2000)
    sp.add_argument("--fill-lengths", default="", dest="fill_lengths",
                    help="terminated lengths to simulate per epsilon")
    sp.add_argument("--tail-mass", type=float, default=1e-6)
    sp.set_defaults(func=cmd_rate_search)

    sp = sub.add_parser("pipeline", help="full de->meanevol->scaling->stream run")
    sp.add_argument("--config", required=True)
    sp.add_argument("--outdir", default="pipeline_out")
    sp.set_defaults(func=cmd_pipeline)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, EnsembleError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (de.ConvergenceError, ValueError, KeyError, OSError) as e:
        print(f"stage error: {e}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
