"""Command-line orchestrator: experiment pipelines, persistence, figures.

Exit codes: 0 ok, 2 configuration error, 3 module error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import config as cfgmod
from . import dimension as dimmod
from . import particles as pmod
from . import pde as pdemod
from . import plots
from . import profile as profmod
from . import spectral as specmod
from . import tauberian as taumod
from .errors import ConfigError, ModuleError, SbmlabError
from .results import ResultTable, config_hash, write_json


def _path(cfg, name):
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def _meta(cfg, **extra):
    meta = {"config_hash": config_hash(cfg.hash_payload()), "seed": cfg.seed}
    meta.update(extra)
    return meta


def _solve_profile_for(cfg, h=1e-3):
    p = cfg.params
    return profmod.solve_profile(
        bracket_tol=p.get("tol", 1e-12),
        h=p.get("h", h),
        y_max=p.get("ymax", 8.0),
    )


# ----------------------------------------------------------------- runners --

def run_profile(cfg):
    p = cfg.params
    prof = profmod.solve_profile(
        bracket_tol=p.get("tol", 1e-12), h=p.get("h", 1e-4),
        y_max=p.get("ymax", 8.0))
    ident = profmod.profile_identities(prof)
    table = ResultTable(
        {"y": prof.y_grid, "F": prof.values, "Fprime": prof.values_prime},
        meta=_meta(cfg, f0=prof.f0, c0=prof.c0),
    )
    table.write_csv(_path(cfg, "profile.csv"))
    write_json(_path(cfg, "profile_summary.json"),
               {"f0": prof.f0, "c0": prof.c0,
                "residual_sup": prof.ode_residual_sup, **ident},
               cfg_hash=config_hash(cfg.hash_payload()))
    plots.profile_figure(prof, _path(cfg, "profile.png"))
    return {"f0": prof.f0, "c0": prof.c0}


def _spectral_system(cfg, phi_tag, prof=None, nmax=None, L=None, h=None):
    p = cfg.params
    nmax = nmax if nmax is not None else p.get("nmax", 12)
    L = L if L is not None else p.get("l", 12.0)
    h = h if h is not None else p.get("h", 1 / 400)
    if phi_tag == "zero":
        phi = 0.0
    else:
        if prof is None:
            prof = profmod.solve_profile(h=1e-3)
        scale = 0.5 if phi_tag == "half-f" else 1.0
        phi = lambda x: scale * prof.evaluate(x)  # noqa: E731
    return specmod.eigensystem(phi, nmax, L=L, h=h, phi_tag=phi_tag), prof


def run_spectrum(cfg):
    phi_tag = cfg.params.get("phi", "full-f")
    sys_, _ = _spectral_system(cfg, phi_tag)
    ResultTable(
        {"n": np.arange(sys_.n_max + 1), "lambda_n": sys_.eigenvalues},
        meta=_meta(cfg, phi=phi_tag),
    ).write_csv(_path(cfg, "spectrum.csv"))
    ResultTable(
        {"x": sys_.x_grid, "psi0": sys_.eigenfunctions_psi[0]},
        meta=_meta(cfg, phi=phi_tag),
    ).write_csv(_path(cfg, "psi0.csv"))
    write_json(_path(cfg, "spectrum_summary.json"),
               {"phi": phi_tag, "lambda0": sys_.eigenvalues[0],
                "lambda1": sys_.eigenvalues[1], "theta": sys_.theta},
               cfg_hash=config_hash(cfg.hash_payload()))
    plots.spectrum_figure(sys_, _path(cfg, "spectrum.png"))
    return {"lambda0": float(sys_.eigenvalues[0])}


def _parse_lambdas(s):
    return [float(v) for v in s.split(",") if v.strip()]


def run_pde_rate(cfg):
    p = cfg.params
    t = p.get("t", 1.0)
    lams = _parse_lambdas(p.get("lambdas", "16,32,64,128,256,512,1024"))
    table, fits = pdemod.rate_experiment(
        t, lams,
        dxi=p.get("dx", 0.005), dtau=p.get("dt", 1e-3),
        s0=p.get("eps", 1e-6))
    table.meta.update(_meta(cfg))
    table.write_csv(_path(cfg, "rate.csv"))
    write_json(_path(cfg, "fit.json"), fits,
               cfg_hash=config_hash(cfg.hash_payload()))
    plots.emit_plot_data(table, "rate", _path(cfg, "rate_plot"))
    plots.loglog_fit_figure(table.columns["lambda"], table.columns["D"],
                            fits["slope"], "rate", _path(cfg, "rate.png"),
                            "lambda", "V_inf - V_lambda")
    return fits


def _default_a_ladder(N, t, n_a=8, a_min=None, a_max=None):
    w = pmod.default_bandwidth(N, t)
    lo = a_min if a_min else max(10.0 / (N * w), 0.02)
    hi = a_max if a_max else math.sqrt(t)
    return np.geomspace(lo, hi, n_a)


def run_simulate(cfg):
    p = cfg.params
    x0 = p.get("x0", "delta:0")
    t = p.get("t", 1.0)
    N = p.get("n", 2000)
    reps = p.get("reps", 400)
    w = p.get("bandwidth", pmod.default_bandwidth(N, t))
    method = p.get("method", "reduced")
    fields = pmod.simulate_fields(x0, t, N, reps, cfg.seed, bandwidth=w,
                                  method=method)
    if not fields:
        raise ModuleError("simulate", "no surviving replicates")
    lo = min(f.centers[0] for f in fields)
    hi = max(f.centers[-1] for f in fields)
    ks = np.arange(round(lo / w), round(hi / w) + 1)
    centers = ks * w
    acc = np.zeros(centers.shape[0])
    for f in fields:
        i0 = int(round(f.centers[0] / w)) - int(ks[0])
        acc[i0 : i0 + f.centers.shape[0]] += f.density
    mean_density = acc / len(fields)
    ResultTable({"x": centers, "density": mean_density},
                meta=_meta(cfg, reps=reps, survivors=len(fields), w=w),
                ).write_csv(_path(cfg, "density.csv"))
    bz_all, bz_rep = [], []
    bz_meta = {}
    for f in fields:
        pts, bz_meta = pmod.extract_bz(f)
        bz_all.append(pts)
        bz_rep.append(np.full(pts.shape[0], f.replicate_id))
    bz_pts = np.concatenate(bz_all) if bz_all else np.array([])
    bz_reps = np.concatenate(bz_rep) if bz_rep else np.array([], dtype=int)
    ResultTable({"x": bz_pts, "replicate": bz_reps},
                meta=_meta(cfg, **bz_meta),
                ).write_csv(_path(cfg, "bz_points.csv"))
    xhat = np.array([f.density[np.argmin(np.abs(f.centers))] for f in fields])
    ladder = _default_a_ladder(N, t)
    probs = np.array([((xhat > 0) & (xhat <= a)).sum() / reps
                      for a in ladder])
    ResultTable({"a": ladder, "P": probs},
                meta=_meta(cfg, reps=reps, w=w),
                ).write_csv(_path(cfg, "tail.csv"))
    plots.density_figure(centers, mean_density, bz_pts,
                         _path(cfg, "density.png"))
    return {"survivors": len(fields), "bz_points": int(bz_pts.shape[0])}


def run_tail(cfg):
    p = cfg.params
    x0 = p.get("x0", "delta:0")
    t = p.get("t", 1.0)
    N = p.get("n", 10_000)
    reps = p.get("reps", 100_000)
    ladder = _default_a_ladder(N, t, n_a=p.get("n_a", 8),
                               a_min=p.get("a_min"), a_max=p.get("a_max"))
    table, fit = pmod.left_tail(x0, t, ladder, N, reps, cfg.seed,
                                bandwidth=p.get("bandwidth"))
    table.meta.update(_meta(cfg))
    table.write_csv(_path(cfg, "tail.csv"))
    write_json(_path(cfg, "tail_fit.json"), fit,
               cfg_hash=config_hash(cfg.hash_payload()))
    plots.emit_plot_data(table, "tail", _path(cfg, "tail_plot"))
    plots.loglog_fit_figure(table.columns["a"], table.columns["P"],
                            fit["slope"], "tail", _path(cfg, "tail.png"),
                            "a", "P(0 < X <= a)")
    return fit


def run_dimension(cfg):
    p = cfg.params
    if "input" in p:
        pts = dimmod.PointSet(np.loadtxt(p["input"], delimiter=",",
                                         comments="#", skiprows=1, usecols=0))
        source = p["input"]
    elif "subordinator" in p:
        pts = dimmod.subordinator_range(p["subordinator"], seed=cfg.seed)
        source = f"subordinator:{p['subordinator']}"
    else:
        depth = p.get("cantor", 12)
        pts = dimmod.cantor_points(depth)
        source = f"cantor:{depth}"
    if "scales" in p:
        scales = _parse_lambdas(p["scales"])
    else:
        span = max(pts.points.max() - pts.points.min(), 1e-12)
        scales = (span * np.geomspace(2.0**-2, 2.0**-10, 9)).tolist()
    report = dimmod.box_dimension(pts, scales)
    beta = p.get("beta", 0.5)
    energy = dimmod.riesz_energy(pts, beta)
    out = {"source": source, "n_points": len(pts), "beta": beta,
           "riesz_energy": energy, "capacity": 1.0 / energy, **report}
    write_json(_path(cfg, "dim.json"), out,
               cfg_hash=config_hash(cfg.hash_payload()))
    plots.loglog_fit_figure(1.0 / np.asarray(scales), report["counts"],
                            report["slope"], "box counts",
                            _path(cfg, "dim.png"), "1/eps", "N(eps)")
    return out


def run_tauberian(cfg):
    p = cfg.params
    c1 = p.get("c1", 1.0)
    c2 = p.get("c2", 1.0)
    pw = p.get("p", 1.0)
    ul = p.get("ulambda", 0.0)
    d1, simplified = taumod.lower_coeff_d1(c1, c2, pw, ul)
    upper = math.e * c2
    print(f"d1 = {d1!r}")
    print(f"upper coefficient e*C2 = {upper!r}")
    if simplified is not None:
        print(f"d1 simplified (p<=1, lambda_<=4) = {simplified!r}")
    write_json(_path(cfg, "tauberian.json"),
               {"C1": c1, "C2": c2, "p": pw, "under_lambda": ul, "d1": d1,
                "d1_simplified": simplified, "upper_coeff": upper},
               cfg_hash=config_hash(cfg.hash_payload()))
    return {"d1": d1}


def run_full_pipeline(cfg):
    p = cfg.params
    t = p.get("t", 1.0)
    N = p.get("n", 2000)
    tail_reps = p.get("tail_reps", 20_000)
    field_reps = p.get("field_reps", 300)
    chash = config_hash(cfg.hash_payload())
    plots.set_config_hash(chash)

    prof = _solve_profile_for(cfg)
    ResultTable({"y": prof.y_grid, "F": prof.values,
                 "Fprime": prof.values_prime},
                meta=_meta(cfg)).write_csv(_path(cfg, "profile.csv"))

    sys_half, _ = _spectral_system(cfg, "half-f", prof=prof)
    sys_full, _ = _spectral_system(cfg, "full-f", prof=prof)
    lam0 = float(sys_full.eigenvalues[0])

    table, fits = pdemod.rate_experiment(t, [16, 32, 64, 128, 256, 512, 1024])
    table.meta.update(_meta(cfg))
    table.write_csv(_path(cfg, "rate.csv"))

    w = pmod.default_bandwidth(N, t)
    ladder = _default_a_ladder(N, t)
    tail_table, tail_fit = pmod.left_tail("delta:0", t, ladder, N, tail_reps,
                                          cfg.seed, bandwidth=w)
    tail_table.meta.update(_meta(cfg))
    tail_table.write_csv(_path(cfg, "tail.csv"))

    fields = pmod.simulate_fields("delta:0", t, N, field_reps, cfg.seed + 1,
                                  bandwidth=w)
    scales = (w * np.array([2, 4, 8, 16, 32])).tolist()
    counts = np.zeros(len(scales), dtype=np.int64)
    bz_all = []
    for f in fields:
        pts, bz_meta = pmod.extract_bz(f)
        if pts.size:
            counts += dimmod.box_counts(pts, scales)
            bz_all.append(pts)
    if not bz_all:
        raise ModuleError("full-pipeline", "no BZ proxy points found")
    bz_box_dim = float(np.polyfit(np.log(1.0 / np.asarray(scales)),
                                  np.log(np.maximum(counts, 1)), 1)[0])
    ResultTable({"x": np.concatenate(bz_all)},
                meta=_meta(cfg, **bz_meta)).write_csv(
        _path(cfg, "bz_points.csv"))

    summary = {
        "f0": prof.f0,
        "c0": prof.c0,
        "lambda0_halfF": float(sys_half.eigenvalues[0]),
        "lambda0_F": lam0,
        "rate_slope": fits["slope"],
        "tail_slope": tail_fit["slope"],
        "bz_box_dim": bz_box_dim,
        "predicted_tail": 2 * lam0 - 1,
        "predicted_dim": 2 - 2 * lam0,
    }
    write_json(_path(cfg, "summary.json"), summary, cfg_hash=chash)
    plots.profile_figure(prof, _path(cfg, "profile.png"))
    plots.loglog_fit_figure(table.columns["lambda"], table.columns["D"],
                            fits["slope"], "rate", _path(cfg, "rate.png"),
                            "lambda", "D")
    plots.loglog_fit_figure(tail_table.columns["a"], tail_table.columns["P"],
                            tail_fit["slope"], "tail", _path(cfg, "tail.png"),
                            "a", "P")
    return summary


RUNNERS = {
    "profile": run_profile,
    "spectrum": run_spectrum,
    "pde-rate": run_pde_rate,
    "simulate": run_simulate,
    "tail": run_tail,
    "dimension": run_dimension,
    "tauberian": run_tauberian,
    "full-pipeline": run_full_pipeline,
}

_SUBCOMMAND_FLAGS = {
    "profile": [("--h", "h"), ("--ymax", "ymax"), ("--tol", "tol")],
    "spectrum": [("--phi", "phi"), ("--L", "l"), ("--h", "h"),
                 ("--nmax", "nmax")],
    "pde-rate": [("--t", "t"), ("--lambdas", "lambdas"), ("--eps", "eps"),
                 ("--dx", "dx"), ("--dt", "dt")],
    "simulate": [("--x0", "x0"), ("--t", "t"), ("--N", "n"),
                 ("--reps", "reps"), ("--bandwidth", "bandwidth"),
                 ("--method", "method")],
    "tail": [("--x0", "x0"), ("--t", "t"), ("--N", "n"), ("--reps", "reps"),
             ("--bandwidth", "bandwidth"), ("--a-min", "a_min"),
             ("--a-max", "a_max"), ("--n-a", "n_a")],
    "dimension": [("--input", "input"), ("--cantor", "cantor"),
                  ("--subordinator", "subordinator"), ("--scales", "scales"),
                  ("--beta", "beta")],
    "tauberian": [("--c1", "c1"), ("--c2", "c2"), ("--p", "p"),
                  ("--ulambda", "ulambda")],
    "full-pipeline": [("--N", "n"), ("--reps", "reps"),
                      ("--tail-reps", "tail_reps"),
                      ("--field-reps", "field_reps"), ("--t", "t")],
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sbmlab",
        description="super-Brownian boundary laboratory")
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None)
    subs = parser.add_subparsers(dest="command", required=True)
    for name, flags in _SUBCOMMAND_FLAGS.items():
        sp = subs.add_parser(name)
        for flag, key in flags:
            sp.add_argument(flag, dest=f"param_{key}", default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        file_cfg = cfgmod.load_config(args.config) if args.config else {}
        overrides = {k[len("param_"):]: v for k, v in vars(args).items()
                     if k.startswith("param_")}
        cfg = cfgmod.build(args.command, file_cfg, overrides,
                           seed=args.seed, out_dir=args.out,
                           threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        plots.set_config_hash(config_hash(cfg.hash_payload()))
        RUNNERS[cfg.experiment](cfg)
    except SbmlabError as exc:
        name = exc.module if isinstance(exc, ModuleError) else cfg.experiment
        print(f"module error [{name}]: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
