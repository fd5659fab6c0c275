"""Command-line front end.

Subcommands: ``validate`` (structural conditions + constant budget),
``lambda`` (disk iteration experiment), ``annulus`` (boundary-tracking
variant), ``ham`` (Hamiltonian audits).  All runs are configured by a single
JSON document, write a JSON summary that echoes the resolved config, and are
bit-deterministic for a fixed config and seed; wall-clock time appears only
in output file names.

Exit codes: 0 success, 1 property failure, 2 config error, 3 horizon
exhausted, 4 model inconsistency.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, ContractError, ModelInconsistencyError
from .geometry import TWO_PI
from .lambdalemma import (
    DiskSpec,
    annulus_experiment,
    find_K,
    make_default_disk,
    verify_bound_domination,
)
from .models import (
    FlowState,
    HamiltonianSpec,
    hamiltonian_energy,
    integrate_series,
    make_defective,
    make_linear,
    make_poly,
    make_twist_annulus,
    pendulum_local_coords,
    poincare_map,
)
from .normalform import check_constants, estimate_bounds, validate_conditions

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_CONFIG = 2
EXIT_HORIZON = 3
EXIT_INCONSISTENT = 4


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _resolve_out(args, cfg: dict) -> Path:
    out = args.out or cfg.get("out") or os.environ.get("NHIM_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _stamp(experiment: str, model: str) -> str:
    return f"{experiment}_{model}_{time.strftime('%Y%m%dT%H%M%S')}"


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_model(mc: dict):
    if not isinstance(mc, dict) or "kind" not in mc:
        raise ConfigError("config needs a model object with a 'kind' field")
    kind = mc["kind"]
    try:
        if kind == "linear":
            return make_linear(
                lambda_s=mc.get("lambda_s", 0.5),
                lambda_u=mc.get("lambda_u", 2.0),
                omega=mc.get("omega", 0.0),
                rho=mc.get("rho", 0.5),
            )
        if kind == "poly":
            return make_poly(
                c=mc.get("c", 0.05),
                lambda_s=mc.get("lambda_s", 0.5),
                lambda_u=mc.get("lambda_u", 2.0),
                rho=mc.get("rho", 0.5),
            )
        if kind == "twist":
            return make_twist_annulus(
                eps_twist=mc.get("eps_twist", 0.05),
                y0=mc["y0"],
                y1=mc["y1"],
                lambda_s=mc.get("lambda_s", 0.5),
                lambda_u=mc.get("lambda_u", 2.0),
                rho=mc.get("rho", 0.5),
            )
        if kind == "defective":
            return make_defective(
                condition=mc.get("condition", "b"),
                amp=mc.get("amp", 0.025),
                rho=mc.get("rho", 0.5),
            )
    except KeyError as err:
        raise ConfigError(f"model kind {kind!r} is missing parameter {err}") from err
    except (ContractError, TypeError, ValueError) as err:
        raise ConfigError(f"invalid parameters for model {kind!r}: {err}") from err
    raise ConfigError(f"unknown model kind {kind!r}")


def build_disk(dc: dict, f) -> DiskSpec:
    """Disk from config: constant or affine graphs only (JSON cannot carry code)."""
    if dc is None:
        return make_default_disk(f)
    if not isinstance(dc, dict):
        raise ConfigError("disk config must be a JSON object")
    mesh = int(dc.get("mesh_per_axis", 5))
    n_s, n_u, m = f.dims.n_s, f.dims.n_u, f.dims.m
    const = np.full(n_s, float(dc.get("sigma_const", 0.6 * f.rho)))
    u_coeffs = np.asarray(dc.get("sigma_u_coeffs", np.zeros((n_s, n_u))), dtype=float).reshape(n_s, n_u)
    x_coeffs = np.asarray(dc.get("sigma_x_coeffs", np.zeros((n_s, m))), dtype=float).reshape(n_s, m)

    def sigma(u, x):
        return const + u_coeffs @ u + x_coeffs @ x

    def dsigma(u, x):
        return u_coeffs, x_coeffs

    if "u_half" in dc:
        half = float(dc["u_half"])
        u_box = tuple((-half, half) for _ in range(n_u))
    else:
        u_box = tuple(tuple(b) for b in dc.get("u_box", [(-0.05, 0.05)] * n_u))
    x_box = tuple(tuple(b) for b in dc.get("x_box", f.x_ranges()))
    try:
        return DiskSpec(sigma=sigma, u_box=u_box, x_box=x_box, mesh_per_axis=mesh, dsigma=dsigma)
    except ContractError as err:
        raise ConfigError(f"invalid disk config: {err}") from err


def cmd_validate(cfg: dict, out_dir: Path, seed: int, quiet: bool) -> int:
    f = build_model(cfg.get("model"))
    samples = int(cfg.get("samples", 256))
    tol = float(cfg.get("tol", 1e-10))
    report = validate_conditions(f, sample_count=samples, tol=tol, seed=seed)
    bounds = estimate_bounds(
        f,
        grid_density=int(cfg.get("grid_density", 7)),
        target_eps=float(cfg.get("target_eps", 1e-2)),
    )
    constants = check_constants(bounds)
    payload = {
        "experiment": "validate",
        "config": cfg,
        "seed": seed,
        "conditions": report.to_dict(),
        "bounds": bounds.to_dict(),
        "constants": [{"name": c.name, "holds": c.holds, "slack": c.slack} for c in constants],
    }
    base = _stamp("validate", f.name)
    json_path = out_dir / f"{base}.json"
    _write_json(json_path, payload)
    ok = report.passed and all(c.holds for c in constants)
    if not quiet:
        status = "pass" if ok else "FAIL"
        print(f"validate[{f.name}]: {status} (report: {json_path})")
        if not report.passed:
            for chk in report.checks:
                if not chk.passed:
                    print(f"  condition {chk.name}: violation {chk.max_violation:.3g}")
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_lambda(cfg: dict, out_dir: Path, seed: int, quiet: bool) -> int:
    f = build_model(cfg.get("model"))
    report = validate_conditions(f, sample_count=int(cfg.get("samples", 128)), seed=seed)
    if not report.passed:
        if not quiet:
            print(f"lambda[{f.name}]: model fails structural validation", file=sys.stderr)
        return EXIT_PROPERTY
    eps = float(cfg.get("eps", 1e-2))
    n_max = int(cfg.get("n_max", 30))
    bounds = estimate_bounds(
        f,
        grid_density=int(cfg.get("grid_density", 7)),
        target_eps=eps,
    )
    disk = build_disk(cfg.get("disk"), f)
    result = find_K(disk, f, eps=eps, n_max=n_max)
    domination = verify_bound_domination(disk, f, bounds, n_max=n_max)
    base = _stamp("lambda", f.name)
    csv_path = out_dir / f"{base}.csv"
    _write_csv(
        csv_path,
        "n,c0,c1,value,alive",
        (
            f"{c.n},{_fmt(c.c0)},{_fmt(c.c1)},{_fmt(c.value)},{alive}"
            for c, alive in zip(result.series, result.alive_series)
        ),
    )
    payload = {
        "experiment": "lambda",
        "config": cfg,
        "seed": seed,
        "eps": eps,
        "n_max": n_max,
        "K": result.K,
        "bounds": bounds.to_dict(),
        "domination": domination.to_dict(),
        "series": [
            {"n": c.n, "c0": c.c0, "c1": c.c1, "alive": alive}
            for c, alive in zip(result.series, result.alive_series)
        ],
    }
    json_path = out_dir / f"{base}.json"
    _write_json(json_path, payload)
    if not quiet:
        print(f"lambda[{f.name}]: K={result.K} worst_margin={domination.worst_margin():.3g}")
        print(f"  wrote {json_path} and {csv_path}")
    if result.K is None:
        return EXIT_HORIZON
    return EXIT_OK if domination.ok() else EXIT_PROPERTY


def cmd_annulus(cfg: dict, out_dir: Path, seed: int, quiet: bool) -> int:
    mc = cfg.get("model") or {}
    if mc.get("kind", "twist") != "twist":
        raise ConfigError("annulus experiment needs a twist model")
    mc.setdefault("kind", "twist")
    f = build_model(mc)
    y0, y1 = float(mc["y0"]), float(mc["y1"])
    eps = float(cfg.get("eps", 1e-2))
    n_max = int(cfg.get("n_max", 40))
    disk = build_disk(cfg.get("disk"), f)
    report = annulus_experiment(f, y0, y1, disk, eps=eps, n_max=n_max)
    base = _stamp("annulus", f.name)
    csv_path = out_dir / f"{base}.csv"
    rows = []
    for c, alive in zip(report.full.series, report.full.alive_series):
        r0 = report.circles[0].rows[c.n]
        r1 = report.circles[1].rows[c.n]
        rows.append(
            f"{c.n},{_fmt(c.c0)},{_fmt(c.c1)},{alive},"
            f"{_fmt(r0[1])},{_fmt(r0[2])},{_fmt(r0[3])},"
            f"{_fmt(r1[1])},{_fmt(r1[2])},{_fmt(r1[3])}"
        )
    _write_csv(
        csv_path,
        "n,c0,c1,alive,edge0_c0,edge0_c1,edge0_ydev,edge1_c0,edge1_c1,edge1_ydev",
        rows,
    )
    payload = {
        "experiment": "annulus",
        "config": cfg,
        "seed": seed,
        "eps": eps,
        "n_max": n_max,
        **report.to_dict(),
    }
    json_path = out_dir / f"{base}.json"
    _write_json(json_path, payload)
    k_primes = [ct.K_prime for ct in report.circles]
    if not quiet:
        print(f"annulus[{f.name}]: K={report.full.K} K'={k_primes}")
        print(f"  wrote {json_path} and {csv_path}")
    if report.full.K is None or any(kp is None for kp in k_primes):
        return EXIT_HORIZON
    return EXIT_OK


def _exponent_fit(hs: HamiltonianSpec, h: float, unstable: bool) -> float:
    """Log-slope of the expanding (or contracting) saddle coordinate."""
    delta = 1e-8
    root = math.sqrt(hs.eps)
    p0 = root * delta if unstable else -root * delta
    st = FlowState(p=p0, q=delta, I=0.0, theta=0.0, J=0.0, phi=0.0)
    t_span = 3.0 / root
    stride = max(1, int(round(t_span / (40 * h))))
    series = integrate_series(hs, st, h, n_blocks=40, stride=stride)
    ts = np.arange(41) * (stride * h)
    vals = []
    for row in series:
        s_loc = (row[1] - row[0] / root) / 2.0
        u_loc = (row[1] + row[0] / root) / 2.0
        vals.append(abs(u_loc if unstable else s_loc))
    slope = np.polyfit(ts, np.log(np.asarray(vals)), 1)[0]
    return float(slope)


def cmd_ham(cfg: dict, out_dir: Path, seed: int, quiet: bool) -> int:
    hc = cfg.get("ham") or {}
    try:
        hs = HamiltonianSpec(
            eps=float(hc.get("eps", 0.01)),
            mu=float(hc.get("mu", 0.001)),
            nu=float(hc.get("nu", 55.0)),
            sigma_param=float(hc.get("sigma_param", 1.0)),
            log_base=hc.get("log_base", "natural"),
        )
    except ContractError as err:
        raise ConfigError(f"invalid Hamiltonian parameters: {err}") from err
    h = float(hc.get("h", 1e-3))
    n_returns = int(hc.get("returns", 10))
    cyl_returns = int(hc.get("cyl_returns", 100))
    fit_exponents = bool(hc.get("fit_exponents", True))
    if fit_exponents and hs.eps == 0.0:
        raise ConfigError("exponent fit needs eps > 0; set fit_exponents false for eps = 0")

    sc = hc.get("seed_state") or {}
    st = FlowState(
        p=float(sc.get("p", 0.05)),
        q=float(sc.get("q", 0.1)),
        I=float(sc.get("I", 0.03)),
        theta=float(sc.get("theta", 0.0)),
        J=float(sc.get("J", 0.0)),
        phi=0.0,
    )
    # audit 1: energy drift across Poincare returns
    e0 = hamiltonian_energy(hs, st)
    rows = [
        "0,"
        + ",".join(_fmt(v) for v in st.as_array())
        + f",{_fmt(e0)},{_fmt(0.0)}"
    ]
    drift_max = 0.0
    cur = st
    for n in range(1, n_returns + 1):
        cur, _ = poincare_map(hs, cur, h=h)
        e_n = hamiltonian_energy(hs, cur)
        drift = e_n - e0
        drift_max = max(drift_max, abs(drift))
        rows.append(
            f"{n}," + ",".join(_fmt(v) for v in cur.as_array()) + f",{_fmt(e_n)},{_fmt(drift)}"
        )

    # audit 2: the cylinder {p = q = 0} must be exactly invariant
    cyl = FlowState(p=0.0, q=0.0, I=float(sc.get("I", 0.03)), theta=0.3, J=0.0, phi=0.0)
    cyl_residual = 0.0
    for _ in range(cyl_returns):
        cyl, _ = poincare_map(hs, cyl, h=h)
        cyl_residual = max(cyl_residual, abs(cyl.p), min(cyl.q, TWO_PI - cyl.q))

    # audit 3: integrable rotor advance, theta' = theta + 2*pi*I
    free = HamiltonianSpec(eps=0.0, mu=0.0, nu=hs.nu, sigma_param=hs.sigma_param)
    ist = FlowState(p=0.0, q=0.0, I=0.17, theta=1.0, J=0.2, phi=0.0)
    iret, _ = poincare_map(free, ist, h=h)
    theta_expect = (1.0 + TWO_PI * 0.17) % TWO_PI
    theta_err = abs(iret.theta - theta_expect)
    theta_err = min(theta_err, TWO_PI - theta_err)

    results = {
        "energy_drift_max": drift_max,
        "cylinder_residual": cyl_residual,
        "integrable_theta_error": theta_err,
    }
    tol_drift = float(hc.get("drift_tol", 1e-8))
    tol_cyl = float(hc.get("cyl_tol", 1e-12))
    ok = drift_max <= tol_drift and cyl_residual <= tol_cyl and theta_err <= 1e-10

    # audit 4: local saddle exponents about (p, q) = (0, 0)
    if fit_exponents:
        root = math.sqrt(hs.eps)
        u_rate = _exponent_fit(hs, h, unstable=True)
        s_rate = _exponent_fit(hs, h, unstable=False)
        fit_tol = float(hc.get("fit_rel_tol", 0.05))
        results["exponents"] = {
            "target": root,
            "unstable_rate": u_rate,
            "stable_rate": s_rate,
            "unstable_rel_err": abs(u_rate - root) / root,
            "stable_rel_err": abs(-s_rate - root) / root,
        }
        ok = ok and results["exponents"]["unstable_rel_err"] <= fit_tol
        ok = ok and results["exponents"]["stable_rel_err"] <= fit_tol

    base = _stamp("ham", "pendulum_rotors")
    csv_path = out_dir / f"{base}.csv"
    _write_csv(csv_path, "n,p,q,I,theta,J,phi,energy,drift", rows)
    payload = {
        "experiment": "ham",
        "config": cfg,
        "seed": seed,
        "spec": {
            "eps": hs.eps,
            "mu": hs.mu,
            "nu": hs.nu,
            "sigma_param": hs.sigma_param,
            "contact_order": hs.contact_order,
            "h": h,
        },
        "results": results,
        "passed": ok,
    }
    json_path = out_dir / f"{base}.json"
    _write_json(json_path, payload)
    if not quiet:
        status = "pass" if ok else "FAIL"
        print(
            f"ham[eps={hs.eps}, mu={hs.mu}]: {status} "
            f"drift={drift_max:.3g} cyl={cyl_residual:.3g}"
        )
        print(f"  wrote {json_path} and {csv_path}")
    return EXIT_OK if ok else EXIT_PROPERTY


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhimlab",
        description="Normal-form map experiments near a normally hyperbolic invariant manifold.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON config document")
    parser.add_argument("--out", default=None, help="output directory (default: $NHIM_OUT or .)")
    parser.add_argument("--seed", type=int, default=None, help="sampling seed override")
    parser.add_argument("--threads", type=int, default=None, help="kernel thread count hint")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    parser.add_argument(
        "command",
        choices=("validate", "lambda", "annulus", "ham"),
        help="experiment to run",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None and args.threads > 0:
        try:
            import numba

            numba.set_num_threads(args.threads)
        except (ImportError, ValueError):
            pass
    try:
        cfg = _load_config(args.config)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        out_dir = _resolve_out(args, cfg)
        handler = {
            "validate": cmd_validate,
            "lambda": cmd_lambda,
            "annulus": cmd_annulus,
            "ham": cmd_ham,
        }[args.command]
        return handler(cfg, out_dir, seed, args.quiet)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelInconsistencyError as err:
        print(f"model inconsistency: {err}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except ContractError as err:
        print(f"invalid input: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
