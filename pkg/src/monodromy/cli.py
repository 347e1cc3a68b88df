"""Command-line front end: scenario configs in, reports / plot data / figures out.

Each subcommand mirrors a scenario kind; a config file fully determines the
run, and the JSON report embeds the config hash and every tolerance used,
so reruns are byte-identical.  The report path also writes the delimited
plot data (CSV or NDJSON) and renders a matplotlib figure next to it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import cells as cells_mod
from . import connect as connect_mod
from . import formal as formal_mod
from . import geometry as geom_mod
from . import levelt as levelt_mod
from .core import GaussRational, make_system, parse_scalar, serialize_scalar
from .errors import ConfigInvalid, KindMismatch, MonodromyError
from .systems import BUILTIN_FAMILIES, BUILTIN_SLICES, BUILTIN_SYSTEMS

KINDS = ("rays", "cells", "formal", "levelt", "connect", "flow", "verify",
         "painleve-a3")

SCHEMA = {
    "type": "object",
    "required": ["version", "kind"],
    "properties": {
        "version": {"const": 1},
        "kind": {"enum": list(KINDS)},
        "system": {"type": "object"},
        "family": {"type": "string"},
        "params": {"type": "object"},
        "output": {"type": "object"},
        "mode": {"enum": ["float", "exact"]},
        "t": {"type": "array"},
        "tau_tilde": {"type": "number"},
    },
    "additionalProperties": True,
}

BATCH_SCHEMA = {
    "type": "object",
    "required": ["version", "batch"],
    "properties": {
        "version": {"const": 1},
        "batch": {"type": "array", "items": SCHEMA},
    },
}


def _validate(config):
    import jsonschema

    schema = BATCH_SCHEMA if "batch" in config else SCHEMA
    try:
        jsonschema.validate(config, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigInvalid(str(exc)) from exc


def _config_hash(config) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _mat(M):
    """JSON form of a complex matrix."""
    M = np.asarray(M)
    return [[serialize_scalar(x) for x in row] for row in M]


def build_system(spec, mode="float"):
    """A SystemCoefficients from a config's ``system`` block.

    Either {"builtin": name} or an explicit {n, u0, partition, coefficients}
    with constant matrices or polynomial entries
    {"poly": [{"entry": [a, b], "terms": [{"coef": c, "exponents": [...]}]}]}.
    """
    if "builtin" in spec:
        name = spec["builtin"]
        if name not in BUILTIN_SYSTEMS:
            raise ConfigInvalid(f"unknown builtin system {name!r}")
        return BUILTIN_SYSTEMS[name](mode)
    try:
        n = int(spec["n"])
        u0 = tuple(parse_scalar(x) for x in spec["u0"])
        partition = tuple(spec["partition"])
        gens = []
        for coeff in spec.get("coefficients", []):
            if "constant" in coeff:
                gens.append([[parse_scalar(x) for x in row] for row in coeff["constant"]])
            elif "poly" in coeff:
                gens.append(_poly_generator(n, coeff["poly"]))
            else:
                raise ConfigInvalid("coefficient needs 'constant' or 'poly'")
        return make_system(n, u0, partition, gens, label=spec.get("label", "custom"))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigInvalid(f"bad system spec: {exc}") from exc


def _poly_generator(n, entries):
    parsed = []
    for e in entries:
        a, b = e["entry"]
        terms = [(parse_scalar(t["coef"]), tuple(int(x) for x in t["exponents"]))
                 for t in e["terms"]]
        parsed.append((a - 1, b - 1, terms))

    def gen(t):
        zero = 0 * t[0] if not isinstance(t[0], (int, float, complex)) else 0.0
        M = [[zero for _ in range(n)] for _ in range(n)]
        for a, b, terms in parsed:
            acc = zero
            for coef, expo in terms:
                mono = coef + zero * 0
                for k, p in enumerate(expo):
                    for _ in range(p):
                        mono = mono * t[k]
                acc = acc + mono
            M[a][b] = acc
        return M

    return gen


def _get_t(config, system, mode):
    if "t" in config:
        return [parse_scalar(x) for x in config["t"]]
    return system.zero_t(GaussRational(0) if mode == "exact" else 0j)


def _params(config):
    p = connect_mod.NumericsParams()
    for key, val in config.get("params", {}).items():
        if not hasattr(p, key):
            raise ConfigInvalid(f"unknown numerics parameter {key!r}")
        setattr(p, key, val)
    return p


# -- scenario runners -------------------------------------------------------------


def run_rays(config, mode):
    system = build_system(config.get("system", {"builtin": "a3-frozen"}), mode)
    t = _get_t(config, system, "float")
    window = tuple(config.get("window", (-math.pi, math.pi)))
    rays = geom_mod.stokes_directions(system, t, window)
    rows = [{"direction": r.direction, "a": r.pair[0] + 1, "b": r.pair[1] + 1,
             "splitting": int(r.splitting)} for r in rays]
    report = {
        "rays": [{"direction": f"{r.direction:.16g}",
                  "pair": [r.pair[0] + 1, r.pair[1] + 1],
                  "splitting": r.splitting} for r in rays],
        "window": [f"{window[0]:.16g}", f"{window[1]:.16g}"],
        "count": len(rays),
        "pass": True,
    }
    try:
        eta = config.get("eta")
        if eta is not None:
            fan = geom_mod.build_fan(system, float(eta))
            report["fan"] = geom_mod.serialize_fan(fan)
    except MonodromyError as exc:
        report["fan_error"] = str(exc)
    return report, ("csv", ["direction", "a", "b", "splitting"], rows)


def run_cells(config, mode):
    system = build_system(config["system"], mode)
    tau = float(config.get("tau_tilde", 0.0))
    eps0 = float(config.get("epsilon0", 0.1))
    if "path" in config:
        # crossing report along a piecewise-linear deformation path
        path = [[parse_scalar(x) for x in p] for p in config["path"]]
        events = cells_mod.detect_crossings(system, path, tau,
                                            tol=float(config.get("tol", 1e-10)))
        rows = [{"x": e.x, "pair": [e.pair[0] + 1, e.pair[1] + 1],
                 "wall": e.wall, "direction": e.direction} for e in events]
        report = {
            "kind": "crossings",
            "n_events": len(events),
            "tau_tilde": f"{tau:.16g}",
            "pass": True,
        }
        return report, ("ndjson", None, rows)
    slice_name = config.get("slice")
    slice_map = BUILTIN_SLICES.get(slice_name) if isinstance(slice_name, str) else None
    if slice_name is not None and slice_map is None:
        raise ConfigInvalid(f"unknown slice {slice_name!r}")
    res = cells_mod.enumerate_cells(system, tau, eps0,
                                    resolution=int(config.get("resolution", 48)),
                                    slice_map=slice_map)
    bound, flag = cells_mod.radius_bound(system, tau)
    rows = []
    for (pairs, signs), t in sorted(res["representatives"].items()):
        sig = "".join("+" if s > 0 else "-" for s in signs)
        rows.append({"signature": sig,
                     **{f"t{k+1}_re": complex(x).real for k, x in enumerate(t)},
                     **{f"t{k+1}_im": complex(x).imag for k, x in enumerate(t)}})
    expected = config.get("expected_count")
    ok = expected is None or res["count"] == int(expected)
    report = {
        "count": res["count"],
        "exact": res["exact"],
        "epsilon0": f"{eps0:.16g}",
        "tau_tilde": f"{tau:.16g}",
        "radius_bound": f"{bound:.16g}" if math.isfinite(bound) else "inf",
        "radius_bound_flag": flag,
        "signatures": [r["signature"] for r in rows],
        "pass": bool(ok),
    }
    fields = sorted({k for r in rows for k in r})
    return report, ("csv", fields, rows)


def run_formal(config, mode):
    system = build_system(config["system"], mode)
    t = _get_t(config, system, mode)
    K = int(config.get("K", 6))
    sol = formal_mod.formal_coefficients(system, t, K, mode=mode)
    resid = formal_mod.recursion_residual(system, sol)
    report = {
        "K": K,
        "mode": mode,
        "t": [serialize_scalar(x) for x in t],
        "B1": [serialize_scalar(sol.B1[i, i]) for i in range(system.n)],
        "F_max_abs": [f"{float(F.norm_max()):.16g}" for F in sol.F],
        "recursion_residual": f"{resid:.16g}",
        "pass": bool(resid <= 1e-9),
    }
    if "remainder_K" in config:
        # remainder-decay data: first-omitted-term estimates on a radius grid
        from .connect import CoverPoint, evaluate_formal

        Krem = int(config["remainder_K"])
        sol_f = sol   # evaluation coerces exact entries to complex
        theta = float(config.get("theta", 0.0))
        radii = config.get("radii") or [10.0 * 2 ** (k / 2) for k in range(9)]
        rows = []
        for r in radii:
            _, err, used = evaluate_formal(sol_f, CoverPoint(float(r), theta),
                                           K=Krem)
            rows.append({"log10_radius": math.log10(r),
                         "log10_error": math.log10(max(err, 1e-300)),
                         "used_terms": used})
        slope = (rows[-1]["log10_error"] - rows[0]["log10_error"]) / \
            (rows[-1]["log10_radius"] - rows[0]["log10_radius"])
        report["remainder_slope"] = f"{slope:.16g}"
        report["remainder_K"] = Krem
        report["pass"] = bool(report["pass"] and slope <= -(Krem - 0.1))
        return report, ("csv", ["log10_radius", "log10_error", "used_terms"], rows)
    rows = []
    for k, F in enumerate(sol.F, start=1):
        rows.append({"k": k, "F": _mat(F.to_numpy()),
                     "max_abs": float(F.norm_max())})
    return report, ("ndjson", None, rows)


def run_levelt(config, mode):
    system = build_system(config["system"], mode)
    t = [complex(parse_scalar(x)) if not isinstance(x, complex) else x
         for x in (config.get("t") or [0.0] * system.n)]
    L = int(config.get("L", 20))
    data = levelt_mod.levelt_series(system, t, L)
    radii = [0.4 * 2 ** (-k) for k in range(5)]
    resid = [levelt_mod.levelt_residual(system, t, data, r) for r in radii]
    # slope from the largest radii (small ones sit on the roundoff floor)
    slope = (math.log(resid[1]) - math.log(resid[0])) / \
        (math.log(radii[1]) - math.log(radii[0])) if min(resid[:2]) > 0 else float(L)
    tol = float(config.get("tolerance", 1e-8))
    rows = [{"r": r, "residual": e} for r, e in zip(radii, resid)]
    report = {
        "G0": _mat(data.G0),
        "mu": [serialize_scalar(x) for x in data.mu],
        "D0": [int(d) for d in data.D0],
        "S0": [serialize_scalar(x) for x in data.S0],
        "R0": _mat(data.R0),
        "Psi": [_mat(P) for P in data.Psi],
        "resonance_lattice": [list(x) for x in data.resonance_lattice],
        "order": L,
        "residual_slope": f"{slope:.16g}",
        "residual_at_smallest_radius": f"{resid[-1]:.6g}",
        "tolerance": f"{tol:.3g}",
        "pass": bool(resid[-1] <= tol),
    }
    return report, ("csv", ["r", "residual"], rows)


def run_connect(config, mode):
    system = build_system(config["system"], mode)
    t = _get_t(config, system, "float")
    tau = float(config.get("tau_tilde", 0.0))
    params = _params(config)
    data = connect_mod.stokes_matrices(system, t, tau, params)
    cons = connect_mod.monodromy_consistency(system, t, tau, params)
    rows = []
    sols, _, _ = connect_mod.connection_matrices(system, t, tau, params, rs=(1,))
    for p, Yc, Yf in sols[0].samples:
        rows.append({"r": p.r, "theta": p.theta,
                     "max_abs_Y": float(np.max(np.abs(Yc)))})
    tol = float(config.get("tolerance", 1e-8))
    ok = cons["constraint"] <= tol and cons["infinity_monodromy"] <= tol
    report = {
        "S_nu": _mat(data.S_nu),
        "S_nu_plus_mu": _mat(data.S_nu_plus_mu),
        "B1": [serialize_scalar(x) for x in data.B1],
        "C0": _mat(data.C0),
        "quality": {
            "match_residuals": [f"{x:.4g}" for x in data.quality["match_residuals"]],
            "unit_diagonal_dev": f"{data.quality['unit_diagonal_dev']:.4g}",
            "triangularity_dev": f"{data.quality['triangularity_dev']:.4g}",
        },
        "consistency": {k: (f"{v:.6g}" if v is not None else None)
                        for k, v in cons.items()},
        "tolerance": f"{tol:.3g}",
        "pass": bool(ok),
    }
    return report, ("ndjson", None, rows)


def run_flow(config, mode):
    from .isomono import flow as flow_fn

    family_name = config.get("family", "a3-family")
    if family_name not in BUILTIN_FAMILIES:
        raise ConfigInvalid(f"unknown family {family_name!r}")
    fam = BUILTIN_FAMILIES[family_name]()
    system = make_system(len(fam.u0), fam.u0, fam.partition, [fam.A1_of_t],
                         label=fam.label)
    path = [[complex(parse_scalar(x)) for x in p] for p in config["path"]]
    A1_init = np.asarray(fam.A1_of_t(path[0]), dtype=complex)
    n_samples = int(config.get("n_samples", 9))
    tau = config.get("tau_tilde")
    res = flow_fn(system, A1_init, path, n_samples=n_samples,
                  tau_tilde=None if tau is None else float(tau))
    rows = []
    for s in res.samples:
        rows.append({"x": s.x,
                     "t": [serialize_scalar(x) for x in s.t],
                     "A1": _mat(s.A1),
                     "eigenvalues": [serialize_scalar(x) for x in s.eigenvalues],
                     "signature": str(s.signature) if s.signature else None})
    w0 = res.samples[0].eigenvalues
    drift = max(float(np.max(np.abs(s.eigenvalues - w0))) for s in res.samples)
    report = {
        "family": family_name,
        "n_samples": len(res.samples),
        "eigenvalue_drift": f"{drift:.16g}",
        "status": res.status,
        "pass": bool(drift <= 1e-8),
    }
    return report, ("ndjson", None, rows)


def run_verify(config, mode):
    from .isomono import verify_isomonodromic

    family_name = config.get("family", "a3-family")
    if family_name not in BUILTIN_FAMILIES:
        raise ConfigInvalid(f"unknown family {family_name!r}")
    fam = BUILTIN_FAMILIES[family_name]()
    ts = [tuple(complex(parse_scalar(x)) for x in p) for p in config["samples"]]
    tau = float(config.get("tau_tilde", 0.0))
    tol = float(config.get("tolerance", 1e-6))
    rep, _ = verify_isomonodromic(fam, ts, tau, _params(config), tol=tol)
    rows = [{"deviation": k, "value": v} for k, v in rep.items()
            if k.startswith("dev_")]
    report = {**{k: (f"{v:.16g}" if isinstance(v, float) else v)
                 for k, v in rep.items()},
              "tolerance": f"{tol:.3g}"}
    return report, ("csv", ["deviation", "value"], rows)


def run_painleve_a3(config, mode):
    from fractions import Fraction

    from . import painleve as pv

    checks = {}
    # Taylor coefficients, exact
    expected = [Fraction(1, 2), Fraction(13, 32), Fraction(13, 64),
                Fraction(201, 4096), Fraction(-229, 8192),
                Fraction(-101055, 2097152), Fraction(-167867, 4194304),
                Fraction(-3235319, 134217728)]
    got = pv.a3_taylor(8)
    checks["taylor"] = {"exact_match": got == expected,
                        "coefficients": [str(c) for c in got]}
    # Omega Taylor coefficients, exact series against the listed rationals
    from .core import GaussRational as G

    O1, O2, O3 = pv.a3_omega_series(4)
    target1 = [G(Fraction(1, 8)), G(Fraction(-1, 256)), G(Fraction(-17, 16384)),
               G(Fraction(-257, 524288))]
    target2 = [G(0), G(Fraction(-1, 32)), G(Fraction(-1, 64)),
               G(Fraction(-173, 16384))]
    target3 = [G(Fraction(1, 8)), G(Fraction(1, 256)), G(Fraction(47, 16384)),
               G(Fraction(1217, 524288))]
    series_match = (O1[:4] == target1 and O2[:4] == target2 and O3[:4] == target3)
    # closed form vs its own series at |t| = 0.05 (remainder-bounded)
    s2 = math.sqrt(2)
    tval = 0.05
    st = pv.a3_state(tval)
    eval_err = max(
        abs(st.Omega[0] - 1j * s2 * sum(complex(c) * tval ** k
                                        for k, c in enumerate(O1))),
        abs(st.Omega[1] - sum(complex(c) * tval ** k for k, c in enumerate(O2))),
        abs(st.Omega[2] - 1j * s2 * sum(complex(c) * tval ** k
                                        for k, c in enumerate(O3))))
    lim = pv.a3_state(1e-7).Omega
    limit_err = max(abs(lim[0] - 1j / (4 * s2)), abs(lim[1]),
                    abs(lim[2] - 1j / (4 * s2)))
    checks["omega"] = {"series_coefficients_exact": bool(series_match),
                       "evaluation_error": f"{eval_err:.6g}",
                       "limit_error": f"{limit_err:.6g}"}
    m = 32
    r = 0.05
    samples = [pv.a3_state(r * k / m).Omega for k in range(1, m + 1)]
    # Stokes matrices, both routes
    S1c, S2c = pv.a3_frozen_stokes("hankel-closed-form")
    S1n, S2n = pv.a3_frozen_stokes("numeric", params=_params(config))
    route_err = max(float(np.max(np.abs(S1c - S1n))), float(np.max(np.abs(S2c - S2n))))
    S1j, S2j = pv.a3_frozen_stokes("hankel-closed-form", J_variant=True)
    checks["stokes-matrices"] = {
        "S1": _mat(S1n), "S2": _mat(S2n),
        "S1_J_variant": _mat(S1j),
        "route_agreement": f"{route_err:.6g}",
        "vanishing_entries": [f"{abs(S1n[0, 1]):.4g}", f"{abs(S1n[1, 0]):.4g}",
                              f"{abs(S2n[0, 1]):.4g}", f"{abs(S2n[1, 0]):.4g}"],
    }
    # consistency on the frozen system
    from .connect import monodromy_consistency
    from .systems import a3_frozen_system

    cons = monodromy_consistency(a3_frozen_system(), [0.0, 0.0, 0.0], 0.0,
                                 _params(config))
    checks["consistency"] = {k: (f"{v:.6g}" if v is not None else None)
                             for k, v in cons.items()}
    ok = checks["taylor"]["exact_match"] and series_match \
        and eval_err <= 1e-7 and limit_err <= 1e-8 and route_err <= 1e-6 \
        and cons["constraint"] <= 1e-8 and cons["infinity_monodromy"] <= 1e-8
    report = {**checks, "pass": bool(ok)}
    rows = [{"t": r * (k + 1) / m,
             "Omega1_re": s[0].real, "Omega1_im": s[0].imag,
             "Omega2_re": s[1].real, "Omega2_im": s[1].imag,
             "Omega3_re": s[2].real, "Omega3_im": s[2].imag}
            for k, s in enumerate(samples)]
    return report, ("csv", ["t", "Omega1_re", "Omega1_im", "Omega2_re",
                            "Omega2_im", "Omega3_re", "Omega3_im"], rows)


RUNNERS = {
    "rays": run_rays,
    "cells": run_cells,
    "formal": run_formal,
    "levelt": run_levelt,
    "connect": run_connect,
    "flow": run_flow,
    "verify": run_verify,
    "painleve-a3": run_painleve_a3,
}


# -- output writers ------------------------------------------------------------------


def _write_csv(path, fields, rows):
    with open(path, "w") as fh:
        fh.write(",".join(fields) + "\n")
        for r in rows:
            fh.write(",".join(_csv_cell(r.get(f)) for f in fields) + "\n")


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_ndjson(path, rows):
    with open(path, "w") as fh:
        for r in rows:
            fh.write(json.dumps(r, sort_keys=True, default=str) + "\n")


def render_figure(kind, report, rows, out_path):
    """Matplotlib rendering of a scenario's plot data to a PNG file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    if kind == "rays":
        for r in rows:
            th = r["direction"]
            style = "-" if r.get("splitting") else "--"
            ax.plot([0, math.cos(th)], [0, math.sin(th)], style, lw=1.4)
            ax.annotate(f"({r['a']},{r['b']})", (1.04 * math.cos(th), 1.04 * math.sin(th)),
                        fontsize=8, ha="center")
        ax.set_aspect("equal")
        ax.set_xlim(-1.3, 1.3)
        ax.set_ylim(-1.3, 1.3)
        ax.set_title("Stokes ray directions")
    elif kind == "cells":
        if rows and "wall" in rows[0]:
            xs = [r["x"] for r in rows]
            ax.scatter(xs, range(len(rows)), marker="|", s=200)
            for i, r in enumerate(rows):
                ax.annotate(f"{tuple(r['pair'])} {r['wall']}", (r["x"], i), fontsize=8)
            ax.set_xlim(0, 1)
            ax.set_xlabel("path parameter")
            ax.set_title("wall crossings along the path")
        else:
            xs = [r.get("t2_re", r.get("t1_re", 0.0)) for r in rows]
            ys = [r.get("t2_im", r.get("t1_im", 0.0)) for r in rows]
            ax.scatter(xs, ys, c=range(len(rows)), cmap="tab10")
            for r, x, y in zip(rows, xs, ys):
                ax.annotate(r["signature"], (x, y), fontsize=8)
            ax.set_aspect("equal")
            ax.set_title(f"cell representatives (count = {report['count']})")
    elif kind == "formal":
        if rows and "log10_radius" in rows[0]:
            xs = [r["log10_radius"] for r in rows]
            ys = [r["log10_error"] for r in rows]
            ax.plot(xs, ys, "o-")
            ax.set_xlabel("log10 |z|")
            ax.set_ylabel("log10 remainder estimate")
            ax.set_title("asymptotic remainder decay")
        else:
            ks = [r["k"] for r in rows]
            ns = [max(r["max_abs"], 1e-300) for r in rows]
            ax.semilogy(ks, ns, "o-")
            ax.set_xlabel("k")
            ax.set_ylabel("max |F_k|")
            ax.set_title("formal coefficient growth")
    elif kind == "levelt":
        rs = [r["r"] for r in rows]
        es = [max(r["residual"], 1e-300) for r in rows]
        ax.loglog(rs, es, "o-")
        ax.set_xlabel("|z|")
        ax.set_ylabel("ODE residual")
        ax.set_title("normal-form series residual")
    elif kind == "connect":
        th = [r["theta"] for r in rows]
        vals = [r["max_abs_Y"] for r in rows]
        ax.semilogy(th, vals, "o-")
        ax.set_xlabel("arg z on matching arc")
        ax.set_ylabel("max |Y|")
        ax.set_title("matching-arc samples")
    elif kind in ("flow", "verify"):
        if kind == "flow":
            for i in range(len(rows[0]["eigenvalues"])):
                xs = [r["x"] for r in rows]
                ys = [abs(complex(*r["eigenvalues"][i])) if isinstance(r["eigenvalues"][i], list)
                      else abs(r["eigenvalues"][i]) for r in rows]
                ax.plot(xs, ys, "o-", label=f"|eig {i+1}|")
            ax.legend()
            ax.set_xlabel("path parameter")
            ax.set_title("spectrum along the flow (conserved)")
        else:
            names = [r["deviation"] for r in rows]
            vals = [max(float(r["value"]), 1e-300) for r in rows]
            ax.bar(names, vals)
            ax.set_yscale("log")
            ax.set_title("essential-data deviations")
    elif kind == "painleve-a3":
        ts = [r["t"] for r in rows]
        for name in ("Omega1", "Omega2", "Omega3"):
            ax.plot(ts, [math.hypot(r[f"{name}_re"], r[f"{name}_im"]) for r in rows],
                    ".", label=f"|{name}|")
        ax.set_xlabel("Re t on the sample circle")
        ax.legend()
        ax.set_title("Omega triple on |t| = 0.05")
    else:
        raise KindMismatch(f"no figure renderer for kind {kind!r}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=110, metadata={"Software": None})
    plt.close(fig)


def emit_plot_data(report_path, kind, out_dir=None):
    """Re-emit plot data and figure from a stored report (kind-checked)."""
    report_path = Path(report_path)
    with open(report_path) as fh:
        stored = json.load(fh)
    if stored.get("kind") != kind:
        raise KindMismatch(f"report is of kind {stored.get('kind')!r}, not {kind!r}")
    out_dir = Path(out_dir) if out_dir else report_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = stored.get("plot_rows", [])
    fmt = stored.get("plot_format", "csv")
    fields = stored.get("plot_fields")
    if fmt == "csv":
        _write_csv(out_dir / "data.csv", fields, rows)
    else:
        _write_ndjson(out_dir / "data.ndjson", rows)
    render_figure(kind, stored.get("report", {}), rows, out_dir / "figure.png")
    return out_dir


def run_scenario(config, out_dir, mode=None, precision=None):
    """Execute one scenario dict; returns (exit_code, report_path)."""
    _validate(config)
    kind = config["kind"]
    mode = mode or config.get("mode", "float")
    if precision and precision > 53:
        import mpmath as mp

        mp.mp.prec = int(precision)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    runner = RUNNERS[kind]
    report, (fmt, fields, rows) = runner(config, mode)
    envelope = {
        "kind": kind,
        "config_hash": _config_hash(config),
        "mode": mode,
        "report": report,
        "plot_format": fmt,
        "plot_fields": fields,
        "plot_rows": rows,
    }
    report_path = out_dir / "report.json"
    with open(report_path, "w") as fh:
        json.dump(envelope, fh, sort_keys=True, indent=1, default=str)
        fh.write("\n")
    if fmt == "csv":
        _write_csv(out_dir / "data.csv", fields, rows)
    else:
        _write_ndjson(out_dir / "data.ndjson", rows)
    try:
        render_figure(kind, report, rows, out_dir / "figure.png")
    except Exception as exc:         # figure failure must not mask the report
        (out_dir / "figure_error.txt").write_text(f"{exc}\n")
    passed = bool(report.get("pass", True))
    print(f"[{kind}] {'PASS' if passed else 'FAIL'}  report: {report_path}")
    return (0 if passed else 1), report_path


def main(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario JSON file")
    common.add_argument("--precision", type=int, default=53,
                        help="working precision in bits for special functions")
    common.add_argument("--mode", choices=["exact", "float"], default=None)
    common.add_argument("--out", type=Path, default=Path("out"))
    common.add_argument("--jobs", type=int, default=1)
    parser = argparse.ArgumentParser(
        prog="monodromy",
        description="Stokes/connection data of rank-1 irregular systems "
                    "with coalescing eigenvalues",
        parents=[common])
    sub = parser.add_subparsers(dest="command")
    for kind in KINDS:
        sub.add_parser(kind, help=f"run a {kind} scenario", parents=[common])
    pp = sub.add_parser("plot", help="re-emit plot data from a report",
                        parents=[common])
    pp.add_argument("report", type=Path)
    pp.add_argument("--kind", required=True, choices=list(KINDS))
    args = parser.parse_args(argv)

    if args.command == "plot":
        try:
            emit_plot_data(args.report, args.kind, args.out)
        except KindMismatch as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0

    config_path = getattr(args, "config", None) or args.config
    if config_path is None:
        parser.error("--config is required")
    try:
        with open(config_path) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.command and args.command != "plot" and "kind" not in config:
        config["kind"] = args.command

    try:
        _validate(config)
        if "batch" in config:
            codes = []
            items = list(enumerate(config["batch"]))
            if args.jobs > 1:
                import concurrent.futures as cf

                with cf.ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    futs = [pool.submit(run_scenario, c, args.out / f"scenario_{i:03d}",
                                        args.mode, args.precision)
                            for i, c in items]
                    codes = [f.result()[0] for f in futs]
            else:
                for i, c in items:
                    code, _ = run_scenario(c, args.out / f"scenario_{i:03d}",
                                           args.mode, args.precision)
                    codes.append(code)
            return max(codes) if codes else 0
        if args.command and config["kind"] != args.command:
            raise ConfigInvalid(
                f"config kind {config['kind']!r} does not match subcommand {args.command!r}")
        code, _ = run_scenario(config, args.out, args.mode, args.precision)
        return code
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MonodromyError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
