"""Command-line interface: certify, tube, sweep, oracle, calibrate.

Exit codes: 0 pass, 1 fail (an audit or certificate failed), 2 hypothesis
violation (a construction's precondition failed), 3 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .config import PipelineConfig, apply_calibration, load_calibration, save_calibration
from .errors import (GlueFailure, HypothesisViolation, MonotonicityViolation,
                     RiccatubeError, RootNotFound, ZetaSelectionFailure)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_HYPOTHESIS = 2
EXIT_USAGE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EXIT_USAGE)


def _add_common(p):
    p.add_argument("--config", type=str, help="pipeline config JSON")
    p.add_argument("--omega-re", type=float)
    p.add_argument("--omega-im", type=float)
    p.add_argument("--k", type=str)
    p.add_argument("--s", type=str)
    p.add_argument("--lambda-re", type=float)
    p.add_argument("--lambda-im", type=float)
    p.add_argument("--alpha-exp", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=str)
    p.add_argument("--no-plots", action="store_true",
                   help="skip figure rendering next to the delimited output")


def _build_config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    lam = cfg.lam
    if args.lambda_re is not None:
        lam = complex(args.lambda_re, lam.imag)
    if args.lambda_im is not None:
        lam = complex(lam.real, args.lambda_im)
    om = cfg.omega
    if args.omega_re is not None:
        om = complex(args.omega_re, om.imag)
    if args.omega_im is not None:
        om = complex(om.real, args.omega_im)
    updates = dict(omega=om, lam=lam)
    for name in ("k", "s", "grid", "seed", "out"):
        v = getattr(args, name)
        if v is not None:
            updates[name] = v
    if args.alpha_exp is not None:
        updates["alpha_exp"] = args.alpha_exp
    d = cfg.to_dict()
    d.update({k: v for k, v in updates.items()
              if not isinstance(v, complex)})
    cfg = PipelineConfig.from_dict(d)
    cfg.omega = complex(om)
    cfg.lam = complex(lam)
    cfg.validate()
    return apply_calibration(cfg)


def _cmd_certify(args) -> int:
    from .pipeline import certify
    from .report import emit_certificate
    cfg = _build_config(args)
    cert = certify(cfg)
    out = emit_certificate(cert, cfg.out, plots=not args.no_plots)
    print(f"certificate: {out}")
    for half in cert.halves:
        print(f"  {half.side:5s} {half.verdict}")
        for r in half.regions:
            print(f"    {r.name:14s} {r.verdict}  audit={r.audit.verdict} "
                  f"excursion={r.audit.max_excursion:.2e}")
    print(f"GLOBAL: {cert.verdict}")
    return EXIT_PASS if cert.verdict == "PASS" else EXIT_FAIL


def _cmd_tube(args) -> int:
    from .oracle import containment_audit
    from .report import emit_tube, write_json
    cfg = _build_config(args)
    model = cfg.model()
    method = args.method
    interval = args.interval
    outdir = Path(cfg.out)
    if method == "prop51":
        from .wkb import prop51_bound, segment_regions
        rt = segment_regions(model, cfg.alpha_exp, cfg.C, C2=cfg.C2)
        from .pipeline import wkb_start_auto
        eps = cfg.epsilon_evanescent()
        iv = interval or (wkb_start_auto(model, rt.u_max, eps), rt.u_max)
        tube, bound, diag = prop51_bound(model, cfg.alpha_exp, interval=iv,
                                         n_grid=cfg.grid)
    elif method == "lens":
        from .pipeline import certify_half  # noqa: F401 (shared helpers)
        from .kappa_method import lens_tube
        from .wkb import segment_regions
        rt = segment_regions(model, cfg.alpha_exp, cfg.C, C2=cfg.C2)
        iv = interval or (rt.u_min, 0.5 * math.pi)
        tube = lens_tube(model, iv, cfg.epsilon_lens(), cfg.nu_lens(),
                         n_grid=cfg.grid, ladder=cfg.lens_ladder)
    elif method == "pole_l0":
        from .special.pole import pole_estimate_L0
        u_max = (interval or (0.0, cfg.pole_handoff_factor
                              / math.sqrt(abs(cfg.omega))))[1]
        tube, diag = pole_estimate_L0(model, u_max, n_grid=cfg.grid)
    elif method == "pole_lpos":
        from .special.pole import pole_estimate_Lpos
        target = model if model.pole_order_left >= 1 else model.mirror()
        tube, diag = pole_estimate_Lpos(target, c_min=cfg.cscr_min,
                                        c_max=cfg.cscr_max, c4=cfg.c4,
                                        n_grid=cfg.grid)
    elif method == "turning":
        from .special.parabolic import quadratic_fit
        from .t_method import turning_point_t_estimate
        from .wkb import segment_regions
        rt = segment_regions(model, cfg.alpha_exp, cfg.C, C2=cfg.C2)
        quad, _ = quadratic_fit(model, (rt.u_max, rt.u_plus))
        iv = interval or (rt.u_max, rt.u_minus)
        tube, C_fit, diag = turning_point_t_estimate(model, quad, iv,
                                                     rt.u_plus,
                                                     n_grid=cfg.grid)
    elif method == "bessel_cone":
        from .special.bessel import bessel_cone_check, cone_arcs
        arcs = cone_arcs(1.0)
        zg = []
        for lo, hi in arcs:
            zg.extend(np.exp(1j * np.radians(np.arange(lo, hi + 1e-9, 2.0))))
        zg.extend([-1.0, -1.0j, np.exp(-75j * math.pi / 180.0)])
        report = {}
        for L in (1, 2, 3):
            report[f"L{L}"] = bessel_cone_check(
                zg, L, np.geomspace(1e-3, 20.0, 200))
        outdir.mkdir(parents=True, exist_ok=True)
        write_json(report, outdir / "bessel_cone.json")
        ok = all(r["all_pass"] for r in report.values())
        print(f"bessel cone report: {outdir / 'bessel_cone.json'} "
              f"{'PASS' if ok else 'FAIL'}")
        return EXIT_PASS if ok else EXIT_FAIL
    else:
        raise HypothesisViolation(0.0, "unknown_method", -1.0, method)
    audit = containment_audit(tube, n_starts=cfg.n_starts, seed=cfg.seed)
    emit_tube(tube, audit, outdir, f"tube_{method}", plots=not args.no_plots)
    ok = tube.all_hypotheses_pass and audit.verdict == "PASS"
    print(f"tube {method}: hypotheses "
          f"{'pass' if tube.all_hypotheses_pass else 'FAIL'}, "
          f"audit {audit.verdict} (excursion {audit.max_excursion:.2e})")
    return EXIT_PASS if ok else EXIT_FAIL


def _cmd_sweep(args) -> int:
    from .pipeline import sweep
    from .report import emit_sweep
    cfg = _build_config(args)
    report = sweep(cfg, args.omegas)
    out = emit_sweep(report, cfg.out, plots=not args.no_plots)
    print(f"sweep report: {out}")
    ok = True
    for name, fit in report["fits"].items():
        print(f"  {name:16s} exponent {fit['exponent']:+.3f} "
              f"(expected {fit['expected']:+.3f})")
    return EXIT_PASS if ok else EXIT_FAIL


def _cmd_oracle(args) -> int:
    from .oracle import integrate_riccati, integrate_sl
    cfg = _build_config(args)
    model = cfg.model()
    a, b = args.interval or (0.3, 0.5 * math.pi)
    grid = np.linspace(a, b, cfg.grid)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    y0 = complex(args.y0_re, args.y0_im)
    tr = integrate_riccati(model, (a, b), y0, grid=grid)
    t1 = integrate_sl(model, (a, b), 1.0, 0.0, grid=grid)
    t2 = integrate_sl(model, (a, b), 0.0, 1.0, grid=grid)
    w = t1.phi * t2.dphi - t1.dphi * t2.phi
    drift = float(np.max(np.abs(w - w[0])) / abs(w[0]))
    path = outdir / "oracle.csv"
    with open(path, "w") as fh:
        fh.write("u,re_y,im_y,re_phi1,im_phi1,re_phi2,im_phi2\n")
        for i, u in enumerate(grid):
            fh.write(",".join(f"{x:.17g}" for x in
                              (u, tr.y[i].real, tr.y[i].imag,
                               t1.phi[i].real, t1.phi[i].imag,
                               t2.phi[i].real, t2.phi[i].imag)) + "\n")
    print(f"oracle trajectory: {path} (wronskian drift {drift:.2e}, "
          f"{len(tr.events)} events)")
    return EXIT_PASS


def _cmd_calibrate(args) -> int:
    from .pipeline import calibrate
    cfg = _build_config(args)
    table = calibrate(cfg)
    save_calibration(table, args.lockfile)
    for name, entry in table.items():
        print(f"  {name:22s} = {entry['value']:<8g} "
              f"(worst margin {entry['worst_margin']:.3g})")
    return EXIT_PASS


def main(argv=None) -> int:
    parser = _Parser(prog="riccatube",
                     description="certified Riccati enclosure tubes for the "
                                 "angular Teukolsky equation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", parents=[], help="end-to-end certificate")
    _add_common(p)
    p.set_defaults(fn=_cmd_certify)

    p = sub.add_parser("tube", help="single-method tube with audit")
    _add_common(p)
    p.add_argument("--method", required=True,
                   choices=["prop51", "lens", "turning", "pole_l0",
                            "pole_lpos", "bessel_cone"])
    p.add_argument("--interval", nargs=2, type=float, default=None)
    p.set_defaults(fn=_cmd_tube)

    p = sub.add_parser("sweep", help="scaling-exponent fits across omegas")
    _add_common(p)
    p.add_argument("--omegas", nargs="+", type=float, required=True)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("oracle", help="reference trajectories and drift")
    _add_common(p)
    p.add_argument("--interval", nargs=2, type=float, default=None)
    p.add_argument("--y0-re", type=float, default=0.0)
    p.add_argument("--y0-im", type=float, default=1.0)
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("calibrate", help="regenerate the constants lockfile")
    _add_common(p)
    p.add_argument("--lockfile", type=str, default=None)
    p.set_defaults(fn=_cmd_calibrate)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (HypothesisViolation, GlueFailure, MonotonicityViolation,
            RootNotFound, ZetaSelectionFailure) as e:
        print(f"hypothesis violation: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except RiccatubeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
