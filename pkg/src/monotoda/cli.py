"""``mono``: batch driver for the Toda / spectral-curve / theta pipeline.

Configs are INI files.  Sections used:

    [run]      seed
    [toda]     n, q, p (or seed/scale for a random start), s0, s1, tol, drift_tol
    [curve]    n, a (a_2..a_n) or t (n = 2), beta or beta_abs [+ beta_arg];
               alternatively file = <curve json>
    [periods]  tol, basis = cyclic | cut
    [es]       ints, tol, free, max_iter, quad_tol
    [theta]    mode = fay_accola, h3;  grid, samples, tau (explicit, n = 2 only)

Exit codes: 0 ok, 2 config error, 3 invariant/reality violation,
4 reducible curve, 5 ES infeasible, 6 indefinite Im tau.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import curves as cv
from . import nahm_toda as nt
from . import riemann as rm
from . import theta as th

log = logging.getLogger("monotoda")

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_REDUCIBLE, EXIT_INFEASIBLE, EXIT_TAU = 0, 2, 3, 4, 5, 6


class ConfigError(ValueError):
    pass


class CommandFailure(RuntimeError):
    def __init__(self, code: int, msg: str, report: Optional[dict] = None):
        super().__init__(msg)
        self.code, self.report = code, report


# --------------------------------------------------------------------------
# config parsing


class Config:
    def __init__(self, path):
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} not found")
        self.path = path
        self.cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            self.cp.read(path)
        except configparser.Error as ex:
            raise ConfigError(f"malformed config: {ex}") from ex

    def has(self, section: str, key: Optional[str] = None) -> bool:
        if not self.cp.has_section(section):
            return False
        return key is None or self.cp.has_option(section, key)

    def raw(self, section: str, key: str, default=None):
        if not self.has(section, key):
            if default is None:
                raise ConfigError(f"missing [{section}] {key}")
            return default
        return self.cp.get(section, key)

    def _conv(self, section, key, fn, default):
        if not self.has(section, key):
            if default is None:
                raise ConfigError(f"missing [{section}] {key}")
            return default
        text = self.cp.get(section, key)
        try:
            return fn(text)
        except (ValueError, TypeError) as ex:
            raise ConfigError(f"[{section}] {key} = {text!r}: {ex}") from ex

    def int(self, section, key, default=None) -> int:
        return self._conv(section, key, int, default)

    def float(self, section, key, default=None) -> float:
        return self._conv(section, key, float, default)

    def complex(self, section, key, default=None) -> complex:
        return self._conv(section, key, lambda s: complex(s.replace(" ", "")), default)

    def bool(self, section, key, default=None) -> bool:
        return self._conv(section, key, _parse_bool, default)

    def floats(self, section, key, default=None) -> List[float]:
        return self._conv(section, key, lambda s: [float(v) for v in _split(s)], default)

    def ints(self, section, key, default=None) -> List[int]:
        return self._conv(section, key, lambda s: [int(v) for v in _split(s)], default)

    def matrix(self, section, key, default=None) -> np.ndarray:
        def parse(s):
            rows = [[complex(v.replace(" ", "")) for v in _split(r)] for r in s.split(";") if r.strip()]
            if len({len(r) for r in rows}) != 1:
                raise ValueError("ragged matrix")
            return np.array(rows, dtype=complex)
        return self._conv(section, key, parse, default)


def _split(s: str):
    return [v for v in s.replace(",", " ").split() if v]


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _positive(name: str, v: float) -> float:
    if not v > 0:
        raise ConfigError(f"{name} must be positive, got {v}")
    return v


def _seed(cfg: Config, section: str) -> int:
    return cfg.int(section, "seed", cfg.int("run", "seed", 0))


def curve_from_config(cfg: Config) -> cv.SpectralCurve:
    if not cfg.has("curve"):
        raise ConfigError("missing [curve] section")
    if cfg.has("curve", "file"):
        p = Path(cfg.raw("curve", "file"))
        if not p.is_absolute():
            p = cfg.path.parent / p
        if not p.is_file():
            raise ConfigError(f"curve file {p} not found")
        try:
            return cv.SpectralCurve.from_json(json.loads(p.read_text()))
        except (ValueError, KeyError, TypeError) as ex:
            raise ConfigError(f"bad curve file {p}: {ex}") from ex
    n = cfg.int("curve", "n")
    if n < 2:
        raise ConfigError("n must be at least 2")
    if cfg.has("curve", "beta"):
        beta = cfg.complex("curve", "beta")
    else:
        beta = cfg.float("curve", "beta_abs", 1.0) * np.exp(1j * cfg.float("curve", "beta_arg", 0.0))
    if beta == 0:
        raise ConfigError("beta must be nonzero")
    if cfg.has("curve", "t"):
        if n != 2:
            raise ConfigError("t is only meaningful for n = 2")
        a = [cfg.float("curve", "t") * abs(beta)]
    else:
        a = cfg.floats("curve", "a")
    if len(a) != n - 1:
        raise ConfigError(f"need n-1 = {n - 1} values of a, got {len(a)}")
    return cv.SpectralCurve.cyclic(n, a, beta)


def _toda_curve(c: cv.SpectralCurve) -> cv.HyperellipticCurve:
    try:
        h = cv.quotient(c)
        h.roots()
    except cv.DegenerateCurveError as ex:
        raise CommandFailure(EXIT_REDUCIBLE, f"reducible: {ex}") from ex
    if c.n == 2 and cv.n2_normal_form(c).reducible:
        raise CommandFailure(EXIT_REDUCIBLE, "reducible: t = 2")
    return h


# --------------------------------------------------------------------------
# commands


def cmd_simulate(cfg: Config, out: Path) -> dict:
    sec = "toda"
    n = cfg.int(sec, "n")
    if n < 2:
        raise ConfigError("n must be at least 2")
    s0, s1 = cfg.float(sec, "s0", 0.3), cfg.float(sec, "s1", 1.7)
    tol = _positive("tol", cfg.float(sec, "tol", 1e-10))
    drift_tol = _positive("drift_tol", cfg.float(sec, "drift_tol", 1e-8))
    if not (0 < s0 < 2 and 0 < s1 < 2):
        raise ConfigError("s0 and s1 must lie in (0, 2)")
    if cfg.has(sec, "q") or cfg.has(sec, "p"):
        q, p = cfg.floats(sec, "q"), cfg.floats(sec, "p")
        if len(q) != n or len(p) != n:
            raise ConfigError("q and p need n entries each")
        start = nt.TodaState(q, p, s0)
    else:
        rng = np.random.default_rng(_seed(cfg, sec))
        start = nt.TodaState.random(n, rng, scale=cfg.float(sec, "scale", 0.5), s=s0)
    traj = nt.integrate(start, s1, tol=tol)
    traj.to_csv(out / "trajectory.csv")
    if traj.blowup:
        report = {"n": n, "s0": s0, "s1": s1, "tol": tol, "steps": len(traj) - 1,
                  "q0": start.q, "p0": start.p, "H0": float(nt.hamiltonian(start)),
                  "H_drift": None, "spectral_drift": None, "antihermiticity_drift": None,
                  "blowup": True, "s_star": traj.s_star, "message": traj.message,
                  "drift_tol": drift_tol, "ok": False}
        raise CommandFailure(EXIT_INVARIANT, f"blow-up near s* = {traj.s_star:.12g}", report)
    states = traj.states()
    H = np.array([nt.hamiltonian(s) for s in states])
    nahm = [nt.build_nahm(s) for s in states]
    grids = [nt.spectral_bipoly(m) for m in nahm]
    h_scale = max(1.0, abs(H[0]))
    c_scale = max(1.0, float(np.abs(grids[0].grid).max()))
    report = {
        "n": n, "s0": s0, "s1": float(traj.s[-1]), "tol": tol, "steps": len(traj) - 1,
        "q0": start.q, "p0": start.p,
        "H0": float(H[0]),
        "H_drift": float(np.abs(H - H[0]).max() / h_scale),
        "spectral_drift": max(g.max_abs_diff(grids[0]) for g in grids) / c_scale,
        "antihermiticity_drift": max(m.antihermiticity_defect() for m in nahm),
        "blowup": traj.blowup, "s_star": traj.s_star, "message": traj.message,
        "drift_tol": drift_tol,
    }
    worst = max(report["H_drift"], report["spectral_drift"], report["antihermiticity_drift"])
    report["ok"] = bool(worst < drift_tol)
    if not report["ok"]:
        raise CommandFailure(EXIT_INVARIANT, f"invariant drift {worst:.3e} exceeds {drift_tol:g}", report)
    return report


def cmd_curve(cfg: Config, out: Path) -> dict:
    c = curve_from_config(cfg)
    ok, viol = cv.check_reality(c)
    report = {"spectral": c.to_json(), "genus": cv.genus_ledger(c.n),
              "reality": {"ok": bool(ok), "max_violation": float(viol)}}
    if not ok:
        raise CommandFailure(EXIT_INVARIANT, f"reality violated ({viol:.3e})", report)
    if not c.is_cyclic:
        return report
    if c.n == 2:
        nf = cv.n2_normal_form(c)
        report["normal_form"] = {"t": nf.t, "theta": nf.theta, "reducible": nf.reducible}
        if nf.reducible:
            raise CommandFailure(EXIT_REDUCIBLE, "reducible: t = 2", report)
        report["normal_form"]["t_prime"] = nf.t_prime
    h = _toda_curve(c)
    report["quotient"] = h.to_json()
    report["quotient"]["branch_points"] = [complex(r) for r in h.roots()]
    return report


def _periods_for(h: cv.HyperellipticCurve, basis: str, tol: float) -> rm.PeriodData:
    if basis == "cyclic":
        return rm.oriented_cyclic_periods(h, tol)
    if basis == "cut":
        return rm.periods(h, tol=tol)
    raise ConfigError(f"unknown basis {basis!r}")


def cmd_periods(cfg: Config, out: Path) -> dict:
    c = curve_from_config(cfg)
    tol = _positive("tol", cfg.float("periods", "tol", 1e-13))
    basis = cfg.raw("periods", "basis", "cyclic")
    h = _toda_curve(c)
    pd = _periods_for(h, basis, tol)
    report = pd.to_json()
    report.update({"genus": pd.genus, "symmetry_defect": pd.symmetry_defect(),
                   "min_im_eig": pd.min_im_eig(), "orientation_fixed": pd.orientation_fixed})
    return report


def _solve_es(cfg: Config, c: cv.SpectralCurve):
    if not cfg.has("es"):
        raise ConfigError("missing [es] section")
    try:
        ints = rm.ESData.from_list(cfg.ints("es", "ints"))
    except ValueError as ex:
        raise ConfigError(f"[es] ints: {ex}") from ex
    if ints.genus != c.n - 1:
        raise ConfigError(f"ints must have 2(n-1) = {2 * (c.n - 1)} entries")
    tol = _positive("tol", cfg.float("es", "tol", 1e-12))
    quad_tol = _positive("quad_tol", cfg.float("es", "quad_tol", 1e-14))
    free = cfg.raw("es", "free", "auto")
    if free not in ("auto", "scale", "all"):
        raise ConfigError(f"unknown free mode {free!r}")
    init = _toda_curve(c)
    try:
        rep = rm.es_solve(c.n, ints, init, tol=tol, free=free,
                          max_iter=cfg.int("es", "max_iter", 60), quad_tol=quad_tol)
    except rm.ESInfeasibleError as ex:
        report = {"infeasible": True, "message": str(ex)}
        if ex.report is not None:
            report.update(ex.report.to_json())
        raise CommandFailure(EXIT_INFEASIBLE, f"infeasible: {ex}", report) from ex
    return rep, quad_tol


def _solved_spectral(rep) -> cv.SpectralCurve:
    h = rep.curve
    return cv.SpectralCurve.cyclic(h.n, h.a, h.beta_abs)


def cmd_es(cfg: Config, out: Path) -> dict:
    if not cfg.has("curve"):
        raise ConfigError("missing [curve] section (initial curve)")
    c = curve_from_config(cfg)
    rep, quad_tol = _solve_es(cfg, c)
    h, pd = rep.curve, rep.periods
    report = rep.to_json()
    refined = rm.es_residual(rm.oriented_cyclic_periods(h, quad_tol / 10), rep.ints, h.n)
    report["refined_residual"] = float(np.abs(refined).max())
    ud = rm.gamma_infinity_periods(h, pd)
    report["U"] = {"re": ud.U.real, "im": ud.U.imag}
    report["U_a_periods_after"] = float(np.abs(ud.a_periods_after).max())
    report["U_bilinear_defect"] = float(np.abs(ud.U - ud.bilinear_U).max())
    report["tau"] = {"re": pd.tau.real, "im": pd.tau.imag}
    if h.n == 2:
        red = rm.reducibility_check(_solved_spectral(rep))
        report["tau_hat"] = red.tau_hat
        report["half_period_defect"] = rm.half_period_defect(ud.U, 2, np.array([[red.tau_hat]]))
    else:
        report["half_period_defect"] = None
        report["note"] = "covering period matrix not available for n > 2"
    return report


def _fay_accola(tau, tau_hat, n, samples, rng) -> dict:
    ratios = []
    while len(ratios) < samples:
        z = rng.normal(size=tau.shape[0]) * 0.5 + 1j * rng.normal(size=tau.shape[0]) * 0.3
        try:
            ratios.append(th.fay_accola_ratio(z, tau, tau_hat, n))
        except ZeroDivisionError:
            continue
    ratios = np.array(ratios)
    ref = np.mean(ratios)
    out = {"c0": complex(ref), "deviation": float(np.abs(ratios - ref).max() / abs(ref)),
           "samples": samples}
    if n == 2:
        expected = 1 / th.theta(np.zeros(1), tau_hat, np.zeros(1), np.array([0.5]))
        out["c0_expected"] = complex(expected)
        out["c0_defect"] = float(abs(ref - expected))
    return out


def cmd_theta(cfg: Config, out: Path) -> dict:
    sec = "theta"
    modes = [m.strip() for m in cfg.raw(sec, "mode", "fay_accola,h3").split(",") if m.strip()]
    bad = set(modes) - {"fay_accola", "h3"}
    if bad:
        raise ConfigError(f"unknown theta modes {sorted(bad)}")
    grid = cfg.int(sec, "grid", 400)
    if grid < 2:
        raise ConfigError("grid must be at least 2")
    samples = cfg.int(sec, "samples", 20)
    if samples < 2:
        raise ConfigError("samples must be at least 2")
    rng = np.random.default_rng(_seed(cfg, sec))
    report: dict = {"modes": modes}
    if cfg.has(sec, "tau"):
        tau = cfg.matrix(sec, "tau")
        if "h3" in modes:
            raise ConfigError("h3 needs a curve, not an explicit tau")
        if tau.shape != (1, 1):
            raise ConfigError("explicit tau is supported for n = 2 (1x1) only")
        th.check_tau(tau)
        report["tau"] = tau[0, 0]
        report["fay_accola"] = _fay_accola(tau, 2 * tau, 2, samples, rng)
        return report
    c = curve_from_config(cfg)
    if cfg.has("es"):
        rep, _ = _solve_es(cfg, c)
        h, pd = rep.curve, rep.periods
        c = _solved_spectral(rep)
        report["es_residual"] = rep.norm
    else:
        h = _toda_curve(c)
        pd = rm.oriented_cyclic_periods(h)
    n = h.n
    report["curve"] = h.to_json()
    report["tau"] = {"re": pd.tau.real, "im": pd.tau.imag}
    if "fay_accola" in modes:
        if n == 2:
            red = rm.reducibility_check(c)
            report["fay_accola"] = _fay_accola(pd.tau, np.array([[red.tau_hat]]), 2, samples, rng)
        else:
            report["fay_accola"] = {"skipped": "covering period matrix not available for n > 2"}
    if "h3" in modes:
        ud = rm.gamma_infinity_periods(h, pd)
        base, e, K = rm.base_point_data(h, pd)
        scan = th.h3_scan(ud.U, base.z, pd.tau, n, grid=grid)
        scan.to_csv(out / "h3_scan.csv")
        report["h3"] = {"U": {"re": ud.U.real, "im": ud.U.imag},
                        "K": {"re": K.z.real, "im": K.z.imag},
                        "zeros": scan.zeros, "interior_min": scan.interior_min,
                        "symmetry_defect": scan.symmetry_defect,
                        "endpoints": [float(scan.product[0]), float(scan.product[-1])],
                        "grid": grid}
    return report


COMMANDS = {"simulate": cmd_simulate, "curve": cmd_curve, "periods": cmd_periods,
            "es": cmd_es, "theta": cmd_theta}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mono", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="INI config file")
    ap.add_argument("--out", default=".", help="output directory (created if missing)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _write(out: Path, name: str, report: dict) -> None:
    (out / f"{name}.json").write_text(cv.dumps(report) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as ex:
        return EXIT_CONFIG if ex.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        cfg = Config(args.config)
        out.mkdir(parents=True, exist_ok=True)
        report = COMMANDS[args.command](cfg, out)
    except ConfigError as ex:
        print(f"mono: config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    except CommandFailure as ex:
        print(f"mono: {ex}", file=sys.stderr)
        if ex.report is not None:
            ex.report["error"] = str(ex)
            _write(out, args.command, ex.report)
        return ex.code
    except (rm.IndefiniteTauError, th.ThetaError) as ex:
        print(f"mono: indefinite Im tau: {ex}", file=sys.stderr)
        return EXIT_TAU
    except (rm.PeriodMatrixError, cv.DegenerateCurveError, rm.HomologyError) as ex:
        print(f"mono: invariant violation: {ex}", file=sys.stderr)
        return EXIT_INVARIANT
    _write(out, args.command, report)
    print(out / f"{args.command}.json")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
